use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use pointfrac::highrank::*;
use pointfrac::kernels::{kernel_l2_norm_sq, GreenKernel};
use pointfrac::operators::{apply_operator, DomainElement, Family};
use pointfrac::params::{deficiency_index, Extended, ExtensionParam, ProblemParams};
use pointfrac::quad::{integrate_half_line, Tolerance};
use pointfrac::radial::{make_grid, GridSpec, RadialFunction, TailTerm};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Moment-free: ∫ p²(p²−1)/(1+p²)⁴ dp = 0.
fn free_a(d: u32) -> RadialFunction {
    let grid = make_grid(GridSpec::default(), d).unwrap();
    RadialFunction::from_real_fn(
        &grid,
        |p| (p * p - 1.0) / (1.0 + p * p).powi(4),
        vec![TailTerm::new(1.0, 6.0), TailTerm::new(-5.0, 8.0), TailTerm::new(14.0, 10.0)],
    )
    .unwrap()
}

/// Moment-free in 3D: ∫ p²·p²(p²−5/3)/(1+p²)⁵ dp = 0.
fn free_b() -> RadialFunction {
    let grid = make_grid(GridSpec::default(), 3).unwrap();
    RadialFunction::from_real_fn(
        &grid,
        |p| p * p * (p * p - 5.0 / 3.0) / (1.0 + p * p).powi(5),
        vec![TailTerm::new(1.0, 6.0), TailTerm::new(-20.0 / 3.0, 8.0), TailTerm::new(70.0 / 3.0, 10.0)],
    )
    .unwrap()
}

#[test]
fn basis_enumeration() {
    let b = kernel_basis(&ProblemParams::new(3, 2.0, 1.0).unwrap(), Flavor::Homogeneous).unwrap();
    assert_eq!(b.len(), 1);
    assert_eq!(b[0].gamma, vec![0, 0, 0]);
    let b = kernel_basis(&ProblemParams::new(3, 3.0, 1.0).unwrap(), Flavor::Homogeneous).unwrap();
    let gammas: Vec<Vec<u32>> = b.iter().map(|e| e.gamma.clone()).collect();
    assert_eq!(gammas, vec![vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
    let b = kernel_basis(&ProblemParams::new(1, 1.8, 1.0).unwrap(), Flavor::Homogeneous).unwrap();
    assert_eq!(b.len(), 2);
    for d in 1..=3u32 {
        for n in 1..=3u32 {
            let s = d as f64 / 2.0 + n as f64 - 0.5;
            let p = ProblemParams::new(d, s, 1.0).unwrap();
            assert_eq!(kernel_basis(&p, Flavor::Homogeneous).unwrap().len() as u64, deficiency_index(d, s).unwrap());
        }
    }
}

#[test]
fn angular_moments_known_values() {
    assert!((angular_moment(&[0, 0, 0]) - 4.0 * PI).abs() < 1e-13);
    assert!((angular_moment(&[2, 0, 0]) - 4.0 * PI / 3.0).abs() < 1e-13);
    assert!((angular_moment(&[2, 2, 0]) - 4.0 * PI / 15.0).abs() < 1e-13);
    assert!((angular_moment(&[4, 0, 0]) - 4.0 * PI / 5.0).abs() < 1e-13);
    assert!((angular_moment(&[0, 0]) - 2.0 * PI).abs() < 1e-13);
    assert_eq!(angular_moment(&[1, 0, 0]), 0.0);
    assert_eq!(angular_moment(&[3]), 0.0);
    assert_eq!(angular_moment(&[2]), 2.0);
}

#[test]
fn gram_matches_kernel_norm_and_parity() {
    let p = ProblemParams::new(3, 2.0, 1.0).unwrap();
    let g = gram_matrix(&kernel_basis(&p, Flavor::Homogeneous).unwrap()).unwrap();
    assert!((g[(0, 0)] - PI * PI).abs() < 1e-12);
    let norm = kernel_l2_norm_sq(&GreenKernel::homogeneous(p).unwrap()).unwrap();
    assert!((g[(0, 0)] / ((2.0 * PI).powi(3) * norm) - 1.0).abs() < 1e-10);
    let p3 = ProblemParams::new(3, 3.0, 1.0).unwrap();
    let g3 = gram_matrix(&kernel_basis(&p3, Flavor::Homogeneous).unwrap()).unwrap();
    assert_eq!(g3[(1, 2)], 0.0);
    assert_eq!(g3, g3.transpose());
}

fn gram_oracle(flavor: Flavor, d: u32, s: f64, lambda: f64, g1: &[u32], g2: &[u32]) -> f64 {
    let alpha: Vec<u32> = g1.iter().zip(g2).map(|(a, b)| a + b).collect();
    let m: u32 = alpha.iter().sum();
    let x = |r: f64| match flavor {
        Flavor::Homogeneous => r.powf(s) + lambda,
        Flavor::Inhomogeneous => (r * r + lambda).powf(0.5 * s),
    };
    let e = d as f64 - 1.0 + m as f64;
    let radial = integrate_half_line(|r| r.powf(e) / x(r).powi(2), &[(1.0, 2.0 * s - e)], 1e-10, 1e9, Tolerance::rel(1e-13)).unwrap();
    angular_moment(&alpha) * radial
}

#[test]
fn gram_entries_against_quadrature() {
    for flavor in [Flavor::Homogeneous, Flavor::Inhomogeneous] {
        for (d, s, lambda) in [(3u32, 3.0, 1.0), (3, 3.3, 0.7), (1, 1.8, 2.0), (2, 2.4, 1.5)] {
            let p = ProblemParams::new(d, s, lambda).unwrap();
            let basis = kernel_basis(&p, flavor).unwrap();
            let g = gram_matrix(&basis).unwrap();
            for i in 0..basis.len() {
                for j in 0..basis.len() {
                    let o = gram_oracle(flavor, d, s, lambda, &basis[i].gamma, &basis[j].gamma);
                    assert!((g[(i, j)] - o).abs() <= 1e-6 * o.abs().max(1e-300) + 1e-300, "{flavor:?} d={d} s={s} ({i},{j}) {} vs {o}", g[(i, j)]);
                }
            }
            let min = g.clone().symmetric_eigenvalues().min();
            assert!(min > 0.0, "not positive definite: {min}");
        }
    }
}

fn split(p: &ProblemParams, n: usize) -> Arc<TSplit> {
    let basis = kernel_basis(p, Flavor::Homogeneous).unwrap();
    let all: Vec<usize> = (0..basis.len()).collect();
    Arc::new(TSplit::new(basis, &all[..n], &all[n..]).unwrap())
}

#[test]
fn rank_one_reduction() {
    let p = ProblemParams::new(3, 1.8, 1.3).unwrap();
    let tau = 0.7;
    let sp = split(&p, 1);
    let e = make_t_element(free_a(3), DVector::from_element(1, c(0.4)), DVector::zeros(0), DMatrix::from_element(1, 1, c(tau)), sp).unwrap();
    let g = e.element();
    // κ on 𝖦 is (2π)^{3/2} times the coefficient of 1/X
    let kappa: Complex64 = g.atoms.iter().filter(|a| a.power == 1).map(|a| a.coef).sum::<Complex64>() * (2.0 * PI).powf(1.5);
    let regular = e.regular_part().to_radial().unwrap();
    let ext = ExtensionParam::TauAt { lambda: 1.3, tau: Extended::Finite(tau) };
    let de = DomainElement::from_parts(regular, kappa, &p, &ext, Family::HomogeneousK).unwrap();
    assert!(de.boundary_residual().unwrap() < 1e-10);
    let ours = apply_t_operator(&e).to_radial().unwrap();
    let theirs = apply_operator(&de);
    let diff = ours.sub(&theirs).unwrap().max_abs();
    assert!(diff < 1e-12 * theirs.max_abs(), "{diff:e}");
}

#[test]
fn closure_domain_and_zero_t() {
    let p = ProblemParams::new(3, 3.0, 1.0).unwrap();
    let sp = split(&p, 2);
    let f = free_a(3);
    let e = make_t_element(f.clone(), DVector::zeros(2), DVector::zeros(2), DMatrix::zeros(2, 2), sp.clone()).unwrap();
    assert!(e.element().atoms.is_empty());
    assert_eq!(e.element().radial, f);
    let xf = apply_t_operator(&e).to_radial().unwrap();
    let expect = RadialFunction::from_real_fn(&f.grid, |r| (r.powi(3) + 1.0) * (r * r - 1.0) / (1.0 + r * r).powi(4), vec![]).unwrap();
    assert!(xf.sub(&expect).unwrap().max_abs() < 1e-14);
    // T = 0: no regular charge, only kernel directions in g
    let u = DVector::from_vec(vec![c(1.0), c(-0.5)]);
    let e0 = make_t_element(f, u, DVector::zeros(2), DMatrix::zeros(2, 2), sp).unwrap();
    assert!(e0.regular_part().atoms.is_empty());
    assert!(e0.element().atoms.iter().all(|a| a.power == 1));
}

#[test]
fn rejects_bad_inputs() {
    let p = ProblemParams::new(3, 3.0, 1.0).unwrap();
    let sp = split(&p, 2);
    let r = make_t_element(free_a(3), DVector::zeros(3), DVector::zeros(2), DMatrix::zeros(2, 2), sp.clone());
    assert!(matches!(r, Err(pointfrac::Error::DimensionMismatch(_))));
    let grid = make_grid(GridSpec::default(), 3).unwrap();
    let gauss = RadialFunction::from_real_fn(&grid, |q| (-q * q).exp(), vec![]).unwrap();
    assert!(make_t_element(gauss, DVector::zeros(2), DVector::zeros(2), DMatrix::zeros(2, 2), sp).is_err());
}

#[test]
fn kernel_images_annihilate_closure_domain() {
    for s in [2.0, 3.0] {
        let p = ProblemParams::new(3, s, 1.0).unwrap();
        let f = MomentumForm { radial: free_b(), atoms: vec![], flavor: Flavor::Homogeneous, params: p };
        for b in kernel_basis(&p, Flavor::Homogeneous).unwrap() {
            let zero = RadialFunction::zeros(&f.radial.grid);
            let poly = MomentumForm { radial: zero, atoms: vec![Atom { gamma: b.gamma.clone(), power: 0, coef: c(1.0) }], flavor: Flavor::Homogeneous, params: p };
            let v = poly.inner(&f).unwrap();
            assert!(v.norm() < 1e-10, "γ={:?}: {v}", b.gamma);
        }
    }
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    let a = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    (&a + a.adjoint()) * c(0.5)
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> DVector<Complex64> {
    DVector::from_fn(n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

#[test]
fn symmetry_for_hermitian_t_only() {
    let p = ProblemParams::new(3, 3.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [2usize, 4] {
        let sp = split(&p, n);
        let rest = 4 - n;
        for _ in 0..5 {
            let t = random_hermitian(&mut rng, n);
            let e1 = make_t_element(free_a(3), random_vec(&mut rng, n), random_vec(&mut rng, rest), t.clone(), sp.clone()).unwrap();
            let e2 = make_t_element(free_b(), random_vec(&mut rng, n), random_vec(&mut rng, rest), t, sp.clone()).unwrap();
            let res = symmetry_residual(&e1, &e2).unwrap();
            assert!(res < 1e-9, "N={n}: {res:e}");
        }
        let mut t = random_hermitian(&mut rng, n);
        t[(0, 1)] += c(1.0);
        let u1 = DVector::from_fn(n, |i, _| c(if i == 0 { 1.0 } else { 0.0 }));
        let u2 = DVector::from_fn(n, |i, _| c(if i == 1 { 1.0 } else { 0.0 }));
        let e1 = make_t_element(free_a(3), u1, DVector::zeros(rest), t.clone(), sp.clone()).unwrap();
        let e2 = make_t_element(free_b(), u2, DVector::zeros(rest), t, sp.clone()).unwrap();
        assert!(symmetry_residual(&e1, &e2).unwrap() > 1e-3);
    }
}

#[test]
fn worst_singularity_examples() {
    assert!((worst_singularity_exponent(3, 2.0).unwrap() - 1.0).abs() < 1e-15);
    assert!((worst_singularity_exponent(3, 1.8).unwrap() - 1.2).abs() < 1e-15);
    assert!(worst_singularity_exponent(3, 1.5).is_err());
    assert!(worst_singularity_exponent(3, 1.0).is_err());
}

proptest! {
    #[test]
    fn singularity_exponent_range(d in 1u32..=3, n in 1u32..=4, frac in 0.01f64..0.99) {
        let s = d as f64 / 2.0 + n as f64 - 1.0 + frac;
        let e = worst_singularity_exponent(d, s).unwrap();
        prop_assert!(e > d as f64 / 2.0 - 1.0 && e < d as f64 / 2.0);
    }

    #[test]
    fn frame_is_orthonormal(s in 2.6f64..3.4, lambda in 0.2f64..5.0, n in 1usize..4) {
        let p = ProblemParams::new(3, s, lambda).unwrap();
        let basis = kernel_basis(&p, Flavor::Homogeneous).unwrap();
        let g = gram_matrix(&basis).unwrap();
        let sp = split(&p, n);
        let overlap = &sp.frame * g * sp.frame.transpose();
        let eye = DMatrix::<f64>::identity(4, 4);
        prop_assert!((overlap - eye).abs().max() < 1e-10);
    }
}
