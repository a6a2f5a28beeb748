use std::f64::consts::PI;

use pointfrac::kernels::*;
use pointfrac::params::ProblemParams;
use pointfrac::radial::sphere_area;
use proptest::prelude::*;

/// ln(e^{su} + λ) without overflow.
fn ln_sum(s: f64, u: f64, lambda: f64) -> f64 {
    if s * u > lambda.ln() {
        s * u + (lambda * (-s * u).exp()).ln_1p()
    } else {
        lambda.ln() + ((s * u).exp() / lambda).ln_1p()
    }
}

/// ∫ exp(g(u)) du over the line by the trapezoid rule; `rate` bounds the slower exponential decay.
fn log_trapezoid(g: impl Fn(f64) -> f64, rate: f64) -> f64 {
    let h = 0.02;
    let n = (40.0 / rate / h).ceil() as i64;
    (-n..=n).map(|k| g(k as f64 * h).exp()).sum::<f64>() * h
}

/// (2π)^{-d} ∫ dp (|p|^s + λ)^{-power}.
fn radial_moment(d: u32, s: f64, lambda: f64, power: i32) -> f64 {
    let df = d as f64;
    let p = power as f64;
    let rate = df.min(p * s - df);
    sphere_area(d) * log_trapezoid(|u| df * u - p * ln_sum(s, u, lambda), rate) * (2.0 * PI).powf(-df)
}

fn hom(d: u32, s: f64, lambda: f64) -> GreenKernel {
    GreenKernel::homogeneous(ProblemParams::new(d, s, lambda).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn value_at_zero_matches_moment(s in prop_oneof![1.05f64..1.45, 3.6f64..4.4], lambda in 0.2f64..5.0) {
        let d = if s < 2.0 { 1 } else { 3 };
        let want = radial_moment(d, s, lambda, 1);
        let got = kernel_at_zero(d, s, lambda).unwrap();
        prop_assert!((got - want).abs() <= 1e-10 * want, "{got} vs {want}");
    }

    #[test]
    fn l2_norm_matches_moment(s in prop_oneof![0.55f64..0.95, 1.05f64..1.45, 1.55f64..2.45], lambda in 0.2f64..5.0) {
        let d = if s < 1.5 { 1 } else { 3 };
        let want = radial_moment(d, s, lambda, 2);
        let got = kernel_l2_norm_sq(&hom(d, s, lambda)).unwrap();
        prop_assert!((got - want).abs() <= 1e-9 * want, "{got} vs {want}");
    }

    #[test]
    fn hat_is_positive_and_decreasing(s in 1.55f64..2.45, lambda in 0.1f64..10.0, a in 0.0f64..50.0, b in 0.0f64..50.0) {
        let k = hom(3, s, lambda);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(k.hat(hi) > 0.0);
        prop_assert!(k.hat(lo) >= k.hat(hi));
    }

    #[test]
    fn shift_difference_matches_quadrature(s in 1.55f64..2.45, l1 in 0.2f64..5.0, l2 in 0.2f64..5.0) {
        let g = |u: f64| 3.0 * u - ln_sum(s, u, l1) - ln_sum(s, u, l2);
        let want = sphere_area(3) * (l2 - l1) * log_trapezoid(g, 2.0 * s - 3.0);
        let got = lambda_difference_integral(3, s, l1, l2).unwrap();
        prop_assert!((got - want).abs() <= 1e-9 * want.abs().max(1e-12), "{got} vs {want}");
    }
}

#[test]
fn position_kernel_one_dimensional_closed_form() {
    // s = 2 in 1D: e^{-√λ|x|} / (2√λ)
    let lambda: f64 = 2.5;
    let k = GreenKernel::homogeneous(ProblemParams::with_tolerance(1, 2.0, lambda, 1e-9).unwrap()).unwrap();
    for x in [0.1, 0.7, 2.0, 5.0] {
        let want = (-lambda.sqrt() * x).exp() / (2.0 * lambda.sqrt());
        let got = kernel_position(&k, x).unwrap();
        assert!((got - want).abs() <= 1e-8 * want, "x={x}: {got} vs {want}");
    }
}

#[test]
fn singularity_constant_matches_small_x() {
    // G(x) = Λ|x|^{s−d} + c + o(1) for d − s ∈ (0, 1); two radii eliminate c
    for s in [2.1, 2.4] {
        let k = hom(3, s, 1.0);
        let a = s - 3.0;
        let (x1, x2): (f64, f64) = (1e-4, 2e-4);
        let lam = (kernel_position(&k, x1).unwrap() - kernel_position(&k, x2).unwrap()) / (x1.powf(a) - x2.powf(a));
        let want = singularity_constant(3, s).unwrap();
        assert!((lam / want - 1.0).abs() < 1e-4, "s={s}: {lam} vs {want}");
    }
    assert!(singularity_constant(1, 1.2).is_err());
}

#[test]
fn inhomogeneous_value_at_zero() {
    for (s, lambda) in [(3.5, 1.0), (4.0, 0.3), (5.2, 7.0)] {
        let g = |u: f64| 3.0 * u - s / 2.0 * ln_sum(2.0, u, lambda);
        let want = sphere_area(3) * log_trapezoid(g, s - 3.0) * (2.0 * PI).powi(-3);
        let got = inhomogeneous_kernel_at_zero(s, lambda).unwrap();
        assert!((got - want).abs() <= 1e-10 * want, "{got} vs {want}");
    }
    assert!(inhomogeneous_kernel_at_zero(3.0, 1.0).is_err());
}
