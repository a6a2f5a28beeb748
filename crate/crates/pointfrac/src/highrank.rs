//! Deficiency spaces of dimension 𝒥 ≥ 1: kernel bases p^γ/X, Gram matrices,
//! T-parametrized domain elements and their operator action.
//!
//! Non-radial content is carried symbolically as atoms c·p^γ/X^k with X the
//! family symbol; only the radial part of an element is sampled.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::params::{deficiency_index, multi_indices, ProblemParams};
use crate::radial::{self, inner_product, multiplier_apply, Multiplier, RadialFunction, TailTerm};

/// Symbol of the unperturbed operator: |p|^s + λ or (p²+λ)^{s/2}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    Homogeneous,
    Inhomogeneous,
}

impl Flavor {
    pub fn symbol(self, s: f64, lambda: f64) -> Multiplier {
        match self {
            Flavor::Homogeneous => Multiplier::homogeneous_symbol(s, lambda),
            Flavor::Inhomogeneous => Multiplier::bessel_power(0.5 * s, lambda),
        }
    }

    fn eval(self, s: f64, lambda: f64, r: f64) -> f64 {
        match self {
            Flavor::Homogeneous => r.powf(s) + lambda,
            Flavor::Inhomogeneous => (r * r + lambda).powf(0.5 * s),
        }
    }

    /// Large-r expansion of r^m X^{-k} as (coefficient, power) pairs.
    fn atom_asymptotic(self, s: f64, lambda: f64, m: f64, k: u32) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        match self {
            Flavor::Homogeneous => {
                let mut c = 1.0;
                for j in 0..6 {
                    out.push((c * lambda.powi(j), m - (k as f64 + j as f64) * s));
                    c *= -(k as f64 + j as f64) / (j as f64 + 1.0);
                }
            }
            Flavor::Inhomogeneous => {
                let a = -0.5 * s * k as f64;
                let mut c = 1.0;
                for j in 0..6 {
                    out.push((c * lambda.powi(j), m + 2.0 * a - 2.0 * j as f64));
                    c *= (a - j as f64) / (j as f64 + 1.0);
                }
            }
        }
        out
    }

    /// ∫_0^∞ r^{a−1} X^{−k} dr in closed form.
    fn radial_moment(self, s: f64, lambda: f64, a: f64, k: u32) -> Result<f64> {
        let kf = k as f64;
        let beta = |x: f64, y: f64| (ln_gamma(x) + ln_gamma(y) - ln_gamma(x + y)).exp();
        match self {
            Flavor::Homogeneous => {
                let q = a / s;
                if !(q > 0.0 && q < kf) {
                    return Err(Error::NotIntegrable(format!("∫ r^{}/(r^s+λ)^{k} dr with s = {s}", a - 1.0)));
                }
                Ok(lambda.powf(q - kf) / s * beta(q, kf - q))
            }
            Flavor::Inhomogeneous => {
                let (h, m) = (0.5 * a, 0.5 * s * kf);
                if !(h > 0.0 && h < m) {
                    return Err(Error::NotIntegrable(format!("∫ r^{}/(r²+λ)^{m} dr", a - 1.0)));
                }
                Ok(0.5 * lambda.powf(h - m) * beta(h, m - h))
            }
        }
    }
}

/// ∫_{S^{d−1}} ω^α dω; zero unless every component of α is even.
pub fn angular_moment(alpha: &[u32]) -> f64 {
    if alpha.iter().any(|a| a % 2 == 1) {
        return 0.0;
    }
    let d = alpha.len() as f64;
    let total: u32 = alpha.iter().sum();
    let num: f64 = alpha.iter().map(|&a| gamma((a as f64 + 1.0) / 2.0)).product();
    2.0 * num / gamma((total as f64 + d) / 2.0)
}

/// u_γ with momentum form p^γ/X.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelBasisElement {
    pub gamma: Vec<u32>,
    pub flavor: Flavor,
    pub params: ProblemParams,
}

/// One element per multi-index with |γ| ≤ n−1, s ∈ I_n.
pub fn kernel_basis(params: &ProblemParams, flavor: Flavor) -> Result<Vec<KernelBasisElement>> {
    let n = params.regime().n;
    if n == 0 {
        return Ok(Vec::new());
    }
    let basis: Vec<KernelBasisElement> = multi_indices(params.d, n - 1)
        .into_iter()
        .map(|gamma| KernelBasisElement { gamma, flavor, params: *params })
        .collect();
    debug_assert_eq!(basis.len() as u64, deficiency_index(params.d, params.s)?);
    Ok(basis)
}

fn add_indices(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// ∫ p^{γ_a+γ_b} X^{−k_a−k_b} dp = A(γ_a+γ_b)·R.
fn atom_overlap(flavor: Flavor, p: &ProblemParams, ga: &[u32], ka: u32, gb: &[u32], kb: u32) -> Result<f64> {
    let alpha = add_indices(ga, gb);
    let ang = angular_moment(&alpha);
    if ang == 0.0 {
        return Ok(0.0);
    }
    let m: u32 = alpha.iter().sum();
    Ok(ang * flavor.radial_moment(p.s, p.lambda, p.d as f64 + m as f64, ka + kb)?)
}

/// ⟨u_γ, u_γ'⟩ for a common-parameter basis.
pub fn gram_matrix(basis: &[KernelBasisElement]) -> Result<DMatrix<f64>> {
    let Some(first) = basis.first() else {
        return Ok(DMatrix::zeros(0, 0));
    };
    if basis.iter().any(|b| b.params != first.params || b.flavor != first.flavor || b.gamma.len() != first.params.d as usize) {
        return Err(Error::DimensionMismatch("basis elements must share parameters and flavor".into()));
    }
    let n = basis.len();
    let entries = (0..n * n)
        .into_par_iter()
        .map(|ij| {
            let (i, j) = (ij / n, ij % n);
            atom_overlap(first.flavor, &first.params, &basis[i].gamma, 1, &basis[j].gamma, 1)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DMatrix::from_row_slice(n, n, &entries))
}

/// c·p^γ/X^k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub gamma: Vec<u32>,
    pub power: u32,
    pub coef: Complex64,
}

/// Radial sampled part plus a finite combination of atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumForm {
    pub radial: RadialFunction,
    pub atoms: Vec<Atom>,
    pub flavor: Flavor,
    pub params: ProblemParams,
}

impl MomentumForm {
    /// ⟨f, p^γ/X^k⟩ for the radial part f.
    fn radial_atom(&self, gamma: &[u32], k: u32) -> Result<Complex64> {
        let ang = angular_moment(gamma);
        if ang == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let m = gamma.iter().sum::<u32>() as f64;
        let (flavor, s, lambda) = (self.flavor, self.params.s, self.params.lambda);
        let tail = flavor.atom_asymptotic(s, lambda, m, k).into_iter().map(|(c, pw)| TailTerm::new(c, -pw)).collect();
        let weight = RadialFunction::from_real_fn(&self.radial.grid, |r| r.powf(m) / flavor.eval(s, lambda, r).powi(k as i32), tail)?;
        Ok(inner_product(&self.radial, &weight)? * (ang / radial::sphere_area(self.params.d)))
    }

    /// L² inner product ⟨self, other⟩, antilinear in self.
    pub fn inner(&self, other: &MomentumForm) -> Result<Complex64> {
        if self.flavor != other.flavor || self.params != other.params {
            return Err(Error::DimensionMismatch("momentum forms with different symbols".into()));
        }
        let mut total = inner_product(&self.radial, &other.radial)?;
        for b in &other.atoms {
            total += self.radial_atom(&b.gamma, b.power)? * b.coef;
        }
        for a in &self.atoms {
            total += (other.radial_atom(&a.gamma, a.power)? * a.coef).conj();
        }
        for a in &self.atoms {
            for b in &other.atoms {
                let ov = atom_overlap(self.flavor, &self.params, &a.gamma, a.power, &b.gamma, b.power)?;
                total += a.coef.conj() * b.coef * ov;
            }
        }
        Ok(total)
    }

    /// Samples the radial sector; atoms with γ ≠ 0 have no radial profile and are rejected.
    pub fn to_radial(&self) -> Result<RadialFunction> {
        let (flavor, s, lambda) = (self.flavor, self.params.s, self.params.lambda);
        let mut out = self.radial.clone();
        for a in &self.atoms {
            if a.gamma.iter().any(|&g| g != 0) {
                return Err(Error::DomainError("non-radial atom has no radial profile".into()));
            }
            let tail = flavor.atom_asymptotic(s, lambda, 0.0, a.power).into_iter().map(|(c, pw)| TailTerm::new(c, -pw)).collect();
            let atom = RadialFunction::from_real_fn(&out.grid, |r| flavor.eval(s, lambda, r).powi(-(a.power as i32)), tail)?;
            out = out.combine(Complex64::new(1.0, 0.0), &atom, a.coef)?;
        }
        Ok(out)
    }
}

/// Orthonormal frame of the deficiency space adapted to a caller-chosen split:
/// the first N vectors span 𝒟(T) = span{u_γ : γ ∈ domain}, the rest its orthogonal complement.
#[derive(Debug, Clone)]
pub struct TSplit {
    pub basis: Vec<KernelBasisElement>,
    pub order: Vec<usize>,
    pub domain_dim: usize,
    /// Row j holds the coefficients of e_j over `basis` (in original indexing).
    pub frame: DMatrix<f64>,
}

impl TSplit {
    pub fn new(basis: Vec<KernelBasisElement>, domain: &[usize], complement: &[usize]) -> Result<Self> {
        let order: Vec<usize> = domain.iter().chain(complement).copied().collect();
        let mut seen = vec![false; basis.len()];
        for &i in &order {
            if i >= basis.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::DimensionMismatch(format!("index {i} is out of range or repeated")));
            }
        }
        if domain.is_empty() {
            return Err(Error::DimensionMismatch("𝒟(T) needs at least one basis element".into()));
        }
        let g = gram_matrix(&basis)?;
        let m = order.len();
        let sub = DMatrix::from_fn(m, m, |i, j| g[(order[i], order[j])]);
        let chol = sub.cholesky().ok_or_else(|| Error::NonInvertible("Gram matrix is not positive definite".into()))?;
        let l_inv = chol.l().try_inverse().ok_or_else(|| Error::NonInvertible("singular Cholesky factor".into()))?;
        let mut frame = DMatrix::zeros(m, basis.len());
        for j in 0..m {
            for k in 0..m {
                frame[(j, order[k])] = l_inv[(j, k)];
            }
        }
        Ok(TSplit { basis, order, domain_dim: domain.len(), frame })
    }

    fn params(&self) -> (&ProblemParams, Flavor) {
        (&self.basis[0].params, self.basis[0].flavor)
    }

    /// Atoms Σ_j c_j e_j with the frame vectors offset by `start`, each raised to X^{-power}.
    fn atoms(&self, coefs: &DVector<Complex64>, start: usize, power: u32) -> Vec<Atom> {
        (0..self.basis.len())
            .filter_map(|b| {
                let c: Complex64 = coefs.iter().enumerate().map(|(j, cj)| cj * self.frame[(start + j, b)]).sum();
                (c != Complex64::new(0.0, 0.0)).then(|| Atom { gamma: self.basis[b].gamma.clone(), power, coef: c })
            })
            .collect()
    }
}

/// g = f + (k_F+λ)^{-1}(Tu + w) + u.
#[derive(Debug, Clone)]
pub struct TDomainElement {
    pub f: RadialFunction,
    pub u: DVector<Complex64>,
    pub w: DVector<Complex64>,
    pub t: DMatrix<Complex64>,
    pub split: Arc<TSplit>,
}

/// Checks ∫ p^γ f̂ = 0 for |γ| ≤ n−1, relative to ∫ |p^γ f̂|.
fn check_moment_free(f: &RadialFunction, p: &ProblemParams) -> Result<()> {
    let n = p.regime().n;
    for deg in (0..n).step_by(2) {
        let w = RadialFunction::from_real_fn(&f.grid, |r| r.powi(deg as i32), vec![TailTerm::new(1.0, -(deg as f64))])?;
        let moment = inner_product(&w, f)?.norm();
        let abs_f = RadialFunction::from_values(&f.grid, f.values.iter().map(|v| Complex64::new(v.norm(), 0.0)).collect(), vec![])?;
        let scale = inner_product(&w, &abs_f)?.norm().max(1e-300);
        if moment > 1e-8 * scale {
            return Err(Error::DomainViolation(format!("moment of degree {deg} is {moment:e}, not zero")));
        }
    }
    Ok(())
}

pub fn make_t_element(
    f: RadialFunction,
    u: DVector<Complex64>,
    w: DVector<Complex64>,
    t: DMatrix<Complex64>,
    split: Arc<TSplit>,
) -> Result<TDomainElement> {
    let (p, _) = split.params();
    let n = split.domain_dim;
    let rest = split.order.len() - n;
    if u.len() != n || t.nrows() != n || t.ncols() != n || w.len() != rest {
        return Err(Error::DimensionMismatch(format!(
            "u has {}, T is {}x{}, w has {}; the split has {n} + {rest}",
            u.len(),
            t.nrows(),
            t.ncols(),
            w.len()
        )));
    }
    if f.dimension() != p.d {
        return Err(Error::GridMismatch);
    }
    check_moment_free(&f, p)?;
    radial::sobolev_norm(&f, p.s).map_err(|e| Error::DomainViolation(format!("f not in H^{}: {e}", p.s)))?;
    Ok(TDomainElement { f, u, w, t, split })
}

impl TDomainElement {
    fn boundary_atoms(&self, power: u32) -> Vec<Atom> {
        let tu = &self.t * &self.u;
        let mut atoms = self.split.atoms(&tu, 0, power);
        atoms.extend(self.split.atoms(&self.w, self.split.domain_dim, power));
        atoms
    }

    /// F_λ = f + (k_F+λ)^{-1}(Tu + w).
    pub fn regular_part(&self) -> MomentumForm {
        let (p, flavor) = self.split.params();
        MomentumForm { radial: self.f.clone(), atoms: self.boundary_atoms(2), flavor, params: *p }
    }

    /// g = F_λ + u.
    pub fn element(&self) -> MomentumForm {
        let mut g = self.regular_part();
        g.atoms.extend(self.split.atoms(&self.u, 0, 1));
        g
    }
}

/// (k_T+λ)g = (k_F+λ)F_λ = X f̂ + Tu + w.
pub fn apply_t_operator(e: &TDomainElement) -> MomentumForm {
    let (p, flavor) = e.split.params();
    let radial = multiplier_apply(&e.f, &flavor.symbol(p.s, p.lambda));
    MomentumForm { radial, atoms: e.boundary_atoms(1), flavor, params: *p }
}

/// |⟨(k_T+λ)g₁, g₂⟩ − ⟨g₁, (k_T+λ)g₂⟩| relative to the larger of the two.
pub fn symmetry_residual(e1: &TDomainElement, e2: &TDomainElement) -> Result<f64> {
    let a = apply_t_operator(e1).inner(&e2.element())?;
    let b = e1.element().inner(&apply_t_operator(e2))?;
    Ok((a - b).norm() / a.norm().max(b.norm()).max(1e-300))
}

/// d − 1 + n − s: the exponent of the worst |x|^{-·} singularity in the domain, in (d/2 − 1, d/2).
pub fn worst_singularity_exponent(d: u32, s: f64) -> Result<f64> {
    let p = ProblemParams::new(d, s, 1.0)?;
    let n = p.regime().n;
    if n == 0 {
        return Err(Error::DomainError(format!("s = {s} lies below the first deficiency window for d = {d}")));
    }
    Ok(d as f64 - 1.0 + n as f64 - s)
}
