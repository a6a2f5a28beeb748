//! Bound states of the rank-one families and the E_τ root problem of the
//! inhomogeneous family.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::GreenKernel;
use crate::operators::Family;
use crate::params::{self, Extended, ExtensionParam, ProblemParams};
use crate::quad::{brent, integrate_log, Tolerance};
use crate::radial::{make_grid, GridSpec, RadialFunction, RadialGrid, TailTerm};

/// Bound states deeper than this are flagged rather than trusted.
pub const DEEP_BOUND_STATE: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralFlag {
    DeepBoundState,
}

/// Non-normalised eigenfunction in momentum space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Eigenfunction {
    /// The family's Green kernel at shift λ* = −E.
    Kernel(GreenKernel),
    /// 1/((p²+λ)^{s/2} − E) for the inhomogeneous family.
    Shifted { s: f64, lambda: f64, energy: f64 },
}

impl Eigenfunction {
    pub fn profile(&self, grid: &Arc<RadialGrid>) -> Result<RadialFunction> {
        match self {
            Eigenfunction::Kernel(k) => k.profile(grid),
            Eigenfunction::Shifted { s, lambda, energy } => {
                let (s, lambda, e) = (*s, *lambda, *energy);
                let tail = vec![TailTerm::new(1.0, s), TailTerm::new(e, 2.0 * s), TailTerm::new(-0.5 * s * lambda, s + 2.0)];
                RadialFunction::from_real_fn(grid, |r| 1.0 / ((r * r + lambda).powf(0.5 * s) - e), tail)
            }
        }
    }
}

/// Outcome of a bound-state search; `eigenvalue` is absent when the spectrum has no negative part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    pub family: Family,
    pub eigenvalue: Option<f64>,
    pub eigenfunction: Option<Eigenfunction>,
    pub flag: Option<SpectralFlag>,
}

impl SpectralResult {
    fn absent(family: Family) -> Self {
        SpectralResult { family, eigenvalue: None, eigenfunction: None, flag: None }
    }

    fn homogeneous(family: Family, d: u32, s: f64, e: f64) -> Result<Self> {
        let depth = -e;
        if !(depth.is_finite() && depth <= DEEP_BOUND_STATE) {
            return Ok(SpectralResult { family, eigenvalue: Some(e), eigenfunction: None, flag: Some(SpectralFlag::DeepBoundState) });
        }
        let kernel = GreenKernel::homogeneous(ProblemParams::new(d, s, depth)?)?;
        Ok(SpectralResult { family, eigenvalue: Some(e), eigenfunction: Some(Eigenfunction::Kernel(kernel)), flag: None })
    }
}

/// α − q(λ): vanishes exactly at λ = −E for the α-parametrized homogeneous families.
pub fn krein_denominator(d: u32, s: f64, lambda: f64, alpha: f64) -> Result<f64> {
    let p = ProblemParams::new(d, s, lambda)?;
    p.require_rank_one()?;
    Ok(alpha - params::alpha_offset(&p))
}

/// Classic point interaction in 3D: E = −(4πα)² for α < 0.
pub fn bound_state_h(alpha: Extended) -> Result<SpectralResult> {
    match alpha {
        Extended::Finite(a) if a < 0.0 => SpectralResult::homogeneous(Family::ClassicH, 3, 2.0, -(4.0 * PI * a).powi(2)),
        _ => Ok(SpectralResult::absent(Family::ClassicH)),
    }
}

/// 3D, s ∈ (3/2, 5/2): E = −(2π|α| s sin(−3π/s))^{s/(3−s)} for α < 0.
pub fn bound_state_3d(alpha: Extended, s: f64) -> Result<SpectralResult> {
    ProblemParams::new(3, s, 1.0)?.require_rank_one()?;
    match alpha {
        Extended::Finite(a) if a < 0.0 => {
            let e = if s == 2.0 {
                -(4.0 * PI * a).powi(2)
            } else {
                -(2.0 * PI * a.abs() * s * (-3.0 * PI / s).sin()).powf(s / (3.0 - s))
            };
            SpectralResult::homogeneous(Family::HomogeneousK, 3, s, e)
        }
        _ => Ok(SpectralResult::absent(Family::HomogeneousK)),
    }
}

/// 1D, s ∈ (1/2, 1) ∪ (1, 3/2): E = −(α s sin(π/s))^{s/(1−s)} when (s−1)α > 0.
pub fn bound_state_1d(alpha: Extended, s: f64) -> Result<SpectralResult> {
    ProblemParams::new(1, s, 1.0)?.require_rank_one()?;
    match alpha {
        Extended::Finite(a) if (s - 1.0) * a > 0.0 => {
            let e = -(a * s * (PI / s).sin()).powf(s / (1.0 - s));
            SpectralResult::homogeneous(Family::HomogeneousK, 1, s, e)
        }
        _ => Ok(SpectralResult::absent(Family::HomogeneousK)),
    }
}

/// Bound state of a homogeneous-family extension given in either parametrization.
pub fn bound_state(p: &ProblemParams, ext: &ExtensionParam, family: Family) -> Result<SpectralResult> {
    family.validate(p)?;
    if family == Family::InhomogeneousD {
        return match ext {
            ExtensionParam::TauAt { tau: Extended::Finite(t), .. } if *t < 0.0 => bound_state_inhomogeneous(p.lambda, *t, p.s),
            ExtensionParam::TauAt { .. } => Ok(SpectralResult::absent(family)),
            _ => Err(Error::UnsupportedFamily("InhomogeneousD is parametrized by τ only".into())),
        };
    }
    let alpha = crate::operators::extension_alpha(p, ext)?;
    match (family, p.d) {
        (Family::ClassicH, _) => bound_state_h(alpha),
        (_, 3) => bound_state_3d(alpha, p.s),
        _ => bound_state_1d(alpha, p.s),
    }
}

/// How the momentum integrals of the E_τ condition are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentQuadrature {
    Adaptive { rel: f64 },
    Grid(GridSpec),
}

impl Default for MomentQuadrature {
    fn default() -> Self {
        MomentQuadrature::Adaptive { rel: 1e-13 }
    }
}

/// J(E) = ∫_{R³} dp / (X (X − E)), X = (p²+λ)^{s/2}, for E ≤ 0; J(0) = J0.
fn moment_j(s: f64, lambda: f64, e: f64, quad: MomentQuadrature) -> Result<f64> {
    let integrand = move |r: f64| {
        let x = (r * r + lambda).powf(0.5 * s);
        1.0 / (x * (x - e))
    };
    // r²/(X(X−E)) beyond the cut: r^{2−2s} + E r^{2−3s} − sλ r^{−2s}
    let tail = |cut: f64| {
        4.0 * PI
            * (cut.powf(3.0 - 2.0 * s) / (2.0 * s - 3.0)
                + e * cut.powf(3.0 - 3.0 * s) / (3.0 * s - 3.0)
                - s * lambda * cut.powf(1.0 - 2.0 * s) / (2.0 * s - 1.0))
    };
    match quad {
        MomentQuadrature::Adaptive { rel } => {
            let scale = lambda.sqrt().max((-e).powf(1.0 / s));
            let (lo, cut) = (1e-8 * scale, 1e8 * scale);
            let x0 = lambda.powf(0.5 * s);
            let ball = 4.0 * PI * lo.powi(3) / 3.0 / (x0 * (x0 - e));
            let tol = Tolerance { abs: 0.0, rel, max_intervals: 20000 };
            let body = integrate_log(|r| 4.0 * PI * r * r * integrand(r), lo, cut, tol)?;
            Ok(ball + body + tail(cut))
        }
        MomentQuadrature::Grid(spec) => {
            let grid = make_grid(spec, 3)?;
            let body: f64 = grid.nodes.iter().zip(&grid.weights).map(|(r, w)| w * integrand(*r)).sum();
            Ok(body + tail(grid.r_max()))
        }
    }
}

/// ∫ dp / X² in closed form.
fn moment_j0(s: f64, lambda: f64) -> f64 {
    use statrs::function::gamma::gamma;
    PI.powf(1.5) * lambda.powf(1.5 - s) * gamma(s - 1.5) / gamma(s)
}

/// Relative residual of the vanishing-moment condition: (E·J(E) − τ·J0)/(|τ| J0).
/// Equivalent to ∫ [τE/X² − (τ−E)/X]/(X−E) dp = 0 after grouping over X(X−E).
pub fn moment_residual(lambda: f64, tau: f64, s: f64, e: f64, quad: MomentQuadrature) -> Result<f64> {
    let j0 = match quad {
        MomentQuadrature::Adaptive { .. } => moment_j0(s, lambda),
        MomentQuadrature::Grid(_) => moment_j(s, lambda, 0.0, quad)?,
    };
    Ok((e * moment_j(s, lambda, e, quad)? - tau * j0) / (tau.abs() * j0))
}

/// The negative eigenvalue E_τ < τ of the inhomogeneous family with τ < 0.
pub fn bound_state_inhomogeneous(lambda: f64, tau: f64, s: f64) -> Result<SpectralResult> {
    bound_state_inhomogeneous_with(lambda, tau, s, MomentQuadrature::default())
}

pub fn bound_state_inhomogeneous_with(lambda: f64, tau: f64, s: f64, quad: MomentQuadrature) -> Result<SpectralResult> {
    let p = ProblemParams::new(3, s, lambda)?;
    Family::InhomogeneousD.validate(&p)?;
    if !(tau < 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParams(format!("E_τ needs a finite τ < 0, got {tau}")));
    }
    let mut failure = None;
    let mut f = |e: f64| match moment_residual(lambda, tau, s, e, quad) {
        Ok(v) => v,
        Err(err) => {
            failure.get_or_insert(err);
            f64::NAN
        }
    };
    // f(τ) > 0 and f → −∞ as E → −∞
    let hi = tau;
    let mut lo = 2.0 * tau;
    while f(lo) > 0.0 {
        lo *= 2.0;
        if lo < -1e12 * tau.abs() {
            return Err(Error::BracketFailure(format!("no sign change of the moment condition in [{:e}, {tau}]", -1e12 * tau.abs())));
        }
    }
    let e = brent(&mut f, lo, hi, 1e-15 * tau.abs(), 200)?;
    if let Some(err) = failure {
        return Err(err);
    }
    Ok(SpectralResult {
        family: Family::InhomogeneousD,
        eigenvalue: Some(e),
        eigenfunction: Some(Eigenfunction::Shifted { s, lambda, energy: e }),
        flag: None,
    })
}

/// One row of the E_τ curve; failures are kept per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub tau: f64,
    pub e_tau: Option<f64>,
    pub error: Option<String>,
}

/// E_τ over the given τ values, in input order.
pub fn figure1_sweep(lambda: f64, s: f64, taus: &[f64]) -> Vec<SweepRow> {
    figure1_sweep_with(lambda, s, taus, MomentQuadrature::default())
}

pub fn figure1_sweep_with(lambda: f64, s: f64, taus: &[f64], quad: MomentQuadrature) -> Vec<SweepRow> {
    taus.par_iter()
        .map(|&tau| match bound_state_inhomogeneous_with(lambda, tau, s, quad) {
            Ok(r) => SweepRow { tau, e_tau: r.eigenvalue, error: None },
            Err(e) => SweepRow { tau, e_tau: None, error: Some(e.to_string()) },
        })
        .collect()
}

/// Evenly spaced τ values on [tau_min, tau_max].
pub fn tau_grid(tau_min: f64, tau_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(tau_max < 0.0 && tau_min <= tau_max) || points == 0 {
        return Err(Error::InvalidParams(format!("τ range must satisfy τ_min ≤ τ_max < 0, got [{tau_min}, {tau_max}] with {points} points")));
    }
    if points == 1 {
        return Ok(vec![tau_max]);
    }
    Ok((0..points).map(|k| tau_min + (tau_max - tau_min) * k as f64 / (points - 1) as f64).collect())
}

/// |⟨φ, Aφ⟩ − E‖φ‖²| / (|E|‖φ‖²) for the inhomogeneous eigenfunction at the τ it was found for.
/// Building φ as a domain element also checks its boundary condition.
pub fn inhomogeneous_eigen_defect(r: &SpectralResult, tau: f64, grid: &Arc<RadialGrid>) -> Result<f64> {
    let Some(eigenfunction @ Eigenfunction::Shifted { s, lambda, energy }) = r.eigenfunction.as_ref() else {
        return Err(Error::InvalidParams("not an inhomogeneous eigenfunction".into()));
    };
    let (s, lambda, energy) = (*s, *lambda, *energy);
    let phi = eigenfunction.profile(grid)?;
    let p = ProblemParams::new(3, s, lambda)?;
    // φ = F + κ𝒢 with κ = (2π)^{3/2}, F̂ = E/(X(X−E))
    let kappa = Complex64::new((2.0 * PI).powf(1.5), 0.0);
    let regular = RadialFunction::from_real_fn(
        grid,
        |q| {
            let x = (q * q + lambda).powf(0.5 * s);
            energy / (x * (x - energy))
        },
        vec![TailTerm::new(energy, 2.0 * s), TailTerm::new(energy * energy, 3.0 * s)],
    )?;
    let ext = ExtensionParam::TauAt { lambda, tau: Extended::Finite(tau) };
    let e = crate::operators::DomainElement::from_parts(regular, kappa, &p, &ext, Family::InhomogeneousD)?;
    let a_phi = crate::operators::apply_operator(&e);
    let lhs = crate::radial::inner_product(&phi, &a_phi)?.re;
    let norm = crate::radial::inner_product(&phi, &phi)?.re;
    Ok((lhs - energy * norm).abs() / (energy.abs() * norm))
}
