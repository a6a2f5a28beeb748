//! Regime classification, deficiency-index combinatorics and conversions between
//! extension parametrizations.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default distance below which a power counts as a transition value.
pub const ENDPOINT_TOL: f64 = 1e-9;

/// A real number or the infinity tag that labels the unperturbed extension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extended {
    Finite(f64),
    Infinity,
}

impl Extended {
    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Extended::Infinity)
    }

    /// 1/x with 1/0 = infinity and 1/infinity = 0.
    pub fn recip(self) -> Extended {
        match self {
            Extended::Infinity => Extended::Finite(0.0),
            Extended::Finite(v) if v == 0.0 => Extended::Infinity,
            Extended::Finite(v) => Extended::Finite(1.0 / v),
        }
    }
}

impl From<f64> for Extended {
    fn from(v: f64) -> Self {
        Extended::Finite(v)
    }
}

impl std::fmt::Display for Extended {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::Infinity => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for Extended {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" => Ok(Extended::Infinity),
            t => t
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Extended::Finite)
                .ok_or_else(|| Error::InvalidParams(format!("not a real or 'inf': {s}"))),
        }
    }
}

/// The regime window I_n containing a power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeInterval {
    pub n: u32,
    pub lower: f64,
    pub upper: f64,
}

/// Dimension, power and shift of a problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub d: u32,
    pub s: f64,
    pub lambda: f64,
    #[serde(default = "default_tol")]
    pub endpoint_tol: f64,
}

fn default_tol() -> f64 {
    ENDPOINT_TOL
}

impl ProblemParams {
    pub fn new(d: u32, s: f64, lambda: f64) -> Result<Self> {
        Self::with_tolerance(d, s, lambda, ENDPOINT_TOL)
    }

    pub fn with_tolerance(d: u32, s: f64, lambda: f64, endpoint_tol: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParams("dimension must be >= 1".into()));
        }
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidParams(format!("power must be positive, got {s}")));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParams(format!("shift must be positive, got {lambda}")));
        }
        classify_regime_tol(d, s, endpoint_tol)?;
        Ok(Self { d, s, lambda, endpoint_tol })
    }

    /// Same dimension and power, different shift.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::with_tolerance(self.d, self.s, lambda, self.endpoint_tol)
    }

    pub fn regime(&self) -> RegimeInterval {
        classify_regime_tol(self.d, self.s, self.endpoint_tol).expect("validated at construction")
    }

    /// Rejects s = 1 in one dimension, where the kernel is logarithmic.
    pub fn require_not_log_case(&self) -> Result<()> {
        if self.d == 1 && (self.s - 1.0).abs() < self.endpoint_tol {
            return Err(Error::EndpointPower { d: 1, s: self.s, tol: self.endpoint_tol });
        }
        Ok(())
    }

    /// Checks that d is 1 or 3 and s lies in the rank-one window.
    pub fn require_rank_one(&self) -> Result<()> {
        if self.d != 1 && self.d != 3 {
            return Err(Error::UnsupportedDimension(self.d));
        }
        self.require_not_log_case()?;
        if self.regime().n != 1 {
            return Err(Error::DomainError(format!(
                "s = {} is outside the rank-one window ({}, {}) for d = {}",
                self.s,
                self.d as f64 / 2.0,
                self.d as f64 / 2.0 + 1.0,
                self.d
            )));
        }
        Ok(())
    }
}

/// Finds n with s in I_n = (d/2+n-1, d/2+n), I_0 = (0, d/2).
pub fn classify_regime(d: u32, s: f64) -> Result<RegimeInterval> {
    classify_regime_tol(d, s, ENDPOINT_TOL)
}

pub fn classify_regime_tol(d: u32, s: f64, tol: f64) -> Result<RegimeInterval> {
    if d == 0 || !(s > 0.0) || !s.is_finite() {
        return Err(Error::InvalidParams(format!("classify_regime needs d >= 1 and s > 0, got d={d}, s={s}")));
    }
    let half = d as f64 / 2.0;
    let offset = s - half;
    let nearest = offset.round();
    if nearest >= 0.0 && (offset - nearest).abs() < tol {
        return Err(Error::EndpointPower { d, s, tol });
    }
    if offset < 0.0 {
        return Ok(RegimeInterval { n: 0, lower: 0.0, upper: half });
    }
    let n = offset.floor() as u32 + 1;
    Ok(RegimeInterval { n, lower: half + n as f64 - 1.0, upper: half + n as f64 })
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of multi-indices in d variables of total degree at most n-1.
pub fn deficiency_index(d: u32, s: f64) -> Result<u64> {
    let r = classify_regime(d, s)?;
    if r.n == 0 {
        return Ok(0);
    }
    Ok(binomial((d + r.n - 1) as u64, d as u64))
}

/// Multi-indices γ in N_0^d with |γ| <= max_degree, graded then lexicographically descending.
pub fn multi_indices(d: u32, max_degree: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for deg in 0..=max_degree {
        let mut current = vec![0u32; d as usize];
        fill(&mut out, &mut current, 0, deg);
    }
    out
}

fn fill(out: &mut Vec<Vec<u32>>, current: &mut Vec<u32>, pos: usize, remaining: u32) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(current.clone());
        return;
    }
    for v in (0..=remaining).rev() {
        current[pos] = v;
        fill(out, current, pos + 1, remaining - v);
    }
    current[pos] = 0;
}

/// Θ(s, λ) = (λ^{1-1/s} s sin(π/s))^{-1}, the value at 0 of the 1D kernel.
pub fn theta(s: f64, lambda: f64) -> Result<f64> {
    check_1d_power(s)?;
    Ok(1.0 / (lambda.powf(1.0 - 1.0 / s) * s * (PI / s).sin()))
}

/// (ω(s), θ_s) with ω(s) = s² sin(π/s)/(s-1) and θ_s the indicator of s > 1.
pub fn omega_theta_flag(s: f64) -> Result<(f64, u8)> {
    check_1d_power(s)?;
    let omega = s * s * (PI / s).sin() / (s - 1.0);
    Ok((omega, u8::from(s > 1.0)))
}

fn check_1d_power(s: f64) -> Result<()> {
    if (s - 1.0).abs() < ENDPOINT_TOL || (s - 0.5).abs() < ENDPOINT_TOL || (s - 1.5).abs() < ENDPOINT_TOL {
        return Err(Error::EndpointPower { d: 1, s, tol: ENDPOINT_TOL });
    }
    if !(s > 0.5 && s < 1.5) {
        return Err(Error::DomainError(format!("1D formulas need s in (1/2, 3/2), got {s}")));
    }
    Ok(())
}

/// ‖𝖦_{s,λ}‖² in the rank-one window (d = 1 or 3), closed form.
pub(crate) fn green_norm_sq(p: &ProblemParams) -> f64 {
    let (s, l) = (p.s, p.lambda);
    match p.d {
        3 => (s - 3.0) * l.powf(3.0 / s - 2.0) / (2.0 * PI * s * s * (3.0 * PI / s).sin()),
        _ => (s - 1.0) / (l.powf(2.0 - 1.0 / s) * s * s * (PI / s).sin()),
    }
}

/// The λ-dependent shift between τ‖𝖦‖² and α: λ^{3/s-1}/(2πs sin(3π/s)) in 3D, Θ in 1D.
pub(crate) fn alpha_offset(p: &ProblemParams) -> f64 {
    let (s, l) = (p.s, p.lambda);
    match p.d {
        3 => l.powf(3.0 / s - 1.0) / (2.0 * PI * s * (3.0 * PI / s).sin()),
        _ => 1.0 / (l.powf(1.0 - 1.0 / s) * s * (PI / s).sin()),
    }
}

fn theta_flag(p: &ProblemParams) -> f64 {
    if p.d == 1 && p.s > 1.0 {
        1.0
    } else {
        0.0
    }
}

/// Maps the λ-dependent τ to the λ-independent α.
pub fn tau_to_alpha(params: &ProblemParams, tau: Extended) -> Result<Extended> {
    params.require_rank_one()?;
    let q = alpha_offset(params);
    let norm = green_norm_sq(params);
    let flag = theta_flag(params);
    // α - q = (1/(τ‖𝖦‖²) - θ/q)^{-1}; in 3D θ = 0 so α - q = τ‖𝖦‖²
    let inv_tau_norm = match tau {
        Extended::Infinity => 0.0,
        Extended::Finite(t) if t == 0.0 => return Ok(Extended::Finite(q)),
        Extended::Finite(t) => 1.0 / (t * norm),
    };
    let denom = inv_tau_norm - flag / q;
    if denom == 0.0 {
        return Ok(Extended::Infinity);
    }
    Ok(Extended::Finite(q + 1.0 / denom))
}

/// Inverse of [`tau_to_alpha`] at the shift carried by `params`.
pub fn alpha_to_tau(params: &ProblemParams, alpha: Extended) -> Result<Extended> {
    params.require_rank_one()?;
    let q = alpha_offset(params);
    let norm = green_norm_sq(params);
    let flag = theta_flag(params);
    let inv_shift = match alpha {
        Extended::Infinity => 0.0,
        Extended::Finite(a) if !a.is_finite() => {
            return Err(Error::NonInvertible(format!("alpha = {a}")));
        }
        Extended::Finite(a) if a == q => return Ok(Extended::Finite(0.0)),
        Extended::Finite(a) => 1.0 / (a - q),
    };
    // 1/(τ‖𝖦‖²) = 1/(α - q) + θ/q
    let inv_tau_norm = inv_shift + flag / q;
    if inv_tau_norm == 0.0 {
        return Ok(Extended::Infinity);
    }
    Ok(Extended::Finite(1.0 / (inv_tau_norm * norm)))
}

/// Whether (λ, τ) and (λ₂, τ₂) label the same extension.
pub fn pair_consistency(params: &ProblemParams, tau: Extended, lambda2: f64, tau2: Extended) -> Result<bool> {
    let other = params.with_lambda(lambda2)?;
    let a1 = tau_to_alpha(params, tau)?;
    let a2 = tau_to_alpha(&other, tau2)?;
    Ok(match (a1, a2) {
        (Extended::Infinity, Extended::Infinity) => true,
        (Extended::Finite(x), Extended::Finite(y)) => (x - y).abs() <= 1e-10 * x.abs().max(y.abs()).max(1e-300),
        _ => false,
    })
}

/// Choice of self-adjoint extension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExtensionParam {
    TauAt { lambda: f64, tau: Extended },
    Alpha { alpha: Extended },
    Matrix { t: Vec<Vec<Complex64>>, basis: Vec<Vec<u32>> },
}

impl ExtensionParam {
    /// Validates a hermitian-matrix parameter against the deficiency space of (d, s).
    pub fn matrix(t: Vec<Vec<Complex64>>, basis: Vec<Vec<u32>>, d: u32, s: f64) -> Result<Self> {
        let n = t.len();
        if t.iter().any(|row| row.len() != n) || basis.len() != n {
            return Err(Error::DimensionMismatch(format!("T is not {n}x{n} or basis has {} entries", basis.len())));
        }
        let j = deficiency_index(d, s)?;
        if n as u64 > j || n == 0 {
            return Err(Error::DimensionMismatch(format!("N = {n} must lie in 1..={j}")));
        }
        let regime = classify_regime(d, s)?;
        for g in &basis {
            if g.len() != d as usize || g.iter().sum::<u32>() + 1 > regime.n {
                return Err(Error::InvalidParams(format!("multi-index {g:?} not admissible for n = {}", regime.n)));
            }
        }
        for i in 0..n {
            for k in 0..n {
                if (t[i][k] - t[k][i].conj()).norm() > 1e-12 {
                    return Err(Error::InvalidParams("T is not hermitian".into()));
                }
            }
        }
        Ok(ExtensionParam::Matrix { t, basis })
    }
}
