//! Green-type kernels: momentum profiles, position values, singularity constants,
//! values at the origin, L² norms and shift-difference integrals.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::quad::{self, Tolerance};
use crate::radial::{self, RadialFunction, RadialGrid, TailTerm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    /// (2π)^{-d/2} / (|p|^s + λ)
    Homogeneous,
    /// (2π)^{-3/2} / (p² + λ)^{s/2}, d = 3
    Inhomogeneous,
    /// (|p|^s+λ)^{-2} − θ_s (s−1)/(λs)·(|p|^s+λ)^{-1}, d = 1
    DerivedH,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenKernel {
    pub kind: KernelKind,
    pub params: ProblemParams,
}

const TAIL_ORDERS: usize = 6;

impl GreenKernel {
    pub fn new(kind: KernelKind, params: ProblemParams) -> Result<Self> {
        match kind {
            KernelKind::Homogeneous => {
                if params.d == params.s.round() as u32 && (params.s - params.s.round()).abs() < params.endpoint_tol {
                    return Err(Error::DomainError(format!("s = d = {} gives a logarithmic kernel", params.d)));
                }
            }
            KernelKind::Inhomogeneous => {
                if params.d != 3 {
                    return Err(Error::UnsupportedDimension(params.d));
                }
            }
            KernelKind::DerivedH => {
                if params.d != 1 {
                    return Err(Error::UnsupportedDimension(params.d));
                }
                params.require_not_log_case()?;
            }
        }
        Ok(Self { kind, params })
    }

    pub fn homogeneous(params: ProblemParams) -> Result<Self> {
        Self::new(KernelKind::Homogeneous, params)
    }

    fn norm_factor(&self) -> f64 {
        (2.0 * PI).powf(-(self.params.d as f64) / 2.0)
    }

    fn derived_h_offset(&self) -> f64 {
        let (s, l) = (self.params.s, self.params.lambda);
        if s > 1.0 {
            (s - 1.0) / (l * s)
        } else {
            0.0
        }
    }

    /// Radial momentum profile.
    pub fn hat(&self, r: f64) -> f64 {
        let (s, l) = (self.params.s, self.params.lambda);
        match self.kind {
            KernelKind::Homogeneous => self.norm_factor() / (r.powf(s) + l),
            KernelKind::Inhomogeneous => self.norm_factor() * (r * r + l).powf(-s / 2.0),
            KernelKind::DerivedH => {
                let x = 1.0 / (r.powf(s) + l);
                x * x - self.derived_h_offset() * x
            }
        }
    }

    /// Large-r expansion of the profile.
    pub fn hat_tail(&self) -> Vec<TailTerm> {
        let (s, l) = (self.params.s, self.params.lambda);
        let c = self.norm_factor();
        match self.kind {
            KernelKind::Homogeneous => {
                (0..TAIL_ORDERS).map(|k| TailTerm::new(c * (-l).powi(k as i32), (k as f64 + 1.0) * s)).collect()
            }
            KernelKind::Inhomogeneous => {
                let a = -s / 2.0;
                let mut coef = 1.0;
                let mut out = Vec::new();
                for k in 0..TAIL_ORDERS {
                    out.push(TailTerm::new(c * coef * l.powi(k as i32), s + 2.0 * k as f64));
                    coef *= (a - k as f64) / (k as f64 + 1.0);
                }
                out
            }
            KernelKind::DerivedH => {
                let off = self.derived_h_offset();
                let mut out = Vec::new();
                for k in 0..TAIL_ORDERS {
                    let kf = k as f64;
                    out.push(TailTerm::new((kf + 1.0) * (-l).powi(k as i32), (kf + 2.0) * s));
                    if off != 0.0 {
                        out.push(TailTerm::new(-off * (-l).powi(k as i32), (kf + 1.0) * s));
                    }
                }
                out
            }
        }
    }

    /// Momentum scale where the profile turns over.
    pub fn scale(&self) -> f64 {
        match self.kind {
            KernelKind::Inhomogeneous => self.params.lambda.sqrt(),
            _ => self.params.lambda.powf(1.0 / self.params.s),
        }
    }

    /// Samples the profile on a grid with its analytic tail.
    pub fn profile(&self, grid: &Arc<RadialGrid>) -> Result<RadialFunction> {
        if grid.d != self.params.d {
            return Err(Error::GridMismatch);
        }
        RadialFunction::from_real_fn(grid, |r| self.hat(r), self.hat_tail())
    }

    /// Position-space value at |x| by oscillatory radial quadrature.
    pub fn position(&self, x: f64) -> Result<f64> {
        radial::radial_transform(self.params.d, x, |r| self.hat(r), self.scale())
    }

    /// Value at the origin where finite.
    pub fn value_at_zero(&self) -> Result<f64> {
        let p = &self.params;
        match self.kind {
            KernelKind::Homogeneous => kernel_at_zero(p.d, p.s, p.lambda),
            KernelKind::Inhomogeneous => inhomogeneous_kernel_at_zero(p.s, p.lambda),
            KernelKind::DerivedH => Err(Error::UnsupportedFamily("value at zero of the derived kernel".into())),
        }
    }
}

pub fn kernel_hat(k: &GreenKernel, r: f64) -> f64 {
    k.hat(r)
}

pub fn kernel_position(k: &GreenKernel, x: f64) -> Result<f64> {
    k.position(x)
}

/// Λ_s^{(d)} = Γ((d−s)/2) / ((2π)^{d/2} 2^{s−d/2} Γ(s/2)), the coefficient of |x|^{s−d} at the origin.
pub fn singularity_constant(d: u32, s: f64) -> Result<f64> {
    let df = d as f64;
    if !(s > 0.0 && s < df) {
        return Err(Error::DomainError(format!("singularity constant needs 0 < s < d, got s = {s}, d = {d}")));
    }
    Ok(gamma((df - s) / 2.0) / ((2.0 * PI).powf(df / 2.0) * 2f64.powf(s - df / 2.0) * gamma(s / 2.0)))
}

/// (2π)^{-d} ∫ dp / (|p|^s + λ) for s > d.
pub fn kernel_at_zero(d: u32, s: f64, lambda: f64) -> Result<f64> {
    let df = d as f64;
    if s <= df {
        return Err(Error::DomainError(format!("kernel is singular at 0 for s = {s} <= d = {d}")));
    }
    if lambda <= 0.0 {
        return Err(Error::InvalidParams(format!("shift must be positive, got {lambda}")));
    }
    let denom = 2f64.powf(df - 1.0)
        * PI.powf(df / 2.0 - 1.0)
        * gamma(df / 2.0)
        * lambda.powf((s - df) / s)
        * s
        * (PI * df / s).sin();
    Ok(1.0 / denom)
}

/// (2π)^{-3} ∫ dp / (p² + λ)^{s/2} for s > 3.
pub fn inhomogeneous_kernel_at_zero(s: f64, lambda: f64) -> Result<f64> {
    if s <= 3.0 {
        return Err(Error::DomainError(format!("inhomogeneous kernel is singular at 0 for s = {s} <= 3")));
    }
    Ok(gamma((s - 3.0) / 2.0) / (8.0 * PI.powf(1.5) * lambda.powf((s - 3.0) / 2.0) * gamma(s / 2.0)))
}

/// ‖k‖²_{L²}: closed form for the 1D homogeneous kernel, radial quadrature otherwise.
pub fn kernel_l2_norm_sq(k: &GreenKernel) -> Result<f64> {
    let p = &k.params;
    let df = p.d as f64;
    let decay = match k.kind {
        KernelKind::DerivedH if p.s < 1.0 => 2.0 * p.s,
        _ => p.s,
    };
    if 2.0 * decay <= df {
        return Err(Error::DomainError(format!("kernel is not square integrable for s = {}, d = {}", p.s, p.d)));
    }
    if k.kind == KernelKind::Homogeneous && p.d == 1 {
        let s = p.s;
        return Ok((s - 1.0) / (p.lambda.powf(2.0 - 1.0 / s) * s * s * (PI / s).sin()));
    }
    let omega = radial::sphere_area(p.d);
    let scale = k.scale();
    let r_cut = 1e8 * scale;
    let hat_tail = k.hat_tail();
    let mut tail = Vec::new();
    for a in &hat_tail {
        for b in &hat_tail {
            let e = a.exp + b.exp - (df - 1.0);
            tail.push((omega * a.amp.re * b.amp.re, e));
        }
    }
    let tol = Tolerance::rel(1e-13);
    let lo = 1e-8 * scale;
    let integrand = |r: f64| omega * r.powf(df - 1.0) * k.hat(r).powi(2);
    let head = quad::integrate(integrand, 0.0, lo, tol)?;
    Ok(head + quad::integrate_half_line(integrand, &tail, lo, r_cut, tol)? - integrand(lo) * lo)
}

/// ∫_{R^d} (1/(|p|^s+l1) − 1/(|p|^s+l2)) dp in closed form (d = 1 or 3).
pub fn lambda_difference_integral(d: u32, s: f64, l1: f64, l2: f64) -> Result<f64> {
    if !(l1 > 0.0 && l2 > 0.0) {
        return Err(Error::InvalidParams("shifts must be positive".into()));
    }
    match d {
        3 => Ok(4.0 * PI * PI / (s * (3.0 * PI / s).sin()) * (l1.powf(3.0 / s - 1.0) - l2.powf(3.0 / s - 1.0))),
        1 => {
            let th = |l: f64| 1.0 / (l.powf(1.0 - 1.0 / s) * s * (PI / s).sin());
            Ok(2.0 * PI * (th(l1) - th(l2)))
        }
        _ => Err(Error::UnsupportedDimension(d)),
    }
}
