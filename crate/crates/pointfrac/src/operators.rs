//! Rank-one extension families: boundary coefficients, domain elements, operator
//! action, Kreĭn resolvents, quadratic forms, and fractional powers of the s = 2
//! point interaction in 3D.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::kernels::{GreenKernel, KernelKind};
use crate::params::{self, alpha_offset, green_norm_sq, Extended, ExtensionParam, ProblemParams};
use crate::quad::{gauss_jacobi_left, integrate, GaussLegendre, Tolerance};
use crate::radial::{
    self, eval_at_zero, inner_product, multiplier_apply, Multiplier, RadialFunction, RadialGrid, TailTerm,
};

/// Rank-one extension family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Point perturbation of (−Δ)^{s/2}, d = 1 or 3.
    HomogeneousK,
    /// The classic s = 2 point interaction in 3D.
    ClassicH,
    /// Point perturbation of (−Δ+λ)^{s/2} in 3D; λ is part of the operator.
    InhomogeneousD,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "homogeneousk" | "k" => Ok(Family::HomogeneousK),
            "classich" | "h" => Ok(Family::ClassicH),
            "inhomogeneousd" | "d" => Ok(Family::InhomogeneousD),
            _ => Err(Error::UnsupportedFamily(s.to_string())),
        }
    }
}

impl Family {
    pub fn kernel_kind(self) -> KernelKind {
        match self {
            Family::InhomogeneousD => KernelKind::Inhomogeneous,
            _ => KernelKind::Homogeneous,
        }
    }

    pub fn validate(self, p: &ProblemParams) -> Result<()> {
        match self {
            Family::ClassicH => {
                if p.d != 3 || (p.s - 2.0).abs() > 1e-12 {
                    return Err(Error::UnsupportedFamily(format!("ClassicH needs d = 3, s = 2; got d = {}, s = {}", p.d, p.s)));
                }
            }
            Family::HomogeneousK => p.require_rank_one()?,
            Family::InhomogeneousD => {
                if p.d != 3 {
                    return Err(Error::UnsupportedDimension(p.d));
                }
                p.require_rank_one()?;
            }
        }
        Ok(())
    }

    /// Symbol of (A+λ) for the homogeneous families, of A itself for InhomogeneousD.
    pub fn symbol(self, p: &ProblemParams) -> Multiplier {
        match self {
            Family::InhomogeneousD => Multiplier::bessel_power(p.s / 2.0, p.lambda),
            _ => Multiplier::homogeneous_symbol(p.s, p.lambda),
        }
    }

    pub fn inverse_symbol(self, p: &ProblemParams) -> Multiplier {
        match self {
            Family::InhomogeneousD => Multiplier::bessel_power(-p.s / 2.0, p.lambda),
            _ => Multiplier::homogeneous_inverse(p.s, p.lambda),
        }
    }

    /// Spectral shift built into the resolvent: λ for the homogeneous families, 0 for InhomogeneousD.
    pub fn shift(self, p: &ProblemParams) -> f64 {
        match self {
            Family::InhomogeneousD => 0.0,
            _ => p.lambda,
        }
    }

    pub fn kernel(self, p: &ProblemParams) -> Result<GreenKernel> {
        GreenKernel::new(self.kernel_kind(), *p)
    }
}

/// Scalar c in κ = c·F(0); `Infinite` marks the non-invertible τ = 0 case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coefficient {
    Finite(f64),
    Infinite,
}

impl Coefficient {
    pub fn finite(self) -> Option<f64> {
        match self {
            Coefficient::Finite(c) => Some(c),
            Coefficient::Infinite => None,
        }
    }
}

/// ∫ (p²+λ)^{-s} dp in 3D.
fn inhomogeneous_j0(s: f64, lambda: f64) -> f64 {
    PI.powf(1.5) * lambda.powf(1.5 - s) * gamma(s - 1.5) / gamma(s)
}

/// ‖kernel‖² for the family at the given parameters.
pub fn family_green_norm_sq(p: &ProblemParams, family: Family) -> f64 {
    match family {
        Family::InhomogeneousD => inhomogeneous_j0(p.s, p.lambda) / (2.0 * PI).powi(3),
        _ => green_norm_sq(p),
    }
}

fn reduce_ext(p: &ProblemParams, ext: &ExtensionParam) -> Result<ExtensionParam> {
    match ext {
        ExtensionParam::Matrix { t, basis } => {
            if t.len() != 1 || basis.len() != 1 {
                return Err(Error::DimensionMismatch("rank-one families take a 1x1 matrix".into()));
            }
            if t[0][0].im.abs() > 1e-12 {
                return Err(Error::InvalidParams("1x1 hermitian matrix must be real".into()));
            }
            Ok(ExtensionParam::TauAt { lambda: p.lambda, tau: Extended::Finite(t[0][0].re) })
        }
        other => Ok(other.clone()),
    }
}

/// Whether the extension is the distinguished τ = ∞ one.
pub fn is_friedrichs(p: &ProblemParams, ext: &ExtensionParam) -> bool {
    match ext {
        ExtensionParam::TauAt { tau, .. } => tau.is_infinite(),
        ExtensionParam::Alpha { alpha } => {
            if p.d == 1 && p.s > 1.0 {
                *alpha == Extended::Finite(0.0)
            } else {
                alpha.is_infinite()
            }
        }
        ExtensionParam::Matrix { .. } => false,
    }
}

/// The Kreĭn scalar c with c = 0 allowed; used internally by every family.
pub(crate) fn krein_scalar(p: &ProblemParams, ext: &ExtensionParam, family: Family) -> Result<Coefficient> {
    family.validate(p)?;
    let ext = reduce_ext(p, ext)?;
    let same_lambda = |l: f64| (l - p.lambda).abs() <= 1e-14 * p.lambda;
    if family == Family::InhomogeneousD {
        return match ext {
            ExtensionParam::TauAt { lambda, tau } => {
                if !same_lambda(lambda) {
                    return Err(Error::InvalidParams(
                        "InhomogeneousD fixes λ inside the operator; τ must be given at the same λ".into(),
                    ));
                }
                match tau {
                    Extended::Infinity => Ok(Coefficient::Finite(0.0)),
                    Extended::Finite(t) if t == 0.0 => Ok(Coefficient::Infinite),
                    Extended::Finite(t) => Ok(Coefficient::Finite((2.0 * PI).powi(3) / (t * inhomogeneous_j0(p.s, p.lambda)))),
                }
            }
            _ => Err(Error::UnsupportedFamily("InhomogeneousD is parametrized by τ only".into())),
        };
    }
    let flag = if p.d == 1 && p.s > 1.0 { 1.0 } else { 0.0 };
    let q = alpha_offset(p);
    let alpha = match ext {
        ExtensionParam::TauAt { lambda, tau } if same_lambda(lambda) => {
            return match tau {
                Extended::Infinity => Ok(Coefficient::Finite(-flag / q)),
                Extended::Finite(t) if t == 0.0 => Ok(Coefficient::Infinite),
                Extended::Finite(t) => Ok(Coefficient::Finite(1.0 / (t * green_norm_sq(p)) - flag / q)),
            };
        }
        ExtensionParam::TauAt { lambda, tau } => params::tau_to_alpha(&p.with_lambda(lambda)?, tau)?,
        ExtensionParam::Alpha { alpha } => alpha,
        ExtensionParam::Matrix { .. } => unreachable!("reduced above"),
    };
    match alpha {
        Extended::Infinity => Ok(Coefficient::Finite(0.0)),
        Extended::Finite(a) => {
            if (a - q).abs() <= 1e-12 * a.abs().max(q.abs()) {
                return Err(Error::PoleAtLambda { lambda: p.lambda });
            }
            Ok(Coefficient::Finite(1.0 / (a - q)))
        }
    }
}

/// Scalar multiplying F(0) in the singular part of a domain element.
pub fn boundary_coefficient(p: &ProblemParams, ext: &ExtensionParam, family: Family) -> Result<Coefficient> {
    let c = krein_scalar(p, ext, family)?;
    if c == Coefficient::Finite(0.0) && is_friedrichs(p, ext) {
        return Err(Error::FriedrichsExtension);
    }
    Ok(c)
}

/// g = F + κ·kernel with the family's boundary condition between κ and F(0).
#[derive(Debug, Clone, PartialEq)]
pub struct DomainElement {
    pub family: Family,
    pub params: ProblemParams,
    pub ext: ExtensionParam,
    pub kappa: Complex64,
    pub regular: RadialFunction,
    pub coefficient: Coefficient,
}

fn check_sobolev(f: &RadialFunction, order: f64) -> Result<()> {
    radial::sobolev_norm(f, order).map(|_| ()).map_err(|e| match e {
        Error::NotIntegrable(m) => Error::DomainViolation(format!("regular part not in H^{order}: {m}")),
        other => other,
    })
}

/// Builds g = F + c·F(0)·kernel.
pub fn make_domain_element(
    regular: RadialFunction,
    params: &ProblemParams,
    ext: &ExtensionParam,
    family: Family,
) -> Result<DomainElement> {
    let c = krein_scalar(params, ext, family)?;
    if regular.dimension() != params.d {
        return Err(Error::GridMismatch);
    }
    check_sobolev(&regular, params.s)?;
    let f0 = eval_at_zero(&regular)?;
    let kappa = match c {
        Coefficient::Finite(c) => f0 * c,
        Coefficient::Infinite => {
            return Err(Error::NotInvertible);
        }
    };
    Ok(DomainElement { family, params: *params, ext: ext.clone(), kappa, regular, coefficient: c })
}

impl DomainElement {
    /// Assembles an element from explicit parts after checking the boundary condition.
    /// With c = ∞ the regular part must vanish at the origin and κ is free.
    pub fn from_parts(
        regular: RadialFunction,
        kappa: Complex64,
        params: &ProblemParams,
        ext: &ExtensionParam,
        family: Family,
    ) -> Result<Self> {
        let c = krein_scalar(params, ext, family)?;
        let e = DomainElement { family, params: *params, ext: ext.clone(), kappa, regular, coefficient: c };
        let res = e.boundary_residual()?;
        if res > 1e-8 {
            return Err(Error::DomainViolation(format!("boundary condition residual {res:e}")));
        }
        Ok(e)
    }

    pub fn kernel(&self) -> Result<GreenKernel> {
        self.family.kernel(&self.params)
    }

    /// Coefficient of the bare resolvent denominator: ξ = (2π)^{-d/2} κ.
    pub fn xi(&self) -> Complex64 {
        self.kappa * (2.0 * PI).powf(-(self.params.d as f64) / 2.0)
    }

    /// η = τ·ξ when the extension is given by τ at this element's λ.
    pub fn eta(&self) -> Option<Complex64> {
        match reduce_ext(&self.params, &self.ext).ok()? {
            ExtensionParam::TauAt { lambda, tau: Extended::Finite(t) } if lambda == self.params.lambda => Some(self.xi() * t),
            _ => None,
        }
    }

    /// Full momentum profile ĝ = F̂ + κ·kernel.
    pub fn profile(&self) -> Result<RadialFunction> {
        let k = self.kernel()?.profile(&self.regular.grid)?;
        self.regular.combine(Complex64::new(1.0, 0.0), &k, self.kappa)
    }

    /// Relative residual of κ = c·F(0).
    pub fn boundary_residual(&self) -> Result<f64> {
        let f0 = eval_at_zero(&self.regular)?;
        Ok(match self.coefficient {
            Coefficient::Finite(c) => {
                let target = f0 * c;
                (self.kappa - target).norm() / self.kappa.norm().max(target.norm()).max(1e-300)
            }
            Coefficient::Infinite => {
                let scale = radial::l2_norm(&self.regular)?.max(self.kappa.norm()).max(1e-300);
                f0.norm() / scale
            }
        })
    }

    /// Momentum profile of the same g split relative to the kernel at another shift.
    /// Only the homogeneous families carry a λ-independent operator.
    pub fn rebase(&self, lambda2: f64) -> Result<DomainElement> {
        if self.family == Family::InhomogeneousD {
            return Err(Error::UnsupportedFamily("InhomogeneousD has no λ-free parametrization".into()));
        }
        let p2 = self.params.with_lambda(lambda2)?;
        let grid = &self.regular.grid;
        let k1 = self.kernel()?.profile(grid)?;
        let k2 = GreenKernel::homogeneous(p2)?.profile(grid)?;
        let diff = k1.sub(&k2)?;
        let regular = self.regular.combine(Complex64::new(1.0, 0.0), &diff, self.kappa)?;
        let alpha = extension_alpha(&self.params, &self.ext)?;
        let ext = ExtensionParam::Alpha { alpha };
        let coefficient = krein_scalar(&p2, &ext, self.family)?;
        Ok(DomainElement { family: self.family, params: p2, ext, kappa: self.kappa, regular, coefficient })
    }
}

/// λ-independent label of a homogeneous-family extension.
pub fn extension_alpha(p: &ProblemParams, ext: &ExtensionParam) -> Result<Extended> {
    match reduce_ext(p, ext)? {
        ExtensionParam::Alpha { alpha } => Ok(alpha),
        ExtensionParam::TauAt { lambda, tau } => params::tau_to_alpha(&p.with_lambda(lambda)?, tau),
        ExtensionParam::Matrix { .. } => unreachable!("reduced above"),
    }
}

/// (A+λ)g for the homogeneous families, A·g for InhomogeneousD: the symbol applied to F.
pub fn apply_operator(e: &DomainElement) -> RadialFunction {
    multiplier_apply(&e.regular, &e.family.symbol(&e.params))
}

/// The unperturbed resolvent: division by the symbol.
pub fn unperturbed_resolvent(h: &RadialFunction, p: &ProblemParams, family: Family) -> RadialFunction {
    multiplier_apply(h, &family.inverse_symbol(p))
}

/// g = R0 h + c⟨kernel, h⟩ kernel, returned as a domain element.
pub fn apply_resolvent(
    h: &RadialFunction,
    p: &ProblemParams,
    ext: &ExtensionParam,
    family: Family,
) -> Result<DomainElement> {
    let c = krein_scalar(p, ext, family)?;
    let c = match c {
        Coefficient::Infinite => return Err(Error::NotInvertible),
        Coefficient::Finite(c) => c,
    };
    if h.dimension() != p.d {
        return Err(Error::GridMismatch);
    }
    let regular = unperturbed_resolvent(h, p, family);
    let kappa = eval_at_zero(&regular)? * c;
    Ok(DomainElement { family, params: *p, ext: ext.clone(), kappa, regular, coefficient: Coefficient::Finite(c) })
}

/// Resolvent output as a bare momentum profile.
pub fn resolvent_profile(h: &RadialFunction, p: &ProblemParams, ext: &ExtensionParam, family: Family) -> Result<RadialFunction> {
    apply_resolvent(h, p, ext, family)?.profile()
}

/// Shifted form value ⟨g,(A+λ)g⟩ (⟨g,Ag⟩ for InhomogeneousD) of F + κ·kernel with κ free.
pub fn shifted_form_value(
    regular: &RadialFunction,
    kappa: Complex64,
    p: &ProblemParams,
    ext: &ExtensionParam,
    family: Family,
) -> Result<f64> {
    let c = krein_scalar(p, ext, family)?;
    let symbol = family.symbol(p);
    let split_at_zero = p.d == 1 && p.s > 1.0 && family == Family::HomogeneousK;
    let (f, kappa, coef) = if split_at_zero {
        // kernel lies in the form domain here: re-split so the regular part vanishes at 0
        let kernel = family.kernel(p)?.profile(&regular.grid)?;
        let theta = params::theta(p.s, p.lambda)?;
        let shift = eval_at_zero(regular)? / theta;
        let f = regular.combine(Complex64::new(1.0, 0.0), &kernel, -shift)?;
        let coef = match c {
            Coefficient::Infinite => Extended::Finite(0.0),
            Coefficient::Finite(c) => Extended::Finite(1.0 / theta + c).recip(),
        };
        (f, kappa + shift, coef)
    } else {
        let coef = match c {
            Coefficient::Infinite => Extended::Finite(0.0),
            Coefficient::Finite(c) => Extended::Finite(c).recip(),
        };
        (regular.clone(), kappa, coef)
    };
    check_sobolev(&f, p.s / 2.0).map_err(|e| Error::FormDomainViolation(e.to_string()))?;
    let sf = multiplier_apply(&f, &symbol);
    let regular_part = inner_product(&f, &sf)?.re;
    let singular_part = match coef {
        Extended::Finite(b) => b * kappa.norm_sqr(),
        Extended::Infinity => {
            if kappa.norm() > 1e-12 * radial::l2_norm(&f)?.max(1e-300) {
                return Err(Error::FormDomainViolation("singular component outside the form domain of this extension".into()));
            }
            0.0
        }
    };
    Ok(regular_part + singular_part)
}

/// ‖g‖² for g = F + κ·kernel, with the kernel norm in closed form.
pub fn element_norm_sq(regular: &RadialFunction, kappa: Complex64, p: &ProblemParams, family: Family) -> Result<f64> {
    let kernel = family.kernel(p)?.profile(&regular.grid)?;
    let cross = inner_product(regular, &kernel)?;
    Ok(radial::l2_norm(regular)?.powi(2) + 2.0 * (kappa * cross.conj()).re + kappa.norm_sqr() * family_green_norm_sq(p, family))
}

/// Unshifted quadratic form of a domain element.
pub fn quadratic_form(e: &DomainElement) -> Result<f64> {
    let shifted = shifted_form_value(&e.regular, e.kappa, &e.params, &e.ext, e.family)?;
    let shift = e.family.shift(&e.params);
    if shift == 0.0 {
        return Ok(shifted);
    }
    Ok(shifted - shift * element_norm_sq(&e.regular, e.kappa, &e.params, e.family)?)
}

/// 1D, s ∈ (1, 3/2): the τ-form on F with F(0) = 0 and coefficient τ‖𝖦‖².
pub fn tau_form_value(regular: &RadialFunction, kappa: Complex64, p: &ProblemParams, tau: f64) -> Result<f64> {
    if !(p.d == 1 && p.s > 1.0) {
        return Err(Error::DomainError("the vanishing-at-zero τ-form is the 1D, s > 1 variant".into()));
    }
    let f0 = eval_at_zero(regular)?;
    let scale = radial::l2_norm(regular)?.max(1e-300);
    if f0.norm() > 1e-8 * scale {
        return Err(Error::FormDomainViolation(format!("regular part must vanish at 0, got {f0}")));
    }
    let sf = multiplier_apply(regular, &Multiplier::homogeneous_symbol(p.s, p.lambda));
    let shifted = inner_product(regular, &sf)?.re + tau * green_norm_sq(p) * kappa.norm_sqr();
    Ok(shifted - p.lambda * element_norm_sq(regular, kappa, p, Family::HomogeneousK)?)
}

/// ‖|∇|^{s/2} g‖² − |g(0)|²/α in 1D for s ∈ (1, 3/2).
pub fn form_perturbation_value(g: &RadialFunction, alpha: f64, s: f64) -> Result<f64> {
    if g.dimension() != 1 || !(s > 1.0 && s < 1.5) {
        return Err(Error::DomainError(format!("form perturbation needs d = 1 and s in (1, 3/2), got s = {s}")));
    }
    if alpha == 0.0 {
        return Err(Error::DomainError("α = 0 is the Friedrichs extension".into()));
    }
    let weighted = multiplier_apply(g, &Multiplier::new(move |r| r.powf(s), vec![(1.0, s)]));
    let kinetic = inner_product(g, &weighted)?.re;
    let g0 = eval_at_zero(g)?;
    Ok(kinetic - g0.norm_sqr() / alpha)
}

// ---------------------------------------------------------------------------
// Fractional powers of the s = 2 point interaction in 3D

/// Domain class of the s-th power of the 3D point interaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum FractionalDomain {
    /// H^s, s < 1/2
    PlainHs,
    /// H^s ∔ span{G_λ}, 1/2 < s < 3/2
    FreeSingular,
    /// κ = F(0)·coefficient, 3/2 < s < 2
    Constrained { coefficient: f64 },
}

pub fn classify_fractional_domain(s: f64, alpha: Extended, lambda: f64) -> Result<FractionalDomain> {
    let tol = params::ENDPOINT_TOL;
    if (s - 0.5).abs() < tol || (s - 1.5).abs() < tol {
        return Err(Error::EndpointPower { d: 3, s, tol });
    }
    if !(0.0..=2.0).contains(&s) {
        return Err(Error::DomainError(format!("fractional power needs s in [0, 2], got {s}")));
    }
    Ok(if s < 0.5 {
        FractionalDomain::PlainHs
    } else if s < 1.5 {
        FractionalDomain::FreeSingular
    } else {
        let coefficient = match alpha {
            Extended::Infinity => 0.0,
            Extended::Finite(a) => 1.0 / (a + lambda.sqrt() / (4.0 * PI)),
        };
        FractionalDomain::Constrained { coefficient }
    })
}

/// g = F + κ G_λ with G_λ = e^{−√λ|x|}/(4π|x|).
#[derive(Debug, Clone, PartialEq)]
pub struct PointElement {
    pub regular: RadialFunction,
    pub kappa: Complex64,
    pub lambda: f64,
}

impl PointElement {
    pub fn regular_only(regular: RadialFunction, lambda: f64) -> Self {
        Self { regular, kappa: Complex64::new(0.0, 0.0), lambda }
    }

    fn green(&self) -> Result<RadialFunction> {
        classic_green(self.lambda).profile(&self.regular.grid)
    }

    pub fn profile(&self) -> Result<RadialFunction> {
        self.regular.combine(Complex64::new(1.0, 0.0), &self.green()?, self.kappa)
    }

    pub fn norm_sq(&self) -> Result<f64> {
        let p = ProblemParams::new(3, 2.0, self.lambda)?;
        element_norm_sq(&self.regular, self.kappa, &p, Family::ClassicH)
    }

    /// ‖self − other‖ at a common λ.
    pub fn distance(&self, other: &PointElement) -> Result<f64> {
        if (self.lambda - other.lambda).abs() > 1e-14 * self.lambda {
            return Err(Error::InvalidParams("elements split at different λ".into()));
        }
        let diff = PointElement {
            regular: self.regular.sub(&other.regular)?,
            kappa: self.kappa - other.kappa,
            lambda: self.lambda,
        };
        Ok(diff.norm_sq()?.max(0.0).sqrt())
    }
}

fn classic_green(lambda: f64) -> GreenKernel {
    GreenKernel { kind: KernelKind::Homogeneous, params: ProblemParams { d: 3, s: 2.0, lambda, endpoint_tol: params::ENDPOINT_TOL } }
}

/// Quadrature for ∫_0^∞ t^β φ(t) dt with φ analytic near 0 and φ ~ t^{-γ} at infinity.
struct StieltjesRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl StieltjesRule {
    fn new(beta: f64, gamma: f64, lambda: f64, r_max: f64) -> Result<Self> {
        let t0 = 0.5 * lambda;
        let t_hi = 1e4 * r_max * r_max * lambda.max(1.0);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        // head: weight t^β on [0, t0]
        let (hn, hw) = gauss_jacobi_left(48, beta)?;
        for (u, w) in hn.iter().zip(&hw) {
            nodes.push(t0 * u);
            weights.push(w * t0.powf(beta + 1.0));
        }
        // body: panels of unit width in ln t
        let gl = GaussLegendre::new(16);
        let (a, b) = (t0.ln(), t_hi.ln());
        let panels = (b - a).ceil() as usize;
        let width = (b - a) / panels as f64;
        for k in 0..panels {
            let lo = a + k as f64 * width;
            for (u, w) in gl.mapped(lo, lo + width) {
                let t = u.exp();
                nodes.push(t);
                weights.push(w * t.powf(beta + 1.0));
            }
        }
        // tail: t = T/w with φ(t) t^γ smooth in w, weight w^{γ-β-2}
        let (tn, tw) = gauss_jacobi_left(32, gamma - beta - 2.0)?;
        for (w, ww) in tn.iter().zip(&tw) {
            let t = t_hi / w;
            nodes.push(t);
            weights.push(ww * t_hi.powf(beta + 1.0 - gamma) * t.powf(gamma));
        }
        Ok(Self { nodes, weights })
    }
}

/// ⟨G_μ, F⟩ for the classic kernel at shift μ, including the tail of F.
fn classic_pairing(f: &RadialFunction, mu: f64) -> Result<Complex64> {
    let grid: &RadialGrid = &f.grid;
    let c = (2.0 * PI).powf(-1.5);
    let body: Complex64 =
        grid.weights.iter().zip(grid.nodes.iter().zip(&f.values)).map(|(w, (r, v))| v * (w * c / (r * r + mu))).sum();
    if f.tail.is_empty() {
        return Ok(body);
    }
    // exact beyond r_max: ∫_R^∞ p^{2-e}/(p²+μ) dp = ∫_0^1 R^{3-e} u^{e-2}/(R²+μu²) du
    let r = grid.r_max();
    let mut tail = Complex64::new(0.0, 0.0);
    for term in &f.tail {
        let e = term.exp;
        if e <= 1.0 {
            return Err(Error::NotIntegrable(format!("tail exponent {e} against the resolvent kernel")));
        }
        let knee = (r / mu.sqrt()).min(1.0);
        let g = |u: f64| r.powf(3.0 - e) * u.powf(e - 2.0) / (r * r + mu * u * u);
        let tol = Tolerance { abs: 0.0, rel: 1e-12, max_intervals: 4000 };
        let v = integrate(g, 0.0, knee, tol)? + if knee < 1.0 { integrate(g, knee, 1.0, tol)? } else { 0.0 };
        tail += term.amp * (c * v);
    }
    Ok(body + tail)
}

/// ⟨G_μ, G_λ⟩ = 1/(4π(√μ + √λ)).
fn classic_overlap(mu: f64, lambda: f64) -> f64 {
    1.0 / (4.0 * PI * (mu.sqrt() + lambda.sqrt()))
}

fn check_fractional_inputs(alpha: Extended, s: f64, lambda: f64, d: u32) -> Result<()> {
    if d != 3 {
        return Err(Error::UnsupportedDimension(d));
    }
    if let Extended::Finite(a) = alpha {
        if a < 0.0 {
            return Err(Error::DomainError(format!("fractional formulas need α ≥ 0, got {a}")));
        }
    }
    if !(s > 0.0 && s < 2.0) {
        return Err(Error::DomainError(format!("fractional exponent must lie in (0, 2), got {s}")));
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidParams(format!("shift must be positive, got {lambda}")));
    }
    Ok(())
}

/// k(t) = ⟨G_{λ+t}, g⟩ on the rule's nodes, times the rule weight and the Kreĭn factor.
fn weighted_pairings(g: &PointElement, alpha: f64, s: f64, rule: &StieltjesRule) -> Result<Vec<Complex64>> {
    let lambda = g.lambda;
    let sine = 4.0 * (s * PI / 2.0).sin();
    rule.nodes
        .par_iter()
        .zip(&rule.weights)
        .map(|(&t, &w)| {
            let mu = lambda + t;
            let k = classic_pairing(&g.regular, mu)? + g.kappa * classic_overlap(mu, lambda);
            Ok(k * (w * sine / (4.0 * PI * alpha + mu.sqrt())))
        })
        .collect()
}

/// (h_α+λ)^{-s/2} applied to g, split as F + κ G_λ.
pub fn fractional_resolvent_element(g: &PointElement, alpha: Extended, s: f64) -> Result<PointElement> {
    let grid = Arc::clone(&g.regular.grid);
    check_fractional_inputs(alpha, s, g.lambda, grid.d)?;
    let lambda = g.lambda;
    let c = (2.0 * PI).powf(-1.5);
    let full = g.profile()?;
    let free = multiplier_apply(&full, &Multiplier::bessel_power(-s / 2.0, lambda));
    let a = match alpha {
        Extended::Infinity => {
            // the free power maps G_λ ~ p^{-2} into H^s: all of it is regular
            return Ok(PointElement::regular_only(free, lambda));
        }
        Extended::Finite(a) => a,
    };
    let decay = if g.kappa.norm() > 0.0 { 1.0 } else { 1.5 };
    let rule = StieltjesRule::new(-s / 2.0, decay, lambda, grid.r_max())?;
    let wk = weighted_pairings(g, a, s, &rule)?;
    let kappa: Complex64 = wk.iter().sum();
    // G_{λ+t} − G_λ = −t/((p²+λ)(p²+λ+t)) in momentum space
    let correction: Vec<Complex64> = grid
        .nodes
        .par_iter()
        .map(|&r| {
            let p2 = r * r + lambda;
            let sum: Complex64 = rule.nodes.iter().zip(&wk).map(|(&t, &v)| v * (t / (p2 + t))).sum();
            -sum * (c / p2)
        })
        .collect();
    let corr_tail = fitted_tail(&grid, &correction, if g.kappa.norm() > 0.0 { 2.0 + s } else { 3.0 + s });
    let corr = RadialFunction::from_values(&grid, correction, corr_tail)?;
    let regular = free.add(&corr)?;
    // the κ G_λ part of `free` decays like p^{-2-s} and stays in the regular part
    Ok(PointElement { regular, kappa, lambda })
}

fn fitted_tail(grid: &RadialGrid, values: &[Complex64], exp: f64) -> Vec<TailTerm> {
    let n = values.len();
    let r = grid.nodes[n - 1];
    let amp = values[n - 1] * r.powf(exp);
    if amp.norm() == 0.0 {
        return Vec::new();
    }
    vec![TailTerm { amp, exp }]
}

/// (h_α+λ)^{-s/2} h as a momentum profile.
pub fn fractional_resolvent_h(h: &RadialFunction, alpha: Extended, lambda: f64, s: f64) -> Result<RadialFunction> {
    fractional_resolvent_element(&PointElement::regular_only(h.clone(), lambda), alpha, s)?.profile()
}

/// (h_α+λ)^{s/2} g for g in the s-power domain.
pub fn fractional_power_h(g: &PointElement, alpha: Extended, s: f64) -> Result<RadialFunction> {
    let grid = Arc::clone(&g.regular.grid);
    let lambda = g.lambda;
    if (s - 2.0).abs() < 1e-12 {
        let p = ProblemParams::new(3, 2.0, lambda)?;
        let ext = ExtensionParam::Alpha { alpha };
        let e = DomainElement::from_parts(g.regular.clone(), g.kappa, &p, &ext, Family::ClassicH)?;
        return Ok(apply_operator(&e));
    }
    check_fractional_inputs(alpha, s, lambda, grid.d)?;
    match classify_fractional_domain(s, alpha, lambda)? {
        FractionalDomain::PlainHs if g.kappa.norm() > 0.0 => {
            return Err(Error::DomainViolation("for s < 1/2 the power domain is H^s; κ must vanish".into()));
        }
        FractionalDomain::Constrained { coefficient } => {
            let target = eval_at_zero(&g.regular)? * coefficient;
            if (g.kappa - target).norm() > 1e-8 * g.kappa.norm().max(target.norm()).max(1e-300) {
                return Err(Error::DomainViolation(format!("κ = {} violates κ = F(0)/(α+√λ/4π) = {target}", g.kappa)));
            }
        }
        _ => {}
    }
    check_sobolev(&g.regular, s)?;
    let c = (2.0 * PI).powf(-1.5);
    let free_regular = multiplier_apply(&g.regular, &Multiplier::bessel_power(s / 2.0, lambda));
    let kappa = g.kappa;
    let a = match alpha {
        Extended::Infinity => None,
        Extended::Finite(a) => Some(a),
    };
    let (rule, wk) = match a {
        Some(a) => {
            let decay = if kappa.norm() > 0.0 { 2.0 } else { 2.5 };
            let rule = StieltjesRule::new(s / 2.0, decay, lambda, grid.r_max())?;
            let wk = weighted_pairings(g, a, s, &rule)?;
            (Some(rule), wk)
        }
        None => (None, Vec::new()),
    };
    let values: Vec<Complex64> = grid
        .nodes
        .par_iter()
        .zip(&free_regular.values)
        .map(|(&r, &fr)| {
            let p2 = r * r + lambda;
            let singular = kappa * (c * p2.powf(s / 2.0 - 1.0));
            let correction: Complex64 = match &rule {
                Some(rule) => rule.nodes.iter().zip(&wk).map(|(&t, &v)| v / (p2 + t)).sum::<Complex64>() * c,
                None => Complex64::new(0.0, 0.0),
            };
            fr + singular - correction
        })
        .collect();
    RadialFunction::from_values(&grid, values, Vec::new())
}
