//! Radial momentum-space functions on a logarithmic grid: quadrature, point
//! evaluation, Sobolev norms and Fourier multipliers.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quad::{self, GaussLegendre, Tolerance};

/// Log-spaced grid description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub count: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { r_min: 1e-6, r_max: 1e6, count: 4096 }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_min.is_finite()) {
            return Err(Error::BadSpec(format!("r_min must be positive, got {}", self.r_min)));
        }
        if !(self.r_max > self.r_min && self.r_max.is_finite()) {
            return Err(Error::BadSpec(format!("need r_max > r_min, got [{}, {}]", self.r_min, self.r_max)));
        }
        if self.count < 16 {
            return Err(Error::BadSpec(format!("count must be >= 16, got {}", self.count)));
        }
        Ok(())
    }

    /// Parses "r_min,r_max,count".
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::BadSpec(format!("expected r_min,r_max,count, got {text:?}")));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| Error::BadSpec(format!("not a number: {s:?}")));
        let count = parts[2].parse::<usize>().map_err(|_| Error::BadSpec(format!("not a count: {:?}", parts[2])))?;
        let spec = Self { r_min: num(parts[0])?, r_max: num(parts[1])?, count };
        spec.validate()?;
        Ok(spec)
    }
}

/// Surface area of the unit sphere in R^d.
pub fn sphere_area(d: u32) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0)
}

/// Nodes and weights for ∫_{R^d} f(|p|) dp restricted to r ≤ r_max.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    pub spec: GridSpec,
    pub d: u32,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    log_min: f64,
    h: f64,
}

/// Builds the grid. Weights use the fourth-order extended Simpson rule in u = ln r,
/// with the ball below r_min folded into the first weight.
pub fn make_grid(spec: GridSpec, d: u32) -> Result<Arc<RadialGrid>> {
    spec.validate()?;
    if d == 0 {
        return Err(Error::BadSpec("dimension must be >= 1".into()));
    }
    let n = spec.count;
    let log_min = spec.r_min.ln();
    let h = (spec.r_max.ln() - log_min) / (n - 1) as f64;
    let omega = sphere_area(d);
    let df = d as f64;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let r = if i == n - 1 { spec.r_max } else { (log_min + i as f64 * h).exp() };
        let c = match i.min(n - 1 - i) {
            0 => 3.0 / 8.0,
            1 => 7.0 / 6.0,
            2 => 23.0 / 24.0,
            _ => 1.0,
        };
        nodes.push(r);
        weights.push(omega * c * h * r.powf(df));
    }
    weights[0] += omega * spec.r_min.powf(df) / df;
    Ok(Arc::new(RadialGrid { spec, d, nodes, weights, log_min, h }))
}

impl RadialGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        self.spec.r_max
    }

    fn same_as(&self, other: &RadialGrid) -> bool {
        self.d == other.d && self.spec == other.spec
    }

    /// Fractional index of r in the u-uniform node sequence.
    fn position(&self, r: f64) -> f64 {
        (r.ln() - self.log_min) / self.h
    }
}

/// One term amp·r^{-exp} of an algebraic tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailTerm {
    pub amp: Complex64,
    pub exp: f64,
}

impl TailTerm {
    pub fn new(amp: f64, exp: f64) -> Self {
        Self { amp: Complex64::new(amp, 0.0), exp }
    }
}

pub(crate) fn tail_value(tail: &[TailTerm], r: f64) -> Complex64 {
    tail.iter().map(|t| t.amp * r.powf(-t.exp)).sum()
}

/// Merges terms with equal exponents and drops those that cancel on merging.
pub(crate) fn normalize_tail(mut terms: Vec<TailTerm>) -> Vec<TailTerm> {
    terms.sort_by(|a, b| a.exp.partial_cmp(&b.exp).unwrap_or(std::cmp::Ordering::Equal));
    let mut out: Vec<(TailTerm, f64)> = Vec::with_capacity(terms.len());
    for t in terms {
        match out.last_mut() {
            Some((last, mass)) if (last.exp - t.exp).abs() < 1e-12 => {
                last.amp += t.amp;
                *mass += t.amp.norm();
            }
            _ => out.push((t, t.amp.norm())),
        }
    }
    out.into_iter().filter(|(t, mass)| t.amp.norm() > 1e-14 * mass).map(|(t, _)| t).collect()
}

pub(crate) fn tail_product(a: &[TailTerm], b: &[TailTerm], conj_a: bool) -> Vec<TailTerm> {
    let mut terms = Vec::with_capacity(a.len() * b.len());
    for x in a {
        let ax = if conj_a { x.amp.conj() } else { x.amp };
        for y in b {
            terms.push(TailTerm { amp: ax * y.amp, exp: x.exp + y.exp });
        }
    }
    normalize_tail(terms)
}

/// ∫_{|p| > r_max} Σ amp |p|^{-exp} dp.
pub(crate) fn tail_integral(tail: &[TailTerm], d: u32, r_max: f64) -> Result<Complex64> {
    let df = d as f64;
    let omega = sphere_area(d);
    let mut total = Complex64::new(0.0, 0.0);
    for t in tail {
        if t.exp <= df {
            return Err(Error::NotIntegrable(format!("tail exponent {} <= dimension {d}", t.exp)));
        }
        total += t.amp * omega * r_max.powf(df - t.exp) / (t.exp - df);
    }
    Ok(total)
}

/// Sampled radial momentum profile with an optional algebraic tail beyond r_max.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFunction {
    pub grid: Arc<RadialGrid>,
    pub values: Vec<Complex64>,
    pub tail: Vec<TailTerm>,
}

impl RadialFunction {
    /// Samples f on the grid; a non-empty tail must match the last decade within 5%.
    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: &Arc<RadialGrid>, f: F, tail: Vec<TailTerm>) -> Result<Self> {
        let values = grid.nodes.iter().map(|&r| f(r)).collect();
        let out = Self::from_values(grid, values, tail)?;
        out.check_tail()?;
        Ok(out)
    }

    pub fn from_real_fn<F: Fn(f64) -> f64>(grid: &Arc<RadialGrid>, f: F, tail: Vec<TailTerm>) -> Result<Self> {
        Self::from_fn(grid, |r| Complex64::new(f(r), 0.0), tail)
    }

    pub fn from_values(grid: &Arc<RadialGrid>, values: Vec<Complex64>, tail: Vec<TailTerm>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidParams(format!("non-finite sample at r = {:e}", grid.nodes[i])));
        }
        Ok(Self { grid: Arc::clone(grid), values, tail: normalize_tail(tail) })
    }

    pub fn zeros(grid: &Arc<RadialGrid>) -> Self {
        Self { grid: Arc::clone(grid), values: vec![Complex64::new(0.0, 0.0); grid.len()], tail: Vec::new() }
    }

    fn check_tail(&self) -> Result<()> {
        if self.tail.is_empty() {
            return Ok(());
        }
        let r_max = self.grid.r_max();
        for (&r, v) in self.grid.nodes.iter().zip(&self.values).rev() {
            if r < r_max / 10.0 {
                break;
            }
            let t = tail_value(&self.tail, r);
            if (v - t).norm() > 0.05 * t.norm().max(1e-300) {
                return Err(Error::InvalidParams(format!(
                    "tail does not match samples at r = {r:e}: {v} vs {t}"
                )));
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> u32 {
        self.grid.d
    }

    fn check_grid(&self, other: &RadialFunction) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Cubic interpolation in u = ln r; constant below r_min, tail beyond r_max.
    pub fn interpolate(&self, r: f64) -> Complex64 {
        let g = &*self.grid;
        if r <= g.nodes[0] {
            return self.values[0];
        }
        if r >= g.r_max() {
            return if r == g.r_max() { self.values[g.len() - 1] } else { tail_value(&self.tail, r) };
        }
        let pos = g.position(r);
        let n = g.len();
        let base = (pos.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
        let t = pos - base as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..4 {
            let mut l = 1.0;
            for m in 0..4 {
                if m != j {
                    l *= (t - m as f64) / (j as f64 - m as f64);
                }
            }
            acc += self.values[base + j] * l;
        }
        acc
    }

    /// ∫_{R^d} f̂ dp.
    pub fn integral(&self) -> Result<Complex64> {
        let body: Complex64 = self.grid.weights.iter().zip(&self.values).map(|(w, v)| v * *w).sum();
        Ok(body + tail_integral(&self.tail, self.grid.d, self.grid.r_max())?)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|v| v * c).collect(),
            tail: normalize_tail(self.tail.iter().map(|t| TailTerm { amp: t.amp * c, exp: t.exp }).collect()),
        }
    }

    /// a·self + b·other.
    pub fn combine(&self, a: Complex64, other: &RadialFunction, b: Complex64) -> Result<Self> {
        self.check_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        let mut tail: Vec<TailTerm> = self.tail.iter().map(|t| TailTerm { amp: t.amp * a, exp: t.exp }).collect();
        tail.extend(other.tail.iter().map(|t| TailTerm { amp: t.amp * b, exp: t.exp }));
        Ok(Self { grid: Arc::clone(&self.grid), values, tail: normalize_tail(tail) })
    }

    pub fn add(&self, other: &RadialFunction) -> Result<Self> {
        self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &RadialFunction) -> Result<Self> {
        self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
    }

    /// Largest sample modulus.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// r beyond which the profile is either negligible or follows its tail to 1e-6.
    fn asymptotic_scale(&self) -> f64 {
        let g = &*self.grid;
        let peak = self.max_abs();
        if self.tail.is_empty() {
            let idx = self.values.iter().rposition(|v| v.norm() > 1e-17 * peak).unwrap_or(0);
            return g.nodes[idx];
        }
        let mut scale = g.r_max();
        for (i, v) in self.values.iter().enumerate().rev() {
            let t = tail_value(&self.tail, g.nodes[i]);
            if (v - t).norm() > 1e-6 * t.norm() {
                break;
            }
            scale = g.nodes[i];
        }
        scale
    }
}

/// ⟨f, g⟩ = ∫ conj(f̂) ĝ dp, with the analytic tail correction when both tails are present.
pub fn inner_product(f: &RadialFunction, g: &RadialFunction) -> Result<Complex64> {
    f.check_grid(g)?;
    let body: Complex64 =
        f.grid.weights.iter().zip(f.values.iter().zip(&g.values)).map(|(w, (a, b))| a.conj() * b * *w).sum();
    if f.tail.is_empty() || g.tail.is_empty() {
        return Ok(body);
    }
    let tail = tail_product(&f.tail, &g.tail, true);
    Ok(body + tail_integral(&tail, f.grid.d, f.grid.r_max())?)
}

pub fn l2_norm(f: &RadialFunction) -> Result<f64> {
    Ok(inner_product(f, f)?.re.max(0.0).sqrt())
}

/// f(0) = (2π)^{-d/2} ∫ f̂ dp.
pub fn eval_at_zero(f: &RadialFunction) -> Result<Complex64> {
    let d = f.grid.d as f64;
    Ok(f.integral()? * (2.0 * PI).powf(-d / 2.0))
}

/// (∫ (1+r²)^s |f̂|² dp)^{1/2}; the tail uses the leading r^{2s} growth of the weight.
pub fn sobolev_norm(f: &RadialFunction, s: f64) -> Result<f64> {
    let g = &*f.grid;
    let body: f64 =
        g.weights.iter().zip(g.nodes.iter().zip(&f.values)).map(|(w, (r, v))| w * (1.0 + r * r).powf(s) * v.norm_sqr()).sum();
    let mut tail = tail_product(&f.tail, &f.tail, true);
    for t in &mut tail {
        t.exp -= 2.0 * s;
    }
    let rest = tail_integral(&tail, g.d, g.r_max())?;
    Ok((body + rest.re).max(0.0).sqrt())
}

/// Radial Fourier multiplier m(r) with large-r expansion Σ coef·r^{power}.
#[derive(Clone)]
pub struct Multiplier {
    func: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub asymptotic: Vec<(f64, f64)>,
}

impl std::fmt::Debug for Multiplier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Multiplier").field("asymptotic", &self.asymptotic).finish()
    }
}

impl Multiplier {
    pub fn new<F: Fn(f64) -> f64 + Send + Sync + 'static>(func: F, asymptotic: Vec<(f64, f64)>) -> Self {
        Self { func: Arc::new(func), asymptotic }
    }

    pub fn eval(&self, r: f64) -> f64 {
        (self.func)(r)
    }

    pub fn identity() -> Self {
        Self::new(|_| 1.0, vec![(1.0, 0.0)])
    }

    /// r^s + λ.
    pub fn homogeneous_symbol(s: f64, lambda: f64) -> Self {
        Self::new(move |r| r.powf(s) + lambda, vec![(1.0, s), (lambda, 0.0)])
    }

    /// (r^s + λ)^{-1}, expanded to `terms` orders in λ r^{-s}.
    pub fn homogeneous_inverse(s: f64, lambda: f64) -> Self {
        let asym = (0..6).map(|k| ((-lambda).powi(k), -(k as f64 + 1.0) * s)).collect();
        Self::new(move |r| 1.0 / (r.powf(s) + lambda), asym)
    }

    /// (r² + λ)^{a}, expanded binomially in λ r^{-2}.
    pub fn bessel_power(a: f64, lambda: f64) -> Self {
        let mut asym = Vec::new();
        let mut coef = 1.0;
        for k in 0..6 {
            asym.push((coef * lambda.powi(k), 2.0 * a - 2.0 * k as f64));
            coef *= (a - k as f64) / (k as f64 + 1.0);
        }
        Self::new(move |r| (r * r + lambda).powf(a), asym)
    }
}

/// Pointwise product with m; the tail is re-expanded through m's asymptotic series.
pub fn multiplier_apply(f: &RadialFunction, m: &Multiplier) -> RadialFunction {
    let values = f.grid.nodes.iter().zip(&f.values).map(|(&r, v)| v * m.eval(r)).collect();
    let m_tail: Vec<TailTerm> = m.asymptotic.iter().map(|&(c, p)| TailTerm::new(c, -p)).collect();
    let tail = tail_product(&m_tail, &f.tail, false);
    RadialFunction { grid: Arc::clone(&f.grid), values, tail }
}

thread_local! {
    static PANEL_RULE: GaussLegendre = GaussLegendre::new(32);
}

/// Inverse radial Fourier transform of a real profile φ at radius x > 0:
/// d = 3: (2π)^{-3/2}(4π/x)∫ r sin(rx) φ dr; d = 1: (2π)^{-1/2}·2∫ cos(rx) φ dr.
/// `scale` marks where φ enters its smooth asymptotic regime.
pub fn radial_transform<F: Fn(f64) -> f64>(d: u32, x: f64, phi: F, scale: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::InvalidParams(format!("position radius must be positive, got {x}")));
    }
    let (kernel, prefactor, first_zero): (Box<dyn Fn(f64) -> f64>, f64, f64) = match d {
        3 => (Box::new(move |r: f64| r * (r * x).sin()), (2.0 * PI).powf(-1.5) * 4.0 * PI / x, PI / x),
        1 => (Box::new(move |r: f64| (r * x).cos()), (2.0 * PI).powf(-0.5) * 2.0, 0.5 * PI / x),
        _ => return Err(Error::UnsupportedDimension(d)),
    };
    let integrand = |r: f64| kernel(r) * phi(r);
    let half = PI / x;
    let scale = scale.max(1e-300);

    // head up to the first zero: plain near 0, logarithmic in r above
    let split = first_zero.min(1e-3 * scale);
    let tol = Tolerance { abs: 0.0, rel: 1e-13, max_intervals: 20000 };
    let mut head = quad::integrate(&integrand, 0.0, split, tol)?;
    if first_zero > split {
        head += quad::integrate_log(&integrand, split, first_zero, tol)?;
    }

    // half-period panels through the non-asymptotic region
    let panel = |a: f64| -> f64 { PANEL_RULE.with(|rule| rule.integrate(a, a + half, &integrand)) };
    let mut sum = head;
    let mut a = first_zero;
    let near_limit = 50.0 * scale;
    let mut guard = 0usize;
    while a < near_limit {
        let width_ok = half < 0.25 * a.max(scale);
        let piece = if width_ok {
            panel(a)
        } else {
            let abs = 1e-15 * sum.abs().max(head.abs());
            quad::integrate(&integrand, a, a + half, Tolerance { abs, rel: 1e-13, max_intervals: 4000 })?
        };
        sum += piece;
        a += half;
        guard += 1;
        if guard > 2_000_000 {
            return Err(Error::QuadratureFailure("too many oscillation panels".into()));
        }
    }

    // alternating remainder, accelerated
    const TERMS: usize = 48;
    let mut partial = Vec::with_capacity(TERMS);
    let mut acc = sum;
    for _ in 0..TERMS {
        acc += panel(a);
        a += half;
        partial.push(acc);
    }
    let fine = quad::wynn_epsilon(&partial);
    let coarse = quad::wynn_epsilon(&partial[..TERMS - 12]);
    let err = (fine - coarse).abs();
    if !fine.is_finite() || err > 1e-8 * fine.abs().max(1e-12 * head.abs()) + 1e-280 {
        return Err(Error::QuadratureFailure(format!(
            "oscillatory tail at x = {x:e}: extrapolations differ by {err:e}"
        )));
    }
    Ok(prefactor * fine)
}

/// Position-space value f(x) of a radial profile (d = 1 or 3).
pub fn eval_at_x(f: &RadialFunction, x: f64) -> Result<Complex64> {
    let scale = f.asymptotic_scale();
    let d = f.grid.d;
    let re = radial_transform(d, x, |r| f.interpolate(r).re, scale)?;
    let has_imag = f.values.iter().any(|v| v.im != 0.0) || f.tail.iter().any(|t| t.amp.im != 0.0);
    let im = if has_imag { radial_transform(d, x, |r| f.interpolate(r).im, scale)? } else { 0.0 };
    Ok(Complex64::new(re, im))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid3() -> Arc<RadialGrid> {
        make_grid(GridSpec::default(), 3).unwrap()
    }

    #[test]
    fn gaussian_volume() {
        let g = grid3();
        let f = RadialFunction::from_real_fn(&g, |r| (-r * r).exp(), vec![]).unwrap();
        let v = f.integral().unwrap().re;
        assert!((v / PI.powf(1.5) - 1.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn bad_specs() {
        assert!(make_grid(GridSpec { r_min: 2.0, r_max: 1.0, count: 100 }, 3).is_err());
        assert!(make_grid(GridSpec { r_min: 1e-3, r_max: 1e3, count: 16 }, 1).is_ok());
        assert!(make_grid(GridSpec { r_min: 1e-3, r_max: 1e3, count: 15 }, 1).is_err());
    }

    #[test]
    fn green_norm_in_3d() {
        let g = grid3();
        let c = (2.0 * PI).powf(-1.5);
        let k = RadialFunction::from_real_fn(&g, |r| c / (r * r + 1.0), vec![TailTerm::new(c, 2.0), TailTerm::new(-c, 4.0)])
            .unwrap();
        let n = inner_product(&k, &k).unwrap().re;
        assert!((n * 8.0 * PI - 1.0).abs() < 1e-10, "{n}");
    }

    #[test]
    fn transform_of_gaussian_is_gaussian() {
        for d in [1u32, 3] {
            let g = make_grid(GridSpec::default(), d).unwrap();
            let c = (2.0 * PI).powf(-(d as f64) / 2.0);
            let _ = c;
            let f = RadialFunction::from_real_fn(&g, |r| (-r * r / 2.0).exp(), vec![]).unwrap();
            for x in [0.3, 1.0, 2.5] {
                let v = eval_at_x(&f, x).unwrap().re;
                assert!((v - (-x * x / 2.0f64).exp()).abs() < 1e-8, "d={d} x={x} v={v}");
            }
        }
    }

    #[test]
    fn multiplier_round_trip() {
        let g = grid3();
        let f = RadialFunction::from_real_fn(&g, |r| 1.0 / (r.powf(1.8) + 1.0), vec![TailTerm::new(1.0, 1.8), TailTerm::new(-1.0, 3.6)])
            .unwrap();
        let there = multiplier_apply(&f, &Multiplier::homogeneous_symbol(1.8, 1.0));
        for v in &there.values {
            assert!((v.re - 1.0).abs() < 1e-14);
        }
        let back = multiplier_apply(&there, &Multiplier::homogeneous_inverse(1.8, 1.0));
        for (a, b) in back.values.iter().zip(&f.values) {
            assert!((a - b).norm() <= 1e-14 * b.norm());
        }
    }

    #[test]
    fn sobolev_threshold_for_classic_kernel() {
        let g = grid3();
        let f = RadialFunction::from_real_fn(&g, |r| 1.0 / (r * r + 1.0), vec![TailTerm::new(1.0, 2.0), TailTerm::new(-1.0, 4.0)])
            .unwrap();
        assert!(sobolev_norm(&f, 0.4).is_ok());
        assert!(matches!(sobolev_norm(&f, 0.6), Err(Error::NotIntegrable(_))));
    }
}
