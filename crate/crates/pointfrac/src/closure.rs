//! Cut-off families, moment truncation and measured H^s convergence rates of
//! φ_n f → f.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;
use crate::radial::{eval_at_x, make_grid, sobolev_norm, GridSpec, RadialFunction};

/// C^∞ step: 0 for t ≤ 1, 1 for t ≥ 2.
pub fn smooth_step(t: f64) -> f64 {
    let h = |y: f64| if y > 0.0 { (-1.0 / y).exp() } else { 0.0 };
    if t <= 1.0 {
        0.0
    } else if t >= 2.0 {
        1.0
    } else {
        let (a, b) = (h(t - 1.0), h(2.0 - t));
        a / (a + b)
    }
}

/// φ_n(x) = φ(n|x|) and ψ_n = φ_n − 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffFamily {
    pub n: f64,
}

impl CutoffFamily {
    pub fn new(n: f64) -> Result<Self> {
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidParams(format!("cut-off scale must be positive, got {n}")));
        }
        Ok(CutoffFamily { n })
    }

    pub fn phi(&self, x: f64) -> f64 {
        smooth_step(self.n * x.abs())
    }

    pub fn psi(&self, x: f64) -> f64 {
        self.phi(x) - 1.0
    }
}

/// f̂_R = f̂·1_{|p|≤R} − (∫_{|p|≤R} f̂)·1_{|p|≤1}/vol(B₁), in 3D.
/// Both ball integrals use the grid's own weights, so ∫ f̂_R vanishes to rounding.
pub fn moment_truncate(f: &RadialFunction, r: f64) -> Result<RadialFunction> {
    if f.dimension() != 3 {
        return Err(Error::DomainError(format!("moment truncation is set up in 3D, got d = {}", f.dimension())));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::DomainError(format!("truncation radius must be positive, got {r}")));
    }
    let grid = &f.grid;
    let inside = |p: f64, radius: f64| p <= radius;
    let mass: Complex64 = grid.nodes.iter().zip(&grid.weights).zip(&f.values).filter(|((p, _), _)| inside(**p, r)).map(|((_, w), v)| v * w).sum();
    let ball: f64 = grid.nodes.iter().zip(&grid.weights).filter(|(p, _)| inside(**p, 1.0)).map(|(_, w)| w).sum();
    let values = grid
        .nodes
        .iter()
        .zip(&f.values)
        .map(|(&p, v)| {
            let kept = if inside(p, r) { *v } else { Complex64::new(0.0, 0.0) };
            if inside(p, 1.0) {
                kept - mass / ball
            } else {
                kept
            }
        })
        .collect();
    RadialFunction::from_values(grid, values, vec![])
}

/// Chebyshev interpolant of a smooth function on [0, b], built from m first-kind nodes.
struct Chebyshev {
    nodes: Vec<f64>,
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl Chebyshev {
    fn new(b: f64, m: usize, f: impl Fn(f64) -> Result<f64> + Sync) -> Result<Self> {
        let theta: Vec<f64> = (0..m).map(|j| PI * (j as f64 + 0.5) / m as f64).collect();
        let nodes: Vec<f64> = theta.iter().map(|t| 0.5 * b * (1.0 - t.cos())).collect();
        let values = nodes.par_iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
        let weights = theta.iter().enumerate().map(|(j, t)| if j % 2 == 0 { t.sin() } else { -t.sin() }).collect();
        Ok(Chebyshev { nodes, values, weights })
    }

    fn eval(&self, x: f64) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for ((xj, fj), wj) in self.nodes.iter().zip(&self.values).zip(&self.weights) {
            let dx = x - xj;
            if dx == 0.0 {
                return *fj;
            }
            num += wj / dx * fj;
            den += wj / dx;
        }
        num / den
    }
}

/// Momentum extent of ψ_n f, in units of n.
const K_MAX: f64 = 1500.0;
const PANELS: usize = 800;

/// Momentum profile of ψ_n f on a grid fitted to the scale n, for a position-space profile f.
pub fn cutoff_remainder_hat<F: Fn(f64) -> f64 + Sync>(f: F, n: f64, d: u32) -> Result<RadialFunction> {
    if d != 1 && d != 3 {
        return Err(Error::UnsupportedDimension(d));
    }
    let cut = CutoffFamily::new(n)?;
    // y = n|x| ∈ [0, 2] carries the support of ψ_n
    let gl = GaussLegendre::new(16);
    let width = 2.0 / PANELS as f64;
    let mut ys = Vec::with_capacity(PANELS * 16);
    let mut ws = Vec::with_capacity(PANELS * 16);
    for k in 0..PANELS {
        let lo = k as f64 * width;
        for (y, w) in gl.mapped(lo, lo + width) {
            ys.push(y);
            ws.push(w * cut.psi(y / n) * f(y / n));
        }
    }
    let grid = make_grid(GridSpec { r_min: 1e-3 * n, r_max: K_MAX * n, count: 2048 }, d)?;
    let values: Vec<Complex64> = grid
        .nodes
        .par_iter()
        .map(|&p| {
            let k = p / n;
            let v = match d {
                3 => {
                    let s: f64 = ys.iter().zip(&ws).map(|(y, w)| w * y * (k * y).sin()).sum();
                    (2.0 * PI).powf(-1.5) * 4.0 * PI / (p * n * n) * s
                }
                _ => {
                    let s: f64 = ys.iter().zip(&ws).map(|(y, w)| w * (k * y).cos()).sum();
                    (2.0 * PI).powf(-0.5) * 2.0 / n * s
                }
            };
            Complex64::new(v, 0.0)
        })
        .collect();
    RadialFunction::from_values(&grid, values, vec![])
}

/// ‖φ_n f − f‖_{H^s} for f given in position space.
pub fn closure_distance_position<F: Fn(f64) -> f64 + Sync>(f: F, n: f64, s: f64, d: u32) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::DomainError(format!("Sobolev order must be non-negative, got {s}")));
    }
    sobolev_norm(&cutoff_remainder_hat(f, n, d)?, s)
}

/// ‖φ_n f − f‖_{H^s} for f given by its momentum profile.
pub fn closure_distance(f: &RadialFunction, n: f64, s: f64, d: u32) -> Result<f64> {
    if f.dimension() != d {
        return Err(Error::GridMismatch);
    }
    let position = position_near_origin(f, 2.0 / n)?;
    closure_distance_position(|x| position.eval(x), n, s, d)
}

fn position_near_origin(f: &RadialFunction, b: f64) -> Result<Chebyshev> {
    Chebyshev::new(b, 40, |x| {
        let v = eval_at_x(f, x)?;
        if v.im.abs() > 1e-12 * v.re.abs().max(1e-300) {
            return Err(Error::DomainError("closure experiments take real profiles".into()));
        }
        Ok(v.re)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitFlag {
    NoSignal,
}

/// Least-squares slope of log(distance²) against log n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub distances_sq: Vec<(f64, f64)>,
    pub flag: Option<FitFlag>,
}

/// Distances² below this are treated as quadrature noise.
pub const NOISE_FLOOR: f64 = 1e-24;

/// Exponent b of the bound ‖φ_n f − f‖² ≲ n^b: 2s−3 in general, 2s−5 when f(0) = 0.
pub fn rate_bound(s: f64, moment_free: bool) -> f64 {
    if moment_free {
        2.0 * s - 5.0
    } else {
        2.0 * s - 3.0
    }
}

fn fit(distances_sq: Vec<(f64, f64)>) -> Result<RateFit> {
    if distances_sq.len() < 4 {
        return Err(Error::InvalidParams("rate fit needs at least four scales".into()));
    }
    if distances_sq.iter().all(|(_, v)| *v < NOISE_FLOOR) {
        return Ok(RateFit { slope: f64::NAN, distances_sq, flag: Some(FitFlag::NoSignal) });
    }
    let pts: Vec<(f64, f64)> = distances_sq.iter().map(|(n, v)| (n.ln(), v.max(f64::MIN_POSITIVE).ln())).collect();
    let m = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / m, pts.iter().map(|p| p.1).sum::<f64>() / m);
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    Ok(RateFit { slope: sxy / sxx, distances_sq, flag: None })
}

fn check_scales(n_list: &[f64]) -> Result<()> {
    if n_list.len() < 4 {
        return Err(Error::InvalidParams("rate fit needs at least four scales".into()));
    }
    let ratio = n_list[1] / n_list[0];
    let geometric = ratio > 1.0 && n_list.windows(2).all(|w| ((w[1] / w[0]) / ratio - 1.0).abs() < 1e-9);
    if !geometric {
        return Err(Error::InvalidParams("scales must form an increasing geometric sequence".into()));
    }
    Ok(())
}

pub fn decay_rate_fit(f: &RadialFunction, s: f64, d: u32, n_list: &[f64]) -> Result<RateFit> {
    check_scales(n_list)?;
    if f.dimension() != d {
        return Err(Error::GridMismatch);
    }
    // one interpolant on the widest support serves every scale
    let position = Arc::new(position_near_origin(f, 2.0 / n_list[0])?);
    let rows = n_list
        .par_iter()
        .map(|&n| closure_distance_position(|x| position.eval(x), n, s, d).map(|v| (n, v * v)))
        .collect::<Result<Vec<_>>>()?;
    fit(rows)
}

pub fn decay_rate_fit_position<F: Fn(f64) -> f64 + Sync>(f: F, s: f64, d: u32, n_list: &[f64]) -> Result<RateFit> {
    check_scales(n_list)?;
    let rows = n_list.par_iter().map(|&n| closure_distance_position(&f, n, s, d).map(|v| (n, v * v))).collect::<Result<Vec<_>>>()?;
    fit(rows)
}
