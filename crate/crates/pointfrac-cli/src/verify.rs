//! Invariant suites behind `verify`. Inputs are fixed so reports are reproducible.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use pointfrac::closure::{decay_rate_fit_position, rate_bound};
use pointfrac::highrank::{kernel_basis, make_t_element, symmetry_residual, Flavor, TSplit};
use pointfrac::io::{to_json_string, Envelope};
use pointfrac::kernels::{kernel_position, lambda_difference_integral, singularity_constant, GreenKernel};
use pointfrac::operators::{apply_resolvent, shifted_form_value, Family};
use pointfrac::params::{Extended, ExtensionParam, ProblemParams};
use pointfrac::radial::{inner_product, l2_norm, make_grid, GridSpec, RadialFunction, RadialGrid, TailTerm};
use pointfrac::spectral::{bound_state_3d, figure1_sweep, krein_denominator, tau_grid};
use pointfrac::Error;
use serde::Serialize;
use serde_json::json;

use crate::output::Failure;
use crate::resolvent::inverse_pair_residual;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Kernels,
    Krein,
    Spectral,
    Closure,
    Highrank,
    All,
}

impl Suite {
    const EACH: [Suite; 5] = [Suite::Kernels, Suite::Krein, Suite::Spectral, Suite::Closure, Suite::Highrank];

    fn name(self) -> &'static str {
        match self {
            Suite::Kernels => "kernels",
            Suite::Krein => "krein",
            Suite::Spectral => "spectral",
            Suite::Closure => "closure",
            Suite::Highrank => "highrank",
            Suite::All => "all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// measured < tolerance
    Below,
    /// measured > tolerance
    Above,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub check: String,
    pub measured: Option<f64>,
    pub tolerance: f64,
    pub bound: Bound,
    pub pass: bool,
    pub error: Option<String>,
}

struct Recorder {
    suite: &'static str,
    scale: f64,
    grid: GridSpec,
    checks: Vec<Check>,
}

impl Recorder {
    fn record(&mut self, check: &str, measured: Result<f64, Error>, tolerance: f64, bound: Bound) {
        let tolerance = if bound == Bound::Below && tolerance > 0.0 { tolerance * self.scale } else { tolerance };
        let (measured, error) = match measured {
            Ok(v) => (Some(v), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let pass = match (measured, bound) {
            (Some(v), Bound::Below) => v < tolerance,
            (Some(v), Bound::Above) => v > tolerance,
            (None, _) => false,
        };
        self.checks.push(Check { suite: self.suite, check: check.to_string(), measured, tolerance, bound, pass, error });
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}


/// Fixed smooth inputs: a₁e^{-b₁p²} + a₂p²e^{-b₂p²}.
fn inputs(g: &Arc<RadialGrid>) -> Result<Vec<RadialFunction>, Error> {
    [(1.0, 0.7, -0.3, 1.9), (-0.4, 2.2, 0.8, 0.45), (0.6, 0.3, 0.2, 1.1)]
        .iter()
        .map(|&(a1, b1, a2, b2)| RadialFunction::from_real_fn(g, |p| a1 * (-b1 * p * p).exp() + a2 * p * p * (-b2 * p * p).exp(), vec![]))
        .collect()
}

fn kernels(r: &mut Recorder) {
    let worst = (|| {
        let k = GreenKernel::homogeneous(ProblemParams::new(3, 2.0, 1.0)?)?;
        let mut worst = 0.0f64;
        for i in 0..20 {
            let x = 1e-3 * (1e4f64).powf(i as f64 / 19.0);
            worst = worst.max((kernel_position(&k, x)? / ((-x).exp() / (4.0 * PI * x)) - 1.0).abs());
        }
        Ok(worst)
    })();
    r.record("s=2 kernel against e^{-|x|}/(4π|x|)", worst, 1e-7, Bound::Below);
    for (d, s, lambda) in [(3u32, 1.8, 1.0), (3, 2.2, 1.0), (1, 0.8, 1e-12)] {
        let dev = (|| {
            let k = GreenKernel::homogeneous(ProblemParams::new(d, s, lambda)?)?;
            let x: f64 = 1e-4;
            Ok((x.powf(d as f64 - s) * kernel_position(&k, x)? / singularity_constant(d, s)? - 1.0).abs())
        })();
        r.record(&format!("singularity constant d={d} s={s}"), dev, 1e-3, Bound::Below);
    }
    let exact = lambda_difference_integral(3, 2.0, 1.0, 4.0).map(|v| (v / (2.0 * PI * PI) - 1.0).abs());
    r.record("λ-difference integral equals 2π² at s=2", exact, 1e-14, Bound::Below);
}

fn krein_cases() -> [(&'static str, u32, f64, Family, ExtensionParam); 5] {
    [
        ("ClassicH", 3, 2.0, Family::ClassicH, ExtensionParam::Alpha { alpha: Extended::Finite(0.7) }),
        ("HomogeneousK d=3", 3, 1.8, Family::HomogeneousK, ExtensionParam::Alpha { alpha: Extended::Finite(-0.4) }),
        ("HomogeneousK d=1 s<1", 1, 0.8, Family::HomogeneousK, ExtensionParam::Alpha { alpha: Extended::Finite(1.3) }),
        ("HomogeneousK d=1 s>1", 1, 1.2, Family::HomogeneousK, ExtensionParam::Alpha { alpha: Extended::Finite(0.6) }),
        ("InhomogeneousD", 3, 1.8, Family::InhomogeneousD, ExtensionParam::TauAt { lambda: 1.0, tau: Extended::Finite(-0.8) }),
    ]
}

fn krein(r: &mut Recorder) {
    let spec = r.grid;
    for (name, d, s, family, ext) in krein_cases() {
        let run = || -> Result<(f64, f64, f64), Error> {
            let g = make_grid(spec, d)?;
            let p = ProblemParams::new(d, s, 1.0)?;
            let hs = inputs(&g)?;
            let (mut pair, mut boundary) = (0.0f64, 0.0f64);
            let mut outs = Vec::new();
            for h in &hs {
                let e = apply_resolvent(h, &p, &ext, family)?;
                boundary = boundary.max(e.boundary_residual()?);
                let full = e.profile()?;
                pair = pair.max(inverse_pair_residual(&full, h, &p, &ext, family).map_err(|f| Error::DomainError(f.message))?);
                outs.push(full);
            }
            // real parameter: the resolvent is symmetric
            let a = inner_product(&hs[0], &outs[1])?;
            let b = inner_product(&outs[0], &hs[1])?;
            let sym = (a - b).norm() / a.norm().max(b.norm());
            Ok((pair, boundary, sym))
        };
        match run() {
            Ok((pair, boundary, sym)) => {
                r.record(&format!("{name}: operator after resolvent is the identity"), Ok(pair), 1e-8, Bound::Below);
                r.record(&format!("{name}: boundary condition κ = c·F(0)"), Ok(boundary), 1e-10, Bound::Below);
                r.record(&format!("{name}: resolvent symmetry"), Ok(sym), 1e-8, Bound::Below);
            }
            Err(e) => r.record(&format!("{name}: resolvent"), Err(e), 1e-8, Bound::Below),
        }
        // τ > 0 makes the shifted form non-negative; τ < 0 admits a negative direction
        let signs = || -> Result<(f64, f64), Error> {
            let g = make_grid(spec, d)?;
            let p = ProblemParams::new(d, s, 1.0)?;
            let pos = ExtensionParam::TauAt { lambda: 1.0, tau: Extended::Finite(0.8) };
            let neg = ExtensionParam::TauAt { lambda: 1.0, tau: Extended::Finite(-0.8) };
            let mut lowest = f64::INFINITY;
            for (h, kappa) in inputs(&g)?.iter().zip([c(1.0), Complex64::new(-0.5, 2.0), c(0.0)]) {
                lowest = lowest.min(shifted_form_value(h, kappa, &p, &pos, family)?);
            }
            let witness = shifted_form_value(&RadialFunction::zeros(&g), c(1.0), &p, &neg, family)?;
            Ok((lowest, -witness))
        };
        match signs() {
            Ok((lowest, witness)) => {
                r.record(&format!("{name}: shifted form at τ>0"), Ok(lowest), -1e-9, Bound::Above);
                r.record(&format!("{name}: negative witness at τ<0 (negated)"), Ok(witness), 0.0, Bound::Above);
            }
            Err(e) => r.record(&format!("{name}: form sign law"), Err(e), 0.0, Bound::Above),
        }
    }
}

fn spectral(r: &mut Recorder) {
    let spec = r.grid;
    for s in [1.7, 1.8, 2.2] {
        for a in [-0.5, -2.0] {
            let run = || -> Result<(f64, f64), Error> {
                let res = bound_state_3d(Extended::Finite(a), s)?;
                let e = res.eigenvalue.ok_or_else(|| Error::DomainError("no bound state".into()))?;
                let denom = krein_denominator(3, s, -e, a)?.abs();
                let g = make_grid(spec, 3)?;
                let phi = res.eigenfunction.as_ref().ok_or_else(|| Error::DomainError("no eigenfunction".into()))?.profile(&g)?;
                let mu = -0.37 * e + 0.5;
                let p = ProblemParams::new(3, s, mu)?;
                let ext = ExtensionParam::Alpha { alpha: Extended::Finite(a) };
                let out = apply_resolvent(&phi, &p, &ext, Family::HomogeneousK)?.profile()?;
                let expect = phi.scale(c(1.0 / (mu + e)));
                Ok((denom, l2_norm(&out.sub(&expect)?)? / l2_norm(&expect)?))
            };
            match run() {
                Ok((denom, rel)) => {
                    r.record(&format!("s={s} α={a}: Kreĭn denominator at E"), Ok(denom), 1e-10, Bound::Below);
                    r.record(&format!("s={s} α={a}: resolvent eigen-relation"), Ok(rel), 1e-7, Bound::Below);
                }
                Err(e) => r.record(&format!("s={s} α={a}: bound state"), Err(e), 1e-10, Bound::Below),
            }
        }
    }
    let curve = (|| -> Result<(f64, f64), Error> {
        let taus = tau_grid(-3.0, -0.05, 12)?;
        let rows = figure1_sweep(1.0, 1.8, &taus);
        let es: Vec<f64> = rows.iter().map(|row| row.e_tau.unwrap_or(f64::NAN)).collect();
        // worst margins, positive when the property holds
        let below = taus.iter().zip(&es).map(|(t, e)| t - e).fold(f64::INFINITY, f64::min);
        let rising = es.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        Ok((below, rising))
    })();
    match curve {
        Ok((below, rising)) => {
            r.record("E_τ < τ on [-3, -0.05] (min τ − E)", Ok(below), 0.0, Bound::Above);
            r.record("E_τ increasing (min step)", Ok(rising), 0.0, Bound::Above);
        }
        Err(e) => r.record("E_τ curve", Err(e), 0.0, Bound::Above),
    }
}

fn closure(r: &mut Recorder) {
    let gaussian = |x: f64| (-0.5 * x * x).exp();
    let ns = [4.0, 8.0, 16.0, 32.0, 64.0];
    let generic = decay_rate_fit_position(gaussian, 1.0, 3, &ns).map(|f| f.slope);
    r.record("generic slope at s=1 (bound 2s−3 + 0.3)", generic, rate_bound(1.0, false) + 0.3, Bound::Below);
    let free = decay_rate_fit_position(|x| x * x * gaussian(x), 2.0, 3, &ns).map(|f| f.slope);
    r.record("moment-free slope at s=2 (bound 2s−5 + 0.3)", free, rate_bound(2.0, true) + 0.3, Bound::Below);
    let control = decay_rate_fit_position(gaussian, 2.0, 3, &ns)
        .map(|f| f.distances_sq.iter().map(|row| row.1).fold(f64::INFINITY, f64::min));
    r.record("moment-carrying control at s=2 stays away from 0", control, 1e-3, Bound::Above);
}

fn highrank(r: &mut Recorder) {
    let spec = r.grid;
    let run = || -> Result<(f64, f64), Error> {
        let p = ProblemParams::new(3, 3.0, 1.0)?;
        let g = make_grid(spec, 3)?;
        let fa = RadialFunction::from_real_fn(
            &g,
            |q| (q * q - 1.0) / (1.0 + q * q).powi(4),
            vec![TailTerm::new(1.0, 6.0), TailTerm::new(-5.0, 8.0), TailTerm::new(14.0, 10.0)],
        )?;
        let fb = RadialFunction::from_real_fn(
            &g,
            |q| q * q * (q * q - 5.0 / 3.0) / (1.0 + q * q).powi(5),
            vec![TailTerm::new(1.0, 6.0), TailTerm::new(-20.0 / 3.0, 8.0), TailTerm::new(70.0 / 3.0, 10.0)],
        )?;
        let basis = kernel_basis(&p, Flavor::Homogeneous)?;
        let split = Arc::new(TSplit::new(basis, &[0, 1], &[2, 3])?);
        let t = DMatrix::from_row_slice(2, 2, &[c(0.8), Complex64::new(0.3, -0.6), Complex64::new(0.3, 0.6), c(-1.1)]);
        let u = |a: f64, b: f64| DVector::from_column_slice(&[Complex64::new(a, b), Complex64::new(b, -a)]);
        let e1 = make_t_element(fa.clone(), u(0.4, 0.9), u(-0.2, 0.5), t.clone(), split.clone())?;
        let e2 = make_t_element(fb.clone(), u(-0.7, 0.1), u(0.6, 0.3), t.clone(), split.clone())?;
        let hermitian = symmetry_residual(&e1, &e2)?;
        let mut bad = t;
        bad[(0, 1)] += c(1.0);
        let unit = |i: usize| DVector::from_fn(2, |j, _| c(if i == j { 1.0 } else { 0.0 }));
        let zero = DVector::zeros(2);
        let b1 = make_t_element(fa, unit(0), zero.clone(), bad.clone(), split.clone())?;
        let b2 = make_t_element(fb, unit(1), zero, bad, split)?;
        Ok((hermitian, symmetry_residual(&b1, &b2)?))
    };
    match run() {
        Ok((h, n)) => {
            r.record("hermitian T: symmetry residual", Ok(h), 1e-9, Bound::Below);
            r.record("non-hermitian T: symmetry residual", Ok(n), 1e-3, Bound::Above);
        }
        Err(e) => r.record("high-rank symmetry", Err(e), 1e-9, Bound::Below),
    }
}

pub fn run_suites(suite: Suite, tol_scale: f64, grid: GridSpec) -> Vec<Check> {
    let suites: Vec<Suite> = if suite == Suite::All { Suite::EACH.to_vec() } else { vec![suite] };
    let mut checks = Vec::new();
    for s in suites {
        let mut rec = Recorder { suite: s.name(), scale: tol_scale, grid, checks: Vec::new() };
        match s {
            Suite::Kernels => kernels(&mut rec),
            Suite::Krein => krein(&mut rec),
            Suite::Spectral => spectral(&mut rec),
            Suite::Closure => closure(&mut rec),
            Suite::Highrank => highrank(&mut rec),
            Suite::All => unreachable!("expanded above"),
        }
        checks.extend(rec.checks);
    }
    checks
}

/// JSON report and whether every check passed.
pub fn run(suite: Suite, tol_scale: f64, grid: GridSpec) -> Result<(String, bool), Failure> {
    if !(tol_scale > 0.0 && tol_scale.is_finite()) {
        return Err(Failure::input(format!("--tol-scale must be positive, got {tol_scale}")));
    }
    let checks = run_suites(suite, tol_scale, grid);
    let all = checks.iter().all(|c| c.pass);
    let passed = checks.iter().filter(|c| c.pass).count();
    let params = json!({ "suite": suite.name(), "tol_scale": tol_scale, "grid": grid, "passed": passed, "total": checks.len() });
    Ok((to_json_string(&Envelope::new("verify", params, json!(checks)))?, all))
}
