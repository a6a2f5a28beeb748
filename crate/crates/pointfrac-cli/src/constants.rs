//! Closed-form constants next to independent quadrature values.

use std::f64::consts::PI;

use pointfrac::io::{to_json_string, Envelope};
use pointfrac::kernels::{kernel_at_zero, kernel_l2_norm_sq, singularity_constant, GreenKernel};
use pointfrac::params::{classify_regime, deficiency_index, multi_indices, omega_theta_flag, theta, ProblemParams};
use pointfrac::quad::{integrate, Tolerance};
use pointfrac::radial::{radial_transform, sphere_area};
use pointfrac::Error;
use serde::Serialize;
use serde_json::json;

use crate::output::{cell, Failure, Format};

#[derive(Debug, Clone, Serialize)]
pub struct ConstantRow {
    pub name: &'static str,
    pub value: f64,
    pub oracle: Option<f64>,
    pub rel_deviation: Option<f64>,
}

fn row(name: &'static str, value: f64, oracle: Option<f64>) -> ConstantRow {
    let rel_deviation = oracle.map(|o| if value == o { 0.0 } else { (value - o).abs() / o.abs().max(value.abs()) });
    ConstantRow { name, value, oracle, rel_deviation }
}

/// ∫_0^∞ g for g ~ r^{-q} (q > 1): adaptive on [0, split], then r = split·u^{-1/(q-1)} on u ∈ (0, 1],
/// which turns the tail into a bounded integrand.
fn half_line(g: impl Fn(f64) -> f64, q: f64, split: f64) -> Result<f64, Error> {
    let tol = Tolerance { abs: 0.0, rel: 1e-13, max_intervals: 100_000 };
    let head = integrate(&g, 0.0, split, tol)?;
    let m = 1.0 / (q - 1.0);
    let tail = integrate(
        |u| {
            if u <= 0.0 {
                return 0.0;
            }
            let r = split * u.powf(-m);
            g(r) * m * r / u
        },
        0.0,
        1.0,
        tol,
    )?;
    Ok(head + tail)
}

fn skip_domain<T>(r: Result<T, Error>) -> Result<Option<T>, Error> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::DomainError(_)) | Err(Error::UnsupportedDimension(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn constant_rows(d: u32, s: f64, lambda: f64) -> Result<Vec<ConstantRow>, Error> {
    let p = ProblemParams::new(d, s, lambda)?;
    let df = d as f64;
    let omega_d = sphere_area(d);
    let split = lambda.powf(1.0 / s);
    let mut rows = Vec::new();

    let n = classify_regime(d, s)?.n;
    let count = if n == 0 { 0 } else { multi_indices(d, n - 1).len() };
    rows.push(row("deficiency_index", deficiency_index(d, s)? as f64, Some(count as f64)));

    if let Some(lam) = skip_domain(singularity_constant(d, s))? {
        // homogeneous kernel at |x| = 1 with λ = 0
        let oracle = skip_domain(radial_transform(d, 1.0, |r| (2.0 * PI).powf(-df / 2.0) * r.powf(-s), 1.0))?;
        rows.push(row("singularity_constant", lam, oracle));
    }

    if let Some(th) = if d == 1 { skip_domain(theta(s, lambda))? } else { None } {
        let oracle = if s > 1.0 {
            half_line(|r| 1.0 / (r.powf(s) + lambda), s, split)?
        } else {
            // continuation below s = 1: subtract the λ = 0 integrand
            half_line(|r| if r > 0.0 { -lambda / (r.powf(s) * (r.powf(s) + lambda)) } else { 0.0 }, 2.0 * s, split)?
        } / PI;
        rows.push(row("theta", th, Some(oracle)));
        let (omega, flag) = omega_theta_flag(s)?;
        let norm = half_line(|r| (r.powf(s) + lambda).powi(-2), 2.0 * s, split)? / PI;
        rows.push(row("omega", omega, Some(1.0 / (norm * lambda.powf(2.0 - 1.0 / s)))));
        rows.push(row("theta_flag", flag as f64, Some(if s > 1.0 { 1.0 } else { 0.0 })));
    }

    let radial = |power: i32, q: f64| {
        half_line(|r| omega_d * r.powf(df - 1.0) * (r.powf(s) + lambda).powi(-power), q, split).map(|v| v * (2.0 * PI).powf(-df))
    };
    if let Some(k0) = skip_domain(kernel_at_zero(d, s, lambda))? {
        rows.push(row("kernel_at_zero", k0, Some(radial(1, s - df + 1.0)?)));
    }
    if 2.0 * s > df {
        let k = GreenKernel::homogeneous(p)?;
        if let Some(norm) = skip_domain(kernel_l2_norm_sq(&k))? {
            rows.push(row("kernel_l2_norm_sq", norm, Some(radial(2, 2.0 * s - df + 1.0)?)));
        }
    }
    Ok(rows)
}

pub fn render(d: u32, s: f64, lambda: f64, format: Format) -> Result<String, Failure> {
    let rows = constant_rows(d, s, lambda)?;
    Ok(match format {
        Format::Csv => {
            let mut out = String::from("name,value,oracle,rel_deviation\n");
            for r in &rows {
                out.push_str(&format!("{},{},{},{}\n", r.name, cell(Some(r.value)), cell(r.oracle), cell(r.rel_deviation)));
            }
            out
        }
        Format::Json => {
            let env = Envelope::new("constants", json!({ "d": d, "s": s, "lambda": lambda }), json!(rows));
            to_json_string(&env)?
        }
    })
}
