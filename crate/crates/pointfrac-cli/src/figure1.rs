//! The negative-eigenvalue curve E_τ of the inhomogeneous family.

use pointfrac::io::{to_json_string, Envelope};
use pointfrac::radial::GridSpec;
use pointfrac::spectral::{figure1_sweep_with, tau_grid, MomentQuadrature, SweepRow};
use serde_json::json;

use crate::output::{cell, text_cell, Failure, Format};

/// Share of rows that must succeed for exit 0.
pub const MIN_SUCCESS: f64 = 0.9;

pub struct Figure1Args {
    pub lambda: f64,
    pub s: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    pub points: usize,
    pub grid: Option<GridSpec>,
}

/// Returns the rendered table and whether enough rows succeeded.
pub fn run(args: &Figure1Args, format: Format) -> Result<(String, bool), Failure> {
    if !(args.lambda > 0.0 && args.lambda.is_finite()) {
        return Err(Failure::input(format!("lambda must be positive, got {}", args.lambda)));
    }
    let taus = tau_grid(args.tau_min, args.tau_max, args.points)?;
    let quad = args.grid.map(MomentQuadrature::Grid).unwrap_or_default();
    let rows = figure1_sweep_with(args.lambda, args.s, &taus, quad);
    let ok = rows.iter().filter(|r| r.e_tau.is_some()).count() as f64 >= MIN_SUCCESS * rows.len() as f64;
    let text = match format {
        Format::Csv => csv(&rows),
        Format::Json => {
            let params = json!({
                "lambda": args.lambda,
                "s": args.s,
                "tau_min": args.tau_min,
                "tau_max": args.tau_max,
                "points": args.points,
                "quadrature": quad,
            });
            let data: Vec<_> = rows
                .iter()
                .map(|r| json!({ "tau": r.tau, "E_tau": r.e_tau, "reference_tau": r.tau, "error": r.error }))
                .collect();
            to_json_string(&Envelope::new("figure1", params, json!(data)))?
        }
    };
    Ok((text, ok))
}

/// Header "tau,E_tau,reference_tau,error"; the reference column is the line E = τ.
fn csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("tau,E_tau,reference_tau,error\n");
    for r in rows {
        let err = r.error.as_deref().map(text_cell).unwrap_or_default();
        out.push_str(&format!("{},{},{},{}\n", cell(Some(r.tau)), cell(r.e_tau), cell(Some(r.tau)), err));
    }
    out
}
