//! Resolvent of a rank-one extension applied to a profile read from disk.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use pointfrac::io::{fmt_sci, read_profile, to_json_string, write_profile, DomainElementRecord};
use pointfrac::operators::{apply_operator, apply_resolvent, DomainElement, Family};
use pointfrac::params::{Extended, ExtensionParam, ProblemParams};
use pointfrac::radial::RadialFunction;

use crate::output::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Param {
    Alpha,
    Tau,
}

pub struct ResolventArgs {
    pub family: Family,
    pub d: u32,
    pub s: f64,
    pub lambda: f64,
    pub param: Param,
    pub alpha: Option<String>,
    pub tau: Option<String>,
    pub tau_lambda: Option<f64>,
    pub input: PathBuf,
    pub out: PathBuf,
    pub verify: bool,
    pub verify_tol: f64,
}

fn parse_extended(flag: &str, text: &str) -> Result<Extended, Failure> {
    text.parse().map_err(|_| Failure::input(format!("--{flag}: expected a real number or 'inf', got {text:?}")))
}

/// Exactly one parametrization, and the one named by `--param`.
pub fn extension(args: &ResolventArgs) -> Result<ExtensionParam, Failure> {
    match (args.param, &args.alpha, &args.tau) {
        (_, Some(_), Some(_)) => Err(Failure::input("--alpha and --tau are mutually exclusive")),
        (Param::Alpha, Some(a), None) => {
            if args.tau_lambda.is_some() {
                return Err(Failure::input("--tau-lambda belongs to --param tau"));
            }
            Ok(ExtensionParam::Alpha { alpha: parse_extended("alpha", a)? })
        }
        (Param::Tau, None, Some(t)) => {
            Ok(ExtensionParam::TauAt { lambda: args.tau_lambda.unwrap_or(args.lambda), tau: parse_extended("tau", t)? })
        }
        (Param::Alpha, None, _) => Err(Failure::input("--param alpha needs --alpha")),
        (Param::Tau, _, None) => Err(Failure::input("--param tau needs --tau")),
    }
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}{suffix}"))
}

/// Splits an in-memory resolvent profile back into F + κ·kernel and applies the operator;
/// returns the grid-relative distance to `h`. Needs full precision: at large p the split cancels.
pub fn inverse_pair_residual(
    full: &RadialFunction,
    h: &RadialFunction,
    p: &ProblemParams,
    ext: &ExtensionParam,
    family: Family,
) -> Result<f64, Failure> {
    let kernel = family.kernel(p)?.profile(&full.grid)?;
    let last = full.grid.len() - 1;
    // the slowest tail term belongs to the kernel alone; its amplitude is stored exactly
    let leading = kernel.tail.iter().min_by(|a, b| a.exp.total_cmp(&b.exp));
    let from_tail = leading.and_then(|k| full.tail.iter().find(|t| (t.exp - k.exp).abs() < 1e-12).map(|t| t.amp / k.amp));
    let kappa = from_tail.unwrap_or(full.values[last] / kernel.values[last]);
    let regular = full.combine(Complex64::new(1.0, 0.0), &kernel, -kappa)?;
    let e = DomainElement::from_parts(regular, kappa, p, ext, family)?;
    Ok(grid_relative(&apply_operator(&e), h))
}

/// max |a − b| / max |b| over the grid.
pub fn grid_relative(a: &RadialFunction, b: &RadialFunction) -> f64 {
    let num = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    num / b.max_abs().max(f64::MIN_POSITIVE)
}

/// Writes `out` (full profile), `<stem>.regular.csv` and `<stem>.element.json`; returns stdout text.
pub fn run(args: &ResolventArgs) -> Result<String, Failure> {
    let ext = extension(args)?;
    let p = ProblemParams::new(args.d, args.s, args.lambda)?;
    let h = read_profile(&args.input, args.d)?;
    let element = apply_resolvent(&h, &p, &ext, args.family)?;
    let full = element.profile()?;
    write_profile(&full, &args.out)?;
    let regular_path = sibling(&args.out, ".regular.csv");
    write_profile(&element.regular, &regular_path)?;
    let regular_name = regular_path.file_name().map(|n| n.to_string_lossy().into_owned());
    let record = DomainElementRecord::from_element(&element, regular_name)?;
    let record_path = sibling(&args.out, ".element.json");
    std::fs::write(&record_path, to_json_string(&record)?).map_err(|e| Failure::input(format!("{}: {e}", record_path.display())))?;

    let c = element.coefficient.finite().unwrap_or(f64::INFINITY);
    let mut text = format!("krein_scalar {}\nkappa {} {}\n", fmt_sci(c), fmt_sci(element.kappa.re), fmt_sci(element.kappa.im));
    if args.verify {
        // rebuild from what was written, not from the in-memory copy
        let text_rec = std::fs::read_to_string(&record_path).map_err(|e| Failure::input(format!("{}: {e}", record_path.display())))?;
        let back: DomainElementRecord = serde_json::from_str(&text_rec).map_err(|e| Failure::input(e.to_string()))?;
        let rebuilt = back.into_element(read_profile(&regular_path, args.d)?)?;
        let residual = grid_relative(&apply_operator(&rebuilt), &h);
        let profile_gap = grid_relative(&read_profile(&args.out, args.d)?, &rebuilt.profile()?);
        text.push_str(&format!("inverse_pair_residual {}\nprofile_file_gap {}\n", fmt_sci(residual), fmt_sci(profile_gap)));
        if !(residual < args.verify_tol && profile_gap < args.verify_tol) {
            print!("{text}");
            return Err(Failure::verify(format!("round trip above {}", fmt_sci(args.verify_tol))));
        }
    }
    Ok(text)
}
