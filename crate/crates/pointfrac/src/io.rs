//! File formats: radial profiles as CSV (r, re, im) with a JSON sidecar, and the
//! `{meta, data}` JSON envelope. Floats are written as C-style `%.12e`.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::operators::{Coefficient, DomainElement, Family};
use crate::params::{ExtensionParam, ProblemParams};
use crate::radial::{make_grid, GridSpec, RadialFunction, TailTerm};

pub const FORMAT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// `%.12e`: twelve fraction digits, signed two-digit-minimum exponent.
pub fn fmt_sci(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Serialization(format!("{}: {e}", path.display()))
}

/// Grid and tail needed to rebuild a profile from its CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSidecar {
    pub version: String,
    pub d: u32,
    pub grid: GridSpec,
    pub tail: Vec<TailTerm>,
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn profile_csv(f: &RadialFunction) -> String {
    let mut out = String::from("r,re,im\n");
    for (r, v) in f.grid.nodes.iter().zip(&f.values) {
        out.push_str(&format!("{},{},{}\n", fmt_sci(*r), fmt_sci(v.re), fmt_sci(v.im)));
    }
    out
}

/// Writes `path` and its sidecar.
pub fn write_profile(f: &RadialFunction, path: &Path) -> Result<()> {
    std::fs::write(path, profile_csv(f)).map_err(|e| io_err(path, e))?;
    let side = ProfileSidecar { version: FORMAT_VERSION.into(), d: f.dimension(), grid: f.grid.spec, tail: f.tail.clone() };
    let side_path = sidecar_path(path);
    std::fs::write(&side_path, to_json_string(&side)?).map_err(|e| io_err(&side_path, e))
}

/// Reads a profile. Without a sidecar the grid is inferred from the r column
/// (first, last, count) and must reproduce it; the tail is then empty.
pub fn read_profile(path: &Path, d: u32) -> Result<RadialFunction> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let headers = reader.headers().map_err(|e| io_err(path, e))?.clone();
    if headers.len() < 2 || &headers[0] != "r" {
        return Err(io_err(path, "expected a header starting with r,re[,im]"));
    }
    let mut rs = Vec::new();
    let mut values = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| io_err(path, e))?;
        let num = |i: usize| -> Result<f64> {
            match row.get(i) {
                Some(t) => t.trim().parse::<f64>().map_err(|e| io_err(path, format!("line {:?}: {e}", row.position().map(|p| p.line())))),
                None => Ok(0.0),
            }
        };
        rs.push(num(0)?);
        values.push(Complex64::new(num(1)?, num(2)?));
    }
    let side_path = sidecar_path(path);
    let (spec, tail) = if side_path.exists() {
        let text = std::fs::read_to_string(&side_path).map_err(|e| io_err(&side_path, e))?;
        let side: ProfileSidecar = serde_json::from_str(&text).map_err(|e| io_err(&side_path, e))?;
        if side.d != d {
            return Err(Error::GridMismatch);
        }
        (side.grid, side.tail)
    } else {
        let (Some(&lo), Some(&hi)) = (rs.first(), rs.last()) else {
            return Err(io_err(path, "no data rows"));
        };
        (GridSpec { r_min: lo, r_max: hi, count: rs.len() }, Vec::new())
    };
    let grid = make_grid(spec, d)?;
    if grid.len() != rs.len() || grid.nodes.iter().zip(&rs).any(|(a, b)| (a - b).abs() > 1e-9 * a) {
        return Err(Error::GridMismatch);
    }
    RadialFunction::from_values(&grid, values, tail)
}

/// `{meta: {version, command, params}, data}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Envelope {
    pub meta: Meta,
    pub data: Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Meta {
    pub version: String,
    pub command: String,
    pub params: Value,
}

impl Envelope {
    pub fn new(command: &str, params: Value, data: Value) -> Self {
        Envelope { meta: Meta { version: FORMAT_VERSION.into(), command: command.into(), params }, data }
    }
}

pub fn to_json_string<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Serialization(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Serializable summary of a domain element; the regular part lives in a profile CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainElementRecord {
    pub family: Family,
    pub params: ProblemParams,
    pub ext: ExtensionParam,
    pub kappa: [f64; 2],
    pub coefficient: Coefficient,
    pub grid: GridSpec,
    pub boundary_residual: f64,
    pub regular_profile: Option<String>,
}

impl DomainElementRecord {
    pub fn from_element(e: &DomainElement, regular_profile: Option<String>) -> Result<Self> {
        Ok(DomainElementRecord {
            family: e.family,
            params: e.params,
            ext: e.ext.clone(),
            kappa: [e.kappa.re, e.kappa.im],
            coefficient: e.coefficient,
            grid: e.regular.grid.spec,
            boundary_residual: e.boundary_residual()?,
            regular_profile,
        })
    }

    /// Rebuilds the element from a regular part read back from disk.
    pub fn into_element(self, regular: RadialFunction) -> Result<DomainElement> {
        if regular.grid.spec != self.grid {
            return Err(Error::GridMismatch);
        }
        DomainElement::from_parts(regular, Complex64::new(self.kappa[0], self.kappa[1]), &self.params, &self.ext, self.family)
    }
}
