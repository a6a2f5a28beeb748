use num_complex::Complex64;
use pointfrac::io::*;
use pointfrac::operators::{apply_resolvent, Family};
use pointfrac::params::{Extended, ExtensionParam, ProblemParams};
use pointfrac::radial::{make_grid, GridSpec, RadialFunction, TailTerm};
use pointfrac::Error;
use proptest::prelude::*;

#[test]
fn sci_format_matches_c() {
    assert_eq!(fmt_sci(1.234567890123), "1.234567890123e+00");
    assert_eq!(fmt_sci(-0.00123), "-1.230000000000e-03");
    assert_eq!(fmt_sci(0.0), "0.000000000000e+00");
    assert_eq!(fmt_sci(6.02e23), "6.020000000000e+23");
    assert_eq!(fmt_sci(1e-300), "1.000000000000e-300");
    assert_eq!(fmt_sci(f64::NAN), "nan");
}

proptest! {
    #[test]
    fn sci_round_trip_is_twelve_digits(x in -1e200f64..1e200) {
        let back: f64 = fmt_sci(x).parse().unwrap();
        prop_assert!((back - x).abs() <= 5e-13 * x.abs());
    }
}

fn sample() -> RadialFunction {
    let grid = make_grid(GridSpec { r_min: 1e-3, r_max: 1e3, count: 64 }, 3).unwrap();
    RadialFunction::from_fn(&grid, |r| Complex64::new((-r).exp(), 0.25 / (1.0 + r * r)), vec![TailTerm { amp: Complex64::new(0.0, 0.25), exp: 2.0 }]).unwrap()
}

#[test]
fn profile_round_trip_with_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.csv");
    let f = sample();
    write_profile(&f, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("r,re,im\n"));
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().count(), 65);
    let g = read_profile(&path, 3).unwrap();
    assert_eq!(g.grid.spec, f.grid.spec);
    assert_eq!(g.tail, f.tail);
    for (a, b) in f.values.iter().zip(&g.values) {
        assert!((a - b).norm() <= 1e-12 * a.norm());
    }
    assert!(matches!(read_profile(&path, 1), Err(Error::GridMismatch)));
}

#[test]
fn profile_without_sidecar_reconstructs_grid() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.csv");
    let f = sample();
    std::fs::write(&path, profile_csv(&f)).unwrap();
    let g = read_profile(&path, 3).unwrap();
    assert_eq!(g.grid.len(), 64);
    assert!(g.tail.is_empty());
    // a non-logarithmic r column cannot come from a grid spec
    let mut lines: Vec<String> = profile_csv(&f).lines().map(String::from).collect();
    lines[10] = format!("{},1,0", fmt_sci(f.grid.nodes[9] * 1.5));
    std::fs::write(&path, lines.join("\n") + "\n").unwrap();
    assert!(matches!(read_profile(&path, 3), Err(Error::GridMismatch)));
}

#[test]
fn writing_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    write_profile(&sample(), &a).unwrap();
    write_profile(&sample(), &b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(std::fs::read(sidecar_path(&a)).unwrap(), std::fs::read(sidecar_path(&b)).unwrap());
}

#[test]
fn domain_element_record_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let grid = make_grid(GridSpec::default(), 3).unwrap();
    let h = RadialFunction::from_real_fn(&grid, |r| (-0.7 * r * r).exp(), vec![]).unwrap();
    let p = ProblemParams::new(3, 1.8, 1.0).unwrap();
    let ext = ExtensionParam::Alpha { alpha: Extended::Finite(0.4) };
    let e = apply_resolvent(&h, &p, &ext, Family::HomogeneousK).unwrap();
    let path = dir.path().join("regular.csv");
    write_profile(&e.regular, &path).unwrap();
    let rec = DomainElementRecord::from_element(&e, Some("regular.csv".into())).unwrap();
    let json = to_json_string(&rec).unwrap();
    let back: DomainElementRecord = serde_json::from_str(&json).unwrap();
    assert_eq!(back, rec);
    let rebuilt = back.into_element(read_profile(&path, 3).unwrap()).unwrap();
    assert!((rebuilt.kappa - e.kappa).norm() <= 1e-12 * e.kappa.norm());
}

#[test]
fn envelope_shape() {
    let env = Envelope::new("constants", serde_json::json!({"d": 3}), serde_json::json!([1, 2]));
    let v: serde_json::Value = serde_json::from_str(&to_json_string(&env).unwrap()).unwrap();
    assert_eq!(v["meta"]["command"], "constants");
    assert_eq!(v["meta"]["params"]["d"], 3);
    assert!(v["meta"]["version"].is_string());
    assert!(v["data"].is_array());
}
