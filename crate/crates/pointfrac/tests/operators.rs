use std::sync::Arc;

use num_complex::Complex64;
use pointfrac::operators::*;
use pointfrac::params::{Extended, ExtensionParam, ProblemParams};
use pointfrac::radial::{inner_product, make_grid, GridSpec, RadialFunction, RadialGrid};
use pointfrac::Error;
use proptest::prelude::*;

fn grid(d: u32) -> Arc<RadialGrid> {
    make_grid(GridSpec::default(), d).unwrap()
}

fn source(g: &Arc<RadialGrid>, width: f64, phase: f64) -> RadialFunction {
    RadialFunction::from_fn(g, |r| Complex64::from_polar((-width * r * r).exp() * (1.0 + r), phase * r), vec![]).unwrap()
}

fn rel(a: &RadialFunction, b: &RadialFunction) -> f64 {
    let num = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    num / b.max_abs()
}

/// (family, d, s) triples with a rank-one deficiency space.
fn setting() -> impl Strategy<Value = (Family, u32, f64)> {
    prop_oneof![
        Just((Family::ClassicH, 3, 2.0)),
        (1.6f64..2.4).prop_map(|s| (Family::HomogeneousK, 3, s)),
        (1.05f64..1.45).prop_map(|s| (Family::HomogeneousK, 1, s)),
        (0.6f64..0.95).prop_map(|s| (Family::HomogeneousK, 1, s)),
        (1.6f64..2.4).prop_map(|s| (Family::InhomogeneousD, 3, s)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn resolvent_inverts_operator((family, d, s) in setting(), lambda in 0.3f64..5.0, tau in 0.2f64..5.0, width in 0.2f64..3.0) {
        let g = grid(d);
        let p = ProblemParams::new(d, s, lambda).unwrap();
        let ext = ExtensionParam::TauAt { lambda, tau: Extended::Finite(tau) };
        let h = source(&g, width, 0.3);
        let e = apply_resolvent(&h, &p, &ext, family).unwrap();
        prop_assert!(e.boundary_residual().unwrap() < 1e-10);
        prop_assert!(rel(&apply_operator(&e), &h) < 1e-10);
    }

    #[test]
    fn resolvent_is_symmetric((family, d, s) in setting(), lambda in 0.3f64..5.0, tau in 0.2f64..5.0) {
        let g = grid(d);
        let p = ProblemParams::new(d, s, lambda).unwrap();
        let ext = ExtensionParam::TauAt { lambda, tau: Extended::Finite(tau) };
        let h1 = source(&g, 0.5, 0.2);
        let h2 = source(&g, 1.7, -0.6);
        let r1 = resolvent_profile(&h1, &p, &ext, family).unwrap();
        let r2 = resolvent_profile(&h2, &p, &ext, family).unwrap();
        let a = inner_product(&h1, &r2).unwrap();
        let b = inner_product(&r1, &h2).unwrap();
        prop_assert!((a - b).norm() <= 1e-10 * a.norm(), "{a} vs {b}");
    }

    #[test]
    fn resolvent_identity_at_fixed_alpha(s in 1.6f64..2.4, alpha in -0.05f64..1.0, l1 in 0.5f64..4.0, l2 in 0.5f64..4.0) {
        // R(λ1) − R(λ2) = (λ2 − λ1) R(λ1) R(λ2) for one λ-free extension
        let g = grid(3);
        let ext = ExtensionParam::Alpha { alpha: Extended::Finite(alpha) };
        let p1 = ProblemParams::new(3, s, l1).unwrap();
        let p2 = p1.with_lambda(l2).unwrap();
        let h = source(&g, 1.0, 0.0);
        let r1 = resolvent_profile(&h, &p1, &ext, Family::HomogeneousK);
        let r2 = resolvent_profile(&h, &p2, &ext, Family::HomogeneousK);
        let (r1, r2) = match (r1, r2) {
            (Ok(a), Ok(b)) => (a, b),
            // a bound state sits at one of the shifts
            (Err(Error::PoleAtLambda { .. }), _) | (_, Err(Error::PoleAtLambda { .. })) => return Ok(()),
            (a, b) => panic!("{a:?} {b:?}"),
        };
        let r12 = resolvent_profile(&r2, &p1, &ext, Family::HomogeneousK).unwrap();
        let lhs = r1.sub(&r2).unwrap();
        let rhs = r12.scale(Complex64::new(l2 - l1, 0.0));
        let scale = r1.max_abs();
        let gap = lhs.values.iter().zip(&rhs.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        prop_assert!(gap <= 1e-8 * scale, "{gap}");
    }
}

#[test]
fn infinite_alpha_is_unperturbed() {
    let g = grid(3);
    let p = ProblemParams::new(3, 1.8, 1.3).unwrap();
    let h = source(&g, 1.0, 0.0);
    let e = apply_resolvent(&h, &p, &ExtensionParam::Alpha { alpha: Extended::Infinity }, Family::HomogeneousK).unwrap();
    assert_eq!(e.kappa, Complex64::new(0.0, 0.0));
    assert!(rel(&e.profile().unwrap(), &unperturbed_resolvent(&h, &p, Family::HomogeneousK)) < 1e-15);
}

#[test]
fn friedrichs_resolvent_is_unperturbed() {
    let p = ProblemParams::new(3, 1.8, 1.0).unwrap();
    let ext = ExtensionParam::TauAt { lambda: 1.0, tau: Extended::Infinity };
    assert!(is_friedrichs(&p, &ext));
    let h = source(&grid(3), 1.0, 0.0);
    let e = apply_resolvent(&h, &p, &ext, Family::HomogeneousK).unwrap();
    assert_eq!(e.kappa, Complex64::new(0.0, 0.0));
    assert!(matches!(boundary_coefficient(&p, &ext, Family::HomogeneousK), Err(Error::FriedrichsExtension)));
}

#[test]
fn family_names_parse() {
    assert_eq!("classic-h".parse::<Family>().unwrap(), Family::ClassicH);
    assert_eq!("Homogeneous_K".parse::<Family>().unwrap(), Family::HomogeneousK);
    assert_eq!("d".parse::<Family>().unwrap(), Family::InhomogeneousD);
    assert!("x".parse::<Family>().is_err());
}
