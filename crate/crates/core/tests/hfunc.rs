use hmass::hfunc::{even_extension, infinite_slope_check, small_mass_bound, verify_assumptions, HKind, HSpec, HalfLine};
use proptest::prelude::*;

fn builtins() -> Vec<HSpec> {
    vec![
        HSpec::abs(),
        HSpec::power(0.5).unwrap(),
        HSpec::power(0.9).unwrap(),
        HSpec::affine_indicator(2.0).unwrap(),
        HSpec::indicator(),
    ]
}

proptest! {
    #[test]
    fn builtins_are_subadditive_and_even(a in -50.0f64..50.0, b in -50.0f64..50.0) {
        for h in builtins() {
            prop_assert!(h.eval(a + b) <= h.eval(a) + h.eval(b) + 1e-12);
            prop_assert_eq!(h.eval(a), h.eval(-a));
            prop_assert!(h.eval(a) >= 0.0);
        }
    }

    #[test]
    fn builtins_are_monotone(a in 0.0f64..50.0, d in 0.0f64..10.0) {
        for h in builtins() {
            prop_assert!(h.eval(a) <= h.eval(a + d) + 1e-12);
        }
    }

    #[test]
    fn json_round_trip(alpha in 0.01f64..1.0, beta in 0.0f64..5.0, t in -10.0f64..10.0) {
        for h in [HSpec::power(alpha).unwrap(), HSpec::affine_indicator(beta).unwrap()] {
            let back = HSpec::from_json(&h.to_json()).unwrap();
            prop_assert_eq!(back.eval(t), h.eval(t));
        }
    }
}

#[test]
fn builtins_pass_the_verifier() {
    let grid: Vec<f64> = (0..=80).map(|k| k as f64 * 0.1).collect();
    for h in builtins() {
        let rep = verify_assumptions(&h, &grid);
        assert!(rep.all_passed(), "{}", h.to_json());
        assert!(rep.h1.by_construction);
    }
}

#[test]
fn square_fails_with_smallest_witness() {
    let grid = vec![0.0, 1.0, 2.0];
    let sq = HSpec::tabulated(grid.clone(), vec![0.0, 1.0, 4.0], true).unwrap();
    let rep = verify_assumptions(&sq, &grid);
    assert!(!rep.h2.passed);
    assert_eq!(rep.h2.witness, Some([1.0, 1.0, 2.0]));
}

#[test]
fn tabulated_jump_takes_smaller_side() {
    let h = HSpec::tabulated(vec![0.0, 1.0, 1.0, 2.0], vec![0.0, 1.0, 0.5, 1.5], true).unwrap();
    assert_eq!(h.eval(1.0), 0.5);
    assert!((h.eval(0.5) - 0.5).abs() < 1e-15);
    assert_eq!(h.eval(-1.5), h.eval(1.5));
}

#[test]
fn raised_point_violating_lsc_is_reported() {
    let h = HSpec::new(HKind::Tabulated {
        grid: vec![0.0, 1.0, 2.0],
        values: vec![0.0, 1.0, 2.0],
        even: true,
        point_values: vec![(1.0, 3.0)],
    })
    .unwrap();
    let rep = verify_assumptions(&h, &[0.0, 0.5, 1.0, 1.5, 2.0]);
    assert!(!rep.h3.passed);
}

#[test]
fn nonzero_at_origin_is_rejected() {
    let r = even_extension(&HalfLine::Tabulated { grid: vec![0.0, 1.0], values: vec![0.5, 1.0] });
    assert!(r.is_err());
}

#[test]
fn even_extension_of_root() {
    let h = even_extension(&HalfLine::Power(0.5)).unwrap();
    assert_eq!(h.eval(-4.0), 2.0);
    assert_eq!(h.eval(0.0), 0.0);
}

#[test]
fn slope_check() {
    assert!(infinite_slope_check(&HSpec::power(0.5).unwrap(), 1.0).unwrap().holds);
    assert!(infinite_slope_check(&HSpec::indicator(), 1.0).unwrap().holds);
    assert!(!infinite_slope_check(&HSpec::abs(), 1.0).unwrap().holds);
}

#[test]
fn small_mass_closed_forms() {
    for theta in [1e-3, 0.5, 2.0, 100.0] {
        let p = small_mass_bound(&HSpec::power(0.5).unwrap(), theta).unwrap();
        assert!((p.value - theta.sqrt()).abs() < 1e-9 && p.exact);
        let a = small_mass_bound(&HSpec::affine_indicator(2.0).unwrap(), theta).unwrap();
        assert!((a.value - theta / (1.0 + 2.0 * theta)).abs() < 1e-9);
        let i = small_mass_bound(&HSpec::indicator(), theta).unwrap();
        assert!((i.value - theta).abs() < 1e-9);
    }
}
