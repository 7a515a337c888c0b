mod common;

use std::f64::consts::PI;

use hmass::functionals::phi_h;
use hmass::hfunc::HSpec;
use hmass::quadrature::QuadPlan;
use hmass::rectifiable::{poly_approximate, select_balls, tangent_disc, RectifiableCurrent, RectifiablePatch};
use hmass::Error;

fn current(p: RectifiablePatch) -> RectifiableCurrent {
    RectifiableCurrent::single(p)
}

#[test]
fn quarter_circle_masses() {
    let plan = QuadPlan::default();
    for theta in [1.0, 4.0] {
        let r = current(RectifiablePatch::quarter_circle(theta).unwrap());
        assert!((r.mass(&plan).unwrap().value - theta * PI / 2.0).abs() < 1e-10);
        let h = HSpec::power(0.5).unwrap();
        assert!((r.h_mass(&h, &plan).unwrap().value - theta.sqrt() * PI / 2.0).abs() < 1e-10);
    }
}

#[test]
fn parabola_arc_length() {
    // int_{-1/2}^{1/2} sqrt(1 + 4z^2) dz
    let want = 2f64.sqrt() / 2.0 + 1f64.asinh() / 2.0;
    let r = current(RectifiablePatch::parabola(0.5, 1.0).unwrap());
    assert!((r.mass(&QuadPlan::default()).unwrap().value - want).abs() < 1e-10);
    let f = RectifiableCurrent::from_file(&common::data("parabola.json")).unwrap();
    assert!((f.mass(&QuadPlan::default()).unwrap().value - want).abs() < 1e-10);
}

#[test]
fn jump_segment_h_mass() {
    let r = RectifiableCurrent::from_file(&common::data("jump_segment.json")).unwrap();
    let plan = QuadPlan::default();
    assert!((r.h_mass(&HSpec::abs(), &plan).unwrap().value - 1.5).abs() < 1e-12);
    let h = HSpec::affine_indicator(1.0).unwrap();
    assert!((r.h_mass(&h, &plan).unwrap().value - (0.5 * 2.0 + 0.5 * 3.0)).abs() < 1e-12);
}

#[test]
fn flat_square_triangulates_exactly() {
    let r = RectifiableCurrent::from_file(&common::data("flat_square.json")).unwrap();
    let h = HSpec::power(0.5).unwrap();
    let (p, cert) = poly_approximate(&r, 1e-3, &h).unwrap();
    assert_eq!(cert.flat_upper, 0.0);
    let hm = r.h_mass(&h, &QuadPlan::default()).unwrap().value;
    assert!((phi_h(&p, &h).unwrap() - hm).abs() < 1e-12);
}

#[test]
fn json_round_trip() {
    let r = RectifiableCurrent::from_file(&common::data("quarter_circle_theta4.json")).unwrap();
    let back = RectifiableCurrent::from_json(&r.to_json(), None).unwrap();
    let plan = QuadPlan::default();
    assert_eq!(back.mass(&plan).unwrap().value, r.mass(&plan).unwrap().value);
    assert_eq!(back.theta_at(&[0.0, 1.0]).unwrap(), 4.0);
}

#[test]
fn off_current_points_are_rejected() {
    let r = current(RectifiablePatch::quarter_circle(1.0).unwrap());
    assert!(matches!(r.owner(&[0.0, 0.5]), Err(Error::NotOnCurrent(_))));
    assert!(r.owner(&[0.6f64, 0.8]).is_ok());
}

#[test]
fn invalid_lipschitz_is_rejected() {
    let text = std::fs::read_to_string(common::data("parabola.json")).unwrap().replace("\"lipschitz\": 1.0", "\"lipschitz\": 0.2");
    assert!(text.contains("0.2"));
    assert!(matches!(RectifiableCurrent::from_json(&text, None), Err(Error::InvalidInput(_))));
}

#[test]
fn tangent_disc_is_tangent() {
    let r = current(RectifiablePatch::quarter_circle(3.0).unwrap());
    let s = 0.5f64.sqrt();
    let d = tangent_disc(&r, &[s, s], 0.1).unwrap();
    assert!((d.mass() - 3.0 * 0.2).abs() < 1e-12);
    let seg = d.triangulate(0).unwrap();
    let t = &seg.terms()[0].simplex;
    let dir: Vec<f64> = (0..2).map(|a| t.vertices()[1].0[a] - t.vertices()[0].0[a]).collect();
    // tangent to the circle at (s, s) is orthogonal to the radius
    assert!((dir[0] * s + dir[1] * s).abs() < 1e-12);
}

#[test]
fn selected_balls_are_disjoint_and_small() {
    let r = current(RectifiablePatch::parabola(0.5, 2.0).unwrap());
    let eps = 0.05;
    let sel = select_balls(&r, eps, None).unwrap();
    assert!(!sel.balls.is_empty());
    for (i, a) in sel.balls.iter().enumerate() {
        assert!(a.radius <= eps);
        for b in &sel.balls[i + 1..] {
            let d = ((a.center[0] - b.center[0]).powi(2) + (a.center[1] - b.center[1]).powi(2)).sqrt();
            assert!(d >= a.radius + b.radius - 1e-12);
        }
    }
    assert!(sel.coverage() > 0.0 && sel.coverage() <= 1.0 + 1e-12);
}

#[test]
fn approximation_certificate_against_closed_forms() {
    let r = current(RectifiablePatch::quarter_circle(4.0).unwrap());
    let h = HSpec::power(0.5).unwrap();
    let eps = 0.01;
    let (p, cert) = poly_approximate(&r, eps, &h).unwrap();
    assert!(cert.holds());
    assert!(p.mass().unwrap() <= 4.0 * PI / 2.0 + eps);
    assert!(phi_h(&p, &h).unwrap() <= 2.0 * PI / 2.0 + eps);
}

#[test]
fn tiny_eps_exhausts_the_budget() {
    let r = current(RectifiablePatch::quarter_circle(1.0).unwrap());
    let e = poly_approximate(&r, 1e-12, &HSpec::abs()).unwrap_err();
    assert_eq!(e.exit_code(), 4);
}
