//! Blow-up ratios and disjoint ball families on which a current is close to
//! its tangent discs.

use serde::Serialize;

use super::{tangent_disc, Domain, Graph, RectifiableCurrent, RectifiablePatch};
use crate::error::{Error, Result};
use crate::flat::patch_flat_distance_upper;
use crate::hfunc::HSpec;
use crate::linalg;
use crate::quadrature::QuadPlan;

/// Grid level used for the per-ball flat bound.
pub const BALL_FLAT_LEVEL: u32 = 2;
/// Radii tried at one position: `r_cap * 2^-q` for `q <= MAX_HALVINGS`.
pub const MAX_HALVINGS: u32 = 30;
pub const MAX_BALLS: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
    pub patch: usize,
    pub chart: Vec<f64>,
    pub theta: f64,
    /// Mass of the current inside the ball.
    pub mass: f64,
    /// H-mass inside the ball, when an H was given.
    pub h_mass: Option<f64>,
    pub blowup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallSelection {
    pub balls: Vec<Ball>,
    pub covered_mass: f64,
    pub total_mass: f64,
}

impl BallSelection {
    pub fn coverage(&self) -> f64 {
        if self.total_mass > 0.0 {
            self.covered_mass / self.total_mass
        } else {
            1.0
        }
    }
}

/// Chart interval of `{z : |Phi(z) - x| <= rho}` around `z0`, for a graph
/// patch with m = 1. Relies on `|Phi(z) - Phi(z')| >= |z - z'|`.
pub(crate) fn ball_interval(p: &RectifiablePatch, z0: f64, x: &[f64], rho: f64) -> Result<(f64, f64)> {
    let (a, b) = p.interval().ok_or_else(|| Error::Unsupported("ball interval needs m = 1".into()))?;
    let inside = |t: f64| linalg::dist(&p.point(&[t]), x) <= rho;
    let step = rho / 64.0;
    let mut ends = [0.0; 2];
    for (k, dir) in [-1.0f64, 1.0].into_iter().enumerate() {
        let limit = if dir < 0.0 { a } else { b };
        let mut t = z0;
        ends[k] = loop {
            let mut next = t + dir * step;
            if (next - limit) * dir >= 0.0 {
                next = limit;
            }
            if !inside(next) {
                let (mut lo, mut hi) = (t, next);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if inside(mid) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if (hi - lo).abs() <= 1e-15 * (1.0 + mid.abs()) {
                        break;
                    }
                }
                break lo;
            }
            if next == limit {
                break limit;
            }
            t = next;
        };
    }
    Ok((ends[0], ends[1]))
}

/// `F(R|B(x,rho) - S_{x,rho}) / M(R|B(x,rho))`, with the flat distance
/// replaced by its certified upper bound.
pub fn blowup_ratio(r: &RectifiableCurrent, x: &[f64], rho: f64, level: u32) -> Result<f64> {
    let disc = tangent_disc(r, x, rho)?;
    let (i, z) = r.owner(x)?;
    let p = &r.patches[i];
    match &p.domain {
        Domain::Interval(..) => {
            let (lo, hi) = ball_interval(p, z[0], x, rho)?;
            let restricted = p.restrict_interval(lo, hi)?;
            let num = patch_flat_distance_upper(&restricted, &disc.triangulate(0)?, level)?.value;
            let den = restricted.mass(&QuadPlan::default())?.value;
            Ok(num / den)
        }
        Domain::Polygon(poly) => {
            if !(matches!(p.graph, Graph::Zero) && p.theta.is_const()) {
                return Err(Error::Unsupported("blow-up ratios for m = 2 need a flat patch with constant multiplicity".into()));
            }
            if super::polygon_margin(poly, &[z[0], z[1]]) < rho {
                return Err(Error::Unsupported("ball leaves the patch domain".into()));
            }
            // the restriction is the tangent disc itself
            Ok(0.0)
        }
    }
}

struct Candidate {
    ball: Ball,
}

fn check_ball(
    r: &RectifiableCurrent,
    i: usize,
    z: f64,
    rho: f64,
    eps: f64,
    h: Option<&HSpec>,
) -> Result<Option<Candidate>> {
    let p = &r.patches[i];
    let x = p.point(&[z]);
    let theta = p.theta.at(&[z]);
    let (lo, hi) = ball_interval(p, z, &x, rho)?;
    let restricted = p.restrict_interval(lo, hi)?;
    let plan = QuadPlan::default();
    let mu = restricted.mass(&plan)?.value;
    if (mu - theta * 2.0 * rho).abs() > eps * mu {
        return Ok(None);
    }
    let nu = match h {
        Some(h) => {
            let nu = restricted.h_mass(h, &plan)?.value;
            if h.eval(theta) * 2.0 * rho > (1.0 + eps) * nu {
                return Ok(None);
            }
            Some(nu)
        }
        None => None,
    };
    let blowup = blowup_ratio(r, &x, rho, BALL_FLAT_LEVEL)?;
    if blowup > eps {
        return Ok(None);
    }
    Ok(Some(Candidate {
        ball: Ball { center: x, radius: rho, patch: i, chart: vec![z], theta, mass: mu, h_mass: nu, blowup },
    }))
}

/// Smallest chart coordinate in `[z_prev, b]` whose point is at distance at
/// least `target` from `x_prev`.
fn next_center(p: &RectifiablePatch, z_prev: f64, x_prev: &[f64], target: f64, b: f64) -> Option<f64> {
    let far = |t: f64| linalg::dist(&p.point(&[t]), x_prev) >= target;
    let mut hi = (z_prev + target).min(b);
    if !far(hi) {
        return None;
    }
    let mut lo = z_prev;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if far(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * (1.0 + hi.abs()) {
            break;
        }
    }
    Some(hi)
}

/// Disjoint closed balls with radii at most `eps`, each passing the blow-up,
/// density and (when `h` is given) H-density tests, until they carry at least
/// `(1 - eps)` of the mass.
pub fn select_balls(r: &RectifiableCurrent, eps: f64, h: Option<&HSpec>) -> Result<BallSelection> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput(format!("eps must lie in (0, 1), got {eps}")));
    }
    let plan = QuadPlan::default();
    let total_mass = r.mass(&plan)?.value;
    match r.m() {
        1 => select_curve(r, eps, h, total_mass),
        2 => select_flat(r, eps, total_mass),
        m => Err(Error::Unsupported(format!("ball selection for m = {m}"))),
    }
}

fn select_curve(r: &RectifiableCurrent, eps: f64, h: Option<&HSpec>, total_mass: f64) -> Result<BallSelection> {
    let plan = QuadPlan::default();
    let length: f64 = r.patches.iter().map(|p| p.integrate(|_| 1.0, &plan).map(|q| q.value)).sum::<Result<f64>>()?;
    let target = (1.0 - eps) * total_mass;
    let estimate = length / (2.0 * eps);
    if estimate > MAX_BALLS as f64 {
        return Err(Error::CoverageBudget { achieved: 0.0, target: 1.0 - eps });
    }
    let mut out = BallSelection { balls: Vec::new(), covered_mass: 0.0, total_mass };
    let mut attempts = 0usize;
    let attempt_budget = 20 * MAX_BALLS;
    let sep = 1.0 + 1e-9;

    for (i, p) in r.patches.iter().enumerate() {
        let (a, b) = p.interval().expect("m = 1 patches have interval domains");
        let end = p.point(&[b]);
        let first_ball = out.balls.len();
        let (mut z_prev, mut x_prev, mut r_prev) = (a, p.point(&[a]), 0.0);
        'sweep: loop {
            if out.covered_mass >= target {
                break;
            }
            let mut accepted = None;
            let mut last_fit = None;
            for q in 0..=MAX_HALVINGS {
                let rho = eps * 0.5f64.powi(q as i32);
                let Some(z) = next_center(p, z_prev, &x_prev, (rho + r_prev) * sep, b) else { continue };
                let x = p.point(&[z]);
                if linalg::dist(&x, &end) <= rho * sep {
                    continue;
                }
                if out.balls[..first_ball].iter().any(|o| linalg::dist(&o.center, &x) <= (o.radius + rho) * sep) {
                    last_fit = Some((z, rho));
                    continue;
                }
                last_fit = Some((z, rho));
                attempts += 1;
                if attempts > attempt_budget {
                    return Err(Error::CoverageBudget { achieved: out.coverage(), target: 1.0 - eps });
                }
                if let Some(c) = check_ball(r, i, z, rho, eps, h)? {
                    accepted = Some(c.ball);
                    break;
                }
            }
            match (accepted, last_fit) {
                (Some(ball), _) => {
                    z_prev = ball.chart[0];
                    x_prev = ball.center.clone();
                    r_prev = ball.radius;
                    out.covered_mass += ball.mass;
                    out.balls.push(ball);
                    if out.balls.len() > MAX_BALLS {
                        return Err(Error::CoverageBudget { achieved: out.coverage(), target: 1.0 - eps });
                    }
                }
                (None, Some((z, rho))) => {
                    // nothing fits here: step past the smallest ball tried
                    z_prev = z;
                    x_prev = p.point(&[z]);
                    r_prev = rho;
                }
                (None, None) => break 'sweep,
            }
        }
    }
    if out.covered_mass < target {
        return Err(Error::CoverageBudget { achieved: out.coverage(), target: 1.0 - eps });
    }
    Ok(out)
}

/// Greedy packing of a flat patch with constant multiplicity, level by level
/// over hexagonal candidate lattices.
fn select_flat(r: &RectifiableCurrent, eps: f64, total_mass: f64) -> Result<BallSelection> {
    const LEVELS: u32 = 10;
    const CANDIDATE_BUDGET: usize = 40_000_000;
    let target = (1.0 - eps) * total_mass;
    let mut out = BallSelection { balls: Vec::new(), covered_mass: 0.0, total_mass };
    let mut candidates = 0usize;
    for (i, p) in r.patches.iter().enumerate() {
        let Domain::Polygon(poly) = &p.domain else { unreachable!("m = 2 patches have polygon domains") };
        if !(matches!(p.graph, Graph::Zero) && p.theta.is_const()) {
            return Err(Error::Unsupported("ball selection for m = 2 needs a flat patch with constant multiplicity".into()));
        }
        let theta = p.theta.at(&[0.0, 0.0]);
        let (lo, hi) = super::polygon_bbox(poly);
        // chart discs of this patch, bucketed by a coarse grid
        let cell = eps;
        let mut buckets: std::collections::HashMap<(i64, i64), Vec<usize>> = std::collections::HashMap::new();
        let mut local: Vec<([f64; 2], f64)> = Vec::new();
        let key = |z: [f64; 2]| ((z[0] / cell).floor() as i64, (z[1] / cell).floor() as i64);
        for q in 0..LEVELS {
            let rho = eps * 0.5f64.powi(q as i32);
            let h = rho / 2.0;
            let rows = ((hi[1] - lo[1]) / (h * 0.866)).ceil() as i64 + 1;
            let cols = ((hi[0] - lo[0]) / h).ceil() as i64 + 1;
            for row in 0..rows {
                let y = lo[1] + row as f64 * h * 0.866;
                let shift = if row % 2 == 1 { h / 2.0 } else { 0.0 };
                for col in 0..cols {
                    candidates += 1;
                    if candidates > CANDIDATE_BUDGET {
                        return Err(Error::CoverageBudget { achieved: out.coverage(), target: 1.0 - eps });
                    }
                    let z = [lo[0] + shift + col as f64 * h, y];
                    if super::polygon_margin(poly, &z) <= rho * 1.000_000_001 {
                        continue;
                    }
                    let (kx, ky) = key(z);
                    let reach = ((rho + eps) / cell).ceil() as i64 + 1;
                    let mut free = true;
                    'scan: for dx in -reach..=reach {
                        for dy in -reach..=reach {
                            if let Some(list) = buckets.get(&(kx + dx, ky + dy)) {
                                for &j in list {
                                    let (c, rj) = local[j];
                                    let d = ((c[0] - z[0]).powi(2) + (c[1] - z[1]).powi(2)).sqrt();
                                    if d <= (rj + rho) * 1.000_000_001 {
                                        free = false;
                                        break 'scan;
                                    }
                                }
                            }
                        }
                    }
                    if !free {
                        continue;
                    }
                    buckets.entry(key(z)).or_default().push(local.len());
                    local.push((z, rho));
                    let mass = theta * std::f64::consts::PI * rho * rho;
                    out.covered_mass += mass;
                    out.balls.push(Ball {
                        center: p.point(&z),
                        radius: rho,
                        patch: i,
                        chart: z.to_vec(),
                        theta,
                        mass,
                        h_mass: None,
                        blowup: 0.0,
                    });
                    if out.covered_mass >= target {
                        return Ok(out);
                    }
                }
            }
        }
    }
    if out.covered_mass < target {
        return Err(Error::CoverageBudget { achieved: out.coverage(), target: 1.0 - eps });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_of_flat_segment() {
        let p = RectifiablePatch::segment(&[0.0, 0.0], &[1.0, 0.0], 1.0).unwrap();
        let (lo, hi) = ball_interval(&p, 0.5, &[0.5, 0.0], 0.1).unwrap();
        assert!((lo - 0.4).abs() < 1e-12 && (hi - 0.6).abs() < 1e-12);
    }

    #[test]
    fn affine_blowup_vanishes() {
        let c = RectifiableCurrent::single(RectifiablePatch::segment(&[0.0, 0.0], &[1.0, 1.0], 2.0).unwrap());
        let q = blowup_ratio(&c, &[0.5, 0.5], 0.1, 2).unwrap();
        assert!(q <= 1e-6, "{q}");
    }

    #[test]
    fn parabola_blowup_decreases() {
        let c = RectifiableCurrent::single(RectifiablePatch::parabola(0.5, 1.0).unwrap());
        let a = blowup_ratio(&c, &[0.0, 0.0], 0.1, 2).unwrap();
        let b = blowup_ratio(&c, &[0.0, 0.0], 0.05, 2).unwrap();
        assert!(b < a, "{a} {b}");
    }

    #[test]
    fn jump_blowup_stays_away_from_zero() {
        let c = RectifiableCurrent::single(RectifiablePatch::jump_segment(1.0, 2.0).unwrap());
        for rho in [0.1, 0.01, 0.001] {
            let q = blowup_ratio(&c, &[0.5, 0.0], rho, 2).unwrap();
            assert!(q > 0.2, "{q}");
        }
    }
}
