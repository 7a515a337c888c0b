//! Flat distance bounds between a curved patch and a polyhedral chain.
//!
//! For m = 1 the patch `R` is replaced by its inscribed polyline `P_R` through
//! the chart breakpoints. `F(R - P_R)` is bounded by the area swept by the
//! straight-line homotopy between each arc and its chord, plus the variation
//! of the multiplicity on each piece. `F(P_R - p)` is bounded by
//! `M(S) + M(P_R - p - dS)` for the filling `S` made of quadrilaterals between
//! `P_R` and each term of `p` over the same chart interval. Any choice of `S`
//! gives a valid bound, so the residual is computed from the actual chains.

use super::{flat_distance_upper, FlatCertificate};
use crate::chain::{PolyhedralChain, Point, Simplex, WeightedSimplex};
use crate::error::{Error, Result};
use crate::linalg;
use crate::quadrature::{self, QuadPlan};
use crate::rectifiable::{oriented_term, RectifiableCurrent, RectifiablePatch, Theta};

/// Upper bound on `F(R - p)` for a single patch `R`. `level` sets the number
/// of dyadic chart pieces (`2^level`) of the inscribed polyline for m = 1 and
/// the grid level for m = 2.
pub fn patch_flat_distance_upper(r: &RectifiablePatch, p: &PolyhedralChain, level: u32) -> Result<FlatCertificate> {
    if p.ambient_dim() != r.n {
        return Err(Error::DimensionMismatch { expected: r.n, found: p.ambient_dim() });
    }
    if p.dim() != r.m {
        return Err(Error::DimensionMismatch { expected: r.m, found: p.dim() });
    }
    match r.m {
        1 => curve_bound(r, p, level),
        2 => {
            if !(r.is_affine() && r.theta.is_const()) {
                return Err(Error::Unsupported("flat bounds for curved 2-patches or varying multiplicity".into()));
            }
            let exact = r.exact_triangulation()?;
            flat_distance_upper(&exact, p, level)
        }
        m => Err(Error::Unsupported(format!("flat bounds for {m}-patches"))),
    }
}

/// Same as [`patch_flat_distance_upper`] for a current made of one patch.
pub fn current_flat_distance_upper(r: &RectifiableCurrent, p: &PolyhedralChain, level: u32) -> Result<FlatCertificate> {
    match r.patches.as_slice() {
        [only] => patch_flat_distance_upper(only, p, level),
        _ => Err(Error::Unsupported("flat bounds for currents with several patches".into())),
    }
}

fn curve_bound(r: &RectifiablePatch, p: &PolyhedralChain, level: u32) -> Result<FlatCertificate> {
    if level > 20 {
        return Err(Error::InvalidInput(format!("level {level} is too fine for the chart polyline")));
    }
    let (a, b) = r.interval().expect("m = 1 patch");
    let n = r.n;
    let ztol = 1e-12 * (b - a);
    let orient = r.orientation as f64;

    let mut zs: Vec<f64> = vec![a, b];
    let pieces = 1u64 << level;
    zs.extend((1..pieces).map(|k| a + (b - a) * k as f64 / pieces as f64));
    zs.extend(r.theta.breaks().into_iter().filter(|z| *z > a && *z < b));
    for t in p.terms() {
        for v in t.simplex.vertices() {
            let z = r.chart_coords(v)[0];
            if z > a && z < b {
                zs.push(z);
            }
        }
    }
    zs.sort_by(f64::total_cmp);
    let mut knots: Vec<f64> = Vec::with_capacity(zs.len());
    for z in zs {
        match knots.last() {
            Some(last) if z - last <= ztol => {}
            _ => knots.push(z),
        }
    }
    if b - knots[knots.len() - 1] <= ztol && knots.len() > 1 {
        knots.pop();
    }
    if *knots.last().unwrap() != b {
        knots.push(b);
    }
    let w: Vec<Vec<f64>> = knots.iter().map(|z| r.point(&[*z])).collect();

    // inscribed polyline and the cost of replacing R by it
    let plan = QuadPlan { tol: 1e-12, max_level: 10, order: 8 };
    let mut approximation = 0.0;
    let mut terms: Vec<WeightedSimplex> = Vec::new();
    let mut poly_mass = 0.0;
    for k in 0..knots.len() - 1 {
        let (z0, z1) = (knots[k], knots[k + 1]);
        let mid = 0.5 * (z0 + z1);
        let theta_bar = r.theta.at(&[mid]);
        let chord = linalg::sub(&w[k + 1], &w[k]);
        let chord_len = linalg::norm(&chord);
        let len = z1 - z0;
        if !r.is_affine() {
            let swept = quadrature::integrate_interval(
                |s| {
                    let z = z0 + s * len;
                    let on_arc = r.point(&[z]);
                    let on_chord: Vec<f64> = w[k].iter().zip(&chord).map(|(x, d)| x + s * d).collect();
                    let speed = linalg::norm(&r.tangents(&[z])[0]) * len;
                    linalg::dist(&on_arc, &on_chord) * 0.5 * (speed + chord_len)
                },
                0.0,
                1.0,
                &[],
                &plan,
            )?;
            approximation += theta_bar * (swept.value + swept.error);
        }
        if matches!(r.theta, Theta::Affine { .. }) {
            let var = quadrature::integrate_interval(
                |z| (r.theta.at(&[z]) - theta_bar).abs() * r.jacobian(&[z]),
                z0,
                z1,
                &[mid],
                &plan,
            )?;
            approximation += var.value + var.error;
        }
        if chord_len > 0.0 {
            terms.push(oriented_term(vec![w[k].clone(), w[k + 1].clone()], orient * theta_bar)?);
            poly_mass += theta_bar * chord_len;
        }
    }

    // quadrilateral filling between P_R and each term of p
    let mut fill: Vec<WeightedSimplex> = Vec::new();
    for t in p.terms() {
        let (y0, y1) = (t.simplex.vertices()[0].to_vec(), t.simplex.vertices()[1].to_vec());
        let (c0, c1) = (r.chart_coords(&y0)[0], r.chart_coords(&y1)[0]);
        if (c1 - c0).abs() <= ztol {
            continue;
        }
        let dir = (c1 - c0).signum();
        let c = t.signed_multiplicity() * dir;
        let (lo, hi) = (c0.min(c1).max(a), c0.max(c1).min(b));
        if hi - lo <= ztol {
            continue;
        }
        let k0 = nearest(&knots, lo);
        let k1 = nearest(&knots, hi);
        let on_term = |z: f64| -> Vec<f64> {
            if (z - c0).abs() <= ztol {
                return y0.clone();
            }
            if (z - c1).abs() <= ztol {
                return y1.clone();
            }
            let s = (z - c0) / (c1 - c0);
            y0.iter().zip(&y1).map(|(u, v)| u + s * (v - u)).collect()
        };
        for k in k0..k1 {
            let (qa, qb) = (on_term(knots[k]), on_term(knots[k + 1]));
            for tri in [[w[k].clone(), w[k + 1].clone(), qb.clone()], [w[k].clone(), qb, qa]] {
                if let Some(term) = triangle(tri.to_vec(), c)? {
                    fill.push(term);
                }
            }
        }
    }
    let fill_mass: f64 = fill.iter().map(|t| t.multiplicity * t.simplex.volume()).sum();
    let mut residual_terms = terms;
    residual_terms.extend(p.negate().terms().iter().cloned());
    if !fill.is_empty() {
        let s = PolyhedralChain::new_unchecked_overlap(n, 2, fill)?;
        residual_terms.extend(s.boundary()?.negate().terms().iter().cloned());
    }
    let residual = PolyhedralChain::new_unchecked_overlap(n, 1, residual_terms)?.canonicalize()?;
    let residual_mass = residual.mass().unwrap_or_else(|_| residual.total_variation_bound());

    let p_mass = p.mass().unwrap_or_else(|_| p.total_variation_bound());
    let patch_mass = r.mass(&QuadPlan::default())?;
    let mass_bound = patch_mass.value + patch_mass.error + p_mass;
    let filled = fill_mass + residual_mass;
    let value = (filled + approximation).min(mass_bound).min(poly_mass + p_mass + approximation);
    Ok(FlatCertificate {
        value,
        exact: false,
        snap_cost: 0.0,
        approximation_cost: approximation,
        lp_value: Some(filled),
        lp_status: "chart-homotopy".into(),
        mass_bound,
        level: Some(level),
    })
}

fn nearest(knots: &[f64], z: f64) -> usize {
    let i = knots.partition_point(|k| *k < z);
    if i == 0 {
        return 0;
    }
    if i >= knots.len() || (z - knots[i - 1]).abs() < (knots[i] - z).abs() {
        i - 1
    } else {
        i
    }
}

fn triangle(vertices: Vec<Vec<f64>>, w: f64) -> Result<Option<WeightedSimplex>> {
    if w == 0.0 {
        return Ok(None);
    }
    let pts = vertices.into_iter().map(Point::new).collect::<Result<Vec<_>>>()?;
    match Simplex::with_sign(pts, if w < 0.0 { -1 } else { 1 }) {
        Ok(s) => Ok(Some(WeightedSimplex::new(s, w.abs())?)),
        Err(Error::DegenerateSimplex { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}
