//! Flat norm: exact for 0-chains via a transport LP, certified upper bounds
//! for m >= 1 via fillings on dyadic simplicial grids.

pub mod grid;
pub mod patch;

use serde::Serialize;

use crate::chain::{PolyhedralChain, ZeroChain};
use crate::error::{Error, Result};
use crate::linalg;
use crate::lp::{self, LpProblem, LpStatus, RowSense};

pub use grid::GridComplex;
pub use patch::patch_flat_distance_upper;

/// Largest number of m-faces (LP rows) the dense solver is asked to handle.
pub const MAX_LP_ROWS: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatCertificate {
    /// Upper bound on the flat norm (exact when `exact` is set).
    pub value: f64,
    pub exact: bool,
    /// Flat-norm bound on the snapping homotopy, included in `value`.
    pub snap_cost: f64,
    /// Bound on the distance from a curved patch to its inscribed
    /// triangulation, included in `value`.
    pub approximation_cost: f64,
    /// Objective of the grid filling, recomputed from the LP solution.
    pub lp_value: Option<f64>,
    pub lp_status: String,
    /// The trivial bound from `S = 0`.
    pub mass_bound: f64,
    pub level: Option<u32>,
}

impl FlatCertificate {
    fn trivial(value: f64, status: &str) -> Self {
        FlatCertificate {
            value,
            exact: value == 0.0,
            snap_cost: 0.0,
            approximation_cost: 0.0,
            lp_value: None,
            lp_status: status.to_string(),
            mass_bound: value,
            level: None,
        }
    }
}

/// Exact flat norm of a 0-chain: positive and negative atoms are paired at
/// cost `|x - y|` per unit, unpaired mass costs 1 per unit.
pub fn flat_zero(t: &ZeroChain) -> Result<f64> {
    let t = t.canonical();
    let pos: Vec<_> = t.atoms().iter().filter(|(_, w)| *w > 0.0).collect();
    let neg: Vec<_> = t.atoms().iter().filter(|(_, w)| *w < 0.0).collect();
    if pos.is_empty() || neg.is_empty() {
        return Ok(t.atoms().iter().map(|(_, w)| w.abs()).sum());
    }
    let (np, nq) = (pos.len(), neg.len());
    let flow = |p: usize, q: usize| p * nq + q;
    let nv = np * nq + np + nq;
    let mut cost = vec![0.0; nv];
    for p in 0..np {
        for q in 0..nq {
            cost[flow(p, q)] = linalg::dist(&pos[p].0, &neg[q].0);
        }
    }
    for c in &mut cost[np * nq..] {
        *c = 1.0;
    }
    let mut lp = LpProblem::minimize(cost);
    for p in 0..np {
        let mut row: Vec<(usize, f64)> = (0..nq).map(|q| (flow(p, q), 1.0)).collect();
        row.push((np * nq + p, 1.0));
        lp.add_sparse_row(row, RowSense::Eq, pos[p].1);
    }
    for q in 0..nq {
        let mut row: Vec<(usize, f64)> = (0..np).map(|p| (flow(p, q), 1.0)).collect();
        row.push((np * nq + np + q, 1.0));
        lp.add_sparse_row(row, RowSense::Eq, -neg[q].1);
    }
    let sol = lp::solve(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::NumericalBreakdown(format!("transport LP ended {:?}", sol.status)));
    }
    Ok(sol.objective_value.max(0.0))
}

/// Upper bound on the flat norm of an m-chain (1 <= m < n) from the best
/// filling on the level-k grid over its bounding box, plus the snapping cost.
pub fn simplicial_flat_upper(p: &PolyhedralChain, level: u32) -> Result<FlatCertificate> {
    let (m, n) = (p.dim(), p.ambient_dim());
    if m == 0 || m >= n {
        return Err(Error::InvalidInput(format!("grid flat bounds need 1 <= m < n, got m={m}, n={n}")));
    }
    if p.is_empty() {
        return Ok(FlatCertificate { level: Some(level), ..FlatCertificate::trivial(0.0, "empty") });
    }
    let mass_bound = p.mass().unwrap_or_else(|_| p.total_variation_bound());
    let grid = GridComplex::for_chain(p, level)?;
    let rows = grid.num_faces(m);
    if rows > MAX_LP_ROWS {
        return Err(Error::Unsupported(format!("level {level} grid has {rows} {m}-faces, above the LP budget {MAX_LP_ROWS}")));
    }
    let emb = grid.embed(p)?;
    let ns = grid.num_faces(m + 1);
    let vol_s: Vec<f64> = (0..ns).map(|f| grid.face_volume(m + 1, f)).collect();
    let vol_r: Vec<f64> = (0..rows).map(|e| grid.face_volume(m, e)).collect();

    let mut incidence: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows];
    for (f, col) in grid.topology().boundary[m + 1].iter().enumerate() {
        for &(e, s) in col {
            incidence[e].push((f, s as f64));
        }
    }

    let lp_value = if emb.coeffs.iter().all(|c| *c == 0.0) {
        0.0
    } else {
        // columns: s+ | s- | r+ | r-
        let mut cost = Vec::with_capacity(2 * ns + 2 * rows);
        cost.extend_from_slice(&vol_s);
        cost.extend_from_slice(&vol_s);
        cost.extend_from_slice(&vol_r);
        cost.extend_from_slice(&vol_r);
        let mut lp = LpProblem::minimize(cost);
        for e in 0..rows {
            let mut row = Vec::with_capacity(2 * incidence[e].len() + 2);
            for &(f, s) in &incidence[e] {
                row.push((f, s));
                row.push((ns + f, -s));
            }
            row.push((2 * ns + e, 1.0));
            row.push((2 * ns + rows + e, -1.0));
            lp.add_sparse_row(row, RowSense::Eq, emb.coeffs[e]);
        }
        let sol = lp::solve(&lp)?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::NumericalBreakdown(format!("filling LP ended {:?}", sol.status)));
        }
        let s: Vec<f64> = (0..ns).map(|f| sol.x[f] - sol.x[ns + f]).collect();
        let mut value: f64 = s.iter().zip(&vol_s).map(|(a, v)| a.abs() * v).sum();
        for e in 0..rows {
            let ds: f64 = incidence[e].iter().map(|&(f, sg)| sg * s[f]).sum();
            value += (emb.coeffs[e] - ds).abs() * vol_r[e];
        }
        value
    };
    let total = lp_value + emb.snap_cost;
    Ok(FlatCertificate {
        value: total.min(mass_bound),
        exact: false,
        snap_cost: emb.snap_cost,
        approximation_cost: 0.0,
        lp_value: Some(lp_value),
        lp_status: "optimal".into(),
        mass_bound,
        level: Some(level),
    })
}

/// Upper bound on the flat distance between two chains of the same dimension.
pub fn flat_distance_upper(a: &PolyhedralChain, b: &PolyhedralChain, level: u32) -> Result<FlatCertificate> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: a.ambient_dim(), found: b.ambient_dim() });
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    if a.dim() == 0 {
        let d = a.to_zero_chain()?.sub(&b.to_zero_chain()?)?;
        let v = flat_zero(&d)?;
        return Ok(FlatCertificate { exact: true, ..FlatCertificate::trivial(v, "optimal") });
    }
    if a.clone().sorted().terms() == b.clone().sorted().terms() {
        return Ok(FlatCertificate::trivial(0.0, "identical"));
    }
    let diff = a.sub(b)?;
    if diff.is_empty() {
        return Ok(FlatCertificate::trivial(0.0, "cancelled"));
    }
    let mass_bound = diff.mass().unwrap_or_else(|_| diff.total_variation_bound());
    if diff.dim() == diff.ambient_dim() {
        // no (m+1)-dimensional fillings exist, so the flat norm is the mass
        let exact = diff.mass().is_ok();
        return Ok(FlatCertificate { exact, ..FlatCertificate::trivial(mass_bound, "top-dimensional") });
    }
    match simplicial_flat_upper(&diff, level) {
        Ok(c) => Ok(c),
        Err(e @ (Error::Unsupported(_) | Error::NotEmbeddable(_) | Error::NumericalBreakdown(_))) => Ok(FlatCertificate {
            level: Some(level),
            exact: false,
            ..FlatCertificate::trivial(mass_bound, &format!("skipped: {e}"))
        }),
        Err(e) => Err(e),
    }
}

/// Sum of per-part bounds; valid for the sum of the parts by the triangle
/// inequality.
pub fn sum_certificates(parts: &[FlatCertificate]) -> FlatCertificate {
    let mut out = FlatCertificate::trivial(0.0, "sum");
    out.exact = false;
    for c in parts {
        out.value += c.value;
        out.snap_cost += c.snap_cost;
        out.approximation_cost += c.approximation_cost;
        out.mass_bound += c.mass_bound;
        out.lp_value = Some(out.lp_value.unwrap_or(0.0) + c.lp_value.unwrap_or(c.value));
    }
    out
}
