//! Phi_H on polyhedral chains, the H-mass on 0-chains and patches, and the
//! liminf harness for the relaxation of Phi_H.

use serde::Serialize;

use crate::chain::{PolyhedralChain, ZeroChain};
use crate::error::Result;
use crate::flat::patch::current_flat_distance_upper;
use crate::hfunc::HSpec;
use crate::quadrature::{QuadPlan, QuadResult};
use crate::rectifiable::{RectifiableCurrent, RectifiablePatch};

/// Rows whose flat bound is at most this count towards the liminf.
pub const TAIL_FLAT_TOL: f64 = 5e-7;
/// Slack allowed below the H-mass on top of the quadrature error.
pub const LSC_SLACK: f64 = 1e-6;

/// `sum H(theta_i) H^m(sigma_i)`; needs non-overlapping terms.
pub fn phi_h(p: &PolyhedralChain, h: &HSpec) -> Result<f64> {
    p.require_disjoint()?;
    Ok(p.terms().iter().map(|t| h.eval(t.multiplicity) * t.simplex.volume()).sum())
}

pub fn h_mass_zero(t: &ZeroChain, h: &HSpec) -> f64 {
    t.canonical().atoms().iter().map(|(_, w)| h.eval(w.abs())).sum()
}

pub fn h_mass_patch(r: &RectifiablePatch, h: &HSpec, plan: &QuadPlan) -> Result<QuadResult> {
    r.h_mass(h, plan)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelaxRow {
    pub j: u64,
    pub phi_h: f64,
    pub flat_upper: f64,
    pub h_mass_target: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelaxReport {
    pub rows: Vec<RelaxRow>,
    pub h_mass_target: f64,
    pub h_mass_error: f64,
    /// `min_j Phi_H(P_j) - M_H(R)` over all rows.
    pub gap_min: f64,
    /// Same minimum over the rows with flat bound at most `TAIL_FLAT_TOL`.
    pub tail_gap: Option<f64>,
}

impl RelaxReport {
    /// The liminf direction: the tail does not undercut the H-mass.
    pub fn lsc_holds(&self) -> bool {
        self.tail_gap.is_some_and(|g| g >= -(self.h_mass_error + LSC_SLACK))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("j,phi_h,flat_upper,h_mass_target,gap\n");
        for r in &self.rows {
            s.push_str(&format!("{},{:e},{:e},{:e},{:e}\n", r.j, r.phi_h, r.flat_upper, r.h_mass_target, r.gap));
        }
        s
    }
}

/// Evaluate `Phi_H(P_j)` and `F(R - P_j)` along a labelled sequence.
pub fn relaxation_liminf(
    sequence: &[(u64, PolyhedralChain)],
    target: &RectifiableCurrent,
    h: &HSpec,
    level: u32,
) -> Result<RelaxReport> {
    let hm = target.h_mass(h, &QuadPlan::default())?;
    let mut rows = Vec::with_capacity(sequence.len());
    for (j, p) in sequence {
        let phi = phi_h(p, h)?;
        let flat = current_flat_distance_upper(target, p, level)?.value;
        rows.push(RelaxRow { j: *j, phi_h: phi, flat_upper: flat, h_mass_target: hm.value, gap: phi - hm.value });
    }
    let gap_min = rows.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min);
    let tail: Vec<f64> = rows.iter().filter(|r| r.flat_upper <= TAIL_FLAT_TOL).map(|r| r.gap).collect();
    let tail_gap = if tail.is_empty() { None } else { Some(tail.into_iter().fold(f64::INFINITY, f64::min)) };
    Ok(RelaxReport { rows, h_mass_target: hm.value, h_mass_error: hm.error, gap_min, tail_gap })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_of_two_segments() {
        let p = PolyhedralChain::from_simplices(
            2,
            1,
            vec![(vec![vec![0.0, 0.0], vec![1.0, 0.0]], 4.0), (vec![vec![0.0, 1.0], vec![2.0, 1.0]], 9.0)],
        )
        .unwrap();
        let h = HSpec::power(0.5).unwrap();
        assert!((phi_h(&p, &h).unwrap() - 8.0).abs() < 1e-14);
        assert_eq!(phi_h(&p, &HSpec::abs()).unwrap(), p.mass().unwrap());
    }

    #[test]
    fn zero_chain_h_mass() {
        let t = ZeroChain::from_pairs(2, vec![(vec![0.0, 0.0], 2.0), (vec![1.0, 0.0], -2.0)]).unwrap();
        let h = HSpec::power(0.5).unwrap();
        assert!((h_mass_zero(&t, &h) - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(h_mass_zero(&ZeroChain::empty(2), &h), 0.0);
    }

    #[test]
    fn patch_h_mass() {
        let q = RectifiablePatch::quarter_circle(4.0).unwrap();
        let r = h_mass_patch(&q, &HSpec::power(0.5).unwrap(), &QuadPlan::default()).unwrap();
        assert!((r.value - std::f64::consts::PI).abs() < 1e-9);
    }
}
