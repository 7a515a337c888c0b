//! Explicit constructions: the non-rectifiable counterexample sequence,
//! inscribed refinement sequences, the relaxation run, and 0-chain sequences
//! for the lower semicontinuity check.

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use crate::chain::{PolyhedralChain, ZeroChain};
use crate::error::{Error, Result};
use crate::flat::{simplicial_flat_upper, sum_certificates, FlatCertificate};
use crate::functionals::{phi_h, relaxation_liminf, RelaxReport};
use crate::hfunc::HSpec;
use crate::quadrature::QuadPlan;
use crate::rectifiable::{oriented_term, poly_approximate, ApproxCertificate, RectifiableCurrent};
use crate::rng::{self, Stream};

pub const MAX_COUNTEREXAMPLE_I: u32 = 20;

/// `P_i`: `2^i` horizontal unit segments at heights `(j - 1/2) 2^-i` with
/// multiplicity `2^-i`.
pub fn counterexample_chain(i: u32) -> Result<PolyhedralChain> {
    if i > MAX_COUNTEREXAMPLE_I + 1 {
        return Err(Error::InvalidInput(format!("i = {i} exceeds {}", MAX_COUNTEREXAMPLE_I + 1)));
    }
    let count = 1u64 << i;
    let theta = 0.5f64.powi(i as i32);
    let segs = (1..=count)
        .map(|j| {
            let y = (j as f64 - 0.5) * theta;
            (vec![vec![0.0, y], vec![1.0, y]], theta)
        })
        .collect();
    PolyhedralChain::from_simplices(2, 1, segs)
}

/// Flat bound on `P_i - P_{i+1}`: the difference splits into `2^i` strips
/// `theta [h] - theta/2 [h - d] - theta/2 [h + d]` with `d = 2^-(i+2)`, each
/// bounded by the level-1 grid filling of its own box; the bounds add.
pub fn cauchy_bound(i: u32) -> Result<FlatCertificate> {
    if i > MAX_COUNTEREXAMPLE_I {
        return Err(Error::InvalidInput(format!("i = {i} exceeds {MAX_COUNTEREXAMPLE_I}")));
    }
    let count = 1u64 << i;
    let theta = 0.5f64.powi(i as i32);
    let d = theta / 4.0;
    let mut parts = Vec::with_capacity(count as usize);
    for j in 1..=count {
        let y = (j as f64 - 0.5) * theta;
        let strip = PolyhedralChain::from_simplices(
            2,
            1,
            vec![
                (vec![vec![0.0, y], vec![1.0, y]], theta),
                (vec![vec![0.0, y - d], vec![1.0, y - d]], -theta / 2.0),
                (vec![vec![0.0, y + d], vec![1.0, y + d]], -theta / 2.0),
            ],
        )?;
        parts.push(simplicial_flat_upper(&strip, 1)?);
    }
    Ok(sum_certificates(&parts))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleRow {
    pub i: u32,
    pub segments: u64,
    pub theta: f64,
    pub mass: f64,
    pub phi_h: f64,
    /// Upper bound on `F(P_i - P_{i+1})`.
    pub flat_cauchy: f64,
}

pub fn counterexample(h: &HSpec, i_max: u32) -> Result<Vec<CounterexampleRow>> {
    if i_max > MAX_COUNTEREXAMPLE_I {
        return Err(Error::InvalidInput(format!("i_max must be at most {MAX_COUNTEREXAMPLE_I}")));
    }
    (1..=i_max)
        .map(|i| {
            let p = counterexample_chain(i)?;
            Ok(CounterexampleRow {
                i,
                segments: p.len() as u64,
                theta: 0.5f64.powi(i as i32),
                mass: p.mass()?,
                phi_h: phi_h(&p, h)?,
                flat_cauchy: cauchy_bound(i)?.value,
            })
        })
        .collect()
}

pub fn counterexample_csv(rows: &[CounterexampleRow]) -> String {
    let mut s = String::from("i,segments,theta,mass,phi_h,flat_cauchy\n");
    for r in rows {
        s.push_str(&format!("{},{},{:e},{:e},{:e},{:e}\n", r.i, r.segments, r.theta, r.mass, r.phi_h, r.flat_cauchy));
    }
    s
}

/// `j` equal-angle chords of the unit quarter circle from (1,0) to (0,1).
pub fn chord_chain(j: usize, theta: f64) -> Result<PolyhedralChain> {
    let pts: Vec<Vec<f64>> = (0..=j)
        .map(|k| {
            let a = PI / 2.0 * k as f64 / j as f64;
            vec![a.cos(), a.sin()]
        })
        .collect();
    PolyhedralChain::from_simplices(2, 1, (0..j).map(|k| (vec![pts[k].clone(), pts[k + 1].clone()], theta)).collect())
}

/// Inscribed polylines with `2^k` equal chart pieces and the multiplicity at
/// piece midpoints (m = 1), or the exact triangulation repeated (flat m = 2).
pub fn inscribed_sequence(r: &RectifiableCurrent, ks: &[u32]) -> Result<Vec<(u64, PolyhedralChain)>> {
    let [p] = r.patches.as_slice() else {
        return Err(Error::Unsupported("refinement sequences for several patches".into()));
    };
    match p.interval() {
        Some((a, b)) => ks
            .iter()
            .map(|&k| {
                let j = 1u64 << k;
                let z = |t: u64| a + (b - a) * t as f64 / j as f64;
                let terms = (0..j)
                    .map(|t| {
                        let theta = p.theta.at(&[0.5 * (z(t) + z(t + 1))]);
                        oriented_term(vec![p.point(&[z(t)]), p.point(&[z(t + 1)])], theta * p.orientation as f64)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((j, PolyhedralChain::new(p.n, 1, terms)?))
            })
            .collect(),
        None => {
            let exact = p.exact_triangulation()?;
            Ok(ks.iter().map(|&k| (1u64 << k, exact.clone())).collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelaxOutcome {
    pub eps: f64,
    pub h_mass_target: f64,
    pub h_mass_error: f64,
    pub mass_target: f64,
    pub phi_h: f64,
    pub mass_p: f64,
    pub flat_upper: f64,
    /// `|Phi_H(P) - M_H(R)| <= eps` and the certificate holds.
    pub verdict: bool,
    pub certificate: ApproxCertificate,
    pub liminf: RelaxReport,
}

pub const RELAX_SEQUENCE_LEVELS: u32 = 12;

/// Polyhedral approximation with certificate plus the liminf harness along
/// the inscribed refinement sequence.
pub fn relax(r: &RectifiableCurrent, h: &HSpec, eps: f64) -> Result<(PolyhedralChain, RelaxOutcome)> {
    let (p, cert) = poly_approximate(r, eps, h)?;
    let plan = QuadPlan::default();
    let hm = r.h_mass(h, &plan)?;
    let mass = r.mass(&plan)?;
    let phi = phi_h(&p, h)?;
    let ks: Vec<u32> = (0..=RELAX_SEQUENCE_LEVELS).collect();
    let seq = inscribed_sequence(r, &ks)?;
    let liminf = relaxation_liminf(&seq, r, h, 2)?;
    let outcome = RelaxOutcome {
        eps,
        h_mass_target: hm.value,
        h_mass_error: hm.error,
        mass_target: mass.value,
        phi_h: phi,
        mass_p: p.mass()?,
        flat_upper: cert.flat_upper,
        verdict: (phi - hm.value).abs() <= eps && cert.holds(),
        certificate: cert,
        liminf,
    };
    Ok((p, outcome))
}

/// A named 0-chain sequence with its flat limit.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSequence {
    pub name: String,
    pub sequence: Vec<ZeroChain>,
    pub target: ZeroChain,
}

pub const LSC_SEQUENCE_LENGTH: usize = 40;

/// Colliding atoms, a constant sequence and vanishing multiplicity.
pub fn shipped_lsc_sequences() -> Result<Vec<ZeroSequence>> {
    let len = LSC_SEQUENCE_LENGTH;
    let colliding = (1..=len)
        .map(|j| {
            let e = 1.0 / j as f64;
            ZeroChain::from_pairs(2, vec![(vec![e, 0.0], 1.0), (vec![-e, 0.0], 1.0)])
        })
        .collect::<Result<Vec<_>>>()?;
    let fixed = ZeroChain::from_pairs(2, vec![(vec![0.0, 0.0], 1.0), (vec![1.0, 0.0], -0.5)])?;
    let vanishing = (1..=len)
        .map(|j| ZeroChain::from_pairs(2, vec![(vec![0.0, 0.0], 1.0 / j as f64)]))
        .collect::<Result<Vec<_>>>()?;
    Ok(vec![
        ZeroSequence {
            name: "colliding".into(),
            sequence: colliding,
            target: ZeroChain::from_pairs(2, vec![(vec![0.0, 0.0], 2.0)])?,
        },
        ZeroSequence { name: "constant".into(), sequence: vec![fixed.clone(); len], target: fixed },
        ZeroSequence { name: "vanishing".into(), sequence: vanishing, target: ZeroChain::empty(2) },
    ])
}

/// Random targets with one to three well separated atoms; `T_j` splits each
/// atom into two to four pieces of the same sign at distance below `0.1/j`.
pub fn random_colliding_sequence(seed: u64, index: u64) -> Result<ZeroSequence> {
    let mut rng = rng::stream(seed.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15)), Stream::Lsc);
    let atoms = rng.random_range(1..=3usize);
    let mut centers: Vec<Vec<f64>> = Vec::new();
    while centers.len() < atoms {
        let c = vec![rng.random_range(-2..=2) as f64 * 0.5, rng.random_range(-2..=2) as f64 * 0.5];
        if !centers.contains(&c) {
            centers.push(c);
        }
    }
    let mut target = Vec::new();
    let mut pieces = Vec::new();
    for c in &centers {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let theta = sign * rng.random_range(0.5..3.0);
        let k = rng.random_range(2..=4usize);
        let mut w: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = w.iter().sum();
        for x in &mut w {
            *x *= theta / total;
        }
        let dirs: Vec<(f64, f64)> = (0..k)
            .map(|_| {
                let a = rng.random_range(0.0..2.0 * PI);
                (rng.random_range(0.01..0.1) * a.cos(), rng.random_range(0.01..0.1) * a.sin())
            })
            .collect();
        target.push((c.clone(), theta));
        pieces.push((c.clone(), w, dirs));
    }
    let sequence = (1..=LSC_SEQUENCE_LENGTH)
        .map(|j| {
            let s = 1.0 / j as f64;
            let atoms = pieces
                .iter()
                .flat_map(|(c, w, dirs)| {
                    w.iter().zip(dirs).map(move |(wi, (dx, dy))| (vec![c[0] + s * dx, c[1] + s * dy], *wi))
                })
                .collect();
            ZeroChain::from_pairs(2, atoms)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ZeroSequence { name: format!("random-{index}"), sequence, target: ZeroChain::from_pairs(2, target)? })
}

/// `k` random segments in the unit square with multiplicities in `[0.5, 4]`.
pub fn random_segments(k: usize, seed: u64) -> Result<PolyhedralChain> {
    let mut rng = rng::stream(seed, Stream::Chains);
    let mut items = Vec::with_capacity(k);
    while items.len() < k {
        let a = vec![rng.random::<f64>(), rng.random::<f64>()];
        let b = vec![rng.random::<f64>(), rng.random::<f64>()];
        if crate::linalg::dist(&a, &b) < 0.1 {
            continue;
        }
        items.push((vec![a, b], rng.random_range(0.5..4.0)));
    }
    PolyhedralChain::from_simplices(2, 1, items)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_rows() {
        let rows = counterexample(&HSpec::abs(), 3).unwrap();
        for r in &rows {
            assert_eq!(r.phi_h, 1.0);
            assert!(r.flat_cauchy <= 3.0 * r.theta);
        }
        assert!(rows[1].flat_cauchy < rows[0].flat_cauchy);
    }

    #[test]
    fn random_sequences_collide() {
        let s = random_colliding_sequence(1, 0).unwrap();
        let last = s.sequence.last().unwrap();
        assert!((last.total() - s.target.total()).abs() < 1e-12);
    }
}
