//! Polyhedral m-chains in R^n: weighted oriented simplexes with a boundary
//! operator, mass and a canonicalizing sum.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::lp::{self, LpProblem, LpStatus, RowSense};

/// Relative volume threshold below which a simplex counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("point with no coordinates".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite coordinate in {coords:?}")));
        }
        Ok(Point(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Bit pattern of the coordinates with -0.0 folded into 0.0; two points
    /// with equal keys are the same vertex.
    pub fn key(&self) -> Vec<u64> {
        self.0.iter().map(|&c| if c == 0.0 { 0u64 } else { c.to_bits() }).collect()
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

/// Oriented simplex. For m >= 1 the orientation is the vertex order; a
/// 0-simplex carries an explicit sign.
#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    vertices: Vec<Point>,
    sign: i8,
}

impl Simplex {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        Self::with_sign(vertices, 1)
    }

    /// Build with orientation `sign`; for m >= 1 a negative sign is realised by
    /// swapping the first two vertices.
    pub fn with_sign(mut vertices: Vec<Point>, sign: i8) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidInput("simplex with no vertices".into()));
        }
        let n = vertices[0].dim();
        for v in &vertices {
            if v.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: v.dim() });
            }
            if n == 0 || v.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidInput("vertex coordinates must be finite and n >= 1".into()));
            }
        }
        let m = vertices.len() - 1;
        if m > n {
            return Err(Error::InvalidInput(format!("{m}-simplex cannot live in R^{n}")));
        }
        if m >= 1 {
            let raw: Vec<Vec<f64>> = vertices.iter().map(|p| p.0.clone()).collect();
            let vol = linalg::simplex_volume(&raw);
            let mut max_edge: f64 = 0.0;
            for i in 0..=m {
                for j in i + 1..=m {
                    max_edge = max_edge.max(linalg::dist(&raw[i], &raw[j]));
                }
            }
            let threshold = DEGENERACY_TOL * max_edge.powi(m as i32);
            if !(vol >= threshold) || vol == 0.0 {
                return Err(Error::DegenerateSimplex { volume: vol, threshold });
            }
        }
        let sign = if sign < 0 { -1 } else { 1 };
        if m >= 1 && sign < 0 {
            vertices.swap(0, 1);
            return Ok(Simplex { vertices, sign: 1 });
        }
        Ok(Simplex { vertices, sign })
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn ambient_dim(&self) -> usize {
        self.vertices[0].dim()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Orientation sign of a 0-simplex; always +1 for m >= 1.
    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn volume(&self) -> f64 {
        let raw: Vec<Vec<f64>> = self.vertices.iter().map(|p| p.0.clone()).collect();
        linalg::simplex_volume(&raw)
    }

    pub fn reversed(&self) -> Simplex {
        let mut s = self.clone();
        if s.dim() == 0 {
            s.sign = -s.sign;
        } else {
            s.vertices.swap(0, 1);
        }
        s
    }

    pub fn barycenter(&self) -> Vec<f64> {
        let k = self.vertices.len() as f64;
        let mut c = vec![0.0; self.ambient_dim()];
        for v in &self.vertices {
            for (ci, vi) in c.iter_mut().zip(v.iter()) {
                *ci += vi / k;
            }
        }
        c
    }

    /// Edge vectors `v_i - v_0`, which orient the simplex.
    pub fn frame(&self) -> Vec<Vec<f64>> {
        self.vertices[1..].iter().map(|v| linalg::sub(v, &self.vertices[0])).collect()
    }

    fn bbox(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.ambient_dim();
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        for v in &self.vertices {
            for k in 0..n {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSimplex {
    pub simplex: Simplex,
    pub multiplicity: f64,
}

impl WeightedSimplex {
    pub fn new(simplex: Simplex, multiplicity: f64) -> Result<Self> {
        if !(multiplicity.is_finite() && multiplicity > 0.0) {
            return Err(Error::InvalidInput(format!("multiplicity must be positive and finite, got {multiplicity}")));
        }
        Ok(WeightedSimplex { simplex, multiplicity })
    }

    /// Multiplicity times orientation sign (only differs for 0-simplexes).
    pub fn signed_multiplicity(&self) -> f64 {
        self.multiplicity * self.simplex.sign as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlapStatus {
    VerifiedDisjoint,
    /// Terms may overlap; the pair is a witness when one was found.
    Unverified(Option<(usize, usize)>),
    Canonicalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlapReport {
    Disjoint,
    Overlapping(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyhedralChain {
    ambient_dim: usize,
    dim: usize,
    terms: Vec<WeightedSimplex>,
    overlap_status: OverlapStatus,
}

impl PolyhedralChain {
    pub fn empty(ambient_dim: usize, dim: usize) -> Self {
        PolyhedralChain { ambient_dim, dim, terms: Vec::new(), overlap_status: OverlapStatus::Canonicalized }
    }

    /// Validate the terms and run the overlap check.
    pub fn new(ambient_dim: usize, dim: usize, terms: Vec<WeightedSimplex>) -> Result<Self> {
        let chain = Self::new_unchecked_overlap(ambient_dim, dim, terms)?;
        Ok(chain.with_overlap_checked())
    }

    /// Validate the terms but leave the overlap status unverified.
    pub fn new_unchecked_overlap(ambient_dim: usize, dim: usize, terms: Vec<WeightedSimplex>) -> Result<Self> {
        if ambient_dim == 0 || dim > ambient_dim {
            return Err(Error::InvalidInput(format!("invalid chain dimensions m={dim}, n={ambient_dim}")));
        }
        for t in &terms {
            if t.simplex.ambient_dim() != ambient_dim {
                return Err(Error::DimensionMismatch { expected: ambient_dim, found: t.simplex.ambient_dim() });
            }
            if t.simplex.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: t.simplex.dim() });
            }
        }
        let status = if terms.len() <= 1 { OverlapStatus::VerifiedDisjoint } else { OverlapStatus::Unverified(None) };
        Ok(PolyhedralChain { ambient_dim, dim, terms, overlap_status: status })
    }

    /// Convenience constructor from raw vertex lists and multiplicities.
    /// Negative multiplicities flip orientation.
    pub fn from_simplices(ambient_dim: usize, dim: usize, items: Vec<(Vec<Vec<f64>>, f64)>) -> Result<Self> {
        let mut terms = Vec::with_capacity(items.len());
        for (verts, theta) in items {
            terms.push(make_term(verts, theta)?);
        }
        Self::new(ambient_dim, dim, terms)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[WeightedSimplex] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn overlap_status(&self) -> OverlapStatus {
        self.overlap_status
    }

    /// Fail unless mass-like evaluation is well defined.
    pub fn require_disjoint(&self) -> Result<()> {
        match self.overlap_status {
            OverlapStatus::Unverified(w) => {
                let (i, j) = w.unwrap_or((0, 0));
                Err(Error::OverlapUnverified(i, j))
            }
            _ => Ok(()),
        }
    }

    pub fn mass(&self) -> Result<f64> {
        self.require_disjoint()?;
        Ok(self.terms.iter().map(|t| t.multiplicity * t.simplex.volume()).sum())
    }

    /// `sum theta_i vol(sigma_i)` regardless of overlap; an upper bound for the mass.
    pub fn total_variation_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.multiplicity * t.simplex.volume()).sum()
    }

    pub fn bbox(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let mut out: Option<(Vec<f64>, Vec<f64>)> = None;
        for t in &self.terms {
            let (lo, hi) = t.simplex.bbox();
            out = Some(match out {
                None => (lo, hi),
                Some((a, b)) => (
                    a.iter().zip(&lo).map(|(x, y)| x.min(*y)).collect(),
                    b.iter().zip(&hi).map(|(x, y)| x.max(*y)).collect(),
                ),
            });
        }
        out
    }

    fn length_scale(&self) -> f64 {
        let mut s: f64 = 1.0;
        for t in &self.terms {
            for v in t.simplex.vertices() {
                for c in v.iter() {
                    s = s.max(c.abs());
                }
            }
        }
        s
    }

    pub fn boundary(&self) -> Result<PolyhedralChain> {
        if self.dim == 0 {
            return Err(Error::BoundaryOfZeroChain);
        }
        // key -> (sorted vertices, net signed multiplicity, sum of |contributions|)
        let mut acc: BTreeMap<Vec<Vec<u64>>, (Vec<Point>, f64, f64)> = BTreeMap::new();
        for t in &self.terms {
            let verts = t.simplex.vertices();
            for omit in 0..verts.len() {
                let face: Vec<&Point> = verts.iter().enumerate().filter(|(i, _)| *i != omit).map(|(_, v)| v).collect();
                let keys: Vec<Vec<u64>> = face.iter().map(|p| p.key()).collect();
                let mut order: Vec<usize> = (0..face.len()).collect();
                order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
                let parity = permutation_sign(&order);
                let face_sign = if omit % 2 == 0 { 1.0 } else { -1.0 };
                let contrib = t.signed_multiplicity() * face_sign * parity;
                let sorted_keys: Vec<Vec<u64>> = order.iter().map(|&i| keys[i].clone()).collect();
                let entry = acc
                    .entry(sorted_keys)
                    .or_insert_with(|| (order.iter().map(|&i| face[i].clone()).collect(), 0.0, 0.0));
                entry.1 += contrib;
                entry.2 += contrib.abs();
            }
        }
        let mut terms = Vec::new();
        for (_, (verts, net, gross)) in acc {
            if net.abs() <= 1e-13 * gross {
                continue;
            }
            let sign = if net > 0.0 { 1 } else { -1 };
            terms.push(WeightedSimplex { simplex: Simplex::with_sign(verts, sign)?, multiplicity: net.abs() });
        }
        Ok(PolyhedralChain::new_unchecked_overlap(self.ambient_dim, self.dim - 1, terms)?.with_overlap_checked())
    }

    pub fn scale(&self, lambda: f64) -> Result<PolyhedralChain> {
        if !lambda.is_finite() {
            return Err(Error::InvalidInput(format!("scale factor {lambda} is not finite")));
        }
        if lambda == 0.0 {
            return Ok(PolyhedralChain::empty(self.ambient_dim, self.dim));
        }
        let terms = self
            .terms
            .iter()
            .map(|t| WeightedSimplex {
                simplex: if lambda < 0.0 { t.simplex.reversed() } else { t.simplex.clone() },
                multiplicity: t.multiplicity * lambda.abs(),
            })
            .collect();
        Ok(PolyhedralChain { terms, ..self.clone() })
    }

    pub fn negate(&self) -> PolyhedralChain {
        self.scale(-1.0).expect("finite scale")
    }

    pub fn add(&self, other: &PolyhedralChain) -> Result<PolyhedralChain> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim, found: other.ambient_dim });
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        let joined = PolyhedralChain::new_unchecked_overlap(self.ambient_dim, self.dim, terms)?;
        joined.canonicalize()
    }

    pub fn sub(&self, other: &PolyhedralChain) -> Result<PolyhedralChain> {
        self.add(&other.negate())
    }

    /// Merge coincident terms; overlay collinear segments for m = 1. For m >= 2
    /// the result is overlap-checked instead.
    pub fn canonicalize(&self) -> Result<PolyhedralChain> {
        let tol = 1e-10 * self.length_scale();
        let mut out = match self.dim {
            0 => self.merge_atoms(1e-12 * self.length_scale()),
            1 => self.overlay_segments(tol)?,
            _ => {
                let merged = self.merge_identical()?;
                return Ok(merged.with_overlap_checked().sorted());
            }
        };
        out.overlap_status = OverlapStatus::Canonicalized;
        Ok(out.sorted())
    }

    /// Terms in lexicographic vertex order.
    pub fn sorted(mut self) -> PolyhedralChain {
        self.terms.sort_by(compare_terms);
        self
    }

    fn merge_atoms(&self, tol: f64) -> PolyhedralChain {
        let mut atoms: Vec<(Point, f64)> =
            self.terms.iter().map(|t| (t.simplex.vertices()[0].clone(), t.signed_multiplicity())).collect();
        atoms.sort_by(|a, b| compare_points(&a.0, &b.0));
        let mut merged: Vec<(Point, f64, f64)> = Vec::new();
        for (p, w) in atoms {
            // scan back over atoms whose first coordinate is within tol
            let mut hit = None;
            for k in (0..merged.len()).rev() {
                if p[0] - merged[k].0[0] > tol {
                    break;
                }
                if linalg::dist(&p, &merged[k].0) <= tol {
                    hit = Some(k);
                    break;
                }
            }
            match hit {
                Some(k) => {
                    merged[k].1 += w;
                    merged[k].2 += w.abs();
                }
                None => merged.push((p, w, w.abs())),
            }
        }
        let terms = merged
            .into_iter()
            .filter(|(_, net, gross)| net.abs() > 1e-12 * gross)
            .map(|(p, net, _)| WeightedSimplex {
                simplex: Simplex { vertices: vec![p], sign: if net > 0.0 { 1 } else { -1 } },
                multiplicity: net.abs(),
            })
            .collect();
        PolyhedralChain { ambient_dim: self.ambient_dim, dim: 0, terms, overlap_status: OverlapStatus::Canonicalized }
    }

    /// Combine terms with the same vertex set, accounting for orientation.
    fn merge_identical(&self) -> Result<PolyhedralChain> {
        let mut acc: BTreeMap<Vec<Vec<u64>>, (Vec<Point>, f64, f64)> = BTreeMap::new();
        for t in &self.terms {
            let verts = t.simplex.vertices();
            let keys: Vec<Vec<u64>> = verts.iter().map(|p| p.key()).collect();
            let mut order: Vec<usize> = (0..verts.len()).collect();
            order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
            let w = t.signed_multiplicity() * permutation_sign(&order);
            let sorted_keys = order.iter().map(|&i| keys[i].clone()).collect();
            let e = acc.entry(sorted_keys).or_insert_with(|| (order.iter().map(|&i| verts[i].clone()).collect(), 0.0, 0.0));
            e.1 += w;
            e.2 += w.abs();
        }
        let mut terms = Vec::new();
        for (_, (verts, net, gross)) in acc {
            if net.abs() <= 1e-12 * gross {
                continue;
            }
            terms.push(WeightedSimplex { simplex: Simplex::with_sign(verts, if net > 0.0 { 1 } else { -1 })?, multiplicity: net.abs() });
        }
        PolyhedralChain::new_unchecked_overlap(self.ambient_dim, self.dim, terms)
    }

    fn overlay_segments(&self, tol: f64) -> Result<PolyhedralChain> {
        let k = self.terms.len();
        let segs: Vec<(&[f64], &[f64])> =
            self.terms.iter().map(|t| (&t.simplex.vertices()[0].0[..], &t.simplex.vertices()[1].0[..])).collect();
        let boxes: Vec<(Vec<f64>, Vec<f64>)> = self.terms.iter().map(|t| t.simplex.bbox()).collect();
        let mut uf = UnionFind::new(k);
        for (i, j) in candidate_pairs(&boxes, tol) {
            if collinear_touching(segs[i], segs[j], tol) {
                uf.union(i, j);
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..k {
            groups.entry(uf.find(i)).or_default().push(i);
        }
        let mut terms = Vec::new();
        for (_, members) in groups {
            if members.len() == 1 {
                terms.push(self.terms[members[0]].clone());
                continue;
            }
            terms.extend(overlay_group(&self.terms, &members, tol)?);
        }
        Ok(PolyhedralChain { ambient_dim: self.ambient_dim, dim: 1, terms, overlap_status: OverlapStatus::Canonicalized })
    }

    pub fn overlap_check(&self) -> OverlapReport {
        let tol = 1e-10 * self.length_scale();
        let boxes: Vec<(Vec<f64>, Vec<f64>)> = self.terms.iter().map(|t| t.simplex.bbox()).collect();
        for (i, j) in candidate_pairs(&boxes, tol) {
            if simplices_overlap(&self.terms[i].simplex, &self.terms[j].simplex, tol) {
                return OverlapReport::Overlapping(i.min(j), i.max(j));
            }
        }
        OverlapReport::Disjoint
    }

    pub fn with_overlap_checked(mut self) -> PolyhedralChain {
        if self.overlap_status == OverlapStatus::Canonicalized && self.dim <= 1 {
            return self;
        }
        self.overlap_status = match self.overlap_check() {
            OverlapReport::Disjoint => OverlapStatus::VerifiedDisjoint,
            OverlapReport::Overlapping(i, j) => OverlapStatus::Unverified(Some((i, j))),
        };
        self
    }

    pub fn to_zero_chain(&self) -> Result<ZeroChain> {
        if self.dim != 0 {
            return Err(Error::DimensionMismatch { expected: 0, found: self.dim });
        }
        let atoms = self.terms.iter().map(|t| (t.simplex.vertices()[0].clone(), t.signed_multiplicity())).collect();
        ZeroChain::new(self.ambient_dim, atoms)
    }

    pub fn from_zero_chain(z: &ZeroChain) -> PolyhedralChain {
        let terms: Vec<WeightedSimplex> = z
            .atoms()
            .iter()
            .map(|(p, w)| WeightedSimplex {
                simplex: Simplex { vertices: vec![p.clone()], sign: if *w > 0.0 { 1 } else { -1 } },
                multiplicity: w.abs(),
            })
            .collect();
        PolyhedralChain { ambient_dim: z.ambient_dim(), dim: 0, terms, overlap_status: OverlapStatus::Unverified(None) }
            .with_overlap_checked()
    }

    pub fn to_json_value(&self) -> ChainJson {
        let sorted = self.clone().sorted();
        ChainJson {
            ambient_dim: self.ambient_dim,
            dim: self.dim,
            terms: sorted
                .terms
                .iter()
                .map(|t| TermJson {
                    vertices: t.simplex.vertices().iter().map(|p| p.0.clone()).collect(),
                    multiplicity: t.signed_multiplicity(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("chain serializes")
    }

    pub fn from_json_value(v: ChainJson) -> Result<Self> {
        let mut terms = Vec::with_capacity(v.terms.len());
        for (i, t) in v.terms.into_iter().enumerate() {
            if t.vertices.len() != v.dim + 1 {
                return Err(Error::Parse(format!("term {i}: expected {} vertices, found {}", v.dim + 1, t.vertices.len())));
            }
            terms.push(make_term(t.vertices, t.multiplicity)?);
        }
        Self::new(v.ambient_dim, v.dim, terms)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let v: ChainJson = serde_json::from_str(s)?;
        Self::from_json_value(v)
    }
}

fn make_term(verts: Vec<Vec<f64>>, theta: f64) -> Result<WeightedSimplex> {
    if theta == 0.0 || !theta.is_finite() {
        return Err(Error::InvalidInput(format!("multiplicity must be nonzero and finite, got {theta}")));
    }
    let pts = verts.into_iter().map(Point::new).collect::<Result<Vec<_>>>()?;
    let simplex = Simplex::with_sign(pts, if theta < 0.0 { -1 } else { 1 })?;
    WeightedSimplex::new(simplex, theta.abs())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermJson {
    pub vertices: Vec<Vec<f64>>,
    pub multiplicity: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainJson {
    pub ambient_dim: usize,
    pub dim: usize,
    pub terms: Vec<TermJson>,
}

/// Finite signed atomic measure.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroChain {
    ambient_dim: usize,
    atoms: Vec<(Point, f64)>,
}

impl ZeroChain {
    pub fn new(ambient_dim: usize, atoms: Vec<(Point, f64)>) -> Result<Self> {
        for (p, w) in &atoms {
            if p.dim() != ambient_dim {
                return Err(Error::DimensionMismatch { expected: ambient_dim, found: p.dim() });
            }
            if p.iter().any(|c| !c.is_finite()) || !w.is_finite() {
                return Err(Error::InvalidInput("non-finite atom".into()));
            }
            if *w == 0.0 {
                return Err(Error::InvalidInput("atom with zero multiplicity".into()));
            }
        }
        Ok(ZeroChain { ambient_dim, atoms })
    }

    pub fn from_pairs(ambient_dim: usize, pairs: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let atoms = pairs.into_iter().map(|(p, w)| Ok((Point::new(p)?, w))).collect::<Result<Vec<_>>>()?;
        Self::new(ambient_dim, atoms)
    }

    pub fn empty(ambient_dim: usize) -> Self {
        ZeroChain { ambient_dim, atoms: Vec::new() }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn atoms(&self) -> &[(Point, f64)] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w).sum()
    }

    /// Merge coincident atoms and drop cancelled ones.
    pub fn canonical(&self) -> ZeroChain {
        let c = PolyhedralChain::from_zero_chain(self).canonicalize().expect("0-chains canonicalize");
        c.to_zero_chain().expect("dimension 0")
    }

    pub fn add(&self, other: &ZeroChain) -> Result<ZeroChain> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim, found: other.ambient_dim });
        }
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        Ok(ZeroChain { ambient_dim: self.ambient_dim, atoms }.canonical())
    }

    pub fn scale(&self, lambda: f64) -> Result<ZeroChain> {
        if !lambda.is_finite() {
            return Err(Error::InvalidInput(format!("scale factor {lambda} is not finite")));
        }
        if lambda == 0.0 {
            return Ok(ZeroChain::empty(self.ambient_dim));
        }
        Ok(ZeroChain { ambient_dim: self.ambient_dim, atoms: self.atoms.iter().map(|(p, w)| (p.clone(), w * lambda)).collect() })
    }

    pub fn sub(&self, other: &ZeroChain) -> Result<ZeroChain> {
        self.add(&other.scale(-1.0)?)
    }

    /// Atoms inside the closed ball `B(center, radius)`.
    pub fn restrict_ball(&self, center: &[f64], radius: f64) -> ZeroChain {
        ZeroChain {
            ambient_dim: self.ambient_dim,
            atoms: self.atoms.iter().filter(|(p, _)| linalg::dist(p, center) <= radius).cloned().collect(),
        }
    }
}

fn permutation_sign(order: &[usize]) -> f64 {
    let mut seen = vec![false; order.len()];
    let mut sign = 1.0;
    for start in 0..order.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut j = start;
        while !seen[j] {
            seen[j] = true;
            j = order[j];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

fn compare_points(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

fn compare_terms(a: &WeightedSimplex, b: &WeightedSimplex) -> Ordering {
    for (p, q) in a.simplex.vertices().iter().zip(b.simplex.vertices()) {
        match compare_points(p, q) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.signed_multiplicity().total_cmp(&b.signed_multiplicity())
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Pairs of boxes that intersect after inflation by `tol`. The sweep runs
/// along the axis with the fewest overlapping projections.
pub(crate) fn candidate_pairs(boxes: &[(Vec<f64>, Vec<f64>)], tol: f64) -> Vec<(usize, usize)> {
    let k = boxes.len();
    if k < 2 {
        return Vec::new();
    }
    let n = boxes[0].0.len();
    let mut best_axis = 0;
    let mut best_count = usize::MAX;
    for axis in 0..n {
        let mut starts: Vec<f64> = boxes.iter().map(|b| b.0[axis] - tol).collect();
        let mut ends: Vec<f64> = boxes.iter().map(|b| b.1[axis] + tol).collect();
        starts.sort_by(f64::total_cmp);
        ends.sort_by(f64::total_cmp);
        let mut count = 0usize;
        let mut e = 0;
        for (i, s) in starts.iter().enumerate() {
            while e < k && ends[e] < *s {
                e += 1;
            }
            count += i - e.min(i);
        }
        if count < best_count {
            best_count = count;
            best_axis = axis;
        }
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| boxes[a].0[best_axis].total_cmp(&boxes[b].0[best_axis]));
    let mut pairs = Vec::new();
    let mut active: Vec<usize> = Vec::new();
    for &i in &order {
        let lo = boxes[i].0[best_axis] - tol;
        active.retain(|&j| boxes[j].1[best_axis] + tol >= lo);
        for &j in &active {
            let hit = (0..n).all(|a| boxes[i].0[a] <= boxes[j].1[a] + 2.0 * tol && boxes[j].0[a] <= boxes[i].1[a] + 2.0 * tol);
            if hit {
                pairs.push((j.min(i), j.max(i)));
            }
        }
        active.push(i);
    }
    pairs.sort_unstable();
    pairs
}

fn point_line_distance(p: &[f64], a: &[f64], u: &[f64]) -> f64 {
    let d = linalg::sub(p, a);
    let t = linalg::dot(&d, u);
    linalg::norm(&linalg::sub(&d, &linalg::scaled(u, t)))
}

fn collinear(s: (&[f64], &[f64]), t: (&[f64], &[f64]), tol: f64) -> Option<(Vec<f64>, f64, f64, f64, f64)> {
    let dir = linalg::sub(s.1, s.0);
    let len = linalg::norm(&dir);
    let u = linalg::scaled(&dir, 1.0 / len);
    if point_line_distance(t.0, s.0, &u) > tol || point_line_distance(t.1, s.0, &u) > tol {
        return None;
    }
    let a = linalg::dot(&linalg::sub(t.0, s.0), &u);
    let b = linalg::dot(&linalg::sub(t.1, s.0), &u);
    Some((u, 0.0, len, a.min(b), a.max(b)))
}

fn collinear_touching(s: (&[f64], &[f64]), t: (&[f64], &[f64]), tol: f64) -> bool {
    match collinear(s, t, tol) {
        Some((_, lo1, hi1, lo2, hi2)) => lo2 <= hi1 + tol && lo1 <= hi2 + tol,
        None => false,
    }
}

fn overlay_group(terms: &[WeightedSimplex], members: &[usize], tol: f64) -> Result<Vec<WeightedSimplex>> {
    // reference direction: the longest member
    let longest = *members
        .iter()
        .max_by(|&&a, &&b| terms[a].simplex.volume().total_cmp(&terms[b].simplex.volume()).then(b.cmp(&a)))
        .unwrap();
    let v = terms[longest].simplex.vertices();
    let origin = v[0].0.clone();
    let dir = linalg::sub(&v[1], &v[0]);
    let u = linalg::scaled(&dir, 1.0 / linalg::norm(&dir));

    let mut breaks: Vec<(f64, Point)> = Vec::new();
    for &i in members {
        for p in terms[i].simplex.vertices() {
            breaks.push((linalg::dot(&linalg::sub(p, &origin), &u), p.clone()));
        }
    }
    breaks.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| compare_points(&a.1, &b.1)));
    let mut merged: Vec<(f64, Point)> = Vec::new();
    for (t, p) in breaks {
        match merged.last() {
            Some((last, _)) if t - last <= tol => {}
            _ => merged.push((t, p)),
        }
    }
    let locate = |t: f64| -> usize {
        let idx = merged.partition_point(|(s, _)| *s < t - tol);
        idx.min(merged.len() - 1)
    };
    let mut diff = vec![0.0; merged.len() + 1];
    let mut max_theta: f64 = 0.0;
    for &i in members {
        let vs = terms[i].simplex.vertices();
        let a = linalg::dot(&linalg::sub(&vs[0], &origin), &u);
        let b = linalg::dot(&linalg::sub(&vs[1], &origin), &u);
        let w = if a < b { terms[i].multiplicity } else { -terms[i].multiplicity };
        let (lo, hi) = (locate(a.min(b)), locate(a.max(b)));
        diff[lo] += w;
        diff[hi] -= w;
        max_theta = max_theta.max(terms[i].multiplicity);
    }
    let mut nets = Vec::with_capacity(merged.len().saturating_sub(1));
    let mut run = 0.0;
    for k in 0..merged.len().saturating_sub(1) {
        run += diff[k];
        nets.push(run);
    }
    let zero = 1e-12 * max_theta;
    let mut out = Vec::new();
    let mut k = 0;
    while k < nets.len() {
        let net = nets[k];
        let mut end = k + 1;
        while end < nets.len() && (nets[end] - net).abs() <= zero {
            end += 1;
        }
        if net.abs() > zero {
            let (p, q) = (merged[k].1.clone(), merged[end].1.clone());
            let verts = if net > 0.0 { vec![p, q] } else { vec![q, p] };
            out.push(WeightedSimplex { simplex: Simplex::new(verts)?, multiplicity: net.abs() });
        }
        k = end;
    }
    Ok(out)
}

fn simplices_overlap(a: &Simplex, b: &Simplex, tol: f64) -> bool {
    let m = a.dim();
    match m {
        0 => linalg::dist(&a.vertices()[0], &b.vertices()[0]) <= tol,
        1 => {
            let s = (&a.vertices()[0].0[..], &a.vertices()[1].0[..]);
            let t = (&b.vertices()[0].0[..], &b.vertices()[1].0[..]);
            match collinear(s, t, tol) {
                Some((_, lo1, hi1, lo2, hi2)) => hi1.min(hi2) - lo1.max(lo2) > tol,
                None => false,
            }
        }
        _ => coplanar_interiors_meet(a, b, tol),
    }
}

/// For two m-simplexes: if they span the same affine m-plane, decide by LP
/// whether their relative interiors share a point.
fn coplanar_interiors_meet(a: &Simplex, b: &Simplex, tol: f64) -> bool {
    let m = a.dim();
    let Some(basis) = linalg::orthonormalize(&a.frame(), 1e-12) else {
        return false;
    };
    let o = &a.vertices()[0];
    let to_plane = |p: &[f64]| -> (Vec<f64>, f64) {
        let d = linalg::sub(p, o);
        let coords: Vec<f64> = basis.iter().map(|e| linalg::dot(&d, e)).collect();
        let mut r = d.clone();
        for (c, e) in coords.iter().zip(&basis) {
            for (ri, ei) in r.iter_mut().zip(e) {
                *ri -= c * ei;
            }
        }
        (coords, linalg::norm(&r))
    };
    let pa: Vec<Vec<f64>> = a.vertices().iter().map(|p| to_plane(p).0).collect();
    let mut pb = Vec::new();
    for p in b.vertices() {
        let (c, off) = to_plane(p);
        if off > tol {
            return false;
        }
        pb.push(c);
    }
    // variables: lambda (m+1), mu (m+1), t; maximise t
    let nv = 2 * (m + 1) + 1;
    let tv = nv - 1;
    let mut obj = vec![0.0; nv];
    obj[tv] = -1.0;
    let mut p = LpProblem::minimize(obj);
    for c in 0..m {
        let mut row = vec![0.0; nv];
        for i in 0..=m {
            row[i] = pa[i][c];
            row[m + 1 + i] = -pb[i][c];
        }
        p.add_row(&row, RowSense::Eq, 0.0);
    }
    let mut s1 = vec![0.0; nv];
    let mut s2 = vec![0.0; nv];
    for i in 0..=m {
        s1[i] = 1.0;
        s2[m + 1 + i] = 1.0;
    }
    p.add_row(&s1, RowSense::Eq, 1.0);
    p.add_row(&s2, RowSense::Eq, 1.0);
    for i in 0..2 * (m + 1) {
        let mut row = vec![0.0; nv];
        row[i] = 1.0;
        row[tv] = -1.0;
        p.add_row(&row, RowSense::Ge, 0.0);
    }
    p.set_bounds(tv, 0.0, 1.0);
    match lp::solve(&p) {
        Ok(sol) if sol.status == LpStatus::Optimal => -sol.objective_value > 1e-9,
        // a failed solve cannot certify disjointness
        Ok(_) => false,
        Err(_) => true,
    }
}
