//! Dyadic cubical grids over a box, each cube cut into n! simplexes along
//! monotone lattice paths (Kuhn triangulation). Refining a level halves every
//! cell and subdivides each simplex, so the complexes are nested.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::chain::PolyhedralChain;
use crate::error::{Error, Result};
use crate::linalg;

/// Refuse to build complexes with more top simplexes than this.
const MAX_TOP_SIMPLICES: usize = 500_000;

/// Box-independent combinatorics of the level-k complex in R^n.
#[derive(Debug)]
pub struct Topology {
    pub n: usize,
    pub level: u32,
    /// Cells per axis, `2^level`.
    pub cells: usize,
    /// `faces[d]`: d-faces as increasing vertex-index tuples. The increasing
    /// order is the reference orientation.
    pub faces: Vec<Vec<Vec<usize>>>,
    index: Vec<HashMap<Vec<usize>, usize>>,
    /// `boundary[d][f]`: signed (d-1)-faces of the d-face `f`; empty for d = 0.
    pub boundary: Vec<Vec<Vec<(usize, i8)>>>,
}

impl Topology {
    fn build(n: usize, level: u32) -> Result<Topology> {
        let cells = 1usize << level;
        let per_axis = cells + 1;
        let fact: usize = (1..=n).product();
        let top = cells.checked_pow(n as u32).and_then(|c| c.checked_mul(fact));
        if top.is_none_or(|t| t > MAX_TOP_SIMPLICES) {
            return Err(Error::Unsupported(format!("grid complex n={n}, level={level} is too large")));
        }
        let stride: Vec<usize> = (0..n).map(|a| per_axis.pow(a as u32)).collect();
        let perms = permutations(n);
        let mut sets: Vec<HashMap<Vec<usize>, ()>> = vec![HashMap::new(); n + 1];
        let mut corner = vec![0usize; n];
        loop {
            let base: usize = corner.iter().zip(&stride).map(|(c, s)| c * s).sum();
            for p in &perms {
                let mut path = Vec::with_capacity(n + 1);
                let mut v = base;
                path.push(v);
                for &axis in p {
                    v += stride[axis];
                    path.push(v);
                }
                // all subsets of the path, kept in increasing order
                for mask in 1u32..(1u32 << (n + 1)) {
                    let face: Vec<usize> = (0..=n).filter(|i| mask & (1 << i) != 0).map(|i| path[i]).collect();
                    sets[face.len() - 1].insert(face, ());
                }
            }
            // next cube
            let mut a = 0;
            loop {
                if a == n {
                    return Ok(Self::finish(n, level, cells, sets));
                }
                corner[a] += 1;
                if corner[a] < cells {
                    break;
                }
                corner[a] = 0;
                a += 1;
            }
        }
    }

    fn finish(n: usize, level: u32, cells: usize, sets: Vec<HashMap<Vec<usize>, ()>>) -> Topology {
        let mut faces = Vec::with_capacity(n + 1);
        let mut index = Vec::with_capacity(n + 1);
        for s in sets {
            let mut list: Vec<Vec<usize>> = s.into_keys().collect();
            list.sort();
            let map: HashMap<Vec<usize>, usize> = list.iter().enumerate().map(|(i, f)| (f.clone(), i)).collect();
            faces.push(list);
            index.push(map);
        }
        let mut boundary = vec![Vec::new()];
        for d in 1..=n {
            let cols = faces[d]
                .iter()
                .map(|f| {
                    (0..=d)
                        .map(|omit| {
                            let sub: Vec<usize> = f.iter().enumerate().filter(|(i, _)| *i != omit).map(|(_, v)| *v).collect();
                            (index[d - 1][&sub], if omit % 2 == 0 { 1 } else { -1 })
                        })
                        .collect()
                })
                .collect();
            boundary.push(cols);
        }
        Topology { n, level, cells, faces, index, boundary }
    }

    pub fn face_index(&self, d: usize, verts: &[usize]) -> Option<usize> {
        self.index[d].get(verts).copied()
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

type TopologyCache = Mutex<HashMap<(usize, u32), Arc<Topology>>>;

/// Shared, immutable topology for `(n, level)`.
pub fn topology(n: usize, level: u32) -> Result<Arc<Topology>> {
    static CACHE: OnceLock<TopologyCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().unwrap().get(&(n, level)) {
        return Ok(t.clone());
    }
    let built = Arc::new(Topology::build(n, level)?);
    let mut guard = cache.lock().unwrap();
    Ok(guard.entry((n, level)).or_insert(built).clone())
}

#[derive(Debug, Clone)]
pub struct GridComplex {
    lo: Vec<f64>,
    step: Vec<f64>,
    topo: Arc<Topology>,
}

#[derive(Debug, Clone)]
pub struct Embedding {
    /// Coefficient of each m-face in reference orientation.
    pub coeffs: Vec<f64>,
    /// Upper bound on the flat norm of (input chain - snapped chain).
    pub snap_cost: f64,
    pub max_displacement: f64,
}

impl GridComplex {
    /// Complex on the box `[lo, hi]`; an axis of zero width is widened to the
    /// largest width (or 1) starting at `lo`.
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, level: u32) -> Result<Self> {
        let n = lo.len();
        if n == 0 || hi.len() != n {
            return Err(Error::InvalidInput("box corners must share a positive dimension".into()));
        }
        let widest = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max);
        let fallback = if widest > 0.0 { widest } else { 1.0 };
        let cells = (1u64 << level) as f64;
        let step = lo
            .iter()
            .zip(&hi)
            .map(|(a, b)| {
                let w = b - a;
                (if w > 1e-12 * fallback { w } else { fallback }) / cells
            })
            .collect();
        Ok(GridComplex { lo, step, topo: topology(n, level)? })
    }

    pub fn for_chain(chain: &PolyhedralChain, level: u32) -> Result<Self> {
        let (lo, hi) = chain
            .bbox()
            .unwrap_or_else(|| (vec![0.0; chain.ambient_dim()], vec![1.0; chain.ambient_dim()]));
        Self::new(lo, hi, level)
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    pub fn level(&self) -> u32 {
        self.topo.level
    }

    pub fn ambient_dim(&self) -> usize {
        self.topo.n
    }

    pub fn num_faces(&self, d: usize) -> usize {
        self.topo.faces[d].len()
    }

    fn lattice(&self, idx: usize) -> Vec<usize> {
        let per_axis = self.topo.cells + 1;
        let mut rest = idx;
        (0..self.topo.n)
            .map(|_| {
                let c = rest % per_axis;
                rest /= per_axis;
                c
            })
            .collect()
    }

    pub fn vertex(&self, idx: usize) -> Vec<f64> {
        self.lattice(idx).iter().enumerate().map(|(a, &c)| self.lo[a] + self.step[a] * c as f64).collect()
    }

    pub fn face_vertices(&self, d: usize, f: usize) -> Vec<Vec<f64>> {
        self.topo.faces[d][f].iter().map(|&v| self.vertex(v)).collect()
    }

    pub fn face_volume(&self, d: usize, f: usize) -> f64 {
        linalg::simplex_volume(&self.face_vertices(d, f))
    }

    /// Nearest grid vertex (clamped to the box) and its index.
    pub fn snap(&self, x: &[f64]) -> (usize, Vec<f64>) {
        let per_axis = self.topo.cells + 1;
        let mut idx = 0;
        let mut mul = 1;
        let mut p = Vec::with_capacity(x.len());
        for a in 0..self.topo.n {
            let c = ((x[a] - self.lo[a]) / self.step[a]).round().clamp(0.0, self.topo.cells as f64) as usize;
            idx += c * mul;
            mul *= per_axis;
            p.push(self.lo[a] + self.step[a] * c as f64);
        }
        (idx, p)
    }

    fn index_of(&self, lattice: &[usize]) -> usize {
        let per_axis = self.topo.cells + 1;
        lattice.iter().rev().fold(0, |acc, c| acc * per_axis + c)
    }

    /// Grid-edge path from vertex `a` to vertex `b` following the rounded
    /// straight line, one piece per lattice step. A mixed-sign step goes up
    /// first, then down, so every piece is a union of grid edges.
    fn staircase(&self, a: usize, b: usize) -> Vec<Vec<usize>> {
        let la = self.lattice(a);
        let lb = self.lattice(b);
        let d: Vec<i64> = la.iter().zip(&lb).map(|(x, y)| *y as i64 - *x as i64).collect();
        let steps = d.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0);
        let at = |t: u64| -> Vec<i64> {
            la.iter().zip(&d).map(|(x, dx)| *x as i64 + (*dx as f64 * t as f64 / steps as f64).round() as i64).collect()
        };
        let to_index = |p: &[i64]| self.index_of(&p.iter().map(|c| *c as usize).collect::<Vec<_>>());
        let mut pieces = Vec::with_capacity(steps as usize);
        let mut prev = at(0);
        for t in 1..=steps {
            let next = at(t);
            let up: Vec<i64> = prev.iter().zip(&next).map(|(p, q)| (*p).max(*q)).collect();
            let mut piece = vec![to_index(&prev)];
            if up != prev && up != next {
                piece.push(to_index(&up));
            }
            piece.push(to_index(&next));
            pieces.push(piece);
            prev = next;
        }
        pieces
    }

    /// Express `chain` (after snapping vertices) as coefficients on m-faces.
    pub fn embed(&self, chain: &PolyhedralChain) -> Result<Embedding> {
        let m = chain.dim();
        let nf = self.num_faces(m);
        let mut coeffs = vec![0.0; nf];
        let mut snap_cost = 0.0;
        let mut max_disp: f64 = 0.0;
        let scale = self.step.iter().fold(0.0f64, |a, b| a.max(*b));
        let tol = 1e-9 * scale;
        let face_boxes: Vec<(Vec<f64>, Vec<f64>)> = (0..nf).map(|f| bbox(&self.face_vertices(m, f))).collect();

        for (ti, term) in chain.terms().iter().enumerate() {
            let orig: Vec<Vec<f64>> = term.simplex.vertices().iter().map(|p| p.0.clone()).collect();
            let snapped: Vec<Vec<f64>> = orig.iter().map(|v| self.snap(v).1).collect();
            let disp = orig.iter().zip(&snapped).map(|(a, b)| linalg::dist(a, b)).fold(0.0, f64::max);
            max_disp = max_disp.max(disp);
            if disp > 0.0 {
                snap_cost += term.multiplicity * prism_mass(&orig, &snapped);
            }
            let vol = linalg::simplex_volume(&snapped);
            let longest = max_edge(&snapped);
            if m > 0 && vol <= 1e-12 * longest.powi(m as i32).max(f64::MIN_POSITIVE) {
                // collapsed by snapping: contributes nothing, the prism pays for it
                continue;
            }
            if m == 0 {
                let (idx, _) = self.snap(&orig[0]);
                let f = self.topo.face_index(0, &[idx]).expect("every lattice point is a vertex");
                coeffs[f] += term.signed_multiplicity();
                continue;
            }
            let frame: Vec<Vec<f64>> = snapped[1..].iter().map(|v| linalg::sub(v, &snapped[0])).collect();
            let sbox = bbox(&snapped);
            let mut covered = 0.0;
            let mut local = Vec::new();
            for f in 0..nf {
                let (flo, fhi) = &face_boxes[f];
                if (0..flo.len()).any(|a| flo[a] < sbox.0[a] - tol || fhi[a] > sbox.1[a] + tol) {
                    continue;
                }
                let fv = self.face_vertices(m, f);
                if !fv.iter().all(|p| inside_simplex(p, &snapped, &frame, tol)) {
                    continue;
                }
                let fframe: Vec<Vec<f64>> = fv[1..].iter().map(|v| linalg::sub(v, &fv[0])).collect();
                let s = linalg::cross_gram_det(&fframe, &frame).signum();
                local.push((f, s * term.multiplicity));
                covered += linalg::simplex_volume(&fv);
            }
            if (covered - vol).abs() <= 1e-9 * vol {
                for (f, c) in local {
                    coeffs[f] += c;
                }
            } else if m == 1 {
                // route along grid edges; step t is filled by the fan from the
                // line point x_t over x_t, path piece, x_{t+1}
                let pieces = self.staircase(self.snap(&orig[0]).0, self.snap(&orig[1]).0);
                let steps = pieces.len() as f64;
                let line = |t: usize| -> Vec<f64> {
                    snapped[0].iter().zip(&snapped[1]).map(|(p, q)| p + (q - p) * t as f64 / steps).collect()
                };
                for (t, piece) in pieces.iter().enumerate() {
                    for w in piece.windows(2) {
                        let Some(f) = self.topo.face_index(1, &[w[0].min(w[1]), w[0].max(w[1])]) else {
                            return Err(Error::NotEmbeddable(format!("term {ti}: staircase left the grid")));
                        };
                        coeffs[f] += if w[0] < w[1] { term.multiplicity } else { -term.multiplicity };
                    }
                    let mut poly = vec![line(t)];
                    poly.extend(piece.iter().map(|&v| self.vertex(v)));
                    poly.push(line(t + 1));
                    for i in 1..poly.len() - 1 {
                        let tri = [poly[0].clone(), poly[i].clone(), poly[i + 1].clone()];
                        snap_cost += term.multiplicity * linalg::simplex_volume(&tri);
                    }
                }
            } else {
                return Err(Error::NotEmbeddable(format!(
                    "term {ti}: grid faces cover {covered:e} of volume {vol:e} at level {}",
                    self.level()
                )));
            }
        }
        Ok(Embedding { coeffs, snap_cost, max_displacement: max_disp })
    }
}

fn bbox(points: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = points[0].len();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for p in points {
        for a in 0..n {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    (lo, hi)
}

fn max_edge(v: &[Vec<f64>]) -> f64 {
    let mut l: f64 = 0.0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            l = l.max(linalg::dist(&v[i], &v[j]));
        }
    }
    l
}

fn inside_simplex(p: &[f64], verts: &[Vec<f64>], frame: &[Vec<f64>], tol: f64) -> bool {
    let d = linalg::sub(p, &verts[0]);
    let g = linalg::gram(frame);
    let rhs: Vec<f64> = frame.iter().map(|e| linalg::dot(e, &d)).collect();
    let Some(mu) = linalg::solve(&g, &rhs) else {
        return false;
    };
    let mut resid = d.clone();
    for (c, e) in mu.iter().zip(frame) {
        for (r, x) in resid.iter_mut().zip(e) {
            *r -= c * x;
        }
    }
    if linalg::norm(&resid) > tol {
        return false;
    }
    let scale = frame.iter().map(|e| linalg::norm(e)).fold(0.0, f64::max);
    let rel = tol / scale.max(f64::MIN_POSITIVE);
    let lam0 = 1.0 - mu.iter().sum::<f64>();
    lam0 >= -rel && mu.iter().all(|x| *x >= -rel)
}

/// Mass of the prism chains `P(sigma) + P(boundary sigma)` joining a simplex to
/// its vertex-wise image; `sigma - sigma'` is the boundary of the first plus
/// the second, so this bounds the flat norm of the difference.
pub fn prism_mass(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    fn prism(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
        let m = a.len() - 1;
        (0..=m)
            .map(|j| {
                let mut v: Vec<Vec<f64>> = a[..=j].to_vec();
                v.extend_from_slice(&b[j..]);
                linalg::simplex_volume(&v)
            })
            .sum()
    }
    let mut total = prism(a, b);
    if a.len() > 1 {
        for omit in 0..a.len() {
            let fa: Vec<Vec<f64>> = a.iter().enumerate().filter(|(i, _)| *i != omit).map(|(_, v)| v.clone()).collect();
            let fb: Vec<Vec<f64>> = b.iter().enumerate().filter(|(i, _)| *i != omit).map(|(_, v)| v.clone()).collect();
            total += prism(&fa, &fb);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_squares_to_zero() {
        for (n, k) in [(2, 2), (3, 1), (4, 0)] {
            let t = topology(n, k).unwrap();
            for d in 2..=n {
                let nf = t.faces[d - 2].len();
                for col in &t.boundary[d] {
                    let mut acc = vec![0i32; nf];
                    for &(e, s) in col {
                        for &(g, s2) in &t.boundary[d - 1][e] {
                            acc[g] += (s * s2) as i32;
                        }
                    }
                    assert!(acc.iter().all(|x| *x == 0));
                }
            }
        }
    }

    #[test]
    fn unit_square_counts() {
        let t = topology(2, 0).unwrap();
        assert_eq!(t.faces[0].len(), 4);
        assert_eq!(t.faces[1].len(), 5);
        assert_eq!(t.faces[2].len(), 2);
        let t = topology(2, 3).unwrap();
        assert_eq!(t.faces[1].len(), 3 * 64 + 2 * 8);
    }

    #[test]
    fn coarse_faces_are_unions_of_fine_faces() {
        let fine = GridComplex::new(vec![0.0, 0.0], vec![1.0, 2.0], 2).unwrap();
        let coarse = GridComplex::new(vec![0.0, 0.0], vec![1.0, 2.0], 1).unwrap();
        for d in 1..=2 {
            for f in 0..coarse.num_faces(d) {
                let v = coarse.face_vertices(d, f);
                let c = PolyhedralChain::from_simplices(2, d, vec![(v, 1.0)]).unwrap();
                let e = fine.embed(&c).unwrap();
                assert_eq!(e.snap_cost, 0.0);
            }
        }
    }

    #[test]
    fn prism_of_translate() {
        // unit segment moved by h: prism area h plus two end segments of length h
        let a = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        let b = vec![vec![0.0, 0.1], vec![1.0, 0.1]];
        assert!((prism_mass(&a, &b) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn anti_diagonal_goes_through_a_staircase() {
        let g = GridComplex::new(vec![0.0, 0.0], vec![1.0, 1.0], 1).unwrap();
        let c = PolyhedralChain::from_simplices(2, 1, vec![(vec![vec![0.0, 1.0], vec![1.0, 0.0]], 2.0)]).unwrap();
        let e = g.embed(&c).unwrap();
        // two up-down steps of edge length 0.5, each cone triangle of area 1/8
        let used: f64 = e.coeffs.iter().map(|c| c.abs()).sum();
        assert_eq!(used, 2.0 * 4.0);
        assert!((e.snap_cost - 2.0 * 2.0 * 0.125).abs() < 1e-12);
        let net: f64 = (0..g.num_faces(1))
            .map(|f| {
                let v = g.face_vertices(1, f);
                e.coeffs[f] * (v[1][0] - v[0][0])
            })
            .sum();
        assert!((net - 2.0).abs() < 1e-12);
    }
}
