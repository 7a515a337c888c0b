//! Haar-random m-planes, 0-dimensional slices of polyhedral m-chains by
//! orthogonal projections, and Monte-Carlo checks of the integral-geometric
//! identity `M_H(R) = c(n,m) int int M_H(<R, p_V, y>) dy dV`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::chain::{PolyhedralChain, Point, Simplex, WeightedSimplex, ZeroChain};
use crate::error::{Error, Result};
use crate::flat::flat_zero;
use crate::functionals::h_mass_zero;
use crate::hfunc::HSpec;
use crate::linalg;
use crate::rng::{self, Stream};

/// Barycentric coordinates closer than this to 0 make a slice non-generic.
pub const GENERIC_TOL: f64 = 1e-10;
const MAX_PERTURBATIONS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MPlane {
    n: usize,
    basis: Vec<Vec<f64>>,
}

impl MPlane {
    pub fn new(basis: Vec<Vec<f64>>) -> Result<Self> {
        let n = basis.first().map(|b| b.len()).ok_or_else(|| Error::InvalidInput("plane needs a basis".into()))?;
        if basis.len() > n {
            return Err(Error::InvalidInput("more basis vectors than dimensions".into()));
        }
        for (i, a) in basis.iter().enumerate() {
            if a.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: a.len() });
            }
            for (j, b) in basis.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                if (linalg::dot(a, b) - want).abs() > 1e-12 {
                    return Err(Error::InvalidInput("plane basis must be orthonormal".into()));
                }
            }
        }
        Ok(MPlane { n, basis })
    }

    /// Span of the first `m` coordinate axes.
    pub fn coordinate(n: usize, m: usize) -> Self {
        let basis = (0..m).map(|i| (0..n).map(|k| if k == i { 1.0 } else { 0.0 }).collect()).collect();
        MPlane { n, basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// Coordinates of `p_V(x)` in the basis.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        self.basis.iter().map(|b| linalg::dot(b, x)).collect()
    }
}

/// Orthonormalised span of `m` Gaussian vectors; the identity frame when m = n.
pub fn haar_sample<R: Rng>(n: usize, m: usize, rng: &mut R) -> Result<MPlane> {
    if m == 0 || m > n {
        return Err(Error::InvalidInput(format!("need 1 <= m <= n, got m={m}, n={n}")));
    }
    if m == n {
        return Ok(MPlane::coordinate(n, n));
    }
    for _ in 0..100 {
        let raw: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect()).collect();
        if let Some(basis) = linalg::orthonormalize(&raw, 1e-8) {
            return Ok(MPlane { n, basis });
        }
    }
    Err(Error::NumericalBreakdown("Gaussian draws kept degenerating".into()))
}

pub fn haar_sample_seeded(n: usize, m: usize, seed: u64) -> Result<MPlane> {
    haar_sample(n, m, &mut rng::stream(seed, Stream::Planes))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceResult {
    pub y: Vec<f64>,
    pub zero_chain: ZeroChain,
}

/// `<p, p_V, y>`: one atom per simplex whose projection contains `y` in its
/// interior, weighted by the multiplicity times the sign of the projected
/// orientation frame in the V-basis.
pub fn slice_chain(p: &PolyhedralChain, v: &MPlane, y: &[f64]) -> Result<SliceResult> {
    let m = v.dim();
    if p.ambient_dim() != v.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: v.ambient_dim(), found: p.ambient_dim() });
    }
    if p.dim() != m {
        return Err(Error::DimensionMismatch { expected: m, found: p.dim() });
    }
    if y.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: y.len() });
    }
    let mut atoms = Vec::new();
    for t in p.terms() {
        let verts = t.simplex.vertices();
        let proj: Vec<Vec<f64>> = verts.iter().map(|x| v.project(x)).collect();
        let mut a = DMatrix::zeros(m, m);
        let mut scale: f64 = 0.0;
        for j in 0..m {
            for i in 0..m {
                a[(i, j)] = proj[j + 1][i] - proj[0][i];
                scale = scale.max(a[(i, j)].abs());
            }
        }
        let det = a.determinant();
        let rhs = linalg::sub(y, &proj[0]);
        if det.abs() <= 1e-12 * scale.powi(m as i32).max(f64::MIN_POSITIVE) {
            // projection collapses the simplex; only a point projection can
            // contain y without y sitting on a lower-dimensional set
            if m == 1 && linalg::norm(&rhs) <= GENERIC_TOL * (1.0 + scale) {
                return Err(Error::NonGenericSlice);
            }
            continue;
        }
        let mu = linalg::solve(&a, &rhs).ok_or_else(|| Error::NumericalBreakdown("singular projected simplex".into()))?;
        let l0 = 1.0 - mu.iter().sum::<f64>();
        let lambdas: Vec<f64> = std::iter::once(l0).chain(mu.iter().copied()).collect();
        let min = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
        if min.abs() <= GENERIC_TOL {
            return Err(Error::NonGenericSlice);
        }
        if min < 0.0 {
            continue;
        }
        let mut x = vec![0.0; v.ambient_dim()];
        for (l, vert) in lambdas.iter().zip(verts) {
            for (xi, vi) in x.iter_mut().zip(vert.iter()) {
                *xi += l * vi;
            }
        }
        atoms.push((Point::new(x)?, t.signed_multiplicity() * det.signum()));
    }
    Ok(SliceResult { y: y.to_vec(), zero_chain: ZeroChain::new(v.ambient_dim(), atoms)?.canonical() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntGeoEstimate {
    /// Average over V of `int M_H(slice) dy` (no constant).
    pub raw: f64,
    pub std_error: f64,
    pub samples: usize,
    /// Base points that hit a projected face and were perturbed.
    pub rejections: usize,
    /// `c * raw` and its standard error when a constant was supplied.
    pub calibrated: Option<(f64, f64)>,
    /// Per-sample values `|box| * M_H(slice)`.
    #[serde(skip)]
    pub values: Vec<f64>,
}

/// Monte-Carlo estimate of `int_Gr int_V M_H(<p, p_V, y>) dy dV` with V Haar
/// distributed and y uniform on the bounding box of the projected vertices.
pub fn intgeo_estimate(
    p: &PolyhedralChain,
    h: &HSpec,
    samples: usize,
    seed: u64,
    calibration: Option<(f64, f64)>,
) -> Result<IntGeoEstimate> {
    if samples < 100 {
        return Err(Error::InvalidInput(format!("need at least 100 samples, got {samples}")));
    }
    let (n, m) = (p.ambient_dim(), p.dim());
    if m == 0 {
        return Err(Error::InvalidInput("slices of 0-chains are not defined here".into()));
    }
    let mut planes = rng::stream(seed, Stream::Planes);
    let mut bases = rng::stream(seed, Stream::SliceBase);
    let mut values = Vec::with_capacity(samples);
    let mut rejections = 0;
    let diameter = p.bbox().map(|(lo, hi)| linalg::dist(&lo, &hi)).unwrap_or(0.0);
    for _ in 0..samples {
        let v = haar_sample(n, m, &mut planes)?;
        if p.is_empty() {
            values.push(0.0);
            continue;
        }
        let mut lo = vec![f64::INFINITY; m];
        let mut hi = vec![f64::NEG_INFINITY; m];
        for t in p.terms() {
            for x in t.simplex.vertices() {
                for (k, c) in v.project(x).into_iter().enumerate() {
                    lo[k] = lo[k].min(c);
                    hi[k] = hi[k].max(c);
                }
            }
        }
        let measure: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
        let mut y: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| a + (b - a) * bases.random::<f64>()).collect();
        let mut attempt = 0;
        let slice = loop {
            match slice_chain(p, &v, &y) {
                Ok(s) => break s,
                Err(Error::NonGenericSlice) if attempt < MAX_PERTURBATIONS => {
                    rejections += 1;
                    attempt += 1;
                    for c in y.iter_mut() {
                        *c += 1e-9 * diameter.max(1.0) * (2.0 * bases.random::<f64>() - 1.0);
                    }
                }
                Err(e) => return Err(e),
            }
        };
        values.push(measure * h_mass_zero(&slice.zero_chain, h));
    }
    let count = values.len() as f64;
    let raw = values.iter().sum::<f64>() / count;
    let var = values.iter().map(|x| (x - raw).powi(2)).sum::<f64>() / (count - 1.0);
    let std_error = (var / count).sqrt();
    let calibrated = calibration.map(|(c, c_se)| (c * raw, ((c * std_error).powi(2) + (raw * c_se).powi(2)).sqrt()));
    Ok(IntGeoEstimate { raw, std_error, samples, rejections, calibrated, values })
}

/// Kuhn triangulation of `[0,1]^m x {0}` in R^n, positively oriented.
pub fn unit_cube_chain(n: usize, m: usize) -> Result<PolyhedralChain> {
    if m == 0 || m > n {
        return Err(Error::InvalidInput(format!("need 1 <= m <= n, got m={m}, n={n}")));
    }
    let mut terms = Vec::new();
    let mut perm: Vec<usize> = (0..m).collect();
    loop {
        let mut x = vec![0.0; n];
        let mut verts = vec![Point::new(x.clone())?];
        for &axis in &perm {
            x[axis] = 1.0;
            verts.push(Point::new(x.clone())?);
        }
        terms.push(WeightedSimplex::new(Simplex::with_sign(verts, permutation_sign(&perm))?, 1.0)?);
        if !next_permutation(&mut perm) {
            break;
        }
    }
    PolyhedralChain::new(n, m, terms)
}

fn permutation_sign(p: &[usize]) -> i8 {
    let mut inversions = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else { return false };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("pivot has a successor");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub c: f64,
    pub std_error: f64,
    /// 95% normal interval from the delta method.
    pub ci: (f64, f64),
    pub raw: IntGeoEstimate,
}

/// `c(n,m) = M(Q) / raw` for the unit m-cube `Q`.
pub fn calibrate_constant(n: usize, m: usize, samples: usize, seed: u64) -> Result<Calibration> {
    let cube = unit_cube_chain(n, m)?;
    let raw = intgeo_estimate(&cube, &HSpec::abs(), samples, seed, None)?;
    let c = 1.0 / raw.raw;
    let std_error = raw.std_error / (raw.raw * raw.raw);
    Ok(Calibration { c, std_error, ci: (c - 1.96 * std_error, c + 1.96 * std_error), raw })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallCheck {
    pub center: Vec<f64>,
    pub radius: f64,
    pub target_multiplicity: f64,
    /// Largest `|theta(x) - sum of T_j in the ball|` over the tail.
    pub tail_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LscReport {
    pub flat_distances: Vec<f64>,
    pub flat_converging: bool,
    pub balls: Vec<BallCheck>,
    pub multiplicities_converge: bool,
    pub target_h_mass: f64,
    pub tail_min_h_mass: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Numerical version of the 0-dimensional lower semicontinuity argument:
/// flat convergence, convergence of the multiplicity in disjoint balls
/// around the target atoms, and `M_H(T) <= min_tail M_H(T_j) + tol`.
/// The tail is the last quarter of the sequence.
pub fn lsc_slice_check(sequence: &[ZeroChain], target: &ZeroChain, h: &HSpec, tol: f64) -> Result<LscReport> {
    if sequence.is_empty() {
        return Err(Error::InvalidInput("empty sequence".into()));
    }
    let target = target.canonical();
    let flat_distances = sequence.iter().map(|t| flat_zero(&target.sub(t)?)).collect::<Result<Vec<_>>>()?;
    let tail_start = sequence.len() - sequence.len().div_ceil(4);
    let first = flat_distances[0];
    let last = *flat_distances.last().unwrap();
    let tail_monotone = flat_distances[tail_start..].windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let flat_converging = last <= 1e-12 || (tail_monotone && last <= 0.5 * first);

    let atoms = target.atoms();
    let mut min_sep = f64::INFINITY;
    for i in 0..atoms.len() {
        for j in i + 1..atoms.len() {
            min_sep = min_sep.min(linalg::dist(&atoms[i].0, &atoms[j].0));
        }
    }
    let radius = if min_sep.is_finite() { 0.25 * min_sep } else { 0.5 };
    let balls: Vec<BallCheck> = atoms
        .iter()
        .map(|(x, w)| {
            let tail_error = sequence[tail_start..]
                .iter()
                .map(|t| (w - t.restrict_ball(x, radius).total()).abs())
                .fold(0.0, f64::max);
            BallCheck { center: x.to_vec(), radius, target_multiplicity: *w, tail_error }
        })
        .collect();
    let multiplicities_converge = balls.iter().all(|b| b.tail_error <= 1e-9 * (1.0 + b.target_multiplicity.abs()));
    let target_h_mass = h_mass_zero(&target, h);
    let tail_min_h_mass =
        sequence[tail_start..].iter().map(|t| h_mass_zero(t, h)).fold(f64::INFINITY, f64::min);
    Ok(LscReport {
        flat_distances,
        flat_converging,
        balls,
        multiplicities_converge,
        target_h_mass,
        tail_min_h_mass,
        tol,
        passed: flat_converging && multiplicities_converge && target_h_mass <= tail_min_h_mass + tol,
    })
}
