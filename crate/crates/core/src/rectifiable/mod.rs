//! Rectifiable m-currents given as finitely many Lipschitz graph patches with
//! a multiplicity function, and the constructions that approximate them by
//! polyhedral chains.

pub mod approx;
pub mod balls;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::chain::{PolyhedralChain, Point, Simplex, WeightedSimplex};
use crate::error::{Error, Result};
use crate::hfunc::HSpec;
use crate::linalg;
use crate::quadrature::{self, QuadPlan, QuadResult};

pub use approx::{poly_approximate, ApproxCertificate};
pub use balls::{blowup_ratio, select_balls, Ball, BallSelection};

/// Membership tolerance for points on a patch, relative to the patch scale.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Interval(f64, f64),
    /// Convex polygon, counter-clockwise.
    Polygon(Vec<[f64; 2]>),
}

/// Height of the graph along the first normal of the frame.
#[derive(Debug, Clone, PartialEq)]
pub enum Graph {
    Zero,
    /// `g(z) = sum c_k z^k` (m = 1).
    Poly(Vec<f64>),
    /// `g(z) = sqrt(r^2 - |z|^2)`.
    Sphere(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Theta {
    Const(f64),
    /// Piecewise constant on the first chart coordinate: `values[i]` on
    /// `[edges[i], edges[i+1])`.
    Cells { edges: Vec<f64>, values: Vec<f64> },
    /// `below` for `z_1 < at`, `above` for `z_1 > at`, the smaller one at `at`.
    Jump { at: f64, below: f64, above: f64 },
    /// `a + b z_1`.
    Affine { a: f64, b: f64 },
}

impl Theta {
    pub fn at(&self, z: &[f64]) -> f64 {
        match self {
            Theta::Const(c) => *c,
            Theta::Cells { edges, values } => {
                let x = z[0];
                let i = edges.partition_point(|e| *e <= x);
                let i = i.clamp(1, values.len());
                // a shared edge takes the smaller neighbour
                if i < edges.len() && edges[i - 1] == x && i >= 2 {
                    return values[i - 1].min(values[i - 2]);
                }
                values[i - 1]
            }
            Theta::Jump { at, below, above } => {
                if z[0] < *at {
                    *below
                } else if z[0] > *at {
                    *above
                } else {
                    below.min(*above)
                }
            }
            Theta::Affine { a, b } => a + b * z[0],
        }
    }

    /// Discontinuities in the first chart coordinate.
    pub fn breaks(&self) -> Vec<f64> {
        match self {
            Theta::Cells { edges, .. } => edges.clone(),
            Theta::Jump { at, .. } => vec![*at],
            _ => Vec::new(),
        }
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Theta::Const(_))
    }

    fn parse(s: &str, base: Option<&Path>) -> Result<Theta> {
        let bad = || Error::Parse(format!("unrecognised theta spec {s:?}"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        if let Some(v) = s.strip_prefix("const:") {
            return Ok(Theta::Const(num(v)?));
        }
        if let Some(path) = s.strip_prefix("grid:") {
            let p = match base {
                Some(b) => b.join(path),
                None => Path::new(path).to_path_buf(),
            };
            let text = std::fs::read_to_string(&p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            #[derive(Deserialize)]
            struct CellsJson {
                edges: Vec<f64>,
                values: Vec<f64>,
            }
            let c: CellsJson = serde_json::from_str(&text)?;
            return Ok(Theta::Cells { edges: c.edges, values: c.values });
        }
        if let Some(rest) = s.strip_prefix("expr:") {
            let parts: Vec<&str> = rest.split(':').collect();
            return match parts.as_slice() {
                ["jump", at, below, above] => Ok(Theta::Jump { at: num(at)?, below: num(below)?, above: num(above)? }),
                ["affine", a, b] => Ok(Theta::Affine { a: num(a)?, b: num(b)? }),
                _ => Err(bad()),
            };
        }
        Err(bad())
    }

    fn render(&self) -> String {
        match self {
            Theta::Const(c) => format!("const:{c}"),
            Theta::Jump { at, below, above } => format!("expr:jump:{at}:{below}:{above}"),
            Theta::Affine { a, b } => format!("expr:affine:{a}:{b}"),
            Theta::Cells { .. } => "grid:<inline>".into(),
        }
    }
}

impl Graph {
    fn value(&self, z: &[f64]) -> f64 {
        match self {
            Graph::Zero => 0.0,
            Graph::Poly(c) => c.iter().rev().fold(0.0, |acc, ck| acc * z[0] + ck),
            Graph::Sphere(r) => (r * r - z.iter().map(|x| x * x).sum::<f64>()).max(0.0).sqrt(),
        }
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        match self {
            Graph::Zero => vec![0.0; z.len()],
            Graph::Poly(c) => {
                let mut d = 0.0;
                for k in (1..c.len()).rev() {
                    d = d * z[0] + k as f64 * c[k];
                }
                vec![d]
            }
            Graph::Sphere(_) => {
                let g = self.value(z);
                z.iter().map(|x| -x / g).collect()
            }
        }
    }

    fn parse(s: &str) -> Result<Graph> {
        let bad = || Error::Parse(format!("unrecognised graph spec {s:?}"));
        if s == "zero" {
            return Ok(Graph::Zero);
        }
        if let Some(rest) = s.strip_prefix("poly:") {
            let c = rest.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<Vec<_>>>()?;
            return Ok(Graph::Poly(c));
        }
        if let Some(rest) = s.strip_prefix("sphere:") {
            return Ok(Graph::Sphere(rest.trim().parse::<f64>().map_err(|_| bad())?));
        }
        Err(bad())
    }

    fn render(&self) -> String {
        match self {
            Graph::Zero => "zero".into(),
            Graph::Poly(c) => format!("poly:{}", c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")),
            Graph::Sphere(r) => format!("sphere:{r}"),
        }
    }

    fn is_affine(&self) -> bool {
        match self {
            Graph::Zero => true,
            Graph::Poly(c) => c.iter().skip(2).all(|x| *x == 0.0),
            Graph::Sphere(_) => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RectifiablePatch {
    pub m: usize,
    pub n: usize,
    pub domain: Domain,
    pub graph: Graph,
    /// Orthonormal rows: m tangent directions, then normals.
    pub frame: Vec<Vec<f64>>,
    pub origin: Vec<f64>,
    pub theta: Theta,
    pub lipschitz: f64,
    pub orientation: i8,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatchJson {
    pub m: usize,
    pub n: usize,
    pub domain: Vec<Vec<f64>>,
    pub graph: String,
    pub frame: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<Vec<f64>>,
    pub theta: String,
    pub lipschitz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<i8>,
}

impl RectifiablePatch {
    pub fn new(
        domain: Domain,
        graph: Graph,
        frame: Vec<Vec<f64>>,
        origin: Vec<f64>,
        theta: Theta,
        lipschitz: f64,
        orientation: i8,
    ) -> Result<Self> {
        let m = match &domain {
            Domain::Interval(..) => 1,
            Domain::Polygon(_) => 2,
        };
        let n = origin.len();
        let p = RectifiablePatch {
            m,
            n,
            domain: normalise_domain(domain)?,
            graph,
            frame,
            origin,
            theta,
            lipschitz,
            orientation: if orientation < 0 { -1 } else { 1 },
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        let (m, n) = (self.m, self.n);
        if m > n || n == 0 {
            return Err(Error::InvalidInput(format!("patch dimensions m={m}, n={n} are invalid")));
        }
        let needed = if matches!(self.graph, Graph::Zero) { m } else { m + 1 };
        if self.frame.len() < needed || needed > n {
            return Err(Error::InvalidInput(format!("frame needs {needed} rows in R^{n}")));
        }
        for (i, a) in self.frame.iter().enumerate() {
            if a.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: a.len() });
            }
            for (j, b) in self.frame.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                if (linalg::dot(a, b) - want).abs() > 1e-9 {
                    return Err(Error::InvalidInput("frame rows must be orthonormal".into()));
                }
            }
        }
        if matches!(self.graph, Graph::Poly(_)) && m != 1 {
            return Err(Error::InvalidInput("polynomial graphs are only supported for m = 1".into()));
        }
        if let Theta::Cells { edges, values } = &self.theta {
            if m != 1 || edges.len() != values.len() + 1 || edges.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidInput("theta cells need m = 1 and increasing edges, one more than values".into()));
            }
        }
        if !(self.lipschitz.is_finite() && self.lipschitz >= 0.0) {
            return Err(Error::InvalidInput("Lipschitz constant must be finite and nonnegative".into()));
        }
        let samples = self.sample_points(64);
        for z in &samples {
            if let Graph::Sphere(r) = self.graph {
                if linalg::norm(z) >= r {
                    return Err(Error::InvalidInput("sphere graph domain must stay inside the radius".into()));
                }
            }
            let t = self.theta.at(z);
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidInput(format!("theta must be positive on the domain, got {t} at {z:?}")));
            }
            let slope = linalg::norm(&self.graph.gradient(z));
            if slope > self.lipschitz * (1.0 + 1e-9) + 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "declared Lipschitz constant {} is below the slope {slope} at {z:?}",
                    self.lipschitz
                )));
            }
        }
        Ok(())
    }

    /// Points of the closed domain on a regular sampling.
    fn sample_points(&self, k: usize) -> Vec<Vec<f64>> {
        match &self.domain {
            Domain::Interval(a, b) => (0..=k).map(|i| vec![a + (b - a) * i as f64 / k as f64]).collect(),
            Domain::Polygon(poly) => {
                let (lo, hi) = polygon_bbox(poly);
                let mut out = Vec::new();
                for i in 0..=k {
                    for j in 0..=k {
                        let z = [lo[0] + (hi[0] - lo[0]) * i as f64 / k as f64, lo[1] + (hi[1] - lo[1]) * j as f64 / k as f64];
                        if polygon_contains(poly, &z, 0.0) {
                            out.push(z.to_vec());
                        }
                    }
                }
                out.extend(poly.iter().map(|v| v.to_vec()));
                out
            }
        }
    }

    pub fn from_json_value(v: PatchJson, base: Option<&Path>) -> Result<Self> {
        let domain = match v.m {
            1 => {
                if v.domain.len() != 1 || v.domain[0].len() != 2 {
                    return Err(Error::Parse("m = 1 domain must be [[a, b]]".into()));
                }
                Domain::Interval(v.domain[0][0], v.domain[0][1])
            }
            2 => {
                if v.domain.len() < 3 || v.domain.iter().any(|p| p.len() != 2) {
                    return Err(Error::Parse("m = 2 domain must list at least three 2D vertices".into()));
                }
                Domain::Polygon(v.domain.iter().map(|p| [p[0], p[1]]).collect())
            }
            m => return Err(Error::Unsupported(format!("patches of dimension {m}"))),
        };
        let origin = v.origin.unwrap_or_else(|| vec![0.0; v.n]);
        if origin.len() != v.n {
            return Err(Error::DimensionMismatch { expected: v.n, found: origin.len() });
        }
        let patch = Self::new(
            domain,
            Graph::parse(&v.graph)?,
            v.frame,
            origin,
            Theta::parse(&v.theta, base)?,
            v.lipschitz,
            v.orientation.unwrap_or(1),
        )?;
        if patch.m != v.m {
            return Err(Error::Parse("domain shape does not match m".into()));
        }
        Ok(patch)
    }

    pub fn to_json_value(&self) -> PatchJson {
        PatchJson {
            m: self.m,
            n: self.n,
            domain: match &self.domain {
                Domain::Interval(a, b) => vec![vec![*a, *b]],
                Domain::Polygon(p) => p.iter().map(|v| v.to_vec()).collect(),
            },
            graph: self.graph.render(),
            frame: self.frame.clone(),
            origin: Some(self.origin.clone()),
            theta: self.theta.render(),
            lipschitz: self.lipschitz,
            orientation: Some(self.orientation),
        }
    }

    /// Quarter of the unit circle from (1, 0) to (0, 1) with constant multiplicity.
    pub fn quarter_circle(theta: f64) -> Result<Self> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::new(
            Domain::Interval(-s, s),
            Graph::Sphere(1.0),
            vec![vec![-s, s], vec![s, s]],
            vec![0.0, 0.0],
            Theta::Const(theta),
            1.0,
            1,
        )
    }

    /// Unit square `[0,1]^2 x {0}` in R^3.
    pub fn flat_square(theta: f64) -> Result<Self> {
        Self::new(
            Domain::Polygon(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]),
            Graph::Zero,
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
            vec![0.0; 3],
            Theta::Const(theta),
            0.0,
            1,
        )
    }

    /// Graph of `z^2` over `[-w, w]` in R^2.
    pub fn parabola(half_width: f64, theta: f64) -> Result<Self> {
        Self::new(
            Domain::Interval(-half_width, half_width),
            Graph::Poly(vec![0.0, 0.0, 1.0]),
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![0.0, 0.0],
            Theta::Const(theta),
            2.0 * half_width,
            1,
        )
    }

    /// Segment `[0,1] x {0}` whose multiplicity jumps at 1/2.
    pub fn jump_segment(below: f64, above: f64) -> Result<Self> {
        Self::new(
            Domain::Interval(0.0, 1.0),
            Graph::Zero,
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![0.0, 0.0],
            Theta::Jump { at: 0.5, below, above },
            0.0,
            1,
        )
    }

    /// Affine segment between two points with constant multiplicity.
    pub fn segment(a: &[f64], b: &[f64], theta: f64) -> Result<Self> {
        let d = linalg::sub(b, a);
        let len = linalg::norm(&d);
        let u = linalg::scaled(&d, 1.0 / len);
        Self::new(Domain::Interval(0.0, len), Graph::Zero, vec![u], a.to_vec(), Theta::Const(theta), 0.0, 1)
    }

    pub fn is_affine(&self) -> bool {
        self.graph.is_affine()
    }

    pub fn point(&self, z: &[f64]) -> Vec<f64> {
        let mut x = self.origin.clone();
        for (a, za) in z.iter().enumerate() {
            for (xi, ei) in x.iter_mut().zip(&self.frame[a]) {
                *xi += za * ei;
            }
        }
        let g = self.graph.value(z);
        if g != 0.0 {
            for (xi, ni) in x.iter_mut().zip(&self.frame[self.m]) {
                *xi += g * ni;
            }
        }
        x
    }

    /// Partial derivatives of the parametrisation.
    pub fn tangents(&self, z: &[f64]) -> Vec<Vec<f64>> {
        let grad = self.graph.gradient(z);
        (0..self.m)
            .map(|a| {
                let mut t = self.frame[a].clone();
                if grad[a] != 0.0 {
                    for (ti, ni) in t.iter_mut().zip(&self.frame[self.m]) {
                        *ti += grad[a] * ni;
                    }
                }
                t
            })
            .collect()
    }

    /// Area factor `sqrt(1 + |grad g|^2)`.
    pub fn jacobian(&self, z: &[f64]) -> f64 {
        let g = linalg::norm(&self.graph.gradient(z));
        (1.0 + g * g).sqrt()
    }

    pub fn chart_coords(&self, x: &[f64]) -> Vec<f64> {
        let d = linalg::sub(x, &self.origin);
        (0..self.m).map(|a| linalg::dot(&d, &self.frame[a])).collect()
    }

    fn scale(&self) -> f64 {
        let mut s = linalg::norm(&self.origin).max(1.0);
        match &self.domain {
            Domain::Interval(a, b) => s = s.max(a.abs()).max(b.abs()),
            Domain::Polygon(p) => {
                for v in p {
                    s = s.max(v[0].abs()).max(v[1].abs());
                }
            }
        }
        s
    }

    /// Chart coordinates of `x` when it lies on the patch.
    pub fn locate(&self, x: &[f64]) -> std::result::Result<Vec<f64>, f64> {
        let tol = MEMBERSHIP_TOL * self.scale();
        let z = self.chart_coords(x);
        let inside = match &self.domain {
            Domain::Interval(a, b) => z[0] >= a - tol && z[0] <= b + tol,
            Domain::Polygon(p) => polygon_contains(p, &[z[0], z[1]], tol),
        };
        let off = linalg::dist(&self.point(&z), x);
        if inside && off <= tol {
            Ok(z)
        } else {
            Err(if inside { off } else { off.max(tol * 2.0) })
        }
    }

    pub fn interval(&self) -> Option<(f64, f64)> {
        match self.domain {
            Domain::Interval(a, b) => Some((a, b)),
            _ => None,
        }
    }

    /// The same patch over a sub-interval of the chart (m = 1).
    pub fn restrict_interval(&self, lo: f64, hi: f64) -> Result<Self> {
        let (a, b) = self.interval().ok_or_else(|| Error::Unsupported("interval restriction needs m = 1".into()))?;
        let (lo, hi) = (lo.max(a), hi.min(b));
        if !(hi > lo) {
            return Err(Error::InvalidInput("empty restriction".into()));
        }
        Ok(RectifiablePatch { domain: Domain::Interval(lo, hi), ..self.clone() })
    }

    /// `int_domain f(z) J(z) dz`.
    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: F, plan: &QuadPlan) -> Result<QuadResult> {
        match &self.domain {
            Domain::Interval(a, b) => {
                let g = |t: f64| f(&[t]) * self.jacobian(&[t]);
                quadrature::integrate_interval(g, *a, *b, &self.theta.breaks(), plan)
            }
            Domain::Polygon(poly) => {
                let pieces = match self.theta.breaks().as_slice() {
                    [] => vec![poly.clone()],
                    cuts => split_polygon(poly, cuts),
                };
                let plan2 = QuadPlan { max_level: plan.max_level.min(7), ..*plan };
                let mut total = QuadResult { value: 0.0, error: 0.0, level: 0 };
                for piece in pieces {
                    let tris = quadrature::fan(&piece.iter().map(|v| v.to_vec()).collect::<Vec<_>>());
                    let r = quadrature::integrate_triangles(|z| f(z) * self.jacobian(z), &tris, &plan2)?;
                    total.value += r.value;
                    total.error += r.error;
                    total.level = total.level.max(r.level);
                }
                Ok(total)
            }
        }
    }

    pub fn mass(&self, plan: &QuadPlan) -> Result<QuadResult> {
        self.integrate(|z| self.theta.at(z), plan)
    }

    pub fn h_mass(&self, h: &HSpec, plan: &QuadPlan) -> Result<QuadResult> {
        self.integrate(|z| h.eval(self.theta.at(z)), plan)
    }

    /// Exact polyhedral copy of an affine patch with constant multiplicity.
    pub fn exact_triangulation(&self) -> Result<PolyhedralChain> {
        let Theta::Const(theta) = self.theta else {
            return Err(Error::Unsupported("exact triangulation needs constant multiplicity".into()));
        };
        if !self.is_affine() {
            return Err(Error::Unsupported("exact triangulation needs an affine patch".into()));
        }
        let terms = match &self.domain {
            Domain::Interval(a, b) => {
                vec![oriented_term(vec![self.point(&[*a]), self.point(&[*b])], theta * self.orientation as f64)?]
            }
            Domain::Polygon(p) => quadrature::fan(&p.iter().map(|v| v.to_vec()).collect::<Vec<_>>())
                .into_iter()
                .map(|t| oriented_term(t.iter().map(|z| self.point(z)).collect(), theta * self.orientation as f64))
                .collect::<Result<Vec<_>>>()?,
        };
        PolyhedralChain::new(self.n, self.m, terms)
    }
}

/// Term with orientation from the sign of `w`.
pub(crate) fn oriented_term(vertices: Vec<Vec<f64>>, w: f64) -> Result<WeightedSimplex> {
    let pts = vertices.into_iter().map(Point::new).collect::<Result<Vec<_>>>()?;
    WeightedSimplex::new(Simplex::with_sign(pts, if w < 0.0 { -1 } else { 1 })?, w.abs())
}

fn normalise_domain(d: Domain) -> Result<Domain> {
    match d {
        Domain::Interval(a, b) => {
            if !(a.is_finite() && b.is_finite() && b > a) {
                return Err(Error::InvalidInput(format!("interval domain [{a}, {b}] is empty")));
            }
            Ok(Domain::Interval(a, b))
        }
        Domain::Polygon(mut p) => {
            let area = polygon_area(&p);
            if area.abs() <= 1e-14 {
                return Err(Error::InvalidInput("polygon domain has no area".into()));
            }
            if area < 0.0 {
                p.reverse();
            }
            let k = p.len();
            for i in 0..k {
                let (a, b, c) = (p[i], p[(i + 1) % k], p[(i + 2) % k]);
                let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
                if cross < -1e-12 {
                    return Err(Error::InvalidInput("polygon domain must be convex".into()));
                }
            }
            Ok(Domain::Polygon(p))
        }
    }
}

pub(crate) fn polygon_area(p: &[[f64; 2]]) -> f64 {
    let k = p.len();
    (0..k).map(|i| p[i][0] * p[(i + 1) % k][1] - p[(i + 1) % k][0] * p[i][1]).sum::<f64>() / 2.0
}

pub(crate) fn polygon_bbox(p: &[[f64; 2]]) -> ([f64; 2], [f64; 2]) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for v in p {
        for a in 0..2 {
            lo[a] = lo[a].min(v[a]);
            hi[a] = hi[a].max(v[a]);
        }
    }
    (lo, hi)
}

/// Signed distance from `z` to the inside of each edge; all must be >= -tol.
pub(crate) fn polygon_contains(p: &[[f64; 2]], z: &[f64; 2], tol: f64) -> bool {
    polygon_margin(p, z) >= -tol
}

/// Smallest distance from `z` to an edge line, negative outside.
pub(crate) fn polygon_margin(p: &[[f64; 2]], z: &[f64; 2]) -> f64 {
    let k = p.len();
    let mut margin = f64::INFINITY;
    for i in 0..k {
        let (a, b) = (p[i], p[(i + 1) % k]);
        let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
        let len = (ex * ex + ey * ey).sqrt();
        let d = (ex * (z[1] - a[1]) - ey * (z[0] - a[0])) / len;
        margin = margin.min(d);
    }
    margin
}

/// Cut a convex polygon by the vertical lines `z_1 = c`.
fn split_polygon(p: &[[f64; 2]], cuts: &[f64]) -> Vec<Vec<[f64; 2]>> {
    let mut pieces = vec![p.to_vec()];
    for &c in cuts {
        let mut next = Vec::new();
        for piece in pieces {
            for keep_left in [true, false] {
                let clipped = clip_half_plane(&piece, c, keep_left);
                if clipped.len() >= 3 && polygon_area(&clipped).abs() > 1e-15 {
                    next.push(clipped);
                }
            }
        }
        pieces = next;
    }
    pieces
}

fn clip_half_plane(p: &[[f64; 2]], c: f64, keep_left: bool) -> Vec<[f64; 2]> {
    let inside = |v: &[f64; 2]| if keep_left { v[0] <= c } else { v[0] >= c };
    let mut out = Vec::new();
    let k = p.len();
    for i in 0..k {
        let (a, b) = (p[i], p[(i + 1) % k]);
        if inside(&a) {
            out.push(a);
        }
        if inside(&a) != inside(&b) {
            let t = (c - a[0]) / (b[0] - a[0]);
            out.push([c, a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

/// Finitely many patches; where they overlap, the first one counts.
#[derive(Debug, Clone, PartialEq)]
pub struct RectifiableCurrent {
    pub patches: Vec<RectifiablePatch>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum CurrentJson {
    Many { patches: Vec<PatchJson> },
    One(PatchJson),
}

impl RectifiableCurrent {
    pub fn new(patches: Vec<RectifiablePatch>) -> Result<Self> {
        if let Some(first) = patches.first() {
            if patches.iter().any(|p| p.m != first.m || p.n != first.n) {
                return Err(Error::InvalidInput("all patches must share m and n".into()));
            }
        } else {
            return Err(Error::InvalidInput("a current needs at least one patch".into()));
        }
        Ok(RectifiableCurrent { patches })
    }

    pub fn single(p: RectifiablePatch) -> Self {
        RectifiableCurrent { patches: vec![p] }
    }

    pub fn m(&self) -> usize {
        self.patches[0].m
    }

    pub fn n(&self) -> usize {
        self.patches[0].n
    }

    /// Parse a single patch object or `{"patches": [...]}`. Grid files are
    /// resolved relative to `base`.
    pub fn from_json(s: &str, base: Option<&Path>) -> Result<Self> {
        let v: CurrentJson = serde_json::from_str(s)?;
        let patches = match v {
            CurrentJson::One(p) => vec![RectifiablePatch::from_json_value(p, base)?],
            CurrentJson::Many { patches } => {
                patches.into_iter().map(|p| RectifiablePatch::from_json_value(p, base)).collect::<Result<Vec<_>>>()?
            }
        };
        Self::new(patches)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text, path.parent())
    }

    pub fn to_json(&self) -> String {
        let v = CurrentJson::Many { patches: self.patches.iter().map(|p| p.to_json_value()).collect() };
        serde_json::to_string_pretty(&v).expect("patch serializes")
    }

    /// First patch containing `x`, with chart coordinates.
    pub fn owner(&self, x: &[f64]) -> Result<(usize, Vec<f64>)> {
        let mut best = f64::INFINITY;
        for (i, p) in self.patches.iter().enumerate() {
            match p.locate(x) {
                Ok(z) => return Ok((i, z)),
                Err(d) => best = best.min(d),
            }
        }
        Err(Error::NotOnCurrent(best))
    }

    fn owned_by(&self, i: usize, x: &[f64]) -> bool {
        !self.patches[..i].iter().any(|p| p.locate(x).is_ok())
    }

    fn integrate_each<F: Fn(&RectifiablePatch, &[f64]) -> f64>(&self, f: F, plan: &QuadPlan) -> Result<QuadResult> {
        let mut total = QuadResult { value: 0.0, error: 0.0, level: 0 };
        for (i, p) in self.patches.iter().enumerate() {
            let r = if i == 0 {
                p.integrate(|z| f(p, z), plan)?
            } else {
                p.integrate(|z| if self.owned_by(i, &p.point(z)) { f(p, z) } else { 0.0 }, plan)?
            };
            total.value += r.value;
            total.error += r.error;
            total.level = total.level.max(r.level);
        }
        Ok(total)
    }

    pub fn mass(&self, plan: &QuadPlan) -> Result<QuadResult> {
        self.integrate_each(|p, z| p.theta.at(z), plan)
    }

    pub fn h_mass(&self, h: &HSpec, plan: &QuadPlan) -> Result<QuadResult> {
        self.integrate_each(|p, z| h.eval(p.theta.at(z)), plan)
    }

    pub fn theta_at(&self, x: &[f64]) -> Result<f64> {
        let (i, z) = self.owner(x)?;
        Ok(self.patches[i].theta.at(&z))
    }
}

/// `[[B(x, rho) cap pi_x, tau(x), theta(x)]]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TangentDisc {
    pub center: Vec<f64>,
    pub radius: f64,
    /// Oriented orthonormal basis of the tangent plane.
    pub plane: Vec<Vec<f64>>,
    pub theta: f64,
}

impl TangentDisc {
    pub fn mass(&self) -> f64 {
        self.theta * linalg::unit_ball_volume(self.plane.len()) * self.radius.powi(self.plane.len() as i32)
    }

    /// Inscribed triangulation: the diameter segment for m = 1, a regular
    /// fan with `2^q` boundary points for m = 2.
    pub fn triangulate(&self, q: u32) -> Result<PolyhedralChain> {
        let n = self.center.len();
        let at = |coef: &[f64]| {
            let mut p = self.center.clone();
            for (c, e) in coef.iter().zip(&self.plane) {
                for (pi, ei) in p.iter_mut().zip(e) {
                    *pi += self.radius * c * ei;
                }
            }
            p
        };
        match self.plane.len() {
            1 => PolyhedralChain::new(n, 1, vec![oriented_term(vec![at(&[-1.0]), at(&[1.0])], self.theta)?]),
            2 => {
                let k = 1usize << q.max(2);
                let ring: Vec<Vec<f64>> = (0..k)
                    .map(|i| {
                        let a = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
                        at(&[a.cos(), a.sin()])
                    })
                    .collect();
                let terms = (0..k)
                    .map(|i| oriented_term(vec![self.center.clone(), ring[i].clone(), ring[(i + 1) % k].clone()], self.theta))
                    .collect::<Result<Vec<_>>>()?;
                PolyhedralChain::new(n, 2, terms)
            }
            m => Err(Error::Unsupported(format!("disc triangulation for m = {m}"))),
        }
    }
}

pub fn tangent_disc(r: &RectifiableCurrent, x: &[f64], rho: f64) -> Result<TangentDisc> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::InvalidInput(format!("disc radius must be positive, got {rho}")));
    }
    let (i, z) = r.owner(x)?;
    let p = &r.patches[i];
    let mut plane = linalg::orthonormalize(&p.tangents(&z), 1e-12)
        .ok_or_else(|| Error::NumericalBreakdown("degenerate tangent plane".into()))?;
    if p.orientation < 0 {
        plane[0] = linalg::scaled(&plane[0], -1.0);
    }
    Ok(TangentDisc { center: x.to_vec(), radius: rho, plane, theta: p.theta.at(&z) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn quarter_circle_geometry() {
        let q = RectifiablePatch::quarter_circle(1.0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let a = q.point(&[-s]);
        assert!((a[0] - 1.0).abs() < 1e-15 && a[1].abs() < 1e-15);
        let m = q.mass(&QuadPlan::default()).unwrap();
        assert!((m.value - PI / 2.0).abs() < 1e-10);
    }

    #[test]
    fn tilted_line_length() {
        let p = RectifiablePatch::new(
            Domain::Interval(0.0, 1.0),
            Graph::Poly(vec![0.0, 1.0]),
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![0.0, 0.0],
            Theta::Const(1.0),
            1.0,
            1,
        )
        .unwrap();
        let m = p.mass(&QuadPlan::default()).unwrap();
        assert!((m.value - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn lipschitz_is_checked() {
        let r = RectifiablePatch::new(
            Domain::Interval(-1.0, 1.0),
            Graph::Poly(vec![0.0, 0.0, 1.0]),
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![0.0, 0.0],
            Theta::Const(1.0),
            1.0,
            1,
        );
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn tangent_at_circle_end() {
        let c = RectifiableCurrent::single(RectifiablePatch::quarter_circle(1.0).unwrap());
        let d = tangent_disc(&c, &[1.0, 0.0], 0.1).unwrap();
        assert!(d.plane[0][0].abs() < 1e-12 && (d.plane[0][1] - 1.0).abs() < 1e-12);
        assert!(matches!(tangent_disc(&c, &[0.5, 0.5], 0.1), Err(Error::NotOnCurrent(_))));
    }

    #[test]
    fn jump_patch_mass() {
        let p = RectifiablePatch::jump_segment(1.0, 2.0).unwrap();
        let m = p.mass(&QuadPlan::default()).unwrap();
        assert!((m.value - 1.5).abs() < 1e-13);
        assert_eq!(p.theta.at(&[0.5]), 1.0);
    }

    #[test]
    fn square_mass_and_triangulation() {
        let p = RectifiablePatch::flat_square(2.0).unwrap();
        let m = p.mass(&QuadPlan::default()).unwrap();
        assert!((m.value - 2.0).abs() < 1e-13);
        assert!((p.exact_triangulation().unwrap().mass().unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn json_round_trip() {
        let c = RectifiableCurrent::single(RectifiablePatch::quarter_circle(4.0).unwrap());
        let back = RectifiableCurrent::from_json(&c.to_json(), None).unwrap();
        assert_eq!(back, c);
    }
}
