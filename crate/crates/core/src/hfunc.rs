//! Cost functions `H: R -> [0, inf)` with the structure needed for H-mass:
//! vanishing at zero, even, subadditive and lower semicontinuous.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used by the property checks.
pub const CHECK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HKind {
    Abs,
    Power {
        alpha: f64,
    },
    AffineIndicator {
        beta: f64,
    },
    Indicator,
    /// Piecewise-linear table. A repeated abscissa encodes a jump and the
    /// value there is the smaller of the two. `point_values` overrides single
    /// points. With `even` the table covers `[0, inf)` and is read at `|x|`.
    Tabulated {
        grid: Vec<f64>,
        values: Vec<f64>,
        #[serde(default = "default_true")]
        even: bool,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        point_values: Vec<(f64, f64)>,
    },
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DeclaredProperties {
    pub even: bool,
    pub subadditive: bool,
    pub lsc: bool,
    pub monotone_on_nonneg: bool,
    pub infinite_slope_at_zero: bool,
    /// The flags follow from the closed form rather than from samples.
    pub by_construction: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HKind", into = "HKind")]
pub struct HSpec {
    kind: HKind,
    #[serde(skip)]
    declared: DeclaredProperties,
}

impl From<HSpec> for HKind {
    fn from(h: HSpec) -> HKind {
        h.kind
    }
}

impl TryFrom<HKind> for HSpec {
    type Error = Error;
    fn try_from(kind: HKind) -> Result<HSpec> {
        HSpec::new(kind)
    }
}


impl HSpec {
    pub fn new(kind: HKind) -> Result<Self> {
        let analytic = |inf_slope| DeclaredProperties {
            even: true,
            subadditive: true,
            lsc: true,
            monotone_on_nonneg: true,
            infinite_slope_at_zero: inf_slope,
            by_construction: true,
        };
        let declared = match &kind {
            HKind::Abs => analytic(false),
            HKind::Power { alpha } => {
                if !(alpha.is_finite() && *alpha > 0.0 && *alpha <= 1.0) {
                    return Err(Error::InvalidInput(format!("power exponent must lie in (0, 1], got {alpha}")));
                }
                analytic(*alpha < 1.0)
            }
            HKind::AffineIndicator { beta } => {
                if !(beta.is_finite() && *beta >= 0.0) {
                    return Err(Error::InvalidInput(format!("beta must be finite and nonnegative, got {beta}")));
                }
                analytic(true)
            }
            HKind::Indicator => analytic(true),
            HKind::Tabulated { grid, values, even, point_values } => {
                if grid.is_empty() || grid.len() != values.len() {
                    return Err(Error::InvalidInput("tabulated H needs equally long, nonempty grid and values".into()));
                }
                if grid.iter().chain(values).any(|v| !v.is_finite()) {
                    return Err(Error::InvalidInput("tabulated H has non-finite entries".into()));
                }
                if grid.windows(2).any(|w| w[1] < w[0]) {
                    return Err(Error::InvalidInput("tabulated grid must be non-decreasing".into()));
                }
                if values.iter().chain(point_values.iter().map(|(_, v)| v)).any(|v| *v < 0.0) {
                    return Err(Error::InvalidInput("tabulated H must be nonnegative".into()));
                }
                if *even && grid[0] < 0.0 {
                    return Err(Error::InvalidInput("even table must start at a nonnegative abscissa".into()));
                }
                DeclaredProperties { even: *even, ..Default::default() }
            }
        };
        Ok(HSpec { kind, declared })
    }

    pub fn abs() -> Self {
        HSpec::new(HKind::Abs).unwrap()
    }

    pub fn power(alpha: f64) -> Result<Self> {
        HSpec::new(HKind::Power { alpha })
    }

    pub fn affine_indicator(beta: f64) -> Result<Self> {
        HSpec::new(HKind::AffineIndicator { beta })
    }

    pub fn indicator() -> Self {
        HSpec::new(HKind::Indicator).unwrap()
    }

    pub fn tabulated(grid: Vec<f64>, values: Vec<f64>, even: bool) -> Result<Self> {
        HSpec::new(HKind::Tabulated { grid, values, even, point_values: Vec::new() })
    }

    pub fn kind(&self) -> &HKind {
        &self.kind
    }

    pub fn declared(&self) -> DeclaredProperties {
        self.declared
    }

    pub fn is_analytic(&self) -> bool {
        !matches!(self.kind, HKind::Tabulated { .. })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("HSpec serializes")
    }

    pub fn eval(&self, theta: f64) -> f64 {
        match &self.kind {
            HKind::Abs => theta.abs(),
            HKind::Power { alpha } => theta.abs().powf(*alpha),
            HKind::AffineIndicator { beta } => {
                if theta == 0.0 {
                    0.0
                } else {
                    1.0 + beta * theta.abs()
                }
            }
            HKind::Indicator => {
                if theta == 0.0 {
                    0.0
                } else {
                    1.0
                }
            }
            HKind::Tabulated { grid, values, even, point_values } => {
                let x = if *even { theta.abs() } else { theta };
                if let Some((_, v)) = point_values.iter().find(|(p, _)| *p == x) {
                    return *v;
                }
                table_value(grid, values, x)
            }
        }
    }

    /// One-sided limits of a table at `x`, ignoring point overrides.
    fn table_limits(&self, x: f64) -> Option<(f64, f64)> {
        let HKind::Tabulated { grid, values, even, .. } = &self.kind else {
            return None;
        };
        let (left, right) = table_limits(grid, values, x);
        if *even && x == 0.0 {
            // the left limit at 0 mirrors the right one
            return Some((right, right));
        }
        Some((left, right))
    }
}

fn table_value(grid: &[f64], values: &[f64], x: f64) -> f64 {
    let n = grid.len();
    let idx = grid.partition_point(|g| *g < x);
    if idx < n && grid[idx] == x {
        let mut v = values[idx];
        let mut j = idx + 1;
        while j < n && grid[j] == x {
            v = v.min(values[j]);
            j += 1;
        }
        return v;
    }
    if idx == 0 {
        return values[0];
    }
    if idx == n {
        return values[n - 1];
    }
    let (x0, x1) = (grid[idx - 1], grid[idx]);
    let (y0, y1) = (values[idx - 1], values[idx]);
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

fn table_limits(grid: &[f64], values: &[f64], x: f64) -> (f64, f64) {
    let first = grid.partition_point(|g| *g < x);
    let last = grid.partition_point(|g| *g <= x);
    if first < last {
        return (values[first], values[last - 1]);
    }
    let v = table_value(grid, values, x);
    (v, v)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub passed: bool,
    pub by_construction: bool,
    /// Violation with the smallest arguments: two arguments and the excess.
    pub witness: Option<[f64; 3]>,
    pub failures: usize,
    pub checked: usize,
}

impl Check {
    fn new(by_construction: bool) -> Self {
        Check { passed: true, by_construction, witness: None, failures: 0, checked: 0 }
    }

    fn record(&mut self, a: f64, b: f64, excess: f64) {
        self.checked += 1;
        if excess > CHECK_TOL {
            self.failures += 1;
            self.passed = false;
            let smaller = self.witness.is_none_or(|w| a.abs() + b.abs() < w[0].abs() + w[1].abs());
            if smaller {
                self.witness = Some([a, b, excess]);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    /// `H(0) = 0` and evenness.
    pub h1: Check,
    /// Subadditivity on grid pairs, including opposite signs.
    pub h2: Check,
    /// Lower semicontinuity at declared jumps and point overrides.
    pub h3: Check,
    pub monotone: Check,
}

impl AssumptionReport {
    pub fn all_passed(&self) -> bool {
        self.h1.passed && self.h2.passed && self.h3.passed && self.monotone.passed
    }
}

/// Sampling-based check of the structural assumptions on `grid` (and its
/// reflection). Passing is evidence, not proof.
pub fn verify_assumptions(h: &HSpec, grid: &[f64]) -> AssumptionReport {
    let analytic = h.is_analytic();
    let mut h1 = Check::new(analytic);
    let h0 = h.eval(0.0);
    h1.record(0.0, h0, h0.abs());
    for &t in grid {
        h1.record(t, -t, (h.eval(t) - h.eval(-t)).abs());
    }

    let mut s: Vec<f64> = grid.to_vec();
    s.extend(grid.iter().filter(|t| **t != 0.0).map(|t| -t));
    let vals: Vec<f64> = s.iter().map(|&t| h.eval(t)).collect();
    let mut h2 = Check::new(analytic);
    for i in 0..s.len() {
        for j in i..s.len() {
            let excess = h.eval(s[i] + s[j]) - vals[i] - vals[j];
            h2.record(s[i], s[j], excess);
        }
    }

    let mut h3 = Check::new(analytic);
    if let HKind::Tabulated { grid: g, point_values, .. } = &h.kind {
        let mut points: Vec<f64> = g.windows(2).filter(|w| w[0] == w[1]).map(|w| w[0]).collect();
        points.extend(point_values.iter().map(|(p, _)| *p));
        for x in points {
            let (l, r) = h.table_limits(x).unwrap();
            let v = h.eval(x);
            h3.record(x, l.min(r), v - l.min(r));
        }
    }

    let mut monotone = Check::new(analytic);
    let mut pos: Vec<f64> = grid.iter().map(|t| t.abs()).collect();
    pos.sort_by(f64::total_cmp);
    pos.dedup();
    for w in pos.windows(2) {
        monotone.record(w[0], w[1], h.eval(w[0]) - h.eval(w[1]));
    }

    AssumptionReport { h1, h2, h3, monotone }
}

/// A cost given on `[0, inf)` only.
#[derive(Debug, Clone, PartialEq)]
pub enum HalfLine {
    Identity,
    Power(f64),
    AffineIndicator(f64),
    Indicator,
    Tabulated { grid: Vec<f64>, values: Vec<f64> },
}

/// `H(x) = h(|x|)`.
pub fn even_extension(h: &HalfLine) -> Result<HSpec> {
    match h {
        HalfLine::Identity => Ok(HSpec::abs()),
        HalfLine::Power(a) => HSpec::power(*a),
        HalfLine::AffineIndicator(b) => HSpec::affine_indicator(*b),
        HalfLine::Indicator => Ok(HSpec::indicator()),
        HalfLine::Tabulated { grid, values } => {
            if grid.first().is_some_and(|g| *g < 0.0) {
                return Err(Error::InvalidInput("half-line table must start at a nonnegative abscissa".into()));
            }
            if grid.is_empty() || grid.len() != values.len() {
                return Err(Error::InvalidInput("tabulated H needs equally long, nonempty grid and values".into()));
            }
            let at0 = table_value(grid, values, 0.0);
            if at0 != 0.0 {
                return Err(Error::CostNonzeroAtOrigin(at0));
            }
            let mut spec = HSpec::tabulated(grid.clone(), values.clone(), true)?;
            // the caller vouches for these on the half line; evenness carries them over
            spec.declared.subadditive = true;
            spec.declared.lsc = true;
            spec.declared.monotone_on_nonneg = true;
            Ok(spec)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeReport {
    pub holds: bool,
    /// `(t_k, H(t_k)/t_k)` for `t_k = theta_min 2^-k`, k = 0..=40.
    pub ratios: Vec<(f64, f64)>,
    /// Tail of the ratio curve when divergence was not observed.
    pub witness: Option<Vec<(f64, f64)>>,
}

/// Empirical test of `H(t)/t -> inf` as `t -> 0+`. The ratio must increase
/// strictly over k = 20..40 and its growth must not stall: the rise over the
/// last ten steps is at least half the rise over the ten before.
pub fn infinite_slope_check(h: &HSpec, theta_min: f64) -> Result<SlopeReport> {
    if !(theta_min.is_finite() && theta_min > 0.0) {
        return Err(Error::InvalidInput(format!("theta_min must be positive, got {theta_min}")));
    }
    let ratios: Vec<(f64, f64)> = (0..=40)
        .map(|k| {
            let t = theta_min * 2f64.powi(-k);
            (t, h.eval(t) / t)
        })
        .collect();
    let tail = &ratios[20..];
    let increasing = tail.windows(2).all(|w| w[1].1 > w[0].1);
    let r = |k: usize| ratios[k].1;
    let sustained = r(40) - r(30) >= 0.5 * (r(30) - r(20));
    let holds = increasing && sustained && r(40).is_finite();
    Ok(SlopeReport { holds, witness: if holds { None } else { Some(tail.to_vec()) }, ratios })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmallMassBound {
    pub value: f64,
    /// `t/H(t)` is non-decreasing for this kind, so the grid supremum is the
    /// supremum over the continuum.
    pub exact: bool,
}

/// `sup_{0 < t <= theta} t / H(t)` over `t = theta 2^{-k/8}`, k = 0..=400.
pub fn small_mass_bound(h: &HSpec, theta: f64) -> Result<SmallMassBound> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(Error::InvalidInput(format!("theta must be positive, got {theta}")));
    }
    let mut sup: f64 = 0.0;
    for k in 0..=400 {
        let t = theta * 2f64.powf(-(k as f64) / 8.0);
        let ht = h.eval(t);
        if ht <= 0.0 {
            return Err(Error::CostVanishes(t));
        }
        sup = sup.max(t / ht);
    }
    Ok(SmallMassBound { value: sup, exact: h.is_analytic() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert_eq!(HSpec::power(0.5).unwrap().eval(4.0), 2.0);
        let a = HSpec::affine_indicator(3.0).unwrap();
        assert_eq!(a.eval(0.0), 0.0);
        assert_eq!(a.eval(-2.0), 7.0);
        assert_eq!(HSpec::abs().eval(-5.0), 5.0);
    }

    #[test]
    fn json_forms() {
        let h = HSpec::from_json(r#"{"kind":"power","alpha":0.5}"#).unwrap();
        assert_eq!(h, HSpec::power(0.5).unwrap());
        let t = HSpec::from_json(r#"{"kind":"tabulated","grid":[0,1],"values":[0,1]}"#).unwrap();
        assert_eq!(t.eval(-0.25), 0.25);
        assert!(HSpec::from_json(r#"{"kind":"power","alpha":2}"#).is_err());
        let back = HSpec::from_json(&h.to_json()).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn table_jump_takes_lower_value() {
        let h = HSpec::tabulated(vec![0.0, 1.0, 1.0, 2.0], vec![0.0, 2.0, 1.0, 1.5], true).unwrap();
        assert_eq!(h.eval(1.0), 1.0);
        assert_eq!(h.eval(0.5), 1.0);
        assert_eq!(h.eval(1.5), 1.25);
        assert_eq!(h.eval(10.0), 1.5);
    }

    #[test]
    fn upper_point_value_breaks_lsc() {
        let h = HSpec::new(HKind::Tabulated {
            grid: vec![0.0, 2.0],
            values: vec![0.0, 2.0],
            even: true,
            point_values: vec![(1.0, 3.0)],
        })
        .unwrap();
        let r = verify_assumptions(&h, &[0.0, 0.5, 1.0]);
        assert!(!r.h3.passed);
        assert_eq!(r.h3.witness.unwrap()[0], 1.0);
    }

    #[test]
    fn squares_fail_subadditivity_at_one_one() {
        let h = HSpec::tabulated(vec![0.0, 1.0, 2.0, 3.0, 4.0], vec![0.0, 1.0, 4.0, 9.0, 16.0], true).unwrap();
        let r = verify_assumptions(&h, &[0.0, 1.0, 2.0]);
        assert!(!r.h2.passed);
        let w = r.h2.witness.unwrap();
        assert_eq!((w[0], w[1], w[2]), (1.0, 1.0, 2.0));
    }

    #[test]
    fn even_extension_rejects_offset() {
        let bad = HalfLine::Tabulated { grid: vec![0.0, 1.0], values: vec![0.5, 1.0] };
        assert_eq!(even_extension(&bad), Err(Error::CostNonzeroAtOrigin(0.5)));
    }

    #[test]
    fn slope_check() {
        assert!(infinite_slope_check(&HSpec::power(0.5).unwrap(), 1.0).unwrap().holds);
        assert!(!infinite_slope_check(&HSpec::abs(), 1.0).unwrap().holds);
        assert!(infinite_slope_check(&HSpec::affine_indicator(2.0).unwrap(), 1.0).unwrap().holds);
    }

    #[test]
    fn small_mass_closed_forms() {
        let b = small_mass_bound(&HSpec::power(0.5).unwrap(), 0.25).unwrap();
        assert!((b.value - 0.5).abs() < 1e-15);
        assert!(b.exact);
        let b = small_mass_bound(&HSpec::affine_indicator(1.0).unwrap(), 0.5).unwrap();
        assert!((b.value - 1.0 / 3.0).abs() < 1e-15);
        let z = HSpec::tabulated(vec![0.0, 1.0, 2.0], vec![0.0, 0.0, 1.0], true).unwrap();
        assert!(matches!(small_mass_bound(&z, 0.5), Err(Error::CostVanishes(_))));
    }
}
