//! Gauss-Legendre quadrature on intervals and triangles with dyadic
//! refinement. The error estimate is the change between successive levels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadPlan {
    pub tol: f64,
    pub max_level: u32,
    pub order: usize,
}

impl Default for QuadPlan {
    fn default() -> Self {
        QuadPlan { tol: 1e-10, max_level: 12, order: 8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub level: u32,
}

/// Nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `P_n(x)` and its derivative by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `int_a^b f`, splitting at `breaks` (points outside `(a, b)` are ignored).
pub fn integrate_interval<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], plan: &QuadPlan) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput("integration limits must be finite".into()));
    }
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0, level: 0 });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = vec![lo];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|x| *x > lo && *x < hi).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    cuts.extend(inner);
    cuts.push(hi);
    let (nodes, weights) = gauss_legendre(plan.order);
    let rule = |level: u32| -> f64 {
        let pieces = 1u64 << level;
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let h = (w[1] - w[0]) / pieces as f64;
            for p in 0..pieces {
                let x0 = w[0] + h * p as f64;
                let mut s = 0.0;
                for (xi, wi) in nodes.iter().zip(&weights) {
                    s += wi * f(x0 + 0.5 * h * (xi + 1.0));
                }
                total += 0.5 * h * s;
            }
        }
        total
    };
    refine(rule, plan).map(|r| QuadResult { value: sign * r.value, ..r })
}

/// Integral of `f` over a triangle using a collapsed tensor rule.
pub fn integrate_triangles<F: Fn(&[f64]) -> f64>(f: F, triangles: &[[Vec<f64>; 3]], plan: &QuadPlan) -> Result<QuadResult> {
    let (nodes, weights) = gauss_legendre(plan.order);
    let u: Vec<f64> = nodes.iter().map(|x| 0.5 * (x + 1.0)).collect();
    let w: Vec<f64> = weights.iter().map(|x| 0.5 * x).collect();
    let rule = |level: u32| -> f64 {
        let mut total = 0.0;
        for tri in triangles {
            let mut stack = vec![(tri.clone(), 0u32)];
            while let Some((t, l)) = stack.pop() {
                if l < level {
                    let m01 = mid(&t[0], &t[1]);
                    let m12 = mid(&t[1], &t[2]);
                    let m20 = mid(&t[2], &t[0]);
                    stack.push(([t[0].clone(), m01.clone(), m20.clone()], l + 1));
                    stack.push(([m01.clone(), t[1].clone(), m12.clone()], l + 1));
                    stack.push(([m20.clone(), m12.clone(), t[2].clone()], l + 1));
                    stack.push(([m12, m20, m01], l + 1));
                    continue;
                }
                let (a, b, c) = (&t[0], &t[1], &t[2]);
                let e1: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
                let e2: Vec<f64> = c.iter().zip(b).map(|(x, y)| x - y).collect();
                let jac = (e1[0] * e2[1] - e1[1] * e2[0]).abs();
                let mut s = 0.0;
                for (ui, wi) in u.iter().zip(&w) {
                    for (vj, wj) in u.iter().zip(&w) {
                        let p = [a[0] + ui * e1[0] + ui * vj * e2[0], a[1] + ui * e1[1] + ui * vj * e2[1]];
                        s += wi * wj * ui * f(&p);
                    }
                }
                total += jac * s;
            }
        }
        total
    };
    refine(rule, plan)
}

/// Fan triangulation of a convex polygon from its first vertex.
pub fn fan(polygon: &[Vec<f64>]) -> Vec<[Vec<f64>; 3]> {
    (1..polygon.len().saturating_sub(1))
        .map(|i| [polygon[0].clone(), polygon[i].clone(), polygon[i + 1].clone()])
        .collect()
}

fn mid(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
}

fn refine<R: Fn(u32) -> f64>(rule: R, plan: &QuadPlan) -> Result<QuadResult> {
    let mut prev = rule(0);
    let mut err = f64::INFINITY;
    for level in 1..=plan.max_level {
        let cur = rule(level);
        err = (cur - prev).abs();
        if err <= plan.tol * (1.0 + cur.abs()) {
            return Ok(QuadResult { value: cur, error: err, level });
        }
        prev = cur;
    }
    Err(Error::QuadratureNoConvergence { achieved: err, requested: plan.tol })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_integrate_polynomials_exactly() {
        let (x, w) = gauss_legendre(5);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let m8: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((m8 - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn interval_with_jump() {
        let plan = QuadPlan::default();
        let r = integrate_interval(|x| if x < 0.3 { 1.0 } else { 2.0 }, 0.0, 1.0, &[0.3], &plan).unwrap();
        assert!((r.value - 1.7).abs() < 1e-13);
        let r = integrate_interval(|x| x.sin(), 0.0, std::f64::consts::PI, &[], &plan).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn triangle_moments() {
        let plan = QuadPlan { max_level: 4, ..Default::default() };
        let tri = [vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let r = integrate_triangles(|p| p[0] * p[1], &[tri], &plan).unwrap();
        assert!((r.value - 1.0 / 24.0).abs() < 1e-14);
        let sq = fan(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]);
        let r = integrate_triangles(|_| 1.0, &sq, &plan).unwrap();
        assert!((r.value - 1.0).abs() < 1e-14);
    }
}
