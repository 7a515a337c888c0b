//! Small dense helpers shared by the geometric modules.

use nalgebra::DMatrix;

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scaled(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Affine combination `a + t (b - a)`.
pub fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Gram matrix `E E^T` of the row vectors in `rows`.
pub fn gram(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let m = rows.len();
    DMatrix::from_fn(m, m, |i, j| dot(&rows[i], &rows[j]))
}

/// m-volume of the simplex spanned by `vertices` (m+1 points in R^n).
pub fn simplex_volume(vertices: &[Vec<f64>]) -> f64 {
    let m = vertices.len().saturating_sub(1);
    if m == 0 {
        return 1.0;
    }
    let edges: Vec<Vec<f64>> = vertices[1..].iter().map(|v| sub(v, &vertices[0])).collect();
    let det = gram(&edges).determinant();
    det.max(0.0).sqrt() / factorial(m)
}

/// Modified Gram-Schmidt, run twice for stability. Returns `None` when the
/// input is rank deficient relative to `tol`.
pub fn orthonormalize(vectors: &[Vec<f64>], tol: f64) -> Option<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let scale = norm(v);
        if scale == 0.0 {
            return None;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c = dot(&w, q);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let nw = norm(&w);
        if nw <= tol * scale {
            return None;
        }
        out.push(scaled(&w, 1.0 / nw));
    }
    Some(out)
}

/// Volume of the unit ball in R^m, `pi^(m/2) / Gamma(m/2 + 1)`.
pub fn unit_ball_volume(m: usize) -> f64 {
    std::f64::consts::PI.powf(m as f64 / 2.0) / gamma_half_integer(m + 2)
}

/// `Gamma(k / 2)` for positive integer `k`, from the closed forms at
/// integers and half-integers.
fn gamma_half_integer(k: usize) -> f64 {
    assert!(k > 0);
    if k.is_multiple_of(2) {
        factorial(k / 2 - 1)
    } else {
        // Gamma(j + 1/2) = (2j)! sqrt(pi) / (4^j j!)
        let j = (k - 1) / 2;
        factorial(2 * j) * std::f64::consts::PI.sqrt() / (4f64.powi(j as i32) * factorial(j))
    }
}

/// Determinant of `<a_i, b_j>` for two families of m vectors; the sign says
/// whether the two frames induce the same orientation on a common m-plane.
pub fn cross_gram_det(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let m = a.len();
    DMatrix::from_fn(m, m, |i, j| dot(&a[i], &b[j])).determinant()
}

/// Solve the square system `A x = rhs` with partial pivoting.
pub fn solve(a: &DMatrix<f64>, rhs: &[f64]) -> Option<Vec<f64>> {
    let b = nalgebra::DVector::from_column_slice(rhs);
    a.clone().lu().solve(&b).map(|x| x.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-15);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn simplex_volumes() {
        let tri = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!((simplex_volume(&tri) - 0.5).abs() < 1e-15);
        let seg = vec![vec![0.0, 0.0, 0.0], vec![1.0, 2.0, 2.0]];
        assert!((simplex_volume(&seg) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn gram_schmidt_rejects_dependent() {
        let v = vec![vec![1.0, 1.0], vec![2.0, 2.0]];
        assert!(orthonormalize(&v, 1e-12).is_none());
        let q = orthonormalize(&[vec![3.0, 4.0], vec![1.0, 0.0]], 1e-12).unwrap();
        assert!(dot(&q[0], &q[1]).abs() < 1e-15);
    }
}
