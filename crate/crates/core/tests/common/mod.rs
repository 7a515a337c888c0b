#![allow(dead_code)]

use std::path::PathBuf;

use hmass::chain::{PolyhedralChain, ZeroChain};
use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

/// m-volume from the Gram determinant of the edge vectors.
pub fn gram_volume(verts: &[Vec<f64>]) -> f64 {
    let m = verts.len() - 1;
    if m == 0 {
        return 1.0;
    }
    let n = verts[0].len();
    let e = DMatrix::from_fn(n, m, |r, c| verts[c + 1][r] - verts[0][r]);
    let g = e.transpose() * &e;
    let fact: f64 = (1..=m).map(|k| k as f64).product();
    g.determinant().max(0.0).sqrt() / fact
}

pub fn random_simplex<R: Rng>(rng: &mut R, n: usize, m: usize, offset: f64) -> Vec<Vec<f64>> {
    loop {
        let verts: Vec<Vec<f64>> = (0..=m)
            .map(|_| {
                let mut x: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
                x[0] += offset;
                x
            })
            .collect();
        if gram_volume(&verts) > 1e-2 {
            return verts;
        }
    }
}

pub fn random_multiplicity<R: Rng>(rng: &mut R) -> f64 {
    let t = rng.random_range(0.25..4.0);
    if rng.random::<bool>() {
        t
    } else {
        -t
    }
}

/// Raw terms: vertex lists with signed multiplicities.
pub type Items = Vec<(Vec<Vec<f64>>, f64)>;

/// Up to four simplices, each shifted along the first axis so the terms are
/// pairwise disjoint. Returns the chain and its raw terms.
pub fn random_disjoint_chain<R: Rng>(rng: &mut R, n: usize, m: usize) -> (PolyhedralChain, Items) {
    let k = rng.random_range(1..=4usize);
    let items: Vec<_> = (0..k).map(|i| (random_simplex(rng, n, m, 3.0 * i as f64), random_multiplicity(rng))).collect();
    (PolyhedralChain::from_simplices(n, m, items.clone()).expect("valid chain"), items)
}

/// Simplices drawn from a small shared vertex pool so that faces coincide.
pub fn random_pooled_chain<R: Rng>(rng: &mut R, n: usize, m: usize) -> PolyhedralChain {
    let pool: Vec<Vec<f64>> = (0..m + 3).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect();
    let k = rng.random_range(1..=5usize);
    let mut items = Vec::new();
    while items.len() < k {
        let mut idx: Vec<usize> = (0..pool.len()).collect();
        for i in 0..=m {
            let j = rng.random_range(i..idx.len());
            idx.swap(i, j);
        }
        let verts: Vec<Vec<f64>> = idx[..=m].iter().map(|&i| pool[i].clone()).collect();
        if gram_volume(&verts) > 1e-3 {
            items.push((verts, random_multiplicity(rng)));
        }
    }
    let terms = items
        .into_iter()
        .map(|(v, t)| {
            PolyhedralChain::from_simplices(n, m, vec![(v, t)]).expect("single simplex").terms()[0].clone()
        })
        .collect();
    PolyhedralChain::new_unchecked_overlap(n, m, terms).expect("valid chain")
}

/// Flat norm of a 0-chain with integer weights by enumerating all partial
/// matchings of unit atoms: matched pairs cost their distance, unmatched
/// atoms cost 1.
pub fn brute_force_flat(atoms: &[(Vec<f64>, i32)]) -> f64 {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (x, w) in atoms {
        for _ in 0..w.abs() {
            if *w > 0 {
                pos.push(x.clone());
            } else {
                neg.push(x.clone());
            }
        }
    }
    fn go(i: usize, pos: &[Vec<f64>], neg: &[Vec<f64>], used: &mut Vec<bool>) -> f64 {
        if i == pos.len() {
            return used.iter().filter(|u| !**u).count() as f64;
        }
        let mut best = 1.0 + go(i + 1, pos, neg, used);
        for q in 0..neg.len() {
            if !used[q] {
                used[q] = true;
                let d: f64 = pos[i].iter().zip(&neg[q]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                best = best.min(d + go(i + 1, pos, neg, used));
                used[q] = false;
            }
        }
        best
    }
    go(0, &pos, &neg, &mut vec![false; neg.len()])
}

pub fn random_integer_zero_chain<R: Rng>(rng: &mut R) -> (Vec<(Vec<f64>, i32)>, usize) {
    let n = rng.random_range(1..=3usize);
    let k = rng.random_range(1..=6usize);
    let atoms = (0..k)
        .map(|_| {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.5)).collect();
            let w = rng.random_range(1..=2i32) * if rng.random::<bool>() { 1 } else { -1 };
            (x, w)
        })
        .collect();
    (atoms, n)
}

pub fn zero_chain(n: usize, atoms: &[(Vec<f64>, i32)], scale: f64) -> ZeroChain {
    ZeroChain::from_pairs(n, atoms.iter().map(|(x, w)| (x.clone(), scale * *w as f64)).collect()).expect("valid 0-chain")
}

/// Boundary of the unit square with multiplicity one.
pub fn unit_square_boundary() -> PolyhedralChain {
    let c = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let items = (0..4).map(|i| (vec![c[i].to_vec(), c[(i + 1) % 4].to_vec()], 1.0)).collect();
    PolyhedralChain::from_simplices(2, 1, items).expect("square boundary")
}
