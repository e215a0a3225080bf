//! Independent reference implementations used only by the tests.
#![allow(dead_code)]

use ndarray::{Array1, Array2};
use rand::Rng;

/// Standard normal density.
pub fn density(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Composite Simpson rule on `[a, b]` with `2k` panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, k: usize) -> f64 {
    let n = 2 * k;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Φ by integrating the density over the tail beyond `|z|`.
pub fn phi(z: f64) -> f64 {
    let a = z.abs();
    let tail = simpson(density, a, a + 40.0, 40_000);
    if z <= 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

/// Normal-equations solve `(AᵀA) x = Aᵀb` by Gaussian elimination with
/// partial pivoting.
pub fn normal_equations(a: &Array2<f64>, b: &Array1<f64>) -> Vec<f64> {
    let k = a.ncols();
    let mut m = vec![vec![0.0; k + 1]; k];
    for i in 0..k {
        for j in 0..k {
            m[i][j] = a.column(i).dot(&a.column(j));
        }
        m[i][k] = a.column(i).dot(b);
    }
    for c in 0..k {
        let p = (c..k)
            .max_by(|&x, &y| m[x][c].abs().partial_cmp(&m[y][c].abs()).unwrap())
            .unwrap();
        m.swap(c, p);
        for r in (c + 1)..k {
            let f = m[r][c] / m[c][c];
            for j in c..=k {
                m[r][j] -= f * m[c][j];
            }
        }
    }
    let mut x = vec![0.0; k];
    for c in (0..k).rev() {
        let s: f64 = ((c + 1)..k).map(|j| m[c][j] * x[j]).sum();
        x[c] = (m[c][k] - s) / m[c][c];
    }
    x
}

/// Every sent signal, indexed by bitmask, built column by column from scratch.
pub fn signals(x: &Array2<f64>, w: &[f64]) -> Vec<Vec<f64>> {
    let (n, m) = x.dim();
    (0..1usize << m)
        .map(|bits| {
            (0..n)
                .map(|t| (0..m).filter(|i| bits >> i & 1 == 1).map(|i| w[i] * x[[t, i]]).sum())
                .collect()
        })
        .collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Mean over supports of `Φ(-nn/(2σ))` by enumerating all ordered pairs.
pub fn prop1(x: &Array2<f64>, w: &[f64], sigma: f64) -> f64 {
    let sig = signals(x, w);
    let total: f64 = (0..sig.len())
        .map(|s| {
            let nn = (0..sig.len())
                .filter(|&t| t != s)
                .map(|t| dist(&sig[s], &sig[t]))
                .fold(f64::INFINITY, f64::min);
            phi(-nn / (2.0 * sigma))
        })
        .sum();
    total / sig.len() as f64
}

/// Mean squared distance over ordered pairs of distinct supports.
pub fn mean_squared_distance(x: &Array2<f64>, w: &[f64]) -> f64 {
    let sig = signals(x, w);
    let k = sig.len();
    let mut total = 0.0;
    for s in 0..k {
        for t in 0..k {
            if s != t {
                total += dist(&sig[s], &sig[t]).powi(2);
            }
        }
    }
    total / (k * (k - 1)) as f64
}

pub fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn gaussian_matrix<R: Rng>(rng: &mut R, n: usize, m: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, m), |_| rng.sample(rand_distr::StandardNormal))
}
