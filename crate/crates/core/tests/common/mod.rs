//! Independent oracles and random instance generators shared by integration tests.
#![allow(dead_code)]

use isac_core::channels::{Alphabet, BinaryStatePair, InputDistribution};
use rand::Rng;

/// Strictly positive random probability row.
pub fn random_row<R: Rng>(rng: &mut R, m: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.02..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

pub fn random_pair<R: Rng>(rng: &mut R, k: usize, m: usize) -> BinaryStatePair {
    let p0 = (0..k).map(|_| random_row(rng, m)).collect();
    let p1 = (0..k).map(|_| random_row(rng, m)).collect();
    BinaryStatePair::new(Alphabet::indexed(k), Alphabet::indexed(m), p0, p1).expect("positive rows")
}

pub fn random_px<R: Rng>(rng: &mut R, k: usize) -> InputDistribution {
    InputDistribution::new(random_row(rng, k)).expect("valid weights")
}

/// `(Σ_{y∈A} p₀, Σ_{y∈A} p₁)` for every subset `A` of outputs.
pub fn deterministic_points(p0: &[f64], p1: &[f64]) -> Vec<(f64, f64)> {
    let m = p0.len();
    (0u32..1 << m)
        .map(|mask| {
            (0..m)
                .filter(|y| mask >> y & 1 == 1)
                .fold((0.0, 0.0), |a, y| (a.0 + p0[y], a.1 + p1[y]))
        })
        .collect()
}

/// Upper concave hull from the leftmost to the rightmost point; collinear points dropped.
pub fn upper_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in pts {
        if hull.last().is_some_and(|l| l.0 == p.0) {
            continue;
        }
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= -1e-13 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Best `Σ p_X P_D,x` over deterministic per-symbol subset tests meeting the budget.
pub fn best_deterministic(pair: &BinaryStatePair, p_x: &InputDistribution, alpha: f64) -> f64 {
    let per_symbol: Vec<Vec<(f64, f64)>> = (0..p_x.len())
        .map(|x| deterministic_points(pair.p0().row(x), pair.p1().row(x)))
        .collect();
    let w = p_x.weights();
    let mut best = f64::NEG_INFINITY;
    let mut idx = vec![0usize; per_symbol.len()];
    loop {
        let (fa, d) = idx
            .iter()
            .enumerate()
            .fold((0.0, 0.0), |a, (x, &i)| (a.0 + w[x] * per_symbol[x][i].0, a.1 + w[x] * per_symbol[x][i].1));
        if fa <= alpha + 1e-12 {
            best = best.max(d);
        }
        let mut x = 0;
        loop {
            if x == idx.len() {
                return best;
            }
            idx[x] += 1;
            if idx[x] < per_symbol[x].len() {
                break;
            }
            idx[x] = 0;
            x += 1;
        }
    }
}

/// `H₂(t∗p) − H₂(p)` in nats, written out independently of the library.
pub fn bsc_rate(t: f64, p: f64) -> f64 {
    let h = |a: f64| {
        if a <= 0.0 || a >= 1.0 {
            0.0
        } else {
            -a * a.ln() - (1.0 - a) * (1.0 - a).ln()
        }
    };
    h(t * (1.0 - p) + (1.0 - t) * p) - h(p)
}

/// `D₂(a‖b)` in nats.
pub fn kl2(a: f64, b: f64) -> f64 {
    a * (a / b).ln() + (1.0 - a) * ((1.0 - a) / (1.0 - b)).ln()
}
