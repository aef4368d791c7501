//! Detection under i.i.d. states: per-symbol ROC curves, false-alarm budget
//! allocation and the rate-probability region.
//!
//! For composition `p_X` and averaged false-alarm budget `α` the best averaged
//! detection probability is
//!
//! ```text
//! β*(α) = max Σ p_X(x) P_D,x   subject to   Σ p_X(x) P_FA,x ≤ α,
//! ```
//!
//! each `(P_FA,x, P_D,x)` on the ROC of symbol `x`. [`allocation_oracle`] solves
//! this exactly; [`waterfill`] is the incremental pouring algorithm.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{BinaryStatePair, CommChannel, CondMatrix, InputDistribution};
use crate::error::{Error, Result};
use crate::info::{log_sum_exp, normal_interval, q_function};
use crate::region_fixed::mutual_information;

/// Relative tolerance under which two likelihood ratios count as tied.
pub const TIE_TOL: f64 = 1e-12;
/// Default pour increment, in units of averaged false-alarm probability.
pub const DEFAULT_DELTA: f64 = 1e-4;
/// Default number of threshold samples for a continuous ROC.
pub const DEFAULT_GAUSSIAN_SAMPLES: usize = 2048;
/// β differences below this count as flat.
pub const FLAT_TOL: f64 = 1e-9;

/// The ratio used by every test in this module: `p₁/p₀`.
#[inline]
pub fn likelihood_ratio(p0: f64, p1: f64) -> f64 {
    p1 / p0
}

/// Deterministic likelihood-ratio test on a single observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ThresholdTest {
    Never,
    Always,
    /// Declare 1 iff `LR ≥ tau`, ties within [`TIE_TOL`] included.
    AtLeast { tau: f64 },
}

impl ThresholdTest {
    pub fn declares(&self, lr: f64) -> bool {
        match *self {
            ThresholdTest::Never => false,
            ThresholdTest::Always => true,
            ThresholdTest::AtLeast { tau } => lr >= tau * (1.0 - TIE_TOL),
        }
    }
}

/// Runs `alt` with probability `eta`, otherwise `base`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomizedTest {
    pub base: ThresholdTest,
    pub alt: ThresholdTest,
    pub eta: f64,
}

impl RandomizedTest {
    /// Probability of declaring 1 given the observation's likelihood ratio.
    pub fn declare_probability(&self, lr: f64) -> f64 {
        let b = f64::from(u8::from(self.base.declares(lr)));
        let a = f64::from(u8::from(self.alt.declares(lr)));
        (1.0 - self.eta) * b + self.eta * a
    }
}

/// Concave piecewise-linear ROC from `(0, 0)` to `(1, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RocCurve {
    vertices: Vec<(f64, f64)>,
    /// `slopes[k]` joins `vertices[k]` and `vertices[k + 1]`; non-increasing.
    slopes: Vec<f64>,
    /// `tests[k]` attains `vertices[k]`.
    tests: Vec<ThresholdTest>,
}

impl RocCurve {
    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.vertices
    }
    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }
    pub fn tests(&self) -> &[ThresholdTest] {
        &self.tests
    }
    pub fn n_segments(&self) -> usize {
        self.slopes.len()
    }

    /// Segment index and position in `[0, 1]` along it; vertices map to the
    /// segment they start, except `p_fa = 1`.
    pub fn locate(&self, p_fa: f64) -> (usize, f64) {
        let p = p_fa.clamp(0.0, 1.0);
        let k = self.vertices[1..]
            .partition_point(|v| v.0 <= p)
            .min(self.n_segments() - 1);
        let (a, b) = (self.vertices[k].0, self.vertices[k + 1].0);
        (k, ((p - a) / (b - a)).clamp(0.0, 1.0))
    }

    /// Right slope at `p_fa`; zero once `p_fa = 1`.
    pub fn right_slope(&self, p_fa: f64) -> f64 {
        if p_fa >= 1.0 {
            return 0.0;
        }
        self.slopes[self.locate(p_fa).0]
    }

    pub fn p_d_at(&self, p_fa: f64) -> f64 {
        let (k, eta) = self.locate(p_fa);
        let (a, b) = (self.vertices[k].1, self.vertices[k + 1].1);
        a + eta * (b - a)
    }

    /// The operating point at `p_fa` with the randomized test that attains it.
    pub fn operating_point(&self, p_fa: f64) -> SymbolAllocation {
        let p_fa = p_fa.clamp(0.0, 1.0);
        let (k, eta) = self.locate(p_fa);
        SymbolAllocation {
            p_fa,
            p_d: self.p_d_at(p_fa),
            segment: k,
            eta,
            tau: self.slopes[k],
            test: RandomizedTest {
                base: self.tests[k],
                alt: self.tests[k + 1],
                eta,
            },
        }
    }

    #[cfg(test)]
    fn diagonal() -> RocCurve {
        RocCurve {
            vertices: vec![(0.0, 0.0), (1.0, 1.0)],
            slopes: vec![1.0],
            tests: vec![ThresholdTest::Never, ThresholdTest::Always],
        }
    }
}

/// Neyman-Pearson ROC of one observation with likelihood rows `p₀(·|x)`, `p₁(·|x)`.
///
/// Outputs are grouped by likelihood ratio, groups sorted in decreasing order.
pub fn roc_from_likelihoods(p0: &[f64], p1: &[f64]) -> Result<RocCurve> {
    if p0.len() != p1.len() || p0.is_empty() {
        return Err(Error::Dimension("likelihood rows must be nonempty and of equal length".into()));
    }
    let mut outs = Vec::with_capacity(p0.len());
    for (y, (&a, &b)) in p0.iter().zip(p1).enumerate() {
        match (a > 0.0, b > 0.0) {
            (true, true) => outs.push((likelihood_ratio(a, b), a, b)),
            (false, false) => {}
            _ => return Err(Error::domain("likelihoods", format!("support violation at output {y}"))),
        }
    }
    if outs.is_empty() {
        return Err(Error::domain("likelihoods", "rows have no common support"));
    }
    outs.sort_by(|l, r| r.0.total_cmp(&l.0));
    // (group LR, Σp₀, Σp₁)
    let mut groups: Vec<(f64, f64, f64)> = Vec::new();
    for (lr, a, b) in outs {
        match groups.last_mut() {
            Some(g) if lr >= g.0 * (1.0 - TIE_TOL) => {
                g.1 += a;
                g.2 += b;
            }
            _ => groups.push((lr, a, b)),
        }
    }
    let mut vertices = vec![(0.0, 0.0)];
    let mut tests = vec![ThresholdTest::Never];
    let mut slopes = Vec::with_capacity(groups.len());
    let (mut fa, mut d) = (0.0, 0.0);
    for (i, &(lr, a, b)) in groups.iter().enumerate() {
        fa += a;
        d += b;
        slopes.push(b / a);
        if i + 1 == groups.len() {
            vertices.push((1.0, 1.0));
            tests.push(ThresholdTest::Always);
        } else {
            vertices.push((fa, d));
            tests.push(ThresholdTest::AtLeast { tau: lr });
        }
    }
    Ok(RocCurve { vertices, slopes, tests })
}

/// ROC of every input symbol of a pair.
pub fn symbol_rocs(pair: &BinaryStatePair) -> Result<Vec<RocCurve>> {
    (0..pair.inputs().len())
        .map(|x| roc_from_likelihoods(pair.p0().row(x), pair.p1().row(x)))
        .collect()
}

/// `τ″` samples, uniform in `τ″` (log-spaced in the LR threshold).
pub fn default_gaussian_thresholds(sigma_s: f64, n: usize) -> Vec<f64> {
    let (lo, hi) = (-8.5, 8.5 + 1.0 / sigma_s);
    (0..n)
        .map(|i| hi - (hi - lo) * i as f64 / (n - 1).max(1) as f64)
        .collect()
}

/// Sampled ROC of `N(0, σ²)` against `N(1, σ²)`: `(Q(τ″), Q(τ″ − 1/σ))`.
///
/// The LR threshold at `τ″` is `exp(τ″/σ − 1/(2σ²))`, the local slope.
pub fn gaussian_roc(sigma_s: f64, thresholds: &[f64]) -> Result<RocCurve> {
    if !(sigma_s > 0.0 && sigma_s.is_finite()) {
        return Err(Error::domain("sigma_s", format!("{sigma_s} must be positive")));
    }
    let mut t: Vec<f64> = thresholds.iter().copied().filter(|v| v.is_finite()).collect();
    t.sort_by(|a, b| b.total_cmp(a));
    let shift = 1.0 / sigma_s;
    let mut vertices = vec![(0.0, 0.0)];
    let mut tests = vec![ThresholdTest::Never];
    let mut cuts = vec![f64::INFINITY];
    for tt in t {
        let v = (q_function(tt), q_function(tt - shift));
        let last = *vertices.last().expect("nonempty");
        if v.0 > last.0 && v.0 < 1.0 {
            vertices.push(v);
            cuts.push(tt);
            tests.push(ThresholdTest::AtLeast {
                tau: (tt / sigma_s - 0.5 / (sigma_s * sigma_s)).exp(),
            });
        }
    }
    vertices.push((1.0, 1.0));
    cuts.push(f64::NEG_INFINITY);
    tests.push(ThresholdTest::Always);
    // Segment masses as interval probabilities avoid cancellation near (1, 1).
    let slopes = cuts
        .windows(2)
        .map(|c| normal_interval(c[1] - shift, c[0] - shift, 0.0, 1.0) / normal_interval(c[1], c[0], 0.0, 1.0))
        .collect();
    Ok(RocCurve { vertices, slopes, tests })
}

/// `p(ỹ|x) = (1−γ_s) p(ỹ|x, 0) + γ_s p(ỹ|x, 1)`.
pub fn marginal_comm_channel(comm: &CommChannel) -> Result<CondMatrix> {
    let g = comm
        .state_prior()
        .ok_or_else(|| Error::Usage("the communication channel carries no state prior".into()))?;
    Ok(comm.state(0).mix(comm.state(1), g))
}

/// Operating point of one symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolAllocation {
    pub p_fa: f64,
    pub p_d: f64,
    pub segment: usize,
    /// Position along the segment; also the mixing probability of `test`.
    pub eta: f64,
    /// LR level of the segment (its slope).
    pub tau: f64,
    pub test: RandomizedTest,
}

/// Per-symbol operating points meeting an averaged false-alarm budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub p_x: Vec<f64>,
    pub alpha: f64,
    pub symbols: Vec<SymbolAllocation>,
}

impl Allocation {
    /// `Σ p_X(x) P_FA,x`.
    pub fn averaged_false_alarm(&self) -> f64 {
        self.p_x.iter().zip(&self.symbols).map(|(w, s)| w * s.p_fa).sum()
    }
    /// `Σ p_X(x) P_D,x`.
    pub fn averaged_detection(&self) -> f64 {
        self.p_x.iter().zip(&self.symbols).map(|(w, s)| w * s.p_d).sum()
    }
}

fn check_allocation_inputs(p_x: &InputDistribution, rocs: &[RocCurve], alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain("alpha", format!("{alpha} is not in (0, 1]")));
    }
    p_x.check_size(rocs.len())
}

/// Pours `Δ` of averaged budget at a time into the symbol of largest right slope.
///
/// Each pour raises `P_FA,x°` by `Δ/p_X(x°)`, clamped at 1 and at the remaining
/// budget, so the result is always feasible. Equal slopes go to the lowest index.
pub fn waterfill(p_x: &InputDistribution, rocs: &[RocCurve], alpha: f64, delta: f64) -> Result<Allocation> {
    check_allocation_inputs(p_x, rocs, alpha)?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::domain("delta", format!("{delta} must be positive")));
    }
    let w = p_x.weights();
    let mut p_fa = vec![0.0; rocs.len()];
    let mut spent = 0.0;
    loop {
        let remaining = alpha - spent;
        if remaining <= 1e-15 {
            break;
        }
        let mut best: Option<(usize, f64)> = None;
        for (x, roc) in rocs.iter().enumerate() {
            if w[x] == 0.0 || p_fa[x] >= 1.0 {
                continue;
            }
            let g = roc.right_slope(p_fa[x]);
            if best.is_none_or(|(_, bg)| g > bg) {
                best = Some((x, g));
            }
        }
        let Some((x, _)) = best else { break };
        let step = (delta.min(remaining) / w[x]).min(1.0 - p_fa[x]);
        p_fa[x] += step;
        if 1.0 - p_fa[x] < 1e-15 {
            p_fa[x] = 1.0;
        }
        spent += step * w[x];
    }
    Ok(Allocation {
        p_x: w.to_vec(),
        alpha,
        symbols: rocs.iter().zip(&p_fa).map(|(r, &p)| r.operating_point(p)).collect(),
    })
}

/// Exact optimum: fill all segments in decreasing slope order.
///
/// Ties go by symbol index, then segment index.
pub fn allocation_oracle(p_x: &InputDistribution, rocs: &[RocCurve], alpha: f64) -> Result<Allocation> {
    check_allocation_inputs(p_x, rocs, alpha)?;
    let w = p_x.weights();
    let mut segs: Vec<(f64, usize, usize)> = Vec::new();
    for (x, roc) in rocs.iter().enumerate() {
        if w[x] > 0.0 {
            segs.extend(roc.slopes().iter().enumerate().map(|(k, &s)| (s, x, k)));
        }
    }
    segs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut p_fa = vec![0.0; rocs.len()];
    let mut remaining = alpha;
    for (_, x, k) in segs {
        if remaining <= 0.0 {
            break;
        }
        let v = rocs[x].vertices();
        let width = v[k + 1].0 - v[k].0;
        let cost = w[x] * width;
        if cost <= remaining {
            p_fa[x] = v[k + 1].0;
            remaining -= cost;
        } else {
            p_fa[x] = v[k].0 + remaining / w[x];
            remaining = 0.0;
        }
    }
    Ok(Allocation {
        p_x: w.to_vec(),
        alpha,
        symbols: rocs.iter().zip(&p_fa).map(|(r, &p)| r.operating_point(p)).collect(),
    })
}

/// One composition's cross-section point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionPointIID {
    pub px_index: usize,
    pub rate: f64,
    pub alpha: f64,
    pub beta: f64,
    pub p_x: InputDistribution,
    pub allocation: Allocation,
    /// On the upper boundary of the cross-section.
    pub on_boundary: bool,
    /// β equals a boundary neighbour's within [`FLAT_TOL`].
    pub flat: bool,
}

/// Cross-section at `alpha`: `R = I(p_X, marginal channel)`, `β = β*(α)` per composition.
///
/// Output keeps the grid order; boundary and flatness flags are set.
pub fn rate_probability_region(
    pair: &BinaryStatePair,
    comm: &CommChannel,
    px_grid: &[InputDistribution],
    alpha: f64,
) -> Result<Vec<RegionPointIID>> {
    if px_grid.is_empty() {
        return Err(Error::Usage("rate_probability_region needs a nonempty p_X grid".into()));
    }
    let marginal = marginal_comm_channel(comm)?;
    let rocs = symbol_rocs(pair)?;
    let mut points: Vec<RegionPointIID> = px_grid
        .par_iter()
        .enumerate()
        .map(|(i, px)| {
            let allocation = allocation_oracle(px, &rocs, alpha)?;
            Ok(RegionPointIID {
                px_index: i,
                rate: mutual_information(px, &marginal)?,
                alpha,
                beta: allocation.averaged_detection(),
                p_x: px.clone(),
                allocation,
                on_boundary: false,
                flat: false,
            })
        })
        .collect::<Result<_>>()?;
    mark_boundary(&mut points);
    Ok(points)
}

/// Indices of the upper `(rate, β)` boundary ordered by increasing rate.
///
/// A point is kept when no point of larger rate beats its β by more than
/// [`FLAT_TOL`], so flat stretches stay on the boundary.
pub fn upper_boundary(points: &[RegionPointIID]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[b]
            .rate
            .total_cmp(&points[a].rate)
            .then(points[b].beta.total_cmp(&points[a].beta))
            .then(a.cmp(&b))
    });
    let mut out = Vec::new();
    let mut best_beta = f64::NEG_INFINITY;
    for i in order {
        if points[i].beta >= best_beta - FLAT_TOL {
            best_beta = best_beta.max(points[i].beta);
            out.push(i);
        }
    }
    out.reverse();
    out
}

fn mark_boundary(points: &mut [RegionPointIID]) {
    let b = upper_boundary(points);
    for (j, &i) in b.iter().enumerate() {
        points[i].on_boundary = true;
        let near = |k: usize| (points[k].beta - points[i].beta).abs() < FLAT_TOL;
        let flat = (j > 0 && near(b[j - 1])) || (j + 1 < b.len() && near(b[j + 1]));
        points[i].flat = flat;
    }
}

/// β on the boundary at `rate`, interpolated linearly between boundary points.
pub fn boundary_beta_at(points: &[RegionPointIID], boundary: &[usize], rate: f64) -> Option<f64> {
    let first = points[*boundary.first()?].rate;
    let last = points[*boundary.last()?].rate;
    if rate < first - 1e-12 || rate > last + 1e-12 {
        return None;
    }
    let mut best = f64::NEG_INFINITY;
    for w in boundary.windows(2) {
        let (a, b) = (&points[w[0]], &points[w[1]]);
        if rate >= a.rate - 1e-12 && rate <= b.rate + 1e-12 {
            let v = if b.rate > a.rate {
                a.beta + (b.beta - a.beta) * ((rate - a.rate) / (b.rate - a.rate)).clamp(0.0, 1.0)
            } else {
                a.beta.max(b.beta)
            };
            best = best.max(v);
        }
    }
    if boundary.len() == 1 {
        best = points[boundary[0]].beta;
    }
    Some(best)
}

/// Mutual information of the Gaussian i.i.d. on-off channel by trapezoid integration.
///
/// `x = 0` gives `N(0, σ_c²)`; `x = 1` gives `(1−γ_s)N(0, σ_c²) + γ_s N(1, σ_c²)`;
/// `P(x = 1) = t`.
pub fn gaussian_iid_mutual_information(sigma_c2: f64, gamma_s: f64, t: f64, points: usize) -> Result<f64> {
    if sigma_c2.is_nan() || sigma_c2 <= 0.0 {
        return Err(Error::domain("sigma_c2", format!("{sigma_c2} must be positive")));
    }
    if !(0.0..=1.0).contains(&gamma_s) || !(0.0..=1.0).contains(&t) {
        return Err(Error::domain("t", "t and gamma_s must lie in [0, 1]"));
    }
    if points < 3 {
        return Err(Error::Usage("trapezoid integration needs at least 3 points".into()));
    }
    let s = sigma_c2.sqrt();
    let (lo, hi) = (-12.0 * s, 1.0 + 12.0 * s);
    let h = (hi - lo) / (points - 1) as f64;
    let ln_phi = |y: f64, m: f64| -0.5 * ((y - m) / s).powi(2) - (s * (2.0 * std::f64::consts::PI).sqrt()).ln();
    let mut acc = 0.0;
    for i in 0..points {
        let y = lo + i as f64 * h;
        let l0 = ln_phi(y, 0.0);
        let l1 = ln_phi(y, 1.0);
        // ln p(y|x=1) and ln p(y)
        let lx1 = log_sum_exp(&[(1.0 - gamma_s).ln() + l0, gamma_s.ln() + l1]);
        let ly = log_sum_exp(&[(1.0 - t).ln() + l0, t.ln() + lx1]);
        let mut f = 0.0;
        if t < 1.0 {
            f += (1.0 - t) * l0.exp() * (l0 - ly);
        }
        if t > 0.0 {
            f += t * lx1.exp() * (lx1 - ly);
        }
        acc += if i == 0 || i + 1 == points { 0.5 * f } else { f };
    }
    Ok((acc * h).max(0.0))
}

/// `P_D` of the exact Gaussian ROC at `P_FA = p_fa`.
pub fn gaussian_roc_exact(sigma_s: f64, p_fa: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    if p_fa <= 0.0 {
        return 0.0;
    }
    if p_fa >= 1.0 {
        return 1.0;
    }
    let c = Normal::standard().inverse_cdf(1.0 - p_fa);
    q_function(c - 1.0 / sigma_s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{build_iid_binary, simplex_grid};
    use approx::assert_abs_diff_eq;

    fn bern(q: f64) -> Vec<f64> {
        vec![1.0 - q, q]
    }

    #[test]
    fn marginal_cases() {
        let (_, comm) = build_iid_binary(0.2, 0.2, 0.5).unwrap();
        let m = marginal_comm_channel(&comm).unwrap();
        assert_abs_diff_eq!(m.get(1, 1), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m.get(0, 1), 0.2, epsilon = 1e-15);
        let edge = comm.clone().with_state_prior(0.0).unwrap();
        assert_eq!(marginal_comm_channel(&edge).unwrap(), *comm.state(0));
        let edge = comm.clone().with_state_prior(1.0).unwrap();
        assert_eq!(marginal_comm_channel(&edge).unwrap(), *comm.state(1));
        let none = CommChannel::state_independent(
            crate::channels::Alphabet::indexed(2),
            crate::channels::Alphabet::indexed(2),
            vec![bern(0.1), bern(0.9)],
        )
        .unwrap();
        assert!(matches!(marginal_comm_channel(&none), Err(Error::Usage(_))));
    }

    #[test]
    fn binary_roc_vertices_and_slopes() {
        let roc = roc_from_likelihoods(&bern(0.2), &bern(0.8)).unwrap();
        assert_eq!(roc.vertices().len(), 3);
        assert_abs_diff_eq!(roc.vertices()[1].0, 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(roc.vertices()[1].1, 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(roc.slopes()[0], 4.0, epsilon = 1e-14);
        assert_abs_diff_eq!(roc.slopes()[1], 0.25, epsilon = 1e-14);
        assert_eq!(roc.vertices()[2], (1.0, 1.0));
    }

    #[test]
    fn identical_rows_give_diagonal() {
        let roc = roc_from_likelihoods(&[0.3, 0.5, 0.2], &[0.3, 0.5, 0.2]).unwrap();
        assert_eq!(roc.vertices(), RocCurve::diagonal().vertices());
        assert_eq!(roc.slopes(), &[1.0]);
    }

    #[test]
    fn three_output_roc_matches_enumeration() {
        let p0 = [0.5, 0.3, 0.2];
        let p1 = [0.1, 0.3, 0.6];
        let roc = roc_from_likelihoods(&p0, &p1).unwrap();
        // LR order: 3.0, 1.0, 0.2.
        let expected = [(0.0, 0.0), (0.2, 0.6), (0.5, 0.9), (1.0, 1.0)];
        for (v, e) in roc.vertices().iter().zip(expected) {
            assert_abs_diff_eq!(v.0, e.0, epsilon = 1e-15);
            assert_abs_diff_eq!(v.1, e.1, epsilon = 1e-15);
        }
        // No subset test lies above the curve.
        for mask in 0u32..8 {
            let (fa, d) = (0..3).filter(|y| mask >> y & 1 == 1).fold((0.0, 0.0), |a, y| (a.0 + p0[y], a.1 + p1[y]));
            assert!(d <= roc.p_d_at(fa) + 1e-12);
        }
    }

    #[test]
    fn support_violation_is_rejected() {
        assert!(matches!(
            roc_from_likelihoods(&[0.5, 0.5], &[1.0, 0.0]),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn tests_attain_vertices() {
        let p0 = [0.5, 0.3, 0.2];
        let p1 = [0.1, 0.3, 0.6];
        let roc = roc_from_likelihoods(&p0, &p1).unwrap();
        for (t, v) in roc.tests().iter().zip(roc.vertices()) {
            let (fa, d) = (0..3)
                .filter(|&y| t.declares(likelihood_ratio(p0[y], p1[y])))
                .fold((0.0, 0.0), |a, y| (a.0 + p0[y], a.1 + p1[y]));
            assert_abs_diff_eq!(fa, v.0, epsilon = 1e-15);
            assert_abs_diff_eq!(d, v.1, epsilon = 1e-15);
        }
    }

    #[test]
    fn gaussian_roc_cases() {
        let roc = gaussian_roc(1.0, &[0.5]).unwrap();
        assert_abs_diff_eq!(roc.vertices()[1].0, 0.308537538725987, epsilon = 1e-12);
        assert_abs_diff_eq!(roc.vertices()[1].1, 0.691462461274013, epsilon = 1e-12);
        let ThresholdTest::AtLeast { tau } = roc.tests()[1] else { panic!() };
        assert_abs_diff_eq!(tau, 1.0, epsilon = 1e-15);
        let h = 1e-4;
        let r = gaussian_roc(1.0, &[0.5 + h, 0.5 - h]).unwrap();
        assert_abs_diff_eq!(r.slopes()[1], 1.0, epsilon = 1e-4);
        let wide = gaussian_roc(1.0, &default_gaussian_thresholds(1.0, DEFAULT_GAUSSIAN_SAMPLES)).unwrap();
        assert!(wide.vertices()[1].0 < 1e-15);
        assert!(wide.vertices()[wide.vertices().len() - 2].0 > 1.0 - 1e-15);
        for s in wide.slopes().windows(2) {
            assert!(s[1] <= s[0] * (1.0 + 1e-9) + 1e-12);
        }
        assert_abs_diff_eq!(wide.p_d_at(0.308537538725987), 0.691462461274013, epsilon = 1e-5);
        assert_abs_diff_eq!(gaussian_roc_exact(1.0, 0.308537538725987), 0.691462461274013, epsilon = 1e-9);
        assert!(gaussian_roc(0.0, &[0.0]).is_err());
    }

    #[test]
    fn waterfill_binary_example() {
        let (pair, _) = build_iid_binary(0.2, 0.2, 0.5).unwrap();
        let rocs = symbol_rocs(&pair).unwrap();
        let px = InputDistribution::binary(0.5).unwrap();
        let a = waterfill(&px, &rocs, 0.05, DEFAULT_DELTA).unwrap();
        assert_abs_diff_eq!(a.symbols[1].p_fa, 0.1, epsilon = 1e-9);
        assert_abs_diff_eq!(a.symbols[0].p_fa, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.averaged_detection(), 0.2, epsilon = 1e-9);
        let full = waterfill(&px, &rocs, 1.0, DEFAULT_DELTA).unwrap();
        assert!(full.symbols.iter().all(|s| s.p_fa == 1.0 && s.p_d == 1.0));
        assert_eq!(full.averaged_detection(), 1.0);
    }

    #[test]
    fn single_symbol_is_uncoupled() {
        let roc = roc_from_likelihoods(&bern(0.2), &bern(0.8)).unwrap();
        let px = InputDistribution::point_mass(1, 0);
        for alpha in [0.05, 0.2, 0.6] {
            let a = waterfill(&px, std::slice::from_ref(&roc), alpha, 1e-4).unwrap();
            assert_abs_diff_eq!(a.symbols[0].p_fa, alpha, epsilon = 1e-12);
            assert_abs_diff_eq!(a.symbols[0].p_d, roc.p_d_at(alpha), epsilon = 1e-12);
        }
    }

    #[test]
    fn oracle_cases() {
        let (pair, _) = build_iid_binary(0.2, 0.2, 0.5).unwrap();
        let rocs = symbol_rocs(&pair).unwrap();
        // x = 1 segment 1 costs 0.4·0.2 = 0.08 and gains 0.32; the rest of 0.12 goes to x = 0 at slope 1.
        let px = InputDistribution::new(vec![0.6, 0.4]).unwrap();
        let a = allocation_oracle(&px, &rocs, 0.2).unwrap();
        assert_abs_diff_eq!(a.averaged_detection(), 0.32 + 0.12, epsilon = 1e-12);
        assert_abs_diff_eq!(a.symbols[0].p_fa, 0.2, epsilon = 1e-12);
        let diag = vec![RocCurve::diagonal(); 3];
        let px = InputDistribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        let a = allocation_oracle(&px, &diag, 0.37).unwrap();
        assert_abs_diff_eq!(a.averaged_detection(), 0.37, epsilon = 1e-12);
        assert!(allocation_oracle(&px, &diag, 0.0).is_err());
        assert!(allocation_oracle(&px, &diag, 1.5).is_err());
    }

    #[test]
    fn waterfill_skips_unused_symbols() {
        let (pair, _) = build_iid_binary(0.2, 0.2, 0.5).unwrap();
        let rocs = symbol_rocs(&pair).unwrap();
        let px = InputDistribution::point_mass(2, 1);
        let a = waterfill(&px, &rocs, 0.3, 1e-3).unwrap();
        assert_eq!(a.symbols[0].p_fa, 0.0);
        assert!(a.averaged_false_alarm() <= 0.3 + 1e-9);
    }

    #[test]
    fn randomized_test_realizes_point() {
        let p0 = bern(0.2);
        let p1 = bern(0.8);
        let roc = roc_from_likelihoods(&p0, &p1).unwrap();
        let op = roc.operating_point(0.1);
        let pd: f64 = (0..2).map(|y| p1[y] * op.test.declare_probability(likelihood_ratio(p0[y], p1[y]))).sum();
        let pf: f64 = (0..2).map(|y| p0[y] * op.test.declare_probability(likelihood_ratio(p0[y], p1[y]))).sum();
        assert_abs_diff_eq!(pf, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(pd, 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(op.eta, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn binary_capacity_and_flat_region() {
        let (pair, comm) = build_iid_binary(0.2, 0.2, 0.5).unwrap();
        let grid = simplex_grid(2, 1000);
        let pts = rate_probability_region(&pair, &comm, &grid, 0.15).unwrap();
        let best = pts.iter().max_by(|a, b| a.rate.total_cmp(&b.rate)).unwrap();
        assert_abs_diff_eq!(best.p_x.weights()[1], 0.4824, epsilon = 1.5e-3);
        for p in &pts {
            let t = p.p_x.weights()[1];
            if t >= 0.75 {
                assert_abs_diff_eq!(p.beta, 0.6, epsilon = 1e-12);
                assert!(p.on_boundary && p.flat);
            } else if t > 0.49 {
                assert_abs_diff_eq!(p.beta, 0.15 + 0.6 * t, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn gaussian_trapezoid_agrees_with_binary_limit() {
        // With γ_s = 0 the channel carries nothing.
        assert!(gaussian_iid_mutual_information(1.0, 0.0, 0.5, 2001).unwrap() < 1e-12);
        let a = gaussian_iid_mutual_information(1.0, 0.5, 0.476, 4001).unwrap();
        let b = gaussian_iid_mutual_information(1.0, 0.5, 0.476, 8001).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        assert!(a > 0.0);
    }
}
