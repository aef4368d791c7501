//! Seeded simulation of the likelihood-ratio detectors.
//!
//! Fixed state: a composition-exact codeword is sent `trials` times per
//! blocklength and true state, and the normalized LLR is compared with `τ`.
//! Every codeword of one composition is statistically identical under a
//! symbolwise channel, so one representative suffices.
//!
//! i.i.d. states: each symbol draws its own state and the per-symbol randomized
//! test of an [`Allocation`] decides.
//!
//! Randomness: trial `k` at blocklength `n` and state `s` reads stream
//! `n·2³³ + s·2³² + k` of a ChaCha8 generator keyed by the seed. Results are
//! bitwise reproducible regardless of thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{Beta, ContinuousCDF};

use crate::channels::{BinaryStatePair, CommChannel, InputDistribution};
use crate::error::{Error, Result};
use crate::exponent::TiltedFamily;
use crate::iid::{likelihood_ratio, Allocation};

/// Points with fewer error events are left out of the exponent fit.
pub const MIN_FIT_ERRORS: u64 = 20;
const MAX_TRIALS: u64 = 1 << 32;
const MAX_BLOCKLENGTH: usize = 1 << 30;

/// How output sequences are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// Multinomial output counts per input symbol; the LLR depends on nothing else.
    #[default]
    Counts,
    /// One draw per channel use.
    PerSymbol,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub seed: u64,
    pub trials: u64,
    pub n_values: Vec<usize>,
    pub composition: InputDistribution,
    pub sampling: SamplingMode,
}

impl SimConfig {
    pub fn new(seed: u64, trials: u64, n_values: Vec<usize>, composition: InputDistribution) -> Result<Self> {
        let cfg = SimConfig {
            seed,
            trials,
            n_values,
            composition,
            sampling: SamplingMode::Counts,
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        if self.trials == 0 || self.trials > MAX_TRIALS {
            return Err(Error::domain("trials", format!("{} is not in [1, 2^32]", self.trials)));
        }
        if self.n_values.is_empty() {
            return Err(Error::Usage("at least one blocklength is required".into()));
        }
        if let Some(&n) = self.n_values.iter().find(|&&n| n == 0 || n > MAX_BLOCKLENGTH) {
            return Err(Error::domain("n", format!("{n} is not in [1, 2^30]")));
        }
        Ok(())
    }
}

/// Largest-remainder rounding of `p_X·n`; ties go to the lower symbol index.
pub fn round_composition(p_x: &InputDistribution, n: usize) -> Vec<usize> {
    let w = p_x.weights();
    let mut counts: Vec<usize> = w.iter().map(|&p| (p * n as f64).floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..w.len()).collect();
    let rem = |x: usize| w[x] * n as f64 - counts[x] as f64;
    order.sort_by(|&a, &b| rem(b).total_cmp(&rem(a)).then(a.cmp(&b)));
    for &x in order.iter().cycle().take(n.saturating_sub(assigned)) {
        counts[x] += 1;
    }
    counts
}

fn realized(counts: &[usize], n: usize) -> InputDistribution {
    InputDistribution::new(counts.iter().map(|&c| c as f64 / n as f64).collect())
        .expect("rounded counts form a distribution")
}

/// Generator for one trial.
pub fn trial_rng(seed: u64, n: usize, state: u8, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(n, state, trial));
    rng
}

fn stream_id(n: usize, state: u8, trial: u64) -> u64 {
    ((n as u64) << 33) | (u64::from(state & 1) << 32) | trial
}

/// Multinomial counts of `m` draws from `probs` via sequential binomials.
fn multinomial<R: Rng>(rng: &mut R, m: u64, probs: &[f64], out: &mut [u64]) {
    let mut left = m;
    let mut mass = 1.0;
    for (y, &p) in probs.iter().enumerate() {
        if y + 1 == probs.len() {
            out[y] = left;
            break;
        }
        if left == 0 || p <= 0.0 {
            out[y] = 0;
        } else if p >= mass {
            out[y] = left;
        } else {
            let c = Binomial::new(left, (p / mass).min(1.0)).expect("valid binomial").sample(rng);
            out[y] = c;
        }
        left -= out[y];
        mass -= p;
    }
}

/// Index drawn from `probs` by inversion.
fn categorical<R: Rng>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (y, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return y;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Empirical probability with a two-sided 95% Clopper-Pearson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub trials: u64,
    pub errors: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl Estimate {
    pub fn new(errors: u64, trials: u64) -> Self {
        let (lo, hi) = clopper_pearson(errors, trials, 0.05);
        Estimate {
            trials,
            errors,
            p_hat: errors as f64 / trials as f64,
            ci_lo: lo,
            ci_hi: hi,
        }
    }

    /// Binomial standard error at the empirical rate.
    pub fn std_error(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.trials as f64).sqrt()
    }
}

/// Exact binomial interval at level `1 − alpha`.
pub fn clopper_pearson(k: u64, n: u64, alpha: f64) -> (f64, f64) {
    let (kf, nf) = (k as f64, n as f64);
    let lo = if k == 0 {
        0.0
    } else {
        Beta::new(kf, nf - kf + 1.0).expect("positive shape").inverse_cdf(alpha / 2.0)
    };
    let hi = if k == n {
        1.0
    } else {
        Beta::new(kf + 1.0, nf - kf).expect("positive shape").inverse_cdf(1.0 - alpha / 2.0)
    };
    (lo, hi)
}

/// One simulated `(n, state)` cell of the fixed-state experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedStateRow {
    pub n: usize,
    pub state: u8,
    pub estimate: Estimate,
    /// Chernoff bound at the realized composition; absent outside the nontrivial range.
    pub bound: Option<f64>,
    pub realized_counts: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Fitted,
    /// Too few measurable points; only the Chernoff bounds are reported.
    BoundOnly,
}

/// Slope of `−ln p̂` against `n` by weighted least squares.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentFit {
    pub status: FitStatus,
    pub exponent: Option<f64>,
    pub std_error: Option<f64>,
    pub n_used: Vec<usize>,
    pub n_excluded: Vec<usize>,
}

/// Weights are inverse delta-method variances `trials·p̂/(1−p̂)`.
pub fn fit_exponent(points: &[(usize, Estimate)]) -> ExponentFit {
    let (used, excluded): (Vec<_>, Vec<_>) = points
        .iter()
        .partition(|(_, e)| e.errors >= MIN_FIT_ERRORS && e.errors < e.trials);
    let n_used: Vec<usize> = used.iter().map(|(n, _)| *n).collect();
    let n_excluded: Vec<usize> = excluded.iter().map(|(n, _)| *n).collect();
    let distinct = {
        let mut v = n_used.clone();
        v.sort_unstable();
        v.dedup();
        v.len()
    };
    if distinct < 2 {
        return ExponentFit {
            status: FitStatus::BoundOnly,
            exponent: None,
            std_error: None,
            n_used,
            n_excluded,
        };
    }
    let data: Vec<(f64, f64, f64)> = used
        .iter()
        .map(|(n, e)| {
            let w = e.trials as f64 * e.p_hat / (1.0 - e.p_hat);
            (*n as f64, -e.p_hat.ln(), w)
        })
        .collect();
    let sw: f64 = data.iter().map(|d| d.2).sum();
    let xm = data.iter().map(|d| d.2 * d.0).sum::<f64>() / sw;
    let ym = data.iter().map(|d| d.2 * d.1).sum::<f64>() / sw;
    let sxx: f64 = data.iter().map(|d| d.2 * (d.0 - xm).powi(2)).sum();
    let sxy: f64 = data.iter().map(|d| d.2 * (d.0 - xm) * (d.1 - ym)).sum();
    ExponentFit {
        status: FitStatus::Fitted,
        exponent: Some(sxy / sxx),
        std_error: Some((1.0 / sxx).sqrt()),
        n_used,
        n_excluded,
    }
}

/// Fixed-state experiment output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub tau: f64,
    pub rows: Vec<FixedStateRow>,
    pub fit_fa: ExponentFit,
    pub fit_md: ExponentFit,
    /// `(E_FA, E_MD)` at the nominal composition, when `τ` is nontrivial.
    pub theory: Option<(f64, f64)>,
}

/// `(exp(−n(uτ − κ₀(u))), exp(−n((u−1)τ − κ₀(u))))` with `τ = κ₀′(u)`.
pub fn chernoff_bound_check(pair: &BinaryStatePair, p_x: &InputDistribution, u: f64, n: usize) -> Result<(f64, f64)> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::domain("u", format!("{u} is not in (0, 1)")));
    }
    let tf = TiltedFamily::new(pair, p_x)?;
    let tau = tf.kappa0_prime(u);
    let k = tf.kappa0(u);
    let nf = n as f64;
    Ok(((-nf * (u * tau - k)).exp(), (-nf * ((u - 1.0) * tau - k)).exp()))
}

fn bounds_at(pair: &BinaryStatePair, p_x: &InputDistribution, tau: f64, n: usize) -> Option<(f64, f64)> {
    let tf = TiltedFamily::new(pair, p_x).ok()?;
    let u = tf.solve_u_for_tau(tau).ok()?;
    let k = tf.kappa0(u);
    let nf = n as f64;
    Some(((-nf * (u * tau - k)).exp(), (-nf * ((u - 1.0) * tau - k)).exp()))
}

/// Counts trials whose detector errs; `state = 0` counts false alarms.
fn count_fixed_errors(pair: &BinaryStatePair, cfg: &SimConfig, counts: &[usize], n: usize, state: u8, tau: f64) -> u64 {
    let rows = pair.state(state as usize);
    let m = pair.outputs().len();
    let llr: Vec<Vec<f64>> = (0..counts.len())
        .map(|x| (0..m).map(|y| pair.llr_unchecked(x, y)).collect())
        .collect();
    let codeword: Vec<usize> = counts.iter().enumerate().flat_map(|(x, &c)| std::iter::repeat_n(x, c)).collect();
    let threshold = n as f64 * tau;
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);
    let chunk = 4096u64;
    let chunks = cfg.trials.div_ceil(chunk);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut tally = vec![vec![0u64; m]; counts.len()];
            let mut errors = 0u64;
            for trial in c * chunk..((c + 1) * chunk).min(cfg.trials) {
                let mut rng = base.clone();
                rng.set_stream(stream_id(n, state, trial));
                // The statistic is a function of the (x, y) counts in both modes,
                // so exact ties resolve identically.
                match cfg.sampling {
                    SamplingMode::Counts => {
                        for (x, &cx) in counts.iter().enumerate() {
                            if cx > 0 {
                                multinomial(&mut rng, cx as u64, rows.row(x), &mut tally[x]);
                            }
                        }
                    }
                    SamplingMode::PerSymbol => {
                        tally.iter_mut().for_each(|t| t.fill(0));
                        for &x in &codeword {
                            tally[x][categorical(&mut rng, rows.row(x))] += 1;
                        }
                    }
                }
                let mut sum = 0.0;
                for (x, t) in tally.iter().enumerate() {
                    if counts[x] == 0 {
                        continue;
                    }
                    for (y, &k) in t.iter().enumerate() {
                        if k > 0 {
                            sum += k as f64 * llr[x][y];
                        }
                    }
                }
                let declare_one = sum >= threshold;
                if declare_one == (state == 0) {
                    errors += 1;
                }
            }
            errors
        })
        .sum()
}

/// Threshold test `(1/n) ln(p₁(yⁿ|xⁿ)/p₀(yⁿ|xⁿ)) ≥ τ` under both true states.
pub fn simulate_fixed_state(pair: &BinaryStatePair, config: &SimConfig, tau: f64) -> Result<SimResult> {
    config.check()?;
    config.composition.check_size(pair.inputs().len())?;
    if !tau.is_finite() {
        return Err(Error::domain("tau", "must be finite"));
    }
    let mut rows = Vec::with_capacity(config.n_values.len() * 2);
    for &n in &config.n_values {
        let counts = round_composition(&config.composition, n);
        let bounds = bounds_at(pair, &realized(&counts, n), tau, n);
        for state in 0..2u8 {
            let errors = count_fixed_errors(pair, config, &counts, n, state, tau);
            rows.push(FixedStateRow {
                n,
                state,
                estimate: Estimate::new(errors, config.trials),
                bound: bounds.map(|b| if state == 0 { b.0 } else { b.1 }),
                realized_counts: counts.clone(),
            });
        }
    }
    let pick = |s: u8| -> Vec<(usize, Estimate)> {
        rows.iter().filter(|r| r.state == s).map(|r| (r.n, r.estimate)).collect()
    };
    let theory = TiltedFamily::new(pair, &config.composition)
        .ok()
        .and_then(|tf| tf.solve_u_for_tau(tau).ok().map(|u| (tf, u)))
        .and_then(|(tf, u)| tf.exponent_pair(u).ok())
        .map(|e| (e.e_fa, e.e_md));
    Ok(SimResult {
        tau,
        fit_fa: fit_exponent(&pick(0)),
        fit_md: fit_exponent(&pick(1)),
        rows,
        theory,
    })
}

/// Time-averaged rates of the i.i.d.-state experiment at one blocklength.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IidSimRow {
    pub n: usize,
    /// False alarms over channel uses with `S = 0`.
    pub false_alarm: Estimate,
    /// Detections over channel uses with `S = 1`.
    pub detection: Estimate,
    /// The allocation's expectations at the realized composition.
    pub expected_p_fa: f64,
    pub expected_p_d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IidSimResult {
    pub rows: Vec<IidSimRow>,
}

/// States `Sᵢ ~ Bern(γ_s)` i.i.d.; symbol `x` uses the allocation's randomized test.
pub fn simulate_iid(
    pair: &BinaryStatePair,
    comm: &CommChannel,
    config: &SimConfig,
    allocation: &Allocation,
) -> Result<IidSimResult> {
    config.check()?;
    let k = pair.inputs().len();
    config.composition.check_size(k)?;
    if allocation.symbols.len() != k || allocation.p_x.len() != k {
        return Err(Error::Usage(format!(
            "allocation covers {} symbols but the channel has {k}",
            allocation.symbols.len()
        )));
    }
    if allocation
        .p_x
        .iter()
        .zip(config.composition.weights())
        .any(|(a, b)| (a - b).abs() > 1e-9)
    {
        return Err(Error::Usage("allocation was computed for a different composition".into()));
    }
    let gamma = comm
        .state_prior()
        .ok_or_else(|| Error::Usage("i.i.d. simulation needs a state prior".into()))?;
    let m = pair.outputs().len();
    // decide[x][y]: probability of declaring 1.
    let decide: Vec<Vec<f64>> = (0..k)
        .map(|x| {
            (0..m)
                .map(|y| {
                    let (a, b) = (pair.p0().get(x, y), pair.p1().get(x, y));
                    if a == 0.0 {
                        0.0
                    } else {
                        allocation.symbols[x].test.declare_probability(likelihood_ratio(a, b))
                    }
                })
                .collect()
        })
        .collect();
    let base = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rows = Vec::with_capacity(config.n_values.len());
    for &n in &config.n_values {
        let counts = round_composition(&config.composition, n);
        let chunk = 1024u64;
        let chunks = config.trials.div_ceil(chunk);
        let [fa, n0, det, n1] = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = [0u64; 4];
                let mut buf = vec![0u64; m];
                for trial in c * chunk..((c + 1) * chunk).min(config.trials) {
                    let mut rng = base.clone();
                    rng.set_stream(stream_id(n, 0, trial));
                    for (x, &cx) in counts.iter().enumerate() {
                        if cx == 0 {
                            continue;
                        }
                        let ones = Binomial::new(cx as u64, gamma).expect("valid prior").sample(&mut rng);
                        for (s, uses) in [(0usize, cx as u64 - ones), (1usize, ones)] {
                            if uses == 0 {
                                continue;
                            }
                            multinomial(&mut rng, uses, pair.state(s).row(x), &mut buf);
                            let mut declared = 0u64;
                            for (y, &cy) in buf.iter().enumerate() {
                                let d = decide[x][y];
                                declared += if cy == 0 || d <= 0.0 {
                                    0
                                } else if d >= 1.0 {
                                    cy
                                } else {
                                    Binomial::new(cy, d).expect("valid mixing").sample(&mut rng)
                                };
                            }
                            acc[2 * s] += declared;
                            acc[2 * s + 1] += uses;
                        }
                    }
                }
                acc
            })
            .reduce(|| [0u64; 4], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]);
        let rz = realized(&counts, n);
        let exp_fa: f64 = rz.weights().iter().zip(&allocation.symbols).map(|(w, s)| w * s.p_fa).sum();
        let exp_d: f64 = rz.weights().iter().zip(&allocation.symbols).map(|(w, s)| w * s.p_d).sum();
        rows.push(IidSimRow {
            n,
            false_alarm: Estimate::new(fa, n0.max(1)),
            detection: Estimate::new(det, n1.max(1)),
            expected_p_fa: exp_fa,
            expected_p_d: exp_d,
        });
    }
    Ok(IidSimResult { rows })
}
