//! Rate-exponent regions for a state that stays fixed over the whole block.
//!
//! A point `(R, E_FA, E_MD)` is achievable iff for some composition `p_X` and
//! tilt `u ∈ (0, 1)`
//!
//! ```text
//! R    ≤ min_s I(p_X, p_{Ỹ|X,s})
//! E_FA ≤ D(p_u‖p₀|p_X)
//! E_MD ≤ D(p_u‖p₁|p_X)
//! ```
//!
//! The generic engine sweeps both parameters on explicit grids. Closed forms
//! cover the binary multiplicative channel at `u = ½`, the scalar Gaussian
//! channel, and the vector Gaussian channel ([`mimo`]).

pub mod mimo;

use rayon::prelude::*;
use serde::Serialize;

pub use crate::exponent::TrivialCorner;
pub use mimo::{mimo_region, waterfilling_covariance, MimoDesign};

use crate::channels::{BinaryStatePair, CommChannel, CondMatrix, InputDistribution};
use crate::error::{Error, Result};
use crate::exponent::TiltedFamily;
use crate::info::{binary_convolution, binary_entropy, binary_kl};

/// An achievable tuple on an interior tradeoff curve, nats per symbol.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionPointFixed {
    pub px_index: usize,
    pub rate: f64,
    pub e_fa: f64,
    pub e_md: f64,
    pub p_x: InputDistribution,
    pub u: f64,
    pub tau: f64,
}

/// One row of a fixed-state sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum RegionEntry {
    Interior(RegionPointFixed),
    /// Symbolic corner; the infinite exponent never enters arithmetic.
    Corner {
        px_index: usize,
        rate: f64,
        corner: TrivialCorner,
    },
    TimeShare {
        point: RegionPointFixed,
        alpha: f64,
    },
}

impl RegionEntry {
    pub fn px_index(&self) -> usize {
        match self {
            RegionEntry::Interior(p) | RegionEntry::TimeShare { point: p, .. } => p.px_index,
            RegionEntry::Corner { px_index, .. } => *px_index,
        }
    }
}

/// `I(X;Ỹ) = Σ p_X(x) p(ỹ|x) ln(p(ỹ|x)/p(ỹ))`, nats.
pub fn mutual_information(p_x: &InputDistribution, channel: &CondMatrix) -> Result<f64> {
    p_x.check_size(channel.n_inputs())?;
    let mut p_y = vec![0.0; channel.n_outputs()];
    for (x, &w) in p_x.weights().iter().enumerate() {
        for (acc, &p) in p_y.iter_mut().zip(channel.row(x)) {
            *acc += w * p;
        }
    }
    let mut mi = 0.0;
    for (x, &w) in p_x.weights().iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (&p, &q) in channel.row(x).iter().zip(&p_y) {
            if p > 0.0 {
                mi += w * p * (p.ln() - q.ln());
            }
        }
    }
    Ok(mi.max(0.0))
}

/// `min_s I(p_X, p_{Ỹ|X,s})`.
pub fn min_rate_over_states(p_x: &InputDistribution, comm: &CommChannel) -> Result<f64> {
    let r0 = mutual_information(p_x, comm.state(0))?;
    if comm.state(0) == comm.state(1) {
        return Ok(r0);
    }
    Ok(r0.min(mutual_information(p_x, comm.state(1))?))
}

/// `K` points `i/(K+1)` strictly inside (0, 1); `K = 101` includes `u = ½`.
pub fn open_unit_grid(k: usize) -> Vec<f64> {
    (1..=k).map(|i| i as f64 / (k + 1) as f64).collect()
}

/// Cartesian sweep over compositions and tilts.
///
/// Each composition contributes its interior curve ordered by `u`, bracketed by
/// the two trivial corners. Output is ordered by `(p_X index, u)`.
pub fn sweep_region(
    pair: &BinaryStatePair,
    comm: &CommChannel,
    px_grid: &[InputDistribution],
    u_grid: &[f64],
) -> Result<Vec<RegionEntry>> {
    if px_grid.is_empty() || u_grid.is_empty() {
        return Err(Error::Usage("sweep_region needs nonempty p_X and u grids".into()));
    }
    if comm.inputs().len() != pair.inputs().len() {
        return Err(Error::Dimension("sensing and communication input alphabets differ".into()));
    }
    let mut u_sorted = u_grid.to_vec();
    u_sorted.sort_by(f64::total_cmp);
    let blocks: Vec<Vec<RegionEntry>> = px_grid
        .par_iter()
        .enumerate()
        .map(|(i, px)| {
            let tf = TiltedFamily::new(pair, px)?;
            let rate = min_rate_over_states(px, comm)?;
            let mut out = Vec::with_capacity(u_sorted.len() + 2);
            out.push(RegionEntry::Corner {
                px_index: i,
                rate,
                corner: TrivialCorner::FalseAlarmZero,
            });
            for &u in &u_sorted {
                let e = tf.exponent_pair(u)?;
                out.push(RegionEntry::Interior(RegionPointFixed {
                    px_index: i,
                    rate,
                    e_fa: e.e_fa,
                    e_md: e.e_md,
                    p_x: px.clone(),
                    u,
                    tau: e.tau,
                }));
            }
            out.push(RegionEntry::Corner {
                px_index: i,
                rate,
                corner: TrivialCorner::MissedDetectionZero,
            });
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(blocks.into_iter().flatten().collect())
}

/// Equal-exponent curve of the binary multiplicative channel: `(H₂(t∗p) − H₂(p), t·D₂(½‖q))`.
pub fn binary_equal_exponent_curve(p: f64, q: f64, t_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    t_grid
        .iter()
        .map(|&t| {
            if !(0.5..=1.0).contains(&t) {
                return Err(Error::domain("t", format!("{t} is not in [0.5, 1]")));
            }
            let r = binary_entropy(binary_convolution(t, p)) - binary_entropy(p);
            Ok((r, t * binary_kl(0.5, q)))
        })
        .collect()
}

/// A point of the closed-form scalar Gaussian region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianPoint {
    pub u: f64,
    pub rate: f64,
    pub e_fa: f64,
    pub e_md: f64,
    pub tau: f64,
}

/// Closed-form region of the scalar Gaussian channel with `N(0, P)` input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianRegion {
    pub h: f64,
    pub power: f64,
    /// `½ ln(1 + P)`.
    pub rate_max: f64,
    /// `(1−h)² P / 2`, the exponent on either axis at the curve's ends.
    pub intercept: f64,
    pub points: Vec<GaussianPoint>,
}

/// `E_FA = u²(1−h)²P/2`, `E_MD = (1−u)²(1−h)²P/2`, `R ≤ ½ ln(1+P)`.
///
/// `u` may include the closure endpoints 0 and 1.
pub fn gaussian_region(h: f64, power: f64, u_grid: &[f64]) -> Result<GaussianRegion> {
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::domain("power", format!("{power} must be positive")));
    }
    if h == 1.0 {
        return Err(Error::Degenerate("h = 1 makes the two states indistinguishable".into()));
    }
    let intercept = (1.0 - h).powi(2) * power / 2.0;
    let rate_max = 0.5 * power.ln_1p();
    let points = u_grid
        .iter()
        .map(|&u| {
            if !(0.0..=1.0).contains(&u) {
                return Err(Error::domain("u", format!("{u} is not in [0, 1]")));
            }
            let e_fa = u * u * intercept;
            let e_md = (1.0 - u) * (1.0 - u) * intercept;
            Ok(GaussianPoint {
                u,
                rate: rate_max,
                e_fa,
                e_md,
                tau: e_fa - e_md,
            })
        })
        .collect::<Result<_>>()?;
    Ok(GaussianRegion {
        h,
        power,
        rate_max,
        intercept,
        points,
    })
}

/// Splits time: a fraction `alpha` communicates, the rest senses.
pub fn time_sharing_baseline(
    pair: &BinaryStatePair,
    comm: &CommChannel,
    p_x: &InputDistribution,
    u: f64,
    alpha: f64,
) -> Result<RegionPointFixed> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::domain("alpha", format!("{alpha} is not in [0, 1]")));
    }
    let tf = TiltedFamily::new(pair, p_x)?;
    let e = tf.exponent_pair(u)?;
    let rate = min_rate_over_states(p_x, comm)?;
    Ok(RegionPointFixed {
        px_index: 0,
        rate: alpha * rate,
        e_fa: (1.0 - alpha) * e.e_fa,
        e_md: (1.0 - alpha) * e.e_md,
        p_x: p_x.clone(),
        u,
        tau: e.tau,
    })
}

/// Splits time between a communication-optimal and a detection-optimal scheme.
///
/// Returns `(α·R_comm, (1−α)·E_FA_sense, (1−α)·E_MD_sense)`.
pub fn time_sharing_extremes(
    comm_point: &RegionPointFixed,
    sense_point: &RegionPointFixed,
    alpha: f64,
) -> Result<(f64, f64, f64)> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::domain("alpha", format!("{alpha} is not in [0, 1]")));
    }
    Ok((
        alpha * comm_point.rate,
        (1.0 - alpha) * sense_point.e_fa,
        (1.0 - alpha) * sense_point.e_md,
    ))
}
