//! Log-likelihood-ratio CGF, the geometric-mixture (tilted) family and the
//! false-alarm / missed-detection exponent pair it parametrizes.
//!
//! For a composition `p_X` the normalized CGF of the n-letter LLR under state 0 is
//!
//! ```text
//! κ₀(u) = Σ_x p_X(x) ln Z_x(u),    Z_x(u) = Σ_y p₀(y|x)^{1−u} p₁(y|x)^u
//! ```
//!
//! and the tilted law `p_u ∝ p₀^{1−u} p₁^u` yields the exponents
//! `E_FA = D(p_u‖p₀|p_X) = u κ₀′(u) − κ₀(u)` and
//! `E_MD = D(p_u‖p₁|p_X) = (u−1) κ₀′(u) − κ₀(u)` of the threshold test
//! `(1/n) LLR ≥ τ` with `τ = κ₀′(u)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channels::{BinaryStatePair, CondMatrix, InputDistribution};
use crate::error::{Error, Result};
use crate::info::log_sum_exp;

/// Internal clamp keeping `u` off the endpoints of (0, 1).
pub const U_CLAMP: f64 = 1e-9;
/// Residual tolerance on `κ₀′(u) − τ` for [`TiltedFamily::solve_u_for_tau`].
pub const TAU_TOL: f64 = 1e-10;

/// Degenerate operating points where one exponent is infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrivialCorner {
    /// Always declare state 1: `(E_FA, E_MD) = (0, ∞)`.
    FalseAlarmZero,
    /// Always declare state 0: `(E_FA, E_MD) = (∞, 0)`.
    MissedDetectionZero,
}

impl fmt::Display for TrivialCorner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrivialCorner::FalseAlarmZero => write!(f, "(E_FA, E_MD) = (0, inf)"),
            TrivialCorner::MissedDetectionZero => write!(f, "(E_FA, E_MD) = (inf, 0)"),
        }
    }
}

/// Exponents of the LLR threshold test at tilt `u`, in nats per symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentPair {
    pub e_fa: f64,
    pub e_md: f64,
    pub u: f64,
    pub tau: f64,
}

/// `ln(p₁(y|x)/p₀(y|x))`.
pub fn llr(pair: &BinaryStatePair, x: usize, y: usize) -> Result<f64> {
    pair.llr(x, y)
}

/// `D(p_A ‖ p_B | p_X) = Σ_x p_X(x) Σ_y p_A(y|x) ln(p_A(y|x)/p_B(y|x))`, nats.
pub fn conditional_kl(pa: &CondMatrix, pb: &CondMatrix, p_x: &InputDistribution) -> Result<f64> {
    if pa.n_inputs() != pb.n_inputs() || pa.n_outputs() != pb.n_outputs() {
        return Err(Error::Dimension("conditional_kl needs matrices of equal shape".into()));
    }
    p_x.check_size(pa.n_inputs())?;
    let mut total = 0.0;
    for (x, &w) in p_x.weights().iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let mut d = 0.0;
        for (y, (&a, &b)) in pa.row(x).iter().zip(pb.row(x)).enumerate() {
            if a == 0.0 {
                continue;
            }
            if b == 0.0 {
                return Err(Error::SupportMismatch { cells: vec![(x, y)] });
            }
            d += a * (a.ln() - b.ln());
        }
        total += w * d;
    }
    Ok(total.max(0.0))
}

/// Geometric-mixture family of a likelihood pair under a fixed composition.
#[derive(Debug, Clone, Copy)]
pub struct TiltedFamily<'a> {
    pair: &'a BinaryStatePair,
    p_x: &'a InputDistribution,
}

impl<'a> TiltedFamily<'a> {
    pub fn new(pair: &'a BinaryStatePair, p_x: &'a InputDistribution) -> Result<Self> {
        p_x.check_size(pair.inputs().len())?;
        Ok(TiltedFamily { pair, p_x })
    }

    pub fn pair(&self) -> &'a BinaryStatePair {
        self.pair
    }

    pub fn p_x(&self) -> &'a InputDistribution {
        self.p_x
    }

    /// Log-domain exponents `(1−u) ln p₀ + u ln p₁` over the support of row `x`.
    fn log_terms(&self, x: usize, u: f64) -> Vec<f64> {
        let (l0, l1) = (&self.pair.log_p(0)[x], &self.pair.log_p(1)[x]);
        l0.iter()
            .zip(l1)
            .filter(|(a, _)| a.is_finite())
            .map(|(a, b)| a + u * (b - a))
            .collect()
    }

    /// `ln Z_x(u)`, max-shifted.
    pub fn log_normalizer(&self, x: usize, u: f64) -> f64 {
        log_sum_exp(&self.log_terms(x, u))
    }

    fn active(&self) -> impl Iterator<Item = (usize, f64)> + 'a {
        self.p_x.weights().iter().copied().enumerate().filter(|(_, w)| *w > 0.0)
    }

    /// `κ₀(u) = Σ_x p_X(x) ln Z_x(u)`.
    pub fn kappa0(&self, u: f64) -> f64 {
        self.active().map(|(x, w)| w * self.log_normalizer(x, u)).sum()
    }

    /// Analytic `κ₀′(u) = Σ_x p_X(x) E_{p_u}[LLR | x]`.
    pub fn kappa0_prime(&self, u: f64) -> f64 {
        self.active()
            .map(|(x, w)| {
                let terms = self.log_terms(x, u);
                let lz = log_sum_exp(&terms);
                let (l0, l1) = (&self.pair.log_p(0)[x], &self.pair.log_p(1)[x]);
                let mean: f64 = l0
                    .iter()
                    .zip(l1)
                    .filter(|(a, _)| a.is_finite())
                    .zip(&terms)
                    .map(|((a, b), t)| (t - lz).exp() * (b - a))
                    .sum();
                w * mean
            })
            .sum()
    }

    /// `κ₁(v) = Σ_x p_X(x) ln Σ_y p₀^{−v} p₁^{v+1}`, evaluated directly in the linear domain.
    pub fn kappa1(&self, v: f64) -> f64 {
        self.active()
            .map(|(x, w)| {
                let z: f64 = self
                    .pair
                    .p0()
                    .row(x)
                    .iter()
                    .zip(self.pair.p1().row(x))
                    .filter(|(a, _)| **a > 0.0)
                    .map(|(a, b)| a.powf(-v) * b.powf(v + 1.0))
                    .sum();
                w * z.ln()
            })
            .sum()
    }

    /// `D(p₀‖p₁|p_X)`; `−κ₀′(0)`.
    pub fn kl_01(&self) -> f64 {
        conditional_kl(self.pair.p0(), self.pair.p1(), self.p_x).expect("validated pair")
    }

    /// `D(p₁‖p₀|p_X)`; `κ₀′(1)`.
    pub fn kl_10(&self) -> f64 {
        conditional_kl(self.pair.p1(), self.pair.p0(), self.p_x).expect("validated pair")
    }

    fn tilted_rows(&self, u: f64) -> CondMatrix {
        let rows = (0..self.pair.inputs().len())
            .map(|x| {
                let (l0, l1) = (&self.pair.log_p(0)[x], &self.pair.log_p(1)[x]);
                let lz = self.log_normalizer(x, u);
                l0.iter()
                    .zip(l1)
                    .map(|(a, b)| if a.is_finite() { (a + u * (b - a) - lz).exp() } else { 0.0 })
                    .collect()
            })
            .collect();
        CondMatrix::from_rows_unchecked(rows)
    }

    /// Normalized geometric mixture `p_u(y|x) ∝ p₀^{1−u}(y|x) p₁^u(y|x)`.
    pub fn tilted_distribution(&self, u: f64) -> Result<CondMatrix> {
        check_open_u(u)?;
        Ok(self.tilted_rows(u))
    }

    /// `(D(p_u‖p₀|p_X), D(p_u‖p₁|p_X))` with threshold `τ = E_FA − E_MD`.
    pub fn exponent_pair(&self, u: f64) -> Result<ExponentPair> {
        check_open_u(u)?;
        let pu = self.tilted_rows(u);
        let e_fa = conditional_kl(&pu, self.pair.p0(), self.p_x)?;
        let e_md = conditional_kl(&pu, self.pair.p1(), self.p_x)?;
        Ok(ExponentPair {
            e_fa,
            e_md,
            u,
            tau: e_fa - e_md,
        })
    }

    /// Unique `u ∈ (0, 1)` with `κ₀′(u) = τ`, by bisection.
    pub fn solve_u_for_tau(&self, tau: f64) -> Result<f64> {
        let (lo, hi) = (-self.kl_01(), self.kl_10());
        if !(tau > lo && tau < hi) {
            let corner = if tau <= lo {
                TrivialCorner::FalseAlarmZero
            } else {
                TrivialCorner::MissedDetectionZero
            };
            return Err(Error::ThresholdRange { tau, lo, hi, corner });
        }
        let (mut a, mut b) = (U_CLAMP, 1.0 - U_CLAMP);
        if self.kappa0_prime(a) >= tau {
            return Ok(a);
        }
        if self.kappa0_prime(b) <= tau {
            return Ok(b);
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            let r = self.kappa0_prime(m) - tau;
            if r.abs() < TAU_TOL || b - a < 1e-15 {
                return Ok(m);
            }
            if r < 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(0.5 * (a + b))
    }
}

fn check_open_u(u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(Error::domain("u", format!("{u} is not in the open interval (0, 1)")))
    }
}
