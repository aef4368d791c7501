//! Gaussian channel specifications and their finite-alphabet quantization.

use serde::{Deserialize, Serialize};

use super::{Alphabet, BinaryStatePair, CommChannel};
use crate::error::{Error, Result};
use crate::info::normal_interval;

/// Largest output alphabet a quantized vector channel may produce.
const MAX_VECTOR_CELLS: usize = 1 << 22;

/// Continuous Gaussian channel families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaussianSpec {
    /// `Ỹ = x + Z̃`; `Y = x + Z` under `S = 0`, `Y = h·x + Z` under `S = 1`; unit noise.
    ScalarFixedState {
        h: f64,
        power: f64,
        /// Finite input grid; defaults to `{−√P, 0, √P}`.
        #[serde(default)]
        inputs: Option<Vec<f64>>,
    },
    /// On-off signalling `x ∈ {0, 1}` with `Ỹ = S·x + Z̃`, `Y = S·x + Z`, `S ~ Bern(γ_s)`.
    ScalarIid {
        sigma_c2: f64,
        sigma_s2: f64,
        gamma_s: f64,
    },
    /// `Ỹ = H̃x + Z̃`, `Y = H_s x + Z`, identity noise covariances.
    VectorFixedState {
        h0: Vec<Vec<f64>>,
        h1: Vec<Vec<f64>>,
        h_tilde: Vec<Vec<f64>>,
        power: f64,
        /// Finite grid of input vectors; defaults to `{0, ±√P·e_j}`.
        #[serde(default)]
        inputs: Option<Vec<Vec<f64>>>,
    },
}

/// Output-cell layout for quantization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantizer {
    /// Number of uniform-width interior cells per output axis.
    pub bins: usize,
    /// Half-width of the covered interval beyond the extreme means, in noise standard deviations.
    pub span_sigmas: f64,
}

impl Default for Quantizer {
    fn default() -> Self {
        Quantizer {
            bins: 512,
            span_sigmas: 8.0,
        }
    }
}

impl GaussianSpec {
    pub fn check(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::domain(name, format!("{v} must be positive")))
            }
        };
        match self {
            GaussianSpec::ScalarFixedState { h, power, inputs } => {
                positive("power", *power)?;
                if !h.is_finite() {
                    return Err(Error::domain("h", "must be finite"));
                }
                if let Some(g) = inputs {
                    if g.is_empty() {
                        return Err(Error::Usage("input grid must be nonempty".into()));
                    }
                }
                Ok(())
            }
            GaussianSpec::ScalarIid {
                sigma_c2,
                sigma_s2,
                gamma_s,
            } => {
                positive("sigma_c2", *sigma_c2)?;
                positive("sigma_s2", *sigma_s2)?;
                if !(*gamma_s >= 0.0 && *gamma_s <= 1.0) {
                    return Err(Error::domain("gamma_s", format!("{gamma_s} is not in [0, 1]")));
                }
                Ok(())
            }
            GaussianSpec::VectorFixedState {
                h0,
                h1,
                h_tilde,
                power,
                inputs,
            } => {
                positive("power", *power)?;
                let nt = matrix_shape("h0", h0)?.1;
                if matrix_shape("h1", h1)? != matrix_shape("h0", h0)? {
                    return Err(Error::Dimension("h0 and h1 must have the same shape".into()));
                }
                if matrix_shape("h_tilde", h_tilde)?.1 != nt {
                    return Err(Error::Dimension(format!("h_tilde must have {nt} columns")));
                }
                if let Some(g) = inputs {
                    if g.is_empty() || g.iter().any(|v| v.len() != nt) {
                        return Err(Error::Dimension(format!("every input vector must have length {nt}")));
                    }
                }
                Ok(())
            }
        }
    }
}

pub(crate) fn matrix_shape(name: &str, m: &[Vec<f64>]) -> Result<(usize, usize)> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 || m.iter().any(|r| r.len() != cols) {
        return Err(Error::Dimension(format!("`{name}` must be a nonempty rectangular matrix")));
    }
    if m.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::domain(name, "entries must be finite"));
    }
    Ok((rows, cols))
}

/// Cell edges for one output axis.
struct Axis {
    edges: Vec<f64>,
}

impl Axis {
    fn covering(means: impl Iterator<Item = f64>, sigma: f64, q: &Quantizer) -> Axis {
        let (lo, hi) = means.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), m| (l.min(m), h.max(m)));
        let lo = lo - q.span_sigmas * sigma;
        let hi = hi + q.span_sigmas * sigma;
        let width = (hi - lo) / q.bins as f64;
        let mut edges = Vec::with_capacity(q.bins + 3);
        edges.push(f64::NEG_INFINITY);
        edges.extend((0..=q.bins).map(|i| if i == q.bins { hi } else { lo + i as f64 * width }));
        edges.push(f64::INFINITY);
        Axis { edges }
    }

    fn cells(&self) -> usize {
        self.edges.len() - 1
    }

    fn probabilities(&self, mean: f64, sigma: f64) -> Vec<f64> {
        self.edges
            .windows(2)
            .map(|w| normal_interval(w[0], w[1], mean, sigma))
            .collect()
    }
}

fn normalized(mut row: Vec<f64>) -> Vec<f64> {
    let s: f64 = row.iter().sum();
    row.iter_mut().for_each(|p| *p /= s);
    row
}

/// Product-cell probabilities of `N(mean, σ²I)` on per-axis grids, first axis slowest.
fn product_row(axes: &[Axis], mean: &[f64], sigma: f64) -> Vec<f64> {
    let mut row = vec![1.0];
    for (axis, &m) in axes.iter().zip(mean) {
        let p = axis.probabilities(m, sigma);
        row = row.iter().flat_map(|a| p.iter().map(move |b| a * b)).collect();
    }
    normalized(row)
}

fn mat_vec(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    m.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

fn cell_alphabet(n: usize) -> Alphabet {
    Alphabet((0..n).map(|i| format!("c{i}")).collect())
}

fn check_support(p0: &[Vec<f64>], p1: &[Vec<f64>]) -> Result<()> {
    for (x, (a, b)) in p0.iter().zip(p1).enumerate() {
        if let Some(y) = a.iter().zip(b).position(|(u, v)| (*u > 0.0) != (*v > 0.0)) {
            return Err(Error::Quantization(format!(
                "cell {y} underflows under one state only for input {x}; reduce span_sigmas or increase bins"
            )));
        }
    }
    Ok(())
}

/// Quantizes a Gaussian channel family onto uniform output cells plus two unbounded tails.
///
/// Sensing and communication outputs get separate grids; both states share the sensing grid.
pub fn quantize_gaussian(spec: &GaussianSpec, q: Quantizer) -> Result<(BinaryStatePair, CommChannel)> {
    if q.bins < 16 {
        return Err(Error::Quantization(format!("{} bins is below the minimum of 16; use more bins", q.bins)));
    }
    if q.span_sigmas.is_nan() || q.span_sigmas < 4.0 {
        return Err(Error::Quantization(format!(
            "span of {} sigmas is below the minimum of 4; use a wider span",
            q.span_sigmas
        )));
    }
    spec.check()?;
    match spec {
        GaussianSpec::ScalarFixedState { h, power, inputs } => {
            let grid = inputs.clone().unwrap_or_else(|| {
                let a = power.sqrt();
                vec![-a, 0.0, a]
            });
            let sense = Axis::covering(grid.iter().flat_map(|&x| [x, h * x]), 1.0, &q);
            let p0: Vec<_> = grid.iter().map(|&x| normalized(sense.probabilities(x, 1.0))).collect();
            let p1: Vec<_> = grid.iter().map(|&x| normalized(sense.probabilities(h * x, 1.0))).collect();
            check_support(&p0, &p1)?;
            let comm_axis = Axis::covering(grid.iter().copied(), 1.0, &q);
            let c: Vec<_> = grid.iter().map(|&x| normalized(comm_axis.probabilities(x, 1.0))).collect();
            let inputs = Alphabet(grid.iter().map(|x| format!("{x}")).collect());
            let pair = BinaryStatePair::new(inputs.clone(), cell_alphabet(sense.cells()), p0, p1)?;
            let comm = CommChannel::state_independent(inputs, cell_alphabet(comm_axis.cells()), c)?;
            Ok((pair, comm))
        }
        GaussianSpec::ScalarIid {
            sigma_c2,
            sigma_s2,
            gamma_s,
        } => {
            let grid = [0.0, 1.0];
            let (ss, sc) = (sigma_s2.sqrt(), sigma_c2.sqrt());
            let sense = Axis::covering(grid.iter().copied(), ss, &q);
            let p0: Vec<_> = grid.iter().map(|_| normalized(sense.probabilities(0.0, ss))).collect();
            let p1: Vec<_> = grid.iter().map(|&x| normalized(sense.probabilities(x, ss))).collect();
            check_support(&p0, &p1)?;
            let comm_axis = Axis::covering(grid.iter().copied(), sc, &q);
            let c0: Vec<_> = grid.iter().map(|_| normalized(comm_axis.probabilities(0.0, sc))).collect();
            let c1: Vec<_> = grid.iter().map(|&x| normalized(comm_axis.probabilities(x, sc))).collect();
            let inputs = Alphabet::indexed(2);
            let pair = BinaryStatePair::new(inputs.clone(), cell_alphabet(sense.cells()), p0, p1)?;
            let comm = CommChannel::new(inputs, cell_alphabet(comm_axis.cells()), c0, c1, Some(*gamma_s))?;
            Ok((pair, comm))
        }
        GaussianSpec::VectorFixedState {
            h0,
            h1,
            h_tilde,
            power,
            inputs,
        } => {
            let nt = h0[0].len();
            let grid = inputs.clone().unwrap_or_else(|| {
                let a = power.sqrt();
                let mut g = vec![vec![0.0; nt]];
                for j in 0..nt {
                    for sign in [1.0, -1.0] {
                        let mut v = vec![0.0; nt];
                        v[j] = sign * a;
                        g.push(v);
                    }
                }
                g
            });
            let cells = (q.bins + 2).checked_pow(h0.len().max(h_tilde.len()) as u32);
            if cells.is_none_or(|c| c > MAX_VECTOR_CELLS) {
                return Err(Error::Quantization(format!(
                    "{} bins per axis gives more than {MAX_VECTOR_CELLS} output cells; use fewer bins",
                    q.bins
                )));
            }
            let means0: Vec<Vec<f64>> = grid.iter().map(|x| mat_vec(h0, x)).collect();
            let means1: Vec<Vec<f64>> = grid.iter().map(|x| mat_vec(h1, x)).collect();
            let axes: Vec<Axis> = (0..h0.len())
                .map(|k| Axis::covering(means0.iter().chain(&means1).map(|m| m[k]), 1.0, &q))
                .collect();
            let p0: Vec<_> = means0.iter().map(|m| product_row(&axes, m, 1.0)).collect();
            let p1: Vec<_> = means1.iter().map(|m| product_row(&axes, m, 1.0)).collect();
            check_support(&p0, &p1)?;
            let cm: Vec<Vec<f64>> = grid.iter().map(|x| mat_vec(h_tilde, x)).collect();
            let caxes: Vec<Axis> = (0..h_tilde.len())
                .map(|k| Axis::covering(cm.iter().map(|m| m[k]), 1.0, &q))
                .collect();
            let c: Vec<_> = cm.iter().map(|m| product_row(&caxes, m, 1.0)).collect();
            let n_out: usize = axes.iter().map(Axis::cells).product();
            let n_comm: usize = caxes.iter().map(Axis::cells).product();
            let inputs = Alphabet(grid.iter().map(|x| format!("{x:?}")).collect());
            let pair = BinaryStatePair::new(inputs.clone(), cell_alphabet(n_out), p0, p1)?;
            let comm = CommChannel::state_independent(inputs, cell_alphabet(n_comm), c)?;
            Ok((pair, comm))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::conditional_kl;
    use crate::channels::InputDistribution;
    use approx::assert_abs_diff_eq;

    fn scalar(h: f64, power: f64) -> GaussianSpec {
        GaussianSpec::ScalarFixedState {
            h,
            power,
            inputs: None,
        }
    }

    #[test]
    fn iid_rows_sum_to_one() {
        let spec = GaussianSpec::ScalarIid {
            sigma_c2: 1.0,
            sigma_s2: 1.0,
            gamma_s: 0.5,
        };
        let (pair, comm) = quantize_gaussian(&spec, Quantizer::default()).unwrap();
        for m in [pair.p0(), pair.p1(), comm.state(0), comm.state(1)] {
            assert_eq!(m.n_outputs(), 514);
            for r in m.rows() {
                assert_abs_diff_eq!(r.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn scalar_fixed_kl_matches_closed_form() {
        let (pair, _) = quantize_gaussian(&scalar(0.5, 1.0), Quantizer::default()).unwrap();
        // input grid {−1, 0, 1}; x = 1 is index 2. D(N(0.5,1)‖N(1,1)) = 0.125
        let px = InputDistribution::point_mass(3, 2);
        let kl = conditional_kl(pair.p1(), pair.p0(), &px).unwrap();
        assert!((kl - 0.125).abs() < 1e-3, "kl = {kl}");
    }

    #[test]
    fn scalar_fixed_llr_variance_matches_linear_llr() {
        let (pair, _) = quantize_gaussian(&scalar(0.5, 1.0), Quantizer::default()).unwrap();
        let d = pair.diagnostics();
        assert!(d.passes());
        // LLR is affine in y with slope (h−1)x, so Var = (1−h)²x² = 0.25 at x = ±1.
        for x in [0, 2] {
            for s in 0..2 {
                assert!((d.llr_variance[x][s] - 0.25).abs() < 1e-2, "{:?}", d.llr_variance[x]);
            }
        }
        assert_eq!(d.llr_variance[1], [0.0, 0.0]);
    }

    #[test]
    fn too_few_bins_is_a_quantization_error() {
        for spec in [
            scalar(0.5, 1.0),
            GaussianSpec::ScalarIid {
                sigma_c2: 1.0,
                sigma_s2: 1.0,
                gamma_s: 0.5,
            },
        ] {
            let err = quantize_gaussian(&spec, Quantizer { bins: 8, span_sigmas: 8.0 }).unwrap_err();
            assert!(matches!(err, Error::Quantization(_)));
        }
    }

    #[test]
    fn far_tails_underflow_is_reported() {
        let spec = GaussianSpec::ScalarFixedState {
            h: 0.0,
            power: 1.0,
            inputs: Some(vec![0.0, 80.0]),
        };
        let err = quantize_gaussian(&spec, Quantizer::default()).unwrap_err();
        assert!(matches!(err, Error::Quantization(_)), "{err}");
    }

    #[test]
    fn vector_quantization_kl() {
        let spec = GaussianSpec::VectorFixedState {
            h0: vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            h1: vec![vec![2.0, 0.0], vec![0.0, 1.0]],
            h_tilde: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            power: 1.0,
            inputs: Some(vec![vec![0.3, 0.4]]),
        };
        let (pair, _) = quantize_gaussian(&spec, Quantizer { bins: 96, span_sigmas: 8.0 }).unwrap();
        let px = InputDistribution::point_mass(1, 0);
        // ‖(H1−H0)x‖²/2 = (0.36 + 0.16)/2
        let kl = conditional_kl(pair.p1(), pair.p0(), &px).unwrap();
        assert!((kl - 0.26).abs() < 1e-3, "kl = {kl}");
    }

    #[test]
    fn invalid_specs() {
        assert!(matches!(
            scalar(0.5, 0.0).check().unwrap_err(),
            Error::Domain { .. }
        ));
        let bad = GaussianSpec::VectorFixedState {
            h0: vec![vec![1.0, 0.0]],
            h1: vec![vec![1.0]],
            h_tilde: vec![vec![1.0, 0.0]],
            power: 1.0,
            inputs: None,
        };
        assert!(matches!(bad.check().unwrap_err(), Error::Dimension(_)));
    }
}
