//! State-dependent sensing and communication channel models.
//!
//! A [`BinaryStatePair`] holds the detector's likelihoods `p₀(y|x)` and `p₁(y|x)`.
//! A [`CommChannel`] holds the receiver's per-state channel `p(ỹ|x,s)` and,
//! for the i.i.d.-state setting, the state prior `P(S = 1)`.
//!
//! All values are immutable once constructed.

mod config;
pub(crate) mod gaussian;

pub use config::{ChannelConfig, ClosedForm};
pub use gaussian::{quantize_gaussian, GaussianSpec, Quantizer};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-sum tolerance for conditional matrices.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Ordered finite alphabet of symbol labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet(Vec<String>);

impl Alphabet {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Usage("alphabet must be nonempty".into()));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::Usage(format!("duplicate alphabet symbol `{l}`")));
            }
        }
        Ok(Alphabet(labels))
    }

    /// Alphabet `{0, 1, …, n−1}`.
    pub fn indexed(n: usize) -> Self {
        Alphabet((0..n).map(|i| i.to_string()).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.0
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.0.iter().position(|l| l == label)
    }

    pub fn label(&self, i: usize) -> &str {
        &self.0[i]
    }
}

/// Row-stochastic conditional probability matrix, rows indexed by input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondMatrix {
    rows: Vec<Vec<f64>>,
}

impl CondMatrix {
    /// Validates nonnegativity, equal row lengths and unit row sums.
    pub fn new(name: &str, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::Dimension(format!("`{name}` must have at least one row and column")));
        }
        let width = rows[0].len();
        for (x, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::Dimension(format!(
                    "`{name}` row {x} has {} entries, expected {width}",
                    row.len()
                )));
            }
            if let Some(bad) = row.iter().find(|p| !p.is_finite() || **p < 0.0) {
                return Err(Error::NotStochastic {
                    matrix: name.into(),
                    row: x,
                    msg: format!("entry {bad} is not a probability"),
                });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::NotStochastic {
                    matrix: name.into(),
                    row: x,
                    msg: format!("sums to {sum}"),
                });
            }
        }
        Ok(CondMatrix { rows })
    }

    pub(crate) fn from_rows_unchecked(rows: Vec<Vec<f64>>) -> Self {
        CondMatrix { rows }
    }

    pub fn n_inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn n_outputs(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.rows[x]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.rows[x][y]
    }

    /// Convex combination `(1−w)·self + w·other`.
    pub fn mix(&self, other: &CondMatrix, w: f64) -> CondMatrix {
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.iter().zip(b).map(|(pa, pb)| (1.0 - w) * pa + w * pb).collect())
            .collect();
        CondMatrix { rows }
    }
}

/// Composition `p_X` over the input alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDistribution(Vec<f64>);

impl InputDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Usage("input distribution must be nonempty".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::domain("p_X", format!("negative or non-finite weight in {weights:?}")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::domain("p_X", format!("weights sum to {sum}")));
        }
        Ok(InputDistribution(weights))
    }

    /// `(1−t, t)` over a binary input alphabet.
    pub fn binary(t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::domain("t", format!("{t} is not in [0, 1]")));
        }
        Ok(InputDistribution(vec![1.0 - t, t]))
    }

    pub fn point_mass(size: usize, at: usize) -> Self {
        let mut w = vec![0.0; size];
        w[at] = 1.0;
        InputDistribution(w)
    }

    pub fn uniform(size: usize) -> Self {
        InputDistribution(vec![1.0 / size as f64; size])
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn check_size(&self, n_inputs: usize) -> Result<()> {
        if self.0.len() != n_inputs {
            return Err(Error::Dimension(format!(
                "p_X has {} entries but the channel has {n_inputs} inputs",
                self.0.len()
            )));
        }
        Ok(())
    }
}

/// All compositions of `k` symbols with denominators `m`, in lexicographic order.
///
/// For `k = 2` this is the grid `t ∈ {0, 1/m, …, 1}` as `(1−t, t)`.
pub fn simplex_grid(k: usize, m: usize) -> Vec<InputDistribution> {
    fn rec(k: usize, left: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<InputDistribution>) {
        if cur.len() + 1 == k {
            cur.push(left);
            out.push(InputDistribution(cur.iter().map(|&c| c as f64 / m as f64).collect()));
            cur.pop();
            return;
        }
        for c in (0..=left).rev() {
            cur.push(c);
            rec(k, left - c, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k == 0 || m == 0 {
        return out;
    }
    rec(k, m, m, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Per-input diagnostics of a candidate likelihood pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Largest |row sum − 1| across both matrices.
    pub max_row_residual: f64,
    /// Cells `(x, y)` holding a negative or non-finite entry in either matrix.
    pub invalid_entries: Vec<(usize, usize)>,
    /// Cells where exactly one state assigns zero probability.
    pub support_mismatches: Vec<(usize, usize)>,
    /// `Var_s(LLR(Y|x))` for `s = 0, 1`, per input.
    pub llr_variance: Vec<[f64; 2]>,
    /// Shape problems, if any.
    pub shape_errors: Vec<String>,
}

impl Diagnostics {
    pub fn passes(&self) -> bool {
        self.shape_errors.is_empty()
            && self.invalid_entries.is_empty()
            && self.support_mismatches.is_empty()
            && self.max_row_residual <= ROW_SUM_TOL
            && self.llr_variance.iter().flatten().all(|v| v.is_finite())
    }

    pub fn max_llr_variance(&self) -> f64 {
        self.llr_variance.iter().flatten().copied().fold(0.0, f64::max)
    }
}

/// Checks row-stochasticity, common support and finite LLR variance.
pub fn validate(p0: &[Vec<f64>], p1: &[Vec<f64>]) -> Diagnostics {
    let mut d = Diagnostics {
        max_row_residual: 0.0,
        invalid_entries: Vec::new(),
        support_mismatches: Vec::new(),
        llr_variance: Vec::new(),
        shape_errors: Vec::new(),
    };
    if p0.len() != p1.len() {
        d.shape_errors
            .push(format!("p0 has {} rows, p1 has {}", p0.len(), p1.len()));
        return d;
    }
    for (x, (r0, r1)) in p0.iter().zip(p1).enumerate() {
        if r0.len() != r1.len() || r0.len() != p0[0].len() {
            d.shape_errors.push(format!("row {x} lengths differ"));
            continue;
        }
        for row in [r0, r1] {
            let s: f64 = row.iter().sum();
            d.max_row_residual = d.max_row_residual.max((s - 1.0).abs());
        }
        let mut moments = [[0.0f64; 2]; 2];
        for (y, (&a, &b)) in r0.iter().zip(r1).enumerate() {
            if !(a.is_finite() && b.is_finite()) || a < 0.0 || b < 0.0 {
                d.invalid_entries.push((x, y));
                continue;
            }
            match (a > 0.0, b > 0.0) {
                (true, true) => {
                    let l = b.ln() - a.ln();
                    for (s, p) in [a, b].into_iter().enumerate() {
                        moments[s][0] += p * l;
                        moments[s][1] += p * l * l;
                    }
                }
                (false, false) => {}
                _ => d.support_mismatches.push((x, y)),
            }
        }
        d.llr_variance.push([
            (moments[0][1] - moments[0][0].powi(2)).max(0.0),
            (moments[1][1] - moments[1][0].powi(2)).max(0.0),
        ]);
    }
    d
}

/// Detector likelihoods `p₀(y|x)`, `p₁(y|x)` over common alphabets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinaryStatePair {
    inputs: Alphabet,
    outputs: Alphabet,
    p0: CondMatrix,
    p1: CondMatrix,
    /// ln p₀ and ln p₁, −∞ outside the common support.
    #[serde(skip)]
    log_p: [Vec<Vec<f64>>; 2],
}

impl BinaryStatePair {
    pub fn new(inputs: Alphabet, outputs: Alphabet, p0: Vec<Vec<f64>>, p1: Vec<Vec<f64>>) -> Result<Self> {
        let diag = validate(&p0, &p1);
        if let Some(msg) = diag.shape_errors.first() {
            return Err(Error::Dimension(msg.clone()));
        }
        if !diag.support_mismatches.is_empty() {
            return Err(Error::SupportMismatch {
                cells: diag.support_mismatches,
            });
        }
        let p0 = CondMatrix::new("p0", p0)?;
        let p1 = CondMatrix::new("p1", p1)?;
        if p0.n_inputs() != inputs.len() || p0.n_outputs() != outputs.len() {
            return Err(Error::Dimension(format!(
                "matrices are {}x{} but alphabets have {} inputs and {} outputs",
                p0.n_inputs(),
                p0.n_outputs(),
                inputs.len(),
                outputs.len()
            )));
        }
        let logs = |m: &CondMatrix| -> Vec<Vec<f64>> {
            m.rows()
                .iter()
                .map(|r| r.iter().map(|&p| if p > 0.0 { p.ln() } else { f64::NEG_INFINITY }).collect())
                .collect()
        };
        let log_p = [logs(&p0), logs(&p1)];
        Ok(BinaryStatePair {
            inputs,
            outputs,
            p0,
            p1,
            log_p,
        })
    }

    pub fn inputs(&self) -> &Alphabet {
        &self.inputs
    }

    pub fn outputs(&self) -> &Alphabet {
        &self.outputs
    }

    pub fn p0(&self) -> &CondMatrix {
        &self.p0
    }

    pub fn p1(&self) -> &CondMatrix {
        &self.p1
    }

    /// Likelihood matrix for state `s ∈ {0, 1}`.
    pub fn state(&self, s: usize) -> &CondMatrix {
        if s == 0 {
            &self.p0
        } else {
            &self.p1
        }
    }

    pub(crate) fn log_p(&self, s: usize) -> &[Vec<f64>] {
        &self.log_p[s]
    }

    pub fn diagnostics(&self) -> Diagnostics {
        validate(self.p0.rows(), self.p1.rows())
    }

    /// ln(p₁(y|x)/p₀(y|x)). Zero for cells outside the common support.
    pub fn llr(&self, x: usize, y: usize) -> Result<f64> {
        if x >= self.inputs.len() {
            return Err(Error::domain("x", format!("unknown input symbol index {x}")));
        }
        if y >= self.outputs.len() {
            return Err(Error::domain("y", format!("unknown output symbol index {y}")));
        }
        Ok(self.llr_unchecked(x, y))
    }

    #[inline]
    pub(crate) fn llr_unchecked(&self, x: usize, y: usize) -> f64 {
        let (a, b) = (self.log_p[0][x][y], self.log_p[1][x][y]);
        if a.is_finite() {
            b - a
        } else {
            0.0
        }
    }

    /// True when `p₀(·|x) = p₁(·|x)` for every `x`.
    pub fn states_identical(&self) -> bool {
        self.p0 == self.p1
    }
}

/// Receiver channel `p(ỹ|x,s)` for both states plus an optional state prior.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommChannel {
    inputs: Alphabet,
    outputs: Alphabet,
    per_state: [CondMatrix; 2],
    state_prior: Option<f64>,
}

impl CommChannel {
    pub fn new(
        inputs: Alphabet,
        outputs: Alphabet,
        state0: Vec<Vec<f64>>,
        state1: Vec<Vec<f64>>,
        state_prior: Option<f64>,
    ) -> Result<Self> {
        let m0 = CondMatrix::new("p_tilde[s=0]", state0)?;
        let m1 = CondMatrix::new("p_tilde[s=1]", state1)?;
        for m in [&m0, &m1] {
            if m.n_inputs() != inputs.len() || m.n_outputs() != outputs.len() {
                return Err(Error::Dimension(format!(
                    "communication matrix is {}x{} but alphabets have {} inputs and {} outputs",
                    m.n_inputs(),
                    m.n_outputs(),
                    inputs.len(),
                    outputs.len()
                )));
            }
        }
        if let Some(g) = state_prior {
            if !(0.0..=1.0).contains(&g) {
                return Err(Error::domain("state_prior", format!("{g} is not in [0, 1]")));
            }
        }
        Ok(CommChannel {
            inputs,
            outputs,
            per_state: [m0, m1],
            state_prior,
        })
    }

    /// State-independent channel: the same matrix for both states.
    pub fn state_independent(inputs: Alphabet, outputs: Alphabet, rows: Vec<Vec<f64>>) -> Result<Self> {
        CommChannel::new(inputs, outputs, rows.clone(), rows, None)
    }

    pub fn inputs(&self) -> &Alphabet {
        &self.inputs
    }

    pub fn outputs(&self) -> &Alphabet {
        &self.outputs
    }

    pub fn state(&self, s: usize) -> &CondMatrix {
        &self.per_state[s.min(1)]
    }

    pub fn state_prior(&self) -> Option<f64> {
        self.state_prior
    }

    pub fn with_state_prior(mut self, prior: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&prior) {
            return Err(Error::domain("state_prior", format!("{prior} is not in [0, 1]")));
        }
        self.state_prior = Some(prior);
        Ok(self)
    }
}

fn bern(p: f64) -> Vec<f64> {
    vec![1.0 - p, p]
}

/// `Bern(1 − p)` with entries bit-identical to `bern(p)` reversed.
fn bern_flipped(p: f64) -> Vec<f64> {
    vec![p, 1.0 - p]
}

fn check_open(name: &str, v: f64, lo: f64, hi: f64) -> Result<()> {
    if v > lo && v < hi {
        Ok(())
    } else {
        Err(Error::domain(name, format!("{v} is not in ({lo}, {hi})")))
    }
}

/// `Ỹ = x ⊕ Z̃`, `Y = S·x ⊕ Z` with `Z̃ ~ Bern(p)`, `Z ~ Bern(q)`, fixed state `S`.
pub fn build_binary_multiplicative(p: f64, q: f64) -> Result<(BinaryStatePair, CommChannel)> {
    check_open("p", p, 0.0, 0.5)?;
    check_open("q", q, 0.0, 0.5)?;
    let pair = BinaryStatePair::new(
        Alphabet::indexed(2),
        Alphabet::indexed(2),
        vec![bern(q), bern(q)],
        vec![bern(q), bern_flipped(q)],
    )?;
    let comm = CommChannel::state_independent(Alphabet::indexed(2), Alphabet::indexed(2), vec![bern(p), bern_flipped(p)])?;
    Ok((pair, comm))
}

/// `Ỹᵢ = Sᵢxᵢ ⊕ Z̃ᵢ`, `Yᵢ = Sᵢxᵢ ⊕ Zᵢ` with i.i.d. `Sᵢ ~ Bern(γ_s)`.
pub fn build_iid_binary(gamma1: f64, gamma2: f64, gamma_s: f64) -> Result<(BinaryStatePair, CommChannel)> {
    check_open("gamma1", gamma1, 0.0, 0.5)?;
    check_open("gamma2", gamma2, 0.0, 0.5)?;
    check_open("gamma_s", gamma_s, 0.0, 1.0)?;
    let pair = BinaryStatePair::new(
        Alphabet::indexed(2),
        Alphabet::indexed(2),
        vec![bern(gamma2), bern(gamma2)],
        vec![bern(gamma2), bern_flipped(gamma2)],
    )?;
    let comm = CommChannel::new(
        Alphabet::indexed(2),
        Alphabet::indexed(2),
        vec![bern(gamma1), bern(gamma1)],
        vec![bern(gamma1), bern_flipped(gamma1)],
        Some(gamma_s),
    )?;
    Ok((pair, comm))
}
