//! JSON channel definitions.
//!
//! ```json
//! {"kind": "binary_multiplicative", "p": 0.1, "q": 0.2}
//! {"kind": "iid_binary", "gamma1": 0.2, "gamma2": 0.2, "gamma_s": 0.5}
//! {"kind": "gaussian_scalar_fixed", "h": 0.5, "power": [1, 2, 4]}
//! {"kind": "gaussian_scalar_iid", "sigma_c2": 1, "sigma_s2": 1, "gamma_s": 0.5, "bins": 512}
//! {"kind": "gaussian_vector_fixed", "h0": [[0,0],[0,0]], "h1": [[2,0],[0,1]],
//!  "h_tilde": [[0.7071,0.7071],[0.7071,-0.7071]], "power": 10}
//! {"kind": "explicit", "input_alphabet": ["0","1"], "output_alphabet": ["a","b"],
//!  "p0": [[0.9,0.1],[0.9,0.1]], "p1": [[0.9,0.1],[0.2,0.8]],
//!  "comm": [[[0.9,0.1],[0.1,0.9]]], "state_prior": 0.5}
//! ```

use serde::{Deserialize, Serialize};

use super::gaussian::{quantize_gaussian, GaussianSpec, Quantizer};
use super::{build_binary_multiplicative, build_iid_binary, Alphabet, BinaryStatePair, CommChannel};
use crate::error::{Error, Result};

type Matrix = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Powers {
    One(f64),
    Many(Vec<f64>),
}

impl Powers {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Powers::One(p) => vec![*p],
            Powers::Many(v) => v.clone(),
        }
    }
}

/// A channel definition as loaded from JSON.
///
/// The document form carries the variant in a `kind` field; the derives use the
/// externally tagged form so that field paths survive deserialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelConfig {
    BinaryMultiplicative {
        p: f64,
        q: f64,
    },
    IidBinary {
        gamma1: f64,
        gamma2: f64,
        gamma_s: f64,
    },
    GaussianScalarFixed {
        h: f64,
        power: Powers,
        #[serde(default)]
        inputs: Option<Vec<f64>>,
        #[serde(default)]
        bins: Option<usize>,
        #[serde(default)]
        span_sigmas: Option<f64>,
    },
    GaussianScalarIid {
        sigma_c2: f64,
        sigma_s2: f64,
        gamma_s: f64,
        #[serde(default)]
        bins: Option<usize>,
        #[serde(default)]
        span_sigmas: Option<f64>,
    },
    GaussianVectorFixed {
        h0: Matrix,
        h1: Matrix,
        h_tilde: Matrix,
        power: f64,
        #[serde(default)]
        inputs: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        bins: Option<usize>,
        #[serde(default)]
        span_sigmas: Option<f64>,
    },
    Explicit {
        input_alphabet: Vec<String>,
        output_alphabet: Vec<String>,
        p0: Matrix,
        p1: Matrix,
        #[serde(default)]
        comm_output_alphabet: Option<Vec<String>>,
        /// One matrix (state independent) or two (`s = 0`, `s = 1`).
        comm: Vec<Matrix>,
        #[serde(default)]
        state_prior: Option<f64>,
    },
}

/// Closed-form Gaussian paths that bypass quantization.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosedForm {
    ScalarFixed { h: f64, powers: Vec<f64> },
    VectorFixed { h0: Matrix, h1: Matrix, h_tilde: Matrix, power: f64 },
    ScalarIid { sigma_c2: f64, sigma_s2: f64, gamma_s: f64 },
}

/// 1-based line of the first `"key":` occurrence, or 1.
fn key_line(src: &str, key: &str) -> usize {
    let needle = format!("\"{key}\"");
    let mut from = 0;
    while let Some(off) = src[from..].find(&needle) {
        let at = from + off;
        let rest = src[at + needle.len()..].trim_start();
        if rest.starts_with(':') {
            return src[..at].matches('\n').count() + 1;
        }
        from = at + needle.len();
    }
    1
}

fn unknown_field(msg: &str) -> Option<String> {
    let rest = msg.strip_prefix("unknown field `")?;
    Some(rest[..rest.find('`')?].to_string())
}

fn quantizer(bins: Option<usize>, span: Option<f64>) -> Quantizer {
    let d = Quantizer::default();
    Quantizer {
        bins: bins.unwrap_or(d.bins),
        span_sigmas: span.unwrap_or(d.span_sigmas),
    }
}

impl ChannelConfig {
    /// Parses a JSON document; errors name the offending field path and line.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(s).map_err(|e| {
            Error::Config(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        let serde_json::Value::Object(mut obj) = value else {
            return Err(Error::Config("top level must be a JSON object".into()));
        };
        let kind = match obj.remove("kind") {
            Some(serde_json::Value::String(k)) => k,
            Some(other) => return Err(Error::Config(format!("at `kind` (line {}): expected a string, found {other}", key_line(s, "kind")))),
            None => return Err(Error::Config("missing field `kind`".into())),
        };
        let mut tagged = serde_json::Map::new();
        tagged.insert(kind, serde_json::Value::Object(obj));
        serde_path_to_error::deserialize(serde_json::Value::Object(tagged)).map_err(|e| {
            let segments: Vec<String> = e.path().iter().skip(1).map(|seg| seg.to_string()).collect();
            let field = segments
                .iter()
                .find(|seg| !seg.starts_with('['))
                .cloned()
                .or_else(|| unknown_field(&e.inner().to_string()));
            let path = if segments.is_empty() { ".".to_string() } else { segments.join(".") };
            let line = field.map_or(1, |f| key_line(s, &f));
            Error::Config(format!("at `{path}` (line {line}): {}", e.into_inner()))
        })
    }

    /// Document form with the `kind` field.
    pub fn to_json_value(&self) -> serde_json::Value {
        let v = serde_json::to_value(self).expect("configs always serialize");
        let serde_json::Value::Object(outer) = v else { unreachable!() };
        let (kind, body) = outer.into_iter().next().expect("one variant");
        let mut body = match body {
            serde_json::Value::Object(m) => m,
            _ => serde_json::Map::new(),
        };
        let mut doc = serde_json::Map::new();
        doc.insert("kind".into(), serde_json::Value::String(kind));
        doc.append(&mut body);
        serde_json::Value::Object(doc)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ChannelConfig::BinaryMultiplicative { .. } => "binary_multiplicative",
            ChannelConfig::IidBinary { .. } => "iid_binary",
            ChannelConfig::GaussianScalarFixed { .. } => "gaussian_scalar_fixed",
            ChannelConfig::GaussianScalarIid { .. } => "gaussian_scalar_iid",
            ChannelConfig::GaussianVectorFixed { .. } => "gaussian_vector_fixed",
            ChannelConfig::Explicit { .. } => "explicit",
        }
    }

    pub fn closed_form(&self) -> Option<ClosedForm> {
        match self {
            ChannelConfig::GaussianScalarFixed { h, power, .. } => Some(ClosedForm::ScalarFixed {
                h: *h,
                powers: power.values(),
            }),
            ChannelConfig::GaussianVectorFixed {
                h0, h1, h_tilde, power, ..
            } => Some(ClosedForm::VectorFixed {
                h0: h0.clone(),
                h1: h1.clone(),
                h_tilde: h_tilde.clone(),
                power: *power,
            }),
            ChannelConfig::GaussianScalarIid {
                sigma_c2,
                sigma_s2,
                gamma_s,
                ..
            } => Some(ClosedForm::ScalarIid {
                sigma_c2: *sigma_c2,
                sigma_s2: *sigma_s2,
                gamma_s: *gamma_s,
            }),
            _ => None,
        }
    }

    /// Gaussian specs with their quantizer; scalar fixed-state configs give one spec per power.
    pub fn gaussian_specs(&self) -> Option<(Vec<GaussianSpec>, Quantizer)> {
        match self {
            ChannelConfig::GaussianScalarFixed {
                h,
                power,
                inputs,
                bins,
                span_sigmas,
            } => Some((
                power
                    .values()
                    .into_iter()
                    .map(|p| GaussianSpec::ScalarFixedState {
                        h: *h,
                        power: p,
                        inputs: inputs.clone(),
                    })
                    .collect(),
                quantizer(*bins, *span_sigmas),
            )),
            ChannelConfig::GaussianScalarIid {
                sigma_c2,
                sigma_s2,
                gamma_s,
                bins,
                span_sigmas,
            } => Some((
                vec![GaussianSpec::ScalarIid {
                    sigma_c2: *sigma_c2,
                    sigma_s2: *sigma_s2,
                    gamma_s: *gamma_s,
                }],
                quantizer(*bins, *span_sigmas),
            )),
            ChannelConfig::GaussianVectorFixed {
                h0,
                h1,
                h_tilde,
                power,
                inputs,
                bins,
                span_sigmas,
            } => Some((
                vec![GaussianSpec::VectorFixedState {
                    h0: h0.clone(),
                    h1: h1.clone(),
                    h_tilde: h_tilde.clone(),
                    power: *power,
                    inputs: inputs.clone(),
                }],
                quantizer(*bins, *span_sigmas),
            )),
            _ => None,
        }
    }

    /// Builds the finite-alphabet channels, quantizing Gaussian kinds.
    pub fn build(&self) -> Result<(BinaryStatePair, CommChannel)> {
        match self {
            ChannelConfig::BinaryMultiplicative { p, q } => build_binary_multiplicative(*p, *q),
            ChannelConfig::IidBinary {
                gamma1,
                gamma2,
                gamma_s,
            } => build_iid_binary(*gamma1, *gamma2, *gamma_s),
            ChannelConfig::Explicit {
                input_alphabet,
                output_alphabet,
                p0,
                p1,
                comm_output_alphabet,
                comm,
                state_prior,
            } => {
                let inputs = Alphabet::new(input_alphabet.clone())?;
                let pair = BinaryStatePair::new(inputs.clone(), Alphabet::new(output_alphabet.clone())?, p0.clone(), p1.clone())?;
                let (c0, c1) = match comm.as_slice() {
                    [m] => (m.clone(), m.clone()),
                    [m0, m1] => (m0.clone(), m1.clone()),
                    _ => {
                        return Err(Error::Config(format!(
                            "at `comm`: expected one or two matrices, found {}",
                            comm.len()
                        )))
                    }
                };
                let n_out = c0.first().map_or(0, Vec::len);
                let outs = match comm_output_alphabet {
                    Some(l) => Alphabet::new(l.clone())?,
                    None => Alphabet::indexed(n_out),
                };
                let comm = CommChannel::new(inputs, outs, c0, c1, *state_prior)?;
                Ok((pair, comm))
            }
            _ => {
                let (specs, q) = self.gaussian_specs().expect("gaussian kinds carry specs");
                if specs.len() != 1 {
                    return Err(Error::Usage(format!(
                        "config lists {} powers; quantize one power at a time",
                        specs.len()
                    )));
                }
                quantize_gaussian(&specs[0], q)
            }
        }
    }
}
