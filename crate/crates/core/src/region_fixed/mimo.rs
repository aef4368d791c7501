//! Vector Gaussian channels `Y = H_s X + Z`, `Ỹ = H̃ X + Z̃` with unit noise.
//!
//! For input covariance `Σ_X` with `tr(Σ_X) ≤ P` and `Γ = (H₁−H₀)ᵀ(H₁−H₀)`:
//!
//! ```text
//! R    ≤ ½ ln det(I + H̃ Σ_X H̃ᵀ)
//! E_FA ≤ u²/2 · tr(Γ Σ_X)
//! E_MD ≤ (1−u)²/2 · tr(Γ Σ_X)
//! ```
//!
//! The covariance path `Σ(λ) = (1−λ)Σ_wf + λΣ_bf` runs from the waterfilling
//! covariance of `H̃` to full power on the top eigenvector of `Γ`. Every point on
//! it is achievable; it is a heuristic inner sweep, not the exact boundary.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::channels::gaussian::matrix_shape;
use crate::error::{Error, Result};

const PSD_TOL: f64 = 1e-9;

/// One achievable design on the covariance path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MimoDesign {
    /// Row-major, symmetric PSD, trace at most `P`.
    pub sigma_x: Vec<Vec<f64>>,
    pub lambda: f64,
    pub u: f64,
    pub rate: f64,
    pub e_fa: f64,
    pub e_md: f64,
    /// `tr(Γ Σ_X)`.
    pub trace_gamma_sigma: f64,
}

fn to_dmatrix(name: &str, m: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let (r, c) = matrix_shape(name, m)?;
    Ok(DMatrix::from_fn(r, c, |i, j| m[i][j]))
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Capacity-achieving covariance of `H̃` under `tr(Σ) ≤ P`.
///
/// Powers `(μ − 1/σᵢ²)⁺` along the right singular vectors, with `Σ pᵢ = P`.
pub fn waterfilling_covariance(h_tilde: &DMatrix<f64>, power: f64) -> Result<DMatrix<f64>> {
    let n = h_tilde.ncols();
    // Eigenvectors of H̃ᵀH̃ are the right singular vectors, eigenvalues σᵢ².
    let eig = SymmetricEigen::new(h_tilde.transpose() * h_tilde);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let gains: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if gains.first().is_none_or(|&g| g <= PSD_TOL) {
        return Err(Error::Degenerate("communication matrix has no positive singular value".into()));
    }
    // Largest k whose water level stays above every active 1/gᵢ.
    let mut level = 0.0;
    for k in 1..=n {
        if gains[k - 1] <= PSD_TOL {
            break;
        }
        let inv_sum: f64 = gains[..k].iter().map(|g| 1.0 / g).sum();
        let mu = (power + inv_sum) / k as f64;
        if mu > 1.0 / gains[k - 1] {
            level = mu;
        } else {
            break;
        }
    }
    let mut sigma = DMatrix::zeros(n, n);
    for (&i, &g) in order.iter().zip(&gains) {
        if g <= PSD_TOL {
            continue;
        }
        let p = (level - 1.0 / g).max(0.0);
        let v = eig.eigenvectors.column(i);
        sigma += p * v * v.transpose();
    }
    Ok(sigma)
}

/// All power on the top eigenvector of `Γ`.
fn beamforming_covariance(gamma: &DMatrix<f64>, power: f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(gamma.clone());
    let top = eig.eigenvalues.imax();
    let v = eig.eigenvectors.column(top);
    power * v * v.transpose()
}

fn log_det_spd(m: DMatrix<f64>) -> Result<f64> {
    let chol = m
        .cholesky()
        .ok_or_else(|| Error::Degenerate("I + H̃ΣH̃ᵀ is not positive definite".into()))?;
    Ok(2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// Sweeps `(λ, u)` on the covariance path; output ordered by `λ` then `u`.
pub fn mimo_region(
    h0: &[Vec<f64>],
    h1: &[Vec<f64>],
    h_tilde: &[Vec<f64>],
    power: f64,
    u_grid: &[f64],
    mix_grid: &[f64],
) -> Result<Vec<MimoDesign>> {
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::domain("power", format!("{power} must be positive")));
    }
    let h0 = to_dmatrix("h0", h0)?;
    let h1 = to_dmatrix("h1", h1)?;
    let ht = to_dmatrix("h_tilde", h_tilde)?;
    if h0.shape() != h1.shape() || ht.ncols() != h0.ncols() {
        return Err(Error::Dimension(format!(
            "h0 is {:?}, h1 is {:?}, h_tilde is {:?}; all need the same number of columns and h0, h1 the same shape",
            h0.shape(),
            h1.shape(),
            ht.shape()
        )));
    }
    let diff = &h1 - &h0;
    if diff.iter().all(|&v| v == 0.0) {
        return Err(Error::Degenerate("h0 = h1 makes the two states indistinguishable".into()));
    }
    let gamma = diff.transpose() * &diff;
    let wf = waterfilling_covariance(&ht, power)?;
    let bf = beamforming_covariance(&gamma, power);
    let eye = DMatrix::<f64>::identity(ht.nrows(), ht.nrows());
    let mut out = Vec::with_capacity(u_grid.len() * mix_grid.len());
    for &lambda in mix_grid {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::domain("lambda", format!("{lambda} is not in [0, 1]")));
        }
        let sigma = (1.0 - lambda) * &wf + lambda * &bf;
        let rate = 0.5 * log_det_spd(&eye + &ht * &sigma * ht.transpose())?;
        let tr = (&gamma * &sigma).trace();
        for &u in u_grid {
            if !(0.0..=1.0).contains(&u) {
                return Err(Error::domain("u", format!("{u} is not in [0, 1]")));
            }
            out.push(MimoDesign {
                sigma_x: to_rows(&sigma),
                lambda,
                u,
                rate,
                e_fa: u * u / 2.0 * tr,
                e_md: (1.0 - u) * (1.0 - u) / 2.0 * tr,
                trace_gamma_sigma: tr,
            });
        }
    }
    Ok(out)
}
