//! Generalized Bussgang decomposition of a bank of scalar quantizers:
//! `z = B * (A x) + eta` with the residual `eta` uncorrelated with the input.
//!
//! The gain can be estimated from samples (linear regression of the quantizer
//! outputs on the quantizer inputs) or predicted analytically from the branch
//! distortion factors, where metric orthogonality of the analog matrix makes the
//! gain diagonal with entries `1 - rho`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Bussgang gain and residual covariance for a quantizer bank.
#[derive(Debug, Clone)]
pub struct BussgangModel {
    /// Gain matrix `B` (P x P).
    pub b: DMatrix<f64>,
    /// Residual covariance `Sigma_eta` (P x P), symmetric PSD.
    /// Zero when the model was built analytically from distortion factors.
    pub sigma_eta: DMatrix<f64>,
    /// Number of samples behind the estimate; 0 for analytic models.
    pub sample_count: usize,
}

/// Column means of a sample matrix (rows are observations).
fn column_means(m: &DMatrix<f64>) -> Vec<f64> {
    (0..m.ncols())
        .map(|j| m.column(j).sum() / m.nrows() as f64)
        .collect()
}

fn centered(m: &DMatrix<f64>) -> DMatrix<f64> {
    let means = column_means(m);
    let mut out = m.clone();
    for (j, mean) in means.iter().enumerate() {
        out.column_mut(j).add_scalar_mut(-mean);
    }
    out
}

/// Estimate the Bussgang decomposition from paired samples.
///
/// `inputs` holds the analog outputs `A x` (one row per observation, one column
/// per branch) and `outputs` the corresponding quantized values. Both matrices
/// are centered before the population-form (1/n) covariances are accumulated,
/// then `B = Cov(z, Ax) Cov(Ax)^-1` and
/// `Sigma_eta = Cov(z) - B Cov(Ax) B^T` (symmetrized).
pub fn estimate_bussgang(inputs: &DMatrix<f64>, outputs: &DMatrix<f64>) -> Result<BussgangModel> {
    if inputs.shape() != outputs.shape() {
        return Err(Error::DimensionMismatch(format!(
            "inputs are {}x{} but outputs are {}x{}",
            inputs.nrows(),
            inputs.ncols(),
            outputs.nrows(),
            outputs.ncols()
        )));
    }
    let n = inputs.nrows();
    let p = inputs.ncols();
    if p == 0 {
        return Err(Error::InvalidArgument("need at least one branch".to_string()));
    }
    if n < 10 * p * p {
        return Err(Error::InvalidArgument(format!(
            "need at least 10*P^2 = {} samples, got {n}",
            10 * p * p
        )));
    }
    let x = centered(inputs);
    let z = centered(outputs);
    let inv_n = 1.0 / n as f64;
    let sxx = x.transpose() * &x * inv_n;
    let szx = z.transpose() * &x * inv_n;
    let szz = z.transpose() * &z * inv_n;

    let eig = SymmetricEigen::new((&sxx + sxx.transpose()) * 0.5);
    let max_eig = eig.eigenvalues.iter().fold(0.0_f64, |a, &v| a.max(v));
    let mut min_idx = 0;
    for (i, &v) in eig.eigenvalues.iter().enumerate() {
        if v < eig.eigenvalues[min_idx] {
            min_idx = i;
        }
    }
    if eig.eigenvalues[min_idx] <= 1e-12 * max_eig.max(f64::MIN_POSITIVE) {
        // name the measured coordinate that carries the deficient direction
        let null_vec = eig.eigenvectors.column(min_idx);
        let mut component = 0;
        for (i, &v) in null_vec.iter().enumerate() {
            if v.abs() > null_vec[component].abs() {
                component = i;
            }
        }
        return Err(Error::SingularCovariance { component });
    }
    let sxx_inv = sxx
        .clone()
        .try_inverse()
        .ok_or(Error::SingularCovariance { component: 0 })?;
    let b = &szx * &sxx_inv;
    let raw = &szz - &b * &sxx * b.transpose();
    let sigma_eta = (&raw + raw.transpose()) * 0.5;
    Ok(BussgangModel {
        b,
        sigma_eta,
        sample_count: n,
    })
}

/// Analytic Bussgang gain under metric orthogonality: `B = diag(1 - rho)`.
///
/// Only the gain is populated; the residual covariance is left at zero and
/// `sample_count` is 0.
pub fn bussgang_from_rho(rho: &[f64]) -> Result<BussgangModel> {
    if rho.is_empty() {
        return Err(Error::InvalidArgument("need at least one branch".to_string()));
    }
    for (i, &r) in rho.iter().enumerate() {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidArgument(format!(
                "distortion factor {i} must lie in [0, 1], got {r}"
            )));
        }
    }
    let p = rho.len();
    let b = DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 - rho[i] } else { 0.0 });
    Ok(BussgangModel {
        b,
        sigma_eta: DMatrix::zeros(p, p),
        sample_count: 0,
    })
}
