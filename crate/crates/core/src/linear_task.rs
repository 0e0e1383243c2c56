//! Closed-form design of the task-based quantizer for linear tasks and its
//! analytical MSE: whiten the measurement, keep the top task-space directions,
//! quantize each branch with a scalar quantizer, and invert the combining in the
//! digital domain.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bussgang::BussgangModel;
use crate::error::{Error, Result};
use crate::mathkit::{self, DEFAULT_EIGEN_TOL};
use crate::scalar_quantizer::{
    levels_per_quantizer, lloyd_max_gaussian, uniform_quantizer, ScalarQuantizer,
};
use crate::simulator::GaussianVectorSampler;

/// Which scalar-quantizer family a design uses on its branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantizerKind {
    Lloyd,
    Uniform,
}

#[derive(Debug, Clone)]
enum SamplerKind {
    /// The task is exactly `Gamma x`; `x ~ N(0, Sigma_x)`.
    LinearFunction { sampler: GaussianVectorSampler },
    /// `s ~ N(0, I_K)`, `x = F s + noise_std * w` (jointly Gaussian pair).
    Channel { f: DMatrix<f64>, noise_std: f64 },
}

/// A linear estimation task: task matrix `Gamma` with `s_tilde = Gamma x`,
/// measurement covariance, optional task covariance, and a joint `(s, x)`
/// sample source with a known MMSE floor.
#[derive(Debug, Clone)]
pub struct LinearTaskModel {
    gamma: DMatrix<f64>,
    sigma_x: DMatrix<f64>,
    sigma_s: Option<DMatrix<f64>>,
    mmse_floor: f64,
    sampler: SamplerKind,
}

impl LinearTaskModel {
    /// Model whose task vector is exactly `Gamma x` (zero MMSE floor).
    pub fn new(gamma: DMatrix<f64>, sigma_x: DMatrix<f64>) -> Result<Self> {
        if gamma.ncols() != sigma_x.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "Gamma has {} columns but Sigma_x is {}x{}",
                gamma.ncols(),
                sigma_x.nrows(),
                sigma_x.ncols()
            )));
        }
        let sampler = GaussianVectorSampler::new(&sigma_x)?;
        let sigma_s = &gamma * &sigma_x * gamma.transpose();
        Ok(Self {
            gamma,
            sigma_x,
            sigma_s: Some(sigma_s),
            mmse_floor: 0.0,
            sampler: SamplerKind::LinearFunction { sampler },
        })
    }

    pub fn gamma(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn sigma_x(&self) -> &DMatrix<f64> {
        &self.sigma_x
    }

    pub fn sigma_s(&self) -> Option<&DMatrix<f64>> {
        self.sigma_s.as_ref()
    }

    /// Estimation error floor `E||s - s_tilde||^2`, independent of the quantizer.
    pub fn mmse_floor(&self) -> f64 {
        self.mmse_floor
    }

    /// Measurement dimension N.
    pub fn measurement_dim(&self) -> usize {
        self.gamma.ncols()
    }

    /// Task dimension K.
    pub fn task_dim(&self) -> usize {
        self.gamma.nrows()
    }

    /// The task's MMSE estimate `s_tilde = Gamma x`.
    pub fn task_estimate(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.gamma * x
    }

    /// Draw one `(s, x)` pair.
    pub fn sample_pair(&self, rng: &mut ChaCha8Rng) -> (DVector<f64>, DVector<f64>) {
        match &self.sampler {
            SamplerKind::LinearFunction { sampler } => {
                let x = sampler.sample(rng);
                let s = &self.gamma * &x;
                (s, x)
            }
            SamplerKind::Channel { f, noise_std } => {
                let k = f.ncols();
                let n = f.nrows();
                let s = DVector::from_fn(k, |_, _| rng.sample::<f64, _>(StandardNormal));
                let noise =
                    DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal) * noise_std);
                let x = f * &s + noise;
                (s, x)
            }
        }
    }
}

/// A complete hardware-limited task-based quantizer: analog combining matrix,
/// per-branch scalar quantizers, and digital processing matrix, together with
/// the design's eigenvalues and branch distortion factors.
#[derive(Debug, Clone)]
pub struct TaskQuantizerDesign {
    /// Analog combining matrix (P x N).
    pub a: DMatrix<f64>,
    /// Digital processing matrix (K x P).
    pub d: DMatrix<f64>,
    /// One scalar quantizer per branch.
    pub quantizers: Vec<ScalarQuantizer>,
    /// Eigenvalues of `Gamma_tilde Gamma_tilde^T` in non-increasing order
    /// (the min(K, N) values the factorization provides; the rest are zero).
    pub eigenvalues: Vec<f64>,
    /// Branch distortion factors, one per branch.
    pub rho: Vec<f64>,
    /// Number of branches.
    pub p: usize,
    /// Overall level budget M.
    pub m: u64,
    /// Levels per branch, `floor(M^(1/P))`.
    pub m_tilde: u64,
    /// Design-time warnings (e.g. P exceeding the task dimension).
    pub warnings: Vec<String>,
    /// When set, branches pass their inputs through unquantized (diagnostics).
    pub quantizer_bypass: bool,
}

impl TaskQuantizerDesign {
    /// Apply each branch's quantizer to the analog outputs.
    pub fn quantize_branches(&self, w: &DVector<f64>) -> DVector<f64> {
        if self.quantizer_bypass {
            return w.clone();
        }
        DVector::from_iterator(
            self.p,
            w.iter().zip(&self.quantizers).map(|(&v, q)| q.quantize(v)),
        )
    }

    /// Copy of this design with the scalar quantizers bypassed.
    pub fn with_quantizer_bypass(mut self) -> Self {
        self.quantizer_bypass = true;
        self
    }
}

/// Optimal design for a linear task under metric orthogonality: whiten with
/// `Sigma_x^(-1/2)`, project on the top right-singular vectors of
/// `Gamma_tilde = Gamma Sigma_x^(1/2)`, and invert both in the digital matrix.
///
/// The branch inputs of such a design are i.i.d. standard normal, so all P
/// branches share one unit-variance quantizer of the requested kind.
pub fn design_theorem1(
    model: &LinearTaskModel,
    p: usize,
    m: u64,
    kind: QuantizerKind,
) -> Result<TaskQuantizerDesign> {
    let n = model.measurement_dim();
    let k = model.task_dim();
    if p == 0 || p > n {
        return Err(Error::InvalidArgument(format!(
            "P must lie in 1..=N = {n}, got {p}"
        )));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("level budget M must be at least 1".to_string()));
    }
    let mut warnings = Vec::new();
    if p > k {
        warnings.push(format!(
            "P = {p} exceeds the task dimension K = {k}; the extra branches carry no task information"
        ));
    }
    let fact = mathkit::psd_sqrt(&model.sigma_x, DEFAULT_EIGEN_TOL)?;
    if fact.rank < n {
        return Err(Error::InvalidArgument(
            "measurement covariance must be positive definite".to_string(),
        ));
    }
    let gamma_tilde = &model.gamma * &fact.sqrt;
    let keep = k.min(n);
    let (v_all, sigma_all) = mathkit::top_right_singular_vectors(&gamma_tilde, p.max(keep))?;
    let v = v_all.columns(0, p).into_owned();
    let a = v.transpose() * &fact.inv_sqrt;
    let d = &gamma_tilde * &v;
    let m_tilde = levels_per_quantizer(m, p as u32);
    let quantizer = match kind {
        QuantizerKind::Lloyd => lloyd_max_gaussian(m_tilde, 1.0)?,
        QuantizerKind::Uniform => uniform_quantizer(m_tilde, 1.0)?,
    };
    let rho = vec![quantizer.rho(); p];
    Ok(TaskQuantizerDesign {
        a,
        d,
        quantizers: vec![quantizer; p],
        eigenvalues: sigma_all[..keep].iter().map(|s| s * s).collect(),
        rho,
        p,
        m,
        m_tilde,
        warnings,
        quantizer_bypass: false,
    })
}

fn require_restriction(a: &DMatrix<f64>, sigma_x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let deviation = mathkit::restriction_deviation(a, sigma_x);
    if deviation > 1e-8 {
        return Err(Error::Restriction1Violation { magnitude: deviation });
    }
    let gram = a * sigma_x * a.transpose();
    gram.clone().try_inverse().ok_or_else(|| {
        Error::InvalidArgument("A Sigma_x A^T is not invertible".to_string())
    })
}

/// MSE-optimal digital matrix for a fixed analog matrix satisfying metric
/// orthogonality: `Gamma Sigma_x A^T (A Sigma_x A^T)^-1`.
pub fn optimal_digital(model: &LinearTaskModel, a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.ncols() != model.measurement_dim() {
        return Err(Error::DimensionMismatch(format!(
            "A has {} columns but the measurement dimension is {}",
            a.ncols(),
            model.measurement_dim()
        )));
    }
    let gram_inv = require_restriction(a, &model.sigma_x)?;
    Ok(&model.gamma * &model.sigma_x * a.transpose() * gram_inv)
}

/// Quantizer-dependent MSE of the optimal digital stage for a fixed analog
/// matrix and diagonal Bussgang gain:
/// `Tr(Gamma Sigma_x Gamma^T) - Tr(Gamma Sigma_x A^T B (A Sigma_x A^T)^-1 A Sigma_x Gamma^T)`.
pub fn analytic_mse_prop2(
    model: &LinearTaskModel,
    a: &DMatrix<f64>,
    bussgang: &BussgangModel,
) -> Result<f64> {
    let b = &bussgang.b;
    if b.nrows() != a.nrows() || b.ncols() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "B is {}x{} for {} branches",
            b.nrows(),
            b.ncols(),
            a.nrows()
        )));
    }
    let diag_scale = b.diagonal().iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
    let mut off = 0.0_f64;
    for i in 0..b.nrows() {
        for j in 0..b.ncols() {
            if i != j {
                off = off.max(b[(i, j)].abs());
            }
        }
    }
    if off > 1e-10 * diag_scale {
        return Err(Error::NonDiagonalGain { magnitude: off / diag_scale });
    }
    let gram_inv = require_restriction(a, &model.sigma_x)?;
    let gsa = &model.gamma * &model.sigma_x * a.transpose(); // K x P
    let task_energy = (&model.gamma * &model.sigma_x * model.gamma.transpose()).trace();
    let recovered = (&gsa * b * gram_inv * gsa.transpose()).trace();
    Ok(task_energy - recovered)
}

/// Quantizer-dependent MSE of the optimal design from its eigenvalues and
/// branch distortion factors:
/// `sum_i lambda_i rho_i` over the task dimension when `P >= K`, otherwise
/// `sum_{i<=P} lambda_i rho_i + sum_{i=P+1..K} lambda_i`.
///
/// `eigenvalues` must be non-increasing; entries beyond the provided list are
/// treated as zero (the Gram matrix has K eigenvalues but at most min(K, N) are
/// nonzero).
pub fn analytic_mse_theorem1(
    eigenvalues: &[f64],
    rho: &[f64],
    p: usize,
    k: usize,
) -> Result<f64> {
    for i in 1..eigenvalues.len() {
        if eigenvalues[i] > eigenvalues[i - 1] {
            return Err(Error::UnsortedEigenvalues { index: i });
        }
    }
    if rho.len() < p.min(k) {
        return Err(Error::InvalidArgument(format!(
            "need at least min(P, K) = {} distortion factors, got {}",
            p.min(k),
            rho.len()
        )));
    }
    let lambda = |i: usize| eigenvalues.get(i).copied().unwrap_or(0.0);
    let mut mse = 0.0;
    if p >= k {
        for i in 0..k {
            mse += lambda(i) * rho[i];
        }
    } else {
        for i in 0..p {
            mse += lambda(i) * rho[i];
        }
        for i in p..k {
            mse += lambda(i);
        }
    }
    Ok(mse)
}

/// End-to-end pipeline `s_hat = D * Q(A x)`.
pub fn run_pipeline(design: &TaskQuantizerDesign, x: &DVector<f64>) -> DVector<f64> {
    let w = &design.a * x;
    &design.d * design.quantize_branches(&w)
}

/// Channel-estimation preset: `s ~ N(0, I_K)` taps observed through the Toeplitz
/// convolution matrix of a seeded +-1 pilot sequence in Gaussian noise, with
/// `Gamma` the exact linear MMSE matrix of the jointly Gaussian pair and the
/// floor computed analytically.
pub fn channel_estimation_model(
    k_taps: usize,
    n: usize,
    noise_var: f64,
    pilot_seed: u64,
) -> Result<LinearTaskModel> {
    if k_taps == 0 || n < k_taps {
        return Err(Error::InvalidArgument(format!(
            "need N >= K_taps >= 1, got N = {n}, K_taps = {k_taps}"
        )));
    }
    if !(noise_var > 0.0) || !noise_var.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "noise variance must be positive, got {noise_var}"
        )));
    }
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(pilot_seed);
    let pilot: Vec<f64> = (0..n)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect();
    let f = DMatrix::from_fn(n, k_taps, |i, j| if i >= j { pilot[i - j] } else { 0.0 });
    let sigma_x = &f * f.transpose() + DMatrix::identity(n, n) * noise_var;
    let chol = Cholesky::new(sigma_x.clone())
        .ok_or_else(|| Error::InvalidArgument("measurement covariance not SPD".to_string()))?;
    let gamma = chol.solve(&f).transpose(); // F^T Sigma_x^-1
    let mmse_floor = k_taps as f64 - (&gamma * &f).trace();
    Ok(LinearTaskModel {
        gamma,
        sigma_x,
        sigma_s: Some(DMatrix::identity(k_taps, k_taps)),
        mmse_floor,
        sampler: SamplerKind::Channel {
            f,
            noise_std: noise_var.sqrt(),
        },
    })
}
