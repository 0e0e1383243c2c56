//! Design, application, and distortion analysis of M-level scalar quantizers.
//!
//! Three designs are provided: Lloyd-Max against a Gaussian density (closed-form
//! cell moments, no sampling), Lloyd-Max against an empirical sample set
//! (1-D k-means with deterministic initialization), and a step-optimized uniform
//! grid as the baseline. Every quantizer carries its distortion factor
//! `rho = E[(Q(X) - X)^2] / E[X^2]` with respect to its design input.

use crate::error::{Error, Result};
use crate::util::{format_sig15, normal_cell_moments};
use statrs::distribution::{ContinuousCDF, Normal};

const LLOYD_REL_TOL: f64 = 1e-12;
const LLOYD_MAX_ITERS: usize = 10_000;
const GOLDEN_STEP_TOL: f64 = 1e-8;

/// How a quantizer's levels were designed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignKind {
    LloydGaussian,
    LloydEmpirical,
    Uniform,
}

/// An M-level scalar quantizer: M-1 ascending decision thresholds, M ascending
/// representation levels, and the distortion factor under its design input.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarQuantizer {
    boundaries: Vec<f64>,
    levels: Vec<f64>,
    rho: f64,
    design_kind: DesignKind,
}

impl ScalarQuantizer {
    /// Decision thresholds, strictly increasing, length `levels().len() - 1`.
    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    /// Representation levels, strictly increasing.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Distortion factor under the design input.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn design_kind(&self) -> DesignKind {
        self.design_kind
    }

    /// Map a value to the representation level of its cell.
    ///
    /// A value exactly on a boundary maps to the upper cell; values beyond the
    /// outer boundaries map to the outermost levels. Monotone non-decreasing and
    /// idempotent on the levels themselves.
    pub fn quantize(&self, value: f64) -> f64 {
        let idx = self.boundaries.partition_point(|&b| b <= value);
        self.levels[idx]
    }

    /// Plain-text dump: one `levels:` line, one `boundaries:` line, one `rho:`
    /// line, all values at 15 significant digits.
    pub fn dump(&self) -> String {
        let mut out = String::from("levels:");
        for &v in &self.levels {
            out.push(' ');
            out.push_str(&format_sig15(v));
        }
        out.push_str("\nboundaries:");
        for &v in &self.boundaries {
            out.push(' ');
            out.push_str(&format_sig15(v));
        }
        out.push_str("\nrho: ");
        out.push_str(&format_sig15(self.rho));
        out.push('\n');
        out
    }
}

/// Mean squared error of `(levels, boundaries)` under a zero-mean Gaussian with
/// the given variance, from closed-form truncated-moment identities.
fn gaussian_mse(levels: &[f64], boundaries: &[f64], variance: f64) -> f64 {
    let sigma = variance.sqrt();
    let mut d = variance;
    for (i, &level) in levels.iter().enumerate() {
        let a = if i == 0 {
            f64::NEG_INFINITY
        } else {
            boundaries[i - 1] / sigma
        };
        let b = if i + 1 == levels.len() {
            f64::INFINITY
        } else {
            boundaries[i] / sigma
        };
        let (m0, m1) = normal_cell_moments(a, b);
        d += level * (level * m0 - 2.0 * sigma * m1);
    }
    d.max(0.0)
}

fn midpoints(levels: &[f64]) -> Vec<f64> {
    levels
        .windows(2)
        .map(|w| 0.5 * (w[0] + w[1]))
        .collect()
}

/// Lloyd-Max quantizer for a zero-mean Gaussian input, using closed-form cell
/// moments (no sampling). The result is symmetric about 0.
pub fn lloyd_max_gaussian(m_levels: u64, variance: f64) -> Result<ScalarQuantizer> {
    if m_levels == 0 {
        return Err(Error::InvalidArgument(
            "quantizer needs at least one level".to_string(),
        ));
    }
    if !(variance > 0.0) || !variance.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "variance must be positive and finite, got {variance}"
        )));
    }
    let m = m_levels as usize;
    if m == 1 {
        return Ok(ScalarQuantizer {
            boundaries: Vec::new(),
            levels: vec![0.0],
            rho: 1.0,
            design_kind: DesignKind::LloydGaussian,
        });
    }

    // quantile (companding) start at unit variance
    let std_normal = Normal::new(0.0, 1.0).expect("standard normal");
    let mut levels: Vec<f64> = (0..m)
        .map(|i| std_normal.inverse_cdf((i as f64 + 0.5) / m as f64))
        .collect();
    let mut boundaries = vec![0.0; m - 1];
    let mut prev_d = f64::INFINITY;
    let mut converged = false;
    let mut delta = f64::INFINITY;
    for _ in 0..LLOYD_MAX_ITERS {
        boundaries = midpoints(&levels);
        for i in 0..m {
            let a = if i == 0 { f64::NEG_INFINITY } else { boundaries[i - 1] };
            let b = if i + 1 == m { f64::INFINITY } else { boundaries[i] };
            let (m0, m1) = normal_cell_moments(a, b);
            levels[i] = m1 / m0;
        }
        // keep the design exactly symmetric; Lloyd preserves symmetry only up to
        // floating-point noise
        for i in 0..m / 2 {
            let v = 0.5 * (levels[i] - levels[m - 1 - i]);
            levels[i] = v;
            levels[m - 1 - i] = -v;
        }
        if m % 2 == 1 {
            levels[m / 2] = 0.0;
        }
        let d = gaussian_mse(&levels, &boundaries, 1.0);
        delta = (prev_d - d).abs() / d.max(f64::MIN_POSITIVE);
        if delta < LLOYD_REL_TOL {
            prev_d = d;
            converged = true;
            break;
        }
        prev_d = d;
    }
    if !converged {
        return Err(Error::NonConvergence { delta });
    }
    boundaries = midpoints(&levels);
    let rho = prev_d;
    let sigma = variance.sqrt();
    Ok(ScalarQuantizer {
        boundaries: boundaries.iter().map(|b| b * sigma).collect(),
        levels: levels.iter().map(|l| l * sigma).collect(),
        rho,
        design_kind: DesignKind::LloydGaussian,
    })
}

/// Lloyd-Max quantizer fitted to a sample set (1-D k-means).
///
/// Initialization places levels at equiprobable quantiles of the distinct sample
/// values, and an empty cell is repaired by reseeding its level at the sample
/// with the largest squared error (first index on ties) — both deterministic, so
/// the result depends only on the sample order. The `seed` parameter is reserved
/// for stochastic variants and is currently inert. `rho` is the mean squared
/// quantization error over the samples divided by their second moment.
pub fn lloyd_max_empirical(samples: &[f64], m_levels: u64, _seed: u64) -> Result<ScalarQuantizer> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("samples must be non-empty".to_string()));
    }
    if m_levels == 0 {
        return Err(Error::InvalidArgument(
            "quantizer needs at least one level".to_string(),
        ));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "samples must all be finite".to_string(),
        ));
    }
    let m = m_levels as usize;
    let n = samples.len();
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(|a, b| a.total_cmp(b));
    let mut distinct: Vec<f64> = Vec::new();
    for &v in &sorted {
        if distinct.last() != Some(&v) {
            distinct.push(v);
        }
    }
    if distinct.len() < m {
        return Err(Error::InvalidArgument(format!(
            "need at least {m} distinct sample values, found {}",
            distinct.len()
        )));
    }

    let mut prefix = vec![0.0; n + 1];
    let mut prefix_sq = vec![0.0; n + 1];
    for (i, &v) in sorted.iter().enumerate() {
        prefix[i + 1] = prefix[i] + v;
        prefix_sq[i + 1] = prefix_sq[i] + v * v;
    }
    let second_moment = prefix_sq[n] / n as f64;

    let mut levels: Vec<f64> = (0..m)
        .map(|i| distinct[((i as f64 + 0.5) * distinct.len() as f64 / m as f64) as usize])
        .collect();

    let cell_edges = |levels: &[f64]| -> Vec<usize> {
        let bounds = midpoints(levels);
        let mut edges = vec![0usize; m + 1];
        edges[m] = n;
        for (i, &b) in bounds.iter().enumerate() {
            edges[i + 1] = sorted.partition_point(|&v| v <= b);
        }
        edges
    };

    let mut prev_d = f64::INFINITY;
    let mut converged = false;
    let mut delta = f64::INFINITY;
    for _ in 0..LLOYD_MAX_ITERS {
        let mut edges = cell_edges(&levels);
        // empty-cell repair: reseed at the worst-quantized sample
        let mut repairs = 0;
        while let Some(empty) = (0..m).find(|&i| edges[i] == edges[i + 1]) {
            if repairs > m {
                return Err(Error::NonConvergence { delta });
            }
            let mut worst = (0.0_f64, sorted[0]);
            for cell in 0..m {
                for idx in edges[cell]..edges[cell + 1] {
                    let err = (sorted[idx] - levels[cell]).powi(2);
                    if err > worst.0 {
                        worst = (err, sorted[idx]);
                    }
                }
            }
            levels[empty] = worst.1;
            levels.sort_unstable_by(|a, b| a.total_cmp(b));
            edges = cell_edges(&levels);
            repairs += 1;
        }
        let mut sse = 0.0;
        for cell in 0..m {
            let (lo, hi) = (edges[cell], edges[cell + 1]);
            let count = (hi - lo) as f64;
            let mean = (prefix[hi] - prefix[lo]) / count;
            levels[cell] = mean;
            sse += prefix_sq[hi] - prefix_sq[lo] - count * mean * mean;
        }
        let d = sse / n as f64;
        delta = (prev_d - d).abs() / d.max(f64::MIN_POSITIVE);
        if delta < LLOYD_REL_TOL {
            prev_d = d;
            converged = true;
            break;
        }
        prev_d = d;
    }
    if !converged {
        return Err(Error::NonConvergence { delta });
    }
    let rho = if second_moment == 0.0 {
        // constant-zero input perfectly represented
        if prev_d == 0.0 {
            0.0
        } else {
            return Err(Error::ZeroSecondMoment);
        }
    } else {
        prev_d / second_moment
    };
    Ok(ScalarQuantizer {
        boundaries: midpoints(&levels),
        levels,
        rho,
        design_kind: DesignKind::LloydEmpirical,
    })
}

/// Gaussian MSE of the symmetric uniform grid with step `delta` at unit variance.
fn uniform_grid_mse(m: usize, delta: f64) -> f64 {
    let levels: Vec<f64> = (0..m)
        .map(|i| (i as f64 - (m as f64 - 1.0) / 2.0) * delta)
        .collect();
    let boundaries = midpoints(&levels);
    gaussian_mse(&levels, &boundaries, 1.0)
}

/// Uniform quantizer for a zero-mean Gaussian input: a symmetric grid (mid-rise
/// for even level counts) whose step is chosen by golden-section minimization of
/// the closed-form Gaussian MSE.
pub fn uniform_quantizer(m_levels: u64, variance: f64) -> Result<ScalarQuantizer> {
    if m_levels == 0 {
        return Err(Error::InvalidArgument(
            "quantizer needs at least one level".to_string(),
        ));
    }
    if !(variance > 0.0) || !variance.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "variance must be positive and finite, got {variance}"
        )));
    }
    let m = m_levels as usize;
    if m == 1 {
        return Ok(ScalarQuantizer {
            boundaries: Vec::new(),
            levels: vec![0.0],
            rho: 1.0,
            design_kind: DesignKind::Uniform,
        });
    }
    // coarse log-spaced scan brackets the minimum, golden section refines it
    let (lo0, hi0) = (1e-6_f64, 8.0_f64);
    let scan = 600;
    let ratio = (hi0 / lo0).powf(1.0 / (scan - 1) as f64);
    let mut best = (f64::INFINITY, 0usize);
    let mut points = Vec::with_capacity(scan);
    let mut x = lo0;
    for i in 0..scan {
        points.push(x);
        let v = uniform_grid_mse(m, x);
        if v < best.0 {
            best = (v, i);
        }
        x *= ratio;
    }
    let mut a = points[best.1.saturating_sub(1)];
    let mut b = points[(best.1 + 1).min(scan - 1)];
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = uniform_grid_mse(m, c);
    let mut fd = uniform_grid_mse(m, d);
    while b - a > GOLDEN_STEP_TOL {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = uniform_grid_mse(m, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = uniform_grid_mse(m, d);
        }
    }
    let delta = 0.5 * (a + b);
    let rho = uniform_grid_mse(m, delta);
    let sigma = variance.sqrt();
    let levels: Vec<f64> = (0..m)
        .map(|i| (i as f64 - (m as f64 - 1.0) / 2.0) * delta * sigma)
        .collect();
    Ok(ScalarQuantizer {
        boundaries: midpoints(&levels),
        levels,
        rho,
        design_kind: DesignKind::Uniform,
    })
}

/// Input law for [`distortion_factor`].
#[derive(Debug, Clone, Copy)]
pub enum QuantizerInput<'a> {
    Gaussian { variance: f64 },
    Samples(&'a [f64]),
}

/// Distortion factor `rho = E[(Q(X) - X)^2] / E[X^2]` of `q` under the given
/// input, by closed-form Gaussian cell moments or sample averaging. `rho` lies
/// in [0, 1] when `q` was Lloyd-designed for this same input; under a mismatched
/// input it can exceed 1.
pub fn distortion_factor(q: &ScalarQuantizer, input: QuantizerInput<'_>) -> Result<f64> {
    match input {
        QuantizerInput::Gaussian { variance } => {
            if variance == 0.0 {
                return Err(Error::ZeroSecondMoment);
            }
            if !(variance > 0.0) || !variance.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "variance must be positive and finite, got {variance}"
                )));
            }
            Ok(gaussian_mse(q.levels(), q.boundaries(), variance) / variance)
        }
        QuantizerInput::Samples(samples) => {
            if samples.is_empty() {
                return Err(Error::InvalidArgument("samples must be non-empty".to_string()));
            }
            let n = samples.len() as f64;
            let mut err = 0.0;
            let mut second = 0.0;
            for &v in samples {
                let e = v - q.quantize(v);
                err += e * e;
                second += v * v;
            }
            if second == 0.0 {
                return if err == 0.0 { Ok(0.0) } else { Err(Error::ZeroSecondMoment) };
            }
            Ok(err / second)
        }
    }
}

/// High-rate approximation of the Gaussian distortion factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HighRateKind {
    NonUniform,
    Uniform,
}

/// High-rate distortion-factor approximations for a Gaussian input:
/// `(pi*sqrt(3)/2) * M^-2` for Lloyd-Max and `1.47 * M^-1.74` for the optimized
/// uniform grid. Only meaningful at high rate; at M = 1 the formulas exceed the
/// exact value of 1.
pub fn highrate_rho(m_levels: u64, kind: HighRateKind) -> f64 {
    assert!(m_levels >= 1, "quantizer needs at least one level");
    let m = m_levels as f64;
    match kind {
        HighRateKind::NonUniform => std::f64::consts::PI * 3.0_f64.sqrt() / 2.0 * m.powi(-2),
        HighRateKind::Uniform => 1.47 * m.powf(-1.74),
    }
}

/// Per-quantizer level budget: the largest integer `k` with `k^p <= m`,
/// computed in integer arithmetic (floating-point roots can silently round an
/// exact power down).
pub fn levels_per_quantizer(m: u64, p: u32) -> u64 {
    assert!(m >= 1, "total level budget must be at least 1");
    assert!(p >= 1, "need at least one quantizer");
    if p == 1 {
        return m;
    }
    let fits = |k: u64| -> bool {
        let mut acc: u64 = 1;
        for _ in 0..p {
            acc = match acc.checked_mul(k) {
                Some(v) if v <= m => v,
                _ => return false,
            };
        }
        true
    };
    let (mut lo, mut hi) = (1u64, m);
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const ONE_BIT_LEVEL: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
    const ONE_BIT_RHO: f64 = 0.363_380_227_632_418_6; // 1 - 2/pi

    #[test]
    fn gaussian_single_level() {
        let q = lloyd_max_gaussian(1, 1.0).unwrap();
        assert_eq!(q.levels(), &[0.0]);
        assert!(q.boundaries().is_empty());
        assert_eq!(q.rho(), 1.0);
    }

    #[test]
    fn gaussian_one_bit_closed_form() {
        let q = lloyd_max_gaussian(2, 1.0).unwrap();
        assert!((q.levels()[0] + ONE_BIT_LEVEL).abs() < 1e-9);
        assert!((q.levels()[1] - ONE_BIT_LEVEL).abs() < 1e-9);
        assert_eq!(q.boundaries().len(), 1);
        assert!(q.boundaries()[0].abs() < 1e-12);
        assert!((q.rho() - ONE_BIT_RHO).abs() < 1e-9);
    }

    #[test]
    fn gaussian_scales_with_variance() {
        let q = lloyd_max_gaussian(2, 4.0).unwrap();
        assert!((q.levels()[1] - 2.0 * ONE_BIT_LEVEL).abs() < 1e-9);
        assert!((q.rho() - ONE_BIT_RHO).abs() < 1e-9, "rho is scale invariant");
    }

    #[test]
    fn gaussian_two_bit_matches_frozen_oracle() {
        // frozen output of the brute-force grid-search oracle (tests/lloyd_oracle.rs)
        let q = lloyd_max_gaussian(4, 1.0).unwrap();
        assert!((q.rho() - 0.117_481_847_829).abs() < 1e-6);
    }

    #[test]
    fn gaussian_interleaving_and_stationarity() {
        let q = lloyd_max_gaussian(8, 1.0).unwrap();
        for i in 0..q.boundaries().len() {
            assert!(q.levels()[i] < q.boundaries()[i]);
            assert!(q.boundaries()[i] < q.levels()[i + 1]);
            let mid = 0.5 * (q.levels()[i] + q.levels()[i + 1]);
            assert!((q.boundaries()[i] - mid).abs() < 1e-8);
        }
    }

    #[test]
    fn gaussian_error_output_orthogonality() {
        // E[(X - Q(X)) Q(X)] = 0 for centroid quantizers, by closed-form moments
        for m in [2u64, 3, 5, 8, 16] {
            let q = lloyd_max_gaussian(m, 1.0).unwrap();
            let mut cross = 0.0;
            let levels = q.levels();
            for (i, &level) in levels.iter().enumerate() {
                let a = if i == 0 { f64::NEG_INFINITY } else { q.boundaries()[i - 1] };
                let b = if i + 1 == levels.len() { f64::INFINITY } else { q.boundaries()[i] };
                let (m0, m1) = normal_cell_moments(a, b);
                cross += level * (m1 - level * m0);
            }
            assert!(cross.abs() < 1e-8, "m={m}: cross moment {cross}");
        }
    }

    #[test]
    fn gaussian_rho_strictly_decreasing_to_64() {
        let mut prev = f64::INFINITY;
        for m in 1..=64u64 {
            let rho = lloyd_max_gaussian(m, 1.0).unwrap().rho();
            assert!(rho < prev, "rho must strictly decrease: m={m} rho={rho} prev={prev}");
            prev = rho;
        }
    }

    #[test]
    fn gaussian_highrate_regime() {
        // Exact relative gaps to (pi sqrt(3)/2) M^-2, measured independently with
        // scipy: 0.1186 at M=16, 0.0608 at M=32, 0.0310 at M=64. The gap at M=16
        // genuinely exceeds 10%, so the bound there pins the measured 12% regime.
        for (m, bound) in [(16u64, 0.125), (32, 0.1), (64, 0.1)] {
            let rho = lloyd_max_gaussian(m, 1.0).unwrap().rho();
            let approx = highrate_rho(m, HighRateKind::NonUniform);
            let gap = (rho - approx).abs() / rho;
            assert!(gap < bound, "m={m}: gap {gap} >= {bound}");
        }
    }

    #[test]
    fn gaussian_rejects_zero_levels() {
        assert!(lloyd_max_gaussian(0, 1.0).is_err());
        assert!(lloyd_max_gaussian(4, 0.0).is_err());
        assert!(lloyd_max_gaussian(4, -1.0).is_err());
    }

    #[test]
    fn empirical_two_point_support() {
        let samples: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { -1.0 } else { 1.0 }).collect();
        let q = lloyd_max_empirical(&samples, 2, 0).unwrap();
        assert!((q.levels()[0] + 1.0).abs() < 1e-12);
        assert!((q.levels()[1] - 1.0).abs() < 1e-12);
        assert_eq!(q.rho(), 0.0);
    }

    #[test]
    fn empirical_uniform_grid() {
        // dense uniform grid on [-1, 1]: per-cell variance (1/12) over second moment (1/3)
        let n = 20_000;
        let samples: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * (i as f64 + 0.5) / n as f64).collect();
        let q = lloyd_max_empirical(&samples, 2, 0).unwrap();
        assert!((q.levels()[0] + 0.5).abs() < 1e-3, "levels {:?}", q.levels());
        assert!((q.levels()[1] - 0.5).abs() < 1e-3);
        assert!((q.rho() - 0.25).abs() < 1e-3, "rho {}", q.rho());
    }

    #[test]
    fn empirical_constant_samples() {
        let samples = vec![3.0; 50];
        let q = lloyd_max_empirical(&samples, 1, 0).unwrap();
        assert_eq!(q.levels(), &[3.0]);
        assert_eq!(q.rho(), 0.0);

        let zeros = vec![0.0; 50];
        let q = lloyd_max_empirical(&zeros, 1, 0).unwrap();
        assert_eq!(q.rho(), 0.0, "degenerate zero-second-moment guard");
    }

    #[test]
    fn empirical_rejects_too_few_distinct_values() {
        let samples = vec![1.0, 1.0, 2.0, 2.0];
        assert!(lloyd_max_empirical(&samples, 3, 0).is_err());
        assert!(lloyd_max_empirical(&[], 1, 0).is_err());
    }

    #[test]
    fn empirical_matches_gaussian_design_on_gaussian_samples() {
        use rand::SeedableRng;
        use rand_distr::Distribution;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let normal = rand_distr::StandardNormal;
        let samples: Vec<f64> = (0..200_000).map(|_| normal.sample(&mut rng)).collect();
        let q = lloyd_max_empirical(&samples, 4, 0).unwrap();
        let reference = lloyd_max_gaussian(4, 1.0).unwrap();
        for (a, b) in q.levels().iter().zip(reference.levels()) {
            assert!((a - b).abs() < 0.02, "{a} vs {b}");
        }
        assert!((q.rho() - reference.rho()).abs() < 0.005);
    }

    #[test]
    fn quantize_sign_quantizer() {
        let q = lloyd_max_gaussian(2, 1.0).unwrap();
        assert!((q.quantize(3.2) - ONE_BIT_LEVEL).abs() < 1e-9);
        // boundary tie goes to the upper cell
        assert!((q.quantize(0.0) - ONE_BIT_LEVEL).abs() < 1e-9);
        assert!((q.quantize(-1e-12) + ONE_BIT_LEVEL).abs() < 1e-9);
    }

    #[test]
    fn quantize_idempotent_on_levels() {
        for m in [1u64, 2, 3, 7, 16] {
            let q = lloyd_max_gaussian(m, 1.0).unwrap();
            for &level in q.levels() {
                assert_eq!(q.quantize(level), level);
            }
        }
    }

    #[test]
    fn uniform_single_level() {
        let q = uniform_quantizer(1, 1.0).unwrap();
        assert_eq!(q.levels(), &[0.0]);
        assert_eq!(q.rho(), 1.0);
    }

    #[test]
    fn uniform_two_levels_is_optimal_one_bit() {
        let q = uniform_quantizer(2, 1.0).unwrap();
        assert!((q.levels()[1] - ONE_BIT_LEVEL).abs() < 1e-6);
        assert!((q.rho() - ONE_BIT_RHO).abs() < 1e-10);
    }

    #[test]
    fn uniform_32_levels_near_highrate_formula() {
        let q = uniform_quantizer(32, 1.0).unwrap();
        let approx = highrate_rho(32, HighRateKind::Uniform);
        assert!((q.rho() - approx).abs() / approx < 0.2, "rho {} vs {}", q.rho(), approx);
    }

    #[test]
    fn uniform_never_beats_lloyd() {
        for m in [2u64, 3, 4, 8, 16, 32] {
            let lloyd = lloyd_max_gaussian(m, 1.0).unwrap();
            let uniform = uniform_quantizer(m, 1.0).unwrap();
            assert!(lloyd.rho() <= uniform.rho() + 1e-12, "m={m}");
        }
    }

    #[test]
    fn distortion_factor_vanishes_at_high_rate() {
        let q = lloyd_max_gaussian(64, 1.0).unwrap();
        let rho = distortion_factor(&q, QuantizerInput::Gaussian { variance: 1.0 }).unwrap();
        assert!(rho < 1e-3);
    }

    #[test]
    fn distortion_factor_matches_design_rho() {
        let q = lloyd_max_gaussian(2, 1.0).unwrap();
        let rho = distortion_factor(&q, QuantizerInput::Gaussian { variance: 1.0 }).unwrap();
        assert!((rho - ONE_BIT_RHO).abs() < 1e-9);
    }

    #[test]
    fn distortion_factor_under_mismatched_input() {
        // one-bit quantizer (levels +-c, c = sqrt(2/pi)) on N(0, 4):
        // E[(X-Q)^2]/E[X^2] = (4 - 3 c^2)/4 = 1 - 1.5/pi, larger than 1 - 2/pi
        let q = lloyd_max_gaussian(2, 1.0).unwrap();
        let rho = distortion_factor(&q, QuantizerInput::Gaussian { variance: 4.0 }).unwrap();
        let expected = 1.0 - 1.5 / std::f64::consts::PI;
        assert!((rho - expected).abs() < 1e-9);
        assert!(rho > ONE_BIT_RHO);
    }

    #[test]
    fn distortion_factor_sample_path() {
        let q = lloyd_max_empirical(&[-1.0, 1.0], 2, 0).unwrap();
        let rho = distortion_factor(&q, QuantizerInput::Samples(&[-1.0, 1.0, 0.5])).unwrap();
        // 0.5 quantizes to 1.0: err 0.25 over second moment (1+1+0.25)/3
        assert!((rho - 0.25 / 2.25).abs() < 1e-12);
        assert!(matches!(
            distortion_factor(&q, QuantizerInput::Samples(&[0.0, 0.0])),
            Err(Error::ZeroSecondMoment)
        ));
    }

    #[test]
    fn highrate_formula_values() {
        let nonuniform = highrate_rho(10, HighRateKind::NonUniform);
        assert!((nonuniform - 0.027_206_990_463_513_27).abs() < 1e-12);
        let uniform = highrate_rho(10, HighRateKind::Uniform);
        assert!((uniform - 0.026_750).abs() < 5e-5);
        // out of regime: the approximation exceeds the exact value of 1
        assert!(highrate_rho(1, HighRateKind::NonUniform) > 1.0);
    }

    #[test]
    fn levels_budget_integer_arithmetic() {
        assert_eq!(levels_per_quantizer(64, 6), 2);
        assert_eq!(levels_per_quantizer(63, 6), 1);
        assert_eq!(levels_per_quantizer(1000, 3), 10);
        assert_eq!(levels_per_quantizer(1, 4), 1);
        assert_eq!(levels_per_quantizer(u64::MAX, 2), 4_294_967_295);
        assert_eq!(levels_per_quantizer(1 << 18, 6), 8);
    }

    #[test]
    fn dump_format() {
        let q = lloyd_max_gaussian(2, 1.0).unwrap();
        let dump = q.dump();
        let lines: Vec<&str> = dump.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("levels: "));
        assert!(lines[0].contains("0.797884560802865"));
        assert!(lines[1].starts_with("boundaries: "));
        assert!(lines[2].starts_with("rho: 0.363380227632"));
    }

    proptest! {
        #[test]
        fn quantize_is_monotone(
            raw in proptest::collection::vec(-50.0f64..50.0, 2..9),
            probe in proptest::collection::vec(-60.0f64..60.0, 2..40),
        ) {
            let mut levels = raw.clone();
            levels.sort_unstable_by(|a, b| a.total_cmp(b));
            levels.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
            prop_assume!(levels.len() >= 2);
            let q = ScalarQuantizer {
                boundaries: midpoints(&levels),
                levels,
                rho: 0.0,
                design_kind: DesignKind::LloydEmpirical,
            };
            let mut probes = probe.clone();
            probes.sort_unstable_by(|a, b| a.total_cmp(b));
            let mut prev = f64::NEG_INFINITY;
            for v in probes {
                let out = q.quantize(v);
                prop_assert!(out >= prev);
                prev = out;
            }
        }

        #[test]
        fn empirical_design_is_deterministic(
            samples in proptest::collection::vec(-10.0f64..10.0, 8..60),
        ) {
            let a = lloyd_max_empirical(&samples, 3, 0);
            let b = lloyd_max_empirical(&samples, 3, 99);
            match (a, b) {
                (Ok(qa), Ok(qb)) => prop_assert_eq!(qa, qb),
                (Err(_), Err(_)) => {}
                other => prop_assert!(false, "mismatched outcomes {:?}", other),
            }
        }
    }
}
