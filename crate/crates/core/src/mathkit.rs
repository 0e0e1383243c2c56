//! Dense linear-algebra primitives used by every quantizer design:
//! symmetric PSD square roots with pseudo-inverse handling, reproducible
//! truncated SVD, and Gram-Schmidt orthogonalization under a covariance metric.
//!
//! All routines are pure functions on immutable inputs and are therefore safe to
//! call concurrently. Computations are deterministic: repeated calls on identical
//! input produce bit-identical output.

use nalgebra::{DMatrix, SymmetricEigen, SVD};

use crate::error::{Error, Result};

/// Relative eigenvalue cutoff used when a caller does not choose one.
pub const DEFAULT_EIGEN_TOL: f64 = 1e-10;

/// Symmetric PSD square root together with its pseudo-inverse square root.
#[derive(Debug, Clone)]
pub struct PsdFactorization {
    /// Symmetric PSD matrix `R` with `R * R ~= S`.
    pub sqrt: DMatrix<f64>,
    /// Pseudo-inverse square root; `inv_sqrt * S * inv_sqrt` is the projector onto range(S).
    pub inv_sqrt: DMatrix<f64>,
    /// Number of eigenvalues above the cutoff.
    pub rank: usize,
    /// Relative cutoff that was applied.
    pub eigen_tol: f64,
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Relative asymmetry `max|S - S^T| / max|S|` (0 for the zero matrix).
fn relative_asymmetry(s: &DMatrix<f64>) -> f64 {
    let scale = max_abs(s);
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0_f64;
    for i in 0..s.nrows() {
        for j in (i + 1)..s.ncols() {
            worst = worst.max((s[(i, j)] - s[(j, i)]).abs());
        }
    }
    worst / scale
}

/// Eigendecomposition-based square root of a symmetric PSD matrix.
///
/// Eigenvalues below `rel_tol * lambda_max` are treated as exactly zero and the
/// reported rank counts the survivors. A negative eigenvalue below
/// `-rel_tol * lambda_max` rejects the input as not PSD.
pub fn psd_sqrt(s: &DMatrix<f64>, rel_tol: f64) -> Result<PsdFactorization> {
    if !s.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "psd_sqrt needs a square matrix, got {}x{}",
            s.nrows(),
            s.ncols()
        )));
    }
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "rel_tol must lie in (0, 1), got {rel_tol}"
        )));
    }
    let asymmetry = relative_asymmetry(s);
    if asymmetry > 1e-10 {
        return Err(Error::NotSymmetric { asymmetry });
    }
    let n = s.nrows();
    let sym = (s + s.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let lambda_max = eig.eigenvalues.iter().fold(0.0_f64, |a, &v| a.max(v));
    let cutoff = rel_tol * lambda_max;
    for &lambda in eig.eigenvalues.iter() {
        if lambda < -cutoff {
            return Err(Error::NotPsd { eigenvalue: lambda });
        }
    }
    let mut sqrt_vals = Vec::with_capacity(n);
    let mut inv_vals = Vec::with_capacity(n);
    let mut rank = 0;
    for &lambda in eig.eigenvalues.iter() {
        if lambda > cutoff {
            rank += 1;
            let root = lambda.sqrt();
            sqrt_vals.push(root);
            inv_vals.push(1.0 / root);
        } else {
            sqrt_vals.push(0.0);
            inv_vals.push(0.0);
        }
    }
    let q = &eig.eigenvectors;
    let scale_cols = |vals: &[f64]| {
        let mut scaled = q.clone();
        for (j, &v) in vals.iter().enumerate() {
            scaled.column_mut(j).scale_mut(v);
        }
        let m = &scaled * q.transpose();
        // symmetrize away the last roundoff
        (&m + m.transpose()) * 0.5
    };
    Ok(PsdFactorization {
        sqrt: scale_cols(&sqrt_vals),
        inv_sqrt: scale_cols(&inv_vals),
        rank,
        eigen_tol: rel_tol,
    })
}

/// Fix the sign of each column so its largest-magnitude entry is positive.
/// The first index wins magnitude ties.
fn fix_column_signs(v: &mut DMatrix<f64>) {
    for mut col in v.column_iter_mut() {
        let mut best_idx = 0;
        let mut best_abs = f64::NEG_INFINITY;
        for (i, &x) in col.iter().enumerate() {
            if x.abs() > best_abs {
                best_abs = x.abs();
                best_idx = i;
            }
        }
        if col[best_idx] < 0.0 {
            col.neg_mut();
        }
    }
}

/// The `p` right singular vectors of `m` for its `p` largest singular values.
///
/// Columns of the returned matrix are orthonormal, singular values are
/// non-increasing, and a deterministic sign convention is applied: the
/// largest-magnitude entry of each column is made positive (first index on ties).
/// When `p` exceeds the number of singular vectors the factorization provides,
/// the basis is completed with orthonormal vectors from the null space (their
/// singular values are reported as exactly 0).
pub fn top_right_singular_vectors(m: &DMatrix<f64>, p: usize) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let n = m.ncols();
    if p == 0 || p > n {
        return Err(Error::InvalidArgument(format!(
            "requested {p} right singular vectors of a matrix with {n} columns"
        )));
    }
    let svd = SVD::new(m.clone(), false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let r = v_t.nrows();
    // stable descending order keeps the factorization's order for ties
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let take = p.min(r);
    let mut v = DMatrix::<f64>::zeros(n, p);
    let mut sigma = Vec::with_capacity(p);
    for (dst, &src) in order.iter().take(take).enumerate() {
        v.column_mut(dst).copy_from(&v_t.row(src).transpose());
        sigma.push(svd.singular_values[src]);
    }
    if take < p {
        complete_basis(&mut v, take)?;
        sigma.resize(p, 0.0);
    }
    fix_column_signs(&mut v);
    Ok((v, sigma))
}

/// Extend `v`'s first `have` orthonormal columns to all of its columns using
/// Gram-Schmidt over the standard basis (deterministic order).
fn complete_basis(v: &mut DMatrix<f64>, have: usize) -> Result<()> {
    let n = v.nrows();
    let mut filled = have;
    for e in 0..n {
        if filled == v.ncols() {
            break;
        }
        let mut cand = nalgebra::DVector::<f64>::zeros(n);
        cand[e] = 1.0;
        // two orthogonalization passes keep the completion numerically orthonormal
        for _ in 0..2 {
            for j in 0..filled {
                let proj = v.column(j).dot(&cand);
                cand -= v.column(j) * proj;
            }
        }
        let norm = cand.norm();
        if norm > 0.5 {
            cand /= norm;
            v.column_mut(filled).copy_from(&cand);
            filled += 1;
        }
    }
    if filled < v.ncols() {
        return Err(Error::InvalidArgument(
            "could not complete an orthonormal basis".to_string(),
        ));
    }
    Ok(())
}

/// Orthogonalize the rows of `a` under the `sigma_x` metric and normalize the
/// branch variances, so that `a' * sigma_x * a'^T = I`.
///
/// Performed in whitened coordinates: multiply by `sigma_x^(1/2)`, run modified
/// Gram-Schmidt, normalize, and map back through `sigma_x^(-1/2)`.
pub fn metric_orthogonalize(a: &DMatrix<f64>, sigma_x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.ncols() != sigma_x.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "A has {} columns but the covariance is {}x{}",
            a.ncols(),
            sigma_x.nrows(),
            sigma_x.ncols()
        )));
    }
    let fact = psd_sqrt(sigma_x, DEFAULT_EIGEN_TOL)?;
    if fact.rank < sigma_x.nrows() {
        return Err(Error::InvalidArgument(
            "metric_orthogonalize requires a positive definite covariance".to_string(),
        ));
    }
    let mut w = a * &fact.sqrt;
    let p = w.nrows();
    for i in 0..p {
        let original_norm = w.row(i).norm();
        for j in 0..i {
            let proj = w.row(i).dot(&w.row(j));
            let wj = w.row(j).clone_owned();
            let mut wi = w.row_mut(i);
            wi -= wj * proj;
        }
        let norm = w.row(i).norm();
        if norm <= 1e-10 * original_norm.max(f64::MIN_POSITIVE) {
            return Err(Error::RankDeficientRow { row: i });
        }
        w.row_mut(i).scale_mut(1.0 / norm);
    }
    Ok(&w * &fact.inv_sqrt)
}

/// Largest relative off-diagonal magnitude of `a * sigma_x * a^T`.
///
/// This is the quantitative check of the metric-orthogonality restriction: a
/// value of 0 means the branch inputs are exactly uncorrelated.
pub fn restriction_deviation(a: &DMatrix<f64>, sigma_x: &DMatrix<f64>) -> f64 {
    let gram = a * sigma_x * a.transpose();
    let scale = gram
        .diagonal()
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let mut worst = 0.0_f64;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            if i != j {
                worst = worst.max(gram[(i, j)].abs());
            }
        }
    }
    worst / scale
}
