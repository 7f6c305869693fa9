//! Small-matrix helpers: complex matrix trigonometric functions, right
//! division, SVD null spaces and principal angles.

use num_complex::Complex64;

use crate::{CMat, Error, RMat, RVec, Result};

/// `B · A⁻¹` by an LU solve on the transposed system (no explicit inverse).
pub fn right_divide(b: &CMat, a: &CMat) -> Result<CMat> {
    let lu = a.transpose().lu();
    let solved = lu
        .solve(&b.transpose())
        .ok_or_else(|| Error::Singular("right division".into()))?;
    Ok(solved.transpose())
}

/// `A⁻¹ · B` by an LU solve.
pub fn left_divide(a: &CMat, b: &CMat) -> Result<CMat> {
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Singular("left division".into()))
}

/// Matrix cosine and sine of a complex matrix, by Taylor series on `A/2^s`
/// followed by `s` double-angle steps. Exact on nilpotent matrices (the
/// series terminates), no diagonalizability assumption.
pub fn matrix_cos_sin(a: &CMat) -> (CMat, CMat) {
    let dim = a.nrows();
    let norm = a.norm();
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let b = a.map(|z| z / 2f64.powi(s as i32));

    // cos(B) = Σ (−1)^k B^{2k}/(2k)!, sin(B) = Σ (−1)^k B^{2k+1}/(2k+1)!
    let b2 = &b * &b;
    let mut cos = CMat::identity(dim, dim);
    let mut sin = b.clone();
    let mut even_term = CMat::identity(dim, dim);
    let mut odd_term = b.clone();
    for k in 1..64 {
        even_term = &even_term * &b2 * Complex64::new(-1.0 / ((2 * k - 1) as f64 * (2 * k) as f64), 0.0);
        odd_term = &odd_term * &b2 * Complex64::new(-1.0 / ((2 * k) as f64 * (2 * k + 1) as f64), 0.0);
        cos += &even_term;
        sin += &odd_term;
        if even_term.norm() + odd_term.norm() < 1e-18 * (cos.norm() + sin.norm()).max(1.0) {
            break;
        }
    }

    for _ in 0..s {
        let new_sin = (&sin * &cos).scale(2.0);
        let cos2 = (&cos * &cos).scale(2.0) - CMat::identity(dim, dim);
        sin = new_sin;
        cos = cos2;
    }
    (cos, sin)
}

/// `tan(A) = sin(A)·cos(A)⁻¹`; errors when `cos(A)` is singular.
pub fn matrix_tan(a: &CMat) -> Result<CMat> {
    let (cos, sin) = matrix_cos_sin(a);
    right_divide(&sin, &cos).map_err(|_| {
        Error::Unsupported("matrix tangent breakdown: cos(A) is singular".into())
    })
}

/// Orthonormal basis of the (right) null space of a real matrix, thresholding
/// singular values at `tol · σ_max`. A numerically zero matrix yields the
/// standard basis of the full column space.
pub fn null_space(m: &RMat, tol: f64) -> (Vec<RVec>, Vec<f64>) {
    let cols = m.ncols();
    // pad wide matrices with zero rows so the thin SVD carries a full V^T
    let work = if m.nrows() < cols {
        let mut padded = RMat::zeros(cols, cols);
        padded.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        padded
    } else {
        m.clone()
    };
    let svd = work.svd(false, true);
    let mut singular: Vec<f64> = svd.singular_values.iter().copied().collect();
    singular.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let sigma_max = singular.first().copied().unwrap_or(0.0);
    if sigma_max == 0.0 {
        let basis = (0..cols)
            .map(|j| RVec::from_fn(cols, |r, _| if r == j { 1.0 } else { 0.0 }))
            .collect();
        return (basis, singular);
    }
    let v_t = svd.v_t.expect("requested V^T");
    let mut basis = Vec::new();
    for (idx, &sv) in svd.singular_values.iter().enumerate() {
        if sv <= tol * sigma_max {
            basis.push(v_t.row(idx).transpose());
        }
    }
    (basis, singular)
}

/// Largest principal angle (radians) between the spans of two orthonormal
/// bases. Returns `None` when the dimensions differ.
pub fn max_principal_angle(a: &[RVec], b: &[RVec]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    if a.is_empty() {
        return Some(0.0);
    }
    let dim = a[0].len();
    let qa = RMat::from_columns(&a.iter().map(|v| v.clone()).collect::<Vec<_>>());
    let qb = RMat::from_columns(&b.iter().map(|v| v.clone()).collect::<Vec<_>>());
    debug_assert_eq!(qa.nrows(), dim);
    let overlap = qa.transpose() * qb;
    let svd = overlap.svd(false, false);
    let min_cos = svd
        .singular_values
        .iter()
        .fold(1.0f64, |acc, &s| acc.min(s))
        .clamp(-1.0, 1.0);
    Some(min_cos.acos())
}
