//! Complex symplectic linear algebra: the symplectic form, quadratic forms
//! and their Hamilton maps.
//!
//! Phase space is `ℝ^{2n}` (complexified to `ℂ^{2n}` where needed) with
//! coordinates `X = (x, ξ)`: the first `n` entries are positions, the last
//! `n` momenta. The symplectic form is `σ(X, Y) = ⟨ξ, y⟩ − ⟨x, η⟩` with the
//! bilinear (not sesquilinear) pairing, i.e. `σ(X, Y) = ⟨σ_mat X, Y⟩` for
//! the block matrix `σ_mat = [[0, I], [−I, 0]]`.

use num_complex::Complex64;

use crate::{CMat, CVec, Error, Result};

/// Relative size above which the asymmetric part of a coefficient matrix is
/// rejected instead of silently symmetrized.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Eigenvalue slack allowed on `Re Q ⪯ 0`.
pub const DISSIPATIVITY_TOL: f64 = 1e-12;

/// The matrix of the standard symplectic form, `[[0, I_n], [−I_n, 0]]`.
pub fn sigma_matrix(n: usize) -> CMat {
    let mut m = CMat::zeros(2 * n, 2 * n);
    for j in 0..n {
        m[(j, n + j)] = Complex64::new(1.0, 0.0);
        m[(n + j, j)] = Complex64::new(-1.0, 0.0);
    }
    m
}

/// A point of complexified phase space, `(x, ξ) ∈ ℂ^{2n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    entries: CVec,
}

impl PhaseVector {
    /// Wraps a vector of even length `2n`, `n ≥ 1`.
    pub fn new(entries: CVec) -> Result<Self> {
        if entries.len() < 2 || entries.len() % 2 != 0 {
            return Err(Error::Dimension(format!(
                "phase vector length must be even and ≥ 2, got {}",
                entries.len()
            )));
        }
        Ok(Self { entries })
    }

    /// Builds a real phase vector from `f64` components.
    pub fn from_real(coords: &[f64]) -> Result<Self> {
        Self::new(CVec::from_iterator(
            coords.len(),
            coords.iter().map(|&c| Complex64::new(c, 0.0)),
        ))
    }

    pub fn dim(&self) -> usize {
        self.entries.len() / 2
    }

    pub fn as_vec(&self) -> &CVec {
        &self.entries
    }

    pub fn into_vec(self) -> CVec {
        self.entries
    }
}

/// `σ(X, Y) = ⟨ξ, y⟩ − ⟨x, η⟩` with the bilinear inner product.
pub fn symplectic_form(x: &PhaseVector, y: &PhaseVector) -> Result<Complex64> {
    if x.dim() != y.dim() {
        return Err(Error::Dimension(format!(
            "symplectic form needs equal dimensions, got 2n = {} and {}",
            2 * x.dim(),
            2 * y.dim()
        )));
    }
    Ok(symplectic_form_raw(x.as_vec(), y.as_vec()))
}

/// The symplectic form on raw vectors of equal even length.
pub fn symplectic_form_raw(x: &CVec, y: &CVec) -> Complex64 {
    let n = x.len() / 2;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        acc += x[n + j] * y[j] - x[j] * y[n + j];
    }
    acc
}

/// A complex quadratic form `q(X) = ⟨Q X, X⟩` on `ℝ^{2n}`, stored through its
/// symmetric coefficient matrix.
#[derive(Debug, Clone)]
pub struct QuadraticForm {
    n: usize,
    matrix: CMat,
    dissipative: bool,
}

impl QuadraticForm {
    /// Ingests a coefficient matrix, symmetrizing it. The Weyl symbol only
    /// sees the symmetric part, so small asymmetries are dropped silently;
    /// an asymmetric part above [`SYMMETRY_TOL`] (relative) is an error.
    pub fn new(matrix: CMat) -> Result<Self> {
        let rows = matrix.nrows();
        if rows != matrix.ncols() || rows < 2 || rows % 2 != 0 {
            return Err(Error::Dimension(format!(
                "quadratic form matrix must be square of even size ≥ 2, got {}×{}",
                rows,
                matrix.ncols()
            )));
        }
        let sym = (&matrix + matrix.transpose()).scale(0.5);
        let asym_norm = (&matrix - &sym).norm();
        let scale = sym.norm().max(1.0);
        if asym_norm > SYMMETRY_TOL * scale {
            return Err(Error::Config(format!(
                "coefficient matrix asymmetric beyond tolerance (‖asym‖ = {asym_norm:.3e})"
            )));
        }
        let dissipative = real_part_nonpositive(&sym);
        Ok(Self {
            n: rows / 2,
            matrix: sym,
            dissipative,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// Whether `Re Q ⪯ 0` (eigenvalues of the real part below [`DISSIPATIVITY_TOL`]).
    pub fn is_dissipative(&self) -> bool {
        self.dissipative
    }

    /// `q(X) = ⟨Q X, X⟩` (bilinear, also for complex `X`).
    pub fn evaluate(&self, x: &PhaseVector) -> Result<Complex64> {
        if x.dim() != self.n {
            return Err(Error::Dimension(format!(
                "form has n = {}, vector has n = {}",
                self.n,
                x.dim()
            )));
        }
        let qx = &self.matrix * x.as_vec();
        Ok(qx.dot(x.as_vec()))
    }

    /// The Hamilton map `F = σ_mat Q`.
    pub fn hamilton_map(&self) -> HamiltonMap {
        HamiltonMap {
            matrix: sigma_matrix(self.n) * &self.matrix,
        }
    }
}

fn real_part_nonpositive(sym: &CMat) -> bool {
    let re = sym.map(|z| z.re);
    let eig = nalgebra::SymmetricEigen::new(re);
    eig.eigenvalues.iter().all(|&l| l <= DISSIPATIVITY_TOL)
}

/// The Hamilton map of a quadratic form: `F = σ_mat Q`, trace-free and
/// skew-symmetric with respect to `σ`.
#[derive(Debug, Clone)]
pub struct HamiltonMap {
    matrix: CMat,
}

impl HamiltonMap {
    /// Wraps a matrix claimed to be a Hamilton map; `σ_mat F` must be
    /// symmetric (equivalently `σ(X, FY) = −σ(FX, Y)`).
    pub fn new(matrix: CMat) -> Result<Self> {
        let rows = matrix.nrows();
        if rows != matrix.ncols() || rows < 2 || rows % 2 != 0 {
            return Err(Error::Dimension(format!(
                "Hamilton map must be square of even size, got {}×{}",
                rows,
                matrix.ncols()
            )));
        }
        let n = rows / 2;
        // σ F = σ (σ Q) = −Q, so σF symmetric ⇔ F is a Hamilton map.
        let sf = sigma_matrix(n) * &matrix;
        let asym = (&sf - sf.transpose()).norm();
        if asym > SYMMETRY_TOL * sf.norm().max(1.0) {
            return Err(Error::Config(format!(
                "matrix is not σ-skew-symmetric (residual {asym:.3e})"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// Recovers the quadratic form `Q = −σ_mat F` (inverse of `F = σ_mat Q`).
    pub fn quadratic_form(&self) -> QuadraticForm {
        let q = -(sigma_matrix(self.dim()) * &self.matrix);
        QuadraticForm::new(q).expect("σF of a Hamilton map is symmetric")
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pv(coords: &[f64]) -> PhaseVector {
        PhaseVector::from_real(coords).unwrap()
    }

    #[test]
    fn form_is_skew_on_basis() {
        // n=1: σ((1,0),(0,1)) = −1, σ((0,1),(1,0)) = +1
        let e1 = pv(&[1.0, 0.0]);
        let e2 = pv(&[0.0, 1.0]);
        assert_eq!(symplectic_form(&e1, &e2).unwrap(), c(-1.0, 0.0));
        assert_eq!(symplectic_form(&e2, &e1).unwrap(), c(1.0, 0.0));
        assert_eq!(symplectic_form(&e1, &e1).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn form_rejects_dimension_mismatch() {
        let a = pv(&[1.0, 0.0]);
        let b = pv(&[1.0, 0.0, 0.0, 0.0]);
        assert!(symplectic_form(&a, &b).is_err());
    }

    #[test]
    fn harmonic_oscillator_hamilton_map() {
        // q = −x² − ξ²  ⇒  Q = −I₂, F = −σ = [[0,−1],[1,0]]
        let q = QuadraticForm::new(-CMat::identity(2, 2)).unwrap();
        let f = q.hamilton_map();
        assert_eq!(f.matrix()[(0, 1)], c(-1.0, 0.0));
        assert_eq!(f.matrix()[(1, 0)], c(1.0, 0.0));
        assert_eq!(f.matrix()[(0, 0)], c(0.0, 0.0));
        assert!(q.is_dissipative());
    }

    #[test]
    fn schrodinger_hamilton_map_is_scalar_multiple() {
        let q = QuadraticForm::new(CMat::identity(2, 2) * c(0.0, -1.0)).unwrap();
        let f = q.hamilton_map();
        let expected = sigma_matrix(1) * c(0.0, -1.0);
        assert!((f.matrix() - expected).norm() == 0.0);
        assert!(q.is_dissipative()); // Re Q = 0
    }

    #[test]
    fn evaluate_form_examples() {
        let q = QuadraticForm::new(-CMat::identity(2, 2)).unwrap();
        assert_eq!(q.evaluate(&pv(&[1.0, 1.0])).unwrap(), c(-2.0, 0.0));
        assert_eq!(q.evaluate(&pv(&[0.0, 0.0])).unwrap(), c(0.0, 0.0));

        let qi = QuadraticForm::new(CMat::identity(2, 2) * c(0.0, -1.0)).unwrap();
        assert_eq!(qi.evaluate(&pv(&[1.0, 0.0])).unwrap(), c(0.0, -1.0));
    }

    #[test]
    fn asymmetric_matrix_rejected_large_accepted_small() {
        let mut m = -CMat::identity(2, 2);
        m[(0, 1)] = c(1e-13, 0.0);
        let q = QuadraticForm::new(m).unwrap();
        // symmetrized: both off-diagonals equal
        assert_eq!(q.matrix()[(0, 1)], q.matrix()[(1, 0)]);

        let mut bad = -CMat::identity(2, 2);
        bad[(0, 1)] = c(0.5, 0.0);
        assert!(QuadraticForm::new(bad).is_err());
    }

    #[test]
    fn non_dissipative_flagged_not_rejected() {
        let q = QuadraticForm::new(CMat::identity(2, 2)).unwrap();
        assert!(!q.is_dissipative());
    }

    proptest! {
        #[test]
        fn form_antisymmetry(xs in proptest::collection::vec(-5.0f64..5.0, 4),
                             ys in proptest::collection::vec(-5.0f64..5.0, 4)) {
            let x = pv(&xs);
            let y = pv(&ys);
            let a = symplectic_form(&x, &y).unwrap();
            let b = symplectic_form(&y, &x).unwrap();
            prop_assert!((a + b).norm() <= 1e-12 * (1.0 + a.norm()));
        }

        #[test]
        fn hamilton_map_traceless_and_skew(entries in proptest::collection::vec(-3.0f64..3.0, 20)) {
            // random complex symmetric 4×4 from 20 reals (10 upper-tri complex pairs)
            let mut m = CMat::zeros(4, 4);
            let mut k = 0;
            for i in 0..4 {
                for j in i..4 {
                    let v = c(entries[k % 20], entries[(k + 1) % 20]);
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                    k += 2;
                }
            }
            let q = QuadraticForm::new(m).unwrap();
            let f = q.hamilton_map();
            prop_assert!(f.trace().norm() <= 1e-12 * f.matrix().norm().max(1.0));

            // σ(X, FY) + σ(FX, Y) = 0 on random basis pairs
            let fx = |v: &CVec| f.matrix() * v;
            for i in 0..4 {
                for j in 0..4 {
                    let ei = CVec::from_fn(4, |r, _| if r == i { c(1.0, 0.0) } else { c(0.0, 0.0) });
                    let ej = CVec::from_fn(4, |r, _| if r == j { c(1.0, 0.0) } else { c(0.0, 0.0) });
                    let lhs = symplectic_form_raw(&ei, &fx(&ej)) + symplectic_form_raw(&fx(&ei), &ej);
                    prop_assert!(lhs.norm() <= 1e-12 * f.matrix().norm().max(1.0));
                }
            }
        }

        #[test]
        fn hamilton_map_linear_in_q(a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let q1 = CMat::identity(2, 2) * c(-1.0, 0.0);
            let mut q2 = CMat::zeros(2, 2);
            q2[(0, 1)] = c(0.0, 0.5);
            q2[(1, 0)] = c(0.0, 0.5);
            let combo = QuadraticForm::new(&q1 * c(a, 0.0) + &q2 * c(b, 0.0)).unwrap();
            let f1 = QuadraticForm::new(q1).unwrap().hamilton_map();
            let f2 = QuadraticForm::new(q2).unwrap().hamilton_map();
            let lin = f1.matrix() * c(a, 0.0) + f2.matrix() * c(b, 0.0);
            prop_assert!((combo.hamilton_map().matrix() - lin).norm() <= 1e-12);
        }
    }

    #[test]
    fn polarized_identity_on_basis() {
        // q(X,Y) polarized = σ(X, FY) for the KFP-like mixed form
        let mut m = CMat::zeros(4, 4);
        m[(1, 1)] = c(-0.25, 0.0);
        m[(3, 3)] = c(-1.0, 0.0);
        m[(1, 2)] = c(0.0, -0.5);
        m[(2, 1)] = c(0.0, -0.5);
        m[(0, 3)] = c(0.0, 1.0);
        m[(3, 0)] = c(0.0, 1.0);
        let q = QuadraticForm::new(m.clone()).unwrap();
        let f = q.hamilton_map();
        for i in 0..4 {
            for j in 0..4 {
                let ei = CVec::from_fn(4, |r, _| if r == i { c(1.0, 0.0) } else { c(0.0, 0.0) });
                let ej = CVec::from_fn(4, |r, _| if r == j { c(1.0, 0.0) } else { c(0.0, 0.0) });
                // polarized form ⟨QX, Y⟩
                let pol = (&m * &ei).dot(&ej);
                let sig = symplectic_form_raw(&ei, &(f.matrix() * &ej));
                assert!((pol - sig).norm() <= 1e-12);
            }
        }
    }
}
