//! Brute-force reference propagator: direct RK4 time stepping of
//! `∂_t u = q_tʷ(x, D_x) u` on a 1-D grid with spectral space discretization.
//!
//! For `n = 1` the symbol `q = a·x² + b·xξ + c·ξ²` quantizes to
//! `a·x² + c·D² + b·(xD + Dx)/2`; `D` acts spectrally (periodic grid with
//! enough padding that Gaussian data wraps below 1e-10). This module is
//! deliberately simple — fixed-step RK4, dense matrix available for
//! inspection — so it can serve as an independent check on the Mehler route.

use num_complex::Complex64;

use crate::family::HamiltonianFamily;
use crate::grid::{fft, ifft, GridFunction, GridParams};
use crate::symplectic::QuadraticForm;
use crate::{CMat, Error, Result};

/// The quantized coefficients of a 1-D quadratic symbol.
#[derive(Debug, Clone, Copy)]
struct SymbolCoeffs {
    a: Complex64, // x²
    b: Complex64, // xξ
    c: Complex64, // ξ²
}

impl SymbolCoeffs {
    fn from_form(q: &QuadraticForm) -> Result<Self> {
        if q.dim() != 1 {
            return Err(Error::Unsupported("grid oracle is n = 1 only".into()));
        }
        let m = q.matrix();
        Ok(Self {
            a: m[(0, 0)],
            b: m[(0, 1)] * 2.0,
            c: m[(1, 1)],
        })
    }
}

/// Dense grid realization of `aʷ(x, D_x)` for a 1-D quadratic symbol,
/// obtained column-by-column from the spectral applicator.
#[derive(Debug, Clone)]
pub struct WeylOperatorMatrix {
    matrix: CMat,
    pub grid: GridParams,
    pub norm_est: f64,
}

impl WeylOperatorMatrix {
    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// `‖A − A^H‖`: zero (to rounding) for real symbol coefficients.
    pub fn hermiticity_residual(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).norm()
    }

    pub fn apply(&self, u: &GridFunction) -> Result<GridFunction> {
        let v = nalgebra::DVector::from_column_slice(u.samples());
        let out = &self.matrix * v;
        GridFunction::new(u.params(), out.iter().copied().collect())
    }
}

/// Applies `a·x² + c·D² + b·(xD + Dx)/2` spectrally. The Nyquist mode of the
/// odd multiplier `ξ` is zeroed to keep `D` Hermitian; `ξ²` keeps it.
fn apply_weyl(co: SymbolCoeffs, grid: GridParams, u: &[Complex64], out: &mut [Complex64]) {
    let n = grid.n;
    let mut hat = u.to_vec();
    fft(&mut hat);
    let mut d2: Vec<Complex64> = hat
        .iter()
        .enumerate()
        .map(|(k, z)| z * grid.xi(k) * grid.xi(k))
        .collect();
    ifft(&mut d2);
    let need_mixed = co.b.norm() != 0.0;
    let (du, dxu) = if need_mixed {
        let mut du: Vec<Complex64> = hat
            .iter()
            .enumerate()
            .map(|(k, z)| {
                let xi = if k == n / 2 { 0.0 } else { grid.xi(k) };
                z * xi
            })
            .collect();
        ifft(&mut du);
        let mut xu: Vec<Complex64> = u
            .iter()
            .enumerate()
            .map(|(k, z)| z * grid.x(k))
            .collect();
        fft(&mut xu);
        let mut dxu: Vec<Complex64> = xu
            .iter()
            .enumerate()
            .map(|(k, z)| {
                let xi = if k == n / 2 { 0.0 } else { grid.xi(k) };
                z * xi
            })
            .collect();
        ifft(&mut dxu);
        (du, dxu)
    } else {
        (Vec::new(), Vec::new())
    };

    for k in 0..n {
        let x = grid.x(k);
        let mut v = co.a * (x * x) * u[k] + co.c * d2[k];
        if need_mixed {
            v += co.b * 0.5 * (x * du[k] + dxu[k]);
        }
        out[k] = v;
    }
}

/// Conservative operator-norm estimate `|a|·max x² + |c|·max ξ² + |b|·max|x|·max|ξ|`.
fn norm_estimate(co: SymbolCoeffs, grid: GridParams) -> f64 {
    let xmax = grid.x(0).abs().max(grid.x(grid.n - 1).abs());
    let ximax = std::f64::consts::PI / grid.dx;
    co.a.norm() * xmax * xmax + co.c.norm() * ximax * ximax + co.b.norm() * xmax * ximax
}

/// Builds the dense `N×N` matrix of the quantized symbol on the grid.
pub fn assemble_weyl_operator(q: &QuadraticForm, grid: GridParams) -> Result<WeylOperatorMatrix> {
    let co = SymbolCoeffs::from_form(q)?;
    let n = grid.n;
    let mut matrix = CMat::zeros(n, n);
    let mut basis = vec![Complex64::new(0.0, 0.0); n];
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        basis[j] = Complex64::new(1.0, 0.0);
        apply_weyl(co, grid, &basis, &mut col);
        for i in 0..n {
            matrix[(i, j)] = col[i];
        }
        basis[j] = Complex64::new(0.0, 0.0);
    }
    Ok(WeylOperatorMatrix {
        matrix,
        grid,
        norm_est: norm_estimate(co, grid),
    })
}

/// Largest operator-norm estimate over the family on `[0, t]`.
pub fn family_norm_estimate(family: &HamiltonianFamily, grid: GridParams, t: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 0..=32 {
        let s = t * k as f64 / 32.0;
        let co = SymbolCoeffs::from_form(&family.sample(s)?)?;
        worst = worst.max(norm_estimate(co, grid));
    }
    Ok(worst)
}

/// A step count satisfying the RK4 stability criterion `dt ≤ 0.4/‖op‖`.
pub fn auto_steps(family: &HamiltonianFamily, grid: GridParams, t: f64) -> Result<usize> {
    let norm = family_norm_estimate(family, grid, t)?;
    Ok(((t.abs() * norm / 0.4).ceil() as usize).max(8))
}

/// Classical fixed-step RK4 for `∂_t u = q_tʷ u` from time `0` to `t`,
/// re-reading the coefficients at every stage time.
pub fn evolve(
    family: &HamiltonianFamily,
    u0: &GridFunction,
    t: f64,
    n_steps: usize,
) -> Result<GridFunction> {
    if family.dim() != 1 {
        return Err(Error::Unsupported("grid oracle is n = 1 only".into()));
    }
    if n_steps == 0 {
        return Err(Error::Range("n_steps must be positive".into()));
    }
    let grid = u0.params();
    let dt = t / n_steps as f64;
    let norm = family_norm_estimate(family, grid, t)?;
    if dt.abs() > 0.5 / norm {
        return Err(Error::Range(format!(
            "RK4 step {dt:.3e} violates the stability bound {:.3e}; increase n_steps",
            0.5 / norm
        )));
    }

    let dissipative = family.is_dissipative();
    let n = grid.n;
    let norm0 = u0.l2_norm();
    let mut u = u0.samples().to_vec();
    let mut k1 = vec![Complex64::new(0.0, 0.0); n];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();

    for step in 0..n_steps {
        let t0 = step as f64 * dt;
        let co0 = SymbolCoeffs::from_form(&family.sample_unchecked(t0))?;
        let co_half = SymbolCoeffs::from_form(&family.sample_unchecked(t0 + 0.5 * dt))?;
        let co1 = SymbolCoeffs::from_form(&family.sample_unchecked(t0 + dt))?;

        apply_weyl(co0, grid, &u, &mut k1);
        for i in 0..n {
            tmp[i] = u[i] + k1[i] * (0.5 * dt);
        }
        apply_weyl(co_half, grid, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = u[i] + k2[i] * (0.5 * dt);
        }
        apply_weyl(co_half, grid, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = u[i] + k3[i] * dt;
        }
        apply_weyl(co1, grid, &tmp, &mut k4);
        for i in 0..n {
            u[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
        }

        if dissipative && step % 64 == 63 {
            let norm_now =
                (u.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.dx).sqrt();
            if norm_now > 10.0 * norm0 {
                return Err(Error::Unsupported(format!(
                    "oracle instability: norm grew to {norm_now:.3e} from {norm0:.3e}"
                )));
            }
        }
    }
    GridFunction::new(grid, u)
}
