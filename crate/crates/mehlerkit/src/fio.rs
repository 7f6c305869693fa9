//! Two-point Gaussian kernels of the evolution operators and their action on
//! grid functions.
//!
//! The kernel comes from the Weyl symbol by the Gaussian `ξ`-integral
//!
//! ```text
//! K(x, y) = (2π)^{−n} ∫ e^{i(x−y)·ξ} p((x+y)/2, ξ) dξ
//! ```
//!
//! evaluated in closed form (completing the square analytically). All branch
//! choices are anchored by continuity from `t = τ`, where the symbol is `1`
//! and the kernel is the Dirac kernel `δ(x − y)` (flagged distributional).
//! The oscillatory (Fresnel) case `Re G_{ξξ} = 0` is supported for `n = 1`.

use num_complex::Complex64;

use crate::grid::{fft, ifft, GridFunction};
use crate::map_indices;
use crate::resolvent::Resolvent;
use crate::symbol::MehlerSymbol;
use crate::{CMat, CVec, Error, Result};

/// `|det(−G_{ξξ})|` below which the kernel is declared distributional.
pub const DISTRIBUTIONAL_TOL: f64 = 1e-10;

/// Edge decay above which [`apply_kernel`] raises its boundary warning.
pub const EDGE_DECAY_WARN: f64 = 1e-12;

/// A two-point complex Gaussian `amplitude · exp(⟨K z, z⟩)`, `z = (x, y)`,
/// representing the operator kernel on `ℝⁿ × ℝⁿ`.
#[derive(Debug, Clone)]
pub struct GaussianKernel {
    n: usize,
    pub amplitude: Complex64,
    k: CMat,
    /// The `ξξ`-block of the symbol exponent was numerically singular: the
    /// kernel is a tempered distribution, not a pointwise Gaussian.
    pub distributional: bool,
    /// The symbol was the identity symbol (`c = 1`, `G = 0`): the kernel is
    /// `δ(x − y)` and the operator acts as the identity.
    pub identity: bool,
}

impl GaussianKernel {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// The symmetric exponent matrix over `z = (x, y)`.
    pub fn exponent_matrix(&self) -> &CMat {
        &self.k
    }

    /// Pointwise evaluation (n = 1).
    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        debug_assert_eq!(self.n, 1);
        let e = self.k[(0, 0)] * x * x
            + self.k[(0, 1)] * (2.0 * x * y)
            + self.k[(1, 1)] * y * y;
        self.amplitude * e.exp()
    }

    /// `⟨K z, z⟩` for real `z` of length `2n`.
    pub fn exponent(&self, z: &[f64]) -> Complex64 {
        let zc = CVec::from_iterator(z.len(), z.iter().map(|&v| Complex64::new(v, 0.0)));
        (&self.k * &zc).dot(&zc)
    }
}

/// Converts a Gaussian Weyl symbol into the two-point kernel.
///
/// Supported cases: the identity symbol (distributional), `n = 1` with any
/// non-singular `G_{ξξ}` (dissipative or Fresnel), and `n = 2` when
/// `Re G_{ξξ}` is negative definite (the principal determinant branch is
/// provably continuous from the identity there).
pub fn kernel_from_symbol(sym: &MehlerSymbol) -> Result<GaussianKernel> {
    if !sym.valid {
        let (lo, hi) = sym.crossing.unwrap_or((sym.t, sym.t));
        return Err(Error::Degenerate { lo, hi });
    }
    let n = sym.dim();
    let g = sym.exponent_matrix();
    let c = sym.prefactor;

    let identity = g.norm() < 1e-13 && (c - Complex64::new(1.0, 0.0)).norm() < 1e-13;
    let g_xx = g.view((n, n), (n, n)).into_owned(); // ξξ block
    let det_neg_gxx = (-&g_xx).lu().determinant();
    if identity || det_neg_gxx.norm() < DISTRIBUTIONAL_TOL * g_xx.norm().max(1.0).powi(n as i32) {
        return Ok(GaussianKernel {
            n,
            amplitude: Complex64::new(f64::NAN, f64::NAN),
            k: CMat::zeros(2 * n, 2 * n),
            distributional: true,
            identity,
        });
    }

    // Fresnel (oscillatory) integrals only have the n = 1 closed form here;
    // for larger n require a strictly dissipative ξξ-block.
    let re_gxx = g_xx.map(|z| z.re);
    let negdef = nalgebra::SymmetricEigen::new((&re_gxx + re_gxx.transpose()).scale(0.5))
        .eigenvalues
        .iter()
        .all(|&l| l < 0.0);
    if !negdef && n > 1 {
        return Err(Error::Unsupported(
            "oscillatory ξ-integral closed form is n = 1 only".into(),
        ));
    }
    if n > 2 {
        return Err(Error::Unsupported(
            "determinant branch control implemented for n ≤ 2".into(),
        ));
    }

    // blocks of the exponent over (u, ξ), u = (x+y)/2
    let g_uu = g.view((0, 0), (n, n)).into_owned();
    let g_ux = g.view((0, n), (n, n)).into_owned();

    // u = P z, w = W z with z = (x, y)
    let mut p = CMat::zeros(n, 2 * n);
    let mut w = CMat::zeros(n, 2 * n);
    for j in 0..n {
        p[(j, j)] = Complex64::new(0.5, 0.0);
        p[(j, n + j)] = Complex64::new(0.5, 0.0);
        w[(j, j)] = Complex64::new(1.0, 0.0);
        w[(j, n + j)] = Complex64::new(-1.0, 0.0);
    }

    // ∫ exp(⟨G_ξξ ξ, ξ⟩ + ⟨M z, ξ⟩) dξ = π^{n/2} det(−G_ξξ)^{−1/2}
    //   · exp(−¼ ⟨G_ξξ⁻¹ M z, M z⟩)
    let m = &w * Complex64::i() + g_ux.transpose() * &p * Complex64::new(2.0, 0.0);
    let ginv_m = crate::linalg::left_divide(&g_xx, &m)?;
    let quad = p.transpose() * &g_uu * &p - (m.transpose() * ginv_m).scale(0.25);
    let k = (&quad + quad.transpose()).scale(0.5);

    let amplitude = c
        * Complex64::new(2.0, 0.0).powi(-(n as i32))
        * Complex64::new(std::f64::consts::PI, 0.0).powf(-(n as f64) / 2.0)
        * det_neg_gxx.sqrt().inv();

    Ok(GaussianKernel {
        n,
        amplitude,
        k,
        distributional: false,
        identity: false,
    })
}

/// Result of applying a kernel on a grid.
#[derive(Debug, Clone)]
pub struct ApplyOutcome {
    pub output: GridFunction,
    /// Boundary-to-peak magnitude ratio of the input.
    pub edge_mass: f64,
    /// Set when the input does not decay below [`EDGE_DECAY_WARN`] at the
    /// grid edges; the result then describes the grid-truncated operand.
    pub decay_warning: bool,
}

/// `(𝒦u)(x_i) = ∫ K(x_i, y) u(y) dy` by trapezoid quadrature on the grid.
pub fn apply_kernel(ker: &GaussianKernel, u: &GridFunction) -> Result<ApplyOutcome> {
    if ker.distributional {
        return Err(Error::Distributional);
    }
    if ker.dim() != 1 {
        return Err(Error::Unsupported("grid propagation is n = 1 only".into()));
    }
    let params = u.params();
    let nn = params.n;
    let dx = params.dx;
    let edge_mass = u.edge_mass();

    let k00 = ker.k[(0, 0)];
    let k01 = ker.k[(0, 1)];
    let k11 = ker.k[(1, 1)];
    let amp = ker.amplitude;

    // exp(k00 x² + 2 k01 x y + k11 y²): precompute the y-only factors
    let y_factors: Vec<Complex64> = (0..nn)
        .map(|j| {
            let y = params.x(j);
            let wj = if j == 0 || j == nn - 1 { 0.5 } else { 1.0 };
            (k11 * y * y).exp() * wj * dx
        })
        .collect();
    let samples = u.samples();

    let out = map_indices(nn, |i| {
        let x = params.x(i);
        let xx = (k00 * x * x).exp() * amp;
        let two_k01_x = k01 * 2.0 * x;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..nn {
            let y = params.x(j);
            acc += (two_k01_x * y).exp() * y_factors[j] * samples[j];
        }
        acc * xx
    });

    Ok(ApplyOutcome {
        output: GridFunction::new(params, out)?,
        edge_mass,
        decay_warning: edge_mass > EDGE_DECAY_WARN,
    })
}

/// Spectral derivative `D u = −i u'` on the grid (Nyquist mode zeroed).
pub fn spectral_d(u: &GridFunction) -> GridFunction {
    let params = u.params();
    let mut hat = u.samples().to_vec();
    fft(&mut hat);
    for (k, z) in hat.iter_mut().enumerate() {
        let xi = if k == params.n / 2 { 0.0 } else { params.xi(k) };
        *z *= Complex64::new(xi, 0.0);
    }
    ifft(&mut hat);
    GridFunction::new(params, hat).expect("same grid")
}

/// Residual of the Egorov relation
/// `(⟨x₀,D⟩ − ⟨ξ₀,x⟩) 𝒦u = 𝒦 (⟨y₀,D⟩ − ⟨η₀,x⟩) u` with
/// `(x₀, ξ₀) = R(y₀, η₀)`, in the grid max norm. Requires `n = 1` and a real
/// (metaplectic) resolvent; the identity kernel short-circuits to `𝒦 = id`.
pub fn egorov_residual(
    res: &Resolvent,
    ker: &GaussianKernel,
    u: &GridFunction,
    y0: f64,
    eta0: f64,
) -> Result<f64> {
    if res.dim() != 1 || ker.dim() != 1 {
        return Err(Error::Unsupported("Egorov residual is n = 1 only".into()));
    }
    if res.imag_norm() > 1e-9 * res.matrix().norm().max(1.0) {
        return Err(Error::Unsupported(
            "Egorov grid check needs a real-symplectic resolvent".into(),
        ));
    }
    let r = res.matrix();
    let x0 = r[(0, 0)].re * y0 + r[(0, 1)].re * eta0;
    let xi0 = r[(1, 0)].re * y0 + r[(1, 1)].re * eta0;

    let apply = |v: &GridFunction| -> Result<GridFunction> {
        if ker.identity {
            Ok(v.clone())
        } else {
            Ok(apply_kernel(ker, v)?.output)
        }
    };

    let field = |v: &GridFunction, a: f64, b: f64| -> GridFunction {
        // (a·D − b·x) v
        let dv = spectral_d(v);
        let params = v.params();
        let samples = (0..params.n)
            .map(|k| dv.samples()[k] * a - v.samples()[k] * b * params.x(k))
            .collect();
        GridFunction::new(params, samples).expect("same grid")
    };

    let lhs = field(&apply(u)?, x0, xi0);
    let rhs = apply(&field(u, y0, eta0))?;
    let diff = lhs
        .samples()
        .iter()
        .zip(rhs.samples())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok(diff)
}

/// First `count` Hermite functions `φ_k` (harmonic-oscillator eigenbasis,
/// `‖φ_k‖_{L²} = 1`) evaluated at `xs`, by the stable three-term recurrence.
pub fn hermite_functions(count: usize, xs: &[f64]) -> Vec<Vec<f64>> {
    let norm0 = std::f64::consts::PI.powf(-0.25);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(count);
    for (k, _) in (0..count).enumerate() {
        let row: Vec<f64> = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| match k {
                0 => norm0 * (-0.5 * x * x).exp(),
                1 => std::f64::consts::SQRT_2 * x * rows[0][i],
                _ => {
                    let kf = k as f64;
                    (2.0 / kf).sqrt() * x * rows[k - 1][i]
                        - ((kf - 1.0) / kf).sqrt() * rows[k - 2][i]
                }
            })
            .collect();
        rows.push(row);
    }
    rows
}

/// Closed-form right-hand side of Mehler's identity,
/// `Σ_k φ_k(x) φ_k(y) ω^k` for `|ω| < 1`.
pub fn mehler_sum_closed_form(x: f64, y: f64, omega: f64) -> f64 {
    let om2 = omega * omega;
    std::f64::consts::PI.powf(-0.5) * (1.0 - om2).powf(-0.5)
        * (-(1.0 + om2) / (2.0 * (1.0 - om2)) * (x * x + y * y)
            + 2.0 * omega / (1.0 - om2) * x * y)
            .exp()
}

/// The harmonic-oscillator heat kernel
/// `K_t(x,y) = (2π sinh 2t)^{−1/2} exp(−((x²+y²) cosh 2t − 2xy)/(2 sinh 2t))`,
/// equal to `e^{−t}` times the Mehler sum at `ω = e^{−2t}`.
pub fn oscillator_kernel_closed_form(t: f64, x: f64, y: f64) -> f64 {
    let s = (2.0 * t).sinh();
    let c = (2.0 * t).cosh();
    (2.0 * std::f64::consts::PI * s).powf(-0.5)
        * (-((x * x + y * y) * c - 2.0 * x * y) / (2.0 * s)).exp()
}

/// Max-norm difference between the truncated Hermite sum with weight
/// `ω = e^{−2t}` and the closed-form Mehler expression, over the tensor grid
/// `xs × xs`. Errors when the truncation cannot reach 1e-12.
pub fn hermite_mehler_check(t: f64, n_terms: usize, xs: &[f64]) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Range("Mehler identity check needs t > 0".into()));
    }
    let omega: f64 = (-2.0 * t).exp();
    if omega.powi(n_terms as i32) >= 1e-12 {
        return Err(Error::Range(format!(
            "ω^N = {:.2e} too large for the target tolerance; increase n_terms",
            omega.powi(n_terms as i32)
        )));
    }
    let phi = hermite_functions(n_terms, xs);
    let mut max_diff = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in xs.iter().enumerate() {
            let mut sum = 0.0;
            let mut w = 1.0;
            for row in &phi {
                sum += row[i] * row[j] * w;
                w *= omega;
            }
            max_diff = max_diff.max((sum - mehler_sum_closed_form(x, y, omega)).abs());
        }
    }
    Ok(max_diff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::builtin;
    use crate::grid::GridParams;
    use crate::resolvent::integrate_resolvent;
    use crate::symbol::{mehler_symbol, DEFAULT_TOL};
    use std::f64::consts::FRAC_PI_8;

    #[test]
    fn oscillator_kernel_matches_closed_form() {
        let fam = builtin("harmonic_oscillator", &Default::default(), 4.0).unwrap();
        for &t in &[0.3, 1.0] {
            let sym = mehler_symbol(&fam, 0.0, t, DEFAULT_TOL).unwrap();
            let ker = kernel_from_symbol(&sym).unwrap();
            assert!(!ker.distributional);
            let mut worst = 0.0f64;
            let mut x = -4.0;
            while x <= 4.0 {
                let mut y = -4.0;
                while y <= 4.0 {
                    let expected = oscillator_kernel_closed_form(t, x, y);
                    worst = worst.max((ker.eval(x, y) - expected).norm());
                    y += 0.5;
                }
                x += 0.5;
            }
            assert!(worst <= 1e-8, "t = {t}: kernel error {worst:.2e}");
        }
    }

    #[test]
    fn identity_symbol_gives_distributional_kernel() {
        let fam = builtin("harmonic_oscillator", &Default::default(), 4.0).unwrap();
        let sym = mehler_symbol(&fam, 0.5, 0.5, DEFAULT_TOL).unwrap();
        let ker = kernel_from_symbol(&sym).unwrap();
        assert!(ker.distributional);
        assert!(ker.identity);
        let u = GridFunction::gaussian(GridParams::symmetric(64, 8.0).unwrap(), 0.0, 1.0, 0.0)
            .unwrap();
        assert!(matches!(apply_kernel(&ker, &u), Err(Error::Distributional)));
    }

    #[test]
    fn oscillator_ground_state_decays_with_eigenvalue() {
        // e^{tq^w} φ₀ = e^{−t} φ₀ for q = −x² − ξ²
        let fam = builtin("harmonic_oscillator", &Default::default(), 4.0).unwrap();
        let t = 0.5;
        let sym = mehler_symbol(&fam, 0.0, t, DEFAULT_TOL).unwrap();
        let ker = kernel_from_symbol(&sym).unwrap();
        let params = GridParams::symmetric(1024, 12.0).unwrap();
        let u = GridFunction::gaussian(params, 0.0, 1.0, 0.0).unwrap();
        let out = apply_kernel(&ker, &u).unwrap();
        assert!(!out.decay_warning);
        let scale = (-t as f64).exp();
        let err = out
            .output
            .samples()
            .iter()
            .zip(u.samples())
            .map(|(a, b)| (a - b * scale).norm())
            .fold(0.0, f64::max);
        assert!(err <= 1e-6, "eigenfunction propagation error {err:.2e}");
        // contraction
        assert!(out.output.l2_norm() <= u.l2_norm() * (1.0 + 1e-6));
    }

    #[test]
    fn schrodinger_propagation_is_isometric() {
        let fam = builtin("harmonic_schrodinger", &Default::default(), 4.0).unwrap();
        let sym = mehler_symbol(&fam, 0.0, FRAC_PI_8, DEFAULT_TOL).unwrap();
        let ker = kernel_from_symbol(&sym).unwrap();
        let params = GridParams::symmetric(1024, 12.0).unwrap();
        let u = GridFunction::gaussian(params, 0.7, 1.1, 0.4).unwrap();
        let out = apply_kernel(&ker, &u).unwrap();
        assert!(
            (out.output.l2_norm() - u.l2_norm()).abs() <= 1e-6,
            "norm drift {:.2e}",
            (out.output.l2_norm() - u.l2_norm()).abs()
        );
    }

    #[test]
    fn kernel_symmetry_for_self_adjoint_generator() {
        let fam = builtin("harmonic_oscillator", &Default::default(), 4.0).unwrap();
        let sym = mehler_symbol(&fam, 0.0, 0.7, DEFAULT_TOL).unwrap();
        let ker = kernel_from_symbol(&sym).unwrap();
        let k = ker.exponent_matrix();
        assert!((k - k.transpose()).norm() < 1e-10);
        assert!((k[(0, 0)] - k[(1, 1)]).norm() < 1e-10, "K(x,y) = K(y,x)");
        // dissipative: Re ⟨Kz,z⟩ ≤ 0
        use rand::Rng;
        let mut rng = rand::thread_rng();
        for _ in 0..200 {
            let z = [rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)];
            assert!(ker.exponent(&z).re <= 1e-9);
        }
    }

    #[test]
    fn egorov_identity_trivial_and_rotation() {
        let fam = builtin("harmonic_schrodinger", &Default::default(), 4.0).unwrap();
        let params = GridParams::symmetric(1024, 12.0).unwrap();
        let u = GridFunction::gaussian(params, 0.0, 1.0, 0.0).unwrap();

        // R = I: the kernel is the identity; both sides coincide exactly
        let res = Resolvent::identity(1, 0.0);
        let sym = mehler_symbol(&fam, 0.0, 0.0, DEFAULT_TOL).unwrap();
        let ker = kernel_from_symbol(&sym).unwrap();
        let r0 = egorov_residual(&res, &ker, &u, 1.0, 0.0).unwrap();
        assert!(r0 < 1e-10, "identity Egorov residual {r0:.2e}");

        // rotation by 2t at t = π/8
        let res = integrate_resolvent(&fam, 0.0, FRAC_PI_8, DEFAULT_TOL).unwrap();
        let sym = mehler_symbol(&fam, 0.0, FRAC_PI_8, DEFAULT_TOL).unwrap();
        let ker = kernel_from_symbol(&sym).unwrap();
        let r1 = egorov_residual(&res, &ker, &u, 1.0, 0.0).unwrap();
        assert!(r1 <= 1e-5, "rotation Egorov residual {r1:.2e}");

        // linearity in (y₀, η₀)
        let r2 = egorov_residual(&res, &ker, &u, 2.0, 0.0).unwrap();
        assert!((r2 - 2.0 * r1).abs() <= 1e-5);
    }

    #[test]
    fn hermite_mehler_identity() {
        let xs: Vec<f64> = (0..=80).map(|k| -4.0 + 0.1 * k as f64).collect();
        let diff = hermite_mehler_check(1.0, 40, &xs).unwrap();
        assert!(diff <= 1e-9, "Hermite–Mehler difference {diff:.2e}");

        // large t: single-term dominance, difference ~ ω
        let omega: f64 = (-2.0f64 * 8.0).exp();
        let diff = hermite_mehler_check(8.0, 4, &xs).unwrap();
        assert!(diff <= 10.0 * omega);

        // closed form symmetric under (x, y) swap
        assert_eq!(
            mehler_sum_closed_form(0.3, -1.2, 0.5),
            mehler_sum_closed_form(-1.2, 0.3, 0.5)
        );

        // insufficient terms rejected
        assert!(hermite_mehler_check(0.1, 4, &xs).is_err());
    }

    #[test]
    fn mehler_sum_equals_heat_kernel_scaled() {
        let t = 0.7f64;
        let omega = (-2.0 * t).exp();
        for &(x, y) in &[(0.0, 0.0), (1.0, -0.5), (2.0, 2.0)] {
            let lhs = oscillator_kernel_closed_form(t, x, y);
            let rhs = (-t).exp() * mehler_sum_closed_form(x, y, omega);
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn semigroup_property_on_gaussian_input() {
        let fam = builtin("harmonic_oscillator", &Default::default(), 4.0).unwrap();
        let params = GridParams::symmetric(1024, 12.0).unwrap();
        let u = GridFunction::gaussian(params, 0.4, 0.9, 0.0).unwrap();
        let ker = |t: f64| {
            kernel_from_symbol(&mehler_symbol(&fam, 0.0, t, DEFAULT_TOL).unwrap()).unwrap()
        };
        let one = apply_kernel(&ker(0.7), &u).unwrap().output;
        let two_step = apply_kernel(&ker(0.3), &apply_kernel(&ker(0.4), &u).unwrap().output)
            .unwrap()
            .output;
        let diff: f64 = one
            .samples()
            .iter()
            .zip(two_step.samples())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
            * params.dx.sqrt();
        assert!(diff <= 1e-6, "semigroup defect {diff:.2e}");
    }

    #[test]
    fn adjoint_kernels_in_metaplectic_case() {
        // kernel from R(0, t) is the grid adjoint of the kernel from R(t, 0)
        let fam = builtin("harmonic_schrodinger", &Default::default(), 4.0).unwrap();
        let t = FRAC_PI_8;
        let fwd = kernel_from_symbol(&mehler_symbol(&fam, 0.0, t, DEFAULT_TOL).unwrap()).unwrap();
        let bwd = kernel_from_symbol(&mehler_symbol(&fam, t, 0.0, DEFAULT_TOL).unwrap()).unwrap();
        let params = GridParams::symmetric(512, 12.0).unwrap();
        let u = GridFunction::gaussian(params, 0.5, 1.0, 0.0).unwrap();
        let v = GridFunction::gaussian(params, -0.3, 0.8, 0.7).unwrap();
        let ku = apply_kernel(&fwd, &u).unwrap().output;
        let kv = apply_kernel(&bwd, &v).unwrap().output;
        let dot = |a: &GridFunction, b: &GridFunction| -> Complex64 {
            a.samples()
                .iter()
                .zip(b.samples())
                .map(|(p, q)| p.conj() * q)
                .sum::<Complex64>()
                * params.dx
        };
        // ⟨𝒦u, v⟩ = ⟨u, 𝒦*v⟩ with 𝒦* the inverse rotation kernel
        let lhs = dot(&ku, &v);
        let rhs = dot(&u, &kv);
        assert!((lhs - rhs).norm() <= 1e-6, "adjoint defect {:.2e}", (lhs - rhs).norm());
    }
}
