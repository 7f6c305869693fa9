//! The generalized Mehler symbol of the evolution operator.
//!
//! For a non-degenerate interval the Weyl symbol of `𝒰(t, τ)` is
//! `p(X) = c · exp(⟨G X, X⟩)` with
//!
//! ```text
//! c = exp(h(t,τ)) = 2ⁿ det(R + I)^{−1/2}   (branch continuous from c = 1)
//! ⟨G X, X⟩ = σ(X, S X),   S = −i (R − I)(R + I)⁻¹,   G = −σ_mat S
//! ```
//!
//! `S` is the Hamilton map of the exponent and solves a matrix Riccati
//! equation in each time variable; the Moyal product of a quadratic symbol
//! with the Gaussian symbol terminates at second order, which gives exact
//! transport equations used here as residual checks.

use num_complex::Complex64;

use crate::family::HamiltonianFamily;
use crate::linalg::{left_divide, matrix_cos_sin, matrix_tan, right_divide};
use crate::resolvent::{integrate_resolvent, Resolvent, ResolventError, DEGENERACY_MARGIN};
use crate::symplectic::{sigma_matrix, HamiltonMap, QuadraticForm};
use crate::{CMat, Error, RVec, Result};

/// Default relative tolerance for the resolvent integrations behind symbols.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Default finite-difference step for the residual probes.
pub fn default_fd_step(tau: f64, t: f64) -> f64 {
    1e-4 * (t - tau).abs().max(1.0)
}

/// The Riccati matrix `S(t, τ)`, a Hamilton map with `Re σ(X, SX) ≤ 0` for
/// dissipative forward evolution.
#[derive(Debug, Clone)]
pub struct RiccatiMatrix {
    s: CMat,
}

impl RiccatiMatrix {
    pub fn matrix(&self) -> &CMat {
        &self.s
    }

    /// `‖σS − (σS)ᵀ‖`: zero iff `S` is a Hamilton map.
    pub fn hamilton_residual(&self) -> f64 {
        let n = self.s.nrows() / 2;
        let ss = sigma_matrix(n) * &self.s;
        (&ss - ss.transpose()).norm()
    }
}

/// `S = −i (R − I)(R + I)⁻¹` by linear solve.
pub fn riccati_matrix(res: &Resolvent) -> Result<RiccatiMatrix> {
    if res.det_margin() < DEGENERACY_MARGIN {
        return Err(Error::Degenerate { lo: res.t, hi: res.t });
    }
    let dim = 2 * res.dim();
    let id = CMat::identity(dim, dim);
    let m = right_divide(&(res.matrix() - &id), &(res.matrix() + &id))?;
    Ok(RiccatiMatrix {
        s: m * Complex64::new(0.0, -1.0),
    })
}

/// `‖(R−I)(R+I)⁻¹ − (R+I)⁻¹(R−I)‖`: the left- and right-sided Riccati forms
/// agree wherever defined.
pub fn riccati_two_sided_residual(res: &Resolvent) -> Result<f64> {
    let dim = 2 * res.dim();
    let id = CMat::identity(dim, dim);
    let right = right_divide(&(res.matrix() - &id), &(res.matrix() + &id))?;
    let left = left_divide(&(res.matrix() + &id), &(res.matrix() - &id))?;
    Ok((right - left).norm())
}

/// The Weyl symbol `c · exp(⟨G X, X⟩)` of the evolution operator on `[τ, t]`.
///
/// When a `det(R+I)` crossing interrupts the interval the symbol is returned
/// with `valid = false`: `crossing` brackets the degeneracy, and the stored
/// `prefactor`/`G` describe the symbol at `halted_at` (the last time before
/// the crossing), not at `t`. At the crossing itself the symbol leaves
/// `L^∞` and degenerates to a Dirac mass; it is reported only as a flag,
/// never as numeric data.
#[derive(Debug, Clone)]
pub struct MehlerSymbol {
    n: usize,
    pub tau: f64,
    pub t: f64,
    pub prefactor: Complex64,
    g: CMat,
    pub valid: bool,
    /// `|det(R+I)|·2^{−2n}` at the time the data refers to.
    pub det_margin: f64,
    pub crossing: Option<(f64, f64)>,
    pub halted_at: Option<f64>,
}

impl MehlerSymbol {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// The symmetric exponent matrix `G`.
    pub fn exponent_matrix(&self) -> &CMat {
        &self.g
    }

    /// Recovers the Riccati matrix `S = σ_mat G`.
    pub fn riccati(&self) -> CMat {
        sigma_matrix(self.n) * &self.g
    }

    /// `⟨G X, X⟩` for real `X`.
    pub fn exponent(&self, x: &RVec) -> Complex64 {
        let xc = x.map(|v| Complex64::new(v, 0.0));
        (&self.g * &xc).dot(&xc)
    }

    /// `c · exp(⟨G X, X⟩)` for real `X`.
    pub fn eval(&self, x: &RVec) -> Complex64 {
        self.prefactor * self.exponent(x).exp()
    }
}

/// Builds the Mehler symbol of `𝒰(t, τ)` for the family.
pub fn mehler_symbol(
    family: &HamiltonianFamily,
    tau: f64,
    t: f64,
    rel_tol: f64,
) -> Result<MehlerSymbol> {
    match integrate_resolvent(family, tau, t, rel_tol) {
        Ok(res) => Ok(symbol_from_resolvent(&res, true, None, None)),
        Err(ResolventError::Degenerate(d)) => Ok(symbol_from_resolvent(
            &d.partial,
            false,
            Some((d.lo, d.hi)),
            Some((tau, t)),
        )),
        Err(e) => Err(e.into()),
    }
}

fn symbol_from_resolvent(
    res: &Resolvent,
    valid: bool,
    crossing: Option<(f64, f64)>,
    requested: Option<(f64, f64)>,
) -> MehlerSymbol {
    let s = riccati_matrix(res)
        .map(|r| r.s)
        .unwrap_or_else(|_| CMat::zeros(2 * res.dim(), 2 * res.dim()));
    let g = -(sigma_matrix(res.dim()) * s);
    let (tau, t) = requested.unwrap_or((res.tau, res.t));
    MehlerSymbol {
        n: res.dim(),
        tau,
        t,
        prefactor: res.log_prefactor().exp(),
        g,
        valid,
        det_margin: res.det_margin(),
        crossing,
        halted_at: if valid { None } else { Some(res.t) },
    }
}

/// Which side of the Moyal product the quadratic factor sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoyalSide {
    Left,
    Right,
}

/// The exact second-order Moyal expansion of a quadratic symbol against the
/// Gaussian symbol, expressed as the induced time derivative of `(G, h)`:
/// `Left` gives `(∂_t G, ∂_t h)` of the forward transport equation
/// `d/dt p = q_t #ʷ p`, `Right` gives `(∂_τ G, ∂_τ h)` of
/// `d/dτ p = −p #ʷ q_τ`.
#[derive(Debug, Clone)]
pub struct MoyalDerivative {
    pub quadratic: CMat,
    pub scalar: Complex64,
}

/// The Moyal product `q #ʷ p` (left) or `p #ʷ q` (right) of a quadratic form
/// with the Gaussian symbol `p = c·exp(⟨G·,·⟩)`; the expansion terminates at
/// second order because `q` is quadratic.
pub fn moyal_quadratic_gaussian(
    q: &QuadraticForm,
    sym: &MehlerSymbol,
    side: MoyalSide,
) -> Result<MoyalDerivative> {
    if q.dim() != sym.dim() {
        return Err(Error::Dimension(format!(
            "quadratic form n = {}, symbol n = {}",
            q.dim(),
            sym.dim()
        )));
    }
    let sigma = sigma_matrix(sym.dim());
    let g = sym.exponent_matrix();
    let qm = q.matrix();
    let g_sigma_q = g * &sigma * qm;
    let q_sigma_g = qm * &sigma * g;
    let commutator = (&g_sigma_q - &q_sigma_g).map(|z| z * Complex64::i());
    let second = &g_sigma_q * &sigma * g;
    let scalar = (&sigma * g * &sigma * qm).trace() * Complex64::new(0.5, 0.0);
    match side {
        MoyalSide::Left => Ok(MoyalDerivative {
            quadratic: qm - commutator + second,
            scalar,
        }),
        MoyalSide::Right => Ok(MoyalDerivative {
            quadratic: -qm - commutator - second,
            scalar: -scalar,
        }),
    }
}

/// Max residuals of the transport equations `d/dt p = q_t #ʷ p` and
/// `d/dτ p = −p #ʷ q_τ`, probing `(G, h)` with central finite differences.
pub fn transport_residual(
    family: &HamiltonianFamily,
    tau: f64,
    t: f64,
    h_fd: f64,
    rel_tol: f64,
) -> Result<(f64, f64)> {
    let base = mehler_symbol(family, tau, t, rel_tol)?;
    if !base.valid {
        return Err(Error::Degenerate {
            lo: base.crossing.map(|c| c.0).unwrap_or(t),
            hi: base.crossing.map(|c| c.1).unwrap_or(t),
        });
    }

    // forward: vary t
    let (gp, hp) = symbol_data(family, tau, t + h_fd, rel_tol)?;
    let (gm, hm) = symbol_data(family, tau, t - h_fd, rel_tol)?;
    let g_dot = (gp - gm).map(|z| z / (2.0 * h_fd));
    let h_dot = (hp - hm) / (2.0 * h_fd);
    let fwd_rhs = moyal_quadratic_gaussian(&family.sample(t)?, &base, MoyalSide::Left)?;
    let fwd = (g_dot - &fwd_rhs.quadratic)
        .norm()
        .max((h_dot - fwd_rhs.scalar).norm());

    // backward: vary τ
    let (gp, hp) = symbol_data(family, tau + h_fd, t, rel_tol)?;
    let (gm, hm) = symbol_data(family, tau - h_fd, t, rel_tol)?;
    let g_dot = (gp - gm).map(|z| z / (2.0 * h_fd));
    let h_dot = (hp - hm) / (2.0 * h_fd);
    let bwd_rhs = moyal_quadratic_gaussian(&family.sample(tau)?, &base, MoyalSide::Right)?;
    let bwd = (g_dot - &bwd_rhs.quadratic)
        .norm()
        .max((h_dot - bwd_rhs.scalar).norm());

    Ok((fwd, bwd))
}

fn symbol_data(
    family: &HamiltonianFamily,
    tau: f64,
    t: f64,
    rel_tol: f64,
) -> Result<(CMat, Complex64)> {
    let res = integrate_resolvent(family, tau, t, rel_tol).map_err(Error::from)?;
    let s = riccati_matrix(&res)?;
    let g = -(sigma_matrix(res.dim()) * s.matrix());
    Ok((g, res.log_prefactor()))
}

/// Residuals of the matrix Riccati equations in `t` and in `τ`:
/// `∂_t S = F_t − i(S F_t − F_t S) + S F_t S` and
/// `∂_τ S = −F_τ − i(S F_τ − F_τ S) − S F_τ S`, with central differences.
pub fn riccati_residual(
    family: &HamiltonianFamily,
    tau: f64,
    t: f64,
    h_fd: f64,
    rel_tol: f64,
) -> Result<(f64, f64)> {
    let s_at = |tau_i: f64, t_i: f64| -> Result<CMat> {
        let res = integrate_resolvent(family, tau_i, t_i, rel_tol).map_err(Error::from)?;
        Ok(riccati_matrix(&res)?.s)
    };
    let s = s_at(tau, t)?;

    let ds_dt = (s_at(tau, t + h_fd)? - s_at(tau, t - h_fd)?).map(|z| z / (2.0 * h_fd));
    let f_t = family.sample(t)?.hamilton_map().matrix().clone();
    let rhs_t = &f_t - ((&s * &f_t) - (&f_t * &s)).map(|z| z * Complex64::i()) + &s * &f_t * &s;
    let res_t = (ds_dt - rhs_t).norm();

    let ds_dtau = (s_at(tau + h_fd, t)? - s_at(tau - h_fd, t)?).map(|z| z / (2.0 * h_fd));
    let f_tau = family.sample(tau)?.hamilton_map().matrix().clone();
    let rhs_tau =
        -(&f_tau) - ((&s * &f_tau) - (&f_tau * &s)).map(|z| z * Complex64::i()) - &s * &f_tau * &s;
    let res_tau = (ds_dtau - rhs_tau).norm();

    Ok((res_t, res_tau))
}

/// Checks the autonomous reduction `S = tan(tF)` and
/// `2^{−2n} det(R+I) = det(cos tF)` against matrix functions computed by
/// Taylor series with argument doubling.
pub fn autonomous_reduction_check(f: &HamiltonMap, t: f64, rel_tol: f64) -> Result<(f64, f64)> {
    if t < 0.0 {
        return Err(Error::Range("autonomous reduction check needs t ≥ 0".into()));
    }
    let n = f.dim();
    let tf = f.matrix().map(|z| z * t);
    let (cos_tf, _) = matrix_cos_sin(&tf);
    let det_cos = cos_tf.clone().lu().determinant();
    if det_cos.norm() < 1e-12 {
        return Err(Error::Unsupported(format!(
            "det(cos tF) = {det_cos} too close to a branch point"
        )));
    }
    let tan_tf = matrix_tan(&tf)?;

    let family = HamiltonianFamily::constant(
        f.quadratic_form().matrix().clone(),
        t.max(1e-6) * (1.0 + 1e-9),
        "autonomous-check",
    )?;
    let res = integrate_resolvent(&family, 0.0, t, rel_tol).map_err(Error::from)?;
    let s = riccati_matrix(&res)?;
    let residual_s = (s.matrix() - &tan_tf).norm();

    let dim = 2 * n;
    let det_rpi = (res.matrix() + CMat::identity(dim, dim)).lu().determinant();
    let residual_det = (det_rpi / 4f64.powi(n as i32) - det_cos).norm();
    Ok((residual_s, residual_det))
}

/// Branch diagnostics for the prefactor.
#[derive(Debug, Clone, Copy)]
pub struct BranchCheck {
    /// `|exp(h) − 2ⁿ det(R+I)^{−1/2}|` with the principal square root; only
    /// meaningful near the identity (`det_margin > 0.5`), `None` otherwise.
    pub principal: Option<f64>,
    /// Max over sampled times in `[τ, t]` of `|exp(2h)·2^{−2n}·det(R+I) − 1|`.
    pub identity_max: f64,
}

/// Verifies that the integrated prefactor agrees with the principal branch
/// of `2ⁿ det(R+I)^{−1/2}` near the identity and satisfies the global branch
/// identity along the whole interval.
pub fn prefactor_branch_check(
    family: &HamiltonianFamily,
    tau: f64,
    t: f64,
    rel_tol: f64,
) -> Result<BranchCheck> {
    let samples = 8;
    let mut identity_max: f64 = 0.0;
    let mut principal = None;
    for k in 1..=samples {
        let tk = tau + (t - tau) * k as f64 / samples as f64;
        let res = integrate_resolvent(family, tau, tk, rel_tol).map_err(Error::from)?;
        let dim = 2 * res.dim();
        let det_rpi = (res.matrix() + CMat::identity(dim, dim)).lu().determinant();
        let scaled = det_rpi / 4f64.powi(res.dim() as i32);
        let h = res.log_prefactor();
        identity_max = identity_max.max(((2.0 * h).exp() * scaled - 1.0).norm());
        if k == samples && res.det_margin() > 0.5 {
            let c_principal = scaled.sqrt().inv();
            principal = Some((h.exp() - c_principal).norm());
        }
    }
    Ok(BranchCheck {
        principal,
        identity_max,
    })
}
