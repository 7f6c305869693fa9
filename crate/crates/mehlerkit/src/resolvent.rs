//! Adaptive integration of the resolvent system
//!
//! ```text
//! dR/dt = 2i F_t R,   R(τ, τ) = I
//! dh/dt = ½ Tr(S(t,τ) F_t),   h(τ, τ) = 0,   S = −i (R − I)(R + I)⁻¹
//! ```
//!
//! `R` and the log-prefactor `h` are integrated jointly with an embedded
//! Dormand–Prince 5(4) pair under PI step control, so the branch of the
//! prefactor `exp(h)` is continuous in `t` by construction. Integration
//! halts with a flagged crossing when `|det(R + I)|·2^{−2n}` falls below
//! [`DEGENERACY_MARGIN`]; the crossing time is then bracketed by bisection
//! using `R`-only integrations, which stay smooth through the crossing.
//!
//! Both time orders are allowed; backward runs use the same equations with
//! negative steps.

use num_complex::Complex64;
use rand::Rng;

use crate::family::HamiltonianFamily;
use crate::linalg::right_divide;
use crate::symplectic::{sigma_matrix, symplectic_form_raw};
use crate::{CMat, CVec, Error, Result};

/// Margin `|det(R+I)|·2^{−2n}` below which the symbol is declared degenerate.
pub const DEGENERACY_MARGIN: f64 = 1e-10;

/// Width of the reported crossing bracket after bisection.
const BRACKET_WIDTH: f64 = 1e-6;

const MIN_STEP: f64 = 1e-12;
const MAX_STEPS: usize = 500_000;
const MAX_CONSECUTIVE_REJECTS: usize = 200;

/// Integration statistics carried by every [`Resolvent`].
#[derive(Debug, Clone, Copy, Default)]
pub struct IntegrationStats {
    pub steps: usize,
    pub rejected: usize,
    /// Accumulated local error estimates in units of the tolerance.
    pub est_error: f64,
}

/// The resolvent `R(t, τ)` with the jointly integrated log-prefactor `h(t, τ)`.
#[derive(Debug, Clone)]
pub struct Resolvent {
    n: usize,
    pub tau: f64,
    pub t: f64,
    r: CMat,
    h: Complex64,
    pub stats: IntegrationStats,
}

impl Resolvent {
    /// The identity resolvent at `t = τ`.
    pub fn identity(n: usize, tau: f64) -> Self {
        Self {
            n,
            tau,
            t: tau,
            r: CMat::identity(2 * n, 2 * n),
            h: Complex64::new(0.0, 0.0),
            stats: IntegrationStats::default(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMat {
        &self.r
    }

    /// The log-prefactor `h(t, τ)` with `exp(h) = 2ⁿ det(R+I)^{−1/2}`,
    /// branch continuous from `h = 0` at `t = τ`.
    pub fn log_prefactor(&self) -> Complex64 {
        self.h
    }

    /// `|det(R + I)| · 2^{−2n}`, the distance to the Mehler degeneracy.
    pub fn det_margin(&self) -> f64 {
        let dim = 2 * self.n;
        let det = (&self.r + CMat::identity(dim, dim)).lu().determinant();
        det.norm() / 4f64.powi(self.n as i32)
    }

    /// `‖Rᵀ σ R − σ‖` (Lemma-level symplecticity, absolute residual).
    pub fn symplecticity_residual(&self) -> f64 {
        let sigma = sigma_matrix(self.n);
        (self.r.transpose() * &sigma * &self.r - &sigma).norm()
    }

    /// `|det R − 1|`.
    pub fn det_residual(&self) -> f64 {
        (self.r.clone().lu().determinant() - Complex64::new(1.0, 0.0)).norm()
    }

    /// `‖Im R‖` — zero for metaplectic (purely imaginary) families.
    pub fn imag_norm(&self) -> f64 {
        self.r.map(|z| z.im).norm()
    }

    /// Minimum over random unit `X ∈ ℂ^{2n}` of
    /// `i(σ(conj(R X), R X) − σ(conj X, X))`; non-negative (up to rounding)
    /// for dissipative families and `t ≥ τ`.
    pub fn nonnegativity_min(&self, samples: usize, rng: &mut impl Rng) -> f64 {
        let dim = 2 * self.n;
        let mut min = f64::INFINITY;
        for _ in 0..samples {
            let mut x = CVec::from_fn(dim, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let norm = x.norm();
            if norm == 0.0 {
                continue;
            }
            x /= Complex64::new(norm, 0.0);
            let rx = &self.r * &x;
            let val = Complex64::i()
                * (symplectic_form_raw(&rx.map(|z| z.conj()), &rx)
                    - symplectic_form_raw(&x.map(|z| z.conj()), &x));
            min = min.min(val.re);
        }
        min
    }
}

/// A detected `det(R+I)` crossing: the integration halted at `partial.t` and
/// the threshold crossing lies in `[lo, hi]`.
#[derive(Debug)]
pub struct Degeneracy {
    pub partial: Resolvent,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug)]
pub enum ResolventError {
    Degenerate(Box<Degeneracy>),
    Budget { t: f64 },
    Other(Error),
}

impl From<ResolventError> for Error {
    fn from(e: ResolventError) -> Self {
        match e {
            ResolventError::Degenerate(d) => Error::Degenerate { lo: d.lo, hi: d.hi },
            ResolventError::Budget { t } => Error::StepBudget(t),
            ResolventError::Other(e) => e,
        }
    }
}

impl From<Error> for ResolventError {
    fn from(e: Error) -> Self {
        ResolventError::Other(e)
    }
}

impl std::fmt::Display for ResolventError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ResolventError::Degenerate(d) => {
                write!(f, "det(R+I) degeneracy crossing in [{}, {}]", d.lo, d.hi)
            }
            ResolventError::Budget { t } => write!(f, "step budget exhausted near t = {t}"),
            ResolventError::Other(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for ResolventError {}

/// Integrates the joint `(R, h)` system from `τ` to `t` at relative
/// tolerance `rel_tol`.
pub fn integrate_resolvent(
    family: &HamiltonianFamily,
    tau: f64,
    t: f64,
    rel_tol: f64,
) -> std::result::Result<Resolvent, ResolventError> {
    let horizon = family.horizon();
    for (name, v) in [("tau", tau), ("t", t)] {
        if v < -1e-12 || v > horizon + 1e-12 {
            return Err(ResolventError::Other(Error::Range(format!(
                "{name} = {v} outside [0, {horizon}]"
            ))));
        }
    }
    let n = family.dim();
    if t == tau {
        return Ok(Resolvent::identity(n, tau));
    }

    let dim = 2 * n;
    let y0 = pack(&CMat::identity(dim, dim), Complex64::new(0.0, 0.0));
    let rhs = |s: f64, y: &CVec| joint_rhs(family, s, y, dim);
    match drive(&rhs, tau, t, y0, rel_tol, Some(dim))? {
        Driven::Completed { y, stats } => {
            let (r, h) = unpack(&y, dim);
            Ok(Resolvent { n, tau, t, r, h, stats })
        }
        Driven::MarginHalt { t_ok, y_ok, t_bad, stats } => {
            let (r, h) = unpack(&y_ok, dim);
            let partial = Resolvent { n, tau, t: t_ok, r, h, stats };
            let (lo, hi) = bisect_crossing(family, &partial, t_bad, rel_tol)?;
            Err(ResolventError::Degenerate(Box::new(Degeneracy { partial, lo, hi })))
        }
    }
}

/// Integrates `R` alone (no log-prefactor). `R` stays smooth through Mehler
/// degeneracies, so this never halts on the margin; used for singular-space
/// sampling and crossing bisection.
pub fn integrate_r_only(
    family: &HamiltonianFamily,
    tau: f64,
    t: f64,
    rel_tol: f64,
) -> std::result::Result<Resolvent, ResolventError> {
    let n = family.dim();
    if t == tau {
        return Ok(Resolvent::identity(n, tau));
    }
    let dim = 2 * n;
    let y0 = pack_r(&CMat::identity(dim, dim));
    let rhs = |s: f64, y: &CVec| r_only_rhs(family, s, y, dim);
    match drive(&rhs, tau, t, y0, rel_tol, None)? {
        Driven::Completed { y, stats } => {
            let r = unpack_r(&y, dim);
            Ok(Resolvent {
                n,
                tau,
                t,
                r,
                h: Complex64::new(f64::NAN, f64::NAN),
                stats,
            })
        }
        Driven::MarginHalt { .. } => unreachable!("no margin monitor installed"),
    }
}

/// `‖R(t,r)·R(r,τ) − R(t,τ)‖` (evolution-system composition).
pub fn compose_check(
    family: &HamiltonianFamily,
    tau: f64,
    r: f64,
    t: f64,
    rel_tol: f64,
) -> Result<f64> {
    let a = integrate_resolvent(family, r, t, rel_tol)?;
    let b = integrate_resolvent(family, tau, r, rel_tol)?;
    let c = integrate_resolvent(family, tau, t, rel_tol)?;
    Ok((a.matrix() * b.matrix() - c.matrix()).norm())
}

/// Max entry residual of `∂_τ R(t,τ) + 2i R(t,τ) F_τ = 0` with a central
/// finite difference in `τ`.
pub fn adjoint_relation_check(
    family: &HamiltonianFamily,
    tau: f64,
    t: f64,
    h_fd: f64,
    rel_tol: f64,
) -> Result<f64> {
    let plus = integrate_resolvent(family, tau + h_fd, t, rel_tol)?;
    let minus = integrate_resolvent(family, tau - h_fd, t, rel_tol)?;
    let d_tau = (plus.matrix() - minus.matrix()).map(|z| z / (2.0 * h_fd));
    let base = integrate_resolvent(family, tau, t, rel_tol)?;
    let f_tau = family.sample(tau)?.hamilton_map();
    let expected = base.matrix() * f_tau.matrix() * Complex64::new(0.0, -2.0);
    let diff = d_tau - expected;
    Ok(diff.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// `‖R(t,τ)·R(τ,t) − I‖`.
pub fn inverse_check(
    family: &HamiltonianFamily,
    tau: f64,
    t: f64,
    rel_tol: f64,
) -> Result<f64> {
    let fwd = integrate_resolvent(family, tau, t, rel_tol)?;
    let bwd = integrate_resolvent(family, t, tau, rel_tol)?;
    let dim = 2 * family.dim();
    Ok((fwd.matrix() * bwd.matrix() - CMat::identity(dim, dim)).norm())
}

// --- joint/R-only right-hand sides over a flat complex state -------------

fn pack(r: &CMat, h: Complex64) -> CVec {
    let dim = r.nrows();
    let mut y = CVec::zeros(dim * dim + 1);
    for (k, v) in r.iter().enumerate() {
        y[k] = *v;
    }
    y[dim * dim] = h;
    y
}

fn unpack(y: &CVec, dim: usize) -> (CMat, Complex64) {
    let r = CMat::from_iterator(dim, dim, y.iter().take(dim * dim).copied());
    (r, y[dim * dim])
}

fn pack_r(r: &CMat) -> CVec {
    let dim = r.nrows();
    CVec::from_iterator(dim * dim, r.iter().copied())
}

fn unpack_r(y: &CVec, dim: usize) -> CMat {
    CMat::from_iterator(dim, dim, y.iter().copied())
}

fn joint_rhs(family: &HamiltonianFamily, s: f64, y: &CVec, dim: usize) -> Result<CVec> {
    let (r, _) = unpack(y, dim);
    let f = family.sample_unchecked(s).hamilton_map();
    let dr = (f.matrix() * &r).map(|z| z * Complex64::new(0.0, 2.0));
    let id = CMat::identity(dim, dim);
    // S = −i (R − I)(R + I)⁻¹ ; dh = ½ Tr(S F_t)
    let m = right_divide(&(&r - &id), &(&r + &id))?;
    let dh = (m * f.matrix()).trace() * Complex64::new(0.0, -0.5);
    let mut dy = CVec::zeros(dim * dim + 1);
    for (k, v) in dr.iter().enumerate() {
        dy[k] = *v;
    }
    dy[dim * dim] = dh;
    Ok(dy)
}

fn r_only_rhs(family: &HamiltonianFamily, s: f64, y: &CVec, dim: usize) -> Result<CVec> {
    let r = unpack_r(y, dim);
    let f = family.sample_unchecked(s).hamilton_map();
    let dr = (f.matrix() * &r).map(|z| z * Complex64::new(0.0, 2.0));
    Ok(pack_r(&dr))
}

fn margin_of(y: &CVec, dim: usize) -> f64 {
    let (r, _) = unpack(y, dim);
    let det = (r + CMat::identity(dim, dim)).lu().determinant();
    det.norm() / 2f64.powi(dim as i32)
}

// --- Dormand–Prince 5(4) driver -------------------------------------------

enum Driven {
    Completed { y: CVec, stats: IntegrationStats },
    MarginHalt { t_ok: f64, y_ok: CVec, t_bad: f64, stats: IntegrationStats },
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// 5th-order weights equal the last A row (FSAL); embedded 4th-order weights:
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn drive(
    rhs: &dyn Fn(f64, &CVec) -> Result<CVec>,
    t0: f64,
    t1: f64,
    y0: CVec,
    rel_tol: f64,
    margin_dim: Option<usize>,
) -> std::result::Result<Driven, ResolventError> {
    let span = t1 - t0;
    let sign = span.signum();
    let len = y0.len();
    let mut t = t0;
    let mut y = y0;
    let mut stats = IntegrationStats::default();
    let rtol = rel_tol.max(1e-14);
    let atol = rtol * 1e-2;

    let mut k1 = rhs(t, &y).map_err(ResolventError::Other)?;
    let mut dt = initial_step(&y, &k1, rtol, span.abs()) * sign;
    let mut err_old: f64 = 1e-4;
    let mut rejects_in_a_row = 0usize;

    while sign * (t1 - t) > 0.0 {
        if stats.steps + stats.rejected > MAX_STEPS {
            return Err(ResolventError::Budget { t });
        }
        if sign * (t + dt - t1) > 0.0 {
            dt = t1 - t;
        }
        if dt.abs() < MIN_STEP {
            return Err(ResolventError::Budget { t });
        }

        let mut ks: Vec<CVec> = Vec::with_capacity(7);
        ks.push(k1.clone());
        let mut stage_failed = false;
        for i in 1..7 {
            let mut yi = y.clone();
            for (j, kj) in ks.iter().enumerate() {
                let a = A[i][j];
                if a != 0.0 {
                    yi.axpy(Complex64::new(dt * a, 0.0), kj, Complex64::new(1.0, 0.0));
                }
            }
            match rhs(t + C[i] * dt, &yi) {
                Ok(k) => ks.push(k),
                Err(_) => {
                    stage_failed = true;
                    break;
                }
            }
        }
        if stage_failed {
            // a stage hit a singular solve; treat like an error rejection
            stats.rejected += 1;
            rejects_in_a_row += 1;
            if rejects_in_a_row > MAX_CONSECUTIVE_REJECTS {
                return Err(ResolventError::Budget { t });
            }
            dt *= 0.5;
            continue;
        }

        // y5 is the last stage state (A row 7 == b row), recompute cheaply:
        let mut y5 = y.clone();
        for (j, kj) in ks.iter().enumerate().take(6) {
            let a = A[6][j];
            if a != 0.0 {
                y5.axpy(Complex64::new(dt * a, 0.0), kj, Complex64::new(1.0, 0.0));
            }
        }
        let mut y4 = y.clone();
        for (j, kj) in ks.iter().enumerate() {
            if B4[j] != 0.0 {
                y4.axpy(Complex64::new(dt * B4[j], 0.0), kj, Complex64::new(1.0, 0.0));
            }
        }

        let mut err_sq = 0.0;
        for i in 0..len {
            let sc = atol + rtol * y[i].norm().max(y5[i].norm());
            let e = (y5[i] - y4[i]).norm() / sc;
            err_sq += e * e;
        }
        let err = (err_sq / len as f64).sqrt().max(1e-16);

        if err <= 1.0 {
            // margin monitor: reject candidates that land past a degeneracy
            if let Some(dim) = margin_dim {
                if margin_of(&y5, dim) < DEGENERACY_MARGIN {
                    return Ok(Driven::MarginHalt {
                        t_ok: t,
                        y_ok: y,
                        t_bad: t + dt,
                        stats,
                    });
                }
            }
            stats.steps += 1;
            stats.est_error += err;
            rejects_in_a_row = 0;
            t += dt;
            let k7 = match rhs(t, &y5) {
                Ok(k) => k,
                Err(e) => {
                    if sign * (t1 - t) <= 0.0 {
                        // reached the endpoint; FSAL stage no longer needed
                        return Ok(Driven::Completed { y: y5, stats });
                    }
                    return Err(ResolventError::Other(e));
                }
            };
            y = y5;
            k1 = k7;
            let fac = (0.9 * err.powf(-0.17) * err_old.powf(0.04)).clamp(0.2, 5.0);
            err_old = err;
            dt *= fac;
        } else {
            stats.rejected += 1;
            rejects_in_a_row += 1;
            if rejects_in_a_row > MAX_CONSECUTIVE_REJECTS {
                return Err(ResolventError::Budget { t });
            }
            let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            dt *= fac;
        }
    }
    Ok(Driven::Completed { y, stats })
}

fn initial_step(y: &CVec, f0: &CVec, rtol: f64, span: f64) -> f64 {
    let d0 = y.norm().max(1e-8);
    let d1 = f0.norm().max(1e-8);
    let h0 = 0.01 * d0 / d1;
    (h0 * rtol.powf(0.2).max(1e-3)).min(span).max(MIN_STEP * 10.0)
}

/// Bisects the margin crossing in `[partial.t, t_bad]` using `R`-only
/// integrations restarted from the partial state.
fn bisect_crossing(
    family: &HamiltonianFamily,
    partial: &Resolvent,
    t_bad: f64,
    rel_tol: f64,
) -> std::result::Result<(f64, f64), ResolventError> {
    let dim = 2 * partial.dim();
    let mut lo = partial.t;
    let mut hi = t_bad;
    let mut r_lo = partial.matrix().clone();

    let margin = |r: &CMat| -> f64 {
        let det = (r + CMat::identity(dim, dim)).lu().determinant();
        det.norm() / 2f64.powi(dim as i32)
    };

    for _ in 0..64 {
        if (hi - lo).abs() <= BRACKET_WIDTH {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let rhs = |s: f64, y: &CVec| r_only_rhs(family, s, y, dim);
        let driven = drive(&rhs, lo, mid, pack_r(&r_lo), rel_tol, None)?;
        let r_mid = match driven {
            Driven::Completed { y, .. } => unpack_r(&y, dim),
            Driven::MarginHalt { .. } => unreachable!(),
        };
        if margin(&r_mid) < DEGENERACY_MARGIN {
            hi = mid;
        } else {
            lo = mid;
            r_lo = r_mid;
        }
    }
    if lo <= hi {
        Ok((lo, hi))
    } else {
        Ok((hi, lo))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::builtin;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn schrodinger() -> HamiltonianFamily {
        builtin("harmonic_schrodinger", &Default::default(), 4.0).unwrap()
    }

    #[test]
    fn identity_at_equal_times() {
        let fam = schrodinger();
        let res = integrate_resolvent(&fam, 0.7, 0.7, 1e-10).unwrap();
        assert_eq!(res.matrix(), &CMat::identity(2, 2));
        assert_eq!(res.log_prefactor(), Complex64::new(0.0, 0.0));
        assert!((res.det_margin() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn schrodinger_resolvent_is_a_rotation() {
        // R(t, 0) = cos(2t) I + sin(2t) σ
        let fam = schrodinger();
        for &t in &[0.3, 0.9, 1.4] {
            let res = integrate_resolvent(&fam, 0.0, t, 1e-11).unwrap();
            let expected = CMat::identity(2, 2) * Complex64::new((2.0 * t).cos(), 0.0)
                + sigma_matrix(1) * Complex64::new((2.0 * t).sin(), 0.0);
            assert!(
                (res.matrix() - &expected).norm() < 1e-8,
                "t = {t}: {:.3e}",
                (res.matrix() - &expected).norm()
            );
            assert!(res.imag_norm() < 1e-9, "metaplectic resolvent must stay real");
        }
    }

    #[test]
    fn backward_times_are_allowed() {
        let fam = schrodinger();
        let res = integrate_resolvent(&fam, 1.0, 0.25, 1e-10).unwrap();
        let dt: f64 = 0.25 - 1.0;
        let expected = CMat::identity(2, 2) * Complex64::new((2.0 * dt).cos(), 0.0)
            + sigma_matrix(1) * Complex64::new((2.0 * dt).sin(), 0.0);
        assert!((res.matrix() - &expected).norm() < 1e-8);
    }

    #[test]
    fn structural_invariants_on_oscillator() {
        let fam = builtin("harmonic_oscillator", &Default::default(), 4.0).unwrap();
        let res = integrate_resolvent(&fam, 0.0, 1.0, 1e-10).unwrap();
        let scale = res.matrix().norm().powi(2);
        assert!(res.symplecticity_residual() <= 1e-8 * scale.max(1.0));
        assert!(res.det_residual() <= 1e-8);
        let mut rng = rand::thread_rng();
        assert!(res.nonnegativity_min(100, &mut rng) >= -1e-9 * scale);
    }

    #[test]
    fn schrodinger_degeneracy_is_bracketed_near_pi_half() {
        let fam = schrodinger();
        match integrate_resolvent(&fam, 0.0, 2.0, 1e-10) {
            Err(ResolventError::Degenerate(d)) => {
                assert!(d.hi - d.lo <= 1e-3, "bracket width {}", d.hi - d.lo);
                // margin 1e-10 is crossed within ~1e-5 of π/2
                assert!(d.lo > FRAC_PI_2 - 1e-3 && d.hi < FRAC_PI_2 + 1e-3);
                assert!(d.partial.t < FRAC_PI_2);
                assert!(d.partial.det_margin() >= DEGENERACY_MARGIN);
            }
            other => panic!("expected degeneracy, got {other:?}"),
        }
    }

    #[test]
    fn r_only_integration_passes_through_degeneracy() {
        let fam = schrodinger();
        let t = 0.75 * PI; // past the π/2 crossing
        let res = integrate_r_only(&fam, 0.0, t, 1e-10).unwrap();
        let expected = CMat::identity(2, 2) * Complex64::new((2.0 * t).cos(), 0.0)
            + sigma_matrix(1) * Complex64::new((2.0 * t).sin(), 0.0);
        assert!((res.matrix() - &expected).norm() < 1e-8);
    }

    #[test]
    fn compose_check_trivial_when_midpoint_collapses() {
        let fam = schrodinger();
        let res = compose_check(&fam, 0.4, 0.4, 1.1, 1e-10).unwrap();
        assert!(res < 1e-8);
    }

    #[test]
    fn out_of_range_times_rejected() {
        let fam = schrodinger();
        assert!(integrate_resolvent(&fam, 0.0, 7.0, 1e-10).is_err());
        assert!(integrate_resolvent(&fam, -0.5, 1.0, 1e-10).is_err());
    }
}
