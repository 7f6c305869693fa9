//! Singular spaces as numerical kernel intersections.
//!
//! The autonomous singular space of a quadratic form with Hamilton map `F` is
//! `S = ∩_{j=0}^{2n−1} Ker[Re F (Im F)^j] ∩ ℝ^{2n}`; its time-dependent
//! extension for a family on `[t₁, t₂]` is
//! `S_{t₁,t₂} = ∩_{τ ∈ [t₁,t₂]} Ker(Im R(τ, t₂)) ∩ ℝ^{2n}`.
//!
//! The continuum intersection is discretized by stacking `Im R(τ_k, t₂)` at
//! Chebyshev nodes `τ_k` and thresholding an SVD; `Im R` is analytic in `τ`
//! for closed-form tracks, so finite sampling with a refinement-stability
//! flag is a sound discretization. Gabor singularities of a solution at time
//! `t` live inside `S_{0,t}`; a zero space certifies Schwartz smoothing.

use serde::Serialize;

use crate::family::HamiltonianFamily;
use crate::linalg::{max_principal_angle, null_space};
use crate::resolvent::integrate_r_only;
use crate::symplectic::HamiltonMap;
use crate::{Error, RMat, RVec, Result};

/// Default relative SVD threshold.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Default number of Chebyshev nodes.
pub const DEFAULT_NODES: usize = 16;

/// Largest principal angle accepted as "the same subspace" by the
/// refinement-stability check.
const STABILITY_ANGLE: f64 = 1e-6;

/// An orthonormal basis of a real subspace of `ℝ^{2n}`, with the singular
/// values that produced it.
#[derive(Debug, Clone)]
pub struct SubspaceBasis {
    n: usize,
    pub basis: Vec<RVec>,
    pub tol_used: f64,
    pub singular_values: Vec<f64>,
    /// `Some(true)` when doubling the τ-sample count reproduced the same
    /// span; `None` for autonomous computations (no sampling involved).
    pub stable: Option<bool>,
}

impl SubspaceBasis {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        2 * self.n
    }

    /// `‖d − P_S d‖ / ‖d‖`, the sine of the angle between `d` and the space.
    pub fn projection_residual(&self, d: &RVec) -> f64 {
        let norm = d.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let mut proj = RVec::zeros(d.len());
        for b in &self.basis {
            proj += b * b.dot(d);
        }
        (d - proj).norm() / norm
    }

    pub fn to_json(&self) -> SubspaceBasisJson {
        SubspaceBasisJson {
            dim: self.dim(),
            vectors: self.basis.iter().map(|v| v.iter().copied().collect()).collect(),
            singular_values: self.singular_values.clone(),
            tol: self.tol_used,
            stable: self.stable,
        }
    }
}

/// Export form of a [`SubspaceBasis`].
#[derive(Debug, Clone, Serialize)]
pub struct SubspaceBasisJson {
    pub dim: usize,
    pub vectors: Vec<Vec<f64>>,
    pub singular_values: Vec<f64>,
    pub tol: f64,
    pub stable: Option<bool>,
}

/// `S = ∩_j Ker[Re F (Im F)^j] ∩ ℝ^{2n}` by stacked SVD.
pub fn autonomous_singular_space(f: &HamiltonMap, tol: f64) -> SubspaceBasis {
    let n = f.dim();
    let dim = 2 * n;
    let re = f.matrix().map(|z| z.re);
    let im = f.matrix().map(|z| z.im);

    let mut stacked = RMat::zeros(dim * dim, dim);
    let mut power = RMat::identity(dim, dim);
    for j in 0..dim {
        let block = &re * &power;
        stacked.view_mut((j * dim, 0), (dim, dim)).copy_from(&block);
        power = &im * power;
    }
    let (basis, singular_values) = null_space(&stacked, tol);
    SubspaceBasis {
        n,
        basis,
        tol_used: tol,
        singular_values,
        stable: None,
    }
}

/// `S_{t₁,t₂}` by stacking `Im R(τ_k, t₂)` on `n_tau` Chebyshev nodes; the
/// result is recomputed at `2·n_tau` nodes and compared to set the stability
/// flag.
pub fn time_dependent_singular_space(
    family: &HamiltonianFamily,
    t1: f64,
    t2: f64,
    n_tau: usize,
    tol: f64,
    rel_tol: f64,
) -> Result<SubspaceBasis> {
    if n_tau < 8 {
        return Err(Error::Range("need n_tau ≥ 8 sample nodes".into()));
    }
    if t1 > t2 {
        return Err(Error::Range(format!("need t1 ≤ t2, got [{t1}, {t2}]")));
    }
    let coarse = sampled_space(family, t1, t2, n_tau, tol, rel_tol)?;
    let fine = sampled_space(family, t1, t2, 2 * n_tau, tol, rel_tol)?;
    let stable = coarse.dim() == fine.dim()
        && max_principal_angle(&coarse.basis, &fine.basis)
            .map(|a| a <= STABILITY_ANGLE)
            .unwrap_or(false);
    Ok(SubspaceBasis {
        stable: Some(stable),
        ..fine
    })
}

fn sampled_space(
    family: &HamiltonianFamily,
    t1: f64,
    t2: f64,
    n_tau: usize,
    tol: f64,
    rel_tol: f64,
) -> Result<SubspaceBasis> {
    let n = family.dim();
    let dim = 2 * n;
    let mut stacked = RMat::zeros(n_tau * dim, dim);
    for k in 0..n_tau {
        // Chebyshev–Gauss nodes of [t1, t2]
        let theta = std::f64::consts::PI * (2.0 * k as f64 + 1.0) / (2.0 * n_tau as f64);
        let tau = 0.5 * (t1 + t2) + 0.5 * (t2 - t1) * theta.cos();
        // the definition needs R(τ, t₂): started at t₂, integrated backward to τ
        let res = integrate_r_only(family, t2, tau, rel_tol).map_err(Error::from)?;
        let im = res.matrix().map(|z| z.im);
        stacked.view_mut((k * dim, 0), (dim, dim)).copy_from(&im);
    }
    let (basis, singular_values) = null_space(&stacked, tol);
    Ok(SubspaceBasis {
        n,
        basis,
        tol_used: tol,
        singular_values,
        stable: None,
    })
}

/// `true` iff `S_{0,t} = {0}` at the given tolerances: every `B`-initial
/// datum is predicted Schwartz-smooth from time `t` on.
pub fn smoothing_certificate(
    family: &HamiltonianFamily,
    t: f64,
    tol: f64,
    rel_tol: f64,
) -> Result<bool> {
    if !(t > 0.0) {
        return Err(Error::Range("smoothing certificate needs t > 0".into()));
    }
    let space = time_dependent_singular_space(family, 0.0, t, DEFAULT_NODES, tol, rel_tol)?;
    Ok(space.dim() == 0)
}
