//! Time-dependent families `t ↦ Q_t` of quadratic coefficient matrices with
//! closed-form (polynomial + trigonometric) coefficient tracks, plus the
//! built-in operators used throughout the test suites.
//!
//! Tracks are closed-form rather than sampled tables so the resolvent
//! integrator can evaluate `Q_t` at arbitrary adaptive step points without
//! interpolation error.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::symplectic::QuadraticForm;
use crate::{CMat, Error, Result};

/// Slack allowed on the `[0, T]` range check, to absorb roundoff in callers
/// that sweep the horizon.
const RANGE_SLACK: f64 = 1e-9;

/// Number of grid nodes for the dissipativity sweep at construction.
const DISSIPATIVITY_GRID: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermKind {
    Poly,
    Cos,
    Sin,
}

/// One closed-form term of a coefficient track: `(re + i·im)·t^p`,
/// `(re + i·im)·cos(p·t)` or `(re + i·im)·sin(p·t)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrackTerm {
    pub kind: TermKind,
    pub re: f64,
    pub im: f64,
    pub p: f64,
}

impl TrackTerm {
    pub fn eval(&self, t: f64) -> Complex64 {
        let coeff = Complex64::new(self.re, self.im);
        match self.kind {
            TermKind::Poly => {
                if self.p == 0.0 {
                    coeff
                } else {
                    coeff * t.powf(self.p)
                }
            }
            TermKind::Cos => coeff * (self.p * t).cos(),
            TermKind::Sin => coeff * (self.p * t).sin(),
        }
    }
}

/// A finite sum of closed-form terms; continuous in `t` by construction.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CoefficientTrack {
    pub terms: Vec<TrackTerm>,
}

impl CoefficientTrack {
    pub fn constant(value: Complex64) -> Self {
        Self {
            terms: vec![TrackTerm {
                kind: TermKind::Poly,
                re: value.re,
                im: value.im,
                p: 0.0,
            }],
        }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.terms.iter().map(|term| term.eval(t)).sum()
    }
}

/// An upper-triangular entry `(i, j)`, `1 ≤ i ≤ j ≤ 2n`, of the coefficient
/// matrix together with its track. The matrix entry `Q_{ij} = Q_{ji}` is the
/// track value; an off-diagonal entry therefore contributes
/// `2·Q_{ij}·X_i·X_j` to the symbol.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrackEntry {
    pub i: usize,
    pub j: usize,
    pub terms: Vec<TrackTerm>,
}

/// JSON configuration for a family. `builtin` (with `params`) and `entries`
/// are mutually exclusive ways to declare the coefficients.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyConfig {
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(default)]
    pub builtin: Option<String>,
    #[serde(default)]
    pub params: serde_json::Map<String, serde_json::Value>,
    #[serde(default)]
    pub entries: Vec<TrackEntry>,
    #[serde(default)]
    pub require_dissipative: bool,
}

/// The family `t ↦ Q_t`, immutable after construction.
#[derive(Debug, Clone)]
pub struct HamiltonianFamily {
    n: usize,
    horizon: f64,
    tracks: Vec<((usize, usize), CoefficientTrack)>,
    dissipative: bool,
    label: String,
}

impl HamiltonianFamily {
    /// Builds a family from upper-triangular tracks (0-based indices `i ≤ j < 2n`).
    pub fn from_tracks(
        n: usize,
        horizon: f64,
        tracks: Vec<((usize, usize), CoefficientTrack)>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("n must be ≥ 1".into()));
        }
        if !(horizon > 0.0) {
            return Err(Error::Config(format!("horizon T must be positive, got {horizon}")));
        }
        for &((i, j), _) in &tracks {
            if i > j || j >= 2 * n {
                return Err(Error::Config(format!(
                    "track entry ({i}, {j}) outside the upper triangle of a {0}×{0} matrix",
                    2 * n
                )));
            }
        }
        let mut family = Self {
            n,
            horizon,
            tracks,
            dissipative: false,
            label: label.into(),
        };
        family.dissipative = family.check_dissipative()?;
        Ok(family)
    }

    /// Constant-coefficient family with matrix `Q`.
    pub fn constant(q: CMat, horizon: f64, label: impl Into<String>) -> Result<Self> {
        let form = QuadraticForm::new(q)?;
        let m = form.matrix();
        let n = form.dim();
        let mut tracks = Vec::new();
        for i in 0..2 * n {
            for j in i..2 * n {
                let v = m[(i, j)];
                if v.norm() > 0.0 {
                    tracks.push(((i, j), CoefficientTrack::constant(v)));
                }
            }
        }
        Self::from_tracks(n, horizon, tracks, label)
    }

    /// Parses the JSON config document (see the schema in the README).
    pub fn from_config(config: &FamilyConfig) -> Result<Self> {
        let family = match config.builtin.as_deref() {
            Some(name) => {
                let built = builtin(name, &config.params, config.horizon)?;
                if let Some(n) = config.n {
                    if n != built.dim() {
                        return Err(Error::Config(format!(
                            "builtin '{name}' has n = {}, config says n = {n}",
                            built.dim()
                        )));
                    }
                }
                built
            }
            None => {
                let n = config
                    .n
                    .ok_or_else(|| Error::Config("n is required without a builtin".into()))?;
                let tracks = config
                    .entries
                    .iter()
                    .map(|e| {
                        if e.i == 0 || e.j == 0 {
                            return Err(Error::Config(
                                "entries are 1-based: i, j ∈ 1..=2n".into(),
                            ));
                        }
                        Ok((
                            (e.i - 1, e.j - 1),
                            CoefficientTrack {
                                terms: e.terms.clone(),
                            },
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::from_tracks(n, config.horizon, tracks, "custom")?
            }
        };
        if config.require_dissipative && !family.is_dissipative() {
            return Err(Error::Config(
                "family violates Re Q_t ⪯ 0 on the check grid but require_dissipative is set"
                    .into(),
            ));
        }
        Ok(family)
    }

    /// Parses a JSON document into a family.
    pub fn from_json(text: &str) -> Result<Self> {
        let config: FamilyConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("config does not match schema: {e}")))?;
        Self::from_config(&config)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Whether `Re Q_t ⪯ 0` held at every node of the construction-time check grid.
    pub fn is_dissipative(&self) -> bool {
        self.dissipative
    }

    /// Samples `Q_t` as a symmetric quadratic form. `t` must lie in `[0, T]`.
    pub fn sample(&self, t: f64) -> Result<QuadraticForm> {
        if t < -RANGE_SLACK || t > self.horizon + RANGE_SLACK {
            return Err(Error::Range(format!(
                "t = {t} outside the family horizon [0, {}]",
                self.horizon
            )));
        }
        Ok(self.sample_unchecked(t))
    }

    /// Samples without the range check; used internally by finite-difference
    /// probes that stay within `h_fd` of the horizon.
    pub(crate) fn sample_unchecked(&self, t: f64) -> QuadraticForm {
        let mut q = CMat::zeros(2 * self.n, 2 * self.n);
        for ((i, j), track) in &self.tracks {
            let v = track.eval(t);
            q[(*i, *j)] = v;
            q[(*j, *i)] = v;
        }
        QuadraticForm::new(q).expect("matrix is symmetric by construction")
    }

    fn check_dissipative(&self) -> Result<bool> {
        for k in 0..DISSIPATIVITY_GRID {
            let t = self.horizon * k as f64 / (DISSIPATIVITY_GRID - 1) as f64;
            if !self.sample_unchecked(t).is_dissipative() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Builds one of the named operators.
///
/// * `harmonic_oscillator` — `q = −x² − ξ²` (n = 1)
/// * `harmonic_schrodinger` — `q = −i(x² + ξ²)` (n = 1)
/// * `kfp` — Kramers–Fokker–Planck with quadratic potential `a·x²` (n = 2,
///   phase variables `(x, v, ξ, η)`): `q = −η² − v²/4 − i(vξ − 2a·xη)`.
///   `params.a` defaults to 1; `a = 0` is allowed and enlarges the singular
///   space.
pub fn builtin(
    name: &str,
    params: &serde_json::Map<String, serde_json::Value>,
    horizon: f64,
) -> Result<HamiltonianFamily> {
    match name {
        "harmonic_oscillator" => {
            HamiltonianFamily::constant(-CMat::identity(2, 2), horizon, name)
        }
        "harmonic_schrodinger" => HamiltonianFamily::constant(
            CMat::identity(2, 2) * Complex64::new(0.0, -1.0),
            horizon,
            name,
        ),
        "kfp" => {
            let a = match params.get("a") {
                None => 1.0,
                Some(v) => v
                    .as_f64()
                    .ok_or_else(|| Error::Config("kfp parameter a must be a number".into()))?,
            };
            Ok(kfp_family(a, horizon)?)
        }
        other => Err(Error::Config(format!("unknown builtin '{other}'"))),
    }
}

/// The Kramers–Fokker–Planck generator `−Δ_v + v²/4 + v∂_x − 2a·x∂_v` written
/// as the quadratic symbol `q = −η² − v²/4 − i(vξ − 2a·xη)` over `(x, v, ξ, η)`.
pub fn kfp_family(a: f64, horizon: f64) -> Result<HamiltonianFamily> {
    let mut q = CMat::zeros(4, 4);
    q[(1, 1)] = Complex64::new(-0.25, 0.0);
    q[(3, 3)] = Complex64::new(-1.0, 0.0);
    q[(1, 2)] = Complex64::new(0.0, -0.5);
    q[(2, 1)] = Complex64::new(0.0, -0.5);
    q[(0, 3)] = Complex64::new(0.0, a);
    q[(3, 0)] = Complex64::new(0.0, a);
    HamiltonianFamily::constant(q, horizon, format!("kfp(a={a})"))
}
