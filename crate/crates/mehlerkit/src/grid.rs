//! Uniform 1-D grids, grid functions and FFT helpers shared by the kernel,
//! oracle and wave-front modules.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::{Error, Result};

/// A uniform grid `x_k = x0 + k·dx`, `k = 0..n−1`, with `n` a power of two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridParams {
    pub n: usize,
    pub x0: f64,
    pub dx: f64,
}

impl GridParams {
    pub fn new(n: usize, x0: f64, dx: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::Grid(format!(
                "grid size must be a power of two ≥ 16, got {n}"
            )));
        }
        if !(dx > 0.0) || !dx.is_finite() || !x0.is_finite() {
            return Err(Error::Grid(format!("bad grid spacing dx = {dx}, x0 = {x0}")));
        }
        Ok(Self { n, x0, dx })
    }

    /// Symmetric grid covering `[−half_width, half_width)`.
    pub fn symmetric(n: usize, half_width: f64) -> Result<Self> {
        Self::new(n, -half_width, 2.0 * half_width / n as f64)
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x0 + k as f64 * self.dx
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.x(k)).collect()
    }

    /// FFT frequency of bin `k` in the `e^{i ξ x}` convention, Nyquist band
    /// `[−π/dx, π/dx)`.
    pub fn xi(&self, k: usize) -> f64 {
        let n = self.n as i64;
        let k = k as i64;
        let shifted = if k < n / 2 { k } else { k - n };
        2.0 * std::f64::consts::PI * shifted as f64 / (self.n as f64 * self.dx)
    }
}

/// Complex samples on a uniform grid.
#[derive(Debug, Clone)]
pub struct GridFunction {
    params: GridParams,
    samples: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(params: GridParams, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != params.n {
            return Err(Error::Grid(format!(
                "expected {} samples, got {}",
                params.n,
                samples.len()
            )));
        }
        if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Grid("non-finite sample".into()));
        }
        Ok(Self { params, samples })
    }

    pub fn from_fn(params: GridParams, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let samples = (0..params.n).map(|k| f(params.x(k))).collect();
        Self::new(params, samples)
    }

    /// The normalized Gaussian `(π w²)^{−1/4} exp(−(x−c)²/(2w²) + i k x)`.
    pub fn gaussian(params: GridParams, center: f64, width: f64, momentum: f64) -> Result<Self> {
        let amp = (std::f64::consts::PI * width * width).powf(-0.25);
        Self::from_fn(params, |x| {
            let u = (x - center) / width;
            Complex64::new(0.0, momentum * x).exp() * amp * (-0.5 * u * u).exp()
        })
    }

    /// Constant `1` on the grid (synthetic, non-decaying input; the grid
    /// window truncates it).
    pub fn constant_one(params: GridParams) -> Result<Self> {
        Self::from_fn(params, |_| Complex64::new(1.0, 0.0))
    }

    pub fn params(&self) -> GridParams {
        self.params
    }

    pub fn len(&self) -> usize {
        self.params.n
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    /// Grid L² norm `sqrt(Σ |u_k|² dx)`.
    pub fn l2_norm(&self) -> f64 {
        (self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.params.dx).sqrt()
    }

    /// Largest boundary magnitude relative to the peak, as a decay gauge.
    pub fn edge_mass(&self) -> f64 {
        let peak = self
            .samples
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let first = self.samples.first().map(|z| z.norm()).unwrap_or(0.0);
        let last = self.samples.last().map(|z| z.norm()).unwrap_or(0.0);
        first.max(last) / peak
    }

    /// Writes `x,re,im` CSV rows with a header.
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "x,re,im")?;
        for (k, z) in self.samples.iter().enumerate() {
            writeln!(w, "{:.17e},{:.17e},{:.17e}", self.params.x(k), z.re, z.im)?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        self.write_csv(&mut f)
    }

    /// Reads `x,re,im` CSV, inferring the grid from the `x` column.
    pub fn read_csv(r: impl std::io::Read) -> Result<Self> {
        let reader = BufReader::new(r);
        let mut xs = Vec::new();
        let mut samples = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with('x')) {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::Grid(format!("line {}: expected x,re,im", lineno + 1)));
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Grid(format!("line {}: {e}", lineno + 1)))
            };
            xs.push(parse(parts[0])?);
            samples.push(Complex64::new(parse(parts[1])?, parse(parts[2])?));
        }
        if xs.len() < 16 {
            return Err(Error::Grid("need at least 16 rows".into()));
        }
        let dx = xs[1] - xs[0];
        for w in xs.windows(2) {
            if ((w[1] - w[0]) - dx).abs() > 1e-9 * dx.abs().max(1.0) {
                return Err(Error::Grid("x column is not uniformly spaced".into()));
            }
        }
        let params = GridParams::new(xs.len(), xs[0], dx)?;
        Self::new(params, samples)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

/// In-place forward DFT (unnormalized, `Σ u_k e^{−2πi km/N}` convention).
pub fn fft(data: &mut [Complex64]) {
    FftPlanner::new()
        .plan_fft_forward(data.len())
        .process(data);
}

/// In-place inverse DFT, normalized by `1/N`.
pub fn ifft(data: &mut [Complex64]) {
    FftPlanner::new()
        .plan_fft_inverse(data.len())
        .process(data);
    let scale = 1.0 / data.len() as f64;
    for z in data.iter_mut() {
        *z *= scale;
    }
}
