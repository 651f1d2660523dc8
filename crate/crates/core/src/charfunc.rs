//! Radial characteristic function sampled from quadrature data.
//!
//! For phase-randomized states the estimate at radius `b` is
//! `Φ̂(b) = exp(b²/2)·(1/N)·Σ_j exp(i b x_j)` with variance
//! `σ²{Φ̂(b)} = (exp(b²) − |Φ̂(b)|²)/N`.
//!
//! The variance is the mean squared modulus deviation of the complex estimator
//! (real and imaginary parts together). Transforms use the real part of `Φ̂` and
//! this variance as its uncertainty.
//!
//! Internally the estimate is held in damped form `χ̂(b) = Φ̂(b)·exp(−b²/2)`, the
//! empirical quadrature characteristic function, which is bounded by one. This keeps
//! large radii finite where `exp(b²/2)` alone would overflow.

use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::Table;
use crate::spats::{cf_theoretical, QuadratureDataset, SpatsParams};

/// Default radial step of the estimation grid.
pub const DEFAULT_STEP: f64 = 0.02;

/// A characteristic function of a radially symmetric state, in damped form.
pub trait RadialCf: Sync {
    /// `Φ(b)·exp(−b²/2)`, extended to `b < 0` by complex conjugation.
    fn damped(&self, b: f64) -> Complex64;

    /// Largest radius where the function is available.
    fn max_radius(&self) -> f64 {
        f64::INFINITY
    }

    /// Number of samples behind an empirical estimate.
    fn sample_count(&self) -> Option<usize> {
        None
    }
}

/// Analytic characteristic function of a lossy SPATS.
#[derive(Debug, Clone, Copy)]
pub struct SpatsCf(pub SpatsParams);

impl RadialCf for SpatsCf {
    fn damped(&self, b: f64) -> Complex64 {
        Complex64::new(cf_theoretical(&self.0, b) * (-0.5 * b * b).exp(), 0.0)
    }
}

/// Thermal state `Φ(b) = exp(−n̄ b²)`, the classical reference.
#[derive(Debug, Clone, Copy)]
pub struct ThermalCf {
    pub nbar: f64,
}

impl RadialCf for ThermalCf {
    fn damped(&self, b: f64) -> Complex64 {
        Complex64::new((-(self.nbar + 0.5) * b * b).exp(), 0.0)
    }
}

/// Any real, even characteristic function given as a closure `b ↦ Φ(b)`.
pub struct AnalyticCf<F>(pub F);

impl<F: Fn(f64) -> f64 + Sync> RadialCf for AnalyticCf<F> {
    fn damped(&self, b: f64) -> Complex64 {
        Complex64::new((self.0)(b.abs()) * (-0.5 * b * b).exp(), 0.0)
    }
}

/// `0, step, 2·step, …` up to the first node at or beyond `b_max`.
pub fn uniform_grid(b_max: f64, step: f64) -> Vec<f64> {
    let n = (b_max / step - 1e-9).ceil().max(0.0) as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialCfEstimate {
    radii: Vec<f64>,
    damped: Vec<Complex64>,
    source_count: usize,
}

/// Estimates `Φ̂` and its variance on `radii` (strictly increasing, starting at 0).
///
/// Each grid point sums its phasors sequentially in blocks followed by a pairwise
/// reduction of the block sums, so results do not depend on the thread count.
pub fn estimate_cf(data: &QuadratureDataset, radii: &[f64]) -> Result<RadialCfEstimate> {
    validate_grid(radii)?;
    let xs = data.samples();
    let n = xs.len() as f64;
    let damped = radii
        .par_iter()
        .map(|&b| {
            let (re, im) = phasor_sum(xs, b);
            Complex64::new(re / n, im / n)
        })
        .collect();
    Ok(RadialCfEstimate {
        radii: radii.to_vec(),
        damped,
        source_count: xs.len(),
    })
}

fn validate_grid(radii: &[f64]) -> Result<()> {
    match radii.first() {
        None => return Err(Error::InvalidGrid("grid is empty".into())),
        Some(&r0) if r0 != 0.0 => return Err(Error::InvalidGrid(format!("first radius is {r0}"))),
        _ => {}
    }
    if let Some(w) = radii.windows(2).find(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
        return Err(Error::InvalidGrid(format!("{} is followed by {}", w[0], w[1])));
    }
    Ok(())
}

const BLOCK: usize = 256;

fn phasor_sum(xs: &[f64], b: f64) -> (f64, f64) {
    let blocks: Vec<(f64, f64)> = xs
        .chunks(BLOCK)
        .map(|chunk| {
            chunk.iter().fold((0.0, 0.0), |(c, s), &x| {
                let (sin, cos) = (b * x).sin_cos();
                (c + cos, s + sin)
            })
        })
        .collect();
    pairwise(&blocks)
}

fn pairwise(v: &[(f64, f64)]) -> (f64, f64) {
    match v.len() {
        0 => (0.0, 0.0),
        1 => v[0],
        n => {
            let (l, r) = v.split_at(n / 2);
            let (a, b) = (pairwise(l), pairwise(r));
            (a.0 + b.0, a.1 + b.1)
        }
    }
}

impl RadialCfEstimate {
    /// Builds an estimate from damped values `χ̂(b) = Φ̂(b)·exp(−b²/2)`.
    pub fn from_damped(radii: Vec<f64>, damped: Vec<Complex64>, source_count: usize) -> Result<Self> {
        validate_grid(&radii)?;
        if radii.len() != damped.len() {
            return Err(Error::InvalidGrid(format!(
                "{} radii but {} values",
                radii.len(),
                damped.len()
            )));
        }
        if source_count == 0 {
            return Err(Error::EmptyDataset);
        }
        Ok(RadialCfEstimate {
            radii,
            damped,
            source_count,
        })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn source_count(&self) -> usize {
        self.source_count
    }

    pub fn damped_values(&self) -> &[Complex64] {
        &self.damped
    }

    /// `Φ̂(b)` at the grid nodes. Overflows to infinity beyond `b ≈ 37.6`.
    pub fn values(&self) -> Vec<Complex64> {
        self.radii
            .iter()
            .zip(&self.damped)
            .map(|(&b, &d)| d * (0.5 * b * b).exp())
            .collect()
    }

    pub fn variances(&self) -> Vec<f64> {
        self.radii
            .iter()
            .zip(&self.damped)
            .map(|(&b, &d)| self.variance_from_damped(b, d))
            .collect()
    }

    // (exp(b²) − |Φ̂|²)/N written through the damped value.
    fn variance_from_damped(&self, b: f64, d: Complex64) -> f64 {
        (b * b).exp() * (1.0 - d.norm_sqr()).max(0.0) / self.source_count as f64
    }

    fn check_range(&self, b: f64) -> Result<()> {
        let max = *self.radii.last().expect("grid is non-empty");
        if b.abs() > max || b.is_nan() {
            return Err(Error::OutOfRange { radius: b, max });
        }
        Ok(())
    }

    /// Interpolated `Φ̂(b)`; exact at nodes, conjugated for `b < 0`.
    pub fn cf_at(&self, b: f64) -> Result<Complex64> {
        self.check_range(b)?;
        let v = self.interpolate(b.abs()) * (0.5 * b * b).exp();
        Ok(if b < 0.0 { v.conj() } else { v })
    }

    /// Interpolated `σ²{Φ̂(b)}`.
    pub fn variance_at(&self, b: f64) -> Result<f64> {
        self.check_range(b)?;
        Ok(self.variance_from_damped(b, self.interpolate(b.abs())))
    }

    /// Piecewise-cubic (four-point Lagrange) interpolation of the damped values.
    fn interpolate(&self, b: f64) -> Complex64 {
        let r = &self.radii;
        let n = r.len();
        let i = r.partition_point(|&x| x <= b).saturating_sub(1);
        if r[i] == b || n == 1 {
            return self.damped[i];
        }
        if n < 4 {
            let j = (i + 1).min(n - 1);
            let t = (b - r[i]) / (r[j] - r[i]);
            return self.damped[i] * (1.0 - t) + self.damped[j] * t;
        }
        let start = i.saturating_sub(1).min(n - 4);
        let xs = &r[start..start + 4];
        let ys = &self.damped[start..start + 4];
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..4 {
            let mut l = 1.0;
            for m in 0..4 {
                if m != k {
                    l *= (b - xs[m]) / (xs[k] - xs[m]);
                }
            }
            acc += ys[k] * l;
        }
        acc
    }

    /// Largest `|Im Φ̂(b)|/σ{Φ̂(b)}` over the grid; near zero for phase-randomized data.
    pub fn max_imag_over_sigma(&self) -> f64 {
        let n = self.source_count as f64;
        self.damped
            .iter()
            .skip(1)
            .filter_map(|d| {
                let spread = (1.0 - d.norm_sqr()).max(0.0);
                (spread > 0.0).then(|| d.im.abs() * n.sqrt() / spread.sqrt())
            })
            .fold(0.0, f64::max)
    }

    /// CSV export: columns `b, re, im, sigma2` with a `# N=` metadata line.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["b", "re", "im", "sigma2"]).with_meta("N", self.source_count);
        for ((&b, v), s2) in self.radii.iter().zip(self.values()).zip(self.variances()) {
            t.push_row(&[b, v.re, v.im, s2]);
        }
        t
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        self.to_table().write_csv(path)
    }
}

impl RadialCf for RadialCfEstimate {
    fn damped(&self, b: f64) -> Complex64 {
        let max = *self.radii.last().expect("grid is non-empty");
        let v = self.interpolate(b.abs().min(max));
        if b < 0.0 {
            v.conj()
        } else {
            v
        }
    }

    fn max_radius(&self) -> f64 {
        *self.radii.last().expect("grid is non-empty")
    }

    fn sample_count(&self) -> Option<usize> {
        Some(self.source_count)
    }
}
