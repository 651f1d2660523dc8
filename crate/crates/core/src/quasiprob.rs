//! Filtered quasiprobabilities and their statistical uncertainty.
//!
//! For a radially symmetric state,
//!
//! ```text
//! P_Ω(α)    = (2/π) ∫ b J₀(2b|α|) Φ(b) Ω(b) db
//! σ²{P_Ω(α)} = (1/N) [ (4/π²) ∬ b b' J₀(2b|α|) J₀(2b'|α|) Φ(b−b') e^{bb'} Ω(b) Ω(b') db db' − P_Ω(α)² ]
//! ```
//!
//! Both integrals are written through the damped function `χ(b) = Φ(b)e^{−b²/2}` and the
//! noise weight `W(b) = Ω(b)e^{b²/2}`, since `Φ(b)Ω(b) = χ(b)W(b)` and
//! `Φ(b−b')e^{bb'}Ω(b)Ω(b') = χ(b−b')W(b)W(b')`. Nothing overflows until `W` itself does.
//!
//! A [`TransformPlan`] fixes the quadrature nodes over `[0, r_t]` for one
//! characteristic function and filter, and caches the matrix `Re χ(b_i − b_j)`, so each
//! `|α|` costs one Bessel evaluation per node and one quadratic form.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bessel::bessel_j0;
use crate::charfunc::{RadialCf, RadialCfEstimate};
use crate::error::{Error, Result};
use crate::filters::{FilterDescriptor, NonclassicalityFilter};
use crate::io::Table;
use crate::quadrature::{CompositeRule, PanelSpec};

pub const DEFAULT_ALPHA_MAX: f64 = 3.0;
pub const DEFAULT_ALPHA_POINTS: usize = 61;

/// Relative threshold below which a negative variance is treated as roundoff.
const VARIANCE_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IntegrationSettings {
    pub panels: PanelSpec,
}

impl IntegrationSettings {
    /// Twice the nodes per unit length.
    pub fn refined(self) -> Self {
        IntegrationSettings {
            panels: self.panels.refined(),
        }
    }
}

/// `points` uniform radii on `[0, max]`.
pub fn alpha_grid(max: f64, points: usize) -> Result<Vec<f64>> {
    if !(max >= 0.0 && max.is_finite()) {
        return Err(Error::invalid("alpha-max", format!("{max} is not a finite value >= 0")));
    }
    match points {
        0 => Err(Error::invalid("alpha-steps", "need at least one point")),
        1 => Ok(vec![0.0]),
        _ => Ok((0..points).map(|i| max * i as f64 / (points - 1) as f64).collect()),
    }
}

pub fn default_alpha_grid() -> Vec<f64> {
    alpha_grid(DEFAULT_ALPHA_MAX, DEFAULT_ALPHA_POINTS).expect("valid default grid")
}

/// Quadrature nodes and cached filter and CF values for one (CF, filter) pair.
pub struct TransformPlan {
    nodes: Vec<f64>,
    // w_i b_i W(b_i) / scale
    kernel: Vec<f64>,
    scale: f64,
    noise: Vec<f64>,
    damped: Vec<Complex64>,
    // Re χ(b_i − b_j), row-major; only for estimates with a sample count.
    difference: Option<Vec<f64>>,
    source_count: Option<usize>,
    filter: FilterDescriptor,
    settings: IntegrationSettings,
}

impl TransformPlan {
    pub fn new(cf: &dyn RadialCf, filter: &NonclassicalityFilter, settings: IntegrationSettings) -> Result<Self> {
        Self::build(cf, filter, settings, cf.sample_count().is_some())
    }

    /// A plan without the covariance matrix; only [`Self::value`] is available.
    pub fn values_only(
        cf: &dyn RadialCf,
        filter: &NonclassicalityFilter,
        settings: IntegrationSettings,
    ) -> Result<Self> {
        Self::build(cf, filter, settings, false)
    }

    fn build(
        cf: &dyn RadialCf,
        filter: &NonclassicalityFilter,
        settings: IntegrationSettings,
        with_variance: bool,
    ) -> Result<Self> {
        let r_max = filter.truncation_radius();
        let available = cf.max_radius();
        if available < r_max * (1.0 - 1e-12) {
            return Err(Error::GridTooShort {
                required: r_max,
                available,
            });
        }
        let rule = CompositeRule::new(0.0, r_max, settings.panels);
        let noise: Vec<f64> = rule.nodes.iter().map(|&b| filter.noise_weight(b)).collect();
        let raw: Vec<f64> = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .zip(&noise)
            .map(|((&b, &w), &v)| w * b * v)
            .collect();
        let scale = raw.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let kernel = raw.iter().map(|v| v / scale).collect();
        let damped: Vec<Complex64> = rule.nodes.iter().map(|&b| cf.damped(b)).collect();
        let difference = with_variance.then(|| {
            let n = rule.nodes.len();
            (0..n * n)
                .into_par_iter()
                .map(|k| {
                    let (i, j) = (k / n, k % n);
                    cf.damped(rule.nodes[i] - rule.nodes[j]).re
                })
                .collect()
        });
        Ok(TransformPlan {
            nodes: rule.nodes,
            kernel,
            scale,
            noise,
            damped,
            difference,
            source_count: cf.sample_count(),
            filter: filter.descriptor(),
            settings,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn filter(&self) -> &FilterDescriptor {
        &self.filter
    }

    pub fn settings(&self) -> IntegrationSettings {
        self.settings
    }

    fn bessel_row(&self, alpha: f64) -> Vec<f64> {
        self.nodes.iter().map(|&b| bessel_j0(2.0 * b * alpha)).collect()
    }

    // Complex transform divided by the plan scale.
    fn scaled_complex(&self, j0: &[f64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for ((k, j), d) in self.kernel.iter().zip(j0).zip(&self.damped) {
            acc += d * (k * j);
        }
        acc * (2.0 / PI)
    }

    /// `P_Ω(|α|)` from the real part of the characteristic function.
    pub fn value(&self, alpha: f64) -> f64 {
        self.scaled_complex(&self.bessel_row(alpha)).re * self.scale
    }

    /// The transform of the complex estimate; its real part is [`Self::value`].
    pub fn complex_value(&self, alpha: f64) -> Complex64 {
        self.scaled_complex(&self.bessel_row(alpha)) * self.scale
    }

    /// `σ²{P_Ω(|α|)}` given the matching transform value `p`.
    pub fn variance(&self, alpha: f64, p: f64) -> Result<f64> {
        let j0 = self.bessel_row(alpha);
        self.variance_with_row(&j0, p)
    }

    fn variance_with_row(&self, j0: &[f64], p: f64) -> Result<f64> {
        let (d, count) = match (&self.difference, self.source_count) {
            (Some(d), Some(n)) => (d, n),
            _ => {
                return Err(Error::invalid(
                    "cf",
                    "variance needs an empirical estimate with a sample count",
                ))
            }
        };
        let n = self.nodes.len();
        let u: Vec<f64> = self.kernel.iter().zip(j0).map(|(k, j)| k * j).collect();
        let mut second = 0.0;
        let mut peak = 0.0f64;
        for i in 0..n {
            let row = &d[i * n..(i + 1) * n];
            let mut acc = 0.0;
            for j in 0..n {
                acc += u[j] * row[j];
            }
            second += u[i] * acc;
            let integrand = self.nodes[i] * self.noise[i] / self.scale;
            peak = peak.max(integrand * integrand);
        }
        let c = 4.0 / (PI * PI);
        let p_scaled = p / self.scale;
        let raw = c * second - p_scaled * p_scaled;
        if raw < 0.0 {
            let r_max = self.filter.truncation_radius;
            let threshold = VARIANCE_CLAMP * c * r_max.powi(4) * peak.max(f64::MIN_POSITIVE);
            if raw < -threshold {
                return Err(Error::NegativeVariance {
                    value: raw * self.scale * self.scale / count as f64,
                    threshold: threshold * self.scale * self.scale / count as f64,
                });
            }
            return Ok(0.0);
        }
        Ok(raw * self.scale * self.scale / count as f64)
    }

    /// Location `(b, b')` and value of the largest `|Re χ(b−b')|W(b)W(b')` on the node grid.
    pub fn variance_integrand_peak(&self) -> (f64, f64, f64) {
        let n = self.nodes.len();
        let mut best = (0.0, 0.0, f64::NEG_INFINITY);
        for i in 0..n {
            for j in 0..n {
                let chi = self.difference.as_ref().map_or(1.0, |d| d[i * n + j].abs());
                let v = chi * self.noise[i] * self.noise[j];
                if v > best.2 {
                    best = (self.nodes[i], self.nodes[j], v);
                }
            }
        }
        best
    }

    /// Value and variance at every radius; the variance is zero for analytic inputs.
    pub fn profile(&self, alpha_radii: &[f64]) -> Result<QuasiprobProfile> {
        let points: Vec<(f64, f64)> = alpha_radii
            .par_iter()
            .map(|&alpha| {
                let j0 = self.bessel_row(alpha);
                let p = self.scaled_complex(&j0).re * self.scale;
                let var = if self.difference.is_some() {
                    self.variance_with_row(&j0, p)?
                } else {
                    0.0
                };
                Ok((p, var.sqrt()))
            })
            .collect::<Result<_>>()?;
        Ok(QuasiprobProfile {
            alpha_radii: alpha_radii.to_vec(),
            values: points.iter().map(|p| p.0).collect(),
            sigmas: points.iter().map(|p| p.1).collect(),
            filter: self.filter.clone(),
            source_count: self.source_count,
            settings: self.settings,
        })
    }
}

/// `P_Ω(|α|)` for one radius.
pub fn hankel_p(cf: &dyn RadialCf, filter: &NonclassicalityFilter, alpha_abs: f64) -> Result<f64> {
    Ok(TransformPlan::values_only(cf, filter, IntegrationSettings::default())?.value(alpha_abs))
}

/// Transform of the complex characteristic function at one radius.
pub fn hankel_p_complex(cf: &dyn RadialCf, filter: &NonclassicalityFilter, alpha_abs: f64) -> Result<Complex64> {
    Ok(TransformPlan::values_only(cf, filter, IntegrationSettings::default())?.complex_value(alpha_abs))
}

/// `σ²{P_Ω(|α|)}` for one radius, given the matching transform value.
pub fn variance_p(cf: &RadialCfEstimate, filter: &NonclassicalityFilter, alpha_abs: f64, p_value: f64) -> Result<f64> {
    TransformPlan::new(cf, filter, IntegrationSettings::default())?.variance(alpha_abs, p_value)
}

/// Values and standard deviations over a grid of radii.
pub fn profile(cf: &dyn RadialCf, filter: &NonclassicalityFilter, alpha_grid: &[f64]) -> Result<QuasiprobProfile> {
    TransformPlan::new(cf, filter, IntegrationSettings::default())?.profile(alpha_grid)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiprobProfile {
    pub alpha_radii: Vec<f64>,
    pub values: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub filter: FilterDescriptor,
    /// Number of samples behind the estimate; `None` for analytic input.
    pub source_count: Option<usize>,
    pub settings: IntegrationSettings,
}

impl QuasiprobProfile {
    pub fn len(&self) -> usize {
        self.alpha_radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha_radii.is_empty()
    }

    /// `P_Ω/σ` per point; NaN where σ is zero.
    pub fn significances(&self) -> Vec<f64> {
        self.values
            .iter()
            .zip(&self.sigmas)
            .map(|(&p, &s)| if s > 0.0 { p / s } else { f64::NAN })
            .collect()
    }

    /// Radial integral `2π ∫ P_Ω(r) r dr` over the grid by the trapezoid rule.
    pub fn radial_integral(&self) -> f64 {
        let f: Vec<f64> = self.alpha_radii.iter().zip(&self.values).map(|(r, p)| r * p).collect();
        2.0 * PI
            * self
                .alpha_radii
                .windows(2)
                .zip(f.windows(2))
                .map(|(r, v)| 0.5 * (r[1] - r[0]) * (v[0] + v[1]))
                .sum::<f64>()
    }

    /// CSV export with columns `alpha, p, sigma, significance`.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["alpha", "p", "sigma", "significance"])
            .with_meta("filter", self.filter.kind)
            .with_meta("width", self.filter.width);
        if let Some(n) = self.source_count {
            t = t.with_meta("N", n);
        }
        for (((&a, &p), &s), z) in self
            .alpha_radii
            .iter()
            .zip(&self.values)
            .zip(&self.sigmas)
            .zip(self.significances())
        {
            t.push_row(&[a, p, s, z]);
        }
        t
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        self.to_table().write_csv(path)
    }

    pub fn read_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let t = Table::read_csv(path)?;
        let col = |name: &str| {
            t.column(name)
                .map(<[f64]>::to_vec)
                .ok_or_else(|| Error::data(path, format!("missing column `{name}`")))
        };
        Ok((col("alpha")?, col("p")?, col("sigma")?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charfunc::{estimate_cf, uniform_grid, AnalyticCf, SpatsCf, ThermalCf, DEFAULT_STEP};
    use crate::filters::build_autocorrelation_filter;
    use crate::spats::{p_theoretical, sample_quadratures, SpatsParams};
    use approx::assert_abs_diff_eq;

    fn spats(n: f64, e: f64) -> SpatsCf {
        SpatsCf(SpatsParams::new(n, e).unwrap())
    }

    #[test]
    fn alpha_grid_shapes() {
        assert_eq!(default_alpha_grid().len(), 61);
        assert_eq!(default_alpha_grid()[60], 3.0);
        assert_eq!(alpha_grid(2.0, 1).unwrap(), vec![0.0]);
        assert!(alpha_grid(2.0, 0).is_err());
        assert!(alpha_grid(-1.0, 5).is_err());
    }

    #[test]
    fn wide_rectangular_filter_recovers_p_function() {
        let cf = spats(0.49, 1.0);
        let f = NonclassicalityFilter::rectangular(12.0).unwrap();
        let want = p_theoretical(&cf.0, 0.0).unwrap();
        assert_abs_diff_eq!(hankel_p(&cf, &f, 0.0).unwrap(), want, epsilon = 1e-9);
        assert_abs_diff_eq!(want, -1.325_738_801_265_267_3, epsilon = 1e-12);
    }

    #[test]
    fn vanishing_cutoff_gives_zero() {
        let cf = spats(0.49, 0.62);
        for alpha in [0.0, 1.0, 2.5] {
            let v = hankel_p(&cf, &NonclassicalityFilter::rectangular(1e-6).unwrap(), alpha).unwrap();
            assert!(v.abs() < 1e-11);
        }
    }

    #[test]
    fn normalization_for_analytic_input() {
        let grid = alpha_grid(8.0, 801).unwrap();
        for (n, e, w) in [(0.49, 0.62, 1.4), (1.11, 0.6, 1.3), (0.49, 1.0, 2.0)] {
            let f = build_autocorrelation_filter(w).unwrap();
            let prof = profile(&spats(n, e), &f, &grid).unwrap();
            assert_abs_diff_eq!(prof.radial_integral(), 1.0, epsilon = 1e-3);
            assert!(prof.sigmas.iter().all(|&s| s == 0.0));
        }
    }

    #[test]
    fn thermal_input_stays_nonnegative() {
        for nbar in [0.1, 1.0, 5.0] {
            for w in [1.0, 1.4, 2.0] {
                let f = build_autocorrelation_filter(w).unwrap();
                let prof = profile(&ThermalCf { nbar }, &f, &default_alpha_grid()).unwrap();
                let min = prof.values.iter().cloned().fold(f64::INFINITY, f64::min);
                assert!(min >= -1e-8, "n̄={nbar} w={w}: {min}");
            }
        }
    }

    #[test]
    fn minimum_of_analytic_profile_at_origin() {
        let f = build_autocorrelation_filter(1.4).unwrap();
        let prof = profile(&spats(0.49, 0.62), &f, &default_alpha_grid()).unwrap();
        let argmin = prof
            .values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
        assert_eq!(argmin.0, 0);
        assert!(argmin.1 < 0.0);
    }

    #[test]
    fn node_doubling_converges() {
        let cases: [(&dyn RadialCf, f64); 3] = [
            (&spats(0.49, 0.62), 1.4),
            (&spats(1.11, 0.6), 2.4),
            (&ThermalCf { nbar: 1.0 }, 1.0),
        ];
        for (cf, w) in cases {
            let f = build_autocorrelation_filter(w).unwrap();
            let coarse = TransformPlan::values_only(cf, &f, IntegrationSettings::default()).unwrap();
            let fine = TransformPlan::values_only(cf, &f, IntegrationSettings::default().refined()).unwrap();
            for alpha in default_alpha_grid() {
                let (a, b) = (coarse.value(alpha), fine.value(alpha));
                assert!((a - b).abs() < 1e-7 * a.abs().max(1.0), "w={w} α={alpha}");
            }
        }
    }

    #[test]
    fn analytic_closure_matches_spats_cf() {
        let p = SpatsParams::new(0.49, 0.62).unwrap();
        let f = build_autocorrelation_filter(1.4).unwrap();
        let closure = AnalyticCf(|b: f64| crate::spats::cf_theoretical(&p, b));
        for alpha in [0.0, 0.8] {
            assert_eq!(hankel_p(&closure, &f, alpha).unwrap(), hankel_p(&SpatsCf(p), &f, alpha).unwrap());
        }
    }

    #[test]
    fn short_grid_is_rejected() {
        let data = sample_quadratures(&SpatsParams::new(0.49, 0.62).unwrap(), 1000, 3).unwrap();
        let cf = estimate_cf(&data, &uniform_grid(2.0, DEFAULT_STEP)).unwrap();
        let f = build_autocorrelation_filter(1.4).unwrap();
        assert!(matches!(hankel_p(&cf, &f, 0.0), Err(Error::GridTooShort { .. })));
    }

    #[test]
    fn empirical_profile_is_consistent() {
        let p = SpatsParams::new(0.49, 0.62).unwrap();
        let data = sample_quadratures(&p, 100_000, 11).unwrap();
        let f = build_autocorrelation_filter(1.4).unwrap();
        let cf = estimate_cf(&data, &uniform_grid(f.truncation_radius(), DEFAULT_STEP)).unwrap();
        let grid = [0.0, 0.5, 1.0];
        let prof = profile(&cf, &f, &grid).unwrap();
        for (i, &alpha) in grid.iter().enumerate() {
            let p_single = hankel_p(&cf, &f, alpha).unwrap();
            assert_eq!(prof.values[i], p_single);
            assert_eq!(prof.sigmas[i], variance_p(&cf, &f, alpha, p_single).unwrap().sqrt());
            assert!(prof.sigmas[i] > 0.0);
        }
        let z = prof.values[0] / prof.sigmas[0];
        assert!((-25.0..=-8.0).contains(&z), "S(0) = {z}");
    }

    #[test]
    fn variance_scales_inversely_with_count() {
        let p = SpatsParams::new(0.49, 0.62).unwrap();
        let f = build_autocorrelation_filter(1.4).unwrap();
        let grid = uniform_grid(f.truncation_radius(), DEFAULT_STEP);
        let cf = estimate_cf(&sample_quadratures(&p, 20_000, 5).unwrap(), &grid).unwrap();
        let big = RadialCfEstimate::from_damped(cf.radii().to_vec(), cf.damped_values().to_vec(), 20_000_000).unwrap();
        let pv = hankel_p(&cf, &f, 0.0).unwrap();
        let ratio = variance_p(&cf, &f, 0.0, pv).unwrap() / variance_p(&big, &f, 0.0, pv).unwrap();
        assert_abs_diff_eq!(ratio, 1000.0, epsilon = 1e-6);
    }

    #[test]
    fn variance_integrand_peaks_inside_domain() {
        let p = SpatsParams::new(0.49, 0.62).unwrap();
        let data = sample_quadratures(&p, 10_000, 2).unwrap();
        for w in [1.0, 1.4, 2.0] {
            let f = build_autocorrelation_filter(w).unwrap();
            let cf = estimate_cf(&data, &uniform_grid(f.truncation_radius(), DEFAULT_STEP)).unwrap();
            let plan = TransformPlan::new(&cf, &f, IntegrationSettings::default()).unwrap();
            let (b, b2, v) = plan.variance_integrand_peak();
            let edge = f.truncation_radius() - plan.settings().panels.panel_length;
            assert!(v.is_finite() && b < edge && b2 < edge, "w={w}: peak at ({b}, {b2})");
        }
    }

    #[test]
    fn variance_needs_samples() {
        let f = build_autocorrelation_filter(1.0).unwrap();
        let plan = TransformPlan::new(&spats(0.49, 0.62), &f, IntegrationSettings::default()).unwrap();
        assert!(plan.variance(0.0, 0.1).is_err());
    }
}
