//! Regularizing filters for the characteristic function.
//!
//! The nonclassicality filter is the normalized autocorrelation of
//! `ω(β) = exp(−|β|⁴)`,
//!
//! ```text
//! Ω₁(s) = (1/𝒩) ∫ d²β' ω(β') ω(β' + s),   𝒩 = ∫ d²β' ω(β')²,   Ω_w(b) = Ω₁(b/w).
//! ```
//!
//! Shifting the integration variable by `−s/2` gives the equivalent form
//!
//! ```text
//! Ω₁(s) = exp(−s⁴/8) R(s) / R(0),   R(s) = ∬ exp(−2ρ⁴ − s²ρ² − 2s²x²) dx dy,   ρ² = x² + y²,
//! ```
//!
//! whose integrand peaks at the origin for every lag. `R` is evaluated with a
//! tensor-product Gauss–Legendre rule and `ln Ω₁` is tabulated once on a uniform
//! grid, then interpolated with local cubics. Working with the logarithm keeps the
//! relative accuracy at large lags, where `Ω_w(b)·exp(b²/2)` still matters for the
//! noise of the transforms.
//!
//! The rectangular filter is a hard cutoff at `|β_c|` and serves as the baseline
//! that lacks Fourier positivity.

use std::fmt;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bessel::bessel_j0;
use crate::error::{Error, Result};
use crate::io::Table;
use crate::quadrature::{CompositeRule, GaussLegendre, PanelSpec};

/// Nodes of the `ln Ω₁` table.
pub const TABLE_NODES: usize = 2048;
/// The table covers lags `s ∈ [0, TABLE_RANGE]`.
pub const TABLE_RANGE: f64 = 12.0;
/// Gauss–Legendre nodes per axis of the cubature for `R(s)`.
pub const CUBATURE_NODES: usize = 200;
/// Beyond the truncation radius both `Ω_w(b)` and `Ω_w(b)·exp(b²/2)` stay below this.
pub const TRUNCATION_LEVEL: f64 = 1e-10;

/// Exponent below which the cubature integrand is dropped (`e^{-40} ≈ 4e-18`).
const CUBATURE_CUTOFF: f64 = 40.0;
/// Keeps `Ω(b)Ω(b')exp(bb')` products finite in double precision.
const MAX_LN_NOISE_WEIGHT: f64 = 345.0;

/// Cubature of `R(s)` with `nodes` Gauss–Legendre points per axis.
///
/// The box is `[−Lx, Lx] × [−Ly, Ly]` with the half-widths chosen so the integrand is
/// below `e^{-40}` of its peak outside. Only the positive quadrant is evaluated; the
/// rule is symmetric and the integrand even in both coordinates.
pub fn reduced_overlap(s: f64, nodes: usize) -> f64 {
    let s2 = s * s;
    let ly = ((-s2 + (s2 * s2 + 8.0 * CUBATURE_CUTOFF).sqrt()) / 4.0).sqrt();
    let lx = ((-3.0 * s2 + (9.0 * s2 * s2 + 8.0 * CUBATURE_CUTOFF).sqrt()) / 4.0).sqrt();
    let rule = GaussLegendre::new(nodes);
    let half: Vec<(f64, f64)> = rule
        .nodes()
        .iter()
        .zip(rule.weights())
        .filter(|(&x, _)| x > 0.0)
        .map(|(&x, &w)| (x, w))
        .collect();
    let mut total = 0.0;
    for &(ux, wx) in &half {
        let x = lx * ux;
        let x2 = x * x;
        let mut row = 0.0;
        for &(uy, wy) in &half {
            let y = ly * uy;
            let r2 = x2 + y * y;
            row += wy * (-2.0 * r2 * r2 - s2 * r2 - 2.0 * s2 * x2).exp();
        }
        total += wx * row;
    }
    4.0 * lx * ly * total
}

/// Tabulated `ln Ω₁` on a uniform lag grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AutocorrelationTable {
    step: f64,
    ln_values: Vec<f64>,
    normalization: f64,
}

impl AutocorrelationTable {
    pub fn build(nodes: usize, range: f64, cubature_nodes: usize) -> Self {
        assert!(nodes >= 4, "table needs at least four nodes");
        let step = range / (nodes - 1) as f64;
        let normalization = reduced_overlap(0.0, cubature_nodes);
        let ln_values = (0..nodes)
            .into_par_iter()
            .map(|i| {
                let s = i as f64 * step;
                if i == 0 {
                    0.0
                } else {
                    -s.powi(4) / 8.0 + (reduced_overlap(s, cubature_nodes) / normalization).ln()
                }
            })
            .collect();
        AutocorrelationTable {
            step,
            ln_values,
            normalization,
        }
    }

    /// The shared table with the default resolution, built on first use.
    pub fn unit() -> &'static AutocorrelationTable {
        static TABLE: OnceLock<AutocorrelationTable> = OnceLock::new();
        TABLE.get_or_init(|| AutocorrelationTable::build(TABLE_NODES, TABLE_RANGE, CUBATURE_NODES))
    }

    /// `𝒩 = ∫ d²β exp(−2|β|⁴)` as computed by the cubature.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn range(&self) -> f64 {
        self.step * (self.ln_values.len() - 1) as f64
    }

    pub fn lags(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.ln_values.len()).map(move |i| i as f64 * self.step)
    }

    pub fn ln_values(&self) -> &[f64] {
        &self.ln_values
    }

    /// Interpolated `ln Ω₁(s)`; `None` beyond the table.
    pub fn ln_value(&self, s: f64) -> Option<f64> {
        let s = s.abs();
        let n = self.ln_values.len();
        let pos = s / self.step;
        if pos > (n - 1) as f64 + 1e-9 {
            return None;
        }
        let i = (pos.floor() as usize).min(n - 1);
        let t = pos - i as f64;
        if t == 0.0 {
            return Some(self.ln_values[i]);
        }
        // Four-point Lagrange; mirror the even function across s = 0.
        let start = i as isize - 1;
        let start = start.min(n as isize - 4);
        let y = |k: isize| self.ln_values[k.unsigned_abs()];
        let x0 = (pos - start as f64) as f64;
        let (y0, y1, y2, y3) = (y(start), y(start + 1), y(start + 2), y(start + 3));
        let (d0, d1, d2, d3) = (x0, x0 - 1.0, x0 - 2.0, x0 - 3.0);
        Some(
            -y0 * d1 * d2 * d3 / 6.0 + y1 * d0 * d2 * d3 / 2.0 - y2 * d0 * d1 * d3 / 2.0
                + y3 * d0 * d1 * d2 / 6.0,
        )
    }

    pub fn value(&self, s: f64) -> Option<f64> {
        self.ln_value(s).map(f64::exp)
    }

    /// CSV export with columns `s, omega1`.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["s", "omega1"]).with_meta("normalization", self.normalization);
        for (s, l) in self.lags().zip(&self.ln_values) {
            t.push_row(&[s, l.exp()]);
        }
        t
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        self.to_table().write_csv(path)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Autocorrelation,
    Rectangular,
    Custom,
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FilterKind::Autocorrelation => "autocorrelation",
            FilterKind::Rectangular => "rectangular",
            FilterKind::Custom => "custom",
        })
    }
}

/// Serializable summary of a filter for run metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterDescriptor {
    pub kind: FilterKind,
    /// Width `w`, or the cutoff `|β_c|` for the rectangular filter.
    pub width: f64,
    pub truncation_radius: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

type UnitShape = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Shape {
    Autocorrelation(&'static AutocorrelationTable),
    Rectangular,
    Custom { name: String, unit: UnitShape },
}

/// A radial filter `Ω_w(b) = Ω₁(b/w)`, truncated to zero beyond its truncation radius.
#[derive(Clone)]
pub struct NonclassicalityFilter {
    shape: Shape,
    width: f64,
    truncation_radius: f64,
}

impl fmt::Debug for NonclassicalityFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonclassicalityFilter")
            .field("kind", &self.kind())
            .field("width", &self.width)
            .field("truncation_radius", &self.truncation_radius)
            .finish()
    }
}

/// The autocorrelation nonclassicality filter of width `w`.
pub fn build_autocorrelation_filter(width: f64) -> Result<NonclassicalityFilter> {
    NonclassicalityFilter::autocorrelation(width)
}

/// `filter_value(Ω, b)`: the truncated filter at radius `b ≥ 0`.
pub fn filter_value(filter: &NonclassicalityFilter, b: f64) -> f64 {
    filter.value(b)
}

fn check_width(name: &'static str, w: f64) -> Result<()> {
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::invalid(name, format!("{w} is not a finite value > 0")));
    }
    Ok(())
}

impl NonclassicalityFilter {
    pub fn autocorrelation(width: f64) -> Result<Self> {
        check_width("width", width)?;
        let table = AutocorrelationTable::unit();
        let ln_level = TRUNCATION_LEVEL.ln();
        let lags: Vec<f64> = table.lags().collect();
        let last_significant = lags.iter().zip(table.ln_values()).rposition(|(&s, &l)| {
            let b = width * s;
            l >= ln_level || l + 0.5 * b * b >= ln_level
        });
        let k = last_significant.expect("Ω₁(0) = 1 is always significant");
        if k + 1 >= lags.len() {
            return Err(Error::WidthTooLarge {
                width,
                reason: format!(
                    "Ω_w(b)·exp(b²/2) is still above {TRUNCATION_LEVEL:e} at the end of the tabulated lag range"
                ),
            });
        }
        let peak = lags[..=k + 1]
            .iter()
            .zip(table.ln_values())
            .map(|(&s, &l)| l + 0.5 * width * width * s * s)
            .fold(f64::NEG_INFINITY, f64::max);
        if peak > MAX_LN_NOISE_WEIGHT {
            return Err(Error::WidthTooLarge {
                width,
                reason: format!("noise weight exp({peak:.1}) overflows the variance integral"),
            });
        }
        Ok(NonclassicalityFilter {
            shape: Shape::Autocorrelation(table),
            width,
            truncation_radius: width * lags[k + 1],
        })
    }

    /// Hard cutoff: one for `b < cutoff`, zero otherwise.
    pub fn rectangular(cutoff: f64) -> Result<Self> {
        check_width("cutoff", cutoff)?;
        Ok(NonclassicalityFilter {
            shape: Shape::Rectangular,
            width: cutoff,
            truncation_radius: cutoff,
        })
    }

    /// A filter family `Ω_w(b) = unit(b/w)` from an arbitrary unit shape, for
    /// exercising the axiom checks. Truncation is searched on `[0, 30·w]`.
    pub fn custom(
        name: impl Into<String>,
        width: f64,
        unit: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::custom_from_arc(name.into(), width, Arc::new(unit))
    }

    fn custom_from_arc(name: String, width: f64, unit: UnitShape) -> Result<Self> {
        check_width("width", width)?;
        let limit = 30.0 * width;
        let steps = 6000;
        let ln_level = TRUNCATION_LEVEL.ln();
        let last = (0..=steps).rev().find(|&i| {
            let b = limit * i as f64 / steps as f64;
            let l = unit(b / width).ln();
            l >= ln_level || l + 0.5 * b * b >= ln_level
        });
        let truncation_radius = match last {
            Some(i) if i < steps => limit * (i + 1) as f64 / steps as f64,
            Some(_) => limit,
            None => 0.0,
        };
        Ok(NonclassicalityFilter {
            shape: Shape::Custom { name, unit },
            width,
            truncation_radius,
        })
    }

    /// Same shape at another width (or cutoff).
    pub fn with_width(&self, width: f64) -> Result<Self> {
        match &self.shape {
            Shape::Autocorrelation(_) => Self::autocorrelation(width),
            Shape::Rectangular => Self::rectangular(width),
            Shape::Custom { name, unit } => Self::custom_from_arc(name.clone(), width, unit.clone()),
        }
    }

    pub fn kind(&self) -> FilterKind {
        match self.shape {
            Shape::Autocorrelation(_) => FilterKind::Autocorrelation,
            Shape::Rectangular => FilterKind::Rectangular,
            Shape::Custom { .. } => FilterKind::Custom,
        }
    }

    /// Width `w`; for the rectangular filter, the cutoff `|β_c|`.
    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn truncation_radius(&self) -> f64 {
        self.truncation_radius
    }

    pub fn descriptor(&self) -> FilterDescriptor {
        FilterDescriptor {
            kind: self.kind(),
            width: self.width,
            truncation_radius: self.truncation_radius,
            name: match &self.shape {
                Shape::Custom { name, .. } => Some(name.clone()),
                _ => None,
            },
        }
    }

    /// `ln Ω_w(b)` without truncation; `−∞` where the filter vanishes and `None`
    /// where the tabulated shape is not available.
    pub fn ln_value_untruncated(&self, b: f64) -> Option<f64> {
        self.ln_unit(b.abs() / self.width)
    }

    /// `ln Ω₁(s)` of the underlying shape.
    fn ln_unit(&self, s: f64) -> Option<f64> {
        match &self.shape {
            Shape::Autocorrelation(table) => table.ln_value(s),
            Shape::Rectangular => Some(if s < 1.0 { 0.0 } else { f64::NEG_INFINITY }),
            Shape::Custom { unit, .. } => Some(unit(s).ln()),
        }
    }

    /// Largest radius where [`Self::ln_value_untruncated`] is defined.
    pub fn representable_radius(&self) -> f64 {
        match &self.shape {
            Shape::Autocorrelation(table) => self.width * table.range(),
            _ => f64::INFINITY,
        }
    }

    /// `Ω_w(b)`, zero beyond the truncation radius.
    pub fn value(&self, b: f64) -> f64 {
        let b = b.abs();
        if b > self.truncation_radius {
            return 0.0;
        }
        match &self.shape {
            Shape::Rectangular => {
                if b < self.width {
                    1.0
                } else {
                    0.0
                }
            }
            _ => self.ln_value_untruncated(b).map_or(0.0, f64::exp),
        }
    }

    /// `Ω_w(b)·exp(b²/2)`, the factor that multiplies the damped characteristic
    /// function in the transforms; zero beyond the truncation radius.
    pub fn noise_weight(&self, b: f64) -> f64 {
        let b = b.abs();
        if b > self.truncation_radius {
            return 0.0;
        }
        match &self.shape {
            Shape::Rectangular => {
                if b < self.width {
                    (0.5 * b * b).exp()
                } else {
                    0.0
                }
            }
            _ => self
                .ln_value_untruncated(b)
                .map_or(0.0, |l| (l + 0.5 * b * b).exp()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axiom {
    /// Decays faster than `exp(−b²/2)`.
    Decay,
    /// Non-negative Fourier transform.
    FourierPositivity,
    /// Approaches one as the width grows.
    WidthLimit,
    /// Nonzero everywhere.
    FullSupport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub axiom: Axiom,
    pub passed: bool,
    /// Worst-case distance to the failure threshold; negative when failed.
    pub margin: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub filter: FilterDescriptor,
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, axiom: Axiom) -> &AxiomCheck {
        self.checks
            .iter()
            .find(|c| c.axiom == axiom)
            .expect("report holds all four axioms")
    }
}

/// Fourier-positivity tolerance of the radial transform.
pub const FOURIER_TOLERANCE: f64 = 1e-8;
/// Required decay of `Ω_w(b)·exp(b²/2)` at the truncation radius.
pub const DECAY_LEVEL: f64 = 1e-6;
/// Allowed deficit `1 − Ω_100(b)` in the width-limit check.
pub const WIDTH_LIMIT_TOLERANCE: f64 = 1e-3;

/// Numerical checks of the four nonclassicality-filter requirements.
///
/// 1. `Ω_w(b)·exp(b²/2)` is non-increasing from its maximum up to the truncation
///    radius and below [`DECAY_LEVEL`] there.
/// 2. The radial Fourier transform `(2/π)∫ b J₀(2bs) Ω_w(b) db` is at least
///    `−`[`FOURIER_TOLERANCE`] on 201 points of `s ∈ [0, 10]`.
/// 3. At `b ∈ {0.5, 1, 2}` the values at widths 1, 10 and 100 are non-decreasing and
///    `1 − Ω_100(b) <` [`WIDTH_LIMIT_TOLERANCE`].
/// 4. `Ω_w > 0` at every check point of `[0, 2·r_t]` (limited to the tabulated range).
pub fn verify_filter_axioms(filter: &NonclassicalityFilter) -> AxiomReport {
    AxiomReport {
        filter: filter.descriptor(),
        checks: vec![
            check_decay(filter),
            check_fourier(filter),
            check_width_limit(filter),
            check_support(filter),
        ],
    }
}

fn check_decay(filter: &NonclassicalityFilter) -> AxiomCheck {
    let r_t = filter.truncation_radius();
    let n = 4000;
    let ln_w: Vec<f64> = (0..=n)
        .map(|i| {
            let b = r_t * i as f64 / n as f64;
            filter
                .ln_value_untruncated(b)
                .map_or(f64::NEG_INFINITY, |l| l + 0.5 * b * b)
        })
        .collect();
    let peak = ln_w
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let monotone = ln_w[peak.0..].windows(2).all(|w| w[1] <= w[0] + 1e-9);
    let end = *ln_w.last().expect("non-empty");
    let margin = (DECAY_LEVEL.ln() - end) / std::f64::consts::LN_10;
    let passed = monotone && end < DECAY_LEVEL.ln();
    AxiomCheck {
        axiom: Axiom::Decay,
        passed,
        margin: if monotone { margin } else { margin.min(-0.0) },
        detail: format!(
            "Ω_w(b)·exp(b²/2) peaks at b = {:.3}, {} afterwards, reaches {:.3e} at b = {:.3}",
            r_t * peak.0 as f64 / n as f64,
            if monotone { "non-increasing" } else { "NOT monotone" },
            end.exp(),
            r_t
        ),
    }
}

/// Radial Fourier transform of the truncated filter, `(2/π)∫ b J₀(2bs) Ω(b) db`.
pub fn filter_fourier_transform(filter: &NonclassicalityFilter, s: f64) -> f64 {
    let rule = CompositeRule::new(
        0.0,
        filter.truncation_radius(),
        PanelSpec {
            panel_length: 0.5,
            nodes_per_panel: 32,
        },
    );
    2.0 / std::f64::consts::PI * rule.integrate(|b| b * bessel_j0(2.0 * b * s) * filter.value(b))
}

fn check_fourier(filter: &NonclassicalityFilter) -> AxiomCheck {
    let (s_min, worst) = (0..=200)
        .into_par_iter()
        .map(|i| {
            let s = 10.0 * i as f64 / 200.0;
            (s, filter_fourier_transform(filter, s))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0, f64::INFINITY), |acc, (s, v)| if v < acc.1 { (s, v) } else { acc });
    AxiomCheck {
        axiom: Axiom::FourierPositivity,
        passed: worst >= -FOURIER_TOLERANCE,
        margin: worst + FOURIER_TOLERANCE,
        detail: format!("minimum of the radial transform is {worst:.3e} at s = {s_min:.2}"),
    }
}

fn check_width_limit(filter: &NonclassicalityFilter) -> AxiomCheck {
    let widths = [1.0, 10.0, 100.0];
    let mut monotone = true;
    let mut worst_deficit: f64 = 0.0;
    for b in [0.5, 1.0, 2.0] {
        let values: Vec<f64> = widths
            .iter()
            .map(|&w| filter.ln_unit(b / w).map_or(0.0, f64::exp))
            .collect();
        monotone &= values.windows(2).all(|v| v[1] >= v[0] - 1e-12);
        worst_deficit = worst_deficit.max(1.0 - values[2]);
    }
    AxiomCheck {
        axiom: Axiom::WidthLimit,
        passed: monotone && worst_deficit < WIDTH_LIMIT_TOLERANCE,
        margin: WIDTH_LIMIT_TOLERANCE - worst_deficit,
        detail: format!(
            "largest 1 − Ω_100(b) is {worst_deficit:.3e}; values {} in w",
            if monotone { "non-decreasing" } else { "NOT monotone" }
        ),
    }
}

fn check_support(filter: &NonclassicalityFilter) -> AxiomCheck {
    let reach = (2.0 * filter.truncation_radius()).min(filter.representable_radius());
    let n = 4000;
    let (b_worst, worst) = (0..=n)
        .map(|i| {
            let b = reach * i as f64 / n as f64;
            (b, filter.ln_value_untruncated(b).unwrap_or(f64::NEG_INFINITY))
        })
        .fold((0.0, f64::INFINITY), |acc, (b, l)| if l < acc.1 { (b, l) } else { acc });
    let log10 = worst / std::f64::consts::LN_10;
    AxiomCheck {
        axiom: Axiom::FullSupport,
        passed: worst.is_finite(),
        margin: log10,
        detail: if worst.is_finite() {
            format!("Ω_w > 0 on [0, {reach:.3}]; smallest value 10^{log10:.1} at b = {b_worst:.3}")
        } else {
            format!("Ω_w vanishes at b = {b_worst:.3}")
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn normalization_matches_closed_form() {
        let n = AutocorrelationTable::unit().normalization();
        let exact = std::f64::consts::PI * (std::f64::consts::PI / 2.0).sqrt() / 2.0;
        assert_abs_diff_eq!(n, exact, epsilon = 1e-12);
        assert_abs_diff_eq!(n, 1.968_70, epsilon = 1e-5);
    }

    const OMEGA1_REFERENCE: &[(f64, f64)] = &[
        (0.25, 0.951_778_616_296_978_347_2),
        (0.5, 0.824_263_864_560_902_818_48),
        (1.0, 0.475_778_190_807_682_891_35),
        (1.5, 0.175_564_718_315_389_378_01),
        (2.0, 0.028_403_978_587_745_893_134),
        (3.0, 4.009_026_903_797_297_669_4e-6),
        (4.0, 7.237_116_488_807_978_205_5e-16),
        (6.0, 1.126_508_405_365_711_837_6e-72),
    ];

    #[test]
    fn table_matches_reference_values() {
        let table = AutocorrelationTable::unit();
        for &(s, want) in OMEGA1_REFERENCE {
            let got = table.value(s).unwrap();
            assert!((got / want - 1.0).abs() < 1e-8, "Ω₁({s}) = {got:e}, want {want:e}");
        }
        assert_eq!(table.value(0.0), Some(1.0));
        assert!(table.value(TABLE_RANGE + 0.1).is_none());
    }

    // Polar coordinates around the origin: Gauss–Legendre in ρ, periodic trapezoid in θ.
    fn polar_overlap(s: f64) -> f64 {
        let rule = CompositeRule::new(0.0, 3.5, PanelSpec { panel_length: 0.25, nodes_per_panel: 24 });
        let m = 512;
        let dtheta = 2.0 * std::f64::consts::PI / m as f64;
        let mut total = 0.0;
        for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
            let mut ring = 0.0;
            for j in 0..m {
                let c = (j as f64 * dtheta).cos();
                let shifted = r * r + 2.0 * r * s * c + s * s;
                ring += (-r.powi(4) - shifted * shifted).exp();
            }
            total += w * r * ring * dtheta;
        }
        total
    }

    #[test]
    fn polar_cubature_agrees() {
        let norm = std::f64::consts::PI * (std::f64::consts::PI / 2.0).sqrt() / 2.0;
        let table = AutocorrelationTable::unit();
        for s in [0.25, 0.5, 1.0, 1.5, 2.0] {
            let oracle = polar_overlap(s) / norm;
            let got = table.value(s).unwrap();
            assert!((got / oracle - 1.0).abs() < 1e-9, "s={s}: {got} vs {oracle}");
        }
    }

    #[test]
    fn cubature_resolution_is_converged() {
        let (n0, n1) = (reduced_overlap(0.0, CUBATURE_NODES), reduced_overlap(0.0, 2 * CUBATURE_NODES));
        for s in [0.3, 1.0, 2.5, 4.0, 7.0, 11.9] {
            let coarse = reduced_overlap(s, CUBATURE_NODES) / n0;
            let fine = reduced_overlap(s, 2 * CUBATURE_NODES) / n1;
            assert!((coarse / fine - 1.0).abs() < 1e-9, "s={s}");
        }
    }

    #[test]
    fn unit_value_and_width_scaling() {
        let f = build_autocorrelation_filter(1.0).unwrap();
        assert_eq!(filter_value(&f, 0.0), 1.0);
        let f2 = build_autocorrelation_filter(2.0).unwrap();
        assert_eq!(filter_value(&f2, 1.0), filter_value(&f, 0.5));
        for b in [0.1, 0.77, 1.3, 2.9] {
            assert_abs_diff_eq!(f2.value(b), f.value(b / 2.0), epsilon = 1e-8);
        }
    }

    #[test]
    fn values_bounded_and_positive_inside_truncation() {
        let f = build_autocorrelation_filter(1.4).unwrap();
        let r_t = f.truncation_radius();
        for i in 0..=1000 {
            let b = r_t * i as f64 / 1000.0;
            let v = f.value(b);
            assert!(v > 0.0 && v <= 1.0, "Ω({b}) = {v}");
        }
        assert_eq!(f.value(r_t * 1.001), 0.0);
        assert!(f.value(r_t * 0.999) < 1e-9);
    }

    #[test]
    fn rectangular_edges() {
        let f = NonclassicalityFilter::rectangular(2.2).unwrap();
        assert_eq!(f.value(2.1999), 1.0);
        assert_eq!(f.value(2.2001), 0.0);
        assert_eq!(f.truncation_radius(), 2.2);
    }

    #[test]
    fn invalid_widths() {
        assert!(build_autocorrelation_filter(0.0).is_err());
        assert!(build_autocorrelation_filter(-1.0).is_err());
        assert!(NonclassicalityFilter::rectangular(0.0).is_err());
        assert!(matches!(build_autocorrelation_filter(8.0), Err(Error::WidthTooLarge { .. })));
    }

    #[test]
    fn truncation_covers_noise_weight() {
        for w in [0.5, 1.0, 1.4, 2.0, 2.4, 5.0] {
            let f = build_autocorrelation_filter(w).unwrap();
            let r = f.truncation_radius();
            for k in 0..50 {
                let b = r + 0.05 * k as f64;
                let l = f.ln_value_untruncated(b);
                if let Some(l) = l {
                    assert!(l < TRUNCATION_LEVEL.ln() && l + 0.5 * b * b < TRUNCATION_LEVEL.ln(), "w={w} b={b}");
                }
            }
        }
    }

    #[test]
    fn autocorrelation_passes_all_axioms() {
        for w in [0.5, 1.0, 1.4, 2.0] {
            let report = verify_filter_axioms(&build_autocorrelation_filter(w).unwrap());
            assert!(report.all_passed(), "{report:#?}");
        }
    }

    #[test]
    fn rectangular_fails_positivity_and_support() {
        let report = verify_filter_axioms(&NonclassicalityFilter::rectangular(2.2).unwrap());
        assert!(!report.check(Axiom::FourierPositivity).passed);
        assert!(!report.check(Axiom::FullSupport).passed);
        assert!(report.check(Axiom::WidthLimit).passed);
    }

    #[test]
    fn slow_gaussian_fails_decay() {
        let slow = NonclassicalityFilter::custom("exp(-b^2/4)", 1.0, |s| (-0.25 * s * s).exp()).unwrap();
        assert!(!verify_filter_axioms(&slow).check(Axiom::Decay).passed);
        let fast = NonclassicalityFilter::custom("exp(-b^2)", 1.0, |s| (-s * s).exp()).unwrap();
        let report = verify_filter_axioms(&fast);
        assert!(report.check(Axiom::Decay).passed, "{report:#?}");
        assert!(report.check(Axiom::FourierPositivity).passed);
    }

    #[test]
    fn table_export_has_unit_start() {
        let t = AutocorrelationTable::unit().to_table();
        assert_eq!(t.rows(), TABLE_NODES);
        assert_eq!(t.column("omega1").unwrap()[0], 1.0);
    }
}
