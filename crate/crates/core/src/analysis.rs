//! Significance of negativities and the studies built on it: filter-width scans,
//! the systematic error of a hard cutoff, loss rescaling and efficiency sweeps.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bessel::bessel_j0;
use crate::charfunc::{estimate_cf, uniform_grid, RadialCfEstimate, SpatsCf, DEFAULT_STEP};
use crate::error::{Error, Result};
use crate::filters::NonclassicalityFilter;
use crate::io::Table;
use crate::quadrature::{CompositeRule, PanelSpec};
use crate::quasiprob::{IntegrationSettings, QuasiprobProfile, TransformPlan};
use crate::spats::{cf_theoretical, sample_quadratures, wigner_origin, QuadratureDataset, SpatsParams};

/// Seeds used for every statistical comparison.
pub const STANDARD_SEEDS: [u64; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

pub const DEFAULT_WIDTH_MIN: f64 = 0.6;
pub const DEFAULT_WIDTH_MAX: f64 = 2.4;
pub const DEFAULT_WIDTH_STEP: f64 = 0.1;

/// Below this `|Φ_th|` the neglected tail is cut off.
const TAIL_LEVEL: f64 = 1e-12;

/// `min, min + step, …` up to `max` inclusive, rounded to 12 decimals.
pub fn width_range(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(min > 0.0 && min.is_finite()) {
        return Err(Error::invalid("wmin", format!("{min} is not a finite value > 0")));
    }
    if !(max >= min && max.is_finite()) {
        return Err(Error::invalid("wmax", format!("{max} is below wmin {min}")));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::invalid("step", format!("{step} is not a finite value > 0")));
    }
    let n = ((max - min) / step + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|i| ((min + step * i as f64) * 1e12).round() / 1e12)
        .collect())
}

pub fn default_widths() -> Vec<f64> {
    width_range(DEFAULT_WIDTH_MIN, DEFAULT_WIDTH_MAX, DEFAULT_WIDTH_STEP).expect("valid defaults")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Significance {
    /// Smallest `P_Ω/σ` over the grid.
    pub s_min: f64,
    pub alpha_at_min: f64,
    /// `P_Ω/σ` where `P_Ω` itself is smallest, the deepest negativity.
    pub s_at_p_min: f64,
    pub alpha_at_p_min: f64,
}

/// Minimum of `S = P_Ω/σ` over the points with `σ > 0`.
pub fn significance(profile: &QuasiprobProfile) -> Result<Significance> {
    let mut best: Option<(f64, f64)> = None;
    let mut deepest: Option<(f64, f64, f64)> = None;
    for ((&a, &p), &s) in profile.alpha_radii.iter().zip(&profile.values).zip(&profile.sigmas) {
        if s <= 0.0 {
            continue;
        }
        let z = p / s;
        if best.is_none_or(|b| z < b.0) {
            best = Some((z, a));
        }
        if deepest.is_none_or(|d| p < d.0) {
            deepest = Some((p, z, a));
        }
    }
    let (s_min, alpha_at_min) = best.ok_or(Error::ZeroSigma)?;
    let (_, s_at_p_min, alpha_at_p_min) = deepest.expect("set together with best");
    Ok(Significance {
        s_min,
        alpha_at_min,
        s_at_p_min,
        alpha_at_p_min,
    })
}

/// Radial grid covering the filter's support at the default step.
pub fn cf_grid_for(filter: &NonclassicalityFilter) -> Vec<f64> {
    uniform_grid(filter.truncation_radius(), DEFAULT_STEP)
}

/// Estimate the characteristic function over the filter's support and evaluate the profile.
pub fn reconstruct(
    data: &QuadratureDataset,
    filter: &NonclassicalityFilter,
    alpha_grid: &[f64],
) -> Result<QuasiprobProfile> {
    let cf = estimate_cf(data, &cf_grid_for(filter))?;
    TransformPlan::new(&cf, filter, IntegrationSettings::default())?.profile(alpha_grid)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthScanResult {
    pub widths: Vec<f64>,
    pub significances: Vec<Significance>,
    pub best_width: f64,
    pub best: Significance,
}

impl WidthScanResult {
    /// CSV export with columns `w, S_min, alpha_at_min`.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["w", "S_min", "alpha_at_min"]).with_meta("best_width", self.best_width);
        for (&w, s) in self.widths.iter().zip(&self.significances) {
            t.push_row(&[w, s.s_min, s.alpha_at_min]);
        }
        t
    }
}

fn check_widths(widths: &[f64]) -> Result<()> {
    if widths.is_empty() {
        return Err(Error::invalid("widths", "list is empty"));
    }
    if let Some(w) = widths.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
        return Err(Error::invalid("widths", format!("{w} is not a finite value > 0")));
    }
    Ok(())
}

/// `S_min` for each autocorrelation-filter width, from one shared CF estimate.
pub fn scan_width(data: &QuadratureDataset, widths: &[f64], alpha_grid: &[f64]) -> Result<WidthScanResult> {
    check_widths(widths)?;
    let filters = widths
        .iter()
        .map(|&w| NonclassicalityFilter::autocorrelation(w))
        .collect::<Result<Vec<_>>>()?;
    let reach = filters.iter().map(|f| f.truncation_radius()).fold(0.0, f64::max);
    let cf = estimate_cf(data, &uniform_grid(reach, DEFAULT_STEP))?;
    scan_with_estimate(&cf, widths, &filters, alpha_grid)
}

fn scan_with_estimate(
    cf: &RadialCfEstimate,
    widths: &[f64],
    filters: &[NonclassicalityFilter],
    alpha_grid: &[f64],
) -> Result<WidthScanResult> {
    let significances = filters
        .iter()
        .map(|f| significance(&TransformPlan::new(cf, f, IntegrationSettings::default())?.profile(alpha_grid)?))
        .collect::<Result<Vec<_>>>()?;
    let (best_idx, _) = widths
        .iter()
        .zip(&significances)
        .enumerate()
        .fold((0usize, (f64::INFINITY, f64::INFINITY)), |acc, (i, (&w, s))| {
            let (s_best, w_best) = acc.1;
            if s.s_min < s_best || (s.s_min == s_best && w < w_best) {
                (i, (s.s_min, w))
            } else {
                acc
            }
        });
    Ok(WidthScanResult {
        widths: widths.to_vec(),
        best_width: widths[best_idx],
        best: significances[best_idx],
        significances,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystematicErrorBand {
    pub alpha_radii: Vec<f64>,
    pub bias: Vec<f64>,
    pub cutoff: f64,
    /// Where the tail integral stops.
    pub tail_end: f64,
}

impl SystematicErrorBand {
    pub fn max_abs_bias(&self) -> f64 {
        self.bias.iter().fold(0.0, |m, b| m.max(b.abs()))
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["alpha", "bias"]).with_meta("cutoff", self.cutoff);
        for (&a, &b) in self.alpha_radii.iter().zip(&self.bias) {
            t.push_row(&[a, b]);
        }
        t
    }
}

/// Smallest `b ≥ from` beyond which `|Φ_th| < 1e-12` everywhere.
fn tail_end(params: &SpatsParams, from: f64) -> f64 {
    let decay = params.nbar() * params.eta();
    // |Φ_th| decreases monotonically once b² > 1/decay.
    let monotone_from = (1.0 / decay).sqrt();
    let step = 0.01;
    let mut b = from;
    while b < monotone_from || cf_theoretical(params, b).abs() >= TAIL_LEVEL {
        b += step;
    }
    b
}

/// Systematic error of the hard cutoff: the transform of the theoretical tail beyond it,
/// `(2/π) ∫_{β_c}^∞ b J₀(2b|α|) Φ_th(b) db`.
pub fn rect_systematic_error(
    reference: &SpatsParams,
    cutoff: f64,
    alpha_grid: &[f64],
) -> Result<SystematicErrorBand> {
    if !(cutoff > 0.0 && cutoff.is_finite()) {
        return Err(Error::invalid("cutoff", format!("{cutoff} is not a finite value > 0")));
    }
    if reference.nbar() * reference.eta() == 0.0 {
        return Err(Error::invalid(
            "nbar",
            "the characteristic function of a pure single photon does not decay; the tail integral diverges",
        ));
    }
    let end = tail_end(reference, cutoff);
    let bias = if end <= cutoff {
        vec![0.0; alpha_grid.len()]
    } else {
        let rule = CompositeRule::new(
            cutoff,
            end,
            PanelSpec {
                panel_length: 0.5,
                nodes_per_panel: 32,
            },
        );
        alpha_grid
            .par_iter()
            .map(|&a| 2.0 / PI * rule.integrate(|b| b * bessel_j0(2.0 * b * a) * cf_theoretical(reference, b)))
            .collect()
    };
    Ok(SystematicErrorBand {
        alpha_radii: alpha_grid.to_vec(),
        bias,
        cutoff,
        tail_end: end.max(cutoff),
    })
}

/// Largest deviation between `η·P_Ω(α; η, w)` and `P_Ω(α/√η; 1, √η·w)`, both from the
/// analytic characteristic function under the autocorrelation filter.
pub fn efficiency_rescale_check(params: &SpatsParams, w: f64, alpha_grid: &[f64]) -> Result<f64> {
    let eta = params.eta();
    let lossless = SpatsParams::new(params.nbar(), 1.0)?;
    let lossy_plan = TransformPlan::values_only(
        &SpatsCf(*params),
        &NonclassicalityFilter::autocorrelation(w)?,
        IntegrationSettings::default(),
    )?;
    let rescaled_plan = TransformPlan::values_only(
        &SpatsCf(lossless),
        &NonclassicalityFilter::autocorrelation(eta.sqrt() * w)?,
        IntegrationSettings::default(),
    )?;
    Ok(alpha_grid
        .par_iter()
        .map(|&a| (eta * lossy_plan.value(a) - rescaled_plan.value(a / eta.sqrt())).abs())
        .reduce(|| 0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WidthStrategy {
    Fixed(f64),
    /// Use the most significant of these widths for every dataset.
    Scanned(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyRow {
    pub eta: f64,
    pub mean_s_min: f64,
    pub per_seed: Vec<SeedOutcome>,
    pub wigner_origin: f64,
}

impl EfficiencyRow {
    pub fn wigner_origin_sign(&self) -> f64 {
        if self.wigner_origin == 0.0 {
            0.0
        } else {
            self.wigner_origin.signum()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub width: f64,
    pub significance: Significance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencySweep {
    pub nbar: f64,
    pub samples: usize,
    pub rows: Vec<EfficiencyRow>,
}

impl EfficiencySweep {
    /// CSV export with columns `eta, mean_S, wigner_origin_sign`.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["eta", "mean_S", "wigner_origin_sign", "wigner_origin"])
            .with_meta("nbar", self.nbar)
            .with_meta("N", self.samples);
        for r in &self.rows {
            t.push_row(&[r.eta, r.mean_s_min, r.wigner_origin_sign(), r.wigner_origin]);
        }
        t
    }
}

/// Simulates every `(η, seed)` pair, reconstructs with the chosen width strategy and
/// averages `S_min` over seeds.
pub fn efficiency_sweep(
    nbar: f64,
    etas: &[f64],
    n: usize,
    seeds: &[u64],
    strategy: &WidthStrategy,
    alpha_grid: &[f64],
) -> Result<EfficiencySweep> {
    if etas.is_empty() {
        return Err(Error::invalid("etas", "list is empty"));
    }
    if seeds.is_empty() {
        return Err(Error::invalid("seeds", "list is empty"));
    }
    let params = etas
        .iter()
        .map(|&e| SpatsParams::new(nbar, e))
        .collect::<Result<Vec<_>>>()?;
    let widths = match strategy {
        WidthStrategy::Fixed(w) => vec![*w],
        WidthStrategy::Scanned(ws) => ws.clone(),
    };
    check_widths(&widths)?;
    let filters = widths
        .iter()
        .map(|&w| NonclassicalityFilter::autocorrelation(w))
        .collect::<Result<Vec<_>>>()?;
    let reach = filters.iter().map(|f| f.truncation_radius()).fold(0.0, f64::max);
    let grid = uniform_grid(reach, DEFAULT_STEP);
    let items: Vec<(usize, u64)> = (0..etas.len())
        .flat_map(|i| seeds.iter().map(move |&s| (i, s)))
        .collect();
    let outcomes = items
        .par_iter()
        .map(|&(i, seed)| {
            let data = sample_quadratures(&params[i], n, seed)?;
            let cf = estimate_cf(&data, &grid)?;
            let scan = scan_with_estimate(&cf, &widths, &filters, alpha_grid)?;
            Ok(SeedOutcome {
                seed,
                width: scan.best_width,
                significance: scan.best,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = params
        .iter()
        .zip(outcomes.chunks(seeds.len()))
        .map(|(p, chunk)| EfficiencyRow {
            eta: p.eta(),
            mean_s_min: chunk.iter().map(|o| o.significance.s_min).sum::<f64>() / chunk.len() as f64,
            per_seed: chunk.to_vec(),
            wigner_origin: wigner_origin(p),
        })
        .collect();
    Ok(EfficiencySweep {
        nbar,
        samples: n,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffOutcome {
    pub cutoff: f64,
    pub significance: Significance,
    pub p_origin: f64,
    pub sigma_origin: f64,
    pub max_abs_bias: f64,
}

/// Hard-cutoff reconstructions of one dataset together with the a-priori systematic
/// error of each cutoff, taken from the dataset's own parameters.
pub fn compare_rect(data: &QuadratureDataset, cutoffs: &[f64], alpha_grid: &[f64]) -> Result<Vec<CutoffOutcome>> {
    if cutoffs.is_empty() {
        return Err(Error::invalid("cutoffs", "list is empty"));
    }
    let filters = cutoffs
        .iter()
        .map(|&c| NonclassicalityFilter::rectangular(c))
        .collect::<Result<Vec<_>>>()?;
    let reach = cutoffs.iter().cloned().fold(0.0, f64::max);
    let cf = estimate_cf(data, &uniform_grid(reach, DEFAULT_STEP))?;
    let mut grid = alpha_grid.to_vec();
    if grid.first() != Some(&0.0) {
        grid.insert(0, 0.0);
    }
    filters
        .iter()
        .map(|f| {
            let prof = TransformPlan::new(&cf, f, IntegrationSettings::default())?.profile(&grid)?;
            let band = rect_systematic_error(&data.params(), f.width(), alpha_grid)?;
            let sig = significance(&QuasiprobProfile {
                alpha_radii: alpha_grid.to_vec(),
                values: prof.values[grid.len() - alpha_grid.len()..].to_vec(),
                sigmas: prof.sigmas[grid.len() - alpha_grid.len()..].to_vec(),
                ..prof.clone()
            })?;
            Ok(CutoffOutcome {
                cutoff: f.width(),
                significance: sig,
                p_origin: prof.values[0],
                sigma_origin: prof.sigmas[0],
                max_abs_bias: band.max_abs_bias(),
            })
        })
        .collect()
}

/// CSV export with columns `cutoff, S_min, alpha_at_min, p0, sigma0, max_abs_bias`.
pub fn cutoff_table(rows: &[CutoffOutcome]) -> Table {
    let mut t = Table::new(&["cutoff", "S_min", "alpha_at_min", "p0", "sigma0", "max_abs_bias"]);
    for r in rows {
        t.push_row(&[
            r.cutoff,
            r.significance.s_min,
            r.significance.alpha_at_min,
            r.p_origin,
            r.sigma_origin,
            r.max_abs_bias,
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::FilterDescriptor;
    use crate::quasiprob::default_alpha_grid;

    fn profile(values: Vec<f64>, sigmas: Vec<f64>) -> QuasiprobProfile {
        QuasiprobProfile {
            alpha_radii: (0..values.len()).map(|i| i as f64 * 0.1).collect(),
            values,
            sigmas,
            filter: FilterDescriptor {
                kind: crate::filters::FilterKind::Rectangular,
                width: 1.0,
                truncation_radius: 1.0,
                name: None,
            },
            source_count: Some(10),
            settings: IntegrationSettings::default(),
        }
    }

    #[test]
    fn significance_of_positive_profile() {
        let s = significance(&profile(vec![0.3, 0.2, 0.5], vec![0.1, 0.1, 0.1])).unwrap();
        assert!(s.s_min > 0.0);
        assert!((s.alpha_at_min - 0.1).abs() < 1e-15);
    }

    #[test]
    fn significance_skips_zero_sigma() {
        let s = significance(&profile(vec![-1.0, -0.2, 0.5], vec![0.0, 0.1, 0.1])).unwrap();
        assert_eq!(s.s_min, -2.0);
        assert!(matches!(significance(&profile(vec![1.0], vec![0.0])), Err(Error::ZeroSigma)));
    }

    #[test]
    fn deepest_negativity_can_differ_from_minimum_significance() {
        let s = significance(&profile(vec![-1.0, -0.5], vec![1.0, 0.1])).unwrap();
        assert_eq!((s.s_min, s.alpha_at_min), (-5.0, 0.1));
        assert_eq!((s.s_at_p_min, s.alpha_at_p_min), (-1.0, 0.0));
    }

    #[test]
    fn width_ranges() {
        let ws = default_widths();
        assert_eq!(ws.len(), 19);
        assert_eq!(ws[7], 1.3);
        assert_eq!(width_range(0.8, 2.0, 0.1).unwrap().last(), Some(&2.0));
        assert!(width_range(0.0, 1.0, 0.1).is_err());
        assert!(width_range(1.0, 0.5, 0.1).is_err());
    }

    #[test]
    fn single_width_scan() {
        let p = SpatsParams::new(0.49, 0.62).unwrap();
        let data = sample_quadratures(&p, 20_000, 4).unwrap();
        let r = scan_width(&data, &[1.2], &[0.0, 0.5]).unwrap();
        assert_eq!(r.best_width, 1.2);
        assert!(scan_width(&data, &[], &[0.0]).is_err());
        assert!(scan_width(&data, &[1.0, -1.0], &[0.0]).is_err());
    }

    #[test]
    fn rescaling_identity_on_parameter_grid() {
        let grid = default_alpha_grid();
        for eta in [0.36, 0.62, 1.0] {
            for w in [1.0, 1.4, 2.0] {
                let p = SpatsParams::new(0.49, eta).unwrap();
                let dev = efficiency_rescale_check(&p, w, &grid).unwrap();
                let tol = if eta == 1.0 { 1e-10 } else { 1e-6 };
                assert!(dev < tol, "η={eta} w={w}: {dev:e}");
            }
        }
        let dev = efficiency_rescale_check(&SpatsParams::new(1.11, 0.36).unwrap(), 1.0, &grid).unwrap();
        assert!(dev < 1e-6);
    }

    #[test]
    fn systematic_error_vanishes_for_large_cutoff() {
        let p = SpatsParams::new(0.49, 0.62).unwrap();
        let band = rect_systematic_error(&p, 12.0, &default_alpha_grid()).unwrap();
        assert!(band.max_abs_bias() < 1e-10);
    }

    #[test]
    fn systematic_error_dominates_at_small_cutoff() {
        let p = SpatsParams::new(0.49, 0.62).unwrap();
        let grid = default_alpha_grid();
        let band = rect_systematic_error(&p, 2.2, &grid).unwrap();
        let f = NonclassicalityFilter::rectangular(2.2).unwrap();
        let p0 = crate::quasiprob::hankel_p(&SpatsCf(p), &f, 0.0).unwrap();
        assert!(band.max_abs_bias() > p0.abs(), "{} vs {p0}", band.max_abs_bias());
    }

    #[test]
    fn systematic_error_decreases_beyond_last_zero() {
        let p = SpatsParams::new(0.49, 0.62).unwrap();
        let c = (1.0 + p.nbar()) * p.eta();
        let zero = (1.0 / c).sqrt();
        let grid = default_alpha_grid();
        let mut last = f64::INFINITY;
        for k in 1..20 {
            let cutoff = zero + 0.25 * k as f64;
            let m = rect_systematic_error(&p, cutoff, &grid).unwrap().max_abs_bias();
            assert!(m < last, "cutoff {cutoff}");
            last = m;
        }
    }

    #[test]
    fn systematic_error_rejects_undamped_tail() {
        let p = SpatsParams::new(0.0, 0.8).unwrap();
        assert!(rect_systematic_error(&p, 2.0, &[0.0]).is_err());
        assert!(rect_systematic_error(&SpatsParams::new(0.5, 0.8).unwrap(), 0.0, &[0.0]).is_err());
    }

    #[test]
    fn sweep_rows_follow_input_order() {
        let sweep = efficiency_sweep(0.49, &[0.62, 0.5], 5_000, &[1, 2], &WidthStrategy::Fixed(1.4), &[0.0, 0.5]).unwrap();
        assert_eq!(sweep.rows.len(), 2);
        assert_eq!(sweep.rows[0].eta, 0.62);
        assert_eq!(sweep.rows[0].per_seed.len(), 2);
        assert_eq!(sweep.rows[1].wigner_origin_sign(), 0.0);
        assert_eq!(sweep.rows[0].wigner_origin_sign(), -1.0);
    }
}
