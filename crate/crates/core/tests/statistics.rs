//! Monte Carlo checks of the sampler, the estimators and the significance analysis
//! against the analytic model.

use nonclassical::analysis::{default_widths, reconstruct, scan_width, significance, STANDARD_SEEDS};
use nonclassical::charfunc::{estimate_cf, uniform_grid, SpatsCf, DEFAULT_STEP};
use nonclassical::filters::build_autocorrelation_filter;
use nonclassical::quasiprob::{default_alpha_grid, profile};
use nonclassical::spats::{cf_theoretical, quadrature_cdf, sample_quadratures, SpatsParams};

#[test]
fn kolmogorov_smirnov_against_analytic_cdf() {
    for (n, e, seed) in [(0.49, 0.62, 1), (1.11, 0.6, 2), (0.0, 1.0, 3), (5.0, 0.3, 4)] {
        let p = SpatsParams::new(n, e).unwrap();
        let mut xs = sample_quadratures(&p, 100_000, seed).unwrap().samples().to_vec();
        xs.sort_by(f64::total_cmp);
        let count = xs.len() as f64;
        let d = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = quadrature_cdf(&p, x);
                (f - i as f64 / count).abs().max(((i + 1) as f64 / count - f).abs())
            })
            .fold(0.0, f64::max);
        let critical = 1.628 / count.sqrt();
        assert!(d < critical, "n̄={n} η={e}: D = {d:.5} ≥ {critical:.5}");
    }
}

#[test]
fn cf_estimate_within_four_sigma_of_theory() {
    let p = SpatsParams::new(0.49, 0.62).unwrap();
    let data = sample_quadratures(&p, 1_000_000, 17).unwrap();
    let cf = estimate_cf(&data, &uniform_grid(3.0, DEFAULT_STEP)).unwrap();
    let values = cf.values();
    let variances = cf.variances();
    let inside = cf
        .radii()
        .iter()
        .enumerate()
        .filter(|&(i, &b)| (values[i].re - cf_theoretical(&p, b)).abs() <= 4.0 * variances[i].sqrt() || b == 0.0)
        .count();
    let fraction = inside as f64 / cf.radii().len() as f64;
    assert!(fraction >= 0.99, "{fraction}");
}

#[test]
fn quasiprobability_within_four_sigma_of_theory() {
    let p = SpatsParams::new(0.49, 0.62).unwrap();
    let f = build_autocorrelation_filter(1.4).unwrap();
    let grid = default_alpha_grid();
    let data = sample_quadratures(&p, 1_000_000, 23).unwrap();
    let empirical = reconstruct(&data, &f, &grid).unwrap();
    let theory = profile(&SpatsCf(p), &f, &grid).unwrap();
    let inside = (0..grid.len())
        .filter(|&i| (empirical.values[i] - theory.values[i]).abs() <= 4.0 * empirical.sigmas[i])
        .count();
    assert!(inside as f64 / grid.len() as f64 >= 0.99, "{inside} of {}", grid.len());
}

#[test]
fn negativity_sits_at_the_origin() {
    let grid = default_alpha_grid();
    for (n, e, w) in [(0.49, 0.62, 1.4), (1.11, 0.6, 1.3), (0.49, 0.8, 1.0)] {
        let p = SpatsParams::new(n, e).unwrap();
        let f = build_autocorrelation_filter(w).unwrap();
        let prof = reconstruct(&sample_quadratures(&p, 100_000, 1).unwrap(), &f, &grid).unwrap();
        let s = significance(&prof).unwrap();
        assert_eq!(s.alpha_at_min, 0.0, "n̄={n} η={e} w={w}");
    }
}

#[test]
fn width_scan_has_an_interior_optimum() {
    let mut widths = vec![0.1];
    widths.extend(default_widths());
    widths.push(5.0);
    let grid = default_alpha_grid();
    for (n, e) in [(0.49, 0.62), (1.11, 0.6)] {
        let p = SpatsParams::new(n, e).unwrap();
        for &seed in &STANDARD_SEEDS {
            let scan = scan_width(&sample_quadratures(&p, 100_000, seed).unwrap(), &widths, &grid).unwrap();
            let best = scan.best.s_min;
            // A vanishing width leaves no negativity at all: S stays positive.
            let first = scan.significances[0].s_min;
            let last = scan.significances.last().unwrap().s_min;
            assert!(first > 0.0 && first > best, "n̄={n} seed {seed}: w=0.1 S_min {first}");
            assert!(last.abs() < best.abs(), "n̄={n} seed {seed}: w=5 S_min {last} vs {best}");
        }
    }
}
