//! Single-photon-added thermal states (SPATS) observed with a lossy detector.
//!
//! Closed forms for the characteristic function, the Glauber–Sudarshan P function,
//! the Wigner value at the origin and the phase-averaged quadrature density, plus an
//! exact sampler for homodyne quadratures.
//!
//! Quadrature convention: the vacuum has quadrature variance 1, i.e. the vacuum
//! quadrature characteristic function is `exp(-k²/2)`. The sampled characteristic
//! function `Φ(b) = exp(b²/2)·E[exp(i b x)]` used by [`crate::charfunc`] relies on it.
//! The convention is recorded in every dataset file.

use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Name written to dataset metadata for the quadrature normalization.
pub const QUADRATURE_CONVENTION: &str = "vacuum-variance-1";

/// Samples drawn from one generator stream; chunk `i` of a dataset uses stream `i`.
pub const SAMPLE_CHUNK: usize = 1 << 16;

/// Mean thermal photon number and detection efficiency of a lossy SPATS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatsParams {
    nbar: f64,
    eta: f64,
}

impl SpatsParams {
    pub fn new(nbar: f64, eta: f64) -> Result<Self> {
        if !(nbar.is_finite() && nbar >= 0.0) {
            return Err(Error::invalid("nbar", format!("{nbar} is not a finite value >= 0")));
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::invalid("eta", format!("{eta} is not in (0, 1]")));
        }
        Ok(SpatsParams { nbar, eta })
    }

    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Gaussian scale `a = n̄η + 1/2` of the quadrature characteristic function.
    fn scale(&self) -> f64 {
        self.nbar * self.eta + 0.5
    }

    /// Curvature `c = (1 + n̄)η` of the photon-added factor.
    fn curvature(&self) -> f64 {
        (1.0 + self.nbar) * self.eta
    }
}

impl fmt::Display for SpatsParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "nbar={} eta={}", self.nbar, self.eta)
    }
}

/// Characteristic function of the lossy state, `Φ(√η b)`.
pub fn cf_theoretical(params: &SpatsParams, b: f64) -> f64 {
    let s = params.eta * b * b;
    (1.0 - (1.0 + params.nbar) * s) * (-params.nbar * s).exp()
}

/// Regular P function of the lossy state at radius `|α|`.
///
/// Losses only rescale the lossless P function: `P(α; η) = P(α/√η)/η`.
pub fn p_theoretical(params: &SpatsParams, alpha_abs: f64) -> Result<f64> {
    let n = params.nbar;
    if n == 0.0 {
        return Err(Error::SingularP(
            "nbar = 0 is the single-photon state, which has no regular P function".into(),
        ));
    }
    let r2 = alpha_abs * alpha_abs / params.eta;
    let lossless = ((1.0 + n) * r2 - n) * (-r2 / n).exp() / (PI * n * n * n);
    Ok(lossless / params.eta)
}

/// Wigner function at the phase-space origin, `(1/π)(1/2 − η)/(n̄η + 1/2)²`.
///
/// The sign depends only on `η`: the value vanishes at `η = 1/2` for every `n̄`.
pub fn wigner_origin(params: &SpatsParams) -> f64 {
    let a = params.scale();
    (0.5 - params.eta) / (PI * a * a)
}

/// Phase-averaged quadrature density.
pub fn quadrature_pdf(params: &SpatsParams, x: f64) -> f64 {
    let a = params.scale();
    let c = params.curvature();
    let gauss = (-x * x / (4.0 * a)).exp() / (2.0 * (PI * a).sqrt());
    gauss * (1.0 - c / (2.0 * a) + c * x * x / (4.0 * a * a))
}

/// Cumulative distribution of [`quadrature_pdf`].
pub fn quadrature_cdf(params: &SpatsParams, x: f64) -> f64 {
    let (photon_weight, sigma) = mixture(params);
    let z = x / sigma;
    let normal_cdf = 0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2);
    let normal_pdf = (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
    normal_cdf - photon_weight * z * normal_pdf
}

/// Analytic second moment `1 + 2η(2n̄ + 1)`.
pub fn quadrature_second_moment(params: &SpatsParams) -> f64 {
    1.0 + 2.0 * params.eta * (2.0 * params.nbar + 1.0)
}

/// The density is `(1 − q)·N(0, σ²) + q·x²N(0, σ²)/σ²` with `σ² = 2a`, `q = c/(2a)`.
fn mixture(params: &SpatsParams) -> (f64, f64) {
    let a = params.scale();
    let q = (params.curvature() / (2.0 * a)).min(1.0);
    (q, (2.0 * a).sqrt())
}

/// Homodyne quadrature samples with the parameters and seed that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureDataset {
    samples: Vec<f64>,
    params: SpatsParams,
    seed: u64,
}

impl QuadratureDataset {
    pub fn new(samples: Vec<f64>, params: SpatsParams, seed: u64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(QuadratureDataset {
            samples,
            params,
            seed,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn params(&self) -> SpatsParams {
        self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn count(&self) -> usize {
        self.samples.len()
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.count() as f64
    }

    pub fn second_moment(&self) -> f64 {
        self.samples.iter().map(|x| x * x).sum::<f64>() / self.count() as f64
    }

    /// Writes the dataset as CSV: `# key=value` metadata lines, a header `x`, one value per row.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::with_capacity(24 * self.samples.len() + 128);
        out.push_str(&format!("# nbar={:?}\n", self.params.nbar));
        out.push_str(&format!("# eta={:?}\n", self.params.eta));
        out.push_str(&format!("# seed={}\n", self.seed));
        out.push_str(&format!("# count={}\n", self.samples.len()));
        out.push_str(&format!("# convention={QUADRATURE_CONVENTION}\n"));
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(["x"])?;
        for x in &self.samples {
            wtr.write_record([format!("{x:?}")])?;
        }
        let body = wtr.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
        out.push_str(std::str::from_utf8(&body).expect("csv output is ascii"));
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let meta = crate::io::parse_metadata(&text);
        let get = |key: &str| -> Result<&str> {
            meta.get(key)
                .map(String::as_str)
                .ok_or_else(|| Error::data(path, format!("missing `# {key}=` metadata")))
        };
        let parse_f = |key: &str| -> Result<f64> {
            get(key)?
                .parse::<f64>()
                .map_err(|e| Error::data(path, format!("bad `{key}` metadata: {e}")))
        };
        let params = SpatsParams::new(parse_f("nbar")?, parse_f("eta")?)
            .map_err(|e| Error::data(path, e.to_string()))?;
        let seed = get("seed")?
            .parse::<u64>()
            .map_err(|e| Error::data(path, format!("bad `seed` metadata: {e}")))?;
        let samples = crate::io::read_column(path, &text, "x")?;
        if samples.is_empty() {
            return Err(Error::data(path, "dataset contains no samples"));
        }
        if let Some(count) = meta.get("count") {
            let count: usize = count
                .parse()
                .map_err(|e| Error::data(path, format!("bad `count` metadata: {e}")))?;
            if count != samples.len() {
                return Err(Error::data(
                    path,
                    format!("metadata count={count} but {} rows", samples.len()),
                ));
            }
        }
        QuadratureDataset::new(samples, params, seed)
    }
}

/// Draws `n` independent quadratures from [`quadrature_pdf`].
///
/// Generator: ChaCha8 seeded with `seed`; the samples are split into chunks of
/// [`SAMPLE_CHUNK`] and chunk `i` draws from stream `i` of that generator, so the
/// output is identical for any number of worker threads. Each draw takes a uniform
/// to pick the mixture component, then either one standard normal (thermal part)
/// or three normals and a uniform sign (the `χ₃`-distributed photon-added part).
pub fn sample_quadratures(params: &SpatsParams, n: usize, seed: u64) -> Result<QuadratureDataset> {
    if n == 0 {
        return Err(Error::invalid("samples", "at least one sample is required"));
    }
    let (photon_weight, sigma) = mixture(params);
    let chunks = n.div_ceil(SAMPLE_CHUNK);
    let samples: Vec<f64> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|chunk| {
            let len = SAMPLE_CHUNK.min(n - chunk * SAMPLE_CHUNK);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            (0..len)
                .map(|_| draw(&mut rng, photon_weight, sigma))
                .collect::<Vec<_>>()
        })
        .collect();
    QuadratureDataset::new(samples, *params, seed)
}

fn draw<R: Rng>(rng: &mut R, photon_weight: f64, sigma: f64) -> f64 {
    let u: f64 = rng.random();
    if u < photon_weight {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let z3: f64 = rng.sample(StandardNormal);
        let magnitude = (z1 * z1 + z2 * z2 + z3 * z3).sqrt();
        if rng.random::<bool>() {
            sigma * magnitude
        } else {
            -sigma * magnitude
        }
    } else {
        sigma * rng.sample::<f64, _>(StandardNormal)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_adaptive;
    use approx::assert_abs_diff_eq;

    fn params(nbar: f64, eta: f64) -> SpatsParams {
        SpatsParams::new(nbar, eta).unwrap()
    }

    #[test]
    fn rejects_out_of_range_params() {
        assert!(SpatsParams::new(-0.1, 0.5).is_err());
        assert!(SpatsParams::new(f64::NAN, 0.5).is_err());
        assert!(SpatsParams::new(0.5, 0.0).is_err());
        assert!(SpatsParams::new(0.5, 1.01).is_err());
        assert!(SpatsParams::new(0.0, 1.0).is_ok());
    }

    #[test]
    fn characteristic_function_values() {
        for p in [params(0.0, 1.0), params(0.49, 0.62), params(5.0, 0.3)] {
            assert_eq!(cf_theoretical(&p, 0.0), 1.0);
        }
        assert_abs_diff_eq!(
            cf_theoretical(&params(0.49, 1.0), 1.0),
            -0.300_186_933_150_363_87,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            cf_theoretical(&params(0.49, 0.62), 1.0),
            0.056_236_244_147_714_685,
            epsilon = 1e-15
        );
    }

    #[test]
    fn p_function_values() {
        assert_abs_diff_eq!(
            p_theoretical(&params(0.49, 1.0), 0.0).unwrap(),
            -1.325_738_801_265_267_3,
            epsilon = 1e-13
        );
        assert_abs_diff_eq!(p_theoretical(&params(1.0, 1.0), 0.5f64.sqrt()).unwrap(), 0.0, epsilon = 1e-16);
        assert!(matches!(p_theoretical(&params(0.0, 1.0), 0.3), Err(Error::SingularP(_))));
    }

    #[test]
    fn p_function_is_normalized() {
        for (n, e) in [(0.49, 1.0), (0.49, 0.62), (1.11, 0.6), (5.0, 0.3)] {
            let p = params(n, e);
            let r_max = 10.0 * (n + 1.0f64).sqrt();
            let (v, _) = integrate_adaptive(
                |r| 2.0 * PI * r * p_theoretical(&p, r).unwrap(),
                0.0,
                r_max,
                1e-12,
            );
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn wigner_origin_matches_defining_integral() {
        for (n, e) in [(0.49, 0.5), (0.49, 0.62), (2.0, 0.3), (0.0, 1.0), (1.11, 0.6)] {
            let p = params(n, e);
            let (v, _) = integrate_adaptive(
                |b| 2.0 / PI * b * cf_theoretical(&p, b) * (-0.5 * b * b).exp(),
                0.0,
                40.0,
                1e-14,
            );
            assert_abs_diff_eq!(wigner_origin(&p), v, epsilon = 1e-11);
        }
        assert_abs_diff_eq!(wigner_origin(&params(0.49, 0.62)), -0.059_120_128_540_426_506, epsilon = 1e-15);
        assert_eq!(wigner_origin(&params(0.49, 0.5)), 0.0);
        assert!(wigner_origin(&params(2.0, 0.3)) > 0.0);
    }

    #[test]
    fn quadrature_density_moments() {
        assert_eq!(quadrature_pdf(&params(0.0, 1.0), 0.0), 0.0);
        for (n, e) in [(0.0, 1.0), (0.49, 0.62), (1.11, 0.6), (5.0, 0.3)] {
            let p = params(n, e);
            let (norm, _) = integrate_adaptive(|x| quadrature_pdf(&p, x), -60.0, 60.0, 1e-13);
            let (m2, _) = integrate_adaptive(|x| x * x * quadrature_pdf(&p, x), -60.0, 60.0, 1e-13);
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-10);
            assert_abs_diff_eq!(m2, quadrature_second_moment(&p), epsilon = 1e-9);
        }
        assert_abs_diff_eq!(quadrature_second_moment(&params(0.49, 0.62)), 3.4552, epsilon = 1e-12);
    }

    #[test]
    fn cdf_is_the_integral_of_the_density() {
        let p = params(0.49, 0.62);
        for x in [-5.0, -1.0, 0.0, 0.7, 3.0] {
            let (v, _) = integrate_adaptive(|t| quadrature_pdf(&p, t), -40.0, x, 1e-13);
            assert_abs_diff_eq!(quadrature_cdf(&p, x), v, epsilon = 1e-10);
        }
    }

    #[test]
    fn density_nonnegative_on_parameter_grid() {
        for n in [0.0, 0.49, 1.11, 5.0] {
            for e in [0.3, 0.62, 1.0] {
                let p = params(n, e);
                for i in 0..10_000 {
                    let x = -20.0 + 40.0 * i as f64 / 9_999.0;
                    assert!(quadrature_pdf(&p, x) >= 0.0);
                }
            }
        }
    }

    #[test]
    fn density_fourier_transform_is_damped_cf() {
        for p in [params(0.49, 0.62), params(0.0, 1.0), params(1.11, 0.6)] {
            for k in [0.5, 1.0, 2.0] {
                let (v, _) = integrate_adaptive(|x| (k * x).cos() * quadrature_pdf(&p, x), -60.0, 60.0, 1e-14);
                let want = (-0.5 * k * k).exp() * cf_theoretical(&p, k);
                assert_abs_diff_eq!(v, want, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn sampler_is_deterministic_and_rejects_zero() {
        let p = params(0.49, 0.62);
        let a = sample_quadratures(&p, 70_000, 5).unwrap();
        let b = sample_quadratures(&p, 70_000, 5).unwrap();
        assert_eq!(a, b);
        let c = sample_quadratures(&p, 70_000, 6).unwrap();
        assert_ne!(a.samples()[..10], c.samples()[..10]);
        assert!(matches!(sample_quadratures(&p, 0, 1), Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn sampler_prefix_is_stable_under_length() {
        // Chunk streams do not depend on the total count.
        let p = params(1.11, 0.6);
        let short = sample_quadratures(&p, 1000, 9).unwrap();
        let long = sample_quadratures(&p, SAMPLE_CHUNK + 10, 9).unwrap();
        assert_eq!(short.samples(), &long.samples()[..1000]);
    }

    #[test]
    fn single_photon_edge_case_samples() {
        let p = params(0.0, 1.0);
        let d = sample_quadratures(&p, 20_000, 3).unwrap();
        let m2 = d.second_moment();
        assert!((m2 - 3.0).abs() < 0.1, "{m2}");
    }
}
