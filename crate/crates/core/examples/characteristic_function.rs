//! Estimate the characteristic function from samples and compare with theory,
//! in units of the estimator's standard deviation.
//!
//! cargo run --release --example characteristic_function

use nonclassical::charfunc::{estimate_cf, uniform_grid};
use nonclassical::spats::{cf_theoretical, sample_quadratures, SpatsParams};

fn main() -> nonclassical::error::Result<()> {
    let params = SpatsParams::new(0.49, 0.62)?;
    let data = sample_quadratures(&params, 100_000, 1)?;
    let cf = estimate_cf(&data, &uniform_grid(4.0, 0.02))?;

    println!("{:>5} {:>10} {:>10} {:>10} {:>7}", "b", "Re Φ̂", "Φ", "σ", "z");
    for b in [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0] {
        let est = cf.cf_at(b)?;
        let sigma = cf.variance_at(b)?.sqrt();
        let exact = cf_theoretical(&params, b);
        let z = if sigma > 0.0 { (est.re - exact) / sigma } else { 0.0 };
        println!("{b:5.2} {:10.5} {exact:10.5} {sigma:10.5} {z:7.2}", est.re);
    }
    println!("max |Im Φ̂|/σ = {:.2}", cf.max_imag_over_sigma());
    Ok(())
}
