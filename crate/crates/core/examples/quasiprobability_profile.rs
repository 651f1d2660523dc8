//! Reconstruct the nonclassicality quasiprobability of a simulated dataset with its
//! error band, next to the filtered transform of the exact characteristic function.
//!
//! cargo run --release --example quasiprobability_profile

use nonclassical::analysis::{reconstruct, significance};
use nonclassical::charfunc::SpatsCf;
use nonclassical::filters::NonclassicalityFilter;
use nonclassical::quasiprob::{alpha_grid, profile};
use nonclassical::spats::{sample_quadratures, SpatsParams};

fn main() -> nonclassical::error::Result<()> {
    let params = SpatsParams::new(0.49, 0.62)?;
    let filter = NonclassicalityFilter::autocorrelation(1.4)?;
    let grid = alpha_grid(2.0, 21)?;

    let data = sample_quadratures(&params, 100_000, 1)?;
    let measured = reconstruct(&data, &filter, &grid)?;
    let exact = profile(&SpatsCf(params), &filter, &grid)?;

    println!("{:>5} {:>10} {:>10} {:>10} {:>8}", "|α|", "P_Ω", "σ", "exact", "S");
    for i in 0..grid.len() {
        println!(
            "{:5.2} {:10.5} {:10.5} {:10.5} {:8.2}",
            grid[i],
            measured.values[i],
            measured.sigmas[i],
            exact.values[i],
            measured.values[i] / measured.sigmas[i]
        );
    }
    let s = significance(&measured)?;
    println!("S_min = {:.2} at |α| = {}", s.s_min, s.alpha_at_min);
    Ok(())
}
