//! Tune the filter width for the most significant negativity.
//!
//! cargo run --release --example width_scan

use nonclassical::analysis::{scan_width, width_range};
use nonclassical::quasiprob::default_alpha_grid;
use nonclassical::spats::{sample_quadratures, SpatsParams};

fn main() -> nonclassical::error::Result<()> {
    let params = SpatsParams::new(1.11, 0.60)?;
    let data = sample_quadratures(&params, 100_000, 1)?;
    let scan = scan_width(&data, &width_range(0.8, 2.0, 0.1)?, &default_alpha_grid())?;
    for (w, s) in scan.widths.iter().zip(&scan.significances) {
        let bar = "#".repeat((-s.s_min).max(0.0).round() as usize);
        println!("w = {w:.1}  S_min = {:7.2}  {bar}", s.s_min);
    }
    println!("best width {} with S_min = {:.2}", scan.best_width, scan.best.s_min);
    Ok(())
}
