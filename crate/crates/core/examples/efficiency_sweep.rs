//! Significance of the filtered negativity against detection efficiency, next to the
//! sign of the Wigner function at the origin.
//!
//! cargo run --release --example efficiency_sweep

use nonclassical::analysis::{default_widths, efficiency_sweep, WidthStrategy};
use nonclassical::quasiprob::default_alpha_grid;

fn main() -> nonclassical::error::Result<()> {
    let sweep = efficiency_sweep(
        0.49,
        &[0.3, 0.4, 0.5, 0.62],
        100_000,
        &[1, 2, 3],
        &WidthStrategy::Scanned(default_widths()),
        &default_alpha_grid(),
    )?;
    for row in &sweep.rows {
        let widths: Vec<f64> = row.per_seed.iter().map(|s| s.width).collect();
        println!(
            "η = {:.2}  mean S_min = {:6.2}  W(0) = {:+.4}  widths {widths:?}",
            row.eta, row.mean_s_min, row.wigner_origin
        );
    }
    Ok(())
}
