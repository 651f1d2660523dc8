//! A hard cutoff either hides the negativity in noise (large cutoff) or is dominated
//! by the systematic error of the neglected tail (small cutoff).
//!
//! cargo run --release --example rectangular_cutoff

use nonclassical::analysis::{compare_rect, rect_systematic_error};
use nonclassical::quasiprob::default_alpha_grid;
use nonclassical::spats::{sample_quadratures, SpatsParams};

fn main() -> nonclassical::error::Result<()> {
    let params = SpatsParams::new(0.49, 0.62)?;
    let data = sample_quadratures(&params, 100_000, 1)?;
    let grid = default_alpha_grid();
    for row in compare_rect(&data, &[2.2, 3.0, 3.8], &grid)? {
        println!(
            "cutoff {:.1}: P(0) = {:+.3} ± {:.3}  max |bias| = {:.3}  S_min = {:.2} at |α| = {}",
            row.cutoff, row.p_origin, row.sigma_origin, row.max_abs_bias, row.significance.s_min, row.significance.alpha_at_min
        );
    }

    let band = rect_systematic_error(&params, 2.2, &grid)?;
    println!("\nbias of the 2.2 cutoff (tail integrated to b = {:.2}):", band.tail_end);
    for (a, b) in band.alpha_radii.iter().zip(&band.bias).step_by(10) {
        println!("  |α| = {a:.1}  {b:+.4}");
    }
    Ok(())
}
