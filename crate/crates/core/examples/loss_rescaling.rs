//! Losses only rescale the phase space: η·P_Ω(α; η, w) equals the lossless
//! quasiprobability at α/√η with the filter width √η·w.
//!
//! cargo run --release --example loss_rescaling

use nonclassical::analysis::efficiency_rescale_check;
use nonclassical::quasiprob::default_alpha_grid;
use nonclassical::spats::SpatsParams;

fn main() -> nonclassical::error::Result<()> {
    let grid = default_alpha_grid();
    for eta in [0.36, 0.62, 1.0] {
        for w in [1.0, 1.4, 2.0] {
            let dev = efficiency_rescale_check(&SpatsParams::new(0.49, eta)?, w, &grid)?;
            println!("η = {eta:.2}  w = {w:.1}  max deviation {dev:.2e}");
        }
    }
    Ok(())
}
