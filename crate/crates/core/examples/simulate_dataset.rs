//! Simulate homodyne data of a lossy single-photon-added thermal state and compare
//! the sample moments with the analytic density.
//!
//! cargo run --release --example simulate_dataset

use nonclassical::spats::{quadrature_second_moment, sample_quadratures, wigner_origin, SpatsParams};

fn main() -> nonclassical::error::Result<()> {
    let params = SpatsParams::new(0.49, 0.62)?;
    let data = sample_quadratures(&params, 100_000, 7)?;
    println!("{params}");
    println!("samples          {}", data.count());
    println!("mean             {:+.5}", data.mean());
    println!("second moment    {:.5} (analytic {:.5})", data.second_moment(), quadrature_second_moment(&params));
    println!("Wigner at origin {:+.5}", wigner_origin(&params));

    let path = std::env::temp_dir().join("spats_example.csv");
    data.write_csv(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}
