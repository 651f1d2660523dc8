//! The autocorrelation filter satisfies all four requirements; a hard cutoff and a
//! slowly decaying Gaussian do not.
//!
//! cargo run --release --example filter_axioms

use nonclassical::filters::{verify_filter_axioms, AutocorrelationTable, NonclassicalityFilter};

fn main() -> nonclassical::error::Result<()> {
    let table = AutocorrelationTable::unit();
    println!("normalization 𝒩 = {:.8}", table.normalization());
    for s in [0.5, 1.0, 2.0, 3.0] {
        println!("Ω₁({s}) = {:.6e}", table.value(s).unwrap_or(0.0));
    }

    let filters = [
        NonclassicalityFilter::autocorrelation(1.4)?,
        NonclassicalityFilter::rectangular(2.2)?,
        NonclassicalityFilter::custom("gaussian exp(-b²/4)", 1.0, |s| (-0.25 * s * s).exp())?,
    ];
    for f in &filters {
        let report = verify_filter_axioms(f);
        println!("\n{:?} width {} (truncated at {:.3})", f.kind(), f.width(), f.truncation_radius());
        for c in &report.checks {
            println!("  {:<18} {:<4} {}", format!("{:?}", c.axiom), if c.passed { "ok" } else { "FAIL" }, c.detail);
        }
    }
    Ok(())
}
