//! Potential-energy scan over the H2 fixtures, written as CSV to stdout.

use std::path::PathBuf;

use hsqd::pipeline::{run_scan, LucjConfig, Mode, ParameterInit, PipelineConfig};

fn main() -> hsqd::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let geoms: Vec<PathBuf> = ["0.50", "0.74", "1.00", "1.50", "2.00"]
        .iter()
        .map(|r| dir.join(format!("h2_{r}.fcidump")))
        .collect();
    let base = PipelineConfig {
        mode: Mode::HciHsqd,
        shots: 5000,
        lucj: LucjConfig {
            init: ParameterInit::Mp2,
            ..Default::default()
        },
        ..Default::default()
    };
    print!("{}", run_scan(&base, &geoms)?.to_csv()?);
    Ok(())
}
