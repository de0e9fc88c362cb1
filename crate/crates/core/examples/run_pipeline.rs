//! End-to-end run from a TOML configuration, one pass per mode.

use std::path::Path;

use hsqd::pipeline::{run_pipeline, Mode, PipelineConfig};

const CONFIG: &str = r#"
fcidump = "fixtures/h4_1.00.fcidump"
shots = 20000
p_flip = 0.01
seed = 3

[lucj]
init = "mp2"
layers = 2

[recovery]
cycles = 3
"#;

fn main() -> hsqd::Result<()> {
    let mut cfg = PipelineConfig::from_toml(CONFIG, Path::new(env!("CARGO_MANIFEST_DIR")))?;
    for mode in Mode::ALL {
        cfg.mode = mode;
        let r = run_pipeline(&cfg)?;
        println!(
            "{:14} E {:.10}  error {:+.2e}  |S| {}",
            mode.name(),
            r.energy,
            r.error_ha.unwrap_or(f64::NAN),
            r.subspace_size
        );
    }
    Ok(())
}
