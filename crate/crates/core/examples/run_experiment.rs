// Drives an experiment from a TOML config, as the binary does, and prints the records.
use tristein::experiment::{run, ConfigLayer, ExperimentConfig, Subcommand};

fn main() -> tristein::Result<()> {
    let layer = ConfigLayer::from_toml(
        r#"
n = [5, 6]
p = "fixed:0.3"
t_grid = [0.5, 1.0]
"#,
    )?;
    let cfg = ExperimentConfig::resolve(Subcommand::Oracle, layer, None)?;
    for r in run(&cfg)? {
        println!("{:<24} n = {:?}  value = {:.3e}  hash {}", r.quantity, r.n, r.value, &r.content_hash[..12]);
    }
    Ok(())
}
