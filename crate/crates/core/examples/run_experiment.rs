//! Drive an experiment through the config layer, as the binary does.
use fiberwise::experiment::{run, ExperimentConfig};

fn main() -> fiberwise::Result<()> {
    let out = std::env::temp_dir().join("fiberwise-example");
    let overrides = ["experiment=cantor".to_string(), "q=8192".into(), format!("out={}", out.display())];
    let cfg = ExperimentConfig::load(None, &overrides)?;
    let manifest = run(&cfg)?;
    for c in &manifest.checks {
        println!("{:<24} {} ({:.3e} vs {:.3e})", c.name, c.passed, c.value, c.bound);
    }
    println!("wrote {:?} to {}", manifest.outputs, out.display());
    Ok(())
}
