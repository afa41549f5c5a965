//! Drive the experiment harness from an inline config and print the CSV.

use blowdown::harness::{parse_config, run_experiment};

const CONFIG: &str = r#"
name = "maslov-demo"
kind = "maslov"

[model]
kind = "round-sphere"

[parameters]
k_min = 10
k_max = 50
k_step = 10
"#;

fn main() -> blowdown::Result<()> {
    let cfg = parse_config(CONFIG)?;
    let out = run_experiment(&cfg)?;
    print!("{}", out.deterministic_csv());
    Ok(())
}
