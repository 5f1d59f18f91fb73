//! A thickness sweep over cycle sizes with a log-log fit and an SVG plot.

use thick_embed::sweep::{render_scaling_plot, run_sweep, SweepConfig};

const CONFIG: &str = r#"
generator = "cycle"
construction = "random"
measures = ["thickness"]
sizes = [8, 16, 32, 64]
seeds = 50
seed = 1

[params]
ambient = 3
radius = 10.0
"#;

fn main() -> thick_embed::Result<()> {
    let r = run_sweep(&SweepConfig::from_toml(CONFIG)?)?;
    print!("{}", r.summary_table().to_csv());
    let s = &r.summaries[0];
    if let Some(f) = &s.fit {
        println!("slope {:.3} +- {:.3}", f.slope, f.stderr);
    }
    let pts: Vec<(f64, f64)> = s.medians.iter().map(|&(n, v)| (n as f64, v)).collect();
    let path = std::env::temp_dir().join("thickness_sweep.svg");
    std::fs::write(&path, render_scaling_plot(&pts, "median thickness")?)?;
    println!("plot written to {}", path.display());
    Ok(())
}
