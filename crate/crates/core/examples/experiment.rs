//! Full pipeline on a bundled dataset with its shipped config.
//!
//! cargo run --release --example experiment -- iris [runs] [seed]

use reann::pipeline::{run_reann, ExperimentConfig, ReportFormat};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "iris".into());
    let mut cfg = ExperimentConfig::bundled(&name)?;
    if let Some(runs) = args.next() {
        let seed = args.next().map_or(Ok(cfg.seed), |s| s.parse())?;
        cfg = cfg.with_seeds(seed, runs.parse()?);
    }
    let t = std::time::Instant::now();
    let report = run_reann(&cfg)?;
    print!("{}", report.render(ReportFormat::Text)?);
    for r in &report.runs {
        let s = r.timings;
        eprintln!(
            "seed {:>3}: train {:.0} ms, prune {:.0} ms, discretize {:.0} ms, extract {:.0} ms",
            r.seed, s.train_ms, s.prune_ms, s.discretize_ms, s.extract_ms
        );
    }
    eprintln!("total {:.2} s", t.elapsed().as_secs_f64());
    Ok(())
}
