//! Run a few seeds, save the structured report and render it again from disk.
//!
//! cargo run --release --example saved_report

use reann::pipeline::{run_reann, ExperimentConfig, ExperimentReport, ReportFormat};

fn main() -> anyhow::Result<()> {
    let cfg = ExperimentConfig::bundled("iris")?.with_seeds(11, 3);
    let report = run_reann(&cfg)?;
    let path = std::env::temp_dir().join("iris.report.json");
    report.save(&path)?;

    let back = ExperimentReport::load(&path)?;
    assert_eq!(back.to_json()?, report.to_json()?);
    println!("saved and reloaded {}\n", path.display());
    print!("{}", back.render(ReportFormat::Text)?);

    let agg = &back.aggregates;
    if let (Some(rules), Some(acc)) = (&agg.rule_count, &agg.rule_test_accuracy) {
        println!(
            "\nmedian rules {}, median test accuracy {:.2}%",
            rules.median,
            acc.median * 100.0
        );
    }
    Ok(())
}
