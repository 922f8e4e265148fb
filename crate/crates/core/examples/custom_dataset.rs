//! Bring your own data: a schema and rows defined inline, trained and
//! explained with the library calls the pipeline uses.
//!
//! cargo run --release --example custom_dataset

use reann::dataset::{load_dataset, DatasetSchema, NormalizationMap};
use reann::pipeline::{extract_phases, train_phases, DatasetRef, ExperimentConfig};
use reann::rex::evaluate_rules;

const SCHEMA: &str = r#"
name = "loans"
class_labels = ["deny", "approve"]
threshold_units = "raw"
precision = 0

[[attributes]]
name = "income"
kind = "continuous"

[[attributes]]
name = "debt"
kind = "continuous"

[[attributes]]
name = "region"
kind = "categorical"
categories = ["north", "south"]
"#;

fn rows() -> String {
    // approve when income is high and debt is low; region is noise
    let mut out = String::new();
    for i in 0..96u32 {
        let income = 20 + 10 * (i % 8);
        let debt = 10 * ((i / 8) % 6);
        let region = if i % 3 == 0 { "north" } else { "south" };
        let class = if income > 55 && debt < 30 {
            "approve"
        } else {
            "deny"
        };
        out.push_str(&format!("{income},{debt},{region},{class}\n"));
    }
    out
}

fn main() -> anyhow::Result<()> {
    let schema = DatasetSchema::from_toml(SCHEMA)?;
    let ds = load_dataset(&rows(), &schema)?;
    let train = ds.normalize_with(&NormalizationMap::fit(&ds));

    let mut cfg = ExperimentConfig::for_dataset(DatasetRef::parse("loans.csv"));
    cfg.constructive.epochs_per_stage = 400;
    cfg.constructive.error_plateau_patience = 50;
    cfg.validate()?;

    let trained = train_phases(&cfg, 3, &train)?;
    println!(
        "network {} with {:.2}% train accuracy",
        trained.trace().final_,
        trained.network().accuracy(&train)? * 100.0
    );
    let ex = extract_phases(&cfg, trained.network(), &train, &schema)?;
    print!("{}", ex.symbolic.render_text());
    let e = evaluate_rules(&ex.symbolic, &train)?;
    println!("rule accuracy {:.2}%", e.accuracy * 100.0);
    Ok(())
}
