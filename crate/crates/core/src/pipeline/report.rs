use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trainer::ArchSummary;

use super::config::ExperimentConfig;
use super::reference;
use super::run::{RunOutcome, RunRecord};

pub const REPORT_FORMAT: &str = "reann-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Text,
    Structured,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "structured" | "json" => Ok(ReportFormat::Structured),
            other => Err(Error::Config(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub median: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Some(Stat {
            mean: values.iter().sum::<f64>() / values.len() as f64,
            min: sorted[0],
            max: sorted[sorted.len() - 1],
            median: median_sorted(&sorted),
        })
    }
}

/// Middle value; the mean of the two middle values for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Some(median_sorted(&sorted))
}

fn median_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub runs: usize,
    pub succeeded: usize,
    pub failed: usize,
    pub initial_nodes: Option<Stat>,
    pub initial_connections: Option<Stat>,
    pub intermediate_nodes: Option<Stat>,
    pub intermediate_connections: Option<Stat>,
    pub final_nodes: Option<Stat>,
    pub final_connections: Option<Stat>,
    pub epochs: Option<Stat>,
    pub inputs_pruned: Option<Stat>,
    pub network_train_accuracy: Option<Stat>,
    pub network_test_accuracy: Option<Stat>,
    pub rule_count: Option<Stat>,
    pub avg_conditions: Option<Stat>,
    pub rule_train_accuracy: Option<Stat>,
    pub rule_test_accuracy: Option<Stat>,
}

impl Aggregates {
    pub fn of(runs: &[RunRecord]) -> Self {
        let ok: Vec<&RunOutcome> = runs.iter().filter_map(|r| r.outcome.as_ref()).collect();
        let stat =
            |f: &dyn Fn(&RunOutcome) -> f64| Stat::of(&ok.iter().map(|o| f(o)).collect::<Vec<_>>());
        Aggregates {
            runs: runs.len(),
            succeeded: ok.len(),
            failed: runs.len() - ok.len(),
            initial_nodes: stat(&|o| o.architecture.initial.node_count as f64),
            initial_connections: stat(&|o| o.architecture.initial.connection_count as f64),
            intermediate_nodes: stat(&|o| o.architecture.intermediate.node_count as f64),
            intermediate_connections: stat(&|o| {
                o.architecture.intermediate.connection_count as f64
            }),
            final_nodes: stat(&|o| o.architecture.final_.node_count as f64),
            final_connections: stat(&|o| o.architecture.final_.connection_count as f64),
            epochs: stat(&|o| o.architecture.total_epochs as f64),
            inputs_pruned: stat(&|o| o.inputs_pruned as f64),
            network_train_accuracy: stat(&|o| o.network_accuracy.train),
            network_test_accuracy: stat(&|o| o.network_accuracy.test),
            rule_count: stat(&|o| o.metrics.rule_count as f64),
            avg_conditions: stat(&|o| o.metrics.avg_conditions),
            rule_train_accuracy: stat(&|o| o.metrics.accuracy_train),
            rule_test_accuracy: stat(&|o| o.metrics.accuracy_test),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub format: String,
    pub dataset: String,
    pub config: ExperimentConfig,
    pub runs: Vec<RunRecord>,
    pub aggregates: Aggregates,
}

impl ExperimentReport {
    pub fn new(config: ExperimentConfig, runs: Vec<RunRecord>) -> Self {
        ExperimentReport {
            format: REPORT_FORMAT.to_string(),
            dataset: config.dataset.label(),
            aggregates: Aggregates::of(&runs),
            config,
            runs,
        }
    }

    pub fn successful(&self) -> impl Iterator<Item = (u64, &RunOutcome)> {
        self.runs
            .iter()
            .filter_map(|r| r.outcome.as_ref().map(|o| (r.seed, o)))
    }

    /// The successful run whose test rule accuracy is closest to the median,
    /// fewer rules and then the lower seed winning ties.
    pub fn representative(&self) -> Option<(u64, &RunOutcome)> {
        let med = self.aggregates.rule_test_accuracy?.median;
        self.successful().min_by(|(sa, a), (sb, b)| {
            let da = (a.metrics.accuracy_test - med).abs();
            let db = (b.metrics.accuracy_test - med).abs();
            da.total_cmp(&db)
                .then(a.metrics.rule_count.cmp(&b.metrics.rule_count))
                .then(sa.cmp(sb))
        })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map(|s| s + "\n")
            .map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rep: ExperimentReport =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if rep.format != REPORT_FORMAT {
            return Err(Error::Format(format!(
                "expected format {REPORT_FORMAT}, found {}",
                rep.format
            )));
        }
        if rep.aggregates != Aggregates::of(&rep.runs) {
            return Err(Error::Format("aggregates do not match the runs".into()));
        }
        Ok(rep)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn render(&self, format: ReportFormat) -> Result<String> {
        render_report(self, format)
    }
}

pub fn render_report(rep: &ExperimentReport, format: ReportFormat) -> Result<String> {
    if rep.runs.is_empty() {
        return Err(Error::EmptyReport);
    }
    match format {
        ReportFormat::Structured => rep.to_json(),
        ReportFormat::Text => Ok(render_text(rep)),
    }
}

fn pct(x: f64) -> String {
    format!("{:.2}%", 100.0 * x)
}

fn arch_cell(nodes: &Option<Stat>, conns: &Option<Stat>, f: fn(&Stat) -> f64) -> String {
    match (nodes, conns) {
        (Some(n), Some(c)) => format!("{:>6.1} {:>6.1}", f(n), f(c)),
        _ => format!("{:>6} {:>6}", "-", "-"),
    }
}

fn render_text(rep: &ExperimentReport) -> String {
    let a = &rep.aggregates;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "REANN experiment: {} ({} runs, {} succeeded, {} failed)",
        rep.dataset, a.runs, a.succeeded, a.failed
    );

    let initial = rep.successful().next().map(|(_, o)| o.architecture.initial);
    let _ = writeln!(out, "\nArchitecture (nodes connections)");
    if let Some(ArchSummary {
        layers: (i, h, o),
        node_count,
        connection_count,
    }) = initial
    {
        let _ = writeln!(
            out,
            "  initial: {node_count} ({i}-{h}-{o}) {connection_count}"
        );
    }
    let _ = writeln!(
        out,
        "  {:<6} {:>13}  {:>13}  {:>13}  {:>7}",
        "", "intermediate", "final", "", "epochs"
    );
    type Pick = fn(&Stat) -> f64;
    let rows: [(&str, Pick); 3] = [("mean", |s| s.mean), ("min", |s| s.min), ("max", |s| s.max)];
    for (label, f) in rows {
        let _ = writeln!(
            out,
            "  {:<6} {}  {}  {:>13}  {:>7}",
            label,
            arch_cell(&a.intermediate_nodes, &a.intermediate_connections, f),
            arch_cell(&a.final_nodes, &a.final_connections, f),
            "",
            a.epochs.map_or("-".into(), |s| format!("{:.1}", f(&s))),
        );
    }

    let _ = writeln!(out, "\nRuns");
    let _ = writeln!(
        out,
        "  {:>6} {:>10} {:>7} {:>9} {:>9} {:>8} {:>6} {:>6} {:>9} {:>9}",
        "seed",
        "final",
        "pruned",
        "net-train",
        "net-test",
        "epsilon",
        "rules",
        "conds",
        "rule-trn",
        "rule-tst"
    );
    for r in &rep.runs {
        match (&r.outcome, &r.failure) {
            (Some(o), _) => {
                let (i, h, k) = o.architecture.final_.layers;
                let _ = writeln!(
                    out,
                    "  {:>6} {:>10} {:>7} {:>9} {:>9} {:>8.4} {:>6} {:>6.2} {:>9} {:>9}{}",
                    r.seed,
                    format!("{i}-{h}-{k}/{}", o.architecture.final_.connection_count),
                    o.inputs_pruned,
                    pct(o.network_accuracy.train),
                    pct(o.network_accuracy.test),
                    o.discretization.epsilon,
                    o.metrics.rule_count,
                    o.metrics.avg_conditions,
                    pct(o.metrics.accuracy_train),
                    pct(o.metrics.accuracy_test),
                    if o.rule_test.conflicts > 0 {
                        format!("  ({} test conflicts)", o.rule_test.conflicts)
                    } else {
                        String::new()
                    },
                );
            }
            (None, Some(f)) => {
                let _ = writeln!(out, "  {:>6} FAILED at {}: {}", r.seed, f.stage, f.message);
            }
            (None, None) => {
                let _ = writeln!(out, "  {:>6} no result", r.seed);
            }
        }
    }

    if let Some((seed, o)) = rep.representative() {
        let _ = writeln!(out, "\nRules (seed {seed})");
        for line in o.rules.render_text().lines() {
            let _ = writeln!(out, "  {line}");
        }
    }

    let _ = writeln!(out, "\nRule metrics");
    let _ = writeln!(
        out,
        "  {:<7} {:>6} {:>10} {:>7} {:>9} {:>9}",
        "", "rules", "+default", "conds", "train", "test"
    );
    for (label, f) in [
        ("median", (|s: &Stat| s.median) as fn(&Stat) -> f64),
        ("mean", |s| s.mean),
    ] {
        if let (Some(rc), Some(ac), Some(tr), Some(te)) = (
            a.rule_count,
            a.avg_conditions,
            a.rule_train_accuracy,
            a.rule_test_accuracy,
        ) {
            let _ = writeln!(
                out,
                "  {:<7} {:>6.1} {:>10.1} {:>7.2} {:>9} {:>9}",
                label,
                f(&rc),
                f(&rc) + 1.0,
                f(&ac),
                pct(f(&tr)),
                pct(f(&te))
            );
        }
    }

    if let Some(rows) = reference::published(&rep.dataset) {
        let _ = writeln!(out, "\nPublished comparison (static reference values)");
        let _ = writeln!(
            out,
            "  {:<16} {:>6} {:>7} {:>9}",
            "method", "rules", "conds", "accuracy"
        );
        let show = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v}"));
        if let (Some(rc), Some(ac), Some(te)) =
            (a.rule_count, a.avg_conditions, a.rule_test_accuracy)
        {
            let _ = writeln!(
                out,
                "  {:<16} {:>6} {:>7.2} {:>9.2}",
                "this run (med)",
                rc.median + 1.0,
                ac.median,
                100.0 * te.median
            );
        }
        for r in rows {
            let _ = writeln!(
                out,
                "  {:<16} {:>6} {:>7} {:>9}",
                r.method,
                show(r.rules),
                show(r.avg_conditions),
                format!("{:.2}", r.accuracy)
            );
        }
        if let Some(note) = reference::note(&rep.dataset) {
            let _ = writeln!(out, "  note: {note}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::config::DatasetRef;

    #[test]
    fn empty_report_is_an_error() {
        let rep = ExperimentReport::new(
            ExperimentConfig::for_dataset(DatasetRef::bundled("iris")),
            vec![],
        );
        assert!(matches!(
            render_report(&rep, ReportFormat::Text),
            Err(Error::EmptyReport)
        ));
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
        let s = Stat::of(&[1.0, 2.0, 6.0]).unwrap();
        assert_eq!((s.mean, s.min, s.max, s.median), (3.0, 1.0, 6.0, 2.0));
    }

    #[test]
    fn format_names() {
        assert_eq!("text".parse::<ReportFormat>().unwrap(), ReportFormat::Text);
        assert_eq!(
            "structured".parse::<ReportFormat>().unwrap(),
            ReportFormat::Structured
        );
        assert!("xml".parse::<ReportFormat>().is_err());
    }
}
