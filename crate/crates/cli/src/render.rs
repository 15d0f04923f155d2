//! Plain-text tables for `--format table`.

use std::fmt::Write;

use uqled_core::synth::{ExperimentReport, SummaryRow};
use uqled_core::{AlgorithmId, CorrelationReport, DetectionMetrics, FlagSet};

fn pct(v: f64) -> String {
    format!("{:.1}%", 100.0 * v)
}

pub fn key_values(rows: &[(&str, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{k:<width$}  {v}\n"))
        .collect()
}

pub fn flags(algorithm: AlgorithmId, flags: &FlagSet, n: usize) -> String {
    let mut text = key_values(&[
        ("algorithm", algorithm.display_name().to_string()),
        ("flagged", format!("{} of {n}", flags.len())),
    ]);
    for chunk in flags.as_slice().chunks(16) {
        let line: Vec<String> = chunk.iter().map(usize::to_string).collect();
        let _ = writeln!(text, "  {}", line.join(" "));
    }
    text
}

pub fn metrics(m: &DetectionMetrics) -> String {
    key_values(&[
        ("true positives", m.tp.to_string()),
        ("false positives", m.fp.to_string()),
        ("false negatives", m.fn_.to_string()),
        ("precision", pct(m.precision)),
        ("recall", pct(m.recall)),
        ("F1", pct(m.f1)),
    ])
}

pub fn correlation(r: &CorrelationReport) -> String {
    key_values(&[
        ("r", format!("{:.4}", r.r)),
        ("n", r.n.to_string()),
        ("df", r.df.to_string()),
        ("t", format!("{:.4}", r.t)),
        ("p", format!("{:.6}", r.p)),
        ("alpha", r.alpha.to_string()),
        ("reject H0", r.reject_null.to_string()),
    ])
}

/// F1, precision and recall per algorithm and noise rate, then accuracy
/// before and after cleaning with the number of removed samples.
pub fn experiment(report: &ExperimentReport) -> String {
    let taus = &report.config.tau_list;
    let algorithms = &report.config.algorithms;
    let name_width = algorithms
        .iter()
        .map(String::len)
        .max()
        .unwrap_or(0)
        .max(12);
    let mut text = String::new();

    let _ = write!(text, "{:<name_width$}", "measure");
    for measure in ["F1", "Precision", "Recall"] {
        for tau in taus {
            let _ = write!(text, " | {:>9}", format!("{measure} {tau}"));
        }
    }
    text.push('\n');
    for algorithm in algorithms {
        let _ = write!(text, "{algorithm:<name_width$}");
        let picks: [fn(&SummaryRow) -> f64; 3] = [|r| r.f1, |r| r.precision, |r| r.recall];
        for pick in picks {
            for &tau in taus {
                let v = report.row(algorithm, tau).map_or(f64::NAN, pick);
                let _ = write!(text, " | {:>9}", pct(v));
            }
        }
        text.push('\n');
    }

    text.push('\n');
    let _ = write!(text, "{:<name_width$}", "accuracy");
    for tau in taus {
        let _ = write!(
            text,
            " | {:>9} | {:>9}",
            format!("acc {tau}"),
            format!("removed")
        );
    }
    text.push('\n');
    let _ = write!(text, "{:<name_width$}", "noisy");
    for &tau in taus {
        let noisy = report
            .summary
            .iter()
            .find(|r| r.tau == tau)
            .map_or(f64::NAN, |r| r.noisy_accuracy);
        let _ = write!(text, " | {:>9} | {:>9}", pct(noisy), 0);
    }
    text.push('\n');
    for algorithm in algorithms {
        let _ = write!(text, "{algorithm:<name_width$}");
        for &tau in taus {
            let (acc, removed) = report
                .row(algorithm, tau)
                .map_or((f64::NAN, f64::NAN), |r| {
                    (r.clean_accuracy, r.removed_count)
                });
            let _ = write!(text, " | {:>9} | {:>9.1}", pct(acc), removed);
        }
        text.push('\n');
    }
    let _ = writeln!(text, "\ninitial accuracy {}", pct(report.initial_accuracy));
    if let Some(s) = &report.sensitivity {
        let _ = writeln!(
            text,
            "F1 vs clean accuracy across algorithms: r = {:.3}, t = {:.3}, p = {:.4}",
            s.r, s.t, s.p
        );
    }
    text
}
