//! Aligned plain-text renderings of the JSON reports.

use std::fmt::Write as _;

use grasp_core::consensus::ConsensusReport;
use grasp_core::graph::ArgumentId;
use grasp_core::io::{RankingReport, TraceReport};
use grasp_core::metrics::{AgreementReport, MeanMetrics};

pub fn ranking(r: &RankingReport) -> String {
    let mut s = String::new();
    let scores: std::collections::HashMap<_, _> = r.scores.iter().map(|e| (&e.id, e.score)).collect();
    for (i, id) in r.ranking.iter().enumerate() {
        let _ = writeln!(s, "{:>4}  {:<16} {:.6}", i + 1, id.as_str(), scores[id]);
    }
    if let (Some(c), Some(it)) = (r.converged, r.iterations) {
        let _ = writeln!(s, "converged {c} after {it} iterations");
    }
    s
}

pub fn trace(t: &TraceReport) -> String {
    let mut s = format!("{:>5}", "iter");
    for a in &t.arguments {
        let _ = write!(s, " {:>10}", a.as_str());
    }
    s.push('\n');
    for (k, row) in t.scores.iter().enumerate() {
        let _ = write!(s, "{k:>5}");
        for v in row {
            let _ = write!(s, " {v:>10.6}");
        }
        s.push('\n');
    }
    s
}

pub fn baselines(args: &[ArgumentId], reports: &[RankingReport]) -> String {
    let mut s = format!("{:<16}", "argument");
    for r in reports {
        let _ = write!(s, " {:>20}", r.method.as_deref().unwrap_or(""));
    }
    s.push('\n');
    for (i, a) in args.iter().enumerate() {
        let _ = write!(s, "{:<16}", a.as_str());
        for r in reports {
            let _ = write!(s, " {:>20.6}", r.scores[i].score);
        }
        s.push('\n');
    }
    s
}

fn metrics_row(s: &mut String, name: &str, m: &MeanMetrics) {
    let top = |k| m.top_k_overlap.get(&k).map_or("-".to_string(), |v| format!("{v:.3}"));
    let _ = writeln!(
        s,
        "{name:<24} {:>8.4} {:>8.4} {:>8.4} {:>7} {:>7}",
        m.kendall_tau,
        m.swap_norm,
        m.spearman_rho,
        top(3),
        top(5)
    );
}

pub fn agreement(r: &AgreementReport) -> String {
    let mut s = format!("{:<24} {:>8} {:>8} {:>8} {:>7} {:>7}\n", "debate", "tau", "swap", "rho", "top3", "top5");
    for d in &r.debates {
        metrics_row(&mut s, &d.debate, &d.mean);
    }
    metrics_row(&mut s, "mean", &r.mean);
    s
}

pub fn consensus(r: &ConsensusReport) -> String {
    let mut s = format!("{:<24} {:>10} {:>10}\n", "source", "borda", "kemeny");
    for (label, d) in &r.per_source {
        let _ = writeln!(s, "{label:<24} {:>10.3} {:>10.3}", d.borda_mean, d.kemeny_mean);
    }
    let _ = writeln!(s, "outlier (borda)  {} {:.3}", r.outlier_borda.source, r.outlier_borda.mean_distance);
    let _ = writeln!(s, "outlier (kemeny) {} {:.3}", r.outlier_kemeny.source, r.outlier_kemeny.mean_distance);
    s
}
