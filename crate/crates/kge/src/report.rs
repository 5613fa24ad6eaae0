//! Metric, probe and power reports.

use std::io::Write;
use std::path::Path;

use kge_core::eval::{Metrics, RankingOutcome};
use kge_core::Vocabulary;
use serde_json::json;

use crate::error::{Error, Result};

pub const METRICS_HEADER: &str = "model\ttarget\tgroup\tcount\tMR\tMRR\tMQ100\tH@1\tH@3\tH@10";

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub model: String,
    pub target: String,
    pub group: String,
    pub metrics: Metrics,
}

pub fn metrics_tsv(rows: &[MetricRow]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in rows {
        let m = &r.metrics;
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            r.model, r.target, r.group, m.count, m.mr, m.mrr, m.mq100, m.hits1, m.hits3, m.hits10
        ));
    }
    out
}

/// Parses a report written by [`metrics_tsv`].
pub fn parse_metrics_tsv(text: &str) -> std::result::Result<Vec<MetricRow>, String> {
    let mut lines = text.lines();
    if lines.next() != Some(METRICS_HEADER) {
        return Err("missing metrics header".into());
    }
    lines
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            if f.len() != 10 {
                return Err(format!("bad metrics row `{l}`"));
            }
            let n = |i: usize| {
                f[i].parse::<f64>()
                    .map_err(|_| format!("bad number `{}`", f[i]))
            };
            Ok(MetricRow {
                model: f[0].into(),
                target: f[1].into(),
                group: f[2].into(),
                metrics: Metrics {
                    count: f[3].parse().map_err(|_| format!("bad count `{}`", f[3]))?,
                    mr: n(4)?,
                    mrr: n(5)?,
                    mq100: n(6)?,
                    hits1: n(7)?,
                    hits3: n(8)?,
                    hits10: n(9)?,
                },
            })
        })
        .collect()
}

pub fn summary_json(rows: &[MetricRow]) -> serde_json::Value {
    let entries: Vec<_> = rows
        .iter()
        .map(|r| {
            let m = &r.metrics;
            json!({
                "model": r.model,
                "target": r.target,
                "group": r.group,
                "count": m.count,
                "mr": m.mr,
                "mrr": m.mrr,
                "mq100": m.mq100,
                "hits@1": m.hits1,
                "hits@3": m.hits3,
                "hits@10": m.hits10,
            })
        })
        .collect();
    json!({ "metrics": entries })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = crate::tsv::create(path)?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// Per-query audit dump: `head relation tail slot rank pool`.
pub fn ranks_tsv(outcome: &RankingOutcome, vocab: &Vocabulary) -> String {
    let mut out = String::from("head\trelation\ttail\tslot\trank\tpool\n");
    for q in &outcome.queries {
        let (h, r, t) = vocab.decode(&q.triple);
        out.push_str(&format!(
            "{h}\t{r}\t{t}\t{}\t{}\t{}\n",
            q.slot.name(),
            q.rank,
            q.pool
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerRow {
    pub model: String,
    pub task: String,
    pub head_category: String,
    pub tail_category: String,
    pub pairs: usize,
    pub power: f64,
    pub threshold: Option<f64>,
}

pub fn power_tsv(rows: &[PowerRow]) -> String {
    let mut out =
        String::from("model\ttask\thead_category\ttail_category\tpairs\tpower\tthreshold\n");
    for r in rows {
        let th = r.threshold.map_or("-".to_string(), |t| t.to_string());
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{th}\n",
            r.model, r.task, r.head_category, r.tail_category, r.pairs, r.power
        ));
    }
    out
}

pub fn probe_tsv(rows: &[(String, String, f64)]) -> String {
    let mut out = String::from("model\tlabel_kind\taccuracy\n");
    for (m, k, a) in rows {
        out.push_str(&format!("{m}\t{k}\t{a}\n"));
    }
    out
}
