//! Round-trip and robustness properties of the file formats.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use kge::checkpoint::{self, CheckpointFile};
use kge::config::RunConfig;
use kge::ingest::{parse_concepts, RrfConfig};
use kge::report::{metrics_tsv, parse_metrics_tsv, MetricRow};
use kge_core::eval::Metrics;
use kge_core::{EmbeddingTable, ModelConfig, ModelKind};
use proptest::prelude::*;

fn name() -> impl Strategy<Value = String> {
    "[A-Za-z0-9_.-]{1,12}"
}

fn metrics() -> impl Strategy<Value = Metrics> {
    (0usize..100_000, prop::array::uniform6(0.0f64..1e6)).prop_map(|(count, v)| Metrics {
        count,
        mr: v[0],
        mrr: v[1],
        mq100: v[2],
        hits1: v[3],
        hits3: v[4],
        hits10: v[5],
    })
}

fn conso_row(cui: &str, sab: &str, suppress: &str) -> String {
    let mut cols = vec![""; 18];
    cols[0] = cui;
    cols[11] = sab;
    cols[16] = suppress;
    format!("{}|\n", cols.join("|"))
}

fn concepts(path: &Path, cfg: &RrfConfig) -> BTreeSet<String> {
    parse_concepts(path, cfg).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metrics_report_round_trips(rows in prop::collection::vec((name(), name(), name(), metrics()), 0..8)) {
        let rows: Vec<MetricRow> = rows
            .into_iter()
            .map(|(model, target, group, metrics)| MetricRow { model, target, group, metrics })
            .collect();
        prop_assert_eq!(parse_metrics_tsv(&metrics_tsv(&rows)).unwrap(), rows);
    }

    #[test]
    fn checkpoint_round_trips(kind in 0u8..5, half_dim in 1usize..5, ne in 2usize..6, nr in 1usize..4, seed: u64, epoch: u64, cut in 0usize..200) {
        let kind = ModelKind::from_code(kind).unwrap();
        let table = EmbeddingTable::init(ModelConfig::new(kind, 2 * half_dim), ne, nr, seed).unwrap();
        let file = CheckpointFile { table, epoch, valid_mrr: 0.5 };
        let bytes = checkpoint::encode(&file);
        let back = checkpoint::decode(&bytes).unwrap();
        prop_assert_eq!(&back.table, &checkpoint::round_to_f32(&file.table));
        prop_assert_eq!(back.epoch, epoch);
        // any truncation is reported, never a panic
        let cut = cut.min(bytes.len() - 1);
        prop_assert!(checkpoint::decode(&bytes[..cut]).is_err());
    }

    #[test]
    fn triples_ignore_trailing_whitespace(
        rows in prop::collection::vec((name(), name(), name()), 1..10),
        pads in prop::collection::vec("[ \t]{0,3}", 10),
    ) {
        let dir = tempfile::tempdir().unwrap();
        let (clean, padded) = (dir.path().join("a.tsv"), dir.path().join("b.tsv"));
        let mut a = String::new();
        let mut b = String::new();
        for (i, (h, r, t)) in rows.iter().enumerate() {
            a.push_str(&format!("{h}\t{r}\t{t}\n"));
            b.push_str(&format!("{h}\t{r}\t{t}{}\r\n\n", pads[i]));
        }
        fs::write(&clean, a).unwrap();
        fs::write(&padded, b).unwrap();
        prop_assert_eq!(kge::tsv::read_triples(&clean).unwrap(), kge::tsv::read_triples(&padded).unwrap());
    }

    #[test]
    fn config_render_round_trips(seed: u64, dim in 1usize..4096, lr in 0.0f64..1.0, model in 0u8..5) {
        let mut cfg = RunConfig::default();
        let kind = ModelKind::from_code(model).unwrap();
        cfg.apply([
            format!("seed={seed}").as_str(),
            &format!("dim={dim}"),
            &format!("learning_rate={lr}"),
            &format!("model={kind}"),
        ])
        .unwrap();
        let back = RunConfig::parse(&cfg.render(), Path::new("x")).unwrap();
        prop_assert_eq!(back.train().unwrap().learning_rate, lr);
        prop_assert_eq!(back, cfg);
    }

    /// Rows from other sources or with excluded suppression flags never add
    /// concepts, and excluding more flags never grows the result.
    #[test]
    fn concept_filter_is_monotone(
        rows in prop::collection::vec((0u8..20, prop::sample::select(vec!["SNOMEDCT_US", "MSH", "RXNORM"]), prop::sample::select(vec!["N", "O", "E", "Y"])), 0..40),
        noise in prop::collection::vec((0u8..20, prop::sample::select(vec!["MSH", "RXNORM"]), prop::sample::select(vec!["N", "O"])), 0..10),
    ) {
        let dir = tempfile::tempdir().unwrap();
        let base: String = rows.iter().map(|(c, s, p)| conso_row(&format!("C{c}"), s, p)).collect();
        let noisy: String = base.clone() + &noise.iter().map(|(c, s, p)| conso_row(&format!("C{c}"), s, p)).collect::<String>();
        let (a, b) = (dir.path().join("a.rrf"), dir.path().join("b.rrf"));
        fs::write(&a, base).unwrap();
        fs::write(&b, noisy).unwrap();
        let cfg = RrfConfig::default();
        prop_assert_eq!(concepts(&a, &cfg), concepts(&b, &cfg));
        let mut strict = cfg.clone();
        strict.excluded_suppress.insert("N".into());
        prop_assert!(concepts(&a, &strict).is_subset(&concepts(&a, &cfg)));
    }
}
