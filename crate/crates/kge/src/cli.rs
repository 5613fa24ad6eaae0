//! `kge` command line.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use kge_core::eval::{categorize_relations, metrics_by_category, metrics_by_relation, Metrics};
use kge_core::kg::{build_vocabulary, encode_triples, LabelRecord, Split, DEFAULT_SEMANTIC_GROUPS};
use kge_core::probe::{build_probe_dataset, classify, power_above, NamedEmbeddings, PowerTask};
use kge_core::splitter::{
    count_unseen, pair_reciprocals, repair_unseen, split, ReciprocalMap, SplitSpec,
};
use kge_core::trainer::{train_with, TrainError};
use kge_core::{
    EmbeddingTable, FilterSet, RelationId, SemanticLabels, Target, TripleStore, Vocabulary,
};

use crate::checkpoint::{self, CheckpointFile};
use crate::config::{seed_offset, RunConfig};
use crate::error::{Error, Result};
use crate::export::{self, Format};
use crate::ingest::{self, RrfConfig};
use crate::report::{self, MetricRow, PowerRow};
use crate::{parallel, tsv};

#[derive(Debug, Parser)]
#[command(name = "kge", version, about = "Knowledge-graph embedding toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract triples and semantic labels from RRF files or a triple TSV
    Prep(PrepArgs),
    /// Split triples into train/valid/test keeping reciprocal pairs together
    Split(SplitArgs),
    /// Train an embedding model
    Train(TrainArgs),
    /// Filtered link or relation prediction on a checkpoint
    Eval(EvalArgs),
    /// Linear probe of entity embeddings by semantic type or group
    Probe(ProbeArgs),
    /// Cosine bootstrap power for related entity pairs
    Power(PowerArgs),
    /// Cardinality/homogeneity category of every relation
    AnalyzeRelations(AnalyzeArgs),
    /// Export entity embeddings
    Export(ExportArgs),
}

#[derive(Debug, Args, Default)]
pub struct ConfigArgs {
    /// key = value configuration file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override a configuration key (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
}

impl ConfigArgs {
    fn resolve(&self, extra: &[(&str, Option<String>)]) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        cfg.apply(self.set.iter().map(String::as_str))?;
        if let Some(s) = self.seed {
            cfg.set("seed", &s.to_string())?;
        }
        if let Some(w) = self.workers {
            cfg.set("workers", &w.to_string())?;
        }
        for (k, v) in extra {
            if let Some(v) = v {
                cfg.set(k, v)?;
            }
        }
        Ok(cfg)
    }
}

fn s<T: ToString>(v: &Option<T>) -> Option<String> {
    v.as_ref().map(ToString::to_string)
}

fn list(v: &str) -> BTreeSet<String> {
    v.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(String::from)
        .collect()
}

fn columns<const N: usize>(flag: &str, v: &str) -> Result<[usize; N]> {
    let parts: Vec<usize> = v
        .split(',')
        .map(|x| x.trim().parse())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| {
            Error::Input(format!(
                "--{flag}: expected {N} comma-separated column indices"
            ))
        })?;
    parts.try_into().map_err(|_| {
        Error::Input(format!(
            "--{flag}: expected {N} comma-separated column indices"
        ))
    })
}

#[derive(Debug, Args)]
pub struct PrepArgs {
    #[arg(long)]
    pub mrconso: Option<PathBuf>,
    #[arg(long)]
    pub mrrel: Option<PathBuf>,
    #[arg(long)]
    pub mrsty: Option<PathBuf>,
    /// Semantic group file (`GROUP|GroupName|TUI|TypeName`)
    #[arg(long)]
    pub semgroups: Option<PathBuf>,
    /// Pass an existing triple TSV through instead of RRF files
    #[arg(long, conflicts_with_all = ["mrconso", "mrrel"])]
    pub triples: Option<PathBuf>,
    /// Labels TSV to pass through with --triples
    #[arg(long, requires = "triples")]
    pub labels: Option<PathBuf>,
    /// Source vocabulary to keep; `any` keeps all
    #[arg(long, default_value = "SNOMEDCT_US")]
    pub source: String,
    #[arg(long, default_value = "O,E,Y")]
    pub exclude_suppress: String,
    #[arg(long, default_value = "ANAT,CHEM,CONC,DEVI,DISO,PHEN,PHYS,PROC")]
    pub groups: String,
    /// Semantic type codes to drop
    #[arg(long, default_value = "")]
    pub exclude_types: String,
    /// Emit (CUI1, REL, CUI2) instead of (CUI2, REL, CUI1)
    #[arg(long)]
    pub flip: bool,
    /// MRCONSO columns: CUI,SAB,SUPPRESS
    #[arg(long)]
    pub conso_columns: Option<String>,
    /// MRREL columns: CUI1,REL,CUI2,RELA,SAB,SUPPRESS
    #[arg(long)]
    pub rel_columns: Option<String>,
    /// MRSTY columns: CUI,TUI,STY
    #[arg(long)]
    pub sty_columns: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub triples: PathBuf,
    /// Reciprocal relation pairs, `relation<TAB>inverse`
    #[arg(long)]
    pub reciprocals: Option<PathBuf>,
    /// train,valid,test fractions
    #[arg(long, default_value = "0.948,0.024,0.028")]
    pub ratios: String,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub margin: Option<f64>,
    #[arg(long = "lr")]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub valid: Option<PathBuf>,
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long)]
    pub closure: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Continue from a checkpoint written by an earlier run
    #[arg(long)]
    pub resume: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    Head,
    Tail,
    Both,
    Relation,
    /// head, tail and both
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strata {
    None,
    Categories,
    Relations,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    /// Known triples to filter (train, valid, ...); repeatable
    #[arg(long)]
    pub filter: Vec<PathBuf>,
    #[arg(long)]
    pub closure: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "all")]
    pub target: TargetArg,
    #[arg(long, value_enum, default_value = "none")]
    pub strata: Strata,
    /// Relations reported with `--strata relations`, comma separated
    #[arg(long, default_value = "")]
    pub relations: String,
    /// Labels TSV, needed for `--strata categories`
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Name of the model column; defaults to the model kind
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write per-query ranks
    #[arg(long)]
    pub dump_ranks: bool,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LabelKind {
    Type,
    Group,
    Both,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    /// Embedding file, optionally `name=path`; repeatable
    #[arg(long, required = true)]
    pub embeddings: Vec<String>,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    pub label_kind: LabelKind,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    #[arg(long, required = true)]
    pub embeddings: Vec<String>,
    /// `head<TAB>tail<TAB>task<TAB>head_category<TAB>tail_category`
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub percentile: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Triple files pooled for the analysis; repeatable
    #[arg(long, required = true)]
    pub triples: Vec<PathBuf>,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long, default_value = "tsv")]
    pub format: Format,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Prep(a) => prep(&a),
        Command::Split(a) => split_cmd(&a),
        Command::Train(a) => train_cmd(&a),
        Command::Eval(a) => eval_cmd(&a),
        Command::Probe(a) => probe_cmd(&a),
        Command::Power(a) => power_cmd(&a),
        Command::AnalyzeRelations(a) => analyze_cmd(&a),
        Command::Export(a) => export_cmd(&a),
    }
}

fn warn(msg: impl AsRef<str>) {
    eprintln!("warning: {}", msg.as_ref());
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => report::write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn dedup_raw(raw: Vec<tsv::RawTriple>) -> (Vec<tsv::RawTriple>, usize) {
    let mut seen = std::collections::HashSet::new();
    let before = raw.len();
    let out: Vec<_> = raw.into_iter().filter(|t| seen.insert(t.clone())).collect();
    let dups = before - out.len();
    (out, dups)
}

fn prep(a: &PrepArgs) -> Result<()> {
    let mut stats = Vec::new();
    let (triples, labels) = if let Some(path) = &a.triples {
        let (triples, dups) = dedup_raw(tsv::read_triples(path)?);
        stats.push(("duplicates_dropped", dups));
        let labels = a.labels.as_deref().map(tsv::read_labels).transpose()?;
        (triples, labels)
    } else {
        let (Some(conso), Some(rel)) = (&a.mrconso, &a.mrrel) else {
            return Err(Error::Input(
                "prep needs --mrconso and --mrrel, or --triples".into(),
            ));
        };
        let mut cfg = RrfConfig {
            source: (a.source != "any").then(|| a.source.clone()),
            excluded_suppress: list(&a.exclude_suppress),
            allowed_groups: list(&a.groups),
            excluded_types: list(&a.exclude_types),
            flip_direction: a.flip,
            ..RrfConfig::default()
        };
        if let Some(c) = &a.conso_columns {
            let [cui, source, suppress] = columns::<3>("conso-columns", c)?;
            cfg.concepts = ingest::ConceptColumns {
                cui,
                source,
                suppress,
            };
        }
        if let Some(c) = &a.rel_columns {
            let [cui1, rel, cui2, rela, source, suppress] = columns::<6>("rel-columns", c)?;
            cfg.relations = ingest::RelationColumns {
                cui1,
                rel,
                cui2,
                rela,
                source,
                suppress,
            };
        }
        if let Some(c) = &a.sty_columns {
            let [cui, tui, sty] = columns::<3>("sty-columns", c)?;
            cfg.semantics = ingest::SemanticColumns { cui, tui, sty };
        }
        let group_map = a
            .semgroups
            .as_deref()
            .map(ingest::parse_semgroups)
            .transpose()?;
        let mut vocab_groups: Vec<String> = DEFAULT_SEMANTIC_GROUPS
            .iter()
            .map(|g| g.to_string())
            .collect();
        if let Some(m) = &group_map {
            vocab_groups.extend(m.values().cloned());
        }
        cfg.validate(&vocab_groups)?;

        let mut concepts = ingest::parse_concepts(conso, &cfg)?;
        stats.push(("active_concepts", concepts.len()));
        let semantics = match (&a.mrsty, &group_map) {
            (Some(sty), Some(groups)) => {
                let sem = ingest::parse_semantics(sty, &cfg, groups)?;
                for w in &sem.warnings {
                    warn(w);
                }
                concepts.retain(|c| sem.labels.contains_key(c));
                stats.push(("concepts_after_semantic_filter", concepts.len()));
                Some(sem)
            }
            (Some(_), None) => return Err(Error::Input("--mrsty needs --semgroups".into())),
            _ => None,
        };
        let (triples, dups) = dedup_raw(ingest::parse_relations(rel, &cfg, &concepts)?);
        stats.push(("duplicates_dropped", dups));
        let labels = semantics.map(|sem| {
            let vocab = build_vocabulary(
                triples
                    .iter()
                    .map(|(h, r, t)| (h.as_str(), r.as_str(), t.as_str())),
            );
            sem.records(vocab.entity_names().iter().map(String::as_str))
        });
        (triples, labels)
    };
    let vocab = build_vocabulary(
        triples
            .iter()
            .map(|(h, r, t)| (h.as_str(), r.as_str(), t.as_str())),
    );
    stats.push(("entities", vocab.num_entities()));
    stats.push(("relation_types", vocab.num_relations()));
    stats.push(("triples", triples.len()));
    tsv::write_triples(
        &a.out.join("triples.tsv"),
        triples
            .iter()
            .map(|(h, r, t)| (h.as_str(), r.as_str(), t.as_str())),
    )?;
    if let Some(l) = &labels {
        stats.push(("labelled_entities", l.len()));
        tsv::write_labels(&a.out.join("labels.tsv"), l)?;
    }
    let text: String = stats.iter().map(|(k, v)| format!("{k}\t{v}\n")).collect();
    report::write_text(&a.out.join("stats.txt"), &text)
}

fn parse_ratios(v: &str, seed: u64) -> Result<SplitSpec> {
    let parts: Vec<f64> = v
        .split(',')
        .map(|x| x.trim().parse())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Input(format!("--ratios: cannot parse `{v}`")))?;
    let [tr, va, te] = parts[..] else {
        return Err(Error::Input("--ratios needs three fractions".into()));
    };
    Ok(SplitSpec::new(tr, va, te, seed)?)
}

fn split_cmd(a: &SplitArgs) -> Result<()> {
    let cfg = a.config.resolve(&[])?;
    let spec = parse_ratios(&a.ratios, cfg.seed(seed_offset::SPLIT)?)?;
    let raw = tsv::read_triples(&a.triples)?;
    let vocab = build_vocabulary(
        raw.iter()
            .map(|(h, r, t)| (h.as_str(), r.as_str(), t.as_str())),
    );
    let (store, dups) = encode_triples(
        raw.iter()
            .map(|(h, r, t)| (h.as_str(), r.as_str(), t.as_str())),
        &vocab,
        Split::Train,
    )?;
    let (map, skipped) = match &a.reciprocals {
        Some(p) => tsv::read_reciprocals(p, &vocab)?,
        None => (ReciprocalMap::new(), 0),
    };
    if skipped > 0 {
        warn(format!(
            "{skipped} reciprocal pairs name relations absent from the triples"
        ));
    }
    let groups = pair_reciprocals(&store, &map);
    let mut stores = split(&groups, &spec)?;
    let repair = repair_unseen(&mut stores, &map);
    let (unseen_e, unseen_r) = count_unseen(&stores);
    for (name, s) in [
        ("train.tsv", &stores.train),
        ("valid.tsv", &stores.valid),
        ("test.tsv", &stores.test),
    ] {
        tsv::write_store(&a.out.join(name), &vocab, s.triples())?;
    }
    let stats = [
        ("entities", vocab.num_entities()),
        ("relation_types", vocab.num_relations()),
        ("facts", store.len()),
        ("train", stores.train.len()),
        ("valid", stores.valid.len()),
        ("test", stores.test.len()),
        ("duplicates_dropped", dups),
        (
            "reciprocal_groups",
            groups.iter().filter(|g| g.len() > 1).count(),
        ),
        ("moved_from_valid", repair.moved_from_valid),
        ("moved_from_test", repair.moved_from_test),
        ("repair_passes", repair.passes),
        ("unseen_entities", unseen_e),
        ("unseen_relations", unseen_r),
    ];
    let text: String = stats.iter().map(|(k, v)| format!("{k}\t{v}\n")).collect();
    report::write_text(&a.out.join("stats.txt"), &text)?;
    cfg.write_resolved(&a.out)
}

fn read_names(path: &Path) -> Result<Vec<String>> {
    let mut out = Vec::new();
    tsv::for_each_line(path, |_, l| {
        out.push(l.to_string());
        Ok(())
    })?;
    Ok(out)
}

fn write_names(path: &Path, names: &[String]) -> Result<()> {
    let mut text = String::new();
    for n in names {
        text.push_str(n);
        text.push('\n');
    }
    report::write_text(path, &text)
}

/// Vocabulary stored next to a checkpoint (`entities.txt`, `relations.txt`).
pub fn load_vocab(checkpoint: &Path) -> Result<Vocabulary> {
    let dir = checkpoint.parent().unwrap_or(Path::new("."));
    let ents = read_names(&dir.join("entities.txt"))?;
    let rels = read_names(&dir.join("relations.txt"))?;
    Ok(Vocabulary::from_names(
        ents.iter().map(String::as_str),
        rels.iter().map(String::as_str),
    ))
}

fn encode_file(path: &Path, vocab: &Vocabulary, split: Split) -> Result<TripleStore> {
    let raw = tsv::read_triples(path)?;
    encode_triples(
        raw.iter()
            .map(|(h, r, t)| (h.as_str(), r.as_str(), t.as_str())),
        vocab,
        split,
    )
    .map(|(s, _)| s)
    .map_err(|e| Error::parse(path, 0, e.to_string()))
}

fn train_cmd(a: &TrainArgs) -> Result<()> {
    let path_str = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
    let cfg = a.config.resolve(&[
        ("model", a.model.clone()),
        ("dim", s(&a.dim)),
        ("margin", s(&a.margin)),
        ("learning_rate", s(&a.learning_rate)),
        ("num_epoch", s(&a.epochs)),
        ("train_file", path_str(&a.train)),
        ("valid_file", path_str(&a.valid)),
        ("test_file", path_str(&a.test)),
        ("closure_file", path_str(&a.closure)),
        ("output", path_str(&a.out)),
    ])?;
    let model = cfg.model()?;
    let train_cfg = cfg.train()?;
    let out = cfg.require_path("output")?;
    let train_path = cfg.require_path("train_file")?;
    let split_paths: Vec<(PathBuf, Split)> = [
        ("train_file", Split::Train),
        ("valid_file", Split::Valid),
        ("test_file", Split::Test),
    ]
    .into_iter()
    .filter_map(|(k, s)| cfg.path(k).map(|p| (p, s)))
    .collect();

    let (vocab, table, start_epoch) = match &a.resume {
        Some(ckpt) => {
            let file = checkpoint::read(ckpt)?;
            let vocab = load_vocab(ckpt)?;
            if file.table.config().kind != model.kind || file.table.dim() != model.dim {
                return Err(Error::Input(format!(
                    "checkpoint holds {} at dim {}, config asks for {} at dim {}",
                    file.table.config().kind,
                    file.table.dim(),
                    model.kind,
                    model.dim
                )));
            }
            (vocab, file.table, file.epoch as usize)
        }
        None => {
            let mut raw = Vec::new();
            for (p, _) in &split_paths {
                raw.extend(tsv::read_triples(p)?);
            }
            let vocab = build_vocabulary(
                raw.iter()
                    .map(|(h, r, t)| (h.as_str(), r.as_str(), t.as_str())),
            );
            let table = EmbeddingTable::init(
                model,
                vocab.num_entities(),
                vocab.num_relations(),
                cfg.seed(seed_offset::INIT)?,
            )?;
            (vocab, table, 0)
        }
    };

    let train_store = encode_file(&train_path, &vocab, Split::Train)?;
    let mut filter = FilterSet::from_stores(&[&train_store]);
    let mut valid = Vec::new();
    for (p, split) in &split_paths {
        if *split == Split::Train {
            continue;
        }
        let store = encode_file(p, &vocab, *split)?;
        if *split == Split::Valid {
            valid = store.triples().to_vec();
        }
        filter.extend(store.triples().iter().copied());
    }
    if let Some(p) = cfg.path("closure_file") {
        let (closure, skipped) = ingest::load_closure(&p, &vocab)?;
        if skipped > 0 {
            warn(format!("{skipped} closure triples reference unknown names"));
        }
        filter.extend(closure.triples().iter().copied());
    }

    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    cfg.write_resolved(&out)?;
    write_names(&out.join("entities.txt"), vocab.entity_names())?;
    write_names(&out.join("relations.txt"), vocab.relation_names())?;

    let workers = train_cfg.workers;
    let result = train_with(
        table,
        start_epoch,
        train_store.triples(),
        &valid,
        &train_cfg,
        parallel::train_epoch,
        |table, subset| {
            Ok(
                parallel::link_prediction(subset, table, &filter, Target::Both, workers)
                    .map_err(TrainError::from)?
                    .metrics
                    .mrr,
            )
        },
    );
    let outcome = match result {
        Ok(o) => o,
        Err(e @ TrainError::NonFinite { .. }) => {
            return Err(Error::Numerical(format!("training aborted: {e}")));
        }
        Err(e) => return Err(e.into()),
    };
    let mut log = String::from("epoch\tmean_loss\tvalid_mrr\n");
    for e in &outcome.log {
        let f = |v: Option<f64>| v.map_or("-".to_string(), |x| x.to_string());
        log.push_str(&format!(
            "{}\t{}\t{}\n",
            e.epoch,
            f(e.mean_loss),
            f(e.valid_mrr)
        ));
    }
    report::write_text(&out.join("train.log"), &log)?;
    checkpoint::write(
        &out.join("checkpoint.bin"),
        &CheckpointFile {
            table: outcome.best.table,
            epoch: outcome.best.epoch as u64,
            valid_mrr: outcome.best.valid_mrr,
        },
    )?;
    checkpoint::write(
        &out.join("last.bin"),
        &CheckpointFile {
            table: outcome.last,
            epoch: outcome.last_epoch as u64,
            valid_mrr: outcome
                .log
                .last()
                .and_then(|e| e.valid_mrr)
                .unwrap_or(f64::NAN),
        },
    )?;
    println!(
        "best epoch {} valid MRR {} (epochs {}..={})",
        outcome.best.epoch, outcome.best.valid_mrr, start_epoch, outcome.last_epoch
    );
    Ok(())
}

fn read_label_records(path: &Path, vocab: &Vocabulary) -> Result<SemanticLabels> {
    Ok(SemanticLabels::from_records(
        &tsv::read_labels(path)?,
        vocab,
    )?)
}

fn eval_cmd(a: &EvalArgs) -> Result<()> {
    let file = checkpoint::read(&a.checkpoint)?;
    let vocab = load_vocab(&a.checkpoint)?;
    let table = file.table;
    let test = encode_file(&a.test, &vocab, Split::Test)?;
    let mut filter = FilterSet::from_stores(&[&test]);
    let mut stores = vec![test.clone()];
    for p in &a.filter {
        let s = encode_file(p, &vocab, Split::Train)?;
        filter.extend(s.triples().iter().copied());
        stores.push(s);
    }
    if let Some(p) = &a.closure {
        let (closure, skipped) = ingest::load_closure(p, &vocab)?;
        if skipped > 0 {
            warn(format!("{skipped} closure triples reference unknown names"));
        }
        filter.extend(closure.triples().iter().copied());
    }
    let targets: Vec<Target> = match a.target {
        TargetArg::Head => vec![Target::Head],
        TargetArg::Tail => vec![Target::Tail],
        TargetArg::Both => vec![Target::Both],
        TargetArg::Relation => vec![Target::Relation],
        TargetArg::All => vec![Target::Head, Target::Tail, Target::Both],
    };
    let categories = match a.strata {
        Strata::Categories => {
            let path = a
                .labels
                .as_ref()
                .ok_or_else(|| Error::Input("--strata categories needs --labels".into()))?;
            let labels = read_label_records(path, &vocab)?;
            let refs: Vec<&TripleStore> = stores.iter().collect();
            Some(categorize_relations(vocab.num_relations(), &refs, &labels)?)
        }
        _ => None,
    };
    let named: Vec<(RelationId, String)> = list(&a.relations)
        .into_iter()
        .map(|n| {
            vocab
                .relation(&n)
                .map(|r| (r, n.clone()))
                .ok_or_else(|| Error::Input(format!("unknown relation `{n}`")))
        })
        .collect::<Result<_>>()?;
    if a.strata == Strata::Relations && named.is_empty() {
        return Err(Error::Input("--strata relations needs --relations".into()));
    }
    let model = a
        .name
        .clone()
        .unwrap_or_else(|| table.config().kind.to_string());
    let mut rows = Vec::new();
    let mut dumps = String::new();
    for target in targets {
        let outcome =
            parallel::link_prediction(test.triples(), &table, &filter, target, a.workers)?;
        let mut push = |group: String, metrics: Metrics| {
            rows.push(MetricRow {
                model: model.clone(),
                target: target.name().into(),
                group,
                metrics,
            })
        };
        push("ALL".into(), outcome.metrics);
        let strata = match (&a.strata, &categories) {
            (Strata::Categories, Some(c)) => metrics_by_category(&outcome, c),
            (Strata::Relations, _) => metrics_by_relation(&outcome, &named),
            _ => BTreeMap::new(),
        };
        for (g, m) in strata {
            push(g, m);
        }
        if a.dump_ranks {
            dumps.push_str(&report::ranks_tsv(&outcome, &vocab));
        }
    }
    let text = report::metrics_tsv(&rows);
    print!("{text}");
    if let Some(dir) = &a.out {
        report::write_text(&dir.join("metrics.tsv"), &text)?;
        let json = serde_json::to_string_pretty(&report::summary_json(&rows)).expect("json");
        report::write_text(&dir.join("summary.json"), &(json + "\n"))?;
        if a.dump_ranks {
            report::write_text(&dir.join("ranks.tsv"), &dumps)?;
        }
    }
    Ok(())
}

fn named_sets(specs: &[String]) -> Result<Vec<(String, NamedEmbeddings)>> {
    specs
        .iter()
        .map(|spec| {
            let (name, path) = match spec.split_once('=') {
                Some((n, p)) => (n.to_string(), PathBuf::from(p)),
                None => {
                    let p = PathBuf::from(spec);
                    let stem = p
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_default();
                    (stem, p)
                }
            };
            Ok((name, export::read(&path)?.embeddings))
        })
        .collect()
}

fn labels_by_name(path: &Path) -> Result<BTreeMap<String, LabelRecord>> {
    let mut out = BTreeMap::new();
    for r in tsv::read_labels(path)? {
        out.entry(r.entity.clone()).or_insert(r);
    }
    Ok(out)
}

fn probe_cmd(a: &ProbeArgs) -> Result<()> {
    let cfg = a.config.resolve(&[])?;
    let probe_cfg = cfg.probe()?;
    let sets = named_sets(&a.embeddings)?;
    let labels = labels_by_name(&a.labels)?;
    let kinds: &[(&str, LabelKind)] = match a.label_kind {
        LabelKind::Type => &[("semantic_type", LabelKind::Type)],
        LabelKind::Group => &[("semantic_group", LabelKind::Group)],
        LabelKind::Both => &[
            ("semantic_type", LabelKind::Type),
            ("semantic_group", LabelKind::Group),
        ],
    };
    let refs: Vec<&NamedEmbeddings> = sets.iter().map(|(_, s)| s).collect();
    let mut rows = Vec::new();
    for (kind_name, kind) in kinds {
        let label_of = |n: &str| {
            labels.get(n).map(|r| match kind {
                LabelKind::Group => r.group.as_str(),
                _ => r.semantic_type.as_str(),
            })
        };
        let data = build_probe_dataset(&refs, label_of, &probe_cfg)?;
        for (name, set) in &sets {
            rows.push((
                name.clone(),
                kind_name.to_string(),
                classify(&data, set, &probe_cfg)?,
            ));
        }
    }
    emit(a.out.as_deref(), &report::probe_tsv(&rows))
}

fn power_cmd(a: &PowerArgs) -> Result<()> {
    let cfg = a.config.resolve(&[
        ("bootstrap_samples", s(&a.samples)),
        ("percentile", s(&a.percentile)),
    ])?;
    let samples: usize = cfg.get("bootstrap_samples")?;
    let percentile: f64 = cfg.get("percentile")?;
    let seed = cfg.seed(seed_offset::POWER)?;
    let workers = cfg.workers()?;
    let sets = named_sets(&a.embeddings)?;
    let labels = labels_by_name(&a.labels)?;
    let rows = tsv::read_power_rows(&a.pairs)?;
    let mut out = Vec::new();
    for (model, emb) in &sets {
        // entities per category, matched on semantic type or group
        let mut pools: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, n) in emb.names().iter().enumerate() {
            if let Some(r) = labels.get(n) {
                pools.entry(r.semantic_type.as_str()).or_default().push(i);
                if r.group != r.semantic_type {
                    pools.entry(r.group.as_str()).or_default().push(i);
                }
            }
        }
        type Pairs = Vec<(usize, usize)>;
        let mut strata: BTreeMap<(&str, &str), BTreeMap<&str, Pairs>> = BTreeMap::new();
        let mut missing = 0;
        for r in &rows {
            match (emb.index_of(&r.head), emb.index_of(&r.tail)) {
                (Some(h), Some(t)) => strata
                    .entry((r.head_category.as_str(), r.tail_category.as_str()))
                    .or_default()
                    .entry(r.task.as_str())
                    .or_default()
                    .push((h, t)),
                _ => missing += 1,
            }
        }
        if missing > 0 {
            warn(format!(
                "{model}: {missing} pairs lack embeddings and were skipped"
            ));
        }
        let keys: Vec<(&str, &str)> = strata.keys().copied().collect();
        let mut tasks = Vec::with_capacity(keys.len());
        for (hc, tc) in &keys {
            let pool = |c: &str| {
                pools.get(c).cloned().ok_or_else(|| {
                    Error::Input(format!("{model}: no embedded entity has category `{c}`"))
                })
            };
            let pairs = strata[&(*hc, *tc)].values().flatten().copied().collect();
            tasks.push(PowerTask {
                pairs,
                head_pool: pool(hc)?,
                tail_pool: pool(tc)?,
                samples,
                percentile,
            });
        }
        let results = parallel::bootstrap_all(emb, &tasks, seed, workers)?;
        let mut per_task: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
        let mut task_rows = Vec::new();
        for (key, res) in keys.iter().zip(&results) {
            for (task, pairs) in &strata[key] {
                let power = power_above(emb, pairs, res.threshold)?;
                let e = per_task.entry(task).or_default();
                e.0 += pairs.len();
                e.1 += power * pairs.len() as f64;
                task_rows.push(PowerRow {
                    model: model.clone(),
                    task: task.to_string(),
                    head_category: key.0.into(),
                    tail_category: key.1.into(),
                    pairs: pairs.len(),
                    power,
                    threshold: Some(res.threshold),
                });
            }
        }
        task_rows.sort_by(|a, b| {
            (&a.task, &a.head_category, &a.tail_category).cmp(&(
                &b.task,
                &b.head_category,
                &b.tail_category,
            ))
        });
        for (task, (n, weighted)) in per_task {
            task_rows.push(PowerRow {
                model: model.clone(),
                task: task.into(),
                head_category: "ALL".into(),
                tail_category: "ALL".into(),
                pairs: n,
                power: weighted / n as f64,
                threshold: None,
            });
        }
        out.extend(task_rows);
    }
    emit(a.out.as_deref(), &report::power_tsv(&out))
}

fn analyze_cmd(a: &AnalyzeArgs) -> Result<()> {
    let mut raw = Vec::new();
    for p in &a.triples {
        raw.extend(tsv::read_triples(p)?);
    }
    let vocab = build_vocabulary(
        raw.iter()
            .map(|(h, r, t)| (h.as_str(), r.as_str(), t.as_str())),
    );
    let (store, _) = encode_triples(
        raw.iter()
            .map(|(h, r, t)| (h.as_str(), r.as_str(), t.as_str())),
        &vocab,
        Split::Train,
    )?;
    let labels = read_label_records(&a.labels, &vocab)?;
    let cats = categorize_relations(vocab.num_relations(), &[&store], &labels)?;
    let mut counts = vec![0usize; vocab.num_relations()];
    for t in store.triples() {
        counts[t.rel.index()] += 1;
    }
    let mut text = String::from("relation\tcategory\ttriples\n");
    let mut totals: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for (i, c) in cats.iter().enumerate() {
        let label = c.map_or("-", |c| c.label());
        text.push_str(&format!(
            "{}\t{label}\t{}\n",
            vocab.relation_names()[i],
            counts[i]
        ));
        let e = totals.entry(label).or_default();
        e.0 += 1;
        e.1 += counts[i];
    }
    text.push_str("\ncategory\trelations\ttriples\n");
    for (label, (n, t)) in totals {
        text.push_str(&format!("{label}\t{n}\t{t}\n"));
    }
    emit(a.out.as_deref(), &text)
}

fn export_cmd(a: &ExportArgs) -> Result<()> {
    let file = checkpoint::read(&a.checkpoint)?;
    let vocab = load_vocab(&a.checkpoint)?;
    export::write(&a.out, a.format, &file.table, &vocab)
}
