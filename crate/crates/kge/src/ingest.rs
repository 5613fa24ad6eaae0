//! UMLS RRF parsing: concepts (MRCONSO), relations (MRREL), semantic types
//! (MRSTY) and the semantic-group table, plus transitive-closure files.
//!
//! RRF rows are pipe-delimited with a trailing pipe and no header. Column
//! positions default to the 2019AB layout and can all be overridden.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;

use kge_core::kg::{LabelRecord, Split, TripleStore, Vocabulary, DEFAULT_SEMANTIC_GROUPS};
use kge_core::Triple;

use crate::error::{Error, Result};
use crate::tsv::for_each_line;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConceptColumns {
    pub cui: usize,
    pub source: usize,
    pub suppress: usize,
}

impl Default for ConceptColumns {
    fn default() -> Self {
        ConceptColumns {
            cui: 0,
            source: 11,
            suppress: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RelationColumns {
    pub cui1: usize,
    pub rel: usize,
    pub cui2: usize,
    pub rela: usize,
    pub source: usize,
    pub suppress: usize,
}

impl Default for RelationColumns {
    fn default() -> Self {
        RelationColumns {
            cui1: 0,
            rel: 3,
            cui2: 4,
            rela: 7,
            source: 10,
            suppress: 14,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SemanticColumns {
    pub cui: usize,
    pub tui: usize,
    pub sty: usize,
}

impl Default for SemanticColumns {
    fn default() -> Self {
        SemanticColumns {
            cui: 0,
            tui: 1,
            sty: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RrfConfig {
    pub concepts: ConceptColumns,
    pub relations: RelationColumns,
    pub semantics: SemanticColumns,
    /// Source vocabulary (SAB) to keep; `None` keeps every source.
    pub source: Option<String>,
    pub excluded_suppress: BTreeSet<String>,
    pub allowed_groups: BTreeSet<String>,
    /// Excluded semantic type codes (TUIs).
    pub excluded_types: BTreeSet<String>,
    /// Emit `(CUI1, REL, CUI2)` instead of `(CUI2, REL, CUI1)`.
    pub flip_direction: bool,
}

impl Default for RrfConfig {
    fn default() -> Self {
        RrfConfig {
            concepts: ConceptColumns::default(),
            relations: RelationColumns::default(),
            semantics: SemanticColumns::default(),
            source: Some("SNOMEDCT_US".into()),
            excluded_suppress: ["O", "E", "Y"].into_iter().map(String::from).collect(),
            allowed_groups: DEFAULT_SEMANTIC_GROUPS
                .into_iter()
                .map(String::from)
                .collect(),
            excluded_types: BTreeSet::new(),
            flip_direction: false,
        }
    }
}

fn distinct(kind: &str, cols: &[usize]) -> Result<()> {
    let set: HashSet<_> = cols.iter().collect();
    if set.len() != cols.len() {
        return Err(Error::Input(format!(
            "{kind} column indices must be distinct: {cols:?}"
        )));
    }
    Ok(())
}

impl RrfConfig {
    /// Checks column layouts and that allowed groups belong to `groups`.
    pub fn validate<S: AsRef<str>>(&self, groups: &[S]) -> Result<()> {
        let c = self.concepts;
        distinct("concept", &[c.cui, c.source, c.suppress])?;
        let r = self.relations;
        distinct(
            "relation",
            &[r.cui1, r.rel, r.cui2, r.rela, r.source, r.suppress],
        )?;
        let s = self.semantics;
        distinct("semantic", &[s.cui, s.tui, s.sty])?;
        for g in &self.allowed_groups {
            if !groups.iter().any(|x| x.as_ref() == g) {
                return Err(Error::Input(format!("unknown semantic group `{g}`")));
            }
        }
        Ok(())
    }

    fn keeps(&self, source: &str, suppress: &str) -> bool {
        self.source.as_deref().is_none_or(|s| s == source)
            && !self.excluded_suppress.contains(suppress)
    }
}

fn rrf_fields<'a>(
    path: &Path,
    line: usize,
    text: &'a str,
    max_index: usize,
) -> Result<Vec<&'a str>> {
    let body = text.strip_suffix('|').unwrap_or(text);
    let cols: Vec<&str> = body.split('|').collect();
    if cols.len() <= max_index {
        return Err(Error::parse(
            path,
            line,
            format!(
                "expected at least {} columns, found {}",
                max_index + 1,
                cols.len()
            ),
        ));
    }
    Ok(cols)
}

/// Concepts with at least one row from the configured source whose
/// suppression flag is not excluded.
pub fn parse_concepts(path: &Path, cfg: &RrfConfig) -> Result<BTreeSet<String>> {
    let c = cfg.concepts;
    let max = c.cui.max(c.source).max(c.suppress);
    let mut out = BTreeSet::new();
    for_each_line(path, |line, text| {
        let cols = rrf_fields(path, line, text, max)?;
        if cfg.keeps(cols[c.source], cols[c.suppress]) && !cols[c.cui].is_empty() {
            out.insert(cols[c.cui].to_string());
        }
        Ok(())
    })?;
    Ok(out)
}

/// Relation rows between two concepts of `concepts`, in file order. The
/// label is RELA when present and REL otherwise.
pub fn parse_relations(
    path: &Path,
    cfg: &RrfConfig,
    concepts: &BTreeSet<String>,
) -> Result<Vec<(String, String, String)>> {
    let r = cfg.relations;
    let max = [r.cui1, r.rel, r.cui2, r.rela, r.source, r.suppress]
        .into_iter()
        .max()
        .unwrap();
    let mut out = Vec::new();
    for_each_line(path, |line, text| {
        let cols = rrf_fields(path, line, text, max)?;
        if !cfg.keeps(cols[r.source], cols[r.suppress]) {
            return Ok(());
        }
        let (c1, c2) = (cols[r.cui1], cols[r.cui2]);
        if !concepts.contains(c1) || !concepts.contains(c2) {
            return Ok(());
        }
        let label = if cols[r.rela].is_empty() {
            cols[r.rel]
        } else {
            cols[r.rela]
        };
        if label.is_empty() {
            return Err(Error::parse(
                path,
                line,
                "relation row has neither REL nor RELA",
            ));
        }
        let (h, t) = if cfg.flip_direction {
            (c1, c2)
        } else {
            (c2, c1)
        };
        out.push((h.to_string(), label.to_string(), t.to_string()));
        Ok(())
    })?;
    Ok(out)
}

/// Semantic type code to `(group code, type name)`, from the
/// `GROUP|GroupName|TUI|TypeName` group file.
pub type GroupMap = HashMap<String, String>;

pub fn parse_semgroups(path: &Path) -> Result<GroupMap> {
    let mut map = GroupMap::new();
    for_each_line(path, |line, text| {
        let cols = rrf_fields(path, line, text, 2)?;
        let (group, tui) = (cols[0].trim(), cols[2].trim());
        if let Some(prev) = map.insert(tui.to_string(), group.to_string()) {
            if prev != group {
                return Err(Error::parse(
                    path,
                    line,
                    format!("type {tui} listed under groups {prev} and {group}"),
                ));
            }
        }
        Ok(())
    })?;
    Ok(map)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptSemantics {
    pub tui: String,
    pub type_name: String,
    pub group: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Semantics {
    /// Retained concepts with their authoritative (first retained) type.
    pub labels: BTreeMap<String, ConceptSemantics>,
    /// Concepts none of whose type rows survived the filters.
    pub dropped: BTreeSet<String>,
    pub warnings: Vec<String>,
}

impl Semantics {
    /// Label records for `concepts` that have a retained type.
    pub fn records<'a>(&self, concepts: impl IntoIterator<Item = &'a str>) -> Vec<LabelRecord> {
        concepts
            .into_iter()
            .filter_map(|c| {
                self.labels.get(c).map(|s| LabelRecord {
                    entity: c.to_string(),
                    semantic_type: s.tui.clone(),
                    group: s.group.clone(),
                })
            })
            .collect()
    }
}

/// Per-concept semantic type and group. Rows whose type is excluded or
/// whose group is not allowed are skipped; a concept keeps its first
/// surviving row, with a warning when later rows disagree.
pub fn parse_semantics(path: &Path, cfg: &RrfConfig, groups: &GroupMap) -> Result<Semantics> {
    let s = cfg.semantics;
    let max = s.cui.max(s.tui).max(s.sty);
    let mut out = Semantics::default();
    let mut seen = BTreeSet::new();
    for_each_line(path, |line, text| {
        let cols = rrf_fields(path, line, text, max)?;
        let (cui, tui) = (cols[s.cui], cols[s.tui]);
        seen.insert(cui.to_string());
        if cfg.excluded_types.contains(tui) {
            return Ok(());
        }
        let group = groups.get(tui).ok_or_else(|| {
            Error::parse(
                path,
                line,
                format!("semantic type {tui} is missing from the group map"),
            )
        })?;
        if !cfg.allowed_groups.contains(group) {
            return Ok(());
        }
        match out.labels.get(cui) {
            Some(first) if first.tui != tui => out.warnings.push(format!(
                "line {line}: {cui} has several semantic types; keeping {} over {tui}",
                first.tui
            )),
            Some(_) => {}
            None => {
                out.labels.insert(
                    cui.to_string(),
                    ConceptSemantics {
                        tui: tui.to_string(),
                        type_name: cols[s.sty].to_string(),
                        group: group.clone(),
                    },
                );
            }
        }
        Ok(())
    })?;
    out.dropped = seen
        .into_iter()
        .filter(|c| !out.labels.contains_key(c))
        .collect();
    Ok(out)
}

/// Closure triples encoded against `vocab`; rows naming unknown entities or
/// relations are skipped and counted.
pub fn load_closure(path: &Path, vocab: &Vocabulary) -> Result<(TripleStore, usize)> {
    let mut store = TripleStore::new();
    let mut skipped = 0;
    for (h, r, t) in crate::tsv::read_triples(path)? {
        match (vocab.entity(&h), vocab.relation(&r), vocab.entity(&t)) {
            (Some(h), Some(r), Some(t)) => {
                store.insert(
                    Triple {
                        head: h,
                        rel: r,
                        tail: t,
                    },
                    Split::Closure,
                );
            }
            _ => skipped += 1,
        }
    }
    Ok((store, skipped))
}
