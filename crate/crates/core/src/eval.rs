//! Filtered ranking evaluation: link prediction, relation prediction,
//! MR/MRR/MQ₁₀₀/Hits@k and per-category stratification.
//!
//! Ranking is pessimistic: a candidate whose score ties the true triple's
//! score counts as ranked above it, so a constant scorer gets the worst rank.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use hashbrown::{HashMap, HashSet};

use crate::kg::{EntityId, RelationId, SemanticLabels, Triple, TripleStore};
use crate::models::{score_candidates_into, EmbeddingTable, Query};

/// Rank cut-off of the quantile metric.
pub const MQ_CUTOFF: usize = 100;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("no test triples to evaluate")]
    EmptyTest,
    #[error("quantile needs a candidate pool of at least 2, got {0}")]
    PoolTooSmall(usize),
    #[error("rank {rank} outside pool of size {pool}")]
    RankOutOfRange { rank: usize, pool: usize },
    #[error("true candidate {index} outside the {len} scored candidates")]
    MissingTruth { index: usize, len: usize },
    #[error("entity {0:?} has no semantic label")]
    Unlabeled(EntityId),
}

/// Known-true triples excluded from candidate pools.
#[derive(Debug, Clone, Default)]
pub struct FilterSet {
    known: HashSet<Triple>,
}

impl FilterSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Union of every triple in `stores`, whatever their split tags.
    pub fn from_stores(stores: &[&TripleStore]) -> Self {
        let mut f = FilterSet::new();
        for s in stores {
            f.extend(s.triples().iter().copied());
        }
        f
    }

    pub fn insert(&mut self, t: Triple) -> bool {
        self.known.insert(t)
    }

    pub fn extend<I: IntoIterator<Item = Triple>>(&mut self, it: I) {
        self.known.extend(it);
    }

    #[inline]
    pub fn contains(&self, t: &Triple) -> bool {
        self.known.contains(t)
    }

    pub fn len(&self) -> usize {
        self.known.len()
    }

    pub fn is_empty(&self) -> bool {
        self.known.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Head,
    Tail,
    Relation,
}

impl Slot {
    pub const fn name(self) -> &'static str {
        match self {
            Slot::Head => "head",
            Slot::Tail => "tail",
            Slot::Relation => "relation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Head,
    Tail,
    Both,
    Relation,
}

impl Target {
    pub const fn name(self) -> &'static str {
        match self {
            Target::Head => "head",
            Target::Tail => "tail",
            Target::Both => "both",
            Target::Relation => "relation",
        }
    }

    pub fn slots(self) -> &'static [Slot] {
        match self {
            Target::Head => &[Slot::Head],
            Target::Tail => &[Slot::Tail],
            Target::Both => &[Slot::Head, Slot::Tail],
            Target::Relation => &[Slot::Relation],
        }
    }
}

impl core::str::FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "head" => Ok(Target::Head),
            "tail" => Ok(Target::Tail),
            "both" => Ok(Target::Both),
            "relation" => Ok(Target::Relation),
            _ => Err(alloc::format!(
                "unknown target `{s}` (expected head, tail, both or relation)"
            )),
        }
    }
}

/// Filtered rank of one query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryRank {
    pub triple: Triple,
    pub slot: Slot,
    /// 1-based, pessimistic on ties.
    pub rank: usize,
    /// Candidates left after filtering, the true one included.
    pub pool: usize,
}

/// Quantile of the true candidate within its pool, zero beyond rank 100.
pub fn mq100(rank: usize, pool: usize) -> Result<f64, EvalError> {
    if pool < 2 {
        return Err(EvalError::PoolTooSmall(pool));
    }
    if rank == 0 || rank > pool {
        return Err(EvalError::RankOutOfRange { rank, pool });
    }
    if rank > MQ_CUTOFF {
        return Ok(0.0);
    }
    Ok((pool - rank) as f64 / (pool - 1) as f64)
}

/// Aggregate ranking metrics.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Metrics {
    pub count: usize,
    pub mr: f64,
    pub mrr: f64,
    pub mq100: f64,
    pub hits1: f64,
    pub hits3: f64,
    pub hits10: f64,
}

impl Metrics {
    /// Means over `(rank, pool)` pairs. A single-candidate pool counts as a
    /// perfect quantile.
    pub fn from_ranks<I: IntoIterator<Item = (usize, usize)>>(ranks: I) -> Metrics {
        let mut m = Metrics::default();
        for (rank, pool) in ranks {
            m.count += 1;
            m.mr += rank as f64;
            m.mrr += 1.0 / rank as f64;
            m.mq100 += if pool < 2 {
                1.0
            } else {
                mq100(rank, pool).unwrap_or(0.0)
            };
            m.hits1 += (rank <= 1) as u8 as f64;
            m.hits3 += (rank <= 3) as u8 as f64;
            m.hits10 += (rank <= 10) as u8 as f64;
        }
        if m.count > 0 {
            let n = m.count as f64;
            m.mr /= n;
            m.mrr /= n;
            m.mq100 /= n;
            m.hits1 /= n;
            m.hits3 /= n;
            m.hits10 /= n;
        }
        m
    }

    /// `H@1 ≤ H@3 ≤ H@10`, `H@1 ≤ MRR`, bounded metrics in `[0, 1]`.
    pub fn is_consistent(&self) -> bool {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        unit(self.mrr)
            && unit(self.mq100)
            && unit(self.hits1)
            && unit(self.hits3)
            && unit(self.hits10)
            && self.hits1 <= self.hits3
            && self.hits3 <= self.hits10
            && self.hits1 <= self.mrr + 1e-12
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankingOutcome {
    pub target: Target,
    pub queries: Vec<QueryRank>,
    pub metrics: Metrics,
}

impl RankingOutcome {
    pub fn from_queries(target: Target, queries: Vec<QueryRank>) -> Self {
        let metrics = Metrics::from_ranks(queries.iter().map(|q| (q.rank, q.pool)));
        RankingOutcome {
            target,
            queries,
            metrics,
        }
    }
}

/// Rank of `scores[truth]` among candidates not rejected by `filtered`.
/// The true candidate is never filtered.
pub fn rank_in_scores(
    scores: &[f64],
    truth: usize,
    filtered: impl Fn(usize) -> bool,
) -> Result<(usize, usize), EvalError> {
    let Some(&target) = scores.get(truth) else {
        return Err(EvalError::MissingTruth {
            index: truth,
            len: scores.len(),
        });
    };
    let mut above = 0;
    let mut pool = 1;
    for (i, &s) in scores.iter().enumerate() {
        if i == truth || filtered(i) {
            continue;
        }
        pool += 1;
        // NaN on either side counts against the true candidate
        if !(s < target) {
            above += 1;
        }
    }
    Ok((above + 1, pool))
}

fn rank_with_buffer(
    t: &Triple,
    slot: Slot,
    table: &EmbeddingTable,
    filter: &FilterSet,
    buf: &mut Vec<f64>,
) -> Result<(usize, usize), EvalError> {
    match slot {
        Slot::Tail => {
            score_candidates_into(
                table,
                Query::Tail {
                    head: t.head,
                    rel: t.rel,
                },
                buf,
            );
            rank_in_scores(buf, t.tail.index(), |e| {
                filter.contains(&Triple {
                    tail: EntityId(e as u32),
                    ..*t
                })
            })
        }
        Slot::Head => {
            score_candidates_into(
                table,
                Query::Head {
                    rel: t.rel,
                    tail: t.tail,
                },
                buf,
            );
            rank_in_scores(buf, t.head.index(), |e| {
                filter.contains(&Triple {
                    head: EntityId(e as u32),
                    ..*t
                })
            })
        }
        Slot::Relation => {
            score_candidates_into(
                table,
                Query::Relation {
                    head: t.head,
                    tail: t.tail,
                },
                buf,
            );
            rank_in_scores(buf, t.rel.index(), |r| {
                filter.contains(&Triple {
                    rel: RelationId(r as u32),
                    ..*t
                })
            })
        }
    }
}

/// Filtered `(rank, pool)` of `t` for the given slot.
pub fn rank(
    t: &Triple,
    slot: Slot,
    table: &EmbeddingTable,
    filter: &FilterSet,
) -> Result<(usize, usize), EvalError> {
    rank_with_buffer(t, slot, table, filter, &mut Vec::new())
}

/// Ranks every query implied by `target` for `triples`, in triple order
/// (head before tail for [`Target::Both`]).
pub fn rank_queries(
    triples: &[Triple],
    table: &EmbeddingTable,
    filter: &FilterSet,
    target: Target,
) -> Result<Vec<QueryRank>, EvalError> {
    let mut buf = Vec::with_capacity(table.num_entities().max(table.num_relations()));
    let mut out = Vec::with_capacity(triples.len() * target.slots().len());
    for t in triples {
        for &slot in target.slots() {
            let (rank, pool) = rank_with_buffer(t, slot, table, filter, &mut buf)?;
            out.push(QueryRank {
                triple: *t,
                slot,
                rank,
                pool,
            });
        }
    }
    Ok(out)
}

/// Filtered link prediction. With [`Target::Both`] every triple contributes a
/// head and a tail query of equal weight, which equals averaging the two per
/// triple before aggregating.
pub fn link_prediction(
    test: &[Triple],
    table: &EmbeddingTable,
    filter: &FilterSet,
    target: Target,
) -> Result<RankingOutcome, EvalError> {
    if test.is_empty() {
        return Err(EvalError::EmptyTest);
    }
    let queries = rank_queries(test, table, filter, target)?;
    Ok(RankingOutcome::from_queries(target, queries))
}

/// Filtered relation prediction over `(h, ?, t)`.
pub fn relation_prediction(
    test: &[Triple],
    table: &EmbeddingTable,
    filter: &FilterSet,
) -> Result<RankingOutcome, EvalError> {
    link_prediction(test, table, filter, Target::Relation)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cardinality {
    One,
    Many,
}

/// Relation type grouping by how many semantic groups its heads and tails
/// span and whether every fact links an entity to the same group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RelationCategory {
    pub head: Cardinality,
    pub tail: Cardinality,
    pub homogeneous: bool,
}

impl RelationCategory {
    pub fn label(&self) -> &'static str {
        use Cardinality::*;
        match (self.head, self.tail, self.homogeneous) {
            (One, One, true) => "1-1-hom",
            (One, One, false) => "1-1",
            (One, Many, _) => "1-M",
            (Many, One, _) => "M-1",
            (Many, Many, true) => "M-M-hom",
            (Many, Many, false) => "M-M",
        }
    }
}

fn category_from_pairs(pairs: &HashSet<(usize, usize)>) -> RelationCategory {
    let heads: HashSet<usize> = pairs.iter().map(|p| p.0).collect();
    let tails: HashSet<usize> = pairs.iter().map(|p| p.1).collect();
    let card = |n: usize| {
        if n == 1 {
            Cardinality::One
        } else {
            Cardinality::Many
        }
    };
    RelationCategory {
        head: card(heads.len()),
        tail: card(tails.len()),
        homogeneous: pairs.iter().all(|(a, b)| a == b),
    }
}

/// Category of one relation over every triple of `stores`.
pub fn categorize_relation(
    rel: RelationId,
    stores: &[&TripleStore],
    labels: &SemanticLabels,
) -> Result<Option<RelationCategory>, EvalError> {
    let mut pairs = HashSet::new();
    for s in stores {
        for t in s.triples().iter().filter(|t| t.rel == rel) {
            let g = |e: EntityId| labels.group_index(e).ok_or(EvalError::Unlabeled(e));
            pairs.insert((g(t.head)?, g(t.tail)?));
        }
    }
    Ok((!pairs.is_empty()).then(|| category_from_pairs(&pairs)))
}

/// Categories for relations `0..num_relations` in one pass; `None` for
/// relations with no triples.
pub fn categorize_relations(
    num_relations: usize,
    stores: &[&TripleStore],
    labels: &SemanticLabels,
) -> Result<Vec<Option<RelationCategory>>, EvalError> {
    let mut pairs: HashMap<RelationId, HashSet<(usize, usize)>> = HashMap::new();
    for s in stores {
        for t in s.triples() {
            let g = |e: EntityId| labels.group_index(e).ok_or(EvalError::Unlabeled(e));
            pairs
                .entry(t.rel)
                .or_default()
                .insert((g(t.head)?, g(t.tail)?));
        }
    }
    Ok((0..num_relations)
        .map(|r| pairs.get(&RelationId(r as u32)).map(category_from_pairs))
        .collect())
}

/// Metrics per stratum; queries mapped to `None` are left out.
pub fn stratified_metrics(
    outcome: &RankingOutcome,
    stratum: impl Fn(&QueryRank) -> Option<String>,
) -> BTreeMap<String, Metrics> {
    let mut groups: BTreeMap<String, Vec<(usize, usize)>> = BTreeMap::new();
    for q in &outcome.queries {
        if let Some(key) = stratum(q) {
            groups.entry(key).or_default().push((q.rank, q.pool));
        }
    }
    groups
        .into_iter()
        .map(|(k, v)| (k, Metrics::from_ranks(v)))
        .collect()
}

/// Metrics per relation category label.
pub fn metrics_by_category(
    outcome: &RankingOutcome,
    categories: &[Option<RelationCategory>],
) -> BTreeMap<String, Metrics> {
    stratified_metrics(outcome, |q| {
        categories
            .get(q.triple.rel.index())
            .copied()
            .flatten()
            .map(|c| c.label().to_string())
    })
}

/// Metrics for each explicitly named relation.
pub fn metrics_by_relation(
    outcome: &RankingOutcome,
    relations: &[(RelationId, String)],
) -> BTreeMap<String, Metrics> {
    stratified_metrics(outcome, |q| {
        relations
            .iter()
            .find(|(r, _)| *r == q.triple.rel)
            .map(|(_, name)| name.clone())
    })
}
