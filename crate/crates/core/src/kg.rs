//! Entities, relations, triples and the stores that hold them.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use hashbrown::HashMap;

/// The eight broad semantic groups used when no group vocabulary is supplied.
pub const DEFAULT_SEMANTIC_GROUPS: [&str; 8] = [
    "ANAT", "CHEM", "CONC", "DEVI", "DISO", "PHEN", "PHYS", "PROC",
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KgError {
    #[error("line {line}: unknown entity `{name}`")]
    UnknownEntity { line: usize, name: String },
    #[error("line {line}: unknown relation `{name}`")]
    UnknownRelation { line: usize, name: String },
    #[error("semantic type `{semantic_type}` assigned to both `{first}` and `{second}`")]
    TypeGroupConflict {
        semantic_type: String,
        first: String,
        second: String,
    },
    #[error("entity `{entity}` labeled twice with different types (`{first}`, `{second}`)")]
    ConflictingLabel {
        entity: String,
        first: String,
        second: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntityId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelationId(pub u32);

impl EntityId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl RelationId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub head: EntityId,
    pub rel: RelationId,
    pub tail: EntityId,
}

impl Triple {
    pub const fn new(head: u32, rel: u32, tail: u32) -> Self {
        Triple {
            head: EntityId(head),
            rel: RelationId(rel),
            tail: EntityId(tail),
        }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.head.0, self.rel.0, self.tail.0)
    }
}

#[derive(Debug, Clone, Default)]
struct Interner {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

impl Interner {
    fn intern(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    fn get(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }
}

/// Bidirectional name/id mapping for entities and relations.
///
/// Ids are dense and assigned in first-seen order.
#[derive(Debug, Clone, Default)]
pub struct Vocabulary {
    entities: Interner,
    relations: Interner,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_names<E, R>(entities: E, relations: R) -> Self
    where
        E: IntoIterator,
        E::Item: AsRef<str>,
        R: IntoIterator,
        R::Item: AsRef<str>,
    {
        let mut vocab = Vocabulary::new();
        for e in entities {
            vocab.intern_entity(e.as_ref());
        }
        for r in relations {
            vocab.intern_relation(r.as_ref());
        }
        vocab
    }

    pub fn intern_entity(&mut self, name: &str) -> EntityId {
        EntityId(self.entities.intern(name))
    }

    pub fn intern_relation(&mut self, name: &str) -> RelationId {
        RelationId(self.relations.intern(name))
    }

    pub fn entity(&self, name: &str) -> Option<EntityId> {
        self.entities.get(name).map(EntityId)
    }

    pub fn relation(&self, name: &str) -> Option<RelationId> {
        self.relations.get(name).map(RelationId)
    }

    pub fn entity_name(&self, id: EntityId) -> &str {
        &self.entities.names[id.index()]
    }

    pub fn relation_name(&self, id: RelationId) -> &str {
        &self.relations.names[id.index()]
    }

    pub fn entity_names(&self) -> &[String] {
        &self.entities.names
    }

    pub fn relation_names(&self) -> &[String] {
        &self.relations.names
    }

    pub fn num_entities(&self) -> usize {
        self.entities.names.len()
    }

    pub fn num_relations(&self) -> usize {
        self.relations.names.len()
    }

    pub fn decode(&self, t: &Triple) -> (&str, &str, &str) {
        (
            self.entity_name(t.head),
            self.relation_name(t.rel),
            self.entity_name(t.tail),
        )
    }
}

/// Interns every string of `raw` in first-seen order (head, relation, tail).
pub fn build_vocabulary<I, S>(raw: I) -> Vocabulary
where
    I: IntoIterator<Item = (S, S, S)>,
    S: AsRef<str>,
{
    let mut vocab = Vocabulary::new();
    for (h, r, t) in raw {
        vocab.intern_entity(h.as_ref());
        vocab.intern_relation(r.as_ref());
        vocab.intern_entity(t.as_ref());
    }
    vocab
}

/// Encodes raw string triples against `vocab` into a deduplicated store tagged
/// with `split`. Returns the store and the number of dropped duplicates.
pub fn encode_triples<I, S>(
    raw: I,
    vocab: &Vocabulary,
    split: Split,
) -> Result<(TripleStore, usize), KgError>
where
    I: IntoIterator<Item = (S, S, S)>,
    S: AsRef<str>,
{
    let mut store = TripleStore::new();
    let mut duplicates = 0;
    for (i, (h, r, t)) in raw.into_iter().enumerate() {
        let line = i + 1;
        let head = vocab
            .entity(h.as_ref())
            .ok_or_else(|| KgError::UnknownEntity {
                line,
                name: h.as_ref().to_string(),
            })?;
        let rel = vocab
            .relation(r.as_ref())
            .ok_or_else(|| KgError::UnknownRelation {
                line,
                name: r.as_ref().to_string(),
            })?;
        let tail = vocab
            .entity(t.as_ref())
            .ok_or_else(|| KgError::UnknownEntity {
                line,
                name: t.as_ref().to_string(),
            })?;
        if !store.insert(Triple { head, rel, tail }, split) {
            duplicates += 1;
        }
    }
    Ok((store, duplicates))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Valid,
    Test,
    Closure,
}

impl Split {
    pub const ALL: [Split; 4] = [Split::Train, Split::Valid, Split::Test, Split::Closure];

    #[inline]
    pub const fn bit(self) -> u8 {
        match self {
            Split::Train => 1,
            Split::Valid => 2,
            Split::Test => 4,
            Split::Closure => 8,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
            Split::Closure => "closure",
        }
    }
}

/// A set of splits, used to select which parts of a store a query sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SplitMask(pub u8);

impl SplitMask {
    pub const NONE: SplitMask = SplitMask(0);
    pub const ALL: SplitMask = SplitMask(0x0f);

    pub const fn of(split: Split) -> Self {
        SplitMask(split.bit())
    }

    pub const fn with(self, split: Split) -> Self {
        SplitMask(self.0 | split.bit())
    }

    #[inline]
    pub const fn contains(self, split: Split) -> bool {
        self.0 & split.bit() != 0
    }

    #[inline]
    pub const fn intersects(self, other: SplitMask) -> bool {
        self.0 & other.0 != 0
    }
}

impl From<Split> for SplitMask {
    fn from(s: Split) -> Self {
        SplitMask::of(s)
    }
}

impl core::ops::BitOr for SplitMask {
    type Output = SplitMask;
    fn bitor(self, rhs: SplitMask) -> SplitMask {
        SplitMask(self.0 | rhs.0)
    }
}

impl core::ops::BitOr<Split> for SplitMask {
    type Output = SplitMask;
    fn bitor(self, rhs: Split) -> SplitMask {
        self.with(rhs)
    }
}

/// Ordered id-triples with a split tag each and a hash index for containment.
///
/// A triple may appear once per split; inserting it again into the same split
/// is a no-op.
#[derive(Debug, Clone, Default)]
pub struct TripleStore {
    triples: Vec<Triple>,
    splits: Vec<Split>,
    index: HashMap<Triple, SplitMask>,
}

impl TripleStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a single-split store, dropping duplicates.
    pub fn from_triples<I: IntoIterator<Item = Triple>>(triples: I, split: Split) -> Self {
        let mut store = TripleStore::new();
        for t in triples {
            store.insert(t, split);
        }
        store
    }

    /// Returns `false` when `t` was already present in `split`.
    pub fn insert(&mut self, t: Triple, split: Split) -> bool {
        let mask = self.index.entry(t).or_default();
        if mask.contains(split) {
            return false;
        }
        *mask = mask.with(split);
        self.triples.push(t);
        self.splits.push(split);
        true
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn splits(&self) -> &[Split] {
        &self.splits
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Triple, Split)> + '_ {
        self.triples.iter().zip(self.splits.iter().copied())
    }

    pub fn iter_split(&self, split: Split) -> impl Iterator<Item = &Triple> + '_ {
        self.iter()
            .filter(move |(_, s)| *s == split)
            .map(|(t, _)| t)
    }

    /// True if `t` is stored in any split.
    #[inline]
    pub fn contains(&self, t: &Triple) -> bool {
        self.index.contains_key(t)
    }

    /// True if `t` is stored in at least one split of `mask`.
    #[inline]
    pub fn contains_in(&self, t: &Triple, mask: SplitMask) -> bool {
        self.index.get(t).is_some_and(|m| m.intersects(mask))
    }

    pub fn mask_of(&self, t: &Triple) -> SplitMask {
        self.index.get(t).copied().unwrap_or(SplitMask::NONE)
    }

    /// Appends every triple of `other`, keeping its split tags.
    pub fn extend_from(&mut self, other: &TripleStore) {
        for (t, s) in other.iter() {
            self.insert(*t, s);
        }
    }

    /// Largest entity id + 1 and relation id + 1 seen in the store.
    pub fn id_bounds(&self) -> (usize, usize) {
        self.triples.iter().fold((0, 0), |(e, r), t| {
            (
                e.max(t.head.index() + 1).max(t.tail.index() + 1),
                r.max(t.rel.index() + 1),
            )
        })
    }
}

/// One row of a labels file: entity, semantic type, semantic group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelRecord {
    pub entity: String,
    pub semantic_type: String,
    pub group: String,
}

/// Per-entity semantic type and group assignments.
#[derive(Debug, Clone, Default)]
pub struct SemanticLabels {
    types: Vec<String>,
    groups: Vec<String>,
    type_group: Vec<usize>,
    by_entity: HashMap<EntityId, usize>,
}

impl SemanticLabels {
    /// Builds labels for every record whose entity is in `vocab`; records for
    /// unknown entities are ignored.
    pub fn from_records(records: &[LabelRecord], vocab: &Vocabulary) -> Result<Self, KgError> {
        let mut labels = SemanticLabels::default();
        let mut type_index: HashMap<&str, usize> = HashMap::new();
        let mut group_index: HashMap<&str, usize> = HashMap::new();
        for rec in records {
            let group = match group_index.get(rec.group.as_str()) {
                Some(&g) => g,
                None => {
                    let g = labels.groups.len();
                    labels.groups.push(rec.group.clone());
                    group_index.insert(rec.group.as_str(), g);
                    g
                }
            };
            let ty = match type_index.get(rec.semantic_type.as_str()) {
                Some(&ty) => {
                    if labels.type_group[ty] != group {
                        return Err(KgError::TypeGroupConflict {
                            semantic_type: rec.semantic_type.clone(),
                            first: labels.groups[labels.type_group[ty]].clone(),
                            second: rec.group.clone(),
                        });
                    }
                    ty
                }
                None => {
                    let ty = labels.types.len();
                    labels.types.push(rec.semantic_type.clone());
                    labels.type_group.push(group);
                    type_index.insert(rec.semantic_type.as_str(), ty);
                    ty
                }
            };
            let Some(entity) = vocab.entity(&rec.entity) else {
                continue;
            };
            match labels.by_entity.get(&entity) {
                Some(&prev) if prev != ty => {
                    return Err(KgError::ConflictingLabel {
                        entity: rec.entity.clone(),
                        first: labels.types[prev].clone(),
                        second: rec.semantic_type.clone(),
                    })
                }
                Some(_) => {}
                None => {
                    labels.by_entity.insert(entity, ty);
                }
            }
        }
        Ok(labels)
    }

    pub fn len(&self) -> usize {
        self.by_entity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_entity.is_empty()
    }

    pub fn type_index(&self, e: EntityId) -> Option<usize> {
        self.by_entity.get(&e).copied()
    }

    pub fn group_index(&self, e: EntityId) -> Option<usize> {
        self.type_index(e).map(|t| self.type_group[t])
    }

    pub fn semantic_type(&self, e: EntityId) -> Option<&str> {
        self.type_index(e).map(|t| self.types[t].as_str())
    }

    pub fn group(&self, e: EntityId) -> Option<&str> {
        self.group_index(e).map(|g| self.groups[g].as_str())
    }

    pub fn types(&self) -> &[String] {
        &self.types
    }

    pub fn groups(&self) -> &[String] {
        &self.groups
    }
}
