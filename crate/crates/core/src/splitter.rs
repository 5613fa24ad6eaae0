//! Reciprocal-aware train/valid/test splitting.
//!
//! Triples are first grouped with their reciprocal (`(h, r, t)` with
//! `(t, r⁻¹, h)`), groups are shuffled with a seeded generator and assigned
//! whole to a split, and finally any valid/test triple that mentions an entity
//! or relation absent from train is moved (with its reciprocal) into train.

use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::kg::{RelationId, Split, Triple, TripleStore};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SplitError {
    #[error("split fractions must be positive and sum to 1, got ({train}, {valid}, {test})")]
    Ratios { train: f64, valid: f64, test: f64 },
    #[error("relation {0:?} already paired with a different reciprocal")]
    Conflict(RelationId),
}

/// Partial involution on relation ids.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReciprocalMap {
    map: HashMap<RelationId, RelationId>,
}

impl ReciprocalMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Pairs `a` with `b`. Passing the same relation twice declares it symmetric.
    pub fn insert_pair(&mut self, a: RelationId, b: RelationId) -> Result<(), SplitError> {
        for (x, y) in [(a, b), (b, a)] {
            if let Some(&prev) = self.map.get(&x) {
                if prev != y {
                    return Err(SplitError::Conflict(x));
                }
            }
        }
        self.map.insert(a, b);
        self.map.insert(b, a);
        Ok(())
    }

    pub fn get(&self, r: RelationId) -> Option<RelationId> {
        self.map.get(&r).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// `(t, r⁻¹, h)` when `r` has a declared reciprocal.
    pub fn reciprocal_of(&self, t: &Triple) -> Option<Triple> {
        self.get(t.rel).map(|inv| Triple {
            head: t.tail,
            rel: inv,
            tail: t.head,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train: f64,
    pub valid: f64,
    pub test: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train: f64, valid: f64, test: f64, seed: u64) -> Result<Self, SplitError> {
        let spec = SplitSpec {
            train,
            valid,
            test,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SplitError> {
        let ok = [self.train, self.valid, self.test]
            .iter()
            .all(|f| f.is_finite() && *f > 0.0)
            && (self.train + self.valid + self.test - 1.0).abs() <= 1e-9;
        if ok {
            Ok(())
        } else {
            Err(SplitError::Ratios {
                train: self.train,
                valid: self.valid,
                test: self.test,
            })
        }
    }
}

/// Groups each triple with its reciprocal when the reciprocal is also in the
/// store. Every distinct triple lands in exactly one group; groups are
/// emitted in order of their first member.
pub fn pair_reciprocals(store: &TripleStore, map: &ReciprocalMap) -> Vec<Vec<Triple>> {
    let mut position: HashMap<Triple, usize> = HashMap::with_capacity(store.len());
    let mut distinct = Vec::with_capacity(store.len());
    for t in store.triples() {
        if !position.contains_key(t) {
            position.insert(*t, distinct.len());
            distinct.push(*t);
        }
    }
    let mut taken = vec![false; distinct.len()];
    let mut groups = Vec::new();
    for (i, t) in distinct.iter().enumerate() {
        if taken[i] {
            continue;
        }
        taken[i] = true;
        let mut group = vec![*t];
        if let Some(j) = map
            .reciprocal_of(t)
            .and_then(|rt| position.get(&rt).copied())
        {
            if !taken[j] {
                taken[j] = true;
                group.push(distinct[j]);
            }
        }
        groups.push(group);
    }
    groups
}

#[derive(Debug, Clone, Default)]
pub struct SplitStores {
    pub train: TripleStore,
    pub valid: TripleStore,
    pub test: TripleStore,
}

impl SplitStores {
    pub fn total(&self) -> usize {
        self.train.len() + self.valid.len() + self.test.len()
    }

    /// `None` for [`Split::Closure`], which a split never produces.
    pub fn get(&self, split: Split) -> Option<&TripleStore> {
        match split {
            Split::Train => Some(&self.train),
            Split::Valid => Some(&self.valid),
            Split::Test => Some(&self.test),
            Split::Closure => None,
        }
    }
}

/// Shuffles groups with `spec.seed` and fills train, then valid, then
/// test by cumulative triple count.
pub fn split(groups: &[Vec<Triple>], spec: &SplitSpec) -> Result<SplitStores, SplitError> {
    spec.validate()?;
    let mut order: Vec<usize> = (0..groups.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    order.shuffle(&mut rng);
    let total: usize = groups.iter().map(Vec::len).sum();
    let train_cut = spec.train * total as f64;
    let valid_cut = (spec.train + spec.valid) * total as f64;
    let mut out = SplitStores::default();
    let mut assigned = 0usize;
    for g in order {
        let group = &groups[g];
        // midpoint of the group decides, so pairs straddling a cut land evenly
        let mid = assigned as f64 + group.len() as f64 / 2.0;
        let (store, split) = if mid <= train_cut {
            (&mut out.train, Split::Train)
        } else if mid <= valid_cut {
            (&mut out.valid, Split::Valid)
        } else {
            (&mut out.test, Split::Test)
        };
        for t in group {
            store.insert(*t, split);
        }
        assigned += group.len();
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RepairReport {
    pub moved_from_valid: usize,
    pub moved_from_test: usize,
    pub passes: usize,
}

/// Moves valid/test triples that mention an entity or relation unseen in
/// train into train, together with their reciprocal, scanning in ascending
/// index order and repeating until nothing moves.
pub fn repair_unseen(stores: &mut SplitStores, map: &ReciprocalMap) -> RepairReport {
    let (ne, nr) = [&stores.train, &stores.valid, &stores.test]
        .iter()
        .map(|s| s.id_bounds())
        .fold((0, 0), |(a, b), (c, d)| (a.max(c), b.max(d)));
    let mut seen_e = vec![false; ne];
    let mut seen_r = vec![false; nr];
    for t in stores.train.triples() {
        seen_e[t.head.index()] = true;
        seen_e[t.tail.index()] = true;
        seen_r[t.rel.index()] = true;
    }
    let mut report = RepairReport::default();
    let mut valid: Vec<Triple> = stores.valid.triples().to_vec();
    let mut test: Vec<Triple> = stores.test.triples().to_vec();
    let mut keep_valid = vec![true; valid.len()];
    let mut keep_test = vec![true; test.len()];
    loop {
        report.passes += 1;
        let mut moved = 0;
        for (triples, keep, counter) in [
            (&valid, &mut keep_valid, &mut report.moved_from_valid),
            (&test, &mut keep_test, &mut report.moved_from_test),
        ] {
            let position: HashMap<Triple, usize> =
                triples.iter().enumerate().map(|(i, t)| (*t, i)).collect();
            for i in 0..triples.len() {
                if !keep[i] {
                    continue;
                }
                let t = triples[i];
                let unseen =
                    !seen_e[t.head.index()] || !seen_e[t.tail.index()] || !seen_r[t.rel.index()];
                if !unseen {
                    continue;
                }
                let partner = map
                    .reciprocal_of(&t)
                    .and_then(|rt| position.get(&rt).copied())
                    .filter(|&j| j != i && keep[j]);
                for k in core::iter::once(i).chain(partner) {
                    let m = triples[k];
                    keep[k] = false;
                    stores.train.insert(m, Split::Train);
                    seen_e[m.head.index()] = true;
                    seen_e[m.tail.index()] = true;
                    seen_r[m.rel.index()] = true;
                    *counter += 1;
                    moved += 1;
                }
            }
        }
        if moved == 0 {
            break;
        }
    }
    valid = valid
        .into_iter()
        .zip(&keep_valid)
        .filter_map(|(t, k)| k.then_some(t))
        .collect();
    test = test
        .into_iter()
        .zip(&keep_test)
        .filter_map(|(t, k)| k.then_some(t))
        .collect();
    stores.valid = TripleStore::from_triples(valid, Split::Valid);
    stores.test = TripleStore::from_triples(test, Split::Test);
    report
}

/// Number of valid/test triples mentioning an entity or relation absent from train.
pub fn count_unseen(stores: &SplitStores) -> (usize, usize) {
    let mut ents = hashbrown::HashSet::new();
    let mut rels = hashbrown::HashSet::new();
    for t in stores.train.triples() {
        ents.insert(t.head);
        ents.insert(t.tail);
        rels.insert(t.rel);
    }
    let mut unseen_e = hashbrown::HashSet::new();
    let mut unseen_r = hashbrown::HashSet::new();
    for t in stores.valid.triples().iter().chain(stores.test.triples()) {
        for e in [t.head, t.tail] {
            if !ents.contains(&e) {
                unseen_e.insert(e);
            }
        }
        if !rels.contains(&t.rel) {
            unseen_r.insert(t.rel);
        }
    }
    (unseen_e.len(), unseen_r.len())
}
