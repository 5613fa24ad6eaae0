// Shared fixtures for the integration and acceptance tests.
#![allow(dead_code)]

use kge_core::kg::{build_vocabulary, encode_triples, Split};
use kge_core::splitter::{
    pair_reciprocals, repair_unseen, split, ReciprocalMap, SplitSpec, SplitStores,
};
use kge_core::{RelationId, Triple, Vocabulary};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ISA: &str = "isa";
pub const INVERSE_ISA: &str = "inverse_isa";
pub const ATTRIBUTES: [&str; 3] = ["has_site", "has_agent", "has_method"];
pub const SITE_OF: &str = "site_of";

/// Hierarchical toy ontology: a 200-node tree (root, 4 children, 16
/// grandchildren, then leaves hung at random under the grandchildren) with `isa`/`inverse_isa` edges and three attribute relations
/// whose values are fixed at depth-1 and depth-2 anchors and inherited by
/// every descendant. `site_of` mirrors `has_site`.
pub struct HierarchicalKg {
    pub triples: Vec<(String, String, String)>,
    pub reciprocals: Vec<(String, String)>,
    pub parent: Vec<Option<usize>>,
    pub depth: Vec<usize>,
}

pub fn entity(i: usize) -> String {
    format!("C{i:04}")
}

pub fn hierarchical_kg(seed: u64) -> HierarchicalKg {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 200;
    let mut parent = vec![None];
    let mut depth = vec![0];
    let mut frontier = vec![0usize];
    for branching in [4usize, 4] {
        let mut next = Vec::new();
        for &p in &frontier {
            for _ in 0..branching {
                parent.push(Some(p));
                depth.push(depth[p] + 1);
                next.push(parent.len() - 1);
            }
        }
        frontier = next;
    }
    while parent.len() < n {
        let p = frontier[rng.gen_range(0..frontier.len())];
        parent.push(Some(p));
        depth.push(depth[p] + 1);
    }

    let mut triples = Vec::new();
    for (c, p) in parent.iter().enumerate() {
        if let Some(p) = *p {
            triples.push((entity(c), ISA.to_string(), entity(p)));
            triples.push((entity(p), INVERSE_ISA.to_string(), entity(c)));
        }
    }
    let anchors: Vec<usize> = (0..n).filter(|&i| depth[i] == 1 || depth[i] == 2).collect();
    for rel in ATTRIBUTES {
        let values: Vec<(usize, usize)> =
            anchors.iter().map(|&a| (a, rng.gen_range(0..n))).collect();
        for x in 0..n {
            let mut cur = Some(x);
            while let Some(c) = cur {
                if let Some(&(_, v)) = values.iter().find(|(a, _)| *a == c) {
                    triples.push((entity(x), rel.to_string(), entity(v)));
                    if rel == "has_site" {
                        triples.push((entity(v), SITE_OF.to_string(), entity(x)));
                    }
                }
                cur = parent[c];
            }
        }
    }
    HierarchicalKg {
        triples,
        reciprocals: vec![
            (ISA.into(), INVERSE_ISA.into()),
            ("has_site".into(), SITE_OF.into()),
        ],
        parent,
        depth,
    }
}

pub struct EncodedKg {
    pub vocab: Vocabulary,
    pub stores: SplitStores,
    pub reciprocals: ReciprocalMap,
}

/// Encodes and splits `kg` with the reciprocal-aware splitter.
pub fn split_kg(kg: &HierarchicalKg, ratios: (f64, f64, f64), seed: u64) -> EncodedKg {
    let raw = || {
        kg.triples
            .iter()
            .map(|(h, r, t)| (h.as_str(), r.as_str(), t.as_str()))
    };
    let vocab = build_vocabulary(raw());
    let (store, _) = encode_triples(raw(), &vocab, Split::Train).unwrap();
    let mut map = ReciprocalMap::new();
    for (a, b) in &kg.reciprocals {
        map.insert_pair(vocab.relation(a).unwrap(), vocab.relation(b).unwrap())
            .unwrap();
    }
    let groups = pair_reciprocals(&store, &map);
    let spec = SplitSpec::new(ratios.0, ratios.1, ratios.2, seed).unwrap();
    let mut stores = split(&groups, &spec).unwrap();
    repair_unseen(&mut stores, &map);
    EncodedKg {
        vocab,
        stores,
        reciprocals: map,
    }
}

pub fn relation(vocab: &Vocabulary, name: &str) -> RelationId {
    vocab.relation(name).unwrap()
}

pub fn all_triples(s: &SplitStores) -> Vec<Triple> {
    s.train
        .triples()
        .iter()
        .chain(s.valid.triples())
        .chain(s.test.triples())
        .copied()
        .collect()
}
