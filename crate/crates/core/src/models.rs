//! Score functions and closed-form gradients for the five embedding models.
//!
//! Parameter layouts (`dim` is the number of reals per entity for every model):
//!
//! | model    | entity row              | relation row                     |
//! |----------|-------------------------|----------------------------------|
//! | TransE   | `dim` reals             | `dim` reals                      |
//! | DistMult | `dim` reals             | `dim` reals                      |
//! | ComplEx  | `[re; im]`, `dim/2` each| `[re; im]`, `dim/2` each         |
//! | SimplE   | `[head role; tail role]`| `[forward; inverse]`             |
//! | RotatE   | `[re; im]`, `dim/2` each| `dim/2` phases in `[-pi, pi)`    |
//!
//! Complex rows are stored stacked (all real parts, then all imaginary parts).

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kg::{EntityId, RelationId, Triple};
use crate::math::{self, PI};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("dim must be positive")]
    ZeroDim,
    #[error("{kind} needs an even dim, got {dim}")]
    OddDim { kind: ModelKind, dim: usize },
    #[error("{kind} needs a positive margin, got {margin}")]
    Margin { kind: ModelKind, margin: f64 },
    #[error("embedding table needs at least one entity and one relation")]
    EmptyVocabulary,
    #[error("parameter block has {got} values, expected {expected}")]
    Shape { expected: usize, got: usize },
    #[error(
        "unknown model kind `{0}` (expected one of: transe, distmult, complex, simple, rotate)"
    )]
    UnknownKind(alloc::string::String),
    #[error("unknown norm `{0}` (expected 1 or 2)")]
    UnknownNorm(alloc::string::String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    TransE,
    DistMult,
    ComplEx,
    SimplE,
    RotatE,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::TransE,
        ModelKind::DistMult,
        ModelKind::ComplEx,
        ModelKind::SimplE,
        ModelKind::RotatE,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            ModelKind::TransE => "transe",
            ModelKind::DistMult => "distmult",
            ModelKind::ComplEx => "complex",
            ModelKind::SimplE => "simple",
            ModelKind::RotatE => "rotate",
        }
    }

    pub const fn code(self) -> u8 {
        match self {
            ModelKind::TransE => 0,
            ModelKind::DistMult => 1,
            ModelKind::ComplEx => 2,
            ModelKind::SimplE => 3,
            ModelKind::RotatE => 4,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    /// Translational models carry the margin inside their score.
    pub const fn is_translational(self) -> bool {
        matches!(self, ModelKind::TransE | ModelKind::RotatE)
    }

    /// Entity rows are complex numbers stored as `[re; im]`.
    pub const fn is_complex(self) -> bool {
        matches!(self, ModelKind::ComplEx | ModelKind::RotatE)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == lower)
            .ok_or_else(|| ModelError::UnknownKind(s.into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Norm {
    L1,
    L2,
}

impl Norm {
    pub const fn order(self) -> u8 {
        match self {
            Norm::L1 => 1,
            Norm::L2 => 2,
        }
    }

    pub fn from_order(p: u8) -> Option<Self> {
        match p {
            1 => Some(Norm::L1),
            2 => Some(Norm::L2),
            _ => None,
        }
    }
}

impl FromStr for Norm {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().trim_start_matches(['l', 'L']) {
            "1" => Ok(Norm::L1),
            "2" => Ok(Norm::L2),
            _ => Err(ModelError::UnknownNorm(s.into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    pub kind: ModelKind,
    /// Real parameters per entity.
    pub dim: usize,
    /// Margin γ, only used by TransE and RotatE.
    pub margin: f64,
    /// Distance norm for TransE.
    pub norm: Norm,
}

impl ModelConfig {
    pub fn new(kind: ModelKind, dim: usize) -> Self {
        ModelConfig {
            kind,
            dim,
            margin: 6.0,
            norm: Norm::L1,
        }
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    pub fn with_norm(mut self, norm: Norm) -> Self {
        self.norm = norm;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.dim == 0 {
            return Err(ModelError::ZeroDim);
        }
        if matches!(
            self.kind,
            ModelKind::ComplEx | ModelKind::SimplE | ModelKind::RotatE
        ) && !self.dim.is_multiple_of(2)
        {
            return Err(ModelError::OddDim {
                kind: self.kind,
                dim: self.dim,
            });
        }
        if self.kind.is_translational() && !(self.margin > 0.0) {
            return Err(ModelError::Margin {
                kind: self.kind,
                margin: self.margin,
            });
        }
        Ok(())
    }

    /// Length of one relation row.
    pub fn rel_dim(&self) -> usize {
        match self.kind {
            ModelKind::RotatE => self.dim / 2,
            _ => self.dim,
        }
    }
}

/// TransE: `γ − ‖h + r − t‖_p`.
pub fn score_transe(h: &[f64], r: &[f64], t: &[f64], margin: f64, norm: Norm) -> f64 {
    debug_assert!(h.len() == r.len() && r.len() == t.len());
    let diffs = h.iter().zip(r).zip(t).map(|((h, r), t)| h + r - t);
    match norm {
        Norm::L1 => margin - diffs.map(f64::abs).sum::<f64>(),
        Norm::L2 => margin - math::sqrt(diffs.map(|x| x * x).sum::<f64>()),
    }
}

/// DistMult: `Σ h·r·t`. The product is formed as `(h·t)·r` so swapping
/// head and tail gives the same bits.
pub fn score_distmult(h: &[f64], r: &[f64], t: &[f64]) -> f64 {
    debug_assert!(h.len() == r.len() && r.len() == t.len());
    h.iter().zip(r).zip(t).map(|((h, r), t)| h * t * r).sum()
}

/// ComplEx: `Re(Σ h·r·conj(t))` on stacked `[re; im]` rows.
pub fn score_complex(h: &[f64], r: &[f64], t: &[f64]) -> f64 {
    let k = h.len() / 2;
    let (h_re, h_im) = h.split_at(k);
    let (r_re, r_im) = r.split_at(k);
    let (t_re, t_im) = t.split_at(k);
    let mut s = 0.0;
    for i in 0..k {
        let re = h_re[i] * r_re[i] - h_im[i] * r_im[i];
        let im = h_re[i] * r_im[i] + h_im[i] * r_re[i];
        s += re * t_re[i] + im * t_im[i];
    }
    s
}

/// SimplE: `½(Σ he_h·r·te_t + Σ he_t·r_inv·te_h)`.
pub fn score_simple(
    he_h: &[f64],
    te_h: &[f64],
    he_t: &[f64],
    te_t: &[f64],
    r: &[f64],
    r_inv: &[f64],
) -> f64 {
    let fwd: f64 = he_h
        .iter()
        .zip(r)
        .zip(te_t)
        .map(|((a, b), c)| a * b * c)
        .sum();
    let inv: f64 = he_t
        .iter()
        .zip(r_inv)
        .zip(te_h)
        .map(|((a, b), c)| a * b * c)
        .sum();
    0.5 * (fwd + inv)
}

/// RotatE: `γ − Σ |h·e^{iθ} − t|` on stacked `[re; im]` entity rows.
pub fn score_rotate(h: &[f64], phases: &[f64], t: &[f64], margin: f64) -> f64 {
    let k = phases.len();
    let (h_re, h_im) = h.split_at(k);
    let (t_re, t_im) = t.split_at(k);
    let mut dist = 0.0;
    for i in 0..k {
        let (sin, cos) = math::sin_cos(phases[i]);
        let a = h_re[i] * cos - h_im[i] * sin - t_re[i];
        let b = h_re[i] * sin + h_im[i] * cos - t_im[i];
        dist += math::sqrt(a * a + b * b);
    }
    margin - dist
}

/// Scores one triple given its three parameter rows.
pub fn score_rows(cfg: &ModelConfig, h: &[f64], r: &[f64], t: &[f64]) -> f64 {
    match cfg.kind {
        ModelKind::TransE => score_transe(h, r, t, cfg.margin, cfg.norm),
        ModelKind::DistMult => score_distmult(h, r, t),
        ModelKind::ComplEx => score_complex(h, r, t),
        ModelKind::SimplE => {
            let k = h.len() / 2;
            let (he_h, te_h) = h.split_at(k);
            let (he_t, te_t) = t.split_at(k);
            let (w, w_inv) = r.split_at(k);
            score_simple(he_h, te_h, he_t, te_t, w, w_inv)
        }
        ModelKind::RotatE => score_rotate(h, r, t, cfg.margin),
    }
}

#[inline]
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Adds `scale · ∂score/∂param` into the head, relation and tail gradient
/// buffers. Subgradients at norm kinks are zero.
#[allow(clippy::too_many_arguments)]
pub fn accumulate_grad(
    cfg: &ModelConfig,
    h: &[f64],
    r: &[f64],
    t: &[f64],
    scale: f64,
    gh: &mut [f64],
    gr: &mut [f64],
    gt: &mut [f64],
) {
    match cfg.kind {
        ModelKind::TransE => match cfg.norm {
            Norm::L1 => {
                for i in 0..h.len() {
                    let g = -sign(h[i] + r[i] - t[i]) * scale;
                    gh[i] += g;
                    gr[i] += g;
                    gt[i] -= g;
                }
            }
            Norm::L2 => {
                let n = math::sqrt(
                    h.iter()
                        .zip(r)
                        .zip(t)
                        .map(|((h, r), t)| (h + r - t) * (h + r - t))
                        .sum::<f64>(),
                );
                if n > 0.0 {
                    for i in 0..h.len() {
                        let g = -(h[i] + r[i] - t[i]) / n * scale;
                        gh[i] += g;
                        gr[i] += g;
                        gt[i] -= g;
                    }
                }
            }
        },
        ModelKind::DistMult => {
            for i in 0..h.len() {
                gh[i] += scale * r[i] * t[i];
                gr[i] += scale * h[i] * t[i];
                gt[i] += scale * h[i] * r[i];
            }
        }
        ModelKind::ComplEx => {
            let k = h.len() / 2;
            for i in 0..k {
                let (a, b) = (h[i], h[k + i]);
                let (c, d) = (r[i], r[k + i]);
                let (e, f) = (t[i], t[k + i]);
                gh[i] += scale * (c * e + d * f);
                gh[k + i] += scale * (c * f - d * e);
                gr[i] += scale * (a * e + b * f);
                gr[k + i] += scale * (a * f - b * e);
                gt[i] += scale * (a * c - b * d);
                gt[k + i] += scale * (a * d + b * c);
            }
        }
        ModelKind::SimplE => {
            let k = h.len() / 2;
            let half = 0.5 * scale;
            for i in 0..k {
                let (he_h, te_h) = (h[i], h[k + i]);
                let (he_t, te_t) = (t[i], t[k + i]);
                let (w, w_inv) = (r[i], r[k + i]);
                gh[i] += half * w * te_t;
                gt[k + i] += half * he_h * w;
                gt[i] += half * w_inv * te_h;
                gh[k + i] += half * he_t * w_inv;
                gr[i] += half * he_h * te_t;
                gr[k + i] += half * he_t * te_h;
            }
        }
        ModelKind::RotatE => {
            let k = r.len();
            for i in 0..k {
                let (sin, cos) = math::sin_cos(r[i]);
                let (hr, hi) = (h[i], h[k + i]);
                let a = hr * cos - hi * sin - t[i];
                let b = hr * sin + hi * cos - t[k + i];
                let m = math::sqrt(a * a + b * b);
                if m == 0.0 {
                    continue;
                }
                let (ua, ub) = (a / m * scale, b / m * scale);
                gh[i] -= ua * cos + ub * sin;
                gh[k + i] -= -ua * sin + ub * cos;
                gt[i] += ua;
                gt[k + i] += ub;
                gr[i] -= ua * (-hr * sin - hi * cos) + ub * (hr * cos - hi * sin);
            }
        }
    }
}

/// Gradient of one triple's score with respect to its three parameter rows.
#[derive(Debug, Clone, PartialEq)]
pub struct TripleGrad {
    pub head: Vec<f64>,
    pub rel: Vec<f64>,
    pub tail: Vec<f64>,
}

pub fn grad(cfg: &ModelConfig, h: &[f64], r: &[f64], t: &[f64]) -> TripleGrad {
    let mut g = TripleGrad {
        head: vec![0.0; h.len()],
        rel: vec![0.0; r.len()],
        tail: vec![0.0; t.len()],
    };
    accumulate_grad(cfg, h, r, t, 1.0, &mut g.head, &mut g.rel, &mut g.tail);
    g
}

/// Entity and relation parameters for one model.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    config: ModelConfig,
    num_entities: usize,
    num_relations: usize,
    entities: Vec<f64>,
    relations: Vec<f64>,
}

impl EmbeddingTable {
    /// Uniform initialization in `[-6/√dim, 6/√dim]`; RotatE phases uniform
    /// in `[-π, π)`. Deterministic per seed.
    pub fn init(
        config: ModelConfig,
        num_entities: usize,
        num_relations: usize,
        seed: u64,
    ) -> Result<Self, ModelError> {
        config.validate()?;
        if num_entities == 0 || num_relations == 0 {
            return Err(ModelError::EmptyVocabulary);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound = 6.0 / math::sqrt(config.dim as f64);
        let entities = (0..num_entities * config.dim)
            .map(|_| rng.gen_range(-bound..=bound))
            .collect();
        let rel_len = num_relations * config.rel_dim();
        let relations = if config.kind == ModelKind::RotatE {
            (0..rel_len).map(|_| rng.gen_range(-PI..PI)).collect()
        } else {
            (0..rel_len)
                .map(|_| rng.gen_range(-bound..=bound))
                .collect()
        };
        Ok(EmbeddingTable {
            config,
            num_entities,
            num_relations,
            entities,
            relations,
        })
    }

    /// Wraps existing parameter blocks, checking their lengths.
    pub fn from_parts(
        config: ModelConfig,
        num_entities: usize,
        num_relations: usize,
        entities: Vec<f64>,
        relations: Vec<f64>,
    ) -> Result<Self, ModelError> {
        config.validate()?;
        if entities.len() != num_entities * config.dim {
            return Err(ModelError::Shape {
                expected: num_entities * config.dim,
                got: entities.len(),
            });
        }
        if relations.len() != num_relations * config.rel_dim() {
            return Err(ModelError::Shape {
                expected: num_relations * config.rel_dim(),
                got: relations.len(),
            });
        }
        Ok(EmbeddingTable {
            config,
            num_entities,
            num_relations,
            entities,
            relations,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    pub fn rel_dim(&self) -> usize {
        self.config.rel_dim()
    }

    pub fn num_entities(&self) -> usize {
        self.num_entities
    }

    pub fn num_relations(&self) -> usize {
        self.num_relations
    }

    #[inline]
    pub fn entity(&self, e: EntityId) -> &[f64] {
        let d = self.config.dim;
        &self.entities[e.index() * d..(e.index() + 1) * d]
    }

    #[inline]
    pub fn relation(&self, r: RelationId) -> &[f64] {
        let d = self.config.rel_dim();
        &self.relations[r.index() * d..(r.index() + 1) * d]
    }

    #[inline]
    pub fn entity_mut(&mut self, e: EntityId) -> &mut [f64] {
        let d = self.config.dim;
        &mut self.entities[e.index() * d..(e.index() + 1) * d]
    }

    #[inline]
    pub fn relation_mut(&mut self, r: RelationId) -> &mut [f64] {
        let d = self.config.rel_dim();
        &mut self.relations[r.index() * d..(r.index() + 1) * d]
    }

    pub fn entity_params(&self) -> &[f64] {
        &self.entities
    }

    pub fn relation_params(&self) -> &[f64] {
        &self.relations
    }

    pub(crate) fn params_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.entities, &mut self.relations)
    }

    pub fn is_finite(&self) -> bool {
        self.entities
            .iter()
            .chain(&self.relations)
            .all(|x| x.is_finite())
    }

    #[inline]
    pub fn score(&self, t: &Triple) -> f64 {
        score_rows(
            &self.config,
            self.entity(t.head),
            self.relation(t.rel),
            self.entity(t.tail),
        )
    }

    /// Entity row in interleaved `(re, im)` order for complex models and as
    /// stored otherwise.
    pub fn entity_interleaved(&self, e: EntityId) -> Vec<f64> {
        let row = self.entity(e);
        if self.config.kind.is_complex() {
            let k = row.len() / 2;
            (0..k).flat_map(|i| [row[i], row[k + i]]).collect()
        } else {
            row.to_vec()
        }
    }
}

/// A ranking query with two of the three slots fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Query {
    /// `(h, r, ?)`
    Tail { head: EntityId, rel: RelationId },
    /// `(?, r, t)`
    Head { rel: RelationId, tail: EntityId },
    /// `(h, ?, t)`
    Relation { head: EntityId, tail: EntityId },
}

/// Scores every candidate for the open slot, in id order. Each value is
/// computed by the same single-triple routine as [`EmbeddingTable::score`].
pub fn score_candidates(table: &EmbeddingTable, query: Query) -> Vec<f64> {
    let mut out = Vec::new();
    score_candidates_into(table, query, &mut out);
    out
}

pub fn score_candidates_into(table: &EmbeddingTable, query: Query, out: &mut Vec<f64>) {
    out.clear();
    let cfg = table.config();
    match query {
        Query::Tail { head, rel } => {
            let (h, r) = (table.entity(head), table.relation(rel));
            out.extend(
                (0..table.num_entities())
                    .map(|e| score_rows(cfg, h, r, table.entity(EntityId(e as u32)))),
            );
        }
        Query::Head { rel, tail } => {
            let (r, t) = (table.relation(rel), table.entity(tail));
            out.extend(
                (0..table.num_entities())
                    .map(|e| score_rows(cfg, table.entity(EntityId(e as u32)), r, t)),
            );
        }
        Query::Relation { head, tail } => {
            let (h, t) = (table.entity(head), table.entity(tail));
            out.extend(
                (0..table.num_relations())
                    .map(|r| score_rows(cfg, h, table.relation(RelationId(r as u32)), t)),
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    // Independent scalar oracles, written against the textbook formulas.

    fn oracle_transe(h: &[f64], r: &[f64], t: &[f64], gamma: f64, p: u8) -> f64 {
        let mut acc = 0.0;
        for i in 0..h.len() {
            let d = h[i] + r[i] - t[i];
            acc += if p == 1 { d.abs() } else { d * d };
        }
        if p == 2 {
            acc = acc.sqrt();
        }
        gamma - acc
    }

    #[derive(Clone, Copy)]
    struct C(f64, f64);
    impl C {
        fn mul(self, o: C) -> C {
            C(self.0 * o.0 - self.1 * o.1, self.0 * o.1 + self.1 * o.0)
        }
        fn conj(self) -> C {
            C(self.0, -self.1)
        }
        fn abs(self) -> f64 {
            self.0.hypot(self.1)
        }
    }

    fn complex_of(stacked: &[f64]) -> Vec<C> {
        let k = stacked.len() / 2;
        (0..k).map(|i| C(stacked[i], stacked[k + i])).collect()
    }

    fn oracle_complex(h: &[f64], r: &[f64], t: &[f64]) -> f64 {
        let (h, r, t) = (complex_of(h), complex_of(r), complex_of(t));
        (0..h.len())
            .map(|i| h[i].mul(r[i]).mul(t[i].conj()).0)
            .sum()
    }

    fn oracle_rotate(h: &[f64], theta: &[f64], t: &[f64], gamma: f64) -> f64 {
        let (h, t) = (complex_of(h), complex_of(t));
        let mut d = 0.0;
        for i in 0..theta.len() {
            let rot = C(theta[i].cos(), theta[i].sin());
            let x = h[i].mul(rot);
            d += C(x.0 - t[i].0, x.1 - t[i].1).abs();
        }
        gamma - d
    }

    fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn transe_examples() {
        assert_eq!(
            score_transe(&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0], 2.0, Norm::L1),
            2.0
        );
        assert_eq!(
            score_transe(&[0.3, -0.2], &[0.0, 0.0], &[0.3, -0.2], 4.0, Norm::L2),
            4.0
        );
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let (h, r, t) = (
                rand_vec(&mut rng, 8),
                rand_vec(&mut rng, 8),
                rand_vec(&mut rng, 8),
            );
            for (p, norm) in [(1, Norm::L1), (2, Norm::L2)] {
                let got = score_transe(&h, &r, &t, 6.0, norm);
                assert!((got - oracle_transe(&h, &r, &t, 6.0, p)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn distmult_examples() {
        assert_eq!(score_distmult(&[1.0; 4], &[1.0; 4], &[1.0; 4]), 4.0);
        assert_eq!(score_distmult(&[0.5; 4], &[0.0; 4], &[2.0; 4]), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let (h, r, t) = (
                rand_vec(&mut rng, 8),
                rand_vec(&mut rng, 8),
                rand_vec(&mut rng, 8),
            );
            let mut o = 0.0;
            for i in 0..8 {
                o += h[i] * r[i] * t[i];
            }
            assert!((score_distmult(&h, &r, &t) - o).abs() < 1e-12);
        }
    }

    #[test]
    fn complex_examples() {
        assert_eq!(score_complex(&[1.0, 0.0], &[1.0, 0.0], &[1.0, 0.0]), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let (h, r, t) = (
                rand_vec(&mut rng, 8),
                rand_vec(&mut rng, 8),
                rand_vec(&mut rng, 8),
            );
            assert!((score_complex(&h, &r, &t) - oracle_complex(&h, &r, &t)).abs() < 1e-12);
            // purely real relation: DistMult on stacked (Re‖Im) with r duplicated
            let r_real: Vec<f64> = r[..4].iter().copied().chain([0.0; 4]).collect();
            let r_dup: Vec<f64> = r[..4].iter().chain(&r[..4]).copied().collect();
            assert!(
                (score_complex(&h, &r_real, &t) - score_distmult(&h, &r_dup, &t)).abs() < 1e-12
            );
        }
    }

    #[test]
    fn simple_examples() {
        let ones = [1.0, 1.0];
        assert_eq!(score_simple(&ones, &ones, &ones, &ones, &ones, &ones), 2.0);
        assert_eq!(
            score_simple(&ones, &ones, &ones, &ones, &[0.0; 2], &[0.0; 2]),
            0.0
        );
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..50 {
            let v: Vec<Vec<f64>> = (0..6).map(|_| rand_vec(&mut rng, 4)).collect();
            let mut a = 0.0;
            let mut b = 0.0;
            #[allow(clippy::needless_range_loop)]
            for i in 0..4 {
                a += v[0][i] * v[4][i] * v[3][i];
                b += v[2][i] * v[5][i] * v[1][i];
            }
            let got = score_simple(&v[0], &v[1], &v[2], &v[3], &v[4], &v[5]);
            assert!((got - 0.5 * (a + b)).abs() < 1e-12);
        }
    }

    #[test]
    fn rotate_examples() {
        let got = score_rotate(&[1.0, 0.0], &[PI / 2.0], &[0.0, 1.0], 6.0);
        assert!((got - 6.0).abs() < 1e-15);
        assert_eq!(score_rotate(&[0.4, -0.7], &[0.0], &[0.4, -0.7], 3.0), 3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..50 {
            let (h, t) = (rand_vec(&mut rng, 8), rand_vec(&mut rng, 8));
            let th: Vec<f64> = (0..4).map(|_| rng.gen_range(-PI..PI)).collect();
            assert!(
                (score_rotate(&h, &th, &t, 6.0) - oracle_rotate(&h, &th, &t, 6.0)).abs() < 1e-10
            );
        }
    }

    #[test]
    fn closed_form_gradients() {
        let cfg = ModelConfig::new(ModelKind::DistMult, 3);
        let (h, r, t) = ([0.1, 0.2, 0.3], [1.0, -2.0, 0.5], [3.0, 0.25, -1.0]);
        let g = grad(&cfg, &h, &r, &t);
        for i in 0..3 {
            assert_eq!(g.head[i], r[i] * t[i]);
        }
        let cfg = ModelConfig::new(ModelKind::TransE, 3).with_norm(Norm::L2);
        let g = grad(&cfg, &[1.0, 2.0, 3.0], &[0.5, 0.5, 0.5], &[1.5, 2.5, 3.5]);
        assert!(g
            .head
            .iter()
            .chain(&g.rel)
            .chain(&g.tail)
            .all(|&x| x == 0.0));
    }

    #[test]
    fn init_checks() {
        let cfg = ModelConfig::new(ModelKind::ComplEx, 3);
        assert!(matches!(
            EmbeddingTable::init(cfg, 4, 2, 1),
            Err(ModelError::OddDim { .. })
        ));
        let cfg = ModelConfig::new(ModelKind::RotatE, 8);
        assert_eq!(
            EmbeddingTable::init(cfg, 4, 2, 1).unwrap(),
            EmbeddingTable::init(cfg, 4, 2, 1).unwrap()
        );
        assert_ne!(
            EmbeddingTable::init(cfg, 4, 2, 1).unwrap(),
            EmbeddingTable::init(cfg, 4, 2, 2).unwrap()
        );
        let t = EmbeddingTable::init(cfg, 4, 2, 3).unwrap();
        assert!(t.relation_params().iter().all(|p| (-PI..PI).contains(p)));
        assert_eq!(t.relation(RelationId(1)).len(), 4);
        assert!(matches!(
            EmbeddingTable::init(
                ModelConfig::new(ModelKind::TransE, 4).with_margin(0.0),
                2,
                1,
                0
            ),
            Err(ModelError::Margin { .. })
        ));
        assert!(matches!(
            EmbeddingTable::init(ModelConfig::new(ModelKind::DistMult, 4), 0, 1, 0),
            Err(ModelError::EmptyVocabulary)
        ));
    }

    #[test]
    fn init_statistics() {
        // n = 10^6 draws, uniform on [-b, b]: σ = b/√3
        let cfg = ModelConfig::new(ModelKind::DistMult, 100);
        let t = EmbeddingTable::init(cfg, 10_000, 1, 42).unwrap();
        let p = t.entity_params();
        let n = p.len() as f64;
        let b = 6.0 / 10.0;
        let mean = p.iter().sum::<f64>() / n;
        let sigma = b / 3f64.sqrt();
        assert!(mean.abs() < 3.0 * sigma / n.sqrt(), "mean {mean}");
        assert!(p.iter().all(|x| x.abs() <= b));
    }

    #[test]
    fn candidates_equal_single_scores() {
        for kind in ModelKind::ALL {
            let cfg = ModelConfig::new(kind, 8);
            let table = EmbeddingTable::init(cfg, 5, 3, 9).unwrap();
            let (h, r, t) = (EntityId(1), RelationId(2), EntityId(4));
            let tails = score_candidates(&table, Query::Tail { head: h, rel: r });
            assert_eq!(tails.len(), 5);
            for (e, s) in tails.iter().enumerate() {
                assert_eq!(
                    s.to_bits(),
                    table
                        .score(&Triple {
                            head: h,
                            rel: r,
                            tail: EntityId(e as u32)
                        })
                        .to_bits()
                );
            }
            let heads = score_candidates(&table, Query::Head { rel: r, tail: t });
            for (e, s) in heads.iter().enumerate() {
                assert_eq!(
                    s.to_bits(),
                    table
                        .score(&Triple {
                            head: EntityId(e as u32),
                            rel: r,
                            tail: t
                        })
                        .to_bits()
                );
            }
            let rels = score_candidates(&table, Query::Relation { head: h, tail: t });
            assert_eq!(rels.len(), 3);
            for (q, s) in rels.iter().enumerate() {
                assert_eq!(
                    s.to_bits(),
                    table
                        .score(&Triple {
                            head: h,
                            rel: RelationId(q as u32),
                            tail: t
                        })
                        .to_bits()
                );
            }
        }
        let table =
            EmbeddingTable::init(ModelConfig::new(ModelKind::RotatE, 4), 3, 170, 0).unwrap();
        assert_eq!(
            score_candidates(
                &table,
                Query::Relation {
                    head: EntityId(0),
                    tail: EntityId(1)
                }
            )
            .len(),
            170
        );
    }

    #[test]
    fn kind_parsing_lists_valid_kinds() {
        assert_eq!("RotatE".parse::<ModelKind>().unwrap(), ModelKind::RotatE);
        let err = "tucker".parse::<ModelKind>().unwrap_err();
        let msg = alloc::format!("{err}");
        assert!(msg.contains("transe") && msg.contains("rotate"));
    }

    fn vecs(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-2.0f64..2.0, n)
    }

    proptest! {
        #[test]
        fn transe_translation_invariance(h in vecs(8), r in vecs(8), t in vecs(8), c in vecs(8)) {
            // shifts are dyadic so h + c and t + c are exact
            let c: Vec<f64> = c.iter().map(|x| (x * 8.0).round() / 8.0).collect();
            let h: Vec<f64> = h.iter().map(|x| (x * 1024.0).round() / 1024.0).collect();
            let t: Vec<f64> = t.iter().map(|x| (x * 1024.0).round() / 1024.0).collect();
            let hc: Vec<f64> = h.iter().zip(&c).map(|(a, b)| a + b).collect();
            let tc: Vec<f64> = t.iter().zip(&c).map(|(a, b)| a + b).collect();
            for norm in [Norm::L1, Norm::L2] {
                let a = score_transe(&h, &r, &t, 4.0, norm);
                let b = score_transe(&hc, &r, &tc, 4.0, norm);
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
        }

        #[test]
        fn distmult_symmetric(h in vecs(8), r in vecs(8), t in vecs(8)) {
            let a = score_distmult(&h, &r, &t);
            let b = score_distmult(&t, &r, &h);
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }

        #[test]
        fn complex_reduces_to_distmult(h in vecs(4), r in vecs(4), t in vecs(4)) {
            let pad = |v: &Vec<f64>| v.iter().copied().chain([0.0; 4]).collect::<Vec<f64>>();
            let a = score_complex(&pad(&h), &pad(&r), &pad(&t));
            let b = score_distmult(&h, &r, &t);
            prop_assert!((a - b).abs() <= 1e-12);
        }

        #[test]
        fn simple_role_swap(h in vecs(8), r in vecs(8), t in vecs(8)) {
            let cfg = ModelConfig::new(ModelKind::SimplE, 8);
            let swapped: Vec<f64> = r[4..].iter().chain(&r[..4]).copied().collect();
            let a = score_rows(&cfg, &h, &r, &t);
            let b = score_rows(&cfg, &t, &swapped, &h);
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }

        #[test]
        fn rotate_global_phase(h in vecs(8), t in vecs(8), th in proptest::collection::vec(-3.0f64..3.0, 4), phi in -3.0f64..3.0) {
            let rot = |v: &Vec<f64>| {
                let (s, c) = (phi.sin(), phi.cos());
                let mut out = v.clone();
                for i in 0..4 {
                    out[i] = v[i] * c - v[4 + i] * s;
                    out[4 + i] = v[i] * s + v[4 + i] * c;
                }
                out
            };
            let a = score_rotate(&h, &th, &t, 6.0);
            let b = score_rotate(&rot(&h), &th, &rot(&t), 6.0);
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }
}
