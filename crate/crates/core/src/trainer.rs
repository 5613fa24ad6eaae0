//! Negative-sampling SGD with a self-adversarial log-sigmoid objective.
//!
//! For a positive score `s⁺` and negative scores `s⁻ₖ` the loss is
//!
//! ```text
//! L = −log σ(s⁺) − Σₖ pₖ · log σ(−s⁻ₖ),   pₖ = softmax(α · s⁻)ₖ
//! ```
//!
//! and its exact derivative (including the dependence of `pₖ` on `s⁻`) is
//! chained through the closed-form score gradients of [`crate::models`].
//! Updates are plain SGD applied per positive triple to the rows it touches.
//!
//! Parameter reads and writes go through [`ParamAccess`], implemented both by
//! [`EmbeddingTable`] (exclusive, deterministic) and by [`SharedTable`], an
//! atomic view that lets several workers update one table without locks.

use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eval::{self, EvalError, FilterSet, Target};
use crate::kg::{EntityId, RelationId, Triple};
use crate::math;
use crate::models::{accumulate_grad, score_rows, EmbeddingTable, ModelConfig, ModelKind};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrainError {
    #[error("non-finite loss {loss} at epoch {epoch}, batch {batch}, triple {triple}")]
    NonFinite {
        epoch: usize,
        batch: usize,
        triple: Triple,
        loss: f64,
    },
    #[error("negative sampling needs at least 2 entities")]
    TooFewEntities,
    #[error("no training triples")]
    EmptyTrain,
    #[error("invalid training config: {0}")]
    Config(&'static str),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub num_negative: usize,
    pub num_epoch: usize,
    pub batch_size: usize,
    /// Self-adversarial temperature α; 0 gives uniform negative weights.
    pub adversarial_temperature: f64,
    /// L2 coefficient applied to the rows touched by each step.
    pub regularization: f64,
    pub eval_every: usize,
    /// Validation triples scored at each checkpoint; `None` uses all.
    pub valid_sample: Option<usize>,
    pub seed: u64,
    pub workers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-4,
            num_negative: 60,
            num_epoch: 2000,
            batch_size: 1024,
            adversarial_temperature: 1.0,
            regularization: 0.0,
            eval_every: 50,
            valid_sample: Some(5000),
            seed: 0,
            workers: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(TrainError::Config(
                "learning_rate must be a non-negative number",
            ));
        }
        if self.num_negative == 0 {
            return Err(TrainError::Config("num_negative must be positive"));
        }
        if self.batch_size == 0 {
            return Err(TrainError::Config("batch_size must be positive"));
        }
        if !(self.adversarial_temperature >= 0.0) {
            return Err(TrainError::Config("adversarial_temperature must be >= 0"));
        }
        if !(self.regularization >= 0.0) {
            return Err(TrainError::Config("regularization must be >= 0"));
        }
        if self.eval_every == 0 {
            return Err(TrainError::Config("eval_every must be positive"));
        }
        if self.workers == 0 {
            return Err(TrainError::Config("workers must be positive"));
        }
        Ok(())
    }
}

/// Best table seen so far during training.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub table: EmbeddingTable,
    pub epoch: usize,
    pub valid_mrr: f64,
    pub train: TrainConfig,
}

/// Which slot of a positive triple a negative replaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Corruption {
    Head(EntityId),
    Tail(EntityId),
}

impl Corruption {
    pub fn apply(self, t: &Triple) -> Triple {
        match self {
            Corruption::Head(e) => Triple { head: e, ..*t },
            Corruption::Tail(e) => Triple { tail: e, ..*t },
        }
    }

    pub fn entity(self) -> EntityId {
        match self {
            Corruption::Head(e) | Corruption::Tail(e) => e,
        }
    }
}

/// Draws `n` corruptions of `t`: head or tail by a fair coin, replaced by a
/// uniform entity. A draw reproducing `t` itself is rejected and redrawn;
/// other true triples are not filtered.
pub fn sample_negatives<R: Rng + ?Sized>(
    t: &Triple,
    n: usize,
    num_entities: usize,
    rng: &mut R,
    out: &mut Vec<Corruption>,
) -> Result<(), TrainError> {
    if num_entities < 2 {
        return Err(TrainError::TooFewEntities);
    }
    out.clear();
    while out.len() < n {
        let e = EntityId(rng.gen_range(0..num_entities as u32));
        let c = if rng.gen_bool(0.5) {
            if e == t.head {
                continue;
            }
            Corruption::Head(e)
        } else {
            if e == t.tail {
                continue;
            }
            Corruption::Tail(e)
        };
        out.push(c);
    }
    Ok(())
}

/// Softmax of `α · scores` into `weights`.
pub fn adversarial_weights(scores: &[f64], alpha: f64, weights: &mut [f64]) {
    let max = scores
        .iter()
        .map(|s| alpha * s)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (w, s) in weights.iter_mut().zip(scores) {
        *w = if alpha == 0.0 {
            1.0
        } else {
            math::exp(alpha * s - max)
        };
        total += *w;
    }
    for w in weights.iter_mut() {
        *w /= total;
    }
}

/// Self-adversarial loss. Writes `∂L/∂s⁻ₖ` into `grad_neg` (which also needs
/// room for the weights, so it must have `neg.len()` entries) and returns
/// `(L, ∂L/∂s⁺)`.
pub fn loss(pos: f64, neg: &[f64], alpha: f64, grad_neg: &mut [f64]) -> (f64, f64) {
    debug_assert_eq!(neg.len(), grad_neg.len());
    adversarial_weights(neg, alpha, grad_neg);
    let mut weighted = 0.0;
    for (p, s) in grad_neg.iter().zip(neg) {
        weighted += p * math::softplus(*s);
    }
    let value = math::softplus(-pos) + weighted;
    for (g, s) in grad_neg.iter_mut().zip(neg) {
        let p = *g;
        *g = p * math::sigmoid(*s) + alpha * p * (math::softplus(*s) - weighted);
    }
    (value, -math::sigmoid(-pos))
}

/// Row-level access to embedding parameters used by the SGD step.
pub trait ParamAccess {
    fn config(&self) -> &ModelConfig;
    fn num_entities(&self) -> usize;
    fn read_entity(&self, e: EntityId, out: &mut [f64]);
    fn read_relation(&self, r: RelationId, out: &mut [f64]);
    /// `row -= lr · grad`
    fn descend_entity(&mut self, e: EntityId, grad: &[f64], lr: f64);
    /// `row -= lr · grad`; RotatE phases are wrapped back into `[-π, π)`.
    fn descend_relation(&mut self, r: RelationId, grad: &[f64], lr: f64);
}

impl ParamAccess for EmbeddingTable {
    fn config(&self) -> &ModelConfig {
        EmbeddingTable::config(self)
    }

    fn num_entities(&self) -> usize {
        EmbeddingTable::num_entities(self)
    }

    fn read_entity(&self, e: EntityId, out: &mut [f64]) {
        out.copy_from_slice(self.entity(e));
    }

    fn read_relation(&self, r: RelationId, out: &mut [f64]) {
        out.copy_from_slice(self.relation(r));
    }

    fn descend_entity(&mut self, e: EntityId, grad: &[f64], lr: f64) {
        for (p, g) in self.entity_mut(e).iter_mut().zip(grad) {
            *p -= lr * g;
        }
    }

    fn descend_relation(&mut self, r: RelationId, grad: &[f64], lr: f64) {
        let phases = self.config().kind == ModelKind::RotatE;
        for (p, g) in self.relation_mut(r).iter_mut().zip(grad) {
            *p -= lr * g;
            if phases {
                *p = math::wrap_phase(*p);
            }
        }
    }
}

const _: () = assert!(core::mem::align_of::<AtomicU64>() == core::mem::align_of::<f64>());
const _: () = assert!(core::mem::size_of::<AtomicU64>() == core::mem::size_of::<f64>());

fn as_atomic(values: &mut [f64]) -> &[AtomicU64] {
    // SAFETY: AtomicU64 has the size and alignment of f64 (checked above) and
    // the exclusive borrow guarantees no non-atomic access while the view lives.
    unsafe { core::slice::from_raw_parts(values.as_mut_ptr() as *const AtomicU64, values.len()) }
}

/// Lock-free shared view of an [`EmbeddingTable`] for asynchronous workers.
///
/// Each parameter is an `f64` read and written with relaxed atomics; the
/// read-modify-write of a step is not atomic as a whole, so concurrent steps
/// touching the same row may overwrite one another's updates.
#[derive(Clone, Copy)]
pub struct SharedTable<'a> {
    config: ModelConfig,
    num_entities: usize,
    entities: &'a [AtomicU64],
    relations: &'a [AtomicU64],
}

impl<'a> SharedTable<'a> {
    pub fn new(table: &'a mut EmbeddingTable) -> Self {
        let config = *table.config();
        let num_entities = table.num_entities();
        let (e, r) = table.params_mut();
        SharedTable {
            config,
            num_entities,
            entities: as_atomic(e),
            relations: as_atomic(r),
        }
    }

    fn row(&self, block: &'a [AtomicU64], index: usize, width: usize) -> &'a [AtomicU64] {
        &block[index * width..(index + 1) * width]
    }
}

impl ParamAccess for SharedTable<'_> {
    fn config(&self) -> &ModelConfig {
        &self.config
    }

    fn num_entities(&self) -> usize {
        self.num_entities
    }

    fn read_entity(&self, e: EntityId, out: &mut [f64]) {
        let row = self.row(self.entities, e.index(), self.config.dim);
        for (o, a) in out.iter_mut().zip(row) {
            *o = f64::from_bits(a.load(Ordering::Relaxed));
        }
    }

    fn read_relation(&self, r: RelationId, out: &mut [f64]) {
        let row = self.row(self.relations, r.index(), self.config.rel_dim());
        for (o, a) in out.iter_mut().zip(row) {
            *o = f64::from_bits(a.load(Ordering::Relaxed));
        }
    }

    fn descend_entity(&mut self, e: EntityId, grad: &[f64], lr: f64) {
        let row = self.row(self.entities, e.index(), self.config.dim);
        for (a, g) in row.iter().zip(grad) {
            let p = f64::from_bits(a.load(Ordering::Relaxed));
            a.store((p - lr * g).to_bits(), Ordering::Relaxed);
        }
    }

    fn descend_relation(&mut self, r: RelationId, grad: &[f64], lr: f64) {
        let phases = self.config.kind == ModelKind::RotatE;
        let row = self.row(self.relations, r.index(), self.config.rel_dim());
        for (a, g) in row.iter().zip(grad) {
            let mut p = f64::from_bits(a.load(Ordering::Relaxed)) - lr * g;
            if phases {
                p = math::wrap_phase(p);
            }
            a.store(p.to_bits(), Ordering::Relaxed);
        }
    }
}

/// Reusable buffers for [`sgd_step`].
#[derive(Debug, Default)]
pub struct StepScratch {
    negatives: Vec<Corruption>,
    head: Vec<f64>,
    tail: Vec<f64>,
    rel: Vec<f64>,
    neg_rows: Vec<f64>,
    neg_scores: Vec<f64>,
    neg_grads: Vec<f64>,
    g_head: Vec<f64>,
    g_tail: Vec<f64>,
    g_rel: Vec<f64>,
    g_negs: Vec<f64>,
    slots: Vec<(EntityId, usize)>,
}

impl StepScratch {
    fn prepare(&mut self, dim: usize, rel_dim: usize, k: usize) {
        for v in [
            &mut self.head,
            &mut self.tail,
            &mut self.g_head,
            &mut self.g_tail,
        ] {
            v.clear();
            v.resize(dim, 0.0);
        }
        for v in [&mut self.rel, &mut self.g_rel] {
            v.clear();
            v.resize(rel_dim, 0.0);
        }
        for v in [&mut self.neg_rows, &mut self.g_negs] {
            v.clear();
            v.resize(k * dim, 0.0);
        }
        for v in [&mut self.neg_scores, &mut self.neg_grads] {
            v.clear();
            v.resize(k, 0.0);
        }
    }
}

/// One SGD step on positive `t`. Returns the loss before the update.
pub fn sgd_step<P: ParamAccess, R: Rng + ?Sized>(
    params: &mut P,
    t: &Triple,
    cfg: &TrainConfig,
    rng: &mut R,
    s: &mut StepScratch,
) -> Result<f64, TrainError> {
    let model = *params.config();
    let (dim, rel_dim, k) = (model.dim, model.rel_dim(), cfg.num_negative);
    sample_negatives(t, k, params.num_entities(), rng, &mut s.negatives)?;
    s.prepare(dim, rel_dim, k);

    params.read_entity(t.head, &mut s.head);
    params.read_entity(t.tail, &mut s.tail);
    params.read_relation(t.rel, &mut s.rel);
    for (i, c) in s.negatives.iter().enumerate() {
        params.read_entity(c.entity(), &mut s.neg_rows[i * dim..(i + 1) * dim]);
    }

    let pos = score_rows(&model, &s.head, &s.rel, &s.tail);
    for (i, c) in s.negatives.iter().enumerate() {
        let row = &s.neg_rows[i * dim..(i + 1) * dim];
        s.neg_scores[i] = match c {
            Corruption::Head(_) => score_rows(&model, row, &s.rel, &s.tail),
            Corruption::Tail(_) => score_rows(&model, &s.head, &s.rel, row),
        };
    }
    let (value, d_pos) = loss(
        pos,
        &s.neg_scores,
        cfg.adversarial_temperature,
        &mut s.neg_grads,
    );
    if !value.is_finite() {
        return Ok(value);
    }

    accumulate_grad(
        &model,
        &s.head,
        &s.rel,
        &s.tail,
        d_pos,
        &mut s.g_head,
        &mut s.g_rel,
        &mut s.g_tail,
    );
    for (i, c) in s.negatives.iter().enumerate() {
        let row = &s.neg_rows[i * dim..(i + 1) * dim];
        let g_row = &mut s.g_negs[i * dim..(i + 1) * dim];
        let d = s.neg_grads[i];
        match c {
            Corruption::Head(_) => accumulate_grad(
                &model,
                row,
                &s.rel,
                &s.tail,
                d,
                g_row,
                &mut s.g_rel,
                &mut s.g_tail,
            ),
            Corruption::Tail(_) => accumulate_grad(
                &model,
                &s.head,
                &s.rel,
                row,
                d,
                &mut s.g_head,
                &mut s.g_rel,
                g_row,
            ),
        }
    }

    // Slot 0 is the head, 1 the tail, 2 + i negative i. Gradients of repeated
    // entities are merged into their first slot before updating.
    s.slots.clear();
    for slot in 0..2 + k {
        let e = match slot {
            0 => t.head,
            1 => t.tail,
            n => s.negatives[n - 2].entity(),
        };
        if let Some(&(_, first)) = s.slots.iter().find(|(x, _)| *x == e) {
            let (dst, src) = slot_pair(s, first, slot, dim);
            for (a, b) in dst.iter_mut().zip(src) {
                *a += b;
            }
        } else {
            s.slots.push((e, slot));
        }
    }

    let lam = cfg.regularization;
    let lr = cfg.learning_rate;
    for idx in 0..s.slots.len() {
        let (e, slot) = s.slots[idx];
        let (grad, row) = match slot {
            0 => (&mut s.g_head, &s.head[..]),
            1 => (&mut s.g_tail, &s.tail[..]),
            n => {
                let i = n - 2;
                (&mut s.g_negs, &s.neg_rows[i * dim..(i + 1) * dim])
            }
        };
        let grad: &mut [f64] = if slot < 2 {
            &mut grad[..]
        } else {
            &mut grad[(slot - 2) * dim..(slot - 1) * dim]
        };
        if lam > 0.0 {
            for (g, p) in grad.iter_mut().zip(row) {
                *g += lam * p;
            }
        }
        params.descend_entity(e, grad, lr);
    }
    if lam > 0.0 {
        for (g, p) in s.g_rel.iter_mut().zip(&s.rel) {
            *g += lam * p;
        }
    }
    params.descend_relation(t.rel, &s.g_rel, lr);
    Ok(value)
}

// (destination, source) gradient rows for merging slot `src` into `dst < src`.
fn slot_pair(s: &mut StepScratch, dst: usize, src: usize, dim: usize) -> (&mut [f64], &[f64]) {
    debug_assert!(dst < src && src >= 1);
    match (dst, src) {
        (0, 1) => (&mut s.g_head[..], &s.g_tail[..]),
        (0, n) => (&mut s.g_head[..], &s.g_negs[(n - 2) * dim..(n - 1) * dim]),
        (1, n) => (&mut s.g_tail[..], &s.g_negs[(n - 2) * dim..(n - 1) * dim]),
        (d, n) => {
            let (lo, hi) = s.g_negs.split_at_mut((n - 2) * dim);
            (&mut lo[(d - 2) * dim..(d - 1) * dim], &hi[..dim])
        }
    }
}

/// Generator for `(seed, stream)`; streams keep epochs and workers independent.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Visiting order of the training triples in `epoch`.
pub fn epoch_order(len: usize, seed: u64, epoch: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..len).collect();
    order.shuffle(&mut stream_rng(seed, (epoch as u64) << 16));
    order
}

/// Generator used by worker `worker` during `epoch`.
pub fn worker_rng(seed: u64, epoch: usize, worker: usize) -> ChaCha8Rng {
    stream_rng(seed, ((epoch as u64) << 16) + 1 + worker as u64)
}

/// Runs the batches `batches` (indices into the chunks of `order` of size
/// `batch_size`). Returns the summed loss and the number of steps.
#[allow(clippy::too_many_arguments)]
pub fn run_batches<P: ParamAccess, R: Rng + ?Sized>(
    params: &mut P,
    triples: &[Triple],
    order: &[usize],
    batches: impl Iterator<Item = usize>,
    cfg: &TrainConfig,
    epoch: usize,
    rng: &mut R,
    scratch: &mut StepScratch,
) -> Result<(f64, usize), TrainError> {
    let mut total = 0.0;
    let mut steps = 0;
    for b in batches {
        let lo = b * cfg.batch_size;
        let hi = (lo + cfg.batch_size).min(order.len());
        for &i in &order[lo..hi] {
            let t = &triples[i];
            let value = sgd_step(params, t, cfg, rng, scratch)?;
            if !value.is_finite() {
                return Err(TrainError::NonFinite {
                    epoch,
                    batch: b,
                    triple: *t,
                    loss: value,
                });
            }
            total += value;
            steps += 1;
        }
    }
    Ok((total, steps))
}

pub fn num_batches(len: usize, batch_size: usize) -> usize {
    len.div_ceil(batch_size)
}

/// One single-worker pass over `triples`; returns the mean loss.
pub fn train_epoch(
    table: &mut EmbeddingTable,
    triples: &[Triple],
    cfg: &TrainConfig,
    epoch: usize,
) -> Result<f64, TrainError> {
    if triples.is_empty() {
        return Err(TrainError::EmptyTrain);
    }
    let order = epoch_order(triples.len(), cfg.seed, epoch);
    let mut rng = worker_rng(cfg.seed, epoch, 0);
    let mut scratch = StepScratch::default();
    let (total, steps) = run_batches(
        table,
        triples,
        &order,
        0..num_batches(order.len(), cfg.batch_size),
        cfg,
        epoch,
        &mut rng,
        &mut scratch,
    )?;
    Ok(total / steps as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub mean_loss: Option<f64>,
    pub valid_mrr: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub best: Checkpoint,
    pub last: EmbeddingTable,
    pub last_epoch: usize,
    pub log: Vec<EpochLog>,
}

/// Fixed validation subsample used for checkpoint selection.
pub fn validation_subset(valid: &[Triple], cfg: &TrainConfig) -> Vec<Triple> {
    let mut v = valid.to_vec();
    match cfg.valid_sample {
        Some(n) if n < v.len() => {
            v.shuffle(&mut stream_rng(cfg.seed, u64::MAX));
            v.truncate(n);
            v
        }
        _ => v,
    }
}

/// Filtered validation MRR (head and tail targets).
pub fn validation_mrr(
    table: &EmbeddingTable,
    valid: &[Triple],
    filter: &FilterSet,
) -> Result<f64, TrainError> {
    Ok(eval::link_prediction(valid, table, filter, Target::Both)?
        .metrics
        .mrr)
}

/// Single-worker training; see [`train_with`].
pub fn train(
    table: EmbeddingTable,
    start_epoch: usize,
    train: &[Triple],
    valid: &[Triple],
    filter: &FilterSet,
    cfg: &TrainConfig,
) -> Result<TrainOutcome, TrainError> {
    train_with(
        table,
        start_epoch,
        train,
        valid,
        cfg,
        train_epoch,
        |table, subset| validation_mrr(table, subset, filter),
    )
}

/// Runs epochs `start_epoch + 1 ..= start_epoch + num_epoch` with
/// `run_epoch`, scoring the validation subsample with `evaluate` before the
/// first epoch, every `eval_every` epochs and after the last one. The best
/// table by validation MRR is kept; ties keep the earlier one.
pub fn train_with<E, V>(
    mut table: EmbeddingTable,
    start_epoch: usize,
    train: &[Triple],
    valid: &[Triple],
    cfg: &TrainConfig,
    mut run_epoch: E,
    mut evaluate: V,
) -> Result<TrainOutcome, TrainError>
where
    E: FnMut(&mut EmbeddingTable, &[Triple], &TrainConfig, usize) -> Result<f64, TrainError>,
    V: FnMut(&EmbeddingTable, &[Triple]) -> Result<f64, TrainError>,
{
    cfg.validate()?;
    if train.is_empty() {
        return Err(TrainError::EmptyTrain);
    }
    if table.num_entities() < 2 {
        return Err(TrainError::TooFewEntities);
    }
    let subset = validation_subset(valid, cfg);
    let mut log = Vec::new();
    let mut score = |table: &EmbeddingTable| -> Result<Option<f64>, TrainError> {
        if subset.is_empty() {
            Ok(None)
        } else {
            evaluate(table, &subset).map(Some)
        }
    };
    let initial = score(&table)?;
    log.push(EpochLog {
        epoch: start_epoch,
        mean_loss: None,
        valid_mrr: initial,
    });
    let mut best = Checkpoint {
        table: table.clone(),
        epoch: start_epoch,
        valid_mrr: initial.unwrap_or(f64::NAN),
        train: *cfg,
    };
    let last_epoch = start_epoch + cfg.num_epoch;
    for epoch in start_epoch + 1..=last_epoch {
        let mean_loss = run_epoch(&mut table, train, cfg, epoch)?;
        let due = (epoch - start_epoch).is_multiple_of(cfg.eval_every) || epoch == last_epoch;
        let mrr = if due { score(&table)? } else { None };
        match mrr {
            Some(m) if !(m <= best.valid_mrr) => {
                best = Checkpoint {
                    table: table.clone(),
                    epoch,
                    valid_mrr: m,
                    train: *cfg,
                };
            }
            // no validation data: keep the latest table
            None if subset.is_empty() && due => {
                best = Checkpoint {
                    table: table.clone(),
                    epoch,
                    valid_mrr: f64::NAN,
                    train: *cfg,
                };
            }
            _ => {}
        }
        log.push(EpochLog {
            epoch,
            mean_loss: Some(mean_loss),
            valid_mrr: mrr,
        });
    }
    Ok(TrainOutcome {
        best,
        last: table,
        last_epoch,
        log,
    })
}
