//! Thread-level parallelism for training epochs, ranking and bootstrap.
//!
//! Training workers share one table through
//! [`SharedTable`](kge_core::trainer::SharedTable) without locks; each owns a
//! disjoint, interleaved subset of the epoch's batches and its own generator.
//! Ranking splits test triples into contiguous chunks and concatenates the
//! results in input order, so parallel evaluation equals serial evaluation.

use std::thread;

use kge_core::eval::{self, EvalError, QueryRank};
use kge_core::probe::{bootstrap_power, NamedEmbeddings, PowerResult, PowerTask, ProbeError};
use kge_core::trainer::{
    self, epoch_order, num_batches, run_batches, stream_rng, worker_rng, SharedTable, StepScratch,
    TrainError,
};
use kge_core::{EmbeddingTable, FilterSet, RankingOutcome, Target, TrainConfig, Triple};

/// One epoch with `cfg.workers` threads; a single worker runs the
/// deterministic serial path.
pub fn train_epoch(
    table: &mut EmbeddingTable,
    triples: &[Triple],
    cfg: &TrainConfig,
    epoch: usize,
) -> Result<f64, TrainError> {
    if cfg.workers <= 1 {
        return trainer::train_epoch(table, triples, cfg, epoch);
    }
    if triples.is_empty() {
        return Err(TrainError::EmptyTrain);
    }
    let order = epoch_order(triples.len(), cfg.seed, epoch);
    let batches = num_batches(order.len(), cfg.batch_size);
    let shared = SharedTable::new(table);
    let results: Vec<Result<(f64, usize), TrainError>> = thread::scope(|s| {
        let handles: Vec<_> = (0..cfg.workers)
            .map(|w| {
                let order = &order;
                let mut view = shared;
                s.spawn(move || {
                    let mut rng = worker_rng(cfg.seed, epoch, w);
                    let mut scratch = StepScratch::default();
                    run_batches(
                        &mut view,
                        triples,
                        order,
                        (w..batches).step_by(cfg.workers),
                        cfg,
                        epoch,
                        &mut rng,
                        &mut scratch,
                    )
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("training worker panicked"))
            .collect()
    });
    let mut total = 0.0;
    let mut steps = 0;
    for r in results {
        let (t, n) = r?;
        total += t;
        steps += n;
    }
    Ok(total / steps as f64)
}

pub fn rank_queries(
    triples: &[Triple],
    table: &EmbeddingTable,
    filter: &FilterSet,
    target: Target,
    workers: usize,
) -> Result<Vec<QueryRank>, EvalError> {
    if workers <= 1 || triples.len() < 2 * workers {
        return eval::rank_queries(triples, table, filter, target);
    }
    let chunk = triples.len().div_ceil(workers);
    let parts: Vec<Result<Vec<QueryRank>, EvalError>> = thread::scope(|s| {
        let handles: Vec<_> = triples
            .chunks(chunk)
            .map(|c| s.spawn(move || eval::rank_queries(c, table, filter, target)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("ranking worker panicked"))
            .collect()
    });
    let mut out = Vec::with_capacity(triples.len() * target.slots().len());
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

pub fn link_prediction(
    test: &[Triple],
    table: &EmbeddingTable,
    filter: &FilterSet,
    target: Target,
    workers: usize,
) -> Result<RankingOutcome, EvalError> {
    if test.is_empty() {
        return Err(EvalError::EmptyTest);
    }
    let queries = rank_queries(test, table, filter, target, workers)?;
    Ok(RankingOutcome::from_queries(target, queries))
}

/// Bootstrap power for every task, task `i` drawing from its own generator
/// `(seed, i)` so results do not depend on the worker count.
pub fn bootstrap_all(
    emb: &NamedEmbeddings,
    tasks: &[PowerTask],
    seed: u64,
    workers: usize,
) -> Result<Vec<PowerResult>, ProbeError> {
    let run = |i: usize| bootstrap_power(emb, &tasks[i], &mut stream_rng(seed, i as u64));
    if workers <= 1 {
        return (0..tasks.len()).map(run).collect();
    }
    let indices: Vec<usize> = (0..tasks.len()).collect();
    let chunk = tasks.len().div_ceil(workers).max(1);
    let parts: Vec<Vec<Result<PowerResult, ProbeError>>> = thread::scope(|s| {
        let handles: Vec<_> = indices
            .chunks(chunk)
            .map(|c| {
                let run = &run;
                s.spawn(move || c.iter().map(|&i| run(i)).collect())
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("bootstrap worker panicked"))
            .collect()
    });
    parts.into_iter().flatten().collect()
}
