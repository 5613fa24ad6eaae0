//! Embedding probes: a linear softmax classifier over entity vectors and a
//! cosine-similarity bootstrap test for related entity pairs.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::kg::Vocabulary;
use crate::math;
use crate::models::EmbeddingTable;
use crate::trainer::stream_rng;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProbeError {
    #[error("invalid probe config: {0}")]
    Config(&'static str),
    #[error("no entity is covered by every embedding set and labelled")]
    EmptyIntersection,
    #[error("class `{0}` has no training example")]
    MissingClass(String),
    #[error("zero vector for entity `{0}`")]
    ZeroVector(String),
    #[error("empty {0} pool")]
    EmptyPool(&'static str),
    #[error("bootstrap needs at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("percentile must be in (0, 100], got {0}")]
    Percentile(f64),
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
}

pub const MIN_BOOTSTRAP_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeConfig {
    /// Input dropout during training (inverted: kept features are rescaled).
    pub dropout: f64,
    pub train_fraction: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            dropout: 0.1,
            train_fraction: 0.9,
            epochs: 100,
            learning_rate: 0.1,
            batch_size: 256,
            seed: 0,
        }
    }
}

impl ProbeConfig {
    pub fn validate(&self) -> Result<(), ProbeError> {
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(ProbeError::Config("dropout must be in [0, 1)"));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(ProbeError::Config("train fraction must be in (0, 1)"));
        }
        if self.batch_size == 0 {
            return Err(ProbeError::Config("batch size must be positive"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(ProbeError::Config("learning rate must be positive"));
        }
        Ok(())
    }
}

/// Vectors keyed by entity name, as produced by an export or a table.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedEmbeddings {
    names: Vec<String>,
    dim: usize,
    values: Vec<f64>,
    index: HashMap<String, usize>,
}

impl NamedEmbeddings {
    /// Later duplicates of a name replace earlier rows in lookups.
    pub fn new(names: Vec<String>, dim: usize, values: Vec<f64>) -> Self {
        assert_eq!(names.len() * dim, values.len(), "embedding shape");
        let index = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        NamedEmbeddings {
            names,
            dim,
            values,
            index,
        }
    }

    /// Entity rows of `table`, complex coordinates interleaved as `(re, im)`.
    pub fn from_table(table: &EmbeddingTable, vocab: &Vocabulary) -> Self {
        let names = vocab.entity_names().to_vec();
        let mut values = Vec::with_capacity(names.len() * table.dim());
        for i in 0..names.len() {
            values.extend(table.entity_interleaved(crate::kg::EntityId(i as u32)));
        }
        NamedEmbeddings::new(names, table.dim(), values)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.index_of(name).map(|i| self.row(i))
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }
}

/// Entities shared by every embedding set, with labels and a stratified
/// train/test split that does not depend on the embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeDataset {
    pub names: Vec<String>,
    pub classes: Vec<String>,
    pub labels: Vec<usize>,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl ProbeDataset {
    /// Feature matrix of the dataset entities in `set`, row-major.
    pub fn features(&self, set: &NamedEmbeddings) -> Result<Vec<f64>, ProbeError> {
        let mut out = Vec::with_capacity(self.names.len() * set.dim());
        for n in &self.names {
            let row = set
                .get(n)
                .ok_or_else(|| ProbeError::UnknownEntity(n.clone()))?;
            out.extend_from_slice(row);
        }
        Ok(out)
    }
}

/// Intersects the entity coverage of `sets` (in the order of the first set),
/// keeps the entities `label_of` knows, and splits them per class with
/// `cfg.train_fraction` of each class (at least one) in the train part.
pub fn build_probe_dataset<'a, F>(
    sets: &[&NamedEmbeddings],
    label_of: F,
    cfg: &ProbeConfig,
) -> Result<ProbeDataset, ProbeError>
where
    F: Fn(&str) -> Option<&'a str>,
{
    cfg.validate()?;
    let first = sets.first().ok_or(ProbeError::EmptyIntersection)?;
    let mut names = Vec::new();
    let mut raw_labels = Vec::new();
    let mut seen = hashbrown::HashSet::new();
    for n in first.names() {
        if !seen.insert(n.as_str()) || !sets[1..].iter().all(|s| s.index_of(n).is_some()) {
            continue;
        }
        if let Some(l) = label_of(n) {
            names.push(n.clone());
            raw_labels.push(l);
        }
    }
    if names.is_empty() {
        return Err(ProbeError::EmptyIntersection);
    }
    let mut classes: Vec<String> = raw_labels.iter().map(|l| String::from(*l)).collect();
    classes.sort();
    classes.dedup();
    let labels: Vec<usize> = raw_labels
        .iter()
        .map(|l| classes.binary_search_by(|c| c.as_str().cmp(l)).unwrap())
        .collect();

    let mut rng = stream_rng(cfg.seed, 0);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for c in 0..classes.len() {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        members.shuffle(&mut rng);
        let n = members.len();
        let k = (math::round(cfg.train_fraction * n as f64) as usize).clamp(1, n);
        train.extend_from_slice(&members[..k]);
        test.extend_from_slice(&members[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(ProbeDataset {
        names,
        classes,
        labels,
        train,
        test,
    })
}

/// Trained linear softmax layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProbe {
    pub classes: usize,
    pub dim: usize,
    /// `classes × dim`, row-major.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LinearProbe {
    fn logits(&self, x: &[f64], out: &mut [f64]) {
        for (c, o) in out.iter_mut().enumerate() {
            let w = &self.weights[c * self.dim..(c + 1) * self.dim];
            *o = self.bias[c] + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let mut z = vec![0.0; self.classes];
        self.logits(x, &mut z);
        let mut best = 0;
        for (c, v) in z.iter().enumerate() {
            if *v > z[best] {
                best = c;
            }
        }
        best
    }
}

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in z.iter_mut() {
        *v = math::exp(*v - max);
        total += *v;
    }
    z.iter_mut().for_each(|v| *v /= total);
}

/// Fits a linear softmax classifier on rows `train` of `features` by
/// minibatch SGD on cross-entropy, with inverted input dropout.
pub fn fit_linear(
    features: &[f64],
    dim: usize,
    labels: &[usize],
    classes: usize,
    train: &[usize],
    cfg: &ProbeConfig,
) -> Result<LinearProbe, ProbeError> {
    cfg.validate()?;
    let mut model = LinearProbe {
        classes,
        dim,
        weights: vec![0.0; classes * dim],
        bias: vec![0.0; classes],
    };
    let mut rng = stream_rng(cfg.seed, 1);
    let mut order = train.to_vec();
    let keep = 1.0 - cfg.dropout;
    let mut x = vec![0.0; dim];
    let mut z = vec![0.0; classes];
    let mut gw = vec![0.0; classes * dim];
    let mut gb = vec![0.0; classes];
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            gw.iter_mut().for_each(|g| *g = 0.0);
            gb.iter_mut().for_each(|g| *g = 0.0);
            for &i in batch {
                let row = &features[i * dim..(i + 1) * dim];
                for (xi, v) in x.iter_mut().zip(row) {
                    *xi = if cfg.dropout > 0.0 && rng.gen::<f64>() < cfg.dropout {
                        0.0
                    } else {
                        v / keep
                    };
                }
                model.logits(&x, &mut z);
                softmax_in_place(&mut z);
                z[labels[i]] -= 1.0;
                for c in 0..classes {
                    gb[c] += z[c];
                    let g = &mut gw[c * dim..(c + 1) * dim];
                    for (gj, xj) in g.iter_mut().zip(&x) {
                        *gj += z[c] * xj;
                    }
                }
            }
            let step = cfg.learning_rate / batch.len() as f64;
            for (w, g) in model.weights.iter_mut().zip(&gw) {
                *w -= step * g;
            }
            for (b, g) in model.bias.iter_mut().zip(&gb) {
                *b -= step * g;
            }
        }
    }
    Ok(model)
}

/// Fits on the dataset's train part and returns accuracy on its test part.
pub fn classify(
    data: &ProbeDataset,
    set: &NamedEmbeddings,
    cfg: &ProbeConfig,
) -> Result<f64, ProbeError> {
    let mut present = vec![false; data.classes.len()];
    for &i in &data.train {
        present[data.labels[i]] = true;
    }
    if let Some(c) = present.iter().position(|p| !p) {
        return Err(ProbeError::MissingClass(data.classes[c].clone()));
    }
    let features = data.features(set)?;
    let dim = set.dim();
    let model = fit_linear(
        &features,
        dim,
        &data.labels,
        data.classes.len(),
        &data.train,
        cfg,
    )?;
    if data.test.is_empty() {
        return Ok(f64::NAN);
    }
    let correct = data
        .test
        .iter()
        .filter(|&&i| model.predict(&features[i * dim..(i + 1) * dim]) == data.labels[i])
        .count();
    Ok(correct as f64 / data.test.len() as f64)
}

/// Cosine similarity, `None` when either vector has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    if aa == 0.0 || bb == 0.0 {
        None
    } else {
        Some(ab / (math::sqrt(aa) * math::sqrt(bb)))
    }
}

/// Value at nearest rank `⌈p/100 · n⌉` of an ascending sample.
pub fn nearest_rank(sorted: &[f64], percentile: f64) -> Result<f64, ProbeError> {
    if !(percentile > 0.0 && percentile <= 100.0) {
        return Err(ProbeError::Percentile(percentile));
    }
    if sorted.is_empty() {
        return Err(ProbeError::EmptyPool("bootstrap"));
    }
    let rank = math::ceil(percentile / 100.0 * sorted.len() as f64) as usize;
    Ok(sorted[rank.clamp(1, sorted.len()) - 1])
}

/// Related pairs to test against one category-matched null distribution.
/// Entities are row indices into a [`NamedEmbeddings`].
#[derive(Debug, Clone, PartialEq)]
pub struct PowerTask {
    pub pairs: Vec<(usize, usize)>,
    pub head_pool: Vec<usize>,
    pub tail_pool: Vec<usize>,
    pub samples: usize,
    pub percentile: f64,
}

impl PowerTask {
    pub fn new(pairs: Vec<(usize, usize)>, head_pool: Vec<usize>, tail_pool: Vec<usize>) -> Self {
        PowerTask {
            pairs,
            head_pool,
            tail_pool,
            samples: 10_000,
            percentile: 95.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerResult {
    pub power: f64,
    pub threshold: f64,
    pub pairs: usize,
}

fn cos_rows(emb: &NamedEmbeddings, a: usize, b: usize) -> Result<f64, ProbeError> {
    cosine(emb.row(a), emb.row(b)).ok_or_else(|| {
        let zero = if emb.row(a).iter().all(|v| *v == 0.0) {
            a
        } else {
            b
        };
        ProbeError::ZeroVector(emb.names()[zero].clone())
    })
}

/// Sorted cosine similarities of `samples` pairs drawn uniformly with
/// replacement from the two pools.
pub fn bootstrap_null<R: Rng + ?Sized>(
    emb: &NamedEmbeddings,
    head_pool: &[usize],
    tail_pool: &[usize],
    samples: usize,
    rng: &mut R,
) -> Result<Vec<f64>, ProbeError> {
    if head_pool.is_empty() {
        return Err(ProbeError::EmptyPool("head"));
    }
    if tail_pool.is_empty() {
        return Err(ProbeError::EmptyPool("tail"));
    }
    let mut null = Vec::with_capacity(samples);
    for _ in 0..samples {
        let x = head_pool[rng.gen_range(0..head_pool.len())];
        let y = tail_pool[rng.gen_range(0..tail_pool.len())];
        null.push(cos_rows(emb, x, y)?);
    }
    null.sort_by(f64::total_cmp);
    Ok(null)
}

/// Fraction of observed pairs whose cosine similarity exceeds the
/// `percentile` of the bootstrap null.
pub fn bootstrap_power<R: Rng + ?Sized>(
    emb: &NamedEmbeddings,
    task: &PowerTask,
    rng: &mut R,
) -> Result<PowerResult, ProbeError> {
    if task.samples < MIN_BOOTSTRAP_SAMPLES {
        return Err(ProbeError::TooFewSamples {
            min: MIN_BOOTSTRAP_SAMPLES,
            got: task.samples,
        });
    }
    let null = bootstrap_null(emb, &task.head_pool, &task.tail_pool, task.samples, rng)?;
    let threshold = nearest_rank(&null, task.percentile)?;
    Ok(PowerResult {
        power: power_above(emb, &task.pairs, threshold)?,
        threshold,
        pairs: task.pairs.len(),
    })
}

/// Fraction of `pairs` with cosine similarity strictly above `threshold`;
/// NaN for no pairs.
pub fn power_above(
    emb: &NamedEmbeddings,
    pairs: &[(usize, usize)],
    threshold: f64,
) -> Result<f64, ProbeError> {
    if pairs.is_empty() {
        return Ok(f64::NAN);
    }
    let mut above = 0;
    for &(x, y) in pairs {
        if cos_rows(emb, x, y)? > threshold {
            above += 1;
        }
    }
    Ok(above as f64 / pairs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::string::ToString;
    use rand_chacha::ChaCha8Rng;

    fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
        let u: f64 = rng.gen_range(f64::EPSILON..1.0);
        let v: f64 = rng.gen();
        libm::sqrt(-2.0 * libm::log(u)) * libm::cos(2.0 * math::PI * v)
    }

    fn unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
        let v: Vec<f64> = (0..d).map(|_| gaussian(rng)).collect();
        let n = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
        v.into_iter().map(|x| x / n).collect()
    }

    fn clusters(n: usize, d: usize, seed: u64) -> (NamedEmbeddings, Vec<String>) {
        let mut rng = stream_rng(seed, 9);
        let centers: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..d).map(|_| 5.0 * gaussian(&mut rng)).collect())
            .collect();
        let mut names = Vec::new();
        let mut labels = Vec::new();
        let mut values = Vec::new();
        for i in 0..n {
            let c = i % 4;
            names.push(format!("e{i}"));
            labels.push(format!("class{c}"));
            values.extend(centers[c].iter().map(|m| m + gaussian(&mut rng)));
        }
        (NamedEmbeddings::new(names, d, values), labels)
    }

    fn label_map(set: &NamedEmbeddings, labels: &[String]) -> HashMap<String, String> {
        set.names()
            .iter()
            .cloned()
            .zip(labels.iter().cloned())
            .collect()
    }

    #[test]
    fn separable_clusters() {
        let (set, labels) = clusters(1000, 32, 1);
        let map = label_map(&set, &labels);
        let cfg = ProbeConfig::default();
        let data = build_probe_dataset(&[&set], |n| map.get(n).map(|s| s.as_str()), &cfg).unwrap();
        assert_eq!(data.train.len(), 900);
        let acc = classify(&data, &set, &cfg).unwrap();
        assert!(acc >= 0.99, "{acc}");
    }

    #[test]
    fn shuffled_labels_near_chance() {
        let (set, mut labels) = clusters(1000, 32, 2);
        labels.shuffle(&mut stream_rng(3, 0));
        let map = label_map(&set, &labels);
        let cfg = ProbeConfig::default();
        let data = build_probe_dataset(&[&set], |n| map.get(n).map(|s| s.as_str()), &cfg).unwrap();
        let acc = classify(&data, &set, &cfg).unwrap();
        let sigma = libm::sqrt(0.25 * 0.75 / data.test.len() as f64);
        assert!((acc - 0.25).abs() <= 3.0 * sigma, "{acc}");
    }

    #[test]
    fn split_is_shared_across_models() {
        let (a, labels) = clusters(200, 8, 4);
        let b = a.scaled(-3.0);
        let map = label_map(&a, &labels);
        let cfg = ProbeConfig::default();
        let da = build_probe_dataset(&[&a, &b], |n| map.get(n).map(|s| s.as_str()), &cfg).unwrap();
        let db = build_probe_dataset(&[&b, &a], |n| map.get(n).map(|s| s.as_str()), &cfg).unwrap();
        assert_eq!(da.train, db.train);
        assert_eq!(da.test, db.test);
        assert_eq!(da.names, db.names);
    }

    #[test]
    fn intersection_sizes() {
        let names: Vec<String> = (0..10).map(|i| format!("e{i}")).collect();
        let a = NamedEmbeddings::new(names[..6].to_vec(), 1, vec![1.0; 6]);
        let b = NamedEmbeddings::new(names[3..9].to_vec(), 1, vec![1.0; 6]);
        let cfg = ProbeConfig::default();
        let d = build_probe_dataset(&[&a, &b], |_| Some("x"), &cfg).unwrap();
        assert_eq!(d.names, ["e3", "e4", "e5"]);
        let d = build_probe_dataset(&[&a, &a], |_| Some("x"), &cfg).unwrap();
        assert_eq!(d.names.len(), 6);
        let c = NamedEmbeddings::new(names[8..].to_vec(), 1, vec![1.0; 2]);
        assert_eq!(
            build_probe_dataset(&[&a, &c], |_| Some("x"), &cfg),
            Err(ProbeError::EmptyIntersection)
        );
    }

    #[test]
    fn rare_class_keeps_a_training_example() {
        let names: Vec<String> = (0..21).map(|i| format!("e{i}")).collect();
        let set = NamedEmbeddings::new(names, 1, (0..21).map(|i| i as f64).collect());
        let cfg = ProbeConfig::default();
        let d = build_probe_dataset(
            &[&set],
            |n| Some(if n == "e20" { "rare" } else { "common" }),
            &cfg,
        )
        .unwrap();
        let rare = d.classes.iter().position(|c| c == "rare").unwrap();
        assert!(d.train.iter().any(|&i| d.labels[i] == rare));
        assert_eq!(d.train.len() + d.test.len(), 21);
    }

    #[test]
    fn missing_class_is_an_error() {
        let set = NamedEmbeddings::new(vec!["a".to_string(), "b".to_string()], 1, vec![1.0, 2.0]);
        let data = ProbeDataset {
            names: vec!["a".into(), "b".into()],
            classes: vec!["x".into(), "y".into()],
            labels: vec![0, 1],
            train: vec![0],
            test: vec![1],
        };
        assert_eq!(
            classify(&data, &set, &ProbeConfig::default()),
            Err(ProbeError::MissingClass("y".into()))
        );
    }

    #[test]
    fn nearest_rank_percentiles() {
        let v: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        assert_eq!(nearest_rank(&v, 95.0).unwrap(), 10.0);
        assert_eq!(nearest_rank(&v, 50.0).unwrap(), 5.0);
        assert_eq!(nearest_rank(&v, 10.0).unwrap(), 1.0);
        assert!(nearest_rank(&v, 0.0).is_err());
        let v: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert_eq!(nearest_rank(&v, 95.0).unwrap(), 95.0);
    }

    fn random_set(n: usize, d: usize, seed: u64) -> NamedEmbeddings {
        let mut rng = stream_rng(seed, 5);
        let names = (0..n).map(|i| format!("e{i}")).collect();
        let values = (0..n).flat_map(|_| unit(&mut rng, d)).collect();
        NamedEmbeddings::new(names, d, values)
    }

    #[test]
    fn identical_pairs_have_full_power() {
        let mut set = random_set(400, 128, 6);
        // rows 200..400 duplicate rows 0..200
        let copy = set.values()[..200 * 128].to_vec();
        let mut values = set.values().to_vec();
        values[200 * 128..].copy_from_slice(&copy);
        set = NamedEmbeddings::new(set.names().to_vec(), 128, values);
        let pairs = (0..200).map(|i| (i, i + 200)).collect();
        let task = PowerTask::new(pairs, (0..200).collect(), (200..400).collect());
        let r = bootstrap_power(&set, &task, &mut stream_rng(7, 0)).unwrap();
        assert!(r.power >= 0.95, "{r:?}");
    }

    #[test]
    fn null_pairs_are_calibrated() {
        let set = random_set(600, 16, 8);
        let head: Vec<usize> = (0..300).collect();
        let tail: Vec<usize> = (300..600).collect();
        let mut passed = 0;
        for seed in 0..20 {
            let mut rng = stream_rng(100 + seed, 0);
            let pairs = (0..10_000)
                .map(|_| (head[rng.gen_range(0..300)], tail[rng.gen_range(0..300)]))
                .collect();
            let task = PowerTask::new(pairs, head.clone(), tail.clone());
            let r = bootstrap_power(&set, &task, &mut rng).unwrap();
            if (0.03..=0.07).contains(&r.power) {
                passed += 1;
            }
        }
        assert!(passed >= 18, "{passed}/20");
    }

    #[test]
    fn power_is_scale_invariant() {
        let set = random_set(100, 8, 9);
        let task = PowerTask::new(
            (0..50).map(|i| (i, 99 - i)).collect(),
            (0..50).collect(),
            (50..100).collect(),
        );
        let a = bootstrap_power(&set, &task, &mut stream_rng(1, 0)).unwrap();
        for c in [0.001, 2.0, 1e6] {
            let b = bootstrap_power(&set.scaled(c), &task, &mut stream_rng(1, 0)).unwrap();
            assert_eq!(a.power, b.power);
            assert!((a.threshold - b.threshold).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_vector_is_named() {
        let set = NamedEmbeddings::new(vec!["a".into(), "z".into()], 2, vec![1.0, 0.0, 0.0, 0.0]);
        let task = PowerTask::new(vec![(0, 1)], vec![0], vec![1]);
        assert_eq!(
            bootstrap_power(&set, &task, &mut stream_rng(0, 0)),
            Err(ProbeError::ZeroVector("z".into()))
        );
        let small = PowerTask {
            samples: 999,
            ..task
        };
        assert!(matches!(
            bootstrap_power(&set, &small, &mut stream_rng(0, 0)),
            Err(ProbeError::TooFewSamples { .. })
        ));
    }
}
