//! Skip-gram with negative sampling over author trajectories.
//!
//! Each trajectory is one sentence; context windows never cross authors.
//! Workers update the shared matrices without locks. Every element is an
//! `AtomicU64` holding `f64` bits, so concurrent updates may be lost but never
//! tear. With one worker and a fixed seed the result is bit-identical across
//! runs.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use super::objective::{neg_log_sigmoid, sigmoid};
use super::{dot, EmbedError, EmbeddingSpace};
use crate::corpus::TrajectoryCorpus;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub dim: usize,
    /// Maximum context radius; the radius at each position is drawn from
    /// `1..=window`.
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub initial_learning_rate: f64,
    pub min_learning_rate: f64,
    pub min_count: u64,
    /// Frequent-token downsampling threshold; 0 disables.
    pub subsample_threshold: f64,
    pub seed: u64,
    pub workers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 24,
            window: 5,
            negatives: 5,
            epochs: 5,
            initial_learning_rate: 0.025,
            min_learning_rate: 1e-4,
            min_count: 5,
            subsample_threshold: 1e-3,
            seed: 1,
            workers: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), EmbedError> {
        let bad = |m: &str| Err(EmbedError::InvalidConfig(m.to_string()));
        if self.dim == 0 {
            return bad("dim must be >= 1");
        }
        if self.window == 0 {
            return bad("window must be >= 1");
        }
        if self.negatives == 0 {
            return bad("negatives must be >= 1");
        }
        if self.epochs == 0 {
            return bad("epochs must be >= 1");
        }
        if !(self.initial_learning_rate > 0.0 && self.min_learning_rate > 0.0) {
            return bad("learning rates must be > 0");
        }
        if self.min_learning_rate > self.initial_learning_rate {
            return bad("min_learning_rate exceeds initial_learning_rate");
        }
        if self.subsample_threshold.is_nan() || self.subsample_threshold < 0.0 {
            return bad("subsample_threshold must be >= 0");
        }
        if self.workers == 0 {
            return bad("workers must be >= 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub vocab_size: usize,
    pub training_tokens: u64,
    /// Mean loss per (center, context) example, one entry per epoch.
    pub epoch_loss: Vec<f64>,
}

/// Draws negatives from the unigram distribution raised to the 3/4 power.
#[derive(Debug, Clone)]
pub struct NegativeSampler {
    alias: WeightedAliasIndex<f64>,
    probabilities: Vec<f64>,
}

impl NegativeSampler {
    pub fn new(counts: &[u64]) -> Self {
        let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(0.75)).collect();
        let total: f64 = weights.iter().sum();
        let probabilities = weights.iter().map(|w| w / total).collect();
        NegativeSampler {
            alias: WeightedAliasIndex::new(weights).expect("positive token counts"),
            probabilities,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.alias.sample(rng)
    }

    /// The target distribution, for diagnostics.
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }
}

struct SharedMatrix {
    data: Vec<AtomicU64>,
    dim: usize,
}

impl SharedMatrix {
    fn from_values(values: impl Iterator<Item = f64>, dim: usize) -> Self {
        SharedMatrix {
            data: values.map(|x| AtomicU64::new(x.to_bits())).collect(),
            dim,
        }
    }

    fn load(&self, row: usize, out: &mut [f64]) {
        let slots = &self.data[row * self.dim..(row + 1) * self.dim];
        for (o, a) in out.iter_mut().zip(slots) {
            *o = f64::from_bits(a.load(Ordering::Relaxed));
        }
    }

    fn store(&self, row: usize, values: &[f64]) {
        let slots = &self.data[row * self.dim..(row + 1) * self.dim];
        for (a, v) in slots.iter().zip(values) {
            a.store(v.to_bits(), Ordering::Relaxed);
        }
    }

    fn into_values(self) -> Vec<f64> {
        self.data
            .into_iter()
            .map(|a| f64::from_bits(a.into_inner()))
            .collect()
    }
}

/// One SGD step on a single example. `targets` holds the positive output
/// vector first (label true) followed by the negatives. Returns the loss
/// before the update.
#[cfg(test)]
fn sgd_update(input: &mut [f64], targets: &mut [(&mut [f64], bool)], lr: f64) -> f64 {
    let mut input_delta = vec![0.0; input.len()];
    let mut loss = 0.0;
    for (vec, label) in targets.iter_mut() {
        loss += target_update(input, &mut input_delta, vec, *label, lr);
    }
    for (u, d) in input.iter_mut().zip(&input_delta) {
        *u += d;
    }
    loss
}

/// Updates one output vector in place and accumulates the input gradient
/// step into `input_delta`.
fn target_update(input: &[f64], input_delta: &mut [f64], vec: &mut [f64], label: bool, lr: f64) -> f64 {
    let score = dot(input, vec);
    let loss = if label {
        neg_log_sigmoid(score)
    } else {
        neg_log_sigmoid(-score)
    };
    let g = lr * (if label { 1.0 } else { 0.0 } - sigmoid(score));
    for ((d, v), &u) in input_delta.iter_mut().zip(vec.iter_mut()).zip(input) {
        *d += g * *v;
        *v += g * u;
    }
    loss
}

pub fn train_sgns(corpus: &TrajectoryCorpus, config: &TrainConfig) -> Result<EmbeddingSpace, EmbedError> {
    train_sgns_with_summary(corpus, config).map(|(space, _)| space)
}

pub fn train_sgns_with_summary(
    corpus: &TrajectoryCorpus,
    config: &TrainConfig,
) -> Result<(EmbeddingSpace, TrainSummary), EmbedError> {
    config.validate()?;
    if corpus.trajectories.is_empty() || corpus.token_count() == 0 {
        return Err(EmbedError::EmptyCorpus);
    }

    // Frequency-descending vocabulary, id ascending among equal counts.
    let mut vocab: Vec<(&String, u64)> = corpus
        .vocabulary
        .iter()
        .filter(|(_, &c)| c >= config.min_count)
        .map(|(id, &c)| (id, c))
        .collect();
    if vocab.is_empty() {
        return Err(EmbedError::EmptyVocabulary(config.min_count));
    }
    vocab.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let index: std::collections::HashMap<&str, usize> = vocab
        .iter()
        .enumerate()
        .map(|(i, (id, _))| (id.as_str(), i))
        .collect();
    let counts: Vec<u64> = vocab.iter().map(|&(_, c)| c).collect();

    let sentences: Vec<Vec<usize>> = corpus
        .trajectories
        .iter()
        .map(|t| {
            t.sequence
                .iter()
                .filter_map(|c| index.get(c.as_str()).copied())
                .collect::<Vec<_>>()
        })
        .filter(|s| !s.is_empty())
        .collect();
    let total_tokens: u64 = sentences.iter().map(|s| s.len() as u64).sum();

    let keep_prob: Vec<f64> = counts
        .iter()
        .map(|&c| {
            if config.subsample_threshold <= 0.0 {
                return 1.0;
            }
            let t = config.subsample_threshold * total_tokens as f64;
            let f = c as f64;
            (((f / t).sqrt() + 1.0) * t / f).min(1.0)
        })
        .collect();

    let dim = config.dim;
    let n = vocab.len();
    let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let half = 0.5 / dim as f64;
    let input = SharedMatrix::from_values((0..n * dim).map(|_| init_rng.random_range(-half..half)), dim);
    let output = SharedMatrix::from_values(std::iter::repeat_n(0.0, n * dim), dim);
    let sampler = NegativeSampler::new(&counts);
    let processed = AtomicU64::new(0);
    let planned = (config.epochs as u64 * total_tokens).max(1);

    let mut epoch_loss = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let run_worker = |worker: usize| -> (f64, u64) {
            let mut rng = ChaCha8Rng::seed_from_u64(
                config
                    .seed
                    .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul((epoch * config.workers + worker + 1) as u64)),
            );
            let mut state = WorkerState::new(dim, config.negatives);
            let mut loss = 0.0;
            let mut examples = 0u64;
            for sentence in sentences.iter().skip(worker).step_by(config.workers) {
                let done = processed.fetch_add(sentence.len() as u64, Ordering::Relaxed);
                let progress = done as f64 / planned as f64;
                let lr = (config.initial_learning_rate
                    - (config.initial_learning_rate - config.min_learning_rate) * progress)
                    .max(config.min_learning_rate);
                let kept: Vec<usize> = sentence
                    .iter()
                    .copied()
                    .filter(|&w| keep_prob[w] >= 1.0 || rng.random::<f64>() < keep_prob[w])
                    .collect();
                for (pos, &center) in kept.iter().enumerate() {
                    let radius = rng.random_range(1..=config.window);
                    let lo = pos.saturating_sub(radius);
                    let hi = (pos + radius).min(kept.len() - 1);
                    for (ctx_pos, &context) in kept.iter().enumerate().take(hi + 1).skip(lo) {
                        if ctx_pos == pos {
                            continue;
                        }
                        // As in word2vec: the context word's input vector predicts the center.
                        loss += state.step(&input, &output, &sampler, &mut rng, context, center, lr);
                        examples += 1;
                    }
                }
            }
            (loss, examples)
        };

        let results: Vec<(f64, u64)> = if config.workers == 1 {
            vec![run_worker(0)]
        } else {
            std::thread::scope(|scope| {
                let handles: Vec<_> = (0..config.workers)
                    .map(|w| {
                        let run = &run_worker;
                        scope.spawn(move || run(w))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("training worker panicked"))
                    .collect()
            })
        };
        let (loss, examples) = results
            .iter()
            .fold((0.0, 0u64), |(l, e), &(wl, we)| (l + wl, e + we));
        let done = processed.load(Ordering::Relaxed);
        if !loss.is_finite() {
            return Err(EmbedError::NonFiniteLoss {
                epoch,
                tokens: done,
                learning_rate: config.initial_learning_rate
                    - (config.initial_learning_rate - config.min_learning_rate)
                        * (done as f64 / planned as f64).min(1.0),
            });
        }
        let mean = if examples > 0 { loss / examples as f64 } else { 0.0 };
        log::debug!("epoch {epoch}: mean loss {mean:.5} over {examples} examples");
        epoch_loss.push(mean);
    }

    let ids = vocab.iter().map(|(id, _)| (*id).clone()).collect();
    let space = EmbeddingSpace::from_matrix(ids, dim, input.into_values())?;
    Ok((
        space,
        TrainSummary {
            vocab_size: n,
            training_tokens: total_tokens,
            epoch_loss,
        },
    ))
}

struct WorkerState {
    word: Vec<f64>,
    delta: Vec<f64>,
    row: Vec<f64>,
    negatives: usize,
}

impl WorkerState {
    fn new(dim: usize, negatives: usize) -> Self {
        WorkerState {
            word: vec![0.0; dim],
            delta: vec![0.0; dim],
            row: vec![0.0; dim],
            negatives,
        }
    }

    /// Targets are read, updated and written back one at a time, so a
    /// negative drawn twice receives both updates.
    #[allow(clippy::too_many_arguments)]
    fn step(
        &mut self,
        input: &SharedMatrix,
        output: &SharedMatrix,
        sampler: &NegativeSampler,
        rng: &mut ChaCha8Rng,
        word: usize,
        target: usize,
        lr: f64,
    ) -> f64 {
        input.load(word, &mut self.word);
        self.delta.fill(0.0);
        output.load(target, &mut self.row);
        let mut loss = target_update(&self.word, &mut self.delta, &mut self.row, true, lr);
        output.store(target, &self.row);
        for _ in 0..self.negatives {
            // A negative equal to the positive is dropped, not redrawn.
            let neg = sampler.sample(rng);
            if neg == target {
                continue;
            }
            output.load(neg, &mut self.row);
            loss += target_update(&self.word, &mut self.delta, &mut self.row, false, lr);
            output.store(neg, &self.row);
        }
        for (u, d) in self.word.iter_mut().zip(&self.delta) {
            *u += d;
        }
        input.store(word, &self.word);
        loss
    }
}
