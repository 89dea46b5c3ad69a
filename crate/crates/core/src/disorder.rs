//! Diagonal disorder realizations and ensemble sweeps.
//!
//! Each realization owns its own generator, keyed by `(master_seed, index)`
//! rather than drawn sequentially from a shared stream, so a realization's
//! energies never depend on how work is scheduled. Aggregation always runs in
//! ascending realization order with pairwise summation, which makes ensemble
//! statistics bit-identical for any worker count.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chain::ChainSpec;
use crate::error::{Error, Result};

/// Recorded in run manifests.
pub const RNG_ALGORITHM: &str =
    "ChaCha8Rng::seed_from_u64(master_seed), stream = realization index; \
d_i = (next_u64 >> 11) * 2^-53 in [0,1)";

/// Realizations per ensemble unless configured otherwise.
pub const DEFAULT_REALIZATIONS: usize = 100;

/// One sampled vector of on-site energies `eps_i = E J_max d_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderRealization {
    energies: Vec<f64>,
    strength: f64,
    seed: u64,
    index: usize,
}

impl DisorderRealization {
    /// Wraps an explicit energy vector, e.g. a hand-built test case.
    pub fn from_energies(energies: Vec<f64>, strength: f64, seed: u64, index: usize) -> Self {
        Self {
            energies,
            strength,
            seed,
            index,
        }
    }

    /// Clean chain: all on-site energies zero.
    pub fn clean(n_sites: usize) -> Self {
        Self::from_energies(vec![0.0; n_sites], 0.0, 0, 0)
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn index(&self) -> usize {
        self.index
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    chain: ChainSpec,
    strength: f64,
    n_realizations: usize,
    master_seed: u64,
}

impl EnsembleSpec {
    pub fn new(
        chain: ChainSpec,
        strength: f64,
        n_realizations: usize,
        master_seed: u64,
    ) -> Result<Self> {
        if !(strength.is_finite() && strength >= 0.0) {
            return Err(Error::InvalidStrength(strength));
        }
        if n_realizations == 0 {
            return Err(Error::EmptyEnsemble);
        }
        Ok(Self {
            chain,
            strength,
            n_realizations,
            master_seed,
        })
    }

    pub fn chain(&self) -> &ChainSpec {
        &self.chain
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn n_realizations(&self) -> usize {
        self.n_realizations
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }
}

/// Uniform variate on `[0, 1)` from the top 53 bits of one generator word.
fn unit_uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Realization `index` of the ensemble.
pub fn sample_disorder(spec: &EnsembleSpec, index: usize) -> Result<DisorderRealization> {
    if index >= spec.n_realizations {
        return Err(Error::RealizationIndex {
            index,
            n_realizations: spec.n_realizations,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.master_seed);
    rng.set_stream(index as u64);
    let scale = spec.strength * spec.chain.j_max();
    let energies = (0..spec.chain.n_sites())
        .map(|_| scale * unit_uniform(&mut rng))
        .collect();
    Ok(DisorderRealization {
        energies,
        strength: spec.strength,
        seed: spec.master_seed,
        index,
    })
}

/// How many threads an ensemble may use.
///
/// Without the `parallel` feature every variant runs sequentially.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Workers {
    Sequential,
    /// A dedicated pool with this many threads.
    Threads(usize),
    /// The global rayon pool.
    #[default]
    Global,
}

/// `f(0), f(1), ..., f(n - 1)` in index order, evaluated on `workers`.
pub fn map_indexed<T, F>(n: usize, workers: Workers, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        match workers {
            Workers::Sequential => {}
            Workers::Global => return Ok((0..n).into_par_iter().map(&f).collect()),
            Workers::Threads(k) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(k.max(1))
                    .build()
                    .map_err(|e| Error::WorkerPool(e.to_string()))?;
                return Ok(pool.install(|| (0..n).into_par_iter().map(&f).collect()));
            }
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = workers;
    Ok((0..n).map(f).collect())
}

/// Per-realization results, indexed by realization number.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResults<T> {
    results: Vec<T>,
}

impl<T> EnsembleResults<T> {
    pub fn from_results(results: Vec<T>) -> Self {
        Self { results }
    }

    pub fn results(&self) -> &[T] {
        &self.results
    }

    pub fn into_results(self) -> Vec<T> {
        self.results
    }

    pub fn len(&self) -> usize {
        self.results.len()
    }

    pub fn is_empty(&self) -> bool {
        self.results.is_empty()
    }

    /// Summary of a scalar extracted from every realization.
    pub fn scalar_summary<F: Fn(&T) -> f64>(&self, f: F) -> Summary {
        let values: Vec<f64> = self.results.iter().map(f).collect();
        Summary::of(&values)
    }

    /// Elementwise summary of a vector extracted from every realization.
    pub fn vector_summary<'a, F: Fn(&'a T) -> &'a [f64]>(&'a self, f: F) -> VectorSummary {
        let rows: Vec<&[f64]> = self.results.iter().map(f).collect();
        VectorSummary::of(&rows)
    }
}

impl EnsembleResults<f64> {
    pub fn summary(&self) -> Summary {
        Summary::of(&self.results)
    }
}

impl EnsembleResults<Vec<f64>> {
    pub fn summary(&self) -> VectorSummary {
        self.vector_summary(|v| v.as_slice())
    }
}

/// Evaluate `observable` on every realization of `spec`.
///
/// On failure, reports the lowest failing realization index.
pub fn run_ensemble<T, F>(
    spec: &EnsembleSpec,
    workers: Workers,
    observable: F,
) -> Result<EnsembleResults<T>>
where
    T: Send,
    F: Fn(&ChainSpec, &DisorderRealization) -> Result<T> + Sync + Send,
{
    let outcomes = map_indexed(spec.n_realizations, workers, |index| {
        let disorder = sample_disorder(spec, index)?;
        observable(&spec.chain, &disorder)
    })?;
    let mut results = Vec::with_capacity(outcomes.len());
    for (index, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(value) => results.push(value),
            Err(source) => {
                return Err(Error::Realization {
                    index,
                    source: Box::new(source),
                })
            }
        }
    }
    Ok(EnsembleResults { results })
}

/// Pairwise (cascade) summation in index order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 8;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

impl Summary {
    /// Sample standard deviation over `sqrt(n)`; zero for a single value.
    pub fn of(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return Self {
                mean: f64::NAN,
                stderr: f64::NAN,
                count,
            };
        }
        let mean = pairwise_sum(values) / count as f64;
        let stderr = if count > 1 {
            let squares: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
            (pairwise_sum(&squares) / (count - 1) as f64 / count as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            stderr,
            count,
        }
    }
}

/// Elementwise mean and standard error over equally long vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorSummary {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub count: usize,
}

impl VectorSummary {
    pub fn of(rows: &[&[f64]]) -> Self {
        let count = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let mut mean = Vec::with_capacity(width);
        let mut stderr = Vec::with_capacity(width);
        let mut column = Vec::with_capacity(count);
        for k in 0..width {
            column.clear();
            column.extend(rows.iter().map(|r| r[k]));
            let s = Summary::of(&column);
            mean.push(s.mean);
            stderr.push(s.stderr);
        }
        Self {
            mean,
            stderr,
            count,
        }
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }
}
