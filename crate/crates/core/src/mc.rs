//! Replayable Monte Carlo plumbing: addressable random substreams, streaming
//! mean/variance estimators, and a batched parallel trial runner whose output
//! does not depend on thread scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Trials per substream in [`run_trials`].
pub const BATCH_SIZE: u64 = 4096;

/// A seeded ChaCha stream. Substreams with different indices use disjoint
/// keystreams of the same key, so any `(seed, index)` is reachable directly.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }
}

pub fn substream(seed: u64, index: u64) -> RngStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    RngStream {
        seed,
        stream_index: index,
        rng,
    }
}

/// Derives an unrelated seed for a named sub-experiment (splitmix64 finalizer).
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Accumulators that can be combined after independent workers finish.
pub trait Merge: Default + Send {
    fn merge(&mut self, other: Self);
}

/// Welford single-pass mean and variance.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunningStats {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> Option<f64> {
        (self.n > 0).then_some(self.mean)
    }

    /// Unbiased sample variance; zero for fewer than two samples.
    pub fn sample_variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn summary(&self) -> Option<EstimatorSummary> {
        let mean = self.mean()?;
        let std_error = (self.sample_variance() / self.n as f64).sqrt();
        Some(EstimatorSummary {
            n: self.n,
            mean,
            std_error,
            ci95: [mean - 1.96 * std_error, mean + 1.96 * std_error],
        })
    }
}

impl Merge for RunningStats {
    // Chan et al. pairwise update
    fn merge(&mut self, other: Self) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let (na, nb) = (self.n as f64, other.n as f64);
        self.mean += delta * nb / n as f64;
        self.m2 += other.m2 + delta * delta * na * nb / n as f64;
        self.n = n;
    }
}

impl Extend<f64> for RunningStats {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.push(x);
        }
    }
}

impl FromIterator<f64> for RunningStats {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        s.extend(iter);
        s
    }
}

macro_rules! merge_arrays {
    ($($n:literal)*) => {$(
        impl Merge for [RunningStats; $n] {
            fn merge(&mut self, other: Self) {
                for (a, b) in self.iter_mut().zip(other) {
                    a.merge(b);
                }
            }
        }
    )*};
}

merge_arrays!(2 3 4 5 6 7 8);

impl Merge for Vec<RunningStats> {
    fn merge(&mut self, other: Self) {
        if self.len() < other.len() {
            self.resize(other.len(), RunningStats::default());
        }
        for (a, b) in self.iter_mut().zip(other) {
            a.merge(b);
        }
    }
}

/// Serializable snapshot of an estimator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub n: u64,
    pub mean: f64,
    pub std_error: f64,
    pub ci95: [f64; 2],
}

impl EstimatorSummary {
    /// Distance from `reference` in standard errors. A zero-variance sample is
    /// either exactly on the reference (z = 0) or infinitely far from it.
    pub fn z_score(&self, reference: f64) -> f64 {
        let diff = (self.mean - reference).abs();
        if self.std_error > 0.0 {
            diff / self.std_error
        } else if diff <= 1e-12 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn within(&self, reference: f64, sigmas: f64) -> bool {
        self.z_score(reference) <= sigmas
    }
}

/// Runs `trials` independent trials in batches of [`BATCH_SIZE`]; batch `b`
/// draws from `substream(seed, b)` and partial accumulators are merged in batch
/// order, so results are bit-identical for a given `(seed, trials)`.
pub fn run_trials<A, F>(seed: u64, trials: u64, trial: F) -> A
where
    A: Merge,
    F: Fn(&mut RngStream, &mut A) + Sync,
{
    run_partitioned(seed, trials, BATCH_SIZE, trial)
}

/// As [`run_trials`] with an explicit batch size.
pub fn run_partitioned<A, F>(seed: u64, trials: u64, batch_size: u64, trial: F) -> A
where
    A: Merge,
    F: Fn(&mut RngStream, &mut A) + Sync,
{
    let batch_size = batch_size.max(1);
    let batches = trials.div_ceil(batch_size);
    let parts: Vec<A> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = substream(seed, b);
            let n = batch_size.min(trials - b * batch_size);
            let mut acc = A::default();
            for _ in 0..n {
                trial(&mut rng, &mut acc);
            }
            acc
        })
        .collect();
    parts.into_iter().fold(A::default(), |mut acc, p| {
        acc.merge(p);
        acc
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn correlation(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    fn draws(seed: u64, index: u64, n: usize) -> Vec<f64> {
        let mut rng = substream(seed, index);
        (0..n).map(|_| rng.random::<f64>()).collect()
    }

    #[test]
    fn same_stream_replays() {
        assert_eq!(draws(42, 0, 1000), draws(42, 0, 1000));
    }

    #[test]
    fn distinct_streams_are_uncorrelated() {
        let n = 100_000;
        let bound = 4.0 / (n as f64).sqrt();
        let base = draws(42, 0, n);
        let r1 = correlation(&base, &draws(42, 1, n));
        let r2 = correlation(&base, &draws(43, 0, n));
        assert!(r1.abs() < bound, "r(42/0, 42/1) = {r1}");
        assert!(r2.abs() < bound, "r(42/0, 43/0) = {r2}");
    }

    #[test]
    fn constant_samples_have_zero_error() {
        let s: RunningStats = [1.0, 1.0, 1.0].into_iter().collect();
        let sum = s.summary().unwrap();
        assert_eq!(sum.mean, 1.0);
        assert_eq!(sum.std_error, 0.0);
        assert_eq!(sum.ci95, [1.0, 1.0]);
    }

    #[test]
    fn empty_has_no_summary() {
        assert!(RunningStats::new().summary().is_none());
    }

    #[test]
    fn merge_of_halves_matches_whole() {
        let mut a: RunningStats = [1.0, 2.0].into_iter().collect();
        let b: RunningStats = [3.0, 4.0].into_iter().collect();
        a.merge(b);
        let whole: RunningStats = [1.0, 2.0, 3.0, 4.0].into_iter().collect();
        assert_eq!(a.count(), 4);
        assert!((a.mean().unwrap() - 2.5).abs() < 1e-15);
        assert!((a.sample_variance() - whole.sample_variance()).abs() < 1e-15);
    }

    #[test]
    fn fair_coin_mean_near_zero() {
        let n = 100_000u64;
        let s: RunningStats = run_trials(9, n, |rng, acc: &mut RunningStats| {
            acc.push(if rng.random::<bool>() { 1.0 } else { -1.0 })
        });
        let sum = s.summary().unwrap();
        assert_eq!(sum.n, n);
        assert!(sum.mean.abs() < 4.0 / (n as f64).sqrt());
    }

    #[test]
    fn batched_runner_is_deterministic() {
        let f = |rng: &mut RngStream, acc: &mut RunningStats| acc.push(rng.random::<f64>());
        let a: RunningStats = run_trials(5, 50_000, f);
        let b: RunningStats = run_trials(5, 50_000, f);
        assert_eq!(a, b);
    }

    #[test]
    fn mix_seed_separates_salts() {
        assert_ne!(mix_seed(1, 0), mix_seed(1, 1));
        assert_eq!(mix_seed(1, 7), mix_seed(1, 7));
    }

    fn rel_close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300)
    }

    proptest! {
        #[test]
        fn merge_matches_concatenation(
            xs in prop::collection::vec(-1e3f64..1e3, 1..60),
            ys in prop::collection::vec(-1e3f64..1e3, 1..60),
        ) {
            let mut merged: RunningStats = xs.iter().copied().collect();
            merged.merge(ys.iter().copied().collect());
            let whole: RunningStats = xs.iter().chain(&ys).copied().collect();
            prop_assert_eq!(merged.count(), whole.count());
            let scale = xs.iter().chain(&ys).fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assert!((merged.mean().unwrap() - whole.mean().unwrap()).abs() <= 1e-12 * scale.max(1.0));
            prop_assert!(rel_close(merged.sample_variance(), whole.sample_variance())
                || (merged.sample_variance() - whole.sample_variance()).abs() <= 1e-12 * scale * scale);
        }

        #[test]
        fn merge_commutes(
            xs in prop::collection::vec(-10f64..10.0, 0..30),
            ys in prop::collection::vec(-10f64..10.0, 0..30),
        ) {
            let a: RunningStats = xs.iter().copied().collect();
            let b: RunningStats = ys.iter().copied().collect();
            let mut ab = a;
            ab.merge(b);
            let mut ba = b;
            ba.merge(a);
            prop_assert_eq!(ab.count(), ba.count());
            if ab.count() > 0 {
                prop_assert!((ab.mean().unwrap() - ba.mean().unwrap()).abs() <= 1e-12 * 10.0);
                prop_assert!((ab.sample_variance() - ba.sample_variance()).abs() <= 1e-12 * 100.0);
            }
        }
    }
}
