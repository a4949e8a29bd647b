//! Nonparametric bootstrap of contextuality statistics over respondent
//! tallies.
//!
//! Resample `i` draws, for every context independently, `n_valid`
//! respondents with replacement from that context's valid responses, then
//! rebuilds the model exactly as aggregation does. Resample 0 is the
//! observed data itself. The generator for resample `i` is ChaCha8 keyed by
//! `seed_from_u64(seed)` on stream `i`, so any resample can be recomputed on
//! its own and results do not depend on how work is split across threads.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cbd::{self, CbdError, CyclicSystem};
use crate::ingest::{self, ContextTally, IngestError};
use crate::scenario::MeasurementScenario;
use crate::sheaf::{self, SheafError};

pub const DEFAULT_RESAMPLES: usize = 100_000;
pub const DEFAULT_BIN_WIDTH: f64 = 0.02;
pub const GENERATOR: &str = "ChaCha8Rng (rand_chacha 0.9), seed_from_u64(seed), stream = resample index";

#[derive(Clone, Debug, PartialEq, Error)]
pub enum BootstrapError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Cbd(#[from] CbdError),
    #[error(transparent)]
    Sheaf(#[from] SheafError),
    #[error("at least one resample is required")]
    NoResamples,
    #[error("bin width must be positive and finite, got {0}")]
    BadBinWidth(f64),
    #[error("no samples to summarise")]
    Empty,
    #[error("sample {0} is not finite")]
    NotFinite(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Statistic {
    /// Bell-CHSH violation (maximal signed correlation sum minus 2).
    Violation,
    Cnt1,
    ContextualFraction,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BootstrapConfig {
    pub n_resamples: usize,
    pub seed: u64,
    pub statistic: Statistic,
    pub bin_width: f64,
}

impl BootstrapConfig {
    pub fn new(seed: u64) -> Self {
        BootstrapConfig {
            n_resamples: DEFAULT_RESAMPLES,
            seed,
            statistic: Statistic::Violation,
            bin_width: DEFAULT_BIN_WIDTH,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bin {
    pub center: f64,
    pub count: usize,
    pub density: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BootstrapResult {
    pub samples: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    /// Share of samples strictly above zero.
    pub fraction_positive: f64,
    pub histogram: Vec<Bin>,
    pub seed: u64,
    pub generator: &'static str,
}

pub fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Tallies of resample `index`. Index 0 returns the input unchanged.
pub fn resample(tallies: &[ContextTally], seed: u64, index: u64) -> Vec<ContextTally> {
    if index == 0 {
        return tallies.to_vec();
    }
    let mut rng = rng_for(seed, index);
    tallies
        .iter()
        .map(|t| {
            let mut same = 0;
            if t.n_valid > 0 {
                for _ in 0..t.n_valid {
                    if rng.random_range(0..t.n_valid) < t.n_same {
                        same += 1;
                    }
                }
            }
            ContextTally { n_total: t.n_valid, n_valid: t.n_valid, n_same: same, n_diff: t.n_valid - same }
        })
        .collect()
}

pub fn statistic_of(
    scenario: &MeasurementScenario,
    tallies: &[ContextTally],
    statistic: Statistic,
) -> Result<f64, BootstrapError> {
    let model = ingest::model_from_tallies(scenario.clone(), tallies)?;
    Ok(match statistic {
        Statistic::Violation => cbd::chsh_violation(&model)?.value,
        Statistic::Cnt1 => cbd::cnt1(&CyclicSystem::from_model(&model)?),
        Statistic::ContextualFraction => sheaf::contextual_fraction(&model)?.cf,
    })
}

pub fn sample(
    scenario: &MeasurementScenario,
    tallies: &[ContextTally],
    config: &BootstrapConfig,
    index: usize,
) -> Result<f64, BootstrapError> {
    statistic_of(scenario, &resample(tallies, config.seed, index as u64), config.statistic)
}

/// Runs all resamples sequentially.
pub fn run(
    scenario: &MeasurementScenario,
    tallies: &[ContextTally],
    config: &BootstrapConfig,
) -> Result<BootstrapResult, BootstrapError> {
    if config.n_resamples == 0 {
        return Err(BootstrapError::NoResamples);
    }
    check_width(config.bin_width)?;
    let samples = (0..config.n_resamples)
        .map(|i| sample(scenario, tallies, config, i))
        .collect::<Result<Vec<_>, _>>()?;
    summarize(samples, config)
}

fn check_width(w: f64) -> Result<(), BootstrapError> {
    if w.is_finite() && w > 0.0 {
        Ok(())
    } else {
        Err(BootstrapError::BadBinWidth(w))
    }
}

pub fn summarize(samples: Vec<f64>, config: &BootstrapConfig) -> Result<BootstrapResult, BootstrapError> {
    if samples.is_empty() {
        return Err(BootstrapError::Empty);
    }
    if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
        return Err(BootstrapError::NotFinite(i));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let fraction_positive = samples.iter().filter(|&&x| x > 0.0).count() as f64 / n;
    let histogram = histogram(&samples, config.bin_width)?;
    Ok(BootstrapResult {
        samples,
        mean,
        std: libm::sqrt(var),
        fraction_positive,
        histogram,
        seed: config.seed,
        generator: GENERATOR,
    })
}

/// Density histogram with bins `[k w, (k + 1) w)` covering the samples
/// contiguously; densities integrate to 1.
pub fn histogram(samples: &[f64], bin_width: f64) -> Result<Vec<Bin>, BootstrapError> {
    check_width(bin_width)?;
    if samples.is_empty() {
        return Err(BootstrapError::Empty);
    }
    let mut keys = Vec::with_capacity(samples.len());
    for (i, &x) in samples.iter().enumerate() {
        if !x.is_finite() {
            return Err(BootstrapError::NotFinite(i));
        }
        keys.push(libm::floor(x / bin_width) as i64);
    }
    let lo = *keys.iter().min().unwrap();
    let hi = *keys.iter().max().unwrap();
    let mut counts = vec![0usize; (hi - lo + 1) as usize];
    for k in keys {
        counts[(k - lo) as usize] += 1;
    }
    let n = samples.len() as f64;
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(j, count)| Bin {
            center: ((lo + j as i64) as f64 + 0.5) * bin_width,
            count,
            density: count as f64 / (n * bin_width),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::chsh;
    use proptest::prelude::*;

    fn tallies() -> Vec<ContextTally> {
        [(75, 18), (8, 77), (59, 26), (59, 26)].iter().map(|&(s, d)| ContextTally::from_counts(s, d)).collect()
    }

    fn cfg(n: usize, seed: u64) -> BootstrapConfig {
        BootstrapConfig { n_resamples: n, ..BootstrapConfig::new(seed) }
    }

    #[test]
    fn degenerate_counts_have_zero_spread() {
        let t = vec![ContextTally::from_counts(10, 0), ContextTally::from_counts(0, 10), ContextTally::from_counts(10, 0), ContextTally::from_counts(10, 0)];
        let r = run(&chsh(), &t, &cfg(200, 3)).unwrap();
        assert_eq!(r.std, 0.0);
        assert!(r.samples.iter().all(|&x| x == 2.0));
        assert_eq!(r.fraction_positive, 1.0);
    }

    #[test]
    fn single_resample_is_point_estimate() {
        let sc = chsh();
        let point = statistic_of(&sc, &tallies(), Statistic::Violation).unwrap();
        let r = run(&sc, &tallies(), &cfg(1, 99)).unwrap();
        assert_eq!(r.samples, vec![point]);
        assert_eq!(r.mean, point);
        assert_eq!(r.std, 0.0);
    }

    #[test]
    fn histogram_examples() {
        let h = histogram(&[0.192], 0.02).unwrap();
        assert_eq!(h.len(), 1);
        assert!((h[0].center - 0.19).abs() < 1e-12);
        assert!((h[0].density - 50.0).abs() < 1e-9);

        let h = histogram(&[-0.01, 0.05], 0.02).unwrap();
        let centers: Vec<f64> = h.iter().map(|b| b.center).collect();
        assert_eq!(h.len(), 4);
        assert!((centers[0] + 0.01).abs() < 1e-12 && (centers[3] - 0.05).abs() < 1e-12);
        assert_eq!(h.iter().map(|b| b.count).collect::<Vec<_>>(), vec![1, 0, 0, 1]);
        assert!(histogram(&[0.1], 0.0).is_err());
        assert!(histogram(&[], 0.1).is_err());
    }

    #[test]
    fn reproducible() {
        let sc = chsh();
        let a = run(&sc, &tallies(), &cfg(50, 7)).unwrap();
        let b = run(&sc, &tallies(), &cfg(50, 7)).unwrap();
        let c = run(&sc, &tallies(), &cfg(50, 8)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.samples, c.samples);
        assert_eq!(sample(&sc, &tallies(), &cfg(50, 7), 17).unwrap(), a.samples[17]);
    }

    #[test]
    fn resample_preserves_sizes() {
        for i in 0..20 {
            let r = resample(&tallies(), 1, i);
            for (x, y) in r.iter().zip(tallies()) {
                assert_eq!(x.n_valid, y.n_valid);
                assert_eq!(x.n_same + x.n_diff, x.n_valid);
            }
        }
    }

    #[test]
    fn statistics_agree_on_symmetric_data() {
        let sc = chsh();
        let t = tallies();
        let v = statistic_of(&sc, &t, Statistic::Violation).unwrap();
        let c = statistic_of(&sc, &t, Statistic::Cnt1).unwrap();
        let f = statistic_of(&sc, &t, Statistic::ContextualFraction).unwrap();
        assert!((v - c).abs() < 1e-12);
        assert!((f - v / 2.0).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn histogram_integrates_to_one(xs in proptest::collection::vec(-2.0f64..2.0, 1..200), w in 0.005f64..0.5) {
            let h = histogram(&xs, w).unwrap();
            let total: f64 = h.iter().map(|b| b.density * w).sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
            prop_assert_eq!(h.iter().map(|b| b.count).sum::<usize>(), xs.len());
        }

        #[test]
        fn summary_bounds(xs in proptest::collection::vec(-1.0f64..1.0, 1..100)) {
            let r = summarize(xs.clone(), &cfg(xs.len(), 0)).unwrap();
            prop_assert!(r.std >= 0.0);
            prop_assert!((0.0..=1.0).contains(&r.fraction_positive));
            let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(r.mean >= lo - 1e-12 && r.mean <= hi + 1e-12);
        }
    }
}
