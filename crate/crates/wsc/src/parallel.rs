//! Multi-threaded bootstrap. Samples are collected in resample order, so the
//! result is identical to the sequential run for any thread count.

use rayon::prelude::*;
use wsc_core::bootstrap::{self, BootstrapConfig, BootstrapError, BootstrapResult};
use wsc_core::ingest::ContextTally;
use wsc_core::MeasurementScenario;

use crate::Error;

pub fn run(
    scenario: &MeasurementScenario,
    tallies: &[ContextTally],
    config: &BootstrapConfig,
    threads: Option<usize>,
) -> Result<BootstrapResult, Error> {
    if config.n_resamples == 0 {
        return Err(Error::invalid(BootstrapError::NoResamples));
    }
    let work = || -> Result<Vec<f64>, BootstrapError> {
        (0..config.n_resamples)
            .into_par_iter()
            .map(|i| bootstrap::sample(scenario, tallies, config, i))
            .collect()
    };
    let samples = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Parse(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
    .map_err(Error::invalid)?;
    bootstrap::summarize(samples, config).map_err(Error::invalid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use wsc_core::bootstrap::Statistic;

    #[test]
    fn matches_sequential() {
        let sc = MeasurementScenario::new(
            ["a1", "a2", "b1", "b2"],
            [["a1", "b1"], ["a1", "b2"], ["a2", "b1"], ["a2", "b2"]],
            ["A", "B"],
        );
        let tallies: Vec<ContextTally> =
            [(30, 10), (5, 35), (25, 15), (24, 16)].iter().map(|&(s, d)| ContextTally::from_counts(s, d)).collect();
        let config = BootstrapConfig { n_resamples: 300, statistic: Statistic::Violation, ..BootstrapConfig::new(11) };
        let seq = bootstrap::run(&sc, &tallies, &config).unwrap();
        for t in [1, 3, 8] {
            let par = run(&sc, &tallies, &config, Some(t)).unwrap();
            assert_eq!(
                par.samples.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
                seq.samples.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
            );
        }
    }
}
