//! Replication driver: serial or thread-pooled, always reducing in
//! replication order so the result is the same bytes either way.

use rayon::prelude::*;
use seqlab_core::policy::make_policy;
use seqlab_core::sim::{finalize_metrics, run_replication, RepAggregate, SimulationConfig};
use seqlab_core::MetricsReport;

use crate::error::CliResult;

pub fn run_simulation(config: &SimulationConfig, threads: usize) -> CliResult<MetricsReport> {
    config.validate()?;
    let policy = make_policy(&config.policy, config.model, config.criterion)?;
    let parts: Vec<seqlab_core::Result<RepAggregate>> = if threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| crate::error::CliError::Config(format!("thread pool: {e}")))?;
        pool.install(|| {
            (0..config.replications)
                .into_par_iter()
                .map(|rep| run_replication(&policy, config, rep))
                .collect()
        })
    } else {
        (0..config.replications)
            .map(|rep| run_replication(&policy, config, rep))
            .collect()
    };
    let mut total = RepAggregate::empty();
    for part in parts {
        total.merge(&part?);
    }
    Ok(finalize_metrics(policy.label(), config, &total))
}
