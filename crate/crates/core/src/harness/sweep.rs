use serde::Serialize;

use super::{run_resolved, ExperimentConfig, Resolved, TestsSpec, TrialRecord};
use crate::decoders::DecoderKind;
use crate::error::{param, Result};

/// A grid of test counts run against the same base configuration.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub base: ExperimentConfig,
    pub tests: Vec<TestsSpec>,
}

/// Aggregate of all trials of one `(m, decoder)` cell. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub theta: Option<f64>,
    pub k: usize,
    pub design: String,
    pub decoder: String,
    pub m: usize,
    pub c: Option<f64>,
    pub delta: Option<usize>,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_fp: f64,
    pub mean_fn: f64,
    pub mean_v0plus: f64,
    pub mean_v1plus: f64,
    pub mean_v1mm: f64,
    pub mean_m0: f64,
    pub seed: u64,
    #[serde(skip)]
    pub mean_v0plus_delta: f64,
    #[serde(skip)]
    pub timeouts: usize,
    #[serde(skip)]
    pub errors: usize,
}

/// Fold the records of one decoder into a row, in the order given.
pub fn aggregate(resolved: &Resolved, master_seed: u64, decoder: DecoderKind, records: &[&TrialRecord]) -> SweepRow {
    let trials = records.len();
    let mean = |f: &dyn Fn(&TrialRecord) -> usize| -> f64 {
        if trials == 0 {
            return 0.0;
        }
        records.iter().map(|r| f(r) as f64).sum::<f64>() / trials as f64
    };
    let successes = records.iter().filter(|r| r.exact_recovery).count();
    SweepRow {
        n: resolved.n,
        theta: resolved.theta,
        k: resolved.k,
        design: resolved.kind.name().to_string(),
        decoder: decoder.name().to_string(),
        m: resolved.m,
        c: resolved.c(),
        delta: resolved.kind.delta(),
        trials,
        successes,
        success_rate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
        mean_fp: mean(&|r| r.false_positives),
        mean_fn: mean(&|r| r.false_negatives),
        mean_v0plus: mean(&|r| r.v0_plus),
        mean_v1plus: mean(&|r| r.v1_plus),
        mean_v1mm: mean(&|r| r.v1_minus_minus),
        mean_m0: mean(&|r| r.m0),
        seed: master_seed,
        mean_v0plus_delta: mean(&|r| r.v0_plus_delta),
        timeouts: records.iter().filter(|r| r.timeout).count(),
        errors: records.iter().filter(|r| r.error.is_some()).count(),
    }
}

/// Rows in grid order, decoders in configuration order within each grid point,
/// together with the underlying records of every grid point.
pub fn sweep_with_records(config: &SweepConfig) -> Result<Vec<(SweepRow, Vec<TrialRecord>)>> {
    if config.tests.is_empty() {
        return param("sweep grid is empty");
    }
    let mut out = Vec::new();
    for &tests in &config.tests {
        let cell = ExperimentConfig { tests, ..config.base.clone() };
        let resolved = cell.resolve()?;
        let records = run_resolved(&resolved, &cell)?;
        for spec in &cell.decoders {
            let kind = spec.kind();
            let mine: Vec<TrialRecord> = records.iter().filter(|r| r.decoder == kind).cloned().collect();
            let row = aggregate(&resolved, cell.master_seed, kind, &mine.iter().collect::<Vec<_>>());
            out.push((row, mine));
        }
    }
    Ok(out)
}

pub fn sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    Ok(sweep_with_records(config)?.into_iter().map(|(row, _)| row).collect())
}
