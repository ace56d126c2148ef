//! Seeded Monte-Carlo experiments.
//!
//! Trial `t` of a run draws all of its randomness from streams keyed by
//! `trial_seed(master_seed, t)`, so results do not depend on the number of
//! workers or on scheduling. Records are always returned in trial order.

mod output;
mod sweep;
mod verify;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use output::{write_jsonl, write_rate_curves_csv, write_sweep_csv, SWEEP_COLUMNS};
pub use sweep::{aggregate, sweep, sweep_with_records, SweepConfig, SweepRow};
pub use verify::{
    conditioned_binomial_law, pairing_law, total_variation, verify_concentration, verify_degree_conditioning,
    verify_fig1, ConcentrationCheck, ConcentrationConfig, DegreeConditioningConfig, DegreeConditioningReport, Law,
    Tolerance, VerificationReport, ELEMMA_EMPIRICAL_TOLERANCE, ELEMMA_EXACT_TOLERANCE,
};

use crate::decoders::{
    decode_comp, decode_dd, decode_exact, decode_scomp, DecoderKind, Estimate, ExactOptions, ExactStatus,
    ScompOptions, ScompScore, TieRule,
};
use crate::design::{default_bernoulli_p, degree_stats, generate_with, DesignKind, DesignParams, PoolingDesign};
use crate::error::{param, Error, Result};
use crate::instance::Instance;
use crate::model::{
    classify_sets, encode, infected_count_from_theta, outcome_stats, sample_infection, InfectionVector,
};
use crate::rng::{trial_seed, Purpose, RandomStream};
use crate::theory::{optimal_delta, theta_of, thresholds_for};

/// Environment variable that overrides the worker hint.
pub const WORKERS_ENV: &str = "GT_WORKERS";

/// Number of infected individuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfectedSpec {
    /// `k = round(n^theta)`.
    Theta(f64),
    Count(usize),
}

/// Number of tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestsSpec {
    Absolute(usize),
    /// Multiple of the information-theoretic threshold.
    RatioInf(f64),
    /// Multiple of the algorithmic threshold.
    RatioAlg(f64),
    /// `m = c k ln(n/k)`.
    C(f64),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaSpec {
    Absolute(usize),
    /// `ceil((m/k) ln 2)`.
    #[default]
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignChoice {
    Regular,
    /// Defaults to `p = ln 2 / k`.
    Bernoulli { p: Option<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderSpec {
    Comp,
    Dd,
    Scomp,
    /// Weight-`k` exact decoding with the true `k`.
    Exact { budget: u64, count_limit: Option<u64> },
}

impl DecoderSpec {
    pub const DEFAULT_EXACT_BUDGET: u64 = 1_000_000;

    pub fn exact() -> Self {
        DecoderSpec::Exact { budget: Self::DEFAULT_EXACT_BUDGET, count_limit: None }
    }

    pub fn kind(&self) -> DecoderKind {
        match self {
            DecoderSpec::Comp => DecoderKind::Comp,
            DecoderSpec::Dd => DecoderKind::Dd,
            DecoderSpec::Scomp => DecoderKind::Scomp,
            DecoderSpec::Exact { .. } => DecoderKind::Exact,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub n: usize,
    pub infected: InfectedSpec,
    pub design: DesignChoice,
    pub tests: TestsSpec,
    pub delta: DeltaSpec,
    pub decoders: Vec<DecoderSpec>,
    pub trials: usize,
    pub master_seed: u64,
    pub tie_rule: TieRule,
    pub scomp_score: ScompScore,
    /// Worker hint; `GT_WORKERS` takes precedence.
    pub workers: Option<usize>,
    /// Run every trial on this fixed instance instead of sampling one.
    pub fixture: Option<Instance>,
    /// Fill `runtime_us` in the records. Off by default so outputs are reproducible.
    pub record_timing: bool,
}

impl ExperimentConfig {
    pub fn new(n: usize, infected: InfectedSpec, tests: TestsSpec) -> Self {
        Self {
            n,
            infected,
            design: DesignChoice::Regular,
            tests,
            delta: DeltaSpec::Auto,
            decoders: vec![DecoderSpec::Dd, DecoderSpec::Scomp],
            trials: 1,
            master_seed: 0,
            tie_rule: TieRule::Random,
            scomp_score: ScompScore::DistinctTests,
            workers: None,
            fixture: None,
            record_timing: false,
        }
    }

    /// Every trial uses `instance`.
    pub fn from_fixture(instance: Instance) -> Self {
        let d = &instance.design;
        let mut cfg = Self::new(d.n(), InfectedSpec::Count(instance.sigma.k()), TestsSpec::Absolute(d.m()));
        cfg.delta = match d.kind() {
            DesignKind::Regular { delta } => DeltaSpec::Absolute(delta),
            DesignKind::Bernoulli { .. } => DeltaSpec::Auto,
        };
        cfg.design = match d.kind() {
            DesignKind::Regular { .. } => DesignChoice::Regular,
            DesignKind::Bernoulli { p } => DesignChoice::Bernoulli { p: Some(p) },
        };
        cfg.fixture = Some(instance);
        cfg
    }

    pub fn with_decoders(mut self, decoders: Vec<DecoderSpec>) -> Self {
        self.decoders = decoders;
        self
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn with_tie_rule(mut self, tie_rule: TieRule) -> Self {
        self.tie_rule = tie_rule;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    /// Resolve `k`, `m` and the design parameters.
    pub fn resolve(&self) -> Result<Resolved> {
        if self.trials == 0 {
            return param("trials must be at least 1");
        }
        if self.decoders.is_empty() {
            return param("at least one decoder is required");
        }
        if let Some(fx) = &self.fixture {
            let d = &fx.design;
            return Ok(Resolved {
                n: d.n(),
                k: fx.sigma.k(),
                theta: theta_of(d.n(), fx.sigma.k()).ok(),
                m: d.m(),
                kind: d.kind(),
            });
        }
        if self.n == 0 {
            return param("n must be at least 1");
        }
        let (k, theta) = match self.infected {
            InfectedSpec::Theta(theta) => (infected_count_from_theta(self.n, theta)?, Some(theta)),
            InfectedSpec::Count(k) => {
                if k > self.n {
                    return param(format!("k = {k} exceeds n = {}", self.n));
                }
                (k, theta_of(self.n, k).ok())
            }
        };
        let m = resolve_tests(self.n, k, theta, self.tests)?;
        let delta = match self.delta {
            DeltaSpec::Absolute(delta) => delta,
            DeltaSpec::Auto => optimal_delta(m, k.max(1))?,
        };
        let kind = match self.design {
            DesignChoice::Regular => DesignKind::Regular { delta },
            DesignChoice::Bernoulli { p } => DesignKind::Bernoulli {
                p: match p {
                    Some(p) => p,
                    None => default_bernoulli_p(k)?,
                },
            },
        };
        let resolved = Resolved { n: self.n, k, theta, m, kind };
        resolved.params(0).validate()?;
        Ok(resolved)
    }
}

/// Test count for a specification; ratios round to the nearest integer, at least 1.
pub fn resolve_tests(n: usize, k: usize, theta: Option<f64>, spec: TestsSpec) -> Result<usize> {
    let m = match spec {
        TestsSpec::Absolute(m) => m as f64,
        TestsSpec::RatioInf(r) | TestsSpec::RatioAlg(r) => {
            if !(r > 0.0 && r.is_finite()) {
                return param(format!("test ratio {r} must be positive"));
            }
            let theta = theta.ok_or_else(|| Error::Parameter("threshold ratios need theta".into()))?;
            let t = thresholds_for(n, k, theta)?;
            let base = if matches!(spec, TestsSpec::RatioInf(_)) { t.m_inf } else { t.m_alg };
            (r * base).round()
        }
        TestsSpec::C(c) => {
            if !(c > 0.0 && c.is_finite()) {
                return param(format!("c = {c} must be positive"));
            }
            if k == 0 || k >= n {
                return param("c specification needs 1 <= k < n");
            }
            (c * k as f64 * (n as f64 / k as f64).ln()).round()
        }
    };
    if m < 1.0 {
        return param("number of tests must be at least 1");
    }
    Ok(m as usize)
}

/// A configuration with every count fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolved {
    pub n: usize,
    pub k: usize,
    pub theta: Option<f64>,
    pub m: usize,
    pub kind: DesignKind,
}

impl Resolved {
    fn params(&self, seed: u64) -> DesignParams {
        DesignParams { n: self.n, m: self.m, kind: self.kind, seed }
    }

    /// `m / (k ln(n/k))`, when defined.
    pub fn c(&self) -> Option<f64> {
        (self.k > 0 && self.k < self.n).then(|| self.m as f64 / (self.k as f64 * (self.n as f64 / self.k as f64).ln()))
    }
}

/// One decoder's result on one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub delta: Option<usize>,
    pub decoder: DecoderKind,
    pub exact_recovery: bool,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub consistent: bool,
    pub v0_plus: usize,
    pub v1_plus: usize,
    pub v1_minus_minus: usize,
    pub v0_plus_delta: usize,
    pub m0: usize,
    pub w: usize,
    pub gamma_min: usize,
    pub gamma_max: usize,
    pub gamma_in_band: bool,
    /// DD's definite defectives coincide with `V1--`.
    pub dd_matches_v1mm: bool,
    /// Swapping a `V0+` and a `V1+` member leaves the outcomes unchanged; `None` if either set is empty.
    pub flip_pair_ok: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_status: Option<ExactStatus>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_k: Option<u64>,
    pub timeout: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_us: Option<u64>,
}

/// Effective worker count: `GT_WORKERS`, then the hint, then the machine's parallelism.
pub fn worker_count(hint: Option<usize>) -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&w| w > 0)
        .or(hint.filter(|&w| w > 0))
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |p| p.get()))
}

pub(crate) fn with_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(workers))
        .build()
        .map_err(|e| Error::Parameter(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(job))
}

/// Design, infection vector and outcomes of trial `t`.
pub fn trial_instance(resolved: &Resolved, config: &ExperimentConfig, t: usize) -> Result<(u64, Instance)> {
    let seed = trial_seed(config.master_seed, t as u64);
    if let Some(fx) = &config.fixture {
        return Ok((seed, fx.clone()));
    }
    let mut design_stream = RandomStream::new(seed, Purpose::Design, 0);
    let design = generate_with(resolved.params(seed), &mut design_stream)?;
    let mut infection_stream = RandomStream::new(seed, Purpose::Infection, 0);
    let sigma = sample_infection(resolved.n, resolved.k, &mut infection_stream)?;
    Ok((seed, Instance::new(design, sigma)?))
}

fn flip_pair_check(design: &PoolingDesign, sigma: &InfectionVector, v0_plus: &[usize], v1_plus: &[usize]) -> Option<bool> {
    let (&healthy, &infected) = (v0_plus.first()?, v1_plus.first()?);
    let flipped = sigma.flipped(healthy, infected).ok()?;
    let same = encode(design, &flipped).ok()? == encode(design, sigma).ok()?;
    Some(same && flipped != *sigma && flipped.k() == sigma.k())
}

/// Run one trial through every requested decoder.
pub fn run_trial(resolved: &Resolved, config: &ExperimentConfig, t: usize) -> Result<Vec<TrialRecord>> {
    let (seed, inst) = trial_instance(resolved, config, t)?;
    let Instance { design, sigma, outcomes } = &inst;
    let stats = outcome_stats(design, sigma)?;
    let sets = classify_sets(design, sigma, outcomes)?;
    let degrees = degree_stats(design);
    let dd_reference = decode_dd(design, outcomes)?;
    let dd_matches_v1mm = dd_reference.infected() == sets.v1_minus_minus;
    let flip_pair_ok = flip_pair_check(design, sigma, &sets.v0_plus, &sets.v1_plus);

    let base = TrialRecord {
        trial_index: t,
        seed,
        n: design.n(),
        m: design.m(),
        k: sigma.k(),
        delta: design.kind().delta(),
        decoder: DecoderKind::Dd,
        exact_recovery: false,
        false_positives: 0,
        false_negatives: 0,
        consistent: false,
        v0_plus: sets.v0_plus.len(),
        v1_plus: sets.v1_plus.len(),
        v1_minus_minus: sets.v1_minus_minus.len(),
        v0_plus_delta: sets.v0_plus_delta.len(),
        m0: stats.m0,
        w: stats.w,
        gamma_min: degrees.gamma_min,
        gamma_max: degrees.gamma_max,
        gamma_in_band: degrees.within_lemma_bounds,
        dd_matches_v1mm,
        flip_pair_ok,
        exact_status: None,
        z_k: None,
        timeout: false,
        error: None,
        runtime_us: None,
    };

    let mut records = Vec::with_capacity(config.decoders.len());
    for spec in &config.decoders {
        let started = Instant::now();
        let mut rec = TrialRecord { decoder: spec.kind(), ..base.clone() };
        let estimate: Result<Estimate> = match *spec {
            DecoderSpec::Comp => decode_comp(design, outcomes),
            DecoderSpec::Dd => Ok(dd_reference.clone()),
            DecoderSpec::Scomp => {
                let mut stream = RandomStream::new(seed, Purpose::TieBreak, 0);
                let opts = ScompOptions { tie_rule: config.tie_rule, score: config.scomp_score };
                decode_scomp(design, outcomes, &mut stream, opts)
            }
            DecoderSpec::Exact { budget, count_limit } => {
                let mut opts = ExactOptions::weight_k(sigma.k()).with_budget(budget);
                opts.count_limit = count_limit;
                decode_exact(design, outcomes, opts).map(|r| {
                    rec.exact_status = Some(r.status);
                    rec.z_k = r.z_k;
                    rec.timeout = r.status == ExactStatus::Timeout;
                    r.witness.unwrap_or_else(|| {
                        let none = vec![false; design.n()];
                        Estimate {
                            decoder: DecoderKind::Exact,
                            consistent_with_outcomes: crate::model::encode_bits(design, &none) == *outcomes,
                            bits: none,
                            stage_labels: vec![crate::decoders::StageLabel::DefaultHealthy; design.n()],
                        }
                    })
                })
            }
        };
        match estimate {
            Ok(est) => {
                let (fp, fneg) = est.errors(sigma.bits());
                rec.false_positives = fp;
                rec.false_negatives = fneg;
                rec.exact_recovery = fp == 0 && fneg == 0 && !rec.timeout;
                rec.consistent = est.consistent_with_outcomes;
            }
            Err(e) => rec.error = Some(e.to_string()),
        }
        if config.record_timing {
            rec.runtime_us = Some(started.elapsed().as_micros() as u64);
        }
        records.push(rec);
    }
    Ok(records)
}

/// Run every trial; records come back in `(trial, decoder)` order.
pub fn run_trials(config: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    let resolved = config.resolve()?;
    run_resolved(&resolved, config)
}

pub(crate) fn run_resolved(resolved: &Resolved, config: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    let per_trial: Vec<Result<Vec<TrialRecord>>> = with_pool(config.workers, || {
        (0..config.trials)
            .into_par_iter()
            .map(|t| run_trial(resolved, config, t))
            .collect()
    })?;
    let mut records = Vec::with_capacity(config.trials * config.decoders.len());
    for r in per_trial {
        records.extend(r?);
    }
    Ok(records)
}
