//! Verification checks: Monte-Carlo concentration against leading-order
//! predictions, the conditioned-degree identity on tiny instances, and the
//! golden check of the bundled example instance.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{resolve_tests, trial_instance, with_pool, DeltaSpec, DesignChoice, ExperimentConfig, InfectedSpec, TestsSpec};
use crate::decoders::{
    decode_dd, decode_exact, decode_scomp, enumerate_satisfying, ExactOptions, ExactStatus, ScompOptions, TieRule,
    DEFAULT_ENUMERATION_CAP,
};
use crate::design::{degree_stats, DesignParams, PoolingDesign};
use crate::error::{param, Error, Result};
use crate::instance::Instance;
use crate::model::{classify_sets, infected_count_from_theta, outcome_stats, sample_infection};
use crate::rng::{Purpose, RandomStream};
use crate::theory::{optimal_delta, predictions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Tolerance {
    /// `|empirical - reference| <= value * |reference|`
    Relative(f64),
    /// `|empirical - reference| <= value`
    Absolute(f64),
}

impl Tolerance {
    pub fn admits(&self, empirical: f64, reference: f64) -> bool {
        let gap = (empirical - reference).abs();
        match *self {
            Tolerance::Relative(r) => gap <= r * reference.abs(),
            Tolerance::Absolute(a) => gap <= a,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub samples: usize,
    pub empirical: f64,
    pub reference: f64,
    pub tolerance: Tolerance,
    pub pass: bool,
    /// Supporting quantities, e.g. the resolved `m`, `k`, `Δ`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
}

impl VerificationReport {
    fn new(check: &str, samples: usize, empirical: f64, reference: f64, tolerance: Tolerance) -> Self {
        Self {
            check: check.to_string(),
            samples,
            empirical,
            reference,
            pass: tolerance.admits(empirical, reference),
            tolerance,
            details: BTreeMap::new(),
        }
    }

    fn detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConcentrationCheck {
    /// Mean `|V0+|` against `n (1 - e^{-d/c})^Δ`, ±25 % by default.
    V0Plus,
    /// Mean `m0/m` against `1/2`, ±0.02 by default.
    M0,
    /// Fraction of trials whose degrees stay in the `Δn/m ± sqrt(Δn/m) ln n` band, at least 99 %.
    Gamma,
    /// Mean `W` against `kΔ e^{-d/c}`, ±10 % by default.
    W,
}

impl ConcentrationCheck {
    pub fn name(self) -> &'static str {
        match self {
            ConcentrationCheck::V0Plus => "v0plus",
            ConcentrationCheck::M0 => "m0",
            ConcentrationCheck::Gamma => "gamma",
            ConcentrationCheck::W => "w",
        }
    }

    pub fn default_tolerance(self) -> Tolerance {
        match self {
            ConcentrationCheck::V0Plus => Tolerance::Relative(0.25),
            ConcentrationCheck::M0 => Tolerance::Absolute(0.02),
            ConcentrationCheck::Gamma => Tolerance::Absolute(0.01),
            ConcentrationCheck::W => Tolerance::Relative(0.10),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationConfig {
    pub check: ConcentrationCheck,
    pub n: usize,
    pub theta: f64,
    /// `m = round(c k ln(n/k))`.
    pub c: f64,
    pub delta: DeltaSpec,
    pub trials: usize,
    pub seed: u64,
    pub tolerance: Option<Tolerance>,
    pub workers: Option<usize>,
}

impl ConcentrationConfig {
    pub fn new(check: ConcentrationCheck, n: usize, theta: f64, c: f64, trials: usize, seed: u64) -> Self {
        Self { check, n, theta, c, delta: DeltaSpec::Auto, trials, seed, tolerance: None, workers: None }
    }
}

/// Compare a Monte-Carlo mean with its leading-order reference.
pub fn verify_concentration(cfg: &ConcentrationConfig) -> Result<VerificationReport> {
    if cfg.trials == 0 {
        return param("trials must be at least 1");
    }
    let k = infected_count_from_theta(cfg.n, cfg.theta)?;
    let m = resolve_tests(cfg.n, k, Some(cfg.theta), TestsSpec::C(cfg.c))?;
    let delta = match cfg.delta {
        DeltaSpec::Absolute(d) => d,
        DeltaSpec::Auto => optimal_delta(m, k)?,
    };
    let pred = predictions(cfg.n, k, m, delta)?;
    let reference = match cfg.check {
        ConcentrationCheck::V0Plus => pred.e_v0_plus,
        ConcentrationCheck::M0 => 0.5,
        ConcentrationCheck::Gamma => 1.0,
        ConcentrationCheck::W => pred.e_w,
    };
    let degenerate = match cfg.check {
        ConcentrationCheck::V0Plus | ConcentrationCheck::W => reference < 1.0,
        ConcentrationCheck::M0 => (m as f64) * reference < 1.0,
        ConcentrationCheck::Gamma => false,
    };
    if degenerate {
        return Err(Error::Infeasible(format!(
            "reference value {reference:.3} for {} is below one; increase n",
            cfg.check.name()
        )));
    }

    let mut exp = ExperimentConfig::new(cfg.n, InfectedSpec::Theta(cfg.theta), TestsSpec::Absolute(m));
    exp.delta = DeltaSpec::Absolute(delta);
    exp.design = DesignChoice::Regular;
    exp.trials = cfg.trials;
    exp.master_seed = cfg.seed;
    exp.workers = cfg.workers;
    let resolved = exp.resolve()?;

    let check = cfg.check;
    let values: Vec<Result<f64>> = with_pool(cfg.workers, || {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let (_, inst) = trial_instance(&resolved, &exp, t)?;
                Ok(match check {
                    ConcentrationCheck::V0Plus => {
                        classify_sets(&inst.design, &inst.sigma, &inst.outcomes)?.v0_plus.len() as f64
                    }
                    ConcentrationCheck::M0 => outcome_stats(&inst.design, &inst.sigma)?.m0 as f64 / m as f64,
                    ConcentrationCheck::W => outcome_stats(&inst.design, &inst.sigma)?.w as f64,
                    ConcentrationCheck::Gamma => degree_stats(&inst.design).within_lemma_bounds as u8 as f64,
                })
            })
            .collect()
    })?;
    let mut total = 0.0;
    for v in values {
        total += v?;
    }
    let empirical = total / cfg.trials as f64;
    let tolerance = cfg.tolerance.unwrap_or_else(|| check.default_tolerance());
    Ok(VerificationReport::new(check.name(), cfg.trials, empirical, reference, tolerance)
        .detail("n", cfg.n as f64)
        .detail("k", k as f64)
        .detail("m", m as f64)
        .detail("delta", delta as f64)
        .detail("negative_fraction", pred.e_m0 / m as f64)
        .detail("e_v0_plus", pred.e_v0_plus)
        .detail("e_w", pred.e_w))
}

/// A probability law over integer vectors.
pub type Law = BTreeMap<Vec<usize>, f64>;

/// Total-variation distance between two laws.
pub fn total_variation(a: &Law, b: &Law) -> f64 {
    let mut sum = 0.0;
    for (key, &pa) in a {
        sum += (pa - b.get(key).copied().unwrap_or(0.0)).abs();
    }
    for (key, &pb) in b {
        if !a.contains_key(key) {
            sum += pb;
        }
    }
    sum / 2.0
}

fn compositions(profile: &[usize], total: usize) -> Vec<Vec<usize>> {
    fn rec(profile: &[usize], left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let i = cur.len();
        if i == profile.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let room: usize = profile[i + 1..].iter().sum();
        let lo = left.saturating_sub(room);
        for y in lo..=profile[i].min(left) {
            cur.push(y);
            rec(profile, left - y, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(profile, total, &mut Vec::new(), &mut out);
    out
}

/// Law of the infected edge counts per test given the degree profile, when
/// `infected_edges` of the `Σ Γ` edge endpoints are infected uniformly:
/// `P(y) = Π C(Γ_i, y_i) / C(Σ Γ, infected_edges)`, evaluated in exact integers.
pub fn pairing_law(profile: &[usize], infected_edges: usize) -> Result<Law> {
    let total: usize = profile.iter().sum();
    if infected_edges > total {
        return param("more infected edges than edges");
    }
    let denom = crate::decoders::binomial(total, infected_edges);
    if denom == u128::MAX {
        return Err(Error::Infeasible("edge count too large for exact arithmetic".into()));
    }
    Ok(compositions(profile, infected_edges)
        .into_iter()
        .map(|y| {
            let ways = profile
                .iter()
                .zip(&y)
                .fold(1u128, |acc, (&g, &yi)| acc * crate::decoders::binomial(g, yi));
            (y, ways as f64 / denom as f64)
        })
        .collect())
}

fn binomial_pmf(trials: usize, p: f64) -> Vec<f64> {
    let mut pmf = Vec::with_capacity(trials + 1);
    let mut cur = (1.0 - p).powi(trials as i32);
    let ratio = p / (1.0 - p);
    for y in 0..=trials {
        pmf.push(cur);
        cur *= (trials - y) as f64 / (y + 1) as f64 * ratio;
    }
    pmf
}

/// Law of independent `Bin(Γ_i, p)` variables conditioned on their sum being
/// `infected_edges`. The normaliser comes from convolving the marginals.
pub fn conditioned_binomial_law(profile: &[usize], p: f64, infected_edges: usize) -> Result<Law> {
    if !(p > 0.0 && p < 1.0) {
        return param("p must lie in (0, 1)");
    }
    let marginals: Vec<Vec<f64>> = profile.iter().map(|&g| binomial_pmf(g, p)).collect();
    let mut sum_law = vec![1.0];
    for pmf in &marginals {
        let mut next = vec![0.0; sum_law.len() + pmf.len() - 1];
        for (s, &ps) in sum_law.iter().enumerate() {
            for (y, &py) in pmf.iter().enumerate() {
                next[s + y] += ps * py;
            }
        }
        sum_law = next;
    }
    let event = sum_law.get(infected_edges).copied().unwrap_or(0.0);
    if event <= 0.0 {
        return param("conditioning event has probability zero");
    }
    Ok(compositions(profile, infected_edges)
        .into_iter()
        .map(|y| {
            let joint: f64 = marginals.iter().zip(&y).map(|(pmf, &yi)| pmf[yi]).product();
            (y, joint / event)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeConditioningConfig {
    pub n: usize,
    pub m: usize,
    pub delta: usize,
    pub k: usize,
    /// Test degrees `Γ_1..Γ_m`; must sum to `nΔ`.
    pub profile: Vec<usize>,
    /// Accepted designs to sample; `0` skips the empirical part.
    pub samples: usize,
    pub seed: u64,
    /// Give up after this many generated designs; defaults to `1000 * samples`.
    pub max_attempts: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeConditioningReport {
    pub profile: Vec<usize>,
    pub support: usize,
    /// TV distance between the pairing law and the conditioned binomial law.
    pub tv_exact: f64,
    pub tv_empirical_pairing: Option<f64>,
    pub tv_empirical_conditioned: Option<f64>,
    pub samples: usize,
    pub attempts: u64,
    pub exact_tolerance: f64,
    pub empirical_tolerance: f64,
    pub pass: bool,
}

impl DegreeConditioningReport {
    pub fn to_verification(&self) -> VerificationReport {
        let worst_empirical = self.tv_empirical_pairing.unwrap_or(0.0).max(self.tv_empirical_conditioned.unwrap_or(0.0));
        let mut r = VerificationReport::new("elemma", self.samples, self.tv_exact, 0.0, Tolerance::Absolute(self.exact_tolerance));
        r.pass = self.pass;
        r.detail("tv_empirical", worst_empirical)
            .detail("empirical_tolerance", self.empirical_tolerance)
            .detail("support", self.support as f64)
            .detail("attempts", self.attempts as f64)
    }
}

pub const ELEMMA_EXACT_TOLERANCE: f64 = 1e-10;
pub const ELEMMA_EMPIRICAL_TOLERANCE: f64 = 0.02;

/// `ln` of the probability that a random regular design has degree profile `profile`.
fn ln_profile_probability(profile: &[usize], m: usize) -> f64 {
    let ln_fact = |x: usize| (1..=x).map(|i| (i as f64).ln()).sum::<f64>();
    let total: usize = profile.iter().sum();
    ln_fact(total) - profile.iter().map(|&g| ln_fact(g)).sum::<f64>() - total as f64 * (m as f64).ln()
}

/// Check that, given the degree profile, the infected edge counts follow the
/// conditioned binomial law exactly, and that sampled designs agree with it.
pub fn verify_degree_conditioning(cfg: &DegreeConditioningConfig) -> Result<DegreeConditioningReport> {
    let DegreeConditioningConfig { n, m, delta, k, .. } = *cfg;
    let profile = &cfg.profile;
    if n == 0 || m == 0 || delta == 0 {
        return param("n, m and delta must be positive");
    }
    if k > n {
        return param("k exceeds n");
    }
    if n * delta > 60 || m > 6 {
        return Err(Error::Infeasible(format!(
            "exact laws need n*delta <= 60 and m <= 6, got n*delta = {}, m = {m}",
            n * delta
        )));
    }
    if profile.len() != m || profile.iter().sum::<usize>() != n * delta {
        return param("profile must have m entries summing to n*delta");
    }

    let infected_edges = k * delta;
    let pairing = pairing_law(profile, infected_edges)?;
    let conditioned = if k == 0 || k == n {
        pairing.clone()
    } else {
        conditioned_binomial_law(profile, k as f64 / n as f64, infected_edges)?
    };
    let tv_exact = total_variation(&pairing, &conditioned);

    let mut report = DegreeConditioningReport {
        profile: profile.clone(),
        support: pairing.len(),
        tv_exact,
        tv_empirical_pairing: None,
        tv_empirical_conditioned: None,
        samples: 0,
        attempts: 0,
        exact_tolerance: ELEMMA_EXACT_TOLERANCE,
        empirical_tolerance: ELEMMA_EMPIRICAL_TOLERANCE,
        pass: tv_exact <= ELEMMA_EXACT_TOLERANCE,
    };
    if cfg.samples == 0 {
        return Ok(report);
    }

    let max_attempts = cfg.max_attempts.unwrap_or(cfg.samples as u64 * 1000);
    let expected_attempts = cfg.samples as f64 / ln_profile_probability(profile, m).exp();
    if expected_attempts > max_attempts as f64 {
        return Err(Error::Infeasible(format!(
            "profile too rare: about {expected_attempts:.0} designs needed, limit {max_attempts}"
        )));
    }

    let mut design_stream = RandomStream::new(cfg.seed, Purpose::Sampling, 0);
    let mut infection_stream = RandomStream::new(cfg.seed, Purpose::Infection, 0);
    let params = DesignParams::regular(n, m, delta, cfg.seed);
    let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut draws = vec![0usize; n * delta];
    let mut degrees = vec![0usize; m];
    let mut accepted = 0;
    let mut attempts = 0u64;
    while accepted < cfg.samples {
        if attempts >= max_attempts {
            return Err(Error::Infeasible(format!("only {accepted} designs accepted in {attempts} attempts")));
        }
        attempts += 1;
        // same draw order as generate_regular_design
        degrees.iter_mut().for_each(|g| *g = 0);
        for slot in draws.iter_mut() {
            *slot = design_stream.below(m);
            degrees[*slot] += 1;
        }
        if degrees != *profile {
            continue;
        }
        let assignments = draws.chunks(delta).map(<[usize]>::to_vec).collect();
        let design = PoolingDesign::from_assignments(params, assignments)?;
        let sigma = sample_infection(n, k, &mut infection_stream)?;
        let y = outcome_stats(&design, &sigma)?.y;
        *counts.entry(y).or_insert(0) += 1;
        accepted += 1;
    }
    let empirical: Law = counts
        .into_iter()
        .map(|(y, c)| (y, c as f64 / accepted as f64))
        .collect();
    let tv_p = total_variation(&empirical, &pairing);
    let tv_c = total_variation(&empirical, &conditioned);
    report.tv_empirical_pairing = Some(tv_p);
    report.tv_empirical_conditioned = Some(tv_c);
    report.samples = accepted;
    report.attempts = attempts;
    report.pass = report.pass && tv_p <= ELEMMA_EMPIRICAL_TOLERANCE && tv_c <= ELEMMA_EMPIRICAL_TOLERANCE;
    Ok(report)
}

/// Golden check of the seven-individual example: outcomes, vertex classes and
/// every decoder. `empirical` counts mismatching items; the check passes at zero.
pub fn verify_fig1(inst: &Instance) -> Result<VerificationReport> {
    let Instance { design, sigma, outcomes } = inst;
    let mut mismatches = Vec::new();
    let mut expect = |name: &str, ok: bool| {
        if !ok {
            mismatches.push(name.to_string());
        }
    };
    expect("outcomes", outcomes.bits() == [true, true, true, false, false]);
    let sets = classify_sets(design, sigma, outcomes)?;
    expect("v0_plus", sets.v0_plus == [2]);
    expect("v1_plus", sets.v1_plus == [1]);
    expect("v1_minus_minus", sets.v1_minus_minus.is_empty());
    let dd = decode_dd(design, outcomes)?;
    expect("dd", dd.weight() == 0 && !dd.consistent_with_outcomes);
    let mut stream = RandomStream::new(0, Purpose::TieBreak, 0);
    let scomp = decode_scomp(design, outcomes, &mut stream, ScompOptions::with_tie_rule(TieRule::LowestIndex))?;
    expect("scomp", scomp.infected() == [0] && scomp.consistent_with_outcomes);
    let exact = decode_exact(design, outcomes, ExactOptions::weight_k(sigma.k()))?;
    expect("exact", exact.status == ExactStatus::AmbiguousK && exact.z_k == Some(3));
    let spectrum = enumerate_satisfying(design, outcomes, sigma, DEFAULT_ENUMERATION_CAP)?;
    expect("spectrum", spectrum.z_total == 3 && spectrum.count(1) == 2 && spectrum.alternatives() == 2);

    let mut report = VerificationReport::new("fig1", 1, mismatches.len() as f64, 0.0, Tolerance::Absolute(0.0));
    for (i, name) in mismatches.iter().enumerate() {
        report.details.insert(format!("mismatch_{i}_{name}"), 1.0);
    }
    Ok(report)
}
