//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Every tolerance is pinned below.

mod common;

use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{exhaustive_min_weight, naive_classes, naive_outcomes, naive_satisfying, possibly_infected, random_instance, rng};
use grouptest::decoders::{
    decode_comp, decode_dd, decode_exact, decode_scomp, enumerate_satisfying, ExactOptions, ExactStatus, ScompOptions,
    StageLabel, TieRule, DEFAULT_ENUMERATION_CAP,
};
use grouptest::harness::{
    pairing_law, conditioned_binomial_law, sweep, sweep_with_records, total_variation, trial_instance,
    verify_concentration, verify_degree_conditioning, write_jsonl, write_sweep_csv, ConcentrationCheck,
    ConcentrationConfig, DecoderSpec, DegreeConditioningConfig, ExperimentConfig, InfectedSpec, SweepConfig, SweepRow,
    TestsSpec, WORKERS_ENV,
};
use grouptest::instance::Instance;
use grouptest::model::{classify_sets, encode, InfectionVector};
use grouptest::rng::{Purpose, RandomStream};

const FIG1_TIME_LIMIT: Duration = Duration::from_secs(1);
const SOUNDNESS_INSTANCES: usize = 1000;
const SOUNDNESS_MAX_N: usize = 200;
const SOUNDNESS_TIME_LIMIT: Duration = Duration::from_secs(30);
const ORACLE_INSTANCES: usize = 200;
const ORACLE_MAX_CANDIDATES: usize = 22;
const ORACLE_TIME_LIMIT: Duration = Duration::from_secs(60);

const SIGMOID_N: usize = 10_000;
const SIGMOID_THETA: f64 = 0.3;
const SIGMOID_TRIALS: usize = 200;
const LOW_RATIO: f64 = 0.6;
const HIGH_RATIO: f64 = 1.3;
const SUCCESS_HIGH_MIN: f64 = 0.9;
const SUCCESS_LOW_MAX: f64 = 0.2;
const SCOMP_MARGIN: f64 = 0.1;

const CONCENTRATION_N: usize = 100_000;
const CONCENTRATION_THETA: f64 = 0.5;
const CONCENTRATION_TRIALS: usize = 50;

const TRANSITION_TRIALS: usize = 100;
const V1MM_LOW_MAX_FRACTION: f64 = 0.1;
const V1MM_HIGH_MIN_FRACTION: f64 = 0.9;

const ELEMMA_EXACT_TV: f64 = 1e-10;
const ELEMMA_EMPIRICAL_TV: f64 = 0.02;
const ELEMMA_SAMPLES: usize = 100_000;

const UNIQUE_N: usize = 500;
const UNIQUE_THETA: f64 = 0.5;
const UNIQUE_RATIO: f64 = 1.4;
const UNIQUE_TRIALS: usize = 50;
const UNIQUE_MIN_FRACTION: f64 = 0.8;

const SEED: u64 = 20_240_601;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn fig1_golden() -> Outcome {
    let start = Instant::now();
    let inst = Instance::load(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/fig1.json")).unwrap();
    let d = &inst.design;
    let mut problems = Vec::new();

    // oracle side
    let truth = inst.sigma.bits().to_vec();
    let y = naive_outcomes(d, &truth);
    let classes = naive_classes(d, &truth);
    let satisfying = naive_satisfying(d, &y, 2);
    let true_set = inst.sigma.infected();
    let mut spectrum: BTreeMap<usize, u64> = BTreeMap::new();
    for s in &satisfying {
        let overlap = s.iter().filter(|i| true_set.contains(i)).count();
        if overlap < 2 {
            *spectrum.entry(overlap).or_insert(0) += 1;
        }
    }
    if y != [true, true, true, false, false] {
        problems.push("oracle outcomes");
    }
    if classes.v0_plus != [2] || classes.v1_plus != [1] || !classes.v1_minus_minus.is_empty() {
        problems.push("oracle classes");
    }
    if satisfying.len() != 3 || spectrum != BTreeMap::from([(1, 2)]) {
        problems.push("oracle spectrum");
    }

    // library side, compared against the oracle
    if inst.outcomes.bits() != y {
        problems.push("outcomes");
    }
    let sets = classify_sets(d, &inst.sigma, &inst.outcomes).unwrap();
    if sets.v0_plus != classes.v0_plus || sets.v1_plus != classes.v1_plus || sets.v1_minus_minus != classes.v1_minus_minus {
        problems.push("classes");
    }
    let dd = decode_dd(d, &inst.outcomes).unwrap();
    if dd.weight() != 0 || dd.consistent_with_outcomes {
        problems.push("dd");
    }
    let mut stream = RandomStream::new(SEED, Purpose::TieBreak, 0);
    let scomp = decode_scomp(d, &inst.outcomes, &mut stream, ScompOptions::with_tie_rule(TieRule::LowestIndex)).unwrap();
    if scomp.infected() != [0] || !scomp.consistent_with_outcomes {
        problems.push("scomp");
    }
    let exact = decode_exact(d, &inst.outcomes, ExactOptions::weight_k(2)).unwrap();
    if exact.status != ExactStatus::AmbiguousK || exact.z_k != Some(satisfying.len() as u64) {
        problems.push("exact");
    }
    let spec = enumerate_satisfying(d, &inst.outcomes, &inst.sigma, DEFAULT_ENUMERATION_CAP).unwrap();
    if spec.z_total != satisfying.len() as u64 || spec.counts != spectrum {
        problems.push("spectrum");
    }
    let elapsed = start.elapsed();
    if elapsed > FIG1_TIME_LIMIT {
        problems.push("time");
    }
    outcome(problems.is_empty(), format!("Z_2 = {}, spectrum {:?}, {:.3?}, mismatches {:?}", spec.z_total, spec.counts, elapsed, problems))
}

fn soundness() -> Outcome {
    let start = Instant::now();
    let mut r = rng(SEED);
    let mut violations = 0;
    let mut flips = 0;
    for t in 0..SOUNDNESS_INSTANCES {
        let inst = random_instance(&mut r, SOUNDNESS_MAX_N);
        let d = &inst.design;
        let sigma = InfectionVector::from_bits(inst.infected.clone());
        let out = encode(d, &sigma).unwrap();
        let comp = decode_comp(d, &out).unwrap();
        let dd = decode_dd(d, &out).unwrap();
        let mut stream = RandomStream::new(SEED, Purpose::TieBreak, t as u64);
        let scomp = decode_scomp(d, &out, &mut stream, ScompOptions::default()).unwrap();
        let naive = naive_classes(d, &inst.infected);
        let definite: Vec<usize> = (0..d.n()).filter(|&i| dd.stage_labels[i] == StageLabel::DefiniteInfected).collect();
        let scomp_ok = naive_outcomes(d, &scomp.bits) == out.bits();
        let ok = comp.errors(sigma.bits()).1 == 0
            && dd.errors(sigma.bits()).0 == 0
            && scomp_ok
            && scomp.consistent_with_outcomes
            && definite == naive.v1_minus_minus;
        if !ok {
            violations += 1;
        }
        if let (Some(&h), Some(&i)) = (naive.v0_plus.first(), naive.v1_plus.first()) {
            flips += 1;
            let mut other = inst.infected.clone();
            other[h] = true;
            other[i] = false;
            let same_weight = other.iter().filter(|&&b| b).count() == sigma.k();
            if !(same_weight && naive_outcomes(d, &other) == out.bits() && other != inst.infected) {
                violations += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        violations == 0 && elapsed <= SOUNDNESS_TIME_LIMIT,
        format!("{SOUNDNESS_INSTANCES} instances, {flips} flip pairs, {violations} violations, {elapsed:.2?}"),
    )
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut r = rng(SEED ^ 1);
    let mut checked = 0;
    let mut mismatches = 0;
    let mut largest = 0;
    while checked < ORACLE_INSTANCES {
        let inst = random_instance(&mut r, 60);
        let sigma = InfectionVector::from_bits(inst.infected.clone());
        let out = encode(&inst.design, &sigma).unwrap();
        let candidates = possibly_infected(&inst.design, out.bits()).len();
        if candidates > ORACLE_MAX_CANDIDATES {
            continue;
        }
        checked += 1;
        largest = largest.max(candidates);
        let exact = decode_exact(&inst.design, &out, ExactOptions::min_weight(None)).unwrap();
        if exact.min_weight != exhaustive_min_weight(&inst.design, out.bits()) {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches == 0 && elapsed <= ORACLE_TIME_LIMIT,
        format!("{checked} instances, largest |V+| = {largest}, {mismatches} mismatches, {elapsed:.2?}"),
    )
}

fn regime(n: usize, theta: f64, tests: TestsSpec, trials: usize, seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(n, InfectedSpec::Theta(theta), tests)
        .with_decoders(vec![DecoderSpec::Dd, DecoderSpec::Scomp])
        .with_trials(trials)
        .with_seed(seed);
    cfg.tie_rule = TieRule::Random;
    cfg
}

fn rows_by(rows: &[SweepRow], m: usize, decoder: &str) -> SweepRow {
    rows.iter().find(|r| r.m == m && r.decoder == decoder).cloned().unwrap()
}

fn sigmoid() -> Outcome {
    let start = Instant::now();
    let base = regime(SIGMOID_N, SIGMOID_THETA, TestsSpec::RatioAlg(LOW_RATIO), SIGMOID_TRIALS, SEED);
    let rows = sweep(&SweepConfig { base, tests: vec![TestsSpec::RatioAlg(LOW_RATIO), TestsSpec::RatioAlg(HIGH_RATIO)] }).unwrap();
    let (m_low, m_high) = (rows[0].m, rows[rows.len() - 1].m);
    let rate = |m, d| rows_by(&rows, m, d).success_rate;
    let (dd_lo, dd_hi, sc_lo, sc_hi) = (rate(m_low, "dd"), rate(m_high, "dd"), rate(m_low, "scomp"), rate(m_high, "scomp"));
    let pass = dd_hi >= SUCCESS_HIGH_MIN
        && sc_hi >= SUCCESS_HIGH_MIN
        && dd_lo <= SUCCESS_LOW_MAX
        && sc_lo <= SUCCESS_LOW_MAX
        && sc_lo - dd_lo <= SCOMP_MARGIN;
    outcome(
        pass,
        format!(
            "m = {m_low}/{m_high}: DD {dd_lo:.3}/{dd_hi:.3}, SCOMP {sc_lo:.3}/{sc_hi:.3}, {:.1?}",
            start.elapsed()
        ),
    )
}

fn concentration() -> Outcome {
    let start = Instant::now();
    let c = 1.0 / (LN_2 * LN_2);
    let mut parts = Vec::new();
    let mut pass = true;
    for check in [ConcentrationCheck::V0Plus, ConcentrationCheck::M0, ConcentrationCheck::W, ConcentrationCheck::Gamma] {
        let cfg = ConcentrationConfig::new(check, CONCENTRATION_N, CONCENTRATION_THETA, c, CONCENTRATION_TRIALS, SEED);
        let r = verify_concentration(&cfg).unwrap();
        pass &= r.pass;
        parts.push(format!(
            "{} {:.4} vs {:.4} [{}]",
            r.check,
            r.empirical,
            r.reference,
            if r.pass { "ok" } else { "out" }
        ));
        if check == ConcentrationCheck::M0 {
            parts.push(format!("(delta {}, e^-d/c {:.4})", r.details["delta"], r.details["negative_fraction"]));
        }
    }
    outcome(pass, format!("{}; {:.1?}", parts.join(", "), start.elapsed()))
}

fn transition() -> Outcome {
    let base = regime(SIGMOID_N, SIGMOID_THETA, TestsSpec::RatioAlg(LOW_RATIO), TRANSITION_TRIALS, SEED ^ 2)
        .with_decoders(vec![DecoderSpec::Dd]);
    let rows = sweep(&SweepConfig { base, tests: vec![TestsSpec::RatioAlg(LOW_RATIO), TestsSpec::RatioAlg(HIGH_RATIO)] }).unwrap();
    let (low, high) = (&rows[0], &rows[1]);
    let k = low.k as f64;
    let pass = low.mean_v1mm <= V1MM_LOW_MAX_FRACTION * k
        && high.mean_v1mm >= V1MM_HIGH_MIN_FRACTION * k
        && low.mean_v0plus_delta >= k;
    outcome(
        pass,
        format!(
            "k = {k}: mean |V1--| {:.2} at m = {}, {:.2} at m = {}; mean |V0+D| {:.1} at m = {}",
            low.mean_v1mm, low.m, high.mean_v1mm, high.m, low.mean_v0plus_delta, low.m
        ),
    )
}

fn elemma() -> Outcome {
    let start = Instant::now();
    // (n, m, delta, k, profile); every n*delta <= 60
    let exact_cases: [(usize, usize, usize, usize, &[usize]); 6] = [
        (4, 2, 1, 2, &[2, 2]),
        (6, 3, 1, 2, &[3, 2, 1]),
        (5, 3, 2, 2, &[4, 3, 3]),
        (10, 4, 3, 3, &[9, 8, 7, 6]),
        (12, 5, 4, 4, &[12, 10, 10, 9, 7]),
        (20, 6, 3, 5, &[12, 11, 10, 10, 9, 8]),
    ];
    let mut worst_exact: f64 = 0.0;
    for (n, m, delta, k, profile) in exact_cases {
        assert_eq!(profile.len(), m);
        let pairing = pairing_law(profile, k * delta).unwrap();
        let cond = conditioned_binomial_law(profile, k as f64 / n as f64, k * delta).unwrap();
        worst_exact = worst_exact.max(total_variation(&pairing, &cond));
    }
    let mut worst_empirical: f64 = 0.0;
    let sampled = [(4, 2, 1, 2, vec![2, 2]), (6, 3, 1, 2, vec![2, 2, 2])];
    for (i, (n, m, delta, k, profile)) in sampled.into_iter().enumerate() {
        let r = verify_degree_conditioning(&DegreeConditioningConfig {
            n,
            m,
            delta,
            k,
            profile,
            samples: ELEMMA_SAMPLES,
            seed: SEED + i as u64,
            max_attempts: None,
        })
        .unwrap();
        worst_exact = worst_exact.max(r.tv_exact);
        worst_empirical = worst_empirical.max(r.tv_empirical_pairing.unwrap()).max(r.tv_empirical_conditioned.unwrap());
    }
    outcome(
        worst_exact <= ELEMMA_EXACT_TV && worst_empirical <= ELEMMA_EMPIRICAL_TV,
        format!("max exact TV {worst_exact:.2e}, max sampled TV {worst_empirical:.4}, {:.1?}", start.elapsed()),
    )
}

fn uniqueness() -> Outcome {
    let cfg = ExperimentConfig::new(UNIQUE_N, InfectedSpec::Theta(UNIQUE_THETA), TestsSpec::RatioInf(UNIQUE_RATIO))
        .with_decoders(vec![DecoderSpec::exact()])
        .with_trials(UNIQUE_TRIALS)
        .with_seed(SEED);
    let resolved = cfg.resolve().unwrap();
    let mut unique = 0;
    let mut refused = 0;
    let mut wrong = 0;
    for t in 0..UNIQUE_TRIALS {
        let (_, inst) = trial_instance(&resolved, &cfg, t).unwrap();
        match enumerate_satisfying(&inst.design, &inst.outcomes, &inst.sigma, DEFAULT_ENUMERATION_CAP) {
            Ok(s) if s.z_total == 1 => {
                unique += 1;
                let r = decode_exact(&inst.design, &inst.outcomes, ExactOptions::weight_k(resolved.k)).unwrap();
                let recovered = r.status == ExactStatus::UniqueK
                    && r.witness.as_ref().is_some_and(|w| w.bits == inst.sigma.bits());
                if !recovered {
                    wrong += 1;
                }
            }
            Ok(_) => {}
            Err(_) => refused += 1,
        }
    }
    let fraction = unique as f64 / UNIQUE_TRIALS as f64;
    outcome(
        fraction >= UNIQUE_MIN_FRACTION && wrong == 0,
        format!(
            "k = {}, m = {}: z_total = 1 in {unique}/{UNIQUE_TRIALS}, {refused} over the cap, {wrong} wrong exact decodes",
            resolved.k, resolved.m
        ),
    )
}

fn outputs_with_workers(workers: &str) -> (Vec<u8>, Vec<u8>) {
    std::env::set_var(WORKERS_ENV, workers);
    let base = regime(2_000, SIGMOID_THETA, TestsSpec::RatioAlg(1.0), 40, SEED)
        .with_decoders(vec![DecoderSpec::Comp, DecoderSpec::Dd, DecoderSpec::Scomp, DecoderSpec::exact()]);
    let cells = sweep_with_records(&SweepConfig { base, tests: vec![TestsSpec::RatioAlg(0.8), TestsSpec::RatioAlg(1.2)] }).unwrap();
    std::env::remove_var(WORKERS_ENV);
    let rows: Vec<SweepRow> = cells.iter().map(|(r, _)| r.clone()).collect();
    let records: Vec<_> = cells.into_iter().flat_map(|(_, r)| r).collect();
    let (mut csv, mut jsonl) = (Vec::new(), Vec::new());
    write_sweep_csv(&rows, &mut csv).unwrap();
    write_jsonl(&records, &mut jsonl).unwrap();
    (csv, jsonl)
}

fn determinism() -> Outcome {
    let reference = outputs_with_workers("1");
    let mut identical = true;
    for workers in ["2", "4", "7"] {
        identical &= outputs_with_workers(workers) == reference;
    }
    outcome(
        identical,
        format!("GT_WORKERS in {{1, 2, 4, 7}}: {} CSV bytes, {} JSONL bytes", reference.0.len(), reference.1.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("fig1-golden", fig1_golden),
        ("decoder-soundness", soundness),
        ("oracle-equivalence", oracle_equivalence),
        ("threshold-sigmoid", sigmoid),
        ("concentration", concentration),
        ("v1mm-transition", transition),
        ("elemma-exactness", elemma),
        ("uniqueness-regime", uniqueness),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let o = run();
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
