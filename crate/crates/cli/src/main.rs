use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use grouptest::decoders::{enumerate_satisfying, TieRule, DEFAULT_ENUMERATION_CAP};
use grouptest::harness::{
    run_trials, sweep_with_records, trial_instance, verify_concentration, verify_degree_conditioning, verify_fig1,
    write_jsonl, write_rate_curves_csv, write_sweep_csv, ConcentrationCheck, ConcentrationConfig, DecoderSpec,
    DegreeConditioningConfig, DeltaSpec, DesignChoice, ExperimentConfig, InfectedSpec, SweepConfig, SweepRow,
    TestsSpec, VerificationReport,
};
use grouptest::instance::{self, Instance};
use grouptest::theory::{default_theta_grid, optimal_delta, predictions, rate_curves, thresholds_for, theta_of};
use grouptest::Error;
use serde_json::{json, Map, Value};

const EXIT_USAGE: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_VERIFY_FAILED: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "gt", version, about = "Non-adaptive group testing: simulation, decoding and thresholds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run seeded trials and write one JSON record per trial and decoder.
    Simulate(SimulateArgs),
    /// Run a grid of test counts and write the aggregated CSV.
    Sweep(SweepArgs),
    /// Print thresholds and leading-order predictions as JSON.
    Theory(TheoryArgs),
    /// Write the rate curves as CSV.
    RateCurves(RateCurvesArgs),
    /// Count every consistent weight-k configuration by overlap with the truth.
    Enumerate(EnumerateArgs),
    /// Run a verification check; exits 3 when it fails.
    Verify(VerifyArgs),
    /// Export a generated instance or import and validate one.
    Instance(InstanceArgs),
}

#[derive(Args, Debug, Clone)]
struct PopulationArgs {
    /// Population size.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: Option<u64>,
    /// Sparsity exponent; k = round(n^theta).
    #[arg(long, value_parser = open_unit, conflicts_with = "k")]
    theta: Option<f64>,
    /// Number of infected individuals.
    #[arg(long)]
    k: Option<usize>,
}

impl PopulationArgs {
    fn n(&self) -> Result<usize, CliError> {
        self.n.map(|n| n as usize).ok_or_else(|| CliError::usage("--n is required"))
    }

    fn infected(&self) -> Result<InfectedSpec, CliError> {
        match (self.theta, self.k) {
            (Some(t), None) => Ok(InfectedSpec::Theta(t)),
            (None, Some(k)) => Ok(InfectedSpec::Count(k)),
            _ => Err(CliError::usage("exactly one of --theta or --k is required")),
        }
    }
}

#[derive(Args, Debug, Clone)]
struct SingleTestsArgs {
    /// Number of tests.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), group = "tests")]
    m: Option<u64>,
    /// m as a multiple of the algorithmic threshold.
    #[arg(long, value_parser = positive, group = "tests")]
    m_ratio_alg: Option<f64>,
    /// m as a multiple of the information-theoretic threshold.
    #[arg(long, value_parser = positive, group = "tests")]
    m_ratio_inf: Option<f64>,
    /// m = c k ln(n/k).
    #[arg(long, value_parser = positive, group = "tests")]
    c: Option<f64>,
}

impl SingleTestsArgs {
    fn spec(&self) -> Option<TestsSpec> {
        if let Some(m) = self.m {
            Some(TestsSpec::Absolute(m as usize))
        } else if let Some(r) = self.m_ratio_alg {
            Some(TestsSpec::RatioAlg(r))
        } else if let Some(r) = self.m_ratio_inf {
            Some(TestsSpec::RatioInf(r))
        } else {
            self.c.map(TestsSpec::C)
        }
    }
}

#[derive(Args, Debug, Clone)]
struct GridTestsArgs {
    /// Test counts, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u64).range(1..), group = "tests")]
    m: Vec<u64>,
    /// Multiples of the algorithmic threshold, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = positive, group = "tests")]
    m_ratio_alg: Vec<f64>,
    /// Multiples of the information-theoretic threshold, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = positive, group = "tests")]
    m_ratio_inf: Vec<f64>,
    /// Values of c in m = c k ln(n/k), comma separated.
    #[arg(long, value_delimiter = ',', value_parser = positive, group = "tests")]
    c: Vec<f64>,
}

impl GridTestsArgs {
    fn specs(&self) -> Vec<TestsSpec> {
        let mut specs: Vec<TestsSpec> = self.m.iter().map(|&m| TestsSpec::Absolute(m as usize)).collect();
        specs.extend(self.m_ratio_alg.iter().map(|&r| TestsSpec::RatioAlg(r)));
        specs.extend(self.m_ratio_inf.iter().map(|&r| TestsSpec::RatioInf(r)));
        specs.extend(self.c.iter().map(|&c| TestsSpec::C(c)));
        specs
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum DesignArg {
    Regular,
    Bernoulli,
}

#[derive(Args, Debug, Clone)]
struct DesignArgs {
    /// Tests per individual.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), conflicts_with = "auto_delta")]
    delta: Option<u64>,
    /// Use delta = ceil((m/k) ln 2); the default.
    #[arg(long)]
    auto_delta: bool,
    #[arg(long, value_enum, default_value = "regular")]
    design: DesignArg,
    /// Inclusion probability of the Bernoulli design; defaults to ln 2 / k.
    #[arg(long, value_parser = open_unit)]
    p: Option<f64>,
}

impl DesignArgs {
    fn delta(&self) -> DeltaSpec {
        self.delta.map_or(DeltaSpec::Auto, |d| DeltaSpec::Absolute(d as usize))
    }

    fn choice(&self) -> Result<DesignChoice, CliError> {
        match self.design {
            DesignArg::Regular if self.p.is_some() => Err(CliError::usage("--p needs --design bernoulli")),
            DesignArg::Regular => Ok(DesignChoice::Regular),
            DesignArg::Bernoulli => Ok(DesignChoice::Bernoulli { p: self.p }),
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum DecoderArg {
    Comp,
    Dd,
    Scomp,
    Exact,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum TieArg {
    Random,
    Lowest,
}

#[derive(Args, Debug, Clone)]
struct SeedArgs {
    /// Master seed; required by every randomized command.
    #[arg(long, conflicts_with = "seed_from_entropy")]
    seed: Option<u64>,
    /// Draw the master seed from the operating system and report it on stderr.
    #[arg(long)]
    seed_from_entropy: bool,
}

impl SeedArgs {
    fn resolve(&self) -> Result<u64, CliError> {
        match self.seed {
            Some(seed) => Ok(seed),
            None if self.seed_from_entropy => {
                let seed: u64 = rand::random();
                eprintln!("seed: {seed}");
                Ok(seed)
            }
            None => Err(CliError::usage("--seed is required (or pass --seed-from-entropy)")),
        }
    }
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    /// Decoders, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "dd")]
    decoder: Vec<DecoderArg>,
    /// SCOMP tie-breaking rule.
    #[arg(long, value_enum, default_value = "random")]
    tie: TieArg,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[command(flatten)]
    seed: SeedArgs,
    /// Worker threads; the GT_WORKERS environment variable takes precedence.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,
    /// Node budget of the exact decoder.
    #[arg(long, default_value_t = DecoderSpec::DEFAULT_EXACT_BUDGET)]
    budget: u64,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    population: PopulationArgs,
    #[command(flatten)]
    tests: SingleTestsArgs,
    #[command(flatten)]
    design: DesignArgs,
    #[command(flatten)]
    run: RunArgs,
    /// Run every trial on this fixed instance instead of generating one.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    population: PopulationArgs,
    #[command(flatten)]
    tests: GridTestsArgs,
    #[command(flatten)]
    design: DesignArgs,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write every trial record as JSON lines to this file.
    #[arg(long)]
    records: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TheoryArgs {
    #[command(flatten)]
    population: PopulationArgs,
    /// Test count for the predictions; defaults to ceil(m_inf).
    #[command(flatten)]
    tests: SingleTestsArgs,
    /// Tests per individual for the predictions; defaults to the optimal value.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    delta: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RateCurvesArgs {
    /// Sparsity exponents, comma separated; defaults to 0.05, 0.06, ..., 0.95.
    #[arg(long, value_delimiter = ',', value_parser = open_unit)]
    theta: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EnumerateArgs {
    /// Instance file; without it an instance is generated from the flags below.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[command(flatten)]
    population: PopulationArgs,
    #[command(flatten)]
    tests: SingleTestsArgs,
    #[command(flatten)]
    design: DesignArgs,
    #[command(flatten)]
    seed: SeedArgs,
    /// Largest admissible C(|V+|, k).
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum CheckArg {
    V0plus,
    M0,
    Gamma,
    W,
    Elemma,
    Fig1,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    check: CheckArg,
    #[command(flatten)]
    population: PopulationArgs,
    /// Tests: --c for concentration checks, --m for elemma.
    #[command(flatten)]
    tests: SingleTestsArgs,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), conflicts_with = "auto_delta")]
    delta: Option<u64>,
    #[arg(long)]
    auto_delta: bool,
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[command(flatten)]
    seed: SeedArgs,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,
    /// Test degree profile for elemma, comma separated; defaults to the most balanced one.
    #[arg(long, value_delimiter = ',')]
    profile: Vec<usize>,
    /// Sampled designs for elemma; 0 runs only the exact comparison.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Instance for fig1; defaults to the bundled example.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct InstanceArgs {
    /// Generate an instance and write it to this file.
    #[arg(long, conflicts_with = "import", required_unless_present = "import")]
    export: Option<PathBuf>,
    /// Read and validate an instance file, then print it.
    #[arg(long)]
    import: Option<PathBuf>,
    #[command(flatten)]
    population: PopulationArgs,
    #[command(flatten)]
    tests: SingleTestsArgs,
    #[command(flatten)]
    design: DesignArgs,
    #[command(flatten)]
    seed: SeedArgs,
    /// Where to print the imported instance.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn open_unit(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not in (0, 1)"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} is not positive"))
    }
}

#[derive(Debug)]
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Infeasible(_) => EXIT_INFEASIBLE,
            _ => EXIT_USAGE,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self { code: EXIT_USAGE, message: e.to_string() }
    }
}

type CliResult = Result<u8, CliError>;

/// Where results go: a file when `--out` is given, stdout otherwise.
struct Sink(Option<PathBuf>);

impl Sink {
    fn bytes(&self, data: &[u8]) -> io::Result<()> {
        match &self.0 {
            Some(path) => fs::write(path, data),
            None => {
                let mut out = io::stdout().lock();
                out.write_all(data)?;
                out.flush()
            }
        }
    }

    /// Pretty-printed to files, compact on stdout.
    fn json(&self, value: &impl serde::Serialize) -> Result<(), CliError> {
        let text = match self.0 {
            Some(_) => serde_json::to_string_pretty(value),
            None => serde_json::to_string(value),
        }
        .map_err(|e| CliError::usage(e.to_string()))?;
        Ok(self.bytes(format!("{text}\n").as_bytes())?)
    }
}

fn decoder_specs(run: &RunArgs) -> Vec<DecoderSpec> {
    let mut specs: Vec<DecoderSpec> = Vec::new();
    for d in &run.decoder {
        let spec = match d {
            DecoderArg::Comp => DecoderSpec::Comp,
            DecoderArg::Dd => DecoderSpec::Dd,
            DecoderArg::Scomp => DecoderSpec::Scomp,
            DecoderArg::Exact => DecoderSpec::Exact { budget: run.budget, count_limit: None },
        };
        if !specs.contains(&spec) {
            specs.push(spec);
        }
    }
    specs
}

fn experiment(
    population: &PopulationArgs,
    tests: TestsSpec,
    design: &DesignArgs,
    run: &RunArgs,
) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::new(population.n()?, population.infected()?, tests);
    cfg.design = design.choice()?;
    cfg.delta = design.delta();
    cfg.decoders = decoder_specs(run);
    cfg.trials = run.trials as usize;
    cfg.master_seed = run.seed.resolve()?;
    cfg.tie_rule = match run.tie {
        TieArg::Random => TieRule::Random,
        TieArg::Lowest => TieRule::LowestIndex,
    };
    cfg.workers = run.workers.map(|w| w as usize);
    Ok(cfg)
}

fn simulate(args: SimulateArgs) -> CliResult {
    let cfg = match &args.instance {
        Some(path) => {
            let mut cfg = ExperimentConfig::from_fixture(Instance::load(path)?);
            let template = experiment_template(&args.run, &args.design)?;
            cfg.decoders = template.decoders;
            cfg.trials = template.trials;
            cfg.master_seed = template.master_seed;
            cfg.tie_rule = template.tie_rule;
            cfg.workers = template.workers;
            cfg
        }
        None => {
            let tests = args.tests.spec().ok_or_else(|| CliError::usage("one of --m, --m-ratio-alg, --m-ratio-inf, --c is required"))?;
            experiment(&args.population, tests, &args.design, &args.run)?
        }
    };
    let resolved = cfg.resolve()?;
    let records = run_trials(&cfg)?;
    let mut buf = Vec::new();
    write_jsonl(&records, &mut buf)?;
    Sink(args.out).bytes(&buf)?;

    let mut troubled = false;
    for spec in &cfg.decoders {
        let kind = spec.kind();
        let mine: Vec<_> = records.iter().filter(|r| r.decoder == kind).collect();
        let row = grouptest::harness::aggregate(&resolved, cfg.master_seed, kind, &mine);
        troubled |= row.timeouts > 0 || row.errors > 0;
        eprintln!("{}", summary_line(&row));
    }
    Ok(if troubled { EXIT_INFEASIBLE } else { 0 })
}

/// Run-level settings shared with a fixture run, where population and tests come from the file.
fn experiment_template(run: &RunArgs, design: &DesignArgs) -> Result<ExperimentConfig, CliError> {
    let population = PopulationArgs { n: Some(1), theta: None, k: Some(0) };
    experiment(&population, TestsSpec::Absolute(1), design, run)
}

fn summary_line(row: &SweepRow) -> String {
    json!({
        "decoder": row.decoder,
        "n": row.n,
        "k": row.k,
        "m": row.m,
        "delta": row.delta,
        "trials": row.trials,
        "successes": row.successes,
        "success_rate": row.success_rate,
        "timeouts": row.timeouts,
        "errors": row.errors,
    })
    .to_string()
}

fn sweep(args: SweepArgs) -> CliResult {
    let tests = args.tests.specs();
    if tests.is_empty() {
        return Err(CliError::usage("one of --m, --m-ratio-alg, --m-ratio-inf, --c is required"));
    }
    let base = experiment(&args.population, tests[0], &args.design, &args.run)?;
    let cells = sweep_with_records(&SweepConfig { base, tests })?;
    let rows: Vec<SweepRow> = cells.iter().map(|(row, _)| row.clone()).collect();
    let mut buf = Vec::new();
    write_sweep_csv(&rows, &mut buf)?;
    Sink(args.out).bytes(&buf)?;
    if let Some(path) = args.records {
        let records: Vec<_> = cells.into_iter().flat_map(|(_, r)| r).collect();
        write_jsonl(&records, fs::File::create(path)?)?;
    }
    let troubled = rows.iter().any(|r| r.timeouts > 0 || r.errors > 0);
    Ok(if troubled { EXIT_INFEASIBLE } else { 0 })
}

fn merge(target: &mut Map<String, Value>, value: Value) {
    if let Value::Object(map) = value {
        target.extend(map);
    }
}

fn theory(args: TheoryArgs) -> CliResult {
    let n = args.population.n()?;
    let (k, theta) = match args.population.infected()? {
        InfectedSpec::Theta(t) => (grouptest::model::infected_count_from_theta(n, t)?, t),
        InfectedSpec::Count(k) => (k, theta_of(n, k)?),
    };
    let t = thresholds_for(n, k, theta)?;
    let m = match args.tests.spec() {
        Some(spec) => grouptest::harness::resolve_tests(n, k, Some(theta), spec)?,
        None => t.m_inf.ceil() as usize,
    };
    let delta_opt = optimal_delta(m, k)?;
    let delta = args.delta.map_or(delta_opt, |d| d as usize);
    let p = predictions(n, k, m, delta)?;

    let mut out = Map::new();
    merge(&mut out, serde_json::to_value(t).map_err(|e| CliError::usage(e.to_string()))?);
    out.insert("m".into(), json!(m));
    out.insert("delta_opt".into(), json!(delta_opt));
    out.insert("delta".into(), json!(delta));
    merge(&mut out, serde_json::to_value(p).map_err(|e| CliError::usage(e.to_string()))?);
    Sink(args.out).json(&Value::Object(out))?;
    Ok(0)
}

fn rate_curves_cmd(args: RateCurvesArgs) -> CliResult {
    let grid = if args.theta.is_empty() { default_theta_grid() } else { args.theta };
    let points = rate_curves(&grid)?;
    let mut buf = Vec::new();
    write_rate_curves_csv(&points, &mut buf)?;
    Sink(args.out).bytes(&buf)?;
    Ok(0)
}

/// A single generated instance, drawn exactly as trial 0 of a run with this seed.
fn generated_instance(
    population: &PopulationArgs,
    tests: &SingleTestsArgs,
    design: &DesignArgs,
    seed: &SeedArgs,
) -> Result<Instance, CliError> {
    let spec = tests.spec().ok_or_else(|| CliError::usage("one of --m, --m-ratio-alg, --m-ratio-inf, --c is required"))?;
    let mut cfg = ExperimentConfig::new(population.n()?, population.infected()?, spec);
    cfg.design = design.choice()?;
    cfg.delta = design.delta();
    cfg.master_seed = seed.resolve()?;
    let resolved = cfg.resolve()?;
    Ok(trial_instance(&resolved, &cfg, 0)?.1)
}

fn enumerate(args: EnumerateArgs) -> CliResult {
    let inst = match &args.instance {
        Some(path) => Instance::load(path)?,
        None => generated_instance(&args.population, &args.tests, &args.design, &args.seed)?,
    };
    let spectrum = enumerate_satisfying(&inst.design, &inst.outcomes, &inst.sigma, args.cap)?;
    Sink(args.out).json(&spectrum)?;
    Ok(0)
}

fn balanced_profile(total: usize, m: usize) -> Vec<usize> {
    (0..m).map(|j| total / m + usize::from(j < total % m)).collect()
}

fn verify(args: VerifyArgs) -> CliResult {
    let report: VerificationReport = match args.check {
        CheckArg::Fig1 => {
            let inst = match &args.instance {
                Some(path) => Instance::load(path)?,
                None => instance::fig1(),
            };
            verify_fig1(&inst)?
        }
        CheckArg::Elemma => {
            let n = args.population.n()?;
            let k = args.population.k.ok_or_else(|| CliError::usage("--k is required for elemma"))?;
            let m = args.tests.m.ok_or_else(|| CliError::usage("--m is required for elemma"))? as usize;
            let delta = args.delta.unwrap_or(1) as usize;
            let profile = if args.profile.is_empty() { balanced_profile(n * delta, m) } else { args.profile.clone() };
            let seed = if args.samples > 0 { args.seed.resolve()? } else { args.seed.seed.unwrap_or(0) };
            let cfg = DegreeConditioningConfig { n, m, delta, k, profile, samples: args.samples, seed, max_attempts: None };
            verify_degree_conditioning(&cfg)?.to_verification()
        }
        check => {
            let check = match check {
                CheckArg::V0plus => ConcentrationCheck::V0Plus,
                CheckArg::M0 => ConcentrationCheck::M0,
                CheckArg::Gamma => ConcentrationCheck::Gamma,
                _ => ConcentrationCheck::W,
            };
            let n = args.population.n()?;
            let theta = args.population.theta.ok_or_else(|| CliError::usage("--theta is required"))?;
            let c = args.tests.c.ok_or_else(|| CliError::usage("--c is required"))?;
            let mut cfg = ConcentrationConfig::new(check, n, theta, c, args.trials as usize, args.seed.resolve()?);
            cfg.delta = args.delta.map_or(DeltaSpec::Auto, |d| DeltaSpec::Absolute(d as usize));
            cfg.workers = args.workers.map(|w| w as usize);
            verify_concentration(&cfg)?
        }
    };
    Sink(args.out).json(&report)?;
    Ok(if report.pass { 0 } else { EXIT_VERIFY_FAILED })
}

fn instance_cmd(args: InstanceArgs) -> CliResult {
    if let Some(path) = &args.import {
        let inst = Instance::load(path)?;
        let text = inst.to_json(args.out.is_some())?;
        Sink(args.out).bytes(format!("{text}\n").as_bytes())?;
        return Ok(0);
    }
    let path = args.export.as_ref().expect("clap enforces --export or --import");
    let inst = generated_instance(&args.population, &args.tests, &args.design, &args.seed)?;
    inst.save(path)?;
    Ok(0)
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
        Command::Theory(a) => theory(a),
        Command::RateCurves(a) => rate_curves_cmd(a),
        Command::Enumerate(a) => enumerate(a),
        Command::Verify(a) => verify(a),
        Command::Instance(a) => instance_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            if e.code == EXIT_USAGE {
                eprintln!("run `gt --help` for usage");
            }
            ExitCode::from(e.code)
        }
    }
}
