//! Ground truth, the OR channel and the structural vertex classes.

use serde::{Deserialize, Serialize};

use crate::design::PoolingDesign;
use crate::error::{param, Error, Result};
use crate::rng::RandomStream;

/// Infection status of every individual.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InfectionVector {
    bits: Vec<bool>,
    k: usize,
}

impl InfectionVector {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        let k = bits.iter().filter(|&&b| b).count();
        Self { bits, k }
    }

    /// Weight-`|infected|` vector of length `n`. Indices must be distinct and `< n`.
    pub fn from_indices(n: usize, infected: &[usize]) -> Result<Self> {
        let mut bits = vec![false; n];
        for &i in infected {
            if i >= n {
                return param(format!("infected index {i} out of range for n = {n}"));
            }
            if bits[i] {
                return param(format!("infected index {i} listed twice"));
            }
            bits[i] = true;
        }
        Ok(Self { bits, k: infected.len() })
    }

    pub fn zeros(n: usize) -> Self {
        Self { bits: vec![false; n], k: 0 }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Hamming weight.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn is_infected(&self, i: usize) -> bool {
        self.bits[i]
    }

    /// Infected indices, ascending.
    pub fn infected(&self) -> Vec<usize> {
        indices(&self.bits)
    }

    /// Swap the status of a healthy and an infected individual.
    pub fn flipped(&self, healthy: usize, infected: usize) -> Result<Self> {
        if self.bits[healthy] || !self.bits[infected] {
            return param("flip needs one healthy and one infected individual");
        }
        let mut bits = self.bits.clone();
        bits[healthy] = true;
        bits[infected] = false;
        Ok(Self { bits, k: self.k })
    }
}

/// Test results; `true` is a positive test.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OutcomeVector {
    bits: Vec<bool>,
}

impl OutcomeVector {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_positive(&self, j: usize) -> bool {
        self.bits[j]
    }

    pub fn positives(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

pub(crate) fn indices(bits: &[bool]) -> Vec<usize> {
    bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
}

/// Uniformly random weight-`k` infection vector of length `n`.
pub fn sample_infection(n: usize, k: usize, stream: &mut RandomStream) -> Result<InfectionVector> {
    if k > n {
        return param(format!("k = {k} exceeds n = {n}"));
    }
    let mut bits = vec![false; n];
    for i in rand::seq::index::sample(stream, n, k) {
        bits[i] = true;
    }
    Ok(InfectionVector { bits, k })
}

/// `round(n^theta)`, at least 1 and at most `n`.
pub fn infected_count_from_theta(n: usize, theta: f64) -> Result<usize> {
    infected_count_scaled(n, theta, 1.0)
}

/// `round(scale * n^theta)`, clamped into `1..=n`.
pub fn infected_count_scaled(n: usize, theta: f64, scale: f64) -> Result<usize> {
    if !(theta > 0.0 && theta < 1.0) {
        return param(format!("theta = {theta} must lie in (0, 1)"));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return param(format!("scale = {scale} must be positive"));
    }
    if n == 0 {
        return param("n must be at least 1");
    }
    let k = (scale * (n as f64).powf(theta)).round() as usize;
    Ok(k.clamp(1, n))
}

fn check_sigma(design: &PoolingDesign, sigma: &InfectionVector) -> Result<()> {
    if sigma.len() != design.n() {
        return param(format!(
            "infection vector has length {}, design has n = {}",
            sigma.len(),
            design.n()
        ));
    }
    Ok(())
}

fn check_outcomes(design: &PoolingDesign, outcomes: &OutcomeVector) -> Result<()> {
    if outcomes.len() != design.m() {
        return param(format!(
            "outcome vector has length {}, design has m = {}",
            outcomes.len(),
            design.m()
        ));
    }
    Ok(())
}

pub(crate) fn check_dims(design: &PoolingDesign, outcomes: &OutcomeVector) -> Result<()> {
    check_outcomes(design, outcomes)
}

/// Apply the OR channel: a test is positive iff it contains an infected individual.
pub fn encode(design: &PoolingDesign, sigma: &InfectionVector) -> Result<OutcomeVector> {
    check_sigma(design, sigma)?;
    Ok(encode_bits(design, sigma.bits()))
}

pub(crate) fn encode_bits(design: &PoolingDesign, bits: &[bool]) -> OutcomeVector {
    let out = design.tests().iter().map(|t| t.iter().any(|&i| bits[i])).collect();
    OutcomeVector { bits: out }
}

/// Edge counts between the tests and the infected set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeStats {
    /// Negative tests.
    pub m0: usize,
    /// Positive tests.
    pub m1: usize,
    /// `y[j]`: edges from test `j` to infected individuals, with multiplicity.
    pub y: Vec<usize>,
    /// Tests with exactly one infected edge.
    pub w: usize,
}

pub fn outcome_stats(design: &PoolingDesign, sigma: &InfectionVector) -> Result<OutcomeStats> {
    check_sigma(design, sigma)?;
    let y: Vec<usize> = design
        .tests()
        .iter()
        .map(|t| t.iter().filter(|&&i| sigma.is_infected(i)).count())
        .collect();
    let m1 = y.iter().filter(|&&c| c > 0).count();
    let w = y.iter().filter(|&&c| c == 1).count();
    Ok(OutcomeStats { m0: design.m() - m1, m1, y, w })
}

/// The vertex classes used throughout the analysis. Members are ascending 0-based indices.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassificationSets {
    /// Healthy individuals all of whose tests are positive.
    pub v0_plus: Vec<usize>,
    /// Healthy individuals with at least one negative test.
    pub v0_minus: Vec<usize>,
    /// Infected individuals every test of which contains another infected individual.
    pub v1_plus: Vec<usize>,
    /// Infected individuals with a test whose other participants all lie in `v0_minus`.
    pub v1_minus_minus: Vec<usize>,
    /// Members of `v0_plus` whose tests are pairwise distinct (`Δ` distinct tests in a regular design).
    pub v0_plus_delta: Vec<usize>,
}

/// Per-individual flag: appears in at least one negative test.
pub(crate) fn in_negative_test(design: &PoolingDesign, outcomes: &OutcomeVector) -> Vec<bool> {
    let mut flag = vec![false; design.n()];
    for (j, t) in design.tests().iter().enumerate() {
        if !outcomes.is_positive(j) {
            for &i in t {
                flag[i] = true;
            }
        }
    }
    flag
}

/// Compute the five classes. `outcomes` is checked against `encode(design, sigma)`.
pub fn classify_sets(
    design: &PoolingDesign,
    sigma: &InfectionVector,
    outcomes: &OutcomeVector,
) -> Result<ClassificationSets> {
    check_sigma(design, sigma)?;
    check_outcomes(design, outcomes)?;
    if encode_bits(design, sigma.bits()) != *outcomes {
        return Err(Error::Consistency("outcomes do not match encode(design, sigma)".into()));
    }

    let negative = in_negative_test(design, outcomes);
    // distinct infected participants, and distinct participants outside V0-, per test
    let mut infected_in = vec![0usize; design.m()];
    let mut undetermined_in = vec![0usize; design.m()];
    for j in 0..design.m() {
        for i in design.test_support(j) {
            if sigma.is_infected(i) {
                infected_in[j] += 1;
            }
            if !negative[i] {
                undetermined_in[j] += 1;
            }
        }
    }

    let mut sets = ClassificationSets::default();
    for (i, &in_negative) in negative.iter().enumerate() {
        let tests = design.distinct_tests(i);
        if sigma.is_infected(i) {
            if tests.iter().all(|&a| infected_in[a] >= 2) {
                sets.v1_plus.push(i);
            }
            // i itself is outside V0-; it is the only such participant
            if tests.iter().any(|&a| undetermined_in[a] == 1) {
                sets.v1_minus_minus.push(i);
            }
        } else if in_negative {
            sets.v0_minus.push(i);
        } else {
            sets.v0_plus.push(i);
            let full = match design.kind().delta() {
                Some(delta) => tests.len() == delta,
                None => tests.len() == design.assignments()[i].len(),
            };
            if full {
                sets.v0_plus_delta.push(i);
            }
        }
    }
    Ok(sets)
}
