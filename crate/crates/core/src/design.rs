//! Pooling designs: which individuals take part in which tests.
//!
//! Individuals and tests are 0-based throughout; test `a_1` of the usual
//! notation is index `0` here.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::rng::{Purpose, RandomStream};

/// How individuals are assigned to tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum DesignKind {
    /// Every individual draws `delta` tests uniformly at random with replacement.
    Regular { delta: usize },
    /// Every (individual, test) pair is included independently with probability `p`.
    Bernoulli { p: f64 },
}

impl DesignKind {
    pub fn name(&self) -> &'static str {
        match self {
            DesignKind::Regular { .. } => "regular",
            DesignKind::Bernoulli { .. } => "bernoulli",
        }
    }

    pub fn delta(&self) -> Option<usize> {
        match *self {
            DesignKind::Regular { delta } => Some(delta),
            DesignKind::Bernoulli { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignParams {
    pub n: usize,
    pub m: usize,
    #[serde(flatten)]
    pub kind: DesignKind,
    pub seed: u64,
}

impl DesignParams {
    pub fn regular(n: usize, m: usize, delta: usize, seed: u64) -> Self {
        Self { n, m, kind: DesignKind::Regular { delta }, seed }
    }

    pub fn bernoulli(n: usize, m: usize, p: f64, seed: u64) -> Self {
        Self { n, m, kind: DesignKind::Bernoulli { p }, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return param("population size n must be at least 1");
        }
        if self.m == 0 {
            return param("number of tests m must be at least 1");
        }
        match self.kind {
            DesignKind::Regular { delta } => {
                if delta == 0 {
                    return param("tests per individual delta must be at least 1");
                }
            }
            DesignKind::Bernoulli { p } => {
                if !(p > 0.0 && p < 1.0) {
                    return param(format!("inclusion probability p = {p} must lie in (0, 1)"));
                }
            }
        }
        Ok(())
    }
}

/// A bipartite multigraph between `n` individuals and `m` tests.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolingDesign {
    params: DesignParams,
    assignments: Vec<Vec<usize>>,
    tests: Vec<Vec<usize>>,
    gamma: Vec<usize>,
}

impl PoolingDesign {
    /// Build a design from explicit per-individual test lists.
    ///
    /// Repeated test indices are kept as multi-edges. For regular designs every
    /// list must have length `delta`.
    pub fn from_assignments(params: DesignParams, assignments: Vec<Vec<usize>>) -> Result<Self> {
        params.validate()?;
        if assignments.len() != params.n {
            return param(format!(
                "expected {} assignment lists, got {}",
                params.n,
                assignments.len()
            ));
        }
        let mut tests = vec![Vec::new(); params.m];
        for (i, list) in assignments.iter().enumerate() {
            if let DesignKind::Regular { delta } = params.kind {
                if list.len() != delta {
                    return param(format!(
                        "individual {i} has {} tests, regular design requires {delta}",
                        list.len()
                    ));
                }
            }
            for &j in list {
                if j >= params.m {
                    return param(format!("individual {i} assigned to test {j}, but m = {}", params.m));
                }
                tests[j].push(i);
            }
        }
        if let DesignKind::Bernoulli { .. } = params.kind {
            for (i, list) in assignments.iter().enumerate() {
                let mut sorted = list.clone();
                sorted.sort_unstable();
                if sorted.windows(2).any(|w| w[0] == w[1]) {
                    return param(format!("Bernoulli design has a repeated test for individual {i}"));
                }
            }
        }
        let gamma = tests.iter().map(Vec::len).collect();
        Ok(Self { params, assignments, tests, gamma })
    }

    pub fn params(&self) -> &DesignParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn m(&self) -> usize {
        self.params.m
    }

    pub fn kind(&self) -> DesignKind {
        self.params.kind
    }

    /// Test list of every individual, in draw order, repeats included.
    pub fn assignments(&self) -> &[Vec<usize>] {
        &self.assignments
    }

    /// Participants of every test, ascending, repeats included.
    pub fn tests(&self) -> &[Vec<usize>] {
        &self.tests
    }

    /// Test degrees counted with edge multiplicity.
    pub fn gamma(&self) -> &[usize] {
        &self.gamma
    }

    pub fn edge_count(&self) -> usize {
        self.gamma.iter().sum()
    }

    /// Distinct participants of test `j`, ascending.
    pub fn test_support(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        dedup_sorted(&self.tests[j])
    }

    /// Distinct tests of individual `i`, ascending.
    pub fn distinct_tests(&self, i: usize) -> Vec<usize> {
        let mut list = self.assignments[i].clone();
        list.sort_unstable();
        list.dedup();
        list
    }
}

pub(crate) fn dedup_sorted(list: &[usize]) -> impl Iterator<Item = usize> + '_ {
    list.iter()
        .enumerate()
        .filter(move |&(p, v)| p == 0 || list[p - 1] != *v)
        .map(|(_, &v)| v)
}

/// Draw a regular design: `delta` independent uniform tests per individual.
pub fn generate_regular_design(params: DesignParams, stream: &mut RandomStream) -> Result<PoolingDesign> {
    params.validate()?;
    let delta = match params.kind {
        DesignKind::Regular { delta } => delta,
        DesignKind::Bernoulli { .. } => return param("generate_regular_design called with a Bernoulli design"),
    };
    let assignments = (0..params.n)
        .map(|_| (0..delta).map(|_| stream.below(params.m)).collect())
        .collect();
    PoolingDesign::from_assignments(params, assignments)
}

/// Draw a Bernoulli design: each pair independently with probability `p`.
pub fn generate_bernoulli_design(params: DesignParams, stream: &mut RandomStream) -> Result<PoolingDesign> {
    params.validate()?;
    let p = match params.kind {
        DesignKind::Bernoulli { p } => p,
        DesignKind::Regular { .. } => return param("generate_bernoulli_design called with a regular design"),
    };
    let assignments = (0..params.n)
        .map(|_| (0..params.m).filter(|_| stream.bernoulli(p)).collect())
        .collect();
    PoolingDesign::from_assignments(params, assignments)
}

/// Draw a design of either kind from the stream keyed by `params.seed`.
pub fn generate(params: DesignParams) -> Result<PoolingDesign> {
    let mut stream = RandomStream::new(params.seed, Purpose::Design, 0);
    generate_with(params, &mut stream)
}

pub fn generate_with(params: DesignParams, stream: &mut RandomStream) -> Result<PoolingDesign> {
    match params.kind {
        DesignKind::Regular { .. } => generate_regular_design(params, stream),
        DesignKind::Bernoulli { .. } => generate_bernoulli_design(params, stream),
    }
}

/// Default Bernoulli inclusion probability `ln 2 / k`.
pub fn default_bernoulli_p(k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Parameter("default Bernoulli p needs k >= 1".into()));
    }
    Ok(std::f64::consts::LN_2 / k as f64)
}

/// Degree statistics together with the concentration band `Δn/m ± sqrt(Δn/m)·ln n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeStats {
    pub gamma_min: usize,
    pub gamma_max: usize,
    pub gamma_mean: f64,
    pub predicted_center: f64,
    pub predicted_halfwidth: f64,
    pub within_lemma_bounds: bool,
}

/// For Bernoulli designs the band is centred on the mean edge count per test.
pub fn degree_stats(design: &PoolingDesign) -> DegreeStats {
    let gamma = design.gamma();
    let gamma_min = gamma.iter().copied().min().unwrap_or(0);
    let gamma_max = gamma.iter().copied().max().unwrap_or(0);
    let gamma_mean = design.edge_count() as f64 / design.m() as f64;
    let n = design.n() as f64;
    let per_individual = match design.kind() {
        DesignKind::Regular { delta } => delta as f64,
        DesignKind::Bernoulli { p } => p * design.m() as f64,
    };
    let predicted_center = per_individual * n / design.m() as f64;
    let predicted_halfwidth = predicted_center.sqrt() * n.ln();
    let within_lemma_bounds = predicted_center - predicted_halfwidth <= gamma_min as f64
        && gamma_max as f64 <= predicted_center + predicted_halfwidth;
    DegreeStats {
        gamma_min,
        gamma_max,
        gamma_mean,
        predicted_center,
        predicted_halfwidth,
        within_lemma_bounds,
    }
}
