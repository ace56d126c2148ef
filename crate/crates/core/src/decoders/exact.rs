//! Exact decoding through hypergraph vertex cover.
//!
//! Individuals that never appear in a negative test form the vertex set; every
//! positive test contributes the hyperedge of its candidate participants. A
//! configuration is consistent with the outcomes iff its infected set lies
//! inside the candidates and hits every hyperedge.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{DecoderKind, Estimate, StageLabel};
use crate::design::PoolingDesign;
use crate::error::{param, Error, Result};
use crate::model::{check_dims, encode_bits, in_negative_test, InfectionVector, OutcomeVector};

/// Largest `C(|V+|, k)` that [`enumerate_satisfying`] accepts by default.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

/// The vertex cover instance behind a design and its outcomes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateHypergraph {
    /// Global indices of the potentially infected individuals, ascending.
    pub candidates: Vec<usize>,
    /// Hyperedges as sorted local vertex indices. Identical edges are merged.
    pub edges: Vec<Vec<usize>>,
    /// Local vertex -> incident edges.
    pub incidence: Vec<Vec<usize>>,
}

impl CandidateHypergraph {
    pub fn vertex_count(&self) -> usize {
        self.candidates.len()
    }

    /// Whether the local vertex set `chosen` meets every edge.
    pub fn is_cover(&self, chosen: &[usize]) -> bool {
        let mut mark = vec![false; self.vertex_count()];
        for &v in chosen {
            mark[v] = true;
        }
        self.edges.iter().all(|e| e.iter().any(|&v| mark[v]))
    }
}

/// Build the candidate hypergraph. Fails if a positive test has no candidate,
/// i.e. the outcomes are not explained by any configuration.
pub fn candidate_hypergraph(design: &PoolingDesign, outcomes: &OutcomeVector) -> Result<CandidateHypergraph> {
    check_dims(design, outcomes)?;
    let negative = in_negative_test(design, outcomes);
    let mut local = vec![usize::MAX; design.n()];
    let mut candidates = Vec::new();
    for i in (0..design.n()).filter(|&i| !negative[i]) {
        local[i] = candidates.len();
        candidates.push(i);
    }
    let mut edges: Vec<Vec<usize>> = Vec::new();
    for j in (0..design.m()).filter(|&j| outcomes.is_positive(j)) {
        let e: Vec<usize> = design.test_support(j).filter(|&i| !negative[i]).map(|i| local[i]).collect();
        if e.is_empty() {
            return Err(Error::Consistency(format!(
                "positive test {j} contains only individuals from negative tests"
            )));
        }
        edges.push(e);
    }
    edges.sort();
    edges.dedup();
    let mut incidence = vec![Vec::new(); candidates.len()];
    for (id, e) in edges.iter().enumerate() {
        for &v in e {
            incidence[v].push(id);
        }
    }
    Ok(CandidateHypergraph { candidates, edges, incidence })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactMode {
    /// Count the weight-`k` consistent configurations.
    ExactWeightK,
    /// Find a minimum-weight consistent configuration.
    MinWeight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactOptions {
    pub mode: ExactMode,
    pub k: Option<usize>,
    /// Search-node limit shared by all phases of one call.
    pub budget: u64,
    /// Stop counting weight-`k` configurations once this many are found.
    pub count_limit: Option<u64>,
}

impl ExactOptions {
    pub fn weight_k(k: usize) -> Self {
        Self { mode: ExactMode::ExactWeightK, k: Some(k), budget: 10_000_000, count_limit: None }
    }

    pub fn min_weight(k: Option<usize>) -> Self {
        Self { mode: ExactMode::MinWeight, k, budget: 10_000_000, count_limit: None }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_count_limit(mut self, limit: u64) -> Self {
        self.count_limit = Some(limit);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactStatus {
    UniqueK,
    AmbiguousK,
    SmallerWeightExists,
    /// No consistent configuration of the requested weight exists.
    NoWeightK,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactResult {
    pub status: ExactStatus,
    #[serde(flatten)]
    pub witness: Option<Estimate>,
    /// Number of weight-`k` consistent configurations (a lower bound unless `z_k_complete`).
    pub z_k: Option<u64>,
    pub z_k_complete: bool,
    pub min_weight: Option<usize>,
    pub nodes: u64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Vertex {
    Free,
    In,
    Out,
}

struct Search<'a> {
    g: &'a CandidateHypergraph,
    hits: Vec<u32>,
    state: Vec<Vertex>,
    included: Vec<usize>,
    uncovered: usize,
    nodes: u64,
    budget: u64,
    exhausted: bool,
    // overlap bookkeeping for counting
    truth: Vec<bool>,
    free_true: usize,
    free_false: usize,
    included_true: usize,
    // scratch for the packing bound
    seen: Vec<u64>,
    stamp: u64,
}

impl<'a> Search<'a> {
    fn new(g: &'a CandidateHypergraph, budget: u64, truth: Vec<bool>) -> Self {
        let free_true = truth.iter().filter(|&&t| t).count();
        Self {
            g,
            hits: vec![0; g.edges.len()],
            state: vec![Vertex::Free; g.vertex_count()],
            included: Vec::new(),
            uncovered: g.edges.len(),
            nodes: 0,
            budget,
            exhausted: false,
            free_false: truth.len() - free_true,
            free_true,
            truth,
            included_true: 0,
            seen: vec![0; g.vertex_count()],
            stamp: 0,
        }
    }

    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
        }
        self.exhausted
    }

    fn leave_free(&mut self, v: usize) {
        if self.truth[v] {
            self.free_true -= 1;
        } else {
            self.free_false -= 1;
        }
    }

    fn enter_free(&mut self, v: usize) {
        if self.truth[v] {
            self.free_true += 1;
        } else {
            self.free_false += 1;
        }
    }

    fn include(&mut self, v: usize) {
        self.leave_free(v);
        self.state[v] = Vertex::In;
        self.included.push(v);
        self.included_true += self.truth[v] as usize;
        for &e in &self.g.incidence[v] {
            self.hits[e] += 1;
            if self.hits[e] == 1 {
                self.uncovered -= 1;
            }
        }
    }

    fn uninclude(&mut self, v: usize) {
        for &e in &self.g.incidence[v] {
            self.hits[e] -= 1;
            if self.hits[e] == 0 {
                self.uncovered += 1;
            }
        }
        self.included_true -= self.truth[v] as usize;
        self.included.pop();
        self.state[v] = Vertex::Free;
        self.enter_free(v);
    }

    fn exclude(&mut self, v: usize) {
        self.leave_free(v);
        self.state[v] = Vertex::Out;
    }

    fn unexclude(&mut self, v: usize) {
        self.state[v] = Vertex::Free;
        self.enter_free(v);
    }

    fn free_in(&self, e: usize) -> impl Iterator<Item = usize> + '_ {
        self.g.edges[e].iter().copied().filter(|&v| self.state[v] == Vertex::Free)
    }

    /// Uncovered edge with the fewest free vertices, and that count.
    fn tightest_edge(&self) -> Option<(usize, usize)> {
        (0..self.g.edges.len())
            .filter(|&e| self.hits[e] == 0)
            .map(|e| (e, self.free_in(e).count()))
            .min_by_key(|&(e, c)| (c, e))
    }

    /// Size of a greedy packing of pairwise disjoint uncovered edges, a lower
    /// bound on the vertices still needed. `None` if some uncovered edge has no
    /// free vertex left.
    fn packing_bound(&mut self) -> Option<usize> {
        let mut open: Vec<(usize, usize)> = Vec::new();
        for e in (0..self.g.edges.len()).filter(|&e| self.hits[e] == 0) {
            let c = self.free_in(e).count();
            if c == 0 {
                return None;
            }
            open.push((c, e));
        }
        open.sort_unstable();
        self.stamp += 1;
        let stamp = self.stamp;
        let mut packed = 0;
        for &(_, e) in &open {
            let edge = &self.g.edges[e];
            let disjoint = edge
                .iter()
                .all(|&v| self.state[v] != Vertex::Free || self.seen[v] != stamp);
            if disjoint {
                packed += 1;
                for &v in edge {
                    if self.state[v] == Vertex::Free {
                        self.seen[v] = stamp;
                    }
                }
            }
        }
        Some(packed)
    }

    /// Free vertex meeting the most uncovered edges, lowest index on ties.
    fn busiest_free_vertex(&self) -> Option<usize> {
        let mut best: Option<(usize, usize)> = None;
        for v in (0..self.g.vertex_count()).filter(|&v| self.state[v] == Vertex::Free) {
            let deg = self.g.incidence[v].iter().filter(|&&e| self.hits[e] == 0).count();
            if best.is_none_or(|(d, _)| deg > d) {
                best = Some((deg, v));
            }
        }
        best.filter(|&(d, _)| d > 0).map(|(_, v)| v)
    }

    fn min_cover(&mut self, best: &mut Vec<usize>) {
        if self.tick() {
            return;
        }
        if self.uncovered == 0 {
            if self.included.len() < best.len() {
                best.clone_from(&self.included);
            }
            return;
        }
        let Some(bound) = self.packing_bound() else { return };
        if self.included.len() + bound >= best.len() {
            return;
        }
        let forced = match self.tightest_edge() {
            Some((e, 1)) => self.free_in(e).next(),
            _ => None,
        };
        let (v, branch) = match forced {
            Some(v) => (v, false),
            None => match self.busiest_free_vertex() {
                Some(v) => (v, true),
                None => return,
            },
        };
        self.include(v);
        self.min_cover(best);
        self.uninclude(v);
        if branch && !self.exhausted {
            self.exclude(v);
            self.min_cover(best);
            self.unexclude(v);
        }
    }

    /// Count covers of weight exactly `k`, split by overlap with `truth`.
    fn count_covers(&mut self, k: usize, tally: &mut Tally) {
        if tally.full() || self.tick() {
            return;
        }
        let w = self.included.len();
        if w > k {
            return;
        }
        if self.uncovered == 0 {
            let rest = k - w;
            for j in 0..=rest.min(self.free_true) {
                let ways = binomial(self.free_true, j).saturating_mul(binomial(self.free_false, rest - j));
                if ways > 0 {
                    tally.add(self.included_true + j, ways);
                }
            }
            if tally.first.is_none() && tally.total > 0 {
                let mut chosen = self.included.clone();
                chosen.extend(
                    (0..self.g.vertex_count())
                        .filter(|&v| self.state[v] == Vertex::Free)
                        .take(rest),
                );
                chosen.sort_unstable();
                tally.first = Some(chosen);
            }
            return;
        }
        let Some(bound) = self.packing_bound() else { return };
        if w + bound > k {
            return;
        }
        let Some((e, _)) = self.tightest_edge() else { return };
        let branch: Vec<usize> = self.free_in(e).collect();
        let mut excluded = Vec::with_capacity(branch.len());
        // each cover is counted in the branch of its first vertex in `branch`
        for v in branch {
            self.include(v);
            self.count_covers(k, tally);
            self.uninclude(v);
            if tally.full() || self.exhausted {
                break;
            }
            self.exclude(v);
            excluded.push(v);
        }
        for v in excluded.into_iter().rev() {
            self.unexclude(v);
        }
    }
}

struct Tally {
    by_overlap: Vec<u128>,
    total: u128,
    limit: Option<u128>,
    first: Option<Vec<usize>>,
}

impl Tally {
    fn new(k: usize, limit: Option<u64>) -> Self {
        Self { by_overlap: vec![0; k + 1], total: 0, limit: limit.map(u128::from), first: None }
    }

    fn add(&mut self, overlap: usize, ways: u128) {
        self.by_overlap[overlap] = self.by_overlap[overlap].saturating_add(ways);
        self.total = self.total.saturating_add(ways);
    }

    fn full(&self) -> bool {
        self.limit.is_some_and(|l| self.total >= l)
    }
}

/// `C(n, r)` saturating at `u128::MAX`.
pub(crate) fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        // acc * (n - i) / (i + 1) stays integral
        match acc.checked_mul((n - i) as u128) {
            Some(x) => acc = x / (i as u128 + 1),
            None => return u128::MAX,
        }
    }
    acc
}

fn to_u64(x: u128) -> u64 {
    u64::try_from(x).unwrap_or(u64::MAX)
}

fn witness_estimate(
    g: &CandidateHypergraph,
    local: &[usize],
    design: &PoolingDesign,
    outcomes: &OutcomeVector,
) -> Estimate {
    let negative = in_negative_test(design, outcomes);
    let mut bits = vec![false; design.n()];
    for &v in local {
        bits[g.candidates[v]] = true;
    }
    let labels = (0..design.n())
        .map(|i| {
            if bits[i] {
                StageLabel::DefiniteInfected
            } else if negative[i] {
                StageLabel::DefiniteHealthy
            } else {
                StageLabel::DefaultHealthy
            }
        })
        .collect();
    Estimate::new(DecoderKind::Exact, bits, labels, design, outcomes)
}

/// Greedy cover used as the initial incumbent.
fn greedy_cover(g: &CandidateHypergraph) -> Vec<usize> {
    let mut s = Search::new(g, u64::MAX, vec![false; g.vertex_count()]);
    while s.uncovered > 0 {
        match s.busiest_free_vertex() {
            Some(v) => s.include(v),
            None => break,
        }
    }
    s.included
}

/// Exact decoding by branch and bound over the candidate hypergraph.
///
/// Branching picks a forced vertex when an uncovered edge has a single free
/// vertex, otherwise the free vertex meeting the most uncovered edges; the
/// bound is a greedy packing of disjoint uncovered edges. Exhausting
/// `budget` yields [`ExactStatus::Timeout`] with the best cover found so far.
pub fn decode_exact(design: &PoolingDesign, outcomes: &OutcomeVector, options: ExactOptions) -> Result<ExactResult> {
    if options.mode == ExactMode::ExactWeightK && options.k.is_none() {
        return param("exact weight-k decoding needs k");
    }
    let g = candidate_hypergraph(design, outcomes)?;

    let mut search = Search::new(&g, options.budget, vec![false; g.vertex_count()]);
    let mut best = greedy_cover(&g);
    search.min_cover(&mut best);
    let mut nodes = search.nodes;
    let timed_out = search.exhausted;
    let min_weight = best.len();

    let remaining = options.budget.saturating_sub(nodes);
    let count = |target: usize, limit: Option<u64>| {
        let mut s = Search::new(&g, remaining, vec![false; g.vertex_count()]);
        let mut tally = Tally::new(target, limit);
        s.count_covers(target, &mut tally);
        (tally, s.nodes, s.exhausted)
    };

    let mut result = ExactResult {
        status: ExactStatus::Timeout,
        witness: Some(witness_estimate(&g, &best, design, outcomes)),
        z_k: None,
        z_k_complete: false,
        min_weight: Some(min_weight),
        nodes,
    };
    if timed_out {
        return Ok(result);
    }

    let target = match options.mode {
        ExactMode::ExactWeightK => options.k.expect("checked above"),
        ExactMode::MinWeight => match options.k {
            Some(k) if min_weight < k => {
                result.status = ExactStatus::SmallerWeightExists;
                return Ok(result);
            }
            Some(k) => k,
            None => min_weight,
        },
    };
    let limit = match options.mode {
        ExactMode::ExactWeightK => options.count_limit,
        ExactMode::MinWeight => Some(options.count_limit.unwrap_or(2)),
    };

    if target < min_weight {
        result.z_k = Some(0);
        result.z_k_complete = true;
        result.status = ExactStatus::NoWeightK;
        result.witness = None;
        return Ok(result);
    }
    let (tally, used, exhausted) = count(target, limit);
    nodes += used;
    result.nodes = nodes;
    result.z_k = Some(to_u64(tally.total));
    result.z_k_complete = !exhausted && !tally.full();
    if options.mode == ExactMode::ExactWeightK {
        if let Some(first) = &tally.first {
            result.witness = Some(witness_estimate(&g, first, design, outcomes));
        }
    }
    result.status = if exhausted && tally.total < 2 {
        ExactStatus::Timeout
    } else {
        match tally.total {
            0 => ExactStatus::NoWeightK,
            1 => ExactStatus::UniqueK,
            _ => ExactStatus::AmbiguousK,
        }
    };
    if result.status == ExactStatus::NoWeightK {
        result.witness = None;
    }
    Ok(result)
}

/// Histogram of the consistent weight-`k` configurations by overlap with the truth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapSpectrum {
    pub k: usize,
    /// `overlap -> count` for overlaps below `k`, zero entries omitted.
    #[serde(rename = "spectrum")]
    pub counts: BTreeMap<usize, u64>,
    /// All consistent weight-`k` configurations, the truth included.
    pub z_total: u64,
}

impl OverlapSpectrum {
    pub fn count(&self, overlap: usize) -> u64 {
        self.counts.get(&overlap).copied().unwrap_or(0)
    }

    /// Consistent configurations other than the truth.
    pub fn alternatives(&self) -> u64 {
        self.counts.values().sum()
    }
}

/// Count every consistent weight-`k` configuration, `k` being the weight of
/// `sigma_true`, and bin them by overlap with it.
///
/// Refuses with [`Error::Infeasible`] when `C(|V+|, k)` exceeds `cap`.
pub fn enumerate_satisfying(
    design: &PoolingDesign,
    outcomes: &OutcomeVector,
    sigma_true: &InfectionVector,
    cap: u64,
) -> Result<OverlapSpectrum> {
    check_dims(design, outcomes)?;
    if sigma_true.len() != design.n() {
        return param("infection vector length does not match the design");
    }
    if encode_bits(design, sigma_true.bits()) != *outcomes {
        return Err(Error::Consistency("outcomes do not match encode(design, sigma)".into()));
    }
    let g = candidate_hypergraph(design, outcomes)?;
    let k = sigma_true.k();
    let space = binomial(g.vertex_count(), k);
    if space > cap as u128 {
        return Err(Error::Infeasible(format!(
            "C({}, {k}) candidate subsets exceed the enumeration cap {cap}; estimate by sampling instead",
            g.vertex_count()
        )));
    }
    let truth: Vec<bool> = g.candidates.iter().map(|&i| sigma_true.is_infected(i)).collect();
    let mut search = Search::new(&g, u64::MAX, truth);
    let mut tally = Tally::new(k, None);
    search.count_covers(k, &mut tally);
    debug_assert_eq!(tally.by_overlap[k], 1);

    let counts = tally.by_overlap[..k]
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(l, &c)| (l, to_u64(c)))
        .collect();
    Ok(OverlapSpectrum { k, counts, z_total: to_u64(tally.total) })
}
