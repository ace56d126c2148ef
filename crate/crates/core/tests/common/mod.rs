//! Reference implementations written straight from the definitions. They
//! share nothing with the library beyond the `PoolingDesign` accessors.

#![allow(dead_code)]

use grouptest::design::{DesignParams, PoolingDesign};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Outcome of every test under the OR channel, from the raw assignment lists.
pub fn naive_outcomes(design: &PoolingDesign, infected: &[bool]) -> Vec<bool> {
    let mut out = vec![false; design.m()];
    for (i, tests) in design.assignments().iter().enumerate() {
        if infected[i] {
            for &a in tests {
                out[a] = true;
            }
        }
    }
    out
}

/// Distinct members of test `a`.
pub fn members(design: &PoolingDesign, a: usize) -> Vec<usize> {
    (0..design.n()).filter(|&i| design.assignments()[i].contains(&a)).collect()
}

pub struct NaiveClasses {
    pub v0_plus: Vec<usize>,
    pub v0_minus: Vec<usize>,
    pub v1_plus: Vec<usize>,
    pub v1_minus_minus: Vec<usize>,
}

pub fn naive_classes(design: &PoolingDesign, infected: &[bool]) -> NaiveClasses {
    let y = naive_outcomes(design, infected);
    let n = design.n();
    let in_negative: Vec<bool> = (0..n).map(|i| design.assignments()[i].iter().any(|&a| !y[a])).collect();
    let mut c = NaiveClasses { v0_plus: vec![], v0_minus: vec![], v1_plus: vec![], v1_minus_minus: vec![] };
    for i in 0..n {
        let tests = &design.assignments()[i];
        if !infected[i] {
            if in_negative[i] {
                c.v0_minus.push(i);
            } else {
                c.v0_plus.push(i);
            }
            continue;
        }
        // every test of i holds another infected individual (vacuous for untested i)
        if tests.iter().all(|&a| members(design, a).iter().any(|&j| j != i && infected[j])) {
            c.v1_plus.push(i);
        }
        // some test of i has only definitely healthy companions
        if tests.iter().any(|&a| members(design, a).iter().all(|&j| j == i || in_negative[j])) {
            c.v1_minus_minus.push(i);
        }
    }
    c
}

/// Individuals never seen in a negative test.
pub fn possibly_infected(design: &PoolingDesign, outcomes: &[bool]) -> Vec<usize> {
    (0..design.n())
        .filter(|&i| design.assignments()[i].iter().all(|&a| outcomes[a]))
        .collect()
}

/// Every weight-`k` vector with the given outcomes, by brute force over all of `{0,1}^n`.
pub fn naive_satisfying(design: &PoolingDesign, outcomes: &[bool], k: usize) -> Vec<Vec<usize>> {
    let n = design.n();
    assert!(n <= 20);
    let mut found = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let bits: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        if naive_outcomes(design, &bits) == outcomes {
            found.push((0..n).filter(|&i| bits[i]).collect());
        }
    }
    found
}

/// Smallest consistent weight: subsets of the candidates in increasing size.
pub fn exhaustive_min_weight(design: &PoolingDesign, outcomes: &[bool]) -> Option<usize> {
    let cand = possibly_infected(design, outcomes);
    let v = cand.len();
    assert!(v <= 22);
    let n = design.n();
    let mut by_weight: Vec<Vec<u32>> = vec![Vec::new(); v + 1];
    for mask in 0u32..(1u32 << v) {
        by_weight[mask.count_ones() as usize].push(mask);
    }
    for (w, masks) in by_weight.iter().enumerate() {
        for &mask in masks {
            let mut bits = vec![false; n];
            for (b, &i) in cand.iter().enumerate() {
                bits[i] = mask >> b & 1 == 1;
            }
            if naive_outcomes(design, &bits) == outcomes {
                return Some(w);
            }
        }
    }
    None
}

/// A random instance: regular or Bernoulli design and a uniform weight-`k` truth.
pub struct RandomInstance {
    pub design: PoolingDesign,
    pub infected: Vec<bool>,
}

pub fn random_instance(rng: &mut ChaCha8Rng, max_n: usize) -> RandomInstance {
    let n = rng.random_range(1..=max_n);
    let m = rng.random_range(1..=n.max(2));
    let k = rng.random_range(0..=n.min(1 + n / 8));
    let seed: u64 = rng.random();
    if rng.random_bool(0.75) {
        let delta = rng.random_range(1..=6);
        let lists = (0..n).map(|_| (0..delta).map(|_| rng.random_range(0..m)).collect()).collect();
        return finish(rng, DesignParams::regular(n, m, delta, seed), lists, k);
    }
    let p = rng.random_range(0.02..0.4);
    let assignments: Vec<Vec<usize>> = (0..n).map(|_| (0..m).filter(|_| rng.random_bool(p)).collect()).collect();
    let p = (assignments.iter().map(Vec::len).sum::<usize>() as f64 / (n * m) as f64).clamp(1e-3, 0.999);
    finish(rng, DesignParams::bernoulli(n, m, p, seed), assignments, k)
}

fn finish(rng: &mut ChaCha8Rng, params: DesignParams, lists: Vec<Vec<usize>>, k: usize) -> RandomInstance {
    let n = params.n;
    let design = PoolingDesign::from_assignments(params, lists).expect("valid design");
    let chosen = rand::seq::index::sample(rng, n, k);
    let mut infected = vec![false; n];
    for i in chosen {
        infected[i] = true;
    }
    RandomInstance { design, infected }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
