use serde::{Deserialize, Serialize};

use super::{DecoderKind, Estimate, StageLabel};
use crate::design::PoolingDesign;
use crate::error::Result;
use crate::model::{check_dims, in_negative_test, OutcomeVector};
use crate::rng::RandomStream;

/// How SCOMP chooses among equally good greedy candidates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieRule {
    /// Uniform over the argmax set, drawn from the supplied stream.
    #[default]
    Random,
    LowestIndex,
}

/// What SCOMP's greedy step maximises.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScompScore {
    /// Number of distinct unexplained tests containing the individual.
    #[default]
    DistinctTests,
    /// Number of edges into unexplained tests, counting multi-edges.
    Multiplicity,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScompOptions {
    pub tie_rule: TieRule,
    pub score: ScompScore,
}

impl ScompOptions {
    pub fn with_tie_rule(tie_rule: TieRule) -> Self {
        Self { tie_rule, ..Self::default() }
    }
}

/// The two sound steps shared by DD and SCOMP. `None` means not yet classified.
fn forced_steps(design: &PoolingDesign, outcomes: &OutcomeVector) -> Vec<Option<StageLabel>> {
    let negative = in_negative_test(design, outcomes);
    let mut labels: Vec<Option<StageLabel>> = negative
        .iter()
        .map(|&neg| neg.then_some(StageLabel::DefiniteHealthy))
        .collect();
    for j in (0..design.m()).filter(|&j| outcomes.is_positive(j)) {
        let mut open = design.test_support(j).filter(|&i| !negative[i]);
        if let (Some(sole), None) = (open.next(), open.next()) {
            labels[sole] = Some(StageLabel::DefiniteInfected);
        }
    }
    labels
}

fn finish(
    decoder: DecoderKind,
    labels: Vec<Option<StageLabel>>,
    design: &PoolingDesign,
    outcomes: &OutcomeVector,
) -> Estimate {
    let labels: Vec<StageLabel> = labels
        .into_iter()
        .map(|l| l.unwrap_or(StageLabel::DefaultHealthy))
        .collect();
    let bits = labels
        .iter()
        .map(|l| matches!(l, StageLabel::DefiniteInfected | StageLabel::GreedyInfected))
        .collect();
    Estimate::new(decoder, bits, labels, design, outcomes)
}

/// DD: negative-test members are healthy; a sole remaining member of a positive
/// test is infected; everyone else defaults to healthy.
pub fn decode_dd(design: &PoolingDesign, outcomes: &OutcomeVector) -> Result<Estimate> {
    check_dims(design, outcomes)?;
    Ok(finish(DecoderKind::Dd, forced_steps(design, outcomes), design, outcomes))
}

/// SCOMP: the DD steps, then greedily cover the unexplained positive tests.
///
/// The stream is only read when the tie rule is [`TieRule::Random`] and the
/// argmax set has more than one member.
pub fn decode_scomp(
    design: &PoolingDesign,
    outcomes: &OutcomeVector,
    stream: &mut RandomStream,
    options: ScompOptions,
) -> Result<Estimate> {
    check_dims(design, outcomes)?;
    let mut labels = forced_steps(design, outcomes);

    let mut explained: Vec<bool> = (0..design.m())
        .map(|j| {
            !outcomes.is_positive(j)
                || design.test_support(j).any(|i| labels[i] == Some(StageLabel::DefiniteInfected))
        })
        .collect();
    let mut remaining = explained.iter().filter(|&&e| !e).count();
    let candidates: Vec<usize> = (0..design.n()).filter(|&i| labels[i].is_none()).collect();
    let tests_of: Vec<Vec<usize>> = candidates
        .iter()
        .map(|&i| match options.score {
            ScompScore::DistinctTests => design.distinct_tests(i),
            ScompScore::Multiplicity => design.assignments()[i].clone(),
        })
        .collect();
    let mut alive: Vec<usize> = (0..candidates.len()).collect();

    let mut argmax = Vec::new();
    while remaining > 0 {
        let mut best = 0;
        argmax.clear();
        for &c in &alive {
            let score = tests_of[c].iter().filter(|&&j| !explained[j]).count();
            if score > best {
                best = score;
                argmax.clear();
            }
            if score == best && score > 0 {
                argmax.push(c);
            }
        }
        if best == 0 {
            // positive tests with no candidate left; only possible for inconsistent input
            break;
        }
        let pick = match options.tie_rule {
            TieRule::LowestIndex => argmax[0],
            TieRule::Random if argmax.len() == 1 => argmax[0],
            TieRule::Random => argmax[stream.below(argmax.len())],
        };
        labels[candidates[pick]] = Some(StageLabel::GreedyInfected);
        for &j in &tests_of[pick] {
            if !explained[j] {
                explained[j] = true;
                remaining -= 1;
            }
        }
        alive.retain(|&c| c != pick);
    }
    Ok(finish(DecoderKind::Scomp, labels, design, outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::DesignParams;
    use crate::rng::Purpose;
    use crate::testutil::{fig1, fig1_outcomes};

    #[test]
    fn dd_on_fig1_finds_nothing() {
        let est = decode_dd(&fig1(), &fig1_outcomes()).unwrap();
        assert_eq!(est.weight(), 0);
        assert!(!est.consistent_with_outcomes);
        assert!(!est.stage_labels.contains(&StageLabel::DefiniteInfected));
        assert_eq!(est.stage_labels[4], StageLabel::DefiniteHealthy);
        assert_eq!(est.stage_labels[0], StageLabel::DefaultHealthy);
    }

    #[test]
    fn dd_single_member_positive_test() {
        let d = PoolingDesign::from_assignments(DesignParams::regular(2, 2, 1, 0), vec![vec![0], vec![1]]).unwrap();
        let out = OutcomeVector::from_bits(vec![true, false]);
        let est = decode_dd(&d, &out).unwrap();
        assert_eq!(est.infected(), vec![0]);
        assert_eq!(est.stage_labels, vec![StageLabel::DefiniteInfected, StageLabel::DefiniteHealthy]);
        assert!(est.consistent_with_outcomes);
    }

    #[test]
    fn dd_doubled_sole_participant() {
        let d = PoolingDesign::from_assignments(
            DesignParams::regular(2, 2, 3, 0),
            vec![vec![0, 0, 1], vec![1, 1, 1]],
        )
        .unwrap();
        let out = OutcomeVector::from_bits(vec![true, true]);
        let est = decode_dd(&d, &out).unwrap();
        // test 1 holds 0 and 1, both undetermined; test 0 holds only 0 (twice)
        assert_eq!(est.infected(), vec![0]);
    }

    #[test]
    fn scomp_lowest_index_on_fig1() {
        let mut s = RandomStream::new(0, Purpose::TieBreak, 0);
        let est = decode_scomp(&fig1(), &fig1_outcomes(), &mut s, ScompOptions::with_tie_rule(TieRule::LowestIndex))
            .unwrap();
        assert_eq!(est.infected(), vec![0]);
        assert!(est.consistent_with_outcomes);
        assert_eq!(est.stage_labels[0], StageLabel::GreedyInfected);
    }

    #[test]
    fn scomp_random_ties_on_fig1() {
        let mut seen = std::collections::BTreeSet::new();
        for seed in 0..64 {
            let mut s = RandomStream::new(seed, Purpose::TieBreak, 0);
            let est = decode_scomp(&fig1(), &fig1_outcomes(), &mut s, ScompOptions::default()).unwrap();
            assert!(est.consistent_with_outcomes);
            seen.insert(est.infected());
        }
        assert_eq!(seen.into_iter().collect::<Vec<_>>(), vec![vec![0], vec![2]]);
    }

    #[test]
    fn scomp_all_negative() {
        let d = fig1();
        let out = OutcomeVector::from_bits(vec![false; 5]);
        let mut s = RandomStream::new(0, Purpose::TieBreak, 0);
        let est = decode_scomp(&d, &out, &mut s, ScompOptions::default()).unwrap();
        assert_eq!(est.weight(), 0);
        assert!(!est.stage_labels.contains(&StageLabel::GreedyInfected));
    }

    #[test]
    fn multiplicity_score_counts_double_edges() {
        // positive tests 0 and 1; 0 sits twice in test 0, 2 sits twice in test 1,
        // 1 sits once in each. Distinct scores 1/2/1, multiplicity scores 2/2/2.
        let d = PoolingDesign::from_assignments(
            DesignParams::regular(4, 3, 2, 0),
            vec![vec![0, 0], vec![0, 1], vec![1, 1], vec![2, 2]],
        )
        .unwrap();
        let out = OutcomeVector::from_bits(vec![true, true, false]);
        let mut s = RandomStream::new(0, Purpose::TieBreak, 0);
        let distinct = decode_scomp(&d, &out, &mut s, ScompOptions::with_tie_rule(TieRule::LowestIndex)).unwrap();
        assert_eq!(distinct.infected(), vec![1]);
        let opts = ScompOptions { tie_rule: TieRule::LowestIndex, score: ScompScore::Multiplicity };
        let weighted = decode_scomp(&d, &out, &mut s, opts).unwrap();
        assert!(weighted.consistent_with_outcomes);
        assert_eq!(weighted.infected(), vec![0, 2]);
    }
}
