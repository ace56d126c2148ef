use super::{DecoderKind, Estimate, StageLabel};
use crate::design::PoolingDesign;
use crate::error::Result;
use crate::model::{check_dims, in_negative_test, OutcomeVector};

/// COMP: healthy iff in some negative test, infected otherwise.
pub fn decode_comp(design: &PoolingDesign, outcomes: &OutcomeVector) -> Result<Estimate> {
    check_dims(design, outcomes)?;
    let negative = in_negative_test(design, outcomes);
    let labels = negative
        .iter()
        .map(|&neg| if neg { StageLabel::DefiniteHealthy } else { StageLabel::PossiblyInfected })
        .collect();
    let bits = negative.iter().map(|&neg| !neg).collect();
    Ok(Estimate::new(DecoderKind::Comp, bits, labels, design, outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{fig1, fig1_outcomes};

    #[test]
    fn fig1_has_one_false_positive() {
        let est = decode_comp(&fig1(), &fig1_outcomes()).unwrap();
        assert_eq!(est.infected(), vec![0, 1, 2]);
        assert!(est.consistent_with_outcomes);
        assert_eq!(est.errors(&[true, true, false, false, false, false, false]), (1, 0));
    }

    #[test]
    fn all_negative_and_all_positive() {
        let d = fig1();
        let neg = OutcomeVector::from_bits(vec![false; 5]);
        assert_eq!(decode_comp(&d, &neg).unwrap().weight(), 0);
        let pos = OutcomeVector::from_bits(vec![true; 5]);
        assert_eq!(decode_comp(&d, &pos).unwrap().weight(), 7);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(decode_comp(&fig1(), &OutcomeVector::from_bits(vec![true; 4])).is_err());
    }
}
