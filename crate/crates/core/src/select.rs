use rand::{Rng, RngCore};

use crate::error::{BanditError, Result};

/// Index of a maximal element, breaking ties uniformly at random.
///
/// Ties are exact floating-point equality. The stream is only consumed when
/// more than one element shares the maximum.
pub fn argmax_random_tiebreak(values: &[f64], rng: &mut dyn RngCore) -> Result<usize> {
    if values.is_empty() {
        return Err(BanditError::EmptyCandidates);
    }
    let mut best = f64::NEG_INFINITY;
    let mut best_index = 0;
    let mut ties = 0usize;
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(BanditError::NonFinite);
        }
        if ties == 0 || v > best {
            best = v;
            best_index = i;
            ties = 1;
        } else if v == best {
            ties += 1;
        }
    }
    if ties == 1 {
        return Ok(best_index);
    }
    let pick = rng.random_range(0..ties);
    Ok(values
        .iter()
        .enumerate()
        .filter(|&(_, &v)| v == best)
        .nth(pick)
        .map(|(i, _)| i)
        .expect("tie count matches"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;
    use proptest::prelude::{any, prop, prop_assert_eq, proptest};

    #[test]
    fn unique_maximum() {
        let mut rng = Stream::from_seed_u64(1);
        assert_eq!(
            argmax_random_tiebreak(&[0.2, 0.7, 0.1], &mut rng).unwrap(),
            1
        );
        assert_eq!(argmax_random_tiebreak(&[0.5], &mut rng).unwrap(), 0);
    }

    #[test]
    fn rejects_empty_and_nan() {
        let mut rng = Stream::from_seed_u64(1);
        let err = argmax_random_tiebreak(&[], &mut rng).unwrap_err();
        assert_eq!(err.to_string(), "empty candidate set");
        let err = argmax_random_tiebreak(&[0.1, f64::NAN], &mut rng).unwrap_err();
        assert_eq!(err.to_string(), "non-finite value");
    }

    #[test]
    fn two_way_tie_is_fair() {
        let mut rng = Stream::from_seed_u64(17);
        let trials = 100_000;
        let zeros = (0..trials)
            .filter(|_| argmax_random_tiebreak(&[1.0, 1.0, 0.3], &mut rng).unwrap() == 0)
            .count();
        let freq = zeros as f64 / trials as f64;
        assert!((freq - 0.5).abs() <= 0.01, "freq {freq}");
    }

    #[test]
    fn three_way_tie_covers_all() {
        let mut rng = Stream::from_seed_u64(3);
        let mut counts = [0usize; 4];
        for _ in 0..30_000 {
            counts[argmax_random_tiebreak(&[2.0, 0.0, 2.0, 2.0], &mut rng).unwrap()] += 1;
        }
        assert_eq!(counts[1], 0);
        for &c in &[counts[0], counts[2], counts[3]] {
            assert!((c as f64 / 30_000.0 - 1.0 / 3.0).abs() < 0.015);
        }
    }

    proptest! {
        #[test]
        fn never_returns_non_maximal(values in prop::collection::vec(-5i32..5, 1..20), seed in any::<u64>()) {
            let values: Vec<f64> = values.into_iter().map(f64::from).collect();
            let mut rng = Stream::from_seed_u64(seed);
            let i = argmax_random_tiebreak(&values, &mut rng).unwrap();
            let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(values[i], max);
        }

        #[test]
        fn positive_scaling_keeps_choice(values in prop::collection::vec(-4i32..4, 1..12), scale in 0.01f64..100.0, seed in any::<u64>()) {
            let values: Vec<f64> = values.into_iter().map(|v| f64::from(v) * 0.25).collect();
            let scaled: Vec<f64> = values.iter().map(|v| v * scale).collect();
            let a = argmax_random_tiebreak(&values, &mut Stream::from_seed_u64(seed)).unwrap();
            let b = argmax_random_tiebreak(&scaled, &mut Stream::from_seed_u64(seed)).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
