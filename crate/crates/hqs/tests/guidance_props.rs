//! Distribution-level properties of the guidance softmax.

use hqs::guidance::{guidance, TemperatureSchedule};
use hqs::hierarchy::NodeId;
use proptest::prelude::*;

fn scored(scores: &[f64]) -> Vec<(NodeId, f64)> {
    scores
        .iter()
        .enumerate()
        .map(|(i, &s)| (NodeId::from_index(i), s))
        .collect()
}

proptest! {
    /// Probabilities sum to one even for scores far beyond the
    /// temperature scale (max-subtraction keeps the exponent sane).
    #[test]
    fn probabilities_normalize(
        scores in prop::collection::vec(-1e6f64..1e6, 1..12),
        delta in 1e-4f64..10.0,
    ) {
        let schedule = TemperatureSchedule::new(delta, 1.0).unwrap();
        let dist = guidance(&schedule, 0, &scored(&scores)).unwrap();
        let total: f64 = dist.probs().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12, "total = {total}");
        prop_assert!(dist.probs().iter().all(|p| (0.0..=1.0).contains(p)));
    }

    /// Adding a constant to every score changes nothing.
    #[test]
    fn shift_invariance(
        scores in prop::collection::vec(-100.0f64..100.0, 1..10),
        shift in -1e3f64..1e3,
    ) {
        let schedule = TemperatureSchedule::new(0.05, 1.0).unwrap();
        let base = guidance(&schedule, 0, &scored(&scores)).unwrap();
        let shifted_scores: Vec<f64> = scores.iter().map(|s| s + shift).collect();
        let shifted = guidance(&schedule, 0, &scored(&shifted_scores)).unwrap();
        for (a, b) in base.probs().iter().zip(shifted.probs().iter()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    /// A higher score never gets a lower probability, and gets a strictly
    /// higher one when neither exponential has underflowed to zero and the
    /// gap is resolvable at this temperature.
    #[test]
    fn monotone_in_score(
        scores in prop::collection::vec(-50.0f64..50.0, 2..10),
        delta in 0.01f64..5.0,
    ) {
        let schedule = TemperatureSchedule::new(delta, 1.0).unwrap();
        let dist = guidance(&schedule, 0, &scored(&scores)).unwrap();
        let probs = dist.probs();
        let top = scores.iter().fold(f64::NEG_INFINITY, |m, s| m.max(*s));
        for i in 0..scores.len() {
            for j in 0..scores.len() {
                if scores[i] > scores[j] {
                    prop_assert!(probs[i] >= probs[j]);
                    let clear_of_underflow = (top - scores[j]) / delta < 600.0;
                    let gap_resolvable = (scores[i] - scores[j]) / delta > 1e-9;
                    if clear_of_underflow && gap_resolvable {
                        prop_assert!(probs[i] > probs[j]);
                    }
                }
            }
        }
    }

    /// Hot limit: a temperature enormously above the score scale washes
    /// the distribution out to uniform.
    #[test]
    fn hot_limit_is_uniform(scores in prop::collection::vec(-100.0f64..100.0, 2..10)) {
        let magnitude = scores.iter().fold(1.0f64, |m, s| m.max(s.abs()));
        let schedule = TemperatureSchedule::new(1e9 * magnitude, 1.0).unwrap();
        let dist = guidance(&schedule, 0, &scored(&scores)).unwrap();
        let uniform = 1.0 / scores.len() as f64;
        for p in dist.probs() {
            prop_assert!((p - uniform).abs() < 1e-6);
        }
    }

    /// Cold limit: a temperature well below the gap separating the best
    /// score concentrates all mass on it.
    #[test]
    fn cold_limit_is_argmax(
        base in prop::collection::vec(-100.0f64..100.0, 1..9),
        gap in 0.5f64..10.0,
    ) {
        // Construct a known unique argmax `gap` above the rest.
        let top = base.iter().fold(f64::NEG_INFINITY, |m, &s| m.max(s)) + gap;
        let mut scores = base;
        scores.push(top);
        let schedule = TemperatureSchedule::new(gap / 60.0, 1.0).unwrap();
        let dist = guidance(&schedule, 0, &scored(&scores)).unwrap();
        prop_assert!(dist.probs()[scores.len() - 1] >= 1.0 - 1e-12);
    }

    /// With a widening schedule the distribution flattens with depth:
    /// the top probability never increases as the search goes deeper.
    #[test]
    fn widening_schedule_flattens_with_depth(
        scores in prop::collection::vec(-10.0f64..10.0, 2..8),
        nu in 1.2f64..3.0,
    ) {
        let schedule = TemperatureSchedule::new(0.05, nu).unwrap();
        let mut last_max = f64::INFINITY;
        for depth in 0..8 {
            let dist = guidance(&schedule, depth, &scored(&scores)).unwrap();
            let top = dist.probs().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(top <= last_max + 1e-15);
            last_max = top;
        }
    }
}
