//! Closed-form analysis of an idealized search value model.
//!
//! Strip the simulation down to two exponentials and the trade-off at
//! the heart of the measure becomes analyzable. Let belief decay
//! geometrically with depth at rate `gamma`, and let the stop reward at
//! depth `l` behave like `2 - gamma^(g l)` with `g` the growth rate of
//! the reward relative to the belief decay. The value of stopping at
//! depth `l` is then
//!
//! ```text
//! V(l) = gamma^l * (2 - gamma^(g l)) - 1
//! ```
//!
//! For `g >= 1` the curve has a unique interior maximum; below that the
//! reward grows too slowly to ever pay for the lost belief and the best
//! depth is the root. [`depth_maximizing_growth`] locates the growth
//! rate under which that maximum sits deepest, the regime in which a
//! searcher is motivated to explore as much of the tree as possible.

use crate::error::EvalError;

/// Validated parameters of the two-exponential value model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisParams {
    decay: f64,
    growth: f64,
}

impl AnalysisParams {
    /// `decay` is the per-level belief retention, in `(0, 1)`; `growth`
    /// is the relative reward growth rate, nonnegative.
    pub fn new(decay: f64, growth: f64) -> Result<Self, EvalError> {
        if !decay.is_finite() || decay <= 0.0 || decay >= 1.0 {
            return Err(EvalError::InvalidDecay(decay));
        }
        if !growth.is_finite() || growth < 0.0 {
            return Err(EvalError::InvalidPenalty(growth));
        }
        Ok(AnalysisParams { decay, growth })
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn growth(&self) -> f64 {
        self.growth
    }

    /// Value of stopping at (possibly fractional) depth `depth`.
    pub fn value_at(&self, depth: f64) -> f64 {
        self.decay.powf(depth) * (2.0 - self.decay.powf(self.growth * depth)) - 1.0
    }

    /// Depth that maximizes [`AnalysisParams::value_at`].
    ///
    /// `None` when `growth < 1`: the reward then grows too slowly for
    /// any descent to beat stopping at the root. `growth == 0` is
    /// rejected outright because the stationarity condition degenerates.
    pub fn optimal_depth(&self) -> Result<Option<f64>, EvalError> {
        if self.growth == 0.0 {
            return Err(EvalError::SingularPenalty);
        }
        if self.growth < 1.0 {
            return Ok(None);
        }
        let l = (2f64.ln() - (1.0 + self.growth).ln()) / (self.growth * self.decay.ln());
        Ok(Some(l))
    }

    /// Sampled `(depth, value)` curve: `steps + 1` evenly spaced points
    /// on `[0, depth_max]`.
    pub fn value_curve(&self, depth_max: f64, steps: usize) -> Vec<(f64, f64)> {
        let steps = steps.max(1);
        (0..=steps)
            .map(|i| {
                let l = depth_max * i as f64 / steps as f64;
                (l, self.value_at(l))
            })
            .collect()
    }

    /// CSV rendering of [`AnalysisParams::value_curve`], header `ell,value`.
    pub fn value_curve_csv(&self, depth_max: f64, steps: usize) -> String {
        let mut out = String::from("ell,value\n");
        for (l, v) in self.value_curve(depth_max, steps) {
            out.push_str(&l.to_string());
            out.push(',');
            out.push_str(&v.to_string());
            out.push('\n');
        }
        out
    }
}

/// Growth rate that maximizes the optimal depth.
///
/// The optimal depth first deepens with `g` (a faster-growing reward
/// justifies longer descents) and then shallows again (the optimum
/// chases the quickly-saturating reward back toward the root), so there
/// is a growth rate under which searchers go deepest. Differentiating
/// the optimal depth in `g` reduces its stationarity to one equation in
/// the growth rate alone (the decay rate cancels):
///
/// ```text
/// f(g) = g + (1 + g) * (ln 2 - ln(1 + g)) = 0
/// ```
///
/// `f` is positive at 1, negative at 10 and strictly decreasing in
/// between, so bisection pins the root to within 1e-10. The root sits
/// between 3 and 4.
pub fn depth_maximizing_growth() -> f64 {
    let f = |g: f64| g + (1.0 + g) * (2f64.ln() - (1.0 + g).ln());
    let (mut lo, mut hi) = (1.0, 10.0);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Deepest optimal depth achievable at a given decay, i.e. the optimal
/// depth evaluated at [`depth_maximizing_growth`].
///
/// At that growth rate the general depth formula collapses to
/// `1 / ((1 + g) * (-ln gamma))`, linear in the characteristic depth
/// scale `-1/ln gamma`.
pub fn deepest_optimal_depth(decay: f64) -> Result<f64, EvalError> {
    if !decay.is_finite() || decay <= 0.0 || decay >= 1.0 {
        return Err(EvalError::InvalidDecay(decay));
    }
    Ok(1.0 / ((1.0 + depth_maximizing_growth()) * (-decay.ln())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_at_matches_hand_expansion() {
        let p = AnalysisParams::new(0.9, 3.0).unwrap();
        let direct = 0.9f64 * (2.0 - 0.9f64.powi(3)) - 1.0;
        assert!((p.value_at(1.0) - direct).abs() < 1e-12);
        assert!((p.value_at(1.0) - 0.1439).abs() < 1e-4);
        // Depth zero always stops with the root reward: value 0.
        assert_eq!(p.value_at(0.0), 0.0);
    }

    #[test]
    fn optimal_depth_frozen_value() {
        let p = AnalysisParams::new(0.9, 3.0).unwrap();
        let l = p.optimal_depth().unwrap().unwrap();
        assert!((l - 2.192937826320195).abs() < 1e-9, "l = {l}");
        // Interior maximum: nudging either way loses value.
        let v = p.value_at(l);
        assert!(v > p.value_at(l - 0.01));
        assert!(v > p.value_at(l + 0.01));
    }

    #[test]
    fn slow_growth_has_no_optimal_depth() {
        let p = AnalysisParams::new(0.9, 0.5).unwrap();
        assert_eq!(p.optimal_depth().unwrap(), None);
        // And indeed descending only hurts.
        assert!(p.value_at(0.5) < 0.0);
        assert!(p.value_at(2.0) < 0.0);
    }

    #[test]
    fn unit_growth_is_the_boundary() {
        let p = AnalysisParams::new(0.7, 1.0).unwrap();
        assert_eq!(p.optimal_depth().unwrap(), Some(0.0));
    }

    #[test]
    fn zero_growth_is_singular() {
        let p = AnalysisParams::new(0.9, 0.0).unwrap();
        assert!(matches!(p.optimal_depth(), Err(EvalError::SingularPenalty)));
    }

    #[test]
    fn parameter_validation() {
        for bad in [0.0, 1.0, -0.2, 1.7, f64::NAN] {
            assert!(matches!(
                AnalysisParams::new(bad, 2.0),
                Err(EvalError::InvalidDecay(_))
            ));
        }
        for bad in [-1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(
                AnalysisParams::new(0.5, bad),
                Err(EvalError::InvalidPenalty(_))
            ));
        }
    }

    #[test]
    fn depth_maximizing_growth_frozen_bracket_and_residual() {
        let g = depth_maximizing_growth();
        assert!((g - 3.3110704070008694).abs() < 1e-6, "g = {g}");
        assert!(g > 3.0 && g < 4.0);
        let f = |g: f64| g + (1.0 + g) * (2f64.ln() - (1.0 + g).ln());
        assert!(f(g).abs() < 1e-9);
        // The bracketing function itself, frozen at the integer probes.
        assert!((f(3.0) - 0.22741127776021898).abs() < 1e-15);
        assert!((f(4.0) - -0.5814536593707755).abs() < 1e-15);
    }

    #[test]
    fn deepest_depth_agrees_with_the_general_formula() {
        let g = depth_maximizing_growth();
        for decay in [0.5, 0.9, 0.99] {
            let via_simplified = deepest_optimal_depth(decay).unwrap();
            let via_general = AnalysisParams::new(decay, g)
                .unwrap()
                .optimal_depth()
                .unwrap()
                .unwrap();
            assert!(
                (via_simplified - via_general).abs() < 1e-9,
                "decay {decay}: {via_simplified} vs {via_general}"
            );
            // This growth rate is the depth maximizer: nudging it either
            // way yields a shallower optimum.
            for nudged in [g - 0.01, g + 0.01] {
                let l = AnalysisParams::new(decay, nudged)
                    .unwrap()
                    .optimal_depth()
                    .unwrap()
                    .unwrap();
                assert!(l < via_general, "decay {decay} growth {nudged}: {l}");
            }
        }
    }

    #[test]
    fn value_curve_shape() {
        let p = AnalysisParams::new(0.9, 3.0).unwrap();
        let curve = p.value_curve(5.0, 100);
        assert_eq!(curve.len(), 101);
        assert_eq!(curve[0], (0.0, 0.0));
        assert_eq!(curve[100].0, 5.0);
        let csv = p.value_curve_csv(5.0, 100);
        assert!(csv.starts_with("ell,value\n0,0\n"));
        assert_eq!(csv.lines().count(), 102);
    }
}
