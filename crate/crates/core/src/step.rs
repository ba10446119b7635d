//! The smooth monotone step shared by the cube partition of unity and the
//! Littlewood-Paley cutoff.

use serde::{Deserialize, Serialize};

/// `s(x) = e^{−κ/x} / (e^{−κ/x} + e^{−κ/(1−x)})` on `(0, 1)`, extended by 0
/// to the left and 1 to the right.
///
/// For every steepness `κ > 0` the step satisfies `s(1 − x) = 1 − s(x)`, so
/// `s(1/2) = 1/2` exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothStep {
    steepness: f64,
}

impl Default for SmoothStep {
    fn default() -> Self {
        SmoothStep { steepness: 1.0 }
    }
}

impl SmoothStep {
    pub fn new(steepness: f64) -> crate::Result<Self> {
        if !(steepness.is_finite() && steepness > 0.0) {
            return Err(crate::Error::InvalidArgument(format!(
                "step steepness must be positive and finite, got {steepness}"
            )));
        }
        Ok(SmoothStep { steepness })
    }

    pub fn steepness(&self) -> f64 {
        self.steepness
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if x >= 1.0 {
            1.0
        } else if x == 0.5 {
            0.5
        } else {
            // 1 / (1 + e^{κ/x − κ/(1−x)}); exp overflow to +inf gives 0.
            let d = self.steepness * (1.0 / x - 1.0 / (1.0 - x));
            1.0 / (1.0 + d.exp())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_midpoint() {
        for k in [0.3, 1.0, 4.0] {
            let s = SmoothStep::new(k).unwrap();
            assert_eq!(s.eval(-1.0), 0.0);
            assert_eq!(s.eval(0.0), 0.0);
            assert_eq!(s.eval(1.0), 1.0);
            assert_eq!(s.eval(7.0), 1.0);
            assert_eq!(s.eval(0.5), 0.5);
        }
    }

    #[test]
    fn symmetric_and_monotone() {
        let s = SmoothStep::default();
        let mut prev = 0.0;
        for i in 1..1000 {
            let x = i as f64 / 1000.0;
            let v = s.eval(x);
            assert!(v >= prev);
            assert!((v + s.eval(1.0 - x) - 1.0).abs() < 1e-15);
            prev = v;
        }
    }

    #[test]
    fn closed_form_value() {
        // κ = 1, x = 1/4: e^{−4} / (e^{−4} + e^{−4/3})
        let expected = (-4.0f64).exp() / ((-4.0f64).exp() + (-4.0f64 / 3.0).exp());
        assert!((SmoothStep::default().eval(0.25) - expected).abs() < 1e-16);
    }

    #[test]
    fn rejects_bad_steepness() {
        assert!(SmoothStep::new(0.0).is_err());
        assert!(SmoothStep::new(f64::NAN).is_err());
    }
}
