//! Model layer: count distributions N and component (severity) distributions
//! X_1, exposing exactly the analytic objects the recursion and transform
//! engines consume — pmf values, generating-function derivatives,
//! characteristic-function derivatives and raw moments.
//!
//! Models are immutable after construction; every operation is pure and safe
//! to call from multiple threads.

mod count;
mod severity;

pub use count::CountModel;
pub use severity::{CustomCf, DecayHint, SeverityModel};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Default certification tolerance for truncated series: tails below this
/// fraction of total mass are considered negligible.
pub const DEFAULT_TAIL_TOL: f64 = 1e-14;

/// Parameters of the Panjer (a,b) class: q_n = (a + b/n) q_{n-1} for n >= 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PanjerParams {
    pub a: f64,
    pub b: f64,
}

impl PanjerParams {
    /// Admissibility: a + b >= 0 and a < 1.
    pub fn validate(&self) -> Result<()> {
        if !(self.a + self.b >= 0.0) || !(self.a < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "Panjer parameters a={}, b={} violate a+b>=0, a<1",
                self.a, self.b
            )));
        }
        Ok(())
    }
}

/// Cumulative intensity Λ of a point process: nondecreasing with Λ(0) = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Intensity {
    /// Λ(t) = rate * t.
    Linear { rate: f64 },
    /// Λ(t) = coeff * t^exponent.
    Power { coeff: f64, exponent: f64 },
}

impl Intensity {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Intensity::Linear { rate } => *rate >= 0.0,
            Intensity::Power { coeff, exponent } => *coeff >= 0.0 && *exponent > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(
                "intensity must be nondecreasing with Lambda(0)=0".into(),
            ))
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Intensity::Linear { rate } => rate * t,
            Intensity::Power { coeff, exponent } => coeff * t.powf(*exponent),
        }
    }

    /// Λ(t, t+s] = Λ(t+s) - Λ(t), computed without cancellation where possible.
    pub fn increment(&self, t: f64, s: f64) -> f64 {
        match self {
            Intensity::Linear { rate } => rate * s,
            Intensity::Power { .. } => self.value(t + s) - self.value(t),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panjer_admissibility() {
        assert!(PanjerParams { a: 0.0, b: 2.0 }.validate().is_ok());
        assert!(PanjerParams { a: 0.5, b: -0.2 }.validate().is_ok());
        assert!(PanjerParams { a: 1.0, b: 0.5 }.validate().is_err());
        assert!(PanjerParams { a: -0.5, b: 0.2 }.validate().is_err());
    }

    #[test]
    fn intensity_linear_increment_is_exact() {
        let lam = Intensity::Linear { rate: 3.0 };
        assert_eq!(lam.value(2.0), 6.0);
        assert_eq!(lam.increment(1.0, 1.0), 3.0);
    }

    #[test]
    fn intensity_power() {
        let lam = Intensity::Power {
            coeff: 2.0,
            exponent: 2.0,
        };
        assert_eq!(lam.value(3.0), 18.0);
        assert!((lam.increment(1.0, 1.0) - 6.0).abs() < 1e-12);
    }
}
