//! Tri-state classification verdicts.
//!
//! Every inequality-based classifier in this crate reports a [`Verdict`]
//! carrying the signed distance of the tightest inequality. Points within
//! the tolerance band of a boundary are reported as [`Status::Marginal`]
//! rather than being forced onto one side.

use serde::{Deserialize, Serialize};

/// Global tolerance for inequality classification.
pub const EPS: f64 = 1e-9;

/// Threshold below which a contraction parameter is treated as singular.
pub const EPS_INV: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Holds,
    Fails,
    Marginal,
}

/// Outcome of an inequality-based classifier.
///
/// `margin` is the minimum slack over the defining inequalities; positive
/// means all inequalities hold strictly, negative means at least one is
/// violated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    pub margin: f64,
}

impl Verdict {
    /// Classify a signed margin against a tolerance band.
    pub fn from_margin(margin: f64, tol: f64) -> Self {
        let status = if margin.abs() <= tol {
            Status::Marginal
        } else if margin > 0.0 {
            Status::Holds
        } else {
            Status::Fails
        };
        Verdict { status, margin }
    }

    pub fn classify(margin: f64) -> Self {
        Self::from_margin(margin, EPS)
    }

    /// Strictly positive margin.
    pub fn holds(&self) -> bool {
        self.status == Status::Holds
    }

    pub fn fails(&self) -> bool {
        self.status == Status::Fails
    }

    pub fn is_marginal(&self) -> bool {
        self.status == Status::Marginal
    }

    /// Holds or marginal, i.e. the non-strict inequality is satisfied
    /// within tolerance.
    pub fn holds_or_marginal(&self) -> bool {
        self.status != Status::Fails
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Status::Holds => write!(f, "holds"),
            Status::Fails => write!(f, "fails"),
            Status::Marginal => write!(f, "marginal"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margin_band() {
        assert_eq!(Verdict::classify(1.0).status, Status::Holds);
        assert_eq!(Verdict::classify(-1.0).status, Status::Fails);
        assert_eq!(Verdict::classify(0.0).status, Status::Marginal);
        assert_eq!(Verdict::classify(5e-10).status, Status::Marginal);
        assert_eq!(Verdict::classify(-5e-10).status, Status::Marginal);
        assert_eq!(Verdict::classify(2e-9).status, Status::Holds);
    }
}
