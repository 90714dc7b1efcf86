//! Membership predicates for attainability classes of phase covariant
//! channels and semigroup generator recovery.
//!
//! Three nested classes appear: channels reachable as `exp(L)` for a
//! phase covariant generator, their closure under z-rotations, and the
//! channels attainable as a snapshot of some CP dynamics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::PhaseCovChannel;
use crate::families::Semigroup;
use crate::verdict::Verdict;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AttainabilityError {
    #[error("channel ({lambda}, {lambda_z}, {t_z}) is not in the strict interior of the semigroup-attainable class")]
    NotInInterior {
        lambda: f64,
        lambda_z: f64,
        t_z: f64,
    },
}

/// Verdicts for all four class predicates at once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMembership {
    pub in_c_l: Verdict,
    pub in_c_l_rotated: Verdict,
    pub in_c_phcov_cp: Verdict,
    pub in_c_cp: Verdict,
}

impl ClassMembership {
    pub fn of(ch: &PhaseCovChannel) -> Self {
        ClassMembership {
            in_c_l: in_class_l(ch),
            in_c_l_rotated: in_class_l_rotated(ch),
            in_c_phcov_cp: in_class_phcov_cp(ch),
            in_c_cp: in_class_cp(ch),
        }
    }
}

/// Channels attainable as `exp(L)` for a phase covariant generator:
/// CP with `lambda >= 0` and `lambda_z >= lambda^2`.
pub fn in_class_l(ch: &PhaseCovChannel) -> Verdict {
    let cp = ch.is_cp();
    let margin = cp
        .margin
        .min(ch.lambda)
        .min(ch.lambda_z - ch.lambda * ch.lambda);
    Verdict::classify(margin)
}

/// Closure of the semigroup-attainable class under z-rotations: the sign
/// restriction on `lambda` drops, leaving CP with `lambda_z >= lambda^2`.
pub fn in_class_l_rotated(ch: &PhaseCovChannel) -> Verdict {
    let cp = ch.is_cp();
    let margin = cp.margin.min(ch.lambda_z - ch.lambda * ch.lambda);
    Verdict::classify(margin)
}

/// Channels attainable as a snapshot of CP-divisible phase covariant
/// dynamics. This class coincides with the semigroup-attainable class.
pub fn in_class_phcov_cp(ch: &PhaseCovChannel) -> Verdict {
    in_class_l(ch)
}

/// Channels attainable as a snapshot of some completely positive
/// dynamics: CP with `lambda_z >= lambda^2` or `lambda = 0`.
pub fn in_class_cp(ch: &PhaseCovChannel) -> Verdict {
    let cp = ch.is_cp();
    let spectral = ch.lambda_z - ch.lambda * ch.lambda;
    let collapse = -ch.lambda.abs();
    Verdict::classify(cp.margin.min(spectral.max(collapse)))
}

/// Recover the constant rates whose semigroup reaches `ch` at `t = 1`:
/// `gamma_pm = (1 - lambda_z +- t_z)(-ln lambda_z) / (2 (1 - lambda_z))`,
/// `gamma_z = (1/4) ln(lambda_z / lambda^2)`.
///
/// Requires the strict interior `lambda > 0`, `lambda^2 < lambda_z < 1`
/// together with the CP inequalities. `lambda_z = 1` is rejected rather
/// than handled by the limit.
pub fn semigroup_generator_from_channel(
    ch: &PhaseCovChannel,
) -> Result<(f64, f64, f64), AttainabilityError> {
    let (l, lz, tz) = (ch.lambda, ch.lambda_z, ch.t_z);
    let err = AttainabilityError::NotInInterior {
        lambda: l,
        lambda_z: lz,
        t_z: tz,
    };
    if !(l > 0.0 && lz < 1.0 && lz > l * l) {
        return Err(err);
    }
    if lz.abs() + tz.abs() > 1.0 || 4.0 * l * l + tz * tz > (1.0 + lz) * (1.0 + lz) {
        return Err(err);
    }
    let log_lz = lz.ln();
    let gp = (1.0 - lz + tz) * (-log_lz) / (2.0 * (1.0 - lz));
    let gm = (1.0 - lz - tz) * (-log_lz) / (2.0 * (1.0 - lz));
    let gz = 0.25 * (lz / (l * l)).ln();
    Ok((gp, gm, gz))
}

/// Round-trip helper used in validation: the recovered semigroup at
/// `t = 1`.
pub fn semigroup_round_trip(
    ch: &PhaseCovChannel,
) -> Result<PhaseCovChannel, AttainabilityError> {
    use crate::dynamics::Trajectory;
    let (gp, gm, gz) = semigroup_generator_from_channel(ch)?;
    let semi = Semigroup::new(gp.max(0.0), gm.max(0.0), gz.max(0.0)).expect("rates non-negative");
    Ok(semi.channel_at(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Trajectory;
    use approx::assert_abs_diff_eq;

    fn ch(l: f64, lz: f64, tz: f64) -> PhaseCovChannel {
        PhaseCovChannel::new(l, lz, tz).unwrap()
    }

    #[test]
    fn identity_memberships() {
        let id = PhaseCovChannel::identity();
        // identity sits on the boundary lambda_z = lambda^2
        assert!(in_class_l(&id).holds_or_marginal());
        assert!(in_class_l_rotated(&id).holds_or_marginal());
        assert!(in_class_cp(&id).holds_or_marginal());
    }

    #[test]
    fn semigroup_image_is_in_class_l() {
        let semi = Semigroup::new(2.0, 1.0, 0.25).unwrap();
        let c = semi.channel_at(1.0);
        assert!(in_class_l(&c).holds());
        assert!(in_class_phcov_cp(&c).holds());
    }

    #[test]
    fn unitary_z_flip_composed_with_collapse() {
        // (0, -1, 0) maps the Bloch ball onto the flipped z-axis; it is a
        // valid CP snapshot only through the lambda = 0 branch
        let c = ch(0.0, -1.0, 0.0);
        assert!(in_class_l(&c).fails());
        assert!(in_class_phcov_cp(&c).fails());
        assert!(in_class_cp(&c).holds_or_marginal());
    }

    #[test]
    fn rotated_class_admits_negative_lambda() {
        let c = ch(-0.3, 0.25, 0.0);
        assert!(c.is_cp().holds_or_marginal());
        assert!(in_class_l(&c).fails());
        assert!(in_class_l_rotated(&c).holds());
    }

    #[test]
    fn spectral_condition_fails_for_all_classes() {
        let c = ch(0.5, 0.2, 0.0);
        assert!(in_class_l(&c).fails());
        assert!(in_class_l_rotated(&c).fails());
        assert!(in_class_cp(&c).fails());
    }

    #[test]
    fn generator_round_trip_from_semigroup() {
        let semi = Semigroup::new(2.0, 1.0, 0.25).unwrap();
        let c = semi.channel_at(1.0);
        let (gp, gm, gz) = semigroup_generator_from_channel(&c).unwrap();
        assert_abs_diff_eq!(gp, 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(gm, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(gz, 0.25, epsilon = 1e-10);
    }

    #[test]
    fn generator_closed_forms_unital_point() {
        let c = ch(0.5, 0.5, 0.0);
        let (gp, gm, gz) = semigroup_generator_from_channel(&c).unwrap();
        let expected = -(0.5f64.ln()) / 2.0;
        assert_abs_diff_eq!(gp, expected, epsilon = 1e-12);
        assert_abs_diff_eq!(gm, expected, epsilon = 1e-12);
        assert_abs_diff_eq!(gz, 0.25 * (0.5f64 / 0.25).ln(), epsilon = 1e-12);
        let back = semigroup_round_trip(&c).unwrap();
        assert_abs_diff_eq!(back.lambda, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(back.lambda_z, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(back.t_z, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn generator_rejects_identity() {
        let r = semigroup_generator_from_channel(&PhaseCovChannel::identity());
        assert!(matches!(r, Err(AttainabilityError::NotInInterior { .. })));
    }

    #[test]
    fn generator_rejects_outside_interior() {
        assert!(semigroup_generator_from_channel(&ch(-0.3, 0.25, 0.0)).is_err());
        assert!(semigroup_generator_from_channel(&ch(0.5, 0.2, 0.0)).is_err());
    }

    #[test]
    fn oscillating_family_stays_in_cp_divisible_class() {
        use crate::families::NonmonotonePopulation;
        let fam = NonmonotonePopulation::new(1.0, 2.0).unwrap();
        for i in 0..=40 {
            let t = i as f64 * 0.1;
            let c = fam.channel_at(t);
            assert!(
                in_class_phcov_cp(&c).holds_or_marginal(),
                "left the class at t = {t}"
            );
        }
    }

    #[test]
    fn eternal_family_leaves_cp_divisible_class() {
        use crate::families::EternalCommutative;
        let fam = EternalCommutative::new(0.5, 1.0).unwrap();
        let mut seen = false;
        for i in 1..=40 {
            let t = i as f64 * 0.1;
            let c = fam.channel_at(t);
            if c.lambda_z < c.lambda * c.lambda {
                seen = true;
                assert!(
                    in_class_phcov_cp(&c).fails(),
                    "expected failure at t = {t}"
                );
            }
        }
        assert!(seen, "no sampled point had lambda_z < lambda^2");
    }
}
