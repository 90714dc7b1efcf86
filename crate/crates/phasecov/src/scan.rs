//! Parameter-space region scans over `(lambda, lambda_z, t_z)` grids.
//!
//! The scan engine walks a rectangular grid in deterministic axis order
//! and evaluates a set of channel predicates at every point. Results can
//! be streamed row by row (for CSV output) or folded into counts (for
//! containment checks between regions).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attainability::{in_class_cp, in_class_l, in_class_l_rotated};
use crate::channel::PhaseCovChannel;
use crate::verdict::Verdict;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScanError {
    #[error("invalid scan config: {0}")]
    InvalidConfig(String),
}

/// Channel-region predicates available to scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicate {
    Cp,
    Positive,
    Polyhedron,
    ClassL,
    ClassLRotated,
    ClassCp,
}

impl Predicate {
    pub const ALL: [Predicate; 6] = [
        Predicate::Cp,
        Predicate::Positive,
        Predicate::Polyhedron,
        Predicate::ClassL,
        Predicate::ClassLRotated,
        Predicate::ClassCp,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Predicate::Cp => "cp",
            Predicate::Positive => "positive",
            Predicate::Polyhedron => "polyhedron",
            Predicate::ClassL => "class_l",
            Predicate::ClassLRotated => "class_l_rotated",
            Predicate::ClassCp => "class_cp",
        }
    }

    pub fn evaluate(&self, ch: &PhaseCovChannel) -> Verdict {
        match self {
            Predicate::Cp => ch.is_cp(),
            Predicate::Positive => ch.is_positive(),
            Predicate::Polyhedron => ch.in_polyhedron(),
            Predicate::ClassL => in_class_l(ch),
            Predicate::ClassLRotated => in_class_l_rotated(ch),
            Predicate::ClassCp => in_class_cp(ch),
        }
    }
}

/// Inclusive uniform subdivision of `[min, max]` into `steps` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl AxisRange {
    pub fn new(min: f64, max: f64, steps: usize) -> Result<Self, ScanError> {
        if !(min.is_finite() && max.is_finite()) {
            return Err(ScanError::InvalidConfig("axis range must be finite".into()));
        }
        if steps < 2 {
            return Err(ScanError::InvalidConfig(format!(
                "need at least 2 steps per axis, got {steps}"
            )));
        }
        if max < min {
            return Err(ScanError::InvalidConfig(format!(
                "axis range reversed: [{min}, {max}]"
            )));
        }
        Ok(AxisRange { min, max, steps })
    }

    pub fn value(&self, i: usize) -> f64 {
        self.min + (self.max - self.min) * i as f64 / (self.steps - 1) as f64
    }
}

/// Default region box covering all the parameter-space bodies of
/// interest: 101 steps per axis over `[-1.5, 1.5]^3`.
pub fn default_grid() -> ScanGrid {
    let r = AxisRange {
        min: -1.5,
        max: 1.5,
        steps: 101,
    };
    ScanGrid {
        lambda: r,
        lambda_z: r,
        t_z: r,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub lambda: AxisRange,
    pub lambda_z: AxisRange,
    pub t_z: AxisRange,
}

impl ScanGrid {
    pub fn validate(&self) -> Result<(), ScanError> {
        AxisRange::new(self.lambda.min, self.lambda.max, self.lambda.steps)?;
        AxisRange::new(self.lambda_z.min, self.lambda_z.max, self.lambda_z.steps)?;
        AxisRange::new(self.t_z.min, self.t_z.max, self.t_z.steps)?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.lambda.steps * self.lambda_z.steps * self.t_z.steps
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Walk the grid in row-major order (`lambda` outermost, `t_z`
/// innermost), calling `f` with the parameter triple and one verdict per
/// requested predicate.
pub fn scan_fold<F>(
    grid: &ScanGrid,
    predicates: &[Predicate],
    mut f: F,
) -> Result<(), ScanError>
where
    F: FnMut(f64, f64, f64, &[Verdict]),
{
    grid.validate()?;
    if predicates.is_empty() {
        return Err(ScanError::InvalidConfig(
            "at least one predicate required".into(),
        ));
    }
    let mut verdicts = vec![Verdict::classify(0.0); predicates.len()];
    for i in 0..grid.lambda.steps {
        let l = grid.lambda.value(i);
        for j in 0..grid.lambda_z.steps {
            let lz = grid.lambda_z.value(j);
            for k in 0..grid.t_z.steps {
                let tz = grid.t_z.value(k);
                let ch = PhaseCovChannel::new(l, lz, tz)
                    .expect("finite grid point is a valid parameter triple");
                for (v, p) in verdicts.iter_mut().zip(predicates) {
                    *v = p.evaluate(&ch);
                }
                f(l, lz, tz, &verdicts);
            }
        }
    }
    Ok(())
}

/// Per-predicate counts over a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub grid_points: usize,
    pub predicates: Vec<Predicate>,
    pub holds: Vec<usize>,
    pub marginal: Vec<usize>,
    pub fails: Vec<usize>,
}

pub fn scan_summary(grid: &ScanGrid, predicates: &[Predicate]) -> Result<ScanSummary, ScanError> {
    let mut holds = vec![0usize; predicates.len()];
    let mut marginal = vec![0usize; predicates.len()];
    let mut fails = vec![0usize; predicates.len()];
    scan_fold(grid, predicates, |_, _, _, vs| {
        for (i, v) in vs.iter().enumerate() {
            if v.holds() {
                holds[i] += 1;
            } else if v.is_marginal() {
                marginal[i] += 1;
            } else {
                fails[i] += 1;
            }
        }
    })?;
    Ok(ScanSummary {
        grid_points: grid.len(),
        predicates: predicates.to_vec(),
        holds,
        marginal,
        fails,
    })
}

/// Number of grid points where `inner` holds strictly but `outer` fails
/// strictly. Zero means the inner region is contained in the outer one
/// up to the marginal band.
pub fn containment_violations(
    grid: &ScanGrid,
    inner: Predicate,
    outer: Predicate,
) -> Result<usize, ScanError> {
    let mut violations = 0usize;
    scan_fold(grid, &[inner, outer], |_, _, _, vs| {
        if vs[0].holds() && vs[1].fails() {
            violations += 1;
        }
    })?;
    Ok(violations)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid(steps: usize) -> ScanGrid {
        let r = AxisRange {
            min: -1.5,
            max: 1.5,
            steps,
        };
        ScanGrid {
            lambda: r,
            lambda_z: r,
            t_z: r,
        }
    }

    #[test]
    fn axis_range_validation() {
        assert!(AxisRange::new(0.0, 1.0, 2).is_ok());
        assert!(AxisRange::new(0.0, 1.0, 1).is_err());
        assert!(AxisRange::new(1.0, 0.0, 5).is_err());
        assert!(AxisRange::new(f64::NAN, 1.0, 5).is_err());
    }

    #[test]
    fn axis_range_endpoints() {
        let r = AxisRange::new(-1.5, 1.5, 101).unwrap();
        assert_eq!(r.value(0), -1.5);
        assert_eq!(r.value(100), 1.5);
        assert_eq!(r.value(50), 0.0);
    }

    #[test]
    fn scan_visits_every_point_in_order() {
        let grid = small_grid(3);
        let mut seen = Vec::new();
        scan_fold(&grid, &[Predicate::Cp], |l, lz, tz, _| {
            seen.push((l, lz, tz));
        })
        .unwrap();
        assert_eq!(seen.len(), 27);
        assert_eq!(seen[0], (-1.5, -1.5, -1.5));
        assert_eq!(seen[26], (1.5, 1.5, 1.5));
        // innermost axis varies fastest
        assert_eq!(seen[1], (-1.5, -1.5, 0.0));
    }

    #[test]
    fn cp_region_inside_positive_region() {
        let grid = small_grid(21);
        assert_eq!(
            containment_violations(&grid, Predicate::Cp, Predicate::Positive).unwrap(),
            0
        );
        assert_eq!(
            containment_violations(&grid, Predicate::Polyhedron, Predicate::Cp).unwrap(),
            0
        );
    }

    #[test]
    fn summary_counts_add_up() {
        let grid = small_grid(11);
        let s = scan_summary(&grid, &Predicate::ALL).unwrap();
        for i in 0..Predicate::ALL.len() {
            assert_eq!(s.holds[i] + s.marginal[i] + s.fails[i], grid.len());
        }
        // CP body is strictly smaller than the positivity body on this grid
        assert!(s.holds[0] < s.holds[1]);
    }

    #[test]
    fn identity_point_is_marginal_everywhere() {
        let id = PhaseCovChannel::identity();
        for p in [Predicate::Cp, Predicate::Positive, Predicate::ClassL] {
            assert!(
                p.evaluate(&id).is_marginal(),
                "{} not marginal at the identity",
                p.name()
            );
        }
    }

    #[test]
    fn empty_predicate_list_rejected() {
        let grid = small_grid(3);
        assert!(scan_fold(&grid, &[], |_, _, _, _| {}).is_err());
    }
}
