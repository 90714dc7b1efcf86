//! Numerical toolkit for phase covariant qubit dynamical maps.
//!
//! A phase covariant channel is parameterized by a triple
//! `(lambda, lambda_z, t_z)` acting on the Bloch vector as
//! `(rx, ry, rz) -> (lambda rx, lambda ry, lambda_z rz + t_z)`.
//! The crate classifies such channels (complete positivity, positivity,
//! normal forms), converts between time-dependent rates and parameter
//! trajectories, detects CP- and P-divisibility, ships the standard
//! dynamics families, tests attainability-class membership, and checks
//! Laplace-domain memory kernels for admissibility.

pub mod attainability;
pub mod channel;
pub mod dynamics;
pub mod families;
pub mod kernels;
pub mod quad;
pub mod scan;
pub mod verdict;

pub use attainability::{
    in_class_cp, in_class_l, in_class_l_rotated, in_class_phcov_cp,
    semigroup_generator_from_channel, AttainabilityError, ClassMembership,
};
pub use channel::{
    BlochVector, ChannelError, ChoiMatrix, DensityMatrix, PauliTransfer, PhaseCovChannel,
    SinkhornForm,
};
pub use dynamics::{
    blp_monotone_at, classify_intervals, intermediate_map, is_cp_divisible_at, is_p_divisible_at,
    population, rates_from_trajectory, trajectory_from_rates, ConstantRates, DivisibilityReport,
    DynamicsError, FnRates, IntegratedTrajectory, Rates, SampledRates, SampledTrajectory,
    StatusInterval, Trajectory,
};
pub use families::{
    EternalCommutative, EternalNoncommutative, Family, FamilyError, FamilySpec, KernelExample,
    NamedFn, NonmonotonePopulation, Semigroup,
};
pub use kernels::{
    default_cm_grid, example_kernel, inverse_laplace, is_completely_monotone,
    laplace_params_from_kernel, prop8_admissible, CMReport, CMVerdict, ExpSum, KernelError,
    KernelSpec, RationalLaplace, DEFAULT_CM_DEPTH,
};
pub use scan::{
    containment_violations, default_grid, scan_fold, scan_summary, AxisRange, Predicate,
    ScanError, ScanGrid, ScanSummary,
};
pub use verdict::{Status, Verdict, EPS, EPS_INV};
