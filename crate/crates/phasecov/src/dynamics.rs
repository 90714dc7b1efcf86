//! Time-dependent machinery: rate <-> trajectory conversion, intermediate
//! propagators, per-time divisibility classifiers, and population
//! evolution.
//!
//! A dynamical map is described either by a [`Trajectory`] (the functions
//! `lambda(t)`, `lambda_z(t)`, `t_z(t)` with `Phi(0) = Id`) or by a set of
//! decoherence [`Rates`] `(gamma_plus, gamma_minus, gamma_z)` of the
//! time-local generator. The two descriptions are related by
//! differentiation and by running-integral exponentials.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{ChannelError, PhaseCovChannel};
use crate::quad::{self, QuadError};
use crate::verdict::{Status, Verdict, EPS, EPS_INV};

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("quadrature failure: {0}")]
    Quadrature(#[from] QuadError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("divisibility implication chain violated at t = {t}")]
    InconsistentVerdicts { t: f64 },
}

/// Decoherence rates of the time-local generator. Implementations must be
/// pure and deterministic.
pub trait Rates: Send + Sync {
    /// `(gamma_plus, gamma_minus, gamma_z)` at time `t`.
    fn rates(&self, t: f64) -> (f64, f64, f64);

    /// Time derivative of `gamma_z`, needed only on the P-divisibility
    /// boundary. Default: 5-point central finite difference with step
    /// `1e-6 * max(1, |t|)`.
    fn gamma_z_derivative(&self, t: f64) -> f64 {
        let h = 1e-6 * t.abs().max(1.0);
        let g = |x: f64| self.rates(x).2;
        (g(t - 2.0 * h) - 8.0 * g(t - h) + 8.0 * g(t + h) - g(t + 2.0 * h)) / (12.0 * h)
    }
}

/// A time-parameterized channel triple with `lambda(0) = lambda_z(0) = 1`,
/// `t_z(0) = 0`.
pub trait Trajectory: Send + Sync {
    /// `(lambda, lambda_z, t_z)` at time `t`.
    fn params(&self, t: f64) -> (f64, f64, f64);

    /// Time derivatives of the triple. Default: 5-point central finite
    /// differences with step `1e-6 * max(1, |t|)`; built-in families
    /// override this with analytic forms.
    fn derivs(&self, t: f64) -> (f64, f64, f64) {
        let h = 1e-6 * t.abs().max(1.0);
        let diff = |f: &dyn Fn(f64) -> f64| {
            (f(t - 2.0 * h) - 8.0 * f(t - h) + 8.0 * f(t + h) - f(t + 2.0 * h)) / (12.0 * h)
        };
        (
            diff(&|x| self.params(x).0),
            diff(&|x| self.params(x).1),
            diff(&|x| self.params(x).2),
        )
    }

    /// The channel at a fixed time.
    fn channel_at(&self, t: f64) -> PhaseCovChannel {
        let (l, lz, tz) = self.params(t);
        PhaseCovChannel::new(l, lz, tz).expect("trajectory produced non-finite parameters")
    }
}

impl<R: Rates + ?Sized> Rates for &R {
    fn rates(&self, t: f64) -> (f64, f64, f64) {
        (**self).rates(t)
    }
    fn gamma_z_derivative(&self, t: f64) -> f64 {
        (**self).gamma_z_derivative(t)
    }
}

impl<R: Rates + ?Sized> Rates for Box<R> {
    fn rates(&self, t: f64) -> (f64, f64, f64) {
        (**self).rates(t)
    }
    fn gamma_z_derivative(&self, t: f64) -> f64 {
        (**self).gamma_z_derivative(t)
    }
}

impl<T: Trajectory + ?Sized> Trajectory for &T {
    fn params(&self, t: f64) -> (f64, f64, f64) {
        (**self).params(t)
    }
    fn derivs(&self, t: f64) -> (f64, f64, f64) {
        (**self).derivs(t)
    }
}

impl<T: Trajectory + ?Sized> Trajectory for Box<T> {
    fn params(&self, t: f64) -> (f64, f64, f64) {
        (**self).params(t)
    }
    fn derivs(&self, t: f64) -> (f64, f64, f64) {
        (**self).derivs(t)
    }
}

/// Constant rates (a Markov semigroup generator when all non-negative).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantRates {
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub gamma_z: f64,
}

impl Rates for ConstantRates {
    fn rates(&self, _t: f64) -> (f64, f64, f64) {
        (self.gamma_plus, self.gamma_minus, self.gamma_z)
    }
    fn gamma_z_derivative(&self, _t: f64) -> f64 {
        0.0
    }
}

/// Rates given by closures.
pub struct FnRates<F: Fn(f64) -> (f64, f64, f64) + Send + Sync>(pub F);

impl<F: Fn(f64) -> (f64, f64, f64) + Send + Sync> Rates for FnRates<F> {
    fn rates(&self, t: f64) -> (f64, f64, f64) {
        (self.0)(t)
    }
}

/// Dense-sample rates with linear interpolation; times must be strictly
/// increasing. Queries outside the sampled range clamp to the end values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampledRates {
    pub times: Vec<f64>,
    pub gamma_plus: Vec<f64>,
    pub gamma_minus: Vec<f64>,
    pub gamma_z: Vec<f64>,
}

fn interp(times: &[f64], values: &[f64], t: f64) -> f64 {
    if t <= times[0] {
        return values[0];
    }
    if t >= *times.last().unwrap() {
        return *values.last().unwrap();
    }
    let idx = times.partition_point(|&x| x <= t);
    let (t0, t1) = (times[idx - 1], times[idx]);
    let w = (t - t0) / (t1 - t0);
    values[idx - 1] * (1.0 - w) + values[idx] * w
}

impl SampledRates {
    pub fn new(
        times: Vec<f64>,
        gamma_plus: Vec<f64>,
        gamma_minus: Vec<f64>,
        gamma_z: Vec<f64>,
    ) -> Result<Self, DynamicsError> {
        let n = times.len();
        if n < 2 {
            return Err(DynamicsError::InvalidInput(
                "sampled rates need at least two time points".into(),
            ));
        }
        if gamma_plus.len() != n || gamma_minus.len() != n || gamma_z.len() != n {
            return Err(DynamicsError::InvalidInput(
                "sampled rate arrays have mismatched lengths".into(),
            ));
        }
        if !times.windows(2).all(|w| w[1] > w[0]) {
            return Err(DynamicsError::InvalidInput(
                "sample times must be strictly increasing".into(),
            ));
        }
        Ok(SampledRates {
            times,
            gamma_plus,
            gamma_minus,
            gamma_z,
        })
    }
}

impl Rates for SampledRates {
    fn rates(&self, t: f64) -> (f64, f64, f64) {
        (
            interp(&self.times, &self.gamma_plus, t),
            interp(&self.times, &self.gamma_minus, t),
            interp(&self.times, &self.gamma_z, t),
        )
    }
}

/// Dense-sample trajectory with linear interpolation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampledTrajectory {
    pub times: Vec<f64>,
    pub lambda: Vec<f64>,
    pub lambda_z: Vec<f64>,
    pub t_z: Vec<f64>,
}

impl Trajectory for SampledTrajectory {
    fn params(&self, t: f64) -> (f64, f64, f64) {
        (
            interp(&self.times, &self.lambda, t),
            interp(&self.times, &self.lambda_z, t),
            interp(&self.times, &self.t_z, t),
        )
    }
}

/// Decoherence rates of a trajectory at time `t`, by differentiating the
/// channel parameters:
/// `gamma_pm = (lambda_z / 2) d/dt [(1 +- t_z) / lambda_z]`,
/// `gamma_z = (1/4) d(ln lambda_z)/dt - (1/2) d(ln lambda)/dt`.
pub fn rates_from_trajectory(
    tr: &(impl Trajectory + ?Sized),
    t: f64,
) -> Result<(f64, f64, f64), DynamicsError> {
    let (l, lz, tz) = tr.params(t);
    if l.abs() <= EPS_INV || lz.abs() <= EPS_INV {
        return Err(ChannelError::SingularChannel(EPS_INV).into());
    }
    let (dl, dlz, dtz) = tr.derivs(t);
    let gp = 0.5 * dtz - (1.0 + tz) * dlz / (2.0 * lz);
    let gm = -0.5 * dtz - (1.0 - tz) * dlz / (2.0 * lz);
    let gz = dlz / (4.0 * lz) - dl / (2.0 * l);
    Ok((gp, gm, gz))
}

/// Trajectory obtained by integrating rates:
/// `lambda = exp(-G+/2 - G-/2 - 2 Gz)`, `lambda_z = exp(-G+ - G-)`,
/// `t_z = lambda_z * int_0^t (g+ - g-) exp(G+ + G-) dt'`,
/// with `G` the running integrals of the rates.
///
/// The running integrals are computed once by an adaptive forward sweep
/// over `[0, t_max]`; queries re-integrate only from the nearest stored
/// checkpoint, so evaluation is pure and cheap.
pub struct IntegratedTrajectory<R: Rates> {
    rates: R,
    /// accepted-step checkpoints: (t, [G+, G-, Gz, I])
    checkpoints: Vec<(f64, [f64; 4])>,
    tol: f64,
}

fn rate_ode<R: Rates>(rates: &R) -> impl Fn(f64, &[f64; 4]) -> [f64; 4] + '_ {
    move |t, y| {
        let (gp, gm, gz) = rates.rates(t);
        let growth = (y[0] + y[1]).exp();
        [gp, gm, gz, (gp - gm) * growth]
    }
}

/// Build the trajectory for rates integrable on `[0, t_max]`.
pub fn trajectory_from_rates<R: Rates>(
    rates: R,
    t_max: f64,
) -> Result<IntegratedTrajectory<R>, DynamicsError> {
    if !(t_max > 0.0) {
        return Err(DynamicsError::InvalidInput(format!(
            "t_max must be positive, got {t_max}"
        )));
    }
    let tol = 1e-12;
    let mut checkpoints = vec![(0.0, [0.0; 4])];
    quad::rk45_sweep(
        &rate_ode(&rates),
        0.0,
        t_max,
        [0.0; 4],
        tol,
        |t, y| checkpoints.push((t, *y)),
    )?;
    Ok(IntegratedTrajectory {
        rates,
        checkpoints,
        tol,
    })
}

impl<R: Rates> IntegratedTrajectory<R> {
    pub fn rates(&self) -> &R {
        &self.rates
    }

    fn integrals_at(&self, t: f64) -> [f64; 4] {
        if t <= 0.0 {
            return [0.0; 4];
        }
        let idx = self
            .checkpoints
            .partition_point(|&(ct, _)| ct <= t)
            .saturating_sub(1);
        let (t0, y0) = self.checkpoints[idx];
        if t0 == t {
            return y0;
        }
        quad::rk45_sweep(&rate_ode(&self.rates), t0, t, y0, self.tol, |_, _| {})
            .expect("forward sweep failed between stored checkpoints")
    }
}

impl<R: Rates> Trajectory for IntegratedTrajectory<R> {
    fn params(&self, t: f64) -> (f64, f64, f64) {
        let y = self.integrals_at(t);
        let lz = (-y[0] - y[1]).exp();
        let l = (-0.5 * y[0] - 0.5 * y[1] - 2.0 * y[2]).exp();
        (l, lz, lz * y[3])
    }

    // exact inversion of the rate relations
    fn derivs(&self, t: f64) -> (f64, f64, f64) {
        let (l, lz, tz) = self.params(t);
        let (gp, gm, gz) = self.rates.rates(t);
        let dl = -(0.5 * (gp + gm) + 2.0 * gz) * l;
        let dlz = -(gp + gm) * lz;
        let dtz = (gp - gm) - (gp + gm) * tz;
        (dl, dlz, dtz)
    }
}

/// The intermediate propagator between `t1` and `t2`:
/// `Lambda(t2, t1) = Phi(t2) Phi(t1)^-1`.
pub fn intermediate_map(
    tr: &(impl Trajectory + ?Sized),
    t1: f64,
    t2: f64,
) -> Result<PhaseCovChannel, DynamicsError> {
    if !(t1 >= 0.0 && t2 >= t1) {
        return Err(DynamicsError::InvalidInput(format!(
            "need 0 <= t1 <= t2, got t1 = {t1}, t2 = {t2}"
        )));
    }
    let c2 = tr.channel_at(t2);
    let c1 = tr.channel_at(t1);
    Ok(c2.compose(&c1.invert()?))
}

/// CP-divisibility at time `t`: all three rates non-negative.
pub fn is_cp_divisible_at(rates: &(impl Rates + ?Sized), t: f64) -> Verdict {
    let (gp, gm, gz) = rates.rates(t);
    Verdict::classify(gp.min(gm).min(gz))
}

/// P-divisibility at time `t`: `gamma_pm >= 0` and
/// `sqrt(gamma_plus gamma_minus) + 2 gamma_z > 0`.
///
/// On the boundary (the square-root combination vanishing within
/// tolerance while the rates are non-negative) the second-order condition
/// `d gamma_z/dt > gamma_z (gamma_plus + gamma_minus)` decides; equality
/// there as well is reported as marginal.
pub fn is_p_divisible_at(rates: &(impl Rates + ?Sized), t: f64) -> Verdict {
    let (gp, gm, gz) = rates.rates(t);
    if gp < -EPS || gm < -EPS {
        return Verdict::classify(gp.min(gm));
    }
    let g = (gp.max(0.0) * gm.max(0.0)).sqrt() + 2.0 * gz;
    if g.abs() <= EPS {
        let slack = rates.gamma_z_derivative(t) - gz * (gp + gm);
        return Verdict::classify(slack);
    }
    Verdict::classify(gp.min(gm).min(g))
}

/// Monotone decrease of state distinguishability at time `t`:
/// `gamma_plus + gamma_minus >= 0` and
/// `gamma_plus + gamma_minus + 4 gamma_z >= 0`.
pub fn blp_monotone_at(rates: &(impl Rates + ?Sized), t: f64) -> Verdict {
    let (gp, gm, gz) = rates.rates(t);
    let s = gp + gm;
    Verdict::classify(s.min(s + 4.0 * gz))
}

/// Excited-state population at time `t` for initial
/// `rho0_z = tr[rho(0) sigma_z]`:
/// `p(t) = (1 + t_z(t) + lambda_z(t) rho0_z) / 2`.
pub fn population(
    tr: &(impl Trajectory + ?Sized),
    rho0_z: f64,
    t: f64,
) -> Result<f64, DynamicsError> {
    if !(-1.0..=1.0).contains(&rho0_z) {
        return Err(DynamicsError::InvalidInput(format!(
            "rho0_z must be in [-1, 1], got {rho0_z}"
        )));
    }
    let (_, lz, tz) = tr.params(t);
    Ok(0.5 * (1.0 + tz + lz * rho0_z))
}

/// A maximal run of grid times sharing one verdict status. Endpoints that
/// were refined by bisection carry the crossing time to 1e-8.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatusInterval {
    pub start: f64,
    pub end: f64,
    pub status: Status,
}

/// Per-time divisibility flags on a uniform grid plus merged intervals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DivisibilityReport {
    pub grid: Vec<f64>,
    pub cp_divisible: Vec<Verdict>,
    pub p_divisible: Vec<Verdict>,
    pub blp_monotone: Vec<Verdict>,
    pub cp_intervals: Vec<StatusInterval>,
    pub p_intervals: Vec<StatusInterval>,
    pub blp_intervals: Vec<StatusInterval>,
}

fn refine_crossing<F: Fn(f64) -> Status>(status_at: &F, left: f64, right: f64) -> f64 {
    let left_status = status_at(left);
    let mut lo = left;
    let mut hi = right;
    while hi - lo > 1e-8 {
        let mid = 0.5 * (lo + hi);
        if status_at(mid) == left_status {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn merge_intervals<F: Fn(f64) -> Status>(
    grid: &[f64],
    verdicts: &[Verdict],
    status_at: &F,
) -> Vec<StatusInterval> {
    let mut intervals: Vec<StatusInterval> = Vec::new();
    for (i, (&t, v)) in grid.iter().zip(verdicts).enumerate() {
        match intervals.last_mut() {
            Some(last) if last.status == v.status => last.end = t,
            _ => {
                let start = if i == 0 {
                    t
                } else {
                    // a classifier flipped between grid neighbors: refine
                    let crossing = refine_crossing(status_at, grid[i - 1], t);
                    if let Some(last) = intervals.last_mut() {
                        last.end = crossing;
                    }
                    crossing
                };
                intervals.push(StatusInterval {
                    start,
                    end: t,
                    status: v.status,
                });
            }
        }
    }
    intervals
}

/// Evaluate the three per-time classifiers on a uniform grid over
/// `[0, t_max]`, merge equal consecutive verdicts into intervals, and
/// validate the implication chain CP-divisible => P-divisible =>
/// distinguishability-monotone at every grid point.
pub fn classify_intervals(
    rates: &(impl Rates + ?Sized),
    t_max: f64,
    n_grid: usize,
) -> Result<DivisibilityReport, DynamicsError> {
    if !(t_max > 0.0) {
        return Err(DynamicsError::InvalidInput(format!(
            "t_max must be positive, got {t_max}"
        )));
    }
    if n_grid < 2 {
        return Err(DynamicsError::InvalidInput(format!(
            "n_grid must be at least 2, got {n_grid}"
        )));
    }
    let grid: Vec<f64> = (0..n_grid)
        .map(|i| t_max * i as f64 / (n_grid - 1) as f64)
        .collect();
    let cp: Vec<Verdict> = grid.iter().map(|&t| is_cp_divisible_at(rates, t)).collect();
    let p: Vec<Verdict> = grid.iter().map(|&t| is_p_divisible_at(rates, t)).collect();
    let blp: Vec<Verdict> = grid.iter().map(|&t| blp_monotone_at(rates, t)).collect();
    for ((&t, c), (pv, b)) in grid.iter().zip(&cp).zip(p.iter().zip(&blp)) {
        // modulo the marginal band: only a strict holds followed by a
        // strict fails is a violation
        if (c.holds() && pv.fails()) || (pv.holds() && b.fails()) {
            return Err(DynamicsError::InconsistentVerdicts { t });
        }
    }
    let cp_intervals = merge_intervals(&grid, &cp, &|t| is_cp_divisible_at(rates, t).status);
    let p_intervals = merge_intervals(&grid, &p, &|t| is_p_divisible_at(rates, t).status);
    let blp_intervals = merge_intervals(&grid, &blp, &|t| blp_monotone_at(rates, t).status);
    Ok(DivisibilityReport {
        grid,
        cp_divisible: cp,
        p_divisible: p,
        blp_monotone: blp,
        cp_intervals,
        p_intervals,
        blp_intervals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Closed-form semigroup trajectory used as an oracle.
    struct SemigroupOracle {
        gp: f64,
        gm: f64,
        gz: f64,
    }

    impl SemigroupOracle {
        fn params(&self, t: f64) -> (f64, f64, f64) {
            let s = self.gp + self.gm;
            let l = (-0.5 * (s + 4.0 * self.gz) * t).exp();
            let lz = (-s * t).exp();
            let tz = if s == 0.0 {
                0.0
            } else {
                (self.gp - self.gm) / s * (1.0 - lz)
            };
            (l, lz, tz)
        }
    }

    impl Trajectory for SemigroupOracle {
        fn params(&self, t: f64) -> (f64, f64, f64) {
            SemigroupOracle::params(self, t)
        }
        fn derivs(&self, t: f64) -> (f64, f64, f64) {
            let s = self.gp + self.gm;
            let (l, lz, _) = self.params(t);
            (
                -0.5 * (s + 4.0 * self.gz) * l,
                -s * lz,
                (self.gp - self.gm) * lz,
            )
        }
    }

    #[test]
    fn rates_from_semigroup_trajectory_recover_constants() {
        let tr = SemigroupOracle {
            gp: 2.0,
            gm: 1.0,
            gz: 0.25,
        };
        for t in [0.0, 0.3, 1.0, 2.5] {
            let (gp, gm, gz) = rates_from_trajectory(&tr, t).unwrap();
            assert_abs_diff_eq!(gp, 2.0, epsilon = 1e-10);
            assert_abs_diff_eq!(gm, 1.0, epsilon = 1e-10);
            assert_abs_diff_eq!(gz, 0.25, epsilon = 1e-10);
        }
    }

    #[test]
    fn rates_of_identity_trajectory_vanish() {
        struct Id;
        impl Trajectory for Id {
            fn params(&self, _t: f64) -> (f64, f64, f64) {
                (1.0, 1.0, 0.0)
            }
        }
        let (gp, gm, gz) = rates_from_trajectory(&Id, 0.7).unwrap();
        assert_abs_diff_eq!(gp, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(gm, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(gz, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn rates_require_invertibility() {
        struct Dead;
        impl Trajectory for Dead {
            fn params(&self, _t: f64) -> (f64, f64, f64) {
                (0.0, 1.0, 0.0)
            }
        }
        assert!(matches!(
            rates_from_trajectory(&Dead, 1.0),
            Err(DynamicsError::Channel(ChannelError::SingularChannel(_)))
        ));
    }

    #[test]
    fn trajectory_from_zero_rates_is_identity() {
        let tr = trajectory_from_rates(
            ConstantRates {
                gamma_plus: 0.0,
                gamma_minus: 0.0,
                gamma_z: 0.0,
            },
            5.0,
        )
        .unwrap();
        for t in [0.0, 0.5, 2.0, 5.0] {
            let (l, lz, tz) = tr.params(t);
            assert_abs_diff_eq!(l, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(lz, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(tz, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn trajectory_from_constant_rates_matches_closed_form() {
        let tr = trajectory_from_rates(
            ConstantRates {
                gamma_plus: 2.0,
                gamma_minus: 1.0,
                gamma_z: 0.25,
            },
            5.0,
        )
        .unwrap();
        let (l, lz, tz) = tr.params(1.0);
        assert_abs_diff_eq!(l, (-2.0f64).exp(), epsilon = 1e-9);
        assert_abs_diff_eq!(lz, (-3.0f64).exp(), epsilon = 1e-9);
        assert_abs_diff_eq!(tz, (1.0 - (-3.0f64).exp()) / 3.0, epsilon = 1e-9);

        // out-of-order and repeated queries are pure
        let oracle = SemigroupOracle {
            gp: 2.0,
            gm: 1.0,
            gz: 0.25,
        };
        for t in [3.0, 0.2, 4.9, 0.2, 1.7] {
            let (l, lz, tz) = tr.params(t);
            let (ol, olz, otz) = oracle.params(t);
            assert_abs_diff_eq!(l, ol, epsilon = 1e-9);
            assert_abs_diff_eq!(lz, olz, epsilon = 1e-9);
            assert_abs_diff_eq!(tz, otz, epsilon = 1e-9);
        }
    }

    #[test]
    fn trajectory_from_oscillating_rates_matches_closed_form() {
        // rates of the non-monotone population family (nu = 1, omega = 2)
        let (nu, om) = (1.0f64, 2.0f64);
        let amp = 2.0 * nu / (4.0 * nu * nu + om * om).sqrt();
        let rates = FnRates(move |t: f64| {
            let osc = nu / (4.0 * nu * nu + om * om).sqrt()
                * (2.0 * nu * (om * t).sin() + om * (om * t).cos());
            (nu + osc, nu - osc, 0.0)
        });
        let tr = trajectory_from_rates(rates, 6.0).unwrap();
        for t in [0.3, 1.0, 2.4, 5.5] {
            let (l, lz, tz) = tr.params(t);
            assert_abs_diff_eq!(l, (-nu * t).exp(), epsilon = 1e-8);
            assert_abs_diff_eq!(lz, (-2.0 * nu * t).exp(), epsilon = 1e-8);
            assert_abs_diff_eq!(tz, amp * (om * t).sin(), epsilon = 1e-8);
        }
    }

    #[test]
    fn intermediate_map_at_equal_times_is_identity() {
        let tr = SemigroupOracle {
            gp: 2.0,
            gm: 1.0,
            gz: 0.25,
        };
        let m = intermediate_map(&tr, 0.7, 0.7).unwrap();
        assert_abs_diff_eq!(m.lambda, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.lambda_z, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.t_z, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn intermediate_map_of_semigroup_depends_on_time_difference() {
        let tr = SemigroupOracle {
            gp: 2.0,
            gm: 1.0,
            gz: 0.25,
        };
        let m = intermediate_map(&tr, 0.5, 1.0).unwrap();
        let (l, lz, tz) = tr.params(0.5);
        assert_abs_diff_eq!(m.lambda, l, epsilon = 1e-10);
        assert_abs_diff_eq!(m.lambda_z, lz, epsilon = 1e-10);
        assert_abs_diff_eq!(m.t_z, tz, epsilon = 1e-10);
        // composition closes
        let back = m.compose(&tr.channel_at(0.5));
        let full = tr.channel_at(1.0);
        assert_abs_diff_eq!(back.lambda, full.lambda, epsilon = 1e-10);
        assert_abs_diff_eq!(back.t_z, full.t_z, epsilon = 1e-10);
    }

    #[test]
    fn intermediate_map_rejects_reversed_times() {
        let tr = SemigroupOracle {
            gp: 1.0,
            gm: 1.0,
            gz: 0.0,
        };
        assert!(intermediate_map(&tr, 1.0, 0.5).is_err());
    }

    #[test]
    fn cp_divisibility_verdicts() {
        let good = ConstantRates {
            gamma_plus: 1.0,
            gamma_minus: 1.0,
            gamma_z: 0.0,
        };
        // gamma_z = 0 sits on the boundary
        assert!(is_cp_divisible_at(&good, 1.0).holds_or_marginal());

        let bad = ConstantRates {
            gamma_plus: 1.0,
            gamma_minus: 1.0,
            gamma_z: -0.1,
        };
        assert!(is_cp_divisible_at(&bad, 1.0).fails());
    }

    #[test]
    fn p_divisibility_examples() {
        let r = ConstantRates {
            gamma_plus: 1.0,
            gamma_minus: 1.0,
            gamma_z: -0.4,
        };
        // sqrt(1) - 0.8 = 0.2 > 0, P-divisible while CP-divisibility fails
        let v = is_p_divisible_at(&r, 0.0);
        assert!(v.holds());
        assert_abs_diff_eq!(v.margin, 0.2, epsilon = 1e-12);
        assert!(is_cp_divisible_at(&r, 0.0).fails());

        let r = ConstantRates {
            gamma_plus: 1.0,
            gamma_minus: 1.0,
            gamma_z: -0.6,
        };
        assert!(is_p_divisible_at(&r, 0.0).fails());

        // one vanishing rate with gamma_z >= 0: CP, hence P
        let r = ConstantRates {
            gamma_plus: 0.0,
            gamma_minus: 1.0,
            gamma_z: 0.5,
        };
        assert!(is_p_divisible_at(&r, 0.0).holds_or_marginal());

        // negative rate: case (i)
        let r = ConstantRates {
            gamma_plus: -0.1,
            gamma_minus: 1.0,
            gamma_z: 1.0,
        };
        assert!(is_p_divisible_at(&r, 0.0).fails());
    }

    #[test]
    fn p_divisibility_boundary_uses_second_order_rule() {
        // gamma_z < 0 with sqrt(g+ g-) + 2 gz = 0 exactly; constant rates
        // have d gz/dt = 0 and gz (g+ + g-) < 0, so the second-order
        // condition 0 > gz (g+ + g-) holds strictly
        let r = ConstantRates {
            gamma_plus: 1.0,
            gamma_minus: 1.0,
            gamma_z: -0.5,
        };
        let v = is_p_divisible_at(&r, 0.0);
        assert!(v.holds());
        assert_abs_diff_eq!(v.margin, 1.0, epsilon = 1e-12);

        // equality in the second-order condition as well: marginal
        let r = ConstantRates {
            gamma_plus: 0.0,
            gamma_minus: 0.0,
            gamma_z: 0.0,
        };
        assert!(is_p_divisible_at(&r, 0.0).is_marginal());
    }

    #[test]
    fn blp_examples() {
        let r = ConstantRates {
            gamma_plus: 1.0,
            gamma_minus: 1.0,
            gamma_z: -0.6,
        };
        // 1 + 1 - 2.4 < 0
        assert!(blp_monotone_at(&r, 0.0).fails());

        let r = ConstantRates {
            gamma_plus: 4.0,
            gamma_minus: 1.0,
            gamma_z: -0.6,
        };
        assert!(blp_monotone_at(&r, 0.0).holds());
        assert!(is_p_divisible_at(&r, 0.0).holds());
    }

    #[test]
    fn population_of_identity_trajectory() {
        struct Id;
        impl Trajectory for Id {
            fn params(&self, _t: f64) -> (f64, f64, f64) {
                (1.0, 1.0, 0.0)
            }
        }
        assert_abs_diff_eq!(population(&Id, 1.0, 3.0).unwrap(), 1.0, epsilon = 1e-15);
        assert!(population(&Id, 1.5, 0.0).is_err());
    }

    #[test]
    fn classify_intervals_zero_rates() {
        let r = ConstantRates {
            gamma_plus: 0.0,
            gamma_minus: 0.0,
            gamma_z: 0.0,
        };
        let rep = classify_intervals(&r, 2.0, 11).unwrap();
        assert_eq!(rep.grid.len(), 11);
        // everything marginal-or-holds everywhere; a single interval each
        assert_eq!(rep.cp_intervals.len(), 1);
        assert_eq!(rep.blp_intervals.len(), 1);
        assert!(rep.cp_divisible.iter().all(|v| v.holds_or_marginal()));
        assert!(rep.p_divisible.iter().all(|v| v.holds_or_marginal()));
        assert!(rep.blp_monotone.iter().all(|v| v.holds_or_marginal()));
    }

    #[test]
    fn classify_intervals_refines_crossing() {
        // gamma_z crosses zero at t = 1.25 while gamma_pm stay positive
        let rates = FnRates(|t: f64| (1.0, 1.0, 1.25 - t));
        let rep = classify_intervals(&rates, 2.0, 11).unwrap();
        assert_eq!(rep.cp_intervals.len(), 2);
        assert_eq!(rep.cp_intervals[0].status, Status::Holds);
        assert_eq!(rep.cp_intervals[1].status, Status::Fails);
        assert_abs_diff_eq!(rep.cp_intervals[0].end, 1.25, epsilon = 1e-7);
        assert_abs_diff_eq!(rep.cp_intervals[1].start, 1.25, epsilon = 1e-7);
    }

    #[test]
    fn classify_intervals_validates_config() {
        let r = ConstantRates {
            gamma_plus: 1.0,
            gamma_minus: 1.0,
            gamma_z: 0.0,
        };
        assert!(classify_intervals(&r, -1.0, 10).is_err());
        assert!(classify_intervals(&r, 1.0, 1).is_err());
    }

    #[test]
    fn sampled_rates_interpolate() {
        let r = SampledRates::new(
            vec![0.0, 1.0, 2.0],
            vec![0.0, 2.0, 2.0],
            vec![1.0, 1.0, 1.0],
            vec![0.0, 0.0, -1.0],
        )
        .unwrap();
        let (gp, gm, gz) = r.rates(0.5);
        assert_abs_diff_eq!(gp, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(gm, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(gz, 0.0, epsilon = 1e-12);
        // clamped outside the range
        assert_eq!(r.rates(5.0), (2.0, 1.0, -1.0));
        // validation
        assert!(SampledRates::new(vec![0.0], vec![0.0], vec![0.0], vec![0.0]).is_err());
        assert!(SampledRates::new(
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            vec![0.0, 0.0]
        )
        .is_err());
    }

    #[test]
    fn round_trip_rates_to_trajectory_to_rates() {
        let rates = FnRates(|t: f64| (1.0 + 0.3 * (2.0 * t).sin(), 0.8, -0.2 * (t).cos()));
        let tr = trajectory_from_rates(&rates, 5.0).unwrap();
        for t in [0.2, 1.0, 2.2, 4.8] {
            let (gp, gm, gz) = rates_from_trajectory(&tr, t).unwrap();
            let (ep, em, ez) = rates.rates(t);
            assert_abs_diff_eq!(gp, ep, epsilon = 1e-7);
            assert_abs_diff_eq!(gm, em, epsilon = 1e-7);
            assert_abs_diff_eq!(gz, ez, epsilon = 1e-7);
        }
    }
}
