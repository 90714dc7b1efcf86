//! Built-in parameterized dynamics families, each exposing an analytic
//! trajectory/rates pair. The families double as test oracles and CLI
//! presets.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{rates_from_trajectory, Rates, Trajectory};
use crate::quad;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyError {
    #[error("parameter out of domain: {0}")]
    DomainError(String),
    #[error("running integral of f could not be computed: {0}")]
    IntegralFailure(String),
}

/// Object-safe bundle of a trajectory and its rates.
pub trait Family: Trajectory + Rates {}
impl<T: Trajectory + Rates> Family for T {}

/// Markov semigroup with constant non-negative rates:
/// `lambda = exp(-(g+ + g- + 4 gz) t / 2)`, `lambda_z = exp(-(g+ + g-) t)`,
/// `t_z = (g+ - g-)/(g+ + g-) (1 - exp(-(g+ + g-) t))`.
///
/// When `g+ + g- = 0` (pure dephasing) `t_z` is identically zero by the
/// limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Semigroup {
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub gamma_z: f64,
}

impl Semigroup {
    pub fn new(gamma_plus: f64, gamma_minus: f64, gamma_z: f64) -> Result<Self, FamilyError> {
        if gamma_plus < 0.0 || gamma_minus < 0.0 || gamma_z < 0.0 {
            return Err(FamilyError::DomainError(format!(
                "semigroup rates must be non-negative, got ({gamma_plus}, {gamma_minus}, {gamma_z})"
            )));
        }
        Ok(Semigroup {
            gamma_plus,
            gamma_minus,
            gamma_z,
        })
    }

    fn rate_sum(&self) -> f64 {
        self.gamma_plus + self.gamma_minus
    }
}

impl Trajectory for Semigroup {
    fn params(&self, t: f64) -> (f64, f64, f64) {
        let s = self.rate_sum();
        let l = (-0.5 * (s + 4.0 * self.gamma_z) * t).exp();
        let lz = (-s * t).exp();
        let tz = if s == 0.0 {
            0.0
        } else {
            (self.gamma_plus - self.gamma_minus) / s * (1.0 - lz)
        };
        (l, lz, tz)
    }

    fn derivs(&self, t: f64) -> (f64, f64, f64) {
        let s = self.rate_sum();
        let (l, lz, _) = self.params(t);
        (
            -0.5 * (s + 4.0 * self.gamma_z) * l,
            -s * lz,
            (self.gamma_plus - self.gamma_minus) * lz,
        )
    }
}

impl Rates for Semigroup {
    fn rates(&self, _t: f64) -> (f64, f64, f64) {
        (self.gamma_plus, self.gamma_minus, self.gamma_z)
    }
    fn gamma_z_derivative(&self, _t: f64) -> f64 {
        0.0
    }
}

/// CP-divisible dynamics whose population is non-monotonic for every
/// initial state: `lambda = exp(-nu t)`, `lambda_z = exp(-2 nu t)`,
/// `t_z = (2 nu / sqrt(4 nu^2 + omega^2)) sin(omega t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonmonotonePopulation {
    pub nu: f64,
    pub omega: f64,
}

impl NonmonotonePopulation {
    pub fn new(nu: f64, omega: f64) -> Result<Self, FamilyError> {
        if !(nu > 0.0 && omega > 0.0) {
            return Err(FamilyError::DomainError(format!(
                "need nu > 0 and omega > 0, got ({nu}, {omega})"
            )));
        }
        Ok(NonmonotonePopulation { nu, omega })
    }

    /// Oscillation amplitude `2 nu / sqrt(4 nu^2 + omega^2)`.
    pub fn amplitude(&self) -> f64 {
        2.0 * self.nu / (4.0 * self.nu * self.nu + self.omega * self.omega).sqrt()
    }

    /// Time past which the population is non-monotonic for every initial
    /// state: `(1 / 2 nu) ln(sqrt(4 nu^2 + omega^2) / 2 nu)`.
    pub fn nonmonotone_onset(&self) -> f64 {
        let root = (4.0 * self.nu * self.nu + self.omega * self.omega).sqrt();
        (root / (2.0 * self.nu)).ln() / (2.0 * self.nu)
    }
}

impl Trajectory for NonmonotonePopulation {
    fn params(&self, t: f64) -> (f64, f64, f64) {
        (
            (-self.nu * t).exp(),
            (-2.0 * self.nu * t).exp(),
            self.amplitude() * (self.omega * t).sin(),
        )
    }

    fn derivs(&self, t: f64) -> (f64, f64, f64) {
        (
            -self.nu * (-self.nu * t).exp(),
            -2.0 * self.nu * (-2.0 * self.nu * t).exp(),
            self.amplitude() * self.omega * (self.omega * t).cos(),
        )
    }
}

impl Rates for NonmonotonePopulation {
    fn rates(&self, t: f64) -> (f64, f64, f64) {
        let root = (4.0 * self.nu * self.nu + self.omega * self.omega).sqrt();
        let osc = self.nu / root
            * (2.0 * self.nu * (self.omega * t).sin() + self.omega * (self.omega * t).cos());
        (self.nu + osc, self.nu - osc, 0.0)
    }
    fn gamma_z_derivative(&self, _t: f64) -> f64 {
        0.0
    }
}

/// Commutative eternal CP-indivisible family:
/// `lambda = (1/2) sqrt((1 + u)^2 - a^2 (1 - u)^2)` with `u = exp(-2 nu t)`,
/// `lambda_z = u`, `t_z = a (1 - u)`; rates `gamma_pm = nu (1 +- a)` and
/// `gamma_z(t) < 0` for all `t > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EternalCommutative {
    pub a: f64,
    pub nu: f64,
}

impl EternalCommutative {
    pub fn new(a: f64, nu: f64) -> Result<Self, FamilyError> {
        if !(a.abs() < 1.0) {
            return Err(FamilyError::DomainError(format!("need |a| < 1, got {a}")));
        }
        if !(nu > 0.0) {
            return Err(FamilyError::DomainError(format!("need nu > 0, got {nu}")));
        }
        Ok(EternalCommutative { a, nu })
    }
}

impl Trajectory for EternalCommutative {
    fn params(&self, t: f64) -> (f64, f64, f64) {
        let u = (-2.0 * self.nu * t).exp();
        let g = (1.0 + u).powi(2) - self.a * self.a * (1.0 - u).powi(2);
        (0.5 * g.max(0.0).sqrt(), u, self.a * (1.0 - u))
    }

    fn derivs(&self, t: f64) -> (f64, f64, f64) {
        let u = (-2.0 * self.nu * t).exp();
        let du = -2.0 * self.nu * u;
        let (l, _, _) = self.params(t);
        let dl = du * ((1.0 + u) + self.a * self.a * (1.0 - u)) / (4.0 * l);
        (dl, du, -self.a * du)
    }
}

impl Rates for EternalCommutative {
    fn rates(&self, t: f64) -> (f64, f64, f64) {
        let (a, nu) = (self.a, self.nu);
        let num = nu * (1.0 - a * a) * (2.0 * nu * t).sinh();
        let den = 2.0 * (1.0 + a * a + (1.0 - a * a) * (2.0 * nu * t).cosh());
        (nu * (1.0 + a), nu * (1.0 - a), -num / den)
    }

    fn gamma_z_derivative(&self, t: f64) -> f64 {
        let (a, nu) = (self.a, self.nu);
        let c = 1.0 - a * a;
        let d = 1.0 + a * a + c * (2.0 * nu * t).cosh();
        let n = (2.0 * nu * t).sinh();
        let dn = 2.0 * nu * (2.0 * nu * t).cosh();
        let dd = 2.0 * nu * c * n;
        -nu * c * (dn * d - n * dd) / (2.0 * d * d)
    }
}

/// Non-commutative eternal CP-indivisible family:
/// `lambda = (1/2) sqrt((1 + u)^2 - b^2 u (1 - u)^2)` with
/// `u = exp(-2 nu t)`, `lambda_z = u`, `t_z = b exp(-nu t) (1 - u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EternalNoncommutative {
    pub b: f64,
    pub nu: f64,
}

impl EternalNoncommutative {
    pub fn new(b: f64, nu: f64) -> Result<Self, FamilyError> {
        if !(b != 0.0 && b.abs() <= 1.0) {
            return Err(FamilyError::DomainError(format!(
                "need 0 < |b| <= 1, got {b}"
            )));
        }
        if !(nu > 0.0) {
            return Err(FamilyError::DomainError(format!("need nu > 0, got {nu}")));
        }
        Ok(EternalNoncommutative { b, nu })
    }
}

impl Trajectory for EternalNoncommutative {
    fn params(&self, t: f64) -> (f64, f64, f64) {
        let u = (-2.0 * self.nu * t).exp();
        let v = (-self.nu * t).exp();
        let g = (1.0 + u).powi(2) - self.b * self.b * u * (1.0 - u).powi(2);
        (0.5 * g.max(0.0).sqrt(), u, self.b * v * (1.0 - u))
    }

    fn derivs(&self, t: f64) -> (f64, f64, f64) {
        let u = (-2.0 * self.nu * t).exp();
        let v = (-self.nu * t).exp();
        let du = -2.0 * self.nu * u;
        let b2 = self.b * self.b;
        // d/du of (1+u)^2 - b^2 u (1-u)^2
        let dg = 2.0 * (1.0 + u) - b2 * (1.0 - u) * (1.0 - 3.0 * u);
        let (l, _, _) = self.params(t);
        let dl = dg * du / (8.0 * l);
        // t_z = b (v - v^3), dv/dt = -nu v
        let dtz = self.b * self.nu * (3.0 * v.powi(3) - v);
        (dl, du, dtz)
    }
}

impl Rates for EternalNoncommutative {
    fn rates(&self, t: f64) -> (f64, f64, f64) {
        let (b, nu) = (self.b, self.nu);
        let e2 = (2.0 * nu * t).exp();
        let e3 = (3.0 * nu * t).exp();
        let ch = (nu * t).cosh();
        let sh = (nu * t).sinh();
        let drive = b * (-2.0 * nu * t).exp() * ch;
        let gz = -nu * (1.0 - (-2.0 * nu * t).exp()) * (e3 * ch - b * b)
            / (4.0 * (e2 * ch * ch - b * b * sh * sh));
        (nu * (1.0 + drive), nu * (1.0 - drive), gz)
    }
}

/// Named non-negative weight functions for the memory-kernel example
/// family, restricted so they stay serializable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NamedFn {
    ExpDecay { c: f64, rate: f64 },
    Cosine { c: f64, omega: f64 },
    Constant { c: f64 },
}

impl NamedFn {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            NamedFn::ExpDecay { c, rate } => c * (-rate * t).exp(),
            NamedFn::Cosine { c, omega } => c * (omega * t).cos(),
            NamedFn::Constant { c } => c,
        }
    }

    /// Closed-form running integral, used as a quadrature oracle in tests.
    pub fn integral(&self, t: f64) -> f64 {
        match *self {
            NamedFn::ExpDecay { c, rate } => {
                if rate == 0.0 {
                    c * t
                } else {
                    c * (1.0 - (-rate * t).exp()) / rate
                }
            }
            NamedFn::Cosine { c, omega } => {
                if omega == 0.0 {
                    c * t
                } else {
                    c * (omega * t).sin() / omega
                }
            }
            NamedFn::Constant { c } => c * t,
        }
    }
}

/// Straight-line trajectories driven by a weight function `f`:
/// `lambda = 1 - a F(t)`, `lambda_z = 1 - (a+ + a-) F(t)`,
/// `t_z = (a+ - a-) F(t)` with `F(t) = int_0^t f`.
///
/// The running integral is computed by an adaptive forward sweep with
/// stored checkpoints, like the rate integrals in `dynamics`.
pub struct KernelExample {
    pub a: f64,
    pub a_plus: f64,
    pub a_minus: f64,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    checkpoints: Vec<(f64, f64)>,
}

impl KernelExample {
    /// Build and validate the range condition
    /// `0 <= F(t) <= 2 / (a + max(a+, a-))` on the sweep grid over
    /// `[0, t_max]`.
    pub fn new(
        a: f64,
        a_plus: f64,
        a_minus: f64,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        t_max: f64,
    ) -> Result<Self, FamilyError> {
        let fam = Self::new_unchecked(a, a_plus, a_minus, f, t_max)?;
        let bound = 2.0 / (a + a_plus.max(a_minus));
        for &(t, f_int) in &fam.checkpoints {
            if !(-1e-12..=bound + 1e-12).contains(&f_int) {
                return Err(FamilyError::DomainError(format!(
                    "running integral F({t}) = {f_int} outside [0, {bound}]"
                )));
            }
        }
        Ok(fam)
    }

    /// Build without the F-range validation, for analyzing dynamics that
    /// leave the admissible region (e.g. sign-changing f).
    pub fn new_unchecked(
        a: f64,
        a_plus: f64,
        a_minus: f64,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        t_max: f64,
    ) -> Result<Self, FamilyError> {
        if !(a >= a_plus && a >= a_minus && a_plus > 0.0 && a_minus > 0.0) {
            return Err(FamilyError::DomainError(format!(
                "need a >= a_pm > 0, got a = {a}, a+ = {a_plus}, a- = {a_minus}"
            )));
        }
        if !(t_max > 0.0) {
            return Err(FamilyError::DomainError(format!(
                "need t_max > 0, got {t_max}"
            )));
        }
        let f: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(f);
        let mut checkpoints = vec![(0.0, 0.0)];
        let fc = Arc::clone(&f);
        quad::rk45_sweep(
            &move |t, _y: &[f64; 1]| [fc(t)],
            0.0,
            t_max,
            [0.0],
            1e-12,
            |t, y| checkpoints.push((t, y[0])),
        )
        .map_err(|e| FamilyError::IntegralFailure(e.to_string()))?;
        Ok(KernelExample {
            a,
            a_plus,
            a_minus,
            f,
            checkpoints,
        })
    }

    pub fn from_named(
        a: f64,
        a_plus: f64,
        a_minus: f64,
        f: NamedFn,
        t_max: f64,
    ) -> Result<Self, FamilyError> {
        Self::new(a, a_plus, a_minus, move |t| f.eval(t), t_max)
    }

    /// Running integral `F(t)`, re-integrated from the nearest stored
    /// checkpoint.
    pub fn running_integral(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let idx = self
            .checkpoints
            .partition_point(|&(ct, _)| ct <= t)
            .saturating_sub(1);
        let (t0, y0) = self.checkpoints[idx];
        if t0 == t {
            return y0;
        }
        let f = Arc::clone(&self.f);
        quad::rk45_sweep(
            &move |x, _y: &[f64; 1]| [f(x)],
            t0,
            t,
            [y0],
            1e-12,
            |_, _| {},
        )
        .expect("running integral sweep failed between stored checkpoints")[0]
    }
}

impl Trajectory for KernelExample {
    fn params(&self, t: f64) -> (f64, f64, f64) {
        let f_int = self.running_integral(t);
        (
            1.0 - self.a * f_int,
            1.0 - (self.a_plus + self.a_minus) * f_int,
            (self.a_plus - self.a_minus) * f_int,
        )
    }

    fn derivs(&self, t: f64) -> (f64, f64, f64) {
        let ft = (self.f)(t);
        (
            -self.a * ft,
            -(self.a_plus + self.a_minus) * ft,
            (self.a_plus - self.a_minus) * ft,
        )
    }
}

impl Rates for KernelExample {
    fn rates(&self, t: f64) -> (f64, f64, f64) {
        rates_from_trajectory(self, t).expect("kernel example trajectory became singular")
    }
}

/// Serializable family descriptor, shared with the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum FamilySpec {
    Semigroup {
        gamma_plus: f64,
        gamma_minus: f64,
        gamma_z: f64,
    },
    NonmonotonePopulation {
        nu: f64,
        omega: f64,
    },
    EternalCommutative {
        a: f64,
        nu: f64,
    },
    EternalNoncommutative {
        b: f64,
        nu: f64,
    },
    KernelExample {
        a: f64,
        a_plus: f64,
        a_minus: f64,
        f: NamedFn,
        #[serde(default = "default_horizon")]
        t_max: f64,
    },
}

fn default_horizon() -> f64 {
    10.0
}

impl FamilySpec {
    pub fn build(&self) -> Result<Box<dyn Family>, FamilyError> {
        Ok(match *self {
            FamilySpec::Semigroup {
                gamma_plus,
                gamma_minus,
                gamma_z,
            } => Box::new(Semigroup::new(gamma_plus, gamma_minus, gamma_z)?),
            FamilySpec::NonmonotonePopulation { nu, omega } => {
                Box::new(NonmonotonePopulation::new(nu, omega)?)
            }
            FamilySpec::EternalCommutative { a, nu } => Box::new(EternalCommutative::new(a, nu)?),
            FamilySpec::EternalNoncommutative { b, nu } => {
                Box::new(EternalNoncommutative::new(b, nu)?)
            }
            FamilySpec::KernelExample {
                a,
                a_plus,
                a_minus,
                f,
                t_max,
            } => Box::new(KernelExample::from_named(a, a_plus, a_minus, f, t_max)?),
        })
    }
}
