//! Laplace-domain memory kernels.
//!
//! Kernels are restricted to rational Laplace transforms so that every
//! check reduces to exact polynomial arithmetic: derivatives for the
//! Bernstein complete-monotonicity test come from the quotient rule, and
//! inverse transforms from partial fractions over simple real poles.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::verdict::{Verdict, EPS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("degenerate kernel: {0}")]
    DegenerateKernel(String),
    #[error("grid point s = {s} lies within {dist:e} of a real pole")]
    PoleOnGrid { s: f64, dist: f64 },
    #[error("inverse transform unsupported: {0}")]
    UnsupportedInversion(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

const GCD_TOL: f64 = 1e-12;

// --- dense real polynomials, ascending coefficient order ---

fn poly_trim(mut p: Vec<f64>) -> Vec<f64> {
    let scale = p.iter().fold(0.0f64, |m, c| m.max(c.abs())).max(1.0);
    while p.len() > 1 && p.last().unwrap().abs() <= GCD_TOL * scale {
        p.pop();
    }
    if p.is_empty() {
        p.push(0.0);
    }
    p
}

fn poly_is_zero(p: &[f64]) -> bool {
    p.iter().all(|c| c.abs() <= GCD_TOL)
}

fn poly_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] += c;
    }
    poly_trim(out)
}

fn poly_scale(a: &[f64], k: f64) -> Vec<f64> {
    poly_trim(a.iter().map(|c| c * k).collect())
}

fn poly_sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    poly_add(a, &poly_scale(b, -1.0))
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, ca) in a.iter().enumerate() {
        for (j, cb) in b.iter().enumerate() {
            out[i + j] += ca * cb;
        }
    }
    poly_trim(out)
}

fn poly_derivative(a: &[f64]) -> Vec<f64> {
    if a.len() <= 1 {
        return vec![0.0];
    }
    poly_trim(a.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect())
}

fn poly_eval(a: &[f64], s: f64) -> f64 {
    a.iter().rev().fold(0.0, |acc, c| acc * s + c)
}

/// Euclidean division: returns (quotient, remainder).
fn poly_divmod(a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let b = poly_trim(b.to_vec());
    assert!(!poly_is_zero(&b), "division by zero polynomial");
    let mut rem = a.to_vec();
    let db = b.len() - 1;
    if rem.len() - 1 < db {
        return (vec![0.0], poly_trim(rem));
    }
    let mut quot = vec![0.0; rem.len() - db];
    let lead = *b.last().unwrap();
    for k in (0..quot.len()).rev() {
        let coeff = rem[k + db] / lead;
        quot[k] = coeff;
        for (j, bc) in b.iter().enumerate() {
            rem[k + j] -= coeff * bc;
        }
    }
    rem.truncate(db.max(1));
    (poly_trim(quot), poly_trim(rem))
}

/// Monic gcd by the Euclidean algorithm with coefficient tolerance.
fn poly_gcd(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut x = poly_trim(a.to_vec());
    let mut y = poly_trim(b.to_vec());
    if poly_is_zero(&x) {
        return poly_monic(&y);
    }
    if poly_is_zero(&y) {
        return poly_monic(&x);
    }
    while !poly_is_zero(&y) {
        // normalize to keep the tolerance meaningful across iterations
        y = poly_monic(&y);
        let (_, r) = poly_divmod(&x, &y);
        x = y;
        y = r;
    }
    poly_monic(&x)
}

fn poly_monic(a: &[f64]) -> Vec<f64> {
    let a = poly_trim(a.to_vec());
    let lead = *a.last().unwrap();
    if lead == 0.0 {
        return a;
    }
    poly_scale(&a, 1.0 / lead)
}

/// Real roots of a polynomial via the companion matrix; complex pairs are
/// dropped.
fn poly_real_roots(a: &[f64]) -> Vec<f64> {
    let a = poly_monic(a);
    let deg = a.len() - 1;
    if deg == 0 {
        return vec![];
    }
    let companion = DMatrix::<f64>::from_fn(deg, deg, |i, j| {
        if j == deg - 1 {
            -a[i]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let eigs = companion.complex_eigenvalues();
    let scale = a.iter().fold(1.0f64, |m, c| m.max(c.abs()));
    eigs.iter()
        .filter(|e| e.im.abs() <= 1e-8 * scale.max(e.re.abs()))
        .map(|e| e.re)
        .collect()
}

/// Rational function of the Laplace variable `s`, stored as gcd-reduced
/// numerator and denominator coefficient lists in ascending degree, with
/// the denominator monic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalLaplace {
    #[serde(rename = "num")]
    pub numerator: Vec<f64>,
    #[serde(rename = "den")]
    pub denominator: Vec<f64>,
}

impl RationalLaplace {
    pub fn new(numerator: Vec<f64>, denominator: Vec<f64>) -> Result<Self, KernelError> {
        if numerator.iter().chain(&denominator).any(|c| !c.is_finite()) {
            return Err(KernelError::InvalidInput(
                "non-finite polynomial coefficient".into(),
            ));
        }
        let den = poly_trim(denominator);
        if poly_is_zero(&den) {
            return Err(KernelError::DegenerateKernel(
                "denominator is identically zero".into(),
            ));
        }
        Ok(Self::reduced(poly_trim(numerator), den))
    }

    fn reduced(num: Vec<f64>, den: Vec<f64>) -> Self {
        if poly_is_zero(&num) {
            return RationalLaplace {
                numerator: vec![0.0],
                denominator: vec![1.0],
            };
        }
        let g = poly_gcd(&num, &den);
        let (num, den) = if g.len() > 1 {
            (poly_divmod(&num, &g).0, poly_divmod(&den, &g).0)
        } else {
            (num, den)
        };
        let lead = *den.last().unwrap();
        RationalLaplace {
            numerator: poly_scale(&num, 1.0 / lead),
            denominator: poly_monic(&den),
        }
    }

    pub fn zero() -> Self {
        RationalLaplace {
            numerator: vec![0.0],
            denominator: vec![1.0],
        }
    }

    pub fn constant(c: f64) -> Self {
        RationalLaplace {
            numerator: vec![c],
            denominator: vec![1.0],
        }
    }

    /// The Laplace variable itself.
    pub fn s() -> Self {
        RationalLaplace {
            numerator: vec![0.0, 1.0],
            denominator: vec![1.0],
        }
    }

    pub fn is_zero(&self) -> bool {
        poly_is_zero(&self.numerator)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::reduced(
            poly_add(
                &poly_mul(&self.numerator, &other.denominator),
                &poly_mul(&other.numerator, &self.denominator),
            ),
            poly_mul(&self.denominator, &other.denominator),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        RationalLaplace {
            numerator: poly_scale(&self.numerator, -1.0),
            denominator: self.denominator.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::reduced(
            poly_mul(&self.numerator, &other.numerator),
            poly_mul(&self.denominator, &other.denominator),
        )
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::reduced(poly_scale(&self.numerator, k), self.denominator.clone())
    }

    pub fn div(&self, other: &Self) -> Result<Self, KernelError> {
        if other.is_zero() {
            return Err(KernelError::DegenerateKernel(
                "division by the zero rational function".into(),
            ));
        }
        Ok(Self::reduced(
            poly_mul(&self.numerator, &other.denominator),
            poly_mul(&self.denominator, &other.numerator),
        ))
    }

    pub fn eval(&self, s: f64) -> f64 {
        poly_eval(&self.numerator, s) / poly_eval(&self.denominator, s)
    }

    /// Exact derivative by the quotient rule, gcd-reduced.
    pub fn derivative(&self) -> Self {
        let num = poly_sub(
            &poly_mul(&poly_derivative(&self.numerator), &self.denominator),
            &poly_mul(&self.numerator, &poly_derivative(&self.denominator)),
        );
        Self::reduced(num, poly_mul(&self.denominator, &self.denominator))
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        let mut f = self.clone();
        for _ in 0..n {
            f = f.derivative();
        }
        f
    }

    /// Real poles (real roots of the reduced denominator).
    pub fn real_poles(&self) -> Vec<f64> {
        poly_real_roots(&self.denominator)
    }

    /// Derivatives `f^(0)(s) .. f^(depth)(s)` evaluated by truncated
    /// Taylor-series division around `s`. Unlike iterating the symbolic
    /// quotient rule, this keeps polynomial degrees fixed and stays
    /// numerically stable at high orders.
    pub fn derivatives_at(&self, s: f64, depth: usize) -> Vec<f64> {
        let a = poly_taylor_shift(&self.numerator, s, depth);
        let b = poly_taylor_shift(&self.denominator, s, depth);
        let mut c = vec![0.0; depth + 1];
        for k in 0..=depth {
            let mut acc = a[k];
            for j in 1..=k {
                acc -= b[j] * c[k - j];
            }
            c[k] = acc / b[0];
        }
        let mut fact = 1.0;
        for (n, ck) in c.iter_mut().enumerate() {
            if n > 0 {
                fact *= n as f64;
            }
            *ck *= fact;
        }
        c
    }
}

/// First `depth + 1` Taylor coefficients of `p(s + h)` in `h`, by
/// repeated synthetic division.
fn poly_taylor_shift(p: &[f64], s: f64, depth: usize) -> Vec<f64> {
    let mut work = p.to_vec();
    let mut out = vec![0.0; depth + 1];
    for coeff in out.iter_mut() {
        match work.len() {
            0 => break,
            1 => {
                *coeff = work[0];
                work.clear();
            }
            len => {
                // synthetic division by (x - s): remainder is the next
                // Taylor coefficient, quotient carries over
                let d = len - 1;
                let mut quot = vec![0.0; d];
                quot[d - 1] = work[d];
                for k in (1..d).rev() {
                    quot[k - 1] = work[k] + s * quot[k];
                }
                *coeff = work[0] + s * quot[0];
                work = quot;
            }
        }
    }
    out
}

/// Exponential-sum inverse transform `sum_i residue_i exp(pole_i t)`,
/// from a partial-fraction expansion over simple real poles.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpSum {
    pub terms: Vec<(f64, f64)>, // (pole, residue)
}

impl ExpSum {
    pub fn eval(&self, t: f64) -> f64 {
        self.terms.iter().map(|&(p, r)| r * (p * t).exp()).sum()
    }
}

/// Partial-fraction inversion of a strictly proper rational transform
/// with simple real poles. Anything else is refused rather than
/// approximated.
pub fn inverse_laplace(f: &RationalLaplace) -> Result<ExpSum, KernelError> {
    if f.is_zero() {
        return Ok(ExpSum { terms: vec![] });
    }
    if f.numerator.len() >= f.denominator.len() {
        return Err(KernelError::UnsupportedInversion(
            "transform is not strictly proper".into(),
        ));
    }
    let deg = f.denominator.len() - 1;
    let poles = f.real_poles();
    if poles.len() != deg {
        return Err(KernelError::UnsupportedInversion(
            "denominator has complex poles".into(),
        ));
    }
    let scale = poles.iter().fold(1.0f64, |m, p| m.max(p.abs()));
    for i in 0..poles.len() {
        for j in 0..i {
            if (poles[i] - poles[j]).abs() <= 1e-8 * scale {
                return Err(KernelError::UnsupportedInversion(format!(
                    "repeated pole near s = {}",
                    poles[i]
                )));
            }
        }
    }
    let dden = poly_derivative(&f.denominator);
    let terms = poles
        .iter()
        .map(|&p| (p, poly_eval(&f.numerator, p) / poly_eval(&dden, p)))
        .collect();
    Ok(ExpSum { terms })
}

/// Phase covariant memory kernel in the Laplace domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kappa_plus_s: RationalLaplace,
    pub kappa_minus_s: RationalLaplace,
    pub kappa_z_s: RationalLaplace,
}

impl KernelSpec {
    pub fn zero() -> Self {
        KernelSpec {
            kappa_plus_s: RationalLaplace::zero(),
            kappa_minus_s: RationalLaplace::zero(),
            kappa_z_s: RationalLaplace::zero(),
        }
    }
}

/// Laplace transforms of the channel parameters generated by a kernel:
/// `lambda_s = 1/(s + (k+ + k- + 4 kz)/2)`, `(lambda_z)_s = 1/(s + k+ + k-)`,
/// `(t_z)_s = (k+ - k-)/(s (s + k+ + k-))`.
pub fn laplace_params_from_kernel(
    k: &KernelSpec,
) -> Result<(RationalLaplace, RationalLaplace, RationalLaplace), KernelError> {
    let s = RationalLaplace::s();
    let one = RationalLaplace::constant(1.0);
    let ksum = k.kappa_plus_s.add(&k.kappa_minus_s);
    let den_z = s.add(&ksum);
    let den_l = s.add(&ksum.add(&k.kappa_z_s.scale(4.0)).scale(0.5));
    if den_z.is_zero() || den_l.is_zero() {
        return Err(KernelError::DegenerateKernel(
            "kernel cancels the Laplace variable".into(),
        ));
    }
    let lambda_s = one.div(&den_l)?;
    let lambda_z_s = one.div(&den_z)?;
    let t_z_s = k
        .kappa_plus_s
        .sub(&k.kappa_minus_s)
        .div(&s.mul(&den_z))?;
    Ok((lambda_s, lambda_z_s, t_z_s))
}

/// Verdict of a complete-monotonicity sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CMVerdict {
    /// No violation found up to the checked depth on the grid. This is a
    /// sampled necessary condition, not a proof.
    Passes,
    /// Concrete witness: `(-1)^n f^(n)(s) = value < -eps`.
    FailsAt { s: f64, n: usize, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CMReport {
    pub function_id: String,
    pub depth_checked: usize,
    pub grid: Vec<f64>,
    pub verdict: CMVerdict,
    /// Worst signed value of `(-1)^n f^(n)(s)`, squashed to (-1, 1) so
    /// reports with wildly different derivative magnitudes compare.
    pub worst: f64,
}

impl CMReport {
    pub fn passes(&self) -> bool {
        matches!(self.verdict, CMVerdict::Passes)
    }
}

/// Logarithmic default grid for monotonicity sweeps: 64 points on
/// `[1e-3, 1e3]`.
pub fn default_cm_grid() -> Vec<f64> {
    let n = 64;
    (0..n)
        .map(|i| {
            let x = i as f64 / (n - 1) as f64;
            10f64.powf(-3.0 + 6.0 * x)
        })
        .collect()
}

pub const DEFAULT_CM_DEPTH: usize = 8;

/// Bernstein sweep: checks `(-1)^n f^(n)(s) >= -eps` for `n = 0..=depth`
/// at every grid point, using exact rational derivatives.
pub fn is_completely_monotone(
    f: &RationalLaplace,
    function_id: &str,
    depth: usize,
    grid: &[f64],
) -> Result<CMReport, KernelError> {
    if depth == 0 {
        return Err(KernelError::InvalidInput("depth must be at least 1".into()));
    }
    if grid.is_empty() || grid.iter().any(|&s| !(s > 0.0)) {
        return Err(KernelError::InvalidInput(
            "grid must be non-empty with all s > 0".into(),
        ));
    }
    for &p in &f.real_poles() {
        for &s in grid {
            let dist = (s - p).abs();
            if dist < 1e-6 {
                return Err(KernelError::PoleOnGrid { s, dist });
            }
        }
    }
    let mut worst = f64::INFINITY;
    let mut witness: Option<(f64, usize, f64)> = None;
    for &s in grid {
        let derivs = f.derivatives_at(s, depth);
        for (n, &d) in derivs.iter().enumerate() {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let v = sign * d;
            let squashed = v / (1.0 + v.abs());
            if squashed < worst {
                worst = squashed;
            }
            if v < -EPS && witness.is_none() {
                witness = Some((s, n, v));
            }
        }
    }
    Ok(CMReport {
        function_id: function_id.to_string(),
        depth_checked: depth,
        grid: grid.to_vec(),
        verdict: match witness {
            Some((s, n, value)) => CMVerdict::FailsAt { s, n, value },
            None => CMVerdict::Passes,
        },
        worst,
    })
}

/// Sufficient admissibility criterion for a memory kernel: six rational
/// functions built from the kernel must all be completely monotone. The
/// functions are `k_m / (s d1)` and `(s + k_m)/(s d1) +- 1/d2` for
/// `m = +, -`, with `d1 = s + k+ + k-` and `d2 = s + (k+ + k- + 4 kz)/2`.
pub fn prop8_admissible(
    k: &KernelSpec,
    depth: usize,
    grid: &[f64],
) -> Result<(Verdict, Vec<CMReport>), KernelError> {
    let s = RationalLaplace::s();
    let one = RationalLaplace::constant(1.0);
    let ksum = k.kappa_plus_s.add(&k.kappa_minus_s);
    let d1 = s.add(&ksum);
    let d2 = s.add(&ksum.add(&k.kappa_z_s.scale(4.0)).scale(0.5));
    if d1.is_zero() || d2.is_zero() {
        return Err(KernelError::DegenerateKernel(
            "kernel cancels the Laplace variable".into(),
        ));
    }
    let sd1 = s.mul(&d1);
    let inv_d2 = one.div(&d2)?;
    let mut functions = Vec::with_capacity(6);
    for (name, kappa) in [("plus", &k.kappa_plus_s), ("minus", &k.kappa_minus_s)] {
        functions.push((format!("kappa_{name}/(s d1)"), kappa.div(&sd1)?));
        let base = s.add(kappa).div(&sd1)?;
        functions.push((
            format!("(s+kappa_{name})/(s d1) + 1/d2"),
            base.add(&inv_d2),
        ));
        functions.push((
            format!("(s+kappa_{name})/(s d1) - 1/d2"),
            base.sub(&inv_d2),
        ));
    }
    let mut reports = Vec::with_capacity(6);
    let mut margin = f64::INFINITY;
    for (id, f) in &functions {
        let rep = is_completely_monotone(f, id, depth, grid)?;
        margin = margin.min(rep.worst);
        reports.push(rep);
    }
    Ok((Verdict::classify(margin), reports))
}

/// Kernel of the constructive example: given weights `a >= a_pm > 0` and
/// a transform `f_s`, returns
/// `(kappa_pm)_s = a_pm s f_s / (1 - (a+ + a-) f_s)` and
/// `(kappa_z)_s = s f_s (2a - a+ - a- - a(a+ + a-) f_s)
///                / (4 (1 - a f_s)(1 - (a+ + a-) f_s))`.
pub fn example_kernel(
    a: f64,
    a_plus: f64,
    a_minus: f64,
    f_s: &RationalLaplace,
) -> Result<KernelSpec, KernelError> {
    if !(a >= a_plus && a >= a_minus && a_plus > 0.0 && a_minus > 0.0) {
        return Err(KernelError::InvalidInput(format!(
            "need a >= a_pm > 0, got a = {a}, a+ = {a_plus}, a- = {a_minus}"
        )));
    }
    let s = RationalLaplace::s();
    let one = RationalLaplace::constant(1.0);
    let sf = s.mul(f_s);
    let pop_den = one.sub(&f_s.scale(a_plus + a_minus));
    let coh_den = one.sub(&f_s.scale(a));
    if pop_den.is_zero() || coh_den.is_zero() {
        return Err(KernelError::DegenerateKernel(
            "weight function saturates the admissible bound identically".into(),
        ));
    }
    let kappa_plus_s = sf.scale(a_plus).div(&pop_den)?;
    let kappa_minus_s = sf.scale(a_minus).div(&pop_den)?;
    let kz_num = sf.mul(
        &RationalLaplace::constant(2.0 * a - a_plus - a_minus)
            .sub(&f_s.scale(a * (a_plus + a_minus))),
    );
    let kappa_z_s = kz_num.div(&coh_den.mul(&pop_den).scale(4.0))?;
    Ok(KernelSpec {
        kappa_plus_s,
        kappa_minus_s,
        kappa_z_s,
    })
}
