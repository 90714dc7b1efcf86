//! Phase covariant qubit channels and their classification.
//!
//! A phase covariant qubit channel is determined by three real parameters
//! `(lambda, lambda_z, t_z)`: the Bloch ball is contracted by `lambda` in
//! the transverse plane, by `lambda_z` along the z-axis, and shifted by
//! `t_z` along z. Construction places no range restriction on the
//! parameters so that non-CP and non-positive maps can be represented and
//! analyzed; classification is done by [`PhaseCovChannel::is_cp`],
//! [`PhaseCovChannel::is_positive`] and friends.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::verdict::{Verdict, EPS, EPS_INV};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("channel parameter {name} is not finite: {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("channel is singular (|lambda| or |lambda_z| below {0:e}), cannot invert")]
    SingularChannel(f64),
    #[error("no Sinkhorn normal form: |lambda_z| + |t_z| = {0} >= 1")]
    NoNormalForm(f64),
    #[error("Sinkhorn iteration did not converge within {0} iterations")]
    SinkhornDiverged(usize),
    #[error("matrix is not a valid density matrix: {0}")]
    InvalidDensityMatrix(String),
}

/// A phase covariant qubit channel `(lambda, lambda_z, t_z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseCovChannel {
    pub lambda: f64,
    pub lambda_z: f64,
    pub t_z: f64,
}

/// A point of the Bloch ball (or its affine image).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub rx: f64,
    pub ry: f64,
    pub rz: f64,
}

impl BlochVector {
    pub fn new(rx: f64, ry: f64, rz: f64) -> Self {
        BlochVector { rx, ry, rz }
    }

    pub fn norm(&self) -> f64 {
        (self.rx * self.rx + self.ry * self.ry + self.rz * self.rz).sqrt()
    }
}

/// 2x2 density matrix, stored as a complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(pub Matrix2<C64>);

impl DensityMatrix {
    /// Build from a matrix, checking hermiticity and unit trace to `tol`.
    pub fn new(m: Matrix2<C64>, tol: f64) -> Result<Self, ChannelError> {
        let herm = (m - m.adjoint()).norm();
        if herm > tol {
            return Err(ChannelError::InvalidDensityMatrix(format!(
                "not Hermitian, residual {herm:e}"
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(ChannelError::InvalidDensityMatrix(format!(
                "trace {tr} != 1"
            )));
        }
        Ok(DensityMatrix(m))
    }

    /// rho = (I + r . sigma) / 2.
    pub fn from_bloch(r: &BlochVector) -> Self {
        let half = 0.5;
        let m = Matrix2::new(
            C64::new(half * (1.0 + r.rz), 0.0),
            C64::new(half * r.rx, -half * r.ry),
            C64::new(half * r.rx, half * r.ry),
            C64::new(half * (1.0 - r.rz), 0.0),
        );
        DensityMatrix(m)
    }

    pub fn bloch(&self) -> BlochVector {
        let m = &self.0;
        BlochVector {
            rx: (m[(0, 1)] + m[(1, 0)]).re,
            ry: (m[(1, 0)] - m[(0, 1)]).im,
            rz: (m[(0, 0)] - m[(1, 1)]).re,
        }
    }

    /// Minimum eigenvalue (both eigenvalues are real for Hermitian input).
    pub fn min_eigenvalue(&self) -> f64 {
        let m = &self.0;
        let tr = (m[(0, 0)] + m[(1, 1)]).re;
        let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        tr / 2.0 - disc
    }
}

/// 4x4 real Pauli transfer matrix acting on the coefficient vector
/// `(1, rx, ry, rz)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTransfer(pub Matrix4<f64>);

impl PauliTransfer {
    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn product(&self, other: &PauliTransfer) -> PauliTransfer {
        PauliTransfer(self.0 * other.0)
    }

    /// First row must be (1, 0, 0, 0) for a trace-preserving map.
    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        let m = &self.0;
        (m[(0, 0)] - 1.0).abs() <= tol
            && m[(0, 1)].abs() <= tol
            && m[(0, 2)].abs() <= tol
            && m[(0, 3)].abs() <= tol
    }
}

/// 4x4 complex Hermitian Choi matrix of a qubit map.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix(pub Matrix4<C64>);

impl ChoiMatrix {
    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.0
    }

    /// Eigenvalues of the (Hermitian) Choi matrix, ascending.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let eig = self.0.symmetric_eigen();
        let mut vals = [0.0; 4];
        for (i, v) in eig.eigenvalues.iter().enumerate() {
            vals[i] = *v;
        }
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }
}

/// Sinkhorn normal form of a strictly positive phase covariant map:
/// congruence operators `A`, `B` and the unital-map parameters such that
/// `A Phi[B rho B^dag] A^dag` is unital and trace preserving.
#[derive(Debug, Clone, PartialEq)]
pub struct SinkhornForm {
    /// Transverse parameter of the unital normal form.
    pub lt_x: f64,
    /// Longitudinal parameter of the unital normal form.
    pub lt_z: f64,
    pub a_op: Matrix2<C64>,
    pub b_op: Matrix2<C64>,
}

impl PhaseCovChannel {
    /// Construct a channel, rejecting non-finite parameters.
    pub fn new(lambda: f64, lambda_z: f64, t_z: f64) -> Result<Self, ChannelError> {
        for (name, value) in [("lambda", lambda), ("lambda_z", lambda_z), ("t_z", t_z)] {
            if !value.is_finite() {
                return Err(ChannelError::NonFinite { name, value });
            }
        }
        Ok(PhaseCovChannel {
            lambda,
            lambda_z,
            t_z,
        })
    }

    pub fn identity() -> Self {
        PhaseCovChannel {
            lambda: 1.0,
            lambda_z: 1.0,
            t_z: 0.0,
        }
    }

    /// Affine action on a Bloch vector:
    /// `(rx, ry, rz) -> (lambda rx, lambda ry, lambda_z rz + t_z)`.
    pub fn apply(&self, r: &BlochVector) -> BlochVector {
        BlochVector {
            rx: self.lambda * r.rx,
            ry: self.lambda * r.ry,
            rz: self.lambda_z * r.rz + self.t_z,
        }
    }

    /// Action on an arbitrary 2x2 operator.
    pub fn apply_operator(&self, x: &Matrix2<C64>) -> Matrix2<C64> {
        let tr = x[(0, 0)] + x[(1, 1)];
        let tx = x[(0, 1)] + x[(1, 0)];
        let ty = (x[(0, 1)] - x[(1, 0)]) * C64::i();
        let tz = x[(0, 0)] - x[(1, 1)];
        let l = C64::new(self.lambda, 0.0);
        let lz = C64::new(self.lambda_z, 0.0);
        let shift = C64::new(self.t_z, 0.0);
        let d = lz * tz + shift * tr;
        // (tr I + l tx sx + l ty sy + d sz) / 2 assembled entrywise
        Matrix2::new(
            (tr + d) * 0.5,
            (l * tx - C64::i() * l * ty) * 0.5,
            (l * tx + C64::i() * l * ty) * 0.5,
            (tr - d) * 0.5,
        )
    }

    pub fn apply_density(&self, rho: &DensityMatrix) -> DensityMatrix {
        DensityMatrix(self.apply_operator(&rho.0))
    }

    /// Channel concatenation `self . inner` (self applied second).
    pub fn compose(&self, inner: &PhaseCovChannel) -> PhaseCovChannel {
        PhaseCovChannel {
            lambda: self.lambda * inner.lambda,
            lambda_z: self.lambda_z * inner.lambda_z,
            t_z: self.lambda_z * inner.t_z + self.t_z,
        }
    }

    /// Inverse as an affine map; errors when a contraction parameter is
    /// below [`EPS_INV`].
    pub fn invert(&self) -> Result<PhaseCovChannel, ChannelError> {
        if self.lambda.abs() <= EPS_INV || self.lambda_z.abs() <= EPS_INV {
            return Err(ChannelError::SingularChannel(EPS_INV));
        }
        Ok(PhaseCovChannel {
            lambda: 1.0 / self.lambda,
            lambda_z: 1.0 / self.lambda_z,
            t_z: -self.t_z / self.lambda_z,
        })
    }

    pub fn pauli_transfer(&self) -> PauliTransfer {
        let mut m = Matrix4::zeros();
        m[(0, 0)] = 1.0;
        m[(1, 1)] = self.lambda;
        m[(2, 2)] = self.lambda;
        m[(3, 3)] = self.lambda_z;
        m[(3, 0)] = self.t_z;
        PauliTransfer(m)
    }

    /// Recover the channel parameters from a Pauli transfer matrix of the
    /// phase covariant block form.
    pub fn from_pauli_transfer(pt: &PauliTransfer) -> PhaseCovChannel {
        let m = pt.matrix();
        PhaseCovChannel {
            lambda: m[(1, 1)],
            lambda_z: m[(3, 3)],
            t_z: m[(3, 0)],
        }
    }

    /// Choi state with respect to the maximally entangled vector
    /// `(|00> + |11>)/sqrt(2)`: assembled as
    /// `(1/2) sum_ij Phi[|i><j|] (x) |i><j|`.
    pub fn to_choi(&self) -> ChoiMatrix {
        let mut choi = Matrix4::zeros();
        for i in 0..2 {
            for j in 0..2 {
                let mut unit = Matrix2::zeros();
                unit[(i, j)] = C64::new(1.0, 0.0);
                let out = self.apply_operator(&unit);
                for a in 0..2 {
                    for b in 0..2 {
                        choi[(2 * a + i, 2 * b + j)] += out[(a, b)] * 0.5;
                    }
                }
            }
        }
        ChoiMatrix(choi)
    }

    /// Complete positivity test by the closed-form inequalities
    /// `|lambda_z| + |t_z| <= 1` and `4 lambda^2 + t_z^2 <= (1 + lambda_z)^2`.
    pub fn is_cp(&self) -> Verdict {
        self.is_cp_with_tol(EPS)
    }

    pub fn is_cp_with_tol(&self, tol: f64) -> Verdict {
        Verdict::from_margin(self.cp_margin(), tol)
    }

    pub(crate) fn cp_margin(&self) -> f64 {
        let s1 = 1.0 - self.lambda_z.abs() - self.t_z.abs();
        let one_plus = 1.0 + self.lambda_z;
        let s2 = one_plus * one_plus - 4.0 * self.lambda * self.lambda - self.t_z * self.t_z;
        s1.min(s2)
    }

    /// Positivity test by the Sinkhorn-based closed form: three
    /// inequalities on `(lambda, lambda_z, t_z)`. The square roots are
    /// evaluated only when `|lambda_z| + |t_z| <= 1`, where their
    /// arguments are non-negative.
    pub fn is_positive(&self) -> Verdict {
        self.is_positive_with_tol(EPS)
    }

    pub fn is_positive_with_tol(&self, tol: f64) -> Verdict {
        let s1 = 1.0 - self.lambda_z.abs() - self.t_z.abs();
        if s1 < -tol {
            return Verdict::from_margin(s1, tol);
        }
        let sum = self.sqrt_sum();
        let s2 = sum - 2.0 * self.lambda.abs();
        let s3 = sum * sum - 4.0 * self.lambda_z.abs();
        Verdict::from_margin(s1.min(s2).min(s3), tol)
    }

    /// `sqrt((1+lambda_z)^2 - t_z^2) + sqrt((1-lambda_z)^2 - t_z^2)`,
    /// with arguments clamped at zero against roundoff.
    fn sqrt_sum(&self) -> f64 {
        let tz2 = self.t_z * self.t_z;
        let a = (1.0 + self.lambda_z).powi(2) - tz2;
        let b = (1.0 - self.lambda_z).powi(2) - tz2;
        a.max(0.0).sqrt() + b.max(0.0).sqrt()
    }

    /// Maximum distance between the Bloch ball center and a point of the
    /// image ellipsoid. The map is positive iff `r_max <= 1`.
    ///
    /// The squared distance along the sphere parameter `z = n_z` is the
    /// quadratic `lambda^2 + t_z^2 + (lambda_z^2 - lambda^2) z^2
    /// + 2 lambda_z t_z z` on `[-1, 1]`. For `|lambda| <= |lambda_z]`
    /// the maximum sits at a pole; otherwise the interior stationary
    /// point applies only while it stays inside the range, so the
    /// transverse-branch formula is clamped back to the pole value when
    /// `|lambda_z t_z| > lambda^2 - lambda_z^2`.
    pub fn r_max(&self) -> f64 {
        let pole = self.lambda_z.abs() + self.t_z.abs();
        if self.lambda.abs() <= self.lambda_z.abs() {
            return pole;
        }
        let l2 = self.lambda * self.lambda;
        let lz2 = self.lambda_z * self.lambda_z;
        if (self.lambda_z * self.t_z).abs() > l2 - lz2 {
            return pole;
        }
        self.lambda.abs() * (1.0 + self.t_z * self.t_z / (l2 - lz2)).sqrt()
    }

    /// Membership in the convex polyhedron of six linear inequalities:
    /// `1 + 2 lambda + lambda_z +- t_z >= 0`,
    /// `1 - 2 lambda + lambda_z +- t_z >= 0`,
    /// `1 - lambda_z +- t_z >= 0`.
    /// Every point of the polyhedron is a CP channel.
    pub fn in_polyhedron(&self) -> Verdict {
        self.in_polyhedron_with_tol(EPS)
    }

    pub fn in_polyhedron_with_tol(&self, tol: f64) -> Verdict {
        let (l, lz, tz) = (self.lambda, self.lambda_z, self.t_z);
        let slacks = [
            1.0 + 2.0 * l + lz + tz,
            1.0 + 2.0 * l + lz - tz,
            1.0 - 2.0 * l + lz + tz,
            1.0 - 2.0 * l + lz - tz,
            1.0 - lz + tz,
            1.0 - lz - tz,
        ];
        let margin = slacks.iter().cloned().fold(f64::INFINITY, f64::min);
        Verdict::from_margin(margin, tol)
    }

    /// Sinkhorn normal form: unital-map parameters from the closed forms,
    /// congruence operators `A`, `B` recovered by fixed-point iteration
    /// (alternate row/column normalization of the population block).
    ///
    /// Defined only for `|lambda_z| + |t_z| < 1` strictly.
    pub fn sinkhorn_form(&self) -> Result<SinkhornForm, ChannelError> {
        let gap = self.lambda_z.abs() + self.t_z.abs();
        if gap >= 1.0 {
            return Err(ChannelError::NoNormalForm(gap));
        }
        let sum = self.sqrt_sum();
        let lt_x = 2.0 * self.lambda / sum;
        let lt_z = 4.0 * self.lambda_z / (sum * sum);

        // The channel acts on the populations (p, r) = (rho_00, rho_11) by
        // the entrywise-positive matrix M below; diagonal congruences
        // A . A^dag and B . B^dag scale its rows and columns. The unital
        // trace-preserving normal form corresponds to M scaled to a doubly
        // stochastic matrix, so A and B come out of Sinkhorn row/column
        // balancing.
        let (lz, tz) = (self.lambda_z, self.t_z);
        let m = [
            [0.5 * (1.0 + lz + tz), 0.5 * (1.0 - lz + tz)],
            [0.5 * (1.0 - lz - tz), 0.5 * (1.0 + lz - tz)],
        ];
        let mut da = [1.0f64, 1.0]; // row scalings = diag(A A^dag)
        let mut db = [1.0f64, 1.0]; // column scalings = diag(B B^dag)
        let max_iter = 10_000;
        let mut converged = false;
        for _ in 0..max_iter {
            // rows
            for i in 0..2 {
                let row = da[i] * (m[i][0] * db[0] + m[i][1] * db[1]);
                da[i] /= row;
            }
            // columns
            for j in 0..2 {
                let col = db[j] * (m[0][j] * da[0] + m[1][j] * da[1]);
                db[j] /= col;
            }
            // converged when the scaled matrix reproduces the closed-form
            // unital parameter
            let m00 = da[0] * m[0][0] * db[0];
            let m11 = da[1] * m[1][1] * db[1];
            let lt_z_iter = m00 + m11 - 1.0;
            if (lt_z_iter - lt_z).abs() < 1e-10 {
                // also require row/column sums consistent
                let r0 = da[0] * (m[0][0] * db[0] + m[0][1] * db[1]);
                let c0 = db[0] * (m[0][0] * da[0] + m[1][0] * da[1]);
                if (r0 - 1.0).abs() < 1e-12 && (c0 - 1.0).abs() < 1e-12 {
                    converged = true;
                    break;
                }
            }
        }
        if !converged {
            return Err(ChannelError::SinkhornDiverged(max_iter));
        }
        let a_op = Matrix2::new(
            C64::new(da[0].sqrt(), 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(da[1].sqrt(), 0.0),
        );
        let b_op = Matrix2::new(
            C64::new(db[0].sqrt(), 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(db[1].sqrt(), 0.0),
        );
        Ok(SinkhornForm {
            lt_x,
            lt_z,
            a_op,
            b_op,
        })
    }
}

impl SinkhornForm {
    /// The unital normal-form map as a phase covariant channel
    /// `(lt_x, lt_z, 0)`.
    pub fn unital_map(&self) -> PhaseCovChannel {
        PhaseCovChannel {
            lambda: self.lt_x,
            lambda_z: self.lt_z,
            t_z: 0.0,
        }
    }

    /// Apply the congruence form `A^-1 Upsilon[B^-1 rho (B^-1)^dag] (A^-1)^dag`,
    /// which must reproduce the original channel action.
    pub fn reconstruct(&self, rho: &Matrix2<C64>) -> Matrix2<C64> {
        let a_inv = self
            .a_op
            .try_inverse()
            .expect("congruence operator A is non-degenerate");
        let b_inv = self
            .b_op
            .try_inverse()
            .expect("congruence operator B is non-degenerate");
        let inner = b_inv * rho * b_inv.adjoint();
        let mid = self.unital_map().apply_operator(&inner);
        a_inv * mid * a_inv.adjoint()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ch(l: f64, lz: f64, tz: f64) -> PhaseCovChannel {
        PhaseCovChannel::new(l, lz, tz).unwrap()
    }

    #[test]
    fn construction_rejects_non_finite() {
        assert!(PhaseCovChannel::new(f64::NAN, 0.0, 0.0).is_err());
        assert!(PhaseCovChannel::new(0.0, f64::INFINITY, 0.0).is_err());
        assert!(PhaseCovChannel::new(0.0, 0.0, f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn apply_identity_and_zero() {
        let r = BlochVector::new(0.3, -0.2, 0.7);
        let out = PhaseCovChannel::identity().apply(&r);
        assert_eq!(out, r);

        let out = ch(0.0, 0.0, 0.0).apply(&r);
        assert_eq!((out.rx, out.ry, out.rz), (0.0, 0.0, 0.0));
    }

    #[test]
    fn apply_matches_pauli_transfer_product() {
        // oracle: 4x4 matrix-vector product on (1, rx, ry, rz)
        let c = ch(0.5, 0.2, 0.3);
        let r = BlochVector::new(1.0, 0.0, 0.0);
        let out = c.apply(&r);
        let m = c.pauli_transfer();
        let v = nalgebra::Vector4::new(1.0, r.rx, r.ry, r.rz);
        let mv = m.matrix() * v;
        assert_abs_diff_eq!(out.rx, mv[1], epsilon = 1e-15);
        assert_abs_diff_eq!(out.ry, mv[2], epsilon = 1e-15);
        assert_abs_diff_eq!(out.rz, mv[3], epsilon = 1e-15);
        assert_abs_diff_eq!(out.rx, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(out.rz, 0.3, epsilon = 1e-15);
    }

    #[test]
    fn apply_operator_matches_bloch_action() {
        let c = ch(0.5, -0.4, 0.3);
        let r = BlochVector::new(0.2, -0.6, 0.4);
        let rho = DensityMatrix::from_bloch(&r);
        let out = c.apply_density(&rho).bloch();
        let direct = c.apply(&r);
        assert_abs_diff_eq!(out.rx, direct.rx, epsilon = 1e-14);
        assert_abs_diff_eq!(out.ry, direct.ry, epsilon = 1e-14);
        assert_abs_diff_eq!(out.rz, direct.rz, epsilon = 1e-14);
    }

    #[test]
    fn compose_identity_is_unit() {
        let c = ch(0.5, 0.3, 0.2);
        let id = PhaseCovChannel::identity();
        assert_eq!(c.compose(&id), c);
        assert_eq!(id.compose(&c), c);
    }

    #[test]
    fn compose_matches_matrix_product() {
        // oracle: 4x4 PauliTransfer product
        let a = ch(0.5, 0.5, 0.2);
        let b = ch(0.5, 0.5, 0.2);
        let c = a.compose(&b);
        assert_abs_diff_eq!(c.lambda, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(c.lambda_z, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(c.t_z, 0.3, epsilon = 1e-15);
        let prod = a.pauli_transfer().product(&b.pauli_transfer());
        let via = PhaseCovChannel::from_pauli_transfer(&prod);
        assert_abs_diff_eq!(c.lambda, via.lambda, epsilon = 1e-15);
        assert_abs_diff_eq!(c.t_z, via.t_z, epsilon = 1e-15);
    }

    #[test]
    fn compose_is_order_dependent() {
        let a = ch(1.0, 0.5, 0.4);
        let b = ch(1.0, 0.2, 0.0);
        let ab = a.compose(&b);
        let ba = b.compose(&a);
        // oracle check through matrix products
        let mab = PhaseCovChannel::from_pauli_transfer(
            &a.pauli_transfer().product(&b.pauli_transfer()),
        );
        let mba = PhaseCovChannel::from_pauli_transfer(
            &b.pauli_transfer().product(&a.pauli_transfer()),
        );
        assert_abs_diff_eq!(ab.t_z, mab.t_z, epsilon = 1e-15);
        assert_abs_diff_eq!(ba.t_z, mba.t_z, epsilon = 1e-15);
        assert!((ab.t_z - ba.t_z).abs() > 1e-3);
    }

    #[test]
    fn invert_round_trips() {
        let id = PhaseCovChannel::identity();
        assert_eq!(id.invert().unwrap(), id);

        let c = ch(0.5, 0.25, 0.5);
        let inv = c.invert().unwrap();
        assert_abs_diff_eq!(inv.lambda, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(inv.lambda_z, 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(inv.t_z, -2.0, epsilon = 1e-15);
        let round = inv.compose(&c);
        assert_abs_diff_eq!(round.lambda, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(round.lambda_z, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(round.t_z, 0.0, epsilon = 1e-12);

        assert!(matches!(
            ch(0.0, 0.5, 0.0).invert(),
            Err(ChannelError::SingularChannel(_))
        ));
    }

    #[test]
    fn choi_of_identity_is_rank_one() {
        let choi = PhaseCovChannel::identity().to_choi();
        let eig = choi.eigenvalues();
        assert_abs_diff_eq!(eig[3], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(choi.trace(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn choi_of_full_contraction_is_maximally_mixed_marginal() {
        let choi = ch(0.0, 0.0, 0.0).to_choi();
        for v in choi.eigenvalues() {
            assert_abs_diff_eq!(v, 0.25, epsilon = 1e-12);
        }
    }

    #[test]
    fn choi_positive_for_cp_channel() {
        let choi = ch(0.6, 0.5, 0.4).to_choi();
        assert!(choi.min_eigenvalue() >= -1e-12);
        assert_abs_diff_eq!(choi.trace(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn is_cp_examples() {
        // identity sits on the boundary of the second inequality
        assert!(PhaseCovChannel::identity().is_cp().is_marginal());

        let v = ch(0.6, 0.5, 0.4).is_cp();
        assert!(v.holds());
        // oracle agreement
        assert!(ch(0.6, 0.5, 0.4).to_choi().min_eigenvalue() >= -1e-12);

        let v = ch(0.8, 0.5, 0.4).is_cp();
        assert!(v.fails());
        assert!(ch(0.8, 0.5, 0.4).to_choi().min_eigenvalue() < -1e-6);
    }

    /// Brute-force positivity oracle: minimum output eigenvalue over a
    /// grid of pure states. For a pure input with Bloch vector n, the
    /// output min eigenvalue is (1 - |Phi(n)|)/2.
    fn brute_force_positive(c: &PhaseCovChannel, n_grid: usize) -> f64 {
        let mut min_eig = f64::INFINITY;
        for i in 0..n_grid {
            // z sweep; transverse direction is irrelevant by symmetry but
            // sample a few azimuths anyway
            let z = -1.0 + 2.0 * (i as f64) / (n_grid as f64 - 1.0);
            let s = (1.0 - z * z).max(0.0).sqrt();
            for k in 0..4 {
                let phi = std::f64::consts::PI * (k as f64) / 4.0;
                let n = BlochVector::new(s * phi.cos(), s * phi.sin(), z);
                let out = c.apply(&n);
                min_eig = min_eig.min((1.0 - out.norm()) / 2.0);
            }
        }
        min_eig
    }

    #[test]
    fn is_positive_examples() {
        // z-flip: positive but not CP
        let c = ch(1.0, -1.0, 0.0);
        assert!(c.is_positive().holds_or_marginal());
        assert!(c.is_cp().fails());
        assert!(brute_force_positive(&c, 3000) >= -1e-9);

        let c = ch(0.8, 0.3, 0.5);
        assert!(c.is_positive().holds());
        assert!(c.is_cp().fails());
        assert!(brute_force_positive(&c, 3000) >= -1e-9);

        let c = ch(0.9, 0.3, 0.5);
        assert!(c.is_positive().fails());
        assert!(brute_force_positive(&c, 3000) < -1e-6);
    }

    #[test]
    fn r_max_examples() {
        assert_abs_diff_eq!(ch(0.0, 0.0, 0.4).r_max(), 0.4, epsilon = 1e-15);

        // grid oracle: maximize |Phi(r)| over the Bloch sphere
        let grid_max = |c: &PhaseCovChannel| {
            let n = 200_000;
            let mut best: f64 = 0.0;
            for i in 0..=n {
                let z = -1.0 + 2.0 * (i as f64) / (n as f64);
                let s = (1.0 - z * z).max(0.0).sqrt();
                let out = c.apply(&BlochVector::new(s, 0.0, z));
                best = best.max(out.norm());
            }
            best
        };

        let c = ch(0.5, 0.2, 0.3);
        assert_abs_diff_eq!(c.r_max(), 0.5976143046671968, epsilon = 1e-12);
        assert_abs_diff_eq!(c.r_max(), grid_max(&c), epsilon = 1e-6);

        let c = ch(0.3, 0.5, 0.2);
        assert_abs_diff_eq!(c.r_max(), 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(c.r_max(), grid_max(&c), epsilon = 1e-6);
    }

    #[test]
    fn sinkhorn_unital_input_is_fixed() {
        let c = ch(0.4, 0.3, 0.0);
        let sf = c.sinkhorn_form().unwrap();
        assert_abs_diff_eq!(sf.lt_x, 0.4, epsilon = 1e-10);
        assert_abs_diff_eq!(sf.lt_z, 0.3, epsilon = 1e-10);
        // A and B proportional to identity
        assert_abs_diff_eq!((sf.a_op[(0, 0)] - sf.a_op[(1, 1)]).norm(), 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!((sf.b_op[(0, 0)] - sf.b_op[(1, 1)]).norm(), 0.0, epsilon = 1e-8);
    }

    #[test]
    fn sinkhorn_closed_forms() {
        // expected values evaluated from the closed forms:
        // sum = sqrt(1.35) + sqrt(0.55); lt_x = 1.0/sum; lt_z = 0.8/sum^2
        let sum = 1.35f64.sqrt() + 0.55f64.sqrt();
        let c = ch(0.5, 0.2, 0.3);
        let sf = c.sinkhorn_form().unwrap();
        assert_abs_diff_eq!(sf.lt_x, 1.0 / sum, epsilon = 1e-12);
        assert_abs_diff_eq!(sf.lt_z, 0.8 / (sum * sum), epsilon = 1e-10);

        // reconstruction residual on a state basis
        for r in [
            BlochVector::new(0.0, 0.0, 1.0),
            BlochVector::new(0.0, 0.0, -1.0),
            BlochVector::new(1.0, 0.0, 0.0),
            BlochVector::new(0.0, 1.0, 0.0),
            BlochVector::new(0.3, -0.4, 0.5),
        ] {
            let rho = DensityMatrix::from_bloch(&r).0;
            let direct = c.apply_operator(&rho);
            let via = sf.reconstruct(&rho);
            assert!((direct - via).norm() < 1e-9);
        }
    }

    #[test]
    fn sinkhorn_boundary_has_no_normal_form() {
        assert!(matches!(
            ch(0.3, 0.5, 0.5).sinkhorn_form(),
            Err(ChannelError::NoNormalForm(_))
        ));
    }

    #[test]
    fn polyhedron_examples() {
        assert!(PhaseCovChannel::identity().in_polyhedron().is_marginal());
        // vertex of the polyhedron
        assert!(ch(0.0, 0.0, 1.0).in_polyhedron().is_marginal());
        assert!(ch(0.3, 0.2, 0.1).in_polyhedron().holds());
        assert!(ch(1.2, 0.0, 0.0).in_polyhedron().fails());
    }

    #[test]
    fn density_matrix_validation() {
        let good = DensityMatrix::from_bloch(&BlochVector::new(0.1, 0.2, 0.3));
        assert!(DensityMatrix::new(good.0, 1e-12).is_ok());
        let bad = Matrix2::new(
            C64::new(0.9, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.9, 0.0),
        );
        assert!(DensityMatrix::new(bad, 1e-12).is_err());
    }
}
