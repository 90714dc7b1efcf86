//! Numerical integration: adaptive Gauss-Kronrod quadrature for single
//! integrals and an adaptive Runge-Kutta forward sweep for cumulative
//! (running) integrals of coupled systems.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("quadrature failed to reach tolerance on [{a}, {b}] (best error estimate {err:e})")]
    ToleranceNotMet { a: f64, b: f64, err: f64 },
    #[error("integrand returned a non-finite value at t = {0}")]
    NonFiniteIntegrand(f64),
    #[error("step count limit exceeded in forward sweep at t = {0}")]
    StepLimit(f64),
}

// 7-point Gauss / 15-point Kronrod nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One Gauss-Kronrod panel: returns (integral, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64), QuadError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    if !fc.is_finite() {
        return Err(QuadError::NonFiniteIntegrand(center));
    }
    let mut result_gauss = WG[3] * fc;
    let mut result_kronrod = WGK[7] * fc;
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        if !f1.is_finite() {
            return Err(QuadError::NonFiniteIntegrand(center - x));
        }
        if !f2.is_finite() {
            return Err(QuadError::NonFiniteIntegrand(center + x));
        }
        let fsum = f1 + f2;
        result_kronrod += WGK[j] * fsum;
        if j % 2 == 1 {
            result_gauss += WG[j / 2] * fsum;
        }
    }
    let integral = result_kronrod * half;
    // the raw Gauss/Kronrod difference is a conservative error estimate
    let err = ((result_kronrod - result_gauss) * half).abs();
    Ok((integral, err))
}

/// Adaptive Gauss-Kronrod integration of `f` over `[a, b]` by interval
/// bisection, to absolute tolerance `abs_tol` or relative `rel_tol`.
pub fn adaptive_gk<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64, QuadError> {
    if a == b {
        return Ok(0.0);
    }
    // worklist of (a, b, integral, err)
    let (i0, e0) = gk15(f, a, b)?;
    let mut intervals = vec![(a, b, i0, e0)];
    let max_intervals = 4096;
    loop {
        let total: f64 = intervals.iter().map(|x| x.2).sum();
        let total_err: f64 = intervals.iter().map(|x| x.3).sum();
        if total_err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if intervals.len() >= max_intervals {
            return Err(QuadError::ToleranceNotMet {
                a,
                b,
                err: total_err,
            });
        }
        // split the interval with the largest error estimate
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .unwrap();
        let (ia, ib, _, _) = intervals.swap_remove(idx);
        let mid = 0.5 * (ia + ib);
        let (l, le) = gk15(f, ia, mid)?;
        let (r, re) = gk15(f, mid, ib)?;
        intervals.push((ia, mid, l, le));
        intervals.push((mid, ib, r, re));
    }
}

/// Dormand-Prince 5(4) coefficients.
const DP_C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive Dormand-Prince RK45 sweep for `y' = f(t, y)` on `[t0, t1]`,
/// recording every accepted step through `record`.
pub fn rk45_sweep<const N: usize, F, R>(
    f: &F,
    t0: f64,
    t1: f64,
    y0: [f64; N],
    tol: f64,
    mut record: R,
) -> Result<[f64; N], QuadError>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    R: FnMut(f64, &[f64; N]),
{
    if t1 <= t0 {
        return Ok(y0);
    }
    let mut t = t0;
    let mut y = y0;
    let mut h = ((t1 - t0) / 100.0).min(0.1);
    let mut steps = 0usize;
    let max_steps = 2_000_000;
    while t < t1 {
        if steps >= max_steps {
            return Err(QuadError::StepLimit(t));
        }
        steps += 1;
        h = h.min(t1 - t);
        let mut k = [[0.0; N]; 7];
        k[0] = f(t, &y);
        for stage in 0..6 {
            let mut ys = y;
            for (i, ys_i) in ys.iter_mut().enumerate() {
                for (j, kj) in k.iter().enumerate().take(stage + 1) {
                    *ys_i += h * DP_A[stage][j] * kj[i];
                }
            }
            k[stage + 1] = f(t + DP_C[stage] * h, &ys);
        }
        let mut y5 = y;
        let mut y4 = y;
        for i in 0..N {
            for (j, kj) in k.iter().enumerate() {
                y5[i] += h * DP_B5[j] * kj[i];
                y4[i] += h * DP_B4[j] * kj[i];
            }
        }
        let mut err: f64 = 0.0;
        for i in 0..N {
            if !y5[i].is_finite() {
                return Err(QuadError::NonFiniteIntegrand(t));
            }
            let scale = tol + tol * y5[i].abs().max(y[i].abs());
            err = err.max(((y5[i] - y4[i]) / scale).abs());
        }
        if err <= 1.0 {
            t += h;
            y = y5;
            record(t, &y);
        }
        // standard step-size controller
        let factor = if err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
        if h < 1e-14 * (1.0 + t.abs()) {
            return Err(QuadError::ToleranceNotMet { a: t0, b: t1, err });
        }
    }
    Ok(y)
}
