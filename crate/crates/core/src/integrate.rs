//! Adaptive Dormand–Prince 5(4) integration for linear ODEs on flattened
//! complex vectors.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::state::C64;

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const MAX_STEPS: usize = 2_000_000;

fn combo(y: &DVector<C64>, h: f64, terms: &[(f64, &DVector<C64>)]) -> DVector<C64> {
    let mut out = y.clone();
    for (w, k) in terms {
        if *w != 0.0 {
            out.axpy(C64::new(h * w, 0.0), k, C64::new(1.0, 0.0));
        }
    }
    out
}

/// Integrates `dy/dt = f(t, y)` from `t0` to `t1` and returns `y(t1)`.
pub fn dopri5<F>(f: F, y0: DVector<C64>, t0: f64, t1: f64, tol: Tolerances) -> Result<DVector<C64>>
where
    F: Fn(f64, &DVector<C64>) -> DVector<C64>,
{
    if t1 < t0 {
        return Err(Error::Config(format!("integration interval [{t0}, {t1}] is reversed")));
    }
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(y0);
    }
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = initial_step(&y, &k1, span, tol);
    let min_step = 1e-14 * span.max(1.0);

    for _ in 0..MAX_STEPS {
        if t >= t1 {
            return Ok(y);
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        let k2 = f(t + C2 * h, &combo(&y, h, &[(A21, &k1)]));
        let k3 = f(t + C3 * h, &combo(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * h, &combo(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            t + C5 * h,
            &combo(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + h,
            &combo(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = combo(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = f(t + h, &y_new);

        let mut err = 0.0f64;
        for i in 0..y.len() {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = tol.atol + tol.rtol * y[i].norm().max(y_new[i].norm());
            err = err.max(e.norm() / sc);
        }

        if err <= 1.0 {
            t = if last { t1 } else { t + h };
            y = y_new;
            k1 = k7;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h < min_step && t < t1 {
            return Err(Error::Numerical(format!(
                "step size underflow at t = {t:.6e} (h = {h:.3e})"
            )));
        }
    }
    Err(Error::Numerical(format!("no convergence within {MAX_STEPS} steps")))
}

fn initial_step(y: &DVector<C64>, f0: &DVector<C64>, span: f64, tol: Tolerances) -> f64 {
    let mut d0 = 0.0f64;
    let mut d1 = 0.0f64;
    for i in 0..y.len() {
        let sc = tol.atol + tol.rtol * y[i].norm();
        d0 = d0.max(y[i].norm() / sc);
        d1 = d1.max(f0[i].norm() / sc);
    }
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(span)
}
