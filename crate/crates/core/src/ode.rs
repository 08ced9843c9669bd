//! Adaptive Dormand–Prince 5(4) integrator for second-order linear systems
//! written as `(y, y′)`, complex-valued, with output at prescribed stops.

use crate::linalg::C64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rtol: 1e-11, atol: 1e-13 }
    }
}

impl Tolerances {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Tolerances { rtol, atol }
    }

    /// Tolerances used for resolvent traces.
    pub fn tight() -> Self {
        Tolerances { rtol: 1e-13, atol: 1e-15 }
    }
}

pub type State = [C64; 2];

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
// Differences between the fifth- and fourth-order weights.
const E1: f64 = 35.0 / 384.0 - 5179.0 / 57600.0;
const E3: f64 = 500.0 / 1113.0 - 7571.0 / 16695.0;
const E4: f64 = 125.0 / 192.0 - 393.0 / 640.0;
const E5: f64 = -2187.0 / 6784.0 + 92097.0 / 339200.0;
const E6: f64 = 11.0 / 84.0 - 187.0 / 2100.0;
const E7: f64 = -1.0 / 40.0;

const MAX_STEPS: usize = 5_000_000;

#[inline]
fn axpy(y: &State, terms: &[(f64, &State)], h: f64) -> State {
    let mut out = *y;
    for (a, k) in terms {
        out[0] += k[0] * (a * h);
        out[1] += k[1] * (a * h);
    }
    out
}

/// Integrates `y′ = f(x, y)` from `x0` through every point in `stops`
/// (monotone, all on the same side of `x0`), returning the state at each.
///
/// `h0` is the initial step magnitude; the error norm mixes relative and
/// absolute tolerances per component.
pub fn integrate<F>(
    f: F,
    x0: f64,
    y0: State,
    stops: &[f64],
    tol: Tolerances,
    h0: f64,
) -> Result<Vec<State>, String>
where
    F: Fn(f64, &State) -> State,
{
    let mut out = Vec::with_capacity(stops.len());
    let Some(&last) = stops.last() else {
        return Ok(out);
    };
    let dir = if last >= x0 { 1.0 } else { -1.0 };
    let span = (last - x0).abs().max(f64::MIN_POSITIVE);
    let mut h = h0.abs().min(span).max(1e-14 * span);
    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, &y);
    let mut steps = 0;

    for &stop in stops {
        if (stop - x) * dir < 0.0 {
            return Err(format!("stops are not monotone ({stop} after {x})"));
        }
        while (stop - x) * dir > 0.0 {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(format!("step budget exhausted at x = {x}"));
            }
            let remaining = (stop - x).abs();
            let hit = h >= remaining * (1.0 - 1e-12);
            let hs = if hit { remaining } else { h } * dir;

            let k2 = f(x + C2 * hs, &axpy(&y, &[(A21, &k1)], hs));
            let k3 = f(x + C3 * hs, &axpy(&y, &[(A31, &k1), (A32, &k2)], hs));
            let k4 = f(x + C4 * hs, &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], hs));
            let k5 = f(
                x + C5 * hs,
                &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], hs),
            );
            let k6 = f(
                x + hs,
                &axpy(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], hs),
            );
            let y_new = axpy(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], hs);
            let x_new = if hit { stop } else { x + hs };
            let k7 = f(x_new, &y_new);

            let mut err2 = 0.0;
            for i in 0..2 {
                let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * hs;
                let sc = tol.atol + tol.rtol * y[i].norm().max(y_new[i].norm());
                err2 += (e.norm() / sc).powi(2);
            }
            let err = (0.5 * err2).sqrt();
            if !err.is_finite() {
                return Err(format!("non-finite state near x = {x}"));
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                x = x_new;
                y = y_new;
                k1 = k7;
                // A step cut short to land on a stop says little about the
                // admissible size, so only let it shrink h.
                if !hit {
                    h *= factor;
                } else if factor < 1.0 {
                    h = remaining * factor;
                }
            } else {
                h = hs.abs() * factor.min(1.0);
                if h < 1e-14 * span.max(x.abs()) {
                    return Err(format!("step size underflow at x = {x}"));
                }
            }
        }
        out.push(y);
    }
    Ok(out)
}
