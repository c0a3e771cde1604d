//! Adaptive Gauss–Kronrod quadrature (G7–K15) with interval bisection.

/// 15-point Kronrod nodes on [-1, 1] (positive half; symmetric).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];
/// Kronrod weights matching `XGK`.
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
/// Gauss weights for the embedded 7-point rule (nodes XGK[1], XGK[3], ...).
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let f0 = f(c);
    let mut kronrod = WGK[7] * f0;
    let mut gauss = WG[3] * f0;
    for i in 0..7 {
        let x = XGK[i];
        let pair = f(c - h * x) + f(c + h * x);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    let val = kronrod * h;
    let err = ((kronrod - gauss) * h).abs();
    (val, err)
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> (f64, f64) {
    let (val, err) = gk15(f, a, b);
    // stop at the requested tolerance, at the f64 noise floor for this
    // interval, or when bisection cannot make progress
    if err <= tol || err <= 64.0 * f64::EPSILON * val.abs() || depth >= 28 || (b - a).abs() < 1e-14
    {
        return (val, err);
    }
    let c = 0.5 * (a + b);
    let (v1, e1) = adapt(f, a, c, tol / 2.0, depth + 1);
    let (v2, e2) = adapt(f, c, b, tol / 2.0, depth + 1);
    (v1 + v2, e1 + e2)
}

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
/// Returns `(value, error_estimate)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    if a == b {
        return (0.0, 0.0);
    }
    adapt(&f, a, b, tol, 0)
}

/// Integrate `f` over `[a, ∞)` by summing doubling segments until two
/// consecutive segments contribute less than `tol / 4` each.
/// The integrand must decay; the discarded tail is folded into the estimate.
pub fn integrate_to_inf<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64) -> (f64, f64) {
    let mut total = 0.0;
    let mut err = 0.0;
    let mut lo = a;
    let mut width = 1.0f64;
    let mut quiet = 0;
    for _ in 0..64 {
        let hi = lo + width;
        let (v, e) = adapt(&f, lo, hi, tol / 8.0, 0);
        total += v;
        err += e;
        if v.abs() < tol / 4.0 {
            quiet += 1;
            if quiet >= 2 {
                return (total, err + v.abs());
            }
        } else {
            quiet = 0;
        }
        lo = hi;
        width *= 2.0;
    }
    (total, err + tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exact() {
        let (v, _) = integrate(|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-12);
        // antiderivative x^4/4 - x^2 + x
        let exact = (81.0 / 4.0 - 9.0 + 3.0) - (0.25 - 1.0 - 1.0);
        assert!((v - exact).abs() < 1e-10);
    }

    #[test]
    fn oscillatory() {
        let (v, _) = integrate(|x| (10.0 * x).sin(), 0.0, PI, 1e-12);
        let exact = (1.0 - (10.0 * PI).cos()) / 10.0;
        assert!((v - exact).abs() < 1e-10);
    }

    #[test]
    fn semi_infinite_gaussian() {
        let (v, _) = integrate_to_inf(|x| (-x * x / 2.0).exp(), 0.0, 1e-12);
        assert!((v - (PI / 2.0).sqrt()).abs() < 1e-9);
    }
}
