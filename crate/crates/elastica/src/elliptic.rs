//! Legendre elliptic integrals and Jacobi elliptic functions.
//!
//! Modulus convention throughout: the argument `q` is the *modulus* (often
//! written k elsewhere), so the parameter is m = q^2. The branch functions and
//! curve families downstream are all written in q, which keeps their algebra
//! free of square roots.
//!
//! Implementation notes:
//!
//! * complete integrals: arithmetic-geometric mean (the c-sum variant for E),
//! * incomplete integrals: adaptive 7/15 Gauss-Kronrod at tolerance 1e-13,
//!   applied after quasi-period reduction to the fundamental range,
//! * amplitude `am(u, q)`: per-period reduction plus a safeguarded Newton
//!   solve of F(x, q) = u. Since F' = 1/sqrt(1 - q^2 sin^2 x) >= 1 the solve
//!   is well conditioned on the whole reduced range; a bisection bracket
//!   catches the rare overshoot near the endpoints.
//!
//! Domain violations are programmer errors and panic. The [`Modulus`] wrapper
//! is the checked entry point for values that arrive from user input.

use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EllipticError {
    #[error("modulus q = {0} outside [0, 1)")]
    BadModulus(f64),
}

/// Validated elliptic modulus, `0 <= q < 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Modulus(f64);

impl Modulus {
    pub fn new(q: f64) -> Result<Self, EllipticError> {
        if q.is_finite() && (0.0..1.0).contains(&q) {
            Ok(Modulus(q))
        } else {
            Err(EllipticError::BadModulus(q))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Complete elliptic integral of the first kind K(q).
pub fn complete_k(q: f64) -> f64 {
    assert!(q.is_finite() && (0.0..1.0).contains(&q), "complete_k: modulus q = {q} outside [0, 1)");
    let mut a = 1.0_f64;
    let mut b = (1.0 - q * q).sqrt();
    for _ in 0..40 {
        if (a - b).abs() <= 2.0 * f64::EPSILON * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    PI / (2.0 * a)
}

/// Complete elliptic integral of the second kind E(q). Accepts q = 1 (E = 1).
pub fn complete_e(q: f64) -> f64 {
    assert!(q.is_finite() && (0.0..=1.0).contains(&q), "complete_e: modulus q = {q} outside [0, 1]");
    if q == 1.0 {
        return 1.0;
    }
    let mut a = 1.0_f64;
    let mut b = (1.0 - q * q).sqrt();
    let mut c = q;
    let mut pow = 0.5;
    let mut sum = pow * c * c;
    for _ in 0..40 {
        if c.abs() <= f64::EPSILON {
            break;
        }
        c = 0.5 * (a - b);
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
        pow *= 2.0;
        sum += pow * c * c;
    }
    PI / (2.0 * a) * (1.0 - sum)
}

/// Incomplete integral of the first kind F(x, q) = int_0^x dt / sqrt(1 - q^2 sin^2 t).
///
/// Defined for all real x through F(x + k pi) = F(x) + 2 k K(q).
pub fn incomplete_f(x: f64, q: f64) -> f64 {
    assert!(q.is_finite() && (0.0..1.0).contains(&q), "incomplete_f: modulus q = {q} outside [0, 1)");
    assert!(x.is_finite(), "incomplete_f: x not finite");
    let k = (x / PI).round();
    let xr = x - k * PI;
    let shift = if k == 0.0 { 0.0 } else { 2.0 * k * complete_k(q) };
    shift + adaptive_gk(&|t: f64| 1.0 / (1.0 - sq(q * t.sin())).sqrt(), 0.0, xr, GK_TOL)
}

/// Incomplete integral of the second kind E(x, q) = int_0^x sqrt(1 - q^2 sin^2 t) dt.
///
/// Defined for all real x through E(x + k pi) = E(x) + 2 k E(q); q = 1 allowed.
pub fn incomplete_e(x: f64, q: f64) -> f64 {
    assert!(q.is_finite() && (0.0..=1.0).contains(&q), "incomplete_e: modulus q = {q} outside [0, 1]");
    assert!(x.is_finite(), "incomplete_e: x not finite");
    let k = (x / PI).round();
    let xr = x - k * PI;
    let shift = if k == 0.0 { 0.0 } else { 2.0 * k * complete_e(q) };
    shift + adaptive_gk(&|t: f64| (1.0 - sq(q * t.sin())).max(0.0).sqrt(), 0.0, xr, GK_TOL)
}

/// Jacobi amplitude am(u, q), the inverse of F in its first argument.
pub fn jacobi_am(u: f64, q: f64) -> f64 {
    assert!(q.is_finite() && (0.0..1.0).contains(&q), "jacobi_am: modulus q = {q} outside [0, 1)");
    assert!(u.is_finite(), "jacobi_am: u not finite");
    let kq = complete_k(q);
    // am(u + 2K) = am(u) + pi, so solve only on the fundamental band [-K, K].
    let n = (u / (2.0 * kq)).round();
    let ur = u - 2.0 * n * kq;

    let mut lo = -FRAC_PI_2;
    let mut hi = FRAC_PI_2;
    let mut x = FRAC_PI_2 * (ur / kq).clamp(-1.0, 1.0);
    for _ in 0..60 {
        let fx = adaptive_gk(&|t: f64| 1.0 / (1.0 - sq(q * t.sin())).sqrt(), 0.0, x, GK_TOL) - ur;
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let dx = -fx * (1.0 - sq(q * x.sin())).sqrt();
        if fx.abs() <= 1e-15 * (1.0 + ur.abs()) || dx.abs() <= 1e-16 {
            break;
        }
        x += dx;
        if !(lo..=hi).contains(&x) {
            x = 0.5 * (lo + hi);
        }
    }
    x + n * PI
}

/// Jacobi cn(u, q) = cos(am(u, q)).
pub fn jacobi_cn(u: f64, q: f64) -> f64 {
    jacobi_am(u, q).cos()
}

/// Jacobi sn(u, q) = sin(am(u, q)).
pub fn jacobi_sn(u: f64, q: f64) -> f64 {
    jacobi_am(u, q).sin()
}

/// Jacobi dn(u, q) = sqrt(1 - q^2 sn^2).
pub fn jacobi_dn(u: f64, q: f64) -> f64 {
    (1.0 - sq(q * jacobi_sn(u, q))).max(0.0).sqrt()
}

/// dK/dq = E / (q (1 - q^2)) - K / q. Singular at q = 0.
pub fn dk_dq(q: f64) -> f64 {
    assert!(q.is_finite() && q > 0.0 && q < 1.0, "dk_dq: modulus q = {q} outside (0, 1)");
    complete_e(q) / (q * (1.0 - q * q)) - complete_k(q) / q
}

/// dE/dq = (E - K) / q. Singular at q = 0.
pub fn de_dq(q: f64) -> f64 {
    assert!(q.is_finite() && q > 0.0 && q < 1.0, "de_dq: modulus q = {q} outside (0, 1)");
    (complete_e(q) - complete_k(q)) / q
}

fn sq(x: f64) -> f64 {
    x * x
}

const GK_TOL: f64 = 1e-13;

// 7/15 Gauss-Kronrod pair. Positive Kronrod abscissae; the embedded Gauss rule
// uses every second node. Weights sum to 2 on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120812639206855,
    0.949107912342758524526190,
    0.864864423359769072789712,
    0.741531185599394439863865,
    0.586087235467691130294145,
    0.405845151377397166906606,
    0.207784955007898467600689,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732,
    0.063092092629978553290701,
    0.104790010322250183839876,
    0.140653259715525918745190,
    0.169004726639267902826583,
    0.190350578064785409913256,
    0.204432940075298892414162,
    0.209482141084727828012999,
];
const WG: [f64; 4] = [
    0.129484966168869693270611,
    0.279705391489276667901468,
    0.381830050505118944950370,
    0.417959183673469387755102,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = r * XGK[i];
        let fsum = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * fsum;
        if i % 2 == 1 {
            gauss += WG[i / 2] * fsum;
        }
    }
    (r * kronrod, (r * (kronrod - gauss)).abs())
}

fn adaptive_gk(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (val, err) = gk15(f, a, b);
        if err <= tol * (1.0 + val.abs()) || depth >= 30 {
            return val;
        }
        let m = 0.5 * (a + b);
        recurse(f, a, m, 0.5 * tol, depth + 1) + recurse(f, m, b, 0.5 * tol, depth + 1)
    }
    if a == b {
        return 0.0;
    }
    recurse(f, a, b, tol, 0)
}
