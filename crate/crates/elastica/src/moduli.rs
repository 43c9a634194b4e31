//! Branch functions of the pinned critical-point classification.
//!
//! Three scalar functions of the modulus q organize every closed-form family:
//!
//! * `f(q) = (4q^4 - 5q^2 + 1) K + (-8q^4 + 8q^2 - 1) E` whose root q_hat
//!   marks the fold of the arc branches,
//! * `g(q) = 8 (2E - K)^2 (2q^2 - 1)`, the lambda-level map. It rises from 0
//!   at q = 1/sqrt2 to its maximum lambda_hat = g(q_hat), falls back to 0 at
//!   q_star (the root of 2E - K), then rises monotonically to infinity. The
//!   three monotone pieces are [`Branch::One`], [`Branch::Two`],
//!   [`Branch::Three`]; inverting g on them yields the short-arc, long-arc
//!   and loop moduli,
//! * `h(q) = ((4q^2 - 3) K + 2E) / sqrt(2q^2 - 1)`, the scaled total energy
//!   along a branch, with the closed-form derivative
//!   `h'(q) = -f(q) / ((2q^2 - 1)^{3/2} q (1 - q^2))`.
//!
//! K and E are evaluated at q throughout.

use crate::elliptic::{complete_e, complete_k};
use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModuliError {
    #[error("level c = {c} exceeds lambda_hat = {lambda_hat}; branches one and two only cover [0, lambda_hat]")]
    AboveThreshold { c: f64, lambda_hat: f64 },
    #[error("negative level c = {0}; g is nonnegative")]
    NegativeLevel(f64),
}

/// Monotone pieces of g, left to right.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// Increasing, q in [1/sqrt2, q_hat]. Short arcs.
    One,
    /// Decreasing, q in [q_hat, q_star]. Long arcs.
    Two,
    /// Increasing and unbounded, q in [q_star, 1). Loops.
    Three,
}

/// The four constants separating the regimes.
#[derive(Clone, Copy, Debug)]
pub struct Thresholds {
    /// Root of f; fold point of the two arc branches.
    pub q_hat: f64,
    /// Root of 2E - K; boundary between arcs and loops.
    pub q_star: f64,
    /// g(q_hat), the largest lambda an n = 1 arc can carry.
    pub lambda_hat: f64,
    /// Apex height of the rectangular elastica, sqrt2 / (2 (2E - K)) at
    /// q = 1/sqrt2; tip heights above it destabilize the single-cusp fan.
    pub h_star: f64,
}

pub fn f_of(q: f64) -> f64 {
    check_branch_domain(q, "f_of");
    let (k, e) = (complete_k(q), complete_e(q));
    let q2 = q * q;
    (4.0 * q2 * q2 - 5.0 * q2 + 1.0) * k + (-8.0 * q2 * q2 + 8.0 * q2 - 1.0) * e
}

pub fn g_of(q: f64) -> f64 {
    check_branch_domain(q, "g_of");
    let (k, e) = (complete_k(q), complete_e(q));
    let w = 2.0 * e - k;
    8.0 * w * w * (2.0 * q * q - 1.0)
}

pub fn h_of(q: f64) -> f64 {
    let t = 2.0 * q * q - 1.0;
    assert!(
        q.is_finite() && q < 1.0 && t >= 1e-14,
        "h_of: q = {q} at or beyond the 1/sqrt2 singularity of h"
    );
    ((4.0 * q * q - 3.0) * complete_k(q) + 2.0 * complete_e(q)) / t.sqrt()
}

/// Closed-form h'. Shares h's domain and singularity.
pub fn h_prime(q: f64) -> f64 {
    let t = 2.0 * q * q - 1.0;
    assert!(
        q.is_finite() && q < 1.0 && t >= 1e-14,
        "h_prime: q = {q} at or beyond the 1/sqrt2 singularity of h"
    );
    -f_of(q) / (t.powf(1.5) * q * (1.0 - q * q))
}

fn check_branch_domain(q: f64, who: &str) {
    assert!(
        q.is_finite() && q < 1.0 && q >= FRAC_1_SQRT_2 - 1e-15,
        "{who}: q = {q} outside [1/sqrt2, 1)"
    );
}

/// Threshold constants, solved once and cached.
pub fn thresholds() -> &'static Thresholds {
    static CELL: OnceLock<Thresholds> = OnceLock::new();
    CELL.get_or_init(|| {
        let q_hat = bisect_root(|q| f_of(q), FRAC_1_SQRT_2, 0.95);
        let q_star = bisect_root(|q| 2.0 * complete_e(q) - complete_k(q), FRAC_1_SQRT_2, 0.99);
        let lambda_hat = g_of(q_hat);
        let w = 2.0 * complete_e(FRAC_1_SQRT_2) - complete_k(FRAC_1_SQRT_2);
        let h_star = FRAC_1_SQRT_2 / w;
        Thresholds { q_hat, q_star, lambda_hat, h_star }
    })
}

/// Solve g(q) = c on the given monotone branch.
///
/// Levels within 1e-12 of lambda_hat collapse to q_hat on branches one and
/// two (the fold), and levels above that are an error there. Branch three
/// accepts any nonnegative level.
pub fn invert_g(c: f64, branch: Branch) -> Result<f64, ModuliError> {
    assert!(c.is_finite(), "invert_g: level not finite");
    if c < 0.0 {
        return Err(ModuliError::NegativeLevel(c));
    }
    let th = thresholds();
    match branch {
        Branch::One | Branch::Two => {
            if (c - th.lambda_hat).abs() <= 1e-12 {
                return Ok(th.q_hat);
            }
            if c > th.lambda_hat {
                return Err(ModuliError::AboveThreshold { c, lambda_hat: th.lambda_hat });
            }
            let q = if branch == Branch::One {
                bisect_root(|q| g_of(q) - c, FRAC_1_SQRT_2, th.q_hat)
            } else {
                bisect_root(|q| g_of(q) - c, th.q_hat, th.q_star)
            };
            Ok(q)
        }
        Branch::Three => {
            // g is unbounded as q -> 1; walk the upper bracket toward 1
            // until it clears c.
            let mut hi = 0.999;
            while g_of(hi) < c {
                hi = 1.0 - 0.25 * (1.0 - hi);
                assert!(hi < 1.0, "invert_g: bracket walk failed for c = {c}");
            }
            Ok(bisect_root(|q| g_of(q) - c, th.q_star, hi))
        }
    }
}

/// Smallest arc count admissible at lambda: ceil(sqrt(lambda / lambda_hat)),
/// snapped at exact integer ratios.
pub fn n_lambda(lambda: f64) -> u32 {
    assert!(lambda.is_finite() && lambda > 0.0, "n_lambda: lambda = {lambda} must be positive");
    let x = (lambda / thresholds().lambda_hat).sqrt();
    let r = x.round();
    let n = if (x - r).abs() <= 1e-9 { r } else { x.ceil() };
    n.max(1.0) as u32
}

/// Largest obstacle apex height a single long arc at this lambda can clear:
/// q2(lambda) / (2E - K) at q2. Defined for 0 < lambda <= lambda_hat.
pub fn h_lambda(lambda: f64) -> Result<f64, ModuliError> {
    assert!(lambda.is_finite() && lambda > 0.0, "h_lambda: lambda = {lambda} must be positive");
    let q = invert_g(lambda, Branch::Two)?;
    Ok(q / (2.0 * complete_e(q) - complete_k(q)))
}

/// Plain bisection; the functions here are cheap and smooth, and 200 halvings
/// pass f64 resolution long before the cap.
pub(crate) fn bisect_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return lo;
    }
    if fhi == 0.0 {
        return hi;
    }
    assert!((flo < 0.0) != (fhi < 0.0), "bisect_root: no sign change in [{lo}, {hi}]");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values: mpmath at 30 significant digits, rounded to f64.
    const Q_HAT: f64 = 0.7925705716093166;
    const Q_STAR: f64 = 0.9089085575485415;
    const LAMBDA_HAT: f64 = 0.7010734705058863;
    const H_STAR: f64 = 0.8346268416740732;

    #[test]
    fn threshold_constants() {
        let th = thresholds();
        assert!((th.q_hat - Q_HAT).abs() < 1e-13);
        assert!((th.q_star - Q_STAR).abs() < 1e-13);
        assert!((th.lambda_hat - LAMBDA_HAT).abs() < 1e-13);
        assert!((th.h_star - H_STAR).abs() < 1e-13);
        // the defining equations hold at the solved points
        assert!(f_of(th.q_hat).abs() < 1e-12);
        assert!((2.0 * complete_e(th.q_star) - complete_k(th.q_star)).abs() < 1e-12);
    }

    #[test]
    fn branch_function_reference_values() {
        assert!((f_of(FRAC_1_SQRT_2) - 0.4236065423969895).abs() < 1e-13);
        assert!((h_of(Q_HAT) - 3.1610261152152215).abs() < 1e-12);
        assert!((h_of(Q_STAR) - 3.748993360578967).abs() < 1e-12);
        assert!(g_of(FRAC_1_SQRT_2).abs() < 1e-13);
        assert!(g_of(Q_STAR).abs() < 1e-12);
    }

    #[test]
    fn invert_g_matches_reference_branch_points() {
        let one = [
            (0.1, 0.7134885494406742),
            (0.2, 0.7204019615622272),
            (0.3, 0.7280211299834544),
            (0.5, 0.7468320267091101),
            (0.7, 0.7891901685734222),
        ];
        for (c, want) in one {
            assert!((invert_g(c, Branch::One).unwrap() - want).abs() < 1e-11, "q1({c})");
        }
        let two = [
            (0.1, 0.8867994060507802),
            (0.2, 0.8749596077874791),
            (0.3, 0.8641022724903873),
            (0.5, 0.8410396267527144),
            (0.7, 0.7959628755980604),
        ];
        for (c, want) in two {
            assert!((invert_g(c, Branch::Two).unwrap() - want).abs() < 1e-11, "q2({c})");
        }
        let three = [
            (0.1, 0.9254857180786941),
            (0.3, 0.9353418544219874),
            (0.7, 0.9456641117323076),
            (1.5, 0.9568856435941226),
            (2.0, 0.9614854928317559),
        ];
        for (c, want) in three {
            assert!((invert_g(c, Branch::Three).unwrap() - want).abs() < 1e-11, "q3({c})");
        }
    }

    #[test]
    fn invert_g_boundary_and_errors() {
        let th = thresholds();
        // levels within 1e-12 of the fold return q_hat exactly
        assert_eq!(invert_g(th.lambda_hat + 5e-13, Branch::One).unwrap(), th.q_hat);
        assert_eq!(invert_g(th.lambda_hat, Branch::Two).unwrap(), th.q_hat);
        assert!(matches!(
            invert_g(th.lambda_hat + 1e-6, Branch::One),
            Err(ModuliError::AboveThreshold { .. })
        ));
        assert!(matches!(invert_g(-0.1, Branch::Three), Err(ModuliError::NegativeLevel(_))));
        // residuals of the inversion
        for &c in &[1e-6, 0.05, 0.3, 0.69] {
            let q = invert_g(c, Branch::Two).unwrap();
            assert!((g_of(q) - c).abs() <= 1e-10 * c.max(1.0));
        }
    }

    #[test]
    fn arc_count_floor() {
        let lh = thresholds().lambda_hat;
        assert_eq!(n_lambda(0.1), 1);
        assert_eq!(n_lambda(lh), 1);
        assert_eq!(n_lambda(1.01 * lh), 2);
        assert_eq!(n_lambda(4.0 * lh), 2);
        assert_eq!(n_lambda(4.1 * lh), 3);
        assert_eq!(n_lambda(25.0 * lh), 5);
    }

    #[test]
    fn admissible_height_reference_values() {
        assert!((h_lambda(0.1).unwrap() - 6.003187243168015).abs() < 1e-10);
        assert!((h_lambda(0.2).unwrap() - 4.032827811675721).abs() < 1e-10);
        assert!((h_lambda(0.5).unwrap() - 2.1664117902737524).abs() < 1e-10);
        let lh = thresholds().lambda_hat;
        assert!((h_lambda(lh).unwrap() - 1.3555207164002059).abs() < 1e-10);
        assert!(h_lambda(lh + 0.01).is_err());
    }

    #[test]
    fn h_prime_matches_finite_differences() {
        let step = 1e-5;
        for i in 0..=20 {
            let q = 0.75 + 0.2 * (i as f64) / 20.0;
            let fd = (h_of(q + step) - h_of(q - step)) / (2.0 * step);
            let hp = h_prime(q);
            assert!((hp - fd).abs() <= 1e-5 * hp.abs().max(1.0), "q = {q}: {hp} vs fd {fd}");
        }
    }
}
