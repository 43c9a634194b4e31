//! Limited-memory BFGS with Armijo backtracking.
//!
//! The objective is allowed to return +inf (the problem wrapper does this for
//! degenerate lengths); the line search simply rejects such steps. When the
//! quasi-Newton direction goes bad the history is dropped and the step falls
//! back to steepest descent, so every accepted step strictly decreases f.

use std::collections::VecDeque;

pub(crate) struct Params {
    pub mem: usize,
    pub max_iter: usize,
    /// Stop when |g| <= grad_tol * (1 + |f|).
    pub grad_tol: f64,
    pub armijo_c: f64,
    pub shrink: f64,
}

pub(crate) struct Outcome {
    pub x: Vec<f64>,
    #[allow(dead_code)] // asserted on in tests
    pub f: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn minimize<F>(eval: F, x0: Vec<f64>, p: &Params) -> Outcome
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let mut x = x0;
    let (mut f, mut g) = eval(&x);
    assert!(f.is_finite(), "lbfgs: start point has non-finite objective");
    // (s, y, 1/s.y) pairs, oldest first
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut converged = false;

    for _ in 0..p.max_iter {
        let gn = norm(&g);
        if gn <= p.grad_tol * (1.0 + f.abs()) {
            converged = true;
            break;
        }

        // two-loop recursion for d = -H g
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        if !hist.is_empty() {
            let mut alphas = vec![0.0; hist.len()];
            for (idx, (s, y, rho)) in hist.iter().enumerate().rev() {
                let a = rho * dot(s, &d);
                for (di, yi) in d.iter_mut().zip(y) {
                    *di -= a * yi;
                }
                alphas[idx] = a;
            }
            let (ls, ly, _) = hist.back().unwrap();
            let gamma = dot(ls, ly) / dot(ly, ly);
            for di in d.iter_mut() {
                *di *= gamma;
            }
            for ((s, y, rho), a) in hist.iter().zip(alphas) {
                let b = rho * dot(y, &d);
                for (di, si) in d.iter_mut().zip(s) {
                    *di += (a - b) * si;
                }
            }
        }

        let mut dg = dot(&d, &g);
        if !(dg < -1e-12 * norm(&d) * gn) {
            // not a descent direction: restart from steepest descent
            hist.clear();
            d = g.iter().map(|v| -v).collect();
            dg = -gn * gn;
        }

        // Armijo backtracking
        let mut t = if hist.is_empty() { 1.0_f64.min(1.0 / gn.max(1e-12)) } else { 1.0 };
        let mut accepted = None;
        for _ in 0..60 {
            let xt: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + t * di).collect();
            let (ft, gt) = eval(&xt);
            if ft <= f + p.armijo_c * t * dg {
                accepted = Some((xt, ft, gt));
                break;
            }
            t *= p.shrink;
        }

        let Some((xt, ft, gt)) = accepted else {
            if hist.is_empty() {
                // steepest descent cannot move: numerically stationary
                break;
            }
            hist.clear();
            continue;
        };

        let s: Vec<f64> = xt.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gt.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-10 * norm(&s) * norm(&y) {
            hist.push_back((s, y, 1.0 / sy));
            if hist.len() > p.mem {
                hist.pop_front();
            }
        }
        x = xt;
        f = ft;
        g = gt;
        debug_assert_eq!(x.len(), n);
    }

    Outcome { x, f, converged }
}
