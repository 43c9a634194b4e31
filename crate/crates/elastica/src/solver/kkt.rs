//! First-order residual at a candidate minimizer, measured on the
//! unpenalized energy. The gradient of `B + lambda L` is reduced by its best
//! representation over the constraint normals (free multipliers on the two
//! endpoint equalities, nonnegative ones on the active contact rows); the
//! leftover norm is the projected gradient. Unlike the penalized gradient it
//! does not stall at the hinge stiffness of the final weight round, so it
//! certifies contact solutions on the same footing as free ones.

use super::problem::{fold_gradient, Encoding};
use crate::geometry::{
    energy_gradient, position_gradient, slack_values, DiscreteCurve, Obstacle, Penalty, SlackMode,
};

pub(crate) fn projected_residual(
    c: &DiscreteCurve,
    lambda: f64,
    obstacle: Option<(&Obstacle, SlackMode)>,
    encoding: Encoding,
) -> f64 {
    let g = fold_gradient(encoding, energy_gradient(c, lambda, &Penalty::none()));
    let n = c.segment_count();
    let pos = c.positions();

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let node_row = |i: usize, f: [f64; 2]| {
        let mut force = vec![[0.0; 2]; n + 1];
        force[i] = f;
        fold_gradient(encoding, position_gradient(c, &force))
    };
    // endpoint pin, both components
    rows.push(node_row(n, [1.0, 0.0]));
    rows.push(node_row(n, [0.0, 1.0]));
    let eq_count = rows.len();
    if let Some((obs, mode)) = obstacle {
        let tol = obs.touch_tol();
        for (i, s) in slack_values(c, obs, mode).iter().enumerate() {
            if *s <= tol {
                let dy = match mode {
                    SlackMode::Standard => 1.0,
                    SlackMode::Rhomb => {
                        if pos[i][1] < 0.0 {
                            -1.0
                        } else {
                            1.0
                        }
                    }
                };
                rows.push(node_row(i, [-obs.psi_prime(pos[i][0]), dy]));
            }
        }
    }
    leftover_norm(&g, &rows, eq_count)
}

/// min over multipliers of `|g - sum_k mu_k rows_k|`, the contact rows
/// (index >= eq_count) restricted to mu_k >= 0. Negative contact multipliers
/// are dropped one at a time; any admissible combination only overestimates
/// the true minimum, so roundoff here can never certify a non-stationary
/// point.
fn leftover_norm(g: &[f64], rows: &[Vec<f64>], eq_count: usize) -> f64 {
    let mut active: Vec<usize> = (0..rows.len()).collect();
    loop {
        let a = active.len();
        if a == 0 {
            return norm(g);
        }
        let mut gram = vec![vec![0.0; a]; a];
        let mut rhs = vec![0.0; a];
        for p in 0..a {
            rhs[p] = dot(&rows[active[p]], g);
            for q in 0..a {
                gram[p][q] = dot(&rows[active[p]], &rows[active[q]]);
            }
        }
        let mu = solve(gram, rhs);
        let scale = mu.iter().fold(1.0, |m: f64, v| m.max(v.abs()));
        let worst = (0..a)
            .filter(|&p| active[p] >= eq_count && mu[p] < -1e-9 * scale)
            .min_by(|&p, &q| mu[p].total_cmp(&mu[q]));
        match worst {
            Some(p) => {
                active.swap_remove(p);
            }
            None => {
                let mut left = g.to_vec();
                for (p, &k) in active.iter().enumerate() {
                    let m = if k >= eq_count { mu[p].max(0.0) } else { mu[p] };
                    for (li, ri) in left.iter_mut().zip(&rows[k]) {
                        *li -= m * ri;
                    }
                }
                return norm(&left);
            }
        }
    }
}

/// Gaussian elimination with partial pivoting on the (PSD, possibly
/// rank-deficient) Gram system; a vanishing pivot marks a dependent row,
/// whose multiplier is set to zero.
fn solve(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    let tol = 1e-13 * m.iter().map(|r| r.iter().fold(0.0, |x: f64, v| x.max(v.abs()))).fold(0.0, f64::max);
    for k in 0..n {
        let p = (k..n).max_by(|&r, &s| m[r][k].abs().total_cmp(&m[s][k].abs())).unwrap();
        if m[p][k].abs() <= tol {
            m[k] = vec![0.0; n];
            m[k][k] = 1.0;
            for r in m.iter_mut().skip(k + 1) {
                r[k] = 0.0;
            }
            b[k] = 0.0;
            continue;
        }
        m.swap(k, p);
        b.swap(k, p);
        for r in k + 1..n {
            let f = m[r][k] / m[k][k];
            for c in k..n {
                m[r][c] -= f * m[k][c];
            }
            b[r] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|c| m[k][c] * x[c]).sum();
        x[k] = (b[k] - s) / m[k][k];
    }
    x
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}
