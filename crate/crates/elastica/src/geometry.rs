//! Discrete curve model, obstacles, penalized energies and their gradients.
//!
//! A curve is a turning-angle chain: N equal segments of length L/N, segment i
//! pointing along angle theta_i, from a fixed base point. Bending energy is
//! the squared angle-difference sum `B = (N/L) sum (theta_{i+1} - theta_i)^2`,
//! the discrete counterpart of the integral of squared curvature.
//!
//! Obstacles are graphs y = psi(x): a symmetric cone or a sampled Lipschitz
//! profile (piecewise linear, linearly extended outside its sample range).
//! Admissibility is `y >= psi(x)` per node in standard mode, `|y| >= psi(x)`
//! in rhomb mode.

use crate::Energy;
use serde::{Deserialize, Serialize};
use std::io::{self, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("discrete curve needs at least 8 segments, got {0}")]
    TooFewSegments(usize),
    #[error("discrete curve rejected: angles must be finite and total length positive (L = {0})")]
    BadCurve(f64),
    #[error("invalid obstacle: {0}")]
    BadObstacle(String),
    #[error("obstacle json: {0}")]
    Json(String),
    #[error("test direction must be nonnegative, node {0} is {1}")]
    NegativeDirection(usize, f64),
    #[error("test direction must vanish at both endpoints")]
    DirectionEndpoints,
    #[error("test direction has {got} nodes, curve needs {want}")]
    DirectionLength { got: usize, want: usize },
    #[error("operation defined for cone obstacles only")]
    ConeOnly,
}

/// Equal-segment turning-angle curve.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteCurve {
    total_length: f64,
    angles: Vec<f64>,
    base: [f64; 2],
}

impl DiscreteCurve {
    /// At least 8 segments, positive finite length, finite angles.
    pub fn new(total_length: f64, angles: Vec<f64>, base: [f64; 2]) -> Result<Self, GeometryError> {
        if angles.len() < 8 {
            return Err(GeometryError::TooFewSegments(angles.len()));
        }
        let ok = total_length.is_finite()
            && total_length > 0.0
            && base.iter().all(|v| v.is_finite())
            && angles.iter().all(|v| v.is_finite());
        if !ok {
            return Err(GeometryError::BadCurve(total_length));
        }
        Ok(DiscreteCurve { total_length, angles, base })
    }

    pub fn segment_count(&self) -> usize {
        self.angles.len()
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn h(&self) -> f64 {
        self.total_length / self.angles.len() as f64
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn base(&self) -> [f64; 2] {
        self.base
    }

    /// All N+1 node positions, base first.
    pub fn positions(&self) -> Vec<[f64; 2]> {
        let h = self.h();
        let mut p = Vec::with_capacity(self.angles.len() + 1);
        let (mut x, mut y) = (self.base[0], self.base[1]);
        p.push([x, y]);
        for &th in &self.angles {
            x += h * th.cos();
            y += h * th.sin();
            p.push([x, y]);
        }
        p
    }

    pub fn endpoint(&self) -> [f64; 2] {
        let h = self.h();
        let (mut x, mut y) = (self.base[0], self.base[1]);
        for &th in &self.angles {
            x += h * th.cos();
            y += h * th.sin();
        }
        [x, y]
    }

    /// Interior node curvatures (theta_{i+1} - theta_i)/h, N-1 values.
    pub fn node_curvatures(&self) -> Vec<f64> {
        let h = self.h();
        self.angles.windows(2).map(|w| (w[1] - w[0]) / h).collect()
    }

    /// Largest node-wise position distance to an equally refined curve.
    pub fn sup_distance(&self, other: &DiscreteCurve) -> f64 {
        assert_eq!(
            self.segment_count(),
            other.segment_count(),
            "sup_distance compares curves at equal segment counts"
        );
        self.positions()
            .iter()
            .zip(other.positions())
            .map(|(a, b)| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt())
            .fold(0.0, f64::max)
    }

    /// CSV rows `s,x,y,theta,k`, one per node. Node angles average the two
    /// adjacent segments (single adjacent at the ends); node curvature is the
    /// interior angle difference over h, zero at the ends.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let n = self.angles.len();
        let h = self.h();
        let pos = self.positions();
        writeln!(w, "s,x,y,theta,k")?;
        for i in 0..=n {
            let theta = if i == 0 {
                self.angles[0]
            } else if i == n {
                self.angles[n - 1]
            } else {
                0.5 * (self.angles[i - 1] + self.angles[i])
            };
            let k = if i == 0 || i == n { 0.0 } else { (self.angles[i] - self.angles[i - 1]) / h };
            writeln!(
                w,
                "{},{},{},{},{}",
                crate::round_sig(i as f64 * h, 12),
                crate::round_sig(pos[i][0], 12),
                crate::round_sig(pos[i][1], 12),
                crate::round_sig(theta, 12),
                crate::round_sig(k, 12),
            )?;
        }
        Ok(())
    }
}

/// Mirror a half-curve angle list about the vertical axis through its far
/// end: the full curve is the half followed by the reversed, negated half.
pub fn mirror_half_angles(half: &[f64]) -> Vec<f64> {
    let mut full = Vec::with_capacity(2 * half.len());
    full.extend_from_slice(half);
    full.extend(half.iter().rev().map(|&t| -t));
    full
}

/// Obstacle graph y = psi(x). Serialized with a `kind` tag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Obstacle {
    /// psi(x) = height - slope * |x - 1/2|.
    Cone { slope: f64, height: f64 },
    /// Piecewise-linear through strictly x-increasing nodes, extended
    /// linearly outside the sampled range with the edge slopes.
    SampledLipschitz { nodes: Vec<[f64; 2]>, lipschitz: f64 },
}

impl Obstacle {
    pub fn cone(height: f64, slope: f64) -> Result<Self, GeometryError> {
        let o = Obstacle::Cone { slope, height };
        o.validate()?;
        Ok(o)
    }

    pub fn sampled(nodes: Vec<[f64; 2]>, lipschitz: f64) -> Result<Self, GeometryError> {
        let o = Obstacle::SampledLipschitz { nodes, lipschitz };
        o.validate()?;
        Ok(o)
    }

    /// The admissibility conditions: positive apex inside (0, 1), negative at
    /// both pinned ends, and (sampled case) slopes within the stated
    /// Lipschitz constant.
    pub fn validate(&self) -> Result<(), GeometryError> {
        let bad = |m: String| Err(GeometryError::BadObstacle(m));
        match self {
            Obstacle::Cone { slope, height } => {
                if !(height.is_finite() && *height > 0.0) {
                    return bad(format!("cone height {height} must be positive"));
                }
                if !(slope.is_finite() && *slope > 0.0) {
                    return bad(format!("cone slope {slope} must be positive"));
                }
                if *slope <= 2.0 * *height {
                    return bad(format!(
                        "cone slope {slope} must exceed twice the height {height} so psi < 0 at both ends"
                    ));
                }
                Ok(())
            }
            Obstacle::SampledLipschitz { nodes, lipschitz } => {
                if nodes.len() < 2 {
                    return bad("sampled obstacle needs at least 2 nodes".into());
                }
                if !nodes.iter().all(|n| n[0].is_finite() && n[1].is_finite()) {
                    return bad("sampled obstacle has non-finite nodes".into());
                }
                if !(lipschitz.is_finite() && *lipschitz > 0.0) {
                    return bad(format!("lipschitz constant {lipschitz} must be positive"));
                }
                for w in nodes.windows(2) {
                    if w[1][0] <= w[0][0] {
                        return bad("sampled obstacle nodes must be strictly increasing in x".into());
                    }
                    let s = (w[1][1] - w[0][1]) / (w[1][0] - w[0][0]);
                    if s.abs() > lipschitz * (1.0 + 1e-12) {
                        return bad(format!(
                            "segment slope {s} exceeds the stated lipschitz constant {lipschitz}"
                        ));
                    }
                }
                if nodes[0][0] > 0.0 || nodes[nodes.len() - 1][0] < 1.0 {
                    return bad("sampled obstacle must cover [0, 1]".into());
                }
                if self.psi(0.0) >= 0.0 || self.psi(1.0) >= 0.0 {
                    return bad("obstacle must be negative at both pinned ends".into());
                }
                let apex = self.apex();
                if apex.1 <= 0.0 {
                    return bad("obstacle apex must be positive inside (0, 1)".into());
                }
                Ok(())
            }
        }
    }

    pub fn psi(&self, x: f64) -> f64 {
        match self {
            Obstacle::Cone { slope, height } => height - slope * (x - 0.5).abs(),
            Obstacle::SampledLipschitz { nodes, .. } => {
                let last = nodes.len() - 1;
                if x <= nodes[0][0] {
                    let s = seg_slope(nodes[0], nodes[1]);
                    return nodes[0][1] + s * (x - nodes[0][0]);
                }
                if x >= nodes[last][0] {
                    let s = seg_slope(nodes[last - 1], nodes[last]);
                    return nodes[last][1] + s * (x - nodes[last][0]);
                }
                let j = nodes.partition_point(|n| n[0] <= x).min(last);
                let (a, b) = (nodes[j - 1], nodes[j]);
                a[1] + seg_slope(a, b) * (x - a[0])
            }
        }
    }

    /// One-sided derivative of psi (right-continuous at kinks; 0 at the cone
    /// apex).
    pub fn psi_prime(&self, x: f64) -> f64 {
        match self {
            Obstacle::Cone { slope, .. } => {
                if x == 0.5 {
                    0.0
                } else {
                    -slope * (x - 0.5).signum()
                }
            }
            Obstacle::SampledLipschitz { nodes, .. } => {
                let last = nodes.len() - 1;
                if x <= nodes[0][0] {
                    return seg_slope(nodes[0], nodes[1]);
                }
                if x >= nodes[last][0] {
                    return seg_slope(nodes[last - 1], nodes[last]);
                }
                let j = nodes.partition_point(|n| n[0] <= x).min(last);
                seg_slope(nodes[j - 1], nodes[j])
            }
        }
    }

    /// Highest point of psi over [0, 1] as (x, psi(x)).
    pub fn apex(&self) -> (f64, f64) {
        match self {
            Obstacle::Cone { height, .. } => (0.5, *height),
            Obstacle::SampledLipschitz { nodes, .. } => {
                let mut best = (0.0, self.psi(0.0));
                for n in nodes.iter().filter(|n| n[0] > 0.0 && n[0] < 1.0) {
                    if n[1] > best.1 {
                        best = (n[0], n[1]);
                    }
                }
                let end = (1.0, self.psi(1.0));
                if end.1 > best.1 {
                    best = end;
                }
                best
            }
        }
    }

    /// Coincidence tolerance: 1e-3 of the apex height.
    pub fn touch_tol(&self) -> f64 {
        1e-3 * self.apex().1
    }

    pub fn from_json(s: &str) -> Result<Self, GeometryError> {
        let o: Obstacle = serde_json::from_str(s).map_err(|e| GeometryError::Json(e.to_string()))?;
        o.validate()?;
        Ok(o)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("obstacle serializes")
    }
}

fn seg_slope(a: [f64; 2], b: [f64; 2]) -> f64 {
    (b[1] - a[1]) / (b[0] - a[0])
}

/// Which admissibility relation the slack encodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlackMode {
    /// slack = y - psi(x)
    Standard,
    /// slack = |y| - psi(x)
    Rhomb,
}

/// Where and how closely a curve meets the obstacle.
#[derive(Clone, Debug)]
pub struct CoincidenceSummary {
    pub touching: bool,
    pub touch_nodes: Vec<usize>,
    pub min_gap: f64,
}

/// Per-node slack values (N+1 entries).
pub fn slack_values(c: &DiscreteCurve, obstacle: &Obstacle, mode: SlackMode) -> Vec<f64> {
    c.positions()
        .iter()
        .map(|p| match mode {
            SlackMode::Standard => p[1] - obstacle.psi(p[0]),
            SlackMode::Rhomb => p[1].abs() - obstacle.psi(p[0]),
        })
        .collect()
}

/// Nodes within the coincidence tolerance of the obstacle, and the smallest
/// gap (negative = penetration).
pub fn constraint_slack(c: &DiscreteCurve, obstacle: &Obstacle, mode: SlackMode) -> CoincidenceSummary {
    let tol = obstacle.touch_tol();
    let slack = slack_values(c, obstacle, mode);
    let touch_nodes: Vec<usize> =
        slack.iter().enumerate().filter(|(_, s)| **s <= tol).map(|(i, _)| i).collect();
    let min_gap = slack.iter().copied().fold(f64::INFINITY, f64::min);
    CoincidenceSummary { touching: !touch_nodes.is_empty(), touch_nodes, min_gap }
}

/// Bending, length, and `B + lambda L`.
pub fn discrete_energy(c: &DiscreteCurve, lambda: f64) -> Energy {
    let h = c.h();
    let b: f64 = c.angles().windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum::<f64>() / h;
    Energy::new(b, lambda, c.total_length())
}

/// Soft-constraint terms added to the energy: a quadratic endpoint tether and
/// an arclength-weighted hinge on negative obstacle slack. `obstacle_shift`
/// raises the hinge origin per node (slack units, N+1 entries); a multiplier
/// carried between penalty rounds lands here, so exit feasibility does not
/// hinge on the weight alone.
#[derive(Clone, Copy, Debug)]
pub struct Penalty<'a> {
    pub endpoint_target: Option<[f64; 2]>,
    pub endpoint_weight: f64,
    pub obstacle: Option<(&'a Obstacle, SlackMode)>,
    pub obstacle_weight: f64,
    pub obstacle_shift: Option<&'a [f64]>,
}

impl Penalty<'_> {
    pub fn none() -> Self {
        Penalty {
            endpoint_target: None,
            endpoint_weight: 0.0,
            obstacle: None,
            obstacle_weight: 0.0,
            obstacle_shift: None,
        }
    }
}

/// E = B + lambda L + w_end |p_N - target|^2 + w_obs h sum relu(shift - slack)^2.
pub fn penalized_energy(c: &DiscreteCurve, lambda: f64, pen: &Penalty) -> f64 {
    let mut e = discrete_energy(c, lambda).total;
    let pos = c.positions();
    if let Some(t) = pen.endpoint_target {
        let p = pos[pos.len() - 1];
        e += pen.endpoint_weight * ((p[0] - t[0]).powi(2) + (p[1] - t[1]).powi(2));
    }
    if let Some((obs, mode)) = pen.obstacle {
        let h = c.h();
        let mut hinge = 0.0;
        for (i, p) in pos.iter().enumerate() {
            let s = match mode {
                SlackMode::Standard => p[1] - obs.psi(p[0]),
                SlackMode::Rhomb => p[1].abs() - obs.psi(p[0]),
            };
            let sh = s - pen.obstacle_shift.map_or(0.0, |sig| sig[i]);
            if sh < 0.0 {
                hinge += sh * sh;
            }
        }
        e += pen.obstacle_weight * h * hinge;
    }
    e
}

/// Gradient of [`penalized_energy`] over (theta_1..theta_N, L).
#[derive(Clone, Debug)]
pub struct EnergyGradient {
    pub wrt_angles: Vec<f64>,
    pub wrt_length: f64,
}

pub fn energy_gradient(c: &DiscreteCurve, lambda: f64, pen: &Penalty) -> EnergyGradient {
    let th = c.angles();
    let n = th.len();
    let l = c.total_length();
    let h = c.h();
    let pos = c.positions();

    // bending part
    let mut g = vec![0.0; n];
    let mut b = 0.0;
    for i in 0..n - 1 {
        let d = th[i + 1] - th[i];
        b += d * d;
        g[i] -= 2.0 * d / h;
        g[i + 1] += 2.0 * d / h;
    }
    b /= h;
    let mut gl = -b / l + lambda;

    // position-dependent parts enter through per-node forces dE/dp_i
    let mut force = vec![[0.0; 2]; n + 1];
    if let Some(t) = pen.endpoint_target {
        let p = pos[n];
        force[n][0] += 2.0 * pen.endpoint_weight * (p[0] - t[0]);
        force[n][1] += 2.0 * pen.endpoint_weight * (p[1] - t[1]);
    }
    if let Some((obs, mode)) = pen.obstacle {
        let mut hinge = 0.0;
        for (i, p) in pos.iter().enumerate() {
            let (s, dy) = match mode {
                SlackMode::Standard => (p[1] - obs.psi(p[0]), 1.0),
                SlackMode::Rhomb => (p[1].abs() - obs.psi(p[0]), if p[1] < 0.0 { -1.0 } else { 1.0 }),
            };
            let sh = s - pen.obstacle_shift.map_or(0.0, |sig| sig[i]);
            if sh < 0.0 {
                hinge += sh * sh;
                let w = 2.0 * pen.obstacle_weight * h * sh;
                force[i][0] += w * (-obs.psi_prime(p[0]));
                force[i][1] += w * dy;
            }
        }
        // the explicit h = L/N factor of the hinge quadrature
        gl += pen.obstacle_weight * hinge / n as f64;
    }

    let pg = position_gradient(c, &force);
    for (gj, pj) in g.iter_mut().zip(pg.wrt_angles) {
        *gj += pj;
    }
    EnergyGradient { wrt_angles: g, wrt_length: gl + pg.wrt_length }
}

/// Chain rule from per-node derivatives `force[i] = d phi / d p_i` of a
/// scalar that sees the curve only through node positions:
/// d phi/d theta_j = <sum_{i>j} force_i, h (-sin, cos)(theta_j)>,
/// d phi/d L = sum_i <force_i, (p_i - base)/L>.
pub fn position_gradient(c: &DiscreteCurve, force: &[[f64; 2]]) -> EnergyGradient {
    let th = c.angles();
    let n = th.len();
    let l = c.total_length();
    let h = c.h();
    let pos = c.positions();
    let mut g = vec![0.0; n];
    let mut sfx = [0.0; 2];
    for j in (0..n).rev() {
        sfx[0] += force[j + 1][0];
        sfx[1] += force[j + 1][1];
        g[j] = h * (-th[j].sin() * sfx[0] + th[j].cos() * sfx[1]);
    }
    let mut gl = 0.0;
    for (i, f) in force.iter().enumerate() {
        gl += (f[0] * (pos[i][0] - c.base()[0]) + f[1] * (pos[i][1] - c.base()[1])) / l;
    }
    EnergyGradient { wrt_angles: g, wrt_length: gl }
}

/// Discrete first-variation pairing of the energy at `c` against a
/// nonnegative normal test direction `phi` given at nodes (N+1 values,
/// vanishing at both ends). Nonnegative result at a constrained minimizer is
/// the discrete variational inequality.
pub fn vi_pairing(c: &DiscreteCurve, lambda: f64, phi: &[f64]) -> Result<f64, GeometryError> {
    let n = c.segment_count();
    if phi.len() != n + 1 {
        return Err(GeometryError::DirectionLength { got: phi.len(), want: n + 1 });
    }
    for (i, &v) in phi.iter().enumerate() {
        if v < 0.0 || !v.is_finite() {
            return Err(GeometryError::NegativeDirection(i, v));
        }
    }
    if phi[0].abs() > 1e-12 || phi[n].abs() > 1e-12 {
        return Err(GeometryError::DirectionEndpoints);
    }
    let th = c.angles();
    let h = c.h();
    let mut acc = 0.0;
    for i in 1..n {
        let k = (th[i] - th[i - 1]) / h;
        let tb = 0.5 * (th[i] + th[i - 1]);
        let dp = (phi[i + 1] - phi[i - 1]) / (2.0 * h);
        let ddp = (phi[i + 1] - 2.0 * phi[i] + phi[i - 1]) / (h * h);
        acc += 2.0 * k * tb.cos() * ddp - 3.0 * k * k * tb.sin() * dp - lambda * k * tb.cos() * phi[i];
    }
    Ok(acc * h)
}

pub const NONVERTICALITY_TOL: f64 = 1e-3;

/// For each touching node, whether the node tangent is within `tol` radians
/// of vertical (true = violation). Node tangents average the adjacent
/// segment angles.
pub fn nonverticality_check(
    c: &DiscreteCurve,
    obstacle: &Obstacle,
    mode: SlackMode,
    tol: f64,
) -> Vec<bool> {
    let th = c.angles();
    let n = th.len();
    constraint_slack(c, obstacle, mode)
        .touch_nodes
        .iter()
        .map(|&i| {
            let a = if i == 0 {
                th[0]
            } else if i == n {
                th[n - 1]
            } else {
                0.5 * (th[i - 1] + th[i])
            };
            let d = a.abs().rem_euclid(std::f64::consts::PI);
            (d - std::f64::consts::FRAC_PI_2).abs() <= tol
        })
        .collect()
}

/// Contact-angle margin of a cone: min(atan(slope) - atan(2 height),
/// atan(2 height)). Positive by the admissibility conditions.
pub fn c_psi(obstacle: &Obstacle) -> Result<f64, GeometryError> {
    match obstacle {
        Obstacle::Cone { slope, height } => {
            let a = slope.atan();
            let b = (2.0 * height).atan();
            Ok((a - b).min(b))
        }
        _ => Err(GeometryError::ConeOnly),
    }
}

/// Piecewise-linear hat profile at the curve nodes, peak 1 at `center`.
pub fn hat_bump(n_segments: usize, length: f64, center: f64, halfwidth: f64) -> Vec<f64> {
    bump_profile(n_segments, length, center, halfwidth, |t| 1.0 - t.abs())
}

/// (1 - t^2)^3 profile, C^2 at the support edges.
pub fn smooth_bump(n_segments: usize, length: f64, center: f64, halfwidth: f64) -> Vec<f64> {
    bump_profile(n_segments, length, center, halfwidth, |t| {
        let w = 1.0 - t * t;
        w * w * w
    })
}

fn bump_profile(
    n_segments: usize,
    length: f64,
    center: f64,
    halfwidth: f64,
    f: impl Fn(f64) -> f64,
) -> Vec<f64> {
    assert!(halfwidth > 0.0 && length > 0.0);
    let h = length / n_segments as f64;
    let mut v: Vec<f64> = (0..=n_segments)
        .map(|i| {
            let t = (i as f64 * h - center) / halfwidth;
            if t.abs() >= 1.0 {
                0.0
            } else {
                f(t)
            }
        })
        .collect();
    // test directions must vanish at the pinned ends exactly
    v[0] = 0.0;
    v[n_segments] = 0.0;
    v
}

/// Bending energy of an arbitrary polyline: squared turning angle over the
/// average adjacent edge length, summed over interior vertices. Agrees with
/// [`discrete_energy`] on equal-segment chains.
pub fn polyline_bending_energy(p: &[[f64; 2]]) -> f64 {
    assert!(p.len() >= 3, "polyline needs at least 3 vertices");
    let m = p.len() - 1;
    let mut th = Vec::with_capacity(m);
    let mut el = Vec::with_capacity(m);
    for i in 0..m {
        let dx = p[i + 1][0] - p[i][0];
        let dy = p[i + 1][1] - p[i][1];
        el.push((dx * dx + dy * dy).sqrt());
        th.push(dy.atan2(dx));
    }
    let mut b = 0.0;
    for i in 0..m - 1 {
        let mut d = th[i + 1] - th[i];
        d -= std::f64::consts::TAU * (d / std::f64::consts::TAU).round();
        b += d * d / (0.5 * (el[i] + el[i + 1]));
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn straight(n: usize) -> DiscreteCurve {
        DiscreteCurve::new(1.0, vec![0.0; n], [0.0, 0.0]).unwrap()
    }

    #[test]
    fn curve_validation() {
        assert!(matches!(
            DiscreteCurve::new(1.0, vec![0.0; 7], [0.0, 0.0]),
            Err(GeometryError::TooFewSegments(7))
        ));
        assert!(DiscreteCurve::new(0.0, vec![0.0; 8], [0.0, 0.0]).is_err());
        assert!(DiscreteCurve::new(1.0, vec![f64::NAN; 8], [0.0, 0.0]).is_err());
    }

    #[test]
    fn straight_chain_positions_and_energy() {
        let c = straight(16);
        let p = c.positions();
        assert_eq!(p.len(), 17);
        assert!((p[16][0] - 1.0).abs() < 1e-15);
        assert_eq!(p[16][1], 0.0);
        let e = discrete_energy(&c, 0.7);
        assert_eq!(e.bending, 0.0);
        assert!((e.total - 0.7).abs() < 1e-15);
    }

    #[test]
    fn semicircle_bending_matches_continuum() {
        // half circle of length 1, curvature pi, B = pi^2. The first-difference
        // sum has n-1 interior terms, so the discrete value is exactly
        // pi^2 (n-1)/n: one missing end cell of curvature mass, an O(1/n)
        // boundary effect that vanishes for curves with k = 0 at the ends.
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        for n in [128usize, 512] {
            let th: Vec<f64> = (0..n)
                .map(|i| {
                    std::f64::consts::FRAC_PI_2 - std::f64::consts::PI * (i as f64 + 0.5) / n as f64
                })
                .collect();
            let c = DiscreteCurve::new(1.0, th, [0.0, 0.0]).unwrap();
            let b = discrete_energy(&c, 0.0).bending;
            assert!((b - pi2 * (n as f64 - 1.0) / n as f64).abs() < 1e-10);
            assert!((b - pi2).abs() < 1.01 * pi2 / n as f64);
            // polyline route agrees on equal segments
            let bp = polyline_bending_energy(&c.positions());
            assert!((bp - b).abs() < 1e-9 * b);
        }
    }

    #[test]
    fn obstacle_json_round_trip_and_validation() {
        let o = Obstacle::cone(0.3, 1.2).unwrap();
        let s = o.to_json();
        assert!(s.contains("\"kind\":\"cone\""));
        let back = Obstacle::from_json(&s).unwrap();
        assert_eq!(o, back);
        assert!(Obstacle::cone(0.3, 0.5).is_err()); // slope <= 2 height
        assert!(Obstacle::cone(-0.3, 1.2).is_err());
        let bad = r#"{"kind":"cone","slope":0.5,"height":0.3}"#;
        assert!(Obstacle::from_json(bad).is_err());

        let nodes = vec![[-0.5, -1.0], [0.5, 0.3], [1.5, -1.0]];
        let o = Obstacle::sampled(nodes, 1.4).unwrap();
        assert!((o.psi(0.5) - 0.3).abs() < 1e-15);
        assert!(o.psi(0.0) < 0.0);
        let back = Obstacle::from_json(&o.to_json()).unwrap();
        assert_eq!(o, back);
        // slope above the stated constant is rejected
        assert!(Obstacle::sampled(vec![[-0.5, -1.0], [0.5, 0.3], [1.5, -1.0]], 1.0).is_err());
    }

    #[test]
    fn cone_psi_and_margin() {
        let o = Obstacle::cone(0.3, 1.2).unwrap();
        assert!((o.psi(0.5) - 0.3).abs() < 1e-15);
        assert!((o.psi(0.25) - 0.0).abs() < 1e-15);
        assert!((o.psi(0.0) - (-0.3)).abs() < 1e-15);
        assert_eq!(o.psi_prime(0.3), 1.2);
        assert_eq!(o.psi_prime(0.7), -1.2);
        let c = c_psi(&o).unwrap();
        let expect = (1.2_f64.atan() - 0.6_f64.atan()).min(0.6_f64.atan());
        assert!((c - expect).abs() < 1e-15);
        let s = Obstacle::sampled(vec![[-0.5, -1.0], [0.5, 0.3], [1.5, -1.0]], 1.4).unwrap();
        assert!(matches!(c_psi(&s), Err(GeometryError::ConeOnly)));
    }

    #[test]
    fn slack_and_touching() {
        let o = Obstacle::cone(0.3, 1.2).unwrap();
        // straight chain on the axis dips under the cone interior
        let c = straight(16);
        let cs = constraint_slack(&c, &o, SlackMode::Standard);
        assert!(cs.touching);
        assert!(cs.min_gap < 0.0);
        assert!((cs.min_gap + 0.3).abs() < 1e-12); // worst node at the apex
        // rhomb mode sees |y|, same here since y = 0
        let cr = constraint_slack(&c, &o, SlackMode::Rhomb);
        assert_eq!(cs.touch_nodes, cr.touch_nodes);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let o = Obstacle::cone(0.3, 1.2).unwrap();
        let n = 16;
        let th: Vec<f64> = (0..n).map(|i| 0.4 * ((i as f64 * 0.7).sin())).collect();
        let shift: Vec<f64> = (0..=n).map(|i| 0.02 * (1.0 + (i as f64 * 0.9).cos())).collect();
        for sig in [None, Some(shift.as_slice())] {
            let pen = Penalty {
                endpoint_target: Some([1.0, 0.0]),
                endpoint_weight: 3.0,
                obstacle: Some((&o, SlackMode::Standard)),
                obstacle_weight: 5.0,
                obstacle_shift: sig,
            };
            let c = DiscreteCurve::new(1.3, th.clone(), [0.0, 0.0]).unwrap();
            let g = energy_gradient(&c, 0.8, &pen);
            let eps = 1e-6;
            for j in 0..n {
                let mut tp = th.clone();
                tp[j] += eps;
                let mut tm = th.clone();
                tm[j] -= eps;
                let fp =
                    penalized_energy(&DiscreteCurve::new(1.3, tp, [0.0, 0.0]).unwrap(), 0.8, &pen);
                let fm =
                    penalized_energy(&DiscreteCurve::new(1.3, tm, [0.0, 0.0]).unwrap(), 0.8, &pen);
                let fd = (fp - fm) / (2.0 * eps);
                assert!(
                    (g.wrt_angles[j] - fd).abs() <= 1e-5 * fd.abs().max(1.0),
                    "dtheta_{j}: {} vs {fd}",
                    g.wrt_angles[j]
                );
            }
            let fp = penalized_energy(
                &DiscreteCurve::new(1.3 + eps, th.clone(), [0.0, 0.0]).unwrap(),
                0.8,
                &pen,
            );
            let fm = penalized_energy(
                &DiscreteCurve::new(1.3 - eps, th.clone(), [0.0, 0.0]).unwrap(),
                0.8,
                &pen,
            );
            let fd = (fp - fm) / (2.0 * eps);
            assert!(
                (g.wrt_length - fd).abs() <= 1e-5 * fd.abs().max(1.0),
                "dL: {} vs {fd}",
                g.wrt_length
            );
        }
    }

    #[test]
    fn vi_pairing_validates_and_is_linear() {
        let c = straight(16);
        let phi = smooth_bump(16, 1.0, 0.5, 0.3);
        assert_eq!(vi_pairing(&c, 0.5, &phi).unwrap(), 0.0); // straight line: k = 0
        let mut neg = phi.clone();
        neg[8] = -0.1;
        assert!(matches!(vi_pairing(&c, 0.5, &neg), Err(GeometryError::NegativeDirection(8, _))));
        let mut ends = phi.clone();
        ends[0] = 0.2;
        assert!(matches!(vi_pairing(&c, 0.5, &ends), Err(GeometryError::DirectionEndpoints)));
        assert!(matches!(
            vi_pairing(&c, 0.5, &phi[..16]),
            Err(GeometryError::DirectionLength { got: 16, want: 17 })
        ));

        // linearity in phi on a bent curve
        let th: Vec<f64> = (0..16).map(|i| (i as f64 * 0.3).sin() * 0.5).collect();
        let bent = DiscreteCurve::new(1.2, th, [0.0, 0.0]).unwrap();
        let a = vi_pairing(&bent, 0.5, &phi).unwrap();
        let scaled: Vec<f64> = phi.iter().map(|v| 2.5 * v).collect();
        let b = vi_pairing(&bent, 0.5, &scaled).unwrap();
        assert!((b - 2.5 * a).abs() < 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn bump_profiles() {
        let b = smooth_bump(32, 2.0, 1.0, 0.5);
        assert_eq!(b.len(), 33);
        assert_eq!(b[0], 0.0);
        assert_eq!(b[32], 0.0);
        assert!((b[16] - 1.0).abs() < 1e-15); // node 16 sits at the center
        assert!(b.iter().all(|&v| (0.0..=1.0).contains(&v)));
        let h = hat_bump(32, 2.0, 1.0, 0.5);
        assert!((h[12] - (1.0 - 0.5)).abs() < 1e-12); // |t| = 0.5
    }

    #[test]
    fn mirror_and_sup_distance() {
        let half = vec![0.4, 0.3, 0.2, 0.1];
        let full = mirror_half_angles(&half);
        assert_eq!(full, vec![0.4, 0.3, 0.2, 0.1, -0.1, -0.2, -0.3, -0.4]);
        let c = DiscreteCurve::new(1.5, full, [0.0, 0.0]).unwrap();
        // mirror symmetry closes the vertical component exactly
        assert!(c.endpoint()[1].abs() < 1e-15);
        let d = c.sup_distance(&c);
        assert_eq!(d, 0.0);
    }

    #[test]
    fn csv_shape() {
        let c = straight(8);
        let mut out = Vec::new();
        c.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "s,x,y,theta,k");
        assert_eq!(lines.len(), 10);
        assert!(lines[9].starts_with("1,1,0,"));
    }
}
