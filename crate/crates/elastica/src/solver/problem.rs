//! Variable packing for the penalized minimization.
//!
//! A candidate is the vector `v = [angles.., L]`. In `Half` encoding the
//! stored angles are the first half of a mirror-symmetric curve
//! (theta_{N+1-j} = -theta_j), which bakes the symmetry class into the search
//! space and halves the dimension; `Full` keeps every segment angle free and
//! is used for the closed-drop experiments.

use crate::geometry::{
    energy_gradient, mirror_half_angles, penalized_energy, DiscreteCurve, EnergyGradient,
    Obstacle, Penalty, SlackMode,
};

#[derive(Clone, Copy)]
pub(crate) enum Encoding {
    Half,
    Full,
}

/// Push a full-curve gradient down to the packed variables.
pub(crate) fn fold_gradient(encoding: Encoding, gr: EnergyGradient) -> Vec<f64> {
    let n = gr.wrt_angles.len();
    let mut g = match encoding {
        Encoding::Half => {
            let m = n / 2;
            // d theta_{N+1-j} / d v_j = -1
            (0..m).map(|j| gr.wrt_angles[j] - gr.wrt_angles[n - 1 - j]).collect::<Vec<f64>>()
        }
        Encoding::Full => gr.wrt_angles,
    };
    g.push(gr.wrt_length);
    g
}

pub(crate) struct Problem<'a> {
    pub encoding: Encoding,
    pub lambda: f64,
    pub base: [f64; 2],
    pub target: [f64; 2],
    pub endpoint_weight: f64,
    pub obstacle: Option<(&'a Obstacle, SlackMode)>,
    pub obstacle_weight: f64,
    /// Hinge origin per full-curve node (multiplier carry-over between rounds).
    pub obstacle_shift: Option<&'a [f64]>,
    pub min_length: f64,
}

impl Problem<'_> {
    pub fn decode(&self, v: &[f64]) -> Option<DiscreteCurve> {
        let m = v.len() - 1;
        let l = v[m];
        if !(l.is_finite() && l > self.min_length) {
            return None;
        }
        let angles = match self.encoding {
            Encoding::Half => mirror_half_angles(&v[..m]),
            Encoding::Full => v[..m].to_vec(),
        };
        DiscreteCurve::new(l, angles, self.base).ok()
    }

    fn penalty(&self) -> Penalty<'_> {
        Penalty {
            endpoint_target: Some(self.target),
            endpoint_weight: self.endpoint_weight,
            obstacle: self.obstacle,
            obstacle_weight: self.obstacle_weight,
            obstacle_shift: self.obstacle_shift,
        }
    }

    /// Objective value and gradient in the packed variables. Degenerate
    /// candidates get +inf so the line search backs away from them.
    pub fn eval(&self, v: &[f64]) -> (f64, Vec<f64>) {
        let Some(c) = self.decode(v) else {
            return (f64::INFINITY, vec![0.0; v.len()]);
        };
        let pen = self.penalty();
        let f = penalized_energy(&c, self.lambda, &pen);
        if !f.is_finite() {
            return (f64::INFINITY, vec![0.0; v.len()]);
        }
        let gr = energy_gradient(&c, self.lambda, &pen);
        (f, fold_gradient(self.encoding, gr))
    }
}
