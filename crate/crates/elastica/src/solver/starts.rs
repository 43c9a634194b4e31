//! Start-curve pools for the multistart search.
//!
//! The energy landscape has (at least) two basins against an obstacle: stay
//! low and touch, or buy length and go around. The deterministic starts cover
//! both; seeded Fourier perturbations of the semicircle fill the remaining
//! slots. Everything is deterministic given the seed.

use crate::geometry::Obstacle;
use crate::moduli::{n_lambda, thresholds};
use crate::zoo::{self, Family};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

pub(crate) struct Start {
    pub label: String,
    /// Packed angles: half profile for the pinned problems, full profile for
    /// the drop problems.
    pub angles: Vec<f64>,
    pub length: f64,
}

fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    // splash the index so nearby seeds do not produce shifted pools
    ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Pool for the pinned obstacle problem, in half encoding (m = segments / 2
/// packed angles).
pub(crate) fn pinned_starts(
    lambda: f64,
    segments: usize,
    obstacle: Option<&Obstacle>,
    count: usize,
    amplitude: f64,
    seed: u64,
) -> Vec<Start> {
    let m = segments / 2;
    let mut pool = Vec::new();

    pool.push(Start { label: "segment".into(), angles: vec![0.0; m], length: 1.05 });

    let semicircle: Vec<f64> =
        (0..m).map(|j| FRAC_PI_2 - PI * (j as f64 + 0.5) / segments as f64).collect();
    pool.push(Start { label: "semicircle".into(), angles: semicircle.clone(), length: FRAC_PI_2 });

    if let Ok(spec) = zoo::make_pinned(Family::Larc, lambda, n_lambda(lambda)) {
        let c = spec.export(segments);
        pool.push(Start {
            label: "larc".into(),
            angles: c.angles()[..m].to_vec(),
            length: c.total_length(),
        });
    }

    if let Some(obs) = obstacle {
        if let Ok(c) = zoo::escaping_competitor(obs, lambda, segments) {
            pool.push(Start {
                label: "escape".into(),
                angles: c.angles()[..m].to_vec(),
                length: c.total_length(),
            });
        }
        if let Ok(c) = zoo::leaf_segment_competitor(lambda, thresholds().q_star, segments) {
            pool.push(Start {
                label: "leafseg".into(),
                angles: c.angles()[..m].to_vec(),
                length: c.total_length(),
            });
        }
    }

    let deterministic = pool.len();
    for i in deterministic..count.max(deterministic) {
        let mut rng = rng_for(seed, i as u64);
        let coeffs: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let angles: Vec<f64> = (0..m)
            .map(|j| {
                let t = (j as f64 + 0.5) / m as f64;
                let wiggle: f64 = coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, a)| a * (PI * (k + 1) as f64 * t).sin() / (k + 1) as f64)
                    .sum();
                semicircle[j] + amplitude * PI * wiggle
            })
            .collect();
        let length = (FRAC_PI_2 * (1.0 + amplitude * rng.gen_range(-0.5..0.5))).max(1.05);
        pool.push(Start { label: format!("fourier-{}", i - deterministic), angles, length });
    }
    pool
}

/// Pool for the closed-drop problem, in full encoding. Trials alternate
/// between circle-like (one full turn of the tangent) and wave-like (zero
/// net turn) shapes, both randomized; a clean figure-eight export is always
/// included first.
pub(crate) fn drop_starts(lambda: f64, segments: usize, trials: usize, seed: u64) -> Vec<Start> {
    let leaf = zoo::make_pinned(Family::Leaf, lambda, 1).expect("leaf exists for all lambda > 0");
    let leaf_curve = leaf.export(segments);
    let mut pool = vec![Start {
        label: "leaf".into(),
        angles: leaf_curve.angles().to_vec(),
        length: leaf_curve.total_length(),
    }];

    for i in 0..trials {
        let mut rng = rng_for(seed, 1000 + i as u64);
        let winding = (i % 2) as f64;
        let sin_c: [f64; 5] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let cos_c: [f64; 5] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let angles: Vec<f64> = (0..segments)
            .map(|j| {
                let t = (j as f64 + 0.5) / segments as f64;
                let mut a = winding * (-PI + TAU * t);
                for k in 0..5 {
                    let w = TAU * (k + 1) as f64 * t;
                    a += 1.2 / (k + 1) as f64 * (sin_c[k] * w.sin() + cos_c[k] * w.cos());
                }
                a
            })
            .collect();
        let length = leaf_curve.total_length() * rng.gen_range(0.6..1.6);
        let label = format!("drop-{}-w{}", i, i % 2);
        pool.push(Start { label, angles, length });
    }
    pool
}
