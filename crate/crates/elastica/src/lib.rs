//! Planar elastica toolkit.
//!
//! Everything here orbits one functional: bending energy plus a length
//! penalty, `E = B + lambda * L`, for unit-speed planar curves that are either
//! pinned at (0,0) and (1,0) or closed at a single base point. The crate
//! provides
//!
//! * [`elliptic`]: the small set of Jacobi/Legendre special functions the
//!   closed forms need (complete and incomplete integrals, amplitude, cn/sn),
//! * [`moduli`]: the scalar branch functions whose roots and inversions
//!   classify the pinned critical points, and the threshold constants,
//! * [`zoo`]: closed-form curve families (arcs, loops, leaf, rectangular
//!   elastica, single-cusp fan) with exact samplers, curvature, and energies,
//! * [`geometry`]: the discrete curve model (turning angles + total length),
//!   obstacles, penalized energies, analytic gradients, and the discrete
//!   variational-inequality pairing,
//! * [`solver`]: multistart penalized descent, threshold sweeps in lambda, a
//!   stability probe for the single-cusp fan, and a minimality check for
//!   closed drops.
//!
//! The multistart/sweep/trial loops are data parallel and run on rayon when
//! the default `parallel` feature is enabled; without it the same code runs
//! sequentially.

pub mod elliptic;
pub mod geometry;
pub mod moduli;
pub mod solver;
pub mod zoo;

mod parallel;

/// Breakdown of the penalized energy `E = B + lambda * L`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Energy {
    /// Integral of squared curvature.
    pub bending: f64,
    /// Total curve length.
    pub length: f64,
    /// `bending + lambda * length` for the lambda it was built with.
    pub total: f64,
}

impl Energy {
    pub fn new(bending: f64, lambda: f64, length: f64) -> Self {
        Energy { bending, length, total: bending + lambda * length }
    }
}

/// True when the crate was built with the rayon-backed `parallel` feature.
pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

/// Round to `digits` significant decimal digits (digits in 1..=17).
///
/// All emitted floats (CSV, JSON reports) pass through this so that repeated
/// runs are byte identical: the shortest decimal representation of the
/// rounded value is stable.
pub fn round_sig(x: f64, digits: u32) -> f64 {
    assert!((1..=17).contains(&digits));
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x }; // normalize -0.0
    }
    format!("{:.*e}", digits as usize - 1, x).parse().expect("round-trip parse")
}
