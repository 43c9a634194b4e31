//! Closed-form critical curves of `B + lambda L` pinned at (0,0) and (1,0),
//! plus the constructions built from them.
//!
//! All the smooth families share one parametrization through the Jacobi
//! amplitude. With `u = alpha s - K(q)`,
//!
//! ```text
//! x(s) = (2 E(am(u), q) + 2 E(q)) / alpha - s        (arcs, leaf, rect)
//! x(s) = s - (2 E(am(u), q) + 2 E(q)) / alpha        (loops)
//! y(s) = 2 q cn(u) / alpha
//! theta(s) = -2 asin(q sn(u))                        (+ pi for loops)
//! k(s) = -2 alpha q cn(u)                            (sign flipped for loops)
//! ```
//!
//! which is unit speed for every q. Branch selection fixes q from lambda and
//! the half-wave count n; alpha then scales the curve onto the pinned ends.
//! Bending energy closes to `B = 8 n alpha (E - (1 - q^2) K)` for every
//! cn-family, loops included.

use crate::elliptic::{complete_e, complete_k, incomplete_e, jacobi_am};
use crate::geometry::{DiscreteCurve, Obstacle};
use crate::moduli::{self, Branch};
use crate::Energy;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ZooError {
    #[error("{family} inadmissible at lambda = {lambda} with n = {n}: lambda/n^2 exceeds lambda_hat")]
    Inadmissible { family: Family, lambda: f64, n: u32 },
    #[error("lambda = {0} invalid here (must be positive and finite; rect requires lambda = 0)")]
    BadLambda(f64),
    #[error("half-wave count n must be at least 1")]
    BadCount,
    #[error("tip height {0} must lie in [1e-6, inf)")]
    BadTipHeight(f64),
    #[error("escape radius 1/sqrt(lambda) = {radius} too small; this cone needs more than {min_radius}")]
    RadiusTooSmall { radius: f64, min_radius: f64 },
    #[error("leaf-segment modulus q_n = {0} must lie in (1/sqrt2, 1)")]
    BadLeafModulus(f64),
    #[error("leaf-segment pieces meet the mirror axis (apex x = {0} >= 1/2); pick a larger q_n or smaller lambda")]
    LeafSegmentOverlap(f64),
    #[error("escaping competitor is defined against cone obstacles")]
    ConeOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// Short arcs: q on the rising branch of g, below the fold.
    Sarc,
    /// Long arcs: q on the falling branch, between the fold and q_star.
    Larc,
    /// Self-intersecting loops: q above q_star.
    Loop,
    /// Closed figure-eight lobe at exactly q_star; drop candidate.
    Leaf,
    /// Rectangular elastica, the lambda = 0 borderline curve.
    Rect,
    /// The straight segment.
    Segment,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Family::Sarc => "sarc",
            Family::Larc => "larc",
            Family::Loop => "loop",
            Family::Leaf => "leaf",
            Family::Rect => "rect",
            Family::Segment => "segment",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sarc" => Ok(Family::Sarc),
            "larc" => Ok(Family::Larc),
            "loop" => Ok(Family::Loop),
            "leaf" => Ok(Family::Leaf),
            "rect" => Ok(Family::Rect),
            "segment" => Ok(Family::Segment),
            _ => Err(format!("unknown family '{s}' (sarc|larc|loop|leaf|rect|segment)")),
        }
    }
}

/// A fully determined closed-form curve.
#[derive(Clone, Copy, Debug)]
pub struct ElasticaSpec {
    pub family: Family,
    pub lambda: f64,
    pub n: u32,
    pub q: f64,
    pub alpha: f64,
    pub length: f64,
    reflected: bool,
}

/// Resolve family + lambda + n to a concrete curve.
///
/// Arcs invert g(q) = lambda/n^2 on their branch and fail when that level
/// exceeds the fold value lambda_hat (i.e. n < n_lambda). Loops exist for all
/// positive lambda. Rect is the fixed lambda = 0 curve (pass lambda = 0).
pub fn make_pinned(family: Family, lambda: f64, n: u32) -> Result<ElasticaSpec, ZooError> {
    if n < 1 {
        return Err(ZooError::BadCount);
    }
    let nf = n as f64;
    match family {
        Family::Rect => {
            if lambda != 0.0 {
                return Err(ZooError::BadLambda(lambda));
            }
            let q = FRAC_1_SQRT_2;
            let alpha = 2.0 * (2.0 * complete_e(q) - complete_k(q));
            Ok(ElasticaSpec {
                family,
                lambda: 0.0,
                n: 1,
                q,
                alpha,
                length: 2.0 * complete_k(q) / alpha,
                reflected: false,
            })
        }
        Family::Segment => {
            if !(lambda.is_finite() && lambda >= 0.0) {
                return Err(ZooError::BadLambda(lambda));
            }
            Ok(ElasticaSpec { family, lambda, n: 1, q: 0.0, alpha: 0.0, length: 1.0, reflected: false })
        }
        _ => {
            if !(lambda.is_finite() && lambda > 0.0) {
                return Err(ZooError::BadLambda(lambda));
            }
            let level = lambda / (nf * nf);
            let q = match family {
                Family::Sarc => moduli::invert_g(level, Branch::One),
                Family::Larc => moduli::invert_g(level, Branch::Two),
                Family::Loop => moduli::invert_g(level, Branch::Three),
                Family::Leaf => Ok(moduli::thresholds().q_star),
                _ => unreachable!(),
            }
            .map_err(|_| ZooError::Inadmissible { family, lambda, n })?;
            let (k, e) = (complete_k(q), complete_e(q));
            let alpha = match family {
                Family::Sarc | Family::Larc => 2.0 * nf * (2.0 * e - k),
                Family::Loop => 2.0 * nf * (k - 2.0 * e),
                // leaf: 2E - K = 0, alpha comes from the lambda scaling law
                Family::Leaf => (lambda / (2.0 * (2.0 * q * q - 1.0))).sqrt(),
                _ => unreachable!(),
            };
            debug_assert!(alpha > 0.0);
            Ok(ElasticaSpec { family, lambda, n, q, alpha, length: 2.0 * nf * k / alpha, reflected: false })
        }
    }
}

impl ElasticaSpec {
    pub fn rect() -> ElasticaSpec {
        make_pinned(Family::Rect, 0.0, 1).expect("rect spec")
    }

    /// Mirror image across the x-axis.
    pub fn reflected(mut self) -> ElasticaSpec {
        self.reflected = !self.reflected;
        self
    }

    pub fn is_reflected(&self) -> bool {
        self.reflected
    }

    /// Position at arclength s in [0, length].
    pub fn sample(&self, s: f64) -> [f64; 2] {
        let p = match self.family {
            Family::Segment => [s, 0.0],
            _ => {
                let u = self.alpha * s - complete_k(self.q);
                let am = jacobi_am(u, self.q);
                let ei = incomplete_e(am, self.q) + complete_e(self.q);
                let y = 2.0 * self.q * am.cos() / self.alpha;
                match self.family {
                    Family::Loop => [s - 2.0 * ei / self.alpha, y],
                    _ => [2.0 * ei / self.alpha - s, y],
                }
            }
        };
        if self.reflected {
            [p[0], -p[1]]
        } else {
            p
        }
    }

    /// Continuous tangent-angle lift at arclength s.
    pub fn tangent_angle(&self, s: f64) -> f64 {
        let t = match self.family {
            Family::Segment => 0.0,
            _ => {
                let u = self.alpha * s - complete_k(self.q);
                let sn = jacobi_am(u, self.q).sin();
                match self.family {
                    Family::Loop => PI + 2.0 * (self.q * sn).asin(),
                    _ => -2.0 * (self.q * sn).asin(),
                }
            }
        };
        if self.reflected {
            -t
        } else {
            t
        }
    }

    /// Signed curvature at arclength s.
    pub fn signed_curvature(&self, s: f64) -> f64 {
        let k = match self.family {
            Family::Segment => 0.0,
            _ => {
                let u = self.alpha * s - complete_k(self.q);
                let cn = jacobi_am(u, self.q).cos();
                match self.family {
                    Family::Loop => 2.0 * self.alpha * self.q * cn,
                    _ => -2.0 * self.alpha * self.q * cn,
                }
            }
        };
        if self.reflected {
            -k
        } else {
            k
        }
    }

    /// Exact bending energy, length, and total `B + lambda L`.
    pub fn closed_form_energy(&self) -> Energy {
        let b = match self.family {
            Family::Segment => 0.0,
            _ => {
                let (k, e) = (complete_k(self.q), complete_e(self.q));
                8.0 * self.n as f64 * self.alpha * (e - (1.0 - self.q * self.q) * k)
            }
        };
        Energy::new(b, self.lambda, self.length)
    }

    /// Equal-segment discretization: segment angles are the exact tangent
    /// angles at segment midpoints.
    pub fn export(&self, segments: usize) -> DiscreteCurve {
        let h = self.length / segments as f64;
        let angles: Vec<f64> = (0..segments).map(|i| self.tangent_angle((i as f64 + 0.5) * h)).collect();
        DiscreteCurve::new(self.length, angles, [0.0, 0.0]).expect("export curve")
    }
}

/// Polar tangential angle of the rectangular elastica:
/// omega(s) = theta(s) - atan2(y(s), x(s)), s in (0, L_rect).
///
/// Both terms are already continuous there (y > 0 and x' = cn^2 >= 0 keep
/// atan2 off its cut), so this is the exact lift. It is *not* monotone all
/// the way to L_rect: it decreases to a minimum near s = 1.856 and then rises
/// back toward -pi/2. The single-bump construction below therefore only
/// bisects on (0, s1], s1 = [`construction_window_end`], where -omega rises
/// strictly from 0 to pi/2.
pub fn polar_tangential_angle_rect(s: f64) -> f64 {
    let rect = rect_cached();
    assert!(s > 0.0 && s < rect.length, "polar_tangential_angle_rect: s = {s} outside (0, L_rect)");
    let p = rect.sample(s);
    rect.tangent_angle(s) - p[1].atan2(p[0])
}

fn rect_cached() -> &'static ElasticaSpec {
    static CELL: OnceLock<ElasticaSpec> = OnceLock::new();
    CELL.get_or_init(ElasticaSpec::rect)
}

/// Largest usable arclength of the single-bump construction: the unique
/// interior s where -omega reaches pi/2 (tan(-omega) blows up there, not at
/// L_rect).
pub fn construction_window_end() -> f64 {
    static CELL: OnceLock<f64> = OnceLock::new();
    *CELL.get_or_init(|| {
        let l = rect_cached().length;
        moduli::bisect_root(|s| -polar_tangential_angle_rect(s) - FRAC_PI_2, 0.5 * l, l - 1e-6)
    })
}

/// Single-cusp fan: one rectangular-elastica bump, rotated and scaled so the
/// half curve runs from (0,0) to the tip (1/2, tip_height) with a horizontal
/// tangent, then mirrored. `phi` is the rotation, `alpha` the scaling,
/// `ell` the rectangular arclength consumed per half.
#[derive(Clone, Copy, Debug)]
pub struct ScfSpec {
    pub ell: f64,
    pub alpha: f64,
    pub phi: f64,
    pub half_length: f64,
    pub tip_height: f64,
}

pub fn make_scf(tip_height: f64) -> Result<ScfSpec, ZooError> {
    if !(tip_height.is_finite() && tip_height >= 1e-6) {
        return Err(ZooError::BadTipHeight(tip_height));
    }
    let target = (2.0 * tip_height).atan();
    let s1 = construction_window_end();
    // -omega rises strictly from 0 to pi/2 on (0, s1]
    let ell = moduli::bisect_root(|s| -polar_tangential_angle_rect(s) - target, 1e-7, s1);
    let rect = rect_cached();
    let phi = -rect.tangent_angle(ell);
    let g = rect.sample(ell);
    let rx = phi.cos() * g[0] - phi.sin() * g[1];
    let alpha = 2.0 * rx;
    debug_assert!(alpha > 0.0);
    Ok(ScfSpec { ell, alpha, phi, half_length: ell / alpha, tip_height })
}

impl ScfSpec {
    pub fn total_length(&self) -> f64 {
        2.0 * self.half_length
    }

    pub fn sample(&self, s: f64) -> [f64; 2] {
        if s <= self.half_length {
            let g = rect_cached().sample(self.alpha * s);
            let (c, sn) = (self.phi.cos(), self.phi.sin());
            [(c * g[0] - sn * g[1]) / self.alpha, (sn * g[0] + c * g[1]) / self.alpha]
        } else {
            let p = self.sample(self.total_length() - s);
            [1.0 - p[0], p[1]]
        }
    }

    pub fn tangent_angle(&self, s: f64) -> f64 {
        if s <= self.half_length {
            rect_cached().tangent_angle(self.alpha * s) + self.phi
        } else {
            -self.tangent_angle(self.total_length() - s)
        }
    }

    pub fn curvature(&self, s: f64) -> f64 {
        if s <= self.half_length {
            self.alpha * rect_cached().signed_curvature(self.alpha * s)
        } else {
            self.curvature(self.total_length() - s)
        }
    }

    /// One-sided curvature derivative at the tip, k'(L/2^-). Negative below
    /// the threshold height, zero at it, positive above: the trichotomy that
    /// separates stable fans from unstable ones.
    pub fn curvature_slope_at_tip(&self) -> f64 {
        let q = FRAC_1_SQRT_2;
        let alpha0 = rect_cached().alpha;
        let u = alpha0 * self.ell - complete_k(q);
        let am = jacobi_am(u, q);
        let sn = am.sin();
        let dn = (1.0 - q * q * sn * sn).sqrt();
        self.alpha * self.alpha * std::f64::consts::SQRT_2 * alpha0 * alpha0 * sn * dn
    }

    /// Equal-segment discretization (even segment count).
    pub fn export(&self, segments: usize) -> DiscreteCurve {
        assert!(segments % 2 == 0, "scf export wants an even segment count");
        let l = self.total_length();
        let h = l / segments as f64;
        let angles: Vec<f64> = (0..segments).map(|i| self.tangent_angle((i as f64 + 0.5) * h)).collect();
        DiscreteCurve::new(l, angles, [0.0, 0.0]).expect("scf export")
    }
}

struct EscapeGeometry {
    r: f64,
    phi0: f64,
    r2: f64,
    l1: f64,
    l2: f64, // quarter-circle over the top, per half
}

impl EscapeGeometry {
    fn total_length(&self) -> f64 {
        2.0 * (self.l1 + self.l2)
    }

    /// Continuous tangent-angle lift, shifted so the apex angle is 0.
    fn tangent_angle(&self, s: f64) -> f64 {
        let raw = if s <= self.l1 {
            self.phi0 - s / self.r - FRAC_PI_2
        } else if s <= self.l1 + 2.0 * self.l2 {
            -PI - (s - self.l1) / self.r2 - FRAC_PI_2
        } else {
            -(s - self.l1 - 2.0 * self.l2) / self.r - FRAC_PI_2 - 2.0 * PI
        };
        raw + 2.0 * PI
    }
}

fn escape_geometry(obstacle: &Obstacle, lambda: f64) -> Result<EscapeGeometry, ZooError> {
    let (slope, height) = match obstacle {
        Obstacle::Cone { slope, height } => (*slope, *height),
        _ => return Err(ZooError::ConeOnly),
    };
    assert!(lambda.is_finite() && lambda > 0.0, "escape_geometry: lambda must be positive");
    let a = slope;
    let b = height - 0.5 * a; // psi(0) < 0 by the cone admissibility conditions
    let r = 1.0 / lambda.sqrt();
    let root = (a * a + 1.0).sqrt();
    let min_radius = -b / (2.0 * root);
    if r <= min_radius {
        return Err(ZooError::RadiusTooSmall { radius: r, min_radius });
    }
    // circle of radius r through the origin, tangent to the left leg
    // y = b + a x from above
    let c = b + r * root;
    let s = (-b * b - 2.0 * b * r * root).sqrt();
    let x = -(a * c + s) / (a * a + 1.0);
    let y = (c - a * s) / (a * a + 1.0);
    let phi0 = (-y).atan2(-x); // polar angle of the origin, seen from the center
    let r2 = 0.5 - x + r;
    let l1 = r * (phi0 + PI);
    let l2 = r2 * FRAC_PI_2;
    Ok(EscapeGeometry { r, phi0, r2, l1, l2 })
}

/// Big-circle competitor that dives below the cone, loops around it, and
/// closes over the top: a clockwise arc of radius 1/sqrt(lambda) from the
/// origin, tangent to the left leg, a half circle over the apex, and the
/// mirror image. C^1 throughout.
pub fn escaping_competitor(
    obstacle: &Obstacle,
    lambda: f64,
    segments: usize,
) -> Result<DiscreteCurve, ZooError> {
    let geo = escape_geometry(obstacle, lambda)?;
    let l = geo.total_length();
    let h = l / segments as f64;
    let angles: Vec<f64> = (0..segments).map(|i| geo.tangent_angle((i as f64 + 0.5) * h)).collect();
    Ok(DiscreteCurve::new(l, angles, [0.0, 0.0]).expect("escape export"))
}

/// Exact energy of the escaping competitor.
pub fn escaping_competitor_energy(obstacle: &Obstacle, lambda: f64) -> Result<Energy, ZooError> {
    let geo = escape_geometry(obstacle, lambda)?;
    let b = 2.0 * geo.l1 / (geo.r * geo.r) + 2.0 * geo.l2 / (geo.r2 * geo.r2);
    Ok(Energy::new(b, lambda, geo.total_length()))
}

struct LeafSegmentGeometry {
    alpha: f64,
    q: f64,
    piece: f64,   // arclength of each curved quarter
    seg_len: f64, // straight run between the two quarters
}

fn leaf_segment_geometry(lambda: f64, q_n: f64) -> Result<LeafSegmentGeometry, ZooError> {
    assert!(lambda.is_finite() && lambda > 0.0, "leaf_segment: lambda must be positive");
    if !(q_n.is_finite() && q_n > FRAC_1_SQRT_2 && q_n < 1.0) {
        return Err(ZooError::BadLeafModulus(q_n));
    }
    let alpha = (lambda / (2.0 * (2.0 * q_n * q_n - 1.0))).sqrt();
    let (k, e) = (complete_k(q_n), complete_e(q_n));
    let apex_x = (2.0 * e - k) / alpha;
    let seg_len = 1.0 - 2.0 * apex_x;
    if seg_len <= 0.0 {
        return Err(ZooError::LeafSegmentOverlap(apex_x));
    }
    Ok(LeafSegmentGeometry { alpha, q: q_n, piece: k / alpha, seg_len })
}

impl LeafSegmentGeometry {
    fn total_length(&self) -> f64 {
        2.0 * self.piece + self.seg_len
    }

    fn tangent_angle(&self, s: f64) -> f64 {
        if s <= self.piece {
            let u = self.alpha * s - complete_k(self.q);
            -2.0 * (self.q * jacobi_am(u, self.q).sin()).asin()
        } else if s <= self.piece + self.seg_len {
            0.0
        } else {
            -self.tangent_angle(self.total_length() - s)
        }
    }
}

/// Leaf-flank competitor: a quarter of the q_n lobe rising from the origin to
/// a horizontal tangent, a straight run across, and the mirrored quarter back
/// down to (1, 0). C^1 at both junctions.
pub fn leaf_segment_competitor(
    lambda: f64,
    q_n: f64,
    segments: usize,
) -> Result<DiscreteCurve, ZooError> {
    let geo = leaf_segment_geometry(lambda, q_n)?;
    let l = geo.total_length();
    let h = l / segments as f64;
    let angles: Vec<f64> = (0..segments).map(|i| geo.tangent_angle((i as f64 + 0.5) * h)).collect();
    Ok(DiscreteCurve::new(l, angles, [0.0, 0.0]).expect("leaf-segment export"))
}

/// Exact energy of the leaf-segment competitor.
pub fn leaf_segment_energy(lambda: f64, q_n: f64) -> Result<Energy, ZooError> {
    let geo = leaf_segment_geometry(lambda, q_n)?;
    let (k, e) = (complete_k(q_n), complete_e(q_n));
    let b = 8.0 * geo.alpha * (e - (1.0 - q_n * q_n) * k);
    Ok(Energy::new(b, lambda, geo.total_length()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moduli::thresholds;

    const L_RECT: f64 = 2.1884396152264766;
    const B_RECT: f64 = 5.74216008836904;
    const H_STAR: f64 = 0.8346268416740732;

    fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
        assert!((a - b).abs() <= tol, "{what}: {a} vs {b} (|diff| = {:.3e})", (a - b).abs());
    }

    #[test]
    fn rect_constants() {
        let r = ElasticaSpec::rect();
        assert_close(r.length, L_RECT, 1e-12, "L_rect");
        assert_close(r.alpha, 1.6944261695879582, 1e-12, "alpha0");
        assert_close(r.closed_form_energy().bending, B_RECT, 1e-11, "B_rect");
        // apex sits exactly above the midpoint at the threshold height
        let mid = r.sample(0.5 * r.length);
        assert_close(mid[0], 0.5, 1e-12, "apex x");
        assert_close(mid[1], H_STAR, 1e-12, "apex y");
    }

    #[test]
    fn pinned_endpoints_are_exact() {
        let lh = thresholds().lambda_hat;
        let cases = [
            (Family::Sarc, 0.2, 1),
            (Family::Sarc, 1.5, 2),
            (Family::Larc, 0.2, 1),
            (Family::Larc, lh, 1),
            (Family::Larc, 1.5, 2),
            (Family::Loop, 0.2, 1),
            (Family::Loop, 1.5, 1),
            (Family::Loop, 2.0, 3),
        ];
        for (fam, lambda, n) in cases {
            let spec = make_pinned(fam, lambda, n).unwrap();
            let p0 = spec.sample(0.0);
            let p1 = spec.sample(spec.length);
            assert!(p0[0].abs() + p0[1].abs() <= 1e-8, "{fam} start {p0:?}");
            assert!((p1[0] - 1.0).abs() + p1[1].abs() <= 1e-8, "{fam}({lambda},{n}) end {p1:?}");
        }
        // the leaf closes instead
        let leaf = make_pinned(Family::Leaf, 1.0, 1).unwrap();
        let p1 = leaf.sample(leaf.length);
        assert!(p1[0].abs() + p1[1].abs() <= 1e-8, "leaf end {p1:?}");
        // and its apex sits on the y axis at height 2 q*/alpha
        let apex = leaf.sample(complete_k(leaf.q) / leaf.alpha);
        assert!(apex[0].abs() <= 1e-8);
        assert_close(apex[1], 2.0 * leaf.q / leaf.alpha, 1e-10, "leaf apex height");
    }

    #[test]
    fn admissibility_errors() {
        let lh = thresholds().lambda_hat;
        assert!(matches!(
            make_pinned(Family::Sarc, 1.5 * lh, 1),
            Err(ZooError::Inadmissible { .. })
        ));
        assert!(make_pinned(Family::Sarc, 1.5 * lh, 2).is_ok());
        assert!(make_pinned(Family::Loop, 1.5 * lh, 1).is_ok());
        assert!(matches!(make_pinned(Family::Larc, -1.0, 1), Err(ZooError::BadLambda(_))));
        assert!(matches!(make_pinned(Family::Rect, 0.5, 1), Err(ZooError::BadLambda(_))));
        assert!(matches!(make_pinned(Family::Sarc, 0.5, 0), Err(ZooError::BadCount)));
    }

    #[test]
    fn closed_form_energy_reference_values() {
        // mpmath, 30 significant digits
        let cases = [
            (Family::Larc, 0.2, 1, 4.40562608816593),
            (Family::Sarc, 0.2, 1, 6.190916413147812),
            (Family::Loop, 0.2, 1, 5.030009450955717),
            (Family::Leaf, 0.2, 1, 4.742143180911378),
            (Family::Larc, 0.5, 1, 6.579847922472803),
            (Family::Sarc, 0.5, 1, 6.920120750574729),
            (Family::Loop, 0.5, 1, 8.197002801027576),
            (Family::Leaf, 0.5, 1, 7.497986721157933),
            (Family::Sarc, 1.5, 2, 26.423430805082304),
            (Family::Larc, 1.5, 2, 23.319921886611902),
            (Family::Loop, 1.5, 1, 14.987373231820838),
            (Family::Leaf, 1.0, 1, 10.603754511554923),
            (Family::Leaf, 1.0, 2, 21.207509023109847),
        ];
        for (fam, lambda, n, want) in cases {
            let e = make_pinned(fam, lambda, n).unwrap().closed_form_energy();
            assert_close(e.total, want, 1e-9 * want, &format!("E {fam}({lambda},{n})"));
        }
        let lh = thresholds().lambda_hat;
        let e = make_pinned(Family::Larc, lh, 1).unwrap().closed_form_energy();
        assert_close(e.total, 7.486086550647206, 1e-8, "E larc(lambda_hat)");
    }

    #[test]
    fn unit_speed_and_curvature_consistency() {
        // |gamma'| = 1 and theta' = k by finite differences, for one curve of
        // each smooth family
        let specs = [
            make_pinned(Family::Sarc, 0.3, 1).unwrap(),
            make_pinned(Family::Larc, 0.3, 1).unwrap(),
            make_pinned(Family::Loop, 0.3, 1).unwrap(),
            make_pinned(Family::Leaf, 0.7, 1).unwrap(),
            ElasticaSpec::rect(),
        ];
        for spec in specs {
            let d = 1e-6;
            for i in 1..10 {
                let s = spec.length * i as f64 / 10.0;
                let (p, m) = (spec.sample(s + d), spec.sample(s - d));
                let vx = (p[0] - m[0]) / (2.0 * d);
                let vy = (p[1] - m[1]) / (2.0 * d);
                let speed = (vx * vx + vy * vy).sqrt();
                assert!((speed - 1.0).abs() < 1e-7, "{} speed {speed} at s = {s}", spec.family);
                let th_dot = (spec.tangent_angle(s + d) - spec.tangent_angle(s - d)) / (2.0 * d);
                assert!(
                    (th_dot - spec.signed_curvature(s)).abs() < 1e-5,
                    "{} theta' vs k at s = {s}",
                    spec.family
                );
                // tangent angle points along the velocity
                let th = spec.tangent_angle(s);
                assert!((th.cos() - vx).abs() < 1e-6 && (th.sin() - vy).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn reflection_flips_y_and_curvature() {
        let spec = make_pinned(Family::Larc, 0.4, 1).unwrap();
        let r = spec.reflected();
        let s = 0.3 * spec.length;
        assert_eq!(spec.sample(s)[1], -r.sample(s)[1]);
        assert_eq!(spec.signed_curvature(s), -r.signed_curvature(s));
        assert_eq!(spec.closed_form_energy(), r.closed_form_energy());
    }

    #[test]
    fn polar_angle_reference_values_and_tail() {
        let cases = [
            (0.2, -0.0382761927995560),
            (0.5, -0.2380738119993435),
            (0.5 * L_RECT, -1.0310608442602735),
            (1.6, -1.6433857505687189),
            (2.0, -1.7066178853443939),
        ];
        for (s, want) in cases {
            assert_close(polar_tangential_angle_rect(s), want, 1e-11, &format!("omega({s})"));
        }
        // tan(-omega) at the midpoint equals twice the threshold height
        let w = polar_tangential_angle_rect(0.5 * L_RECT);
        assert_close((-w).tan(), 2.0 * H_STAR, 1e-10, "tan(-omega) midpoint");
        // the tail is NOT monotone: omega turns back up after ~1.856
        assert!(polar_tangential_angle_rect(1.8) < polar_tangential_angle_rect(2.0));
        // window end: -omega hits pi/2 strictly inside (L/2, L)
        let s1 = construction_window_end();
        assert_close(s1, 1.51211001, 1e-6, "s1");
        assert!((polar_tangential_angle_rect(s1) + FRAC_PI_2).abs() < 1e-9);
        // past s1, tan(-omega) has flipped sign toward -inf
        assert!((-polar_tangential_angle_rect(1.6)).tan() < 0.0);
    }

    #[test]
    fn polar_angle_matches_accumulated_lift_oracle() {
        // oracle: accumulate atan2 increments along a fine grid so no branch
        // choice is ever taken analytically
        let rect = rect_cached();
        let n = 4096;
        let lo = 1e-4;
        let hi = rect.length - 1e-4;
        let mut prev_t = rect.tangent_angle(lo);
        let mut prev_p = rect.sample(lo);
        let mut omega = polar_tangential_angle_rect(lo);
        for i in 1..=n {
            let s = lo + (hi - lo) * i as f64 / n as f64;
            let t = rect.tangent_angle(s);
            let p = rect.sample(s);
            let mut dchi = p[1].atan2(p[0]) - prev_p[1].atan2(prev_p[0]);
            dchi -= std::f64::consts::TAU * (dchi / std::f64::consts::TAU).round();
            omega += (t - prev_t) - dchi;
            prev_t = t;
            prev_p = p;
            if i % 256 == 0 {
                assert_close(omega, polar_tangential_angle_rect(s), 1e-8, &format!("lift at {s}"));
            }
        }
    }

    #[test]
    fn scf_reference_values() {
        // h*/2
        let scf = make_scf(0.5 * H_STAR).unwrap();
        assert_close(scf.ell, 0.8716404052878939, 1e-10, "ell(h*/2)");
        assert_close(scf.phi, -0.5209804166376136, 1e-10, "phi(h*/2)");
        assert_close(scf.alpha, 1.2725522078874355, 1e-10, "alpha(h*/2)");
        assert_close(scf.half_length, 0.6849545345844038, 1e-10, "L/2(h*/2)");
        assert_close(scf.curvature_slope_at_tip(), -2.3141471299818731, 1e-9, "k'(h*/2)");
        // 2h*
        let scf = make_scf(2.0 * H_STAR).unwrap();
        assert_close(scf.ell, 1.2646174782935844, 1e-10, "ell(2h*)");
        assert_close(scf.phi, 0.4027171768066600, 1e-10, "phi(2h*)");
        assert_close(scf.alpha, 0.5975324423357915, 1e-10, "alpha(2h*)");
        assert_close(scf.half_length, 2.1163996942996368, 1e-9, "L/2(2h*)");
        assert_close(scf.curvature_slope_at_tip(), 0.4017586621681574, 1e-9, "k'(2h*)");
        // at h* the fan degenerates to the rectangular elastica itself
        let scf = make_scf(H_STAR).unwrap();
        assert_close(scf.ell, 0.5 * L_RECT, 1e-9, "ell(h*)");
        assert!(scf.phi.abs() < 1e-9, "phi(h*) = {}", scf.phi);
        assert_close(scf.alpha, 1.0, 1e-9, "alpha(h*)");
        assert!(scf.curvature_slope_at_tip().abs() < 1e-8);
    }

    #[test]
    fn scf_geometry() {
        for &h in &[0.2, 0.5, H_STAR, 1.2, 1.9] {
            let scf = make_scf(h).unwrap();
            let p0 = scf.sample(0.0);
            let tip = scf.sample(scf.half_length);
            let p1 = scf.sample(scf.total_length());
            assert!(p0[0].abs() + p0[1].abs() <= 1e-8, "start {p0:?}");
            assert!((tip[0] - 0.5).abs() <= 1e-8 && (tip[1] - h).abs() <= 1e-8, "tip {tip:?}");
            assert!((p1[0] - 1.0).abs() + p1[1].abs() <= 1e-8, "end {p1:?}");
            // horizontal tangent and mirror symmetry at the tip
            assert!(scf.tangent_angle(scf.half_length).abs() < 1e-9);
            let s = 0.3 * scf.total_length();
            let (a, b) = (scf.sample(s), scf.sample(scf.total_length() - s));
            assert!((a[0] + b[0] - 1.0).abs() < 1e-10 && (a[1] - b[1]).abs() < 1e-10);
            // trichotomy
            let slope = scf.curvature_slope_at_tip();
            if h < H_STAR - 1e-6 {
                assert!(slope < 0.0, "h = {h}");
            } else if h > H_STAR + 1e-6 {
                assert!(slope > 0.0, "h = {h}");
            }
        }
        assert!(matches!(make_scf(0.0), Err(ZooError::BadTipHeight(_))));
    }

    #[test]
    fn export_tracks_exact_curve() {
        let spec = make_pinned(Family::Larc, 0.4, 1).unwrap();
        let n = 256;
        let curve = spec.export(n);
        let pos = curve.positions();
        let h = spec.length / n as f64;
        let mut worst = 0.0_f64;
        for (i, p) in pos.iter().enumerate() {
            let exact = spec.sample(i as f64 * h);
            worst = worst.max(((p[0] - exact[0]).powi(2) + (p[1] - exact[1]).powi(2)).sqrt());
        }
        assert!(worst <= 1e-4, "midpoint export drift {worst}");
    }

    #[test]
    fn escaping_competitor_reference_energies() {
        let cone = Obstacle::cone(0.3, 1.2).unwrap();
        let cases = [(1e-2, 18.259836), (1e-3, 17.738212), (1e-4, 17.460439)];
        for (lambda, want) in cases {
            let e = escaping_competitor_energy(&cone, lambda).unwrap();
            assert_close(e.total / f64::sqrt(lambda), want, 1e-3, &format!("E/sqrt(l) at {lambda}"));
        }
        // discrete export approximates the analytic energy and lands on the ends
        let lambda = 1e-2;
        let c = escaping_competitor(&cone, lambda, 2048).unwrap();
        let e = crate::geometry::discrete_energy(&c, lambda);
        let exact = escaping_competitor_energy(&cone, lambda).unwrap();
        assert_close(e.total, exact.total, 2e-3 * exact.total, "discrete vs exact");
        let end = c.endpoint();
        assert!((end[0] - 1.0).abs() < 2e-3 && end[1].abs() < 2e-3, "end {end:?}");
        // the curve clears the obstacle everywhere (up to export error)
        let slack = crate::geometry::constraint_slack(&c, &cone, crate::geometry::SlackMode::Standard);
        assert!(slack.min_gap > -5e-4, "min gap {}", slack.min_gap);
        // tiny radius is rejected: this cone has psi(0) only just below zero
        let steep = Obstacle::cone(0.45, 1.0).unwrap();
        assert!(matches!(
            escaping_competitor(&steep, 4000.0, 256),
            Err(ZooError::RadiusTooSmall { .. })
        ));
    }

    #[test]
    fn leaf_segment_reference() {
        // mpmath: quadrature of k^2 over the quarter lobes agrees with the
        // closed form to 30 digits
        let e = leaf_segment_energy(0.5, 0.85).unwrap();
        assert_close(e.total, 6.7062081602282208, 1e-9, "leaf-segment E(0.5, 0.85)");
        let c = leaf_segment_competitor(0.5, 0.85, 1024).unwrap();
        let end = c.endpoint();
        assert!((end[0] - 1.0).abs() < 1e-3 && end[1].abs() < 1e-3, "end {end:?}");
        let de = crate::geometry::discrete_energy(&c, 0.5);
        assert_close(de.total, e.total, 1e-3 * e.total, "discrete vs exact");
        assert!(matches!(leaf_segment_energy(0.5, 0.5), Err(ZooError::BadLeafModulus(_))));
        // very small lambda pushes the quarters past the mirror axis
        assert!(matches!(leaf_segment_energy(1e-4, 0.75), Err(ZooError::LeafSegmentOverlap(_))));
    }
}
