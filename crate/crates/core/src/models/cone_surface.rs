//! `L × S` with `S` the flat cone without vertex, unrolled as the sector
//! `|θ| >= π/4` of the unit disk with its two edges glued by a quarter turn.

use std::sync::Arc;

use serde_json::json;

use super::minkowski::Flat;
use super::stationary::static_data;
use crate::geometry::{Domain, SpacetimeModel, Transition};

/// Radius below which a curve is taken to have reached the removed vertex.
pub const APEX_RADIUS: f64 = 1e-7;

fn in_sector(x: f64, y: f64) -> bool {
    let r2 = x * x + y * y;
    r2 < 1.0 && r2 > APEX_RADIUS * APEX_RADIUS && x <= y.abs()
}

fn rotate(v: &[f64], quarter: f64) -> Vec<f64> {
    // quarter = +1 rotates by +π/2, −1 by −π/2
    vec![v[0], -quarter * v[2], quarter * v[1]]
}

/// Deck continuation across the glued edges `θ = ±π/4`.
pub fn deck_transition(x: &[f64], v: &[f64]) -> Transition {
    let (px, py) = (x[1], x[2]);
    let r2 = px * px + py * py;
    if r2 >= 1.0 || r2 <= APEX_RADIUS * APEX_RADIUS {
        return Transition::Exit;
    }
    if px > py.abs() {
        let q = if py > 0.0 { -1.0 } else if py < 0.0 { 1.0 } else { return Transition::Leak };
        return Transition::Mapped(rotate(x, q), rotate(v, q));
    }
    Transition::Leak
}

/// Where the chord from `a` to `b` first enters the disk of radius
/// `APEX_RADIUS`, on spatial coordinates 1 and 2.
pub fn apex_guard(a: &[f64], b: &[f64]) -> Option<f64> {
    let (px, py) = (a[1], a[2]);
    let (dx, dy) = (b[1] - px, b[2] - py);
    let qa = dx * dx + dy * dy;
    if qa == 0.0 {
        return None;
    }
    let qb = px * dx + py * dy;
    let qc = px * px + py * py - APEX_RADIUS * APEX_RADIUS;
    let disc = qb * qb - qa * qc;
    if disc < 0.0 {
        return None;
    }
    let th = (-qb - disc.sqrt()) / qa;
    (0.0..=1.0).contains(&th).then_some(th)
}

pub fn make_product_cone_surface() -> SpacetimeModel {
    let domain = Domain::boxed(vec![-1e12, -1.0, -1.0], vec![1e12, 1.0, 1.0])
        .with_predicate(Arc::new(|x: &[f64]| in_sector(x[1], x[2])));
    let mut m = SpacetimeModel::new("product_cone_surface", 3, Arc::new(Flat))
        .with_time_orientation()
        .with_params(json!({ "sector": "|theta| >= pi/4", "radius": 1.0 }))
        .with_domain(domain)
        .product();
    m.transition = Some(Arc::new(deck_transition));
    m.chord_guard = Some(Arc::new(apex_guard));
    m.stationary = Some(static_data());
    m
}

/// Initial data of `γ_k(s) = (s, −1/k, s)`.
pub fn family_member(k: f64) -> (Vec<f64>, Vec<f64>) {
    (vec![0.0, -1.0 / k, 0.0], vec![1.0, 0.0, 1.0])
}

/// Initial data of the lifts of `σ_+` and `σ_−`.
pub fn limit_candidates() -> [(Vec<f64>, Vec<f64>); 2] {
    [
        (vec![0.5, 0.0, 0.5], vec![1.0, 0.0, 1.0]),
        (vec![-0.5, 0.0, -0.5], vec![1.0, 0.0, 1.0]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{integrate_geodesic, IntegrateOptions, Termination};

    #[test]
    fn geodesic_continues_across_the_glued_edge() {
        let m = make_product_cone_surface();
        // heading right at height 0.3 from the left: meets θ = π/4 at x = 0.3
        let sol = integrate_geodesic(&m, &[0.0, -0.5, 0.3], &[1.0, 1.0, 0.0], &IntegrateOptions::new(3.0)).unwrap();
        let jumps = sol.samples.iter().filter(|s| s.jump).count();
        assert_eq!(jumps, 1);
        let j = sol.samples.iter().find(|s| s.jump).unwrap();
        // image of (0.3, 0.3) under the quarter turn is (0.3, −0.3), moving down
        assert!((j.x[1] - 0.3).abs() < 1e-9 && (j.x[2] + 0.3).abs() < 1e-9);
        assert!(j.v[1].abs() < 1e-12 && (j.v[2] + 1.0).abs() < 1e-12);
        assert_eq!(sol.termination, Termination::DomainExit);
        assert!(sol.lagrangian_drift < 1e-12);
    }

    #[test]
    fn line_through_the_apex_stops_there() {
        let m = make_product_cone_surface();
        let sol = integrate_geodesic(&m, &[0.5, 0.0, 0.5], &[-1.0, 0.0, -1.0], &IntegrateOptions::new(3.0)).unwrap();
        assert_eq!(sol.termination, Termination::DomainExit);
        let end = sol.last();
        assert!(end.x[2].abs() < 2.0 * APEX_RADIUS && end.x[2] > 0.0);
    }

    #[test]
    fn family_lines_stay_in_the_chart() {
        let m = make_product_cone_surface();
        let (p, v) = family_member(4.0);
        let sol = integrate_geodesic(&m, &p, &v, &IntegrateOptions::new(5.0)).unwrap();
        assert!(sol.samples.iter().all(|s| !s.jump && (s.x[1] + 0.25).abs() < 1e-12));
        let end = sol.last();
        assert!((end.x[2] - (1.0f64 - 1.0 / 16.0).sqrt()).abs() < 1e-9);
    }
}
