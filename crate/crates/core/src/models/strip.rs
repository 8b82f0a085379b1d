//! The strip `I × [−1, 1]` of the Lorentz–Minkowski plane.

use std::sync::Arc;

use serde_json::json;

use super::minkowski::Flat;
use super::stationary::static_data;
use crate::dual::Scalar;
use crate::field::SmoothField;
use crate::geometry::{BoundaryPoint, Domain, SpacetimeModel};

struct StripBoundary;
impl SmoothField for StripBoundary {
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        S::cst(1.0) - x[1].abs()
    }
}

pub fn make_cylinder_strip(interval: (f64, f64)) -> SpacetimeModel {
    let (t0, t1) = interval;
    let mut m = SpacetimeModel::new("cylinder_strip", 2, Arc::new(Flat))
        .with_time_orientation()
        .with_params(json!({ "interval": [t0, t1] }))
        .with_boundary(Arc::new(StripBoundary))
        .with_domain(Domain::boxed(vec![t0, -1e12], vec![t1, 1e12]))
        .product();
    m.spatial_boundary = Some(Arc::new(|_count| {
        vec![
            BoundaryPoint { param: vec![], point: vec![-1.0] },
            BoundaryPoint { param: vec![], point: vec![1.0] },
        ]
    }));
    m.interior_point = Some(vec![0.0]);
    m.stationary = Some(static_data());
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{integrate_geodesic, IntegrateOptions, Termination};

    #[test]
    fn null_lines_hit_the_walls_at_unit_time() {
        let m = make_cylinder_strip((-10.0, 10.0));
        assert_eq!(m.b(&[0.0, 0.25]), Some(0.75));
        let sol = integrate_geodesic(&m, &[0.0, 0.0], &[1.0, -1.0], &IntegrateOptions::new(5.0)).unwrap();
        assert_eq!(sol.termination, Termination::BoundaryHit);
        let hit = sol.boundary_hit.unwrap();
        assert!((hit.point[0] - 1.0).abs() < 1e-9 && (hit.point[1] + 1.0).abs() < 1e-9);
        let walls = (m.spatial_boundary.as_ref().unwrap())(7);
        assert_eq!(walls.len(), 2);
    }
}
