//! Standard stationary spacetimes `L = (v^t)² − 2ω(v_S) v^t − g_S(v_S)`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::minkowski::{cassini_points, Cassini, Region};
use crate::dual::Scalar;
use crate::field::{SmoothField, SmoothTangentFn, TangentFunction};
use crate::geometry::{BoundaryPoint, SpacetimeModel, StationaryData};
use crate::sampling::sphere_points;

/// Euclidean `|u|²` on spatial vectors.
pub struct Euclid;
impl SmoothTangentFn for Euclid {
    fn eval<S: Scalar>(&self, _x: &[S], u: &[S]) -> S {
        let mut acc = S::cst(0.0);
        for c in u {
            acc += *c * *c;
        }
        acc
    }
}

pub struct ZeroForm;
impl SmoothTangentFn for ZeroForm {
    fn eval<S: Scalar>(&self, _x: &[S], _u: &[S]) -> S {
        S::cst(0.0)
    }
}

/// `ω = c_i dx^i + s (x dy − y dx)` on the plane (`s` only in dimension 2).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneForm {
    pub constant: Vec<f64>,
    pub swirl: f64,
}

impl SmoothTangentFn for OneForm {
    fn eval<S: Scalar>(&self, x: &[S], u: &[S]) -> S {
        let mut acc = S::cst(0.0);
        for (c, ui) in self.constant.iter().zip(u) {
            acc += *ui * *c;
        }
        if self.swirl != 0.0 && u.len() == 2 {
            acc += (x[0] * u[1] - x[1] * u[0]) * self.swirl;
        }
        acc
    }
}

/// Data of a static product with Euclidean space.
pub fn static_data() -> StationaryData {
    StationaryData { g_s: Arc::new(Euclid), omega: Arc::new(ZeroForm) }
}

/// The spacetime Lagrangian built from `(g_S, ω)` on spatial coordinates.
pub struct StationaryLagrangian {
    pub g_s: Arc<dyn TangentFunction>,
    pub omega: Arc<dyn TangentFunction>,
}

impl SmoothTangentFn for StationaryLagrangian {
    fn eval<S: Scalar>(&self, x: &[S], v: &[S]) -> S {
        let w = S::call_tangent(self.omega.as_ref(), &x[1..], &v[1..]);
        let g = S::call_tangent(self.g_s.as_ref(), &x[1..], &v[1..]);
        v[0] * v[0] - w * v[0] * 2.0 - g
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StationaryParams {
    pub n_spatial: usize,
    pub omega: OneForm,
    pub region: Region,
}

impl Default for StationaryParams {
    fn default() -> Self {
        Self {
            n_spatial: 2,
            omega: OneForm { constant: vec![0.2, 0.0], swirl: 0.1 },
            region: Region::Ball { radius: 1.0 },
        }
    }
}

struct SpatialBall(f64);
impl SmoothField for SpatialBall {
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        let mut r2 = S::cst(0.0);
        for c in &x[1..] {
            r2 += *c * *c;
        }
        (S::cst(self.0 * self.0) - r2) / (2.0 * self.0)
    }
}

struct SpatialHalf;
impl SmoothField for SpatialHalf {
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        x[1]
    }
}

pub fn make_stationary(params: &StationaryParams) -> SpacetimeModel {
    let n = params.n_spatial;
    let data = StationaryData { g_s: Arc::new(Euclid), omega: Arc::new(params.omega.clone()) };
    let l = StationaryLagrangian { g_s: data.g_s.clone(), omega: data.omega.clone() };
    let mut m = SpacetimeModel::new("stationary", n + 1, Arc::new(l))
        .with_time_orientation()
        .with_params(serde_json::to_value(params).unwrap_or_default())
        .product();
    m.stationary = Some(data);
    m.interior_point = Some(vec![0.0; n]);
    match params.region {
        Region::Full => {}
        Region::HalfSpace => {
            m = m.with_boundary(Arc::new(SpatialHalf));
            m.interior_point = Some((0..n).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect());
        }
        Region::Ball { radius } => {
            m = m.with_boundary(Arc::new(SpatialBall(radius)));
            m.scale = radius;
            m.spatial_boundary = Some(Arc::new(move |count| {
                sphere_points(n, count)
                    .into_iter()
                    .map(|d| BoundaryPoint {
                        param: if n == 2 { vec![d[1].atan2(d[0])] } else { d.clone() },
                        point: d.iter().map(|c| radius * c).collect(),
                    })
                    .collect()
            }));
        }
        Region::Cassini { a, c } => {
            assert!(n == 2, "the Cassini region is planar");
            m = m.with_boundary(Arc::new(Cassini { a, c, offset: 1 }));
            let cas = Cassini { a, c, offset: 1 };
            m.spatial_boundary = Some(Arc::new(move |count| cassini_points(&cas, count)));
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_form_recovers_the_product() {
        let p = StationaryParams {
            omega: OneForm { constant: vec![0.0, 0.0], swirl: 0.0 },
            ..Default::default()
        };
        let m = make_stationary(&p);
        let flat = super::super::minkowski::make_minkowski(2, Region::Full);
        let (x, v) = ([0.3, 0.1, -0.2], [1.2, 0.4, 0.9]);
        assert!((m.l(&x, &v) - flat.l(&x, &v)).abs() < 1e-14);
    }

    #[test]
    fn lightlike_time_component_is_the_fermat_norm() {
        let c = 0.4;
        let p = StationaryParams {
            omega: OneForm { constant: vec![c, 0.0], swirl: 0.0 },
            ..Default::default()
        };
        let m = make_stationary(&p);
        let f = c + (1.0 + c * c).sqrt();
        assert!(m.l(&[0.0, 0.0, 0.0], &[f, 1.0, 0.0]).abs() < 1e-14);
    }
}
