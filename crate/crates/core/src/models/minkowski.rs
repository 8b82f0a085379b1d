//! Minkowski space `R × R^n` and product regions in it.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::stationary::static_data;
use crate::dual::Scalar;
use crate::field::{SmoothField, SmoothTangentFn};
use crate::geometry::{BoundaryPoint, SpacetimeModel};
use crate::sampling::sphere_points;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Full,
    /// `x^1 >= 0`
    HalfSpace,
    /// Spatial ball of the given radius.
    Ball { radius: f64 },
    /// Interior of the Cassini oval `|z - a||z + a| = c²`, a peanut for `a < c < √2 a`.
    Cassini { a: f64, c: f64 },
}

/// `(v^t)² − |v_S|²`
pub struct Flat;

impl SmoothTangentFn for Flat {
    fn eval<S: Scalar>(&self, _x: &[S], v: &[S]) -> S {
        let mut acc = v[0] * v[0];
        for c in &v[1..] {
            acc -= *c * *c;
        }
        acc
    }
}

struct HalfSpace;
impl SmoothField for HalfSpace {
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        x[1]
    }
}

struct Ball(f64);
impl SmoothField for Ball {
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        let mut r2 = S::cst(0.0);
        for c in &x[1..] {
            r2 += *c * *c;
        }
        (S::cst(self.0 * self.0) - r2) / (2.0 * self.0)
    }
}

/// Cassini function on coordinates `(x[i], x[i+1])`, positive inside.
pub struct Cassini {
    pub a: f64,
    pub c: f64,
    pub offset: usize,
}

impl SmoothField for Cassini {
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        let (u, w) = (x[self.offset], x[self.offset + 1]);
        let p = (u - self.a) * (u - self.a) + w * w;
        let q = (u + self.a) * (u + self.a) + w * w;
        (S::cst(self.c.powi(4)) - p * q) / (4.0 * self.c * self.c)
    }
}

impl Cassini {
    /// Polar radius of the oval, `r² = a² cos 2θ + √(c⁴ − a⁴ sin² 2θ)`.
    pub fn radius(&self, theta: f64) -> f64 {
        let a2 = self.a * self.a;
        let s = (2.0 * theta).sin();
        (a2 * (2.0 * theta).cos() + (self.c.powi(4) - a2 * a2 * s * s).sqrt()).sqrt()
    }
}

pub fn make_minkowski(n_spatial: usize, region: Region) -> SpacetimeModel {
    let dim = n_spatial + 1;
    let m = SpacetimeModel::new("minkowski", dim, Arc::new(Flat))
        .with_time_orientation()
        .with_params(json!({ "n": n_spatial, "region": region }))
        .product();
    let mut m = match region {
        Region::Full => m,
        Region::HalfSpace => m.with_boundary(Arc::new(HalfSpace)),
        Region::Ball { radius } => {
            let mut m = m.with_boundary(Arc::new(Ball(radius)));
            m.scale = radius;
            m.spatial_boundary = Some(Arc::new(move |count| {
                sphere_points(n_spatial, count)
                    .into_iter()
                    .map(|d| BoundaryPoint {
                        param: if n_spatial == 2 { vec![d[1].atan2(d[0])] } else { d.clone() },
                        point: d.iter().map(|c| radius * c).collect(),
                    })
                    .collect()
            }));
            m
        }
        Region::Cassini { a, c } => {
            assert!(n_spatial == 2, "the Cassini region is planar");
            let cas = Cassini { a, c, offset: 1 };
            let mut m = m.with_boundary(Arc::new(Cassini { a, c, offset: 1 }));
            m.spatial_boundary = Some(Arc::new(move |count| cassini_points(&cas, count)));
            m
        }
    };
    m.interior_point = Some(match region {
        Region::HalfSpace => {
            let mut p = vec![0.0; n_spatial];
            p[0] = 1.0;
            p
        }
        _ => vec![0.0; n_spatial],
    });
    m.stationary = Some(static_data());
    m
}

pub fn cassini_points(cas: &Cassini, count: usize) -> Vec<BoundaryPoint> {
    (0..count)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / count as f64;
            let r = cas.radius(th);
            BoundaryPoint { param: vec![th], point: vec![r * th.cos(), r * th.sin()] }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ScalarField;

    #[test]
    fn cassini_radius_lies_on_the_oval() {
        let cas = Cassini { a: 1.0, c: 1.1, offset: 0 };
        for k in 0..12 {
            let th = k as f64 * 0.5;
            let r = cas.radius(th);
            assert!(cas.eval_f64(&[r * th.cos(), r * th.sin()]).abs() < 1e-12);
        }
        // the neck is narrower than the lobes
        assert!(cas.radius(std::f64::consts::FRAC_PI_2) < 0.5 * cas.radius(0.0));
    }

    #[test]
    fn regions() {
        let m = make_minkowski(2, Region::Ball { radius: 2.0 });
        assert_eq!(m.b(&[0.0, 2.0, 0.0]).unwrap(), 0.0);
        assert!(m.b(&[0.0, 0.0, 0.0]).unwrap() > 0.0);
        let pts = (m.spatial_boundary.as_ref().unwrap())(8);
        assert_eq!(pts.len(), 8);
        let h = make_minkowski(3, Region::HalfSpace);
        assert_eq!(h.b(&[5.0, -1.0, 2.0, 3.0]).unwrap(), -1.0);
    }
}
