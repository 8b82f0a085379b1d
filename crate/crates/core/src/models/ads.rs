//! Anti-de Sitter space in static coordinates and its conformal extension.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::quadrature::z_star;
use crate::dual::Scalar;
use crate::field::{SmoothField, SmoothTangentFn};
use crate::geometry::{BoundaryPoint, Domain, SpacetimeModel};
use crate::sampling::sphere_points;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdsRegion {
    Full,
    /// `r <= r0`, with `b = r0 − r`.
    Ball { r0: f64 },
}

/// Round metric of `S^{k}` in hyperspherical angles.
pub fn sphere_quadratic<S: Scalar>(theta: &[S], v: &[S]) -> S {
    let mut acc = S::cst(0.0);
    let mut w = S::cst(1.0);
    for (i, vi) in v.iter().enumerate() {
        acc += w * *vi * *vi;
        if i + 1 < theta.len() {
            let s = theta[i].sin();
            w *= s * s;
        }
    }
    acc
}

/// Hyperspherical angles of a unit vector of `R^n`.
pub fn angles_of(d: &[f64]) -> Vec<f64> {
    let n = d.len();
    if n == 2 {
        return vec![d[1].atan2(d[0])];
    }
    let mut out = Vec::with_capacity(n - 1);
    for i in 0..n - 2 {
        let tail: f64 = d[i + 1..].iter().map(|c| c * c).sum::<f64>().sqrt();
        out.push(tail.atan2(d[i]));
    }
    out.push(d[n - 1].atan2(d[n - 2]));
    out
}

/// Unit spherical vector `u` at angles `theta` in the direction of the
/// `k`-th angle, expressed in angle components.
pub fn unit_angle_direction(theta: &[f64], k: usize) -> Vec<f64> {
    let mut w = 1.0;
    for t in &theta[..k] {
        w *= t.sin();
    }
    let mut u = vec![0.0; theta.len()];
    u[k] = 1.0 / w;
    u
}

pub struct Ads;

impl SmoothTangentFn for Ads {
    fn eval<S: Scalar>(&self, x: &[S], v: &[S]) -> S {
        let r = x[1];
        let a = r * r + 1.0;
        a * v[0] * v[0] - v[1] * v[1] / a - r * r * sphere_quadratic(&x[2..], &v[2..])
    }
}

struct RadialBoundary(f64);
impl SmoothField for RadialBoundary {
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        S::cst(self.0) - x[1]
    }
}

fn angle_domain(dim: usize, first_lo: f64, first_hi: f64) -> Domain {
    let mut lo = vec![-1e12; dim];
    let mut hi = vec![1e12; dim];
    lo[1] = first_lo;
    hi[1] = first_hi;
    // polar angles stay inside (0, π); the last angle is periodic
    for i in 2..dim.saturating_sub(1) {
        lo[i] = 0.0;
        hi[i] = std::f64::consts::PI;
    }
    Domain::boxed(lo, hi)
}

fn sphere_sampler(n: usize, radial: f64) -> impl Fn(usize) -> Vec<BoundaryPoint> {
    move |count| {
        sphere_points(n, count)
            .into_iter()
            .map(|d| {
                let th = angles_of(&d);
                let mut point = vec![radial];
                point.extend_from_slice(&th);
                BoundaryPoint { param: th, point }
            })
            .collect()
    }
}

/// AdS with `n` spatial dimensions in coordinates `(t, r, θ)`.
pub fn make_ads(n: usize, region: AdsRegion) -> SpacetimeModel {
    assert!(n >= 2, "AdS needs n >= 2");
    let dim = n + 1;
    let m = SpacetimeModel::new("ads", dim, Arc::new(Ads))
        .with_time_orientation()
        .with_params(json!({ "n": n, "region": region }))
        .with_domain(angle_domain(dim, 0.0, 1e12))
        .product();
    match region {
        AdsRegion::Full => m,
        AdsRegion::Ball { r0 } => {
            let mut m = m.with_boundary(Arc::new(RadialBoundary(r0)));
            m.spatial_boundary = Some(Arc::new(sphere_sampler(n, r0)));
            m
        }
    }
}

/// `f(z) = cosh²(z_* − z)`, which equals `(1 + r²)/r²` at `z = z(r)`.
pub fn conformal_f<S: Scalar>(z: S, zs: f64) -> S {
    let c = (S::cst(zs) - z).cosh();
    c * c
}

pub struct AdsConformal {
    pub z_star: f64,
}

impl SmoothTangentFn for AdsConformal {
    fn eval<S: Scalar>(&self, x: &[S], v: &[S]) -> S {
        conformal_f(x[1], self.z_star) * v[0] * v[0] - v[1] * v[1] - sphere_quadratic(&x[2..], &v[2..])
    }
}

pub(crate) struct ZBoundary(pub f64);
impl SmoothField for ZBoundary {
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        S::cst(self.0) - x[1]
    }
}

/// Ambient margin beyond `z_*` kept in the chart for tangent probes.
pub const Z_MARGIN: f64 = 0.5;

/// Conformal AdS `f(z) dt² − dz² − g_S` on `z ∈ (0, z_*]`, boundary `b = z_* − z`.
pub fn make_ads_conformal(n: usize) -> SpacetimeModel {
    conformal_frame("ads_conformal", n, Arc::new(AdsConformal { z_star: z_star() }))
}

pub(crate) fn conformal_frame(name: &str, n: usize, l: Arc<dyn crate::field::TangentFunction>) -> SpacetimeModel {
    assert!(n >= 2, "AdS needs n >= 2");
    let zs = z_star();
    let dim = n + 1;
    let mut m = SpacetimeModel::new(name, dim, l)
        .with_time_orientation()
        .with_params(json!({ "n": n, "z_star": zs }))
        .with_domain(angle_domain(dim, 0.0, zs + Z_MARGIN))
        .with_boundary(Arc::new(ZBoundary(zs)))
        .product();
    m.spatial_boundary = Some(Arc::new(sphere_sampler(n, zs)));
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conformal_factor_matches_radial_form() {
        let zs = z_star();
        for r in [2.0, 3.0, 10.0, 100.0] {
            let z = super::super::quadrature::z_of_r(r);
            let f: f64 = conformal_f(z, zs);
            assert!((f - (1.0 + r * r) / (r * r)).abs() < 1e-12 * f);
        }
    }

    #[test]
    fn angles_round_trip() {
        for d in sphere_points(3, 20) {
            let th = angles_of(&d);
            let back = [
                th[0].cos(),
                th[0].sin() * th[1].cos(),
                th[0].sin() * th[1].sin(),
            ];
            for k in 0..3 {
                assert!((back[k] - d[k]).abs() < 1e-14);
            }
            let u = unit_angle_direction(&th, 1);
            assert!((sphere_quadratic(&th, &u) - 1.0).abs() < 1e-14);
        }
    }
}
