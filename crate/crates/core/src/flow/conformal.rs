//! Anisotropic conformal changes `L* = e^{2u} L` and image comparison.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{densify_samples, integrate_geodesic, IntegrateOptions, Sample};
use crate::dual::Scalar;
use crate::error::{Error, Result};
use crate::field::{SmoothTangentFn, TangentFunction};
use crate::geometry::SpacetimeModel;
use crate::linalg::{dist, dot, sub};

pub struct ConformalLagrangian {
    pub inner: Arc<dyn TangentFunction>,
    /// 0-homogeneous in the vector argument.
    pub u: Arc<dyn TangentFunction>,
}

impl SmoothTangentFn for ConformalLagrangian {
    fn eval<S: Scalar>(&self, x: &[S], v: &[S]) -> S {
        (S::call_tangent(self.u.as_ref(), x, v) * 2.0).exp() * S::call_tangent(self.inner.as_ref(), x, v)
    }
}

/// The same model with `L` replaced by `e^{2u} L`.
pub fn conformal_model(model: &SpacetimeModel, u: Arc<dyn TangentFunction>) -> SpacetimeModel {
    let mut m = model.clone();
    m.name = format!("{}*conformal", model.name);
    m.lagrangian = Arc::new(ConformalLagrangian { inner: model.lagrangian.clone(), u });
    m
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeviationReport {
    /// Largest distance from a point of one image to the other image.
    pub deviation: f64,
    /// Largest difference of affine parameters at equal arc length.
    pub parameter_gap: f64,
    pub window: f64,
}

/// Integrate lightlike geodesics of `L` and `e^{2u}L` from `(p0, v0)` and
/// compare their images over the arc-length window `[0, window]`.
pub fn conformal_compare(
    model: &SpacetimeModel,
    u: Arc<dyn TangentFunction>,
    p0: &[f64],
    v0: &[f64],
    window: f64,
    opts: &IntegrateOptions,
) -> Result<DeviationReport> {
    let l = model.l(p0, v0);
    if l.abs() > model.tol.classification.max(1e-10) * dot(v0, v0) {
        return Err(Error::NotLightlike(l));
    }
    let other = conformal_model(model, u);
    let a = integrate_geodesic(model, p0, v0, opts)?;
    let b = integrate_geodesic(&other, p0, v0, opts)?;
    Ok(compare_images(&a.samples, &b.samples, window))
}

/// Symmetric image deviation of two curves over an arc-length window.
pub fn compare_images(a: &[Sample], b: &[Sample], window: f64) -> DeviationReport {
    let da = with_arclength(&densify_samples(a, 8));
    let db = with_arclength(&densify_samples(b, 8));
    let w = window.min(da.last().map_or(0.0, |p| p.1)).min(db.last().map_or(0.0, |p| p.1));
    let cut = |c: &[(Sample, f64)]| -> Vec<Sample> {
        let mut out: Vec<Sample> = c.iter().take_while(|p| p.1 <= w).map(|p| p.0.clone()).collect();
        if let (Some(a), Some(b)) = (c.get(out.len().wrapping_sub(1)), c.get(out.len())) {
            let th = if b.1 > a.1 { (w - a.1) / (b.1 - a.1) } else { 0.0 };
            let lerp = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(p, q)| p + th * (q - p)).collect();
            out.push(Sample { t: a.0.t + th * (b.0.t - a.0.t), x: lerp(&a.0.x, &b.0.x), v: lerp(&a.0.v, &b.0.v), jump: false });
        }
        out
    };
    let (ca, cb) = (cut(&da), cut(&db));
    let dev = max_point_to_polyline(&ca, &cb).max(max_point_to_polyline(&cb, &ca));
    let gap = ca
        .iter()
        .map(|s| {
            let arc = da.iter().find(|p| p.0.t == s.t).map_or(0.0, |p| p.1);
            let tb = param_at_arclength(&db, arc);
            (s.t - tb).abs()
        })
        .fold(0.0, f64::max);
    DeviationReport { deviation: dev, parameter_gap: gap, window: w }
}

fn with_arclength(s: &[Sample]) -> Vec<(Sample, f64)> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(s.len());
    for (i, p) in s.iter().enumerate() {
        if i > 0 && !p.jump {
            acc += dist(&p.x, &s[i - 1].x);
        }
        out.push((p.clone(), acc));
    }
    out
}

fn param_at_arclength(c: &[(Sample, f64)], arc: f64) -> f64 {
    for w in c.windows(2) {
        if w[1].1 >= arc {
            let span = w[1].1 - w[0].1;
            let th = if span > 0.0 { (arc - w[0].1) / span } else { 0.0 };
            return w[0].0.t + th * (w[1].0.t - w[0].0.t);
        }
    }
    c.last().map_or(0.0, |p| p.0.t)
}

/// `max_{p ∈ a} dist(p, polyline b)` in position space.
pub fn max_point_to_polyline(a: &[Sample], b: &[Sample]) -> f64 {
    a.iter().map(|p| point_to_polyline(&p.x, b)).fold(0.0, f64::max)
}

pub fn point_to_polyline(p: &[f64], b: &[Sample]) -> f64 {
    if b.len() == 1 {
        return dist(p, &b[0].x);
    }
    let mut best = f64::INFINITY;
    for w in b.windows(2) {
        if w[1].jump {
            best = best.min(dist(p, &w[0].x));
            continue;
        }
        best = best.min(point_to_segment(p, &w[0].x, &w[1].x));
    }
    best
}

pub fn point_to_segment(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab = sub(b, a);
    let ap = sub(p, a);
    let l2 = dot(&ab, &ab);
    let th = if l2 > 0.0 { (dot(&ap, &ab) / l2).clamp(0.0, 1.0) } else { 0.0 };
    let q: Vec<f64> = a.iter().zip(&ab).map(|(ai, d)| ai + th * d).collect();
    dist(p, &q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SmoothTangentFn;
    use crate::models::minkowski;

    struct Zero;
    impl SmoothTangentFn for Zero {
        fn eval<S: Scalar>(&self, _x: &[S], _v: &[S]) -> S {
            S::cst(0.0)
        }
    }

    struct Bump;
    impl SmoothTangentFn for Bump {
        fn eval<S: Scalar>(&self, x: &[S], _v: &[S]) -> S {
            (x[1] * 1.3).sin() * 0.4 + x[2] * x[1] * 0.2
        }
    }

    #[test]
    fn identity_and_spatial_factor() {
        let m = minkowski::make_minkowski(2, minkowski::Region::Full);
        let p = [0.0, 0.1, -0.2];
        let v = [1.0, 0.6, 0.8];
        let opts = IntegrateOptions::new(3.0);
        let r = conformal_compare(&m, Arc::new(Zero), &p, &v, 3.0, &opts).unwrap();
        assert_eq!(r.deviation, 0.0);
        let r = conformal_compare(&m, Arc::new(Bump), &p, &v, 3.0, &opts).unwrap();
        assert!(r.deviation <= 1e-6, "{}", r.deviation);
        assert!(r.parameter_gap > 1e-3, "{}", r.parameter_gap);
        let spacelike = [1.0, 1.0, 1.0];
        assert!(matches!(
            conformal_compare(&m, Arc::new(Zero), &p, &spacelike, 3.0, &opts),
            Err(Error::NotLightlike(_))
        ));
    }
}
