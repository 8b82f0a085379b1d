//! Second fundamental forms of the boundary and convexity verdicts.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::connection::hessian;
use crate::error::{Error, Result};
use crate::flow::{integrate_geodesic, IntegrateOptions};
use crate::geometry::{sample_boundary_light_tangents, spatial_boundary_points, tangent_timelike_axis, SpacetimeModel};
use crate::linalg::{self, complement_basis, dot, norm};
use crate::parallel::{map_with, Execution};
use crate::sampling::sphere_points;

/// A vector field `η` transverse to the boundary.
#[derive(Clone)]
pub struct Rigging(pub Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>);

impl Rigging {
    pub fn new(f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }

    /// The coordinate gradient of `b`, inward since `db(∇b) = |∇b|²`.
    pub fn gradient(model: &SpacetimeModel) -> Self {
        let m = model.clone();
        Self::new(move |x| m.db(x).unwrap_or_default())
    }

    pub fn constant(v: Vec<f64>) -> Self {
        Self::new(move |_| v.clone())
    }

    pub fn at(&self, x: &[f64]) -> Vec<f64> {
        (self.0)(x)
    }
}

fn boundary_checks(model: &SpacetimeModel, p: &[f64], eta: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    let b = model.b(p).ok_or(Error::NotOnBoundary(f64::NAN))?;
    if b.abs() > 1e-9 * model.scale {
        return Err(Error::NotOnBoundary(b));
    }
    let db = model.db(p).unwrap_or_default();
    let dw = dot(&db, w);
    if dw.abs() > 1e-8 * norm(&db) * norm(w) {
        return Err(Error::NotTangent(dw));
    }
    let de = dot(&db, eta);
    if !(de > 0.0) {
        return Err(Error::NotInward(de));
    }
    Ok(db)
}

/// `II^{v}_η(w, w) = −Hess_b^{v}(w, w) / db(η)`.
pub fn second_fundamental_form(model: &SpacetimeModel, p: &[f64], eta: &[f64], w: &[f64], v_dir: &[f64]) -> Result<f64> {
    let db = boundary_checks(model, p, eta, w)?;
    let b = model.boundary.as_ref().expect("checked above");
    Ok(-hessian(model, b.as_ref(), p, v_dir, w, w)? / dot(&db, eta))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RiggingComparison {
    pub ii1: f64,
    pub ii2: f64,
    /// `II2 / II1`.
    pub ratio: f64,
    /// `db(η1) / db(η2)`.
    pub predicted: f64,
}

pub fn rigging_invariance_check(
    model: &SpacetimeModel,
    p: &[f64],
    eta1: &[f64],
    eta2: &[f64],
    w: &[f64],
    v_dir: &[f64],
) -> Result<RiggingComparison> {
    let ii1 = second_fundamental_form(model, p, eta1, w, v_dir)?;
    let ii2 = second_fundamental_form(model, p, eta2, w, v_dir)?;
    let db = model.db(p).unwrap_or_default();
    Ok(RiggingComparison { ii1, ii2, ratio: ii2 / ii1, predicted: dot(&db, eta1) / dot(&db, eta2) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvexityKind {
    Light,
    Time,
    Space,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Convex,
    StrictlyConcave,
    Indeterminate,
}

impl Verdict {
    pub fn of(ii: f64, dead_band: f64) -> Self {
        if !ii.is_finite() {
            Verdict::Indeterminate
        } else if ii < -dead_band {
            Verdict::StrictlyConcave
        } else {
            Verdict::Convex
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvexityEntry {
    pub point_index: usize,
    pub direction_index: usize,
    pub point: Vec<f64>,
    /// Tangent direction, normalised to unit coordinate norm.
    pub w: Vec<f64>,
    pub ii: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ConvexitySummary {
    pub min_ii: f64,
    pub max_abs_ii: f64,
    pub convex: usize,
    pub strictly_concave: usize,
    pub indeterminate: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub model: String,
    pub kind: ConvexityKind,
    pub dead_band: f64,
    pub entries: Vec<ConvexityEntry>,
    pub summary: ConvexitySummary,
    pub verdict: Verdict,
}

impl ConvexityReport {
    /// Every sampled `|II|` within `tol`.
    pub fn totally_geodesic(&self, tol: f64) -> bool {
        self.summary.indeterminate == 0 && self.summary.max_abs_ii <= tol
    }
}

/// Tangent directions of the requested causal kind at a boundary point.
pub fn boundary_directions(model: &SpacetimeModel, p: &[f64], kind: ConvexityKind, count: usize) -> Result<Vec<Vec<f64>>> {
    if kind == ConvexityKind::Light {
        return sample_boundary_light_tangents(model, p, count);
    }
    let db = model.db(p).ok_or(Error::NotOnBoundary(f64::NAN))?;
    let basis = complement_basis(model.dim, &[db]);
    let tol = model.tol.classification;
    let mut out = Vec::new();
    for d in sphere_points(basis.len(), 4 * count) {
        let mut w = vec![0.0; model.dim];
        for (c, e) in d.iter().zip(&basis) {
            w = linalg::axpy(&w, *c, e);
        }
        if !model.admissible(p, &w) {
            continue;
        }
        let l = model.l(p, &w);
        let keep = match kind {
            ConvexityKind::Time => l > tol * dot(&w, &w) && model.omega(p, &w).is_none_or(|o| o > 0.0),
            ConvexityKind::Space => l < -tol * dot(&w, &w),
            ConvexityKind::Light => unreachable!(),
        };
        if keep {
            out.push(w);
        }
        if out.len() == count {
            break;
        }
    }
    Ok(out)
}

/// Boundary points `(t, x)` over the given times and `count` points of `∂S`.
pub fn boundary_grid(model: &SpacetimeModel, times: &[f64], count: usize) -> Result<Vec<Vec<f64>>> {
    let pts = spatial_boundary_points(model, count)?;
    let mut out = Vec::with_capacity(times.len() * pts.len());
    for t in times {
        for bp in &pts {
            let mut x = vec![*t];
            x.extend_from_slice(&bp.point);
            out.push(x);
        }
    }
    Ok(out)
}

/// Record `II^w(w, w)` for sampled tangent directions at each point.
pub fn classify_boundary_convexity(
    model: &SpacetimeModel,
    kind: ConvexityKind,
    points: &[Vec<f64>],
    dirs: usize,
) -> Result<ConvexityReport> {
    classify_boundary_convexity_with(model, kind, points, dirs, Execution::default())
}

pub fn classify_boundary_convexity_with(
    model: &SpacetimeModel,
    kind: ConvexityKind,
    points: &[Vec<f64>],
    dirs: usize,
    exec: Execution,
) -> Result<ConvexityReport> {
    let band = model.tol.dead_band;
    let rigging = Rigging::gradient(model);
    let per_point = map_with(exec, points, |i, p| -> Result<Vec<ConvexityEntry>> {
        let ws = boundary_directions(model, p, kind, dirs)?;
        let eta = rigging.at(p);
        Ok(ws
            .into_iter()
            .enumerate()
            .map(|(j, w)| {
                let w = linalg::normalized(&w);
                let ii = second_fundamental_form(model, p, &eta, &w, &w).unwrap_or(f64::NAN);
                ConvexityEntry { point_index: i, direction_index: j, point: p.clone(), w, ii, verdict: Verdict::of(ii, band) }
            })
            .collect())
    });
    let mut entries = Vec::new();
    for r in per_point {
        entries.extend(r?);
    }
    let mut summary = ConvexitySummary { min_ii: f64::INFINITY, ..Default::default() };
    for e in &entries {
        match e.verdict {
            Verdict::Convex => summary.convex += 1,
            Verdict::StrictlyConcave => summary.strictly_concave += 1,
            Verdict::Indeterminate => summary.indeterminate += 1,
        }
        if e.ii.is_finite() {
            summary.min_ii = summary.min_ii.min(e.ii);
            summary.max_abs_ii = summary.max_abs_ii.max(e.ii.abs());
        }
    }
    let verdict = if summary.strictly_concave > 0 {
        Verdict::StrictlyConcave
    } else if summary.convex == 0 {
        Verdict::Indeterminate
    } else {
        Verdict::Convex
    };
    Ok(ConvexityReport { model: model.name.clone(), kind, dead_band: band, entries, summary, verdict })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeOutcome {
    StaysOnBoundary,
    ExitsManifold,
    EntersInterior,
    Indeterminate,
}

/// `b(γ(h))` along the ambient geodesic with `γ(0) = p`, `γ'(0) = w`, and
/// the same for `−h`.
fn b_at(model: &SpacetimeModel, p: &[f64], w: &[f64], h: f64) -> Option<(f64, f64)> {
    let opts = IntegrateOptions::new(h).ambient().with_tol(1e-13);
    let fwd = integrate_geodesic(model, p, w, &opts).ok()?;
    let minus_w: Vec<f64> = w.iter().map(|c| -c).collect();
    let bwd = integrate_geodesic(model, p, &minus_w, &opts.clone().backward()).ok()?;
    let done = |s: &crate::flow::GeodesicSolution| (s.last().t - h).abs() <= 1e-12 * h;
    if !done(&fwd) || !done(&bwd) {
        return None;
    }
    Some((model.b(&fwd.last().x)?, model.b(&bwd.last().x)?))
}

/// Compare the geodesic tangent to the boundary at `p` with the boundary.
///
/// The even part `e(h) = (b(γ(h)) + b(γ(−h)))/2 ≈ ½ Hess_b(w, w) h²` decides the
/// side once `e(h)/h²` has settled between `h` and `h/2`.
pub fn tangent_geodesic_probe(model: &SpacetimeModel, p: &[f64], w: &[f64], horizon: f64) -> Result<ProbeOutcome> {
    let db = model.db(p).ok_or(Error::NotOnBoundary(f64::NAN))?;
    let b0 = model.b(p).unwrap_or(f64::NAN);
    if b0.abs() > 1e-9 * model.scale {
        return Err(Error::NotOnBoundary(b0));
    }
    let dw = dot(&db, w);
    if dw.abs() > 1e-8 * norm(&db) * norm(w) {
        return Err(Error::NotTangent(dw));
    }
    let stay = 1e-8 * model.scale;
    let floor = 1e-13 * model.scale;
    let mut h = horizon;
    let mut first = true;
    let mut prev: Option<(f64, f64)> = None;
    for _ in 0..40 {
        let Some((bp, bm)) = b_at(model, p, w, h) else {
            h *= 0.5;
            continue;
        };
        if first {
            first = false;
            if bp.abs().max(bm.abs()) <= stay {
                return Ok(ProbeOutcome::StaysOnBoundary);
            }
        }
        let e = 0.5 * (bp + bm);
        if e.abs() <= floor {
            return Ok(ProbeOutcome::Indeterminate);
        }
        let q = e / (h * h);
        if let Some((q_prev, _)) = prev {
            if q.signum() == q_prev.signum() && (q - q_prev).abs() <= 0.25 * q.abs().max(q_prev.abs()) {
                return Ok(if e > 0.0 { ProbeOutcome::EntersInterior } else { ProbeOutcome::ExitsManifold });
            }
        }
        prev = Some((q, e));
        h *= 0.5;
    }
    Ok(ProbeOutcome::Indeterminate)
}

/// A future timelike vector tangent to the boundary, exposed for callers
/// that build their own direction sets.
pub fn boundary_time_axis(model: &SpacetimeModel, p: &[f64]) -> Result<Vec<f64>> {
    let db = model.db(p).ok_or(Error::NotOnBoundary(f64::NAN))?;
    tangent_timelike_axis(model, p, &db)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ads, minkowski};
    use crate::oracle::decomposition_ii;

    fn ads_tangent(r: f64) -> (ads::AdsRegion, Vec<f64>, Vec<f64>) {
        let p = vec![0.0, r, 0.7];
        let w = vec![1.0, 0.0, (1.0 + r * r).sqrt() / r];
        (ads::AdsRegion::Ball { r0: r }, p, w)
    }

    #[test]
    fn ads_hypersurface_second_fundamental_form() {
        for r in [0.5, 1.0, 2.0, 10.0] {
            let (region, p, w) = ads_tangent(r);
            let m = ads::make_ads(2, region);
            let eta = [0.0, -(1.0 + r * r).sqrt(), 0.0];
            let ii = second_fundamental_form(&m, &p, &eta, &w, &w).unwrap();
            let expected = (1.0 + r * r).sqrt() / r;
            assert!((ii - expected).abs() <= 1e-10 * expected, "{r}: {ii}");
            let oracle = decomposition_ii(&m, &p, &w, &eta);
            assert!((ii - oracle).abs() <= 1e-6 * expected, "{r}: {ii} vs {oracle}");
        }
    }

    #[test]
    fn rigging_scaling_and_tangential_shift() {
        let (region, p, w) = ads_tangent(1.0);
        let m = ads::make_ads(2, region);
        let e1 = vec![0.0, -2f64.sqrt(), 0.0];
        let e3: Vec<f64> = e1.iter().map(|c| 3.0 * c).collect();
        let c = rigging_invariance_check(&m, &p, &e1, &e3, &w, &w).unwrap();
        assert!((c.ratio - 1.0 / 3.0).abs() < 1e-12 && (c.predicted - 1.0 / 3.0).abs() < 1e-12);
        let shifted = vec![0.4, -2f64.sqrt(), 0.3];
        let c = rigging_invariance_check(&m, &p, &e1, &shifted, &w, &w).unwrap();
        assert!((c.ratio - 1.0).abs() < 1e-12);
        let radial = vec![0.0, -1.0, 0.0];
        let c = rigging_invariance_check(&m, &p, &e1, &radial, &w, &w).unwrap();
        assert!(c.ii1 > 0.0 && c.ii2 > 0.0);
        assert!(matches!(second_fundamental_form(&m, &p, &[0.0, 1.0, 0.0], &w, &w), Err(Error::NotInward(_))));
        assert!(matches!(
            second_fundamental_form(&m, &p, &e1, &[1.0, 1.0, 0.0], &[1.0, 1.0, 0.0]),
            Err(Error::NotTangent(_))
        ));
    }

    #[test]
    fn half_space_is_flat_and_ball_is_convex() {
        let m = minkowski::make_minkowski(2, minkowski::Region::HalfSpace);
        let pts = vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, -2.0]];
        let r = classify_boundary_convexity(&m, ConvexityKind::Light, &pts, 2).unwrap();
        assert_eq!(r.verdict, Verdict::Convex);
        assert!(r.totally_geodesic(1e-12));
        let p = [0.0, 0.0, 0.3];
        let w = [1.0, 0.0, 1.0];
        assert_eq!(tangent_geodesic_probe(&m, &p, &w, 0.5).unwrap(), ProbeOutcome::StaysOnBoundary);

        let radius = 2.0;
        let b = minkowski::make_minkowski(2, minkowski::Region::Ball { radius });
        let pts = boundary_grid(&b, &[0.0], 6).unwrap();
        let r = classify_boundary_convexity(&b, ConvexityKind::Light, &pts, 2).unwrap();
        for e in &r.entries {
            // unit-norm w = (∂_t + u)/√2 gives II = 1/(2R)
            assert!((e.ii - 0.5 / radius).abs() < 1e-10, "{}", e.ii);
        }
    }

    #[test]
    fn cassini_neck_is_concave() {
        let m = minkowski::make_minkowski(2, minkowski::Region::Cassini { a: 1.0, c: 1.1 });
        let pts = boundary_grid(&m, &[0.0], 16).unwrap();
        let r = classify_boundary_convexity(&m, ConvexityKind::Light, &pts, 2).unwrap();
        assert_eq!(r.verdict, Verdict::StrictlyConcave);
        assert!(r.summary.convex > 0);
    }

    #[test]
    fn ads_probe_leaves_the_ball() {
        let (region, p, w) = ads_tangent(1.0);
        let m = ads::make_ads(2, region);
        assert_eq!(tangent_geodesic_probe(&m, &p, &w, 0.1).unwrap(), ProbeOutcome::ExitsManifold);
    }

    #[test]
    fn time_and_space_directions() {
        let m = minkowski::make_minkowski(2, minkowski::Region::Ball { radius: 1.0 });
        let p = [0.0, 1.0, 0.0];
        for w in boundary_directions(&m, &p, ConvexityKind::Time, 4).unwrap() {
            assert!(m.l(&p, &w) > 0.0 && w[1].abs() < 1e-12);
        }
        let s = boundary_directions(&m, &p, ConvexityKind::Space, 4).unwrap();
        assert!(!s.is_empty());
        let r = classify_boundary_convexity(&m, ConvexityKind::Space, &[p.to_vec()], 4).unwrap();
        // only the spatial part of w sees the round cylinder
        assert!(r.entries.iter().all(|e| (e.ii - e.w[2] * e.w[2]).abs() < 1e-10));
        assert_eq!(r.verdict, Verdict::Convex);
    }
}
