//! Spacetime models, the fundamental tensor and causal character.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dual::{lift, mixed2, mixed3, seed2, seed3, D2, D3};
use crate::error::{Error, Result};
use crate::field::{gradient, ScalarField, TangentFunction};
use crate::linalg::{self, complement_basis, dot, norm};
use crate::sampling::sphere_points;
use crate::tolerance::ToleranceConfig;

pub type Covector = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type Predicate = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;
pub type ConeCheck = Arc<dyn Fn(&[f64], &[f64]) -> bool + Send + Sync>;
pub type TransitionFn = Arc<dyn Fn(&[f64], &[f64]) -> Transition + Send + Sync>;
pub type SpatialSampler = Arc<dyn Fn(usize) -> Vec<BoundaryPoint> + Send + Sync>;
/// First fraction `θ ∈ [0, 1]` at which the chord from `a` to `b` meets a
/// removed set too thin for the domain test at step ends.
pub type ChordGuard = Arc<dyn Fn(&[f64], &[f64]) -> Option<f64> + Send + Sync>;

/// Coordinate box with an optional extra predicate.
#[derive(Clone)]
pub struct Domain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub predicate: Option<Predicate>,
}

impl Domain {
    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        Self { lo, hi, predicate: None }
    }

    pub fn unbounded(dim: usize) -> Self {
        Self::boxed(vec![-1e12; dim], vec![1e12; dim])
    }

    pub fn with_predicate(mut self, p: Predicate) -> Self {
        self.predicate = Some(p);
        self
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().all(|c| c.is_finite())
            && x.iter().zip(&self.lo).all(|(c, l)| c > l)
            && x.iter().zip(&self.hi).all(|(c, h)| c < h)
            && self.predicate.as_ref().is_none_or(|p| p(x))
    }
}

/// What happens when a geodesic leaves the chart domain.
#[derive(Clone, Debug, PartialEq)]
pub enum Transition {
    /// A genuine end of the chart.
    Exit,
    /// Continue from the mapped state (deck transformation).
    Mapped(Vec<f64>, Vec<f64>),
    /// The chart was left through an edge that should have been glued.
    Leak,
}

/// A point of the spatial boundary together with its chart parameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub param: Vec<f64>,
    pub point: Vec<f64>,
}

/// Data `(g_S, ω)` of a standard stationary model, both on spatial coordinates.
#[derive(Clone)]
pub struct StationaryData {
    pub g_s: Arc<dyn TangentFunction>,
    pub omega: Arc<dyn TangentFunction>,
}

#[derive(Clone)]
pub struct SpacetimeModel {
    pub name: String,
    pub dim: usize,
    pub params: serde_json::Value,
    pub lagrangian: Arc<dyn TangentFunction>,
    /// `b > 0` inside, `b = 0` on the boundary.
    pub boundary: Option<Arc<dyn ScalarField>>,
    pub orientation: Option<Covector>,
    /// Ambient chart domain; the manifold is its intersection with `b >= 0`.
    pub domain: Domain,
    /// Returns false where `L` is not smooth enough to differentiate.
    pub cone_admissible: Option<ConeCheck>,
    /// Coordinate 0 is a temporal function and `{t = c}` are Cauchy slices.
    pub product_form: bool,
    pub stationary: Option<StationaryData>,
    pub transition: Option<TransitionFn>,
    pub chord_guard: Option<ChordGuard>,
    pub spatial_boundary: Option<SpatialSampler>,
    /// Spatial point used to ray-cast the boundary when no sampler is given.
    pub interior_point: Option<Vec<f64>>,
    pub scale: f64,
    pub tol: ToleranceConfig,
}

impl fmt::Debug for SpacetimeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpacetimeModel")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

impl SpacetimeModel {
    pub fn new(name: &str, dim: usize, lagrangian: Arc<dyn TangentFunction>) -> Self {
        Self {
            name: name.to_string(),
            dim,
            params: serde_json::Value::Null,
            lagrangian,
            boundary: None,
            orientation: None,
            domain: Domain::unbounded(dim),
            cone_admissible: None,
            product_form: false,
            stationary: None,
            transition: None,
            chord_guard: None,
            spatial_boundary: None,
            interior_point: None,
            scale: 1.0,
            tol: ToleranceConfig::default(),
        }
    }

    pub fn with_params(mut self, params: serde_json::Value) -> Self {
        self.params = params;
        self
    }

    pub fn with_boundary(mut self, b: Arc<dyn ScalarField>) -> Self {
        self.boundary = Some(b);
        self
    }

    pub fn with_orientation(mut self, omega: Covector) -> Self {
        self.orientation = Some(omega);
        self
    }

    /// `Ω = dt` on coordinate 0.
    pub fn with_time_orientation(self) -> Self {
        let dim = self.dim;
        self.with_orientation(Arc::new(move |_x: &[f64]| {
            let mut w = vec![0.0; dim];
            w[0] = 1.0;
            w
        }))
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_tolerances(mut self, tol: ToleranceConfig) -> Self {
        self.tol = tol;
        self
    }

    pub fn product(mut self) -> Self {
        self.product_form = true;
        self
    }

    pub fn l(&self, x: &[f64], v: &[f64]) -> f64 {
        self.lagrangian.eval_f64(x, v)
    }

    pub fn b(&self, x: &[f64]) -> Option<f64> {
        self.boundary.as_ref().map(|b| b.eval_f64(x))
    }

    pub fn db(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.boundary.as_ref().map(|b| gradient(b.as_ref(), x))
    }

    pub fn omega(&self, x: &[f64], v: &[f64]) -> Option<f64> {
        self.orientation.as_ref().map(|o| dot(&o(x), v))
    }

    pub fn admissible(&self, x: &[f64], v: &[f64]) -> bool {
        self.cone_admissible.as_ref().is_none_or(|c| c(x, v))
    }

    /// Inside the manifold: in the domain and `b >= -slack`.
    pub fn inside(&self, x: &[f64], slack: f64) -> bool {
        self.domain.contains(x) && self.b(x).is_none_or(|b| b >= -slack)
    }

    fn det_floor(&self) -> f64 {
        self.tol.det_floor * self.scale.powi(self.dim as i32)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CausalClass {
    Timelike,
    Lightlike,
    Spacelike,
    OutsideDomain,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TangentSample {
    pub point: Vec<f64>,
    pub vector: Vec<f64>,
    pub causal_class: CausalClass,
    pub tolerance: f64,
}

impl TangentSample {
    pub fn new(model: &SpacetimeModel, point: &[f64], vector: &[f64], tolerance: f64) -> Self {
        Self {
            point: point.to_vec(),
            vector: vector.to_vec(),
            causal_class: causal_classify(model, point, vector, tolerance),
            tolerance,
        }
    }

    pub fn reclassify(&self, model: &SpacetimeModel) -> Self {
        Self::new(model, &self.point, &self.vector, self.tolerance)
    }
}

#[derive(Clone, Debug)]
pub struct FundamentalTensorValue {
    pub base: TangentSample,
    pub matrix: DMatrix<f64>,
}

fn check_evaluable(model: &SpacetimeModel, p: &[f64], v: &[f64]) -> Result<()> {
    if p.len() != model.dim || v.len() != model.dim {
        return Err(Error::InvalidInitialData(format!(
            "expected {} components, got point {} and vector {}",
            model.dim,
            p.len(),
            v.len()
        )));
    }
    if !model.domain.contains(p) {
        return Err(Error::Domain(p.to_vec()));
    }
    if norm(v) == 0.0 || !v.iter().all(|c| c.is_finite()) {
        return Err(Error::InvalidInitialData("zero or non-finite vector".into()));
    }
    if !model.admissible(p, v) {
        return Err(Error::ConeDomain(p.to_vec()));
    }
    Ok(())
}

pub fn eval_lagrangian(model: &SpacetimeModel, p: &[f64], v: &[f64]) -> Result<f64> {
    check_evaluable(model, p, v)?;
    Ok(model.l(p, v))
}

/// `g_v` without domain checks.
pub fn tensor_matrix(model: &SpacetimeModel, p: &[f64], v: &[f64]) -> DMatrix<f64> {
    let n = model.dim;
    let xs: Vec<D2> = lift(p);
    let mut m = DMatrix::zeros(n, n);
    let mut ei = vec![0.0; n];
    let mut ej = vec![0.0; n];
    for i in 0..n {
        ei[i] = 1.0;
        for j in i..n {
            ej[j] = 1.0;
            let vs = seed2(v, &ei, &ej);
            let val = 0.5 * mixed2(model.lagrangian.eval_d2(&xs, &vs));
            m[(i, j)] = val;
            m[(j, i)] = val;
            ej[j] = 0.0;
        }
        ei[i] = 0.0;
    }
    m
}

/// `∂_m g_ij` for every `m`, from mixed third derivatives of `L`.
pub fn tensor_x_derivatives(model: &SpacetimeModel, p: &[f64], v: &[f64]) -> Vec<DMatrix<f64>> {
    let n = model.dim;
    let zero = vec![0.0; n];
    let mut out = vec![DMatrix::zeros(n, n); n];
    let mut e_i = vec![0.0; n];
    let mut e_j = vec![0.0; n];
    let mut e_m = vec![0.0; n];
    for (m, dg) in out.iter_mut().enumerate() {
        e_m[m] = 1.0;
        let xs: Vec<D3> = seed3(p, &zero, &zero, &e_m);
        for i in 0..n {
            e_i[i] = 1.0;
            for j in i..n {
                e_j[j] = 1.0;
                let vs = seed3(v, &e_i, &e_j, &zero);
                let val = 0.5 * mixed3(model.lagrangian.eval_d3(&xs, &vs));
                dg[(i, j)] = val;
                dg[(j, i)] = val;
                e_j[j] = 0.0;
            }
            e_i[i] = 0.0;
        }
        e_m[m] = 0.0;
    }
    out
}

pub fn fundamental_tensor(model: &SpacetimeModel, p: &[f64], v: &[f64]) -> Result<FundamentalTensorValue> {
    check_evaluable(model, p, v)?;
    let matrix = tensor_matrix(model, p, v);
    let det = matrix.determinant();
    let floor = model.det_floor();
    if !det.is_finite() || det.abs() < floor {
        return Err(Error::DegenerateTensor { det, floor });
    }
    Ok(FundamentalTensorValue {
        base: TangentSample::new(model, p, v, model.tol.classification),
        matrix,
    })
}

/// LU of `g_v` with the configured degeneracy floor.
pub fn factor_tensor(model: &SpacetimeModel, g: &DMatrix<f64>) -> Result<linalg::Factored> {
    linalg::Factored::new(g, model.det_floor())
}

pub fn causal_classify(model: &SpacetimeModel, p: &[f64], v: &[f64], tol: f64) -> CausalClass {
    if !model.domain.contains(p) {
        return CausalClass::OutsideDomain;
    }
    let l = model.l(p, v);
    let n2 = dot(v, v);
    let future = model.omega(p, v).is_none_or(|o| o > 0.0);
    if future && l.abs() <= tol * n2 {
        CausalClass::Lightlike
    } else if future && l > tol * n2 {
        CausalClass::Timelike
    } else {
        CausalClass::Spacelike
    }
}

/// Lightlike `axis + s·seed`, `s > 0`, on the ray leaving the cone.
pub fn cone_direction_solve(model: &SpacetimeModel, p: &[f64], seed: &[f64], axis: &[f64]) -> Result<Vec<f64>> {
    if !model.domain.contains(p) {
        return Err(Error::Domain(p.to_vec()));
    }
    let f = |s: f64| model.l(p, &linalg::axpy(axis, s, seed));
    let f0 = f(0.0);
    if !(f0 > 0.0) {
        return Err(Error::Bracket(format!("axis is not timelike (L = {f0:e})")));
    }
    let unit = norm(axis) / norm(seed);
    let s_max = 1e8 * unit;
    let (mut lo, mut hi) = (0.0, unit / 16.0);
    loop {
        let fh = f(hi);
        if fh < 0.0 {
            break;
        }
        if !fh.is_finite() {
            return Err(Error::Bracket(format!("L is not finite at s = {hi:e}")));
        }
        lo = hi;
        hi *= 2.0;
        if hi > s_max {
            return Err(Error::NoRoot(s_max));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = if f(lo).abs() <= f(hi).abs() { lo } else { hi };
    Ok(linalg::axpy(axis, s, seed))
}

/// A future timelike vector tangent to `ker db` at `p`.
pub fn tangent_timelike_axis(model: &SpacetimeModel, p: &[f64], db: &[f64]) -> Result<Vec<f64>> {
    let n = model.dim;
    let nn = dot(db, db);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let consider = |a: Vec<f64>, best: &mut Option<(f64, Vec<f64>)>| {
        let na = norm(&a);
        if na < 1e-12 {
            return;
        }
        let mut a = linalg::scale(&a, 1.0 / na);
        if model.omega(p, &a).is_some_and(|o| o < 0.0) {
            a = linalg::scale(&a, -1.0);
        }
        let q = model.l(p, &a);
        if best.as_ref().is_none_or(|(bq, _)| q > *bq) {
            *best = Some((q, a));
        }
    };
    let mut e0 = vec![0.0; n];
    e0[0] = 1.0;
    consider(linalg::axpy(&e0, -dot(&e0, db) / nn, db), &mut best);
    if best.as_ref().is_none_or(|(q, _)| *q <= model.tol.classification) {
        let basis = complement_basis(n, &[db.to_vec()]);
        for d in sphere_points(basis.len(), 256) {
            let mut a = vec![0.0; n];
            for (c, b) in d.iter().zip(&basis) {
                a = linalg::axpy(&a, *c, b);
            }
            consider(a, &mut best);
        }
    }
    match best {
        Some((q, a)) if q > model.tol.classification && model.omega(p, &a).is_none_or(|o| o > 0.0) => Ok(a),
        _ => Err(Error::NonTimelikeBoundary(p.to_vec())),
    }
}

/// Lightlike vectors tangent to the boundary at `p`, covering the direction
/// sphere of the tangent hyperplane.
///
/// When the tangent hyperplane is one-dimensional (a 1+1 model) there are no
/// lightlike tangents and the list is empty.
pub fn sample_boundary_light_tangents(model: &SpacetimeModel, p: &[f64], count: usize) -> Result<Vec<Vec<f64>>> {
    let b = model.b(p).ok_or(Error::NotOnBoundary(f64::NAN))?;
    if b.abs() > 1e-9 * model.scale {
        return Err(Error::NotOnBoundary(b));
    }
    let db = model.db(p).unwrap_or_default();
    let axis = tangent_timelike_axis(model, p, &db)?;
    let seeds = complement_basis(model.dim, &[db.clone(), axis.clone()]);
    let mut out = Vec::new();
    for d in sphere_points(seeds.len(), count) {
        let mut seed = vec![0.0; model.dim];
        for (c, s) in d.iter().zip(&seeds) {
            seed = linalg::axpy(&seed, *c, s);
        }
        out.push(cone_direction_solve(model, p, &seed, &axis)?);
    }
    Ok(out)
}

/// Newton projection onto `b = 0` along the Euclidean gradient.
pub fn project_to_boundary(model: &SpacetimeModel, x: &[f64]) -> Result<Vec<f64>> {
    let bf = model.boundary.as_ref().ok_or(Error::NotOnBoundary(f64::NAN))?;
    let mut y = x.to_vec();
    for _ in 0..60 {
        let b = bf.eval_f64(&y);
        if b.abs() <= 1e-15 * model.scale {
            return Ok(y);
        }
        let g = gradient(bf.as_ref(), &y);
        let step = b / dot(&g, &g);
        y = linalg::axpy(&y, -step, &g);
        if (step * norm(&g)).abs() <= 1e-16 * model.scale.max(norm(&y)) {
            break;
        }
    }
    let b = bf.eval_f64(&y);
    if b.abs() <= 1e-12 * model.scale {
        Ok(y)
    } else {
        Err(Error::NotOnBoundary(b))
    }
}

/// Points of the spatial boundary `∂S`, in spatial coordinates.
pub fn spatial_boundary_points(model: &SpacetimeModel, count: usize) -> Result<Vec<BoundaryPoint>> {
    if let Some(s) = &model.spatial_boundary {
        return Ok(s(count));
    }
    let bf = model
        .boundary
        .as_ref()
        .ok_or_else(|| Error::Config(format!("model {} has no boundary", model.name)))?;
    let centre = model
        .interior_point
        .clone()
        .ok_or_else(|| Error::Config(format!("model {} has no interior point", model.name)))?;
    let n = centre.len();
    let full = |y: &[f64]| {
        let mut x = vec![0.0; n + 1];
        x[1..].copy_from_slice(y);
        x
    };
    let b_at = |y: &[f64]| bf.eval_f64(&full(y));
    let mut out = Vec::new();
    for dir in sphere_points(n, count) {
        let (mut lo, mut hi) = (0.0, 0.01 * model.scale);
        let mut found = false;
        for _ in 0..4000 {
            let y = linalg::axpy(&centre, hi, &dir);
            if !model.domain.contains(&full(&y)) {
                break;
            }
            if b_at(&y) <= 0.0 {
                found = true;
                break;
            }
            lo = hi;
            hi += 0.01 * model.scale;
        }
        if !found {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if b_at(&linalg::axpy(&centre, mid, &dir)) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let y = linalg::axpy(&centre, 0.5 * (lo + hi), &dir);
        let x = project_to_boundary(model, &full(&y))?;
        let param = if n == 2 { vec![dir[1].atan2(dir[0])] } else { dir.clone() };
        out.push(BoundaryPoint { param, point: x[1..].to_vec() });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ads, cone_triple, minkowski};
    use crate::oracle;

    #[test]
    fn minkowski_values() {
        let m = minkowski::make_minkowski(1, minkowski::Region::Full);
        assert_eq!(eval_lagrangian(&m, &[0.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(causal_classify(&m, &[0.0, 0.0], &[1.0, 0.0], 1e-10), CausalClass::Timelike);
        assert_eq!(causal_classify(&m, &[0.0, 0.0], &[1.0, 1.0], 1e-10), CausalClass::Lightlike);
        assert_eq!(causal_classify(&m, &[0.0, 0.0], &[-1.0, 1.0], 1e-10), CausalClass::Spacelike);
        let v = cone_direction_solve(&m, &[0.0, 0.0], &[0.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-14 && (v[1] - 1.0).abs() < 1e-14);
        let g = fundamental_tensor(&m, &[0.0, 0.0], &[3.0, 0.5]).unwrap();
        assert_eq!(g.matrix, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]));
    }

    #[test]
    fn ads_lightlike_tangent_and_spacelike_radial() {
        let m = ads::make_ads(2, ads::AdsRegion::Full);
        let p = [0.0, 1.0, 0.3];
        let x = [1.0, 0.0, 2f64.sqrt()];
        assert!(eval_lagrangian(&m, &p, &x).unwrap().abs() < 1e-14);
        assert_eq!(causal_classify(&m, &p, &[0.0, 1.0, 0.0], 1e-10), CausalClass::Spacelike);
        let v = cone_direction_solve(&m, &p, &[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]).unwrap();
        assert!((v[2] - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(causal_classify(&m, &p, &v, 1e-10), CausalClass::Lightlike);
    }

    #[test]
    fn cone_triple_tensor_matches_finite_differences() {
        let m = cone_triple::make_cone_triple(&cone_triple::ConeTripleParams::default());
        let p = [0.0, 0.0, 0.0];
        let v = [2.0, 1.0, 0.0];
        let g = fundamental_tensor(&m, &p, &v).unwrap().matrix;
        let fd = oracle::fd_tensor(&m, &p, &v, 1e-4);
        for i in 0..3 {
            for j in 0..3 {
                assert!((g[(i, j)] - fd[(i, j)]).abs() <= 1e-6 * g.abs().max(), "{i}{j}");
            }
        }
        let s = cone_direction_solve(&m, &p, &[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0]).unwrap();
        assert!((s[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_tangents_of_half_space_and_cylinder() {
        let m = minkowski::make_minkowski(2, minkowski::Region::HalfSpace);
        let ws = sample_boundary_light_tangents(&m, &[0.0, 0.0, 0.3], 2).unwrap();
        assert_eq!(ws.len(), 2);
        for w in &ws {
            assert!(w[1].abs() < 1e-12);
            assert!((w[0].abs() - w[2].abs()).abs() < 1e-12);
        }
        let r = 2.0;
        let c = minkowski::make_minkowski(2, minkowski::Region::Ball { radius: r });
        let p = [0.0, r * 0.6, r * 0.8];
        for w in sample_boundary_light_tangents(&c, &p, 2).unwrap() {
            let u = [w[1] / w[0], w[2] / w[0]];
            assert!((u[0] * 0.8 + u[1] * 0.6).abs() - 1.0 < 1e-12);
            assert!((u[0] * 0.6 + u[1] * 0.8).abs() < 1e-12);
        }
    }

    #[test]
    fn two_dimensional_boundary_has_no_light_tangents() {
        let m = crate::models::strip::make_cylinder_strip((-5.0, 5.0));
        assert!(sample_boundary_light_tangents(&m, &[0.0, 1.0], 8).unwrap().is_empty());
    }
}
