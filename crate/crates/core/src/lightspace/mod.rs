//! Sampling the space of cone geodesics through Cauchy-surface and boundary
//! charts, and gluing the future and past charts.

pub mod fermat;
pub mod nonhausdorff;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{integrate_both_ways, BoundaryHit, GeodesicSolution, IntegrateOptions, Termination};
use crate::geometry::{cone_direction_solve, spatial_boundary_points, tangent_timelike_axis, SpacetimeModel};
use crate::linalg::{self, complement_basis, dist, dot};
use crate::models::ads::angles_of;
use crate::sampling::sphere_points;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartKind {
    EllPlusInteriorS,
    EllPlusBoundary,
    EllMinusInteriorS,
    EllMinusBoundary,
}

impl ChartKind {
    pub fn is_boundary(self) -> bool {
        matches!(self, ChartKind::EllPlusBoundary | ChartKind::EllMinusBoundary)
    }

    pub fn is_plus(self) -> bool {
        matches!(self, ChartKind::EllPlusInteriorS | ChartKind::EllPlusBoundary)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeSign {
    Plus,
    Minus,
}

/// The level set `{t = time}` of the temporal coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchySurface {
    pub time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LightspacePoint {
    pub chart: ChartKind,
    pub point: Vec<f64>,
    /// Future-pointing lightlike representative with `Ω(v) = 1`.
    pub direction: Vec<f64>,
    /// Chart coordinates: `(x, angles)` inside, `(t, ∂S parameters, u)` on
    /// the boundary; always `2n − 1` entries for `n` spatial dimensions.
    pub coords: Vec<f64>,
    pub base_index: usize,
    pub direction_index: usize,
}

fn require_product(model: &SpacetimeModel) -> Result<()> {
    if model.product_form {
        Ok(())
    } else {
        Err(Error::NotProductForm(model.name.clone()))
    }
}

fn gauge(model: &SpacetimeModel, p: &[f64], v: Vec<f64>) -> Vec<f64> {
    let o = model.omega(p, &v).unwrap_or(v[0]);
    linalg::scale(&v, 1.0 / o)
}

fn time_axis(dim: usize) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[0] = 1.0;
    e
}

/// Lightlike direction with spatial part along `seed`.
fn lightlike_over(model: &SpacetimeModel, p: &[f64], spatial: &[f64]) -> Result<Vec<f64>> {
    let mut seed = vec![0.0];
    seed.extend_from_slice(spatial);
    let v = cone_direction_solve(model, p, &seed, &time_axis(model.dim))?;
    Ok(gauge(model, p, v))
}

fn interior_coords(x: &[f64], spatial_dir: &[f64]) -> Vec<f64> {
    let mut c = x.to_vec();
    if spatial_dir.len() > 1 {
        c.extend(angles_of(&linalg::normalized(spatial_dir)));
    }
    c
}

/// One point of `ℓ^±_S` per (grid point, cone direction). `grid` holds
/// spatial points of the surface.
pub fn sample_chart_interior(
    model: &SpacetimeModel,
    surface: CauchySurface,
    grid: &[Vec<f64>],
    dirs: usize,
    sign: ConeSign,
) -> Result<Vec<LightspacePoint>> {
    require_product(model)?;
    let n = model.dim - 1;
    let chart = match sign {
        ConeSign::Plus => ChartKind::EllPlusInteriorS,
        ConeSign::Minus => ChartKind::EllMinusInteriorS,
    };
    let mut out = Vec::new();
    for (i, x) in grid.iter().enumerate() {
        let mut p = vec![surface.time];
        p.extend_from_slice(x);
        if !model.inside(&p, 0.0) || model.b(&p).is_some_and(|b| b <= 0.0) {
            return Err(Error::Domain(p));
        }
        for (j, d) in sphere_points(n, dirs).into_iter().enumerate() {
            let v = lightlike_over(model, &p, &d)?;
            // ℓ⁻ keeps the future representative; its chart reads −v
            let chart_dir: Vec<f64> = match sign {
                ConeSign::Plus => v[1..].to_vec(),
                ConeSign::Minus => v[1..].iter().map(|c| -c).collect(),
            };
            out.push(LightspacePoint {
                chart,
                coords: interior_coords(x, &chart_dir),
                point: p.clone(),
                direction: v,
                base_index: i,
                direction_index: j,
            });
        }
    }
    Ok(out)
}

/// Points of `ℓ^±_{∂M}` over boundary points `(t, x)` with `t` in `times`,
/// each time on the `sign` side of the surface.
///
/// `u` runs over `0` and, in dimension `n >= 2`, over `tangent_dirs` unit
/// tangents of `∂S` scaled by each entry of `magnitudes`.
pub fn sample_chart_boundary(
    model: &SpacetimeModel,
    surface: CauchySurface,
    times: &[f64],
    boundary_count: usize,
    tangent_dirs: usize,
    magnitudes: &[f64],
    sign: ConeSign,
) -> Result<Vec<LightspacePoint>> {
    require_product(model)?;
    let n = model.dim - 1;
    let chart = match sign {
        ConeSign::Plus => ChartKind::EllPlusBoundary,
        ConeSign::Minus => ChartKind::EllMinusBoundary,
    };
    let s = match sign {
        ConeSign::Plus => 1.0,
        ConeSign::Minus => -1.0,
    };
    let bpoints = spatial_boundary_points(model, boundary_count)?;
    let mut out = Vec::new();
    let mut base = 0;
    for t in times.iter().filter(|t| s * (**t - surface.time) >= 0.0) {
        for bp in &bpoints {
            let mut p = vec![*t];
            p.extend_from_slice(&bp.point);
            let db = model.db(&p).ok_or(Error::NotOnBoundary(f64::NAN))?;
            tangent_timelike_axis(model, &p, &db)?;
            let eta = linalg::normalized(&db[1..]);
            let tangent = complement_basis(n, std::slice::from_ref(&eta));
            let mut us: Vec<Vec<f64>> = vec![vec![0.0; n]];
            if n >= 2 {
                for d in sphere_points(tangent.len(), tangent_dirs) {
                    let mut u = vec![0.0; n];
                    for (c, e) in d.iter().zip(&tangent) {
                        u = linalg::axpy(&u, *c, e);
                    }
                    for m in magnitudes {
                        us.push(linalg::scale(&u, *m));
                    }
                }
            }
            for (j, u) in us.iter().enumerate() {
                let seed = linalg::axpy(u, s, &eta);
                let v = lightlike_over(model, &p, &seed)?;
                let mut coords = vec![*t];
                coords.extend_from_slice(&bp.param);
                coords.extend(tangent.iter().map(|e| dot(e, u)));
                out.push(LightspacePoint {
                    chart,
                    point: p.clone(),
                    direction: v,
                    coords,
                    base_index: base,
                    direction_index: j,
                });
            }
            base += 1;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GluedClass {
    /// Indices into [`GluedSet::points`].
    pub members: Vec<usize>,
    pub charts: Vec<ChartKind>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GluedSet {
    pub points: Vec<LightspacePoint>,
    pub classes: Vec<GluedClass>,
    /// Class index of each point.
    pub class_of: Vec<usize>,
}

impl GluedSet {
    /// Number of classes over a base point of the interior grid.
    pub fn classes_over(&self, base_index: usize) -> usize {
        self.classes
            .iter()
            .filter(|c| {
                c.members
                    .iter()
                    .any(|&i| !self.points[i].chart.is_boundary() && self.points[i].base_index == base_index)
            })
            .count()
    }
}

const SAME: f64 = 1e-9;

/// Class labels for a point list: interior points with equal base point and
/// representative share a class; boundary points are never identified.
pub fn identify(points: &[LightspacePoint]) -> Vec<usize> {
    let mut labels: Vec<usize> = Vec::with_capacity(points.len());
    let mut next = 0;
    for (i, q) in points.iter().enumerate() {
        let found = (!q.chart.is_boundary())
            .then(|| {
                points[..i].iter().position(|r| {
                    !r.chart.is_boundary() && dist(&r.point, &q.point) <= SAME && dist(&r.direction, &q.direction) <= SAME
                })
            })
            .flatten();
        match found {
            Some(j) => labels.push(labels[j]),
            None => {
                labels.push(next);
                next += 1;
            }
        }
    }
    labels
}

/// Glue `ℓ⁺` and `ℓ⁻` samples. Interior points of both charts must come
/// from the same surface grid.
pub fn glue_charts(plus: &[LightspacePoint], minus: &[LightspacePoint]) -> Result<GluedSet> {
    let bases = |pts: &[LightspacePoint]| {
        let mut b: Vec<(usize, Vec<f64>)> = pts
            .iter()
            .filter(|q| !q.chart.is_boundary())
            .map(|q| (q.base_index, q.point.clone()))
            .collect();
        b.dedup_by(|a, c| a.0 == c.0);
        b
    };
    let (bp, bm) = (bases(plus), bases(minus));
    if bp.len() != bm.len() || bp.iter().zip(&bm).any(|(a, c)| a.0 != c.0 || dist(&a.1, &c.1) > SAME) {
        return Err(Error::GridMismatch);
    }
    let points: Vec<LightspacePoint> = plus.iter().chain(minus).cloned().collect();
    let class_of = identify(&points);
    let count = class_of.iter().copied().max().map_or(0, |m| m + 1);
    let mut classes = vec![GluedClass { members: Vec::new(), charts: Vec::new() }; count];
    for (i, c) in class_of.iter().enumerate() {
        classes[*c].members.push(i);
        if !classes[*c].charts.contains(&points[i].chart) {
            classes[*c].charts.push(points[i].chart);
        }
    }
    Ok(GluedSet { points, classes, class_of })
}

/// The maximal integrated cone geodesic through a lightspace point, merged
/// into one forward-parametrised curve with `t = 0` at the point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TracedGeodesic {
    pub solution: GeodesicSolution,
    pub past_termination: Termination,
    pub past_hit: Option<BoundaryHit>,
}

pub fn trace_lightspace_point(model: &SpacetimeModel, q: &LightspacePoint, horizon: f64) -> Result<TracedGeodesic> {
    let opts = IntegrateOptions::new(horizon).with_tol(1e-12);
    let (fwd, bwd, merged) = integrate_both_ways(model, &q.point, &q.direction, &opts)?;
    let solution = GeodesicSolution {
        samples: merged,
        termination: fwd.termination,
        boundary_hit: fwd.boundary_hit.clone(),
        lagrangian_drift: fwd.lagrangian_drift.max(bwd.lagrangian_drift),
        direction: fwd.direction,
        inextendible: fwd.inextendible && bwd.inextendible,
        level_crossings: Vec::new(),
    };
    Ok(TracedGeodesic { solution, past_termination: bwd.termination, past_hit: bwd.boundary_hit })
}

/// Largest distance from a point of one traced image to the other image.
pub fn image_separation(a: &TracedGeodesic, b: &TracedGeodesic) -> f64 {
    let pa = a.solution.densify(4);
    let pb = b.solution.densify(4);
    crate::flow::conformal::max_point_to_polyline(&pa, &pb).max(crate::flow::conformal::max_point_to_polyline(&pb, &pa))
}

/// Coordinate dimension `2n − 1` expected of every chart.
pub fn lightspace_dimension(model: &SpacetimeModel) -> usize {
    2 * (model.dim - 1) - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm;
    use crate::models::{minkowski, strip};

    fn strip_charts() -> (SpacetimeModel, Vec<LightspacePoint>, Vec<LightspacePoint>) {
        let m = strip::make_cylinder_strip((-10.0, 10.0));
        let grid: Vec<Vec<f64>> = [-0.5, 0.0, 0.5].iter().map(|x| vec![*x]).collect();
        let s = CauchySurface { time: 0.0 };
        let mut plus = sample_chart_interior(&m, s, &grid, 4, ConeSign::Plus).unwrap();
        let mut minus = sample_chart_interior(&m, s, &grid, 4, ConeSign::Minus).unwrap();
        plus.extend(sample_chart_boundary(&m, s, &[0.0, 1.0], 2, 0, &[], ConeSign::Plus).unwrap());
        minus.extend(sample_chart_boundary(&m, s, &[0.0, -1.0], 2, 0, &[], ConeSign::Minus).unwrap());
        (m, plus, minus)
    }

    #[test]
    fn strip_charts_match_the_two_null_lines() {
        let (m, plus, minus) = strip_charts();
        let interior: Vec<_> = plus.iter().filter(|q| !q.chart.is_boundary()).collect();
        assert_eq!(interior.len(), 6);
        for q in plus.iter().chain(&minus) {
            assert_eq!(q.coords.len(), lightspace_dimension(&m));
            assert!((q.direction[0] - 1.0).abs() < 1e-10);
            assert!(m.l(&q.point, &q.direction).abs() < 1e-10);
        }
        let boundary: Vec<_> = plus.iter().filter(|q| q.chart.is_boundary()).collect();
        assert_eq!(boundary.len(), 4);
        for q in boundary {
            // inward: x' has the sign of −x
            assert!(q.direction[1] * q.point[1] < 0.0);
        }
        let glued = glue_charts(&plus, &minus).unwrap();
        for i in 0..3 {
            assert_eq!(glued.classes_over(i), 2);
        }
        for c in &glued.classes {
            if c.charts.iter().any(|k| k.is_boundary()) {
                assert_eq!(c.members.len(), 1);
            }
        }
    }

    #[test]
    fn gluing_is_idempotent_and_checks_grids() {
        let (_, plus, minus) = strip_charts();
        let glued = glue_charts(&plus, &minus).unwrap();
        let reps: Vec<LightspacePoint> = glued.classes.iter().map(|c| glued.points[c.members[0]].clone()).collect();
        let again = identify(&reps);
        assert_eq!(again, (0..reps.len()).collect::<Vec<_>>());
        let mut shifted = minus.clone();
        for q in shifted.iter_mut().filter(|q| !q.chart.is_boundary() && q.base_index == 0) {
            q.point[1] += 0.1;
        }
        assert!(matches!(glue_charts(&plus, &shifted), Err(Error::GridMismatch)));
    }

    #[test]
    fn boundary_trace_matches_the_reflected_line() {
        let m = strip::make_cylinder_strip((-10.0, 10.0));
        let s = CauchySurface { time: 0.0 };
        let pts = sample_chart_boundary(&m, s, &[0.0], 2, 0, &[], ConeSign::Plus).unwrap();
        let q = pts.iter().find(|q| q.point[1] > 0.0).unwrap();
        let tr = trace_lightspace_point(&m, q, 10.0).unwrap();
        assert_eq!(tr.past_termination, Termination::BoundaryHit);
        assert_eq!(tr.solution.termination, Termination::BoundaryHit);
        let end = tr.solution.last();
        assert!((end.x[0] - 2.0).abs() < 1e-9 && (end.x[1] + 1.0).abs() < 1e-9);
        // the same geodesic seen from the interior chart at its crossing of t = 1
        let inner = LightspacePoint {
            chart: ChartKind::EllPlusInteriorS,
            point: vec![1.0, 0.0],
            direction: vec![1.0, -1.0],
            coords: vec![0.0],
            base_index: 0,
            direction_index: 0,
        };
        let tr2 = trace_lightspace_point(&m, &inner, 10.0).unwrap();
        assert!(image_separation(&tr, &tr2) < 1e-6);
    }

    #[test]
    fn minkowski_fibres_are_circles() {
        let m = minkowski::make_minkowski(2, minkowski::Region::Full).product();
        let pts = sample_chart_interior(&m, CauchySurface { time: 0.0 }, &[vec![0.0, 0.0]], 12, ConeSign::Plus).unwrap();
        assert_eq!(pts.len(), 12);
        for q in &pts {
            assert!((norm(&q.direction[1..]) - 1.0).abs() < 1e-10);
            assert_eq!(q.coords.len(), 3);
        }
        let tr = trace_lightspace_point(&m, &pts[3], 2.0).unwrap();
        let a = &tr.solution.samples[0];
        for s in &tr.solution.samples {
            let d = linalg::sub(&s.x, &a.x);
            let c = d[1] * pts[3].direction[2] - d[2] * pts[3].direction[1];
            assert!(c.abs() < 1e-12);
        }
        let err = sample_chart_interior(
            &crate::models::ads::make_ads(2, crate::models::ads::AdsRegion::Full),
            CauchySurface { time: 0.0 },
            &[vec![1.0, 1.0]],
            4,
            ConeSign::Plus,
        );
        assert!(err.is_ok());
    }
}
