//! Fermat metrics `F = ω + √(g_S + ω²)` of standard stationary models,
//! boundary convexity for `F` and connecting-geodesic probes on `S`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::boundary::{second_fundamental_form, Verdict};
use crate::dual::Scalar;
use crate::error::{Error, Result};
use crate::field::{ScalarField, SmoothField, SmoothTangentFn, TangentFunction};
use crate::flow::{integrate_geodesic, IntegrateOptions, Sample};
use crate::geometry::{spatial_boundary_points, Domain, SpacetimeModel, StationaryData, Transition};
use crate::linalg::{self, complement_basis, dist, norm};
use crate::parallel::{map_with, Execution};
use crate::sampling::sphere_points;

/// `F²` for stationary data `(g_S, ω)`.
pub struct FermatLagrangian {
    pub g_s: Arc<dyn TangentFunction>,
    pub omega: Arc<dyn TangentFunction>,
}

impl SmoothTangentFn for FermatLagrangian {
    fn eval<S: Scalar>(&self, x: &[S], v: &[S]) -> S {
        let w = S::call_tangent(self.omega.as_ref(), x, v);
        let g = S::call_tangent(self.g_s.as_ref(), x, v);
        let f = w + (g + w * w).sqrt();
        f * f
    }
}

/// A field of the product restricted to the slice `t = 0`.
struct Slice(Arc<dyn ScalarField>);

impl SmoothField for Slice {
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        let mut y = Vec::with_capacity(x.len() + 1);
        y.push(S::cst(0.0));
        y.extend_from_slice(x);
        S::call_field(self.0.as_ref(), &y)
    }
}

fn with_time(x: &[f64]) -> Vec<f64> {
    let mut y = Vec::with_capacity(x.len() + 1);
    y.push(0.0);
    y.extend_from_slice(x);
    y
}

fn stationary_data(product: &SpacetimeModel) -> Result<&StationaryData> {
    product.stationary.as_ref().ok_or_else(|| Error::NotStationary(product.name.clone()))
}

/// The Fermat metric of `product` as a model on the spatial coordinates,
/// with `L = F²`.
pub fn fermat_metric(product: &SpacetimeModel) -> Result<SpacetimeModel> {
    let data = stationary_data(product)?;
    let n = product.dim - 1;
    let l = FermatLagrangian { g_s: data.g_s.clone(), omega: data.omega.clone() };
    let pred = product.domain.predicate.clone();
    let mut domain = Domain::boxed(product.domain.lo[1..].to_vec(), product.domain.hi[1..].to_vec());
    if let Some(p) = pred {
        domain = domain.with_predicate(Arc::new(move |x: &[f64]| p(&with_time(x))));
    }
    let mut m = SpacetimeModel::new(&format!("fermat({})", product.name), n, Arc::new(l))
        .with_domain(domain)
        .with_params(product.params.clone())
        .with_tolerances(product.tol);
    m.scale = product.scale;
    if let Some(b) = &product.boundary {
        m = m.with_boundary(Arc::new(Slice(b.clone())));
    }
    if let Some(tr) = product.transition.clone() {
        m.transition = Some(Arc::new(move |x: &[f64], v: &[f64]| match tr(&with_time(x), &with_time(v)) {
            Transition::Mapped(y, w) => Transition::Mapped(y[1..].to_vec(), w[1..].to_vec()),
            other => other,
        }));
    }
    if let Some(g) = product.chord_guard.clone() {
        m.chord_guard = Some(Arc::new(move |a: &[f64], b: &[f64]| g(&with_time(a), &with_time(b))));
    }
    m.spatial_boundary = product.spatial_boundary.clone();
    m.interior_point = product.interior_point.clone();
    Ok(m)
}

/// `F(x, v)` on spatial coordinates.
pub fn fermat_norm(product: &SpacetimeModel, x: &[f64], v: &[f64]) -> Result<f64> {
    let d = stationary_data(product)?;
    let w = d.omega.eval_f64(x, v);
    Ok(w + (d.g_s.eval_f64(x, v) + w * w).sqrt())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FermatConvexityEntry {
    pub point: Vec<f64>,
    pub u: Vec<f64>,
    pub ii: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FermatConvexity {
    pub entries: Vec<FermatConvexityEntry>,
    pub min_ii: f64,
    pub verdict: Verdict,
}

/// Signs of the `F`-second fundamental form of `∂S` over `count` boundary
/// points and tangent directions `±u`.
pub fn fermat_boundary_verdict(product: &SpacetimeModel, count: usize, dirs: usize) -> Result<FermatConvexity> {
    let f = fermat_metric(product)?;
    let band = f.tol.dead_band;
    let mut entries = Vec::new();
    for bp in spatial_boundary_points(&f, count)? {
        let x = bp.point;
        let db = f.db(&x).ok_or(Error::NotOnBoundary(f64::NAN))?;
        let basis = complement_basis(f.dim, std::slice::from_ref(&db));
        for d in sphere_points(basis.len(), dirs.max(2)) {
            let mut u = vec![0.0; f.dim];
            for (c, e) in d.iter().zip(&basis) {
                u = linalg::axpy(&u, *c, e);
            }
            let ii = second_fundamental_form(&f, &x, &db, &u, &u).unwrap_or(f64::NAN);
            entries.push(FermatConvexityEntry { point: x.clone(), u, ii });
        }
    }
    let min_ii = entries.iter().map(|e| e.ii).fold(f64::INFINITY, f64::min);
    let verdict = if entries.is_empty() || entries.iter().any(|e| !e.ii.is_finite()) {
        Verdict::Indeterminate
    } else {
        Verdict::of(min_ii, band)
    };
    Ok(FermatConvexity { entries, min_ii, verdict })
}

/// A pair `(z1, z2)` for the convexity probe. `to` lists representatives of
/// `z2` in the chart; `class` asks for the minimiser of a homotopy class.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairSpec {
    pub from: Vec<f64>,
    pub to: Vec<Vec<f64>>,
    #[serde(default)]
    pub class: Option<usize>,
}

#[derive(Clone, Copy, Debug)]
pub struct ProbeOptions {
    /// Initial directions in the angular scan.
    pub directions: usize,
    /// Nodes per side of the reference grid.
    pub grid: usize,
    /// Relative slack between a shot length and the grid distance.
    pub gap_tol: f64,
    /// Largest accepted miss distance, relative to `scale`.
    pub hit_tol: f64,
    pub exec: Execution,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self { directions: 360, grid: 81, gap_tol: 0.03, hit_tol: 1e-7, exec: Execution::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairVerdict {
    MinimizerFound,
    Indeterminate,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairProbe {
    pub verdict: PairVerdict,
    pub minimizer_found: bool,
    /// `F`-length of the best connecting geodesic.
    pub length: Option<f64>,
    /// Lengths of every connecting geodesic found.
    pub connecting: Vec<f64>,
    /// Grid estimate of the distance, an upper bound up to edge sampling.
    pub reference: Option<f64>,
    /// `length − reference`.
    pub gap: Option<f64>,
    pub cut_point: bool,
    pub best_geodesic: Option<Vec<Sample>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl PairProbe {
    fn indeterminate(note: String) -> Self {
        Self {
            verdict: PairVerdict::Indeterminate,
            minimizer_found: false,
            length: None,
            connecting: Vec::new(),
            reference: None,
            gap: None,
            cut_point: false,
            best_geodesic: None,
            note: Some(note),
        }
    }
}

/// Closest approach of a curve to `target`: signed distance and parameter.
fn closest_approach(samples: &[Sample], target: &[f64]) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64, f64)> = None;
    for w in samples.windows(2) {
        if w[1].jump {
            continue;
        }
        let (a, b) = (&w[0].x, &w[1].x);
        let ab = linalg::sub(b, a);
        let l2 = linalg::dot(&ab, &ab);
        let s = if l2 > 0.0 { (linalg::dot(&linalg::sub(target, a), &ab) / l2).clamp(0.0, 1.0) } else { 0.0 };
        let c = linalg::axpy(a, s, &ab);
        let d = dist(&c, target);
        if best.as_ref().is_none_or(|(bd, _, _)| d < *bd) {
            let r = linalg::sub(target, &c);
            let side = ab[0] * r[1] - ab[1] * r[0];
            let t = w[0].t + s * (w[1].t - w[0].t);
            best = Some((d, if side >= 0.0 { 1.0 } else { -1.0 }, t));
        }
    }
    best.map(|(d, s, t)| (s * d, t))
}

struct Shot {
    miss: f64,
    length: f64,
    samples: Vec<Sample>,
}

fn shoot(f: &SpacetimeModel, from: &[f64], phi: f64, target: &[f64], budget: f64) -> Option<Shot> {
    let dir = [phi.cos(), phi.sin()];
    let speed = f.l(from, &dir).sqrt();
    if !(speed > 0.0) {
        return None;
    }
    let v = linalg::scale(&dir, 1.0 / speed);
    let opts = IntegrateOptions::new(budget).with_tol(1e-11);
    let sol = integrate_geodesic(f, from, &v, &opts).ok()?;
    let dense = sol.densify(8);
    let (miss, length) = closest_approach(&dense, target)?;
    Some(Shot { miss, length, samples: dense })
}

/// Refine every sign change of the signed miss over the angular scan.
fn connecting_geodesics(f: &SpacetimeModel, from: &[f64], target: &[f64], budget: f64, opts: &ProbeOptions) -> Vec<(f64, Shot)> {
    let n = opts.directions.max(8);
    let angles: Vec<f64> = (0..n).map(|i| 2.0 * std::f64::consts::PI * i as f64 / n as f64).collect();
    let scan: Vec<Option<f64>> = map_with(opts.exec, &angles, |_, phi| shoot(f, from, *phi, target, budget).map(|s| s.miss));
    let tol = opts.hit_tol * f.scale;
    let mut out = Vec::new();
    for i in 0..n {
        let j = (i + 1) % n;
        let (Some(ma), Some(mb)) = (scan[i], scan[j]) else { continue };
        if ma.signum() == mb.signum() {
            continue;
        }
        let (mut lo, mut hi) = (angles[i], if j == 0 { 2.0 * std::f64::consts::PI } else { angles[j] });
        let s_lo = ma.signum();
        let mut best: Option<(f64, Shot)> = None;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let Some(shot) = shoot(f, from, mid, target, budget) else { break };
            let m = shot.miss;
            if m.signum() == s_lo {
                lo = mid;
            } else {
                hi = mid;
            }
            let done = m.abs() <= tol;
            best = Some((mid, shot));
            if done {
                break;
            }
        }
        if let Some((phi, shot)) = best {
            if shot.miss.abs() <= tol {
                out.push((phi, shot));
            }
        }
    }
    out
}

#[derive(PartialEq)]
struct Node(f64, usize);
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

/// Dijkstra distance from `from` to the nearest of `targets` over a grid
/// with a 16-direction stencil; edges are straight chart segments in `S`.
pub fn grid_distance(f: &SpacetimeModel, from: &[f64], targets: &[Vec<f64>], nodes: usize) -> Option<f64> {
    let mut lo = from.to_vec();
    let mut hi = from.to_vec();
    for t in targets {
        for k in 0..2 {
            lo[k] = lo[k].min(t[k]);
            hi[k] = hi[k].max(t[k]);
        }
    }
    let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-3 * f.scale);
    for k in 0..2 {
        lo[k] = (lo[k] - 0.5 * extent).max(f.domain.lo[k]);
        hi[k] = (hi[k] + 0.5 * extent).min(f.domain.hi[k]);
    }
    let nodes = nodes.max(5);
    let h = [(hi[0] - lo[0]) / (nodes - 1) as f64, (hi[1] - lo[1]) / (nodes - 1) as f64];
    let inside = |x: &[f64]| f.inside(x, 0.0);
    let edge = |a: &[f64], b: &[f64]| -> Option<f64> {
        for s in [0.25, 0.5, 0.75, 1.0] {
            if !inside(&linalg::axpy(a, s, &linalg::sub(b, a))) {
                return None;
            }
        }
        let mid = linalg::scale(&linalg::add(a, b), 0.5);
        let d = linalg::sub(b, a);
        let l = f.l(&mid, &d);
        (l >= 0.0).then(|| l.sqrt())
    };
    let grid_pt = |i: usize| vec![lo[0] + (i % nodes) as f64 * h[0], lo[1] + (i / nodes) as f64 * h[1]];
    let total = nodes * nodes;
    // node `total` is the start; targets are absorbing
    let mut best = vec![f64::INFINITY; total + 1];
    let mut heap = BinaryHeap::new();
    best[total] = 0.0;
    heap.push(Node(0.0, total));
    let reach = 2.5 * h[0].max(h[1]);
    let mut answer = f64::INFINITY;
    let offsets: Vec<(i64, i64)> = (-2i64..=2)
        .flat_map(|a| (-2i64..=2).map(move |b| (a, b)))
        .filter(|&(a, b)| (a, b) != (0, 0) && gcd(a.unsigned_abs(), b.unsigned_abs()) == 1)
        .collect();
    while let Some(Node(d, u)) = heap.pop() {
        if d > best[u] || d >= answer {
            continue;
        }
        let p = if u == total { from.to_vec() } else { grid_pt(u) };
        for t in targets {
            if dist(&p, t) <= reach {
                if let Some(w) = edge(&p, t) {
                    answer = answer.min(d + w);
                }
            }
        }
        let mut relax = |v: usize, heap: &mut BinaryHeap<Node>| {
            let q = grid_pt(v);
            if let Some(w) = edge(&p, &q) {
                if d + w < best[v] {
                    best[v] = d + w;
                    heap.push(Node(d + w, v));
                }
            }
        };
        if u == total {
            for v in 0..total {
                if dist(&grid_pt(v), &p) <= reach {
                    relax(v, &mut heap);
                }
            }
        } else {
            let (ix, iy) = ((u % nodes) as i64, (u / nodes) as i64);
            for (a, b) in &offsets {
                let (jx, jy) = (ix + a, iy + b);
                if jx >= 0 && jy >= 0 && (jx as usize) < nodes && (jy as usize) < nodes {
                    relax(jy as usize * nodes + jx as usize, &mut heap);
                }
            }
        }
    }
    answer.is_finite().then_some(answer)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Shoot `F`-geodesics between each pair and compare with the sampled
/// distance. Only two-dimensional `S` is supported.
pub fn convexity_probe_s(product: &SpacetimeModel, pairs: &[PairSpec], opts: &ProbeOptions) -> Result<Vec<PairProbe>> {
    let f = fermat_metric(product)?;
    if f.dim != 2 {
        return Err(Error::Config(format!("convexity probe needs a two-dimensional S, got {}", f.dim)));
    }
    let mut out = Vec::with_capacity(pairs.len());
    for pair in pairs {
        if let Some(m) = pair.class {
            out.push(class_probe(product, m));
            continue;
        }
        out.push(probe_pair(&f, pair, opts));
    }
    Ok(out)
}

fn class_probe(product: &SpacetimeModel, m: usize) -> PairProbe {
    match crate::models::slit_plane::class_minimizer(product, m) {
        Ok(cm) => PairProbe {
            verdict: PairVerdict::MinimizerFound,
            minimizer_found: true,
            length: Some(cm.length),
            connecting: vec![cm.length],
            reference: None,
            gap: None,
            cut_point: false,
            best_geodesic: Some(cm.sigma),
            note: Some(format!("class {m} minimiser")),
        },
        Err(e) => PairProbe::indeterminate(e.to_string()),
    }
}

fn probe_pair(f: &SpacetimeModel, pair: &PairSpec, opts: &ProbeOptions) -> PairProbe {
    let reference = grid_distance(f, &pair.from, &pair.to, opts.grid);
    let euclid = pair.to.iter().map(|t| dist(&pair.from, t)).fold(f64::INFINITY, f64::min);
    let budget = reference.map_or(4.0 * euclid, |r| 1.5 * r);
    let mut found: Vec<(f64, Shot)> = Vec::new();
    for t in &pair.to {
        found.extend(connecting_geodesics(f, &pair.from, t, budget, opts));
    }
    if found.is_empty() {
        return PairProbe::indeterminate(Error::BudgetExhausted("no connecting geodesic within the scan".into()).to_string());
    }
    found.sort_by(|a, b| a.1.length.total_cmp(&b.1.length));
    let best = found[0].1.length;
    let cut_point = found.iter().skip(1).any(|(phi, s)| {
        (s.length - best).abs() <= 1e-6 && angle_gap(*phi, found[0].0) > 1e-4
    });
    let ok = reference.is_none_or(|r| best <= r * (1.0 + opts.gap_tol) + opts.hit_tol * f.scale);
    let connecting: Vec<f64> = found.iter().map(|(_, s)| s.length).collect();
    let best_samples = found.swap_remove(0).1.samples;
    let end = best_samples.partition_point(|s| s.t <= best);
    PairProbe {
        verdict: if ok { PairVerdict::MinimizerFound } else { PairVerdict::Indeterminate },
        minimizer_found: ok,
        length: Some(best),
        connecting,
        reference,
        gap: reference.map(|r| best - r),
        cut_point,
        best_geodesic: Some(best_samples[..end.max(1)].to_vec()),
        note: None,
    }
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * std::f64::consts::PI);
    d.min(2.0 * std::f64::consts::PI - d)
}

/// `F`-norm of a velocity along spatial samples, for lift checks.
pub fn fermat_speed(f: &SpacetimeModel, s: &Sample) -> f64 {
    f.l(&s.x, &s.v).max(0.0).sqrt()
}

/// The root `τ > 0` of `L((τ, v)) = 0` at `(0, x)`, by bisection.
pub fn lightlike_time_component(product: &SpacetimeModel, x: &[f64], v: &[f64]) -> Option<f64> {
    let mut p = vec![0.0];
    p.extend_from_slice(x);
    let l = |tau: f64| {
        let mut w = vec![tau];
        w.extend_from_slice(v);
        product.l(&p, &w)
    };
    let (mut lo, mut hi) = (0.0, norm(v).max(1e-12));
    while l(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return None;
        }
    }
    if l(lo) >= 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if l(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::stationary::{make_stationary, OneForm, StationaryParams};
    use crate::models::{cone_surface, minkowski};

    fn constant_wind(c: f64, region: minkowski::Region) -> SpacetimeModel {
        make_stationary(&StationaryParams { n_spatial: 2, omega: OneForm { constant: vec![c, 0.0], swirl: 0.0 }, region })
    }

    #[test]
    fn static_case_is_euclidean() {
        let m = minkowski::make_minkowski(2, minkowski::Region::Full);
        let x = [0.3, -0.2];
        for v in [[1.0, 0.0], [0.3, -0.4], [-2.0, 1.0]] {
            assert!((fermat_norm(&m, &x, &v).unwrap() - norm(&v)).abs() < 1e-14);
        }
    }

    #[test]
    fn wind_gives_non_reversible_norm() {
        let c = 0.4;
        let m = constant_wind(c, minkowski::Region::Full);
        let x = [0.1, 0.2];
        let f = fermat_norm(&m, &x, &[1.0, 0.0]).unwrap();
        assert!((f - (c + (1.0 + c * c).sqrt())).abs() < 1e-14);
        let root = lightlike_time_component(&m, &x, &[1.0, 0.0]).unwrap();
        assert!((f - root).abs() < 1e-12);
        let back = fermat_norm(&m, &x, &[-1.0, 0.0]).unwrap();
        assert!((f - back).abs() > 0.5);
    }

    #[test]
    fn non_stationary_model_is_rejected() {
        let m = crate::models::ads::make_ads(2, crate::models::ads::AdsRegion::Full);
        assert!(matches!(fermat_metric(&m), Err(Error::NotStationary(_))));
    }

    #[test]
    fn disk_is_fermat_convex_and_cassini_is_not() {
        let disk = constant_wind(0.2, minkowski::Region::Ball { radius: 1.0 });
        assert_eq!(fermat_boundary_verdict(&disk, 12, 2).unwrap().verdict, Verdict::Convex);
        let peanut = constant_wind(0.2, minkowski::Region::Cassini { a: 1.0, c: 1.1 });
        assert_eq!(fermat_boundary_verdict(&peanut, 24, 2).unwrap().verdict, Verdict::StrictlyConcave);
    }

    #[test]
    fn disk_chords_are_minimisers() {
        let m = minkowski::make_minkowski(2, minkowski::Region::Ball { radius: 1.0 });
        let pairs = vec![PairSpec { from: vec![-0.5, 0.1], to: vec![vec![0.4, -0.3]], class: None }];
        let r = convexity_probe_s(&m, &pairs, &ProbeOptions::default()).unwrap();
        assert!(r[0].minimizer_found, "{:?}", r[0].note);
        let chord = dist(&pairs[0].from, &pairs[0].to[0]);
        assert!((r[0].length.unwrap() - chord).abs() < 1e-6);
        assert!(!r[0].cut_point);
    }

    #[test]
    fn cone_has_a_cut_point_opposite() {
        let m = cone_surface::make_product_cone_surface();
        let r = 0.5;
        let c = r / 2f64.sqrt();
        let pairs = vec![PairSpec { from: vec![-r, 0.0], to: vec![vec![c, c], vec![c, -c]], class: None }];
        let out = convexity_probe_s(&m, &pairs, &ProbeOptions::default()).unwrap();
        let p = &out[0];
        assert!(p.minimizer_found && p.cut_point, "{p:?}");
        let expected = 2.0 * r * (3.0 * std::f64::consts::PI / 8.0).sin();
        assert!((p.length.unwrap() - expected).abs() < 1e-6);
    }
}
