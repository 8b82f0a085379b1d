//! `L × S` with `S = ((−∞, 1) × R) \ ∪ V_k`, vertical slits `V_k` made
//! complete by a conformal factor supported in rectangles `R_k ⊃ V_k`.
//!
//! The factor is `1` outside thin tubes around the slits and small lenses
//! at the slit tips. The tube term blows up like the inverse squared
//! distance to the slit; the lenses bend curves around the tips.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dual::Scalar;
use crate::error::{Error, Result};
use crate::field::SmoothTangentFn;
use crate::flow::lift::lift_product_geodesic;
use crate::flow::{integrate_geodesic, Direction, GeodesicSolution, IntegrateOptions, Sample, Termination};
use crate::geometry::{Domain, SpacetimeModel, StationaryData};
use crate::lightspace::fermat::fermat_metric;

/// Beyond this many slits the tip gaps fall below a few thousand ulps of 1.
pub const MAX_SLITS: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slit {
    /// Abscissa `x_k` of the slit.
    pub x: f64,
    /// Slit half-length `1 − 2^{−k}`.
    pub half: f64,
    /// Gap `2^{−(k+1)}` between a slit tip and the rectangle edge.
    pub gap: f64,
    /// Rectangle half-width `1/(3k(k+1))`.
    pub half_width: f64,
    /// Radius of the lens around each tip.
    pub lens_radius: f64,
    /// Width of the tube around the slit that carries the completing term.
    pub tube: f64,
    /// Strength `c_k` of the completing term.
    pub strength: f64,
}

/// Height of the tip lenses.
pub const LENS_HEIGHT: f64 = 8.0;

impl Slit {
    pub fn new(k: usize, kappa: f64) -> Self {
        let kf = k as f64;
        let gap = 0.5f64.powi(k as i32 + 1);
        let half_width = 1.0 / (3.0 * kf * (kf + 1.0));
        let lens_radius = 0.9 * gap.min(half_width);
        let tube = lens_radius / 8.0;
        Self {
            x: 1.0 - 1.0 / kf,
            half: 1.0 - 2.0 * gap,
            gap,
            half_width,
            lens_radius,
            tube,
            strength: kappa * tube * tube,
        }
    }

    /// Rectangle `[a_k, b_k] × [c_k, d_k]`.
    pub fn rectangle(&self) -> [f64; 4] {
        let h = self.half + self.gap;
        [self.x - self.half_width, self.x + self.half_width, -h, h]
    }

    fn tube_cutoff<S: Scalar>(&self, x: S, y: S) -> Option<S> {
        let sx = (x - self.x).abs() / self.tube;
        let sy = (y.abs() - self.half) / self.tube;
        if sx.re() >= 0.75 || sy.re() >= 0.75 {
            return None;
        }
        Some(smooth_step(sx) * smooth_step(sy))
    }

    fn lens<S: Scalar>(&self, x: S, y: S) -> Option<S> {
        let dx = x - self.x;
        let dy = y.abs() - self.half;
        let s = (dx * dx + dy * dy) / (self.lens_radius * self.lens_radius);
        if s.re() >= 0.75 {
            return None;
        }
        Some(smooth_step(s) * LENS_HEIGHT)
    }

    /// `∫_{−h}^{h} dη / ((x − x_k)² + (y − η)²)`, which grows like the inverse
    /// distance to the slit.
    fn potential<S: Scalar>(&self, x: S, y: S) -> S {
        let a = (x - self.x).abs();
        let h = self.half;
        let q = y.abs() - h;
        if q.re() > 0.0 && a.re() < q.re() {
            over_atan(a, q) - over_atan(a, y.abs() + h)
        } else {
            (((S::cst(h) - y) / a).atan() + ((y + h) / a).atan()) / a
        }
    }

    /// Contribution of slit `k` to the conformal factor: the tip lenses and
    /// `c_k ψ_k P_k²` on the tube.
    pub fn bump<S: Scalar>(&self, x: S, y: S) -> Option<S> {
        let tube = self.tube_cutoff(x, y).map(|psi| {
            let p = self.potential(x, y);
            psi * p * p * self.strength
        });
        match (tube, self.lens(x, y)) {
            (Some(a), Some(b)) => Some(a + b),
            (a, b) => a.or(b),
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x == self.x && y.abs() <= self.half
    }
}

/// `atan(a/q)/a`, smooth in `a` near zero.
fn over_atan<S: Scalar>(a: S, q: S) -> S {
    let t = a / q;
    if t.re().abs() < 1e-4 {
        let t2 = t * t;
        (S::cst(1.0) - t2 / 3.0 + t2 * t2 / 5.0) / q
    } else {
        t.atan() / a
    }
}

/// Smooth step equal to 1 on `(−∞, 1/4]` and 0 on `[3/4, ∞)`.
fn smooth_step<S: Scalar>(s: S) -> S {
    let u = (s - 0.25) * 2.0;
    if u.re() <= 0.0 {
        return S::cst(1.0);
    }
    if u.re() >= 1.0 {
        return S::cst(0.0);
    }
    let f = |w: S| (S::cst(-1.0) / w).exp();
    let (a, b) = (f(S::cst(1.0) - u), f(u));
    a / (a + b)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlitPlane {
    pub slits: Vec<Slit>,
}

impl SlitPlane {
    pub fn new(k_max: usize, kappa: f64) -> Result<Self> {
        if k_max == 0 || k_max > MAX_SLITS {
            return Err(Error::Config(format!("number of slits must be in 1..={MAX_SLITS}, got {k_max}")));
        }
        Ok(Self { slits: (1..=k_max).map(|k| Slit::new(k, kappa)).collect() })
    }

    /// Conformal factor `φ = 1 + Σ_k (c_k ψ_k P_k² + lenses)`.
    pub fn factor<S: Scalar>(&self, x: S, y: S) -> S {
        let mut phi = S::cst(1.0);
        for s in &self.slits {
            if let Some(b) = s.bump(x, y) {
                phi += b;
            }
        }
        phi
    }

    pub fn on_slit(&self, x: f64, y: f64) -> bool {
        self.slits.iter().any(|s| s.contains(x, y))
    }

    /// For a chord `a → b` in the plane that meets a slit, the first fraction
    /// at which it enters that slit's tube.
    pub fn chord_hit(&self, a: [f64; 2], b: [f64; 2]) -> Option<f64> {
        self.slits
            .iter()
            .filter_map(|s| {
                let (da, db) = (a[0] - s.x, b[0] - s.x);
                if da * db > 0.0 || da == db {
                    return None;
                }
                let th = da / (da - db);
                let y = a[1] + th * (b[1] - a[1]);
                let enter = ((da.abs() - s.tube) / (da - db).abs()).max(0.0);
                (y.abs() <= s.half).then_some(enter)
            })
            .min_by(f64::total_cmp)
    }

    /// `l_m = (b_m + a_{m+1})/2`.
    pub fn l(&self, m: usize) -> f64 {
        let s = Slit::new(m, 1.0).rectangle();
        let t = Slit::new(m + 1, 1.0).rectangle();
        0.5 * (s[1] + t[0])
    }
}

/// `φ |u|²` on spatial vectors.
pub struct SlitMetric(pub Arc<SlitPlane>);

impl SmoothTangentFn for SlitMetric {
    fn eval<S: Scalar>(&self, x: &[S], u: &[S]) -> S {
        self.0.factor(x[0], x[1]) * (u[0] * u[0] + u[1] * u[1])
    }
}

struct ProductLagrangian(Arc<SlitPlane>);

impl SmoothTangentFn for ProductLagrangian {
    fn eval<S: Scalar>(&self, x: &[S], v: &[S]) -> S {
        v[0] * v[0] - self.0.factor(x[1], x[2]) * (v[1] * v[1] + v[2] * v[2])
    }
}

/// Default strength factor of the conformal bumps.
pub const DEFAULT_KAPPA: f64 = 1.0;

pub fn make_product_slit_plane(k_max: usize) -> Result<SpacetimeModel> {
    make_product_slit_plane_with(k_max, DEFAULT_KAPPA)
}

pub fn make_product_slit_plane_with(k_max: usize, kappa: f64) -> Result<SpacetimeModel> {
    let plane = Arc::new(SlitPlane::new(k_max, kappa)?);
    let p2 = plane.clone();
    let domain = Domain::boxed(vec![-1e12, -1e12, -1e12], vec![1e12, 1.0, 1e12])
        .with_predicate(Arc::new(move |x: &[f64]| !p2.on_slit(x[1], x[2])));
    let mut m = SpacetimeModel::new("product_slit_plane", 3, Arc::new(ProductLagrangian(plane.clone())))
        .with_time_orientation()
        .with_params(serde_json::json!({ "K": k_max, "kappa": kappa }))
        .with_domain(domain)
        .product();
    let p3 = plane.clone();
    m.chord_guard = Some(Arc::new(move |a: &[f64], b: &[f64]| p3.chord_hit([a[1], a[2]], [b[1], b[2]])));
    m.stationary = Some(StationaryData {
        g_s: Arc::new(SlitMetric(plane)),
        omega: Arc::new(super::stationary::ZeroForm),
    });
    Ok(m)
}

/// The minimiser `σ_m` of the class of curves from `(0, −1)` to `(0, 1)`
/// that cross `y = 0` between the slits `m` and `m + 1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassMinimizer {
    pub m: usize,
    /// Abscissa where `σ_m` crosses `y = 0`.
    pub x0: f64,
    /// `T_m`, the length of `σ_m`.
    pub length: f64,
    /// `σ_m` with unit speed, from near `(0, −1)` to near `(0, 1)`.
    pub sigma: Vec<Sample>,
}

/// Parameters `(K, κ)` recorded on a slit-plane model.
pub fn plane_of(product: &SpacetimeModel) -> Result<SlitPlane> {
    let k = product.params.get("K").and_then(|v| v.as_u64());
    let kappa = product.params.get("kappa").and_then(|v| v.as_f64());
    match (k, kappa) {
        (Some(k), Some(kappa)) if product.name == "product_slit_plane" => SlitPlane::new(k as usize, kappa),
        _ => Err(Error::Config(format!("model {} is not a slit plane", product.name))),
    }
}

pub enum Half {
    /// Crossed `x = 0` at this height after this length.
    Crossed { y: f64, samples: Vec<Sample> },
    Above,
    Below,
}

/// The upper half of the symmetric candidate through `(x0, 0)`. Between
/// `y = 0` and the lens of slit `m` the curve is a vertical segment, so the
/// integration starts below the lens.
pub fn upper_half(f: &SpacetimeModel, slit: &Slit, x0: f64, budget: f64, lens_step: f64) -> Half {
    let y0 = slit.half - slit.lens_radius;
    let speed = f.l(&[x0, y0], &[0.0, 1.0]).sqrt();
    let mut samples = vec![Sample { t: 0.0, x: vec![x0, 0.0], v: vec![0.0, 1.0 / speed], jump: false }];
    let mut x = vec![x0, y0];
    let mut v = vec![0.0, 1.0 / speed];
    let mut t = y0;
    let stages = [(lens_step * slit.lens_radius, 16.0 * slit.lens_radius), (0.02, budget)];
    for (h_max, span) in stages {
        let mut opts = IntegrateOptions::new(span.min(budget - t)).with_tol(1e-12).with_level(0, 0.0);
        opts.h_max = Some(h_max);
        let Ok(sol) = integrate_geodesic(f, &x, &v, &opts) else {
            return Half::Below;
        };
        if let Some(c) = sol.level_crossings.first() {
            samples.extend(sol.samples.iter().take_while(|s| s.t < c.t).map(|s| Sample { t: t + s.t, ..s.clone() }));
            samples.push(Sample { t: t + c.t, x: c.x.clone(), v: c.v.clone(), jump: false });
            samples.dedup_by(|b, a| a.t == b.t);
            return Half::Crossed { y: c.x[1], samples };
        }
        samples.extend(sol.samples.iter().map(|s| Sample { t: t + s.t, ..s.clone() }));
        samples.dedup_by(|b, a| a.t == b.t);
        let last = sol.last();
        if !matches!(sol.termination, Termination::ParameterEnd) {
            return Half::Below;
        }
        t += last.t;
        x = last.x.clone();
        v = last.v.clone();
    }
    if x[1] > 1.0 {
        Half::Above
    } else {
        Half::Below
    }
}

/// Largest accepted miss of `z+` by a shot curve.
pub const CLOSURE_TOL: f64 = 1e-4;

/// Symmetric shooting for `σ_m`: start at `(x0, 0)` straight up and bisect
/// `x0 − x_m` on a log scale until the curve crosses `x = 0` at height 1.
pub fn class_minimizer(product: &SpacetimeModel, m: usize) -> Result<ClassMinimizer> {
    let plane = plane_of(product)?;
    if m == 0 || m >= plane.slits.len() {
        return Err(Error::Config(format!("class {m} needs slits {m} and {} (K = {})", m + 1, plane.slits.len())));
    }
    let f = fermat_metric(product)?;
    let slit = plane.slits[m - 1];
    let xm = slit.x;
    let budget = 3.0;
    let score = |d: f64| match upper_half(&f, &slit, xm + d, budget, 0.125) {
        Half::Crossed { y, .. } => y - 1.0,
        Half::Above => f64::INFINITY,
        Half::Below => f64::NEG_INFINITY,
    };
    // Scan down from the flat side of the lens for sign changes between
    // crossing curves and bisect each until one closes at `z+`.
    let (first, last) = (0.76 * slit.tube, 0.9 * slit.lens_radius);
    let grid: Vec<(f64, f64)> =
        (0..=128).map(|i| last - (last - first) * i as f64 / 128.0).map(|d| (d, score(d))).collect();
    let brackets = grid
        .windows(2)
        .filter(|w| w[1].1 <= 0.0 && w[0].1 > 0.0 && (w[0].1.is_finite() || w[1].1.is_finite()))
        .map(|w| (w[1].0, w[0].0));
    let mut miss = f64::INFINITY;
    for (mut lo, mut hi) in brackets {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if score(mid) <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        for d in [lo, hi] {
            let Half::Crossed { y, samples } = upper_half(&f, &slit, xm + d, budget, 0.125) else {
                continue;
            };
            miss = miss.min((y - 1.0).abs());
            if (y - 1.0).abs() <= CLOSURE_TOL {
                return Ok(symmetric(m, xm + d, &samples));
            }
        }
    }
    Err(Error::BudgetExhausted(format!("class {m} shooting missed z+ by {miss:e}")))
}

fn symmetric(m: usize, x0: f64, samples: &[Sample]) -> ClassMinimizer {
    let half = samples.last().map_or(0.0, |s| s.t);
    let mut sigma: Vec<Sample> = samples
        .iter()
        .rev()
        .map(|s| Sample { t: half - s.t, x: vec![s.x[0], -s.x[1]], v: vec![-s.v[0], s.v[1]], jump: false })
        .collect();
    sigma.pop();
    sigma.extend(samples.iter().map(|s| Sample { t: half + s.t, ..s.clone() }));
    ClassMinimizer { m, x0, length: 2.0 * half, sigma }
}

/// `T_∞`, the limit of the class lengths `T_m`.
pub const T_INFINITY: f64 = 4.0;

impl ClassMinimizer {
    /// `σ_m` continued by straight segments of length `reach` beyond both
    /// ends, where the plane is flat.
    pub fn extended(&self, reach: f64) -> GeodesicSolution {
        let steps = 32;
        let (first, last) = (&self.sigma[0], &self.sigma[self.sigma.len() - 1]);
        let ray = |s: &Sample, dt: f64, t: f64| Sample {
            t,
            x: s.x.iter().zip(&s.v).map(|(x, v)| x + dt * v).collect(),
            v: s.v.clone(),
            jump: false,
        };
        let mut samples: Vec<Sample> =
            (0..steps).map(|i| reach * (i as f64 / steps as f64 - 1.0)).map(|dt| ray(first, dt, dt)).collect();
        samples.extend(self.sigma.iter().cloned());
        samples.extend((1..=steps).map(|i| reach * i as f64 / steps as f64).map(|dt| ray(last, dt, last.t + dt)));
        GeodesicSolution {
            samples,
            termination: Termination::ParameterEnd,
            boundary_hit: None,
            lagrangian_drift: 0.0,
            direction: Direction::Forward,
            inextendible: false,
            level_crossings: Vec::new(),
        }
    }
}

/// Lightlike lift of the extended `σ_m`, at height `0` over `z− = (0, −1)`.
pub fn class_lift(product: &SpacetimeModel, m: usize, reach: f64) -> Result<GeodesicSolution> {
    let sigma = class_minimizer(product, m)?.extended(reach);
    lift_product_geodesic(product, &sigma, -reach)
}

/// Lifts of `σ−` at height `0` and of `σ+` at height `T_∞`, as initial data.
pub fn limit_candidates() -> [(Vec<f64>, Vec<f64>); 2] {
    [(vec![0.0, 0.0, -1.0], vec![1.0, 1.0, 0.0]), (vec![T_INFINITY, 0.0, 1.0], vec![1.0, -1.0, 0.0])]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slits_sit_inside_their_rectangles() {
        let p = SlitPlane::new(12, 1.0).unwrap();
        for (i, s) in p.slits.iter().enumerate() {
            let r = s.rectangle();
            assert!(r[0] < s.x && s.x < r[1]);
            assert!(r[2] < -s.half && s.half < r[3]);
            if let Some(t) = p.slits.get(i + 1) {
                assert!(r[1] < t.rectangle()[0]);
            }
        }
        assert!(SlitPlane::new(MAX_SLITS + 1, 1.0).is_err());
    }

    #[test]
    fn flat_outside_rectangles_and_on_the_rays() {
        let p = SlitPlane::new(10, 1.0).unwrap();
        for x in [0.0, 0.3, 0.5, 0.9, 0.99] {
            assert_eq!(p.factor(x, 1.0), 1.0);
            assert_eq!(p.factor(x, -1.0), 1.0);
        }
        assert_eq!(p.factor(0.2, 0.0), 1.0);
    }

    #[test]
    fn potential_branches_agree_and_blow_up() {
        let s = Slit::new(3, 1.0);
        let y = s.half + 0.3 * s.gap;
        for a in [1e-3 * s.gap, 0.5 * s.gap] {
            let q = y - s.half;
            let one = over_atan(a, q) - over_atan(a, y + s.half);
            let two = (((s.half - y) / a).atan() + ((y + s.half) / a).atan()) / a;
            assert!((one - two).abs() < 1e-9 * one.abs(), "{one} {two}");
        }
        let near = s.bump(s.x + 1e-9, 0.0).unwrap();
        assert!(near > 1e3);
    }

    #[test]
    fn chords_through_a_slit_are_caught() {
        let p = SlitPlane::new(4, 1.0).unwrap();
        let (x, tube) = (p.slits[1].x, p.slits[1].tube);
        let th = p.chord_hit([x - 0.1, 0.0], [x + 0.3, 0.0]).unwrap();
        assert!((th - (0.1 - tube) / 0.4).abs() < 1e-12);
        assert_eq!(p.chord_hit([x - 0.1 * tube, 0.0], [x + 0.3, 0.0]), Some(0.0));
        assert!(p.chord_hit([x - 0.1, 0.99], [x + 0.1, 0.99]).is_none());
        assert!(p.chord_hit([0.1, 0.0], [0.2, 0.0]).is_none());
    }

    #[test]
    fn class_minimizers_grow_towards_four() {
        let m = make_product_slit_plane(6).unwrap();
        let mut prev = 1.0;
        for k in 2..=5 {
            let c = class_minimizer(&m, k).unwrap();
            let l = c.sigma.last().unwrap();
            assert!(l.x[0].abs() < 1e-12 && (l.x[1] - 1.0).abs() <= CLOSURE_TOL);
            assert!((c.sigma[0].x[1] + l.x[1]).abs() < 1e-12);
            assert!(prev < c.length && c.length < T_INFINITY, "{k}: {}", c.length);
            let lower = 2.0 * (1.0 + c.x0 * c.x0).sqrt();
            assert!(c.length > lower);
            prev = c.length;
        }
        assert!(class_minimizer(&m, 6).is_err());
    }

    #[test]
    fn lift_is_lightlike_and_starts_over_z_minus() {
        let m = make_product_slit_plane(6).unwrap();
        let lift = class_lift(&m, 3, 0.5).unwrap();
        let at = lift.samples.iter().min_by(|a, b| a.x[1].abs().total_cmp(&b.x[1].abs())).unwrap();
        assert!(at.x[0].abs() < 1e-9 && (at.x[2] + 1.0).abs() < 1e-4);
        for s in &lift.samples {
            assert!(m.l(&s.x, &s.v).abs() < 1e-8 * s.v[0] * s.v[0]);
        }
    }
}
