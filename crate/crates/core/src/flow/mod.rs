//! Geodesic integration with boundary, level and chart events.

pub mod conformal;
pub mod export;
pub mod lift;
pub mod rk;

use serde::{Deserialize, Serialize};

use crate::connection::spray_coeffs;
use crate::error::{Error, Result};
use crate::geometry::{SpacetimeModel, Transition};
use crate::linalg::{dot, norm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    /// The stored curve is `s ↦ γ(−s)`.
    Backward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    BoundaryHit,
    DomainExit,
    ConeDomainExit,
    MaxSteps,
    ParameterEnd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Incidence {
    TransversalOutward,
    TransversalInward,
    Tangential,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    /// Set on the first sample after a chart transition.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub jump: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryHit {
    pub point: Vec<f64>,
    pub velocity: Vec<f64>,
    pub incidence: Incidence,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LevelEvent {
    pub coord: usize,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelCrossing {
    pub coord: usize,
    pub value: f64,
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeodesicSolution {
    pub samples: Vec<Sample>,
    pub termination: Termination,
    pub boundary_hit: Option<BoundaryHit>,
    pub lagrangian_drift: f64,
    pub direction: Direction,
    pub inextendible: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub level_crossings: Vec<LevelCrossing>,
}

impl GeodesicSolution {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("non-empty solution")
    }

    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    /// The same curve as a forward-parametrised solution (`t ↦ γ(t)`).
    pub fn forward_view(&self) -> Vec<Sample> {
        match self.direction {
            Direction::Forward => self.samples.clone(),
            Direction::Backward => self
                .samples
                .iter()
                .rev()
                .map(|s| Sample {
                    t: -s.t,
                    x: s.x.clone(),
                    v: s.v.iter().map(|c| -c).collect(),
                    jump: false,
                })
                .collect(),
        }
    }

    /// Cubic Hermite positions and linear velocities, `per_step` points per
    /// sample interval; chart jumps are not interpolated across.
    pub fn densify(&self, per_step: usize) -> Vec<Sample> {
        densify_samples(&self.samples, per_step)
    }
}

pub fn densify_samples(samples: &[Sample], per_step: usize) -> Vec<Sample> {
    let mut out = Vec::with_capacity(samples.len() * per_step.max(1));
    for w in samples.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        out.push(a.clone());
        if b.jump {
            continue;
        }
        let h = b.t - a.t;
        for k in 1..per_step {
            let th = k as f64 / per_step as f64;
            let h00 = 2.0 * th.powi(3) - 3.0 * th * th + 1.0;
            let h10 = th.powi(3) - 2.0 * th * th + th;
            let h01 = -2.0 * th.powi(3) + 3.0 * th * th;
            let h11 = th.powi(3) - th * th;
            let x = (0..a.x.len())
                .map(|i| h00 * a.x[i] + h10 * h * a.v[i] + h01 * b.x[i] + h11 * h * b.v[i])
                .collect();
            let v = (0..a.v.len()).map(|i| (1.0 - th) * a.v[i] + th * b.v[i]).collect();
            out.push(Sample { t: a.t + th * h, x, v, jump: false });
        }
    }
    if let Some(l) = samples.last() {
        out.push(l.clone());
    }
    out
}

#[derive(Clone, Debug)]
pub struct IntegrateOptions {
    pub t_max: f64,
    pub direction: Direction,
    pub stop_at_boundary: bool,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub max_steps: usize,
    pub h_max: Option<f64>,
    pub level_events: Vec<LevelEvent>,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            t_max: 10.0,
            direction: Direction::Forward,
            stop_at_boundary: true,
            rtol: None,
            atol: None,
            max_steps: 200_000,
            h_max: None,
            level_events: Vec::new(),
        }
    }
}

impl IntegrateOptions {
    pub fn new(t_max: f64) -> Self {
        Self { t_max, ..Default::default() }
    }

    pub fn backward(mut self) -> Self {
        self.direction = Direction::Backward;
        self
    }

    pub fn ambient(mut self) -> Self {
        self.stop_at_boundary = false;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.rtol = Some(tol);
        self.atol = Some(tol);
        self
    }

    pub fn with_h_max(mut self, h: f64) -> Self {
        self.h_max = Some(h);
        self
    }

    pub fn with_level(mut self, coord: usize, value: f64) -> Self {
        self.level_events.push(LevelEvent { coord, value });
        self
    }
}

struct System<'a> {
    model: &'a SpacetimeModel,
    n: usize,
    sign: f64,
}

impl System<'_> {
    fn rhs(&self, y: &[f64]) -> Option<Vec<f64>> {
        let (x, v) = y.split_at(self.n);
        let vel: Vec<f64> = v.iter().map(|c| self.sign * c).collect();
        let g = spray_coeffs(self.model, x, &vel).ok()?;
        let mut out = Vec::with_capacity(2 * self.n);
        out.extend_from_slice(v);
        out.extend(g.iter().map(|c| -c));
        if out.iter().all(|c| c.is_finite()) {
            Some(out)
        } else {
            None
        }
    }

    fn actual_velocity(&self, v: &[f64]) -> Vec<f64> {
        v.iter().map(|c| self.sign * c).collect()
    }
}

/// Incidence of a velocity at a boundary point.
pub fn classify_incidence(model: &SpacetimeModel, x: &[f64], v: &[f64]) -> Incidence {
    let db = model.db(x).unwrap_or_default();
    let s = dot(&db, v);
    let band = model.tol.dead_band * norm(v) * norm(&db);
    if s < -band {
        Incidence::TransversalOutward
    } else if s > band {
        Incidence::TransversalInward
    } else {
        Incidence::Tangential
    }
}

enum Stop {
    Boundary,
    Domain,
    Cone,
}

/// Integrate `ẍ^k + G^k(x, ẋ) = 0` from `(p0, v0)`.
pub fn integrate_geodesic(
    model: &SpacetimeModel,
    p0: &[f64],
    v0: &[f64],
    opts: &IntegrateOptions,
) -> Result<GeodesicSolution> {
    let n = model.dim;
    if p0.len() != n || v0.len() != n {
        return Err(Error::InvalidInitialData("dimension mismatch".into()));
    }
    if !(opts.t_max > 0.0) {
        return Err(Error::InvalidInitialData("t_max must be positive".into()));
    }
    if norm(v0) == 0.0 || !v0.iter().chain(p0).all(|c| c.is_finite()) {
        return Err(Error::InvalidInitialData("zero or non-finite initial data".into()));
    }
    if !model.domain.contains(p0) {
        return Err(Error::Domain(p0.to_vec()));
    }
    let sign = opts.direction.sign();
    let sys = System { model, n, sign };
    let rhs = |y: &[f64]| sys.rhs(y);
    let actual0: Vec<f64> = v0.iter().map(|c| sign * c).collect();
    if !model.admissible(p0, &actual0) {
        return Err(Error::ConeDomain(p0.to_vec()));
    }
    let l0 = model.l(p0, &actual0);
    let rtol = opts.rtol.unwrap_or(model.tol.ode);
    let atol = opts.atol.unwrap_or(model.tol.ode) * model.scale;
    let mut y: Vec<f64> = p0.iter().chain(v0).copied().collect();
    let mut k1 = rhs(&y).ok_or_else(|| Error::InvalidInitialData("spray not evaluable at the initial data".into()))?;
    let mut s = 0.0;
    let mut samples = vec![Sample { t: 0.0, x: p0.to_vec(), v: v0.to_vec(), jump: false }];
    let mut level_crossings = Vec::new();
    let b_of = |x: &[f64]| model.b(x);
    let finish = |samples: Vec<Sample>,
                      termination: Termination,
                      hit: Option<BoundaryHit>,
                      inextendible: bool,
                      level_crossings: Vec<LevelCrossing>| {
        let drift = samples
            .iter()
            .map(|smp| (model.l(&smp.x, &sys.actual_velocity(&smp.v)) - l0).abs())
            .fold(0.0, f64::max);
        GeodesicSolution {
            samples,
            termination,
            boundary_hit: hit,
            lagrangian_drift: drift,
            direction: opts.direction,
            inextendible,
            level_crossings,
        }
    };

    let mut tangential_start = false;
    if opts.stop_at_boundary {
        if let Some(b0) = b_of(p0) {
            if b0.abs() <= 1e-10 * model.scale {
                // the stored curve moves along v0 whatever the direction
                match classify_incidence(model, p0, v0) {
                    Incidence::TransversalOutward => {
                        let hit = BoundaryHit {
                            point: p0.to_vec(),
                            velocity: actual0.clone(),
                            incidence: classify_incidence(model, p0, &actual0),
                        };
                        return Ok(finish(samples, Termination::BoundaryHit, Some(hit), true, level_crossings));
                    }
                    Incidence::Tangential => tangential_start = true,
                    Incidence::TransversalInward => {}
                }
            } else if b0 < 0.0 {
                return Err(Error::InvalidInitialData(format!("initial point outside the manifold (b = {b0:e})")));
            }
        }
    }

    let speed = norm(v0).max(1e-300);
    let mut h = (0.01 * model.scale / speed).min(opts.t_max);
    if let Some(hm) = opts.h_max {
        h = h.min(hm);
    }
    let mut err_prev: f64 = 1.0;
    let mut steps = 0usize;
    loop {
        if steps >= opts.max_steps {
            return Ok(finish(samples, Termination::MaxSteps, None, false, level_crossings));
        }
        steps += 1;
        let remaining = opts.t_max - s;
        let mut hs = h.min(remaining);
        if let Some(hm) = opts.h_max {
            hs = hs.min(hm);
        }
        let hmin = 1e-13 * (1.0 + s.abs());
        let step = rk::dopri5(&rhs, &y, &k1, hs);
        let (y_new, k_new, err) = match step {
            Some(st) => {
                let e = rk::error_norm(&st.err, &y, &st.y, atol, rtol);
                (st.y, st.k7, e)
            }
            None => (Vec::new(), Vec::new(), f64::INFINITY),
        };
        let in_domain = !y_new.is_empty() && model.domain.contains(&y_new[..n]);
        if !err.is_finite() || err > 1.0 {
            if hs <= hmin {
                if !err.is_finite() {
                    // the right-hand side breaks down right at the chart edge
                    return Ok(finish(samples, Termination::DomainExit, None, true, level_crossings));
                }
                if norm(&y[..n]) > 1e6 * model.scale {
                    return Ok(finish(samples, Termination::DomainExit, None, true, level_crossings));
                }
                return Err(Error::Stiffness { t: s, h: hs });
            }
            let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.25 };
            h = (hs * fac).max(hmin);
            continue;
        }

        // accepted (or left the domain, which is localised below)
        let step_at = |theta: f64| -> Option<Vec<f64>> {
            if theta == 1.0 && !y_new.is_empty() {
                return Some(y_new.clone());
            }
            rk::dopri5(&rhs, &y, &k1, theta * hs).map(|st| st.y)
        };
        let mut stop: Option<(f64, Stop)> = None;
        let inside_domain = |yy: &Option<Vec<f64>>| yy.as_ref().is_some_and(|yy| model.domain.contains(&yy[..n]));
        if !in_domain {
            let th = bisect_bool(|th| inside_domain(&step_at(th)));
            stop = Some((th, Stop::Domain));
        }
        if in_domain {
            if let Some(th) = model.chord_guard.as_ref().and_then(|g| g(&y[..n], &y_new[..n])) {
                if stop.as_ref().is_none_or(|(t0, _)| th < *t0) {
                    stop = Some((th, Stop::Domain));
                }
            }
        }
        let cone_ok = |yy: &Option<Vec<f64>>| {
            yy.as_ref()
                .is_some_and(|yy| model.admissible(&yy[..n], &sys.actual_velocity(&yy[n..])))
        };
        if in_domain && model.cone_admissible.is_some() && !cone_ok(&Some(y_new.clone())) {
            let th = bisect_bool(|th| cone_ok(&step_at(th)));
            if stop.as_ref().is_none_or(|(t0, _)| th < *t0) {
                stop = Some((th, Stop::Cone));
            }
        }
        if opts.stop_at_boundary && in_domain {
            if let (Some(b_prev), Some(b_new)) = (b_of(&y[..n]), b_of(&y_new[..n])) {
                let crossing = (b_prev > 0.0 && b_new <= 0.0) || (tangential_start && b_new < 0.0);
                if crossing {
                    let th = if b_prev > 0.0 {
                        bisect_root(|th| step_at(th).and_then(|yy| b_of(&yy[..n])).unwrap_or(-1.0))
                    } else {
                        0.0
                    };
                    if stop.as_ref().is_none_or(|(t0, _)| th < *t0) {
                        stop = Some((th, Stop::Boundary));
                    }
                }
            }
        }
        tangential_start = false;
        let th_end = stop.as_ref().map_or(1.0, |(t0, _)| *t0);
        if !y_new.is_empty() {
            for ev in &opts.level_events {
                let f0 = y[ev.coord] - ev.value;
                let f1 = y_new[ev.coord] - ev.value;
                if f0 != 0.0 && f0.signum() != f1.signum() {
                    let th = bisect_root(|th| step_at(th).map_or(f64::NAN, |yy| yy[ev.coord] - ev.value) * f0.signum());
                    if th <= th_end {
                        if let Some(yy) = step_at(th) {
                            level_crossings.push(LevelCrossing {
                                coord: ev.coord,
                                value: ev.value,
                                t: s + th * hs,
                                x: yy[..n].to_vec(),
                                v: yy[n..].to_vec(),
                            });
                        }
                    }
                }
            }
        }

        match stop {
            None => {
                s += hs;
                y = y_new;
                k1 = k_new;
                samples.push(Sample { t: s, x: y[..n].to_vec(), v: y[n..].to_vec(), jump: false });
                if s >= opts.t_max * (1.0 - 1e-15) {
                    return Ok(finish(samples, Termination::ParameterEnd, None, false, level_crossings));
                }
                let fac = (0.9 * err.max(1e-10).powf(-0.7 / 5.0) * err_prev.max(1e-10).powf(0.4 / 5.0)).clamp(0.2, 5.0);
                err_prev = err.max(1e-4);
                h = hs * fac;
            }
            Some((th, Stop::Boundary)) => {
                let yy = if th == 0.0 { y.clone() } else { step_at(th).unwrap_or_else(|| y.clone()) };
                let (x, v) = yy.split_at(n);
                let vel = sys.actual_velocity(v);
                let incidence = classify_incidence(model, x, &vel);
                if th > 0.0 {
                    samples.push(Sample { t: s + th * hs, x: x.to_vec(), v: v.to_vec(), jump: false });
                }
                let hit = BoundaryHit { point: x.to_vec(), velocity: vel, incidence };
                return Ok(finish(samples, Termination::BoundaryHit, Some(hit), true, level_crossings));
            }
            Some((th, Stop::Cone)) => {
                if let Some(yy) = step_at(th) {
                    samples.push(Sample { t: s + th * hs, x: yy[..n].to_vec(), v: yy[n..].to_vec(), jump: false });
                }
                return Ok(finish(samples, Termination::ConeDomainExit, None, false, level_crossings));
            }
            Some((th, Stop::Domain)) => {
                // th is the last parameter known to be inside
                let inside = step_at(th).unwrap_or_else(|| y.clone());
                let th_out = (th + 1e-12).min(1.0);
                let outside = step_at(th_out);
                if th > 0.0 {
                    samples.push(Sample { t: s + th * hs, x: inside[..n].to_vec(), v: inside[n..].to_vec(), jump: false });
                }
                let mapped = match (&model.transition, &outside) {
                    (Some(tr), Some(out)) => tr(&out[..n], &sys.actual_velocity(&out[n..])),
                    _ => Transition::Exit,
                };
                match mapped {
                    Transition::Mapped(x2, v2) if model.domain.contains(&x2) => {
                        s += th_out * hs;
                        let v2s: Vec<f64> = v2.iter().map(|c| sign * c).collect();
                        y = x2.iter().chain(&v2s).copied().collect();
                        k1 = rhs(&y).ok_or_else(|| Error::ChartLeak(x2.clone()))?;
                        samples.push(Sample { t: s, x: x2, v: v2s, jump: true });
                        h = hs;
                    }
                    Transition::Mapped(x2, _) => return Err(Error::ChartLeak(x2)),
                    Transition::Leak => return Err(Error::ChartLeak(inside[..n].to_vec())),
                    Transition::Exit => {
                        let blowup = norm(&inside[..n]) > 1e5 * model.scale;
                        return Ok(finish(samples, Termination::DomainExit, None, blowup, level_crossings));
                    }
                }
            }
        }
    }
}

/// Largest `θ ∈ [0, 1]` with `inside(θ)` true, assuming `inside(0)`.
fn bisect_bool(inside: impl Fn(f64) -> bool) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Root of `f` on `[0, 1]` with `f(0) > 0 >= f(1)`, returning the first
/// parameter where `f <= 0`.
fn bisect_root(f: impl Fn(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let v = f(mid);
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // the side with the smaller residual
    if f(lo).abs() < f(hi).abs() {
        lo
    } else {
        hi
    }
}

/// Forward and backward integration merged into one forward-parametrised curve.
pub fn integrate_both_ways(
    model: &SpacetimeModel,
    p0: &[f64],
    v0: &[f64],
    opts: &IntegrateOptions,
) -> Result<(GeodesicSolution, GeodesicSolution, Vec<Sample>)> {
    let mut fo = opts.clone();
    fo.direction = Direction::Forward;
    let fwd = integrate_geodesic(model, p0, v0, &fo)?;
    let mut bo = opts.clone();
    bo.direction = Direction::Backward;
    let bwd = integrate_geodesic(model, p0, &v0.iter().map(|c| -c).collect::<Vec<_>>(), &bo)?;
    let mut merged = bwd.forward_view();
    // jumps of the reversed curve sit on the sample before the transition
    let jumps: Vec<bool> = bwd.samples.iter().rev().map(|s| s.jump).collect();
    for i in (1..merged.len()).rev() {
        merged[i].jump = jumps[i - 1];
    }
    merged.pop();
    merged.extend(fwd.samples.iter().cloned());
    Ok((fwd, bwd, merged))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ads, minkowski, strip};

    #[test]
    fn minkowski_line() {
        let m = minkowski::make_minkowski(1, minkowski::Region::Full);
        let sol = integrate_geodesic(&m, &[0.0, 0.0], &[1.0, 1.0], &IntegrateOptions::new(3.0)).unwrap();
        assert_eq!(sol.termination, Termination::ParameterEnd);
        assert!(sol.lagrangian_drift <= 1e-12);
        let last = sol.last();
        assert!((last.x[0] - 3.0).abs() < 1e-12 && (last.x[1] - 3.0).abs() < 1e-12);
        assert!(sol.samples.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn strip_boundary_hit() {
        let m = strip::make_cylinder_strip((-10.0, 10.0));
        let sol = integrate_geodesic(&m, &[0.0, 0.0], &[1.0, 1.0], &IntegrateOptions::new(5.0)).unwrap();
        assert_eq!(sol.termination, Termination::BoundaryHit);
        let hit = sol.boundary_hit.unwrap();
        assert_eq!(hit.incidence, Incidence::TransversalOutward);
        assert!((hit.point[0] - 1.0).abs() < 1e-10 && (hit.point[1] - 1.0).abs() < 1e-10);
        assert!(m.b(&hit.point).unwrap().abs() <= 1e-10);
    }

    #[test]
    fn ads_radial_null_time_delay() {
        let m = ads::make_ads(2, ads::AdsRegion::Full);
        let r0 = 1.5;
        let v0 = [1.0, 1.0 + r0 * r0, 0.0];
        let opts = IntegrateOptions::new(1e9).with_level(1, 2.0).with_level(1, 10.0);
        let sol = integrate_geodesic(&m, &[0.0, r0, 0.0], &v0, &opts).unwrap();
        let c = &sol.level_crossings;
        assert_eq!(c.len(), 2);
        let dt = c[1].x[0] - c[0].x[0];
        assert!((dt - (10f64.atan() - 2f64.atan())).abs() < 1e-6, "{dt}");
        assert!(sol.lagrangian_drift <= 1e-8);
    }

    #[test]
    fn reversal_returns_to_start() {
        let m = ads::make_ads(2, ads::AdsRegion::Full);
        let p0 = [0.0, 1.0, 0.2];
        let v0 = [1.0, 0.3, 0.5];
        let fwd = integrate_geodesic(&m, &p0, &v0, &IntegrateOptions::new(2.0)).unwrap();
        let end = fwd.last();
        let rev = integrate_geodesic(
            &m,
            &end.x,
            &end.v.iter().map(|c| -c).collect::<Vec<_>>(),
            &IntegrateOptions::new(end.t).backward(),
        )
        .unwrap();
        assert!(crate::linalg::dist(&rev.last().x, &p0) < 1e-7);
    }
}
