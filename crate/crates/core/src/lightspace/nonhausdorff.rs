//! Families of cone geodesics converging to two distinct limits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::conformal::point_to_segment;
use crate::flow::{densify_samples, integrate_both_ways, IntegrateOptions, Sample};
use crate::geometry::SpacetimeModel;
use crate::linalg;
use crate::parallel::{map_with, Execution};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub point: Vec<f64>,
    pub velocity: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemberSource {
    Initial(InitialData),
    /// A curve computed elsewhere, e.g. a lift of a shooting solution.
    Trajectory(Vec<Sample>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyMember {
    /// The family parameter `ε_k`.
    pub param: f64,
    pub source: MemberSource,
}

/// Points with `lo <= x[coord] <= hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub coord: usize,
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    fn contains(&self, x: &[f64]) -> bool {
        (self.lo..=self.hi).contains(&x[self.coord])
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Candidate {
    pub data: InitialData,
    pub window: Window,
}

#[derive(Clone, Copy, Debug)]
pub struct DetectOptions {
    pub horizon: f64,
    pub threshold: f64,
    /// Required ratio of the separation to the threshold.
    pub separation_factor: f64,
    pub densify: usize,
    pub exec: Execution,
}

impl Default for DetectOptions {
    fn default() -> Self {
        Self { horizon: 10.0, threshold: 1e-4, separation_factor: 10.0, densify: 8, exec: Execution::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub param: f64,
    pub d_a: f64,
    pub d_b: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NonHausdorffCertificate {
    pub model: String,
    pub params: Vec<f64>,
    pub family: Vec<Vec<Sample>>,
    pub limit_a: Vec<Sample>,
    pub limit_b: Vec<Sample>,
    pub windows: [Window; 2],
    pub evidence: Vec<Evidence>,
    pub separation: f64,
    pub threshold: f64,
    pub densify: usize,
}

/// Distances computed for a family, with or without a certificate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Assessment {
    pub evidence: Vec<Evidence>,
    pub separation: f64,
    pub certificate: Option<NonHausdorffCertificate>,
}

/// `(x, v/Ω(v))`, or `v/|v|` without an orientation.
fn phase(model: &SpacetimeModel, s: &Sample) -> Vec<f64> {
    let o = model.omega(&s.x, &s.v).filter(|o| *o > 0.0).unwrap_or_else(|| linalg::norm(&s.v));
    let mut z = s.x.clone();
    z.extend(s.v.iter().map(|c| c / o));
    z
}

struct Curve {
    points: Vec<Vec<f64>>,
    /// `breaks[i]` is true when the segment ending at point `i` crosses a jump.
    breaks: Vec<bool>,
}

fn curve(model: &SpacetimeModel, samples: &[Sample], per_step: usize) -> Curve {
    let dense = densify_samples(samples, per_step);
    Curve { points: dense.iter().map(|s| phase(model, s)).collect(), breaks: dense.iter().map(|s| s.jump).collect() }
}

fn to_curve(c: &Curve, p: &[f64]) -> f64 {
    if c.points.len() == 1 {
        return linalg::dist(p, &c.points[0]);
    }
    let mut best = f64::INFINITY;
    for i in 1..c.points.len() {
        let d = if c.breaks[i] {
            linalg::dist(p, &c.points[i - 1])
        } else {
            point_to_segment(p, &c.points[i - 1], &c.points[i])
        };
        best = best.min(d);
    }
    best
}

fn window_points(model: &SpacetimeModel, samples: &[Sample], w: &Window, per_step: usize) -> Result<Vec<Vec<f64>>> {
    let pts: Vec<Vec<f64>> = densify_samples(samples, per_step)
        .iter()
        .filter(|s| w.contains(&s.x))
        .map(|s| phase(model, s))
        .collect();
    if pts.len() < 2 {
        return Err(Error::Config(format!("comparison window {w:?} holds fewer than two points")));
    }
    Ok(pts)
}

/// `max_{p ∈ window} dist(p, curve)`.
fn window_distance(window: &[Vec<f64>], c: &Curve) -> f64 {
    window.iter().map(|p| to_curve(c, p)).fold(0.0, f64::max)
}

fn distances(
    model: &SpacetimeModel,
    family: &[Vec<Sample>],
    limits: [&[Sample]; 2],
    windows: [Window; 2],
    per_step: usize,
    exec: Execution,
) -> Result<(Vec<(f64, f64)>, f64)> {
    let wa = window_points(model, limits[0], &windows[0], per_step)?;
    let wb = window_points(model, limits[1], &windows[1], per_step)?;
    let ca = curve(model, limits[0], per_step);
    let cb = curve(model, limits[1], per_step);
    let separation = window_distance(&wa, &cb).min(window_distance(&wb, &ca));
    let d = map_with(exec, family, |_, g| {
        let c = curve(model, g, per_step);
        (window_distance(&wa, &c), window_distance(&wb, &c))
    });
    Ok((d, separation))
}

fn integrate(model: &SpacetimeModel, d: &InitialData, horizon: f64) -> Result<Vec<Sample>> {
    let opts = IntegrateOptions::new(horizon).with_tol(1e-12);
    Ok(integrate_both_ways(model, &d.point, &d.velocity, &opts)?.2)
}

/// Integrate the family and both candidates, and measure convergence.
pub fn assess_family(
    model: &SpacetimeModel,
    family: &[FamilyMember],
    candidates: &[Candidate; 2],
    opts: &DetectOptions,
) -> Result<Assessment> {
    if family.is_empty() {
        return Err(Error::Config("empty family".into()));
    }
    let curves: Vec<Result<Vec<Sample>>> = map_with(opts.exec, family, |_, m| match &m.source {
        MemberSource::Initial(d) => integrate(model, d, opts.horizon),
        MemberSource::Trajectory(s) => Ok(s.clone()),
    });
    let curves: Vec<Vec<Sample>> = curves.into_iter().collect::<Result<_>>()?;
    let la = integrate(model, &candidates[0].data, opts.horizon)?;
    let lb = integrate(model, &candidates[1].data, opts.horizon)?;
    let windows = [candidates[0].window, candidates[1].window];
    let (d, separation) = distances(model, &curves, [&la, &lb], windows, opts.densify, opts.exec)?;
    let evidence: Vec<Evidence> =
        family.iter().zip(&d).map(|(m, (a, b))| Evidence { param: m.param, d_a: *a, d_b: *b }).collect();
    let worst = |e: &Evidence| e.d_a.max(e.d_b);
    let last = evidence.last().map_or(f64::INFINITY, worst);
    let first = evidence.first().map_or(f64::INFINITY, worst);
    let converges = last < opts.threshold && last <= first;
    let separated = separation > opts.separation_factor * opts.threshold;
    let certificate = (converges && separated).then(|| NonHausdorffCertificate {
        model: model.name.clone(),
        params: family.iter().map(|m| m.param).collect(),
        family: curves,
        limit_a: la,
        limit_b: lb,
        windows,
        evidence: evidence.clone(),
        separation,
        threshold: opts.threshold,
        densify: opts.densify,
    });
    Ok(Assessment { evidence, separation, certificate })
}

/// A certificate when the family converges to both separated candidates.
pub fn detect_nonhausdorff(
    model: &SpacetimeModel,
    family: &[FamilyMember],
    candidates: &[Candidate; 2],
    opts: &DetectOptions,
) -> Result<Option<NonHausdorffCertificate>> {
    Ok(assess_family(model, family, candidates, opts)?.certificate)
}

impl NonHausdorffCertificate {
    /// Recompute every distance from the stored trajectories and return the
    /// largest deviation from the recorded evidence.
    pub fn revalidate(&self, model: &SpacetimeModel) -> Result<f64> {
        let (d, sep) = distances(
            model,
            &self.family,
            [&self.limit_a, &self.limit_b],
            self.windows,
            self.densify,
            Execution::Sequential,
        )?;
        let mut dev = (sep - self.separation).abs();
        for (e, (a, b)) in self.evidence.iter().zip(&d) {
            dev = dev.max((e.d_a - a).abs()).max((e.d_b - b).abs());
        }
        Ok(dev)
    }

    /// Re-validation within `tol` and the emission conditions still hold.
    pub fn is_valid(&self, model: &SpacetimeModel, tol: f64) -> bool {
        let last = self.evidence.last().map_or(f64::INFINITY, |e| e.d_a.max(e.d_b));
        self.revalidate(model).is_ok_and(|d| d <= tol) && last < self.threshold && self.separation > 10.0 * self.threshold
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{cone_surface, minkowski, strip};

    fn cone_family(ks: &[f64]) -> Vec<FamilyMember> {
        ks.iter()
            .map(|k| {
                let (point, velocity) = cone_surface::family_member(*k);
                FamilyMember { param: 1.0 / k, source: MemberSource::Initial(InitialData { point, velocity }) }
            })
            .collect()
    }

    fn cone_candidates() -> [Candidate; 2] {
        let [a, b] = cone_surface::limit_candidates();
        [
            Candidate { data: InitialData { point: a.0, velocity: a.1 }, window: Window { coord: 2, lo: 0.1, hi: 0.6 } },
            Candidate { data: InitialData { point: b.0, velocity: b.1 }, window: Window { coord: 2, lo: -0.6, hi: -0.1 } },
        ]
    }

    #[test]
    fn cone_surface_family_has_two_limits() {
        let m = cone_surface::make_product_cone_surface();
        let ks = [10.0, 100.0, 1e3, 1e4, 1e5];
        let opts = DetectOptions { horizon: 3.0, ..Default::default() };
        let cert = detect_nonhausdorff(&m, &cone_family(&ks), &cone_candidates(), &opts).unwrap().unwrap();
        for (e, k) in cert.evidence.iter().zip(ks) {
            assert!((e.d_a - 1.0 / k).abs() < 1e-9 && (e.d_b - 1.0 / k).abs() < 1e-9, "{e:?}");
        }
        assert!(cert.separation > 0.1);
        assert!(cert.revalidate(&m).unwrap() <= 1e-10);
        assert!(cert.is_valid(&m, 1e-10));
    }

    #[test]
    fn minkowski_and_strip_give_no_certificate() {
        let m = minkowski::make_minkowski(2, minkowski::Region::Full);
        let opts = DetectOptions { horizon: 3.0, ..Default::default() };
        let a = assess_family(&m, &cone_family(&[10.0, 1e5]), &cone_candidates(), &opts).unwrap();
        assert!(a.certificate.is_none());
        assert!(a.separation < 1e-12);

        let s = strip::make_cylinder_strip((-10.0, 10.0));
        let fam: Vec<FamilyMember> = [10.0, 1e5]
            .iter()
            .map(|k| FamilyMember {
                param: 1.0 / k,
                source: MemberSource::Initial(InitialData { point: vec![0.0, -1.0 / k], velocity: vec![1.0, 1.0] }),
            })
            .collect();
        let cands = [
            Candidate {
                data: InitialData { point: vec![0.5, 0.5], velocity: vec![1.0, 1.0] },
                window: Window { coord: 1, lo: 0.1, hi: 0.6 },
            },
            Candidate {
                data: InitialData { point: vec![-0.5, -0.5], velocity: vec![1.0, 1.0] },
                window: Window { coord: 1, lo: -0.6, hi: -0.1 },
            },
        ];
        assert!(detect_nonhausdorff(&s, &fam, &cands, &opts).unwrap().is_none());
    }

    #[test]
    fn tampered_certificate_fails_revalidation() {
        let m = cone_surface::make_product_cone_surface();
        let opts = DetectOptions { horizon: 3.0, ..Default::default() };
        let mut cert = detect_nonhausdorff(&m, &cone_family(&[10.0, 1e5]), &cone_candidates(), &opts).unwrap().unwrap();
        cert.evidence[0].d_a += 1e-6;
        assert!(!cert.is_valid(&m, 1e-10));
    }
}
