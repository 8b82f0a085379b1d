//! Lightlike lifts `s ↦ (t0 + ∫F(σ'), σ(s))` of Fermat geodesics.

use super::{GeodesicSolution, Sample, Termination};
use crate::connection::spray_coeffs;
use crate::error::{Error, Result};
use crate::geometry::SpacetimeModel;
use crate::lightspace::fermat::fermat_metric;
use crate::linalg::norm;

/// Relative size of the acceleration residual accepted as a geodesic.
const RESIDUAL_TOL: f64 = 5e-2;

/// Lift an F-geodesic of the spatial factor of `product` to a lightlike curve.
pub fn lift_product_geodesic(product: &SpacetimeModel, sigma: &GeodesicSolution, t0: f64) -> Result<GeodesicSolution> {
    let fermat = fermat_metric(product)?;
    let samples = sigma.forward_view();
    let residual = geodesic_residual(&fermat, &samples);
    if residual > RESIDUAL_TOL {
        return Err(Error::NotAGeodesic(residual));
    }
    let f = |s: &Sample| fermat.l(&s.x, &s.v).max(0.0).sqrt();
    let mut t = t0;
    let mut out = Vec::with_capacity(samples.len());
    for (i, s) in samples.iter().enumerate() {
        if i > 0 && !s.jump {
            let a = &samples[i - 1];
            let h = s.t - a.t;
            let mid = super::densify_samples(&[a.clone(), s.clone()], 2)[1].clone();
            t += h / 6.0 * (f(a) + 4.0 * f(&mid) + f(s));
        }
        let mut x = vec![t];
        x.extend_from_slice(&s.x);
        let mut v = vec![f(s)];
        v.extend_from_slice(&s.v);
        out.push(Sample { t: s.t - samples[0].t, x, v, jump: s.jump });
    }
    let l0 = product.l(&out[0].x, &out[0].v);
    let drift = out
        .iter()
        .map(|s| (product.l(&s.x, &s.v) - l0).abs().max(l0.abs()))
        .fold(0.0, f64::max);
    Ok(GeodesicSolution {
        samples: out,
        termination: sigma.termination,
        boundary_hit: None,
        lagrangian_drift: drift,
        direction: super::Direction::Forward,
        inextendible: sigma.inextendible || sigma.termination == Termination::BoundaryHit,
        level_crossings: Vec::new(),
    })
}

/// Largest relative mismatch between the velocity change over each step
/// and the Simpson integral of the spray along it.
pub fn geodesic_residual(model: &SpacetimeModel, samples: &[Sample]) -> f64 {
    let mut worst: f64 = 0.0;
    for w in samples.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let h = b.t - a.t;
        if b.jump || h <= 0.0 {
            continue;
        }
        let m = super::densify_samples(&[a.clone(), b.clone()], 2)[1].clone();
        let g = |s: &Sample| spray_coeffs(model, &s.x, &s.v);
        let (Ok(ga), Ok(gm), Ok(gb)) = (g(a), g(&m), g(b)) else {
            return f64::INFINITY;
        };
        let diff: Vec<f64> =
            (0..a.v.len()).map(|k| (b.v[k] - a.v[k]) / h + (ga[k] + 4.0 * gm[k] + gb[k]) / 6.0).collect();
        let scale = norm(&gm) + norm(&m.v).powi(2) / model.scale;
        worst = worst.max(norm(&diff) / scale.max(1e-300));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{integrate_geodesic, IntegrateOptions};
    use crate::models::minkowski::{make_minkowski, Region};
    use crate::models::stationary::{make_stationary, OneForm, StationaryParams};

    #[test]
    fn lifts_of_fermat_geodesics_are_lightlike() {
        let m = make_stationary(&StationaryParams {
            n_spatial: 2,
            omega: OneForm { constant: vec![0.2, 0.0], swirl: 0.1 },
            region: Region::Ball { radius: 1.0 },
        });
        let f = fermat_metric(&m).unwrap();
        let sigma = integrate_geodesic(&f, &[0.1, -0.2], &[0.6, 0.8], &IntegrateOptions::new(0.5).with_tol(1e-12)).unwrap();
        let lift = lift_product_geodesic(&m, &sigma, 2.0).unwrap();
        assert_eq!(lift.samples[0].x[0], 2.0);
        assert!(lift.lagrangian_drift < 1e-9);
        assert!(lift.samples.windows(2).all(|w| w[1].x[0] > w[0].x[0]));
    }

    #[test]
    fn circles_are_rejected() {
        let m = make_minkowski(2, Region::Full);
        let f = fermat_metric(&m).unwrap();
        let mut sigma = integrate_geodesic(&f, &[1.0, 0.0], &[0.0, 1.0], &IntegrateOptions::new(1.0)).unwrap();
        sigma.samples = (0..20)
            .map(|i| {
                let s = 0.1 * i as f64;
                Sample { t: s, x: vec![s.cos(), s.sin()], v: vec![-s.sin(), s.cos()], jump: false }
            })
            .collect();
        assert!(geodesic_residual(&f, &sigma.samples) > 0.5);
        assert!(matches!(lift_product_geodesic(&m, &sigma, 0.0), Err(Error::NotAGeodesic(_))));
    }
}
