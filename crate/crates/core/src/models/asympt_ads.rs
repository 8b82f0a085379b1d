//! Asymptotically AdS metrics `g_AdS + h` in the conformal frame.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::ads::{conformal_f, conformal_frame};
use super::quadrature::z_star;
use crate::dual::{Dual, Scalar};
use crate::error::{Error, Result};
use crate::field::SmoothTangentFn;
use crate::geometry::SpacetimeModel;

/// `h_ij = c_ij e^{−λ r}` in the static frame `(t, r, θ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub coeffs: Vec<Vec<f64>>,
    pub rate: f64,
}

impl Perturbation {
    /// The `e^{−r} dt²` profile.
    pub fn dt2(dim: usize, c: f64) -> Self {
        let mut coeffs = vec![vec![0.0; dim]; dim];
        coeffs[0][0] = c;
        Self { coeffs, rate: 1.0 }
    }

    /// Distance `z_* − z` below which `h` is set to zero.
    fn cut(&self) -> f64 {
        if self.rate > 0.0 {
            (self.rate / 745.0).asinh()
        } else {
            1e-6
        }
    }

    /// `r^{-2} h(v, v)` pulled back to `(t, z, θ)`, where `dr = r√(1+r²) dz`.
    fn conformal_term<S: Scalar>(&self, z: S, v: &[S], zs: f64) -> S {
        let s = S::cst(zs) - z;
        if s.re() <= self.cut() {
            return S::cst(0.0);
        }
        let r = s.sinh().recip();
        let jac = r * (r * r + 1.0).sqrt();
        let w: Vec<S> = v
            .iter()
            .enumerate()
            .map(|(i, vi)| if i == 1 { *vi * jac } else { *vi })
            .collect();
        let mut q = S::cst(0.0);
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                if *c != 0.0 {
                    q += w[i] * w[j] * *c;
                }
            }
        }
        q * (r * (-self.rate)).exp() / (r * r)
    }

    /// Check that `r^{-2} h` and its `z`-derivative decay towards `z_*` on a grid.
    pub fn check_decay(&self, dim: usize) -> Result<()> {
        if self.coeffs.len() != dim || self.coeffs.iter().any(|r| r.len() != dim) {
            return Err(Error::Config(format!("perturbation must be {dim}×{dim}")));
        }
        let zs = z_star();
        let mut prev = f64::INFINITY;
        let mut last = 0.0;
        for r in [25.0f64, 50.0, 100.0, 200.0, 400.0, 800.0] {
            let z = zs - (1.0 / r).asinh();
            let mut worst: f64 = 0.0;
            for i in 0..dim {
                for j in 0..dim {
                    let mut v = vec![Dual::new(0.0, 0.0); dim];
                    v[i] = v[i] + 1.0;
                    v[j] = v[j] + 1.0;
                    let val = self.conformal_term(Dual::new(z, 1.0), &v, zs);
                    worst = worst.max(val.re.abs()).max(val.du.abs());
                }
            }
            if !worst.is_finite() || worst > prev * (1.0 + 1e-12) {
                return Err(Error::DecayViolation(format!("conformal components grow near r = {r}")));
            }
            prev = worst;
            last = worst;
        }
        if last > 1e-8 {
            return Err(Error::DecayViolation(format!("conformal components stay at {last:e} near the boundary")));
        }
        Ok(())
    }
}

pub struct AsymptAds {
    pub z_star: f64,
    pub h: Perturbation,
}

impl SmoothTangentFn for AsymptAds {
    fn eval<S: Scalar>(&self, x: &[S], v: &[S]) -> S {
        conformal_f(x[1], self.z_star) * v[0] * v[0] - v[1] * v[1]
            - super::ads::sphere_quadratic(&x[2..], &v[2..])
            + self.h.conformal_term(x[1], v, self.z_star)
    }
}

pub fn make_asympt_ads(n: usize, h: Perturbation) -> Result<SpacetimeModel> {
    h.check_decay(n + 1)?;
    let params = json!({ "n": n, "perturbation": h });
    let m = conformal_frame("asympt_ads", n, Arc::new(AsymptAds { z_star: z_star(), h }));
    Ok(m.with_params(params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::tensor_matrix;
    use crate::models::ads::make_ads_conformal;

    #[test]
    fn zero_perturbation_is_conformal_ads() {
        let a = make_asympt_ads(2, Perturbation { coeffs: vec![vec![0.0; 3]; 3], rate: 1.0 }).unwrap();
        let b = make_ads_conformal(2);
        let p = [0.0, 0.2, 0.4];
        let v = [1.0, 0.3, 0.2];
        assert_eq!(a.l(&p, &v), b.l(&p, &v));
    }

    #[test]
    fn perturbation_is_visible_inside_and_vanishes_at_the_boundary() {
        let a = make_asympt_ads(2, Perturbation::dt2(3, 5.0)).unwrap();
        let b = make_ads_conformal(2);
        let v = [1.0, 0.0, 0.0];
        assert!((a.l(&[0.0, 0.05, 0.0], &v) - b.l(&[0.0, 0.05, 0.0], &v)).abs() > 1e-3);
        let p = [0.0, z_star(), 1.0];
        assert_eq!(tensor_matrix(&a, &p, &[1.0, 0.2, 0.5]), tensor_matrix(&b, &p, &[1.0, 0.2, 0.5]));
    }

    #[test]
    fn growing_profile_is_rejected() {
        let mut h = Perturbation::dt2(3, 1.0);
        h.coeffs[1][1] = 1.0;
        h.rate = -0.1;
        assert!(matches!(make_asympt_ads(2, h), Err(Error::DecayViolation(_))));
        let mut h = Perturbation::dt2(3, 0.0);
        h.coeffs[1][1] = 1.0;
        h.rate = 0.0;
        assert!(matches!(make_asympt_ads(2, h), Err(Error::DecayViolation(_))));
    }
}
