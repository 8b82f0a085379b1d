//! Cone triples `L = Ω² − F(Π v)²` on `R × R^n` with a Randers norm `F`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dual::Scalar;
use crate::field::SmoothTangentFn;
use crate::geometry::SpacetimeModel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConeTripleParams {
    pub n_spatial: usize,
    /// Randers one-form `β`; empty means the Euclidean norm.
    pub randers: Vec<f64>,
    /// `F(x, u) = e^{warp·x¹} |u| + β(u)`.
    pub warp: f64,
    /// Vectors with `|Π v| <= κ |Ω(v)|` are outside the evaluable cone domain.
    pub kappa: f64,
}

impl Default for ConeTripleParams {
    fn default() -> Self {
        Self { n_spatial: 2, randers: Vec::new(), warp: 0.0, kappa: 1e-3 }
    }
}

pub struct ConeTriple {
    pub params: ConeTripleParams,
}

impl ConeTriple {
    pub fn finsler<S: Scalar>(&self, x: &[S], u: &[S]) -> S {
        let mut e = S::cst(0.0);
        for c in u {
            e += *c * *c;
        }
        let mut f = e.sqrt();
        if self.params.warp != 0.0 {
            f *= (x[1] * self.params.warp).exp();
        }
        for (c, b) in u.iter().zip(&self.params.randers) {
            f += *c * *b;
        }
        f
    }
}

impl SmoothTangentFn for ConeTriple {
    fn eval<S: Scalar>(&self, x: &[S], v: &[S]) -> S {
        let f = self.finsler(x, &v[1..]);
        v[0] * v[0] - f * f
    }
}

pub fn make_cone_triple(params: &ConeTripleParams) -> SpacetimeModel {
    let dim = params.n_spatial + 1;
    let beta: f64 = params.randers.iter().map(|b| b * b).sum::<f64>().sqrt();
    assert!(beta < 1.0, "Randers one-form must have norm below one");
    let kappa = params.kappa;
    let mut m = SpacetimeModel::new("cone_triple", dim, Arc::new(ConeTriple { params: params.clone() }))
        .with_time_orientation()
        .with_params(serde_json::to_value(params).unwrap_or_default())
        .product();
    m.cone_admissible = Some(Arc::new(move |_x: &[f64], v: &[f64]| {
        let pi: f64 = v[1..].iter().map(|c| c * c).sum::<f64>().sqrt();
        pi > kappa * v[0].abs()
    }));
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::cone_direction_solve;

    #[test]
    fn light_cone_is_the_randers_unit_sphere() {
        let m = make_cone_triple(&ConeTripleParams { randers: vec![0.3, 0.0], ..Default::default() });
        let p = [0.0, 0.2, -0.1];
        for (u, f) in [([1.0, 0.0], 1.3), ([-1.0, 0.0], 0.7), ([0.0, 1.0], 1.0)] {
            let v = cone_direction_solve(&m, &p, &[0.0, u[0], u[1]], &[1.0, 0.0, 0.0]).unwrap();
            assert!((v[0] / (v[1] * v[1] + v[2] * v[2]).sqrt() - f).abs() < 1e-10, "{u:?}");
        }
        assert!(!m.admissible(&p, &[1.0, 0.0, 0.0]));
    }

    #[test]
    fn warp_scales_the_norm() {
        let t = ConeTriple { params: ConeTripleParams { warp: 0.5, ..Default::default() } };
        let f: f64 = t.finsler(&[0.0, 2.0, 0.0], &[3.0, 4.0]);
        assert!((f - 5.0 * 1f64.exp()).abs() < 1e-12);
    }
}
