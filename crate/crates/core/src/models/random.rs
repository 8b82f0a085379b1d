//! Seeded random models for the property and consistency suites.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::cone_triple::{make_cone_triple, ConeTripleParams};
use crate::dual::Scalar;
use crate::field::{SmoothField, SmoothTangentFn};
use crate::geometry::SpacetimeModel;

/// `η(v, v) + Σ_k x^k A^k(v, v)` with symmetric `A^k`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinearMetric {
    pub a: Vec<Vec<Vec<f64>>>,
}

impl SmoothTangentFn for LinearMetric {
    fn eval<S: Scalar>(&self, x: &[S], v: &[S]) -> S {
        let mut acc = v[0] * v[0];
        for c in &v[1..] {
            acc -= *c * *c;
        }
        for (k, ak) in self.a.iter().enumerate() {
            let mut q = S::cst(0.0);
            for (i, row) in ak.iter().enumerate() {
                for (j, c) in row.iter().enumerate() {
                    q += v[i] * v[j] * *c;
                }
            }
            acc += x[k] * q;
        }
        acc
    }
}

/// `x^1 + ½ Q(x, x)`, vanishing at the origin.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurvedHalfSpace {
    pub q: Vec<Vec<f64>>,
}

impl SmoothField for CurvedHalfSpace {
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        let mut acc = x[1];
        for (i, row) in self.q.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                acc += x[i] * x[j] * (0.5 * c);
            }
        }
        acc
    }
}

/// `u(x, v) = a·x + c v^1/|v|`, homogeneous of degree 0 in `v`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RandomConformal {
    pub a: Vec<f64>,
    pub c: f64,
}

impl SmoothTangentFn for RandomConformal {
    fn eval<S: Scalar>(&self, x: &[S], v: &[S]) -> S {
        let mut acc = S::cst(0.0);
        for (xi, ai) in x.iter().zip(&self.a) {
            acc += *xi * *ai;
        }
        let mut n2 = S::cst(0.0);
        for c in v {
            n2 += *c * *c;
        }
        acc + v[1] / n2.sqrt() * self.c
    }
}

fn symmetric(rng: &mut impl Rng, n: usize, amp: f64) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let c = amp * rng.gen_range(-1.0..1.0);
            m[i][j] = c;
            m[j][i] = c;
        }
    }
    m
}

/// A quadratic or Randers-type Lorentz model on `R^{n+1}` whose region
/// `{x^1 + ½Q(x,x) >= 0}` has the origin on its boundary.
pub fn random_half_space_model(rng: &mut impl Rng) -> SpacetimeModel {
    let n = rng.gen_range(2..=3);
    let dim = n + 1;
    let q = symmetric(rng, dim, 1.0);
    let m = if rng.gen_bool(0.5) {
        let a = (0..dim).map(|_| symmetric(rng, dim, 0.15)).collect();
        SpacetimeModel::new("random_quadratic", dim, Arc::new(LinearMetric { a })).with_time_orientation()
    } else {
        let r = 0.5 * rng.gen_range(0.0..1.0);
        let mut beta: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let nb = beta.iter().map(|b| b * b).sum::<f64>().sqrt().max(1e-12);
        beta.iter_mut().for_each(|b| *b *= r / nb);
        let mut m = make_cone_triple(&ConeTripleParams {
            n_spatial: n,
            randers: beta,
            warp: rng.gen_range(-0.5..0.5),
            kappa: 1e-3,
        });
        m.name = "random_randers".into();
        m
    };
    let params = serde_json::json!({ "q": q });
    m.with_boundary(Arc::new(CurvedHalfSpace { q })).with_params(params)
}

pub fn random_conformal(rng: &mut impl Rng, dim: usize) -> RandomConformal {
    RandomConformal { a: (0..dim).map(|_| rng.gen_range(-0.5..0.5)).collect(), c: rng.gen_range(-0.5..0.5) }
}

/// A random vector `η` with `db(η) > 0`.
pub fn random_inward(rng: &mut impl Rng, db: &[f64]) -> Vec<f64> {
    let nb2: f64 = db.iter().map(|c| c * c).sum();
    loop {
        let mut e: Vec<f64> = db.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s: f64 = e.iter().zip(db).map(|(a, b)| a * b).sum();
        if s.abs() > 0.1 * nb2.sqrt() {
            if s < 0.0 {
                e.iter_mut().for_each(|c| *c = -*c);
            }
            return e;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::rng;

    #[test]
    fn half_space_models_touch_the_origin() {
        let mut g = rng(3);
        for _ in 0..20 {
            let m = random_half_space_model(&mut g);
            let o = vec![0.0; m.dim];
            assert_eq!(m.b(&o), Some(0.0));
            let db = m.db(&o).unwrap();
            assert_eq!(db[1], 1.0);
            let eta = random_inward(&mut g, &db);
            assert!(eta.iter().zip(&db).map(|(a, b)| a * b).sum::<f64>() > 0.0);
        }
    }

    #[test]
    fn same_seed_same_model() {
        let (a, b) = (random_half_space_model(&mut rng(9)), random_half_space_model(&mut rng(9)));
        assert_eq!(a.name, b.name);
        assert_eq!(a.params, b.params);
    }
}
