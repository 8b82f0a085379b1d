//! Formal Christoffel symbols, the geodesic spray and the Berwald Hessian.

use serde::{Deserialize, Serialize};

use crate::dual::{lift, mixed2, seed1, seed2, D1, D2};
use crate::error::Result;
use crate::field::{gradient, second_derivative, ScalarField};
use crate::geometry::{factor_tensor, tensor_matrix, tensor_x_derivatives, SpacetimeModel, TangentSample};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChristoffelValue {
    pub base: TangentSample,
    /// `gamma[k][i][j]`
    pub gamma: Vec<Vec<Vec<f64>>>,
}

impl ChristoffelValue {
    /// `Γ^k_ij a^i b^j`
    pub fn contract(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        self.gamma
            .iter()
            .map(|gk| {
                let mut s = 0.0;
                for (i, row) in gk.iter().enumerate() {
                    for (j, g) in row.iter().enumerate() {
                        s += g * a[i] * b[j];
                    }
                }
                s
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SprayValue {
    pub base: TangentSample,
    pub coeffs: Vec<f64>,
}

pub fn christoffel(model: &SpacetimeModel, p: &[f64], v: &[f64]) -> Result<ChristoffelValue> {
    crate::geometry::eval_lagrangian(model, p, v)?;
    let n = model.dim;
    let g = tensor_matrix(model, p, v);
    let lu = factor_tensor(model, &g)?;
    let ginv = lu.inverse();
    let dg = tensor_x_derivatives(model, p, v);
    let mut gamma = vec![vec![vec![0.0; n]; n]; n];
    for i in 0..n {
        for j in i..n {
            // lowered symbols Γ_lij
            let low: Vec<f64> = (0..n)
                .map(|l| 0.5 * (dg[j][(l, i)] + dg[i][(l, j)] - dg[l][(i, j)]))
                .collect();
            for k in 0..n {
                let val: f64 = (0..n).map(|l| ginv[(k, l)] * low[l]).sum();
                gamma[k][i][j] = val;
                gamma[k][j][i] = val;
            }
        }
    }
    Ok(ChristoffelValue {
        base: TangentSample::new(model, p, v, model.tol.classification),
        gamma,
    })
}

pub fn spray(model: &SpacetimeModel, p: &[f64], v: &[f64]) -> Result<SprayValue> {
    let c = christoffel(model, p, v)?;
    let coeffs = c.contract(v, v);
    Ok(SprayValue { base: c.base, coeffs })
}

/// Spray coefficients from the Euler–Lagrange form
/// `G^k = ½ g^{kl} (∂²L/∂v^l∂x^m v^m − ∂L/∂x^l)`.
///
/// Needs only second derivatives of `L`, so this is what the integrator calls;
/// it agrees with `Γ^k_ij v^i v^j`.
pub fn spray_coeffs(model: &SpacetimeModel, p: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let n = model.dim;
    let g = tensor_matrix(model, p, v);
    let lu = factor_tensor(model, &g)?;
    let zero = vec![0.0; n];
    let mut e = vec![0.0; n];
    let xs_v: Vec<D2> = seed2(p, &zero, v);
    let vs_1: Vec<D1> = lift(v);
    let rhs: Vec<f64> = (0..n)
        .map(|l| {
            e[l] = 1.0;
            let vs = seed2(v, &e, &zero);
            let mixed = mixed2(model.lagrangian.eval_d2(&xs_v, &vs));
            let xs = seed1(p, &e);
            let dl = model.lagrangian.eval_d1(&xs, &vs_1).du;
            e[l] = 0.0;
            0.5 * (mixed - dl)
        })
        .collect();
    Ok(lu.solve(&rhs))
}

/// `Z^i W^j ∂_ij φ − Γ^k_ij(V) Z^i W^j ∂_k φ`, symmetrised in `(Z, W)`.
pub fn hessian(
    model: &SpacetimeModel,
    phi: &dyn ScalarField,
    p: &[f64],
    v_dir: &[f64],
    z: &[f64],
    w: &[f64],
) -> Result<f64> {
    let c = christoffel(model, p, v_dir)?;
    Ok(hessian_with(&c, phi, p, z, w))
}

pub fn hessian_with(c: &ChristoffelValue, phi: &dyn ScalarField, p: &[f64], z: &[f64], w: &[f64]) -> f64 {
    let dphi = gradient(phi, p);
    let flat = 0.5 * (second_derivative(phi, p, z, w) + second_derivative(phi, p, w, z));
    let gzw = c.contract(z, w);
    let gwz = c.contract(w, z);
    let corr: f64 = (0..dphi.len()).map(|k| 0.5 * (gzw[k] + gwz[k]) * dphi[k]).sum();
    flat - corr
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Affine, SmoothField};
    use crate::models::{ads, cone_triple, minkowski};
    use crate::oracle;

    struct Square(usize);
    impl SmoothField for Square {
        fn eval<S: crate::dual::Scalar>(&self, x: &[S]) -> S {
            x[self.0] * x[self.0]
        }
    }

    #[test]
    fn minkowski_is_flat() {
        let m = minkowski::make_minkowski(2, minkowski::Region::Full);
        let p = [0.1, 0.2, 0.3];
        let v = [1.0, 0.3, -0.2];
        let c = christoffel(&m, &p, &v).unwrap();
        assert!(c.gamma.iter().flatten().flatten().all(|g| *g == 0.0));
        assert!(spray(&m, &p, &v).unwrap().coeffs.iter().all(|g| *g == 0.0));
        let lin = Affine { coeffs: vec![0.0, 1.0, 0.0], offset: 0.0 };
        assert_eq!(hessian(&m, &lin, &p, &v, &v, &[0.0, 0.0, 1.0]).unwrap(), 0.0);
        let e = [0.0, 1.0, 0.0];
        assert_eq!(hessian(&m, &Square(1), &p, &v, &e, &e).unwrap(), 2.0);
    }

    #[test]
    fn ads_christoffel_matches_finite_differences() {
        let m = ads::make_ads(2, ads::AdsRegion::Full);
        let p = [0.0, 1.0, 0.4];
        let v = [1.0, 0.2, 0.7];
        let c = christoffel(&m, &p, &v).unwrap();
        let fd = oracle::fd_christoffel(&m, &p, &v, 1e-4);
        let scale = fd.iter().flatten().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    assert!((c.gamma[k][i][j] - fd[k][i][j]).abs() <= 1e-5 * scale);
                }
            }
        }
    }

    #[test]
    fn euler_lagrange_spray_equals_christoffel_contraction() {
        let models = [
            ads::make_ads(2, ads::AdsRegion::Full),
            cone_triple::make_cone_triple(&cone_triple::ConeTripleParams {
                randers: vec![0.3, -0.2],
                ..Default::default()
            }),
        ];
        for m in &models {
            let p = [0.2, 1.3, 0.4];
            let v = [1.0, 0.25, -0.4];
            let a = spray(m, &p, &v).unwrap().coeffs;
            let b = spray_coeffs(m, &p, &v).unwrap();
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() <= 1e-10 * (1.0 + a[k].abs()), "{}", m.name);
            }
        }
    }

    #[test]
    fn ads_radial_spray() {
        let m = ads::make_ads(2, ads::AdsRegion::Full);
        let r = 1.0;
        let v = [1.0, 1.0 + r * r, 0.0];
        let g = spray(&m, &[0.0, r, 0.0], &v).unwrap().coeffs;
        // with t' = E/(1+r²) and r' = E, t'' = -2 r r' t'/(1+r²) and r'' = 0
        assert!((g[0] - 2.0 * r * (1.0 + r * r) / (1.0 + r * r)).abs() < 1e-12);
        assert!(g[1].abs() < 1e-12);
    }
}
