//! Finite-difference oracles, independent of the dual-number engine.

use nalgebra::DMatrix;

use crate::geometry::{project_to_boundary, tensor_matrix, SpacetimeModel};
use crate::linalg::{axpy, dot, norm};

/// `½ ∂²L/∂v^i∂v^j` by central differences with step `h·|v|`.
pub fn fd_tensor(model: &SpacetimeModel, p: &[f64], v: &[f64], h: f64) -> DMatrix<f64> {
    let n = model.dim;
    let h = h * norm(v);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let l = |si: f64, sj: f64| {
                let mut w = v.to_vec();
                w[i] += si * h;
                w[j] += sj * h;
                model.l(p, &w)
            };
            let val = (l(1.0, 1.0) - l(1.0, -1.0) - l(-1.0, 1.0) + l(-1.0, -1.0)) / (8.0 * h * h);
            m[(i, j)] = val;
            m[(j, i)] = val;
        }
    }
    m
}

/// Formal Christoffel symbols with `∂g/∂x` by central differences
/// of the fundamental tensor.
pub fn fd_christoffel(model: &SpacetimeModel, p: &[f64], v: &[f64], h: f64) -> Vec<Vec<Vec<f64>>> {
    christoffel_from(model.dim, &tensor_matrix(model, p, v), |m| {
        let mut xp = p.to_vec();
        let mut xm = p.to_vec();
        xp[m] += h;
        xm[m] -= h;
        (tensor_matrix(model, &xp, v) - tensor_matrix(model, &xm, v)) / (2.0 * h)
    })
}

/// Christoffel symbols of a quadratic model using only values of `L`:
/// the metric comes from polarisation and its derivatives from differences.
pub fn fd_christoffel_quadratic(model: &SpacetimeModel, p: &[f64], h: f64) -> Vec<Vec<Vec<f64>>> {
    christoffel_from(model.dim, &polarized_metric(model, p), |m| {
        let mut xp = p.to_vec();
        let mut xm = p.to_vec();
        xp[m] += h;
        xm[m] -= h;
        (polarized_metric(model, &xp) - polarized_metric(model, &xm)) / (2.0 * h)
    })
}

fn christoffel_from(
    n: usize,
    g: &DMatrix<f64>,
    dg_of: impl Fn(usize) -> DMatrix<f64>,
) -> Vec<Vec<Vec<f64>>> {
    let ginv = g.clone().try_inverse().expect("non-degenerate metric");
    let dg: Vec<DMatrix<f64>> = (0..n).map(dg_of).collect();
    let mut gamma = vec![vec![vec![0.0; n]; n]; n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                gamma[k][i][j] = (0..n)
                    .map(|l| 0.5 * ginv[(k, l)] * (dg[j][(l, i)] + dg[i][(l, j)] - dg[l][(i, j)]))
                    .sum();
            }
        }
    }
    gamma
}

fn polarized_metric(model: &SpacetimeModel, p: &[f64]) -> DMatrix<f64> {
    let n = model.dim;
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut a = vec![0.0; n];
            let mut b = vec![0.0; n];
            a[i] += 1.0;
            a[j] += 1.0;
            b[i] += 1.0;
            b[j] -= 1.0;
            g[(i, j)] = 0.25 * (model.l(p, &a) - model.l(p, &b));
        }
    }
    g
}

/// Second fundamental form of a quadratic model through the decomposition
/// `∇_w W = (tangential) + II(w, w) η`, using a boundary curve built by
/// projection and its acceleration by Richardson-extrapolated differences.
pub fn decomposition_ii(model: &SpacetimeModel, p: &[f64], w: &[f64], eta: &[f64]) -> f64 {
    let curve = |s: f64| project_to_boundary(model, &axpy(p, s, w)).expect("projection onto the boundary");
    let accel = |h: f64| -> Vec<f64> {
        let (a, b) = (curve(h), curve(-h));
        (0..p.len()).map(|k| (a[k] - 2.0 * p[k] + b[k]) / (h * h)).collect()
    };
    let h = 1e-3 * model.scale;
    let (a1, a2) = (accel(h), accel(h / 2.0));
    let acc: Vec<f64> = a1.iter().zip(&a2).map(|(x, y)| (4.0 * y - x) / 3.0).collect();
    let gamma = fd_christoffel_quadratic(model, p, 1e-4 * model.scale);
    let n = p.len();
    let x: Vec<f64> = (0..n)
        .map(|k| {
            let mut s = acc[k];
            for i in 0..n {
                for j in 0..n {
                    s += gamma[k][i][j] * w[i] * w[j];
                }
            }
            s
        })
        .collect();
    let db = model.db(p).expect("boundary");
    dot(&db, &x) / dot(&db, eta)
}

/// Second derivative of `f` at 0 by a five-point stencil.
pub fn second_derivative_1d(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    (-f(2.0 * h) + 16.0 * f(h) - 30.0 * f(0.0) + 16.0 * f(-h) - f(-2.0 * h)) / (12.0 * h * h)
}

/// First derivative of `f` at 0 by a five-point stencil.
pub fn derivative_1d(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h)
}

/// Adaptive Simpson quadrature on `[a, b]`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_arctan_derivative() {
        let v = adaptive_simpson(&|x| 1.0 / (1.0 + x * x), 2.0, 10.0, 1e-13);
        assert!((v - (10f64.atan() - 2f64.atan())).abs() < 1e-11);
    }

    #[test]
    fn stencils() {
        assert!((second_derivative_1d(|x| x.sin() + x * x, 1e-2) - 2.0).abs() < 1e-8);
        assert!((derivative_1d(|x| x.exp(), 1e-2) - 1.0).abs() < 1e-9);
    }
}
