//! Functions on the tangent bundle and on the base, written once against
//! [`Scalar`] and evaluated at any differentiation order.

use crate::dual::{Scalar, D1, D2, D3};

/// A function `(x, v) -> S` generic over the scalar type.
///
/// Implement this for model Lagrangians; the blanket impl turns it into a
/// shareable [`TangentFunction`].
pub trait SmoothTangentFn: Send + Sync {
    fn eval<S: Scalar>(&self, x: &[S], v: &[S]) -> S;
}

/// Object-safe view of a tangent function at the four supported orders.
pub trait TangentFunction: Send + Sync {
    fn eval_f64(&self, x: &[f64], v: &[f64]) -> f64;
    fn eval_d1(&self, x: &[D1], v: &[D1]) -> D1;
    fn eval_d2(&self, x: &[D2], v: &[D2]) -> D2;
    fn eval_d3(&self, x: &[D3], v: &[D3]) -> D3;
}

impl<T: SmoothTangentFn> TangentFunction for T {
    fn eval_f64(&self, x: &[f64], v: &[f64]) -> f64 {
        self.eval(x, v)
    }
    fn eval_d1(&self, x: &[D1], v: &[D1]) -> D1 {
        self.eval(x, v)
    }
    fn eval_d2(&self, x: &[D2], v: &[D2]) -> D2 {
        self.eval(x, v)
    }
    fn eval_d3(&self, x: &[D3], v: &[D3]) -> D3 {
        self.eval(x, v)
    }
}

/// A scalar field `x -> S` generic over the scalar type.
pub trait SmoothField: Send + Sync {
    fn eval<S: Scalar>(&self, x: &[S]) -> S;
}

pub trait ScalarField: Send + Sync {
    fn eval_f64(&self, x: &[f64]) -> f64;
    fn eval_d1(&self, x: &[D1]) -> D1;
    fn eval_d2(&self, x: &[D2]) -> D2;
    fn eval_d3(&self, x: &[D3]) -> D3;
}

impl<T: SmoothField> ScalarField for T {
    fn eval_f64(&self, x: &[f64]) -> f64 {
        self.eval(x)
    }
    fn eval_d1(&self, x: &[D1]) -> D1 {
        self.eval(x)
    }
    fn eval_d2(&self, x: &[D2]) -> D2 {
        self.eval(x)
    }
    fn eval_d3(&self, x: &[D3]) -> D3 {
        self.eval(x)
    }
}

/// Gradient of a scalar field.
pub fn gradient(f: &dyn ScalarField, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut e = vec![0.0; n];
    (0..n)
        .map(|i| {
            e[i] = 1.0;
            let xs = crate::dual::seed1(x, &e);
            e[i] = 0.0;
            f.eval_d1(&xs).du
        })
        .collect()
}

/// Directional second derivative `∂²f(a, b)`.
pub fn second_derivative(f: &dyn ScalarField, x: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let xs = crate::dual::seed2(x, a, b);
    crate::dual::mixed2(f.eval_d2(&xs))
}

/// Linear function `x -> c·x + c0`.
#[derive(Clone, Debug)]
pub struct Affine {
    pub coeffs: Vec<f64>,
    pub offset: f64,
}

impl SmoothField for Affine {
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        let mut acc = S::cst(self.offset);
        for (xi, &c) in x.iter().zip(&self.coeffs) {
            acc += *xi * c;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Quad;
    impl SmoothField for Quad {
        fn eval<S: Scalar>(&self, x: &[S]) -> S {
            x[0] * x[0] * x[1] + x[1].sin()
        }
    }

    #[test]
    fn gradient_and_second_derivative() {
        let x = [0.5, 0.2];
        let g = gradient(&Quad, &x);
        assert!((g[0] - 2.0 * 0.5 * 0.2).abs() < 1e-15);
        assert!((g[1] - (0.25 + 0.2f64.cos())).abs() < 1e-15);
        let h = second_derivative(&Quad, &x, &[1.0, 0.0], &[0.0, 1.0]);
        assert!((h - 1.0).abs() < 1e-15);
    }
}
