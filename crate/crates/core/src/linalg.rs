//! Small dense helpers on chart components.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `a + s·b`
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn normalized(a: &[f64]) -> Vec<f64> {
    scale(a, 1.0 / norm(a))
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// LU factorisation with the degeneracy floor `|det| >= floor`.
pub struct Factored {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl Factored {
    pub fn new(m: &DMatrix<f64>, floor: f64) -> Result<Self> {
        let lu = m.clone().lu();
        let det = lu.determinant();
        if !det.is_finite() || det.abs() < floor {
            return Err(Error::DegenerateTensor { det, floor });
        }
        Ok(Self { lu })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let b = DVector::from_column_slice(rhs);
        self.lu
            .solve(&b)
            .map(|x| x.as_slice().to_vec())
            .unwrap_or_else(|| vec![f64::NAN; rhs.len()])
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        self.lu
            .try_inverse()
            .unwrap_or_else(|| DMatrix::from_element(self.lu.l().nrows(), self.lu.l().nrows(), f64::NAN))
    }
}

/// Numbers of positive and negative eigenvalues of a symmetric matrix.
pub fn signature(m: &DMatrix<f64>, tol: f64) -> (usize, usize) {
    let eig = m.clone().symmetric_eigen();
    let pos = eig.eigenvalues.iter().filter(|&&l| l > tol).count();
    let neg = eig.eigenvalues.iter().filter(|&&l| l < -tol).count();
    (pos, neg)
}

/// Orthonormal basis of the Euclidean orthogonal complement of `normals`.
pub fn complement_basis(dim: usize, normals: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut spanned: Vec<Vec<f64>> = Vec::new();
    for n in normals {
        if let Some(u) = orthogonalize(n, &spanned) {
            spanned.push(u);
        }
    }
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        let mut all = spanned.clone();
        all.extend(basis.iter().cloned());
        if let Some(u) = orthogonalize(&e, &all) {
            basis.push(u);
        }
        if basis.len() + spanned.len() == dim {
            break;
        }
    }
    basis
}

fn orthogonalize(v: &[f64], against: &[Vec<f64>]) -> Option<Vec<f64>> {
    let mut u = v.to_vec();
    for _ in 0..2 {
        for a in against {
            let c = dot(&u, a);
            u = axpy(&u, -c, a);
        }
    }
    let n = norm(&u);
    if n < 1e-10 * norm(v).max(1e-300) {
        None
    } else {
        Some(scale(&u, 1.0 / n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_is_orthonormal() {
        let n = vec![1.0, 2.0, -0.5];
        let b = complement_basis(3, &[n.clone()]);
        assert_eq!(b.len(), 2);
        for u in &b {
            assert!(dot(u, &n).abs() < 1e-14);
            assert!((norm(u) - 1.0).abs() < 1e-14);
        }
        assert!(dot(&b[0], &b[1]).abs() < 1e-14);
    }

    #[test]
    fn degenerate_matrix_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(Factored::new(&m, 1e-12), Err(Error::DegenerateTensor { .. })));
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let f = Factored::new(&m, 1e-12).unwrap();
        assert_eq!(f.solve(&[1.0, 1.0]), vec![1.0, -1.0]);
        assert_eq!(signature(&m, 1e-12), (1, 1));
    }
}
