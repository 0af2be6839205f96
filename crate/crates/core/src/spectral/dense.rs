use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::model::SparseOperator;

/// Largest dimension the dense oracle will diagonalize.
pub const DENSE_CAPACITY: usize = 5000;

/// Full eigendecomposition, eigenvalues ascending with matching vectors.
pub struct DenseEigen {
    pub values: Vec<f64>,
    vectors: DMatrix<f64>,
    order: Vec<usize>,
}

impl DenseEigen {
    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.vectors.column(self.order[i]).iter().copied().collect()
    }
}

pub fn dense_eigen(op: &SparseOperator) -> Result<DenseEigen> {
    let n = op.dim_checked()?;
    let eig = SymmetricEigen::new(op.to_dense());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    Ok(DenseEigen {
        values: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        vectors: eig.eigenvectors,
        order,
    })
}

/// Sorted spectrum by dense diagonalization. Validation oracle.
pub fn dense_spectrum(op: &SparseOperator) -> Result<Vec<f64>> {
    op.dim_checked()?;
    let mut ev: Vec<f64> = op.to_dense().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

impl SparseOperator {
    fn dim_checked(&self) -> Result<usize> {
        use crate::model::LinearOperator;
        let n = self.dim();
        if n == 0 {
            return Err(Error::InvalidParameter("empty operator".into()));
        }
        if n > DENSE_CAPACITY {
            return Err(Error::Capacity {
                what: "dense diagonalization dimension",
                requested: n as u128,
                limit: DENSE_CAPACITY as u128,
            });
        }
        Ok(n)
    }
}
