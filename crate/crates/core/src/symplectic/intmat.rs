//! Small square integer matrices for the coset enumerations.

use crate::error::{Error, Result};
use crate::linalg::QMatrix;
use crate::padic::rational::q;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    n: usize,
    data: Vec<i128>,
}

impl IntMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = 1;
        }
        IntMatrix { n, data }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i128 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i128) {
        self.data[i * self.n + j] = v;
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.n;
        let mut data = vec![0i128; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * o.data[k * n + j];
                }
            }
        }
        IntMatrix { n, data }
    }

    /// Right-multiply in place by `1 + t X` where `X` has the given sparse entries.
    pub fn mul_unipotent(&mut self, entries: &[(usize, usize, i64)], t: i128) {
        if t == 0 {
            return;
        }
        // (g (1 + tX))_{ij} = g_ij + t * sum_k g_ik X_kj
        let n = self.n;
        let old = self.data.clone();
        for &(r, c, v) in entries {
            for i in 0..n {
                self.data[i * n + c] += t * v as i128 * old[i * n + r];
            }
        }
    }

    pub fn to_qmatrix(&self) -> QMatrix {
        QMatrix::from_rows(
            (0..self.n)
                .map(|i| (0..self.n).map(|j| q(self.get(i, j) as i64)).collect())
                .collect(),
        )
    }

    pub fn from_qmatrix(m: &QMatrix) -> Result<Self> {
        let n = m.rows();
        let mut out = IntMatrix::identity(n);
        for i in 0..n {
            for j in 0..n {
                let x = m.get(i, j);
                if !x.is_integer() {
                    return Err(Error::InvalidInput("matrix is not integral".into()));
                }
                let v: i128 = x
                    .to_integer()
                    .try_into()
                    .map_err(|_| Error::InvalidInput("entry exceeds i128".into()))?;
                out.set(i, j, v);
            }
        }
        Ok(out)
    }
}
