//! Exact rational matrices: the field-coefficient counterpart of `lattice`.
//!
//! Over a field there are no indices to compute; everything the solver needs
//! is invertibility, one solution of a linear system, and a kernel vector
//! when singular. Plain Gaussian elimination over `BigRational` does all
//! three exactly.

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigRational::one());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        assert!(i < self.rows && j < self.cols, "index out of range");
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigRational) {
        assert!(i < self.rows && j < self.cols, "index out of range");
        self.data[i * self.cols + j] = v;
    }

    pub fn mul_vec(&self, v: &[BigRational]) -> Result<Vec<BigRational>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} * vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let mut out = vec![BigRational::zero(); self.rows];
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if !a.is_zero() && !v[j].is_zero() {
                    out[i] += a * &v[j];
                }
            }
        }
        Ok(out)
    }

    pub fn id_minus(&self) -> Result<RatMatrix> {
        if self.rows != self.cols {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut out = RatMatrix::identity(self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let v = out.get(i, j) - self.get(i, j);
                out.set(i, j, v);
            }
        }
        Ok(out)
    }

    pub fn det(&self) -> Result<BigRational> {
        if self.rows != self.cols {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = BigRational::one();
        for k in 0..n {
            let pivot = (k..n).find(|&r| !a[r * n + k].is_zero());
            let Some(p) = pivot else {
                return Ok(BigRational::zero());
            };
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                det = -det;
            }
            let pv = a[k * n + k].clone();
            det *= &pv;
            for i in k + 1..n {
                if a[i * n + k].is_zero() {
                    continue;
                }
                let f = &a[i * n + k] / &pv;
                for j in k..n {
                    let delta = &f * &a[k * n + j];
                    a[i * n + j] -= delta;
                }
            }
        }
        Ok(det)
    }

    /// Reduced row echelon form of `[self | rhs]`; returns the augmented data
    /// and the pivot column of each row.
    fn rref(&self, rhs: Option<&[BigRational]>) -> (Vec<BigRational>, usize, Vec<usize>) {
        let acols = self.cols + usize::from(rhs.is_some());
        let mut a = vec![BigRational::zero(); self.rows * acols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                a[i * acols + j] = self.get(i, j).clone();
            }
            if let Some(b) = rhs {
                a[i * acols + self.cols] = b[i].clone();
            }
        }
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            let Some(p) = (row..self.rows).find(|&r| !a[r * acols + col].is_zero()) else {
                continue;
            };
            for j in 0..acols {
                a.swap(row * acols + j, p * acols + j);
            }
            let pv = a[row * acols + col].clone();
            for j in col..acols {
                let v = &a[row * acols + j] / &pv;
                a[row * acols + j] = v;
            }
            for r in 0..self.rows {
                if r != row && !a[r * acols + col].is_zero() {
                    let f = a[r * acols + col].clone();
                    for j in col..acols {
                        let delta = &f * &a[row * acols + j];
                        a[r * acols + j] -= delta;
                    }
                }
            }
            pivots.push(col);
            row += 1;
            if row == self.rows {
                break;
            }
        }
        (a, acols, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref(None).2.len()
    }

    /// One solution of `self * x = b`, or `None` when inconsistent.
    pub fn solve(&self, b: &[BigRational]) -> Result<Option<Vec<BigRational>>> {
        if b.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "rhs length {} vs {} rows",
                b.len(),
                self.rows
            )));
        }
        let (a, acols, pivots) = self.rref(Some(b));
        // inconsistent row: 0 = nonzero
        for r in pivots.len()..self.rows {
            if !a[r * acols + self.cols].is_zero() {
                return Ok(None);
            }
        }
        let mut x = vec![BigRational::zero(); self.cols];
        for (r, &c) in pivots.iter().enumerate() {
            x[c] = a[r * acols + self.cols].clone();
        }
        Ok(Some(x))
    }

    /// A non-trivial kernel vector when one exists.
    pub fn kernel_vector(&self) -> Option<Vec<BigRational>> {
        let (a, acols, pivots) = self.rref(None);
        let free = (0..self.cols).find(|c| !pivots.contains(c))?;
        let mut v = vec![BigRational::zero(); self.cols];
        v[free] = BigRational::one();
        for (r, &c) in pivots.iter().enumerate() {
            v[c] = -a[r * acols + free].clone();
        }
        Some(v)
    }
}

impl std::fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}
