//! Integer-matrix algebra over finitely generated free abelian groups.
//!
//! Twisted-class counts on central-series layers reduce to exact integer
//! linear algebra: `reidemeister_abelian` evaluates `|det(I - M)|`, Smith
//! normal form supplies subgroup indices and integral kernels, and `solve`
//! decides solvability of `M x = b` over the integers.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Dense matrix with arbitrary-precision integer entries, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged row lengths".into()));
        }
        let data = rows
            .iter()
            .flat_map(|row| row.iter().map(|&x| BigInt::from(x)))
            .collect();
        Ok(IntMatrix { rows: r, cols: c, data })
    }

    pub fn from_bigint_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged row lengths".into()));
        }
        let data = rows.into_iter().flatten().collect();
        Ok(IntMatrix { rows: r, cols: c, data })
    }

    /// Stacks column vectors into a matrix; all columns must share a length.
    pub fn from_columns(cols: &[Vec<BigInt>], rows: usize) -> Result<Self> {
        if cols.iter().any(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch(
                "column length differs from ambient rank".into(),
            ));
        }
        let mut m = IntMatrix::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            for (i, x) in col.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        assert!(i < self.rows && j < self.cols, "index out of range");
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        assert!(i < self.rows && j < self.cols, "index out of range");
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.get(i, j) + a * b;
                    out.set(i, j, cur);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Result<Vec<BigInt>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} * vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let mut out = vec![BigInt::zero(); self.rows];
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

    pub fn sub(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch("sub of unequal shapes".into()));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// `I - self`, defined for square matrices.
    pub fn id_minus(&self) -> Result<IntMatrix> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        IntMatrix::identity(self.rows).sub(self)
    }

    pub fn block_diag(blocks: &[IntMatrix]) -> IntMatrix {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = IntMatrix::zeros(rows, cols);
        let (mut ro, mut co) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out.set(ro + i, co + j, b.get(i, j).clone());
                }
            }
            ro += b.rows;
            co += b.cols;
        }
        out
    }

    /// Exact determinant via Bareiss fraction-free elimination.
    pub fn det(&self) -> Result<BigInt> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut a = self.data.clone();
        let mut sign = 1i32;
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k * n + k].is_zero() {
                match (k + 1..n).find(|&r| !a[r * n + k].is_zero()) {
                    Some(r) => {
                        for j in 0..n {
                            a.swap(k * n + j, r * n + j);
                        }
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &a[i * n + j] * &a[k * n + k] - &a[i * n + k] * &a[k * n + j];
                    a[i * n + j] = num / &prev; // exact by Bareiss
                }
                a[i * n + k] = BigInt::zero();
            }
            prev = a[k * n + k].clone();
        }
        let d = a[(n - 1) * n + (n - 1)].clone();
        Ok(if sign < 0 { -d } else { d })
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[i] -= q * row[k]
    fn row_sub(&mut self, i: usize, k: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let delta = q * self.get(k, j);
            if !delta.is_zero() {
                let v = self.get(i, j) - delta;
                self.set(i, j, v);
            }
        }
    }

    /// col[j] -= q * col[k]
    fn col_sub(&mut self, j: usize, k: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let delta = q * self.get(i, k);
            if !delta.is_zero() {
                let v = self.get(i, j) - delta;
                self.set(i, j, v);
            }
        }
    }

    /// row[i] += row[k]
    fn row_add(&mut self, i: usize, k: usize) {
        for j in 0..self.cols {
            let v = self.get(i, j) + self.get(k, j);
            self.set(i, j, v);
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -self.get(i, j);
            self.set(i, j, v);
        }
    }
}

impl std::fmt::Debug for IntMatrix {
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

/// Invertible change of basis on both sides: `u * m * v = s` with `s` in
/// Smith normal form (non-negative diagonal, each entry dividing the next).
pub struct SnfResult {
    pub u: IntMatrix,
    pub s: IntMatrix,
    pub v: IntMatrix,
}

impl SnfResult {
    pub fn diagonal(&self) -> Vec<BigInt> {
        let k = self.s.rows().min(self.s.cols());
        (0..k).map(|i| self.s.get(i, i).clone()).collect()
    }

    /// Non-zero diagonal entries (a prefix, by construction).
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        self.diagonal()
            .into_iter()
            .take_while(|d| !d.is_zero())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors().len()
    }
}

fn smallest_nonzero(m: &IntMatrix, from: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in from..m.rows() {
        for j in from..m.cols() {
            let x = m.get(i, j);
            if x.is_zero() {
                continue;
            }
            match best {
                Some((bi, bj)) if m.get(bi, bj).abs() <= x.abs() => {}
                _ => best = Some((i, j)),
            }
        }
    }
    best
}

/// Smith normal form with transforms.
///
/// Pivot selection always takes the entry of smallest non-zero absolute
/// value in the remaining submatrix, which keeps intermediate growth tame on
/// the small matrices produced by layer actions.
pub fn snf(m: &IntMatrix) -> SnfResult {
    let rows = m.rows();
    let cols = m.cols();
    let mut s = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);

    let t_max = rows.min(cols);
    for t in 0..t_max {
        'reduce: loop {
            let Some((pi, pj)) = smallest_nonzero(&s, t) else {
                break 'reduce; // submatrix is zero; done with all later t too
            };
            s.swap_rows(t, pi);
            u.swap_rows(t, pi);
            s.swap_cols(t, pj);
            v.swap_cols(t, pj);

            // Clear the pivot column, then the pivot row. Floor division
            // leaves remainders strictly smaller than |pivot|, so re-picking
            // the minimal entry makes the pivot shrink until both are clean.
            let mut clean = true;
            for i in t + 1..rows {
                if !s.get(i, t).is_zero() {
                    let q = s.get(i, t).div_floor(s.get(t, t));
                    s.row_sub(i, t, &q);
                    u.row_sub(i, t, &q);
                    if !s.get(i, t).is_zero() {
                        clean = false;
                    }
                }
            }
            for j in t + 1..cols {
                if !s.get(t, j).is_zero() {
                    let q = s.get(t, j).div_floor(s.get(t, t));
                    s.col_sub(j, t, &q);
                    v.col_sub(j, t, &q);
                    if !s.get(t, j).is_zero() {
                        clean = false;
                    }
                }
            }
            if !clean {
                continue 'reduce;
            }

            // Divisibility pass: the pivot must divide every remaining entry;
            // folding an offending row into row t drives the pivot to a gcd.
            let mut offender = None;
            'scan: for i in t + 1..rows {
                for j in t + 1..cols {
                    if !s.get(i, j).mod_floor(s.get(t, t)).is_zero() {
                        offender = Some(i);
                        break 'scan;
                    }
                }
            }
            match offender {
                Some(i) => {
                    s.row_add(t, i);
                    u.row_add(t, i);
                }
                None => break 'reduce,
            }
        }
        if s.get(t, t).is_zero() {
            break;
        }
    }

    for t in 0..t_max {
        if s.get(t, t).is_negative() {
            s.negate_row(t);
            u.negate_row(t);
        }
    }

    SnfResult { u, s, v }
}

/// A twisted-conjugacy class count: a positive integer or infinity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReidNumber {
    Finite(BigUint),
    Infinite,
}

impl ReidNumber {
    pub fn finite(n: u64) -> Self {
        ReidNumber::Finite(BigUint::from(n))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ReidNumber::Infinite)
    }

    /// Multiplication with absorbing infinity.
    pub fn times(&self, other: &ReidNumber) -> ReidNumber {
        match (self, other) {
            (ReidNumber::Finite(a), ReidNumber::Finite(b)) => ReidNumber::Finite(a * b),
            _ => ReidNumber::Infinite,
        }
    }
}

impl std::fmt::Display for ReidNumber {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReidNumber::Finite(n) => write!(f, "{n}"),
            ReidNumber::Infinite => write!(f, "inf"),
        }
    }
}

/// Twisted-class count of an automorphism `M` of `Z^d`: the index of the
/// image of `I - M`, i.e. `|det(I - M)|` when non-zero and infinity when
/// `I - M` is singular.
pub fn reidemeister_abelian(m: &IntMatrix) -> Result<ReidNumber> {
    let d = m.det()?;
    if d.abs() != BigInt::one() {
        return Err(Error::NotUnimodular { det: d.to_string() });
    }
    let dk = m.id_minus()?.det()?;
    if dk.is_zero() {
        Ok(ReidNumber::Infinite)
    } else {
        Ok(ReidNumber::Finite(dk.abs().to_biguint().expect("abs")))
    }
}

/// Does `M v = v` admit a non-trivial solution over the rationals (equivalently
/// over the integers, by clearing denominators)?
pub fn has_fixed_vector(m: &IntMatrix) -> Result<bool> {
    Ok(m.id_minus()?.det()?.is_zero())
}

/// Index of the subgroup of `Z^ambient_rank` generated by `generators`,
/// via the product of the invariant factors; infinite when the span has
/// deficient rank.
pub fn subgroup_index(generators: &[Vec<BigInt>], ambient_rank: usize) -> Result<ReidNumber> {
    if ambient_rank == 0 {
        return Ok(ReidNumber::finite(1));
    }
    let m = IntMatrix::from_columns(generators, ambient_rank)?;
    let r = snf(&m);
    if r.rank() < ambient_rank {
        return Ok(ReidNumber::Infinite);
    }
    let mut idx = BigUint::one();
    for f in r.invariant_factors() {
        idx *= f.to_biguint().expect("invariant factors are non-negative");
    }
    Ok(ReidNumber::Finite(idx))
}

/// Basis of the integral kernel of `M`: the columns of `V` matching the zero
/// columns of the Smith form.
pub fn kernel_basis(m: &IntMatrix) -> Vec<Vec<BigInt>> {
    let r = snf(m);
    (r.rank()..m.cols()).map(|j| r.v.column(j)).collect()
}

/// One integral solution of `M x = b`, if any exists.
pub fn solve(m: &IntMatrix, b: &[BigInt]) -> Result<Option<Vec<BigInt>>> {
    if b.len() != m.rows() {
        return Err(Error::DimensionMismatch(format!(
            "rhs length {} vs {} rows",
            b.len(),
            m.rows()
        )));
    }
    let r = snf(m);
    let c = r.u.mul_vec(b)?;
    let k = m.rows().min(m.cols());
    let mut y = vec![BigInt::zero(); m.cols()];
    for i in 0..m.rows() {
        let s = if i < k { r.s.get(i, i).clone() } else { BigInt::zero() };
        if s.is_zero() {
            if !c[i].is_zero() {
                return Ok(None);
            }
        } else {
            let (q, rem) = c[i].div_rem(&s);
            if !rem.is_zero() {
                return Ok(None);
            }
            y[i] = q;
        }
    }
    Ok(Some(r.v.mul_vec(&y)?))
}
