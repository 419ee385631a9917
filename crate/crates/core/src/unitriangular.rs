//! Upper unitriangular matrices over a coefficient ring: the group
//! `UT_n(R)`, its upper central series, and the coordinates of the series
//! quotients.
//!
//! Level `k` of the series consists of the matrices supported on the last
//! `k` superdiagonals; the quotient of consecutive levels is additively a
//! direct sum of copies of `R`, read off a single superdiagonal by
//! `quotient_coords` / `quotient_rep`.

use crate::error::{Error, Result};
use crate::rings::{RingDescriptor, RingElem};

/// A unitriangular `n x n` matrix; only the strict upper triangle is stored.
/// Entry indices are 1-based, matching the usual `T_{i,j}` notation.
#[derive(Clone, PartialEq, Eq)]
pub struct UniTriMatrix {
    n: usize,
    desc: RingDescriptor,
    entries: Vec<RingElem>,
}

fn tri_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(1 <= i && i < j && j <= n);
    (i - 1) * (2 * n - i) / 2 + (j - i - 1)
}

impl UniTriMatrix {
    pub fn identity(desc: RingDescriptor, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionMismatch(format!(
                "unitriangular groups need n >= 2, got {n}"
            )));
        }
        Ok(UniTriMatrix {
            n,
            desc,
            entries: vec![RingElem::zero(desc); n * (n - 1) / 2],
        })
    }

    /// The transvection `I + x E_{i,j}`.
    pub fn transvection(desc: RingDescriptor, n: usize, i: usize, j: usize, x: RingElem) -> Result<Self> {
        let mut m = UniTriMatrix::identity(desc, n)?;
        m.set_entry(i, j, x)?;
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn desc(&self) -> RingDescriptor {
        self.desc
    }

    /// Strict upper entry at 1-based `(i, j)`, `i < j`.
    pub fn get(&self, i: usize, j: usize) -> &RingElem {
        &self.entries[tri_index(self.n, i, j)]
    }

    pub fn set_entry(&mut self, i: usize, j: usize, x: RingElem) -> Result<()> {
        if !(1 <= i && i < j && j <= self.n) {
            return Err(Error::IndexOutOfRange { n: self.n, i, j });
        }
        if x.desc() != self.desc {
            return Err(Error::DescriptorMismatch(
                self.desc.to_string(),
                x.desc().to_string(),
            ));
        }
        self.entries[tri_index(self.n, i, j)] = x;
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        self.entries.iter().all(RingElem::is_zero)
    }

    /// Iterates the non-zero strict upper entries as `(i, j, value)`.
    pub fn nonzero_entries(&self) -> impl Iterator<Item = (usize, usize, &RingElem)> {
        let n = self.n;
        (1..n).flat_map(move |i| (i + 1..=n).map(move |j| (i, j)))
            .filter_map(move |(i, j)| {
                let e = self.get(i, j);
                (!e.is_zero()).then_some((i, j, e))
            })
    }

    pub fn mul(&self, other: &UniTriMatrix) -> Result<UniTriMatrix> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "matrix sizes {} vs {}",
                self.n, other.n
            )));
        }
        if self.desc != other.desc {
            return Err(Error::DescriptorMismatch(
                self.desc.to_string(),
                other.desc.to_string(),
            ));
        }
        let mut out = UniTriMatrix::identity(self.desc, self.n)?;
        for i in 1..self.n {
            for j in i + 1..=self.n {
                // diagonal terms contribute both factors' own entries
                let mut s = self.get(i, j) + other.get(i, j);
                for t in i + 1..j {
                    let a = self.get(i, t);
                    if a.is_zero() {
                        continue;
                    }
                    let b = other.get(t, j);
                    if !b.is_zero() {
                        s = &s + &(a * b);
                    }
                }
                out.set_entry(i, j, s)?;
            }
        }
        Ok(out)
    }

    /// Group inverse, by back-substitution along superdiagonals.
    pub fn inv(&self) -> UniTriMatrix {
        let n = self.n;
        let mut out = UniTriMatrix::identity(self.desc, n).expect("n validated");
        for s in 1..n {
            for i in 1..=n - s {
                let j = i + s;
                // (X Y)_{i,j} = 0 with Y_{j,j} = 1
                let mut v = self.get(i, j).clone();
                for t in i + 1..j {
                    let a = self.get(i, t);
                    if a.is_zero() {
                        continue;
                    }
                    let b = out.get(t, j);
                    if !b.is_zero() {
                        v = &v + &(a * b);
                    }
                }
                out.set_entry(i, j, v.negate()).expect("index in range");
            }
        }
        out
    }

    pub fn commutator(&self, other: &UniTriMatrix) -> Result<UniTriMatrix> {
        self.mul(other)?.mul(&self.inv())?.mul(&other.inv())
    }

    /// The smallest central-series level containing this matrix: 0 for the
    /// identity, `n - s` when the lowest occupied superdiagonal is `s`.
    pub fn central_level(&self) -> usize {
        let mut lowest = None;
        for (i, j, _) in self.nonzero_entries() {
            let s = j - i;
            lowest = Some(lowest.map_or(s, |cur: usize| cur.min(s)));
        }
        match lowest {
            None => 0,
            Some(s) => self.n - s,
        }
    }

    /// Coordinates of the image in the quotient of level `k + 1` by level
    /// `k`: the `k + 1` entries on superdiagonal `n - k - 1`. Requires the
    /// matrix to lie in level `k + 1`.
    pub fn quotient_coords(&self, k: usize) -> Result<Vec<RingElem>> {
        if k > self.n - 2 {
            return Err(Error::DimensionMismatch(format!(
                "layer {k} out of range for n = {}",
                self.n
            )));
        }
        if self.central_level() > k + 1 {
            return Err(Error::NotInLevel { level: k + 1 });
        }
        let s = self.n - k - 1;
        Ok((1..=k + 1).map(|r| self.get(r, r + s).clone()).collect())
    }

    /// The canonical section of `quotient_coords`: places `v` on
    /// superdiagonal `n - k - 1`.
    pub fn quotient_rep(v: &[RingElem], k: usize, n: usize) -> Result<UniTriMatrix> {
        if v.len() != k + 1 {
            return Err(Error::DimensionMismatch(format!(
                "layer {k} needs {} coordinates, got {}",
                k + 1,
                v.len()
            )));
        }
        if n < 2 || k > n - 2 {
            return Err(Error::DimensionMismatch(format!(
                "layer {k} out of range for n = {n}"
            )));
        }
        let desc = v[0].desc();
        let mut m = UniTriMatrix::identity(desc, n)?;
        let s = n - k - 1;
        for (r, x) in v.iter().enumerate() {
            m.set_entry(r + 1, r + 1 + s, x.clone())?;
        }
        Ok(m)
    }

    /// Reflection along the antidiagonal: entry `(i, j)` moves to
    /// `(n+1-j, n+1-i)`. An antiautomorphism of the group.
    pub fn antitranspose(&self) -> UniTriMatrix {
        let n = self.n;
        let mut out = UniTriMatrix::identity(self.desc, n).expect("n validated");
        for (i, j, e) in self.nonzero_entries() {
            out.set_entry(n + 1 - j, n + 1 - i, e.clone())
                .expect("index in range");
        }
        out
    }

    /// The flip automorphism: antitranspose followed by inversion. An
    /// involutive group automorphism of `UT_n(R)`.
    pub fn flip_sigma(&self) -> UniTriMatrix {
        self.antitranspose().inv()
    }
}

impl std::fmt::Debug for UniTriMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 1..=self.n {
            write!(f, "[")?;
            for j in 1..=self.n {
                if j > 1 {
                    write!(f, ", ")?;
                }
                match i.cmp(&j) {
                    std::cmp::Ordering::Less => write!(f, "{}", self.get(i, j))?,
                    std::cmp::Ordering::Equal => write!(f, "1")?,
                    std::cmp::Ordering::Greater => write!(f, "0")?,
                }
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}
