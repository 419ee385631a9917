//! Automorphisms of `UT_n(R)` in normal form, plus the extra `GL_2`-type
//! automorphisms that only `UT_3` admits.
//!
//! Every automorphism handled here factors as
//!
//! ```text
//!     phi = inn_A . Lambda . sigma^m . psi_D . Delta
//! ```
//!
//! where `Delta` applies a ring automorphism entrywise, `psi_D` conjugates
//! by the diagonal matrix `D = diag(d_1, ..., d_n)`, `sigma` is the flip
//! (antitranspose followed by inversion), `Lambda` is a central map driven
//! by an additive `lambda: R -> R`, and `inn_A` is conjugation by a
//! unitriangular `A`. The factors are applied right to left.

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::lattice::IntMatrix;
use crate::ratmat::RatMatrix;
use crate::rings::{self, mul_matrix, RingAut, RingDescriptor, RingElem};
use crate::unitriangular::UniTriMatrix;

/// An additive endomorphism of `(R, +)`: a matrix on the coefficient
/// lattice, or a scalar when `R` is the rationals.
#[derive(Clone, Debug, PartialEq)]
pub enum LambdaMap {
    Lattice(IntMatrix),
    Scalar(BigRational),
}

impl LambdaMap {
    fn validate(&self, desc: RingDescriptor) -> Result<()> {
        match self {
            LambdaMap::Lattice(m) => {
                let rank = desc.lattice_rank().ok_or_else(|| {
                    Error::InvalidAutomorphism(
                        "a lattice-valued central map needs a lattice ring".into(),
                    )
                })?;
                if m.rows() != rank || m.cols() != rank {
                    return Err(Error::InvalidAutomorphism(format!(
                        "central map must be {rank} x {rank} for this ring"
                    )));
                }
                Ok(())
            }
            LambdaMap::Scalar(_) => {
                if desc.is_field() {
                    Ok(())
                } else {
                    Err(Error::InvalidAutomorphism(
                        "scalar central maps only make sense over a field".into(),
                    ))
                }
            }
        }
    }

    pub fn apply(&self, x: &RingElem) -> Result<RingElem> {
        match self {
            LambdaMap::Lattice(m) => {
                let v = x.to_lattice()?;
                RingElem::from_lattice(x.desc(), &m.mul_vec(&v)?)
            }
            LambdaMap::Scalar(c) => RingElem::from_rational(x.desc(), c * x.a()),
        }
    }
}

/// A normal-form automorphism of `UT_n(R)`. Validated on construction:
/// the `d_i` are invertible, `m` is reduced mod 2, and the central map is
/// shaped for the coefficient ring.
#[derive(Clone, Debug)]
pub struct NormalFormAuto {
    desc: RingDescriptor,
    n: usize,
    d: Vec<RingElem>,
    d_inv: Vec<RingElem>,
    delta: RingAut,
    m: u8,
    lambda: Option<LambdaMap>,
    inner: Option<UniTriMatrix>,
    inner_inv: Option<UniTriMatrix>,
}

impl NormalFormAuto {
    pub fn new(
        desc: RingDescriptor,
        n: usize,
        d: Vec<RingElem>,
        delta: RingAut,
        m: u8,
        lambda: Option<LambdaMap>,
        inner: Option<UniTriMatrix>,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidAutomorphism(format!(
                "automorphism normal form needs n >= 2, got {n}"
            )));
        }
        if d.len() != n {
            return Err(Error::InvalidAutomorphism(format!(
                "diagonal has {} entries, expected {n}",
                d.len()
            )));
        }
        if m > 1 {
            return Err(Error::InvalidAutomorphism(
                "the flip exponent is reduced mod 2; pass 0 or 1".into(),
            ));
        }
        if !rings::ring_automorphisms(desc).contains(&delta) {
            return Err(Error::InvalidAutomorphism(format!(
                "{delta} is not an automorphism of {desc}"
            )));
        }
        let mut d_inv = Vec::with_capacity(n);
        for di in &d {
            if di.desc() != desc {
                return Err(Error::DescriptorMismatch(
                    desc.to_string(),
                    di.desc().to_string(),
                ));
            }
            d_inv.push(di.inverse().map_err(|_| Error::NotAUnit(di.to_string()))?);
        }
        if let Some(lam) = &lambda {
            if n < 3 {
                return Err(Error::InvalidAutomorphism(
                    "central maps need n >= 3 so that the corner is a proper center".into(),
                ));
            }
            lam.validate(desc)?;
        }
        let inner_inv = match &inner {
            None => None,
            Some(a) => {
                if a.desc() != desc || a.n() != n {
                    return Err(Error::InvalidAutomorphism(
                        "inner part must live in the same group".into(),
                    ));
                }
                Some(a.inv())
            }
        };
        Ok(NormalFormAuto {
            desc,
            n,
            d,
            d_inv,
            delta,
            m,
            lambda,
            inner,
            inner_inv,
        })
    }

    /// The common sweep case: no central map, no inner part.
    pub fn diagonal(
        desc: RingDescriptor,
        d: Vec<RingElem>,
        delta: RingAut,
        m: u8,
    ) -> Result<Self> {
        let n = d.len();
        NormalFormAuto::new(desc, n, d, delta, m, None, None)
    }

    pub fn desc(&self) -> RingDescriptor {
        self.desc
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> &[RingElem] {
        &self.d
    }

    pub fn delta(&self) -> RingAut {
        self.delta
    }

    pub fn m(&self) -> u8 {
        self.m
    }

    pub fn lambda(&self) -> Option<&LambdaMap> {
        self.lambda.as_ref()
    }

    pub fn inner(&self) -> Option<&UniTriMatrix> {
        self.inner.as_ref()
    }

    pub fn apply(&self, x: &UniTriMatrix) -> Result<UniTriMatrix> {
        if x.desc() != self.desc {
            return Err(Error::DescriptorMismatch(
                self.desc.to_string(),
                x.desc().to_string(),
            ));
        }
        if x.n() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "automorphism of UT_{} applied to UT_{}",
                self.n,
                x.n()
            )));
        }
        // psi_D . Delta, entry by entry
        let mut y = UniTriMatrix::identity(self.desc, self.n)?;
        for (i, j, e) in x.nonzero_entries() {
            let v = &(&self.d[i - 1] * &e.apply_aut(self.delta)) * &self.d_inv[j - 1];
            y.set_entry(i, j, v)?;
        }
        if self.m == 1 {
            y = y.flip_sigma();
        }
        if let Some(lam) = &self.lambda {
            let mut s = RingElem::zero(self.desc);
            for i in 1..self.n {
                s = &s + y.get(i, i + 1);
            }
            let corner = y.get(1, self.n) + &lam.apply(&s)?;
            y.set_entry(1, self.n, corner)?;
        }
        if let (Some(a), Some(a_inv)) = (&self.inner, &self.inner_inv) {
            y = a.mul(&y)?.mul(a_inv)?;
        }
        Ok(y)
    }

    /// `det(I - M_k)` on the coefficient lattice, computed orbit by orbit
    /// from the cached diagonal inverses; see [`closed_form::layer_det`].
    pub fn layer_det(&self, k: usize) -> Result<num_bigint::BigInt> {
        closed_form::layer_det(&self.d, &self.d_inv, self.delta, self.m, k)
    }

    /// Field version of [`NormalFormAuto::layer_det`].
    pub fn layer_det_rational(&self, k: usize) -> Result<BigRational> {
        closed_form::layer_det_rational(&self.d, &self.d_inv, self.m, k)
    }

    /// For a pure flip automorphism (`m = 1`, no central or inner part) the
    /// square collapses back to the diagonal family:
    /// `phi^2 = psi_A . Delta^2` with `a_r = delta(d_r) d_{n+1-r}^{-1}`.
    pub fn square_flip(&self) -> Result<NormalFormAuto> {
        if self.m != 1 || self.lambda.is_some() || self.inner.is_some() {
            return Err(Error::InvalidAutomorphism(
                "squaring formula applies to plain flip automorphisms only".into(),
            ));
        }
        let a: Vec<RingElem> = (1..=self.n)
            .map(|r| &self.d[r - 1].apply_aut(self.delta) * &self.d_inv[self.n - r])
            .collect();
        NormalFormAuto::new(
            self.desc,
            self.n,
            a,
            self.delta.compose(self.delta),
            0,
            None,
            None,
        )
    }
}

impl std::fmt::Display for NormalFormAuto {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "D=(")?;
        for (i, di) in self.d.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{di}")?;
        }
        write!(f, ") delta={} m={}", self.delta, self.m)?;
        if self.lambda.is_some() {
            write!(f, " +lambda")?;
        }
        if self.inner.is_some() {
            write!(f, " +inner")?;
        }
        Ok(())
    }
}

/// An automorphism of the discrete Heisenberg group `UT_3(R)`, `R = Z` or
/// `Q`, lifting an invertible 2 x 2 matrix on the abelianization. Writing
/// `(a, b, c)` for the matrix with first superdiagonal `(a, b)` and corner
/// `c`, the map sends
///
/// ```text
///     (a, b, c) -> (pa + qb, ra + sb,
///                   C(a,2) pr + C(b,2) qs + ab qr + c det)
/// ```
///
/// with `C(t, 2) = t(t-1)/2`.
#[derive(Clone, Debug)]
pub struct HeisenbergAuto {
    desc: RingDescriptor,
    mat: [RingElem; 4],
}

impl HeisenbergAuto {
    pub fn new(desc: RingDescriptor, mat: [RingElem; 4]) -> Result<Self> {
        if desc.quad_param().is_some() {
            return Err(Error::UnsupportedRing(
                "Heisenberg-type automorphisms are implemented over Z and Q".into(),
            ));
        }
        for e in &mat {
            if e.desc() != desc {
                return Err(Error::DescriptorMismatch(
                    desc.to_string(),
                    e.desc().to_string(),
                ));
            }
        }
        let auto = HeisenbergAuto { desc, mat };
        if !auto.det().is_unit() {
            return Err(Error::NotUnimodular {
                det: auto.det().to_string(),
            });
        }
        Ok(auto)
    }

    pub fn from_rows(desc: RingDescriptor, rows: [[i64; 2]; 2]) -> Result<Self> {
        let e = |v| RingElem::from_int(desc, v);
        HeisenbergAuto::new(
            desc,
            [e(rows[0][0]), e(rows[0][1]), e(rows[1][0]), e(rows[1][1])],
        )
    }

    pub fn desc(&self) -> RingDescriptor {
        self.desc
    }

    pub fn mat(&self) -> &[RingElem; 4] {
        &self.mat
    }

    pub fn det(&self) -> RingElem {
        &(&self.mat[0] * &self.mat[3]) - &(&self.mat[1] * &self.mat[2])
    }

    pub fn trace(&self) -> RingElem {
        &self.mat[0] + &self.mat[3]
    }

    pub fn apply(&self, x: &UniTriMatrix) -> Result<UniTriMatrix> {
        if x.n() != 3 {
            return Err(Error::DimensionMismatch(
                "Heisenberg automorphisms act on UT_3".into(),
            ));
        }
        if x.desc() != self.desc {
            return Err(Error::DescriptorMismatch(
                self.desc.to_string(),
                x.desc().to_string(),
            ));
        }
        let binom2 = |t: &RingElem| -> Result<RingElem> {
            (&(t * t) - t).halve()
        };
        let [p, q, r, s] = &self.mat;
        let (a, b, c) = (x.get(1, 2), x.get(2, 3), x.get(1, 3));
        let a2 = &(p * a) + &(q * b);
        let b2 = &(r * a) + &(s * b);
        let mut c2 = &(&binom2(a)? * p) * r;
        c2 = &c2 + &(&(&binom2(b)? * q) * s);
        c2 = &c2 + &(&(&(a * b) * q) * r);
        c2 = &c2 + &(c * &self.det());
        let mut y = UniTriMatrix::identity(self.desc, 3)?;
        y.set_entry(1, 2, a2)?;
        y.set_entry(2, 3, b2)?;
        y.set_entry(1, 3, c2)?;
        Ok(y)
    }
}

impl std::fmt::Display for HeisenbergAuto {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "M=[[{},{}],[{},{}]]",
            self.mat[0], self.mat[1], self.mat[2], self.mat[3]
        )
    }
}

/// Any automorphism the engine can analyse.
#[derive(Clone, Debug)]
pub enum Automorphism {
    NormalForm(NormalFormAuto),
    Heisenberg(HeisenbergAuto),
}

impl Automorphism {
    pub fn desc(&self) -> RingDescriptor {
        match self {
            Automorphism::NormalForm(a) => a.desc(),
            Automorphism::Heisenberg(a) => a.desc(),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Automorphism::NormalForm(a) => a.n(),
            Automorphism::Heisenberg(_) => 3,
        }
    }

    pub fn apply(&self, x: &UniTriMatrix) -> Result<UniTriMatrix> {
        match self {
            Automorphism::NormalForm(a) => a.apply(x),
            Automorphism::Heisenberg(a) => a.apply(x),
        }
    }

    /// The matrix of the induced action on central-series layer `k`, over
    /// the coefficient lattice. Normal forms use the closed form (central
    /// and inner parts act trivially on every layer); other automorphisms
    /// fall back to the generic computation.
    pub fn layer_action(&self, k: usize) -> Result<IntMatrix> {
        match self {
            Automorphism::NormalForm(a) => match a.m() {
                0 => closed_form::diagonal_layer_action(a.d(), a.delta(), k),
                _ => closed_form::flip_layer_action(a.d(), a.delta(), k),
            },
            Automorphism::Heisenberg(_) => induced_layer_action(self, k),
        }
    }

    /// Rational layer action, for field coefficients.
    pub fn layer_action_rational(&self, k: usize) -> Result<RatMatrix> {
        match self {
            Automorphism::NormalForm(a) => match a.m() {
                0 => closed_form::diagonal_layer_action_rational(a.d(), k),
                _ => closed_form::flip_layer_action_rational(a.d(), k),
            },
            Automorphism::Heisenberg(_) => induced_layer_action_rational(self, k),
        }
    }
}

impl std::fmt::Display for Automorphism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Automorphism::NormalForm(a) => write!(f, "{a}"),
            Automorphism::Heisenberg(a) => write!(f, "{a}"),
        }
    }
}

fn check_layer(n: usize, k: usize) -> Result<()> {
    if n < 2 || k > n - 2 {
        return Err(Error::DimensionMismatch(format!(
            "layer {k} out of range for n = {n}"
        )));
    }
    Ok(())
}

/// Generic layer action: push each lattice basis vector of the layer
/// through the automorphism and read the image coordinates. Works for any
/// series-preserving automorphism and serves as the reference the closed
/// forms are checked against.
pub fn induced_layer_action(auto: &Automorphism, k: usize) -> Result<IntMatrix> {
    let desc = auto.desc();
    let rank = desc
        .lattice_rank()
        .ok_or_else(|| Error::UnsupportedRing("layer lattices need a lattice ring".into()))?;
    let n = auto.n();
    check_layer(n, k)?;
    let dim = (k + 1) * rank;
    let mut cols = Vec::with_capacity(dim);
    for r in 0..=k {
        for t in 0..rank {
            let mut coords = vec![RingElem::zero(desc); k + 1];
            let mut basis = vec![num_bigint::BigInt::zero(); rank];
            basis[t] = num_bigint::BigInt::one();
            coords[r] = RingElem::from_lattice(desc, &basis)?;
            let rep = UniTriMatrix::quotient_rep(&coords, k, n)?;
            let img = auto.apply(&rep)?;
            let mut col = Vec::with_capacity(dim);
            for e in img.quotient_coords(k)? {
                col.extend(e.to_lattice()?);
            }
            cols.push(col);
        }
    }
    IntMatrix::from_columns(&cols, dim)
}

/// Generic layer action over a field: same computation with rational
/// coordinates.
pub fn induced_layer_action_rational(auto: &Automorphism, k: usize) -> Result<RatMatrix> {
    let desc = auto.desc();
    if !desc.is_field() {
        return Err(Error::UnsupportedRing(
            "rational layer actions need field coefficients".into(),
        ));
    }
    let n = auto.n();
    check_layer(n, k)?;
    let dim = k + 1;
    let mut out = RatMatrix::zeros(dim, dim);
    for r in 0..=k {
        let mut coords = vec![RingElem::zero(desc); k + 1];
        coords[r] = RingElem::one(desc);
        let rep = UniTriMatrix::quotient_rep(&coords, k, n)?;
        let img = auto.apply(&rep)?;
        for (i, e) in img.quotient_coords(k)?.iter().enumerate() {
            out.set(i, r, e.a().clone());
        }
    }
    Ok(out)
}

/// Closed forms for the layer actions of normal-form automorphisms, and
/// the per-orbit determinant shortcuts built on them.
///
/// On layer `k` the diagonal part scales coordinate `r` by
/// `d_r d_{n-k-1+r}^{-1}` (composed with the ring automorphism); the flip
/// additionally sends coordinate `r` to slot `k + 2 - r` with a sign.
pub mod closed_form {
    use super::*;
    use num_bigint::BigInt;

    fn coefficient(d: &[RingElem], k: usize, r: usize) -> Result<RingElem> {
        let n = d.len();
        Ok(&d[r - 1] * &d[n - k - 1 + r - 1].inverse()?)
    }

    /// Layer action of `psi_D . Delta` (no flip): block diagonal.
    pub fn diagonal_layer_action(d: &[RingElem], delta: RingAut, k: usize) -> Result<IntMatrix> {
        check_layer(d.len(), k)?;
        let mut blocks = Vec::with_capacity(k + 1);
        for r in 1..=k + 1 {
            blocks.push(mul_matrix(&coefficient(d, k, r)?, delta)?);
        }
        Ok(IntMatrix::block_diag(&blocks))
    }

    /// Layer action of `sigma . psi_D . Delta`: coordinate `r` lands on
    /// coordinate `k + 2 - r`, negated.
    pub fn flip_layer_action(d: &[RingElem], delta: RingAut, k: usize) -> Result<IntMatrix> {
        check_layer(d.len(), k)?;
        let rank = d[0]
            .desc()
            .lattice_rank()
            .ok_or_else(|| Error::UnsupportedRing("layer lattices need a lattice ring".into()))?;
        let dim = (k + 1) * rank;
        let mut out = IntMatrix::zeros(dim, dim);
        for r in 1..=k + 1 {
            let block = mul_matrix(&coefficient(d, k, r)?.negate(), delta)?;
            let row0 = (k + 1 - r) * rank;
            let col0 = (r - 1) * rank;
            for i in 0..rank {
                for j in 0..rank {
                    out.set(row0 + i, col0 + j, block.get(i, j).clone());
                }
            }
        }
        Ok(out)
    }

    pub fn diagonal_layer_action_rational(d: &[RingElem], k: usize) -> Result<RatMatrix> {
        check_layer(d.len(), k)?;
        let mut out = RatMatrix::zeros(k + 1, k + 1);
        for r in 1..=k + 1 {
            out.set(r - 1, r - 1, coefficient(d, k, r)?.a().clone());
        }
        Ok(out)
    }

    pub fn flip_layer_action_rational(d: &[RingElem], k: usize) -> Result<RatMatrix> {
        check_layer(d.len(), k)?;
        let mut out = RatMatrix::zeros(k + 1, k + 1);
        for r in 1..=k + 1 {
            out.set(k + 1 - r, r - 1, -coefficient(d, k, r)?.a());
        }
        Ok(out)
    }

    fn coeff_cached(d: &[RingElem], d_inv: &[RingElem], k: usize, r: usize) -> RingElem {
        let n = d.len();
        &d[r - 1] * &d_inv[n - k - 1 + r - 1]
    }

    /// `det(I - M_k)` for a normal-form automorphism, computed orbit by
    /// orbit without materialising the layer matrix. For the diagonal
    /// family the factors are `det(I - C_r)`; with the flip, coordinates
    /// pair up into two-cycles contributing `det(I - C_r C_{k+2-r})`.
    pub fn layer_det(
        d: &[RingElem],
        d_inv: &[RingElem],
        delta: RingAut,
        m: u8,
        k: usize,
    ) -> Result<BigInt> {
        check_layer(d.len(), k)?;
        let mut det = BigInt::one();
        if m == 0 {
            for r in 1..=k + 1 {
                let c = mul_matrix(&coeff_cached(d, d_inv, k, r), delta)?;
                det *= c.id_minus()?.det()?;
                if det.is_zero() {
                    break;
                }
            }
        } else {
            for r in 1..=k + 1 {
                let partner = k + 2 - r;
                if r > partner {
                    continue;
                }
                let cr = mul_matrix(&coeff_cached(d, d_inv, k, r).negate(), delta)?;
                let factor = if r == partner {
                    cr.id_minus()?.det()?
                } else {
                    let cp = mul_matrix(&coeff_cached(d, d_inv, k, partner).negate(), delta)?;
                    cr.mul(&cp)?.id_minus()?.det()?
                };
                det *= factor;
                if det.is_zero() {
                    break;
                }
            }
        }
        Ok(det)
    }

    /// Field version of [`layer_det`].
    pub fn layer_det_rational(
        d: &[RingElem],
        d_inv: &[RingElem],
        m: u8,
        k: usize,
    ) -> Result<BigRational> {
        check_layer(d.len(), k)?;
        let one = BigRational::one();
        let mut det = BigRational::one();
        if m == 0 {
            for r in 1..=k + 1 {
                det *= &one - coeff_cached(d, d_inv, k, r).a();
            }
        } else {
            for r in 1..=k + 1 {
                let partner = k + 2 - r;
                if r > partner {
                    continue;
                }
                let cr = -coeff_cached(d, d_inv, k, r).a();
                det *= if r == partner {
                    &one - &cr
                } else {
                    let cp = -coeff_cached(d, d_inv, k, partner).a();
                    &one - &(&cr * &cp)
                };
            }
        }
        Ok(det)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn z() -> RingDescriptor {
        RingDescriptor::integers()
    }

    fn zi(v: i64) -> RingElem {
        RingElem::from_int(z(), v)
    }

    fn ones(desc: RingDescriptor, n: usize) -> Vec<RingElem> {
        vec![RingElem::one(desc); n]
    }

    #[test]
    fn diagonal_part_scales_entries() {
        // D = (1, -1, 1): T_{1,2}(x) -> T_{1,2}(-x), T_{1,3} fixed
        let d = vec![zi(1), zi(-1), zi(1)];
        let phi = NormalFormAuto::diagonal(z(), d, RingAut::Id, 0).unwrap();
        let x = UniTriMatrix::transvection(z(), 3, 1, 2, zi(4)).unwrap();
        assert_eq!(
            phi.apply(&x).unwrap(),
            UniTriMatrix::transvection(z(), 3, 1, 2, zi(-4)).unwrap()
        );
        let c = UniTriMatrix::transvection(z(), 3, 1, 3, zi(4)).unwrap();
        assert_eq!(phi.apply(&c).unwrap(), c);
    }

    #[test]
    fn central_map_adds_to_the_corner() {
        let lam = LambdaMap::Lattice(IntMatrix::from_rows(&[vec![2]]).unwrap());
        let phi =
            NormalFormAuto::new(z(), 3, ones(z(), 3), RingAut::Id, 0, Some(lam), None).unwrap();
        let mut x = UniTriMatrix::identity(z(), 3).unwrap();
        x.set_entry(1, 2, zi(3)).unwrap();
        x.set_entry(2, 3, zi(5)).unwrap();
        let y = phi.apply(&x).unwrap();
        // corner picks up 2 * (3 + 5)
        assert_eq!(y.get(1, 3), &zi(16));
        assert_eq!(y.get(1, 2), &zi(3));
    }

    #[test]
    fn flip_in_ut3_has_the_expected_formula() {
        // sigma(a, b, c) = (-b, -a, ab - c)
        let phi = NormalFormAuto::diagonal(z(), ones(z(), 3), RingAut::Id, 1).unwrap();
        let mut x = UniTriMatrix::identity(z(), 3).unwrap();
        x.set_entry(1, 2, zi(2)).unwrap();
        x.set_entry(2, 3, zi(7)).unwrap();
        x.set_entry(1, 3, zi(4)).unwrap();
        let y = phi.apply(&x).unwrap();
        assert_eq!(y.get(1, 2), &zi(-7));
        assert_eq!(y.get(2, 3), &zi(-2));
        assert_eq!(y.get(1, 3), &zi(10));
    }

    #[test]
    fn invalid_normal_forms_are_rejected() {
        // non-unit diagonal entry
        assert!(matches!(
            NormalFormAuto::diagonal(z(), vec![zi(1), zi(2), zi(1)], RingAut::Id, 0),
            Err(Error::NotAUnit(_))
        ));
        // conjugation is not an automorphism of Z
        assert!(NormalFormAuto::diagonal(z(), ones(z(), 3), RingAut::Conj, 0).is_err());
        // flip exponent out of range
        assert!(NormalFormAuto::diagonal(z(), ones(z(), 3), RingAut::Id, 2).is_err());
        // central map over Z must be a 1 x 1 lattice matrix
        let bad = LambdaMap::Lattice(IntMatrix::identity(2));
        assert!(NormalFormAuto::new(z(), 3, ones(z(), 3), RingAut::Id, 0, Some(bad), None).is_err());
    }

    #[test]
    fn heisenberg_matches_layer_actions() {
        let phi = HeisenbergAuto::from_rows(z(), [[1, 1], [1, 0]]).unwrap();
        let auto = Automorphism::Heisenberg(phi);
        let top = auto.layer_action(1).unwrap();
        assert_eq!(top, IntMatrix::from_rows(&[vec![1, 1], vec![1, 0]]).unwrap());
        let center = auto.layer_action(0).unwrap();
        assert_eq!(center, IntMatrix::from_rows(&[vec![-1]]).unwrap());
    }

    #[test]
    fn heisenberg_rejects_singular_matrices() {
        assert!(matches!(
            HeisenbergAuto::from_rows(z(), [[2, 0], [0, 1]]),
            Err(Error::NotUnimodular { .. })
        ));
        assert!(HeisenbergAuto::from_rows(RingDescriptor::gaussian(), [[1, 0], [0, 1]]).is_err());
        // over Q any non-zero determinant is allowed
        assert!(HeisenbergAuto::from_rows(RingDescriptor::rationals(), [[2, 0], [0, 3]]).is_ok());
    }

    fn elem_strategy(desc: RingDescriptor) -> BoxedStrategy<RingElem> {
        let rank = desc.lattice_rank().unwrap_or(1);
        prop::collection::vec(-6i64..=6, rank)
            .prop_map(move |v| {
                RingElem::from_coords(desc, v[0], *v.get(1).unwrap_or(&0)).unwrap()
            })
            .boxed()
    }

    fn ut_strategy(desc: RingDescriptor, n: usize) -> BoxedStrategy<UniTriMatrix> {
        prop::collection::vec(elem_strategy(desc), n * (n - 1) / 2)
            .prop_map(move |vals| {
                let mut m = UniTriMatrix::identity(desc, n).unwrap();
                let mut it = vals.into_iter();
                for i in 1..n {
                    for j in i + 1..=n {
                        m.set_entry(i, j, it.next().unwrap()).unwrap();
                    }
                }
                m
            })
            .boxed()
    }

    fn normal_form_strategy(
        desc: RingDescriptor,
        n: usize,
        with_extras: bool,
    ) -> BoxedStrategy<NormalFormAuto> {
        let us = rings::units(desc, 8).unwrap().list;
        let auts = rings::ring_automorphisms(desc);
        let rank = desc.lattice_rank().unwrap();
        let lam = prop::collection::vec(-4i64..=4, rank * rank);
        (
            prop::collection::vec(0..us.len(), n),
            0..auts.len(),
            0u8..=1,
            lam,
            ut_strategy(desc, n),
            any::<bool>(),
            any::<bool>(),
        )
            .prop_map(move |(di, ai, m, lam, inner, use_lam, use_inner)| {
                let d: Vec<_> = di.iter().map(|&i| us[i].clone()).collect();
                let lambda = (with_extras && use_lam).then(|| {
                    let rows: Vec<Vec<i64>> = lam.chunks(rank).map(|c| c.to_vec()).collect();
                    LambdaMap::Lattice(IntMatrix::from_rows(&rows).unwrap())
                });
                let inner = (with_extras && use_inner).then_some(inner);
                NormalFormAuto::new(desc, n, d, auts[ai], m, lambda, inner).unwrap()
            })
            .boxed()
    }

    /// Random elements of `GL_2(Z)` as short products of elementary
    /// matrices, so no rejection sampling is needed.
    fn gl2z_strategy() -> impl Strategy<Value = [i64; 4]> {
        (-3i64..=3, -3i64..=3, -3i64..=3, any::<bool>()).prop_map(|(t1, t2, t3, neg)| {
            // [[1,t1],[0,1]] * [[1,0],[t2,1]] * [[1,t3],[0,1]], maybe negated
            let s = if neg { -1 } else { 1 };
            [
                s * (1 + t1 * t2),
                s * ((1 + t1 * t2) * t3 + t1),
                t2,
                t2 * t3 + 1,
            ]
        })
    }

    fn descs() -> Vec<RingDescriptor> {
        vec![
            z(),
            RingDescriptor::gaussian(),
            RingDescriptor::quadratic(2).unwrap(),
            RingDescriptor::quadratic(-5).unwrap(),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn normal_forms_are_homomorphisms(
            (phi, x, y) in (0usize..4, 3usize..=5).prop_flat_map(|(di, n)| {
                let desc = descs()[di];
                (
                    normal_form_strategy(desc, n, true),
                    ut_strategy(desc, n),
                    ut_strategy(desc, n),
                )
            })
        ) {
            let lhs = phi.apply(&x.mul(&y).unwrap()).unwrap();
            let rhs = phi.apply(&x).unwrap().mul(&phi.apply(&y).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn heisenberg_maps_are_homomorphisms(
            (m, x, y) in (
                gl2z_strategy(),
                ut_strategy(RingDescriptor::integers(), 3),
                ut_strategy(RingDescriptor::integers(), 3),
            )
        ) {
            let phi = HeisenbergAuto::from_rows(z(), [[m[0], m[1]], [m[2], m[3]]]).unwrap();
            let lhs = phi.apply(&x.mul(&y).unwrap()).unwrap();
            let rhs = phi.apply(&x).unwrap().mul(&phi.apply(&y).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn closed_forms_match_generic_layer_actions(
            (phi, k) in (0usize..4, 3usize..=5).prop_flat_map(|(di, n)| {
                (normal_form_strategy(descs()[di], n, true), 0..=n - 2)
            })
        ) {
            let auto = Automorphism::NormalForm(phi);
            let closed = auto.layer_action(k).unwrap();
            let generic = induced_layer_action(&auto, k).unwrap();
            prop_assert_eq!(&closed, &generic);
            // and the orbit determinant shortcut agrees with the matrix det
            if let Automorphism::NormalForm(nf) = &auto {
                let quick = nf.layer_det(k).unwrap();
                prop_assert_eq!(quick, closed.id_minus().unwrap().det().unwrap());
            }
        }

        #[test]
        fn squaring_a_flip_gives_the_diagonal_family(
            (phi, x) in (0usize..4, 3usize..=5).prop_flat_map(|(di, n)| {
                let desc = descs()[di];
                let flip = normal_form_strategy(desc, n, false)
                    .prop_filter_map("flips only", |p| {
                        (p.m() == 1).then_some(p)
                    });
                (flip, ut_strategy(desc, n))
            })
        ) {
            let sq = phi.square_flip().unwrap();
            prop_assert_eq!(sq.m(), 0);
            let twice = phi.apply(&phi.apply(&x).unwrap()).unwrap();
            prop_assert_eq!(sq.apply(&x).unwrap(), twice);
        }

        #[test]
        fn rational_layer_actions_match(
            (phi, k, x) in (3usize..=5).prop_flat_map(|n| {
                let q = RingDescriptor::rationals();
                let d = prop::collection::vec((-5i64..=5).prop_filter("units", |v| *v != 0), n);
                let phi = (d, 0u8..=1).prop_map(move |(d, m)| {
                    let d = d.into_iter().map(|v| RingElem::from_int(q, v)).collect();
                    NormalFormAuto::diagonal(q, d, RingAut::Id, m).unwrap()
                });
                (phi, 0..=n - 2, ut_strategy(q, n))
            })
        ) {
            let auto = Automorphism::NormalForm(phi.clone());
            let closed = auto.layer_action_rational(k).unwrap();
            let generic = induced_layer_action_rational(&auto, k).unwrap();
            for i in 0..closed.rows() {
                for j in 0..closed.cols() {
                    prop_assert_eq!(closed.get(i, j), generic.get(i, j));
                }
            }
            let quick = phi.layer_det_rational(k).unwrap();
            prop_assert_eq!(quick, closed.id_minus().unwrap().det().unwrap());
            // the action must transport coordinates of actual images
            let coords = x.quotient_coords(k);
            if let Ok(c) = coords {
                let v: Vec<_> = c.iter().map(|e| e.a().clone()).collect();
                let img = auto.apply(&x).unwrap().quotient_coords(k).unwrap();
                let want: Vec<_> = img.iter().map(|e| e.a().clone()).collect();
                prop_assert_eq!(closed.mul_vec(&v).unwrap(), want);
            }
        }

        #[test]
        fn layer_actions_transport_coordinates(
            (phi, k, coords) in (0usize..4, 3usize..=5).prop_flat_map(|(di, n)| {
                let desc = descs()[di];
                (0..=n - 2).prop_flat_map(move |k| {
                    (
                        normal_form_strategy(desc, n, true),
                        Just(k),
                        prop::collection::vec(elem_strategy(desc), k + 1),
                    )
                })
            })
        ) {
            let n = phi.n();
            let auto = Automorphism::NormalForm(phi);
            let action = auto.layer_action(k).unwrap();
            let rep = UniTriMatrix::quotient_rep(&coords, k, n).unwrap();
            let img = auto.apply(&rep).unwrap().quotient_coords(k).unwrap();
            let mut v: Vec<BigInt> = Vec::new();
            for e in &coords {
                v.extend(e.to_lattice().unwrap());
            }
            let mut want: Vec<BigInt> = Vec::new();
            for e in &img {
                want.extend(e.to_lattice().unwrap());
            }
            prop_assert_eq!(action.mul_vec(&v).unwrap(), want);
        }
    }
}
