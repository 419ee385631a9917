//! Coefficient rings: the integers, the rationals, and quadratic extensions
//! `Z[w]` with `w^2 = d` for a square-free integer `d` (real for `d > 1`,
//! imaginary for `d < 0`).
//!
//! Elements are coordinate pairs `a + b*w` over the basis `{1, w}` with
//! exact rational coordinates; for `Z` and `Z[w]` the coordinates stay
//! integral, which `to_lattice` relies on.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::IntMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RingKind {
    Integers,
    Rationals,
    Quadratic,
}

/// Which ring an element lives in. `d` is meaningful only for the quadratic
/// kind and is validated to be square-free and different from 0 and 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RingDescriptor {
    kind: RingKind,
    d: i64,
}

fn is_square_free(d: i64) -> bool {
    let mut n = d.unsigned_abs();
    if n == 0 {
        return false;
    }
    let mut p = 2u64;
    while p * p <= n {
        if n % (p * p) == 0 {
            return false;
        }
        while n % p == 0 {
            n /= p;
        }
        p += 1;
    }
    true
}

impl RingDescriptor {
    pub fn integers() -> Self {
        RingDescriptor {
            kind: RingKind::Integers,
            d: 0,
        }
    }

    pub fn rationals() -> Self {
        RingDescriptor {
            kind: RingKind::Rationals,
            d: 0,
        }
    }

    pub fn quadratic(d: i64) -> Result<Self> {
        if d == 0 || d == 1 || !is_square_free(d) {
            return Err(Error::InvalidRing(format!(
                "quadratic parameter must be square-free and not 0 or 1, got {d}"
            )));
        }
        Ok(RingDescriptor {
            kind: RingKind::Quadratic,
            d,
        })
    }

    /// Gaussian integers `Z[i]`.
    pub fn gaussian() -> Self {
        Self::quadratic(-1).expect("-1 is square-free")
    }

    pub fn kind(&self) -> RingKind {
        self.kind
    }

    /// The square of the adjoined element, for quadratic rings.
    pub fn quad_param(&self) -> Option<i64> {
        (self.kind == RingKind::Quadratic).then_some(self.d)
    }

    pub fn is_field(&self) -> bool {
        self.kind == RingKind::Rationals
    }

    /// Rank of the additive group as a free abelian group (`None` for `Q`).
    pub fn lattice_rank(&self) -> Option<usize> {
        match self.kind {
            RingKind::Integers => Some(1),
            RingKind::Quadratic => Some(2),
            RingKind::Rationals => None,
        }
    }

    /// Parses `"Z"`, `"Q"`, `"Z[sqrt,d]"` (d > 1) or `"Z[isqrt,p]"` (p >= 1;
    /// p = 1 gives the Gaussian integers).
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "Z" => return Ok(Self::integers()),
            "Q" => return Ok(Self::rationals()),
            _ => {}
        }
        let inner = s
            .strip_prefix("Z[")
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("unrecognized ring: {s:?}")))?;
        let (name, param) = inner
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("unrecognized ring: {s:?}")))?;
        let p: i64 = param
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad ring parameter: {param:?}")))?;
        match name.trim() {
            "sqrt" if p > 1 => Self::quadratic(p),
            "sqrt" => Err(Error::InvalidRing(format!(
                "real quadratic parameter must exceed 1, got {p}"
            ))),
            "isqrt" if p >= 1 => Self::quadratic(-p),
            "isqrt" => Err(Error::InvalidRing(format!(
                "imaginary quadratic parameter must be positive, got {p}"
            ))),
            other => Err(Error::Parse(format!("unrecognized ring kind: {other:?}"))),
        }
    }
}

impl std::fmt::Display for RingDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            RingKind::Integers => write!(f, "Z"),
            RingKind::Rationals => write!(f, "Q"),
            RingKind::Quadratic if self.d > 0 => write!(f, "Z[sqrt,{}]", self.d),
            RingKind::Quadratic => write!(f, "Z[isqrt,{}]", -self.d),
        }
    }
}

/// A ring automorphism of the coefficient ring: identity, or coefficient
/// conjugation `a + b*w -> a - b*w` on quadratic rings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RingAut {
    Id,
    Conj,
}

impl RingAut {
    pub fn compose(self, other: RingAut) -> RingAut {
        if self == other {
            RingAut::Id
        } else {
            RingAut::Conj
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "id" => Ok(RingAut::Id),
            "conj" => Ok(RingAut::Conj),
            other => Err(Error::Parse(format!("unknown ring automorphism: {other:?}"))),
        }
    }
}

impl std::fmt::Display for RingAut {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RingAut::Id => write!(f, "id"),
            RingAut::Conj => write!(f, "conj"),
        }
    }
}

/// All ring automorphisms fixing 1: trivial for `Z` and `Q`, and `{id, conj}`
/// for quadratic rings.
pub fn ring_automorphisms(desc: RingDescriptor) -> Vec<RingAut> {
    match desc.kind() {
        RingKind::Quadratic => vec![RingAut::Id, RingAut::Conj],
        _ => vec![RingAut::Id],
    }
}

/// An element `a + b*w` of the ring described by `desc`.
#[derive(Clone, PartialEq, Eq)]
pub struct RingElem {
    desc: RingDescriptor,
    a: BigRational,
    b: BigRational,
}

fn int_rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

impl RingElem {
    pub fn new(desc: RingDescriptor, a: BigRational, b: BigRational) -> Result<Self> {
        match desc.kind() {
            RingKind::Rationals if !b.is_zero() => Err(Error::InvalidRing(
                "rational elements have no w-coordinate".into(),
            )),
            RingKind::Integers if !b.is_zero() => Err(Error::InvalidRing(
                "integer elements have no w-coordinate".into(),
            )),
            RingKind::Integers if !a.is_integer() => Err(Error::InvalidRing(format!(
                "not an integer: {a}"
            ))),
            RingKind::Quadratic if !a.is_integer() || !b.is_integer() => Err(Error::InvalidRing(
                format!("quadratic coordinates must be integral: {a}, {b}"),
            )),
            _ => Ok(RingElem { desc, a, b }),
        }
    }

    pub fn from_int(desc: RingDescriptor, v: i64) -> Self {
        RingElem {
            desc,
            a: int_rat(v),
            b: BigRational::zero(),
        }
    }

    pub fn from_bigint(desc: RingDescriptor, v: BigInt) -> Self {
        RingElem {
            desc,
            a: BigRational::from_integer(v),
            b: BigRational::zero(),
        }
    }

    /// `a + b*w` from integer coordinates (quadratic rings).
    pub fn from_coords(desc: RingDescriptor, a: i64, b: i64) -> Result<Self> {
        RingElem::new(desc, int_rat(a), int_rat(b))
    }

    pub fn from_rational(desc: RingDescriptor, r: BigRational) -> Result<Self> {
        RingElem::new(desc, r, BigRational::zero())
    }

    pub fn zero(desc: RingDescriptor) -> Self {
        RingElem::from_int(desc, 0)
    }

    pub fn one(desc: RingDescriptor) -> Self {
        RingElem::from_int(desc, 1)
    }

    pub fn omega(desc: RingDescriptor) -> Result<Self> {
        if desc.kind() != RingKind::Quadratic {
            return Err(Error::InvalidRing("w exists only in quadratic rings".into()));
        }
        RingElem::new(desc, BigRational::zero(), BigRational::one())
    }

    pub fn desc(&self) -> RingDescriptor {
        self.desc
    }

    pub fn a(&self) -> &BigRational {
        &self.a
    }

    pub fn b(&self) -> &BigRational {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    fn check_desc(&self, other: &RingElem) -> Result<()> {
        if self.desc != other.desc {
            return Err(Error::DescriptorMismatch(
                self.desc.to_string(),
                other.desc.to_string(),
            ));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &RingElem) -> Result<RingElem> {
        self.check_desc(other)?;
        Ok(RingElem {
            desc: self.desc,
            a: &self.a + &other.a,
            b: &self.b + &other.b,
        })
    }

    pub fn checked_sub(&self, other: &RingElem) -> Result<RingElem> {
        self.check_desc(other)?;
        Ok(RingElem {
            desc: self.desc,
            a: &self.a - &other.a,
            b: &self.b - &other.b,
        })
    }

    pub fn checked_mul(&self, other: &RingElem) -> Result<RingElem> {
        self.check_desc(other)?;
        if self.desc.kind() != RingKind::Quadratic {
            return Ok(RingElem {
                desc: self.desc,
                a: &self.a * &other.a,
                b: BigRational::zero(),
            });
        }
        let d = int_rat(self.desc.d);
        // (a1 + b1 w)(a2 + b2 w) = (a1 a2 + d b1 b2) + (a1 b2 + b1 a2) w
        Ok(RingElem {
            desc: self.desc,
            a: &self.a * &other.a + d * &self.b * &other.b,
            b: &self.a * &other.b + &self.b * &other.a,
        })
    }

    pub fn negate(&self) -> RingElem {
        RingElem {
            desc: self.desc,
            a: -&self.a,
            b: -&self.b,
        }
    }

    /// Field norm `a^2 - d b^2` for quadratic rings; the sole coordinate
    /// otherwise.
    pub fn norm(&self) -> BigRational {
        match self.desc.kind() {
            RingKind::Quadratic => &self.a * &self.a - int_rat(self.desc.d) * &self.b * &self.b,
            _ => self.a.clone(),
        }
    }

    pub fn conj(&self) -> RingElem {
        match self.desc.kind() {
            RingKind::Quadratic => RingElem {
                desc: self.desc,
                a: self.a.clone(),
                b: -&self.b,
            },
            _ => self.clone(),
        }
    }

    pub fn apply_aut(&self, aut: RingAut) -> RingElem {
        match aut {
            RingAut::Id => self.clone(),
            RingAut::Conj => self.conj(),
        }
    }

    pub fn is_unit(&self) -> bool {
        match self.desc.kind() {
            RingKind::Rationals => !self.is_zero(),
            RingKind::Integers => self.a.abs().is_one(),
            RingKind::Quadratic => self.norm().abs().is_one(),
        }
    }

    pub fn inverse(&self) -> Result<RingElem> {
        if self.is_zero() {
            return Err(Error::ZeroDivision);
        }
        match self.desc.kind() {
            RingKind::Rationals => Ok(RingElem {
                desc: self.desc,
                a: self.a.recip(),
                b: BigRational::zero(),
            }),
            RingKind::Integers => {
                if !self.a.abs().is_one() {
                    return Err(Error::NotAUnit(self.to_string()));
                }
                Ok(RingElem {
                    desc: self.desc,
                    a: self.a.recip(),
                    b: BigRational::zero(),
                })
            }
            RingKind::Quadratic => {
                let n = self.norm();
                if !n.abs().is_one() {
                    return Err(Error::NotAUnit(self.to_string()));
                }
                // x * conj(x) = norm(x), so 1/x = conj(x) / norm(x)
                let c = self.conj();
                Ok(RingElem {
                    desc: self.desc,
                    a: &c.a / &n,
                    b: &c.b / &n,
                })
            }
        }
    }

    pub fn pow(&self, e: i64) -> Result<RingElem> {
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut out = RingElem::one(self.desc);
        for _ in 0..e.unsigned_abs() {
            out = out.checked_mul(&base)?;
        }
        Ok(out)
    }

    /// Exact halving; errors if the result leaves the ring.
    pub(crate) fn halve(&self) -> Result<RingElem> {
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        RingElem::new(self.desc, &self.a * &half, &self.b * &half)
    }

    /// Coordinates over the basis `{1, w}` (just `{1}` for `Z`).
    pub fn to_lattice(&self) -> Result<Vec<BigInt>> {
        let rank = self.desc.lattice_rank().ok_or(Error::NoLattice)?;
        let ints = [&self.a, &self.b][..rank]
            .iter()
            .map(|r| {
                debug_assert!(r.is_integer());
                r.to_integer()
            })
            .collect();
        Ok(ints)
    }

    pub fn from_lattice(desc: RingDescriptor, v: &[BigInt]) -> Result<Self> {
        let rank = desc.lattice_rank().ok_or(Error::NoLattice)?;
        if v.len() != rank {
            return Err(Error::DimensionMismatch(format!(
                "lattice vector of length {} for rank {rank}",
                v.len()
            )));
        }
        let a = BigRational::from_integer(v[0].clone());
        let b = if rank == 2 {
            BigRational::from_integer(v[1].clone())
        } else {
            BigRational::zero()
        };
        RingElem { desc, a, b }.validate()
    }

    fn validate(self) -> Result<Self> {
        RingElem::new(self.desc, self.a, self.b)
    }

    /// Parses the element grammar: `"a"`, `"a+b*w"`, `"a-b*w"`, a bare
    /// `"b*w"` / `"w"` term, with `a`, `b` decimal integers or `p/q`
    /// rationals (rationals only over `Q`).
    pub fn parse(desc: RingDescriptor, s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse("empty ring element".into()));
        }
        let mut a = BigRational::zero();
        let mut b = BigRational::zero();
        let mut rest = s.as_str();
        let mut leading = true;
        while !rest.is_empty() {
            // split off one signed term
            let (sign, body) = match rest.strip_prefix('-') {
                Some(t) => (-1, t),
                None => (1, rest.strip_prefix('+').unwrap_or(rest)),
            };
            if body.is_empty() {
                return Err(Error::Parse(format!("dangling sign in {s:?}")));
            }
            let split = body
                .char_indices()
                .skip(1)
                .find(|&(_, c)| c == '+' || c == '-')
                .map(|(i, _)| i)
                .unwrap_or(body.len());
            let (term, tail) = body.split_at(split);
            if term.ends_with('w') {
                let coeff = term.strip_suffix('w').unwrap();
                let coeff = coeff.strip_suffix('*').unwrap_or(coeff);
                let v = if coeff.is_empty() {
                    BigRational::one()
                } else {
                    parse_number(coeff)?
                };
                b += v * int_rat(sign);
            } else {
                a += parse_number(term)?* int_rat(sign);
            }
            rest = tail;
            if !leading && split == 0 {
                return Err(Error::Parse(format!("malformed element: {s:?}")));
            }
            leading = false;
        }
        RingElem::new(desc, a, b)
    }
}

fn parse_number(s: &str) -> Result<BigRational> {
    let parse_int = |t: &str| -> Result<BigInt> {
        t.parse()
            .map_err(|_| Error::Parse(format!("bad number: {s:?}")))
    };
    match s.split_once('/') {
        Some((p, q)) => {
            let den = parse_int(q)?;
            if den.is_zero() {
                return Err(Error::Parse(format!("zero denominator: {s:?}")));
            }
            Ok(BigRational::new(parse_int(p)?, den))
        }
        None => Ok(BigRational::from_integer(parse_int(s)?)),
    }
}

impl std::fmt::Display for RingElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        if self.b.is_negative() {
            write!(f, "{}-{}*w", self.a, -&self.b)
        } else {
            write!(f, "{}+{}*w", self.a, self.b)
        }
    }
}

impl std::fmt::Debug for RingElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} in {}", self, self.desc)
    }
}

macro_rules! panicking_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl std::ops::$trait for &RingElem {
            type Output = RingElem;
            fn $method(self, rhs: &RingElem) -> RingElem {
                self.$checked(rhs).expect("ring descriptor mismatch")
            }
        }
    };
}

panicking_binop!(Add, add, checked_add);
panicking_binop!(Sub, sub, checked_sub);
panicking_binop!(Mul, mul, checked_mul);

impl std::ops::Neg for &RingElem {
    type Output = RingElem;
    fn neg(self) -> RingElem {
        self.negate()
    }
}

/// Default search bound for the fundamental-unit scan.
pub const DEFAULT_PELL_CAP: u64 = 1_000_000;

/// Smallest unit `x + y*w` with `x, y > 0` in a real quadratic ring, found by
/// scanning `y` upward until `d y^2 +/- 1` is a perfect square.
pub fn fundamental_unit(desc: RingDescriptor, cap: u64) -> Result<RingElem> {
    let d = match desc.quad_param() {
        Some(d) if d > 1 => d,
        _ => {
            return Err(Error::UnsupportedRing(
                "fundamental units exist only for real quadratic rings".into(),
            ))
        }
    };
    let d = BigInt::from(d);
    for y in 1..=cap {
        let y = BigInt::from(y);
        let dy2 = &d * &y * &y;
        let one = BigInt::from(1);
        for target in [&dy2 - &one, &dy2 + &one] {
            if target.is_negative() {
                continue;
            }
            let x = target.sqrt();
            if &x * &x == target {
                return RingElem::new(
                    desc,
                    BigRational::from_integer(x),
                    BigRational::from_integer(y),
                );
            }
        }
    }
    Err(Error::PellCapExceeded { cap })
}

/// The unit group, with a finiteness flag. Finite groups are returned in
/// full; for real quadratic rings the first `count` units are produced from
/// powers of the fundamental unit and their negatives and inverses.
pub struct Units {
    pub list: Vec<RingElem>,
    pub finite: bool,
}

pub fn units(desc: RingDescriptor, count: usize) -> Result<Units> {
    units_with_cap(desc, count, DEFAULT_PELL_CAP)
}

pub fn units_with_cap(desc: RingDescriptor, count: usize, pell_cap: u64) -> Result<Units> {
    let one = RingElem::one(desc);
    let neg_one = RingElem::from_int(desc, -1);
    match desc.kind() {
        RingKind::Rationals => Ok(Units {
            list: Vec::new(),
            finite: false,
        }),
        RingKind::Integers => Ok(Units {
            list: vec![one, neg_one],
            finite: true,
        }),
        RingKind::Quadratic if desc.d == -1 => {
            let i = RingElem::omega(desc)?;
            let neg_i = i.negate();
            Ok(Units {
                list: vec![one, neg_one, i, neg_i],
                finite: true,
            })
        }
        RingKind::Quadratic if desc.d < 0 => Ok(Units {
            list: vec![one, neg_one],
            finite: true,
        }),
        RingKind::Quadratic => {
            let u = fundamental_unit(desc, pell_cap)?;
            let mut list = vec![one, neg_one];
            let mut k = 1i64;
            while list.len() < count {
                for e in [k, -k] {
                    let p = u.pow(e)?;
                    list.push(p.negate());
                    list.insert(list.len() - 1, p);
                }
                k += 1;
            }
            list.truncate(count);
            Ok(Units { list, finite: false })
        }
    }
}

/// The matrix of `x -> c * delta(x)` on the coefficient lattice of `c`'s
/// ring, over the basis `{1, w}`.
pub fn mul_matrix(c: &RingElem, delta: RingAut) -> Result<IntMatrix> {
    let desc = c.desc();
    let rank = desc.lattice_rank().ok_or(Error::NoLattice)?;
    let mut m = IntMatrix::zeros(rank, rank);
    for t in 0..rank {
        let mut basis = vec![BigInt::zero(); rank];
        basis[t] = BigInt::one();
        let e = RingElem::from_lattice(desc, &basis)?;
        let img = c.checked_mul(&e.apply_aut(delta))?;
        for (i, coord) in img.to_lattice()?.into_iter().enumerate() {
            m.set(i, t, coord);
        }
    }
    Ok(m)
}
