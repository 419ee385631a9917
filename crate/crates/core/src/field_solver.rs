//! The dichotomy over the rationals: every automorphism of `UT_n(Q)` has
//! either a single twisted-conjugacy class or infinitely many, and in the
//! single-class case explicit conjugators can be computed by peeling the
//! central series from the first superdiagonal down to the corner.
//!
//! Layer matrices are rational here, so "invertible" replaces the integral
//! index bookkeeping of the lattice engine: all layers invertible gives
//! full lifting (one class), and any singular layer already yields
//! infinitely many classes on that quotient.

use num_rational::BigRational;

use crate::automorphism::Automorphism;
use crate::error::{Error, Result};
use crate::rings::{RingElem, RingKind};
use crate::unitriangular::UniTriMatrix;

/// The two possible class counts over a field of characteristic zero.
#[derive(Clone, Debug, PartialEq)]
pub enum FieldClassification {
    /// Every element is twisted-conjugate to the identity.
    SingleClass,
    /// A layer action fixes a vector, giving infinitely many classes.
    Infinite {
        layer: usize,
        fixed_vector: Vec<BigRational>,
    },
}

impl FieldClassification {
    pub fn is_single(&self) -> bool {
        matches!(self, FieldClassification::SingleClass)
    }
}

fn require_rationals(auto: &Automorphism) -> Result<()> {
    if auto.desc().kind() != RingKind::Rationals {
        return Err(Error::UnsupportedRing(
            "the dichotomy solver works over Q; lattice rings have their own engine".into(),
        ));
    }
    if auto.n() < 3 {
        return Err(Error::DimensionMismatch(format!(
            "classification needs n >= 3, got {}",
            auto.n()
        )));
    }
    Ok(())
}

/// Decides between one class and infinitely many by checking every layer
/// matrix `I - M_k` for invertibility, reporting the first singular layer
/// (from the center outwards) with a fixed vector as the diagnostic.
pub fn classify(auto: &Automorphism) -> Result<FieldClassification> {
    require_rationals(auto)?;
    let n = auto.n();
    for k in 0..=n - 2 {
        let a = auto.layer_action_rational(k)?.id_minus()?;
        if let Some(v) = a.kernel_vector() {
            return Ok(FieldClassification::Infinite {
                layer: k,
                fixed_vector: v,
            });
        }
    }
    Ok(FieldClassification::SingleClass)
}

fn layer_solve(
    auto: &Automorphism,
    residual: &UniTriMatrix,
    k: usize,
) -> Result<Option<UniTriMatrix>> {
    let desc = auto.desc();
    let coords = residual.quotient_coords(k)?;
    if coords.iter().all(|c| c.is_zero()) {
        return Ok(None);
    }
    let rhs: Vec<BigRational> = coords.iter().map(|c| c.a().clone()).collect();
    let a = auto.layer_action_rational(k)?.id_minus()?;
    let v = a.solve(&rhs)?.ok_or(Error::SingularLayer { layer: k })?;
    let elems: Vec<RingElem> = v
        .into_iter()
        .map(|r| RingElem::from_rational(desc, r))
        .collect::<Result<_>>()?;
    Ok(Some(UniTriMatrix::quotient_rep(&elems, k, auto.n())?))
}

/// Produces `Z` with `X = Z . phi(Z)^{-1}`, peeling one layer at a time:
/// the correction at layer `k` satisfies `(I - M_k) v = coords(residual)`,
/// and absorbing it cancels that superdiagonal of the residual. The result
/// is re-verified by exact multiplication before being returned.
pub fn solve_twisted(auto: &Automorphism, x: &UniTriMatrix) -> Result<UniTriMatrix> {
    require_rationals(auto)?;
    let desc = auto.desc();
    let n = auto.n();
    if x.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{} but the automorphism acts on UT_{n}",
            x.n(),
            x.n()
        )));
    }
    if x.desc() != desc {
        return Err(Error::DescriptorMismatch(
            desc.to_string(),
            x.desc().to_string(),
        ));
    }
    let mut z = UniTriMatrix::identity(desc, n)?;
    let mut residual = x.clone();
    for k in (0..=n - 2).rev() {
        if let Some(w) = layer_solve(auto, &residual, k)? {
            residual = w.inv().mul(&residual)?.mul(&auto.apply(&w)?)?;
            z = z.mul(&w)?;
        }
    }
    if !residual.is_identity()
        || !x.mul(&auto.apply(&z)?)?.mul(&z.inv())?.is_identity()
    {
        return Err(Error::VerificationFailed(
            "assembled conjugator does not trivialise the element".into(),
        ));
    }
    Ok(z)
}

/// Partial lifting that stops at the center: returns a central `X'` and a
/// witness `W` with `X' = W^{-1} . X . phi(W)`, requiring only the layers
/// above the center to be nonsingular. The pair is verified exactly.
pub fn conjugate_into_center(
    auto: &Automorphism,
    x: &UniTriMatrix,
) -> Result<(UniTriMatrix, UniTriMatrix)> {
    require_rationals(auto)?;
    let desc = auto.desc();
    let n = auto.n();
    if x.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{} but the automorphism acts on UT_{n}",
            x.n(),
            x.n()
        )));
    }
    let mut w = UniTriMatrix::identity(desc, n)?;
    let mut residual = x.clone();
    for k in (1..=n - 2).rev() {
        if let Some(step) = layer_solve(auto, &residual, k)? {
            residual = step.inv().mul(&residual)?.mul(&auto.apply(&step)?)?;
            w = w.mul(&step)?;
        }
    }
    if residual.central_level() > 1 || w.inv().mul(x)?.mul(&auto.apply(&w)?)? != residual {
        return Err(Error::VerificationFailed(
            "partial lifting did not reach the center".into(),
        ));
    }
    Ok((residual, w))
}
