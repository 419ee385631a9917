//! Twisted-conjugacy invariants of `UT_n(R)` over lattice rings.
//!
//! Everything here reduces to the actions induced on the central-series
//! layers: an automorphism has finitely many twisted-conjugacy classes
//! exactly when `I - M_k` is nonsingular on every layer, in which case the
//! class count is the product of the layer indices `|det(I - M_k)|`. A
//! singular layer yields a fixed vector and hence infinitely many classes.
//!
//! The module provides the single-automorphism computation, exhaustive
//! sweeps over the diagonal family (with the unit-coincidence witness
//! layers predicted and cross-checked), spectrum sampling, and the exact
//! classification of central elements up to twisted conjugacy, including
//! explicit verified conjugators.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::automorphism::{Automorphism, NormalFormAuto};
use crate::error::{Error, Result};
use crate::lattice::{self, IntMatrix, ReidNumber};
use crate::rings::{self, RingAut, RingDescriptor, RingElem, RingKind};
use crate::unitriangular::UniTriMatrix;

/// Outcome of a Reidemeister-number computation over a lattice ring.
#[derive(Clone, Debug, PartialEq)]
pub enum ReidemeisterValue {
    Finite {
        value: BigUint,
        /// `|det(I - M_k)|` for `k = 0, ..., n-2`.
        layer_factors: Vec<BigUint>,
    },
    Infinite {
        /// First layer (from the center outwards) whose action is singular.
        layer: usize,
        /// A non-zero fixed vector of the layer action, when requested.
        kernel_vector: Option<Vec<BigInt>>,
    },
}

impl ReidemeisterValue {
    pub fn is_infinite(&self) -> bool {
        matches!(self, ReidemeisterValue::Infinite { .. })
    }

    pub fn to_reid(&self) -> ReidNumber {
        match self {
            ReidemeisterValue::Finite { value, .. } => ReidNumber::Finite(value.clone()),
            ReidemeisterValue::Infinite { .. } => ReidNumber::Infinite,
        }
    }
}

pub fn reidemeister_number(auto: &Automorphism) -> Result<ReidemeisterValue> {
    reidemeister_number_opts(auto, true)
}

/// Layer-by-layer computation, stopping at the first singular layer. The
/// kernel vector is only extracted when `want_kernel` is set; sweeps skip
/// it to stay cheap.
pub fn reidemeister_number_opts(
    auto: &Automorphism,
    want_kernel: bool,
) -> Result<ReidemeisterValue> {
    let desc = auto.desc();
    if desc.is_field() {
        return Err(Error::UnsupportedRing(
            "class counts over a field degenerate; use the field solver".into(),
        ));
    }
    let n = auto.n();
    let mut factors = Vec::with_capacity(n - 1);
    for k in 0..=n - 2 {
        let det = match auto {
            Automorphism::NormalForm(nf) => nf.layer_det(k)?,
            _ => auto.layer_action(k)?.id_minus()?.det()?,
        };
        if det.is_zero() {
            let kernel_vector = if want_kernel {
                lattice::kernel_basis(&auto.layer_action(k)?.id_minus()?)
                    .into_iter()
                    .next()
            } else {
                None
            };
            return Ok(ReidemeisterValue::Infinite { layer: k, kernel_vector });
        }
        factors.push(det.magnitude().clone());
    }
    let mut value = BigUint::one();
    for f in &factors {
        value *= f;
    }
    Ok(ReidemeisterValue::Finite {
        value,
        layer_factors: factors,
    })
}

/// The smallest layer whose action is forced singular by a coincidence in
/// the diagonal data, if any. For the diagonal family (`m = 0`) a repeat
/// `d_i = d_j` pins layer `n - 1 - (j - i)`; with the flip the relevant
/// data are `a_i = delta(d_i) d_{n+1-i}^{-1}` and pairs with
/// `i + j = n + 1` are excluded.
pub fn predicted_witness_layer(nf: &NormalFormAuto) -> Result<Option<usize>> {
    let n = nf.n();
    let d = nf.d();
    let vals: Vec<RingElem> = if nf.m() == 0 {
        d.to_vec()
    } else {
        (1..=n)
            .map(|i| Ok(&d[i - 1].apply_aut(nf.delta()) * &d[n - i].inverse()?))
            .collect::<Result<_>>()?
    };
    for s in (1..n).rev() {
        for i in 1..=n - s {
            let j = i + s;
            if vals[i - 1] == vals[j - 1] && (nf.m() == 0 || i + j != n + 1) {
                return Ok(Some(n - 1 - s));
            }
        }
    }
    Ok(None)
}

/// Whether a diagonal coincidence is unavoidable: true when the unit group
/// is finite and `n > 2 |R^*|`, so every diagonal automorphism of
/// `UT_n(R)` has a predicted singular layer.
pub fn unit_pigeonhole_applies(desc: RingDescriptor, n: usize) -> bool {
    let order = match desc.kind() {
        RingKind::Rationals => return false,
        RingKind::Integers => 2,
        RingKind::Quadratic => match desc.quad_param() {
            Some(-1) => 4,
            Some(d) if d > 1 => return false,
            _ => 2,
        },
    };
    n > 2 * order
}

const MAX_STORED_CASES: usize = 4096;
const MAX_VIOLATIONS: usize = 16;

#[derive(Clone, Debug)]
pub struct SweepOptions {
    /// How many units to enumerate when the unit group is infinite.
    pub unit_count: usize,
    /// Refuse sweeps with more cases than this.
    pub case_cap: u64,
    /// Search bound for the fundamental unit of real quadratic rings.
    pub pell_cap: u64,
    /// Cases processed per parallel batch.
    pub batch: usize,
    /// Re-check that every predicted witness layer is in fact singular.
    pub check_layers: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            unit_count: 8,
            case_cap: 1 << 22,
            pell_cap: rings::DEFAULT_PELL_CAP,
            batch: 4096,
            check_layers: true,
        }
    }
}

/// One diagonal automorphism in a sweep, with its classification.
#[derive(Clone, Debug)]
pub struct SweepCase {
    pub index: u64,
    pub d: Vec<RingElem>,
    pub delta: RingAut,
    pub m: u8,
    pub value: ReidemeisterValue,
    pub predicted_layer: Option<usize>,
}

#[derive(Debug)]
pub struct SweepReport {
    pub desc: RingDescriptor,
    pub n: usize,
    pub total: u64,
    pub infinite: u64,
    pub finite: u64,
    /// True when the unit pigeonhole forces every case to be infinite.
    pub guaranteed: bool,
    /// All finite cases, up to a storage cap.
    pub finite_cases: Vec<SweepCase>,
    /// Any inconsistency between predicted witness layers and computed
    /// values; always expected to be empty.
    pub violations: Vec<String>,
}

impl SweepReport {
    pub fn all_infinite(&self) -> bool {
        self.total > 0 && self.finite == 0
    }
}

pub fn r_infinity_sweep(
    desc: RingDescriptor,
    n: usize,
    opts: &SweepOptions,
) -> Result<SweepReport> {
    r_infinity_sweep_with_sink(desc, n, opts, &mut |_| Ok(()))
}

/// Enumerates every diagonal automorphism `(d_2, ..., d_n, delta, m)` with
/// `d_1 = 1` (scaling `D` by a unit does not change the automorphism),
/// computes each Reidemeister number, and cross-checks the predicted
/// witness layers. Cases are streamed to `sink` in a fixed enumeration
/// order regardless of parallelism.
pub fn r_infinity_sweep_with_sink(
    desc: RingDescriptor,
    n: usize,
    opts: &SweepOptions,
    sink: &mut dyn FnMut(&SweepCase) -> Result<()>,
) -> Result<SweepReport> {
    if n < 3 {
        return Err(Error::DimensionMismatch(format!(
            "sweeps need n >= 3, got {n}"
        )));
    }
    let units = rings::units_with_cap(desc, opts.unit_count, opts.pell_cap)?;
    if units.list.is_empty() {
        return Err(Error::UnsupportedRing(
            "sweeps need ring units; fields are handled by the field solver".into(),
        ));
    }
    let auts = rings::ring_automorphisms(desc);
    let radix = units.list.len() as u64;
    let tuples = (radix as u128).pow(n as u32 - 1);
    let total = tuples * auts.len() as u128 * 2;
    if total > opts.case_cap as u128 {
        return Err(Error::CapExceeded {
            needed: total.min(usize::MAX as u128) as usize,
            cap: opts.case_cap as usize,
        });
    }
    let total = total as u64;
    let guaranteed = units.finite && unit_pigeonhole_applies(desc, n);
    let one = RingElem::one(desc);

    let process = |idx: u64| -> Result<(SweepCase, Option<String>)> {
        let mut t = idx;
        let m = (t % 2) as u8;
        t /= 2;
        let delta = auts[(t % auts.len() as u64) as usize];
        t /= auts.len() as u64;
        let mut d = Vec::with_capacity(n);
        d.push(one.clone());
        for _ in 1..n {
            d.push(units.list[(t % radix) as usize].clone());
            t /= radix;
        }
        let nf = NormalFormAuto::diagonal(desc, d, delta, m)?;
        let auto = Automorphism::NormalForm(nf);
        let value = reidemeister_number_opts(&auto, false)?;
        let nf = match &auto {
            Automorphism::NormalForm(nf) => nf,
            _ => unreachable!(),
        };
        let predicted = predicted_witness_layer(nf)?;
        let violation = match predicted {
            Some(k) if !value.is_infinite() => Some(format!(
                "case {idx} ({nf}): predicted singular layer {k} but finite count"
            )),
            Some(k) if opts.check_layers && !nf.layer_det(k)?.is_zero() => Some(format!(
                "case {idx} ({nf}): predicted layer {k} is not singular"
            )),
            None if guaranteed => Some(format!(
                "case {idx} ({nf}): no coincidence found despite the pigeonhole bound"
            )),
            _ => None,
        };
        Ok((
            SweepCase {
                index: idx,
                d: nf.d().to_vec(),
                delta: nf.delta(),
                m: nf.m(),
                value,
                predicted_layer: predicted,
            },
            violation,
        ))
    };

    let mut report = SweepReport {
        desc,
        n,
        total,
        infinite: 0,
        finite: 0,
        guaranteed,
        finite_cases: Vec::new(),
        violations: Vec::new(),
    };
    let mut start = 0u64;
    while start < total {
        let end = total.min(start + opts.batch as u64);
        let batch: Vec<(SweepCase, Option<String>)> = (start..end)
            .into_par_iter()
            .map(process)
            .collect::<Result<_>>()?;
        for (case, violation) in batch {
            if case.value.is_infinite() {
                report.infinite += 1;
            } else {
                report.finite += 1;
                if report.finite_cases.len() < MAX_STORED_CASES {
                    report.finite_cases.push(case.clone());
                }
            }
            if let Some(v) = violation {
                if report.violations.len() < MAX_VIOLATIONS {
                    report.violations.push(v);
                }
            }
            sink(&case)?;
        }
        start = end;
    }
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct SpectrumOptions {
    /// Include the diagonal normal-form family (covers all normal-form
    /// automorphisms: central and inner parts do not change class counts).
    pub include_diagonal: bool,
    /// Additionally enumerate `GL_2`-type automorphisms of `UT_3(Z)` with
    /// entries bounded by this value.
    pub heisenberg_bound: Option<i64>,
    pub unit_count: usize,
    pub case_cap: u64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            include_diagonal: true,
            heisenberg_bound: None,
            unit_count: 8,
            case_cap: 1 << 22,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SpectrumPoint {
    pub value: ReidNumber,
    /// A description of one automorphism attaining the value.
    pub witness: String,
}

#[derive(Debug)]
pub struct SpectrumReport {
    pub desc: RingDescriptor,
    pub n: usize,
    pub total_cases: u64,
    /// Distinct values in increasing order, the infinite value last.
    pub points: Vec<SpectrumPoint>,
}

impl SpectrumReport {
    pub fn finite_values(&self) -> Vec<BigUint> {
        self.points
            .iter()
            .filter_map(|p| match &p.value {
                ReidNumber::Finite(v) => Some(v.clone()),
                ReidNumber::Infinite => None,
            })
            .collect()
    }

    pub fn has_infinite(&self) -> bool {
        self.points
            .iter()
            .any(|p| matches!(p.value, ReidNumber::Infinite))
    }

    pub fn attains(&self, v: u64) -> bool {
        let v = BigUint::from(v);
        self.points
            .iter()
            .any(|p| matches!(&p.value, ReidNumber::Finite(x) if *x == v))
    }
}

fn describe_case(case: &SweepCase) -> String {
    let ds: Vec<String> = case.d.iter().map(|x| x.to_string()).collect();
    format!("D=({}) delta={} m={}", ds.join(","), case.delta, case.m)
}

/// Collects the set of Reidemeister numbers attained by the requested
/// automorphism families, with one witness per distinct value.
pub fn spectrum_sample(
    desc: RingDescriptor,
    n: usize,
    opts: &SpectrumOptions,
) -> Result<SpectrumReport> {
    let mut finite: BTreeMap<BigUint, String> = BTreeMap::new();
    let mut infinite: Option<String> = None;
    let mut total = 0u64;
    if opts.include_diagonal {
        let sweep_opts = SweepOptions {
            unit_count: opts.unit_count,
            case_cap: opts.case_cap,
            check_layers: false,
            ..SweepOptions::default()
        };
        r_infinity_sweep_with_sink(desc, n, &sweep_opts, &mut |case| {
            total += 1;
            match &case.value {
                ReidemeisterValue::Finite { value, .. } => {
                    finite
                        .entry(value.clone())
                        .or_insert_with(|| describe_case(case));
                }
                ReidemeisterValue::Infinite { .. } => {
                    if infinite.is_none() {
                        infinite = Some(describe_case(case));
                    }
                }
            }
            Ok(())
        })?;
    }
    if let Some(bound) = opts.heisenberg_bound {
        if n != 3 {
            return Err(Error::DimensionMismatch(
                "2x2 matrix automorphisms exist only for n = 3".into(),
            ));
        }
        if desc.kind() != RingKind::Integers {
            return Err(Error::UnsupportedRing(
                "bounded matrix spectra are enumerated over Z".into(),
            ));
        }
        let b = bound.abs();
        let width = 2 * b as u128 + 1;
        if width.pow(4) > opts.case_cap as u128 {
            return Err(Error::CapExceeded {
                needed: width.pow(4).min(usize::MAX as u128) as usize,
                cap: opts.case_cap as usize,
            });
        }
        for p in -b..=b {
            for q in -b..=b {
                for r in -b..=b {
                    for s in -b..=b {
                        let det = p * s - q * r;
                        if det != 1 && det != -1 {
                            continue;
                        }
                        let phi =
                            crate::automorphism::HeisenbergAuto::from_rows(desc, [[p, q], [r, s]])?;
                        let auto = Automorphism::Heisenberg(phi);
                        total += 1;
                        match reidemeister_number_opts(&auto, false)? {
                            ReidemeisterValue::Finite { value, .. } => {
                                finite
                                    .entry(value)
                                    .or_insert_with(|| format!("{auto}"));
                            }
                            ReidemeisterValue::Infinite { .. } => {
                                if infinite.is_none() {
                                    infinite = Some(format!("{auto}"));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let mut points: Vec<SpectrumPoint> = finite
        .into_iter()
        .map(|(value, witness)| SpectrumPoint {
            value: ReidNumber::Finite(value),
            witness,
        })
        .collect();
    if let Some(witness) = infinite {
        points.push(SpectrumPoint {
            value: ReidNumber::Infinite,
            witness,
        });
    }
    Ok(SpectrumReport {
        desc,
        n,
        total_cases: total,
        points,
    })
}

/// The twisted boundary `z . phi(z)^{-1}`. Central elements `x, y` are
/// twisted-conjugate exactly when `y x^{-1}` is a boundary value lying in
/// the center, and those values form a subgroup of `(R, +)`.
fn twisted_boundary(auto: &Automorphism, z: &UniTriMatrix) -> Result<UniTriMatrix> {
    z.mul(&auto.apply(z)?.inv())
}

/// Starting from `z` whose boundary lies in level `k`, append deeper-layer
/// corrections until the boundary is central. Returns the corrected `z`
/// with the boundary's corner coordinates, or `None` when some
/// intermediate layer equation has no integral solution.
fn lift_to_center(
    auto: &Automorphism,
    z0: UniTriMatrix,
    k: usize,
) -> Result<Option<(UniTriMatrix, Vec<BigInt>)>> {
    let desc = auto.desc();
    let rank = desc.lattice_rank().ok_or(Error::NoLattice)?;
    let n = auto.n();
    let mut z = z0;
    let mut boundary = twisted_boundary(auto, &z)?;
    for level in (1..k).rev() {
        let coords = boundary.quotient_coords(level)?;
        let mut c: Vec<BigInt> = Vec::with_capacity((level + 1) * rank);
        for e in &coords {
            c.extend(e.to_lattice()?);
        }
        if c.iter().all(Zero::is_zero) {
            continue;
        }
        // want coords(boundary) + (M - I) u = 0 on this layer
        let action = auto.layer_action(level)?;
        let m_minus_i = action.sub(&IntMatrix::identity(action.rows()))?;
        let u = match lattice::solve(&m_minus_i, &c)? {
            None => return Ok(None),
            Some(u) => u,
        };
        let coords: Vec<RingElem> = u
            .chunks(rank)
            .map(|ch| RingElem::from_lattice(desc, ch))
            .collect::<Result<_>>()?;
        let w = UniTriMatrix::quotient_rep(&coords, level, n)?;
        z = z.mul(&w)?;
        boundary = twisted_boundary(auto, &z)?;
    }
    let corner = boundary.quotient_coords(0)?;
    Ok(Some((z, corner[0].to_lattice()?)))
}

/// A generator of the central boundary subgroup, together with the group
/// element realising it.
#[derive(Clone, Debug)]
pub struct HGenerator {
    /// Lattice coordinates of the boundary's corner entry.
    pub defect: Vec<BigInt>,
    /// `z` with `z . phi(z)^{-1}` equal to that central element.
    pub conjugator: UniTriMatrix,
}

/// The subgroup `H <= (R, +)` of corner values of central twisted
/// boundaries. Two central elements are twisted-conjugate exactly when
/// their difference lies in `H`, so the central classes are `R / H`.
#[derive(Clone, Debug)]
pub struct CentralSubgroupH {
    pub desc: RingDescriptor,
    pub generators: Vec<HGenerator>,
    /// `[R : H]` as a class count.
    pub index: ReidNumber,
}

/// Computes generators of the central boundary subgroup: corner boundaries
/// `T_{1,n}(y) phi(T_{1,n}(y))^{-1}`, plus the boundaries of layer fixed
/// vectors lifted down to the center. Every generator carries its
/// realising element, so membership certificates are exact by
/// construction.
pub fn central_subgroup_h(auto: &Automorphism) -> Result<CentralSubgroupH> {
    let desc = auto.desc();
    let rank = desc.lattice_rank().ok_or_else(|| {
        Error::UnsupportedRing("central class analysis needs a lattice ring".into())
    })?;
    let n = auto.n();
    if n < 3 {
        return Err(Error::DimensionMismatch(
            "central class analysis needs n >= 3".into(),
        ));
    }
    let mut generators: Vec<HGenerator> = Vec::new();
    let mut push = |defect: Vec<BigInt>, z: UniTriMatrix| {
        if !defect.iter().all(Zero::is_zero) {
            generators.push(HGenerator {
                defect,
                conjugator: z,
            });
        }
    };
    for t in 0..rank {
        let mut basis = vec![BigInt::zero(); rank];
        basis[t] = BigInt::one();
        let y = RingElem::from_lattice(desc, &basis)?;
        let z = UniTriMatrix::transvection(desc, n, 1, n, y)?;
        let boundary = twisted_boundary(auto, &z)?;
        push(boundary.quotient_coords(0)?[0].to_lattice()?, z);
    }
    for k in 1..=n - 2 {
        let action = auto.layer_action(k)?;
        for v in lattice::kernel_basis(&action.id_minus()?) {
            let coords: Vec<RingElem> = v
                .chunks(rank)
                .map(|ch| RingElem::from_lattice(desc, ch))
                .collect::<Result<_>>()?;
            let w = UniTriMatrix::quotient_rep(&coords, k, n)?;
            if let Some((z, defect)) = lift_to_center(auto, w, k)? {
                push(defect, z);
            }
        }
    }
    let cols: Vec<Vec<BigInt>> = generators.iter().map(|g| g.defect.clone()).collect();
    let index = lattice::subgroup_index(&cols, rank)?;
    Ok(CentralSubgroupH {
        desc,
        generators,
        index,
    })
}

fn ut_pow(m: &UniTriMatrix, e: &BigInt) -> Result<UniTriMatrix> {
    let base = if e.is_negative() { m.inv() } else { m.clone() };
    let mag = e.magnitude();
    let mut out = UniTriMatrix::identity(m.desc(), m.n())?;
    for i in (0..mag.bits()).rev() {
        out = out.mul(&out)?;
        if mag.bit(i) {
            out = out.mul(&base)?;
        }
    }
    Ok(out)
}

/// Finds `z` with `z . T_{1,n}(a) . phi(z)^{-1} = T_{1,n}(b)`, or reports
/// that the two central elements are not twisted-conjugate. The returned
/// conjugator is re-verified exactly before being handed out.
pub fn central_conjugator(
    auto: &Automorphism,
    a: &RingElem,
    b: &RingElem,
) -> Result<UniTriMatrix> {
    let h = central_subgroup_h(auto)?;
    central_conjugator_with(auto, &h, a, b)
}

/// Same as [`central_conjugator`], reusing a precomputed subgroup.
pub fn central_conjugator_with(
    auto: &Automorphism,
    h: &CentralSubgroupH,
    a: &RingElem,
    b: &RingElem,
) -> Result<UniTriMatrix> {
    let desc = auto.desc();
    let rank = desc.lattice_rank().ok_or(Error::NoLattice)?;
    let n = auto.n();
    for e in [a, b] {
        if e.desc() != desc {
            return Err(Error::DescriptorMismatch(
                desc.to_string(),
                e.desc().to_string(),
            ));
        }
    }
    let target = b.checked_sub(a)?.to_lattice()?;
    let z = if target.iter().all(Zero::is_zero) {
        UniTriMatrix::identity(desc, n)?
    } else {
        if h.generators.is_empty() {
            return Err(Error::NotConjugate);
        }
        let cols: Vec<Vec<BigInt>> = h.generators.iter().map(|g| g.defect.clone()).collect();
        let gmat = IntMatrix::from_columns(&cols, rank)?;
        let coeffs = lattice::solve(&gmat, &target)?.ok_or(Error::NotConjugate)?;
        let mut z = UniTriMatrix::identity(desc, n)?;
        for (gen, c) in h.generators.iter().zip(&coeffs) {
            if !c.is_zero() {
                z = z.mul(&ut_pow(&gen.conjugator, c)?)?;
            }
        }
        z
    };
    let xa = UniTriMatrix::transvection(desc, n, 1, n, a.clone())?;
    let xb = UniTriMatrix::transvection(desc, n, 1, n, b.clone())?;
    let got = z.mul(&xa)?.mul(&auto.apply(&z)?.inv())?;
    if got != xb {
        return Err(Error::VerificationFailed(
            "assembled central conjugator does not transport the element".into(),
        ));
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automorphism::{HeisenbergAuto, LambdaMap};
    use proptest::prelude::*;

    fn z() -> RingDescriptor {
        RingDescriptor::integers()
    }

    fn zi(v: i64) -> RingElem {
        RingElem::from_int(z(), v)
    }

    fn diag(desc: RingDescriptor, d: Vec<RingElem>, delta: RingAut, m: u8) -> Automorphism {
        Automorphism::NormalForm(NormalFormAuto::diagonal(desc, d, delta, m).unwrap())
    }

    #[test]
    fn identity_automorphism_has_infinite_count() {
        let auto = diag(z(), vec![zi(1); 3], RingAut::Id, 0);
        match reidemeister_number(&auto).unwrap() {
            ReidemeisterValue::Infinite { layer, kernel_vector } => {
                assert_eq!(layer, 0);
                assert!(kernel_vector.is_some());
            }
            v => panic!("expected infinite, got {v:?}"),
        }
    }

    #[test]
    fn heisenberg_fibonacci_matrix_has_two_classes() {
        let phi = HeisenbergAuto::from_rows(z(), [[1, 1], [1, 0]]).unwrap();
        match reidemeister_number(&Automorphism::Heisenberg(phi)).unwrap() {
            ReidemeisterValue::Finite { value, layer_factors } => {
                assert_eq!(value, BigUint::from(2u32));
                assert_eq!(layer_factors, vec![BigUint::from(2u32), BigUint::from(1u32)]);
            }
            v => panic!("expected finite, got {v:?}"),
        }
    }

    #[test]
    fn unit_tower_over_real_quadratic_ring() {
        // D = (1, u, u^2) with u = 1 + sqrt(2): layers contribute 4 and 4
        let desc = RingDescriptor::quadratic(2).unwrap();
        let u = RingElem::from_coords(desc, 1, 1).unwrap();
        let d = vec![RingElem::one(desc), u.clone(), u.checked_mul(&u).unwrap()];
        let auto = diag(desc, d, RingAut::Id, 0);
        match reidemeister_number(&auto).unwrap() {
            ReidemeisterValue::Finite { value, layer_factors } => {
                assert_eq!(value, BigUint::from(16u32));
                assert_eq!(layer_factors, vec![BigUint::from(4u32); 2]);
            }
            v => panic!("expected finite, got {v:?}"),
        }
    }

    #[test]
    fn gaussian_unit_tower() {
        let desc = RingDescriptor::gaussian();
        let i = RingElem::omega(desc).unwrap();
        let d = vec![RingElem::one(desc), i.clone(), i.checked_mul(&i).unwrap()];
        let auto = diag(desc, d, RingAut::Id, 0);
        match reidemeister_number(&auto).unwrap() {
            ReidemeisterValue::Finite { value, layer_factors } => {
                assert_eq!(value, BigUint::from(16u32));
                assert_eq!(layer_factors, vec![BigUint::from(4u32); 2]);
            }
            v => panic!("expected finite, got {v:?}"),
        }
    }

    #[test]
    fn rationals_are_rejected() {
        let q = RingDescriptor::rationals();
        let auto = diag(q, vec![RingElem::one(q); 3], RingAut::Id, 0);
        assert!(matches!(
            reidemeister_number(&auto),
            Err(Error::UnsupportedRing(_))
        ));
    }

    #[test]
    fn predicted_layers_follow_coincidence_distance() {
        // d_1 = d_4 at distance 3: layer 5 - 1 - 3 = 1
        let d = vec![zi(1), zi(1), zi(-1), zi(1), zi(-1)];
        let nf = NormalFormAuto::diagonal(z(), d, RingAut::Id, 0).unwrap();
        assert_eq!(predicted_witness_layer(&nf).unwrap(), Some(1));

        // with the flip, a_i = d_i d_{n+1-i}^{-1}; all ones excludes the
        // antidiagonal pair (1,4) and picks (1,3)
        let nf = NormalFormAuto::diagonal(z(), vec![zi(1); 4], RingAut::Id, 1).unwrap();
        assert_eq!(predicted_witness_layer(&nf).unwrap(), Some(1));
    }

    #[test]
    fn pigeonhole_gate() {
        assert!(!unit_pigeonhole_applies(z(), 4));
        assert!(unit_pigeonhole_applies(z(), 5));
        assert!(!unit_pigeonhole_applies(RingDescriptor::gaussian(), 8));
        assert!(unit_pigeonhole_applies(RingDescriptor::gaussian(), 9));
        assert!(!unit_pigeonhole_applies(RingDescriptor::quadratic(2).unwrap(), 100));
        assert!(unit_pigeonhole_applies(RingDescriptor::quadratic(-5).unwrap(), 5));
        assert!(!unit_pigeonhole_applies(RingDescriptor::rationals(), 100));
    }

    #[test]
    fn ut4_over_z_sweep_is_all_infinite() {
        let report = r_infinity_sweep(z(), 4, &SweepOptions::default()).unwrap();
        assert_eq!(report.total, 16);
        assert!(report.all_infinite());
        assert!(!report.guaranteed);
        assert!(report.violations.is_empty());
    }

    #[test]
    fn ut5_over_z_sweep_is_guaranteed_infinite() {
        let report = r_infinity_sweep(z(), 5, &SweepOptions::default()).unwrap();
        assert_eq!(report.total, 32);
        assert!(report.all_infinite());
        assert!(report.guaranteed);
        assert!(report.violations.is_empty());
    }

    #[test]
    fn sweep_streams_cases_in_order() {
        let mut seen = Vec::new();
        r_infinity_sweep_with_sink(z(), 4, &SweepOptions::default(), &mut |case| {
            seen.push(case.index);
            Ok(())
        })
        .unwrap();
        assert_eq!(seen, (0..16).collect::<Vec<_>>());
    }

    #[test]
    fn sweep_respects_case_cap() {
        let opts = SweepOptions {
            case_cap: 10,
            ..SweepOptions::default()
        };
        assert!(matches!(
            r_infinity_sweep(z(), 4, &opts),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn heisenberg_spectrum_is_even_and_attains_two() {
        let opts = SpectrumOptions {
            heisenberg_bound: Some(2),
            ..SpectrumOptions::default()
        };
        let report = spectrum_sample(z(), 3, &opts).unwrap();
        assert!(report.has_infinite());
        assert!(report.attains(2));
        let two = BigUint::from(2u32);
        for v in report.finite_values() {
            assert!((&v % &two).is_zero(), "odd value {v} in spectrum");
        }
        // the diagonal family alone contributes only the infinite value
        let diag_only = spectrum_sample(z(), 3, &SpectrumOptions::default()).unwrap();
        assert!(diag_only.has_infinite());
        assert!(diag_only.finite_values().is_empty());
    }

    #[test]
    fn central_subgroup_with_central_map() {
        // identity diagonal, lambda = 3: boundaries of superdiagonal fixed
        // vectors contribute 3Z, the corner contributes nothing
        let lam = LambdaMap::Lattice(IntMatrix::from_rows(&[vec![3]]).unwrap());
        let nf = NormalFormAuto::new(z(), 3, vec![zi(1); 3], RingAut::Id, 0, Some(lam), None)
            .unwrap();
        let auto = Automorphism::NormalForm(nf);
        let h = central_subgroup_h(&auto).unwrap();
        assert_eq!(h.index, ReidNumber::finite(3));

        // 5 - 2 = 3 is a boundary, so these are conjugate
        let zc = central_conjugator(&auto, &zi(5), &zi(2)).unwrap();
        let xa = UniTriMatrix::transvection(z(), 3, 1, 3, zi(5)).unwrap();
        let xb = UniTriMatrix::transvection(z(), 3, 1, 3, zi(2)).unwrap();
        assert_eq!(
            zc.mul(&xa).unwrap().mul(&auto.apply(&zc).unwrap().inv()).unwrap(),
            xb
        );
        // 5 - 3 = 2 is not
        assert!(matches!(
            central_conjugator(&auto, &zi(5), &zi(3)),
            Err(Error::NotConjugate)
        ));
    }

    #[test]
    fn central_subgroup_under_conjugation_twist() {
        // D = (1, 1, u), delta = conj over Z[sqrt 2]: corner boundaries
        // give the rank-2 subgroup generated by 2 - sqrt(2) and 2
        let desc = RingDescriptor::quadratic(2).unwrap();
        let u = RingElem::from_coords(desc, 1, 1).unwrap();
        let d = vec![RingElem::one(desc), RingElem::one(desc), u];
        let nf = NormalFormAuto::diagonal(desc, d, RingAut::Conj, 0).unwrap();
        let auto = Automorphism::NormalForm(nf);
        let h = central_subgroup_h(&auto).unwrap();
        assert_eq!(h.index, ReidNumber::finite(2));

        let a = RingElem::zero(desc);
        let b = RingElem::from_coords(desc, 2, -1).unwrap();
        assert!(central_conjugator(&auto, &a, &b).is_ok());
        let c = RingElem::one(desc);
        assert!(matches!(
            central_conjugator(&auto, &a, &c),
            Err(Error::NotConjugate)
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn constructed_boundaries_are_always_conjugate(
            (auto, a, coeffs) in (0usize..3).prop_flat_map(|di| {
                let desc = [
                    RingDescriptor::integers(),
                    RingDescriptor::gaussian(),
                    RingDescriptor::quadratic(2).unwrap(),
                ][di];
                let us = rings::units(desc, 4).unwrap().list;
                let n = 4usize;
                (
                    (prop::collection::vec(0..us.len(), n), 0u8..=1, -3i64..=3).prop_map(
                        move |(idx, m, lam)| {
                            let d: Vec<_> = idx.iter().map(|&i| us[i].clone()).collect();
                            let rank = desc.lattice_rank().unwrap();
                            let lam = LambdaMap::Lattice(
                                IntMatrix::from_rows(
                                    &vec![vec![lam; rank]; rank],
                                )
                                .unwrap(),
                            );
                            let delta = *rings::ring_automorphisms(desc).last().unwrap();
                            Automorphism::NormalForm(
                                NormalFormAuto::new(desc, n, d, delta, m, Some(lam), None)
                                    .unwrap(),
                            )
                        },
                    ),
                    -5i64..=5,
                    prop::collection::vec(-3i64..=3, 4),
                )
            })
        ) {
            let desc = auto.desc();
            let h = central_subgroup_h(&auto).unwrap();
            let a = RingElem::from_int(desc, a);
            // combine generators with the sampled coefficients
            let mut diff = vec![BigInt::zero(); desc.lattice_rank().unwrap()];
            for (g, c) in h.generators.iter().zip(&coeffs) {
                for (d, x) in diff.iter_mut().zip(&g.defect) {
                    *d += x * BigInt::from(*c);
                }
            }
            let b = a.checked_add(&RingElem::from_lattice(desc, &diff).unwrap()).unwrap();
            // membership must be recognised and certified
            let z = central_conjugator_with(&auto, &h, &a, &b).unwrap();
            let xa = UniTriMatrix::transvection(desc, 4, 1, 4, a.clone()).unwrap();
            let xb = UniTriMatrix::transvection(desc, 4, 1, 4, b.clone()).unwrap();
            let got = z.mul(&xa).unwrap().mul(&auto.apply(&z).unwrap().inv()).unwrap();
            prop_assert_eq!(got, xb);
        }
    }
}
