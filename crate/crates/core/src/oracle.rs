//! Brute-force ground truth for twisted conjugacy on finite groups.
//!
//! Everything here is computed from an explicit multiplication table by
//! orbit enumeration — no linear algebra — so the counts independently
//! check the layer-based machinery on finite quotients and the structural
//! identities for class counts: invariance under inner twists,
//! multiplicativity over direct products, the central-extension
//! inequality, and the abelian index formula.
//!
//! Reduction mod m genuinely changes class counts, so the oracle validates
//! formulas and identities on finite groups; it does not recompute
//! characteristic-zero results.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automorphism::NormalFormAuto;
use crate::error::{Error, Result};
use crate::rings::{RingElem, RingKind};
use crate::unitriangular::UniTriMatrix;

/// Default ceiling on oracle table sizes (3^8 elements).
pub const DEFAULT_ORACLE_CAP: usize = 6561;

/// Below this size associativity is checked on every triple; above it a
/// fixed number of deterministically sampled triples is used.
const ASSOC_EXHAUSTIVE: usize = 300;
const ASSOC_SAMPLES: usize = 50_000;
/// Same split for the multiplicativity check of automorphisms (pairs).
const HOM_EXHAUSTIVE: usize = 2000;
const HOM_SAMPLES: usize = 100_000;
const VALIDATION_SEED: u64 = 0x0fa1_c0de;

/// A finite group given by its full multiplication table.
#[derive(Clone, Debug)]
pub struct FiniteGroupTable {
    size: usize,
    /// Row-major: `mul[a * size + b]` is the product `a * b`.
    mul: Vec<u32>,
    inv: Vec<u32>,
    id: usize,
    gens: Vec<usize>,
}

impl FiniteGroupTable {
    /// Validates and adopts an explicit table. Identity, inverses and the
    /// Latin-square property are checked exactly; associativity is checked
    /// exhaustively on small tables and by deterministic sampling on large
    /// ones. Supplied generators must generate the whole group; when
    /// omitted, a generating set is computed greedily.
    pub fn from_rows(rows: &[Vec<u32>], generators: Option<Vec<usize>>) -> Result<Self> {
        let size = rows.len();
        if size == 0 {
            return Err(Error::InvalidGroupTable("empty table".into()));
        }
        let mut mul = Vec::with_capacity(size * size);
        for row in rows {
            if row.len() != size {
                return Err(Error::InvalidGroupTable(format!(
                    "table is not square: row of length {} in a table of size {size}",
                    row.len()
                )));
            }
            for &x in row {
                if x as usize >= size {
                    return Err(Error::InvalidGroupTable(format!(
                        "entry {x} out of range 0..{size}"
                    )));
                }
                mul.push(x);
            }
        }
        Self::adopt(size, mul, generators)
    }

    /// Builds the table from a multiplication closure, then validates it.
    pub fn from_fn(
        size: usize,
        f: impl Fn(usize, usize) -> usize,
        generators: Option<Vec<usize>>,
    ) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidGroupTable("empty table".into()));
        }
        let mut mul = Vec::with_capacity(size * size);
        for a in 0..size {
            for b in 0..size {
                let x = f(a, b);
                if x >= size {
                    return Err(Error::InvalidGroupTable(format!(
                        "entry {x} out of range 0..{size}"
                    )));
                }
                mul.push(x as u32);
            }
        }
        Self::adopt(size, mul, generators)
    }

    fn adopt(size: usize, mul: Vec<u32>, generators: Option<Vec<usize>>) -> Result<Self> {
        let at = |a: usize, b: usize| mul[a * size + b] as usize;
        let id = (0..size)
            .find(|&e| (0..size).all(|x| at(e, x) == x && at(x, e) == x))
            .ok_or_else(|| Error::InvalidGroupTable("no identity element".into()))?;
        for a in 0..size {
            let mut seen_row = vec![false; size];
            let mut seen_col = vec![false; size];
            for b in 0..size {
                let r = at(a, b);
                let c = at(b, a);
                if seen_row[r] || seen_col[c] {
                    return Err(Error::InvalidGroupTable(format!(
                        "row or column {a} repeats a product"
                    )));
                }
                seen_row[r] = true;
                seen_col[c] = true;
            }
        }
        let mut inv = vec![0u32; size];
        for a in 0..size {
            let b = (0..size)
                .find(|&b| at(a, b) == id && at(b, a) == id)
                .ok_or_else(|| {
                    Error::InvalidGroupTable(format!("element {a} has no two-sided inverse"))
                })?;
            inv[a] = b as u32;
        }
        if size <= ASSOC_EXHAUSTIVE {
            for a in 0..size {
                for b in 0..size {
                    let ab = at(a, b);
                    for c in 0..size {
                        if at(ab, c) != at(a, at(b, c)) {
                            return Err(Error::InvalidGroupTable(format!(
                                "associativity fails on ({a}, {b}, {c})"
                            )));
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(VALIDATION_SEED);
            for _ in 0..ASSOC_SAMPLES {
                let a = rng.gen_range(0..size);
                let b = rng.gen_range(0..size);
                let c = rng.gen_range(0..size);
                if at(at(a, b), c) != at(a, at(b, c)) {
                    return Err(Error::InvalidGroupTable(format!(
                        "associativity fails on ({a}, {b}, {c})"
                    )));
                }
            }
        }
        let gens = match generators {
            Some(gens) => {
                for &g in &gens {
                    if g >= size {
                        return Err(Error::InvalidGroupTable(format!(
                            "generator {g} out of range 0..{size}"
                        )));
                    }
                }
                let reached = closure(size, &mul, id, &gens);
                if reached.iter().filter(|&&x| x).count() != size {
                    return Err(Error::InvalidGroupTable(
                        "declared generators do not generate the group".into(),
                    ));
                }
                gens
            }
            None => greedy_generators(size, &mul, id),
        };
        Ok(FiniteGroupTable {
            size,
            mul,
            inv,
            id,
            gens,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.size + b] as usize
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }

    pub fn generators(&self) -> &[usize] {
        &self.gens
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.size).all(|a| (a..self.size).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Elements commuting with the whole group.
    pub fn center(&self) -> Vec<usize> {
        (0..self.size)
            .filter(|&z| (0..self.size).all(|g| self.mul(z, g) == self.mul(g, z)))
            .collect()
    }

    /// The cyclic group Z/n with generator 1.
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 || n > DEFAULT_ORACLE_CAP {
            return Err(Error::InvalidGroupTable(format!(
                "cyclic order {n} outside 1..={DEFAULT_ORACLE_CAP}"
            )));
        }
        let gens = if n > 1 { vec![1] } else { vec![] };
        Self::from_fn(n, |a, b| (a + b) % n, Some(gens))
    }

    /// The direct sum of cyclic groups Z/m_1 x ... x Z/m_r with the
    /// mixed-radix element encoding (the last modulus varies fastest).
    pub fn abelian(moduli: &[usize]) -> Result<Self> {
        let mut size = 1usize;
        for &m in moduli {
            if m == 0 {
                return Err(Error::InvalidGroupTable("zero modulus".into()));
            }
            size = size
                .checked_mul(m)
                .filter(|&s| s <= DEFAULT_ORACLE_CAP)
                .ok_or(Error::CapExceeded {
                    needed: usize::MAX,
                    cap: DEFAULT_ORACLE_CAP,
                })?;
        }
        let moduli = moduli.to_vec();
        let add = {
            let moduli = moduli.clone();
            move |a: usize, b: usize| {
                let mut a = a;
                let mut b = b;
                let mut out = 0usize;
                let mut scale = 1usize;
                for &m in moduli.iter().rev() {
                    out += ((a + b) % m) * scale;
                    scale *= m;
                    a /= m;
                    b /= m;
                }
                out
            }
        };
        let mut gens = Vec::new();
        let mut scale = 1usize;
        for &m in moduli.iter().rev() {
            if m > 1 {
                gens.push(scale);
            }
            scale *= m;
        }
        Self::from_fn(size, add, Some(gens))
    }

    /// The direct product, with pairs encoded as `a * other.size + b`.
    pub fn direct_product(&self, other: &FiniteGroupTable) -> Result<Self> {
        let size = self
            .size
            .checked_mul(other.size)
            .filter(|&s| s <= DEFAULT_ORACLE_CAP)
            .ok_or(Error::CapExceeded {
                needed: self.size.saturating_mul(other.size),
                cap: DEFAULT_ORACLE_CAP,
            })?;
        let q = other.size;
        let mut gens: Vec<usize> = self.gens.iter().map(|&g| g * q + other.id).collect();
        gens.extend(other.gens.iter().map(|&h| self.id * q + h));
        Self::from_fn(
            size,
            |x, y| self.mul(x / q, y / q) * q + other.mul(x % q, y % q),
            Some(gens),
        )
    }

    /// Closes `seed` under multiplication and returns the sorted subgroup.
    pub fn subgroup_closure(&self, seed: &[usize]) -> Result<Vec<usize>> {
        for &g in seed {
            if g >= self.size {
                return Err(Error::InvalidGroupTable(format!(
                    "element {g} out of range 0..{}",
                    self.size
                )));
            }
        }
        let reached = closure(self.size, &self.mul, self.id, seed);
        Ok((0..self.size).filter(|&x| reached[x]).collect())
    }

    /// Relabels a subgroup as a group in its own right. Returns the table
    /// together with the sorted list mapping new indices to old elements.
    pub fn subgroup_table(&self, elements: &[usize]) -> Result<(Self, Vec<usize>)> {
        let mut elems = elements.to_vec();
        elems.sort_unstable();
        elems.dedup();
        if !elems.contains(&self.id) {
            return Err(Error::InvalidGroupTable(
                "subgroup does not contain the identity".into(),
            ));
        }
        let pos = |x: usize| elems.binary_search(&x);
        for &a in &elems {
            if a >= self.size {
                return Err(Error::InvalidGroupTable(format!(
                    "element {a} out of range 0..{}",
                    self.size
                )));
            }
            if pos(self.inv(a)).is_err() {
                return Err(Error::InvalidGroupTable(format!(
                    "subgroup is not closed under inversion at {a}"
                )));
            }
            for &b in &elems {
                if pos(self.mul(a, b)).is_err() {
                    return Err(Error::InvalidGroupTable(format!(
                        "subgroup is not closed under multiplication at ({a}, {b})"
                    )));
                }
            }
        }
        let table = Self::from_fn(
            elems.len(),
            |a, b| pos(self.mul(elems[a], elems[b])).unwrap(),
            None,
        )?;
        Ok((table, elems))
    }

    /// The quotient by a normal subgroup. Returns the quotient table, the
    /// coset index of every original element, and the minimal
    /// representative of each coset.
    pub fn quotient_table(&self, normal: &[usize]) -> Result<(Self, Vec<usize>, Vec<usize>)> {
        let (_, elems) = self.subgroup_table(normal)?;
        for &h in &elems {
            for g in 0..self.size {
                let conj = self.mul(self.mul(g, h), self.inv(g));
                if elems.binary_search(&conj).is_err() {
                    return Err(Error::InvalidGroupTable(format!(
                        "subgroup is not normal: {g} conjugates {h} outside it"
                    )));
                }
            }
        }
        let mut coset_of = vec![usize::MAX; self.size];
        let mut reps = Vec::new();
        for x in 0..self.size {
            if coset_of[x] != usize::MAX {
                continue;
            }
            let c = reps.len();
            for &h in &elems {
                coset_of[self.mul(x, h)] = c;
            }
            reps.push(x);
        }
        let table = Self::from_fn(
            reps.len(),
            |a, b| coset_of[self.mul(reps[a], reps[b])],
            None,
        )?;
        Ok((table, coset_of, reps))
    }
}

/// Cayley-graph reachability from the identity under the given seeds.
fn closure(size: usize, mul: &[u32], id: usize, seeds: &[usize]) -> Vec<bool> {
    let at = |a: usize, b: usize| mul[a * size + b] as usize;
    let mut in_set = vec![false; size];
    in_set[id] = true;
    let mut work = vec![id];
    let mut i = 0;
    while i < work.len() {
        let a = work[i];
        i += 1;
        for &s in seeds {
            for x in [at(a, s), at(s, a)] {
                if !in_set[x] {
                    in_set[x] = true;
                    work.push(x);
                }
            }
        }
    }
    in_set
}

fn greedy_generators(size: usize, mul: &[u32], id: usize) -> Vec<usize> {
    let mut gens = Vec::new();
    let mut reached = closure(size, mul, id, &gens);
    while let Some(x) = (0..size).find(|&x| !reached[x]) {
        gens.push(x);
        reached = closure(size, mul, id, &gens);
    }
    gens
}

/// An automorphism of a [`FiniteGroupTable`], stored as a permutation of
/// element indices.
#[derive(Clone, Debug)]
pub struct FiniteAutomorphism {
    map: Vec<u32>,
}

impl FiniteAutomorphism {
    /// Validates bijectivity exactly and multiplicativity exhaustively on
    /// small tables (sampled on large ones).
    pub fn new(table: &FiniteGroupTable, map: Vec<u32>) -> Result<Self> {
        let size = table.size();
        if map.len() != size {
            return Err(Error::InvalidAutomorphism(format!(
                "map has {} entries for a group of size {size}",
                map.len()
            )));
        }
        let mut seen = vec![false; size];
        for &x in &map {
            if x as usize >= size || seen[x as usize] {
                return Err(Error::InvalidAutomorphism(
                    "map is not a permutation of the elements".into(),
                ));
            }
            seen[x as usize] = true;
        }
        let check = |a: usize, b: usize| -> Result<()> {
            if map[table.mul(a, b)] as usize != table.mul(map[a] as usize, map[b] as usize) {
                return Err(Error::InvalidAutomorphism(format!(
                    "map is not multiplicative on ({a}, {b})"
                )));
            }
            Ok(())
        };
        if size <= HOM_EXHAUSTIVE {
            for a in 0..size {
                for b in 0..size {
                    check(a, b)?;
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(VALIDATION_SEED);
            for _ in 0..HOM_SAMPLES {
                check(rng.gen_range(0..size), rng.gen_range(0..size))?;
            }
        }
        Ok(FiniteAutomorphism { map })
    }

    pub fn identity(table: &FiniteGroupTable) -> Self {
        FiniteAutomorphism {
            map: (0..table.size() as u32).collect(),
        }
    }

    /// `x -> g x g^{-1}`.
    pub fn inner(table: &FiniteGroupTable, g: usize) -> Self {
        let gi = table.inv(g);
        FiniteAutomorphism {
            map: (0..table.size())
                .map(|x| table.mul(table.mul(g, x), gi) as u32)
                .collect(),
        }
    }

    /// `x -> x^{-1}`; an automorphism exactly for abelian tables.
    pub fn inversion(table: &FiniteGroupTable) -> Result<Self> {
        Self::new(table, table.inv.clone())
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x] as usize
    }

    /// `self` after `other`: `x -> self(other(x))`.
    pub fn compose(&self, other: &FiniteAutomorphism) -> Self {
        FiniteAutomorphism {
            map: other.map.iter().map(|&x| self.map[x as usize]).collect(),
        }
    }
}

/// The twisted-conjugacy partition of a finite group.
#[derive(Clone, Debug)]
pub struct TwistedClasses {
    pub count: usize,
    /// The minimal element of each class, in increasing order.
    pub representatives: Vec<usize>,
    class_of: Vec<u32>,
}

impl TwistedClasses {
    /// Index into `representatives` of the class containing `x`.
    pub fn class_index(&self, x: usize) -> usize {
        self.class_of[x] as usize
    }

    pub fn same_class(&self, x: usize, y: usize) -> bool {
        self.class_of[x] == self.class_of[y]
    }
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let up = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = up;
            x = up;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[ra.max(rb) as usize] = ra.min(rb);
        }
    }
}

fn classes_from(mut uf: UnionFind, size: usize) -> TwistedClasses {
    let mut class_of = vec![0u32; size];
    let mut representatives = Vec::new();
    let mut index_of_root = vec![u32::MAX; size];
    for x in 0..size {
        let root = uf.find(x as u32) as usize;
        if index_of_root[root] == u32::MAX {
            // roots are the minima of their classes, so they appear first
            index_of_root[root] = representatives.len() as u32;
            representatives.push(x);
        }
        class_of[x] = index_of_root[root];
    }
    TwistedClasses {
        count: representatives.len(),
        representatives,
        class_of,
    }
}

/// Partitions the group into classes of the relation `x ~ g x phi(g)^{-1}`.
/// Since that is a group action, joining along a generating set suffices.
pub fn twisted_classes(table: &FiniteGroupTable, phi: &FiniteAutomorphism) -> TwistedClasses {
    let size = table.size();
    let mut uf = UnionFind::new(size);
    for x in 0..size {
        for &g in table.generators() {
            let y = table.mul(table.mul(g, x), table.inv(phi.apply(g)));
            uf.union(x as u32, y as u32);
        }
    }
    classes_from(uf, size)
}

/// Same partition, but joining over every group element rather than a
/// generating set; quadratic, and used to cross-check [`twisted_classes`].
pub fn twisted_classes_exhaustive(
    table: &FiniteGroupTable,
    phi: &FiniteAutomorphism,
) -> TwistedClasses {
    let size = table.size();
    let mut uf = UnionFind::new(size);
    for x in 0..size {
        for g in 0..size {
            let y = table.mul(table.mul(g, x), table.inv(phi.apply(g)));
            uf.union(x as u32, y as u32);
        }
    }
    classes_from(uf, size)
}

/// Reduces `UT_n(Z)` and a normal-form automorphism mod `modulus`,
/// producing the finite group with superdiagonal transvections as
/// generators and the induced automorphism. The automorphism is computed
/// by applying the exact characteristic-zero map to each residue matrix
/// and reducing, which agrees with the induced map because all the
/// formulas are polynomial with integer coefficients.
pub fn ut_mod(
    auto: &NormalFormAuto,
    modulus: u32,
) -> Result<(FiniteGroupTable, FiniteAutomorphism)> {
    ut_mod_with_cap(auto, modulus, DEFAULT_ORACLE_CAP)
}

pub fn ut_mod_with_cap(
    auto: &NormalFormAuto,
    modulus: u32,
    cap: usize,
) -> Result<(FiniteGroupTable, FiniteAutomorphism)> {
    let desc = auto.desc();
    if desc.kind() != RingKind::Integers {
        return Err(Error::UnsupportedRing(
            "finite reductions are taken from UT_n(Z)".into(),
        ));
    }
    if modulus < 2 {
        return Err(Error::InvalidRing(format!(
            "modulus {modulus} must be at least 2"
        )));
    }
    let n = auto.n();
    let e = n * (n - 1) / 2;
    let size = (0..e).try_fold(1usize, |acc, _| acc.checked_mul(modulus as usize));
    let size = match size {
        Some(s) if s <= cap => s,
        Some(s) => return Err(Error::CapExceeded { needed: s, cap }),
        None => {
            return Err(Error::CapExceeded {
                needed: usize::MAX,
                cap,
            })
        }
    };

    let positions: Vec<(usize, usize)> = (1..=n)
        .flat_map(|i| (i + 1..=n).map(move |j| (i, j)))
        .collect();
    let mut pos_of = vec![usize::MAX; (n + 1) * (n + 1)];
    for (p, &(i, j)) in positions.iter().enumerate() {
        pos_of[i * (n + 1) + j] = p;
    }
    let m = modulus as u64;
    let mut coords = vec![0u32; size * e];
    for idx in 0..size {
        let mut t = idx as u64;
        for p in 0..e {
            coords[idx * e + p] = (t % m) as u32;
            t /= m;
        }
    }
    let encode = |c: &[u32]| -> usize {
        let mut idx = 0u64;
        for p in (0..e).rev() {
            idx = idx * m + c[p] as u64;
        }
        idx as usize
    };

    let table = FiniteGroupTable::from_fn(
        size,
        |a, b| {
            let ca = &coords[a * e..(a + 1) * e];
            let cb = &coords[b * e..(b + 1) * e];
            let mut out = vec![0u32; e];
            for (p, &(i, j)) in positions.iter().enumerate() {
                let mut s = (ca[p] + cb[p]) as u64;
                for k in i + 1..j {
                    let ik = pos_of[i * (n + 1) + k];
                    let kj = pos_of[k * (n + 1) + j];
                    s += ca[ik] as u64 * cb[kj] as u64;
                }
                out[p] = (s % m) as u32;
            }
            encode(&out)
        },
        Some(
            (1..n)
                .map(|i| {
                    let mut c = vec![0u32; e];
                    c[pos_of[i * (n + 1) + (i + 1)]] = 1;
                    encode(&c)
                })
                .collect(),
        ),
    )?;

    let big_m = BigInt::from(modulus);
    let mut map = vec![0u32; size];
    for idx in 0..size {
        let mut x = UniTriMatrix::identity(desc, n)?;
        for (p, &(i, j)) in positions.iter().enumerate() {
            let v = coords[idx * e + p];
            if v != 0 {
                x.set_entry(i, j, RingElem::from_int(desc, v as i64))?;
            }
        }
        let y = auto.apply(&x)?;
        let mut c = vec![0u32; e];
        for (p, &(i, j)) in positions.iter().enumerate() {
            let v = &y.get(i, j).to_lattice()?[0];
            let r = ((v % &big_m) + &big_m) % &big_m;
            c[p] = r.to_u32().expect("residue fits in u32");
        }
        map[idx] = encode(&c) as u32;
    }
    let phi = FiniteAutomorphism::new(&table, map)?;
    Ok((table, phi))
}

/// The automorphism `(x, y) -> (phi_p(x), phi_q(y))` of a
/// [`FiniteGroupTable::direct_product`].
pub fn product_automorphism(
    p: &FiniteGroupTable,
    phi_p: &FiniteAutomorphism,
    q: &FiniteGroupTable,
    phi_q: &FiniteAutomorphism,
) -> FiniteAutomorphism {
    let qs = q.size();
    FiniteAutomorphism {
        map: (0..p.size() * qs)
            .map(|x| (phi_p.apply(x / qs) * qs + phi_q.apply(x % qs)) as u32)
            .collect(),
    }
}

/// One verified identity or inequality about twisted class counts.
#[derive(Clone, Debug)]
pub struct PropositionCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct PropositionOptions {
    /// Number of random inner twists to compare against the base count.
    pub inner_twists: usize,
    pub seed: u64,
    /// A central, invariant subgroup for the extension inequality.
    pub central_subgroup: Option<Vec<usize>>,
    /// Check the index formula when the table is abelian.
    pub abelian_index: bool,
}

impl Default for PropositionOptions {
    fn default() -> Self {
        PropositionOptions {
            inner_twists: 8,
            seed: 0,
            central_subgroup: None,
            abelian_index: true,
        }
    }
}

#[derive(Debug)]
pub struct PropositionReport {
    pub group_size: usize,
    pub base_count: usize,
    pub checks: Vec<PropositionCheck>,
}

impl PropositionReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Composing with any inner automorphism must not change the class count.
pub fn check_inner_invariance(
    table: &FiniteGroupTable,
    phi: &FiniteAutomorphism,
    twists: usize,
    seed: u64,
) -> PropositionCheck {
    let base = twisted_classes(table, phi).count;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut passed = true;
    let mut detail = format!("R = {base}");
    for _ in 0..twists {
        let g = rng.gen_range(0..table.size());
        let twisted = FiniteAutomorphism::inner(table, g).compose(phi);
        let count = twisted_classes(table, &twisted).count;
        if count != base {
            passed = false;
            detail = format!("twist by {g} gives {count} classes instead of {base}");
            break;
        }
    }
    if passed {
        detail.push_str(&format!(" across {twists} inner twists"));
    }
    PropositionCheck {
        name: "inner-invariance",
        passed,
        detail,
    }
}

/// On a direct product with a componentwise automorphism, class counts
/// multiply.
pub fn check_product(
    p: &FiniteGroupTable,
    phi_p: &FiniteAutomorphism,
    q: &FiniteGroupTable,
    phi_q: &FiniteAutomorphism,
) -> Result<PropositionCheck> {
    let prod = p.direct_product(q)?;
    let phi = product_automorphism(p, phi_p, q, phi_q);
    let rp = twisted_classes(p, phi_p).count;
    let rq = twisted_classes(q, phi_q).count;
    let r = twisted_classes(&prod, &phi).count;
    Ok(PropositionCheck {
        name: "direct-product",
        passed: r == rp * rq,
        detail: format!("R(product) = {r}, factors {rp} * {rq} = {}", rp * rq),
    })
}

/// For an invariant central subgroup `H`, the count is bounded by the
/// product of the counts of the restriction to `H` and of the induced map
/// on `G/H` — and the bound can be strict, so only the inequality is
/// asserted.
pub fn check_central_quotient(
    table: &FiniteGroupTable,
    phi: &FiniteAutomorphism,
    subgroup: &[usize],
) -> Result<PropositionCheck> {
    let (sub, elems) = table.subgroup_table(subgroup)?;
    let center = table.center();
    for &h in &elems {
        if center.binary_search(&h).is_err() {
            return Err(Error::InvalidGroupTable(format!(
                "subgroup element {h} is not central"
            )));
        }
        if elems.binary_search(&phi.apply(h)).is_err() {
            return Err(Error::InvalidGroupTable(format!(
                "subgroup is not invariant: {h} maps outside it"
            )));
        }
    }
    let restricted = FiniteAutomorphism::new(
        &sub,
        elems
            .iter()
            .map(|&h| elems.binary_search(&phi.apply(h)).unwrap() as u32)
            .collect(),
    )?;
    let (quo, coset_of, reps) = table.quotient_table(&elems)?;
    let induced = FiniteAutomorphism::new(
        &quo,
        reps.iter().map(|&r| coset_of[phi.apply(r)] as u32).collect(),
    )?;
    let r = twisted_classes(table, phi).count;
    let rsub = twisted_classes(&sub, &restricted).count;
    let rquo = twisted_classes(&quo, &induced).count;
    let bound = rsub * rquo;
    Ok(PropositionCheck {
        name: "central-quotient",
        passed: r <= bound && rquo <= r,
        detail: format!(
            "R = {r} <= {rsub} * {rquo} = {bound}{}",
            if r < bound { " (strict)" } else { " (equality)" }
        ),
    })
}

/// All proper nontrivial subgroups of the center that `phi` maps into
/// themselves, each sorted; computed by closing the subgroup lattice of
/// the center under joins. Intended for small centers.
pub fn invariant_central_subgroups(
    table: &FiniteGroupTable,
    phi: &FiniteAutomorphism,
) -> Result<Vec<Vec<usize>>> {
    let center = table.center();
    let mut subgroups: Vec<Vec<usize>> = vec![vec![table.id()]];
    for &z in &center {
        subgroups.push(table.subgroup_closure(&[z])?);
    }
    subgroups.sort();
    subgroups.dedup();
    loop {
        let mut grew = false;
        let mut joins = Vec::new();
        for a in 0..subgroups.len() {
            for b in a + 1..subgroups.len() {
                let mut seed = subgroups[a].clone();
                seed.extend_from_slice(&subgroups[b]);
                let join = table.subgroup_closure(&seed)?;
                if !subgroups.contains(&join) && !joins.contains(&join) {
                    joins.push(join);
                    grew = true;
                }
            }
        }
        subgroups.extend(joins);
        if !grew {
            break;
        }
        subgroups.sort();
        subgroups.dedup();
    }
    subgroups.retain(|s| {
        s.len() > 1
            && s.len() < table.size()
            && s.iter().all(|&h| s.binary_search(&phi.apply(h)).is_ok())
    });
    subgroups.sort();
    Ok(subgroups)
}

/// On an abelian group the class of the identity is the subgroup of
/// twisted boundaries `x phi(x)^{-1}`, and the count is its index.
pub fn check_abelian_index(
    table: &FiniteGroupTable,
    phi: &FiniteAutomorphism,
) -> Result<PropositionCheck> {
    if !table.is_abelian() {
        return Err(Error::InvalidGroupTable(
            "the index formula applies to abelian tables".into(),
        ));
    }
    let size = table.size();
    let mut in_image = vec![false; size];
    let mut image = 0usize;
    for x in 0..size {
        let b = table.mul(x, table.inv(phi.apply(x)));
        if !in_image[b] {
            in_image[b] = true;
            image += 1;
        }
    }
    let index = size / image;
    let count = twisted_classes(table, phi).count;
    Ok(PropositionCheck {
        name: "abelian-index",
        passed: count == index && size % image == 0,
        detail: format!("R = {count}, boundary subgroup has index {index}"),
    })
}

/// Runs the requested structural checks against exhaustive class counts.
pub fn check_propositions(
    table: &FiniteGroupTable,
    phi: &FiniteAutomorphism,
    opts: &PropositionOptions,
) -> Result<PropositionReport> {
    let base = twisted_classes(table, phi).count;
    let mut checks = Vec::new();
    if opts.inner_twists > 0 {
        checks.push(check_inner_invariance(
            table,
            phi,
            opts.inner_twists,
            opts.seed,
        ));
    }
    if let Some(subgroup) = &opts.central_subgroup {
        checks.push(check_central_quotient(table, phi, subgroup)?);
    }
    if opts.abelian_index && table.is_abelian() {
        checks.push(check_abelian_index(table, phi)?);
    }
    Ok(PropositionReport {
        group_size: table.size(),
        base_count: base,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rings::{RingAut, RingDescriptor};

    fn heis_mod3() -> (FiniteGroupTable, FiniteAutomorphism) {
        let desc = RingDescriptor::integers();
        let one = RingElem::one(desc);
        let nf = NormalFormAuto::diagonal(desc, vec![one.clone(); 3], RingAut::Id, 0).unwrap();
        ut_mod(&nf, 3).unwrap()
    }

    fn heis_mod3_twisted() -> (FiniteGroupTable, FiniteAutomorphism) {
        let desc = RingDescriptor::integers();
        let d = vec![
            RingElem::one(desc),
            RingElem::from_int(desc, -1),
            RingElem::one(desc),
        ];
        let nf = NormalFormAuto::diagonal(desc, d, RingAut::Id, 0).unwrap();
        ut_mod(&nf, 3).unwrap()
    }

    #[test]
    fn rejects_malformed_tables() {
        // subtraction mod 3: Latin, but no identity
        let rows = vec![vec![0, 2, 1], vec![1, 0, 2], vec![2, 1, 0]];
        assert!(matches!(
            FiniteGroupTable::from_rows(&rows, None),
            Err(Error::InvalidGroupTable(msg)) if msg.contains("identity")
        ));
        // a repeated product in a row
        let rows = vec![vec![0, 1], vec![1, 1]];
        assert!(FiniteGroupTable::from_rows(&rows, None).is_err());
        // a loop whose element 2 has only one-sided inverses
        let rows = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 3, 4, 0, 1],
            vec![3, 4, 1, 2, 0],
            vec![4, 2, 0, 1, 3],
        ];
        assert!(matches!(
            FiniteGroupTable::from_rows(&rows, None),
            Err(Error::InvalidGroupTable(msg)) if msg.contains("inverse")
        ));
        // generators that do not generate
        let c4 = |a: usize, b: usize| (a + b) % 4;
        assert!(matches!(
            FiniteGroupTable::from_fn(4, c4, Some(vec![2])),
            Err(Error::InvalidGroupTable(msg)) if msg.contains("generate")
        ));
    }

    #[test]
    fn rejects_non_multiplicative_maps() {
        let c4 = FiniteGroupTable::cyclic(4).unwrap();
        assert!(matches!(
            FiniteAutomorphism::new(&c4, vec![0, 2, 1, 3]),
            Err(Error::InvalidAutomorphism(_))
        ));
        assert!(FiniteAutomorphism::new(&c4, vec![0, 0, 1, 3]).is_err());
    }

    #[test]
    fn c4_inversion_has_two_classes() {
        let c4 = FiniteGroupTable::cyclic(4).unwrap();
        let phi = FiniteAutomorphism::inversion(&c4).unwrap();
        let classes = twisted_classes(&c4, &phi);
        assert_eq!(classes.count, 2);
        assert_eq!(classes.representatives, vec![0, 1]);
        // spot-check the defining relation x ~ g x phi(g)^{-1}
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..32 {
            let x = rng.gen_range(0..4);
            let g = rng.gen_range(0..4);
            let y = c4.mul(c4.mul(g, x), c4.inv(phi.apply(g)));
            assert!(classes.same_class(x, y));
        }
    }

    #[test]
    fn identity_twist_counts_ordinary_conjugacy_classes() {
        let (table, phi) = heis_mod3();
        assert_eq!(table.size(), 27);
        assert_eq!(twisted_classes(&table, &phi).count, 11);
    }

    #[test]
    fn reduction_sizes_and_bad_inputs() {
        let desc = RingDescriptor::integers();
        let id3 = NormalFormAuto::diagonal(
            desc,
            vec![RingElem::one(desc); 3],
            RingAut::Id,
            0,
        )
        .unwrap();
        let (t2, _) = ut_mod(&id3, 2).unwrap();
        assert_eq!(t2.size(), 8);
        let (t3, _) = ut_mod(&id3, 3).unwrap();
        assert_eq!(t3.size(), 27);
        assert!(matches!(ut_mod(&id3, 1), Err(Error::InvalidRing(_))));

        // a diagonal entry that is not a unit is rejected upstream,
        // before any reduction can happen
        let d = vec![
            RingElem::one(desc),
            RingElem::zero(desc),
            RingElem::one(desc),
        ];
        assert!(matches!(
            NormalFormAuto::diagonal(desc, d, RingAut::Id, 0),
            Err(Error::NotAUnit(_))
        ));

        let id4 = NormalFormAuto::diagonal(
            desc,
            vec![RingElem::one(desc); 4],
            RingAut::Id,
            0,
        )
        .unwrap();
        assert!(matches!(ut_mod(&id4, 5), Err(Error::CapExceeded { .. })));

        let q = RingDescriptor::rationals();
        let idq = NormalFormAuto::diagonal(q, vec![RingElem::one(q); 3], RingAut::Id, 0).unwrap();
        assert!(matches!(ut_mod(&idq, 3), Err(Error::UnsupportedRing(_))));
    }

    #[test]
    fn generator_joins_match_exhaustive_joins() {
        let c4 = FiniteGroupTable::cyclic(4).unwrap();
        let inv = FiniteAutomorphism::inversion(&c4).unwrap();
        let (heis, psi) = heis_mod3_twisted();
        let z5sq = FiniteGroupTable::abelian(&[5, 5]).unwrap();
        let shear = FiniteAutomorphism::new(
            &z5sq,
            (0..25)
                .map(|x| {
                    let (a, b) = (x / 5, x % 5);
                    (((a + b) % 5) * 5 + b) as u32
                })
                .collect(),
        )
        .unwrap();
        for (table, phi) in [(&c4, &inv), (&heis, &psi), (&z5sq, &shear)] {
            let fast = twisted_classes(table, phi);
            let full = twisted_classes_exhaustive(table, phi);
            assert_eq!(fast.count, full.count);
            for x in 0..table.size() {
                assert_eq!(
                    fast.class_index(x),
                    full.class_index(x),
                    "partition differs at {x}"
                );
            }
        }
    }

    #[test]
    fn inner_twists_preserve_counts() {
        let (table, phi) = heis_mod3_twisted();
        let check = check_inner_invariance(&table, &phi, 50, 0);
        assert!(check.passed, "{}", check.detail);
    }

    #[test]
    fn product_counts_multiply() {
        let c4 = FiniteGroupTable::cyclic(4).unwrap();
        let inv = FiniteAutomorphism::inversion(&c4).unwrap();
        let (heis, id) = heis_mod3();
        let check = check_product(&c4, &inv, &heis, &id).unwrap();
        assert!(check.passed, "{}", check.detail);
        assert!(check.detail.contains("22"));
    }

    #[test]
    fn central_extension_bound_is_strict_on_c4() {
        let c4 = FiniteGroupTable::cyclic(4).unwrap();
        let phi = FiniteAutomorphism::inversion(&c4).unwrap();
        let check = check_central_quotient(&c4, &phi, &[0, 2]).unwrap();
        assert!(check.passed, "{}", check.detail);
        assert!(check.detail.contains("2 <= 2 * 2 = 4"));
        assert!(check.detail.contains("strict"));
    }

    #[test]
    fn central_extension_bound_on_heisenberg_center() {
        let (table, phi) = heis_mod3();
        let center = table.center();
        assert_eq!(center.len(), 3);
        let check = check_central_quotient(&table, &phi, &center).unwrap();
        assert!(check.passed, "{}", check.detail);
    }

    #[test]
    fn invariant_subgroup_enumeration() {
        let c4 = FiniteGroupTable::cyclic(4).unwrap();
        let phi = FiniteAutomorphism::inversion(&c4).unwrap();
        assert_eq!(
            invariant_central_subgroups(&c4, &phi).unwrap(),
            vec![vec![0, 2]]
        );

        let (heis, psi) = heis_mod3_twisted();
        let subs = invariant_central_subgroups(&heis, &psi).unwrap();
        assert_eq!(subs, vec![heis.center()]);
        for s in &subs {
            assert!(check_central_quotient(&heis, &psi, s).unwrap().passed);
        }
    }

    #[test]
    fn abelian_index_formula_matches() {
        let z5sq = FiniteGroupTable::abelian(&[5, 5]).unwrap();
        // (a, b) -> (a + b, b): boundaries are the multiples of the first
        // basis vector, so R = 5
        let shear = FiniteAutomorphism::new(
            &z5sq,
            (0..25)
                .map(|x| {
                    let (a, b) = (x / 5, x % 5);
                    (((a + b) % 5) * 5 + b) as u32
                })
                .collect(),
        )
        .unwrap();
        let check = check_abelian_index(&z5sq, &shear).unwrap();
        assert!(check.passed, "{}", check.detail);
        assert_eq!(twisted_classes(&z5sq, &shear).count, 5);

        // (a, b) -> (2a, 3b): I - phi is invertible mod 5, one class
        let scale = FiniteAutomorphism::new(
            &z5sq,
            (0..25)
                .map(|x| {
                    let (a, b) = (x / 5, x % 5);
                    ((2 * a % 5) * 5 + 3 * b % 5) as u32
                })
                .collect(),
        )
        .unwrap();
        assert_eq!(twisted_classes(&z5sq, &scale).count, 1);

        let (heis, id) = heis_mod3();
        assert!(check_abelian_index(&heis, &id).is_err());
    }

    #[test]
    fn counts_survive_relabeling() {
        let (table, phi) = heis_mod3_twisted();
        let size = table.size();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut perm: Vec<usize> = (0..size).collect();
        for i in (1..size).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let mut inv_perm = vec![0usize; size];
        for (i, &p) in perm.iter().enumerate() {
            inv_perm[p] = i;
        }
        let relabeled =
            FiniteGroupTable::from_fn(size, |a, b| perm[table.mul(inv_perm[a], inv_perm[b])], None)
                .unwrap();
        let phi2 = FiniteAutomorphism::new(
            &relabeled,
            (0..size)
                .map(|x| perm[phi.apply(inv_perm[x])] as u32)
                .collect(),
        )
        .unwrap();
        assert_eq!(
            twisted_classes(&table, &phi).count,
            twisted_classes(&relabeled, &phi2).count
        );
    }

    #[test]
    fn proposition_driver_runs_everything() {
        let (table, phi) = heis_mod3_twisted();
        let opts = PropositionOptions {
            inner_twists: 10,
            central_subgroup: Some(table.center()),
            ..PropositionOptions::default()
        };
        let report = check_propositions(&table, &phi, &opts).unwrap();
        assert_eq!(report.group_size, 27);
        assert!(report.all_passed());
        assert_eq!(report.checks.len(), 2);
    }
}
