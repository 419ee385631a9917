//! Timed workloads covering the four computational kernels: Smith normal
//! form, diagonal-family sweeps, finite-group class enumeration, and the
//! rational peeling solver.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use twistcalc_core::automorphism::{Automorphism, NormalFormAuto};
use twistcalc_core::engine::{self, SweepOptions};
use twistcalc_core::field_solver;
use twistcalc_core::lattice::{snf, IntMatrix};
use twistcalc_core::oracle;
use twistcalc_core::rings::{RingAut, RingDescriptor, RingElem};
use twistcalc_core::unitriangular::UniTriMatrix;

fn random_matrices(seed: u64, count: usize, dim: usize) -> Vec<IntMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let rows: Vec<Vec<i64>> = (0..dim)
                .map(|_| (0..dim).map(|_| rng.gen_range(-9..=9)).collect())
                .collect();
            IntMatrix::from_rows(&rows).unwrap()
        })
        .collect()
}

fn bench_snf(c: &mut Criterion) {
    let mats = random_matrices(1, 64, 5);
    c.bench_function("snf/5x5/64-matrices", |b| {
        b.iter(|| {
            for m in &mats {
                black_box(snf(m));
            }
        })
    });
}

fn bench_sweep(c: &mut Criterion) {
    let desc = RingDescriptor::gaussian();
    let opts = SweepOptions::default();
    let mut group = c.benchmark_group("sweep");
    group.sample_size(20);
    group.bench_function("gaussian/n5/1024-cases", |b| {
        b.iter(|| black_box(engine::r_infinity_sweep(desc, 5, &opts).unwrap()))
    });
    group.finish();
}

fn bench_oracle(c: &mut Criterion) {
    let desc = RingDescriptor::integers();
    let psi = NormalFormAuto::diagonal(
        desc,
        vec![
            RingElem::one(desc),
            RingElem::from_int(desc, -1),
            RingElem::one(desc),
        ],
        RingAut::Id,
        0,
    )
    .unwrap();
    let (table, phi) = oracle::ut_mod(&psi, 3).unwrap();
    c.bench_function("oracle/ut3-mod3/twisted-classes", |b| {
        b.iter(|| black_box(oracle::twisted_classes(&table, &phi)))
    });
}

fn bench_field_solve(c: &mut Criterion) {
    let q = RingDescriptor::rationals();
    let n = 5;
    let d: Vec<RingElem> = (0..n)
        .map(|i| RingElem::from_int(q, 1i64 << i))
        .collect();
    let auto =
        Automorphism::NormalForm(NormalFormAuto::diagonal(q, d, RingAut::Id, 0).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut x = UniTriMatrix::identity(q, n).unwrap();
    for i in 1..=n {
        for j in i + 1..=n {
            x.set_entry(i, j, RingElem::from_int(q, rng.gen_range(-9..=9)))
                .unwrap();
        }
    }
    c.bench_function("field-solve/rational/n5", |b| {
        b.iter(|| black_box(field_solver::solve_twisted(&auto, &x).unwrap()))
    });
}

criterion_group!(
    benches,
    bench_snf,
    bench_sweep,
    bench_oracle,
    bench_field_solve
);
criterion_main!(benches);
