use criterion::{criterion_group, criterion_main, Criterion};

use gmas_core::balance::find_vertex_balanced;
use gmas_core::birch::{BirchProblem, SolveOptions};
use gmas_core::network::{parse, GeneralizedNetwork};
use gmas_core::ratcore::RationalMatrix;
use gmas_core::signs::enumerate_sign_vectors;

fn fixture(name: &str) -> GeneralizedNetwork {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn bench_rref(c: &mut Criterion) {
    // a dense 8x12 integer matrix with rank 8
    let rows: Vec<Vec<i64>> = (0..8)
        .map(|i| (0..12).map(|j| ((i * 7 + j * 5) % 11) as i64 - 5).collect())
        .collect();
    let refs: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
    let m = RationalMatrix::from_i64_rows(&refs);
    c.bench_function("rref 8x12", |b| b.iter(|| std::hint::black_box(&m).rref()));
}

fn bench_sign_enumeration(c: &mut Criterion) {
    let net = fixture("fourspecies_a1_b1.net");
    let s = net.stoich_subspace();
    let st = net.kinetic_subspace().unwrap();
    c.bench_function("enumerate sigma(S), 4 species", |b| {
        b.iter(|| enumerate_sign_vectors(std::hint::black_box(&s)).unwrap())
    });
    c.bench_function("enumerate sigma(S~), 4 species", |b| {
        b.iter(|| enumerate_sign_vectors(std::hint::black_box(&st)).unwrap())
    });
}

fn bench_birch_solve(c: &mut Criterion) {
    let net = fixture("fourspecies_a1_b1.net");
    let rates = net.rates_or_default();
    let (x_star, _) = find_vertex_balanced(&net, &rates).unwrap().unwrap();
    let x0 = [2.0, 2.0, 2.0, 2.0];
    let problem = BirchProblem::from_network(&net, &x0, &x_star).unwrap();
    c.bench_function("birch solve, 4 species", |b| {
        b.iter(|| std::hint::black_box(&problem).solve(&SolveOptions::default()).unwrap())
    });
}

criterion_group!(benches, bench_rref, bench_sign_enumeration, bench_birch_solve);
criterion_main!(benches);
