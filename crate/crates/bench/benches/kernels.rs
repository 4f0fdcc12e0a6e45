use std::collections::BTreeSet;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use galprod_core::bounds::{faltings_bound, product_av_bound, BSConstants, FieldInvariants};
use galprod_core::curves::{torsion_dims, trace_of_frobenius, trace_table};
use galprod_core::groups::{all_subgroups, build_delta_group, DEFAULT_ELEMENT_BUDGET, DEFAULT_SUBGROUP_BUDGET};
use galprod_core::sieve::{sieve_product, SieveInput};
use galprod_core::{CurveModel, FiniteGroupTable, PrimeModulus};
use num_bigint::BigUint;

fn e1() -> CurveModel {
    CurveModel::from_ints([0, 0, 0, 1, 10], Some(208), Some("208.c2")).unwrap()
}

fn e2() -> CurveModel {
    CurveModel::from_ints([0, 0, 0, -362249, 165197113], Some(988), Some("988.c1")).unwrap()
}

fn curves(c: &mut Criterion) {
    let e = e1();
    c.bench_function("trace p=10007", |b| b.iter(|| trace_of_frobenius(&e, black_box(10007)).unwrap()));
    c.bench_function("trace p=1000003", |b| b.iter(|| trace_of_frobenius(&e, black_box(1_000_003)).unwrap()));
    c.bench_function("torsion dims p=10007", |b| b.iter(|| torsion_dims(&e, black_box(10007)).unwrap()));
    c.bench_function("trace table pmax=10000", |b| b.iter(|| trace_table(&e, black_box(10_000)).unwrap()));
}

fn sieve(c: &mut Criterion) {
    let input = SieveInput::new(vec![e1(), e2()], vec![BTreeSet::from([2]), BTreeSet::new()], 200);
    c.bench_function("sieve example pair pmax=200", |b| b.iter(|| sieve_product(black_box(&input)).unwrap()));
}

fn groups(c: &mut Criterion) {
    let m3 = PrimeModulus::new(3).unwrap();
    let gl23 = FiniteGroupTable::gsp(1, m3).unwrap();
    c.bench_function("subgroups GL2(F3)", |b| b.iter(|| all_subgroups(&gl23, DEFAULT_SUBGROUP_BUDGET).unwrap().len()));
    let m2 = PrimeModulus::new(2).unwrap();
    let d2 = build_delta_group(1, 2, m2, DEFAULT_ELEMENT_BUDGET).unwrap();
    c.bench_function("subgroups Delta2(F2)", |b| b.iter(|| all_subgroups(&d2, DEFAULT_SUBGROUP_BUDGET).unwrap().len()));
    c.bench_function("build Delta2(F5)", |b| {
        b.iter(|| build_delta_group(1, 2, PrimeModulus::new(5).unwrap(), DEFAULT_ELEMENT_BUDGET).unwrap().order())
    });
}

fn bounds(c: &mut Criterion) {
    let q = FieldInvariants::rationals();
    let bs = BSConstants::default();
    let one = BigUint::from(1u8);
    c.bench_function("faltings g=2", |b| b.iter(|| faltings_bound(2, &q, &one, &one, &bs).unwrap()));
    let conds: Vec<BigUint> = [11u32, 37, 43, 389, 5077].iter().map(|&n| BigUint::from(n)).collect();
    let cs = vec!["0".to_string(); conds.len()];
    c.bench_function("product av n=5", |b| b.iter(|| product_av_bound(1, &q, &conds, &cs, &bs).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = curves, sieve, groups, bounds
}
criterion_main!(benches);
