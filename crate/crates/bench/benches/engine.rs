use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use numgame_bench::{fixture, ones};
use numgame_core::arith::AlgebraicReal;
use numgame_core::coxeter::{positive_roots, RootMode};
use numgame_core::game::{game_tree, TreeOptions};
use numgame_core::{classify, play, PlayOptions};

fn games(c: &mut Criterion) {
    let e8 = fixture("e8");
    let start = ones(&e8);
    c.bench_function("play e8 from ones", |b| {
        b.iter(|| play(&e8, black_box(&start), &PlayOptions::default()).unwrap())
    });

    let h4 = fixture("h4");
    let start = ones(&h4);
    c.bench_function("play h4 from ones", |b| {
        b.iter(|| play(&h4, black_box(&start), &PlayOptions::default()).unwrap())
    });

    let h3 = fixture("h3");
    let start = ones(&h3);
    c.bench_function("game tree h3 from ones", |b| {
        b.iter(|| game_tree(&h3, black_box(&start), &TreeOptions::default()).unwrap())
    });
}

fn arithmetic(c: &mut Criterion) {
    let x = AlgebraicReal::two_cos(7).try_sub(&AlgebraicReal::from_ratio(9, 5)).unwrap();
    c.bench_function("sign near zero in degree 3", |b| b.iter(|| black_box(&x).sign()));

    let a = AlgebraicReal::two_cos(5);
    let b7 = AlgebraicReal::two_cos(7);
    c.bench_function("mixed-level product", |b| b.iter(|| black_box(&a).try_mul(black_box(&b7)).unwrap()));
}

fn geometry(c: &mut Criterion) {
    let h4 = fixture("h4");
    c.bench_function("h4 positive roots", |b| b.iter(|| positive_roots(black_box(&h4), RootMode::Orbit).unwrap()));
    let e8 = fixture("e8");
    c.bench_function("classify e8", |b| b.iter(|| classify(black_box(&e8))));
}

criterion_group!(benches, games, arithmetic, geometry);
criterion_main!(benches);
