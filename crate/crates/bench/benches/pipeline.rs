use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use polyrpc::{check_poly, eval_poly, mono_term, run_cs, selective_mono, slice, Fuel, TypeEnv};
use polyrpc_bench::{corpus, nested_loc_lams};

fn blowup(c: &mut Criterion) {
    let mut group = c.benchmark_group("mono_blowup");
    for n in [2, 4, 6, 8, 10] {
        let m = nested_loc_lams(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| {
            b.iter(|| mono_term(black_box(m)).unwrap())
        });
    }
    group.finish();
}

fn pipeline(c: &mut Criterion) {
    let terms = corpus(0x5eed, 8, 100);
    let env = TypeEnv::new();
    c.bench_function("check_poly/100", |b| {
        b.iter(|| {
            for (m, _, at) in &terms {
                check_poly(&env, at, black_box(m)).unwrap();
            }
        })
    });
    c.bench_function("eval_poly/100", |b| {
        b.iter(|| {
            for (m, _, at) in &terms {
                let _ = eval_poly(black_box(m), at, Fuel::default());
            }
        })
    });
    c.bench_function("mono_term/100", |b| {
        b.iter(|| {
            for (m, _, _) in &terms {
                mono_term(black_box(m)).unwrap();
            }
        })
    });
    c.bench_function("selective_mono/100", |b| {
        b.iter(|| {
            for (m, _, _) in &terms {
                selective_mono(black_box(m)).unwrap();
            }
        })
    });
    let monos: Vec<_> = terms
        .iter()
        .map(|(m, _, _)| mono_term(m).unwrap().output)
        .collect();
    c.bench_function("slice/100", |b| {
        b.iter(|| {
            for m in &monos {
                slice(black_box(m)).unwrap();
            }
        })
    });
    let programs: Vec<_> = monos.iter().map(|m| slice(m).unwrap()).collect();
    c.bench_function("run_cs/100", |b| {
        b.iter(|| {
            for p in &programs {
                let _ = run_cs(black_box(p), Fuel::default());
            }
        })
    });
}

criterion_group!(benches, blowup, pipeline);
criterion_main!(benches);
