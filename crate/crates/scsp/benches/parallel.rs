//! Sequential vs parallel benchmarks for the two data-parallel hot paths:
//! per-scenario compilation and brute-force policy search.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use scsp::compile::{compile_with, CompileOptions};
use scsp::exec::ExecMode;
use scsp::oracle::{oracle_solve, OracleOptions};
use scsp::parser::parse_model;
use scsp::StochasticModel;

/// A two-stage model with a wide scenario tree (4^6 = 4096 scenarios) and
/// logic-heavy constraint bodies, so per-scenario fragments carry real work.
fn wide_compile_model() -> StochasticModel {
    let mut src = String::new();
    for i in 0..6 {
        src.push_str(&format!(
            "stoch w{i} in {{0:1/4, 1:1/4, 2:1/4, 3:1/4}} stage 1;\n"
        ));
    }
    src.push_str("int x in 0..8 stage 1;\nint y in 0..8 stage 2;\n");
    src.push_str("chance(3/4) 2*x + y >= w0 + w1 + w2 + w3;\n");
    src.push_str(
        "chance(1/2) (x - y <= w0 /\\ !(y = w2)) \\/ (y - x <= w1 /\\ w3 + w4 >= 2) \\/ x = w5;\n",
    );
    src.push_str("chance(2/3) !(x + y = w0 + w1 + w2) \\/ w3 <= 2;\n");
    src.push_str("x + y <= 12;\n");
    src.push_str("minimize expected 3*x + 2*y - w0 - w1 + w5;\n");
    parse_model(&src).expect("bench model parses")
}

/// A model whose policy space is large (3^10 ≈ 59k policies over 4 scenarios)
/// so the oracle's evaluation loop dominates.
fn wide_oracle_model() -> StochasticModel {
    let mut src = String::new();
    src.push_str("stoch a in {0:1/2, 1:1/2} stage 1;\n");
    src.push_str("stoch b in {0:1/2, 1:1/2} stage 1;\n");
    src.push_str("int x in 0..2 stage 1;\n");
    src.push_str("int y in 0..2 stage 1;\n");
    for i in 0..2 {
        src.push_str(&format!("int z{i} in 0..2 stage 2;\n"));
    }
    src.push_str("chance(3/4) x + y + z0 >= a + b;\n");
    src.push_str("z1 + x <= 4;\n");
    src.push_str("minimize expected 2*x + y + z0 + z1 - a;\n");
    parse_model(&src).expect("bench model parses")
}

fn bench_compile(c: &mut Criterion) {
    let model = wide_compile_model();
    let mut group = c.benchmark_group("compile");
    for mode in [ExecMode::Sequential, ExecMode::Parallel] {
        let label = match mode {
            ExecMode::Sequential => "sequential",
            ExecMode::Parallel => "parallel",
        };
        group.bench_with_input(BenchmarkId::from_parameter(label), &mode, |b, &mode| {
            let options = CompileOptions {
                max_scenarios: 100_000,
                mode,
            };
            b.iter(|| compile_with(&model, &options).expect("compiles"));
        });
    }
    group.finish();
}

fn bench_oracle(c: &mut Criterion) {
    let model = wide_oracle_model();
    let mut group = c.benchmark_group("oracle_solve");
    group.sample_size(10);
    for mode in [ExecMode::Sequential, ExecMode::Parallel] {
        let label = match mode {
            ExecMode::Sequential => "sequential",
            ExecMode::Parallel => "parallel",
        };
        group.bench_with_input(BenchmarkId::from_parameter(label), &mode, |b, &mode| {
            let options = OracleOptions {
                mode,
                ..OracleOptions::default()
            };
            b.iter(|| oracle_solve(&model, &options).expect("within caps"));
        });
    }
    group.finish();
}

criterion_group!(benches, bench_compile, bench_oracle);
criterion_main!(benches);
