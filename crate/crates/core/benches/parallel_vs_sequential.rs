use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use toda_tau::fredholm::{tau_n, TauConfig};
use toda_tau::kernel::{kernel_matrix, SigmaWeight};
use toda_tau::measures::schur_measure_table;
use toda_tau::series::Times;
use toda_tau::{Parallelism, ParamSeq};

const MODES: [(&str, Parallelism); 2] = [("sequential", Parallelism::Sequential), ("parallel", Parallelism::Parallel)];

fn kernel(c: &mut Criterion) {
    let t = Times::from(ParamSeq::from_real(&[0.5, 0.1]));
    let sigma = SigmaWeight::IndicatorPositive;
    let mut g = c.benchmark_group("kernel_matrix_48");
    for (name, par) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| kernel_matrix(&t, &t, &sigma, -24, 48, 96, black_box(par)).unwrap())
        });
    }
    g.finish();
}

fn tau(c: &mut Criterion) {
    let t = ParamSeq::from_real(&[0.5]);
    let sigma = SigmaWeight::Fermi { u: 0.3 };
    let mut g = c.benchmark_group("tau_fermi");
    for (name, par) in MODES {
        let cfg = TauConfig { parallelism: par, ..TauConfig::default() };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| tau_n(&t, &t, &sigma, 0, black_box(cfg)).unwrap())
        });
    }
    g.finish();
}

fn measure(c: &mut Criterion) {
    let t = ParamSeq::from_real(&[0.3, 0.1]);
    let mut g = c.benchmark_group("schur_table_14");
    g.sample_size(10);
    for (name, par) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| schur_measure_table(&t, &t, 14, black_box(par)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, kernel, tau, measure);
criterion_main!(benches);
