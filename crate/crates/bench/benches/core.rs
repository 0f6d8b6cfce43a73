use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qott_core::maskers::{verify_masking, Family};
use qott_core::protocol::{exact_acceptance, run_protocol, AliceStrategy, DetectorModel};
use qott_core::qott::{build_qott, QottParams};
use qott_core::qudit::{random_density, random_pure, Dim, Register};
use qott_core::rng::seeded;

fn partial_trace(c: &mut Criterion) {
    let mut group = c.benchmark_group("partial_trace");
    for d in [3usize, 5, 7] {
        let reg = Register::new(&[("A", d), ("B", d), ("C", d)]).unwrap();
        let psi = random_pure(&reg, &mut seeded(1));
        group.bench_with_input(BenchmarkId::from_parameter(d), &psi, |b, psi| {
            b.iter(|| black_box(psi.reduced(&["B"]).unwrap()))
        });
    }
    group.finish();
}

fn masker_verification(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify_masking");
    group.sample_size(10);
    for d in [3usize, 5] {
        let m = Family::FourQudit.build(Dim::new(d).unwrap()).unwrap().unwrap();
        group.bench_with_input(BenchmarkId::new("four-qudit", d), &m, |b, m| {
            b.iter(|| black_box(verify_masking(m).unwrap()))
        });
    }
    group.finish();
}

fn commodity(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_qott");
    for p in [3usize, 5] {
        let params = QottParams::minimal(p, &[1, 2]).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(p), &params, |b, params| {
            b.iter(|| black_box(build_qott(params, None, 3).unwrap()))
        });
    }
    group.finish();
}

fn protocol(c: &mut Criterion) {
    let mut group = c.benchmark_group("protocol");
    group.sample_size(10);
    for p in [3usize, 5] {
        let params = QottParams::minimal(p, &[1, 2]).unwrap();
        let secret = random_density(&Register::single("I", p).unwrap(), p, &mut seeded(2));
        let honest = AliceStrategy::honest(&secret).unwrap();
        let cheat = AliceStrategy::wrong_indices(&secret, [1, 0]).unwrap();
        group.bench_with_input(BenchmarkId::new("honest_run", p), &params, |b, params| {
            b.iter(|| black_box(run_protocol(params, None, &honest, DetectorModel::ideal(), 4).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("exact_cheat_acceptance", p), &params, |b, params| {
            b.iter(|| black_box(exact_acceptance(params, &cheat, DetectorModel::ideal()).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, partial_trace, masker_verification, commodity, protocol);
criterion_main!(benches);
