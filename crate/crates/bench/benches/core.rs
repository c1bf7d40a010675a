use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rfsqueeze_bench::{degraded, matched_lo, weak_drive};
use rfsqueeze_core::correlators::uniform_tau_grid;
use rfsqueeze_core::instrument::{CampaignModel, QuadratureResponse};
use rfsqueeze_core::{build_liouvillian, decompose_by_lo_order, g2_total, steady_state};

fn dynamics(c: &mut Criterion) {
    let p = weak_drive();
    c.bench_function("steady_state", |b| {
        b.iter(|| steady_state(&build_liouvillian(black_box(&p)).unwrap()).unwrap())
    });
}

fn correlators(c: &mut Criterion) {
    let p = weak_drive();
    let lo = matched_lo(&p);
    let grid = uniform_tau_grid(15.0 / p.gamma, 601).unwrap();
    c.bench_function("g2_total_601", |b| b.iter(|| g2_total(&p, &lo, black_box(&grid)).unwrap()));
    c.bench_function("lo_order_decomposition_601", |b| {
        b.iter(|| decompose_by_lo_order(&p, &lo, black_box(&grid)).unwrap())
    });
}

fn instrument(c: &mut Criterion) {
    let p = weak_drive();
    let lo = matched_lo(&p);
    let model = degraded();
    c.bench_function("degraded_response", |b| b.iter(|| QuadratureResponse::new(&p, black_box(&model)).unwrap()));
    let cm = CampaignModel::build(&p, &lo, &model).unwrap();
    let mut group = c.benchmark_group("campaign");
    group.sample_size(10);
    group.bench_function("simulate_1h", |b| b.iter(|| cm.simulate(3600.0, black_box(1)).unwrap()));
    group.finish();
}

criterion_group!(benches, dynamics, correlators, instrument);
criterion_main!(benches);
