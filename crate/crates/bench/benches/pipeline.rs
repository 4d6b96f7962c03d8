use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use lindblad_core::asymptotics::{decompose, decompose_sectors};
use lindblad_core::evolve::propagate;
use lindblad_core::liouvillian::{eigenvalues, Liouvillian, Tolerances};
use lindblad_core::models::{self, coherent_state, fock_parity_projectors};
use lindblad_core::modelspec::parse_model;
use lindblad_core::structure::{block_structure, parity_partition_model, DEFAULT_SEED};
use lindblad_core::{SectorOptions, C64};

fn generator(c: &mut Criterion) {
    let mut g = c.benchmark_group("build_liouvillian");
    for dim in [10, 20, 30] {
        let model = models::d_photon(2, dim).unwrap().model;
        g.bench_with_input(BenchmarkId::from_parameter(dim), &model, |b, m| {
            b.iter(|| Liouvillian::new(m.clone()))
        });
    }
    g.finish();
}

fn spectrum(c: &mut Criterion) {
    let mut g = c.benchmark_group("eigenvalues");
    g.sample_size(10);
    for dim in [10, 20] {
        let l = Liouvillian::new(models::d_photon(2, dim).unwrap().model);
        let tol = Tolerances::default().zero(&l);
        g.bench_with_input(BenchmarkId::from_parameter(dim), &l, |b, l| b.iter(|| eigenvalues(l, tol).unwrap()));
    }
    g.finish();
}

fn asymptotics(c: &mut Criterion) {
    let mut g = c.benchmark_group("decompose");
    g.sample_size(10);
    let cases = [
        ("two_qubit", models::two_qubit().model),
        ("driven_two_qubit", models::driven_two_qubit(1.0).model),
        ("two_photon_16", models::d_photon(2, 16).unwrap().model),
    ];
    for (name, model) in cases {
        let l = Liouvillian::new(model);
        g.bench_with_input(BenchmarkId::new("full", name), &l, |b, l| {
            b.iter(|| decompose(l, &Tolerances::default()).unwrap())
        });
    }
    for dim in [30, 60] {
        let model = models::d_photon(3, dim).unwrap().model;
        let map = parity_partition_model(&fock_parity_projectors(dim, 3), &model).unwrap();
        let opts = SectorOptions {
            spectrum: false,
            ..SectorOptions::default()
        };
        g.bench_with_input(BenchmarkId::new("sectors_d3", dim), &(model, map), |b, (m, map)| {
            b.iter(|| decompose_sectors(m, map, &opts).unwrap())
        });
    }
    g.finish();
}

fn structure(c: &mut Criterion) {
    let l = Liouvillian::new(models::driven_two_qubit(1.0).model);
    let dec = decompose(&l, &Tolerances::default()).unwrap();
    c.bench_function("block_structure/driven_two_qubit", |b| {
        b.iter(|| block_structure(&dec, DEFAULT_SEED).unwrap())
    });
}

fn evolution(c: &mut Criterion) {
    let l = Liouvillian::new(models::d_photon(2, 16).unwrap().model);
    let rho = coherent_state(16, C64::new(1.0, 0.0)).unwrap();
    c.bench_function("propagate/two_photon_16", |b| b.iter(|| propagate(&l, &rho, 30.0).unwrap()));
}

fn model_files(c: &mut Criterion) {
    let src = r#"{"name": "driven", "spaces": [{"kind": "qubit"}, {"kind": "qubit"}],
        "parameters": {"omega": 1.0}, "hamiltonian": "omega*X2",
        "jump_operators": ["0.5*(I - Z1*Z2)*X2"]}"#;
    c.bench_function("parse_model/driven_two_qubit", |b| b.iter(|| parse_model(src).unwrap()));
}

criterion_group!(benches, generator, spectrum, asymptotics, structure, evolution, model_files);
criterion_main!(benches);
