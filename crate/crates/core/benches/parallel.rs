use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use eiskit::eisenstein::{eval_eisenstein_with, extract_coefficient, ExtractOptions, Truncation};
use eiskit::forms::FormSet;
use eiskit::hecke::BlockStructure;
use eiskit::par::Exec;
use eiskit::parabolic::{GroupElement, IwasawaCoords, Partition, SpectralPoint};
use eiskit::uniqueness::{random_falsification_with, Constraint};
use eiskit::Complex64;

const MODES: [(&str, Exec); 2] = [("parallel", Exec::Parallel), ("sequential", Exec::Sequential)];

fn gl3_height_sum(c: &mut Criterion) {
    let s = SpectralPoint::solve_last(&Partition::borel(3).unwrap(), &[Complex64::new(1.5, 0.0), Complex64::new(0.0, 0.0)])
        .unwrap();
    let g = GroupElement::from_coords(&IwasawaCoords::new(3, &[0.1, 0.2, -0.3], &[1.1, 0.9]).unwrap());
    let mut group = c.benchmark_group("gl3_height_sum");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, 8), |b| {
            b.iter(|| eval_eisenstein_with(3, &g, &s, Truncation::Height(8), exec).unwrap())
        });
    }
    group.finish();
}

fn gl2_extraction(c: &mut Criterion) {
    let s = SpectralPoint::solve_last(&Partition::borel(2).unwrap(), &[Complex64::new(1.5, 0.0)]).unwrap();
    let g = GroupElement::from_coords(&IwasawaCoords::diagonal_point(&[1.0]).unwrap());
    let mut group = c.benchmark_group("gl2_extraction");
    group.sample_size(10);
    for (name, exec) in MODES {
        let options = ExtractOptions { truncation: Truncation::Smooth { radius: 100.0 }, nodes: 32, exec };
        group.bench_function(BenchmarkId::new(name, 32), |b| {
            b.iter(|| extract_coefficient(&s, &g, (1, 0), &options).unwrap())
        });
    }
    group.finish();
}

fn falsification(c: &mut Criterion) {
    let p = Partition::borel(4).unwrap();
    let blocks = BlockStructure::from_forms(&FormSet::trivial(&p).unwrap()).unwrap();
    let mut group = c.benchmark_group("falsification");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, 100), |b| {
            b.iter(|| random_falsification_with(&p, &blocks, 100, 7, Constraint::Weighted, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, gl3_height_sum, gl2_extraction, falsification);
criterion_main!(benches);
