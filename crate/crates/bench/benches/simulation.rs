use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use gauss_share::access::AccessStructure;
use gauss_share::sim::protocol::{exact_leakage, ProtocolSetup};
use gauss_share::sim::{LeakageMode, ProtocolConfig};
use gauss_share::source::SourceSpec;

fn config(n: usize) -> ProtocolConfig {
    ProtocolConfig {
        n,
        q: 2,
        k: Some(2),
        rv: Some(0.5),
        rv_prime: Some(0.5),
        leakage: LeakageMode::Off,
        ..Default::default()
    }
}

fn trials(c: &mut Criterion) {
    let spec = SourceSpec::from_gains(1.0, vec![1.5, 0.7]).unwrap();
    let access = AccessStructure::threshold(2, 2).unwrap();
    for n in [4, 8] {
        let setup = ProtocolSetup::new(&spec, &access, &config(n)).unwrap();
        let mut t = 0;
        c.bench_function(&format!("trial/n={n}"), |b| {
            b.iter(|| {
                t += 1;
                setup.run_trial(black_box(t)).unwrap()
            })
        });
    }
    c.bench_function("setup/n=8", |b| {
        b.iter(|| ProtocolSetup::new(&spec, &access, black_box(&config(8))).unwrap())
    });

    let setup = ProtocolSetup::new(&spec, &access, &config(2)).unwrap();
    let mut group = c.benchmark_group("leakage");
    group.sample_size(10);
    group.bench_function("exact/n=2,q=2", |b| {
        b.iter(|| exact_leakage(black_box(&setup)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, trials);
criterion_main!(benches);
