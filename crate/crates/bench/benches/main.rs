//! Benchmarks for the hot paths: graph-state construction, whole protocol
//! runs, the hashing stage with its decoder, and the exact security sweep.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use doubleblind_core::algebra::Angle8;
use doubleblind_core::bellsim::{werner_dist, WernerParams};
use doubleblind_core::distill::{decode_ml, run_hashing, HashingConfig};
use doubleblind_core::mbqc::{build_graph_state, Pattern};
use doubleblind_core::protocol::{run_double_server, run_single_server, PartyRole};
use doubleblind_core::rng::SeededRand;
use doubleblind_core::security::{signaling_joint, AdversaryStrategy, SignalingScenario};
use doubleblind_core::statevec::prepare_plus_theta;

fn bench_graph_state(c: &mut Criterion) {
    let pattern = Pattern::chain(8, &[Angle8::new(1); 7]).unwrap();
    let inputs: Vec<_> = (0..8).map(|_| prepare_plus_theta(Angle8::ZERO)).collect();
    c.bench_function("graph_state_chain8", |b| {
        b.iter(|| build_graph_state(black_box(&inputs), &pattern.graph).unwrap())
    });
}

fn bench_protocol_runs(c: &mut Criterion) {
    let three = Pattern::chain(3, &[Angle8::new(3), Angle8::new(6)]).unwrap();
    c.bench_function("single_server_chain3", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            run_single_server(&three, &mut SeededRand::new(seed)).unwrap()
        })
    });
    c.bench_function("double_server_chain3", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            run_double_server(&three, &mut SeededRand::new(seed)).unwrap()
        })
    });
}

fn bench_hashing(c: &mut Criterion) {
    let cfg = HashingConfig::new(8, 0.25).unwrap();
    let w = WernerParams::new(0.95).unwrap();
    c.bench_function("hashing_run_n8", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            run_hashing(&cfg, w, &mut SeededRand::new(seed)).unwrap()
        })
    });

    let run = run_hashing(&cfg, w, &mut SeededRand::new(5)).unwrap();
    let dist = werner_dist(w);
    c.bench_function("decode_ml_n8", |b| {
        b.iter(|| decode_ml(black_box(&run.parities), &run.model, &dist, 8).unwrap())
    });
}

fn bench_security(c: &mut Criterion) {
    let mut group = c.benchmark_group("security");
    group.sample_size(10);
    group.bench_function("signaling_sweep", |b| {
        b.iter(|| {
            signaling_joint(
                &AdversaryStrategy::pair_bit_encoder(),
                PartyRole::Bob1,
                PartyRole::Bob2,
                &SignalingScenario::standard(),
            )
            .unwrap()
        })
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_graph_state,
    bench_protocol_runs,
    bench_hashing,
    bench_security
);
criterion_main!(benches);
