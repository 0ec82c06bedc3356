use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use optrack_core::gas::{beam_integral, GasField};
use optrack_core::geo::{GeodeticPosition, Position3};
use optrack_core::link::{decode, encode, CorrectionMessage, Message, TelemetryMessage};
use optrack_core::sim::plume_scan;

fn bench_beam_integral(c: &mut Criterion) {
    let scenario = plume_scan();
    let q = scenario.quadrature;
    let end = Position3::new(4.0, -46.0, 2.4);
    c.bench_function("beam_integral/uniform", |b| {
        let field = GasField::uniform(400.0);
        b.iter(|| beam_integral(&field, Position3::ORIGIN, black_box(end), 0.0, &q))
    });
    c.bench_function("beam_integral/plume", |b| b.iter(|| beam_integral(&scenario.gas, Position3::ORIGIN, black_box(end), 0.0, &q)));
}

fn bench_codec(c: &mut Criterion) {
    let telemetry = Message::Telemetry(TelemetryMessage {
        seq: 41,
        t: 12.6,
        position: GeodeticPosition { latitude: 48.1375, longitude: 11.5755, altitude: 531.2 },
    });
    let correction = Message::Correction(CorrectionMessage { seq: 7, payload: vec![0xa5; 512] });
    for (name, msg) in [("telemetry", telemetry), ("correction", correction)] {
        let frame = encode(&msg).unwrap();
        c.bench_function(&format!("codec/encode_{name}"), |b| b.iter(|| encode(black_box(&msg))));
        c.bench_function(&format!("codec/decode_{name}"), |b| b.iter(|| decode(black_box(&frame))));
    }
}

criterion_group!(benches, bench_beam_integral, bench_codec);
criterion_main!(benches);
