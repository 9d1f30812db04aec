//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::time::Instant;

use qroute::codes::{build_bb_code, BBSpec};
use qroute::decoders::{logical_error_rate, BpConfig, BpOsdDecoder, DecoderConfig, LogicalErrorRate, OsdConfig, ShotSource};
use qroute::dem::{compile_dem, DetectorErrorModel};
use qroute::distance::{estimate_circuit_distance, DistanceConfig};
use qroute::experiment::{distance_json, run_distance, run_sweep, sweep_csv, CodeSpec, ExperimentConfig};
use qroute::gf2::BitVector;
use qroute::layout::{apply_removal, build_bb_layout, surface_hex_layout, RemovalScheme};
use qroute::noise::NoiseModel;
use qroute::sampler::{inject_fault, sample_frames};
use qroute::schedules::{CheckType, Schedule, ScheduleKind};
use qroute::{classical_action, verify_flow, Circuit};

const TABLE: [(&str, usize, usize); 5] = [("bb72", 72, 12), ("bb90", 90, 8), ("bb98", 98, 6), ("bb108", 108, 8), ("bb144", 144, 12)];

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bb(name: &str) -> BBSpec {
    BBSpec::named(name).unwrap()
}

fn si1000(p: f64) -> NoiseModel {
    NoiseModel::si1000(p).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut got = Vec::new();
    for (name, _, _) in TABLE {
        let code = build_bb_code(&bb(name)).map_err(|e| e.to_string())?;
        got.push((code.n, code.k));
    }
    let want: Vec<_> = TABLE.iter().map(|&(_, n, k)| (n, k)).collect();
    let secs = start.elapsed().as_secs_f64();
    check(got == want && secs < 10.0, format!("(n, k) = {got:?} in {secs:.2}s"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let code = build_bb_code(&BBSpec::toric(3, 3).unwrap()).map_err(|e| e.to_string())?;
    let d = code.distance_exhaustive(4);
    let secs = start.elapsed().as_secs_f64();
    check((code.n, code.k, d) == (18, 2, Some(3)) && secs < 1.0, format!("n={} k={} d={d:?} in {secs:.3}s", code.n, code.k))
}

fn criterion_3() -> Outcome {
    let mut bad = Vec::new();
    for (name, _, _) in TABLE {
        let spec = bb(name);
        let code = build_bb_code(&spec).unwrap();
        let full = build_bb_layout(&code, &spec).unwrap();
        let total = 4 * spec.size();
        for (scheme, num) in [(RemovalScheme::ThreeQuartersLR, 3), (RemovalScheme::HalfLR, 2)] {
            let g = apply_removal(&full, scheme, Some(&spec)).map_err(|e| e.to_string())?;
            if 4 * g.long_range_count() != num * total || full.long_range_count() != total {
                bad.push(format!("{name} {}: {} of {total}", scheme.name(), g.long_range_count()));
            }
        }
    }
    let degrees: Vec<usize> = [3, 5, 7].iter().map(|&d| surface_hex_layout(d).max_degree()).collect();
    check(bad.is_empty() && degrees == [3, 3, 3], format!("long-range mismatches {bad:?}; hex max degrees {degrees:?}"))
}

fn criterion_4() -> Outcome {
    let cases = [
        (Schedule::surface(ScheduleKind::SurfaceConventional, 5), 4),
        (Schedule::surface(ScheduleKind::SurfaceRouted, 5), 10),
        (Schedule::bb(ScheduleKind::BbThreeQuartersLr, &bb("bb72")), 14),
        (Schedule::bb(ScheduleKind::BbHalfLr, &bb("bb72")), 16),
        (Schedule::bb(ScheduleKind::BbThreeQuartersLr, &bb("bb144")), 14),
        (Schedule::bb(ScheduleKind::BbHalfLr, &bb("bb144")), 16),
    ];
    let mut got = Vec::new();
    let mut ok = true;
    for (s, want) in cases {
        let s = s.map_err(|e| e.to_string())?;
        let c = s.memory_circuit(2, false).map_err(|e| e.to_string())?;
        let per_round = c.cnot_layer_count() / 2;
        ok &= per_round == want && s.layers_per_round() == want && c.check_layers().is_ok();
        got.push(per_round);
    }
    check(ok, format!("CNOT layers per round {got:?}"))
}

/// The block with H removed. For X blocks every measured qubit is in the X basis,
/// so conjugating by H turns each CNOT around and the block becomes classical.
fn classical_block(s: &Schedule, index: usize) -> (Circuit, Vec<usize>) {
    let block = &s.blocks[index];
    let x_block = block.gadgets.iter().any(|g| g.check_type == CheckType::X);
    let measured = block.measured();
    let mut c = Circuit::with_qubits(s.qubit_count());
    c.reset(&measured);
    for layer in &block.layers {
        let pairs: Vec<(usize, usize)> = layer.iter().map(|&(a, b)| if x_block { (b, a) } else { (a, b) }).collect();
        c.cx(&pairs).unwrap();
    }
    c.measure(&measured);
    (c, measured)
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut schedules = Vec::new();
    for kind in [ScheduleKind::SurfaceConventional, ScheduleKind::SurfaceRouted] {
        for d in [3, 5] {
            schedules.push(Schedule::surface(kind, d).unwrap());
        }
    }
    for (name, _, _) in TABLE {
        for kind in [ScheduleKind::BbThreeQuartersLr, ScheduleKind::BbHalfLr] {
            schedules.push(Schedule::bb(kind, &bb(name)).unwrap());
        }
    }
    let (mut flows, mut gadgets, mut assignments) = (0, 0, 0);
    for s in &schedules {
        for i in 0..s.blocks.len() {
            let c = s.block_circuit(i);
            for f in s.block_flows(i) {
                if !verify_flow(&c, &f) {
                    return Err(format!("{:?} block {i}: flow {} -> {} fails", s.kind, f.input, f.output));
                }
                flows += 1;
            }
            let (classical, measured) = classical_block(s, i);
            let block = &s.blocks[i];
            let gadget_count = block.gadgets.len();
            for g in block.gadgets.iter().filter(|g| g.router.is_some()) {
                gadgets += 1;
                for bits in 0u32..1 << g.support.len() {
                    let mut input = BitVector::zeros(s.qubit_count());
                    for (j, &q) in g.support.iter().enumerate() {
                        input.set(q, bits >> j & 1 == 1);
                    }
                    let out = classical_action(&classical, &input).map_err(|e| e.to_string())?;
                    let rec = measured.iter().position(|&q| q == g.ancilla).unwrap();
                    if out.records.get(rec) != (bits.count_ones() % 2 == 1) {
                        return Err(format!("{:?}: gadget on ancilla {} gives the wrong parity", s.kind, g.ancilla));
                    }
                    if (gadget_count..measured.len()).any(|r| out.records.get(r)) {
                        return Err(format!("{:?}: router record fires", s.kind));
                    }
                    assignments += 1;
                }
            }
        }
        let flagged = s.generate(2, None, true).map_err(|e| e.to_string())?;
        let batch = sample_frames(&flagged, 256, 1);
        if !batch.detectors.is_zero() || !batch.observables.is_zero() {
            return Err(format!("{:?}: noiseless flagged circuit has detection events", s.kind));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        secs < 60.0,
        format!("{flows} flows, {gadgets} routed gadgets over {assignments} assignments, flags silent, {secs:.1}s"),
    )
}

fn injection_mismatches(c: &Circuit, dem: &DetectorErrorModel) -> (usize, usize) {
    let mut checked = 0;
    let mut bad = 0;
    for m in &dem.mechanisms {
        for src in &m.provenance {
            let (d, o) = inject_fault(c, src);
            checked += 1;
            if d.iter_ones().collect::<Vec<_>>() != m.detectors || o.iter_ones().collect::<Vec<_>>() != m.observables {
                bad += 1;
            }
        }
    }
    (checked, bad)
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let circuits = [
        ("routed d=3", Schedule::surface(ScheduleKind::SurfaceRouted, 3).unwrap().generate(1, Some(&si1000(1e-3)), false)),
        ("bb72 half-lr", Schedule::bb(ScheduleKind::BbHalfLr, &bb("bb72")).unwrap().generate(1, Some(&si1000(1e-3)), false)),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, c) in circuits {
        let c = c.map_err(|e| e.to_string())?;
        let dem = compile_dem(&c).map_err(|e| e.to_string())?;
        let (checked, bad) = injection_mismatches(&c, &dem);
        ok &= bad == 0 && checked > 0;
        parts.push(format!("{name}: {checked} faults over {} mechanisms, {bad} mismatches", dem.mechanisms.len()));
    }
    let secs = start.elapsed().as_secs_f64();
    check(ok && secs < 120.0, format!("{} in {secs:.1}s", parts.join("; ")))
}

fn criterion_7() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for kind in [ScheduleKind::SurfaceConventional, ScheduleKind::SurfaceRouted] {
        let c = Schedule::surface(kind, 3).unwrap().generate(3, Some(&si1000(1e-3)), false).map_err(|e| e.to_string())?;
        let dem = compile_dem(&c).map_err(|e| e.to_string())?;
        let det = dem.detector_matrix();
        let n = dem.mechanisms.len();
        let decodes_to = |decoder: &BpOsdDecoder, faults: &[usize]| {
            let e = BitVector::from_indices(n, faults.iter().copied());
            decoder.decode(&det.syndrome(&e)).map(|r| r.predicted_observables) == Ok(dem.observable_flips(&e))
        };
        for scaling in [0.5, 0.625] {
            let cfg = DecoderConfig { bp: BpConfig { scaling, ..Default::default() }, osd: OsdConfig::osd_cs(10) };
            let decoder = BpOsdDecoder::new(&dem, cfg).map_err(|e| e.to_string())?;
            let wrong = (0..n).filter(|&i| !decodes_to(&decoder, &[i])).count();
            ok &= wrong == 0;
            parts.push(format!("{} scaling {scaling}: {n} weight-1 faults, {wrong} miscorrected", kind.name()));
        }
        // circuit distance 3 guarantees nothing for pairs; reported for information
        let cfg = DecoderConfig { osd: OsdConfig::osd_cs(10), ..Default::default() };
        let decoder = BpOsdDecoder::new(&dem, cfg).map_err(|e| e.to_string())?;
        let pairs = n * (n - 1) / 2;
        let good = (0..n).flat_map(|i| (i + 1..n).map(move |j| [i, j])).filter(|f| decodes_to(&decoder, f)).count();
        parts.push(format!("{}: {good}/{pairs} weight-2 pairs corrected (informational)", kind.name()));
    }
    check(ok, parts.join("; "))
}

fn estimate(s: Schedule, rounds: usize) -> Result<(usize, f64), String> {
    let start = Instant::now();
    let c = s.generate(rounds, Some(&si1000(1e-3)), false).map_err(|e| e.to_string())?;
    let dem = compile_dem(&c).map_err(|e| e.to_string())?;
    let est = estimate_circuit_distance(&dem, &DistanceConfig::default(), 2024).map_err(|e| e.to_string())?;
    if !dem.detector_matrix().syndrome(&BitVector::from_indices(dem.mechanisms.len(), est.witness.iter().copied())).is_zero() {
        return Err("witness triggers detectors".into());
    }
    Ok((est.upper_bound, start.elapsed().as_secs_f64()))
}

fn criterion_8() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, bound) in [("bb72", 5), ("bb90", 6)] {
        for kind in [ScheduleKind::BbThreeQuartersLr, ScheduleKind::BbHalfLr] {
            let (d, secs) = estimate(Schedule::bb(kind, &bb(name)).unwrap(), 2)?;
            ok &= d <= bound && secs < 3600.0;
            parts.push(format!("{name} {} {d} (<= {bound}, {secs:.0}s)", kind.name()));
        }
    }
    for d in [3, 5] {
        let (est, secs) = estimate(Schedule::surface(ScheduleKind::SurfaceRouted, d).unwrap(), d)?;
        ok &= est == d;
        parts.push(format!("routed d={d} {est} ({secs:.0}s)"));
    }
    check(ok, parts.join("; "))
}

fn rate(s: Schedule, rounds: usize, p: f64, flags: bool, cfg: DecoderConfig, shots: usize) -> Result<LogicalErrorRate, String> {
    let c = s.generate(rounds, Some(&si1000(p)), flags).map_err(|e| e.to_string())?;
    let dem = compile_dem(&c).map_err(|e| e.to_string())?;
    let decoder = BpOsdDecoder::new(&dem, cfg).map_err(|e| e.to_string())?;
    Ok(logical_error_rate(ShotSource::Circuit(&c), &decoder, shots, rounds, 7))
}

/// Standard error of the per-round rate, by the delta method.
fn per_round_stderr(r: &LogicalErrorRate) -> f64 {
    let n = r.rounds as f64;
    r.stderr * (1.0 - r.rate).powf(1.0 / n - 1.0) / n
}

fn criterion_9() -> Outcome {
    const SHOTS: usize = 100_000;
    let cfg = DecoderConfig::default();
    let surface = |kind, d| rate(Schedule::surface(kind, d).unwrap(), d, 1e-3, false, cfg, SHOTS);
    let r3 = surface(ScheduleKind::SurfaceRouted, 3)?;
    let r5 = surface(ScheduleKind::SurfaceRouted, 5)?;
    let c3 = surface(ScheduleKind::SurfaceConventional, 3)?;
    let sa = (per_round_stderr(&r3).powi(2) + per_round_stderr(&r5).powi(2)).sqrt();
    let a = r3.rate_per_round - r5.rate_per_round > 3.0 * sa;
    let sb = (r3.stderr.powi(2) + c3.stderr.powi(2)).sqrt();
    let b = r3.rate - c3.rate > 3.0 * sb;
    let rounds = 3;
    let tq = rate(Schedule::bb(ScheduleKind::BbThreeQuartersLr, &bb("bb72")).unwrap(), rounds, 1e-3, false, cfg, SHOTS)?;
    let half = rate(Schedule::bb(ScheduleKind::BbHalfLr, &bb("bb72")).unwrap(), rounds, 1e-3, false, cfg, SHOTS)?;
    let sc = (per_round_stderr(&tq).powi(2) + (1.5 * per_round_stderr(&half)).powi(2)).sqrt();
    let c = tq.rate_per_round - 1.5 * half.rate_per_round <= 3.0 * sc;
    check(
        a && b && c,
        format!(
            "(a) routed per round d=5 {:.2e} vs d=3 {:.2e} [{}]; (b) d=3 conventional {:.2e} vs routed {:.2e} [{}]; \
             (c) bb72 per round 3/4 {:.2e} vs 1/2 {:.2e} [{}]",
            r5.rate_per_round,
            r3.rate_per_round,
            if a { "ok" } else { "fail" },
            c3.rate,
            r3.rate,
            if b { "ok" } else { "fail" },
            tq.rate_per_round,
            half.rate_per_round,
            if c { "ok" } else { "fail" },
        ),
    )
}

fn criterion_10() -> Outcome {
    const SHOTS: usize = 100_000;
    let cfg = DecoderConfig { osd: OsdConfig::osd_cs(20), ..Default::default() };
    let s = || Schedule::surface(ScheduleKind::SurfaceRouted, 3).unwrap();
    let off = rate(s(), 3, 2e-3, false, cfg, SHOTS)?;
    let on = rate(s(), 3, 2e-3, true, cfg, SHOTS)?;
    let sigma = (off.stderr.powi(2) + on.stderr.powi(2)).sqrt();
    let diff = (off.rate - on.rate).abs();
    check(diff < 3.0 * sigma, format!("without flags {:.3e}, with flags {:.3e}, |diff| = {:.2} sigma", off.rate, on.rate, diff / sigma))
}

fn pipeline_artifacts() -> Vec<String> {
    let s = Schedule::bb(ScheduleKind::BbHalfLr, &bb("bb72")).unwrap();
    let c = s.generate(1, Some(&si1000(2e-3)), false).unwrap();
    let dem = compile_dem(&c).unwrap();
    let cfg = ExperimentConfig { p: vec![2e-3], shots: 2000, seed: 9, ..Default::default() };
    let dcfg = ExperimentConfig {
        codes: vec![CodeSpec::Surface(3)],
        schemes: vec![ScheduleKind::SurfaceRouted],
        distance: DistanceConfig { samples: 40, ..Default::default() },
        ..cfg.clone()
    };
    vec![
        c.to_text(),
        dem.to_text(),
        sample_frames(&c, 3000, 4).to_text(),
        sweep_csv(&cfg, &run_sweep(&cfg).unwrap()),
        distance_json(&dcfg, &run_distance(&dcfg).unwrap()),
    ]
}

fn criterion_11() -> Outcome {
    let pool = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
    let one = pool(1).install(pipeline_artifacts);
    let again = pool(1).install(pipeline_artifacts);
    let three = pool(3).install(pipeline_artifacts);
    let stages = ["circuit", "dem", "samples", "sweep", "distance"];
    let differing: Vec<&str> = stages.iter().enumerate().filter(|&(i, _)| one[i] != again[i] || one[i] != three[i]).map(|(_, s)| *s).collect();
    check(differing.is_empty(), format!("{} stages compared across reruns and 1/3 threads; differing: {differing:?}", stages.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("code parameters", criterion_1),
        ("toric reduction", criterion_2),
        ("connectivity counts", criterion_3),
        ("layer counts", criterion_4),
        ("flow correctness", criterion_5),
        ("DEM soundness", criterion_6),
        ("weight-1 correctability", criterion_7),
        ("circuit-distance upper bounds", criterion_8),
        ("curve shapes at desk scale", criterion_9),
        ("flag-detector comparison", criterion_10),
        ("determinism", criterion_11),
    ];
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if only.as_ref().is_some_and(|v| !v.contains(&n)) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {n} ({name}): {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {n} ({name}): {detail} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
