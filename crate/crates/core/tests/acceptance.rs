//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p dyncast-core --test acceptance`.

use std::collections::{BTreeMap, HashMap};
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use bytes::Bytes;
use dyncast_core::carousel::build_plan;
use dyncast_core::channel::TileId;
use dyncast_core::fec::{self, CodecKind, CodecSpec, FecSymbol};
use dyncast_core::netsim::{self, Flow, GilbertLoss, ReceiverSpec, Scenario, SequencedSource};
use dyncast_core::receiver::Reassembler;
use dyncast_core::sequencer::{
    infer_buffer_length, infer_buffer_time, pdu_size, sequence, tile_rank_order, SequenceRequest,
};
use dyncast_core::transfer::metrics::header_overhead;
use dyncast_core::transfer::{prepare, simulate, CodecChoice, SimTransfer};
use dyncast_core::{ChannelConfig, TileBudget};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_channel(rng: &mut ChaCha8Rng) -> ChannelConfig {
    loop {
        let group_count = rng.gen_range(2..=16u32);
        let decay_ratio = rng.gen_range(0.3..0.95);
        let max_cumulative_rate = 10f64.powf(rng.gen_range(5.0..8.0));
        let floor = max_cumulative_rate * f64::powi(decay_ratio, group_count as i32 - 1);
        let cfg = ChannelConfig {
            base_rate: floor * rng.gen_range(0.05..=1.0),
            max_cumulative_rate,
            decay_ratio,
            tsd: rng.gen_range(0.5..10.0),
            groups_per_tsi: rng.gen_range(1..=4),
            packet_size: rng.gen_range(200..=1480),
            group_count,
        };
        if cfg.validate().is_ok() {
            return cfg;
        }
    }
}

fn rel_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

fn tile_interleaving() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut pairs = 0u64;
    for _ in 0..1000 {
        let cfg = random_channel(&mut rng);
        let i = rng.gen_range(0..64u64);
        let tiles = cfg.tiles_in_window(cfg.interval_start(i), cfg.interval_start(i + 1));
        let by_group: BTreeMap<u64, &TileBudget> =
            tiles.iter().map(|t| (t.tile.group, t)).collect();
        for (&g, t) in &by_group {
            if g == 0 {
                continue;
            }
            if let Some(younger) = by_group.get(&(g + 1)) {
                pairs += 1;
                if !rel_eq(t.max_cum_rate, younger.min_cum_rate) {
                    return outcome(
                        false,
                        format!("a != b for group {g} interval {i} of {cfg:?}"),
                    );
                }
                if tile_rank_order(t, younger) != std::cmp::Ordering::Less {
                    return outcome(false, format!("tile order broken at group {g}"));
                }
            }
            match by_group.get(&(g - 1)) {
                Some(older) if g > 1 => {
                    if !rel_eq(t.min_cum_rate, older.max_cum_rate) {
                        return outcome(
                            false,
                            format!("c != d for group {g} interval {i} of {cfg:?}"),
                        );
                    }
                }
                _ => {
                    // oldest dynamic group sits on the base group
                    if by_group[&0].max_cum_rate > t.min_cum_rate * (1.0 + 1e-9) {
                        return outcome(false, format!("base above oldest group in interval {i}"));
                    }
                }
            }
        }
    }
    outcome(
        true,
        format!("1000 configs, {pairs} adjacent pairs equal within 1e-9"),
    )
}

/// Hands PDUs out one at a time to the cheapest tile with room left,
/// found by linear scan.
fn brute_force_owner(tiles: &[TileBudget], pdus: usize) -> Vec<Option<TileId>> {
    let mut left: Vec<u64> = tiles.iter().map(|t| t.packet_count).collect();
    (0..pdus)
        .map(|_| {
            let mut best: Option<usize> = None;
            for (k, t) in tiles.iter().enumerate() {
                if left[k] == 0 {
                    continue;
                }
                let key = (t.min_cum_rate, t.tile.interval, t.tile.group);
                if best.map_or(true, |b| {
                    let o = &tiles[b];
                    key < (o.min_cum_rate, o.tile.interval, o.tile.group)
                }) {
                    best = Some(k);
                }
            }
            best.map(|b| {
                left[b] -= 1;
                tiles[b].tile
            })
        })
        .collect()
}

fn sequencer_prefix() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut checked = 0;
    let mut thresholds = 0usize;
    while checked < 200 {
        let cfg = random_channel(&mut rng);
        let pdu = pdu_size(&cfg).expect("packet size above the header");
        let buffer_time = cfg.sub_tsi() * rng.gen_range(0.05..2.5);
        let pdus = rng.gen_range(1..=400usize);
        let buffer: Vec<u8> = (0..pdus * pdu - rng.gen_range(0..pdu))
            .map(|i| i as u8)
            .collect();
        let t_start = rng.gen_range(0.0..20.0);
        let t0 = cfg.align_up(t_start);
        let tiles = cfg.tiles_in_window(t0, t0 + buffer_time);
        if tiles.iter().all(|t| t.packet_count == 0) {
            continue;
        }
        checked += 1;
        let packets = match sequence(
            &SequenceRequest::new(&buffer, buffer_time, 9),
            &cfg,
            t_start,
        ) {
            Ok(p) => p,
            Err(e) => return outcome(false, format!("sequencer failed: {e}")),
        };
        let owner = brute_force_owner(&tiles, pdus);
        let mut got: Vec<Option<TileId>> = vec![None; pdus];
        for p in &packets {
            if got[p.pdu_index].replace(p.tile).is_some() {
                return outcome(false, format!("PDU {} sent twice", p.pdu_index));
            }
        }
        if got != owner {
            return outcome(false, format!("assignment differs from oracle for {cfg:?}"));
        }
        let rate: HashMap<TileId, f64> = tiles.iter().map(|t| (t.tile, t.min_cum_rate)).collect();
        let mut levels: Vec<f64> = rate.values().copied().collect();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        for theta in levels {
            thresholds += 1;
            let mut below: Vec<usize> = packets
                .iter()
                .filter(|p| rate[&p.tile] <= theta)
                .map(|p| p.pdu_index)
                .collect();
            below.sort_unstable();
            if below.iter().enumerate().any(|(a, &b)| a != b) {
                return outcome(false, format!("PDUs below rate {theta} are not a prefix"));
            }
        }
    }
    outcome(
        true,
        format!("200 buffers match the oracle, {thresholds} thresholds give prefixes"),
    )
}

fn prefix_delivery() -> Outcome {
    const BUFFERS: u32 = 50;
    let channel = ChannelConfig::default();
    let pdu = pdu_size(&channel).unwrap();
    let buffer_time = infer_buffer_time(pdu, channel.base_rate).unwrap();
    let buffer_length = infer_buffer_length(buffer_time, channel.max_cumulative_rate);
    let fractions = [0.25, 0.5, 0.75];
    let scenario = Scenario {
        channel,
        bottleneck_rate: 4.0 * channel.max_cumulative_rate,
        queue_capacity: 10_000,
        receivers: fractions
            .iter()
            .map(|f| ReceiverSpec {
                target_rate: f * channel.max_cumulative_rate,
                start_time: 0.0,
            })
            .collect(),
        duration: (BUFFERS + 2) as f64 * buffer_time,
        ..Scenario::default()
    };
    let buffer: Vec<u8> = (0..buffer_length).map(|i| (i % 251) as u8).collect();
    let provider = move |_: u32| Some((buffer.clone(), buffer_time));
    let mut source = SequencedSource::new(channel, 0.0, 3, provider).unwrap();
    let mut rx: Vec<Reassembler> = fractions.iter().map(|_| Reassembler::new()).collect();
    let mut prefix: Vec<HashMap<u32, usize>> = vec![HashMap::new(); fractions.len()];
    let mut observer = |i: usize, _: f64, _: u64, d: &Bytes| {
        if let Ok(delivery) = rx[i].on_datagram(d) {
            if let Some(buf) = delivery.flushed {
                prefix[i].insert(buf.buffer_id(), buf.contiguous_prefix().len());
            }
        }
        Flow::Continue
    };
    if let Err(e) = netsim::run(&scenario, &mut source, &mut observer) {
        return outcome(false, format!("simulation failed: {e}"));
    }
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, f) in fractions.iter().enumerate() {
        let mean = (0..BUFFERS)
            .map(|b| prefix[i].get(&b).copied().unwrap_or(0) as f64 / buffer_length as f64)
            .sum::<f64>()
            / BUFFERS as f64;
        pass &= mean >= f - 0.05;
        parts.push(format!(
            "{:.0}%: {:.3} (need {:.2})",
            f * 100.0,
            mean,
            f - 0.05
        ));
    }
    outcome(
        pass,
        format!("mean prefix/buffer_length {}", parts.join(", ")),
    )
}

/// Buffers until `levels` levels starting at `start` hold every block.
fn completion_buffers(offsets: &[usize], blocks: usize, levels: usize, start: usize) -> usize {
    let mut seen = vec![false; blocks];
    let mut distinct = 0;
    let mut b = start;
    while distinct < blocks {
        for x in &offsets[..levels] {
            let block = (b + x) % blocks;
            if !seen[block] {
                seen[block] = true;
                distinct += 1;
            }
        }
        b += 1;
    }
    b - start
}

fn carousel_halving() -> Outcome {
    const B: usize = 4000;
    let plan = build_plan(B, 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let starts: Vec<usize> = (0..32).map(|_| rng.gen_range(0..B)).collect();
    let mean_time = |levels: usize| -> Result<f64, String> {
        let mut sum = 0.0;
        for &s in &starts {
            let ours = completion_buffers(plan.offsets(), B, levels, s);
            let lib = plan
                .completion_time(levels, s, B)
                .map_err(|e| e.to_string())?;
            if ours != lib {
                return Err(format!(
                    "completion_time {lib} != recount {ours} at L={levels} start {s}"
                ));
            }
            sum += ours as f64;
        }
        Ok(sum / starts.len() as f64)
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for l in [1, 2, 4] {
        let (t1, t2) = match (mean_time(l), mean_time(2 * l)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return outcome(false, e),
        };
        let ratio = t2 / t1;
        pass &= (0.40..=0.60).contains(&ratio);
        parts.push(format!("T({})/T({l}) = {ratio:.3}", 2 * l));
    }
    outcome(pass, parts.join(", "))
}

fn duplicate_bound() -> Outcome {
    let mut worst = 0.0f64;
    let mut worst_at = (0, 0);
    let mut raw_max = 0;
    for b in [16usize, 32, 64, 128] {
        for n in 2..=8usize {
            let plan = build_plan(b, n).unwrap();
            for start in 0..b {
                let unsent = plan.unsent_at_first_duplicate(n, start).unwrap();
                raw_max = raw_max.max(unsent);
                // unsent blocks counted in carousel cycle positions of B/N blocks
                let positions = unsent as f64 * n as f64 / b as f64;
                let margin = positions / (n as f64 / 2.0);
                if margin > worst {
                    worst = margin;
                    worst_at = (b, n);
                }
                if positions >= n as f64 / 2.0 {
                    return outcome(
                        false,
                        format!("B={b} N={n} start {start}: {unsent} unsent = {positions:.2} positions >= N/2"),
                    );
                }
            }
        }
    }
    outcome(
        true,
        format!(
            "all starts below N/2 positions; worst {:.0}% of the bound at B={} N={} (largest raw count {raw_max})",
            worst * 100.0,
            worst_at.0,
            worst_at.1
        ),
    )
}

fn mds_exhaustive() -> Outcome {
    let mut decodes = 0u64;
    for k in 1..=10usize {
        let n = 2 * k;
        let spec = CodecSpec::new(CodecKind::Mds, k, n, 16, 0);
        let source: Vec<Vec<u8>> = (0..k)
            .map(|i| (0..16).map(|j| (i * 37 + j * 11 + 1) as u8).collect())
            .collect();
        let symbols = match fec::encode(&spec, &source) {
            Ok(s) => s,
            Err(e) => return outcome(false, format!("encode k={k}: {e}")),
        };
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            let subset: Vec<FecSymbol> = idx.iter().map(|&i| symbols[i].clone()).collect();
            match fec::decode(&spec, &subset) {
                Ok(d) if d.blocks == source => {}
                Ok(_) => return outcome(false, format!("wrong bytes for k={k} subset {idx:?}")),
                Err(e) => return outcome(false, format!("k={k} subset {idx:?}: {e}")),
            }
            decodes += 1;
            let Some(p) = (0..k).rev().find(|&p| idx[p] < n - k + p) else {
                break;
            };
            idx[p] += 1;
            for q in p + 1..k {
                idx[q] = idx[q - 1] + 1;
            }
        }
    }
    outcome(true, format!("{decodes} k-subsets decoded byte-exact"))
}

fn metric_constants() -> Outcome {
    let multicast = header_overhead(1480, 1448).unwrap();
    let unicast = header_overhead(1480, 1460).unwrap();
    let r = |x: f64, d: i32| (x * 10f64.powi(d)).round() / 10f64.powi(d);
    let pass = r(multicast, 2) == 2.21
        && r(unicast, 2) == 1.37
        && r(multicast, 1) == 2.2
        && r(unicast, 1) == 1.4;
    outcome(pass, format!("head {multicast:.4}% and {unicast:.4}%"))
}

fn random_file(len: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.gen()).collect()
}

fn single_receiver_overhead() -> Outcome {
    let data = random_file(4_000_000, 8);
    let scenario = Scenario {
        bottleneck_rate: 10_000_000.0,
        queue_capacity: 10_000,
        receivers: vec![ReceiverSpec {
            target_rate: ChannelConfig::default().max_cumulative_rate,
            start_time: 0.0,
        }],
        duration: 120.0,
        ..Scenario::default()
    };
    let session = prepare(
        &data,
        &scenario.channel,
        CodecChoice::new(CodecKind::SparseParity),
        None,
    )
    .unwrap();
    let out = match simulate(&scenario, &session) {
        Ok(o) => o,
        Err(e) => return outcome(false, format!("simulation failed: {e}")),
    };
    let rx = &out.receivers[0];
    let Some(m) = rx.metrics else {
        return outcome(false, "no decode within 120 s".into());
    };
    if rx.data.as_deref() != Some(&data[..]) {
        return outcome(false, "decoded file differs".into());
    }
    let link = &out.sim.receivers[0].link;
    let pass = m.dup < 2.0 && m.sym <= 10.0 && m.loss == 0.0;
    outcome(
        pass,
        format!(
            "k {} dup {:.3}% sym {:.3}% loss {}% queue drops {} time {:.2} s",
            session.params().spec.k,
            m.dup,
            m.sym,
            m.loss,
            link.queue_dropped_packets,
            m.time
        ),
    )
}

fn lossy_times(
    delivered: f64,
    iid: f64,
    burst: Option<GilbertLoss>,
    seeds: u64,
    data: &[u8],
) -> Result<(f64, f64), String> {
    let nominal_loss = burst.map_or(iid, |b| b.mean_loss());
    let mut base = Scenario {
        bottleneck_rate: 10_000_000.0,
        queue_capacity: 10_000,
        iid_loss: iid,
        burst_loss: burst,
        receivers: vec![ReceiverSpec {
            target_rate: delivered / (1.0 - nominal_loss),
            start_time: 0.0,
        }],
        duration: 300.0,
        ..Scenario::default()
    };
    let session = prepare(
        data,
        &base.channel,
        CodecChoice::new(CodecKind::SparseParity),
        None,
    )
    .map_err(|e| e.to_string())?;
    let (mut time, mut loss) = (0.0, 0.0);
    for seed in 1..=seeds {
        base.rng_seed = seed;
        let out = simulate(&base, &session).map_err(|e| e.to_string())?;
        let m = out.receivers[0]
            .metrics
            .ok_or(format!("seed {seed}: no decode"))?;
        if out.receivers[0].data.as_deref() != Some(data) {
            return Err(format!("seed {seed}: decoded file differs"));
        }
        time += m.time;
        loss += m.loss;
    }
    Ok((time / seeds as f64, loss / seeds as f64))
}

fn loss_robustness() -> Outcome {
    const SEEDS: u64 = 8;
    let data = random_file(2_000_000, 9);
    let delivered = 1_500_000.0;
    let iid = lossy_times(delivered, 0.03, None, SEEDS, &data);
    let bursty = lossy_times(delivered, 0.0, Some(GilbertLoss::DEFAULT), SEEDS, &data);
    let ((ti, li), (tb, lb)) = match (iid, bursty) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return outcome(false, e),
    };
    let diff = (tb - ti).abs() / ti;
    outcome(
        diff < 0.25,
        format!(
            "iid {ti:.2} s at {li:.1}% loss, bursty {tb:.2} s at {lb:.1}% loss, difference {:.1}%",
            diff * 100.0
        ),
    )
}

fn fingerprint(
    t: &SimTransfer,
) -> (
    Vec<Vec<netsim::TraceRecord>>,
    Vec<Option<[u64; 9]>>,
    u64,
    u64,
) {
    (
        t.sim.receivers.iter().map(|r| r.trace.clone()).collect(),
        t.receivers
            .iter()
            .map(|r| r.metrics.map(|m| m.values().map(f64::to_bits)))
            .collect(),
        t.sim.emitted_packets,
        t.sim.emitted_bytes,
    )
}

fn determinism() -> Outcome {
    let data = random_file(600_000, 10);
    let two = |a: f64, b: f64| {
        vec![
            ReceiverSpec {
                target_rate: a,
                start_time: 0.0,
            },
            ReceiverSpec {
                target_rate: b,
                start_time: 3.3,
            },
        ]
    };
    let scenarios = [
        Scenario::default(),
        Scenario {
            iid_loss: 0.03,
            receivers: two(2_000_000.0, 500_000.0),
            rng_seed: 11,
            ..Scenario::default()
        },
        Scenario {
            bottleneck_rate: 1_000_000.0,
            burst_loss: Some(GilbertLoss::DEFAULT),
            receivers: two(4_000_000.0, 800_000.0),
            rng_seed: 12,
            ..Scenario::default()
        },
    ];
    let mut records = 0;
    for (i, sc) in scenarios.iter().enumerate() {
        for kind in [CodecKind::SparseParity, CodecKind::Mds] {
            let d = if kind == CodecKind::Mds {
                &data[..150_000]
            } else {
                &data[..]
            };
            let session = prepare(d, &sc.channel, CodecChoice::new(kind), None).unwrap();
            let a = simulate(sc, &session).map(|t| fingerprint(&t));
            let b = simulate(sc, &session).map(|t| fingerprint(&t));
            match (a, b) {
                (Ok(a), Ok(b)) if a == b => records += a.0.iter().map(Vec::len).sum::<usize>(),
                (Ok(_), Ok(_)) => {
                    return outcome(false, format!("scenario {i} {kind:?}: runs differ"))
                }
                (Err(e), _) | (_, Err(e)) => return outcome(false, format!("scenario {i}: {e}")),
            }
        }
    }
    outcome(
        true,
        format!("6 paired runs bit-identical ({records} trace records each side)"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, u64, fn() -> Outcome); 10] = [
        ("tile interleaving", 5, tile_interleaving),
        ("sequencer prefix optimality", 30, sequencer_prefix),
        ("end-to-end prefix delivery", 60, prefix_delivery),
        ("carousel halving", 60, carousel_halving),
        ("duplicate bound", 120, duplicate_bound),
        ("MDS exhaustive decode", 60, mds_exhaustive),
        ("metrics constants", 1, metric_constants),
        ("single-receiver overhead", 120, single_receiver_overhead),
        ("loss robustness", 180, loss_robustness),
        ("determinism", 120, determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.into_iter().enumerate() {
        let started = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check));
        let took = started.elapsed();
        let (mut pass, mut detail) = match result {
            Ok(o) => (o.pass, o.detail),
            Err(_) => (false, "panicked".to_string()),
        };
        if took > Duration::from_secs(limit) {
            pass = false;
            detail.push_str("; over the runtime limit");
        }
        if !pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {detail} [{:.2} s, limit {limit} s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            took.as_secs_f64()
        );
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
