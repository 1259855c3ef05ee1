//! Deterministic discrete-event simulation of one source and its receivers.
//!
//! Each receiver sits behind its own bottleneck link: a drop-tail queue
//! drained at `bottleneck_rate`, followed by the loss process. Receivers run
//! the delayed-join policy at every sub_TSI boundary. Time is kept in integer
//! nanoseconds; ties are broken by event class, then by insertion order.

mod link;
mod policy;
mod scenario;
mod source;
mod trace;

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use bytes::Bytes;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use link::{Enqueued, Link, LinkCounters, LossProcess};
pub use policy::{receiver_policy_step, ReceiverState};
pub use scenario::{GilbertLoss, ReceiverSpec, Scenario, ScenarioError};
pub use source::{BufferProvider, Emission, PacketSource, SequencedSource, SourceError, VecSource};
pub use trace::{parse_trace_line, write_trace, TraceEvent, TraceRecord};

use crate::wire::PacketHeader;

pub fn to_ns(t: f64) -> u64 {
    (t.max(0.0) * 1e9).round() as u64
}

pub fn from_ns(ns: u64) -> f64 {
    ns as f64 / 1e9
}

/// Whether the simulation keeps feeding a receiver after a delivery.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    /// The receiver leaves the session.
    Detach,
}

/// Sees every datagram that reaches a receiver.
pub trait Observer {
    fn deliver(&mut self, receiver: usize, time: f64, group: u64, datagram: &Bytes) -> Flow;
}

/// Observer that keeps nothing.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoObserver;

impl Observer for NoObserver {
    fn deliver(&mut self, _: usize, _: f64, _: u64, _: &Bytes) -> Flow {
        Flow::Continue
    }
}

impl<F: FnMut(usize, f64, u64, &Bytes) -> Flow> Observer for F {
    fn deliver(&mut self, receiver: usize, time: f64, group: u64, datagram: &Bytes) -> Flow {
        self(receiver, time, group, datagram)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverOutcome {
    pub spec: ReceiverSpec,
    pub trace: Vec<TraceRecord>,
    pub link: LinkCounters,
    pub state: ReceiverState,
    pub detached_at: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub receivers: Vec<ReceiverOutcome>,
    pub emitted_packets: u64,
    pub emitted_bytes: u64,
    /// Time of the last processed event, seconds.
    pub end_time: f64,
}

#[derive(Debug, Clone)]
struct InFlight {
    group: u64,
    header: Option<PacketHeader>,
    datagram: Bytes,
}

#[derive(Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Kind {
    Policy(usize),
    Service(usize),
    Emit,
}

struct Rx {
    spec: ReceiverSpec,
    state: ReceiverState,
    started: bool,
    link: Link<InFlight>,
    loss: LossProcess,
    trace: Vec<TraceRecord>,
    detached_at: Option<f64>,
}

impl Rx {
    fn record(&mut self, ns: u64, event: TraceEvent, p: &InFlight) {
        let (buffer_id, offset, len) = match &p.header {
            Some(h) => (h.buffer_id, h.offset, h.payload_len as u32),
            None => (0, 0, 0),
        };
        self.trace.push(TraceRecord {
            time_us: ns / 1000,
            group: p.group,
            buffer_id,
            offset,
            len,
            event,
        });
    }
}

/// Runs `scenario` with packets from `source` until `duration`, the end of
/// the source, or every receiver has detached.
pub fn run<S: PacketSource, O: Observer>(
    scenario: &Scenario,
    source: &mut S,
    observer: &mut O,
) -> Result<SimOutput, SourceError> {
    let cfg = scenario.channel;
    let end_ns = to_ns(scenario.duration);
    let mut rxs: Vec<Rx> = scenario
        .receivers
        .iter()
        .enumerate()
        .map(|(i, spec)| {
            let mut rng = ChaCha8Rng::seed_from_u64(scenario.rng_seed);
            rng.set_stream(i as u64 + 1);
            Rx {
                spec: *spec,
                state: ReceiverState::new(spec.start_time),
                started: false,
                link: Link::new(scenario.bottleneck_rate, scenario.queue_capacity),
                loss: LossProcess::new(scenario.iid_loss, scenario.burst_loss, rng),
                trace: Vec::new(),
                detached_at: None,
            }
        })
        .collect();

    let mut heap: BinaryHeap<Reverse<(u64, Kind, u64)>> = BinaryHeap::new();
    let mut seq = 0u64;
    let mut push = |heap: &mut BinaryHeap<_>, ns: u64, kind: Kind| {
        heap.push(Reverse((ns, kind, seq)));
        seq += 1;
    };
    for (i, r) in rxs.iter().enumerate() {
        push(
            &mut heap,
            to_ns(cfg.align_up(r.spec.start_time)),
            Kind::Policy(i),
        );
    }
    let mut pending: Option<Emission> = source.next_emission()?;
    if let Some(e) = &pending {
        push(&mut heap, to_ns(e.time), Kind::Emit);
    }
    let mut in_service: Vec<Option<InFlight>> = vec![None; rxs.len()];
    let (mut emitted_packets, mut emitted_bytes) = (0u64, 0u64);
    let mut now = 0u64;

    while let Some(Reverse((ns, kind, _))) = heap.pop() {
        if ns > end_ns {
            break;
        }
        now = ns;
        match kind {
            Kind::Policy(i) => {
                let r = &mut rxs[i];
                if r.detached_at.is_some() {
                    continue;
                }
                let t = from_ns(ns).max(r.spec.start_time);
                r.started = true;
                for g in receiver_policy_step(&mut r.state, t, &cfg, r.spec.target_rate) {
                    r.trace.push(TraceRecord {
                        time_us: ns / 1000,
                        group: g,
                        buffer_id: 0,
                        offset: 0,
                        len: 0,
                        event: TraceEvent::Join,
                    });
                }
                let next = cfg.interval_start(cfg.interval_at(t) + 1);
                push(&mut heap, to_ns(next), Kind::Policy(i));
            }
            Kind::Emit => {
                let e = pending.take().expect("pending emission");
                emitted_packets += 1;
                emitted_bytes += e.datagram.len() as u64;
                let t = e.time;
                let header = PacketHeader::decode(&e.datagram).ok();
                for (i, r) in rxs.iter_mut().enumerate() {
                    if !r.started
                        || r.detached_at.is_some()
                        || t < r.spec.start_time
                        || !r.state.subscribed(e.group)
                    {
                        continue;
                    }
                    let p = InFlight {
                        group: e.group,
                        header,
                        datagram: e.datagram.clone(),
                    };
                    let bytes = p.datagram.len();
                    match r.link.offer(p.clone(), bytes) {
                        Enqueued::StartService(dt) => {
                            in_service[i] = Some(p);
                            push(&mut heap, ns + dt, Kind::Service(i));
                        }
                        Enqueued::Queued => {}
                        Enqueued::Dropped => r.record(ns, TraceEvent::QueueDrop, &p),
                    }
                    debug_assert!(r.link.counters().is_balanced());
                }
                pending = source.next_emission()?;
                if let Some(e) = &pending {
                    push(&mut heap, to_ns(e.time).max(ns), Kind::Emit);
                }
            }
            Kind::Service(i) => {
                let r = &mut rxs[i];
                let (p, lost, next) = r.link.complete(&mut r.loss).expect("packet in service");
                in_service[i] = None;
                if lost {
                    r.record(ns, TraceEvent::Lost, &p);
                } else {
                    r.record(ns, TraceEvent::Delivered, &p);
                    if r.detached_at.is_none()
                        && observer.deliver(i, from_ns(ns), p.group, &p.datagram) == Flow::Detach
                    {
                        r.detached_at = Some(from_ns(ns));
                    }
                }
                if let Some(dt) = next {
                    push(&mut heap, ns + dt, Kind::Service(i));
                }
                debug_assert!(r.link.counters().is_balanced());
            }
        }
        if rxs.iter().all(|r| r.detached_at.is_some()) {
            break;
        }
        if pending.is_none() && rxs.iter().all(|r| r.link.is_empty()) {
            break;
        }
    }

    Ok(SimOutput {
        receivers: rxs
            .into_iter()
            .map(|r| ReceiverOutcome {
                spec: r.spec,
                link: r.link.counters(),
                trace: r.trace,
                state: r.state,
                detached_at: r.detached_at,
            })
            .collect(),
        emitted_packets,
        emitted_bytes,
        end_time: from_ns(now),
    })
}
