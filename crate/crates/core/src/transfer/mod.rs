//! Carousel file transfer over dynamic channels.
//!
//! The file, prefixed with its length as a big-endian `u64`, is split into
//! PDU-sized blocks and FEC-encoded into `n` symbols. Carousel buffer `b`
//! carries, level by level, the symbols the carousel plan assigns to it, and
//! is sequenced into the channel's tiles so that lower levels ride on the
//! lower-rate groups. A receiver maps `(buffer_id, offset)` back to the
//! symbol index and stops as soon as its decoder succeeds.

pub mod metrics;
pub mod udp;

use std::path::Path;
use std::sync::Arc;

use bytes::Bytes;
use thiserror::Error;

use crate::carousel::{build_plan, CarouselError, CarouselPlan};
use crate::fec::{
    encode, split_blocks, CodecKind, CodecSpec, FecError, FecSymbol, Pushed, Reception,
};
use crate::netsim::{
    self, BufferProvider, Flow, PacketSource, Scenario, SequencedSource, SimOutput, SourceError,
    TraceEvent, TraceRecord,
};
use crate::receiver::{PacketOutcome, Reassembler, ReceiverError};
use crate::sequencer::{infer_buffer_length, infer_buffer_time, pdu_size, SequencerError};
use crate::wire::parse_datagram;
use crate::ChannelConfig;

pub use metrics::{
    compute_metrics, report, MetricError, MetricsReport, TransferCounters, TransferMetrics,
};

const LENGTH_PREFIX: usize = 8;

#[derive(Debug, Error)]
pub enum TransferError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Fec(#[from] FecError),
    #[error(transparent)]
    Carousel(#[from] CarouselError),
    #[error(transparent)]
    Sequencer(#[from] SequencerError),
    #[error(transparent)]
    Source(#[from] SourceError),
    #[error(transparent)]
    Receiver(#[from] ReceiverError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("codec: {0}")]
    Codec(String),
    #[error("decoded data is not a framed file: {0}")]
    Framing(String),
    #[error("no decode within the session ({} of {} symbols)", .partial.received_symbols, .partial.k)]
    Timeout { partial: Box<TransferCounters> },
}

/// Codec family and dimensions requested by the user; `k` follows from the
/// file size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodecChoice {
    pub kind: CodecKind,
    /// Explicit `k`, checked against the file when given.
    pub k: Option<usize>,
    /// Total symbols; defaults to `2k` (`k` for the null codec).
    pub n: Option<usize>,
    pub seed: u64,
}

impl CodecChoice {
    pub fn new(kind: CodecKind) -> Self {
        Self {
            kind,
            k: None,
            n: None,
            seed: 0,
        }
    }

    /// `name[,k,n[,seed]]`; empty `k` or `n` fields take their defaults.
    pub fn parse(text: &str) -> Result<Self, TransferError> {
        let f: Vec<&str> = text.split(',').map(str::trim).collect();
        let bad = || TransferError::Codec(format!("expected name[,k,n[,seed]], got {text:?}"));
        if f.is_empty() || f.len() > 4 || f.len() == 2 {
            return Err(bad());
        }
        let opt = |s: Option<&&str>| -> Result<Option<u64>, TransferError> {
            match s {
                None => Ok(None),
                Some(s) if s.is_empty() => Ok(None),
                Some(s) => s.parse().map(Some).map_err(|_| bad()),
            }
        };
        Ok(Self {
            kind: f[0].parse()?,
            k: opt(f.get(1))?.map(|x| x as usize),
            n: opt(f.get(2))?.map(|x| x as usize),
            seed: opt(f.get(3))?.unwrap_or(0),
        })
    }

    pub fn resolve(&self, k: usize, symbol_size: usize) -> Result<CodecSpec, TransferError> {
        if let Some(want) = self.k {
            if want != k {
                return Err(TransferError::Codec(format!(
                    "file needs k = {k}, codec says k = {want}"
                )));
            }
        }
        let n = self.n.unwrap_or(match self.kind {
            CodecKind::Null => k,
            _ => 2 * k,
        });
        let spec = CodecSpec::new(self.kind, k, n, symbol_size, self.seed);
        spec.validate()?;
        Ok(spec)
    }
}

/// Parameters a receiver needs to rebuild the file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionParams {
    pub spec: CodecSpec,
}

/// An encoded file ready to be carouselled.
#[derive(Debug, Clone)]
pub struct SendSession {
    params: SessionParams,
    plan: CarouselPlan,
    symbols: Arc<[Vec<u8>]>,
    buffer_time: f64,
    file_length: u64,
}

/// Number of symbol blocks a file of `len` bytes occupies.
pub fn block_count(len: usize, pdu: usize) -> usize {
    (len + LENGTH_PREFIX).div_ceil(pdu)
}

/// Encodes `data` and lays out the carousel for `channel`. `levels`
/// defaults to the buffer length the channel's top rate fills in one
/// buffer time, capped at `n`.
pub fn prepare(
    data: &[u8],
    channel: &ChannelConfig,
    codec: CodecChoice,
    levels: Option<usize>,
) -> Result<SendSession, TransferError> {
    channel.validate().map_err(SequencerError::from)?;
    let pdu = pdu_size(channel)?;
    let mut framed = Vec::with_capacity(data.len() + LENGTH_PREFIX);
    framed.extend_from_slice(&(data.len() as u64).to_be_bytes());
    framed.extend_from_slice(data);
    let blocks = split_blocks(&framed, pdu);
    let spec = codec.resolve(blocks.len(), pdu)?;
    let symbols: Vec<Vec<u8>> = encode(&spec, &blocks)?
        .into_iter()
        .map(|s| s.data)
        .collect();

    let buffer_time: f64 = infer_buffer_time(pdu, channel.base_rate)?;
    let fitted = (infer_buffer_length(buffer_time, channel.max_cumulative_rate) / pdu).max(1);
    let levels = levels.unwrap_or(fitted).min(spec.n);
    let plan = build_plan(spec.n, levels)?;
    Ok(SendSession {
        params: SessionParams { spec },
        plan,
        symbols: symbols.into(),
        buffer_time,
        file_length: data.len() as u64,
    })
}

pub fn prepare_file(
    path: &Path,
    channel: &ChannelConfig,
    codec: CodecChoice,
    levels: Option<usize>,
) -> Result<SendSession, TransferError> {
    let data = std::fs::read(path)?;
    prepare(&data, channel, codec, levels)
}

impl SendSession {
    pub fn params(&self) -> SessionParams {
        self.params
    }

    pub fn plan(&self) -> &CarouselPlan {
        &self.plan
    }

    pub fn buffer_time(&self) -> f64 {
        self.buffer_time
    }

    pub fn file_length(&self) -> u64 {
        self.file_length
    }

    /// Bytes of carousel buffer `b`, level 1 first.
    pub fn buffer(&self, b: usize) -> Vec<u8> {
        (1..=self.plan.levels())
            .flat_map(|l| self.symbols[self.plan.block(l, b)].iter().copied())
            .collect()
    }

    pub fn provider(&self) -> CarouselProvider {
        CarouselProvider {
            session: self.clone(),
            remaining: None,
        }
    }

    /// Endless packet source for this session, starting at `start`.
    pub fn source(
        &self,
        channel: &ChannelConfig,
        start: f64,
        session_id: u32,
    ) -> Result<SequencedSource<CarouselProvider>, TransferError> {
        Ok(SequencedSource::new(
            *channel,
            start,
            session_id,
            self.provider(),
        )?)
    }
}

/// Cycles the carousel buffers, optionally for a fixed number of buffers.
#[derive(Debug, Clone)]
pub struct CarouselProvider {
    session: SendSession,
    remaining: Option<u64>,
}

impl CarouselProvider {
    pub fn limit(mut self, buffers: u64) -> Self {
        self.remaining = Some(buffers);
        self
    }
}

impl BufferProvider for CarouselProvider {
    fn next_buffer(&mut self, buffer_id: u32) -> Option<(Vec<u8>, f64)> {
        if let Some(r) = &mut self.remaining {
            if *r == 0 {
                return None;
            }
            *r -= 1;
        }
        Some((
            self.session.buffer(buffer_id as usize),
            self.session.buffer_time,
        ))
    }
}

/// Outcome of feeding one datagram to a [`FileReceiver`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Progress {
    Ignored,
    NewSymbol,
    Duplicate,
    Decodable,
}

/// Receive side of a transfer: reassembly, symbol recovery and decoding.
#[derive(Debug)]
pub struct FileReceiver {
    params: SessionParams,
    plan: Option<CarouselPlan>,
    reassembler: Reassembler,
    reception: Reception,
    start_time: f64,
    counters: TransferCounters,
    decoded_at: Option<f64>,
}

impl FileReceiver {
    pub fn new(params: SessionParams, start_time: f64) -> Result<Self, TransferError> {
        Ok(Self {
            reception: Reception::new(params.spec)?,
            params,
            plan: None,
            reassembler: Reassembler::new(),
            start_time,
            counters: TransferCounters {
                k: params.spec.k as u64,
                applicative_data: params.spec.symbol_size as u64,
                ..TransferCounters::default()
            },
            decoded_at: None,
        })
    }

    pub fn is_decodable(&self) -> bool {
        self.decoded_at.is_some()
    }

    pub fn counters(&self) -> TransferCounters {
        self.counters
    }

    pub fn reassembler(&self) -> &Reassembler {
        &self.reassembler
    }

    /// Handles a datagram delivered at `time` seconds.
    pub fn on_datagram(&mut self, time: f64, datagram: &[u8]) -> Result<Progress, TransferError> {
        if self.decoded_at.is_some() {
            return Ok(Progress::Ignored);
        }
        self.counters.link_nb_data += datagram.len() as u64;
        self.counters.packet_length = self.counters.packet_length.max(datagram.len() as u64);
        let Ok((header, payload)) = parse_datagram(datagram) else {
            self.reassembler.on_datagram(datagram)?;
            return Ok(Progress::Ignored);
        };
        let delivery = self.reassembler.on_packet(&header, payload)?;
        if matches!(
            delivery.outcome,
            PacketOutcome::Stale | PacketOutcome::Malformed
        ) {
            return Ok(Progress::Ignored);
        }
        let size = self.params.spec.symbol_size;
        if header.offset as usize % size != 0 || payload.len() != size {
            return Ok(Progress::Ignored);
        }
        let levels = header.buffer_length as usize / size;
        let plan = match &self.plan {
            Some(p) if p.levels() == levels => p,
            _ => self.plan.insert(build_plan(self.params.spec.n, levels)?),
        };
        let level = header.offset as usize / size + 1;
        let index = plan.block(level, header.buffer_id as usize);
        self.counters.received_symbols += 1;
        let pushed = self.reception.push(FecSymbol {
            index: index as u32,
            data: payload.to_vec(),
        })?;
        if self.reception.is_decodable() {
            self.decoded_at = Some(time);
            self.counters.epsilon = self.reception.epsilon().unwrap_or(0) as u64;
            self.counters.network_time = time - self.start_time;
            self.counters.time = self.counters.network_time;
            return Ok(Progress::Decodable);
        }
        Ok(match pushed {
            Pushed::New => Progress::NewSymbol,
            Pushed::Duplicate => Progress::Duplicate,
        })
    }

    /// Decodes and unframes the file. `compute_time` is added to the
    /// network time to form the `time` criterion.
    pub fn finish(
        &mut self,
        compute_time: f64,
    ) -> Result<(Vec<u8>, TransferCounters), TransferError> {
        if self.decoded_at.is_none() {
            return Err(TransferError::Timeout {
                partial: Box::new(self.counters),
            });
        }
        let blocks = self.reception.decode()?;
        let framed: Vec<u8> = blocks.concat();
        let len = u64::from_be_bytes(framed[..LENGTH_PREFIX].try_into().expect("8 bytes"));
        let end = LENGTH_PREFIX as u64 + len;
        if end > framed.len() as u64 {
            return Err(TransferError::Framing(format!(
                "length {len} exceeds decoded data"
            )));
        }
        self.counters.file_length = len;
        self.counters.time = self.counters.network_time + compute_time;
        Ok((framed[LENGTH_PREFIX..end as usize].to_vec(), self.counters))
    }
}

/// Sender-side trace of the first `duration` seconds of the carousel.
pub fn emission_trace(
    session: &SendSession,
    channel: &ChannelConfig,
    duration: f64,
    session_id: u32,
) -> Result<Vec<TraceRecord>, TransferError> {
    let mut source = session.source(channel, 0.0, session_id)?;
    let mut out = Vec::new();
    while let Some(e) = source.next_emission()? {
        if e.time > duration {
            break;
        }
        let (h, payload) = parse_datagram(&e.datagram).map_err(SourceError::from)?;
        out.push(TraceRecord {
            time_us: netsim::to_ns(e.time) / 1000,
            group: e.group,
            buffer_id: h.buffer_id,
            offset: h.offset,
            len: payload.len() as u32,
            event: TraceEvent::Sent,
        });
    }
    Ok(out)
}

/// One simulated receiver's download.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverResult {
    pub data: Option<Vec<u8>>,
    pub counters: TransferCounters,
    pub metrics: Option<TransferMetrics>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTransfer {
    pub receivers: Vec<ReceiverResult>,
    pub sim: SimOutput,
}

/// Runs the carousel through the simulator, one [`FileReceiver`] per
/// scenario receiver. Decoding is modelled as instantaneous, so
/// `comp = 0` and results are reproducible bit for bit.
pub fn simulate(scenario: &Scenario, session: &SendSession) -> Result<SimTransfer, TransferError> {
    scenario
        .validate()
        .map_err(|e| TransferError::Codec(e.to_string()))?;
    let mut source = session.source(&scenario.channel, 0.0, (scenario.rng_seed as u32) ^ 0x5e55)?;
    let mut receivers: Vec<FileReceiver> = scenario
        .receivers
        .iter()
        .map(|r| FileReceiver::new(session.params(), r.start_time))
        .collect::<Result<_, _>>()?;
    let mut failure: Option<TransferError> = None;
    let mut observer = |i: usize, t: f64, _g: u64, d: &Bytes| match receivers[i].on_datagram(t, d) {
        Ok(Progress::Decodable) => Flow::Detach,
        Ok(_) => Flow::Continue,
        Err(e) => {
            failure.get_or_insert(e);
            Flow::Detach
        }
    };
    let sim = netsim::run(scenario, &mut source, &mut observer)?;
    if let Some(e) = failure {
        return Err(e);
    }
    let mut results = Vec::with_capacity(receivers.len());
    for (rx, out) in receivers.iter_mut().zip(&sim.receivers) {
        let horizon_us = out
            .detached_at
            .map_or(u64::MAX, |t| netsim::to_ns(t) / 1000);
        let (mut sent, mut lost) = (0u64, 0u64);
        for rec in out.trace.iter().filter(|r| r.time_us <= horizon_us) {
            match rec.event {
                TraceEvent::Delivered => sent += 1,
                TraceEvent::Lost | TraceEvent::QueueDrop => {
                    sent += 1;
                    lost += 1;
                }
                TraceEvent::Join | TraceEvent::Sent => {}
            }
        }
        match rx.finish(0.0) {
            Ok((data, mut counters)) => {
                counters.link_packets = sent;
                counters.link_lost = lost;
                let metrics = compute_metrics(&counters)?;
                results.push(ReceiverResult {
                    data: Some(data),
                    counters,
                    metrics: Some(metrics),
                });
            }
            Err(TransferError::Timeout { partial }) => {
                let mut counters = *partial;
                counters.link_packets = sent;
                counters.link_lost = lost;
                counters.file_length = session.file_length();
                results.push(ReceiverResult {
                    data: None,
                    counters,
                    metrics: None,
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(SimTransfer {
        receivers: results,
        sim,
    })
}
