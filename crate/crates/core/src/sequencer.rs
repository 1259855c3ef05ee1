//! Maps a hierarchically encoded buffer onto the dynamic groups.
//!
//! The buffer is cut into PDUs of `packet_size - HEADER_LEN` bytes, most
//! important first. The buffer window is split into tiles (one group during
//! one sub_TSI slice). Tiles are ranked by their minimal cumulative rate and
//! receive consecutive PDU ranges in rank order, so PDU 0 travels on the tile
//! that the largest population of receivers obtains. Inside a tile the group
//! rate keeps decreasing, so packets go out in descending PDU order and the
//! most important PDU of a tile is sent last.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::ops::Range;

use thiserror::Error;

use crate::channel::{CarryState, ChannelConfig, ChannelError, TileBudget, TileId};
use crate::scalar::{slack_floor, Real};
use crate::wire::{HEADER_LEN, MAX_PAYLOAD};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SequencerError {
    #[error("empty buffer")]
    EmptyBuffer,
    #[error("no packet capacity in the buffer window")]
    NoCapacity,
    #[error("rate must be positive")]
    InvalidRate,
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// One buffer handed to the sequencer.
#[derive(Debug, Clone, Copy)]
pub struct SequenceRequest<'a, T> {
    /// Most important bytes first.
    pub buffer: &'a [u8],
    /// Seconds allotted to send the buffer.
    pub buffer_time: T,
    pub buffer_length: usize,
    pub buffer_id: u32,
}

impl<'a, T: Real> SequenceRequest<'a, T> {
    pub fn new(buffer: &'a [u8], buffer_time: T, buffer_id: u32) -> Self {
        Self {
            buffer,
            buffer_time,
            buffer_length: buffer.len(),
            buffer_id,
        }
    }
}

/// A PDU `{j, g, s}` with its send instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SequencedPacket<T> {
    pub pdu_index: usize,
    pub group: u64,
    pub seq: u32,
    pub send_time: T,
    pub tile: TileId,
    pub buffer_id: u32,
    pub offset: usize,
    pub payload: Vec<u8>,
}

/// PDU size for a channel, i.e. the packet budget minus the header.
pub fn pdu_size<T: Real>(cfg: &ChannelConfig<T>) -> Result<usize, SequencerError> {
    let size = (cfg.packet_size as usize).saturating_sub(HEADER_LEN);
    if size == 0 || size > MAX_PAYLOAD {
        return Err(SequencerError::InvalidRequest(format!(
            "packet_size {} leaves an unusable PDU size",
            cfg.packet_size
        )));
    }
    Ok(size)
}

/// Time needed to send `first_level_bytes` at `min_rate` bits/s.
pub fn infer_buffer_time<T: Real>(
    first_level_bytes: usize,
    min_rate: T,
) -> Result<T, SequencerError> {
    if !(min_rate > T::zero()) {
        return Err(SequencerError::InvalidRate);
    }
    Ok(T::from_count(first_level_bytes as u64) * T::lit(8.0) / min_rate)
}

/// Bytes sent in `buffer_time` at `max_rate` bits/s.
pub fn infer_buffer_length<T: Real>(buffer_time: T, max_rate: T) -> usize {
    slack_floor(buffer_time * max_rate / T::lit(8.0))
        .max(T::zero())
        .to_usize()
        .unwrap_or(0)
}

/// Total rank order of tiles: ascending minimal cumulative rate, then earlier
/// interval, then lower group.
pub fn tile_rank_order<T: Real>(a: &TileBudget<T>, b: &TileBudget<T>) -> Ordering {
    a.min_cum_rate
        .partial_cmp(&b.min_cum_rate)
        .unwrap_or(Ordering::Equal)
        .then(a.tile.interval.cmp(&b.tile.interval))
        .then(a.tile.group.cmp(&b.tile.group))
}

/// PDU ranges per tile, in the same order as `tiles`.
pub fn assign_pdus<T: Real>(tiles: &[TileBudget<T>], pdu_count: usize) -> Vec<Range<usize>> {
    let mut ranked: Vec<usize> = (0..tiles.len()).collect();
    ranked.sort_by(|&a, &b| tile_rank_order(&tiles[a], &tiles[b]));
    let mut ranges = vec![0..0; tiles.len()];
    let mut next = 0usize;
    for idx in ranked {
        let take = (tiles[idx].packet_count as usize).min(pdu_count - next);
        ranges[idx] = next..next + take;
        next += take;
    }
    ranges
}

/// A sequencing session over consecutive buffer windows.
///
/// The session clock starts at the first sub_TSI boundary at or after the
/// requested start and advances by each buffer's `buffer_time`. Packet carry
/// is kept across buffers so that long-run packet counts follow the rates.
#[derive(Debug, Clone)]
pub struct Sequencer<T> {
    cfg: ChannelConfig<T>,
    clock: T,
    carry: CarryState<T>,
    pdu_size: usize,
}

impl<T: Real> Sequencer<T> {
    pub fn new(cfg: ChannelConfig<T>, t_start: T) -> Result<Self, SequencerError> {
        cfg.validate()?;
        let pdu_size = pdu_size(&cfg)?;
        Ok(Self {
            clock: cfg.align_up(t_start),
            cfg,
            carry: CarryState::new(),
            pdu_size,
        })
    }

    pub fn config(&self) -> &ChannelConfig<T> {
        &self.cfg
    }

    /// Start of the next buffer window.
    pub fn clock(&self) -> T {
        self.clock
    }

    pub fn pdu_size(&self) -> usize {
        self.pdu_size
    }

    /// Sequences one buffer into the next window and advances the clock.
    pub fn sequence(
        &mut self,
        req: &SequenceRequest<'_, T>,
    ) -> Result<Vec<SequencedPacket<T>>, SequencerError> {
        if req.buffer.is_empty() {
            return Err(SequencerError::EmptyBuffer);
        }
        if req.buffer_length != req.buffer.len() {
            return Err(SequencerError::InvalidRequest(format!(
                "buffer_length {} but buffer holds {} bytes",
                req.buffer_length,
                req.buffer.len()
            )));
        }
        if !(req.buffer_time > T::zero()) || !req.buffer_time.is_finite() {
            return Err(SequencerError::InvalidRequest(
                "buffer_time must be positive".into(),
            ));
        }
        let t0 = self.clock;
        let t1 = t0 + req.buffer_time;
        self.clock = t1;

        let tiles = self.cfg.tiles_in_window_with_carry(t0, t1, &mut self.carry);
        if tiles.iter().all(|t| t.packet_count == 0) {
            return Err(SequencerError::NoCapacity);
        }
        let pdu_count = req.buffer.len().div_ceil(self.pdu_size);
        let ranges = assign_pdus(&tiles, pdu_count);

        let mut next_seq: BTreeMap<u64, u32> = BTreeMap::new();
        let mut packets = Vec::with_capacity(pdu_count);
        // tiles are chronological per group, so seq follows send order
        for (tile, range) in tiles.iter().zip(ranges) {
            let count = range.len();
            if count == 0 {
                continue;
            }
            let step = (tile.end - tile.start) / T::from_count(count as u64);
            let seq = next_seq.entry(tile.tile.group).or_insert(0);
            for k in 0..count {
                let j = range.end - 1 - k;
                let offset = j * self.pdu_size;
                let end = (offset + self.pdu_size).min(req.buffer.len());
                packets.push(SequencedPacket {
                    pdu_index: j,
                    group: tile.tile.group,
                    seq: *seq,
                    send_time: tile.start + (T::from_count(k as u64) + T::lit(0.5)) * step,
                    tile: tile.tile,
                    buffer_id: req.buffer_id,
                    offset,
                    payload: req.buffer[offset..end].to_vec(),
                });
                *seq += 1;
            }
        }
        packets.sort_by(|a, b| {
            a.send_time
                .partial_cmp(&b.send_time)
                .unwrap_or(Ordering::Equal)
                .then(a.group.cmp(&b.group))
        });
        Ok(packets)
    }
}

/// Sequences a single buffer in the window starting at the first sub_TSI
/// boundary at or after `t_start`.
pub fn sequence<T: Real>(
    req: &SequenceRequest<'_, T>,
    cfg: &ChannelConfig<T>,
    t_start: T,
) -> Result<Vec<SequencedPacket<T>>, SequencerError> {
    Sequencer::new(*cfg, t_start)?.sequence(req)
}
