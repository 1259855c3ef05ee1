use std::collections::{BTreeMap, VecDeque};

use bytes::Bytes;
use thiserror::Error;

use crate::sequencer::{SequenceRequest, SequencerError};
use crate::wire::{build_datagram, PacketHeader, WireError, VERSION};
use crate::{ChannelConfig, Sequencer};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SourceError {
    #[error(transparent)]
    Sequencer(#[from] SequencerError),
    #[error(transparent)]
    Wire(#[from] WireError),
}

/// One datagram handed to the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Emission {
    /// Send time, seconds.
    pub time: f64,
    /// Absolute group id (0 for the base group).
    pub group: u64,
    pub datagram: Bytes,
}

/// Emissions in nondecreasing time order.
pub trait PacketSource {
    fn next_emission(&mut self) -> Result<Option<Emission>, SourceError>;
}

/// Replays a fixed list.
#[derive(Debug, Clone, Default)]
pub struct VecSource {
    items: VecDeque<Emission>,
}

impl VecSource {
    pub fn new(mut items: Vec<Emission>) -> Self {
        items.sort_by(|a, b| a.time.total_cmp(&b.time));
        Self {
            items: items.into(),
        }
    }
}

impl PacketSource for VecSource {
    fn next_emission(&mut self) -> Result<Option<Emission>, SourceError> {
        Ok(self.items.pop_front())
    }
}

/// Supplies the application buffers of a session.
pub trait BufferProvider {
    /// Bytes of buffer `buffer_id` and its transmission time in seconds, or
    /// `None` at the end of the session.
    fn next_buffer(&mut self, buffer_id: u32) -> Option<(Vec<u8>, f64)>;
}

impl<F: FnMut(u32) -> Option<(Vec<u8>, f64)>> BufferProvider for F {
    fn next_buffer(&mut self, buffer_id: u32) -> Option<(Vec<u8>, f64)> {
        self(buffer_id)
    }
}

/// Sequences buffers back to back and frames them as datagrams.
pub struct SequencedSource<P> {
    sequencer: Sequencer,
    provider: P,
    session_id: u32,
    next_buffer: u32,
    pending: VecDeque<Emission>,
    group_seq: BTreeMap<u64, u32>,
    done: bool,
}

impl<P: BufferProvider> SequencedSource<P> {
    pub fn new(
        channel: ChannelConfig,
        start: f64,
        session_id: u32,
        provider: P,
    ) -> Result<Self, SourceError> {
        Ok(Self {
            sequencer: Sequencer::new(channel, start)?,
            provider,
            session_id,
            next_buffer: 0,
            pending: VecDeque::new(),
            group_seq: BTreeMap::new(),
            done: false,
        })
    }

    pub fn channel(&self) -> &ChannelConfig {
        self.sequencer.config()
    }

    pub fn pdu_size(&self) -> usize {
        self.sequencer.pdu_size()
    }

    fn refill(&mut self) -> Result<(), SourceError> {
        while self.pending.is_empty() && !self.done {
            let id = self.next_buffer;
            let Some((buffer, buffer_time)) = self.provider.next_buffer(id) else {
                self.done = true;
                break;
            };
            self.next_buffer = id.wrapping_add(1);
            let req = SequenceRequest::new(&buffer, buffer_time, id);
            let packets = self.sequencer.sequence(&req)?;
            let cfg = *self.sequencer.config();
            for p in packets {
                let seq = self.group_seq.entry(p.group).or_insert(0);
                let header = PacketHeader {
                    version: VERSION,
                    group: cfg.physical_slot(p.group) as u16,
                    session_id: self.session_id,
                    tsi: cfg.tsi_at(p.send_time) as u32,
                    seq: *seq,
                    buffer_id: id,
                    offset: p.offset as u32,
                    buffer_length: buffer.len() as u32,
                    ..PacketHeader::default()
                };
                *seq = seq.wrapping_add(1);
                self.pending.push_back(Emission {
                    time: p.send_time,
                    group: p.group,
                    datagram: Bytes::from(build_datagram(header, &p.payload)?),
                });
            }
        }
        Ok(())
    }
}

impl<P: BufferProvider> PacketSource for SequencedSource<P> {
    fn next_emission(&mut self) -> Result<Option<Emission>, SourceError> {
        self.refill()?;
        Ok(self.pending.pop_front())
    }
}
