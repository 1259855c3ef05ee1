//! Receiver-side reassembly of sequenced buffers.
//!
//! Datagrams are stored by `(buffer_id, offset)` until one with a newer
//! buffer id arrives, which flushes the current buffer. Adjacent and
//! overlapping ranges merge, so the parts of a buffer are always disjoint and
//! non-adjacent.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::wire::{parse_datagram, PacketHeader};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReceiverError {
    #[error("buffer {buffer_id}: bytes at offset {offset} disagree with stored data")]
    Integrity { buffer_id: u32, offset: u32 },
    #[error("buffer {buffer_id}: length changed from {expected} to {got}")]
    LengthMismatch {
        buffer_id: u32,
        expected: u32,
        got: u32,
    },
}

/// `a` is newer than `b` in 32-bit serial-number arithmetic.
pub fn serial_newer(a: u32, b: u32) -> bool {
    a != b && (a.wrapping_sub(b) as i32) > 0
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReassemblyBuffer {
    buffer_id: u32,
    expected_length: u32,
    parts: BTreeMap<u32, Vec<u8>>,
}

/// Result of storing one range in a buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Insert {
    Stored,
    Duplicate,
}

impl ReassemblyBuffer {
    pub fn new(buffer_id: u32, expected_length: u32) -> Self {
        Self {
            buffer_id,
            expected_length,
            parts: BTreeMap::new(),
        }
    }

    pub fn buffer_id(&self) -> u32 {
        self.buffer_id
    }

    pub fn expected_length(&self) -> u32 {
        self.expected_length
    }

    pub fn stored_bytes(&self) -> usize {
        self.parts.values().map(Vec::len).sum()
    }

    /// Longest fully covered prefix `[0, m)`.
    pub fn contiguous_prefix(&self) -> &[u8] {
        match self.parts.get(&0) {
            Some(p) => p,
            None => &[],
        }
    }

    /// Disjoint parts sorted by offset.
    pub fn all_parts(&self) -> Vec<(u32, &[u8])> {
        self.parts.iter().map(|(&o, d)| (o, d.as_slice())).collect()
    }

    /// Stores `data` at `offset`, which the caller has bounds-checked.
    pub fn insert(&mut self, offset: u32, data: &[u8]) -> Result<Insert, ReceiverError> {
        let (start, end) = (offset as u64, offset as u64 + data.len() as u64);
        if data.is_empty() {
            return Ok(Insert::Duplicate);
        }
        // parts that overlap or touch [start, end)
        let first = self
            .parts
            .range(..=offset)
            .next_back()
            .filter(|(&o, d)| o as u64 + d.len() as u64 >= start)
            .map(|(&o, _)| o)
            .unwrap_or(offset);
        let touching: Vec<u32> = self
            .parts
            .range(first..)
            .take_while(|(&o, _)| (o as u64) <= end)
            .map(|(&o, _)| o)
            .collect();

        let mut covered = 0u64;
        for &o in &touching {
            let part = &self.parts[&o];
            let (ps, pe) = (o as u64, o as u64 + part.len() as u64);
            let (lo, hi) = (ps.max(start), pe.min(end));
            if lo < hi {
                let theirs = &part[(lo - ps) as usize..(hi - ps) as usize];
                let ours = &data[(lo - start) as usize..(hi - start) as usize];
                if theirs != ours {
                    return Err(ReceiverError::Integrity {
                        buffer_id: self.buffer_id,
                        offset: lo as u32,
                    });
                }
                covered += hi - lo;
            }
        }
        if covered == end - start {
            return Ok(Insert::Duplicate);
        }

        let mut parts: Vec<(u64, Vec<u8>)> = touching
            .iter()
            .map(|o| (*o as u64, self.parts.remove(o).expect("listed part")))
            .collect();
        let lo = parts.first().map_or(start, |p| p.0.min(start));
        let hi = parts
            .last()
            .map_or(end, |p| (p.0 + p.1.len() as u64).max(end));
        let (mut merged, mut pos) = if parts.first().is_some_and(|p| p.0 == lo) {
            let (o, d) = parts.remove(0);
            let e = o + d.len() as u64;
            (d, e)
        } else {
            (Vec::with_capacity((hi - lo) as usize), lo)
        };
        for (o, d) in parts {
            if pos < o {
                merged.extend_from_slice(&data[(pos - start) as usize..(o - start) as usize]);
            }
            pos = o + d.len() as u64;
            merged.extend_from_slice(&d);
        }
        if pos < hi {
            merged.extend_from_slice(&data[(pos - start) as usize..(hi - start) as usize]);
        }
        self.parts.insert(lo as u32, merged);
        Ok(Insert::Stored)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacketOutcome {
    Stored,
    Duplicate,
    /// Belongs to a buffer older than the current one.
    Stale,
    /// Header unparsable or range outside the buffer.
    Malformed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Delivery {
    pub outcome: PacketOutcome,
    /// Previous buffer, finalized because this packet opened a newer one.
    pub flushed: Option<ReassemblyBuffer>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReceiverCounters {
    pub packets: u64,
    pub stored: u64,
    pub duplicates: u64,
    pub stale: u64,
    pub malformed: u64,
    pub flushed: u64,
}

#[derive(Debug, Default)]
pub struct Reassembler {
    current: Option<ReassemblyBuffer>,
    counters: ReceiverCounters,
}

impl Reassembler {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn current(&self) -> Option<&ReassemblyBuffer> {
        self.current.as_ref()
    }

    pub fn counters(&self) -> ReceiverCounters {
        self.counters
    }

    /// Parses and stores a raw datagram.
    pub fn on_datagram(&mut self, datagram: &[u8]) -> Result<Delivery, ReceiverError> {
        match parse_datagram(datagram) {
            Ok((h, payload)) => self.on_packet(&h, payload),
            Err(_) => {
                self.counters.packets += 1;
                self.counters.malformed += 1;
                Ok(Delivery {
                    outcome: PacketOutcome::Malformed,
                    flushed: None,
                })
            }
        }
    }

    pub fn on_packet(
        &mut self,
        header: &PacketHeader,
        payload: &[u8],
    ) -> Result<Delivery, ReceiverError> {
        self.counters.packets += 1;
        let drop = |c: &mut ReceiverCounters, outcome| {
            match outcome {
                PacketOutcome::Stale => c.stale += 1,
                _ => c.malformed += 1,
            }
            Ok(Delivery {
                outcome,
                flushed: None,
            })
        };
        if header.offset as u64 + payload.len() as u64 > header.buffer_length as u64 {
            return drop(&mut self.counters, PacketOutcome::Malformed);
        }
        let mut flushed = None;
        match &self.current {
            Some(cur) if cur.buffer_id == header.buffer_id => {
                if cur.expected_length != header.buffer_length {
                    return Err(ReceiverError::LengthMismatch {
                        buffer_id: cur.buffer_id,
                        expected: cur.expected_length,
                        got: header.buffer_length,
                    });
                }
            }
            Some(cur) if !serial_newer(header.buffer_id, cur.buffer_id) => {
                return drop(&mut self.counters, PacketOutcome::Stale);
            }
            _ => {
                flushed = self.current.replace(ReassemblyBuffer::new(
                    header.buffer_id,
                    header.buffer_length,
                ));
                if flushed.is_some() {
                    self.counters.flushed += 1;
                }
            }
        }
        let buf = self.current.as_mut().expect("current buffer");
        let outcome = match buf.insert(header.offset, payload)? {
            Insert::Stored => {
                self.counters.stored += 1;
                PacketOutcome::Stored
            }
            Insert::Duplicate => {
                self.counters.duplicates += 1;
                PacketOutcome::Duplicate
            }
        };
        Ok(Delivery { outcome, flushed })
    }

    /// Finalizes the current buffer at end of session.
    pub fn flush(&mut self) -> Option<ReassemblyBuffer> {
        let out = self.current.take();
        if out.is_some() {
            self.counters.flushed += 1;
        }
        out
    }
}
