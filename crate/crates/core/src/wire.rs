//! Datagram header.
//!
//! Every datagram starts with a fixed 32-byte big-endian header:
//!
//! | bytes  | field           |
//! |--------|-----------------|
//! | 0      | `version`       |
//! | 1      | `flags`         |
//! | 2..4   | `group`         |
//! | 4..8   | `session_id`    |
//! | 8..12  | `tsi`           |
//! | 12..16 | `seq`           |
//! | 16..20 | `buffer_id`     |
//! | 20..24 | `offset`        |
//! | 24..28 | `buffer_length` |
//! | 28..30 | `payload_len`   |
//! | 30..32 | reserved, zero  |

use thiserror::Error;

pub const HEADER_LEN: usize = 32;
pub const VERSION: u8 = 1;
/// Largest payload carried by one datagram.
pub const MAX_PAYLOAD: usize = 1448;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("datagram of {0} bytes is shorter than the header")]
    Truncated(usize),
    #[error("unsupported header version {0}")]
    Version(u8),
    #[error("payload_len {declared} does not match the {actual} payload bytes present")]
    PayloadLength { declared: usize, actual: usize },
    #[error("payload of {0} bytes exceeds the maximum")]
    PayloadTooLarge(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PacketHeader {
    pub version: u8,
    pub flags: u8,
    /// Physical group slot, 0 for the base group.
    pub group: u16,
    pub session_id: u32,
    pub tsi: u32,
    /// Sequence number of the packet within its group for this buffer.
    pub seq: u32,
    pub buffer_id: u32,
    /// Byte offset of the payload within the application buffer.
    pub offset: u32,
    pub buffer_length: u32,
    pub payload_len: u16,
    pub reserved: u16,
}

impl PacketHeader {
    pub fn encode(&self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[0] = self.version;
        b[1] = self.flags;
        b[2..4].copy_from_slice(&self.group.to_be_bytes());
        b[4..8].copy_from_slice(&self.session_id.to_be_bytes());
        b[8..12].copy_from_slice(&self.tsi.to_be_bytes());
        b[12..16].copy_from_slice(&self.seq.to_be_bytes());
        b[16..20].copy_from_slice(&self.buffer_id.to_be_bytes());
        b[20..24].copy_from_slice(&self.offset.to_be_bytes());
        b[24..28].copy_from_slice(&self.buffer_length.to_be_bytes());
        b[28..30].copy_from_slice(&self.payload_len.to_be_bytes());
        b[30..32].copy_from_slice(&self.reserved.to_be_bytes());
        b
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, WireError> {
        if bytes.len() < HEADER_LEN {
            return Err(WireError::Truncated(bytes.len()));
        }
        let u16_at = |i: usize| u16::from_be_bytes([bytes[i], bytes[i + 1]]);
        let u32_at =
            |i: usize| u32::from_be_bytes([bytes[i], bytes[i + 1], bytes[i + 2], bytes[i + 3]]);
        Ok(Self {
            version: bytes[0],
            flags: bytes[1],
            group: u16_at(2),
            session_id: u32_at(4),
            tsi: u32_at(8),
            seq: u32_at(12),
            buffer_id: u32_at(16),
            offset: u32_at(20),
            buffer_length: u32_at(24),
            payload_len: u16_at(28),
            reserved: u16_at(30),
        })
    }
}

/// Builds a datagram from a header and its payload, filling `payload_len`.
pub fn build_datagram(mut header: PacketHeader, payload: &[u8]) -> Result<Vec<u8>, WireError> {
    if payload.len() > MAX_PAYLOAD {
        return Err(WireError::PayloadTooLarge(payload.len()));
    }
    header.payload_len = payload.len() as u16;
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.extend_from_slice(&header.encode());
    out.extend_from_slice(payload);
    Ok(out)
}

/// Splits a datagram into its header and payload, checking version and length.
pub fn parse_datagram(datagram: &[u8]) -> Result<(PacketHeader, &[u8]), WireError> {
    let header = PacketHeader::decode(datagram)?;
    if header.version != VERSION {
        return Err(WireError::Version(header.version));
    }
    let payload = &datagram[HEADER_LEN..];
    if header.payload_len as usize != payload.len() {
        return Err(WireError::PayloadLength {
            declared: header.payload_len as usize,
            actual: payload.len(),
        });
    }
    Ok((header, payload))
}
