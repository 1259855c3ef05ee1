//! Systematic erasure codes producing `n` symbols from `k` source blocks.
//!
//! Three codecs sit behind one interface:
//!
//! * `null`: no repair symbols, `n = k`.
//! * `mds`: Vandermonde-derived code over GF(256). Any `k` distinct symbols
//!   decode.
//! * `sparse_parity`: every repair symbol is the XOR of a seeded random set of
//!   source symbols. Decoding needs `k + ε` distinct symbols, found by
//!   incremental rank tracking, and runs peeling followed by dense
//!   elimination.

pub mod gf256;
mod mds;
mod sparse;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use sparse::{repair_equation, repair_equations, REPAIR_DEGREE};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FecError {
    #[error("invalid codec: {0}")]
    InvalidSpec(String),
    #[error("expected {expected} source blocks, got {got}")]
    WrongBlockCount { expected: usize, got: usize },
    #[error("symbol of {got} bytes, expected {expected}")]
    BadSymbolSize { expected: usize, got: usize },
    #[error("symbol index {index} out of range for n = {n}")]
    BadIndex { index: u32, n: usize },
    #[error("need more symbols, have {have} distinct")]
    NeedMore { have: usize },
    #[error("decode failure: {0}")]
    DecodeFailure(String),
    #[error("no successful decode in trace")]
    NotDecoded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodecKind {
    Null,
    Mds,
    SparseParity,
}

impl CodecKind {
    pub fn name(self) -> &'static str {
        match self {
            CodecKind::Null => "null",
            CodecKind::Mds => "mds",
            CodecKind::SparseParity => "sparse_parity",
        }
    }
}

impl FromStr for CodecKind {
    type Err = FecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "null" => Ok(CodecKind::Null),
            "mds" => Ok(CodecKind::Mds),
            "sparse_parity" => Ok(CodecKind::SparseParity),
            other => Err(FecError::InvalidSpec(format!("unknown codec {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CodecSpec {
    pub kind: CodecKind,
    pub k: usize,
    pub n: usize,
    pub symbol_size: usize,
    /// Equation seed, used by `sparse_parity` only.
    pub seed: u64,
}

impl CodecSpec {
    pub fn new(kind: CodecKind, k: usize, n: usize, symbol_size: usize, seed: u64) -> Self {
        Self {
            kind,
            k,
            n,
            symbol_size,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), FecError> {
        let bad = |m: &str| Err(FecError::InvalidSpec(m.to_string()));
        if self.k == 0 {
            return bad("k must be positive");
        }
        if self.n < self.k {
            return bad("n must be at least k");
        }
        if self.symbol_size == 0 {
            return bad("symbol_size must be positive");
        }
        if self.n > u32::MAX as usize {
            return bad("n does not fit a symbol index");
        }
        match self.kind {
            CodecKind::Null if self.n != self.k => bad("null codec requires n = k"),
            CodecKind::Mds if self.n > 255 => bad("mds codec requires n <= 255"),
            _ => Ok(()),
        }
    }

    /// Parses `name,k,n[,seed]` (symbol size supplied separately).
    pub fn parse(text: &str, symbol_size: usize) -> Result<Self, FecError> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.len() < 3 || parts.len() > 4 {
            return Err(FecError::InvalidSpec(format!(
                "expected name,k,n[,seed], got {text:?}"
            )));
        }
        let num = |s: &str| {
            s.parse::<u64>()
                .map_err(|_| FecError::InvalidSpec(format!("bad number {s:?}")))
        };
        let spec = Self {
            kind: parts[0].parse()?,
            k: num(parts[1])? as usize,
            n: num(parts[2])? as usize,
            symbol_size,
            seed: parts.get(3).map(|s| num(s)).transpose()?.unwrap_or(0),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for CodecSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{}",
            self.kind.name(),
            self.k,
            self.n,
            self.seed
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    Source,
    Repair,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FecSymbol {
    pub index: u32,
    pub data: Vec<u8>,
}

impl FecSymbol {
    pub fn kind(&self, spec: &CodecSpec) -> SymbolKind {
        if (self.index as usize) < spec.k {
            SymbolKind::Source
        } else {
            SymbolKind::Repair
        }
    }
}

/// Splits `data` into `symbol_size` blocks, zero-padding the last one.
pub fn split_blocks(data: &[u8], symbol_size: usize) -> Vec<Vec<u8>> {
    data.chunks(symbol_size)
        .map(|c| {
            let mut b = c.to_vec();
            b.resize(symbol_size, 0);
            b
        })
        .collect()
}

fn check_source(spec: &CodecSpec, source: &[Vec<u8>]) -> Result<(), FecError> {
    spec.validate()?;
    if source.len() != spec.k {
        return Err(FecError::WrongBlockCount {
            expected: spec.k,
            got: source.len(),
        });
    }
    if let Some(b) = source.iter().find(|b| b.len() != spec.symbol_size) {
        return Err(FecError::BadSymbolSize {
            expected: spec.symbol_size,
            got: b.len(),
        });
    }
    Ok(())
}

/// Produces the `n` symbols: the `k` source blocks verbatim, then repairs.
pub fn encode(spec: &CodecSpec, source: &[Vec<u8>]) -> Result<Vec<FecSymbol>, FecError> {
    check_source(spec, source)?;
    let repairs = match spec.kind {
        CodecKind::Null => Vec::new(),
        CodecKind::Mds => mds::encode_repairs(spec, source),
        CodecKind::SparseParity => sparse::encode_repairs(spec, source),
    };
    Ok(source
        .iter()
        .cloned()
        .chain(repairs)
        .enumerate()
        .map(|(i, data)| FecSymbol {
            index: i as u32,
            data,
        })
        .collect())
}

trait Decoder: Send {
    /// Stores a symbol not seen before.
    fn insert(&mut self, index: usize, data: Vec<u8>);
    fn ready(&self) -> bool;
    fn solve(&self) -> Result<Vec<Vec<u8>>, FecError>;
}

struct NullDecoder {
    k: usize,
    blocks: Vec<Option<Vec<u8>>>,
    have: usize,
}

impl Decoder for NullDecoder {
    fn insert(&mut self, index: usize, data: Vec<u8>) {
        self.blocks[index] = Some(data);
        self.have += 1;
    }

    fn ready(&self) -> bool {
        self.have == self.k
    }

    fn solve(&self) -> Result<Vec<Vec<u8>>, FecError> {
        self.blocks
            .iter()
            .map(|b| b.clone().ok_or(FecError::NeedMore { have: self.have }))
            .collect()
    }
}

/// Outcome of pushing one symbol into a [`Reception`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pushed {
    New,
    Duplicate,
}

/// Order in which symbols reached a decoder and when it became decodable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReceptionTrace {
    pub k: usize,
    pub received: Vec<u32>,
    /// Number of entries of `received` consumed when decoding first became
    /// possible.
    pub decoded_after: Option<usize>,
}

/// Incremental decoder state for one object.
pub struct Reception {
    spec: CodecSpec,
    decoder: Box<dyn Decoder>,
    seen: Vec<bool>,
    distinct: usize,
    trace: ReceptionTrace,
}

impl fmt::Debug for Reception {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Reception")
            .field("spec", &self.spec)
            .field("distinct", &self.distinct)
            .field("decoded_after", &self.trace.decoded_after)
            .finish()
    }
}

impl Reception {
    pub fn new(spec: CodecSpec) -> Result<Self, FecError> {
        spec.validate()?;
        let decoder: Box<dyn Decoder> = match spec.kind {
            CodecKind::Null => Box::new(NullDecoder {
                k: spec.k,
                blocks: vec![None; spec.k],
                have: 0,
            }),
            CodecKind::Mds => Box::new(mds::MdsDecoder::new(spec)),
            CodecKind::SparseParity => Box::new(sparse::SparseDecoder::new(spec)),
        };
        Ok(Self {
            spec,
            decoder,
            seen: vec![false; spec.n],
            distinct: 0,
            trace: ReceptionTrace {
                k: spec.k,
                received: Vec::new(),
                decoded_after: None,
            },
        })
    }

    pub fn spec(&self) -> &CodecSpec {
        &self.spec
    }

    pub fn push(&mut self, symbol: FecSymbol) -> Result<Pushed, FecError> {
        let index = symbol.index as usize;
        if index >= self.spec.n {
            return Err(FecError::BadIndex {
                index: symbol.index,
                n: self.spec.n,
            });
        }
        if symbol.data.len() != self.spec.symbol_size {
            return Err(FecError::BadSymbolSize {
                expected: self.spec.symbol_size,
                got: symbol.data.len(),
            });
        }
        self.trace.received.push(symbol.index);
        if self.seen[index] {
            return Ok(Pushed::Duplicate);
        }
        self.seen[index] = true;
        self.distinct += 1;
        self.decoder.insert(index, symbol.data);
        if self.trace.decoded_after.is_none() && self.decoder.ready() {
            self.trace.decoded_after = Some(self.trace.received.len());
        }
        Ok(Pushed::New)
    }

    pub fn is_decodable(&self) -> bool {
        self.trace.decoded_after.is_some()
    }

    pub fn distinct(&self) -> usize {
        self.distinct
    }

    /// Distinct symbols beyond `k` needed to decode.
    pub fn epsilon(&self) -> Option<usize> {
        self.is_decodable()
            .then(|| self.distinct_at_decode() - self.spec.k)
    }

    fn distinct_at_decode(&self) -> usize {
        distinct_prefix(&self.trace.received, self.trace.decoded_after.unwrap_or(0))
    }

    pub fn trace(&self) -> &ReceptionTrace {
        &self.trace
    }

    /// Recovers the `k` source blocks.
    pub fn decode(&self) -> Result<Vec<Vec<u8>>, FecError> {
        if !self.decoder.ready() {
            return Err(FecError::NeedMore {
                have: self.distinct,
            });
        }
        self.decoder.solve()
    }
}

fn distinct_prefix(received: &[u32], len: usize) -> usize {
    received[..len.min(received.len())]
        .iter()
        .collect::<BTreeSet<_>>()
        .len()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub blocks: Vec<Vec<u8>>,
    /// Distinct symbols used beyond `k`.
    pub epsilon: usize,
}

/// Decodes from a set of received symbols; duplicates are ignored.
pub fn decode(spec: &CodecSpec, received: &[FecSymbol]) -> Result<Decoded, FecError> {
    let mut rx = Reception::new(*spec)?;
    for s in received {
        rx.push(s.clone())?;
    }
    let blocks = rx.decode()?;
    Ok(Decoded {
        blocks,
        epsilon: rx.distinct() - spec.k,
    })
}

/// FEC symbol overhead in percent, `((k + ε) / k - 1) * 100`, for the decode
/// recorded in `trace`.
pub fn epsilon_overhead(spec: &CodecSpec, trace: &ReceptionTrace) -> Result<f64, FecError> {
    let at = trace.decoded_after.ok_or(FecError::NotDecoded)?;
    let needed = distinct_prefix(&trace.received, at);
    if needed < spec.k {
        return Err(FecError::NotDecoded);
    }
    Ok(symbol_overhead(spec.k, needed - spec.k))
}

/// `((k + ε) / k - 1) * 100`.
pub fn symbol_overhead(k: usize, epsilon: usize) -> f64 {
    ((k + epsilon) as f64 / k as f64 - 1.0) * 100.0
}
