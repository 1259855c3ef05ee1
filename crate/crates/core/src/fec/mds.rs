//! Systematic MDS code over GF(256).
//!
//! The generator is `V * inverse(V_k)` where `V` is the `n x k` Vandermonde
//! matrix on the points `0, 1, .., n - 1` and `V_k` its top `k` rows. Every
//! `k` rows of `V` are independent, hence so are every `k` rows of the
//! generator, and its top block is the identity. Row `i` does not depend on
//! `n`.

use std::collections::BTreeMap;

use super::gf256::{self, Matrix};
use super::{CodecSpec, Decoder, FecError};

/// Row-major `n x k` generator matrix.
pub(super) fn generator(spec: &CodecSpec) -> Vec<u8> {
    let (k, n) = (spec.k, spec.n);
    let vander = |i: usize| -> Vec<u8> { (0..k).map(|j| gf256::pow(i as u8, j)).collect() };
    let top: Vec<Vec<u8>> = (0..k).map(vander).collect();
    let top_rows: Vec<&[u8]> = top.iter().map(Vec::as_slice).collect();
    let top_inv = Matrix::from_rows(&top_rows)
        .inverse()
        .expect("Vandermonde matrix on distinct points is invertible");
    let mut gen = vec![0u8; n * k];
    for i in 0..n {
        if i < k {
            gen[i * k + i] = 1;
            continue;
        }
        let v = vander(i);
        for c in 0..k {
            let mut acc = 0u8;
            for (j, &vj) in v.iter().enumerate() {
                acc ^= gf256::mul(vj, top_inv.row(j)[c]);
            }
            gen[i * k + c] = acc;
        }
    }
    gen
}

fn combine(row: &[u8], blocks: &[Vec<u8>], size: usize) -> Vec<u8> {
    let mut out = vec![0u8; size];
    for (&c, b) in row.iter().zip(blocks) {
        gf256::mul_add_slice(&mut out, b, c);
    }
    out
}

pub(super) fn encode_repairs(spec: &CodecSpec, source: &[Vec<u8>]) -> Vec<Vec<u8>> {
    let gen = generator(spec);
    (spec.k..spec.n)
        .map(|i| combine(&gen[i * spec.k..(i + 1) * spec.k], source, spec.symbol_size))
        .collect()
}

pub(super) struct MdsDecoder {
    spec: CodecSpec,
    gen: Vec<u8>,
    symbols: BTreeMap<usize, Vec<u8>>,
}

impl MdsDecoder {
    pub(super) fn new(spec: CodecSpec) -> Self {
        Self {
            gen: generator(&spec),
            spec,
            symbols: BTreeMap::new(),
        }
    }

    fn row(&self, i: usize) -> &[u8] {
        &self.gen[i * self.spec.k..(i + 1) * self.spec.k]
    }
}

impl Decoder for MdsDecoder {
    fn insert(&mut self, index: usize, data: Vec<u8>) {
        self.symbols.insert(index, data);
    }

    fn ready(&self) -> bool {
        self.symbols.len() >= self.spec.k
    }

    fn solve(&self) -> Result<Vec<Vec<u8>>, FecError> {
        let k = self.spec.k;
        let chosen: Vec<usize> = self.symbols.keys().copied().take(k).collect();
        if chosen.len() < k {
            return Err(FecError::NeedMore { have: chosen.len() });
        }
        let source: Vec<Vec<u8>> = if chosen[k - 1] < k {
            chosen.iter().map(|i| self.symbols[i].clone()).collect()
        } else {
            let rows: Vec<&[u8]> = chosen.iter().map(|&i| self.row(i)).collect();
            let inv = Matrix::from_rows(&rows)
                .inverse()
                .ok_or_else(|| FecError::DecodeFailure("singular submatrix".into()))?;
            let received: Vec<Vec<u8>> = chosen.iter().map(|i| self.symbols[i].clone()).collect();
            (0..k)
                .map(|j| combine(inv.row(j), &received, self.spec.symbol_size))
                .collect()
        };
        for (&i, data) in self.symbols.iter().skip(k) {
            if combine(self.row(i), &source, self.spec.symbol_size) != *data {
                return Err(FecError::DecodeFailure(format!(
                    "symbol {i} is inconsistent"
                )));
            }
        }
        Ok(source)
    }
}
