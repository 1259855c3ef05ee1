//! Sparse parity code with a staircase accumulator.
//!
//! Repair symbol `i` is the XOR of a seeded set of source symbols and of
//! repair symbol `i - 1`. Each source symbol enters the same number of
//! repair equations, so rows average [`REPAIR_DEGREE`] sources when
//! `n = 2k`. Decodability is tracked incrementally as the GF(2) rank of the
//! received symbols expressed over the sources; the solve itself peels the
//! sparse equations and falls back to dense elimination on what is left.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CodecSpec, Decoder, FecError};

/// Average number of source symbols per repair equation at `n = 2k`.
pub const REPAIR_DEGREE: usize = 8;

fn xor_into(dst: &mut [u8], src: &[u8]) {
    dst.iter_mut().zip(src).for_each(|(d, s)| *d ^= s);
}

fn column_degree(k: usize, m: usize) -> usize {
    let d = (REPAIR_DEGREE * m + k / 2) / k;
    d.clamp(1, m)
}

/// Source indices of every repair equation, sorted, staircase term excluded.
pub fn repair_equations(spec: &CodecSpec) -> Vec<Vec<usize>> {
    let (k, m) = (spec.k, spec.n - spec.k);
    if m == 0 {
        return Vec::new();
    }
    let dc = column_degree(k, m);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5eed_0f5a_c0de);
    let mut pool: Vec<usize> = (0..k * dc).map(|t| t % m).collect();
    pool.shuffle(&mut rng);
    let mut rows = vec![Vec::new(); m];
    for j in 0..k {
        let base = j * dc;
        for t in 0..dc {
            let pos = base + t;
            let used = &pool[base..pos];
            if used.contains(&pool[pos]) {
                match (pos + 1..pool.len()).find(|&q| !pool[base..pos].contains(&pool[q])) {
                    Some(q) => pool.swap(pos, q),
                    None => loop {
                        let r = rng.gen_range(0..m);
                        if !pool[base..pos].contains(&r) {
                            pool[pos] = r;
                            break;
                        }
                    },
                }
            }
            rows[pool[pos]].push(j);
        }
    }
    for r in &mut rows {
        r.sort_unstable();
    }
    rows
}

/// Source indices of repair equation `r` (0-based among repairs).
pub fn repair_equation(spec: &CodecSpec, r: usize) -> Vec<usize> {
    repair_equations(spec).swap_remove(r)
}

pub(super) fn encode_repairs(spec: &CodecSpec, source: &[Vec<u8>]) -> Vec<Vec<u8>> {
    let mut out: Vec<Vec<u8>> = Vec::with_capacity(spec.n - spec.k);
    for eq in repair_equations(spec) {
        let mut acc = out
            .last()
            .cloned()
            .unwrap_or_else(|| vec![0; spec.symbol_size]);
        for &j in &eq {
            xor_into(&mut acc, &source[j]);
        }
        out.push(acc);
    }
    out
}

/// Incremental GF(2) basis keyed by lowest set bit.
struct RankTracker {
    words: usize,
    pivots: Vec<Option<Vec<u64>>>,
    rank: usize,
}

impl RankTracker {
    fn new(bits: usize) -> Self {
        Self {
            words: bits.div_ceil(64),
            pivots: vec![None; bits],
            rank: 0,
        }
    }

    fn insert(&mut self, mut v: Vec<u64>) -> bool {
        let mut w = 0;
        while w < self.words {
            if v[w] == 0 {
                w += 1;
                continue;
            }
            let bit = w * 64 + v[w].trailing_zeros() as usize;
            match &self.pivots[bit] {
                Some(p) => {
                    for i in w..self.words {
                        v[i] ^= p[i];
                    }
                }
                None => {
                    self.pivots[bit] = Some(v);
                    self.rank += 1;
                    return true;
                }
            }
        }
        false
    }
}

pub(super) struct SparseDecoder {
    spec: CodecSpec,
    equations: Vec<Vec<usize>>,
    received: Vec<Option<Vec<u8>>>,
    tracker: RankTracker,
}

impl SparseDecoder {
    pub(super) fn new(spec: CodecSpec) -> Self {
        Self {
            equations: repair_equations(&spec),
            received: vec![None; spec.n],
            tracker: RankTracker::new(spec.k),
            spec,
        }
    }

    /// Received symbol `index` as a vector over the sources.
    fn source_vector(&self, index: usize) -> Vec<u64> {
        let mut v = vec![0u64; self.tracker.words];
        let mut flip = |j: usize| v[j / 64] ^= 1 << (j % 64);
        if index < self.spec.k {
            flip(index);
        } else {
            for eq in &self.equations[..=index - self.spec.k] {
                eq.iter().for_each(|&j| flip(j));
            }
        }
        v
    }

    /// Unknowns of parity equation `i`: its sources, repair `i`, repair `i - 1`.
    fn vars(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let k = self.spec.k;
        let prev = (i > 0).then(|| k + i - 1);
        self.equations[i]
            .iter()
            .copied()
            .chain(std::iter::once(k + i))
            .chain(prev)
    }
}

impl Decoder for SparseDecoder {
    fn insert(&mut self, index: usize, data: Vec<u8>) {
        let v = self.source_vector(index);
        self.tracker.insert(v);
        self.received[index] = Some(data);
    }

    fn ready(&self) -> bool {
        self.tracker.rank == self.spec.k
    }

    fn solve(&self) -> Result<Vec<Vec<u8>>, FecError> {
        let (k, n, size) = (self.spec.k, self.spec.n, self.spec.symbol_size);
        let m = n - k;
        let mut known = self.received.clone();

        // peeling
        let mut var_eqs: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut unknown_count = vec![0usize; m];
        for i in 0..m {
            for v in self.vars(i) {
                var_eqs[v].push(i);
                if known[v].is_none() {
                    unknown_count[i] += 1;
                }
            }
        }
        let mut queue: Vec<usize> = (0..m).filter(|&i| unknown_count[i] == 1).collect();
        while let Some(i) = queue.pop() {
            if unknown_count[i] != 1 {
                continue;
            }
            let mut value = vec![0u8; size];
            let mut target = None;
            for v in self.vars(i) {
                match &known[v] {
                    Some(d) => xor_into(&mut value, d),
                    None => target = Some(v),
                }
            }
            let target = target.expect("one unknown left");
            known[target] = Some(value);
            for &e in &var_eqs[target] {
                unknown_count[e] -= 1;
                if unknown_count[e] == 1 {
                    queue.push(e);
                }
            }
        }

        // dense elimination on the residual system
        if known[..k].iter().any(Option::is_none) {
            let unknowns: Vec<usize> = (0..n).filter(|&v| known[v].is_none()).collect();
            let mut col = vec![usize::MAX; n];
            for (c, &v) in unknowns.iter().enumerate() {
                col[v] = c;
            }
            let words = unknowns.len().div_ceil(64);
            let mut rows: Vec<(Vec<u64>, Vec<u8>)> = Vec::new();
            for i in (0..m).filter(|&i| unknown_count[i] > 0) {
                let mut bits = vec![0u64; words];
                let mut value = vec![0u8; size];
                for v in self.vars(i) {
                    match &known[v] {
                        Some(d) => xor_into(&mut value, d),
                        None => bits[col[v] / 64] ^= 1 << (col[v] % 64),
                    }
                }
                rows.push((bits, value));
            }
            let mut pivot_row = vec![usize::MAX; unknowns.len()];
            let mut next = 0;
            for c in 0..unknowns.len() {
                let (w, b) = (c / 64, 1u64 << (c % 64));
                let Some(p) = (next..rows.len()).find(|&r| rows[r].0[w] & b != 0) else {
                    continue;
                };
                rows.swap(next, p);
                let (head, tail) = rows.split_at_mut(next);
                let (pivot, tail) = tail.split_first_mut().expect("pivot row");
                for r in head.iter_mut().chain(tail.iter_mut()) {
                    if r.0[w] & b != 0 {
                        for x in w..words {
                            r.0[x] ^= pivot.0[x];
                        }
                        xor_into(&mut r.1, &pivot.1);
                    }
                }
                pivot_row[c] = next;
                next += 1;
            }
            for (c, &v) in unknowns.iter().enumerate() {
                if pivot_row[c] != usize::MAX {
                    known[v] = Some(rows[pivot_row[c]].1.clone());
                }
            }
            if known[..k].iter().any(Option::is_none) {
                return Err(FecError::NeedMore {
                    have: self.received.iter().flatten().count(),
                });
            }
            for v in k..n {
                if known[v].is_none() {
                    // repair not pinned by the residual system: rebuild it from the chain
                    let i = v - k;
                    let mut value = if i > 0 {
                        known[v - 1].clone().unwrap_or_else(|| vec![0; size])
                    } else {
                        vec![0; size]
                    };
                    for &j in &self.equations[i] {
                        xor_into(&mut value, known[j].as_ref().expect("sources solved"));
                    }
                    known[v] = Some(value);
                }
            }
        }

        // every parity equation must balance
        for i in 0..m {
            let mut acc = vec![0u8; size];
            for v in self.vars(i) {
                match &known[v] {
                    Some(d) => xor_into(&mut acc, d),
                    None => return Err(FecError::DecodeFailure(format!("symbol {v} unresolved"))),
                }
            }
            if acc.iter().any(|&b| b != 0) {
                return Err(FecError::DecodeFailure(format!(
                    "parity equation {i} does not balance"
                )));
            }
        }
        Ok(known
            .into_iter()
            .take(k)
            .map(|d| d.expect("sources solved"))
            .collect())
    }
}
