//! Carousel application scheduler.
//!
//! `B` blocks are spread over buffers of `N` hierarchical levels. Level 1 of
//! buffer `b` carries block `b`; level `n` carries block `(b + x_n) mod B`,
//! where `x_n` is the midpoint of the longest circular gap between the
//! offsets of all lower levels. A receiver that doubles its level count
//! halves its download time, whatever buffer it starts from.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CarouselError {
    #[error("a carousel needs at least one block and one level")]
    Empty,
    #[error("{levels} levels exceed {blocks} blocks")]
    TooManyLevels { levels: usize, blocks: usize },
    #[error("level count {requested} outside 1..={levels}")]
    LevelOutOfRange { requested: usize, levels: usize },
    #[error("{needed} distinct blocks requested from a carousel of {blocks}")]
    Unreachable { needed: usize, blocks: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CarouselPlan {
    blocks: usize,
    offsets: Vec<usize>,
}

pub fn build_plan(blocks: usize, levels: usize) -> Result<CarouselPlan, CarouselError> {
    if blocks == 0 || levels == 0 {
        return Err(CarouselError::Empty);
    }
    if levels > blocks {
        return Err(CarouselError::TooManyLevels { levels, blocks });
    }
    let mut offsets = vec![0usize];
    let mut sorted = vec![0usize];
    while offsets.len() < levels {
        // longest gap, lowest start on ties
        let mut best_start = 0;
        let mut best_len = 0;
        for (k, &start) in sorted.iter().enumerate() {
            let next = sorted.get(k + 1).copied().unwrap_or(blocks + sorted[0]);
            let len = next - start;
            if len > best_len {
                best_len = len;
                best_start = start;
            }
        }
        let x = (best_start + best_len / 2) % blocks;
        offsets.push(x);
        let pos = sorted.partition_point(|&o| o < x);
        sorted.insert(pos, x);
    }
    Ok(CarouselPlan { blocks, offsets })
}

impl CarouselPlan {
    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn levels(&self) -> usize {
        self.offsets.len()
    }

    /// Offsets `x_1..x_N`.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Block carried by 1-based `level` of `buffer`.
    pub fn block(&self, level: usize, buffer: usize) -> usize {
        (buffer % self.blocks + self.offsets[level - 1]) % self.blocks
    }

    fn check_levels(&self, levels: usize) -> Result<(), CarouselError> {
        if levels == 0 || levels > self.levels() {
            return Err(CarouselError::LevelOutOfRange {
                requested: levels,
                levels: self.levels(),
            });
        }
        Ok(())
    }

    /// Blocks obtained from `buffer` by a receiver of `levels` levels.
    pub fn blocks_for_buffer(
        &self,
        buffer: usize,
        levels: usize,
    ) -> Result<Vec<usize>, CarouselError> {
        self.check_levels(levels)?;
        Ok((1..=levels).map(|n| self.block(n, buffer)).collect())
    }

    /// Consecutive buffers, starting at `start_buffer`, a receiver of
    /// `levels` levels consumes before holding `needed` distinct blocks.
    pub fn completion_time(
        &self,
        levels: usize,
        start_buffer: usize,
        needed: usize,
    ) -> Result<usize, CarouselError> {
        self.check_levels(levels)?;
        if needed > self.blocks {
            return Err(CarouselError::Unreachable {
                needed,
                blocks: self.blocks,
            });
        }
        let mut seen = vec![false; self.blocks];
        let mut distinct = 0;
        let mut buffers = 0;
        while distinct < needed {
            let b = start_buffer + buffers;
            for n in 1..=levels {
                let block = self.block(n, b);
                if !seen[block] {
                    seen[block] = true;
                    distinct += 1;
                }
            }
            buffers += 1;
        }
        Ok(buffers)
    }

    /// Blocks still missing when the first buffer carrying an already
    /// received block arrives, for a receiver of `levels` levels starting at
    /// `start_buffer`.
    pub fn unsent_at_first_duplicate(
        &self,
        levels: usize,
        start_buffer: usize,
    ) -> Result<usize, CarouselError> {
        self.check_levels(levels)?;
        let mut seen = vec![false; self.blocks];
        let mut distinct = 0;
        for k in 0.. {
            let b = start_buffer + k;
            let blocks: Vec<usize> = (1..=levels).map(|n| self.block(n, b)).collect();
            if blocks.iter().any(|&x| seen[x]) {
                return Ok(self.blocks - distinct);
            }
            for x in blocks {
                seen[x] = true;
                distinct += 1;
            }
        }
        unreachable!()
    }
}
