//! Replayable insertion/deletion channel and per-block trace accounting.

use std::ops::Range;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChannelError {
    #[error("step {step}: position {pos} is out of range for length {len}")]
    InvalidPosition { step: usize, pos: usize, len: usize },
    #[error("unsatisfiable channel configuration: {0}")]
    Unsatisfiable(String),
}

/// One edit; positions index the string as it is when the edit is applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op")]
pub enum EditOp {
    #[serde(rename = "D")]
    Delete { pos: usize },
    #[serde(rename = "I")]
    Insert { pos: usize, sym: u16 },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditTrace {
    pub ops: Vec<EditOp>,
}

impl EditTrace {
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn deletions(&self) -> usize {
        self.ops.iter().filter(|op| matches!(op, EditOp::Delete { .. })).count()
    }

    pub fn insertions(&self) -> usize {
        self.len() - self.deletions()
    }
}

pub fn apply(source: &[u16], trace: &EditTrace) -> Result<Vec<u16>, ChannelError> {
    let mut out = source.to_vec();
    for (step, op) in trace.ops.iter().enumerate() {
        match *op {
            EditOp::Delete { pos } => {
                if pos >= out.len() {
                    return Err(ChannelError::InvalidPosition { step, pos, len: out.len() });
                }
                out.remove(pos);
            }
            EditOp::Insert { pos, sym } => {
                if pos > out.len() {
                    return Err(ChannelError::InvalidPosition { step, pos, len: out.len() });
                }
                out.insert(pos, sym);
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pattern {
    Uniform,
    /// Contiguous deletions then contiguous insertions at one point.
    Burst,
    /// Edits confined to a few blocks of `block_len` symbols, capped per block.
    PerBlockCapped,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelConfig {
    pub pattern: Pattern,
    pub budget: usize,
    /// Share of the budget spent on insertions (rounded to nearest).
    pub insert_fraction: f64,
    pub rng_seed: u64,
    /// Inserted symbols are drawn from `0..2^alphabet_bits`.
    pub alphabet_bits: u32,
    /// Burst start; drawn at random when absent.
    pub burst_position: Option<usize>,
    pub block_len: Option<usize>,
    pub per_block_cap: Option<usize>,
    pub blocks_affected_cap: Option<usize>,
}

impl ChannelConfig {
    pub fn uniform(budget: usize, insert_fraction: f64, alphabet_bits: u32, rng_seed: u64) -> Self {
        Self {
            pattern: Pattern::Uniform,
            budget,
            insert_fraction,
            rng_seed,
            alphabet_bits,
            burst_position: None,
            block_len: None,
            per_block_cap: None,
            blocks_affected_cap: None,
        }
    }

    pub fn burst(budget: usize, insert_fraction: f64, alphabet_bits: u32, rng_seed: u64) -> Self {
        Self { pattern: Pattern::Burst, ..Self::uniform(budget, insert_fraction, alphabet_bits, rng_seed) }
    }

    pub fn per_block_capped(
        budget: usize,
        insert_fraction: f64,
        alphabet_bits: u32,
        rng_seed: u64,
        block_len: usize,
        per_block_cap: usize,
        blocks_affected_cap: usize,
    ) -> Self {
        Self {
            pattern: Pattern::PerBlockCapped,
            block_len: Some(block_len),
            per_block_cap: Some(per_block_cap),
            blocks_affected_cap: Some(blocks_affected_cap),
            ..Self::uniform(budget, insert_fraction, alphabet_bits, rng_seed)
        }
    }

    fn split(&self) -> Result<(usize, usize), ChannelError> {
        if !(0.0..=1.0).contains(&self.insert_fraction) {
            return Err(ChannelError::Unsatisfiable(format!("insert fraction {} outside [0, 1]", self.insert_fraction)));
        }
        let ins = (self.budget as f64 * self.insert_fraction).round() as usize;
        Ok((self.budget - ins, ins))
    }
}

/// Runs the channel and returns the output together with the trace that
/// produced it.
pub fn corrupt(source: &[u16], config: &ChannelConfig) -> Result<(Vec<u16>, EditTrace), ChannelError> {
    let (dels, ins) = config.split()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let symbol_count = 1u32 << config.alphabet_bits.min(16);
    let symbol = |rng: &mut ChaCha8Rng| rng.gen_range(0..symbol_count) as u16;
    let mut ops = Vec::with_capacity(config.budget);
    match config.pattern {
        Pattern::Uniform => {
            if dels > source.len() + ins {
                return Err(ChannelError::Unsatisfiable(format!("{dels} deletions exceed the available symbols")));
            }
            let mut kinds: Vec<bool> = std::iter::repeat_n(true, ins).chain(std::iter::repeat_n(false, dels)).collect();
            kinds.shuffle(&mut rng);
            // Keep every deletion possible by moving inserts forward when the
            // string would otherwise run dry.
            let mut len = source.len();
            let mut pending: Vec<bool> = kinds.into_iter().rev().collect();
            while let Some(insert) = pending.pop() {
                let insert = if !insert && len == 0 {
                    let idx = pending.iter().rposition(|&k| k).expect("an insertion remains");
                    pending[idx] = false;
                    true
                } else {
                    insert
                };
                if insert {
                    let pos = rng.gen_range(0..=len);
                    ops.push(EditOp::Insert { pos, sym: symbol(&mut rng) });
                    len += 1;
                } else {
                    ops.push(EditOp::Delete { pos: rng.gen_range(0..len) });
                    len -= 1;
                }
            }
        }
        Pattern::Burst => {
            if dels > source.len() {
                return Err(ChannelError::Unsatisfiable(format!("burst of {dels} deletions exceeds length {}", source.len())));
            }
            let p = match config.burst_position {
                Some(p) if p + dels <= source.len() => p,
                Some(p) => return Err(ChannelError::Unsatisfiable(format!("burst at {p} runs past the end"))),
                None => rng.gen_range(0..=source.len() - dels),
            };
            ops.extend(std::iter::repeat_n(EditOp::Delete { pos: p }, dels));
            for i in 0..ins {
                ops.push(EditOp::Insert { pos: p + i, sym: symbol(&mut rng) });
            }
        }
        Pattern::PerBlockCapped => {
            let (Some(block_len), Some(cap), Some(max_blocks)) =
                (config.block_len, config.per_block_cap, config.blocks_affected_cap)
            else {
                return Err(ChannelError::Unsatisfiable("per-block pattern needs block length and both caps".into()));
            };
            if block_len == 0 || !source.len().is_multiple_of(block_len) {
                return Err(ChannelError::Unsatisfiable("source is not a whole number of blocks".into()));
            }
            let blocks = source.len() / block_len;
            let usable = max_blocks.min(blocks);
            if config.budget > cap * usable {
                return Err(ChannelError::Unsatisfiable(format!(
                    "budget {} exceeds {cap} edits on each of {usable} blocks",
                    config.budget
                )));
            }
            // Each touched block keeps at least one of its symbols.
            if dels > usable * cap.min(block_len - 1) {
                return Err(ChannelError::Unsatisfiable("too many deletions for the touched blocks".into()));
            }
            let mut chosen: Vec<usize> = rand::seq::index::sample(&mut rng, blocks, usable).into_vec();
            chosen.sort_unstable();
            let (del_share, ins_share) = distribute(dels, ins, usable, cap, block_len - 1, &mut rng);
            // Right to left, so edits never shift the blocks still to come.
            for (slot, &b) in chosen.iter().enumerate().rev() {
                let start = b * block_len;
                let mut kinds: Vec<bool> = std::iter::repeat_n(true, ins_share[slot])
                    .chain(std::iter::repeat_n(false, del_share[slot]))
                    .collect();
                kinds.shuffle(&mut rng);
                let mut len = block_len;
                for insert in kinds {
                    if insert {
                        // Offset 0 would sit on the left boundary and count
                        // against the previous block.
                        let lo = usize::from(b > 0);
                        let pos = start + rng.gen_range(lo..=len);
                        ops.push(EditOp::Insert { pos, sym: symbol(&mut rng) });
                        len += 1;
                    } else {
                        ops.push(EditOp::Delete { pos: start + rng.gen_range(0..len) });
                        len -= 1;
                    }
                }
            }
        }
    }
    let trace = EditTrace { ops };
    let out = apply(source, &trace)?;
    Ok((out, trace))
}

/// Spreads `dels` deletions and `ins` insertions over `slots` blocks with at
/// most `cap` edits and `max_dels` deletions each.
fn distribute(dels: usize, ins: usize, slots: usize, cap: usize, max_dels: usize, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
    let mut d = vec![0usize; slots];
    let mut i = vec![0usize; slots];
    for _ in 0..dels {
        let open: Vec<usize> = (0..slots).filter(|&s| d[s] < max_dels.min(cap) && d[s] + i[s] < cap).collect();
        d[*open.choose(rng).expect("checked capacity")] += 1;
    }
    for _ in 0..ins {
        let open: Vec<usize> = (0..slots).filter(|&s| d[s] + i[s] < cap).collect();
        i[*open.choose(rng).expect("checked capacity")] += 1;
    }
    (d, i)
}

/// Per-block edit counts and the segmentation of the output into `y^i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Attribution {
    pub counts: Vec<usize>,
    /// Range of the output string holding the survivors of block `i` and the
    /// insertions charged to it.
    pub segments: Vec<Range<usize>>,
}

/// Charges every edit of `trace` to one of `n` blocks of `block_len` source
/// symbols. A deletion goes to the owner of the deleted symbol; an insertion
/// goes to the owner of its left neighbour (the first block at position 0).
pub fn attribute_to_blocks(trace: &EditTrace, block_len: usize, n: usize) -> Result<Attribution, ChannelError> {
    let mut owner: Vec<usize> = (0..n * block_len).map(|p| p / block_len.max(1)).collect();
    let mut counts = vec![0usize; n];
    for (step, op) in trace.ops.iter().enumerate() {
        match *op {
            EditOp::Delete { pos } => {
                if pos >= owner.len() {
                    return Err(ChannelError::InvalidPosition { step, pos, len: owner.len() });
                }
                counts[owner.remove(pos)] += 1;
            }
            EditOp::Insert { pos, .. } => {
                if pos > owner.len() {
                    return Err(ChannelError::InvalidPosition { step, pos, len: owner.len() });
                }
                let b = if pos == 0 { 0 } else { owner[pos - 1] };
                if n > 0 {
                    counts[b] += 1;
                }
                owner.insert(pos, b);
            }
        }
    }
    let mut segments = Vec::with_capacity(n);
    let mut cursor = 0;
    for b in 0..n {
        let start = cursor;
        while cursor < owner.len() && owner[cursor] == b {
            cursor += 1;
        }
        segments.push(start..cursor);
    }
    Ok(Attribution { counts, segments })
}

/// `budget` uniformly placed edits, half insertions on average.
pub fn random_trace<R: Rng + ?Sized>(source_len: usize, budget: usize, alphabet_bits: u32, rng: &mut R) -> EditTrace {
    let mut len = source_len;
    let ops = (0..budget)
        .map(|_| {
            if len > 0 && rng.gen_bool(0.5) {
                len -= 1;
                EditOp::Delete { pos: rng.gen_range(0..=len) }
            } else {
                len += 1;
                EditOp::Insert { pos: rng.gen_range(0..len), sym: rng.gen_range(0..1u32 << alphabet_bits) as u16 }
            }
        })
        .collect();
    EditTrace { ops }
}
