//! Binary concatenated code decoded through a maximum segment matching over
//! `t`-block windows followed by outer list decoding.

use std::ops::Range;

use serde::Serialize;

use crate::codespec::{CodeSpec, CodecError};
use crate::seqmetrics::{concat_split_distance, concat_split_prefix_costs, edit_distance};

/// Window of `t` blocks from `start_block` matched to `y[span]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SegmentMatch {
    pub start_block: usize,
    pub span: Range<usize>,
    /// One message per block of the window.
    pub messages: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SegmentMatching {
    pub matches: Vec<SegmentMatch>,
}

impl SegmentMatching {
    pub fn len(&self) -> usize {
        self.matches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matches.is_empty()
    }

    pub fn is_monotone(&self, t: usize) -> bool {
        self.matches
            .windows(2)
            .all(|w| w[0].start_block + t <= w[1].start_block && w[0].span.end <= w[1].span.start)
    }
}

/// Distances strictly below `d′/2`, i.e. at most `⌈d′/2⌉ − 1`.
pub fn g_limit(code: &CodeSpec) -> usize {
    code.family.params.d_prime.div_ceil(2)
}

fn window_books(code: &CodeSpec, start: usize) -> Result<Vec<Vec<Vec<u16>>>, CodecError> {
    let t = code.family.params.t();
    if start + t > code.blocks() {
        return Err(CodecError::Window { start, blocks: code.blocks() });
    }
    Ok(code.family.codebooks[start..start + t].to_vec())
}

/// `Some((messages, distance))` when some concatenation of one codeword from
/// each of the `t` codes starting at `start` lies within `⌈d′/2⌉ − 1` edits
/// of `v`.
pub fn r12_g(code: &CodeSpec, start: usize, v: &[u16]) -> Result<Option<(Vec<usize>, usize)>, CodecError> {
    let books = window_books(code, start)?;
    let (distance, parts) = concat_split_distance(&books, v);
    Ok((distance < g_limit(code)).then(|| (parts.iter().map(|p| p.candidate).collect(), distance)))
}

/// `f[r][j]`: largest segment matching between `y[..j]` and the first `r`
/// windows (the first `r·t` blocks).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentTable {
    pub f: Vec<Vec<usize>>,
}

impl SegmentTable {
    pub fn last(&self) -> usize {
        *self.f.last().and_then(|r| r.last()).unwrap_or(&0)
    }
}

/// Maximum segment matching with windows aligned to multiples of `t`. The
/// backtrace prefers the `f[r][j-1]` carry, then `f[r-1][j]`, then the
/// smallest split point.
pub fn r12_segment_dp(code: &CodeSpec, y: &[u16]) -> (SegmentTable, SegmentMatching) {
    let t = code.family.params.t();
    let windows = code.blocks() / t;
    let limit = g_limit(code);
    let span = t * code.block_len();
    let width = y.len() + 1;
    // ends[r][j]: starts whose slice to j matches window r.
    let mut ends: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); width]; windows];
    for (r, per_end) in ends.iter_mut().enumerate() {
        let books = window_books(code, r * t).expect("aligned window");
        for start in 0..y.len() {
            if start + span.saturating_sub(limit - 1) > y.len() {
                break;
            }
            let tail = &y[start..(start + span + limit - 1).min(y.len())];
            for (len, &cost) in concat_split_prefix_costs(&books, tail).iter().enumerate() {
                if len > 0 && cost < limit {
                    per_end[start + len].push(start);
                }
            }
        }
    }
    let mut f = vec![vec![0usize; width]; windows + 1];
    for r in 1..=windows {
        for j in 1..width {
            let mut best = f[r][j - 1].max(f[r - 1][j]);
            for &start in &ends[r - 1][j] {
                best = best.max(f[r - 1][start] + 1);
            }
            f[r][j] = best;
        }
    }
    let mut matches = Vec::new();
    let (mut r, mut j) = (windows, y.len());
    while r > 0 && j > 0 && f[r][j] > 0 {
        if f[r][j] == f[r][j - 1] {
            j -= 1;
        } else if f[r][j] == f[r - 1][j] {
            r -= 1;
        } else {
            let start = *ends[r - 1][j]
                .iter()
                .filter(|&&s| f[r - 1][s] + 1 == f[r][j])
                .min()
                .expect("a qualifying split exists");
            let books = window_books(code, (r - 1) * t).expect("aligned window");
            let (_, parts) = concat_split_distance(&books, &y[start..j]);
            matches.push(SegmentMatch {
                start_block: (r - 1) * t,
                span: start..j,
                messages: parts.iter().map(|p| p.candidate).collect(),
            });
            r -= 1;
            j = start;
        }
    }
    matches.reverse();
    (SegmentTable { f }, SegmentMatching { matches })
}

/// Per-block symbols from a segment matching; unmatched blocks are zero.
pub fn reconstruct(code: &CodeSpec, matching: &SegmentMatching) -> Vec<u16> {
    let mut z = vec![0u16; code.blocks()];
    for m in &matching.matches {
        for (o, &msg) in m.messages.iter().enumerate() {
            z[m.start_block + o] = msg as u16;
        }
    }
    z
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct R12DecodeReport {
    pub message: Vec<u16>,
    pub segments: usize,
    pub unmatched_blocks: usize,
    pub list_size: usize,
    /// Edit distance from `y` to the chosen codeword.
    pub distance: usize,
}

pub fn r12_decode(code: &CodeSpec, y: &[u16]) -> Result<R12DecodeReport, CodecError> {
    let (_, matching) = r12_segment_dp(code, y);
    let z = reconstruct(code, &matching);
    let list = code.rs.list_decode(&code.outer_word(&z), code.rs.list_threshold())?;
    let mut best: Option<(usize, usize)> = None;
    for (idx, candidate) in list.iter().enumerate() {
        let d = edit_distance(&code.encode(candidate)?, y);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((idx, d));
        }
    }
    let (idx, distance) = best.ok_or_else(|| CodecError::DecodeFailure("outer list is empty".into()))?;
    Ok(R12DecodeReport {
        message: list[idx].clone(),
        segments: matching.len(),
        unmatched_blocks: code.blocks() - matching.len() * code.family.params.t(),
        list_size: list.len(),
        distance,
    })
}
