//! Binary concatenated code decoded through a maximum non-zero alignment
//! followed by outer unique decoding.

use std::ops::Range;

use serde::Serialize;

use crate::codespec::{CodeSpec, CodecError};
use crate::reed_solomon::OuterWord;

/// Block `block` matched to `y[span]` through the nonzero codeword `message`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockMatch {
    pub block: usize,
    pub span: Range<usize>,
    pub message: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct NonzeroAlignment {
    pub matches: Vec<BlockMatch>,
}

impl NonzeroAlignment {
    pub fn len(&self) -> usize {
        self.matches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matches.is_empty()
    }

    /// Blocks and intervals both strictly increasing and disjoint.
    pub fn is_monotone(&self) -> bool {
        self.matches.windows(2).all(|w| w[0].block < w[1].block && w[0].span.end <= w[1].span.start)
    }
}

/// Matching radius `⌊d′/2⌋`.
pub fn g_radius(code: &CodeSpec) -> usize {
    code.family.params.d_prime / 2
}

/// `Some((message, distance))` for the lexicographically smallest nonzero
/// codeword of code `i` within `⌊d′/2⌋` edits of `v`.
pub fn r13_g(code: &CodeSpec, i: usize, v: &[u16]) -> Option<(usize, usize)> {
    let r = g_radius(code);
    let book = &code.family.codebooks[i];
    (1..book.len())
        .filter_map(|m| {
            let d = crate::seqmetrics::edit_distance(&book[m], v);
            (d <= r).then_some((m, d))
        })
        .min_by(|a, b| book[a.0].cmp(&book[b.0]))
}

/// `g` for every window that can possibly qualify: `hits[i][start]` lists
/// `(end, message)` for code `i`.
fn window_hits(code: &CodeSpec, y: &[u16]) -> Vec<Vec<Vec<(usize, usize)>>> {
    let r = g_radius(code);
    let n_prime = code.block_len();
    let lo = n_prime.saturating_sub(r);
    let hi = n_prime + r;
    let mut hits = vec![vec![Vec::new(); y.len() + 1]; code.blocks()];
    let mut row = Vec::new();
    let mut next = Vec::new();
    for (i, book) in code.family.codebooks.iter().enumerate() {
        // Nonzero messages in codeword order, so the first hit is the smallest.
        let mut order: Vec<usize> = (1..book.len()).collect();
        order.sort_by(|&a, &b| book[a].cmp(&book[b]));
        for start in 0..=y.len() {
            if start + lo > y.len() {
                break;
            }
            let tail = &y[start..(start + hi).min(y.len())];
            let mut found: Vec<Option<usize>> = vec![None; tail.len() + 1];
            for &m in &order {
                edit_row(&book[m], tail, &mut row, &mut next);
                for (len, &d) in row.iter().enumerate() {
                    if d <= r && found[len].is_none() {
                        found[len] = Some(m);
                    }
                }
            }
            hits[i][start] = found
                .iter()
                .enumerate()
                .filter_map(|(len, m)| m.map(|m| (start + len, m)))
                .collect();
        }
    }
    hits
}

/// Leaves in `row[j]` the edit distance between `u` and `v[..j]` for every `j`.
fn edit_row(u: &[u16], v: &[u16], row: &mut Vec<usize>, next: &mut Vec<usize>) {
    row.clear();
    row.extend(0..=v.len());
    next.resize(v.len() + 1, 0);
    for (i, a) in u.iter().enumerate() {
        next[0] = i + 1;
        for (j, b) in v.iter().enumerate() {
            let skip = row[j + 1].min(next[j]) + 1;
            next[j + 1] = if a == b { skip.min(row[j]) } else { skip };
        }
        std::mem::swap(row, next);
    }
}

/// `f[i][j]`: size of the largest non-zero alignment between `y[..j]` and the
/// first `i` blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlignmentTable {
    pub f: Vec<Vec<usize>>,
}

impl AlignmentTable {
    pub fn last(&self) -> usize {
        *self.f.last().and_then(|r| r.last()).unwrap_or(&0)
    }
}

/// Maximum non-zero alignment. The backtrace prefers the `f[i][j-1]` carry,
/// then the `f[i-1][j]` carry, then the smallest split point.
pub fn r13_alignment_dp(code: &CodeSpec, y: &[u16]) -> (AlignmentTable, NonzeroAlignment) {
    let n = code.blocks();
    let width = y.len() + 1;
    let hits = window_hits(code, y);
    // ends[i][j]: starts whose window to j qualifies for code i, with the witness.
    let mut ends: Vec<Vec<Vec<(usize, usize)>>> = vec![vec![Vec::new(); width]; n];
    for (i, per_start) in hits.iter().enumerate() {
        for (start, list) in per_start.iter().enumerate() {
            for &(end, m) in list {
                if end > start {
                    ends[i][end].push((start, m));
                }
            }
        }
    }
    let mut f = vec![vec![0usize; width]; n + 1];
    for i in 1..=n {
        for j in 1..width {
            let mut best = f[i][j - 1].max(f[i - 1][j]);
            for &(start, _) in &ends[i - 1][j] {
                best = best.max(f[i - 1][start] + 1);
            }
            f[i][j] = best;
        }
    }
    let mut matches = Vec::new();
    let (mut i, mut j) = (n, y.len());
    while i > 0 && j > 0 && f[i][j] > 0 {
        if f[i][j] == f[i][j - 1] {
            j -= 1;
        } else if f[i][j] == f[i - 1][j] {
            i -= 1;
        } else {
            let &(start, m) = ends[i - 1][j]
                .iter()
                .filter(|&&(s, _)| f[i - 1][s] + 1 == f[i][j])
                .min_by_key(|&&(s, _)| s)
                .expect("a qualifying split exists");
            matches.push(BlockMatch { block: i - 1, span: start..j, message: m });
            i -= 1;
            j = start;
        }
    }
    matches.reverse();
    (AlignmentTable { f }, NonzeroAlignment { matches })
}

/// Per-block symbols from an alignment; unmatched blocks are zero.
pub fn reconstruct(code: &CodeSpec, alignment: &NonzeroAlignment) -> Vec<u16> {
    let mut z = vec![0u16; code.blocks()];
    for m in &alignment.matches {
        z[m.block] = m.message as u16;
    }
    z
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct R13DecodeReport {
    pub message: Vec<u16>,
    pub f_final: usize,
    pub matches: usize,
    /// Recovered blocks differing from the truth, when it is supplied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hamming_to_truth: Option<usize>,
}

pub fn r13_decode(code: &CodeSpec, y: &[u16]) -> Result<R13DecodeReport, CodecError> {
    let (table, alignment) = r13_alignment_dp(code, y);
    let z = reconstruct(code, &alignment);
    let word = OuterWord::new(z[..code.rs.n()].to_vec());
    match code.rs.unique_decode(&word)? {
        Some(message) => Ok(R13DecodeReport {
            message,
            f_final: table.last(),
            matches: alignment.len(),
            hamming_to_truth: None,
        }),
        None => Err(CodecError::DecodeFailure("outer unique decoding found no codeword in range".into())),
    }
}
