//! Longest common subsequence and insertion/deletion distance.
//!
//! Every routine is generic over the symbol type so the same code serves bit
//! strings, field symbols and the letters of the subspace lab.

use std::ops::Range;

/// Monotone list of matched `(index in x, index in y)` pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alignment {
    pub pairs: Vec<(usize, usize)>,
}

impl Alignment {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn is_monotone(&self) -> bool {
        self.pairs.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1)
    }
}

/// One block of a [`concat_split_distance`] solution: which candidate was
/// chosen and the slice of `v` it was charged against.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitPart {
    pub candidate: usize,
    pub span: Range<usize>,
}

pub fn lcs<T: PartialEq>(x: &[T], y: &[T]) -> usize {
    let mut prev = vec![0usize; y.len() + 1];
    let mut cur = vec![0usize; y.len() + 1];
    for xi in x {
        for (j, yj) in y.iter().enumerate() {
            cur[j + 1] = if xi == yj { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[y.len()]
}

/// Insertion/deletion distance, computed by its own DP rather than through
/// [`lcs`] so the two can be checked against each other.
pub fn edit_distance<T: PartialEq>(x: &[T], y: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=y.len()).collect();
    let mut cur = vec![0usize; y.len() + 1];
    for (i, xi) in x.iter().enumerate() {
        cur[0] = i + 1;
        for (j, yj) in y.iter().enumerate() {
            let skip = prev[j + 1].min(cur[j]) + 1;
            cur[j + 1] = if xi == yj { skip.min(prev[j]) } else { skip };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[y.len()]
}

/// Minimum distance from `pattern` to any substring of `text`, with the
/// leftmost-ending, then shortest, optimal substring.
pub fn substring_edit_distance<T: PartialEq>(pattern: &[T], text: &[T]) -> (usize, Range<usize>) {
    // Each cell holds (distance, start of the text substring it covers).
    let mut prev: Vec<(usize, usize)> = (0..=text.len()).map(|j| (0, j)).collect();
    let mut cur = prev.clone();
    for (i, p) in pattern.iter().enumerate() {
        cur[0] = (i + 1, 0);
        for (j, t) in text.iter().enumerate() {
            let mut best = prev[j + 1];
            best.0 += 1;
            let left = (cur[j].0 + 1, cur[j].1);
            if better(left, best) {
                best = left;
            }
            if p == t && better(prev[j], best) {
                best = prev[j];
            }
            cur[j + 1] = best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let (end, &(dist, start)) = prev
        .iter()
        .enumerate()
        .min_by_key(|(j, c)| (c.0, *j, std::cmp::Reverse(c.1)))
        .expect("row is never empty");
    (dist, start..end)
}

/// `Some(d)` when the substring distance `d` of `pattern` in `text` is below
/// `limit`, else `None`. Column sweep over `text` that stops each column at
/// the last pattern row still under the limit.
pub fn substring_distance_below<T: PartialEq>(pattern: &[T], text: &[T], limit: usize) -> Option<usize> {
    let m = pattern.len();
    if limit == 0 {
        return None;
    }
    if m < limit {
        let d = substring_edit_distance(pattern, text).0;
        return (d < limit).then_some(d);
    }
    // col[i]: distance of pattern[..i] to the best substring ending here,
    // exact while below `limit`.
    let mut col: Vec<usize> = (0..=m).collect();
    let mut next = vec![limit; m + 1];
    let mut last = limit - 1;
    let mut best = limit;
    for t in text {
        next[0] = 0;
        let top = (last + 1).min(m);
        for i in 1..=top {
            let mut v = next[i - 1] + 1;
            if i <= last {
                v = v.min(col[i] + 1);
            }
            if pattern[i - 1] == *t {
                v = v.min(col[i - 1]);
            }
            next[i] = v.min(limit);
        }
        let mut new_last = top;
        while new_last > 0 && next[new_last] >= limit {
            new_last -= 1;
        }
        for v in &mut next[top + 1..] {
            *v = limit;
        }
        std::mem::swap(&mut col, &mut next);
        last = new_last;
        if last == m {
            best = best.min(col[m]);
        }
    }
    (best < limit).then_some(best)
}

/// Prefers lower cost, then the later start.
#[inline]
fn better(a: (usize, usize), b: (usize, usize)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 > b.1)
}

/// Minimum over all splits `v = v_1 ∘ … ∘ v_t` and all choices of one
/// candidate per block of `Σ edit_distance(u_i, v_i)`.
///
/// Runs one multi-source distance sweep per block: the row for the empty
/// prefix of a candidate is seeded with the best cost of the previous blocks
/// at every cut point.
pub fn concat_split_distance<T: PartialEq>(
    blocks: &[Vec<Vec<T>>],
    v: &[T],
) -> (usize, Vec<SplitPart>) {
    let history = split_layers(blocks, v);
    let Some(last) = history.last() else {
        return (v.len(), Vec::new());
    };
    let total = last[v.len()].0;
    let mut parts = Vec::with_capacity(blocks.len());
    let mut end = v.len();
    for layer in history.iter().rev() {
        let (_, src, ci) = layer[end];
        parts.push(SplitPart { candidate: ci, span: src..end });
        end = src;
    }
    parts.reverse();
    (total, parts)
}

/// [`concat_split_distance`] cost of every prefix `v[..j]`.
pub fn concat_split_prefix_costs<T: PartialEq>(blocks: &[Vec<Vec<T>>], v: &[T]) -> Vec<usize> {
    match split_layers(blocks, v).pop() {
        Some(layer) => layer.into_iter().map(|c| c.0).collect(),
        None => (0..=v.len()).collect(),
    }
}

/// One layer per block; `layer[j] = (cost of covering v[..j] with the blocks
/// so far, start of the last block's slice, its candidate)`.
fn split_layers<T: PartialEq>(blocks: &[Vec<Vec<T>>], v: &[T]) -> Vec<Vec<(usize, usize, usize)>> {
    assert!(blocks.iter().all(|c| !c.is_empty()), "every block needs a candidate");
    const INF: usize = usize::MAX / 4;
    let width = v.len() + 1;
    let mut frontier: Vec<usize> = (0..width).map(|j| if j == 0 { 0 } else { INF }).collect();
    let mut history = Vec::with_capacity(blocks.len());
    for candidates in blocks {
        let mut next = vec![(INF, 0usize, 0usize); width];
        for (ci, u) in candidates.iter().enumerate() {
            let row = multi_source_sweep(u, v, &frontier);
            for (cell, &(cost, src)) in next.iter_mut().zip(&row) {
                if cost < cell.0 || (cost == cell.0 && src > cell.1) {
                    *cell = (cost, src, ci);
                }
            }
        }
        frontier = next.iter().map(|c| c.0).collect();
        history.push(next);
    }
    history
}

/// Distance sweep of `u` against `v` where the match may begin at any cut
/// `j` with entry cost `seed[j]`. Returns, for every end position, the best
/// `(cost, start)` with ties going to the later start.
pub(crate) fn multi_source_sweep<T: PartialEq>(u: &[T], v: &[T], seed: &[usize]) -> Vec<(usize, usize)> {
    let width = v.len() + 1;
    let mut prev: Vec<(usize, usize)> = Vec::with_capacity(width);
    for j in 0..width {
        let fresh = (seed[j], j);
        let cell = if j == 0 {
            fresh
        } else {
            let carried = (prev[j - 1].0 + 1, prev[j - 1].1);
            if better(fresh, carried) { fresh } else { carried }
        };
        prev.push(cell);
    }
    let mut cur = prev.clone();
    for ui in u {
        cur[0] = (prev[0].0 + 1, prev[0].1);
        for j in 1..width {
            let mut best = (prev[j].0 + 1, prev[j].1);
            let left = (cur[j - 1].0 + 1, cur[j - 1].1);
            if better(left, best) {
                best = left;
            }
            if *ui == v[j - 1] && better(prev[j - 1], best) {
                best = prev[j - 1];
            }
            cur[j] = best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev
}

/// An LCS-length alignment; among optimal ones, matches sit at the smallest
/// possible `y` indices.
pub fn extract_alignment<T: PartialEq>(x: &[T], y: &[T]) -> Alignment {
    let w = y.len() + 1;
    let mut table = vec![0usize; (x.len() + 1) * w];
    for i in 1..=x.len() {
        for j in 1..=y.len() {
            table[i * w + j] = if x[i - 1] == y[j - 1] {
                table[(i - 1) * w + j - 1] + 1
            } else {
                table[(i - 1) * w + j].max(table[i * w + j - 1])
            };
        }
    }
    let (mut i, mut j) = (x.len(), y.len());
    let mut pairs = Vec::with_capacity(table[i * w + j]);
    while i > 0 && j > 0 {
        let here = table[i * w + j];
        if table[i * w + j - 1] == here {
            j -= 1;
        } else if table[(i - 1) * w + j] == here {
            i -= 1;
        } else {
            pairs.push((i - 1, j - 1));
            i -= 1;
            j -= 1;
        }
    }
    pairs.reverse();
    Alignment { pairs }
}

#[cfg(test)]
pub(crate) mod oracle {
    //! Exhaustive reference implementations for tiny inputs.

    use super::*;

    pub fn lcs_by_subsets<T: PartialEq>(x: &[T], y: &[T]) -> usize {
        assert!(x.len() <= 16);
        (0u32..1 << x.len())
            .filter(|mask| {
                let mut pos = 0;
                for (i, xi) in x.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        match y[pos..].iter().position(|yj| yj == xi) {
                            Some(p) => pos += p + 1,
                            None => return false,
                        }
                    }
                }
                true
            })
            .map(|m| m.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn substring_distance<T: PartialEq>(pattern: &[T], text: &[T]) -> usize {
        (0..=text.len())
            .flat_map(|a| (a..=text.len()).map(move |b| (a, b)))
            .map(|(a, b)| pattern.len() + (b - a) - 2 * lcs_by_subsets(pattern, &text[a..b]))
            .min()
            .unwrap()
    }

    /// Minimum distance over the full product of candidate sets.
    pub fn product_distance<T: PartialEq + Clone>(blocks: &[Vec<Vec<T>>], v: &[T]) -> usize {
        let mut best = usize::MAX;
        let mut idx = vec![0usize; blocks.len()];
        loop {
            let word: Vec<T> = idx.iter().zip(blocks).flat_map(|(&i, c)| c[i].iter().cloned()).collect();
            best = best.min(word.len() + v.len() - 2 * lcs(&word, v));
            let mut k = 0;
            loop {
                if k == blocks.len() {
                    return best;
                }
                idx[k] += 1;
                if idx[k] < blocks[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }
}
