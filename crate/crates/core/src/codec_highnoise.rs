//! Concatenated code over a small-alphabet inner family: partition DP,
//! outer list decoding and the distance probe.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::codespec::{CodeSpec, CodecError};
use crate::seqmetrics::{edit_distance, multi_source_sweep};

const INF: usize = usize::MAX / 4;

/// `f[i][j]`: best cost of splitting `y[..j]` into `i` pieces matched to the
/// first `i` inner codes. `back[i][j]` holds the split point and message.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionTable {
    pub f: Vec<Vec<usize>>,
    pub back: Vec<Vec<(usize, usize)>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockChoice {
    pub span: Range<usize>,
    pub message: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub table: PartitionTable,
    pub blocks: Vec<BlockChoice>,
    /// `f[n][|y|]`.
    pub delta: usize,
}

impl Partition {
    pub fn symbols(&self) -> Vec<u16> {
        self.blocks.iter().map(|b| b.message as u16).collect()
    }
}

/// Messages of code `i` ordered by their codewords.
fn lex_order(code: &CodeSpec, i: usize) -> Vec<usize> {
    let book = &code.family.codebooks[i];
    let mut order: Vec<usize> = (0..book.len()).collect();
    order.sort_by(|&a, &b| book[a].cmp(&book[b]));
    order
}

/// Optimal partition of `y` against the inner codes. Ties go to the latest
/// split point, then the lexicographically smallest codeword.
pub fn hn_partition_dp(code: &CodeSpec, y: &[u16]) -> Partition {
    let n = code.blocks();
    let width = y.len() + 1;
    let mut f = vec![vec![INF; width]; n + 1];
    let mut back = vec![vec![(0usize, 0usize); width]; n + 1];
    f[0][0] = 0;
    for i in 1..=n {
        let mut best = vec![(INF, 0usize, 0usize); width];
        for m in lex_order(code, i - 1) {
            let sweep = multi_source_sweep(code.family.codeword(i - 1, m), y, &f[i - 1]);
            for (cell, &(cost, src)) in best.iter_mut().zip(&sweep) {
                if cost < cell.0 || (cost == cell.0 && src > cell.1) {
                    *cell = (cost, src, m);
                }
            }
        }
        for (j, &(cost, src, m)) in best.iter().enumerate() {
            f[i][j] = cost;
            back[i][j] = (src, m);
        }
    }
    let mut blocks = Vec::with_capacity(n);
    let mut end = y.len();
    for i in (1..=n).rev() {
        let (src, m) = back[i][end];
        blocks.push(BlockChoice { span: src..end, message: m });
        end = src;
    }
    blocks.reverse();
    let delta = f[n][y.len()];
    Partition { table: PartitionTable { f, back }, blocks, delta }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HnDecodeReport {
    pub message: Vec<u16>,
    pub delta: usize,
    pub list_size: usize,
    pub chosen_index: usize,
    /// Edit distance from `y` to the chosen codeword.
    pub distance: usize,
}

/// Largest edit distance (exclusive) the final selection accepts: `(1−6γ)N`.
pub fn selection_threshold(code: &CodeSpec) -> f64 {
    (1.0 - 6.0 * code.family.params.gamma.value()) * code.word_len() as f64
}

/// Outer agreement handed to the list decoder: `√γ·n`, raised to the
/// decoder's own floor.
pub fn list_agreement(code: &CodeSpec) -> usize {
    let n = code.rs.n();
    let target = (code.family.params.gamma.value().sqrt() * n as f64 - 1e-9).ceil() as usize;
    target.max(code.rs.list_threshold())
}

pub fn hn_decode(code: &CodeSpec, y: &[u16]) -> Result<HnDecodeReport, CodecError> {
    let partition = hn_partition_dp(code, y);
    let word = code.outer_word(&partition.symbols());
    let list = code.rs.list_decode(&word, list_agreement(code))?;
    let threshold = selection_threshold(code);
    let mut hits = Vec::new();
    for (idx, candidate) in list.iter().enumerate() {
        let distance = edit_distance(&code.encode(candidate)?, y);
        if (distance as f64) < threshold {
            hits.push((idx, distance));
        }
    }
    match hits.as_slice() {
        [] => Err(CodecError::DecodeFailure(format!(
            "none of {} list entries lies within {threshold} edits",
            list.len()
        ))),
        &[(idx, distance)] => Ok(HnDecodeReport {
            message: list[idx].clone(),
            delta: partition.delta,
            list_size: list.len(),
            chosen_index: idx,
            distance,
        }),
        many => Err(CodecError::Ambiguous { count: many.len(), threshold }),
    }
}

/// Fraction β of outer positions where the partition recovers the true symbol.
pub fn hn_symbol_recovery_rate(code: &CodeSpec, y: &[u16], truth: &[u16]) -> Result<f64, CodecError> {
    let expected = code.outer_encode(truth)?;
    let got = hn_partition_dp(code, y).symbols();
    let n = code.rs.n();
    Ok(expected.iter().zip(&got).take(n).filter(|(a, b)| a == b).count() as f64 / n as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceProbe {
    pub pairs: usize,
    pub min_distance: usize,
    /// `2(1−6γ)N`; every sampled distance must exceed it.
    pub bound: f64,
    pub violation: Option<(Vec<u16>, Vec<u16>, usize)>,
}

/// Samples distinct message pairs; every other pair differs in a single
/// outer message symbol.
pub fn hn_pairwise_distance_probe(code: &CodeSpec, trials: usize, rng_seed: u64) -> Result<DistanceProbe, CodecError> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let q = code.rs.field().order();
    let k = code.message_len();
    let bound = 2.0 * selection_threshold(code);
    let mut probe = DistanceProbe { pairs: 0, min_distance: usize::MAX, bound, violation: None };
    while probe.pairs < trials {
        let a: Vec<u16> = (0..k).map(|_| rng.gen_range(0..q) as u16).collect();
        let b: Vec<u16> = if probe.pairs % 2 == 1 {
            let mut b = a.clone();
            let pos = rng.gen_range(0..k);
            b[pos] = (b[pos] as usize + rng.gen_range(1..q)) as u16 % q as u16;
            b
        } else {
            (0..k).map(|_| rng.gen_range(0..q) as u16).collect()
        };
        if a == b {
            continue;
        }
        probe.pairs += 1;
        let d = edit_distance(&code.encode(&a)?, &code.encode(&b)?);
        if d < probe.min_distance {
            probe.min_distance = d;
        }
        if d as f64 <= bound && probe.violation.is_none() {
            probe.violation = Some((a, b, d));
        }
    }
    Ok(probe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{apply, random_trace};
    use crate::codespec::fixtures::random_code;
    use crate::field::FieldSpec;
    use crate::inner_family::{sample_family, BitSource, InnerParams, Variant};
    use crate::reed_solomon::RsCode;
    use proptest::prelude::{prop, proptest, prop_assert, prop_assert_eq, ProptestConfig};

    fn tiny_code(seed: u64) -> CodeSpec {
        let params = InnerParams::hn(3, 4, 2, 4, "1/4".parse().unwrap()).unwrap();
        let family = (seed..).find_map(|s| sample_family(&params, &BitSource::Uniform(s)).ok()).unwrap();
        let rs = RsCode::new(FieldSpec::standard(2).unwrap(), 3, 1).unwrap();
        CodeSpec::new(rs, family, 0).unwrap()
    }

    /// Every composition of `y` into `n` pieces, each charged its nearest codeword.
    fn partition_oracle(code: &CodeSpec, y: &[u16]) -> usize {
        fn go(code: &CodeSpec, y: &[u16], i: usize) -> usize {
            if i == code.blocks() {
                return if y.is_empty() { 0 } else { INF };
            }
            (0..=y.len())
                .map(|cut| {
                    let local = code.family.codebooks[i].iter().map(|x| edit_distance(x, &y[..cut])).min().unwrap();
                    local + go(code, &y[cut..], i + 1)
                })
                .min()
                .unwrap()
        }
        go(code, y, 0)
    }

    #[test]
    fn codewords_and_empty_input() {
        let code = random_code(Variant::Hn, 6, 2, 8, 0, 1);
        let msg = [3, 9];
        let word = code.encode(&msg).unwrap();
        let p = hn_partition_dp(&code, &word);
        assert_eq!(p.delta, 0);
        assert_eq!(p.symbols(), code.outer_encode(&msg).unwrap());
        let empty = hn_partition_dp(&code, &[]);
        assert_eq!(empty.delta, code.word_len());
        assert!(empty.blocks.iter().all(|b| b.span.is_empty()));
    }

    #[test]
    fn agreement_and_threshold() {
        let code = random_code(Variant::Hn, 16, 4, 8, 0, 1);
        assert_eq!(list_agreement(&code), 8);
        assert!(selection_threshold(&code) < 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(120))]

        #[test]
        fn dp_matches_oracle(seed in 0u64..1000, y in prop::collection::vec(0u16..4, 0..=14)) {
            let code = tiny_code(seed);
            prop_assert_eq!(hn_partition_dp(&code, &y).delta, partition_oracle(&code, &y));
        }

        #[test]
        fn delta_bounded_by_edits(seed in 0u64..1000, budget in 0usize..20) {
            let code = random_code(Variant::Hn, 5, 2, 6, 0, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let msg: Vec<u16> = (0..2).map(|_| rng.gen_range(0..16)).collect();
            let word = code.encode(&msg).unwrap();
            let trace = random_trace(word.len(), budget, 8, &mut rng);
            let y = apply(&word, &trace).unwrap();
            prop_assert!(hn_partition_dp(&code, &y).delta <= budget);
        }

        #[test]
        fn appending_costs_at_most_one(seed in 0u64..1000, y in prop::collection::vec(0u16..4, 0..=12), s in 0u16..4) {
            let code = tiny_code(seed);
            let base = hn_partition_dp(&code, &y);
            let mut longer = y.clone();
            longer.push(s);
            let ext = hn_partition_dp(&code, &longer);
            for i in 1..=code.blocks() {
                prop_assert!(ext.table.f[i][longer.len()] <= base.table.f[i][y.len()] + 1);
            }
        }
    }
}
