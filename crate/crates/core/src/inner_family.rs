//! The `n` position-dependent inner linear codes: sampling from a bit source,
//! the three local-property checkers, and the derandomized seed search.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::field::{FieldSpec, Gf2m};
use crate::linalg::Matrix;
use crate::seqmetrics::{lcs, substring_distance_below};
use crate::smallbias::{BiasSpec, Generator, Seed, SmallBiasError};

/// Exhaustive P-HN checks run when `n · |codebook|` is at most this.
pub const HN_EXHAUSTIVE_LIMIT: usize = 1 << 12;
/// Exhaustive P-12 checks run when `2^((2t+1)k′)` is at most this.
pub const R12_EXHAUSTIVE_LIMIT: u64 = 1 << 20;
const SEARCH_CHUNK: u64 = 1 << 12;

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error("inconsistent parameters: {0}")]
    Params(String),
    #[error("generator matrix of code {code} is rank deficient")]
    RankDeficient { code: usize },
    #[error("bit source yields {got} bits, sampling needs {needed}")]
    ShortSource { needed: usize, got: usize },
    #[error(transparent)]
    SmallBias(#[from] SmallBiasError),
    #[error("property checks need at least one trial")]
    NoTrials,
    #[error("{tried} seeds tried without a verified family; best seed {} has {best_violations} violations", best.as_ref().map_or("none".to_string(), |b| b.to_hex()))]
    Exhausted { tried: u64, best: Option<Seed>, best_violations: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Hn,
    R13,
    R12,
}

impl Variant {
    pub fn property(&self) -> Property {
        match self {
            Variant::Hn => Property::Hn,
            Variant::R13 => Property::R13,
            Variant::R12 => Property::R12,
        }
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hn" => Ok(Variant::Hn),
            "r13" => Ok(Variant::R13),
            "r12" => Ok(Variant::R12),
            other => Err(format!("unknown variant {other:?} (expected hn, r13 or r12)")),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Hn => "hn",
            Variant::R13 => "r13",
            Variant::R12 => "r12",
        })
    }
}

/// A noise parameter kept in the exact textual form it was given in
/// (`"1/4"` or `"0.25"`), so descriptor files round-trip byte for byte.
#[derive(Clone, Debug, PartialEq)]
pub struct Gamma {
    text: String,
    value: f64,
}

impl Gamma {
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    /// `⌊value · len⌋`, guarded against representation error.
    pub fn floor_times(&self, len: usize) -> usize {
        (self.value * len as f64 + 1e-9).floor() as usize
    }
}

impl FromStr for Gamma {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let value = match s.split_once('/') {
            Some((a, b)) => {
                let a: f64 = a.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
                let b: f64 = b.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
                a / b
            }
            None => s.trim().parse().map_err(|_| format!("bad number {s:?}"))?,
        };
        if !(0.0..1.0).contains(&value) {
            return Err(format!("gamma {s:?} must lie in [0, 1)"));
        }
        Ok(Self { text: s.to_string(), value })
    }
}

impl Serialize for Gamma {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.text)
    }
}

impl<'de> Deserialize<'de> for Gamma {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Shape of one inner family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerParams {
    pub variant: Variant,
    /// Number of inner codes.
    pub n: usize,
    /// Messages per code: the outer alphabet for HN, `2^k′` otherwise.
    pub codebook_size: usize,
    /// Inner alphabet is GF(2^q_in_bits); 1 for the binary variants.
    pub q_in_bits: u32,
    pub k_prime: usize,
    pub n_prime: usize,
    pub d_prime: usize,
    pub gamma: Gamma,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub s: Option<usize>,
}

impl InnerParams {
    /// Inner alphabet bits `⌈log2((e/γ)^3)⌉`.
    pub fn default_hn_alphabet_bits(gamma: &Gamma) -> u32 {
        (3.0 * (std::f64::consts::E / gamma.value()).log2()).ceil() as u32
    }

    /// HN family; `k′` is the number of inner digits per outer symbol.
    pub fn hn(n: usize, outer_alphabet: usize, q_in_bits: u32, n_prime: usize, gamma: Gamma) -> Result<Self, FamilyError> {
        let q_in = 1usize << q_in_bits;
        let mut k_prime = 1;
        while q_in.pow(k_prime as u32) < outer_alphabet {
            k_prime += 1;
        }
        let p = Self {
            variant: Variant::Hn,
            n,
            codebook_size: outer_alphabet,
            q_in_bits,
            k_prime,
            n_prime,
            d_prime: 0,
            gamma,
            t: None,
            s: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn r13(n: usize, k_prime: usize, n_prime: usize, d_prime: usize) -> Result<Self, FamilyError> {
        let p = Self {
            variant: Variant::R13,
            n,
            codebook_size: 1 << k_prime,
            q_in_bits: 1,
            k_prime,
            n_prime,
            d_prime,
            gamma: binary_gamma(k_prime, n_prime, 3),
            t: None,
            s: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn r12(n: usize, k_prime: usize, n_prime: usize, d_prime: usize, t: usize, s: usize) -> Result<Self, FamilyError> {
        let p = Self {
            variant: Variant::R12,
            n,
            codebook_size: 1 << k_prime,
            q_in_bits: 1,
            k_prime,
            n_prime,
            d_prime,
            gamma: binary_gamma(k_prime, n_prime, 2),
            t: Some(t),
            s: Some(s),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), FamilyError> {
        let bad = |m: &str| Err(FamilyError::Params(m.to_string()));
        if self.n == 0 || self.k_prime == 0 || self.n_prime == 0 {
            return bad("n, k′ and n′ must be positive");
        }
        if self.k_prime > self.n_prime {
            return bad("k′ exceeds n′");
        }
        if self.q_in_bits == 0 || self.q_in_bits > crate::field::MAX_DEGREE {
            return bad("inner alphabet must be GF(2^b) with 1 <= b <= 16");
        }
        let capacity = (self.q_in() as u128).checked_pow(self.k_prime as u32);
        if capacity.is_none_or(|c| c < self.codebook_size as u128) || self.codebook_size < 2 {
            return bad("codebook does not fit the inner message space");
        }
        if self.variant != Variant::Hn && self.q_in_bits != 1 {
            return bad("binary variants use a binary inner alphabet");
        }
        if self.variant == Variant::R12 {
            match (self.t, self.s) {
                (Some(t), Some(_)) if t >= 1 && t < self.n => {}
                _ => return bad("r12 needs 1 <= t < n and a unique-block threshold s"),
            }
        }
        Ok(())
    }

    pub fn q_in(&self) -> usize {
        1 << self.q_in_bits
    }

    pub fn inner_field(&self) -> FieldSpec {
        FieldSpec::standard(self.q_in_bits).expect("validated alphabet")
    }

    /// Bits drawn from the source: code, row, column, bit within symbol.
    pub fn random_bits(&self) -> usize {
        self.n * self.k_prime * self.n_prime * self.q_in_bits as usize
    }

    /// Largest LCS allowed by P-HN: `⌊γ n′⌋`.
    pub fn lcs_cap(&self) -> usize {
        self.gamma.floor_times(self.n_prime)
    }

    pub fn t(&self) -> usize {
        self.t.unwrap_or(1)
    }

    pub fn s(&self) -> usize {
        self.s.unwrap_or(0)
    }
}

fn binary_gamma(k_prime: usize, n_prime: usize, denom: usize) -> Gamma {
    let slack = 1.0 / denom as f64 - k_prime as f64 / n_prime as f64;
    let value = slack.max(0.0);
    Gamma { text: format!("{value}"), value }
}

/// Where a family's generator matrices came from.
#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    SmallBias(Seed),
    Uniform(u64),
    Explicit,
}

/// Outcome recorded on a family once a checker has passed it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verification {
    pub property: Property,
    pub mode: CheckMode,
    pub trials: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Property {
    #[serde(rename = "P-HN")]
    Hn,
    #[serde(rename = "P-13")]
    R13,
    #[serde(rename = "P-12")]
    R12,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckMode {
    Exhaustive,
    Sampled,
}

/// `n` inner codes with materialized codebooks.
#[derive(Clone, Debug)]
pub struct InnerFamily {
    pub params: InnerParams,
    pub matrices: Vec<Matrix>,
    /// `codebooks[i][m]` is the codeword of message `m` in code `i`.
    pub codebooks: Vec<Vec<Vec<u16>>>,
    pub provenance: Provenance,
    pub verification: Option<Verification>,
    index: Vec<HashMap<Vec<u16>, usize>>,
}

impl InnerFamily {
    /// Builds the family from explicit generator matrices.
    pub fn from_matrices(params: InnerParams, matrices: Vec<Matrix>, provenance: Provenance) -> Result<Self, FamilyError> {
        params.validate()?;
        if matrices.len() != params.n
            || matrices.iter().any(|m| m.rows != params.k_prime || m.cols != params.n_prime)
        {
            return Err(FamilyError::Params("matrix shapes do not match the parameters".into()));
        }
        let field = Gf2m::new(params.inner_field());
        if let Some(code) = matrices.iter().position(|m| m.rank(&field) < params.k_prime) {
            return Err(FamilyError::RankDeficient { code });
        }
        let codebooks: Vec<Vec<Vec<u16>>> = matrices
            .iter()
            .map(|m| (0..params.codebook_size).map(|msg| encode_with(&field, &params, m, msg)).collect())
            .collect();
        let index = codebooks
            .iter()
            .map(|book| book.iter().enumerate().map(|(m, w)| (w.clone(), m)).collect())
            .collect();
        Ok(Self { params, matrices, codebooks, provenance, verification: None, index })
    }

    /// Fills matrices from `bits` in the order code, row, column, bit.
    pub fn from_bits(params: InnerParams, bits: &[bool], provenance: Provenance) -> Result<Self, FamilyError> {
        let needed = params.random_bits();
        if bits.len() < needed {
            return Err(FamilyError::ShortSource { needed, got: bits.len() });
        }
        let b = params.q_in_bits as usize;
        let mut symbols = bits.chunks_exact(b).map(|chunk| {
            chunk.iter().enumerate().fold(0u16, |acc, (i, &bit)| acc | (bit as u16) << i)
        });
        let matrices = (0..params.n)
            .map(|_| {
                let data: Vec<u16> = symbols.by_ref().take(params.k_prime * params.n_prime).collect();
                Matrix { rows: params.k_prime, cols: params.n_prime, data }
            })
            .collect();
        Self::from_matrices(params, matrices, provenance)
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn codeword(&self, code: usize, message: usize) -> &[u16] {
        &self.codebooks[code][message]
    }

    /// Message index of `word` in code `code`, if it is a codeword.
    pub fn message_of(&self, code: usize, word: &[u16]) -> Option<usize> {
        self.index[code].get(word).copied()
    }
}

/// Digits of `msg` in base `q_in`, little-endian, times the generator rows.
fn encode_with(field: &Gf2m, params: &InnerParams, m: &Matrix, msg: usize) -> Vec<u16> {
    let q = params.q_in();
    let mut out = vec![0u16; params.n_prime];
    let mut rest = msg;
    for r in 0..params.k_prime {
        let digit = (rest % q) as u16;
        rest /= q;
        if digit != 0 {
            for (o, &g) in out.iter_mut().zip(m.row(r)) {
                *o ^= field.mul(digit, g);
            }
        }
    }
    out
}

/// Randomness used by [`sample_family`].
#[derive(Clone, Debug)]
pub enum BitSource {
    /// ChaCha8 seeded with the given value.
    Uniform(u64),
    SmallBias(BiasSpec, Seed),
}

pub fn sample_family(params: &InnerParams, source: &BitSource) -> Result<InnerFamily, FamilyError> {
    params.validate()?;
    let needed = params.random_bits();
    let (bits, provenance) = match source {
        BitSource::Uniform(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            ((0..needed).map(|_| rng.gen::<bool>()).collect::<Vec<_>>(), Provenance::Uniform(*seed))
        }
        BitSource::SmallBias(spec, seed) => (Generator::new(*spec).generate(*seed)?, Provenance::SmallBias(*seed)),
    };
    InnerFamily::from_bits(params.clone(), &bits, provenance)
}

/// One recorded property violation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Witness {
    /// Two codewords with a long common subsequence; `(code, message)` pairs
    /// with the first pair the smaller.
    Hn { a: (usize, usize), b: (usize, usize), lcs: usize },
    /// `w` from code `w_code` close to a substring of `u ∘ v`, taken from
    /// codes `uv_code` and `uv_code + 1`.
    R13 { w_code: usize, w_msg: usize, uv_code: usize, u_msg: usize, v_msg: usize, distance: usize },
    /// `t` blocks from `w_start` close to a substring of `t + 1` blocks
    /// from `u_start`.
    R12 { w_start: usize, w_msgs: Vec<usize>, u_start: usize, u_msgs: Vec<usize>, distance: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: Property,
    pub mode: CheckMode,
    /// Instances examined (pairs, triples or windows).
    pub trials: u64,
    pub violations: Vec<Witness>,
    pub passed: bool,
    /// For sampled runs: 95% Clopper-Pearson upper bound on the violation rate.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub violation_rate_upper: Option<f64>,
}

impl PropertyReport {
    fn new(property: Property, mode: CheckMode, trials: u64, violations: Vec<Witness>) -> Self {
        let passed = violations.is_empty();
        let violation_rate_upper =
            (mode == CheckMode::Sampled).then(|| clopper_pearson_upper(violations.len() as u64, trials, 0.05));
        Self { property, mode, trials, violations, passed, violation_rate_upper }
    }

    pub fn verification(&self) -> Verification {
        Verification { property: self.property, mode: self.mode, trials: self.trials }
    }
}

/// How a checker should run.
#[derive(Clone, Copy, Debug)]
pub struct CheckOptions {
    /// Stop after this many violations (search mode); `None` records all.
    pub max_violations: Option<usize>,
    /// Trials for sampled mode.
    pub trials: u64,
    pub rng_seed: u64,
    /// Force sampling even when an exhaustive scan is allowed.
    pub force_sampled: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self { max_violations: None, trials: 20_000, rng_seed: 0, force_sampled: false }
    }
}

impl CheckOptions {
    fn full(&self, found: usize) -> bool {
        self.max_violations.is_some_and(|m| found >= m)
    }
}

/// P-HN: `LCS(x, y) ≤ ⌊γ n′⌋` whenever `x`, `y` come from different codes and
/// are not both zero, or from the same code and differ.
pub fn check_property_hn(family: &InnerFamily, opts: &CheckOptions) -> PropertyReport {
    let p = &family.params;
    let cap = p.lcs_cap();
    let words: Vec<(usize, usize)> =
        (0..p.n).flat_map(|i| (0..p.codebook_size).map(move |m| (i, m))).collect();
    let violates = |a: (usize, usize), b: (usize, usize)| -> Option<Witness> {
        let in_scope = if a.0 != b.0 { a.1 != 0 || b.1 != 0 } else { a.1 != b.1 };
        if !in_scope {
            return None;
        }
        let l = lcs(family.codeword(a.0, a.1), family.codeword(b.0, b.1));
        (l > cap).then(|| Witness::Hn { a: a.min(b), b: a.max(b), lcs: l })
    };
    let mut violations = Vec::new();
    if words.len() <= HN_EXHAUSTIVE_LIMIT && !opts.force_sampled {
        let mut trials = 0u64;
        'outer: for (ai, &a) in words.iter().enumerate() {
            for &b in &words[ai + 1..] {
                trials += 1;
                if let Some(w) = violates(a, b) {
                    violations.push(w);
                    if opts.full(violations.len()) {
                        break 'outer;
                    }
                }
            }
        }
        return PropertyReport::new(Property::Hn, CheckMode::Exhaustive, trials, violations);
    }
    if opts.trials == 0 {
        return PropertyReport::new(Property::Hn, CheckMode::Sampled, 0, violations);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.rng_seed);
    let mut trials = 0;
    while trials < opts.trials {
        let a = words[rng.gen_range(0..words.len())];
        let b = words[rng.gen_range(0..words.len())];
        if a == b {
            continue;
        }
        trials += 1;
        if let Some(w) = violates(a, b) {
            violations.push(w);
            if opts.full(violations.len()) {
                break;
            }
        }
    }
    violations.sort();
    violations.dedup();
    PropertyReport::new(Property::Hn, CheckMode::Sampled, trials, violations)
}

/// P-13: every nonzero `w` of any code is at substring distance at least `d′`
/// from `u ∘ v` over consecutive codes, unless `w` equals `u` or `v`.
pub fn check_property_13(family: &InnerFamily, opts: &CheckOptions) -> PropertyReport {
    let p = &family.params;
    let d = p.d_prime;
    let mut violations = Vec::new();
    let mut trials = 0u64;
    let mut uv = Vec::with_capacity(2 * p.n_prime);
    'outer: for j in 0..p.n.saturating_sub(1) {
        for u_msg in 0..p.codebook_size {
            for v_msg in 0..p.codebook_size {
                let u = family.codeword(j, u_msg);
                let v = family.codeword(j + 1, v_msg);
                uv.clear();
                uv.extend_from_slice(u);
                uv.extend_from_slice(v);
                for i in 0..p.n {
                    for w_msg in 1..p.codebook_size {
                        let w = family.codeword(i, w_msg);
                        if w == u || w == v {
                            continue;
                        }
                        trials += 1;
                        if let Some(distance) = substring_distance_below(w, &uv, d) {
                            violations.push(Witness::R13 { w_code: i, w_msg, uv_code: j, u_msg, v_msg, distance });
                            if opts.full(violations.len()) {
                                break 'outer;
                            }
                        }
                    }
                }
            }
        }
    }
    PropertyReport::new(Property::R13, CheckMode::Exhaustive, trials, violations)
}

/// Unique blocks on each side: nonzero blocks with no block on the other
/// side carrying the same message in the same code.
pub fn count_unique_blocks(w_blocks: &[(usize, usize)], u_blocks: &[(usize, usize)]) -> (usize, usize) {
    let unique = |side: &[(usize, usize)], other: &[(usize, usize)]| {
        side.iter().filter(|&&(code, msg)| msg != 0 && !other.contains(&(code, msg))).count()
    };
    (unique(w_blocks, u_blocks), unique(u_blocks, w_blocks))
}

/// [`count_unique_blocks`] for two windows of consecutive codes, without
/// materializing the block lists.
fn window_unique_blocks(w_start: usize, w_msgs: &[usize], u_start: usize, u_msgs: &[usize]) -> (usize, usize) {
    let unique = |a_start: usize, a: &[usize], b_start: usize, b: &[usize]| {
        a.iter()
            .enumerate()
            .filter(|&(o, &m)| {
                let code = a_start + o;
                m != 0 && !(code >= b_start && code - b_start < b.len() && b[code - b_start] == m)
            })
            .count()
    };
    (unique(w_start, w_msgs, u_start, u_msgs), unique(u_start, u_msgs, w_start, w_msgs))
}

/// P-12 exhaustive scan is allowed for these parameters.
pub fn r12_exhaustive_allowed(p: &InnerParams) -> bool {
    let exp = (2 * p.t() + 1) * p.k_prime;
    exp < 64 && (1u64 << exp) <= R12_EXHAUSTIVE_LIMIT
}

/// P-12: a window of `t` blocks with at least `s` unique blocks on either
/// side is at substring distance at least `d′` from every `t + 1` window.
/// Windows start at `0..=n-t` for `w` and `0..=n-t-1` for `u`.
pub fn check_property_12(family: &InnerFamily, opts: &CheckOptions) -> Result<PropertyReport, FamilyError> {
    let p = &family.params;
    let (t, s, d) = (p.t(), p.s(), p.d_prime);
    if p.n < t + 1 {
        return Err(FamilyError::Params("need n > t for P-12 windows".into()));
    }
    let w_starts = p.n - t + 1;
    let u_starts = p.n - t;
    let book = p.codebook_size;
    let mut violations = Vec::new();
    let concat = |start: usize, msgs: &[usize]| -> Vec<u16> {
        msgs.iter().enumerate().flat_map(|(o, &m)| family.codeword(start + o, m).iter().copied()).collect()
    };
    let check = |w_start: usize, w_msgs: &[usize], w: &[u16], u_start: usize, u_msgs: &[usize], u: &[u16]| {
        let (uw, uu) = window_unique_blocks(w_start, w_msgs, u_start, u_msgs);
        if uw < s && uu < s {
            return None;
        }
        substring_distance_below(w, u, d).map(|distance| Witness::R12 {
            w_start,
            w_msgs: w_msgs.to_vec(),
            u_start,
            u_msgs: u_msgs.to_vec(),
            distance,
        })
    };
    if r12_exhaustive_allowed(p) && !opts.force_sampled {
        let mut trials = 0u64;
        let w_tuples: Vec<Vec<usize>> = (0..book.pow(t as u32)).map(|i| digits(i, book, t)).collect();
        let u_tuples: Vec<Vec<usize>> = (0..book.pow(t as u32 + 1)).map(|i| digits(i, book, t + 1)).collect();
        let u_words: Vec<Vec<Vec<u16>>> =
            (0..u_starts).map(|j| u_tuples.iter().map(|m| concat(j, m)).collect()).collect();
        'outer: for w_start in 0..w_starts {
            let w_words: Vec<Vec<u16>> = w_tuples.iter().map(|m| concat(w_start, m)).collect();
            for (u_start, u_row) in u_words.iter().enumerate() {
                for (w_msgs, w) in w_tuples.iter().zip(&w_words) {
                    for (u_msgs, u) in u_tuples.iter().zip(u_row) {
                        trials += 1;
                        if let Some(v) = check(w_start, w_msgs, w, u_start, u_msgs, u) {
                            violations.push(v);
                            if opts.full(violations.len()) {
                                break 'outer;
                            }
                        }
                    }
                }
            }
        }
        return Ok(PropertyReport::new(Property::R12, CheckMode::Exhaustive, trials, violations));
    }
    if opts.trials == 0 {
        return Err(FamilyError::NoTrials);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.rng_seed);
    for _ in 0..opts.trials {
        let w_start = rng.gen_range(0..w_starts);
        let u_start = rng.gen_range(0..u_starts);
        let w_msgs: Vec<usize> = (0..t).map(|_| rng.gen_range(0..book)).collect();
        let u_msgs: Vec<usize> = (0..=t).map(|_| rng.gen_range(0..book)).collect();
        let (w, u) = (concat(w_start, &w_msgs), concat(u_start, &u_msgs));
        if let Some(v) = check(w_start, &w_msgs, &w, u_start, &u_msgs, &u) {
            violations.push(v);
            if opts.full(violations.len()) {
                break;
            }
        }
    }
    violations.sort();
    violations.dedup();
    Ok(PropertyReport::new(Property::R12, CheckMode::Sampled, opts.trials, violations))
}

/// Little-endian base-`base` digits of `value`.
fn digits(mut value: usize, base: usize, len: usize) -> Vec<usize> {
    (0..len)
        .map(|_| {
            let d = value % base;
            value /= base;
            d
        })
        .collect()
}

/// Runs the checker matching the family's variant.
pub fn check_property(family: &InnerFamily, opts: &CheckOptions) -> Result<PropertyReport, FamilyError> {
    match family.params.variant {
        Variant::Hn => Ok(check_property_hn(family, opts)),
        Variant::R13 => Ok(check_property_13(family, opts)),
        Variant::R12 => check_property_12(family, opts),
    }
}

/// 95% (for `alpha = 0.05`) one-sided upper bound on a binomial rate after
/// `k` successes in `n` trials.
pub fn clopper_pearson_upper(k: u64, n: u64, alpha: f64) -> f64 {
    if n == 0 || k >= n {
        return 1.0;
    }
    let cdf = |p: f64| -> f64 {
        // P[X <= k] for X ~ Bin(n, p), summed in log space.
        let (ln_p, ln_q) = (p.ln(), (1.0 - p).ln());
        let mut ln_binom = 0.0;
        let mut total = 0.0;
        for i in 0..=k {
            if i > 0 {
                ln_binom += ((n - i + 1) as f64).ln() - (i as f64).ln();
            }
            total += (ln_binom + i as f64 * ln_p + (n - i) as f64 * ln_q).exp();
        }
        total
    };
    let (mut lo, mut hi) = (k as f64 / n as f64, 1.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Seed search settings.
#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    /// Maximum number of seeds to try.
    pub budget: u64,
    /// Violations after which a candidate is abandoned.
    pub violation_cap: usize,
    /// Checker settings for sampled properties.
    pub check: CheckOptions,
    /// Seeds sampled (rather than enumerated) from this RNG seed when the
    /// space exceeds the budget or `sample` is set.
    pub sample_seed: u64,
    pub sample: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            budget: crate::smallbias::DEFAULT_ENUMERATION_BUDGET,
            violation_cap: 4,
            check: CheckOptions::default(),
            sample_seed: 0,
            sample: false,
        }
    }
}

/// Outcome of a successful search.
#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub family: InnerFamily,
    pub report: PropertyReport,
    pub seeds_tried: u64,
}

/// Tries seeds in increasing order (or a sampled sequence when the space is
/// larger than the budget) and returns the first family that passes its
/// checker. Rank-deficient samples count against the budget.
pub fn search_family(params: &InnerParams, spec: BiasSpec, opts: &SearchOptions) -> Result<SearchOutcome, FamilyError> {
    params.validate()?;
    if spec.output_length < params.random_bits() {
        return Err(FamilyError::ShortSource { needed: params.random_bits(), got: spec.output_length });
    }
    let generator = Generator::new(spec);
    let enumerate = !opts.sample && spec.seed_count() <= opts.budget;
    let total = if enumerate { spec.seed_count() } else { opts.budget };
    let mut sampler = ChaCha8Rng::seed_from_u64(opts.sample_seed);
    let mut capped = opts.check;
    capped.max_violations = Some(opts.violation_cap.max(1));
    let mut best: Option<(usize, Seed)> = None;
    let mut start = 0u64;
    while start < total {
        let end = (start + SEARCH_CHUNK).min(total);
        let seeds: Vec<Seed> = if enumerate {
            (start..end).map(|v| Seed::new(v, spec.seed_length).expect("in range")).collect()
        } else {
            (start..end).map(|_| generator.random_seed(&mut sampler)).collect()
        };
        // Capped report per seed; `None` marks a rank-deficient sample. A
        // capped run that finds nothing has scanned everything, so its
        // report is the full one.
        // Seeds after a known pass are skipped; every earlier one still runs.
        let first_pass = AtomicUsize::new(usize::MAX);
        let reports: Vec<Option<PropertyReport>> = seeds
            .par_iter()
            .enumerate()
            .map(|(idx, &seed)| {
                if idx > first_pass.load(Ordering::Relaxed) {
                    return None;
                }
                let bits = generator.generate(seed).ok()?;
                let family = InnerFamily::from_bits(params.clone(), &bits, Provenance::SmallBias(seed)).ok()?;
                let report = check_property(&family, &capped).ok()?;
                if report.passed {
                    first_pass.fetch_min(idx, Ordering::Relaxed);
                }
                Some(report)
            })
            .collect();
        for (offset, (&seed, report)) in seeds.iter().zip(reports).enumerate() {
            let Some(report) = report else { continue };
            if report.passed {
                let bits = generator.generate(seed)?;
                let mut family = InnerFamily::from_bits(params.clone(), &bits, Provenance::SmallBias(seed))?;
                family.verification = Some(report.verification());
                return Ok(SearchOutcome { family, report, seeds_tried: start + offset as u64 + 1 });
            }
            let count = report.violations.len();
            if best.is_none_or(|(c, _)| count < c) {
                best = Some((count, seed));
            }
        }
        start = end;
    }
    Err(FamilyError::Exhausted {
        tried: total,
        best: best.map(|(_, s)| s),
        best_violations: best.map_or(0, |(c, _)| c),
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Independent LCS by the full table.
    fn table_lcs(x: &[u16], y: &[u16]) -> usize {
        let mut t = vec![vec![0usize; y.len() + 1]; x.len() + 1];
        for i in 1..=x.len() {
            for j in 1..=y.len() {
                t[i][j] = if x[i - 1] == y[j - 1] { t[i - 1][j - 1] + 1 } else { t[i - 1][j].max(t[i][j - 1]) };
            }
        }
        t[x.len()][y.len()]
    }

    /// Minimum edit distance from `w` to any substring of `text`, by scanning
    /// every substring.
    fn scan_substring_distance(w: &[u16], text: &[u16]) -> usize {
        let mut best = usize::MAX;
        for a in 0..=text.len() {
            for b in a..=text.len() {
                best = best.min(w.len() + (b - a) - 2 * table_lcs(w, &text[a..b]));
            }
        }
        best
    }

    pub(crate) fn hn_oracle(f: &InnerFamily) -> Vec<Witness> {
        let p = &f.params;
        let mut out = Vec::new();
        for i in 0..p.n {
            for j in 0..p.n {
                for x in 0..p.codebook_size {
                    for y in 0..p.codebook_size {
                        if (i, x) >= (j, y) {
                            continue;
                        }
                        let cond = (i != j && (x != 0 || y != 0)) || (i == j && x != y);
                        let l = table_lcs(&f.codebooks[i][x], &f.codebooks[j][y]);
                        if cond && l as f64 > p.gamma.value() * p.n_prime as f64 + 1e-9 {
                            out.push(Witness::Hn { a: (i, x), b: (j, y), lcs: l });
                        }
                    }
                }
            }
        }
        out.sort();
        out
    }

    pub(crate) fn r13_oracle(f: &InnerFamily) -> Vec<Witness> {
        let p = &f.params;
        let mut out = Vec::new();
        for i in 0..p.n {
            for w_msg in 1..p.codebook_size {
                for j in 0..p.n - 1 {
                    for u_msg in 0..p.codebook_size {
                        for v_msg in 0..p.codebook_size {
                            let w = &f.codebooks[i][w_msg];
                            let u = &f.codebooks[j][u_msg];
                            let v = &f.codebooks[j + 1][v_msg];
                            if w == u || w == v {
                                continue;
                            }
                            let text: Vec<u16> = u.iter().chain(v).copied().collect();
                            let distance = scan_substring_distance(w, &text);
                            if distance < p.d_prime {
                                out.push(Witness::R13 { w_code: i, w_msg, uv_code: j, u_msg, v_msg, distance });
                            }
                        }
                    }
                }
            }
        }
        out.sort();
        out
    }

    pub(crate) fn r12_oracle(f: &InnerFamily) -> Vec<Witness> {
        let p = &f.params;
        let (t, s) = (p.t(), p.s());
        let book = p.codebook_size;
        let mut out = Vec::new();
        for w_start in 0..=p.n - t {
            for u_start in 0..p.n - t {
                for wi in 0..book.pow(t as u32) {
                    for ui in 0..book.pow(t as u32 + 1) {
                        let w_msgs = digits(wi, book, t);
                        let u_msgs = digits(ui, book, t + 1);
                        // Unique blocks straight from the definition.
                        let mut uw = 0;
                        for (o, &m) in w_msgs.iter().enumerate() {
                            let shared = u_msgs.iter().enumerate().any(|(o2, &m2)| u_start + o2 == w_start + o && m2 == m);
                            if m != 0 && !shared {
                                uw += 1;
                            }
                        }
                        let mut uu = 0;
                        for (o, &m) in u_msgs.iter().enumerate() {
                            let shared = w_msgs.iter().enumerate().any(|(o2, &m2)| w_start + o2 == u_start + o && m2 == m);
                            if m != 0 && !shared {
                                uu += 1;
                            }
                        }
                        if uw < s && uu < s {
                            continue;
                        }
                        let w: Vec<u16> = w_msgs.iter().enumerate().flat_map(|(o, &m)| f.codebooks[w_start + o][m].clone()).collect();
                        let u: Vec<u16> = u_msgs.iter().enumerate().flat_map(|(o, &m)| f.codebooks[u_start + o][m].clone()).collect();
                        let distance = scan_substring_distance(&w, &u);
                        if distance < p.d_prime {
                            out.push(Witness::R12 { w_start, w_msgs, u_start, u_msgs, distance });
                        }
                    }
                }
            }
        }
        out.sort();
        out
    }

    fn sorted(mut v: Vec<Witness>) -> Vec<Witness> {
        v.sort();
        v
    }

    #[test]
    fn gamma_parsing() {
        let g: Gamma = "1/4".parse().unwrap();
        assert_eq!(g.value(), 0.25);
        assert_eq!(g.as_str(), "1/4");
        assert_eq!(g.floor_times(16), 4);
        assert!("2".parse::<Gamma>().is_err());
        assert!("x/4".parse::<Gamma>().is_err());
        assert_eq!(InnerParams::default_hn_alphabet_bits(&g), 11);
        assert_eq!(InnerParams::default_hn_alphabet_bits(&"1/8".parse().unwrap()), 14);
    }

    #[test]
    fn sampling_is_deterministic_and_rejects_zero_source() {
        let params = InnerParams::r13(4, 2, 9, 2).unwrap();
        let a = sample_family(&params, &BitSource::Uniform(3)).unwrap();
        let b = sample_family(&params, &BitSource::Uniform(3)).unwrap();
        assert_eq!(a.matrices, b.matrices);
        let zeros = vec![false; params.random_bits()];
        assert!(matches!(
            InnerFamily::from_bits(params.clone(), &zeros, Provenance::Explicit),
            Err(FamilyError::RankDeficient { code: 0 })
        ));
        let spec = BiasSpec::with_seed_length(params.random_bits(), 16).unwrap();
        let seed = Seed::new(0x1234, 16).unwrap();
        let c = sample_family(&params, &BitSource::SmallBias(spec, seed)).unwrap();
        let d = sample_family(&params, &BitSource::SmallBias(spec, seed)).unwrap();
        assert_eq!(c.matrices, d.matrices);
        // Injectivity inside every code.
        for book in &c.codebooks {
            let mut words = book.clone();
            words.sort();
            words.dedup();
            assert_eq!(words.len(), book.len());
        }
    }

    #[test]
    fn unique_block_examples() {
        assert_eq!(count_unique_blocks(&[(0, 0), (1, 0)], &[(0, 0), (1, 0), (2, 0)]), (0, 0));
        assert_eq!(count_unique_blocks(&[(0, 1), (1, 2)], &[(5, 1), (6, 1), (7, 3)]), (2, 3));
        assert_eq!(count_unique_blocks(&[(3, 1)], &[(3, 1), (4, 2)]), (0, 1));
    }

    #[test]
    fn hn_constructed_families() {
        let gamma: Gamma = "1/4".parse().unwrap();
        let params = InnerParams::hn(2, 4, 4, 4, gamma).unwrap();
        // Same nonzero generator in both codes: the codewords coincide.
        let row = Matrix::from_rows(&[vec![1, 2, 3, 4]]);
        let fam = InnerFamily::from_matrices(params.clone(), vec![row.clone(), row], Provenance::Explicit).unwrap();
        let rep = check_property_hn(&fam, &CheckOptions::default());
        assert!(rep.violations.iter().any(|w| matches!(w, Witness::Hn { lcs: 4, .. })));
        // Disjoint symbol sets with no zeros: LCS of distinct words is 0.
        let a = Matrix::from_rows(&[vec![1, 1, 1, 1]]);
        let b = Matrix::from_rows(&[vec![8, 8, 8, 8]]);
        let params = InnerParams::hn(2, 2, 4, 4, "1/4".parse().unwrap()).unwrap();
        let fam = InnerFamily::from_matrices(params, vec![a, b], Provenance::Explicit).unwrap();
        assert!(check_property_hn(&fam, &CheckOptions::default()).passed);
    }

    #[test]
    fn checkers_match_oracles() {
        for seed in 0..6 {
            let params = InnerParams::hn(4, 8, 3, 12, "1/4".parse().unwrap()).unwrap();
            let fam = sample_family(&params, &BitSource::Uniform(seed)).unwrap();
            assert_eq!(sorted(check_property_hn(&fam, &CheckOptions::default()).violations), hn_oracle(&fam));

            let params = InnerParams::r13(4, 2, 9, 3).unwrap();
            let fam = sample_family(&params, &BitSource::Uniform(seed)).unwrap();
            assert_eq!(sorted(check_property_13(&fam, &CheckOptions::default()).violations), r13_oracle(&fam));

            let params = InnerParams::r12(4, 1, 8, 4, 2, 1).unwrap();
            let fam = sample_family(&params, &BitSource::Uniform(seed)).unwrap();
            let rep = check_property_12(&fam, &CheckOptions::default()).unwrap();
            assert_eq!(rep.mode, CheckMode::Exhaustive);
            assert_eq!(sorted(rep.violations), r12_oracle(&fam));
        }
    }

    #[test]
    fn r13_exclusion_and_zero_distance() {
        let params = InnerParams::r13(3, 2, 6, 0).unwrap();
        let fam = sample_family(&params, &BitSource::Uniform(1)).unwrap();
        assert!(check_property_13(&fam, &CheckOptions::default()).passed);
        // A code repeated verbatim: w = u is excluded, so no zero-distance
        // witness involves the excluded pair.
        let m = fam.matrices[0].clone();
        let params = InnerParams::r13(2, 2, 6, 1).unwrap();
        let twin = InnerFamily::from_matrices(params, vec![m.clone(), m], Provenance::Explicit).unwrap();
        let rep = check_property_13(&twin, &CheckOptions::default());
        for v in &rep.violations {
            if let Witness::R13 { w_code, w_msg, uv_code, u_msg, v_msg, .. } = v {
                let w = twin.codeword(*w_code, *w_msg);
                assert_ne!(w, twin.codeword(*uv_code, *u_msg));
                assert_ne!(w, twin.codeword(*uv_code + 1, *v_msg));
            }
        }
    }

    #[test]
    fn r12_sampled_mode_and_filters() {
        let params = InnerParams::r12(6, 3, 10, 2, 2, 2).unwrap();
        assert!(!r12_exhaustive_allowed(&params) || params.k_prime * 5 <= 20);
        let fam = sample_family(&params, &BitSource::Uniform(4)).unwrap();
        let opts = CheckOptions { trials: 500, force_sampled: true, ..CheckOptions::default() };
        let rep = check_property_12(&fam, &opts).unwrap();
        assert_eq!(rep.mode, CheckMode::Sampled);
        assert_eq!(rep.trials, 500);
        assert!(rep.violation_rate_upper.unwrap() > 0.0);
        let zero = CheckOptions { trials: 0, force_sampled: true, ..CheckOptions::default() };
        assert!(matches!(check_property_12(&fam, &zero), Err(FamilyError::NoTrials)));
    }

    #[test]
    fn clopper_pearson_known_values() {
        // Zero events: 1 - alpha^(1/n).
        let u = clopper_pearson_upper(0, 100, 0.05);
        assert!((u - (1.0 - 0.05f64.powf(0.01))).abs() < 1e-6);
        assert!(clopper_pearson_upper(5, 100, 0.05) > 0.05);
        assert_eq!(clopper_pearson_upper(3, 3, 0.05), 1.0);
    }

    #[test]
    fn search_trivial_and_impossible() {
        let params = InnerParams::r13(3, 2, 6, 0).unwrap();
        let spec = BiasSpec::with_seed_length(params.random_bits(), 12).unwrap();
        let out = search_family(&params, spec, &SearchOptions::default()).unwrap();
        // The first full-rank seed passes when d′ = 0.
        let first_full_rank = (0..1u64 << 12)
            .find(|&v| sample_family(&params, &BitSource::SmallBias(spec, Seed::new(v, 12).unwrap())).is_ok())
            .unwrap();
        assert_eq!(out.family.provenance, Provenance::SmallBias(Seed::new(first_full_rank, 12).unwrap()));
        assert!(out.family.verification.is_some());
        // γ n′ < 1 leaves no room: zero against any word with a zero symbol.
        let gamma: Gamma = "1/8".parse().unwrap();
        let params = InnerParams::hn(4, 4, 1, 4, gamma).unwrap();
        let spec = BiasSpec::with_seed_length(params.random_bits(), 10).unwrap();
        let err = search_family(&params, spec, &SearchOptions::default()).unwrap_err();
        assert!(matches!(err, FamilyError::Exhausted { tried: 1024, .. }));
    }
}
