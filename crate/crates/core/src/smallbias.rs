//! Small-bias bit generator: the powering construction over GF(2^m).
//!
//! A seed is a pair `(x, y)` of field elements and output bit `i` is the
//! GF(2) inner product of the coefficient vectors of `x^(i+1)` and `y`.
//! Any fixed nonempty XOR of `n` outputs is a nonzero polynomial in `x` of
//! degree at most `n` without constant term, so its bias is at most
//! `n / 2^(m+1)`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1 << 24;
const MAX_HALF_SEED: u32 = 31;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SmallBiasError {
    #[error("epsilon {0} must lie in (0, 1)")]
    Epsilon(f64),
    #[error("seed length {0} must be even and between 2 and {max}", max = 2 * MAX_HALF_SEED)]
    SeedLength(u32),
    #[error("{seeds} seeds exceed the enumeration budget {budget}; sample seeds instead")]
    Budget { seeds: u64, budget: u64 },
    #[error("seed has {got} bits, generator expects {expected}")]
    SeedMismatch { expected: u32, got: u32 },
    #[error("seed value does not fit in {0} bits")]
    SeedRange(u32),
    #[error("window width {0} outside 1..=16")]
    Window(u32),
}

/// Output length, bias target and the derived seed length `2m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasSpec {
    pub output_length: usize,
    pub epsilon: f64,
    pub seed_length: u32,
}

impl BiasSpec {
    /// Picks the smallest `m` with `max(n_bits - 1, 1) / 2^m ≤ epsilon`.
    pub fn new(output_length: usize, epsilon: f64) -> Result<Self, SmallBiasError> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(SmallBiasError::Epsilon(epsilon));
        }
        let numerator = output_length.saturating_sub(1).max(1) as f64;
        let m = (1..=MAX_HALF_SEED)
            .find(|&m| numerator / 2f64.powi(m as i32) <= epsilon)
            .ok_or(SmallBiasError::Epsilon(epsilon))?;
        Ok(Self { output_length, epsilon, seed_length: 2 * m })
    }

    /// Fixes the seed length and reports the bias the construction guarantees.
    pub fn with_seed_length(output_length: usize, seed_length: u32) -> Result<Self, SmallBiasError> {
        if !seed_length.is_multiple_of(2) || !(2..=2 * MAX_HALF_SEED).contains(&seed_length) {
            return Err(SmallBiasError::SeedLength(seed_length));
        }
        let m = seed_length / 2;
        let epsilon = (output_length.max(1) as f64 / 2f64.powi(m as i32 + 1)).min(0.5);
        Ok(Self { output_length, epsilon, seed_length })
    }

    pub fn half_seed(&self) -> u32 {
        self.seed_length / 2
    }

    pub fn seed_count(&self) -> u64 {
        1u64 << self.seed_length
    }

    /// Bias bound actually delivered by the construction.
    pub fn guaranteed_bias(&self) -> f64 {
        (self.output_length.max(1) as f64 / 2f64.powi(self.half_seed() as i32 + 1)).min(0.5)
    }
}

/// A seed read as an `s`-bit integer, most significant bit first; the high
/// half is `x`, the low half `y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Seed {
    value: u64,
    len: u32,
}

impl Seed {
    pub fn new(value: u64, len: u32) -> Result<Self, SmallBiasError> {
        if len < 64 && value >> len != 0 {
            return Err(SmallBiasError::SeedRange(len));
        }
        Ok(Self { value, len })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bits(&self) -> Vec<bool> {
        (0..self.len).rev().map(|i| self.value >> i & 1 == 1).collect()
    }

    pub fn to_hex(&self) -> String {
        let digits = (self.len as usize).div_ceil(4).max(1);
        format!("{:0digits$x}", self.value)
    }

    pub fn from_hex(text: &str, len: u32) -> Result<Self, SmallBiasError> {
        let digits = text.strip_prefix("0x").unwrap_or(text);
        let value = u64::from_str_radix(digits, 16).map_err(|_| SmallBiasError::SeedRange(len))?;
        Self::new(value, len)
    }

    fn halves(&self) -> (u64, u64) {
        let m = self.len / 2;
        let mask = (1u64 << m) - 1;
        (self.value >> m & mask, self.value & mask)
    }
}

/// GF(2^m) for m ≤ 31 with plain shift-and-add multiplication.
#[derive(Clone, Copy, Debug)]
struct WideField {
    m: u32,
    modulus: u64,
}

impl WideField {
    fn new(m: u32) -> Self {
        let modulus = (1u64 << m..1u64 << (m + 1))
            .find(|&p| p & 1 == 1 && is_irreducible_ben_or(p, m))
            .expect("irreducible polynomials exist in every degree");
        Self { m, modulus }
    }

    fn mul(&self, mut a: u64, mut b: u64) -> u64 {
        let mut acc = 0;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a >> self.m & 1 == 1 {
                a ^= self.modulus;
            }
        }
        acc
    }
}

fn clmul_mod(a: u64, b: u64, f: u64, deg: u32) -> u64 {
    WideField { m: deg, modulus: f }.mul(a, b)
}

fn poly_gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let db = 63 - b.leading_zeros();
        while a != 0 && 63 - a.leading_zeros() >= db {
            a ^= b << (63 - a.leading_zeros() - db);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a
}

/// Ben-Or: `f` of degree `m` is irreducible iff gcd(f, x^(2^i) - x) = 1 for
/// every i ≤ m/2.
fn is_irreducible_ben_or(f: u64, m: u32) -> bool {
    if m == 1 {
        return true;
    }
    let mut power = 2u64; // x^(2^i) mod f, starting from x
    for _ in 1..=m / 2 {
        power = clmul_mod(power, power, f, m);
        if poly_gcd(f, power ^ 2) != 1 {
            return false;
        }
    }
    true
}

/// Reusable generator for one [`BiasSpec`].
#[derive(Clone, Debug)]
pub struct Generator {
    spec: BiasSpec,
    field: WideField,
}

impl Generator {
    pub fn new(spec: BiasSpec) -> Self {
        Self { spec, field: WideField::new(spec.half_seed()) }
    }

    pub fn spec(&self) -> BiasSpec {
        self.spec
    }

    pub fn generate(&self, seed: Seed) -> Result<Vec<bool>, SmallBiasError> {
        if seed.len != self.spec.seed_length {
            return Err(SmallBiasError::SeedMismatch { expected: self.spec.seed_length, got: seed.len });
        }
        let (x, y) = seed.halves();
        let mut power = 1u64;
        Ok((0..self.spec.output_length)
            .map(|_| {
                power = self.field.mul(power, x);
                (power & y).count_ones() & 1 == 1
            })
            .collect())
    }

    /// Uniformly drawn seed of the right length.
    pub fn random_seed<R: Rng + ?Sized>(&self, rng: &mut R) -> Seed {
        let len = self.spec.seed_length;
        Seed { value: rng.gen::<u64>() & ((1u64 << len) - 1), len }
    }
}

pub fn generate(spec: BiasSpec, seed: Seed) -> Result<Vec<bool>, SmallBiasError> {
    Generator::new(spec).generate(seed)
}

/// All `2^s` seeds in increasing order, if that fits the budget.
pub fn enumerate_seeds(
    spec: BiasSpec,
    budget: u64,
) -> Result<impl Iterator<Item = Seed>, SmallBiasError> {
    let seeds = spec.seed_count();
    if seeds > budget {
        return Err(SmallBiasError::Budget { seeds, budget });
    }
    let len = spec.seed_length;
    Ok((0..seeds).map(move |value| Seed { value, len }))
}

/// Exact maximum bias over every nonempty subset of outputs, averaged over
/// all seeds. Feasible for `output_length ≤ 20` and enumerable seed spaces.
pub fn exhaustive_max_bias(spec: BiasSpec, budget: u64) -> Result<f64, SmallBiasError> {
    let n = spec.output_length;
    assert!(n <= 20, "subset space too large for a full transform");
    let generator = Generator::new(spec);
    let mut counts = vec![0i64; 1 << n];
    let mut total = 0i64;
    for seed in enumerate_seeds(spec, budget)? {
        let word = pack(&generator.generate(seed)?);
        counts[word as usize] += 1;
        total += 1;
    }
    walsh_hadamard(&mut counts);
    let worst = counts.iter().skip(1).map(|c| c.unsigned_abs()).max().unwrap_or(0);
    Ok(worst as f64 / (2.0 * total as f64))
}

fn pack(bits: &[bool]) -> u64 {
    bits.iter().enumerate().fold(0, |acc, (i, &b)| acc | (b as u64) << i)
}

fn walsh_hadamard(a: &mut [i64]) {
    let mut h = 1;
    while h < a.len() {
        for chunk in a.chunks_mut(2 * h) {
            let (lo, hi) = chunk.split_at_mut(h);
            for (u, v) in lo.iter_mut().zip(hi) {
                let (s, d) = (*u + *v, *u - *v);
                *u = s;
                *v = d;
            }
        }
        h *= 2;
    }
}

/// Statistical distance from uniform of a sample of `w`-bit values.
pub fn statistical_distance_from_uniform(
    samples: impl IntoIterator<Item = u32>,
    w: u32,
) -> Result<f64, SmallBiasError> {
    if w == 0 || w > 16 {
        return Err(SmallBiasError::Window(w));
    }
    let mut hist = vec![0u64; 1 << w];
    let mut total = 0u64;
    for v in samples {
        hist[(v & ((1 << w) - 1)) as usize] += 1;
        total += 1;
    }
    if total == 0 {
        return Ok(0.0);
    }
    let uniform = 1.0 / hist.len() as f64;
    Ok(0.5 * hist.iter().map(|&c| (c as f64 / total as f64 - uniform).abs()).sum::<f64>())
}

/// Empirical distance from uniform of `w`-bit windows of generator output:
/// each sample draws a seed and a window offset.
pub fn estimate_statistical_distance<R: Rng + ?Sized>(
    w: u32,
    spec: BiasSpec,
    samples: usize,
    rng: &mut R,
) -> Result<f64, SmallBiasError> {
    if w == 0 || w > 16 || w as usize > spec.output_length {
        return Err(SmallBiasError::Window(w));
    }
    let generator = Generator::new(spec);
    let last_offset = spec.output_length - w as usize;
    let mut windows = Vec::with_capacity(samples);
    for _ in 0..samples {
        let bits = generator.generate(generator.random_seed(rng))?;
        let offset = rng.gen_range(0..=last_offset);
        windows.push(pack(&bits[offset..offset + w as usize]) as u32);
    }
    statistical_distance_from_uniform(windows, w)
}
