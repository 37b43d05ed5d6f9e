//! Reed-Solomon outer code over GF(2^ℓ): evaluation encoding, Berlekamp-Welch
//! errors-and-erasures decoding, Guruswami-Sudan list decoding and the
//! counting utilities used by the instrumented tests.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldSpec, Gf2m};
use crate::linalg::Matrix;

/// Largest message space the exhaustive list oracle will scan.
pub const BRUTEFORCE_LIMIT: u64 = 1 << 20;
const MAX_MULTIPLICITY: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RsError {
    #[error("need 1 <= k <= n <= q, got n = {n}, k = {k}, q = {q}")]
    Parameters { n: usize, k: usize, q: usize },
    #[error("expected {expected} symbols, got {got}")]
    Length { expected: usize, got: usize },
    #[error("symbol {0} is outside the field")]
    Symbol(u16),
    #[error("agreement {agreement} is below the list-decoding threshold {threshold}")]
    AgreementTooLow { agreement: usize, threshold: usize },
    #[error("no interpolation multiplicity up to {MAX_MULTIPLICITY} works for agreement {0}")]
    Multiplicity(usize),
    #[error("exhaustive scan of {0} messages exceeds the oracle limit")]
    TooLarge(u64),
    #[error("the two words are identical")]
    IdenticalWords,
    #[error("chunk length {chunk} must lie in 1..={n}")]
    Chunk { chunk: usize, n: usize },
    #[error("only {fraction} of chunks are dense, below the guaranteed {bound}")]
    DenseBoundViolated { fraction: f64, bound: f64 },
}

/// How evaluation points are laid out: the nonzero elements in antilog
/// order, followed by zero when `n = q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EvalPointRule {
    #[serde(rename = "antilog-then-zero")]
    AntilogThenZero,
}

pub fn evaluation_points(field: &Gf2m, n: usize) -> Result<Vec<u16>, RsError> {
    let q = field.order();
    if n > q {
        return Err(RsError::Parameters { n, k: 1, q });
    }
    Ok((0..n).map(|i| if i < q - 1 { field.antilog(i) } else { 0 }).collect())
}

/// Outer word with optional erasure marks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OuterWord {
    pub symbols: Vec<u16>,
    pub erasures: Vec<bool>,
}

impl OuterWord {
    pub fn new(symbols: Vec<u16>) -> Self {
        let erasures = vec![false; symbols.len()];
        Self { symbols, erasures }
    }

    pub fn with_erasures(symbols: Vec<u16>, erasures: Vec<bool>) -> Self {
        assert_eq!(symbols.len(), erasures.len());
        Self { symbols, erasures }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// An `[n, k, n-k+1]` Reed-Solomon code with its field tables.
#[derive(Clone, Debug)]
pub struct RsCode {
    field: Gf2m,
    n: usize,
    k: usize,
    points: Vec<u16>,
}

impl RsCode {
    pub fn new(spec: FieldSpec, n: usize, k: usize) -> Result<Self, RsError> {
        let field = Gf2m::new(spec);
        if k == 0 || k > n || n > field.order() {
            return Err(RsError::Parameters { n, k, q: field.order() });
        }
        let points = evaluation_points(&field, n)?;
        Ok(Self { field, n, k, points })
    }

    pub fn field(&self) -> &Gf2m {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.n - self.k + 1
    }

    pub fn points(&self) -> &[u16] {
        &self.points
    }

    fn check_symbols(&self, symbols: &[u16], expected: usize) -> Result<(), RsError> {
        if symbols.len() != expected {
            return Err(RsError::Length { expected, got: symbols.len() });
        }
        match symbols.iter().find(|&&s| s as usize >= self.field.order()) {
            Some(&s) => Err(RsError::Symbol(s)),
            None => Ok(()),
        }
    }

    /// Evaluations of `Σ message[i] x^i` at the evaluation points.
    pub fn encode(&self, message: &[u16]) -> Result<Vec<u16>, RsError> {
        self.check_symbols(message, self.k)?;
        Ok(self.encode_unchecked(message))
    }

    fn encode_unchecked(&self, message: &[u16]) -> Vec<u16> {
        self.points.iter().map(|&x| self.field.eval_poly(message, x)).collect()
    }

    fn agreement(&self, message: &[u16], word: &OuterWord) -> usize {
        self.points
            .iter()
            .zip(&word.symbols)
            .zip(&word.erasures)
            .filter(|((&x, &y), &erased)| !erased && self.field.eval_poly(message, x) == y)
            .count()
    }

    /// Berlekamp-Welch on the unerased positions. Succeeds exactly when some
    /// codeword has `2·errors + erasures < d`.
    pub fn unique_decode(&self, word: &OuterWord) -> Result<Option<Vec<u16>>, RsError> {
        self.check_symbols(&word.symbols, self.n)?;
        let kept: Vec<(u16, u16)> = self
            .points
            .iter()
            .zip(&word.symbols)
            .zip(&word.erasures)
            .filter(|(_, &erased)| !erased)
            .map(|((&x, &y), _)| (x, y))
            .collect();
        if kept.len() < self.k {
            return Ok(None);
        }
        let f = &self.field;
        let e = (kept.len() - self.k) / 2;
        // Unknowns: N_0..N_{e+k-1}, then E_0..E_e; equations N(x) + y E(x) = 0.
        let cols = e + self.k + e + 1;
        let mut m = Matrix::zeros(kept.len(), cols);
        for (r, &(x, y)) in kept.iter().enumerate() {
            let mut power = 1u16;
            for c in 0..e + self.k {
                m.set(r, c, power);
                if c <= e {
                    m.set(r, e + self.k + c, f.mul(y, power));
                }
                power = f.mul(power, x);
            }
        }
        let Some(v) = m.kernel_vector(f) else {
            return Ok(None);
        };
        let numerator = &v[..e + self.k];
        let locator = &v[e + self.k..];
        let Some((quotient, remainder)) = poly_divmod(f, numerator, locator) else {
            return Ok(None);
        };
        if remainder.iter().any(|&c| c != 0) || quotient.iter().skip(self.k).any(|&c| c != 0) {
            return Ok(None);
        }
        let mut message = quotient;
        message.resize(self.k, 0);
        let erasures = word.erasures.iter().filter(|&&b| b).count();
        let errors = kept.len() - self.agreement(&message, word);
        Ok((2 * errors + erasures < self.d()).then_some(message))
    }

    /// Smallest agreement the list decoder accepts: ⌈√(kn)⌉.
    pub fn list_threshold(&self) -> usize {
        ceil_sqrt(self.k * self.n)
    }

    /// Guruswami-Sudan: every message whose codeword agrees with the unerased
    /// positions of `word` in at least `agreement` places, sorted.
    pub fn list_decode(&self, word: &OuterWord, agreement: usize) -> Result<Vec<Vec<u16>>, RsError> {
        self.check_symbols(&word.symbols, self.n)?;
        let threshold = self.list_threshold();
        if agreement < threshold {
            return Err(RsError::AgreementTooLow { agreement, threshold });
        }
        let kept: Vec<(u16, u16)> = self
            .points
            .iter()
            .zip(&word.symbols)
            .zip(&word.erasures)
            .filter(|(_, &erased)| !erased)
            .map(|((&x, &y), _)| (x, y))
            .collect();
        if kept.len() < agreement {
            return Ok(Vec::new());
        }
        let mut candidates = if self.k == 1 {
            let mut values: Vec<u16> = kept.iter().map(|&(_, y)| y).collect();
            values.sort_unstable();
            values.dedup();
            values.into_iter().map(|v| vec![v]).collect()
        } else {
            let q = self.interpolate(&kept, agreement)?;
            let mut found = Vec::new();
            roth_ruckenstein(&self.field, q, self.k, &mut Vec::new(), &mut found);
            found
        };
        candidates.retain(|m| self.agreement(m, word) >= agreement);
        candidates.sort();
        candidates.dedup();
        Ok(candidates)
    }

    /// Bivariate `Q` with multiplicity `r` at each point and (1, k-1)-weighted
    /// degree below `agreement · r`. Returned as `Q[b][a]` for `x^a y^b`.
    fn interpolate(&self, points: &[(u16, u16)], agreement: usize) -> Result<Vec<Vec<u16>>, RsError> {
        let f = &self.field;
        let w = self.k - 1;
        for r in 1..=MAX_MULTIPLICITY {
            let degree = agreement * r - 1;
            let monomials: Vec<(usize, usize)> =
                (0..=degree / w).flat_map(|b| (0..=degree - w * b).map(move |a| (a, b))).collect();
            let constraints = points.len() * r * (r + 1) / 2;
            if monomials.len() <= constraints {
                continue;
            }
            let mut m = Matrix::zeros(constraints, monomials.len());
            let mut row = 0;
            for &(x, y) in points {
                for u in 0..r {
                    for v in 0..r - u {
                        // Hasse derivative D^{(u,v)} at (x, y); binomials mod 2 by Lucas.
                        for (c, &(a, b)) in monomials.iter().enumerate() {
                            if a >= u && b >= v && a & u == u && b & v == v {
                                let term = f.mul(f.pow(x, (a - u) as u64), f.pow(y, (b - v) as u64));
                                m.set(row, c, term);
                            }
                        }
                        row += 1;
                    }
                }
            }
            let coeffs = m.kernel_vector(f).expect("more unknowns than constraints");
            let max_b = monomials.iter().map(|&(_, b)| b).max().unwrap_or(0);
            let mut q = vec![vec![0u16; degree + 1]; max_b + 1];
            for (&(a, b), &c) in monomials.iter().zip(&coeffs) {
                q[b][a] = c;
            }
            return Ok(q);
        }
        Err(RsError::Multiplicity(agreement))
    }

    /// Exhaustive list oracle over all `q^k` messages.
    pub fn bruteforce_list(&self, word: &OuterWord, agreement: usize) -> Result<Vec<Vec<u16>>, RsError> {
        self.check_symbols(&word.symbols, self.n)?;
        let q = self.field.order() as u64;
        let total = q.checked_pow(self.k as u32).filter(|&t| t <= BRUTEFORCE_LIMIT);
        let total = total.ok_or(RsError::TooLarge(u64::MAX))?;
        let mut out = Vec::new();
        let mut message = vec![0u16; self.k];
        for _ in 0..total {
            if self.agreement(&message, word) >= agreement {
                out.push(message.clone());
            }
            for digit in message.iter_mut() {
                *digit += 1;
                if (*digit as u64) < q {
                    break;
                }
                *digit = 0;
            }
        }
        out.sort();
        Ok(out)
    }

    /// Exact weight distribution by enumeration; index `w` holds the number
    /// of codewords of Hamming weight `w`.
    pub fn weight_distribution(&self) -> Result<Vec<u64>, RsError> {
        let zero = OuterWord::new(vec![0; self.n]);
        let q = self.field.order() as u64;
        q.checked_pow(self.k as u32).filter(|&t| t <= BRUTEFORCE_LIMIT).ok_or(RsError::TooLarge(u64::MAX))?;
        let mut counts = vec![0u64; self.n + 1];
        // Agreement 0 lists every message.
        for message in self.bruteforce_list(&zero, 0)? {
            let weight = self.encode_unchecked(&message).iter().filter(|&&s| s != 0).count();
            counts[weight] += 1;
        }
        Ok(counts)
    }

    /// Upper bound `C(n, w) · q^(w-d+1)` on the number of weight-`w`
    /// codewords, rounded down; the zero word is counted separately at `w = 0`.
    pub fn count_weight_bound(&self, w: usize) -> u128 {
        if w == 0 {
            return 1;
        }
        if w > self.n {
            return 0;
        }
        let binom = binomial(self.n, w);
        let q = self.field.order() as u128;
        let exponent = w as i64 - self.d() as i64 + 1;
        if exponent >= 0 {
            binom.saturating_mul(q.saturating_pow(exponent as u32))
        } else {
            binom / q.saturating_pow((-exponent) as u32)
        }
    }

    /// Chunked distance profile of two distinct words.
    pub fn check_dense(&self, y: &[u16], y2: &[u16], chunk: usize) -> Result<DenseReport, RsError> {
        self.check_symbols(y, self.n)?;
        self.check_symbols(y2, self.n)?;
        if y == y2 {
            return Err(RsError::IdenticalWords);
        }
        if chunk == 0 || chunk > self.n {
            return Err(RsError::Chunk { chunk, n: self.n });
        }
        let distances: Vec<usize> = y
            .chunks_exact(chunk)
            .zip(y2.chunks_exact(chunk))
            .map(|(a, b)| a.iter().zip(b).filter(|(p, q)| p != q).count())
            .collect();
        let ratio = self.d() as f64 / (2.0 * self.n as f64);
        let dense = distances.iter().filter(|&&d| d as f64 >= ratio * chunk as f64).count();
        let fraction = dense as f64 / distances.len() as f64;
        if fraction < ratio {
            return Err(RsError::DenseBoundViolated { fraction, bound: ratio });
        }
        Ok(DenseReport { fraction, distances })
    }
}

/// Per-chunk Hamming distances and the fraction of chunks at or above
/// `(d / 2n) · chunk`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseReport {
    pub fraction: f64,
    pub distances: Vec<usize>,
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn ceil_sqrt(v: usize) -> usize {
    let mut r = (v as f64).sqrt() as usize;
    while r * r < v {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= v {
        r -= 1;
    }
    r
}

fn trim(p: &mut Vec<u16>) {
    while p.last() == Some(&0) {
        p.pop();
    }
}

/// Quotient and remainder of polynomial division; `None` for a zero divisor.
fn poly_divmod(f: &Gf2m, num: &[u16], den: &[u16]) -> Option<(Vec<u16>, Vec<u16>)> {
    let mut den = den.to_vec();
    trim(&mut den);
    let lead_inv = f.inv(*den.last()?)?;
    let mut rem = num.to_vec();
    trim(&mut rem);
    if rem.len() < den.len() {
        return Some((Vec::new(), rem));
    }
    let mut quot = vec![0u16; rem.len() - den.len() + 1];
    for i in (0..quot.len()).rev() {
        let coef = f.mul(rem[i + den.len() - 1], lead_inv);
        quot[i] = coef;
        if coef != 0 {
            for (j, &dj) in den.iter().enumerate() {
                rem[i + j] ^= f.mul(coef, dj);
            }
        }
    }
    trim(&mut rem);
    Some((quot, rem))
}

/// Finds every `p` of degree `< k` with `(y - p(x)) | Q(x, y)`, one
/// coefficient per recursion level.
fn roth_ruckenstein(f: &Gf2m, mut q: Vec<Vec<u16>>, k: usize, prefix: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
    // Strip the largest power of x dividing Q.
    let shift = q
        .iter()
        .filter_map(|row| row.iter().position(|&c| c != 0))
        .min();
    let Some(shift) = shift else {
        // Q ≡ 0: every continuation is a root; complete with zeros and let
        // the caller's agreement filter decide.
        let mut m = prefix.clone();
        m.resize(k, 0);
        out.push(m);
        return;
    };
    for row in q.iter_mut() {
        if row.len() > shift {
            row.drain(..shift);
        } else {
            row.clear();
        }
    }
    if prefix.len() == k {
        out.push(prefix.clone());
        return;
    }
    let univariate: Vec<u16> = q.iter().map(|row| row.first().copied().unwrap_or(0)).collect();
    for gamma in 0..f.order() {
        let gamma = gamma as u16;
        if f.eval_poly(&univariate, gamma) != 0 {
            continue;
        }
        // Q(x, x·y + γ): coefficient of y^c collects C(b, c) γ^(b-c) x^c Q_b(x).
        let max_b = q.len();
        let width = q.iter().map(Vec::len).max().unwrap_or(0) + max_b;
        let mut next = vec![vec![0u16; width]; max_b];
        for (b, row) in q.iter().enumerate() {
            for c in 0..=b {
                if b & c != c {
                    continue;
                }
                let scale = f.pow(gamma, (b - c) as u64);
                if scale == 0 {
                    continue;
                }
                for (a, &coef) in row.iter().enumerate() {
                    if coef != 0 {
                        next[c][a + c] ^= f.mul(scale, coef);
                    }
                }
            }
        }
        prefix.push(gamma);
        roth_ruckenstein(f, next, k, prefix, out);
        prefix.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn code(degree: u32, n: usize, k: usize) -> RsCode {
        RsCode::new(FieldSpec::standard(degree).unwrap(), n, k).unwrap()
    }

    fn random_message(rng: &mut ChaCha8Rng, c: &RsCode) -> Vec<u16> {
        (0..c.k()).map(|_| rng.gen_range(0..c.field().order()) as u16).collect()
    }

    #[test]
    fn encoding_examples() {
        let c = code(3, 7, 2);
        assert_eq!(c.encode(&[0, 0]).unwrap(), vec![0; 7]);
        // 1 + x at the nonzero points in antilog order.
        let expected: Vec<u16> = (0..7).map(|i| 1 ^ c.field().antilog(i)).collect();
        assert_eq!(c.encode(&[1, 1]).unwrap(), expected);
        let k1 = code(3, 7, 1);
        assert_eq!(k1.encode(&[5]).unwrap(), vec![5; 7]);
        assert!(c.encode(&[1]).is_err());
        assert!(c.encode(&[1, 9]).is_err());
        let full = code(4, 16, 3);
        assert_eq!(full.points()[15], 0);
        assert!(RsCode::new(FieldSpec::standard(3).unwrap(), 9, 2).is_err());
    }

    #[test]
    fn encoding_is_linear() {
        let c = code(4, 15, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let a = random_message(&mut rng, &c);
            let b = random_message(&mut rng, &c);
            let sum: Vec<u16> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
            let ea = c.encode(&a).unwrap();
            let eb = c.encode(&b).unwrap();
            let esum: Vec<u16> = ea.iter().zip(&eb).map(|(x, y)| x ^ y).collect();
            assert_eq!(c.encode(&sum).unwrap(), esum);
        }
    }

    #[test]
    fn unique_decoding_radius() {
        let c = code(4, 15, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..100 {
            let msg = random_message(&mut rng, &c);
            let mut word = OuterWord::new(c.encode(&msg).unwrap());
            let erasures = trial % 4;
            let errors = (c.d() - 1 - erasures) / 2;
            let mut positions: Vec<usize> = (0..c.n()).collect();
            for i in 0..errors + erasures {
                let j = rng.gen_range(i..c.n());
                positions.swap(i, j);
            }
            for &p in &positions[..errors] {
                word.symbols[p] ^= rng.gen_range(1..16);
            }
            for &p in &positions[errors..errors + erasures] {
                word.erasures[p] = true;
                word.symbols[p] = rng.gen_range(0..16);
            }
            assert_eq!(c.unique_decode(&word).unwrap(), Some(msg.clone()), "trial {trial}");
            let list = c.list_decode(&word, c.list_threshold().max(c.n() - erasures - errors)).unwrap();
            assert!(list.contains(&msg));
        }
    }

    #[test]
    fn unique_decoding_never_exceeds_its_radius() {
        let c = code(4, 15, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let a = random_message(&mut rng, &c);
            let b = random_message(&mut rng, &c);
            let ea = c.encode(&a).unwrap();
            let eb = c.encode(&b).unwrap();
            // Walk from a's codeword toward b's, d positions at a time.
            let mut word = ea.clone();
            let diff: Vec<usize> = (0..c.n()).filter(|&i| ea[i] != eb[i]).collect();
            for &i in diff.iter().take(c.d()) {
                word[i] = eb[i];
            }
            let w = OuterWord::new(word.clone());
            if let Some(m) = c.unique_decode(&w).unwrap() {
                let em = c.encode(&m).unwrap();
                let dist = em.iter().zip(&word).filter(|(x, y)| x != y).count();
                assert!(2 * dist < c.d());
            }
        }
    }

    #[test]
    fn list_decoder_matches_bruteforce() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for (degree, n, k) in [(4, 15, 2), (4, 16, 4), (3, 8, 2), (4, 15, 3), (5, 16, 2)] {
            let c = code(degree, n, k);
            for _ in 0..20 {
                // Plant two codewords in halves of the word plus noise.
                let a = c.encode(&random_message(&mut rng, &c)).unwrap();
                let b = c.encode(&random_message(&mut rng, &c)).unwrap();
                let mut word: Vec<u16> = (0..n).map(|i| if rng.gen_bool(0.5) { a[i] } else { b[i] }).collect();
                for s in word.iter_mut() {
                    if rng.gen_bool(0.1) {
                        *s = rng.gen_range(0..c.field().order()) as u16;
                    }
                }
                let w = OuterWord::new(word);
                let t = c.list_threshold() + rng.gen_range(0..2);
                assert_eq!(c.list_decode(&w, t).unwrap(), c.bruteforce_list(&w, t).unwrap());
            }
        }
    }

    #[test]
    fn list_decoder_examples() {
        let c = code(4, 15, 2);
        let msg = vec![3, 7];
        let w = OuterWord::new(c.encode(&msg).unwrap());
        assert_eq!(c.list_decode(&w, 15).unwrap(), vec![msg.clone()]);
        assert_eq!(c.bruteforce_list(&w, 15).unwrap(), vec![msg]);
        assert_eq!(c.bruteforce_list(&w, 0).unwrap().len(), 256);
        assert!(matches!(c.list_decode(&w, 5), Err(RsError::AgreementTooLow { threshold: 6, .. })));
        let k1 = code(3, 7, 1);
        let w = OuterWord::new(vec![1, 1, 1, 2, 2, 2, 3]);
        assert_eq!(k1.list_decode(&w, 3).unwrap(), vec![vec![1], vec![2]]);
    }

    #[test]
    fn weight_bound_dominates_exact_counts() {
        for k in 1..=3 {
            let c = code(3, 7, k);
            let counts = c.weight_distribution().unwrap();
            assert_eq!(counts[0], 1);
            for (w, &count) in counts.iter().enumerate() {
                if w > 0 && w < c.d() {
                    assert_eq!(count, 0);
                }
                assert!(count as u128 <= c.count_weight_bound(w), "k = {k}, w = {w}");
            }
        }
    }

    #[test]
    fn dense_chunks() {
        let c = code(4, 16, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = c.encode(&random_message(&mut rng, &c)).unwrap();
        assert_eq!(c.check_dense(&a, &a, 4), Err(RsError::IdenticalWords));
        let far: Vec<u16> = a.iter().map(|s| s ^ 1).collect();
        assert_eq!(c.check_dense(&a, &far, 4).unwrap().fraction, 1.0);
        let b = c.encode(&random_message(&mut rng, &c)).unwrap();
        if a != b {
            let whole = c.check_dense(&a, &b, 16).unwrap();
            assert!(whole.distances[0] >= c.d());
        }
    }
}
