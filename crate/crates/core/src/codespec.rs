//! A concatenated code: Reed-Solomon outer code plus one inner code per
//! outer position. An outer symbol is the message index of its inner block.

use thiserror::Error;

use crate::inner_family::{FamilyError, InnerFamily, Variant};
use crate::reed_solomon::{OuterWord, RsCode, RsError};

#[derive(Debug, Error)]
pub enum CodecError {
    #[error(transparent)]
    Rs(#[from] RsError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error("code mismatch: {0}")]
    Mismatch(String),
    #[error("decoding failed: {0}")]
    DecodeFailure(String),
    #[error("{count} list entries lie within the selection threshold {threshold}")]
    Ambiguous { count: usize, threshold: f64 },
    #[error("window starting at block {start} does not fit in {blocks} blocks")]
    Window { start: usize, blocks: usize },
}

#[derive(Clone, Debug)]
pub struct CodeSpec {
    pub rs: RsCode,
    pub family: InnerFamily,
    /// Zero outer symbols appended so the block count is a multiple of `t`.
    pub padding: usize,
}

impl CodeSpec {
    pub fn new(rs: RsCode, family: InnerFamily, padding: usize) -> Result<Self, CodecError> {
        let p = &family.params;
        if p.codebook_size != rs.field().order() {
            return Err(CodecError::Mismatch(format!(
                "inner codebooks hold {} messages but the outer field has {} symbols",
                p.codebook_size,
                rs.field().order()
            )));
        }
        if p.n != rs.n() + padding {
            return Err(CodecError::Mismatch(format!(
                "{} inner codes for {} outer symbols plus {padding} padding",
                p.n,
                rs.n()
            )));
        }
        if p.variant == Variant::R12 && !p.n.is_multiple_of(p.t()) {
            return Err(CodecError::Mismatch(format!("{} blocks are not a multiple of t = {}", p.n, p.t())));
        }
        Ok(Self { rs, family, padding })
    }

    /// Padding that rounds `n` up to a multiple of `t`.
    pub fn padding_for(n: usize, t: usize) -> usize {
        n.div_ceil(t) * t - n
    }

    pub fn variant(&self) -> Variant {
        self.family.params.variant
    }

    pub fn blocks(&self) -> usize {
        self.family.params.n
    }

    pub fn block_len(&self) -> usize {
        self.family.params.n_prime
    }

    /// `N`, the codeword length in inner symbols.
    pub fn word_len(&self) -> usize {
        self.blocks() * self.block_len()
    }

    pub fn message_len(&self) -> usize {
        self.rs.k()
    }

    pub fn is_verified(&self) -> bool {
        self.family.verification.is_some()
    }

    /// Message bits per codeword symbol.
    pub fn rate(&self) -> f64 {
        let symbol_bits = self.rs.field().spec().degree() as f64;
        let inner_bits = self.family.params.q_in_bits as f64;
        (self.rs.k() as f64 * symbol_bits) / (self.word_len() as f64 * inner_bits)
    }

    /// Outer codeword followed by the zero padding.
    pub fn outer_encode(&self, message: &[u16]) -> Result<Vec<u16>, CodecError> {
        let mut outer = self.rs.encode(message)?;
        outer.resize(self.blocks(), 0);
        Ok(outer)
    }

    pub fn encode_outer_word(&self, outer: &[u16]) -> Vec<u16> {
        outer
            .iter()
            .enumerate()
            .flat_map(|(i, &s)| self.family.codeword(i, s as usize).iter().copied())
            .collect()
    }

    pub fn encode(&self, message: &[u16]) -> Result<Vec<u16>, CodecError> {
        Ok(self.encode_outer_word(&self.outer_encode(message)?))
    }

    /// Outer word from per-block symbols, padding dropped.
    pub fn outer_word(&self, blocks: &[u16]) -> OuterWord {
        OuterWord::new(blocks[..self.rs.n()].to_vec())
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::field::FieldSpec;
    use crate::inner_family::{sample_family, BitSource, InnerParams, Variant};

    /// Unverified random code for structural tests.
    pub fn random_code(variant: Variant, n: usize, k: usize, n_prime: usize, d_prime: usize, seed: u64) -> CodeSpec {
        let degree = match variant {
            Variant::Hn => 4,
            _ => (usize::BITS - (n - 1).leading_zeros()).max(1),
        };
        let (params, padding) = match variant {
            Variant::Hn => (InnerParams::hn(n, 16, 8, n_prime, "1/4".parse().unwrap()).unwrap(), 0),
            Variant::R13 => (InnerParams::r13(n, degree as usize, n_prime, d_prime).unwrap(), 0),
            Variant::R12 => {
                let pad = CodeSpec::padding_for(n, 2);
                (InnerParams::r12(n + pad, degree as usize, n_prime, d_prime, 2, 1).unwrap(), pad)
            }
        };
        let rs = RsCode::new(FieldSpec::standard(degree).unwrap(), n, k).unwrap();
        let family = (seed..).find_map(|s| sample_family(&params, &BitSource::Uniform(s)).ok()).unwrap();
        CodeSpec::new(rs, family, padding).unwrap()
    }

    /// Code whose family was found by the seed search over 24-bit seeds.
    pub fn verified_code(params: InnerParams, k: usize) -> CodeSpec {
        use crate::inner_family::{search_family, SearchOptions};
        use crate::smallbias::BiasSpec;
        let degree = params.k_prime as u32;
        let pad = if params.variant == Variant::R12 { CodeSpec::padding_for(params.n, params.t()) } else { 0 };
        let spec = BiasSpec::with_seed_length(params.random_bits(), 24).unwrap();
        let family = search_family(&params, spec, &SearchOptions::default()).unwrap().family;
        let rs = RsCode::new(FieldSpec::standard(degree).unwrap(), params.n - pad, k).unwrap();
        CodeSpec::new(rs, family, pad).unwrap()
    }
}
