//! Variant dispatch over the three decoders.

use serde::Serialize;

use crate::codec_half::{r12_decode, r12_segment_dp, R12DecodeReport};
use crate::codec_highnoise::{hn_decode, hn_partition_dp, HnDecodeReport};
use crate::codec_third::{r13_alignment_dp, r13_decode, R13DecodeReport};
use crate::codespec::{CodeSpec, CodecError};
use crate::inner_family::Variant;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum DecodeReport {
    Hn(HnDecodeReport),
    R13(R13DecodeReport),
    R12(R12DecodeReport),
}

impl DecodeReport {
    pub fn message(&self) -> &[u16] {
        match self {
            Self::Hn(r) => &r.message,
            Self::R13(r) => &r.message,
            Self::R12(r) => &r.message,
        }
    }
}

pub fn decode(code: &CodeSpec, y: &[u16]) -> Result<DecodeReport, CodecError> {
    Ok(match code.variant() {
        Variant::Hn => DecodeReport::Hn(hn_decode(code, y)?),
        Variant::R13 => DecodeReport::R13(r13_decode(code, y)?),
        Variant::R12 => DecodeReport::R12(r12_decode(code, y)?),
    })
}

/// What the inner stage hands to the outer decoder, before outer decoding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InnerStage {
    /// One guess per block, padding included.
    pub blocks: Vec<u16>,
    /// HN: partition cost Δ. R13: blocks left unmatched, `n − f[n][|y|]`.
    /// R12: windows left unmatched, `n/t − |M|`.
    pub delta: usize,
}

pub fn inner_stage(code: &CodeSpec, y: &[u16]) -> InnerStage {
    match code.variant() {
        Variant::Hn => {
            let p = hn_partition_dp(code, y);
            InnerStage { blocks: p.symbols(), delta: p.delta }
        }
        Variant::R13 => {
            let (table, alignment) = r13_alignment_dp(code, y);
            InnerStage {
                blocks: crate::codec_third::reconstruct(code, &alignment),
                delta: code.blocks() - table.last(),
            }
        }
        Variant::R12 => {
            let (table, matching) = r12_segment_dp(code, y);
            InnerStage {
                blocks: crate::codec_half::reconstruct(code, &matching),
                delta: code.blocks() / code.family.params.t() - table.last(),
            }
        }
    }
}

/// Fraction β of outer positions the inner stage gets right.
pub fn recovery_rate(code: &CodeSpec, stage: &InnerStage, truth: &[u16]) -> Result<f64, CodecError> {
    let expected = code.outer_encode(truth)?;
    let n = code.rs.n();
    Ok(expected.iter().zip(&stage.blocks).take(n).filter(|(a, b)| a == b).count() as f64 / n as f64)
}
