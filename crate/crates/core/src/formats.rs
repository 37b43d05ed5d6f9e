//! On-disk formats: code descriptors and edit traces as JSON, symbol
//! payloads as a packed binary file.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{EditOp, EditTrace, Pattern};
use crate::codespec::{CodeSpec, CodecError};
use crate::field::FieldSpec;
use crate::inner_family::{FamilyError, Gamma, InnerFamily, InnerParams, Provenance, Variant, Verification};
use crate::linalg::Matrix;
use crate::reed_solomon::{EvalPointRule, RsCode};
use crate::smallbias::{BiasSpec, Generator, Seed};

pub const SYMBOL_MAGIC: &[u8; 4] = b"IDC1";
pub const DESCRIPTOR_FORMAT: &str = "insdel-code";
pub const TRACE_FORMAT: &str = "insdel-trace";
pub const FORMAT_VERSION: u32 = 1;
const SYMBOL_HEADER_LEN: usize = 9;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("byte {offset}: {message}")]
    At { offset: usize, message: String },
    #[error("invalid descriptor: {0}")]
    Descriptor(String),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

impl FormatError {
    fn at(offset: usize, message: impl Into<String>) -> Self {
        Self::At { offset, message: message.into() }
    }

    /// Byte offset of the violation, when the error is tied to one.
    pub fn offset(&self) -> Option<usize> {
        match self {
            Self::At { offset, .. } => Some(*offset),
            _ => None,
        }
    }

    fn json(text: &str, err: serde_json::Error) -> Self {
        let offset: usize = text.split_inclusive('\n').take(err.line().saturating_sub(1)).map(str::len).sum::<usize>()
            + err.column().saturating_sub(1);
        Self::at(offset, err.to_string())
    }
}

/// Symbols of a fixed bit width, packed least significant bit first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolFile {
    pub bits: u8,
    pub symbols: Vec<u16>,
}

impl SymbolFile {
    pub fn new(bits: u8, symbols: Vec<u16>) -> Result<Self, FormatError> {
        if !(1..=16).contains(&bits) {
            return Err(FormatError::at(4, format!("symbol width {bits} outside 1..=16")));
        }
        if let Some(i) = symbols.iter().position(|&s| bits < 16 && s >> bits != 0) {
            return Err(FormatError::at(
                SYMBOL_HEADER_LEN + i * bits as usize / 8,
                format!("symbol {i} = {} does not fit in {bits} bits", symbols[i]),
            ));
        }
        Ok(Self { bits, symbols })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let b = self.bits as usize;
        let mut out = Vec::with_capacity(SYMBOL_HEADER_LEN + (self.symbols.len() * b).div_ceil(8));
        out.extend_from_slice(SYMBOL_MAGIC);
        out.push(self.bits);
        out.extend_from_slice(&(self.symbols.len() as u32).to_le_bytes());
        let mut payload = vec![0u8; (self.symbols.len() * b).div_ceil(8)];
        for (i, &s) in self.symbols.iter().enumerate() {
            for j in 0..b {
                if s >> j & 1 == 1 {
                    let bit = i * b + j;
                    payload[bit / 8] |= 1 << (bit % 8);
                }
            }
        }
        out.extend_from_slice(&payload);
        out
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self, FormatError> {
        if data.len() < 4 || &data[..4] != SYMBOL_MAGIC {
            return Err(FormatError::at(0, "missing IDC1 magic"));
        }
        if data.len() < SYMBOL_HEADER_LEN {
            return Err(FormatError::at(data.len(), "truncated header"));
        }
        let bits = data[4];
        if !(1..=16).contains(&bits) {
            return Err(FormatError::at(4, format!("symbol width {bits} outside 1..=16")));
        }
        let len = u32::from_le_bytes(data[5..9].try_into().expect("four bytes")) as usize;
        let b = bits as usize;
        let payload_len = (len * b).div_ceil(8);
        let payload = &data[SYMBOL_HEADER_LEN..];
        if payload.len() < payload_len {
            return Err(FormatError::at(data.len(), format!("payload needs {payload_len} bytes, found {}", payload.len())));
        }
        if payload.len() > payload_len {
            return Err(FormatError::at(SYMBOL_HEADER_LEN + payload_len, "trailing bytes after payload"));
        }
        let used = len * b;
        if !used.is_multiple_of(8) && payload[payload_len - 1] >> (used % 8) != 0 {
            return Err(FormatError::at(SYMBOL_HEADER_LEN + payload_len - 1, "nonzero padding bits"));
        }
        let symbols = (0..len)
            .map(|i| (0..b).fold(0u16, |acc, j| {
                let bit = i * b + j;
                acc | u16::from(payload[bit / 8] >> (bit % 8) & 1) << j
            }))
            .collect();
        Ok(Self { bits, symbols })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDescriptor {
    pub degree: u32,
    /// Hex with a `0x` prefix.
    pub modulus: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RsDescriptor {
    pub n: usize,
    pub k: usize,
    pub eval_points: EvalPointRule,
    /// Zero outer symbols appended before inner encoding.
    pub padding: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedDescriptor {
    pub hex: String,
    pub bits: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnerDescriptor {
    pub n: usize,
    pub q_in_bits: u32,
    pub k_prime: usize,
    pub n_prime: usize,
    pub d_prime: usize,
    pub gamma: Gamma,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub s: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<SeedDescriptor>,
    /// One string per code: generator entries row-major, two hex digits per
    /// entry (four when the inner alphabet exceeds 8 bits).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub matrices: Option<Vec<String>>,
}

/// Everything needed to rebuild a [`CodeSpec`]. Serialized with a fixed key
/// order so loading and saving reproduces the file byte for byte.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeDescriptor {
    pub format: String,
    pub version: u32,
    pub variant: Variant,
    pub field: FieldDescriptor,
    pub rs: RsDescriptor,
    pub inner: InnerDescriptor,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub verified: Option<Verification>,
}

fn entry_width(q_in_bits: u32) -> usize {
    if q_in_bits > 8 {
        2
    } else {
        1
    }
}

fn matrix_hex(m: &Matrix, q_in_bits: u32) -> String {
    let bytes: Vec<u8> = match entry_width(q_in_bits) {
        1 => m.data.iter().map(|&v| v as u8).collect(),
        _ => m.data.iter().flat_map(|v| v.to_be_bytes()).collect(),
    };
    hex::encode(bytes)
}

fn matrix_from_hex(text: &str, p: &InnerParams) -> Result<Matrix, FormatError> {
    let bytes = hex::decode(text).map_err(|e| FormatError::Descriptor(format!("matrix hex: {e}")))?;
    let data: Vec<u16> = match entry_width(p.q_in_bits) {
        1 => bytes.iter().map(|&b| u16::from(b)).collect(),
        _ => bytes.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect(),
    };
    if data.len() != p.k_prime * p.n_prime || data.iter().any(|&v| v as usize >= p.q_in()) {
        return Err(FormatError::Descriptor("matrix entries do not match the inner shape".into()));
    }
    Ok(Matrix { rows: p.k_prime, cols: p.n_prime, data })
}

impl CodeDescriptor {
    pub fn from_code(code: &CodeSpec) -> Self {
        let field = code.rs.field().spec();
        let p = &code.family.params;
        let (seed, matrices) = match &code.family.provenance {
            Provenance::SmallBias(seed) => (Some(SeedDescriptor { hex: seed.to_hex(), bits: seed.len() }), None),
            Provenance::Uniform(_) | Provenance::Explicit => {
                (None, Some(code.family.matrices.iter().map(|m| matrix_hex(m, p.q_in_bits)).collect()))
            }
        };
        Self {
            format: DESCRIPTOR_FORMAT.into(),
            version: FORMAT_VERSION,
            variant: p.variant,
            field: FieldDescriptor { degree: field.degree(), modulus: format!("0x{}", field.modulus_hex()) },
            rs: RsDescriptor { n: code.rs.n(), k: code.rs.k(), eval_points: EvalPointRule::AntilogThenZero, padding: code.padding },
            inner: InnerDescriptor {
                n: p.n,
                q_in_bits: p.q_in_bits,
                k_prime: p.k_prime,
                n_prime: p.n_prime,
                d_prime: p.d_prime,
                gamma: p.gamma.clone(),
                t: p.t,
                s: p.s,
                seed,
                matrices,
            },
            verified: code.family.verification.clone(),
        }
    }

    pub fn params(&self) -> Result<InnerParams, FormatError> {
        let i = &self.inner;
        let p = InnerParams {
            variant: self.variant,
            n: i.n,
            codebook_size: 1usize.checked_shl(self.field.degree).unwrap_or(0),
            q_in_bits: i.q_in_bits,
            k_prime: i.k_prime,
            n_prime: i.n_prime,
            d_prime: i.d_prime,
            gamma: i.gamma.clone(),
            t: i.t,
            s: i.s,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn to_code(&self) -> Result<CodeSpec, FormatError> {
        if self.format != DESCRIPTOR_FORMAT || self.version != FORMAT_VERSION {
            return Err(FormatError::Descriptor(format!("unsupported format {} version {}", self.format, self.version)));
        }
        let modulus = self
            .field
            .modulus
            .strip_prefix("0x")
            .and_then(|h| u32::from_str_radix(h, 16).ok())
            .ok_or_else(|| FormatError::Descriptor(format!("modulus {:?} is not 0x-prefixed hex", self.field.modulus)))?;
        let field = FieldSpec::new(self.field.degree, modulus).map_err(|e| FormatError::Descriptor(e.to_string()))?;
        let params = self.params()?;
        let mut family = match (&self.inner.seed, &self.inner.matrices) {
            (Some(sd), None) => {
                let seed = Seed::from_hex(&sd.hex, sd.bits).map_err(|e| FormatError::Descriptor(e.to_string()))?;
                let spec = BiasSpec::with_seed_length(params.random_bits(), sd.bits)
                    .map_err(|e| FormatError::Descriptor(e.to_string()))?;
                let bits = Generator::new(spec).generate(seed).map_err(|e| FormatError::Descriptor(e.to_string()))?;
                InnerFamily::from_bits(params, &bits, Provenance::SmallBias(seed))?
            }
            (None, Some(hexes)) => {
                let matrices = hexes.iter().map(|h| matrix_from_hex(h, &params)).collect::<Result<Vec<_>, _>>()?;
                InnerFamily::from_matrices(params, matrices, Provenance::Explicit)?
            }
            _ => return Err(FormatError::Descriptor("exactly one of inner.seed and inner.matrices is required".into())),
        };
        family.verification = self.verified.clone();
        let rs = RsCode::new(field, self.rs.n, self.rs.k).map_err(CodecError::from)?;
        Ok(CodeSpec::new(rs, family, self.rs.padding)?)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("descriptor serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, FormatError> {
        serde_json::from_str(text).map_err(|e| FormatError::json(text, e))
    }
}

/// A replayable channel run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceFile {
    pub format: String,
    pub version: u32,
    pub pattern: Pattern,
    pub rng_seed: u64,
    pub source_len: usize,
    pub ops: Vec<EditOp>,
}

impl TraceFile {
    pub fn new(pattern: Pattern, rng_seed: u64, source_len: usize, trace: &EditTrace) -> Self {
        Self {
            format: TRACE_FORMAT.into(),
            version: FORMAT_VERSION,
            pattern,
            rng_seed,
            source_len,
            ops: trace.ops.clone(),
        }
    }

    pub fn trace(&self) -> EditTrace {
        EditTrace { ops: self.ops.clone() }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("trace serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, FormatError> {
        let t: Self = serde_json::from_str(text).map_err(|e| FormatError::json(text, e))?;
        if t.format != TRACE_FORMAT || t.version != FORMAT_VERSION {
            return Err(FormatError::Descriptor(format!("unsupported trace format {} version {}", t.format, t.version)));
        }
        Ok(t)
    }
}
