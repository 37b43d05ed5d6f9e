//! Linear insertion/deletion codes built by concatenating Reed-Solomon outer
//! codes with derandomized binary or small-alphabet inner codes, together
//! with their decoders, an insdel channel and a subspace LCS lab.

pub mod channel;
pub mod codec;
pub mod codec_half;
pub mod codec_highnoise;
pub mod codec_third;
pub mod codespec;
pub mod field;
pub mod formats;
pub mod inner_family;
pub mod linalg;
pub mod reed_solomon;
pub mod seqmetrics;
pub mod smallbias;
pub mod subspace_lcs;
