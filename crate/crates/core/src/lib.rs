//! Polar codes with CRC-aided SC/SCL decoding, adaptive SCL, the two-staged
//! adaptive SCL pipeline and its Markov-chain overflow model.
//!
//! ```
//! use tascl_core::{construct_code, scl_decode, LlrFrame};
//!
//! let code = construct_code(64, 32, 8, 0.0).unwrap();
//! let message = vec![1u8; code.message_len()];
//! let x = code.encode_message(&message).unwrap();
//! let llr = x.iter().map(|&b| if b == 0 { 4.0 } else { -4.0 }).collect();
//! let out = scl_decode(&code, &LlrFrame::new(llr).unwrap(), 4).unwrap();
//! assert!(out.crc_pass);
//! assert_eq!(out.message(&code), &message[..]);
//! ```

pub mod adaptive;
pub mod crc;
pub mod decoder;
pub mod error;
pub mod harness;
pub mod markov;
pub mod polar;

pub use adaptive::{
    ascl_decode, next_state, pipeline_run, pipeline_run_synthetic, AsclConfig, AsclResult,
    OverflowPolicy, PipelineState, PipelineStats, TaSclConfig,
};
pub use crc::CrcSpec;
pub use decoder::{
    sc_decode, scl_decode, CandidateList, DecodeOutcome, DecodePath, LlrFrame, NodeKernel,
};
pub use error::{Error, Result};
pub use markov::{
    build_matrix, overflow_probability, steady_state, MarkovModel, OverflowReport, SteadyState,
};
pub use polar::{construct_code, encode, PolarCode};
