//! Adaptive SCL: retry with a doubled list until the CRC passes.

use crate::decoder::{scl_decode_with, DecodeOutcome, LlrFrame, NodeKernel};
use crate::error::{Error, Result};
use crate::polar::PolarCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AsclConfig {
    l_max: usize,
}

impl AsclConfig {
    /// `l_max` must be a power of two.
    pub fn new(l_max: usize) -> Result<Self> {
        if l_max == 0 || !l_max.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "L_max must be a power of two, got {l_max}"
            )));
        }
        Ok(Self { l_max })
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsclResult {
    pub outcome: DecodeOutcome,
    /// List sizes tried, `1, 2, 4, …`.
    pub attempts: Vec<usize>,
    pub success: bool,
}

impl AsclResult {
    /// List size of the final attempt.
    pub fn final_list_size(&self) -> usize {
        *self.attempts.last().expect("at least one attempt")
    }
}

pub fn ascl_decode(code: &PolarCode, frame: &LlrFrame, cfg: AsclConfig) -> Result<AsclResult> {
    ascl_decode_with(code, frame, cfg, NodeKernel::MinSum)
}

pub fn ascl_decode_with(
    code: &PolarCode,
    frame: &LlrFrame,
    cfg: AsclConfig,
    kernel: NodeKernel,
) -> Result<AsclResult> {
    let mut attempts = Vec::new();
    let mut l = 1;
    loop {
        attempts.push(l);
        let outcome = scl_decode_with(code, frame, l, kernel)?;
        if outcome.crc_pass || l >= cfg.l_max {
            let success = outcome.crc_pass;
            return Ok(AsclResult {
                outcome,
                attempts,
                success,
            });
        }
        l *= 2;
    }
}
