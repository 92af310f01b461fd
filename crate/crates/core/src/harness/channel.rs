//! BPSK over AWGN and the per-frame random streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::decoder::LlrFrame;
use crate::error::{Error, Result};
use crate::polar::PolarCode;

/// How the SNR figure is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnrMode {
    /// `Eb/N0`, with `R = K/N` (CRC bits counted as information).
    #[default]
    EbN0,
    /// `Es/N0` per BPSK symbol.
    EsN0,
}

/// BPSK (`0 → +1`, `1 → −1`) over real AWGN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    pub snr_db: f64,
    pub rate: f64,
    pub mode: SnrMode,
    noise_sigma: f64,
}

impl ChannelSpec {
    pub fn new(snr_db: f64, rate: f64, mode: SnrMode) -> Result<Self> {
        if !snr_db.is_finite() || !(rate > 0.0 && rate <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "bad channel: snr {snr_db} dB, rate {rate}"
            )));
        }
        let lin = 10f64.powf(snr_db / 10.0);
        let var = match mode {
            SnrMode::EbN0 => 1.0 / (2.0 * rate * lin),
            SnrMode::EsN0 => 1.0 / (2.0 * lin),
        };
        Ok(Self {
            snr_db,
            rate,
            mode,
            noise_sigma: var.sqrt(),
        })
    }

    /// `Eb/N0` channel at the code's rate.
    pub fn ebn0(code: &PolarCode, ebn0_db: f64) -> Result<Self> {
        Self::new(ebn0_db, code.rate(), SnrMode::EbN0)
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    /// LLR scale `2/σ²`.
    pub fn llr_scale(&self) -> f64 {
        2.0 / (self.noise_sigma * self.noise_sigma)
    }
}

pub fn bpsk(codeword: &[u8]) -> Vec<f64> {
    codeword
        .iter()
        .map(|&b| if b == 0 { 1.0 } else { -1.0 })
        .collect()
}

/// `2y/σ²` for each received sample.
pub fn llr_from_received(received: &[f64], channel: &ChannelSpec) -> Result<LlrFrame> {
    let scale = channel.llr_scale();
    LlrFrame::new(received.iter().map(|y| scale * y).collect())
}

/// Encodes `message` (with CRC), modulates and adds noise; returns channel LLRs.
pub fn transmit<R: Rng + ?Sized>(
    code: &PolarCode,
    message: &[u8],
    channel: &ChannelSpec,
    rng: &mut R,
) -> Result<LlrFrame> {
    let sigma = channel.noise_sigma();
    let mut y = bpsk(&code.encode_message(message)?);
    for v in &mut y {
        let n: f64 = rng.sample(StandardNormal);
        *v += sigma * n;
    }
    llr_from_received(&y, channel)
}

/// Independent random stream for frame `index` under `seed`.
pub fn frame_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A transmitted frame with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct TxFrame {
    pub index: u64,
    pub message: Vec<u8>,
    pub llr: LlrFrame,
}

/// Draws the message and noise of frame `index` from its own stream.
pub fn generate_frame(code: &PolarCode, channel: &ChannelSpec, seed: u64, index: u64) -> TxFrame {
    let mut rng = frame_rng(seed, index);
    let message: Vec<u8> = (0..code.message_len())
        .map(|_| rng.random_range(0..2u8))
        .collect();
    let llr = transmit(code, &message, channel, &mut rng).expect("message length matches code");
    TxFrame {
        index,
        message,
        llr,
    }
}
