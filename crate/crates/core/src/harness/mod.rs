//! AWGN Monte Carlo harness: channel, BLER runs, TA-SCL end-to-end runs.

mod bler;
mod channel;
mod stats;
mod tascl;

pub use bler::{
    run_bler, BlerPoint, DecoderKind, PointAux, RunSpec, BLER_CSV_HEADER, DEFAULT_MIN_ERRORS,
};
pub use channel::{
    bpsk, frame_rng, generate_frame, llr_from_received, transmit, ChannelSpec, SnrMode, TxFrame,
};
pub use stats::{binomial_sigma, sigma_distance, wilson_interval, Z95};
pub use tascl::{
    run_tascl_end_to_end, run_tascl_on_outcomes, simulate_stage_outcomes, stage_outcome,
    StageOutcome, TaSclRun, TaSclSummary,
};
