//! Monte Carlo BLER runs over independent frames.

use rayon::prelude::*;

use super::channel::{generate_frame, ChannelSpec};
use super::stats::wilson_interval;
use super::tascl::{run_tascl_end_to_end, TaSclSummary};
use crate::adaptive::{ascl_decode_with, AsclConfig, TaSclConfig};
use crate::decoder::{sc_decode_with, scl_decode_with, NodeKernel};
use crate::error::{Error, Result};
use crate::polar::PolarCode;

/// Default error target.
pub const DEFAULT_MIN_ERRORS: u64 = 100;

/// Frames decoded per parallel batch.
pub(crate) const BATCH: u64 = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderKind {
    Sc,
    Scl { list_size: usize },
    Ascl { l_max: usize },
    TaScl(TaSclConfig),
}

impl DecoderKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DecoderKind::Sc => Ok(()),
            DecoderKind::Scl { list_size } if list_size >= 1 => Ok(()),
            DecoderKind::Scl { list_size } => Err(Error::InvalidParameter(format!(
                "list size must be at least 1, got {list_size}"
            ))),
            DecoderKind::Ascl { l_max } => AsclConfig::new(l_max).map(|_| ()),
            DecoderKind::TaScl(cfg) => cfg.validate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub code: PolarCode,
    pub decoder: DecoderKind,
    pub kernel: NodeKernel,
    pub max_frames: u64,
    /// Stop once this many block errors are seen; `0` disables the target.
    pub min_errors: u64,
    pub seed: u64,
    /// Worker threads; `0` uses the global pool.
    pub workers: usize,
}

impl RunSpec {
    pub fn new(code: PolarCode, decoder: DecoderKind, max_frames: u64, seed: u64) -> Self {
        Self {
            code,
            decoder,
            kernel: NodeKernel::MinSum,
            max_frames,
            min_errors: DEFAULT_MIN_ERRORS,
            seed,
            workers: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.decoder.validate()
    }
}

/// Decoder-specific extras of a [`BlerPoint`].
#[derive(Debug, Clone, PartialEq, Default)]
pub enum PointAux {
    #[default]
    None,
    /// A-SCL: mean list size of the final attempt and mean number of attempts.
    Adaptive {
        mean_list_size: f64,
        mean_attempts: f64,
    },
    TaScl(Box<TaSclSummary>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlerPoint {
    pub ebn0_db: f64,
    pub frames: u64,
    pub block_errors: u64,
    pub bler: f64,
    pub ci95: (f64, f64),
    pub aux: PointAux,
}

impl BlerPoint {
    pub(crate) fn new(ebn0_db: f64, frames: u64, block_errors: u64, aux: PointAux) -> Self {
        let bler = if frames == 0 {
            0.0
        } else {
            block_errors as f64 / frames as f64
        };
        Self {
            ebn0_db,
            frames,
            block_errors,
            bler,
            ci95: wilson_interval(block_errors, frames),
            aux,
        }
    }
}

/// Header of the per-point CSV.
pub const BLER_CSV_HEADER: &str =
    "ebn0_db,frames,errors,bler,ci_lo,ci_hi,eps_s,eps_l,overflow_emp,overflow_model,loss_pct";

impl BlerPoint {
    /// One CSV row; TA-SCL-only columns are `NaN` for other decoders.
    pub fn to_csv(&self) -> String {
        let nan = f64::NAN;
        let (eps_s, eps_l, ov_emp, ov_model, loss) = match &self.aux {
            PointAux::TaScl(t) => (
                t.eps_s,
                t.eps_l,
                t.overflow_emp,
                t.overflow_model,
                t.loss_sim_pct,
            ),
            _ => (nan, nan, nan, nan, nan),
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.ebn0_db,
            self.frames,
            self.block_errors,
            self.bler,
            self.ci95.0,
            self.ci95.1,
            eps_s,
            eps_l,
            ov_emp,
            ov_model,
            loss
        )
    }
}

/// Runs `f` on a pool with `workers` threads, or on the global pool for `0`.
pub(crate) fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Clone, Copy)]
struct FrameResult {
    error: bool,
    list_size: usize,
    attempts: usize,
}

fn decode_one(spec: &RunSpec, channel: &ChannelSpec, index: u64) -> Result<FrameResult> {
    let code = &spec.code;
    let tx = generate_frame(code, channel, spec.seed, index);
    let (message, list_size, attempts) = match spec.decoder {
        DecoderKind::Sc => (sc_decode_with(code, &tx.llr, spec.kernel)?.selected, 1, 1),
        DecoderKind::Scl { list_size } => (
            scl_decode_with(code, &tx.llr, list_size, spec.kernel)?.selected,
            list_size,
            1,
        ),
        DecoderKind::Ascl { l_max } => {
            let r = ascl_decode_with(code, &tx.llr, AsclConfig::new(l_max)?, spec.kernel)?;
            let l = r.final_list_size();
            (r.outcome.selected, l, r.attempts.len())
        }
        DecoderKind::TaScl(_) => unreachable!("TA-SCL runs through the pipeline"),
    };
    Ok(FrameResult {
        error: message[..code.message_len()] != tx.message[..],
        list_size,
        attempts,
    })
}

/// Measures the block error rate of `spec.decoder` on `channel`.
///
/// Frame `i` always sees the same message and noise, so the result does not
/// depend on the number of workers. TA-SCL is delegated to
/// [`run_tascl_end_to_end`].
pub fn run_bler(spec: &RunSpec, channel: &ChannelSpec) -> Result<BlerPoint> {
    spec.validate()?;
    if let DecoderKind::TaScl(cfg) = spec.decoder {
        return run_tascl_end_to_end(spec, &cfg, channel, false).map(|r| r.point);
    }
    let (frames, errors, list_sum, attempt_sum) = with_workers(spec.workers, || {
        let mut frames = 0u64;
        let mut errors = 0u64;
        let mut list_sum = 0u64;
        let mut attempt_sum = 0u64;
        'outer: while frames < spec.max_frames {
            let end = (frames + BATCH).min(spec.max_frames);
            let batch = (frames..end)
                .into_par_iter()
                .map(|i| decode_one(spec, channel, i))
                .collect::<Result<Vec<_>>>()?;
            for r in batch {
                frames += 1;
                errors += u64::from(r.error);
                list_sum += r.list_size as u64;
                attempt_sum += r.attempts as u64;
                if spec.min_errors > 0 && errors >= spec.min_errors {
                    break 'outer;
                }
            }
        }
        Ok::<_, Error>((frames, errors, list_sum, attempt_sum))
    })??;
    let aux = match spec.decoder {
        DecoderKind::Ascl { .. } if frames > 0 => PointAux::Adaptive {
            mean_list_size: list_sum as f64 / frames as f64,
            mean_attempts: attempt_sum as f64 / frames as f64,
        },
        _ => PointAux::None,
    };
    Ok(BlerPoint::new(channel.snr_db, frames, errors, aux))
}
