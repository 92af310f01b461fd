//! TA-SCL end to end: real decoders driven through the slot pipeline.

use std::collections::VecDeque;

use rayon::prelude::*;
use rayon::ThreadPool;

use super::bler::{BlerPoint, PointAux, RunSpec, BATCH};
use super::channel::{generate_frame, ChannelSpec};
use super::stats::binomial_sigma;
use crate::adaptive::{
    pipeline_run, PipelineOptions, PipelineStats, StageDecoders, TaSclConfig, TraceRow,
};
use crate::decoder::{scl_decode_with, NodeKernel};
use crate::error::{Error, Result};
use crate::markov::{bler_bounds, overflow_for, OverflowReport};
use crate::polar::PolarCode;

/// What the two decoders do with one frame.
///
/// `D_l` is only run when `D_s` fails its CRC, since that is the only case in
/// which the pipeline can ask for it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageOutcome {
    pub index: u64,
    /// `Some(block_error)` when `D_s` passed its CRC.
    pub small: Option<bool>,
    /// `D_l` block error, present iff `small` is `None`.
    pub large_error: Option<bool>,
}

impl StageOutcome {
    /// Block error of the unconstrained cascade (`D_l` on every `D_s` failure).
    pub fn cascade_error(&self) -> bool {
        match self.small {
            Some(e) => e,
            None => self
                .large_error
                .expect("D_l outcome present on D_s failure"),
        }
    }
}

/// Decodes frame `index` with `D_s = SCL(l_small)` and, if needed, `D_l = SCL(l_large)`.
pub fn stage_outcome(
    code: &PolarCode,
    channel: &ChannelSpec,
    l_small: usize,
    l_large: usize,
    kernel: NodeKernel,
    seed: u64,
    index: u64,
) -> Result<StageOutcome> {
    let tx = generate_frame(code, channel, seed, index);
    let k = code.message_len();
    let ds = scl_decode_with(code, &tx.llr, l_small, kernel)?;
    if ds.crc_pass {
        return Ok(StageOutcome {
            index,
            small: Some(ds.selected[..k] != tx.message[..]),
            large_error: None,
        });
    }
    let dl = scl_decode_with(code, &tx.llr, l_large, kernel)?;
    Ok(StageOutcome {
        index,
        small: None,
        large_error: Some(dl.selected[..k] != tx.message[..]),
    })
}

/// Stage outcomes for frames `0..frames`, in order.
pub fn simulate_stage_outcomes(
    code: &PolarCode,
    channel: &ChannelSpec,
    l_small: usize,
    l_large: usize,
    kernel: NodeKernel,
    frames: u64,
    seed: u64,
) -> Result<Vec<StageOutcome>> {
    (0..frames)
        .into_par_iter()
        .map(|i| stage_outcome(code, channel, l_small, l_large, kernel, seed, i))
        .collect()
}

/// Lazily decodes frames in parallel batches while the pipeline pulls them
/// one at a time.
struct OutcomeStream<'a> {
    spec: &'a RunSpec,
    cfg: &'a TaSclConfig,
    channel: &'a ChannelSpec,
    pool: Option<&'a ThreadPool>,
    next: u64,
    ready: VecDeque<StageOutcome>,
    error: Option<Error>,
}

impl OutcomeStream<'_> {
    fn fill(&mut self) -> Result<()> {
        let end = (self.next + BATCH).min(self.spec.max_frames);
        let (spec, cfg, channel) = (self.spec, self.cfg, self.channel);
        let work = || {
            (self.next..end)
                .into_par_iter()
                .map(|i| {
                    stage_outcome(
                        &spec.code,
                        channel,
                        cfg.l_small,
                        cfg.l_large,
                        spec.kernel,
                        spec.seed,
                        i,
                    )
                })
                .collect::<Result<Vec<_>>>()
        };
        let batch = match self.pool {
            Some(pool) => pool.install(work)?,
            None => work()?,
        };
        self.ready.extend(batch);
        self.next = end;
        Ok(())
    }
}

impl Iterator for OutcomeStream<'_> {
    type Item = StageOutcome;

    fn next(&mut self) -> Option<StageOutcome> {
        if self.ready.is_empty() && self.next < self.spec.max_frames && self.error.is_none() {
            if let Err(e) = self.fill() {
                self.error = Some(e);
            }
        }
        self.ready.pop_front()
    }
}

/// Replays precomputed outcomes as the pipeline's two decoders.
#[derive(Debug, Default)]
struct ReplayStages {
    cascade_errors: u64,
}

impl StageDecoders for ReplayStages {
    type Frame = StageOutcome;
    /// `true` = block error.
    type Decoded = bool;

    fn decode_small(&mut self, frame: &StageOutcome) -> Option<bool> {
        self.cascade_errors += u64::from(frame.cascade_error());
        frame.small
    }

    fn decode_large(&mut self, frame: &StageOutcome) -> bool {
        frame.large_error.expect("D_l only sees D_s failures")
    }

    fn is_error(&self, _: &StageOutcome, decoded: &bool) -> bool {
        *decoded
    }
}

/// Measured and modelled figures of one TA-SCL run.
#[derive(Debug, Clone, PartialEq)]
pub struct TaSclSummary {
    pub config: TaSclConfig,
    pub frames: u64,
    pub ds_failures: u64,
    /// `D_s` CRC failure rate.
    pub eps_s: f64,
    /// Errors of the cascade with an unlimited buffer.
    pub cascade_errors: u64,
    /// Cascade BLER, the overflow-free reference `ε_l`.
    pub eps_l: f64,
    /// `D_l` error rate over the frames it actually finished.
    pub dl_conditional: f64,
    pub dta_errors: u64,
    pub eps_dta: f64,
    pub overflows: u64,
    pub overflow_emp: f64,
    /// Analytic overflow probability at the measured `ε_s`.
    pub overflow_model: f64,
    /// `(ε_DTA − ε_l)/ε_l · 100`.
    pub loss_sim_pct: f64,
    /// `Pr(Overflow)/ε_l · 100`.
    pub loss_model_pct: f64,
    /// Standard deviation of `ε_DTA − ε_l − Pr(Overflow)` under the model,
    /// including the uncertainty of the measured `ε_s`.
    pub gap_sigma: f64,
    /// `None` when `ε_l` is zero but overflows are predicted.
    pub report: Option<OverflowReport>,
    /// Fewer than ten cascade errors: `ε_l` and the loss figures are unreliable.
    pub low_confidence: bool,
    pub stats: PipelineStats,
}

impl TaSclSummary {
    fn from_counts(cfg: TaSclConfig, stats: PipelineStats, cascade_errors: u64) -> Result<Self> {
        let n = stats.frames_in;
        let rate = |k: u64| {
            if n == 0 {
                f64::NAN
            } else {
                k as f64 / n as f64
            }
        };
        let eps_s = rate(stats.ds_failures);
        let eps_l = rate(cascade_errors);
        let eps_dta = rate(stats.frame_errors);
        let overflow_emp = rate(stats.overflow_count);
        let dl_conditional = if stats.dl_decodes == 0 {
            f64::NAN
        } else {
            stats.dl_errors as f64 / stats.dl_decodes as f64
        };
        let (overflow_model, gap_sigma, report) = if n == 0 {
            (f64::NAN, f64::NAN, None)
        } else {
            let p = overflow_for(cfg.beta, cfg.zeta, eps_s)?;
            let slope = overflow_slope(cfg.beta, cfg.zeta, eps_s)?;
            let gap = eps_dta - eps_l;
            let pooled = 0.5 * (gap + p);
            let var =
                binomial_sigma(pooled, n).powi(2) + (slope * binomial_sigma(eps_s, n)).powi(2);
            (p, var.sqrt(), bler_bounds(p, eps_l).ok())
        };
        let pct = |v: f64| {
            if eps_l > 0.0 {
                v / eps_l * 100.0
            } else {
                f64::NAN
            }
        };
        Ok(Self {
            config: cfg,
            frames: n,
            ds_failures: stats.ds_failures,
            eps_s,
            cascade_errors,
            eps_l,
            dl_conditional,
            dta_errors: stats.frame_errors,
            eps_dta,
            overflows: stats.overflow_count,
            overflow_emp,
            overflow_model,
            loss_sim_pct: pct(eps_dta - eps_l),
            loss_model_pct: pct(overflow_model),
            gap_sigma,
            report,
            low_confidence: cascade_errors < 10,
            stats,
        })
    }

    /// Distance in σ between the simulated and the modelled loss.
    pub fn loss_sigma_distance(&self) -> f64 {
        super::stats::sigma_distance(
            self.eps_dta - self.eps_l,
            self.overflow_model,
            self.gap_sigma,
        )
    }

    /// `ε_l ≤ ε_DTA ≤ ε_l + Pr(Overflow)`, each side allowed `k` σ of slack.
    pub fn sandwich_holds(&self, k: f64) -> bool {
        let gap = self.eps_dta - self.eps_l;
        let lower_sigma = binomial_sigma(self.eps_l, self.frames);
        gap >= -k * lower_sigma && gap <= self.overflow_model + k * self.gap_sigma
    }
}

/// `d Pr(Overflow) / d ε_s` by central difference.
fn overflow_slope(beta: usize, zeta: usize, eps_s: f64) -> Result<f64> {
    let h = 1e-4;
    let lo = (eps_s - h).max(0.0);
    let hi = (eps_s + h).min(1.0);
    if hi <= lo {
        return Ok(0.0);
    }
    Ok((overflow_for(beta, zeta, hi)? - overflow_for(beta, zeta, lo)?) / (hi - lo))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaSclRun {
    pub point: BlerPoint,
    pub trace: Vec<TraceRow>,
}

impl TaSclRun {
    pub fn summary(&self) -> &TaSclSummary {
        match &self.point.aux {
            PointAux::TaScl(s) => s,
            _ => unreachable!("TA-SCL points always carry a summary"),
        }
    }
}

/// Runs the pipeline over precomputed outcomes, one input slot per outcome.
pub fn run_tascl_on_outcomes<I>(
    cfg: &TaSclConfig,
    outcomes: I,
    ebn0_db: f64,
    trace: bool,
) -> Result<TaSclRun>
where
    I: IntoIterator<Item = StageOutcome>,
{
    let mut stages = ReplayStages::default();
    let opts = PipelineOptions { warmup: 0, trace };
    let run = pipeline_run(cfg, &mut stages, outcomes, u64::MAX, opts, |_| {})?;
    finish(cfg, run.stats, stages.cascade_errors, run.trace, ebn0_db)
}

fn finish(
    cfg: &TaSclConfig,
    stats: PipelineStats,
    cascade_errors: u64,
    trace: Vec<TraceRow>,
    ebn0_db: f64,
) -> Result<TaSclRun> {
    let summary = TaSclSummary::from_counts(*cfg, stats, cascade_errors)?;
    let point = BlerPoint::new(
        ebn0_db,
        summary.frames,
        summary.dta_errors,
        PointAux::TaScl(Box::new(summary)),
    );
    Ok(TaSclRun { point, trace })
}

/// TA-SCL over `spec.max_frames` slots, one new frame per slot.
///
/// Decoding is parallel in batches; the pipeline itself is sequential. The
/// error target of `spec` is not used since the run is slot driven.
pub fn run_tascl_end_to_end(
    spec: &RunSpec,
    cfg: &TaSclConfig,
    channel: &ChannelSpec,
    trace: bool,
) -> Result<TaSclRun> {
    cfg.validate()?;
    let pool = if spec.workers > 0 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(spec.workers)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };
    let mut source = OutcomeStream {
        spec,
        cfg,
        channel,
        pool: pool.as_ref(),
        next: 0,
        ready: VecDeque::new(),
        error: None,
    };
    let mut stages = ReplayStages::default();
    let opts = PipelineOptions { warmup: 0, trace };
    let run = pipeline_run(cfg, &mut stages, &mut source, spec.max_frames, opts, |_| {})?;
    if let Some(e) = source.error {
        return Err(e);
    }
    finish(
        cfg,
        run.stats,
        stages.cascade_errors,
        run.trace,
        channel.snr_db,
    )
}
