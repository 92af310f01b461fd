//! Slot-accurate simulator of the two-staged adaptive SCL pipeline.
//!
//! Time advances in slots of one fast-decoder (`D_s`) decode. Every slot:
//!
//! 1. the slow decoder `D_l` works one slot; when its frame completes, the head
//!    of the LLR buffer moves into `D_l` with `β` slots to go;
//! 2. `D_s` decodes the slot's new frame. On a CRC failure the frame goes to an
//!    idle `D_l`, else to the LLR buffer, else the buffer overflows and the
//!    configured [`OverflowPolicy`] drops one frame;
//! 3. finished frames leave the reorder buffer in arrival order.
//!
//! The composite state `x = β·i_ζ + i_β` after each slot follows
//! [`next_state`] exactly.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Which frame is abandoned when a failed frame finds the LLR buffer full.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverflowPolicy {
    /// Abandon the frame inside `D_l`; the buffer head takes its place.
    #[default]
    DropInProgress,
    /// Abandon the newly failed frame.
    DropNewest,
}

impl std::str::FromStr for OverflowPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "drop-in-progress" | "DropInProgress" => Ok(Self::DropInProgress),
            "drop-newest" | "DropNewest" => Ok(Self::DropNewest),
            other => Err(Error::InvalidParameter(format!(
                "unknown overflow policy '{other}'"
            ))),
        }
    }
}

/// Parameters of `D_TA(β, ζ)` and its two component list sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaSclConfig {
    pub beta: usize,
    pub zeta: usize,
    pub l_small: usize,
    pub l_large: usize,
    pub overflow_policy: OverflowPolicy,
}

impl TaSclConfig {
    pub fn new(
        beta: usize,
        zeta: usize,
        l_small: usize,
        l_large: usize,
        overflow_policy: OverflowPolicy,
    ) -> Result<Self> {
        let cfg = Self {
            beta,
            zeta,
            l_small,
            l_large,
            overflow_policy,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Timing-only configuration for model work (`L_s = L_l = 1`).
    pub fn timing(beta: usize, zeta: usize) -> Result<Self> {
        Self::new(beta, zeta, 1, 1, OverflowPolicy::DropInProgress)
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta < 1 {
            return Err(Error::InvalidParameter("beta must be at least 1".into()));
        }
        if self.l_small < 1 || self.l_small > self.l_large {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= L_s <= L_l, got L_s={} L_l={}",
                self.l_small, self.l_large
            )));
        }
        Ok(())
    }

    /// Number of states `S = βζ + β + 1`.
    pub fn state_count(&self) -> usize {
        state_count(self.beta, self.zeta)
    }

    pub fn max_state(&self) -> usize {
        self.beta * (self.zeta + 1)
    }
}

pub(crate) fn state_count(beta: usize, zeta: usize) -> usize {
    beta * zeta + beta + 1
}

/// Buffer occupancy and remaining `D_l` time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineState {
    pub i_zeta: usize,
    pub i_beta: usize,
}

impl PipelineState {
    /// Time to clear the buffer, `β·i_ζ + i_β`.
    pub fn x(&self, beta: usize) -> usize {
        beta * self.i_zeta + self.i_beta
    }

    /// Inverse of [`PipelineState::x`]. A nonzero multiple of `β` means `D_l`
    /// holds a fresh frame (`i_β = β`), never an idle `D_l` with a queue.
    pub fn from_x(x: usize, beta: usize) -> Self {
        if x == 0 {
            return Self {
                i_zeta: 0,
                i_beta: 0,
            };
        }
        let i_zeta = (x - 1) / beta;
        Self {
            i_zeta,
            i_beta: x - beta * i_zeta,
        }
    }

    pub fn is_hazard(&self, zeta: usize) -> bool {
        self.i_zeta == zeta && self.i_beta > 1
    }
}

/// True iff a `D_s` failure in state `x` overflows the buffer: `x > βζ + 1`.
pub fn is_hazard(x: usize, beta: usize, zeta: usize) -> bool {
    x > beta * zeta + 1
}

/// State after one slot, given whether `D_s` failed in that slot.
pub fn next_state(x: usize, ds_failed: bool, cfg: &TaSclConfig) -> Result<usize> {
    let max = cfg.max_state();
    if x > max {
        return Err(Error::StateOutOfRange { state: x, max });
    }
    Ok(step(x, ds_failed, cfg.beta, max))
}

#[inline]
pub(crate) fn step(x: usize, ds_failed: bool, beta: usize, max: usize) -> usize {
    let drained = x.saturating_sub(1);
    if ds_failed {
        (drained + beta).min(max)
    } else {
        drained
    }
}

/// The two component decoders as seen by the pipeline.
pub trait StageDecoders {
    type Frame;
    type Decoded;

    /// Runs `D_s`. `Some` when the result passes CRC, `None` to forward the frame.
    fn decode_small(&mut self, frame: &Self::Frame) -> Option<Self::Decoded>;

    /// Runs `D_l`; its result is final whether or not it passes CRC.
    fn decode_large(&mut self, frame: &Self::Frame) -> Self::Decoded;

    /// Whether `decoded` is a block error for `frame`.
    fn is_error(&self, frame: &Self::Frame, decoded: &Self::Decoded) -> bool;
}

/// How a frame left the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Small,
    Large,
    Dropped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputRecord<D> {
    pub index: u64,
    pub arrival_slot: u64,
    pub release_slot: u64,
    pub route: Route,
    /// `None` for dropped frames.
    pub decoded: Option<D>,
    pub error: bool,
}

/// One row of the per-slot schedule trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceRow {
    pub slot: u64,
    pub state_x: usize,
    pub i_zeta: usize,
    pub i_beta: usize,
    pub ds_fail: bool,
    pub overflow: bool,
    /// Highest frame index released from the reorder buffer in this slot.
    pub frame_out_index: Option<u64>,
}

impl TraceRow {
    pub const CSV_HEADER: &'static str =
        "slot,state_x,i_zeta,i_beta,ds_fail,overflow,frame_out_index";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.slot,
            self.state_x,
            self.i_zeta,
            self.i_beta,
            u8::from(self.ds_fail),
            u8::from(self.overflow),
            self.frame_out_index.map_or(-1, |i| i as i64)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PipelineOptions {
    /// Input slots excluded from `state_histogram` and `measured_overflows`.
    pub warmup: u64,
    pub trace: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineStats {
    /// Input slots run (one new frame each).
    pub slots: u64,
    /// Extra slots spent draining `D_l` after the last input.
    pub drain_slots: u64,
    pub frames_in: u64,
    pub frames_out: u64,
    pub ds_failures: u64,
    pub dl_decodes: u64,
    pub dl_errors: u64,
    pub overflow_count: u64,
    /// Overflows in input slots at or after the warm-up.
    pub measured_overflows: u64,
    pub frame_errors: u64,
    /// Occupancy of each state `x` after each measured input slot.
    pub state_histogram: Vec<u64>,
    /// `latency_histogram[k]` frames took `k` slots from arrival to release.
    pub latency_histogram: Vec<u64>,
    pub max_output_buffer_depth: usize,
    pub warmup: u64,
}

impl PipelineStats {
    pub fn measured_slots(&self) -> u64 {
        self.state_histogram.iter().sum()
    }

    /// Overflows per measured slot.
    pub fn overflow_rate(&self) -> f64 {
        ratio(self.measured_overflows, self.measured_slots())
    }

    pub fn normalized_histogram(&self) -> Vec<f64> {
        let total = self.measured_slots();
        self.state_histogram
            .iter()
            .map(|&c| ratio(c, total))
            .collect()
    }

    pub fn mean_latency(&self) -> f64 {
        let n: u64 = self.latency_histogram.iter().sum();
        let s: u64 = self
            .latency_histogram
            .iter()
            .enumerate()
            .map(|(k, &c)| k as u64 * c)
            .sum();
        ratio(s, n)
    }

    pub fn in_flight(&self) -> u64 {
        self.frames_in - self.frames_out
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineRun {
    pub stats: PipelineStats,
    pub trace: Vec<TraceRow>,
}

struct Job<F> {
    index: u64,
    arrival: u64,
    frame: F,
    remaining: usize,
}

struct Queued<F> {
    index: u64,
    arrival: u64,
    frame: F,
}

struct Done<D> {
    arrival: u64,
    route: Route,
    decoded: Option<D>,
    error: bool,
}

/// Runs the pipeline for up to `slots` input slots, then drains `D_l`.
///
/// The source is polled once per slot; when it runs dry the run stops taking
/// input early and drains. Every frame taken in is handed to `sink` exactly
/// once, in arrival order.
pub fn pipeline_run<S, I, K>(
    cfg: &TaSclConfig,
    stages: &mut S,
    source: I,
    slots: u64,
    opts: PipelineOptions,
    mut sink: K,
) -> Result<PipelineRun>
where
    S: StageDecoders,
    I: IntoIterator<Item = S::Frame>,
    K: FnMut(OutputRecord<S::Decoded>),
{
    cfg.validate()?;
    let beta = cfg.beta;
    let zeta = cfg.zeta;
    let mut stats = PipelineStats {
        state_histogram: vec![0; cfg.state_count()],
        warmup: opts.warmup,
        ..Default::default()
    };
    let mut trace = Vec::new();

    let mut source = source.into_iter();
    let mut dl: Option<Job<S::Frame>> = None;
    let mut buffer: VecDeque<Queued<S::Frame>> = VecDeque::with_capacity(zeta);
    // reorder[i] holds frame `next_out + i` once it is finished
    let mut reorder: VecDeque<Option<Done<S::Decoded>>> = VecDeque::new();
    let mut next_out: u64 = 0;
    let mut waiting: usize = 0;

    let mut slot: u64 = 0;
    let mut input_open = true;
    loop {
        if input_open && slot >= slots {
            input_open = false;
        }
        let frame = if input_open { source.next() } else { None };
        let had_input = frame.is_some();
        if !had_input {
            input_open = false;
            if dl.is_none() {
                break;
            }
        }

        // D_l works one slot.
        if let Some(job) = dl.as_mut() {
            job.remaining -= 1;
            if job.remaining == 0 {
                let job = dl.take().unwrap();
                let decoded = stages.decode_large(&job.frame);
                let error = stages.is_error(&job.frame, &decoded);
                stats.dl_decodes += 1;
                stats.dl_errors += u64::from(error);
                finish(
                    &mut reorder,
                    &mut waiting,
                    next_out,
                    job.index,
                    Done {
                        arrival: job.arrival,
                        route: Route::Large,
                        decoded: Some(decoded),
                        error,
                    },
                );
                dl = buffer.pop_front().map(|q| Job {
                    index: q.index,
                    arrival: q.arrival,
                    frame: q.frame,
                    remaining: beta,
                });
            }
        }

        // D_s takes the slot's new frame.
        let mut ds_fail = false;
        let mut overflow = false;
        if let Some(frame) = frame {
            let index = stats.frames_in;
            stats.frames_in += 1;
            reorder.push_back(None);
            match stages.decode_small(&frame) {
                Some(decoded) => {
                    let error = stages.is_error(&frame, &decoded);
                    let done = Done {
                        arrival: slot,
                        route: Route::Small,
                        decoded: Some(decoded),
                        error,
                    };
                    finish(&mut reorder, &mut waiting, next_out, index, done);
                }
                None => {
                    ds_fail = true;
                    stats.ds_failures += 1;
                    let queued = Queued {
                        index,
                        arrival: slot,
                        frame,
                    };
                    if dl.is_none() {
                        dl = Some(Job {
                            index,
                            arrival: slot,
                            frame: queued.frame,
                            remaining: beta,
                        });
                    } else if buffer.len() < zeta {
                        buffer.push_back(queued);
                    } else {
                        overflow = true;
                        stats.overflow_count += 1;
                        if slot >= opts.warmup {
                            stats.measured_overflows += 1;
                        }
                        let (dropped_index, dropped_arrival) = match cfg.overflow_policy {
                            OverflowPolicy::DropInProgress => {
                                let old = dl.take().unwrap();
                                buffer.push_back(queued);
                                let head = buffer.pop_front().unwrap();
                                dl = Some(Job {
                                    index: head.index,
                                    arrival: head.arrival,
                                    frame: head.frame,
                                    remaining: beta,
                                });
                                (old.index, old.arrival)
                            }
                            OverflowPolicy::DropNewest => (queued.index, queued.arrival),
                        };
                        let done = Done {
                            arrival: dropped_arrival,
                            route: Route::Dropped,
                            decoded: None,
                            error: true,
                        };
                        finish(&mut reorder, &mut waiting, next_out, dropped_index, done);
                    }
                }
            }
        }

        // Release in order.
        let mut released = None;
        while let Some(Some(_)) = reorder.front() {
            let done = reorder.pop_front().unwrap().unwrap();
            waiting -= 1;
            let latency = (slot - done.arrival + 1) as usize;
            if stats.latency_histogram.len() <= latency {
                stats.latency_histogram.resize(latency + 1, 0);
            }
            stats.latency_histogram[latency] += 1;
            stats.frames_out += 1;
            stats.frame_errors += u64::from(done.error);
            released = Some(next_out);
            sink(OutputRecord {
                index: next_out,
                arrival_slot: done.arrival,
                release_slot: slot,
                route: done.route,
                decoded: done.decoded,
                error: done.error,
            });
            next_out += 1;
        }
        stats.max_output_buffer_depth = stats.max_output_buffer_depth.max(waiting);

        let state = PipelineState {
            i_zeta: buffer.len(),
            i_beta: dl.as_ref().map_or(0, |j| j.remaining),
        };
        let x = state.x(beta);
        if had_input {
            stats.slots += 1;
            if slot >= opts.warmup {
                stats.state_histogram[x] += 1;
            }
        } else {
            stats.drain_slots += 1;
        }
        if opts.trace {
            trace.push(TraceRow {
                slot,
                state_x: x,
                i_zeta: state.i_zeta,
                i_beta: state.i_beta,
                ds_fail,
                overflow,
                frame_out_index: released,
            });
        }
        slot += 1;
    }
    debug_assert!(reorder.is_empty());
    Ok(PipelineRun { stats, trace })
}

fn finish<D>(
    reorder: &mut VecDeque<Option<Done<D>>>,
    waiting: &mut usize,
    next_out: u64,
    index: u64,
    done: Done<D>,
) {
    let pos = (index - next_out) as usize;
    debug_assert!(reorder[pos].is_none());
    reorder[pos] = Some(done);
    *waiting += 1;
}

/// Independent Bernoulli outcomes standing in for real decoders.
#[derive(Debug, Clone)]
pub struct BernoulliStages {
    eps_s: f64,
    eps_l: f64,
    rng: ChaCha8Rng,
}

impl BernoulliStages {
    pub fn new(eps_s: f64, eps_l: f64, seed: u64) -> Result<Self> {
        for (name, p) in [("eps_s", eps_s), ("eps_l", eps_l)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {p} is not a probability"
                )));
            }
        }
        Ok(Self {
            eps_s,
            eps_l,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }
}

impl StageDecoders for BernoulliStages {
    type Frame = ();
    /// `true` = block error.
    type Decoded = bool;

    fn decode_small(&mut self, _: &()) -> Option<bool> {
        if self.rng.random_bool(self.eps_s) {
            None
        } else {
            Some(false)
        }
    }

    fn decode_large(&mut self, _: &()) -> bool {
        self.rng.random_bool(self.eps_l)
    }

    fn is_error(&self, _: &(), decoded: &bool) -> bool {
        *decoded
    }
}

/// Warm-up used by [`pipeline_run_synthetic`] before collecting statistics.
pub const SYNTHETIC_WARMUP: u64 = 1_000;

/// Pipeline run with Bernoulli `D_s`/`D_l` failures, deterministic in `seed`.
pub fn pipeline_run_synthetic(
    cfg: &TaSclConfig,
    eps_s: f64,
    eps_l: f64,
    slots: u64,
    seed: u64,
) -> Result<PipelineStats> {
    let mut stages = BernoulliStages::new(eps_s, eps_l, seed)?;
    let opts = PipelineOptions {
        warmup: SYNTHETIC_WARMUP.min(slots / 10),
        trace: false,
    };
    let run = pipeline_run(cfg, &mut stages, std::iter::repeat(()), slots, opts, |_| {})?;
    Ok(run.stats)
}
