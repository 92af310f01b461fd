//! Adaptive SCL and the two-staged adaptive SCL pipeline.

mod ascl;
mod pipeline;

pub use ascl::{ascl_decode, ascl_decode_with, AsclConfig, AsclResult};
pub use pipeline::{
    is_hazard, next_state, pipeline_run, pipeline_run_synthetic, BernoulliStages, OutputRecord,
    OverflowPolicy, PipelineOptions, PipelineRun, PipelineState, PipelineStats, Route,
    StageDecoders, TaSclConfig, TraceRow, SYNTHETIC_WARMUP,
};
pub(crate) use pipeline::{state_count, step};
