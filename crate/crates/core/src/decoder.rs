//! Successive cancellation (SC) and SC list decoding with CRC-aided selection.
//!
//! LLRs are natural-log ratios, positive meaning bit 0 is more likely. The
//! path metric adds `|llr|` whenever a decision contradicts the LLR sign.

use crate::error::{Error, Result};
use crate::polar::PolarCode;

/// Check-node kernel used for the upper-branch LLR update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NodeKernel {
    /// `sign(a)·sign(b)·min(|a|,|b|)`
    #[default]
    MinSum,
    /// `2·atanh(tanh(a/2)·tanh(b/2))`, evaluated in Jacobian-log form.
    Exact,
}

impl NodeKernel {
    #[inline]
    fn f(self, a: f64, b: f64) -> f64 {
        let s = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
        let m = s * a.abs().min(b.abs());
        match self {
            NodeKernel::MinSum => m,
            NodeKernel::Exact => {
                m + (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p()
            }
        }
    }
}

#[inline]
fn g(a: f64, b: f64, s: u8) -> f64 {
    if s == 0 {
        b + a
    } else {
        b - a
    }
}

#[inline]
fn penalty(llr: f64, bit: u8) -> f64 {
    if (bit == 0 && llr < 0.0) || (bit == 1 && llr > 0.0) {
        llr.abs()
    } else {
        0.0
    }
}

/// One channel observation of a length-`N` codeword.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrFrame {
    values: Vec<f64>,
}

impl LlrFrame {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("LLR {i} is not finite")));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A complete decoding path: source-word decisions and accumulated penalty.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodePath {
    pub decisions: Vec<u8>,
    pub metric: f64,
}

/// Surviving full-depth paths, ascending by metric.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateList {
    pub candidates: Vec<DecodePath>,
    pub list_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    /// `K` information bits (message followed by CRC).
    pub selected: Vec<u8>,
    pub crc_pass: bool,
    pub list: CandidateList,
}

impl DecodeOutcome {
    /// The `K − r` payload bits of the selected candidate.
    pub fn message<'a>(&'a self, code: &PolarCode) -> &'a [u8] {
        &self.selected[..code.message_len()]
    }
}

fn check_frame(code: &PolarCode, frame: &LlrFrame) -> Result<()> {
    if frame.len() != code.len() {
        return Err(Error::LengthMismatch {
            expected: code.len(),
            got: frame.len(),
        });
    }
    Ok(())
}

/// Plain SC decoding with the min-sum kernel.
pub fn sc_decode(code: &PolarCode, frame: &LlrFrame) -> Result<DecodeOutcome> {
    sc_decode_with(code, frame, NodeKernel::MinSum)
}

pub fn sc_decode_with(
    code: &PolarCode,
    frame: &LlrFrame,
    kernel: NodeKernel,
) -> Result<DecodeOutcome> {
    check_frame(code, frame)?;
    let n = code.len();
    let mut u = vec![0u8; n];
    let mut metric = 0.0;
    let mut v = vec![0u8; n];
    sc_node(code, kernel, 0, frame.values(), &mut u, &mut v, &mut metric);
    let selected = code.extract_info(&u);
    let crc_pass = code.crc().is_valid(&selected);
    Ok(DecodeOutcome {
        selected,
        crc_pass,
        list: CandidateList {
            candidates: vec![DecodePath {
                decisions: u,
                metric,
            }],
            list_size: 1,
        },
    })
}

fn sc_node(
    code: &PolarCode,
    kernel: NodeKernel,
    offset: usize,
    llr: &[f64],
    u: &mut [u8],
    v: &mut [u8],
    metric: &mut f64,
) {
    let m = llr.len();
    if m == 1 {
        let bit = if code.is_frozen(offset) || llr[0] >= 0.0 {
            0
        } else {
            1
        };
        *metric += penalty(llr[0], bit);
        u[offset] = bit;
        v[0] = bit;
        return;
    }
    let half = m / 2;
    let (lo, hi) = llr.split_at(half);
    let left: Vec<f64> = lo.iter().zip(hi).map(|(&a, &b)| kernel.f(a, b)).collect();
    let (va, vb) = v.split_at_mut(half);
    sc_node(code, kernel, offset, &left, u, va, metric);
    let right: Vec<f64> = lo
        .iter()
        .zip(hi)
        .zip(va.iter())
        .map(|((&a, &b), &s)| g(a, b, s))
        .collect();
    sc_node(code, kernel, offset + half, &right, u, vb, metric);
    for (a, &b) in va.iter_mut().zip(vb.iter()) {
        *a ^= b;
    }
}

/// SCL decoding with list size `l` and the min-sum kernel.
pub fn scl_decode(code: &PolarCode, frame: &LlrFrame, l: usize) -> Result<DecodeOutcome> {
    scl_decode_with(code, frame, l, NodeKernel::MinSum)
}

pub fn scl_decode_with(
    code: &PolarCode,
    frame: &LlrFrame,
    l: usize,
    kernel: NodeKernel,
) -> Result<DecodeOutcome> {
    if l < 1 {
        return Err(Error::InvalidParameter(
            "list size must be at least 1".into(),
        ));
    }
    check_frame(code, frame)?;
    let n = code.len();
    let dec = ListDecoder { code, kernel, l };
    let surv = dec.node(0, n, frame.values(), &[0.0]);

    let mut order: Vec<usize> = (0..surv.metric.len()).collect();
    order.sort_by(|&a, &b| surv.metric[a].total_cmp(&surv.metric[b]).then(a.cmp(&b)));
    let candidates: Vec<DecodePath> = order
        .iter()
        .map(|&p| DecodePath {
            decisions: surv.u[p * n..(p + 1) * n].to_vec(),
            metric: surv.metric[p],
        })
        .collect();

    let crc = code.crc();
    let mut chosen = None;
    for c in &candidates {
        let info = code.extract_info(&c.decisions);
        if crc.is_valid(&info) {
            chosen = Some(info);
            break;
        }
    }
    let (selected, crc_pass) = match chosen {
        Some(info) => (info, true),
        None => (code.extract_info(&candidates[0].decisions), false),
    };
    Ok(DecodeOutcome {
        selected,
        crc_pass,
        list: CandidateList {
            candidates,
            list_size: l,
        },
    })
}

/// Survivors of one subtree. Per-path data is stored flat, `P × m`.
struct Survivors {
    /// Index of the input path each survivor extends.
    origin: Vec<usize>,
    metric: Vec<f64>,
    /// Source-word decisions of the subtree.
    u: Vec<u8>,
    /// Re-encoded partial sums of the subtree.
    v: Vec<u8>,
}

struct ListDecoder<'a> {
    code: &'a PolarCode,
    kernel: NodeKernel,
    l: usize,
}

impl ListDecoder<'_> {
    fn node(&self, offset: usize, m: usize, llr: &[f64], metric: &[f64]) -> Survivors {
        let paths = metric.len();
        if m == 1 {
            return self.leaf(offset, llr, metric);
        }
        let half = m / 2;
        let mut left_llr = Vec::with_capacity(paths * half);
        for p in 0..paths {
            let (lo, hi) = llr[p * m..(p + 1) * m].split_at(half);
            left_llr.extend(lo.iter().zip(hi).map(|(&a, &b)| self.kernel.f(a, b)));
        }
        let left = self.node(offset, half, &left_llr, metric);

        let mid = left.origin.len();
        let mut right_llr = Vec::with_capacity(mid * half);
        for j in 0..mid {
            let p = left.origin[j];
            let (lo, hi) = llr[p * m..(p + 1) * m].split_at(half);
            let va = &left.v[j * half..(j + 1) * half];
            right_llr.extend(lo.iter().zip(hi).zip(va).map(|((&a, &b), &s)| g(a, b, s)));
        }
        let right = self.node(offset + half, half, &right_llr, &left.metric);

        let out = right.origin.len();
        let mut origin = Vec::with_capacity(out);
        let mut u = Vec::with_capacity(out * m);
        let mut v = Vec::with_capacity(out * m);
        for k in 0..out {
            let j = right.origin[k];
            origin.push(left.origin[j]);
            u.extend_from_slice(&left.u[j * half..(j + 1) * half]);
            u.extend_from_slice(&right.u[k * half..(k + 1) * half]);
            let va = &left.v[j * half..(j + 1) * half];
            let vb = &right.v[k * half..(k + 1) * half];
            v.extend(va.iter().zip(vb).map(|(&a, &b)| a ^ b));
            v.extend_from_slice(vb);
        }
        Survivors {
            origin,
            metric: right.metric,
            u,
            v,
        }
    }

    fn leaf(&self, offset: usize, llr: &[f64], metric: &[f64]) -> Survivors {
        let paths = metric.len();
        if self.code.is_frozen(offset) {
            return Survivors {
                origin: (0..paths).collect(),
                metric: metric
                    .iter()
                    .zip(llr)
                    .map(|(&pm, &x)| pm + penalty(x, 0))
                    .collect(),
                u: vec![0; paths],
                v: vec![0; paths],
            };
        }
        // Candidate 2p+b extends path p with bit b.
        let mut cands: Vec<(f64, f64, usize)> = Vec::with_capacity(2 * paths);
        for p in 0..paths {
            for bit in 0..2u8 {
                let step = penalty(llr[p], bit);
                cands.push((metric[p] + step, step, 2 * p + bit as usize));
            }
        }
        // Ties on the rounded metric fall back to the step penalty, then to
        // creation order. The step key keeps L = 1 identical to hard decisions
        // even when |llr| is below the metric's rounding granularity.
        cands.sort_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then_with(|| a.1.total_cmp(&b.1))
                .then_with(|| a.2.cmp(&b.2))
        });
        cands.truncate(self.l);
        let origin = cands.iter().map(|c| c.2 / 2).collect();
        let bits: Vec<u8> = cands.iter().map(|c| (c.2 % 2) as u8).collect();
        Survivors {
            origin,
            metric: cands.iter().map(|c| c.0).collect(),
            u: bits.clone(),
            v: bits,
        }
    }
}
