//! Markov-chain model of `D_TA(β, ζ)`.
//!
//! States are `x = β·i_ζ + i_β ∈ [0, β(ζ+1)]`. From state `x` the chain moves
//! to `max(x−1, 0)` with probability `1 − ε_s` and to
//! `min(max(x−1, 0) + β, β(ζ+1))` with probability `ε_s`.

use crate::adaptive::{state_count, step};
use crate::error::{Error, Result};

/// Transition matrix of the pipeline state chain.
///
/// Every row has at most two non-zero entries, so the matrix is kept
/// implicitly; [`MarkovModel::dense`] materialises it.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovModel {
    beta: usize,
    zeta: usize,
    eps_s: f64,
}

/// Long-run state occupancy `λ∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub lambda_inf: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverflowReport {
    pub p_overflow: f64,
    pub bler_lower: f64,
    pub bler_upper: f64,
    /// `Pr(Overflow) / ε_l · 100`.
    pub performance_loss_bound: f64,
}

/// Power-iteration defaults.
pub const DEFAULT_TOL: f64 = 1e-12;
pub const MAX_ITERATIONS: usize = 10_000_000;

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} = {p} is not a probability"
        )))
    }
}

pub fn build_matrix(beta: usize, zeta: usize, eps_s: f64) -> Result<MarkovModel> {
    if beta < 1 {
        return Err(Error::InvalidParameter("beta must be at least 1".into()));
    }
    check_probability("eps_s", eps_s)?;
    Ok(MarkovModel { beta, zeta, eps_s })
}

impl MarkovModel {
    pub fn beta(&self) -> usize {
        self.beta
    }

    pub fn zeta(&self) -> usize {
        self.zeta
    }

    pub fn eps_s(&self) -> f64 {
        self.eps_s
    }

    /// `S = βζ + β + 1`.
    pub fn s_count(&self) -> usize {
        state_count(self.beta, self.zeta)
    }

    pub fn entry(&self, from: usize, to: usize) -> f64 {
        let max = self.s_count() - 1;
        let mut p = 0.0;
        if step(from, false, self.beta, max) == to {
            p += 1.0 - self.eps_s;
        }
        if step(from, true, self.beta, max) == to {
            p += self.eps_s;
        }
        p
    }

    pub fn row(&self, from: usize) -> Vec<f64> {
        (0..self.s_count()).map(|to| self.entry(from, to)).collect()
    }

    /// Row-major `S × S` matrix `P`.
    pub fn dense(&self) -> Vec<f64> {
        (0..self.s_count()).flat_map(|x| self.row(x)).collect()
    }

    /// `λ·P`.
    pub fn propagate(&self, lambda: &[f64]) -> Vec<f64> {
        let s = self.s_count();
        let max = s - 1;
        let mut next = vec![0.0; s];
        for (x, &mass) in lambda.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            next[step(x, false, self.beta, max)] += mass * (1.0 - self.eps_s);
            next[step(x, true, self.beta, max)] += mass * self.eps_s;
        }
        next
    }

    /// Dense `P^k` by binary exponentiation.
    pub fn power(&self, mut k: u64) -> Vec<f64> {
        let s = self.s_count();
        let mut result = vec![0.0; s * s];
        for i in 0..s {
            result[i * s + i] = 1.0;
        }
        let mut base = self.dense();
        while k > 0 {
            if k & 1 == 1 {
                result = mat_mul(&result, &base, s);
            }
            base = mat_mul(&base, &base, s);
            k >>= 1;
        }
        result
    }
}

fn mat_mul(a: &[f64], b: &[f64], s: usize) -> Vec<f64> {
    let mut c = vec![0.0; s * s];
    for i in 0..s {
        for k in 0..s {
            let aik = a[i * s + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..s {
                c[i * s + j] += aik * b[k * s + j];
            }
        }
    }
    c
}

/// Steady state by power iteration from `λ0 = (1, 0, …, 0)`.
pub fn steady_state(model: &MarkovModel, tol: f64) -> Result<SteadyState> {
    let mut start = vec![0.0; model.s_count()];
    start[0] = 1.0;
    steady_state_from(model, &start, tol)
}

/// Power iteration from an arbitrary initial distribution; stops once the L1
/// change between successive iterates is below `tol`.
pub fn steady_state_from(model: &MarkovModel, initial: &[f64], tol: f64) -> Result<SteadyState> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if initial.len() != model.s_count() {
        return Err(Error::LengthMismatch {
            expected: model.s_count(),
            got: initial.len(),
        });
    }
    let mut lambda = initial.to_vec();
    for it in 1..=MAX_ITERATIONS {
        let next = model.propagate(&lambda);
        let delta: f64 = next.iter().zip(&lambda).map(|(a, b)| (a - b).abs()).sum();
        lambda = next;
        if delta < tol {
            let total: f64 = lambda.iter().sum();
            lambda.iter_mut().for_each(|v| *v /= total);
            return Ok(SteadyState {
                lambda_inf: lambda,
                iterations: it,
            });
        }
    }
    Err(Error::NonConvergence(MAX_ITERATIONS))
}

/// `ε_s · Σ_{i=βζ+2}^{βζ+β} λ∞_i`; zero when the range is empty (`β = 1`).
pub fn overflow_probability(model: &MarkovModel, ss: &SteadyState) -> Result<f64> {
    let s = model.s_count();
    if ss.lambda_inf.len() != s {
        return Err(Error::LengthMismatch {
            expected: s,
            got: ss.lambda_inf.len(),
        });
    }
    let first = model.beta * model.zeta + 2;
    let hazard = ss.lambda_inf.iter().skip(first).fold(0.0, |a, b| a + b);
    Ok(model.eps_s * hazard)
}

/// Asymptotic variance of the per-slot overflow indicator, such that the
/// overflow rate over `n` slots has variance close to `σ²/n`.
///
/// Overflows cluster in time, so this exceeds the binomial `p(1−p)`. It is
/// obtained from the Poisson equation of the chain on (state, `D_s` outcome).
pub fn overflow_asymptotic_variance(model: &MarkovModel, ss: &SteadyState) -> Result<f64> {
    let p = overflow_probability(model, ss)?;
    let s = model.s_count();
    let max = s - 1;
    let hazard = model.beta * model.zeta + 1;
    let eps = model.eps_s;
    let outcomes = [(false, 1.0 - eps), (true, eps)];
    let fbar = |x: usize, fail: bool| f64::from(u8::from(fail && x > hazard)) - p;
    let mut h = vec![0.0; s];
    let mut converged = false;
    for _ in 0..MAX_ITERATIONS {
        let next: Vec<f64> = (0..s)
            .map(|x| {
                outcomes
                    .iter()
                    .map(|&(f, w)| w * (fbar(x, f) + h[step(x, f, model.beta, max)]))
                    .sum()
            })
            .collect();
        // h is only defined up to a constant; track the change of its shape
        let shift = next[0] - h[0];
        let delta = next
            .iter()
            .zip(&h)
            .map(|(a, b)| (a - b - shift).abs())
            .fold(0.0, f64::max);
        h = next;
        if delta < DEFAULT_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence(MAX_ITERATIONS));
    }
    let var: f64 = (0..s)
        .map(|x| {
            ss.lambda_inf[x]
                * outcomes
                    .iter()
                    .map(|&(f, w)| {
                        let fb = fbar(x, f);
                        w * fb * (2.0 * (fb + h[step(x, f, model.beta, max)]) - fb)
                    })
                    .sum::<f64>()
        })
        .sum();
    Ok(var.max(0.0))
}

/// Convenience: build, solve and evaluate `Pr(Overflow)` in one call.
pub fn overflow_for(beta: usize, zeta: usize, eps_s: f64) -> Result<f64> {
    let model = build_matrix(beta, zeta, eps_s)?;
    let ss = steady_state(&model, DEFAULT_TOL)?;
    overflow_probability(&model, &ss)
}

/// Block error rate bracket `ε_l ≤ ε_DTA < ε_l + Pr(Overflow)`.
pub fn bler_bounds(p_overflow: f64, eps_l: f64) -> Result<OverflowReport> {
    check_probability("p_overflow", p_overflow)?;
    check_probability("eps_l", eps_l)?;
    let performance_loss_bound = if p_overflow == 0.0 {
        0.0
    } else if eps_l == 0.0 {
        return Err(Error::UndefinedLoss(p_overflow));
    } else {
        p_overflow / eps_l * 100.0
    };
    Ok(OverflowReport {
        p_overflow,
        bler_lower: eps_l,
        bler_upper: eps_l + p_overflow,
        performance_loss_bound,
    })
}

/// Header of the model CSV.
pub const MODEL_CSV_HEADER: &str = "beta,zeta,eps_s,p_overflow,bler_lower,bler_upper";

/// One model CSV row: `Pr(Overflow)` at `eps_s` and the BLER bracket around `eps_l`.
pub fn model_csv_row(beta: usize, zeta: usize, eps_s: f64, eps_l: f64) -> Result<String> {
    check_probability("eps_l", eps_l)?;
    let p = overflow_for(beta, zeta, eps_s)?;
    Ok(format!("{beta},{zeta},{eps_s},{p},{eps_l},{}", eps_l + p))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicitySweep {
    pub monotone: bool,
    /// `(ε_s, Pr(Overflow))` pairs in grid order.
    pub table: Vec<(f64, f64)>,
}

/// Evaluates `Pr(Overflow)` along an ascending `ε_s` grid and reports whether it
/// never decreases.
pub fn sweep_monotonicity(beta: usize, zeta: usize, eps_grid: &[f64]) -> Result<MonotonicitySweep> {
    if eps_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "eps_s grid must be strictly ascending".into(),
        ));
    }
    let table = eps_grid
        .iter()
        .map(|&e| overflow_for(beta, zeta, e).map(|p| (e, p)))
        .collect::<Result<Vec<_>>>()?;
    // allow for the power-iteration tolerance
    let monotone = table.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-10);
    Ok(MonotonicitySweep { monotone, table })
}
