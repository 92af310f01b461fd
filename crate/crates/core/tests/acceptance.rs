//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#![allow(clippy::needless_range_loop)]

mod common;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use tascl_core::adaptive::{pipeline_run, BernoulliStages, PipelineOptions, Route};
use tascl_core::harness::{
    binomial_sigma, generate_frame, run_bler, run_tascl_on_outcomes, sigma_distance,
    simulate_stage_outcomes, ChannelSpec, DecoderKind, PointAux, RunSpec, TaSclSummary,
};
use tascl_core::markov::{
    build_matrix, model_csv_row, overflow_for, steady_state, steady_state_from, sweep_monotonicity,
    DEFAULT_TOL,
};
use tascl_core::{
    construct_code, encode, pipeline_run_synthetic, scl_decode, NodeKernel, OverflowPolicy,
    TaSclConfig,
};

const SIGMA_GATE: f64 = 3.0;

const C2_SLOTS: u64 = 10_000_000;
const C2_SEED: u64 = 42;

const C3_EBN0: f64 = 2.0;
const C3_FRAMES: u64 = 100_000;
const C3_SEED: u64 = 11;
const C3_EPS_RANGE: (f64, f64) = (0.05, 0.3);

const C5_LOW_EBN0: f64 = 1.0;
const C5_HIGH_EBN0: f64 = 3.0;
const C5_FRAMES: u64 = 50_000;
const C5_SEED: u64 = 12;
const C5_ZETA: usize = 6;

const C6_EBN0: f64 = 3.5;
const C6_FRAMES: u64 = 100_000;
const C6_SEED: u64 = 5;
const C6_EPS_MAX: f64 = 0.01;
const C6_LBAR_MAX: f64 = 1.1;

const C7_FRAMES: u64 = 1_000;
const C8_VECTORS: usize = 10_000;
const C9_RESIDUAL: f64 = 1e-10;
const C9_ROW_TOL: f64 = 1e-9;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn reduced_code() -> tascl_core::PolarCode {
    construct_code(128, 64, 8, 0.0).unwrap()
}

fn tascl(beta: usize, zeta: usize) -> TaSclConfig {
    TaSclConfig::new(beta, zeta, 1, 8, OverflowPolicy::DropInProgress).unwrap()
}

fn criterion_1() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut mismatches = 0;
    let mut eps_list = Vec::new();
    for _ in 0..5 {
        let eps: f64 = rng.random();
        eps_list.push(format!("{eps:.4}"));
        let m = build_matrix(3, 1, eps).unwrap();
        let lit = common::literal_matrix_b3_z1(eps);
        for x in 0..7 {
            for y in 0..7 {
                if m.entry(x, y) != lit[x][y] {
                    mismatches += 1;
                }
            }
        }
    }
    verdict(
        mismatches == 0,
        format!(
            "7x7 entries exact at eps_s = {}; {mismatches} mismatches",
            eps_list.join(", ")
        ),
    )
}

fn criterion_2() -> Verdict {
    let mut cases = Vec::new();
    for beta in 1..=4 {
        for zeta in [0, 1, 2, 6] {
            for eps in [0.01, 0.1, 0.3, 0.5] {
                cases.push((beta, zeta, eps));
            }
        }
    }
    let rows: Vec<_> = cases
        .par_iter()
        .map(|&(b, z, e)| {
            let cfg = TaSclConfig::timing(b, z).unwrap();
            let stats = pipeline_run_synthetic(&cfg, e, 0.0, C2_SLOTS, C2_SEED).unwrap();
            let n = stats.measured_slots();
            let emp = stats.measured_overflows as f64 / n as f64;
            let model = overflow_for(b, z, e).unwrap();
            let z_binom = sigma_distance(emp, model, binomial_sigma(model, n));
            let hazard = b * z + 1;
            let chain = common::asymptotic_sigma(b, z, e, |x, fail| {
                f64::from(u8::from(fail && x > hazard))
            }) / (n as f64).sqrt();
            (
                b,
                z,
                e,
                emp,
                model,
                z_binom,
                sigma_distance(emp, model, chain),
            )
        })
        .collect();
    let failing: Vec<_> = rows.iter().filter(|r| r.5 > SIGMA_GATE).collect();
    let worst = rows.iter().max_by(|a, b| a.5.total_cmp(&b.5)).unwrap();
    let worst_chain = rows.iter().map(|r| r.6).fold(0.0, f64::max);
    let mut detail = format!(
        "{}/{} within {SIGMA_GATE} binomial sigma over {C2_SLOTS} slots; worst {:.2} sigma at (beta {}, zeta {}, eps {}) emp {:.6} model {:.6}; worst {worst_chain:.2} sigma against the chain's own spread",
        rows.len() - failing.len(),
        rows.len(),
        worst.5,
        worst.0,
        worst.1,
        worst.2,
        worst.3,
        worst.4
    );
    for f in &failing {
        detail.push_str(&format!(
            "\n      outside: beta {} zeta {} eps {} emp {:.6} model {:.6} binomial {:.2} sigma, chain {:.2} sigma",
            f.0, f.1, f.2, f.3, f.4, f.5, f.6
        ));
    }
    verdict(failing.is_empty(), detail)
}

struct Fixtures {
    /// Criterion 3 grid at one SNR, keyed by (beta, zeta).
    grid: Vec<((usize, usize), TaSclSummary)>,
    /// Criterion 5 low/high SNR runs at ζ = 6, keyed by (ebn0, beta).
    snr_pairs: Vec<((f64, usize), TaSclSummary)>,
}

fn fixtures() -> Fixtures {
    let code = reduced_code();
    let ch = ChannelSpec::ebn0(&code, C3_EBN0).unwrap();
    let outcomes =
        simulate_stage_outcomes(&code, &ch, 1, 8, NodeKernel::MinSum, C3_FRAMES, C3_SEED).unwrap();
    let mut grid = Vec::new();
    for beta in [2, 3] {
        for zeta in [1, 2, 4] {
            let run =
                run_tascl_on_outcomes(&tascl(beta, zeta), outcomes.iter().copied(), C3_EBN0, false)
                    .unwrap();
            grid.push(((beta, zeta), run.summary().clone()));
        }
    }
    let mut snr_pairs = Vec::new();
    for ebn0 in [C5_LOW_EBN0, C5_HIGH_EBN0] {
        let ch = ChannelSpec::ebn0(&code, ebn0).unwrap();
        let outcomes =
            simulate_stage_outcomes(&code, &ch, 1, 8, NodeKernel::MinSum, C5_FRAMES, C5_SEED)
                .unwrap();
        for beta in [2, 3] {
            let run =
                run_tascl_on_outcomes(&tascl(beta, C5_ZETA), outcomes.iter().copied(), ebn0, false)
                    .unwrap();
            snr_pairs.push(((ebn0, beta), run.summary().clone()));
        }
    }
    Fixtures { grid, snr_pairs }
}

fn criterion_3(fx: &Fixtures) -> Verdict {
    let eps_s = fx.grid[0].1.eps_s;
    let in_range = (C3_EPS_RANGE.0..=C3_EPS_RANGE.1).contains(&eps_s);
    let mut pass = in_range;
    let mut detail = format!(
        "N=128 K=64 r=8 L_s=1 L_l=8 at {C3_EBN0} dB, {C3_FRAMES} frames: eps_s {eps_s:.4} (range {:?}), eps_l {:.5}",
        C3_EPS_RANGE, fx.grid[0].1.eps_l
    );
    for ((b, z), s) in &fx.grid {
        let d = s.loss_sigma_distance();
        pass &= d <= SIGMA_GATE;
        detail.push_str(&format!(
            "\n      beta {b} zeta {z}: loss sim {:.2}% model {:.2}% ({d:.2} sigma); overflow emp {:.6} model {:.6}",
            s.loss_sim_pct, s.loss_model_pct, s.overflow_emp, s.overflow_model
        ));
    }
    verdict(pass, detail)
}

fn criterion_4(fx: &Fixtures) -> Verdict {
    let all: Vec<&TaSclSummary> = fx
        .grid
        .iter()
        .map(|g| &g.1)
        .chain(fx.snr_pairs.iter().map(|p| &p.1))
        .collect();
    let bad: Vec<String> = all
        .iter()
        .filter(|s| !s.sandwich_holds(SIGMA_GATE))
        .map(|s| {
            format!(
                "(beta {}, zeta {}): eps_l {:.5} eps_dta {:.5} eps_l+p {:.5}",
                s.config.beta,
                s.config.zeta,
                s.eps_l,
                s.eps_dta,
                s.eps_l + s.overflow_model
            )
        })
        .collect();
    let tightest = all
        .iter()
        .map(|s| (s.eps_dta - s.eps_l - s.overflow_model) / s.gap_sigma.max(f64::MIN_POSITIVE))
        .fold(f64::NEG_INFINITY, f64::max);
    verdict(
        bad.is_empty(),
        format!(
            "{}/{} runs satisfy eps_l <= eps_dta <= eps_l + Pr(Overflow) within {SIGMA_GATE} sigma; largest upper excess {tightest:.2} sigma{}",
            all.len() - bad.len(),
            all.len(),
            if bad.is_empty() { String::new() } else { format!("; failing {}", bad.join("; ")) }
        ),
    )
}

fn criterion_5(fx: &Fixtures) -> Verdict {
    let get = |b: usize, z: usize| &fx.grid.iter().find(|g| g.0 == (b, z)).unwrap().1;
    let mut pass = true;
    let mut detail = String::new();
    for b in [2, 3] {
        let sim: Vec<f64> = [1, 2, 4].iter().map(|&z| get(b, z).loss_sim_pct).collect();
        let model: Vec<f64> = [1, 2, 4]
            .iter()
            .map(|&z| get(b, z).loss_model_pct)
            .collect();
        let ok = sim.windows(2).all(|w| w[1] <= w[0]) && model.windows(2).all(|w| w[1] <= w[0]);
        pass &= ok;
        detail.push_str(&format!(
            "\n      beta {b}, zeta 1/2/4: sim {:.2}/{:.2}/{:.2}% model {:.2}/{:.2}/{:.2}%",
            sim[0], sim[1], sim[2], model[0], model[1], model[2]
        ));
    }
    for z in [1, 2, 4] {
        let (a, c) = (get(2, z), get(3, z));
        pass &= c.loss_sim_pct >= a.loss_sim_pct && c.loss_model_pct >= a.loss_model_pct;
    }
    let pair = |snr: f64, b: usize| &fx.snr_pairs.iter().find(|p| p.0 == (snr, b)).unwrap().1;
    let deg = |snr: f64| pair(snr, 3).eps_dta - pair(snr, 2).eps_dta;
    let deg_model = |snr: f64| {
        let eps = pair(snr, 2).eps_s;
        overflow_for(3, C5_ZETA, eps).unwrap() - overflow_for(2, C5_ZETA, eps).unwrap()
    };
    let (low, high) = (deg(C5_LOW_EBN0), deg(C5_HIGH_EBN0));
    let low_first = low > 0.0 && low > high && deg_model(C5_LOW_EBN0) > deg_model(C5_HIGH_EBN0);
    pass &= low_first;
    let head = format!(
        "loss non-increasing in zeta and non-decreasing in beta at {C3_EBN0} dB; zeta {C5_ZETA}, beta 3 minus beta 2 BLER: {low:.5} at {C5_LOW_EBN0} dB (eps_s {:.3}) vs {high:.5} at {C5_HIGH_EBN0} dB (eps_s {:.4})",
        pair(C5_LOW_EBN0, 2).eps_s,
        pair(C5_HIGH_EBN0, 2).eps_s
    );
    verdict(pass, head + &detail)
}

fn criterion_6() -> Verdict {
    let code = reduced_code();
    let ch = ChannelSpec::ebn0(&code, C6_EBN0).unwrap();
    let spec = |decoder| {
        let mut s = RunSpec::new(code.clone(), decoder, C6_FRAMES, C6_SEED);
        s.min_errors = 0;
        s
    };
    let sc = run_bler(&spec(DecoderKind::Sc), &ch).unwrap();
    let ascl = run_bler(&spec(DecoderKind::Ascl { l_max: 8 }), &ch).unwrap();
    let scl = run_bler(&spec(DecoderKind::Scl { list_size: 8 }), &ch).unwrap();
    let (lbar, attempts) = match ascl.aux {
        PointAux::Adaptive {
            mean_list_size,
            mean_attempts,
        } => (mean_list_size, mean_attempts),
        _ => unreachable!(),
    };
    let overlap = ascl.ci95.0 <= scl.ci95.1 && scl.ci95.0 <= ascl.ci95.1;
    let pass = sc.bler < C6_EPS_MAX
        && (1.0..=C6_LBAR_MAX).contains(&lbar)
        && (1.0..=C6_LBAR_MAX).contains(&attempts)
        && overlap;
    verdict(
        pass,
        format!(
            "{C6_EBN0} dB, {C6_FRAMES} frames: eps_s {:.5}; mean list size {lbar:.4}, mean attempts {attempts:.4}; A-SCL(8) BLER {:.2e} [{:.2e}, {:.2e}] vs SCL(8) {:.2e} [{:.2e}, {:.2e}]",
            sc.bler, ascl.bler, ascl.ci95.0, ascl.ci95.1, scl.bler, scl.ci95.0, scl.ci95.1
        ),
    )
}

fn criterion_7() -> Verdict {
    let code = construct_code(8, 4, 0, 0.0).unwrap();
    let ch = ChannelSpec::ebn0(&code, 1.0).unwrap();
    let mut agree = 0;
    for i in 0..C7_FRAMES {
        let f = generate_frame(&code, &ch, 7, i).llr;
        let out = scl_decode(&code, &f, 16).unwrap();
        let u = code.source_word(&out.selected).unwrap();
        if encode(&code, &u).unwrap() == common::ml_codeword(&code, f.values()) {
            agree += 1;
        }
    }
    verdict(
        agree == C7_FRAMES,
        format!("N=8 K=4 r=0, L=16: {agree}/{C7_FRAMES} frames equal the brute-force ML codeword"),
    )
}

fn criterion_8() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut bad_product = 0;
    let mut bad_involution = 0;
    for n in [2usize, 4, 8, 16, 32, 64] {
        let g = common::kron_matrix(n);
        let code = construct_code(n, n / 2, 0, 0.0).unwrap();
        for _ in 0..C8_VECTORS {
            let u: Vec<u8> = (0..n).map(|_| rng.random_range(0..2u8)).collect();
            let x = encode(&code, &u).unwrap();
            bad_product += usize::from(x != common::dense_encode(&g, &u));
            bad_involution += usize::from(encode(&code, &x).unwrap() != u);
        }
    }
    verdict(
        bad_product == 0 && bad_involution == 0,
        format!(
            "N in 2..64, {C8_VECTORS} vectors each: {bad_product} product mismatches, {bad_involution} involution failures"
        ),
    )
}

fn criterion_9() -> Verdict {
    let mut failures: Vec<String> = Vec::new();
    let mut check = |ok: bool, what: String| {
        if !ok {
            failures.push(what);
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let eps_grid: Vec<f64> = (1..=40).map(|i| i as f64 * 0.024).collect();
    for beta in 1..=4 {
        for zeta in [0, 1, 2, 6] {
            for &eps in &[0.01, 0.1, 0.3, 0.5, 0.9] {
                let m = build_matrix(beta, zeta, eps).unwrap();
                let s = m.s_count();
                for x in 0..s {
                    let sum: f64 = m.row(x).iter().sum();
                    check(
                        (sum - 1.0).abs() <= 1e-12,
                        format!("row {x} of ({beta},{zeta},{eps}) sums to {sum}"),
                    );
                }
                let pi = steady_state(&m, DEFAULT_TOL).unwrap().lambda_inf;
                let res: f64 = m
                    .propagate(&pi)
                    .iter()
                    .zip(&pi)
                    .map(|(a, b)| (a - b).abs())
                    .sum();
                check(
                    res < C9_RESIDUAL,
                    format!("fixed point residual {res:e} at ({beta},{zeta},{eps})"),
                );
                let pk = m.power(10_000);
                let rows_ok =
                    (0..s).all(|x| (0..s).all(|y| (pk[x * s + y] - pi[y]).abs() < C9_ROW_TOL));
                check(
                    rows_ok,
                    format!("P^k rows not converged at ({beta},{zeta},{eps})"),
                );
                let mut init: Vec<f64> = (0..s).map(|_| rng.random()).collect();
                let total: f64 = init.iter().sum();
                init.iter_mut().for_each(|v| *v /= total);
                let other = steady_state_from(&m, &init, DEFAULT_TOL)
                    .unwrap()
                    .lambda_inf;
                let same = other
                    .iter()
                    .zip(&pi)
                    .all(|(a, b)| (a - b).abs() < C9_ROW_TOL);
                check(
                    same,
                    format!("initial distribution matters at ({beta},{zeta},{eps})"),
                );
                if beta == 1 {
                    let p = overflow_for(1, zeta, eps).unwrap();
                    check(p == 0.0, format!("beta 1 overflow {p} at zeta {zeta}"));
                }
            }
            let sweep = sweep_monotonicity(beta, zeta, &eps_grid).unwrap();
            check(
                sweep.monotone,
                format!("sweep not monotone at ({beta},{zeta})"),
            );
        }
    }

    for (beta, zeta, eps, policy) in [
        (3, 1, 0.3, OverflowPolicy::DropInProgress),
        (4, 2, 0.4, OverflowPolicy::DropNewest),
        (2, 0, 0.6, OverflowPolicy::DropInProgress),
    ] {
        let cfg = TaSclConfig::new(beta, zeta, 1, 8, policy).unwrap();
        let mut stages = BernoulliStages::new(eps, 0.1, 3).unwrap();
        let slots = 100_000;
        let mut next = 0u64;
        let mut in_order = true;
        let mut last_release = 0u64;
        let run = pipeline_run(
            &cfg,
            &mut stages,
            std::iter::repeat(()),
            slots,
            PipelineOptions {
                warmup: 0,
                trace: true,
            },
            |rec| {
                in_order &= rec.index == next
                    && rec.arrival_slot == next
                    && rec.release_slot >= last_release;
                in_order &= rec.route != Route::Dropped || rec.error;
                last_release = rec.release_slot;
                next += 1;
            },
        )
        .unwrap();
        let input_rows = run
            .trace
            .iter()
            .take(slots as usize)
            .enumerate()
            .all(|(i, t)| t.slot == i as u64);
        check(
            run.stats.frames_in == slots && run.stats.slots == slots && input_rows,
            format!("input rate broken at ({beta},{zeta},{eps})"),
        );
        check(
            in_order && next == slots,
            format!("output order broken at ({beta},{zeta},{eps})"),
        );
    }

    let csv_runs = || {
        let code = reduced_code();
        let ch = ChannelSpec::ebn0(&code, 2.0).unwrap();
        let mut rows = Vec::new();
        for (decoder, workers) in [
            (DecoderKind::Sc, 1),
            (DecoderKind::Scl { list_size: 4 }, 2),
            (DecoderKind::Ascl { l_max: 8 }, 3),
            (DecoderKind::TaScl(tascl(3, 1)), 2),
        ] {
            let mut s = RunSpec::new(code.clone(), decoder, 3000, 77);
            s.workers = workers;
            rows.push(run_bler(&s, &ch).unwrap().to_csv());
        }
        for eps in [0.05, 0.2, 0.4] {
            rows.push(model_csv_row(3, 2, eps, 0.01).unwrap());
        }
        let outcomes =
            simulate_stage_outcomes(&code, &ch, 1, 8, NodeKernel::MinSum, 500, 77).unwrap();
        let run = run_tascl_on_outcomes(&tascl(3, 1), outcomes, 2.0, true).unwrap();
        rows.extend(run.trace.iter().map(|t| t.to_csv()));
        rows
    };
    let (a, b) = (csv_runs(), csv_runs());
    check(
        a == b,
        "seeded CSV output differs between identical runs".into(),
    );

    let n = failures.len();
    verdict(
        n == 0,
        if n == 0 {
            "row-stochastic, fixed point, P^k rows, initial-state independence, beta=1 zero overflow, monotone sweeps, pipeline rate and order, CSV reproducibility".to_string()
        } else {
            format!("{n} property failures, first: {}", failures[0])
        },
    )
}

fn main() {
    let start = Instant::now();
    let mut failed = 0;
    let mut report = |id: u8, name: &str, v: Verdict, t: Instant| {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id} {tag} {name} ({:.1} s): {}",
            t.elapsed().as_secs_f64(),
            v.detail
        );
        if !v.pass {
            failed += 1;
        }
    };

    let t = Instant::now();
    report(1, "transition matrix of D_TA(3,1)", criterion_1(), t);
    let t = Instant::now();
    report(2, "model vs synthetic pipeline", criterion_2(), t);
    let t = Instant::now();
    let fx = fixtures();
    report(3, "model vs decoder simulation", criterion_3(&fx), t);
    let t = Instant::now();
    report(4, "BLER sandwich", criterion_4(&fx), t);
    let t = Instant::now();
    report(5, "loss orderings", criterion_5(&fx), t);
    let t = Instant::now();
    report(6, "adaptive SCL", criterion_6(), t);
    let t = Instant::now();
    report(7, "ML oracle", criterion_7(), t);
    let t = Instant::now();
    report(8, "encoder oracle", criterion_8(), t);
    let t = Instant::now();
    report(9, "property suites", criterion_9(), t);

    println!(
        "acceptance: {} of 9 criteria passed in {:.1} s",
        9 - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
