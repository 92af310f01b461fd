use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use tascl_core::adaptive::TraceRow;
use tascl_core::harness::{
    binomial_sigma, run_bler, run_tascl_end_to_end, sigma_distance, ChannelSpec, DecoderKind,
    PointAux, RunSpec, SnrMode, BLER_CSV_HEADER,
};
use tascl_core::markov::{
    build_matrix, model_csv_row, overflow_asymptotic_variance, overflow_probability, steady_state,
    DEFAULT_TOL, MODEL_CSV_HEADER,
};
use tascl_core::polar::{from_code_file, to_code_file};
use tascl_core::{
    construct_code, pipeline_run_synthetic, AsclConfig, NodeKernel, OverflowPolicy, PolarCode,
    TaSclConfig,
};

use crate::{
    BlerArgs, BudgetArgs, ChannelArgs, ConstructArgs, DecoderArg, KernelArg, ModelArgs, PolicyArg,
    SnrModeArg, TasclArgs, ValidateArgs, OUT_DIR_ENV,
};

type CmdResult = Result<ExitCode, String>;

const SIGMA_GATE: f64 = 3.0;

fn parse_list(flag: &str, text: &str) -> Result<Vec<f64>, String> {
    let items: Vec<&str> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        return Err(format!("--{flag} needs at least one value"));
    }
    items
        .iter()
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("--{flag}: '{s}' is not a number"))
        })
        .collect()
}

/// `--out`, else `$TASCL_OUT_DIR/<default_name>`, else stdout.
fn resolve_out(out: Option<PathBuf>, default_name: &str) -> Option<PathBuf> {
    out.or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| PathBuf::from(d).join(default_name))
    })
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), String> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| format!("cannot write '{}': {e}", p.display())),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| format!("stdout: {e}")),
    }
}

fn load_code(path: &Path) -> Result<PolarCode, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read code file '{}': {e}", path.display()))?;
    from_code_file(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn kernel(k: KernelArg) -> NodeKernel {
    match k {
        KernelArg::MinSum => NodeKernel::MinSum,
        KernelArg::Exact => NodeKernel::Exact,
    }
}

fn policy(p: PolicyArg) -> OverflowPolicy {
    match p {
        PolicyArg::DropInProgress => OverflowPolicy::DropInProgress,
        PolicyArg::DropNewest => OverflowPolicy::DropNewest,
    }
}

fn channels(code: &PolarCode, args: &ChannelArgs) -> Result<Vec<ChannelSpec>, String> {
    let mode = match args.snr_mode {
        SnrModeArg::Ebn0 => SnrMode::EbN0,
        SnrModeArg::Esn0 => SnrMode::EsN0,
    };
    parse_list("snr", &args.snr)?
        .into_iter()
        .map(|db| ChannelSpec::new(db, code.rate(), mode).map_err(|e| e.to_string()))
        .collect()
}

fn run_spec(code: PolarCode, decoder: DecoderKind, budget: &BudgetArgs) -> RunSpec {
    let mut spec = RunSpec::new(code, decoder, budget.max_frames, budget.seed);
    spec.kernel = kernel(budget.kernel);
    spec.workers = budget.workers;
    spec
}

pub fn construct(a: ConstructArgs) -> CmdResult {
    let code = construct_code(a.n, a.k, a.r, a.design_snr).map_err(|e| e.to_string())?;
    let name = format!("polar_{}_{}_{}.code", a.n, a.k, a.r);
    let out = resolve_out(a.out, &name);
    emit(out.as_deref(), &to_code_file(&code))?;
    if let Some(p) = &out {
        eprintln!("wrote {} (N={}, K={}, r={})", p.display(), a.n, a.k, a.r);
    }
    Ok(ExitCode::SUCCESS)
}

pub fn bler(a: BlerArgs) -> CmdResult {
    let code = load_code(&a.code)?;
    let decoder = match a.decoder {
        DecoderArg::Sc => DecoderKind::Sc,
        DecoderArg::Scl => DecoderKind::Scl {
            list_size: a.list_size,
        },
        DecoderArg::Ascl => {
            AsclConfig::new(a.l_max).map_err(|e| e.to_string())?;
            DecoderKind::Ascl { l_max: a.l_max }
        }
    };
    decoder.validate().map_err(|e| e.to_string())?;
    let chans = channels(&code, &a.channel)?;
    let mut spec = run_spec(code, decoder, &a.budget);
    spec.min_errors = a.min_errors;

    let mut csv = format!("{BLER_CSV_HEADER}\n");
    for ch in &chans {
        let p = run_bler(&spec, ch).map_err(|e| e.to_string())?;
        let extra = match p.aux {
            PointAux::Adaptive { mean_list_size, .. } => {
                format!(", mean list size {mean_list_size:.3}")
            }
            _ => String::new(),
        };
        eprintln!(
            "{} dB: {} errors in {} frames, BLER {:.3e} [{:.3e}, {:.3e}]{extra}",
            p.ebn0_db, p.block_errors, p.frames, p.bler, p.ci95.0, p.ci95.1
        );
        if p.frames > 0 {
            csv.push_str(&p.to_csv());
            csv.push('\n');
        }
    }
    emit(resolve_out(a.out, "bler.csv").as_deref(), &csv)?;
    Ok(ExitCode::SUCCESS)
}

pub fn model(a: ModelArgs) -> CmdResult {
    TaSclConfig::timing(a.beta, a.zeta).map_err(|e| e.to_string())?;
    let grid = parse_list("eps-s", &a.eps_s)?;
    let mut csv = format!("{MODEL_CSV_HEADER}\n");
    for eps in grid {
        csv.push_str(&model_csv_row(a.beta, a.zeta, eps, a.eps_l).map_err(|e| e.to_string())?);
        csv.push('\n');
    }
    emit(resolve_out(a.out, "model.csv").as_deref(), &csv)?;
    Ok(ExitCode::SUCCESS)
}

pub fn validate(a: ValidateArgs) -> CmdResult {
    let mut cfg = TaSclConfig::timing(a.beta, a.zeta).map_err(|e| e.to_string())?;
    cfg.overflow_policy = policy(a.overflow_policy);
    let m = build_matrix(a.beta, a.zeta, a.eps_s).map_err(|e| e.to_string())?;
    if a.slots == 0 {
        return Err("--slots must be positive".into());
    }
    let stats =
        pipeline_run_synthetic(&cfg, a.eps_s, 0.0, a.slots, a.seed).map_err(|e| e.to_string())?;
    let ss = steady_state(&m, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let model = overflow_probability(&m, &ss).map_err(|e| e.to_string())?;
    let chain_var = overflow_asymptotic_variance(&m, &ss).map_err(|e| e.to_string())?;
    let n = stats.measured_slots();
    let emp = stats.overflow_rate();
    let binom = binomial_sigma(model, n);
    let d = sigma_distance(emp, model, binom);
    let d_chain = sigma_distance(emp, model, (chain_var / n as f64).sqrt());
    let pass = d <= SIGMA_GATE;
    println!(
        "beta {} zeta {} eps_s {} slots {} seed {}",
        a.beta, a.zeta, a.eps_s, a.slots, a.seed
    );
    println!("measured slots     {n} (after {} warm-up)", stats.warmup);
    println!("overflow empirical {emp:.8}");
    println!("overflow model     {model:.8}");
    println!("binomial sigma     {binom:.3e}  distance {d:.2}");
    println!(
        "chain sigma        {:.3e}  distance {d_chain:.2}",
        (chain_var / n as f64).sqrt()
    );
    println!("{}", if pass { "PASS" } else { "FAIL" });
    Ok(if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn trace_path(base: &Path, ebn0: f64, several: bool) -> PathBuf {
    if !several {
        return base.to_path_buf();
    }
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match base.extension() {
        Some(ext) => format!("{stem}_{ebn0}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{ebn0}"),
    };
    base.with_file_name(name)
}

pub fn tascl(a: TasclArgs) -> CmdResult {
    let cfg = TaSclConfig::new(
        a.beta,
        a.zeta,
        a.l_small,
        a.l_large,
        policy(a.overflow_policy),
    )
    .map_err(|e| e.to_string())?;
    let code = load_code(&a.code)?;
    let chans = channels(&code, &a.channel)?;
    let spec = run_spec(code, DecoderKind::TaScl(cfg), &a.budget);

    let mut csv = format!("{BLER_CSV_HEADER}\n");
    for ch in &chans {
        let run =
            run_tascl_end_to_end(&spec, &cfg, ch, a.trace.is_some()).map_err(|e| e.to_string())?;
        if let Some(base) = &a.trace {
            let mut text = format!("{}\n", TraceRow::CSV_HEADER);
            for row in &run.trace {
                text.push_str(&row.to_csv());
                text.push('\n');
            }
            emit(Some(&trace_path(base, ch.snr_db, chans.len() > 1)), &text)?;
        }
        if run.point.frames == 0 {
            continue;
        }
        let s = run.summary();
        eprintln!(
            "{} dB: eps_s {:.4e} eps_l {:.4e} eps_dta {:.4e}; overflow {:.4e} (model {:.4e}); loss {:.2}% (model {:.2}%)",
            ch.snr_db, s.eps_s, s.eps_l, s.eps_dta, s.overflow_emp, s.overflow_model, s.loss_sim_pct, s.loss_model_pct
        );
        if s.low_confidence {
            eprintln!(
                "  warning: only {} D_l-reference errors, eps_l and loss are imprecise",
                s.cascade_errors
            );
        }
        csv.push_str(&run.point.to_csv());
        csv.push('\n');
    }
    emit(resolve_out(a.out, "tascl.csv").as_deref(), &csv)?;
    Ok(ExitCode::SUCCESS)
}
