//! Subcommand bodies. Each returns its exit status after writing its tables.

use std::io;

use kdvb::carleman::{carleman_ratio, positivity_scan, TestFunction};
use kdvb::diagnostics::{decay_fit, default_window, dissipation_residual, observability_ratio};
use kdvb::dynamics::{check_growth, check_hyp_a, check_hyp_b, make_damping, DampingKind};
use kdvb::solver::{picard_solve, simulate};
use kdvb::{CarlemanWeight, DampingSpec, Error, InitialCondition, SimConfig};
use rayon::prelude::*;

use crate::config::{from_core, Config, ConfigError};
use crate::output::{float, OutDir, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_BLOWUP: i32 = 2;
pub const EXIT_TAIL: i32 = 3;
/// A verification subcommand ran but its check failed.
pub const EXIT_CHECK_FAILED: i32 = 4;

pub const LEDGER_HEADER: &[&str] = &[
    "t",
    "l2_norm",
    "h1_norm",
    "h3_norm",
    "energy",
    "diss_residual",
    "tail_fraction",
];
pub const SWEEP_HEADER: &[&str] = &[
    "cell",
    "p",
    "lambda0",
    "damping_amp",
    "amplitude",
    "status",
    "rate",
    "r_squared",
    "hyp_b",
    "hyp_b_margin",
    "hyp_a",
    "hyp_a_margin",
    "observability_ratio",
    "tail_warning",
];
pub const SCAN_HEADER: &[&str] = &["s", "minD", "minE", "minF", "s_star_flag"];
pub const RATIO_HEADER: &[&str] = &["q_id", "s", "lhs", "rhs", "ratio"];
pub const PICARD_HEADER: &[&str] = &["iteration", "slab_diff", "contraction_ratio", "converged", "diverged"];
pub const HYP_HEADER: &[&str] = &["check", "pass", "c_p", "lhs", "rhs", "margin"];

#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
}

pub struct Context<'a> {
    pub config: &'a Config,
    pub out: &'a mut OutDir,
    pub seed: Option<u64>,
    pub workers: usize,
}

fn flag(b: bool) -> String {
    if b { "true" } else { "false" }.to_string()
}

fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

pub fn simulate_cmd(ctx: Context) -> Result<i32, CommandError> {
    let cfg = ctx.config.sim_config(ctx.seed)?;
    let tr = match simulate(&cfg) {
        Ok(tr) => tr,
        Err(Error::BlowUp { t, step, sup_norm }) => {
            let mut table = Table::new(&["t", "step", "sup_norm"]);
            table.push(vec![float(t), step.to_string(), float(sup_norm)]);
            ctx.out.write_table("blowup.csv", &table)?;
            eprintln!("blow-up guard tripped at t = {t} (step {step}, sup norm {sup_norm:e})");
            return Ok(EXIT_BLOWUP);
        }
        Err(e) => return Err(from_core(e).into()),
    };

    let residual = dissipation_residual(&tr);
    let mut ledger = Table::new(LEDGER_HEADER);
    for (e, r) in tr.ledger.iter().zip(&residual) {
        ledger.push(vec![
            float(e.t),
            float(e.l2_sq.sqrt()),
            float(e.h1_sq().sqrt()),
            float(e.h3_sq.sqrt()),
            float(e.energy()),
            float(*r),
            float(e.tail_fraction),
        ]);
    }
    ctx.out.write_table("ledger.csv", &ledger)?;

    let mut snaps = Table::new(&["t", "x", "u"]);
    let points = tr.grid().points().to_vec();
    for (&t, f) in tr.times.iter().zip(&tr.snapshots) {
        for (&x, &u) in points.iter().zip(f.values()) {
            snaps.push(vec![float(t), float(x), float(u)]);
        }
    }
    ctx.out.write_table("snapshots.csv", &snaps)?;

    if tr.tail_warning {
        eprintln!(
            "boundary tail fraction {:e} exceeded threshold {:e}",
            tr.max_tail_fraction(),
            cfg.tail_threshold
        );
        return Ok(EXIT_TAIL);
    }
    Ok(EXIT_OK)
}

/// One cell of a decay sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub p: f64,
    pub lambda0: f64,
    pub damping_amp: f64,
    pub amplitude: f64,
}

fn with_cell(base: &SimConfig, cell: Cell) -> SimConfig {
    let mut cfg = base.clone();
    cfg.nonlinearity.p = cell.p;
    cfg.damping = match cfg.damping {
        DampingSpec::Zero => DampingSpec::Zero,
        DampingSpec::Constant { .. } => DampingSpec::Constant { lambda0: cell.lambda0 },
        DampingSpec::Indefinite { .. } => DampingSpec::Indefinite {
            lambda0: cell.lambda0,
            bump_amplitude: cell.damping_amp,
        },
        DampingSpec::Localized { alpha, beta, width, .. } => DampingSpec::Localized {
            lambda0: cell.lambda0,
            alpha,
            beta,
            width,
        },
    };
    cfg.initial_condition = match cfg.initial_condition {
        InitialCondition::Gaussian { width, center, .. } => InitialCondition::Gaussian {
            amplitude: cell.amplitude,
            width,
            center,
        },
        InitialCondition::SingleMode { k, .. } => InitialCondition::SingleMode {
            k,
            amplitude: cell.amplitude,
        },
        InitialCondition::RandomBandLimited { seed, cutoff, .. } => InitialCondition::RandomBandLimited {
            seed,
            cutoff,
            amplitude: cell.amplitude,
        },
        InitialCondition::Zero => InitialCondition::Zero,
    };
    cfg
}

fn base_amplitude(ic: &InitialCondition) -> f64 {
    match *ic {
        InitialCondition::Gaussian { amplitude, .. }
        | InitialCondition::SingleMode { amplitude, .. }
        | InitialCondition::RandomBandLimited { amplitude, .. } => amplitude,
        InitialCondition::Zero => 0.0,
    }
}

fn base_amp(d: &DampingSpec) -> f64 {
    match *d {
        DampingSpec::Indefinite { bump_amplitude, .. } => bump_amplitude,
        _ => 0.0,
    }
}

/// Cartesian product of the sweep axes in `p, lambda0, amp, amplitude` order.
pub fn sweep_cells(config: &Config, base: &SimConfig) -> Result<Vec<Cell>, ConfigError> {
    let axis = |key: &str, default: f64| -> Result<Vec<f64>, ConfigError> {
        Ok(config.f64_list(key)?.unwrap_or_else(|| vec![default]))
    };
    let ps = axis("sweep.p", base.nonlinearity.p)?;
    let lambdas = axis("sweep.lambda0", base.damping.lambda0())?;
    let amps = axis("sweep.amp", base_amp(&base.damping))?;
    let amplitudes = axis("sweep.amplitude", base_amplitude(&base.initial_condition))?;
    let mut cells = Vec::new();
    for &p in &ps {
        for &lambda0 in &lambdas {
            for &damping_amp in &amps {
                for &amplitude in &amplitudes {
                    cells.push(Cell {
                        p,
                        lambda0,
                        damping_amp,
                        amplitude,
                    });
                }
            }
        }
    }
    // Each cell must be a valid configuration on its own.
    for c in &cells {
        let cfg = with_cell(base, *c);
        kdvb::NonlinearitySpec::new(
            cfg.nonlinearity.form,
            cfg.nonlinearity.p,
            cfg.nonlinearity.growth_constant,
        )
        .map_err(|e| ConfigError::new("sweep.p", from_core(e).message))?;
        cfg.damping.validate().map_err(|e| {
            let e = from_core(e);
            ConfigError::new(e.key.replace("damping.", "sweep."), e.message)
        })?;
    }
    Ok(cells)
}

fn hyp_cells(cfg: &SimConfig) -> (String, Option<f64>, String, Option<f64>) {
    let Ok(grid) = cfg.grid() else {
        return ("n/a".into(), None, "n/a".into(), None);
    };
    let Ok(profile) = make_damping(cfg.damping, &grid) else {
        return ("n/a".into(), None, "n/a".into(), None);
    };
    let (b, bm) = match check_hyp_b(&profile, cfg.nonlinearity.p) {
        Ok(r) => (if r.pass { "pass" } else { "fail" }.to_string(), Some(r.margin)),
        Err(_) => ("n/a".to_string(), None),
    };
    let (a, am) = match cfg.damping.kind() {
        DampingKind::Localized | DampingKind::Constant => {
            let r = check_hyp_a(&profile);
            (if r.pass { "pass" } else { "fail" }.to_string(), Some(r.margin))
        }
        _ => ("n/a".to_string(), None),
    };
    (b, bm, a, am)
}

fn sweep_row(index: usize, cell: Cell, cfg: &SimConfig, window: Option<(f64, f64)>) -> Vec<String> {
    let (hb, hbm, ha, ham) = hyp_cells(cfg);
    let mut row = vec![
        index.to_string(),
        float(cell.p),
        float(cell.lambda0),
        float(cell.damping_amp),
        float(cell.amplitude),
    ];
    let (status, rate, r2, obs, tail) = match simulate(cfg) {
        Ok(tr) => {
            let window = window.unwrap_or_else(|| default_window(cfg.horizon));
            match decay_fit(&tr.l2_series(), window) {
                Ok(fit) => (
                    "ok".to_string(),
                    Some(fit.rate),
                    Some(fit.r_squared),
                    Some(observability_ratio(&tr)),
                    flag(tr.tail_warning),
                ),
                Err(_) => (
                    "fit_failed".to_string(),
                    None,
                    None,
                    Some(observability_ratio(&tr)),
                    flag(tr.tail_warning),
                ),
            }
        }
        Err(Error::BlowUp { .. }) => ("blowup".to_string(), None, None, None, String::new()),
        Err(_) => ("error".to_string(), None, None, None, String::new()),
    };
    row.extend([
        status,
        opt_float(rate),
        opt_float(r2),
        hb,
        opt_float(hbm),
        ha,
        opt_float(ham),
        opt_float(obs),
        tail,
    ]);
    row
}

pub fn decay_sweep_cmd(ctx: Context) -> Result<i32, CommandError> {
    let base = ctx.config.sim_config(ctx.seed)?;
    let cells = sweep_cells(ctx.config, &base)?;
    let window = match ctx.config.f64_list("sweep.window")? {
        None => None,
        Some(w) if w.len() == 2 && w[0] < w[1] => Some((w[0], w[1])),
        Some(_) => return Err(ConfigError::new("sweep.window", "expected [start, end] with start < end").into()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(ctx.workers)
        .build()
        .map_err(io::Error::other)?;
    let rows: Vec<Vec<String>> = pool.install(|| {
        cells
            .par_iter()
            .enumerate()
            .map(|(i, &cell)| sweep_row(i, cell, &with_cell(&base, cell), window))
            .collect()
    });
    let mut table = Table::new(SWEEP_HEADER);
    for r in rows {
        table.push(r);
    }
    ctx.out.write_table("decay_sweep.csv", &table)?;
    Ok(EXIT_OK)
}

pub fn hyp_check_cmd(ctx: Context) -> Result<i32, CommandError> {
    let cfg = ctx.config.sim_config(ctx.seed)?;
    let grid = cfg.grid().map_err(from_core)?;
    let profile = make_damping(cfg.damping, &grid).map_err(from_core)?;
    let mut table = Table::new(HYP_HEADER);
    let mut all_pass = true;

    if !cfg.nonlinearity.is_zero() {
        let g = check_growth(&cfg.nonlinearity, 10.0, 2001).map_err(from_core)?;
        all_pass &= g.pass;
        table.push(vec![
            "growth".into(),
            flag(g.pass),
            String::new(),
            String::new(),
            String::new(),
            float(g.worst_margin),
        ]);
    }
    let mut ran = false;
    if let Ok(r) = check_hyp_b(&profile, cfg.nonlinearity.p) {
        ran = true;
        all_pass &= r.pass;
        table.push(vec![
            r.hypothesis.name().into(),
            flag(r.pass),
            opt_float(r.c_p),
            float(r.lhs),
            float(r.rhs),
            float(r.margin),
        ]);
    }
    if matches!(cfg.damping.kind(), DampingKind::Localized | DampingKind::Zero) {
        ran = true;
        let r = check_hyp_a(&profile);
        all_pass &= r.pass;
        table.push(vec![
            r.hypothesis.name().into(),
            flag(r.pass),
            String::new(),
            float(r.lhs),
            float(r.rhs),
            float(r.margin),
        ]);
    }
    debug_assert!(ran);
    ctx.out.write_table("hyp_check.csv", &table)?;
    Ok(if all_pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}

pub fn carleman_verify_cmd(ctx: Context) -> Result<i32, CommandError> {
    let c = ctx.config;
    let half_width = c.f64_or("carleman.half_width", 1.0)?;
    let x0 = c.f64_or("carleman.x0", 2.0)?;
    let epsilon = c.f64_or("carleman.epsilon", 0.5)?;
    let horizon = c.f64_or("carleman.horizon", 2.0)?;
    let weight = if c.contains("carleman.offset") {
        CarlemanWeight::with_offset(half_width, x0, c.f64_or("carleman.offset", 0.0)?, epsilon, horizon)
    } else {
        CarlemanWeight::new(half_width, x0, epsilon, horizon)
    }
    .map_err(|e| match e {
        Error::InvalidParameter { name, reason } => ConfigError::new(format!("carleman.{name}"), reason),
        other => ConfigError::new("carleman", other.to_string()),
    })?;
    let s_values = c
        .f64_list("carleman.s_values")?
        .unwrap_or_else(|| (0..13).map(|i| 10f64.powf(0.5 * i as f64)).collect());
    let grid_n = c.usize_or("carleman.grid_n", 200)?;
    let ratio_grid_n = c.usize_or("carleman.ratio_grid_n", 2000)?;
    let ratio_time_n = c.usize_or("carleman.ratio_time_n", 400)?;
    let s_factor = c.f64_or("carleman.s_factor", 2.0)?;
    if s_factor.is_nan() || s_factor < 1.0 {
        return Err(ConfigError::new("carleman.s_factor", "must be >= 1").into());
    }

    let scan = positivity_scan(&weight, &s_values, grid_n).map_err(from_core)?;
    let mut table = Table::new(SCAN_HEADER);
    for r in &scan.rows {
        let star = scan.s_star == Some(r.s);
        table.push(vec![
            float(r.s),
            float(r.min_d),
            float(r.min_e),
            float(r.min_f),
            u8::from(star).to_string(),
        ]);
    }
    ctx.out.write_table("carleman_scan.csv", &table)?;

    let (d, e, f) = scan.plateau;
    println!("plateau: D {d:.6} E {e:.6} F {f:.6}");
    let Some(s_star) = scan.s_star else {
        println!("no sampled s makes D, E and F positive");
        return Ok(EXIT_CHECK_FAILED);
    };
    println!("s* = {s_star}");

    let mut ratios = Table::new(RATIO_HEADER);
    let mut finite = true;
    for s in [s_factor * s_star, 2.0 * s_factor * s_star] {
        for q in TestFunction::FAMILY {
            let r = carleman_ratio(q, &weight, s, ratio_grid_n, ratio_time_n).map_err(from_core)?;
            finite &= r.ratio.is_finite() && r.ratio > 0.0;
            ratios.push(vec![
                q.name().into(),
                float(s),
                float(r.lhs),
                float(r.rhs),
                float(r.ratio),
            ]);
        }
    }
    ctx.out.write_table("carleman_ratio.csv", &ratios)?;
    let ok = finite && d > 0.0 && e > 0.0 && f > 0.0;
    Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
}

pub fn picard_demo_cmd(ctx: Context) -> Result<i32, CommandError> {
    let cfg = ctx.config.sim_config(ctx.seed)?;
    let t_loc = ctx.config.f64_or("picard.t_loc", 0.2)?;
    let iterations = ctx.config.usize_or("picard.iterations", 10)?;
    let substeps = ctx.config.usize_or("picard.substeps", 64)?;
    let grid = cfg.grid().map_err(from_core)?;
    let u0 = cfg.initial_condition.sample(&grid).map_err(from_core)?;
    let report = picard_solve(&u0, &cfg, t_loc, iterations, substeps).map_err(from_core)?;

    let mut table = Table::new(PICARD_HEADER);
    let last = report.sup_norm_diffs.len() - 1;
    for (i, &diff) in report.sup_norm_diffs.iter().enumerate() {
        let ratio = if i == 0 {
            None
        } else {
            report.contraction_ratios.get(i - 1).copied()
        };
        table.push(vec![
            (i + 1).to_string(),
            float(diff),
            opt_float(ratio),
            flag(i == last && report.converged),
            flag(i == last && report.diverged),
        ]);
    }
    ctx.out.write_table("picard.csv", &table)?;
    Ok(if report.diverged { EXIT_CHECK_FAILED } else { EXIT_OK })
}
