use std::io::Read;

use antipt_core::dynamics::{cross_validate, max_rate, FockLindbladConfig, LegOutcome};
use antipt_core::laurent::fit_rows;
use antipt_core::metrology::DEFAULT_DERIVATIVE_STEP;
use antipt_core::model::DEFAULT_EP_TOL;
use antipt_core::*;
use serde_json::json;

use crate::args::{CovarianceArg, Preset, ProbeArgs, SystemArgs};
use crate::config::{FileConfig, ProbeSection, SystemSection};
use crate::error::CliError;
use crate::output::{to_value, Table};
use crate::sweep_io::parse_sweep;

const DEFAULT_BIG_GAMMA: f64 = 1.0;
const DEFAULT_GAMMA_C: f64 = 0.5;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// `start:stop:count`.
pub fn parse_range(text: &str, flag: &str) -> Result<(f64, f64, usize), CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(usage(format!(
            "--{flag} expects start:stop:count, got '{text}'"
        )));
    };
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| usage(format!("--{flag}: bad number '{s}'")))
    };
    let count = n
        .trim()
        .parse::<usize>()
        .map_err(|_| usage(format!("--{flag}: bad count '{n}'")))?;
    Ok((num(a)?, num(b)?, count))
}

/// `lo:hi`.
pub fn parse_window(text: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b] = parts.as_slice() else {
        return Err(usage(format!("--window expects lo:hi, got '{text}'")));
    };
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| usage(format!("--window: bad number '{s}'")))
    };
    Ok((num(a)?, num(b)?))
}

struct Merged {
    delta: Option<f64>,
    big_gamma: f64,
    gamma0: Option<f64>,
    gamma_c: f64,
    gamma_bath: Option<f64>,
}

fn merge_system(flags: &SystemArgs, file: &SystemSection) -> Merged {
    Merged {
        delta: flags.delta.or(file.delta),
        big_gamma: flags
            .big_gamma
            .or(file.big_gamma)
            .unwrap_or(DEFAULT_BIG_GAMMA),
        gamma0: flags.gamma0.or(file.gamma0),
        gamma_c: flags.gamma_c.or(file.gamma_c).unwrap_or(DEFAULT_GAMMA_C),
        gamma_bath: flags.gamma_bath.or(file.gamma_bath),
    }
}

fn build(delta: f64, m: &Merged, gamma0: f64) -> Result<SystemParams, CliError> {
    let bath = m.gamma_bath.unwrap_or(m.big_gamma);
    Ok(SystemParams::with_bath(
        delta,
        m.big_gamma,
        gamma0,
        m.gamma_c,
        bath,
    )?)
}

fn system(flags: &SystemArgs, file: &SystemSection) -> Result<SystemParams, CliError> {
    let m = merge_system(flags, file);
    let delta = m.delta.ok_or_else(|| usage("--delta is required"))?;
    let gamma0 = m.gamma0.ok_or_else(|| usage("--gamma0 is required"))?;
    build(delta, &m, gamma0)
}

/// `--epsilon` fixes delta and gamma0; anything else comes from the system flags.
fn system_or_perturbed(
    flags: &SystemArgs,
    file: &SystemSection,
    epsilon: Option<f64>,
) -> Result<SystemParams, CliError> {
    let Some(eps) = epsilon else {
        return system(flags, file);
    };
    if flags.delta.is_some() || flags.gamma0.is_some() {
        return Err(usage(
            "--epsilon cannot be combined with --delta or --gamma0",
        ));
    }
    let m = merge_system(flags, file);
    let mut p = SystemParams::perturbed_ep(eps, m.big_gamma, m.gamma_c)?;
    if let Some(bath) = m.gamma_bath {
        p = SystemParams::with_bath(p.delta, p.big_gamma, p.gamma0, p.gamma_c, bath)?;
    }
    Ok(p)
}

fn probe(flags: &ProbeArgs, file: &ProbeSection, big_gamma: f64) -> Result<ProbeConfig, CliError> {
    let mut probe = ProbeConfig::scaled(big_gamma);
    if let Some(mu) = &flags.mu_in {
        probe.mu_in = mu
            .as_slice()
            .try_into()
            .map_err(|_| usage("--mu-in needs four values"))?;
    } else if let Some(mu) = file.mu_in {
        probe.mu_in = mu;
    }
    let mode = match (flags.covariance_mode, file.covariance_mode.as_deref()) {
        (Some(CovarianceArg::SymmetricVacuum), _) | (None, Some("symmetric-vacuum")) => {
            CovarianceMode::SymmetricVacuum
        }
        (Some(CovarianceArg::AsWritten), _) | (None, Some("as-written")) => {
            CovarianceMode::AsWritten
        }
        (None, None) => probe.covariance_mode,
        (None, Some(other)) => return Err(usage(format!("unknown covariance_mode '{other}'"))),
    };
    probe.covariance_mode = mode;
    if let Some(h) = flags.derivative_step.or(file.derivative_step) {
        probe.derivative_step = h;
    }
    Ok(probe)
}

pub fn spectrum(
    flags: &SystemArgs,
    range: Option<&str>,
    cfg: &FileConfig,
) -> Result<Table, CliError> {
    let m = merge_system(flags, &cfg.system);
    let gamma0 = m.gamma0.ok_or_else(|| usage("--gamma0 is required"))?;
    let default_range = format!("{}:{}:401", -4.0 * m.big_gamma, 4.0 * m.big_gamma);
    let text = range
        .or(cfg.spectrum.delta_range.as_deref())
        .unwrap_or(&default_range);
    let (start, stop, count) = parse_range(text, "delta-range")?;
    let grid = GridSpec::linear(start, stop, count);

    let mut table = Table::new(vec![
        "delta",
        "re_lambda_plus",
        "re_lambda_minus",
        "im_lambda_plus",
        "im_lambda_minus",
    ]);
    for delta in grid.points()? {
        let p = build(delta, &m, gamma0)?;
        let s = eigensystem(&build_effective_hamiltonian(&p)?, DEFAULT_EP_TOL)?;
        table.push(vec![
            delta.into(),
            s.lambda_plus.re.into(),
            s.lambda_minus.re.into(),
            s.lambda_plus.im.into(),
            s.lambda_minus.im.into(),
        ]);
    }
    table.params = json!({ "big_gamma": m.big_gamma, "gamma0": gamma0 });
    table.grid = to_value(&grid);
    Ok(table)
}

pub fn phase(flags: &SystemArgs, ep_tol: Option<f64>, cfg: &FileConfig) -> Result<Table, CliError> {
    let p = system(flags, &cfg.system)?;
    let tol = ep_tol.or(cfg.phase.ep_tol).unwrap_or(DEFAULT_EP_TOL);
    let s = eigensystem(&build_effective_hamiltonian(&p)?, tol)?;
    let mut table = Table::new(vec![
        "phase",
        "re_lambda_plus",
        "im_lambda_plus",
        "re_lambda_minus",
        "im_lambda_minus",
        "eigenvector_alignment",
    ]);
    table.push(vec![
        s.phase.to_string().into(),
        s.lambda_plus.re.into(),
        s.lambda_plus.im.into(),
        s.lambda_minus.re.into(),
        s.lambda_minus.im.into(),
        s.eigenvector_alignment().into(),
    ]);
    table.params = json!({ "system": to_value(&p), "ep_tol": tol });
    Ok(table)
}

pub fn critical(flags: &SystemArgs, cfg: &FileConfig) -> Result<Table, CliError> {
    let p = system(flags, &cfg.system)?;
    let c = critical_frequencies(&p)?;
    let case = c.case_label.to_string();
    let mut table = Table::new(vec!["case", "quantity", "re", "im"]);
    for (name, z) in [
        ("omega_sq_plus", c.omega_sq_plus),
        ("omega_sq_minus", c.omega_sq_minus),
    ] {
        table.push(vec![
            case.as_str().into(),
            name.into(),
            z.re.into(),
            z.im.into(),
        ]);
    }
    for &w in &c.real_roots {
        table.push(vec![
            case.as_str().into(),
            "real_root".into(),
            w.into(),
            0.0.into(),
        ]);
    }
    table.params = json!({ "system": to_value(&p) });
    Ok(table)
}

pub struct QcrbRequest<'a> {
    pub system: &'a SystemArgs,
    pub probe: &'a ProbeArgs,
    pub epsilon: Option<f64>,
    pub omega_range: Option<&'a str>,
    pub log: bool,
}

pub fn qcrb(req: QcrbRequest<'_>, cfg: &FileConfig) -> Result<Table, CliError> {
    let epsilon = req.epsilon.or(cfg.qcrb.epsilon);
    let p = system_or_perturbed(req.system, &cfg.system, epsilon)?;
    let probe = probe(req.probe, &cfg.probe, p.big_gamma)?;
    let text = req
        .omega_range
        .or(cfg.qcrb.omega_range.as_deref())
        .unwrap_or("1e-4:1e-1:200");
    let (start, stop, count) = parse_range(text, "omega-range")?;
    let log = req.log || cfg.qcrb.log.unwrap_or(false);
    let grid = if log {
        GridSpec::log(start, stop, count)
    } else {
        GridSpec::linear(start, stop, count)
    };
    let sweep = qcrb_sweep(&p, &grid.points()?, &probe)?;

    let mut table = Table::new(vec!["omega", "qfi", "qcrb", "status"]);
    for r in &sweep.rows {
        table.push(vec![
            r.omega.into(),
            r.qfi.into(),
            r.qcrb.into(),
            r.status.as_str().into(),
        ]);
    }
    table.params = json!({ "system": to_value(&p), "probe": to_value(&probe), "epsilon": epsilon });
    table.grid = to_value(&grid);
    Ok(table)
}

pub fn laurent(
    flags: &SystemArgs,
    epsilon: Option<f64>,
    radii: Option<&[f64]>,
    cfg: &FileConfig,
) -> Result<Table, CliError> {
    let epsilon = epsilon.or(cfg.laurent.epsilon);
    let p = system_or_perturbed(flags, &cfg.system, epsilon)?;
    let radii: Vec<f64> = radii
        .or(cfg.laurent.radii.as_deref())
        .unwrap_or(&[1e-2, 1e-3, 1e-4])
        .iter()
        .map(|r| r * p.big_gamma)
        .collect();
    let expansion = analytic_laurent(&p)?;
    let report = numerical_residue(&p, expansion.omega0, expansion.order_m, &radii)?;

    let case = expansion.case_label.to_string();
    let mut table = Table::new(vec![
        "case",
        "omega0",
        "order_m",
        "row",
        "col",
        "analytic",
        "numerical",
        "abs_diff",
    ]);
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let a = expansion.coefficient[(i, j)];
            let n = report.limit[(i, j)];
            worst = worst.max((a - n).abs());
            table.push(vec![
                case.as_str().into(),
                expansion.omega0.into(),
                (expansion.order_m as usize).into(),
                i.into(),
                j.into(),
                a.into(),
                n.into(),
                (a - n).abs().into(),
            ]);
        }
    }
    table.params = json!({
        "system": to_value(&p),
        "epsilon": epsilon,
        "radii": radii,
        "deviations": report.deviations,
        "two_sided_gap": report.two_sided_gap,
        "max_abs_diff": worst,
    });
    Ok(table)
}

pub struct PoleFitRequest<'a> {
    pub input: Option<&'a std::path::Path>,
    pub omega0: Option<f64>,
    pub window: Option<&'a str>,
    pub derivative_step: Option<f64>,
}

pub fn pole_fit(req: PoleFitRequest<'_>, cfg: &FileConfig) -> Result<Table, CliError> {
    let section = &cfg.pole_fit;
    let input = req.input.or(section.input.as_deref());
    let bytes = match input {
        Some(path) if path.as_os_str() != "-" => std::fs::read(path)
            .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?,
        _ => {
            let mut buf = Vec::new();
            std::io::stdin()
                .read_to_end(&mut buf)
                .map_err(|e| usage(format!("cannot read standard input: {e}")))?;
            buf
        }
    };
    let sweep = parse_sweep(&bytes)?;
    let omega0 = req.omega0.or(section.omega0).unwrap_or(0.0);
    let window = parse_window(
        req.window
            .or(section.window.as_deref())
            .unwrap_or("1e-4:1e-2"),
    )?;
    let step = req
        .derivative_step
        .or(section.derivative_step)
        .or(sweep.derivative_step)
        .unwrap_or(DEFAULT_DERIVATIVE_STEP);
    let fit = fit_rows(&sweep.rows, omega0, window, step)?;

    let mut table = Table::new(vec![
        "m_estimate",
        "intercept",
        "r_squared",
        "window_lo",
        "window_hi",
        "rows_used",
    ]);
    table.push(vec![
        fit.m_estimate.into(),
        fit.intercept.into(),
        fit.r_squared.into(),
        fit.window.0.into(),
        fit.window.1.into(),
        fit.rows_used.into(),
    ]);
    table.params = json!({ "omega0": omega0, "derivative_step": step });
    Ok(table)
}

/// Rotating-frame parameters and frame centre of each preset.
fn preset_system(preset: Preset) -> (f64, f64, f64, f64) {
    // (delta, big_gamma, gamma0, centre)
    match preset {
        Preset::Lossy => (1.0, 1.0, 1.0, 0.5),
        Preset::Ep => (2.0, 1.0, 1.0, 1.0),
        Preset::GainEp => (2.0, 1.0, -1.0, 1.0),
        Preset::Decoupled => (0.0, 0.0, 1.0, 0.0),
    }
}

pub struct ValidateRequest<'a> {
    pub preset: Option<Preset>,
    pub system: &'a SystemArgs,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

pub fn validate(req: ValidateRequest<'_>, cfg: &FileConfig) -> Result<Table, CliError> {
    let section = &cfg.validate;
    let preset = req.preset.or(section.preset).unwrap_or(Preset::Lossy);
    let (delta, big_gamma, gamma0, centre) = preset_system(preset);
    let f = req.system;
    let s = &cfg.system;
    let big_gamma = f.big_gamma.or(s.big_gamma).unwrap_or(big_gamma);
    let sys = SystemParams::with_bath(
        f.delta.or(s.delta).unwrap_or(delta),
        big_gamma,
        f.gamma0.or(s.gamma0).unwrap_or(gamma0),
        f.gamma_c.or(s.gamma_c).unwrap_or(0.0),
        f.gamma_bath.or(s.gamma_bath).unwrap_or(big_gamma),
    )?;
    let frame = FullFrameParams::centered(centre.max(sys.delta.abs() / 2.0), sys)?;
    let lindblad = FockLindbladConfig {
        dt: (0.01 / max_rate(&frame)).min(1e-3),
        ..Default::default()
    };
    let samples = req.samples.or(section.samples).unwrap_or(300);
    let seed = req.seed.or(section.seed).unwrap_or(7);

    let mut table = Table::new(vec!["suite", "name", "status", "worst", "tolerance"]);
    let mut failures = Vec::new();
    for leg in cross_validate(&frame, &lindblad).legs {
        let (status, worst) = match &leg.outcome {
            LegOutcome::Passed { max_deviation } => ("passed", *max_deviation),
            LegOutcome::Failed { max_deviation } => ("failed", *max_deviation),
            LegOutcome::Skipped { .. } => ("skipped", f64::NAN),
            LegOutcome::Errored { message } => {
                failures.push(format!("{}: {message}", leg.name));
                ("errored", f64::NAN)
            }
        };
        if status == "failed" {
            failures.push(format!(
                "{}: deviation {worst:e} above {:e}",
                leg.name, leg.tolerance
            ));
        }
        table.push(vec![
            "dynamics".into(),
            leg.name.into(),
            status.into(),
            worst.into(),
            leg.tolerance.into(),
        ]);
    }
    for c in invariants::run_all(samples, seed).checks {
        if !c.passed {
            failures.push(format!(
                "{}: worst {:e} above {:e}",
                c.name, c.worst, c.tolerance
            ));
        }
        let status = if c.passed { "passed" } else { "failed" };
        table.push(vec![
            "invariants".into(),
            c.name.into(),
            status.into(),
            c.worst.into(),
            c.tolerance.into(),
        ]);
    }
    if !failures.is_empty() {
        return Err(CliError::Numerical(format!(
            "validation failed\n  {}",
            failures.join("\n  ")
        )));
    }
    table.params = json!({
        "preset": format!("{preset:?}").to_lowercase(),
        "frame": to_value(&frame),
        "lindblad": to_value(&lindblad),
        "samples": samples,
        "seed": seed,
    });
    Ok(table)
}
