//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::path::Path;
use std::process::Command;

use antipt_core::dynamics::{cross_validate, FockLindbladConfig, LegOutcome};
use antipt_core::laurent::ep_coefficient_matrix;
use antipt_core::metrology::RowStatus;
use antipt_core::model::{check_anti_pt, max_abs, DEFAULT_EP_TOL};
use antipt_core::transfer::{critical_omega_squared, transfer_determinant};
use antipt_core::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn random_params(rng: &mut ChaCha8Rng) -> SystemParams {
    SystemParams::new(
        rng.gen_range(-6.0..6.0),
        rng.gen_range(0.05..4.0),
        rng.gen_range(-4.0..4.0),
        rng.gen_range(0.0..1.0),
    )
    .unwrap()
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ep_degeneracy() -> Outcome {
    let mut gap: f64 = 0.0;
    let mut misalign: f64 = 0.0;
    for big_gamma in [0.3, 1.0, 2.5] {
        for gamma0 in [-3.0, -1.0, 0.0, 0.7, 4.0] {
            for sign in [1.0, -1.0] {
                let p = SystemParams::new(sign * 2.0 * big_gamma, big_gamma, gamma0, 0.5).unwrap();
                let s =
                    eigensystem(&build_effective_hamiltonian(&p).unwrap(), DEFAULT_EP_TOL).unwrap();
                gap = gap.max((s.lambda_plus - s.lambda_minus).norm() / big_gamma);
                misalign = misalign.max(1.0 - s.eigenvector_alignment());
            }
        }
    }
    ensure(
        gap <= 1e-10 && misalign <= 1e-8,
        format!("max |l+ - l-|/Gamma = {gap:.2e}, max 1 - alignment = {misalign:.2e}"),
    )
}

fn anti_pt() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let h = build_effective_hamiltonian(&random_params(&mut rng)).unwrap();
        worst = worst.max(check_anti_pt(&h) / max_abs(&h));
    }
    ensure(
        worst <= 1e-14,
        format!("worst relative residual {worst:.2e} over 1000 draws"),
    )
}

/// `(g^2 - w^2 + K)^2 + 4 g^2 w^2`.
fn closed_form_det(p: &SystemParams, w: f64) -> f64 {
    let g = p.gamma0 + p.big_gamma;
    let k = p.delta * p.delta / 4.0 - p.big_gamma * p.big_gamma;
    (g * g - w * w + k).powi(2) + 4.0 * g * g * w * w
}

/// `|det(A + iB)|^2` from the 2x2 blocks, written out by hand.
fn block_det(p: &SystemParams, w: f64) -> f64 {
    let g = p.gamma0 + p.big_gamma;
    let d11 = Complex64::new(g, w - p.delta / 2.0);
    let d22 = Complex64::new(g, w + p.delta / 2.0);
    let off = Complex64::from(p.big_gamma);
    (d11 * d22 - off * off).norm_sqr()
}

fn determinant() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let (mut oracle_gap, mut worst): (f64, f64) = (0.0, 0.0);
    for _ in 0..1000 {
        let p = random_params(&mut rng);
        let w = rng.gen_range(-6.0..6.0);
        let closed = closed_form_det(&p, w);
        oracle_gap = oracle_gap.max((closed - block_det(&p, w)).abs() / closed.abs().max(1e-300));
        let numeric = transfer_determinant(&p, w).unwrap();
        worst = worst.max((numeric - closed).abs() / closed.abs().max(1e-300));
    }
    ensure(
        oracle_gap <= 1e-12 && worst <= 1e-10,
        format!("oracle self-check {oracle_gap:.2e}, LU vs closed form {worst:.2e}"),
    )
}

fn critical_roots() -> Outcome {
    let p = SystemParams::new(4.0, 1.0, -1.0, 0.5).unwrap();
    let c = critical_frequencies(&p).unwrap();
    let r3 = 3f64.sqrt();
    let roots_ok = c.real_roots.len() == 2
        && (c.real_roots[0] + r3).abs() <= 1e-9
        && (c.real_roots[1] - r3).abs() <= 1e-9;
    let norm = transfer_determinant(&p, 0.0).unwrap().abs().max(1.0);
    let root_det = c
        .real_roots
        .iter()
        .map(|&w| transfer_determinant(&p, w).unwrap().abs() / norm)
        .fold(0.0, f64::max);

    let mut locus_det: f64 = 0.0;
    for k in 0..20 {
        let gamma0 = -2.0 * (k as f64 + 0.5) / 20.0;
        let delta = (-4.0 * gamma0 * (gamma0 + 2.0)).sqrt();
        let q = SystemParams::new(delta, 1.0, gamma0, 0.5).unwrap();
        locus_det = locus_det.max(transfer_determinant(&q, 0.0).unwrap().abs());
    }
    ensure(
        roots_ok && root_det <= 1e-8 && locus_det <= 1e-8,
        format!(
            "roots {:?}, det at roots {root_det:.2e}, det on locus {locus_det:.2e}",
            c.real_roots
        ),
    )
}

fn unbroken_ceiling() -> Outcome {
    let n = 100;
    let mut ceiling: f64 = f64::NEG_INFINITY;
    let mut wrong_zero = 0;
    let mut corner_zero = 0;
    for i in 0..n {
        // gamma0 / Gamma from -2.96 to 1.0, hitting -1 exactly at i = 49
        let gamma0 = -2.96 + 0.04 * i as f64;
        for j in 0..n {
            let delta = -2.0 + 4.0 * j as f64 / (n - 1) as f64;
            let p = SystemParams::new(delta, 1.0, gamma0, 0.0).unwrap();
            let (plus, minus) = critical_omega_squared(&p);
            ceiling = ceiling.max(plus.re);
            let at_corner = (gamma0 + 1.0).abs() < 1e-9 && (delta.abs() - 2.0).abs() < 1e-12;
            if minus.norm() <= 1e-10 {
                if at_corner {
                    corner_zero += 1;
                } else {
                    wrong_zero += 1;
                }
            }
        }
    }

    let mut ellipse: f64 = 0.0;
    for k in 0..200 {
        let gamma0 = -2.0 * (k as f64 + 0.5) / 200.0;
        let delta = (-4.0 * gamma0 * (gamma0 + 2.0)).sqrt();
        let (plus, _) =
            critical_omega_squared(&SystemParams::new(delta, 1.0, gamma0, 0.0).unwrap());
        ellipse = ellipse.max(plus.norm());
    }
    ensure(
        ceiling <= 1e-12 && ellipse <= 1e-10 && wrong_zero == 0 && corner_zero == 2,
        format!(
            "max w+^2 {ceiling:.2e}, max |w+^2| on ellipse {ellipse:.2e}, w-^2 zeros at corners {corner_zero}, elsewhere {wrong_zero}"
        ),
    )
}

fn laurent() -> Outcome {
    let cases = [
        SystemParams::new(2.0, 1.0, -1.0, 0.5).unwrap(),
        SystemParams::perturbed_ep(0.1, 1.0, 0.5).unwrap(),
        SystemParams::new(3f64.sqrt(), 1.0, -0.5, 0.5).unwrap(),
        SystemParams::new(-2.0 * 1.5, 1.5, -1.5, 0.5).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    for p in &cases {
        let e = analytic_laurent(p).map_err(|e| e.to_string())?;
        let r = 1e-4 * p.big_gamma;
        let m = e.order_m as i32;
        let up = transfer_matrix(p, e.omega0 + r).unwrap().matrix * r.powi(m);
        let down = transfer_matrix(p, e.omega0 - r).unwrap().matrix * (-r).powi(m);
        let residue = (up + down) * 0.5;
        worst = worst.max((residue - e.coefficient).amax());
    }

    let w = 1e-3;
    let g = transfer_matrix(&cases[0], w).unwrap().matrix;
    let ep_gap = (g * (w * w) - ep_coefficient_matrix()).amax();
    ensure(
        worst <= 1e-3 && ep_gap <= 2e-3,
        format!(
            "max residue error {worst:.2e} over 4 cases, EP one-sided gap at 1e-3 {ep_gap:.2e}"
        ),
    )
}

/// Fit on one side of `omega0`; `side` is +1 or -1.
fn slope(p: &SystemParams, omega0: f64, side: f64) -> Result<(f64, f64), String> {
    let offsets = GridSpec::log(1e-4 * p.big_gamma, 1e-2 * p.big_gamma, 81)
        .points()
        .unwrap();
    let mut grid: Vec<f64> = offsets.iter().map(|d| omega0 + side * d).collect();
    grid.sort_by(f64::total_cmp);
    let sweep =
        qcrb_sweep(p, &grid, &ProbeConfig::scaled(p.big_gamma)).map_err(|e| e.to_string())?;
    let fit = pole_order_fit(&sweep, omega0, (1e-4 * p.big_gamma, 1e-2 * p.big_gamma))
        .map_err(|e| e.to_string())?;
    Ok((fit.m_estimate, fit.r_squared))
}

fn scaling() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (eps, target, side) in [
        (0.0, 2.0, 1.0),
        (0.1, 1.0, 1.0),
        (0.1, 1.0, -1.0),
        (-0.1, 1.0, 1.0),
    ] {
        let p = SystemParams::perturbed_ep(eps, 1.0, 0.5).unwrap();
        let omega0 = if eps > 0.0 {
            p.discriminant().sqrt()
        } else {
            0.0
        };
        let (m, r2) = slope(&p, omega0, side)?;
        ok &= (m - target).abs() <= 0.05 && r2 >= 0.999;
        let label = if side > 0.0 { "right" } else { "left" };
        lines.push(format!("eps {eps:+} {label}: m {m:.4} r2 {r2:.6}"));
    }
    ensure(ok, lines.join(", "))
}

fn valley() -> Outcome {
    let eps: f64 = 0.1;
    let p = SystemParams::perturbed_ep(eps, 1.0, 0.5).unwrap();
    let layout = GridSpec::linear(1e-3, 1.0, 2000);
    let grid = layout.points().unwrap();
    let sweep = qcrb_sweep(&p, &grid, &ProbeConfig::default()).map_err(|e| e.to_string())?;
    let best = sweep
        .rows
        .iter()
        .filter(|r| r.status == RowStatus::Ok)
        .min_by(|a, b| a.qcrb.total_cmp(&b.qcrb))
        .ok_or("no usable rows")?;
    let expected = (eps * eps + 4.0 * eps).sqrt() / 2.0;
    let step = grid[1] - grid[0];
    ensure(
        (best.omega - expected).abs() <= step,
        format!(
            "minimum at {:.5}, expected {expected:.5}, grid step {step:.2e}",
            best.omega
        ),
    )
}

fn dynamics() -> Outcome {
    let lossy = [
        FullFrameParams::new(1.0, 0.0, SystemParams::new(1.0, 1.0, 1.0, 0.0).unwrap()).unwrap(),
        FullFrameParams::centered(1.0, SystemParams::new(2.0, 1.0, 1.0, 0.0).unwrap()).unwrap(),
        FullFrameParams::new(0.0, 0.0, SystemParams::new(0.0, 0.5, 1.0, 0.0).unwrap()).unwrap(),
    ];
    let gain_ep =
        FullFrameParams::centered(1.0, SystemParams::new(2.0, 1.0, -1.0, 0.0).unwrap()).unwrap();
    let cfg = FockLindbladConfig {
        dt: 1e-3,
        ..Default::default()
    };
    let (mut lindblad, mut propagator): (f64, f64) = (0.0, 0.0);
    let mut jordan_checked = false;
    for (p, is_lossy) in lossy.iter().map(|p| (p, true)).chain([(&gain_ep, false)]) {
        for leg in cross_validate(p, &cfg).legs {
            let dev = match leg.outcome {
                LegOutcome::Passed { max_deviation } | LegOutcome::Failed { max_deviation } => {
                    max_deviation
                }
                LegOutcome::Skipped { .. } => continue,
                LegOutcome::Errored { message } => return Err(format!("{}: {message}", leg.name)),
            };
            match leg.name.as_str() {
                "lindblad-vs-ode" if is_lossy => lindblad = lindblad.max(dev),
                "ode-vs-propagator" => {
                    propagator = propagator.max(dev);
                    jordan_checked |= !is_lossy;
                }
                _ => {}
            }
        }
    }
    ensure(
        lindblad <= 1e-6 && propagator <= 1e-8 && jordan_checked,
        format!("Lindblad vs ODE {lindblad:.2e}, ODE vs propagator {propagator:.2e} (EP included)"),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        "[system]\nbig_gamma = 1.0\ngamma_c = 0.5\n[qcrb]\nepsilon = 0.1\nomega_range = \"1e-4:1e0:400\"\nlog = true\n",
    )
    .map_err(|e| e.to_string())?;
    let run = |out: &Path, format: &str| -> Result<Vec<u8>, String> {
        let status = Command::new(env!("CARGO_BIN_EXE_antipt"))
            .args(["qcrb", "--config"])
            .arg(&config)
            .args(["--format", format, "--output"])
            .arg(out)
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("antipt exited with {status}"));
        }
        std::fs::read(out).map_err(|e| e.to_string())
    };
    let mut same = true;
    for format in ["csv", "json"] {
        let a = run(&dir.path().join(format!("a.{format}")), format)?;
        let b = run(&dir.path().join(format!("b.{format}")), format)?;
        same &= !a.is_empty() && a == b;
    }
    ensure(
        same,
        "two runs per format, csv and json outputs byte-identical".to_string(),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("EP degeneracy", ep_degeneracy),
        ("anti-PT identity", anti_pt),
        ("determinant factorization", determinant),
        ("critical-frequency roots", critical_roots),
        ("unbroken ceiling", unbroken_ceiling),
        ("Laurent coefficients", laurent),
        ("scaling slopes", scaling),
        ("broken-phase valley", valley),
        ("dynamics equivalence", dynamics),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
