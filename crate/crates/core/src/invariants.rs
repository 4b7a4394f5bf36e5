//! Randomized and gridded invariant suites, run by `antipt validate`.

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::grid::GridSpec;
use crate::laurent::{analytic_laurent, numerical_residue, pole_order_fit};
use crate::metrology::{qcrb_sweep, ProbeConfig};
use crate::model::{
    build_effective_hamiltonian, check_anti_pt, eigensystem, max_abs, Phase, DEFAULT_EP_TOL,
};
use crate::params::SystemParams;
use crate::transfer::{critical_frequencies, critical_omega_squared, transfer_determinant};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    pub tolerance: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub checks: Vec<Check>,
}

impl InvariantReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &str, worst: f64, tolerance: f64, samples: usize) -> Check {
    Check {
        name: name.to_string(),
        passed: worst <= tolerance,
        worst,
        tolerance,
        samples,
    }
}

fn random_params(rng: &mut ChaCha8Rng) -> SystemParams {
    let big_gamma = rng.gen_range(0.1..3.0);
    SystemParams::new(
        rng.gen_range(-5.0..5.0),
        big_gamma,
        rng.gen_range(-3.0..3.0),
        rng.gen_range(0.0..1.0),
    )
    .expect("sampled parameters are valid")
}

/// Anti-PT identity residual relative to the largest entry.
pub fn anti_pt_suite(samples: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let worst = (0..samples)
        .map(|_| {
            let h = build_effective_hamiltonian(&random_params(&mut rng)).unwrap();
            check_anti_pt(&h) / max_abs(&h)
        })
        .fold(0.0, f64::max);
    check("anti-pt-identity", worst, 1e-14, samples)
}

/// Eigenvalue sum and product against trace and determinant.
pub fn spectral_suite(samples: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let h = build_effective_hamiltonian(&random_params(&mut rng)).unwrap();
        let s = eigensystem(&h, DEFAULT_EP_TOL).unwrap();
        let tr = h.trace();
        let det = h.determinant();
        let sum_err =
            (s.lambda_plus + s.lambda_minus - tr).norm() / tr.norm().max(f64::MIN_POSITIVE);
        let prod_err =
            (s.lambda_plus * s.lambda_minus - det).norm() / det.norm().max(f64::MIN_POSITIVE);
        worst = worst.max(sum_err).max(prod_err);
    }
    check("spectral-consistency", worst, 1e-12, samples)
}

/// Eigenvalue splitting (relative to `Gamma`) and eigenvector alignment on `delta = 2 Gamma`.
pub fn ep_coalescence_suite(samples: usize, seed: u64) -> [Check; 2] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut split: f64 = 0.0;
    let mut misalign: f64 = 0.0;
    for _ in 0..samples {
        let big_gamma = rng.gen_range(0.1..3.0);
        let p =
            SystemParams::new(2.0 * big_gamma, big_gamma, rng.gen_range(-3.0..3.0), 0.0).unwrap();
        let s = eigensystem(&build_effective_hamiltonian(&p).unwrap(), DEFAULT_EP_TOL).unwrap();
        split = split.max((s.lambda_plus - s.lambda_minus).norm() / big_gamma);
        misalign = misalign.max(1.0 - s.eigenvector_alignment());
        if s.phase != Phase::ExceptionalPoint {
            misalign = f64::INFINITY;
        }
    }
    [
        check("ep-degeneracy", split, 1e-10, samples),
        check("ep-eigenvector-alignment", misalign, 1e-8, samples),
    ]
}

// det([[A, B], [-B, A]]) = det(A + iB) det(A - iB) for the transfer blocks.
fn factorized_determinant(p: &SystemParams, omega: f64) -> f64 {
    let g = Complex64::from(p.total_damping());
    let c = Complex64::from(p.big_gamma);
    let lo = Complex64::from(omega - p.delta / 2.0);
    let hi = Complex64::from(omega + p.delta / 2.0);
    let i = Complex64::I;
    let plus = Matrix2::new(g + i * lo, c, c, g + i * hi).determinant();
    let minus = Matrix2::new(g - i * lo, c, c, g - i * hi).determinant();
    (plus * minus).re
}

/// Elimination determinant against the complex block factorization.
pub fn determinant_suite(samples: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let p = random_params(&mut rng);
        let omega = rng.gen_range(-5.0..5.0);
        let numeric = transfer_determinant(&p, omega).unwrap();
        let oracle = factorized_determinant(&p, omega);
        worst = worst.max((numeric - oracle).abs() / oracle.abs().max(1e-300));
    }
    check("determinant-factorization", worst, 1e-10, samples)
}

/// Every reported real root zeroes the determinant.
pub fn root_certification_suite(samples: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for k in 0..samples {
        let big_gamma = rng.gen_range(0.2..2.0);
        let p = if k % 2 == 0 {
            let delta = rng.gen_range(2.05..6.0) * big_gamma;
            SystemParams::new(delta, big_gamma, -big_gamma, 0.0).unwrap()
        } else {
            let gamma0 = rng.gen_range(-1.95..-0.05) * big_gamma;
            let delta = crate::transfer::unbroken_lasing_locus(gamma0, big_gamma).unwrap();
            SystemParams::new(delta, big_gamma, gamma0, 0.0).unwrap()
        };
        let cf = critical_frequencies(&p).unwrap();
        let norm = transfer_determinant(&p, 0.0).unwrap().abs().max(1.0);
        if cf.real_roots.is_empty() {
            worst = f64::INFINITY;
        }
        for w in cf.real_roots {
            worst = worst.max(transfer_determinant(&p, w).unwrap().abs() / norm);
            count += 1;
        }
    }
    check("root-certification", worst, 1e-8, count)
}

/// Unbroken-region ceiling: `omega_+^2 <= 0`, zero only on the lasing ellipse.
pub fn unbroken_ceiling_suite(n: usize) -> Check {
    let mut worst: f64 = 0.0;
    let mut samples = 0;
    for i in 0..n {
        for j in 0..n {
            let gamma0 = -3.0 + 4.0 * (i as f64 + 0.5) / n as f64;
            let delta = -2.0 + 4.0 * (j as f64 + 0.5) / n as f64;
            let p = SystemParams::new(delta, 1.0, gamma0, 0.0).unwrap();
            let (plus, _) = critical_omega_squared(&p);
            worst = worst.max(plus.re).max(plus.im.abs());
            samples += 1;
        }
    }
    check("unbroken-ceiling", worst, 1e-12, samples)
}

fn case_params() -> [SystemParams; 3] {
    [
        SystemParams::new(2.0, 1.0, -1.0, 0.5).unwrap(),
        SystemParams::new(4.0, 1.0, -1.0, 0.5).unwrap(),
        SystemParams::new(3f64.sqrt(), 1.0, -0.5, 0.5).unwrap(),
    ]
}

/// Numerical residues against the analytic Laurent terms for the three cases.
pub fn laurent_suite() -> Check {
    let mut worst: f64 = 0.0;
    for p in case_params() {
        let l = analytic_laurent(&p).unwrap();
        match numerical_residue(&p, l.omega0, l.order_m, &[1e-2, 1e-3, 1e-4]) {
            Ok(rep) => {
                worst = worst
                    .max((rep.limit - l.coefficient).amax())
                    .max(rep.two_sided_gap)
            }
            Err(_) => worst = f64::INFINITY,
        }
    }
    check("laurent-oracle", worst, 1e-3, 3)
}

/// Fitted QCRB slope against the analytic pole order.
pub fn scaling_suite() -> Check {
    let mut worst: f64 = 0.0;
    for p in case_params() {
        let l = analytic_laurent(&p).unwrap();
        let offsets = GridSpec::log(1e-4, 1e-2, 60).points().unwrap();
        let grid: Vec<f64> = offsets.iter().map(|d| l.omega0 + d).collect();
        let sweep = qcrb_sweep(&p, &grid, &ProbeConfig::scaled(p.big_gamma)).unwrap();
        match pole_order_fit(&sweep, l.omega0, (1e-4, 1e-2)) {
            Ok(fit) => worst = worst.max((fit.m_estimate - l.order_m as f64).abs()),
            Err(_) => worst = f64::INFINITY,
        }
    }
    check("scaling-order", worst, 0.05, 3)
}

/// All suites with a fixed seed.
pub fn run_all(samples: usize, seed: u64) -> InvariantReport {
    let mut checks = vec![
        anti_pt_suite(samples, seed),
        spectral_suite(samples, seed.wrapping_add(1)),
    ];
    checks.extend(ep_coalescence_suite(samples.min(200), seed.wrapping_add(2)));
    checks.extend([
        determinant_suite(samples, seed.wrapping_add(3)),
        root_certification_suite(samples.min(200), seed.wrapping_add(4)),
        unbroken_ceiling_suite(100),
        laurent_suite(),
        scaling_suite(),
    ]);
    InvariantReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass() {
        let report = run_all(300, 7);
        for c in &report.checks {
            assert!(c.passed, "{c:?}");
        }
    }
}
