use antipt_core::metrology::{output_covariance, output_mean, Covariance};
use antipt_core::model::{check_anti_pt, max_abs, DEFAULT_EP_TOL};
use antipt_core::transfer::{
    critical_omega_squared, inverse_transfer_matrix, transfer_determinant,
};
use antipt_core::*;
use nalgebra::{Matrix4, Schur, SymmetricEigen};
use num_complex::Complex64;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = SystemParams> {
    (-5.0..5.0f64, 0.1..3.0f64, -3.0..3.0f64, 0.0..1.0f64)
        .prop_map(|(d, c, g0, gc)| SystemParams::new(d, c, g0, gc).unwrap())
}

// Closed-form determinant, re-derived from det([[A,B],[-B,A]]) = |det(A+iB)|^2.
fn closed_form_det(p: &SystemParams, w: f64) -> f64 {
    let g = p.gamma0 + p.big_gamma;
    let k = p.delta * p.delta / 4.0 - p.big_gamma * p.big_gamma;
    (g * g - w * w + k).powi(2) + 4.0 * g * g * w * w
}

fn pair_distance(x: [Complex64; 2], y: [Complex64; 2]) -> f64 {
    let straight = (x[0] - y[0]).norm().max((x[1] - y[1]).norm());
    let crossed = (x[0] - y[1]).norm().max((x[1] - y[0]).norm());
    straight.min(crossed)
}

proptest! {
    #[test]
    fn anti_pt_identity(p in params()) {
        let h = build_effective_hamiltonian(&p).unwrap();
        prop_assert!(check_anti_pt(&h) <= 1e-14 * max_abs(&h));
    }

    #[test]
    fn spectral_consistency(p in params()) {
        let h = build_effective_hamiltonian(&p).unwrap();
        let s = eigensystem(&h, DEFAULT_EP_TOL).unwrap();
        let tr = Complex64::new(0.0, -2.0 * (p.gamma0 + p.big_gamma));
        prop_assert!((s.lambda_plus + s.lambda_minus - tr).norm() <= 1e-12 * tr.norm().max(1e-300));
        let det = h.determinant();
        prop_assert!((s.lambda_plus * s.lambda_minus - det).norm() <= 1e-12 * det.norm().max(1e-300));
    }

    #[test]
    fn eigenvalues_match_schur(p in params()) {
        let h = build_effective_hamiltonian(&p).unwrap();
        let s = eigensystem(&h, DEFAULT_EP_TOL).unwrap();
        let theirs = Schur::new(h).eigenvalues().unwrap();
        // non-normal matrices near the EP lose half the digits in any solver
        let gap = pair_distance([s.lambda_plus, s.lambda_minus], [theirs[0], theirs[1]]);
        prop_assert!(gap <= 1e-7 * h.norm(), "{gap}");
    }

    #[test]
    fn phase_and_eigenvalues(p in params()) {
        prop_assume!((p.delta.abs() - 2.0 * p.big_gamma).abs() > 1e-6);
        let s = eigensystem(&build_effective_hamiltonian(&p).unwrap(), DEFAULT_EP_TOL).unwrap();
        prop_assert_eq!(s.phase, classify_phase(&p, DEFAULT_EP_TOL).unwrap());
        match s.phase {
            Phase::Unbroken => {
                prop_assert!(s.lambda_plus.re.abs() <= 1e-10 * p.big_gamma);
                prop_assert!(s.lambda_minus.re.abs() <= 1e-10 * p.big_gamma);
            }
            Phase::Broken => {
                let root = p.discriminant().sqrt();
                prop_assert!((s.lambda_plus.re - root).abs() <= 1e-10 * root);
                prop_assert!((s.lambda_minus.re + root).abs() <= 1e-10 * root);
            }
            Phase::ExceptionalPoint => unreachable!(),
        }
    }

    #[test]
    fn eigenvector_residual(p in params()) {
        let h = build_effective_hamiltonian(&p).unwrap();
        let s = eigensystem(&h, DEFAULT_EP_TOL).unwrap();
        for (l, v) in [(s.lambda_plus, s.psi_plus), (s.lambda_minus, s.psi_minus)] {
            prop_assert!((h * v - v * l).norm() <= 1e-10 * h.norm() * v.norm().max(1.0));
        }
    }

    #[test]
    fn frame_covariance(p in params(), center in 3.0..10.0f64) {
        let full = FullFrameParams::centered(center, p).unwrap();
        let lab = eigensystem(&build_full_hamiltonian(&full).unwrap(), DEFAULT_EP_TOL).unwrap();
        let rot = eigensystem(&build_effective_hamiltonian(&full.system).unwrap(), DEFAULT_EP_TOL).unwrap();
        let shift = Complex64::from(full.frame_frequency());
        let gap = pair_distance(
            [lab.lambda_plus, lab.lambda_minus],
            [rot.lambda_plus + shift, rot.lambda_minus + shift],
        );
        // a near-EP square root amplifies the rounding of the shifted diagonal
        let tol = if lab.phase == Phase::ExceptionalPoint { 1e-6 } else { 1e-12 };
        prop_assert!(gap <= tol * shift.norm().max(1.0), "{gap}");
    }

    #[test]
    fn block_structure(p in params(), w in -5.0..5.0f64) {
        let m = inverse_transfer_matrix(&p, w).unwrap().matrix;
        let g = p.gamma0 + p.big_gamma;
        #[rustfmt::skip]
        let expected = Matrix4::new(
            g, p.big_gamma, w - p.delta / 2.0, 0.0,
            p.big_gamma, g, 0.0, w + p.delta / 2.0,
            -w + p.delta / 2.0, 0.0, g, p.big_gamma,
            0.0, -w - p.delta / 2.0, p.big_gamma, g,
        );
        prop_assert_eq!(m, expected);
    }

    #[test]
    fn determinant_factorization(p in params(), w in -5.0..5.0f64) {
        let numeric = transfer_determinant(&p, w).unwrap();
        let oracle = closed_form_det(&p, w);
        prop_assert!((numeric - oracle).abs() <= 1e-10 * oracle.abs(), "{numeric} vs {oracle}");
    }

    #[test]
    fn inversion_round_trip(p in params(), w in -5.0..5.0f64) {
        let g = transfer_matrix(&p, w).unwrap().matrix;
        let inv = inverse_transfer_matrix(&p, w).unwrap().matrix;
        prop_assert!((g * inv - Matrix4::identity()).amax() <= 1e-10 * g.amax().max(1.0));
    }

    #[test]
    fn unbroken_ceiling(g0 in -3.0..1.0f64, d in -2.0..2.0f64) {
        let p = SystemParams::new(d, 1.0, g0, 0.0).unwrap();
        let (plus, minus) = critical_omega_squared(&p);
        let r = (1.0 - d * d / 4.0).sqrt();
        let g = (g0 + 1.0).abs();
        prop_assert!((plus.re + (g - r).powi(2)).abs() <= 1e-12);
        prop_assert!((minus.re + (g + r).powi(2)).abs() <= 1e-12);
        prop_assert!(plus.re <= 1e-12);
    }

    #[test]
    fn mean_is_linear(p in params(), w in -3.0..3.0f64,
                      u in prop::array::uniform4(-3.0..3.0f64), v in prop::array::uniform4(-3.0..3.0f64),
                      alpha in -2.0..2.0f64) {
        let probe = |mu: [f64; 4]| ProbeConfig { mu_in: mu, ..Default::default() };
        let mut combo = [0.0; 4];
        for k in 0..4 { combo[k] = u[k] + alpha * v[k]; }
        let lhs = output_mean(&p, w, &probe(combo)).unwrap();
        let rhs = output_mean(&p, w, &probe(u)).unwrap() + output_mean(&p, w, &probe(v)).unwrap() * alpha;
        prop_assert!((lhs - rhs).amax() <= 1e-12 * rhs.amax().max(1.0) * 10.0);
    }

    #[test]
    fn covariance_symmetric_psd(p in params(), w in -3.0..3.0f64) {
        let Covariance::Real(v) = output_covariance(&p, w, &ProbeConfig::default()).unwrap() else {
            unreachable!()
        };
        prop_assert_eq!(v, v.transpose());
        let eig = SymmetricEigen::new(v).eigenvalues;
        prop_assert!(eig.iter().all(|&e| e >= -1e-10 * v.amax().max(1.0)));
    }

    #[test]
    fn qfi_step_consistency(g0 in 0.1..2.0f64, d in -3.0..3.0f64, gc in 0.1..1.0f64, w in -2.0..2.0f64) {
        // lossy parameters keep every frequency far from a pole
        let p = SystemParams::new(d, 1.0, g0, gc).unwrap();
        let coarse = ProbeConfig { derivative_step: 1e-4, ..Default::default() };
        let fine = ProbeConfig { derivative_step: 5e-5, ..Default::default() };
        let a = qfi(&p, w, &coarse).unwrap();
        let b = qfi(&p, w, &fine).unwrap();
        prop_assert!((a - b).abs() <= 1e-4 * b.abs().max(1e-300), "{a} vs {b}");
    }
}

#[test]
fn qfi_matches_exact_derivative() {
    // dmu/domega = gc G (dG^{-1}/domega) G mu with dG^{-1}/domega = [[0, I], [-I, 0]]
    let p = SystemParams::new(2.0, 1.0, -1.0, 0.5).unwrap();
    let probe = ProbeConfig::default();
    #[rustfmt::skip]
    let d_inv = Matrix4::new(
        0.0, 0.0, 1.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
        -1.0, 0.0, 0.0, 0.0,
        0.0, -1.0, 0.0, 0.0,
    );
    for w in [1e-3, 1e-2, 0.1] {
        let g = transfer_matrix(&p, w).unwrap().matrix;
        let mu = nalgebra::Vector4::from(probe.mu_in);
        let exact = g * d_inv * g * mu * p.gamma_c;
        let numeric = antipt_core::metrology::output_mean_derivative(&p, w, &probe).unwrap();
        assert!((numeric - exact).amax() <= 1e-4 * exact.amax(), "w = {w}");
    }
}

#[test]
fn sweep_is_deterministic() {
    let p = SystemParams::perturbed_ep(0.1, 1.0, 0.5).unwrap();
    let grid = GridSpec::linear(1e-3, 1.0, 300).points().unwrap();
    let a = qcrb_sweep(&p, &grid, &ProbeConfig::default()).unwrap();
    let b = qcrb_sweep(&p, &grid, &ProbeConfig::default()).unwrap();
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert_eq!(x.qfi.to_bits(), y.qfi.to_bits());
        assert_eq!(x.qcrb.to_bits(), y.qcrb.to_bits());
    }
}

#[test]
fn supermode_decay_rates_match_spectrum() {
    use antipt_core::dynamics::semiclassical_evolve;
    for (delta, gamma0) in [(0.0, 1.0), (1.2, 0.4), (3.0, 0.5)] {
        let sys = SystemParams::new(delta, 1.0, gamma0, 0.0).unwrap();
        let frame = FullFrameParams::centered(2.0, sys).unwrap();
        let s = eigensystem(&build_effective_hamiltonian(&sys).unwrap(), DEFAULT_EP_TOL).unwrap();
        for (lambda, psi) in [(s.lambda_plus, s.psi_plus), (s.lambda_minus, s.psi_minus)] {
            let times = [0.0, 1.0, 2.0];
            let tr = semiclassical_evolve(&frame, psi[0], psi[1], &times).unwrap();
            // an eigenvector stays parallel to itself and decays at -Im(lambda)
            let amp = |k: usize| (tr.a_mean[k].norm_sqr() + tr.b_mean[k].norm_sqr()).sqrt();
            let rate = -(amp(2) / amp(1)).ln();
            assert!(
                (rate + lambda.im).abs() <= 1e-6 * lambda.im.abs(),
                "{rate} vs {}",
                -lambda.im
            );
        }
    }
}
