//! Time-domain cross-checks: amplitude equations, matrix-exponential
//! propagator and a truncated-Fock master equation.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{build_full_hamiltonian, drift, ComplexMat2, ComplexVec2};
use crate::params::FullFrameParams;

/// Population allowed at the Fock cutoff before a run is rejected.
pub const CUTOFF_LEAK_TOL: f64 = 1e-6;
/// Step-halving target for the amplitude integrator.
pub const ODE_TOL: f64 = 1e-10;
pub const ODE_VS_PROPAGATOR_TOL: f64 = 1e-8;
pub const LINDBLAD_VS_ODE_TOL: f64 = 1e-6;
pub const TRACE_TOL: f64 = 1e-8;
pub const POSITIVITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeTrajectory {
    pub times: Vec<f64>,
    pub a_mean: Vec<Complex64>,
    pub b_mean: Vec<Complex64>,
}

impl AmplitudeTrajectory {
    /// Largest pointwise amplitude difference; the time grids must match.
    pub fn max_deviation(&self, other: &AmplitudeTrajectory) -> f64 {
        assert_eq!(
            self.times.len(),
            other.times.len(),
            "trajectory lengths differ"
        );
        self.a_mean
            .iter()
            .zip(&other.a_mean)
            .chain(self.b_mean.iter().zip(&other.b_mean))
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(invalid("times", "must be finite"));
    }
    if times.first().is_some_and(|&t| t < 0.0) {
        return Err(invalid("times", "must start at or after 0"));
    }
    if times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid("times", "must be strictly increasing"));
    }
    Ok(())
}

fn rk4_step(d: &ComplexMat2, y: &ComplexVec2, h: f64) -> ComplexVec2 {
    let h = Complex64::from(h);
    let k1 = d * y;
    let k2 = d * (y + k1 * (h * 0.5));
    let k3 = d * (y + k2 * (h * 0.5));
    let k4 = d * (y + k3 * h);
    let two = Complex64::from(2.0);
    y + (k1 + k2 * two + k3 * two + k4) * (h / 6.0)
}

fn rk4_span(d: &ComplexMat2, y: &ComplexVec2, span: f64, steps: usize) -> ComplexVec2 {
    let h = span / steps as f64;
    (0..steps).fold(*y, |acc, _| rk4_step(d, &acc, h))
}

/// Integrates the mean-amplitude equations in the lab frame.
///
/// Fixed-step RK4 between output times; the step count is doubled until two
/// successive resolutions agree to `ODE_TOL`.
pub fn semiclassical_evolve(
    p: &FullFrameParams,
    a0: Complex64,
    b0: Complex64,
    times: &[f64],
) -> Result<AmplitudeTrajectory> {
    check_times(times)?;
    let d = drift(&build_full_hamiltonian(p)?);
    let rate = d.iter().fold(0.0f64, |m, z| m.max(z.norm())).max(1e-300);

    let mut y = ComplexVec2::new(a0, b0);
    let mut t = 0.0;
    let mut out = AmplitudeTrajectory {
        times: times.to_vec(),
        a_mean: Vec::with_capacity(times.len()),
        b_mean: Vec::with_capacity(times.len()),
    };
    for &target in times {
        let span = target - t;
        if span > 0.0 {
            let mut steps = ((span * rate / 0.05).ceil() as usize).max(1);
            let mut coarse = rk4_span(&d, &y, span, steps);
            loop {
                steps *= 2;
                let fine = rk4_span(&d, &y, span, steps);
                let err = (fine - coarse).norm();
                coarse = fine;
                if err <= ODE_TOL * fine.norm().max(1.0) || steps > (1 << 24) {
                    break;
                }
            }
            y = coarse;
        }
        t = target;
        out.a_mean.push(y[0]);
        out.b_mean.push(y[1]);
    }
    Ok(out)
}

// sin(z)/z, with a series near the origin.
fn sinc(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        let z2 = z * z;
        Complex64::ONE - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

/// `exp(-i h t)` for a 2x2 matrix.
///
/// With `h = tau I + n`, `n` traceless and `n^2 = q I`,
/// `exp(-i h t) = exp(-i tau t) [cos(s t) I - i t sinc(s t) n]`, `s^2 = q`.
/// At a defective point `q = 0` and this reduces to the Jordan-block form
/// `exp(-i lambda t) (I - i (h - lambda I) t)`.
pub fn propagator(h: &ComplexMat2, t: f64) -> ComplexMat2 {
    let tau = (h[(0, 0)] + h[(1, 1)]) * 0.5;
    let n = h - ComplexMat2::identity() * tau;
    let q = n[(0, 0)] * n[(0, 0)] + n[(0, 1)] * n[(1, 0)];
    let st = q.sqrt() * t;
    let phase = (-Complex64::I * tau * t).exp();
    (ComplexMat2::identity() * st.cos() - n * (Complex64::I * t * sinc(st))) * phase
}

pub fn propagator_evolve(
    h: &ComplexMat2,
    a0: Complex64,
    b0: Complex64,
    times: &[f64],
) -> Result<AmplitudeTrajectory> {
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFiniteMatrix);
    }
    check_times(times)?;
    let y0 = ComplexVec2::new(a0, b0);
    let (a_mean, b_mean) = times
        .iter()
        .map(|&t| {
            let y = propagator(h, t) * y0;
            (y[0], y[1])
        })
        .unzip();
    Ok(AmplitudeTrajectory {
        times: times.to_vec(),
        a_mean,
        b_mean,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FockLindbladConfig {
    /// Fock cutoff per mode.
    pub n_max: usize,
    pub alpha_a: Complex64,
    pub alpha_b: Complex64,
    pub dt: f64,
    pub t_final: f64,
}

impl Default for FockLindbladConfig {
    fn default() -> Self {
        FockLindbladConfig {
            n_max: 5,
            alpha_a: Complex64::new(0.2, 0.0),
            alpha_b: Complex64::new(0.2, 0.0),
            dt: 2e-3,
            t_final: 4.0,
        }
    }
}

/// Rate scale used to bound the master-equation time step.
pub fn max_rate(p: &FullFrameParams) -> f64 {
    let s = &p.system;
    p.omega_a.abs().max(p.omega_b.abs()) + s.gamma0.abs() + 2.0 * s.big_gamma
}

impl FockLindbladConfig {
    pub fn validate(&self, p: &FullFrameParams) -> Result<()> {
        if self.n_max < 1 {
            return Err(invalid("n_max", "must be at least 1"));
        }
        let cap = self.n_max as f64 / 4.0;
        for (name, alpha) in [("alpha_a", self.alpha_a), ("alpha_b", self.alpha_b)] {
            if !alpha.re.is_finite() || !alpha.im.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
            if alpha.norm_sqr() > cap {
                return Err(invalid(
                    name,
                    format!("|alpha|^2 must not exceed n_max/4 = {cap}"),
                ));
            }
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(invalid("t_final", "must be positive"));
        }
        let dt_cap = 0.01 / max_rate(p);
        if !(self.dt > 0.0 && self.dt <= dt_cap) {
            return Err(invalid("dt", format!("must lie in (0, {dt_cap:e}]")));
        }
        Ok(())
    }
}

/// Sparse operator on the truncated two-mode space, stored by rows.
struct Sparse {
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl Sparse {
    fn dim(&self) -> usize {
        self.rows.len()
    }

    /// `self * rho`
    fn left(&self, rho: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim();
        out.fill(Complex64::ZERO);
        for (i, row) in self.rows.iter().enumerate() {
            let dst = &mut out[i * n..(i + 1) * n];
            for &(k, s) in row {
                let src = &rho[k * n..(k + 1) * n];
                for (d, r) in dst.iter_mut().zip(src) {
                    *d += s * r;
                }
            }
        }
    }
}

struct TwoModeSpace {
    levels: usize,
    a: Sparse,
    b: Sparse,
    c: Sparse,
    /// Non-Hermitian generator `H - i sum_k r_k L_k^dag L_k`.
    h_eff: Sparse,
    /// Jump operators with their `2 r_k` weights.
    jumps: Vec<(f64, usize)>,
}

impl TwoModeSpace {
    fn new(p: &FullFrameParams, n_max: usize) -> Self {
        let levels = n_max + 1;
        let dim = levels * levels;
        let idx = |na: usize, nb: usize| na * levels + nb;
        let mut a = vec![Vec::new(); dim];
        let mut b = vec![Vec::new(); dim];
        for na in 0..levels {
            for nb in 0..levels {
                if na + 1 < levels {
                    a[idx(na, nb)]
                        .push((idx(na + 1, nb), Complex64::from(((na + 1) as f64).sqrt())));
                }
                if nb + 1 < levels {
                    b[idx(na, nb)]
                        .push((idx(na, nb + 1), Complex64::from(((nb + 1) as f64).sqrt())));
                }
            }
        }
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let c: Vec<Vec<(usize, Complex64)>> = (0..dim)
            .map(|i| {
                a[i].iter()
                    .chain(&b[i])
                    .map(|&(k, v)| (k, v * inv_sqrt2))
                    .collect()
            })
            .collect();

        let s = &p.system;
        let (ga, gc) = (s.gamma0, 2.0 * s.big_gamma);
        // a^dag a and b^dag b are diagonal; c^dag c adds (a^dag b + b^dag a)/2
        let mut h_eff = vec![Vec::new(); dim];
        for na in 0..levels {
            for nb in 0..levels {
                let i = idx(na, nb);
                let (fa, fb) = (na as f64, nb as f64);
                let diag = Complex64::new(
                    p.omega_a * fa + p.omega_b * fb,
                    -(ga * (fa + fb) + gc * 0.5 * (fa + fb)),
                );
                h_eff[i].push((i, diag));
                // a^dag b |na, nb> = sqrt(na+1) sqrt(nb) |na+1, nb-1>; row index is the target
                if na >= 1 && nb + 1 < levels {
                    let amp = (na as f64).sqrt() * ((nb + 1) as f64).sqrt();
                    h_eff[i].push((idx(na - 1, nb + 1), Complex64::new(0.0, -gc * 0.5 * amp)));
                }
                if nb >= 1 && na + 1 < levels {
                    let amp = (nb as f64).sqrt() * ((na + 1) as f64).sqrt();
                    h_eff[i].push((idx(na + 1, nb - 1), Complex64::new(0.0, -gc * 0.5 * amp)));
                }
            }
        }
        TwoModeSpace {
            levels,
            a: Sparse { rows: a },
            b: Sparse { rows: b },
            c: Sparse { rows: c },
            h_eff: Sparse { rows: h_eff },
            jumps: vec![(2.0 * ga, 0), (2.0 * ga, 1), (2.0 * gc, 2)],
        }
    }

    fn dim(&self) -> usize {
        self.levels * self.levels
    }

    fn jump(&self, k: usize) -> &Sparse {
        match k {
            0 => &self.a,
            1 => &self.b,
            _ => &self.c,
        }
    }

    /// `d rho / dt` for Hermitian `rho`.
    fn rhs(&self, rho: &[Complex64], out: &mut [Complex64], scratch: &mut Scratch) {
        let n = self.dim();
        // X = -i H_eff rho, contribution X + X^dag
        self.h_eff.left(rho, &mut scratch.x);
        for i in 0..n {
            for j in 0..n {
                let xij = -Complex64::I * scratch.x[i * n + j];
                let xji = -Complex64::I * scratch.x[j * n + i];
                out[i * n + j] = xij + xji.conj();
            }
        }
        for &(weight, k) in &self.jumps {
            if weight == 0.0 {
                continue;
            }
            let op = self.jump(k);
            // Y = L rho, then L rho L^dag = (L Y^dag)^dag
            op.left(rho, &mut scratch.x);
            transpose_conj(&scratch.x, &mut scratch.y, n);
            op.left(&scratch.y, &mut scratch.x);
            for i in 0..n {
                for j in 0..n {
                    out[i * n + j] += scratch.x[j * n + i].conj() * weight;
                }
            }
        }
    }

    fn expectation(&self, op: &Sparse, rho: &[Complex64]) -> Complex64 {
        let n = self.dim();
        let mut acc = Complex64::ZERO;
        for (i, row) in op.rows.iter().enumerate() {
            for &(k, v) in row {
                acc += v * rho[k * n + i];
            }
        }
        acc
    }

    /// Largest marginal population of the top Fock level.
    fn cutoff_population(&self, rho: &[Complex64]) -> f64 {
        let n = self.dim();
        let top = self.levels - 1;
        let mut pa = 0.0;
        let mut pb = 0.0;
        for other in 0..self.levels {
            let ia = top * self.levels + other;
            let ib = other * self.levels + top;
            pa += rho[ia * n + ia].re;
            pb += rho[ib * n + ib].re;
        }
        f64::max(pa, pb)
    }
}

struct Scratch {
    x: Vec<Complex64>,
    y: Vec<Complex64>,
}

fn transpose_conj(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in 0..n {
            dst[j * n + i] = src[i * n + j].conj();
        }
    }
}

fn coherent_amplitudes(alpha: Complex64, levels: usize) -> Vec<Complex64> {
    let mut amps = Vec::with_capacity(levels);
    let mut c = Complex64::ONE;
    for n in 0..levels {
        if n > 0 {
            c = c * alpha / (n as f64).sqrt();
        }
        amps.push(c);
    }
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    amps.iter().map(|z| z / norm).collect()
}

/// Master-equation run with its conservation diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladRun {
    pub trajectory: AmplitudeTrajectory,
    pub max_trace_error: f64,
    /// Smallest density-matrix eigenvalue over the spot-checked times.
    pub min_eigenvalue: f64,
}

/// Integrates the two-mode master equation in a truncated Fock basis and
/// returns the mean amplitudes at every step.
pub fn lindblad_evolve(p: &FullFrameParams, cfg: &FockLindbladConfig) -> Result<LindbladRun> {
    p.validate()?;
    if p.system.gamma0 < 0.0 {
        return Err(Error::GainNotLindblad {
            gamma0: p.system.gamma0,
        });
    }
    cfg.validate(p)?;

    let space = TwoModeSpace::new(p, cfg.n_max);
    let levels = space.levels;
    let n = space.dim();

    let ca = coherent_amplitudes(cfg.alpha_a, levels);
    let cb = coherent_amplitudes(cfg.alpha_b, levels);
    let psi: Vec<Complex64> = ca
        .iter()
        .flat_map(|x| cb.iter().map(move |y| x * y))
        .collect();
    let mut rho: Vec<Complex64> = psi
        .iter()
        .flat_map(|x| psi.iter().map(move |y| x * y.conj()))
        .collect();

    let steps = (cfg.t_final / cfg.dt).ceil() as usize;
    let dt = cfg.t_final / steps as f64;
    let spot_every = (steps / 8).max(1);

    let mut scratch = Scratch {
        x: vec![Complex64::ZERO; n * n],
        y: vec![Complex64::ZERO; n * n],
    };
    let mut k = [
        vec![Complex64::ZERO; n * n],
        vec![Complex64::ZERO; n * n],
        vec![Complex64::ZERO; n * n],
        vec![Complex64::ZERO; n * n],
    ];
    let mut stage = vec![Complex64::ZERO; n * n];

    let mut traj = AmplitudeTrajectory {
        times: Vec::with_capacity(steps + 1),
        a_mean: Vec::with_capacity(steps + 1),
        b_mean: Vec::with_capacity(steps + 1),
    };
    let mut max_trace_error: f64 = 0.0;
    let mut min_eigenvalue = f64::INFINITY;

    for step in 0..=steps {
        let t = step as f64 * dt;
        let trace: f64 = (0..n).map(|i| rho[i * n + i].re).sum();
        max_trace_error = max_trace_error.max((trace - 1.0).abs());
        let leak = space.cutoff_population(&rho);
        if leak > CUTOFF_LEAK_TOL {
            return Err(Error::CutoffLeak {
                population: leak,
                time: t,
            });
        }
        if step % spot_every == 0 || step == steps {
            min_eigenvalue = min_eigenvalue.min(smallest_eigenvalue(&rho, n));
        }
        traj.times.push(t);
        traj.a_mean.push(space.expectation(&space.a, &rho));
        traj.b_mean.push(space.expectation(&space.b, &rho));
        if step == steps {
            break;
        }

        space.rhs(&rho, &mut k[0], &mut scratch);
        for (s, (r, k0)) in stage.iter_mut().zip(rho.iter().zip(&k[0])) {
            *s = r + k0 * (0.5 * dt);
        }
        space.rhs(&stage, &mut k[1], &mut scratch);
        for (s, (r, k1)) in stage.iter_mut().zip(rho.iter().zip(&k[1])) {
            *s = r + k1 * (0.5 * dt);
        }
        space.rhs(&stage, &mut k[2], &mut scratch);
        for (s, (r, k2)) in stage.iter_mut().zip(rho.iter().zip(&k[2])) {
            *s = r + k2 * dt;
        }
        space.rhs(&stage, &mut k[3], &mut scratch);
        for (i, r) in rho.iter_mut().enumerate() {
            *r += (k[0][i] + k[1][i] * 2.0 + k[2][i] * 2.0 + k[3][i]) * (dt / 6.0);
        }
    }

    Ok(LindbladRun {
        trajectory: traj,
        max_trace_error,
        min_eigenvalue,
    })
}

fn smallest_eigenvalue(rho: &[Complex64], n: usize) -> f64 {
    let m = DMatrix::from_row_slice(n, n, rho);
    let herm = (&m + m.adjoint()) * Complex64::from(0.5);
    SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum LegOutcome {
    Passed { max_deviation: f64 },
    Failed { max_deviation: f64 },
    Skipped { reason: String },
    Errored { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub name: String,
    pub tolerance: f64,
    pub outcome: LegOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidationReport {
    pub legs: Vec<Leg>,
}

impl CrossValidationReport {
    /// No leg failed or errored; skipped legs do not count against the run.
    pub fn passed(&self) -> bool {
        self.legs.iter().all(|l| {
            matches!(
                l.outcome,
                LegOutcome::Passed { .. } | LegOutcome::Skipped { .. }
            )
        })
    }
}

fn judge(name: &str, tolerance: f64, deviation: f64) -> Leg {
    let outcome = if deviation <= tolerance {
        LegOutcome::Passed {
            max_deviation: deviation,
        }
    } else {
        LegOutcome::Failed {
            max_deviation: deviation,
        }
    };
    Leg {
        name: name.to_string(),
        tolerance,
        outcome,
    }
}

fn errored(name: &str, tolerance: f64, e: &Error) -> Leg {
    Leg {
        name: name.to_string(),
        tolerance,
        outcome: LegOutcome::Errored {
            message: e.to_string(),
        },
    }
}

/// Runs every applicable pair of dynamics routes over `[0, t_final]`.
pub fn cross_validate(p: &FullFrameParams, cfg: &FockLindbladConfig) -> CrossValidationReport {
    let mut legs = Vec::new();
    let (a0, b0) = (cfg.alpha_a, cfg.alpha_b);
    let grid: Vec<f64> = (0..=200).map(|k| cfg.t_final * k as f64 / 200.0).collect();

    let ode = semiclassical_evolve(p, a0, b0, &grid);
    let prop = build_full_hamiltonian(p).and_then(|h| propagator_evolve(&h, a0, b0, &grid));
    match (&ode, &prop) {
        (Ok(o), Ok(q)) => legs.push(judge(
            "ode-vs-propagator",
            ODE_VS_PROPAGATOR_TOL,
            o.max_deviation(q),
        )),
        (Err(e), _) | (_, Err(e)) => {
            legs.push(errored("ode-vs-propagator", ODE_VS_PROPAGATOR_TOL, e))
        }
    }

    if p.system.big_gamma == 0.0 {
        if let Ok(o) = &ode {
            let s = &p.system;
            let reference = AmplitudeTrajectory {
                times: grid.clone(),
                a_mean: grid
                    .iter()
                    .map(|&t| a0 * Complex64::new(-s.gamma0 * t, -p.omega_a * t).exp())
                    .collect(),
                b_mean: grid
                    .iter()
                    .map(|&t| b0 * Complex64::new(-s.gamma0 * t, -p.omega_b * t).exp())
                    .collect(),
            };
            legs.push(judge(
                "ode-vs-analytic-decoupled",
                ODE_VS_PROPAGATOR_TOL,
                o.max_deviation(&reference),
            ));
        }
    }

    const LINDBLAD: &str = "lindblad-vs-ode";
    match lindblad_evolve(p, cfg) {
        Ok(run) => {
            let t = &run.trajectory;
            let ode = semiclassical_evolve(p, t.a_mean[0], t.b_mean[0], &t.times);
            match ode {
                Ok(o) => legs.push(judge(LINDBLAD, LINDBLAD_VS_ODE_TOL, o.max_deviation(t))),
                Err(e) => legs.push(errored(LINDBLAD, LINDBLAD_VS_ODE_TOL, &e)),
            }
            legs.push(judge("lindblad-trace", TRACE_TOL, run.max_trace_error));
            legs.push(judge(
                "lindblad-positivity",
                POSITIVITY_TOL,
                (-run.min_eigenvalue).max(0.0),
            ));
        }
        Err(Error::GainNotLindblad { .. }) => legs.push(Leg {
            name: LINDBLAD.to_string(),
            tolerance: LINDBLAD_VS_ODE_TOL,
            outcome: LegOutcome::Skipped {
                reason: "GainNotLindblad".to_string(),
            },
        }),
        Err(e) => legs.push(errored(LINDBLAD, LINDBLAD_VS_ODE_TOL, &e)),
    }

    CrossValidationReport { legs }
}
