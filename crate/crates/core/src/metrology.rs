//! Gaussian metrology of the probe output: mean, covariance, QFI and QCRB.
//!
//! The quantum Fisher information uses the identity
//! `V_out = G W G^T` with
//! `W = (G^{-1} - gc I) V_in (G^{-1} - gc I)^T + gc gi V_i + gc gG V_G`,
//! so that `I = (G^{-1} dmu)^T W^{-1} (G^{-1} dmu)`. Near a pole `V_out` is
//! dominated by `G G^T` and is numerically rank deficient, while `W` stays
//! well conditioned.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::params::SystemParams;
use crate::transfer::{critical_frequencies, inverse_transfer_matrix, transfer_matrix};

pub const DEFAULT_DERIVATIVE_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CovarianceMode {
    /// Identity vacuum covariances; real symmetric output.
    SymmetricVacuum,
    /// Unsymmetrized vacuum correlators with imaginary off-diagonals.
    AsWritten,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// Mean input quadratures `(x_a, x_b, y_a, y_b)`.
    pub mu_in: [f64; 4],
    pub covariance_mode: CovarianceMode,
    /// Central-difference step for `d mu_out / d omega`.
    pub derivative_step: f64,
}

impl Default for ProbeConfig {
    /// Unit coherent amplitude in both cavities, symmetric vacuum noise.
    fn default() -> Self {
        ProbeConfig {
            mu_in: [2.0, 2.0, 0.0, 0.0],
            covariance_mode: CovarianceMode::SymmetricVacuum,
            derivative_step: DEFAULT_DERIVATIVE_STEP,
        }
    }
}

impl ProbeConfig {
    /// Default probe with the derivative step scaled to `big_gamma`.
    pub fn scaled(big_gamma: f64) -> Self {
        ProbeConfig {
            derivative_step: DEFAULT_DERIVATIVE_STEP * big_gamma,
            ..Default::default()
        }
    }

    pub fn validate(&self, big_gamma: f64) -> Result<()> {
        if self.mu_in.iter().any(|v| !v.is_finite()) {
            return Err(invalid("mu_in", "entries must be finite"));
        }
        let h = self.derivative_step;
        let cap = if big_gamma > 0.0 {
            1e-2 * big_gamma
        } else {
            1e-2
        };
        if !(h > 0.0 && h <= cap) {
            return Err(invalid(
                "derivative_step",
                format!("must lie in (0, {cap:e}], got {h:e}"),
            ));
        }
        Ok(())
    }

    fn mean(&self) -> Vector4<f64> {
        Vector4::from(self.mu_in)
    }
}

/// Output covariance; real under symmetric vacuum, complex for the as-written correlators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Covariance {
    Real(Matrix4<f64>),
    Complex(Matrix4<Complex64>),
}

impl Covariance {
    pub fn to_complex(&self) -> Matrix4<Complex64> {
        match self {
            Covariance::Real(m) => m.map(Complex64::from),
            Covariance::Complex(m) => *m,
        }
    }
}

/// The vacuum correlator matrix `[[I, iI], [-iI, I]]`.
pub fn as_written_vacuum() -> Matrix4<Complex64> {
    let one = Complex64::ONE;
    let i = Complex64::I;
    let z = Complex64::ZERO;
    #[rustfmt::skip]
    let m = Matrix4::new(
        one, z,   i,   z,
        z,   one, z,   i,
        -i,  z,   one, z,
        z,   -i,  z,   one,
    );
    m
}

fn noise_rates(p: &SystemParams) -> (f64, f64) {
    (
        p.gamma_c * p.gamma_intrinsic().abs(),
        p.gamma_c * p.gamma_bath,
    )
}

/// `(I - gc G(omega)) mu_in`.
pub fn output_mean(p: &SystemParams, omega: f64, probe: &ProbeConfig) -> Result<Vector4<f64>> {
    let g = transfer_matrix(p, omega)?.matrix;
    Ok((Matrix4::identity() - g * p.gamma_c) * probe.mean())
}

pub fn output_covariance(p: &SystemParams, omega: f64, probe: &ProbeConfig) -> Result<Covariance> {
    let g = transfer_matrix(p, omega)?.matrix;
    let m = Matrix4::identity() - g * p.gamma_c;
    let (ri, rb) = noise_rates(p);
    Ok(match probe.covariance_mode {
        CovarianceMode::SymmetricVacuum => {
            let ggt = g * g.transpose();
            let v = m * m.transpose() + ggt * (ri + rb);
            // exact symmetry
            Covariance::Real((v + v.transpose()) * 0.5)
        }
        CovarianceMode::AsWritten => {
            let vac = as_written_vacuum();
            let gc = g.map(Complex64::from);
            let mc = m.map(Complex64::from);
            let v =
                mc * vac * mc.transpose() + gc * vac * gc.transpose() * Complex64::from(ri + rb);
            Covariance::Complex(v)
        }
    })
}

// Central difference step that never straddles or touches a critical frequency.
fn safe_step(p: &SystemParams, omega: f64, step: f64) -> Result<f64> {
    if !(p.big_gamma > 0.0) {
        return Ok(step);
    }
    let roots = critical_frequencies(p)?.real_roots;
    let dist = roots
        .iter()
        .map(|r| (omega - r).abs())
        .fold(f64::INFINITY, f64::min);
    if dist == 0.0 {
        let det = crate::transfer::transfer_determinant(p, omega)?;
        return Err(Error::SingularAtFrequency { omega, det });
    }
    Ok(step.min(dist / 4.0))
}

/// `d mu_out / d omega` by central differences.
pub fn output_mean_derivative(
    p: &SystemParams,
    omega: f64,
    probe: &ProbeConfig,
) -> Result<Vector4<f64>> {
    let h = safe_step(p, omega, probe.derivative_step)?;
    let up = output_mean(p, omega + h, probe)?;
    let down = output_mean(p, omega - h, probe)?;
    Ok((up - down) / (2.0 * h))
}

/// Quantum Fisher information about `omega` carried by the output field.
pub fn qfi(p: &SystemParams, omega: f64, probe: &ProbeConfig) -> Result<f64> {
    p.validate()?;
    probe.validate(p.big_gamma)?;
    // surfaces SingularAtFrequency at the evaluation point itself
    transfer_matrix(p, omega)?;
    let dmu = output_mean_derivative(p, omega, probe)?;
    let a = inverse_transfer_matrix(p, omega)?.matrix;
    let u = a * dmu;
    let shifted = a - Matrix4::identity() * p.gamma_c;
    let (ri, rb) = noise_rates(p);

    match probe.covariance_mode {
        CovarianceMode::SymmetricVacuum => {
            let w = shifted * shifted.transpose() + Matrix4::identity() * (ri + rb);
            quadratic_form(&w.map(Complex64::from), &u.map(Complex64::from), omega)
        }
        CovarianceMode::AsWritten => {
            let vac = as_written_vacuum();
            let s = shifted.map(Complex64::from);
            let w = s * vac * s.transpose() + vac * Complex64::from(ri + rb);
            quadratic_form(&w, &u.map(Complex64::from), omega)
        }
    }
}

// Real part of `u^T W^{-1} u` (plain transpose, no conjugation).
fn quadratic_form(w: &Matrix4<Complex64>, u: &Vector4<Complex64>, omega: f64) -> Result<f64> {
    let scale = w.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let lu = w.lu();
    let det = lu.determinant().norm();
    if !(scale > 0.0) || det <= 1e-13 * scale.powi(4) {
        return Err(Error::SingularCovariance { omega });
    }
    let x = lu.solve(u).ok_or(Error::SingularCovariance { omega })?;
    Ok((u.transpose() * x)[(0, 0)].re)
}

/// `1 / sqrt(qfi)`, infinite when the output carries no information.
pub fn qcrb_from_qfi(qfi: f64) -> f64 {
    if qfi > 0.0 {
        1.0 / qfi.sqrt()
    } else {
        f64::INFINITY
    }
}

pub fn qcrb(p: &SystemParams, omega: f64, probe: &ProbeConfig) -> Result<f64> {
    qfi(p, omega, probe).map(qcrb_from_qfi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowStatus {
    Ok,
    SingularFrequency,
    SingularCovariance,
}

impl RowStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::SingularFrequency => "singular-frequency",
            RowStatus::SingularCovariance => "singular-covariance",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ok" => Some(RowStatus::Ok),
            "singular-frequency" => Some(RowStatus::SingularFrequency),
            "singular-covariance" => Some(RowStatus::SingularCovariance),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub omega: f64,
    pub qfi: f64,
    pub qcrb: f64,
    pub status: RowStatus,
}

/// QFI and QCRB over a strictly increasing frequency grid.
///
/// Points where the transfer function or the covariance cannot be inverted
/// are kept as flagged rows with `qfi = +inf` and `qcrb = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QcrbSweep {
    pub params: SystemParams,
    pub probe: ProbeConfig,
    pub rows: Vec<SweepRow>,
}

pub fn qcrb_sweep(p: &SystemParams, omega_grid: &[f64], probe: &ProbeConfig) -> Result<QcrbSweep> {
    p.validate()?;
    probe.validate(p.big_gamma)?;
    if omega_grid.iter().any(|w| !w.is_finite()) {
        return Err(invalid("omega_grid", "entries must be finite"));
    }
    if omega_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid("omega_grid", "must be strictly increasing"));
    }
    let rows = omega_grid
        .iter()
        .map(|&omega| match qfi(p, omega, probe) {
            Ok(q) => SweepRow {
                omega,
                qfi: q,
                qcrb: qcrb_from_qfi(q),
                status: RowStatus::Ok,
            },
            Err(e) => {
                let status = match e {
                    Error::SingularCovariance { .. } => RowStatus::SingularCovariance,
                    _ => RowStatus::SingularFrequency,
                };
                SweepRow {
                    omega,
                    qfi: f64::INFINITY,
                    qcrb: 0.0,
                    status,
                }
            }
        })
        .collect();
    Ok(QcrbSweep {
        params: *p,
        probe: *probe,
        rows,
    })
}
