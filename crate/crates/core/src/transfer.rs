//! Quadrature transfer function and its singularities.
//!
//! Quadrature basis order is `(x_a, x_b, y_a, y_b)`. The inverse transfer
//! matrix has the block form `[[A, B], [-B, A]]` with
//! `A = (gamma0 + Gamma) I + Gamma sigma_x` and `B = diag(w - delta/2, w + delta/2)`.

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SystemParams;

/// `transfer_matrix` refuses to invert below this absolute determinant.
pub const SINGULARITY_FLOOR: f64 = 1e-250;
/// `omega^2 >= -ROOT_TOL * Gamma^2` counts as a real critical frequency.
pub const ROOT_TOL: f64 = 1e-10;
/// Band on `4 gamma0^2 + delta^2 + 8 gamma0 Gamma = 0`, relative to `Gamma^2`.
pub const LOCUS_TOL: f64 = 1e-8;
/// Band on `|delta| = 2 Gamma` and `gamma0 = -Gamma`, relative to `Gamma`.
pub const EP_LOCUS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix4 {
    pub omega: f64,
    pub matrix: Matrix4<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CriticalCase {
    BrokenDetuned,
    UnbrokenLocus,
    ExceptionalPoint,
    NoRealRoot,
}

impl std::fmt::Display for CriticalCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CriticalCase::BrokenDetuned => "broken-detuned",
            CriticalCase::UnbrokenLocus => "unbroken-locus",
            CriticalCase::ExceptionalPoint => "exceptional-point",
            CriticalCase::NoRealRoot => "no-real-root",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalFrequencies {
    pub omega_sq_plus: Complex64,
    pub omega_sq_minus: Complex64,
    /// Admissible real frequencies, ascending, without duplicates.
    pub real_roots: Vec<f64>,
    pub case_label: CriticalCase,
}

/// Inverse transfer matrix `G^{-1}(omega)` as printed, before inversion.
pub fn inverse_transfer_matrix(p: &SystemParams, omega: f64) -> Result<TransferMatrix4> {
    p.validate()?;
    if !omega.is_finite() {
        return Err(crate::error::invalid("omega", "must be finite"));
    }
    let g = p.total_damping();
    let c = p.big_gamma;
    let lo = omega - p.delta / 2.0;
    let hi = omega + p.delta / 2.0;
    #[rustfmt::skip]
    let matrix = Matrix4::new(
        g,   c,   lo,  0.0,
        c,   g,   0.0, hi,
        -lo, 0.0, g,   c,
        0.0, -hi, c,   g,
    );
    Ok(TransferMatrix4 { omega, matrix })
}

/// `G(omega)`, by pivoted LU inversion of the inverse transfer matrix.
pub fn transfer_matrix(p: &SystemParams, omega: f64) -> Result<TransferMatrix4> {
    let inv = inverse_transfer_matrix(p, omega)?;
    let lu = inv.matrix.lu();
    let det = lu.determinant();
    if !(det.abs() >= SINGULARITY_FLOOR) {
        return Err(Error::SingularAtFrequency { omega, det });
    }
    let matrix = lu
        .try_inverse()
        .ok_or(Error::SingularAtFrequency { omega, det })?;
    Ok(TransferMatrix4 { omega, matrix })
}

/// `det G^{-1}(omega)` by pivoted elimination.
pub fn transfer_determinant(p: &SystemParams, omega: f64) -> Result<f64> {
    Ok(inverse_transfer_matrix(p, omega)?.matrix.determinant())
}

/// The two branches `omega_{+-}^2` of the critical-frequency condition.
pub fn critical_omega_squared(p: &SystemParams) -> (Complex64, Complex64) {
    let (g0, c, d) = (p.gamma0, p.big_gamma, p.delta);
    let base = -(g0 * g0 + 2.0 * g0 * c + 2.0 * c * c) + d * d / 4.0;
    let g = g0 + c;
    let radicand = Complex64::new(g * g * (4.0 * c * c - d * d), 0.0);
    let root = radicand.sqrt();
    (Complex64::from(base) + root, Complex64::from(base) - root)
}

/// Critical (lasing) frequencies where `det G^{-1}` vanishes.
pub fn critical_frequencies(p: &SystemParams) -> Result<CriticalFrequencies> {
    p.validate()?;
    p.require_coupled()?;
    let c = p.big_gamma;
    let (omega_sq_plus, omega_sq_minus) = critical_omega_squared(p);

    let tol = ROOT_TOL * c * c;
    let mut roots: Vec<f64> = Vec::new();
    for w2 in [omega_sq_plus, omega_sq_minus] {
        if w2.im.abs() <= tol && w2.re >= -tol {
            let w = w2.re.max(0.0).sqrt();
            roots.push(w);
            if w > 0.0 {
                roots.push(-w);
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * c.max(b.abs()));

    let gain_balanced = (p.gamma0 + c).abs() <= EP_LOCUS_TOL * c;
    let ep_gap = p.delta.abs() - 2.0 * c;
    let locus = 4.0 * p.gamma0 * p.gamma0 + p.delta * p.delta + 8.0 * p.gamma0 * c;
    let case_label = if gain_balanced && ep_gap.abs() <= EP_LOCUS_TOL * c {
        CriticalCase::ExceptionalPoint
    } else if gain_balanced && ep_gap > 0.0 {
        CriticalCase::BrokenDetuned
    } else if ep_gap < 0.0 && locus.abs() <= LOCUS_TOL * c * c {
        CriticalCase::UnbrokenLocus
    } else {
        CriticalCase::NoRealRoot
    };

    Ok(CriticalFrequencies {
        omega_sq_plus,
        omega_sq_minus,
        real_roots: roots,
        case_label,
    })
}

/// Detuning on the undetuned-lasing locus for a given gain, when it exists.
///
/// Returns `sqrt(-4 gamma0 (gamma0 + 2 Gamma))` for `-2 Gamma < gamma0 < 0`.
pub fn unbroken_lasing_locus(gamma0: f64, big_gamma: f64) -> Option<f64> {
    if !(big_gamma > 0.0) || !gamma0.is_finite() {
        return None;
    }
    let radicand = -4.0 * gamma0 * (gamma0 + 2.0 * big_gamma);
    (gamma0 < 0.0 && gamma0 > -2.0 * big_gamma && radicand >= 0.0).then(|| radicand.sqrt())
}
