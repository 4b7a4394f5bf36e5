//! Effective non-Hermitian Hamiltonian, its eigensystem and anti-PT phase.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{FullFrameParams, SystemParams};

pub type ComplexMat2 = Matrix2<Complex64>;
pub type ComplexVec2 = Vector2<Complex64>;

/// Default half-width of the exceptional-point band, relative to `big_gamma^2`.
pub const DEFAULT_EP_TOL: f64 = 1e-9;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    Unbroken,
    Broken,
    ExceptionalPoint,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Phase::Unbroken => "unbroken",
            Phase::Broken => "broken",
            Phase::ExceptionalPoint => "exceptional-point",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum {
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    /// Eigenvectors, scaled so the second entry is 1 (unit norm when that entry vanishes).
    pub psi_plus: ComplexVec2,
    pub psi_minus: ComplexVec2,
    pub phase: Phase,
}

impl Spectrum {
    /// `|<psi+, psi->| / (|psi+| |psi->|)`; equals 1 when the eigenvectors coalesce.
    pub fn eigenvector_alignment(&self) -> f64 {
        let overlap = self.psi_plus.dotc(&self.psi_minus).norm();
        overlap / (self.psi_plus.norm() * self.psi_minus.norm())
    }
}

/// Rotating-frame Hamiltonian with balanced losses.
pub fn build_effective_hamiltonian(p: &SystemParams) -> Result<ComplexMat2> {
    p.validate()?;
    let damping = Complex64::new(0.0, -p.total_damping());
    let coupling = Complex64::new(0.0, -p.big_gamma);
    Ok(Matrix2::new(
        damping + p.delta / 2.0,
        coupling,
        coupling,
        damping - p.delta / 2.0,
    ))
}

/// Lab-frame Hamiltonian with bare cavity frequencies on the diagonal.
pub fn build_full_hamiltonian(p: &FullFrameParams) -> Result<ComplexMat2> {
    p.validate()?;
    let s = &p.system;
    let damping = Complex64::new(0.0, -s.total_damping());
    let coupling = Complex64::new(0.0, -s.big_gamma);
    Ok(Matrix2::new(
        damping + p.omega_a,
        coupling,
        coupling,
        damping + p.omega_b,
    ))
}

/// Closed-form eigensystem of a 2x2 complex matrix.
///
/// `lambda_plus = tr/2 + sqrt(disc)` with the principal square root, where
/// `disc = ((h00 - h11)/2)^2 + h01 h10`. The phase is read off the real part
/// of `disc` relative to `|h01 h10|` (which is `big_gamma^2` for the model).
pub fn eigensystem(h: &ComplexMat2, ep_tol: f64) -> Result<Spectrum> {
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFiniteMatrix);
    }
    if !(ep_tol > 0.0) {
        return Err(crate::error::invalid("ep_tol", "must be positive"));
    }
    let (a, b, c, d) = (h[(0, 0)], h[(0, 1)], h[(1, 0)], h[(1, 1)]);
    let half_trace = (a + d) * 0.5;
    let half_split = (a - d) * 0.5;
    let disc = half_split * half_split + b * c;
    let root = disc.sqrt();
    let lambda_plus = half_trace + root;
    let lambda_minus = half_trace - root;

    let scale = {
        let bc = (b * c).norm();
        if bc > 0.0 {
            bc
        } else {
            h.norm_squared().max(f64::MIN_POSITIVE)
        }
    };
    let phase = if disc.norm() <= ep_tol * scale {
        Phase::ExceptionalPoint
    } else if disc.re < 0.0 {
        Phase::Unbroken
    } else {
        Phase::Broken
    };

    let (psi_plus, psi_minus) = if phase == Phase::ExceptionalPoint {
        let v = null_vector(
            h,
            half_trace,
            ComplexVec2::new(Complex64::ONE, Complex64::ZERO),
        );
        (v, v)
    } else {
        (
            null_vector(
                h,
                lambda_plus,
                ComplexVec2::new(Complex64::ONE, Complex64::ZERO),
            ),
            null_vector(
                h,
                lambda_minus,
                ComplexVec2::new(Complex64::ZERO, Complex64::ONE),
            ),
        )
    };

    Ok(Spectrum {
        lambda_plus,
        lambda_minus,
        psi_plus,
        psi_minus,
        phase,
    })
}

// Kernel of (h - lambda I), taken from whichever row gives the larger candidate.
fn null_vector(h: &ComplexMat2, lambda: Complex64, fallback: ComplexVec2) -> ComplexVec2 {
    let (a, b, c, d) = (h[(0, 0)], h[(0, 1)], h[(1, 0)], h[(1, 1)]);
    let from_row0 = ComplexVec2::new(-b, a - lambda);
    let from_row1 = ComplexVec2::new(d - lambda, -c);
    let v = if from_row0.norm() >= from_row1.norm() {
        from_row0
    } else {
        from_row1
    };
    let norm = v.norm();
    if norm <= f64::EPSILON * h.norm().max(f64::MIN_POSITIVE) {
        return fallback;
    }
    if v[1].norm() > 1e-12 * norm {
        v / v[1]
    } else {
        // unit norm, first entry real positive
        let phase = v[0] / v[0].norm();
        v / (phase * norm)
    }
}

/// Phase of the parameter point: unbroken for `|delta| < 2 Gamma`, broken above.
pub fn classify_phase(p: &SystemParams, ep_tol: f64) -> Result<Phase> {
    p.validate()?;
    p.require_coupled()?;
    let gap = p.delta.abs() - 2.0 * p.big_gamma;
    Ok(if gap.abs() <= ep_tol * p.big_gamma {
        Phase::ExceptionalPoint
    } else if gap < 0.0 {
        Phase::Unbroken
    } else {
        Phase::Broken
    })
}

/// Max-entry residual of `sigma_x conj(h) sigma_x + h`; zero for an anti-PT symmetric `h`.
pub fn check_anti_pt(h: &ComplexMat2) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let mirrored = h[(1 - i, 1 - j)].conj();
            worst = worst.max((mirrored + h[(i, j)]).norm());
        }
    }
    worst
}

/// Largest entry modulus.
pub fn max_abs(h: &ComplexMat2) -> f64 {
    h.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// `-i * h`, the drift matrix of the amplitude equations.
pub(crate) fn drift(h: &ComplexMat2) -> ComplexMat2 {
    h.map(|z| -I * z)
}
