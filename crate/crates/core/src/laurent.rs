//! Laurent expansion of the transfer function at its critical frequency and
//! pole-order estimation from QCRB sweeps.
//!
//! All scalar prefactors are folded into `coefficient`, so in every case
//! `(omega - omega0)^m G(omega) -> coefficient` as `omega -> omega0`.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::metrology::{QcrbSweep, RowStatus, SweepRow};
use crate::params::SystemParams;
use crate::transfer::{transfer_matrix, EP_LOCUS_TOL, LOCUS_TOL};

/// Minimum number of usable rows for a pole-order fit.
pub const MIN_FIT_ROWS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LaurentCase {
    UnbrokenLocus,
    BrokenDetuned,
    ExceptionalPoint,
}

impl std::fmt::Display for LaurentCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LaurentCase::UnbrokenLocus => "unbroken-locus",
            LaurentCase::BrokenDetuned => "broken-detuned",
            LaurentCase::ExceptionalPoint => "exceptional-point",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaurentExpansion {
    /// Expansion point (critical frequency).
    pub omega0: f64,
    pub order_m: u32,
    pub coefficient: Matrix4<f64>,
    pub case_label: LaurentCase,
}

/// Dominant matrix at the exceptional point `delta = 2 Gamma`, before the `Gamma` factor.
#[rustfmt::skip]
pub fn ep_coefficient_matrix() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 1.0, -1.0, 0.0,
        1.0, 0.0, 0.0, 1.0,
        1.0, 0.0, 0.0, 1.0,
        0.0, -1.0, 1.0, 0.0,
    )
}

// Swapping the two cavities maps delta to -delta: G(-delta) = P G(delta) P.
fn swap_modes(m: &Matrix4<f64>) -> Matrix4<f64> {
    let perm = [1, 0, 3, 2];
    Matrix4::from_fn(|i, j| m[(perm[i], perm[j])])
}

/// Analytic dominant Laurent term for the three critical configurations.
pub fn analytic_laurent(p: &SystemParams) -> Result<LaurentExpansion> {
    p.validate()?;
    p.require_coupled()?;
    let c = p.big_gamma;
    let g0 = p.gamma0;
    let d = p.delta.abs();
    let gain_balanced = (g0 + c).abs() <= EP_LOCUS_TOL * c;
    let ep_gap = d - 2.0 * c;

    let (omega0, order_m, coefficient, case_label) =
        if gain_balanced && ep_gap.abs() <= EP_LOCUS_TOL * c {
            (
                0.0,
                2,
                ep_coefficient_matrix() * c,
                LaurentCase::ExceptionalPoint,
            )
        } else if gain_balanced && ep_gap > 0.0 {
            let w0 = (d * d / 4.0 - c * c).sqrt();
            let h = d / 2.0;
            #[rustfmt::skip]
        let c1 = Matrix4::new(
            0.0,    c,      -w0 - h, 0.0,
            c,      0.0,    0.0,     -w0 + h,
            w0 + h, 0.0,    0.0,     c,
            0.0,    w0 - h, c,       0.0,
        );
            (w0, 1, c1 / (2.0 * w0), LaurentCase::BrokenDetuned)
        } else {
            let locus = 4.0 * g0 * g0 + d * d + 8.0 * g0 * c;
            let interior = g0 < 0.0 && g0 > -2.0 * c && !gain_balanced;
            if ep_gap < 0.0 && interior && locus.abs() <= LOCUS_TOL * c * c {
                let g = g0 + c;
                let h = (-g0 * (g0 + 2.0 * c)).sqrt() / g;
                let f = c / g;
                #[rustfmt::skip]
            let m = Matrix4::new(
                h,   0.0, -1.0, f,
                0.0, -h,  f,    -1.0,
                1.0, -f,  h,    0.0,
                -f,  1.0, 0.0,  -h,
            );
                (0.0, 1, m * 0.5, LaurentCase::UnbrokenLocus)
            } else {
                return Err(Error::NotOnCriticalLocus(format!(
                    "delta = {}, Gamma = {c}, gamma0 = {g0}",
                    p.delta
                )));
            }
        };

    let coefficient = if p.delta < 0.0 {
        swap_modes(&coefficient)
    } else {
        coefficient
    };
    Ok(LaurentExpansion {
        omega0,
        order_m,
        coefficient,
        case_label,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidueReport {
    /// Extrapolated `lim (omega - omega0)^m G(omega)`.
    pub limit: Matrix4<f64>,
    /// Radii in the order given (decreasing).
    pub radii: Vec<f64>,
    /// Max-entry distance of each two-sided probe from `limit`.
    pub deviations: Vec<f64>,
    /// Max-entry gap between the limits extrapolated from either side.
    pub two_sided_gap: f64,
}

/// Numerical limit of `(omega - omega0)^m G(omega)` probed at `omega0 +- r`.
///
/// Each side is extrapolated linearly from its two smallest radii and the two
/// side limits are averaged.
pub fn numerical_residue(
    p: &SystemParams,
    omega0: f64,
    m: u32,
    radii: &[f64],
) -> Result<ResidueReport> {
    p.validate()?;
    if radii.len() < 2 {
        return Err(invalid("radii", "need at least two radii"));
    }
    if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(invalid("radii", "must be positive and finite"));
    }
    if radii.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(invalid("radii", "must be strictly decreasing"));
    }
    let floor = 1e-6 * p.big_gamma.max(f64::MIN_POSITIVE);
    if radii[radii.len() - 1] < floor {
        return Err(invalid(
            "radii",
            format!("smallest radius must be at least {floor:e}"),
        ));
    }

    let scaled = |offset: f64| -> Result<Matrix4<f64>> {
        let g = transfer_matrix(p, omega0 + offset)?.matrix;
        Ok(g * offset.powi(m as i32))
    };
    let mut upper = Vec::with_capacity(radii.len());
    let mut lower = Vec::with_capacity(radii.len());
    for &r in radii {
        upper.push(scaled(r)?);
        lower.push(scaled(-r)?);
    }

    let n = radii.len();
    let (r1, r2) = (radii[n - 2], radii[n - 1]);
    let extrapolate = |s: &[Matrix4<f64>]| (s[n - 1] * r1 - s[n - 2] * r2) / (r1 - r2);
    let limit_up = extrapolate(&upper);
    let limit_down = extrapolate(&lower);
    let limit = (limit_up + limit_down) * 0.5;
    let two_sided_gap = (limit_up - limit_down).amax();

    let deviations: Vec<f64> = upper
        .iter()
        .zip(&lower)
        .map(|(u, l)| (u - limit).amax().max((l - limit).amax()))
        .collect();

    let slack = 1e-9 * (1.0 + limit.amax());
    let shrinking = deviations.windows(2).all(|w| w[1] <= w[0] + slack);
    if !shrinking {
        return Err(Error::WrongPoleOrder {
            order: m,
            deviations,
        });
    }

    Ok(ResidueReport {
        limit,
        radii: radii.to_vec(),
        deviations,
        two_sided_gap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleFit {
    pub m_estimate: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Range of `|omega - omega0|` used in the fit.
    pub window: (f64, f64),
    pub rows_used: usize,
}

/// Slope of `log10 qcrb` against `log10 |omega - omega0|` over a sweep.
pub fn pole_order_fit(sweep: &QcrbSweep, omega0: f64, window: (f64, f64)) -> Result<PoleFit> {
    fit_rows(&sweep.rows, omega0, window, sweep.probe.derivative_step)
}

/// Pole-order fit on bare sweep rows.
///
/// `window` bounds `|omega - omega0|`; its lower edge must stay at least ten
/// derivative steps away from the pole.
pub fn fit_rows(
    rows: &[SweepRow],
    omega0: f64,
    window: (f64, f64),
    derivative_step: f64,
) -> Result<PoleFit> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(invalid("window", format!("need lo < hi, got ({lo}, {hi})")));
    }
    if lo < 10.0 * derivative_step {
        return Err(invalid(
            "window",
            format!("lower edge {lo:e} is within 10 derivative steps of the pole"),
        ));
    }
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.status == RowStatus::Ok && r.qcrb.is_finite() && r.qcrb > 0.0)
        .filter_map(|r| {
            let dist = (r.omega - omega0).abs();
            (dist >= lo && dist <= hi).then(|| (dist.log10(), r.qcrb.log10()))
        })
        .collect();
    if points.len() < MIN_FIT_ROWS {
        return Err(Error::InsufficientData {
            usable: points.len(),
            needed: MIN_FIT_ROWS,
        });
    }
    let (slope, intercept, r_squared) = least_squares(&points);
    Ok(PoleFit {
        m_estimate: slope,
        intercept,
        r_squared,
        window,
        rows_used: points.len(),
    })
}

/// Ordinary least squares `y = slope x + intercept`; returns `(slope, intercept, r^2)`.
pub fn least_squares(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (dx, dy) = (x - mean_x, y - mean_y);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = points
        .iter()
        .map(|&(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    (slope, intercept, r_squared)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrology::ProbeConfig;

    fn params(delta: f64, gamma0: f64) -> SystemParams {
        SystemParams::new(delta, 1.0, gamma0, 0.5).unwrap()
    }

    const RADII: [f64; 3] = [1e-2, 1e-3, 1e-4];

    #[test]
    fn ep_expansion() {
        let l = analytic_laurent(&params(2.0, -1.0)).unwrap();
        assert_eq!(l.case_label, LaurentCase::ExceptionalPoint);
        assert_eq!((l.omega0, l.order_m), (0.0, 2));
        assert_eq!(l.coefficient, ep_coefficient_matrix());
    }

    #[test]
    fn broken_expansion() {
        let l = analytic_laurent(&params(4.0, -1.0)).unwrap();
        let s3 = 3f64.sqrt();
        assert_eq!(l.order_m, 1);
        assert!((l.omega0 - s3).abs() < 1e-15);
        #[rustfmt::skip]
        let c1 = Matrix4::new(
            0.0, 1.0, -s3 - 2.0, 0.0,
            1.0, 0.0, 0.0, -s3 + 2.0,
            s3 + 2.0, 0.0, 0.0, 1.0,
            0.0, s3 - 2.0, 1.0, 0.0,
        );
        assert!((l.coefficient - c1 / (2.0 * s3)).amax() < 1e-15);
    }

    #[test]
    fn unbroken_expansion() {
        let l = analytic_laurent(&params(3f64.sqrt(), -0.5)).unwrap();
        assert_eq!(l.case_label, LaurentCase::UnbrokenLocus);
        assert_eq!((l.omega0, l.order_m), (0.0, 1));
        // h = sqrt(3), f = 2, halved
        assert!((l.coefficient[(0, 0)] - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((l.coefficient[(0, 3)] - 1.0).abs() < 1e-15);
        assert_eq!(l.coefficient[(0, 2)], -0.5);
    }

    #[test]
    fn off_locus_is_rejected() {
        assert!(matches!(
            analytic_laurent(&params(1.0, 0.5)),
            Err(Error::NotOnCriticalLocus(_))
        ));
    }

    #[test]
    fn residues_match_analytic_terms() {
        for p in [
            params(2.0, -1.0),
            params(4.0, -1.0),
            params(3f64.sqrt(), -0.5),
        ] {
            let l = analytic_laurent(&p).unwrap();
            let rep = numerical_residue(&p, l.omega0, l.order_m, &RADII).unwrap();
            assert!((rep.limit - l.coefficient).amax() < 1e-3, "{p:?}");
            assert!(rep.two_sided_gap < 1e-3);
        }
    }

    #[test]
    fn negative_detuning_uses_mode_swap() {
        for p in [
            params(-2.0, -1.0),
            params(-4.0, -1.0),
            params(-(3f64.sqrt()), -0.5),
        ] {
            let l = analytic_laurent(&p).unwrap();
            let rep = numerical_residue(&p, l.omega0, l.order_m, &RADII).unwrap();
            assert!((rep.limit - l.coefficient).amax() < 1e-3, "{p:?}");
        }
    }

    #[test]
    fn underestimated_order_is_detected() {
        let err = numerical_residue(&params(2.0, -1.0), 0.0, 1, &RADII).unwrap_err();
        assert!(matches!(err, Error::WrongPoleOrder { order: 1, .. }));
    }

    #[test]
    fn residue_radius_validation() {
        let p = params(2.0, -1.0);
        assert!(numerical_residue(&p, 0.0, 2, &[1e-3]).is_err());
        assert!(numerical_residue(&p, 0.0, 2, &[1e-4, 1e-3]).is_err());
        assert!(numerical_residue(&p, 0.0, 2, &[1e-3, 1e-7]).is_err());
    }

    #[test]
    fn exact_power_law_fit() {
        let rows: Vec<SweepRow> = (0..20)
            .map(|k| {
                let omega = 0.5 + 1e-3 * 10f64.powf(k as f64 / 19.0);
                SweepRow {
                    omega,
                    qfi: 0.0,
                    qcrb: (omega - 0.5).abs().powi(3),
                    status: RowStatus::Ok,
                }
            })
            .collect();
        let fit = fit_rows(&rows, 0.5, (0.999e-3, 1.001e-2), 1e-6).unwrap();
        assert!((fit.m_estimate - 3.0).abs() < 1e-6);
        assert!(fit.r_squared > 0.999_999);
    }

    #[test]
    fn fit_needs_enough_rows() {
        let rows = vec![
            SweepRow {
                omega: 1e-3,
                qfi: 1.0,
                qcrb: 1.0,
                status: RowStatus::Ok
            };
            3
        ];
        assert!(matches!(
            fit_rows(&rows, 0.0, (1e-4, 1e-2), 1e-6),
            Err(Error::InsufficientData { usable: 3, .. })
        ));
        assert!(fit_rows(&rows, 0.0, (1e-6, 1e-2), 1e-6).is_err());
    }

    #[test]
    fn sweep_fit_at_ep() {
        let p = params(2.0, -1.0);
        let grid = crate::grid::GridSpec::log(1e-4, 1e-2, 40).points().unwrap();
        let sweep = crate::metrology::qcrb_sweep(&p, &grid, &ProbeConfig::default()).unwrap();
        let fit = pole_order_fit(&sweep, 0.0, (1e-4, 1e-2)).unwrap();
        assert!((fit.m_estimate - 2.0).abs() < 0.05, "{fit:?}");
    }
}
