//! Browser bindings: spectrum curves, single-point summaries and QCRB sweeps.

use antipt_core::metrology::RowStatus;
use antipt_core::model::DEFAULT_EP_TOL;
use antipt_core::*;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Flat `[delta, re+, re-, im+, im-]` records over a linear detuning grid.
pub fn spectrum_rows(
    gamma0: f64,
    big_gamma: f64,
    delta_min: f64,
    delta_max: f64,
    count: usize,
) -> Result<Vec<f64>, String> {
    let grid = GridSpec::linear(delta_min, delta_max, count)
        .points()
        .map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(5 * grid.len());
    for delta in grid {
        let p = SystemParams::new(delta, big_gamma, gamma0, 0.0).map_err(|e| e.to_string())?;
        let h = build_effective_hamiltonian(&p).map_err(|e| e.to_string())?;
        let s = eigensystem(&h, DEFAULT_EP_TOL).map_err(|e| e.to_string())?;
        out.extend([
            delta,
            s.lambda_plus.re,
            s.lambda_minus.re,
            s.lambda_plus.im,
            s.lambda_minus.im,
        ]);
    }
    Ok(out)
}

/// Phase, eigenvalues and critical frequencies of one parameter point, as JSON.
pub fn point_json(delta: f64, big_gamma: f64, gamma0: f64) -> Result<String, String> {
    let p = SystemParams::new(delta, big_gamma, gamma0, 0.0).map_err(|e| e.to_string())?;
    let h = build_effective_hamiltonian(&p).map_err(|e| e.to_string())?;
    let s = eigensystem(&h, DEFAULT_EP_TOL).map_err(|e| e.to_string())?;
    let c = critical_frequencies(&p).map_err(|e| e.to_string())?;
    let laurent = analytic_laurent(&p)
        .ok()
        .map(|e| json!({ "omega0": e.omega0, "order": e.order_m }));
    Ok(json!({
        "phase": s.phase.to_string(),
        "lambda_plus": [s.lambda_plus.re, s.lambda_plus.im],
        "lambda_minus": [s.lambda_minus.re, s.lambda_minus.im],
        "alignment": s.eigenvector_alignment(),
        "case": c.case_label.to_string(),
        "omega_sq_plus": [c.omega_sq_plus.re, c.omega_sq_plus.im],
        "omega_sq_minus": [c.omega_sq_minus.re, c.omega_sq_minus.im],
        "real_roots": c.real_roots,
        "laurent": laurent,
    })
    .to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Flat `[omega, qcrb]` pairs; flagged rows carry NaN.
    pub pairs: Vec<f64>,
    pub omega0: f64,
    /// Slope over `[1e-4, 1e-2] Gamma` from the pole, when the grid covers it.
    pub slope: Option<f64>,
}

/// QCRB against `|omega - omega0|` on a log grid for `delta = (2 + eps) Gamma`.
pub fn sweep(
    epsilon: f64,
    big_gamma: f64,
    gamma_c: f64,
    count: usize,
) -> Result<SweepResult, String> {
    let p = SystemParams::perturbed_ep(epsilon, big_gamma, gamma_c).map_err(|e| e.to_string())?;
    let omega0 = if epsilon > 0.0 {
        p.discriminant().sqrt()
    } else {
        0.0
    };
    let offsets = GridSpec::log(1e-5 * big_gamma, big_gamma, count)
        .points()
        .map_err(|e| e.to_string())?;
    let grid: Vec<f64> = offsets.iter().map(|d| omega0 + d).collect();
    let probe = ProbeConfig::scaled(big_gamma);
    let s = qcrb_sweep(&p, &grid, &probe).map_err(|e| e.to_string())?;
    let slope = pole_order_fit(&s, omega0, (1e-4 * big_gamma, 1e-2 * big_gamma))
        .ok()
        .map(|f| f.m_estimate);
    let pairs = s
        .rows
        .iter()
        .zip(&offsets)
        .flat_map(|(r, d)| {
            [
                *d,
                if r.status == RowStatus::Ok {
                    r.qcrb
                } else {
                    f64::NAN
                },
            ]
        })
        .collect();
    Ok(SweepResult {
        pairs,
        omega0,
        slope,
    })
}

#[wasm_bindgen]
pub fn spectrum(
    gamma0: f64,
    big_gamma: f64,
    delta_min: f64,
    delta_max: f64,
    count: usize,
) -> Result<Vec<f64>, JsError> {
    spectrum_rows(gamma0, big_gamma, delta_min, delta_max, count).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn point(delta: f64, big_gamma: f64, gamma0: f64) -> Result<String, JsError> {
    point_json(delta, big_gamma, gamma0).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub struct QcrbCurve {
    inner: SweepResult,
}

#[wasm_bindgen]
impl QcrbCurve {
    /// Flat `[offset, qcrb]` pairs.
    pub fn pairs(&self) -> Vec<f64> {
        self.inner.pairs.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn omega0(&self) -> f64 {
        self.inner.omega0
    }

    /// NaN when the fit window is not covered.
    #[wasm_bindgen(getter)]
    pub fn slope(&self) -> f64 {
        self.inner.slope.unwrap_or(f64::NAN)
    }
}

#[wasm_bindgen]
pub fn qcrb_curve(
    epsilon: f64,
    big_gamma: f64,
    gamma_c: f64,
    count: usize,
) -> Result<QcrbCurve, JsError> {
    sweep(epsilon, big_gamma, gamma_c, count)
        .map(|inner| QcrbCurve { inner })
        .map_err(|e| JsError::new(&e))
}
