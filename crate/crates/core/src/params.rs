//! Model parameters.
//!
//! Every rate and frequency is a dimensionless multiple of a reference rate;
//! the conventional choice is `big_gamma = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// The five rates that fix the rotating-frame model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Cavity detuning `omega_a - omega_b`.
    pub delta: f64,
    /// Dissipative coupling through the shared bath. Zero is the decoupled limit.
    pub big_gamma: f64,
    /// Balanced total cavity rate. Negative values describe gain.
    pub gamma0: f64,
    /// Probe-channel coupling rate.
    pub gamma_c: f64,
    /// Noise rate of the dissipative coupling channel.
    pub gamma_bath: f64,
}

impl SystemParams {
    /// Builds and validates a parameter set with `gamma_bath = big_gamma`.
    pub fn new(delta: f64, big_gamma: f64, gamma0: f64, gamma_c: f64) -> Result<Self> {
        Self::with_bath(delta, big_gamma, gamma0, gamma_c, big_gamma)
    }

    pub fn with_bath(
        delta: f64,
        big_gamma: f64,
        gamma0: f64,
        gamma_c: f64,
        gamma_bath: f64,
    ) -> Result<Self> {
        let p = SystemParams {
            delta,
            big_gamma,
            gamma0,
            gamma_c,
            gamma_bath,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("delta", self.delta),
            ("big_gamma", self.big_gamma),
            ("gamma0", self.gamma0),
            ("gamma_c", self.gamma_c),
            ("gamma_bath", self.gamma_bath),
        ] {
            if !v.is_finite() {
                return Err(invalid(name, format!("must be finite, got {v}")));
            }
        }
        if self.big_gamma < 0.0 {
            return Err(invalid("big_gamma", "must be non-negative"));
        }
        if self.gamma_c < 0.0 {
            return Err(invalid("gamma_c", "must be non-negative"));
        }
        if self.gamma_bath < 0.0 {
            return Err(invalid("gamma_bath", "must be non-negative"));
        }
        Ok(())
    }

    /// Rejects the decoupled limit for quantities measured relative to `big_gamma`.
    pub(crate) fn require_coupled(&self) -> Result<()> {
        if self.big_gamma > 0.0 {
            Ok(())
        } else {
            Err(invalid("big_gamma", "must be strictly positive here"))
        }
    }

    /// Intrinsic loss `gamma0 - gamma_c`. Negative under gain.
    pub fn gamma_intrinsic(&self) -> f64 {
        self.gamma0 - self.gamma_c
    }

    /// Total diagonal damping `gamma0 + big_gamma`.
    pub fn total_damping(&self) -> f64 {
        self.gamma0 + self.big_gamma
    }

    /// Discriminant `delta^2/4 - big_gamma^2` of the effective Hamiltonian.
    pub fn discriminant(&self) -> f64 {
        self.delta * self.delta / 4.0 - self.big_gamma * self.big_gamma
    }

    /// Detuning perturbed away from the exceptional point, `delta = (2 + eps) * big_gamma`.
    ///
    /// For `eps >= 0` the gain-balance condition `gamma0 = -big_gamma` is used,
    /// which puts the lasing pole at `omega0 = sqrt(delta^2/4 - big_gamma^2)`.
    /// For `eps < 0` the detuning lies inside the unbroken phase, where a real
    /// critical frequency exists only on the undetuned lasing locus
    /// `4 gamma0^2 + delta^2 + 8 gamma0 big_gamma = 0`; `gamma0` is taken on the
    /// branch `-big_gamma + sqrt(big_gamma^2 - delta^2/4)`, which meets
    /// `-big_gamma` continuously at `eps = 0`.
    pub fn perturbed_ep(eps: f64, big_gamma: f64, gamma_c: f64) -> Result<Self> {
        if !(big_gamma > 0.0) {
            return Err(invalid("big_gamma", "must be strictly positive"));
        }
        let delta = (2.0 + eps) * big_gamma;
        let gamma0 = if eps >= 0.0 {
            -big_gamma
        } else {
            let k = big_gamma * big_gamma - delta * delta / 4.0;
            -big_gamma + k.max(0.0).sqrt()
        };
        Self::new(delta, big_gamma, gamma0, gamma_c)
    }
}

/// Lab-frame parameters: bare cavity frequencies plus the rotating-frame model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullFrameParams {
    pub omega_a: f64,
    pub omega_b: f64,
    pub system: SystemParams,
}

impl FullFrameParams {
    /// Builds lab-frame parameters; `system.delta` is overwritten by `omega_a - omega_b`.
    pub fn new(omega_a: f64, omega_b: f64, mut system: SystemParams) -> Result<Self> {
        system.delta = omega_a - omega_b;
        let p = FullFrameParams {
            omega_a,
            omega_b,
            system,
        };
        p.validate()?;
        Ok(p)
    }

    /// Places the two cavities symmetrically about `center`.
    pub fn centered(center: f64, system: SystemParams) -> Result<Self> {
        Self::new(
            center + system.delta / 2.0,
            center - system.delta / 2.0,
            system,
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        for (name, v) in [("omega_a", self.omega_a), ("omega_b", self.omega_b)] {
            if !v.is_finite() {
                return Err(invalid(name, format!("must be finite, got {v}")));
            }
            if v < 0.0 {
                return Err(invalid(name, "must be non-negative"));
            }
        }
        let d = self.omega_a - self.omega_b;
        let scale = self.omega_a.abs().max(self.omega_b.abs()).max(1.0);
        if (d - self.system.delta).abs() > 4.0 * f64::EPSILON * scale {
            return Err(invalid(
                "delta",
                format!(
                    "omega_a - omega_b = {d} differs from delta = {}",
                    self.system.delta
                ),
            ));
        }
        Ok(())
    }

    /// Rotating-frame frequency `(omega_a + omega_b) / 2`.
    pub fn frame_frequency(&self) -> f64 {
        0.5 * (self.omega_a + self.omega_b)
    }
}
