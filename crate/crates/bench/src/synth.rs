//! Synthetic data generators.

use std::sync::Arc;

use illposed_core::{parabolic_forward, Basis, ModeIndex, SpectralVec, SpectrumModel};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};
use crate::grid::{ingest_grid, BoundaryPolicy, GridFunction};

/// `e_k` (1-based position in the sorted spectrum).
pub fn unit_mode(model: &Arc<SpectrumModel<f64>>, k: usize) -> Result<SpectralVec<f64>> {
    Ok(SpectralVec::unit(model, k)?)
}

/// Horizon of `a^2 u_t = -A^2 u` expressed for `u_t = -A^2 u`: `T / a^2`.
pub fn effective_horizon(horizon: f64, a2: f64) -> Result<f64> {
    if !(a2 > 0.0) || !a2.is_finite() {
        return Err(BenchError::config("a2 must be positive"));
    }
    Ok(horizon / a2)
}

/// Terminal state `u(T)` of the heat flow with diffusion constant `1 / a^2` started at `u0`.
pub fn parabolic_terminal(u0: &SpectralVec<f64>, horizon: f64, a2: f64) -> Result<SpectralVec<f64>> {
    Ok(parabolic_forward(u0, effective_horizon(horizon, a2)?)?)
}

/// Smooth quartic plus a sawtooth confined to a window: the rough part is square
/// integrable but has jumps, so its spectral coefficients decay slowly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileParams {
    /// Peak of `16 x^2 (1 - x)^2` (per axis, relative coordinates).
    pub smooth_amplitude: f64,
    pub rough_amplitude: f64,
    /// Number of sawtooth periods inside the window.
    pub teeth: usize,
    /// Window in relative coordinates `[a, b]`, applied per axis.
    pub window: (f64, f64),
    /// Grid points per axis are `max(oversample * modes + 1, 1025)`.
    pub oversample: usize,
}

impl Default for ProfileParams {
    fn default() -> Self {
        ProfileParams {
            smooth_amplitude: 1.0,
            rough_amplitude: 0.5,
            teeth: 6,
            window: (0.55, 0.9),
            oversample: 8,
        }
    }
}

impl ProfileParams {
    fn validate(&self) -> Result<()> {
        let (a, b) = self.window;
        if !(0.0 < a && a < b && b < 1.0) {
            return Err(BenchError::config("profile window must satisfy 0 < a < b < 1"));
        }
        if self.teeth == 0 || self.oversample < 2 {
            return Err(BenchError::config("profile needs teeth >= 1 and oversample >= 2"));
        }
        if !self.smooth_amplitude.is_finite() || !self.rough_amplitude.is_finite() {
            return Err(BenchError::config("profile amplitudes must be finite"));
        }
        Ok(())
    }

    fn quartic(&self, t: f64) -> f64 {
        16.0 * t * t * (1.0 - t) * (1.0 - t)
    }

    /// Sawtooth in `[-1, 1)` inside the window, zero outside.
    fn saw(&self, t: f64) -> f64 {
        let (a, b) = self.window;
        if t < a || t > b {
            return 0.0;
        }
        let phase = (t - a) / (b - a) * self.teeth as f64;
        2.0 * phase.fract() - 1.0
    }

    fn in_window(&self, t: f64) -> bool {
        t >= self.window.0 && t <= self.window.1
    }

    /// Value at relative coordinate `t` in `[0, 1]`.
    pub fn value_1d(&self, t: f64) -> f64 {
        self.smooth_amplitude * self.quartic(t) + self.rough_amplitude * self.saw(t)
    }

    /// Value at relative coordinates `(s, t)`; the rough part lives on the window square.
    pub fn value_2d(&self, s: f64, t: f64) -> f64 {
        let rough = if self.in_window(t) { self.saw(s) } else { 0.0 };
        self.smooth_amplitude * self.quartic(s) * self.quartic(t) + self.rough_amplitude * rough
    }
}

fn points(modes: usize, oversample: usize) -> usize {
    (oversample * modes + 1).max(1025)
}

/// Rough-plus-smooth profile projected onto `model` by sampling and trapezoid quadrature.
pub fn piecewise_profile(model: &Arc<SpectrumModel<f64>>, params: &ProfileParams) -> Result<SpectralVec<f64>> {
    params.validate()?;
    let (mx, my) = model.modes().iter().fold((0, 0), |(a, b), m| match *m {
        ModeIndex::Single(j) => (a.max(j), b),
        ModeIndex::Pair(j, k) => (a.max(j), b.max(k)),
    });
    let gf = match model.basis() {
        Basis::Sine1D { length } => {
            let l = *length;
            GridFunction::sample_line(points(mx, params.oversample), l, |x| params.value_1d(x / l))?
        }
        Basis::SineRect2D { lx, ly } => {
            let (lx, ly) = (*lx, *ly);
            GridFunction::sample_rect(
                points(mx, params.oversample),
                points(my, params.oversample),
                lx,
                ly,
                |x, y| params.value_2d(x / lx, y / ly),
            )?
        }
        Basis::Custom => return Err(BenchError::config("profiles need a sine basis")),
    };
    Ok(ingest_grid(&gf, model, BoundaryPolicy::Error)?.coeffs)
}
