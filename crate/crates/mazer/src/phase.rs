//! Transmission phase, the phase function φ(k) + kL, and the Wigner phase
//! time.
//!
//! Writing the channel transmission amplitude as T(k) = |T| e^{iφ(k)}, the
//! stationary-phase condition for a narrow wave packet puts the transmitted
//! peak at
//!
//! ```text
//! t_ph = (dφ/dk + L) / k̄          (ħ = m = 1)
//! ```
//!
//! so t_ph/t_cl = 1 + (dφ/dk)/L with t_cl = L/k̄. Negative values occur
//! exactly where the phase function φ(k) + kL has negative slope.
//!
//! Derivatives are taken by 5-point central finite differences on a locally
//! unwrapped stencil. Near a transmission zero the phase varies by ~π over
//! the distance to the zero; such stencils are detected (consecutive phase
//! increments above π/2) and retried with a smaller step before giving up.

use crate::scattering::{transmission, CavityConfig, Channel, ScatteringError};
use rayon::prelude::*;
use thiserror::Error;

/// Default finite-difference step in k₀ units.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Default k-grid spacing for sweep plots.
pub const DEFAULT_SWEEP_DK: f64 = 1e-3;

/// Amplitudes below this are treated as transmission zeros: the phase is
/// undefined there and the sample is flagged.
pub const AMPLITUDE_FLOOR: f64 = 1e-14;

/// How many decades of step refinement `phase_time` attempts before
/// reporting a stencil failure.
const MAX_REFINEMENTS: u32 = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhaseError {
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
    /// Phase analysis needs a finite transit time, so a zero-length cavity
    /// is rejected here even though the amplitudes themselves allow it.
    #[error("phase time requires a cavity of positive length")]
    ZeroLengthCavity,
    #[error("finite-difference step must satisfy 0 < h and k_bar - 2h > 0, got k_bar = {k_bar}, h = {h}")]
    InvalidStep { k_bar: f64, h: f64 },
    #[error(
        "stencil at k_bar = {k_bar} crosses a zero of |T| even at h = {h:.3e}; \
         the phase is undefined at the zero — try a smaller h or a nearby k_bar"
    )]
    StencilCrossesZero { k_bar: f64, h: f64 },
    #[error("k grid must be ascending and positive")]
    BadGrid,
}

/// One sample of the unwrapped transmission phase along a k-grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSample {
    /// Wavenumber in k₀ units.
    pub k: f64,
    /// Unwrapped phase of the channel transmission amplitude.
    pub phi: f64,
    /// φ + k·L, whose slope decides sub- vs superclassical traversal.
    pub phase_function: f64,
    /// True when |T| fell below [`AMPLITUDE_FLOOR`] at this sample and the
    /// phase was interpolated from its neighbours.
    pub flagged: bool,
}

/// Phase time and the phase derivatives behind it at one mean wavenumber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseTimeResult {
    /// Mean wavenumber k̄ in k₀ units.
    pub k_bar: f64,
    /// Phase traversal time over the classical time, 1 + (dφ/dk)/L.
    pub t_ph_over_tcl: f64,
    /// dφ/dk in 1/k₀ units.
    pub dphi_dk: f64,
    /// d²φ/dk² in 1/k₀² units; the spreading ingredient of the
    /// stationary-phase envelope.
    pub d2phi_dk2: f64,
    /// Channel the phase belongs to.
    pub channel: Channel,
    /// Finite-difference step actually used after any refinement.
    pub step_used: f64,
}

/// One point of a phase-time sweep: the phase time may have failed at
/// isolated points (transmission zeros) without aborting the sweep.
#[derive(Debug, Clone)]
pub struct PhaseSweepPoint {
    pub k_bar: f64,
    /// Transmission probability |T(k̄)|² of the swept channel.
    pub t_abs2: f64,
    pub outcome: Result<PhaseTimeResult, PhaseError>,
}

impl PhaseSweepPoint {
    pub fn t_ph_over_tcl(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|r| r.t_ph_over_tcl)
    }
}

/// Shift `phase` by the multiple of 2π that brings it closest to `reference`.
fn unwrap_step(phase: f64, reference: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    phase + two_pi * ((reference - phase) / two_pi).round()
}

/// Unwrap a phase sequence in place by nearest-multiple-of-2π continuation.
/// Entries whose `skip` flag is set are ignored as references and filled by
/// linear interpolation afterwards.
fn unwrap_inplace(phases: &mut [f64], skip: &[bool]) {
    let mut last_good: Option<usize> = None;
    for i in 0..phases.len() {
        if skip[i] {
            continue;
        }
        if let Some(j) = last_good {
            phases[i] = unwrap_step(phases[i], phases[j]);
        }
        last_good = Some(i);
    }
    // interpolate across flagged samples
    let good: Vec<usize> = (0..phases.len()).filter(|&i| !skip[i]).collect();
    if good.is_empty() {
        return;
    }
    for i in 0..phases.len() {
        if !skip[i] {
            continue;
        }
        let after = good.iter().copied().find(|&j| j > i);
        let before = good.iter().copied().rev().find(|&j| j < i);
        phases[i] = match (before, after) {
            (Some(a), Some(b)) => {
                let t = (i - a) as f64 / (b - a) as f64;
                phases[a] + t * (phases[b] - phases[a])
            }
            (Some(a), None) => phases[a],
            (None, Some(b)) => phases[b],
            (None, None) => unreachable!(),
        };
    }
}

/// Public helper: unwrap an already-sampled phase sequence. Applying it to a
/// continuous sequence (increments below π) is the identity.
pub fn unwrap_phases(phases: &mut [f64]) {
    let skip = vec![false; phases.len()];
    unwrap_inplace(phases, &skip);
}

/// Unwrapped phase and phase function along an ascending k-grid.
///
/// The grid must be dense enough that true phase increments stay below π;
/// samples where |T| vanishes are flagged and interpolated across.
pub fn phase_grid(
    cfg: &CavityConfig,
    channel: Channel,
    k_grid: &[f64],
) -> Result<Vec<PhaseSample>, PhaseError> {
    if k_grid.is_empty() || k_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(PhaseError::BadGrid);
    }
    let amps: Vec<(f64, f64)> = k_grid
        .par_iter()
        .map(|&k| transmission(k, cfg, channel).map(|t| (t.arg(), t.norm())))
        .collect::<Result<_, _>>()?;
    let mut phases: Vec<f64> = amps.iter().map(|&(arg, _)| arg).collect();
    let flagged: Vec<bool> = amps.iter().map(|&(_, norm)| norm < AMPLITUDE_FLOOR).collect();
    unwrap_inplace(&mut phases, &flagged);
    Ok(k_grid
        .iter()
        .zip(phases.iter().zip(&flagged))
        .map(|(&k, (&phi, &flagged))| PhaseSample {
            k,
            phi,
            phase_function: phi + k * cfg.length(),
            flagged,
        })
        .collect())
}

/// Wigner phase time at k̄ from a 5-point finite-difference stencil.
///
/// Starts at step `h` and shrinks it tenfold whenever the stencil straddles
/// a transmission zero (detected as a consecutive phase increment above π/2
/// or an amplitude at the floor), up to [`MAX_REFINEMENTS`] decades.
pub fn phase_time(
    k_bar: f64,
    cfg: &CavityConfig,
    channel: Channel,
    h: f64,
) -> Result<PhaseTimeResult, PhaseError> {
    if cfg.length() <= 0.0 {
        return Err(PhaseError::ZeroLengthCavity);
    }
    let step_ok = h > 0.0 && k_bar > h && k_bar - 2.0 * h > 0.0;
    if !step_ok {
        return Err(PhaseError::InvalidStep { k_bar, h });
    }
    let mut step = h;
    for _ in 0..=MAX_REFINEMENTS {
        match stencil_derivatives(k_bar, cfg, channel, step)? {
            Some((dphi, d2phi)) => {
                return Ok(PhaseTimeResult {
                    k_bar,
                    t_ph_over_tcl: 1.0 + dphi / cfg.length(),
                    dphi_dk: dphi,
                    d2phi_dk2: d2phi,
                    channel,
                    step_used: step,
                });
            }
            None => step /= 10.0,
        }
    }
    Err(PhaseError::StencilCrossesZero { k_bar, h: step * 10.0 })
}

/// Evaluate the 5-point stencil; `None` means it straddled a zero of |T|.
fn stencil_derivatives(
    k_bar: f64,
    cfg: &CavityConfig,
    channel: Channel,
    h: f64,
) -> Result<Option<(f64, f64)>, PhaseError> {
    let mut phases = [0.0; 5];
    for (i, offset) in [-2.0, -1.0, 0.0, 1.0, 2.0].iter().enumerate() {
        let t = transmission(k_bar + offset * h, cfg, channel)?;
        if t.norm() < AMPLITUDE_FLOOR {
            return Ok(None);
        }
        phases[i] = t.arg();
    }
    // unwrap outward from the centre so the centre sample anchors the branch
    for i in [1, 0] {
        phases[i] = unwrap_step(phases[i], phases[i + 1]);
    }
    for i in [3, 4] {
        phases[i] = unwrap_step(phases[i], phases[i - 1]);
    }
    if phases.windows(2).any(|w| (w[1] - w[0]).abs() > std::f64::consts::FRAC_PI_2) {
        return Ok(None);
    }
    let dphi = (phases[0] - 8.0 * phases[1] + 8.0 * phases[3] - phases[4]) / (12.0 * h);
    let d2phi = (-phases[0] + 16.0 * phases[1] - 30.0 * phases[2] + 16.0 * phases[3]
        - phases[4])
        / (12.0 * h * h);
    Ok(Some((dphi, d2phi)))
}

/// Phase-time sweep paired with |T|² at each k̄. Points where the phase time
/// is undefined (transmission zeros) carry their error instead of aborting
/// the sweep; results are ordered by k̄ regardless of evaluation order.
pub fn phase_time_sweep(
    cfg: &CavityConfig,
    channel: Channel,
    k_bar_grid: &[f64],
    h: f64,
) -> Vec<PhaseSweepPoint> {
    k_bar_grid
        .par_iter()
        .map(|&k_bar| {
            let t_abs2 = transmission(k_bar, cfg, channel)
                .map(|t| t.norm_sqr())
                .unwrap_or(f64::NAN);
            PhaseSweepPoint {
                k_bar,
                t_abs2,
                outcome: phase_time(k_bar, cfg, channel, h),
            }
        })
        .collect()
}
