//! Scattering of ultra-cold two-level atoms by the vacuum field of a
//! single-mode cavity.
//!
//! A resonant atom entering an empty high-Q cavity couples to the field
//! through the Jaynes-Cummings interaction. In the dressed basis the
//! center-of-mass motion sees two piecewise-constant potentials at once: a
//! barrier and a well of equal height, produced by the photon field itself.
//! The physical exit channels (atom still excited, or de-excited with one
//! photon left behind) are coherent half-sum/half-difference combinations of
//! the barrier and well scattering amplitudes.
//!
//! The crate provides:
//!
//! * [`scattering`] — closed-form reflection/transmission amplitudes for the
//!   dressed barrier and well, their combination into exit channels, and an
//!   independent boundary-matching oracle used for verification.
//! * [`phase`] — unwrapped transmission phase, the phase function φ(k) + kL,
//!   and the Wigner phase time per channel from finite differences.
//! * [`wavepacket`] — time-dependent transmitted probability density at the
//!   cavity exit by direct quadrature of the momentum integral, the
//!   stationary-phase Gaussian approximation, and peak/splitting analysis.
//! * [`quadrature`] — fixed-order Gauss-Legendre rules used by `wavepacket`.
//!
//! Units: ħ = m = k₀ = 1, where ħ²k₀²/2m = ħg is the vacuum coupling energy.
//! All wavenumbers are in units of k₀, lengths enter as k₀L, and times are
//! reported as t/t_cl with t_cl = L/k̄ the classical transit time.

pub mod phase;
pub mod quadrature;
pub mod scattering;
pub mod wavepacket;

pub use phase::{PhaseError, PhaseSample, PhaseSweepPoint, PhaseTimeResult};
pub use scattering::{
    BranchAmplitudes, CavityConfig, Channel, ChannelAmplitudes, DressedWavenumbers,
    PotentialSign, ScatteringError,
};
pub use wavepacket::{
    PacketSpec, Peak, QuadratureControls, SplitDelayReport, StationaryPhaseResult, TimeSeries,
    WavepacketError,
};
