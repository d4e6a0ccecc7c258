//! Closed-form dressed-state scattering amplitudes for the mesa-mode cavity.
//!
//! In the dressed basis the cavity containing `n` photons acts on the atomic
//! center of mass as a square barrier (`+` branch) and a square well (`-`
//! branch) of equal height √(n+1)·ħg over 0 < z < L. With ħ = m = k₀ = 1 the
//! interior wavenumbers are
//!
//! ```text
//! k± = sqrt(k² ∓ sqrt(n+1))
//! ```
//!
//! real for propagation over the barrier, positive-imaginary in the
//! evanescent regime k² < √(n+1). Transmission and reflection follow the
//! standard square-potential forms; the physical exit channels |e,n⟩ and
//! |g,n+1⟩ are the coherent half-sum and half-difference of the two branches.
//!
//! All amplitudes are evaluated in full complex arithmetic so the evanescent
//! barrier turns trigonometric factors into hyperbolic ones automatically.
//! An independent boundary-matching oracle (`oracle_scattering`) solves the
//! piecewise-plane-wave linear system directly and is used by the tests to
//! cross-check the closed forms.

use num_complex::Complex64;
use thiserror::Error;

/// Floating-point errors for the scattering layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScatteringError {
    /// The closed forms are singular at k = 0 and meaningless for k < 0.
    #[error("incident wavenumber must be positive and finite, got k = {k}")]
    NonPositiveWavenumber { k: f64 },
    /// Cavity length must be a finite non-negative number (zero is the
    /// analytic no-cavity limit).
    #[error("cavity length k0*L must be finite and non-negative, got {length}")]
    InvalidCavityLength { length: f64 },
    /// The boundary-matching system was numerically singular. Cannot occur
    /// for k > 0; indicates an internal error.
    #[error("boundary-matching linear system is singular at k = {k}")]
    SingularSystem { k: f64 },
}

/// Dimensionless description of the cavity: length k₀L and photon number n.
///
/// Units are fixed to ħ = m = k₀ = 1, so the vacuum coupling is g = 1/2 and
/// every wavenumber passed to this module is measured in units of k₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityConfig {
    length_k0l: f64,
    photons_n: u32,
}

impl CavityConfig {
    /// Build a cavity description. `length_k0l` must be finite and
    /// non-negative; zero length is accepted as the analytic no-cavity limit.
    pub fn new(length_k0l: f64, photons_n: u32) -> Result<Self, ScatteringError> {
        if !length_k0l.is_finite() || length_k0l < 0.0 {
            return Err(ScatteringError::InvalidCavityLength { length: length_k0l });
        }
        Ok(Self { length_k0l, photons_n })
    }

    /// Cavity length as the dimensionless product k₀·L.
    pub fn length(&self) -> f64 {
        self.length_k0l
    }

    /// Photon number n of the field prior to the atom's entry.
    pub fn photons(&self) -> u32 {
        self.photons_n
    }

    /// Height of the dressed potentials in units of k₀²ħ²/2m: √(n+1).
    pub fn coupling_strength(&self) -> f64 {
        ((self.photons_n as f64) + 1.0).sqrt()
    }

    /// Wavenumber at which the barrier branch switches from evanescent to
    /// propagating: k_th = (n+1)^(1/4).
    pub fn threshold_wavenumber(&self) -> f64 {
        self.coupling_strength().sqrt()
    }
}

/// Exit channel selector.
///
/// `Excited` is transmission/reflection in |e,n⟩, `Ground` in |g,n+1⟩.
/// `Free` replaces the cavity amplitude by T = 1 (φ = 0) and serves as the
/// free-propagation reference of the wave-packet figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Excited,
    Ground,
    Free,
}

impl std::fmt::Display for Channel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Channel::Excited => write!(f, "excited"),
            Channel::Ground => write!(f, "ground"),
            Channel::Free => write!(f, "free"),
        }
    }
}

/// Which dressed potential a single-branch computation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialSign {
    /// `+` branch: square barrier of height √(n+1).
    Barrier,
    /// `-` branch: square well of depth √(n+1).
    Well,
}

impl PotentialSign {
    fn sign(self) -> f64 {
        match self {
            PotentialSign::Barrier => 1.0,
            PotentialSign::Well => -1.0,
        }
    }
}

/// Interior wavenumbers of the two dressed branches at a given incident k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedWavenumbers {
    /// Barrier branch k⁺: real and non-negative above threshold, purely
    /// imaginary with positive imaginary part in the evanescent regime.
    pub k_plus: Complex64,
    /// Well branch k⁻ = √(k² + √(n+1)), always real and ≥ k.
    pub k_minus: f64,
}

/// Reflection and transmission amplitudes of the two dressed branches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchAmplitudes {
    pub tau_plus: Complex64,
    pub tau_minus: Complex64,
    pub rho_plus: Complex64,
    pub rho_minus: Complex64,
}

impl BranchAmplitudes {
    /// |τ|² + |ρ|² − 1 for the requested branch; zero for a lossless cavity.
    pub fn flux_defect(&self, sign: PotentialSign) -> f64 {
        let (tau, rho) = match sign {
            PotentialSign::Barrier => (self.tau_plus, self.rho_plus),
            PotentialSign::Well => (self.tau_minus, self.rho_minus),
        };
        tau.norm_sqr() + rho.norm_sqr() - 1.0
    }
}

/// Coherent exit-channel amplitudes at one incident wavenumber.
///
/// `t_excited`/`r_excited` refer to |e,n⟩, `t_ground`/`r_ground` to |g,n+1⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelAmplitudes {
    pub t_excited: Complex64,
    pub r_excited: Complex64,
    pub t_ground: Complex64,
    pub r_ground: Complex64,
}

impl ChannelAmplitudes {
    /// Transmission amplitude of the requested channel (1 for `Free`).
    pub fn transmission(&self, channel: Channel) -> Complex64 {
        match channel {
            Channel::Excited => self.t_excited,
            Channel::Ground => self.t_ground,
            Channel::Free => Complex64::new(1.0, 0.0),
        }
    }

    /// |R_e|² + |T_e|² + |R_g|² + |T_g|² − 1; zero for a lossless cavity.
    pub fn unitarity_defect(&self) -> f64 {
        self.t_excited.norm_sqr()
            + self.r_excited.norm_sqr()
            + self.t_ground.norm_sqr()
            + self.r_ground.norm_sqr()
            - 1.0
    }
}

fn check_wavenumber(k: f64) -> Result<(), ScatteringError> {
    if !k.is_finite() || k <= 0.0 {
        return Err(ScatteringError::NonPositiveWavenumber { k });
    }
    Ok(())
}

/// Principal-branch square root of a real number, placed on the positive
/// imaginary axis when the argument is negative. This makes evanescent
/// interior waves decay rather than grow.
fn principal_sqrt(value: f64) -> Complex64 {
    if value >= 0.0 {
        Complex64::new(value.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-value).sqrt())
    }
}

/// Interior wavenumbers k± = √(k² ∓ √(n+1)) for incident wavenumber k > 0.
pub fn dressed_wavenumbers(
    k: f64,
    cfg: &CavityConfig,
) -> Result<DressedWavenumbers, ScatteringError> {
    check_wavenumber(k)?;
    let v = cfg.coupling_strength();
    Ok(DressedWavenumbers {
        k_plus: principal_sqrt(k * k - v),
        k_minus: (k * k + v).sqrt(),
    })
}

/// sin(x)/x for complex x, stable at and near x = 0.
fn sinc(x: Complex64) -> Complex64 {
    if x.norm() < 1e-4 {
        // |x|^6 term is below 1e-28 here
        let x2 = x * x;
        Complex64::new(1.0, 0.0) - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Square-potential amplitudes for one branch with interior wavenumber q.
///
/// Written with Σ·sin(qL) = (q² + k²)·L·sinc(qL)/(2k) so that the threshold
/// q → 0 and the zero-length limit are the smooth continuation of the same
/// expression rather than special cases.
fn branch(k: f64, q: Complex64, length: f64) -> (Complex64, Complex64) {
    let i = Complex64::new(0.0, 1.0);
    let ql = q * length;
    let snc = sinc(ql);
    let k2 = Complex64::new(k * k, 0.0);
    let sigma_sin = (q * q + k2) * length * snc / (2.0 * k);
    let delta_sin = (q * q - k2) * length * snc / (2.0 * k);
    let tau = (-i * k * length).exp() / (ql.cos() - i * sigma_sin);
    let rho = i * delta_sin * (i * k * length).exp() * tau;
    (tau, rho)
}

/// Barrier and well transmission/reflection amplitudes at incident k > 0.
pub fn branch_amplitudes(
    k: f64,
    cfg: &CavityConfig,
) -> Result<BranchAmplitudes, ScatteringError> {
    let q = dressed_wavenumbers(k, cfg)?;
    let (tau_plus, rho_plus) = branch(k, q.k_plus, cfg.length());
    let (tau_minus, rho_minus) = branch(k, Complex64::new(q.k_minus, 0.0), cfg.length());
    Ok(BranchAmplitudes { tau_plus, tau_minus, rho_plus, rho_minus })
}

/// Exit-channel amplitudes: the half-sum (excited) and half-difference
/// (ground) of the barrier and well amplitudes.
pub fn channel_amplitudes(
    k: f64,
    cfg: &CavityConfig,
) -> Result<ChannelAmplitudes, ScatteringError> {
    let b = branch_amplitudes(k, cfg)?;
    Ok(ChannelAmplitudes {
        t_excited: 0.5 * (b.tau_plus + b.tau_minus),
        r_excited: 0.5 * (b.rho_plus + b.rho_minus),
        t_ground: 0.5 * (b.tau_plus - b.tau_minus),
        r_ground: 0.5 * (b.rho_plus - b.rho_minus),
    })
}

/// Transmission amplitude of a single channel at incident k > 0.
///
/// `Channel::Free` returns 1 without touching the cavity (still requires
/// k > 0 for consistency with the physical channels).
pub fn transmission(
    k: f64,
    cfg: &CavityConfig,
    channel: Channel,
) -> Result<Complex64, ScatteringError> {
    if channel == Channel::Free {
        check_wavenumber(k)?;
        return Ok(Complex64::new(1.0, 0.0));
    }
    Ok(channel_amplitudes(k, cfg)?.transmission(channel))
}

/// Independent verification oracle: solves the piecewise-plane-wave
/// boundary-matching linear system for a single square potential of height
/// ±√(n+1) (in k₀²ħ²/2m units) and returns (τ, ρ).
///
/// The four unknowns are ρ, two interior coefficients, and τ, fixed by
/// continuity of value and derivative at z = 0 and z = L. No use is made of
/// the closed forms above. Near the branch threshold the interior basis
/// {cos(qz), sin(qz)/q} is used (entire in q²); elsewhere the exponentials
/// {e^{iqz}, e^{-iq(z-L)}} keep every matrix entry bounded for evanescent q.
pub fn oracle_scattering(
    k: f64,
    potential_sign: PotentialSign,
    cfg: &CavityConfig,
) -> Result<(Complex64, Complex64), ScatteringError> {
    check_wavenumber(k)?;
    let length = cfg.length();
    let q = principal_sqrt(k * k - potential_sign.sign() * cfg.coupling_strength());
    let i = Complex64::new(0.0, 1.0);
    let ik = i * k;
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let exp_ikl = (ik * length).exp();

    // Unknowns x = [rho, a, b, tau]; rows are value/derivative continuity at
    // z = 0 then z = L.
    let (matrix, rhs): ([[Complex64; 4]; 4], [Complex64; 4]) = if (q * length).norm() <= 1.0 {
        // psi_mid = a cos(qz) + b sin(qz)/q; regular at q = 0 where the
        // basis degenerates to {1, z}.
        let c = (q * length).cos();
        let s = length * sinc(q * length);
        (
            [
                [-one, one, zero, zero],
                [ik, zero, one, zero],
                [zero, c, s, -exp_ikl],
                [zero, -q * q * s, c, -ik * exp_ikl],
            ],
            [one, ik, zero, zero],
        )
    } else {
        // psi_mid = a e^{iqz} + b e^{-iq(z-L)}; both basis functions have
        // magnitude <= 1 on [0, L] for evanescent q.
        let ephase = (i * q * length).exp();
        let iq = i * q;
        (
            [
                [-one, one, ephase, zero],
                [ik, iq, -iq * ephase, zero],
                [zero, ephase, one, -exp_ikl],
                [zero, iq * ephase, -iq, -ik * exp_ikl],
            ],
            [one, ik, zero, zero],
        )
    };

    let x = solve4(matrix, rhs).ok_or(ScatteringError::SingularSystem { k })?;
    Ok((x[3], x[0]))
}

/// Gaussian elimination with partial pivoting for a 4x4 complex system.
fn solve4(mut m: [[Complex64; 4]; 4], mut b: [Complex64; 4]) -> Option<[Complex64; 4]> {
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&r, &s| m[r][col].norm().total_cmp(&m[s][col].norm()))
            .unwrap();
        if m[pivot][col].norm() == 0.0 {
            return None;
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        let pivot_row = m[col];
        for row in (col + 1)..4 {
            let factor = m[row][col] / pivot_row[col];
            for (entry, pivot_entry) in m[row].iter_mut().zip(&pivot_row).skip(col) {
                *entry -= factor * pivot_entry;
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [Complex64::new(0.0, 0.0); 4];
    for row in (0..4).rev() {
        let mut acc = b[row];
        for j in (row + 1)..4 {
            acc -= m[row][j] * x[j];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}
