//! Physical inputs, reduced units and the two-level atomic state.
//!
//! Everything downstream of this module works in reduced units: the
//! free-space radiative rate is `γ = 1`, frequencies are measured in `γ`,
//! and lengths are measured either in the transition wavelength `λ` or in
//! the sample depth `d` (stated per function). SI values appear only in
//! [`MediumParameters`] and [`free_space_gamma`].

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{require, Error, Result};

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Sample geometry seen by the probe atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Geometry {
    /// Probe on the axis of a long cylinder; every line of sight crosses a
    /// depth `d` of medium.
    CylinderOnAxis,
    /// Plane-parallel slab extending a depth `d` on either side of its
    /// mid-plane.
    Slab,
}

impl Geometry {
    pub fn name(self) -> &'static str {
        match self {
            Geometry::CylinderOnAxis => "cylinder-on-axis",
            Geometry::Slab => "slab",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "cylinder-on-axis" | "cylinder" => Some(Geometry::CylinderOnAxis),
            "slab" => Some(Geometry::Slab),
            _ => None,
        }
    }
}

/// SI description of the medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumParameters {
    /// Atoms per cubic metre.
    pub atom_density: f64,
    /// Rest-frame transition wavelength, m.
    pub transition_wavelength: f64,
    /// Rest-frame transition frequency, rad/s.
    pub rest_frequency: f64,
    /// Free-space radiative decay rate, 1/s.
    pub radiative_rate: f64,
    /// Non-radiative excited-state decay rate, 1/s.
    pub nonradiative_rate: f64,
    /// Standard deviation of the Doppler distribution, rad/s.
    pub doppler_width: f64,
    /// Sample depth d, m.
    pub sample_length: f64,
    pub geometry: Geometry,
}

impl MediumParameters {
    pub fn validate(&self) -> Result<()> {
        require("atom_density", self.atom_density, self.atom_density > 0.0, "must be > 0")?;
        require(
            "transition_wavelength",
            self.transition_wavelength,
            self.transition_wavelength > 0.0,
            "must be > 0",
        )?;
        require("rest_frequency", self.rest_frequency, self.rest_frequency > 0.0, "must be > 0")?;
        require("radiative_rate", self.radiative_rate, self.radiative_rate > 0.0, "must be > 0")?;
        require(
            "nonradiative_rate",
            self.nonradiative_rate,
            self.nonradiative_rate >= 0.0,
            "must be >= 0",
        )?;
        require("doppler_width", self.doppler_width, self.doppler_width >= 0.0, "must be >= 0")?;
        require("sample_length", self.sample_length, self.sample_length > 0.0, "must be > 0")?;
        Ok(())
    }

    /// γ*/γ.
    pub fn nonradiative_ratio(&self) -> f64 {
        self.nonradiative_rate / self.radiative_rate
    }
}

/// Dimensionless combinations that fully determine every reduced-unit output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessGroups {
    /// Homogeneous to inhomogeneous width, `γ / (√(2π) Δ_D)`.
    pub g: f64,
    /// Opacity scale `N λ² d`.
    pub eta: f64,
    /// Cooperativity `N λ³ / 4π²`, when the wavelength scale is known.
    pub cooperativity: Option<f64>,
    /// Slab parameter `π d / λ`, when the wavelength scale is known.
    pub slab_parameter: Option<f64>,
    /// Line-center opacity `K₀ d = η g`.
    pub kappa: f64,
}

impl DimensionlessGroups {
    /// Groups for the Doppler-broadened gas, where only `η` and `g` matter.
    pub fn from_opacity(eta: f64, g: f64) -> Result<Self> {
        require("eta", eta, eta >= 0.0, "must be >= 0")?;
        require("g", g, g > 0.0, "must be > 0")?;
        Ok(Self {
            g,
            eta,
            cooperativity: None,
            slab_parameter: None,
            kappa: eta * g,
        })
    }

    /// Doppler width in units of γ.
    pub fn doppler_width(&self) -> f64 {
        1.0 / ((2.0 * PI).sqrt() * self.g)
    }
}

/// Collects the dimensionless groups of a medium.
pub fn derive_groups(params: &MediumParameters) -> Result<DimensionlessGroups> {
    params.validate()?;
    let MediumParameters {
        atom_density: n,
        transition_wavelength: lambda,
        radiative_rate: gamma,
        doppler_width,
        sample_length: d,
        ..
    } = *params;
    // Δ_D = 0 is a homogeneously broadened line: g and κ are infinite.
    let g = gamma / ((2.0 * PI).sqrt() * doppler_width);
    let eta = n * lambda * lambda * d;
    Ok(DimensionlessGroups {
        g,
        eta,
        cooperativity: Some(n * lambda * lambda * lambda / (4.0 * PI * PI)),
        slab_parameter: Some(PI * d / lambda),
        kappa: eta * g,
    })
}

/// Free-space spontaneous emission rate `℘²ω³ / (3π ħ ε₀ c³)` of a transition
/// with dipole moment `dipole` (C m) at angular frequency `omega` (rad/s).
pub fn free_space_gamma(dipole: f64, omega: f64) -> Result<f64> {
    require("dipole", dipole, dipole >= 0.0, "must be >= 0")?;
    require("omega", omega, omega > 0.0, "must be > 0")?;
    Ok(dipole * dipole * omega.powi(3)
        / (3.0 * PI * HBAR * EPSILON_0 * SPEED_OF_LIGHT.powi(3)))
}

/// The same rate written with the wavelength, `8π²℘² / (3 ħ ε₀ λ³)`.
pub fn free_space_gamma_wavelength(dipole: f64, wavelength: f64) -> Result<f64> {
    require("dipole", dipole, dipole >= 0.0, "must be >= 0")?;
    require("wavelength", wavelength, wavelength > 0.0, "must be > 0")?;
    Ok(8.0 * PI * PI * dipole * dipole / (3.0 * HBAR * EPSILON_0 * wavelength.powi(3)))
}

/// Dipole moment that produces the radiative rate `gamma` at `omega`.
pub fn dipole_from_gamma(gamma: f64, omega: f64) -> Result<f64> {
    require("gamma", gamma, gamma >= 0.0, "must be >= 0")?;
    require("omega", omega, omega > 0.0, "must be > 0")?;
    Ok((3.0 * PI * HBAR * EPSILON_0 * SPEED_OF_LIGHT.powi(3) * gamma / omega.powi(3)).sqrt())
}

/// Tolerance used by [`AtomicState::check`].
pub const STATE_TOLERANCE: f64 = 1e-9;

/// Two-level density matrix. The ground population is not stored; it is
/// always `1 − ρ_aa`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomicState {
    rho_aa: f64,
    rho_ab: Complex64,
}

impl AtomicState {
    pub fn new(rho_aa: f64, rho_ab: Complex64) -> Result<Self> {
        let state = Self { rho_aa, rho_ab };
        state.check(STATE_TOLERANCE)?;
        Ok(state)
    }

    /// Incoherent state with no dipole coherence.
    pub fn populations(rho_aa: f64) -> Result<Self> {
        Self::new(rho_aa, Complex64::new(0.0, 0.0))
    }

    pub fn ground() -> Self {
        Self { rho_aa: 0.0, rho_ab: Complex64::new(0.0, 0.0) }
    }

    /// Skips validation; used by integrators that check invariants separately.
    pub(crate) fn unchecked(rho_aa: f64, rho_ab: Complex64) -> Self {
        Self { rho_aa, rho_ab }
    }

    pub fn rho_aa(&self) -> f64 {
        self.rho_aa
    }

    pub fn rho_bb(&self) -> f64 {
        1.0 - self.rho_aa
    }

    pub fn rho_ab(&self) -> Complex64 {
        self.rho_ab
    }

    /// Population difference `ρ_aa − ρ_bb`.
    pub fn inversion(&self) -> f64 {
        2.0 * self.rho_aa - 1.0
    }

    /// Validates population bounds and positivity `|ρ_ab|² ≤ ρ_aa ρ_bb`
    /// with tolerance `tol`.
    pub fn check(&self, tol: f64) -> Result<()> {
        let p = self.rho_aa;
        require("rho_aa", p, p >= -tol && p <= 1.0 + tol, "population outside [0, 1]")?;
        let coherence = self.rho_ab.norm_sqr();
        if !coherence.is_finite() {
            return Err(Error::InvalidParameter {
                name: "rho_ab",
                value: coherence,
                reason: "non-finite coherence",
            });
        }
        if coherence > p * (1.0 - p) + tol {
            return Err(Error::InvalidParameter {
                name: "rho_ab",
                value: coherence,
                reason: "violates |rho_ab|^2 <= rho_aa rho_bb",
            });
        }
        Ok(())
    }
}
