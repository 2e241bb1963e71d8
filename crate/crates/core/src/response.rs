//! Medium response, source spectrum and propagation coefficient.
//!
//! Reduced conventions: the response `χ = (ħ/3ε₀) P^ret` is dimensionless
//! and the source `σ = (ħ/3ε₀) P^s` has units of 1/γ. With the dipole moment
//! eliminated through the free-space rate, the common prefactor `℘²N/ħ²`
//! becomes `C/2` in these units. The propagation coefficient is
//! `q₀ = k (1 + iχ)` with `k = 2π` per wavelength.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicBool, Ordering};

use num_complex::Complex64;

use crate::error::{require, Error, Result};
use crate::medium::{AtomicState, DimensionlessGroups};
use crate::numerics::erf;

/// Response and source at one probe frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseFunctions {
    /// Reduced response χ.
    pub p_ret: Complex64,
    /// Reduced source σ, never negative.
    pub p_s: f64,
    /// Detuning from the rest-frame resonance, units of γ.
    pub frequency: f64,
}

/// `q₀ = q₀′ + i q₀″` in units of 1/λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationCoefficient {
    pub q0_prime: f64,
    /// Gain (> 0) or absorption (< 0) per wavelength.
    pub q0_double_prime: f64,
}

impl PropagationCoefficient {
    pub fn from_response(chi: Complex64) -> Self {
        warn_large_imaginary(chi);
        let k = 2.0 * PI;
        Self { q0_prime: k * (1.0 - chi.im), q0_double_prime: k * chi.re }
    }

    /// Intensity exponent `2 q₀″ d` across a depth given in wavelengths.
    pub fn opacity_exponent(&self, depth: f64) -> f64 {
        2.0 * self.q0_double_prime * depth
    }
}

/// Gain and source per unit sample depth `d`, the two numbers the rate
/// integrals need at each point of the medium.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LocalEmission {
    /// `2 q₀″ d`.
    pub gain: f64,
    /// Spontaneous source per unit depth; a homogeneous ray of unit depth
    /// with zero gain yields this rate (in γ).
    pub source: f64,
}

impl LocalEmission {
    /// Converts a reduced response and source at a medium of depth `d`
    /// (in wavelengths).
    pub fn from_response(response: &ResponseFunctions, depth: f64) -> Self {
        Self {
            gain: 4.0 * PI * response.p_ret.re * depth,
            source: 2.0 * PI * response.p_s * depth,
        }
    }
}

static WARNED_IMAGINARY: AtomicBool = AtomicBool::new(false);
static WARNED_DOPPLER: AtomicBool = AtomicBool::new(false);

fn warn_large_imaginary(chi: Complex64) {
    if chi.im.abs() >= 1.0 && !WARNED_IMAGINARY.swap(true, Ordering::Relaxed) {
        log::warn!("|Im χ| = {} ≥ 1: the propagation coefficient expansion is outside its range", chi.im.abs());
    }
}

/// True when the Doppler width exceeds ten times the homogeneous width
/// `gamma_ab`.
pub fn strong_doppler_valid(groups: &DimensionlessGroups, gamma_ab: f64) -> bool {
    groups.doppler_width() >= 10.0 * gamma_ab
}

fn check_doppler(groups: &DimensionlessGroups) {
    // natural homogeneous width γ/2
    if !strong_doppler_valid(groups, 0.5) && !WARNED_DOPPLER.swap(true, Ordering::Relaxed) {
        log::warn!(
            "Doppler width {} γ is below 10 Γ_ab: strong-Doppler forms are inaccurate",
            groups.doppler_width()
        );
    }
}

fn gaussian_profile(detuning: f64, groups: &DimensionlessGroups) -> f64 {
    let x = detuning / groups.doppler_width();
    (-0.5 * x * x).exp()
}

fn cooperativity(groups: &DimensionlessGroups) -> Result<f64> {
    groups.cooperativity.ok_or(Error::InvalidParameter {
        name: "cooperativity",
        value: f64::NAN,
        reason: "absolute response needs the wavelength scale (N λ³)",
    })
}

/// Strong-Doppler response χ at detuning `detuning` (units of γ).
pub fn doppler_response(state: &AtomicState, detuning: f64, groups: &DimensionlessGroups) -> Result<Complex64> {
    check_doppler(groups);
    let c = cooperativity(groups)?;
    let dd = groups.doppler_width();
    let re = PI * c * groups.g * state.inversion() * gaussian_profile(detuning, groups);
    // √(2/π) ∫₀^a e^{−y²/2} dy = erf(a/√2)
    let dispersion = erf(detuning / (dd * 2f64.sqrt()));
    Ok(Complex64::new(re, -re * dispersion))
}

/// Strong-Doppler source σ.
pub fn doppler_source(state: &AtomicState, detuning: f64, groups: &DimensionlessGroups) -> Result<f64> {
    check_doppler(groups);
    let c = cooperativity(groups)?;
    Ok(2.0 * PI * c * groups.g * state.rho_aa() * gaussian_profile(detuning, groups))
}

pub fn doppler_response_functions(
    state: &AtomicState,
    detuning: f64,
    groups: &DimensionlessGroups,
) -> Result<ResponseFunctions> {
    Ok(ResponseFunctions {
        p_ret: doppler_response(state, detuning, groups)?,
        p_s: doppler_source(state, detuning, groups)?,
        frequency: detuning,
    })
}

pub fn doppler_absorption_coefficient(
    state: &AtomicState,
    detuning: f64,
    groups: &DimensionlessGroups,
) -> Result<PropagationCoefficient> {
    Ok(PropagationCoefficient::from_response(doppler_response(state, detuning, groups)?))
}

/// Doppler gain and source per depth `d`: `κ w e^{−Δ²/2Δ_D²}` and
/// `κ ρ_aa e^{−Δ²/2Δ_D²}`. Needs only the opacity `κ`.
pub fn doppler_emission(state: &AtomicState, detuning: f64, groups: &DimensionlessGroups) -> LocalEmission {
    check_doppler(groups);
    let profile = groups.kappa * gaussian_profile(detuning, groups);
    LocalEmission { gain: profile * state.inversion(), source: profile * state.rho_aa() }
}

fn check_gamma_ab(gamma_ab: f64) -> Result<()> {
    require("gamma_ab", gamma_ab, gamma_ab > 0.0, "must be > 0")
}

/// Driven-medium response at resonance; `local_rabi_sq` is `|Ω_L|²`.
pub fn driven_response_resonance(
    state: &AtomicState,
    local_rabi_sq: f64,
    gamma_ab: f64,
    cooperativity: f64,
) -> Result<Complex64> {
    check_gamma_ab(gamma_ab)?;
    let re = 0.5 * cooperativity * gamma_ab * state.inversion() / (gamma_ab * gamma_ab + 2.0 * local_rabi_sq);
    Ok(Complex64::new(re, 0.0))
}

/// `[Γ_ab²(ρ_aa − |ρ_ab|²) + 2|Ω_L|² ρ_aa ρ_bb] / [Γ_ab (Γ_ab² + 2|Ω_L|²)]`,
/// the driven source per unit cooperativity.
pub fn driven_source_factor(state: &AtomicState, local_rabi_sq: f64, gamma_ab: f64) -> Result<f64> {
    check_gamma_ab(gamma_ab)?;
    let g2 = gamma_ab * gamma_ab;
    let num = g2 * (state.rho_aa() - state.rho_ab().norm_sqr()) + 2.0 * local_rabi_sq * state.rho_aa() * state.rho_bb();
    Ok((num / (gamma_ab * (g2 + 2.0 * local_rabi_sq))).max(0.0))
}

/// Driven-medium source σ at resonance.
pub fn driven_source_resonance(
    state: &AtomicState,
    local_rabi_sq: f64,
    gamma_ab: f64,
    cooperativity: f64,
) -> Result<f64> {
    Ok(cooperativity * driven_source_factor(state, local_rabi_sq, gamma_ab)?)
}

pub fn driven_absorption_coefficient(
    state: &AtomicState,
    local_rabi_sq: f64,
    gamma_ab: f64,
    cooperativity: f64,
) -> Result<PropagationCoefficient> {
    Ok(PropagationCoefficient::from_response(driven_response_resonance(
        state,
        local_rabi_sq,
        gamma_ab,
        cooperativity,
    )?))
}

/// Driven gain and source per depth for a slab parameter `r = πd/λ`:
/// `2Cr Γ_ab w / (Γ_ab² + 2|Ω_L|²)` and `2Cr` times the source factor.
pub fn driven_emission(
    state: &AtomicState,
    local_rabi_sq: f64,
    gamma_ab: f64,
    cooperativity: f64,
    slab_parameter: f64,
) -> Result<LocalEmission> {
    check_gamma_ab(gamma_ab)?;
    let cr2 = 2.0 * cooperativity * slab_parameter;
    Ok(LocalEmission {
        gain: cr2 * gamma_ab * state.inversion() / (gamma_ab * gamma_ab + 2.0 * local_rabi_sq),
        source: cr2 * driven_source_factor(state, local_rabi_sq, gamma_ab)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate, principal_value_integral};
    use proptest::prelude::*;

    fn groups(g: f64, c: f64) -> DimensionlessGroups {
        DimensionlessGroups { cooperativity: Some(c), ..DimensionlessGroups::from_opacity(100.0, g).unwrap() }
    }

    fn state(p: f64) -> AtomicState {
        AtomicState::populations(p).unwrap()
    }

    #[test]
    fn balanced_populations_have_no_response() {
        let g = groups(0.01, 0.3);
        for d in [-50.0, 0.0, 12.0] {
            assert_eq!(doppler_response(&state(0.5), d, &g).unwrap(), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn line_center_response_is_real() {
        let chi = doppler_response(&state(0.1), 0.0, &groups(0.01, 0.3)).unwrap();
        assert_eq!(chi.im, 0.0);
        assert!(chi.re < 0.0);
    }

    #[test]
    fn response_one_doppler_width_off() {
        let g = groups(0.01, 0.3);
        let dd = g.doppler_width();
        let peak = doppler_response(&state(0.0), 0.0, &g).unwrap();
        let off = doppler_response(&state(0.0), dd, &g).unwrap();
        assert!((off.re / peak.re - (-0.5f64).exp()).abs() < 1e-14);
        // dispersion factor erf(1/√2) from the direct integral
        let direct = (2.0 / PI).sqrt() * integrate(|y| (-0.5 * y * y).exp(), 0.0, 1.0, 1e-15, 1e-14).unwrap();
        assert!((direct - 0.682_689_492_137_085_9).abs() < 1e-12);
        assert!((off.im / off.re + direct).abs() < 1e-12);
    }

    // Brute-force average of w/(Γ_ab + iδ) and 2ρ_aa Γ_ab/(Γ_ab² + δ²) over
    // the Gaussian velocity distribution, narrow homogeneous line.
    fn velocity_average_real(detuning: f64, dd: f64, gamma_ab: f64) -> (f64, f64) {
        let w = |x: f64| (-x * x / (2.0 * dd * dd)).exp() / ((2.0 * PI).sqrt() * dd);
        let lorentz = |x: f64| gamma_ab / (gamma_ab * gamma_ab + (detuning - x).powi(2));
        let mut total = 0.0;
        let edges = [-12.0 * dd, detuning - 50.0 * gamma_ab, detuning + 50.0 * gamma_ab, 12.0 * dd];
        for k in 0..3 {
            total += integrate(|x| w(x) * lorentz(x), edges[k], edges[k + 1], 1e-15, 1e-12).unwrap();
        }
        let disp = principal_value_integral(w, detuning, -12.0 * dd, 12.0 * dd, 1e-15, 1e-12).unwrap();
        (total, disp)
    }

    fn shape_error(ratio: f64, x: f64) -> f64 {
        // Δ_D = ratio · Γ_ab with Γ_ab = 1/2
        let dd = 0.5 * ratio;
        let g = groups(1.0 / ((2.0 * PI).sqrt() * dd), 1.0);
        let (peak, _) = velocity_average_real(0.0, dd, 0.5);
        let (avg, _) = velocity_average_real(x * dd, dd, 0.5);
        let closed = doppler_source(&state(1.0), x * dd, &g).unwrap() / doppler_source(&state(1.0), 0.0, &g).unwrap();
        let re = doppler_response(&state(0.0), x * dd, &g).unwrap().re / doppler_response(&state(0.0), 0.0, &g).unwrap().re;
        assert_eq!(closed, re);
        (avg / peak) / closed - 1.0
    }

    #[test]
    fn closed_form_shape_matches_velocity_average() {
        for x in [0.3, 0.8, 1.2] {
            assert!(shape_error(100.0, x).abs() < 0.01, "x = {x}");
        }
        // Lorentz wings of the homogeneous line take over further out
        for x in [1.5, 2.0] {
            assert!(shape_error(400.0, x).abs() < 0.01, "x = {x}");
        }
    }

    #[test]
    fn source_profile() {
        let g = groups(0.02, 0.5);
        assert_eq!(doppler_source(&state(0.0), 3.0, &g).unwrap(), 0.0);
        let s0 = doppler_source(&state(0.7), 0.0, &g).unwrap();
        let s1 = doppler_source(&state(0.7), g.doppler_width(), &g).unwrap();
        assert!((s1 / s0 - (-0.5f64).exp()).abs() < 1e-14);
        for d in [-3.0, -0.1, 0.1, 5.0] {
            assert!(doppler_source(&state(0.7), d, &g).unwrap() < s0);
        }
    }

    #[test]
    fn absorption_sign_and_opacity() {
        let g = groups(0.01, 0.25);
        let ground = doppler_absorption_coefficient(&AtomicState::ground(), 0.0, &g).unwrap();
        let inverted = doppler_absorption_coefficient(&state(1.0), 0.0, &g).unwrap();
        assert!(ground.q0_double_prime < 0.0 && inverted.q0_double_prime > 0.0);
        // depth in wavelengths from η = N λ² d = 4π C d/λ
        let depth = g.eta / (4.0 * PI * PI * 0.25);
        let opacity = -ground.opacity_exponent(depth);
        assert!((opacity - g.kappa).abs() < 1e-12 * g.kappa);
        let e = doppler_emission(&AtomicState::ground(), 0.0, &g);
        assert!((e.gain + g.kappa).abs() < 1e-12);
        let from = LocalEmission::from_response(&doppler_response_functions(&state(0.3), 7.0, &g).unwrap(), depth);
        let direct = doppler_emission(&state(0.3), 7.0, &g);
        assert!((from.gain - direct.gain).abs() < 1e-12 && (from.source - direct.source).abs() < 1e-12);
    }

    #[test]
    fn driven_limits() {
        let s = AtomicState::new(0.2, Complex64::new(0.1, -0.2)).unwrap();
        let weak = driven_source_resonance(&AtomicState::populations(0.3).unwrap(), 0.0, 0.7, 2.0).unwrap();
        assert!((weak - 2.0 * 0.3 / 0.7).abs() < 1e-14);
        assert_eq!(driven_response_resonance(&state(0.5), 3.0, 0.7, 2.0).unwrap().re, 0.0);
        // saturation: Ω_L → ∞
        let big = 1e12;
        let chi = driven_response_resonance(&s, big, 0.7, 2.0).unwrap();
        assert!(chi.re.abs() < 1e-11);
        let sat = driven_source_resonance(&s, big, 0.7, 2.0).unwrap();
        assert!((sat - 2.0 * 0.2 * 0.8 / 0.7).abs() < 1e-10);
        assert!(driven_source_resonance(&s, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn driven_absorption_saturates() {
        let gab = 0.9;
        let q = |om2: f64| driven_absorption_coefficient(&AtomicState::ground(), om2, gab, 3.0).unwrap().q0_double_prime;
        let unsat = q(0.0);
        assert!(unsat < 0.0);
        assert!((q(gab * gab) / unsat - 1.0 / 3.0).abs() < 1e-14);
        let mut prev = unsat.abs();
        for k in 1..50 {
            let v = q(0.1 * k as f64).abs();
            assert!(v < prev);
            prev = v;
        }
        assert_eq!(driven_absorption_coefficient(&state(0.5), 1.0, gab, 3.0).unwrap().q0_double_prime, 0.0);
    }

    #[test]
    fn driven_emission_matches_response() {
        let s = AtomicState::new(0.3, Complex64::new(0.05, 0.2)).unwrap();
        let (c, r, om2, gab) = (4.0, 7.0, 0.8, 1.3);
        let resp = ResponseFunctions {
            p_ret: driven_response_resonance(&s, om2, gab, c).unwrap(),
            p_s: driven_source_resonance(&s, om2, gab, c).unwrap(),
            frequency: 0.0,
        };
        let a = LocalEmission::from_response(&resp, r / PI);
        let b = driven_emission(&s, om2, gab, c, r).unwrap();
        assert!((a.gain - b.gain).abs() < 1e-12 && (a.source - b.source).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn driven_source_nonnegative(p in 0.0f64..1.0, phase in 0.0f64..6.3, frac in 0.0f64..1.0, om2 in 0.0f64..100.0, gab in 0.01f64..10.0) {
            let amp = (p * (1.0 - p)).sqrt() * frac;
            let s = AtomicState::new(p, Complex64::from_polar(amp, phase)).unwrap();
            prop_assert!(driven_source_resonance(&s, om2, gab, 1.0).unwrap() >= 0.0);
        }

        #[test]
        fn gain_sign_follows_inversion(p in 0.0f64..1.0, om2 in 0.0f64..100.0, gab in 0.01f64..10.0, d in -100.0f64..100.0) {
            prop_assume!((p - 0.5).abs() > 1e-9);
            let s = state(p);
            let want = (p - 0.5).signum();
            let g = groups(0.01, 1.0);
            prop_assert_eq!(doppler_absorption_coefficient(&s, d, &g).unwrap().q0_double_prime.signum(), want);
            prop_assert_eq!(driven_absorption_coefficient(&s, om2, gab, 1.0).unwrap().q0_double_prime.signum(), want);
        }
    }
}
