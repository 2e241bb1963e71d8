//! Decay of an initially excited Doppler-broadened two-level gas with the
//! collective rate recomputed from the current state.

use std::cell::RefCell;
use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{require, Error, Result};
use crate::medium::{AtomicState, DimensionlessGroups, STATE_TOLERANCE};
use crate::numerics::{gauss_weighted_integral, integrate_ode, OdeControl, QuadratureSpec};
use crate::rates::{escape_factor, small_sample_rate_averaged};

/// Populations below this are treated as fully decayed.
pub const TRUNCATION_FLOOR: f64 = 1e-12;

/// Γ(ω,t)/Γ(t) on a detuning grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSnapshot {
    pub time: f64,
    /// Grid in units of Δ_D.
    pub detuning_over_doppler: Vec<f64>,
    pub profile: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayTrajectory {
    /// Units of 1/γ.
    pub times: Vec<f64>,
    pub rho_aa: Vec<f64>,
    pub gamma_avg: Vec<f64>,
    pub gamma_eff: Vec<f64>,
    pub spectra: Vec<SpectrumSnapshot>,
    /// Set when Γ exceeded half the Doppler width at any accepted step.
    pub markov_violated: bool,
    pub max_gamma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayOptions {
    pub ode: OdeControl,
    pub quadrature: QuadratureSpec,
    /// Number of uniform output samples on `[0, t_end]`, both ends included.
    pub samples: usize,
    /// Detuning grid (units of Δ_D) for spectral snapshots.
    pub spectrum_grid: Vec<f64>,
}

impl Default for DecayOptions {
    fn default() -> Self {
        Self {
            ode: OdeControl { initial_step: 1e-4, max_step: 0.5, error_tol: 1e-10, max_steps: 1_000_000 },
            quadrature: QuadratureSpec::default(),
            samples: 201,
            spectrum_grid: uniform_grid(4.0, 161),
        }
    }
}

/// `points` values evenly spaced on `[−half_span, half_span]`.
pub fn uniform_grid(half_span: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![0.0];
    }
    let step = 2.0 * half_span / (points - 1) as f64;
    (0..points).map(|i| -half_span + step * i as f64).collect()
}

/// `dρ_aa/dt = Γ − (1 + 2Γ) ρ_aa`.
pub fn decay_rhs(rho_aa: f64, gamma: f64) -> f64 {
    gamma - (1.0 + 2.0 * gamma) * rho_aa
}

/// Integrates the population from `initial` to `t_end`.
///
/// Γ is recomputed from the state at every right-hand-side evaluation.
/// `spectrum_times` are snapped to the nearest output sample.
pub fn evolve_two_level(
    initial: &AtomicState,
    groups: &DimensionlessGroups,
    t_end: f64,
    options: &DecayOptions,
    spectrum_times: &[f64],
) -> Result<DecayTrajectory> {
    initial.check(STATE_TOLERANCE)?;
    require("t_end", t_end, t_end > 0.0, "must be > 0")?;
    if options.samples < 2 {
        return Err(Error::InvalidParameter { name: "samples", value: options.samples as f64, reason: "must be >= 2" });
    }
    let spec = options.quadrature;
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let rate = |rho: f64| -> f64 {
        let state = AtomicState::unchecked(rho.clamp(0.0, 1.0), Default::default());
        match small_sample_rate_averaged(&state, groups, &spec) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let markov_limit = 0.5 * groups.doppler_width();
    let mut max_gamma = rate(initial.rho_aa());
    let times: Vec<f64> = (0..options.samples)
        .map(|i| if i + 1 == options.samples { t_end } else { t_end * i as f64 / (options.samples - 1) as f64 })
        .collect();
    let traj = integrate_ode(
        |_, y, dy| dy[0] = decay_rhs(y[0], rate(y[0])),
        0.0,
        t_end,
        &[initial.rho_aa()],
        &options.ode,
        &times,
        |_, y| max_gamma = max_gamma.max(rate(y[0])),
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }

    let rho_aa: Vec<f64> = traj.states.iter().map(|s| s[0]).collect();
    for &p in &rho_aa {
        AtomicState::unchecked(p, Default::default()).check(STATE_TOLERANCE)?;
    }
    let gamma_avg = rho_aa
        .iter()
        .map(|&p| small_sample_rate_averaged(&AtomicState::unchecked(p.clamp(0.0, 1.0), Default::default()), groups, &spec))
        .collect::<Result<Vec<f64>>>()?;
    let gamma_eff = rho_aa
        .iter()
        .zip(&gamma_avg)
        .map(|(&p, &g)| if p < TRUNCATION_FLOOR { f64::NAN } else { -decay_rhs(p, g) / p })
        .collect();
    max_gamma = gamma_avg.iter().fold(max_gamma, |m, &g| m.max(g));
    let markov_violated = max_gamma > markov_limit;
    if markov_violated {
        log::warn!(
            "Markov approximation violated (superradiant regime): Γ = {max_gamma} γ exceeds half the Doppler width"
        );
    }

    let mut spectra = Vec::with_capacity(spectrum_times.len());
    for &ts in spectrum_times {
        require("spectrum time", ts, (0.0..=t_end).contains(&ts), "outside [0, t_end]")?;
        let k = ((ts / t_end) * (options.samples - 1) as f64).round() as usize;
        let state = AtomicState::unchecked(rho_aa[k].clamp(0.0, 1.0), Default::default());
        let mut snap = spectrum_snapshot(&state, groups, &options.spectrum_grid, &spec)?;
        snap.time = traj.times[k];
        spectra.push(snap);
    }

    Ok(DecayTrajectory {
        times: traj.times,
        rho_aa,
        gamma_avg,
        gamma_eff,
        spectra,
        markov_violated,
        max_gamma,
    })
}

/// Effective decay rate `Γ_eff = 1 + 2Γ − Γ/ρ_aa` at every sample.
pub fn effective_rate(trajectory: &DecayTrajectory) -> Result<Vec<f64>> {
    trajectory
        .rho_aa
        .iter()
        .zip(&trajectory.gamma_avg)
        .map(|(&p, &g)| {
            if p < TRUNCATION_FLOOR {
                Err(Error::Truncated { rho_aa: p })
            } else {
                Ok(1.0 + 2.0 * g - g / p)
            }
        })
        .collect()
}

/// Normalized spectral profile Γ(ω,t)/Γ(t) on `grid` (units of Δ_D). The
/// `ρ_aa` prefactor cancels, so the profile stays defined as `ρ_aa → 0`.
pub fn spectrum_snapshot(
    state: &AtomicState,
    groups: &DimensionlessGroups,
    grid: &[f64],
    spec: &QuadratureSpec,
) -> Result<SpectrumSnapshot> {
    let (lo, hi) = grid.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if lo > -4.0 || hi < 4.0 {
        log::warn!("spectrum grid [{lo}, {hi}] Δ_D does not span ±4 Δ_D");
    }
    let k = groups.kappa * (state.rho_bb() - state.rho_aa());
    let shape = |u: f64| u * escape_factor(k * u);
    let norm = gauss_weighted_integral(|y| shape((-y * y).exp()), spec)? / PI.sqrt();
    let profile = grid.par_iter().map(|&x| shape((-0.5 * x * x).exp()) / norm).collect();
    Ok(SpectrumSnapshot { time: 0.0, detuning_over_doppler: grid.to_vec(), profile })
}

/// Full width at half maximum of a sampled single-peaked profile, in the
/// grid's units, by linear interpolation.
pub fn profile_fwhm(grid: &[f64], profile: &[f64]) -> Option<f64> {
    let (imax, &peak) = profile.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    let half = 0.5 * peak;
    let left = (1..=imax).rev().find(|&i| profile[i - 1] < half).map(|i| {
        let (x0, x1, y0, y1) = (grid[i - 1], grid[i], profile[i - 1], profile[i]);
        x0 + (half - y0) * (x1 - x0) / (y1 - y0)
    })?;
    let right = (imax..profile.len() - 1).find(|&i| profile[i + 1] < half).map(|i| {
        let (x0, x1, y0, y1) = (grid[i], grid[i + 1], profile[i], profile[i + 1]);
        x0 + (half - y0) * (x1 - x0) / (y1 - y0)
    })?;
    Some(right - left)
}

/// FWHM of the Doppler profile `e^{−x²/2}` in units of Δ_D.
pub fn doppler_fwhm() -> f64 {
    2.0 * (2.0 * std::f64::consts::LN_2).sqrt()
}
