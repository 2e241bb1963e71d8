//! Collective decay/pump rate Γ and light shift H.
//!
//! Rates are in units of γ, detunings in γ, positions in units of the
//! sample depth `d`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{require, Error, Result};
use crate::medium::{AtomicState, DimensionlessGroups, Geometry};
use crate::numerics::{gauss_legendre, gauss_weighted_integral, integrate, principal_value_integral, QuadratureSpec};
use crate::response::{doppler_emission, LocalEmission};

/// Rates seen by a probe atom at one detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollectiveRates {
    pub detuning: f64,
    /// Γ(ω, t).
    pub gamma_spectral: f64,
    /// Γ(t), the velocity average.
    pub gamma_avg: f64,
    /// H(ω, t) in units of ħγ, when requested.
    pub shift: Option<f64>,
}

/// `(1 − e^{−x}) / x`, continuous through `x = 0`.
pub(crate) fn escape_factor(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 - x / 2.0 + x * x / 6.0
    } else {
        -(-x).exp_m1() / x
    }
}

/// `(e^{x} − 1) / x`, continuous through `x = 0`.
fn growth_factor(x: f64) -> f64 {
    escape_factor(-x)
}

/// Small-sample rate at detuning `detuning`:
/// `ρ_aa/(ρ_bb − ρ_aa) · [1 − exp(−K e^{−Δ²/2Δ_D²})]`, `K = κ(ρ_bb − ρ_aa)`.
pub fn small_sample_rate_spectral(state: &AtomicState, detuning: f64, groups: &DimensionlessGroups) -> f64 {
    let x = detuning / groups.doppler_width();
    let profile = (-0.5 * x * x).exp();
    spectral_from_profile(state, profile, groups.kappa)
}

// ρ_aa κ u · (1 − e^{−K u})/(K u), with u the line-shape factor.
fn spectral_from_profile(state: &AtomicState, profile: f64, kappa: f64) -> f64 {
    let k = kappa * (state.rho_bb() - state.rho_aa());
    state.rho_aa() * kappa * profile * escape_factor(k * profile)
}

/// Gaussian velocity average `∫ W(Δ) f(Δ) dΔ` of a function of detuning.
pub fn velocity_average(mut f: impl FnMut(f64) -> f64, groups: &DimensionlessGroups, spec: &QuadratureSpec) -> Result<f64> {
    let scale = 2f64.sqrt() * groups.doppler_width();
    Ok(gauss_weighted_integral(|y| f(scale * y), spec)? / PI.sqrt())
}

/// Velocity-averaged small-sample rate Γ(t).
pub fn small_sample_rate_averaged(state: &AtomicState, groups: &DimensionlessGroups, spec: &QuadratureSpec) -> Result<f64> {
    if state.rho_aa() == 0.0 || groups.kappa == 0.0 {
        return Ok(0.0);
    }
    let v = gauss_weighted_integral(|y| spectral_from_profile(state, (-y * y).exp(), groups.kappa), spec)?;
    Ok(v / PI.sqrt())
}

/// Trapping fraction `J(κ) = (1/√π) ∫ e^{−y²} (1 − e^{−κ e^{−y²}}) dy`: the
/// share of isotropically emitted line photons reabsorbed within depth
/// `κ` of ground-state medium.
pub fn trapping_fraction(kappa: f64, spec: &QuadratureSpec) -> Result<f64> {
    require("kappa", kappa, kappa >= 0.0, "must be >= 0")?;
    Ok(gauss_weighted_integral(|y| -(-kappa * (-y * y).exp()).exp_m1(), spec)? / PI.sqrt())
}

/// Angular and radial discretization of the medium around a probe atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeGrid {
    pub geometry: Geometry,
    /// Probe position in units of `d`. For the slab only `z` matters and
    /// the medium occupies `|z| ≤ 1`.
    pub probe: [f64; 3],
    /// Gauss–Legendre nodes in cos θ.
    pub polar_nodes: usize,
    pub azimuthal_nodes: usize,
    /// Uniform cells along each ray.
    pub radial_cells: usize,
    /// Slab only: longest path followed along grazing rays.
    pub lateral_extent: f64,
    /// Relative change tolerated when the grid is refined.
    pub tolerance: f64,
}

impl Default for VolumeGrid {
    fn default() -> Self {
        Self {
            geometry: Geometry::CylinderOnAxis,
            probe: [0.0; 3],
            polar_nodes: 64,
            azimuthal_nodes: 4,
            radial_cells: 64,
            lateral_extent: 50.0,
            tolerance: 1e-6,
        }
    }
}

impl VolumeGrid {
    pub fn validate(&self) -> Result<()> {
        let pos = |n: usize| n as f64;
        require("polar_nodes", pos(self.polar_nodes), self.polar_nodes >= 2, "must be >= 2")?;
        require("azimuthal_nodes", pos(self.azimuthal_nodes), self.azimuthal_nodes >= 1, "must be >= 1")?;
        require("radial_cells", pos(self.radial_cells), self.radial_cells >= 1, "must be >= 1")?;
        require("lateral_extent", self.lateral_extent, self.lateral_extent > 0.0, "must be > 0")?;
        require("tolerance", self.tolerance, self.tolerance > 0.0, "must be > 0")?;
        if self.geometry == Geometry::Slab {
            let z = self.probe[2];
            require("probe z", z, z.abs() < 1.0, "probe must lie inside the slab")?;
        }
        Ok(())
    }

    fn refined(&self) -> Self {
        Self { polar_nodes: 2 * self.polar_nodes, radial_cells: 2 * self.radial_cells, ..*self }
    }

    /// Unit direction, solid-angle weight (summing to 1) and path length.
    fn rays(&self) -> Vec<([f64; 3], f64, f64)> {
        // (μ range, length(μ)) panels; slab panels split where the cap starts
        let mut panels: Vec<(f64, f64)> = Vec::new();
        match self.geometry {
            Geometry::CylinderOnAxis => panels.push((-1.0, 1.0)),
            Geometry::Slab => {
                let z = self.probe[2];
                let up = ((1.0 - z) / self.lateral_extent).min(1.0);
                let down = ((1.0 + z) / self.lateral_extent).min(1.0);
                panels.extend([(-1.0, -down), (-down, 0.0), (0.0, up), (up, 1.0)]);
            }
        }
        panels.retain(|(a, b)| b > a);
        let per_panel = (self.polar_nodes / panels.len()).max(2);
        let rule = gauss_legendre(per_panel);
        let mut rays = Vec::with_capacity(panels.len() * per_panel * self.azimuthal_nodes);
        for (a, b) in panels {
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            for (&t, &wt) in rule.nodes.iter().zip(&rule.weights) {
                let mu = mid + half * t;
                let sin = (1.0 - mu * mu).max(0.0).sqrt();
                let length = match self.geometry {
                    Geometry::CylinderOnAxis => 1.0,
                    Geometry::Slab => {
                        let z = self.probe[2];
                        let to_face = if mu > 0.0 { (1.0 - z) / mu } else { (1.0 + z) / -mu };
                        to_face.min(self.lateral_extent)
                    }
                };
                for k in 0..self.azimuthal_nodes {
                    let phi = 2.0 * PI * (k as f64 + 0.5) / self.azimuthal_nodes as f64;
                    let dir = [sin * phi.cos(), sin * phi.sin(), mu];
                    let weight = 0.5 * half * wt / self.azimuthal_nodes as f64;
                    rays.push((dir, weight, length));
                }
            }
        }
        rays
    }
}

fn ray_point(grid: &VolumeGrid, dir: [f64; 3], s: f64) -> [f64; 3] {
    [grid.probe[0] + s * dir[0], grid.probe[1] + s * dir[1], grid.probe[2] + s * dir[2]]
}

fn rate_on_grid(field: &(impl Fn([f64; 3]) -> LocalEmission + Sync), grid: &VolumeGrid) -> f64 {
    grid.rays()
        .iter()
        .map(|&(dir, weight, length)| {
            let h = length / grid.radial_cells as f64;
            let mut tau = 0.0f64;
            let mut total = 0.0;
            for c in 0..grid.radial_cells {
                let e = field(ray_point(grid, dir, (c as f64 + 0.5) * h));
                total += e.source * tau.exp() * h * growth_factor(e.gain * h);
                tau += e.gain * h;
            }
            weight * total
        })
        .sum()
}

fn converged(coarse: f64, fine: f64, tol: f64, what: &str) -> Result<f64> {
    if (fine - coarse).abs() > tol * fine.abs().max(1e-300) && (fine - coarse).abs() > 1e-300 {
        return Err(Error::GridTooCoarse(format!(
            "{what}: {coarse} vs {fine} after refinement"
        )));
    }
    Ok(fine)
}

/// Γ(ω, t) for an arbitrary medium: `Σ_rays ∫ source · exp(∫ gain) ds`
/// along every line of sight from the probe. `field` returns gain and
/// source per depth at a point (units of `d`) for the probe frequency of
/// interest. Gain and source are taken constant within each cell and the
/// cell integral is done exactly.
pub fn general_rate_spectral(field: impl Fn([f64; 3]) -> LocalEmission + Sync, grid: &VolumeGrid) -> Result<f64> {
    grid.validate()?;
    let coarse = rate_on_grid(&field, grid);
    let fine = rate_on_grid(&field, &grid.refined());
    converged(coarse, fine, grid.tolerance, "collective rate volume integral")
}

/// Doppler-gas Γ(ω, t) for a spatially varying excitation `rho_aa(position)`.
pub fn doppler_rate_spectral(
    rho_aa: impl Fn([f64; 3]) -> f64 + Sync,
    detuning: f64,
    groups: &DimensionlessGroups,
    grid: &VolumeGrid,
) -> Result<f64> {
    general_rate_spectral(
        |p| doppler_emission(&AtomicState::unchecked(rho_aa(p).clamp(0.0, 1.0), Default::default()), detuning, groups),
        grid,
    )
}

/// Linear-limit rate `Γ = ∫ d³r G(r₀, r) ρ_aa(r)` with the Doppler kernel of
/// ground-state medium of line-center opacity `κ` per depth `d`.
pub fn linear_limit_rate(
    excitation: impl Fn([f64; 3]) -> f64 + Sync,
    groups: &DimensionlessGroups,
    grid: &VolumeGrid,
    spec: &QuadratureSpec,
) -> Result<f64> {
    grid.validate()?;
    let kappa = groups.kappa;
    let on_grid = |grid: &VolumeGrid| -> Result<f64> {
        let rays = grid.rays();
        // excitation sampled once per cell
        let samples: Vec<(f64, f64, Vec<f64>)> = rays
            .iter()
            .map(|&(dir, weight, length)| {
                let h = length / grid.radial_cells as f64;
                let cells = (0..grid.radial_cells).map(|c| excitation(ray_point(grid, dir, (c as f64 + 0.5) * h))).collect();
                (weight, h, cells)
            })
            .collect();
        let avg = gauss_weighted_integral(
            |x| {
                let k = kappa * (-x * x).exp();
                samples
                    .iter()
                    .map(|(weight, h, cells)| {
                        // ∫ k e^{−ks} ds over each cell
                        weight
                            * cells
                                .iter()
                                .enumerate()
                                .map(|(c, rho)| rho * (-k * c as f64 * h).exp() * -(-k * h).exp_m1())
                                .sum::<f64>()
                    })
                    .sum()
            },
            spec,
        )?;
        Ok(avg / PI.sqrt())
    };
    let coarse = on_grid(grid)?;
    let fine = on_grid(&grid.refined())?;
    converged(coarse, fine, grid.tolerance, "linear-limit volume integral")
}

/// Collective light shift `H(ω) = (1/2π) P∫ Γ(ω′)/(ω − ω′) dω′` (units of
/// ħγ) for a rate profile supported on `[lo, hi]`.
pub fn collective_shift(
    profile: impl Fn(f64) -> f64,
    omega: f64,
    lo: f64,
    hi: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    let pv = if lo < omega && omega < hi {
        principal_value_integral(&profile, omega, lo, hi, abs_tol, rel_tol)?
    } else {
        integrate(|x| profile(x) / (omega - x), lo, hi, abs_tol, rel_tol)?
    };
    Ok(pv / (2.0 * PI))
}

/// Frequency grid for light-shift spectra, uniform in Δ/Δ_D.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftGrid {
    pub half_span: f64,
    pub points: usize,
}

impl Default for ShiftGrid {
    fn default() -> Self {
        Self { half_span: 8.0, points: 513 }
    }
}

impl ShiftGrid {
    /// Grid detunings in units of γ.
    pub fn detunings(&self, groups: &DimensionlessGroups) -> Vec<f64> {
        let dd = groups.doppler_width();
        if self.points < 2 {
            return vec![0.0];
        }
        let step = 2.0 * self.half_span / (self.points - 1) as f64;
        (0..self.points).map(|i| (-self.half_span + step * i as f64) * dd).collect()
    }
}

/// H on a [`ShiftGrid`]. The transform is taken over the grid span widened
/// by one grid step so that the end points are interior poles.
pub fn shift_spectrum(
    profile: impl Fn(f64) -> f64 + Sync,
    groups: &DimensionlessGroups,
    grid: &ShiftGrid,
) -> Result<Vec<(f64, f64)>> {
    if grid.half_span < 8.0 {
        log::warn!("light-shift grid spans only ±{} Δ_D; ±8 Δ_D recommended", grid.half_span);
    }
    let dd = groups.doppler_width();
    let step = if grid.points > 1 { 2.0 * grid.half_span / (grid.points - 1) as f64 } else { 1.0 };
    let edge = (grid.half_span + step) * dd;
    grid.detunings(groups)
        .par_iter()
        .map(|&w| Ok((w, collective_shift(&profile, w, -edge, edge, 1e-14, 1e-10)?)))
        .collect()
}

/// Spectral and averaged small-sample rates, optionally with the light shift.
pub fn collective_rates(
    state: &AtomicState,
    detuning: f64,
    groups: &DimensionlessGroups,
    spec: &QuadratureSpec,
    with_shift: bool,
) -> Result<CollectiveRates> {
    let shift = if with_shift {
        let edge = 9.0 * groups.doppler_width();
        Some(collective_shift(|w| small_sample_rate_spectral(state, w, groups), detuning, -edge, edge, 1e-14, 1e-10)?)
    } else {
        None
    };
    Ok(CollectiveRates {
        detuning,
        gamma_spectral: small_sample_rate_spectral(state, detuning, groups),
        gamma_avg: small_sample_rate_averaged(state, groups, spec)?,
        shift,
    })
}
