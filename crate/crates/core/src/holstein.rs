//! Linear radiation trapping: Doppler-line Holstein kernel, slab
//! discretization, escape rate of the fundamental mode.
//!
//! Lengths are in units of the sample depth `d`; `κ` is the line-center
//! opacity per depth `d`.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{require, Error, Result};
use crate::medium::Geometry;
use crate::numerics::{dominant_eigenpair, exponential_integral, gauss_weighted_integral, integrate_ode, OdeControl, QuadratureSpec};

const KERNEL_QUADRATURE: QuadratureSpec = QuadratureSpec { node_count: 64, absolute_tol: 1e-14, relative_tol: 1e-10 };

/// Eigen-iteration tolerance.
pub const EIGEN_TOLERANCE: f64 = 1e-10;
const EIGEN_MAX_ITER: usize = 2_000_000;

/// Discretized trapping operator `(Gρ)_i = Σ_j G_ij ρ_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrappingKernel {
    pub geometry: Geometry,
    /// Cell centers.
    pub nodes: Vec<f64>,
    /// Cell widths.
    pub weights: Vec<f64>,
    /// Rows include the cell widths: `G_ij` is the probability that a photon
    /// emitted in cell `j` is absorbed by an atom at node `i`, per unit
    /// excitation.
    pub matrix: Vec<Vec<f64>>,
    pub kappa: f64,
}

impl TrappingKernel {
    pub fn row_sums(&self) -> Vec<f64> {
        self.matrix.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn apply(&self, field: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(&self.matrix) {
            *o = row.iter().zip(field).map(|(a, b)| a * b).sum();
        }
    }

    /// Writes `i,j,z_i,z_j,G_ij` rows.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "i,j,z_i,z_j,G")?;
        for (i, row) in self.matrix.iter().enumerate() {
            for (j, g) in row.iter().enumerate() {
                writeln!(out, "{i},{j},{},{},{}", self.nodes[i], self.nodes[j], g)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EscapeRateResult {
    /// `1 − λ_max`, units of γ.
    pub gamma_esc_numeric: f64,
    /// `1/(κ √(π ln κ))`; only defined for `κ > 1`.
    pub gamma_esc_asymptotic: Option<f64>,
    pub lambda_max: f64,
    /// Unit-norm, positive.
    pub fundamental_mode: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldTrajectory {
    pub times: Vec<f64>,
    pub fields: Vec<Vec<f64>>,
    /// `−d ln(Σρ)/dt` from the right-hand side.
    pub decay_rate: Vec<f64>,
}

fn doppler_average(f: impl FnMut(f64) -> f64) -> Result<f64> {
    Ok(gauss_weighted_integral(f, &KERNEL_QUADRATURE)? / PI.sqrt())
}

/// Point kernel `G(r) = ⟨k/(4πr²) e^{−kr}⟩`, `k = K₀ e^{−x²}`, averaged over
/// the Doppler line.
pub fn kernel_point(r: f64, k0: f64) -> Result<f64> {
    require("r", r, r > 0.0, "must be > 0")?;
    require("K0", k0, k0 > 0.0, "must be > 0")?;
    doppler_average(|x| {
        let k = k0 * (-x * x).exp();
        k * (-k * r).exp()
    })
    .map(|v| v / (4.0 * PI * r * r))
}

/// `∫₀^R 4πr² G(r) dr = ⟨1 − e^{−kR}⟩`.
pub fn radial_capture(radius: f64, k0: f64) -> Result<f64> {
    require("radius", radius, radius >= 0.0, "must be >= 0")?;
    require("K0", k0, k0 > 0.0, "must be > 0")?;
    doppler_average(|x| -(-k0 * (-x * x).exp() * radius).exp_m1())
}

/// Capture for a single frequency at the line center, `1 − e^{−K₀R}`.
pub fn radial_capture_monochromatic(radius: f64, k0: f64) -> f64 {
    -(-k0 * radius).exp_m1()
}

/// Asymptotic escape rate `1/(κ √(π ln κ))` for `κ > 1`.
pub fn asymptotic_escape_rate(kappa: f64) -> Result<f64> {
    if !(kappa > 1.0) || !kappa.is_finite() {
        return Err(Error::Domain { function: "asymptotic escape rate (needs κ > 1)", value: kappa });
    }
    Ok(1.0 / (kappa * (PI * kappa.ln()).sqrt()))
}

fn e2(x: f64) -> Result<f64> {
    exponential_integral(2, x)
}

/// Slab `|z| ≤ half_thickness` cut into `node_count` equal cells. Entry
/// `G_ij` is the plane kernel `⟨(k/2) E₁(k|z_i − z′|)⟩` integrated exactly
/// over cell `j`, which gives differences of `E₂`; the diagonal cell
/// carries the logarithmic singularity as `1 − ⟨E₂(kh/2)⟩`.
pub fn build_slab_kernel(half_thickness: f64, kappa: f64, node_count: usize) -> Result<TrappingKernel> {
    require("half_thickness", half_thickness, half_thickness > 0.0, "must be > 0")?;
    require("kappa", kappa, kappa >= 0.0, "must be >= 0")?;
    if node_count < 32 {
        return Err(Error::InvalidParameter { name: "node_count", value: node_count as f64, reason: "must be >= 32" });
    }
    let n = node_count;
    let h = 2.0 * half_thickness / n as f64;
    let nodes: Vec<f64> = (0..n).map(|i| -half_thickness + (i as f64 + 0.5) * h).collect();
    // Toeplitz: one value per offset
    let band: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|m| -> Result<f64> {
            if kappa == 0.0 {
                return Ok(0.0);
            }
            if m == 0 {
                return doppler_average(|x| 1.0 - e2(kappa * (-x * x).exp() * 0.5 * h).unwrap_or(1.0));
            }
            let near = (m as f64 - 0.5) * h;
            let far = (m as f64 + 0.5) * h;
            doppler_average(|x| {
                let k = kappa * (-x * x).exp();
                let a = e2(k * near).unwrap_or(0.0);
                let b = e2(k * far).unwrap_or(0.0);
                0.5 * (a - b)
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    let matrix = (0..n).map(|i| (0..n).map(|j| band[i.abs_diff(j)]).collect()).collect();
    Ok(TrappingKernel { geometry: Geometry::Slab, nodes, weights: vec![h; n], matrix, kappa })
}

/// Dominant eigenvalue of the kernel and the escape rate `1 − λ_max`.
///
/// The slab kernel is centrosymmetric and its Perron vector is even, so the
/// iteration runs on the even half `G_ij + G_i,n−1−j` (odd `n` keeps the
/// central node once).
pub fn escape_rate(kernel: &TrappingKernel) -> Result<EscapeRateResult> {
    let n = kernel.matrix.len();
    let half = n.div_ceil(2);
    let folded: Vec<Vec<f64>> = (0..half)
        .map(|i| {
            (0..half)
                .map(|j| {
                    let mirror = n - 1 - j;
                    if mirror == j {
                        kernel.matrix[i][j]
                    } else {
                        kernel.matrix[i][j] + kernel.matrix[i][mirror]
                    }
                })
                .collect()
        })
        .collect();
    let pair = dominant_eigenpair(&folded, EIGEN_TOLERANCE, EIGEN_MAX_ITER)?;
    let mut mode: Vec<f64> = (0..n).map(|i| pair.vector[i.min(n - 1 - i)]).collect();
    let norm = mode.iter().map(|v| v * v).sum::<f64>().sqrt();
    let sign = if mode.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    mode.iter_mut().for_each(|v| *v *= sign / norm);
    Ok(EscapeRateResult {
        gamma_esc_numeric: 1.0 - pair.value,
        gamma_esc_asymptotic: asymptotic_escape_rate(kernel.kappa).ok(),
        lambda_max: pair.value,
        fundamental_mode: mode,
    })
}

/// Integrates `dρ/dt = −ρ + Gρ` and samples at `sample_times`.
pub fn evolve_linear_trapping(
    kernel: &TrappingKernel,
    initial: &[f64],
    t_end: f64,
    sample_times: &[f64],
    control: &OdeControl,
) -> Result<FieldTrajectory> {
    if initial.len() != kernel.nodes.len() {
        return Err(Error::InvalidParameter { name: "initial", value: initial.len() as f64, reason: "length must match the kernel" });
    }
    if initial.iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::InvalidParameter { name: "initial", value: f64::NAN, reason: "excitation must be >= 0" });
    }
    let n = initial.len();
    let mut scratch = vec![0.0; n];
    let traj = integrate_ode(
        |_, y, dy| {
            kernel.apply(y, &mut scratch);
            for i in 0..n {
                dy[i] = scratch[i] - y[i];
            }
        },
        0.0,
        t_end,
        initial,
        control,
        sample_times,
        |_, _| {},
    )?;
    let mut decay_rate = Vec::with_capacity(traj.states.len());
    for s in &traj.states {
        kernel.apply(s, &mut scratch);
        let total: f64 = s.iter().sum();
        let gain: f64 = scratch.iter().sum();
        decay_rate.push(if total > 0.0 { 1.0 - gain / total } else { f64::NAN });
    }
    Ok(FieldTrajectory { times: traj.times, fields: traj.states, decay_rate })
}
