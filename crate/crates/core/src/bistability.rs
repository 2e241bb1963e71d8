//! Stationary branches of the coherently driven dense two-level medium.
//!
//! State vector is `(ρ_aa, Re ρ_ab, Im ρ_ab)`, rates in units of γ, Ω real.
//! The branch curve is traced in `u = ρ_bb − ρ_aa`: for fixed `u` the
//! stationary population equation gives Ω² explicitly once Γ is known, and Γ
//! itself follows from a one-dimensional bracketed solve.

use nalgebra::Matrix3;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{require, Error, Result};
use crate::medium::AtomicState;
use crate::numerics::{find_root_bracketed, integrate_ode, solve_cubic_real, OdeControl};
use crate::rates::escape_factor;
use crate::response::driven_emission;

/// How the collective rate Γ enters the Bloch equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollectiveMode {
    Off,
    ExplicitApprox,
    FixedPoint,
}

impl CollectiveMode {
    pub fn name(self) -> &'static str {
        match self {
            CollectiveMode::Off => "off",
            CollectiveMode::ExplicitApprox => "explicit-approx",
            CollectiveMode::FixedPoint => "fixed-point",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "off" => Some(CollectiveMode::Off),
            "explicit-approx" | "explicit" => Some(CollectiveMode::ExplicitApprox),
            "fixed-point" => Some(CollectiveMode::FixedPoint),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BistabilityConfig {
    pub cooperativity: f64,
    /// r = πd/λ.
    pub slab_parameter: f64,
    /// γ*/γ.
    pub nonradiative_ratio: f64,
    pub collective: CollectiveMode,
    pub omega_grid: Vec<f64>,
}

impl BistabilityConfig {
    pub fn new(cooperativity: f64, slab_parameter: f64, nonradiative_ratio: f64, collective: CollectiveMode) -> Self {
        Self { cooperativity, slab_parameter, nonradiative_ratio, collective, omega_grid: linspace(0.0, 6.0, 601) }
    }

    pub fn validate(&self) -> Result<()> {
        require("cooperativity", self.cooperativity, self.cooperativity >= 0.0, "must be >= 0")?;
        require("slab_parameter", self.slab_parameter, self.slab_parameter >= 0.0, "must be >= 0")?;
        require("nonradiative_ratio", self.nonradiative_ratio, self.nonradiative_ratio >= 0.0, "must be >= 0")?;
        for &w in &self.omega_grid {
            require("omega", w, w >= 0.0, "Rabi frequency grid must be >= 0")?;
        }
        Ok(())
    }

    fn a0(&self) -> f64 {
        1.0 + self.nonradiative_ratio
    }

    /// Γ_ab for a given collective rate.
    pub fn coherence_decay(&self, gamma: f64) -> f64 {
        gamma + 0.5 * self.a0()
    }
}

/// `n` equally spaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchPoint {
    pub omega: f64,
    pub rho_aa: f64,
    pub rho_ab: Complex64,
    pub gamma: f64,
    pub stable: bool,
    /// 0 is the low-excitation branch; ids grow with ρ_aa across folds.
    pub branch_id: usize,
}

impl BranchPoint {
    pub fn state(&self) -> AtomicState {
        AtomicState::unchecked(self.rho_aa, self.rho_ab)
    }
}

/// Fold of the S-curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurningPoint {
    pub omega: f64,
    pub rho_aa: f64,
    pub gamma: f64,
    /// +1 for a local maximum of Ω along increasing ρ_aa, −1 for a minimum.
    pub kind: i8,
}

const STATIONARY_RESIDUAL: f64 = 1e-10;
const FIXED_POINT_DAMPING: f64 = 0.5;
const FIXED_POINT_MAX_ITER: usize = 10_000;

fn rhs(x: [f64; 3], omega: f64, gamma: f64, cfg: &BistabilityConfig) -> [f64; 3] {
    let [p, a, b] = x;
    let w = 2.0 * p - 1.0;
    let gab = cfg.coherence_decay(gamma);
    let c = cfg.cooperativity;
    [
        -cfg.a0() * p + gamma * (1.0 - 2.0 * p) + 2.0 * omega * b,
        -gab * a + c * b * w,
        -gab * b - omega * w - c * a * w,
    ]
}

/// `|Ω_L|² = |Ω + Cρ_ab|²`.
pub fn local_rabi_sq(omega: f64, rho_ab: Complex64, cooperativity: f64) -> f64 {
    (Complex64::new(omega, 0.0) + cooperativity * rho_ab).norm_sqr()
}

/// Closed-form approximation `Γ = ρ_aa (1 − e^{−K}) / (1 − 2ρ_aa)`.
pub fn collective_rate_explicit(rho_aa: f64, omega: f64, cfg: &BistabilityConfig) -> Result<f64> {
    require("rho_aa", rho_aa, (0.0..=0.5).contains(&rho_aa), "explicit rate needs an absorbing state, rho_aa in [0, 1/2]")?;
    let u = 1.0 - 2.0 * rho_aa;
    let c = cfg.cooperativity;
    let a = 1.0 + cfg.nonradiative_ratio * u;
    // K/u written without the 1/u² pole so that u → 0 is regular
    let den = (2.0 * omega * omega + 2.0 * c * c * u * u) * u * u + 0.25 * a * a;
    let k_over_u = c * cfg.slab_parameter * a * u / den;
    let k = k_over_u * u;
    Ok(rho_aa * k_over_u * escape_factor(k))
}

/// Right-hand side of the collective-rate relation for given Γ.
fn fixed_point_map(state: &AtomicState, omega: f64, gamma: f64, cfg: &BistabilityConfig) -> Result<f64> {
    let gab = cfg.coherence_decay(gamma);
    let om2 = local_rabi_sq(omega, state.rho_ab(), cfg.cooperativity);
    let e = driven_emission(state, om2, gab, cfg.cooperativity, cfg.slab_parameter)?;
    // unit-depth homogeneous ray
    Ok(e.source * escape_factor(-e.gain))
}

/// Solves Γ = F(Γ) by damped iteration, halving the damping whenever the
/// residual grows. Falls back to a bracketed solve if the iteration stalls.
pub fn collective_rate_fixed_point(state: &AtomicState, omega: f64, cfg: &BistabilityConfig) -> Result<f64> {
    state.check(crate::medium::STATE_TOLERANCE)?;
    let f = |g: f64| fixed_point_map(state, omega, g, cfg);
    let mut gamma = 0.0;
    let mut residual = f(gamma)? - gamma;
    let mut damping = FIXED_POINT_DAMPING;
    for _ in 0..FIXED_POINT_MAX_ITER {
        if residual.abs() < STATIONARY_RESIDUAL * 1e-2 {
            return Ok(gamma);
        }
        let trial = (gamma + damping * residual).max(0.0);
        let r = f(trial)? - trial;
        if r.abs() < residual.abs() {
            gamma = trial;
            residual = r;
        } else {
            damping *= 0.5;
            if damping < 1e-6 {
                break;
            }
        }
    }
    let hi = fixed_point_bound(state, omega, cfg);
    let g = find_root_bracketed(|g| f(g).unwrap_or(f64::NAN) - g, 0.0, hi, 0.0)?;
    let res = f(g)? - g;
    if res.abs() > STATIONARY_RESIDUAL * g.max(1.0) {
        return Err(Error::NoConvergence { what: "collective rate fixed point", residual: res });
    }
    Ok(g)
}

// F is bounded by its value with E → 0 and Γ_ab at its minimum.
fn fixed_point_bound(state: &AtomicState, omega: f64, cfg: &BistabilityConfig) -> f64 {
    let gab = 0.5 * cfg.a0();
    let om2 = local_rabi_sq(omega, state.rho_ab(), cfg.cooperativity);
    let u = (1.0 - 2.0 * state.rho_aa()).max(1e-300);
    let x = state.rho_aa() + 2.0 * om2 / (gab * gab) * state.rho_aa() * state.rho_bb();
    2.0 * x / u + 1.0
}

/// Γ slaved to the instantaneous state for the configured mode.
pub fn slaved_gamma(x: [f64; 3], omega: f64, cfg: &BistabilityConfig) -> Result<f64> {
    match cfg.collective {
        CollectiveMode::Off => Ok(0.0),
        CollectiveMode::ExplicitApprox => collective_rate_explicit(x[0].clamp(0.0, 0.5), omega, cfg),
        CollectiveMode::FixedPoint => {
            let s = AtomicState::unchecked(x[0], Complex64::new(x[1], x[2]));
            let hi = fixed_point_bound(&s, omega, cfg);
            let g = find_root_bracketed(|g| fixed_point_map(&s, omega, g, cfg).unwrap_or(f64::NAN) - g, 0.0, hi, 0.0)?;
            Ok(g)
        }
    }
}

/// Stationary states at fixed Ω and fixed Γ from the real cubic in
/// `w = ρ_aa − ρ_bb`. Roots sorted by increasing ρ_aa.
pub fn stationary_states(omega: f64, gamma: f64, cfg: &BistabilityConfig) -> Result<Vec<AtomicState>> {
    cfg.validate()?;
    require("omega", omega, true, "")?;
    let a0 = cfg.a0();
    let a1 = a0 + 2.0 * gamma;
    let gab = cfg.coherence_decay(gamma);
    let c2 = cfg.cooperativity * cfg.cooperativity;
    let coeffs = [a1 * c2, a0 * c2, a1 * gab * gab + 4.0 * omega * omega * gab, a0 * gab * gab];
    let mut out = Vec::new();
    for w in solve_cubic_real(coeffs) {
        if !(-1.0 - 1e-12..=1.0 + 1e-12).contains(&w) {
            continue;
        }
        let w = w.clamp(-1.0, 1.0);
        let rho_ab = Complex64::new(0.0, -omega * w) / Complex64::new(gab, cfg.cooperativity * w);
        if let Ok(s) = AtomicState::new(0.5 * (1.0 + w), rho_ab) {
            out.push(s);
        }
    }
    Ok(out)
}

/// A point of the stationary curve at `u = ρ_bb − ρ_aa ∈ (0, 1]`.
#[derive(Debug, Clone, Copy)]
struct CurvePoint {
    u: f64,
    omega: f64,
    gamma: f64,
}

fn curve_point(u: f64, cfg: &BistabilityConfig) -> Result<CurvePoint> {
    let a0 = cfg.a0();
    let c = cfg.cooperativity;
    let gmax = a0 * (1.0 - u) / (2.0 * u);
    let gamma_ab = |s: f64| gmax - s + 0.5 * a0;
    let omega_sq = |s: f64| {
        let gab = gamma_ab(s);
        s * (gab * gab + c * c * u * u) / (2.0 * gab)
    };
    let rho_aa = 0.5 * (1.0 - u);
    let gs = cfg.nonradiative_ratio;
    let cr = c * cfg.slab_parameter;
    // h(s) = 0 with s = Γmax − Γ; h(0) ≥ 0 and h(Γmax) ≤ 0
    let h = |s: f64| -> f64 {
        let gab = gamma_ab(s);
        match cfg.collective {
            CollectiveMode::Off => gmax - s,
            CollectiveMode::ExplicitApprox => {
                let om2 = omega_sq(s);
                let a = 1.0 + gs * u;
                let k = cr * a / (2.0 * om2 + 2.0 * c * c * u * u + a * a / (4.0 * u * u));
                (0.5 * gs * (1.0 - u) + rho_aa * (-k).exp()) / u - s
            }
            CollectiveMode::FixedPoint => {
                let delta = s * (u * u - 0.5 * (1.0 - u * u)) / (2.0 * gab);
                let x = rho_aa - delta;
                let e = (-2.0 * cr * gab * u / (gab * gab + s * gab)).exp();
                (0.5 * gs * (1.0 - u) + x * e + delta) / u - s
            }
        }
    };
    let s = if gmax <= 0.0 {
        0.0
    } else if cfg.collective == CollectiveMode::Off {
        gmax
    } else {
        let hi = h(gmax);
        if hi >= 0.0 {
            gmax
        } else {
            find_root_bracketed(h, 0.0, gmax, 0.0)?
        }
    };
    Ok(CurvePoint { u, omega: omega_sq(s).max(0.0).sqrt(), gamma: gmax - s })
}

fn curve_state(cp: &CurvePoint, cfg: &BistabilityConfig) -> ([f64; 3], f64) {
    let gab = cfg.coherence_decay(cp.gamma);
    let w = -cp.u;
    let rho_ab = Complex64::new(0.0, -cp.omega * w) / Complex64::new(gab, cfg.cooperativity * w);
    ([0.5 * (1.0 + w), rho_ab.re, rho_ab.im], cp.gamma)
}

// u samples ordered from the dark state (u = 1) towards saturation (u → 0).
fn u_samples() -> Vec<f64> {
    let mut u: Vec<f64> = (0..=2000).map(|i| 1.0 - 0.99 * i as f64 / 2000.0).collect();
    let n_geo = 400;
    for i in 1..=n_geo {
        u.push(0.01 * (1e-7f64 / 0.01).powf(i as f64 / n_geo as f64));
    }
    u
}

/// Sampled stationary curve together with its folds.
#[derive(Debug, Clone)]
pub struct BranchCurve {
    samples: Vec<CurvePoint>,
    turns: Vec<(usize, CurvePoint, i8)>,
}

impl BranchCurve {
    pub fn trace(cfg: &BistabilityConfig) -> Result<Self> {
        cfg.validate()?;
        let samples: Vec<CurvePoint> = u_samples().par_iter().map(|&u| curve_point(u, cfg)).collect::<Result<_>>()?;
        let mut turns = Vec::new();
        let mut last_sign = 0.0;
        let mut last_idx: usize = 0;
        for i in 1..samples.len() {
            let d = samples[i].omega - samples[i - 1].omega;
            if d == 0.0 {
                continue;
            }
            let sign = d.signum();
            if last_sign != 0.0 && sign != last_sign {
                let kind = if last_sign > 0.0 { 1 } else { -1 };
                let lo = samples[last_idx.saturating_sub(1)].u;
                let hi = samples[(i).min(samples.len() - 1)].u;
                let tp = refine_turn(lo.max(hi), lo.min(hi), kind, cfg)?;
                turns.push((i - 1, tp, kind));
            }
            last_sign = sign;
            last_idx = i;
        }
        Ok(Self { samples, turns })
    }

    pub fn turning_points(&self, cfg: &BistabilityConfig) -> Vec<TurningPoint> {
        self.turns
            .iter()
            .map(|(_, cp, kind)| {
                let (x, g) = curve_state(cp, cfg);
                TurningPoint { omega: cp.omega, rho_aa: x[0], gamma: g, kind: *kind }
            })
            .collect()
    }

    /// Index of the monotone segment containing `u`.
    fn branch_of(&self, u: f64) -> usize {
        self.turns.iter().filter(|(_, cp, _)| cp.u > u).count()
    }

    /// Largest Ω reached by the sampled curve.
    pub fn omega_reach(&self) -> f64 {
        self.samples.iter().map(|s| s.omega).fold(0.0, f64::max)
    }

    fn segments(&self) -> Vec<(f64, f64)> {
        let mut bounds = vec![self.samples[0].u];
        bounds.extend(self.turns.iter().map(|(_, cp, _)| cp.u));
        bounds.push(self.samples.last().unwrap().u);
        bounds.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// Stationary points at `omega`, one per segment crossing.
    fn solve_at(&self, omega: f64, cfg: &BistabilityConfig) -> Result<Vec<CurvePoint>> {
        let mut out = Vec::new();
        for (hi_u, lo_u) in self.segments() {
            // sample cells inside the segment
            let mut pts: Vec<CurvePoint> = vec![curve_point(hi_u, cfg)?];
            pts.extend(self.samples.iter().filter(|s| s.u < hi_u && s.u > lo_u).copied());
            pts.push(curve_point(lo_u, cfg)?);
            for w in pts.windows(2) {
                let (f0, f1) = (w[0].omega - omega, w[1].omega - omega);
                if f0 == 0.0 {
                    push_unique(&mut out, w[0]);
                    continue;
                }
                if f0.signum() != f1.signum() && f1 != 0.0 {
                    let u = find_root_bracketed(
                        |u| curve_point(u, cfg).map(|c| c.omega - omega).unwrap_or(f64::NAN),
                        w[1].u,
                        w[0].u,
                        0.0,
                    )?;
                    push_unique(&mut out, curve_point(u, cfg)?);
                } else if f1 == 0.0 && w[1].u == lo_u {
                    push_unique(&mut out, w[1]);
                }
            }
        }
        Ok(out)
    }
}

fn push_unique(out: &mut Vec<CurvePoint>, cp: CurvePoint) {
    if !out.iter().any(|p| (p.u - cp.u).abs() < 1e-12) {
        out.push(cp);
    }
}

// Golden-section refinement of an extremum of Ω(u) on [lo, hi].
fn refine_turn(hi: f64, lo: f64, kind: i8, cfg: &BistabilityConfig) -> Result<CurvePoint> {
    let sign = if kind > 0 { -1.0 } else { 1.0 };
    let obj = |u: f64| curve_point(u, cfg).map(|c| sign * c.omega);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = obj(c)?;
    let mut fd = obj(d)?;
    while (b - a).abs() > 1e-13 * b.abs().max(1e-12) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = obj(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = obj(d)?;
        }
    }
    curve_point(0.5 * (a + b), cfg)
}

fn residual(x: [f64; 3], omega: f64, gamma: f64, cfg: &BistabilityConfig) -> Result<f64> {
    let f = rhs(x, omega, gamma, cfg);
    let g = slaved_gamma(x, omega, cfg)?;
    Ok(f.iter().map(|v| v.abs()).fold((g - gamma).abs(), f64::max))
}

fn branch_point(cp: &CurvePoint, curve: &BranchCurve, omega: f64, cfg: &BistabilityConfig) -> Result<BranchPoint> {
    let (x, gamma) = curve_state(cp, cfg);
    let res = residual(x, omega, gamma, cfg)?;
    if res > STATIONARY_RESIDUAL * gamma.max(1.0) {
        return Err(Error::NoConvergence { what: "stationary branch point", residual: res });
    }
    let mut bp = BranchPoint {
        omega,
        rho_aa: x[0],
        rho_ab: Complex64::new(x[1], x[2]),
        gamma,
        stable: false,
        branch_id: curve.branch_of(cp.u),
    };
    bp.stable = classify_stability(&bp, cfg)?;
    Ok(bp)
}

/// All stationary solutions on the Ω grid with Γ ≡ 0, one cubic per Ω.
pub fn stationary_branches(cfg: &BistabilityConfig) -> Result<Vec<BranchPoint>> {
    let cfg = BistabilityConfig { collective: CollectiveMode::Off, ..cfg.clone() };
    cfg.validate()?;
    let curve = BranchCurve::trace(&cfg)?;
    let per_omega: Vec<Vec<BranchPoint>> = cfg
        .omega_grid
        .par_iter()
        .map(|&omega| {
            stationary_states(omega, 0.0, &cfg)?
                .into_iter()
                .map(|s| {
                    let u = 1.0 - 2.0 * s.rho_aa();
                    let mut bp = BranchPoint {
                        omega,
                        rho_aa: s.rho_aa(),
                        rho_ab: s.rho_ab(),
                        gamma: 0.0,
                        stable: false,
                        branch_id: curve.branch_of(u),
                    };
                    let x = [bp.rho_aa, bp.rho_ab.re, bp.rho_ab.im];
                    let res = residual(x, omega, 0.0, &cfg)?;
                    if res > STATIONARY_RESIDUAL {
                        return Err(Error::NoConvergence { what: "stationary cubic root", residual: res });
                    }
                    bp.stable = classify_stability(&bp, &cfg)?;
                    Ok(bp)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_omega.into_iter().flatten().collect())
}

/// Stationary solutions with Γ determined self-consistently.
pub fn self_consistent_branches(cfg: &BistabilityConfig) -> Result<Vec<BranchPoint>> {
    if cfg.collective == CollectiveMode::Off {
        return stationary_branches(cfg);
    }
    let curve = BranchCurve::trace(cfg)?;
    let reach = curve.omega_reach();
    let per_omega: Vec<Vec<BranchPoint>> = cfg
        .omega_grid
        .par_iter()
        .map(|&omega| {
            if omega > reach {
                log::warn!("omega {omega} beyond traced curve (max {reach}); upper branch not reported");
            }
            let mut pts = curve.solve_at(omega, cfg)?;
            pts.sort_by(|a, b| b.u.total_cmp(&a.u));
            pts.iter().map(|cp| branch_point(cp, &curve, omega, cfg)).collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_omega.into_iter().flatten().collect())
}

pub fn turning_points(cfg: &BistabilityConfig) -> Result<Vec<TurningPoint>> {
    Ok(BranchCurve::trace(cfg)?.turning_points(cfg))
}

/// Jacobian of the Bloch right-hand side at `x` with Γ slaved to the state.
pub fn jacobian(x: [f64; 3], omega: f64, cfg: &BistabilityConfig) -> Result<Matrix3<f64>> {
    let gamma = slaved_gamma(x, omega, cfg)?;
    let [p, a, b] = x;
    let w = 2.0 * p - 1.0;
    let gab = cfg.coherence_decay(gamma);
    let c = cfg.cooperativity;
    let mut j = Matrix3::new(
        -cfg.a0() - 2.0 * gamma,
        0.0,
        2.0 * omega,
        2.0 * c * b,
        -gab,
        c * w,
        -2.0 * omega - 2.0 * c * a,
        -c * w,
        -gab,
    );
    if cfg.collective != CollectiveMode::Off {
        let df_dgamma = [1.0 - 2.0 * p, -a, -b];
        for k in 0..3 {
            let h = 1e-6 * x[k].abs().max(1e-3);
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            let dg = (slaved_gamma(xp, omega, cfg)? - slaved_gamma(xm, omega, cfg)?) / (2.0 * h);
            for i in 0..3 {
                j[(i, k)] += df_dgamma[i] * dg;
            }
        }
    }
    Ok(j)
}

pub fn jacobian_eigenvalues(j: &Matrix3<f64>) -> Vec<Complex64> {
    let mut m = *j;
    for attempt in 0..4 {
        if let Some(schur) = nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 10_000) {
            return schur.complex_eigenvalues().iter().map(|z| Complex64::new(z.re, z.im)).collect();
        }
        // nudge off a defective configuration
        let eps = 1e-12 * (attempt + 1) as f64 * j.norm().max(1.0);
        m = j + Matrix3::from_diagonal_element(eps);
    }
    j.complex_eigenvalues().iter().map(|z| Complex64::new(z.re, z.im)).collect()
}

/// Linear stability: all Jacobian eigenvalues strictly in the left half-plane.
pub fn classify_stability(point: &BranchPoint, cfg: &BistabilityConfig) -> Result<bool> {
    let x = [point.rho_aa, point.rho_ab.re, point.rho_ab.im];
    let j = jacobian(x, point.omega, cfg)?;
    Ok(jacobian_eigenvalues(&j).iter().all(|z| z.re < 0.0))
}

/// Ω at which the Jacobian determinant vanishes along the branch curve near a
/// fold, located independently of the Ω(u) extremum.
pub fn fold_from_jacobian(turn: &TurningPoint, cfg: &BistabilityConfig, half_width: f64) -> Result<f64> {
    let u0 = 1.0 - 2.0 * turn.rho_aa;
    let det = |u: f64| -> f64 {
        curve_point(u, cfg)
            .and_then(|cp| {
                let (x, _) = curve_state(&cp, cfg);
                jacobian(x, cp.omega, cfg)
            })
            .map(|j| j.determinant())
            .unwrap_or(f64::NAN)
    };
    let lo = (u0 - half_width).max(1e-9);
    let hi = (u0 + half_width).min(1.0);
    let u = find_root_bracketed(det, lo, hi, 1e-14)?;
    Ok(curve_point(u, cfg)?.omega)
}

/// One settled state of an adiabatic Ω sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub omega: f64,
    pub state: AtomicState,
    pub gamma: f64,
}

/// Integrates the Bloch equations through a sequence of Ω values, each run
/// starting from the previous end state.
pub fn hysteresis_sweep(
    cfg: &BistabilityConfig,
    omegas: &[f64],
    initial: AtomicState,
    settle_time: f64,
    control: &OdeControl,
) -> Result<Vec<SweepPoint>> {
    cfg.validate()?;
    require("settle_time", settle_time, settle_time > 0.0, "must be positive")?;
    let mut y = vec![initial.rho_aa(), initial.rho_ab().re, initial.rho_ab().im];
    let mut out = Vec::with_capacity(omegas.len());
    for &omega in omegas {
        let err = std::cell::RefCell::new(None);
        let traj = integrate_ode(
            |_, x, dx| {
                let s = [x[0], x[1], x[2]];
                let g = match slaved_gamma(s, omega, cfg) {
                    Ok(g) => g,
                    Err(e) => {
                        err.borrow_mut().get_or_insert(e);
                        0.0
                    }
                };
                dx.copy_from_slice(&rhs(s, omega, g, cfg));
            },
            0.0,
            settle_time,
            &y,
            control,
            &[settle_time],
            |_, _| {},
        )?;
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        y = traj.states.last().cloned().unwrap_or(y);
        let x = [y[0], y[1], y[2]];
        out.push(SweepPoint {
            omega,
            state: AtomicState::unchecked(y[0], Complex64::new(y[1], y[2])),
            gamma: slaved_gamma(x, omega, cfg)?,
        });
    }
    Ok(out)
}

/// Smallest C at which the Γ ≡ 0 response becomes S-shaped, by bisection.
pub fn critical_cooperativity(nonradiative_ratio: f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let s_shaped = |c: f64| -> Result<bool> {
        let cfg = BistabilityConfig::new(c, 0.0, nonradiative_ratio, CollectiveMode::Off);
        Ok(!BranchCurve::trace(&cfg)?.turns.is_empty())
    };
    let (mut a, mut b) = (lo, hi);
    if s_shaped(a)? || !s_shaped(b)? {
        return Err(Error::NoBracket { lo, hi });
    }
    while b - a > tol {
        let m = 0.5 * (a + b);
        if s_shaped(m)? {
            b = m;
        } else {
            a = m;
        }
    }
    Ok(0.5 * (a + b))
}
