//! Dormand–Prince 5(4) integrator with step rejection and dense output.

use crate::error::{require, Error, Result};

/// Step-size control for [`integrate_ode`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeControl {
    pub initial_step: f64,
    pub max_step: f64,
    /// Used as both the absolute and relative local error tolerance.
    pub error_tol: f64,
    pub max_steps: usize,
}

impl Default for OdeControl {
    fn default() -> Self {
        Self { initial_step: 1e-3, max_step: 1.0, error_tol: 1e-10, max_steps: 1_000_000 }
    }
}

impl OdeControl {
    pub fn validate(&self) -> Result<()> {
        require("initial_step", self.initial_step, self.initial_step > 0.0, "must be > 0")?;
        require("max_step", self.max_step, self.max_step > 0.0, "must be > 0")?;
        require("error_tol", self.error_tol, self.error_tol > 0.0, "must be > 0")?;
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter { name: "max_steps", value: 0.0, reason: "must be > 0" });
        }
        Ok(())
    }
}

/// States at the requested sample times.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Continuous extension (Hairer, Nørsett & Wanner).
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Integrates `dy/dt = rhs(t, y)` from `t0` to `t1` (`t1 > t0`) and returns
/// the solution at `sample_times` (sorted, within `[t0, t1]`).
///
/// `on_step(t, y)` is called after every accepted step.
pub fn integrate_ode<R, S>(
    mut rhs: R,
    t0: f64,
    t1: f64,
    y0: &[f64],
    control: &OdeControl,
    sample_times: &[f64],
    mut on_step: S,
) -> Result<Trajectory>
where
    R: FnMut(f64, &[f64], &mut [f64]),
    S: FnMut(f64, &[f64]),
{
    control.validate()?;
    require("t1", t1, t1 > t0, "must exceed t0")?;
    if sample_times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter { name: "sample_times", value: f64::NAN, reason: "must be sorted" });
    }
    if let (Some(&first), Some(&last)) = (sample_times.first(), sample_times.last()) {
        require("sample_times", first, first >= t0, "before t0")?;
        require("sample_times", last, last <= t1, "after t1")?;
    }

    let dim = y0.len();
    let tol = control.error_tol;
    let mut trajectory = Trajectory {
        times: Vec::with_capacity(sample_times.len()),
        states: Vec::with_capacity(sample_times.len()),
        accepted_steps: 0,
        rejected_steps: 0,
    };
    let mut next_sample = 0;
    while next_sample < sample_times.len() && sample_times[next_sample] == t0 {
        trajectory.times.push(t0);
        trajectory.states.push(y0.to_vec());
        next_sample += 1;
    }

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut k5 = vec![0.0; dim];
    let mut k6 = vec![0.0; dim];
    let mut k7 = vec![0.0; dim];
    let mut stage = vec![0.0; dim];
    let mut y_new = vec![0.0; dim];
    rhs(t, &y, &mut k1);

    let mut h = control.initial_step.min(control.max_step).min(t1 - t0);
    let mut steps = 0usize;
    let mut last_rejected = false;

    while t < t1 {
        if steps >= control.max_steps {
            return Err(Error::MaxSteps { max_steps: control.max_steps, t, t_end: t1 });
        }
        steps += 1;
        let final_step = t + h >= t1;
        if final_step {
            h = t1 - t;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t, step: h });
        }

        for i in 0..dim {
            stage[i] = y[i] + h * A21 * k1[i];
        }
        rhs(t + C2 * h, &stage, &mut k2);
        for i in 0..dim {
            stage[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        rhs(t + C3 * h, &stage, &mut k3);
        for i in 0..dim {
            stage[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        rhs(t + C4 * h, &stage, &mut k4);
        for i in 0..dim {
            stage[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        rhs(t + C5 * h, &stage, &mut k5);
        for i in 0..dim {
            stage[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        rhs(t + h, &stage, &mut k6);
        for i in 0..dim {
            y_new[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        let t_new = if final_step { t1 } else { t + h };
        rhs(t_new, &y_new, &mut k7);

        let mut err_sq = 0.0;
        for i in 0..dim {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = tol + tol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / scale).powi(2);
        }
        let err = if dim == 0 { 0.0 } else { (err_sq / dim as f64).sqrt() };
        if !err.is_finite() {
            trajectory.rejected_steps += 1;
            h *= 0.1;
            last_rejected = true;
            continue;
        }

        if err <= 1.0 {
            // Dense output for samples inside (t, t_new].
            while next_sample < sample_times.len() && sample_times[next_sample] <= t_new {
                let ts = sample_times[next_sample];
                let theta = (ts - t) / h;
                let theta1 = 1.0 - theta;
                let state: Vec<f64> = (0..dim)
                    .map(|i| {
                        if ts == t_new {
                            return y_new[i];
                        }
                        let diff = y_new[i] - y[i];
                        let bspl = h * k1[i] - diff;
                        let r4 = diff - h * k7[i] - bspl;
                        let r5 = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
                        y[i] + theta * (diff + theta1 * (bspl + theta * (r4 + theta1 * r5)))
                    })
                    .collect();
                trajectory.times.push(ts);
                trajectory.states.push(state);
                next_sample += 1;
            }
            t = t_new;
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);
            trajectory.accepted_steps += 1;
            on_step(t, &y);

            let mut factor = 0.9 * err.max(1e-10).powf(-0.2);
            factor = factor.clamp(0.2, 5.0);
            if last_rejected {
                factor = factor.min(1.0);
            }
            h = (h * factor).min(control.max_step);
            last_rejected = false;
        } else {
            trajectory.rejected_steps += 1;
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            last_rejected = true;
        }
    }
    Ok(trajectory)
}
