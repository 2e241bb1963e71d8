use crate::error::{Error, Result};

use super::quadrature::integrate;

/// Cauchy principal value of `∫_lo^hi f(x) / (pole − x) dx`.
///
/// The pole is subtracted: `[f(x) − f(pole)] / (pole − x)` is integrated
/// numerically on both sides of the pole and the remainder
/// `f(pole) · ln((pole − lo) / (hi − pole))` is added analytically.
pub fn principal_value_integral(
    mut f: impl FnMut(f64) -> f64,
    pole: f64,
    lo: f64,
    hi: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    if !(lo < pole && pole < hi) {
        return Err(Error::Domain { function: "principal value (pole outside interval)", value: pole });
    }
    let at_pole = f(pole);
    let mut subtracted = |x: f64| {
        let dx = pole - x;
        (f(x) - at_pole) / dx
    };
    let left = integrate(&mut subtracted, lo, pole, abs_tol, rel_tol)?;
    let right = integrate(&mut subtracted, pole, hi, abs_tol, rel_tol)?;
    Ok(left + right + at_pole * ((pole - lo) / (hi - pole)).ln())
}
