//! Exponential integrals and the error function.

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Generalized exponential integral `E_n(x) = ∫₁^∞ e^{−xt} t^{−n} dt`.
///
/// Series for `x ≤ 1`, Lentz continued fraction above.
pub fn exponential_integral(n: u32, x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 || (x == 0.0 && n <= 1) {
        return Err(Error::Domain { function: "exponential integral", value: x });
    }
    if n == 0 {
        return Ok((-x).exp() / x);
    }
    if x == 0.0 {
        return Ok(1.0 / (n as f64 - 1.0));
    }
    const MAX_ITER: usize = 500;
    const EPS: f64 = 1e-16;
    let nm1 = n as f64 - 1.0;
    if x > 1.0 {
        let tiny = 1e-300;
        let mut b = x + n as f64;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=MAX_ITER {
            let fi = i as f64;
            let an = -fi * (nm1 + fi);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < EPS {
                return Ok(h * (-x).exp());
            }
        }
        Err(Error::NoConvergence { what: "exponential integral continued fraction", residual: x })
    } else {
        let mut ans = if nm1 != 0.0 { 1.0 / nm1 } else { -x.ln() - EULER_GAMMA };
        let mut fact = 1.0;
        for i in 1..=MAX_ITER {
            let fi = i as f64;
            fact *= -x / fi;
            let del = if fi != nm1 {
                -fact / (fi - nm1)
            } else {
                // ψ(n) = −γ + Σ_{k<n} 1/k
                let psi = -EULER_GAMMA + (1..=nm1 as usize).map(|k| 1.0 / k as f64).sum::<f64>();
                fact * (-x.ln() + psi)
            };
            ans += del;
            if del.abs() < ans.abs() * EPS {
                return Ok(ans);
            }
        }
        Err(Error::NoConvergence { what: "exponential integral series", residual: x })
    }
}

/// `E₁(x) = ∫_x^∞ e^{−t}/t dt` for `x > 0`.
pub fn exponential_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain { function: "E1", value: x });
    }
    exponential_integral(1, x)
}

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from scipy.special.exp1 / expn.
    #[test]
    fn e1_reference_values() {
        let cases = [
            (1.0, 0.219_383_934_395_520_3),
            (0.5, 0.559_773_594_776_160_8),
            (2.0, 0.048_900_510_708_061_125),
            (10.0, 4.156_968_929_685_325e-6),
        ];
        for (x, want) in cases {
            let got = exponential_integral_e1(x).unwrap();
            assert!((got - want).abs() <= 1e-10 * want, "E1({x}) = {got}");
        }
        let e2 = exponential_integral(2, 1.0).unwrap();
        assert!((e2 - 0.148_495_506_775_921_92).abs() < 1e-14);
        let e3 = exponential_integral(3, 0.1).unwrap();
        assert!((e3 - 0.416_291_457_908_278_8).abs() < 1e-14);
    }

    #[test]
    fn e1_asymptotic_limit() {
        let mut last = f64::INFINITY;
        for x in [10.0, 50.0, 200.0, 600.0] {
            let scaled = exponential_integral_e1(x).unwrap() * x * x.exp();
            assert!((scaled - 1.0).abs() < 1.2 / x);
            assert!((scaled - 1.0).abs() < last);
            last = (scaled - 1.0).abs();
        }
    }

    #[test]
    fn e1_is_decreasing() {
        let mut prev = f64::INFINITY;
        for k in 1..400 {
            let x = 0.01 * k as f64;
            let v = exponential_integral_e1(x).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn e1_domain() {
        assert!(exponential_integral_e1(0.0).is_err());
        assert!(exponential_integral_e1(-1.0).is_err());
        assert!(exponential_integral_e1(f64::NAN).is_err());
        assert_eq!(exponential_integral(2, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn e2_recurrence() {
        // E₂(x) = e^{−x} − x E₁(x)
        for x in [0.3, 1.0, 4.0, 30.0] {
            let e1 = exponential_integral_e1(x).unwrap();
            let e2 = exponential_integral(2, x).unwrap();
            let rhs = (-x).exp() - x * e1;
            assert!((e2 - rhs).abs() <= 1e-12 * e2.max(1e-300) + 1e-15 * (-x).exp(), "x = {x}");
        }
    }
}
