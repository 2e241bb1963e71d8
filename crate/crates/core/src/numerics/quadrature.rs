//! Gauss rules, adaptive quadrature and Gauss-weighted integrals over the
//! real line.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Node count and tolerances for [`gauss_weighted_integral`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub node_count: usize,
    pub absolute_tol: f64,
    pub relative_tol: f64,
}

/// Largest Gauss–Hermite rule the doubling loop will try.
pub const MAX_HERMITE_NODES: usize = 1024;

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { node_count: 32, absolute_tol: 1e-13, relative_tol: 1e-11 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.node_count < 8 {
            return Err(Error::InvalidParameter {
                name: "node_count",
                value: self.node_count as f64,
                reason: "must be >= 8",
            });
        }
        crate::error::require("absolute_tol", self.absolute_tol, self.absolute_tol > 0.0, "must be > 0")?;
        crate::error::require("relative_tol", self.relative_tol, self.relative_tol > 0.0, "must be > 0")
    }

    fn accepts(&self, coarse: f64, fine: f64) -> bool {
        (fine - coarse).abs() <= self.absolute_tol.max(self.relative_tol * fine.abs())
    }
}

/// Nodes and weights of a Gauss rule.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn apply(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

type RuleCache = Mutex<HashMap<usize, Arc<GaussRule>>>;

fn cached(cache: &'static OnceLock<RuleCache>, n: usize, build: fn(usize) -> GaussRule) -> Arc<GaussRule> {
    let cache = cache.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap_or_else(|poison| poison.into_inner());
    map.entry(n).or_insert_with(|| Arc::new(build(n))).clone()
}

/// Gauss–Hermite rule for the weight `e^{−x²}` on the real line.
pub fn gauss_hermite(n: usize) -> Arc<GaussRule> {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    cached(&CACHE, n, build_gauss_hermite)
}

/// Gauss–Legendre rule on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> Arc<GaussRule> {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    cached(&CACHE, n, build_gauss_legendre)
}

// Nodes are eigenvalues of the Jacobi matrix (zero diagonal, off-diagonal
// √(j/2)), isolated by Sturm-count bisection and polished by Newton steps on
// the orthonormal Hermite recurrence. Weights come from the derivative.
fn build_gauss_hermite(n: usize) -> GaussRule {
    assert!(n >= 1);
    let pim4 = PI.powf(-0.25);
    let nf = n as f64;
    // number of Jacobi-matrix eigenvalues below x
    let count_below = |x: f64| {
        let mut count = 0;
        let mut d = -x;
        for j in 1..=n {
            if d < 0.0 {
                count += 1;
            }
            if j == n {
                break;
            }
            let b2 = j as f64 / 2.0;
            let denom = if d == 0.0 { f64::EPSILON } else { d };
            d = -x - b2 / denom;
        }
        count
    };
    let recurrence = |z: f64| {
        let mut p1 = pim4;
        let mut p2 = 0.0;
        for j in 1..=n {
            let p3 = p2;
            p2 = p1;
            let jf = j as f64;
            p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
        }
        (p1, (2.0 * nf).sqrt() * p2)
    };
    let bound = (2.0 * nf + 1.0).sqrt() + 1.0;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // i-th largest eigenvalue: exactly n − 1 − i eigenvalues lie below it
        let target = n - 1 - i;
        let (mut lo, mut hi) = (-bound, bound);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if count_below(mid) > target {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-13 * hi.abs().max(1.0) {
                break;
            }
        }
        let mut z = 0.5 * (lo + hi);
        let mut pp = recurrence(z).1;
        for _ in 0..5 {
            let (p1, d) = recurrence(z);
            pp = d;
            if d == 0.0 {
                break;
            }
            let dz = p1 / d;
            if !dz.is_finite() {
                break;
            }
            z -= dz;
            if dz.abs() <= 1e-16 * z.abs().max(1.0) {
                break;
            }
        }
        if n % 2 == 1 && i == n / 2 {
            z = 0.0;
            pp = recurrence(0.0).1;
        }
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        // far-tail weights underflow; the recurrence overflows there
        weights[i] = if pp.is_finite() { 2.0 / (pp * pp) } else { 0.0 };
        weights[n - 1 - i] = weights[i];
    }
    GaussRule { nodes, weights }
}

fn build_gauss_legendre(n: usize) -> GaussRule {
    assert!(n >= 1);
    let nf = n as f64;
    let m = n.div_ceil(2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    GaussRule { nodes, weights }
}

/// `∫ e^{−y²} f(y) dy` over the real line by Gauss–Hermite rules of
/// increasing size. The node count doubles from `spec.node_count` until two
/// successive rules agree within the tolerances.
pub fn gauss_weighted_integral(mut f: impl FnMut(f64) -> f64, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    let mut n = spec.node_count;
    let mut coarse = gauss_hermite(n).apply(&mut f);
    while n < MAX_HERMITE_NODES {
        n *= 2;
        let fine = gauss_hermite(n).apply(&mut f);
        if !fine.is_finite() {
            break;
        }
        if spec.accepts(coarse, fine) {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::NoConvergence { what: "Gauss-Hermite integral", residual: coarse })
}

/// Adaptive Simpson quadrature on `[a, b]` with absolute tolerance `tol`.
pub fn adaptive_simpson(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64, max_depth: u32) -> Result<f64> {
    fn recurse(
        f: &mut dyn FnMut(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err(Error::NoConvergence { what: "adaptive Simpson", residual: delta.abs() });
        }
        Ok(recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(&mut f, a, b, fa, fm, fb, whole, tol, max_depth)
}

// Gauss–Kronrod 7/15 abscissae and weights (QUADPACK).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Globally adaptive Gauss–Kronrod quadrature on a finite interval. The rule
/// is open, so integrable endpoint singularities are never evaluated.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    const MAX_INTERVALS: usize = 2000;
    let (v, e) = gk15(&mut f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    loop {
        let total: f64 = pieces.iter().map(|p| p.2).sum();
        let error: f64 = pieces.iter().map(|p| p.3).sum();
        if !total.is_finite() {
            return Err(Error::NoConvergence { what: "Gauss-Kronrod integral", residual: error });
        }
        if error <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if pieces.len() >= MAX_INTERVALS {
            return Err(Error::NoConvergence { what: "Gauss-Kronrod integral", residual: error });
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("at least one interval");
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
}
