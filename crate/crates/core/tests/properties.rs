use dense_bloch::bistability::{collective_rate_fixed_point, stationary_states, BistabilityConfig, CollectiveMode};
use dense_bloch::dynamics::{evolve_two_level, spectrum_snapshot, DecayOptions};
use dense_bloch::holstein::{build_slab_kernel, escape_rate, evolve_linear_trapping};
use dense_bloch::medium::{derive_groups, AtomicState, DimensionlessGroups, Geometry, MediumParameters};
use dense_bloch::numerics::{gauss_weighted_integral, OdeControl, QuadratureSpec};
use dense_bloch::rates::{collective_shift, small_sample_rate_averaged, small_sample_rate_spectral};
use dense_bloch::response::{doppler_absorption_coefficient, driven_absorption_coefficient};
use num_complex::Complex64;
use proptest::prelude::*;

fn medium(scale: i32) -> MediumParameters {
    let s = 2f64.powi(scale);
    MediumParameters {
        atom_density: 3e17 * s * s * s,
        transition_wavelength: 5.9e-7 / s,
        rest_frequency: 3.19e15 * s,
        radiative_rate: 6.1e7 * s,
        nonradiative_rate: 0.0,
        doppler_width: 2.4e9 * s,
        sample_length: 1.3e-4 / s,
        geometry: Geometry::CylinderOnAxis,
    }
}

fn state(p: f64, frac: f64, phase: f64) -> AtomicState {
    let amp = frac * (p * (1.0 - p)).sqrt();
    AtomicState::new(p, Complex64::from_polar(amp, phase)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn decay_depends_only_on_groups(scale in -3i32..=3, p0 in 0.3f64..=1.0) {
        let a = derive_groups(&medium(0)).unwrap();
        let b = derive_groups(&medium(scale)).unwrap();
        prop_assert_eq!(a, b);
        let opts = DecayOptions { samples: 11, ..Default::default() };
        let s = AtomicState::populations(p0).unwrap();
        let ta = evolve_two_level(&s, &a, 2.0, &opts, &[]).unwrap();
        let tb = evolve_two_level(&s, &b, 2.0, &opts, &[]).unwrap();
        prop_assert_eq!(ta.rho_aa, tb.rho_aa);
    }

    #[test]
    fn absorption_sign_follows_inversion(p in 0.0f64..=1.0, frac in 0.0f64..=1.0, phase in 0.0f64..6.28,
                                         d in -3.0f64..3.0, om2 in 0.0f64..50.0, gab in 0.1f64..5.0, c in 0.1f64..20.0) {
        let s = state(p, frac, phase);
        let w = s.inversion();
        let mut g = DimensionlessGroups::from_opacity(100.0, 0.01).unwrap();
        g.cooperativity = Some(c);
        let q = doppler_absorption_coefficient(&s, d * g.doppler_width(), &g).unwrap().q0_double_prime;
        let qd = driven_absorption_coefficient(&s, om2, gab, c).unwrap().q0_double_prime;
        for v in [q, qd] {
            if w.abs() > 1e-12 {
                prop_assert_eq!(v.signum(), w.signum());
            } else {
                prop_assert!(v.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn averaged_rate_is_weighted_average(p in 0.0f64..=1.0, eta in 0.0f64..800.0) {
        let g = DimensionlessGroups::from_opacity(eta, 0.01).unwrap();
        let s = AtomicState::populations(p).unwrap();
        let spec = QuadratureSpec::default();
        let avg = small_sample_rate_averaged(&s, &g, &spec).unwrap();
        // trapezoid in x = Δ/Δ_D as an independent check
        let n = 4000;
        let h = 24.0 / n as f64;
        let mut sum = 0.0;
        for i in 0..=n {
            let x = -12.0 + i as f64 * h;
            let wgt = if i == 0 || i == n { 0.5 } else { 1.0 };
            sum += wgt * small_sample_rate_spectral(&s, x * g.doppler_width(), &g) * (-0.5 * x * x).exp();
        }
        let direct = sum * h / (2.0 * std::f64::consts::PI).sqrt();
        prop_assert!((avg - direct).abs() <= 1e-9 * avg.abs().max(1e-12), "{} {}", avg, direct);
    }

    #[test]
    fn spectrum_profile_normalized(p in 0.0f64..=1.0, eta in 0.0f64..800.0) {
        let g = DimensionlessGroups::from_opacity(eta, 0.01).unwrap();
        let s = AtomicState::populations(p).unwrap();
        let spec = QuadratureSpec::default();
        let grid: Vec<f64> = (0..=600).map(|i| -12.0 + 0.04 * i as f64).collect();
        let snap = spectrum_snapshot(&s, &g, &grid, &spec).unwrap();
        let total: f64 = snap.profile.iter().zip(&grid).map(|(v, x)| v * (-0.5 * x * x).exp()).sum::<f64>() * 0.04
            / (2.0 * std::f64::consts::PI).sqrt();
        prop_assert!((total - 1.0).abs() < 1e-8, "{}", total);
        prop_assert!(snap.profile.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn shift_is_linear_in_profile(a in -3.0f64..3.0, b in -3.0f64..3.0, w in -4.0f64..4.0, c in -2.0f64..2.0) {
        let f1 = |x: f64| (-x * x).exp();
        let f2 = |x: f64| (-(x - c) * (x - c)).exp();
        let s1 = collective_shift(f1, w, -12.0, 12.0, 1e-14, 1e-12).unwrap();
        let s2 = collective_shift(f2, w, -12.0, 12.0, 1e-14, 1e-12).unwrap();
        let s = collective_shift(|x| a * f1(x) + b * f2(x), w, -12.0, 12.0, 1e-14, 1e-12).unwrap();
        prop_assert!((a * s1 + b * s2 - s).abs() < 1e-9);
    }

    #[test]
    fn quadrature_doubling_converged(p in 0.0f64..=1.0, eta in 0.0f64..800.0) {
        let g = DimensionlessGroups::from_opacity(eta, 0.01).unwrap();
        let s = AtomicState::populations(p).unwrap();
        let coarse = QuadratureSpec::default();
        let fine = QuadratureSpec { node_count: 2 * coarse.node_count, ..coarse };
        let a = small_sample_rate_averaged(&s, &g, &coarse).unwrap();
        let b = small_sample_rate_averaged(&s, &g, &fine).unwrap();
        prop_assert!((a - b).abs() <= 10.0 * (coarse.absolute_tol + coarse.relative_tol * b.abs()));
        let one = gauss_weighted_integral(|_| 1.0, &coarse).unwrap();
        prop_assert!((one - std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn inverted_runs_amplify_then_trap(eta in 20.0f64..400.0) {
        let g = DimensionlessGroups::from_opacity(eta, 0.01).unwrap();
        let opts = DecayOptions { samples: 201, ..Default::default() };
        let tr = evolve_two_level(&AtomicState::populations(1.0).unwrap(), &g, 60.0, &opts, &[]).unwrap();
        prop_assert!(tr.gamma_eff[0] > 1.0);
        let last = tr.gamma_eff.iter().rev().find(|v| v.is_finite()).unwrap();
        prop_assert!(*last < 1.0);
        prop_assert!(tr.rho_aa.iter().all(|&p| (0.0..=1.0).contains(&p)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn kernel_spectrum_and_mode(kappa in 0.05f64..60.0, n in 32usize..120) {
        let k = build_slab_kernel(1.0, kappa, n).unwrap();
        let r = escape_rate(&k).unwrap();
        prop_assert!(r.lambda_max > 0.0 && r.lambda_max < 1.0);
        prop_assert!(r.gamma_esc_numeric > 0.0 && r.gamma_esc_numeric < 1.0);
        let m = &r.fundamental_mode;
        prop_assert!(m.iter().all(|&v| v > 0.0));
        for i in 0..n {
            prop_assert!((m[i] - m[n - 1 - i]).abs() < 1e-9);
        }
    }

    #[test]
    fn linear_trapping_stays_positive(kappa in 0.1f64..30.0, seed in 0u64..1000) {
        let n = 48;
        let k = build_slab_kernel(1.0, kappa, n).unwrap();
        let init: Vec<f64> = (0..n).map(|i| if (i as u64 * 7 + seed) % 5 == 0 { 1.0 } else { 0.0 }).collect();
        let times = [0.5, 2.0, 8.0];
        let tr = evolve_linear_trapping(&k, &init, 8.0, &times, &OdeControl::default()).unwrap();
        for f in &tr.fields {
            prop_assert!(f.iter().all(|&v| v >= -1e-12));
        }
    }

    #[test]
    fn stationary_roots_satisfy_fixed_point(c in 0.0f64..12.0, omega in 0.0f64..6.0, r in 0.0f64..200.0, gs in 0.0f64..2.0) {
        let cfg = BistabilityConfig::new(c, r, gs, CollectiveMode::FixedPoint);
        for s in stationary_states(omega, 0.0, &cfg).unwrap() {
            let g = collective_rate_fixed_point(&s, omega, &cfg).unwrap();
            prop_assert!(g >= 0.0 && g.is_finite());
        }
    }
}

#[test]
fn state_validator() {
    assert!(AtomicState::new(1.0 + 2e-9, Complex64::new(0.0, 0.0)).is_err());
    assert!(AtomicState::new(1.0 + 5e-10, Complex64::new(0.0, 0.0)).is_ok());
    assert!(AtomicState::new(0.5, Complex64::new(0.5, 0.01)).is_err());
    assert!(AtomicState::new(0.5, Complex64::new(0.5, 0.0)).is_ok());
}
