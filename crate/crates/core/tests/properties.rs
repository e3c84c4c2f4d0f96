use proptest::prelude::*;

use superrad::analytic::{g_spe_coincident, g_tls_coincident, peak_fwhm, visibility_spe, visibility_tls};
use superrad::estimator::visibility;
use superrad::quantum::{g_spe_permanent, g_spe_statevector};
use superrad::stochastic::{gaussian_moment_oracle, mc_correlation};
use superrad::{DetectorSet, EmitterChain};

fn angle() -> impl Strategy<Value = f64> {
    -1.5f64..1.5
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn engines_agree_on_arbitrary_detectors(
        n in 1usize..=6,
        kd in 0.1f64..7.0,
        angles in prop::collection::vec(angle(), 1..=6),
    ) {
        let chain = EmitterChain::spe(n, kd).unwrap();
        let d = DetectorSet::new(angles).unwrap();
        let a = g_spe_statevector(&chain, &d).unwrap();
        let b = g_spe_permanent(&chain, &d).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn detector_order_does_not_matter(
        n in 2usize..=5,
        kd in 0.1f64..7.0,
        mut angles in prop::collection::vec(angle(), 2..=5),
    ) {
        let chain = EmitterChain::spe(n, kd).unwrap();
        let a = g_spe_statevector(&chain, &DetectorSet::new(angles.clone()).unwrap()).unwrap();
        angles.reverse();
        let b = g_spe_statevector(&chain, &DetectorSet::new(angles).unwrap()).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
    }

    #[test]
    fn exchange_of_coincident_angles(n in 2usize..=8, m in 1usize..=8, kd in 0.1f64..7.0, t1 in angle(), t2 in angle()) {
        let chain = EmitterChain::tls(n, kd, 1.0).unwrap();
        let a = g_tls_coincident(&chain, m, t1, t2, false).unwrap();
        let b = g_tls_coincident(&chain, m, t2, t1, false).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a);
        if m <= n {
            let spe = EmitterChain::spe(n, kd).unwrap();
            let a = g_spe_coincident(&spe, m, t1, t2).unwrap();
            let b = g_spe_coincident(&spe, m, t2, t1).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }
    }

    #[test]
    fn statevector_tracks_closed_form(n in 2usize..=7, kd in 0.1f64..7.0, t1 in angle(), t2 in angle()) {
        let m = n;
        let chain = EmitterChain::spe(n, kd).unwrap();
        let exact = |a: f64, b: f64| g_spe_statevector(&chain, &DetectorSet::coincident(m, a, b).unwrap()).unwrap();
        let closed = |a: f64, b: f64| g_spe_coincident(&chain, m, a, b).unwrap();
        let ratio = exact(t1, t1) / closed(t1, t1);
        prop_assert!((exact(t1, t2) - ratio * closed(t1, t2)).abs() <= 1e-8 * ratio);
    }

    #[test]
    fn thermal_oracle_matches_closed_form(n in 1usize..=6, m in 1usize..=5, kd in 0.1f64..7.0, t1 in angle(), t2 in angle()) {
        let chain = EmitterChain::tls(n, kd, 1.0).unwrap();
        let oracle = gaussian_moment_oracle(&chain, m, t1, t2).unwrap();
        let closed = g_tls_coincident(&chain, m, t1, t2, true).unwrap();
        prop_assert!((oracle - closed).abs() <= 1e-9 * closed);
    }

    #[test]
    fn visibility_ordering(n in 2usize..=40, m in 2usize..=40) {
        prop_assume!(m <= n);
        let v_spe = visibility_spe(n, m).unwrap();
        let v_tls = visibility_tls(m).unwrap();
        prop_assert!(v_tls <= v_spe + 1e-15);
        prop_assert!(v_spe <= 1.0 + 1e-15);
    }

    #[test]
    fn width_scales_inversely(n in 2usize..=64, kd in 0.1f64..20.0) {
        let w = peak_fwhm(&EmitterChain::spe(n, kd).unwrap()).unwrap();
        let w2 = peak_fwhm(&EmitterChain::spe(2 * n, kd).unwrap()).unwrap();
        prop_assert!((w - 2.0 * w2).abs() <= 1e-12 * w);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn intensity_scale_does_not_change_normalized_moments(n in 1usize..=4, m in 1usize..=4, seed in any::<u64>()) {
        let grid = [-0.7, -0.2, 0.0, 0.4, 1.1];
        let kd = std::f64::consts::PI;
        let base = mc_correlation(&EmitterChain::tls(n, kd, 1.0).unwrap(), m, 0.1, &grid, 400, seed).unwrap();
        let four = mc_correlation(&EmitterChain::tls(n, kd, 4.0).unwrap(), m, 0.1, &grid, 400, seed).unwrap();
        prop_assert_eq!(base.values(), four.values());
        let odd = mc_correlation(&EmitterChain::tls(n, kd, 3.7).unwrap(), m, 0.1, &grid, 400, seed).unwrap();
        for (a, b) in base.values().iter().zip(odd.values()) {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
        let cls = mc_correlation(&EmitterChain::cls(n, kd, 1.0).unwrap(), m, 0.1, &grid, 400, seed).unwrap();
        let cls2 = mc_correlation(&EmitterChain::cls(n, kd, 2.0).unwrap(), m, 0.1, &grid, 400, seed).unwrap();
        prop_assert_eq!(cls.values(), cls2.values());
    }

    #[test]
    fn monte_carlo_is_consistent_with_thermal_oracle(n in 2usize..=4, kd in 1.0f64..6.0, seed in any::<u64>()) {
        let m = 2;
        let grid = [-0.9, -0.3, 0.0, 0.5];
        let chain = EmitterChain::tls(n, kd, 1.0).unwrap();
        let curve = mc_correlation(&chain, m, 0.0, &grid, 20_000, seed).unwrap();
        let stderr = curve.stderr().unwrap();
        for ((&t2, &g), &se) in grid.iter().zip(curve.values()).zip(stderr) {
            let expected = gaussian_moment_oracle(&chain, m, 0.0, t2).unwrap();
            // Generous bound: 8 standard errors on 4 points over 8 cases.
            prop_assert!((g - expected).abs() <= 8.0 * se + 1e-12, "θ₂={t2}: {g} vs {expected} ± {se}");
        }
        prop_assert!(visibility(&curve) >= 0.0);
    }
}
