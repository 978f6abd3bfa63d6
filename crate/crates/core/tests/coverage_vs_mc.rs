use std::f64::consts::{FRAC_PI_2, PI};

use orbitcov_core::coverage::{max_sir_curve, sir_curve, snr_curve};
use orbitcov_core::montecarlo::{
    empirical_max_sir_coverage, empirical_sir_coverage, empirical_snr_sinr_coverage,
    empirical_visibility, empirical_visible_count, sample_orbit,
};
use orbitcov_core::{
    db_to_linear, log_laplace, sir_coverage_conditional, visible_arc_length, ChannelParams,
    ConstellationSpec, LinkBudget, McConfig, NearestDistanceLaw, OrbitGeometry, QuadratureSpec,
    RandomSource, VisibilityWindow,
};

const RE: f64 = 6371.0;
const LAMBDA: f64 = 0.005;

fn setup(theta: f64, phi: f64) -> (OrbitGeometry, VisibilityWindow) {
    let orbit = OrbitGeometry::new(RE, 500.0, theta, phi).unwrap();
    let window = VisibilityWindow::for_orbit(&orbit, 10f64.to_radians()).unwrap();
    (orbit, window)
}

fn grid() -> Vec<f64> {
    (-2..=6).map(|k| 5.0 * k as f64).collect()
}

#[test]
fn void_probability_and_visible_count() {
    let cfg = McConfig::new(1_000_000, 17).unwrap();
    for (theta, lambda) in [(FRAC_PI_2, 0.001), (FRAC_PI_2 + PI / 36.0, 0.0001)] {
        let (orbit, window) = setup(theta, 0.3);
        let l = visible_arc_length(&orbit, &window);
        let vis = empirical_visibility(&orbit, &window, lambda, &cfg).unwrap();
        assert!(((1.0 - vis.estimate()) - (-lambda * l).exp()).abs() <= 0.002);
        let count = empirical_visible_count(&orbit, &window, lambda, &cfg).unwrap();
        assert!((count.mean - lambda * l).abs() <= 4.0 * count.std_error);
    }
}

#[test]
fn full_orbit_snapshots_agree_with_visible_arc() {
    let (orbit, window) = setup(FRAC_PI_2 - PI / 36.0, 1.0);
    let mut rng = RandomSource::new(2);
    let trials = 20_000;
    let mut visible = 0usize;
    let mut total = 0usize;
    for _ in 0..trials {
        let snap = sample_orbit(&orbit, &window, 0.002, &mut rng).unwrap();
        total += snap.len();
        visible += snap.visible_count();
        for ((p, d), v) in snap.positions.iter().zip(&snap.distances).zip(&snap.visible) {
            assert_eq!(*v, p[2] > window.r_a() || (p[2] - window.r_a()).abs() < 1e-9);
            if *v {
                assert!(*d <= window.d_max() * (1.0 + 1e-12));
            }
        }
    }
    let mean_total = total as f64 / trials as f64;
    let expected_total = 2.0 * PI * orbit.radius() * 0.002;
    assert!((mean_total - expected_total).abs() < 4.0 * (expected_total / trials as f64).sqrt());
    let mean_visible = visible as f64 / trials as f64;
    let expected = 0.002 * visible_arc_length(&orbit, &window);
    assert!((mean_visible - expected).abs() < 4.0 * (expected / trials as f64).sqrt());
}

#[test]
fn sir_matches_simulation_for_integer_shapes() {
    let (orbit, window) = setup(FRAC_PI_2, 0.0);
    let cfg = McConfig::new(100_000, 1).unwrap();
    for (alpha, m) in [(2.0, 1.0), (3.0, 1.0), (2.0, 3.0)] {
        let ch = ChannelParams::new(alpha, m, 10f64.powf(-1.3)).unwrap();
        let analytic = sir_curve(&orbit, &window, LAMBDA, &ch, &grid(), true).unwrap();
        let mc = empirical_sir_coverage(&orbit, &window, LAMBDA, &ch, &grid(), &cfg).unwrap();
        let gap = analytic.max_abs_diff(&mc.conditional);
        assert!(gap <= 0.015, "α={alpha} m={m}: {gap}");
    }
}

#[test]
fn single_points_at_full_budget() {
    let (orbit, window) = setup(FRAC_PI_2, 0.0);
    let cfg = McConfig::new(1_000_000, 8).unwrap();
    let ch = ChannelParams::default();
    let mc = empirical_sir_coverage(&orbit, &window, LAMBDA, &ch, &[0.0], &cfg).unwrap();
    let exact = sir_coverage_conditional(&orbit, &window, LAMBDA, &ch, 1.0).unwrap();
    assert!((mc.conditional.values[0] - exact).abs() <= 0.01);

    let ch = ChannelParams::new(2.0, 3.0, 10f64.powf(-1.3)).unwrap();
    let mc = empirical_sir_coverage(&orbit, &window, LAMBDA, &ch, &[5.0], &cfg).unwrap();
    let exact = sir_coverage_conditional(&orbit, &window, LAMBDA, &ch, db_to_linear(5.0)).unwrap();
    assert!((mc.conditional.values[0] - exact).abs() <= 0.015);
}

#[test]
fn rayleigh_coverage_is_the_averaged_transform() {
    let (orbit, window) = setup(FRAC_PI_2 + 0.03, 0.0);
    let ch = ChannelParams::default();
    let law = NearestDistanceLaw::new(orbit, window, LAMBDA).unwrap();
    for db in [-5.0, 5.0, 15.0] {
        let g = db_to_linear(db);
        let direct = law
            .expectation(
                |_, r| Ok(log_laplace(&orbit, &window, LAMBDA, &ch, r, g * r * r)?.exp()),
                &QuadratureSpec::default(),
            )
            .unwrap();
        let generic = sir_coverage_conditional(&orbit, &window, LAMBDA, &ch, g).unwrap();
        assert!((direct - generic).abs() < 1e-12);
    }
}

#[test]
fn non_integer_shape_is_simulated() {
    let (orbit, window) = setup(FRAC_PI_2, 0.0);
    let ch = ChannelParams::new(2.0, 0.7, 10f64.powf(-1.3)).unwrap();
    let cfg = McConfig::new(20_000, 4).unwrap();
    let mc = empirical_sir_coverage(&orbit, &window, LAMBDA, &ch, &grid(), &cfg).unwrap();
    assert!(mc.conditional.is_valid());
    assert!(mc.unconditional.is_valid());
    assert!(sir_curve(&orbit, &window, LAMBDA, &ch, &grid(), true).is_err());
}

#[test]
fn snr_matches_simulation_and_bounds_sinr() {
    let (orbit, window) = setup(FRAC_PI_2, 0.0);
    let ch = ChannelParams::default();
    let cfg = McConfig::new(1_000_000, 12).unwrap();
    let mut gaps = Vec::new();
    for bw in [1e7, 1e8, 1e9] {
        let budget = LinkBudget::new(40.0, 30.0, -174.0, 11.0, bw).unwrap();
        let analytic = snr_curve(&orbit, &window, LAMBDA, &ch, &budget, &grid(), true).unwrap();
        let mc = empirical_snr_sinr_coverage(&orbit, &window, LAMBDA, &ch, &budget, &grid(), &cfg)
            .unwrap();
        assert!(analytic.max_abs_diff(&mc.snr.conditional) <= 0.01, "bw={bw}");
        assert_eq!(analytic.metadata.distance_unit.as_deref(), Some("m"));
        let sir = &mc.sir.conditional.values;
        let sinr = &mc.sinr.conditional.values;
        let snr = &mc.snr.conditional.values;
        for i in 0..sir.len() {
            assert!(sinr[i] <= sir[i] && sinr[i] <= snr[i]);
        }
        gaps.push(sir.iter().zip(sinr).map(|(a, b)| a - b).collect::<Vec<_>>());
    }
    for i in 0..gaps[0].len() {
        assert!(gaps[0][i] <= gaps[1][i] && gaps[1][i] <= gaps[2][i]);
    }
}

#[test]
fn noiseless_link_always_covers() {
    let (orbit, window) = setup(FRAC_PI_2, 0.0);
    let quiet = LinkBudget::new(40.0, 30.0, -500.0, 0.0, 1e6).unwrap();
    let cfg = McConfig::new(10_000, 6).unwrap();
    let mc = empirical_snr_sinr_coverage(
        &orbit,
        &window,
        LAMBDA,
        &ChannelParams::default(),
        &quiet,
        &[0.0, 30.0],
        &cfg,
    )
    .unwrap();
    assert_eq!(mc.snr.conditional.values, vec![1.0, 1.0]);
}

fn constellation(n: usize, theta: f64) -> ConstellationSpec {
    let orbits: Vec<_> = (0..n)
        .map(|k| (OrbitGeometry::new(RE, 500.0, theta, 2.0 * PI * k as f64 / n as f64).unwrap(), LAMBDA))
        .collect();
    let window = VisibilityWindow::for_orbit(&orbits[0].0, 10f64.to_radians()).unwrap();
    ConstellationSpec::new(orbits, window, ChannelParams::default()).unwrap()
}

#[test]
fn max_sir_matches_simulation() {
    let cfg = McConfig::new(100_000, 9).unwrap();
    for n in [2, 3] {
        let spec = constellation(n, FRAC_PI_2);
        let analytic = max_sir_curve(&spec, &grid(), true).unwrap();
        let mc = empirical_max_sir_coverage(&spec, &grid(), &cfg).unwrap();
        assert!(analytic.max_abs_diff(&mc.all_visible.conditional) <= 0.015, "N={n}");
        // Conditioning on any orbit can only lower the maximum.
        for (a, b) in mc.any_visible.values.iter().zip(&mc.all_visible.conditional.values) {
            assert!(a <= &(b + 0.01));
        }
    }
}

#[test]
fn one_orbit_max_sir_simulation_is_the_single_orbit_simulation() {
    let spec = constellation(1, FRAC_PI_2);
    let (orbit, _) = spec.orbits()[0];
    let cfg = McConfig::new(30_000, 10).unwrap();
    let single = empirical_sir_coverage(&orbit, spec.window(), LAMBDA, spec.channel(), &grid(), &cfg)
        .unwrap();
    let multi = empirical_max_sir_coverage(&spec, &grid(), &cfg).unwrap();
    assert_eq!(single.conditional.values, multi.all_visible.conditional.values);
}

#[test]
fn simulation_is_invariant_in_azimuth() {
    let cfg_a = McConfig::new(100_000, 30).unwrap();
    let cfg_b = McConfig::new(100_000, 31).unwrap();
    let ch = ChannelParams::default();
    let (o1, w) = setup(FRAC_PI_2 - PI / 36.0, 0.0);
    let (o2, _) = setup(FRAC_PI_2 - PI / 36.0, 2.5);
    let a = empirical_sir_coverage(&o1, &w, LAMBDA, &ch, &grid(), &cfg_a).unwrap();
    let b = empirical_sir_coverage(&o2, &w, LAMBDA, &ch, &grid(), &cfg_b).unwrap();
    assert!(a.conditional.max_abs_diff(&b.conditional) <= 0.015);
}
