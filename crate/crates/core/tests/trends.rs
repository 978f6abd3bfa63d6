use std::f64::consts::{FRAC_PI_2, PI};

use orbitcov_core::coverage::{combine_orbit_coverages, max_sir_curve, sir_curve};
use orbitcov_core::montecarlo::empirical_sir_coverage;
use orbitcov_core::{
    db_to_linear, max_sir_coverage_conditional, sir_coverage, sir_coverage_conditional,
    visible_arc_length, ChannelParams, ConstellationSpec, McConfig, OrbitGeometry,
    VisibilityWindow,
};
use proptest::prelude::*;

const RE: f64 = 6371.0;

fn setup(altitude: f64, theta: f64) -> (OrbitGeometry, VisibilityWindow) {
    let orbit = OrbitGeometry::new(RE, altitude, theta, 0.0).unwrap();
    let window = VisibilityWindow::for_orbit(&orbit, 10f64.to_radians()).unwrap();
    (orbit, window)
}

fn grid() -> Vec<f64> {
    (-2..=6).map(|k| 5.0 * k as f64).collect()
}

#[test]
fn arc_shrinks_with_elevation_and_peaks_overhead() {
    for k in 0..=36 {
        let theta = PI * k as f64 / 36.0;
        let orbit = OrbitGeometry::new(RE, 500.0, theta, 0.0).unwrap();
        let lengths: Vec<f64> = [10.0, 20.0, 30.0]
            .iter()
            .map(|d: &f64| {
                let w = VisibilityWindow::for_orbit(&orbit, d.to_radians()).unwrap();
                visible_arc_length(&orbit, &w)
            })
            .collect();
        assert!(lengths[0] >= lengths[1] && lengths[1] >= lengths[2]);
        let w = VisibilityWindow::for_orbit(&orbit, 10f64.to_radians()).unwrap();
        let top = visible_arc_length(&orbit.with_theta(FRAC_PI_2).unwrap(), &w);
        assert!(lengths[0] <= top);
    }
}

#[test]
fn steeper_path_loss_improves_coverage() {
    let (orbit, window) = setup(500.0, FRAC_PI_2);
    let values: Vec<f64> = [2.0, 3.0, 4.0]
        .iter()
        .map(|&a| {
            let ch = ChannelParams::new(a, 1.0, 10f64.powf(-1.3)).unwrap();
            sir_coverage(&orbit, &window, 0.005, &ch, db_to_linear(10.0)).unwrap()
        })
        .collect();
    assert!(values[0] < values[1] && values[1] < values[2], "{values:?}");
}

#[test]
fn larger_shape_helps_at_low_and_hurts_at_high_thresholds() {
    let (orbit, window) = setup(500.0, FRAC_PI_2);
    let at = |m: f64, db: f64| {
        let ch = ChannelParams::new(2.0, m, 10f64.powf(-1.3)).unwrap();
        sir_coverage(&orbit, &window, 0.005, &ch, db_to_linear(db)).unwrap()
    };
    assert!(at(1.0, -5.0) < at(2.0, -5.0) && at(2.0, -5.0) < at(3.0, -5.0));
    assert!(at(1.0, 15.0) > at(2.0, 15.0) && at(2.0, 15.0) > at(3.0, 15.0));
}

#[test]
fn sparser_orbits_win_at_high_thresholds() {
    let (orbit, window) = setup(500.0, FRAC_PI_2);
    let ch = ChannelParams::default();
    let g = db_to_linear(10.0);
    let sparse = sir_coverage(&orbit, &window, 0.001, &ch, g).unwrap();
    let dense = sir_coverage(&orbit, &window, 0.01, &ch, g).unwrap();
    assert!(sparse > dense);
    let cfg = McConfig::new(100_000, 2).unwrap();
    let mc_sparse = empirical_sir_coverage(&orbit, &window, 0.001, &ch, &[10.0], &cfg).unwrap();
    let mc_dense = empirical_sir_coverage(&orbit, &window, 0.01, &ch, &[10.0], &cfg).unwrap();
    assert!(mc_sparse.unconditional.values[0] > mc_dense.unconditional.values[0]);
    // Very sparse orbits lose at low thresholds because nothing is visible.
    let starved = sir_coverage(&orbit, &window, 0.0005, &ch, db_to_linear(-10.0)).unwrap();
    assert!(starved < sir_coverage(&orbit, &window, 0.005, &ch, db_to_linear(-10.0)).unwrap());
}

#[test]
fn lower_shells_cover_better() {
    let ch = ChannelParams::default();
    let curves: Vec<Vec<f64>> = [500.0, 1000.0, 1500.0]
        .iter()
        .map(|&h| {
            let (orbit, window) = setup(h, FRAC_PI_2);
            sir_curve(&orbit, &window, 0.005, &ch, &grid(), false).unwrap().values
        })
        .collect();
    for i in 0..grid().len() {
        assert!(curves[0][i] >= curves[1][i] && curves[1][i] >= curves[2][i], "γ index {i}");
    }
}

#[test]
fn zenith_orbit_leads_until_lone_satellites_dominate() {
    // Overhead orbits win wherever coverage is driven by the serving distance.
    // At high thresholds coverage comes mostly from trials with a single
    // visible satellite (no interference), which are likelier on the shorter
    // visible arc of a tilted orbit, so the order flips.
    let ch = ChannelParams::default();
    let (zenith, window) = setup(500.0, FRAC_PI_2);
    for tilt in [PI / 18.0, -PI / 18.0] {
        let (tilted, _) = setup(500.0, FRAC_PI_2 + tilt);
        for db in [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0] {
            let g = db_to_linear(db);
            assert!(
                sir_coverage_conditional(&zenith, &window, 0.005, &ch, g).unwrap()
                    > sir_coverage_conditional(&tilted, &window, 0.005, &ch, g).unwrap()
            );
        }
        for db in [20.0, 25.0, 30.0] {
            let g = db_to_linear(db);
            assert!(
                sir_coverage_conditional(&zenith, &window, 0.005, &ch, g).unwrap()
                    < sir_coverage_conditional(&tilted, &window, 0.005, &ch, g).unwrap()
            );
        }
    }
    let cfg = McConfig::new(1_000_000, 40).unwrap();
    let (tilted, _) = setup(500.0, FRAC_PI_2 + PI / 18.0);
    let z = empirical_sir_coverage(&zenith, &window, 0.005, &ch, &[20.0], &cfg).unwrap();
    let t = empirical_sir_coverage(&tilted, &window, 0.005, &ch, &[20.0], &cfg).unwrap();
    let z_ci = z.conditional.intervals.unwrap()[0];
    let t_ci = t.conditional.intervals.unwrap()[0];
    assert!(z_ci.1 < t_ci.0, "{z_ci:?} vs {t_ci:?}");
}

#[test]
fn more_orbits_never_hurt() {
    let ch = ChannelParams::default();
    let window = setup(500.0, FRAC_PI_2).1;
    let orbits: Vec<_> = (0..4)
        .map(|k| (OrbitGeometry::new(RE, 500.0, FRAC_PI_2, k as f64 * PI / 4.0).unwrap(), 0.005))
        .collect();
    let mut last = vec![0.0; grid().len()];
    for n in 1..=4 {
        let spec = ConstellationSpec::new(orbits[..n].to_vec(), window, ch).unwrap();
        let curve = max_sir_curve(&spec, &grid(), true).unwrap();
        for (a, b) in curve.values.iter().zip(&last) {
            assert!(a >= b);
        }
        last = curve.values;
    }
}

#[test]
fn tilted_diversity_beats_single_zenith_orbit() {
    let ch = ChannelParams::default();
    let window = setup(500.0, FRAC_PI_2).1;
    let tilted: Vec<_> = (0..3)
        .map(|k| {
            let o = OrbitGeometry::new(RE, 500.0, FRAC_PI_2 + PI / 18.0, 2.0 * PI * k as f64 / 3.0);
            (o.unwrap(), 0.005)
        })
        .collect();
    let three = ConstellationSpec::new(tilted, window, ch).unwrap();
    let one = ConstellationSpec::new(vec![(setup(500.0, FRAC_PI_2).0, 0.005)], window, ch).unwrap();
    let g = db_to_linear(10.0);
    assert!(
        max_sir_coverage_conditional(&three, g).unwrap()
            > max_sir_coverage_conditional(&one, g).unwrap()
    );
}

proptest! {
    #[test]
    fn appending_an_orbit_never_lowers_coverage(
        ps in proptest::collection::vec(0.0..=1.0f64, 1..8),
        extra in 0.0..=1.0f64,
    ) {
        let base = combine_orbit_coverages(&ps);
        let mut more = ps.clone();
        more.push(extra);
        prop_assert!(combine_orbit_coverages(&more) >= base - 1e-15);
        prop_assert!((0.0..=1.0).contains(&base));
    }

    #[test]
    fn coverage_curves_are_valid(theta in 1.35..1.79f64, log_lambda in -3.5..-1.5f64, m in 1usize..4) {
        let (orbit, window) = setup(500.0, theta);
        let ch = ChannelParams::new(2.0, m as f64, 10f64.powf(-1.3)).unwrap();
        let curve = sir_curve(&orbit, &window, 10f64.powf(log_lambda), &ch, &grid(), false).unwrap();
        prop_assert!(curve.is_valid(), "{:?}", curve.values);
    }
}
