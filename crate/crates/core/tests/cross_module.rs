//! Properties that span several modules, checked through the public API.

use critlab::brownian::{sample_loop_soup, TimeCutoff};
use critlab::cle::{boundaries_of, Region};
use critlab::lattice::{Graph, LatticeKind, Shape};
use critlab::loop_models::enumerate_saw;
use critlab::percolation::{estimate_crossing, rhombus_crossing};
use critlab::sle::{cardy_g, compute_trace, DrivingFunction};
use critlab::spin_fk::{es_spin_marginal, p_to_beta, potts_exact, DEFAULT_MAX_STATES};
use critlab::{Point, RngStream};
use proptest::prelude::*;

#[test]
fn honeycomb_walk_counts() {
    let t = enumerate_saw(LatticeKind::Hexagonal, 10).unwrap();
    assert_eq!(&t.walks[1..=10], &[3, 6, 12, 24, 48, 90, 174, 336, 648, 1218]);
    let sq = enumerate_saw(LatticeKind::Square, 6).unwrap();
    assert_eq!(&sq.walks[1..=6], &[4, 12, 36, 100, 284, 780]);
}

#[test]
fn zero_driving_traces_the_vertical_slit() {
    let tr = compute_trace(&DrivingFunction::zero(1.0, 400).unwrap()).unwrap();
    for (t, z) in tr.times.iter().zip(&tr.points) {
        assert!((z - Point::new(0.0, 2.0 * t.sqrt())).norm() < 1e-9, "t = {t}: {z}");
    }
}

#[test]
fn rhombus_crossing_is_symmetric_at_one_half() {
    let (d, ev) = rhombus_crossing(10).unwrap();
    let e = estimate_crossing(&d, 0.5, &ev, 4000, RngStream::new(3, 0)).unwrap();
    assert!((e.mean - 0.5).abs() < 4.0 * e.std_error, "{e:?}");
}

#[test]
fn soup_boundaries_are_simple() {
    let d = Shape::unit_square();
    let cutoff = TimeCutoff::new(0.002, 0.05).unwrap();
    for k in 0..5 {
        let soup = sample_loop_soup(&d, 0.5, cutoff, 24, &mut RngStream::new(11, k).rng()).unwrap();
        let lines: Vec<&[Point]> = soup.loops.iter().map(|l| l.points()).collect();
        boundaries_of(&lines, Region::from(d), 0.01).unwrap().validate().unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cardy_reflects_on_the_unit_interval(z in 0.0f64..1.0, kappa in 4.2f64..7.9) {
        let s = cardy_g(z, kappa).unwrap() + cardy_g(1.0 - z, kappa).unwrap();
        prop_assert!((s - 1.0).abs() < 1e-9, "{}", s);
    }

    #[test]
    fn cardy_decreases_beyond_one(z in 1.0f64..1e3, kappa in 4.2f64..7.9) {
        let (a, b) = (cardy_g(z, kappa).unwrap(), cardy_g(1.5 * z, kappa).unwrap());
        prop_assert!(b < a && a <= 1.0 + 1e-12 && b > 0.0);
    }

    #[test]
    fn edwards_sokal_marginal_is_potts(n in 3usize..6, p in 0.05f64..0.95, q in 2u32..4) {
        let g = Graph::cycle(n);
        let es = es_spin_marginal(&g, p, q, DEFAULT_MAX_STATES).unwrap();
        let potts = potts_exact(&g, q, p_to_beta(p), &vec![None; n], DEFAULT_MAX_STATES).unwrap();
        for (a, b) in es.iter().zip(&potts.probs) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
