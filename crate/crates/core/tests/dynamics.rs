mod common;

use std::f64::consts::{PI, SQRT_2};

use common::random_oscillator;
use gacpath::dynamics::{
    arc_duration, fit_centered_form, rk4_sample, DynamicsError, Mat2, Orientation, Oscillator,
};
use gacpath::gac::Point;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn random_point(rng: &mut StdRng) -> Point {
    let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    Point::new(t.cos(), t.sin()) * rng.gen_range(0.5..20.0)
}

fn oscillator() -> impl Strategy<Value = Oscillator> {
    (-2.0f64..2.0, -3.0f64..3.0, -3.0f64..3.0).prop_filter_map("not oscillatory", |(p, q, r)| {
        let m = Mat2::new(p, q, r, -p);
        (m.determinant() > 0.05).then(|| Oscillator::new(m).unwrap())
    })
}

#[test]
fn rk4_conserves_the_form_over_a_period() {
    let mut rng = StdRng::seed_from_u64(1);
    for _ in 0..50 {
        let osc = Oscillator::new(random_oscillator(&mut rng)).unwrap();
        let x0 = random_point(&mut rng);
        let n = osc.samples_per_period(1e-3);
        let s = rk4_sample(osc.matrix(), x0, 1e-3, n).unwrap();
        let v0 = osc.form().value(x0);
        let worst = s
            .points
            .iter()
            .map(|p| (osc.form().value(*p) - v0).abs() / v0)
            .fold(0.0, f64::max);
        assert!(worst <= 1e-6, "drift {worst}");
    }
}

#[test]
fn fitted_form_agrees_with_analytic_form() {
    let mut rng = StdRng::seed_from_u64(2);
    for _ in 0..50 {
        let osc = Oscillator::new(random_oscillator(&mut rng)).unwrap();
        let x0 = random_point(&mut rng);
        let s = rk4_sample(osc.matrix(), x0, 1e-3, osc.samples_per_period(1e-3)).unwrap();
        let fit = fit_centered_form(&s).unwrap();
        let exact = osc.form().normalized_at(x0).m;
        let err = (fit - exact).abs().max() / exact.abs().max();
        assert!(err <= 1e-5, "fit error {err}");
    }
}

#[test]
fn closed_form_flow_matches_rk4() {
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..20 {
        let osc = Oscillator::new(random_oscillator(&mut rng)).unwrap();
        let x0 = random_point(&mut rng);
        let s = rk4_sample(osc.matrix(), x0, 1e-3, 2001).unwrap();
        for (t, p) in s.times.iter().zip(&s.points).step_by(250) {
            let exact = osc.flow(x0, *t);
            assert!((exact - p).norm() <= 1e-8 * (1.0 + x0.norm()));
        }
    }
}

#[test]
fn quarter_turn_durations_of_the_first_family() {
    let a1 = Mat2::new(0.0, 1.0, -2.0, 0.0);
    let osc = Oscillator::new(a1).unwrap();
    assert_eq!(osc.orientation(), Orientation::Clockwise);
    let (from, r) = (Point::new(0.0, -33f64.sqrt()), (33.0f64 / 2.0).sqrt());
    let q = PI / (2.0 * SQRT_2);
    assert!((arc_duration(&a1, from, Point::new(-r, 0.0)).unwrap() - q).abs() < 1e-12);
    assert!((arc_duration(&a1, from, Point::new(r, 0.0)).unwrap() - 3.0 * q).abs() < 1e-12);
}

#[test]
fn non_oscillatory_matrices_are_rejected() {
    for m in [
        Mat2::new(1.0, 1.0, -2.0, 1.0),
        Mat2::new(0.0, 1.0, 2.0, 0.0),
        Mat2::zeros(),
    ] {
        assert!(matches!(
            Oscillator::new(m),
            Err(DynamicsError::NotOscillatory { .. })
        ));
    }
}

proptest! {
    #[test]
    fn exact_flow_stays_on_its_orbit(osc in oscillator(), x in -10.0f64..10.0, y in 0.1f64..10.0, t in 0.0f64..20.0) {
        let p = Point::new(x, y);
        let v = osc.form().value(p);
        prop_assert!((osc.form().value(osc.flow(p, t)) - v).abs() <= 1e-10 * v);
    }

    #[test]
    fn flowing_for_the_arc_duration_arrives(osc in oscillator(), x in -10.0f64..10.0, y in 0.1f64..10.0, t in 0.01f64..1.0) {
        let p = Point::new(x, y);
        let tt = t * osc.period();
        let q = osc.flow(p, tt);
        let d = osc.arc_duration(p, q).unwrap();
        prop_assert!(d > 0.0 && d <= osc.period());
        prop_assert!((osc.flow(p, d) - q).norm() <= 1e-8 * (1.0 + p.norm()));
        prop_assert!((d - tt).abs() <= 1e-8 * osc.period());
    }

    #[test]
    fn durations_add_along_the_orbit(osc in oscillator(), x in -10.0f64..10.0, y in 0.1f64..10.0, s in 0.01f64..0.99, t in 0.01f64..0.99) {
        let p = Point::new(x, y);
        let q = osc.flow(p, s * osc.period());
        let r = osc.flow(q, t * osc.period());
        let sum = osc.arc_duration(p, q).unwrap() + osc.arc_duration(q, r).unwrap();
        let direct = osc.arc_duration(p, r).unwrap();
        let gap = (sum - direct).rem_euclid(osc.period());
        prop_assert!(gap.min(osc.period() - gap) <= 1e-8 * osc.period());
    }

    #[test]
    fn full_turn_returns_to_start(osc in oscillator(), x in -10.0f64..10.0, y in 0.1f64..10.0) {
        let p = Point::new(x, y);
        prop_assert!((osc.flow(p, osc.period()) - p).norm() <= 1e-9 * (1.0 + p.norm()));
        prop_assert!((osc.arc_duration(p, p).unwrap() - osc.period()).abs() <= 1e-12 * osc.period());
    }
}
