#![allow(dead_code)]

use std::f64::consts::TAU;

use gacpath::dynamics::{conserved_form, Mat2};
use gacpath::gac::{conic_params, Conic, Point};
use rand::rngs::StdRng;
use rand::Rng;

/// Random oscillatory matrix `[[p, q], [r, −p]]` with `det > 0`.
pub fn random_oscillator(rng: &mut StdRng) -> Mat2 {
    loop {
        let (p, q, r) = (
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
        );
        let m = Mat2::new(p, q, r, -p);
        if m.determinant() > 0.2 {
            return m;
        }
    }
}

/// Orbit conic of `a` through `p`.
pub fn orbit_conic(a: &Mat2, p: Point) -> Conic {
    let form = conserved_form(a).unwrap();
    form.conic(form.value(p))
}

/// Common points of two centred ellipses, found by sampling the boundary of
/// the first and bisecting sign changes of the second.
pub fn brute_force_intersections(e1: &Conic, e2: &Conic) -> Vec<Point> {
    let p = conic_params(&e1.matrix()).unwrap();
    let n = 4096;
    let f = |t: f64| e2.eval(p.boundary_point(t));
    let mut out = Vec::new();
    for i in 0..n {
        let (mut lo, mut hi) = (i as f64 * TAU / n as f64, (i + 1) as f64 * TAU / n as f64);
        let (mut flo, fhi) = (f(lo), f(hi));
        if flo == 0.0 {
            out.push(p.boundary_point(lo));
            continue;
        }
        if flo * fhi > 0.0 {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = f(mid);
            if fm * flo > 0.0 {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        out.push(p.boundary_point(0.5 * (lo + hi)));
    }
    out
}

/// Largest distance from each oracle point to its nearest computed point,
/// or infinity when the counts differ.
pub fn match_error(got: &[Point], oracle: &[Point]) -> f64 {
    if got.len() != oracle.len() {
        return f64::INFINITY;
    }
    oracle
        .iter()
        .map(|o| {
            got.iter()
                .map(|g| (g - o).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Co-centred orbit pair of two random oscillators that meets in four
/// well-separated real points, together with the oracle's points.
pub fn random_crossing_pair(rng: &mut StdRng) -> (Conic, Conic, Vec<Point>) {
    loop {
        let (a1, a2) = (random_oscillator(rng), random_oscillator(rng));
        let e1 = orbit_conic(&a1, Point::new(rng.gen_range(0.5..10.0), 0.0));
        let e2 = orbit_conic(&a2, Point::new(0.0, rng.gen_range(0.5..10.0)));
        let oracle = brute_force_intersections(&e1, &e2);
        if oracle.len() != 4 {
            continue;
        }
        // skip near-tangent pairs, where the crossing is ill-conditioned
        let spread = oracle
            .iter()
            .enumerate()
            .flat_map(|(i, a)| oracle[i + 1..].iter().map(move |b| (a - b).norm()))
            .fold(f64::INFINITY, f64::min);
        let size = oracle.iter().map(|p| p.norm()).fold(0.0, f64::max);
        if spread > 1e-2 * size {
            return (e1, e2, oracle);
        }
    }
}
