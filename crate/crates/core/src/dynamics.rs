//! Planar linear oscillators `ẋ = A x` with `tr A = 0`, `det A > 0`: their
//! conserved quadratic forms, exact and Runge–Kutta flows, conic fitting of
//! sampled trajectories, and travel times along an orbit.

use std::f64::consts::TAU;
use std::fmt;

use nalgebra::{Matrix2, Matrix3, Vector3};
use thiserror::Error;

use crate::gac::{Conic, Point};

pub type Mat2 = Matrix2<f64>;

/// Relative mismatch of conserved values tolerated by [`arc_duration`].
pub const LEVEL_TOL: f64 = 1e-6;
/// Default Runge–Kutta step.
pub const DEFAULT_DT: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("A{family} = {matrix} is not oscillatory: trace {trace}, det {det}, eigenvalues {eigenvalues}")]
    NotOscillatory {
        family: usize,
        matrix: String,
        trace: f64,
        det: f64,
        eigenvalues: String,
    },
    #[error("{0} point must be nonzero")]
    ZeroPoint(&'static str),
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("at least 5 samples are needed for a conic fit, got {0}")]
    InsufficientSamples(usize),
    #[error("samples do not determine a centred conic")]
    DegenerateFit,
    #[error("points lie on different orbits (conserved values {0} and {1})")]
    DifferentLevelSets(f64, f64),
    #[error("time step must be positive, got {0}")]
    NonPositiveStep(f64),
}

/// Rotation sense of the orbits in the phase plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    CounterClockwise,
    Clockwise,
}

fn fmt_matrix(a: &Mat2) -> String {
    format!(
        "[[{}, {}], [{}, {}]]",
        a[(0, 0)],
        a[(0, 1)],
        a[(1, 0)],
        a[(1, 1)]
    )
}

fn eigen_description(a: &Mat2) -> String {
    let tr = a.trace();
    let det = a.determinant();
    let half = 0.5 * tr;
    let disc = half * half - det;
    if disc >= 0.0 {
        let r = disc.sqrt();
        format!("{} and {}", half + r, half - r)
    } else {
        format!("{} ± {}i", half, (-disc).sqrt())
    }
}

/// `xᵀ M x`, constant along the flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedForm {
    pub m: Mat2,
}

impl ConservedForm {
    pub fn value(&self, p: Point) -> f64 {
        (p.transpose() * self.m * p)[(0, 0)]
    }

    /// The orbit `xᵀ M x = level` as a conic.
    pub fn conic(&self, level: f64) -> Conic {
        Conic::from_quadratic_form(&self.m, level)
    }

    /// Copy scaled so the value at `p` is one.
    pub fn normalized_at(&self, p: Point) -> Self {
        Self {
            m: self.m / self.value(p),
        }
    }
}

fn check_oscillatory(a: &Mat2, family: usize) -> Result<(), DynamicsError> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(DynamicsError::NonFinite("matrix entry"));
    }
    let tr = a.trace();
    let det = a.determinant();
    let norm = a.norm();
    if norm == 0.0 || tr.abs() > 1e-12 * norm || det <= 0.0 {
        return Err(DynamicsError::NotOscillatory {
            family,
            matrix: fmt_matrix(a),
            trace: tr,
            det,
            eigenvalues: eigen_description(a),
        });
    }
    Ok(())
}

/// For `A = [[a, b], [c, −a]]`, `M ∝ [[c, −a], [−a, −b]]`, signed to be
/// positive definite.
pub fn conserved_form(a: &Mat2) -> Result<ConservedForm, DynamicsError> {
    check_oscillatory(a, 0)?;
    let m = Mat2::new(a[(1, 0)], -a[(0, 0)], -a[(0, 0)], -a[(0, 1)]);
    let m = if m[(0, 0)] < 0.0 { -m } else { m };
    Ok(ConservedForm { m })
}

/// One validated subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct Oscillator {
    a: Mat2,
    omega: f64,
    form: ConservedForm,
    orientation: Orientation,
}

impl Oscillator {
    pub fn new(a: Mat2) -> Result<Self, DynamicsError> {
        Self::for_family(a, 0)
    }

    fn for_family(a: Mat2, family: usize) -> Result<Self, DynamicsError> {
        check_oscillatory(&a, family)?;
        let form = conserved_form(&a)?;
        let orientation = if a[(1, 0)] > 0.0 {
            Orientation::CounterClockwise
        } else {
            Orientation::Clockwise
        };
        Ok(Self {
            a,
            omega: a.determinant().sqrt(),
            form,
            orientation,
        })
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.a
    }

    /// Angular frequency `√det A`.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn period(&self) -> f64 {
        TAU / self.omega
    }

    pub fn form(&self) -> &ConservedForm {
        &self.form
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// `e^{At} x = (cos ωt · I + sin ωt / ω · A) x`, exact since `A² = −ω² I`.
    pub fn flow(&self, x: Point, t: f64) -> Point {
        let (s, c) = (self.omega * t).sin_cos();
        x * c + self.a * x * (s / self.omega)
    }

    /// The orbit through `p`.
    pub fn orbit_through(&self, p: Point) -> Conic {
        self.form.conic(self.form.value(p))
    }

    /// Forward travel time from `from` to `to`, in `(0, period]`.
    pub fn arc_duration(&self, from: Point, to: Point) -> Result<f64, DynamicsError> {
        let (v0, v1) = (self.form.value(from), self.form.value(to));
        if (v0 - v1).abs() > LEVEL_TOL * v0.abs().max(v1.abs()) {
            return Err(DynamicsError::DifferentLevelSets(v0, v1));
        }
        let r = self
            .form
            .m
            .cholesky()
            .expect("conserved form is positive definite")
            .l()
            .transpose();
        let (y0, y1) = (r * from, r * to);
        let turn = y0.x * y1.y - y0.y * y1.x;
        let dot = y0.dot(&y1);
        let ccw = turn.atan2(dot).rem_euclid(TAU);
        let mut angle = match self.orientation {
            Orientation::CounterClockwise => ccw,
            Orientation::Clockwise => (TAU - ccw).rem_euclid(TAU),
        };
        if angle <= 1e-12 || angle >= TAU {
            angle = TAU;
        }
        Ok(angle / self.omega)
    }

    /// Default sample count covering one period at step `dt`.
    pub fn samples_per_period(&self, dt: f64) -> usize {
        (TAU / (self.omega * dt)).ceil() as usize + 1
    }
}

/// Free-function form of [`Oscillator::arc_duration`].
pub fn arc_duration(a: &Mat2, from: Point, to: Point) -> Result<f64, DynamicsError> {
    Oscillator::new(*a)?.arc_duration(from, to)
}

/// Two subsystems with start and target points.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchedSystem {
    pub first: Oscillator,
    pub second: Oscillator,
    pub start: Point,
    pub target: Point,
}

impl SwitchedSystem {
    pub fn new(a1: Mat2, a2: Mat2, start: Point, target: Point) -> Result<Self, DynamicsError> {
        let first = Oscillator::for_family(a1, 1)?;
        let second = Oscillator::for_family(a2, 2)?;
        for (p, name) in [(start, "start"), (target, "target")] {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(DynamicsError::NonFinite(name));
            }
            if p == Point::zeros() {
                return Err(DynamicsError::ZeroPoint(name));
            }
        }
        Ok(Self {
            first,
            second,
            start,
            target,
        })
    }

    /// Subsystem by family index 1 or 2.
    pub fn family(&self, index: usize) -> &Oscillator {
        if index == 1 {
            &self.first
        } else {
            &self.second
        }
    }
}

/// Checks both matrices for closed elliptic orbits.
pub fn validate_system(a1: &Mat2, a2: &Mat2) -> Result<(Oscillator, Oscillator), DynamicsError> {
    Ok((
        Oscillator::for_family(*a1, 1)?,
        Oscillator::for_family(*a2, 2)?,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub times: Vec<f64>,
    pub points: Vec<Point>,
}

/// Classical fourth-order Runge–Kutta, `n` points starting with `x0`.
pub fn rk4_sample(
    a: &Mat2,
    x0: Point,
    dt: f64,
    n: usize,
) -> Result<TrajectorySample, DynamicsError> {
    if dt.is_nan() || dt <= 0.0 {
        return Err(DynamicsError::NonPositiveStep(dt));
    }
    let mut times = Vec::with_capacity(n);
    let mut points = Vec::with_capacity(n);
    let mut x = x0;
    for i in 0..n {
        times.push(i as f64 * dt);
        points.push(x);
        let k1 = a * x;
        let k2 = a * (x + k1 * (0.5 * dt));
        let k3 = a * (x + k2 * (0.5 * dt));
        let k4 = a * (x + k3 * dt);
        x += (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (dt / 6.0);
    }
    Ok(TrajectorySample { times, points })
}

fn rms_radius(points: &[Point]) -> f64 {
    (points.iter().map(|p| p.norm_squared()).sum::<f64>() / points.len() as f64).sqrt()
}

/// Least-squares `A x² + 2B xy + C y² = 1`; returns `[[A, B], [B, C]]`.
///
/// The 3×3 normal equations are solved by Cramer's rule on coordinates
/// rescaled to unit RMS radius.
pub fn fit_centered_form(samples: &TrajectorySample) -> Result<Mat2, DynamicsError> {
    let pts = &samples.points;
    if pts.len() < 5 {
        return Err(DynamicsError::InsufficientSamples(pts.len()));
    }
    let s = rms_radius(pts);
    if s == 0.0 || !s.is_finite() {
        return Err(DynamicsError::DegenerateFit);
    }
    let mut n = Matrix3::zeros();
    let mut rhs = Vector3::zeros();
    for p in pts {
        let (x, y) = (p.x / s, p.y / s);
        let f = Vector3::new(x * x, 2.0 * x * y, y * y);
        n += f * f.transpose();
        rhs += f;
    }
    let det = n.determinant();
    if det.abs() <= 1e-12 * n.norm().powi(3) {
        return Err(DynamicsError::DegenerateFit);
    }
    let mut sol = [0.0; 3];
    for (k, slot) in sol.iter_mut().enumerate() {
        let mut nk = n;
        nk.set_column(k, &rhs);
        *slot = nk.determinant() / det;
    }
    let s2 = s * s;
    Ok(Mat2::new(sol[0], sol[1], sol[1], sol[2]) / s2)
}

/// Least-squares `A x² + C y² = 1`, for families known to be axis-aligned.
pub fn fit_axis_aligned_form(samples: &TrajectorySample) -> Result<Mat2, DynamicsError> {
    let pts = &samples.points;
    if pts.len() < 5 {
        return Err(DynamicsError::InsufficientSamples(pts.len()));
    }
    let s = rms_radius(pts);
    if s == 0.0 || !s.is_finite() {
        return Err(DynamicsError::DegenerateFit);
    }
    let (mut n11, mut n12, mut n22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for p in pts {
        let (u, v) = ((p.x / s).powi(2), (p.y / s).powi(2));
        n11 += u * u;
        n12 += u * v;
        n22 += v * v;
        r1 += u;
        r2 += v;
    }
    let det = n11 * n22 - n12 * n12;
    if det.abs() <= 1e-12 * (n11 * n22).abs() {
        return Err(DynamicsError::DegenerateFit);
    }
    let a = (r1 * n22 - r2 * n12) / det;
    let c = (n11 * r2 - n12 * r1) / det;
    Ok(Mat2::new(a, 0.0, 0.0, c) / (s * s))
}

/// The fitted orbit as a conic.
pub fn fit_centered_conic(samples: &TrajectorySample) -> Result<Conic, DynamicsError> {
    Ok(Conic::from_quadratic_form(
        &fit_centered_form(samples)?,
        1.0,
    ))
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::CounterClockwise => "counterclockwise",
            Self::Clockwise => "clockwise",
        })
    }
}
