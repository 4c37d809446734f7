//! Intersection of co-centred conics without a numerical root finder: the
//! pencil's degenerate member is split into two lines, and each line is cut
//! with a conic by a single quadratic.

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

use crate::clifford::{Multivector, NBAR_PLUS, N_PLUS};
use crate::gac::{
    classify, cra_dual, point_from_vector, Conic, ConicClass, ConicMatrix, GacError, LineIpns,
    Point, ZERO_TOL,
};

/// Relative slack for radicands that should be zero but carry round-off.
pub const RADICAND_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntersectError {
    #[error("conics do not meet in four real points (pencil degenerates to {0})")]
    FewerThanFourIntersections(ConicClass),
    #[error("conics are identical up to scale")]
    IdenticalConics,
    #[error("rank-one completion failed: radicand {0}")]
    RankCompletion(f64),
    #[error("line does not meet the conic in real points")]
    NoRealIntersection,
    #[error("no real circle in the pencil of the two conics")]
    NoCircleInPencil,
    #[error("point pair is imaginary (P·P = {0})")]
    ImaginaryPointPair(f64),
    #[error(transparent)]
    Gac(#[from] GacError),
}

/// Singular member of a pencil, `dual(dual(E₁∧E₂) ∧ n̄₊)`.
#[derive(Debug, Clone)]
pub struct DegenerateConic {
    ipns: Conic,
    matrix: ConicMatrix,
    class: ConicClass,
}

impl DegenerateConic {
    /// The vector as produced by the algebra, without rescaling.
    pub fn ipns(&self) -> &Conic {
        &self.ipns
    }

    pub fn matrix(&self) -> &ConicMatrix {
        &self.matrix
    }

    pub fn class(&self) -> ConicClass {
        self.class
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinePair {
    pub l1: LineIpns,
    pub l2: LineIpns,
}

impl LinePair {
    /// Coefficients of `l₁(x,y)·l₂(x,y)` as a symmetric matrix.
    pub fn product_matrix(&self) -> Matrix3<f64> {
        let g = Vector3::new(self.l1.normal.x, self.l1.normal.y, -self.l1.d);
        let h = Vector3::new(self.l2.normal.x, self.l2.normal.y, -self.l2.d);
        0.5 * (g * h.transpose() + h * g.transpose())
    }

    /// Residual of `l₁l₂ − sQ` after fitting the best scalar `s`, relative to
    /// the product's size.
    pub fn factorization_residual(&self, q: &ConicMatrix) -> f64 {
        let p = self.product_matrix();
        let qq = q.0.dot(&q.0);
        if qq == 0.0 {
            return f64::INFINITY;
        }
        let s = p.dot(&q.0) / qq;
        (p - q.0 * s).abs().max() / p.abs().max()
    }
}

/// Entries `λ, μ, τ` of the skew matrix `[[0, τ, −μ], [−τ, 0, −λ], [μ, λ, 0]]`
/// that completes a line pair to rank one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewParams {
    pub lambda: f64,
    pub mu: f64,
    pub tau: f64,
}

impl SkewParams {
    pub fn matrix(&self) -> Matrix3<f64> {
        let (l, m, t) = (self.lambda, self.mu, self.tau);
        Matrix3::new(0.0, t, -m, -t, 0.0, -l, m, l, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointPair {
    Distinct(Point, Point),
    /// Double root: the line touches the conic.
    Double(Point),
}

impl PointPair {
    pub fn points(&self) -> Vec<Point> {
        match *self {
            Self::Distinct(a, b) => vec![a, b],
            Self::Double(p) => vec![p],
        }
    }

    pub fn is_double(&self) -> bool {
        matches!(self, Self::Double(_))
    }
}

/// `dual(dual(E₁∧E₂) ∧ n̄₊)` with its classification, whatever the class.
pub fn pencil_line_pair(e1: &Conic, e2: &Conic) -> Result<DegenerateConic, IntersectError> {
    let w = e1.multivector().wedge(e2.multivector());
    let v = w.dual().wedge(&Multivector::basis(NBAR_PLUS)).dual();
    let ipns = Conic::from_multivector(&v);
    let scale = e1.max_abs() * e2.max_abs();
    if scale == 0.0 || ipns.max_abs() <= ZERO_TOL * scale {
        return Err(IntersectError::IdenticalConics);
    }
    let matrix = ipns.matrix();
    let class = classify(&matrix)?;
    Ok(DegenerateConic {
        ipns,
        matrix,
        class,
    })
}

/// Degenerate conic through the four common points of two co-centred conics.
pub fn degenerate_pair(e1: &Conic, e2: &Conic) -> Result<DegenerateConic, IntersectError> {
    let d = match pencil_line_pair(e1, e2) {
        Err(IntersectError::IdenticalConics) => {
            return Err(IntersectError::FewerThanFourIntersections(
                ConicClass::Empty,
            ))
        }
        other => other?,
    };
    if d.class != ConicClass::IntersectingLinePair {
        return Err(IntersectError::FewerThanFourIntersections(d.class));
    }
    Ok(d)
}

fn adjugate(q: &Matrix3<f64>) -> Matrix3<f64> {
    let mut b = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            b[(i, j)] = q[(r0, c0)] * q[(r1, c1)] - q[(r0, c1)] * q[(r1, c0)];
        }
    }
    b
}

/// Skew completion read from the adjugate column of largest norm.
pub fn skew_params(d: &DegenerateConic) -> Result<SkewParams, IntersectError> {
    let q = d.matrix.0 / d.matrix.max_abs();
    let b = adjugate(&q);
    let i = (0..3)
        .max_by(|&x, &y| b.column(x).norm().total_cmp(&b.column(y).norm()))
        .expect("three columns");
    let mut radicand = -b[(i, i)];
    if radicand < 0.0 {
        if radicand >= -RADICAND_TOL {
            radicand = 0.0;
        } else {
            return Err(IntersectError::RankCompletion(radicand));
        }
    }
    let beta = radicand.sqrt();
    if beta == 0.0 {
        return Ok(SkewParams {
            lambda: 0.0,
            mu: 0.0,
            tau: 0.0,
        });
    }
    let p = b.column(i) / beta;
    // `P` equals the cross-product matrix of the common point `p`.
    let s = d.matrix.max_abs();
    Ok(SkewParams {
        lambda: -p[0] * s,
        mu: p[1] * s,
        tau: p[2] * s,
    })
}

/// Splits a pair of intersecting lines.
///
/// `N = Q + P` has rank one; the row and the column holding its largest entry
/// are the two lines.
pub fn decompose_lines(d: &DegenerateConic) -> Result<LinePair, IntersectError> {
    if !matches!(
        d.class,
        ConicClass::IntersectingLinePair | ConicClass::DoubleLine
    ) {
        return Err(IntersectError::FewerThanFourIntersections(d.class));
    }
    let n = d.matrix.0 + skew_params(d)?.matrix();
    let (mut bi, mut bj, mut best) = (0, 0, -1.0);
    for i in 0..3 {
        for j in 0..3 {
            if n[(i, j)].abs() > best {
                (bi, bj, best) = (i, j, n[(i, j)].abs());
            }
        }
    }
    let row = n.row(bi);
    let col = n.column(bj);
    Ok(LinePair {
        l1: canonical(LineIpns::from_homogeneous([row[0], row[1], row[2]])?),
        l2: canonical(LineIpns::from_homogeneous([col[0], col[1], col[2]])?),
    })
}

/// Orientation with a positive first nonzero normal component.
fn canonical(l: LineIpns) -> LineIpns {
    if l.normal.x < 0.0 || (l.normal.x == 0.0 && l.normal.y < 0.0) {
        l.flipped()
    } else {
        l
    }
}

/// Roots of the conic's quadratic restricted to the line, ordered along the
/// line direction.
pub fn intersect_line_conic(l: &LineIpns, e: &Conic) -> Result<PointPair, IntersectError> {
    let q = e.matrix();
    let m = q.max_abs();
    if m == 0.0 {
        return Err(GacError::ZeroMatrix.into());
    }
    let q = q.0 / m;
    let p0 = l.normal * l.d;
    let t = l.direction();
    let hp = Vector3::new(p0.x, p0.y, 1.0);
    let ht = Vector3::new(t.x, t.y, 0.0);
    let qa = ht.dot(&(q * ht));
    let qb = ht.dot(&(q * hp));
    let qc = hp.dot(&(q * hp));
    if qa.abs() <= ZERO_TOL {
        return Err(IntersectError::NoRealIntersection);
    }
    let disc = qb * qb - qa * qc;
    if disc.abs() <= RADICAND_TOL * (qb * qb + (qa * qc).abs()) {
        return Ok(PointPair::Double(p0 + t * (-qb / qa)));
    }
    if disc < 0.0 {
        return Err(IntersectError::NoRealIntersection);
    }
    let k = -(qb + qb.signum() * disc.sqrt());
    let (mut s1, mut s2) = if k == 0.0 {
        let r = (-qc / qa).sqrt();
        (-r, r)
    } else {
        (k / qa, qc / k)
    };
    if s1 > s2 {
        std::mem::swap(&mut s1, &mut s2);
    }
    Ok(PointPair::Distinct(p0 + t * s1, p0 + t * s2))
}

/// The circle `c₁E₁ + c₂E₂` of the pencil, found by cancelling the `n̄₋` and
/// `n̄ₓ` parts.
pub fn common_circle(e1: &Conic, e2: &Conic) -> Result<Conic, IntersectError> {
    let a = e1.normalized().coefficients();
    let b = e2.normalized().coefficients();
    let rows = [[a[1], b[1]], [a[2], b[2]]];
    let norm = |r: [f64; 2]| r[0].hypot(r[1]);
    let scale = norm(rows[0]).max(norm(rows[1]));
    if scale == 0.0 {
        // both are already circles; distinct concentric circles never meet
        return Err(IntersectError::NoCircleInPencil);
    }
    let det = rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0];
    if det.abs() > ZERO_TOL * scale * scale {
        return Err(IntersectError::NoCircleInPencil);
    }
    let r = if norm(rows[0]) >= norm(rows[1]) {
        rows[0]
    } else {
        rows[1]
    };
    let (c1, c2) = (r[1], -r[0]);
    let v = &e1.normalized().multivector().scale(c1) + &e2.normalized().multivector().scale(c2);
    let circle = Conic::from_multivector(&v);
    if circle.max_abs() <= ZERO_TOL * scale {
        return Err(IntersectError::NoCircleInPencil);
    }
    match classify(&circle.matrix())? {
        ConicClass::Circle => Ok(circle.normalized()),
        _ => Err(IntersectError::NoCircleInPencil),
    }
}

/// Splits a compass-ruler point pair in OPNS form.
pub fn decompose_point_pair(p: &Multivector) -> Result<PointPair, IntersectError> {
    let pp = p.gp(p).scalar_part();
    let w = Multivector::basis(N_PLUS).inner(p);
    let size = p.max_abs().powi(2);
    if pp < -RADICAND_TOL * size {
        return Err(IntersectError::ImaginaryPointPair(pp));
    }
    let root = pp.max(0.0).sqrt();
    let lift = |sign: f64| {
        let v = (p + &Multivector::scalar(sign * root)).gp(&w).grade(1);
        point_from_vector(&v).ok_or(IntersectError::ImaginaryPointPair(pp))
    };
    if pp <= RADICAND_TOL * size {
        let v = p.gp(&w).grade(1);
        let pt = point_from_vector(&v).ok_or(IntersectError::ImaginaryPointPair(pp))?;
        return Ok(PointPair::Double(pt));
    }
    Ok(PointPair::Distinct(lift(-1.0)?, lift(1.0)?))
}

/// `C ∧ l` dualised inside the compass-ruler sub-view, then decomposed.
pub fn intersect_circle_line_cra(c: &Conic, l: &LineIpns) -> Result<PointPair, IntersectError> {
    let ipns = c.multivector().wedge(&l.multivector());
    decompose_point_pair(&cra_dual(&ipns))
}

/// True when both conics are centred at the origin with axes along x and y.
pub fn is_axis_aligned_pair(e1: &Conic, e2: &Conic) -> bool {
    [e1, e2].iter().all(|e| {
        let c = e.coefficients();
        let m = e.max_abs();
        c[2].abs() <= ZERO_TOL * m && c[3].abs() <= ZERO_TOL * m && c[4].abs() <= ZERO_TOL * m
    })
}

fn sort_by_angle(mut pts: Vec<Point>) -> Vec<Point> {
    pts.sort_by(|a, b| a.y.atan2(a.x).total_cmp(&b.y.atan2(b.x)));
    pts
}

fn four_points(pairs: [PointPair; 2], class: ConicClass) -> Result<Vec<Point>, IntersectError> {
    let mut pts = Vec::with_capacity(4);
    for pair in pairs {
        match pair {
            PointPair::Distinct(a, b) => pts.extend([a, b]),
            PointPair::Double(_) => return Err(IntersectError::FewerThanFourIntersections(class)),
        }
    }
    Ok(sort_by_angle(pts))
}

/// Four common points of two co-centred conics, sorted by polar angle.
pub fn intersect_conics(e1: &Conic, e2: &Conic) -> Result<Vec<Point>, IntersectError> {
    let d = degenerate_pair(e1, e2)?;
    let lines = decompose_lines(&d)?;
    let lift = |r: Result<PointPair, IntersectError>| match r {
        Err(IntersectError::NoRealIntersection) => {
            Err(IntersectError::FewerThanFourIntersections(d.class))
        }
        other => other,
    };
    four_points(
        [
            lift(intersect_line_conic(&lines.l1, e1))?,
            lift(intersect_line_conic(&lines.l2, e1))?,
        ],
        d.class,
    )
}

/// Intermediate objects of the compass-ruler route.
#[derive(Debug, Clone)]
pub struct CircleRoute {
    pub circle: Conic,
    pub lines: LinePair,
    pub points: Vec<Point>,
}

/// The same four points found through the pencil's circle and point-pair
/// decomposition; suited to axis-aligned pairs whose pencil contains a circle.
pub fn intersect_conics_cra(e1: &Conic, e2: &Conic) -> Result<CircleRoute, IntersectError> {
    let d = degenerate_pair(e1, e2)?;
    let lines = decompose_lines(&d)?;
    let circle = common_circle(e1, e2)?;
    let points = four_points(
        [
            intersect_circle_line_cra(&circle, &lines.l1)?,
            intersect_circle_line_cra(&circle, &lines.l2)?,
        ],
        d.class,
    )?;
    Ok(CircleRoute {
        circle,
        lines,
        points,
    })
}
