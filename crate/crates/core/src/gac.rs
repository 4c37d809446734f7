//! Objects of the conic model: embedded points, conics in inner product
//! null space (IPNS) form, their 3×3 matrices, lines of the compass-ruler
//! sub-view and the isotropic scalor.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use nalgebra::{Matrix2, Matrix3, Vector2};
use thiserror::Error;

use crate::clifford::{
    CliffordError, Multivector, Versor, E1, E2, NBAR_MINUS, NBAR_PLUS, NBAR_TIMES, N_MINUS, N_PLUS,
    N_TIMES,
};

/// A point of the Euclidean plane.
pub type Point = Vector2<f64>;

/// Relative tolerance under which a normalised quantity counts as zero.
pub const ZERO_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GacError {
    #[error("non-finite coordinate ({0}, {1})")]
    NonFinite(f64, f64),
    #[error("semi-axes must be positive, got a = {a}, b = {b}")]
    NonPositiveSemiaxis { a: f64, b: f64 },
    #[error("zero conic matrix")]
    ZeroMatrix,
    #[error("conic is a {0}, not an ellipse")]
    NotAnEllipse(ConicClass),
    #[error("line normal must be nonzero")]
    ZeroNormal,
    #[error("points coincide")]
    CoincidentPoints,
    #[error("scale factor must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error(transparent)]
    Clifford(#[from] CliffordError),
}

/// An embedded point `C(x, y)`; always a null 1-vector.
#[derive(Debug, Clone)]
pub struct GacPoint {
    mv: Multivector,
    xy: Point,
}

impl GacPoint {
    pub fn multivector(&self) -> &Multivector {
        &self.mv
    }

    pub fn coords(&self) -> Point {
        self.xy
    }
}

/// `C(x,y) = n̄₊ + x e₁ + y e₂ + ½(x²+y²) n₊ + ½(x²−y²) n₋ + xy nₓ`.
pub fn embed_point(x: f64, y: f64) -> Result<GacPoint, GacError> {
    if !x.is_finite() || !y.is_finite() {
        return Err(GacError::NonFinite(x, y));
    }
    let mv = Multivector::vector([
        1.0,
        0.0,
        0.0,
        x,
        y,
        0.5 * (x * x + y * y),
        0.5 * (x * x - y * y),
        x * y,
    ]);
    Ok(GacPoint {
        mv,
        xy: Point::new(x, y),
    })
}

/// The 1-vector `v̄⁺n̄₊ + v̄⁻n̄₋ + v̄ˣn̄ₓ + v¹e₁ + v²e₂ + v⁺n₊` representing a conic.
///
/// Projective: any nonzero multiple describes the same curve.
#[derive(Clone, PartialEq)]
pub struct Conic {
    mv: Multivector,
}

/// Index of each stored coefficient in [`Conic::coefficients`].
const SLOTS: [usize; 6] = [NBAR_PLUS, NBAR_MINUS, NBAR_TIMES, E1, E2, N_PLUS];

impl Conic {
    /// Coefficients `(v̄⁺, v̄⁻, v̄ˣ, v¹, v², v⁺)`.
    pub fn from_coefficients(c: [f64; 6]) -> Self {
        let mut v = [0.0; 8];
        for (slot, value) in SLOTS.iter().zip(c) {
            v[*slot] = value;
        }
        Self {
            mv: Multivector::vector(v),
        }
    }

    /// Keeps the six conic components of the grade-1 part of `m`; the `n₋`,
    /// `nₓ` directions are orthogonal to every embedded point and drop out.
    pub fn from_multivector(m: &Multivector) -> Self {
        let v = m.vector_part();
        Self::from_coefficients(SLOTS.map(|s| v[s]))
    }

    /// Inverse of [`Conic::matrix`].
    pub fn from_matrix(q: &ConicMatrix) -> Self {
        let q = &q.0;
        Self::from_coefficients([
            -(q[(0, 0)] + q[(1, 1)]),
            q[(1, 1)] - q[(0, 0)],
            -2.0 * q[(0, 1)],
            2.0 * q[(0, 2)],
            2.0 * q[(1, 2)],
            -q[(2, 2)],
        ])
    }

    /// Centred conic `xᵀ M x = level`.
    pub fn from_quadratic_form(m: &Matrix2<f64>, level: f64) -> Self {
        let q = Matrix3::new(
            m[(0, 0)],
            0.5 * (m[(0, 1)] + m[(1, 0)]),
            0.0,
            0.5 * (m[(0, 1)] + m[(1, 0)]),
            m[(1, 1)],
            0.0,
            0.0,
            0.0,
            -level,
        );
        Self::from_matrix(&ConicMatrix(q))
    }

    pub fn coefficients(&self) -> [f64; 6] {
        let v = self.mv.vector_part();
        SLOTS.map(|s| v[s])
    }

    pub fn multivector(&self) -> &Multivector {
        &self.mv
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            mv: self.mv.scale(s),
        }
    }

    /// Divides by the `n̄₊` coefficient when it is nonzero, otherwise by the
    /// largest-magnitude coefficient. The zero conic is returned unchanged.
    pub fn normalized(&self) -> Self {
        let c = self.coefficients();
        let max = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if max == 0.0 {
            return self.clone();
        }
        let pivot = if c[0].abs() > ZERO_TOL * max {
            c[0]
        } else {
            *c.iter()
                .max_by(|a, b| a.abs().total_cmp(&b.abs()))
                .expect("six entries")
        };
        self.scale(1.0 / pivot)
    }

    pub fn max_abs(&self) -> f64 {
        self.coefficients()
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn matrix(&self) -> ConicMatrix {
        conic_matrix(self)
    }

    /// `C(p) · E`, the quadratic polynomial of the conic at `p`.
    pub fn eval(&self, p: Point) -> f64 {
        let [vbp, vbm, vbx, v1, v2, vp] = self.coefficients();
        let (x, y) = (p.x, p.y);
        -0.5 * (vbp + vbm) * x * x - vbx * x * y - 0.5 * (vbp - vbm) * y * y + v1 * x + v2 * y - vp
    }

    /// Scale-free incidence residual `|C(p)·E| / (max|E| (1 + ‖p‖²))`.
    pub fn residual(&self, p: Point) -> f64 {
        let m = self.max_abs();
        if m == 0.0 {
            return 0.0;
        }
        self.eval(p).abs() / (m * (1.0 + p.norm_squared()))
    }

    /// Gradient of [`eval`](Self::eval) at `p`.
    pub fn gradient(&self, p: Point) -> Vector2<f64> {
        let q = self.matrix().0;
        let q2 = q.fixed_view::<2, 2>(0, 0).into_owned();
        let lin = Vector2::new(q[(0, 2)], q[(1, 2)]);
        2.0 * (q2 * p + lin)
    }

    /// Isotropic scaling about the origin by `alpha`, applied as a scalor
    /// conjugation.
    pub fn scaled(&self, alpha: f64) -> Result<Self, GacError> {
        let s = scalor(alpha)?;
        Ok(Self::from_multivector(&s.conjugate(&self.mv)))
    }

    /// True when the conic lies in the compass-ruler sub-view, i.e. has no
    /// `n̄₋`, `n̄ₓ` part (a circle, line or point).
    pub fn is_cra(&self) -> bool {
        let c = self.coefficients();
        let m = self.max_abs();
        c[1].abs() <= ZERO_TOL * m && c[2].abs() <= ZERO_TOL * m
    }
}

impl fmt::Debug for Conic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.coefficients();
        write!(
            f,
            "Conic({}n̄₊ + {}n̄₋ + {}n̄ₓ + {}e₁ + {}e₂ + {}n₊)",
            c[0], c[1], c[2], c[3], c[4], c[5]
        )
    }
}

/// Symmetric 3×3 matrix of a conic in homogeneous coordinates `(x, y, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConicMatrix(pub Matrix3<f64>);

impl ConicMatrix {
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Leading 2×2 block.
    pub fn quadratic_part(&self) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(0, 0).into_owned()
    }
}

/// Entries read off by inner products with fixed probe vectors:
/// `q₁₁ = E·½(n₊+n₋)`, `q₂₂ = E·½(n₊−n₋)`, `q₁₂ = E·½nₓ`,
/// `q₁₃ = E·½e₁`, `q₂₃ = E·½e₂`, `q₃₃ = E·n̄₊`.
pub fn conic_matrix(conic: &Conic) -> ConicMatrix {
    let e = conic.multivector();
    let probe = |v: [f64; 8]| e.inner(&Multivector::vector(v)).scalar_part();
    let mut v11 = [0.0; 8];
    v11[N_PLUS] = 0.5;
    v11[N_MINUS] = 0.5;
    let mut v22 = [0.0; 8];
    v22[N_PLUS] = 0.5;
    v22[N_MINUS] = -0.5;
    let mut v12 = [0.0; 8];
    v12[N_TIMES] = 0.5;
    let mut v13 = [0.0; 8];
    v13[E1] = 0.5;
    let mut v23 = [0.0; 8];
    v23[E2] = 0.5;
    let mut v33 = [0.0; 8];
    v33[NBAR_PLUS] = 1.0;
    let (q11, q22, q12) = (probe(v11), probe(v22), probe(v12));
    let (q13, q23, q33) = (probe(v13), probe(v23), probe(v33));
    ConicMatrix(Matrix3::new(
        q11, q12, q13, //
        q12, q22, q23, //
        q13, q23, q33,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConicClass {
    Ellipse,
    Hyperbola,
    Parabola,
    IntersectingLinePair,
    ParallelLinePair,
    DoubleLine,
    Point,
    Circle,
    Empty,
}

impl fmt::Display for ConicClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Ellipse => "ellipse",
            Self::Hyperbola => "hyperbola",
            Self::Parabola => "parabola",
            Self::IntersectingLinePair => "pair of intersecting lines",
            Self::ParallelLinePair => "pair of parallel lines",
            Self::DoubleLine => "double line",
            Self::Point => "single point",
            Self::Circle => "circle",
            Self::Empty => "empty conic",
        };
        f.write_str(s)
    }
}

pub fn classify(q: &ConicMatrix) -> Result<ConicClass, GacError> {
    classify_with(q, ZERO_TOL)
}

/// Determinant/minor taxonomy on the matrix scaled to unit max entry.
pub fn classify_with(q: &ConicMatrix, tol: f64) -> Result<ConicClass, GacError> {
    let m = q.max_abs();
    if m == 0.0 {
        return Err(GacError::ZeroMatrix);
    }
    let a = q.0 / m;
    let det3 = a.determinant();
    let det2 = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(0, 1)];
    let s2 = a[(0, 0)].abs().max(a[(1, 1)].abs()).max(a[(0, 1)].abs());
    let class = if det2.abs() > tol * s2 * s2 {
        // central conic: test the value at the centre against the size of the
        // quadratic block, so small conics far from the origin are not points
        let q2 = Matrix2::new(a[(0, 0)], a[(0, 1)], a[(0, 1)], a[(1, 1)]);
        let l = Vector2::new(a[(0, 2)], a[(1, 2)]);
        let c = -(q2.try_inverse().ok_or(GacError::ZeroMatrix)? * l);
        let k = det3 / det2;
        let degenerate = k.abs() <= tol * s2 * (1.0 + c.norm_squared());
        if det2 > 0.0 {
            if degenerate {
                ConicClass::Point
            } else if k * (a[(0, 0)] + a[(1, 1)]) < 0.0 {
                if (a[(0, 0)] - a[(1, 1)]).abs() <= tol * s2 && a[(0, 1)].abs() <= tol * s2 {
                    ConicClass::Circle
                } else {
                    ConicClass::Ellipse
                }
            } else {
                ConicClass::Empty
            }
        } else if degenerate {
            ConicClass::IntersectingLinePair
        } else {
            ConicClass::Hyperbola
        }
    } else if det3.abs() > tol {
        ConicClass::Parabola
    } else {
        let minor = |r: [usize; 2], c: [usize; 2]| {
            a[(r[0], c[0])] * a[(r[1], c[1])] - a[(r[0], c[1])] * a[(r[1], c[0])]
        };
        let pairs = [[0, 1], [0, 2], [1, 2]];
        let rank_one = pairs
            .iter()
            .all(|r| pairs.iter().all(|c| minor(*r, *c).abs() <= tol));
        if rank_one {
            ConicClass::DoubleLine
        } else {
            let cof = minor([1, 2], [1, 2]) + minor([0, 2], [0, 2]);
            if cof < -tol {
                ConicClass::ParallelLinePair
            } else if cof > tol {
                ConicClass::Empty
            } else {
                ConicClass::DoubleLine
            }
        }
    };
    Ok(class)
}

/// Geometric parameters of an ellipse: semi-axis `a` along the direction
/// `theta`, `b` perpendicular to it, centred at `centre`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseParams {
    pub a: f64,
    pub b: f64,
    pub centre: Point,
    pub theta: f64,
}

impl EllipseParams {
    pub fn new(a: f64, b: f64, u: f64, v: f64, theta: f64) -> Self {
        Self {
            a,
            b,
            centre: Point::new(u, v),
            theta,
        }
    }

    pub fn centred(a: f64, b: f64, theta: f64) -> Self {
        Self::new(a, b, 0.0, 0.0, theta)
    }

    /// `(a² − b²) / (a² + b²)`
    pub fn alpha(&self) -> f64 {
        let (a2, b2) = (self.a * self.a, self.b * self.b);
        (a2 - b2) / (a2 + b2)
    }

    /// `2a²b² / (a² + b²)`
    pub fn beta(&self) -> f64 {
        let (a2, b2) = (self.a * self.a, self.b * self.b);
        2.0 * a2 * b2 / (a2 + b2)
    }

    /// Point at parameter `t` on the boundary.
    pub fn boundary_point(&self, t: f64) -> Point {
        let (s, c) = self.theta.sin_cos();
        let (x, y) = (self.a * t.cos(), self.b * t.sin());
        self.centre + Point::new(c * x - s * y, s * x + c * y)
    }
}

/// IPNS vector of a rotated, translated ellipse, normalised to `n̄₊`
/// coefficient 1.
///
/// The linear coefficients for a nonzero centre are obtained from the
/// centring condition `Q₂ c + (q₁₃, q₂₃) = 0` on the matrix.
pub fn ellipse_ipns(p: &EllipseParams) -> Result<Conic, GacError> {
    if !(p.a > 0.0 && p.b > 0.0) {
        return Err(GacError::NonPositiveSemiaxis { a: p.a, b: p.b });
    }
    let (alpha, beta) = (p.alpha(), p.beta());
    let (s2, c2) = (2.0 * p.theta).sin_cos();
    let (ac, as_) = (alpha * c2, alpha * s2);
    let (u, v) = (p.centre.x, p.centre.y);
    Ok(Conic::from_coefficients([
        1.0,
        -ac,
        -as_,
        (1.0 - ac) * u - as_ * v,
        (1.0 + ac) * v - as_ * u,
        0.5 * (u * u + v * v - beta - (u * u - v * v) * ac - 2.0 * u * v * as_),
    ]))
}

/// `(a²+b²) n̄₊ − (a²−b²) n̄₋ − a²b² n₊`: the centred ellipse with semi-axis
/// `a` along x and `b` along y.
pub fn axis_aligned_centered_ellipse(a: f64, b: f64) -> Result<Conic, GacError> {
    if !(a > 0.0 && b > 0.0) {
        return Err(GacError::NonPositiveSemiaxis { a, b });
    }
    let (a2, b2) = (a * a, b * b);
    Ok(Conic::from_coefficients([
        a2 + b2,
        -(a2 - b2),
        0.0,
        0.0,
        0.0,
        -a2 * b2,
    ]))
}

/// Semi-axes, centre and rotation of an ellipse (or circle) matrix.
///
/// The rotation is the direction of the eigenvector belonging to the smaller
/// eigenvalue of the quadratic block, taken in `(−π/2, π/2]`.
pub fn conic_params(q: &ConicMatrix) -> Result<EllipseParams, GacError> {
    let class = classify(q)?;
    if !matches!(class, ConicClass::Ellipse | ConicClass::Circle) {
        return Err(GacError::NotAnEllipse(class));
    }
    let m = q.max_abs();
    let a = q.0 / m;
    let (q11, q12, q22) = (a[(0, 0)], a[(0, 1)], a[(1, 1)]);
    let (q13, q23, q33) = (a[(0, 2)], a[(1, 2)], a[(2, 2)]);
    let det = q11 * q22 - q12 * q12;
    let cx = -(q22 * q13 - q12 * q23) / det;
    let cy = -(q11 * q23 - q12 * q13) / det;
    let k = q33 + q13 * cx + q23 * cy;

    let theta = if q12.abs() <= ZERO_TOL {
        if q11 > q22 {
            FRAC_PI_2
        } else {
            0.0
        }
    } else {
        let root = ((q11 - q22).powi(2) + 4.0 * q12 * q12).sqrt();
        ((q22 - q11 - root) / (2.0 * q12)).atan()
    };
    let (s, c) = theta.sin_cos();
    let mut along = q11 * c * c + 2.0 * q12 * s * c + q22 * s * s;
    let mut across = q11 * s * s - 2.0 * q12 * s * c + q22 * c * c;
    // the smaller eigenvalue loses digits to cancellation; recover it from det
    if along.abs() < across.abs() {
        along = det / across;
    } else {
        across = det / along;
    }
    Ok(EllipseParams {
        a: (-k / along).sqrt(),
        b: (-k / across).sqrt(),
        centre: Point::new(cx, cy),
        theta,
    })
}

/// A line `n₁x + n₂y = d` with unit normal, held as the compass-ruler
/// 1-vector `n₁e₁ + n₂e₂ + d n₊`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineIpns {
    pub normal: Vector2<f64>,
    pub d: f64,
}

impl LineIpns {
    pub fn multivector(&self) -> Multivector {
        let mut v = [0.0; 8];
        v[E1] = self.normal.x;
        v[E2] = self.normal.y;
        v[N_PLUS] = self.d;
        Multivector::vector(v)
    }

    /// Signed value `n·p − d`, which is also `C(p) · l`.
    pub fn eval(&self, p: Point) -> f64 {
        self.normal.dot(&p) - self.d
    }

    /// Unit direction vector along the line.
    pub fn direction(&self) -> Vector2<f64> {
        Vector2::new(-self.normal.y, self.normal.x)
    }

    pub fn flipped(&self) -> Self {
        Self {
            normal: -self.normal,
            d: -self.d,
        }
    }

    /// Line from homogeneous coefficients `g₁x + g₂y + g₃ = 0`.
    pub fn from_homogeneous(g: [f64; 3]) -> Result<Self, GacError> {
        line_ipns(g[0], g[1], -g[2])
    }

    /// Reads the Euclidean part (`e₁`, `e₂`, `n₊`) of a 1-vector.
    pub fn from_multivector(m: &Multivector) -> Result<Self, GacError> {
        let v = m.vector_part();
        line_ipns(v[E1], v[E2], v[N_PLUS])
    }

    pub fn through_origin(&self, tol: f64) -> bool {
        self.d.abs() <= tol
    }
}

/// `n₁e₁ + n₂e₂ + d n₊` rescaled so the normal has unit length.
pub fn line_ipns(n1: f64, n2: f64, d: f64) -> Result<LineIpns, GacError> {
    let norm = n1.hypot(n2);
    if norm == 0.0 || !norm.is_finite() {
        return Err(GacError::ZeroNormal);
    }
    Ok(LineIpns {
        normal: Vector2::new(n1 / norm, n2 / norm),
        d: d / norm,
    })
}

fn infinity_blade() -> Multivector {
    Multivector::basis(N_PLUS)
        .wedge(&Multivector::basis(N_MINUS))
        .wedge(&Multivector::basis(N_TIMES))
}

/// OPNS 5-vector `P₁ ∧ P₂ ∧ n₊ ∧ n₋ ∧ nₓ` of the line through two points.
pub fn line_opns_through(p1: &GacPoint, p2: &GacPoint) -> Result<Multivector, GacError> {
    if (p1.xy - p2.xy).norm() <= ZERO_TOL * (1.0 + p1.xy.norm().max(p2.xy.norm())) {
        return Err(GacError::CoincidentPoints);
    }
    Ok(p1.mv.wedge(&p2.mv).wedge(&infinity_blade()))
}

/// IPNS line of an OPNS line 5-vector. The dual is `k · l ∧ n₋ ∧ nₓ`, so the
/// `e₁∧n₋∧nₓ`, `e₂∧n₋∧nₓ`, `n₊∧n₋∧nₓ` coefficients are those of `l`.
pub fn line_from_opns(opns: &Multivector) -> Result<LineIpns, GacError> {
    let d = opns.dual();
    let tail = (1 << N_MINUS) | (1 << N_TIMES);
    line_ipns(
        d.get((1 << E1) | tail),
        d.get((1 << E2) | tail),
        d.get((1 << N_PLUS) | tail),
    )
}

/// The scalor `S₊S₋Sₓ` with `Sᵤ = (α+1)/(2√α) + (α−1)/(2√α) n̄ᵤ∧nᵤ`; its
/// conjugation maps `C(x)` to a multiple of `C(αx)`.
pub fn scalor(alpha: f64) -> Result<Versor, GacError> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(GacError::NonPositiveScale(alpha));
    }
    let r = alpha.sqrt();
    let c = (alpha + 1.0) / (2.0 * r);
    let s = (alpha - 1.0) / (2.0 * r);
    let mut out = Multivector::scalar(1.0);
    for (bar, inf) in [
        (NBAR_PLUS, N_PLUS),
        (NBAR_MINUS, N_MINUS),
        (NBAR_TIMES, N_TIMES),
    ] {
        let mut factor = Multivector::scalar(c);
        factor.set((1 << bar) | (1 << inf), s);
        out = out.gp(&factor);
    }
    Ok(Versor::new(out)?)
}

/// Pseudoscalar `n̄₊∧e₁∧e₂∧n₊` of the compass-ruler sub-view.
pub(crate) fn cra_pseudoscalar() -> Multivector {
    Multivector::blade(
        (1 << NBAR_PLUS) | (1 << E1) | (1 << E2) | (1 << N_PLUS),
        1.0,
    )
}

/// Duality inside the compass-ruler sub-view, `X I_c⁻¹`.
pub fn cra_dual(x: &Multivector) -> Multivector {
    let i = cra_pseudoscalar();
    let sq = i.gp(&i).scalar_part();
    x.gp(&i).scale(1.0 / sq)
}

/// Planar coordinates of a (possibly unnormalised) embedded point vector.
pub fn point_from_vector(v: &Multivector) -> Option<Point> {
    let w = v.get(1 << NBAR_PLUS);
    if w == 0.0 || !w.is_finite() {
        return None;
    }
    Some(Point::new(v.get(1 << E1) / w, v.get(1 << E2) / w))
}
