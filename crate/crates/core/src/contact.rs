//! Tangent (contact) configurations of co-centred conics: the outer conic of
//! one family that touches an inner conic of the other from outside, or the
//! inner one that touches it from inside.

use nalgebra::Vector2;
use thiserror::Error;

use crate::gac::{line_ipns, Conic, ConicClass, GacError, LineIpns, Point};
use crate::intersect::{
    decompose_lines, intersect_line_conic, pencil_line_pair, IntersectError, PointPair,
};

/// Maximum number of halving/doubling steps before four intersections must
/// appear.
pub const MAX_PRESCALE_STEPS: usize = 60;
const MAX_REFINE_STEPS: usize = 100;
const REFINE_TOL: f64 = 1e-14;
/// Incidence residual accepted at a contact point.
pub const CONTACT_RESIDUAL: f64 = 1e-8;
/// Largest angle between the two gradients at a contact point.
pub const CONTACT_ANGLE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContactError {
    #[error("no four-point intersection after {0} scaling steps")]
    PrescaleFailed(usize),
    #[error("conics belong to the same family; they touch everywhere or nowhere")]
    DegenerateFamily,
    #[error("bisector undefined for opposite lines")]
    OppositeLines,
    #[error("point coincides with the centre")]
    AtCentre,
    #[error("contact not certified: residual {residual:e}, gradient angle {angle:e} rad")]
    NotTangent { residual: f64, angle: f64 },
    #[error(transparent)]
    Intersect(#[from] IntersectError),
    #[error(transparent)]
    Gac(#[from] GacError),
}

/// Which side the scaled conic touches from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Touch {
    /// The scaled conic encloses the fixed one.
    Circumscribe,
    /// The scaled conic lies inside the fixed one.
    Inscribe,
}

/// A scaled conic touching a fixed one at two antipodal points.
#[derive(Debug, Clone)]
pub struct Contact {
    pub conic: Conic,
    pub contacts: [Point; 2],
    /// Scale applied to the sample conic.
    pub alpha: f64,
    /// Line through the centre and both contact points.
    pub axis: LineIpns,
}

/// Normalised `½(p₁ + p₂)` of two lines through the origin.
pub fn axis_line(p1: &LineIpns, p2: &LineIpns) -> Result<LineIpns, ContactError> {
    let n = 0.5 * (p1.normal + p2.normal);
    if n.norm() <= 1e-12 {
        return Err(ContactError::OppositeLines);
    }
    Ok(line_ipns(n.x, n.y, 0.5 * (p1.d + p2.d))?)
}

/// Both bisectors of a pair of origin lines, from the two relative
/// orientations of their normals.
pub fn axis_candidates(p1: &LineIpns, p2: &LineIpns) -> Vec<LineIpns> {
    [axis_line(p1, p2), axis_line(p1, &p2.flipped())]
        .into_iter()
        .filter_map(Result::ok)
        .collect()
}

/// Point where the ray from the origin along `u` leaves a centred conic.
pub fn ray_point(e: &Conic, u: Vector2<f64>) -> Result<Point, ContactError> {
    let l = line_ipns(u.y, -u.x, 0.0)?;
    match intersect_line_conic(&l, e)? {
        PointPair::Distinct(_, far) => Ok(far),
        PointPair::Double(p) => Ok(p),
    }
}

/// Ratio `|SK′| / |SK|` scaling a conic through `K` onto `K′` about `S`.
pub fn scale_factor_to_contact(s: Point, k: Point, k_prime: Point) -> Result<f64, ContactError> {
    let base = (k - s).norm();
    if base == 0.0 {
        return Err(ContactError::AtCentre);
    }
    Ok((k_prime - s).norm() / base)
}

fn radial_ratio(e_in: &Conic, e_s: &Conic, axis: &LineIpns) -> Result<f64, ContactError> {
    let u = axis.direction();
    let k_in = ray_point(e_in, u)?;
    let k_s = ray_point(e_s, u)?;
    scale_factor_to_contact(Point::zeros(), k_s, k_in)
}

/// Among candidate axes, the one along which the sample conic must be scaled
/// the most (circumscribing) or the least (inscribing) to reach `e_in`.
/// Ties keep the earlier candidate.
pub fn select_axis(
    candidates: &[LineIpns],
    e_in: &Conic,
    e_s: &Conic,
    mode: Touch,
) -> Result<LineIpns, ContactError> {
    let mut best: Option<(LineIpns, f64)> = None;
    for axis in candidates {
        let r = radial_ratio(e_in, e_s, axis)?;
        let better = match (best, mode) {
            (None, _) => true,
            (Some((_, b)), Touch::Circumscribe) => r > b,
            (Some((_, b)), Touch::Inscribe) => r < b,
        };
        if better {
            best = Some((*axis, r));
        }
    }
    best.map(|(a, _)| a).ok_or(ContactError::OppositeLines)
}

/// The two points where an origin axis meets the inner conic.
pub fn contact_points(e_in: &Conic, axis: &LineIpns) -> Result<PointPair, ContactError> {
    Ok(intersect_line_conic(axis, e_in)?)
}

fn angle_between(a: Vector2<f64>, b: Vector2<f64>) -> f64 {
    let cross = a.x * b.y - a.y * b.x;
    cross.abs().atan2(a.dot(&b).abs())
}

/// Gradient angle and worst incidence residual of a candidate contact.
pub fn tangency_defect(e1: &Conic, e2: &Conic, p: Point) -> (f64, f64) {
    let n1 = e1.normalized();
    let n2 = e2.normalized();
    let angle = angle_between(n1.gradient(p), n2.gradient(p));
    (angle, n1.residual(p).max(n2.residual(p)))
}

fn same_family(a: &Conic, b: &Conic) -> bool {
    let qa = a.matrix().quadratic_part();
    let qb = b.matrix().quadratic_part();
    let (ma, mb) = (qa.abs().max(), qb.abs().max());
    if ma == 0.0 || mb == 0.0 {
        return false;
    }
    let (qa, qb) = (qa / ma, qb / mb);
    (qa - qb).abs().max() <= 1e-12 || (qa + qb).abs().max() <= 1e-12
}

/// Scales `e_s` about the origin until it touches `e_in` from the side given
/// by `mode`.
///
/// The sample is first halved or doubled until the two conics cross in four
/// points. The axis through the contacts is the bisector of the pencil's
/// line pair; scaling along it is exact when both conics share their axes and
/// otherwise is repeated until the pencil collapses to a double line.
pub fn touching(e_s: &Conic, e_in: &Conic, mode: Touch) -> Result<Contact, ContactError> {
    if same_family(e_s, e_in) {
        return Err(ContactError::DegenerateFamily);
    }
    let probe = Vector2::new(1.0, 0.0);
    let r_in = ray_point(e_in, probe)?.norm();

    let mut alpha = 1.0;
    let (mut lo, mut hi): (Option<f64>, Option<f64>) = (None, None);
    let mut crossing = false;
    for _ in 0..MAX_PRESCALE_STEPS {
        let es = e_s.scaled(alpha)?;
        let d = pencil_line_pair(e_in, &es)?;
        let outside = match d.class() {
            ConicClass::IntersectingLinePair => None,
            ConicClass::DoubleLine => {
                // already touching; accept when on the requested side
                let q2 = d.matrix().quadratic_part();
                let w = if q2.row(0).norm() >= q2.row(1).norm() {
                    Vector2::new(q2[(0, 0)], q2[(0, 1)])
                } else {
                    Vector2::new(q2[(1, 0)], q2[(1, 1)])
                };
                let out = ray_point(&es, w)?.norm() > ray_point(e_in, w)?.norm();
                (out != (mode == Touch::Circumscribe)).then_some(out)
            }
            _ => Some(ray_point(&es, probe)?.norm() > r_in),
        };
        match outside {
            None => {
                crossing = true;
                break;
            }
            Some(out) => {
                if out {
                    hi = Some(alpha);
                } else {
                    lo = Some(alpha);
                }
                alpha = match (lo, hi) {
                    (Some(l), Some(h)) => (l * h).sqrt(),
                    (None, _) => alpha * 0.5,
                    (_, None) => alpha * 2.0,
                };
            }
        }
    }
    if !crossing {
        return Err(ContactError::PrescaleFailed(MAX_PRESCALE_STEPS));
    }

    for _ in 0..MAX_REFINE_STEPS {
        let es = e_s.scaled(alpha)?;
        let d = pencil_line_pair(e_in, &es)?;
        if d.class() != ConicClass::IntersectingLinePair {
            break;
        }
        let lines = decompose_lines(&d)?;
        let axis = select_axis(&axis_candidates(&lines.l1, &lines.l2), e_in, &es, mode)?;
        let f = radial_ratio(e_in, &es, &axis)?;
        alpha *= f;
        if (f - 1.0).abs() < REFINE_TOL {
            break;
        }
    }

    // Near tangency the pencil member is close to the double line through
    // both contacts; its dominant row is that line's normal.
    let es = e_s.scaled(alpha)?;
    let d = pencil_line_pair(e_in, &es).map_err(|e| match e {
        IntersectError::IdenticalConics => ContactError::DegenerateFamily,
        other => other.into(),
    })?;
    let q2 = d.matrix().quadratic_part();
    let row = if q2.row(0).norm() >= q2.row(1).norm() {
        q2.row(0)
    } else {
        q2.row(1)
    };
    let axis = line_ipns(row[0], row[1], 0.0)?;
    let (k1, k2) = match contact_points(e_in, &axis)? {
        PointPair::Distinct(a, b) => (a, b),
        PointPair::Double(_) => return Err(ContactError::AtCentre),
    };
    alpha *= radial_ratio(e_in, &es, &axis)?;
    let conic = e_s.scaled(alpha)?;

    let (mut angle, mut residual) = (0.0f64, 0.0f64);
    for k in [k1, k2] {
        let (a, r) = tangency_defect(e_in, &conic, k);
        angle = angle.max(a);
        residual = residual.max(r);
    }
    if angle > CONTACT_ANGLE || residual > CONTACT_RESIDUAL {
        return Err(ContactError::NotTangent { residual, angle });
    }
    Ok(Contact {
        conic,
        contacts: [k1, k2],
        alpha,
        axis,
    })
}

/// `e_s` scaled to enclose `e_in`, touching it at two points.
pub fn circumscribe(e_s: &Conic, e_in: &Conic) -> Result<Contact, ContactError> {
    touching(e_s, e_in, Touch::Circumscribe)
}

/// `e_s` scaled to fit inside `e_out`, touching it at two points.
pub fn inscribe(e_s: &Conic, e_out: &Conic) -> Result<Contact, ContactError> {
    touching(e_s, e_out, Touch::Inscribe)
}
