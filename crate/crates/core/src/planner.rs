//! Switching paths between two points of the phase plane built from a ladder
//! of mutually tangent orbits of two oscillators.

use std::fmt;

use thiserror::Error;

use crate::contact::{ray_point, tangency_defect, touching, Contact, ContactError, Touch};
use crate::dynamics::{
    fit_centered_conic, rk4_sample, DynamicsError, Oscillator, SwitchedSystem, DEFAULT_DT,
};
use crate::gac::{
    embed_point, line_from_opns, line_opns_through, Conic, ConicClass, GacError, Point,
};
use crate::intersect::{
    decompose_lines, intersect_line_conic, pencil_line_pair, IntersectError, PointPair,
};

pub const DEFAULT_MAX_RUNGS: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Gac(#[from] GacError),
    #[error(transparent)]
    Intersect(#[from] IntersectError),
    #[error(transparent)]
    Contact(#[from] ContactError),
    #[error("no orbit of the second system meets the final orbit within {0} rungs")]
    MaxRungsExceeded(usize),
    #[error("target not reachable: {0}")]
    NotReachable(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Scale-free incidence residual accepted for switch points.
    pub incidence: f64,
    /// Largest gradient angle (radians) at a contact switch.
    pub tangency: f64,
    /// Distance under which two points are the same, relative to their size.
    pub coincidence: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            incidence: 1e-8,
            tangency: 1e-6,
            coincidence: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathRequest {
    pub system: SwitchedSystem,
    pub tolerances: Tolerances,
    pub max_rungs: usize,
    /// Runge–Kutta step used to sample the orbits that are fitted.
    pub dt: f64,
}

impl PathRequest {
    pub fn new(system: SwitchedSystem) -> Self {
        Self {
            system,
            tolerances: Tolerances::default(),
            max_rungs: DEFAULT_MAX_RUNGS,
            dt: DEFAULT_DT,
        }
    }

    fn validate(&self) -> Result<(), PlanError> {
        let t = &self.tolerances;
        if !(t.incidence > 0.0 && t.tangency > 0.0 && t.coincidence > 0.0) {
            return Err(PlanError::InvalidRequest(
                "tolerances must be positive".into(),
            ));
        }
        if self.max_rungs == 0 {
            return Err(PlanError::InvalidRequest(
                "max_rungs must be at least 1".into(),
            ));
        }
        if self.dt.is_nan() || self.dt <= 0.0 {
            return Err(PlanError::InvalidRequest("dt must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SwitchKind {
    Start,
    Contact,
    Intersection,
    End,
}

impl fmt::Display for SwitchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Start => "start",
            Self::Contact => "contact",
            Self::Intersection => "intersection",
            Self::End => "end",
        })
    }
}

/// Arc of one orbit travelled forward in time.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    /// 1 or 2.
    pub family: usize,
    pub conic: Conic,
    pub entry: Point,
    pub exit: Point,
    pub duration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchPoint {
    pub point: Point,
    pub from_family: usize,
    pub to_family: usize,
    pub kind: SwitchKind,
    /// Duration of the segment that ends here.
    pub arc_duration_before: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingPath {
    pub start: Point,
    pub target: Point,
    pub segments: Vec<Segment>,
    /// Interior switches, in order of travel.
    pub switches: Vec<SwitchPoint>,
}

impl SwitchingPath {
    pub fn switch_count(&self) -> usize {
        self.switches.len()
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Start, interior switches and end as one list.
    pub fn waypoints(&self) -> Vec<SwitchPoint> {
        let mut out = vec![SwitchPoint {
            point: self.start,
            from_family: 0,
            to_family: if self.segments.is_empty() { 0 } else { 1 },
            kind: SwitchKind::Start,
            arc_duration_before: 0.0,
        }];
        out.extend(self.switches.iter().copied());
        out.push(SwitchPoint {
            point: self.target,
            from_family: self.segments.last().map_or(0, |s| s.family),
            to_family: 0,
            kind: SwitchKind::End,
            arc_duration_before: self.segments.last().map_or(0.0, |s| s.duration),
        });
        out
    }
}

/// Target orbit of the first family and the scale relating it to the
/// initial orbit.
#[derive(Debug, Clone)]
pub struct FinalEllipse {
    pub conic: Conic,
    /// Ratio of the target's distance from the centre to that of the initial
    /// orbit along the same ray.
    pub scale: f64,
    /// Where the ray towards the target crosses the initial orbit.
    pub ray_point: Point,
}

/// Scales the initial orbit `e11` about the origin so it passes through `b`.
pub fn final_ellipse(e11: &Conic, b: Point) -> Result<FinalEllipse, PlanError> {
    if b == Point::zeros() {
        return Err(DynamicsError::ZeroPoint("target").into());
    }
    let origin = embed_point(0.0, 0.0)?;
    let cb = embed_point(b.x, b.y)?;
    let l = line_from_opns(&line_opns_through(&origin, &cb)?)?;
    let c = match intersect_line_conic(&l, e11)? {
        PointPair::Distinct(p, q) => {
            if p.dot(&b) > q.dot(&b) {
                p
            } else {
                q
            }
        }
        PointPair::Double(p) => p,
    };
    let cc = embed_point(c.x, c.y)?;
    let nbar = crate::clifford::Multivector::basis(crate::clifford::NBAR_PLUS);
    let ratio = nbar.inner(cb.multivector()).scalar_part().abs()
        / nbar.inner(cc.multivector()).scalar_part().abs();
    let scale = ratio.sqrt();
    Ok(FinalEllipse {
        conic: e11.scaled(scale)?,
        scale,
        ray_point: c,
    })
}

fn coincide(p: Point, q: Point, tol: f64) -> bool {
    (p - q).norm() <= tol * (1.0 + p.norm().max(q.norm()))
}

/// Forward time from `from` to `to`; zero when they coincide.
fn forward_time(osc: &Oscillator, from: Point, to: Point, tol: f64) -> Result<f64, PlanError> {
    if coincide(from, to, tol) {
        return Ok(0.0);
    }
    Ok(osc.arc_duration(from, to)?)
}

/// The candidate reached first when flowing forward from `from`.
fn first_reached(
    osc: &Oscillator,
    from: Point,
    candidates: &[Point],
    tol: f64,
) -> Result<(Point, f64), PlanError> {
    let mut best: Option<(Point, f64)> = None;
    for &c in candidates {
        let t = forward_time(osc, from, c, tol)?;
        if best.is_none_or(|(_, bt)| t < bt) {
            best = Some((c, t));
        }
    }
    best.ok_or_else(|| PlanError::NotReachable("no candidate switch point".into()))
}

/// The next rung: the orbit from `sample`'s family touching `current`.
pub fn ladder_step(sample: &Conic, current: &Conic, outward: bool) -> Result<Contact, PlanError> {
    let mode = if outward {
        Touch::Circumscribe
    } else {
        Touch::Inscribe
    };
    Ok(touching(sample, current, mode)?)
}

/// Points where an orbit of the second family meets the final orbit, if any.
fn meet_final(e2: &Conic, ef: &Conic) -> Result<Option<Vec<Point>>, PlanError> {
    let d = match pencil_line_pair(ef, e2) {
        Ok(d) => d,
        Err(IntersectError::IdenticalConics) => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    if !matches!(
        d.class(),
        ConicClass::IntersectingLinePair | ConicClass::DoubleLine
    ) {
        return Ok(None);
    }
    let lines = decompose_lines(&d)?;
    let mut pts = Vec::with_capacity(4);
    let pair = if d.class() == ConicClass::DoubleLine {
        vec![lines.l1]
    } else {
        vec![lines.l1, lines.l2]
    };
    for l in pair {
        match intersect_line_conic(&l, ef)? {
            PointPair::Distinct(p, q) => pts.extend([p, q]),
            PointPair::Double(p) => pts.push(p),
        }
    }
    Ok(Some(pts))
}

struct Builder {
    path: SwitchingPath,
}

impl Builder {
    fn push(&mut self, seg: Segment, kind: Option<SwitchKind>, next_family: usize) {
        if let Some(kind) = kind {
            self.path.switches.push(SwitchPoint {
                point: seg.exit,
                from_family: seg.family,
                to_family: next_family,
                kind,
                arc_duration_before: seg.duration,
            });
        }
        self.path.segments.push(seg);
    }
}

/// Fits the orbit of `osc` through `p` from one period of Runge–Kutta samples.
pub fn fitted_orbit(osc: &Oscillator, p: Point, dt: f64) -> Result<Conic, PlanError> {
    let samples = rk4_sample(osc.matrix(), p, dt, osc.samples_per_period(dt))?;
    Ok(fit_centered_conic(&samples)?)
}

/// Plans a path from `start` to `target` that begins and ends on the first
/// system, switching at tangency points of alternating orbits and finally at
/// an intersection with the orbit of the first system through the target.
pub fn plan(req: &PathRequest) -> Result<SwitchingPath, PlanError> {
    req.validate()?;
    let sys = &req.system;
    let tol = req.tolerances.coincidence;
    let (a, b) = (sys.start, sys.target);
    let mut out = Builder {
        path: SwitchingPath {
            start: a,
            target: b,
            segments: Vec::new(),
            switches: Vec::new(),
        },
    };
    if coincide(a, b, tol) {
        return Ok(out.path);
    }
    let (f1, f2) = (&sys.first, &sys.second);

    let e11 = fitted_orbit(f1, a, req.dt)?;
    let fin = final_ellipse(&e11, b)?;
    if (fin.scale - 1.0).abs() <= req.tolerances.incidence.sqrt() {
        let duration = forward_time(f1, a, b, tol)?;
        out.push(
            Segment {
                family: 1,
                conic: e11,
                entry: a,
                exit: b,
                duration,
            },
            None,
            0,
        );
        return Ok(out.path);
    }
    let outward = fin.scale > 1.0;
    let sample_start = ray_point(&e11, nalgebra::Vector2::new(0.0, 1.0))?;
    let sample2 = fitted_orbit(f2, sample_start, req.dt)?;

    let mut current = e11.clone();
    let mut entry = a;
    for _ in 0..req.max_rungs {
        // first family → second family at a contact
        let rung2 = ladder_step(&sample2, &current, outward)?;
        let (k, t) = first_reached(f1, entry, &rung2.contacts, tol)?;
        out.push(
            Segment {
                family: 1,
                conic: current.clone(),
                entry,
                exit: k,
                duration: t,
            },
            Some(SwitchKind::Contact),
            2,
        );
        entry = k;
        current = rung2.conic;

        if let Some(pts) = meet_final(&current, &fin.conic)? {
            let (x, t) = first_reached(f2, entry, &pts, tol)?;
            out.push(
                Segment {
                    family: 2,
                    conic: current.clone(),
                    entry,
                    exit: x,
                    duration: t,
                },
                Some(SwitchKind::Intersection),
                1,
            );
            let t = forward_time(f1, x, b, tol)?;
            out.push(
                Segment {
                    family: 1,
                    conic: fin.conic.clone(),
                    entry: x,
                    exit: b,
                    duration: t,
                },
                None,
                0,
            );
            return Ok(out.path);
        }

        // second family → first family at a contact
        let rung1 = ladder_step(&e11, &current, outward)?;
        let (k, t) = first_reached(f2, entry, &rung1.contacts, tol)?;
        out.push(
            Segment {
                family: 2,
                conic: current.clone(),
                entry,
                exit: k,
                duration: t,
            },
            Some(SwitchKind::Contact),
            1,
        );
        entry = k;
        current = rung1.conic;
    }
    Err(PlanError::MaxRungsExceeded(req.max_rungs))
}

/// Outcome of one verification check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst residual met by the check.
    pub worst: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{:<13} {}  worst {:.3e}{}",
                c.name,
                if c.passed { "ok  " } else { "FAIL" },
                c.worst,
                if c.detail.is_empty() {
                    String::new()
                } else {
                    format!("  ({})", c.detail)
                }
            )?;
        }
        Ok(())
    }
}

struct Tally {
    name: &'static str,
    limit: f64,
    worst: f64,
    failures: Vec<String>,
}

impl Tally {
    fn new(name: &'static str, limit: f64) -> Self {
        Self {
            name,
            limit,
            worst: 0.0,
            failures: Vec::new(),
        }
    }

    fn record(&mut self, value: f64, what: impl FnOnce() -> String) {
        let value = if value.is_nan() { f64::INFINITY } else { value };
        self.worst = self.worst.max(value);
        if value > self.limit {
            self.failures.push(what());
        }
    }

    fn fail(&mut self, what: String) {
        self.worst = f64::INFINITY;
        self.failures.push(what);
    }

    fn finish(self) -> Check {
        Check {
            name: self.name,
            passed: self.failures.is_empty(),
            worst: self.worst,
            detail: self.failures.join("; "),
        }
    }
}

/// Re-derives every property a planned path must have.
pub fn verify_path(path: &SwitchingPath, sys: &SwitchedSystem, tol: &Tolerances) -> VerifyReport {
    let segs = &path.segments;
    let mut continuity = Tally::new("continuity", 0.0);
    let mut incidence = Tally::new("incidence", tol.incidence);
    let mut tangency = Tally::new("tangency", tol.tangency);
    let mut reach = Tally::new("reachability", 1e-6);
    let mut ends = Tally::new("endpoints", 0.0);
    let mut families = Tally::new("families", 1e-5);

    for (i, w) in segs.windows(2).enumerate() {
        continuity.record((w[0].exit - w[1].entry).norm(), || {
            format!("gap after segment {i}")
        });
    }
    for (i, s) in segs.iter().enumerate() {
        for p in [s.entry, s.exit] {
            incidence.record(s.conic.residual(p), || {
                format!("segment {i} endpoint off its orbit")
            });
        }
        if s.family != 1 && s.family != 2 {
            families.fail(format!("segment {i} has family {}", s.family));
            continue;
        }
        let osc = sys.family(s.family);
        // the orbit's quadratic part must be proportional to the conserved form
        let q = s.conic.matrix().quadratic_part();
        let m = osc.form().m;
        let (q, m) = (q / q[(1, 1)], m / m[(1, 1)]);
        families.record((q - m).abs().max(), || {
            format!("segment {i} is not an orbit")
        });
        if s.duration == 0.0 {
            reach.record((s.entry - s.exit).norm(), || format!("segment {i} jumps"));
        } else {
            match osc.arc_duration(s.entry, s.exit) {
                Ok(t) => reach.record((t - s.duration).abs() / osc.period(), || {
                    format!("segment {i} not travelled forward in time")
                }),
                Err(e) => reach.fail(format!("segment {i}: {e}")),
            }
        }
    }
    if let (Some(first), Some(last)) = (segs.first(), segs.last()) {
        if first.family != 1 || last.family != 1 {
            families.fail("path must start and end on the first system".into());
        }
        if segs.windows(2).any(|w| w[0].family == w[1].family) {
            families.fail("families do not alternate".into());
        }
        ends.record((first.entry - path.start).norm(), || {
            "path does not begin at start".into()
        });
        ends.record((last.exit - path.target).norm(), || {
            "path does not end at target".into()
        });
    } else {
        ends.record((path.start - path.target).norm(), || {
            "empty path between distinct points".into()
        });
    }
    if path.switches.len() + 1 != segs.len().max(1) {
        continuity.fail("switch list does not match segments".into());
    }
    for (i, sw) in path.switches.iter().enumerate() {
        let (Some(before), Some(after)) = (segs.get(i), segs.get(i + 1)) else {
            continue;
        };
        continuity.record((sw.point - before.exit).norm(), || {
            format!("switch {i} misplaced")
        });
        for c in [&before.conic, &after.conic] {
            incidence.record(c.residual(sw.point), || format!("switch {i} off an orbit"));
        }
        if sw.kind == SwitchKind::Contact {
            let (angle, _) = tangency_defect(&before.conic, &after.conic, sw.point);
            tangency.record(angle, || format!("switch {i} is not a tangency"));
        }
    }
    VerifyReport {
        checks: vec![
            continuity.finish(),
            incidence.finish(),
            tangency.finish(),
            reach.finish(),
            ends.finish(),
            families.finish(),
        ],
    }
}
