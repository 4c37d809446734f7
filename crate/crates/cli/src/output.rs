//! Switch-point CSV, segment JSON and SVG phase portraits.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use gacpath::dynamics::SwitchedSystem;
use gacpath::gac::{conic_params, Conic, LineIpns, Point};
use gacpath::planner::{SwitchingPath, VerifyReport};
use serde::Serialize;

/// Drops the sign of negative zero so outputs do not flicker between runs
/// that land on either side of zero.
pub fn clean(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

#[derive(Serialize)]
struct SwitchRow {
    index: usize,
    x: f64,
    y: f64,
    from_family: usize,
    to_family: usize,
    kind: String,
    arc_duration_before: f64,
}

pub fn switch_points_csv(path: &SwitchingPath) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (index, sp) in path.waypoints().iter().enumerate() {
        w.serialize(SwitchRow {
            index,
            x: clean(sp.point.x),
            y: clean(sp.point.y),
            from_family: sp.from_family,
            to_family: sp.to_family,
            kind: sp.kind.to_string(),
            arc_duration_before: clean(sp.arc_duration_before),
        })?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[derive(Serialize)]
struct SegmentOut {
    index: usize,
    family: usize,
    entry: [f64; 2],
    exit: [f64; 2],
    duration: f64,
    /// Coefficients on n̄₊, n̄₋, n̄ₓ, e₁, e₂, n₊, scaled to unit max-abs.
    conic: [f64; 6],
}

#[derive(Serialize)]
struct CheckOut {
    name: &'static str,
    passed: bool,
    worst: f64,
    detail: String,
}

#[derive(Serialize)]
struct PathOut {
    start: [f64; 2],
    target: [f64; 2],
    switch_count: usize,
    total_duration: f64,
    verified: bool,
    checks: Vec<CheckOut>,
    segments: Vec<SegmentOut>,
}

fn pair(p: Point) -> [f64; 2] {
    [clean(p.x), clean(p.y)]
}

fn finite_worst(v: f64) -> f64 {
    // JSON has no infinity; a failed check reports the largest float
    if v.is_finite() {
        clean(v)
    } else {
        f64::MAX
    }
}

pub fn segments_json(path: &SwitchingPath, report: &VerifyReport) -> Result<String> {
    let out = PathOut {
        start: pair(path.start),
        target: pair(path.target),
        switch_count: path.switch_count(),
        total_duration: clean(path.total_duration()),
        verified: report.passed(),
        checks: report
            .checks
            .iter()
            .map(|c| CheckOut {
                name: c.name,
                passed: c.passed,
                worst: finite_worst(c.worst),
                detail: c.detail.clone(),
            })
            .collect(),
        segments: path
            .segments
            .iter()
            .enumerate()
            .map(|(index, s)| SegmentOut {
                index,
                family: s.family,
                entry: pair(s.entry),
                exit: pair(s.exit),
                duration: clean(s.duration),
                conic: s.conic.normalized().coefficients().map(clean),
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&out)? + "\n")
}

/// Axis-aligned box `[xmin, xmax] × [ymin, ymax]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min: Point,
    pub max: Point,
}

impl Bounds {
    fn around(p: Point, r: f64) -> Self {
        Self {
            min: p - Point::new(r, r),
            max: p + Point::new(r, r),
        }
    }

    fn union(self, o: Self) -> Self {
        Self {
            min: self.min.inf(&o.min),
            max: self.max.sup(&o.max),
        }
    }

    fn include(self, p: Point) -> Self {
        self.union(Self { min: p, max: p })
    }

    fn with_margin(self, frac: f64) -> Self {
        let pad = (self.max - self.min) * frac;
        let pad = Point::new(pad.x.max(1e-9), pad.y.max(1e-9));
        Self {
            min: self.min - pad,
            max: self.max + pad,
        }
    }
}

/// Bounding box of an ellipse conic, if it is one.
pub fn ellipse_bounds(c: &Conic) -> Option<Bounds> {
    let p = conic_params(&c.matrix()).ok()?;
    let (s, k) = p.theta.sin_cos();
    let hx = (p.a * p.a * k * k + p.b * p.b * s * s).sqrt();
    let hy = (p.a * p.a * s * s + p.b * p.b * k * k).sqrt();
    Some(Bounds {
        min: p.centre - Point::new(hx, hy),
        max: p.centre + Point::new(hx, hy),
    })
}

const FAMILY_STROKE: [&str; 3] = ["#444444", "#1f77b4", "#d62728"];

struct Svg {
    body: String,
    bounds: Bounds,
    unit: f64,
}

impl Svg {
    fn new(bounds: Bounds) -> Self {
        let span = (bounds.max - bounds.min).max();
        Self {
            body: String::new(),
            bounds,
            unit: span / 400.0,
        }
    }

    /// SVG has y pointing down.
    fn xy(p: Point) -> String {
        format!("{:.6},{:.6}", clean(p.x), clean(-p.y))
    }

    fn grid(&mut self) {
        let b = self.bounds;
        let span = (b.max - b.min).max();
        let raw = span / 10.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .into_iter()
            .map(|m| m * mag)
            .find(|s| *s >= raw)
            .unwrap_or(10.0 * mag);
        let w = self.unit * 0.5;
        let mut d = String::new();
        let mut x = (b.min.x / step).ceil() * step;
        while x <= b.max.x {
            let _ = write!(
                d,
                "M{} L{} ",
                Self::xy(Point::new(x, b.min.y)),
                Self::xy(Point::new(x, b.max.y))
            );
            x += step;
        }
        let mut y = (b.min.y / step).ceil() * step;
        while y <= b.max.y {
            let _ = write!(
                d,
                "M{} L{} ",
                Self::xy(Point::new(b.min.x, y)),
                Self::xy(Point::new(b.max.x, y))
            );
            y += step;
        }
        let _ = writeln!(
            self.body,
            r##"<path class="grid" d="{}" fill="none" stroke="#cccccc" stroke-width="{w:.6}" stroke-dasharray="{:.6},{:.6}"/>"##,
            d.trim_end(),
            4.0 * w,
            4.0 * w
        );
        let axes = format!(
            "M{} L{} M{} L{}",
            Self::xy(Point::new(b.min.x, 0.0)),
            Self::xy(Point::new(b.max.x, 0.0)),
            Self::xy(Point::new(0.0, b.min.y)),
            Self::xy(Point::new(0.0, b.max.y))
        );
        let _ = writeln!(
            self.body,
            r##"<path class="axes" d="{axes}" fill="none" stroke="#999999" stroke-width="{w:.6}"/>"##
        );
    }

    fn polyline(&mut self, class: &str, pts: &[Point], stroke: &str, closed: bool) {
        let mut d = String::new();
        for (i, p) in pts.iter().enumerate() {
            let _ = write!(d, "{}{} ", if i == 0 { "M" } else { "L" }, Self::xy(*p));
        }
        if closed {
            d.push('Z');
        }
        let _ = writeln!(
            self.body,
            r#"<path class="{class}" d="{}" fill="none" stroke="{stroke}" stroke-width="{:.6}"/>"#,
            d.trim_end(),
            self.unit * 1.5
        );
    }

    fn dot(&mut self, class: &str, p: Point, fill: &str) {
        let xy = Self::xy(p);
        let (x, y) = xy.split_once(',').unwrap();
        let _ = writeln!(
            self.body,
            r#"<circle class="{class}" cx="{x}" cy="{y}" r="{:.6}" fill="{fill}" stroke="black" stroke-width="{:.6}"/>"#,
            self.unit * 3.0,
            self.unit * 0.5
        );
    }

    fn finish(self, title: &str, timestamp: bool) -> String {
        let b = self.bounds;
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.6} {:.6} {:.6} {:.6}" width="800" height="{:.0}">"#,
            clean(b.min.x),
            clean(-b.max.y),
            b.max.x - b.min.x,
            b.max.y - b.min.y,
            800.0 * (b.max.y - b.min.y) / (b.max.x - b.min.x)
        );
        if timestamp {
            let secs = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs());
            let _ = writeln!(out, "<!-- generated at unix time {secs} -->");
        }
        let _ = writeln!(out, "<title>{title}</title>");
        out.push_str(&self.body);
        out.push_str("</svg>\n");
        out
    }
}

fn ellipse_points(c: &Conic, n: usize) -> Vec<Point> {
    match conic_params(&c.matrix()) {
        Ok(p) => (0..n)
            .map(|i| p.boundary_point(i as f64 * std::f64::consts::TAU / n as f64))
            .collect(),
        Err(_) => Vec::new(),
    }
}

/// Phase portrait of a planned path: one path element per travelled arc.
pub fn path_svg(path: &SwitchingPath, sys: &SwitchedSystem, timestamp: bool) -> String {
    let mut bounds = Bounds::around(path.start, 0.0).include(path.target);
    for s in &path.segments {
        if let Some(b) = ellipse_bounds(&s.conic) {
            bounds = bounds.union(b);
        }
    }
    if path.segments.is_empty() {
        bounds = Bounds::around(path.start, path.start.norm().max(1.0)).include(Point::zeros());
    }
    let mut svg = Svg::new(bounds.with_margin(0.1));
    svg.grid();
    for s in &path.segments {
        let osc = sys.family(s.family);
        let steps = ((s.duration / osc.period() * 360.0).ceil() as usize).clamp(8, 720);
        let pts: Vec<Point> = (0..=steps)
            .map(|i| osc.flow(s.entry, s.duration * i as f64 / steps as f64))
            .collect();
        svg.polyline(
            &format!("arc family{}", s.family),
            &pts,
            FAMILY_STROKE[s.family],
            false,
        );
    }
    for sp in path.waypoints() {
        let fill = match sp.kind {
            gacpath::planner::SwitchKind::Start => "#2ca02c",
            gacpath::planner::SwitchKind::End => "#9467bd",
            _ => "white",
        };
        svg.dot(&format!("switch {}", sp.kind), sp.point, fill);
    }
    svg.finish(
        &format!("switching path, {} switches", path.switch_count()),
        timestamp,
    )
}

/// Two conics, the lines of their degenerate pair and the common points.
pub fn intersection_svg(
    conics: &[&Conic],
    lines: &[LineIpns],
    circle: Option<&Conic>,
    points: &[Point],
    timestamp: bool,
) -> String {
    let mut bounds = Bounds::around(Point::zeros(), 0.0);
    for c in conics {
        if let Some(b) = ellipse_bounds(c) {
            bounds = bounds.union(b);
        }
    }
    let bounds = bounds.with_margin(0.1);
    let mut svg = Svg::new(bounds);
    svg.grid();
    for (i, c) in conics.iter().enumerate() {
        svg.polyline(
            "conic",
            &ellipse_points(c, 360),
            FAMILY_STROKE[1 + i % 2],
            true,
        );
    }
    if let Some(c) = circle {
        svg.polyline("circle", &ellipse_points(c, 360), "#2ca02c", true);
    }
    let reach = (bounds.max - bounds.min).norm();
    for l in lines {
        let foot = l.normal * l.d;
        let d = l.direction() * reach;
        svg.polyline("line", &[foot - d, foot + d], FAMILY_STROKE[0], false);
    }
    for p in points {
        svg.dot("point", *p, "white");
    }
    svg.finish("conic intersection", timestamp)
}

pub fn write(dir: &Path, name: &Path, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let p = dir.join(name);
    std::fs::write(&p, contents).with_context(|| format!("cannot write {}", p.display()))
}
