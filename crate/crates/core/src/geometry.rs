//! Planar polyline and polygon primitives.
//!
//! Lateral offsets are signed positive to the left of the travel direction.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// A point in a metric planar projection.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(r: f64, angle: f64) -> Self {
        Self::new(r * angle.cos(), r * angle.sin())
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Self) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Self) -> f64 {
        (self - o).norm()
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn normalized(self) -> Self {
        let n = self.norm();
        Self::new(self.x / n, self.y / n)
    }

    /// Rotated by +90 degrees.
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn lerp(self, o: Self, t: f64) -> Self {
        self + (o - self) * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Point2 {
    fn add_assign(&mut self, o: Self) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Point2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Self::new(self.x * k, self.y * k)
    }
}

impl Neg for Point2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Unit vector with the given heading.
pub fn heading_vector(psi: f64) -> Point2 {
    Point2::new(psi.cos(), psi.sin())
}

/// Wraps an angle to (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// Removes jumps larger than pi between consecutive angles.
pub fn unwrap_angles(angles: &mut [f64]) {
    for i in 1..angles.len() {
        let prev = angles[i - 1];
        angles[i] = prev + wrap_angle(angles[i] - prev);
    }
}

/// Role of a path vertex within a field plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Headland,
    Lane,
    Transition,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Headland => "headland",
            Label::Lane => "lane",
            Label::Transition => "transition",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "headland" => Some(Label::Headland),
            "lane" => Some(Label::Lane),
            "transition" => Some(Label::Transition),
            _ => None,
        }
    }
}

/// Ordered vertices with per-vertex labels and a cumulative arclength table.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPolyline {
    vertices: Vec<Point2>,
    labels: Vec<Label>,
    cumulative_s: Vec<f64>,
}

impl PathPolyline {
    pub fn new(vertices: Vec<Point2>, labels: Vec<Label>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidPath(format!(
                "need at least 2 vertices, got {}",
                vertices.len()
            )));
        }
        if labels.len() != vertices.len() {
            return Err(Error::InvalidPath("label count differs from vertex count".into()));
        }
        let mut cumulative_s = Vec::with_capacity(vertices.len());
        cumulative_s.push(0.0);
        for (i, w) in vertices.windows(2).enumerate() {
            if !w[0].is_finite() || !w[1].is_finite() {
                return Err(Error::InvalidPath(format!("non-finite vertex near {i}")));
            }
            let d = w[0].dist(w[1]);
            if d <= 1e-12 {
                return Err(Error::InvalidPath(format!("duplicate vertices at {i}")));
            }
            cumulative_s.push(cumulative_s[i] + d);
        }
        Ok(Self {
            vertices,
            labels,
            cumulative_s,
        })
    }

    pub fn with_label(vertices: Vec<Point2>, label: Label) -> Result<Self> {
        let labels = vec![label; vertices.len()];
        Self::new(vertices, labels)
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn cumulative_s(&self) -> &[f64] {
        &self.cumulative_s
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn length(&self) -> f64 {
        *self.cumulative_s.last().unwrap_or(&0.0)
    }

    pub fn first(&self) -> Point2 {
        self.vertices[0]
    }

    pub fn last(&self) -> Point2 {
        self.vertices[self.vertices.len() - 1]
    }

    /// Index of the segment containing arclength `s` (clamped to the path).
    pub fn segment_at(&self, s: f64) -> usize {
        let n = self.vertices.len();
        let k = self.cumulative_s.partition_point(|&c| c <= s);
        k.saturating_sub(1).min(n - 2)
    }

    /// Position at arclength `s` (clamped) and the containing segment index.
    pub fn point_at(&self, s: f64) -> (Point2, usize) {
        let s = s.clamp(0.0, self.length());
        let k = self.segment_at(s);
        let (s0, s1) = (self.cumulative_s[k], self.cumulative_s[k + 1]);
        let t = ((s - s0) / (s1 - s0)).clamp(0.0, 1.0);
        (self.vertices[k].lerp(self.vertices[k + 1], t), k)
    }

    /// Direction of segment `k` in radians.
    pub fn segment_heading(&self, k: usize) -> f64 {
        (self.vertices[k + 1] - self.vertices[k]).angle()
    }

    /// Heading at arclength `s` taken from the containing segment.
    pub fn heading_at(&self, s: f64) -> f64 {
        self.segment_heading(self.segment_at(s.clamp(0.0, self.length())))
    }

    /// Sub-path over the inclusive vertex range.
    pub fn slice(&self, i0: usize, i1: usize) -> Result<Self> {
        Self::new(
            self.vertices[i0..=i1].to_vec(),
            self.labels[i0..=i1].to_vec(),
        )
    }

    /// Sum of absolute heading changes at interior vertices.
    pub fn total_turning(&self) -> f64 {
        total_turning(&self.vertices)
    }

    /// Consumes the path, returning its vertices and labels.
    pub fn into_parts(self) -> (Vec<Point2>, Vec<Label>) {
        (self.vertices, self.labels)
    }
}

/// Sum of absolute heading changes at the interior vertices of a polyline.
pub fn total_turning(points: &[Point2]) -> f64 {
    points
        .windows(3)
        .map(|w| wrap_angle((w[2] - w[1]).angle() - (w[1] - w[0]).angle()).abs())
        .sum()
}

/// Resamples at arclength multiples of `spacing`, keeping both endpoints.
pub fn resample_uniform(path: &PathPolyline, spacing: f64) -> Result<PathPolyline> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::InvalidParameter(format!("spacing must be positive, got {spacing}")));
    }
    let total = path.length();
    let count = (total / spacing + 1e-9).floor() as usize;
    let mut vertices = Vec::with_capacity(count + 2);
    let mut labels = Vec::with_capacity(count + 2);
    for k in 0..=count {
        let s = k as f64 * spacing;
        if k > 0 && total - s <= 1e-9 * total.max(1.0) {
            break;
        }
        let (p, seg) = path.point_at(s);
        vertices.push(p);
        labels.push(path.labels[seg]);
    }
    vertices.push(path.last());
    labels.push(path.labels[path.len() - 1]);
    PathPolyline::new(vertices, labels)
}

/// Endpoint-preserving 1-2-1 averaging applied `iterations` times.
pub fn corner_cut_smooth(path: &PathPolyline, iterations: usize) -> PathPolyline {
    let mut pts = path.vertices.clone();
    let n = pts.len();
    for _ in 0..iterations {
        if n < 3 {
            break;
        }
        let prev = pts.clone();
        for i in 1..n - 1 {
            pts[i] = (prev[i - 1] + prev[i] * 2.0 + prev[i + 1]) * 0.25;
        }
    }
    match PathPolyline::new(pts, path.labels.clone()) {
        Ok(p) => p,
        // Averaging only collapses vertices of already degenerate input.
        Err(_) => path.clone(),
    }
}

/// One sample of a path-aligned coordinate frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSample {
    pub s: f64,
    pub position: Point2,
    pub heading: f64,
    pub curvature: f64,
}

/// Path-aligned coordinate system over a piecewise-affine centerline.
///
/// Between samples the centerline is the chord, the heading is interpolated
/// linearly in `s`, and lateral offsets are measured along the normal of the
/// interpolated heading. Projection and reconstruction share this convention.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceFrame {
    samples: Vec<FrameSample>,
    spacing: f64,
}

/// Builds a frame using the cumulative chord length as arclength.
pub fn build_frame(path: &PathPolyline) -> Result<ReferenceFrame> {
    build_frame_with_arclength(path.vertices(), path.cumulative_s())
}

/// Builds a frame with explicit arclength values, e.g. the arclength of the
/// curve the vertices were sampled from.
pub fn build_frame_with_arclength(points: &[Point2], s: &[f64]) -> Result<ReferenceFrame> {
    let n = points.len();
    if n < 3 {
        return Err(Error::InvalidPath(format!("frame needs at least 3 vertices, got {n}")));
    }
    if s.len() != n {
        return Err(Error::InvalidPath("arclength table length mismatch".into()));
    }
    for i in 0..n - 1 {
        if points[i].dist(points[i + 1]) <= 1e-12 {
            return Err(Error::InvalidPath(format!("duplicate vertices at {i}")));
        }
        // Written negated so NaN arclengths are rejected too.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(s[i + 1] > s[i]) {
            return Err(Error::InvalidPath(format!("arclength not increasing at {i}")));
        }
    }
    let mut seg: Vec<f64> = points.windows(2).map(|w| (w[1] - w[0]).angle()).collect();
    unwrap_angles(&mut seg);
    let mut heading = Vec::with_capacity(n);
    heading.push(0.0);
    for i in 1..n - 1 {
        heading.push(0.5 * (seg[i - 1] + seg[i]));
    }
    heading.push(0.0);
    // End tangents extrapolated from the chord, exact on circles.
    heading[0] = 2.0 * seg[0] - heading[1];
    heading[n - 1] = 2.0 * seg[n - 2] - heading[n - 2];

    let mut curvature = vec![0.0; n];
    for i in 1..n - 1 {
        curvature[i] = circumscribed_curvature(points[i - 1], points[i], points[i + 1])
            .ok_or_else(|| Error::InvalidPath(format!("path reverses at vertex {i}")))?;
    }
    curvature[0] = curvature[1];
    curvature[n - 1] = curvature[n - 2];

    let samples = (0..n)
        .map(|i| FrameSample {
            s: s[i],
            position: points[i],
            heading: heading[i],
            curvature: curvature[i],
        })
        .collect();
    let spacing = (s[n - 1] - s[0]) / (n - 1) as f64;
    Ok(ReferenceFrame { samples, spacing })
}

/// Signed curvature of the circle through three points, positive for left turns.
pub fn circumscribed_curvature(a: Point2, b: Point2, c: Point2) -> Option<f64> {
    let ab = b - a;
    let bc = c - b;
    let ac = c - a;
    let denom = ab.norm() * bc.norm() * ac.norm();
    if denom <= 1e-300 || ac.norm() <= 1e-12 {
        return None;
    }
    Some(2.0 * ab.cross(bc) / denom)
}

impl ReferenceFrame {
    pub fn samples(&self) -> &[FrameSample] {
        &self.samples
    }

    /// Mean interval length.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Number of intervals.
    pub fn intervals(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn start_s(&self) -> f64 {
        self.samples[0].s
    }

    pub fn end_s(&self) -> f64 {
        self.samples[self.samples.len() - 1].s
    }

    pub fn length(&self) -> f64 {
        self.end_s() - self.start_s()
    }

    pub fn interval_length(&self, j: usize) -> f64 {
        self.samples[j + 1].s - self.samples[j].s
    }

    /// Curvature assumed constant over interval `j`: the heading change across
    /// it per unit arclength, so integrating it reproduces the sample headings.
    pub fn interval_curvature(&self, j: usize) -> f64 {
        (self.samples[j + 1].heading - self.samples[j].heading) / self.interval_length(j)
    }

    pub fn max_abs_curvature(&self) -> f64 {
        self.samples.iter().map(|s| s.curvature.abs()).fold(0.0, f64::max)
    }

    pub fn positions(&self) -> Vec<Point2> {
        self.samples.iter().map(|s| s.position).collect()
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let n = self.samples.len();
        let k = self.samples.partition_point(|q| q.s <= s);
        let j = k.saturating_sub(1).min(n - 2);
        let t = (s - self.samples[j].s) / self.interval_length(j);
        (j, t.clamp(0.0, 1.0))
    }

    fn at(&self, j: usize, t: f64) -> (Point2, f64) {
        let a = &self.samples[j];
        let b = &self.samples[j + 1];
        (a.position.lerp(b.position, t), a.heading + t * (b.heading - a.heading))
    }

    /// Centerline position and heading at arclength `s`.
    pub fn centerline(&self, s: f64) -> Result<(Point2, f64)> {
        self.check_domain(s)?;
        let (j, t) = self.locate(s);
        Ok(self.at(j, t))
    }

    fn check_domain(&self, s: f64) -> Result<()> {
        let tol = 1e-9 * self.length().max(1.0);
        if !(s >= self.start_s() - tol && s <= self.end_s() + tol) {
            return Err(Error::OutOfDomain {
                s,
                length: self.end_s(),
            });
        }
        Ok(())
    }

    /// Global pose for path coordinates `(s, e_y, e_psi)`.
    pub fn frame_to_global(&self, s: f64, e_y: f64, e_psi: f64) -> Result<(Point2, f64)> {
        let (c, psi) = self.centerline(s)?;
        Ok((c + heading_vector(psi).perp() * e_y, psi + e_psi))
    }

    /// Arclength and signed lateral offset of `p`.
    ///
    /// Among all foot points the one with the smallest offset magnitude wins;
    /// offsets equal within 1e-9 resolve to the smaller arclength.
    pub fn project_to_frame(&self, p: Point2) -> Result<(f64, f64)> {
        let mut best: Option<(f64, f64)> = None;
        fn consider(best: &mut Option<(f64, f64)>, s: f64, e_y: f64) {
            match best {
                Some((_, e)) if e_y.abs() >= e.abs() - 1e-9 => {}
                _ => *best = Some((s, e_y)),
            }
        }
        const PIECES: usize = 8;
        for j in 0..self.intervals() {
            let f = |t: f64| {
                let (c, psi) = self.at(j, t);
                (p - c).dot(heading_vector(psi))
            };
            let mut t0 = 0.0;
            let mut f0 = f(t0);
            for k in 1..=PIECES {
                let t1 = k as f64 / PIECES as f64;
                let f1 = f(t1);
                let root = if f0 == 0.0 {
                    Some(t0)
                } else if f0 * f1 < 0.0 || (k == PIECES && f1 == 0.0) {
                    Some(bisect(&f, t0, t1, f0))
                } else {
                    None
                };
                if let Some(t) = root {
                    let (c, psi) = self.at(j, t);
                    let s = self.samples[j].s + t * self.interval_length(j);
                    consider(&mut best, s, (p - c).dot(heading_vector(psi).perp()));
                }
                t0 = t1;
                f0 = f1;
            }
        }
        if best.is_none() {
            // Beyond both ends: clamp to the nearer endpoint.
            for sample in [self.samples[0], self.samples[self.samples.len() - 1]] {
                let n = heading_vector(sample.heading).perp();
                let d = p.dist(sample.position);
                let sign = if (p - sample.position).dot(n) < 0.0 { -1.0 } else { 1.0 };
                consider(&mut best, sample.s, sign * d);
            }
        }
        let (s, e_y) = best.expect("frame has at least one interval");
        let dist = self.distance_to_centerline(p);
        if dist > self.length() {
            return Err(Error::OutOfDomain {
                s: dist,
                length: self.length(),
            });
        }
        Ok((s, e_y))
    }

    /// Euclidean distance from `p` to the piecewise-affine centerline.
    pub fn distance_to_centerline(&self, p: Point2) -> f64 {
        self.samples
            .windows(2)
            .map(|w| dist_point_segment(p, w[0].position, w[1].position))
            .fold(f64::INFINITY, f64::min)
    }
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fa < 0.0) == (fm < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Distance from `p` to segment `a`-`b`.
pub fn dist_point_segment(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 <= 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// Distance from `p` to an open polyline.
pub fn dist_point_polyline(p: Point2, pts: &[Point2]) -> f64 {
    if pts.len() == 1 {
        return p.dist(pts[0]);
    }
    pts.windows(2)
        .map(|w| dist_point_segment(p, w[0], w[1]))
        .fold(f64::INFINITY, f64::min)
}

/// Iterates the edges of a closed polygon.
pub fn polygon_edges(poly: &[Point2]) -> impl Iterator<Item = (Point2, Point2)> + '_ {
    (0..poly.len()).map(move |i| (poly[i], poly[(i + 1) % poly.len()]))
}

/// Distance from `p` to the boundary of a closed polygon.
pub fn dist_point_polygon_boundary(p: Point2, poly: &[Point2]) -> f64 {
    polygon_edges(poly)
        .map(|(a, b)| dist_point_segment(p, a, b))
        .fold(f64::INFINITY, f64::min)
}

/// Signed area, positive for counter-clockwise vertex order.
pub fn signed_area(poly: &[Point2]) -> f64 {
    0.5 * polygon_edges(poly).map(|(a, b)| a.cross(b)).sum::<f64>()
}

/// Even-odd point-in-polygon test.
pub fn point_in_polygon(p: Point2, poly: &[Point2]) -> bool {
    let mut inside = false;
    for (a, b) in polygon_edges(poly) {
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

/// Proper or touching intersection of two closed segments.
pub fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let eps = 1e-12;
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps))
        && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps))
    {
        return true;
    }
    let on = |p: Point2, q: Point2, r: Point2, o: f64| {
        o.abs() <= eps
            && r.x >= p.x.min(q.x) - eps
            && r.x <= p.x.max(q.x) + eps
            && r.y >= p.y.min(q.y) - eps
            && r.y <= p.y.max(q.y) + eps
    };
    on(c, d, a, d1) || on(c, d, b, d2) || on(a, b, c, d3) || on(a, b, d, d4)
}

/// True when no two non-adjacent edges of the closed polygon touch.
pub fn is_simple_polygon(poly: &[Point2]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if a.dist(b) <= 1e-12 {
            return false;
        }
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// Drops repeated and collinear vertices of a closed polygon.
pub fn clean_polygon(poly: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = Vec::with_capacity(poly.len());
    for &p in poly {
        if pts.last().is_none_or(|q: &Point2| q.dist(p) > 1e-9) {
            pts.push(p);
        }
    }
    while pts.len() > 1 && pts[0].dist(pts[pts.len() - 1]) <= 1e-9 {
        pts.pop();
    }
    let mut changed = true;
    while changed && pts.len() >= 3 {
        changed = false;
        let n = pts.len();
        for i in 0..n {
            let a = pts[(i + n - 1) % n];
            let b = pts[i];
            let c = pts[(i + 1) % n];
            let scale = (b - a).norm() * (c - b).norm();
            if orient(a, b, c).abs() <= 1e-12 * scale.max(1e-300) && (b - a).dot(c - b) > 0.0 {
                pts.remove(i);
                changed = true;
                break;
            }
        }
    }
    pts
}

fn line_intersection(p: Point2, d: Point2, q: Point2, e: Point2) -> Option<Point2> {
    let den = d.cross(e);
    if den.abs() <= 1e-12 {
        return None;
    }
    let t = (q - p).cross(e) / den;
    Some(p + d * t)
}

/// Erodes a simple polygon by `distance`.
///
/// Edges are translated inward and re-intersected; edges that invert are
/// dropped until the remaining loop is consistent. The result is
/// counter-clockwise.
pub fn inward_offset(polygon: &[Point2], distance: f64) -> Result<Vec<Point2>> {
    if !(distance > 0.0 && distance.is_finite()) {
        return Err(Error::InvalidParameter(format!("offset distance must be positive, got {distance}")));
    }
    let mut poly = clean_polygon(polygon);
    if poly.len() < 3 || !is_simple_polygon(&poly) {
        return Err(Error::InvalidPath("offset needs a simple polygon".into()));
    }
    if signed_area(&poly) < 0.0 {
        poly.reverse();
    }
    let n = poly.len();
    let lines: Vec<(Point2, Point2)> = (0..n)
        .map(|i| {
            let d = (poly[(i + 1) % n] - poly[i]).normalized();
            (poly[i] + d.perp() * distance, d)
        })
        .collect();
    let mut active: Vec<usize> = (0..n).collect();
    let out = loop {
        if active.len() < 3 {
            return Err(Error::EmptyOffset(distance));
        }
        let m = active.len();
        let mut verts = Vec::with_capacity(m);
        let mut parallel = None;
        for k in 0..m {
            let (p, d) = lines[active[(k + m - 1) % m]];
            let (q, e) = lines[active[k]];
            match line_intersection(p, d, q, e) {
                Some(v) => verts.push(v),
                None => {
                    parallel = Some(k);
                    break;
                }
            }
        }
        if let Some(k) = parallel {
            active.remove(k);
            continue;
        }
        let mut worst: Option<(usize, f64)> = None;
        for k in 0..m {
            let along = (verts[(k + 1) % m] - verts[k]).dot(lines[active[k]].1);
            if along <= 1e-12 && worst.is_none_or(|(_, w)| along < w) {
                worst = Some((k, along));
            }
        }
        match worst {
            Some((k, _)) => {
                active.remove(k);
            }
            None => break verts,
        }
    };
    let ok = signed_area(&out) > 0.0
        && is_simple_polygon(&out)
        && out.iter().all(|&v| {
            point_in_polygon(v, &poly) && dist_point_polygon_boundary(v, &poly) >= distance - 1e-6
        });
    if !ok {
        return Err(Error::EmptyOffset(distance));
    }
    Ok(out)
}
