//! Field geometry input: contour, headland ring and mainfield lanes, plus the
//! traversal plan that strings them into one labeled path.

use std::path::Path;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::geometry::{
    clean_polygon, inward_offset, is_simple_polygon, point_in_polygon, resample_uniform, signed_area,
    wrap_angle, Label, PathPolyline, Point2,
};

/// Contour, headland ring and lanes of one field, in metres.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldLayout {
    /// Counter-clockwise field boundary without a repeated closing vertex.
    pub contour: Vec<Point2>,
    /// Counter-clockwise headland ring without a repeated closing vertex.
    pub headland: Vec<Point2>,
    /// Mainfield lanes in traversal order; each starts and ends on the headland.
    pub lanes: Vec<Vec<Point2>>,
}

/// Which parts of a layout were read and which were synthesised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Provenance {
    pub headland_synthesised: bool,
    pub lanes_synthesised: bool,
}

/// Coordinate spans below this suggest degrees rather than metres.
const MIN_SPAN: f64 = 10.0;

fn input(msg: impl Into<String>) -> Error {
    Error::Input(msg.into())
}

fn ccw(mut ring: Vec<Point2>) -> Vec<Point2> {
    if signed_area(&ring) < 0.0 {
        ring.reverse();
    }
    ring
}

fn check_contour(contour: &[Point2]) -> Result<Vec<Point2>> {
    let ring = clean_polygon(contour);
    if ring.len() < 3 {
        return Err(input("contour needs at least 3 distinct vertices"));
    }
    if ring.iter().any(|p| !p.is_finite()) {
        return Err(input("contour has non-finite coordinates"));
    }
    if !is_simple_polygon(&ring) {
        return Err(input("contour is not a simple polygon"));
    }
    let (lo, hi) = ring.iter().fold((ring[0], ring[0]), |(lo, hi), p| {
        (Point2::new(lo.x.min(p.x), lo.y.min(p.y)), Point2::new(hi.x.max(p.x), hi.y.max(p.y)))
    });
    if (hi.x - lo.x).max(hi.y - lo.y) < MIN_SPAN {
        return Err(input(format!(
            "contour spans less than {MIN_SPAN} units; coordinates must be metres in a planar projection, not degrees"
        )));
    }
    Ok(ccw(ring))
}

impl FieldLayout {
    /// Completes a layout from whatever parts are given: a missing headland
    /// is the contour eroded by `w / 2`; missing lanes are straight parallels
    /// at spacing `w` clipped to the headland interior. Explicit two-point
    /// lanes crossing the headland are clipped to it.
    pub fn complete(
        contour: &[Point2],
        headland: Option<Vec<Point2>>,
        lanes: Option<Vec<Vec<Point2>>>,
        width: f64,
    ) -> Result<(Self, Provenance)> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidParameter(format!("operating width {width}")));
        }
        let contour = check_contour(contour)?;
        let mut prov = Provenance::default();
        let headland = match headland {
            Some(h) => {
                let h = clean_polygon(&h);
                if h.len() < 3 || !is_simple_polygon(&h) {
                    return Err(input("headland is not a simple ring"));
                }
                ccw(h)
            }
            None => {
                prov.headland_synthesised = true;
                inward_offset(&contour, 0.5 * width).map_err(|e| input(format!("cannot erode contour: {e}")))?
            }
        };
        let lanes = match lanes {
            Some(lanes) => lanes
                .into_iter()
                .map(|l| match l.as_slice() {
                    [a, b] => clip_to_polygon(*a, *b, &headland).map(|(p, q)| vec![p, q]).unwrap_or(l),
                    _ => l,
                })
                .collect(),
            None => {
                prov.lanes_synthesised = true;
                synthesize_lanes(&headland, width)
            }
        };
        for l in &lanes {
            if l.len() < 2 {
                return Err(input("lane with fewer than 2 points"));
            }
        }
        Ok((Self { contour, headland, lanes }, prov))
    }
}

/// Longest piece of the line through `a` and `b` inside `poly`.
pub fn clip_to_polygon(a: Point2, b: Point2, poly: &[Point2]) -> Option<(Point2, Point2)> {
    let d = b - a;
    if d.norm() <= 1e-12 {
        return None;
    }
    let n = poly.len();
    let mut ts: Vec<f64> = Vec::new();
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        let e = q - p;
        let den = d.cross(e);
        if den.abs() <= 1e-12 {
            continue;
        }
        let t = (p - a).cross(e) / den;
        let u = (p - a).cross(d) / den;
        if (-1e-12..=1.0 + 1e-12).contains(&u) {
            ts.push(t);
        }
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|x, y| (*x - *y).abs() <= 1e-9);
    ts.windows(2)
        .filter(|w| point_in_polygon(a + d * (0.5 * (w[0] + w[1])), poly))
        .max_by(|x, y| (x[1] - x[0]).total_cmp(&(y[1] - y[0])))
        .map(|w| (a + d * w[0], a + d * w[1]))
}

/// Parallels to the longest headland edge at spacing `width`, centred across
/// the headland, `floor(extent / width)` of them.
pub fn synthesize_lanes(headland: &[Point2], width: f64) -> Vec<Vec<Point2>> {
    let n = headland.len();
    let Some(k) = (0..n).max_by(|&i, &j| {
        let li = headland[i].dist(headland[(i + 1) % n]);
        let lj = headland[j].dist(headland[(j + 1) % n]);
        li.total_cmp(&lj).then(j.cmp(&i))
    }) else {
        return Vec::new();
    };
    let dir = (headland[(k + 1) % n] - headland[k]).normalized();
    let normal = dir.perp();
    let (lo, hi) = headland.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let o = p.dot(normal);
        (lo.min(o), hi.max(o))
    });
    let count = ((hi - lo) / width + 1e-9).floor() as usize;
    let centre = 0.5 * (lo + hi);
    let along = headland.iter().map(|p| p.dot(dir)).fold(0.0f64, |a, v| a.max(v.abs()));
    let reach = 2.0 * along + (hi - lo);
    (0..count)
        .filter_map(|i| {
            let off = centre + (i as f64 - 0.5 * (count as f64 - 1.0)) * width;
            let base = normal * off;
            clip_to_polygon(base - dir * reach, base + dir * reach, headland).map(|(a, b)| vec![a, b])
        })
        .collect()
}

fn parse_ring(v: &Value) -> Result<Vec<Point2>> {
    let arr = v.as_array().ok_or_else(|| input("coordinates must be an array"))?;
    let mut pts = Vec::with_capacity(arr.len());
    for c in arr {
        let xy = c.as_array().ok_or_else(|| input("position must be an array"))?;
        let (Some(x), Some(y)) = (xy.first().and_then(Value::as_f64), xy.get(1).and_then(Value::as_f64)) else {
            return Err(input("position needs numeric x and y"));
        };
        pts.push(Point2::new(x, y));
    }
    if pts.len() > 1 && pts[0].dist(pts[pts.len() - 1]) <= 1e-12 {
        pts.pop();
    }
    Ok(pts)
}

fn parse_line(v: &Value) -> Result<Vec<Point2>> {
    let arr = v.as_array().ok_or_else(|| input("coordinates must be an array"))?;
    arr.iter()
        .map(|c| {
            let xy = c.as_array().ok_or_else(|| input("position must be an array"))?;
            match (xy.first().and_then(Value::as_f64), xy.get(1).and_then(Value::as_f64)) {
                (Some(x), Some(y)) => Ok(Point2::new(x, y)),
                _ => Err(input("position needs numeric x and y")),
            }
        })
        .collect()
}

/// Raw parts of a GeoJSON field description.
#[derive(Debug, Clone, Default)]
pub struct FieldParts {
    pub contour: Vec<Point2>,
    pub headland: Option<Vec<Point2>>,
    pub lanes: Option<Vec<Vec<Point2>>>,
}

/// Reads a FeatureCollection with a `role=contour` polygon and optional
/// `role=headland` and `role=lane` features.
pub fn parse_geojson(text: &str) -> Result<FieldParts> {
    let doc: Value = serde_json::from_str(text).map_err(|e| input(format!("invalid JSON: {e}")))?;
    let features = doc
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| input("expected a FeatureCollection"))?;
    let mut parts = FieldParts::default();
    let mut lanes = Vec::new();
    for f in features {
        let role = f.pointer("/properties/role").and_then(Value::as_str).unwrap_or("");
        let geom = f.get("geometry").ok_or_else(|| input("feature without geometry"))?;
        let kind = geom.get("type").and_then(Value::as_str).unwrap_or("");
        let coords = geom.get("coordinates").ok_or_else(|| input("geometry without coordinates"))?;
        match (role, kind) {
            ("contour", "Polygon") => {
                let outer = coords.get(0).ok_or_else(|| input("polygon without rings"))?;
                parts.contour = parse_ring(outer)?;
            }
            ("headland", "Polygon") => {
                let outer = coords.get(0).ok_or_else(|| input("polygon without rings"))?;
                parts.headland = Some(parse_ring(outer)?);
            }
            ("headland", "LineString") => parts.headland = Some(parse_ring(coords)?),
            ("lane", "LineString") => lanes.push(parse_line(coords)?),
            _ => {}
        }
    }
    if parts.contour.is_empty() {
        return Err(input("no polygon feature with role=contour"));
    }
    if !lanes.is_empty() {
        parts.lanes = Some(lanes);
    }
    Ok(parts)
}

/// Reads `x,y` rows; a non-numeric first row is taken as a header.
pub fn parse_contour_csv(text: &str) -> Result<Vec<Point2>> {
    let mut pts = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split(',').map(str::trim);
        let (x, y) = (cols.next().unwrap_or(""), cols.next().unwrap_or(""));
        match (x.parse::<f64>(), y.parse::<f64>()) {
            (Ok(x), Ok(y)) => pts.push(Point2::new(x, y)),
            _ if pts.is_empty() && i == 0 => continue,
            _ => return Err(input(format!("line {}: expected x,y", i + 1))),
        }
    }
    if pts.len() > 1 && pts[0].dist(pts[pts.len() - 1]) <= 1e-12 {
        pts.pop();
    }
    Ok(pts)
}

/// Loads a GeoJSON (`.geojson`/`.json`) or CSV contour file and completes it.
pub fn load_field(path: &Path, width: f64) -> Result<(FieldLayout, Provenance)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    let parts = if ext == "csv" {
        FieldParts {
            contour: parse_contour_csv(&text)?,
            ..FieldParts::default()
        }
    } else {
        parse_geojson(&text)?
    };
    FieldLayout::complete(&parts.contour, parts.headland, parts.lanes, width)
}

/// Arclength position on a closed ring.
struct Ring {
    pts: Vec<Point2>,
    cum: Vec<f64>,
}

impl Ring {
    fn new(pts: &[Point2]) -> Self {
        let mut cum = vec![0.0];
        for i in 0..pts.len() {
            let next = pts[(i + 1) % pts.len()];
            cum.push(cum[i] + pts[i].dist(next));
        }
        Self { pts: pts.to_vec(), cum }
    }

    fn perimeter(&self) -> f64 {
        self.cum[self.cum.len() - 1]
    }

    fn project(&self, q: Point2) -> f64 {
        let n = self.pts.len();
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..n {
            let (a, b) = (self.pts[i], self.pts[(i + 1) % n]);
            let d = b - a;
            let t = ((q - a).dot(d) / d.dot(d)).clamp(0.0, 1.0);
            let dist = q.dist(a + d * t);
            if dist < best.0 {
                best = (dist, self.cum[i] + t * d.norm());
            }
        }
        best.1
    }

    fn point(&self, s: f64) -> Point2 {
        let s = s.rem_euclid(self.perimeter());
        let i = self.cum.partition_point(|&c| c <= s).saturating_sub(1).min(self.pts.len() - 1);
        let (a, b) = (self.pts[i], self.pts[(i + 1) % self.pts.len()]);
        let len = self.cum[i + 1] - self.cum[i];
        a.lerp(b, ((s - self.cum[i]) / len).clamp(0.0, 1.0))
    }

    /// Ring vertices strictly between `from` and `to` walking in `dir`, then `to`.
    fn walk(&self, from: f64, to: f64, dir: f64) -> Vec<Point2> {
        let p = self.perimeter();
        let length = if dir > 0.0 { (to - from).rem_euclid(p) } else { (from - to).rem_euclid(p) };
        let mut out = Vec::new();
        let mut stations: Vec<f64> = (0..self.pts.len())
            .map(|i| {
                let c = self.cum[i];
                if dir > 0.0 { (c - from).rem_euclid(p) } else { (from - c).rem_euclid(p) }
            })
            .filter(|&d| d > 1e-9 && d < length - 1e-9)
            .collect();
        stations.sort_by(f64::total_cmp);
        for d in stations {
            out.push(self.point(from + dir * d));
        }
        out.push(self.point(to));
        out
    }

    /// Turn at each ring vertex.
    fn turns(&self) -> Vec<f64> {
        let n = self.pts.len();
        (0..n)
            .map(|i| {
                let a = self.pts[(i + n - 1) % n];
                let b = self.pts[i];
                let c = self.pts[(i + 1) % n];
                wrap_angle((c - b).angle() - (b - a).angle())
            })
            .collect()
    }

    /// Distance from `s` in `dir` to the next vertex turning more than `threshold`.
    fn room(&self, s: f64, dir: f64, threshold: f64) -> f64 {
        let p = self.perimeter();
        self.turns()
            .iter()
            .enumerate()
            .filter(|(_, t)| t.abs() > threshold)
            .map(|(i, _)| {
                let c = self.cum[i];
                if dir > 0.0 { (c - s).rem_euclid(p) } else { (s - c).rem_euclid(p) }
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Options for [`traversal_plan`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanOptions {
    pub spacing: f64,
    /// Headland driven before the first lane after the full loop.
    pub lead: f64,
    /// Headland driven after the last lane.
    pub tail: f64,
    /// Ring vertices turning more than this count as corners when choosing
    /// the tail direction (rad).
    pub corner_turn: f64,
}

fn push_piece(verts: &mut Vec<Point2>, labels: &mut Vec<Label>, pts: &[Point2], label: Label) {
    for &p in pts {
        if verts.last().is_some_and(|q: &Point2| q.dist(p) <= 1e-9) {
            // Labels describe the outgoing segment.
            if let Some(l) = labels.last_mut() {
                *l = label;
            }
            continue;
        }
        verts.push(p);
        labels.push(label);
    }
}

/// One labeled path covering the field: a full headland loop starting `lead`
/// before the first lane, the lanes boustrophedon-style joined along the
/// headland, and a tail. Resampled at `spacing`.
pub fn traversal_plan(layout: &FieldLayout, opts: &PlanOptions) -> Result<PathPolyline> {
    let ring = Ring::new(&layout.headland);
    let p = ring.perimeter();
    let (mut verts, mut labels) = (Vec::new(), Vec::new());
    if layout.lanes.is_empty() {
        let start = 0.0;
        push_piece(&mut verts, &mut labels, &[ring.point(start)], Label::Headland);
        push_piece(&mut verts, &mut labels, &ring.walk(start, start + 0.5 * p, 1.0), Label::Headland);
        push_piece(&mut verts, &mut labels, &ring.walk(start + 0.5 * p, start, 1.0), Label::Headland);
        let path = PathPolyline::new(verts, labels)?;
        return resample_uniform(&path, opts.spacing);
    }
    let first = &layout.lanes[0];
    let entry = ring.project(first[0]);
    let start = entry - opts.lead;
    push_piece(&mut verts, &mut labels, &[ring.point(start)], Label::Headland);
    // Full loop in two halves so the walk never degenerates.
    push_piece(&mut verts, &mut labels, &ring.walk(start, start + 0.5 * p, 1.0), Label::Headland);
    push_piece(&mut verts, &mut labels, &ring.walk(start + 0.5 * p, start, 1.0), Label::Headland);
    push_piece(&mut verts, &mut labels, &ring.walk(start, entry, 1.0), Label::Headland);

    let mut at = entry;
    let mut forward = true;
    for (k, lane) in layout.lanes.iter().enumerate() {
        let mut pts = lane.clone();
        if k > 0 {
            let here = ring.point(at);
            let (d0, d1) = (here.dist(pts[0]), here.dist(pts[pts.len() - 1]));
            forward = d0 <= d1;
        }
        if !forward {
            pts.reverse();
        }
        let s_in = ring.project(pts[0]);
        if k > 0 {
            let fwd = (s_in - at).rem_euclid(p);
            let dir = if fwd <= 0.5 * p { 1.0 } else { -1.0 };
            push_piece(&mut verts, &mut labels, &ring.walk(at, s_in, dir), Label::Headland);
        }
        push_piece(&mut verts, &mut labels, &pts, Label::Lane);
        at = ring.project(pts[pts.len() - 1]);
        // The lane end vertex belongs to the headland that follows.
        push_piece(&mut verts, &mut labels, &[ring.point(at)], Label::Headland);
    }
    let dir = if ring.room(at, 1.0, opts.corner_turn) >= ring.room(at, -1.0, opts.corner_turn) { 1.0 } else { -1.0 };
    push_piece(&mut verts, &mut labels, &ring.walk(at, at + dir * opts.tail, dir), Label::Headland);
    let path = PathPolyline::new(verts, labels)?;
    resample_uniform(&path, opts.spacing)
}

/// 200 m square, lanes synthesised.
pub fn square_field(width: f64) -> Result<FieldLayout> {
    let contour = [
        Point2::new(0.0, 0.0),
        Point2::new(200.0, 0.0),
        Point2::new(200.0, 200.0),
        Point2::new(0.0, 200.0),
    ];
    Ok(FieldLayout::complete(&contour, None, None, width)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_csv_synthesises_headland_and_lanes() {
        let csv = "x,y\n0,0\n200,0\n200,200\n0,200\n";
        let contour = parse_contour_csv(csv).unwrap();
        let (layout, prov) = FieldLayout::complete(&contour, None, None, 20.0).unwrap();
        assert!(prov.headland_synthesised && prov.lanes_synthesised);
        let xs: Vec<f64> = layout.headland.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = layout.headland.iter().map(|p| p.y).collect();
        let span = |v: &[f64]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((span(&xs) - 180.0).abs() < 1e-9 && (span(&ys) - 180.0).abs() < 1e-9);
        assert_eq!(layout.lanes.len(), 9);
        for l in &layout.lanes {
            assert!((l[0].dist(l[1]) - 180.0).abs() < 1e-9);
        }
    }

    #[test]
    fn explicit_parts_pass_through() {
        let text = r#"{"type":"FeatureCollection","features":[
            {"type":"Feature","properties":{"role":"contour"},"geometry":{"type":"Polygon","coordinates":[[[0,0],[100,0],[100,100],[0,100],[0,0]]]}},
            {"type":"Feature","properties":{"role":"headland"},"geometry":{"type":"LineString","coordinates":[[10,10],[90,10],[90,90],[10,90],[10,10]]}},
            {"type":"Feature","properties":{"role":"lane"},"geometry":{"type":"LineString","coordinates":[[50,10],[50,90]]}}]}"#;
        let parts = parse_geojson(text).unwrap();
        let (layout, prov) = FieldLayout::complete(&parts.contour, parts.headland, parts.lanes, 20.0).unwrap();
        assert_eq!(prov, Provenance::default());
        assert_eq!(layout.headland.len(), 4);
        assert_eq!(layout.lanes, vec![vec![Point2::new(50.0, 10.0), Point2::new(50.0, 90.0)]]);
    }

    #[test]
    fn self_intersecting_contour_is_an_input_error() {
        let bow = [Point2::new(0.0, 0.0), Point2::new(100.0, 100.0), Point2::new(100.0, 0.0), Point2::new(0.0, 100.0)];
        assert!(matches!(FieldLayout::complete(&bow, None, None, 20.0), Err(Error::Input(_))));
    }

    #[test]
    fn degree_coordinates_are_rejected() {
        let tiny = [Point2::new(9.0, 48.0), Point2::new(9.01, 48.0), Point2::new(9.01, 48.01)];
        assert!(matches!(FieldLayout::complete(&tiny, None, None, 20.0), Err(Error::Input(_))));
    }

    #[test]
    fn clip_finds_longest_inside_chord() {
        let sq = [Point2::new(0.0, 0.0), Point2::new(10.0, 0.0), Point2::new(10.0, 10.0), Point2::new(0.0, 10.0)];
        let (a, b) = clip_to_polygon(Point2::new(-5.0, 3.0), Point2::new(20.0, 3.0), &sq).unwrap();
        assert!(a.dist(Point2::new(0.0, 3.0)) < 1e-12 && b.dist(Point2::new(10.0, 3.0)) < 1e-12);
        assert!(clip_to_polygon(Point2::new(-5.0, 30.0), Point2::new(20.0, 30.0), &sq).is_none());
    }

    #[test]
    fn square_plan_labels_and_order() {
        let layout = square_field(20.0).unwrap();
        let opts = PlanOptions { spacing: 1.0, lead: 30.0, tail: 20.0, corner_turn: 0.5 };
        let plan = traversal_plan(&layout, &opts).unwrap();
        let labels = plan.labels();
        let changes = labels.windows(2).filter(|w| w[0] != w[1]).count();
        assert_eq!(changes, 2 * layout.lanes.len());
        assert_eq!(labels[0], Label::Headland);
        assert_eq!(labels[labels.len() - 1], Label::Headland);
        // Loop plus lanes plus joins.
        let lanes: f64 = layout.lanes.iter().map(|l| l[0].dist(l[1])).sum();
        assert!(plan.length() > 720.0 + lanes);
    }
}
