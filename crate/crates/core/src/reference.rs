//! Detection of edgy path segments and construction of their reference paths.

use crate::dubins::{shortest_dubins, Config, DubinsPath};
use crate::error::{Error, Result};
use crate::geometry::{
    build_frame_with_arclength, corner_cut_smooth, dist_point_polygon_boundary, dist_point_polyline,
    heading_vector, resample_uniform, wrap_angle, Label, PathPolyline, Point2, ReferenceFrame,
};
use crate::vehicle::VehicleParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SegmentKind {
    HeadlandCorner,
    HeadlandToLane,
    LaneToHeadland,
    LaneToLane,
}

impl SegmentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SegmentKind::HeadlandCorner => "headland_corner",
            SegmentKind::HeadlandToLane => "headland_to_lane",
            SegmentKind::LaneToHeadland => "lane_to_headland",
            SegmentKind::LaneToLane => "lane_to_lane",
        }
    }

    pub fn is_transition(self) -> bool {
        self != SegmentKind::HeadlandCorner
    }
}

/// A vertex range of a path that needs smoothing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgySegment {
    pub path_id: usize,
    /// First replaced vertex.
    pub i0: usize,
    /// Last replaced vertex.
    pub i1: usize,
    pub kind: SegmentKind,
    /// Vertex the segment is built around: the sharpest corner vertex or the
    /// vertex where the label changes.
    pub pivot: usize,
}

/// Thresholds and desired extents for [`detect_edgy_segments`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectOptions {
    /// Heading change per vertex above which a vertex is edgy, in rad.
    pub turn_threshold: f64,
    /// Edgy vertices closer than this (arclength) form one corner.
    pub merge_distance: f64,
    /// Desired half-span of a corner segment around its pivot.
    pub corner_extent: f64,
    /// Desired span of a transition on its headland side.
    pub headland_extent: f64,
    /// Desired span of a transition on its lane side.
    pub lane_extent: f64,
    /// Minimum arclength kept untouched between neighbouring segments.
    pub separation: f64,
}

impl DetectOptions {
    /// Defaults derived from the vehicle, the grid spacing and the working width.
    pub fn new(params: &VehicleParams, spacing: f64, width: f64, extension: f64) -> Self {
        let r_min = params.min_turning_radius();
        let edge = corner_edge_length(params, width);
        Self {
            turn_threshold: 20f64.to_radians() * spacing,
            merge_distance: 3.0 * r_min,
            corner_extent: edge + 4.0 * r_min + extension,
            headland_extent: 2.0 * r_min + extension,
            lane_extent: 15.0 + extension,
            separation: spacing,
        }
    }
}

/// Distance of the outer corner anchors from the apex.
pub fn corner_edge_length(params: &VehicleParams, width: f64) -> f64 {
    (2.0 * params.min_turning_radius()).max(0.5 * width)
}

/// Straight extension added before and after a Dubins core.
pub fn default_extension(r_dubins: f64) -> f64 {
    (0.5 * r_dubins).clamp(2.0, 5.0)
}

/// Heading change at each interior vertex (0 at the ends).
pub fn vertex_turns(path: &PathPolyline) -> Vec<f64> {
    let v = path.vertices();
    let mut out = vec![0.0; v.len()];
    for i in 1..v.len() - 1 {
        out[i] = wrap_angle((v[i + 1] - v[i]).angle() - (v[i] - v[i - 1]).angle());
    }
    out
}

#[derive(Debug, Clone, Copy)]
struct Event {
    kind: SegmentKind,
    pivot: usize,
    center: f64,
    before: f64,
    after: f64,
}

/// Finds corners and headland/lane transitions on a densely sampled, labeled path.
///
/// Edgy vertices closer than `merge_distance` merge into one corner. Every
/// direct change between headland and lane labels is a transition; corners
/// within the span of a transition are absorbed by it. Spans are shrunk so
/// neighbouring segments stay disjoint.
pub fn detect_edgy_segments(path: &PathPolyline, path_id: usize, opts: &DetectOptions) -> Vec<EdgySegment> {
    let s = path.cumulative_s();
    let labels = path.labels();
    let turns = vertex_turns(path);
    let n = path.len();
    let total = path.length();

    let mut events: Vec<Event> = Vec::new();
    for c in 1..n {
        let kind = match (labels[c - 1], labels[c]) {
            (Label::Headland, Label::Lane) => SegmentKind::HeadlandToLane,
            (Label::Lane, Label::Headland) => SegmentKind::LaneToHeadland,
            _ => continue,
        };
        let (before, after) = match kind {
            SegmentKind::HeadlandToLane => (opts.headland_extent, opts.lane_extent),
            _ => (opts.lane_extent, opts.headland_extent),
        };
        events.push(Event {
            kind,
            pivot: c,
            center: s[c],
            before,
            after,
        });
    }

    // Group edgy vertices into corners.
    let mut groups: Vec<(usize, usize)> = Vec::new();
    for i in 1..n.saturating_sub(1) {
        if turns[i].abs() <= opts.turn_threshold {
            continue;
        }
        match groups.last_mut() {
            Some((_, last)) if s[i] - s[*last] <= opts.merge_distance => *last = i,
            _ => groups.push((i, i)),
        }
    }
    for (first, last) in groups {
        let pivot = (first..=last)
            .max_by(|&a, &b| turns[a].abs().total_cmp(&turns[b].abs()).then(b.cmp(&a)))
            .unwrap_or(first);
        let center = 0.5 * (s[first] + s[last]);
        let absorbed = events.iter().any(|e| {
            e.kind.is_transition() && center >= e.center - e.before && center <= e.center + e.after
        });
        if absorbed {
            continue;
        }
        let group_labels = &labels[first.saturating_sub(1)..=(last + 1).min(n - 1)];
        let kind = if group_labels.iter().all(|&l| l == Label::Headland) {
            SegmentKind::HeadlandCorner
        } else if group_labels.iter().all(|&l| l == Label::Lane) {
            SegmentKind::LaneToLane
        } else {
            continue;
        };
        let half = 0.5 * (s[last] - s[first]);
        events.push(Event {
            kind,
            pivot,
            center,
            before: opts.corner_extent + half,
            after: opts.corner_extent + half,
        });
    }
    events.sort_by(|a, b| a.center.total_cmp(&b.center).then(a.pivot.cmp(&b.pivot)));

    // Shrink spans that would overlap or run past the path ends.
    if let Some(e) = events.first_mut() {
        e.before = e.before.min(e.center);
    }
    if let Some(e) = events.last_mut() {
        e.after = e.after.min(total - e.center);
    }
    for k in 1..events.len() {
        let gap = events[k].center - events[k - 1].center - opts.separation;
        let want = events[k - 1].after + events[k].before;
        if want > gap {
            let scale = gap.max(0.0) / want;
            events[k - 1].after *= scale;
            events[k].before *= scale;
        }
    }

    let mut out: Vec<EdgySegment> = Vec::new();
    for e in events {
        let lo = e.center - e.before;
        let hi = e.center + e.after;
        let i0 = s.partition_point(|&v| v < lo - 1e-9).min(e.pivot);
        let i1 = s.partition_point(|&v| v <= hi + 1e-9).saturating_sub(1).max(e.pivot);
        let i0 = match out.last() {
            Some(prev) if i0 <= prev.i1 => prev.i1 + 1,
            _ => i0,
        };
        if i0 >= i1 || i0 > e.pivot || e.pivot > i1 {
            continue;
        }
        out.push(EdgySegment {
            path_id,
            i0,
            i1,
            kind: e.kind,
            pivot: e.pivot,
        });
    }
    out
}

/// Which side of the reference the smoothed path may not cross.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SideConstraint {
    None,
    /// `interior_sign * (e_y - e_y_ref) <= slack` on every sample.
    Upper,
}

/// Corner cutting runs on a grid this many times finer than the frame spacing.
const CUT_REFINEMENT: f64 = 4.0;

/// Construction details of a 5-point corner reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerAnchors {
    /// Intersection of the incoming and outgoing edge lines.
    pub apex: Point2,
    /// Field contour vertex covered by the corner.
    pub contour_corner: Point2,
    /// A, B, T, D, E.
    pub anchors: [Point2; 5],
    /// Reference sample closest to the contour corner after corner cutting.
    pub tip: Point2,
}

/// Reference path of one smoothing instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePath {
    pub frame: ReferenceFrame,
    pub kind: SegmentKind,
    pub weight_index: Option<usize>,
    pub side: SideConstraint,
    /// +1 when the field interior lies left of the travel direction.
    pub interior_sign: f64,
    pub entry: Config,
    pub exit: Config,
    pub corner: Option<CornerAnchors>,
    pub dubins: Option<DubinsPath>,
}

/// Options for [`build_pwa5_reference`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pwa5Options {
    pub operating_width: f64,
    pub spacing: f64,
    pub corner_cut_iterations: usize,
    /// Corners turning less than this pass through unchanged (rad).
    pub min_turn: f64,
}

impl Pwa5Options {
    pub fn new(width: f64, spacing: f64) -> Self {
        Self {
            operating_width: width,
            spacing,
            corner_cut_iterations: 2,
            min_turn: 10f64.to_radians(),
        }
    }
}

/// +1 when the field interior is left of the path near `p` heading `psi`.
pub fn interior_side(contour: &[Point2], p: Point2, psi: f64) -> f64 {
    let n = heading_vector(psi).perp();
    let left = dist_point_polygon_boundary(p + n, contour);
    let right = dist_point_polygon_boundary(p - n, contour);
    if left >= right { 1.0 } else { -1.0 }
}

fn line_intersection(p: Point2, d: Point2, q: Point2, e: Point2) -> Option<Point2> {
    let den = d.cross(e);
    if den.abs() <= 1e-12 {
        return None;
    }
    Some(p + d * ((q - p).cross(e) / den))
}

/// Samples a polyline at arclength multiples of `spacing` and builds a frame
/// whose arclength is measured along that polyline.
pub(crate) fn uniform_frame(points: Vec<Point2>, spacing: f64) -> Result<ReferenceFrame> {
    let poly = PathPolyline::with_label(dedup(points), Label::Headland)?;
    let dense = resample_uniform(&poly, spacing)?;
    let n = dense.len();
    let s: Vec<f64> = (0..n)
        .map(|k| if k + 1 == n { poly.length() } else { k as f64 * spacing })
        .collect();
    build_frame_with_arclength(dense.vertices(), &s)
}

fn dedup(points: Vec<Point2>) -> Vec<Point2> {
    let mut out: Vec<Point2> = Vec::with_capacity(points.len());
    for p in points {
        if out.last().is_none_or(|q| q.dist(p) > 1e-9) {
            out.push(p);
        }
    }
    out
}

/// Five-point piecewise-affine reference for a convex headland corner.
///
/// A and E sit on the path `edge_length` before and after the apex, T on the
/// outward bisector so that the corner-cut reference passes at half the
/// working width from the contour corner, B and D halve A-T and T-E. The
/// reference starts and ends on the path at the segment boundaries.
pub fn build_pwa5_reference(
    segment: &EdgySegment,
    path: &PathPolyline,
    contour: &[Point2],
    params: &VehicleParams,
    opts: &Pwa5Options,
) -> Result<ReferencePath> {
    let v = path.vertices();
    let s = path.cumulative_s();
    let (i0, i1) = (segment.i0, segment.i1);
    if i1 < i0 + 2 {
        return Err(Error::InvalidPath("corner segment too short".into()));
    }
    let d_in = (v[i0 + 1] - v[i0]).normalized();
    let d_out = (v[i1] - v[i1 - 1]).normalized();
    let turn = wrap_angle(d_out.angle() - d_in.angle());
    let entry = Config {
        position: v[i0],
        heading: d_in.angle(),
    };
    let exit = Config {
        position: v[i1],
        heading: d_out.angle(),
    };
    let interior = interior_side(contour, v[i0], d_in.angle());
    let half_w = 0.5 * opts.operating_width;

    let apex = line_intersection(v[i0], d_in, v[i1], d_out)
        .filter(|a| dist_point_polyline(*a, &v[i0..=i1]) < 2.0 * opts.operating_width)
        .unwrap_or(v[segment.pivot]);
    let s_apex = s[i0] + (apex - v[i0]).dot(d_in).clamp(0.0, s[i1] - s[i0]);

    let passthrough = turn.abs() < opts.min_turn;
    if !passthrough && turn * interior <= 0.0 {
        return Err(Error::FallbackDubinsCorner("reflex corner".into()));
    }
    let outward = (d_in - d_out).normalized();
    let contour_corner = contour
        .iter()
        .copied()
        .min_by(|a, b| a.dist(apex).total_cmp(&b.dist(apex)))
        .ok_or_else(|| Error::InvalidPath("empty contour".into()))?;

    let edge = corner_edge_length(params, opts.operating_width);
    let before = (s_apex - s[i0]).max(0.0);
    let after = (s[i1] - s_apex).max(0.0);
    // Keep a short straight lead-in and lead-out when the span is clamped.
    let l_in = edge.min((before - 2.0).max(0.5 * before));
    let l_out = edge.min((after - 2.0).max(0.5 * after));
    let (a_pt, _) = path.point_at(s_apex - l_in);
    let (e_pt, _) = path.point_at(s_apex + l_out);

    let assemble = |tip: Point2| -> Result<ReferenceFrame> {
        let mut pts: Vec<Point2> = (i0..=i1).filter(|&k| s[k] < s_apex - l_in - 1e-9).map(|k| v[k]).collect();
        let anchors = [a_pt, a_pt.lerp(tip, 0.5), tip, tip.lerp(e_pt, 0.5), e_pt];
        pts.extend(anchors);
        pts.extend((i0..=i1).filter(|&k| s[k] > s_apex + l_out + 1e-9).map(|k| v[k]));
        let raw = PathPolyline::with_label(dedup(pts), Label::Headland)?;
        let dense = resample_uniform(&raw, opts.spacing / CUT_REFINEMENT)?;
        let smooth = corner_cut_smooth(&dense, opts.corner_cut_iterations);
        uniform_frame(smooth.vertices().to_vec(), opts.spacing)
    };
    let closest = |frame: &ReferenceFrame| {
        frame
            .samples()
            .iter()
            .map(|q| q.position)
            .min_by(|a, b| a.dist(contour_corner).total_cmp(&b.dist(contour_corner)))
            .expect("frame has samples")
    };

    if passthrough {
        let frame = assemble(apex)?;
        let tip = closest(&frame);
        return Ok(ReferencePath {
            frame,
            kind: SegmentKind::HeadlandCorner,
            weight_index: None,
            side: SideConstraint::Upper,
            interior_sign: interior,
            entry,
            exit,
            corner: Some(CornerAnchors {
                apex,
                contour_corner,
                anchors: [a_pt, a_pt.lerp(apex, 0.5), apex, apex.lerp(e_pt, 0.5), e_pt],
                tip,
            }),
            dubins: None,
        });
    }

    if (contour_corner - apex).dot(outward) <= 0.0 {
        return Err(Error::FallbackDubinsCorner("contour corner not outside the apex".into()));
    }
    // Smallest tau >= 0 with |apex + tau u - C| = w/2.
    let rel = apex - contour_corner;
    let p = -outward.dot(rel);
    let disc = p * p - (rel.dot(rel) - half_w * half_w);
    if disc < 0.0 {
        return Err(Error::FallbackDubinsCorner("bisector misses the coverage circle".into()));
    }
    let tau0 = (p - disc.sqrt()).max(0.0);
    // Corner cutting pulls the tip inward; move the anchor along the bisector
    // until the cut reference itself touches the coverage circle.
    let excess = |tau: f64| -> Result<(f64, ReferenceFrame, Point2)> {
        let frame = assemble(apex + outward * tau)?;
        let tip = closest(&frame);
        Ok((tip.dist(contour_corner) - half_w, frame, tip))
    };
    let (mut lo, mut hi) = (tau0, tau0);
    let mut best = excess(tau0)?;
    if best.0 > 0.0 {
        let mut step = best.0;
        loop {
            hi += step;
            let e = excess(hi)?;
            if e.0 <= 0.0 {
                best = e;
                break;
            }
            lo = hi;
            step *= 2.0;
            if step > 4.0 * opts.operating_width {
                return Err(Error::FallbackDubinsCorner("tip cannot reach the coverage circle".into()));
            }
        }
        for _ in 0..80 {
            if best.0 > -1e-8 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let e = excess(mid)?;
            if e.0 > 0.0 {
                lo = mid;
            } else {
                hi = mid;
                best = e;
            }
        }
    }
    let tau = hi;
    let (_, frame, tip) = best;
    let t_pt = apex + outward * tau;
    Ok(ReferencePath {
        frame,
        kind: SegmentKind::HeadlandCorner,
        weight_index: None,
        side: SideConstraint::Upper,
        interior_sign: interior,
        entry,
        exit,
        corner: Some(CornerAnchors {
            apex,
            contour_corner,
            anchors: [a_pt, a_pt.lerp(t_pt, 0.5), t_pt, t_pt.lerp(e_pt, 0.5), e_pt],
            tip,
        }),
        dubins: None,
    })
}

/// Dubins reference between the path poses at the segment boundaries,
/// shortened by `extension` on both sides, with straight extensions that
/// follow the path tangents back to the boundaries.
pub fn build_dubins_reference(
    segment: &EdgySegment,
    path: &PathPolyline,
    r_dubins: f64,
    extension: f64,
    spacing: f64,
) -> Result<ReferencePath> {
    let v = path.vertices();
    let (i0, i1) = (segment.i0, segment.i1);
    if i1 <= i0 {
        return Err(Error::InvalidPath("empty segment".into()));
    }
    let h_in = (v[i0 + 1] - v[i0]).angle();
    let h_out = (v[i1] - v[i1 - 1]).angle();
    let start = v[i0];
    let end = v[i1];
    let entry = Config {
        position: start + heading_vector(h_in) * extension,
        heading: h_in,
    };
    let exit = Config {
        position: end - heading_vector(h_out) * extension,
        heading: h_out,
    };
    let core = shortest_dubins(entry, exit, r_dubins)?;
    let l_core = core.length();
    let total = l_core + 2.0 * extension;
    let at = |t: f64| -> Point2 {
        if t <= extension {
            start + heading_vector(h_in) * t
        } else if t <= extension + l_core {
            core.config_at(t - extension).position
        } else {
            exit.position + heading_vector(h_out) * (t - extension - l_core)
        }
    };
    let count = (total / spacing + 1e-9).floor() as usize;
    let mut s: Vec<f64> = (0..=count).map(|k| k as f64 * spacing).collect();
    if total - s[s.len() - 1] > 1e-9 * total.max(1.0) {
        s.push(total);
    } else {
        let n = s.len();
        s[n - 1] = total;
    }
    let pts: Vec<Point2> = s.iter().map(|&t| at(t)).collect();
    let frame = build_frame_with_arclength(&pts, &s)?;
    Ok(ReferencePath {
        frame,
        kind: segment.kind,
        weight_index: None,
        side: SideConstraint::None,
        interior_sign: 1.0,
        entry,
        exit,
        corner: None,
        dubins: Some(core),
    })
}

/// Sample index where a transition reference leaves (or reaches) the headland.
///
/// Headland-to-lane: last sample within `radius` of the headland, else 0.
/// Lane-to-headland: first such sample, else the last index.
pub fn compute_weight_index(reference: &ReferencePath, headland: &[Point2], closed: bool, radius: f64) -> Option<usize> {
    let samples = reference.frame.samples();
    let n = samples.len() - 1;
    let near = |p: Point2| {
        let d = dist_point_polyline(p, headland);
        let d = if closed && headland.len() > 2 {
            d.min(crate::geometry::dist_point_segment(p, headland[headland.len() - 1], headland[0]))
        } else {
            d
        };
        d <= radius
    };
    match reference.kind {
        SegmentKind::HeadlandToLane => Some(samples.iter().rposition(|q| near(q.position)).unwrap_or(0)),
        SegmentKind::LaneToHeadland => Some(samples.iter().position(|q| near(q.position)).unwrap_or(n)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn square_loop(side: f64, offset: f64, spacing: f64) -> (PathPolyline, Vec<Point2>) {
        let contour = vec![
            Point2::new(0.0, 0.0),
            Point2::new(side, 0.0),
            Point2::new(side, side),
            Point2::new(0.0, side),
        ];
        let (a, b) = (offset, side - offset);
        let mid = 0.5 * side;
        let raw = vec![
            Point2::new(mid, a),
            Point2::new(b, a),
            Point2::new(b, b),
            Point2::new(a, b),
            Point2::new(a, a),
            Point2::new(mid, a),
        ];
        let p = PathPolyline::with_label(raw, Label::Headland).unwrap();
        (resample_uniform(&p, spacing).unwrap(), contour)
    }

    fn opts() -> DetectOptions {
        DetectOptions::new(&VehicleParams::default(), 1.0, 20.0, 2.5)
    }

    #[test]
    fn straight_path_has_no_segments() {
        let p = PathPolyline::with_label((0..50).map(|i| Point2::new(i as f64, 0.0)).collect(), Label::Headland).unwrap();
        assert!(detect_edgy_segments(&p, 0, &opts()).is_empty());
    }

    #[test]
    fn square_loop_has_four_corners() {
        let (p, _) = square_loop(200.0, 10.0, 1.0);
        let segs = detect_edgy_segments(&p, 0, &opts());
        assert_eq!(segs.len(), 4);
        assert!(segs.iter().all(|s| s.kind == SegmentKind::HeadlandCorner));
        for w in segs.windows(2) {
            assert!(w[0].i1 < w[1].i0);
        }
    }

    #[test]
    fn label_change_is_a_transition() {
        let mut v: Vec<Point2> = (0..=30).map(|i| Point2::new(i as f64, 0.0)).collect();
        v.extend((1..=30).map(|i| Point2::new(30.0 + i as f64, 0.0)));
        let labels = (0..v.len()).map(|i| if i <= 30 { Label::Lane } else { Label::Headland }).collect();
        let p = PathPolyline::new(v, labels).unwrap();
        let segs = detect_edgy_segments(&p, 3, &opts());
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].kind, SegmentKind::LaneToHeadland);
        assert_eq!(segs[0].path_id, 3);
        assert_eq!(p.labels()[segs[0].i0], Label::Lane);
        assert_eq!(p.labels()[segs[0].i1], Label::Headland);
    }

    fn right_angle_corner(w: f64) -> (PathPolyline, Vec<Point2>, EdgySegment) {
        // Headland along y = w/2 heading +x, turning left at (x0, w/2) up x = x0.
        let x0 = 100.0;
        let h = 0.5 * w;
        let contour = vec![
            Point2::new(-50.0, 0.0),
            Point2::new(x0 + h, 0.0),
            Point2::new(x0 + h, 200.0),
            Point2::new(-50.0, 200.0),
        ];
        let raw = vec![Point2::new(x0 - 40.0, h), Point2::new(x0, h), Point2::new(x0, h + 40.0)];
        let p = resample_uniform(&PathPolyline::with_label(raw, Label::Headland).unwrap(), 1.0).unwrap();
        let segs = detect_edgy_segments(&p, 0, &opts());
        assert_eq!(segs.len(), 1);
        (p, contour, segs[0])
    }

    #[test]
    fn pwa5_right_angle_geometry() {
        let params = VehicleParams::default();
        let (p, contour, seg) = right_angle_corner(20.0);
        let r = build_pwa5_reference(&seg, &p, &contour, &params, &Pwa5Options::new(20.0, 1.0)).unwrap();
        let c = r.corner.unwrap();
        assert!(c.apex.dist(Point2::new(100.0, 10.0)) < 1e-9);
        assert!(c.contour_corner.dist(Point2::new(110.0, 0.0)) < 1e-12);
        // Contour corner at w/2 * sqrt(2) from the apex.
        assert!((c.apex.dist(c.contour_corner) - 10.0 * 2f64.sqrt()).abs() < 1e-9);
        assert!((c.tip.dist(c.contour_corner) - 10.0).abs() < 1e-6, "{}", c.tip.dist(c.contour_corner));
        let t = c.anchors[2];
        // T lies on the bisector between apex and contour corner, within w/2.
        assert!((t - c.apex).cross(c.contour_corner - c.apex).abs() < 1e-9);
        assert!(t.dist(c.contour_corner) <= 10.0 + 1e-6);
        assert!(t.dist(c.apex) > 0.0 && t.dist(c.apex) < c.apex.dist(c.contour_corner));
        // Anchors A and E at the edge length from the apex.
        let edge = corner_edge_length(&params, 20.0);
        assert!((c.anchors[0].dist(c.apex) - edge).abs() < 0.5);
        assert!((c.anchors[4].dist(c.apex) - edge).abs() < 0.5);
        assert_eq!(r.interior_sign, 1.0);
        assert_eq!(r.side, SideConstraint::Upper);
        // Starts and ends on the path.
        let f = &r.frame;
        assert!(f.samples()[0].position.dist(p.vertices()[seg.i0]) < 1e-12);
        assert!(f.samples()[f.len() - 1].position.dist(p.vertices()[seg.i1]) < 1e-12);
        for (k, q) in f.samples().iter().enumerate().take(f.len() - 1) {
            assert!((q.s - k as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn pwa5_nearly_straight_corner_stays_close() {
        let params = VehicleParams::default();
        let turn = 11f64.to_radians();
        let h = 10.0;
        let d_out = Point2::new(turn.cos(), turn.sin());
        let apex = Point2::new(0.0, 0.0);
        let raw = vec![Point2::new(-40.0, 0.0), apex, apex + d_out * 40.0];
        let p = resample_uniform(&PathPolyline::with_label(raw, Label::Headland).unwrap(), 1.0).unwrap();
        // Contour offset by w/2 on the outside (right) of both edges.
        let n_out = Point2::new(turn.sin(), -turn.cos());
        let corner = line_intersection(Point2::new(-40.0, -h), Point2::new(1.0, 0.0), n_out * h, d_out).unwrap();
        let contour = vec![Point2::new(-60.0, -h), corner, corner + d_out * 60.0, Point2::new(-60.0, 100.0)];
        let seg = EdgySegment {
            path_id: 0,
            i0: 20,
            i1: p.len() - 21,
            kind: SegmentKind::HeadlandCorner,
            pivot: 40,
        };
        let r = build_pwa5_reference(&seg, &p, &contour, &params, &Pwa5Options::new(20.0, 1.0)).unwrap();
        for q in r.frame.samples() {
            let d = dist_point_polyline(q.position, p.vertices());
            assert!(d < 0.1, "{d} {:?} {:?}", q, r.corner);
        }
    }

    #[test]
    fn pwa5_reflex_corner_falls_back() {
        let params = VehicleParams::default();
        let (p, contour, seg) = right_angle_corner(20.0);
        // Traverse the same corner backwards: now it turns away from the interior.
        let rev: Vec<Point2> = p.vertices().iter().rev().copied().collect();
        let rp = PathPolyline::with_label(rev, Label::Headland).unwrap();
        let n = rp.len() - 1;
        let rseg = EdgySegment {
            i0: n - seg.i1,
            i1: n - seg.i0,
            pivot: n - seg.pivot,
            ..seg
        };
        let mirrored: Vec<Point2> = contour.iter().map(|q| Point2::new(q.x, q.y)).collect();
        let r = build_pwa5_reference(&rseg, &rp, &mirrored, &params, &Pwa5Options::new(20.0, 1.0));
        // Reversed traversal keeps the interior on the right, so the corner is
        // still convex; a corner that bends toward the contour is reflex.
        assert!(r.is_ok());
        let contour_inside_turn = vec![
            Point2::new(-50.0, 20.0),
            Point2::new(90.0, 20.0),
            Point2::new(90.0, 200.0),
            Point2::new(300.0, 200.0),
            Point2::new(300.0, -100.0),
            Point2::new(-50.0, -100.0),
        ];
        let r = build_pwa5_reference(&seg, &p, &contour_inside_turn, &params, &Pwa5Options::new(20.0, 1.0));
        assert!(matches!(r, Err(Error::FallbackDubinsCorner(_))));
    }

    #[test]
    fn pwa5_tip_within_half_width_for_random_corners() {
        let params = VehicleParams::default();
        for k in 0..12 {
            let turn = (25.0 + 10.0 * k as f64).to_radians();
            let w = 12.0 + 2.0 * k as f64;
            let h = 0.5 * w;
            let d_out = Point2::new(turn.cos(), turn.sin());
            let raw = vec![Point2::new(-60.0, 0.0), Point2::new(0.0, 0.0), d_out * 60.0];
            let p = resample_uniform(&PathPolyline::with_label(raw, Label::Headland).unwrap(), 1.0).unwrap();
            let n_out = Point2::new(turn.sin(), -turn.cos());
            let corner = line_intersection(Point2::new(0.0, -h), Point2::new(1.0, 0.0), n_out * h, d_out).unwrap();
            let far = corner + d_out * 100.0;
            let contour = vec![Point2::new(-100.0, -h), corner, far, far + d_out.perp() * 200.0, Point2::new(-100.0, 200.0)];
            let segs = detect_edgy_segments(&p, 0, &DetectOptions::new(&params, 1.0, w, 2.5));
            assert_eq!(segs.len(), 1, "turn {k}");
            let r = build_pwa5_reference(&segs[0], &p, &contour, &params, &Pwa5Options::new(w, 1.0)).unwrap();
            let c = r.corner.unwrap();
            assert!(c.anchors[2].dist(c.contour_corner) <= h + 1e-6);
            assert!(c.tip.dist(c.contour_corner) <= h + 1e-6);
        }
    }

    fn junction_path() -> PathPolyline {
        // Headland along +x, then a lane heading +y from (50, 0).
        let mut v: Vec<Point2> = (0..=50).map(|i| Point2::new(i as f64, 0.0)).collect();
        v.extend((1..=40).map(|i| Point2::new(50.0, i as f64)));
        let labels = (0..v.len()).map(|i| if i <= 50 { Label::Headland } else { Label::Lane }).collect();
        PathPolyline::new(v, labels).unwrap()
    }

    #[test]
    fn dubins_reference_lengths() {
        let p = junction_path();
        let segs = detect_edgy_segments(&p, 0, &opts());
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].kind, SegmentKind::HeadlandToLane);
        let r = build_dubins_reference(&segs[0], &p, 5.0, 3.0, 1.0).unwrap();
        let core = r.dubins.unwrap();
        assert!((r.frame.length() - (core.length() + 6.0)).abs() < 1e-9);
        let f = &r.frame;
        assert!(f.samples()[0].position.dist(p.vertices()[segs[0].i0]) < 1e-12);
        assert!(f.samples()[f.len() - 1].position.dist(p.vertices()[segs[0].i1]) < 1e-9);
        assert!(f.max_abs_curvature() <= 1.0 / 5.0 + 1e-9);
    }

    #[test]
    fn dubins_reference_straight_and_u_turn() {
        let v: Vec<Point2> = (0..=40).map(|i| Point2::new(i as f64, 0.0)).collect();
        let p = PathPolyline::with_label(v, Label::Lane).unwrap();
        let seg = EdgySegment {
            path_id: 0,
            i0: 5,
            i1: 35,
            kind: SegmentKind::LaneToLane,
            pivot: 20,
        };
        let r = build_dubins_reference(&seg, &p, 5.0, 2.0, 1.0).unwrap();
        assert!((r.frame.length() - 30.0).abs() < 1e-9);

        let r_turn = 5.0;
        let mut u: Vec<Point2> = (0..=20).map(|i| Point2::new(i as f64, 0.0)).collect();
        u.push(Point2::new(20.0, 2.0 * r_turn));
        u.extend((1..=20).map(|i| Point2::new(20.0 - i as f64, 2.0 * r_turn)));
        let p = PathPolyline::with_label(u, Label::Lane).unwrap();
        let seg = EdgySegment {
            path_id: 0,
            i0: 18,
            i1: 23,
            kind: SegmentKind::LaneToLane,
            pivot: 20,
        };
        let r = build_dubins_reference(&seg, &p, r_turn, 2.0, 1.0).unwrap();
        assert!((r.frame.length() - (PI * r_turn + 4.0)).abs() < 1e-9);
    }

    #[test]
    fn weight_index_rules() {
        let p = junction_path();
        let segs = detect_edgy_segments(&p, 0, &opts());
        let mut r = build_dubins_reference(&segs[0], &p, 5.0, 3.0, 1.0).unwrap();
        let headland: Vec<Point2> = (0..=50).map(|i| Point2::new(i as f64, 0.0)).collect();
        let i = compute_weight_index(&r, &headland, false, 1.0).unwrap();
        let samples = r.frame.samples();
        assert!(dist_point_polyline(samples[i].position, &headland) <= 1.0);
        assert!(samples[i + 1..].iter().all(|q| dist_point_polyline(q.position, &headland) > 1.0));

        r.kind = SegmentKind::LaneToHeadland;
        let first = compute_weight_index(&r, &headland, false, 1.0).unwrap();
        assert_eq!(first, 0);

        let far: Vec<Point2> = vec![Point2::new(0.0, -50.0), Point2::new(50.0, -50.0)];
        r.kind = SegmentKind::HeadlandToLane;
        assert_eq!(compute_weight_index(&r, &far, false, 1.0), Some(0));
        r.kind = SegmentKind::LaneToHeadland;
        assert_eq!(compute_weight_index(&r, &far, false, 1.0), Some(r.frame.len() - 1));
    }

    #[test]
    fn weight_index_double_crossing() {
        // Reference dips into the band, leaves, and returns.
        let pts: Vec<Point2> = (0..=30)
            .map(|i| {
                let x = i as f64;
                Point2::new(x, 2.0 * (x * PI / 15.0).cos().abs() - 0.5 + if x > 20.0 { 3.0 } else { 0.0 })
            })
            .collect();
        let s: Vec<f64> = (0..=30).map(|i| i as f64).collect();
        let frame = build_frame_with_arclength(&pts, &s).unwrap();
        let headland = vec![Point2::new(-10.0, 0.0), Point2::new(40.0, 0.0)];
        let dist: Vec<f64> = pts.iter().map(|q| dist_point_polyline(*q, &headland)).collect();
        let mut r = ReferencePath {
            frame,
            kind: SegmentKind::HeadlandToLane,
            weight_index: None,
            side: SideConstraint::None,
            interior_sign: 1.0,
            entry: Config::default(),
            exit: Config::default(),
            corner: None,
            dubins: None,
        };
        let last = dist.iter().rposition(|&d| d <= 1.0).unwrap();
        let first = dist.iter().position(|&d| d <= 1.0).unwrap();
        assert_eq!(compute_weight_index(&r, &headland, false, 1.0), Some(last));
        r.kind = SegmentKind::LaneToHeadland;
        assert_eq!(compute_weight_index(&r, &headland, false, 1.0), Some(first));
        assert!(first < last);
    }
}
