//! Swath coverage rasterisation, gap detection and the cubic Bézier baseline.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{point_in_polygon, resample_uniform, Label, PathPolyline, Point2};
use crate::reference::ReferencePath;

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min: Point2,
    pub max: Point2,
}

impl Bounds {
    pub fn new(min: Point2, max: Point2) -> Self {
        Self { min, max }
    }

    /// Smallest rectangle containing `points`.
    pub fn of_points(points: &[Point2]) -> Option<Self> {
        let first = *points.first()?;
        Some(points.iter().fold(Self::new(first, first), |b, p| Self {
            min: Point2::new(b.min.x.min(p.x), b.min.y.min(p.y)),
            max: Point2::new(b.max.x.max(p.x), b.max.y.max(p.y)),
        }))
    }

    pub fn expanded(self, margin: f64) -> Self {
        Self {
            min: self.min - Point2::new(margin, margin),
            max: self.max + Point2::new(margin, margin),
        }
    }
}

/// Per-cell pass counts on a regular grid. Cell `(ix, iy)` has its centre at
/// `origin + ((ix + 0.5) cell, (iy + 0.5) cell)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRaster {
    origin: Point2,
    cell: f64,
    width: usize,
    height: usize,
    counts: Vec<u32>,
}

impl CoverageRaster {
    /// Empty raster covering `bounds`.
    pub fn new(bounds: Bounds, cell: f64) -> Result<Self> {
        if !(cell > 0.0 && cell.is_finite()) {
            return Err(Error::InvalidParameter(format!("cell size {cell}")));
        }
        let span = bounds.max - bounds.min;
        if !(span.x >= 0.0 && span.y >= 0.0) {
            return Err(Error::InvalidParameter("inverted raster bounds".into()));
        }
        let width = ((span.x / cell).ceil() as usize).max(1);
        let height = ((span.y / cell).ceil() as usize).max(1);
        Ok(Self {
            origin: bounds.min,
            cell,
            width,
            height,
            counts: vec![0; width * height],
        })
    }

    pub fn origin(&self) -> Point2 {
        self.origin
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn count(&self, ix: usize, iy: usize) -> u32 {
        self.counts[iy * self.width + ix]
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> Point2 {
        self.origin + Point2::new((ix as f64 + 0.5) * self.cell, (iy as f64 + 0.5) * self.cell)
    }

    pub fn cell_area(&self) -> f64 {
        self.cell * self.cell
    }

    /// Area of cells visited at least once.
    pub fn covered_area(&self) -> f64 {
        self.counts.iter().filter(|&&c| c > 0).count() as f64 * self.cell_area()
    }

    /// Number of cells visited at least twice.
    pub fn overlap_cells(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 1).count()
    }

    /// Index range of cells whose centres may lie in `[lo, hi]` along one axis.
    fn axis_range(lo: f64, hi: f64, origin: f64, cell: f64, n: usize) -> Option<(usize, usize)> {
        let a = ((lo - origin) / cell - 0.5).ceil().max(0.0);
        let b = ((hi - origin) / cell - 0.5).floor();
        if b < 0.0 || a > b || a >= n as f64 {
            return None;
        }
        Some((a as usize, (b as usize).min(n - 1)))
    }

    /// Plain PGM (P2): white is unvisited, darker means more passes. Row 0 is
    /// the top of the field.
    pub fn to_pgm(&self) -> String {
        const MAX: u32 = 255;
        let mut out = format!("P2\n{} {}\n{MAX}\n", self.width, self.height);
        for iy in (0..self.height).rev() {
            let row: Vec<String> = (0..self.width)
                .map(|ix| {
                    let c = self.count(ix, iy);
                    if c == 0 {
                        MAX.to_string()
                    } else {
                        (MAX.saturating_sub(80 * c.min(3))).to_string()
                    }
                })
                .collect();
            // Plain PGM asks for lines of at most 70 characters.
            let mut line = String::new();
            for v in row {
                if line.len() + v.len() + 1 > 70 {
                    let _ = writeln!(out, "{}", line.trim_end());
                    line.clear();
                }
                line.push_str(&v);
                line.push(' ');
            }
            let _ = writeln!(out, "{}", line.trim_end());
        }
        out
    }
}

/// Longest piece a path segment is split into before its cells are visited.
const PIECE_LENGTH: f64 = 2.0;

/// Adds one pass count to every cell whose centre lies within `w / 2` of
/// `path`. Revisits of a cell count as a new pass only when they are more than
/// `w` of path arclength after the previous visit.
pub fn rasterize_swath(path: &PathPolyline, w: f64, cell: f64, bounds: Bounds) -> Result<CoverageRaster> {
    let mut raster = CoverageRaster::new(bounds, cell)?;
    add_swath(&mut raster, path, w)?;
    Ok(raster)
}

/// Adds the passes of `path` to an existing raster.
pub fn add_swath(raster: &mut CoverageRaster, path: &PathPolyline, w: f64) -> Result<()> {
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::InvalidParameter(format!("operating width {w}")));
    }
    if raster.cell > w / 10.0 + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "cell {} exceeds a tenth of the operating width {w}",
            raster.cell
        )));
    }
    let half = 0.5 * w;
    let r2 = half * half;
    let mut last_visit = vec![f64::NEG_INFINITY; raster.counts.len()];
    let verts = path.vertices();
    let cum = path.cumulative_s();
    for k in 0..verts.len().saturating_sub(1) {
        let (a, b) = (verts[k], verts[k + 1]);
        let seg_len = cum[k + 1] - cum[k];
        let pieces = ((seg_len / PIECE_LENGTH).ceil() as usize).max(1);
        for p in 0..pieces {
            let t0 = p as f64 / pieces as f64;
            let t1 = (p + 1) as f64 / pieces as f64;
            let (pa, pb) = (a.lerp(b, t0), a.lerp(b, t1));
            let s0 = cum[k] + t0 * seg_len;
            let d = pb - pa;
            let len2 = d.dot(d);
            let Some((x0, x1)) = CoverageRaster::axis_range(
                pa.x.min(pb.x) - half,
                pa.x.max(pb.x) + half,
                raster.origin.x,
                raster.cell,
                raster.width,
            ) else {
                continue;
            };
            let Some((y0, y1)) = CoverageRaster::axis_range(
                pa.y.min(pb.y) - half,
                pa.y.max(pb.y) + half,
                raster.origin.y,
                raster.cell,
                raster.height,
            ) else {
                continue;
            };
            for iy in y0..=y1 {
                for ix in x0..=x1 {
                    let c = raster.cell_center(ix, iy);
                    let u = if len2 > 0.0 { ((c - pa).dot(d) / len2).clamp(0.0, 1.0) } else { 0.0 };
                    let foot = pa + d * u;
                    let off = c - foot;
                    if off.dot(off) > r2 {
                        continue;
                    }
                    let s = s0 + u * len2.sqrt();
                    let idx = iy * raster.width + ix;
                    if s - last_visit[idx] > w {
                        raster.counts[idx] += 1;
                    }
                    last_visit[idx] = last_visit[idx].max(s);
                }
            }
        }
    }
    Ok(())
}

/// One 4-connected region of uncovered field cells.
#[derive(Debug, Clone, PartialEq)]
pub struct GapRegion {
    pub cells: usize,
    pub area: f64,
    pub centroid: Point2,
}

/// Uncovered field-interior cells and their connected regions, largest first.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub gap_cells: usize,
    pub regions: Vec<GapRegion>,
}

impl GapReport {
    pub fn total_area(&self) -> f64 {
        self.regions.iter().map(|r| r.area).sum()
    }
}

/// Cells inside `field` whose centre was never covered.
pub fn find_gaps(raster: &CoverageRaster, field: &[Point2]) -> GapReport {
    let (w, h) = (raster.width, raster.height);
    let gap: Vec<bool> = (0..w * h)
        .map(|i| raster.counts[i] == 0 && point_in_polygon(raster.cell_center(i % w, i / w), field))
        .collect();
    let mut seen = vec![false; w * h];
    let mut regions = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if !gap[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let (mut n, mut sum) = (0usize, Point2::default());
        while let Some(i) = queue.pop_front() {
            n += 1;
            sum += raster.cell_center(i % w, i / w);
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if gap[j] && !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        regions.push(GapRegion {
            cells: n,
            area: n as f64 * raster.cell_area(),
            centroid: sum * (1.0 / n as f64),
        });
    }
    regions.sort_by_key(|r| std::cmp::Reverse(r.cells));
    GapReport {
        gap_cells: gap.iter().filter(|&&g| g).count(),
        regions,
    }
}

/// Cubic Bézier curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicBezier {
    pub control: [Point2; 4],
}

impl CubicBezier {
    pub fn point(&self, t: f64) -> Point2 {
        let [p0, p1, p2, p3] = self.control;
        let u = 1.0 - t;
        p0 * (u * u * u) + p1 * (3.0 * u * u * t) + p2 * (3.0 * u * t * t) + p3 * (t * t * t)
    }

    pub fn derivative(&self, t: f64) -> Point2 {
        let [p0, p1, p2, p3] = self.control;
        let u = 1.0 - t;
        (p1 - p0) * (3.0 * u * u) + (p2 - p1) * (6.0 * u * t) + (p3 - p2) * (3.0 * t * t)
    }

    pub fn second_derivative(&self, t: f64) -> Point2 {
        let [p0, p1, p2, p3] = self.control;
        (p2 - p1 * 2.0 + p0) * (6.0 * (1.0 - t)) + (p3 - p2 * 2.0 + p1) * (6.0 * t)
    }

    /// Signed curvature; zero where the curve is stationary.
    pub fn curvature(&self, t: f64) -> f64 {
        let d1 = self.derivative(t);
        let speed = d1.norm();
        if speed <= 1e-12 {
            return 0.0;
        }
        d1.cross(self.second_derivative(t)) / (speed * speed * speed)
    }

    /// Largest `|curvature|` over `samples + 1` evenly spaced parameters.
    pub fn max_abs_curvature(&self, samples: usize) -> f64 {
        (0..=samples)
            .map(|i| self.curvature(i as f64 / samples as f64).abs())
            .fold(0.0, f64::max)
    }

    /// Dense evaluation resampled at `spacing` of arclength.
    pub fn sample(&self, spacing: f64) -> Result<PathPolyline> {
        const DENSE: usize = 2000;
        let mut pts: Vec<Point2> = (0..=DENSE).map(|i| self.point(i as f64 / DENSE as f64)).collect();
        pts.dedup_by(|a, b| a.dist(*b) <= 1e-12);
        if pts.len() < 2 {
            return Err(Error::InvalidPath("degenerate Bézier curve".into()));
        }
        resample_uniform(&PathPolyline::with_label(pts, Label::Headland)?, spacing)
    }
}

/// Chord-length parameters of `points`, normalised to `[0, 1]`.
pub fn chord_parameters(points: &[Point2]) -> Vec<f64> {
    let mut t = vec![0.0];
    for w in points.windows(2) {
        t.push(t[t.len() - 1] + w[0].dist(w[1]));
    }
    let total = t[t.len() - 1];
    if total > 0.0 {
        t.iter_mut().for_each(|v| *v /= total);
    }
    t
}

/// Least-squares cubic Bézier through the first and last point at the given
/// curve parameters. A rank-deficient fit falls back to the straight segment.
pub fn fit_cubic_bezier(points: &[Point2], params: &[f64]) -> Result<CubicBezier> {
    if points.len() < 4 || params.len() != points.len() {
        return Err(Error::InvalidParameter("Bézier fit needs at least 4 points with parameters".into()));
    }
    let p0 = points[0];
    let p3 = points[points.len() - 1];
    // Normal equations of min sum |b1 P1 + b2 P2 - r|^2 over the interior basis.
    let (mut a11, mut a12, mut a22) = (0.0, 0.0, 0.0);
    let (mut r1, mut r2) = (Point2::default(), Point2::default());
    for (&q, &t) in points.iter().zip(params) {
        let u = 1.0 - t;
        let (b0, b1, b2, b3) = (u * u * u, 3.0 * u * u * t, 3.0 * u * t * t, t * t * t);
        let r = q - p0 * b0 - p3 * b3;
        a11 += b1 * b1;
        a12 += b1 * b2;
        a22 += b2 * b2;
        r1 += r * b1;
        r2 += r * b2;
    }
    let det = a11 * a22 - a12 * a12;
    let scale = (a11 * a22).max(f64::MIN_POSITIVE);
    let straight = CubicBezier {
        control: [p0, p0.lerp(p3, 1.0 / 3.0), p0.lerp(p3, 2.0 / 3.0), p3],
    };
    if det.abs() <= 1e-12 * scale {
        return Ok(straight);
    }
    let p1 = (r1 * a22 - r2 * a12) * (1.0 / det);
    let p2 = (r2 * a11 - r1 * a12) * (1.0 / det);
    if !(p1.is_finite() && p2.is_finite()) {
        return Ok(straight);
    }
    Ok(CubicBezier { control: [p0, p1, p2, p3] })
}

/// The cubic Bézier baseline: chord-parametrised least-squares fit sampled at
/// `spacing`.
pub fn bezier3_baseline(points: &[Point2], spacing: f64) -> Result<(CubicBezier, PathPolyline)> {
    let curve = fit_cubic_bezier(points, &chord_parameters(points))?;
    let path = curve.sample(spacing)?;
    Ok((curve, path))
}

/// The baseline for one corner instance: the fit through the corner
/// reference samples from anchor A to anchor E. `None` for references
/// without corner anchors.
pub fn bezier_corner_baseline(reference: &ReferencePath, spacing: f64) -> Result<Option<(CubicBezier, PathPolyline)>> {
    let Some(corner) = &reference.corner else { return Ok(None) };
    let pos = reference.frame.positions();
    let nearest = |q: Point2| (0..pos.len()).min_by(|&a, &b| pos[a].dist(q).total_cmp(&pos[b].dist(q)));
    let (Some(a), Some(e)) = (nearest(corner.anchors[0]), nearest(corner.anchors[4])) else {
        return Ok(None);
    };
    let (a, e) = (a.min(e), a.max(e));
    bezier3_baseline(&pos[a..=e], spacing).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vehicle::VehicleParams;

    fn line(a: Point2, b: Point2, n: usize) -> PathPolyline {
        let pts = (0..=n).map(|i| a.lerp(b, i as f64 / n as f64)).collect();
        PathPolyline::with_label(pts, Label::Lane).unwrap()
    }

    fn bounds(x0: f64, y0: f64, x1: f64, y1: f64) -> Bounds {
        Bounds::new(Point2::new(x0, y0), Point2::new(x1, y1))
    }

    #[test]
    fn straight_band_area_matches_rectangle() {
        let path = line(Point2::new(0.0, 0.0), Point2::new(100.0, 0.0), 100);
        let r = rasterize_swath(&path, 20.0, 0.1, bounds(-20.0, -20.0, 120.0, 20.0)).unwrap();
        // Rectangle plus two half-disc end caps of radius w/2.
        let expect = 100.0 * 20.0 + std::f64::consts::PI * 100.0;
        assert!((r.covered_area() - expect).abs() / expect < 0.01, "{}", r.covered_area());
        assert_eq!(r.overlap_cells(), 0);
    }

    #[test]
    fn passes_at_spacing_w_tile() {
        let b = bounds(0.0, -20.0, 100.0, 40.0);
        let mut r = CoverageRaster::new(b, 0.1).unwrap();
        add_swath(&mut r, &line(Point2::new(0.0, 0.0), Point2::new(100.0, 0.0), 10), 20.0).unwrap();
        add_swath(&mut r, &line(Point2::new(100.0, 20.0), Point2::new(0.0, 20.0), 10), 20.0).unwrap();
        let band = 100.0 * 20.0 / r.cell_area();
        assert!((r.overlap_cells() as f64) < 0.005 * band, "{}", r.overlap_cells());
    }

    #[test]
    fn passes_at_half_spacing_overlap_half() {
        let b = bounds(0.0, -20.0, 100.0, 40.0);
        let mut r = CoverageRaster::new(b, 0.1).unwrap();
        add_swath(&mut r, &line(Point2::new(0.0, 0.0), Point2::new(100.0, 0.0), 10), 20.0).unwrap();
        add_swath(&mut r, &line(Point2::new(100.0, 10.0), Point2::new(0.0, 10.0), 10), 20.0).unwrap();
        // Strips [-10, 10] and [0, 20] intersect in a 10 m strip over x in [0, 100].
        let overlap = r.overlap_cells() as f64 * r.cell_area();
        assert!((overlap - 1000.0).abs() / 1000.0 < 0.01, "{overlap}");
    }

    #[test]
    fn u_turn_counts_two_passes_within_one_path() {
        let mut v: Vec<Point2> = (0..=50).map(|i| Point2::new(i as f64, 0.0)).collect();
        v.extend((0..=50).rev().map(|i| Point2::new(i as f64, 10.0)));
        let path = PathPolyline::with_label(v, Label::Lane).unwrap();
        let r = rasterize_swath(&path, 20.0, 0.5, bounds(-5.0, -5.0, 60.0, 15.0)).unwrap();
        let (ix, iy) = (50, 10); // centre (20.25, 0.25)
        assert_eq!(r.count(ix, iy), 2);
    }

    #[test]
    fn rejects_coarse_cells() {
        let path = line(Point2::new(0.0, 0.0), Point2::new(10.0, 0.0), 1);
        assert!(rasterize_swath(&path, 2.0, 0.5, bounds(0.0, 0.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn halving_cells_changes_area_little() {
        let pts: Vec<Point2> = (0..=200)
            .map(|i| {
                let a = i as f64 / 200.0 * std::f64::consts::PI;
                Point2::new(40.0 * a.cos(), 40.0 * a.sin())
            })
            .collect();
        let path = PathPolyline::with_label(pts, Label::Headland).unwrap();
        let b = bounds(-60.0, -15.0, 60.0, 60.0);
        let coarse = rasterize_swath(&path, 10.0, 1.0, b).unwrap().covered_area();
        let fine = rasterize_swath(&path, 10.0, 0.5, b).unwrap().covered_area();
        assert!((coarse - fine).abs() / fine < 0.01, "{coarse} {fine}");
    }

    fn square(side: f64) -> Vec<Point2> {
        vec![
            Point2::new(0.0, 0.0),
            Point2::new(side, 0.0),
            Point2::new(side, side),
            Point2::new(0.0, side),
        ]
    }

    fn boustrophedon(side: f64, w: f64) -> Vec<PathPolyline> {
        let n = (side / w).round() as usize;
        (0..n)
            .map(|k| {
                let y = (k as f64 + 0.5) * w;
                line(Point2::new(-w, y), Point2::new(side + w, y), 10)
            })
            .collect()
    }

    #[test]
    fn tiled_rectangle_has_no_gaps() {
        let field = square(60.0);
        let mut r = CoverageRaster::new(Bounds::of_points(&field).unwrap(), 0.2).unwrap();
        for p in boustrophedon(60.0, 4.0) {
            add_swath(&mut r, &p, 4.0).unwrap();
        }
        assert_eq!(find_gaps(&r, &field).gap_cells, 0);
    }

    #[test]
    fn removed_corner_pass_leaves_triangle_gap() {
        // Diagonal passes cover the square except the triangle x + y < 20,
        // whose pass is left out.
        let field = square(60.0);
        let w = 4.0;
        let mut r = CoverageRaster::new(Bounds::of_points(&field).unwrap(), 0.1).unwrap();
        // Each pass covers a band of width w * sqrt(2) in x + y.
        let step = w * std::f64::consts::SQRT_2;
        let mut c = 20.0 + 0.5 * step;
        while c - 0.5 * step < 120.0 {
            let p = line(Point2::new(c + 10.0, -10.0), Point2::new(-10.0, c + 10.0), 20);
            add_swath(&mut r, &p, w).unwrap();
            c += step;
        }
        let report = find_gaps(&r, &field);
        let triangle = 0.5 * 20.0 * 20.0;
        assert_eq!(report.regions.len(), 1);
        assert!((report.regions[0].area - triangle).abs() / triangle < 0.05, "{}", report.regions[0].area);
        let ctr = report.regions[0].centroid;
        assert!(ctr.x < 10.0 && ctr.y < 10.0);
    }

    #[test]
    fn bezier_recovers_control_points_at_true_parameters() {
        let curve = CubicBezier {
            control: [Point2::new(0.0, 0.0), Point2::new(3.0, 7.0), Point2::new(9.0, -2.0), Point2::new(12.0, 4.0)],
        };
        let t = [0.0, 0.3, 0.65, 1.0];
        let pts: Vec<Point2> = t.iter().map(|&v| curve.point(v)).collect();
        let fit = fit_cubic_bezier(&pts, &t).unwrap();
        for (a, b) in fit.control.iter().zip(&curve.control) {
            assert!(a.dist(*b) <= 1e-9, "{a:?} {b:?}");
        }
    }

    #[test]
    fn bezier_on_straight_points_is_straight() {
        let pts: Vec<Point2> = (0..=10).map(|i| Point2::new(i as f64 * 2.0, i as f64)).collect();
        let (curve, path) = bezier3_baseline(&pts, 1.0).unwrap();
        assert!(curve.max_abs_curvature(200) < 1e-9);
        for q in path.vertices() {
            assert!((q.y - 0.5 * q.x).abs() < 1e-9);
        }
        // Chord parameters match the uniform straight-line Bézier exactly.
        assert!(curve.control[1].dist(Point2::new(20.0 / 3.0, 10.0 / 3.0)) < 1e-9);
    }

    #[test]
    fn bezier_degenerate_falls_back_to_straight() {
        let pts = vec![Point2::new(0.0, 0.0); 3].into_iter().chain([Point2::new(3.0, 0.0)]).collect::<Vec<_>>();
        let fit = fit_cubic_bezier(&pts, &[0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(fit.control[1].dist(Point2::new(1.0, 0.0)) < 1e-12);
    }

    #[test]
    fn bezier_through_tight_right_angle_is_too_sharp() {
        let mut pts: Vec<Point2> = (0..=8).map(|i| Point2::new(i as f64, 0.0)).collect();
        pts.extend((1..=8).map(|i| Point2::new(8.0, i as f64)));
        let (curve, _) = bezier3_baseline(&pts, 1.0).unwrap();
        let r_min = VehicleParams::default().min_turning_radius();
        assert!(curve.max_abs_curvature(2000) > 1.0 / r_min);
    }

    #[test]
    fn curvature_of_bezier_matches_finite_differences() {
        let curve = CubicBezier {
            control: [Point2::new(0.0, 0.0), Point2::new(2.0, 5.0), Point2::new(7.0, 5.0), Point2::new(9.0, 0.0)],
        };
        let h = 1e-4;
        for t in [0.2, 0.5, 0.8] {
            let (a, b, c) = (curve.point(t - h), curve.point(t), curve.point(t + h));
            let k = crate::geometry::circumscribed_curvature(a, b, c).unwrap();
            assert!((k - curve.curvature(t)).abs() < 1e-5, "{k} {}", curve.curvature(t));
        }
    }

    #[test]
    fn pgm_header_and_size() {
        let mut r = CoverageRaster::new(bounds(0.0, 0.0, 3.0, 2.0), 1.0).unwrap();
        r.counts[0] = 1;
        let pgm = r.to_pgm();
        let mut lines = pgm.lines();
        assert_eq!(lines.next(), Some("P2"));
        assert_eq!(lines.next(), Some("3 2"));
        assert_eq!(lines.next(), Some("255"));
        assert_eq!(lines.next(), Some("255 255 255"));
        assert_eq!(lines.next(), Some("175 255 255"));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]

        #[test]
        fn adding_a_pass_never_adds_gaps(y in 0.0..30.0f64, x0 in -10.0..20.0f64) {
            let field = square(30.0);
            let b = Bounds::of_points(&field).unwrap();
            let mut r = CoverageRaster::new(b, 0.25).unwrap();
            add_swath(&mut r, &line(Point2::new(0.0, 5.0), Point2::new(30.0, 5.0), 3), 4.0).unwrap();
            let before = find_gaps(&r, &field).gap_cells;
            add_swath(&mut r, &line(Point2::new(x0, y), Point2::new(x0 + 25.0, y + 3.0), 5), 4.0).unwrap();
            proptest::prop_assert!(find_gaps(&r, &field).gap_cells <= before);
        }
    }
}
