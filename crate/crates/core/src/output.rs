//! Files written by a pipeline run: plan GeoJSON, report and timing CSV,
//! SVG figure and PGM coverage raster.
//!
//! Everything except `timing.csv` is a pure function of the pipeline output,
//! so repeated runs write byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::coverage::Bounds;
use crate::error::{Error, Result};
use crate::geometry::{Label, PathPolyline, Point2};
use crate::pipeline::{InstanceOutcome, PipelineOutput, RunReport};

pub const PLAN_FILE: &str = "plan.geojson";
pub const REPORT_FILE: &str = "report.csv";
pub const TIMING_FILE: &str = "timing.csv";
pub const FIGURE_FILE: &str = "figure.svg";
pub const COVERAGE_FILE: &str = "coverage.pgm";

/// Maximal runs of equal vertex labels as `(first, last, label)`.
fn label_runs(labels: &[Label]) -> Vec<(usize, usize, Label)> {
    let mut runs: Vec<(usize, usize, Label)> = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        match runs.last_mut() {
            Some(run) if run.2 == l => run.1 = i,
            _ => runs.push((i, i, l)),
        }
    }
    runs
}

fn coords(points: &[Point2]) -> Value {
    Value::Array(points.iter().map(|p| json!([p.x, p.y])).collect())
}

/// The plan as a FeatureCollection with one LineString per label run. Each
/// feature also carries the first vertex of the next run so the lines join.
/// A trailing single-vertex run is recorded as `end_label` on the last feature.
pub fn plan_geojson(plan: Option<&PathPolyline>) -> String {
    let mut features = Vec::new();
    if let Some(plan) = plan {
        let v = plan.vertices();
        let mut runs = label_runs(plan.labels());
        let mut end_label = None;
        if runs.len() > 1 && runs.last().is_some_and(|r| r.0 == r.1) {
            end_label = runs.pop().map(|r| r.2);
        }
        let last = runs.len() - 1;
        for (k, &(a, b, label)) in runs.iter().enumerate() {
            let end = if k == last && end_label.is_none() { b } else { b + 1 };
            let mut props = serde_json::Map::new();
            props.insert("index".into(), json!(k));
            props.insert("label".into(), json!(label.as_str()));
            if k == last {
                if let Some(l) = end_label {
                    props.insert("end_label".into(), json!(l.as_str()));
                }
            }
            features.push(json!({
                "type": "Feature",
                "properties": props,
                "geometry": { "type": "LineString", "coordinates": coords(&v[a..=end]) },
            }));
        }
    }
    let mut out = String::from("{\"type\":\"FeatureCollection\",\"features\":[");
    for (k, f) in features.iter().enumerate() {
        out.push_str(if k == 0 { "\n" } else { ",\n" });
        out.push_str(&f.to_string());
    }
    out.push_str("\n]}\n");
    out
}

fn input(msg: impl Into<String>) -> Error {
    Error::Input(msg.into())
}

fn label_of(v: &Value, key: &str) -> Result<Option<Label>> {
    match v.get(key) {
        None => Ok(None),
        Some(s) => s
            .as_str()
            .and_then(Label::parse)
            .map(Some)
            .ok_or_else(|| input(format!("feature {key} is not a known label"))),
    }
}

/// Reads a plan written by [`plan_geojson`]; `None` for an empty collection.
pub fn parse_plan_geojson(text: &str) -> Result<Option<PathPolyline>> {
    let doc: Value = serde_json::from_str(text).map_err(|e| input(format!("invalid JSON: {e}")))?;
    let features = doc
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| input("expected a FeatureCollection"))?;
    let mut vertices = Vec::new();
    let mut labels = Vec::new();
    for (k, f) in features.iter().enumerate() {
        let props = f.get("properties").unwrap_or(&Value::Null);
        let label = label_of(props, "label")?.ok_or_else(|| input(format!("feature {k} has no label")))?;
        let pts = f
            .pointer("/geometry/coordinates")
            .and_then(Value::as_array)
            .ok_or_else(|| input(format!("feature {k} has no LineString coordinates")))?;
        let pts = pts
            .iter()
            .map(|c| match c.as_array().map(|a| a.as_slice()) {
                Some([x, y, ..]) => match (x.as_f64(), y.as_f64()) {
                    (Some(x), Some(y)) => Ok(Point2::new(x, y)),
                    _ => Err(input(format!("feature {k}: non-numeric coordinate"))),
                },
                _ => Err(input(format!("feature {k}: malformed coordinate"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if pts.len() < 2 {
            return Err(input(format!("feature {k} has fewer than 2 points")));
        }
        // The shared joint belongs to the next feature.
        if k > 0 {
            vertices.pop();
            labels.pop();
        }
        labels.extend(std::iter::repeat_n(label, pts.len()));
        vertices.extend(pts);
        if let Some(end) = label_of(props, "end_label")? {
            if let Some(l) = labels.last_mut() {
                *l = end;
            }
        }
    }
    if vertices.is_empty() {
        return Ok(None);
    }
    PathPolyline::new(vertices, labels).map(Some)
}

fn csv_error(e: csv::Error) -> Error {
    Error::Input(format!("CSV encoding failed: {e}"))
}

fn write_csv(rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(&r).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Input(format!("CSV encoding failed: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Input(format!("CSV encoding failed: {e}")))
}

const REPORT_HEADER: [&str; 10] = [
    "index",
    "kind",
    "problem",
    "status",
    "n",
    "n_u",
    "n_cstrts",
    "max_abs_e_y",
    "path_length",
    "r_dubins",
];

fn f6(x: f64) -> String {
    format!("{x:.6}")
}

/// One row per instance, then per problem class a `mean` row over the
/// successful instances (`status` holds their count) and a `max` row for
/// `max_abs_e_y`. Solve times live in [`timing_csv`] because they vary
/// between runs.
pub fn report_csv(report: &RunReport) -> Result<String> {
    let mut rows = vec![REPORT_HEADER.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
    for r in &report.rows {
        rows.push(vec![
            r.index.to_string(),
            r.kind.as_str().into(),
            r.problem.to_string(),
            r.status.clone(),
            r.n.to_string(),
            r.n_u.to_string(),
            r.n_cstrts.to_string(),
            f6(r.max_abs_e_y),
            f6(r.path_length),
            r.r_dubins.map(f6).unwrap_or_default(),
        ]);
    }
    for problem in [1u8, 2] {
        let a = report.aggregate(problem);
        if a.count == 0 {
            continue;
        }
        let mean_n = report
            .rows
            .iter()
            .filter(|r| r.problem == problem && r.succeeded())
            .map(|r| r.n as f64)
            .sum::<f64>()
            / a.count as f64;
        let mean_len = report
            .rows
            .iter()
            .filter(|r| r.problem == problem && r.succeeded())
            .map(|r| r.path_length)
            .sum::<f64>()
            / a.count as f64;
        rows.push(vec![
            "mean".into(),
            format!("problem{problem}"),
            problem.to_string(),
            a.count.to_string(),
            f6(mean_n),
            f6(a.mean_n_u),
            f6(a.mean_n_cstrts),
            f6(a.mean_max_abs_e_y),
            f6(mean_len),
            String::new(),
        ]);
        let mut max_row = vec![String::new(); REPORT_HEADER.len()];
        max_row[0] = "max".into();
        max_row[1] = format!("problem{problem}");
        max_row[2] = problem.to_string();
        max_row[3] = a.count.to_string();
        max_row[7] = f6(a.max_max_abs_e_y);
        rows.push(max_row);
    }
    write_csv(rows)
}

/// LP wall-clock times per instance, with a `mean` row per problem class.
pub fn timing_csv(report: &RunReport, instances: &[InstanceOutcome]) -> Result<String> {
    let mut rows = vec![["index", "problem", "lp_solves", "total_s", "max_solve_s"]
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()];
    for (r, o) in report.rows.iter().zip(instances) {
        let times = o.result.as_ref().map(|sp| sp.diagnostics.solve_times.clone()).unwrap_or_default();
        rows.push(vec![
            r.index.to_string(),
            r.problem.to_string(),
            times.len().to_string(),
            format!("{:.6}", times.iter().sum::<f64>()),
            format!("{:.6}", times.iter().copied().fold(0.0, f64::max)),
        ]);
    }
    for problem in [1u8, 2] {
        let a = report.aggregate(problem);
        if a.count > 0 {
            rows.push(vec![
                "mean".into(),
                problem.to_string(),
                String::new(),
                format!("{:.6}", a.mean_solve_time),
                String::new(),
            ]);
        }
    }
    write_csv(rows)
}

/// World-to-pixel mapping with the y axis pointing up in the world.
#[derive(Debug, Clone, Copy)]
struct View {
    bounds: Bounds,
    scale: f64,
    left: f64,
    top: f64,
}

impl View {
    fn fit(bounds: Bounds, left: f64, top: f64, width: f64, height: f64) -> Self {
        let w = (bounds.max.x - bounds.min.x).max(1e-9);
        let h = (bounds.max.y - bounds.min.y).max(1e-9);
        let scale = (width / w).min(height / h);
        let left = left + 0.5 * (width - w * scale);
        let top = top + 0.5 * (height - h * scale);
        Self {
            bounds,
            scale,
            left,
            top,
        }
    }

    fn px(&self, p: Point2) -> (f64, f64) {
        (
            self.left + (p.x - self.bounds.min.x) * self.scale,
            self.top + (self.bounds.max.y - p.y) * self.scale,
        )
    }

    fn points(&self, pts: &[Point2]) -> String {
        let mut s = String::new();
        for (k, &p) in pts.iter().enumerate() {
            let (x, y) = self.px(p);
            if k > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{x:.2},{y:.2}");
        }
        s
    }

    fn polyline(&self, out: &mut String, pts: &[Point2], style: &str) {
        if pts.len() >= 2 {
            let _ = writeln!(out, "<polyline points=\"{}\" {style}/>", self.points(pts));
        }
    }

    /// Draws only the pieces of `pts` near the view bounds.
    fn clipped_polyline(&self, out: &mut String, pts: &[Point2], style: &str) {
        let b = self.bounds.expanded(0.1 * (self.bounds.max.x - self.bounds.min.x));
        let inside = |p: Point2| p.x >= b.min.x && p.x <= b.max.x && p.y >= b.min.y && p.y <= b.max.y;
        let mut k = 0;
        while k < pts.len() {
            if !inside(pts[k]) {
                k += 1;
                continue;
            }
            let start = k.saturating_sub(1);
            while k < pts.len() && inside(pts[k]) {
                k += 1;
            }
            self.polyline(out, &pts[start..(k + 1).min(pts.len())], style);
        }
    }

    fn polygon(&self, out: &mut String, pts: &[Point2], style: &str) {
        if pts.len() >= 3 {
            let _ = writeln!(out, "<polygon points=\"{}\" {style}/>", self.points(pts));
        }
    }
}

fn label_color(l: Label) -> &'static str {
    match l {
        Label::Headland => "#1f5fbf",
        Label::Lane => "#222222",
        Label::Transition => "#e07000",
    }
}

/// Draws `plan` as one polyline per label run, optionally clipped to the view.
fn draw_plan(out: &mut String, view: &View, plan: &PathPolyline, width: f64, clip: bool) {
    let v = plan.vertices();
    for (a, b, l) in label_runs(plan.labels()) {
        let end = (b + 1).min(v.len() - 1);
        let draw = if clip { View::clipped_polyline } else { View::polyline };
        draw(
            view,
            out,
            &v[a..=end],
            &format!("fill=\"none\" stroke=\"{}\" stroke-width=\"{width}\"", label_color(l)),
        );
    }
}

const MAP_SIZE: f64 = 800.0;
const PANEL_SIZE: f64 = 240.0;
const PANEL_COLUMNS: usize = 4;
const PANEL_MARGIN_M: f64 = 5.0;
const PANEL_GAP: f64 = 20.0;

fn instance_points(raw: &PathPolyline, o: &InstanceOutcome) -> (Vec<Point2>, Vec<Point2>, Vec<Point2>) {
    let v = raw.vertices();
    let i1 = o.segment.i1.min(v.len() - 1);
    let original = v[o.segment.i0.min(i1)..=i1].to_vec();
    let reference = o.reference.as_ref().map(|r| r.frame.positions()).unwrap_or_default();
    let smoothed = o
        .result
        .as_ref()
        .map(|sp| sp.polyline.vertices().to_vec())
        .unwrap_or_default();
    (original, reference, smoothed)
}

/// Square box around `pts` with a margin.
fn zoom_bounds(pts: &[Point2]) -> Option<Bounds> {
    let b = Bounds::of_points(pts)?.expanded(PANEL_MARGIN_M);
    let c = b.min.lerp(b.max, 0.5);
    let half = 0.5 * (b.max.x - b.min.x).max(b.max.y - b.min.y);
    Some(Bounds::new(
        Point2::new(c.x - half, c.y - half),
        Point2::new(c.x + half, c.y + half),
    ))
}

/// Field map with the smoothed plan on top and one zoom panel per instance.
pub fn figure_svg(out: &PipelineOutput) -> String {
    let layout = &out.layout;
    let mut all: Vec<Point2> = layout.contour.clone();
    all.extend_from_slice(out.plan.vertices());
    let bounds = Bounds::of_points(&all)
        .unwrap_or_else(|| Bounds::new(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0)))
        .expanded(5.0);
    let map = View::fit(bounds, 0.0, 0.0, MAP_SIZE, MAP_SIZE);
    let panel_rows = out.instances.len().div_ceil(PANEL_COLUMNS);
    let height = MAP_SIZE + panel_rows as f64 * (PANEL_SIZE + PANEL_GAP);
    let width = PANEL_COLUMNS as f64 * PANEL_SIZE;

    let mut s = String::new();
    let _ = writeln!(s, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\" font-size=\"11\">"
    );
    let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    map.polygon(&mut s, &layout.contour, "fill=\"#eef6e6\" stroke=\"#4d7f2a\" stroke-width=\"1.5\"");
    map.polygon(
        &mut s,
        &layout.headland,
        "fill=\"none\" stroke=\"#999999\" stroke-width=\"0.8\" stroke-dasharray=\"4 3\"",
    );
    for lane in &layout.lanes {
        map.polyline(&mut s, lane, "fill=\"none\" stroke=\"#bbbbbb\" stroke-width=\"0.8\"");
    }
    draw_plan(&mut s, &map, &out.plan, 1.2, false);

    for (k, o) in out.instances.iter().enumerate() {
        let (original, reference, smoothed) = instance_points(&out.raw_plan, o);
        let mut pts = original.clone();
        pts.extend_from_slice(&smoothed);
        let Some(zoom) = zoom_bounds(&pts) else { continue };
        let (x0, y0) = map.px(Point2::new(zoom.min.x, zoom.max.y));
        let (x1, y1) = map.px(Point2::new(zoom.max.x, zoom.min.y));
        let _ = writeln!(
            s,
            "<rect x=\"{x0:.2}\" y=\"{y0:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#cc0000\" stroke-width=\"0.8\"/>",
            x1 - x0,
            y1 - y0
        );
        let _ = writeln!(s, "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"#cc0000\">{k}</text>", x0 + 2.0, y0 - 2.0);

        let col = (k % PANEL_COLUMNS) as f64;
        let row = (k / PANEL_COLUMNS) as f64;
        let left = col * PANEL_SIZE;
        let top = MAP_SIZE + PANEL_GAP + row * (PANEL_SIZE + PANEL_GAP);
        let inner = PANEL_SIZE - 10.0;
        let panel = View::fit(zoom, left + 5.0, top, inner, inner);
        let status = out.report.rows.get(k).map_or("", |r| r.status.as_str());
        let status = if status.len() > 24 { "failed" } else { status };
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\">{k}: {} ({status})</text>",
            left + 5.0,
            top - 4.0,
            o.segment.kind.as_str()
        );
        let _ = writeln!(
            s,
            "<svg x=\"{:.2}\" y=\"{top:.2}\" width=\"{inner:.2}\" height=\"{inner:.2}\" viewBox=\"{:.2} {top:.2} {inner:.2} {inner:.2}\" overflow=\"hidden\">",
            left + 5.0,
            left + 5.0
        );
        let _ = writeln!(
            s,
            "<rect x=\"{:.2}\" y=\"{top:.2}\" width=\"{inner:.2}\" height=\"{inner:.2}\" fill=\"#fafafa\" stroke=\"#888888\"/>",
            left + 5.0
        );
        panel.polygon(&mut s, &layout.contour, "fill=\"#eef6e6\" stroke=\"#4d7f2a\" stroke-width=\"1.5\"");
        panel.clipped_polyline(&mut s, out.raw_plan.vertices(), "fill=\"none\" stroke=\"#cc0000\" stroke-width=\"1\" stroke-dasharray=\"3 2\"");
        panel.polyline(&mut s, &reference, "fill=\"none\" stroke=\"#777777\" stroke-width=\"1\" stroke-dasharray=\"1 2\"");
        draw_plan(&mut s, &panel, &out.plan, 1.5, true);
        let _ = writeln!(s, "</svg>");
    }
    let _ = writeln!(s, "</svg>");
    s
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes all output files into `dir`, creating it if needed, and returns
/// their paths.
pub fn emit_outputs(out: &PipelineOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    Ok(vec![
        write_file(dir, PLAN_FILE, &plan_geojson(Some(&out.plan)))?,
        write_file(dir, REPORT_FILE, &report_csv(&out.report)?)?,
        write_file(dir, TIMING_FILE, &timing_csv(&out.report, &out.instances)?)?,
        write_file(dir, FIGURE_FILE, &figure_svg(out))?,
        write_file(dir, COVERAGE_FILE, &out.raster.to_pgm())?,
    ])
}

/// Reads a plan file written by [`emit_outputs`].
pub fn load_plan(path: &Path) -> Result<Option<PathPolyline>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_plan_geojson(&text)
}
