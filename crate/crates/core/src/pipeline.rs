//! End-to-end driver: traversal plan, detection, per-instance smoothing,
//! stitching and coverage.

use crate::config::RunConfig;
use crate::coverage::{rasterize_swath, Bounds, CoverageRaster};
use crate::error::{Error, Result};
use crate::field::{traversal_plan, FieldLayout, PlanOptions};
use crate::geometry::{circumscribed_curvature, PathPolyline};
use crate::reference::{
    build_dubins_reference, build_pwa5_reference, compute_weight_index, default_extension, detect_edgy_segments,
    DetectOptions, EdgySegment, Pwa5Options, ReferencePath, SegmentKind,
};
use crate::smoother::{solve_smoothing, stitch_replace, SmoothedPath, SmoothingProblem};
use crate::vehicle::VehicleParams;

/// Headland driven before the first lane, after the full loop.
pub const PLAN_LEAD: f64 = 30.0;
/// Headland driven after the last lane.
pub const PLAN_TAIL: f64 = 20.0;
/// Factor applied to the Dubins radius when an instance fails at the first radius.
pub const RADIUS_RETRY_FACTOR: f64 = 1.25;
/// Boundary curvature above which the boundary steering is pinned (1/m).
pub const PIN_CURVATURE: f64 = 1e-6;

/// Outcome of one smoothing instance.
#[derive(Debug, Clone)]
pub struct InstanceOutcome {
    pub segment: EdgySegment,
    /// Reference of the last attempt.
    pub reference: Option<ReferencePath>,
    /// Dubins radius of the last attempt, if a Dubins reference was used.
    pub r_dubins: Option<f64>,
    /// The corner was handled by the Dubins fallback.
    pub fallback: bool,
    pub result: std::result::Result<SmoothedPath, String>,
}

impl InstanceOutcome {
    /// 1 for the corner LP, 2 for the transition LP.
    pub fn problem(&self) -> u8 {
        match &self.reference {
            Some(r) if r.corner.is_some() && !self.fallback => 1,
            None if self.segment.kind == SegmentKind::HeadlandCorner => 1,
            _ => 2,
        }
    }
}

/// One report row per instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub index: usize,
    pub kind: SegmentKind,
    pub problem: u8,
    /// `ok`, `fallback`, `retry` or the error message.
    pub status: String,
    pub n: usize,
    pub n_u: usize,
    pub n_cstrts: usize,
    /// Total LP time of the instance in seconds.
    pub solve_time: f64,
    pub max_abs_e_y: f64,
    pub path_length: f64,
    pub r_dubins: Option<f64>,
}

impl ReportRow {
    pub fn succeeded(&self) -> bool {
        matches!(self.status.as_str(), "ok" | "fallback" | "retry")
    }
}

/// Arithmetic means over the successful rows of one problem class.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Aggregate {
    pub count: usize,
    pub mean_n_cstrts: f64,
    pub mean_n_u: f64,
    pub mean_solve_time: f64,
    pub mean_max_abs_e_y: f64,
    pub max_max_abs_e_y: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunReport {
    pub rows: Vec<ReportRow>,
}

impl RunReport {
    pub fn aggregate(&self, problem: u8) -> Aggregate {
        let rows: Vec<&ReportRow> = self.rows.iter().filter(|r| r.problem == problem && r.succeeded()).collect();
        if rows.is_empty() {
            return Aggregate::default();
        }
        let n = rows.len() as f64;
        let mean = |f: &dyn Fn(&ReportRow) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / n;
        Aggregate {
            count: rows.len(),
            mean_n_cstrts: mean(&|r| r.n_cstrts as f64),
            mean_n_u: mean(&|r| r.n_u as f64),
            mean_solve_time: mean(&|r| r.solve_time),
            mean_max_abs_e_y: mean(&|r| r.max_abs_e_y),
            max_max_abs_e_y: rows.iter().map(|r| r.max_abs_e_y).fold(0.0, f64::max),
        }
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.succeeded()).count()
    }
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub layout: FieldLayout,
    /// Traversal plan before smoothing.
    pub raw_plan: PathPolyline,
    /// Stitched plan.
    pub plan: PathPolyline,
    pub report: RunReport,
    pub raster: CoverageRaster,
    pub instances: Vec<InstanceOutcome>,
}

/// Steering implied by a curved path at vertex `i`, clamped to the box.
/// `None` on straight stretches, which are left unpinned.
fn path_steering(path: &PathPolyline, i: usize, params: &VehicleParams) -> Option<f64> {
    let v = path.vertices();
    let k = if i == 0 || i + 1 >= v.len() {
        0.0
    } else {
        circumscribed_curvature(v[i - 1], v[i], v[i + 1]).unwrap_or(0.0)
    };
    (k.abs() > PIN_CURVATURE).then(|| params.steer_for_curvature(k).clamp(params.steer_min, params.steer_max))
}

struct Context<'a> {
    cfg: &'a RunConfig,
    params: VehicleParams,
    layout: &'a FieldLayout,
    path: &'a PathPolyline,
}

impl Context<'_> {
    fn solve(&self, seg: &EdgySegment, reference: ReferencePath) -> Result<SmoothedPath> {
        let mut problem = SmoothingProblem::new(reference, self.params)?;
        problem.pinned_start = path_steering(self.path, seg.i0, &self.params);
        problem.pinned_end = path_steering(self.path, seg.i1, &self.params);
        solve_smoothing(&problem)
    }

    fn dubins_reference(&self, seg: &EdgySegment, r: f64) -> Result<ReferencePath> {
        let mut reference = build_dubins_reference(seg, self.path, r, default_extension(r), self.cfg.ds_m)?;
        reference.weight_index = compute_weight_index(&reference, &self.layout.headland, true, 0.5 * self.cfg.ds_m);
        Ok(reference)
    }

    fn run(&self, seg: &EdgySegment) -> InstanceOutcome {
        let mut out = InstanceOutcome {
            segment: *seg,
            reference: None,
            r_dubins: None,
            fallback: false,
            result: Err(String::new()),
        };
        if seg.kind == SegmentKind::HeadlandCorner {
            let mut opts = Pwa5Options::new(self.cfg.operating_width_m, self.cfg.ds_m);
            opts.corner_cut_iterations = self.cfg.corner_cut_iterations;
            match build_pwa5_reference(seg, self.path, &self.layout.contour, &self.params, &opts) {
                Ok(reference) => {
                    out.reference = Some(reference.clone());
                    out.result = self.solve(seg, reference).map_err(|e| e.to_string());
                    return out;
                }
                Err(Error::FallbackDubinsCorner(_)) => out.fallback = true,
                Err(e) => {
                    out.result = Err(e.to_string());
                    return out;
                }
            }
        }
        let r0 = self.cfg.r_dubins();
        for r in [r0, r0 * RADIUS_RETRY_FACTOR] {
            out.r_dubins = Some(r);
            let attempt = self.dubins_reference(seg, r).and_then(|reference| {
                out.reference = Some(reference.clone());
                self.solve(seg, reference)
            });
            match attempt {
                Ok(sp) => {
                    out.result = Ok(sp);
                    return out;
                }
                Err(e) => out.result = Err(e.to_string()),
            }
        }
        out
    }
}

fn row(index: usize, o: &InstanceOutcome, r0: f64) -> ReportRow {
    let problem = o.problem();
    match &o.result {
        Ok(sp) => {
            let d = &sp.diagnostics;
            let status = if o.fallback {
                "fallback"
            } else if o.r_dubins.is_some_and(|r| r > r0) {
                "retry"
            } else {
                "ok"
            };
            ReportRow {
                index,
                kind: o.segment.kind,
                problem,
                status: status.into(),
                n: sp.steering.len(),
                n_u: d.n_u,
                n_cstrts: d.n_cstrts,
                solve_time: d.total_solve_time(),
                max_abs_e_y: d.max_abs_e_y,
                path_length: d.path_length,
                r_dubins: o.r_dubins,
            }
        }
        Err(msg) => ReportRow {
            index,
            kind: o.segment.kind,
            problem,
            status: msg.clone(),
            n: 0,
            n_u: 0,
            n_cstrts: 0,
            solve_time: 0.0,
            max_abs_e_y: 0.0,
            path_length: 0.0,
            r_dubins: o.r_dubins,
        },
    }
}

/// Edgy segments of `path` under the configured thresholds.
pub fn detect_instances(path: &PathPolyline, cfg: &RunConfig) -> Result<Vec<EdgySegment>> {
    let params = cfg.vehicle_params()?;
    let mut opts = DetectOptions::new(&params, cfg.ds_m, cfg.operating_width_m, default_extension(cfg.r_dubins()));
    opts.turn_threshold = cfg.turn_threshold();
    Ok(detect_edgy_segments(path, 0, &opts))
}

/// Smooths one segment of `path` without stitching it.
pub fn smooth_instance(
    path: &PathPolyline,
    layout: &FieldLayout,
    cfg: &RunConfig,
    segment: &EdgySegment,
) -> Result<InstanceOutcome> {
    let params = cfg.vehicle_params()?;
    let ctx = Context { cfg, params, layout, path };
    Ok(ctx.run(segment))
}

/// Detects and smooths every instance of `path` and stitches the results.
/// Failed instances keep the original vertices and are reported.
pub fn smooth_path(
    path: &PathPolyline,
    layout: &FieldLayout,
    cfg: &RunConfig,
) -> Result<(PathPolyline, RunReport, Vec<InstanceOutcome>)> {
    let params = cfg.vehicle_params()?;
    let r0 = cfg.r_dubins();
    let segments = detect_instances(path, cfg)?;
    let ctx = Context { cfg, params, layout, path };
    let mut instances: Vec<InstanceOutcome> = segments.iter().map(|s| ctx.run(s)).collect();
    let mut plan = path.clone();
    for o in instances.iter_mut().rev() {
        if let Ok(sp) = &o.result {
            match stitch_replace(&plan, &o.segment, &sp.polyline) {
                Ok(p) => plan = p,
                Err(e) => o.result = Err(e.to_string()),
            }
        }
    }
    let report = RunReport {
        rows: instances.iter().enumerate().map(|(i, o)| row(i, o, r0)).collect(),
    };
    Ok((plan, report, instances))
}

/// Unsmoothed traversal plan of a field.
pub fn plan_field(layout: &FieldLayout, cfg: &RunConfig) -> Result<PathPolyline> {
    cfg.validate()?;
    let params = cfg.vehicle_params()?;
    let plan_opts = PlanOptions {
        spacing: cfg.ds_m,
        lead: PLAN_LEAD,
        tail: PLAN_TAIL,
        corner_turn: cfg.theta_edge_deg.to_radians().max(params.max_steer_step(cfg.ds_m)),
    };
    traversal_plan(layout, &plan_opts)
}

/// Plans, smooths and rasterises one field.
pub fn run_pipeline(layout: &FieldLayout, cfg: &RunConfig) -> Result<PipelineOutput> {
    let raw_plan = plan_field(layout, cfg)?;
    let (plan, report, instances) = smooth_path(&raw_plan, layout, cfg)?;
    let bounds = Bounds::of_points(&layout.contour)
        .ok_or_else(|| Error::Input("empty contour".into()))?
        .expanded(cfg.operating_width_m);
    let raster = rasterize_swath(&plan, cfg.operating_width_m, cfg.raster_cell_m, bounds)?;
    Ok(PipelineOutput {
        layout: layout.clone(),
        raw_plan,
        plan,
        report,
        raster,
        instances,
    })
}

/// Transition statistics at one Dubins radius.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub r_dubins: f64,
    pub transitions: Aggregate,
    pub failures: usize,
}

/// Smooths the field plan once per Dubins radius and aggregates the lane
/// transitions, as in a radius study. No raster is computed.
pub fn sweep_radius(layout: &FieldLayout, cfg: &RunConfig, radii: &[f64]) -> Result<Vec<SweepRow>> {
    let raw_plan = plan_field(layout, cfg)?;
    radii
        .iter()
        .map(|&r| {
            let cfg = RunConfig {
                r_dubins_m: Some(r),
                ..cfg.clone()
            };
            cfg.validate()?;
            let (_, report, _) = smooth_path(&raw_plan, layout, &cfg)?;
            Ok(SweepRow {
                r_dubins: r,
                transitions: report.aggregate(2),
                failures: report.failures(),
            })
        })
        .collect()
}
