//! Linear programs over the condensed spatial dynamics, their solution and
//! the splicing of smoothed pieces back into a path.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::geometry::{heading_vector, wrap_angle, Label, PathPolyline, Point2, ReferenceFrame};
use crate::lp::{solve, LinearProgram, LpStatus};
use crate::reference::{uniform_frame, EdgySegment, ReferencePath, SegmentKind, SideConstraint};
use crate::vehicle::{
    linearize_and_discretize, linearize_clamped, rollout_spatial, step_time, linearize_along_trajectory, LtvSpatialSystem, SpatialState, TimeState, VehicleParams,
};

/// Penalty on the side-constraint slack.
pub const SLACK_WEIGHT: f64 = 1e16;
/// Surrogate weight on the headland side of a transition.
pub const HEADLAND_WEIGHT: f64 = 100.0;
/// Largest endpoint offset accepted when splicing.
pub const STITCH_TOLERANCE: f64 = 0.5;

/// One smoothing instance: a reference, its linear model and the boundary data.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingProblem {
    pub reference: ReferencePath,
    /// Frame the LP is posed in. Equal to the reference frame for transitions;
    /// for corners a driven path near it, with the reference entering
    /// through `e_y_ref`.
    pub frame: ReferenceFrame,
    pub system: LtvSpatialSystem,
    pub params: VehicleParams,
    pub z0: SpatialState,
    /// Desired lateral offset per sample, `N + 1` entries.
    pub e_y_ref: Vec<f64>,
    pub pinned_start: Option<f64>,
    pub pinned_end: Option<f64>,
    /// Largest steering change from the nominal steering of each interval.
    /// Keeps sequential corner solves where the linearisation holds.
    pub trust: Option<f64>,
}

impl SmoothingProblem {
    /// Linearises and discretises the instance.
    ///
    /// Transition references are drivable and serve as the frame directly.
    /// Corner references are far sharper than the vehicle; offsets around
    /// their tip are ill-conditioned, so the LP is posed over the path a
    /// rate-limited tracker drives along the reference, and the reference
    /// becomes a per-sample offset.
    pub fn new(reference: ReferencePath, params: VehicleParams) -> Result<Self> {
        params.validate()?;
        if is_problem1(&reference) {
            let frame = tracked_frame(&reference.frame, &params, 0.0)?;
            return Self::over_frame(reference, frame, params);
        }
        let system = linearize_and_discretize(&reference.frame, &params)?;
        let n = reference.frame.len();
        Ok(Self {
            frame: reference.frame.clone(),
            reference,
            system,
            params,
            z0: SpatialState::ZERO,
            e_y_ref: vec![0.0; n],
            pinned_start: None,
            pinned_end: None,
            trust: None,
        })
    }

    /// Poses a corner instance over `frame`, which must start where the
    /// reference starts.
    fn over_frame(reference: ReferencePath, frame: ReferenceFrame, params: VehicleParams) -> Result<Self> {
        let e_y_ref = offsets_along_normals(&reference.frame, &frame);
        let start = reference.frame.samples()[0];
        let z0 = SpatialState::new(wrap_angle(start.heading - frame.samples()[0].heading), 0.0);
        Ok(Self {
            system: linearize_clamped(&frame, &params),
            frame,
            reference,
            params,
            z0,
            e_y_ref,
            pinned_start: None,
            pinned_end: None,
            trust: None,
        })
    }

    /// Number of intervals N.
    pub fn intervals(&self) -> usize {
        self.system.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.intervals();
        if n == 0 {
            return Err(Error::InvalidParameter("smoothing problem has no intervals".into()));
        }
        if self.frame.intervals() != n || self.e_y_ref.len() != n + 1 {
            return Err(Error::InvalidParameter("inconsistent sample counts".into()));
        }
        if self.frame.interval_curvature(0) * self.z0.e_y >= 1.0 {
            return Err(Error::ModelSingularity { index: 0 });
        }
        for pin in [self.pinned_start, self.pinned_end].into_iter().flatten() {
            if pin < self.params.steer_min - 1e-12 || pin > self.params.steer_max + 1e-12 {
                return Err(Error::InvalidParameter(format!("pinned steering {pin} outside the steering box")));
            }
        }
        Ok(())
    }
}

fn is_problem1(reference: &ReferencePath) -> bool {
    reference.kind == SegmentKind::HeadlandCorner && reference.side == SideConstraint::Upper
}

/// Lookahead of the tracker that seeds corner frames, in minimum turning radii.
const LOOKAHEAD_RADII: f64 = 1.0;

/// Integration steps per frame interval when tracing a driven path.
const TRACE_SUBSTEPS: usize = 4;

/// Drives the vehicle along `reference` with a pure-pursuit tracker whose
/// steering respects the box and rate limits, so the seed frame of a corner
/// is drivable and the first linearisation is accurate.
fn tracked_frame(reference: &ReferenceFrame, params: &VehicleParams, delta0: f64) -> Result<ReferenceFrame> {
    let spacing = reference.spacing();
    let lookahead = (LOOKAHEAD_RADII * params.min_turning_radius()).max(2.0 * spacing);
    let mut pts = reference.positions();
    let last = reference.samples()[reference.len() - 1];
    let far = last.position + heading_vector(last.heading) * (2.0 * lookahead + reference.length());
    pts.push(far);
    let path = PathPolyline::with_label(pts, Label::Headland)?;
    let end_s = reference.length();
    let h = spacing / TRACE_SUBSTEPS as f64;
    let start = reference.samples()[0];
    let mut state = TimeState { x: start.position.x, y: start.position.y, psi: start.heading, delta: delta0 };
    let mut delta = delta0.clamp(params.steer_min, params.steer_max);
    let mut trace = vec![state.position()];
    let mut s_proj = 0.0;
    let max_steps = (4.0 * end_s / h).ceil() as usize + 1;
    for _ in 0..max_steps {
        s_proj = project_forward(&path, state.position(), s_proj, 2.0 * lookahead);
        if s_proj >= end_s {
            break;
        }
        let (target, _) = path.point_at(s_proj + lookahead);
        let to = target - state.position();
        let alpha = wrap_angle(to.angle() - state.psi);
        let wanted = (2.0 * params.wheelbase * alpha.sin() / to.norm().max(1e-9)).atan();
        delta = wanted
            .clamp(delta + params.min_steer_step(h), delta + params.max_steer_step(h))
            .clamp(params.steer_min, params.steer_max);
        state = step_time(&state, 1.0, delta, h, params);
        trace.push(state.position());
    }
    frame_from_trace(trace, last.position, 0.5 * reference.length(), state.psi, spacing)
}

/// Arclength of the closest point of `path` to `q` within `window` ahead of `from`.
fn project_forward(path: &PathPolyline, q: Point2, from: f64, window: f64) -> f64 {
    let v = path.vertices();
    let s = path.cumulative_s();
    let k0 = path.segment_at(from);
    let mut best = (f64::INFINITY, from);
    for k in k0..v.len() - 1 {
        if s[k] > from + window {
            break;
        }
        let d = v[k + 1] - v[k];
        let t = ((q - v[k]).dot(d) / d.dot(d).max(1e-300)).clamp(0.0, 1.0);
        let dist = q.dist(v[k] + d * t);
        let at = (s[k] + t * (s[k + 1] - s[k])).max(from);
        if dist < best.0 {
            best = (dist, at);
        }
    }
    best.1
}

/// Extends a driven trace straight by `tail`, cuts it where it passes closest
/// to `end` and resamples it into a frame.
fn frame_from_trace(mut trace: Vec<Point2>, end: Point2, tail: f64, heading: f64, spacing: f64) -> Result<ReferenceFrame> {
    let dir = heading_vector(heading);
    let last = trace[trace.len() - 1];
    let steps = (tail / spacing).ceil().max(1.0) as usize;
    trace.extend((1..=steps).map(|k| last + dir * (k as f64 * tail / steps as f64)));
    let (k, cut) = trace
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            let d = w[1] - w[0];
            let t = ((end - w[0]).dot(d) / d.dot(d).max(1e-300)).clamp(0.0, 1.0);
            (k, w[0].lerp(w[1], t))
        })
        .min_by(|a, b| a.1.dist(end).total_cmp(&b.1.dist(end)))
        .ok_or_else(|| Error::InvalidParameter("empty trace".into()))?;
    let mut points = trace[..=k].to_vec();
    if points[points.len() - 1].dist(cut) > 1e-9 {
        points.push(cut);
    }
    uniform_frame(points, spacing)
}

/// Signed distance from each sample of `frame` along its normal to the
/// polyline of `target`; the nearest crossing wins, and samples whose normal
/// misses the polyline fall back to the projection onto `target`.
fn offsets_along_normals(target: &ReferenceFrame, frame: &ReferenceFrame) -> Vec<f64> {
    let pts = target.positions();
    frame
        .samples()
        .iter()
        .map(|q| {
            let n = heading_vector(q.heading).perp();
            let mut best: Option<f64> = None;
            for w in pts.windows(2) {
                let d = w[1] - w[0];
                let den = n.cross(d);
                if den.abs() <= 1e-12 {
                    continue;
                }
                let rel = w[0] - q.position;
                let t = rel.cross(d) / den;
                let u = rel.cross(n) / den;
                if (-1e-12..=1.0 + 1e-12).contains(&u) && best.is_none_or(|b| t.abs() < b.abs()) {
                    best = Some(t);
                }
            }
            best.unwrap_or_else(|| {
                target
                    .project_to_frame(q.position)
                    .map(|(_, e)| -e)
                    .unwrap_or(0.0)
            })
        })
        .collect()
}

/// `e_y,j = offset[j] + sum_k gain[j][k] * delta_k` for `k < j`.
struct Condensed {
    offset: Vec<f64>,
    gain: Vec<Vec<f64>>,
}

fn condense(system: &LtvSpatialSystem, z0: SpatialState) -> Condensed {
    let n = system.len();
    // Full two-component state maps, kept to propagate e_psi.
    let mut g = vec![[z0.e_psi, z0.e_y]];
    let mut rows: Vec<Vec<[f64; 2]>> = vec![Vec::new()];
    for (j, iv) in system.intervals.iter().enumerate() {
        let a = iv.a;
        let prev = g[j];
        let next = [
            a[0][0] * prev[0] + a[0][1] * prev[1] - iv.b[0] * iv.steer_nominal + iv.d[0],
            a[1][0] * prev[0] + a[1][1] * prev[1] - iv.b[1] * iv.steer_nominal + iv.d[1],
        ];
        g.push(next);
        let mut row: Vec<[f64; 2]> = rows[j]
            .iter()
            .map(|c| [a[0][0] * c[0] + a[0][1] * c[1], a[1][0] * c[0] + a[1][1] * c[1]])
            .collect();
        row.push(iv.b);
        rows.push(row);
    }
    debug_assert_eq!(rows.len(), n + 1);
    Condensed {
        offset: g.iter().map(|v| v[1]).collect(),
        gain: rows.into_iter().map(|r| r.into_iter().map(|c| c[1]).collect()).collect(),
    }
}

fn steering_bounds(lp: &mut LinearProgram, p: &SmoothingProblem) {
    let n = p.intervals();
    for k in 0..n {
        let (mut lo, mut hi) = (p.params.steer_min, p.params.steer_max);
        if let Some(r) = p.trust {
            let nominal = p.system.intervals[k].steer_nominal;
            lo = lo.max(nominal - r);
            hi = hi.min(nominal + r).max(lo);
        }
        lp.set_bounds(k, lo, hi);
    }
    if let Some(d) = p.pinned_start {
        lp.set_bounds(0, d, d);
    }
    if let Some(d) = p.pinned_end {
        lp.set_bounds(n - 1, d, d);
    }
}

fn rate_rows(lp: &mut LinearProgram, p: &SmoothingProblem) {
    for k in 0..p.intervals().saturating_sub(1) {
        let ds = p.system.intervals[k].length;
        lp.add_row(&[(k + 1, 1.0), (k, -1.0)], p.params.max_steer_step(ds));
        lp.add_row(&[(k + 1, -1.0), (k, 1.0)], -p.params.min_steer_step(ds));
    }
}

/// Coefficients of `scale * e_y,j` over the steering variables.
fn e_y_row(c: &Condensed, j: usize, scale: f64) -> Vec<(usize, f64)> {
    c.gain[j].iter().enumerate().map(|(k, &v)| (k, scale * v)).collect()
}

/// Corner LP: minimise the summed one-sided offset towards the field interior,
/// with the interior side closed by a heavily penalised slack.
///
/// Variables `[delta_0..delta_{N-1}, t_1..t_N, sigma]`; `4N - 2` rows.
pub fn build_lp_problem1(p: &SmoothingProblem) -> Result<LinearProgram> {
    p.validate()?;
    if p.reference.kind != SegmentKind::HeadlandCorner || p.reference.side != SideConstraint::Upper {
        return Err(Error::InvalidParameter("problem 1 needs a corner reference with a side constraint".into()));
    }
    let n = p.intervals();
    let c = condense(&p.system, p.z0);
    let s = p.reference.interior_sign;
    let sigma = 2 * n;
    let mut lp = LinearProgram::new(2 * n + 1);
    steering_bounds(&mut lp, p);
    for j in 1..=n {
        let t = n + j - 1;
        lp.set_cost(t, 1.0);
        lp.set_bounds(t, 0.0, f64::INFINITY);
    }
    lp.set_cost(sigma, SLACK_WEIGHT);
    lp.set_bounds(sigma, 0.0, f64::INFINITY);
    for j in 1..=n {
        let t = n + j - 1;
        let gap = c.offset[j] - p.e_y_ref[j];
        // t_j >= s (ref - e_y)
        let mut row = e_y_row(&c, j, -s);
        row.push((t, -1.0));
        lp.add_row(&row, s * gap);
        // s (e_y - ref) <= sigma
        let mut row = e_y_row(&c, j, s);
        row.push((sigma, -1.0));
        lp.add_row(&row, -s * gap);
    }
    rate_rows(&mut lp, p);
    Ok(lp)
}

/// Surrogate weights `c_1..c_N` of a transition.
pub fn transition_weights(kind: SegmentKind, weight_index: Option<usize>, n: usize) -> Vec<f64> {
    (1..=n)
        .map(|j| match (kind, weight_index) {
            (SegmentKind::HeadlandToLane, Some(i)) if j <= i => HEADLAND_WEIGHT,
            (SegmentKind::LaneToHeadland, Some(i)) if j >= i => HEADLAND_WEIGHT,
            _ => 1.0,
        })
        .collect()
}

/// Transition LP: minimise the weighted absolute offset from the reference.
///
/// Variables `[delta_0..delta_{N-1}, t_1..t_N]`; `4N - 2` rows.
pub fn build_lp_problem2(p: &SmoothingProblem) -> Result<LinearProgram> {
    p.validate()?;
    let n = p.intervals();
    let c = condense(&p.system, p.z0);
    let weights = transition_weights(p.reference.kind, p.reference.weight_index, n);
    let mut lp = LinearProgram::new(2 * n);
    steering_bounds(&mut lp, p);
    for j in 1..=n {
        let t = n + j - 1;
        lp.set_cost(t, weights[j - 1]);
        lp.set_bounds(t, 0.0, f64::INFINITY);
        let gap = c.offset[j] - p.e_y_ref[j];
        let mut row = e_y_row(&c, j, 1.0);
        row.push((t, -1.0));
        lp.add_row(&row, -gap);
        let mut row = e_y_row(&c, j, -1.0);
        row.push((t, -1.0));
        lp.add_row(&row, gap);
    }
    rate_rows(&mut lp, p);
    Ok(lp)
}

/// Per-instance figures reported alongside a smoothed path.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingDiagnostics {
    /// Inequality rows of the last LP (variable bounds excluded).
    pub n_cstrts: usize,
    /// Variables of the last LP.
    pub n_u: usize,
    /// Wall-clock time of each LP solve in seconds.
    pub solve_times: Vec<f64>,
    /// Largest distance of the smoothed samples from the original reference.
    pub max_abs_e_y: f64,
    /// Length of the smoothed polyline.
    pub path_length: f64,
    pub status: LpStatus,
    pub lp_iterations: usize,
    pub slack: f64,
    /// Largest gap between the linear-model and nonlinear offsets.
    pub rollout_deviation: f64,
    /// Largest second difference of the offsets.
    pub jaggedness: f64,
    pub refinements: usize,
}

impl SmoothingDiagnostics {
    pub fn total_solve_time(&self) -> f64 {
        self.solve_times.iter().sum()
    }
}

/// Result of one smoothing instance, expressed over `frame`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedPath {
    pub polyline: PathPolyline,
    /// Steering per interval.
    pub steering: Vec<f64>,
    pub e_y: Vec<f64>,
    pub e_psi: Vec<f64>,
    /// Frame of the last solve (the refined frame for corners).
    pub frame: ReferenceFrame,
    pub kind: SegmentKind,
    pub diagnostics: SmoothingDiagnostics,
}

struct Solved {
    steering: Vec<f64>,
    states: Vec<SpatialState>,
    status: LpStatus,
    iterations: usize,
    slack: f64,
    rows: usize,
    vars: usize,
    seconds: f64,
}

fn solve_once(p: &SmoothingProblem) -> Result<Solved> {
    let problem1 = is_problem1(&p.reference);
    let lp = if problem1 {
        build_lp_problem1(p)?
    } else {
        build_lp_problem2(p)?
    };
    let n = p.intervals();
    let started = Instant::now();
    let sol = solve(&lp)?;
    let seconds = started.elapsed().as_secs_f64();
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::LpFailed("infeasible")),
        LpStatus::Unbounded => return Err(Error::LpFailed("unbounded")),
    }
    let steering: Vec<f64> = sol.x[..n]
        .iter()
        .map(|d| d.clamp(p.params.steer_min, p.params.steer_max))
        .collect();
    let states = p.system.simulate(p.z0, &steering);
    Ok(Solved {
        steering,
        states,
        status: sol.status,
        iterations: sol.iterations,
        slack: if problem1 { sol.x[2 * n] } else { 0.0 },
        rows: lp.num_rows(),
        vars: lp.num_vars(),
        seconds,
    })
}

fn to_global(frame: &ReferenceFrame, states: &[SpatialState]) -> Result<Vec<Point2>> {
    frame
        .samples()
        .iter()
        .zip(states)
        .map(|(q, z)| frame.frame_to_global(q.s, z.e_y, z.e_psi).map(|(p, _)| p))
        .collect()
}

/// Cap on sequential solves after the first for corner instances.
pub const MAX_CORNER_ITERATIONS: usize = 40;

/// Initial trust radius on the steering of corner solves (rad).
pub const TRUST_INITIAL: f64 = 0.1;
/// Smallest trust radius (rad).
pub const TRUST_MIN: f64 = 0.005;
/// Largest trust radius (rad).
pub const TRUST_MAX: f64 = 1.0;
/// Linear-versus-rollout gap above which a step is rejected (m).
pub const TRUST_GAP: f64 = 0.3;

/// Reframing stops once the LP stays this close to its frame.
pub const REFRAME_TOLERANCE: f64 = 0.5;

/// Re-linearisation stops once the linear prediction and the nonlinear
/// rollout agree to within this many metres.
pub const REFINE_TOLERANCE: f64 = 0.02;

/// Solves under the trust region, widening it while it makes the LP infeasible.
fn solve_trusted(p: &mut SmoothingProblem, times: &mut Vec<f64>) -> Result<Solved> {
    loop {
        match solve_once(p) {
            Err(Error::LpFailed("infeasible")) if p.trust.is_some() => {
                let r = 2.0 * p.trust.unwrap_or(TRUST_MAX);
                p.trust = (r < TRUST_MAX).then_some(r);
            }
            Ok(s) => {
                times.push(s.seconds);
                return Ok(s);
            }
            Err(e) => return Err(e),
        }
    }
}

/// Whether some steering value sits on its trust bound.
fn trust_active(p: &SmoothingProblem, steering: &[f64]) -> bool {
    let Some(r) = p.trust else { return false };
    steering.iter().zip(&p.system.intervals).any(|(d, iv)| {
        let dev = (d - iv.steer_nominal).abs();
        let boxed = *d <= p.params.steer_min + 1e-9 || *d >= p.params.steer_max - 1e-9;
        dev >= r - 1e-9 && !boxed
    })
}

/// Largest lateral gap between the linear prediction and the nonlinear
/// rollout of `steering` over the frame of `p`.
fn rollout_gap(p: &SmoothingProblem, steering: &[f64]) -> f64 {
    let linear = p.system.simulate(p.z0, steering);
    match rollout_spatial(&p.frame, p.z0, steering, &p.params) {
        Ok(nl) => nl.iter().zip(&linear).map(|(a, b)| (a.e_y - b.e_y).abs()).fold(0.0, f64::max),
        Err(_) => f64::INFINITY,
    }
}

/// Drives `steering` from the start of the reference, continues straight
/// and cuts the trace where it passes closest to the reference end.
fn driven_frame(p: &SmoothingProblem, steering: &[f64]) -> Result<ReferenceFrame> {
    let start = p.reference.frame.samples()[0];
    let end = p.reference.frame.samples()[p.reference.frame.len() - 1].position;
    let stretch: Vec<f64> = match rollout_spatial(&p.frame, p.z0, steering, &p.params) {
        Ok(nl) => (0..p.frame.len())
            .map(|j| {
                let k = p.frame.interval_curvature(j.min(p.frame.intervals() - 1));
                ((1.0 - k * nl[j].e_y) / nl[j].e_psi.cos()).clamp(0.2, 5.0)
            })
            .collect(),
        Err(_) => vec![1.0; p.frame.len()],
    };
    let mut state = TimeState { x: start.position.x, y: start.position.y, psi: start.heading, delta: 0.0 };
    let mut trace = vec![state.position()];
    for (j, &delta) in steering.iter().enumerate() {
        let len = p.frame.interval_length(j) * 0.5 * (stretch[j] + stretch[j + 1]);
        state = step_time(&state, 1.0, delta, len, &p.params);
        trace.push(state.position());
    }
    frame_from_trace(trace, end, 0.5 * p.frame.length(), state.psi, p.frame.spacing())
}

/// Largest `|e_y,j+1 - 2 e_y,j + e_y,j-1|`.
pub fn max_second_difference(e_y: &[f64]) -> f64 {
    e_y.windows(3)
        .map(|w| (w[2] - 2.0 * w[1] + w[0]).abs())
        .fold(0.0, f64::max)
}

/// Solves one instance. Transitions are solved once. Corners are solved,
/// re-framed on the path the vehicle actually drives until the LP stays near
/// its frame, then re-solved about the nonlinear trajectory until the linear
/// prediction matches the rollout.
pub fn solve_smoothing(p: &SmoothingProblem) -> Result<SmoothedPath> {
    let corner = is_problem1(&p.reference);
    let mut solve_times = Vec::new();

    let (problem, last, refinements) = if corner {
        let mut problem = p.clone();
        problem.trust = Some(TRUST_INITIAL);
        let mut last = solve_trusted(&mut problem, &mut solve_times)?;
        let mut refinements = 0;
        for _ in 0..MAX_CORNER_ITERATIONS {
            let gap = rollout_gap(&problem, &last.steering);
            let radius = problem.trust.unwrap_or(TRUST_MAX);
            if gap > TRUST_GAP && radius > TRUST_MIN {
                // The linear model misled the step: shrink and re-solve.
                problem.trust = Some(0.5 * radius);
                last = solve_trusted(&mut problem, &mut solve_times)?;
                refinements += 1;
                continue;
            }
            let ey = last.states.iter().fold(0.0f64, |a, z| a.max(z.e_y.abs()));
            let bound_active = trust_active(&problem, &last.steering);
            if ey <= REFRAME_TOLERANCE && gap <= REFINE_TOLERANCE && !bound_active {
                break;
            }
            let mut next = if ey > REFRAME_TOLERANCE {
                // Move the frame onto the path the vehicle drives.
                let frame = driven_frame(&problem, &last.steering)?;
                let mut next = SmoothingProblem::over_frame(p.reference.clone(), frame, p.params)?;
                next.pinned_start = p.pinned_start;
                next.pinned_end = p.pinned_end;
                next
            } else {
                // Re-linearise about the nonlinear trajectory on the same frame.
                let nl = rollout_spatial(&problem.frame, problem.z0, &last.steering, &problem.params)?;
                let mut next = problem.clone();
                next.system = linearize_along_trajectory(&problem.frame, &nl, &last.steering, &problem.params)?;
                next
            };
            next.trust = Some(if gap <= 0.25 * TRUST_GAP { (2.0 * radius).min(TRUST_MAX) } else { radius });
            last = solve_trusted(&mut next, &mut solve_times)?;
            problem = next;
            refinements += 1;
        }
        (problem, last, refinements)
    } else {
        let first = solve_once(p)?;
        solve_times.push(first.seconds);
        (p.clone(), first, 0)
    };

    let frame = problem.frame.clone();
    let points = to_global(&frame, &last.states)?;
    let label = if corner { Label::Headland } else { Label::Transition };
    let polyline = PathPolyline::with_label(points, label)?;
    let e_y: Vec<f64> = last.states.iter().map(|z| z.e_y).collect();
    let e_psi: Vec<f64> = last.states.iter().map(|z| z.e_psi).collect();

    let max_abs_e_y = if corner {
        polyline
            .vertices()
            .iter()
            .map(|&q| p.reference.frame.distance_to_centerline(q))
            .fold(0.0, f64::max)
    } else {
        e_y.iter()
            .zip(&problem.e_y_ref)
            .map(|(a, r)| (a - r).abs())
            .fold(0.0, f64::max)
    };
    let rollout_deviation = match rollout_spatial(&frame, problem.z0, &last.steering, &problem.params) {
        Ok(nl) => nl
            .iter()
            .zip(&e_y)
            .map(|(z, e)| (z.e_y - e).abs())
            .fold(0.0, f64::max),
        Err(_) => f64::INFINITY,
    };
    let diagnostics = SmoothingDiagnostics {
        n_cstrts: last.rows,
        n_u: last.vars,
        solve_times,
        max_abs_e_y,
        path_length: polyline.length(),
        status: last.status,
        lp_iterations: last.iterations,
        slack: last.slack,
        rollout_deviation,
        jaggedness: max_second_difference(&e_y),
        refinements,
    };
    Ok(SmoothedPath {
        polyline,
        steering: last.steering,
        e_y,
        e_psi,
        frame,
        kind: p.reference.kind,
        diagnostics,
    })
}

/// Splices `smoothed` over the vertex range of `segment`.
///
/// Replaced vertices take the smoothed labels: headland for corners,
/// transition otherwise.
pub fn stitch_replace(path: &PathPolyline, segment: &EdgySegment, smoothed: &PathPolyline) -> Result<PathPolyline> {
    let (i0, i1) = (segment.i0, segment.i1);
    if i0 >= i1 || i1 >= path.len() {
        return Err(Error::InvalidParameter(format!("segment [{i0}, {i1}] outside the path")));
    }
    let v = path.vertices();
    let gap = smoothed.first().dist(v[i0]).max(smoothed.last().dist(v[i1]));
    if gap > STITCH_TOLERANCE {
        return Err(Error::StitchMismatch { gap });
    }
    let labels = path.labels();
    let mut out_v: Vec<Point2> = Vec::with_capacity(path.len() - (i1 - i0 + 1) + smoothed.len());
    let mut out_l: Vec<Label> = Vec::with_capacity(out_v.capacity());
    out_v.extend_from_slice(&v[..i0]);
    out_l.extend_from_slice(&labels[..i0]);
    out_v.extend_from_slice(smoothed.vertices());
    out_l.extend_from_slice(smoothed.labels());
    out_v.extend_from_slice(&v[i1 + 1..]);
    out_l.extend_from_slice(&labels[i1 + 1..]);
    PathPolyline::new(out_v, out_l)
}
