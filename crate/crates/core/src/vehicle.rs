//! Kinematic bicycle model in the time and spatial domains.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{Point2, ReferenceFrame};

/// Vehicle limits and the reference speed used to map steering rates onto arclength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleParams {
    /// Wheelbase in m.
    pub wheelbase: f64,
    /// Upper steering bound in rad.
    pub steer_max: f64,
    /// Lower steering bound in rad.
    pub steer_min: f64,
    /// Upper steering rate in rad/s.
    pub steer_rate_max: f64,
    /// Lower steering rate in rad/s (negative).
    pub steer_rate_min: f64,
    /// Reference speed in m/s.
    pub speed: f64,
}

impl Default for VehicleParams {
    /// Tractor used throughout the numerical experiments: 3 m wheelbase,
    /// 31 deg steering, 15 deg/s steering rate, 5 km/h.
    fn default() -> Self {
        Self::symmetric(3.0, 31f64.to_radians(), 15f64.to_radians(), 5.0 / 3.6)
            .expect("default parameters are valid")
    }
}

impl VehicleParams {
    /// Symmetric steering and steering-rate limits.
    pub fn symmetric(wheelbase: f64, steer_max: f64, steer_rate_max: f64, speed: f64) -> Result<Self> {
        let p = Self {
            wheelbase,
            steer_max,
            steer_min: -steer_max,
            steer_rate_max,
            steer_rate_min: -steer_rate_max,
            speed,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if !(self.wheelbase > 0.0 && self.wheelbase.is_finite()) {
            return bad("wheelbase must be positive");
        }
        if !(self.steer_max > 0.0 && self.steer_max < PI / 2.0) {
            return bad("steering limit must lie in (0, pi/2)");
        }
        if !(self.steer_min < 0.0 && self.steer_min > -PI / 2.0) {
            return bad("lower steering limit must lie in (-pi/2, 0)");
        }
        if !(self.steer_rate_max > 0.0 && self.steer_rate_min < 0.0) {
            return bad("steering rate limits must straddle zero");
        }
        if !(self.speed > 0.0 && self.speed.is_finite()) {
            return bad("reference speed must be positive");
        }
        Ok(())
    }

    /// Turning radius at full steering lock.
    pub fn min_turning_radius(&self) -> f64 {
        self.wheelbase / self.steer_max.tan()
    }

    /// Largest steering increase over an arclength step `ds`.
    pub fn max_steer_step(&self, ds: f64) -> f64 {
        ds * self.steer_rate_max / self.speed
    }

    /// Most negative steering change over an arclength step `ds`.
    pub fn min_steer_step(&self, ds: f64) -> f64 {
        ds * self.steer_rate_min / self.speed
    }

    /// Steering that tracks a path of curvature `kappa` exactly.
    pub fn steer_for_curvature(&self, kappa: f64) -> f64 {
        (self.wheelbase * kappa).atan()
    }
}

/// Pose and steering angle in the time domain.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TimeState {
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub delta: f64,
}

impl TimeState {
    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

/// Heading error and lateral offset relative to a reference path.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpatialState {
    pub e_psi: f64,
    pub e_y: f64,
}

impl SpatialState {
    pub const ZERO: Self = Self { e_psi: 0.0, e_y: 0.0 };

    pub fn new(e_psi: f64, e_y: f64) -> Self {
        Self { e_psi, e_y }
    }

    fn as_array(self) -> [f64; 2] {
        [self.e_psi, self.e_y]
    }

    fn from_array(a: [f64; 2]) -> Self {
        Self::new(a[0], a[1])
    }
}

/// Time derivative `(x', y', psi')` of the kinematic bicycle.
pub fn time_derivative(state: &TimeState, v: f64, delta: f64, params: &VehicleParams) -> (f64, f64, f64) {
    (
        v * state.psi.cos(),
        v * state.psi.sin(),
        v / params.wheelbase * delta.tan(),
    )
}

/// Arclength derivative `(e_psi', e_y')` of the spatial model.
pub fn spatial_derivative(z: SpatialState, delta: f64, kappa: f64, params: &VehicleParams) -> Result<(f64, f64)> {
    let shrink = 1.0 - kappa * z.e_y;
    if shrink <= 0.0 {
        return Err(Error::ModelSingularity { index: 0 });
    }
    Ok((
        shrink * delta.tan() / (params.wheelbase * z.e_psi.cos()) - kappa,
        shrink * z.e_psi.tan(),
    ))
}

/// Analytic Jacobians of the spatial model with respect to `(e_psi, e_y)` and `delta`.
pub fn spatial_jacobian(z: SpatialState, delta: f64, kappa: f64, params: &VehicleParams) -> ([[f64; 2]; 2], [f64; 2]) {
    let l = params.wheelbase;
    let shrink = 1.0 - kappa * z.e_y;
    let (c, t) = (z.e_psi.cos(), z.e_psi.tan());
    let td = delta.tan();
    let a = [
        [shrink * td * t / (l * c), -kappa * td / (l * c)],
        [shrink / (c * c), -kappa * t],
    ];
    let b = [shrink * (1.0 + td * td) / (l * c), 0.0];
    (a, b)
}

/// One interval of the discretised linear spatial model
/// `z+ = a z + b (delta - steer_nominal) + d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LtvInterval {
    pub a: [[f64; 2]; 2],
    pub b: [f64; 2],
    pub d: [f64; 2],
    pub steer_nominal: f64,
    pub length: f64,
    pub curvature: f64,
}

impl LtvInterval {
    pub fn step(&self, z: SpatialState, delta: f64) -> SpatialState {
        let u = delta - self.steer_nominal;
        SpatialState::new(
            self.a[0][0] * z.e_psi + self.a[0][1] * z.e_y + self.b[0] * u + self.d[0],
            self.a[1][0] * z.e_psi + self.a[1][1] * z.e_y + self.b[1] * u + self.d[1],
        )
    }
}

/// Linearised, discretised spatial dynamics along a reference.
#[derive(Debug, Clone, PartialEq)]
pub struct LtvSpatialSystem {
    pub intervals: Vec<LtvInterval>,
}

impl LtvSpatialSystem {
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Linear-model state sequence for the given steering.
    pub fn simulate(&self, z0: SpatialState, steering: &[f64]) -> Vec<SpatialState> {
        let mut out = Vec::with_capacity(steering.len() + 1);
        out.push(z0);
        for (iv, &delta) in self.intervals.iter().zip(steering) {
            let z = *out.last().unwrap();
            out.push(iv.step(z, delta));
        }
        out
    }
}

/// Exact zero-order hold of `e_psi' = -w2 e_y + u`, `e_y' = e_psi` over `ds`.
///
/// Returns the transition matrix and the integral of its first column, which
/// maps a constant forcing on `e_psi` into the state. `w2` may have any sign.
pub fn zoh_oscillator(w2: f64, ds: f64) -> ([[f64; 2]; 2], [f64; 2]) {
    let x = w2 * ds * ds;
    let (c, s_over, k_over) = if x.abs() < 1e-2 {
        // Series in x: cos, sin(wD)/(wD), (1 - cos wD)/(wD)^2.
        let mut c = 0.0;
        let mut s = 0.0;
        let mut k = 0.0;
        let mut term = 1.0;
        for n in 0..10 {
            let f2n = factorial(2 * n);
            c += term / f2n;
            s += term / (f2n * (2 * n + 1) as f64);
            k += term / (f2n * ((2 * n + 1) * (2 * n + 2)) as f64);
            term *= -x;
        }
        (c, s, k)
    } else if x > 0.0 {
        let w = x.sqrt();
        let half = (0.5 * w).sin();
        (w.cos(), w.sin() / w, 2.0 * half * half / x)
    } else {
        let w = (-x).sqrt();
        let half = (0.5 * w).sinh();
        (w.cosh(), w.sinh() / w, -2.0 * half * half / x)
    };
    let sin_term = ds * s_over;
    let phi = [[c, -w2 * sin_term], [sin_term, c]];
    (phi, [sin_term, ds * ds * k_over])
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Linearises at zero deviation with the steering that follows the reference
/// exactly, and discretises each interval by exact zero-order hold.
pub fn linearize_and_discretize(frame: &ReferenceFrame, params: &VehicleParams) -> Result<LtvSpatialSystem> {
    let intervals = (0..frame.intervals())
        .map(|j| {
            let kappa = frame.interval_curvature(j);
            let steer = params.steer_for_curvature(kappa);
            if steer > params.steer_max + 1e-12 || steer < params.steer_min - 1e-12 {
                return Err(Error::InfeasibleReference { index: j });
            }
            Ok(operating_point_interval(kappa, steer, frame.interval_length(j), params))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LtvSpatialSystem { intervals })
}

/// As [`linearize_and_discretize`], but where the reference is sharper than
/// the steering limit the nominal steering is clamped to the box and the
/// residual curvature enters the affine term.
pub fn linearize_clamped(frame: &ReferenceFrame, params: &VehicleParams) -> LtvSpatialSystem {
    let intervals = (0..frame.intervals())
        .map(|j| {
            let kappa = frame.interval_curvature(j);
            let steer = params
                .steer_for_curvature(kappa)
                .clamp(params.steer_min, params.steer_max);
            operating_point_interval(kappa, steer, frame.interval_length(j), params)
        })
        .collect();
    LtvSpatialSystem { intervals }
}

fn operating_point_interval(kappa: f64, steer: f64, ds: f64, params: &VehicleParams) -> LtvInterval {
    let l = params.wheelbase;
    let t = steer.tan();
    let (a, gamma) = zoh_oscillator(kappa * t / l, ds);
    let gain = (1.0 + t * t) / l;
    let drift = t / l - kappa;
    LtvInterval {
        a,
        b: [gain * gamma[0], gain * gamma[1]],
        d: [drift * gamma[0], drift * gamma[1]],
        steer_nominal: steer,
        length: ds,
        curvature: kappa,
    }
}

/// Linearises the exact one-interval flow about a trajectory `(z_j, delta_j)`.
///
/// The resulting model reproduces the nonlinear rollout exactly at the
/// trajectory and to first order around it.
pub fn linearize_along_trajectory(
    frame: &ReferenceFrame,
    states: &[SpatialState],
    steering: &[f64],
    params: &VehicleParams,
) -> Result<LtvSpatialSystem> {
    let mut intervals = Vec::with_capacity(steering.len());
    for (j, &delta) in steering.iter().enumerate() {
        let kappa = frame.interval_curvature(j);
        let ds = frame.interval_length(j);
        let z = states[j];
        let flow = |z: [f64; 2], delta: f64| {
            integrate_interval(SpatialState::from_array(z), delta, kappa, ds, params)
                .map(SpatialState::as_array)
                .map_err(|_| Error::ModelSingularity { index: j })
        };
        let base = z.as_array();
        let f0 = flow(base, delta)?;
        let h = 1e-6;
        let mut a = [[0.0; 2]; 2];
        for col in 0..2 {
            let mut plus = base;
            let mut minus = base;
            plus[col] += h;
            minus[col] -= h;
            let (fp, fm) = (flow(plus, delta)?, flow(minus, delta)?);
            for row in 0..2 {
                a[row][col] = (fp[row] - fm[row]) / (2.0 * h);
            }
        }
        let (fp, fm) = (flow(base, delta + h)?, flow(base, delta - h)?);
        let b = [(fp[0] - fm[0]) / (2.0 * h), (fp[1] - fm[1]) / (2.0 * h)];
        let d = [
            f0[0] - a[0][0] * base[0] - a[0][1] * base[1],
            f0[1] - a[1][0] * base[0] - a[1][1] * base[1],
        ];
        intervals.push(LtvInterval {
            a,
            b,
            d,
            steer_nominal: delta,
            length: ds,
            curvature: kappa,
        });
    }
    Ok(LtvSpatialSystem { intervals })
}

const SUBSTEPS: usize = 10;

fn integrate_interval(z: SpatialState, delta: f64, kappa: f64, ds: f64, params: &VehicleParams) -> Result<SpatialState> {
    let h = ds / SUBSTEPS as f64;
    let f = |z: [f64; 2]| spatial_derivative(SpatialState::from_array(z), delta, kappa, params).map(|(a, b)| [a, b]);
    let mut y = z.as_array();
    for _ in 0..SUBSTEPS {
        let k1 = f(y)?;
        let k2 = f([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]])?;
        let k3 = f([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]])?;
        let k4 = f([y[0] + h * k3[0], y[1] + h * k3[1]])?;
        for i in 0..2 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    Ok(SpatialState::from_array(y))
}

/// Integrates the nonlinear spatial model with piecewise-constant steering
/// (fourth-order Runge-Kutta, ten substeps per interval).
pub fn rollout_spatial(
    frame: &ReferenceFrame,
    z0: SpatialState,
    steering: &[f64],
    params: &VehicleParams,
) -> Result<Vec<SpatialState>> {
    if steering.len() != frame.intervals() {
        return Err(Error::InvalidParameter(format!(
            "expected {} steering values, got {}",
            frame.intervals(),
            steering.len()
        )));
    }
    let mut out = Vec::with_capacity(steering.len() + 1);
    out.push(z0);
    let mut z = z0;
    for (j, &delta) in steering.iter().enumerate() {
        z = integrate_interval(z, delta, frame.interval_curvature(j), frame.interval_length(j), params)
            .map_err(|_| Error::ModelSingularity { index: j })?;
        out.push(z);
    }
    Ok(out)
}

/// Steering-rate bounds per interval implied by the state-dependent mapping
/// of time rates onto arclength, evaluated along a solved trajectory.
pub fn state_dependent_rate_bounds(
    states: &[SpatialState],
    curvatures: &[f64],
    lengths: &[f64],
    params: &VehicleParams,
) -> Vec<(f64, f64)> {
    lengths
        .iter()
        .zip(curvatures)
        .zip(states)
        .map(|((&ds, &kappa), z)| {
            let scale = ds * (1.0 - kappa * z.e_y) / (z.e_psi.cos() * params.speed);
            (scale * params.steer_rate_min, scale * params.steer_rate_max)
        })
        .collect()
}

/// Advances the time-domain model by `dt` with constant speed and steering.
pub fn step_time(state: &TimeState, v: f64, delta: f64, dt: f64, params: &VehicleParams) -> TimeState {
    let rate = v / params.wheelbase * delta.tan();
    let dpsi = rate * dt;
    let (dx, dy) = if dpsi.abs() < 1e-9 {
        let mid = state.psi + 0.5 * dpsi;
        (v * dt * mid.cos(), v * dt * mid.sin())
    } else {
        let r = v / rate;
        (
            r * ((state.psi + dpsi).sin() - state.psi.sin()),
            -r * ((state.psi + dpsi).cos() - state.psi.cos()),
        )
    };
    TimeState {
        x: state.x + dx,
        y: state.y + dy,
        psi: state.psi + dpsi,
        delta,
    }
}

/// Trajectory of a full-lock turn and the radius of its enclosing circle.
#[derive(Debug, Clone, PartialEq)]
pub struct SaturatedTurn {
    pub trajectory: Vec<TimeState>,
    pub envelope_radius: f64,
}

/// Steers toward full lock as fast as allowed, sampled every `sample_time`,
/// until the heading has turned a full revolution.
///
/// The steering law is `delta <- min(delta + T_s * rate_max, steer_max)`.
pub fn saturated_steering_simulation(
    params: &VehicleParams,
    sample_time: f64,
    speed: f64,
    delta0: f64,
) -> Result<SaturatedTurn> {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(sample_time > 0.0) || !(speed > 0.0) {
        return Err(Error::InvalidParameter("sample time and speed must be positive".into()));
    }
    if delta0.abs() > params.steer_max + 1e-12 {
        return Err(Error::InvalidParameter("initial steering exceeds the limit".into()));
    }
    let mut state = TimeState {
        delta: delta0,
        ..TimeState::default()
    };
    let mut trajectory = vec![state];
    let max_steps = 10_000_000usize;
    for _ in 0..max_steps {
        if state.psi >= 2.0 * PI {
            break;
        }
        let delta = state.delta;
        let mut next = step_time(&state, speed, delta, sample_time, params);
        next.delta = (delta + sample_time * params.steer_rate_max).min(params.steer_max);
        state = next;
        trajectory.push(state);
    }
    let pts: Vec<Point2> = trajectory.iter().map(TimeState::position).collect();
    let (_, envelope_radius) = min_enclosing_circle(&pts);
    Ok(SaturatedTurn {
        trajectory,
        envelope_radius,
    })
}

/// Smallest circle containing all points (Welzl, iterative form).
///
/// Points are visited in a fixed stride permutation so the result is
/// deterministic and the expected cost stays near linear.
pub fn min_enclosing_circle(points: &[Point2]) -> (Point2, f64) {
    let n = points.len();
    if n == 0 {
        return (Point2::default(), 0.0);
    }
    let order: Vec<Point2> = {
        let mut stride = ((n as f64) * 0.618_033_988_75) as usize | 1;
        while gcd(stride, n) != 1 {
            stride += 2;
        }
        (0..n).map(|i| points[(i * stride) % n]).collect()
    };
    let inside = |c: Point2, r: f64, p: Point2| p.dist(c) <= r * (1.0 + 1e-12) + 1e-12;
    let mut c = order[0];
    let mut r = 0.0;
    for i in 1..n {
        if inside(c, r, order[i]) {
            continue;
        }
        c = order[i];
        r = 0.0;
        for j in 0..i {
            if inside(c, r, order[j]) {
                continue;
            }
            c = order[i].lerp(order[j], 0.5);
            r = order[i].dist(order[j]) * 0.5;
            for k in 0..j {
                if inside(c, r, order[k]) {
                    continue;
                }
                if let Some((cc, rr)) = circumcircle(order[i], order[j], order[k]) {
                    c = cc;
                    r = rr;
                }
            }
        }
    }
    (c, r)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

fn circumcircle(a: Point2, b: Point2, c: Point2) -> Option<(Point2, f64)> {
    let bx = b - a;
    let cx = c - a;
    let d = 2.0 * bx.cross(cx);
    if d.abs() < 1e-300 {
        return None;
    }
    let b2 = bx.dot(bx);
    let c2 = cx.dot(cx);
    let center = Point2::new((cx.y * b2 - bx.y * c2) / d, (bx.x * c2 - cx.x * b2) / d);
    Some((a + center, center.norm()))
}
