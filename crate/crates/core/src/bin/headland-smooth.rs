use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use headland_smooth::config::RunConfig;
use headland_smooth::field::{load_field, FieldLayout};
use headland_smooth::output::{emit_outputs, plan_geojson};
use headland_smooth::pipeline::{detect_instances, plan_field, run_pipeline, smooth_instance, sweep_radius};
use headland_smooth::reference::SegmentKind;
use headland_smooth::vehicle::saturated_steering_simulation;
use headland_smooth::Error;

/// Smooths headland corners and lane transitions of agricultural field plans.
#[derive(Parser)]
#[command(version, about, allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan, smooth and rasterise a field, writing all outputs.
    Plan {
        /// GeoJSON field or CSV contour.
        field: PathBuf,
        #[arg(short, long, default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Smooth one headland corner of a field plan and print its diagnostics.
    SmoothCorner(InstanceArgs),
    /// Smooth one lane transition of a field plan and print its diagnostics.
    SmoothTransition(InstanceArgs),
    /// Full-lock turn from straight driving and its envelope radius.
    SimulateSaturated {
        /// Sample time in seconds.
        #[arg(long, default_value_t = 0.01)]
        sample_time_s: f64,
        /// Initial steering angle in degrees.
        #[arg(long, default_value_t = 0.0)]
        delta0_deg: f64,
        /// Write the trajectory as `t,x,y,psi,delta` CSV here.
        #[arg(long)]
        trajectory: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Transition deviation statistics over a list of Dubins radii.
    SweepRadius {
        field: PathBuf,
        /// Comma-separated radii in metres.
        #[arg(long, value_delimiter = ',', default_values_t = [5.0, 5.33, 7.0])]
        radii: Vec<f64>,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Args)]
struct InstanceArgs {
    /// GeoJSON field or CSV contour.
    field: PathBuf,
    /// Zero-based index among the instances of this kind.
    #[arg(long, default_value_t = 0)]
    index: usize,
    /// Write the smoothed segment as GeoJSON here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

/// Overrides applied on top of the defaults and the config file.
#[derive(Args)]
struct ConfigArgs {
    /// Flat `key = value` file read before the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    wheelbase_m: Option<f64>,
    #[arg(long)]
    delta_max_deg: Option<f64>,
    #[arg(long)]
    ddelta_max_deg_s: Option<f64>,
    #[arg(long)]
    v_ref_kmh: Option<f64>,
    #[arg(long)]
    ds_m: Option<f64>,
    #[arg(long)]
    operating_width_m: Option<f64>,
    /// Dubins radius; defaults to the minimum turning radius.
    #[arg(long)]
    r_dubins_m: Option<f64>,
    #[arg(long)]
    theta_edge_deg: Option<f64>,
    #[arg(long)]
    raster_cell_m: Option<f64>,
    #[arg(long)]
    corner_cut_iterations: Option<usize>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut cfg.wheelbase_m, self.wheelbase_m);
        set(&mut cfg.delta_max_deg, self.delta_max_deg);
        set(&mut cfg.ddelta_max_deg_s, self.ddelta_max_deg_s);
        set(&mut cfg.v_ref_kmh, self.v_ref_kmh);
        set(&mut cfg.ds_m, self.ds_m);
        set(&mut cfg.operating_width_m, self.operating_width_m);
        set(&mut cfg.theta_edge_deg, self.theta_edge_deg);
        set(&mut cfg.raster_cell_m, self.raster_cell_m);
        if self.r_dubins_m.is_some() {
            cfg.r_dubins_m = self.r_dubins_m;
        }
        if let Some(n) = self.corner_cut_iterations {
            cfg.corner_cut_iterations = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Why a command did not succeed, mapped to the exit code.
enum Failure {
    Input(String),
    Instance(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Input(_) | Error::Io { .. } | Error::InvalidParameter(_) | Error::EmptyOffset(_) => {
                Failure::Input(e.to_string())
            }
            other => Failure::Instance(other.to_string()),
        }
    }
}

fn load(path: &Path, cfg: &RunConfig) -> Result<FieldLayout, Failure> {
    let (layout, provenance) = load_field(path, cfg.operating_width_m)?;
    if provenance.headland_synthesised {
        eprintln!("headland synthesised by inward offset");
    }
    if provenance.lanes_synthesised {
        eprintln!("{} lanes synthesised", layout.lanes.len());
    }
    Ok(layout)
}

fn plan(field: &Path, out: &Path, config: &ConfigArgs) -> Result<(), Failure> {
    let cfg = config.resolve()?;
    let layout = load(field, &cfg)?;
    let result = run_pipeline(&layout, &cfg)?;
    for path in emit_outputs(&result, out)? {
        println!("wrote {}", path.display());
    }
    for problem in [1u8, 2] {
        let a = result.report.aggregate(problem);
        println!(
            "problem {problem}: {} instances, mean n_cstrts {:.1}, mean n_u {:.1}, mean solve {:.2} ms, mean max|e_y| {:.3} m, max {:.3} m",
            a.count,
            a.mean_n_cstrts,
            a.mean_n_u,
            1e3 * a.mean_solve_time,
            a.mean_max_abs_e_y,
            a.max_max_abs_e_y
        );
    }
    match result.report.failures() {
        0 => Ok(()),
        n => Err(Failure::Instance(format!("{n} instances failed; see report.csv"))),
    }
}

fn smooth_one(args: &InstanceArgs, corner: bool) -> Result<(), Failure> {
    let cfg = args.config.resolve()?;
    let layout = load(&args.field, &cfg)?;
    let path = plan_field(&layout, &cfg)?;
    let wanted = |k: SegmentKind| (k == SegmentKind::HeadlandCorner) == corner;
    let segments: Vec<_> = detect_instances(&path, &cfg)?.into_iter().filter(|s| wanted(s.kind)).collect();
    let segment = segments.get(args.index).ok_or_else(|| {
        Failure::Input(format!("instance {} requested, {} found", args.index, segments.len()))
    })?;
    let outcome = smooth_instance(&path, &layout, &cfg, segment)?;
    println!(
        "{} vertices {}..{} problem {}{}",
        segment.kind.as_str(),
        segment.i0,
        segment.i1,
        outcome.problem(),
        outcome.r_dubins.map(|r| format!(" r_dubins {r:.3}")).unwrap_or_default()
    );
    let sp = outcome.result.map_err(Failure::Instance)?;
    let d = &sp.diagnostics;
    println!("N {} n_u {} n_cstrts {}", sp.steering.len(), d.n_u, d.n_cstrts);
    println!(
        "lp solves {} total {:.2} ms, status {:?}, slack {:.3e}",
        d.solve_times.len(),
        1e3 * d.total_solve_time(),
        d.status,
        d.slack
    );
    println!(
        "max|e_y| {:.4} m, path length {:.2} m, rollout deviation {:.4} m, jaggedness {:.4}",
        d.max_abs_e_y, d.path_length, d.rollout_deviation, d.jaggedness
    );
    if let Some(out) = &args.out {
        std::fs::write(out, plan_geojson(Some(&sp.polyline))).map_err(|e| Failure::Input(format!("{}: {e}", out.display())))?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn simulate(sample_time_s: f64, delta0_deg: f64, trajectory: &Option<PathBuf>, config: &ConfigArgs) -> Result<(), Failure> {
    let cfg = config.resolve()?;
    let params = cfg.vehicle_params()?;
    let turn = saturated_steering_simulation(&params, sample_time_s, params.speed, delta0_deg.to_radians())?;
    println!("minimum turning radius {:.4} m", params.min_turning_radius());
    println!("envelope radius {:.4} m", turn.envelope_radius);
    if let Some(path) = trajectory {
        let mut text = String::from("t,x,y,psi,delta\n");
        for (k, s) in turn.trajectory.iter().enumerate() {
            text.push_str(&format!(
                "{:.4},{:.6},{:.6},{:.6},{:.6}\n",
                k as f64 * sample_time_s,
                s.x,
                s.y,
                s.psi,
                s.delta
            ));
        }
        std::fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn sweep(field: &Path, radii: &[f64], config: &ConfigArgs) -> Result<(), Failure> {
    let cfg = config.resolve()?;
    let layout = load(field, &cfg)?;
    let rows = sweep_radius(&layout, &cfg, radii)?;
    println!("r_dubins,transitions,mean_max_abs_e_y,max_max_abs_e_y,failures");
    for r in &rows {
        println!(
            "{:.3},{},{:.4},{:.4},{}",
            r.r_dubins, r.transitions.count, r.transitions.mean_max_abs_e_y, r.transitions.max_max_abs_e_y, r.failures
        );
    }
    match rows.iter().map(|r| r.failures).sum::<usize>() {
        0 => Ok(()),
        n => Err(Failure::Instance(format!("{n} instances failed"))),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors are input errors; exit code 2 is reserved for instance failures.
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Plan { field, out, config } => plan(field, out, config),
        Command::SmoothCorner(args) => smooth_one(args, true),
        Command::SmoothTransition(args) => smooth_one(args, false),
        Command::SimulateSaturated {
            sample_time_s,
            delta0_deg,
            trajectory,
            config,
        } => simulate(*sample_time_s, *delta0_deg, trajectory, config),
        Command::SweepRadius { field, radii, config } => sweep(field, radii, config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Instance(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
