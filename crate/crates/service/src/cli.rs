use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use workcell_core::capture::{load_scene, simulate_scan, CaptureError};
use workcell_core::eval::{evaluate, format_report, write_report, EvalConfig, EvalError, IcpConfig};
use workcell_core::io::{
    read_correspondences, read_obj, read_ply, read_script, read_trajectory, write_ply, FormatError,
    PlyFormat,
};
use workcell_core::toolbox::{EditSession, ToolError};
use workcell_core::{Aabb, Vec3};

use crate::server::serve;
use crate::service::Service;

#[derive(Debug, Parser)]
#[command(name = "wsketch", version, about = "Capture, edit and evaluate workcell point clouds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a scan of a mesh scene along a trajectory.
    Capture(CaptureArgs),
    /// Replay a session script on a cloud.
    Process(ProcessArgs),
    /// Compare a cloud with its ground-truth mesh.
    Evaluate(EvaluateArgs),
    /// Serve one client over TCP.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct CaptureArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub trajectory: PathBuf,
    /// Keep only points inside x0,y0,z0,x1,y1,z1.
    #[arg(long, value_parser = parse_crop, allow_hyphen_values = true)]
    pub crop: Option<Aabb>,
    #[arg(long)]
    pub out: PathBuf,
    /// ascii or binary
    #[arg(long, default_value = "binary")]
    pub format: PlyFormat,
}

#[derive(Debug, Args)]
pub struct ProcessArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub script: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "binary")]
    pub format: PlyFormat,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub cloud: PathBuf,
    #[arg(long)]
    pub mesh: PathBuf,
    /// `pointId qx qy qz` per line; without it the cloud is assumed to be
    /// roughly in the mesh frame already.
    #[arg(long)]
    pub correspondences: Option<PathBuf>,
    #[arg(long, default_value_t = workcell_core::eval::DEFAULT_MESH_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// ICP correspondence gate in meters.
    #[arg(long, default_value_t = 0.05)]
    pub max_corr_dist: f64,
    #[arg(long, default_value_t = 50)]
    pub max_iterations: usize,
    /// Heat-map saturation distance in meters (default: 99th percentile).
    #[arg(long)]
    pub saturation: Option<f64>,
    /// JSON report path; printed to stdout when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Include per-point distances in the report.
    #[arg(long)]
    pub per_point: bool,
    #[arg(long)]
    pub heatmap: Option<PathBuf>,
    #[arg(long, default_value = "binary")]
    pub format: PlyFormat,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 7878)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Cloud to open before the client connects.
    #[arg(long)]
    pub cloud: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Capture(#[from] CaptureError),
    #[error(transparent)]
    Tool(#[from] ToolError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn parse_crop(s: &str) -> Result<Aabb, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("bad number in crop box: {e}"))?;
    let [x0, y0, z0, x1, y1, z1] = v[..] else {
        return Err(format!("crop box needs 6 numbers, got {}", v.len()));
    };
    Aabb::new(Vec3::new(x0, y0, z0), Vec3::new(x1, y1, z1)).map_err(|e| e.to_string())
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Capture(a) => {
            let loaded = load_scene(&a.scene)?;
            let trajectory = read_trajectory(&a.trajectory)?;
            let (cloud, frames) = simulate_scan(
                &loaded.scene,
                &trajectory,
                &loaded.intrinsics,
                &loaded.capture,
                a.crop.as_ref(),
            )?;
            write_ply(&cloud, &a.out, a.format)?;
            eprintln!("captured {} points in {frames} frames", cloud.len());
        }
        Command::Process(a) => {
            let cloud = read_ply(&a.input)?;
            let script = read_script(&a.script)?;
            let before = cloud.len();
            let mut session = EditSession::new(cloud);
            session.apply_script(&script)?;
            write_ply(session.committed(), &a.out, a.format)?;
            eprintln!(
                "applied {} tools: {before} -> {} points",
                script.len(),
                session.committed().len()
            );
        }
        Command::Evaluate(a) => {
            let cloud = read_ply(&a.cloud)?;
            let mesh = read_obj(&a.mesh)?;
            let corr = a.correspondences.as_ref().map(read_correspondences).transpose()?;
            let cfg = EvalConfig {
                mesh_samples: a.samples,
                seed: a.seed,
                icp: IcpConfig {
                    max_iterations: a.max_iterations,
                    max_correspondence_distance: a.max_corr_dist,
                    ..IcpConfig::default()
                },
                heatmap_saturation: a.saturation,
            };
            let e = evaluate(&cloud, &mesh, corr.as_ref(), &cfg)?;
            match &a.report {
                Some(path) => write_report(path, &e.report, Some(&e.icp), a.per_point)?,
                None => print!("{}", format_report(&e.report, Some(&e.icp), a.per_point)),
            }
            if let Some(path) = &a.heatmap {
                write_ply(&e.heatmap, path, a.format)?;
            }
            let s = e.report.summary;
            eprintln!(
                "{} points: mean {:.6} m, median {:.6} m, max {:.6} m (ICP rmse {:.6} m)",
                s.count, s.mean, s.median, s.max, e.icp.rmse
            );
        }
        Command::Serve(a) => {
            let mut service = match &a.cloud {
                Some(path) => Service::with_cloud(read_ply(path)?),
                None => Service::new(),
            };
            serve((a.host.as_str(), a.port), &mut service)?;
        }
    }
    Ok(())
}
