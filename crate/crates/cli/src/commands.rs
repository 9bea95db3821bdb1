use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use orthohaptic::design::{size_device, DesignSpec};
use orthohaptic::device::{
    device_fk, device_ik, device_jacobian, isotropic_home, DevicePose, JacobianReport, JointVector,
};
use orthohaptic::orthoglide::PrismaticVector;
use orthohaptic::transmission::{transfer_table, UJointConfig};
use orthohaptic::validation::{run_all, run_suite, suite_names, ValidationOptions};
use orthohaptic::workspace::{conditioning_map, largest_cube, write_map_csv, GridSpec, WorkspaceSpec};
use orthohaptic::wrist::WristKind;
use orthohaptic::{Error, Mat3, Rot3, Tolerances};
use thiserror::Error;

use crate::config::{Config, ConfigError};
use crate::output::{g9, join_g9, resolve_output, write_atomic};

pub const DEFAULT_PSI: f64 = 2.0;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Config { path: PathBuf, source: ConfigError },
    #[error("{0}")]
    Kinematic(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0} suite(s) failed")]
    CheckFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => 2,
            CliError::Kinematic(Error::InvalidParams(_)) => 2,
            CliError::Kinematic(Error::Infeasible { .. } | Error::EmptyWorkspace) => 4,
            CliError::Kinematic(_) | CliError::Io { .. } | CliError::CheckFailed(_) => 3,
        }
    }
}

type CliResult = Result<(), CliError>;

/// Parses six comma-separated numbers, naming the offending token on error.
pub fn parse_six(s: &str) -> Result<[f64; 6], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 6 {
        return Err(format!("expected 6 comma-separated numbers, got {} in `{s}`", parts.len()));
    }
    let mut out = [0.0; 6];
    for (slot, tok) in out.iter_mut().zip(&parts) {
        let v: f64 = tok.parse().map_err(|_| format!("`{tok}` is not a number"))?;
        if !v.is_finite() {
            return Err(format!("`{tok}` is not finite"));
        }
        *slot = v;
    }
    Ok(out)
}

fn load(path: &Path) -> Result<Config, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Config::parse(&text).map_err(|source| CliError::Config {
        path: path.to_path_buf(),
        source,
    })
}

/// Resolves an output path and refuses to overwrite the configuration.
fn output_path(out: &Path, config: Option<&Path>) -> Result<PathBuf, CliError> {
    let target = resolve_output(out);
    if let Some(cfg) = config {
        let same = match (fs::canonicalize(cfg), fs::canonicalize(&target)) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        };
        if same {
            return Err(CliError::Usage(format!(
                "output path {} would overwrite the configuration",
                out.display()
            )));
        }
    }
    Ok(target)
}

fn write_file<F>(path: &Path, fill: F) -> CliResult
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    write_atomic(path, fill).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn pose_from(values: [f64; 6], cfg: &Config) -> DevicePose {
    let [x, y, z, rx, ry, rz] = values;
    let w = Rot3::about_x(rx.to_radians()) * Rot3::about_y(ry.to_radians()) * Rot3::about_z(rz.to_radians());
    DevicePose {
        p: orthohaptic::Vec3::new(x, y, z),
        r: w * cfg.device().variant.mount,
    }
}

fn joints_from(values: [f64; 6]) -> JointVector {
    JointVector {
        rho: PrismaticVector([values[0], values[1], values[2]]),
        gamma: [values[3].to_radians(), values[4].to_radians(), values[5].to_radians()],
    }
}

fn print_matrix(name: &str, m: &Mat3) {
    let rows: Vec<String> = (0..3)
        .map(|i| join_g9(&[m[(i, 0)], m[(i, 1)], m[(i, 2)]]))
        .collect();
    println!("{name} = {}", rows.join("; "));
}

pub fn fk(config: &Path, joints: [f64; 6]) -> CliResult {
    let cfg = load(config)?;
    let pose = device_fk(&joints_from(joints), &cfg.device())?;
    println!("p = {}", join_g9(&[pose.p.x, pose.p.y, pose.p.z]));
    print_matrix("R", pose.r.matrix());
    let axis = pose.distinguished_axis();
    println!("axis = {}", join_g9(&[axis.x, axis.y, axis.z]));
    Ok(())
}

pub fn ik(config: &Path, pose: [f64; 6]) -> CliResult {
    let cfg = load(config)?;
    let q = device_ik(&pose_from(pose, &cfg), &cfg.device())?;
    println!("rho = {}", join_g9(&q.rho.0));
    println!("gamma_deg = {}", join_g9(&q.gamma.map(f64::to_degrees)));
    Ok(())
}

fn print_jacobian(j: &JacobianReport) {
    print_matrix("J_t", &j.j_t);
    print_matrix("J_r", &j.j_r);
    println!("sigma_t = {}", join_g9(&j.sigma_t));
    println!("sigma_r = {}", join_g9(&j.sigma_r));
    println!("kappa_t = {}", g9(j.sigma_t[2] / j.sigma_t[0]));
    println!("kappa_r = {}", g9(j.sigma_r[2] / j.sigma_r[0]));
    let coupling = j.coupling.iter().flat_map(|m| m.iter()).fold(0.0_f64, |a, x| a.max(x.abs()));
    println!("coupling_max = {}", g9(coupling));
}

pub fn jacobian(config: &Path, joints: Option<[f64; 6]>, pose: Option<[f64; 6]>) -> CliResult {
    let cfg = load(config)?;
    let device = cfg.device();
    let q = match (joints, pose) {
        (Some(j), _) => joints_from(j),
        (None, Some(p)) => device_ik(&pose_from(p, &cfg), &device)?,
        (None, None) => isotropic_home(&device).q,
    };
    print_jacobian(&device_jacobian(&q, &device)?);
    Ok(())
}

fn workspace_spec(cfg: &Config) -> Result<WorkspaceSpec, CliError> {
    let mut spec = WorkspaceSpec::new(cfg.stage());
    if let Some(psi) = cfg.psi {
        spec = spec.with_psi(psi)?;
    }
    Ok(spec)
}

pub fn workspace_map(config: &Path, out: &Path, grid: Option<usize>, lo: Option<f64>, hi: Option<f64>) -> CliResult {
    let cfg = load(config)?;
    let n = grid.unwrap_or(cfg.grid_n);
    if n == 0 {
        return Err(CliError::Usage("--grid must be at least 1".into()));
    }
    let l = cfg.leg_length;
    let (lo, hi) = (lo.unwrap_or(-l), hi.unwrap_or(l));
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(CliError::Usage(format!("invalid box [{lo}, {hi}]")));
    }
    let target = output_path(out, Some(config))?;
    let spec = workspace_spec(&cfg)?;
    let rows = conditioning_map(&spec, &GridSpec::cube(lo, hi, n));
    write_file(&target, |w| write_map_csv(&rows, w))?;
    let members = rows.iter().filter(|r| r.member).count();
    let best = rows.iter().filter_map(|r| r.kappa()).fold(f64::INFINITY, f64::min);
    println!("rows = {}", rows.len());
    println!("members = {members}");
    if members > 0 {
        println!("kappa_min = {}", g9(best));
    }
    println!("wrote {}", target.display());
    Ok(())
}

pub fn cube(config: &Path, out: Option<&Path>, resolution: usize) -> CliResult {
    let cfg = load(config)?;
    let target = out.map(|o| output_path(o, Some(config))).transpose()?;
    let spec = workspace_spec(&cfg)?;
    let cube = largest_cube(&spec, resolution)?;
    let c = cube.center;
    println!("center = {}", join_g9(&[c.x, c.y, c.z]));
    println!("edge = {}", g9(cube.edge));
    println!("edge_over_L = {}", g9(cube.edge / cfg.leg_length));
    match cfg.wrist {
        WristKind::Hybrid2R1R => println!(
            "orientation range: pitch and yaw within +/-{} deg, roll unlimited",
            g9(cfg.limit_deg)
        ),
        WristKind::Spherical3R => {
            let home = isotropic_home(&cfg.device());
            println!(
                "orientation range: motors within +/-{} deg about a home axis tilted {} deg from z",
                g9(cfg.limit_deg),
                g9(home.axis_tilt.to_degrees())
            );
        }
    }
    if let Some(target) = target {
        let mut result = cfg.clone();
        result.results.clear();
        result.results.insert("center_x".into(), c.x);
        result.results.insert("center_y".into(), c.y);
        result.results.insert("center_z".into(), c.z);
        result.results.insert("edge".into(), cube.edge);
        let text = result.serialize();
        write_file(&target, |w| w.write_all(text.as_bytes()))?;
        println!("wrote {}", target.display());
    }
    Ok(())
}

pub fn optimize(config: &Path, edge: Option<f64>, out: Option<&Path>) -> CliResult {
    let cfg = load(config)?;
    let target = out.map(|o| output_path(o, Some(config))).transpose()?;
    let required = edge
        .or(cfg.required_edge)
        .ok_or_else(|| CliError::Usage("optimize needs --edge or required_edge in the configuration".into()))?;
    let psi = cfg.psi.unwrap_or(DEFAULT_PSI);
    let spec = DesignSpec::new(required, psi, cfg.margin)?;
    let design = size_device(&spec, &cfg.tol)?;
    let c = design.cube.center;
    println!("L = {}", g9(design.leg_length));
    println!("rho_min = {}", g9(design.rho_min));
    println!("rho_max = {}", g9(design.rho_max));
    println!("cube_center = {}", join_g9(&[c.x, c.y, c.z]));
    println!("cube_edge = {}", g9(design.cube.edge));
    println!("sigma_range = {}", join_g9(&[design.worst_sigma.0, design.worst_sigma.1]));
    if let Some(target) = target {
        let mut result = cfg.clone();
        result.leg_length = design.leg_length;
        result.rho_min = design.rho_min;
        result.rho_max = design.rho_max;
        result.psi = Some(psi);
        result.required_edge = Some(required);
        result.results.clear();
        result.results.insert("center_x".into(), c.x);
        result.results.insert("center_y".into(), c.y);
        result.results.insert("center_z".into(), c.z);
        result.results.insert("edge".into(), design.cube.edge);
        result.results.insert("sigma_min".into(), design.worst_sigma.0);
        result.results.insert("sigma_max".into(), design.worst_sigma.1);
        let text = result.serialize();
        write_file(&target, |w| w.write_all(text.as_bytes()))?;
        println!("wrote {}", target.display());
    }
    Ok(())
}

pub const TRANSMISSION_HEADER: &str = "theta_in_deg,theta_out_deg,speed_ratio";

pub fn transmission(config: Option<&Path>, beta_deg: f64, steps: usize, out: &Path) -> CliResult {
    let tol = match config {
        Some(path) => load(path)?.tol,
        None => Tolerances::default(),
    };
    if steps == 0 {
        return Err(CliError::Usage("--steps must be at least 1".into()));
    }
    if !(beta_deg.is_finite() && (0.0..90.0).contains(&beta_deg)) {
        return Err(CliError::Usage(format!("--beta {beta_deg} must lie in [0, 90)")));
    }
    let target = output_path(out, config)?;
    let table = transfer_table(&UJointConfig::new(beta_deg.to_radians(), 0.0), steps, &tol)?;
    write_file(&target, |w| {
        writeln!(w, "{TRANSMISSION_HEADER}")?;
        for s in &table {
            writeln!(
                w,
                "{},{},{}",
                s.theta_in.to_degrees(),
                s.theta_out.to_degrees(),
                s.speed_ratio
            )?;
        }
        Ok(())
    })?;
    let (max_at, max) = table
        .iter()
        .map(|s| (s.theta_in, s.speed_ratio))
        .fold((0.0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    let min = table.iter().map(|s| s.speed_ratio).fold(f64::INFINITY, f64::min);
    println!("rows = {}", table.len());
    println!("speed_ratio_max = {} at theta_in = {} deg", g9(max), g9(max_at.to_degrees()));
    println!("speed_ratio_min = {}", g9(min));
    println!("wrote {}", target.display());
    Ok(())
}

/// The configuration format's own invariant: canonical text is a fixed point.
fn config_round_trip() -> bool {
    let samples = [
        "",
        "L = 0.75\nwrist = spherical\npsi = 1.5\n",
        "rho_min = -0.3 # comment\nrho_max=2.25\ngrid_n = 5\nresult.edge = 0.1\n",
    ];
    samples.iter().all(|text| match Config::parse(text) {
        Ok(c) => {
            let once = c.serialize();
            Config::parse(&once).map(|again| again == c && again.serialize() == once).unwrap_or(false)
        }
        Err(_) => false,
    })
}

pub fn check(tol_scale: f64, seed: u64, suite: Option<&str>) -> CliResult {
    if !(tol_scale.is_finite() && tol_scale >= 0.0) {
        return Err(CliError::Usage(format!("--tol-scale {tol_scale} must be finite and >= 0")));
    }
    let opts = ValidationOptions { seed, tol_scale };
    let reports = match suite {
        Some("config-round-trip") => Vec::new(),
        Some(name) => vec![run_suite(name, &opts).ok_or_else(|| {
            CliError::Usage(format!(
                "unknown suite `{name}`; known: {}, config-round-trip",
                suite_names().join(", ")
            ))
        })?],
        None => run_all(&opts),
    };
    let mut failed = 0;
    println!("check seed {seed} tol-scale {}", g9(tol_scale));
    for r in &reports {
        if !r.passed {
            failed += 1;
        }
        println!("{r}");
    }
    if suite.is_none() || suite == Some("config-round-trip") {
        let ok = config_round_trip() && tol_scale > 0.0;
        if !ok {
            failed += 1;
        }
        println!("{} config-round-trip        canonical text is a fixed point", if ok { "PASS" } else { "FAIL" });
    }
    let total = reports.len() + usize::from(suite.is_none() || suite == Some("config-round-trip"));
    println!("check: {} passed, {failed} failed", total - failed);
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::CheckFailed(failed))
    }
}
