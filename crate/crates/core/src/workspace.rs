//! Translational workspace: membership, the largest inscribed axis-aligned
//! cube, and conditioning maps.
//!
//! A point belongs to the workspace when every leg can reach it
//! (`rᵢ ≤ L`, the intersection of three cylinders), every prismatic value
//! lies in its range, the legs sit on the working assembly mode, and,
//! optionally, the velocity amplification factors stay within `[1/ψ, ψ]`.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::orthoglide::Orthoglide;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkspaceSpec {
    pub ortho: Orthoglide,
    /// Bound on the amplification factors, ≥ 1 when present.
    pub psi: Option<f64>,
    /// Fractional shrink of the leg cylinders, keeping clear of serial singularities.
    pub exclude_singular_shell: f64,
}

impl WorkspaceSpec {
    pub fn new(ortho: Orthoglide) -> Self {
        Self {
            ortho,
            psi: None,
            exclude_singular_shell: 0.0,
        }
    }

    pub fn with_psi(mut self, psi: f64) -> Result<Self> {
        if !(psi >= 1.0) || !psi.is_finite() {
            return Err(Error::InvalidParams(format!("psi = {psi} must be >= 1")));
        }
        self.psi = Some(psi);
        Ok(self)
    }

    /// Center of a cube placed at coordinate `c` along the symmetric diagonal
    /// (x = y = z for the default axes).
    pub fn diagonal_point(&self, c: f64) -> Vec3 {
        let a = &self.ortho.params.axes;
        (a[0] + a[1] + a[2]) * c
    }
}

/// First constraint a point violates; leg indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    Cylinder(usize),
    Range(usize),
    AssemblyMode,
    Amplification,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Membership {
    pub member: bool,
    pub failure: Option<Constraint>,
}

impl Membership {
    fn fail(c: Constraint) -> Self {
        Self {
            member: false,
            failure: Some(c),
        }
    }
}

pub fn is_member(p: &Vec3, spec: &WorkspaceSpec) -> Membership {
    let o = &spec.ortho;
    let l = o.params.leg_length;
    let tol = &o.tol;
    let radius = l * (1.0 - spec.exclude_singular_shell);
    let r_max_sq = radius * radius + tol.residual * l * l;
    for i in 0..3 {
        if o.radial_sq(p, i) > r_max_sq {
            return Membership::fail(Constraint::Cylinder(i + 1));
        }
    }
    let rho = match o.ik_unbounded(p) {
        Ok(r) => r,
        Err(Error::OutsideCylinder(i)) => return Membership::fail(Constraint::Cylinder(i)),
        Err(_) => return Membership::fail(Constraint::Cylinder(1)),
    };
    let slack = tol.residual * l;
    for i in 0..3 {
        if rho[i] < o.params.rho_min - slack || rho[i] > o.params.rho_max + slack {
            return Membership::fail(Constraint::Range(i + 1));
        }
    }
    match o.mode_margin(p) {
        Ok(m) if m > tol.singular => {}
        _ => return Membership::fail(Constraint::AssemblyMode),
    }
    if let Some(psi) = spec.psi {
        match o.amplification_factors(p) {
            Ok([lo, _, hi]) if lo >= 1.0 / psi - tol.residual && hi <= psi + tol.residual => {}
            _ => return Membership::fail(Constraint::Amplification),
        }
    }
    Membership {
        member: true,
        failure: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubeResult {
    pub center: Vec3,
    pub edge: f64,
    /// Faces are perpendicular to the actuator axes; always true.
    pub axis_aligned: bool,
}

impl CubeResult {
    pub fn new(center: Vec3, edge: f64) -> Self {
        Self {
            center,
            edge,
            axis_aligned: true,
        }
    }

    pub fn corners(&self, axes: &[Vec3; 3]) -> Vec<Vec3> {
        let h = 0.5 * self.edge;
        (0..8)
            .map(|k| {
                let s = |b: usize| if k & (1 << b) == 0 { -1.0 } else { 1.0 };
                self.center + (axes[0] * s(0) + axes[1] * s(1) + axes[2] * s(2)) * h
            })
            .collect()
    }

    /// Boundary samples: corners, edge midpoints, face centers, an n×n grid
    /// on each face, plus the cube center.
    pub fn boundary_samples(&self, axes: &[Vec3; 3], n: usize) -> Vec<Vec3> {
        let h = 0.5 * self.edge;
        let at = |u: [f64; 3]| self.center + (axes[0] * u[0] + axes[1] * u[1] + axes[2] * u[2]) * h;
        let mut pts = self.corners(axes);
        for a in 0..3 {
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            for sb in [-1.0, 1.0] {
                for sc in [-1.0, 1.0] {
                    let mut u = [0.0; 3];
                    u[b] = sb;
                    u[c] = sc;
                    pts.push(at(u));
                }
            }
        }
        for a in 0..3 {
            for s in [-1.0, 1.0] {
                let mut u = [0.0; 3];
                u[a] = s;
                pts.push(at(u));
            }
        }
        let ticks = linspace(-1.0, 1.0, n);
        for a in 0..3 {
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            for s in [-1.0, 1.0] {
                for &tb in &ticks {
                    for &tc in &ticks {
                        let mut u = [0.0; 3];
                        u[a] = s;
                        u[b] = tb;
                        u[c] = tc;
                        pts.push(at(u));
                    }
                }
            }
        }
        pts.push(self.center);
        pts
    }

    /// Full m×m×m grid through the cube volume.
    pub fn volume_grid(&self, axes: &[Vec3; 3], m: usize) -> Vec<Vec3> {
        let h = 0.5 * self.edge;
        let ticks = linspace(-1.0, 1.0, m);
        let mut pts = Vec::with_capacity(m * m * m);
        for &a in &ticks {
            for &b in &ticks {
                for &c in &ticks {
                    pts.push(self.center + (axes[0] * a + axes[1] * b + axes[2] * c) * h);
                }
            }
        }
        pts
    }
}

/// `n` evenly spaced values from `lo` to `hi` inclusive; a single `lo` for n = 1.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| {
                if k == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

fn cube_feasible(spec: &WorkspaceSpec, cube: &CubeResult, n: usize) -> bool {
    cube.boundary_samples(&spec.ortho.params.axes, n)
        .iter()
        .all(|p| is_member(p, spec).member)
}

/// Largest feasible edge for a cube centered at diagonal coordinate `c`,
/// or `None` when the center itself is outside.
fn max_edge_at(spec: &WorkspaceSpec, c: f64, n: usize) -> Option<f64> {
    let center = spec.diagonal_point(c);
    if !is_member(&center, spec).member {
        return None;
    }
    let l = spec.ortho.params.leg_length;
    let (mut lo, mut hi) = (0.0, 2.0 * l);
    while hi - lo > 1e-12 * l {
        let mid = 0.5 * (lo + hi);
        if cube_feasible(spec, &CubeResult::new(center, mid), n) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

const COARSE_CENTERS: usize = 41;
const GOLDEN_ITERS: usize = 64;

/// Largest axis-aligned cube with its center on the symmetric diagonal.
///
/// The edge for a given center comes from bisection with boundary sampling
/// at resolution `n`; the center is located by a coarse scan followed by
/// golden-section refinement around the best coarse sample.
pub fn largest_cube(spec: &WorkspaceSpec, n: usize) -> Result<CubeResult> {
    if n < 3 {
        return Err(Error::InvalidParams(format!("cube resolution {n} must be >= 3")));
    }
    let o = &spec.ortho;
    let l = o.params.leg_length;

    if o.params.rho_max - o.params.rho_min <= o.tol.residual * l {
        let rho = crate::orthoglide::PrismaticVector::splat(0.5 * (o.params.rho_min + o.params.rho_max));
        let p = o.fk(&rho, None).map_err(|_| Error::EmptyWorkspace)?;
        if !is_member(&p, spec).member {
            return Err(Error::EmptyWorkspace);
        }
        return Ok(CubeResult::new(p, 0.0));
    }

    let score = |c: f64| max_edge_at(spec, c, n).unwrap_or(-1.0);
    let coarse: Vec<(f64, f64)> = linspace(-l, l, COARSE_CENTERS)
        .into_par_iter()
        .map(|c| (c, score(c)))
        .collect();
    let (k_best, &(c_best, s_best)) = coarse
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .expect("non-empty scan");
    if s_best < 0.0 {
        return Err(Error::EmptyWorkspace);
    }

    let step = 2.0 * l / (COARSE_CENTERS - 1) as f64;
    let (mut a, mut b) = (c_best - step, c_best + step);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (score(x1), score(x2));
    for _ in 0..GOLDEN_ITERS {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = score(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = score(x1);
        }
    }
    let (mut c, mut s) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    if s_best > s {
        c = c_best;
        s = s_best;
    }
    let _ = k_best;
    Ok(CubeResult::new(spec.diagonal_point(c), s.max(0.0)))
}

/// Axis-aligned sampling box with `n` points per axis (row-major, x slowest).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: Vec3,
    pub hi: Vec3,
    pub n: [usize; 3],
}

impl GridSpec {
    pub fn cube(lo: f64, hi: f64, n: usize) -> Self {
        Self {
            lo: Vec3::repeat(lo),
            hi: Vec3::repeat(hi),
            n: [n; 3],
        }
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, index: usize) -> Vec3 {
        let [nx, ny, nz] = self.n;
        let (i, j, k) = (index / (ny * nz), (index / nz) % ny, index % nz);
        let coord = |lo: f64, hi: f64, n: usize, t: usize| {
            if n <= 1 {
                lo
            } else if t == n - 1 {
                hi
            } else {
                lo + (hi - lo) * t as f64 / (n - 1) as f64
            }
        };
        let _ = nx;
        Vec3::new(
            coord(self.lo.x, self.hi.x, self.n[0], i),
            coord(self.lo.y, self.hi.y, self.n[1], j),
            coord(self.lo.z, self.hi.z, self.n[2], k),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapRow {
    pub p: Vec3,
    /// (σ_min, σ_max) for members only.
    pub sigma: Option<(f64, f64)>,
    pub member: bool,
}

impl MapRow {
    pub fn kappa(&self) -> Option<f64> {
        self.sigma.map(|(lo, hi)| hi / lo)
    }
}

/// Conditioning of every grid point, in grid order regardless of scheduling.
pub fn conditioning_map(spec: &WorkspaceSpec, grid: &GridSpec) -> Vec<MapRow> {
    (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let p = grid.point(idx);
            let sigma = if is_member(&p, spec).member {
                spec.ortho
                    .amplification_factors(&p)
                    .ok()
                    .map(|s| (s[0], s[2]))
            } else {
                None
            };
            MapRow {
                p,
                sigma,
                member: sigma.is_some(),
            }
        })
        .collect()
}

pub const MAP_CSV_HEADER: &str = "x,y,z,sigma_min,sigma_max,kappa,member";

/// Writes rows as CSV; doubles use the shortest round-trip representation.
pub fn write_map_csv<W: Write>(rows: &[MapRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{MAP_CSV_HEADER}")?;
    for r in rows {
        write!(out, "{},{},{},", r.p.x, r.p.y, r.p.z)?;
        match (r.sigma, r.kappa()) {
            (Some((lo, hi)), Some(k)) => writeln!(out, "{lo},{hi},{k},{}", r.member)?,
            _ => writeln!(out, ",,,{}", r.member)?,
        }
    }
    Ok(())
}
