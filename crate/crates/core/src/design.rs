//! Sizing of the translational stage: the smallest leg length (and the
//! tightest prismatic ranges) for which a cube of prescribed edge fits in
//! the workspace with every velocity amplification factor in `[1/ψ, ψ]`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Tolerances, Vec3};
use crate::orthoglide::{Orthoglide, OrthoglideParams};
use crate::workspace::{is_member, linspace, Constraint, CubeResult, WorkspaceSpec};

/// Grid resolution used while sizing.
pub const DEFAULT_GRID: usize = 9;
/// Candidate cube centers scanned along the diagonal, in units of L.
pub const OFFSET_SPAN: f64 = 0.3;
pub const OFFSET_STEPS: usize = 21;
/// Largest bracket, in units of the required edge.
pub const MAX_SCALE: f64 = 1e3;
pub const RELATIVE_WIDTH: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignSpec {
    pub required_edge: f64,
    pub psi: f64,
    /// Added on both sides of the prismatic range, in length units.
    pub margin: f64,
}

impl DesignSpec {
    pub fn new(required_edge: f64, psi: f64, margin: f64) -> Result<Self> {
        let s = Self {
            required_edge,
            psi,
            margin,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.required_edge > 0.0) || !self.required_edge.is_finite() {
            return Err(Error::InvalidParams("required edge must be positive".into()));
        }
        if !(self.psi >= 1.0) || !self.psi.is_finite() {
            return Err(Error::InvalidParams("psi must be >= 1".into()));
        }
        if !(self.margin >= 0.0) || !self.margin.is_finite() {
            return Err(Error::InvalidParams("margin must be >= 0".into()));
        }
        Ok(())
    }
}

/// Failures counted per constraint over the evaluation grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FailureCounts {
    pub cylinder: usize,
    pub range: usize,
    pub assembly_mode: usize,
}

impl FailureCounts {
    pub fn total(&self) -> usize {
        self.cylinder + self.range + self.assembly_mode
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignReport {
    pub feasible: bool,
    /// Diagonal coordinate of the best cube center.
    pub offset: f64,
    pub cube: CubeResult,
    /// Smallest σ_min and largest σ_max over the member grid points.
    pub worst_sigma: (f64, f64),
    pub failures: FailureCounts,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignResult {
    pub leg_length: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub cube: CubeResult,
    pub worst_sigma: (f64, f64),
}

impl DesignResult {
    pub fn params(&self) -> OrthoglideParams {
        OrthoglideParams {
            leg_length: self.leg_length,
            rho_min: self.rho_min,
            rho_max: self.rho_max,
            ..OrthoglideParams::default()
        }
    }
}

fn within_band(sigma: (f64, f64), psi: f64, tol: &Tolerances) -> bool {
    sigma.0 >= 1.0 / psi - tol.residual && sigma.1 <= psi + tol.residual
}

/// Grid statistics of one candidate cube.
fn evaluate_cube(ortho: &Orthoglide, cube: &CubeResult, m: usize) -> (FailureCounts, (f64, f64)) {
    let spec = WorkspaceSpec::new(*ortho);
    let pts = cube.volume_grid(&ortho.params.axes, m);
    pts.par_iter()
        .map(|p| {
            let mut f = FailureCounts::default();
            match is_member(p, &spec).failure {
                Some(Constraint::Cylinder(_)) => f.cylinder = 1,
                Some(Constraint::Range(_)) => f.range = 1,
                Some(Constraint::AssemblyMode) => f.assembly_mode = 1,
                Some(Constraint::Amplification) => unreachable!("no psi bound set"),
                None => match ortho.amplification_factors(p) {
                    Ok(s) => return (f, (s[0], s[2])),
                    Err(_) => f.assembly_mode = 1,
                },
            }
            (f, (f64::INFINITY, f64::NEG_INFINITY))
        })
        .reduce(
            || (FailureCounts::default(), (f64::INFINITY, f64::NEG_INFINITY)),
            |(a, sa), (b, sb)| {
                (
                    FailureCounts {
                        cylinder: a.cylinder + b.cylinder,
                        range: a.range + b.range,
                        assembly_mode: a.assembly_mode + b.assembly_mode,
                    },
                    (sa.0.min(sb.0), sa.1.max(sb.1)),
                )
            },
        )
}

/// Distance of the σ band from 1 on a log scale; infinite on any failure.
fn score(failures: &FailureCounts, sigma: (f64, f64)) -> f64 {
    if failures.total() > 0 {
        f64::INFINITY
    } else {
        sigma.0.ln().abs().max(sigma.1.ln().abs())
    }
}

/// Places a cube of the required edge at each scanned diagonal offset and
/// reports the best placement on an m×m×m grid.
pub fn evaluate_design(
    leg_length: f64,
    rho_min: f64,
    rho_max: f64,
    spec: &DesignSpec,
    m: usize,
    tol: &Tolerances,
) -> Result<DesignReport> {
    let params = OrthoglideParams {
        leg_length,
        rho_min,
        rho_max,
        ..OrthoglideParams::default()
    };
    params.validate(tol)?;
    if m < 2 {
        return Err(Error::InvalidParams(format!("grid resolution {m} must be >= 2")));
    }
    let ortho = Orthoglide::with_tolerances(params, *tol);
    let ws = WorkspaceSpec::new(ortho);
    let mut best: Option<(f64, DesignReport)> = None;
    for c in linspace(-OFFSET_SPAN * leg_length, OFFSET_SPAN * leg_length, OFFSET_STEPS) {
        let cube = CubeResult::new(ws.diagonal_point(c), spec.required_edge);
        let (failures, sigma) = evaluate_cube(&ortho, &cube, m);
        let s = score(&failures, sigma);
        let report = DesignReport {
            feasible: failures.total() == 0 && within_band(sigma, spec.psi, tol),
            offset: c,
            cube,
            worst_sigma: sigma,
            failures,
        };
        // strict comparison keeps the first (most negative) offset on ties
        let better = match &best {
            None => true,
            Some((bs, br)) => s < *bs || (s == *bs && report.failures.total() < br.failures.total()),
        };
        if better {
            best = Some((s, report));
        }
    }
    Ok(best.expect("offset scan is non-empty").1)
}

/// Exact prismatic extremes over an axis-aligned cube: ρᵢ = xᵢ + sqrt(L² − rᵢ²)
/// is separable in the cube coordinates.
pub fn rho_bounds(leg_length: f64, axes: &[Vec3; 3], cube: &CubeResult) -> Option<(f64, f64)> {
    let h = 0.5 * cube.edge;
    let coords: [(f64, f64); 3] = std::array::from_fn(|k| {
        let c = cube.center.dot(&axes[k]);
        (c - h, c + h)
    });
    let nearest_sq = |(a, b): (f64, f64)| if a <= 0.0 && b >= 0.0 { 0.0 } else { a.abs().min(b.abs()).powi(2) };
    let farthest_sq = |(a, b): (f64, f64)| a.abs().max(b.abs()).powi(2);
    let l2 = leg_length * leg_length;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let r_far = farthest_sq(coords[j]) + farthest_sq(coords[k]);
        let r_near = nearest_sq(coords[j]) + nearest_sq(coords[k]);
        if r_far > l2 {
            return None;
        }
        lo = lo.min(coords[i].0 + (l2 - r_far).sqrt());
        hi = hi.max(coords[i].1 + (l2 - r_near).sqrt());
    }
    Some((lo, hi))
}

fn feasible_at(l: f64, spec: &DesignSpec, m: usize, tol: &Tolerances) -> Result<Option<DesignReport>> {
    let r = evaluate_design(l, f64::NEG_INFINITY, f64::INFINITY, spec, m, tol)?;
    Ok(r.feasible.then_some(r))
}

/// Smallest feasible leg length on grid `m`, searched from `start` upward.
fn bisect_length(spec: &DesignSpec, m: usize, start: f64, tol: &Tolerances) -> Result<(f64, DesignReport)> {
    let edge = spec.required_edge;
    let max_l = MAX_SCALE * edge;
    let (mut lo, mut hi, mut hi_report);
    if let Some(r) = feasible_at(start, spec, m, tol)? {
        hi = start;
        hi_report = r;
        lo = start / 2.0;
        while let Some(r) = feasible_at(lo, spec, m, tol)? {
            hi = lo;
            hi_report = r;
            lo /= 2.0;
            if lo < edge * 1e-3 {
                break;
            }
        }
    } else {
        lo = start;
        hi = start * 2.0;
        loop {
            if hi > max_l {
                return Err(Error::Infeasible { max_l });
            }
            if let Some(r) = feasible_at(hi, spec, m, tol)? {
                hi_report = r;
                break;
            }
            lo = hi;
            hi *= 2.0;
        }
    }
    while (hi - lo) > RELATIVE_WIDTH * hi {
        let mid = 0.5 * (lo + hi);
        match feasible_at(mid, spec, m, tol)? {
            Some(r) => {
                hi = mid;
                hi_report = r;
            }
            None => lo = mid,
        }
    }
    Ok((hi, hi_report))
}

/// Sizes the leg length by bisection and derives the tight prismatic range.
///
/// The result is re-verified on a grid twice as fine as the sizing grid;
/// if that check fails the search resumes on the fine grid.
pub fn size_device(spec: &DesignSpec, tol: &Tolerances) -> Result<DesignResult> {
    spec.validate()?;
    if !(spec.psi > 1.0) {
        return Err(Error::InvalidParams("sizing needs psi > 1".into()));
    }
    let fine = 2 * DEFAULT_GRID - 1;
    let (mut l, mut report) = bisect_length(spec, DEFAULT_GRID, spec.required_edge, tol)?;
    if feasible_at(l, spec, fine, tol)?.is_none() {
        (l, report) = bisect_length(spec, fine, l, tol)?;
    }

    let axes = OrthoglideParams::default().axes;
    let (lo, hi) = rho_bounds(l, &axes, &report.cube).ok_or(Error::Infeasible { max_l: l })?;
    let (rho_min, rho_max) = (lo - spec.margin, hi + spec.margin);

    let check = Orthoglide::with_tolerances(
        OrthoglideParams {
            leg_length: l,
            rho_min,
            rho_max,
            axes,
        },
        *tol,
    );
    let (failures, sigma) = evaluate_cube(&check, &report.cube, fine);
    if failures.total() > 0 || !within_band(sigma, spec.psi, tol) {
        return Err(Error::Infeasible { max_l: l });
    }
    Ok(DesignResult {
        leg_length: l,
        rho_min,
        rho_max,
        cube: report.cube,
        worst_sigma: sigma,
    })
}
