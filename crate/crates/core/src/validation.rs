//! Self-check suites run by `orthohaptic check`.
//!
//! Every suite draws from a seeded generator and reports its worst error
//! against a limit multiplied by `tol_scale`, so the report is byte-identical
//! between runs and a zero scale makes the suites fail.

use std::f64::consts::{FRAC_PI_4, PI, TAU};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::design::{size_device, DesignSpec};
use crate::device::{device_fk, device_ik, device_jacobian, isotropic_home, DeviceParams, DevicePose, JointVector};
use crate::geometry::{max_abs, Mat3, Rot3, Tolerances, Vec3};
use crate::orthoglide::{sorted_singular_values, Orthoglide, PrismaticVector};
use crate::transmission::{wrap_pi, TransmissionState, UJointConfig};
use crate::workspace::{is_member, largest_cube, WorkspaceSpec};
use crate::wrist::{identity_error, HybridWrist, WristAngles, WristKind, WristLimits};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    pub seed: u64,
    /// Multiplies every pass threshold.
    pub tol_scale: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            seed: 20_06,
            tol_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: bool,
    pub worst: f64,
    pub limit: f64,
    pub note: String,
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<24} worst {:.3e} limit {:.3e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.worst,
            self.limit
        )?;
        if !self.note.is_empty() {
            write!(f, " ({})", self.note)?;
        }
        Ok(())
    }
}

fn report(name: &'static str, worst: f64, limit: f64, opts: &ValidationOptions, note: String) -> SuiteReport {
    let limit = limit * opts.tol_scale;
    SuiteReport {
        name,
        passed: worst.is_finite() && worst <= limit,
        worst,
        limit,
        note,
    }
}

/// Count-style suite: passes with no failures and a positive scale.
fn count_report(name: &'static str, failures: usize, opts: &ValidationOptions, note: String) -> SuiteReport {
    SuiteReport {
        name,
        passed: failures == 0 && opts.tol_scale > 0.0,
        worst: failures as f64,
        limit: 0.0,
        note,
    }
}

type Suite = fn(&ValidationOptions) -> SuiteReport;

const SUITES: &[(&str, Suite)] = &[
    ("rotation-algebra", rotation_algebra),
    ("translational-isotropy", translational_isotropy),
    ("wrist-isotropy", wrist_isotropy),
    ("decoupling", decoupling),
    ("round-trip", round_trip),
    ("jacobian-fd", jacobian_fd),
    ("workspace-oracle", workspace_oracle),
    ("inscribed-cube", inscribed_cube),
    ("transmission", transmission),
    ("wrist-limits", wrist_limits),
    ("sizing-scale", sizing_scale),
    ("sizing-monotone", sizing_monotone),
    ("home-axis", home_axis),
];

pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|(n, _)| *n).collect()
}

pub fn run_suite(name: &str, opts: &ValidationOptions) -> Option<SuiteReport> {
    SUITES.iter().find(|(n, _)| *n == name).map(|(_, f)| f(opts))
}

pub fn run_all(opts: &ValidationOptions) -> Vec<SuiteReport> {
    SUITES.iter().map(|(_, f)| f(opts)).collect()
}

fn rng(opts: &ValidationOptions, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(opts.seed);
    r.set_stream(stream);
    r
}

fn uniform_vec(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> Vec3 {
    Vec3::new(r.gen_range(lo..hi), r.gen_range(lo..hi), r.gen_range(lo..hi))
}

/// Random workspace point drawn from a box, rejecting non-members.
fn member_point(r: &mut ChaCha8Rng, spec: &WorkspaceSpec, lo: f64, hi: f64) -> Vec3 {
    loop {
        let p = uniform_vec(r, lo, hi);
        if is_member(&p, spec).member {
            return p;
        }
    }
}

fn random_rotation(r: &mut ChaCha8Rng, max_angle: f64) -> Rot3 {
    let axis = loop {
        let v = uniform_vec(r, -1.0, 1.0);
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            break v / n;
        }
    };
    Rot3::exp(&(axis * r.gen_range(0.0..max_angle)))
}

fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn rotation_algebra(opts: &ValidationOptions) -> SuiteReport {
    let mut r = rng(opts, 1);
    let mut worst: f64 = 0.0;
    let mut acc = Rot3::identity();
    for _ in 0..1000 {
        let step = random_rotation(&mut r, PI);
        worst = worst.max((Rot3::exp(&step.log()).angle_to(&step)).abs());
        acc = acc * step;
    }
    let m = acc.matrix();
    worst = worst.max(max_abs(&(m.transpose() * m - Mat3::identity())));
    report("rotation-algebra", worst, 1e-10, opts, "1000-step chain".into())
}

fn translational_isotropy(opts: &ValidationOptions) -> SuiteReport {
    let o = Orthoglide::default();
    let worst = match o.jacobian(&Vec3::zeros()) {
        Ok(j) => {
            let s = sorted_singular_values(&j);
            identity_error(&j).max(s.iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max))
        }
        Err(_) => f64::INFINITY,
    };
    report("translational-isotropy", worst, 1e-12, opts, String::new())
}

fn wrist_isotropy(opts: &ValidationOptions) -> SuiteReport {
    let mut worst: f64 = 0.0;
    for params in [DeviceParams::hybrid(), DeviceParams::spherical()] {
        let home = isotropic_home(&params);
        worst = worst.max(match device_jacobian(&home.q, &params) {
            Ok(j) => identity_error(&j.j_r).max(j.sigma_r.iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max)),
            Err(_) => f64::INFINITY,
        });
    }
    report("wrist-isotropy", worst, 1e-12, opts, "both variants".into())
}

fn random_joints(r: &mut ChaCha8Rng, params: &DeviceParams, spec: &WorkspaceSpec, box_half: f64) -> JointVector {
    let p = member_point(r, spec, -box_half, box_half);
    let rho = params.ortho.ik(&p).expect("member point has an IK solution");
    let lim = 0.95 * params.limits.max_angle;
    let gamma = match params.kind() {
        WristKind::Hybrid2R1R => [r.gen_range(-lim..lim), r.gen_range(-lim..lim), r.gen_range(-TAU..TAU)],
        WristKind::Spherical3R => [r.gen_range(-lim..lim), r.gen_range(-lim..lim), r.gen_range(-lim..lim)],
    };
    JointVector { rho, gamma }
}

fn decoupling(opts: &ValidationOptions) -> SuiteReport {
    let mut r = rng(opts, 2);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for params in [DeviceParams::hybrid(), DeviceParams::spherical()] {
        let spec = WorkspaceSpec::new(params.ortho);
        for _ in 0..500 {
            let q = random_joints(&mut r, &params, &spec, 0.4);
            let (Ok(base), Ok(jac)) = (device_fk(&q, &params), device_jacobian(&q, &params)) else {
                failures += 1;
                continue;
            };
            worst = worst.max(max_abs(&jac.coupling[0])).max(max_abs(&jac.coupling[1]));
            // motors alone never move the platform
            let mut moved = q;
            moved.gamma = moved.gamma.map(|g| g + 0.01);
            match device_fk(&moved, &params) {
                Ok(pose) => worst = worst.max((pose.p - base.p).amax()),
                Err(_) => failures += 1,
            }
            // prismatic joints alone never turn the stylus
            let mut slid = q;
            slid.rho = PrismaticVector(q.rho.0.map(|v| v + 1e-3));
            if let Ok(pose) = device_fk(&slid, &params) {
                worst = worst.max(pose.r.angle_to(&base.r));
            }
        }
    }
    if failures > 0 {
        worst = f64::INFINITY;
    }
    report("decoupling", worst, 1e-12, opts, "1000 configurations".into())
}

fn round_trip(opts: &ValidationOptions) -> SuiteReport {
    let mut r = rng(opts, 3);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for params in [DeviceParams::hybrid(), DeviceParams::spherical()] {
        let spec = WorkspaceSpec::new(params.ortho);
        let l = params.ortho.params.leg_length;
        let mut done = 0;
        while done < 10_000 {
            let p = member_point(&mut r, &spec, -0.5 * l, 0.5 * l);
            let rot = match params.kind() {
                WristKind::Hybrid2R1R => {
                    let lim = params.limits.max_angle;
                    Rot3::about_x(r.gen_range(-lim..lim))
                        * Rot3::about_y(r.gen_range(-lim..lim))
                        * Rot3::about_z(r.gen_range(-3.0 * PI..3.0 * PI))
                }
                WristKind::Spherical3R => random_rotation(&mut r, 0.6),
            };
            let pose = DevicePose {
                p,
                r: rot * params.variant.mount,
            };
            let Ok(q) = device_ik(&pose, &params) else {
                continue;
            };
            done += 1;
            match device_fk(&q, &params) {
                Ok(back) => {
                    worst = worst
                        .max((back.p - pose.p).norm() / l)
                        .max(back.r.angle_to(&pose.r));
                }
                Err(_) => failures += 1,
            }
        }
    }
    if failures > 0 {
        worst = f64::INFINITY;
    }
    report("round-trip", worst, 1e-9, opts, "10000 poses per variant".into())
}

fn rotation_fd(params: &DeviceParams, q: &JointVector, k: usize, h: f64) -> Option<Vec3> {
    let mut plus = *q;
    let mut minus = *q;
    plus.gamma[k] += h;
    minus.gamma[k] -= h;
    let rp = device_fk(&plus, params).ok()?.r;
    let rm = device_fk(&minus, params).ok()?.r;
    Some((rp * rm.transpose()).log() / (2.0 * h))
}

fn translation_fd(params: &DeviceParams, q: &JointVector, k: usize, h: f64) -> Option<Vec3> {
    let mut plus = *q;
    let mut minus = *q;
    plus.rho.0[k] += h;
    minus.rho.0[k] -= h;
    let pp = device_fk(&plus, params).ok()?.p;
    let pm = device_fk(&minus, params).ok()?.p;
    Some((pp - pm) / (2.0 * h))
}

fn jacobian_fd(opts: &ValidationOptions) -> SuiteReport {
    let mut r = rng(opts, 4);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for params in [DeviceParams::hybrid(), DeviceParams::spherical()] {
        let spec = WorkspaceSpec::new(params.ortho);
        for _ in 0..100 {
            let q = random_joints(&mut r, &params, &spec, 0.35);
            let Ok(jac) = device_jacobian(&q, &params) else {
                worst = f64::INFINITY;
                continue;
            };
            for k in 0..3 {
                match (translation_fd(&params, &q, k, h), rotation_fd(&params, &q, k, h)) {
                    (Some(t), Some(w)) => {
                        for row in 0..3 {
                            worst = worst
                                .max(relative_error(jac.j_t[(row, k)], t[row]))
                                .max(relative_error(jac.j_r[(row, k)], w[row]));
                        }
                    }
                    _ => worst = f64::INFINITY,
                }
            }
        }
    }
    report("jacobian-fd", worst, 1e-6, opts, "100 configurations per variant".into())
}

/// Membership from the sphere constraints alone: larger quadratic root per
/// leg, range check, and the sign of the leg-direction triple product.
fn sphere_oracle(p: &Vec3, o: &Orthoglide) -> bool {
    let l = o.params.leg_length;
    let mut dirs = [Vec3::zeros(); 3];
    for (i, e) in o.params.axes.iter().enumerate() {
        // ρ² − 2ρ(p·e) + |p|² − L² = 0
        let b = p.dot(e);
        let disc = b * b - (p.norm_squared() - l * l);
        if disc < -1e-9 * l * l {
            return false;
        }
        let rho = b + disc.max(0.0).sqrt();
        if rho < o.params.rho_min - 1e-9 * l || rho > o.params.rho_max + 1e-9 * l {
            return false;
        }
        dirs[i] = (p - e * rho) / l;
    }
    let triple = dirs[0].dot(&dirs[1].cross(&dirs[2]));
    let home = (-o.params.axes[0]).dot(&(-o.params.axes[1]).cross(&(-o.params.axes[2])));
    triple * home.signum() > o.tol.singular
}

fn workspace_oracle(opts: &ValidationOptions) -> SuiteReport {
    let o = Orthoglide::default();
    let spec = WorkspaceSpec::new(o);
    let n = 41;
    let l = o.params.leg_length;
    let at = |k: usize| -l + 2.0 * l * k as f64 / (n - 1) as f64;
    let mismatches: usize = (0..n * n * n)
        .into_par_iter()
        .filter(|idx| {
            let p = Vec3::new(at(idx / (n * n)), at((idx / n) % n), at(idx % n));
            is_member(&p, &spec).member != sphere_oracle(&p, &o)
        })
        .count();
    count_report("workspace-oracle", mismatches, opts, format!("{n}^3 grid"))
}

/// Largest cube of member samples on an n³ grid over [−L, L]³, counting
/// samples per side times the spacing as the edge.
pub fn dense_cube_edge(o: &Orthoglide, n: usize) -> f64 {
    let l = o.params.leg_length;
    let step = 2.0 * l / (n - 1) as f64;
    let at = |k: usize| -l + step * k as f64;
    let member: Vec<bool> = (0..n * n * n)
        .into_par_iter()
        .map(|idx| sphere_oracle(&Vec3::new(at(idx / (n * n)), at((idx / n) % n), at(idx % n)), o))
        .collect();
    // prefix sums of non-members, padded by one
    let m = n + 1;
    let mut bad = vec![0u32; m * m * m];
    let id = |i: usize, j: usize, k: usize| (i * m + j) * m + k;
    for i in 1..m {
        for j in 1..m {
            for k in 1..m {
                let own = u32::from(!member[((i - 1) * n + (j - 1)) * n + (k - 1)]);
                bad[id(i, j, k)] = own + bad[id(i - 1, j, k)] + bad[id(i, j - 1, k)] + bad[id(i, j, k - 1)]
                    - bad[id(i - 1, j - 1, k)]
                    - bad[id(i - 1, j, k - 1)]
                    - bad[id(i, j - 1, k - 1)]
                    + bad[id(i - 1, j - 1, k - 1)];
            }
        }
    }
    let fits = |i: usize, j: usize, k: usize, s: usize| {
        let (a, b, c) = (i + s, j + s, k + s);
        bad[id(a, b, c)] + bad[id(i, j, c)] + bad[id(i, b, k)] + bad[id(a, j, k)]
            - bad[id(i, b, c)]
            - bad[id(a, j, c)]
            - bad[id(a, b, k)]
            - bad[id(i, j, k)]
            == 0
    };
    // every anchor, growing a running best: one query per anchor plus one per growth
    let mut best = 0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                while i.max(j).max(k) + best < n && fits(i, j, k, best + 1) {
                    best += 1;
                }
            }
        }
    }
    best as f64 * step
}

fn inscribed_cube(opts: &ValidationOptions) -> SuiteReport {
    let o = Orthoglide::default();
    let spec = WorkspaceSpec::new(o);
    let Ok(cube) = largest_cube(&spec, 17) else {
        return report("inscribed-cube", f64::INFINITY, 0.01, opts, "no cube".into());
    };
    let dense = dense_cube_edge(&o, 201);
    let mut worst = (cube.edge - dense).abs() / dense;
    let bad_corners = cube
        .corners(&o.params.axes)
        .iter()
        .filter(|c| !is_member(c, &spec).member)
        .count();
    if bad_corners > 0 || !cube.axis_aligned {
        worst = f64::INFINITY;
    }
    report(
        "inscribed-cube",
        worst,
        0.01,
        opts,
        format!("edge {:.6} vs dense {:.6}", cube.edge, dense),
    )
}

fn transmission(opts: &ValidationOptions) -> SuiteReport {
    let mut r = rng(opts, 5);
    let tol = Tolerances::default();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let beta = r.gen_range(0.0..60f64.to_radians());
        let theta = r.gen_range(-4.0 * PI..4.0 * PI);
        let chain = TransmissionState::z_config(1, beta, r.gen_range(-PI..PI));
        match chain.output(theta, &tol) {
            Ok(out) => worst = worst.max((out.angle - theta).abs()),
            Err(_) => worst = f64::INFINITY,
        }
        let joint = UJointConfig::new(beta, 0.0);
        match joint.output(theta, &tol) {
            Ok(out) => {
                // tan(out)·cos β = tan(in), written without the poles
                let (so, co) = out.sin_cos();
                let (si, ci) = theta.sin_cos();
                worst = worst.max((so * ci * beta.cos() - co * si).abs());
                if wrap_pi(out - theta).abs() >= PI / 2.0 {
                    worst = f64::INFINITY;
                }
            }
            Err(_) => worst = f64::INFINITY,
        }
    }
    report("transmission", worst, 1e-12, opts, "1000 samples, beta <= 60 deg".into())
}

fn wrist_limits(opts: &ValidationOptions) -> SuiteReport {
    let tol = Tolerances::default();
    let wrist = HybridWrist {
        limits: WristLimits::default(),
        tol,
    };
    let beyond = FRAC_PI_4 + 1e3 * tol.residual;
    let mut failures = 0;
    for (pitch, yaw) in [(beyond, 0.0), (-beyond, 0.0), (0.0, beyond), (0.0, -beyond), (1.0, 1.0)] {
        let r = Rot3::about_x(pitch) * Rot3::about_y(yaw);
        if wrist.ik(&r).is_ok() {
            failures += 1;
        }
    }
    for roll in [-1e3, -7.0, -PI, 0.0, 0.5, PI, 100.0, 1e4] {
        let a = WristAngles::new(FRAC_PI_4, -FRAC_PI_4, roll);
        match wrist.fk(&a).and_then(|r| wrist.ik(&r)) {
            Ok(back) if (wrap_pi(back.roll - roll)).abs() < 1e-9 => {}
            _ => failures += 1,
        }
    }
    count_report("wrist-limits", failures, opts, "pitch/yaw at 45 deg, roll unlimited".into())
}

fn sizing_scale(opts: &ValidationOptions) -> SuiteReport {
    let tol = Tolerances::default();
    let base_edge = 0.5;
    let size = |edge: f64| {
        DesignSpec::new(edge, 2.0, 0.0)
            .and_then(|s| size_device(&s, &tol))
            .map(|d| d.leg_length)
    };
    let Ok(base) = size(base_edge) else {
        return report("sizing-scale", f64::INFINITY, 1e-6, opts, "base design failed".into());
    };
    let worst = [0.5, 2.0, 10.0]
        .iter()
        .map(|k| match size(k * base_edge) {
            Ok(l) => (l / (k * base) - 1.0).abs(),
            Err(_) => f64::INFINITY,
        })
        .fold(0.0, f64::max);
    report("sizing-scale", worst, 1e-6, opts, "k in {0.5, 2, 10}".into())
}

fn sizing_monotone(opts: &ValidationOptions) -> SuiteReport {
    let tol = Tolerances::default();
    let lengths: Vec<f64> = [1.5, 2.0, 3.0]
        .iter()
        .map(|&psi| {
            DesignSpec::new(0.5, psi, 0.0)
                .and_then(|s| size_device(&s, &tol))
                .map_or(f64::INFINITY, |d| d.leg_length)
        })
        .collect();
    let violations = lengths.windows(2).filter(|w| !(w[1] <= w[0])).count();
    count_report("sizing-monotone", violations, opts, "psi in {1.5, 2, 3}".into())
}

fn home_axis(opts: &ValidationOptions) -> SuiteReport {
    let home = isotropic_home(&DeviceParams::spherical());
    let axis_err = (home.axis - Vec3::repeat(1.0).normalize()).amax();
    let angle_err = (home.axis_tilt - (1.0 / 3f64.sqrt()).acos()).abs();
    // axis within 1e-12 and tilt within 1e-9, as one normalized error
    let worst = (axis_err / 1e-12).max(angle_err / 1e-9);
    report(
        "home-axis",
        worst,
        1.0,
        opts,
        format!("tilt {:.4} deg", home.axis_tilt.to_degrees()),
    )
}
