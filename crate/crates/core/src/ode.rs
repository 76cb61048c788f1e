//! The linear second-order machinery behind meromorphic reconstruction:
//! solve w'' + (1/2) p w = 0 along complex paths with an embedded adaptive
//! Runge--Kutta pair, rebuild meromorphic functions as quotients of two
//! solutions, track Wronskian constancy, and expose the residue invariant
//! that obstructs entire-coefficient approximation on non-convex compacts.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::extended::ExtComplex;
use crate::geometry::{
    chordal_sup_distance, contour_integral, interior_grid, CompactRegion, Contour, TAU,
};
use crate::linalg::complex_lstsq;
use crate::rational::{certify_local_univalence, schwarzian, Polynomial, RationalFunction};
use crate::runge::ApproximationReport;
use nalgebra::{DMatrix, DVector};

/// The equation w'' + (1/2) p(z) w = 0 with polynomial coefficient p.
///
/// The coefficient is stored in an affine frame u = (z - center)/scale and
/// evaluated as p(z) = P(u): expanding a scaled fit into plain monomials
/// would amplify coefficient noise by scale^{-degree}.
#[derive(Debug, Clone)]
pub struct SchwarzianOde {
    pub coefficient: Polynomial,
    frame_center: Complex64,
    frame_scale: f64,
}

impl SchwarzianOde {
    pub fn new(coefficient: Polynomial) -> Self {
        SchwarzianOde {
            coefficient,
            frame_center: Complex64::new(0.0, 0.0),
            frame_scale: 1.0,
        }
    }

    pub fn scaled(coefficient: Polynomial, center: Complex64, scale: f64) -> Self {
        SchwarzianOde {
            coefficient,
            frame_center: center,
            frame_scale: scale,
        }
    }

    pub fn eval_coefficient(&self, z: Complex64) -> Complex64 {
        self.coefficient
            .eval((z - self.frame_center) / self.frame_scale)
    }
}

/// Solution values (w, w') recorded on the refined nodes of a path.
#[derive(Debug, Clone)]
pub struct PathSolution {
    pub path: Vec<Complex64>,
    pub values: Vec<(Complex64, Complex64)>,
    pub tolerance: f64,
}

/// Initial data for reconstructing f = u1/u2 at a base point.
#[derive(Debug, Clone, Copy)]
pub struct ReconstructionFrame {
    pub base_point: Complex64,
    pub init_u1: (Complex64, Complex64),
    pub init_u2: (Complex64, Complex64),
}

impl ReconstructionFrame {
    pub fn new(
        base_point: Complex64,
        init_u1: (Complex64, Complex64),
        init_u2: (Complex64, Complex64),
    ) -> Result<Self> {
        let w = init_u1.0 * init_u2.1 - init_u1.1 * init_u2.0;
        if w.norm() < 1e-12 {
            return Err(Error::DegenerateFrame { wronskian: w.norm() });
        }
        Ok(ReconstructionFrame {
            base_point,
            init_u1,
            init_u2,
        })
    }
}

// Dormand-Prince 5(4) tableau
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

type State = (Complex64, Complex64);

fn rhs(ode: &SchwarzianOde, z: Complex64, y: State, dir: Complex64) -> State {
    let (w, wp) = y;
    (wp * dir, -0.5 * ode.eval_coefficient(z) * w * dir)
}

fn add(y: State, k: State, s: f64) -> State {
    (y.0 + k.0 * s, y.1 + k.1 * s)
}

fn state_norm(y: State) -> f64 {
    y.0.norm().max(y.1.norm())
}

/// One adaptive leg from `a` to `b` (straight), starting from `y`.
fn integrate_segment(
    ode: &SchwarzianOde,
    a: Complex64,
    b: Complex64,
    mut y: State,
    tol: f64,
    total_length: f64,
) -> Result<State> {
    let len = (b - a).norm();
    if len == 0.0 {
        return Ok(y);
    }
    let dir = (b - a) / len;
    let mut t = 0.0f64;
    let mut h = len.min(0.1_f64.max(1e-3 * len));
    while t < len {
        if h < 1e-12 * total_length {
            return Err(Error::StepUnderflow { position: t });
        }
        h = h.min(len - t);
        let z0 = a + dir * t;
        let mut k = [(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); 7];
        k[0] = rhs(ode, z0, y, dir);
        for stage in 1..7 {
            let mut ys = y;
            if stage < 7 {
                let row = if stage == 6 {
                    // stage 7 uses the 5th-order weights (FSAL structure)
                    [
                        DP_B5[0], DP_B5[1], DP_B5[2], DP_B5[3], DP_B5[4], DP_B5[5],
                    ]
                } else {
                    DP_A[stage - 1]
                };
                for (j, &aij) in row.iter().enumerate().take(stage) {
                    if aij != 0.0 {
                        ys = add(ys, k[j], aij * h);
                    }
                }
            }
            let zs = a + dir * (t + DP_C[stage] * h);
            k[stage] = rhs(ode, zs, ys, dir);
        }
        let mut y5 = y;
        let mut y4 = y;
        for j in 0..7 {
            if DP_B5[j] != 0.0 {
                y5 = add(y5, k[j], DP_B5[j] * h);
            }
            if DP_B4[j] != 0.0 {
                y4 = add(y4, k[j], DP_B4[j] * h);
            }
        }
        let err = state_norm((y5.0 - y4.0, y5.1 - y4.1));
        let allowed = tol * h * state_norm(y5).max(1.0);
        // rounding floor: a residual at machine-noise level is as good as it
        // gets and must not trigger endless step rejection
        let noise = 32.0 * f64::EPSILON * state_norm(y5).max(1.0);
        if err <= allowed.max(noise) {
            t += h;
            y = y5;
            if len - t < 1e-15 * len {
                break;
            }
            let grow = if err > 0.0 {
                0.9 * (allowed.max(noise) / err).powf(0.2)
            } else {
                5.0
            };
            h *= grow.clamp(0.2, 5.0);
        } else {
            h *= (0.9 * (allowed / err).powf(0.2)).clamp(0.1, 0.9);
        }
    }
    Ok(y)
}

/// Deterministic node refinement with a coefficient-aware step bound.
fn refine_path(ode: &SchwarzianOde, path: &[Complex64]) -> Vec<Complex64> {
    let mut nodes = vec![path[0]];
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = (b - a).norm();
        if len == 0.0 {
            continue;
        }
        let p_scale = [0.0, 0.5, 1.0]
            .iter()
            .map(|&t| ode.eval_coefficient(a + (b - a) * t).norm())
            .fold(0.0, f64::max);
        let bound = 0.35 / (1.0 + 0.5 * p_scale).sqrt();
        let pieces = (len / bound).ceil().max(1.0) as usize;
        for k in 1..=pieces {
            nodes.push(a + (b - a) * (k as f64 / pieces as f64));
        }
    }
    nodes
}

/// Adaptive integration of the initial value problem along a polyline,
/// recording (w, w') at every refined node. Local error per unit length is
/// kept at or below `tol`.
pub fn solve_ivp_along(
    ode: &SchwarzianOde,
    path: &[Complex64],
    init: State,
    tol: f64,
) -> Result<PathSolution> {
    if !(1e-13..=1e-6).contains(&tol) {
        return Err(Error::InvalidTolerance {
            value: tol,
            min: 1e-13,
            max: 1e-6,
        });
    }
    if path.is_empty() {
        return Err(Error::Config("empty integration path".into()));
    }
    let nodes = refine_path(ode, path);
    let total: f64 = nodes.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    let total = total.max(1e-300);
    let mut values = Vec::with_capacity(nodes.len());
    let mut y = init;
    values.push(y);
    for w in nodes.windows(2) {
        y = integrate_segment(ode, w[0], w[1], y, tol, total)?;
        values.push(y);
    }
    Ok(PathSolution {
        path: nodes,
        values,
        tolerance: tol,
    })
}

/// Max relative deviation of the Wronskian u1 u2' - u1' u2 from its value at
/// the first node; identically constant for exact solutions of the same
/// equation.
pub fn wronskian_drift(s1: &PathSolution, s2: &PathSolution) -> Result<f64> {
    if s1.path.len() != s2.path.len()
        || s1
            .path
            .iter()
            .zip(&s2.path)
            .any(|(a, b)| (a - b).norm() > 1e-12)
    {
        return Err(Error::PathMismatch);
    }
    let w_at = |i: usize| {
        let (u1, u1p) = s1.values[i];
        let (u2, u2p) = s2.values[i];
        u1 * u2p - u1p * u2
    };
    let w0 = w_at(0);
    if w0.norm() < 1e-12 {
        return Err(Error::DegenerateFrame { wronskian: w0.norm() });
    }
    let mut drift = 0.0f64;
    for i in 0..s1.path.len() {
        drift = drift.max((w_at(i) - w0).norm() / w0.norm());
    }
    Ok(drift)
}

/// Meromorphic evaluator f = u1/u2 built from the coefficient and a frame.
/// Every evaluation solves both initial value problems along a straight path
/// from the base point, with a midpoint detour when the path passes within
/// 1e-6 of a detected zero of u2.
#[derive(Debug, Clone)]
pub struct SchwarzianReconstruction {
    pub ode: SchwarzianOde,
    pub frame: ReconstructionFrame,
    pub tolerance: f64,
}

impl SchwarzianReconstruction {
    pub fn eval(&self, z: Complex64) -> Result<ExtComplex> {
        let z0 = self.frame.base_point;
        if (z - z0).norm() == 0.0 {
            return Ok(self.quotient(self.frame.init_u1.0, self.frame.init_u2.0));
        }
        let straight = vec![z0, z];
        let u2 = solve_ivp_along(&self.ode, &straight, self.frame.init_u2, self.tolerance)?;
        let path = if let Some(zero) = self.detect_zero_near_path(&u2, &straight) {
            let mid = (z0 + z) / 2.0;
            let dir = (z - z0) / (z - z0).norm();
            let offset = Complex64::new(0.0, 1.0) * dir * (0.05 * (z - z0).norm()).max(1e-3);
            let _ = zero;
            Some(vec![z0, mid + offset, z])
        } else {
            None
        };
        let (u1_fin, u2_fin) = match path {
            Some(p) => {
                let u1 = solve_ivp_along(&self.ode, &p, self.frame.init_u1, self.tolerance)?;
                let u2 = solve_ivp_along(&self.ode, &p, self.frame.init_u2, self.tolerance)?;
                (*u1.values.last().unwrap(), *u2.values.last().unwrap())
            }
            None => {
                let u1 =
                    solve_ivp_along(&self.ode, &straight, self.frame.init_u1, self.tolerance)?;
                (*u1.values.last().unwrap(), *u2.values.last().unwrap())
            }
        };
        Ok(self.quotient(u1_fin.0, u2_fin.0))
    }

    fn quotient(&self, u1: Complex64, u2: Complex64) -> ExtComplex {
        if u2.norm() <= 1e-12 * u1.norm().max(1e-300) {
            ExtComplex::Infinity
        } else {
            ExtComplex::from(u1 / u2)
        }
    }

    /// Newton estimate of a u2 zero from the node of smallest magnitude;
    /// interior zeros within 1e-6 of the path trigger a detour.
    fn detect_zero_near_path(
        &self,
        u2: &PathSolution,
        path: &[Complex64],
    ) -> Option<Complex64> {
        let mut min_idx = 0;
        for (i, v) in u2.values.iter().enumerate() {
            if v.0.norm() < u2.values[min_idx].0.norm() {
                min_idx = i;
            }
        }
        if min_idx == 0 || min_idx + 1 == u2.values.len() {
            return None;
        }
        let (w, wp) = u2.values[min_idx];
        if wp.norm() == 0.0 {
            return None;
        }
        let zero = u2.path[min_idx] - w / wp;
        let dist = path
            .windows(2)
            .map(|s| {
                let ab = s[1] - s[0];
                let t = (((zero - s[0]).re * ab.re + (zero - s[0]).im * ab.im)
                    / ab.norm_sqr().max(1e-300))
                .clamp(0.0, 1.0);
                (zero - (s[0] + ab * t)).norm()
            })
            .fold(f64::INFINITY, f64::min);
        if dist < 1e-6 {
            Some(zero)
        } else {
            None
        }
    }
}

/// Build the quotient evaluator for the given equation and frame.
pub fn reconstruct_from_schwarzian(
    ode: &SchwarzianOde,
    frame: &ReconstructionFrame,
) -> SchwarzianReconstruction {
    SchwarzianReconstruction {
        ode: ode.clone(),
        frame: *frame,
        tolerance: 1e-11,
    }
}

fn frame_from_target(f: &RationalFunction, region: &CompactRegion) -> Result<ReconstructionFrame> {
    // deterministic search for a base point where f is finite and f' is
    // healthy
    let outer = region.outer_circles();
    let c0 = outer[0].center;
    let r0 = outer[0].radius;
    let mut candidates = vec![c0];
    for &scale in &[0.25, 0.5, 0.125, 0.375] {
        for j in 0..8 {
            candidates.push(c0 + r0 * scale * Complex64::from_polar(1.0, TAU * j as f64 / 8.0));
        }
    }
    let fp = f.derivative();
    let fpp = fp.derivative();
    for z0 in candidates {
        if !region.contains(z0) {
            continue;
        }
        let (fv, fpv, fppv) = match (f.eval(z0).finite(), fp.eval(z0).finite(), fpp.eval(z0).finite())
        {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => continue,
        };
        if fpv.norm() < 1e-8 {
            continue;
        }
        // u2 = (f')^{-1/2}, u1 = f u2: the exact quotient recovers f
        let sqrt_fp = fpv.sqrt();
        let u2 = 1.0 / sqrt_fp;
        let u2p = -0.5 * fppv / (sqrt_fp * fpv);
        let u1 = fv * u2;
        let u1p = sqrt_fp + fv * u2p;
        return ReconstructionFrame::new(z0, (u1, u1p), (u2, u2p));
    }
    Err(Error::InvalidRegion(
        "no admissible base point for the reconstruction frame".into(),
    ))
}

/// Chordal Runge approximation by entire-coefficient reconstruction: fit the
/// exact Schwarzian by polynomials of escalating degree, solve the
/// reconstruction with the frame taken from the target, certify the chordal
/// distance on an interior grid.
pub fn meromorphic_lu_runge(
    f: &RationalFunction,
    region: &CompactRegion,
    eps: f64,
    degree_cap: usize,
) -> Result<(SchwarzianReconstruction, ApproximationReport)> {
    match region {
        CompactRegion::Disk(_) | CompactRegion::DiskUnion(_) => {}
        _ => return Err(Error::ComplementNotConnected),
    }
    let cert = certify_local_univalence(f, region)?;
    if !cert.verdict {
        return Err(Error::NotLocallyUnivalent);
    }
    let s_f = schwarzian(f)?;
    for p in s_f.poles()? {
        if region.contains(p) || region.boundary_distance(p) < 1e-8 {
            return Err(Error::BoundaryDegeneracy {
                dist: region.boundary_distance(p),
            });
        }
    }
    let frame = frame_from_target(f, region)?;

    let outer = region.outer_circles();
    let center = outer.iter().map(|c| c.center).sum::<Complex64>() / outer.len() as f64;
    let scale = outer
        .iter()
        .map(|c| (c.center - center).norm() + c.radius)
        .fold(0.0, f64::max);
    let min_radius = outer.iter().map(|c| c.radius).fold(f64::INFINITY, f64::min);
    let grid = interior_grid(region, min_radius / 8.0)?;

    let target_eval = |z: Complex64| f.eval(z);

    let mut best_err = f64::INFINITY;
    let mut best: Option<(SchwarzianReconstruction, ApproximationReport)> = None;
    let mut degree = 8usize;
    while degree <= degree_cap {
        // scaled-monomial least squares on the boundary circles; on a single
        // circle these columns are exactly orthogonal
        let n = crate::geometry::default_node_count(degree);
        let mut points = Vec::new();
        for c in &outer {
            for k in 0..n {
                let theta = TAU * k as f64 / n as f64;
                points.push(c.center + c.radius * Complex64::from_polar(1.0, theta));
            }
        }
        let mut matrix = DMatrix::from_element(points.len(), degree + 1, Complex64::new(0.0, 0.0));
        let mut rhs = DVector::from_element(points.len(), Complex64::new(0.0, 0.0));
        for (i, &z) in points.iter().enumerate() {
            let u = (z - center) / scale;
            let mut pw = Complex64::new(1.0, 0.0);
            for j in 0..=degree {
                matrix[(i, j)] = pw;
                pw *= u;
            }
            rhs[i] = s_f.eval_finite(z)?;
        }
        let (coeffs, _cond) = complex_lstsq(&matrix, &rhs)?;
        let p = Polynomial::new(coeffs.iter().copied().collect());
        let ode = SchwarzianOde::scaled(p, center, scale);
        let reconstruction = reconstruct_from_schwarzian(&ode, &frame);
        let recon_eval = |z: Complex64| {
            reconstruction
                .eval(z)
                .unwrap_or(ExtComplex::Infinity)
        };
        let err = chordal_sup_distance(&recon_eval, &target_eval, &grid);
        let report = ApproximationReport {
            degree_used: degree,
            certified_sup_error: err,
            newton_iterations: 0,
            final_residual_norm: 0.0,
            samples_used: grid.points.len(),
        };
        if err < best_err {
            best_err = err;
            best = Some((reconstruction, report));
        }
        if err <= eps {
            return Ok(best.unwrap());
        }
        degree *= 2;
    }
    let _ = best;
    Err(Error::DegreeCapExceeded {
        cap: degree_cap,
        best_error: best_err,
    })
}

/// Residue-type invariant: the contour integral of S(z) (z - center) dz.
/// Subtracting any function holomorphic inside the contour leaves it
/// unchanged; a nonzero value certifies that entire Schwarzians cannot
/// converge to S uniformly on the contour.
pub fn obstruction_residue(s: &RationalFunction, contour: &Contour) -> Result<Complex64> {
    for p in s.poles()? {
        if ((p - contour.center).norm() - contour.radius).abs() < 1e-8 * (1.0 + p.norm()) {
            return Err(Error::PoleOnContour);
        }
    }
    contour_integral(
        &|z| match s.eval(z) {
            ExtComplex::Finite(v) => ExtComplex::from(v * (z - contour.center)),
            ExtComplex::Infinity => ExtComplex::Infinity,
        },
        contour,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn constant_ode(value: f64) -> SchwarzianOde {
        SchwarzianOde::new(Polynomial::constant(c(value, 0.0)))
    }

    #[test]
    fn ivp_with_zero_coefficient_is_linear() {
        let sol = solve_ivp_along(
            &constant_ode(0.0),
            &[c(0.0, 0.0), c(1.0, 0.0)],
            (c(0.0, 0.0), c(1.0, 0.0)),
            1e-10,
        )
        .unwrap();
        let (w, wp) = *sol.values.last().unwrap();
        assert!((w - c(1.0, 0.0)).norm() < 1e-12);
        assert!((wp - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn ivp_reproduces_exponential() {
        // p = -1/2 gives w'' = w/4 with solution e^{z/2}
        let sol = solve_ivp_along(
            &constant_ode(-0.5),
            &[c(0.0, 0.0), c(2.0, 0.0)],
            (c(1.0, 0.0), c(0.5, 0.0)),
            1e-10,
        )
        .unwrap();
        let (w, _) = *sol.values.last().unwrap();
        assert!(
            (w - c(std::f64::consts::E, 0.0)).norm() < 1e-8,
            "w(2) = {w}"
        );
    }

    #[test]
    fn ivp_reproduces_sine() {
        // p = 2 gives w'' = -w with solution sin z
        let sol = solve_ivp_along(
            &constant_ode(2.0),
            &[c(0.0, 0.0), c(std::f64::consts::FRAC_PI_2, 0.0)],
            (c(0.0, 0.0), c(1.0, 0.0)),
            1e-10,
        )
        .unwrap();
        let (w, _) = *sol.values.last().unwrap();
        assert!((w - c(1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn tolerance_range_is_enforced() {
        assert!(matches!(
            solve_ivp_along(
                &constant_ode(0.0),
                &[c(0.0, 0.0), c(1.0, 0.0)],
                (c(0.0, 0.0), c(1.0, 0.0)),
                1e-3,
            ),
            Err(Error::InvalidTolerance { .. })
        ));
    }

    #[test]
    fn reconstruction_of_identity() {
        let frame = ReconstructionFrame::new(
            c(0.0, 0.0),
            (c(0.0, 0.0), c(1.0, 0.0)),
            (c(1.0, 0.0), c(0.0, 0.0)),
        )
        .unwrap();
        let rec = reconstruct_from_schwarzian(&constant_ode(0.0), &frame);
        let v = rec.eval(c(0.7, 0.0)).unwrap().finite().unwrap();
        assert!((v - c(0.7, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn reconstruction_of_tangent() {
        let frame = ReconstructionFrame::new(
            c(0.0, 0.0),
            (c(0.0, 0.0), c(1.0, 0.0)),
            (c(1.0, 0.0), c(0.0, 0.0)),
        )
        .unwrap();
        let rec = reconstruct_from_schwarzian(&constant_ode(2.0), &frame);
        let v = rec
            .eval(c(std::f64::consts::FRAC_PI_4, 0.0))
            .unwrap()
            .finite()
            .unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-8, "tan(pi/4) = {v}");
    }

    #[test]
    fn reconstruction_of_exp_minus_one() {
        // u1 = e^{z/2} - e^{-z/2}, u2 = e^{-z/2}: quotient e^z - 1
        let frame = ReconstructionFrame::new(
            c(0.0, 0.0),
            (c(0.0, 0.0), c(1.0, 0.0)),
            (c(1.0, 0.0), c(-0.5, 0.0)),
        )
        .unwrap();
        let rec = reconstruct_from_schwarzian(&constant_ode(-0.5), &frame);
        let v = rec.eval(c(1.0, 0.0)).unwrap().finite().unwrap();
        let expected = std::f64::consts::E - 1.0;
        assert!((v - c(expected, 0.0)).norm() < 1e-8, "f(1) = {v}");
    }

    #[test]
    fn wronskian_examples() {
        let path = [c(0.0, 0.0), c(2.0, 0.0)];
        // p = 0: solutions z and 1
        let s1 = solve_ivp_along(&constant_ode(0.0), &path, (c(0.0, 0.0), c(1.0, 0.0)), 1e-10)
            .unwrap();
        let s2 = solve_ivp_along(&constant_ode(0.0), &path, (c(1.0, 0.0), c(0.0, 0.0)), 1e-10)
            .unwrap();
        assert!(wronskian_drift(&s1, &s2).unwrap() <= 1e-10);
        // p = 2: sin and cos
        let s1 = solve_ivp_along(&constant_ode(2.0), &path, (c(0.0, 0.0), c(1.0, 0.0)), 1e-9)
            .unwrap();
        let s2 = solve_ivp_along(&constant_ode(2.0), &path, (c(1.0, 0.0), c(0.0, 0.0)), 1e-9)
            .unwrap();
        assert!(wronskian_drift(&s1, &s2).unwrap() <= 1e-8);
        // identical solutions degenerate
        assert!(matches!(
            wronskian_drift(&s1, &s1),
            Err(Error::DegenerateFrame { .. })
        ));
    }

    #[test]
    fn meromorphic_runge_on_moebius_target() {
        let f = RationalFunction::reciprocal();
        let region = CompactRegion::disk(c(2.0, 0.0), 1.0).unwrap();
        let (_, report) = meromorphic_lu_runge(&f, &region, 1e-10, 64).unwrap();
        assert!(report.certified_sup_error <= 1e-10);
    }

    #[test]
    fn meromorphic_runge_through_simple_pole() {
        // f = z + 1/z on the half-disk-sized compact containing the pole
        let f = RationalFunction::new(
            Polynomial::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]),
            Polynomial::identity(),
        )
        .unwrap();
        let region = CompactRegion::disk(c(0.0, 0.0), 0.5).unwrap();
        let (_, report) = meromorphic_lu_runge(&f, &region, 1e-6, 128).unwrap();
        assert!(
            report.certified_sup_error <= 1e-6,
            "chordal error {}",
            report.certified_sup_error
        );
    }

    #[test]
    fn meromorphic_runge_rejects_annulus() {
        let f = RationalFunction::new(
            Polynomial::constant(c(-1.0, 0.0)),
            Polynomial::monomial(2, c(1.0, 0.0)),
        )
        .unwrap();
        let region = CompactRegion::annulus(c(0.0, 0.0), 0.5, 2.0).unwrap();
        assert!(matches!(
            meromorphic_lu_runge(&f, &region, 1e-6, 64),
            Err(Error::ComplementNotConnected)
        ));
    }

    #[test]
    fn obstruction_residue_of_inverse_square_schwarzian() {
        // S = -3/(2 z^2): the invariant is -3 pi i
        let s = RationalFunction::new(
            Polynomial::constant(c(-1.5, 0.0)),
            Polynomial::monomial(2, c(1.0, 0.0)),
        )
        .unwrap();
        let gamma = Contour::new(c(0.0, 0.0), 1.0, 1, 512).unwrap();
        let v = obstruction_residue(&s, &gamma).unwrap();
        let expected = c(0.0, -3.0 * std::f64::consts::PI);
        assert!((v - expected).norm() < 1e-12, "residue {v}");
    }

    #[test]
    fn obstruction_residue_of_polynomial_vanishes() {
        let p = RationalFunction::from_polynomial(Polynomial::new(vec![
            c(1.0, 0.5),
            c(-2.0, 0.0),
            c(0.0, 3.0),
            c(0.25, 0.0),
        ]));
        let gamma = Contour::new(c(0.3, -0.1), 1.7, 1, 128).unwrap();
        let v = obstruction_residue(&p, &gamma).unwrap();
        assert!(v.norm() < 1e-12);
    }

    #[test]
    fn obstruction_residue_invariant_under_polynomial_subtraction() {
        let s = RationalFunction::new(
            Polynomial::constant(c(-1.5, 0.0)),
            Polynomial::monomial(2, c(1.0, 0.0)),
        )
        .unwrap();
        // subtract a degree-50 polynomial; Cauchy's theorem kills its share
        let mut coeffs = vec![c(0.0, 0.0); 51];
        for (k, coeff) in coeffs.iter_mut().enumerate() {
            *coeff = c(
                (k as f64 * 0.37).sin() * 2.0,
                (k as f64 * 0.11).cos() * 1.5,
            );
        }
        let q = s.sub(&RationalFunction::from_polynomial(Polynomial::new(coeffs)));
        let gamma = Contour::new(
            c(0.0, 0.0),
            1.0,
            1,
            crate::geometry::default_node_count(51),
        )
        .unwrap();
        let v = obstruction_residue(&q, &gamma).unwrap();
        let expected = c(0.0, -3.0 * std::f64::consts::PI);
        assert!((v - expected).norm() < 1e-9, "residue {v}");
    }
}
