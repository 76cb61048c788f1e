//! Zero-free Runge approximation with branch factors, matching of period and
//! value functionals by Newton iteration on exponential corrections, and
//! assembly of locally univalent approximants as antiderivatives.
//!
//! The pipeline realizes approximation on a compact set K inside a domain:
//! the winding number of the target around each hole of K picks a branch
//! factor anchored at a puncture, the remaining zero-winding part is fitted
//! in log form by least squares on boundary samples, and finitely many
//! linear functionals (periods along hole cycles, value gaps along paths)
//! are matched exactly by a damped Newton iteration on exponential
//! correction terms. Nonvanishing of the result is structural: it is a
//! product of branch powers and an exponential.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::extended::ExtComplex;
use crate::geometry::{
    contour_integral, default_node_count, CompactRegion, ClosedDisk, Contour, DomainSpec, TAU,
};
use crate::linalg::{
    complex_lstsq, complex_solve_with_cond, integrate_polyline, BasisExpansion, BasisSpec,
    OrthoBasis,
};
use crate::rational::{certify_local_univalence, RationalFunction};
use nalgebra::{DMatrix, DVector};

const DEGREE_START: usize = 8;
const DEGREE_CAP: usize = 256;
const JACOBIAN_COND_LIMIT: f64 = 1e8;
const LS_COND_LIMIT: f64 = 1e10;
const NEWTON_ACCEPT: f64 = 1e-10;
const NEWTON_MAX_ITER: usize = 25;

/// Outcome summary carried by every approximation stage.
#[derive(Debug, Clone, Default)]
pub struct ApproximationReport {
    pub degree_used: usize,
    pub certified_sup_error: f64,
    pub newton_iterations: usize,
    pub final_residual_norm: f64,
    pub samples_used: usize,
}

/// Correction directions multiplied into the exponent by the Newton matcher.
#[derive(Debug, Clone)]
pub enum CorrectionFn {
    Constant,
    /// 1/(z - p)
    ReciprocalPole(Complex64),
    /// ((z - center)/scale)^power
    ScaledPower {
        center: Complex64,
        scale: f64,
        power: usize,
    },
    /// A fitted expansion, used for corrections localized away from the
    /// approximation region (near zero on it, order one elsewhere).
    Expansion(std::sync::Arc<BasisExpansion>),
}

impl CorrectionFn {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            CorrectionFn::Constant => Complex64::new(1.0, 0.0),
            CorrectionFn::ReciprocalPole(p) => 1.0 / (z - p),
            CorrectionFn::ScaledPower {
                center,
                scale,
                power,
            } => ((z - center) / *scale).powu(*power as u32),
            CorrectionFn::Expansion(e) => e.eval(z),
        }
    }
}

/// Linear functional of the integrand: a period along a closed cycle or a
/// value gap along a polyline from the base point.
#[derive(Debug, Clone)]
pub enum Functional {
    Period { contour: Contour, target: Complex64 },
    ValueGap { path: Vec<Complex64>, target: Complex64 },
}

impl Functional {
    pub fn target(&self) -> Complex64 {
        match self {
            Functional::Period { target, .. } | Functional::ValueGap { target, .. } => *target,
        }
    }

    pub fn apply(&self, h: &dyn Fn(Complex64) -> Complex64) -> Result<Complex64> {
        match self {
            Functional::Period { contour, .. } => {
                contour_integral(&|z| ExtComplex::from(h(z)), contour)
            }
            Functional::ValueGap { path, .. } => Ok(integrate_polyline(h, path, 1e-13)),
        }
    }

    /// Paths and cycles must keep a 1e-6 clearance from every puncture.
    pub fn validate(&self, domain: &DomainSpec) -> Result<()> {
        for p in domain.punctures() {
            let clear = match self {
                Functional::Period { contour, .. } => {
                    ((p - contour.center).norm() - contour.radius).abs()
                }
                Functional::ValueGap { path, .. } => path
                    .windows(2)
                    .map(|w| segment_distance(w[0], w[1], *p))
                    .fold(f64::INFINITY, f64::min),
            };
            if clear < 1e-6 {
                return Err(Error::InvalidDomain(format!(
                    "functional passes within {clear:.2e} of puncture {p}"
                )));
            }
        }
        Ok(())
    }
}

fn segment_distance(a: Complex64, b: Complex64, p: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).re * ab.re + (p - a).im * ab.im) / len2;
    let t = t.clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

fn detour_one_segment(a: Complex64, b: Complex64, obstacles: &[ClosedDisk]) -> Option<Vec<Complex64>> {
    for obs in obstacles {
        let r = obs.radius;
        if segment_distance(a, b, obs.center) >= r * 0.999 {
            continue;
        }
        let ab = b - a;
        let len2 = ab.norm_sqr();
        if len2 == 0.0 {
            continue;
        }
        let ca = a - obs.center;
        let qb = 2.0 * (ca.re * ab.re + ca.im * ab.im);
        let qc = ca.norm_sqr() - r * r;
        let disc = qb * qb - 4.0 * len2 * qc;
        if disc <= 0.0 {
            continue;
        }
        let sq = disc.sqrt();
        let t0 = ((-qb - sq) / (2.0 * len2)).clamp(0.0, 1.0);
        let t1 = ((-qb + sq) / (2.0 * len2)).clamp(0.0, 1.0);
        if t1 - t0 < 1e-12 {
            continue;
        }
        let entry = a + ab * t0;
        let exit = a + ab * t1;
        let alpha = (entry - obs.center).arg();
        let beta = (exit - obs.center).arg();
        let mut sweep = beta - alpha;
        while sweep > std::f64::consts::PI {
            sweep -= TAU;
        }
        while sweep < -std::f64::consts::PI {
            sweep += TAU;
        }
        let steps = ((sweep.abs() / (std::f64::consts::PI / 8.0)).ceil() as usize).max(1);
        let mut detour = Vec::new();
        if t0 > 0.0 {
            detour.push(entry);
        }
        for k in 1..steps {
            let theta = alpha + sweep * k as f64 / steps as f64;
            detour.push(obs.center + r * Complex64::from_polar(1.0, theta));
        }
        if t1 < 1.0 {
            detour.push(exit);
        }
        detour.push(b);
        return Some(detour);
    }
    None
}

/// Replace straight segments by arcs along obstacle circles wherever a
/// segment dips inside one.
pub fn route_polyline(from: Complex64, to: Complex64, obstacles: &[ClosedDisk]) -> Vec<Complex64> {
    let mut path = vec![from, to];
    for _ in 0..8 {
        let mut changed = false;
        let mut next = vec![path[0]];
        for w in path.windows(2) {
            if let Some(detour) = detour_one_segment(w[0], w[1], obstacles) {
                next.extend(detour);
                changed = true;
            } else {
                next.push(w[1]);
            }
        }
        path = next;
        if !changed {
            break;
        }
    }
    path
}

/// Nonvanishing approximant B(z) exp(q(z)): branch powers anchored at
/// punctures times the exponential of a fitted expansion plus Newton
/// corrections.
#[derive(Debug, Clone)]
pub struct ZeroFreeApproximant {
    branch: Vec<(Complex64, i32)>,
    fitted: BasisExpansion,
    corrections: Vec<(Complex64, CorrectionFn)>,
    domain: DomainSpec,
}

impl ZeroFreeApproximant {
    pub fn new(
        branch: Vec<(Complex64, i32)>,
        fitted: BasisExpansion,
        domain: DomainSpec,
    ) -> Self {
        ZeroFreeApproximant {
            branch,
            fitted,
            corrections: Vec::new(),
            domain,
        }
    }

    /// The exponent q(z): fitted expansion plus correction terms.
    pub fn exponent(&self, z: Complex64) -> Complex64 {
        let mut q = self.fitted.eval(z);
        for (s, w) in &self.corrections {
            q += s * w.eval(z);
        }
        q
    }

    /// Evaluate B(z) exp(q(z)). The magnitude is clamped to the finite
    /// nonzero range, so the result is structurally never 0 and never
    /// infinite even far outside the approximation region.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let q = self.exponent(z);
        let mut log_mag = q.re;
        let mut phase = q.im;
        for (p, m) in &self.branch {
            let d = z - p;
            log_mag += *m as f64 * d.norm().ln();
            phase += *m as f64 * d.arg();
        }
        let log_mag = log_mag.clamp(-700.0, 700.0);
        Complex64::from_polar(log_mag.exp(), phase)
    }

    pub fn branch_points(&self) -> &[(Complex64, i32)] {
        &self.branch
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn corrections(&self) -> &[(Complex64, CorrectionFn)] {
        &self.corrections
    }

    pub fn push_correction(&mut self, s: Complex64, w: CorrectionFn) {
        self.corrections.push((s, w));
    }
}

/// What the zero-free fitter needs from its target.
pub trait ZeroFreeTarget {
    fn eval(&self, z: Complex64) -> ExtComplex;
    /// Logarithmic derivative g'/g, used to align log branches between
    /// boundary components of a connected region.
    fn log_derivative(&self, z: Complex64) -> Result<Complex64>;
    /// Zeros and poles that must keep clear of the region.
    fn forbidden_points(&self, region: &CompactRegion) -> Result<Vec<Complex64>>;
    fn max_degree(&self) -> usize;
}

impl ZeroFreeTarget for RationalFunction {
    fn eval(&self, z: Complex64) -> ExtComplex {
        RationalFunction::eval(self, z)
    }

    fn log_derivative(&self, z: Complex64) -> Result<Complex64> {
        let num = self.derivative().eval_finite(z)?;
        let den = self.eval_finite(z)?;
        if den.norm() == 0.0 {
            return Err(Error::NonFiniteValue { at: z });
        }
        Ok(num / den)
    }

    fn forbidden_points(&self, _region: &CompactRegion) -> Result<Vec<Complex64>> {
        let mut pts = self.zeros()?;
        pts.extend(self.poles()?);
        Ok(pts)
    }

    fn max_degree(&self) -> usize {
        self.max_degree()
    }
}

/// Piecewise rational data on a disk union: each disk owns one function.
pub struct PiecewiseRational {
    pub pieces: Vec<(ClosedDisk, RationalFunction)>,
}

impl PiecewiseRational {
    fn owner(&self, z: Complex64) -> &RationalFunction {
        let mut best = 0usize;
        let mut best_dist = f64::INFINITY;
        for (i, (disk, _)) in self.pieces.iter().enumerate() {
            let d = (z - disk.center).norm() - disk.radius;
            if d < best_dist {
                best_dist = d;
                best = i;
            }
        }
        &self.pieces[best].1
    }
}

impl ZeroFreeTarget for PiecewiseRational {
    fn eval(&self, z: Complex64) -> ExtComplex {
        self.owner(z).eval(z)
    }

    fn log_derivative(&self, z: Complex64) -> Result<Complex64> {
        ZeroFreeTarget::log_derivative(self.owner(z), z)
    }

    fn forbidden_points(&self, _region: &CompactRegion) -> Result<Vec<Complex64>> {
        // a zero of one piece only matters near its own disk
        let mut pts = Vec::new();
        for (disk, f) in &self.pieces {
            for z in f.zeros()?.into_iter().chain(f.poles()?) {
                if (z - disk.center).norm() <= disk.radius + 1e-6 {
                    pts.push(z);
                }
            }
        }
        Ok(pts)
    }

    fn max_degree(&self) -> usize {
        self.pieces
            .iter()
            .map(|(_, f)| f.max_degree())
            .max()
            .unwrap_or(0)
    }
}

/// Least-squares fit of analytic data on prescribed points, certified on an
/// independent validation set.
pub struct FitOutcome {
    pub expansion: BasisExpansion,
    pub certified_sup_error: f64,
    pub samples_used: usize,
}

pub fn fit_analytic_ls(
    target: &dyn Fn(Complex64) -> Result<Complex64>,
    fit_points: &[Complex64],
    validation_points: &[Complex64],
    spec: BasisSpec,
) -> Result<FitOutcome> {
    let need = 4 * spec.size();
    if fit_points.len() < need {
        return Err(Error::TooFewSamples {
            got: fit_points.len(),
            need,
        });
    }
    let (basis, matrix) = OrthoBasis::build(spec, fit_points)?;
    let mut rhs = DVector::from_element(fit_points.len(), Complex64::new(0.0, 0.0));
    for (i, &z) in fit_points.iter().enumerate() {
        rhs[i] = target(z).map_err(|_| Error::TargetNonFinite { at: z })?;
    }
    let (coeffs, condition) = complex_lstsq(&matrix, &rhs)?;
    if condition > LS_COND_LIMIT {
        return Err(Error::IllConditioned { cond: condition });
    }
    let expansion = BasisExpansion {
        basis,
        coeffs: coeffs.iter().copied().collect(),
        condition,
    };
    let mut certified = 0.0f64;
    for &z in validation_points {
        let tv = target(z).map_err(|_| Error::TargetNonFinite { at: z })?;
        certified = certified.max((tv - expansion.eval(z)).norm());
    }
    Ok(FitOutcome {
        expansion,
        certified_sup_error: certified,
        samples_used: fit_points.len(),
    })
}

struct ComponentSamples {
    circle: ClosedDisk,
    points: Vec<Complex64>,
    /// unwrapped log of target/branch at the points
    logs: Vec<Complex64>,
}

/// Unwrap log(target/B) along one circle; `None` when adjacent phase jumps
/// reach pi and the sample count must be doubled.
fn unwrap_component(
    target: &dyn ZeroFreeTarget,
    branch: &[(Complex64, i32)],
    circle: &ClosedDisk,
    n: usize,
    phase: f64,
) -> Result<Option<ComponentSamples>> {
    let mut points = Vec::with_capacity(n);
    let mut logs = Vec::with_capacity(n);
    let mut prev_arg = 0.0f64;
    for k in 0..n {
        let theta = TAU * k as f64 / n as f64 + phase;
        let z = circle.center + circle.radius * Complex64::from_polar(1.0, theta);
        let gv = target
            .eval(z)
            .finite()
            .ok_or(Error::NonFiniteValue { at: z })?;
        if gv.norm() == 0.0 {
            return Err(Error::ZeroOnCompact { at: z });
        }
        let mut v = gv;
        let mut log_mag_branch = 0.0;
        let mut arg_branch = 0.0;
        for (p, m) in branch {
            let d = z - p;
            log_mag_branch += *m as f64 * d.norm().ln();
            arg_branch += *m as f64 * d.arg();
        }
        let log_mag = v.norm().ln() - log_mag_branch;
        // peel the branch phase off before unwrapping
        v *= Complex64::from_polar(1.0, -arg_branch);
        let raw_arg = v.arg();
        let arg = if k == 0 {
            raw_arg
        } else {
            let mut a = raw_arg;
            while a - prev_arg > std::f64::consts::PI {
                a -= TAU;
            }
            while a - prev_arg < -std::f64::consts::PI {
                a += TAU;
            }
            if (a - prev_arg).abs() > 0.9 * std::f64::consts::PI {
                return Ok(None);
            }
            a
        };
        prev_arg = arg;
        points.push(z);
        logs.push(Complex64::new(log_mag, arg));
    }
    // a zero-winding target must close up after a full loop: continue the
    // unwrapping from the last sample back to the first
    let mut wrap = logs[0].im;
    while wrap - prev_arg > std::f64::consts::PI {
        wrap -= TAU;
    }
    while wrap - prev_arg < -std::f64::consts::PI {
        wrap += TAU;
    }
    if (wrap - prev_arg).abs() > 0.9 * std::f64::consts::PI {
        return Ok(None);
    }
    if (wrap - logs[0].im).abs() > 0.5 {
        return Ok(None);
    }
    Ok(Some(ComponentSamples {
        circle: *circle,
        points,
        logs,
    }))
}

/// Align the log branch of each hole component with the outer component by
/// integrating the logarithmic derivative along a connecting segment.
fn align_components(
    target: &dyn ZeroFreeTarget,
    branch: &[(Complex64, i32)],
    outer: &ComponentSamples,
    hole: &mut ComponentSamples,
    other_holes: &[ClosedDisk],
) -> Result<()> {
    let n_out = outer.points.len();
    let n_hole = hole.points.len();
    let log_deriv = |z: Complex64| -> Result<Complex64> {
        let mut v = target.log_derivative(z)?;
        for (p, m) in branch {
            v -= *m as f64 / (z - p);
        }
        Ok(v)
    };
    // choose anchor samples whose connecting segment stays clear of the
    // other holes
    let mut chosen: Option<(usize, usize)> = None;
    'outer: for ia in 0..8 {
        for ib in 0..8 {
            let a = outer.points[(ia * n_out / 8) % n_out];
            let b = hole.points[(ib * n_hole / 8) % n_hole];
            let clear = other_holes.iter().all(|h| {
                h.center == hole.circle.center && h.radius == hole.circle.radius
                    || segment_distance(a, b, h.center) > h.radius * 1.05
            });
            if clear {
                chosen = Some((ia * n_out / 8 % n_out, ib * n_hole / 8 % n_hole));
                break 'outer;
            }
        }
    }
    let (ia, ib) = chosen.ok_or_else(|| {
        Error::InvalidRegion("cannot connect boundary components around the holes".into())
    })?;
    let a = outer.points[ia];
    let b = hole.points[ib];
    let mut delta = Complex64::new(0.0, 0.0);
    let mut abort: Option<Error> = None;
    let integrand = |z: Complex64| -> Complex64 {
        match log_deriv(z) {
            Ok(v) => v,
            Err(_) => Complex64::new(f64::NAN, f64::NAN),
        }
    };
    delta += integrate_polyline(&integrand, &[a, b], 1e-12);
    if !delta.re.is_finite() || !delta.im.is_finite() {
        abort = Some(Error::NonFiniteValue { at: a });
    }
    if let Some(e) = abort {
        return Err(e);
    }
    let truth = outer.logs[ia] + delta;
    let gap = truth - hole.logs[ib];
    let turns = (gap.im / TAU).round();
    if (gap.im - turns * TAU).abs() > 0.5 || gap.re.abs() > 0.5 {
        return Err(Error::QuadratureInconclusive {
            residual: gap.norm(),
        });
    }
    let shift = Complex64::new(0.0, turns * TAU);
    for l in &mut hole.logs {
        *l += shift;
    }
    Ok(())
}

/// Zero-free fit core: winding-matched branch factor, per-component log
/// unwrapping with branch alignment, escalating least squares, certification
/// on a denser validation set.
///
/// `extra_log_samples` are additional weighted (point, log-target, weight)
/// rows joined into the fit; the gluing pipeline uses them to keep the
/// integrand sane on the corridors between disconnected components without
/// letting the corridor data pollute the component accuracy.
fn zero_free_core(
    target: &dyn ZeroFreeTarget,
    region: &CompactRegion,
    domain: &DomainSpec,
    eps: f64,
    extra_log_samples: &[(Complex64, Complex64, f64)],
) -> Result<(ZeroFreeApproximant, ApproximationReport)> {
    domain.validate_region(region)?;
    for z in target.forbidden_points(region)? {
        if region.contains(z) || region.boundary_distance(z) < 1e-8 {
            return Err(Error::ZeroOnCompact { at: z });
        }
    }

    // winding around each hole picks the branch exponent
    let holes = region.hole_circles();
    let nodes = default_node_count(target.max_degree());
    let mut branch: Vec<(Complex64, i32)> = Vec::new();
    for (k, hole) in holes.iter().enumerate() {
        let gamma = Contour::circle(hole, 1, nodes)?;
        let w = crate::geometry::winding_of_closed_curve(&|z| target.eval(z), &gamma)?;
        if w != 0 {
            let p = domain
                .punctures()
                .iter()
                .find(|p| (*p - hole.center).norm() < hole.radius)
                .copied()
                .ok_or(Error::WindingMismatch {
                    winding: w,
                    hole: k,
                })?;
            branch.push((p, w));
        }
    }

    let outer = region.outer_circles();
    let fit_punctures: Vec<(Complex64, f64)> = domain
        .punctures()
        .iter()
        .filter_map(|p| {
            holes
                .iter()
                .find(|h| (p - h.center).norm() < h.radius)
                .map(|h| (*p, h.radius))
        })
        .collect();
    let connected = !matches!(region, CompactRegion::DiskUnion(_));

    let center = outer
        .iter()
        .map(|c| c.center)
        .sum::<Complex64>()
        / outer.len() as f64;

    let mut best_error = f64::INFINITY;
    let mut best: Option<(ZeroFreeApproximant, ApproximationReport)> = None;

    let mut degree = DEGREE_START;
    while degree <= DEGREE_CAP {
        let spec_size = 1 + degree + fit_punctures.len() * degree;
        let mut n = default_node_count(degree).max((4 * spec_size).div_ceil(outer.len() + holes.len()));

        // gather samples, doubling on unwrap failure up to 4 times
        let mut attempt = 0;
        let samples = loop {
            let mut comps: Vec<ComponentSamples> = Vec::new();
            let mut ok = true;
            for c in outer.iter().chain(holes.iter()) {
                match unwrap_component(target, &branch, c, n, 0.0)? {
                    Some(s) => comps.push(s),
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                break comps;
            }
            attempt += 1;
            if attempt > 4 {
                return Err(Error::QuadratureInconclusive { residual: 1.0 });
            }
            n *= 2;
        };

        let mut samples = samples;
        if connected && !holes.is_empty() {
            let (outer_comps, hole_comps) = samples.split_at_mut(outer.len());
            for hc in hole_comps.iter_mut() {
                align_components(target, &branch, &outer_comps[0], hc, &holes)?;
            }
        }

        let mut fit_points: Vec<Complex64> = samples
            .iter()
            .flat_map(|s| s.points.iter().copied())
            .collect();
        let mut fit_values: Vec<Complex64> = samples
            .iter()
            .flat_map(|s| s.logs.iter().copied())
            .collect();
        // corridor rows fade as the degree escalates: they are a coarse
        // carrier, not analytic data, and would otherwise cap the accuracy
        let fade = DEGREE_START as f64 / degree as f64;
        let mut fit_weights: Vec<f64> = vec![1.0; fit_points.len()];
        for (z, v, w) in extra_log_samples {
            fit_points.push(*z);
            fit_values.push(*v);
            fit_weights.push(*w * fade);
        }

        let scale = fit_points
            .iter()
            .map(|z| (z - center).norm())
            .fold(0.0, f64::max)
            .max(1e-12);
        let spec = BasisSpec {
            center,
            scale,
            poly_degree: degree,
            punctures: fit_punctures
                .iter()
                .map(|(p, r)| (*p, *r, degree))
                .collect(),
        };

        let fit = (|| -> Result<BasisExpansion> {
            let (basis, matrix) =
                OrthoBasis::build_weighted(spec, &fit_points, Some(&fit_weights))?;
            let rhs = DVector::from_fn(fit_points.len(), |i, _| {
                fit_values[i] * fit_weights[i]
            });
            let (coeffs, condition) = complex_lstsq(&matrix, &rhs)?;
            if condition > LS_COND_LIMIT {
                return Err(Error::IllConditioned { cond: condition });
            }
            Ok(BasisExpansion {
                basis,
                coeffs: coeffs.iter().copied().collect(),
                condition,
            })
        })();

        let fit = match fit {
            Ok(f) => f,
            Err(Error::IllConditioned { .. }) => break,
            Err(e) => return Err(e),
        };

        let approximant =
            ZeroFreeApproximant::new(branch.clone(), fit, domain.clone());

        // certification on a denser, disjoint validation set
        let mut certified = 0.0f64;
        let vn = 2 * n;
        for c in outer.iter().chain(holes.iter()) {
            for k in 0..vn {
                let theta = TAU * k as f64 / vn as f64 + std::f64::consts::PI / (2.0 * vn as f64);
                let z = c.center + c.radius * Complex64::from_polar(1.0, theta);
                let gv = target
                    .eval(z)
                    .finite()
                    .ok_or(Error::NonFiniteValue { at: z })?;
                certified = certified.max((approximant.eval(z) - gv).norm());
            }
        }

        let report = ApproximationReport {
            degree_used: degree,
            certified_sup_error: certified,
            newton_iterations: 0,
            final_residual_norm: 0.0,
            samples_used: fit_points.len(),
        };
        if certified < best_error {
            best_error = certified;
            best = Some((approximant, report));
        }
        if certified <= eps {
            return Ok(best.unwrap());
        }
        degree *= 2;
    }

    // best effort: callers with their own final certification gate decide
    best.ok_or(Error::DegreeCapExceeded {
        cap: DEGREE_CAP,
        best_error,
    })
}

/// Approximate a zero-free rational target on K by a function nonvanishing
/// on the whole domain, to certified boundary error eps.
pub fn zero_free_runge(
    g: &RationalFunction,
    region: &CompactRegion,
    domain: &DomainSpec,
    eps: f64,
) -> Result<(ZeroFreeApproximant, ApproximationReport)> {
    let (approximant, report) = zero_free_core(g, region, domain, eps, &[])?;
    if report.certified_sup_error > eps {
        return Err(Error::DegreeCapExceeded {
            cap: DEGREE_CAP,
            best_error: report.certified_sup_error,
        });
    }
    Ok((approximant, report))
}

/// Match the given functionals exactly by a Newton iteration on exponential
/// corrections exp(sum s_j w_j).
pub fn match_functionals(
    base: &ZeroFreeApproximant,
    basis: &[CorrectionFn],
    functionals: &[Functional],
) -> Result<(ZeroFreeApproximant, ApproximationReport)> {
    let n = functionals.len();
    if basis.len() != n {
        return Err(Error::Config(format!(
            "correction basis size {} does not match functional count {}",
            basis.len(),
            n
        )));
    }
    if n == 0 {
        return Ok((
            base.clone(),
            ApproximationReport::default(),
        ));
    }
    for f in functionals {
        f.validate(base.domain())?;
    }

    let scale = 1.0
        + functionals
            .iter()
            .map(|f| f.target().norm())
            .fold(0.0, f64::max);
    let polish_tol = 1e-14 * scale;

    let eval_with = |s: &DVector<Complex64>, z: Complex64| -> Complex64 {
        let mut q = Complex64::new(0.0, 0.0);
        for (j, w) in basis.iter().enumerate() {
            q += s[j] * w.eval(z);
        }
        base.eval(z) * q.exp()
    };
    let residual = |s: &DVector<Complex64>| -> Result<DVector<Complex64>> {
        let mut r = DVector::from_element(n, Complex64::new(0.0, 0.0));
        for (k, f) in functionals.iter().enumerate() {
            r[k] = f.apply(&|z| eval_with(s, z))? - f.target();
        }
        Ok(r)
    };
    let jacobian = |s: &DVector<Complex64>| -> Result<DMatrix<Complex64>> {
        let mut a = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for (k, f) in functionals.iter().enumerate() {
            for (j, w) in basis.iter().enumerate() {
                a[(k, j)] = f.apply(&|z| w.eval(z) * eval_with(s, z))?;
            }
        }
        Ok(a)
    };

    let mut s = DVector::from_element(n, Complex64::new(0.0, 0.0));
    let mut r = residual(&s)?;
    let mut iterations = 0usize;

    // certify the Jacobian at s = 0 before iterating; the smallest singular
    // value is measured against the problem scale so that a uniformly tiny
    // Jacobian counts as singular
    {
        let a0 = jacobian(&s)?;
        let svd = a0.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        let cond = if smin > 0.0 {
            smax.max(scale) / smin
        } else {
            f64::INFINITY
        };
        if !(cond <= JACOBIAN_COND_LIMIT) {
            return Err(Error::SingularJacobian { cond });
        }
    }

    while r.norm() > polish_tol && iterations < NEWTON_MAX_ITER {
        let a = jacobian(&s)?;
        let (delta, _cond) = complex_solve_with_cond(&a, &(-&r))?;
        let mut lambda = 1.0f64;
        let mut accepted = false;
        for _ in 0..=8 {
            let cand = &s + &delta * Complex64::new(lambda, 0.0);
            let rc = residual(&cand)?;
            if rc.norm() < r.norm() || r.norm() <= polish_tol {
                s = cand;
                r = rc;
                accepted = true;
                break;
            }
            lambda /= 2.0;
        }
        iterations += 1;
        if !accepted {
            break;
        }
    }

    let final_norm = r.norm();
    if final_norm > NEWTON_ACCEPT * scale {
        return Err(Error::NoConvergenceNewton {
            residual: final_norm,
            iterations,
        });
    }

    let mut out = base.clone();
    for (j, w) in basis.iter().enumerate() {
        out.push_correction(s[j], w.clone());
    }
    Ok((
        out,
        ApproximationReport {
            degree_used: 0,
            certified_sup_error: 0.0,
            newton_iterations: iterations,
            final_residual_norm: final_norm,
            samples_used: 0,
        },
    ))
}

/// Locally univalent approximant: antiderivative of a structurally
/// nonvanishing integrand, evaluated by path integration from a fixed base
/// point. Paths route around holes that contain punctures.
#[derive(Debug, Clone)]
pub struct LuApproximant {
    integrand: ZeroFreeApproximant,
    base_point: Complex64,
    base_value: Complex64,
    obstacles: Vec<ClosedDisk>,
}

impl LuApproximant {
    pub fn new(
        integrand: ZeroFreeApproximant,
        base_point: Complex64,
        base_value: Complex64,
        obstacles: Vec<ClosedDisk>,
    ) -> Self {
        LuApproximant {
            integrand,
            base_point,
            base_value,
            obstacles,
        }
    }

    pub fn base_point(&self) -> Complex64 {
        self.base_point
    }

    /// G'(z), exact by construction.
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        self.integrand.eval(z)
    }

    pub fn integrand(&self) -> &ZeroFreeApproximant {
        &self.integrand
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let path = self.route(self.base_point, z);
        self.base_value + self.integrate_along(&path)
    }

    /// Integral of the integrand along an explicit polyline; exposed so
    /// path-independence can be tested directly.
    pub fn integrate_along(&self, path: &[Complex64]) -> Complex64 {
        integrate_polyline(&|z| self.integrand.eval(z), path, 1e-13)
    }

    /// Straight segments, replaced by arcs along obstacle circles where the
    /// segment would dip inside.
    pub fn route(&self, from: Complex64, to: Complex64) -> Vec<Complex64> {
        route_polyline(from, to, &self.obstacles)
    }
}

/// Unwrapped log of g at the circle point with polar angle `theta`, anchored
/// at the principal value at angle 0 -- the same anchoring the component
/// fits use, so corridor data joins the circle data continuously.
fn anchored_log_at(g: &RationalFunction, circle: &ClosedDisk, theta: f64) -> Result<Complex64> {
    let n = 512usize;
    let theta = theta.rem_euclid(TAU);
    let point_at = |t: f64| circle.center + circle.radius * Complex64::from_polar(1.0, t);
    let mut prev = g.eval_finite(point_at(0.0))?;
    if prev.norm() == 0.0 {
        return Err(Error::ZeroOnCompact { at: point_at(0.0) });
    }
    let mut arg = prev.arg();
    let whole_steps = (theta / TAU * n as f64).floor() as usize;
    let mut angles: Vec<f64> = (1..=whole_steps).map(|k| TAU * k as f64 / n as f64).collect();
    if (theta - TAU * whole_steps as f64 / n as f64).abs() > 1e-15 {
        angles.push(theta);
    }
    let mut value = prev;
    for t in angles {
        value = g.eval_finite(point_at(t))?;
        if value.norm() == 0.0 {
            return Err(Error::ZeroOnCompact { at: point_at(t) });
        }
        let jump = (value / prev).arg();
        if jump.abs() > 0.9 * std::f64::consts::PI {
            return Err(Error::QuadratureInconclusive { residual: jump.abs() });
        }
        arg += jump;
        prev = value;
    }
    Ok(Complex64::new(value.norm().ln(), arg))
}

/// One corridor between consecutive glue pieces: points with prescribed
/// log-integrand values whose integral along the corridor reproduces the
/// required value gap. Also reports the corridor midpoint, where Newton
/// correctors are localized.
fn bridge_log_samples(
    prev: &(ClosedDisk, RationalFunction),
    next: &(ClosedDisk, RationalFunction),
    others: &[ClosedDisk],
) -> Result<(Vec<(Complex64, Complex64)>, Complex64)> {
    let (prev_disk, prev_g) = prev;
    let (next_disk, next_g) = next;
    let inflated: Vec<ClosedDisk> = others
        .iter()
        .map(|d| ClosedDisk {
            center: d.center,
            radius: d.radius * 1.25,
        })
        .collect();
    let path = route_polyline(prev_disk.center, next_disk.center, &inflated);

    // clip to the corridor: from the exit of the first disk to the entry of
    // the second
    let mut nodes: Vec<Complex64> = Vec::new();
    let mut started = false;
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !started {
            let ina = (a - prev_disk.center).norm() <= prev_disk.radius;
            let inb = (b - prev_disk.center).norm() <= prev_disk.radius;
            if ina && !inb {
                // crossing out of the first disk
                let exit = circle_crossing(a, b, prev_disk);
                nodes.push(exit);
                started = true;
            } else if !ina {
                nodes.push(a);
                started = true;
            } else {
                continue;
            }
        }
        let inb_next = (b - next_disk.center).norm() <= next_disk.radius;
        if inb_next {
            let entry = circle_crossing(b, *nodes.last().unwrap(), next_disk);
            nodes.push(entry);
            break;
        }
        nodes.push(b);
    }
    if nodes.len() < 2 {
        return Err(Error::InvalidRegion(
            "could not trace a corridor between glue pieces".into(),
        ));
    }

    let a = nodes[0];
    let b = *nodes.last().unwrap();
    let gp = prev_g.derivative();
    let gn = next_g.derivative();
    let log_a = anchored_log_at(&gp, prev_disk, (a - prev_disk.center).arg())?;
    let log_b = anchored_log_at(&gn, next_disk, (b - next_disk.center).arg())?;
    let delta = next_g.eval_finite(b)? - prev_g.eval_finite(a)?;

    // arclength parametrization of the corridor
    let mut cumulative = vec![0.0f64];
    for w in nodes.windows(2) {
        cumulative.push(cumulative.last().unwrap() + (w[1] - w[0]).norm());
    }
    let total = *cumulative.last().unwrap();
    let min_radius = prev_disk.radius.min(next_disk.radius);
    let spacing = TAU * min_radius / 128.0;
    let count = ((total / spacing).ceil() as usize).clamp(32, 2048);
    let point_at = |s: f64| -> Complex64 {
        let mut seg = 0usize;
        while seg + 2 < cumulative.len() && cumulative[seg + 1] < s {
            seg += 1;
        }
        let span = (cumulative[seg + 1] - cumulative[seg]).max(1e-300);
        let t = ((s - cumulative[seg]) / span).clamp(0.0, 1.0);
        nodes[seg] + (nodes[seg + 1] - nodes[seg]) * t
    };
    let interp = |t: f64| log_a + (log_b - log_a) * t;
    let bump = |t: f64| 4.0 * t * (1.0 - t);

    // scalar Newton for the bump amplitude: the corridor integral of
    // exp(interp + c*bump) must equal the required value gap
    let quad_n = 4 * count;
    let integral = |c: Complex64| -> (Complex64, Complex64) {
        let mut f = Complex64::new(0.0, 0.0);
        let mut df = Complex64::new(0.0, 0.0);
        for j in 0..quad_n {
            let s0 = total * j as f64 / quad_n as f64;
            let s1 = total * (j + 1) as f64 / quad_n as f64;
            let (t0, t1) = (s0 / total, s1 / total);
            let (z0, z1) = (point_at(s0), point_at(s1));
            let dz = z1 - z0;
            let e0 = (interp(t0) + c * bump(t0)).exp();
            let e1 = (interp(t1) + c * bump(t1)).exp();
            f += (e0 + e1) * 0.5 * dz;
            df += (e0 * bump(t0) + e1 * bump(t1)) * 0.5 * dz;
        }
        (f, df)
    };
    let mut c = Complex64::new(0.0, 0.0);
    if delta.norm() > 1e-12 {
        let mut best = c;
        let mut best_res = f64::INFINITY;
        for _ in 0..40 {
            let (f, df) = integral(c);
            let res = (f - delta).norm();
            if res < best_res {
                best_res = res;
                best = c;
            }
            if res <= 1e-9 * delta.norm().max(1.0) || df.norm() < 1e-300 {
                break;
            }
            let step = (delta - f) / df;
            let capped = if step.norm() > 2.0 { step / step.norm() * 2.0 } else { step };
            c += capped;
            if c.re.abs() > 30.0 {
                break;
            }
        }
        c = best;
    }

    let mut samples = Vec::with_capacity(count + 1);
    for j in 0..=count {
        let s = total * j as f64 / count as f64;
        let t = s / total;
        samples.push((point_at(s), interp(t) + c * bump(t)));
    }
    Ok((samples, point_at(total / 2.0)))
}

/// Newton correction directions for the gluing stage: one expansion per
/// corridor, fitted to vanish on every piece boundary and on the other
/// corridor midpoints while taking the value 1 at its own midpoint. A
/// correction s*w then moves the corridor integrals without disturbing the
/// pieces beyond |s| times the certified leakage.
fn localized_correctors(
    pieces: &[(ClosedDisk, RationalFunction)],
    midpoints: &[Complex64],
    span: f64,
) -> Result<Vec<CorrectionFn>> {
    let center = pieces.iter().map(|(d, _)| d.center).sum::<Complex64>() / pieces.len() as f64;
    let mut circle_points = Vec::new();
    for (disk, _) in pieces {
        for k in 0..96 {
            let theta = TAU * k as f64 / 96.0;
            circle_points.push(disk.center + disk.radius * Complex64::from_polar(1.0, theta));
        }
    }
    let mut correctors = Vec::with_capacity(midpoints.len());
    for (k, mid) in midpoints.iter().enumerate() {
        let mut degree = 24usize;
        let mut best: Option<(f64, BasisExpansion)> = None;
        while degree <= 192 {
            let mut points = circle_points.clone();
            let mut values = vec![Complex64::new(0.0, 0.0); points.len()];
            let mut weights = vec![1.0f64; points.len()];
            for (j, m) in midpoints.iter().enumerate() {
                points.push(*m);
                values.push(if j == k {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                });
                weights.push(8.0);
            }
            let spec = BasisSpec::polynomial(center, span, degree);
            let (basis, matrix) = OrthoBasis::build_weighted(spec, &points, Some(&weights))?;
            let rhs = DVector::from_fn(points.len(), |i, _| values[i] * weights[i]);
            let (coeffs, condition) = complex_lstsq(&matrix, &rhs)?;
            let exp = BasisExpansion {
                basis,
                coeffs: coeffs.iter().copied().collect(),
                condition,
            };
            // certify the leakage on denser circles and renormalize at the
            // midpoint
            let at_mid = exp.eval(*mid);
            if at_mid.norm() > 0.2 {
                let mut leak = 0.0f64;
                for (disk, _) in pieces {
                    for j in 0..192 {
                        let theta = TAU * j as f64 / 192.0 + 0.007;
                        let z = disk.center + disk.radius * Complex64::from_polar(1.0, theta);
                        leak = leak.max((exp.eval(z) / at_mid).norm());
                    }
                }
                let scaled = BasisExpansion {
                    basis: exp.basis.clone(),
                    coeffs: exp.coeffs.iter().map(|c| c / at_mid).collect(),
                    condition: exp.condition,
                };
                if best.as_ref().map_or(true, |(l, _)| leak < *l) {
                    best = Some((leak, scaled));
                }
                if best.as_ref().unwrap().0 <= 1e-5 {
                    break;
                }
            }
            degree += 24;
        }
        let (leak, exp) = best.ok_or_else(|| Error::InvalidRegion(
            "could not build a localized corrector for the corridor".into(),
        ))?;
        if leak > 1e-2 {
            return Err(Error::StagesNotSeparable);
        }
        correctors.push(CorrectionFn::Expansion(std::sync::Arc::new(exp)));
    }
    Ok(correctors)
}

fn circle_crossing(inside: Complex64, outside: Complex64, disk: &ClosedDisk) -> Complex64 {
    // binary search for the circle crossing on the segment
    let (mut lo, mut hi) = (inside, outside);
    for _ in 0..60 {
        let mid = (lo + hi) / 2.0;
        if (mid - disk.center).norm() <= disk.radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / 2.0
}

fn base_point_on_outer_boundary(region: &CompactRegion) -> Complex64 {
    let outer = region.outer_circles();
    let centroid = outer.iter().map(|c| c.center).sum::<Complex64>() / outer.len() as f64;
    let samples = crate::geometry::boundary_samples(region, 64).expect("region sampling");
    let boundary_only = &samples.points[..outer.len() * 64];
    let mut best = boundary_only[0];
    let mut best_d = f64::INFINITY;
    for &z in boundary_only {
        let d = (z - centroid).norm();
        if d < best_d - 1e-15 {
            best_d = d;
            best = z;
        }
    }
    best
}

/// Runge-type approximation of a locally univalent holomorphic target:
/// approximate f' by a nonvanishing function with vanishing hole periods and
/// integrate from a fixed boundary base point.
pub fn lu_holomorphic_runge(
    f: &RationalFunction,
    region: &CompactRegion,
    domain: &DomainSpec,
    eps: f64,
) -> Result<(LuApproximant, ApproximationReport)> {
    domain.validate_region(region)?;
    for p in f.poles()? {
        if region.contains(p) || region.boundary_distance(p) < 1e-8 {
            return Err(Error::ZeroOnCompact { at: p });
        }
    }
    let cert = certify_local_univalence(f, region)?;
    if !cert.verdict {
        return Err(Error::NotLocallyUnivalent);
    }

    let g = f.derivative();
    let holes = region.hole_circles();
    let punctured_holes: Vec<(ClosedDisk, Complex64)> = holes
        .iter()
        .filter_map(|h| {
            domain
                .punctures()
                .iter()
                .find(|p| (*p - h.center).norm() < h.radius)
                .map(|p| (*h, *p))
        })
        .collect();

    let path_scale = region.diameter()
        + std::f64::consts::PI * punctured_holes.iter().map(|(h, _)| h.radius).sum::<f64>()
        + 1.0;

    let z0 = base_point_on_outer_boundary(region);
    let base_value = f.eval_finite(z0)?;
    let obstacles: Vec<ClosedDisk> = punctured_holes.iter().map(|(h, _)| *h).collect();

    let mut eps1 = (eps / (2.0 * path_scale)).max(1e-14);
    let mut last_err = f64::INFINITY;
    let mut last: Option<(LuApproximant, ApproximationReport)> = None;
    for _attempt in 0..3 {
        let (h, mut report) = zero_free_core(&g, region, domain, eps1, &[])?;
        let fit_exhausted = report.degree_used >= DEGREE_CAP && report.certified_sup_error > eps1;

        let h = if punctured_holes.is_empty() {
            h
        } else {
            let nodes = default_node_count(g.max_degree()).max(256);
            let functionals: Vec<Functional> = punctured_holes
                .iter()
                .map(|(hole, _)| {
                    Ok(Functional::Period {
                        contour: Contour::circle(hole, 1, nodes)?,
                        target: Complex64::new(0.0, 0.0),
                    })
                })
                .collect::<Result<_>>()?;
            let basis: Vec<CorrectionFn> = punctured_holes
                .iter()
                .map(|(_, p)| CorrectionFn::ReciprocalPole(*p))
                .collect();
            let (h, rep2) = match_functionals(&h, &basis, &functionals)?;
            report.newton_iterations = rep2.newton_iterations;
            report.final_residual_norm = rep2.final_residual_norm;
            h
        };

        let approx = LuApproximant::new(h, z0, base_value, obstacles.clone());

        // certify |G - f| on a dense boundary set
        let mut certified = 0.0f64;
        for c in region
            .outer_circles()
            .into_iter()
            .chain(region.hole_circles())
        {
            for k in 0..128 {
                let theta = TAU * k as f64 / 128.0 + 0.003;
                let z = c.center + c.radius * Complex64::from_polar(1.0, theta);
                certified = certified.max((approx.eval(z) - f.eval_finite(z)?).norm());
            }
        }
        report.certified_sup_error = certified;
        last_err = certified;
        last = Some((approx, report));
        if certified <= eps {
            return Ok(last.unwrap());
        }
        if fit_exhausted {
            break;
        }
        eps1 /= 4.0;
    }
    let _ = last;
    Err(Error::DegreeCapExceeded {
        cap: DEGREE_CAP,
        best_error: last_err,
    })
}

/// Glue locally univalent targets on pairwise disjoint disks into one
/// locally univalent function on a simply connected domain, pinning the
/// value at each disk center.
pub fn glue_targets(
    pieces: &[(ClosedDisk, RationalFunction)],
    domain: &DomainSpec,
    eps: f64,
) -> Result<(LuApproximant, Vec<f64>, ApproximationReport)> {
    if pieces.is_empty() {
        return Err(Error::Config("gluing needs at least one piece".into()));
    }
    if !domain.is_simply_connected() {
        return Err(Error::UnsupportedDomain(
            "gluing applies to simply connected domains".into(),
        ));
    }
    for i in 0..pieces.len() {
        for j in i + 1..pieces.len() {
            if pieces[i].0.gap(&pieces[j].0) <= 0.0 {
                return Err(Error::OverlappingPieces);
            }
        }
    }
    for (disk, g) in pieces {
        let region = CompactRegion::Disk(*disk);
        for p in g.poles()? {
            if region.contains(p) || region.boundary_distance(p) < 1e-8 {
                return Err(Error::ZeroOnCompact { at: p });
            }
        }
        let cert = certify_local_univalence(g, &region)?;
        if !cert.verdict {
            return Err(Error::NotLocallyUnivalent);
        }
    }

    let region = if pieces.len() == 1 {
        CompactRegion::Disk(pieces[0].0)
    } else {
        CompactRegion::disk_union(pieces.iter().map(|(d, _)| *d).collect())?
    };
    let derivative_pieces = PiecewiseRational {
        pieces: pieces
            .iter()
            .map(|(d, g)| (*d, g.derivative()))
            .collect(),
    };

    let rmax = pieces.iter().map(|(d, _)| d.radius).fold(0.0, f64::max);
    let z0 = pieces[0].0.center;
    let base_value = pieces[0].1.eval_finite(z0)?;
    let span = pieces
        .iter()
        .map(|(d, _)| (d.center - z0).norm() + d.radius)
        .fold(1.0, f64::max);

    // corridor data between consecutive pieces keeps the fitted integrand
    // sane between the disks and pre-solves the value gaps approximately;
    // low weight stops the corridor rows from polluting the piece accuracy
    const BRIDGE_WEIGHT: f64 = 0.05;
    let mut bridges: Vec<(Complex64, Complex64, f64)> = Vec::new();
    let mut corridor_midpoints: Vec<Complex64> = Vec::new();
    for i in 1..pieces.len() {
        let others: Vec<ClosedDisk> = pieces
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i - 1 && *j != i)
            .map(|(_, (d, _))| *d)
            .collect();
        let (samples, midpoint) = bridge_log_samples(&pieces[i - 1], &pieces[i], &others)?;
        bridges.extend(samples.into_iter().map(|(z, v)| (z, v, BRIDGE_WEIGHT)));
        corridor_midpoints.push(midpoint);
    }

    let mut eps1 = eps / (4.0 * (1.0 + rmax));
    let mut best_errors = Vec::new();
    let mut best_err = f64::INFINITY;
    for _attempt in 0..3 {
        let (h, mut report) =
            zero_free_core(&derivative_pieces, &region, domain, eps1, &bridges)?;
        let fit_exhausted = report.degree_used >= DEGREE_CAP && report.certified_sup_error > eps1;

        let h = if pieces.len() >= 2 {
            let functionals: Vec<Functional> = pieces[1..]
                .iter()
                .map(|(disk, g)| {
                    Ok(Functional::ValueGap {
                        path: vec![z0, disk.center],
                        target: g.eval_finite(disk.center)? - base_value,
                    })
                })
                .collect::<Result<_>>()?;
            let basis = localized_correctors(pieces, &corridor_midpoints, span)?;
            let (h, rep2) = match_functionals(&h, &basis, &functionals)?;
            report.newton_iterations = rep2.newton_iterations;
            report.final_residual_norm = rep2.final_residual_norm;
            h
        } else {
            h
        };

        let approx = LuApproximant::new(h, z0, base_value, Vec::new());

        let mut piece_errors = Vec::with_capacity(pieces.len());
        let mut worst = 0.0f64;
        for (disk, g) in pieces {
            let mut e = (approx.eval(disk.center) - g.eval_finite(disk.center)?).norm();
            for k in 0..96 {
                let theta = TAU * k as f64 / 96.0 + 0.003;
                let z = disk.center + disk.radius * Complex64::from_polar(1.0, theta);
                e = e.max((approx.eval(z) - g.eval_finite(z)?).norm());
            }
            piece_errors.push(e);
            worst = worst.max(e);
        }
        report.certified_sup_error = worst;
        if worst <= eps {
            return Ok((approx, piece_errors, report));
        }
        if worst < best_err {
            best_err = worst;
            best_errors = piece_errors;
        }
        if fit_exhausted {
            break;
        }
        eps1 /= 4.0;
    }
    let _ = best_errors;
    Err(Error::DegreeCapExceeded {
        cap: DEGREE_CAP,
        best_error: best_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{exp_taylor, Polynomial};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn annulus() -> CompactRegion {
        CompactRegion::annulus(c(0.0, 0.0), 0.5, 2.0).unwrap()
    }

    fn punctured_origin() -> DomainSpec {
        DomainSpec::punctured(vec![c(0.0, 0.0)]).unwrap()
    }

    fn circle_points(radius: f64, n: usize, phase: f64) -> Vec<Complex64> {
        (0..n)
            .map(|k| Complex64::from_polar(radius, TAU * k as f64 / n as f64 + phase))
            .collect()
    }

    #[test]
    fn fit_identity_on_annulus_boundary_is_exact() {
        let mut fit_pts = circle_points(0.5, 32, 0.0);
        fit_pts.extend(circle_points(2.0, 32, 0.0));
        let mut val_pts = circle_points(0.5, 64, 0.01);
        val_pts.extend(circle_points(2.0, 64, 0.01));
        let spec = BasisSpec::polynomial(c(0.0, 0.0), 2.0, 1);
        let out = fit_analytic_ls(&|z| Ok(z), &fit_pts, &val_pts, spec).unwrap();
        assert!(out.certified_sup_error <= 1e-13);
    }

    #[test]
    fn fit_log_with_laurent_tail_bound() {
        // log(1 + 0.1/z) on the annulus boundary; the truncated Laurent
        // series oracle bounds the reachable error at degree 12
        let target = |z: Complex64| -> Result<Complex64> {
            Ok((1.0 + 0.1 / z).ln())
        };
        // independent oracle: the series sum_{k>=1} (-1)^{k+1} (0.1/z)^k / k
        // truncated at 12 has tail <= 0.2^12/(1-0.2) on |z| = 1/2
        let tail: f64 = 0.2f64.powi(12) / 0.8;
        assert!(tail <= 1e-6);
        let oracle = |z: Complex64| {
            let w = 0.1 / z;
            let mut sum = c(0.0, 0.0);
            let mut pw = c(1.0, 0.0);
            for k in 1..=12 {
                pw *= w;
                sum += pw * ((-1.0f64).powi(k as i32 + 1) / k as f64);
            }
            sum
        };
        for &z in &circle_points(0.5, 16, 0.1) {
            assert!((oracle(z) - target(z).unwrap()).norm() <= tail * 1.0001);
        }

        let mut fit_pts = circle_points(0.5, 64, 0.0);
        fit_pts.extend(circle_points(2.0, 64, 0.0));
        let mut val_pts = circle_points(0.5, 128, 0.01);
        val_pts.extend(circle_points(2.0, 128, 0.01));
        let spec = BasisSpec {
            center: c(0.0, 0.0),
            scale: 2.0,
            poly_degree: 12,
            punctures: vec![(c(0.0, 0.0), 0.5, 12)],
        };
        let out = fit_analytic_ls(&target, &fit_pts, &val_pts, spec).unwrap();
        assert!(
            out.certified_sup_error <= 1e-6,
            "fit error {}",
            out.certified_sup_error
        );
    }

    #[test]
    fn fit_cannot_reach_pole_inside_disk() {
        // 1/(z - 0.9) restricted to |z| = 1 has no polynomial part at all:
        // a geometric-series oracle shows the best fit stays useless
        let target = |z: Complex64| Ok(1.0 / (z - 0.9));
        let fit_pts = circle_points(1.0, 64, 0.0);
        let val_pts = circle_points(1.0, 128, 0.01);
        let spec = BasisSpec::polynomial(c(0.0, 0.0), 1.0, 5);
        let out = fit_analytic_ls(&target, &fit_pts, &val_pts, spec).unwrap();
        assert!(out.certified_sup_error >= 1.0);
    }

    #[test]
    fn zero_free_identity_target_gets_pure_branch() {
        let g = RationalFunction::identity();
        let (h, report) = zero_free_runge(&g, &annulus(), &punctured_origin(), 1e-9).unwrap();
        assert_eq!(h.branch_points(), &[(c(0.0, 0.0), 1)]);
        assert!(report.certified_sup_error <= 1e-12);
        let z = c(1.3, -0.4);
        assert!((h.eval(z) - z).norm() <= 1e-11);
    }

    #[test]
    fn zero_free_shifted_target_converges_fast() {
        let g = RationalFunction::from_polynomial(Polynomial::affine(
            c(1.0, 0.0),
            c(0.1, 0.0),
        ));
        let (h, report) = zero_free_runge(&g, &annulus(), &punctured_origin(), 1e-6).unwrap();
        assert_eq!(h.branch_points(), &[(c(0.0, 0.0), 1)]);
        assert!(report.degree_used <= 16, "degree {}", report.degree_used);
        assert!(report.certified_sup_error <= 1e-6);
    }

    #[test]
    fn zero_free_rejects_zero_on_compact() {
        let g = RationalFunction::from_polynomial(Polynomial::affine(
            c(1.0, 0.0),
            c(-1.0, 0.0),
        ));
        assert!(matches!(
            zero_free_runge(&g, &annulus(), &punctured_origin(), 1e-6),
            Err(Error::ZeroOnCompact { .. })
        ));
    }

    fn reciprocal_base() -> ZeroFreeApproximant {
        ZeroFreeApproximant::new(
            vec![(c(0.0, 0.0), -1)],
            BasisExpansion::zero(c(1.0, 0.0)),
            punctured_origin(),
        )
    }

    #[test]
    fn match_functionals_identity_case() {
        let base = reciprocal_base();
        let gamma = Contour::new(c(0.0, 0.0), 1.0, 1, 64).unwrap();
        let functionals = vec![Functional::Period {
            contour: gamma,
            target: c(0.0, TAU),
        }];
        let (out, report) =
            match_functionals(&base, &[CorrectionFn::Constant], &functionals).unwrap();
        assert!(out.corrections()[0].0.norm() <= 1e-12);
        assert!(report.final_residual_norm <= 1e-10);
    }

    #[test]
    fn match_functionals_closed_form_log() {
        // \oint e^s (1/z) dz = e^s 2 pi i, so the target 1.1 * 2 pi i gives
        // s = ln 1.1
        let base = reciprocal_base();
        let gamma = Contour::new(c(0.0, 0.0), 1.0, 1, 64).unwrap();
        let functionals = vec![Functional::Period {
            contour: gamma,
            target: c(0.0, TAU * 1.1),
        }];
        let (out, _) =
            match_functionals(&base, &[CorrectionFn::Constant], &functionals).unwrap();
        let s = out.corrections()[0].0;
        assert!(
            (s - c(1.1f64.ln(), 0.0)).norm() <= 1e-12,
            "s = {s}, expected ln 1.1 = {}",
            1.1f64.ln()
        );
    }

    #[test]
    fn match_functionals_degenerate_basis_is_singular() {
        // residue of e^{s/z}/z is 1 for every s, so the jacobian vanishes
        let base = reciprocal_base();
        let gamma = Contour::new(c(0.0, 0.0), 1.0, 1, 64).unwrap();
        let functionals = vec![Functional::Period {
            contour: gamma,
            target: c(0.0, TAU),
        }];
        let basis = vec![CorrectionFn::ReciprocalPole(c(0.0, 0.0))];
        assert!(matches!(
            match_functionals(&base, &basis, &functionals),
            Err(Error::SingularJacobian { .. })
        ));
    }

    #[test]
    fn lu_runge_identity_on_disk() {
        let f = RationalFunction::identity();
        let region = CompactRegion::disk(c(0.0, 0.0), 1.0).unwrap();
        let (g, report) =
            lu_holomorphic_runge(&f, &region, &DomainSpec::WholePlane, 1e-9).unwrap();
        assert!(report.certified_sup_error <= 1e-12);
        let z = c(0.3, 0.4);
        assert!((g.eval(z) - z).norm() <= 1e-12);
    }

    #[test]
    fn lu_runge_on_annulus_with_period_matching() {
        // f = z^2/2 + 0.1 z, f' = z + 0.1 handled through the branch factor
        let f = RationalFunction::from_polynomial(Polynomial::new(vec![
            c(0.0, 0.0),
            c(0.1, 0.0),
            c(0.5, 0.0),
        ]));
        let (g, report) =
            lu_holomorphic_runge(&f, &annulus(), &punctured_origin(), 1e-6).unwrap();
        assert!(
            report.certified_sup_error <= 1e-6,
            "certified {}",
            report.certified_sup_error
        );
        // direct-evaluation oracle at interior points
        for &z in &[c(1.0, 0.8), c(-1.2, 0.3), c(0.0, -0.9)] {
            let expected = z * z / 2.0 + 0.1 * z;
            assert!((g.eval(z) - expected).norm() <= 2e-6);
        }
        // the period along the hole cycle vanishes after matching
        let gamma = Contour::new(c(0.0, 0.0), 0.5, 1, 512).unwrap();
        let period =
            contour_integral(&|z| ExtComplex::from(g.derivative(z)), &gamma).unwrap();
        assert!(period.norm() <= 1e-9, "period {period}");
        // path independence: clockwise vs counterclockwise around the hole
        let z0 = g.base_point();
        let target = c(-1.5, 0.0);
        let above = vec![z0, c(0.0, 1.2), target];
        let below = vec![z0, c(0.0, -1.2), target];
        let va = g.integrate_along(&above);
        let vb = g.integrate_along(&below);
        assert!((va - vb).norm() <= 1e-9, "gap {}", (va - vb).norm());
    }

    #[test]
    fn lu_runge_rejects_critical_point() {
        let f = RationalFunction::from_polynomial(Polynomial::monomial(2, c(1.0, 0.0)));
        let region = CompactRegion::disk(c(0.0, 0.0), 1.0).unwrap();
        assert!(matches!(
            lu_holomorphic_runge(&f, &region, &DomainSpec::WholePlane, 1e-6),
            Err(Error::NotLocallyUnivalent)
        ));
    }

    #[test]
    fn glue_single_piece_reproduces_target() {
        let disk = ClosedDisk::new(c(0.0, 0.0), 1.0).unwrap();
        let pieces = vec![(disk, RationalFunction::identity())];
        let (g, errors, _) = glue_targets(&pieces, &DomainSpec::WholePlane, 1e-6).unwrap();
        assert!(errors[0] <= 1e-6);
        assert!((g.eval(c(0.2, 0.1)) - c(0.2, 0.1)).norm() <= 1e-6);
    }

    #[test]
    fn glue_two_pieces_within_tolerance() {
        let d1 = ClosedDisk::new(c(0.0, 0.0), 1.0).unwrap();
        let d2 = ClosedDisk::new(c(8.0, 0.0), 1.0).unwrap();
        let pieces = vec![
            (d1, RationalFunction::from_polynomial(exp_taylor(12))),
            (d2, RationalFunction::identity()),
        ];
        let (g, errors, report) =
            glue_targets(&pieces, &DomainSpec::WholePlane, 1e-3).unwrap();
        assert!(
            errors.iter().all(|e| *e <= 1e-3),
            "piece errors {errors:?} (degree {})",
            report.degree_used
        );
        // direct evaluation oracle
        let z = c(0.4, -0.3);
        let t1 = exp_taylor(12).eval(z);
        assert!((g.eval(z) - t1).norm() <= 2e-3);
        let w = c(8.3, 0.2);
        assert!((g.eval(w) - w).norm() <= 2e-3);
    }

    #[test]
    fn glue_rejects_overlapping_pieces() {
        let d1 = ClosedDisk::new(c(0.0, 0.0), 1.0).unwrap();
        let d2 = ClosedDisk::new(c(1.5, 0.0), 1.0).unwrap();
        let pieces = vec![
            (d1, RationalFunction::identity()),
            (d2, RationalFunction::identity()),
        ];
        assert!(matches!(
            glue_targets(&pieces, &DomainSpec::WholePlane, 1e-3),
            Err(Error::OverlappingPieces)
        ));
    }
}
