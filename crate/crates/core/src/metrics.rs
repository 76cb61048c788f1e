//! Constant-curvature conformal metrics: canonical densities, Gauss
//! curvature verification on grids, pullback transport, the Liouville
//! construction from locally univalent maps, and harmonic gluing of flat
//! metric data across translated disks.
//!
//! A conformal metric is a positive density lambda(z)|dz|; its Gauss
//! curvature is -Laplace(log lambda)/lambda^2. Pulling back along a locally
//! univalent map phi transports the density as (lambda o phi) |phi'| and the
//! curvature as kappa o phi.

use num_complex::Complex64;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::extended::ExtComplex;
use crate::geometry::{boundary_samples_with_phase, CompactRegion, ClosedDisk, TAU};
use crate::linalg::{real_lstsq, BasisExpansion, BasisSpec, OrthoBasis};
use crate::rational::{MoebiusMap, Polynomial, RationalFunction};
use crate::runge::LuApproximant;
use nalgebra::{DMatrix, DVector};

/// The three canonical target geometries with their constantly curved
/// densities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CanonicalGeometry {
    Hyperbolic,
    Euclidean,
    Spherical,
}

impl CanonicalGeometry {
    pub fn curvature_constant(&self) -> f64 {
        match self {
            CanonicalGeometry::Hyperbolic => -1.0,
            CanonicalGeometry::Euclidean => 0.0,
            CanonicalGeometry::Spherical => 1.0,
        }
    }
}

/// Canonical density: 2/(1-|z|^2) on the disk, 1 on the plane, 2/(1+|z|^2)
/// on the sphere.
pub fn canonical_density(geom: CanonicalGeometry, z: Complex64) -> Result<f64> {
    match geom {
        CanonicalGeometry::Hyperbolic => {
            let r2 = z.norm_sqr();
            if r2 >= 1.0 {
                return Err(Error::OutsideDisk);
            }
            Ok(2.0 / (1.0 - r2))
        }
        CanonicalGeometry::Euclidean => Ok(1.0),
        CanonicalGeometry::Spherical => Ok(2.0 / (1.0 + z.norm_sqr())),
    }
}

/// A holomorphic map with a derivative, as consumed by the pullback and
/// Liouville operations. All built-in variants differentiate exactly; the
/// custom variant falls back to fourth-order central differences.
#[derive(Clone)]
pub enum AnalyticMap {
    Identity,
    Exp,
    Rational {
        f: RationalFunction,
        derivative: RationalFunction,
    },
    Moebius(MoebiusMap),
    /// A glued locally univalent approximant; its derivative is the
    /// structurally nonvanishing integrand.
    Antiderivative(Arc<LuApproximant>),
    Custom(Arc<dyn Fn(Complex64) -> Result<ExtComplex> + Send + Sync>),
}

impl std::fmt::Debug for AnalyticMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AnalyticMap::Identity => write!(f, "Identity"),
            AnalyticMap::Exp => write!(f, "Exp"),
            AnalyticMap::Rational { .. } => write!(f, "Rational"),
            AnalyticMap::Moebius(_) => write!(f, "Moebius"),
            AnalyticMap::Antiderivative(_) => write!(f, "Antiderivative"),
            AnalyticMap::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl AnalyticMap {
    pub fn rational(f: RationalFunction) -> Self {
        let derivative = f.derivative();
        AnalyticMap::Rational { f, derivative }
    }

    pub fn eval(&self, z: Complex64) -> Result<ExtComplex> {
        Ok(match self {
            AnalyticMap::Identity => ExtComplex::from(z),
            AnalyticMap::Exp => ExtComplex::from(z.exp()),
            AnalyticMap::Rational { f, .. } => f.eval(z),
            AnalyticMap::Moebius(t) => t.apply(ExtComplex::Finite(z)),
            AnalyticMap::Antiderivative(g) => ExtComplex::from(g.eval(z)),
            AnalyticMap::Custom(f) => f(z)?,
        })
    }

    pub fn derivative(&self, z: Complex64, fd_step: f64) -> Result<ExtComplex> {
        Ok(match self {
            AnalyticMap::Identity => ExtComplex::from(Complex64::new(1.0, 0.0)),
            AnalyticMap::Exp => ExtComplex::from(z.exp()),
            AnalyticMap::Rational { derivative, .. } => derivative.eval(z),
            AnalyticMap::Moebius(t) => t.derivative_at(z),
            AnalyticMap::Antiderivative(g) => ExtComplex::from(g.derivative(z)),
            AnalyticMap::Custom(f) => {
                let h = fd_step.max(1e-9);
                let v = |dz: f64| -> Result<Complex64> {
                    f(z + Complex64::new(dz, 0.0))?
                        .finite()
                        .ok_or(Error::NonFiniteValue { at: z })
                };
                // fourth-order central difference
                let d = (-v(2.0 * h)? + 8.0 * v(h)? - 8.0 * v(-h)? + v(-2.0 * h)?)
                    / (12.0 * h);
                ExtComplex::from(d)
            }
        })
    }

    /// Value and derivative of 1/f, for the spherical pullback near poles.
    pub fn reciprocal_pair(&self, z: Complex64, fd_step: f64) -> Result<(Complex64, Complex64)> {
        if let AnalyticMap::Rational { f, .. } = self {
            let recip = f.reciprocal_of()?;
            let rp = recip.derivative();
            let v = recip
                .eval(z)
                .finite()
                .ok_or(Error::NonFiniteValue { at: z })?;
            let d = rp.eval(z).finite().ok_or(Error::NonFiniteValue { at: z })?;
            return Ok((v, d));
        }
        let v = self
            .eval(z)?
            .finite()
            .ok_or(Error::NonFiniteValue { at: z })?;
        let d = self
            .derivative(z, fd_step)?
            .finite()
            .ok_or(Error::NonFiniteValue { at: z })?;
        if v.norm() == 0.0 {
            return Err(Error::NonFiniteValue { at: z });
        }
        Ok((1.0 / v, -d / (v * v)))
    }
}

/// Density evaluators for pullback sources.
#[derive(Clone)]
pub enum DensitySource {
    Canonical(CanonicalGeometry),
    Constant(f64),
    Custom(Arc<dyn Fn(Complex64) -> Result<f64> + Send + Sync>),
}

impl DensitySource {
    pub fn density(&self, z: Complex64) -> Result<f64> {
        match self {
            DensitySource::Canonical(g) => canonical_density(*g, z),
            DensitySource::Constant(c) => Ok(*c),
            DensitySource::Custom(f) => f(z),
        }
    }
}

/// The pullback density (lambda o phi)(z) |phi'(z)|.
///
/// For the spherical source the chordal-compatible reciprocal form
/// 2|(1/f)'| / (1 + |1/f|^2) takes over wherever |f| > 1, so simple poles of
/// the map are transparent.
pub struct PullbackDensity {
    pub source: DensitySource,
    pub map: AnalyticMap,
    pub fd_step: f64,
}

impl PullbackDensity {
    pub fn density(&self, z: Complex64) -> Result<f64> {
        let value = self.map.eval(z)?;
        if let DensitySource::Canonical(CanonicalGeometry::Spherical) = self.source {
            let use_reciprocal = match value.finite() {
                Some(v) => v.norm() > 1.0,
                None => true,
            };
            if use_reciprocal {
                let (t, tp) = self.map.reciprocal_pair(z, self.fd_step)?;
                if tp.norm() == 0.0 {
                    return Err(Error::CriticalPoint { at: z });
                }
                return Ok(2.0 * tp.norm() / (1.0 + t.norm_sqr()));
            }
        }
        let w = value.finite().ok_or(Error::RangeEscape { at: z })?;
        let base = match self.source.density(w) {
            Ok(b) => b,
            Err(Error::OutsideDisk) => return Err(Error::RangeEscape { at: z }),
            Err(e) => return Err(e),
        };
        let d = self
            .map
            .derivative(z, self.fd_step)?
            .finite()
            .ok_or(Error::RangeEscape { at: z })?;
        if d.norm() == 0.0 {
            return Err(Error::CriticalPoint { at: z });
        }
        Ok(base * d.norm())
    }
}

/// Square lattice specification centered at a point, clipped to a disk.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub center: Complex64,
    pub radius: f64,
    pub spacing: f64,
}

/// Gridded positive density with a validity mask.
#[derive(Debug, Clone)]
pub struct MetricDensity {
    values: Vec<f64>,
    mask: Vec<bool>,
    side: usize,
    origin: Complex64,
    spacing: f64,
}

impl MetricDensity {
    /// Sample an evaluator on the lattice; cells where the evaluator returns
    /// a masking error are excluded, any other error propagates.
    pub fn from_fn(
        spec: GridSpec,
        f: &dyn Fn(Complex64) -> Result<Option<f64>>,
    ) -> Result<Self> {
        if !(spec.spacing > 0.0) || !(spec.radius > 0.0) {
            return Err(Error::InvalidRegion(
                "grid needs positive spacing and radius".into(),
            ));
        }
        let half = (spec.radius / spec.spacing).floor() as i64;
        let side = (2 * half + 1) as usize;
        let origin = spec.center
            - Complex64::new(half as f64 * spec.spacing, half as f64 * spec.spacing);
        let mut values = vec![1.0; side * side];
        let mut mask = vec![false; side * side];
        for j in 0..side {
            for i in 0..side {
                let z = origin + Complex64::new(i as f64 * spec.spacing, j as f64 * spec.spacing);
                if (z - spec.center).norm() > spec.radius {
                    continue;
                }
                if let Some(v) = f(z)? {
                    if !(v > 0.0) || !v.is_finite() {
                        return Err(Error::NonPositiveTarget { at: z });
                    }
                    values[j * side + i] = v;
                    mask[j * side + i] = true;
                }
            }
        }
        Ok(MetricDensity {
            values,
            mask,
            side,
            origin,
            spacing: spec.spacing,
        })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn point(&self, i: usize, j: usize) -> Complex64 {
        self.origin + Complex64::new(i as f64 * self.spacing, j as f64 * self.spacing)
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        if i < self.side && j < self.side && self.mask[j * self.side + i] {
            Some(self.values[j * self.side + i])
        } else {
            None
        }
    }

    pub fn valid_cells(&self) -> impl Iterator<Item = (usize, usize, Complex64, f64)> + '_ {
        (0..self.side).flat_map(move |j| {
            (0..self.side).filter_map(move |i| {
                self.get(i, j).map(|v| (i, j, self.point(i, j), v))
            })
        })
    }
}

/// Pointwise scaling of a density; downstream curvature obeys
/// kappa_{s lambda} = kappa_lambda / s^2.
pub fn scale_density(density: &MetricDensity, factor: f64) -> Result<MetricDensity> {
    if !(factor > 0.0) {
        return Err(Error::NonPositiveTarget {
            at: Complex64::new(0.0, 0.0),
        });
    }
    let mut out = density.clone();
    for v in &mut out.values {
        *v *= factor;
    }
    Ok(out)
}

/// Gauss curvature report over the interior cells of a grid.
#[derive(Debug, Clone)]
pub struct CurvatureReport {
    pub curvature: Vec<Option<f64>>,
    pub side: usize,
    pub origin: Complex64,
    pub spacing: f64,
    pub reference_curvature: f64,
    pub max_abs_deviation_from_c: f64,
    pub cells_evaluated: usize,
}

impl CurvatureReport {
    pub fn cells(&self) -> impl Iterator<Item = (Complex64, f64)> + '_ {
        (0..self.side).flat_map(move |j| {
            (0..self.side).filter_map(move |i| {
                self.curvature[j * self.side + i].map(|v| {
                    (
                        self.origin
                            + Complex64::new(i as f64 * self.spacing, j as f64 * self.spacing),
                        v,
                    )
                })
            })
        })
    }
}

/// kappa = -Laplace(log lambda)/lambda^2 with the five-point stencil,
/// evaluated on cells whose full stencil is unmasked.
pub fn curvature(density: &MetricDensity, reference_c: f64) -> Result<CurvatureReport> {
    let side = density.side;
    let h2 = density.spacing * density.spacing;
    let mut curvature_grid = vec![None; side * side];
    let mut max_dev = 0.0f64;
    let mut count = 0usize;
    let log_at = |i: usize, j: usize| density.get(i, j).map(|v| v.ln());
    for j in 1..side.saturating_sub(1) {
        for i in 1..side - 1 {
            let (c, l, r, d, u) = match (
                log_at(i, j),
                log_at(i - 1, j),
                log_at(i + 1, j),
                log_at(i, j - 1),
                log_at(i, j + 1),
            ) {
                (Some(c), Some(l), Some(r), Some(d), Some(u)) => (c, l, r, d, u),
                _ => continue,
            };
            let laplacian = (l + r + d + u - 4.0 * c) / h2;
            let lambda = density.get(i, j).unwrap();
            let kappa = -laplacian / (lambda * lambda);
            curvature_grid[j * side + i] = Some(kappa);
            max_dev = max_dev.max((kappa - reference_c).abs());
            count += 1;
        }
    }
    if count < 9 {
        return Err(Error::InsufficientInterior { got: count, need: 9 });
    }
    Ok(CurvatureReport {
        curvature: curvature_grid,
        side,
        origin: density.origin,
        spacing: density.spacing,
        reference_curvature: reference_c,
        max_abs_deviation_from_c: max_dev,
        cells_evaluated: count,
    })
}

/// Sample a canonical geometry on a grid. Hyperbolic grids are clipped to
/// |z| <= 0.95; the clip shows up in the mask.
pub fn canonical_grid(geom: CanonicalGeometry, spec: GridSpec) -> Result<MetricDensity> {
    MetricDensity::from_fn(spec, &|z| {
        if geom == CanonicalGeometry::Hyperbolic && z.norm() > 0.95 {
            return Ok(None);
        }
        canonical_density(geom, z).map(Some)
    })
}

/// The Liouville construction: the pullback of the canonical density of the
/// target geometry along a locally univalent map, sampled on a grid.
/// Hyperbolic cells with |f| > 0.95 are masked; |f| >= 1 is a range escape.
pub fn liouville_construct(
    map: &AnalyticMap,
    geom: CanonicalGeometry,
    spec: GridSpec,
) -> Result<MetricDensity> {
    let pullback = PullbackDensity {
        source: DensitySource::Canonical(geom),
        map: map.clone(),
        fd_step: spec.spacing / 4.0,
    };
    MetricDensity::from_fn(spec, &|z| {
        if geom == CanonicalGeometry::Hyperbolic {
            if let Some(v) = map.eval(z)?.finite() {
                if v.norm() >= 1.0 {
                    return Err(Error::RangeEscape { at: z });
                }
                if v.norm() > 0.95 {
                    return Ok(None);
                }
            } else {
                return Err(Error::RangeEscape { at: z });
            }
        }
        pullback.density(z).map(Some)
    })
}

/// Result of gluing two flat-metric targets by one entire harmonic
/// potential.
#[derive(Debug, Clone)]
pub struct HarmonicGlueResult {
    /// u = Re(potential)
    pub potential: Polynomial,
    pub e1: f64,
    pub e2: f64,
    pub degree_used: usize,
    /// sup |phi'| on the base disk; identically 1 for the supported
    /// translations, reported for the record
    pub conformal_factor_bound: f64,
}

impl HarmonicGlueResult {
    pub fn eval_u(&self, z: Complex64) -> f64 {
        self.potential.eval(z).re
    }
}

fn expansion_to_polynomial(exp: &BasisExpansion) -> Polynomial {
    // replay the recurrence in polynomial arithmetic; safe because the glue
    // geometry keeps the basis scale >= 1
    let spec = exp.basis.spec();
    let shifted = Polynomial::affine(
        Complex64::new(1.0 / spec.scale, 0.0),
        -spec.center / spec.scale,
    );
    let mut polys: Vec<Polynomial> = Vec::new();
    polys.push(Polynomial::constant(
        Complex64::new(1.0, 0.0) / exp.basis.first_norm(),
    ));
    for (generator, parent, ortho, norm) in exp.basis.recipes() {
        debug_assert_eq!(generator, 0, "harmonic potentials use polynomial chains");
        let mut p = polys[parent].mul(&shifted);
        for (j, h) in ortho.iter().enumerate() {
            p = p.sub(&polys[j].scale(*h));
        }
        polys.push(p.scale(Complex64::new(1.0 / norm, 0.0)));
    }
    let mut total = Polynomial::zero();
    for (p, c) in polys.iter().zip(&exp.coeffs) {
        total = total.add(&p.scale(*c));
    }
    total
}

/// Fit one entire harmonic function u with e^u close to `lambda` on the
/// disk K and to `mu` pulled forward by the translation z + t on K + t.
/// Translations have |phi'| = 1, so no conformal factor enters the bounds.
pub fn harmonic_glue(
    lambda: &dyn Fn(Complex64) -> f64,
    mu: &dyn Fn(Complex64) -> f64,
    t_stride: f64,
    disk: &ClosedDisk,
    eps: f64,
    degree_cap: usize,
) -> Result<HarmonicGlueResult> {
    if t_stride <= 2.0 * disk.radius + 1.0 {
        return Err(Error::Overlap { stride: t_stride });
    }
    let t = Complex64::new(t_stride, 0.0);
    let region_a = CompactRegion::Disk(*disk);
    let shifted_disk = ClosedDisk {
        center: disk.center + t,
        radius: disk.radius,
    };
    let region_b = CompactRegion::Disk(shifted_disk);

    let center = disk.center + t / 2.0;
    let scale = t_stride / 2.0 + disk.radius;

    // evaluation points for the error sup: boundary plus an interior lattice
    let mut check_points = Vec::new();
    for k in 0..128 {
        let theta = TAU * k as f64 / 128.0;
        check_points.push(disk.center + disk.radius * Complex64::from_polar(1.0, theta));
    }
    let step = disk.radius / 8.0;
    let half = (disk.radius / step).floor() as i64;
    for j in -half..=half {
        for i in -half..=half {
            let z = disk.center + Complex64::new(i as f64 * step, j as f64 * step);
            if (z - disk.center).norm() <= disk.radius {
                check_points.push(z);
            }
        }
    }
    for &z in &check_points {
        if !(lambda(z) > 0.0) {
            return Err(Error::NonPositiveTarget { at: z });
        }
        if !(mu(z) > 0.0) {
            return Err(Error::NonPositiveTarget { at: z });
        }
    }

    let mut degree = 8usize;
    let mut best: Option<HarmonicGlueResult> = None;
    while degree <= degree_cap {
        let n = (8 * degree + 16).max(64);
        let pa = boundary_samples_with_phase(&region_a, n, 0.0)?;
        let pb = boundary_samples_with_phase(&region_b, n, 0.0)?;
        let mut points = pa.points.clone();
        points.extend(pb.points.iter().copied());
        let mut targets = Vec::with_capacity(points.len());
        for &z in &pa.points {
            targets.push(lambda(z).ln());
        }
        for &z in &pb.points {
            targets.push(mu(z - t).ln());
        }

        let spec = BasisSpec::polynomial(center, scale, degree);
        let (basis, cmatrix) = OrthoBasis::build(spec, &points)?;
        // real least squares on Re F: unknowns are the real and imaginary
        // parts of the complex coefficients (the imaginary part of the 0-th
        // coefficient cannot affect Re F and is pinned by the svd solve)
        let rows = points.len();
        let cols = basis.size();
        let mut rmatrix = DMatrix::zeros(rows, 2 * cols);
        for i in 0..rows {
            for j in 0..cols {
                rmatrix[(i, j)] = cmatrix[(i, j)].re;
                rmatrix[(i, cols + j)] = -cmatrix[(i, j)].im;
            }
        }
        let rhs = DVector::from_vec(targets.clone());
        let (x, _cond) = real_lstsq(&rmatrix, &rhs)?;
        let coeffs: Vec<Complex64> = (0..cols)
            .map(|j| Complex64::new(x[j], x[cols + j]))
            .collect();
        let expansion = BasisExpansion {
            basis,
            coeffs,
            condition: 1.0,
        };
        let potential = expansion_to_polynomial(&expansion);

        let mut e1 = 0.0f64;
        let mut e2 = 0.0f64;
        for &z in &check_points {
            let u1 = potential.eval(z).re;
            e1 = e1.max((u1.exp() - lambda(z)).abs());
            let u2 = potential.eval(z + t).re;
            e2 = e2.max((u2.exp() - mu(z)).abs());
        }
        let result = HarmonicGlueResult {
            potential,
            e1,
            e2,
            degree_used: degree,
            conformal_factor_bound: 1.0,
        };
        if best
            .as_ref()
            .map_or(true, |b| e1.max(e2) < b.e1.max(b.e2))
        {
            best = Some(result);
        }
        let b = best.as_ref().unwrap();
        if b.e1 <= eps && b.e2 <= eps {
            return Ok(best.unwrap());
        }
        degree += 8;
    }
    Err(Error::DegreeCapExceeded {
        cap: degree_cap,
        best_error: best.map_or(f64::INFINITY, |b| b.e1.max(b.e2)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn canonical_density_values() {
        assert_eq!(
            canonical_density(CanonicalGeometry::Hyperbolic, c(0.0, 0.0)).unwrap(),
            2.0
        );
        assert_eq!(
            canonical_density(CanonicalGeometry::Euclidean, c(17.0, -3.0)).unwrap(),
            1.0
        );
        assert_eq!(
            canonical_density(CanonicalGeometry::Spherical, c(1.0, 0.0)).unwrap(),
            1.0
        );
        assert!(matches!(
            canonical_density(CanonicalGeometry::Hyperbolic, c(1.0, 0.0)),
            Err(Error::OutsideDisk)
        ));
    }

    #[test]
    fn flat_density_has_exactly_zero_curvature() {
        let spec = GridSpec {
            center: c(0.0, 0.0),
            radius: 0.5,
            spacing: 0.05,
        };
        let grid = MetricDensity::from_fn(spec, &|_| Ok(Some(1.0))).unwrap();
        let report = curvature(&grid, 0.0).unwrap();
        assert_eq!(report.max_abs_deviation_from_c, 0.0);
        assert!(report.cells_evaluated >= 9);
    }

    #[test]
    fn hyperbolic_curvature_is_minus_one() {
        let spec = GridSpec {
            center: c(0.0, 0.0),
            radius: 0.8,
            spacing: 0.005,
        };
        let grid = canonical_grid(CanonicalGeometry::Hyperbolic, spec).unwrap();
        let report = curvature(&grid, -1.0).unwrap();
        assert!(
            report.max_abs_deviation_from_c <= 1e-3,
            "deviation {}",
            report.max_abs_deviation_from_c
        );
    }

    #[test]
    fn spherical_curvature_is_plus_one() {
        let spec = GridSpec {
            center: c(0.0, 0.0),
            radius: 1.0,
            spacing: 0.005,
        };
        let grid = canonical_grid(CanonicalGeometry::Spherical, spec).unwrap();
        let report = curvature(&grid, 1.0).unwrap();
        assert!(
            report.max_abs_deviation_from_c <= 1e-3,
            "deviation {}",
            report.max_abs_deviation_from_c
        );
    }

    #[test]
    fn tiny_grid_has_insufficient_interior() {
        let spec = GridSpec {
            center: c(0.0, 0.0),
            radius: 0.1,
            spacing: 0.06,
        };
        let grid = MetricDensity::from_fn(spec, &|_| Ok(Some(1.0))).unwrap();
        assert!(matches!(
            curvature(&grid, 0.0),
            Err(Error::InsufficientInterior { .. })
        ));
    }

    #[test]
    fn pullback_by_rotation_preserves_hyperbolic_density() {
        let rot = AnalyticMap::Moebius(MoebiusMap::rotation(0.83));
        let pb = PullbackDensity {
            source: DensitySource::Canonical(CanonicalGeometry::Hyperbolic),
            map: rot,
            fd_step: 1e-4,
        };
        for &z in &[c(0.3, 0.2), c(-0.5, 0.1), c(0.0, 0.7)] {
            let expected = canonical_density(CanonicalGeometry::Hyperbolic, z).unwrap();
            assert!((pb.density(z).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn pullback_by_disk_automorphism_is_isometry() {
        let phi = MoebiusMap::disk_automorphism(c(0.3, 0.0), 0.0).unwrap();
        let pb = PullbackDensity {
            source: DensitySource::Canonical(CanonicalGeometry::Hyperbolic),
            map: AnalyticMap::Moebius(phi),
            fd_step: 1e-4,
        };
        for &z in &[c(0.0, 0.0), c(0.4, -0.3), c(-0.6, 0.2), c(0.1, 0.65)] {
            let expected = canonical_density(CanonicalGeometry::Hyperbolic, z).unwrap();
            assert!(
                (pb.density(z).unwrap() - expected).abs() < 1e-12,
                "at {z}"
            );
        }
    }

    #[test]
    fn pullback_of_flat_density_by_exp() {
        let pb = PullbackDensity {
            source: DensitySource::Constant(1.0),
            map: AnalyticMap::Exp,
            fd_step: 1e-4,
        };
        for &z in &[c(0.0, 0.0), c(1.0, 2.0), c(-0.5, 0.3)] {
            assert!((pb.density(z).unwrap() - z.re.exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn liouville_identity_reproduces_hyperbolic_density() {
        let spec = GridSpec {
            center: c(0.0, 0.0),
            radius: 0.8,
            spacing: 0.05,
        };
        let grid = liouville_construct(&AnalyticMap::Identity, CanonicalGeometry::Hyperbolic, spec)
            .unwrap();
        for (_, _, z, v) in grid.valid_cells() {
            let expected = canonical_density(CanonicalGeometry::Hyperbolic, z).unwrap();
            assert!((v - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn liouville_exp_euclidean_is_flat() {
        let spec = GridSpec {
            center: c(0.0, 0.0),
            radius: 0.6,
            spacing: 0.005,
        };
        let grid =
            liouville_construct(&AnalyticMap::Exp, CanonicalGeometry::Euclidean, spec).unwrap();
        let report = curvature(&grid, 0.0).unwrap();
        assert!(
            report.max_abs_deviation_from_c <= 1e-3,
            "deviation {}",
            report.max_abs_deviation_from_c
        );
        // density is e^{Re z}
        for (_, _, z, v) in grid.valid_cells().take(50) {
            assert!((v - z.re.exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn liouville_identity_spherical_curvature() {
        let spec = GridSpec {
            center: c(0.0, 0.0),
            radius: 1.0,
            spacing: 0.005,
        };
        let grid = liouville_construct(&AnalyticMap::Identity, CanonicalGeometry::Spherical, spec)
            .unwrap();
        let report = curvature(&grid, 1.0).unwrap();
        assert!(report.max_abs_deviation_from_c <= 1e-3);
    }

    #[test]
    fn scaling_identity_for_curvature() {
        let spec = GridSpec {
            center: c(0.0, 0.0),
            radius: 0.8,
            spacing: 0.005,
        };
        let grid = canonical_grid(CanonicalGeometry::Hyperbolic, spec).unwrap();
        let doubled = scale_density(&grid, 2.0).unwrap();
        let report = curvature(&doubled, -0.25).unwrap();
        assert!(
            report.max_abs_deviation_from_c <= 1e-3,
            "deviation {}",
            report.max_abs_deviation_from_c
        );
        let identity = scale_density(&grid, 1.0).unwrap();
        for ((_, _, _, a), (_, _, _, b)) in grid.valid_cells().zip(identity.valid_cells()) {
            assert_eq!(a, b);
        }
        let flat = MetricDensity::from_fn(spec, &|_| Ok(Some(1.0))).unwrap();
        let scaled = scale_density(&flat, 5.0).unwrap();
        let report = curvature(&scaled, 0.0).unwrap();
        assert_eq!(report.max_abs_deviation_from_c, 0.0);
    }

    #[test]
    fn harmonic_glue_trivial_case() {
        let disk = ClosedDisk::new(c(0.0, 0.0), 1.0).unwrap();
        let one = |_: Complex64| 1.0;
        let out = harmonic_glue(&one, &one, 8.0, &disk, 1e-9, 40).unwrap();
        assert!(out.e1 <= 1e-9 && out.e2 <= 1e-9);
    }

    #[test]
    fn harmonic_glue_exponential_and_flat() {
        let disk = ClosedDisk::new(c(0.0, 0.0), 1.0).unwrap();
        let lam = |z: Complex64| z.re.exp();
        let one = |_: Complex64| 1.0;
        let out = harmonic_glue(&lam, &one, 8.0, &disk, 1e-3, 40).unwrap();
        assert!(
            out.e1 <= 1e-3 && out.e2 <= 1e-3,
            "e1 {} e2 {} degree {}",
            out.e1,
            out.e2,
            out.degree_used
        );
        assert!(out.degree_used <= 40);
        // symmetric variant
        let out = harmonic_glue(&one, &lam, 8.0, &disk, 1e-3, 40).unwrap();
        assert!(out.e1 <= 1e-3 && out.e2 <= 1e-3);
    }

    #[test]
    fn harmonic_glue_rejects_small_stride() {
        let disk = ClosedDisk::new(c(0.0, 0.0), 1.0).unwrap();
        let one = |_: Complex64| 1.0;
        assert!(matches!(
            harmonic_glue(&one, &one, 2.5, &disk, 1e-3, 40),
            Err(Error::Overlap { .. })
        ));
    }
}
