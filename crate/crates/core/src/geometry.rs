//! Compact regions with circular boundary components, contours, sampling,
//! sup/chordal distances and trapezoidal contour quadrature.
//!
//! Every supported region has circular boundary components, so the positively
//! oriented boundary of a region is the outer circle(s) plus negatively
//! oriented hole circles. Trapezoidal quadrature on a circle is spectrally
//! accurate for integrands analytic in a neighborhood of the circle.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::extended::{chordal_distance, ExtComplex};

pub const TAU: f64 = 2.0 * std::f64::consts::PI;

/// A closed disk |z - center| <= radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedDisk {
    pub center: Complex64,
    pub radius: f64,
}

impl ClosedDisk {
    pub fn new(center: Complex64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() || !center.re.is_finite() || !center.im.is_finite()
        {
            return Err(Error::InvalidRegion(format!(
                "disk needs a finite center and positive radius, got center {center}, radius {radius}"
            )));
        }
        Ok(ClosedDisk { center, radius })
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() <= self.radius
    }

    /// Gap between two disks; negative when they overlap.
    pub fn gap(&self, other: &ClosedDisk) -> f64 {
        (self.center - other.center).norm() - self.radius - other.radius
    }
}

/// Compact set with circular boundary: the geometries the toolkit operates on.
#[derive(Debug, Clone, PartialEq)]
pub enum CompactRegion {
    Disk(ClosedDisk),
    Annulus {
        center: Complex64,
        r_inner: f64,
        r_outer: f64,
    },
    DiskUnion(Vec<ClosedDisk>),
    HoledDisk {
        outer: ClosedDisk,
        holes: Vec<ClosedDisk>,
    },
}

impl CompactRegion {
    pub fn disk(center: Complex64, radius: f64) -> Result<Self> {
        Ok(CompactRegion::Disk(ClosedDisk::new(center, radius)?))
    }

    pub fn annulus(center: Complex64, r_inner: f64, r_outer: f64) -> Result<Self> {
        if !(r_inner > 0.0) || !(r_outer > r_inner) || !r_outer.is_finite() {
            return Err(Error::InvalidRegion(format!(
                "annulus needs 0 < r_inner < r_outer, got {r_inner}, {r_outer}"
            )));
        }
        Ok(CompactRegion::Annulus {
            center,
            r_inner,
            r_outer,
        })
    }

    pub fn disk_union(disks: Vec<ClosedDisk>) -> Result<Self> {
        if disks.is_empty() {
            return Err(Error::InvalidRegion("disk union needs at least one disk".into()));
        }
        for i in 0..disks.len() {
            for j in i + 1..disks.len() {
                if disks[i].gap(&disks[j]) <= 0.0 {
                    return Err(Error::InvalidRegion(format!(
                        "disk union members {i} and {j} are not disjoint with a positive gap"
                    )));
                }
            }
        }
        Ok(CompactRegion::DiskUnion(disks))
    }

    pub fn holed_disk(outer: ClosedDisk, holes: Vec<ClosedDisk>) -> Result<Self> {
        for (i, h) in holes.iter().enumerate() {
            if (h.center - outer.center).norm() + h.radius >= outer.radius {
                return Err(Error::InvalidRegion(format!(
                    "hole {i} is not strictly inside the outer disk"
                )));
            }
        }
        for i in 0..holes.len() {
            for j in i + 1..holes.len() {
                if holes[i].gap(&holes[j]) <= 0.0 {
                    return Err(Error::InvalidRegion(format!(
                        "holes {i} and {j} are not disjoint"
                    )));
                }
            }
        }
        Ok(CompactRegion::HoledDisk { outer, holes })
    }

    /// Outer boundary circles, one per connected component.
    pub fn outer_circles(&self) -> Vec<ClosedDisk> {
        match self {
            CompactRegion::Disk(d) => vec![*d],
            CompactRegion::Annulus { center, r_outer, .. } => vec![ClosedDisk {
                center: *center,
                radius: *r_outer,
            }],
            CompactRegion::DiskUnion(ds) => ds.clone(),
            CompactRegion::HoledDisk { outer, .. } => vec![*outer],
        }
    }

    /// Hole circles: boundaries of the bounded complement components.
    pub fn hole_circles(&self) -> Vec<ClosedDisk> {
        match self {
            CompactRegion::Annulus { center, r_inner, .. } => vec![ClosedDisk {
                center: *center,
                radius: *r_inner,
            }],
            CompactRegion::HoledDisk { holes, .. } => holes.clone(),
            _ => Vec::new(),
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        match self {
            CompactRegion::Disk(d) => d.contains(z),
            CompactRegion::Annulus {
                center,
                r_inner,
                r_outer,
            } => {
                let r = (z - center).norm();
                *r_inner <= r && r <= *r_outer
            }
            CompactRegion::DiskUnion(ds) => ds.iter().any(|d| d.contains(z)),
            CompactRegion::HoledDisk { outer, holes } => {
                outer.contains(z) && holes.iter().all(|h| (z - h.center).norm() >= h.radius)
            }
        }
    }

    /// Distance from z to the union of boundary circles.
    pub fn boundary_distance(&self, z: Complex64) -> f64 {
        let mut dist = f64::INFINITY;
        for c in self.outer_circles().into_iter().chain(self.hole_circles()) {
            dist = dist.min(((z - c.center).norm() - c.radius).abs());
        }
        dist
    }

    pub fn diameter(&self) -> f64 {
        let circles = self.outer_circles();
        let mut d: f64 = 0.0;
        for a in &circles {
            d = d.max(2.0 * a.radius);
            for b in &circles {
                d = d.max((a.center - b.center).norm() + a.radius + b.radius);
            }
        }
        d
    }

    /// Deterministic interior probe points, used by injectivity checks.
    pub fn probe_points(&self, n: usize) -> Vec<Complex64> {
        let (center, radius) = match self {
            CompactRegion::Disk(d) => (d.center, d.radius / 2.0),
            CompactRegion::Annulus {
                center,
                r_inner,
                r_outer,
            } => (*center, (r_inner + r_outer) / 2.0),
            CompactRegion::DiskUnion(ds) => (ds[0].center, ds[0].radius / 2.0),
            CompactRegion::HoledDisk { outer, .. } => (outer.center, 0.75 * outer.radius),
        };
        (0..n)
            .map(|k| center + radius * Complex64::from_polar(1.0, TAU * k as f64 / n as f64))
            .filter(|z| self.contains(*z))
            .collect()
    }
}

/// Domain of holomorphy for approximants; punctures mark excluded points
/// available as branch-factor anchors inside holes of a compact set.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    WholePlane,
    PuncturedPlane(Vec<Complex64>),
    UnitDisk,
    SimplyConnected(ClosedDisk),
}

impl DomainSpec {
    pub fn punctured(punctures: Vec<Complex64>) -> Result<Self> {
        for i in 0..punctures.len() {
            for j in i + 1..punctures.len() {
                if punctures[i] == punctures[j] {
                    return Err(Error::InvalidDomain("punctures must be pairwise distinct".into()));
                }
            }
        }
        Ok(DomainSpec::PuncturedPlane(punctures))
    }

    pub fn punctures(&self) -> &[Complex64] {
        match self {
            DomainSpec::PuncturedPlane(p) => p,
            _ => &[],
        }
    }

    pub fn is_simply_connected(&self) -> bool {
        !matches!(self, DomainSpec::PuncturedPlane(p) if !p.is_empty())
    }

    /// Check the compact set is admissible: inside the domain and with every
    /// puncture clear of the set.
    pub fn validate_region(&self, region: &CompactRegion) -> Result<()> {
        for p in self.punctures() {
            if region.contains(*p) {
                return Err(Error::InvalidDomain(format!(
                    "puncture {p} lies inside the compact set"
                )));
            }
        }
        if let DomainSpec::UnitDisk = self {
            for c in region.outer_circles() {
                if c.center.norm() + c.radius >= 1.0 {
                    return Err(Error::InvalidDomain(
                        "compact set is not contained in the unit disk".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Oriented circle with equally spaced quadrature nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    pub center: Complex64,
    pub radius: f64,
    pub orientation: i8,
    pub node_count: usize,
}

impl Contour {
    pub fn new(center: Complex64, radius: f64, orientation: i8, node_count: usize) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidContour(format!("radius must be positive, got {radius}")));
        }
        if orientation != 1 && orientation != -1 {
            return Err(Error::InvalidContour(format!(
                "orientation must be +1 or -1, got {orientation}"
            )));
        }
        if node_count < 16 {
            return Err(Error::InvalidContour(format!(
                "node_count must be at least 16, got {node_count}"
            )));
        }
        Ok(Contour {
            center,
            radius,
            orientation,
            node_count,
        })
    }

    pub fn circle(disk: &ClosedDisk, orientation: i8, node_count: usize) -> Result<Self> {
        Contour::new(disk.center, disk.radius, orientation, node_count)
    }

    pub fn node(&self, k: usize) -> Complex64 {
        let theta = TAU * (self.orientation as f64) * (k as f64) / (self.node_count as f64);
        self.center + self.radius * Complex64::from_polar(1.0, theta)
    }

    pub fn nodes(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.node_count).map(move |k| self.node(k))
    }

    /// dz at node k for the trapezoid rule: i * orientation * (z_k - center) * (2 pi / N).
    fn dz(&self, k: usize) -> Complex64 {
        let tangent = Complex64::new(0.0, self.orientation as f64) * (self.node(k) - self.center);
        tangent * (TAU / self.node_count as f64)
    }

    pub fn with_node_count(&self, node_count: usize) -> Contour {
        Contour {
            node_count,
            ..self.clone()
        }
    }
}

/// Default node count for quadrature touching polynomial data of degree `d`.
pub fn default_node_count(degree: usize) -> usize {
    (8 * degree + 16).max(64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleRole {
    Boundary,
    InteriorGrid,
}

/// A deterministic set of sample points attached to a region.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub points: Vec<Complex64>,
    pub role: SampleRole,
    pub spacing: Option<f64>,
}

/// Equally spaced samples on every boundary circle of the region.
///
/// The optional `phase` rotates all samples; fit and validation sets use
/// different phases so they never share a point.
pub fn boundary_samples_with_phase(
    region: &CompactRegion,
    n_per_component: usize,
    phase: f64,
) -> Result<SampleSet> {
    if n_per_component < 16 {
        return Err(Error::InvalidContour(format!(
            "need at least 16 samples per component, got {n_per_component}"
        )));
    }
    let mut points = Vec::new();
    for c in region.outer_circles().into_iter().chain(region.hole_circles()) {
        for k in 0..n_per_component {
            let theta = TAU * k as f64 / n_per_component as f64 + phase;
            points.push(c.center + c.radius * Complex64::from_polar(1.0, theta));
        }
    }
    Ok(SampleSet {
        points,
        role: SampleRole::Boundary,
        spacing: None,
    })
}

pub fn boundary_samples(region: &CompactRegion, n_per_component: usize) -> Result<SampleSet> {
    boundary_samples_with_phase(region, n_per_component, 0.0)
}

/// Axis-aligned lattice with the given spacing, anchored at each component's
/// center and clipped to the region.
pub fn interior_grid(region: &CompactRegion, spacing: f64) -> Result<SampleSet> {
    if !(spacing > 0.0) {
        return Err(Error::InvalidRegion(format!("grid spacing must be positive, got {spacing}")));
    }
    let anchors: Vec<(Complex64, f64)> = match region {
        CompactRegion::DiskUnion(ds) => ds.iter().map(|d| (d.center, d.radius)).collect(),
        CompactRegion::Disk(d) => vec![(d.center, d.radius)],
        CompactRegion::Annulus { center, r_outer, .. } => vec![(*center, *r_outer)],
        CompactRegion::HoledDisk { outer, .. } => vec![(outer.center, outer.radius)],
    };
    let mut points = Vec::new();
    for (anchor, radius) in anchors {
        let extent = (radius / spacing).floor() as i64;
        for j in -extent..=extent {
            for k in -extent..=extent {
                let z = anchor + Complex64::new(j as f64 * spacing, k as f64 * spacing);
                if region.contains(z) {
                    points.push(z);
                }
            }
        }
    }
    if points.is_empty() {
        return Err(Error::EmptyRegion);
    }
    Ok(SampleSet {
        points,
        role: SampleRole::InteriorGrid,
        spacing: Some(spacing),
    })
}

/// Max over samples of |f - g|; rejects non-finite values.
pub fn sup_distance(
    f: &dyn Fn(Complex64) -> ExtComplex,
    g: &dyn Fn(Complex64) -> ExtComplex,
    samples: &SampleSet,
) -> Result<f64> {
    let mut max = 0.0f64;
    for &z in &samples.points {
        let (fv, gv) = (f(z), g(z));
        let (fv, gv) = match (fv.finite(), gv.finite()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::NonFiniteValue { at: z }),
        };
        let d = (fv - gv).norm();
        if !d.is_finite() {
            return Err(Error::NonFiniteValue { at: z });
        }
        max = max.max(d);
    }
    Ok(max)
}

/// Max over samples of the chordal distance; poles are allowed.
pub fn chordal_sup_distance(
    f: &dyn Fn(Complex64) -> ExtComplex,
    g: &dyn Fn(Complex64) -> ExtComplex,
    samples: &SampleSet,
) -> f64 {
    samples
        .points
        .iter()
        .map(|&z| chordal_distance(f(z), g(z)))
        .fold(0.0, f64::max)
}

/// Trapezoidal quadrature of the contour integral of f along the circle.
pub fn contour_integral(
    f: &dyn Fn(Complex64) -> ExtComplex,
    contour: &Contour,
) -> Result<Complex64> {
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..contour.node_count {
        let z = contour.node(k);
        match f(z).finite() {
            Some(v) => sum += v * contour.dz(k),
            None => return Err(Error::NonFiniteValue { at: z }),
        }
    }
    Ok(sum)
}

/// Winding number of the contour around p via (1/2 pi i) \oint dz/(z-p).
///
/// The quadrature value must land within 0.1 of an integer; callers should
/// raise the node count on `QuadratureInconclusive`.
pub fn winding_number(contour: &Contour, p: Complex64) -> Result<i32> {
    if ((p - contour.center).norm() - contour.radius).abs() < 1e-12 * contour.radius.max(1.0) {
        return Err(Error::PointOnContour);
    }
    let integral = contour_integral(&|z| ExtComplex::from(1.0 / (z - p)), contour)?;
    let value = integral / Complex64::new(0.0, TAU);
    let rounded = value.re.round();
    let residual = (value - rounded).norm();
    if residual >= 0.1 {
        return Err(Error::QuadratureInconclusive { residual });
    }
    Ok(rounded as i32)
}

/// Winding number of a sampled closed curve around the origin, by phase
/// unwrapping. Doubles the sample count (up to 4 times) when adjacent phase
/// jumps reach pi.
pub fn winding_of_closed_curve(
    f: &dyn Fn(Complex64) -> ExtComplex,
    contour: &Contour,
) -> Result<i32> {
    let mut n = contour.node_count;
    for _ in 0..5 {
        let c = contour.with_node_count(n);
        match try_winding_of_curve(f, &c)? {
            Some(w) => return Ok(w),
            None => n *= 2,
        }
    }
    Err(Error::QuadratureInconclusive { residual: 1.0 })
}

fn try_winding_of_curve(
    f: &dyn Fn(Complex64) -> ExtComplex,
    contour: &Contour,
) -> Result<Option<i32>> {
    let mut total = 0.0f64;
    let first = match f(contour.node(0)).finite() {
        Some(v) => v,
        None => return Err(Error::NonFiniteValue { at: contour.node(0) }),
    };
    if first.norm() == 0.0 {
        return Err(Error::PointOnContour);
    }
    let mut prev = first;
    for k in 1..=contour.node_count {
        let z = contour.node(k % contour.node_count);
        let v = match f(z).finite() {
            Some(v) => v,
            None => return Err(Error::NonFiniteValue { at: z }),
        };
        if v.norm() == 0.0 {
            return Err(Error::PointOnContour);
        }
        let jump = (v / prev).arg();
        if jump.abs() > 0.9 * std::f64::consts::PI {
            return Ok(None);
        }
        total += jump;
        prev = v;
    }
    let value = total / TAU;
    let rounded = value.round();
    if (value - rounded).abs() >= 0.1 {
        return Ok(None);
    }
    Ok(Some(rounded as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn contour_integral_of_reciprocal_is_two_pi_i() {
        let gamma = Contour::new(c(0.0, 0.0), 1.0, 1, 64).unwrap();
        let v = contour_integral(&|z| ExtComplex::from(1.0 / z), &gamma).unwrap();
        assert!((v - c(0.0, TAU)).norm() < 1e-12);
    }

    #[test]
    fn contour_integral_of_analytic_vanishes() {
        let gamma = Contour::new(c(0.0, 0.0), 1.0, 1, 64).unwrap();
        let v = contour_integral(&|z| ExtComplex::from(z), &gamma).unwrap();
        assert!(v.norm() < 1e-12);
        let w = contour_integral(&|z| ExtComplex::from(1.0 / (z * z)), &gamma).unwrap();
        assert!(w.norm() < 1e-12);
    }

    #[test]
    fn winding_numbers_match_orientation() {
        let gamma = Contour::new(c(0.0, 0.0), 1.0, 1, 64).unwrap();
        assert_eq!(winding_number(&gamma, c(0.0, 0.0)).unwrap(), 1);
        assert_eq!(winding_number(&gamma, c(3.0, 0.0)).unwrap(), 0);
        let reversed = Contour::new(c(0.0, 0.0), 1.0, -1, 64).unwrap();
        assert_eq!(winding_number(&reversed, c(0.0, 0.0)).unwrap(), -1);
    }

    #[test]
    fn point_on_contour_is_rejected() {
        let gamma = Contour::new(c(0.0, 0.0), 1.0, 1, 64).unwrap();
        assert!(matches!(
            winding_number(&gamma, c(1.0, 0.0)),
            Err(Error::PointOnContour)
        ));
    }

    #[test]
    fn boundary_sample_counts() {
        let disk = CompactRegion::disk(c(0.0, 0.0), 1.0).unwrap();
        assert_eq!(boundary_samples(&disk, 64).unwrap().points.len(), 64);
        let ann = CompactRegion::annulus(c(0.0, 0.0), 0.5, 2.0).unwrap();
        assert_eq!(boundary_samples(&ann, 64).unwrap().points.len(), 128);
    }

    #[test]
    fn unit_disk_grid_at_half_spacing_has_13_points() {
        let disk = CompactRegion::disk(c(0.0, 0.0), 1.0).unwrap();
        let grid = interior_grid(&disk, 0.5).unwrap();
        assert_eq!(grid.points.len(), 13);
    }

    #[test]
    fn oversize_spacing_gives_empty_region() {
        let disk = CompactRegion::disk(c(10.0, 0.0), 0.3).unwrap();
        // lattice anchored at the center always contains the center itself,
        // so shift to an annulus to make the grid empty
        let ann = CompactRegion::annulus(c(0.0, 0.0), 0.2, 0.4).unwrap();
        assert!(matches!(interior_grid(&ann, 5.0), Err(Error::EmptyRegion)));
        assert!(interior_grid(&disk, 5.0).is_ok()); // center survives
    }

    #[test]
    fn sup_distance_examples() {
        let disk = CompactRegion::disk(c(0.0, 0.0), 1.0).unwrap();
        let samples = boundary_samples(&disk, 64).unwrap();
        let id = |z: Complex64| ExtComplex::from(z);
        assert_eq!(sup_distance(&id, &id, &samples).unwrap(), 0.0);
        let shifted = |z: Complex64| ExtComplex::from(z + 1.0);
        assert!((sup_distance(&id, &shifted, &samples).unwrap() - 1.0).abs() < 1e-15);
        let sq = |z: Complex64| ExtComplex::from(z * z);
        let zero = |_: Complex64| ExtComplex::from(c(0.0, 0.0));
        assert!((sup_distance(&sq, &zero, &samples).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn sup_distance_rejects_poles() {
        let disk = CompactRegion::disk(c(0.0, 0.0), 1.0).unwrap();
        let samples = SampleSet {
            points: vec![c(0.0, 0.0)],
            role: SampleRole::InteriorGrid,
            spacing: Some(1.0),
        };
        let _ = disk;
        let pole = |_: Complex64| ExtComplex::Infinity;
        let id = |z: Complex64| ExtComplex::from(z);
        assert!(matches!(
            sup_distance(&pole, &id, &samples),
            Err(Error::NonFiniteValue { .. })
        ));
    }

    #[test]
    fn chordal_sup_examples() {
        let disk = CompactRegion::disk(c(0.0, 0.0), 1.0).unwrap();
        let samples = boundary_samples(&disk, 64).unwrap();
        let recip = |z: Complex64| ExtComplex::from(1.0 / z);
        assert_eq!(chordal_sup_distance(&recip, &recip, &samples), 0.0);
        let zero = |_: Complex64| ExtComplex::from(c(0.0, 0.0));
        let inf = |_: Complex64| ExtComplex::Infinity;
        assert_eq!(chordal_sup_distance(&zero, &inf, &samples), 1.0);
        let one_point = SampleSet {
            points: vec![c(1.0, 0.0)],
            role: SampleRole::Boundary,
            spacing: None,
        };
        let d = chordal_sup_distance(&recip, &zero, &one_point);
        assert!((d - 1.0 / 2.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn laurent_monomial_integrals_are_exact() {
        // \oint (z-a)^k dz = 2 pi i * orientation for k = -1, else 0
        let center = c(0.4, -0.2);
        for orientation in [1i8, -1] {
            for k in -6i32..=6 {
                let n = default_node_count(6);
                let gamma = Contour::new(center, 1.3, orientation, n).unwrap();
                let f = move |z: Complex64| ExtComplex::from((z - center).powi(k));
                let v = contour_integral(&f, &gamma).unwrap();
                let expected = if k == -1 {
                    c(0.0, TAU * orientation as f64)
                } else {
                    c(0.0, 0.0)
                };
                assert!(
                    (v - expected).norm() < 1e-12,
                    "k={k} orientation={orientation}: {v}"
                );
            }
        }
    }
}
