//! Composition-operator experiments: run-away and injectivity diagnostics
//! for self-map sequences, finite-stage universal locally univalent
//! functions built by gluing targets along the sequence, special covering
//! maps, and the metric counterpart through the Liouville correspondence.

use num_complex::Complex64;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::extended::ExtComplex;
use crate::geometry::{winding_of_closed_curve, CompactRegion, ClosedDisk, Contour, DomainSpec, TAU};
use crate::metrics::{canonical_density, AnalyticMap, CanonicalGeometry};
use crate::rational::{certify_local_univalence, precompose_moebius, MoebiusMap, RationalFunction};
use crate::runge::{glue_targets, ApproximationReport, LuApproximant};

/// Parametrized family of locally univalent self-maps used for orbit
/// experiments. Every member is a Moebius map, so images of disks are disks,
/// computed exactly.
#[derive(Debug, Clone)]
pub struct SelfMapSequence {
    pub kind: SequenceKind,
    pub domain: DomainSpec,
}

#[derive(Debug, Clone)]
pub enum SequenceKind {
    Translations { stride: Complex64 },
    DiskAutomorphisms { params: Vec<(Complex64, f64)> },
    Explicit(Vec<MoebiusMap>),
}

impl SelfMapSequence {
    pub fn translations(stride: Complex64) -> Self {
        SelfMapSequence {
            kind: SequenceKind::Translations { stride },
            domain: DomainSpec::WholePlane,
        }
    }

    pub fn disk_automorphisms(params: Vec<(Complex64, f64)>) -> Result<Self> {
        for (a, _) in &params {
            if a.norm() >= 1.0 {
                return Err(Error::InvalidFunction(
                    "disk automorphism parameters must satisfy |a| < 1".into(),
                ));
            }
        }
        Ok(SelfMapSequence {
            kind: SequenceKind::DiskAutomorphisms { params },
            domain: DomainSpec::UnitDisk,
        })
    }

    pub fn explicit(maps: Vec<MoebiusMap>, domain: DomainSpec) -> Result<Self> {
        if let DomainSpec::UnitDisk = domain {
            // self-map check on boundary samples
            for (i, t) in maps.iter().enumerate() {
                for k in 0..64 {
                    let z = Complex64::from_polar(1.0 - 1e-9, TAU * k as f64 / 64.0);
                    match t.apply(ExtComplex::Finite(z)).finite() {
                        Some(w) if w.norm() <= 1.0 + 1e-9 => {}
                        _ => {
                            return Err(Error::InvalidFunction(format!(
                                "member {i} does not map the unit disk into itself"
                            )))
                        }
                    }
                }
            }
        }
        Ok(SelfMapSequence {
            kind: SequenceKind::Explicit(maps),
            domain,
        })
    }

    /// The n-th member, 1-based.
    pub fn member(&self, n: usize) -> Result<MoebiusMap> {
        if n == 0 {
            return Err(Error::Config("sequence members are 1-based".into()));
        }
        match &self.kind {
            SequenceKind::Translations { stride } => {
                Ok(MoebiusMap::translation(stride * n as f64))
            }
            SequenceKind::DiskAutomorphisms { params } => {
                let (a, theta) = params.get(n - 1).copied().ok_or_else(|| {
                    Error::Config(format!("sequence has {} members, asked for {n}", params.len()))
                })?;
                MoebiusMap::disk_automorphism(a, theta)
            }
            SequenceKind::Explicit(maps) => maps.get(n - 1).copied().ok_or_else(|| {
                Error::Config(format!("sequence has {} members, asked for {n}", maps.len()))
            }),
        }
    }

    pub fn len(&self) -> Option<usize> {
        match &self.kind {
            SequenceKind::Translations { .. } => None,
            SequenceKind::DiskAutomorphisms { params } => Some(params.len()),
            SequenceKind::Explicit(maps) => Some(maps.len()),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }
}

fn region_disjoint_from_disk(region: &CompactRegion, center: Complex64, radius: f64) -> bool {
    match region {
        CompactRegion::Disk(d) => (d.center - center).norm() > d.radius + radius,
        CompactRegion::DiskUnion(ds) => ds
            .iter()
            .all(|d| (d.center - center).norm() > d.radius + radius),
        CompactRegion::Annulus {
            center: c0,
            r_inner,
            r_outer,
        } => {
            let d = (c0 - center).norm();
            d > r_outer + radius || d + radius < *r_inner
        }
        CompactRegion::HoledDisk { outer, holes } => {
            let d = (outer.center - center).norm();
            d > outer.radius + radius
                || holes
                    .iter()
                    .any(|h| (h.center - center).norm() + radius < h.radius)
        }
    }
}

/// Smallest n <= n_max with the exact Moebius image of K disjoint from K;
/// `None` when no such index exists in range.
pub fn runaway_index(
    seq: &SelfMapSequence,
    region: &CompactRegion,
    n_max: usize,
) -> Result<Option<usize>> {
    let disks: Vec<ClosedDisk> = match region {
        CompactRegion::Disk(d) => vec![*d],
        CompactRegion::DiskUnion(ds) => ds.clone(),
        _ => {
            return Err(Error::UnsupportedDomain(
                "run-away indices are computed for disks and disk unions".into(),
            ))
        }
    };
    let upper = match seq.len() {
        Some(l) => n_max.min(l),
        None => n_max,
    };
    for n in 1..=upper {
        let t = seq.member(n)?;
        let mut disjoint = true;
        for d in &disks {
            let (ic, ir) = t.image_of_disk(d)?;
            if !region_disjoint_from_disk(region, ic, ir) {
                disjoint = false;
                break;
            }
        }
        if disjoint {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// Injectivity on K by argument-principle counting: for eight deterministic
/// probe points the curve phi(boundary) - phi(probe) must wind exactly once
/// around zero, and boundary samples must stay pairwise distinct.
pub fn injectivity_check(map: &AnalyticMap, region: &CompactRegion) -> Result<bool> {
    let nodes = 256usize;

    // distinctness of 64 boundary samples
    let mut samples = Vec::new();
    for c in region.outer_circles() {
        for k in 0..64 {
            let z = c.center + c.radius * Complex64::from_polar(1.0, TAU * k as f64 / 64.0);
            let w = map
                .eval(z)?
                .finite()
                .ok_or(Error::NonFiniteValue { at: z })?;
            samples.push(w);
        }
    }
    for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            if (samples[i] - samples[j]).norm() < 1e-10 {
                return Ok(false);
            }
        }
    }

    for probe in region.probe_points(8) {
        let w0 = map
            .eval(probe)?
            .finite()
            .ok_or(Error::NonFiniteValue { at: probe })?;
        let shifted = |z: Complex64| -> ExtComplex {
            match map.eval(z) {
                Ok(ExtComplex::Finite(v)) => ExtComplex::from(v - w0),
                _ => ExtComplex::Infinity,
            }
        };
        // guard: the probe image must stay off the mapped boundary
        for c in region.outer_circles() {
            for k in 0..nodes {
                let z = c.center + c.radius * Complex64::from_polar(1.0, TAU * k as f64 / nodes as f64);
                if let Some(v) = shifted(z).finite() {
                    if v.norm() < 1e-12 * (1.0 + w0.norm()) {
                        return Err(Error::ProbeOnBoundary);
                    }
                }
            }
        }
        let mut count: i64 = 0;
        for c in region.outer_circles() {
            let gamma = Contour::circle(&c, 1, nodes)?;
            count += winding_of_closed_curve(&shifted, &gamma)? as i64;
        }
        for c in region.hole_circles() {
            let gamma = Contour::circle(&c, -1, nodes)?;
            count += winding_of_closed_curve(&shifted, &gamma)? as i64;
        }
        if count != 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Diagnostics of a sequence against a list of test regions.
#[derive(Debug, Clone)]
pub struct SequenceDiagnostics {
    /// per region: first run-away index up to the bound, if any
    pub runaway_indices: Vec<Option<usize>>,
    /// per region, per member 1..=n_max: injectivity verdicts
    pub injectivity_verdicts: Vec<Vec<bool>>,
    /// per region: smallest index from which every later member up to the
    /// bound was injective
    pub eventually_injective_from: Vec<Option<usize>>,
    pub n_max: usize,
}

pub fn diagnose_sequence(
    seq: &SelfMapSequence,
    regions: &[CompactRegion],
    n_max: usize,
) -> Result<SequenceDiagnostics> {
    let mut runaway_indices = Vec::with_capacity(regions.len());
    let mut injectivity_verdicts = Vec::with_capacity(regions.len());
    let mut eventually = Vec::with_capacity(regions.len());
    let upper = match seq.len() {
        Some(l) => n_max.min(l),
        None => n_max,
    };
    for region in regions {
        runaway_indices.push(runaway_index(seq, region, n_max)?);
        let mut verdicts = Vec::with_capacity(upper);
        for n in 1..=upper {
            let t = seq.member(n)?;
            verdicts.push(injectivity_check(&AnalyticMap::Moebius(t), region)?);
        }
        let from = (1..=upper)
            .find(|&k| verdicts[k - 1..].iter().all(|v| *v));
        eventually.push(from);
        injectivity_verdicts.push(verdicts);
    }
    Ok(SequenceDiagnostics {
        runaway_indices,
        injectivity_verdicts,
        eventually_injective_from: eventually,
        n_max: upper,
    })
}

/// Result of a finite-stage universality construction.
#[derive(Debug, Clone)]
pub struct OrbitReport {
    /// sup_K |F(phi_n_i(z)) - g_i(z)| per target
    pub target_errors: Vec<f64>,
    /// argument-principle zero count of F' over each stage image contour
    pub derivative_zero_counts: Vec<i32>,
    pub stages: Vec<usize>,
    pub glue: ApproximationReport,
}

/// Build one locally univalent F whose orbit under the first stage maps
/// reproduces every target on K to within eps: stage i carries target i via
/// the exact Moebius inverse, the pieces are glued, and the result is
/// certified both in value and through the argument principle on every
/// stage image.
pub fn build_finite_universal(
    targets: &[RationalFunction],
    region: &ClosedDisk,
    seq: &SelfMapSequence,
    eps: f64,
) -> Result<(Arc<LuApproximant>, OrbitReport)> {
    if targets.is_empty() {
        return Err(Error::Config("need at least one target".into()));
    }
    if !seq.domain.is_simply_connected() {
        return Err(Error::UnsupportedDomain(
            "universality constructions need a simply connected domain".into(),
        ));
    }
    let m = targets.len();
    let k_region = CompactRegion::Disk(*region);

    // the construction uses the first m members as stages
    let mut stage_maps = Vec::with_capacity(m);
    let mut images = Vec::with_capacity(m);
    for i in 1..=m {
        let t = seq.member(i)?;
        if !injectivity_check(&AnalyticMap::Moebius(t), &k_region)? {
            return Err(Error::NotLocallyUnivalent);
        }
        let (ic, ir) = t.image_of_disk(region)?;
        images.push(ClosedDisk::new(ic, ir)?);
        stage_maps.push(t);
    }
    // pairwise separation with gap >= radius/2, and the runaway-style check
    // against K itself keeps the hull out of the base region
    for i in 0..m {
        for j in i + 1..m {
            if images[i].gap(&images[j]) < 0.5 * region.radius {
                return Err(Error::StagesNotSeparable);
            }
        }
    }

    let mut pieces = Vec::with_capacity(m);
    for (i, target) in targets.iter().enumerate() {
        let cert = certify_local_univalence(target, &k_region)?;
        if !cert.verdict {
            return Err(Error::NotLocallyUnivalent);
        }
        let transported = precompose_moebius(target, &stage_maps[i].inverse());
        pieces.push((images[i], transported));
    }

    let (glued, _piece_errors, glue_report) = glue_targets(&pieces, &seq.domain, eps)?;
    let glued = Arc::new(glued);

    // orbit certification directly on K
    let mut target_errors = Vec::with_capacity(m);
    for (i, target) in targets.iter().enumerate() {
        let mut err = 0.0f64;
        let mut points = vec![region.center];
        for k in 0..96 {
            let theta = TAU * k as f64 / 96.0 + 0.005;
            points.push(region.center + region.radius * Complex64::from_polar(1.0, theta));
        }
        for z in points {
            let w = stage_maps[i].apply_finite(z)?;
            let fv = glued.eval(w);
            let gv = target.eval_finite(z)?;
            err = err.max((fv - gv).norm());
        }
        target_errors.push(err);
    }

    let mut derivative_zero_counts = Vec::with_capacity(m);
    for disk in &images {
        let gamma = Contour::circle(disk, 1, 512)?;
        let count = winding_of_closed_curve(
            &|z| ExtComplex::from(glued.derivative(z)),
            &gamma,
        )?;
        derivative_zero_counts.push(count);
    }

    let report = OrbitReport {
        target_errors,
        derivative_zero_counts,
        stages: (1..=m).collect(),
        glue: glue_report,
    };
    Ok((glued, report))
}

/// The two special normalized covering maps: the identity on the disk, and
/// z -> exp((z+1)/(z-1)) from the disk onto the punctured disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoveringDomain {
    UnitDisk,
    PuncturedUnitDisk,
}

#[derive(Debug, Clone, Copy)]
pub struct CoveringMap {
    pub domain: CoveringDomain,
}

impl CoveringMap {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self.domain {
            CoveringDomain::UnitDisk => z,
            CoveringDomain::PuncturedUnitDisk => ((z + 1.0) / (z - 1.0)).exp(),
        }
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        match self.domain {
            CoveringDomain::UnitDisk => Complex64::new(1.0, 0.0),
            CoveringDomain::PuncturedUnitDisk => {
                let w = z - 1.0;
                self.eval(z) * (-2.0) / (w * w)
            }
        }
    }
}

pub fn covering_map_special(domain: CoveringDomain) -> CoveringMap {
    CoveringMap { domain }
}

/// Metric orbit experiment: build F for the maps f_i, pull the canonical
/// density back along F, and compare the pullbacks along the stage maps with
/// the target densities f_i^* lambda_{D_c} on K.
#[derive(Debug, Clone)]
pub struct MetricOrbitReport {
    pub density_errors: Vec<f64>,
    pub orbit: OrbitReport,
}

pub fn metric_orbit_experiment(
    maps: &[RationalFunction],
    geom: CanonicalGeometry,
    region: &ClosedDisk,
    seq: &SelfMapSequence,
    eps: f64,
) -> Result<(Arc<LuApproximant>, MetricOrbitReport)> {
    // range check first: every map must send K into the target geometry
    let mut check_points = vec![region.center];
    for k in 0..64 {
        let theta = TAU * k as f64 / 64.0;
        check_points.push(region.center + region.radius * Complex64::from_polar(1.0, theta));
    }
    for f in maps {
        for &z in &check_points {
            match geom {
                CanonicalGeometry::Hyperbolic => match f.eval(z).finite() {
                    Some(v) if v.norm() < 1.0 => {}
                    _ => return Err(Error::RangeEscape { at: z }),
                },
                CanonicalGeometry::Euclidean => {
                    if f.eval(z).finite().is_none() {
                        return Err(Error::RangeEscape { at: z });
                    }
                }
                CanonicalGeometry::Spherical => {}
            }
        }
    }
    if geom == CanonicalGeometry::Hyperbolic {
        return Err(Error::UnsupportedDomain(
            "metric orbit experiments cover the non-negative curvature cases".into(),
        ));
    }

    let (glued, orbit) = build_finite_universal(maps, region, seq, eps)?;

    // density of F^* lambda along stage i, compared with f_i^* lambda on K
    let mut density_errors = Vec::with_capacity(maps.len());
    for (i, f) in maps.iter().enumerate() {
        let t = seq.member(orbit.stages[i])?;
        let fp = f.derivative();
        let mut err = 0.0f64;
        for &z in &check_points {
            let w = t.apply_finite(z)?;
            let tp = t
                .derivative_at(z)
                .finite()
                .ok_or(Error::NonFiniteValue { at: z })?;
            let fw = glued.eval(w);
            let fpw = glued.derivative(w);
            let pulled = match geom {
                CanonicalGeometry::Euclidean => (fpw * tp).norm(),
                CanonicalGeometry::Spherical => {
                    canonical_density(CanonicalGeometry::Spherical, fw)? * (fpw * tp).norm()
                }
                CanonicalGeometry::Hyperbolic => unreachable!(),
            };
            let fv = f.eval_finite(z)?;
            let fpv = fp.eval_finite(z)?;
            let target = match geom {
                CanonicalGeometry::Euclidean => fpv.norm(),
                CanonicalGeometry::Spherical => {
                    canonical_density(CanonicalGeometry::Spherical, fv)? * fpv.norm()
                }
                CanonicalGeometry::Hyperbolic => unreachable!(),
            };
            err = err.max((pulled - target).abs());
        }
        density_errors.push(err);
    }

    Ok((
        glued,
        MetricOrbitReport {
            density_errors,
            orbit,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{exp_taylor, Polynomial};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn translations_run_away_at_three() {
        let seq = SelfMapSequence::translations(c(1.0, 0.0));
        let region = CompactRegion::disk(c(0.0, 0.0), 1.0).unwrap();
        assert_eq!(runaway_index(&seq, &region, 10).unwrap(), Some(3));
    }

    #[test]
    fn rotations_never_run_away()  {
        let params: Vec<(Complex64, f64)> = (1..=100)
            .map(|n| (c(0.0, 0.0), 0.37 * n as f64))
            .collect();
        let seq = SelfMapSequence::disk_automorphisms(params).unwrap();
        let region = CompactRegion::disk(c(0.0, 0.0), 0.5).unwrap();
        assert_eq!(runaway_index(&seq, &region, 100).unwrap(), None);
    }

    #[test]
    fn boundary_crowding_automorphisms_run_away() {
        // a_n = 1 - 2^-n pushes the image disk toward the boundary; the
        // exact circle-image oracle decides the first disjoint stage
        let params: Vec<(Complex64, f64)> = (1..=20)
            .map(|n| (c(1.0 - 0.5f64.powi(n), 0.0), 0.0))
            .collect();
        let seq = SelfMapSequence::disk_automorphisms(params.clone()).unwrap();
        let region_disk = ClosedDisk::new(c(0.0, 0.0), 0.5).unwrap();
        let region = CompactRegion::Disk(region_disk);
        let got = runaway_index(&seq, &region, 20).unwrap();
        // oracle: recompute disjointness directly from mapped circle samples
        let mut expected = None;
        'outer: for n in 1..=20usize {
            let t = MoebiusMap::disk_automorphism(params[n - 1].0, 0.0).unwrap();
            let (ic, ir) = t.image_of_disk(&region_disk).unwrap();
            if (ic.norm() - ir) > 0.5 {
                expected = Some(n);
                break 'outer;
            }
        }
        assert_eq!(got, expected);
        assert!(got.is_some());
    }

    #[test]
    fn moebius_maps_are_injective_everywhere() {
        let t = MoebiusMap::disk_automorphism(c(0.4, -0.1), 1.2).unwrap();
        let region = CompactRegion::disk(c(0.1, 0.0), 0.6).unwrap();
        assert!(injectivity_check(&AnalyticMap::Moebius(t), &region).unwrap());
    }

    #[test]
    fn square_map_injectivity_depends_on_region() {
        let sq = AnalyticMap::rational(RationalFunction::from_polynomial(
            Polynomial::monomial(2, c(1.0, 0.0)),
        ));
        let disk01 = CompactRegion::disk(c(0.0, 0.0), 1.0).unwrap();
        assert!(!injectivity_check(&sq, &disk01).unwrap());
        let disk2 = CompactRegion::disk(c(2.0, 0.0), 0.5).unwrap();
        assert!(injectivity_check(&sq, &disk2).unwrap());
    }

    #[test]
    fn single_target_universal_build() {
        let seq = SelfMapSequence::translations(c(8.0, 0.0));
        let region = ClosedDisk::new(c(0.0, 0.0), 1.0).unwrap();
        let targets = vec![RationalFunction::identity()];
        let (f, report) = build_finite_universal(&targets, &region, &seq, 1e-6).unwrap();
        assert!(report.target_errors[0] <= 1e-6);
        assert!(report.derivative_zero_counts.iter().all(|c| *c == 0));
        // F o phi_1 is close to the identity on K
        let z = c(0.3, -0.2);
        assert!((f.eval(z + 8.0) - z).norm() <= 1e-5);
    }

    #[test]
    fn overlapping_stages_are_rejected() {
        let seq = SelfMapSequence::translations(c(1.0, 0.0));
        let region = ClosedDisk::new(c(0.0, 0.0), 1.0).unwrap();
        let targets = vec![RationalFunction::identity(), RationalFunction::identity()];
        assert!(matches!(
            build_finite_universal(&targets, &region, &seq, 1e-3),
            Err(Error::StagesNotSeparable)
        ));
    }

    #[test]
    fn three_target_universal_build() {
        let seq = SelfMapSequence::translations(c(8.0, 0.0));
        let region = ClosedDisk::new(c(0.0, 0.0), 1.0).unwrap();
        let pole_target = RationalFunction::new(
            Polynomial::constant(c(1.0, 0.0)),
            Polynomial::new(vec![c(1.0, 0.0), c(-0.1, 0.0)]),
        )
        .unwrap();
        let targets = vec![
            RationalFunction::identity(),
            RationalFunction::from_polynomial(exp_taylor(12)),
            pole_target,
        ];
        let (_, report) = build_finite_universal(&targets, &region, &seq, 1e-3).unwrap();
        assert!(
            report.target_errors.iter().all(|e| *e <= 1e-3),
            "orbit errors {:?}",
            report.target_errors
        );
        assert!(report.derivative_zero_counts.iter().all(|c| *c == 0));
    }

    #[test]
    fn covering_map_values() {
        let psi = covering_map_special(CoveringDomain::UnitDisk);
        assert_eq!(psi.eval(c(0.3, 0.0)), c(0.3, 0.0));
        let psi = covering_map_special(CoveringDomain::PuncturedUnitDisk);
        let v = psi.eval(c(0.0, 0.0));
        assert!((v - c((-1.0f64).exp(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn covering_map_hits_punctured_disk() {
        let psi = covering_map_special(CoveringDomain::PuncturedUnitDisk);
        // deterministic pseudo-random points in the disk
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..1000 {
            let r = next().sqrt() * 0.999;
            let theta = next() * TAU;
            let z = Complex64::from_polar(r, theta);
            let v = psi.eval(z);
            assert!(v.norm() > 0.0 && v.norm() < 1.0, "psi({z}) = {v}");
            assert!(psi.derivative(z).norm() > 0.0);
        }
    }

    #[test]
    fn metric_orbit_single_identity() {
        let seq = SelfMapSequence::translations(c(8.0, 0.0));
        let region = ClosedDisk::new(c(0.0, 0.0), 1.0).unwrap();
        let maps = vec![RationalFunction::identity()];
        let (_, report) =
            metric_orbit_experiment(&maps, CanonicalGeometry::Euclidean, &region, &seq, 1e-6)
                .unwrap();
        assert!(report.density_errors[0] <= 1e-5);
    }

    #[test]
    fn metric_orbit_two_targets() {
        let seq = SelfMapSequence::translations(c(8.0, 0.0));
        let region = ClosedDisk::new(c(0.0, 0.0), 1.0).unwrap();
        let maps = vec![
            RationalFunction::identity(),
            RationalFunction::from_polynomial(exp_taylor(12)),
        ];
        let (_, report) =
            metric_orbit_experiment(&maps, CanonicalGeometry::Euclidean, &region, &seq, 1e-3)
                .unwrap();
        assert!(
            report.density_errors.iter().all(|e| *e <= 2e-3),
            "density errors {:?}",
            report.density_errors
        );
    }

    #[test]
    fn metric_orbit_range_escape() {
        let seq = SelfMapSequence::translations(c(8.0, 0.0));
        let region = ClosedDisk::new(c(0.0, 0.0), 1.0).unwrap();
        // the identity reaches |z| = 1 on the boundary of K
        let maps = vec![RationalFunction::identity()];
        assert!(matches!(
            metric_orbit_experiment(&maps, CanonicalGeometry::Hyperbolic, &region, &seq, 1e-3),
            Err(Error::RangeEscape { .. })
        ));
    }
}
