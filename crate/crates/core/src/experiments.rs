//! Configuration-driven experiment pipelines with reproducible outputs.

use num_complex::Complex64;
use std::path::Path;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::extended::ExtComplex;
use crate::geometry::{default_node_count, CompactRegion, Contour, TAU};
use crate::linalg::{complex_lstsq, BasisSpec, OrthoBasis};
use crate::metrics::{
    canonical_density, curvature, harmonic_glue, liouville_construct, scale_density, AnalyticMap,
    CanonicalGeometry, GridSpec,
};
use crate::ode::{meromorphic_lu_runge, obstruction_residue};
use crate::rational::{
    certify_local_univalence, poly_to_string, schwarzian, Polynomial, RationalFunction,
};
use crate::report::{curvature_csv, density_csv, write_file, Fingerprint, RunRecord};
use crate::runge::lu_holomorphic_runge;
use crate::universality::{
    build_finite_universal, diagnose_sequence, metric_orbit_experiment, SelfMapSequence,
};
use nalgebra::DVector;

pub const EXPERIMENT_KINDS: [(&str, &str); 8] = [
    (
        "schwarzian",
        "exact Schwarzian derivative of a rational map, with a univalence certificate",
    ),
    (
        "runge",
        "locally univalent approximation on a compact set with period matching",
    ),
    (
        "ode-reconstruct",
        "chordal approximation by solution quotients of a polynomial-coefficient equation",
    ),
    (
        "curvature",
        "constant-curvature verification of canonical and pulled-back metric grids",
    ),
    (
        "glue",
        "one entire harmonic potential matching two flat metric targets across a translation",
    ),
    (
        "orbit",
        "finite-stage universal function along a self-map sequence, optionally with metric orbits",
    ),
    (
        "diagnose-seq",
        "run-away indices and injectivity verdicts for a self-map sequence",
    ),
    (
        "counterexample",
        "residue obstruction for the inverse-square target on the annulus",
    ),
];

pub fn catalog() -> String {
    EXPERIMENT_KINDS
        .iter()
        .map(|(k, d)| format!("{k} - {d}"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn sequence_from_config(config: &Config) -> Result<SelfMapSequence> {
    match config.get("seq.kind").unwrap_or("translations") {
        "translations" => {
            let stride = config.get_complex("seq.stride", Complex64::new(8.0, 0.0))?;
            Ok(SelfMapSequence::translations(stride))
        }
        "disk-automorphisms" => {
            let raw = config.require("seq.params")?;
            let params = raw
                .split(';')
                .map(|part| {
                    let nums: Vec<&str> = part.split(',').map(str::trim).collect();
                    if nums.len() != 3 {
                        return Err(Error::Config(format!(
                            "seq.params entry '{part}': expected 'a_re,a_im,theta'"
                        )));
                    }
                    let a_re: f64 = nums[0]
                        .parse()
                        .map_err(|_| Error::Config(format!("bad number '{}'", nums[0])))?;
                    let a_im: f64 = nums[1]
                        .parse()
                        .map_err(|_| Error::Config(format!("bad number '{}'", nums[1])))?;
                    let theta: f64 = nums[2]
                        .parse()
                        .map_err(|_| Error::Config(format!("bad number '{}'", nums[2])))?;
                    Ok((Complex64::new(a_re, a_im), theta))
                })
                .collect::<Result<Vec<_>>>()?;
            SelfMapSequence::disk_automorphisms(params)
        }
        other => Err(Error::Config(format!("unknown seq.kind '{other}'"))),
    }
}

fn geometry_from_config(config: &Config) -> Result<CanonicalGeometry> {
    match config.get("curvature.geometry").unwrap_or("hyperbolic") {
        "hyperbolic" => Ok(CanonicalGeometry::Hyperbolic),
        "euclidean" => Ok(CanonicalGeometry::Euclidean),
        "spherical" => Ok(CanonicalGeometry::Spherical),
        other => Err(Error::Config(format!("unknown curvature.geometry '{other}'"))),
    }
}

/// Execute the experiment named in the config; writes grids into `out_dir`
/// and returns the run record (without wall time, which the caller stamps).
pub fn run(config: &Config, out_dir: &Path, verbose: bool) -> Result<RunRecord> {
    let kind = config.require("experiment")?.to_string();
    let mut record = RunRecord::new(&kind, config.entries().clone());
    let mut fp = Fingerprint::new();
    match kind.as_str() {
        "schwarzian" => run_schwarzian(config, &mut record, &mut fp)?,
        "runge" => run_runge(config, &mut record, &mut fp)?,
        "ode-reconstruct" => run_ode(config, &mut record, &mut fp)?,
        "curvature" => run_curvature(config, out_dir, &mut record, &mut fp)?,
        "glue" => run_glue(config, &mut record, &mut fp)?,
        "orbit" => run_orbit(config, &mut record, &mut fp)?,
        "diagnose-seq" => run_diagnose(config, &mut record, &mut fp)?,
        "counterexample" => run_counterexample(config, &mut record, &mut fp)?,
        other => return Err(Error::Config(format!("unknown experiment '{other}'"))),
    }
    record.fingerprint = fp.finish();
    if verbose {
        eprintln!("{} finished: fingerprint {}", kind, record.fingerprint);
    }
    Ok(record)
}

fn run_schwarzian(config: &Config, record: &mut RunRecord, fp: &mut Fingerprint) -> Result<()> {
    let f = config.function("function")?;
    let s = schwarzian(&f)?;
    record.detail(
        "schwarzian_numerator",
        serde_json::Value::String(poly_to_string(s.numerator())),
    );
    record.detail(
        "schwarzian_denominator",
        serde_json::Value::String(poly_to_string(s.denominator())),
    );
    for (i, c) in s.numerator().coeffs().iter().enumerate() {
        fp.push_complex(&format!("s.num.{i}"), *c);
    }
    for (i, c) in s.denominator().coeffs().iter().enumerate() {
        fp.push_complex(&format!("s.den.{i}"), *c);
    }
    if config.get("region.kind").is_some() {
        let region = config.region()?;
        let cert = certify_local_univalence(&f, &region)?;
        record.detail(
            "derivative_zero_count",
            serde_json::json!(cert.derivative_zero_count),
        );
        record.detail("double_pole_count", serde_json::json!(cert.double_pole_count));
        record.detail("locally_univalent", serde_json::json!(cert.verdict));
        fp.push_int("cert.zeros", cert.derivative_zero_count);
        fp.push_int("cert.poles", cert.double_pole_count);
    }
    Ok(())
}

fn run_runge(config: &Config, record: &mut RunRecord, fp: &mut Fingerprint) -> Result<()> {
    let f = config.function("function")?;
    let region = config.region()?;
    let domain = config.domain()?;
    let eps = config.get_f64("runge.epsilon", 1e-6)?;
    let (approx, report) = lu_holomorphic_runge(&f, &region, &domain, eps)?;
    record.sup_error = Some(report.certified_sup_error);
    record.residual_norm = Some(report.final_residual_norm);
    record.iterations = Some(report.newton_iterations as u64);
    record.degree_used = Some(report.degree_used as u64);
    record.detail(
        "base_point",
        serde_json::json!([approx.base_point().re, approx.base_point().im]),
    );
    fp.push("runge.sup_error", report.certified_sup_error);
    fp.push("runge.residual", report.final_residual_norm);
    fp.push_int("runge.degree", report.degree_used as i64);
    fp.push_complex("runge.base_point", approx.base_point());
    Ok(())
}

fn run_ode(config: &Config, record: &mut RunRecord, fp: &mut Fingerprint) -> Result<()> {
    let f = config.function("function")?;
    let region = config.region()?;
    let eps = config.get_f64("ode.epsilon", 1e-6)?;
    let cap = config.get_usize("ode.degree-cap", 128)?;
    let (_, report) = meromorphic_lu_runge(&f, &region, eps, cap)?;
    record.sup_error = Some(report.certified_sup_error);
    record.degree_used = Some(report.degree_used as u64);
    record.detail("samples", serde_json::json!(report.samples_used));
    fp.push("ode.chordal_error", report.certified_sup_error);
    fp.push_int("ode.degree", report.degree_used as i64);
    Ok(())
}

fn run_curvature(
    config: &Config,
    out_dir: &Path,
    record: &mut RunRecord,
    fp: &mut Fingerprint,
) -> Result<()> {
    let geom = geometry_from_config(config)?;
    let default_radius = match geom {
        CanonicalGeometry::Hyperbolic => 0.8,
        CanonicalGeometry::Euclidean => 0.8,
        CanonicalGeometry::Spherical => 1.0,
    };
    let spec = GridSpec {
        center: config.get_complex("curvature.center", Complex64::new(0.0, 0.0))?,
        radius: config.get_f64("curvature.radius", default_radius)?,
        spacing: config.get_f64("curvature.spacing", 0.005)?,
    };
    let map = match config.get("curvature.map").unwrap_or("identity") {
        "identity" => AnalyticMap::Identity,
        "exp" => AnalyticMap::Exp,
        "rational" => AnalyticMap::rational(config.function("curvature-map")?),
        other => return Err(Error::Config(format!("unknown curvature.map '{other}'"))),
    };
    let factor = config.get_f64("curvature.scale-factor", 1.0)?;
    let density = liouville_construct(&map, geom, spec)?;
    let density = if factor != 1.0 {
        scale_density(&density, factor)?
    } else {
        density
    };
    let reference = geom.curvature_constant() / (factor * factor);
    let report = curvature(&density, reference)?;
    record.curvature_max_dev = Some(report.max_abs_deviation_from_c);
    record.detail("cells_evaluated", serde_json::json!(report.cells_evaluated));
    record.detail("reference_curvature", serde_json::json!(reference));
    write_file(&out_dir.join("density.csv"), &density_csv(&density))?;
    write_file(&out_dir.join("curvature.csv"), &curvature_csv(&report))?;
    fp.push("curvature.max_dev", report.max_abs_deviation_from_c);
    fp.push_int("curvature.cells", report.cells_evaluated as i64);
    fp.push("curvature.reference", reference);
    Ok(())
}

fn run_glue(config: &Config, record: &mut RunRecord, fp: &mut Fingerprint) -> Result<()> {
    let disk = match config.region()? {
        CompactRegion::Disk(d) => d,
        _ => {
            return Err(Error::Config(
                "glue experiments use region.kind = disk".into(),
            ))
        }
    };
    let stride = config.get_f64("glue.stride", 8.0)?;
    let eps = config.get_f64("glue.epsilon", 1e-3)?;
    let cap = config.get_usize("glue.degree-cap", 40)?;
    let density = |name: &str| -> Result<Box<dyn Fn(Complex64) -> f64>> {
        match name {
            "unit" => Ok(Box::new(|_| 1.0)),
            "exp-re" => Ok(Box::new(|z: Complex64| z.re.exp())),
            other => Err(Error::Config(format!("unknown glue density '{other}'"))),
        }
    };
    let lambda = density(config.get("glue.lambda").unwrap_or("exp-re"))?;
    let mu = density(config.get("glue.mu").unwrap_or("unit"))?;
    let out = harmonic_glue(&*lambda, &*mu, stride, &disk, eps, cap)?;
    record.sup_error = Some(out.e1.max(out.e2));
    record.degree_used = Some(out.degree_used as u64);
    record.detail("e1", serde_json::json!(out.e1));
    record.detail("e2", serde_json::json!(out.e2));
    record.detail(
        "conformal_factor_bound",
        serde_json::json!(out.conformal_factor_bound),
    );
    record.detail(
        "potential",
        serde_json::Value::String(poly_to_string(&out.potential)),
    );
    fp.push("glue.e1", out.e1);
    fp.push("glue.e2", out.e2);
    fp.push_int("glue.degree", out.degree_used as i64);
    Ok(())
}

fn run_orbit(config: &Config, record: &mut RunRecord, fp: &mut Fingerprint) -> Result<()> {
    let disk = match config.region()? {
        CompactRegion::Disk(d) => d,
        _ => {
            return Err(Error::Config(
                "orbit experiments use region.kind = disk".into(),
            ))
        }
    };
    let seq = sequence_from_config(config)?;
    let targets = config.target_list()?;
    let eps = config.get_f64("orbit.epsilon", 1e-3)?;
    let metric = config.get("orbit.metric").unwrap_or("none");

    if metric == "none" {
        let (_, report) = build_finite_universal(&targets, &disk, &seq, eps)?;
        record.sup_error = Some(report.target_errors.iter().cloned().fold(0.0, f64::max));
        record.detail("target_errors", serde_json::json!(report.target_errors));
        record.detail(
            "derivative_zero_counts",
            serde_json::json!(report.derivative_zero_counts),
        );
        record.degree_used = Some(report.glue.degree_used as u64);
        record.iterations = Some(report.glue.newton_iterations as u64);
        record.residual_norm = Some(report.glue.final_residual_norm);
        for (i, e) in report.target_errors.iter().enumerate() {
            fp.push(&format!("orbit.error.{i}"), *e);
        }
        for (i, c) in report.derivative_zero_counts.iter().enumerate() {
            fp.push_int(&format!("orbit.zeros.{i}"), *c as i64);
        }
    } else {
        let geom = match metric {
            "euclidean" => CanonicalGeometry::Euclidean,
            "spherical" => CanonicalGeometry::Spherical,
            "hyperbolic" => CanonicalGeometry::Hyperbolic,
            other => return Err(Error::Config(format!("unknown orbit.metric '{other}'"))),
        };
        let (_, report) = metric_orbit_experiment(&targets, geom, &disk, &seq, eps)?;
        record.sup_error = Some(
            report
                .orbit
                .target_errors
                .iter()
                .cloned()
                .fold(0.0, f64::max),
        );
        record.detail(
            "target_errors",
            serde_json::json!(report.orbit.target_errors),
        );
        record.detail("density_errors", serde_json::json!(report.density_errors));
        record.detail(
            "derivative_zero_counts",
            serde_json::json!(report.orbit.derivative_zero_counts),
        );
        record.degree_used = Some(report.orbit.glue.degree_used as u64);
        for (i, e) in report.orbit.target_errors.iter().enumerate() {
            fp.push(&format!("orbit.error.{i}"), *e);
        }
        for (i, e) in report.density_errors.iter().enumerate() {
            fp.push(&format!("orbit.density_error.{i}"), *e);
        }
    }
    Ok(())
}

fn run_diagnose(config: &Config, record: &mut RunRecord, fp: &mut Fingerprint) -> Result<()> {
    let seq = sequence_from_config(config)?;
    let region = config.region()?;
    let n_max = config.get_usize("diagnose.n-max", 10)?;
    let diag = diagnose_sequence(&seq, &[region], n_max)?;
    record.detail("runaway_index", serde_json::json!(diag.runaway_indices[0]));
    record.detail(
        "injectivity_verdicts",
        serde_json::json!(diag.injectivity_verdicts[0]),
    );
    record.detail(
        "eventually_injective_from",
        serde_json::json!(diag.eventually_injective_from[0]),
    );
    fp.push_int(
        "diagnose.runaway",
        diag.runaway_indices[0].map_or(-1, |n| n as i64),
    );
    for (i, v) in diag.injectivity_verdicts[0].iter().enumerate() {
        fp.push_int(&format!("diagnose.injective.{i}"), *v as i64);
    }
    Ok(())
}

fn run_counterexample(config: &Config, record: &mut RunRecord, fp: &mut Fingerprint) -> Result<()> {
    // the inverse-square target on the annulus 1/2 <= |z| <= 2: its
    // Schwarzian has a residue invariant on the unit circle that no entire
    // coefficient sequence can remove
    let f = RationalFunction::new(
        Polynomial::constant(Complex64::new(-1.0, 0.0)),
        Polynomial::monomial(2, Complex64::new(1.0, 0.0)),
    )?;
    let s = schwarzian(&f)?;
    let degree_min = config.get_usize("counterexample.degree-min", 8)?;
    let degree_max = config.get_usize("counterexample.degree-max", 50)?;
    let nodes = default_node_count(degree_max + 1);
    let gamma = Contour::new(Complex64::new(0.0, 0.0), 1.0, 1, nodes)?;
    let residue = obstruction_residue(&s, &gamma)?;
    let lower_bound = residue.norm() / (TAU * gamma.radius);
    record.detail("residue", serde_json::json!([residue.re, residue.im]));
    record.detail("lower_bound", serde_json::json!(lower_bound));
    fp.push_complex("counterexample.residue", residue);
    fp.push("counterexample.lower_bound", lower_bound);

    // invariance under subtraction of polynomials up to degree_max
    let mut invariance_dev = 0.0f64;
    for variant in 0..3u32 {
        let coeffs: Vec<Complex64> = (0..=degree_max)
            .map(|k| {
                Complex64::new(
                    ((k as f64) * 0.37 + variant as f64).sin() * 2.0,
                    ((k as f64) * 0.11 - variant as f64).cos() * 1.5,
                )
            })
            .collect();
        let q = s.sub(&RationalFunction::from_polynomial(Polynomial::new(coeffs)));
        let r = obstruction_residue(&q, &gamma)?;
        invariance_dev = invariance_dev.max((r - residue).norm());
    }
    record.detail("invariance_deviation", serde_json::json!(invariance_dev));
    fp.push("counterexample.invariance", invariance_dev);

    // least-squares sweep: measured sup errors of the best polynomial fits
    let mut min_sup = f64::INFINITY;
    let mut sweep = Vec::new();
    for degree in degree_min..=degree_max {
        let n = default_node_count(degree).max(default_node_count(degree_max));
        let fit_points: Vec<Complex64> = (0..n)
            .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / n as f64))
            .collect();
        let spec = BasisSpec::polynomial(Complex64::new(0.0, 0.0), 1.0, degree);
        let (basis, matrix) = OrthoBasis::build(spec, &fit_points)?;
        let rhs = DVector::from_fn(fit_points.len(), |i, _| {
            s.eval(fit_points[i]).finite().unwrap()
        });
        let (coeffs, _) = complex_lstsq(&matrix, &rhs)?;
        let mut sup = 0.0f64;
        let vn = 2 * n;
        for k in 0..vn {
            let z = Complex64::from_polar(1.0, TAU * k as f64 / vn as f64 + 0.001);
            let fit_v: Complex64 = basis
                .eval_columns(z)
                .iter()
                .zip(coeffs.iter())
                .map(|(b, c)| b * c)
                .sum();
            let sv = s.eval(z).finite().ok_or(Error::PoleOnContour)?;
            sup = sup.max((sv - fit_v).norm());
        }
        sweep.push(sup);
        min_sup = min_sup.min(sup);
        fp.push(&format!("counterexample.sweep.{degree}"), sup);
    }
    record.sup_error = Some(min_sup);
    record.detail("sweep_errors", serde_json::json!(sweep));
    record.detail(
        "lower_bound_confirmed",
        serde_json::json!(min_sup >= lower_bound - 1e-6),
    );
    Ok(())
}
