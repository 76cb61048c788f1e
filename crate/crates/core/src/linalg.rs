//! Least-squares machinery: an orthogonalized polynomial/Laurent fitting
//! basis built on the sample points, SVD-backed solves with condition
//! certification, and Gauss--Legendre quadrature along polylines.
//!
//! Raw scaled monomial columns go numerically dependent long before the
//! degrees the multi-component fits need, so basis columns are produced by a
//! Krylov-style recurrence (multiply by a generator, orthogonalize against
//! everything so far). The recurrence coefficients are kept so the basis can
//! be evaluated at points outside the fit set. The span is exactly the
//! requested polynomial-plus-Laurent space.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Span description: polynomial part of the given degree in
/// (z - center)/scale, plus one chain per puncture in pole_scale/(z - p).
#[derive(Debug, Clone)]
pub struct BasisSpec {
    pub center: Complex64,
    pub scale: f64,
    pub poly_degree: usize,
    /// (puncture, pole scale, chain degree)
    pub punctures: Vec<(Complex64, f64, usize)>,
}

impl BasisSpec {
    pub fn polynomial(center: Complex64, scale: f64, degree: usize) -> Self {
        BasisSpec {
            center,
            scale,
            poly_degree: degree,
            punctures: Vec::new(),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.poly_degree + self.punctures.iter().map(|p| p.2).sum::<usize>()
    }
}

#[derive(Debug, Clone)]
struct ColumnRecipe {
    /// generator index: 0 is the scaled poly variable, 1 + j the j-th puncture
    generator: usize,
    parent: usize,
    ortho: Vec<Complex64>,
    norm: f64,
}

/// Orthonormal-by-construction basis over a fixed sample set.
#[derive(Debug, Clone)]
pub struct OrthoBasis {
    spec: BasisSpec,
    recipes: Vec<ColumnRecipe>,
    first_norm: f64,
}

impl OrthoBasis {
    fn generator_value(&self, generator: usize, z: Complex64) -> Complex64 {
        if generator == 0 {
            (z - self.spec.center) / self.spec.scale
        } else {
            let (p, s, _) = self.spec.punctures[generator - 1];
            s / (z - p)
        }
    }

    /// Build the basis on the fit points; returns the (near-orthonormal)
    /// design matrix alongside.
    pub fn build(spec: BasisSpec, points: &[Complex64]) -> Result<(OrthoBasis, DMatrix<Complex64>)> {
        OrthoBasis::build_weighted(spec, points, None)
    }

    /// Weighted variant: orthogonalization runs in the weighted inner
    /// product, the returned matrix rows carry the weights, and the basis
    /// functions themselves stay weight-independent. The right-hand side of
    /// a least-squares solve against this matrix must be scaled by the same
    /// weights.
    pub fn build_weighted(
        spec: BasisSpec,
        points: &[Complex64],
        weights: Option<&[f64]>,
    ) -> Result<(OrthoBasis, DMatrix<Complex64>)> {
        let m = points.len();
        let n = spec.size();
        if m < n {
            return Err(Error::TooFewSamples { got: m, need: n });
        }
        let w = |i: usize| weights.map_or(1.0, |w| w[i]);
        let first_norm = (0..m).map(|i| w(i) * w(i)).sum::<f64>().sqrt();
        let mut basis = OrthoBasis {
            spec,
            recipes: Vec::new(),
            first_norm,
        };
        let mut cols: Vec<DVector<Complex64>> = Vec::with_capacity(n);
        cols.push(DVector::from_fn(m, |i, _| {
            Complex64::new(w(i), 0.0) / basis.first_norm
        }));

        let mut chains: Vec<(usize, usize)> = Vec::new(); // (generator, length)
        chains.push((0, basis.spec.poly_degree));
        for (j, p) in basis.spec.punctures.iter().enumerate() {
            chains.push((1 + j, p.2));
        }

        for (generator, length) in chains {
            let mut parent = 0usize;
            for _ in 0..length {
                let mut v = DVector::from_fn(m, |i, _| {
                    basis.generator_value(generator, points[i]) * cols[parent][i]
                });
                // modified Gram-Schmidt, twice
                let mut ortho = vec![Complex64::new(0.0, 0.0); cols.len()];
                for _pass in 0..2 {
                    for (j, q) in cols.iter().enumerate() {
                        let h = q.dotc(&v);
                        ortho[j] += h;
                        v -= q * h;
                    }
                }
                let norm = v.norm();
                if !(norm > 1e-280) {
                    return Err(Error::IllConditioned { cond: f64::INFINITY });
                }
                v /= Complex64::new(norm, 0.0);
                basis.recipes.push(ColumnRecipe {
                    generator,
                    parent,
                    ortho,
                    norm,
                });
                parent = cols.len();
                cols.push(v);
            }
        }

        let mut matrix = DMatrix::zeros(m, cols.len());
        for (j, col) in cols.iter().enumerate() {
            matrix.set_column(j, col);
        }
        Ok((basis, matrix))
    }

    /// Evaluate all basis columns at an arbitrary point via the recurrence.
    pub fn eval_columns(&self, z: Complex64) -> Vec<Complex64> {
        let mut values = Vec::with_capacity(1 + self.recipes.len());
        values.push(Complex64::new(1.0, 0.0) / self.first_norm);
        for r in &self.recipes {
            let mut v = self.generator_value(r.generator, z) * values[r.parent];
            for (j, h) in r.ortho.iter().enumerate() {
                v -= h * values[j];
            }
            values.push(v / r.norm);
        }
        values
    }

    pub fn size(&self) -> usize {
        1 + self.recipes.len()
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn first_norm(&self) -> f64 {
        self.first_norm
    }

    /// (generator, parent, orthogonalization coefficients, norm) per
    /// non-constant column, in construction order.
    pub fn recipes(&self) -> impl Iterator<Item = (usize, usize, &[Complex64], f64)> + '_ {
        self.recipes
            .iter()
            .map(|r| (r.generator, r.parent, r.ortho.as_slice(), r.norm))
    }
}

/// A fitted expansion in an [`OrthoBasis`].
#[derive(Debug, Clone)]
pub struct BasisExpansion {
    pub basis: OrthoBasis,
    pub coeffs: Vec<Complex64>,
    pub condition: f64,
}

impl BasisExpansion {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.basis
            .eval_columns(z)
            .iter()
            .zip(&self.coeffs)
            .map(|(b, c)| b * c)
            .sum()
    }

    pub fn zero(center: Complex64) -> BasisExpansion {
        let spec = BasisSpec::polynomial(center, 1.0, 0);
        let (basis, _) = OrthoBasis::build(spec, &[center]).expect("one point suffices");
        BasisExpansion {
            basis,
            coeffs: vec![Complex64::new(0.0, 0.0)],
            condition: 1.0,
        }
    }
}

/// Complex least squares by SVD; returns the solution and the condition
/// number of the (column-scaled) matrix.
pub fn complex_lstsq(
    matrix: &DMatrix<Complex64>,
    rhs: &DVector<Complex64>,
) -> Result<(DVector<Complex64>, f64)> {
    let svd = matrix.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let solution = svd
        .solve(rhs, smax * 1e-14)
        .map_err(|_| Error::IllConditioned { cond })?;
    Ok((solution, cond))
}

/// Real least squares by SVD.
pub fn real_lstsq(matrix: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let svd = matrix.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let solution = svd
        .solve(rhs, smax * 1e-14)
        .map_err(|_| Error::IllConditioned { cond })?;
    Ok((solution, cond))
}

/// Square complex solve (LU) plus SVD condition number.
pub fn complex_solve_with_cond(
    matrix: &DMatrix<Complex64>,
    rhs: &DVector<Complex64>,
) -> Result<(DVector<Complex64>, f64)> {
    let svd = matrix.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let solution = matrix
        .clone()
        .lu()
        .solve(rhs)
        .ok_or(Error::SingularJacobian { cond })?;
    Ok((solution, cond))
}

fn gauss_legendre_16() -> &'static (Vec<f64>, Vec<f64>) {
    static NODES: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    NODES.get_or_init(|| {
        // roots of P_16 by Newton from Chebyshev initial guesses
        let n = 16usize;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for k in 0..n {
            let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..60 {
                let (p, dp) = legendre_with_derivative(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * dp * dp));
        }
        (nodes, weights)
    })
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0f64, x);
    for k in 2..=n {
        let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = pk;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn gl_segment(f: &dyn Fn(Complex64) -> Complex64, a: Complex64, b: Complex64) -> Complex64 {
    let (nodes, weights) = gauss_legendre_16();
    let mid = (a + b) / 2.0;
    let half = (b - a) / 2.0;
    let mut sum = Complex64::new(0.0, 0.0);
    for (x, w) in nodes.iter().zip(weights) {
        sum += f(mid + half * *x) * *w;
    }
    sum * half
}

fn adaptive_segment(
    f: &dyn Fn(Complex64) -> Complex64,
    a: Complex64,
    b: Complex64,
    tol: f64,
    depth: usize,
) -> Complex64 {
    let whole = gl_segment(f, a, b);
    let mid = (a + b) / 2.0;
    let split = gl_segment(f, a, mid) + gl_segment(f, mid, b);
    if (whole - split).norm() <= tol * (1.0 + split.norm()) || depth >= 24 {
        split
    } else {
        adaptive_segment(f, a, mid, tol / 2.0, depth + 1)
            + adaptive_segment(f, mid, b, tol / 2.0, depth + 1)
    }
}

/// Adaptive Gauss--Legendre integral of f dz along a polyline.
pub fn integrate_polyline(
    f: &dyn Fn(Complex64) -> Complex64,
    path: &[Complex64],
    tol: f64,
) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    for w in path.windows(2) {
        if (w[1] - w[0]).norm() == 0.0 {
            continue;
        }
        total += adaptive_segment(f, w[0], w[1], tol, 0);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ortho_basis_spans_polynomials() {
        // fit z^3 - 2z + 1 exactly with a degree-3 basis on a circle
        let points: Vec<Complex64> = (0..32)
            .map(|k| Complex64::from_polar(2.0, crate::geometry::TAU * k as f64 / 32.0))
            .collect();
        let spec = BasisSpec::polynomial(Complex64::new(0.0, 0.0), 2.0, 3);
        let (basis, matrix) = OrthoBasis::build(spec, &points).unwrap();
        let target =
            |z: Complex64| z * z * z - 2.0 * z + Complex64::new(1.0, 0.0);
        let rhs = DVector::from_fn(points.len(), |i, _| target(points[i]));
        let (x, cond) = complex_lstsq(&matrix, &rhs).unwrap();
        assert!(cond < 10.0, "arnoldi columns should be near orthonormal, cond = {cond}");
        let exp = BasisExpansion {
            basis,
            coeffs: x.iter().copied().collect(),
            condition: cond,
        };
        let test_point = Complex64::new(0.3, -1.2);
        assert!((exp.eval(test_point) - target(test_point)).norm() < 1e-12);
    }

    #[test]
    fn ortho_basis_spans_laurent_parts() {
        // fit 1/z + z on an annulus boundary
        let mut points = Vec::new();
        for k in 0..64 {
            let t = crate::geometry::TAU * k as f64 / 64.0;
            points.push(Complex64::from_polar(0.5, t));
            points.push(Complex64::from_polar(2.0, t));
        }
        let spec = BasisSpec {
            center: Complex64::new(0.0, 0.0),
            scale: 2.0,
            poly_degree: 2,
            punctures: vec![(Complex64::new(0.0, 0.0), 0.5, 2)],
        };
        let (basis, matrix) = OrthoBasis::build(spec, &points).unwrap();
        let target = |z: Complex64| 1.0 / z + z;
        let rhs = DVector::from_fn(points.len(), |i, _| target(points[i]));
        let (x, cond) = complex_lstsq(&matrix, &rhs).unwrap();
        assert!(cond < 10.0);
        let exp = BasisExpansion {
            basis,
            coeffs: x.iter().copied().collect(),
            condition: cond,
        };
        let z = Complex64::new(0.9, 0.9);
        assert!((exp.eval(z) - target(z)).norm() < 1e-11);
    }

    #[test]
    fn polyline_quadrature_integrates_exponential() {
        // int_0^{1+i} e^z dz = e^{1+i} - 1
        let f = |z: Complex64| z.exp();
        let path = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 1.0)];
        let value = integrate_polyline(&f, &path, 1e-13);
        let expected = Complex64::new(1.0, 1.0).exp() - 1.0;
        assert!((value - expected).norm() < 1e-13);
    }
}
