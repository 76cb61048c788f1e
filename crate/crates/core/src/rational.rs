//! Exact symbolic calculus on polynomials, rational functions and Moebius
//! maps: differentiation, composition, Schwarzian derivative, simultaneous
//! root finding and local-univalence certification.
//!
//! Coefficients are floating complex numbers. Additive operations snap
//! coefficients that cancel past twelve relative digits to exact zero, so
//! rational identities (the Schwarzian of a Moebius map, derivatives of
//! monomials) come out coefficient-exact. Rational normalization keeps the
//! denominator monic and removes common factors matched within 1e-10.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::extended::ExtComplex;
use crate::geometry::{default_node_count, winding_of_closed_curve, CompactRegion, Contour};

/// Relative threshold below which an additively cancelled coefficient is
/// treated as exact zero.
const CANCEL_SNAP: f64 = 1e-12;
/// Root-matching tolerance for removing common factors of a rational function.
const ROOT_MATCH_TOL: f64 = 1e-10;

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Polynomial with coefficients in ascending degree order. The zero
/// polynomial is the empty coefficient list.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().map_or(false, |c| c.norm() == 0.0) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Polynomial::constant(Complex64::new(1.0, 0.0))
    }

    pub fn constant(c: Complex64) -> Self {
        Polynomial::new(vec![c])
    }

    /// z shifted and scaled: `a*z + b`.
    pub fn affine(a: Complex64, b: Complex64) -> Self {
        Polynomial::new(vec![b, a])
    }

    pub fn identity() -> Self {
        Polynomial::new(vec![czero(), Complex64::new(1.0, 0.0)])
    }

    pub fn monomial(k: usize, c: Complex64) -> Self {
        let mut coeffs = vec![czero(); k + 1];
        coeffs[k] = c;
        Polynomial::new(coeffs)
    }

    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut p = Polynomial::one();
        for &r in roots {
            p = p.mul(&Polynomial::new(vec![-r, Complex64::new(1.0, 0.0)]));
        }
        p
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or_else(czero)
    }

    pub fn max_coeff_mag(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Upper bound sum |c_i| r^i for |p(z)| on |z| = r.
    pub fn mag_bound(&self, r: f64) -> f64 {
        let mut bound = 0.0;
        let mut pw = 1.0;
        for c in &self.coeffs {
            bound += c.norm() * pw;
            pw *= r;
        }
        bound
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = czero();
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() <= 1 {
            return Polynomial::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * k as f64)
            .collect();
        Polynomial::new(coeffs)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        self.add_scaled(other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add_scaled(other, Complex64::new(-1.0, 0.0))
    }

    /// self + s*other with cancellation snapping.
    fn add_scaled(&self, other: &Polynomial, s: Complex64) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.coeffs.get(i).copied().unwrap_or_else(czero);
            let b = other.coeffs.get(i).copied().unwrap_or_else(czero) * s;
            let c = a + b;
            if c.norm() <= CANCEL_SNAP * (a.norm() + b.norm()) {
                coeffs.push(czero());
            } else {
                coeffs.push(c);
            }
        }
        Polynomial::new(coeffs)
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero();
        }
        let mut coeffs = vec![czero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Polynomial::new(coeffs)
    }

    pub fn scale(&self, s: Complex64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Number of leading zero coefficients, i.e. the multiplicity of the root 0.
    fn trailing_zero_roots(&self) -> usize {
        self.coeffs.iter().take_while(|c| c.norm() == 0.0).count()
    }

    /// Drop an exact factor z^m.
    fn shift_down(&self, m: usize) -> Polynomial {
        Polynomial::new(self.coeffs[m.min(self.coeffs.len())..].to_vec())
    }

    /// Synthetic division by (z - r); the remainder is discarded.
    fn divide_by_root(&self, r: Complex64) -> Polynomial {
        let n = self.coeffs.len();
        if n <= 1 {
            return Polynomial::zero();
        }
        let mut q = vec![czero(); n - 1];
        let mut carry = self.coeffs[n - 1];
        for k in (0..n - 1).rev() {
            q[k] = carry;
            carry = self.coeffs[k] + carry * r;
        }
        Polynomial::new(q)
    }

    /// All roots with multiplicity via Aberth--Ehrlich simultaneous iteration.
    ///
    /// Deterministic initial guesses equally spaced on the Cauchy-bound circle;
    /// 200 iteration cap; a root is converged once its correction drops below
    /// 1e-12 relative or its residual is backward-stable.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let deg = self.degree().unwrap_or(0);
        if deg == 0 {
            return Err(Error::InvalidFunction(
                "root finding needs degree >= 1".into(),
            ));
        }
        // exact factor z^m first, so zero roots stay exact
        let m = self.trailing_zero_roots();
        let mut all = vec![czero(); m];
        let reduced = self.shift_down(m);
        let n = reduced.degree().unwrap_or(0);
        if n > 0 {
            let lead = reduced.leading();
            let monic = Polynomial::new(reduced.coeffs.iter().map(|c| c / lead).collect());
            all.extend(aberth(&monic)?);
        }
        all.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        Ok(all)
    }
}

fn aberth(monic: &Polynomial) -> Result<Vec<Complex64>> {
    let n = monic.degree().unwrap();
    let dp = monic.derivative();
    let radius = 1.0
        + monic.coeffs[..n]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| radius * Complex64::from_polar(1.0, crate::geometry::TAU * k as f64 / n as f64 + 0.4))
        .collect();
    let mut converged = vec![false; n];
    for _ in 0..200 {
        let mut all_done = true;
        for k in 0..n {
            if converged[k] {
                continue;
            }
            let pv = monic.eval(z[k]);
            let residual_ok = pv.norm()
                <= 4.0 * (n as f64 + 1.0) * f64::EPSILON * monic.mag_bound(z[k].norm()).max(1e-300);
            let dv = dp.eval(z[k]);
            let newton = if dv.norm() > 0.0 {
                pv / dv
            } else {
                Complex64::new(1e-8 * (1.0 + z[k].norm()), 0.0)
            };
            let mut repulsion = czero();
            for j in 0..n {
                if j != k {
                    let mut d = z[k] - z[j];
                    if d.norm() < 1e-150 {
                        d = Complex64::new(1e-12 * (1.0 + z[k].norm()), 0.0);
                    }
                    repulsion += 1.0 / d;
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * repulsion;
            let step = if denom.norm() > 1e-300 { newton / denom } else { newton };
            z[k] -= step;
            if step.norm() <= 1e-12 * z[k].norm().max(1.0) || residual_ok {
                converged[k] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            return Ok(z);
        }
    }
    // final residual audit: clustered multiple roots converge in value long
    // before the iterates settle
    for k in 0..n {
        let pv = monic.eval(z[k]);
        if pv.norm() > 1e-8 * monic.mag_bound(z[k].norm()).max(1e-300) {
            return Err(Error::NoConvergenceRoots);
        }
    }
    Ok(z)
}

/// Taylor section of exp of the given degree: sum z^k / k!.
pub fn exp_taylor(degree: usize) -> Polynomial {
    let mut coeffs = Vec::with_capacity(degree + 1);
    let mut factorial = 1.0f64;
    for k in 0..=degree {
        if k > 0 {
            factorial *= k as f64;
        }
        coeffs.push(Complex64::new(1.0 / factorial, 0.0));
    }
    Polynomial::new(coeffs)
}

/// Serialize coefficients as "re,im;re,im;..." in ascending degree.
pub fn poly_to_string(p: &Polynomial) -> String {
    if p.is_zero() {
        return "0,0".to_string();
    }
    p.coeffs()
        .iter()
        .map(|c| format!("{},{}", c.re, c.im))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn poly_from_string(s: &str) -> Result<Polynomial> {
    let mut coeffs = Vec::new();
    for part in s.split(';') {
        let nums: Vec<&str> = part.split(',').map(str::trim).collect();
        if nums.len() != 2 {
            return Err(Error::InvalidFunction(format!(
                "expected 're,im' coefficient pairs, got '{part}'"
            )));
        }
        let re: f64 = nums[0]
            .parse()
            .map_err(|_| Error::InvalidFunction(format!("bad real part '{}'", nums[0])))?;
        let im: f64 = nums[1]
            .parse()
            .map_err(|_| Error::InvalidFunction(format!("bad imaginary part '{}'", nums[1])))?;
        coeffs.push(Complex64::new(re, im));
    }
    Ok(Polynomial::new(coeffs))
}

/// Quotient of two polynomials, kept normalized: monic denominator, common
/// factors removed up to the declared root-matching tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
}

impl RationalFunction {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidFunction("zero denominator".into()));
        }
        if num.is_zero() {
            return Ok(RationalFunction {
                num: Polynomial::zero(),
                den: Polynomial::one(),
            });
        }
        let mut num = num;
        let mut den = den;
        // common exact factor z^m
        let m = num.trailing_zero_roots().min(den.trailing_zero_roots());
        if m > 0 {
            num = num.shift_down(m);
            den = den.shift_down(m);
        }
        // root-matched common factors
        if num.degree().unwrap_or(0) >= 1 && den.degree().unwrap_or(0) >= 1 {
            if let (Ok(nr), Ok(dr)) = (num.roots(), den.roots()) {
                let mut used = vec![false; nr.len()];
                for &d in &dr {
                    let mut best: Option<(usize, f64)> = None;
                    for (i, &r) in nr.iter().enumerate() {
                        if used[i] {
                            continue;
                        }
                        let dist = (r - d).norm();
                        if dist <= ROOT_MATCH_TOL * d.norm().max(1.0)
                            && best.map_or(true, |(_, b)| dist < b)
                        {
                            best = Some((i, dist));
                        }
                    }
                    if let Some((i, _)) = best {
                        used[i] = true;
                        num = num.divide_by_root(nr[i]);
                        den = den.divide_by_root(d);
                    }
                }
            }
        }
        let lead = den.leading();
        let num = num.scale(1.0 / lead);
        let den = den.scale(1.0 / lead);
        Ok(RationalFunction { num, den })
    }

    pub fn from_polynomial(p: Polynomial) -> Self {
        RationalFunction {
            num: p,
            den: Polynomial::one(),
        }
    }

    pub fn identity() -> Self {
        RationalFunction::from_polynomial(Polynomial::identity())
    }

    pub fn constant(c: Complex64) -> Self {
        RationalFunction::from_polynomial(Polynomial::constant(c))
    }

    pub fn reciprocal() -> Self {
        RationalFunction {
            num: Polynomial::one(),
            den: Polynomial::identity(),
        }
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.num.degree().unwrap_or(0) == 0 && self.den.degree().unwrap_or(0) == 0
            || self.num.is_zero()
    }

    pub fn max_degree(&self) -> usize {
        self.num
            .degree()
            .unwrap_or(0)
            .max(self.den.degree().unwrap_or(0))
    }

    pub fn eval(&self, z: Complex64) -> ExtComplex {
        let dv = self.den.eval(z);
        let dscale = self.den.mag_bound(z.norm()).max(1e-300);
        if dv.norm() <= 1e-14 * dscale {
            return ExtComplex::Infinity;
        }
        ExtComplex::from(self.num.eval(z) / dv)
    }

    pub fn eval_finite(&self, z: Complex64) -> Result<Complex64> {
        self.eval(z).finite().ok_or(Error::NonFiniteValue { at: z })
    }

    /// Exact quotient-rule derivative, normalized.
    pub fn derivative(&self) -> RationalFunction {
        let num = self
            .num
            .derivative()
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.derivative()));
        let den = self.den.mul(&self.den);
        RationalFunction::new(num, den).expect("denominator square is nonzero")
    }

    /// 1/f as a rational function.
    pub fn reciprocal_of(&self) -> Result<RationalFunction> {
        if self.num.is_zero() {
            return Err(Error::InvalidFunction("reciprocal of zero".into()));
        }
        RationalFunction::new(self.den.clone(), self.num.clone())
    }

    pub fn add(&self, other: &RationalFunction) -> RationalFunction {
        if self.den == other.den {
            return RationalFunction::new(self.num.add(&other.num), self.den.clone())
                .expect("shared denominator is nonzero");
        }
        let num = self
            .num
            .mul(&other.den)
            .add(&other.num.mul(&self.den));
        RationalFunction::new(num, self.den.mul(&other.den)).expect("product of nonzero")
    }

    pub fn sub(&self, other: &RationalFunction) -> RationalFunction {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> RationalFunction {
        RationalFunction {
            num: self.num.scale(s),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &RationalFunction) -> RationalFunction {
        RationalFunction::new(self.num.mul(&other.num), self.den.mul(&other.den))
            .expect("product of nonzero denominators")
    }

    pub fn div(&self, other: &RationalFunction) -> Result<RationalFunction> {
        if other.num.is_zero() {
            return Err(Error::InvalidFunction("division by the zero function".into()));
        }
        RationalFunction::new(self.num.mul(&other.den), self.den.mul(&other.num))
    }

    pub fn zeros(&self) -> Result<Vec<Complex64>> {
        if self.num.degree().unwrap_or(0) == 0 {
            return Ok(Vec::new());
        }
        self.num.roots()
    }

    pub fn poles(&self) -> Result<Vec<Complex64>> {
        if self.den.degree().unwrap_or(0) == 0 {
            return Ok(Vec::new());
        }
        self.den.roots()
    }
}

/// The Schwarzian derivative S_f = (f''/f')' - (1/2)(f''/f')^2, exact.
pub fn schwarzian(f: &RationalFunction) -> Result<RationalFunction> {
    if f.is_constant() {
        return Err(Error::ConstantFunction);
    }
    let fp = f.derivative();
    if fp.is_zero() {
        return Err(Error::ConstantFunction);
    }
    let u = fp.derivative().div(&fp)?;
    let half_usq = u.mul(&u).scale(Complex64::new(0.5, 0.0));
    Ok(u.derivative().sub(&half_usq))
}

/// A Moebius map z -> (az + b)/(cz + d), stored with max coefficient
/// magnitude normalized to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoebiusMap {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl MoebiusMap {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let s = a.norm().max(b.norm()).max(c.norm()).max(d.norm());
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::InvalidMoebius);
        }
        let (a, b, c, d) = (a / s, b / s, c / s, d / s);
        if (a * d - b * c).norm() < 1e-14 {
            return Err(Error::InvalidMoebius);
        }
        Ok(MoebiusMap { a, b, c, d })
    }

    pub fn identity() -> Self {
        MoebiusMap {
            a: Complex64::new(1.0, 0.0),
            b: czero(),
            c: czero(),
            d: Complex64::new(1.0, 0.0),
        }
    }

    pub fn translation(b: Complex64) -> Self {
        let s = b.norm().max(1.0);
        MoebiusMap {
            a: Complex64::new(1.0 / s, 0.0),
            b: b / s,
            c: czero(),
            d: Complex64::new(1.0 / s, 0.0),
        }
    }

    pub fn inversion() -> Self {
        MoebiusMap {
            a: czero(),
            b: Complex64::new(1.0, 0.0),
            c: Complex64::new(1.0, 0.0),
            d: czero(),
        }
    }

    pub fn rotation(theta: f64) -> Self {
        MoebiusMap {
            a: Complex64::from_polar(1.0, theta),
            b: czero(),
            c: czero(),
            d: Complex64::new(1.0, 0.0),
        }
    }

    /// Unit-disk automorphism e^{i theta} (z - a)/(1 - conj(a) z), |a| < 1.
    pub fn disk_automorphism(a: Complex64, theta: f64) -> Result<Self> {
        if a.norm() >= 1.0 {
            return Err(Error::InvalidFunction(format!(
                "disk automorphism parameter must satisfy |a| < 1, got |a| = {}",
                a.norm()
            )));
        }
        let rot = Complex64::from_polar(1.0, theta);
        MoebiusMap::new(rot, -rot * a, -a.conj(), Complex64::new(1.0, 0.0))
    }

    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn apply(&self, z: ExtComplex) -> ExtComplex {
        match z {
            ExtComplex::Infinity => {
                if self.c.norm() == 0.0 {
                    ExtComplex::Infinity
                } else {
                    ExtComplex::from(self.a / self.c)
                }
            }
            ExtComplex::Finite(z) => {
                let den = self.c * z + self.d;
                if den.norm() <= 1e-15 * (self.c.norm() * z.norm() + self.d.norm()).max(1e-300) {
                    ExtComplex::Infinity
                } else {
                    ExtComplex::from((self.a * z + self.b) / den)
                }
            }
        }
    }

    pub fn apply_finite(&self, z: Complex64) -> Result<Complex64> {
        self.apply(ExtComplex::Finite(z))
            .finite()
            .ok_or(Error::NonFiniteValue { at: z })
    }

    pub fn derivative_at(&self, z: Complex64) -> ExtComplex {
        let den = self.c * z + self.d;
        if den.norm() == 0.0 {
            return ExtComplex::Infinity;
        }
        ExtComplex::from(self.determinant() / (den * den))
    }

    pub fn inverse(&self) -> MoebiusMap {
        MoebiusMap {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    /// self after other: (self o other)(z).
    pub fn compose(&self, other: &MoebiusMap) -> Result<MoebiusMap> {
        MoebiusMap::new(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )
    }

    pub fn as_rational(&self) -> RationalFunction {
        RationalFunction::new(
            Polynomial::affine(self.a, self.b),
            Polynomial::affine(self.c, self.d),
        )
        .expect("moebius denominator is nonzero")
    }

    /// Exact image of a circle; Moebius maps send circles to circles.
    /// Fails when the pole lies on the circle (the image is a line).
    pub fn image_of_disk(&self, disk: &ClosedDiskRef) -> Result<(Complex64, f64)> {
        let (center, radius) = (disk.center, disk.radius);
        if self.c.norm() < 1e-14 {
            // affine map
            let scale = self.a / self.d;
            return Ok((scale * center + self.b / self.d, scale.norm() * radius));
        }
        // T(z) = a/c + (bc - ad)/c^2 * 1/(z + d/c)
        let pole = -self.d / self.c;
        let m = center - pole;
        let denom = m.norm_sqr() - radius * radius;
        if denom.abs() <= 1e-13 * (m.norm_sqr() + radius * radius) {
            return Err(Error::PoleOnContour);
        }
        let inv_center = m.conj() / denom;
        let inv_radius = radius / denom.abs();
        let k = (self.b * self.c - self.a * self.d) / (self.c * self.c);
        Ok((self.a / self.c + k * inv_center, k.norm() * inv_radius))
    }
}

// image_of_disk borrows only the circle data
pub type ClosedDiskRef = crate::geometry::ClosedDisk;

/// Exact rational composition T o f.
pub fn compose_moebius(t: &MoebiusMap, f: &RationalFunction) -> RationalFunction {
    let num = f.numerator().scale(t.a).add(&f.denominator().scale(t.b));
    let den = f.numerator().scale(t.c).add(&f.denominator().scale(t.d));
    RationalFunction::new(num, den).expect("moebius composition keeps a nonzero denominator")
}

/// Exact rational composition f o T.
pub fn precompose_moebius(f: &RationalFunction, t: &MoebiusMap) -> RationalFunction {
    let up = Polynomial::affine(t.a, t.b);
    let dn = Polynomial::affine(t.c, t.d);
    let n = f
        .numerator()
        .degree()
        .unwrap_or(0)
        .max(f.denominator().degree().unwrap_or(0));
    let homogenize = |p: &Polynomial| -> Polynomial {
        // sum c_k (az+b)^k (cz+d)^{n-k}
        let mut acc = Polynomial::zero();
        let mut up_pow = Polynomial::one();
        let mut dn_pows = vec![Polynomial::one()];
        for _ in 0..n {
            dn_pows.push(dn_pows.last().unwrap().mul(&dn));
        }
        for (k, c) in p.coeffs().iter().enumerate() {
            acc = acc.add(&up_pow.mul(&dn_pows[n - k]).scale(*c));
            up_pow = up_pow.mul(&up);
        }
        acc
    };
    let num = homogenize(f.numerator());
    let den = homogenize(f.denominator());
    RationalFunction::new(num, den).expect("moebius precomposition keeps a nonzero denominator")
}

/// Verdict of the argument-principle univalence check on a region.
#[derive(Debug, Clone)]
pub struct UnivalenceCertificate {
    pub region: CompactRegion,
    pub derivative_zero_count: i64,
    pub double_pole_count: i64,
    pub verdict: bool,
}

/// Certify local univalence of a rational function on a compact region:
/// no zeros of f' inside (argument principle on the boundary cycles) and no
/// poles of order >= 2 (denominator root multiplicities).
pub fn certify_local_univalence(
    f: &RationalFunction,
    region: &CompactRegion,
) -> Result<UnivalenceCertificate> {
    let fp = f.derivative();
    let fp_zero_candidates = fp.zeros()?;
    let f_poles = f.poles()?;
    for z in fp_zero_candidates.iter().chain(f_poles.iter()) {
        let dist = region.boundary_distance(*z);
        if dist < 1e-8 {
            return Err(Error::BoundaryDegeneracy { dist });
        }
    }

    let nodes = default_node_count(fp.max_degree());
    let mut winding_total: i64 = 0;
    for c in region.outer_circles() {
        let gamma = Contour::circle(&c, 1, nodes)?;
        winding_total += winding_of_closed_curve(&|z| fp.eval(z), &gamma)? as i64;
    }
    for c in region.hole_circles() {
        let gamma = Contour::circle(&c, -1, nodes)?;
        winding_total += winding_of_closed_curve(&|z| fp.eval(z), &gamma)? as i64;
    }
    // winding counts zeros minus poles of f'; add the interior pole count back
    let fp_poles_inside = fp
        .poles()?
        .into_iter()
        .filter(|p| region.contains(*p))
        .count() as i64;
    let derivative_zero_count = winding_total + fp_poles_inside;

    // clusters of denominator roots inside the region of size >= 2
    let inside: Vec<Complex64> = f_poles
        .into_iter()
        .filter(|p| region.contains(*p))
        .collect();
    let mut used = vec![false; inside.len()];
    let mut double_pole_count: i64 = 0;
    for i in 0..inside.len() {
        if used[i] {
            continue;
        }
        let mut size = 1;
        for j in i + 1..inside.len() {
            if !used[j] && (inside[i] - inside[j]).norm() <= 1e-7 * inside[i].norm().max(1.0) {
                used[j] = true;
                size += 1;
            }
        }
        if size >= 2 {
            double_pole_count += 1;
        }
    }

    Ok(UnivalenceCertificate {
        region: region.clone(),
        derivative_zero_count,
        double_pole_count,
        verdict: derivative_zero_count == 0 && double_pole_count == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn poly(cs: &[f64]) -> Polynomial {
        Polynomial::new(cs.iter().map(|&x| c(x, 0.0)).collect())
    }

    #[test]
    fn derivative_of_square_is_2z() {
        let f = RationalFunction::from_polynomial(poly(&[0.0, 0.0, 1.0]));
        let fp = f.derivative();
        assert_eq!(fp.numerator().coeffs(), &[c(0.0, 0.0), c(2.0, 0.0)]);
        assert_eq!(fp.denominator().coeffs(), &[c(1.0, 0.0)]);
    }

    #[test]
    fn derivative_of_reciprocal() {
        let f = RationalFunction::reciprocal();
        let fp = f.derivative();
        assert_eq!(fp.numerator().coeffs(), &[c(-1.0, 0.0)]);
        assert_eq!(
            fp.denominator().coeffs(),
            &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]
        );
    }

    #[test]
    fn derivative_of_cayley_like_map() {
        // (z+1)/(z-1) -> -2/(z-1)^2
        let f = RationalFunction::new(poly(&[1.0, 1.0]), poly(&[-1.0, 1.0])).unwrap();
        let fp = f.derivative();
        assert_eq!(fp.numerator().coeffs(), &[c(-2.0, 0.0)]);
        assert_eq!(
            fp.denominator().coeffs(),
            &[c(1.0, 0.0), c(-2.0, 0.0), c(1.0, 0.0)]
        );
    }

    #[test]
    fn schwarzian_of_moebius_is_exactly_zero() {
        let t = MoebiusMap::new(c(2.0, 1.0), c(-0.5, 0.3), c(1.0, -2.0), c(0.7, 0.1)).unwrap();
        let s = schwarzian(&t.as_rational()).unwrap();
        assert!(s.is_zero(), "expected exact zero, got {:?}", s);
    }

    #[test]
    fn schwarzian_of_square_and_inverse_square() {
        // both -3/(2 z^2), coefficient-exact
        for f in [
            RationalFunction::from_polynomial(poly(&[0.0, 0.0, 1.0])),
            RationalFunction::new(poly(&[-1.0]), poly(&[0.0, 0.0, 1.0])).unwrap(),
        ] {
            let s = schwarzian(&f).unwrap();
            assert_eq!(s.numerator().coeffs(), &[c(-1.5, 0.0)]);
            assert_eq!(
                s.denominator().coeffs(),
                &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]
            );
        }
    }

    #[test]
    fn schwarzian_of_constant_fails() {
        let f = RationalFunction::constant(c(3.0, 0.0));
        assert!(matches!(schwarzian(&f), Err(Error::ConstantFunction)));
    }

    #[test]
    fn roots_of_simple_polynomials() {
        let r = poly(&[1.0, 0.0, 1.0]).roots().unwrap(); // z^2 + 1
        assert!((r[0] - c(0.0, -1.0)).norm() < 1e-10);
        assert!((r[1] - c(0.0, 1.0)).norm() < 1e-10);

        let r = poly(&[1.0, -2.0, 1.0]).roots().unwrap(); // (z-1)^2
        assert!((r[0] - c(1.0, 0.0)).norm() < 1e-6);
        assert!((r[1] - c(1.0, 0.0)).norm() < 1e-6);

        let r = poly(&[0.0, -1.0, 0.0, 1.0]).roots().unwrap(); // z^3 - z
        assert!((r[0] - c(-1.0, 0.0)).norm() < 1e-10);
        assert!(r[1].norm() < 1e-12);
        assert!((r[2] - c(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn roots_satisfy_residual_bound() {
        let p = Polynomial::new(vec![
            c(2.0, -1.0),
            c(0.5, 3.0),
            c(-4.0, 0.25),
            c(1.0, 1.0),
            c(0.0, -2.0),
        ]);
        let deg = p.degree().unwrap() as i32;
        for r in p.roots().unwrap() {
            let bound = 1e-10 * p.max_coeff_mag() * (1.0 + r.norm()).powi(deg);
            assert!(p.eval(r).norm() <= bound);
        }
    }

    #[test]
    fn compose_with_identity_is_identity() {
        let f = RationalFunction::new(poly(&[1.0, 2.0, 3.0]), poly(&[4.0, 5.0])).unwrap();
        let t = MoebiusMap::identity();
        assert_eq!(compose_moebius(&t, &f), f);
    }

    #[test]
    fn compose_inversion_with_square() {
        let f = RationalFunction::from_polynomial(poly(&[0.0, 0.0, 1.0]));
        let g = compose_moebius(&MoebiusMap::inversion(), &f);
        assert_eq!(g.numerator().coeffs(), &[c(1.0, 0.0)]);
        assert_eq!(
            g.denominator().coeffs(),
            &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]
        );
    }

    #[test]
    fn precompose_moebius_into_identity() {
        // T(w) = (w-1)/(w+1) applied to f = z gives (z-1)/(z+1)
        let t = MoebiusMap::new(c(1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        let f = RationalFunction::identity();
        let g = compose_moebius(&t, &f);
        let h = precompose_moebius(&t.as_rational(), &MoebiusMap::identity());
        assert_eq!(g, h);
        let z = c(0.3, 0.7);
        let expected = (z - 1.0) / (z + 1.0);
        assert!((g.eval_finite(z).unwrap() - expected).norm() < 1e-14);
    }

    #[test]
    fn certify_reciprocal_on_annulus() {
        let f = RationalFunction::reciprocal();
        let region = CompactRegion::annulus(c(0.0, 0.0), 0.5, 2.0).unwrap();
        let cert = certify_local_univalence(&f, &region).unwrap();
        assert!(cert.verdict);
        assert_eq!(cert.derivative_zero_count, 0);
    }

    #[test]
    fn certify_square_on_unit_disk_fails() {
        let f = RationalFunction::from_polynomial(poly(&[0.0, 0.0, 1.0]));
        let region = CompactRegion::disk(c(0.0, 0.0), 1.0).unwrap();
        let cert = certify_local_univalence(&f, &region).unwrap();
        assert!(!cert.verdict);
        assert_eq!(cert.derivative_zero_count, 1);
    }

    #[test]
    fn certify_inverse_square_on_annulus() {
        let f = RationalFunction::new(poly(&[-1.0]), poly(&[0.0, 0.0, 1.0])).unwrap();
        let region = CompactRegion::annulus(c(0.0, 0.0), 0.5, 2.0).unwrap();
        let cert = certify_local_univalence(&f, &region).unwrap();
        assert!(cert.verdict);
    }

    #[test]
    fn serialization_round_trip() {
        let p = Polynomial::new(vec![c(1.0, -2.0), c(0.0, 0.0), c(3.5, 0.25)]);
        let s = poly_to_string(&p);
        assert_eq!(poly_from_string(&s).unwrap(), p);
    }

    #[test]
    fn moebius_disk_image_matches_samples() {
        let t = MoebiusMap::disk_automorphism(c(0.3, -0.2), 0.7).unwrap();
        let disk = crate::geometry::ClosedDisk::new(c(0.1, 0.1), 0.4).unwrap();
        let (ic, ir) = t.image_of_disk(&disk).unwrap();
        for k in 0..256 {
            let theta = crate::geometry::TAU * k as f64 / 256.0;
            let z = disk.center + disk.radius * Complex64::from_polar(1.0, theta);
            let w = t.apply_finite(z).unwrap();
            assert!(((w - ic).norm() - ir).abs() < 1e-10);
        }
    }
}
