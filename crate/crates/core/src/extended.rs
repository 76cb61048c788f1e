//! Extended complex values and the chordal metric on the Riemann sphere.

use num_complex::Complex64;

/// A point of the Riemann sphere: a finite complex number or the point at infinity.
///
/// Evaluators of meromorphic functions produce `Infinity` at poles; the chordal
/// operations accept it, the sup-norm operations reject it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtComplex {
    Finite(Complex64),
    Infinity,
}

impl ExtComplex {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtComplex::Finite(z) if z.re.is_finite() && z.im.is_finite())
    }

    pub fn finite(&self) -> Option<Complex64> {
        match self {
            ExtComplex::Finite(z) if z.re.is_finite() && z.im.is_finite() => Some(*z),
            _ => None,
        }
    }

    /// Reciprocal on the sphere: 1/0 = inf, 1/inf = 0.
    pub fn recip(&self) -> ExtComplex {
        match self {
            ExtComplex::Infinity => ExtComplex::Finite(Complex64::new(0.0, 0.0)),
            ExtComplex::Finite(z) if z.norm() == 0.0 => ExtComplex::Infinity,
            ExtComplex::Finite(z) => ExtComplex::Finite(1.0 / z),
        }
    }
}

impl From<Complex64> for ExtComplex {
    fn from(z: Complex64) -> Self {
        if z.re.is_finite() && z.im.is_finite() {
            ExtComplex::Finite(z)
        } else {
            ExtComplex::Infinity
        }
    }
}

/// Chordal distance chi on the Riemann sphere, always in [0, 1].
///
/// chi(z1, z2) = |z1 - z2| / (sqrt(1 + |z1|^2) sqrt(1 + |z2|^2)) for finite points,
/// chi(z, inf) = 1 / sqrt(1 + |z|^2).
pub fn chordal_distance(a: ExtComplex, b: ExtComplex) -> f64 {
    match (a, b) {
        (ExtComplex::Infinity, ExtComplex::Infinity) => 0.0,
        (ExtComplex::Finite(z), ExtComplex::Infinity)
        | (ExtComplex::Infinity, ExtComplex::Finite(z)) => {
            1.0 / 1.0f64.hypot(z.norm())
        }
        (ExtComplex::Finite(z1), ExtComplex::Finite(z2)) => {
            let d = (z1 - z2).norm();
            let n1 = 1.0f64.hypot(z1.norm());
            let n2 = 1.0f64.hypot(z2.norm());
            (d / n1 / n2).min(1.0)
        }
    }
}
