use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A finite complex number; used for both dynamical points `z` and parameters `kappa`.
#[derive(Clone, Copy, PartialEq, Default)]
pub struct ComplexPoint(Complex64);

impl ComplexPoint {
    pub const ZERO: ComplexPoint = ComplexPoint(Complex64::new(0.0, 0.0));

    pub fn new(re: f64, im: f64) -> Result<Self> {
        if re.is_finite() && im.is_finite() {
            Ok(ComplexPoint(Complex64::new(re, im)))
        } else {
            Err(Error::InvalidInput("complex point components must be finite"))
        }
    }

    pub fn from_complex(c: Complex64) -> Result<Self> {
        Self::new(c.re, c.im)
    }

    pub const fn real(re: f64) -> Self {
        ComplexPoint(Complex64::new(re, 0.0))
    }

    #[inline]
    pub fn re(self) -> f64 {
        self.0.re
    }

    #[inline]
    pub fn im(self) -> f64 {
        self.0.im
    }

    #[inline]
    pub fn value(self) -> Complex64 {
        self.0
    }

    pub fn conj(self) -> Self {
        ComplexPoint(self.0.conj())
    }

    pub fn norm(self) -> f64 {
        cabs(self.0)
    }

    pub fn distance(self, other: ComplexPoint) -> f64 {
        cabs(self.0 - other.0)
    }
}

/// Modulus through `libm`, so results do not depend on whether `std` is linked.
#[inline]
pub fn cabs(z: Complex64) -> f64 {
    libm::hypot(z.re, z.im)
}

impl fmt::Debug for ComplexPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.0.re, self.0.im)
    }
}

impl fmt::Display for ComplexPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.im.is_sign_negative() {
            write!(f, "{}-{}i", self.0.re, -self.0.im)
        } else {
            write!(f, "{}+{}i", self.0.re, self.0.im)
        }
    }
}

impl From<ComplexPoint> for Complex64 {
    fn from(p: ComplexPoint) -> Self {
        p.0
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for ComplexPoint {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        [self.0.re, self.0.im].serialize(serializer)
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for ComplexPoint {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> core::result::Result<Self, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(deserializer)?;
        ComplexPoint::new(re, im).map_err(serde::de::Error::custom)
    }
}

/// Principal logarithm with imaginary part in `(-pi, pi]`.
#[inline]
pub(crate) fn principal_log(u: Complex64) -> Complex64 {
    let mut arg = libm::atan2(u.im, u.re);
    if arg == -PI {
        arg = PI;
    }
    Complex64::new(libm::log(libm::hypot(u.re, u.im)), arg)
}
