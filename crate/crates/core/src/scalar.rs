//! Complex scalar and 2x2 matrix primitives: Blaschke factors, reflections,
//! the U(a) factors, the indefinite form j = diag(1, -1) and Moebius actions.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Points closer than this to the unit circle are rejected.
pub const DISK_MARGIN: f64 = 1e-12;

/// A point of the open unit disk, kept away from the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct DiskPoint(C64);

impl DiskPoint {
    pub fn new(value: C64) -> Result<Self> {
        if value.norm().is_nan() || value.norm() >= 1.0 - DISK_MARGIN {
            return Err(Error::NotInDisk(value));
        }
        Ok(DiskPoint(value))
    }

    pub fn zero() -> Self {
        DiskPoint(ZERO)
    }

    #[inline]
    pub fn value(self) -> C64 {
        self.0
    }

    /// sqrt(1 - |w|^2)
    #[inline]
    pub fn rho(self) -> f64 {
        (1.0 - self.0.norm_sqr()).sqrt()
    }
}

impl TryFrom<[f64; 2]> for DiskPoint {
    type Error = Error;
    fn try_from(v: [f64; 2]) -> Result<Self> {
        DiskPoint::new(C64::new(v[0], v[1]))
    }
}

impl From<DiskPoint> for [f64; 2] {
    fn from(p: DiskPoint) -> Self {
        [p.0.re, p.0.im]
    }
}

/// A point of the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Proj {
    Finite(C64),
    Infinity,
}

impl Proj {
    pub fn finite(self) -> Option<C64> {
        match self {
            Proj::Finite(z) => Some(z),
            Proj::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Proj::Infinity)
    }
}

/// Elementary Blaschke factor (z - w)/(1 - conj(w) z).
pub fn blaschke_eval(w: DiskPoint, z: C64) -> Result<C64> {
    blaschke(w.value(), z)
}

/// Unchecked-pole variant taking a raw complex pole parameter.
pub fn blaschke(w: C64, z: C64) -> Result<C64> {
    let den = ONE - w.conj() * z;
    if den.norm() <= f64::EPSILON * (1.0 + z.norm()) {
        return Err(Error::Pole(z));
    }
    Ok((z - w) / den)
}

/// Derivative of the Blaschke factor in z.
pub fn blaschke_deriv(w: C64, z: C64) -> C64 {
    let den = ONE - w.conj() * z;
    (1.0 - w.norm_sqr()) / (den * den)
}

/// Value of b_w at infinity, -1/conj(w). Infinite when w = 0.
pub fn blaschke_at_infinity(w: C64) -> Proj {
    if w == ZERO {
        Proj::Infinity
    } else {
        Proj::Finite(-ONE / w.conj())
    }
}

/// Reflection in the unit circle, z* = 1/conj(z).
pub fn reflect(z: C64) -> Result<C64> {
    if z == ZERO {
        return Err(Error::ZeroReflection);
    }
    Ok(ONE / z.conj())
}

/// Reflection on the sphere, with 0 and infinity exchanged.
pub fn reflect_proj(z: Proj) -> Proj {
    match z {
        Proj::Infinity => Proj::Finite(ZERO),
        Proj::Finite(w) if w == ZERO => Proj::Infinity,
        Proj::Finite(w) => Proj::Finite(ONE / w.conj()),
    }
}

/// sqrt(1 - |z|^2) for a disk point given as a raw complex number.
#[inline]
pub fn eta(z: C64) -> f64 {
    (1.0 - z.norm_sqr()).sqrt()
}

/// A 2x2 complex matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m11: C64,
    pub m12: C64,
    pub m21: C64,
    pub m22: C64,
}

impl Mat2 {
    pub const fn new(m11: C64, m12: C64, m21: C64, m22: C64) -> Self {
        Mat2 { m11, m12, m21, m22 }
    }

    pub const fn identity() -> Self {
        Mat2::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn zero() -> Self {
        Mat2::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub fn diag(d1: C64, d2: C64) -> Self {
        Mat2::new(d1, ZERO, ZERO, d2)
    }

    /// The indefinite form j = diag(1, -1).
    pub fn j() -> Self {
        Mat2::diag(ONE, -ONE)
    }

    pub fn det(&self) -> C64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(&self) -> C64 {
        self.m11 + self.m22
    }

    pub fn adjoint(&self) -> Self {
        Mat2::new(self.m11.conj(), self.m21.conj(), self.m12.conj(), self.m22.conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Mat2::new(self.m11 * s, self.m12 * s, self.m21 * s, self.m22 * s)
    }

    pub fn inverse(&self) -> Result<Self> {
        let d = self.det();
        if d == ZERO {
            return Err(Error::SingularSolve("2x2 determinant vanishes".into()));
        }
        Ok(Mat2::new(self.m22 / d, -self.m12 / d, -self.m21 / d, self.m11 / d))
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        [self.m11, self.m12, self.m21, self.m22].iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        (self.m11.norm_sqr() + self.m12.norm_sqr() + self.m21.norm_sqr() + self.m22.norm_sqr()).sqrt()
    }

    /// Eigenvalues ordered by decreasing modulus.
    pub fn eigenvalues(&self) -> (C64, C64) {
        let tr = self.trace();
        let disc = (tr * tr - 4.0 * self.det()).sqrt();
        let l1 = (tr + disc) / 2.0;
        let l2 = (tr - disc) / 2.0;
        if l1.norm() >= l2.norm() {
            (l1, l2)
        } else {
            (l2, l1)
        }
    }

    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        [self.m11 * v[0] + self.m12 * v[1], self.m21 * v[0] + self.m22 * v[1]]
    }

    /// j - M* j M, which is positive semidefinite exactly when M is j-contractive.
    pub fn j_defect(&self) -> Mat2 {
        Mat2::j() - self.adjoint() * Mat2::j() * *self
    }

    pub fn is_j_unitary(&self, tol: f64) -> bool {
        self.j_defect().max_abs() <= tol * (1.0 + self.norm().powi(2))
    }

    /// Checks j - M* j M >= 0 up to a relative tolerance.
    pub fn is_j_contractive(&self, tol: f64) -> bool {
        let h = self.j_defect();
        let scale = tol * (1.0 + self.norm().powi(2));
        let a = h.m11.re;
        let d = h.m22.re;
        let det = a * d - h.m12.norm_sqr();
        a >= -scale && d >= -scale && det >= -scale * (1.0 + a.abs() + d.abs())
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.m11 * o.m11 + self.m12 * o.m21,
            self.m11 * o.m12 + self.m12 * o.m22,
            self.m21 * o.m11 + self.m22 * o.m21,
            self.m21 * o.m12 + self.m22 * o.m22,
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(self.m11 + o.m11, self.m12 + o.m12, self.m21 + o.m21, self.m22 + o.m22)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(self.m11 - o.m11, self.m12 - o.m12, self.m21 - o.m21, self.m22 - o.m22)
    }
}

/// U(a) = (1/rho) [[1, a], [conj(a), 1]].
pub fn u_matrix(a: DiskPoint) -> Mat2 {
    u_raw(a.value())
}

pub(crate) fn u_raw(a: C64) -> Mat2 {
    let r = 1.0 / (1.0 - a.norm_sqr()).sqrt();
    Mat2::new(C64::from(r), a * r, a.conj() * r, C64::from(r))
}

/// Projective action (m11 f + m12)/(m21 f + m22).
pub fn moebius_2x2(m: &Mat2, f: Proj) -> Result<Proj> {
    let (num, den) = match f {
        Proj::Finite(f) => (m.m11 * f + m.m12, m.m21 * f + m.m22),
        Proj::Infinity => (m.m11, m.m21),
    };
    if num == ZERO && den == ZERO {
        return Err(Error::Indeterminate);
    }
    if den == ZERO {
        return Ok(Proj::Infinity);
    }
    Ok(Proj::Finite(num / den))
}

/// Fixed points of the projective action: roots of
/// m21 F^2 + (m22 - m11) F - m12 = 0.
pub fn fixed_points_2x2(m: &Mat2) -> Result<(Proj, Proj)> {
    let a = m.m21;
    let b = m.m22 - m.m11;
    let c = -m.m12;
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let tiny = 1e-14 * scale;
    if a.norm() <= tiny && b.norm() <= tiny && c.norm() <= tiny {
        return Err(Error::IdenticallySatisfied);
    }
    if a.norm() <= tiny {
        // Linear equation; the second root went to infinity.
        return Ok((Proj::Finite(-c / b), Proj::Infinity));
    }
    let disc = (b * b - 4.0 * a * c).sqrt();
    // Choose the sign that avoids cancellation, then use Vieta for the other root.
    let q = if (b.conj() * disc).re >= 0.0 { -(b + disc) / 2.0 } else { -(b - disc) / 2.0 };
    let r1 = q / a;
    let r2 = if q == ZERO { ZERO } else { c / q };
    Ok((Proj::Finite(r1), Proj::Finite(r2)))
}
