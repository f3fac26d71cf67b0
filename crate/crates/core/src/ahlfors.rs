//! Ahlfors functions of Denjoy domains C \ E with E a finite union of
//! intervals of the positive half-line, the associated real discriminant,
//! and the transport of both to finite unions of circular arcs.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::mcmv::PoleVector;
use crate::numerics::{brent, Arc, Poly};
use crate::scalar::{Proj, C64, ONE, ZERO};

/// Distance below which a point counts as a branch point or pole.
pub const BRANCH_TOL: f64 = 1e-14;
/// Two poles of the circle discriminant closer than this are reported as a
/// multiplicity.
pub const POLE_MERGE_TOL: f64 = 1e-8;

/// E = [0, inf) minus finitely many open gaps (a_j, b_j).
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RealSlitSet {
    gaps: Vec<(f64, f64)>,
}

impl RealSlitSet {
    pub fn new(gaps: Vec<(f64, f64)>) -> Result<Self> {
        let mut prev = 0.0;
        for &(a, b) in &gaps {
            if !(a.is_finite() && b.is_finite() && a > prev && b > a) {
                return Err(Error::Invalid(format!("gaps must satisfy 0 < a < b < next a, got ({a}, {b})")));
            }
            prev = b;
        }
        Ok(RealSlitSet { gaps })
    }

    pub fn gaps(&self) -> &[(f64, f64)] {
        &self.gaps
    }

    pub fn genus(&self) -> usize {
        self.gaps.len()
    }

    /// Bands as (left, right); the last one is unbounded.
    pub fn bands(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.genus() + 1);
        let mut left = 0.0;
        for &(a, b) in &self.gaps {
            out.push((left, a));
            left = b;
        }
        out.push((left, f64::INFINITY));
        out
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= 0.0 && !self.gaps.iter().any(|&(a, b)| x > a && x < b)
    }

    fn check_branch(&self, z: C64) -> Result<()> {
        let hit = |c: f64| (z - c).norm() <= BRANCH_TOL * (1.0 + c);
        if hit(0.0) || self.gaps.iter().any(|&(a, b)| hit(a) || hit(b)) {
            return Err(Error::BranchPoint(z));
        }
        Ok(())
    }

    /// H(z)^2 = -(1/z) prod (z - a_j)/(z - b_j), a rational function.
    pub fn h_squared(&self, z: C64) -> Result<C64> {
        self.check_branch(z)?;
        let mut x = -ONE / z;
        for &(a, b) in &self.gaps {
            x *= (z - a) / (z - b);
        }
        Ok(x)
    }

    /// ln|H(x)^2| for real x, without overflow.
    fn log_abs_h_squared(&self, x: f64) -> f64 {
        let mut s = -x.abs().ln();
        for &(a, b) in &self.gaps {
            s += (x - a).abs().ln() - (x - b).abs().ln();
        }
        s
    }
}

/// Argument in [0, pi] of a point of the closed upper half-plane.
fn arg_upper(w: C64) -> f64 {
    if w.im > 0.0 {
        w.im.atan2(w.re)
    } else if w.re < 0.0 {
        PI
    } else {
        0.0
    }
}

/// H on the closed upper half-plane; real points take the limit from above.
fn h_upper(e: &RealSlitSet, z: C64) -> C64 {
    // -log(-z) with arg(-z) = arg z - pi
    let mut re = -z.norm().ln();
    let mut im = -(arg_upper(z) - PI);
    for &(a, b) in &e.gaps {
        let (za, zb) = (z - a, z - b);
        re += za.norm().ln() - zb.norm().ln();
        im += arg_upper(za) - arg_upper(zb);
    }
    C64::new(0.5 * re, 0.5 * im).exp()
}

/// H(z) = (1/sqrt(-z)) prod sqrt((z - a_j)/(z - b_j)) on the branch that maps
/// the upper half-plane into itself, extended by H(conj z) = conj H(z). On
/// the real axis the limit from above is returned.
pub fn h_eval(e: &RealSlitSet, z: C64) -> Result<C64> {
    e.check_branch(z)?;
    if z.im >= 0.0 {
        Ok(h_upper(e, z))
    } else {
        Ok(h_upper(e, z.conj()).conj())
    }
}

/// The Ahlfors function of C \ E at z0:
/// w(z) = ((z - z0)/(z - conj z0)) (H(z) - H(conj z0))/(H(z) + H(z0)).
pub fn ahlfors_eval(e: &RealSlitSet, z0: C64, z: C64) -> Result<C64> {
    if z0.im == 0.0 && e.contains(z0.re) {
        return Err(Error::Invalid(format!("base point {z0} lies on the set")));
    }
    let h = h_eval(e, z)?;
    let h0 = h_eval(e, z0)?;
    let h0c = h_eval(e, z0.conj())?;
    let den = h + h0;
    if den.norm() <= BRANCH_TOL * (1.0 + h.norm()) {
        return Err(Error::Pole(z));
    }
    let num = h - h0c;
    let dz = z - z0.conj();
    if dz.norm() <= BRANCH_TOL * (1.0 + z.norm()) {
        // removable: both factors vanish at conj(z0) when z0 is not real
        if z0.im == 0.0 {
            return Ok(ZERO);
        }
        let step = 1e-6 * (1.0 + z.norm());
        let probe = |d: C64| -> Result<C64> { ahlfors_eval(e, z0, z + d) };
        return Ok(0.5 * (probe(C64::new(step, 0.0))? + probe(C64::new(-step, 0.0))?));
    }
    Ok((z - z0) / dz * num / den)
}

/// The g zeros of w_{z0} in the lower half-plane other than conj(z0)'s
/// removable point, i.e. the solutions of H(z) = H(conj z0) there.
pub fn ahlfors_zeros(e: &RealSlitSet, z0: C64) -> Result<Vec<C64>> {
    if z0.im <= 0.0 {
        return Err(Error::Invalid("the base point must lie in the upper half-plane".into()));
    }
    let g = e.genus();
    if g == 0 {
        return Ok(Vec::new());
    }
    let c = h_eval(e, z0.conj())?;
    // H^2 = c^2  <=>  c^2 z prod (z - b) + prod (z - a) = 0
    let mut pb = Poly::linear(ZERO, c * c);
    let mut pa = Poly::constant(ONE);
    for &(a, b) in &e.gaps {
        pb = pb.mul(&Poly::linear(C64::from(-b), ONE));
        pa = pa.mul(&Poly::linear(C64::from(-a), ONE));
    }
    let roots = pb.add(&pa).roots()?;
    let scale = 1.0 + z0.norm();
    let zeros: Vec<C64> = roots
        .into_iter()
        .filter(|r| r.im < -1e-12 * scale && (*r - z0.conj()).norm() > 1e-8 * scale)
        .map(|r| polish_h(e, r, c))
        .collect::<Result<_>>()?;
    if zeros.len() != g {
        return Err(Error::RootCount { expected: g, found: zeros.len() });
    }
    for z in &zeros {
        let res = (h_eval(e, *z)? - c).norm();
        if res > 1e-8 * (1.0 + c.norm()) {
            return Err(Error::RootCount { expected: g, found: 0 });
        }
    }
    Ok(zeros)
}

/// Damped Newton on H(z) - c; H'/H is the logarithmic derivative of the
/// product.
fn polish_h(e: &RealSlitSet, mut z: C64, c: C64) -> Result<C64> {
    for _ in 0..200 {
        let h = h_eval(e, z)?;
        let mut dlog = -0.5 / z;
        for &(a, b) in &e.gaps {
            dlog += 0.5 / (z - a) - 0.5 / (z - b);
        }
        let mut step = (h - c) / (h * dlog);
        if !step.is_finite() {
            break;
        }
        // keep the iterate in the lower half-plane
        while (z - step).im >= 0.0 && step.norm() > 1e-300 {
            step *= 0.5;
        }
        z -= step;
        if step.norm() < 1e-12 * (1.0 + z.norm()) * 1e-3 {
            break;
        }
    }
    Ok(z)
}

/// w_{z0} w_{conj z0} depends only on H^2; with s = X + |h|^2, t^2 = 4 (Re h)^2 X,
/// X = H(z)^2 and h = H(z0), the discriminant is 2 (s^2 + t^2)/(s^2 - t^2).
fn delta_from_x(x: C64, h: C64) -> Result<C64> {
    let s = x + h.norm_sqr();
    let t2 = 4.0 * h.re * h.re * x;
    let den = s * s - t2;
    let num = s * s + t2;
    if den.norm() <= 1e-14 * num.norm() || !den.is_finite() {
        return Err(Error::Pole(x));
    }
    Ok(2.0 * num / den)
}

/// The real discriminant w_{z0} w_{conj z0} + 1/(w_{z0} w_{conj z0}).
pub fn delta_real_eval(e: &RealSlitSet, z0: C64, z: C64) -> Result<C64> {
    if z0.im == 0.0 && e.contains(z0.re) {
        return Err(Error::Invalid(format!("base point {z0} lies on the set")));
    }
    if (z - z0).norm() <= BRANCH_TOL || (z - z0.conj()).norm() <= BRANCH_TOL {
        return Err(Error::Pole(z));
    }
    let h = h_eval(e, z0)?;
    if z.norm() > 1e150 {
        // H(inf) = 0
        return delta_from_x(ZERO, h);
    }
    match e.h_squared(z) {
        Ok(x) => delta_from_x(x, h),
        // at 0 and b_j, X is infinite and the value is 2; at a_j, X = 0
        Err(Error::BranchPoint(_)) => {
            let at_a = e.gaps.iter().any(|&(a, _)| (z - a).norm() <= BRANCH_TOL * (1.0 + a));
            delta_from_x(if at_a { ZERO } else { C64::from(1e300) }, h).or(Ok(C64::from(2.0)))
        }
        Err(err) => Err(err),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum CriticalKind {
    Gap,
    Band,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RealCriticalPoint {
    pub x: f64,
    pub value: f64,
    pub kind: CriticalKind,
}

/// One critical point in every gap (including the negative half-line, which
/// is the gap through infinity) and one in every band, in increasing order.
/// Along the real line the derivative of the discriminant vanishes exactly
/// where H^2 = |H(z0)|^2 (gaps) or H^2 = -|H(z0)|^2 (bands), so each is a
/// bracketed one-dimensional root of ln|H^2| - ln|H(z0)|^2.
pub fn critical_points(e: &RealSlitSet, z0: C64) -> Result<Vec<RealCriticalPoint>> {
    let h = h_eval(e, z0)?;
    let target = h.norm_sqr().ln();
    let f = |x: f64| e.log_abs_h_squared(x) - target;
    let expected = 2 * e.genus() + 2;
    let mut xs: Vec<(f64, CriticalKind)> = Vec::with_capacity(expected);
    let miss = |found: usize| Error::RootCount { expected, found };

    // negative half-line through the substitution x = -exp(s)
    let s = brent(|s| f(-s.exp()), -60.0, 60.0, "negative axis").map_err(|_| miss(0))?;
    xs.push((-s.exp(), CriticalKind::Gap));
    for (j, &(l, r)) in e.bands().iter().enumerate() {
        let x = if r.is_infinite() {
            let u = |s: f64| l + (1.0 + l) * s.exp();
            u(brent(|s| f(u(s)), -30.0, 60.0, "last band").map_err(|_| miss(xs.len()))?)
        } else {
            bracketed(&f, l, r).ok_or_else(|| miss(xs.len()))?
        };
        xs.push((x, CriticalKind::Band));
        if let Some(&(a, b)) = e.gaps.get(j) {
            xs.push((bracketed(&f, a, b).ok_or_else(|| miss(xs.len()))?, CriticalKind::Gap));
        }
    }
    xs.into_iter()
        .map(|(x, kind)| Ok(RealCriticalPoint { x, value: delta_real_eval(e, z0, C64::from(x))?.re, kind }))
        .collect()
}

fn bracketed(f: &impl Fn(f64) -> f64, l: f64, r: f64) -> Option<f64> {
    let pad = 1e-13 * (r - l).max(1e-300);
    brent(f, l + pad, r - pad, "critical point").ok()
}

/// Finite union of disjoint closed arcs of the unit circle, sorted by start
/// angle, or the full circle.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CircleArcSet {
    arcs: Vec<Arc>,
}

impl CircleArcSet {
    pub fn new(mut arcs: Vec<Arc>) -> Result<Self> {
        if arcs.is_empty() {
            return Err(Error::Invalid("an arc set needs at least one arc".into()));
        }
        if arcs.iter().any(|a| a.is_full()) {
            if arcs.len() > 1 {
                return Err(Error::Invalid("the full circle cannot be combined with other arcs".into()));
            }
            return Ok(CircleArcSet { arcs: vec![Arc::full()] });
        }
        for a in &arcs {
            if !(a.length > 0.0 && a.length < TAU && a.start.is_finite()) {
                return Err(Error::Invalid(format!("degenerate arc {a:?}")));
            }
        }
        arcs.iter_mut().for_each(|a| a.start = a.start.rem_euclid(TAU));
        arcs.sort_by(|a, b| a.start.total_cmp(&b.start));
        for (k, a) in arcs.iter().enumerate() {
            let next = &arcs[(k + 1) % arcs.len()];
            let room = if arcs.len() == 1 { TAU } else { a.offset(next.start) };
            if room <= a.length {
                return Err(Error::Invalid("arcs overlap or touch".into()));
            }
        }
        Ok(CircleArcSet { arcs })
    }

    /// Arc set from (start, end) angle pairs traversed counterclockwise.
    pub fn from_endpoints(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(s, e)| Arc::from_endpoints(s, e)).collect())
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn is_full(&self) -> bool {
        self.arcs[0].is_full()
    }

    pub fn genus(&self) -> Option<usize> {
        (!self.is_full()).then(|| self.arcs.len() - 1)
    }

    pub fn contains(&self, t: f64) -> bool {
        self.arcs.iter().any(|a| a.contains(t))
    }

    /// The Cayley map sending the gap after the last arc to the negative
    /// half-line and the arcs, in order, onto [0, inf).
    pub fn cayley(&self) -> Result<CayleyMap> {
        if self.is_full() {
            return Err(Error::Invalid("the full circle has no gap to send to infinity".into()));
        }
        let last = self.arcs.last().expect("nonempty");
        let lm = last.end();
        let gap = (self.arcs[0].start - lm).rem_euclid(TAU);
        Ok(CayleyMap {
            lambda_minus: C64::from_polar(1.0, lm),
            lambda_plus: C64::from_polar(1.0, lm + gap),
            rot: C64::from_polar(1.0, -0.5 * gap),
        })
    }

    /// The image of the arc set under its Cayley map.
    pub fn real_set(&self) -> Result<(CayleyMap, RealSlitSet)> {
        let m = self.cayley()?;
        let mut gaps = Vec::with_capacity(self.arcs.len() - 1);
        for w in self.arcs.windows(2) {
            let a = m.forward_real(w[0].end())?;
            let b = m.forward_real(w[1].start)?;
            gaps.push((a, b));
        }
        Ok((m, RealSlitSet::new(gaps)?))
    }
}

/// x = rot (zeta - lambda_plus)/(zeta - lambda_minus); maps the disk onto the
/// upper half-plane, the circle onto the real line, lambda_plus to 0 and
/// lambda_minus to infinity. 0 goes to conj(rot) and infinity to rot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CayleyMap {
    lambda_minus: C64,
    lambda_plus: C64,
    rot: C64,
}

impl CayleyMap {
    pub fn forward(&self, zeta: C64) -> Proj {
        let den = zeta - self.lambda_minus;
        if den.norm() <= BRANCH_TOL {
            return Proj::Infinity;
        }
        Proj::Finite(self.rot * (zeta - self.lambda_plus) / den)
    }

    pub fn inverse(&self, x: Proj) -> C64 {
        match x {
            Proj::Infinity => self.lambda_minus,
            Proj::Finite(x) => {
                let y = x / self.rot;
                (y * self.lambda_minus - self.lambda_plus) / (y - ONE)
            }
        }
    }

    /// Image of the base point 0 of the disk.
    pub fn image_of_zero(&self) -> C64 {
        self.rot.conj()
    }

    fn forward_real(&self, t: f64) -> Result<f64> {
        match self.forward(C64::from_polar(1.0, t)) {
            Proj::Finite(x) => Ok(x.re),
            Proj::Infinity => Err(Error::Invalid("arc endpoint maps to infinity".into())),
        }
    }
}

/// Arc data transported to the half-line, cached for repeated evaluation.
#[derive(Debug, Clone)]
pub struct ArcDomain {
    pub set: CircleArcSet,
    pub map: CayleyMap,
    pub real: RealSlitSet,
}

impl ArcDomain {
    pub fn new(set: CircleArcSet) -> Result<Self> {
        let (map, real) = set.real_set()?;
        Ok(ArcDomain { set, map, real })
    }

    fn base(&self) -> C64 {
        self.map.image_of_zero()
    }

    /// Ahlfors function of the circle domain at 0 (`at_infinity = false`) or
    /// at infinity, pulled back through the Cayley map.
    pub fn ahlfors(&self, at_infinity: bool, zeta: C64) -> Result<C64> {
        let z0 = if at_infinity { self.base().conj() } else { self.base() };
        match self.map.forward(zeta) {
            // H vanishes at infinity, and the first factor tends to 1
            Proj::Infinity => {
                let h0 = h_eval(&self.real, z0)?;
                Ok(-h_eval(&self.real, z0.conj())? / h0)
            }
            Proj::Finite(x) => ahlfors_eval(&self.real, z0, x),
        }
    }

    /// Delta_E = w_0 w_inf + 1/(w_0 w_inf).
    pub fn discriminant(&self, zeta: C64) -> Result<C64> {
        let w = self.ahlfors(false, zeta)? * self.ahlfors(true, zeta)?;
        if w.norm() <= 1e-300 || !w.is_finite() {
            return Err(Error::Pole(zeta));
        }
        Ok(w + ONE / w)
    }

    /// Poles of Delta_E in the disk: 0 and the preimages of the upper
    /// half-plane solutions of H(x) = H(image of 0).
    pub fn poles(&self) -> Result<Vec<C64>> {
        let zeros = ahlfors_zeros(&self.real, self.base())?;
        let mut inner: Vec<C64> = zeros.iter().map(|x| self.map.inverse(Proj::Finite(x.conj()))).collect();
        inner.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
        let mut out = vec![ZERO];
        out.extend(inner);
        for j in 0..out.len() {
            for k in j + 1..out.len() {
                if (out[j] - out[k]).norm() <= POLE_MERGE_TOL {
                    return Err(Error::Multiplicity(format!("poles {j} and {k} of the discriminant coincide")));
                }
            }
        }
        Ok(out)
    }
}

/// The generalized discriminant of an arc set. The full circle is the
/// degenerate case Delta = z + 1/z.
pub fn generalized_discriminant(e: &CircleArcSet, z: C64) -> Result<C64> {
    if e.is_full() {
        if z.norm() <= BRANCH_TOL {
            return Err(Error::Pole(z));
        }
        return Ok(z + ONE / z);
    }
    ArcDomain::new(e.clone())?.discriminant(z)
}

/// The canonical pole vector {0, z_1, ..., z_g} of an arc set, ordered by
/// increasing argument after the leading 0.
pub fn pole_vector_of_set(e: &CircleArcSet) -> Result<PoleVector> {
    if e.is_full() {
        return Ok(PoleVector::zeros(1));
    }
    PoleVector::from_values(&ArcDomain::new(e.clone())?.poles()?)
}
