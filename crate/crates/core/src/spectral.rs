//! Direct spectral theory of periodic MCMV operators: bands and gaps, the
//! Caratheodory function, divisor, spectral measure, Lyapunov exponent and
//! the quadratic equation satisfied by F.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{arc_rule, arc_samples, brent, circle_grid, Arc, Poly, PolyMat2};
use crate::scalar::{u_raw, Mat2, C64, I, ONE, ZERO};
use crate::transfer::{caratheodory_from_schur, coefficient_stripping, schur_from_caratheodory, MonodromyEvaluator};

/// |critical value| within this of 2 counts as a closed gap.
pub const CLOSED_GAP_TOL: f64 = 1e-9;
/// Relative size below which the numerator v + R is treated as vanishing.
pub const EPSILON_THRESHOLD: f64 = 1e-7;
/// Divisor points this close to a gap edge are stored at the edge.
pub const EDGE_SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub t: f64,
    pub value: f64,
}

/// One gap of the spectrum, i.e. the stretch around one critical point of
/// the discriminant on the circle. A closed gap has `lower == upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gap {
    pub lower: f64,
    pub upper: f64,
    pub critical: CriticalPoint,
    pub open: bool,
}

impl Gap {
    pub fn arc(&self) -> Arc {
        Arc::from_endpoints(self.lower, self.upper)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandDecomposition {
    pub bands: Vec<Arc>,
    /// All p gaps in counterclockwise order of their critical points.
    pub gaps: Vec<Gap>,
}

impl BandDecomposition {
    pub fn open_gaps(&self) -> impl Iterator<Item = &Gap> {
        self.gaps.iter().filter(|g| g.open)
    }

    pub fn critical_points(&self) -> Vec<CriticalPoint> {
        self.gaps.iter().map(|g| g.critical).collect()
    }

    /// Genus: number of open gaps minus one; None for the whole circle.
    pub fn genus(&self) -> Option<usize> {
        self.open_gaps().count().checked_sub(1)
    }

    pub fn in_band(&self, t: f64) -> bool {
        self.bands.iter().any(|b| b.contains(t))
    }
}

/// Locates the p critical points of the discriminant on the circle by sign
/// changes of its angle derivative on an offset grid, then the band edges
/// by bracketing between neighbouring critical points.
pub fn bands_from_discriminant(ev: &MonodromyEvaluator, grid: usize) -> Result<BandDecomposition> {
    let p = ev.period();
    if grid < 2 * p {
        return Err(Error::GridTooCoarse(format!("grid {grid} below 2p = {}", 2 * p)));
    }
    let ts: Vec<f64> = circle_grid(grid).collect();
    let mut dt = Vec::with_capacity(grid);
    for &t in &ts {
        let d = ev.discriminant(C64::from_polar(1.0, t))?;
        if d.im.abs() > 1e-8 * (1.0 + d.re.abs()) {
            return Err(Error::Invalid(format!("discriminant not real on the circle at t = {t}")));
        }
        dt.push(ev.discriminant_on_circle(t)?.1);
    }
    let slope = |t: f64| ev.discriminant_on_circle(t).map(|v| v.1).unwrap_or(f64::NAN);
    let value = |t: f64| ev.discriminant_on_circle(t).map(|v| v.0).unwrap_or(f64::NAN);
    let mut crit = Vec::new();
    for m in 0..grid {
        let m1 = (m + 1) % grid;
        if (dt[m] > 0.0) != (dt[m1] > 0.0) {
            let (a, b) = (ts[m], if m1 == 0 { ts[0] + TAU } else { ts[m1] });
            let c = brent(slope, a, b, "critical point")?.rem_euclid(TAU);
            crit.push(CriticalPoint { t: c, value: value(c) });
        }
    }
    if crit.len() != p {
        return Err(Error::GridTooCoarse(format!("found {} critical points, expected {p}", crit.len())));
    }
    crit.sort_by(|a, b| a.t.total_cmp(&b.t));
    for c in &crit {
        if c.value.abs() < 2.0 - CLOSED_GAP_TOL {
            return Err(Error::Invalid(format!("critical value {} inside (-2, 2) at t = {}", c.value, c.t)));
        }
    }
    let mut gaps = Vec::with_capacity(p);
    for j in 0..p {
        let c = crit[j];
        if c.value.abs() <= 2.0 + CLOSED_GAP_TOL {
            gaps.push(Gap { lower: c.t, upper: c.t, critical: c, open: false });
            continue;
        }
        let level = 2.0 * c.value.signum();
        let prev = crit[(j + p - 1) % p].t;
        let next = crit[(j + 1) % p].t;
        let back = (c.t - prev).rem_euclid(TAU);
        let fwd = (next - c.t).rem_euclid(TAU);
        let (back, fwd) = if p == 1 { (TAU, TAU) } else { (back, fwd) };
        let g = |t: f64| value(t) - level;
        let lower = brent(g, c.t - back, c.t, "lower gap edge")?.rem_euclid(TAU);
        let upper = brent(g, c.t, c.t + fwd, "upper gap edge")?.rem_euclid(TAU);
        gaps.push(Gap { lower, upper, critical: c, open: true });
    }
    let open: Vec<&Gap> = gaps.iter().filter(|g| g.open).collect();
    let bands = if open.is_empty() {
        vec![Arc::full()]
    } else {
        (0..open.len()).map(|i| Arc::from_endpoints(open[i].upper, open[(i + 1) % open.len()].lower)).collect()
    };
    Ok(BandDecomposition { bands, gaps })
}

/// The two roots of M21 F^2 + (M22 - M11) F - M12 = 0.
fn quadratic_roots(m: &Mat2) -> (C64, C64) {
    let a = m.m21;
    let b = m.m22 - m.m11;
    let c = -m.m12;
    let d = (b * b - 4.0 * a * c).sqrt();
    let q = if (b.conj() * d).re >= 0.0 { -0.5 * (b + d) } else { -0.5 * (b - d) };
    let r1 = if q == ZERO { ZERO } else { c / q };
    let r2 = if a == ZERO { C64::new(f64::INFINITY, 0.0) } else { q / a };
    (r1, r2)
}

/// F_+ and F_- at an interior point. F_+ is the root of the fixed-point
/// quadratic with positive real part; F_- is minus the other root.
pub fn caratheodory_pair(ev: &MonodromyEvaluator, z: C64) -> Result<(C64, C64)> {
    if z.norm() >= 1.0 {
        return Err(Error::NotInDisk(z));
    }
    if z == ZERO {
        return Ok((ONE, ONE));
    }
    let (r1, r2) = quadratic_roots(&ev.m_theta(z)?);
    let (fp, other) = if r1.re >= r2.re { (r1, r2) } else { (r2, r1) };
    if !fp.is_finite() {
        return Err(Error::Pole(z));
    }
    Ok((fp, -other))
}

/// Caratheodory function of the spectral measure at z in the disk.
pub fn caratheodory_eval(ev: &MonodromyEvaluator, z: C64) -> Result<C64> {
    Ok(caratheodory_pair(ev, z)?.0)
}

/// Boundary data at e^{it}: discriminant, u, v and the branch R of
/// sqrt(Delta^2 - 4) that continues F_+ = (v + R)/u from inside the disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryValues {
    pub t: f64,
    pub delta: f64,
    pub u: C64,
    pub v: C64,
    pub r: C64,
}

impl BoundaryValues {
    pub fn f_plus(&self) -> C64 {
        (self.v + self.r) / self.u
    }

    pub fn f_minus(&self) -> C64 {
        -(self.v - self.r) / self.u
    }

    pub fn in_band(&self) -> bool {
        self.delta.abs() <= 2.0
    }
}

pub fn boundary_values(ev: &MonodromyEvaluator, t: f64) -> Result<BoundaryValues> {
    let (delta, slope) = ev.discriminant_on_circle(t)?;
    let (u, v) = ev.uv(C64::from_polar(1.0, t))?;
    let r = if delta.abs() <= 2.0 {
        I * slope.signum() * (4.0 - delta * delta).sqrt()
    } else {
        C64::from(delta.signum() * (delta * delta - 4.0).sqrt())
    };
    Ok(BoundaryValues { t, delta, u, v, r })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UvReport {
    pub samples: usize,
    pub max_im_v: f64,
    pub max_re_u: f64,
}

/// Checks that v is real and u purely imaginary on the circle.
pub fn uv_boundary_check(ev: &MonodromyEvaluator, samples: usize) -> Result<UvReport> {
    let mut rep = UvReport { samples, max_im_v: 0.0, max_re_u: 0.0 };
    for t in circle_grid(samples) {
        let (u, v) = ev.uv(C64::from_polar(1.0, t))?;
        rep.max_im_v = rep.max_im_v.max(v.im.abs() / (1.0 + v.norm()));
        rep.max_re_u = rep.max_re_u.max(u.re.abs() / (1.0 + u.norm()));
    }
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GapEdge {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivisorPoint {
    /// Index into `BandDecomposition::gaps`.
    pub gap: usize,
    pub x: f64,
    pub epsilon: i8,
    pub edge: Option<GapEdge>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct Divisor {
    pub points: Vec<DivisorPoint>,
}

/// Finds the zero of u in each open gap and decides whether it is a pole
/// of F_+ (epsilon = +1) or of F_- (epsilon = -1).
pub fn divisor_extract(ev: &MonodromyEvaluator, bd: &BandDecomposition) -> Result<Divisor> {
    let iu = |t: f64| ev.uv(C64::from_polar(1.0, t)).map(|(u, _)| u.im).unwrap_or(f64::NAN);
    let mut points = Vec::new();
    for (gi, gap) in bd.gaps.iter().enumerate().filter(|(_, g)| g.open) {
        let arc = gap.arc();
        const SCAN: usize = 64;
        let ts: Vec<f64> = (0..=SCAN).map(|m| arc.at(m as f64 / SCAN as f64)).collect();
        let vals: Vec<f64> = ts.iter().map(|&t| iu(t)).collect();
        let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let changes: Vec<usize> = (0..SCAN).filter(|&m| (vals[m] > 0.0) != (vals[m + 1] > 0.0)).collect();
        let (x, edge) = match changes.as_slice() {
            [m] => {
                let x = brent(iu, ts[*m], ts[*m + 1], "zero of u")?;
                let edge = if arc.offset(x) < EDGE_SNAP {
                    Some(GapEdge::Lower)
                } else if arc.length - arc.offset(x) < EDGE_SNAP {
                    Some(GapEdge::Upper)
                } else {
                    None
                };
                match edge {
                    Some(GapEdge::Lower) => (gap.lower, edge),
                    Some(GapEdge::Upper) => (gap.upper, edge),
                    None => (x.rem_euclid(TAU), None),
                }
            }
            [] if vals[0].abs() <= 1e-9 * scale => (gap.lower, Some(GapEdge::Lower)),
            [] if vals[SCAN].abs() <= 1e-9 * scale => (gap.upper, Some(GapEdge::Upper)),
            _ => return Err(Error::ZeroCount(format!("gap {gi}: {} sign changes of u, expected one", changes.len()))),
        };
        let epsilon = if edge.is_some() {
            1
        } else {
            let b = boundary_values(ev, x)?;
            let num = b.v + b.r;
            if num.norm() < EPSILON_THRESHOLD * (b.v.norm() + b.r.norm()) {
                -1
            } else {
                1
            }
        };
        points.push(DivisorPoint { gap: gi, x, epsilon, edge });
    }
    Ok(Divisor { points })
}

/// Density of the absolutely continuous part w.r.t. dt/2pi at e^{it}.
pub fn ac_density(ev: &MonodromyEvaluator, t: f64) -> Result<f64> {
    let b = boundary_values(ev, t)?;
    if !b.in_band() {
        return Err(Error::Range(format!("t = {t} is not in a band (Delta = {})", b.delta)));
    }
    let nu = b.f_plus().re;
    if nu < -1e-12 * (1.0 + b.f_plus().norm()) {
        return Err(Error::NegativeSign);
    }
    Ok(nu.max(0.0))
}

/// Weight of the point mass at a divisor point: sqrt|Delta^2 - 4| / |u'|.
/// Points with epsilon = -1 and points sitting on a gap edge carry none.
pub fn point_mass(ev: &MonodromyEvaluator, d: &DivisorPoint) -> Result<f64> {
    if d.epsilon < 0 || d.edge.is_some() {
        return Ok(0.0);
    }
    let (delta, _) = ev.discriminant_on_circle(d.x)?;
    let [_, _, du, _] = ev.uv_on_circle_with_derivative(d.x)?;
    if du.norm() == 0.0 {
        return Err(Error::Multiplicity("u has a double zero".into()));
    }
    Ok((delta * delta - 4.0).abs().sqrt() / du.norm())
}

/// Spectral measure of the half-line operator: ac density on the bands plus
/// point masses at the divisor points with epsilon = +1.
#[derive(Debug, Clone)]
pub struct SpectralMeasure {
    ev: MonodromyEvaluator,
    pub bands: Vec<Arc>,
    pub masses: Vec<(f64, f64)>,
}

impl SpectralMeasure {
    pub fn new(ev: &MonodromyEvaluator, bd: &BandDecomposition, div: &Divisor) -> Result<Self> {
        let mut masses = Vec::new();
        for d in &div.points {
            let w = point_mass(ev, d)?;
            if w > 0.0 {
                masses.push((d.x, w));
            }
        }
        Ok(SpectralMeasure { ev: ev.clone(), bands: bd.bands.clone(), masses })
    }

    pub fn from_evaluator(ev: &MonodromyEvaluator, grid: usize) -> Result<Self> {
        let bd = bands_from_discriminant(ev, grid)?;
        let div = divisor_extract(ev, &bd)?;
        Self::new(ev, &bd, &div)
    }

    pub fn density(&self, t: f64) -> Result<f64> {
        ac_density(&self.ev, t)
    }

    /// Nodes and weights (angle, weight) of the ac part on all bands.
    pub fn ac_rule(&self, order: usize) -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::new();
        for arc in &self.bands {
            for (t, w) in arc_rule(arc, order)? {
                out.push((t, w * self.density(t)?));
            }
        }
        Ok(out)
    }

    pub fn ac_mass(&self, order: usize) -> Result<f64> {
        Ok(self.ac_rule(order)?.iter().map(|p| p.1).sum())
    }

    pub fn point_mass_total(&self) -> f64 {
        self.masses.iter().map(|m| m.1).sum()
    }

    /// Total mass, doubling the quadrature order until it settles.
    pub fn total_mass(&self) -> Result<f64> {
        let mut order = 32;
        let mut prev = self.ac_mass(order)?;
        while order < 4096 {
            order *= 2;
            let cur = self.ac_mass(order)?;
            if (cur - prev).abs() < 1e-13 {
                return Ok(cur + self.point_mass_total());
            }
            prev = cur;
        }
        Err(Error::NonConvergence("ac mass quadrature".into()))
    }
}

/// Lyapunov exponent (1/p) log|B Psi| with Psi the larger root of
/// Psi + 1/Psi = Delta.
pub fn lyapunov_eval(ev: &MonodromyEvaluator, z: C64) -> Result<f64> {
    let b = ev.b(z)?;
    if b.norm() < 1e-300 {
        return Err(Error::Pole(z));
    }
    let d = ev.discriminant(z)?;
    let r = (d * d - 4.0).sqrt();
    let psi = ((d + r) * 0.5).norm().max(((d - r) * 0.5).norm());
    Ok((b.norm().ln() + psi.ln()) / ev.period() as f64)
}

/// Polynomials a, b, c with a F^2 + b F + c = 0, obtained by clearing the
/// Blaschke denominators of M_theta.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticIrrationality {
    pub a: Poly,
    pub b: Poly,
    pub c: Poly,
}

impl QuadraticIrrationality {
    pub fn residual(&self, f: C64, z: C64) -> C64 {
        self.a.eval(z) * f * f + self.b.eval(z) * f + self.c.eval(z)
    }

    pub fn max_degree(&self) -> usize {
        self.a.degree().max(self.b.degree()).max(self.c.degree())
    }
}

pub fn quadratic_irrationality(ev: &MonodromyEvaluator) -> QuadraticIrrationality {
    let y0 = Mat2::new(ONE, ONE, -ONE, ONE);
    let y0_inv = Mat2::new(ONE, -ONE, ONE, ONE).scale(C64::from(0.5));
    let rot = rotation(ev.theta());
    let mut m = PolyMat2::constant(&y0);
    for (k, &w) in ev.orf_poles().iter().enumerate() {
        let d = PolyMat2::diag(Poly::linear(-w, ONE), Poly::linear(ONE, -w.conj()));
        m = m.mul(&d).mul(&PolyMat2::constant(&u_raw(ev.seq().a(k as i64))));
    }
    let m = m.mul(&PolyMat2::constant(&(y0_inv * rot)));
    let [[m11, m12], [m21, m22]] = m.0;
    QuadraticIrrationality { a: m21, b: m22.add(&m11.scale(-ONE)), c: m12.scale(-ONE) }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhReport {
    pub band_samples: usize,
    pub gap_samples: usize,
    pub max_band_residual: f64,
    pub min_gap_margin: f64,
}

/// Schur functions of the two half-lines from boundary data:
/// F_+ = (1 + z f_+)/(1 - z f_+) and F_- = (1 + f_-)/(1 - f_-).
fn schur_pair(b: &BoundaryValues) -> (C64, C64) {
    let z = C64::from_polar(1.0, b.t);
    let fp = schur_from_caratheodory(z, b.f_plus());
    let fm = b.f_minus();
    (fp, (fm - ONE) / (fm + ONE))
}

/// Checks f_-(e^{it}) = conj(e^{it} f_+(e^{it})) on bands and
/// 1 - e^{it} f_+ f_- != 0 on gaps.
pub fn riemann_hilbert_check(ev: &MonodromyEvaluator, bd: &BandDecomposition, samples: usize) -> Result<RhReport> {
    let mut rep = RhReport { band_samples: 0, gap_samples: 0, max_band_residual: 0.0, min_gap_margin: f64::INFINITY };
    let per_band = samples.div_ceil(bd.bands.len().max(1));
    for arc in &bd.bands {
        for t in arc_samples(arc, per_band, 0.01) {
            let b = boundary_values(ev, t)?;
            let (fp, fm) = schur_pair(&b);
            let z = C64::from_polar(1.0, t);
            rep.max_band_residual = rep.max_band_residual.max((fm - (z * fp).conj()).norm());
            rep.band_samples += 1;
        }
    }
    let open: Vec<&Gap> = bd.open_gaps().collect();
    let per_gap = samples.div_ceil(open.len().max(1));
    for g in open {
        for t in arc_samples(&g.arc(), per_gap, 0.01) {
            let b = boundary_values(ev, t)?;
            if b.u.norm() < 1e-8 {
                continue;
            }
            let (fp, fm) = schur_pair(&b);
            let z = C64::from_polar(1.0, t);
            rep.min_gap_margin = rep.min_gap_margin.min((ONE - z * fp * fm).norm());
            rep.gap_samples += 1;
        }
    }
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrippingReport {
    pub points: usize,
    /// Max residual per stripping depth (in periods), starting at depth 1.
    pub max_residual: Vec<f64>,
    pub f0: C64,
    pub min_re_f: f64,
}

/// [[cos a, i sin a], [i sin a, cos a]].
fn rotation(a: f64) -> Mat2 {
    let (s, c) = a.sin_cos();
    Mat2::new(C64::from(c), I * s, I * s, C64::from(c))
}

/// Coefficient-stripping fixed point: F = (M_theta^k R^{-k}) . F^{(k)}, where F^{(k)} is
/// the Caratheodory function of the sequence rotated by e^{-2ik theta},
/// on a polar grid of `side x side` points.
pub fn stripping_check(ev: &MonodromyEvaluator, side: usize, depth: usize) -> Result<StrippingReport> {
    let mut rep = StrippingReport {
        points: 0,
        max_residual: vec![0.0; depth],
        f0: caratheodory_eval(ev, ZERO)?,
        min_re_f: f64::INFINITY,
    };
    for i in 0..side {
        let r = 0.05 + 0.9 * i as f64 / (side.max(2) - 1) as f64;
        for j in 0..side {
            let z = C64::from_polar(r, TAU * (j as f64 + 0.25) / side as f64);
            let f = caratheodory_eval(ev, z)?;
            rep.min_re_f = rep.min_re_f.min(f.re);
            let schur = schur_from_caratheodory(z, f);
            let mt = ev.m_theta(z)?;
            let mut mk = Mat2::identity();
            for k in 1..=depth {
                mk = mk * mt;
                let rot = C64::from_polar(1.0, -2.0 * k as f64 * ev.theta());
                let fk = caratheodory_from_schur(z, rot * schur);
                let back = coefficient_stripping(fk, &(mk * rotation(-(k as f64) * ev.theta())))?;
                let res = (back - f).norm() / (1.0 + f.norm());
                rep.max_residual[k - 1] = rep.max_residual[k - 1].max(res);
            }
            rep.points += 1;
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmv::VerblunskySequence;
    use crate::mcmv::PoleVector;
    use crate::random::instance_seeded;
    use crate::transfer::bernstein_szego_caratheodory;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn free(n: usize) -> MonodromyEvaluator {
        let seq = VerblunskySequence::from_values(&vec![ZERO; 2 * n], 0.0).unwrap();
        MonodromyEvaluator::new(&seq, &PoleVector::zeros(n)).unwrap()
    }

    fn one_gap() -> MonodromyEvaluator {
        let a = C64::from(FRAC_1_SQRT_2);
        let seq = VerblunskySequence::from_values(&[a, a], 0.0).unwrap();
        MonodromyEvaluator::new(&seq, &PoleVector::zeros(1)).unwrap()
    }

    /// Random instance with at least one open gap.
    fn gapped(n: usize, seed: u64) -> (MonodromyEvaluator, BandDecomposition) {
        for s in seed.. {
            let (seq, z) = instance_seeded(n, s);
            let ev = MonodromyEvaluator::new(&seq, &z).unwrap();
            let bd = bands_from_discriminant(&ev, 512).unwrap();
            if bd.open_gaps().count() > 0 {
                return (ev, bd);
            }
        }
        unreachable!()
    }

    #[test]
    fn free_case_bands_and_measure() {
        let ev = free(1);
        let bd = bands_from_discriminant(&ev, 64).unwrap();
        assert_eq!(bd.bands, vec![Arc::full()]);
        assert_eq!(bd.open_gaps().count(), 0);
        assert_eq!(bd.genus(), None);
        assert!(divisor_extract(&ev, &bd).unwrap().points.is_empty());
        for t in [0.1, 1.0, 4.0] {
            assert!((ac_density(&ev, t).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!((caratheodory_eval(&ev, C64::new(0.3, 0.5)).unwrap() - ONE).norm() < 1e-14);
        assert!(bands_from_discriminant(&ev, 3).is_err());
    }

    #[test]
    fn one_gap_bands() {
        let ev = one_gap();
        let bd = bands_from_discriminant(&ev, 64).unwrap();
        assert_eq!(bd.open_gaps().count(), 1);
        assert_eq!(bd.genus(), Some(0));
        let g = bd.open_gaps().next().unwrap();
        assert!((g.lower - (TAU - FRAC_PI_2)).abs() < 1e-12, "{g:?}");
        assert!((g.upper - FRAC_PI_2).abs() < 1e-12);
        assert!(g.critical.t.abs() < 1e-12 || (g.critical.t - TAU).abs() < 1e-12);
        assert!((g.critical.value - 6.0).abs() < 1e-12);
        assert_eq!(bd.bands.len(), 1);
        assert!((bd.bands[0].start - FRAC_PI_2).abs() < 1e-12 && (bd.bands[0].length - PI).abs() < 1e-12);
        let closed: Vec<_> = bd.gaps.iter().filter(|g| !g.open).collect();
        assert_eq!(closed.len(), 1);
        assert!((closed[0].critical.value + 2.0).abs() < 1e-9);
    }

    #[test]
    fn edges_and_spectrum_consistency() {
        for seed in [1, 5, 9] {
            let (ev, bd) = gapped(2 + seed as usize % 2, seed);
            for g in bd.open_gaps() {
                for e in [g.lower, g.upper] {
                    assert!((ev.discriminant_on_circle(e).unwrap().0.abs() - 2.0).abs() < 1e-10);
                }
                for t in arc_samples(&g.arc(), 10, 0.01) {
                    assert!(ev.discriminant_on_circle(t).unwrap().0.abs() > 2.0);
                }
            }
            for arc in &bd.bands {
                for t in arc_samples(arc, 20, 0.001) {
                    assert!(ev.discriminant_on_circle(t).unwrap().0.abs() <= 2.0);
                }
            }
        }
    }

    #[test]
    fn caratheodory_matches_bernstein_szego_and_quadratic() {
        let (seq, z) = instance_seeded(2, 3);
        let ev = MonodromyEvaluator::new(&seq, &z).unwrap();
        let poles = ev.orf_poles().to_vec();
        let q = quadratic_irrationality(&ev);
        assert!(q.max_degree() <= 2 * ev.n() + 2 * (ev.n() - 1));
        for pt in [C64::new(0.3, 0.1), C64::new(-0.5, 0.4), C64::new(0.0, 0.05)] {
            let f = caratheodory_eval(&ev, pt).unwrap();
            let bs = bernstein_szego_caratheodory(&seq, &poles, 400, pt).unwrap();
            assert!((f - bs).norm() < 1e-10, "{f} vs {bs}");
            assert!(f.re > 0.0);
            assert!(q.residual(f, pt).norm() < 1e-9 * (1.0 + q.a.eval(pt).norm()));
        }
        assert_eq!(caratheodory_eval(&ev, ZERO).unwrap(), ONE);
    }

    #[test]
    fn boundary_branch_matches_interior_limit() {
        let (ev, bd) = gapped(2, 11);
        for t in circle_grid(40) {
            let b = boundary_values(&ev, t).unwrap();
            if b.u.norm() < 1e-3 || (b.delta.abs() - 2.0).abs() < 1e-2 {
                continue;
            }
            let inner = caratheodory_eval(&ev, C64::from_polar(1.0 - 1e-7, t)).unwrap();
            assert!((inner - b.f_plus()).norm() < 1e-4 * (1.0 + inner.norm()), "t={t}");
            assert_eq!(bd.in_band(t), b.in_band());
        }
    }

    #[test]
    fn uv_on_circle() {
        let (seq, z) = instance_seeded(3, 2);
        let ev = MonodromyEvaluator::new(&seq, &z).unwrap();
        let rep = uv_boundary_check(&ev, 200).unwrap();
        assert!(rep.max_im_v < 1e-10 && rep.max_re_u < 1e-10, "{rep:?}");
        // The identity is structural: it survives perturbing one coefficient.
        let mut vals: Vec<C64> = seq.block().iter().map(|d| d.value()).collect();
        vals[1] += C64::new(0.05, -0.03);
        let pert = VerblunskySequence::from_values(&vals, seq.theta()).unwrap();
        let rep = uv_boundary_check(&MonodromyEvaluator::new(&pert, &z).unwrap(), 200).unwrap();
        assert!(rep.max_im_v < 1e-10 && rep.max_re_u < 1e-10);
        let rep = uv_boundary_check(&free(2), 50).unwrap();
        assert!(rep.max_im_v < 1e-14 && rep.max_re_u < 1e-14);
    }

    #[test]
    fn divisor_and_mass_balance() {
        for seed in [0, 4, 7] {
            let (ev, bd) = gapped(2 + seed as usize % 2, seed);
            let div = divisor_extract(&ev, &bd).unwrap();
            assert_eq!(div.points.len(), bd.open_gaps().count());
            for d in &div.points {
                let b = boundary_values(&ev, d.x).unwrap();
                assert!(b.u.norm() < 1e-10);
                let near = boundary_values(&ev, d.x + 1e-6).unwrap();
                if d.epsilon > 0 {
                    assert!(near.f_plus().norm() > 1e3 && near.f_minus().norm() < 1e3);
                } else {
                    assert!(near.f_minus().norm() > 1e3 && near.f_plus().norm() < 1e3);
                    assert_eq!(point_mass(&ev, d).unwrap(), 0.0);
                }
            }
            let mu = SpectralMeasure::new(&ev, &bd, &div).unwrap();
            let total = mu.total_mass().unwrap();
            assert!((total - 1.0).abs() < 1e-8, "seed {seed}: total {total}");
            for (t, _) in mu.ac_rule(100).unwrap() {
                assert!(mu.density(t).unwrap() >= 0.0);
            }
        }
    }

    #[test]
    fn lyapunov_properties() {
        let (ev, bd) = gapped(2, 21);
        for arc in &bd.bands {
            for t in arc_samples(arc, 5, 0.05) {
                assert!(lyapunov_eval(&ev, C64::from_polar(1.0, t)).unwrap().abs() < 1e-10);
            }
        }
        let g = bd.open_gaps().next().unwrap();
        assert!(lyapunov_eval(&ev, C64::from_polar(1.0, g.critical.t)).unwrap() > 0.0);
        let z = C64::new(0.2, -0.3);
        let l = lyapunov_eval(&ev, z).unwrap();
        assert!(l > 0.0);
        // Growth ratio of W_theta^k between k = 63 and k = 64.
        let w = ev.w_theta(z).unwrap();
        let mut pw = Mat2::identity();
        let mut log_norm = Vec::new();
        let mut log_scale = 0.0;
        for _ in 0..64 {
            pw = pw * w;
            let s = pw.max_abs();
            log_scale += s.ln();
            pw = pw.scale(C64::from(1.0 / s));
            log_norm.push(log_scale + pw.norm().ln());
        }
        let approx = (log_norm[63] - log_norm[62]) / ev.period() as f64;
        assert!((approx - l).abs() < 1e-4, "{approx} vs {l}");
    }

    #[test]
    fn riemann_hilbert_conditions() {
        let (ev, bd) = gapped(2, 13);
        let rep = riemann_hilbert_check(&ev, &bd, 50).unwrap();
        assert!(rep.max_band_residual < 1e-8, "{rep:?}");
        assert!(rep.min_gap_margin > 1e-6, "{rep:?}");
        let ev = free(1);
        let bd = bands_from_discriminant(&ev, 32).unwrap();
        let rep = riemann_hilbert_check(&ev, &bd, 20).unwrap();
        assert!(rep.max_band_residual < 1e-14);
    }

    #[test]
    fn stripping_fixed_point() {
        let (seq, z) = instance_seeded(2, 6);
        let ev = MonodromyEvaluator::new(&seq, &z).unwrap();
        let rep = stripping_check(&ev, 10, 2).unwrap();
        assert_eq!(rep.f0, ONE);
        assert!(rep.min_re_f > 0.0);
        assert!(rep.max_residual.iter().all(|&r| r < 1e-10), "{rep:?}");
    }
}
