//! Brute-force cross-checks that share no code path with the recurrences:
//! quadrature against a measure, Gram-Schmidt orthonormalization of
//! Blaschke products, dense eigenvalues of small unitary matrices, and
//! periodic closures of the operator.

use nalgebra::DMatrix;

use crate::cmv::{BandedWindow, VerblunskySequence};
use crate::error::{Error, Result};
use crate::mcmv::{mcmv_window, PoleVector};
use crate::numerics::{aberth, arc_rule, Arc};
use crate::scalar::{blaschke, eta, C64, ONE, ZERO};
use crate::spectral::SpectralMeasure;
use crate::transfer::MonodromyEvaluator;

/// Relative change at which quadrature doubling stops.
pub const QUAD_TOL: f64 = 1e-10;
const MAX_ORDER: usize = 1 << 15;

type Density<'a> = Box<dyn Fn(f64) -> Result<f64> + 'a>;

/// A probability measure on the circle given by an ac density on arcs plus
/// point masses, integrated by per-arc edge-adapted rules.
pub struct QuadratureMeasure<'a> {
    bands: Vec<Arc>,
    density: Density<'a>,
    masses: Vec<(f64, f64)>,
    order: usize,
    nodes: Vec<(f64, f64)>,
}

impl std::fmt::Debug for QuadratureMeasure<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QuadratureMeasure")
            .field("bands", &self.bands)
            .field("masses", &self.masses)
            .field("order", &self.order)
            .finish()
    }
}

impl<'a> QuadratureMeasure<'a> {
    /// Calibrates the base order on the total mass, which must be 1.
    pub fn new(bands: Vec<Arc>, density: Density<'a>, masses: Vec<(f64, f64)>) -> Result<Self> {
        if masses.iter().any(|m| m.1.is_nan() || m.1 < 0.0) {
            return Err(Error::Invalid("negative point mass".into()));
        }
        let mut m = QuadratureMeasure { bands, density, masses, order: 16, nodes: Vec::new() };
        m.nodes = m.rule(m.order)?;
        let mut prev: f64 = m.nodes.iter().map(|p| p.1).sum();
        loop {
            let finer = m.rule(2 * m.order)?;
            let cur: f64 = finer.iter().map(|p| p.1).sum();
            m.order *= 2;
            m.nodes = finer;
            if (cur - prev).abs() < 1e-13 {
                break;
            }
            if m.order >= MAX_ORDER {
                return Err(Error::NonConvergence("total mass quadrature".into()));
            }
            prev = cur;
        }
        let total: f64 = m.nodes.iter().map(|p| p.1).sum();
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::Invalid(format!("measure has total mass {total}, expected 1")));
        }
        Ok(m)
    }

    pub fn lebesgue() -> Self {
        Self::new(vec![Arc::full()], Box::new(|_| Ok(1.0)), Vec::new()).expect("Lebesgue measure")
    }

    pub fn from_spectral(m: &'a SpectralMeasure) -> Result<Self> {
        Self::new(m.bands.clone(), Box::new(move |t| m.density(t)), m.masses.clone())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Nodes (angle, weight) of the rule at the given per-arc order.
    pub fn rule(&self, order: usize) -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::new();
        for arc in &self.bands {
            for (t, w) in arc_rule(arc, order)? {
                let d = (self.density)(t)?;
                if d < 0.0 {
                    return Err(Error::Invalid(format!("negative density {d} at {t}")));
                }
                out.push((t, w * d));
            }
        }
        out.extend(self.masses.iter().copied());
        Ok(out)
    }

    /// All pairwise inner products of a family, doubling the order until
    /// the largest entry change drops below QUAD_TOL relative to the
    /// diagonal scale.
    pub fn gram(&self, fs: &[&dyn Fn(C64) -> C64]) -> Result<DMatrix<C64>> {
        let build = |nodes: &[(f64, f64)]| {
            let vals: Vec<Vec<C64>> =
                fs.iter().map(|f| nodes.iter().map(|&(t, _)| f(C64::from_polar(1.0, t))).collect()).collect();
            DMatrix::from_fn(fs.len(), fs.len(), |i, j| {
                nodes.iter().enumerate().map(|(q, &(_, w))| vals[i][q] * vals[j][q].conj() * w).sum::<C64>()
            })
        };
        let mut order = self.order;
        let mut prev = build(&self.nodes);
        while order < MAX_ORDER {
            order *= 2;
            let cur = build(&self.rule(order)?);
            let scale = (0..fs.len()).map(|i| cur[(i, i)].norm()).fold(0.0, f64::max).max(1e-300);
            let change = (&cur - &prev).iter().map(|c| c.norm()).fold(0.0, f64::max);
            if change <= QUAD_TOL * scale {
                return Ok(cur);
            }
            prev = cur;
        }
        Err(Error::NonConvergence("Gram matrix quadrature".into()))
    }

    /// <f, g> = integral of f conj(g) dnu.
    pub fn inner_product(&self, f: &dyn Fn(C64) -> C64, g: &dyn Fn(C64) -> C64) -> Result<C64> {
        Ok(self.gram(&[f, g])?[(0, 1)])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum FamilyKind {
    /// B_0, B_1, B_2, ...
    Nested,
    /// B_0, B_1^*, B_1, B_2^*, B_2, ...
    Alternating,
}

/// Blaschke products B_m = prod_{j=1..m} b_{w_j} over a periodically
/// extended pole pattern w_0, w_1, ..., w_{p-1}.
#[derive(Debug, Clone, PartialEq)]
pub struct BlaschkeFamily {
    poles: Vec<C64>,
    kind: FamilyKind,
}

impl BlaschkeFamily {
    pub fn new(poles: Vec<C64>, kind: FamilyKind) -> Result<Self> {
        if poles.is_empty() || poles.iter().any(|w| w.norm() >= 1.0) {
            return Err(Error::Invalid("pole pattern must be nonempty and inside the disk".into()));
        }
        Ok(BlaschkeFamily { poles, kind })
    }

    pub fn pole(&self, j: usize) -> C64 {
        self.poles[j % self.poles.len()]
    }

    /// prod_{j=from+1..=to} b_{w_j}(z).
    pub fn partial_product(&self, from: usize, to: usize, z: C64) -> C64 {
        (from + 1..=to).fold(ONE, |acc, j| acc * blaschke(self.pole(j), z).unwrap_or(C64::new(f64::NAN, f64::NAN)))
    }

    /// Member `index` evaluated on the unit circle.
    pub fn eval(&self, index: usize, z: C64) -> C64 {
        match self.kind {
            FamilyKind::Nested => self.partial_product(0, index, z),
            FamilyKind::Alternating => {
                let m = index.div_ceil(2);
                let b = self.partial_product(0, m, z);
                if index % 2 == 1 {
                    b.conj()
                } else {
                    b
                }
            }
        }
    }
}

/// Orthonormal functions as lower-triangular combinations of a family.
#[derive(Debug, Clone)]
pub struct OrthonormalFamily {
    pub family: BlaschkeFamily,
    /// Row k holds the coefficients of phi_k on members 0..=k.
    pub coeffs: Vec<Vec<C64>>,
}

impl OrthonormalFamily {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, k: usize, z: C64) -> C64 {
        self.coeffs[k].iter().enumerate().map(|(m, c)| c * self.family.eval(m, z)).sum()
    }

    /// phi_k^*(z) = B_k(z) conj(phi_k(1/conj z)) for a nested family; valid
    /// off the circle.
    pub fn eval_star(&self, k: usize, z: C64) -> C64 {
        self.coeffs[k].iter().enumerate().map(|(m, c)| c.conj() * self.family.partial_product(m, k, z)).sum()
    }
}

/// Gram-Schmidt (twice, in coefficient space) of the first `count` family
/// members. The coefficient of the newest member is positive.
pub fn gram_schmidt_orf(m: &QuadratureMeasure, family: &BlaschkeFamily, count: usize) -> Result<OrthonormalFamily> {
    let fs: Vec<Box<dyn Fn(C64) -> C64 + '_>> =
        (0..count).map(|k| Box::new(move |z| family.eval(k, z)) as Box<dyn Fn(C64) -> C64>).collect();
    let refs: Vec<&dyn Fn(C64) -> C64> = fs.iter().map(|b| b.as_ref()).collect();
    let g = m.gram(&refs)?;
    let ip = |c: &[C64], d: &[C64]| -> C64 {
        let mut s = ZERO;
        for (i, ci) in c.iter().enumerate() {
            for (j, dj) in d.iter().enumerate() {
                s += ci * g[(i, j)] * dj.conj();
            }
        }
        s
    };
    let mut coeffs: Vec<Vec<C64>> = Vec::with_capacity(count);
    for k in 0..count {
        let mut v = vec![ZERO; k + 1];
        v[k] = ONE;
        for _ in 0..2 {
            for c in &coeffs {
                let proj = ip(&v, c);
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= proj * ci;
                }
            }
        }
        let norm2 = ip(&v, &v).re;
        if norm2.is_nan() || norm2 <= 1e-13 * g[(k, k)].re {
            return Err(Error::RankDeficient(k));
        }
        let s = norm2.sqrt();
        let phase = v[k].norm() / v[k];
        v.iter_mut().for_each(|c| *c *= phase / s);
        coeffs.push(v);
    }
    Ok(OrthonormalFamily { family: family.clone(), coeffs })
}

/// Recovers a_0..a_{count-1} from a measure alone: orthonormalize the nested
/// family on the ORF pole pattern, fix each phase so that
/// arg phi_{k+1}^*(w_k) = arg(c_k(w_k) phi_k^*(w_k)), and read off
/// a_k = -conj(phi_{k+1}(w_k)/phi_{k+1}^*(w_k)).
pub fn recover_coefficients(m: &QuadratureMeasure, orf_poles: &[C64], count: usize) -> Result<Vec<C64>> {
    let family = BlaschkeFamily::new(orf_poles.to_vec(), FamilyKind::Nested)?;
    let mut orf = gram_schmidt_orf(m, &family, count + 1)?;
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let (wk, wk1) = (family.pole(k), family.pole(k + 1));
        let ck = (ONE - wk.conj() * wk) / (ONE - wk1.conj() * wk) * (eta(wk1) / eta(wk));
        let target = (ck * orf.eval_star(k, wk)).arg();
        let cur = orf.eval_star(k + 1, wk).arg();
        // scaling phi by e^{i alpha} scales phi^* by e^{-i alpha}
        let rot = C64::from_polar(1.0, cur - target);
        orf.coeffs[k + 1].iter_mut().for_each(|c| *c *= rot);
        let phi = orf.eval_interior(k + 1, wk);
        let star = orf.eval_star(k + 1, wk);
        if star.norm() < 1e-300 {
            return Err(Error::DegenerateDenominator);
        }
        out.push(-(phi / star).conj());
    }
    Ok(out)
}

impl OrthonormalFamily {
    /// phi_k at an interior point (nested family).
    pub fn eval_interior(&self, k: usize, z: C64) -> C64 {
        self.coeffs[k].iter().enumerate().map(|(m, c)| c * self.family.partial_product(0, m, z)).sum()
    }
}

/// Largest entry of U^* U - I.
fn unitarity_defect(u: &DMatrix<C64>) -> f64 {
    let p = u.adjoint() * u;
    p.iter()
        .enumerate()
        .map(|(k, c)| {
            let (i, j) = (k % u.nrows(), k / u.nrows());
            (c - if i == j { ONE } else { ZERO }).norm()
        })
        .fold(0.0, f64::max)
}

/// det(H - lambda) / det'(H - lambda) for an unreduced upper Hessenberg
/// block via Hyman's recursion, returned as the Newton step p/p'.
fn hyman_step(h: &DMatrix<C64>, lambda: C64) -> C64 {
    let m = h.nrows();
    let mut x = vec![ZERO; m];
    let mut dx = vec![ZERO; m];
    x[m - 1] = ONE;
    for i in (1..m).rev() {
        let mut s = ZERO;
        let mut ds = -x[i];
        for j in i..m {
            let e = if i == j { h[(i, j)] - lambda } else { h[(i, j)] };
            s += e * x[j];
            ds += e * dx[j];
        }
        x[i - 1] = -s / h[(i, i - 1)];
        dx[i - 1] = -ds / h[(i, i - 1)];
        let big = x[i - 1].norm().max(dx[i - 1].norm());
        if big > 1e150 {
            x.iter_mut().chain(dx.iter_mut()).for_each(|v| *v *= 1e-150);
        }
    }
    let mut r = ZERO;
    let mut dr = -x[0];
    for j in 0..m {
        let e = if j == 0 { h[(0, 0)] - lambda } else { h[(0, j)] };
        r += e * x[j];
        dr += e * dx[j];
    }
    r / dr
}

/// Eigenvalues of a small unitary matrix: Hessenberg reduction, deflation
/// at negligible subdiagonals, and Aberth-Ehrlich on each unreduced block
/// with the characteristic polynomial evaluated by Hyman's recursion.
pub fn dense_unitary_eigs(window: &BandedWindow) -> Result<Vec<C64>> {
    let u = &window.data;
    if u.nrows() != u.ncols() || u.nrows() == 0 || u.nrows() > 64 {
        return Err(Error::DimensionMismatch(format!(
            "need a square matrix of size 1..=64, got {}x{}",
            u.nrows(),
            u.ncols()
        )));
    }
    let defect = unitarity_defect(u);
    if defect > 1e-10 {
        return Err(Error::Invalid(format!("matrix is not unitary (defect {defect:e})")));
    }
    let h = u.clone().hessenberg().h();
    let n = h.nrows();
    let mut out = Vec::with_capacity(n);
    let mut start = 0;
    for k in 0..n {
        let split = k + 1 == n || h[(k + 1, k)].norm() <= 1e-14;
        if !split {
            continue;
        }
        let block = h.view((start, start), (k + 1 - start, k + 1 - start)).into_owned();
        if block.nrows() == 1 {
            out.push(block[(0, 0)]);
        } else {
            out.extend(aberth(block.nrows(), 1.0, |z| hyman_step(&block, z), 1e-15, 500)?);
        }
        start = k + 1;
    }
    if let Some(bad) = out.iter().find(|l| (l.norm() - 1.0).abs() > 1e-8) {
        return Err(Error::NonConvergence(format!("eigenvalue {bad} is off the unit circle")));
    }
    Ok(out)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct FloquetReport {
    pub size: usize,
    pub periods: usize,
    pub eigenvalues: Vec<C64>,
    /// max over eigenvalues of the distance of Delta(lambda) from [-2, 2].
    pub max_violation: f64,
    pub pass: bool,
}

/// The K-period closure of A: entries A_{ij}, i in 0..N, folded modulo
/// N = 2nK.
pub fn periodic_closure(seq: &VerblunskySequence, z: &PoleVector, periods: usize) -> Result<BandedWindow> {
    let n = z.n();
    let size = 2 * n * periods;
    let pad = 4 * n as i64;
    let a = mcmv_window(seq, z, -pad..size as i64 + pad)?;
    let bw = a.bandwidth;
    if size <= 2 * bw {
        return Err(Error::ClosureOverlap(format!("size {size} does not exceed twice the bandwidth {bw}")));
    }
    let mut c = BandedWindow::zeros(0..size as i64, 0..size as i64, size)?;
    for i in 0..size as i64 {
        for j in i - bw as i64..=i + bw as i64 {
            if !(a.trusted_rows.contains(&i) && a.trusted_cols.contains(&j)) {
                return Err(Error::ClosureOverlap(format!("entry ({i}, {j}) is outside the exact window")));
            }
            let (r, s) = (i, j.rem_euclid(size as i64));
            let v = c.at(r, s) + a.at(i, j);
            c.set(r, s, v);
        }
    }
    Ok(c)
}

/// Eigenvalues of the K-period closure all lie in Delta^{-1}([-2, 2]).
pub fn floquet_crosscheck(seq: &VerblunskySequence, z: &PoleVector, periods: usize, tol: f64) -> Result<FloquetReport> {
    let c = periodic_closure(seq, z, periods)?;
    let eigs = dense_unitary_eigs(&c)?;
    let ev = MonodromyEvaluator::new(seq, z)?;
    let mut worst: f64 = 0.0;
    for &l in &eigs {
        let d = ev.discriminant(l)?;
        worst = worst.max(d.im.abs()).max(d.re.abs() - 2.0);
    }
    Ok(FloquetReport { size: c.rows(), periods, eigenvalues: eigs, max_violation: worst, pass: worst <= tol })
}
