//! MCMV matrices: operator Moebius transforms of CMV windows conjugated by
//! the phase diagonal, their Blaschke shifts, block structure and the
//! closed-form corner entries.

use crate::cmv::{cmv_window, BandedWindow, VerblunskySequence};
use crate::error::{Error, Result};
use crate::scalar::{blaschke, u_raw, DiskPoint, Mat2, C64, ONE, ZERO};
use nalgebra::DMatrix;
use serde::Serialize;
use std::ops::Range;

/// Tolerance used to decide that two poles coincide.
pub const POLE_COLLISION_TOL: f64 = 1e-10;

/// The pole data z_0 = 0, z_1, ..., z_{n-1}.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleVector {
    points: Vec<DiskPoint>,
}

impl PoleVector {
    /// Default configuration: z_0 = 0 and the remaining entries distinct and
    /// nonzero.
    pub fn new(points: Vec<DiskPoint>) -> Result<Self> {
        let pv = Self::with_repeats(points)?;
        for (j, zj) in pv.points.iter().enumerate().skip(1) {
            if zj.value().norm() <= POLE_COLLISION_TOL {
                return Err(Error::Multiplicity(format!("z_{j} coincides with z_0 = 0")));
            }
            for (k, zk) in pv.points.iter().enumerate().skip(j + 1) {
                if (zj.value() - zk.value()).norm() <= POLE_COLLISION_TOL {
                    return Err(Error::Multiplicity(format!("z_{j} and z_{k} coincide")));
                }
            }
        }
        Ok(pv)
    }

    /// Allows repeated entries; only z_0 = 0 is enforced.
    pub fn with_repeats(points: Vec<DiskPoint>) -> Result<Self> {
        match points.first() {
            None => Err(Error::DimensionMismatch("pole vector must be nonempty".into())),
            Some(z0) if z0.value() != ZERO => Err(Error::Invalid("the first pole z_0 must be exactly 0".into())),
            _ => Ok(PoleVector { points }),
        }
    }

    pub fn from_values(values: &[C64]) -> Result<Self> {
        Self::new(values.iter().map(|&z| DiskPoint::new(z)).collect::<Result<_>>()?)
    }

    /// The all-zero vector of length n.
    pub fn zeros(n: usize) -> Self {
        PoleVector { points: vec![DiskPoint::zero(); n.max(1)] }
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn z(&self, j: usize) -> C64 {
        self.points[j].value()
    }

    pub fn points(&self) -> &[DiskPoint] {
        &self.points
    }

    pub fn values(&self) -> Vec<C64> {
        self.points.iter().map(|p| p.value()).collect()
    }

    /// The pole list of one period of the diagonal D_0 (and of the
    /// orthogonal rational functions): 0, z_1, z_1, ..., z_{n-1}, z_{n-1}, 0.
    pub fn orf_poles(&self) -> Vec<C64> {
        let n = self.n();
        let mut w = Vec::with_capacity(2 * n);
        w.push(ZERO);
        for m in 1..n {
            w.push(self.z(m));
            w.push(self.z(m));
        }
        w.push(ZERO);
        w
    }

    /// Entry k of the periodic diagonal D_0.
    pub fn d0(&self, k: i64) -> C64 {
        let n = self.n() as i64;
        let r = k.rem_euclid(2 * n);
        if r == 0 || r == 2 * n - 1 {
            ZERO
        } else {
            self.z(((r + 1) / 2) as usize)
        }
    }

    /// Distinct pole values with multiplicities, in order of first appearance.
    pub fn distinct(&self) -> Vec<(C64, usize)> {
        let mut out: Vec<(C64, usize)> = Vec::new();
        for p in &self.points {
            match out.iter_mut().find(|(z, _)| (*z - p.value()).norm() <= POLE_COLLISION_TOL) {
                Some(e) => e.1 += 1,
                None => out.push((p.value(), 1)),
            }
        }
        out
    }

    pub fn has_repeats(&self) -> bool {
        self.distinct().len() != self.n()
    }

    /// B(z) = z * prod_{j>=1} b_{z_j}(z).
    pub fn b_product(&self, z: C64) -> Result<C64> {
        let mut b = z;
        for j in 1..self.n() {
            b *= blaschke(self.z(j), z)?;
        }
        Ok(b)
    }
}

/// The periodic diagonal D_0, optionally Blaschke-shifted by a point s:
/// D_s = (1 - s D_0^*)^{-1}(D_0 - s).
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalSpec {
    pub base: PoleVector,
    pub shift: C64,
}

impl DiagonalSpec {
    pub fn new(base: PoleVector) -> Self {
        DiagonalSpec { base, shift: ZERO }
    }

    pub fn shifted(base: PoleVector, shift: DiskPoint) -> Self {
        DiagonalSpec { base, shift: shift.value() }
    }

    pub fn entry(&self, k: i64) -> C64 {
        let d = self.base.d0(k);
        (d - self.shift) / (ONE - self.shift * d.conj())
    }

    /// Unimodular factor V = sqrt((1 - conj(s) D_0)^{-1}(1 - s D_0^*)).
    pub fn v_entry(&self, k: i64) -> C64 {
        let x = ONE - self.shift * self.base.d0(k).conj();
        x / x.norm()
    }
}

/// Lambda(theta)_i: exp(i k theta) on even and exp(-i k theta) on odd
/// positions of period cell k.
pub fn lambda_entry(i: i64, n: usize, theta: f64) -> C64 {
    let k = i.div_euclid(2 * n as i64) as f64;
    if i.rem_euclid(2) == 0 {
        C64::from_polar(1.0, k * theta)
    } else {
        C64::from_polar(1.0, -k * theta)
    }
}

/// eta_D (1 + C D^*)^{-1} (D + C) eta_D^{-1} on the interior of a square
/// CMV window, trimmed by `margin` on each side.
pub fn operator_moebius_banded(c: &BandedWindow, d: &DiagonalSpec, margin: usize) -> Result<BandedWindow> {
    let n = d.base.n();
    if margin < 2 * n {
        return Err(Error::Margin { need: 2 * n, got: margin });
    }
    if !c.is_square_aligned() {
        return Err(Error::DimensionMismatch("operator Moebius transform needs a square window".into()));
    }
    let size = c.rows();
    if size <= 2 * margin {
        return Err(Error::Range(format!("window of size {size} leaves no interior for margin {margin}")));
    }
    let lo = c.row_offset;
    let dv: Vec<C64> = (0..size).map(|k| d.entry(lo + k as i64)).collect();
    let mut k = DMatrix::from_fn(size, size, |i, j| c.data[(i, j)] * dv[j].conj());
    let mut rhs = c.data.clone();
    for i in 0..size {
        k[(i, i)] += ONE;
        rhs[(i, i)] += dv[i];
    }
    let x = k.lu().solve(&rhs).ok_or_else(|| Error::SingularSolve("1 + C D* is singular on the window".into()))?;
    let eta: Vec<f64> = dv.iter().map(|v| (1.0 - v.norm_sqr()).sqrt()).collect();
    let m = margin as i64;
    let inner = (lo + m)..(lo + size as i64 - m);
    let bw = 2 * n;
    BandedWindow::from_fn(inner.clone(), inner, bw, |i, j| {
        let (a, b) = ((i - lo) as usize, (j - lo) as usize);
        x[(a, b)] * (eta[a] / eta[b])
    })
}

fn check_dims(seq: &VerblunskySequence, z: &PoleVector) -> Result<()> {
    if seq.n() != z.n() {
        return Err(Error::DimensionMismatch(format!("period 2n = {} does not match {} poles", seq.period(), z.n())));
    }
    Ok(())
}

fn conj_by_lambda(mut w: BandedWindow, n: usize, theta: f64) -> BandedWindow {
    for i in w.row_range() {
        for j in w.col_range() {
            let v = w.at(i, j);
            if v != ZERO {
                w.set(i, j, lambda_entry(i, n, theta).conj() * v * lambda_entry(j, n, theta));
            }
        }
    }
    w
}

/// A = Lambda(theta)^* b_{-D_0}(C) Lambda(theta) on the square window `range`.
pub fn mcmv_window(seq: &VerblunskySequence, z: &PoleVector, range: Range<i64>) -> Result<BandedWindow> {
    check_dims(seq, z)?;
    shifted_mcmv(seq, &DiagonalSpec::new(z.clone()), range, false)
}

/// b_{z_j}(A) = Lambda^* V_j b_{-D_j}(C) V_j Lambda on the window `range`.
pub fn blaschke_of_mcmv(seq: &VerblunskySequence, z: &PoleVector, j: usize, range: Range<i64>) -> Result<BandedWindow> {
    check_dims(seq, z)?;
    if j >= z.n() {
        return Err(Error::PoleNotInVector(j));
    }
    let spec = DiagonalSpec { base: z.clone(), shift: z.z(j) };
    shifted_mcmv(seq, &spec, range, true)
}

fn shifted_mcmv(
    seq: &VerblunskySequence,
    spec: &DiagonalSpec,
    range: Range<i64>,
    with_v: bool,
) -> Result<BandedWindow> {
    if range.end <= range.start {
        return Err(Error::Range(format!("empty or inverted range {range:?}")));
    }
    let n = spec.base.n();
    let margin = 2 * n;
    let m = margin as i64;
    let big = (range.start - m)..(range.end + m);
    let c = cmv_window(seq, big.clone(), big)?;
    let mut x = operator_moebius_banded(&c, spec, margin)?;
    if with_v {
        for i in x.row_range() {
            for j in x.col_range() {
                let v = x.at(i, j);
                if v != ZERO {
                    x.set(i, j, spec.v_entry(i) * v * spec.v_entry(j));
                }
            }
        }
    }
    Ok(conj_by_lambda(x, n, seq.theta()))
}

/// Direct evaluation (1 - conj(w) A)^{-1}(A - w) of a Blaschke factor on a
/// window; the result is exact only far from the window edges. Used as an
/// independent check of the shifted-diagonal route.
pub fn blaschke_direct(a: &BandedWindow, w: C64, trim: usize) -> Result<BandedWindow> {
    if !a.is_square_aligned() {
        return Err(Error::DimensionMismatch("square window required".into()));
    }
    let size = a.rows();
    let mut lhs = a.data.map(|v| -w.conj() * v);
    let mut rhs = a.data.clone();
    for i in 0..size {
        lhs[(i, i)] += ONE;
        rhs[(i, i)] -= w;
    }
    let x = lhs.lu().solve(&rhs).ok_or_else(|| Error::SingularSolve("1 - conj(w) A".into()))?;
    let t = trim as i64;
    let lo = a.row_offset;
    let inner = (lo + t)..(lo + size as i64 - t);
    BandedWindow::from_fn(inner.clone(), inner, size, |i, j| x[((i - lo) as usize, (j - lo) as usize)])
}

/// Shape summary of one block row.
#[derive(Debug, Clone, Serialize)]
pub struct BlockShape {
    pub block: i64,
    pub start: i64,
    pub diag_norm: f64,
    pub upper_norm: f64,
    pub lower_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OffDiagonalVectors {
    pub block: i64,
    /// Column of the upper neighbour block entering this block row.
    pub u: Vec<C64>,
    /// Column of the lower neighbour block entering this block row.
    pub v: Vec<C64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CornerEntry {
    pub row: i64,
    pub col: i64,
    pub value: C64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StructureReport {
    pub block_pattern: Vec<BlockShape>,
    pub off_diagonal_vectors: Vec<OffDiagonalVectors>,
    pub corner_entries: Vec<CornerEntry>,
    /// Entries that break the block-tridiagonal rank-one pattern.
    pub violations: Vec<CornerEntry>,
}

/// Checks the block pattern of an MCMV-type window with blocks of size 2n
/// starting at `origin` (use 2j for S^{-2j} b_{z_j}(A) S^{2j}).
pub fn structure_report(a: &BandedWindow, n: usize, origin: i64, tol: f64) -> StructureReport {
    let bs = 2 * n as i64;
    let block_of = |i: i64| (i - origin).div_euclid(bs);
    let start_of = |b: i64| origin + b * bs;
    let scale = a.data.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    let thresh = tol * scale;
    let mut violations = Vec::new();
    for i in a.row_range() {
        for j in a.col_range() {
            let v = a.at(i, j);
            if v.norm() <= thresh {
                continue;
            }
            let (bi, bj) = (block_of(i), block_of(j));
            let ok = match bj - bi {
                0 => true,
                1 => j == start_of(bj),
                -1 => j == start_of(bj) + bs - 1,
                _ => false,
            };
            if !ok {
                violations.push(CornerEntry { row: i, col: j, value: v });
            }
        }
    }
    let rows = a.row_range();
    let cols = a.col_range();
    let first = block_of(rows.start) + if (rows.start - origin).rem_euclid(bs) == 0 { 0 } else { 1 };
    let mut block_pattern = Vec::new();
    let mut off = Vec::new();
    let mut corners = Vec::new();
    let mut b = first;
    while start_of(b) + bs <= rows.end {
        let s = start_of(b);
        let norm_over = |cr: Range<i64>| {
            let mut acc = 0.0;
            for i in s..s + bs {
                for j in cr.clone() {
                    if let Some(v) = a.get(i, j) {
                        acc += v.norm_sqr();
                    }
                }
            }
            acc.sqrt()
        };
        block_pattern.push(BlockShape {
            block: b,
            start: s,
            diag_norm: norm_over(s..s + bs),
            upper_norm: norm_over(s + bs..s + 2 * bs),
            lower_norm: norm_over(s - bs..s),
        });
        let (uc, vc) = (s + bs, s - 1);
        if cols.contains(&uc) && cols.contains(&vc) {
            off.push(OffDiagonalVectors {
                block: b,
                u: (s..s + bs).map(|i| a.at(i, uc)).collect(),
                v: (s..s + bs).map(|i| a.at(i, vc)).collect(),
            });
        }
        if cols.contains(&uc) {
            corners.push(CornerEntry { row: s, col: uc, value: a.at(s, uc) });
        }
        if cols.contains(&vc) {
            corners.push(CornerEntry { row: s + bs - 1, col: vc, value: a.at(s + bs - 1, vc) });
        }
        b += 1;
    }
    StructureReport { block_pattern, off_diagonal_vectors: off, corner_entries: corners, violations }
}

/// Which closed-form corner entry to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Corner {
    /// The (0, 2n) entry of (1 + C D_0^*)^{-1}(C + D_0), without the eta
    /// and phase conjugations.
    OffDiagTilde,
    /// The (2k, 2(n+k)) entry of b_{z_k}(A); k = 0 gives A itself.
    Shifted(usize),
}

fn proj_diag_first() -> Mat2 {
    Mat2::diag(ONE, ZERO)
}

/// Closed-form corner entries of MCMV matrices. Requires distinct poles.
pub fn corner_entry(seq: &VerblunskySequence, z: &PoleVector, which: Corner) -> Result<C64> {
    check_dims(seq, z)?;
    if z.has_repeats() {
        return Err(Error::RepeatedPole);
    }
    let n = z.n();
    let a = |k: usize| seq.a(k as i64);
    match which {
        Corner::OffDiagTilde => {
            let ua = |k: usize| u_raw(-a(k).conj());
            let mut x = ua(2 * n - 2);
            for j in (1..n).rev() {
                let zj = z.z(j).conj();
                x = x * Mat2::diag(ONE, -zj) * ua(2 * j - 1) * Mat2::diag(-ONE / zj, ONE) * ua(2 * j - 2);
            }
            Ok(C64::from(seq.rho(2 * n as i64 - 1)) / x.m11)
        }
        Corner::Shifted(k) => {
            if k >= n {
                return Err(Error::PoleNotInVector(k));
            }
            // Values b_{z_l}(z_k^*) for the poles following k cyclically.
            let beta = |l: usize| -> Result<C64> {
                let zl = z.z(l);
                if k == 0 {
                    // z_0^* is infinity: b_{z_l}(infinity) = -1/conj(z_l).
                    Ok(-ONE / zl.conj())
                } else {
                    let zk_star = ONE / z.z(k).conj();
                    blaschke(zl, zk_star)
                }
            };
            let ua = |m: usize| u_raw(seq.a(m as i64));
            let base = 2 * k;
            let mut prod = proj_diag_first() * ua(base);
            for step in 1..n {
                let l = (k + step) % n;
                let b = beta(l)?;
                prod = prod
                    * Mat2::diag(b, ONE)
                    * ua(base + 2 * step - 1)
                    * Mat2::diag(ONE, ONE / b)
                    * ua(base + 2 * step);
            }
            prod = prod * proj_diag_first() * ua(base + 2 * n - 1);
            Ok(C64::from_polar(1.0, seq.theta()) / prod.trace())
        }
    }
}

/// Half-line MCMV matrix A_+ = b_{-D_+}(C_+) (no phase conjugation),
/// upper-left size x size corner. Only the leading part is exact; the last
/// 2n rows and columns are marked untrusted.
pub fn halfline_mcmv(seq: &VerblunskySequence, z: &PoleVector, size: usize) -> Result<BandedWindow> {
    check_dims(seq, z)?;
    let n = z.n();
    let pad = 4 * n + 4;
    let total = size + pad;
    let c = crate::cmv::halfline_cmv(seq, total + total % 2)?;
    let total = c.rows();
    let dv: Vec<C64> = (0..total).map(|k| z.d0(k as i64)).collect();
    let mut k = DMatrix::from_fn(total, total, |i, j| c.data[(i, j)] * dv[j].conj());
    let mut rhs = c.data.clone();
    for i in 0..total {
        k[(i, i)] += ONE;
        rhs[(i, i)] += dv[i];
    }
    let x = k.lu().solve(&rhs).ok_or_else(|| Error::SingularSolve("half-line 1 + C D*".into()))?;
    let eta: Vec<f64> = dv.iter().map(|v| (1.0 - v.norm_sqr()).sqrt()).collect();
    let s = size as i64;
    let mut w = BandedWindow::from_fn(0..s, 0..s, 2 * n, |i, j| {
        let (a, b) = (i as usize, j as usize);
        x[(a, b)] * (eta[a] / eta[b])
    })?;
    w.trusted_rows = 0..s - 2 * n as i64;
    w.trusted_cols = 0..s - 2 * n as i64;
    Ok(w)
}
