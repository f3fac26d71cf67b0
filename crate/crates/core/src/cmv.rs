//! CMV matrices built from Verblunsky data through the factorization C = LM,
//! together with the finite-window representation used for all whole-line
//! operators in this crate.

use crate::error::{Error, Result};
use crate::scalar::{DiskPoint, Mat2, C64, ONE, ZERO};
use nalgebra::DMatrix;
use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::ops::Range;

/// One period block a_0..a_{2n-1} and a rotational phase theta; the whole
/// sequence is a_{k+2n} = exp(-2 i theta) a_k.
#[derive(Debug, Clone, PartialEq)]
pub struct VerblunskySequence {
    block: Vec<DiskPoint>,
    theta: f64,
    overrides: BTreeMap<i64, DiskPoint>,
}

impl VerblunskySequence {
    pub fn new(block: Vec<DiskPoint>, theta: f64) -> Result<Self> {
        if block.is_empty() || !block.len().is_multiple_of(2) {
            return Err(Error::DimensionMismatch(format!(
                "period block must have even positive length, got {}",
                block.len()
            )));
        }
        if !theta.is_finite() {
            return Err(Error::Invalid("phase must be finite".into()));
        }
        Ok(VerblunskySequence { block, theta: theta.rem_euclid(TAU), overrides: BTreeMap::new() })
    }

    /// Convenience constructor from raw complex values.
    pub fn from_values(values: &[C64], theta: f64) -> Result<Self> {
        let block = values.iter().map(|&a| DiskPoint::new(a)).collect::<Result<Vec<_>>>()?;
        Self::new(block, theta)
    }

    /// Replace a single coefficient at an absolute index, breaking periodicity.
    pub fn with_override(mut self, k: i64, value: DiskPoint) -> Self {
        self.overrides.insert(k, value);
        self
    }

    pub fn is_periodic(&self) -> bool {
        self.overrides.is_empty()
    }

    pub fn block(&self) -> &[DiskPoint] {
        &self.block
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Number of poles n; the period is p = 2n.
    pub fn n(&self) -> usize {
        self.block.len() / 2
    }

    pub fn period(&self) -> usize {
        self.block.len()
    }

    /// a_k for any integer k.
    pub fn a(&self, k: i64) -> C64 {
        if let Some(v) = self.overrides.get(&k) {
            return v.value();
        }
        let p = self.block.len() as i64;
        let q = k.div_euclid(p);
        let r = k.rem_euclid(p) as usize;
        self.block[r].value() * C64::from_polar(1.0, -2.0 * self.theta * q as f64)
    }

    pub fn rho(&self, k: i64) -> f64 {
        (1.0 - self.a(k).norm_sqr()).sqrt()
    }

    /// A copy with every coefficient multiplied by a unimodular constant.
    pub fn rotated(&self, phase: f64) -> Self {
        let r = C64::from_polar(1.0, phase);
        let rot = |d: &DiskPoint| DiskPoint::new(d.value() * r).expect("rotation keeps modulus");
        VerblunskySequence {
            block: self.block.iter().map(rot).collect(),
            theta: self.theta,
            overrides: self.overrides.iter().map(|(k, v)| (*k, rot(v))).collect(),
        }
    }
}

/// A finite window of a doubly infinite operator with absolute offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedWindow {
    pub row_offset: i64,
    pub col_offset: i64,
    pub data: DMatrix<C64>,
    /// Entries with |i - j| above this are zero.
    pub bandwidth: usize,
    /// Rows whose entries are exact (not affected by truncation).
    pub trusted_rows: Range<i64>,
    pub trusted_cols: Range<i64>,
}

impl BandedWindow {
    pub fn zeros(rows: Range<i64>, cols: Range<i64>, bandwidth: usize) -> Result<Self> {
        if rows.end < rows.start || cols.end < cols.start {
            return Err(Error::Range(format!("inverted window {rows:?} x {cols:?}")));
        }
        let data = DMatrix::from_element((rows.end - rows.start) as usize, (cols.end - cols.start) as usize, ZERO);
        Ok(BandedWindow {
            row_offset: rows.start,
            col_offset: cols.start,
            data,
            bandwidth,
            trusted_rows: rows,
            trusted_cols: cols,
        })
    }

    pub fn from_fn(
        rows: Range<i64>,
        cols: Range<i64>,
        bandwidth: usize,
        mut f: impl FnMut(i64, i64) -> C64,
    ) -> Result<Self> {
        let mut w = Self::zeros(rows.clone(), cols.clone(), bandwidth)?;
        for i in rows.clone() {
            for j in cols.clone() {
                if (i - j).unsigned_abs() as usize <= bandwidth {
                    w.data[((i - rows.start) as usize, (j - cols.start) as usize)] = f(i, j);
                }
            }
        }
        Ok(w)
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn row_range(&self) -> Range<i64> {
        self.row_offset..self.row_offset + self.rows() as i64
    }

    pub fn col_range(&self) -> Range<i64> {
        self.col_offset..self.col_offset + self.cols() as i64
    }

    pub fn contains(&self, i: i64, j: i64) -> bool {
        self.row_range().contains(&i) && self.col_range().contains(&j)
    }

    /// Entry at absolute coordinates; panics outside the window.
    pub fn at(&self, i: i64, j: i64) -> C64 {
        self.get(i, j).unwrap_or_else(|| panic!("({i},{j}) outside window"))
    }

    pub fn get(&self, i: i64, j: i64) -> Option<C64> {
        if !self.contains(i, j) {
            return None;
        }
        Some(self.data[((i - self.row_offset) as usize, (j - self.col_offset) as usize)])
    }

    pub fn set(&mut self, i: i64, j: i64, v: C64) {
        let (r, c) = ((i - self.row_offset) as usize, (j - self.col_offset) as usize);
        self.data[(r, c)] = v;
    }

    /// Restrict to a sub-window; trusted ranges are intersected.
    pub fn sub_window(&self, rows: Range<i64>, cols: Range<i64>) -> Result<Self> {
        let rr = self.row_range();
        let cr = self.col_range();
        if rows.start < rr.start || rows.end > rr.end || cols.start < cr.start || cols.end > cr.end {
            return Err(Error::Range(format!("sub-window {rows:?} x {cols:?} not inside {rr:?} x {cr:?}")));
        }
        if rows.end < rows.start || cols.end < cols.start {
            return Err(Error::Range("inverted sub-window".into()));
        }
        let data = self
            .data
            .view(
                ((rows.start - rr.start) as usize, (cols.start - cr.start) as usize),
                ((rows.end - rows.start) as usize, (cols.end - cols.start) as usize),
            )
            .into_owned();
        Ok(BandedWindow {
            row_offset: rows.start,
            col_offset: cols.start,
            data,
            bandwidth: self.bandwidth,
            trusted_rows: intersect(&self.trusted_rows, &rows),
            trusted_cols: intersect(&self.trusted_cols, &cols),
        })
    }

    /// Square restriction to the trusted interior.
    pub fn trusted(&self) -> Result<Self> {
        self.sub_window(self.trusted_rows.clone(), self.trusted_cols.clone())
    }

    pub fn is_square_aligned(&self) -> bool {
        self.row_offset == self.col_offset && self.rows() == self.cols()
    }

    /// Conjugate transpose; the window must be square and aligned.
    pub fn adjoint(&self) -> Self {
        BandedWindow {
            row_offset: self.col_offset,
            col_offset: self.row_offset,
            data: self.data.adjoint(),
            bandwidth: self.bandwidth,
            trusted_rows: self.trusted_cols.clone(),
            trusted_cols: self.trusted_rows.clone(),
        }
    }

    /// Product of two aligned square windows over the same index range. The
    /// trusted range shrinks by the left factor's bandwidth on each side.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if !self.is_square_aligned() || !other.is_square_aligned() || self.row_range() != other.row_range() {
            return Err(Error::DimensionMismatch("matmul needs aligned square windows".into()));
        }
        let shrink = self.bandwidth.max(other.bandwidth) as i64;
        let t = intersect(&self.trusted_rows, &other.trusted_rows);
        let t = (t.start + shrink)..(t.end - shrink).max(t.start + shrink);
        Ok(BandedWindow {
            row_offset: self.row_offset,
            col_offset: self.col_offset,
            data: &self.data * &other.data,
            bandwidth: self.bandwidth + other.bandwidth,
            trusted_rows: t.clone(),
            trusted_cols: t,
        })
    }

    /// Linear combination self + s * other of aligned windows.
    pub fn axpy(&self, s: C64, other: &Self) -> Result<Self> {
        if self.row_range() != other.row_range() || self.col_range() != other.col_range() {
            return Err(Error::DimensionMismatch("axpy needs identical windows".into()));
        }
        Ok(BandedWindow {
            row_offset: self.row_offset,
            col_offset: self.col_offset,
            data: &self.data + &other.data * s,
            bandwidth: self.bandwidth.max(other.bandwidth),
            trusted_rows: intersect(&self.trusted_rows, &other.trusted_rows),
            trusted_cols: intersect(&self.trusted_cols, &other.trusted_cols),
        })
    }

    /// Largest absolute entry over the trusted region.
    pub fn max_abs_trusted(&self) -> f64 {
        let mut m = 0.0f64;
        for i in self.trusted_rows.clone() {
            for j in self.trusted_cols.clone() {
                m = m.max(self.at(i, j).norm());
            }
        }
        m
    }

    /// Max deviation from orthonormality of the trusted columns, measured
    /// against the whole window (so columns need their full support inside).
    pub fn column_unitarity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        let cols: Vec<i64> = self.trusted_cols.clone().collect();
        for &j in &cols {
            for &k in &cols {
                let mut s = ZERO;
                for i in self.row_range() {
                    s += self.at(i, j).conj() * self.at(i, k);
                }
                let target = if j == k { ONE } else { ZERO };
                worst = worst.max((s - target).norm());
            }
        }
        worst
    }
}

pub(crate) fn intersect(a: &Range<i64>, b: &Range<i64>) -> Range<i64> {
    let s = a.start.max(b.start);
    let e = a.end.min(b.end).max(s);
    s..e
}

/// Theta(a) = [[conj(a), rho], [rho, -a]].
pub fn theta_block(a: DiskPoint) -> Mat2 {
    theta_raw(a.value())
}

pub(crate) fn theta_raw(a: C64) -> Mat2 {
    let rho = C64::from((1.0 - a.norm_sqr()).max(0.0).sqrt());
    Mat2::new(a.conj(), rho, rho, -a)
}

fn block_entry(theta_at: &impl Fn(i64) -> Mat2, start: i64, i: i64, j: i64) -> C64 {
    let t = theta_at(start);
    match (i - start, j - start) {
        (0, 0) => t.m11,
        (0, 1) => t.m12,
        (1, 0) => t.m21,
        (1, 1) => t.m22,
        _ => ZERO,
    }
}

/// L = direct sum of Theta_{2l} on the pairs (2l, 2l+1).
fn l_entry(theta_at: &impl Fn(i64) -> Mat2, i: i64, j: i64) -> C64 {
    block_entry(theta_at, 2 * i.div_euclid(2), i, j)
}

/// M = direct sum of Theta_{2l+1} on the pairs (2l+1, 2l+2).
fn m_entry(theta_at: &impl Fn(i64) -> Mat2, i: i64, j: i64) -> C64 {
    block_entry(theta_at, 2 * (i - 1).div_euclid(2) + 1, i, j)
}

fn c_entry(theta_at: &impl Fn(i64) -> Mat2, i: i64, j: i64) -> C64 {
    let s = 2 * i.div_euclid(2);
    l_entry(theta_at, i, s) * m_entry(theta_at, s, j) + l_entry(theta_at, i, s + 1) * m_entry(theta_at, s + 1, j)
}

fn whole_line_theta(seq: &VerblunskySequence) -> impl Fn(i64) -> Mat2 + '_ {
    move |k| theta_raw(seq.a(k))
}

fn half_line_theta(seq: &VerblunskySequence) -> impl Fn(i64) -> Mat2 + '_ {
    move |k| if k == -1 { theta_raw(-ONE) } else { theta_raw(seq.a(k)) }
}

/// Window of the whole-line CMV matrix. Entries are computed from the
/// factorization directly, so every entry of the window is exact.
pub fn cmv_window(seq: &VerblunskySequence, rows: Range<i64>, cols: Range<i64>) -> Result<BandedWindow> {
    let th = whole_line_theta(seq);
    BandedWindow::from_fn(rows, cols, 2, |i, j| c_entry(&th, i, j))
}

/// Window of the L factor.
pub fn l_window(seq: &VerblunskySequence, rows: Range<i64>, cols: Range<i64>) -> Result<BandedWindow> {
    let th = whole_line_theta(seq);
    BandedWindow::from_fn(rows, cols, 1, |i, j| l_entry(&th, i, j))
}

/// Window of the M factor.
pub fn m_window(seq: &VerblunskySequence, rows: Range<i64>, cols: Range<i64>) -> Result<BandedWindow> {
    let th = whole_line_theta(seq);
    BandedWindow::from_fn(rows, cols, 1, |i, j| m_entry(&th, i, j))
}

/// Upper-left size x size corner of the half-line CMV matrix (a_{-1} = -1).
/// The last two rows and columns miss couplings beyond the cut and are
/// marked untrusted.
pub fn halfline_cmv(seq: &VerblunskySequence, size: usize) -> Result<BandedWindow> {
    if !size.is_multiple_of(2) || size < 2 {
        return Err(Error::Range(format!("half-line size must be even and >= 2, got {size}")));
    }
    let th = half_line_theta(seq);
    let n = size as i64;
    let mut w = BandedWindow::from_fn(0..n, 0..n, 2, |i, j| c_entry(&th, i, j))?;
    w.trusted_rows = 0..n - 2;
    w.trusted_cols = 0..n - 2;
    Ok(w)
}
