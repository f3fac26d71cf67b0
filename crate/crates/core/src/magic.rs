//! Partial-fraction form of the discriminant, rational functions of MCMV
//! operators and the Magic Formula check.

use std::f64::consts::TAU;
use std::ops::Range;

use serde::Serialize;

use crate::cmv::{BandedWindow, VerblunskySequence};
use crate::error::{Error, Result};
use crate::mcmv::{blaschke_of_mcmv, corner_entry, Corner, PoleVector};
use crate::scalar::{blaschke, C64, ONE, ZERO};
use crate::transfer::MonodromyEvaluator;

/// Nodes on each local circle used to read off Laurent coefficients.
const LAURENT_NODES: usize = 64;
/// Circle samples for the constant term and the reconstruction check.
const CHECK_SAMPLES: usize = 200;

/// Coefficients multiplying b_pole^i, i = 1..=coeffs.len().
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoleTerm {
    pub pole: C64,
    pub coeffs: Vec<C64>,
}

/// c + sum_j sum_i (c_ij b_{z_j}^i + conj(c_ij) b_{z_j}^{-i}).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuitableRational {
    pub constant: f64,
    pub terms: Vec<PoleTerm>,
}

impl SuitableRational {
    pub fn constant(c: f64) -> Self {
        SuitableRational { constant: c, terms: Vec::new() }
    }

    pub fn eval(&self, z: C64) -> Result<C64> {
        let mut s = C64::from(self.constant);
        for t in &self.terms {
            let b = blaschke(t.pole, z)?;
            let mut bp = ONE;
            let mut bm = ONE;
            for c in &t.coeffs {
                bp *= b;
                bm /= b;
                s += c * bp + c.conj() * bm;
            }
        }
        Ok(s)
    }

    pub fn max_power(&self) -> usize {
        self.terms.iter().map(|t| t.coeffs.len()).max().unwrap_or(0)
    }

    /// Largest coefficient modulus, the constant included.
    pub fn coefficient_norm(&self) -> f64 {
        self.terms.iter().flat_map(|t| t.coeffs.iter()).map(|c| c.norm()).fold(self.constant.abs(), f64::max)
    }

    /// Termwise difference; poles are matched by value.
    pub fn sub(&self, other: &SuitableRational) -> SuitableRational {
        let mut out = self.clone();
        out.constant -= other.constant;
        for t in &other.terms {
            let neg: Vec<C64> = t.coeffs.iter().map(|c| -c).collect();
            match out.terms.iter_mut().find(|s| (s.pole - t.pole).norm() <= crate::mcmv::POLE_COLLISION_TOL) {
                Some(s) => {
                    if s.coeffs.len() < neg.len() {
                        s.coeffs.resize(neg.len(), ZERO);
                    }
                    for (a, b) in s.coeffs.iter_mut().zip(neg) {
                        *a += b;
                    }
                }
                None => out.terms.push(PoleTerm { pole: t.pole, coeffs: neg }),
            }
        }
        out
    }
}

/// Expands a function that is real on the circle with poles of order at
/// most m_j at the given points (and their reflections) into suitable form.
/// Laurent coefficients at each pole are circle means in the local variable
/// s = b_pole(z), on a circle of half the distance to the nearest other pole.
pub fn partial_fractions_of(f: &dyn Fn(C64) -> Result<C64>, poles: &[(C64, usize)]) -> Result<SuitableRational> {
    let mut terms = Vec::with_capacity(poles.len());
    for (idx, &(zeta, m)) in poles.iter().enumerate() {
        let mut r = 1.0f64;
        for (other, &(w, _)) in poles.iter().enumerate() {
            if other != idx {
                r = r.min(blaschke(zeta, w)?.norm());
            }
        }
        let r = 0.5 * r;
        let mut coeffs = vec![ZERO; m];
        for k in 0..LAURENT_NODES {
            let s = C64::from_polar(r, TAU * (k as f64 + 0.5) / LAURENT_NODES as f64);
            let z = (s + zeta) / (ONE + zeta.conj() * s);
            let v = f(z)?;
            let mut sp = ONE;
            for c in coeffs.iter_mut() {
                sp *= s;
                *c += v * sp;
            }
        }
        for c in coeffs.iter_mut() {
            *c = (*c / LAURENT_NODES as f64).conj();
        }
        terms.push(PoleTerm { pole: zeta, coeffs });
    }
    let mut r = SuitableRational { constant: 0.0, terms };
    let mut mean = 0.0;
    let mut samples = Vec::with_capacity(CHECK_SAMPLES);
    for k in 0..CHECK_SAMPLES {
        let z = C64::from_polar(1.0, TAU * (k as f64 + 0.5) / CHECK_SAMPLES as f64);
        let v = f(z)?;
        mean += (v - r.eval(z)?).re;
        samples.push((z, v));
    }
    r.constant = mean / CHECK_SAMPLES as f64;
    let mut err = 0.0f64;
    let mut scale = 1.0f64;
    for (z, v) in samples {
        err = err.max((v - r.eval(z)?).norm());
        scale = scale.max(v.norm());
    }
    if err > 1e-9 * scale {
        return Err(Error::Reconstruction(err));
    }
    Ok(r)
}

/// Partial-fraction form of the discriminant of a periodic instance.
pub fn partial_fractions(ev: &MonodromyEvaluator) -> Result<SuitableRational> {
    partial_fractions_of(&|z| ev.discriminant(z), &ev.poles().distinct())
}

/// Max reconstruction error of r against the discriminant on the circle.
pub fn reconstruction_error(ev: &MonodromyEvaluator, r: &SuitableRational, samples: usize) -> Result<f64> {
    let mut err = 0.0f64;
    for k in 0..samples {
        let z = C64::from_polar(1.0, TAU * (k as f64 + 0.5) / samples as f64);
        err = err.max((ev.discriminant(z)? - r.eval(z)?).norm());
    }
    Ok(err)
}

fn pole_index(z: &PoleVector, pole: C64) -> Result<usize> {
    (0..z.n())
        .find(|&j| (z.z(j) - pole).norm() <= crate::mcmv::POLE_COLLISION_TOL)
        .ok_or(Error::Invalid(format!("pole {pole} is not in the pole vector")))
}

fn identity_window(range: Range<i64>) -> Result<BandedWindow> {
    BandedWindow::from_fn(range.clone(), range, 0, |_, _| ONE)
}

/// r(A) on the square window `range`, computed from b_{z_j}(A) on a window
/// widened by `margin` on each side. Negative powers use b^{-1} = b^*.
pub fn rational_of_operator(
    r: &SuitableRational,
    seq: &VerblunskySequence,
    z: &PoleVector,
    range: Range<i64>,
    margin: usize,
) -> Result<BandedWindow> {
    let n = z.n();
    let need = 2 * n * (r.max_power() + 1);
    if margin < need {
        return Err(Error::Margin { need, got: margin });
    }
    let m = margin as i64;
    let big = (range.start - m)..(range.end + m);
    let mut acc = identity_window(big.clone())?;
    acc.data *= C64::from(r.constant);
    for t in &r.terms {
        let j = pole_index(z, t.pole)?;
        let b = blaschke_of_mcmv(seq, z, j, big.clone())?;
        let bs = b.adjoint();
        let mut bp = b.clone();
        let mut bm = bs.clone();
        for (i, c) in t.coeffs.iter().enumerate() {
            if i > 0 {
                bp = bp.matmul(&b)?;
                bm = bm.matmul(&bs)?;
            }
            acc = acc.axpy(*c, &bp)?.axpy(c.conj(), &bm)?;
        }
    }
    let out = acc.sub_window(range.clone(), range.clone())?;
    if out.trusted_rows != range || out.trusted_cols != range {
        return Err(Error::Margin { need: need + 2 * n, got: margin });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagonalDeviation {
    pub offset: i64,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MagicReport {
    pub max_deviation: f64,
    pub per_diagonal: Vec<DiagonalDeviation>,
    pub tolerance: f64,
    pub pass: bool,
}

pub const MAGIC_TOL: f64 = 1e-9;

/// Deviation of r(A) from S^{2n} + S^{-2n} on a window.
pub fn shift_deviation(w: &BandedWindow, n: usize, tol: f64) -> MagicReport {
    let p = 2 * n as i64;
    let bw = w.bandwidth as i64;
    let mut per: Vec<DiagonalDeviation> =
        (-bw..=bw).map(|offset| DiagonalDeviation { offset, max_deviation: 0.0 }).collect();
    let mut worst = 0.0f64;
    for i in w.row_range() {
        for j in w.col_range() {
            let target = if (j - i).abs() == p { ONE } else { ZERO };
            let d = (w.at(i, j) - target).norm();
            worst = worst.max(d);
            if let Some(e) = per.iter_mut().find(|e| e.offset == j - i) {
                e.max_deviation = e.max_deviation.max(d);
            }
        }
    }
    MagicReport { max_deviation: worst, per_diagonal: per, tolerance: tol, pass: worst < tol }
}

/// Evaluates Delta_A(A) - (S^{2n} + S^{-2n}) on `range`. The discriminant
/// comes from the periodic block of `seq`; the operator uses the full
/// sequence, overrides included, so broken periodicity shows up here.
pub fn magic_check(seq: &VerblunskySequence, z: &PoleVector, range: Range<i64>, tol: f64) -> Result<MagicReport> {
    let ev = MonodromyEvaluator::new(seq, z)?;
    let r = partial_fractions(&ev)?;
    let margin = 2 * z.n() * (r.max_power() + 1);
    let w = rational_of_operator(&r, seq, z, range, margin)?;
    Ok(shift_deviation(&w, z.n(), tol))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VanishingReport {
    pub operator_norm: f64,
    pub coefficient_norm: f64,
    /// Coefficients read back from the outermost diagonals of r(A).
    pub recovered: Vec<C64>,
    pub bound_constant: f64,
    pub consistent: bool,
}

/// Diagonal sweep: for simple poles the coefficient of b_{z_k} is the
/// (2k, 2k + 2n) entry of r(A) divided by the corner of b_{z_k}(A), and the
/// constant is what remains on the main diagonal. Checks that a small r(A)
/// forces small coefficients, |coef| <= C |r(A)|.
pub fn suitable_vanishing_check(
    r: &SuitableRational,
    seq: &VerblunskySequence,
    z: &PoleVector,
    tol: f64,
) -> Result<VanishingReport> {
    if z.has_repeats() || r.max_power() > 1 {
        return Err(Error::Invalid("diagonal sweep implemented for simple poles".into()));
    }
    let n = z.n();
    let p = 2 * n as i64;
    let range = 0..2 * p;
    let w = rational_of_operator(r, seq, z, range, 4 * n)?;
    let op = w.max_abs_trusted();
    let mut recovered = Vec::with_capacity(n);
    let mut bound = 1.0f64;
    for k in 0..n {
        let corner = corner_entry(seq, z, Corner::Shifted(k))?;
        bound = bound.max(1.0 / corner.norm());
        recovered.push(w.at(2 * k as i64, 2 * k as i64 + p) / corner);
    }
    let coef = r.coefficient_norm();
    // Off the outermost diagonals the constant is bounded by the diagonal
    // entries plus every b-term's contribution.
    let bound = bound * (1 + 2 * n) as f64;
    let consistent = op >= tol || coef <= bound * tol.max(op);
    Ok(VanishingReport { operator_norm: op, coefficient_norm: coef, recovered, bound_constant: bound, consistent })
}
