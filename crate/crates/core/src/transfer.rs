//! Monodromy and transfer matrices, orthogonal rational functions of the
//! first and second kind, the discriminant, coefficient stripping and the
//! Schur algorithm.

use crate::cmv::VerblunskySequence;
use crate::error::{Error, Result};
use crate::mcmv::PoleVector;
use crate::scalar::{blaschke, blaschke_deriv, u_raw, DiskPoint, Mat2, C64, I, ONE, ZERO};

/// One factor of an ordered 2x2 product.
#[derive(Debug, Clone, Copy)]
enum Factor {
    Const(Mat2),
    /// diag(b_w(z), 1)
    Blaschke(C64),
}

fn eval_chain(factors: &[Factor], z: C64) -> Result<Mat2> {
    let mut p = Mat2::identity();
    for f in factors {
        p = match *f {
            Factor::Const(m) => p * m,
            Factor::Blaschke(w) => {
                let b = blaschke(w, z)?;
                Mat2::new(p.m11 * b, p.m12, p.m21 * b, p.m22)
            }
        };
    }
    Ok(p)
}

/// Product and its z-derivative by forward accumulation of the product rule.
fn eval_chain_deriv(factors: &[Factor], z: C64) -> Result<(Mat2, Mat2)> {
    let mut p = Mat2::identity();
    let mut dp = Mat2::zero();
    for f in factors {
        match *f {
            Factor::Const(m) => {
                p = p * m;
                dp = dp * m;
            }
            Factor::Blaschke(w) => {
                let b = blaschke(w, z)?;
                let db = blaschke_deriv(w, z);
                dp = Mat2::new(dp.m11 * b + p.m11 * db, dp.m12, dp.m21 * b + p.m21 * db, dp.m22);
                p = Mat2::new(p.m11 * b, p.m12, p.m21 * b, p.m22);
            }
        }
    }
    Ok((p, dp))
}

fn y0() -> Mat2 {
    Mat2::new(ONE, ONE, -ONE, ONE)
}

fn y0_inv() -> Mat2 {
    Mat2::new(ONE, -ONE, ONE, ONE).scale(C64::from(0.5))
}

/// Evaluates T(z), W(z), M(z), M_theta(z) and the derived scalars for a
/// periodic MCMV instance.
#[derive(Debug, Clone)]
pub struct MonodromyEvaluator {
    seq: VerblunskySequence,
    poles: PoleVector,
    w: Vec<C64>,
    t_factors: Vec<Factor>,
    w_factors: Vec<Factor>,
    m_factors: Vec<Factor>,
}

impl MonodromyEvaluator {
    pub fn new(seq: &VerblunskySequence, poles: &PoleVector) -> Result<Self> {
        if seq.n() != poles.n() {
            return Err(Error::DimensionMismatch(format!(
                "period 2n = {} does not match {} poles",
                seq.period(),
                poles.n()
            )));
        }
        let p = seq.period();
        let a: Vec<C64> = seq.block().iter().map(|d| d.value()).collect();
        let w = poles.orf_poles();
        let theta = seq.theta();
        let mut t_factors = Vec::with_capacity(2 * p + 1);
        for k in 0..p {
            t_factors.push(Factor::Const(u_raw(a[k])));
            t_factors.push(Factor::Blaschke(w[(k + 1) % p]));
        }
        t_factors.push(Factor::Const(Mat2::diag(C64::from_polar(1.0, -theta), C64::from_polar(1.0, theta))));
        let mut w_factors = Vec::with_capacity(2 * p);
        for k in (0..p).rev() {
            w_factors.push(Factor::Const(u_raw(-a[k].conj())));
            w_factors.push(Factor::Blaschke(w[k]));
        }
        let mut m_factors = Vec::with_capacity(2 * p + 2);
        m_factors.push(Factor::Const(y0()));
        for k in 0..p {
            m_factors.push(Factor::Blaschke(w[k]));
            m_factors.push(Factor::Const(u_raw(a[k])));
        }
        m_factors.push(Factor::Const(y0_inv()));
        Ok(MonodromyEvaluator { seq: seq.clone(), poles: poles.clone(), w, t_factors, w_factors, m_factors })
    }

    pub fn seq(&self) -> &VerblunskySequence {
        &self.seq
    }

    pub fn poles(&self) -> &PoleVector {
        &self.poles
    }

    pub fn n(&self) -> usize {
        self.poles.n()
    }

    pub fn period(&self) -> usize {
        self.w.len()
    }

    pub fn theta(&self) -> f64 {
        self.seq.theta()
    }

    /// ORF pole list of one period.
    pub fn orf_poles(&self) -> &[C64] {
        &self.w
    }

    /// Number of U factors and Blaschke factors in T, and how often b_{z_0}
    /// appears among the latter.
    pub fn factor_counts(&self) -> (usize, usize, usize) {
        let mut u = 0;
        let mut b = 0;
        let mut b0 = 0;
        for f in &self.t_factors {
            match f {
                Factor::Const(_) => u += 1,
                Factor::Blaschke(w) => {
                    b += 1;
                    if *w == ZERO {
                        b0 += 1;
                    }
                }
            }
        }
        (u - 1, b, b0)
    }

    /// Monodromy matrix T(z).
    pub fn monodromy(&self, z: C64) -> Result<Mat2> {
        eval_chain(&self.t_factors, z)
    }

    pub fn monodromy_with_derivative(&self, z: C64) -> Result<(Mat2, Mat2)> {
        eval_chain_deriv(&self.t_factors, z)
    }

    /// Transfer matrix W(z) of the ORF recurrence.
    pub fn w_matrix(&self, z: C64) -> Result<Mat2> {
        eval_chain(&self.w_factors, z)
    }

    /// W_theta = diag(e^{-i theta}, e^{i theta}) W.
    pub fn w_theta(&self, z: C64) -> Result<Mat2> {
        let th = self.theta();
        Ok(Mat2::diag(C64::from_polar(1.0, -th), C64::from_polar(1.0, th)) * self.w_matrix(z)?)
    }

    /// M(z) = Y_0 diag(b_{w_0},1) U(a_0) ... diag(b_{w_{p-1}},1) U(a_{p-1}) Y_0^{-1}.
    pub fn m_matrix(&self, z: C64) -> Result<Mat2> {
        eval_chain(&self.m_factors, z)
    }

    fn rotation(&self) -> Mat2 {
        let (s, c) = self.theta().sin_cos();
        Mat2::new(C64::from(c), I * s, I * s, C64::from(c))
    }

    /// M_theta = M [[cos, i sin], [i sin, cos]].
    pub fn m_theta(&self, z: C64) -> Result<Mat2> {
        Ok(self.m_matrix(z)? * self.rotation())
    }

    pub fn m_theta_with_derivative(&self, z: C64) -> Result<(Mat2, Mat2)> {
        let (m, dm) = eval_chain_deriv(&self.m_factors, z)?;
        let r = self.rotation();
        Ok((m * r, dm * r))
    }

    /// B(z) = z prod_{j>=1} b_{z_j}(z).
    pub fn b(&self, z: C64) -> Result<C64> {
        self.poles.b_product(z)
    }

    /// B and B'.
    pub fn b_with_derivative(&self, z: C64) -> Result<(C64, C64)> {
        let mut b = z;
        let mut db = ONE;
        for j in 1..self.poles.n() {
            let zj = self.poles.z(j);
            let f = blaschke(zj, z)?;
            let df = blaschke_deriv(zj, z);
            db = db * f + b * df;
            b *= f;
        }
        Ok((b, db))
    }

    /// Discriminant tr T / B.
    pub fn discriminant(&self, z: C64) -> Result<C64> {
        let b = self.b(z)?;
        if b.norm() < 1e-300 {
            return Err(Error::Pole(z));
        }
        Ok(self.monodromy(z)?.trace() / b)
    }

    /// Discriminant and its derivative in z.
    pub fn discriminant_with_derivative(&self, z: C64) -> Result<(C64, C64)> {
        let (t, dt) = self.monodromy_with_derivative(z)?;
        let (b, db) = self.b_with_derivative(z)?;
        if b.norm() < 1e-300 {
            return Err(Error::Pole(z));
        }
        let tr = t.trace();
        Ok((tr / b, (dt.trace() * b - tr * db) / (b * b)))
    }

    /// Discriminant on the circle as a real function of the angle, with its
    /// t-derivative.
    pub fn discriminant_on_circle(&self, t: f64) -> Result<(f64, f64)> {
        let z = C64::from_polar(1.0, t);
        let (d, dd) = self.discriminant_with_derivative(z)?;
        Ok((d.re, (dd * I * z).re))
    }

    /// B u = 2 M^theta_21 and B v = M^theta_11 - M^theta_22.
    pub fn scaled_uv(&self, z: C64) -> Result<(C64, C64)> {
        let m = self.m_theta(z)?;
        Ok((2.0 * m.m21, m.m11 - m.m22))
    }

    /// u(z) and v(z).
    pub fn uv(&self, z: C64) -> Result<(C64, C64)> {
        let b = self.b(z)?;
        if b.norm() < 1e-300 {
            return Err(Error::Pole(z));
        }
        let (bu, bv) = self.scaled_uv(z)?;
        Ok((bu / b, bv / b))
    }

    /// u, v and their angle derivatives on the circle.
    pub fn uv_on_circle_with_derivative(&self, t: f64) -> Result<[C64; 4]> {
        let z = C64::from_polar(1.0, t);
        let (m, dm) = self.m_theta_with_derivative(z)?;
        let (b, db) = self.b_with_derivative(z)?;
        let dz = I * z;
        let bu = 2.0 * m.m21;
        let dbu = 2.0 * dm.m21;
        let bv = m.m11 - m.m22;
        let dbv = dm.m11 - dm.m22;
        let u = bu / b;
        let v = bv / b;
        let du = (dbu * b - bu * db) / (b * b) * dz;
        let dv = (dbv * b - bv * db) / (b * b) * dz;
        Ok([u, v, du, dv])
    }
}

/// Values of the orthonormal rational functions and the second-kind
/// functions at one point after k steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrfState {
    pub k: usize,
    pub phi: C64,
    pub phi_star: C64,
    pub psi: C64,
    pub psi_star: C64,
}

impl OrfState {
    /// Y_k = [[psi_k, phi_k], [-psi_k^*, phi_k^*]].
    pub fn frame(&self) -> Mat2 {
        Mat2::new(self.psi, self.phi, -self.psi_star, self.phi_star)
    }
}

/// Runs the ORF recurrence for `steps` steps at `point`. `poles` is one
/// period of the ORF pole list, extended periodically; coefficients come
/// from the (phase-periodic) sequence. Returns the states 0..=steps.
pub fn orf_recurrence(seq: &VerblunskySequence, poles: &[C64], point: C64, steps: usize) -> Result<Vec<OrfState>> {
    if poles.is_empty() {
        return Err(Error::DimensionMismatch("empty pole list".into()));
    }
    let w = |k: usize| poles[k % poles.len()];
    let mut out = Vec::with_capacity(steps + 1);
    let mut s = OrfState { k: 0, phi: ONE, phi_star: ONE, psi: ONE, psi_star: ONE };
    out.push(s);
    for k in 0..steps {
        let (wk, wk1) = (w(k), w(k + 1));
        let den = ONE - wk1.conj() * point;
        if den.norm() < 1e-300 {
            return Err(Error::Pole(point));
        }
        let c = (ONE - wk.conj() * point) / den * ((1.0 - wk1.norm_sqr()).sqrt() / (1.0 - wk.norm_sqr()).sqrt());
        let m = u_raw(-seq.a(k as i64).conj()) * Mat2::diag(blaschke(wk, point)?, ONE);
        let f = m.apply([s.phi, s.phi_star]);
        let g = m.apply([s.psi, -s.psi_star]);
        s = OrfState { k: k + 1, phi: c * f[0], phi_star: c * f[1], psi: c * g[0], psi_star: -c * g[1] };
        out.push(s);
    }
    Ok(out)
}

/// F = (M11 F1 + M12)/(M21 F1 + M22).
pub fn coefficient_stripping(f1: C64, m: &Mat2) -> Result<C64> {
    let den = m.m21 * f1 + m.m22;
    let num = m.m11 * f1 + m.m12;
    if den.norm() <= 1e-14 * (num.norm() + m.max_abs()) {
        return Err(Error::DegenerateDenominator);
    }
    Ok(num / den)
}

/// Caratheodory function from a Schur function value: F = (1 + z f)/(1 - z f).
pub fn caratheodory_from_schur(z: C64, f: C64) -> C64 {
    (ONE + z * f) / (ONE - z * f)
}

/// Schur function from a Caratheodory value: z f = (F - 1)/(F + 1).
pub fn schur_from_caratheodory(z: C64, f: C64) -> C64 {
    (f - ONE) / (z * (f + ONE))
}

/// Outcome of the Schur algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurParameters {
    pub params: Vec<DiskPoint>,
    /// Set when some f_k turned out to be a unimodular constant, i.e. f is a
    /// finite Blaschke product: (index, value).
    pub terminated: Option<(usize, C64)>,
}

/// Tolerance on |a_k| for detecting a finite Blaschke product.
pub const SCHUR_STOP: f64 = 1e-9;

/// Schur algorithm. The values f_k(0) are obtained as circle means of f_k
/// on |z| = 0.8 with 192 nodes, which is exact for analytic f_k up to an
/// aliasing term of order 0.8^192; no limiting quotient at 0 is needed.
pub fn schur_algorithm(f: &dyn Fn(C64) -> C64, steps: usize) -> SchurParameters {
    const R: f64 = 0.8;
    const N: usize = 192;
    let nodes: Vec<C64> = (0..N).map(|m| C64::from_polar(R, std::f64::consts::TAU * m as f64 / N as f64)).collect();
    let mut vals: Vec<C64> = nodes.iter().map(|&z| f(z)).collect();
    let mut params = Vec::with_capacity(steps);
    for k in 0..steps {
        let a = vals.iter().sum::<C64>() / N as f64;
        if a.norm() > 1.0 - SCHUR_STOP {
            return SchurParameters { params, terminated: Some((k, a)) };
        }
        params.push(DiskPoint::new(a).expect("checked modulus"));
        for (v, z) in vals.iter_mut().zip(&nodes) {
            *v = (*v - a) / ((ONE - a.conj() * *v) * z);
        }
    }
    SchurParameters { params, terminated: None }
}

/// Inverse of the Schur algorithm: rebuilds f(z) from parameters and the
/// value of the tail f_N at z.
pub fn schur_reconstruct(params: &[DiskPoint], tail: C64, z: C64) -> C64 {
    let mut f = tail;
    for a in params.iter().rev() {
        let a = a.value();
        f = (z * f + a) / (ONE + a.conj() * z * f);
    }
    f
}

/// Density (w.r.t. dt/2pi) of the Bernstein-Szego approximant nu_k.
pub fn bernstein_szego_density(seq: &VerblunskySequence, poles: &[C64], k: usize, t: f64) -> Result<f64> {
    let z = C64::from_polar(1.0, t);
    let s = orf_recurrence(seq, poles, z, k)?[k];
    let wk = poles[k % poles.len()];
    Ok((1.0 - wk.norm_sqr()) / (z - wk).norm_sqr() / s.phi_star.norm_sqr())
}

/// Caratheodory function psi_k^*/phi_k^* of the Bernstein-Szego approximant.
pub fn bernstein_szego_caratheodory(seq: &VerblunskySequence, poles: &[C64], k: usize, z: C64) -> Result<C64> {
    let s = orf_recurrence(seq, poles, z, k)?[k];
    Ok(s.psi_star / s.phi_star)
}
