//! Small numerical helpers shared by the spectral and oracle code: bracketed
//! root finding, arc quadrature rules and dense complex polynomials.

use std::f64::consts::TAU;
use std::ops::Range;

use gauss_quad::GaussLegendre;
use roots::{find_root_brent, SimpleConvergency};

use crate::error::{Error, Result};
use crate::scalar::{C64, ZERO};

/// Brent's method on [a, b]. Fails when the endpoint values do not bracket a
/// root or the function produced a non-finite value.
pub fn brent(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, what: &str) -> Result<f64> {
    let mut bad = false;
    let g = |x: f64| {
        let y = f(x);
        if !y.is_finite() {
            bad = true;
            return 0.0;
        }
        y
    };
    let mut conv = SimpleConvergency { eps: 4.0 * f64::EPSILON * (1.0 + a.abs().max(b.abs())), max_iter: 200 };
    let out = find_root_brent(a, b, g, &mut conv);
    if bad {
        return Err(Error::NonConvergence(format!("{what}: non-finite function value")));
    }
    out.map_err(|e| Error::NonConvergence(format!("{what}: {e:?} on [{a}, {b}]")))
}

/// Closed arc of the unit circle traversed counterclockwise from `start` by
/// `length`. Angles are in [0, 2pi).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Arc {
    pub start: f64,
    pub length: f64,
}

impl Arc {
    pub fn full() -> Self {
        Arc { start: 0.0, length: TAU }
    }

    pub fn from_endpoints(start: f64, end: f64) -> Self {
        let start = start.rem_euclid(TAU);
        Arc { start, length: (end - start).rem_euclid(TAU) }
    }

    pub fn end(&self) -> f64 {
        (self.start + self.length).rem_euclid(TAU)
    }

    pub fn is_full(&self) -> bool {
        self.length >= TAU
    }

    /// Counterclockwise offset of t from the start, in [0, 2pi).
    pub fn offset(&self, t: f64) -> f64 {
        (t - self.start).rem_euclid(TAU)
    }

    pub fn contains(&self, t: f64) -> bool {
        self.is_full() || self.offset(t) <= self.length
    }

    /// Angle at fraction s of the arc, unwrapped (may exceed 2pi).
    pub fn at(&self, s: f64) -> f64 {
        self.start + s * self.length
    }
}

/// Quadrature nodes (angles) and weights for the normalized arc length
/// dt/2pi on an arc. A full circle uses the periodic trapezoid rule; a
/// proper arc uses t = mid + half cos(phi) with Gauss-Legendre in phi, which
/// absorbs square-root behaviour at both edges.
pub fn arc_rule(arc: &Arc, order: usize) -> Result<Vec<(f64, f64)>> {
    if arc.is_full() {
        let n = order.max(2);
        let w = 1.0 / n as f64;
        return Ok((0..n).map(|m| (TAU * (m as f64 + 0.5) / n as f64, w)).collect());
    }
    let gl = GaussLegendre::new(order.max(2)).map_err(|e| Error::Invalid(format!("quadrature order: {e}")))?;
    let half = 0.5 * arc.length;
    let mid = arc.start + half;
    Ok(gl
        .iter()
        .map(|&(x, w)| {
            let phi = 0.5 * std::f64::consts::PI * (x + 1.0);
            let t = mid - half * phi.cos();
            (t.rem_euclid(TAU), w * 0.5 * std::f64::consts::PI * half * phi.sin() / TAU)
        })
        .collect())
}

/// Dense polynomial, ascending coefficients.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Poly(pub Vec<C64>);

impl Poly {
    pub fn constant(c: C64) -> Self {
        Poly(vec![c])
    }

    /// c0 + c1 z.
    pub fn linear(c0: C64, c1: C64) -> Self {
        Poly(vec![c0, c1])
    }

    pub fn degree(&self) -> usize {
        self.0.iter().rposition(|c| *c != ZERO).unwrap_or(0)
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.0.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly((0..n).map(|k| self.0.get(k).copied().unwrap_or(ZERO) + o.0.get(k).copied().unwrap_or(ZERO)).collect())
    }

    pub fn scale(&self, s: C64) -> Poly {
        Poly(self.0.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut out = vec![ZERO; self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }
}

/// Aberth-Ehrlich simultaneous iteration for the `degree` zeros of a
/// function given through its logarithmic Newton step z -> f(z)/f'(z).
/// Starting points sit on a circle of the given radius with a fixed angular
/// offset so runs are reproducible.
pub fn aberth(
    degree: usize,
    radius: f64,
    mut newton: impl FnMut(C64) -> C64,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<C64>> {
    let mut z: Vec<C64> =
        (0..degree).map(|k| C64::from_polar(radius, TAU * k as f64 / degree as f64 + 0.4 + 0.01 * k as f64)).collect();
    for _ in 0..max_iter {
        let mut worst = 0.0f64;
        for i in 0..degree {
            let ratio = newton(z[i]);
            let mut s = ZERO;
            for j in 0..degree {
                if j != i {
                    s += C64::from(1.0) / (z[i] - z[j]);
                }
            }
            let step = ratio / (C64::from(1.0) - ratio * s);
            if step.is_finite() {
                z[i] -= step;
                worst = worst.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if worst < tol {
            return Ok(z);
        }
    }
    Err(Error::NonConvergence(format!("Aberth iteration after {max_iter} sweeps")))
}

impl Poly {
    /// Value and derivative by Horner's scheme.
    pub fn eval_with_derivative(&self, z: C64) -> (C64, C64) {
        let mut p = ZERO;
        let mut dp = ZERO;
        for &c in self.0.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// All zeros, Aberth-Ehrlich followed by Newton polishing.
    pub fn roots(&self) -> Result<Vec<C64>> {
        let d = self.degree();
        if d == 0 {
            return Ok(Vec::new());
        }
        let lead = self.0[d];
        let low = self.0.iter().position(|c| *c != ZERO).unwrap_or(0);
        let mut out = vec![ZERO; low];
        let trimmed = Poly(self.0[low..=d].iter().map(|c| c / lead).collect());
        let m = d - low;
        if m == 0 {
            return Ok(out);
        }
        let radius = trimmed.0[0].norm().powf(1.0 / m as f64).max(1e-3);
        let roots = aberth(
            m,
            radius,
            |z| {
                let (p, dp) = trimmed.eval_with_derivative(z);
                p / dp
            },
            1e-15,
            500,
        )?;
        for mut r in roots {
            for _ in 0..3 {
                let (p, dp) = trimmed.eval_with_derivative(r);
                let step = p / dp;
                if !step.is_finite() || step.norm() < 1e-17 * (1.0 + r.norm()) {
                    break;
                }
                r -= step;
            }
            out.push(r);
        }
        Ok(out)
    }
}

/// 2x2 matrix of polynomials.
#[derive(Debug, Clone)]
pub struct PolyMat2(pub [[Poly; 2]; 2]);

impl PolyMat2 {
    pub fn constant(m: &crate::scalar::Mat2) -> Self {
        let c = Poly::constant;
        PolyMat2([[c(m.m11), c(m.m12)], [c(m.m21), c(m.m22)]])
    }

    pub fn diag(a: Poly, b: Poly) -> Self {
        let z = Poly::constant(ZERO);
        PolyMat2([[a, z.clone()], [z, b]])
    }

    pub fn mul(&self, o: &PolyMat2) -> PolyMat2 {
        let e = |i: usize, j: usize| self.0[i][0].mul(&o.0[0][j]).add(&self.0[i][1].mul(&o.0[1][j]));
        PolyMat2([[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]])
    }
}

/// Equispaced offset grid on [0, 2pi).
pub fn circle_grid(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |m| TAU * (m as f64 + 0.5) / n as f64)
}

/// Interior sample angles of an arc, avoiding the endpoints.
pub fn arc_samples(arc: &Arc, count: usize, margin: f64) -> Vec<f64> {
    let r: Range<f64> = margin..1.0 - margin;
    (0..count)
        .map(|m| {
            let s = r.start + (r.end - r.start) * (m as f64 + 0.5) / count as f64;
            arc.at(s).rem_euclid(TAU)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_cos_root() {
        let r = brent(f64::cos, 1.0, 2.0, "cos").unwrap();
        assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
        assert!(brent(f64::cos, 0.0, 0.5, "cos").is_err());
    }

    #[test]
    fn arc_rule_integrates_sqrt_edges() {
        // integral of sqrt((t-a)(b-t)) over [a,b] = pi (b-a)^2 / 8
        let arc = Arc::from_endpoints(5.5, 1.0);
        let (a, b) = (arc.start, arc.start + arc.length);
        let rule = arc_rule(&arc, 40).unwrap();
        let s: f64 = rule
            .iter()
            .map(|&(t, w)| {
                let u = arc.offset(t) + a;
                w * ((u - a) * (b - u)).max(0.0).sqrt()
            })
            .sum();
        let exact = std::f64::consts::PI * (b - a).powi(2) / 8.0 / TAU;
        assert!((s - exact).abs() < 1e-13);
        let mass: f64 = arc_rule(&Arc::full(), 16).unwrap().iter().map(|p| p.1).sum();
        assert!((mass - 1.0).abs() < 1e-15);
    }

    #[test]
    fn poly_ops() {
        let p = Poly::linear(C64::new(1.0, 0.0), C64::new(2.0, 0.0));
        let q = p.mul(&p);
        assert_eq!(q.degree(), 2);
        let z = C64::new(0.3, -0.2);
        assert!((q.eval(z) - p.eval(z) * p.eval(z)).norm() < 1e-15);
        assert!(Arc::from_endpoints(6.0, 0.5).contains(0.1));
        // (z - 1)(z + 2i)(z - 0.5) z^2
        let r = [C64::new(1.0, 0.0), C64::new(0.0, -2.0), C64::new(0.5, 0.0), ZERO, ZERO];
        let mut poly = Poly::constant(C64::new(1.0, 0.0));
        for &x in &r {
            poly = poly.mul(&Poly::linear(-x, C64::new(1.0, 0.0)));
        }
        let mut found = poly.roots().unwrap();
        assert_eq!(found.len(), 5);
        for x in r {
            let k = (0..found.len()).min_by(|&a, &b| (found[a] - x).norm().total_cmp(&(found[b] - x).norm())).unwrap();
            assert!((found[k] - x).norm() < 1e-12, "{x}");
            found.remove(k);
        }
        assert!(!Arc::from_endpoints(6.0, 0.5).contains(3.0));
    }
}
