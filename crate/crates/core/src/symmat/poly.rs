//! Real polynomials, Sturm chains, and the pencil polynomial `t ↦ det(tI + A)`.

use super::SymMatrix;
use crate::error::{Error, Result};

/// Coefficients below this (relative to the largest coefficient of the dividend) are
/// treated as zero when building a Sturm chain.
const STURM_ZERO: f64 = 1e-10;

/// Real polynomial with ascending coefficients: `c[0] + c[1] t + … + c[d] tᵈ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        let mut p = Self {
            coeffs: coeffs.into(),
        };
        p.trim(0.0);
        p
    }

    pub fn from_roots(roots: &[f64]) -> Self {
        let mut p = Poly::new(vec![1.0]);
        for &r in roots {
            p = p.mul(&Poly::new(vec![-r, 1.0]));
        }
        p
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree; the zero polynomial reports degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap_or(&0.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::new(vec![0.0]);
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect::<Vec<_>>(),
        )
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect::<Vec<_>>())
    }

    fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |a, c| a.max(c.abs()))
    }

    /// Drops leading coefficients with magnitude `<= tol`, keeping at least one.
    fn trim(&mut self, tol: f64) {
        while self.coeffs.len() > 1 && self.coeffs.last().is_some_and(|c| c.abs() <= tol) {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(0.0);
        }
    }

    /// Quotient and remainder of `self / divisor`.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        let mut r = self.coeffs.clone();
        let d = divisor.degree();
        let lead = divisor.leading();
        let mut q = vec![0.0; r.len().saturating_sub(d).max(1)];
        while r.len() > d && r.len() > 1 {
            let shift = r.len() - 1 - d;
            let c = r[r.len() - 1] / lead;
            q[shift] = c;
            for (k, &dc) in divisor.coeffs.iter().enumerate() {
                r[shift + k] -= c * dc;
            }
            r.pop();
        }
        (Poly::new(q), Poly::new(r))
    }

    fn rem(&self, divisor: &Poly) -> Poly {
        self.div_rem(divisor).1
    }

    /// Cauchy bound: every root satisfies `|t| < 1 + max |cᵢ / c_d|`.
    pub fn cauchy_bound(&self) -> f64 {
        let lead = self.leading();
        1.0 + self.coeffs[..self.degree()]
            .iter()
            .fold(0.0f64, |a, c| a.max((c / lead).abs()))
    }
}

/// Sturm sequence `p, p', −rem(p, p'), …` terminated at the (numerical) gcd.
#[derive(Debug, Clone)]
pub struct SturmChain {
    chain: Vec<Poly>,
}

impl SturmChain {
    pub fn new(p: &Poly) -> Result<Self> {
        if p.degree() == 0 {
            return Err(Error::ConstantPolynomial);
        }
        let normalize = |q: Poly| {
            let m = q.max_abs();
            if m > 0.0 {
                q.scale(1.0 / m)
            } else {
                q
            }
        };
        let mut chain = vec![normalize(p.clone()), normalize(p.derivative())];
        loop {
            let k = chain.len();
            if chain[k - 1].degree() == 0 {
                break;
            }
            let mut r = chain[k - 2].rem(&chain[k - 1]).scale(-1.0);
            let scale = chain[k - 2].max_abs();
            r.trim(STURM_ZERO * scale);
            if r.degree() == 0 && r.coeffs[0].abs() <= STURM_ZERO * scale {
                break;
            }
            chain.push(normalize(r));
        }
        Ok(Self { chain })
    }

    /// Number of sign changes of the chain at `t`, zeros skipped.
    pub fn sign_changes(&self, t: f64) -> usize {
        count_changes(self.chain.iter().map(|q| q.eval(t)))
    }

    fn sign_changes_at_infinity(&self, positive: bool) -> usize {
        count_changes(self.chain.iter().map(|q| {
            let s = q.leading();
            if positive || q.degree() % 2 == 0 {
                s
            } else {
                -s
            }
        }))
    }

    /// Distinct real roots in `(a, b]`.
    pub fn count_in(&self, a: f64, b: f64) -> usize {
        self.sign_changes(a).saturating_sub(self.sign_changes(b))
    }

    pub fn count_real(&self) -> usize {
        self.sign_changes_at_infinity(false)
            .saturating_sub(self.sign_changes_at_infinity(true))
    }

    /// Distinct roots of the polynomial: degree minus the degree of the gcd.
    pub fn expected_distinct(&self) -> usize {
        self.chain[0].degree() - self.gcd().degree()
    }

    /// Last chain element, the numerical gcd of the polynomial and its derivative.
    pub fn gcd(&self) -> &Poly {
        self.chain.last().expect("chain has at least two elements")
    }
}

fn count_changes(values: impl Iterator<Item = f64>) -> usize {
    let mut last = 0.0f64;
    let mut changes = 0;
    for v in values {
        if v == 0.0 {
            continue;
        }
        if last != 0.0 && (v > 0.0) != (last > 0.0) {
            changes += 1;
        }
        last = v;
    }
    changes
}

/// Largest real root of a real-rooted polynomial given by ascending coefficients.
///
/// The root is bracketed by the Cauchy bound and located by bisection on Sturm counts.
/// A chain that sees fewer real roots than the polynomial has distinct roots means some
/// roots are complex, reported as [`Error::NotHyperbolic`].
pub fn sturm_largest_root(coeffs: &[f64]) -> Result<f64> {
    let p = Poly::new(coeffs.to_vec());
    if p.degree() == 0 {
        return Err(Error::ConstantPolynomial);
    }
    let p = if p.leading() < 0.0 { p.scale(-1.0) } else { p };
    let chain = SturmChain::new(&p)?;
    let found = chain.count_real();
    let expected = chain.expected_distinct();
    if found < expected || found == 0 {
        return Err(Error::NotHyperbolic { found, expected });
    }
    // Repeated roots are only resolved to about sqrt(eps) by sign tests on p itself;
    // the square-free part has the same roots, all simple.
    let chain = if chain.gcd().degree() > 0 {
        SturmChain::new(&p.div_rem(chain.gcd()).0)?
    } else {
        chain
    };
    let bound = p.cauchy_bound();
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if chain.count_in(mid, hi) > 0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi.abs().max(1.0) {
            break;
        }
    }
    // no root lies above `hi`, so it is the conservative end of the bracket
    Ok(hi)
}

/// `t ↦ det(tI + A)` as a polynomial, via Householder tridiagonalization.
pub fn char_poly_shifted(a: &SymMatrix) -> Poly {
    let (d, e) = tridiagonalize(a);
    let mut prev = Poly::new(vec![1.0]);
    let mut cur = Poly::new(vec![d[0], 1.0]);
    for k in 1..d.len() {
        let lin = Poly::new(vec![d[k], 1.0]);
        let next_coeffs = {
            let a = lin.mul(&cur);
            let b = prev.scale(e[k - 1] * e[k - 1]);
            let len = a.coeffs.len().max(b.coeffs.len());
            (0..len)
                .map(|i| {
                    a.coeffs.get(i).copied().unwrap_or(0.0) - b.coeffs.get(i).copied().unwrap_or(0.0)
                })
                .collect::<Vec<_>>()
        };
        prev = cur;
        cur = Poly::new(next_coeffs);
    }
    cur
}

/// Householder reduction of a symmetric matrix to tridiagonal form `(diag, offdiag)`.
fn tridiagonalize(a: &SymMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = a.dim();
    let mut m = a.to_rows();
    for k in 0..n.saturating_sub(2) {
        let alpha_sq: f64 = ((k + 1)..n).map(|i| m[i][k] * m[i][k]).sum();
        if alpha_sq == 0.0 {
            continue;
        }
        let x0 = m[k + 1][k];
        let alpha = if x0 > 0.0 { -alpha_sq.sqrt() } else { alpha_sq.sqrt() };
        let mut v = vec![0.0; n];
        v[k + 1] = x0 - alpha;
        for i in (k + 2)..n {
            v[i] = m[i][k];
        }
        let vnorm_sq: f64 = v.iter().map(|x| x * x).sum();
        if vnorm_sq == 0.0 {
            continue;
        }
        // m <- H m H with H = I - 2 v vᵀ / (vᵀ v)
        let beta = 2.0 / vnorm_sq;
        let p: Vec<f64> = (0..n)
            .map(|i| beta * (0..n).map(|j| m[i][j] * v[j]).sum::<f64>())
            .collect();
        let kappa = 0.5 * beta * v.iter().zip(&p).map(|(a, b)| a * b).sum::<f64>();
        let q: Vec<f64> = p.iter().zip(&v).map(|(pi, vi)| pi - kappa * vi).collect();
        for i in 0..n {
            for j in 0..n {
                m[i][j] -= v[i] * q[j] + q[i] * v[j];
            }
        }
    }
    let d = (0..n).map(|i| m[i][i]).collect();
    let e = (0..n.saturating_sub(1)).map(|i| m[i + 1][i]).collect();
    (d, e)
}
