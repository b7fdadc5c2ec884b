//! Truncated multivariate Taylor arithmetic ("jets").
//!
//! A jet of degree d in n variables stores the coefficients of a polynomial
//! truncated past total degree d. Arithmetic on jets of coordinate functions
//! produces exact derivatives of any composite expression at the expansion
//! point — no finite differencing anywhere.

use std::sync::Arc;

use crate::{Error, Result};

/// Shared context: number of variables, truncation degree, and the exponent
/// table with a multiplication index.
#[derive(Debug)]
pub struct JetCtxInner {
    pub n_vars: usize,
    pub degree: usize,
    /// All exponent multi-indices with total degree ≤ degree, graded
    /// lexicographic (degree-major) order; index 0 is the constant term.
    pub exponents: Vec<Vec<usize>>,
    /// exponent → slot lookup.
    index: std::collections::HashMap<Vec<usize>, usize>,
}

pub type JetCtx = Arc<JetCtxInner>;

/// Build a context for `n_vars` variables truncated past total degree `degree`.
pub fn jet_ctx(n_vars: usize, degree: usize) -> JetCtx {
    let mut exponents = Vec::new();
    let mut current = vec![vec![0usize; n_vars]];
    exponents.extend(current.iter().cloned());
    for _ in 1..=degree {
        let mut next = Vec::new();
        for e in &current {
            // raise the last nonzero position or later, to enumerate each
            // multi-index exactly once
            let start = e
                .iter()
                .rposition(|&x| x > 0)
                .unwrap_or(0);
            for i in start..n_vars {
                let mut f = e.clone();
                f[i] += 1;
                next.push(f);
            }
        }
        exponents.extend(next.iter().cloned());
        current = next;
    }
    let index = exponents
        .iter()
        .enumerate()
        .map(|(i, e)| (e.clone(), i))
        .collect();
    Arc::new(JetCtxInner {
        n_vars,
        degree,
        exponents,
        index,
    })
}

impl JetCtxInner {
    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn slot(&self, exponent: &[usize]) -> Option<usize> {
        self.index.get(exponent).copied()
    }
}

/// A truncated Taylor series with real coefficients over a shared context.
#[derive(Debug, Clone)]
pub struct Jet {
    pub ctx: JetCtx,
    pub coeffs: Vec<f64>,
}

impl Jet {
    pub fn constant(ctx: &JetCtx, value: f64) -> Self {
        let mut coeffs = vec![0.0; ctx.len()];
        coeffs[0] = value;
        Self {
            ctx: ctx.clone(),
            coeffs,
        }
    }

    /// The jet of the i-th coordinate function around a point with i-th
    /// coordinate `value`: value + (zᵢ − center).
    pub fn variable(ctx: &JetCtx, i: usize, value: f64) -> Self {
        let mut jet = Self::constant(ctx, value);
        if ctx.degree >= 1 {
            let mut e = vec![0usize; ctx.n_vars];
            e[i] = 1;
            let slot = ctx.slot(&e).expect("degree ≥ 1 context has linear slots");
            jet.coeffs[slot] = 1.0;
        }
        jet
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Coefficient of the monomial with the given exponent (not yet divided
    /// by factorials, i.e. the Taylor coefficient itself).
    pub fn coeff(&self, exponent: &[usize]) -> f64 {
        self.ctx.slot(exponent).map_or(0.0, |s| self.coeffs[s])
    }

    /// Partial derivative ∂/∂zᵢ evaluated at the expansion point:
    /// the linear coefficient directly.
    pub fn partial(&self, i: usize) -> f64 {
        let mut e = vec![0usize; self.ctx.n_vars];
        e[i] = 1;
        self.coeff(&e)
    }

    /// ∂^|μ|/∂z_μ at the expansion point, i.e. coefficient × μ!.
    pub fn derivative(&self, exponent: &[usize]) -> f64 {
        let fact: f64 = exponent
            .iter()
            .map(|&k| (1..=k).map(|j| j as f64).product::<f64>())
            .product();
        self.coeff(exponent) * fact
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let mut coeffs = self.coeffs.clone();
        for (c, o) in coeffs.iter_mut().zip(&other.coeffs) {
            *c += o;
        }
        Jet {
            ctx: self.ctx.clone(),
            coeffs,
        }
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        let mut coeffs = self.coeffs.clone();
        for (c, o) in coeffs.iter_mut().zip(&other.coeffs) {
            *c -= o;
        }
        Jet {
            ctx: self.ctx.clone(),
            coeffs,
        }
    }

    pub fn neg(&self) -> Jet {
        Jet {
            ctx: self.ctx.clone(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            ctx: self.ctx.clone(),
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let ctx = &self.ctx;
        let mut coeffs = vec![0.0; ctx.len()];
        for (i, ei) in ctx.exponents.iter().enumerate() {
            let ci = self.coeffs[i];
            if ci == 0.0 {
                continue;
            }
            let di: usize = ei.iter().sum();
            for (j, ej) in ctx.exponents.iter().enumerate() {
                let cj = other.coeffs[j];
                if cj == 0.0 {
                    continue;
                }
                let dj: usize = ej.iter().sum();
                if di + dj > ctx.degree {
                    continue;
                }
                let sum: Vec<usize> = ei.iter().zip(ej).map(|(a, b)| a + b).collect();
                let slot = ctx.slot(&sum).expect("sum within degree bound");
                coeffs[slot] += ci * cj;
            }
        }
        Jet {
            ctx: ctx.clone(),
            coeffs,
        }
    }

    /// The purely nilpotent part (constant term removed).
    fn nilpotent(&self) -> Jet {
        let mut j = self.clone();
        j.coeffs[0] = 0.0;
        j
    }

    /// 1/self, requiring a nonzero constant term. Computed by the geometric
    /// series in the nilpotent part, which terminates at the degree bound.
    pub fn recip(&self) -> Result<Jet> {
        let c = self.value();
        if c == 0.0 || !c.is_finite() {
            return Err(Error::Domain(
                "jet reciprocal needs a nonzero finite constant term".into(),
            ));
        }
        // self = c(1 + u), 1/self = (1/c) Σ (−u)^k
        let u = self.nilpotent().scale(1.0 / c);
        let mut sum = Jet::constant(&self.ctx, 1.0);
        let mut power = Jet::constant(&self.ctx, 1.0);
        for _ in 0..self.ctx.degree {
            power = power.mul(&u).neg();
            sum = sum.add(&power);
        }
        Ok(sum.scale(1.0 / c))
    }

    /// √self, requiring a positive constant term. Binomial series in the
    /// nilpotent part.
    pub fn sqrt(&self) -> Result<Jet> {
        let c = self.value();
        if c <= 0.0 || !c.is_finite() {
            return Err(Error::Domain(
                "jet square root needs a positive constant term".into(),
            ));
        }
        let u = self.nilpotent().scale(1.0 / c);
        // (1+u)^{1/2} = Σ C(1/2, k) u^k
        let mut sum = Jet::constant(&self.ctx, 1.0);
        let mut power = Jet::constant(&self.ctx, 1.0);
        let mut binom = 1.0;
        for k in 1..=self.ctx.degree {
            binom *= (0.5 - (k as f64 - 1.0)) / k as f64;
            power = power.mul(&u);
            sum = sum.add(&power.scale(binom));
        }
        Ok(sum.scale(c.sqrt()))
    }

    /// sin(self): Taylor in the nilpotent part around the constant term.
    pub fn sin(&self) -> Jet {
        self.trig(self.value().sin(), self.value().cos())
    }

    /// cos(self), same scheme as `sin`.
    pub fn cos(&self) -> Jet {
        self.trig(self.value().cos(), -self.value().sin())
    }

    /// Σ h^k/k! · f^{(k)}(c) for f with the (f(c), f′(c), −f(c), −f′(c), …)
    /// derivative cycle shared by sine and cosine.
    fn trig(&self, f0: f64, f1: f64) -> Jet {
        let h = self.nilpotent();
        let cycle = [f0, f1, -f0, -f1];
        let mut sum = Jet::constant(&self.ctx, f0);
        let mut power = Jet::constant(&self.ctx, 1.0);
        let mut fact = 1.0;
        for k in 1..=self.ctx.degree {
            power = power.mul(&h);
            fact *= k as f64;
            sum = sum.add(&power.scale(cycle[k % 4] / fact));
        }
        sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn context_counts_match_binomials() {
        // #multi-indices of degree ≤ d in n vars = C(n+d, d)
        let ctx = jet_ctx(3, 4);
        assert_eq!(ctx.len(), 35);
        let ctx = jet_ctx(2, 6);
        assert_eq!(ctx.len(), 28);
        // every exponent appears exactly once
        let mut sorted = ctx.exponents.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), ctx.len());
    }

    #[test]
    fn polynomial_derivatives_are_exact() {
        // f(x,y) = x²y + 3y³ − 2x at (1, −2)
        let ctx = jet_ctx(2, 3);
        let x = Jet::variable(&ctx, 0, 1.0);
        let y = Jet::variable(&ctx, 1, -2.0);
        let f = x.mul(&x).mul(&y).add(&y.mul(&y).mul(&y).scale(3.0)).sub(&x.scale(2.0));
        assert_eq!(f.value(), 1.0 * 1.0 * -2.0 + 3.0 * -8.0 - 2.0);
        assert_eq!(f.partial(0), 2.0 * 1.0 * -2.0 - 2.0); // 2xy − 2
        assert_eq!(f.partial(1), 1.0 + 9.0 * 4.0); // x² + 9y²
        assert_eq!(f.derivative(&[1, 1]), 2.0); // ∂²f/∂x∂y = 2x
        assert_eq!(f.derivative(&[0, 3]), 18.0); // 6·3
        assert_eq!(f.derivative(&[2, 1]), 2.0);
    }

    #[test]
    fn recip_matches_calculus() {
        // g = 1/(1 + x + y²) at (0.3, −0.5): check value and first partials
        let ctx = jet_ctx(2, 4);
        let x = Jet::variable(&ctx, 0, 0.3);
        let y = Jet::variable(&ctx, 1, -0.5);
        let denom = Jet::constant(&ctx, 1.0).add(&x).add(&y.mul(&y));
        let g = denom.recip().unwrap();
        let d = 1.0 + 0.3 + 0.25;
        assert!((g.value() - 1.0 / d).abs() < 1e-15);
        assert!((g.partial(0) + 1.0 / (d * d)).abs() < 1e-14);
        assert!((g.partial(1) - 1.0 / (d * d)).abs() < 1e-14); // −2y/d², y = −1/2
        // product recovers the constant 1
        let one = g.mul(&denom);
        assert!((one.value() - 1.0).abs() < 1e-14);
        for c in &one.coeffs[1..] {
            assert!(c.abs() < 1e-13);
        }
    }

    #[test]
    fn sqrt_squares_back() {
        let ctx = jet_ctx(3, 5);
        let x = Jet::variable(&ctx, 0, 0.2);
        let y = Jet::variable(&ctx, 1, -0.1);
        let z = Jet::variable(&ctx, 2, 0.4);
        let f = Jet::constant(&ctx, 2.0)
            .add(&x.mul(&y))
            .add(&z.mul(&z).scale(0.7))
            .add(&x);
        let r = f.sqrt().unwrap();
        let back = r.mul(&r);
        for (a, b) in back.coeffs.iter().zip(&f.coeffs) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sqrt_derivative_closed_form() {
        // h = √(1 − x² − y²): ∂h/∂x = −x/√(1−x²−y²)
        let ctx = jet_ctx(2, 3);
        let (px, py) = (0.3, 0.4);
        let x = Jet::variable(&ctx, 0, px);
        let y = Jet::variable(&ctx, 1, py);
        let h = Jet::constant(&ctx, 1.0)
            .sub(&x.mul(&x))
            .sub(&y.mul(&y))
            .sqrt()
            .unwrap();
        let root = (1.0 - px * px - py * py).sqrt();
        assert!((h.value() - root).abs() < 1e-15);
        assert!((h.partial(0) + px / root).abs() < 1e-14);
        assert!((h.partial(1) + py / root).abs() < 1e-14);
    }

    #[test]
    fn domain_errors_are_reported() {
        let ctx = jet_ctx(1, 2);
        let zero = Jet::constant(&ctx, 0.0);
        assert!(zero.recip().is_err());
        let neg = Jet::constant(&ctx, -1.0);
        assert!(neg.sqrt().is_err());
    }
}
