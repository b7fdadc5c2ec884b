//! Matrix-valued functions of space and their truncated Taylor expansions.
//!
//! A [`MatrixField`] is a finite sum Σ Mᵢ·fᵢ(z) of constant matrices weighted
//! by scalar expressions; connection coefficients and curvature components are
//! stored this way. A [`MatrixTaylor`] is the degree-truncated Taylor series
//! of such a field at a chosen center, with matrix coefficients, supporting
//! the product/bracket/derivative calculus the expansion functionals need.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::algebra::{zero, Mat};
use crate::expr::Expr;
use crate::jet::{jet_ctx, JetCtx};
use crate::Result;

/// Σ coefficient·expression, a 𝔤-valued function on the chart.
#[derive(Debug, Clone)]
pub struct MatrixField {
    pub q: usize,
    pub n_vars: usize,
    pub terms: Vec<(Mat, Expr)>,
}

impl MatrixField {
    pub fn zero(q: usize, n_vars: usize) -> Self {
        Self {
            q,
            n_vars,
            terms: Vec::new(),
        }
    }

    pub fn constant(m: Mat, n_vars: usize) -> Self {
        let q = m.nrows();
        Self {
            q,
            n_vars,
            terms: vec![(m, Expr::one())],
        }
    }

    pub fn term(m: Mat, f: Expr, n_vars: usize) -> Self {
        let q = m.nrows();
        let terms = if f.is_zero() { Vec::new() } else { vec![(m, f)] };
        Self { q, n_vars, terms }
    }

    pub fn push(&mut self, m: Mat, f: Expr) {
        if !f.is_zero() {
            self.terms.push((m, f));
        }
    }

    pub fn eval(&self, point: &[f64]) -> Result<Mat> {
        let mut out = zero(self.q);
        for (m, f) in &self.terms {
            out += m * Complex64::new(f.eval(point)?, 0.0);
        }
        Ok(out)
    }

    /// Termwise symbolic partial derivative.
    pub fn diff(&self, i: usize) -> MatrixField {
        let mut out = MatrixField::zero(self.q, self.n_vars);
        for (m, f) in &self.terms {
            out.push(m.clone(), f.diff(i));
        }
        out
    }

    pub fn add(&self, other: &MatrixField) -> MatrixField {
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        out
    }

    pub fn neg(&self) -> MatrixField {
        let mut out = MatrixField::zero(self.q, self.n_vars);
        for (m, f) in &self.terms {
            out.push(-m, f.clone());
        }
        out
    }

    pub fn scale_expr(&self, g: &Expr) -> MatrixField {
        let mut out = MatrixField::zero(self.q, self.n_vars);
        for (m, f) in &self.terms {
            out.push(m.clone(), f.clone() * g.clone());
        }
        out
    }

    /// Pointwise commutator [self, other] expanded term by term.
    pub fn bracket(&self, other: &MatrixField) -> MatrixField {
        let mut out = MatrixField::zero(self.q, self.n_vars);
        for (ma, fa) in &self.terms {
            for (mb, fb) in &other.terms {
                out.push(ma * mb - mb * ma, fa.clone() * fb.clone());
            }
        }
        out
    }

    /// Taylor-expand at `center` through total degree `degree`, exactly
    /// (via jet evaluation of each scalar factor).
    pub fn taylor(&self, center: &[f64], degree: usize) -> Result<MatrixTaylor> {
        let ctx = jet_ctx(self.n_vars, degree);
        let mut out = MatrixTaylor::zero(self.q, ctx.clone());
        for (m, f) in &self.terms {
            let j = f.eval_jet(&ctx, center)?;
            for (slot, &c) in j.coeffs.iter().enumerate() {
                if c != 0.0 {
                    out.add_coeff(&ctx.exponents[slot].clone(), &(m * Complex64::new(c, 0.0)));
                }
            }
        }
        Ok(out)
    }
}

/// Matrix-coefficient polynomial in (z − center), truncated past a total
/// degree. Exponents index powers of the displacement variables.
#[derive(Debug, Clone)]
pub struct MatrixTaylor {
    pub q: usize,
    pub ctx: JetCtx,
    pub coeffs: BTreeMap<Vec<usize>, Mat>,
}

impl MatrixTaylor {
    pub fn zero(q: usize, ctx: JetCtx) -> Self {
        Self {
            q,
            ctx,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn add_coeff(&mut self, exponent: &[usize], m: &Mat) {
        let entry = self
            .coeffs
            .entry(exponent.to_vec())
            .or_insert_with(|| zero(self.q));
        *entry += m;
    }

    pub fn coeff(&self, exponent: &[usize]) -> Mat {
        self.coeffs
            .get(exponent)
            .cloned()
            .unwrap_or_else(|| zero(self.q))
    }

    /// The value at the center (constant coefficient).
    pub fn value0(&self) -> Mat {
        self.coeff(&vec![0; self.ctx.n_vars])
    }

    pub fn add(&self, other: &MatrixTaylor) -> MatrixTaylor {
        let mut out = self.clone();
        for (e, m) in &other.coeffs {
            out.add_coeff(e, m);
        }
        out
    }

    pub fn scale(&self, s: f64) -> MatrixTaylor {
        let mut out = MatrixTaylor::zero(self.q, self.ctx.clone());
        for (e, m) in &self.coeffs {
            out.add_coeff(e, &(m * Complex64::new(s, 0.0)));
        }
        out
    }

    /// Truncated product of series (matrix product on coefficients).
    pub fn mul(&self, other: &MatrixTaylor) -> MatrixTaylor {
        let degree = self.ctx.degree;
        let mut out = MatrixTaylor::zero(self.q, self.ctx.clone());
        for (ea, ma) in &self.coeffs {
            let da: usize = ea.iter().sum();
            for (eb, mb) in &other.coeffs {
                let db: usize = eb.iter().sum();
                if da + db > degree {
                    continue;
                }
                let sum: Vec<usize> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_coeff(&sum, &(ma * mb));
            }
        }
        out
    }

    pub fn bracket(&self, other: &MatrixTaylor) -> MatrixTaylor {
        self.mul(other).add(&other.mul(self).scale(-1.0))
    }

    /// Series of ∂/∂zᵢ: shift exponents down and carry the power factor.
    /// The result is exact through degree − 1.
    pub fn partial(&self, i: usize) -> MatrixTaylor {
        let mut out = MatrixTaylor::zero(self.q, self.ctx.clone());
        for (e, m) in &self.coeffs {
            if e[i] == 0 {
                continue;
            }
            let mut f = e.clone();
            f[i] -= 1;
            out.add_coeff(&f, &(m * Complex64::new(e[i] as f64, 0.0)));
        }
        out
    }

    /// Evaluate the truncated polynomial at displacement `dz` from the center.
    pub fn eval_displacement(&self, dz: &[f64]) -> Mat {
        let mut out = zero(self.q);
        for (e, m) in &self.coeffs {
            let mono: f64 = e
                .iter()
                .zip(dz)
                .map(|(&k, &x)| x.powi(k as i32))
                .product();
            out += m * Complex64::new(mono, 0.0);
        }
        out
    }

    /// Drop all terms except total degree `m` (homogeneous component).
    pub fn homogeneous(&self, m_deg: usize) -> MatrixTaylor {
        let mut out = MatrixTaylor::zero(self.q, self.ctx.clone());
        for (e, m) in &self.coeffs {
            if e.iter().sum::<usize>() == m_deg {
                out.add_coeff(e, m);
            }
        }
        out
    }

    /// Drop all terms with weighted degree Σ wᵢeᵢ ≠ m (for anisotropic
    /// dilations).
    pub fn weighted_homogeneous(&self, weights: &[u32], m_deg: usize) -> MatrixTaylor {
        let mut out = MatrixTaylor::zero(self.q, self.ctx.clone());
        for (e, m) in &self.coeffs {
            let w: usize = e.iter().zip(weights).map(|(&k, &w)| k * w as usize).sum();
            if w == m_deg {
                out.add_coeff(e, m);
            }
        }
        out
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs
            .values()
            .map(crate::algebra::frob_norm)
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{frob_norm, identity, MatrixAlgebra};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_field() -> MatrixField {
        let alg = MatrixAlgebra::su2();
        let z0 = Expr::coord(0);
        let z1 = Expr::coord(1);
        let mut f = MatrixField::zero(2, 2);
        f.push(alg.basis[0].clone(), z0.clone() * z0.clone() * z1.clone());
        f.push(alg.basis[1].clone(), (Expr::one() + z1.clone() * z1).sqrt());
        f.push(alg.basis[2].clone(), z0);
        f
    }

    #[test]
    fn field_eval_and_diff_consistent() {
        let f = sample_field();
        let p = [0.4, -0.3];
        let h = 1e-6;
        for i in 0..2 {
            let mut pp = p;
            let mut pm = p;
            pp[i] += h;
            pm[i] -= h;
            let fd = (f.eval(&pp).unwrap() - f.eval(&pm).unwrap()) / Complex64::new(2.0 * h, 0.0);
            let sym = f.diff(i).eval(&p).unwrap();
            assert!(frob_norm(&(fd - sym)) < 1e-8);
        }
    }

    #[test]
    fn taylor_reproduces_field_locally() {
        let f = sample_field();
        let center = [0.2, 0.1];
        let t = f.taylor(&center, 6).unwrap();
        let dz = [0.03, -0.02];
        let point = [center[0] + dz[0], center[1] + dz[1]];
        let direct = f.eval(&point).unwrap();
        let series = t.eval_displacement(&dz);
        assert!(frob_norm(&(direct - series)) < 1e-12);
        // constant term is the value at the center
        assert!(frob_norm(&(t.value0() - f.eval(&center).unwrap())) < 1e-14);
    }

    #[test]
    fn taylor_partial_matches_field_diff() {
        let f = sample_field();
        let center = [0.2, 0.1];
        let t = f.taylor(&center, 5).unwrap();
        for i in 0..2 {
            let a = t.partial(i).value0();
            let b = f.diff(i).eval(&center).unwrap();
            assert!(frob_norm(&(a - b)) < 1e-13);
        }
        // second derivatives through the series
        let a = t.partial(0).partial(1).value0();
        let b = f.diff(0).diff(1).eval(&center).unwrap();
        assert!(frob_norm(&(a - b)) < 1e-12);
    }

    #[test]
    fn taylor_product_matches_pointwise_product() {
        let alg = MatrixAlgebra::su2();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ma = alg.random_element(&mut rng, 1.0);
        let mb = alg.random_element(&mut rng, 1.0);
        let fa = MatrixField::term(ma, Expr::coord(0) * Expr::coord(0), 2);
        let fb = MatrixField::term(mb, Expr::one() + Expr::coord(1), 2);
        let center = [0.3, -0.2];
        let ta = fa.taylor(&center, 4).unwrap();
        let tb = fb.taylor(&center, 4).unwrap();
        let prod = ta.mul(&tb);
        let dz = [0.01, 0.02];
        let point = [center[0] + dz[0], center[1] + dz[1]];
        let want = fa.eval(&point).unwrap() * fb.eval(&point).unwrap();
        assert!(frob_norm(&(prod.eval_displacement(&dz) - want)) < 1e-12);
    }

    #[test]
    fn bracket_is_antisymmetric_and_matches_pointwise() {
        let f = sample_field();
        let g = MatrixField::constant(identity(2), 2).add(&f.diff(0));
        let p = [0.15, 0.25];
        let fb = f.bracket(&g).eval(&p).unwrap();
        let gb = g.bracket(&f).eval(&p).unwrap();
        assert!(frob_norm(&(&fb + &gb)) < 1e-13);
        let fa = f.eval(&p).unwrap();
        let ga = g.eval(&p).unwrap();
        assert!(frob_norm(&(fb - (&fa * &ga - &ga * &fa))) < 1e-13);
    }

    #[test]
    fn homogeneous_components_partition_the_series() {
        let f = sample_field();
        let t = f.taylor(&[0.1, 0.2], 4).unwrap();
        let mut sum = MatrixTaylor::zero(2, t.ctx.clone());
        for m in 0..=4 {
            sum = sum.add(&t.homogeneous(m));
        }
        let dz = [0.05, -0.04];
        assert!(frob_norm(&(sum.eval_displacement(&dz) - t.eval_displacement(&dz))) < 1e-13);
        // weighted split with weights (1,2): z0²z1 has weighted degree 4
        let w = t.weighted_homogeneous(&[1, 2], 4);
        let alg = MatrixAlgebra::su2();
        assert!(frob_norm(&(w.coeff(&[2, 1]) - &alg.basis[0])) < 1e-13);
    }
}
