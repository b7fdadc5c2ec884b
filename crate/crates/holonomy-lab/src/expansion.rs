//! Approximation functionals for holonomy: the gauge-free weighted Taylor
//! functional F^k, its hand-assembled Euclidean order-3 form, selector
//! surgery ω ↦ ω̃ on step-2 model spaces, and the order-5 functionals the
//! modified connection affords there.
//!
//! A functional is stored as a finite list of moment terms
//! coefficient · rational · ∫_γ (z − x)^μ dz_j, produced by reducing each
//! monomial two-form of the weighted curvature Taylor polynomial over the
//! dilation-swept disk to boundary moments. All combinatorial prefactors are
//! exact rationals; floating point enters only through the coefficient
//! matrices and the final moment integration.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::Ratio;
use serde_json::json;

use crate::algebra::{frob_norm, zero, Mat};
use crate::expr::Expr;
use crate::field::{MatrixField, MatrixTaylor};
use crate::gauge::GaugeConnection;
use crate::jet::JetCtx;
use crate::loops::{disk_to_boundary, DilationStructure, LoopPath};
use crate::models::ModelSpace;
use crate::{Error, Result};

/// One reduced term: coefficient · factor · ∫_γ (z − x)^μ dz_dir.
#[derive(Debug, Clone)]
pub struct MomentTerm {
    pub coef: Mat,
    pub mu: Vec<usize>,
    pub dir: usize,
    pub factor: Ratio<i64>,
}

impl MomentTerm {
    /// Weighted degree of the underlying disk two-form term: w(μ) + w_dir.
    pub fn weight(&self, d: &DilationStructure) -> usize {
        d.weighted_degree(&self.mu) + d.weights[self.dir] as usize
    }
}

/// A linear functional on loops built from boundary moments. `kind` records
/// which construction produced it (`taylor-Fk`, `euclidean-F3`,
/// `heisenberg-F5`, `hopf-F5`).
#[derive(Debug, Clone)]
pub struct ExpansionFunctional {
    pub q: usize,
    pub center: Vec<f64>,
    pub order: usize,
    pub kind: String,
    pub terms: Vec<MomentTerm>,
}

impl ExpansionFunctional {
    pub fn new(q: usize, center: Vec<f64>, order: usize, kind: &str) -> Self {
        Self {
            q,
            center,
            order,
            kind: kind.to_string(),
            terms: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn push(&mut self, coef: Mat, mu: Vec<usize>, dir: usize, factor: Ratio<i64>) {
        if frob_norm(&coef) == 0.0 || factor == Ratio::new(0, 1) {
            return;
        }
        self.terms.push(MomentTerm {
            coef,
            mu,
            dir,
            factor,
        });
    }

    /// Merge terms sharing a moment word: the map (μ, j) ↦ Σ factor·coef.
    /// This is the canonical form used for term-by-term comparisons and for
    /// evaluation (each distinct moment is integrated once).
    pub fn canonical_terms(&self) -> BTreeMap<(Vec<usize>, usize), Mat> {
        let mut out: BTreeMap<(Vec<usize>, usize), Mat> = BTreeMap::new();
        for t in &self.terms {
            let f = *t.factor.numer() as f64 / *t.factor.denom() as f64;
            let entry = out
                .entry((t.mu.clone(), t.dir))
                .or_insert_with(|| zero(self.q));
            *entry += &t.coef * Complex64::new(f, 0.0);
        }
        out
    }

    /// Evaluate the functional on a loop based in the chart of `center`.
    pub fn evaluate(&self, path: &LoopPath) -> Result<Mat> {
        let mut acc = zero(self.q);
        for ((mu, dir), m) in self.canonical_terms() {
            let moment = path.moment_integral(&self.center, &mu, dir)?;
            acc += m * Complex64::new(moment, 0.0);
        }
        Ok(acc)
    }

    /// Largest coefficient discrepancy against another functional, compared
    /// in canonical form over the union of moment words.
    pub fn canonical_distance(&self, other: &ExpansionFunctional) -> f64 {
        let a = self.canonical_terms();
        let b = other.canonical_terms();
        let mut worst = 0.0f64;
        for key in a.keys().chain(b.keys()) {
            let ma = a.get(key).cloned().unwrap_or_else(|| zero(self.q));
            let mb = b.get(key).cloned().unwrap_or_else(|| zero(self.q));
            worst = worst.max(frob_norm(&(ma - mb)));
        }
        worst
    }

    /// Report form: moment words, exact rational prefactors, and coefficient
    /// matrices split into real and imaginary parts.
    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<_> = self
            .terms
            .iter()
            .map(|t| {
                let re: Vec<Vec<f64>> = (0..self.q)
                    .map(|r| (0..self.q).map(|c| t.coef[(r, c)].re).collect())
                    .collect();
                let im: Vec<Vec<f64>> = (0..self.q)
                    .map(|r| (0..self.q).map(|c| t.coef[(r, c)].im).collect())
                    .collect();
                json!({
                    "mu": t.mu,
                    "dir": t.dir,
                    "factor": [*t.factor.numer(), *t.factor.denom()],
                    "coef_re": re,
                    "coef_im": im,
                })
            })
            .collect();
        json!({
            "kind": self.kind,
            "order": self.order,
            "center": self.center,
            "terms": terms,
        })
    }
}

fn factorial(n: usize) -> i64 {
    (1..=n as i64).product::<i64>().max(1)
}

/// Depth-first enumeration of covariant-derivative chains. For every ordered
/// tuple μ with w(μ) ≤ budget (including the empty one), emits
/// (monomial exponent of z_μ, (∇_μ φ)(x), 1/j(μ)!), where ∇_k = ∂_k + ad ω_k
/// in the flat coordinate frame. Prefixes are shared, so each chain extension
/// costs one series derivative and one bracket.
fn cov_chain(
    omega: &[MatrixTaylor],
    series: &MatrixTaylor,
    expo: &mut Vec<usize>,
    len: usize,
    budget: usize,
    weights: &[u32],
    out: &mut Vec<(Vec<usize>, Mat, Ratio<i64>)>,
) {
    out.push((expo.clone(), series.value0(), Ratio::new(1, factorial(len))));
    for k in 0..weights.len() {
        let w = weights[k] as usize;
        if w > budget {
            continue;
        }
        let next = series.partial(k).add(&omega[k].bracket(series));
        expo[k] += 1;
        cov_chain(omega, &next, expo, len + 1, budget - w, weights, out);
        expo[k] -= 1;
    }
}

/// The weighted covariant Taylor polynomial Σ_{w(μ)≤k} z_μ/j(μ)!·(∇_μφ)(x)
/// as a list of (exponent, coefficient, rational) entries. Entries with the
/// same exponent are intentionally not merged; canonicalization happens at
/// the functional level.
pub fn weighted_cov_poly(
    omega: &[MatrixTaylor],
    phi: &MatrixTaylor,
    weights: &[u32],
    k: usize,
) -> Vec<(Vec<usize>, Mat, Ratio<i64>)> {
    let mut out = Vec::new();
    let mut expo = vec![0usize; weights.len()];
    cov_chain(omega, phi, &mut expo, 0, k, weights, &mut out);
    out
}

/// A scalar polynomial as sparse (exponent, coefficient) pairs.
type ScalarPoly = Vec<(Vec<usize>, f64)>;

/// Exact polynomial coefficients of an expression around `center`.
pub fn expr_poly(e: &Expr, ctx: &JetCtx, center: &[f64]) -> Result<ScalarPoly> {
    let j = e.eval_jet(ctx, center)?;
    Ok(ctx
        .exponents
        .iter()
        .zip(&j.coeffs)
        .filter(|(_, &c)| c != 0.0)
        .map(|(e, &c)| (e.clone(), c))
        .collect())
}

/// Multiply a matrix series by a scalar polynomial, truncating past the
/// series degree bound.
fn poly_scale(series: &MatrixTaylor, poly: &ScalarPoly) -> MatrixTaylor {
    let degree = series.ctx.degree;
    let mut out = MatrixTaylor::zero(series.q, series.ctx.clone());
    for (pe, c) in poly {
        let dp: usize = pe.iter().sum();
        for (se, m) in &series.coeffs {
            let ds: usize = se.iter().sum();
            if dp + ds > degree {
                continue;
            }
            let sum: Vec<usize> = pe.iter().zip(se).map(|(a, b)| a + b).collect();
            out.add_coeff(&sum, &(m * Complex64::new(*c, 0.0)));
        }
    }
    out
}

/// The frame-parallel variant of `weighted_cov_poly`: derivative chains use
/// 𝛁_{Z_a}φ = Z_aφ + [ω(Z_a), φ] along a polynomial frame Z_a = Σ_i Z_a^i ∂_i
/// instead of the coordinate directions. In exponential coordinates of a
/// nilpotent frame the two polynomials agree; that equality is a property
/// test, not an assumption the production path relies on.
pub fn weighted_cov_poly_frame(
    omega: &[MatrixTaylor],
    frame: &[Vec<ScalarPoly>],
    phi: &MatrixTaylor,
    weights: &[u32],
    k: usize,
) -> Vec<(Vec<usize>, Mat, Ratio<i64>)> {
    fn frame_derivative(
        omega: &[MatrixTaylor],
        frame_a: &[ScalarPoly],
        series: &MatrixTaylor,
    ) -> MatrixTaylor {
        let mut out = MatrixTaylor::zero(series.q, series.ctx.clone());
        for (i, fi) in frame_a.iter().enumerate() {
            out = out.add(&poly_scale(&series.partial(i), fi));
            out = out.add(&poly_scale(&omega[i], fi).bracket(series));
        }
        out
    }
    fn chain(
        omega: &[MatrixTaylor],
        frame: &[Vec<ScalarPoly>],
        series: &MatrixTaylor,
        expo: &mut Vec<usize>,
        len: usize,
        budget: usize,
        weights: &[u32],
        out: &mut Vec<(Vec<usize>, Mat, Ratio<i64>)>,
    ) {
        out.push((expo.clone(), series.value0(), Ratio::new(1, factorial(len))));
        for a in 0..frame.len() {
            let w = weights[a] as usize;
            if w > budget {
                continue;
            }
            let next = frame_derivative(omega, &frame[a], series);
            expo[a] += 1;
            chain(omega, frame, &next, expo, len + 1, budget - w, weights, out);
            expo[a] -= 1;
        }
    }
    let mut out = Vec::new();
    let mut expo = vec![0usize; weights.len()];
    chain(omega, frame, phi, &mut expo, 0, k, weights, &mut out);
    out
}

/// Weighted-homogeneous component f^{(m)} of a field around the dilation
/// center: grade the Taylor monomials by Σ wᵢeᵢ and keep weight m. The
/// result satisfies δ_s^* f^{(m)} = s^m f^{(m)} identically.
pub fn homogeneous_component(
    f: &MatrixField,
    d: &DilationStructure,
    m: usize,
) -> Result<MatrixTaylor> {
    // a weight-m monomial has coordinate degree ≤ m because all weights ≥ 1
    Ok(f.taylor(&d.center, m)?.weighted_homogeneous(&d.weights, m))
}

/// The gauge-free functional F^k: ∫ over the dilation-swept disk of the
/// weighted covariant Taylor polynomial of the curvature,
///
///   Tay(Ω;k) = Σ_{i<j} Σ_{w(μ)+wᵢ+wⱼ ≤ k} z_μ/j(μ)!·(∇_μ Ω_ij)(x) dzᵢ∧dzⱼ,
///
/// with each monomial two-form reduced exactly to boundary moments. The
/// coefficients are iterated covariant derivatives of curvature at the
/// center, so they transform by Ad under basepoint-fixing gauge changes and
/// the assembled functional is gauge-covariant.
pub fn taylor_functional(
    c: &GaugeConnection,
    d: &DilationStructure,
    k: usize,
) -> Result<ExpansionFunctional> {
    if d.center.len() != c.dim {
        return Err(Error::Precondition(
            "dilation center dimension does not match the connection".into(),
        ));
    }
    let x = &d.center;
    let deg = k.max(1);
    let omega = c.omega_taylor(x, deg)?;
    let curv = c.curvature_taylor(x, deg)?;
    let mut out = ExpansionFunctional::new(c.q, x.clone(), k, "taylor-Fk");
    for i in 0..c.dim {
        for j in (i + 1)..c.dim {
            let wij = (d.weights[i] + d.weights[j]) as usize;
            if wij > k {
                continue;
            }
            for (expo, m, r) in weighted_cov_poly(&omega, &curv[i][j], &d.weights, k - wij) {
                for (rr, mu, dir) in disk_to_boundary(d, &expo, i, j)? {
                    out.push(m.clone(), mu, dir, r * rr);
                }
            }
        }
    }
    Ok(out)
}

/// The Euclidean order-3 functional assembled directly from its closed form,
///
///   F³ = ½ Σ Ω_ij(x) ∫(z−x)_i dz_j
///      + ⅓ Σ (∂_kΩ_ij(x) + [ω_k(x), Ω_ij(x)]) ∫(z−x)_i(z−x)_k dz_j,
///
/// summed over all ordered index pairs. Kept as an independent code path
/// from `taylor_functional`; the two must agree term-by-term in canonical
/// form for isotropic weights and k = 3.
pub fn euclidean_f3(c: &GaugeConnection, center: &[f64]) -> Result<ExpansionFunctional> {
    if center.len() != c.dim {
        return Err(Error::Precondition(
            "center dimension does not match the connection".into(),
        ));
    }
    let w0 = c.omega_at(center)?;
    let curv = c.curvature_taylor(center, 1)?;
    let mut out = ExpansionFunctional::new(c.q, center.to_vec(), 3, "euclidean-F3");
    for i in 0..c.dim {
        for j in 0..c.dim {
            if i == j {
                continue;
            }
            let omega_ij = curv[i][j].value0();
            let mut ei = vec![0usize; c.dim];
            ei[i] += 1;
            out.push(omega_ij.clone(), ei.clone(), j, Ratio::new(1, 2));
            for k in 0..c.dim {
                let grad =
                    curv[i][j].partial(k).value0() + crate::algebra::bracket(&w0[k], &omega_ij);
                let mut eik = ei.clone();
                eik[k] += 1;
                out.push(grad, eik, j, Ratio::new(1, 3));
            }
        }
    }
    Ok(out)
}

/// Selector surgery on a step-2 model: β = ι_χΩ (the vertical coframe form
/// carrying the horizontal-plane curvature component) and ω̃ = ω + β. The
/// returned pair is the modified connection and the symbolic coefficients of
/// β, one field per coordinate. The modified curvature satisfies ι_χΩ̃ = 0,
/// ω̃ agrees with ω on horizontal vectors, and holonomy of horizontal loops
/// is unchanged.
pub fn selector_modify(
    c: &GaugeConnection,
    model: &ModelSpace,
) -> Result<(GaugeConnection, Vec<MatrixField>)> {
    if model.selector.iter().all(|s| s.is_none()) {
        return Err(Error::Capability(format!(
            "model `{}` has no selector",
            model.name
        )));
    }
    if model.dim != c.dim {
        return Err(Error::Precondition(
            "model dimension does not match the connection".into(),
        ));
    }
    let fields = c.analytic_fields().ok_or_else(|| {
        Error::Capability("selector surgery needs an analytic connection".into())
    })?;

    // symbolic curvature components Ω_ij = ∂_iω_j − ∂_jω_i + [ω_i, ω_j]
    let mut curv: Vec<Vec<Option<MatrixField>>> = vec![vec![None; c.dim]; c.dim];
    for i in 0..c.dim {
        for j in (i + 1)..c.dim {
            let f = fields[j]
                .diff(i)
                .add(&fields[i].diff(j).neg())
                .add(&fields[i].bracket(&fields[j]));
            curv[i][j] = Some(f);
        }
    }

    let mut beta: Vec<MatrixField> = (0..c.dim).map(|_| MatrixField::zero(c.q, c.dim)).collect();
    for (cidx, sel) in model.selector.iter().enumerate() {
        let Some((a, b)) = *sel else { continue };
        // φ = Ω(X_a, X_b) = Σ_{i<j} (X_a^i X_b^j − X_a^j X_b^i) Ω_ij
        let mut phi = MatrixField::zero(c.q, c.dim);
        for i in 0..c.dim {
            for j in (i + 1)..c.dim {
                let wedge = model.frame[a][i].clone() * model.frame[b][j].clone()
                    - model.frame[a][j].clone() * model.frame[b][i].clone();
                phi = phi.add(&curv[i][j].as_ref().unwrap().scale_expr(&wedge));
            }
        }
        // β += φ · α_c
        for (i, bi) in beta.iter_mut().enumerate() {
            *bi = bi.add(&phi.scale_expr(&model.coframe[cidx][i]));
        }
    }

    let tilde: Vec<MatrixField> = fields
        .iter()
        .zip(&beta)
        .map(|(f, b)| f.add(b))
        .collect();
    Ok((GaugeConnection::analytic(tilde)?, beta))
}

/// Express a curvature Taylor table in the privileged two-form basis
/// dz₁∧θ, dz₂∧θ, dz₁∧dz₂ with θ = dz₃ + ½(z₂dz₁ − z₁dz₂):
///   Ξ¹ = Ω₁₃, Ξ² = Ω₂₃, Ξ³ = Ω₁₂ + ½z₁Ω₁₃ + ½z₂Ω₂₃.
fn xi_from_curvature(curv: &[Vec<MatrixTaylor>]) -> [MatrixTaylor; 3] {
    let xi1 = curv[0][2].clone();
    let xi2 = curv[1][2].clone();
    let e1 = vec![1usize, 0, 0];
    let e2 = vec![0usize, 1, 0];
    let xi3 = curv[0][1]
        .add(&poly_scale(&xi1, &vec![(e1, 0.5)]))
        .add(&poly_scale(&xi2, &vec![(e2, 0.5)]));
    [xi1, xi2, xi3]
}

/// The order-5 functional on a step-2 model space:
///
///   F⁵ = ∫ Tay^{ω̃}(Ξ¹;2) dz₁∧θ + ∫ Tay^{ω̃}(Ξ²;2) dz₂∧θ
///      + ∫ Tay^{ω̃}(Ξ³;3) dz₁∧dz₂,
///
/// where ω̃ is the selector-modified connection, Ξ are its curvature
/// components in the dz∧θ basis of the nilpotentized frame, and the weights
/// are (1,1,2). Every reduced term has weight between 3 and 5.
pub fn model_f5(c: &GaugeConnection, model: &ModelSpace) -> Result<ExpansionFunctional> {
    if model.dim != 3 || model.horizontal != 2 {
        return Err(Error::Capability(format!(
            "order-5 functional needs a 3-dimensional step-2 model, got `{}`",
            model.name
        )));
    }
    let (tilde, _beta) = selector_modify(c, model)?;
    let d = &model.dilation;
    let x = &d.center;
    let deg = 6;
    let omega = tilde.omega_taylor(x, deg)?;
    let curv = tilde.curvature_taylor(x, deg)?;
    let [xi1, xi2, xi3] = xi_from_curvature(&curv);

    let kind = if model.name.contains("hopf") {
        "hopf-F5"
    } else {
        "heisenberg-F5"
    };
    let mut out = ExpansionFunctional::new(c.q, x.clone(), 5, kind);

    // dz_l ∧ θ = dz_l∧dz₃ − ½ z_l dz₁∧dz₂ for l = 1, 2; a coefficient
    // polynomial P contributes P dz_l∧dz₃ and −½ z_l P dz₁∧dz₂.
    let mut reduce =
        |poly: Vec<(Vec<usize>, Mat, Ratio<i64>)>, i: usize, j: usize, shift: Option<usize>, s: Ratio<i64>| -> Result<()> {
            for (mut expo, m, r) in poly {
                if let Some(l) = shift {
                    expo[l] += 1;
                }
                for (rr, mu, dir) in disk_to_boundary(d, &expo, i, j)? {
                    out.push(m.clone(), mu, dir, r * s * rr);
                }
            }
            Ok(())
        };
    let p1 = weighted_cov_poly(&omega, &xi1, &d.weights, 2);
    let p2 = weighted_cov_poly(&omega, &xi2, &d.weights, 2);
    let p3 = weighted_cov_poly(&omega, &xi3, &d.weights, 3);
    reduce(p1.clone(), 0, 2, None, Ratio::new(1, 1))?;
    reduce(p1, 0, 1, Some(0), Ratio::new(-1, 2))?;
    reduce(p2.clone(), 1, 2, None, Ratio::new(1, 1))?;
    reduce(p2, 0, 1, Some(1), Ratio::new(-1, 2))?;
    reduce(p3, 0, 1, None, Ratio::new(1, 1))?;
    // the modified curvature has order ≥ 3, so anything below weight 3 is a
    // floating-point shadow of an exact zero; verify and drop it
    let scale = out
        .terms
        .iter()
        .map(|t| frob_norm(&t.coef))
        .fold(0.0f64, f64::max);
    for t in &out.terms {
        if t.weight(d) < 3 && frob_norm(&t.coef) > 1e-9 * (1.0 + scale) {
            return Err(Error::Precondition(format!(
                "selector-modified curvature keeps weight-{} content of size {:.3e}",
                t.weight(d),
                frob_norm(&t.coef)
            )));
        }
    }
    out.terms.retain(|t| t.weight(d) >= 3);
    debug_assert!(out
        .terms
        .iter()
        .all(|t| (3..=5).contains(&t.weight(d))));
    Ok(out)
}
