//! Matrix Lie group kernels: exponential, logarithm, dexp-inverse series,
//! and right-invariant transport ȧ(t) = A(t)·a(t) integrated on the group.

use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::{bracket, identity, is_finite, op_norm, Mat};
use crate::{Error, Result};

/// exp(A) by scaling-and-squaring with a truncated Taylor core.
///
/// The argument is scaled until its norm is ≤ 1/4, the series is summed to
/// machine precision and the result squared back; relative error is a few
/// ulps for any bounded argument.
pub fn mat_exp(a: &Mat) -> Result<Mat> {
    if !is_finite(a) {
        return Err(Error::NonFinite("mat_exp"));
    }
    let norm = op_norm(a);
    let q = a.nrows();
    let s = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as u32
    } else {
        0
    };
    let b = a * Complex64::new(0.5f64.powi(s as i32), 0.0);
    let mut sum = identity(q);
    let mut term = identity(q);
    for k in 1..=30 {
        term = (&term * &b) / Complex64::new(k as f64, 0.0);
        sum += &term;
        if term.norm() < 1e-20 * sum.norm().max(1.0) {
            break;
        }
    }
    let mut result = sum;
    for _ in 0..s {
        result = &result * &result;
    }
    Ok(result)
}

/// Principal logarithm near the identity, by inverse scaling-and-squaring.
///
/// Requires ‖a − I‖ < 1; square roots are taken by the Denman–Beavers
/// iteration until the Mercator series converges fast.
pub fn mat_log(a: &Mat) -> Result<Mat> {
    if !is_finite(a) {
        return Err(Error::NonFinite("mat_log"));
    }
    let q = a.nrows();
    let dist = op_norm(&(a - identity(q)));
    if dist >= 1.0 {
        return Err(Error::LogDomain(dist));
    }
    let mut current = a.clone();
    let mut doublings = 0u32;
    while op_norm(&(&current - identity(q))) > 0.25 {
        current = sqrtm_near_identity(&current)?;
        doublings += 1;
        if doublings > 40 {
            return Err(Error::LogDomain(dist));
        }
    }
    let x = &current - identity(q);
    let mut sum = x.clone();
    let mut power = x.clone();
    for k in 2..=60 {
        power = &power * &x;
        let term = &power * Complex64::new(if k % 2 == 0 { -1.0 } else { 1.0 } / k as f64, 0.0);
        sum += &term;
        if power.norm() / (k as f64) < 1e-20 {
            break;
        }
    }
    Ok(sum * Complex64::new(2.0f64.powi(doublings as i32), 0.0))
}

/// Matrix square root by Denman–Beavers iteration, valid for matrices with
/// no spectrum on the closed negative axis (always true near the identity).
fn sqrtm_near_identity(a: &Mat) -> Result<Mat> {
    let q = a.nrows();
    let mut y = a.clone();
    let mut z = identity(q);
    for _ in 0..60 {
        let yinv = y
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Domain("singular iterate in matrix square root".into()))?;
        let zinv = z
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Domain("singular iterate in matrix square root".into()))?;
        let y_next = (&y + &zinv) * Complex64::new(0.5, 0.0);
        let z_next = (&z + &yinv) * Complex64::new(0.5, 0.0);
        let delta = (&y_next - &y).norm();
        y = y_next;
        z = z_next;
        if delta < 1e-16 * y.norm().max(1.0) {
            break;
        }
    }
    Ok(y)
}

/// Bernoulli-number coefficients of g(z) = z/(e^z − 1) = 1 − z/2 + Σ B₂ₖ z^{2k}/(2k)!.
/// Index by the power of z; odd entries beyond 1 vanish.
const DEXPINV_COEFF: [(usize, f64); 6] = [
    (2, 1.0 / 12.0),
    (4, -1.0 / 720.0),
    (6, 1.0 / 30_240.0),
    (8, -1.0 / 1_209_600.0),
    (10, 1.0 / 47_900_160.0),
    (12, -691.0 / 1_307_674_368_000.0),
];

/// Truncation order at which the Bernoulli series is cut by default;
/// for ‖ad Q‖ ≤ 0.5 the omitted tail is below 1e−12.
pub const DEXPINV_DEFAULT_ORDER: usize = 8;

/// Result of [`dexpinv_apply`]; `near_bound` is set when ‖ad Q‖ may reach
/// the convergence-disk boundary |z| = π of the series.
#[derive(Debug, Clone)]
pub struct Dexpinv {
    pub value: Mat,
    pub near_bound: bool,
}

/// g(ad Q)A with g(z) = z/(e^z − 1), truncated at the given power of ad Q.
///
/// This inverts the left-trivialized differential of exp along ȧ = A·a:
/// with a(t) = exp(Q(t)), one has Q̇ = g(ad Q)A.
pub fn dexpinv_apply(q_el: &Mat, a: &Mat, order: usize) -> Result<Dexpinv> {
    if !is_finite(q_el) || !is_finite(a) {
        return Err(Error::NonFinite("dexpinv_apply"));
    }
    if order < 1 {
        return Err(Error::Precondition("dexpinv order must be ≥ 1".into()));
    }
    // ‖ad Q‖ ≤ 2‖Q‖ by submultiplicativity.
    let ad_bound = 2.0 * op_norm(q_el);
    let near_bound = ad_bound >= std::f64::consts::PI;
    let mut value = a.clone();
    let mut ad_pow = bracket(q_el, a); // ad¹ A
    if order >= 1 {
        value += &ad_pow * Complex64::new(-0.5, 0.0);
    }
    let mut power = 1usize;
    for &(p, c) in DEXPINV_COEFF.iter() {
        if p > order {
            break;
        }
        while power < p {
            ad_pow = bracket(q_el, &ad_pow);
            power += 1;
        }
        value += &ad_pow * Complex64::new(c, 0.0);
    }
    Ok(Dexpinv { value, near_bound })
}

/// A continuous curve [0,1] → 𝔤 with a cached sup norm.
#[derive(Clone)]
pub struct AlgebraPath {
    f: Arc<dyn Fn(f64) -> Mat + Send + Sync>,
    pub sup_norm: f64,
}

impl AlgebraPath {
    /// Wrap a callable; the sup norm is estimated on a dense grid.
    pub fn new(f: impl Fn(f64) -> Mat + Send + Sync + 'static) -> Self {
        let f: Arc<dyn Fn(f64) -> Mat + Send + Sync> = Arc::new(f);
        let mut sup: f64 = 0.0;
        for k in 0..=2048 {
            sup = sup.max(op_norm(&f(k as f64 / 2048.0)));
        }
        Self { f, sup_norm: sup }
    }

    /// Wrap a callable whose evaluations are expensive, estimating the sup
    /// norm on a grid of `samples` points instead of the dense default.
    pub fn with_coarse_sup(f: impl Fn(f64) -> Mat + Send + Sync + 'static, samples: usize) -> Self {
        let f: Arc<dyn Fn(f64) -> Mat + Send + Sync> = Arc::new(f);
        let n = samples.max(2);
        let mut sup: f64 = 0.0;
        for k in 0..=n {
            sup = sup.max(op_norm(&f(k as f64 / n as f64)));
        }
        Self { f, sup_norm: sup }
    }

    pub fn at(&self, t: f64) -> Mat {
        (self.f)(t)
    }

    /// ∫₀ᵗ A(s) ds by composite Gauss–Legendre.
    pub fn integral(&self, t: f64, panels: usize) -> Mat {
        let sample = self.at(0.0);
        let q = sample.nrows();
        let mut sum = crate::algebra::zero(q);
        let h = t / panels as f64;
        for p in 0..panels {
            let a = p as f64 * h;
            for (node, weight) in gauss_legendre_16() {
                let s = a + h * 0.5 * (1.0 + node);
                sum += self.at(s) * Complex64::new(weight * h * 0.5, 0.0);
            }
        }
        sum
    }
}

/// 16-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre_16() -> [(f64, f64); 16] {
    [
        (-0.9894009349916499, 0.027152459411754096),
        (-0.9445750230732326, 0.062253523938647894),
        (-0.8656312023878318, 0.09515851168249279),
        (-0.755404408355003, 0.12462897125553388),
        (-0.6178762444026438, 0.14959598881657674),
        (-0.45801677765722737, 0.16915651939500254),
        (-0.2816035507792589, 0.18260341504492358),
        (-0.09501250983763744, 0.1894506104550685),
        (0.09501250983763744, 0.1894506104550685),
        (0.2816035507792589, 0.18260341504492358),
        (0.45801677765722737, 0.16915651939500254),
        (0.6178762444026438, 0.14959598881657674),
        (0.755404408355003, 0.12462897125553388),
        (0.8656312023878318, 0.09515851168249279),
        (0.9445750230732326, 0.062253523938647894),
        (0.9894009349916499, 0.027152459411754096),
    ]
}

/// Solve ȧ = A(t)·a, a(0) = I on [0, t_end] with a Runge–Kutta–Munthe-Kaas
/// step: per step the algebra equation Q̇ = g(ad Q)A is advanced by classical
/// RK4 restarted from Q = 0, and the group iterate is updated by exp(Q)·a.
/// The result stays on the group up to exp accuracy, independent of steps.
pub fn solve_transport_to(path: &AlgebraPath, t_end: f64, steps: usize) -> Result<Mat> {
    if steps < 1 {
        return Err(Error::Precondition("solve_transport needs steps ≥ 1".into()));
    }
    let q = path.at(0.0).nrows();
    let mut a = identity(q);
    let h = t_end / steps as f64;
    let hc = Complex64::new(h, 0.0);
    let order = DEXPINV_DEFAULT_ORDER;
    for step in 0..steps {
        let t0 = step as f64 * h;
        let a0 = path.at(t0);
        let a_half = path.at(t0 + 0.5 * h);
        let a1 = path.at(t0 + h);
        let k1 = a0;
        let k2 = dexpinv_apply(&(&k1 * (hc * 0.5)), &a_half, order)?.value;
        let k3 = dexpinv_apply(&(&k2 * (hc * 0.5)), &a_half, order)?.value;
        let k4 = dexpinv_apply(&(&k3 * hc), &a1, order)?.value;
        let q_step = (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4)
            * (hc / Complex64::new(6.0, 0.0));
        a = mat_exp(&q_step)? * a;
    }
    Ok(a)
}

/// Transport over the whole parameter interval [0, 1].
pub fn solve_transport(path: &AlgebraPath, steps: usize) -> Result<Mat> {
    solve_transport_to(path, 1.0, steps)
}

/// Constants entering the Picard defect bound: maxima of |g| and |g′| on the
/// disk |z| ≤ π, the adjoint-operator bound of the algebra, and the computed
/// smallness threshold ε.
#[derive(Debug, Clone)]
pub struct PicardConstants {
    pub b1: f64,
    pub b2: f64,
    pub ad_norm: f64,
    pub eps: f64,
}

/// Maximize |g| and |g′| over |z| = π by dense boundary sampling; g is
/// analytic on the closed disk (poles sit at ±2πi), so the maximum-modulus
/// principle makes boundary sampling sufficient. 4096 points, conservative.
fn g_bounds_on_pi_disk() -> (f64, f64) {
    let mut b1: f64 = 0.0;
    let mut b2: f64 = 0.0;
    let n = 4096;
    for k in 0..n {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        let z = Complex64::from_polar(std::f64::consts::PI, theta);
        let em = (-z).exp();
        let denom = Complex64::new(1.0, 0.0) - em;
        let g = z / denom;
        // g′ = (1 − e^{−z}(1 + z)) / (1 − e^{−z})²
        let gp = (Complex64::new(1.0, 0.0) - em * (Complex64::new(1.0, 0.0) + z)) / (denom * denom);
        b1 = b1.max(g.norm());
        b2 = b2.max(gp.norm());
    }
    (b1, b2)
}

impl PicardConstants {
    /// Compute the constants once per algebra. ε is fixed to 1/(2B) with
    /// B = max{B₁‖ad‖/π, B₂‖ad‖}, which keeps the bound's denominator away
    /// from zero; an abelian algebra gets ε = ∞.
    pub fn for_algebra(alg: &crate::algebra::MatrixAlgebra) -> Self {
        let (b1, b2) = g_bounds_on_pi_disk();
        let ad_norm = alg.ad_norm();
        let eps = if ad_norm == 0.0 {
            f64::INFINITY
        } else {
            let b = (b1 * ad_norm / std::f64::consts::PI).max(b2 * ad_norm);
            1.0 / (2.0 * b)
        };
        Self { b1, b2, ad_norm, eps }
    }

    /// Upper bound for ‖Q(t) − ∫₀ᵗ A‖ where Q(t) = exp⁻¹ a(t); valid when
    /// t·‖A‖_{L∞} < ε.
    pub fn picard_bound(&self, path: &AlgebraPath, t: f64) -> Result<f64> {
        let m = path.sup_norm;
        if t * m >= self.eps {
            return Err(Error::Precondition(format!(
                "picard_bound needs t·‖A‖ < ε = {:.6}, got {:.6}",
                self.eps,
                t * m
            )));
        }
        if self.ad_norm == 0.0 {
            return Ok(0.0);
        }
        Ok(self.ad_norm * t * t * self.b2 * self.b2 * m * m
            / (1.0 - self.ad_norm * self.b2 * self.eps))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{frob_norm, zero, GroupElement, GroupTag, MatrixAlgebra};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn taylor_exp_oracle(a: &Mat, terms: usize) -> Mat {
        let q = a.nrows();
        let mut sum = identity(q);
        let mut term = identity(q);
        for k in 1..=terms {
            term = (&term * a) / Complex64::new(k as f64, 0.0);
            sum += &term;
        }
        sum
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let e = mat_exp(&zero(3)).unwrap();
        assert!(frob_norm(&(e - identity(3))) < 1e-15);
    }

    #[test]
    fn exp_rotation_matches_rodrigues() {
        // θ·J₃ rotates by θ about axis 3
        let alg = MatrixAlgebra::so3();
        let theta = std::f64::consts::FRAC_PI_2;
        let e = mat_exp(&(&alg.basis[2] * Complex64::new(theta, 0.0))).unwrap();
        let mut want = zero(3);
        want[(0, 0)] = Complex64::new(theta.cos(), 0.0);
        want[(0, 1)] = Complex64::new(-theta.sin(), 0.0);
        want[(1, 0)] = Complex64::new(theta.sin(), 0.0);
        want[(1, 1)] = Complex64::new(theta.cos(), 0.0);
        want[(2, 2)] = Complex64::new(1.0, 0.0);
        assert!(frob_norm(&(e - want)) < 1e-13);
    }

    #[test]
    fn exp_matches_long_taylor_oracle() {
        let alg = MatrixAlgebra::su2();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = alg.random_element(&mut rng, 0.3);
            let got = mat_exp(&a).unwrap();
            let want = taylor_exp_oracle(&a, 200);
            assert!(op_norm(&(got - want)) < 1e-13);
        }
    }

    #[test]
    fn exp_rejects_non_finite() {
        let mut a = zero(2);
        a[(0, 0)] = Complex64::new(f64::NAN, 0.0);
        assert!(mat_exp(&a).is_err());
    }

    #[test]
    fn log_of_identity_is_zero() {
        assert!(frob_norm(&mat_log(&identity(2)).unwrap()) < 1e-15);
    }

    #[test]
    fn log_round_trip_on_one_parameter_subgroup() {
        let alg = MatrixAlgebra::so3();
        let a = &alg.basis[2] * Complex64::new(0.2, 0.0);
        let got = mat_log(&mat_exp(&a).unwrap()).unwrap();
        assert!(op_norm(&(got - a)) < 1e-12);
    }

    #[test]
    fn log_round_trip_random_su2() {
        let alg = MatrixAlgebra::su2();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = alg.random_element(&mut rng, 0.4);
            let g = mat_exp(&a).unwrap();
            let back = mat_log(&g).unwrap();
            assert!(op_norm(&(back - a)) < 1e-12);
            let fwd = mat_exp(&mat_log(&g).unwrap()).unwrap();
            assert!(op_norm(&(fwd - g)) < 1e-12);
        }
    }

    #[test]
    fn log_rejects_far_from_identity() {
        let a = identity(2) * Complex64::new(-1.0, 0.0);
        assert!(matches!(mat_log(&a), Err(Error::LogDomain(_))));
    }

    #[test]
    fn dexpinv_trivial_cases() {
        let alg = MatrixAlgebra::su2();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = alg.random_element(&mut rng, 1.0);
        // Q = 0 → A
        let r = dexpinv_apply(&zero(2), &a, 8).unwrap();
        assert!(op_norm(&(&r.value - &a)) < 1e-15);
        // collinear Q → A exactly
        let q = &a * Complex64::new(0.37, 0.0);
        let r = dexpinv_apply(&q, &a, 8).unwrap();
        assert!(op_norm(&(&r.value - &a)) < 1e-14);
    }

    /// Spectral oracle: on su(2) the adjoint satisfies ad³ = −θ² ad, so
    /// g(ad Q) = a₀ + a₁ ad + a₂ ad² with coefficients interpolating g at
    /// {0, ±iθ}.
    fn dexpinv_spectral_oracle(alg: &MatrixAlgebra, q_el: &Mat, a: &Mat) -> Mat {
        let (qc, _) = alg.expand(q_el);
        let theta = (qc[0] * qc[0] + qc[1] * qc[1] + qc[2] * qc[2]).sqrt();
        let g = |z: Complex64| -> Complex64 {
            if z.norm() < 1e-30 {
                Complex64::new(1.0, 0.0)
            } else {
                z / (z.exp() - Complex64::new(1.0, 0.0))
            }
        };
        let it = Complex64::new(0.0, theta);
        let gp = g(it);
        let gm = g(-it);
        // g(z) ≈ a0 + a1 z + a2 z² matched at 0, iθ, −iθ
        let a0 = Complex64::new(1.0, 0.0);
        let a1 = (gp - gm) / (2.0 * it);
        let a2 = (gp + gm - 2.0 * a0) / (2.0 * it * it);
        let ad1 = bracket(q_el, a);
        let ad2 = bracket(q_el, &ad1);
        a * a0 + ad1 * a1 + ad2 * a2
    }

    #[test]
    fn dexpinv_matches_spectral_oracle() {
        let alg = MatrixAlgebra::su2();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..30 {
            let q = alg.random_element(&mut rng, 0.2);
            let a = alg.random_element(&mut rng, 1.0);
            let got = dexpinv_apply(&q, &a, 12).unwrap().value;
            let want = dexpinv_spectral_oracle(&alg, &q, &a);
            assert!(op_norm(&(got - want)) < 1e-12);
        }
    }

    #[test]
    fn dexpinv_order_refinement_is_small() {
        let alg = MatrixAlgebra::su2();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let q = alg.random_element(&mut rng, 0.3);
        let a = alg.random_element(&mut rng, 1.0);
        let lo = dexpinv_apply(&q, &a, 8).unwrap().value;
        let hi = dexpinv_apply(&q, &a, 10).unwrap().value;
        let ad_bound = 2.0 * op_norm(&q);
        assert!(op_norm(&(lo - hi)) <= ad_bound.powi(9) * op_norm(&a));
    }

    #[test]
    fn transport_trivial_and_autonomous() {
        let zero_path = AlgebraPath::new(|_| zero(2));
        let a1 = solve_transport(&zero_path, 10).unwrap();
        assert!(op_norm(&(a1 - identity(2))) < 1e-14);

        let alg = MatrixAlgebra::su2();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let a0 = alg.random_element(&mut rng, 0.8);
        let a0c = a0.clone();
        let path = AlgebraPath::new(move |_| a0c.clone());
        let got = solve_transport(&path, 200).unwrap();
        let want = mat_exp(&a0).unwrap();
        assert!(op_norm(&(got - want)) < 1e-12);
    }

    #[test]
    fn transport_matches_product_integral_oracle() {
        let alg = MatrixAlgebra::su2();
        let x1 = alg.basis[0].clone();
        let x2 = alg.basis[1].clone();
        let path = AlgebraPath::new(move |t: f64| {
            let w = 2.0 * std::f64::consts::PI * t;
            &x1 * Complex64::new(w.cos(), 0.0) + &x2 * Complex64::new(w.sin(), 0.0)
        });
        let got = solve_transport(&path, 2000).unwrap();
        // fine product integral ∏ exp(A(tᵢ)Δt), midpoint sampling
        let n = 1_000_000;
        let dt = 1.0 / n as f64;
        let mut acc = identity(2);
        for k in 0..n {
            let t = (k as f64 + 0.5) * dt;
            let step = path.at(t) * Complex64::new(dt, 0.0);
            acc = taylor_exp_oracle(&step, 6) * acc;
        }
        assert!(op_norm(&(got - acc)) < 1e-9);
    }

    #[test]
    fn transport_stays_on_group() {
        let alg = MatrixAlgebra::su2();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let c1 = alg.random_element(&mut rng, 5.0);
        let c2 = alg.random_element(&mut rng, 5.0);
        let path = AlgebraPath::new(move |t: f64| {
            &c1 * Complex64::new((3.1 * t).sin(), 0.0) + &c2 * Complex64::new(t * t, 0.0)
        });
        assert!(path.sup_norm <= 10.0);
        for steps in [100, 1000] {
            let a1 = solve_transport(&path, steps).unwrap();
            let g = GroupElement::new(a1, GroupTag::Unitary);
            assert!(g.manifold_defect() <= 1e-10, "defect {}", g.manifold_defect());
        }
    }

    #[test]
    fn transport_inverse_path_gives_identity() {
        let alg = MatrixAlgebra::su2();
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let c1 = alg.random_element(&mut rng, 1.0);
        let c2 = alg.random_element(&mut rng, 1.0);
        let c1b = c1.clone();
        let c2b = c2.clone();
        let fwd = AlgebraPath::new(move |t: f64| {
            &c1 * Complex64::new((2.0 * t).cos(), 0.0) + &c2 * Complex64::new(t, 0.0)
        });
        let bwd = AlgebraPath::new(move |t: f64| {
            let s = 1.0 - t;
            -(&c1b * Complex64::new((2.0 * s).cos(), 0.0) + &c2b * Complex64::new(s, 0.0))
        });
        let a = solve_transport(&fwd, 800).unwrap();
        let b = solve_transport(&bwd, 800).unwrap();
        assert!(op_norm(&(b * a - identity(2))) < 1e-11);
    }

    #[test]
    fn transport_self_convergence_is_order_four() {
        let alg = MatrixAlgebra::su2();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let c1 = alg.random_element(&mut rng, 1.2);
        let c2 = alg.random_element(&mut rng, 0.9);
        let path = AlgebraPath::new(move |t: f64| {
            &c1 * Complex64::new((5.0 * t).sin(), 0.0)
                + &c2 * Complex64::new((3.0 * t + 0.4).cos(), 0.0)
        });
        let reference = solve_transport(&path, 8192).unwrap();
        let e1 = op_norm(&(solve_transport(&path, 64).unwrap() - &reference));
        let e2 = op_norm(&(solve_transport(&path, 128).unwrap() - &reference));
        let ratio = e1 / e2;
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn picard_bound_trivial_and_abelian() {
        let su2 = MatrixAlgebra::su2();
        let consts = PicardConstants::for_algebra(&su2);
        let zero_path = AlgebraPath::new(|_| zero(2));
        assert_eq!(consts.picard_bound(&zero_path, 1.0).unwrap(), 0.0);

        let diag = MatrixAlgebra::diagonal(2);
        let dconsts = PicardConstants::for_algebra(&diag);
        assert_eq!(dconsts.ad_norm, 0.0);
        assert!(dconsts.eps.is_infinite());
        let d0 = diag.element(&[0.3, -0.8]);
        let d0c = d0.clone();
        let path = AlgebraPath::new(move |t: f64| &d0c * Complex64::new(1.0 + t, 0.0));
        assert_eq!(dconsts.picard_bound(&path, 1.0).unwrap(), 0.0);
        // abelian: Q(t) = ∫A exactly
        let a1 = solve_transport(&path, 50).unwrap();
        let q = mat_log(&a1).unwrap();
        let integral = path.integral(1.0, 8);
        assert!(op_norm(&(q - integral)) < 1e-12);
        let _ = d0;
    }

    #[test]
    fn picard_bound_rejects_large_paths() {
        let su2 = MatrixAlgebra::su2();
        let consts = PicardConstants::for_algebra(&su2);
        let alg = su2.clone();
        let big = alg.element(&[10.0, 0.0, 0.0]);
        let path = AlgebraPath::new(move |_| big.clone());
        assert!(consts.picard_bound(&path, 1.0).is_err());
    }

    #[test]
    fn picard_bound_dominates_measured_defect() {
        let su2 = MatrixAlgebra::su2();
        let consts = PicardConstants::for_algebra(&su2);
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..25 {
            let c1 = su2.random_element(&mut rng, 1.0);
            let c2 = su2.random_element(&mut rng, 1.0);
            let f1 = rng.gen_range(0.5..3.0);
            let f2 = rng.gen_range(0.5..3.0);
            let raw = AlgebraPath::new(move |t: f64| {
                &c1 * Complex64::new((f1 * t).cos(), 0.0) + &c2 * Complex64::new((f2 * t).sin(), 0.0)
            });
            let scale = (consts.eps / 2.0) / raw.sup_norm;
            let scaled = AlgebraPath {
                f: {
                    let raw = raw.clone();
                    Arc::new(move |t| raw.at(t) * Complex64::new(scale, 0.0))
                },
                sup_norm: raw.sup_norm * scale,
            };
            let bound = consts.picard_bound(&scaled, 1.0).unwrap();
            let a1 = solve_transport(&scaled, 400).unwrap();
            let q = mat_log(&a1).unwrap();
            let defect = op_norm(&(q - scaled.integral(1.0, 16)));
            assert!(defect <= bound, "defect {defect:.3e} > bound {bound:.3e}");
        }
    }
}
