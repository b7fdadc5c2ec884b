//! Connections in a gauge: coefficient one-forms ω = Σ ω_k dz_k with values
//! in a matrix Lie algebra, their curvature Ω_ij = ∂_iω_j − ∂_jω_i + [ω_i,ω_j],
//! covariant derivatives, and gauge transformations a = exp(M(z)).

use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::{zero, Mat};
use crate::field::{MatrixField, MatrixTaylor};
use crate::jet::jet_ctx;
use crate::{Error, Result};

type OmegaFn = Arc<dyn Fn(&[f64]) -> Vec<Mat> + Send + Sync>;
type DOmegaFn = Arc<dyn Fn(&[f64]) -> Vec<Vec<Mat>> + Send + Sync>;

/// Finite-difference step for callable connections without supplied
/// derivatives; central differences make the error O(h²) ≈ 1e−10.
const FD_STEP: f64 = 1e-5;

/// A gauge transformation z ↦ exp(M(z)) applied to connections. Keeping the
/// logarithm M as the primary datum lets every derived quantity be computed
/// exactly via series, with no numerical differentiation of the map.
#[derive(Clone)]
pub struct GaugeMap {
    pub log: MatrixField,
}

impl GaugeMap {
    pub fn new(log: MatrixField) -> Self {
        Self { log }
    }

    pub fn at(&self, point: &[f64]) -> Result<Mat> {
        crate::liegroup::mat_exp(&self.log.eval(point)?)
    }

    /// Taylor series of exp(M) at `center` through the context degree,
    /// summed until the matrix series converges.
    pub fn exp_taylor(&self, center: &[f64], degree: usize, sign: f64) -> Result<MatrixTaylor> {
        let m = self.log.taylor(center, degree)?.scale(sign);
        let ctx = m.ctx.clone();
        let q = m.q;
        let mut sum = MatrixTaylor::zero(q, ctx.clone());
        sum.add_coeff(&vec![0; ctx.n_vars], &crate::algebra::identity(q));
        let mut term = sum.clone();
        for k in 1..=80 {
            term = term.mul(&m).scale(1.0 / k as f64);
            let size = term.max_coeff_norm();
            sum = sum.add(&term);
            if size < 1e-18 {
                break;
            }
        }
        Ok(sum)
    }
}

#[derive(Clone)]
enum Repr {
    /// Connection coefficients as symbolic matrix fields, one per coordinate.
    Analytic(Vec<MatrixField>),
    /// Black-box coefficients with optional exact partials ∂_iω_j; without
    /// them curvature falls back to central differences.
    Callable {
        omega: OmegaFn,
        d_omega: Option<DOmegaFn>,
    },
    /// A base connection conjugated by a gauge map: ω′ = a⁻¹ωa + a⁻¹da.
    Transformed {
        base: Box<GaugeConnection>,
        map: GaugeMap,
    },
}

/// A connection one-form on a chart, with whatever level of analytic access
/// its representation affords. Cloning is cheap: callable closures are
/// shared, symbolic data is reference-counted term by term.
#[derive(Clone)]
pub struct GaugeConnection {
    pub q: usize,
    pub dim: usize,
    repr: Repr,
}

impl GaugeConnection {
    pub fn analytic(fields: Vec<MatrixField>) -> Result<Self> {
        if fields.is_empty() {
            return Err(Error::Precondition("connection needs ≥ 1 coordinate".into()));
        }
        let q = fields[0].q;
        let dim = fields.len();
        for f in &fields {
            if f.q != q || f.n_vars != dim {
                return Err(Error::Precondition(
                    "inconsistent dimensions among connection coefficients".into(),
                ));
            }
        }
        Ok(Self {
            q,
            dim,
            repr: Repr::Analytic(fields),
        })
    }

    pub fn callable(
        q: usize,
        dim: usize,
        omega: impl Fn(&[f64]) -> Vec<Mat> + Send + Sync + 'static,
        d_omega: Option<DOmegaFn>,
    ) -> Self {
        Self {
            q,
            dim,
            repr: Repr::Callable {
                omega: Arc::new(omega),
                d_omega,
            },
        }
    }

    pub fn gauge_transform(self, map: GaugeMap) -> Result<Self> {
        if map.log.q != self.q || map.log.n_vars != self.dim {
            return Err(Error::Precondition(
                "gauge map dimensions do not match the connection".into(),
            ));
        }
        Ok(Self {
            q: self.q,
            dim: self.dim,
            repr: Repr::Transformed {
                base: Box::new(self),
                map,
            },
        })
    }

    /// Direct access to the symbolic coefficient fields, when this is a
    /// plain analytic connection. Gauge-transformed and callable
    /// representations return None.
    pub fn analytic_fields(&self) -> Option<&[MatrixField]> {
        match &self.repr {
            Repr::Analytic(fields) => Some(fields),
            _ => None,
        }
    }

    pub fn is_analytic(&self) -> bool {
        match &self.repr {
            Repr::Analytic(_) => true,
            Repr::Callable { .. } => false,
            Repr::Transformed { base, .. } => base.is_analytic(),
        }
    }

    /// The connection coefficients (ω_1(p), …, ω_dim(p)).
    pub fn omega_at(&self, point: &[f64]) -> Result<Vec<Mat>> {
        match &self.repr {
            Repr::Analytic(fields) => fields.iter().map(|f| f.eval(point)).collect(),
            Repr::Callable { omega, .. } => Ok(omega(point)),
            Repr::Transformed { base, map } => {
                let w = base.omega_at(point)?;
                let m = map.log.eval(point)?;
                let a = crate::liegroup::mat_exp(&m)?;
                let a_inv = crate::liegroup::mat_exp(&(-&m))?;
                let mut out = Vec::with_capacity(self.dim);
                for k in 0..self.dim {
                    // a⁻¹ ∂_k a = f(ad M)(∂_k M), f(z) = (1−e^{−z})/z
                    let dm = map.log.diff(k).eval(point)?;
                    let maurer = dexp_left(&m, &dm);
                    out.push(&a_inv * &w[k] * &a + maurer);
                }
                Ok(out)
            }
        }
    }

    /// ω(γ̇) = Σ ω_k(p) v_k.
    pub fn pair(&self, point: &[f64], velocity: &[f64]) -> Result<Mat> {
        let w = self.omega_at(point)?;
        let mut out = zero(self.q);
        for (wk, &vk) in w.iter().zip(velocity) {
            out += wk * Complex64::new(vk, 0.0);
        }
        Ok(out)
    }

    /// Curvature components Ω_ij(p) for all i < j, returned as a full
    /// antisymmetric table.
    pub fn curvature_at(&self, point: &[f64]) -> Result<Vec<Vec<Mat>>> {
        match &self.repr {
            Repr::Analytic(fields) => {
                let w: Vec<Mat> = fields
                    .iter()
                    .map(|f| f.eval(point))
                    .collect::<Result<_>>()?;
                let dw: Vec<Vec<Mat>> = (0..self.dim)
                    .map(|i| {
                        (0..self.dim)
                            .map(|j| fields[j].diff(i).eval(point))
                            .collect()
                    })
                    .collect::<std::result::Result<_, _>>()?;
                Ok(curvature_from_parts(&w, &dw))
            }
            Repr::Callable { omega, d_omega } => {
                let w = omega(point);
                let dw: Vec<Vec<Mat>> = match d_omega {
                    Some(d) => d(point),
                    None => {
                        let mut dw = Vec::with_capacity(self.dim);
                        for i in 0..self.dim {
                            let mut pp = point.to_vec();
                            let mut pm = point.to_vec();
                            pp[i] += FD_STEP;
                            pm[i] -= FD_STEP;
                            let wp = omega(&pp);
                            let wm = omega(&pm);
                            dw.push(
                                wp.into_iter()
                                    .zip(wm)
                                    .map(|(a, b)| (a - b) / Complex64::new(2.0 * FD_STEP, 0.0))
                                    .collect(),
                            );
                        }
                        dw
                    }
                };
                Ok(curvature_from_parts(&w, &dw))
            }
            Repr::Transformed { base, map } => {
                // curvature is tensorial: Ω′ = Ad(a⁻¹)Ω, no derivatives of
                // the map survive
                let omega_base = base.curvature_at(point)?;
                let m = map.log.eval(point)?;
                let a = crate::liegroup::mat_exp(&m)?;
                let a_inv = crate::liegroup::mat_exp(&(-&m))?;
                Ok(omega_base
                    .into_iter()
                    .map(|row| row.into_iter().map(|o| &a_inv * o * &a).collect())
                    .collect())
            }
        }
    }

    /// Taylor series of each ω_k at `center`, exact through `degree`.
    /// Requires analytic access.
    pub fn omega_taylor(&self, center: &[f64], degree: usize) -> Result<Vec<MatrixTaylor>> {
        match &self.repr {
            Repr::Analytic(fields) => fields.iter().map(|f| f.taylor(center, degree)).collect(),
            Repr::Callable { .. } => Err(Error::Capability(
                "Taylor data requires an analytic connection".into(),
            )),
            Repr::Transformed { base, map } => {
                // work one degree higher so the ∂_k of the exp series is
                // exact through `degree`, then re-truncate
                let deep = degree + 1;
                let base_taylor = base.omega_taylor(center, deep)?;
                let a = map.exp_taylor(center, deep, 1.0)?;
                let a_inv = map.exp_taylor(center, deep, -1.0)?;
                let mut out = Vec::with_capacity(self.dim);
                for k in 0..self.dim {
                    let conj = a_inv.mul(&base_taylor[k]).mul(&a);
                    let maurer = a_inv.mul(&a.partial(k));
                    out.push(truncate_taylor(&conj.add(&maurer), degree));
                }
                Ok(out)
            }
        }
    }

    /// Taylor series of each curvature component at `center`, exact through
    /// `degree`. Requires analytic access.
    pub fn curvature_taylor(&self, center: &[f64], degree: usize) -> Result<Vec<Vec<MatrixTaylor>>> {
        match &self.repr {
            Repr::Analytic(fields) => {
                let w: Vec<MatrixTaylor> = fields
                    .iter()
                    .map(|f| f.taylor(center, degree + 1))
                    .collect::<Result<_>>()?;
                let mut out = Vec::with_capacity(self.dim);
                for i in 0..self.dim {
                    let mut row = Vec::with_capacity(self.dim);
                    for j in 0..self.dim {
                        let s = w[j]
                            .partial(i)
                            .add(&w[i].partial(j).scale(-1.0))
                            .add(&w[i].bracket(&w[j]));
                        row.push(truncate_taylor(&s, degree));
                    }
                    out.push(row);
                }
                Ok(out)
            }
            Repr::Callable { .. } => Err(Error::Capability(
                "Taylor data requires an analytic connection".into(),
            )),
            Repr::Transformed { base, map } => {
                let base_curv = base.curvature_taylor(center, degree)?;
                let a = map.exp_taylor(center, degree, 1.0)?;
                let a_inv = map.exp_taylor(center, degree, -1.0)?;
                Ok(base_curv
                    .into_iter()
                    .map(|row| {
                        row.into_iter()
                            .map(|o| truncate_taylor(&a_inv.mul(&o).mul(&a), degree))
                            .collect()
                    })
                    .collect())
            }
        }
    }

    /// Covariant derivative ∇_k S = ∂_k S + [ω_k, S] acting on a Taylor
    /// series of an ad-type quantity, with ω_k expanded at the same center.
    pub fn covariant_derivative(
        &self,
        series: &MatrixTaylor,
        k: usize,
        center: &[f64],
    ) -> Result<MatrixTaylor> {
        let w = self.omega_taylor(center, series.ctx.degree)?;
        Ok(series.partial(k).add(&w[k].bracket(series)))
    }
}

/// Assemble Ω_ij = ∂_iω_j − ∂_jω_i + [ω_i, ω_j] from values and partials
/// (dw[i][j] = ∂_i ω_j).
fn curvature_from_parts(w: &[Mat], dw: &[Vec<Mat>]) -> Vec<Vec<Mat>> {
    let dim = w.len();
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| &dw[i][j] - &dw[j][i] + crate::algebra::bracket(&w[i], &w[j]))
                .collect()
        })
        .collect()
}

/// f(ad M)(B) with f(z) = (1−e^{−z})/z = Σ (−ad M)^k/(k+1)!, the
/// left-trivialized differential of exp: exp(−M)·∂(exp M) = f(ad M)(∂M).
fn dexp_left(m: &Mat, b: &Mat) -> Mat {
    let mut sum = b.clone();
    let mut ad_pow = b.clone();
    let mut factorial = 1.0;
    for k in 1..=40 {
        ad_pow = crate::algebra::bracket(m, &ad_pow) * Complex64::new(-1.0, 0.0);
        factorial *= (k + 1) as f64;
        let term = &ad_pow * Complex64::new(1.0 / factorial, 0.0);
        sum += &term;
        if term.norm() < 1e-18 {
            break;
        }
    }
    sum
}

/// Re-express a series in a context of lower degree, dropping excess terms.
fn truncate_taylor(t: &MatrixTaylor, degree: usize) -> MatrixTaylor {
    if t.ctx.degree == degree {
        return t.clone();
    }
    let ctx = jet_ctx(t.ctx.n_vars, degree);
    let mut out = MatrixTaylor::zero(t.q, ctx);
    for (e, m) in &t.coeffs {
        if e.iter().sum::<usize>() <= degree {
            out.add_coeff(e, m);
        }
    }
    out
}
