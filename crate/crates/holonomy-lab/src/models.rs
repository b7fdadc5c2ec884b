//! Built-in model geometries: Euclidean space, Riemannian normal-coordinate
//! patches, the Heisenberg group, and the sub-Riemannian Hopf fibration on
//! SU(2). Each ships privileged coordinates, a frame/coframe pair, dilation
//! weights, and (for the step-2 groups) the unique selector.

use std::sync::Arc;

use crate::expr::Expr;
use crate::loops::{CumulativeIntegral, DilationStructure, LoopPath};
use crate::{Error, Result};

/// A chart model: coordinates, anisotropic dilations, a frame of vector
/// fields (the first `horizontal` ones spanning the distribution), the dual
/// coframe, and an optional selector pairing each vertical coframe index
/// with a horizontal two-vector.
#[derive(Clone)]
pub struct ModelSpace {
    pub name: String,
    pub dim: usize,
    pub dilation: DilationStructure,
    pub chart_radius: f64,
    /// frame[a][i] = coefficient of ∂_{z_i} in the a-th frame field.
    pub frame: Vec<Vec<Expr>>,
    /// coframe[a][i] = coefficient of dz_i in the a-th coframe form.
    pub coframe: Vec<Vec<Expr>>,
    /// Number of horizontal frame fields n₁.
    pub horizontal: usize,
    /// selector[c] = Some((a, b)) means χ maps the c-th frame direction to
    /// X_a ∧ X_b; horizontal indices carry None.
    pub selector: Vec<Option<(usize, usize)>>,
    /// Riemannian metric g_ij as expressions, when the model carries one.
    pub metric: Option<Vec<Vec<Expr>>>,
}

impl ModelSpace {
    pub fn check_in_chart(&self, point: &[f64]) -> Result<()> {
        if self.chart_radius.is_infinite() {
            return Ok(());
        }
        let r: f64 = point.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r >= self.chart_radius {
            return Err(Error::Domain(format!(
                "point at radius {r:.3} outside chart of radius {}",
                self.chart_radius
            )));
        }
        Ok(())
    }

    /// frame matrix F with F[a][i] = X_a^i(p).
    pub fn frame_at(&self, point: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_in_chart(point)?;
        self.frame
            .iter()
            .map(|row| row.iter().map(|e| e.eval(point)).collect())
            .collect()
    }

    /// coframe matrix C with C[a][i] = (α_a)_i(p).
    pub fn coframe_at(&self, point: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_in_chart(point)?;
        self.coframe
            .iter()
            .map(|row| row.iter().map(|e| e.eval(point)).collect())
            .collect()
    }

    /// max |α_a(X_b) − δ_ab| over all pairs.
    pub fn duality_residual(&self, point: &[f64]) -> Result<f64> {
        let f = self.frame_at(point)?;
        let c = self.coframe_at(point)?;
        let mut worst: f64 = 0.0;
        for a in 0..self.dim {
            for b in 0..self.dim {
                let pairing: f64 = c[a].iter().zip(&f[b]).map(|(x, y)| x * y).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((pairing - want).abs());
            }
        }
        Ok(worst)
    }

    /// Commutator [X_a, X_b] at a point, in coordinate components:
    /// Σ_i (X_a^i ∂_i X_b^k − X_b^i ∂_i X_a^k).
    pub fn bracket_at(&self, a: usize, b: usize, point: &[f64]) -> Result<Vec<f64>> {
        self.check_in_chart(point)?;
        let mut out = vec![0.0; self.dim];
        for (k, slot) in out.iter_mut().enumerate() {
            for i in 0..self.dim {
                *slot += self.frame[a][i].eval(point)? * self.frame[b][k].diff(i).eval(point)?
                    - self.frame[b][i].eval(point)? * self.frame[a][k].diff(i).eval(point)?;
            }
        }
        Ok(out)
    }

    /// dα_c(X_a, X_b) at a point, via dα = Σ_{i<j}(∂_i c_j − ∂_j c_i) dz_i∧dz_j.
    pub fn d_coframe_at(&self, c: usize, a: usize, b: usize, point: &[f64]) -> Result<f64> {
        self.check_in_chart(point)?;
        let fa = &self.frame_at(point)?[a];
        let fb = &self.frame_at(point)?[b];
        let mut out = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i == j {
                    continue;
                }
                let dc = self.coframe[c][j].diff(i).eval(point)?;
                out += dc * fa[i] * fb[j];
            }
        }
        // the loop above sums ∂_i c_j (X_a^i X_b^j − handled by full i≠j range)
        let mut anti = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i == j {
                    continue;
                }
                let dc = self.coframe[c][j].diff(i).eval(point)?;
                anti += dc * fb[i] * fa[j];
            }
        }
        Ok(out - anti)
    }

    /// Express an ambient covector (row of dz-coefficients) in the coframe
    /// basis by solving the linear system.
    pub fn covector_in_coframe(&self, point: &[f64], covector: &[f64]) -> Result<Vec<f64>> {
        // coefficients λ with Σ λ_a α_a = covector ⇔ λ = covector · F^T
        // since α_a(X_b) = δ_ab: λ_a = covector(X_a)
        let f = self.frame_at(point)?;
        Ok((0..self.dim)
            .map(|a| covector.iter().zip(&f[a]).map(|(x, y)| x * y).sum())
            .collect())
    }
}

/// Euclidean ℝⁿ: coordinate frame, isotropic dilations, no selector.
pub fn make_euclidean(n: usize) -> Result<ModelSpace> {
    if n < 2 {
        return Err(Error::Precondition("Euclidean model needs n ≥ 2".into()));
    }
    let frame: Vec<Vec<Expr>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|i| if i == a { Expr::one() } else { Expr::zero() })
                .collect()
        })
        .collect();
    Ok(ModelSpace {
        name: format!("euclidean:{n}"),
        dim: n,
        dilation: DilationStructure::isotropic(vec![0.0; n]),
        chart_radius: f64::INFINITY,
        coframe: frame.clone(),
        frame,
        horizontal: n,
        selector: vec![None; n],
        metric: None,
    })
}

/// The Heisenberg group in exponential coordinates (x, y, z):
/// Z₁ = ∂x − ½y∂z, Z₂ = ∂y + ½x∂z, Z₃ = ∂z, θ = dz + ½(y dx − x dy).
pub fn make_heisenberg() -> ModelSpace {
    let x = Expr::coord(0);
    let y = Expr::coord(1);
    let half = Expr::constant(0.5);
    let frame = vec![
        vec![Expr::one(), Expr::zero(), -(half.clone() * y.clone())],
        vec![Expr::zero(), Expr::one(), half.clone() * x.clone()],
        vec![Expr::zero(), Expr::zero(), Expr::one()],
    ];
    let coframe = vec![
        vec![Expr::one(), Expr::zero(), Expr::zero()],
        vec![Expr::zero(), Expr::one(), Expr::zero()],
        vec![half.clone() * y, -(half * x), Expr::one()],
    ];
    let mut dilation = DilationStructure::isotropic(vec![0.0; 3]);
    dilation.weights = vec![1, 1, 2];
    ModelSpace {
        name: "heisenberg".into(),
        dim: 3,
        dilation,
        chart_radius: f64::INFINITY,
        frame,
        coframe,
        horizontal: 2,
        selector: vec![None, None, Some((0, 1))],
        metric: None,
    }
}

/// The sub-Riemannian Hopf fibration: SU(2) in the chart a ↦ (2u₂, 2v₂, 2v₁)
/// centered at the identity, with the left-invariant frame pushed through
/// the chart. With ρ = √(1 − |z|²/4):
///
///   X₁ = ρ∂₁ + ½z₃∂₂ − ½z₂∂₃,
///   X₂ = −½z₃∂₁ + ρ∂₂ + ½z₁∂₃,
///   X₃ = ½z₂∂₁ − ½z₁∂₂ + ρ∂₃,
///
/// satisfying [X₁,X₂] = X₃, [X₂,X₃] = X₁, [X₃,X₁] = X₂ exactly, with
/// D = span{X₁, X₂}. The dual coframe is α_a = Σᵢ(ρδ_ai + A_ai + z_az_i/4ρ)dzᵢ
/// with A the frame's rotational part.
pub fn make_hopf() -> ModelSpace {
    let z1 = Expr::coord(0);
    let z2 = Expr::coord(1);
    let z3 = Expr::coord(2);
    let quarter = Expr::constant(0.25);
    let rho2 = Expr::one()
        - quarter.clone()
            * (z1.clone() * z1.clone() + z2.clone() * z2.clone() + z3.clone() * z3.clone());
    let rho = rho2.sqrt();
    let half = Expr::constant(0.5);
    // rotational part A[a][i]; frame = ρI + A
    let a_part: Vec<Vec<Expr>> = vec![
        vec![Expr::zero(), half.clone() * z3.clone(), -(half.clone() * z2.clone())],
        vec![-(half.clone() * z3.clone()), Expr::zero(), half.clone() * z1.clone()],
        vec![half.clone() * z2.clone(), -(half * z1.clone()), Expr::zero()],
    ];
    let zc = [z1, z2, z3];
    let frame: Vec<Vec<Expr>> = (0..3)
        .map(|a| {
            (0..3)
                .map(|i| {
                    let diag = if a == i { rho.clone() } else { Expr::zero() };
                    diag + a_part[a][i].clone()
                })
                .collect()
        })
        .collect();
    // coframe (ρI + A + zzᵀ/4ρ): C·Fᵀ = I exactly
    let coframe: Vec<Vec<Expr>> = (0..3)
        .map(|a| {
            (0..3)
                .map(|i| {
                    let diag = if a == i { rho.clone() } else { Expr::zero() };
                    diag + a_part[a][i].clone()
                        + zc[a].clone() * zc[i].clone() * quarter.clone() * rho.recip()
                })
                .collect()
        })
        .collect();
    let mut dilation = DilationStructure::isotropic(vec![0.0; 3]);
    dilation.weights = vec![1, 1, 2];
    ModelSpace {
        name: "hopf".into(),
        dim: 3,
        dilation,
        chart_radius: 0.9,
        frame,
        coframe,
        horizontal: 2,
        selector: vec![None, None, Some((0, 1))],
        metric: None,
    }
}

/// The nilpotentization frame shared by both step-2 models in these charts:
/// Z₁ = ∂₁ − ½z₂∂₃, Z₂ = ∂₂ + ½z₁∂₃, Z₃ = ∂₃ = [Z₁, Z₂] (the Heisenberg
/// frame; the Hopf frame limits to the same fields under s·δ_s^*).
pub fn nilpotent_frame_step2() -> Vec<Vec<Expr>> {
    make_heisenberg().frame
}

/// Riemannian normal-coordinate patch: the metric must already be expressed
/// in normal coordinates at `x0` (g(x0) = I, ∂g(x0) = 0); both properties
/// are validated. The frame stays the coordinate frame and isotropic weights
/// apply.
pub fn make_normal_coordinates(metric: Vec<Vec<Expr>>, x0: Vec<f64>) -> Result<ModelSpace> {
    let n = x0.len();
    if metric.len() != n || metric.iter().any(|row| row.len() != n) {
        return Err(Error::Precondition("metric must be an n×n expression table".into()));
    }
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { 1.0 } else { 0.0 };
            let got = metric[i][j].eval(&x0)?;
            if (got - want).abs() > 1e-12 {
                return Err(Error::Precondition(format!(
                    "g_{i}{j}(x0) = {got}, expected {want}: not normal coordinates"
                )));
            }
            let sym = metric[j][i].eval(&x0)?;
            if (got - sym).abs() > 1e-12 {
                return Err(Error::Precondition(format!(
                    "metric not symmetric at x0 in entry ({i},{j})"
                )));
            }
            for k in 0..n {
                let partial = metric[i][j].diff(k).eval(&x0)?;
                if partial.abs() > 1e-10 {
                    return Err(Error::Precondition(format!(
                        "∂_{k} g_{i}{j}(x0) = {partial:.3e} ≠ 0: not normal coordinates"
                    )));
                }
            }
        }
    }
    let base = make_euclidean(n)?;
    Ok(ModelSpace {
        name: "normal".into(),
        dilation: DilationStructure::isotropic(x0),
        metric: Some(metric),
        ..base
    })
}

/// Round-sphere metric in normal coordinates at a pole (unit curvature),
/// truncated to polynomial order: g_ij = δ_ij + h(u)(u δ_ij − z_i z_j) with
/// u = |z|² and h(u) = −1/3 + 2u/45 − u²/315, the series of (sin²r/r² − 1)/r².
pub fn sphere_normal_metric(n: usize) -> Vec<Vec<Expr>> {
    let u: Expr = (0..n)
        .map(|i| Expr::coord(i) * Expr::coord(i))
        .fold(Expr::zero(), |acc, e| acc + e);
    let h = Expr::constant(-1.0 / 3.0)
        + u.clone() * Expr::constant(2.0 / 45.0)
        - u.clone() * u.clone() * Expr::constant(1.0 / 315.0);
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let delta = if i == j { Expr::one() } else { Expr::zero() };
                    let correction = if i == j {
                        u.clone() - Expr::coord(i) * Expr::coord(j)
                    } else {
                        Expr::zero() - Expr::coord(i) * Expr::coord(j)
                    };
                    delta + h.clone() * correction
                })
                .collect()
        })
        .collect()
}

/// Horizontal lift of a planar loop into the Heisenberg group based at the
/// origin: θ(γ̇) = 0 forces ż₃ = ½(z₁ż₂ − z₂ż₁). Works for any planar path;
/// the lift closes exactly when the signed area vanishes.
pub fn heisenberg_lift(planar: &LoopPath) -> Result<LoopPath> {
    if planar.dim != 2 {
        return Err(Error::Precondition("Heisenberg lift expects a planar path".into()));
    }
    let p = planar.clone();
    let integrand = move |t: f64| {
        let (z, v) = p.eval(t);
        0.5 * (z[0] * v[1] - z[1] * v[0])
    };
    let height = Arc::new(CumulativeIntegral::new(integrand, 512));
    let p = planar.clone();
    let h = height.clone();
    Ok(LoopPath::from_segment(3, move |t: f64| {
        let (z, v) = p.eval(t);
        let z3 = h.eval(t);
        let v3 = 0.5 * (z[0] * v[1] - z[1] * v[0]);
        (vec![z[0], z[1], z3], vec![v[0], v[1], v3])
    }))
}

/// Horizontal lift of a planar loop into the Hopf model based at the origin:
/// α₃(γ̇) = 0, i.e. ż₃ = −(c₃₁ż₁ + c₃₂ż₂)/c₃₃ with (c₃ᵢ) the coefficients of
/// α₃ — a genuine ODE in z₃. Returns the lifted path together with the
/// endpoint drift z₃(1) − z₃(0); the lift only closes for the right planar
/// loop.
pub fn hopf_lift(planar: &LoopPath) -> Result<(LoopPath, f64)> {
    if planar.dim != 2 {
        return Err(Error::Precondition("Hopf lift expects a planar path".into()));
    }
    fn rhs(z1: f64, z2: f64, v1: f64, v2: f64, z3: f64) -> Result<f64> {
        let norm2 = z1 * z1 + z2 * z2 + z3 * z3;
        if norm2 >= 3.24 {
            return Err(Error::Domain("Hopf lift left the chart".into()));
        }
        let rho = (1.0 - 0.25 * norm2).sqrt();
        // α₃ = (½z₂ + z₃z₁/4ρ)dz₁ + (−½z₁ + z₃z₂/4ρ)dz₂ + (ρ + z₃²/4ρ)dz₃
        let c1 = 0.5 * z2 + z3 * z1 / (4.0 * rho);
        let c2 = -0.5 * z1 + z3 * z2 / (4.0 * rho);
        let c3 = rho + z3 * z3 / (4.0 * rho);
        Ok(-(c1 * v1 + c2 * v2) / c3)
    }
    fn step(p: &LoopPath, t: f64, h: f64, z3: f64) -> Result<f64> {
        let f = |tt: f64, zz: f64| -> Result<f64> {
            let (z, v) = p.eval(tt);
            rhs(z[0], z[1], v[0], v[1], zz)
        };
        let k1 = f(t, z3)?;
        let k2 = f(t + 0.5 * h, z3 + 0.5 * h * k1)?;
        let k3 = f(t + 0.5 * h, z3 + 0.5 * h * k2)?;
        let k4 = f(t + h, z3 + h * k3)?;
        Ok(z3 + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
    }
    // dense grid of z₃ values
    let n = 4096;
    let h = 1.0 / n as f64;
    let mut grid = vec![0.0; n + 1];
    for k in 0..n {
        grid[k + 1] = step(planar, k as f64 * h, h, grid[k])?;
    }
    let drift = grid[n];
    let grid = Arc::new(grid);
    let p = planar.clone();
    let lifted = LoopPath::from_segment(3, move |t: f64| {
        let t = t.clamp(0.0, 1.0);
        let k = ((t * n as f64).floor() as usize).min(n - 1);
        let t_k = k as f64 * h;
        let z3 = if t - t_k > 1e-14 {
            step(&p, t_k, t - t_k, grid[k]).expect("Hopf lift evaluation left the chart")
        } else {
            grid[k]
        };
        let (z, v) = p.eval(t);
        let v3 = rhs(z[0], z[1], v[0], v[1], z3).expect("Hopf lift evaluation left the chart");
        (vec![z[0], z[1], z3], vec![v[0], v[1], v3])
    });
    Ok((lifted, drift))
}

/// Close a horizontal lift by the secant method on a one-parameter planar
/// family: finds λ with drift(λ) = 0 and returns the closed lifted loop.
pub fn close_horizontal_loop(
    family: impl Fn(f64) -> LoopPath,
    lift: impl Fn(&LoopPath) -> Result<(LoopPath, f64)>,
) -> Result<LoopPath> {
    let mut l0 = 0.0;
    let mut l1 = 0.05;
    let (_, mut d0) = lift(&family(l0))?;
    let (mut path1, mut d1) = lift(&family(l1))?;
    for _ in 0..50 {
        if d1.abs() < 1e-13 {
            return Ok(path1);
        }
        if (d1 - d0).abs() < 1e-300 {
            break;
        }
        let l2 = l1 - d1 * (l1 - l0) / (d1 - d0);
        l0 = l1;
        d0 = d1;
        l1 = l2;
        let (p, d) = lift(&family(l1))?;
        path1 = p;
        d1 = d;
    }
    if d1.abs() < 1e-11 {
        Ok(path1)
    } else {
        Err(Error::NonHorizontal(d1))
    }
}

/// Look up a built-in model by its configuration name.
pub fn model_by_name(name: &str) -> Result<ModelSpace> {
    if let Some(n) = name.strip_prefix("euclidean:") {
        let n: usize = n
            .parse()
            .map_err(|_| Error::Config(format!("bad euclidean dimension in '{name}'")))?;
        return make_euclidean(n);
    }
    match name {
        "heisenberg" => Ok(make_heisenberg()),
        "hopf" => Ok(make_hopf()),
        "normal:sphere" => make_normal_coordinates(sphere_normal_metric(3), vec![0.0; 3]),
        "normal:flat" => {
            let n = 3;
            let metric = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| if i == j { Expr::one() } else { Expr::zero() })
                        .collect()
                })
                .collect();
            make_normal_coordinates(metric, vec![0.0; n])
        }
        _ => Err(Error::Config(format!("unknown model '{name}'"))),
    }
}
