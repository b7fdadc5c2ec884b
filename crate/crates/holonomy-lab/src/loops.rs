//! Loops in chart coordinates: construction, anisotropic dilation, lengths,
//! boundary moment integrals, and the exact reduction of homogeneous disk
//! integrals to boundary moments.

use std::sync::Arc;

use num_rational::Ratio;

use crate::{Error, Result};

/// Anisotropic dilation data: δ_s scales the i-th displacement from `center`
/// by s^{wᵢ}. Euclidean space has all weights 1; step-2 Carnot charts use
/// (1, 1, 2).
#[derive(Debug, Clone)]
pub struct DilationStructure {
    pub weights: Vec<u32>,
    pub center: Vec<f64>,
}

impl DilationStructure {
    pub fn isotropic(center: Vec<f64>) -> Self {
        let weights = vec![1; center.len()];
        Self { weights, center }
    }

    pub fn apply(&self, point: &[f64], s: f64) -> Vec<f64> {
        point
            .iter()
            .zip(&self.center)
            .zip(&self.weights)
            .map(|((&z, &c), &w)| c + s.powi(w as i32) * (z - c))
            .collect()
    }

    /// Scale a velocity vector attached at `point` (the point itself is not
    /// needed: dilations are linear in the displacement).
    pub fn apply_velocity(&self, v: &[f64], s: f64) -> Vec<f64> {
        v.iter()
            .zip(&self.weights)
            .map(|(&x, &w)| s.powi(w as i32) * x)
            .collect()
    }

    /// Weighted degree Σ wᵢ eᵢ of a monomial exponent.
    pub fn weighted_degree(&self, exponent: &[usize]) -> usize {
        exponent
            .iter()
            .zip(&self.weights)
            .map(|(&e, &w)| e * w as usize)
            .sum()
    }

    /// Homogeneous dimension Σ wᵢ.
    pub fn homogeneous_dimension(&self) -> usize {
        self.weights.iter().map(|&w| w as usize).sum()
    }
}

type SegmentFn = Arc<dyn Fn(f64) -> (Vec<f64>, Vec<f64>) + Send + Sync>;

/// A piecewise-smooth closed (or open) path in chart coordinates. Each
/// segment maps its local parameter in [0, 1] to (position, velocity); the
/// global parameter traverses segments at equal parameter speed.
#[derive(Clone)]
pub struct LoopPath {
    pub dim: usize,
    segments: Vec<SegmentFn>,
}

impl LoopPath {
    pub fn from_segment(
        dim: usize,
        f: impl Fn(f64) -> (Vec<f64>, Vec<f64>) + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            segments: vec![Arc::new(f)],
        }
    }

    pub fn from_segments(dim: usize, segments: Vec<SegmentFn>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Precondition("a path needs at least one segment".into()));
        }
        Ok(Self { dim, segments })
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    /// The segments as stand-alone single-segment paths (integrators split
    /// at segment junctions, where velocities may jump).
    pub fn split_segments(&self) -> Vec<LoopPath> {
        self.segments
            .iter()
            .map(|seg| LoopPath {
                dim: self.dim,
                segments: vec![seg.clone()],
            })
            .collect()
    }

    /// Position and velocity at global parameter t ∈ [0, 1]. The velocity is
    /// reported with respect to the global parameter (chain rule included).
    pub fn eval(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.segments.len() as f64;
        let scaled = (t.clamp(0.0, 1.0)) * n;
        let mut idx = scaled.floor() as usize;
        if idx >= self.segments.len() {
            idx = self.segments.len() - 1;
        }
        let local = scaled - idx as f64;
        let (p, v) = (self.segments[idx])(local);
        let v = v.into_iter().map(|x| x * n).collect();
        (p, v)
    }

    pub fn basepoint(&self) -> Vec<f64> {
        (self.segments[0])(0.0).0
    }

    pub fn closure_defect(&self) -> f64 {
        let start = self.basepoint();
        let end = (self.segments[self.segments.len() - 1])(1.0).0;
        start
            .iter()
            .zip(&end)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Concatenation self·other (other is traversed after self); endpoints
    /// are not checked here.
    pub fn concat(&self, other: &LoopPath) -> LoopPath {
        let mut segments = self.segments.clone();
        segments.extend(other.segments.iter().cloned());
        LoopPath {
            dim: self.dim,
            segments,
        }
    }

    /// The reversed path t ↦ γ(1 − t).
    pub fn reverse(&self) -> LoopPath {
        let segments: Vec<SegmentFn> = self
            .segments
            .iter()
            .rev()
            .map(|seg| {
                let seg = seg.clone();
                let f: SegmentFn = Arc::new(move |t: f64| {
                    let (p, v) = seg(1.0 - t);
                    (p, v.into_iter().map(|x| -x).collect())
                });
                f
            })
            .collect();
        LoopPath {
            dim: self.dim,
            segments,
        }
    }

    /// Image of the path under the dilation δ_s.
    pub fn dilate(&self, dilation: &DilationStructure, s: f64) -> LoopPath {
        let dilation = dilation.clone();
        let segments: Vec<SegmentFn> = self
            .segments
            .iter()
            .map(|seg| {
                let seg = seg.clone();
                let d = dilation.clone();
                let f: SegmentFn = Arc::new(move |t: f64| {
                    let (p, v) = seg(t);
                    (d.apply(&p, s), d.apply_velocity(&v, s))
                });
                f
            })
            .collect();
        LoopPath {
            dim: self.dim,
            segments,
        }
    }

    /// ∫₀¹ f(γ(t), γ̇(t)) dt by adaptive Gauss–Legendre per segment.
    pub fn integrate(
        &self,
        f: &(dyn Fn(&[f64], &[f64]) -> f64 + Sync),
        rel_tol: f64,
    ) -> Result<f64> {
        let n = self.segments.len() as f64;
        let mut total = 0.0;
        for seg in self.segments.iter() {
            let g = |t_local: f64| {
                let (p, v) = seg(t_local);
                let v: Vec<f64> = v.into_iter().map(|x| x * n).collect();
                f(&p, &v) / n
            };
            total += adaptive_gl(&g, 0.0, 1.0, rel_tol, 24)?;
        }
        Ok(total)
    }

    /// Chart-Euclidean length ∫ |γ̇| dt (used for reporting and step-count
    /// heuristics; an anisotropic metric can be imposed via `integrate`).
    pub fn length(&self) -> Result<f64> {
        self.integrate(
            &|_p: &[f64], v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            1e-10,
        )
    }

    /// Boundary moment ∫_γ Π (zᵢ − cᵢ)^{μᵢ} dz_j, refined to ~1e−12 relative.
    pub fn moment_integral(&self, center: &[f64], mu: &[usize], j: usize) -> Result<f64> {
        if j >= self.dim || mu.len() != self.dim {
            return Err(Error::Precondition(format!(
                "moment index out of range: |mu| = {}, j = {}, dim = {}",
                mu.len(),
                j,
                self.dim
            )));
        }
        self.integrate(
            &|p: &[f64], v: &[f64]| {
                let mono: f64 = p
                    .iter()
                    .zip(center)
                    .zip(mu)
                    .map(|((&z, &c), &e)| (z - c).powi(e as i32))
                    .product();
                mono * v[j]
            },
            1e-12,
        )
    }
}

/// Adaptive 16-point Gauss–Legendre with interval bisection; compares the
/// one-panel estimate against the two-half estimate and recurses.
fn adaptive_gl(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_depth: usize,
) -> Result<f64> {
    fn panel(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        crate::liegroup::gauss_legendre_16()
            .iter()
            .map(|&(x, w)| w * half * f(mid + half * x))
            .sum()
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        floor: f64,
        depth: usize,
    ) -> Result<f64> {
        let mid = 0.5 * (a + b);
        let left = panel(f, a, mid);
        let right = panel(f, mid, b);
        let refined = left + right;
        if (refined - whole).abs() <= tol || depth == 0 {
            if depth == 0 && (refined - whole).abs() > tol * 100.0 {
                return Err(Error::Domain(
                    "adaptive quadrature failed to converge".into(),
                ));
            }
            return Ok(refined);
        }
        // halving the budget guards the global error, but only down to the
        // evaluation noise of the integrand — paths realized by numerical
        // lifts are smooth only to ~1e-14, and bisecting past that level
        // never converges
        let next = (0.5 * tol).max(floor);
        Ok(recurse(f, a, mid, left, next, floor, depth - 1)?
            + recurse(f, mid, b, right, next, floor, depth - 1)?)
    }
    let whole = panel(f, a, b);
    let scale = whole.abs().max(1.0);
    let floor = 64.0 * f64::EPSILON * scale;
    recurse(f, a, b, whole, rel_tol * scale, floor, max_depth)
}

/// Exact reduction of the disk integral of a weighted-homogeneous two-form
/// term (z − c)^α dzᵢ ∧ dzⱼ over the dilation-swept disk {δ_s γ : s ∈ [0,1]}
/// to boundary moments over γ itself:
///
///   ∫_disk (z−c)^α dzᵢ∧dzⱼ
///     = (1/m) ∫_γ (z−c)^α (wᵢ(zᵢ−cᵢ) dzⱼ − wⱼ(zⱼ−cⱼ) dzᵢ),
///
/// where m = w(α) + wᵢ + wⱼ is the total weight of the form. The identity
/// follows from contracting with the radial field Σ wᵢ(zᵢ−cᵢ)∂ᵢ, whose flow
/// generates the dilations. Returned as exact rational multiples of moment
/// words so downstream bookkeeping stays exact.
pub fn disk_to_boundary(
    dilation: &DilationStructure,
    alpha: &[usize],
    i: usize,
    j: usize,
) -> Result<Vec<(Ratio<i64>, Vec<usize>, usize)>> {
    if i == j {
        return Err(Error::Precondition("two-form needs distinct directions".into()));
    }
    let wi = dilation.weights[i] as i64;
    let wj = dilation.weights[j] as i64;
    let m = dilation.weighted_degree(alpha) as i64 + wi + wj;
    let mut ei = alpha.to_vec();
    ei[i] += 1;
    let mut ej = alpha.to_vec();
    ej[j] += 1;
    Ok(vec![
        (Ratio::new(wi, m), ei, j),
        (Ratio::new(-wj, m), ej, i),
    ])
}

/// Rank of the free nilpotent Lie algebra on n₁ generators with step k:
/// ν = Σ_{j≤k} (1/j) Σ_{d|j} μ(d) n₁^{j/d}  (Witt's formula per layer).
pub fn free_nilpotent_rank(n1: u64, step: u32) -> u64 {
    (1..=step as u64).map(|j| witt_layer_dim(n1, j)).sum()
}

/// Dimension of the j-th layer of the free Lie algebra on n₁ generators.
pub fn witt_layer_dim(n1: u64, j: u64) -> u64 {
    let total: i64 = (1..=j)
        .filter(|d| j % d == 0)
        .map(|d| moebius(d) * (n1 as i64).pow((j / d) as u32))
        .sum();
    (total / j as i64) as u64
}

fn moebius(n: u64) -> i64 {
    let mut n = n;
    let mut count = 0;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            count += 1;
        }
        p += 1;
    }
    if n > 1 {
        count += 1;
    }
    if count % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Circle of radius r in the (i, j) coordinate plane through chart `center`,
/// based at center + r·eᵢ.
pub fn circle(dim: usize, center: &[f64], r: f64, i: usize, j: usize) -> LoopPath {
    let center = center.to_vec();
    LoopPath::from_segment(dim, move |t: f64| {
        let ang = 2.0 * std::f64::consts::PI * t;
        let mut p = center.clone();
        p[i] += r * ang.cos();
        p[j] += r * ang.sin();
        let mut v = vec![0.0; p.len()];
        v[i] = -r * ang.sin() * 2.0 * std::f64::consts::PI;
        v[j] = r * ang.cos() * 2.0 * std::f64::consts::PI;
        (p, v)
    })
}

/// Closed polygon through the given vertices (the last edge returns to the
/// first vertex), one linear segment per edge.
pub fn polygon(vertices: &[Vec<f64>]) -> Result<LoopPath> {
    if vertices.len() < 3 {
        return Err(Error::Precondition("polygon needs at least 3 vertices".into()));
    }
    let dim = vertices[0].len();
    let mut segments: Vec<SegmentFn> = Vec::new();
    for k in 0..vertices.len() {
        let a = vertices[k].clone();
        let b = vertices[(k + 1) % vertices.len()].clone();
        segments.push(Arc::new(move |t: f64| {
            let p: Vec<f64> = a.iter().zip(&b).map(|(&x, &y)| x + t * (y - x)).collect();
            let v: Vec<f64> = a.iter().zip(&b).map(|(&x, &y)| y - x).collect();
            (p, v)
        }));
    }
    LoopPath::from_segments(dim, segments)
}

/// Planar Lissajous-type loop (a sin(2π p t + φ), b sin(2π q t)) embedded in
/// the first two coordinates; closed for integer p, q.
pub fn lissajous(dim: usize, a: f64, b: f64, p: u32, q: u32, phase: f64) -> LoopPath {
    LoopPath::from_segment(dim, move |t: f64| {
        let tau = 2.0 * std::f64::consts::PI;
        let mut pos = vec![0.0; dim];
        let mut vel = vec![0.0; dim];
        pos[0] = a * (tau * p as f64 * t + phase).sin();
        pos[1] = b * (tau * q as f64 * t).sin();
        vel[0] = a * tau * p as f64 * (tau * p as f64 * t + phase).cos();
        vel[1] = b * tau * q as f64 * (tau * q as f64 * t).cos();
        (pos, vel)
    })
}

/// Planar figure-eight (a sin 2πt, b sin 4πt): zero signed area but nonzero
/// third moments, the canonical probe for weight-3 terms.
pub fn figure_eight(dim: usize, a: f64, b: f64) -> LoopPath {
    lissajous(dim, a, b, 1, 2, 0.0)
}

/// Cumulative integral F(t) = ∫₀ᵗ f with cheap machine-accurate evaluation:
/// panel boundary values are precomputed with one Gauss–Legendre rule per
/// panel, and interior points add a partial panel.
pub struct CumulativeIntegral {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    boundaries: Vec<f64>,
    panels: usize,
}

impl CumulativeIntegral {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static, panels: usize) -> Self {
        let f: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(f);
        let mut boundaries = vec![0.0; panels + 1];
        let h = 1.0 / panels as f64;
        for k in 0..panels {
            let a = k as f64 * h;
            let mid = a + 0.5 * h;
            let val: f64 = crate::liegroup::gauss_legendre_16()
                .iter()
                .map(|&(x, w)| w * 0.5 * h * f(mid + 0.5 * h * x))
                .sum();
            boundaries[k + 1] = boundaries[k] + val;
        }
        Self { f, boundaries, panels }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        let h = 1.0 / self.panels as f64;
        let k = ((t / h).floor() as usize).min(self.panels - 1);
        let a = k as f64 * h;
        let mid = 0.5 * (a + t);
        let half = 0.5 * (t - a);
        let partial: f64 = crate::liegroup::gauss_legendre_16()
            .iter()
            .map(|&(x, w)| w * half * (self.f)(mid + half * x))
            .sum();
        self.boundaries[k] + partial
    }

    pub fn total(&self) -> f64 {
        self.boundaries[self.panels]
    }
}
