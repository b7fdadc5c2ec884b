//! Holonomy of loops: the transport equation ȧ(t)·a(t)⁻¹ = −ω(γ̇(t)) is
//! integrated on the structure group, and the result is reported together
//! with its logarithm and a step-doubling residual estimate.

use crate::algebra::{op_norm, Mat};
use crate::gauge::GaugeConnection;
use crate::liegroup::{mat_log, solve_transport, AlgebraPath};
use crate::loops::LoopPath;
use crate::{Error, Result};

/// Outcome of a holonomy computation.
pub struct HolonomyResult {
    /// Parallel transport around the loop, an element of the structure group.
    pub element: Mat,
    /// Principal logarithm when the element lies in the log domain.
    pub log: Option<Mat>,
    /// Steps actually used by the integrator.
    pub steps: usize,
    /// ‖result(steps) − result(2·steps)‖, an a-posteriori error estimate.
    pub residual: f64,
}

/// Step-count heuristic: resolve the loop with at least 500 steps and at
/// least ~200 steps per unit of accumulated connection strength ℓ·‖A‖.
pub fn default_steps(length: f64, sup_norm: f64) -> usize {
    let budget = (200.0 * length.max(1.0) * sup_norm).ceil() as usize;
    budget.max(500)
}

/// The algebra-valued pullback t ↦ −ω(γ(t))(γ̇(t)) driving the transport.
pub fn pullback_path(connection: &GaugeConnection, path: &LoopPath) -> Result<AlgebraPath> {
    if path.dim != connection.dim {
        return Err(Error::Precondition(format!(
            "loop lives in dimension {}, connection in {}",
            path.dim, connection.dim
        )));
    }
    let eval = make_owned_evaluator(connection, path)?;
    Ok(AlgebraPath::new(move |t| eval(t)))
}

/// Holonomy of `path` with an explicit step count.
pub fn holonomy_with_steps(
    connection: &GaugeConnection,
    path: &LoopPath,
    steps: usize,
) -> Result<HolonomyResult> {
    if path.dim != connection.dim {
        return Err(Error::Precondition(format!(
            "loop lives in dimension {}, connection in {}",
            path.dim, connection.dim
        )));
    }
    if path.closure_defect() > 1e-8 {
        return Err(Error::Precondition(format!(
            "path is not closed: endpoint defect {:.3e}",
            path.closure_defect()
        )));
    }
    // integrate each smooth segment separately: velocities may jump at
    // junctions and a step straddling one would degrade the order
    let pieces = path.split_segments();
    let per_segment = (steps / pieces.len()).max(8);
    let transport = |mult: usize| -> Result<Mat> {
        let mut a = crate::algebra::identity(connection.q);
        for piece in &pieces {
            let a_path = pullback_path(connection, piece)?;
            a = solve_transport(&a_path, per_segment * mult)? * a;
        }
        Ok(a)
    };
    let coarse = transport(1)?;
    let fine = transport(2)?;
    let residual = op_norm(&(&coarse - &fine));
    let log = mat_log(&fine).ok();
    Ok(HolonomyResult {
        element: fine,
        log,
        steps,
        residual,
    })
}

/// Holonomy with the default step heuristic.
pub fn holonomy(connection: &GaugeConnection, path: &LoopPath) -> Result<HolonomyResult> {
    let length = path.length()?;
    // estimate the pullback sup norm on a coarse grid
    let mut sup: f64 = 0.0;
    for k in 0..=256 {
        let (p, v) = path.eval(k as f64 / 256.0);
        sup = sup.max(op_norm(&connection.pair(&p, &v)?));
    }
    holonomy_with_steps(connection, path, default_steps(length, sup))
}

/// Transport along the dilation ray s ↦ δ_s(point) from the center to the
/// point (the radial segment of the given dilation structure). Returns the
/// group element a with ȧ·a⁻¹ = −ω(ray′), a(0) = 1.
pub fn radial_transport(
    connection: &GaugeConnection,
    dilation: &crate::loops::DilationStructure,
    point: &[f64],
    steps: usize,
) -> Result<Mat> {
    let dilation = dilation.clone();
    let point = point.to_vec();
    let ray = LoopPath::from_segment(point.len(), move |s: f64| {
        let p = dilation.apply(&point, s);
        // d/ds δ_s(z)ᵢ = wᵢ s^{wᵢ−1} (zᵢ − cᵢ)
        let v: Vec<f64> = point
            .iter()
            .zip(&dilation.center)
            .zip(&dilation.weights)
            .map(|((&z, &c), &w)| w as f64 * s.powi(w as i32 - 1) * (z - c))
            .collect();
        (p, v)
    });
    let a_path = pullback_path(connection, &ray)?;
    solve_transport(&a_path, steps)
}

/// The transport path of the radial gauge, without constructing that gauge
/// globally: since the radial-gauge connection annihilates the dilation
/// field S, it is recovered from curvature alone as
///
///   (σ_rad*ω)_z(v) = ∫₀¹ Ad(g_r⁻¹) Ω_{δ_r z}( (1/r)S(δ_r z), dδ_r v ) dr,
///
/// with g_r the ray transport from the center to δ_r z in the working
/// gauge. The returned path is t ↦ −(σ_rad*ω)(γ̇(t)); its holonomy equals
/// holonomy in any gauge sharing the basepoint frame, and the inner
/// integral uses composite 16-point Gauss–Legendre with `quad_nodes` nodes.
pub fn radial_transport_path(
    connection: &GaugeConnection,
    dilation: &crate::loops::DilationStructure,
    path: &LoopPath,
    quad_nodes: usize,
) -> Result<AlgebraPath> {
    if path.dim != connection.dim {
        return Err(Error::Precondition(format!(
            "loop lives in dimension {}, connection in {}",
            path.dim, connection.dim
        )));
    }
    // probe the swept disk before handing out a closure: the worst chart
    // excursion of the rays is at the loop itself (r = 1)
    for k in 0..=64 {
        let (p, _) = path.eval(k as f64 / 64.0);
        connection.curvature_at(&p)?;
    }
    let conn = connection.clone();
    let d = dilation.clone();
    let path = path.clone();
    let panels = (quad_nodes / 16).max(1);
    let ray_steps = 24;
    let q = connection.q;
    let eval = move |t: f64| -> Mat {
        let (z, v) = path.eval(t);
        let mut acc = crate::algebra::zero(q);
        let gl = crate::liegroup::gauss_legendre_16();
        for panel in 0..panels {
            let a = panel as f64 / panels as f64;
            let b = (panel + 1) as f64 / panels as f64;
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            for &(node, gw) in gl.iter() {
                let r = mid + half * node;
                let x = d.apply(&z, r);
                let g = radial_transport(&conn, &d, &x, ray_steps)
                    .expect("ray transport failed inside the swept disk");
                let g_inv = g.clone().try_inverse().expect("transport not invertible");
                let curv = conn
                    .curvature_at(&x)
                    .expect("curvature evaluation failed inside the swept disk");
                // u = (1/r)S(δ_r z), finite at r = 0 because all weights ≥ 1
                let u: Vec<f64> = z
                    .iter()
                    .zip(&d.center)
                    .zip(&d.weights)
                    .map(|((&zi, &ci), &w)| w as f64 * r.powi(w as i32 - 1) * (zi - ci))
                    .collect();
                let w_vec: Vec<f64> = v
                    .iter()
                    .zip(&d.weights)
                    .map(|(&vi, &w)| r.powi(w as i32) * vi)
                    .collect();
                let mut omega_uv = crate::algebra::zero(q);
                for i in 0..u.len() {
                    for j in 0..u.len() {
                        if u[i] != 0.0 && w_vec[j] != 0.0 {
                            omega_uv += &curv[i][j] * num_complex::Complex64::new(u[i] * w_vec[j], 0.0);
                        }
                    }
                }
                acc += &g_inv * omega_uv * &g * num_complex::Complex64::new(gw * half, 0.0);
            }
        }
        -acc
    };
    Ok(AlgebraPath::with_coarse_sup(eval, 16))
}

/// Build an owned, `Send + Sync` evaluator of t ↦ −ω(γ̇) that no longer
/// borrows the connection. Analytic and transformed connections are cloned
/// structurally; callable ones are rewrapped by sharing their closures.
fn make_owned_evaluator(
    connection: &GaugeConnection,
    path: &LoopPath,
) -> Result<Box<dyn Fn(f64) -> Mat + Send + Sync>> {
    // probe once so configuration errors surface before integration starts
    let (p0, v0) = path.eval(0.0);
    connection.pair(&p0, &v0)?;
    let conn = connection.clone();
    let path = path.clone();
    Ok(Box::new(move |t: f64| {
        let (p, v) = path.eval(t);
        conn.pair(&p, &v)
            .map(|m| -m)
            .expect("pullback evaluation failed mid-integration")
    }))
}
