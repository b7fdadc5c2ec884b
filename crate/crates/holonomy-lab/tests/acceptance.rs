//! End-to-end acceptance checks. Each test prints a single verdict line so
//! the whole battery reads as a checklist; tolerances are pinned here and
//! nowhere else.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use holonomy_lab::algebra::{op_norm, GroupElement, GroupTag, MatrixAlgebra};
use holonomy_lab::expansion::{euclidean_f3, model_f5, selector_modify, taylor_functional};
use holonomy_lab::experiment::{
    build_connection, fit_order, horizontal_length, loop_at_scale, run_sweep, Expansion,
    SweepConfig,
};
use holonomy_lab::expr::Expr;
use holonomy_lab::field::MatrixField;
use holonomy_lab::gauge::GaugeMap;
use holonomy_lab::holonomy::{holonomy, holonomy_with_steps, pullback_path};
use holonomy_lab::liegroup::{mat_log, solve_transport, AlgebraPath, PicardConstants};
use holonomy_lab::loops::{free_nilpotent_rank, polygon, DilationStructure};
use holonomy_lab::models::model_by_name;

fn verdict(name: &str, ok: bool, detail: &str) {
    println!("{}  {name} — {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{name}: {detail}");
}

fn base_cfg() -> SweepConfig {
    SweepConfig {
        model: "euclidean:2".into(),
        connection: "su2-poly".into(),
        seed: 7,
        family: "harmonic".into(),
        loop_a: 0.5,
        loop_b: 0.3,
        ..SweepConfig::default()
    }
}

#[test]
fn criterion_1_abelian_stokes_exactness() {
    let cfg = SweepConfig {
        connection: "abelian-constant".into(),
        amplitude: 0.7,
        family: "circle".into(),
        loop_radius: 0.4,
        expansion: Expansion::F3,
        declared_m: 4.0,
        ..base_cfg()
    };
    let report = run_sweep(&cfg).unwrap();
    let worst = report
        .rows
        .iter()
        .map(|r| r.residual_norm)
        .fold(0.0f64, f64::max);
    verdict(
        "abelian Stokes exactness",
        report.verdict == "exact" && worst <= 1e-9,
        &format!("worst ‖log Hol + F³‖ = {worst:.3e} over scales 2⁻²..2⁻⁹"),
    );
}

#[test]
fn criterion_2_euclidean_order_four() {
    let cfg = SweepConfig {
        expansion: Expansion::F3,
        declared_m: 4.0,
        ..base_cfg()
    };
    let with_f3 = run_sweep(&cfg).unwrap().fitted_order.unwrap();

    let bare = SweepConfig {
        family: "circle".into(),
        loop_radius: 0.4,
        scales: (1..=6).map(|k| 0.5f64.powi(k)).collect(),
        expansion: Expansion::None,
        declared_m: 2.0,
        ..base_cfg()
    };
    let without = run_sweep(&bare).unwrap().fitted_order.unwrap();
    verdict(
        "Euclidean order 4",
        with_f3 >= 3.7 && (1.9..=2.1).contains(&without),
        &format!("F³ fitted order {with_f3:.3} (≥ 3.7); no expansion {without:.3} (∈ [1.9, 2.1])"),
    );
}

#[test]
fn criterion_3_gauge_independence() {
    let cfg = base_cfg();
    let model = model_by_name("euclidean:2").unwrap();
    let conn = build_connection(&cfg, &model).unwrap();
    let d = DilationStructure::isotropic(vec![0.0, 0.0]);
    let reference = taylor_functional(&conn, &d, 3).unwrap();
    // the harmonic probe passes through the basepoint-fixing center
    let loop_ = loop_at_scale(&cfg, &model, 0.3).unwrap();
    let hol_ref = holonomy_with_steps(&conn, &loop_, 1200).unwrap().element;

    let alg = MatrixAlgebra::su2();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut worst_f = 0.0f64;
    let mut worst_h = 0.0f64;
    for _ in 0..10 {
        let mut log = MatrixField::zero(2, 2);
        for (k, b) in alg.basis.iter().enumerate() {
            let lin: f64 = rng.gen_range(-0.5..0.5);
            let quad: f64 = rng.gen_range(-0.5..0.5);
            log.push(b.clone(), Expr::coord(k % 2) * Expr::constant(lin));
            log.push(
                b.clone(),
                Expr::coord((k + 1) % 2) * Expr::coord(k % 2) * Expr::constant(quad),
            );
        }
        let transformed = conn.clone().gauge_transform(GaugeMap::new(log)).unwrap();
        let f = taylor_functional(&transformed, &d, 3).unwrap();
        worst_f = worst_f.max(f.canonical_distance(&reference));
        let h = holonomy_with_steps(&transformed, &loop_, 1200).unwrap().element;
        worst_h = worst_h.max(op_norm(&(h - &hol_ref)));
    }
    verdict(
        "gauge independence",
        worst_f <= 1e-10 && worst_h <= 1e-10,
        &format!("10 basepoint-fixing transforms: max F³ deviation {worst_f:.3e}, max holonomy deviation {worst_h:.3e}"),
    );
}

#[test]
fn criterion_4_radial_gauge_order_doubling() {
    let cfg = SweepConfig {
        connection: "su2-poly-vanishing".into(),
        scales: vec![0.5, 0.37, 0.27, 0.2, 0.15, 0.11, 0.08, 0.06],
        expansion: Expansion::Fk(5),
        declared_m: 6.0,
        tolerance: 0.4,
        ..base_cfg()
    };
    let report = run_sweep(&cfg).unwrap();
    let fitted = report.fitted_order.unwrap();
    verdict(
        "radial-gauge order doubling",
        fitted >= 5.6,
        &format!("Ω(0) = 0 connection, F⁵(taylor): fitted order {fitted:.3} (≥ 5.6)"),
    );
}

#[test]
fn criterion_5_heisenberg_order_six_and_coefficient_mutation() {
    let scales = vec![0.5, 0.37, 0.27, 0.2, 0.15, 0.11, 0.08, 0.06];
    let cfg = SweepConfig {
        model: "heisenberg".into(),
        scales: scales.clone(),
        expansion: Expansion::SelectorF5,
        declared_m: 6.0,
        tolerance: 0.5,
        ..base_cfg()
    };
    let with_f5 = run_sweep(&cfg).unwrap().fitted_order.unwrap();

    let f3_cfg = SweepConfig {
        expansion: Expansion::F3,
        ..cfg.clone()
    };
    let with_f3 = run_sweep(&f3_cfg).unwrap().fitted_order.unwrap();

    // deliberate mutation: corrupt one leading (weight-3) rational by 3/2
    // and refit — a wrong leading coefficient must destroy the order gain
    let model = model_by_name("heisenberg").unwrap();
    let conn = build_connection(&cfg, &model).unwrap();
    let mut f5 = model_f5(&conn, &model).unwrap();
    let idx = f5
        .terms
        .iter()
        .position(|t| t.weight(&model.dilation) == 3)
        .expect("an order-5 functional has weight-3 content");
    f5.terms[idx].coef *= Complex64::new(1.5, 0.0);
    let mut pts = Vec::new();
    for &s in &scales[1..] {
        let path = loop_at_scale(&cfg, &model, s).unwrap();
        let log = holonomy(&conn, &path).unwrap().log.unwrap();
        let err = op_norm(&(log + f5.evaluate(&path).unwrap()));
        pts.push((horizontal_length(&model, &path).unwrap(), err));
    }
    let (mutated, _) = fit_order(&pts).unwrap();

    verdict(
        "Heisenberg order 6",
        with_f5 >= 5.5 && with_f3 <= 4.3 && mutated < 4.5,
        &format!("selector-F⁵ fitted {with_f5:.3} (≥ 5.5); Euclidean-style F³ {with_f3:.3} (≤ 4.3); mutated leading rational {mutated:.3} (< 4.5)"),
    );
}

#[test]
fn criterion_6_hopf_order_six() {
    let cfg = SweepConfig {
        model: "hopf".into(),
        loop_a: 0.25,
        loop_b: 0.15,
        scales: vec![0.5, 0.37, 0.27, 0.2, 0.15, 0.11, 0.08, 0.06],
        expansion: Expansion::SelectorF5,
        declared_m: 6.0,
        tolerance: 0.6,
        ..base_cfg()
    };
    let model = model_by_name("hopf").unwrap();
    // the sweep stays well inside |z| ≤ 0.5
    let mut worst = 0.0f64;
    for &s in &cfg.scales {
        let path = loop_at_scale(&cfg, &model, s).unwrap();
        for k in 0..=64 {
            let (z, _) = path.eval(k as f64 / 64.0);
            worst = worst.max(z.iter().map(|x| x * x).sum::<f64>().sqrt());
        }
    }
    let report = run_sweep(&cfg).unwrap();
    let fitted = report.fitted_order.unwrap();
    verdict(
        "Hopf order 6",
        fitted >= 5.4 && worst <= 0.5,
        &format!("selector-F⁵ fitted order {fitted:.3} (≥ 5.4), chart excursion {worst:.3} (≤ 0.5)"),
    );
}

#[test]
fn criterion_7_selector_identities() {
    let mut worst_pairing = 0.0f64;
    let mut worst_hol = 0.0f64;
    for name in ["heisenberg", "hopf"] {
        let model = model_by_name(name).unwrap();
        let cfg = SweepConfig {
            model: name.into(),
            loop_a: 0.25,
            loop_b: 0.15,
            ..base_cfg()
        };
        let conn = build_connection(&cfg, &model).unwrap();
        let (tilde, _) = selector_modify(&conn, &model).unwrap();

        // ι_χΩ̃ = 0 at 100 seeded chart points
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let p: Vec<f64> = (0..3).map(|_| rng.gen_range(-0.35..0.35)).collect();
            let curv = tilde.curvature_at(&p).unwrap();
            let fr = model.frame_at(&p).unwrap();
            for sel in model.selector.iter().flatten() {
                let (a, b) = *sel;
                let mut pairing = holonomy_lab::algebra::zero(conn.q);
                for i in 0..3 {
                    for j in 0..3 {
                        let wedge = 0.5 * (fr[a][i] * fr[b][j] - fr[a][j] * fr[b][i]);
                        pairing += &curv[i][j] * Complex64::new(wedge, 0.0);
                    }
                }
                worst_pairing = worst_pairing.max(op_norm(&pairing));
            }
        }

        // D-equivalence: horizontal loops cannot tell ω from ω̃
        let path = loop_at_scale(&cfg, &model, 0.4).unwrap();
        let h0 = holonomy_with_steps(&conn, &path, 1500).unwrap().element;
        let h1 = holonomy_with_steps(&tilde, &path, 1500).unwrap().element;
        worst_hol = worst_hol.max(op_norm(&(h0 - h1)));
    }
    verdict(
        "selector identities",
        worst_pairing <= 1e-9 && worst_hol <= 1e-9,
        &format!("max ‖ι_χΩ̃‖ = {worst_pairing:.3e} over 100 points; max horizontal holonomy shift {worst_hol:.3e}"),
    );
}

#[test]
fn criterion_8_picard_bound() {
    let su2 = MatrixAlgebra::su2();
    let consts = PicardConstants::for_algebra(&su2);
    let mut rng = ChaCha8Rng::seed_from_u64(2026);
    let mut worst_ratio = 0.0f64;
    let mut ok = true;
    for _ in 0..100 {
        let c1 = su2.random_element(&mut rng, 1.0);
        let c2 = su2.random_element(&mut rng, 1.0);
        let f1 = rng.gen_range(0.5..3.0);
        let f2 = rng.gen_range(0.5..3.0);
        let raw = AlgebraPath::new(move |t: f64| {
            &c1 * Complex64::new((f1 * t).cos(), 0.0) + &c2 * Complex64::new((f2 * t).sin(), 0.0)
        });
        let scale = Complex64::new((consts.eps / 2.0) / raw.sup_norm, 0.0);
        let scaled = AlgebraPath::new(move |t: f64| raw.at(t) * scale);
        let bound = consts.picard_bound(&scaled, 1.0).unwrap();
        let q = mat_log(&solve_transport(&scaled, 400).unwrap()).unwrap();
        let defect = op_norm(&(q - scaled.integral(1.0, 16)));
        ok &= defect <= bound;
        worst_ratio = worst_ratio.max(defect / bound);
    }
    verdict(
        "Picard bound",
        ok,
        &format!("100 seeded trials at t‖A‖ = ε/2: worst defect/bound = {worst_ratio:.3}"),
    );
}

#[test]
fn criterion_9_kernel_properties() {
    // group-manifold drift of a transported su(2) holonomy
    let cfg = base_cfg();
    let model = model_by_name("euclidean:2").unwrap();
    let conn = build_connection(&cfg, &model).unwrap();
    let path = loop_at_scale(&cfg, &model, 0.4).unwrap();
    let hol = holonomy_with_steps(&conn, &path, 2000).unwrap();
    let drift = GroupElement::new(hol.element.clone(), GroupTag::Unitary).manifold_defect();

    // integrator self-convergence: a fourth-order method contracts the
    // defect by ~16 per step doubling
    let a = pullback_path(&conn, &path).unwrap();
    let (h1, h2, h4) = (
        solve_transport(&a, 100).unwrap(),
        solve_transport(&a, 200).unwrap(),
        solve_transport(&a, 400).unwrap(),
    );
    let ratio = op_norm(&(h1 - &h2)) / op_norm(&(h2 - h4));

    // moment integrals against the shoelace oracle on 50 seeded polygons
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst_area = 0.0f64;
    for _ in 0..50 {
        let k = rng.gen_range(3..9);
        let verts: Vec<Vec<f64>> = (0..k)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
                let r: f64 = rng.gen_range(0.2..1.0);
                vec![r * t.cos(), r * t.sin()]
            })
            .collect();
        let poly = polygon(&verts).unwrap();
        let shoelace: f64 = 0.5
            * (0..k)
                .map(|i| {
                    let (p, q) = (&verts[i], &verts[(i + 1) % k]);
                    p[0] * q[1] - q[0] * p[1]
                })
                .sum::<f64>();
        // area = ∫ z₁ dz₂ with the orientation of the parametrization
        let area = poly.moment_integral(&[0.0, 0.0], &[1, 0], 1).unwrap();
        worst_area = worst_area.max((area - shoelace).abs());
    }

    // the two independent reductions of the Euclidean third-order functional
    let d = DilationStructure::isotropic(vec![0.0, 0.0]);
    let dual = euclidean_f3(&conn, &[0.0, 0.0])
        .unwrap()
        .canonical_distance(&taylor_functional(&conn, &d, 3).unwrap());

    // free-nilpotent rank ν[2;3] against a Hall-basis enumeration:
    // layer 1 {x, y}, layer 2 {[x,y]}, layer 3 {[x,[x,y]], [y,[x,y]]}
    let hall = 2 + 1 + 2;
    let nu = free_nilpotent_rank(2, 3);

    let ok = drift <= 1e-10
        && (12.0..=20.0).contains(&ratio)
        && worst_area <= 1e-12
        && dual <= 1e-12
        && nu == hall;
    verdict(
        "kernel properties",
        ok,
        &format!("manifold drift {drift:.3e}; self-convergence ratio {ratio:.1}; shoelace defect {worst_area:.3e}; dual-path F³ gap {dual:.3e}; ν[2;3] = {nu}"),
    );
}
