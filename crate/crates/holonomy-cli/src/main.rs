//! Command-line driver for the holonomy laboratory.
//!
//! Exit codes: 0 when every verdict passes, 2 when a verdict fails, 1 on
//! configuration or runtime errors. Thread count is controlled only through
//! the RAYON_NUM_THREADS environment variable.

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use holonomy_lab::algebra::{op_norm, MatrixAlgebra};
use holonomy_lab::expansion::selector_modify;
use holonomy_lab::experiment::{
    build_connection, build_functional, emit_report, report_csv, report_json, run_sweep,
    ReportFormat, SweepConfig,
};
use holonomy_lab::holonomy::holonomy;
use holonomy_lab::liegroup::{mat_log, solve_transport, AlgebraPath, PicardConstants};
use holonomy_lab::models::model_by_name;

#[derive(Parser)]
#[command(name = "holonomy-lab", about = "dilation sweeps and holonomy expansions", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the dilation sweep described by a configuration file.
    Sweep { config: String },
    /// Compute the holonomy and expansion defect at a single scale.
    Holonomy {
        config: String,
        #[arg(long)]
        scale: f64,
    },
    /// Verify the structural identities of a built-in model space.
    CheckModel { name: String },
    /// Fuzz the Picard remainder bound with seeded su(2) paths.
    BoundFuzz {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 2026)]
        seed: u64,
    },
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Sweep { config } => cmd_sweep(&config),
        Command::Holonomy { config, scale } => cmd_holonomy(&config, scale),
        Command::CheckModel { name } => cmd_check_model(&name),
        Command::BoundFuzz { trials, seed } => cmd_bound_fuzz(trials, seed),
    };
    match outcome {
        Ok(true) => std::process::exit(0),
        Ok(false) => std::process::exit(2),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}

fn load_config(path: &str) -> holonomy_lab::Result<SweepConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| holonomy_lab::Error::Io {
        path: path.into(),
        source,
    })?;
    SweepConfig::parse(&text)
}

fn cmd_sweep(path: &str) -> holonomy_lab::Result<bool> {
    let cfg = load_config(path)?;
    let report = run_sweep(&cfg)?;
    match &cfg.output {
        Some(out) => {
            emit_report(&report, cfg.format, out)?;
            eprintln!("report written to {out}");
        }
        None => {
            let body = match cfg.format {
                ReportFormat::Csv => report_csv(&report),
                ReportFormat::Json => report_json(&report),
            };
            print!("{body}");
        }
    }
    match report.fitted_order {
        Some(m) => eprintln!(
            "verdict: {} (fitted order {m:.3} ± {:.3})",
            report.verdict,
            report.interval.unwrap_or(0.0)
        ),
        None => eprintln!("verdict: {}", report.verdict),
    }
    Ok(report.verdict != "fail")
}

fn cmd_holonomy(path: &str, scale: f64) -> holonomy_lab::Result<bool> {
    let cfg = load_config(path)?;
    let model = model_by_name(&cfg.model)?;
    let conn = build_connection(&cfg, &model)?;
    let f = build_functional(&cfg, &model, &conn)?;
    let loop_s = holonomy_lab::experiment::loop_at_scale(&cfg, &model, scale)?;
    let hol = holonomy(&conn, &loop_s)?;
    let f_val = f.evaluate(&loop_s)?;
    let fmt = |x: f64| format!("{x:.16e}");
    let v = serde_json::json!({
        "scale": fmt(scale),
        "length": fmt(holonomy_lab::experiment::horizontal_length(&model, &loop_s)?),
        "steps": hol.steps,
        "integrator_residual": fmt(hol.residual),
        "hol_log_norm": fmt(hol.log.as_ref().map(op_norm).unwrap_or(f64::NAN)),
        "residual_norm": fmt(hol.log.as_ref().map(|l| op_norm(&(l + &f_val))).unwrap_or(f64::NAN)),
        "expansion_norm": fmt(op_norm(&f_val)),
    });
    println!("{}", serde_json::to_string_pretty(&v).expect("serialization cannot fail"));
    Ok(true)
}

fn cmd_check_model(name: &str) -> holonomy_lab::Result<bool> {
    let model = model_by_name(name)?;
    let mut all_ok = true;
    let mut check = |label: &str, ok: bool, detail: String| {
        println!("{}  {label}{detail}", if ok { "ok  " } else { "FAIL" });
        all_ok &= ok;
    };

    // sample points comfortably inside the chart
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let radius = if model.chart_radius.is_finite() {
        0.5 * model.chart_radius
    } else {
        0.7
    };
    let points: Vec<Vec<f64>> = (0..40)
        .map(|_| {
            (0..model.dim)
                .map(|i| model.dilation.center[i] + rng.gen_range(-radius..radius) / (model.dim as f64).sqrt())
                .collect()
        })
        .collect();

    // frame/coframe duality α_b(X_a) = δ_ab
    let mut worst = 0.0f64;
    for p in &points {
        let fr = model.frame_at(p)?;
        let co = model.coframe_at(p)?;
        for a in 0..model.dim {
            for b in 0..model.dim {
                let pair: f64 = co[b].iter().zip(&fr[a]).map(|(c, x)| c * x).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((pair - want).abs());
            }
        }
    }
    check("frame/coframe duality", worst < 1e-10, format!(" (worst {worst:.2e})"));

    // dilation structure: weights start at 1 and never decrease
    let w = &model.dilation.weights;
    check(
        "dilation weights graded",
        w[0] == 1 && w.windows(2).all(|p| p[0] <= p[1]) && w.len() == model.dim,
        format!(" ({w:?})"),
    );

    // horizontal/selector bookkeeping
    let selector_ok = model.selector.len() == model.dim
        && model.selector[..model.horizontal].iter().all(|s| s.is_none())
        && model.selector[model.horizontal..].iter().all(|s| {
            matches!(s, Some((a, b)) if *a < model.horizontal && *b < model.horizontal && a != b)
        });
    check("selector indexes horizontal planes", selector_ok, String::new());

    // metric symmetry, when the model carries one
    if model.metric.is_some() {
        let mut worst = 0.0f64;
        for p in &points {
            let g = model
                .metric
                .as_ref()
                .unwrap()
                .iter()
                .map(|row| row.iter().map(|e| e.eval(p)).collect::<holonomy_lab::Result<Vec<_>>>())
                .collect::<holonomy_lab::Result<Vec<_>>>()?;
            for i in 0..model.dim {
                for j in 0..model.dim {
                    worst = worst.max((g[i][j] - g[j][i]).abs());
                }
            }
        }
        check("metric symmetry", worst < 1e-12, format!(" (worst {worst:.2e})"));
    }

    // selector surgery: ι_χΩ̃ = 0 for a seeded connection on the model
    if model.horizontal < model.dim {
        let cfg = SweepConfig {
            model: name.into(),
            connection: "su2-poly".into(),
            seed: 5,
            ..SweepConfig::default()
        };
        let conn = build_connection(&cfg, &model)?;
        let (modified, _) = selector_modify(&conn, &model)?;
        let mut worst = 0.0f64;
        for p in &points {
            let curv = modified.curvature_at(p)?;
            let fr = model.frame_at(p)?;
            for sel in model.selector.iter().flatten() {
                let (a, b) = *sel;
                let mut pairing = holonomy_lab::algebra::zero(conn.q);
                for i in 0..model.dim {
                    for j in 0..model.dim {
                        pairing += &curv[i][j] * Complex64::new(0.5 * (fr[a][i] * fr[b][j] - fr[a][j] * fr[b][i]), 0.0);
                    }
                }
                worst = worst.max(op_norm(&pairing));
            }
        }
        check("modified curvature annihilates the selector", worst < 1e-9, format!(" (worst {worst:.2e})"));
    }

    Ok(all_ok)
}

fn cmd_bound_fuzz(trials: usize, seed: u64) -> holonomy_lab::Result<bool> {
    let su2 = MatrixAlgebra::su2();
    let consts = PicardConstants::for_algebra(&su2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_ratio = 0.0f64;
    let mut violations = 0usize;
    for trial in 0..trials {
        let c1 = su2.random_element(&mut rng, 1.0);
        let c2 = su2.random_element(&mut rng, 1.0);
        let f1 = rng.gen_range(0.5..3.0);
        let f2 = rng.gen_range(0.5..3.0);
        let raw = AlgebraPath::new(move |t: f64| {
            &c1 * Complex64::new((f1 * t).cos(), 0.0) + &c2 * Complex64::new((f2 * t).sin(), 0.0)
        });
        // renormalize so the lemma's precondition holds with slack: t‖A‖ = ε/2
        let scale = Complex64::new((consts.eps / 2.0) / raw.sup_norm, 0.0);
        let scaled = AlgebraPath::new(move |t: f64| raw.at(t) * scale);
        let bound = consts.picard_bound(&scaled, 1.0)?;
        let q = mat_log(&solve_transport(&scaled, 400)?)?;
        let defect = op_norm(&(q - scaled.integral(1.0, 16)));
        if defect > bound {
            violations += 1;
            println!("FAIL trial {trial}: defect {defect:.3e} > bound {bound:.3e}");
        }
        worst_ratio = worst_ratio.max(defect / bound);
    }
    println!(
        "{} / {trials} trials within the Picard bound (worst defect/bound = {worst_ratio:.3})",
        trials - violations
    );
    Ok(violations == 0)
}
