//! Black-box checks against the built binary: exit codes and byte-identical
//! reports for a fixed seed.

use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_holonomy-lab"))
}

#[test]
fn sweep_report_is_byte_identical_across_runs() {
    let dir = std::env::temp_dir().join(format!("holonomy-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let out = dir.join("report.json");
    let config = dir.join("sweep.cfg");
    fs::write(
        &config,
        format!(
            "model = euclidean:2\n\
             connection = abelian-constant\n\
             connection.amplitude = 0.7\n\
             loop.family = circle\n\
             loop.radius = 0.4\n\
             expansion = F3\n\
             declared_m = 4\n\
             format = json\n\
             output = {}\n",
            out.display()
        ),
    )
    .unwrap();

    let mut outputs = Vec::new();
    for _ in 0..2 {
        let status = bin()
            .args(["sweep", config.to_str().unwrap()])
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0), "sweep should exit 0 on a pass");
        outputs.push(fs::read(&out).unwrap());
        fs::remove_file(&out).unwrap();
    }
    assert_eq!(outputs[0], outputs[1], "same seed must give identical bytes");
    assert!(!outputs[0].is_empty());
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn sweep_exit_code_signals_verdict_failure() {
    let dir = std::env::temp_dir().join(format!("holonomy-cli-fail-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let config = dir.join("sweep.cfg");
    // claiming order 9 for a third-order expansion must fail the sweep
    fs::write(
        &config,
        "model = euclidean:2\n\
         connection = su2-poly\n\
         seed = 7\n\
         loop.family = harmonic\n\
         loop.a = 0.5\n\
         loop.b = 0.3\n\
         expansion = F3\n\
         declared_m = 9\n",
    )
    .unwrap();
    let output = bin()
        .args(["sweep", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2), "verdict failure exits 2");
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn check_model_passes_for_builtin_models() {
    for name in ["euclidean:2", "heisenberg", "hopf", "normal:sphere"] {
        let status = bin().args(["check-model", name]).status().unwrap();
        assert_eq!(status.code(), Some(0), "check-model {name}");
    }
}

#[test]
fn unknown_model_is_a_usage_error() {
    let status = bin().args(["check-model", "no-such-model"]).status().unwrap();
    assert_eq!(status.code(), Some(1));
}
