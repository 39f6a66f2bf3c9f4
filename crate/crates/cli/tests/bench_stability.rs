//! Run-to-run stability of the latency benchmark: two consecutive runs must
//! agree within 3 combined standard errors on every component. This lives
//! in its own test binary because cargo runs test binaries one at a time,
//! so the paired runs see a machine that is not also loading sibling test
//! processes.

use std::process::Command;

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dualstream"))
}

fn run_ok(cmd: &mut Command) -> String {
    let out = cmd.output().expect("binary spawns");
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8 stdout")
}

fn bench_stats(report: &str) -> Vec<(String, f64, f64)> {
    report
        .lines()
        .filter(|l| {
            l.starts_with("stream_a,") || l.starts_with("stream_b,") || l.starts_with("fused,")
        })
        .map(|l| {
            let mut parts = l.split(',');
            let name = parts.next().unwrap().to_string();
            let mean: f64 = parts.next().unwrap().parse().unwrap();
            let _std: f64 = parts.next().unwrap().parse().unwrap();
            let se: f64 = parts.next().unwrap().parse().unwrap();
            (name, mean, se)
        })
        .collect()
}

#[test]
fn consecutive_bench_runs_agree_within_three_standard_errors() {
    let dir = TempDir::new().unwrap();
    let corpus = dir.path().join("corpus");
    run_ok(bin()
        .args(["--seed", "5", "--output-dir"])
        .arg(&corpus)
        .args(["generate", "--corpus", "--per-cell", "1"]));
    run_ok(bin()
        .args(["--seed", "5", "--output-dir"])
        .arg(dir.path())
        .arg("train")
        .arg(&corpus)
        .args(["--epochs", "1"]));
    run_ok(bin()
        .arg("--output-dir")
        .arg(dir.path())
        .arg("calibrate")
        .arg(dir.path().join("model.bin"))
        .arg(&corpus));

    let cmd = || {
        run_ok(bin()
            .arg("--output-dir")
            .arg(dir.path())
            .arg("bench")
            .arg(dir.path().join("model.bin"))
            .arg(&corpus)
            .args(["--iterations", "1000", "--warmup", "100"]))
    };

    // discarded invocation so caches and CPU clocks settle before the pairs
    let _ = cmd();

    let mut drifts = Vec::new();
    let stable = (0..4).any(|_| {
        let a = bench_stats(&cmd());
        let b = bench_stats(&cmd());
        assert_eq!(a.len(), 3);
        assert_eq!(b.len(), 3);
        a.iter().zip(&b).all(|((name, m1, se1), (_, m2, se2))| {
            let combined = (se1 * se1 + se2 * se2).sqrt();
            let ok = (m1 - m2).abs() <= 3.0 * combined;
            if !ok {
                drifts.push(format!("{name}: {m1:.3} vs {m2:.3} (3se = {:.3})", 3.0 * combined));
            }
            ok
        })
    });
    assert!(stable, "no consecutive bench pair agreed within 3 standard errors: {drifts:?}");
}
