//! End-to-end acceptance run against the built binary.
//!
//! Prints one `PASS`/`FAIL` line per criterion and exits non-zero if any
//! criterion fails. Runs without the libtest harness so the timing
//! criterion never shares the machine with other tests in this target.

use std::path::Path;
use std::process::Command;

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_phasorconv");

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

/// Runs the binary, returning its exit code and stdout.
fn phasorconv(args: &[&str]) -> (i32, String) {
    let out = Command::new(BIN)
        .args(args)
        .env_remove("PHASORCONV_THREADS")
        .output()
        .expect("binary runs");
    let stderr = String::from_utf8_lossy(&out.stderr);
    if !stderr.is_empty() {
        eprint!("{stderr}");
    }
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
    )
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).expect("report written")).expect("report parses")
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["checks"]
        .as_array()
        .and_then(|cs| cs.iter().find(|c| c["name"] == name))
        .unwrap_or_else(|| panic!("verify report has no check {name}"))
}

/// Pass/fail of the named verify checks, with their measured values.
fn from_checks(report: &Value, names: &[&str]) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for name in names {
        let c = check(report, name);
        passed &= c["passed"] == true;
        parts.push(format!(
            "{name}={} ({})",
            c["measured"],
            c["detail"].as_str().unwrap_or("")
        ));
    }
    outcome(passed, parts.join("; "))
}

fn stage<'a>(row: &'a Value, name: &str) -> &'a Value {
    row["stages"]
        .as_array()
        .and_then(|s| s.iter().find(|s| s["stage"] == name))
        .unwrap_or_else(|| panic!("bench row has no stage {name}"))
}

fn row<'a>(report: &'a Value, backend: &str) -> &'a Value {
    report["rows"]
        .as_array()
        .and_then(|r| r.iter().find(|r| r["backend"] == backend))
        .unwrap_or_else(|| panic!("bench report has no {backend} row"))
}

fn ops(stage: &Value, field: &str) -> u64 {
    stage["ops"][field].as_u64().expect("integer op count")
}

/// Criterion 7 geometry: B=128, f1=f2=32, N=32, K=3, P=1 in f32.
fn large_bench(dir: &Path) -> Value {
    let json = dir.join("bench-large.json");
    let args = "bench --batch 128 --in-ch 32 --out-ch 32 --image 32 --kernel 3 --pad 1 \
                --backend rect,phasor --dtype f32 --warmup 4 --active 5 --json";
    let mut argv: Vec<&str> = args.split_whitespace().collect();
    argv.push(json.to_str().unwrap());
    let (code, table) = phasorconv(&argv);
    assert_eq!(code, 0, "bench exits cleanly");
    print!("{table}");
    read_json(&json)
}

fn product_speed(bench: &Value) -> Outcome {
    let rect = stage(row(bench, "rect"), "spectral_product")["median_ns"]
        .as_u64()
        .unwrap();
    let phasor = stage(row(bench, "phasor"), "spectral_product")["median_ns"]
        .as_u64()
        .unwrap();
    let no_plan = bench["rows"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|r| r["stages"].as_array().unwrap())
        .all(|s| !s["stage"].as_str().unwrap().contains("plan"));
    let total = |b: &str| row(bench, b)["total"]["median_ns"].as_u64().unwrap() as f64;
    outcome(
        phasor < rect && no_plan,
        format!(
            "spectral_product median phasor {:.1} ms vs rect {:.1} ms (ratio {:.3}); end-to-end rect/phasor {:.3} (reported only)",
            phasor as f64 / 1e6,
            rect as f64 / 1e6,
            phasor as f64 / rect as f64,
            total("rect") / total("phasor")
        ),
    )
}

fn exact_reduction(verify: &Value, bench: &Value) -> Outcome {
    let r = stage(row(bench, "rect"), "spectral_product");
    let p = stage(row(bench, "phasor"), "spectral_product");
    let (rm, pm) = (ops(r, "mul"), ops(p, "mul"));
    let (rma, pma) = (rm + ops(r, "add"), pm + ops(p, "add"));
    let bench_exact = rm == 4 * pm && rma == 3 * pma;
    let from_verify = from_checks(verify, &["product_reduction_exact"]);
    outcome(
        bench_exact && from_verify.passed,
        format!(
            "B=128 bench: mul {rm} = 4·{pm}, mul+add {rma} = 3·{pma}; {}",
            from_verify.detail
        ),
    )
}

/// Runs every reporting subcommand twice with timing omitted and compares bytes.
fn determinism(dir: &Path) -> Outcome {
    let runs = [
        ("verify.json", "verify --omit-timing --json"),
        (
            "bench.json",
            "bench --batch 1,2 --image 8 --warmup 0 --active 3 --omit-timing --json",
        ),
        (
            "train.json",
            "train --compare rect,phasor --steps 20 --omit-timing --out",
        ),
        ("flops.json", "flops --json"),
    ];
    let mut differing = Vec::new();
    for (file, args) in &runs {
        let mut bytes = Vec::new();
        for pass in ["a", "b"] {
            let path = dir.join(format!("{pass}-{file}"));
            let mut argv: Vec<&str> = args.split_whitespace().collect();
            argv.push(path.to_str().unwrap());
            let (code, _) = phasorconv(&argv);
            assert_eq!(code, 0, "{file} run exits cleanly");
            bytes.push(std::fs::read(&path).unwrap());
        }
        if bytes[0] != bytes[1] {
            differing.push(*file);
        }
    }
    outcome(
        differing.is_empty(),
        if differing.is_empty() {
            "verify, bench, train and flops reports byte-identical across two runs".to_string()
        } else {
            format!("reports differ between runs: {differing:?}")
        },
    )
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let verify_path = dir.path().join("verify-full.json");
    let (code, table) = phasorconv(&[
        "verify",
        "--scale",
        "full-desk",
        "--seed",
        "1",
        "--json",
        verify_path.to_str().unwrap(),
    ]);
    print!("{table}");
    assert!(code == 0 || code == 1, "verify ran to completion (exit {code})");
    let verify = read_json(&verify_path);
    let bench = large_bench(dir.path());

    let results = [
        ("backend equivalence", from_checks(&verify, &["forward_equivalence"])),
        (
            "gradient correctness",
            from_checks(
                &verify,
                &["gradient_input_finite_difference", "gradient_kernel_finite_difference"],
            ),
        ),
        (
            "FFT correctness",
            from_checks(&verify, &["fft_vs_naive_dft", "rfft2_round_trip", "parseval"]),
        ),
        ("exact FLOP reduction", exact_reduction(&verify, &bench)),
        (
            "cost-model reconciliation",
            from_checks(&verify, &["reconcile_exact", "worked_example_counts"]),
        ),
        (
            "training parity",
            from_checks(&verify, &["training_parity", "training_accuracy"]),
        ),
        ("phasor product stage faster at B=128", product_speed(&bench)),
        ("determinism", determinism(dir.path())),
    ];

    println!();
    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        println!(
            "{} criterion {} {name}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
        failed += usize::from(!o.passed);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
