use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn unilrt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unilrt"))
        .args(args)
        .env_remove("UNILRT_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn formula_values() {
    let o = unilrt(&["formula", "p0star", "--alpha", "0.1", "--d", "1"]);
    assert!(o.status.success());
    let p: f64 = stdout(&o).trim().parse().unwrap();
    assert!((p - 0.703046).abs() < 1e-6);

    let o = unilrt(&["formula", "chi2-quantile", "--alpha", "0.1", "--d", "1"]);
    let c: f64 = stdout(&o).trim().parse().unwrap();
    assert!((c - 2.705543).abs() < 1e-6);

    let o = unilrt(&["formula", "classical-power", "--alpha", "0.1", "--d", "2", "--theta-sq-norm", "0"]);
    let p: f64 = stdout(&o).trim().parse().unwrap();
    assert!((p - 0.1).abs() < 1e-10);

    let o = unilrt(&["formula", "ratio-bounds", "--alpha", "0.5", "--d", "2"]);
    let text = stdout(&o);
    assert!(text.contains("domain_ok=false") && text.contains("upper=nan"), "{text}");

    let o = unilrt(&["formula", "ratio-bounds", "--alpha", "0.1", "--d", "2", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["values"]["domain_ok"], true);
}

#[test]
fn domain_errors_exit_2_and_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("regions");
    let o = unilrt(&["region", "--alpha", "1.5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha"));

    let o = unilrt(&["formula", "chi2-quantile", "--alpha", "0", "--d", "3"]);
    assert_eq!(o.status.code(), Some(2));

    let o = unilrt(&["formula", "no-such-thing"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("p0star"));

    let o = unilrt(&["figure", "9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn annulus_experiments_reject_odd_n() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(&spec, r#"{"experiment_id": "doughnut_fig7", "grid": {"n": [101], "reps": [2]}}"#).unwrap();
    let o = unilrt(&["run", "--spec-file", spec.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn region_writes_csvs_for_two_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let o = unilrt(&["region", "--n", "60", "--d", "2", "--B", "10", "--seed", "4", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let regions = fs::read_to_string(out.join("regions.csv")).unwrap();
    assert_eq!(regions.lines().next().unwrap(), "kind,center_1,center_2,sq_radius");
    assert_eq!(regions.lines().count(), 4);
    for f in ["crossfit_boundary.csv", "subsampling_boundary.csv"] {
        assert_eq!(fs::read_to_string(out.join(f)).unwrap().lines().count(), 181, "{f}");
    }
    assert!(stdout(&o).contains("classical sq_radius="));
}

#[test]
fn region_imports_a_sample() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    let mut text = String::from("y1,y2,y3\n");
    for i in 0..20 {
        let x = i as f64 / 10.0;
        text.push_str(&format!("{x},{},{}\n", -x, 0.5 * x));
    }
    fs::write(&data, text).unwrap();
    let out = dir.path().join("r");
    let o = unilrt(&["region", "--import", data.to_str().unwrap(), "--out", out.to_str().unwrap(), "--B", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("n=20 d=3"), "{text}");
    // mean of 0.0..1.9 is 0.95
    let regions = fs::read_to_string(out.join("regions.csv")).unwrap();
    let classical = regions.lines().nth(1).unwrap();
    let fields: Vec<&str> = classical.split(',').collect();
    assert_eq!(fields[0], "classical");
    let center: Vec<f64> = fields[1..4].iter().map(|f| f.parse().unwrap()).collect();
    for (got, want) in center.iter().zip([0.95, -0.95, 0.475]) {
        assert!((got - want).abs() < 1e-12, "{classical}");
    }
    assert!(!Path::new(&out.join("crossfit_boundary.csv")).exists());
}

#[test]
fn output_is_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(
        &spec,
        r#"{"experiment_id": "power_fig6",
            "grid": {"n": [200], "theta": [0.0, 0.02], "B": [10], "reps": [50]},
            "master_seed": 77}"#,
    )
    .unwrap();
    let mut outputs = Vec::new();
    for w in ["1", "8"] {
        let summary = dir.path().join(format!("summary_{w}.csv"));
        let raw = dir.path().join(format!("raw_{w}.csv"));
        let o = unilrt(&[
            "--workers",
            w,
            "run",
            "--spec-file",
            spec.to_str().unwrap(),
            "--out",
            summary.to_str().unwrap(),
            "--dump-raw",
            raw.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push((fs::read(summary).unwrap(), fs::read(raw).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert!(!outputs[0].1.is_empty());

    let a = unilrt(&["--workers", "1", "figure", "S3", "--d", "2", "--reps", "64"]);
    let b = unilrt(&["--workers", "8", "figure", "S3", "--d", "2", "--reps", "64"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn seed_override_changes_monte_carlo_output() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(&spec, r#"{"experiment_id": "split_p0_fig3", "grid": {"d": [2], "reps": [30]}, "master_seed": 1}"#)
        .unwrap();
    let run = |seed: &str| stdout(&unilrt(&["run", "--spec-file", spec.to_str().unwrap(), "--seed", seed]));
    assert_eq!(run("5"), run("5"));
    assert_ne!(run("5"), run("6"));
}

#[test]
fn figure_layouts() {
    let o = unilrt(&["figure", "4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "d,alpha,log_inv_alpha,expectation,lower,upper");

    let o = unilrt(&["figure", "6", "--reps", "20", "--B", "5", "--n", "100"]);
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "test,d,n,alpha,theta_sq_norm,power,stderr,method");
    assert!(text.contains("exact_noncentral") && text.contains("monte_carlo"));

    let o = unilrt(&["figure", "s4", "--d", "2", "--reps", "4", "--B", "10", "--n", "100"]);
    let text = stdout(&o);
    assert!(text.starts_with("method,d,n,alpha,theta_norm,B,reps,power,stderr,frac_split_case"));
}

#[test]
fn coverage_command_reports_every_method() {
    let o = unilrt(&["coverage", "--d", "1,2", "--n", "40", "--reps", "40", "--B", "5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for m in ["classical", "split", "crossfit", "subsampling", "limiting_subsampling"] {
        assert_eq!(text.lines().filter(|l| l.contains(&format!(",{m},"))).count(), 2, "{m}");
    }
}
