use std::f64::consts::FRAC_PI_2;
use std::process::Command;

fn gaqb(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_gaqb")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let idx = lines.next().unwrap().split(',').position(|c| c == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn params_has_the_documented_columns() {
    let (code, out, _) = gaqb(&["params", "--topology", "braided"]);
    assert_eq!(code, 0);
    assert_eq!(
        out.lines().next().unwrap(),
        "theta,g_ab,Gamma_a,Gamma_b,Gamma_coll,delta_a,delta_b"
    );
    assert_eq!(out.lines().count(), 202);
    let row = out.lines().nth(51).unwrap();
    let v: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
    assert!((v[0] - FRAC_PI_2).abs() < 1e-15);
    assert!((v[1] - 0.1).abs() < 1e-15);
    assert!(v[2..].iter().all(|x| x.abs() < 1e-15), "{row}");
}

#[test]
fn separated_pi_row_is_zero() {
    let (_, out, _) = gaqb(&[
        "params",
        "--topology",
        "separated",
        "--theta-min",
        "0",
        "--theta-max",
        "3.141592653589793",
        "--theta-steps",
        "3",
    ]);
    let last = out.lines().last().unwrap();
    assert!(
        last.split(',').skip(1).all(|x| x.parse::<f64>().unwrap() == 0.0),
        "{last}"
    );
}

#[test]
fn charge_peaks_at_full_transfer() {
    let (code, out, _) = gaqb(&[
        "charge",
        "--topology",
        "braided",
        "--theta",
        "1.5707963267948966",
        "--sample-stride",
        "10",
    ]);
    assert_eq!(code, 0);
    let t = column(&out, "t");
    let w = column(&out, "ergotropy");
    let (k, wmax) = w
        .iter()
        .enumerate()
        .fold((0, 0.0), |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc });
    assert!((wmax - 1.0).abs() < 1e-5);
    assert!((t[k] - 15.707963).abs() < 0.05, "{}", t[k]);
}

#[test]
fn separated_pi_charging_is_all_zero() {
    let (_, out, _) = gaqb(&["charge", "--topology", "separated", "--theta", "3.141592653589793"]);
    for name in ["E", "ergotropy", "sigma", "power", "energy_power"] {
        assert!(column(&out, name).iter().all(|&x| x == 0.0), "{name}");
    }
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    let out = dir.path().join("out.json");
    std::fs::write(
        &cfg,
        "# braided run\ntopology = braided\ntheta = 1.5707963\ngamma = 0.1\ntmax = 10\nformat = json\n",
    )
    .unwrap();
    let (code, _, err) = gaqb(&[
        "charge",
        "--config",
        cfg.to_str().unwrap(),
        "--gamma=0.05",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let records = json["records"].as_array().unwrap();
    let last = records.last().unwrap();
    assert_eq!(last["t"].as_f64().unwrap(), 10.0);
    // γ = 0.05 wins over the file's 0.1: p_b = sin²(0.05·10).
    assert!((last["p_b"].as_f64().unwrap() - 0.5f64.sin().powi(2)).abs() < 1e-6);
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    std::fs::write(&cfg, "topology = braided\nthета = 1.0\n").unwrap();
    let (code, _, err) = gaqb(&["charge", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("thета") && err.contains("line 2"), "{err}");
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(gaqb(&["charge"]).0, 1);
    assert_eq!(gaqb(&["charge", "--topology", "twisted"]).0, 1);
    assert_eq!(gaqb(&["charge", "--topology", "braided", "--format", "xml"]).0, 1);
    assert_eq!(gaqb(&["sweep", "--topology", "braided", "--theta-steps", "1"]).0, 1);
    assert_eq!(gaqb(&["frobnicate"]).0, 1);
    assert_eq!(gaqb(&["--help"]).0, 0);
    let (code, _, err) = gaqb(&["params", "--config", "/nonexistent/run.conf"]);
    assert_eq!(code, 1);
    assert!(err.contains("/nonexistent/run.conf"));
}

#[test]
fn numerical_failure_exits_with_two_and_names_the_time() {
    // A step far beyond the RK4 stability limit of the dissipative dynamics.
    let (code, _, err) = gaqb(&[
        "charge",
        "--topology",
        "braided",
        "--theta",
        "0",
        "--gamma",
        "1",
        "--dt",
        "5",
        "--tmax",
        "200",
    ]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("t = "), "{err}");
}

#[test]
fn sweep_csv_has_summary_block() {
    let (code, out, _) = gaqb(&[
        "sweep",
        "--topology",
        "nested",
        "--theta-steps",
        "5",
        "--tmax",
        "10",
        "--dt",
        "0.01",
        "--sample-stride",
        "100",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next().unwrap(), "theta,t,E,ergotropy,sigma,power");
    assert_eq!(out.lines().filter(|l| !l.starts_with('#')).count(), 1 + 5 * 11);
    assert!(out.contains("# summary\n# max_E = "));
    assert!(out.contains("# max_power_theta = "));
}

#[test]
fn chiral_summary_and_mirror() {
    let (code, right, _) = gaqb(&[
        "chiral",
        "--gamma-max",
        "1",
        "--tau-scaled",
        "10",
        "--sample-stride",
        "100",
    ]);
    assert_eq!(code, 0);
    let (_, left, _) = gaqb(&[
        "chiral",
        "--gamma-max",
        "1",
        "--tau-scaled",
        "10",
        "--sample-stride",
        "100",
        "--direction",
        "left",
    ]);
    let get = |s: &str, key: &str| -> f64 {
        let prefix = format!("# {key} = ");
        s.lines()
            .find_map(|l| l.strip_prefix(&prefix))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!(get(&right, "efficiency") >= 0.99);
    assert!(get(&right, "total_leakage") <= 0.01);
    assert!((get(&right, "final_battery_energy") - get(&left, "final_charger_energy")).abs() < 1e-9);
    assert!((get(&right, "efficiency") - get(&left, "efficiency")).abs() < 1e-9);
    assert!(right.lines().next().unwrap().ends_with(",leakage"));
}

#[test]
fn fast_chiral_protocol_leaks() {
    let (_, out, _) = gaqb(&[
        "chiral",
        "--gamma-max",
        "1",
        "--tau-scaled",
        "0.1",
        "--tmax",
        "30",
        "--sample-stride",
        "1000",
    ]);
    let eff: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("# efficiency = "))
        .unwrap()
        .parse()
        .unwrap();
    let leak: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("# total_leakage = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(eff < 0.6 && leak > 0.4, "{eff} {leak}");
}

#[test]
fn in_process_runner_matches_binary() {
    let args = ["gaqb", "params", "--topology", "nested", "--theta-steps", "7"];
    let mut out = Vec::new();
    let mut err = Vec::new();
    assert_eq!(gaqb_cli::run(args, &mut out, &mut err), 0);
    assert_eq!(String::from_utf8(out).unwrap(), gaqb(&args[1..]).1);
}
