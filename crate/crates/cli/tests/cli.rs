use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_aiot-rx"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn summary_field<'a>(line: &'a str, key: &str) -> &'a str {
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .expect("field present")
}

#[test]
fn plan_if_table() {
    let o = run(&["plan-if", "--cbw", "180e3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n,f_if_hz,image_offset_hz");
    let f: Vec<&str> = lines
        .take(6)
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(f, ["585000", "675000", "765000", "855000", "945000", "1035000"]);

    let o = run(&["plan-if", "--cbw", "4"]);
    let rows: Vec<String> = stdout(&o).lines().skip(1).take(2).map(String::from).collect();
    assert_eq!(rows, ["6,13,26", "7,15,30"]);

    let o = run(&["plan-if", "--cbw", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["plan-if", "--cbw", "abc"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sensitivity_values() {
    assert_eq!(stdout(&run(&["sensitivity"])).trim(), "-88.45 dBm");
    let o = run(&["sensitivity", "--bw", "1", "--snr", "0", "--nf", "0", "--margin", "0"]);
    assert_eq!(stdout(&o).trim(), "-174.00 dBm");
    assert_eq!(stdout(&run(&["sensitivity", "--snr", "10"])).trim(), "-93.45 dBm");
    assert_eq!(run(&["sensitivity", "--bw", "-1"]).status.code(), Some(2));
}

#[test]
fn sim_loop_lock_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |p: &Path| {
        run(&[
            "sim-loop",
            "--offset-ppm",
            "500",
            "--seed",
            "3",
            "--out",
            p.to_str().unwrap(),
        ])
    };
    let o = args(&a);
    assert!(o.status.success());
    let line = stdout(&o);
    assert_eq!(summary_field(&line, "locked"), "true");
    let cycles: usize = summary_field(&line, "cycles").parse().unwrap();
    assert!((6..=30).contains(&cycles), "{cycles}");
    args(&b);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let csv = std::fs::read_to_string(&a).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t_s,v_ctrl_v,f_lo_hz,f_if_hz,event");

    let o = run(&["sim-loop", "--offset-ppm", "0", "--out", a.to_str().unwrap()]);
    assert_eq!(summary_field(&stdout(&o), "cycles"), "2");
}

#[test]
fn sim_loop_no_lock_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.toml");
    std::fs::write(&cfg, "[loop]\nk_vco = 1e3\n[run]\noffset_ppm = 500\n").unwrap();
    let out = dir.path().join("t.jsonl");
    let o = run(&[
        "sim-loop",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "jsonl",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let line = stdout(&o);
    assert_eq!(summary_field(&line, "locked"), "false");
    assert_eq!(summary_field(&line, "cycles"), "NA");
    let first = std::fs::read_to_string(&out).unwrap();
    let row: serde_json::Value = serde_json::from_str(first.lines().next().unwrap()).unwrap();
    assert!(row.get("f_if").is_some());
}

#[test]
fn bad_config_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    let out = dir.path().join("never.csv");
    std::fs::write(&cfg, "[loop]\nicp = 1\n").unwrap();
    let o = run(&[
        "sim-loop",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    std::fs::write(&cfg, "[loop]\nf_ref = 2e6\n").unwrap();
    assert_eq!(
        run(&["sim-loop", "--config", cfg.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

/// FM0 by the transition rule: invert at every bit boundary, and mid-bit
/// for a 0.
fn fm0_oracle(bits: &str, start: u8) -> String {
    let mut level = start;
    let mut out = String::new();
    for (i, b) in bits.chars().enumerate() {
        if i > 0 {
            level ^= 1;
        }
        out.push(if level == 1 { '1' } else { '0' });
        if b == '0' {
            level ^= 1;
        }
        out.push(if level == 1 { '1' } else { '0' });
    }
    out
}

#[test]
fn codec_round_trips_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bits = "1101001110001011\n0110\n";
    let input = dir.path().join("bits.txt");
    std::fs::write(&input, bits).unwrap();
    let flat: String = bits.chars().filter(|c| !c.is_whitespace()).collect();
    for scheme in ["manchester", "pie", "fm0", "miller"] {
        let enc = dir.path().join(format!("{scheme}.chips"));
        let dec = dir.path().join(format!("{scheme}.bits"));
        let o = run(&[
            "codec", "--scheme", scheme, "--encode",
            "--in", input.to_str().unwrap(), "--out", enc.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{scheme}");
        let o = run(&[
            "codec", "--scheme", scheme, "--decode",
            "--in", enc.to_str().unwrap(), "--out", dec.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{scheme}");
        assert_eq!(std::fs::read_to_string(&dec).unwrap().trim(), flat);
    }
    let fm0 = std::fs::read_to_string(dir.path().join("fm0.chips")).unwrap();
    assert_eq!(fm0.trim(), fm0_oracle(&flat, 1));

    let bad = dir.path().join("bad.chips");
    std::fs::write(&bad, "10011100").unwrap();
    let o = run(&["codec", "--scheme", "manchester", "--decode", "--in", bad.to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("chip 4"));

    let o = run(&["codec", "--scheme", "fm0", "--in", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_and_receive_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = run(&[
            "sweep-ber", "--pmin", "-60", "--pmax", "-56", "--step", "4",
            "--trials", "1", "--bits", "60", "--seed", "5", "--out", p.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let csv = std::fs::read_to_string(&a).unwrap();
    assert_eq!(csv, std::fs::read_to_string(&b).unwrap());
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("power_dbm,ber,ci_low,ci_high,n_bits"));
    assert_eq!(lines.len(), 3);
    let ber: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(ber, 0.0);

    let o = run(&[
        "receive", "--power", "-60", "--offset-ppm", "-300", "--bits", "100",
        "--format", "jsonl",
    ]);
    assert!(o.status.success());
    let rec: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(rec["locked"], true);
    assert_eq!(rec["n_errors"], 0);
    assert_eq!(rec["mode_history"], "ABC");
}

#[test]
fn response_grid() {
    let o = run(&["response", "--fmin", "-4e6", "--fmax", "4e6", "--points", "9"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 10);
    assert_eq!(text.lines().next().unwrap(), "offset_hz,gain_db");
}
