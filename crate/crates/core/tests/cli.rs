use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fmm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fmm"))
        .args(args)
        .env_remove("FMM_SCHEME_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_builtins() {
    let o = fmm(&["validate", "--scheme", "acc-4x4x4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("256 elementary pairs checked, 0 failures"));
    let o = fmm(&["validate", "--scheme", "acc-4x4x4-alt"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("L = L_alt*L_cob: ok"));
}

#[test]
fn validate_explicit_files_and_failures() {
    let dir = tempfile::tempdir().unwrap();
    let [l, r, p] = ["L", "R", "P"].map(|x| data(&format!("strassen_{x}.sms")));
    let o = fmm(&["validate", "--lrp", s(&l), s(&r), s(&p)]);
    assert_eq!(o.status.code(), Some(0));

    // one flipped sign in the output map
    let text = std::fs::read_to_string(&p).unwrap();
    let flipped = text.replacen(" -1\n", " 1\n", 1);
    assert_ne!(flipped, text);
    let bad_p = dir.path().join("bad_P.sms");
    std::fs::write(&bad_p, flipped).unwrap();
    let o = fmm(&["validate", "--lrp", s(&l), s(&r), s(&bad_p)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("INVALID"));

    let corrupt = dir.path().join("corrupt_P.sms");
    std::fs::write(&corrupt, "4 7 M\n1 1 1\n2 x 1\n0 0 0\n").unwrap();
    let o = fmm(&["validate", "--lrp", s(&l), s(&r), s(&corrupt)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn scheme_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    for x in ["L", "R", "P"] {
        std::fs::copy(data(&format!("winograd_{x}.sms")), dir.path().join(format!("mine_{x}.sms"))).unwrap();
    }
    let o = Command::new(env!("CARGO_BIN_EXE_fmm"))
        .args(["validate", "--scheme", "mine"])
        .env("FMM_SCHEME_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fmm(&["validate", "--scheme", "mine"]).status.code(), Some(2));
}

#[test]
fn usage_errors() {
    assert_eq!(fmm(&[]).status.code(), Some(2));
    assert_eq!(fmm(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(fmm(&["gamma", "--norms", "3,3"]).status.code(), Some(2));
    assert_eq!(fmm(&["--help"]).status.code(), Some(0));
}

#[test]
fn gamma_table() {
    let o = fmm(&["gamma", "--scheme", "strassen", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let got: Vec<f64> = v[0]["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["gamma"].as_f64().unwrap())
        .collect();
    for (g, want) in got.iter().zip([12.0, 6.829, 17.889, 10.453]) {
        assert!((g - want).abs() < 0.01, "{g} vs {want}");
    }
    let o = fmm(&["gamma", "--scheme", "classic-2x2x2", "--norms", "inf,inf"]);
    assert!(stdout(&o).contains("2.0000 [1.000]"));
    let o = fmm(&["gamma", "--scheme", "acc-4x4x4"]);
    let out = stdout(&o);
    for cell in ["224.0000", "27.3137", "896.0000", "109.2548", "154.5097"] {
        assert!(out.contains(cell), "{out}");
    }
}

#[test]
fn count_reports() {
    let out = stdout(&fmm(&["count", "--scheme", "acc-4x4x4"]));
    assert!(out.contains("(355 linear operations)"), "{out}");
    assert!(out.contains("constant   387/32"));
    let out = stdout(&fmm(&["count", "--scheme", "acc-4x4x4-alt"]));
    assert!(out.contains("core       6 additions, 1 shifts, 0 products (7 linear operations)"), "{out}");
    assert!(out.contains("alt constant 8,"));
    let total: usize = out
        .lines()
        .find(|l| l.starts_with("cob total"))
        .and_then(|l| l.split('(').nth(1))
        .and_then(|t| t.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    assert!(total <= 368);
    let out = stdout(&fmm(&["count", "--slp", s(&data("acc-4x4x4_R.slp"))]));
    assert!(out.contains("88 additions, 16 shifts"));
    assert_eq!(fmm(&["count"]).status.code(), Some(2));
}

#[test]
fn multiply_identity_dense_and_exact() {
    let dir = tempfile::tempdir().unwrap();
    let n = 20;
    let mut ident = String::new();
    let mut b = String::new();
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| if i == j { "1" } else { "0" }.to_string()).collect();
        ident.push_str(&(row.join(" ") + "\n"));
        let row: Vec<String> = (0..n).map(|j| format!("{}", (i * 7 + j * 3) as f64 / 16.0 - 4.0)).collect();
        b.push_str(&(row.join(" ") + "\n"));
    }
    let (pa, pb, pc) = (dir.path().join("a.txt"), dir.path().join("b.txt"), dir.path().join("c.txt"));
    std::fs::write(&pa, ident).unwrap();
    std::fs::write(&pb, &b).unwrap();
    for extra in [&[][..], &["--alt"][..]] {
        let mut args = vec!["multiply", "--scheme", "acc-4x4x4-alt", "--a", s(&pa), "--b", s(&pb), "-o", s(&pc)];
        args.extend_from_slice(extra);
        let o = fmm(&args);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let got = fmm_lab::cli::load_dense(&pc).unwrap();
        assert_eq!(got, fmm_lab::cli::parse_dense(&b).unwrap());
    }

    let l = data("strassen_L.sms");
    let o = fmm(&["multiply", "--scheme", "winograd", "--exact", "--a", s(&l), "--b", s(&data("strassen_R.sms"))]);
    assert_eq!(o.status.code(), Some(2), "7x4 by 7x4 must be rejected");
    let sq = dir.path().join("sq.sms");
    std::fs::write(&sq, "3 3 M\n1 1 1/2\n2 3 -3\n3 2 1/2^4\n0 0 0\n").unwrap();
    let o = fmm(&["multiply", "--scheme", "strassen", "--exact", "--levels", "1", "--a", s(&sq), "--b", s(&sq)]);
    assert_eq!(o.status.code(), Some(0));
    let c = fmm_lab::sms::parse_sms(&stdout(&o)).unwrap();
    let m = fmm_lab::sms::load_sms(&sq).unwrap();
    assert_eq!(c, fmm_lab::classical_multiply(&m, &m).unwrap());
}

#[test]
fn slp_verify_listings() {
    let o = fmm(&["slp-verify", "--slp", s(&data("acc-4x4x4_L.slp")), "--matrix", s(&data("acc-4x4x4_L.sms"))]);
    assert_eq!(o.status.code(), Some(0));
    let o = fmm(&["slp-verify", "--slp", s(&data("acc-4x4x4_L.slp")), "--matrix", s(&data("acc-4x4x4_R.sms"))]);
    assert_eq!(o.status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.slp");
    std::fs::write(&bad, "x = a + ;\n").unwrap();
    let o = fmm(&["slp-verify", "--slp", s(&bad), "--matrix", s(&data("acc-4x4x4_L.sms"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_default_config_cardinality() {
    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("plot.gp");
    let o = fmm(&["bench", "--plot", s(&plot)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let cfg = fmm_lab::bench::BenchConfig::default();
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines[0], "scheme,n,seed,trial,max_err,elapsed");
    assert_eq!(lines.len() - 1, cfg.schemes.len() * cfg.sizes.len() * cfg.trials);
    let script = std::fs::read_to_string(&plot).unwrap();
    assert!(script.contains("set logscale xy") && script.contains("title 'winograd'"));
}

#[test]
fn bench_json_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"sizes":[8,12],"schemes":["classical","strassen"],"trials":2,"seed":5,"reference":"double-double"}"#).unwrap();
    let o = fmm(&["bench", "--config", s(&cfg), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Vec<fmm_lab::bench::BenchRecord> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v.len(), 8);
    assert!(v.iter().all(|r| r.max_err >= 0.0));
    std::fs::write(&cfg, r#"{"sizes":[8],"bogus":1}"#).unwrap();
    assert_eq!(fmm(&["bench", "--config", s(&cfg)]).status.code(), Some(2));
    assert_eq!(fmm(&["bench", "--sizes", "0"]).status.code(), Some(2));
}
