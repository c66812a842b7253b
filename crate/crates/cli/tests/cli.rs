use std::path::PathBuf;
use std::process::Command;

use wsl_cli::{execute, figure_codes, Outcome, EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE};
use wsl_core::bitchannel::polar_bec_recursion;
use wsl_core::codes::KERNEL_FIXTURE;
use wsl_core::report::split_report;

fn fixture(name: &str) -> String {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/specs");
    dir.join(name).to_string_lossy().into_owned()
}

fn wsl(args: &[&str]) -> Outcome {
    execute(std::iter::once("wsl").chain(args.iter().copied()))
}

fn body(text: &str) -> Vec<String> {
    split_report(text).1.into_iter().map(str::to_string).collect()
}

fn meta_value(text: &str, key: &str) -> Option<String> {
    split_report(text).0.into_iter().find(|(k, _)| k == key).map(|(_, v)| v)
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wsl"))
}

#[test]
fn construct_g2() {
    let out = wsl(&["construct", "--spec", &fixture("g2.json")]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert_eq!(body(&out.stdout), ["10", "11"]);
    assert_eq!(meta_value(&out.stdout, "rank").as_deref(), Some("2"));
    assert!(meta_value(&out.stdout, "spec").unwrap().contains("\"polar\""));
}

#[test]
fn construct_n128_is_full_rank() {
    let out = wsl(&["construct", "--spec", &fixture("n128_mkpac.json")]);
    assert_eq!(out.code, EXIT_OK);
    let rows = body(&out.stdout);
    assert_eq!(rows.len(), 128);
    assert!(rows.iter().all(|r| r.len() == 128));
    assert_eq!(meta_value(&out.stdout, "rank").as_deref(), Some("128"));
    assert_eq!(meta_value(&out.stdout, "invertible").as_deref(), Some("true"));
}

#[test]
fn bundled_and_inline_specs_agree_with_files() {
    let from_file = wsl(&["construct", "--spec", &fixture("n16_mkpac.json")]);
    let bundled = wsl(&["construct", "--spec", "n16_mkpac"]);
    let inline = wsl(&[
        "construct",
        "--spec",
        r#"{"family": "mk-pac", "kernels": ["G16"], "conv_poly": [1, 0, 1, 1, 0, 1, 1], "n": 16}"#,
    ]);
    assert_eq!(from_file, bundled);
    assert_eq!(from_file, inline);
}

#[test]
fn invalid_polynomial_exits_with_usage_code() {
    let out = wsl(&["construct", "--spec", &fixture("invalid_poly.json")]);
    assert_eq!(out.code, EXIT_USAGE);
    assert!(out.stderr.contains("invalid polynomial"), "{}", out.stderr);

    let status = binary()
        .args(["construct", "--spec", &fixture("invalid_poly.json")])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(EXIT_USAGE));
    assert!(String::from_utf8_lossy(&status.stderr).contains("invalid polynomial"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(wsl(&["no-such-command"]).code, EXIT_USAGE);
    assert_eq!(wsl(&["construct"]).code, EXIT_USAGE);
    assert_eq!(wsl(&["construct", "--spec", "missing-spec"]).code, EXIT_USAGE);
    assert_eq!(
        wsl(&["bitchannels", "--spec", "n16_polar", "--p", "1.5"]).code,
        EXIT_USAGE
    );
    assert_eq!(wsl(&["rates"]).code, EXIT_USAGE);
    assert_eq!(wsl(&["rates", "--figure", "7"]).code, EXIT_USAGE);
    assert_eq!(wsl(&["--threads", "0", "bounds", "--n", "4"]).code, EXIT_USAGE);
    let help = wsl(&["--help"]);
    assert_eq!(help.code, EXIT_OK);
    assert!(help.stdout.contains("selftest"));
}

#[test]
fn exact_bitchannels_match_recursion() {
    let out = wsl(&[
        "bitchannels",
        "--spec",
        &fixture("n16_polar.json"),
        "--p",
        "0.4",
        "--exact",
    ]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert_eq!(meta_value(&out.stdout, "method").as_deref(), Some("exact"));
    let rows = body(&out.stdout);
    assert_eq!(rows[0], "index,erasure_prob,std_err,tvd");
    let expected = polar_bec_recursion(0.4, 4);
    for (row, want) in rows[1..].iter().zip(expected) {
        let got: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn exact_above_cap_is_rejected() {
    let out = wsl(&["bitchannels", "--spec", "n32_polar", "--exact"]);
    assert_eq!(out.code, EXIT_USAGE);
    assert!(out.stderr.contains("cap"));
}

#[test]
fn env_var_overrides_enumeration_cap() {
    let run = |cap: &str| {
        binary()
            .env("WSL_ENUM_CAP", cap)
            .args(["bitchannels", "--spec", "n16_polar", "--exact"])
            .output()
            .unwrap()
    };
    let low = run("8");
    assert_eq!(low.status.code(), Some(EXIT_USAGE));
    let high = run("16");
    assert_eq!(high.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8_lossy(&high.stdout).contains("# enum_cap: 16"));
    let bad = run("many");
    assert_eq!(bad.status.code(), Some(EXIT_USAGE));
}

#[test]
fn sorted_output_is_ascending_in_tvd() {
    let out = wsl(&["bitchannels", "--spec", "n128_mkpac", "--trials", "5000", "--sorted"]);
    assert_eq!(out.code, EXIT_OK);
    let rows = body(&out.stdout);
    assert_eq!(rows.len(), 129);
    let tvd: Vec<f64> = rows[1..]
        .iter()
        .map(|r| r.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(tvd.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn same_seed_gives_identical_bytes_for_any_thread_count() {
    let args = ["bitchannels", "--spec", "n64_mkpac", "--trials", "20000", "--seed", "9"];
    let one = wsl(&[&["--threads", "1"][..], &args[..]].concat());
    let four = wsl(&[&["--threads", "4"][..], &args[..]].concat());
    let default = wsl(&args);
    assert_eq!(one.code, EXIT_OK);
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.stdout, default.stdout);
    let other_seed = wsl(&[
        "bitchannels",
        "--spec",
        "n64_mkpac",
        "--trials",
        "20000",
        "--seed",
        "10",
    ]);
    assert_ne!(body(&one.stdout), body(&other_seed.stdout));
}

#[test]
fn metadata_reproduces_the_run() {
    let out = wsl(&[
        "bitchannels",
        "--spec",
        "n32_mkpac",
        "--trials",
        "4000",
        "--seed",
        "5",
        "--p",
        "0.3",
    ]);
    let spec = meta_value(&out.stdout, "spec").unwrap();
    let p = meta_value(&out.stdout, "p").unwrap();
    let trials = meta_value(&out.stdout, "trials").unwrap();
    let seed = meta_value(&out.stdout, "seed").unwrap();
    assert_eq!(meta_value(&out.stdout, "conditioning").as_deref(), Some("all-past"));
    assert!(meta_value(&out.stdout, "rng").unwrap().contains("ChaCha8"));
    let again = wsl(&[
        "bitchannels",
        "--spec",
        &spec,
        "--trials",
        &trials,
        "--seed",
        &seed,
        "--p",
        &p,
    ]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn message_past_conditioning_records_the_set() {
    let out = wsl(&[
        "bitchannels",
        "--spec",
        "n16_polar",
        "--exact",
        "--conditioning",
        "message-past",
        "--message-set",
        "1,2,3,5",
    ]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert_eq!(meta_value(&out.stdout, "conditioning").as_deref(), Some("message-past"));
    assert_eq!(meta_value(&out.stdout, "message_set").as_deref(), Some("1,2,3,5"));
    // with nothing known, the first input sees the plain channel only through
    // its own row, so its erasure probability can only grow
    let all_past = wsl(&["bitchannels", "--spec", "n16_polar", "--exact"]);
    let col = |text: &str, i: usize| -> f64 { body(text)[i].split(',').nth(1).unwrap().parse().unwrap() };
    for i in [1, 2, 3, 5] {
        assert!(col(&out.stdout, i) >= col(&all_past.stdout, i) - 1e-15);
    }
    let bad = wsl(&[
        "bitchannels",
        "--spec",
        "n16_polar",
        "--conditioning",
        "message-past",
        "--message-set",
        "0",
    ]);
    assert_eq!(bad.code, EXIT_USAGE);
}

#[test]
fn rates_with_zero_erasure_are_all_zero() {
    let out = wsl(&["rates", "--spec", "n16_mkpac", "--p", "0", "--trials", "2000"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let rows = body(&out.stdout);
    let cells: Vec<&str> = rows[1].split(',').collect();
    for c in &cells[3..10] {
        assert_eq!(c.parse::<f64>().unwrap(), 0.0, "{}", rows[1]);
    }
}

#[test]
fn theory_rows_have_empty_code_columns() {
    let out = wsl(&["rates", "--n", "16,128", "--delta", "0.001"]);
    assert_eq!(out.code, EXIT_OK);
    let rows = body(&out.stdout);
    assert_eq!(rows.len(), 3);
    let cells: Vec<&str> = rows[2].split(',').collect();
    assert_eq!(cells[0], "128");
    assert_eq!(cells[7], "35");
    assert_eq!(&cells[9..], ["", "", ""]);
    let r2: f64 = cells[5].parse().unwrap();
    assert!((r2 - 0.2662).abs() < 1e-4);
}

#[test]
fn rate_rows_for_specs() {
    let out = wsl(&[
        "rates",
        "--spec",
        "n32_mkpac",
        "--spec",
        "n32_polar",
        "--trials",
        "20000",
    ]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let rows = body(&out.stdout);
    assert_eq!(rows.len(), 3);
    assert!(rows[1].ends_with(",mk-pac"));
    assert!(rows[2].ends_with(",polar"));
    for row in &rows[1..] {
        let cells: Vec<&str> = row.split(',').collect();
        let k_code: usize = cells[9].parse().unwrap();
        let k_conv: usize = cells[7].parse().unwrap();
        assert!(k_code <= k_conv);
        let leak: f64 = cells[10].parse().unwrap();
        assert!(leak <= 0.001);
    }
}

#[test]
fn figure_codes_cover_the_published_table() {
    let codes = figure_codes();
    assert_eq!(codes.len(), 20);
    let labels: Vec<String> = codes.iter().take(4).map(wsl_core::secrecy::code_label).collect();
    assert_eq!(labels, ["polar", "polar-rm", "mk-pac", "mk-pac-rm"]);
    assert_eq!(codes.last().unwrap().n, 256);
}

#[test]
fn leakage_exact_matches_closed_form() {
    // polar n = 8 with the best bit-channel alone behaves like a
    // single-parity-check coset code
    let out = wsl(&[
        "leakage-exact",
        "--spec",
        r#"{"family":"polar","kernels":["G2","G2","G2"],"conv_poly":[1],"n":8}"#,
        "--message-set",
        "1",
    ]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let rows = body(&out.stdout);
    let cells: Vec<&str> = rows[1].split(',').collect();
    let exact: f64 = cells[3].parse().unwrap();
    let bound: f64 = cells[4].parse().unwrap();
    assert!((exact - 0.00839808).abs() < 1e-12);
    assert!(exact <= bound + 1e-12);
    let too_big = wsl(&["leakage-exact", "--spec", "n16_polar", "--message-set", "1"]);
    assert_eq!(too_big.code, EXIT_USAGE);
}

#[test]
fn bounds_table_and_raw_values() {
    let out = wsl(&["bounds", "--n", "16", "--p", "0.4"]);
    assert_eq!(out.code, EXIT_OK);
    let rows = body(&out.stdout);
    assert_eq!(rows.len(), 17);
    let delta: Vec<f64> = rows[1..]
        .iter()
        .map(|r| r.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert!(delta.windows(2).all(|w| w[0] <= w[1] + 1e-12));
    let raw = wsl(&["bounds", "--n", "8", "--log2-gamma", "-8,0,4"]);
    let rows = body(&raw.stdout);
    assert_eq!(rows[0], "log2_gamma,g_n,h_n");
    let at_zero: Vec<f64> = rows[2].split(',').map(|c| c.parse().unwrap()).collect();
    assert!((at_zero[1] - (1.0 - 0.7f64.powi(8))).abs() < 1e-12);
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("wsl-cli-test-{}.csv", std::process::id()));
    let out = wsl(&["--out", path.to_str().unwrap(), "construct", "--spec", "g2"]);
    assert_eq!(out.code, EXIT_OK);
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(body(&written), ["10", "11"]);
}

#[test]
fn quick_selftest_passes_fast() {
    let start = std::time::Instant::now();
    let out = wsl(&["selftest", "--quick"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stdout);
    assert!(out.stdout.contains("all 6 checks passed"));
    assert!(start.elapsed().as_secs() < 10);
}

#[test]
fn corrupted_kernel_fixture_fails_selftest() {
    let path = std::env::temp_dir().join(format!("wsl-kernels-{}.txt", std::process::id()));
    // flip one bit of the first G8 row
    let corrupted = KERNEL_FIXTURE.replacen("[G8]\n10000000", "[G8]\n10000001", 1);
    assert_ne!(corrupted, KERNEL_FIXTURE);
    std::fs::write(&path, corrupted).unwrap();
    let out = wsl(&["selftest", "--quick", "--kernel-fixture", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(out.code, EXIT_CHECK_FAILED);
    assert!(out.stdout.contains("[FAIL] kernel-checksum"));
    assert!(out.stdout.contains("G8"));
}
