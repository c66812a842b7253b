//! Oracle checks: each pits a fast path against an independent reference.

use std::fmt::Write;
use std::time::Instant;

use wsl_core::bitchannel::{exact_erasure_probs, mc_erasure_probs, polar_bec_recursion, DEFAULT_EXACT_CAP};
use wsl_core::codes::{check_kernel_fixture, repetition_coset_code, spc_coset_code, KERNEL_FIXTURE};
use wsl_core::secrecy::{
    achievability_curve, achievability_max_k, converse_max_k, exact_leakage, g_n_log2, h_n_log2, mds_avg_tvd,
    select_message_set, DEFAULT_LEAKAGE_CAP,
};
use wsl_core::{build_generator, CodeSpec, Conditioning, ErasureTrialPlan, Family, WiretapCode};

pub(crate) struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
    seconds: f64,
}

pub(crate) struct Report {
    checks: Vec<Check>,
}

impl Report {
    pub(crate) fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub(crate) fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            writeln!(out, "[{tag}] {}: {} ({:.2}s)", c.name, c.detail, c.seconds).unwrap();
        }
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        if failed.is_empty() {
            writeln!(out, "all {} checks passed", self.checks.len()).unwrap();
        } else {
            writeln!(out, "failed: {}", failed.join(", ")).unwrap();
        }
        out
    }
}

fn timed(name: &'static str, f: impl FnOnce() -> Result<(bool, String), String>) -> Check {
    let start = Instant::now();
    let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    Check {
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs every check; `quick` restricts them to `n ≤ 8`.
pub(crate) fn run(quick: bool, kernel_fixture: Option<&str>) -> Report {
    let max_s = if quick { 3 } else { 4 };
    let max_n = if quick { 8 } else { 10 };
    let bound_sizes: &[usize] = if quick { &[8] } else { &[8, 16, 32, 64] };
    let checks = vec![
        timed("kernel-checksum", || {
            kernel_checksum(kernel_fixture.unwrap_or(KERNEL_FIXTURE))
        }),
        timed("recursion-vs-enumeration", || recursion_vs_enumeration(max_s)),
        timed("mds-closed-form-vs-exhaustive", || mds_vs_exhaustive(max_n)),
        timed("monte-carlo-vs-exact", || mc_vs_exact(max_s)),
        timed("bound-ordering-and-monotonicity", || bound_monotonicity(bound_sizes)),
        timed("leakage-below-chain-bound", || leakage_below_bound(quick)),
    ];
    Report { checks }
}

fn kernel_checksum(text: &str) -> Result<(bool, String), String> {
    let bad = check_kernel_fixture(text).map_err(|e| e.to_string())?;
    if bad.is_empty() {
        Ok((true, "G2, G8, G16 match the built-in kernels".into()))
    } else {
        Ok((false, format!("mismatched kernels: {}", bad.join(", "))))
    }
}

fn polar(s: usize) -> Result<wsl_core::BitMatrix, String> {
    build_generator(&CodeSpec::polar(s)).map_err(|e| e.to_string())
}

fn recursion_vs_enumeration(max_s: usize) -> Result<(bool, String), String> {
    let mut worst = 0.0f64;
    for s in 1..=max_s {
        for p in [0.1, 0.4, 0.7] {
            let exact = exact_erasure_probs(&polar(s)?, p, &Conditioning::AllPast, DEFAULT_EXACT_CAP)
                .map_err(|e| e.to_string())?;
            for (e, r) in exact.iter().zip(polar_bec_recursion(p, s)) {
                worst = worst.max((e.erasure_prob - r).abs());
            }
        }
    }
    Ok((worst <= 1e-12, format!("n <= {}, max abs diff {worst:.2e}", 1 << max_s)))
}

fn mds_vs_exhaustive(max_n: usize) -> Result<(bool, String), String> {
    let mut worst = 0.0f64;
    for n in 4..=max_n {
        for p in [0.1, 0.25, 0.4] {
            for code in [spc_coset_code(n), repetition_coset_code(n)] {
                let code = code.map_err(|e| e.to_string())?;
                let exact = exact_leakage(&code, p, DEFAULT_LEAKAGE_CAP).map_err(|e| e.to_string())?;
                let closed = mds_avg_tvd(n, code.k(), p).map_err(|e| e.to_string())?;
                worst = worst.max((exact - closed).abs());
            }
        }
    }
    let pinned = exact_leakage(&spc_coset_code(8).map_err(|e| e.to_string())?, 0.4, DEFAULT_LEAKAGE_CAP)
        .map_err(|e| e.to_string())?;
    let ok = worst <= 1e-12 && (pinned - 0.00839808).abs() <= 1e-12;
    Ok((
        ok,
        format!("n in 4..={max_n}, max abs diff {worst:.2e}, d_TV(8, 1, 0.4) = {pinned}"),
    ))
}

fn mc_vs_exact(max_s: usize) -> Result<(bool, String), String> {
    let trials = 200_000;
    let (mut total, mut within) = (0usize, 0usize);
    let mut three_dp = true;
    for s in 1..=max_s {
        let g = polar(s)?;
        for p in [0.1, 0.4, 0.7] {
            let exact =
                exact_erasure_probs(&g, p, &Conditioning::AllPast, DEFAULT_EXACT_CAP).map_err(|e| e.to_string())?;
            for seed in [11, 22, 33] {
                let mc = mc_erasure_probs(&g, &ErasureTrialPlan::new(p, trials, seed)).map_err(|e| e.to_string())?;
                for (m, e) in mc.iter().zip(&exact) {
                    total += 1;
                    let diff = (m.erasure_prob - e.erasure_prob).abs();
                    if diff <= 4.0 * m.std_err.max(1.0 / trials as f64) {
                        within += 1;
                    }
                    three_dp &= diff <= 1e-3 + 2.0 * m.std_err;
                }
            }
        }
    }
    let ok = within as f64 >= 0.99 * total as f64 && three_dp;
    Ok((
        ok,
        format!("{within}/{total} within 4 std_err, all within 1e-3 + 2 std_err: {three_dp}"),
    ))
}

fn bound_monotonicity(sizes: &[usize]) -> Result<(bool, String), String> {
    let mut problems = Vec::new();
    for &n in sizes {
        for p in [0.2, 0.4, 0.6] {
            for delta in [0.1, 0.01, 0.001] {
                let ka = achievability_max_k(n, p, delta).map_err(|e| e.to_string())?;
                let kc = converse_max_k(n, p, delta).map_err(|e| e.to_string())?;
                if ka > kc {
                    problems.push(format!("n={n} p={p} delta={delta}: achievability {ka} > converse {kc}"));
                }
            }
            let curve = achievability_curve(n, p).map_err(|e| e.to_string())?;
            let (mut prev_a, mut prev_g) = (0.0f64, 0.0f64);
            for (k, a) in (1..=n).zip(&curve) {
                let tc = (n - k) as f64;
                for t in [tc, a.log2_gamma] {
                    let g = g_n_log2(t, n, p).map_err(|e| e.to_string())?;
                    let h = h_n_log2(t, n, p).map_err(|e| e.to_string())?;
                    if !(0.0..1.0).contains(&g) || !(h > 0.0 && h <= 1.0) {
                        problems.push(format!("n={n} p={p} log2γ={t}: g={g} h={h}"));
                    }
                }
                let g = g_n_log2(tc, n, p).map_err(|e| e.to_string())?;
                if a.delta + 1e-12 < prev_a || g + 1e-15 < prev_g {
                    problems.push(format!("n={n} p={p} k={k}: not monotone"));
                }
                prev_a = a.delta;
                prev_g = g;
            }
        }
    }
    let detail = match problems.first() {
        None => format!("n in {sizes:?}: no violations"),
        Some(first) => format!("{} violations, first: {first}", problems.len()),
    };
    Ok((problems.is_empty(), detail))
}

fn leakage_below_bound(quick: bool) -> Result<(bool, String), String> {
    let mut specs = vec![
        CodeSpec::polar(2),
        CodeSpec::polar(3),
        CodeSpec::new(Family::MkPolar, &["G8"], vec![1]).map_err(|e| e.to_string())?,
        CodeSpec::new(Family::MkPac, &["G8"], vec![1, 0, 1, 1]).map_err(|e| e.to_string())?,
    ];
    if !quick {
        specs.push(CodeSpec::new(Family::Pac, &["G2", "G2", "G2"], vec![1, 1, 0, 1]).map_err(|e| e.to_string())?);
    }
    let mut checked = 0;
    for spec in specs {
        let g = build_generator(&spec).map_err(|e| e.to_string())?;
        for p in [0.2, 0.4, 0.6] {
            let est =
                exact_erasure_probs(&g, p, &Conditioning::AllPast, DEFAULT_EXACT_CAP).map_err(|e| e.to_string())?;
            for delta in [0.01, 0.1, 0.3] {
                let sel = select_message_set(&est, delta);
                if sel.k == 0 {
                    continue;
                }
                let code = WiretapCode::new(spec.clone(), &sel.set).map_err(|e| e.to_string())?;
                let leak = exact_leakage(&code, p, DEFAULT_LEAKAGE_CAP).map_err(|e| e.to_string())?;
                checked += 1;
                if leak > sel.leakage_bound + 1e-12 {
                    return Ok((
                        false,
                        format!(
                            "n={} p={p} delta={delta}: leakage {leak} > bound {}",
                            spec.n, sel.leakage_bound
                        ),
                    ));
                }
            }
        }
    }
    Ok((
        true,
        format!("{checked} codes, exact leakage never above the bit-channel bound"),
    ))
}
