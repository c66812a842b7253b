use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::Path;

use wsl_core::bitchannel::{exact_erasure_probs, mc_erasure_probs, DEFAULT_EXACT_CAP, RNG_DESCRIPTION};
use wsl_core::codes::bundled_spec;
use wsl_core::report::{bitchannel_csv, bound_csv, Metadata};
use wsl_core::secrecy::{
    achievability_curve, code_label, code_rate_curve, exact_leakage, g_n_log2, gamma_search_description, h_n_log2,
    select_message_set, DEFAULT_LEAKAGE_CAP,
};
use wsl_core::{
    build_generator, BitChannelEstimate, BoundResult, CodeSpec, Conditioning, ErasureTrialPlan, LeakageBound,
    RateOptions, RateProfile, WiretapCode,
};

use crate::{BoundArg, CliError, Command, ConditioningArg, ENUM_CAP_ENV, EXIT_CHECK_FAILED, EXIT_OK};

type CmdResult = Result<(i32, String), CliError>;

/// Blocklengths of the published rate figures.
const FIGURE_SIZES: [usize; 5] = [16, 32, 64, 128, 256];

pub(crate) fn dispatch(command: &Command) -> CmdResult {
    match command {
        Command::Construct { spec } => construct(spec),
        Command::Bitchannels {
            spec,
            p,
            trials,
            seed,
            conditioning,
            message_set,
            delta,
            exact,
            sorted,
            figure,
        } => match figure {
            Some(1) => figure_one(*p, *trials, *seed),
            Some(f) => Err(CliError::usage(format!(
                "figure {f} is not a bit-channel figure (use 1)"
            ))),
            None => bitchannels(&BitchannelArgs {
                spec: spec.as_deref().unwrap_or_default(),
                p: *p,
                trials: *trials,
                seed: *seed,
                conditioning: *conditioning,
                message_set: message_set.as_deref(),
                delta: *delta,
                exact: *exact,
                sorted: *sorted,
            }),
        },
        Command::Rates {
            spec,
            n,
            p,
            delta,
            trials,
            seed,
            exact,
            conservative,
            bound,
            figure,
            clamp,
        } => {
            let opts = RateOptions {
                exact: *exact,
                exact_cap: enum_cap(DEFAULT_EXACT_CAP)?,
                conservative: *conservative,
                bound: match bound {
                    BoundArg::Bound1 => LeakageBound::Bound1,
                    BoundArg::Bound2 => LeakageBound::Bound2,
                },
            };
            let (delta, specs) = match figure {
                Some(2) => (0.001, figure_codes()),
                Some(3) => (0.01, figure_codes()),
                Some(f) => return Err(CliError::usage(format!("figure {f} is not a rate figure (use 2 or 3)"))),
                None => {
                    let specs = spec.iter().map(|s| resolve_spec(s)).collect::<Result<Vec<_>, _>>()?;
                    (*delta, specs)
                }
            };
            if specs.is_empty() && n.is_empty() {
                return Err(CliError::usage("rates needs --spec, --n or --figure"));
            }
            rates(&specs, n, *p, delta, *trials, *seed, &opts, *figure, *clamp)
        }
        Command::LeakageExact {
            spec,
            p,
            message_set,
            delta,
        } => leakage(spec, *p, message_set.as_deref(), *delta),
        Command::Bounds { n, p, log2_gamma } => bounds(*n, *p, log2_gamma),
        Command::Selftest { quick, kernel_fixture } => {
            let fixture = match kernel_fixture {
                Some(path) => Some(
                    std::fs::read_to_string(path)
                        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?,
                ),
                None => None,
            };
            let report = crate::selftest::run(*quick, fixture.as_deref());
            let code = if report.all_passed() {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            };
            Ok((code, report.render()))
        }
    }
}

/// Reads a spec from a file, a bundled name or inline JSON, and validates it.
pub(crate) fn resolve_spec(arg: &str) -> Result<CodeSpec, CliError> {
    let trimmed = arg.trim();
    let text = if trimmed.starts_with('{') {
        trimmed.to_string()
    } else if Path::new(arg).is_file() {
        std::fs::read_to_string(arg).map_err(|e| CliError::usage(format!("cannot read {arg}: {e}")))?
    } else if let Some(text) = bundled_spec(arg) {
        text.to_string()
    } else {
        return Err(CliError::usage(format!(
            "spec {arg:?} is neither a file, a bundled spec nor JSON"
        )));
    };
    let spec = CodeSpec::from_json(&text)?;
    spec.validate()?;
    Ok(spec)
}

/// Enumeration cap, overridden by the environment when set.
pub(crate) fn enum_cap(default: usize) -> Result<usize, CliError> {
    match std::env::var(ENUM_CAP_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("{ENUM_CAP_ENV} must be a non-negative integer, got {v:?}"))),
        Err(_) => Ok(default),
    }
}

fn meta(entries: &[(&str, String)]) -> Metadata {
    let mut m = vec![("tool".to_string(), format!("wsl {}", env!("CARGO_PKG_VERSION")))];
    m.extend(entries.iter().map(|(k, v)| (k.to_string(), v.clone())));
    m
}

fn write_meta(out: &mut String, metadata: &Metadata) {
    for (k, v) in metadata {
        writeln!(out, "# {k}: {v}").unwrap();
    }
}

fn one_based(set: &[usize]) -> String {
    set.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",")
}

fn zero_based(set: &[usize], n: usize) -> Result<Vec<usize>, CliError> {
    set.iter()
        .map(|&i| {
            if i == 0 || i > n {
                Err(CliError::usage(format!("message position {i} is outside 1..={n}")))
            } else {
                Ok(i - 1)
            }
        })
        .collect()
}

fn construct(spec_arg: &str) -> CmdResult {
    let spec = resolve_spec(spec_arg)?;
    let g = build_generator(&spec)?;
    let mut out = String::new();
    write_meta(
        &mut out,
        &meta(&[("command", "construct".into()), ("spec", spec.to_json())]),
    );
    for row in g.to_row_strings() {
        writeln!(out, "{row}").unwrap();
    }
    let mut histogram = BTreeMap::new();
    for w in g.row_weights() {
        *histogram.entry(w).or_insert(0usize) += 1;
    }
    let histogram: Vec<String> = histogram.iter().map(|(w, c)| format!("{w}:{c}")).collect();
    writeln!(out, "# rank: {}", g.rank()).unwrap();
    writeln!(out, "# invertible: {}", g.is_invertible()).unwrap();
    writeln!(out, "# row_weight_histogram: {}", histogram.join(",")).unwrap();
    Ok((EXIT_OK, out))
}

struct BitchannelArgs<'a> {
    spec: &'a str,
    p: f64,
    trials: usize,
    seed: u64,
    conditioning: ConditioningArg,
    message_set: Option<&'a [usize]>,
    delta: f64,
    exact: bool,
    sorted: bool,
}

fn estimates(
    generator: &wsl_core::BitMatrix,
    plan: &ErasureTrialPlan,
    exact: bool,
    cap: usize,
) -> Result<Vec<BitChannelEstimate>, CliError> {
    if exact {
        Ok(exact_erasure_probs(generator, plan.p, &plan.conditioning, cap)?)
    } else {
        plan.validate()?;
        Ok(mc_erasure_probs(generator, plan)?)
    }
}

fn bitchannels(args: &BitchannelArgs) -> CmdResult {
    let spec = resolve_spec(args.spec)?;
    let g = build_generator(&spec)?;
    let cap = enum_cap(DEFAULT_EXACT_CAP)?;
    let mut plan = ErasureTrialPlan::new(args.p, args.trials, args.seed);
    let mut entries = vec![
        ("command", "bitchannels".to_string()),
        ("spec", spec.to_json()),
        ("p", args.p.to_string()),
        (
            "method",
            if args.exact {
                "exact".into()
            } else {
                "monte-carlo".into()
            },
        ),
    ];
    if args.exact {
        entries.push(("enum_cap", cap.to_string()));
    } else {
        entries.push(("trials", args.trials.to_string()));
        entries.push(("seed", args.seed.to_string()));
        entries.push(("rng", RNG_DESCRIPTION.to_string()));
    }
    if args.conditioning == ConditioningArg::MessagePast {
        let set = match args.message_set {
            Some(set) => zero_based(set, spec.n)?,
            None => {
                let all_past = estimates(&g, &plan, args.exact, cap)?;
                entries.push((
                    "message_set_rule",
                    format!("greedy bound-2 selection at delta {}", args.delta),
                ));
                select_message_set(&all_past, args.delta).set
            }
        };
        entries.push(("message_set", one_based(&set)));
        plan.conditioning = Conditioning::MessagePast(set);
    }
    entries.push(("conditioning", plan.conditioning.label().to_string()));
    entries.push(("sorted", args.sorted.to_string()));
    let est = estimates(&g, &plan, args.exact, cap)?;
    Ok((EXIT_OK, bitchannel_csv(&est, &meta(&entries), args.sorted)))
}

/// Sorted bit-channel TVDs at `n = 128` for polar, MK-polar and MK-PAC codes.
fn figure_one(p: f64, trials: usize, seed: u64) -> CmdResult {
    let names = ["n128_polar", "n128_mkpolar", "n128_mkpac"];
    let plan = ErasureTrialPlan::new(p, trials, seed);
    plan.validate()?;
    let mut entries = vec![
        ("command", "bitchannels --figure 1".to_string()),
        ("p", p.to_string()),
        ("trials", trials.to_string()),
        ("seed", seed.to_string()),
        ("conditioning", "all-past".to_string()),
        ("rng", RNG_DESCRIPTION.to_string()),
    ];
    let mut columns = Vec::new();
    let mut labels = Vec::new();
    for name in names {
        let spec = resolve_spec(name)?;
        let mut tvd: Vec<f64> = mc_erasure_probs(&build_generator(&spec)?, &plan)?
            .iter()
            .map(|e| e.tvd)
            .collect();
        tvd.sort_by(f64::total_cmp);
        labels.push(code_label(&spec));
        entries.push(("spec", spec.to_json()));
        columns.push(tvd);
    }
    let mut out = String::new();
    write_meta(&mut out, &meta(&entries));
    writeln!(out, "rank,{}", labels.join(",")).unwrap();
    for r in 0..columns[0].len() {
        let cells: Vec<String> = columns.iter().map(|c| c[r].to_string()).collect();
        writeln!(out, "{},{}", r + 1, cells.join(",")).unwrap();
    }
    Ok((EXIT_OK, out))
}

/// Codes of the published rate figures: polar and MK-PAC, each with the
/// Bhattacharyya and the Reed–Muller rate profile.
pub fn figure_codes() -> Vec<CodeSpec> {
    let mut specs = Vec::new();
    for n in FIGURE_SIZES {
        for family in ["polar", "mkpac"] {
            let spec = CodeSpec::from_json(bundled_spec(&format!("n{n}_{family}")).expect("bundled spec"))
                .expect("bundled spec parses");
            specs.push(spec.clone());
            specs.push(spec.with_profile(RateProfile::ReedMuller));
        }
    }
    specs
}

#[allow(clippy::too_many_arguments)]
fn rates(
    specs: &[CodeSpec],
    ns: &[usize],
    p: f64,
    delta: f64,
    trials: usize,
    seed: u64,
    opts: &RateOptions,
    figure: Option<u8>,
    clamp: bool,
) -> CmdResult {
    let plan = ErasureTrialPlan::new(p, trials, seed);
    let mut rows = Vec::new();
    for &n in ns {
        if n == 0 {
            return Err(CliError::usage("--n values must be positive"));
        }
        rows.push(BoundResult::theory(n, p, delta)?);
    }
    if !specs.is_empty() {
        plan.validate()?;
    }
    for spec in specs {
        rows.push(code_rate_curve(spec, p, delta, &plan, opts)?);
    }
    let mut entries = vec![
        (
            "command",
            match figure {
                Some(f) => format!("rates --figure {f}"),
                None => "rates".to_string(),
            },
        ),
        ("p", p.to_string()),
        ("delta", delta.to_string()),
    ];
    if !specs.is_empty() {
        entries.extend([
            ("trials", trials.to_string()),
            ("seed", seed.to_string()),
            ("rng", RNG_DESCRIPTION.to_string()),
            ("conditioning", "all-past".to_string()),
            ("selection", "greedy by rate profile, bound 2 budget".to_string()),
            (
                "leakage_bound",
                match opts.bound {
                    LeakageBound::Bound1 => "bound-1".to_string(),
                    LeakageBound::Bound2 => "bound-2".to_string(),
                },
            ),
            ("exact", opts.exact.to_string()),
            ("conservative", opts.conservative.to_string()),
        ]);
        if opts.exact {
            entries.push(("enum_cap", opts.exact_cap.to_string()));
        }
        for spec in specs {
            entries.push(("spec", spec.to_json()));
        }
    }
    entries.push(("clamp_second_order", clamp.to_string()));
    let mut sizes: Vec<usize> = rows.iter().map(|r| r.n).collect();
    sizes.sort_unstable();
    sizes.dedup();
    for n in sizes {
        entries.push(("gamma_search", format!("n={n}: {}", gamma_search_description(n))));
    }
    Ok((EXIT_OK, bound_csv(&rows, &meta(&entries), clamp)))
}

fn leakage(spec_arg: &str, p: f64, message_set: Option<&[usize]>, delta: f64) -> CmdResult {
    let spec = resolve_spec(spec_arg)?;
    let g = build_generator(&spec)?;
    let exact_cap = enum_cap(DEFAULT_EXACT_CAP)?;
    let leak_cap = enum_cap(DEFAULT_LEAKAGE_CAP)?;
    let mut entries = vec![
        ("command", "leakage-exact".to_string()),
        ("spec", spec.to_json()),
        ("p", p.to_string()),
        ("enum_cap", leak_cap.to_string()),
    ];
    let est = if spec.n <= exact_cap {
        Some(exact_erasure_probs(&g, p, &Conditioning::AllPast, exact_cap)?)
    } else {
        None
    };
    let set = match message_set {
        Some(set) => zero_based(set, spec.n)?,
        None => {
            let est = est
                .as_ref()
                .ok_or_else(|| CliError::usage("--message-set is required above the enumeration cap"))?;
            entries.push(("message_set_rule", format!("greedy bound-2 selection at delta {delta}")));
            select_message_set(est, delta).set
        }
    };
    entries.push(("message_set", one_based(&set)));
    let code = WiretapCode::new(spec.clone(), &set)?;
    let exact = exact_leakage(&code, p, leak_cap)?;
    let bound = est.map(|e| set.iter().map(|&i| e[i].tvd).sum::<f64>());
    let mut out = String::new();
    write_meta(&mut out, &meta(&entries));
    writeln!(out, "n,k,p,leakage_exact,leakage_bound2").unwrap();
    writeln!(
        out,
        "{},{},{},{},{}",
        spec.n,
        code.k(),
        p,
        exact,
        bound.map(|b| b.to_string()).unwrap_or_default()
    )
    .unwrap();
    Ok((EXIT_OK, out))
}

fn bounds(n: usize, p: f64, log2_gamma: &[f64]) -> CmdResult {
    if n == 0 {
        return Err(CliError::usage("--n must be positive"));
    }
    let mut out = String::new();
    let entries = vec![
        ("command", "bounds".to_string()),
        ("n", n.to_string()),
        ("p", p.to_string()),
        ("gamma_search", gamma_search_description(n)),
    ];
    write_meta(&mut out, &meta(&entries));
    if !log2_gamma.is_empty() {
        writeln!(out, "log2_gamma,g_n,h_n").unwrap();
        for &t in log2_gamma {
            writeln!(out, "{t},{},{}", g_n_log2(t, n, p)?, h_n_log2(t, n, p)?).unwrap();
        }
        return Ok((EXIT_OK, out));
    }
    writeln!(
        out,
        "k,log2_gamma_converse,g_converse,achiev_delta,achiev_log2_gamma,h_at_achiev"
    )
    .unwrap();
    for (k, a) in (1..=n).zip(achievability_curve(n, p)?) {
        let tc = (n - k) as f64;
        writeln!(
            out,
            "{k},{tc},{},{},{},{}",
            g_n_log2(tc, n, p)?,
            a.delta,
            a.log2_gamma,
            h_n_log2(a.log2_gamma, n, p)?
        )
        .unwrap();
    }
    Ok((EXIT_OK, out))
}
