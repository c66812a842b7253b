//! Secrecy-rate bounds for the semi-deterministic binary erasure wiretap
//! channel, leakage of concrete coset codes, and message-set selection.
//!
//! Throughout, `B ~ Binomial(n, p)` is the number of erased positions and
//! `t = log2(γ)`. Working in `t` keeps every quantity finite for large `n`.

use serde::{Deserialize, Serialize};

use crate::bitchannel::{exact_erasure_probs, mc_erasure_probs, BitChannelEstimate, Conditioning, ErasureTrialPlan};
use crate::codes::{build_generator, rm_profile_order, CodeSpec, RateProfile, WiretapCode};
use crate::error::{Error, Result};
use crate::numerics::{binomial_pmf, compensated_sum, q_inv, CompensatedSum};

/// Default limit on `n` for [`exact_leakage`].
pub const DEFAULT_LEAKAGE_CAP: usize = 12;

/// Step of the coarse `log2 γ` grid.
pub const GAMMA_GRID_STEP: f64 = 0.01;
/// Final bracket width of the golden-section refinement, in `log2 γ`.
pub const GAMMA_REFINE_TOL: f64 = 1e-6;

/// Search interval for `log2 γ` at blocklength `n`.
pub fn gamma_bracket(n: usize) -> (f64, f64) {
    (-(n as f64), 2.0 * n as f64)
}

fn check_gamma(gamma: f64) -> Result<f64> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(gamma.log2())
    } else {
        Err(Error::Domain(format!(
            "gamma must be a positive finite number, got {gamma}"
        )))
    }
}

fn check_p(p: f64) -> Result<()> {
    if (0.0..1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain(format!("erasure probability must be in [0, 1), got {p}")))
    }
}

/// Binomial(n, p) weights together with the expectations that the bounds
/// are built from.
#[derive(Debug, Clone)]
struct ErasureLaw {
    n: usize,
    pmf: Vec<f64>,
}

impl ErasureLaw {
    fn new(n: usize, p: f64) -> Self {
        Self {
            n,
            pmf: binomial_pmf(n, p),
        }
    }

    /// Expectation under the pmf, normalised by its total mass so that a
    /// pmf that sums to `1 ± ulp` cannot push a probability past 1.
    fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        let mass = compensated_sum(self.pmf.iter().copied());
        let sum = compensated_sum(
            self.pmf
                .iter()
                .enumerate()
                .filter(|(_, &w)| w > 0.0)
                .map(|(b, &w)| w * f(b as f64)),
        );
        sum / mass
    }

    /// `1 - E[2^{-max(n - B - t, 0)}]`, summed as `E[1 - 2^{-…}]` to avoid
    /// cancellation.
    fn g(&self, t: f64) -> f64 {
        let n = self.n as f64;
        self.expect(|b| -(-(n - b - t).max(0.0) * std::f64::consts::LN_2).exp_m1())
    }

    /// `E[2^{-|n - B - t|}]`
    fn h(&self, t: f64) -> f64 {
        let n = self.n as f64;
        self.expect(|b| (-(n - b - t).abs()).exp2())
    }

    /// `2^{t-n} h(t)`, evaluated termwise so it never overflows.
    fn scaled_h(&self, t: f64) -> f64 {
        let n = self.n as f64;
        self.expect(|b| (t - n - (n - b - t).abs()).exp2())
    }

    /// Achievability objective `½ (g + sqrt(g² + γ 2^{k-n} h))`.
    fn objective(&self, t: f64, k: usize) -> f64 {
        let g = self.g(t);
        0.5 * (g + (g * g + (k as f64).exp2() * self.scaled_h(t)).sqrt())
    }
}

/// `g_n(γ) = 1 - E[2^{-max(n - B - log2 γ, 0)}]`.
pub fn g_n(gamma: f64, n: usize, p: f64) -> Result<f64> {
    let t = check_gamma(gamma)?;
    check_p(p)?;
    Ok(ErasureLaw::new(n, p).g(t))
}

/// `g_n` at `γ = 2^log2_gamma`, for exponents that overflow `f64`.
pub fn g_n_log2(log2_gamma: f64, n: usize, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(ErasureLaw::new(n, p).g(log2_gamma))
}

/// `h_n(γ) = E[2^{-|n - B - log2 γ|}]`.
pub fn h_n(gamma: f64, n: usize, p: f64) -> Result<f64> {
    let t = check_gamma(gamma)?;
    check_p(p)?;
    Ok(ErasureLaw::new(n, p).h(t))
}

pub fn h_n_log2(log2_gamma: f64, n: usize, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(ErasureLaw::new(n, p).h(log2_gamma))
}

/// Leakage certified by the random-coding achievability bound for `k`
/// message bits, with the minimizing `log2 γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Achievability {
    pub delta: f64,
    pub log2_gamma: f64,
}

/// Coarse grid of `g` and scaled `h` over the `log2 γ` bracket, shared
/// across message sizes.
struct GammaGrid<'a> {
    law: &'a ErasureLaw,
    ts: Vec<f64>,
    g: Vec<f64>,
    sh: Vec<f64>,
}

impl<'a> GammaGrid<'a> {
    fn new(law: &'a ErasureLaw) -> Self {
        let (lo, hi) = gamma_bracket(law.n);
        let steps = ((hi - lo) / GAMMA_GRID_STEP).round() as usize;
        let ts: Vec<f64> = (0..=steps).map(|i| lo + i as f64 * GAMMA_GRID_STEP).collect();
        let g = ts.iter().map(|&t| law.g(t)).collect();
        let sh = ts.iter().map(|&t| law.scaled_h(t)).collect();
        Self { law, ts, g, sh }
    }

    fn minimize(&self, k: usize) -> Achievability {
        let scale = (k as f64).exp2();
        let (best, best_val) = self
            .g
            .iter()
            .zip(&self.sh)
            .map(|(&g, &sh)| 0.5 * (g + (g * g + scale * sh).sqrt()))
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
        let lo = self.ts[best.saturating_sub(1)];
        let hi = self.ts[(best + 1).min(self.ts.len() - 1)];
        let (t, v) = golden_section(|t| self.law.objective(t, k), lo, hi, GAMMA_REFINE_TOL);
        if v < best_val {
            Achievability {
                delta: v,
                log2_gamma: t,
            }
        } else {
            Achievability {
                delta: best_val,
                log2_gamma: self.ts[best],
            }
        }
    }
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    (t, f(t))
}

/// `½ min_γ { g_n(γ) + sqrt(g_n(γ)² + γ/2^{n-k} · h_n(γ)) }`: the leakage
/// for which a binary code with `2^k` messages is guaranteed to exist.
pub fn achievability_delta(n: usize, k: usize, p: f64) -> Result<Achievability> {
    check_p(p)?;
    if k == 0 || k > n {
        return Err(Error::Domain(format!("k must be in [1, {n}], got {k}")));
    }
    let law = ErasureLaw::new(n, p);
    Ok(GammaGrid::new(&law).minimize(k))
}

/// [`achievability_delta`] for every `k = 1..=n`, sharing one `γ` grid.
pub fn achievability_curve(n: usize, p: f64) -> Result<Vec<Achievability>> {
    check_p(p)?;
    let law = ErasureLaw::new(n, p);
    let grid = GammaGrid::new(&law);
    Ok((1..=n).map(|k| grid.minimize(k)).collect())
}

/// Largest `k` whose achievability leakage is at most `delta` (0 if none).
pub fn achievability_max_k(n: usize, p: f64, delta: f64) -> Result<usize> {
    check_p(p)?;
    let law = ErasureLaw::new(n, p);
    let grid = GammaGrid::new(&law);
    // the objective is pointwise nondecreasing in k, so bisect
    let (mut ok, mut bad) = (0usize, n + 1);
    while bad - ok > 1 {
        let mid = (ok + bad) / 2;
        if grid.minimize(mid).delta <= delta {
            ok = mid;
        } else {
            bad = mid;
        }
    }
    Ok(ok)
}

/// Largest `k ∈ [0, n]` with `g_n(2^{n-k}) ≤ delta`.
pub fn converse_max_k(n: usize, p: f64, delta: f64) -> Result<usize> {
    check_p(p)?;
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::Domain(format!("delta must be nonnegative, got {delta}")));
    }
    let law = ErasureLaw::new(n, p);
    Ok((0..=n).rev().find(|&k| law.g((n - k) as f64) <= delta).unwrap_or(0))
}

/// Normal approximation `p - sqrt(p(1-p)/n) Q^{-1}(δ)`. May be negative.
pub fn second_order_rate(n: usize, p: f64, delta: f64) -> Result<f64> {
    check_p(p)?;
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    Ok(p - (p * (1.0 - p) / n as f64).sqrt() * q_inv(delta)?)
}

/// Average TVD of a coset code whose `C0` is an `(n, n-k)` MDS code:
/// `Σ_{e<k} (1 - 2^{-(k-e)}) C(n,e) p^e (1-p)^{n-e}`.
pub fn mds_avg_tvd(n: usize, k: usize, p: f64) -> Result<f64> {
    check_p(p)?;
    if k > n {
        return Err(Error::Domain(format!("k = {k} exceeds n = {n}")));
    }
    let pmf = binomial_pmf(n, p);
    Ok(compensated_sum((0..k).map(|e| {
        -(-((k - e) as f64) * std::f64::consts::LN_2).exp_m1() * pmf[e]
    })))
}

/// A chosen message set and its leakage bound `½ Σ_{j∈A} (1 - p̃_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    /// Sorted 0-based input indices.
    pub set: Vec<usize>,
    pub k: usize,
    pub leakage_bound: f64,
}

/// Adds inputs in the given order while the accumulated TVD stays within
/// `delta`; stops at the first input that would exceed it.
pub fn select_in_order(estimates: &[BitChannelEstimate], order: &[usize], delta: f64) -> Selection {
    let by_index = |i: usize| {
        estimates
            .iter()
            .find(|e| e.index == i)
            .unwrap_or_else(|| panic!("no estimate for input {i}"))
    };
    let mut set = Vec::new();
    let mut acc = CompensatedSum::default();
    for &i in order {
        let mut next = acc;
        next.add(by_index(i).tvd);
        if next.value() > delta {
            break;
        }
        acc = next;
        set.push(i);
    }
    set.sort_unstable();
    Selection {
        k: set.len(),
        set,
        leakage_bound: acc.value(),
    }
}

/// Worst bit-channels first: descending erasure probability, ties by
/// ascending index.
pub fn erasure_order(estimates: &[BitChannelEstimate]) -> Vec<usize> {
    let mut sorted: Vec<&BitChannelEstimate> = estimates.iter().collect();
    sorted.sort_by(|a, b| b.erasure_prob.total_cmp(&a.erasure_prob).then(a.index.cmp(&b.index)));
    sorted.iter().map(|e| e.index).collect()
}

/// Greedy selection of the largest message set whose summed bit-channel
/// TVD stays within `delta`.
pub fn select_message_set(estimates: &[BitChannelEstimate], delta: f64) -> Selection {
    select_in_order(estimates, &erasure_order(estimates), delta)
}

/// Estimates with `p̃ - 3·std_err` (floored at 0) in place of `p̃`.
pub fn conservative(estimates: &[BitChannelEstimate]) -> Vec<BitChannelEstimate> {
    estimates
        .iter()
        .map(|e| BitChannelEstimate::new(e.index, (e.erasure_prob - 3.0 * e.std_err).max(0.0), e.std_err))
        .collect()
}

/// Exact average TVD `d_TV(P_{M,Z}, U_M P_Z)` of a coset code, by
/// enumerating erasure patterns.
///
/// For a pattern with observed positions `S`, the eavesdropper sees
/// `z_S = m G_{A,S} + v G_{A^c,S}`. Every reachable `z_S` is equally likely,
/// a message is consistent with it iff `z_S - m G_{A,S}` lies in the row
/// space of `G_{A^c,S}`, and all consistent messages carry the same number
/// of codewords. With `d = rank G_S - rank G_{A^c,S}`, exactly `2^{k-d}` of
/// the `2^k` messages are consistent with each `z_S`, and summing
/// `|P(m,z) - P(m)P(z)|` over `z_S` and `m` gives `2 w(E) (1 - 2^{-d})`.
pub fn exact_leakage(code: &WiretapCode, p: f64, cap: usize) -> Result<f64> {
    check_p(p)?;
    let n = code.n();
    if n > cap || n >= 63 {
        return Err(Error::EnumerationCap { n, cap });
    }
    let all_rows: Vec<usize> = (0..n).collect();
    let mut acc = CompensatedSum::default();
    let mut observed = Vec::with_capacity(n);
    for pattern in 0u64..(1 << n) {
        observed.clear();
        observed.extend((0..n).filter(|&j| (pattern >> j) & 1 == 0));
        let e = (n - observed.len()) as i32;
        let weight = p.powi(e) * (1.0 - p).powi(n as i32 - e);
        if weight == 0.0 {
            continue;
        }
        let full = code.generator.submatrix(&all_rows, &observed).rank();
        let noise = code.generator.submatrix(code.complement(), &observed).rank();
        let d = full - noise;
        if d > 0 {
            acc.add(weight * (1.0 - (-(d as f64)).exp2()));
        }
    }
    Ok(acc.value())
}

/// Which TVD chain bound the reported code leakage uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeakageBound {
    /// Bit-channels conditioned on only the earlier message inputs,
    /// evaluated for the set chosen under bound 2.
    Bound1,
    /// Bit-channels conditioned on all earlier inputs.
    #[default]
    Bound2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateOptions {
    /// Enumerate erasure patterns instead of sampling when `n ≤ exact_cap`.
    pub exact: bool,
    pub exact_cap: usize,
    /// Use `p̃ - 3·std_err` for selection.
    pub conservative: bool,
    pub bound: LeakageBound,
}

impl Default for RateOptions {
    fn default() -> Self {
        Self {
            exact: false,
            exact_cap: crate::bitchannel::DEFAULT_EXACT_CAP,
            conservative: false,
            bound: LeakageBound::Bound2,
        }
    }
}

/// Rate and leakage figures for one `(n, p, δ)` point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub n: usize,
    pub p: f64,
    pub delta: f64,
    pub k_converse: usize,
    pub k_achiev_rc: usize,
    pub rate_second_order: f64,
    pub k_code: Option<usize>,
    pub leakage_bound: Option<f64>,
    /// Label of the code the `k_code` column refers to.
    pub code: Option<String>,
    /// 0-based message set behind `k_code`.
    pub message_set: Option<Vec<usize>>,
}

impl BoundResult {
    /// Code-independent bounds only.
    pub fn theory(n: usize, p: f64, delta: f64) -> Result<Self> {
        Ok(Self {
            n,
            p,
            delta,
            k_converse: converse_max_k(n, p, delta)?,
            k_achiev_rc: achievability_max_k(n, p, delta)?,
            rate_second_order: second_order_rate(n, p, delta)?,
            k_code: None,
            leakage_bound: None,
            code: None,
            message_set: None,
        })
    }

    pub fn rate_converse(&self) -> f64 {
        self.k_converse as f64 / self.n as f64
    }

    pub fn rate_achiev_rc(&self) -> f64 {
        self.k_achiev_rc as f64 / self.n as f64
    }

    pub fn rate_code(&self) -> Option<f64> {
        self.k_code.map(|k| k as f64 / self.n as f64)
    }
}

/// Metadata describing how [`achievability_max_k`] searched over `γ`.
pub fn gamma_search_description(n: usize) -> String {
    let (lo, hi) = gamma_bracket(n);
    format!("log2(gamma) in [{lo}, {hi}], grid step {GAMMA_GRID_STEP}, golden-section to {GAMMA_REFINE_TOL}")
}

/// Bit-channel erasure probabilities for a generator, sampled or exact.
pub fn bit_channel_estimates(
    generator: &crate::gf2::BitMatrix,
    plan: &ErasureTrialPlan,
    opts: &RateOptions,
) -> Result<Vec<BitChannelEstimate>> {
    if opts.exact && generator.rows() <= opts.exact_cap {
        exact_erasure_probs(generator, plan.p, &plan.conditioning, opts.exact_cap)
    } else {
        mc_erasure_probs(generator, plan)
    }
}

/// Builds the wiretap code for `spec` under leakage budget `delta` and
/// reports it alongside the theoretical bounds.
pub fn code_rate_curve(
    spec: &CodeSpec,
    p: f64,
    delta: f64,
    plan: &ErasureTrialPlan,
    opts: &RateOptions,
) -> Result<BoundResult> {
    let generator = build_generator(spec)?;
    let n = spec.n;
    let plan = ErasureTrialPlan {
        p,
        conditioning: Conditioning::AllPast,
        ..plan.clone()
    };
    let mut estimates = bit_channel_estimates(&generator, &plan, opts)?;
    if opts.conservative {
        estimates = conservative(&estimates);
    }
    let order = match spec.rate_profile {
        RateProfile::Bhattacharyya => erasure_order(&estimates),
        RateProfile::ReedMuller => {
            let mut o = rm_profile_order(&spec.inner_matrix()?);
            o.reverse();
            o
        }
    };
    let selection = select_in_order(&estimates, &order, delta);
    let leakage_bound = match opts.bound {
        LeakageBound::Bound2 => selection.leakage_bound,
        LeakageBound::Bound1 if selection.k == 0 => 0.0,
        LeakageBound::Bound1 => {
            let plan1 = ErasureTrialPlan {
                conditioning: Conditioning::MessagePast(selection.set.clone()),
                ..plan.clone()
            };
            let mut est1 = bit_channel_estimates(&generator, &plan1, opts)?;
            if opts.conservative {
                est1 = conservative(&est1);
            }
            compensated_sum(selection.set.iter().map(|&i| est1[i].tvd))
        }
    };
    let mut result = BoundResult::theory(n, p, delta)?;
    result.k_code = Some(selection.k);
    result.leakage_bound = Some(leakage_bound);
    result.code = Some(code_label(spec));
    result.message_set = Some(selection.set);
    Ok(result)
}

/// Short label such as `mk-pac` or `polar-rm`.
pub fn code_label(spec: &CodeSpec) -> String {
    match spec.rate_profile {
        RateProfile::Bhattacharyya => spec.family.to_string(),
        RateProfile::ReedMuller => format!("{}-rm", spec.family),
    }
}
