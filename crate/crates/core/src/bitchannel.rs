//! Erasure probabilities of the eavesdropper's bit-channels.
//!
//! With a BEC eavesdropper every bit-channel is itself a BEC, so each one is
//! summarized by the probability that its input bit cannot be solved for
//! from the unerased codeword positions and the inputs assumed known.
//!
//! Which inputs count as known is fixed by a [`Conditioning`], which orders
//! the inputs; the inputs preceding a target in that order are known.
//!
//! The Monte-Carlo path uses one elimination per channel realization: the
//! unerased generator columns are inserted into a basis keyed by their
//! highest set position (in conditioning order). Input `i` is solvable
//! exactly when some vector in that span has its highest set position at
//! `i`, i.e. when slot `i` of the basis is occupied. The exhaustive path
//! checks each target separately with [`BitMatrix::coordinate_determined`]
//! and serves as its oracle.

use rand::distr::{Bernoulli, Distribution};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{words_for, BitMatrix};
use crate::numerics::CompensatedSum;

/// Default limit on `n` for exhaustive erasure-pattern enumeration.
pub const DEFAULT_EXACT_CAP: usize = 16;

/// Trials per RNG stream. Batch `b` draws from stream `b` of the seeded
/// generator, so results do not depend on how batches are scheduled.
pub const BATCH_TRIALS: usize = 1024;

/// Recorded in output metadata.
pub const RNG_DESCRIPTION: &str = "ChaCha8Rng (rand_chacha 0.9), stream b per 1024-trial batch b";

/// Which inputs are given to the eavesdropper when judging input `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conditioning {
    /// `u_0 … u_{i-1}` are known.
    AllPast,
    /// Only earlier message inputs are known. Indices outside the message
    /// set come after all of it in the order, so for them every message
    /// input and the earlier non-message inputs are known.
    MessagePast(Vec<usize>),
}

impl Conditioning {
    /// Inputs in conditioning order.
    pub fn order(&self, n: usize) -> Result<Vec<usize>> {
        match self {
            Conditioning::AllPast => Ok((0..n).collect()),
            Conditioning::MessagePast(set) => {
                let mut a = set.clone();
                a.sort_unstable();
                a.dedup();
                if a.len() != set.len() {
                    return Err(Error::InvalidSpec("message set has repeated indices".into()));
                }
                if let Some(&bad) = a.iter().find(|&&i| i >= n) {
                    return Err(Error::Index { index: bad, bound: n });
                }
                let rest = (0..n).filter(|i| a.binary_search(i).is_err());
                Ok(a.iter().copied().chain(rest).collect())
            }
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Conditioning::AllPast => "all-past",
            Conditioning::MessagePast(_) => "message-past",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErasureTrialPlan {
    pub p: f64,
    pub trials: usize,
    pub seed: u64,
    pub conditioning: Conditioning,
}

impl ErasureTrialPlan {
    pub fn new(p: f64, trials: usize, seed: u64) -> Self {
        Self {
            p,
            trials,
            seed,
            conditioning: Conditioning::AllPast,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_probability(self.p)?;
        if self.trials == 0 {
            return Err(Error::Domain("at least one trial is required".into()));
        }
        Ok(())
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Domain(format!("erasure probability must be in [0, 1), got {p}")));
    }
    Ok(())
}

/// Erasure probability of one bit-channel and the quantities derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BitChannelEstimate {
    /// 0-based input index.
    pub index: usize,
    pub erasure_prob: f64,
    pub std_err: f64,
    /// Average TVD of a BEC with uniform input: `(1 - erasure_prob) / 2`.
    pub tvd: f64,
    /// Equal to the erasure probability for a BEC.
    pub bhattacharyya: f64,
}

impl BitChannelEstimate {
    pub fn new(index: usize, erasure_prob: f64, std_err: f64) -> Self {
        assert!(
            (0.0..=1.0).contains(&erasure_prob),
            "erasure probability {erasure_prob} outside [0, 1]"
        );
        Self {
            index,
            erasure_prob,
            std_err,
            tvd: (1.0 - erasure_prob) / 2.0,
            bhattacharyya: erasure_prob,
        }
    }
}

/// Erasure mask for `n` positions, each erased independently with
/// probability `p`.
fn sample_mask<R: Rng + ?Sized>(bern: &Bernoulli, rng: &mut R, mask: &mut [bool]) {
    for m in mask.iter_mut() {
        *m = bern.sample(rng);
    }
}

/// Sorted indices of the erased positions of one channel realization.
pub fn sample_erasure_pattern<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Vec<usize>> {
    check_probability(p)?;
    let bern = Bernoulli::new(p).map_err(|e| Error::Domain(e.to_string()))?;
    let mut mask = vec![false; n];
    sample_mask(&bern, rng, &mut mask);
    Ok(mask.iter().enumerate().filter(|(_, &e)| e).map(|(i, _)| i).collect())
}

/// Whether input `target` can be solved for when the positions in `erased`
/// are erased and the inputs in `known` are given.
pub fn bit_determined(generator: &BitMatrix, erased: &[usize], known: &[usize], target: usize) -> Result<bool> {
    let n = generator.rows();
    if let Some(&bad) = erased.iter().chain(known).chain([&target]).find(|&&i| i >= n) {
        return Err(Error::Index { index: bad, bound: n });
    }
    if known.contains(&target) {
        return Err(Error::Domain(format!("target {target} is among the known inputs")));
    }
    let mut is_known = vec![false; n];
    for &k in known {
        is_known[k] = true;
    }
    let mut is_erased = vec![false; generator.cols()];
    for &e in erased {
        is_erased[e] = true;
    }
    let unknown: Vec<usize> = (0..n).filter(|&i| !is_known[i]).collect();
    let observed: Vec<usize> = (0..generator.cols()).filter(|&j| !is_erased[j]).collect();
    let row = unknown.binary_search(&target).expect("target is unknown");
    generator.submatrix(&unknown, &observed).coordinate_determined(row)
}

/// Generator columns re-indexed by conditioning order, ready for repeated
/// basis insertion.
struct SolvabilityEngine {
    n: usize,
    words: usize,
    columns: Vec<u64>,
}

struct EngineScratch {
    basis: Vec<u64>,
    occupied: Vec<bool>,
    v: Vec<u64>,
}

impl SolvabilityEngine {
    fn new(generator: &BitMatrix, order: &[usize]) -> Self {
        let n = generator.rows();
        let words = words_for(n);
        let mut columns = vec![0u64; generator.cols() * words];
        for (pos, &row) in order.iter().enumerate() {
            for j in 0..generator.cols() {
                if generator.get(row, j) {
                    columns[j * words + pos / 64] |= 1 << (pos % 64);
                }
            }
        }
        Self { n, words, columns }
    }

    fn scratch(&self) -> EngineScratch {
        EngineScratch {
            basis: vec![0; self.n * self.words],
            occupied: vec![false; self.n],
            v: vec![0; self.words],
        }
    }

    /// After the call `scratch.occupied[pos]` tells whether the input at
    /// order position `pos` is solvable.
    fn run(&self, erased: &[bool], s: &mut EngineScratch) {
        s.occupied.iter_mut().for_each(|o| *o = false);
        let w = self.words;
        for (j, _) in erased.iter().enumerate().filter(|(_, &e)| !e) {
            s.v.copy_from_slice(&self.columns[j * w..(j + 1) * w]);
            while let Some(top) = (0..w)
                .rev()
                .find(|&k| s.v[k] != 0)
                .map(|k| k * 64 + 63 - s.v[k].leading_zeros() as usize)
            {
                let slot = &mut s.basis[top * w..(top + 1) * w];
                if s.occupied[top] {
                    for (a, b) in s.v.iter_mut().zip(slot.iter()) {
                        *a ^= *b;
                    }
                } else {
                    slot.copy_from_slice(&s.v);
                    s.occupied[top] = true;
                    break;
                }
            }
        }
    }
}

/// Monte-Carlo estimate of every bit-channel's erasure probability. All
/// targets share each trial's erasure pattern.
pub fn mc_erasure_probs(generator: &BitMatrix, plan: &ErasureTrialPlan) -> Result<Vec<BitChannelEstimate>> {
    plan.validate()?;
    let n = generator.rows();
    let order = plan.conditioning.order(n)?;
    let engine = SolvabilityEngine::new(generator, &order);
    let bern = Bernoulli::new(plan.p).map_err(|e| Error::Domain(e.to_string()))?;
    let batches = plan.trials.div_ceil(BATCH_TRIALS);

    let failures = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
            rng.set_stream(b as u64);
            let trials = BATCH_TRIALS.min(plan.trials - b * BATCH_TRIALS);
            let mut scratch = engine.scratch();
            let mut mask = vec![false; generator.cols()];
            let mut counts = vec![0u64; n];
            for _ in 0..trials {
                sample_mask(&bern, &mut rng, &mut mask);
                engine.run(&mask, &mut scratch);
                for (c, &ok) in counts.iter_mut().zip(&scratch.occupied) {
                    *c += u64::from(!ok);
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; n],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let t = plan.trials as f64;
    let mut out: Vec<BitChannelEstimate> = order
        .iter()
        .enumerate()
        .map(|(pos, &i)| {
            let q = failures[pos] as f64 / t;
            BitChannelEstimate::new(i, q, (q * (1.0 - q) / t).sqrt())
        })
        .collect();
    out.sort_by_key(|e| e.index);
    Ok(out)
}

/// Exact erasure probabilities by enumerating all `2^n` erasure patterns.
pub fn exact_erasure_probs(
    generator: &BitMatrix,
    p: f64,
    conditioning: &Conditioning,
    cap: usize,
) -> Result<Vec<BitChannelEstimate>> {
    check_probability(p)?;
    let n = generator.rows();
    if n > cap || n >= 63 {
        return Err(Error::EnumerationCap { n, cap });
    }
    let order = conditioning.order(n)?;
    let known_before: Vec<Vec<usize>> = (0..n).map(|pos| order[..pos].to_vec()).collect();
    let mut acc = vec![CompensatedSum::default(); n];
    let mut erased = Vec::with_capacity(n);
    for pattern in 0u64..(1 << n) {
        erased.clear();
        erased.extend((0..n).filter(|&j| (pattern >> j) & 1 == 1));
        let e = erased.len() as i32;
        let weight = p.powi(e) * (1.0 - p).powi(n as i32 - e);
        if weight == 0.0 {
            continue;
        }
        for (pos, &target) in order.iter().enumerate() {
            if !bit_determined(generator, &erased, &known_before[pos], target)? {
                acc[target].add(weight);
            }
        }
    }
    Ok(acc
        .iter()
        .enumerate()
        .map(|(i, a)| BitChannelEstimate::new(i, a.value().clamp(0.0, 1.0), 0.0))
        .collect())
}

/// BEC polarization recursion for `G2^{⊗s}`: each stage maps `q` to
/// `(1 - (1 - q)^2, q^2)`, most significant index bit first.
pub fn polar_bec_recursion(p: f64, s: usize) -> Vec<f64> {
    let mut z = vec![p];
    for _ in 0..s {
        z = z.iter().flat_map(|&q| [1.0 - (1.0 - q) * (1.0 - q), q * q]).collect();
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{build_generator, CodeSpec, Family};

    fn g2() -> BitMatrix {
        "10\n11".parse().unwrap()
    }

    fn polar(s: usize) -> BitMatrix {
        build_generator(&CodeSpec::polar(s)).unwrap()
    }

    fn probs(est: &[BitChannelEstimate]) -> Vec<f64> {
        est.iter().map(|e| e.erasure_prob).collect()
    }

    #[test]
    fn no_erasures_at_p_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert!(sample_erasure_pattern(50, 0.0, &mut rng).unwrap().is_empty());
        }
        assert!(sample_erasure_pattern(5, 1.0, &mut rng).is_err());
    }

    #[test]
    fn erased_fraction_concentrates() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let e = sample_erasure_pattern(n, 0.5, &mut rng).unwrap().len() as f64;
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((e - 0.5 * n as f64).abs() <= 5.0 * sigma);
    }

    #[test]
    fn patterns_are_reproducible() {
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..5)
                .map(|_| sample_erasure_pattern(40, 0.3, &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(11), draw(11));
        assert_ne!(draw(11), draw(12));
    }

    #[test]
    fn bit_determined_examples() {
        let g = polar(3);
        for t in 0..8 {
            assert!(bit_determined(&g, &[], &[], t).unwrap());
            let all: Vec<usize> = (0..8).collect();
            assert!(!bit_determined(&g, &all, &[], t).unwrap());
        }
        // x2 = u2 observed
        assert!(bit_determined(&g2(), &[0], &[], 1).unwrap());
        // only x1 = u1 + u2 observed, u1 unknown
        assert!(!bit_determined(&g2(), &[1], &[], 1).unwrap());
        assert!(bit_determined(&g2(), &[1], &[0], 1).unwrap());
        assert!(bit_determined(&g2(), &[0], &[0], 0).is_err());
        assert!(matches!(bit_determined(&g2(), &[2], &[], 0), Err(Error::Index { .. })));
    }

    #[test]
    fn engine_agrees_with_direct_test() {
        let specs = [
            CodeSpec::polar(3),
            CodeSpec::new(Family::MkPac, &["G8"], vec![1, 1, 0, 1]).unwrap(),
            CodeSpec::new(Family::MkPac, &["G2", "G8"], vec![1, 0, 1]).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for spec in specs {
            let g = build_generator(&spec).unwrap();
            let n = g.rows();
            let msg: Vec<usize> = (0..n).filter(|i| i % 3 != 1).collect();
            for cond in [Conditioning::AllPast, Conditioning::MessagePast(msg.clone())] {
                let order = cond.order(n).unwrap();
                let engine = SolvabilityEngine::new(&g, &order);
                let mut scratch = engine.scratch();
                for _ in 0..200 {
                    let erased = sample_erasure_pattern(n, 0.45, &mut rng).unwrap();
                    let mut mask = vec![false; n];
                    erased.iter().for_each(|&e| mask[e] = true);
                    engine.run(&mask, &mut scratch);
                    for (pos, &t) in order.iter().enumerate() {
                        let direct = bit_determined(&g, &erased, &order[..pos], t).unwrap();
                        assert_eq!(scratch.occupied[pos], direct);
                    }
                }
            }
        }
    }

    #[test]
    fn exact_g2() {
        let e = exact_erasure_probs(&g2(), 0.4, &Conditioning::AllPast, DEFAULT_EXACT_CAP).unwrap();
        assert!((e[0].erasure_prob - 0.64).abs() < 1e-12);
        assert!((e[1].erasure_prob - 0.16).abs() < 1e-12);
        assert!((e[0].tvd - 0.18).abs() < 1e-12);
        assert_eq!(e[1].bhattacharyya, e[1].erasure_prob);
        assert_eq!(e[0].std_err, 0.0);
    }

    #[test]
    fn exact_identity_is_uncoded() {
        for p in [0.0, 0.2, 0.7] {
            let e = exact_erasure_probs(&BitMatrix::identity(6), p, &Conditioning::AllPast, 16).unwrap();
            assert!(e.iter().all(|x| (x.erasure_prob - p).abs() < 1e-12));
        }
    }

    #[test]
    fn exact_polar_matches_recursion() {
        let exact = exact_erasure_probs(&polar(3), 0.4, &Conditioning::AllPast, 16).unwrap();
        for (a, b) in probs(&exact).iter().zip(polar_bec_recursion(0.4, 3)) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn exact_cap() {
        assert!(matches!(
            exact_erasure_probs(&polar(3), 0.4, &Conditioning::AllPast, 7),
            Err(Error::EnumerationCap { n: 8, cap: 7 })
        ));
    }

    #[test]
    fn recursion_small() {
        assert_eq!(polar_bec_recursion(0.3, 0), vec![0.3]);
        let z = polar_bec_recursion(0.4, 1);
        assert!((z[0] - 0.64).abs() < 1e-15 && (z[1] - 0.16).abs() < 1e-15);
    }

    #[test]
    fn exact_conserves_total_erasure() {
        let gens = [
            polar(3),
            build_generator(&CodeSpec::new(Family::MkPac, &["G8"], vec![1, 0, 1, 1]).unwrap()).unwrap(),
            build_generator(&CodeSpec::new(Family::MkPac, &["G2", "G2", "G2"], vec![1, 1]).unwrap()).unwrap(),
        ];
        for g in gens {
            for p in [0.1, 0.4, 0.8] {
                let s: f64 = probs(&exact_erasure_probs(&g, p, &Conditioning::AllPast, 16).unwrap())
                    .iter()
                    .sum();
                assert!((s - g.rows() as f64 * p).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn exact_monotone_in_p() {
        let g = build_generator(&CodeSpec::new(Family::MkPac, &["G8"], vec![1, 1, 0, 1]).unwrap()).unwrap();
        let grid: Vec<Vec<f64>> = (0..10)
            .map(|i| probs(&exact_erasure_probs(&g, i as f64 / 10.0, &Conditioning::AllPast, 16).unwrap()))
            .collect();
        for w in grid.windows(2) {
            for (a, b) in w[0].iter().zip(&w[1]) {
                assert!(b + 1e-12 >= *a);
            }
        }
    }

    #[test]
    fn mc_g2_near_exact() {
        let est = mc_erasure_probs(&g2(), &ErasureTrialPlan::new(0.4, 200_000, 5)).unwrap();
        for (e, exact) in est.iter().zip([0.64, 0.16]) {
            assert!((e.erasure_prob - exact).abs() <= 3.0 * e.std_err);
        }
    }

    #[test]
    fn mc_trivial_plans() {
        let g = polar(4);
        let est = mc_erasure_probs(&g, &ErasureTrialPlan::new(0.0, 500, 1)).unwrap();
        assert!(est.iter().all(|e| e.erasure_prob == 0.0 && e.std_err == 0.0));
        let one = mc_erasure_probs(&g, &ErasureTrialPlan::new(0.5, 1, 9)).unwrap();
        assert!(one.iter().all(|e| e.erasure_prob == 0.0 || e.erasure_prob == 1.0));
        assert_eq!(one, mc_erasure_probs(&g, &ErasureTrialPlan::new(0.5, 1, 9)).unwrap());
        assert!(mc_erasure_probs(&g, &ErasureTrialPlan::new(0.5, 0, 9)).is_err());
        assert!(mc_erasure_probs(&g, &ErasureTrialPlan::new(1.0, 10, 9)).is_err());
    }

    #[test]
    fn mc_independent_of_thread_count() {
        let g = build_generator(&CodeSpec::paper_mk_pac(32).unwrap()).unwrap();
        let plan = ErasureTrialPlan::new(0.4, 5000, 42);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mc_erasure_probs(&g, &plan).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn message_past_order() {
        let c = Conditioning::MessagePast(vec![5, 1]);
        assert_eq!(c.order(6).unwrap(), vec![1, 5, 0, 2, 3, 4]);
        assert!(Conditioning::MessagePast(vec![6]).order(6).is_err());
        assert!(Conditioning::MessagePast(vec![1, 1]).order(6).is_err());
    }

    #[test]
    fn message_past_mc_matches_exact() {
        let g = build_generator(&CodeSpec::new(Family::MkPac, &["G8"], vec![1, 1, 0, 1]).unwrap()).unwrap();
        let cond = Conditioning::MessagePast(vec![0, 1, 2, 4]);
        let exact = exact_erasure_probs(&g, 0.4, &cond, 16).unwrap();
        let mut plan = ErasureTrialPlan::new(0.4, 100_000, 17);
        plan.conditioning = cond;
        let mc = mc_erasure_probs(&g, &plan).unwrap();
        for (m, e) in mc.iter().zip(&exact) {
            assert!((m.erasure_prob - e.erasure_prob).abs() <= 4.0 * m.std_err + 1e-12);
        }
    }
}
