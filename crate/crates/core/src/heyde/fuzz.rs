//! Seeded round-trip campaigns for the decomposition theorem.
//!
//! Trial `i` of a campaign with seed `s` draws from a `ChaCha8Rng` seeded with
//! `trial_seed(s, i)`, a SplitMix64 mix of the two numbers, so trials are
//! independent of each other and of scheduling. Each trial samples an odd
//! group, an automorphism `alpha`, a law `omega` on `Ker(I+alpha)` with a
//! nonvanishing transform and a shift `x2`, builds the converse instance and
//! decomposes it again. A second stage samples a random pair, and when it is
//! not conditionally symmetric expects [`Error::HypothesisNotSatisfied`] and a
//! failing Heyde equation.

use num_integer::Integer;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{check_conditional_symmetry, check_heyde_equation, construct_converse, decompose, HeydeInstance, DEFAULT_CF_TOL};
use crate::config::InstanceConfig;
use crate::dist::GroupDistribution;
use crate::error::{Error, Result};
use crate::group::{random_automorphism, Endomorphism, FiniteAbelianGroup, Subgroup};

const MAX_RANK: usize = 3;
const MAX_EXTRA_ATOMS: usize = 3;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ index)
}

pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trial_seed(seed, index))
}

/// All ordered tuples of odd factors `>= 3`, of length at most 3, with
/// product at most `max_order`.
pub fn odd_factor_tuples(max_order: usize) -> Vec<Vec<u64>> {
    fn extend(prefix: &mut Vec<u64>, rest: usize, out: &mut Vec<Vec<u64>>) {
        if !prefix.is_empty() {
            out.push(prefix.clone());
        }
        if prefix.len() == MAX_RANK {
            return;
        }
        for n in (3..=rest).step_by(2) {
            prefix.push(n as u64);
            extend(prefix, rest / n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::new(), max_order, &mut out);
    out
}

fn is_odd_prime_power(n: u64) -> bool {
    let p = (3..=n).step_by(2).find(|p| n % p == 0).unwrap_or(n);
    let mut m = n;
    while m % p == 0 {
        m /= p;
    }
    m == 1
}

/// Sampling space for campaign groups.
#[derive(Debug, Clone)]
pub struct GroupPool {
    tuples: Vec<Vec<u64>>,
    prime_powers: Vec<u64>,
}

impl GroupPool {
    pub fn new(max_order: usize) -> Result<Self> {
        if max_order < 3 {
            return Err(Error::InvalidConfig(format!("max_order {max_order} < 3")));
        }
        let tuples = odd_factor_tuples(max_order);
        let prime_powers = tuples
            .iter()
            .filter(|t| t.len() == 1 && is_odd_prime_power(t[0]))
            .map(|t| t[0])
            .collect();
        Ok(GroupPool { tuples, prime_powers })
    }

    /// A cyclic group of odd prime-power order half the time, otherwise any
    /// tuple from the pool.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> FiniteAbelianGroup {
        let factors = if rng.gen_bool(0.5) {
            vec![*self.prime_powers.choose(rng).expect("3 is always present")]
        } else {
            self.tuples.choose(rng).expect("pool is non-empty").clone()
        };
        FiniteAbelianGroup::new(&factors).expect("pool tuples are valid groups")
    }
}

fn random_unit<R: Rng + ?Sized>(n: u64, rng: &mut R) -> u64 {
    loop {
        let a = rng.gen_range(1..n);
        if a.gcd(&n) == 1 {
            return a;
        }
    }
}

/// Either a random automorphism, or a diagonal one whose entries are `-1`
/// with probability one half and random units otherwise. The diagonal kind
/// makes `Ker(I+alpha)` large far more often.
pub fn sample_automorphism<R: Rng + ?Sized>(g: &FiniteAbelianGroup, rng: &mut R) -> Result<Endomorphism> {
    if rng.gen_bool(0.5) {
        return random_automorphism(g, rng);
    }
    let f = g.factors();
    let matrix: Vec<Vec<i64>> = (0..g.rank())
        .map(|i| {
            let d = if rng.gen_bool(0.5) { -1 } else { random_unit(f[i], rng) as i64 };
            (0..g.rank()).map(|j| if i == j { d } else { 0 }).collect()
        })
        .collect();
    Endomorphism::new(g, &matrix)
}

/// A law on `pool` with one atom of weight above one half, so that the
/// transform stays bounded away from zero by `(W - rest) / (W + rest)`.
pub fn sample_heavy_law<R: Rng + ?Sized>(g: &FiniteAbelianGroup, pool: &[usize], rng: &mut R) -> GroupDistribution {
    let heavy = *pool.choose(rng).expect("pool is non-empty");
    let others: Vec<usize> = pool.iter().copied().filter(|&x| x != heavy).collect();
    let extra = rng.gen_range(0..=MAX_EXTRA_ATOMS.min(others.len()));
    let picked: Vec<usize> = others.choose_multiple(rng, extra).copied().collect();
    let light: Vec<i64> = picked.iter().map(|_| rng.gen_range(1..=5)).collect();
    let rest: i64 = light.iter().sum();
    let w = rest + rng.gen_range(1..=5);
    let total = w + rest;
    let atoms = std::iter::once((heavy, w))
        .chain(picked.into_iter().zip(light))
        .map(|(x, n)| (x, BigRational::new(n.into(), total.into())));
    GroupDistribution::from_indexed(g, atoms).expect("weights sum to one")
}

/// A converse-constructed instance together with the `omega` it came from.
pub fn sample_symmetric<R: Rng + ?Sized>(
    g: &FiniteAbelianGroup,
    rng: &mut R,
) -> Result<(HeydeInstance, GroupDistribution, Subgroup)> {
    let alpha = sample_automorphism(g, rng)?;
    let kernel = alpha.one_plus().kernel();
    let omega = sample_heavy_law(g, kernel.members(), rng);
    let x2 = g.element_at(rng.gen_range(0..g.order()));
    let inst = construct_converse(&omega, &alpha, &x2)?;
    Ok((inst, omega, kernel))
}

/// Reproduction payload of a failed trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialFailure {
    pub index: u64,
    pub trial_seed: u64,
    pub stage: &'static str,
    pub reason: String,
    pub instance: InstanceConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignReport {
    pub schema: &'static str,
    pub seed: u64,
    pub trials: u64,
    pub max_order: usize,
    pub passes: u64,
    /// Trials whose random pair was non-symmetric and was rejected correctly.
    pub negatives_checked: u64,
    pub failures: Vec<TrialFailure>,
}

impl CampaignReport {
    pub fn is_clean(&self) -> bool {
        self.failures.is_empty()
    }
}

struct TrialOutcome {
    negative_checked: bool,
    failure: Option<TrialFailure>,
}

fn round_trip(inst: &HeydeInstance, omega: &GroupDistribution, kernel: &Subgroup) -> std::result::Result<(), String> {
    let d = decompose(inst).map_err(|e| e.to_string())?;
    let g = inst.group();
    if d.kernel != *kernel {
        return Err("kernel differs from Ker(I+alpha)".into());
    }
    if !d.omega.is_supported_in(kernel) {
        return Err("omega leaves Ker(I+alpha)".into());
    }
    if d.omega.shift(&d.x1).map_err(|e| e.to_string())? != *inst.mu1()
        || d.omega.shift(&d.x2).map_err(|e| e.to_string())? != *inst.mu2()
    {
        return Err("reconstruction is not exact".into());
    }
    let base = omega.min_support_idx();
    let shifted = d
        .omega
        .support_indices()
        .into_iter()
        .map(|s| g.sub_idx(s, base))
        .any(|k| kernel.contains_idx(k) && omega.shift_idx(k) == d.omega);
    if !shifted {
        return Err("recovered omega is not a Ker(I+alpha)-shift of the sampled one".into());
    }
    Ok(())
}

fn negative(inst: &HeydeInstance) -> Option<std::result::Result<(), String>> {
    if check_conditional_symmetry(inst) {
        return None;
    }
    Some(match decompose(inst) {
        Err(Error::HypothesisNotSatisfied) if !check_heyde_equation(inst, DEFAULT_CF_TOL) => Ok(()),
        Err(Error::HypothesisNotSatisfied) => Err("Heyde equation holds for a non-symmetric pair".into()),
        Err(e) => Err(format!("expected HypothesisNotSatisfied, got {e}")),
        Ok(_) => Err("non-symmetric pair decomposed".into()),
    })
}

fn run_trial(seed: u64, index: u64, pool: &GroupPool) -> Result<TrialOutcome> {
    let mut rng = trial_rng(seed, index);
    let fail = |stage, reason, inst: &HeydeInstance| TrialFailure {
        index,
        trial_seed: trial_seed(seed, index),
        stage,
        reason,
        instance: InstanceConfig::from_instance(inst),
    };

    let g = pool.sample(&mut rng);
    let (inst, omega, kernel) = sample_symmetric(&g, &mut rng)?;
    if let Err(reason) = round_trip(&inst, &omega, &kernel) {
        return Ok(TrialOutcome {
            negative_checked: false,
            failure: Some(fail("round_trip", reason, &inst)),
        });
    }

    let all: Vec<usize> = (0..g.order()).collect();
    let mu1 = sample_heavy_law(&g, &all, &mut rng);
    let mu2 = sample_heavy_law(&g, &all, &mut rng);
    let inst = HeydeInstance::new(inst.alpha().clone(), mu1, mu2)?;
    let outcome = negative(&inst);
    Ok(TrialOutcome {
        negative_checked: matches!(outcome, Some(Ok(()))),
        failure: match outcome {
            Some(Err(reason)) => Some(fail("negative", reason, &inst)),
            _ => None,
        },
    })
}

/// Runs `trials` independent round-trip trials in parallel. The report is
/// identical for identical arguments.
pub fn fuzz_theorem_a(seed: u64, trials: u64, max_order: usize) -> Result<CampaignReport> {
    let pool = GroupPool::new(max_order)?;
    let outcomes: Vec<Result<TrialOutcome>> = (0..trials).into_par_iter().map(|i| run_trial(seed, i, &pool)).collect();
    let mut report = CampaignReport {
        schema: crate::config::SCHEMA,
        seed,
        trials,
        max_order,
        passes: 0,
        negatives_checked: 0,
        failures: Vec::new(),
    };
    for outcome in outcomes {
        let outcome = outcome?;
        report.negatives_checked += outcome.negative_checked as u64;
        match outcome.failure {
            Some(f) => report.failures.push(f),
            None => report.passes += 1,
        }
    }
    Ok(report)
}
