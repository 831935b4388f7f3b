//! Exhaustive ground truth: the adversary's worst removal, robust values,
//! and optimal sequences with and without removal.
//!
//! All enumerations are deterministic. Minimizers and maximizers are the
//! first in enumeration order among exact ties. When symmetry reduction is
//! on, optimal sequences are searched among canonical representatives of the
//! objective's interchangeable classes, which leaves optimal values intact.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::function::SequenceObjective;
use crate::properties::Budget;
use crate::sequence::{ElementSet, Sequence, SequenceEnumerator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RemovalMode {
    /// Any set of at most `τ` elements.
    Arbitrary,
    /// A block of at most `τ` consecutive positions.
    Contiguous,
}

impl RemovalMode {
    pub fn name(self) -> &'static str {
        match self {
            RemovalMode::Arbitrary => "arbitrary",
            RemovalMode::Contiguous => "contiguous",
        }
    }
}

impl fmt::Display for RemovalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RemovalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "arbitrary" => Ok(RemovalMode::Arbitrary),
            "contiguous" => Ok(RemovalMode::Contiguous),
            _ => Err(Error::InvalidInput(format!(
                "unknown removal mode '{s}' (expected arbitrary or contiguous)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RemovalModel {
    pub tau: usize,
    pub mode: RemovalMode,
}

impl RemovalModel {
    pub fn arbitrary(tau: usize) -> Self {
        RemovalModel {
            tau,
            mode: RemovalMode::Arbitrary,
        }
    }

    pub fn contiguous(tau: usize) -> Self {
        RemovalModel {
            tau,
            mode: RemovalMode::Contiguous,
        }
    }

    /// Number of removal candidates against a sequence of length `n`.
    pub fn candidates(&self, n: usize) -> u128 {
        let t = self.tau.min(n);
        match self.mode {
            RemovalMode::Arbitrary => (0..=t).map(|j| binomial(n, j)).sum(),
            RemovalMode::Contiguous => 1 + (1..=t).map(|len| (n - len + 1) as u128).sum::<u128>(),
        }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RobustEvaluation {
    pub attacked: Sequence,
    /// The adversary's choice `Z_τ(S)`.
    pub removed: ElementSet,
    /// `g_τ(S) = h(S - Z_τ(S))`.
    pub value: f64,
}

impl RobustEvaluation {
    pub fn remaining(&self) -> Sequence {
        self.attacked.remove_set(self.removed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    pub budget: Budget,
    /// Search canonical representatives only.
    pub symmetry: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            budget: Budget::default(),
            symmetry: true,
        }
    }
}

/// Visits removal sets in enumeration order. Arbitrary mode: by size, then
/// lexicographically by positions. Contiguous mode: the empty block, then
/// blocks by length and start.
fn for_each_removal(s: &Sequence, model: RemovalModel, mut visit: impl FnMut(ElementSet) -> Result<()>) -> Result<()> {
    let n = s.len();
    let t = model.tau.min(n);
    let items = s.items();
    visit(ElementSet::EMPTY)?;
    match model.mode {
        RemovalMode::Arbitrary => {
            for size in 1..=t {
                let mut pos: Vec<usize> = (0..size).collect();
                loop {
                    visit(pos.iter().map(|&p| items[p]).collect())?;
                    let Some(i) = (0..size).rev().find(|&i| pos[i] < n - size + i) else {
                        break;
                    };
                    pos[i] += 1;
                    for j in i + 1..size {
                        pos[j] = pos[j - 1] + 1;
                    }
                }
            }
        }
        RemovalMode::Contiguous => {
            for len in 1..=t {
                for start in 0..=n - len {
                    visit(items[start..start + len].iter().copied().collect())?;
                }
            }
        }
    }
    Ok(())
}

fn check_removal_budget(s: &Sequence, model: RemovalModel, budget: &Budget) -> Result<()> {
    let needed = model.candidates(s.len());
    if needed > budget.subsets {
        return Err(Error::TooLarge {
            what: "worst-case removal (candidate subsets)",
            needed,
            budget: budget.subsets,
        });
    }
    Ok(())
}

fn worst_removal_unchecked<F: SequenceObjective + ?Sized>(f: &F, s: &Sequence, model: RemovalModel) -> Result<RobustEvaluation> {
    let mut best: Option<(ElementSet, f64)> = None;
    for_each_removal(s, model, |set| {
        let v = f.eval(&s.remove_set(set))?;
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((set, v));
        }
        Ok(())
    })?;
    let (removed, value) = best.expect("the empty removal is always visited");
    Ok(RobustEvaluation {
        attacked: s.clone(),
        removed,
        value,
    })
}

/// Minimizes `h(s - R)` over the removal sets `R` allowed by `model`,
/// including the empty one.
pub fn worst_removal<F: SequenceObjective + ?Sized>(
    f: &F,
    s: &Sequence,
    model: RemovalModel,
    budget: &Budget,
) -> Result<RobustEvaluation> {
    check_removal_budget(s, model, budget)?;
    worst_removal_unchecked(f, s, model)
}

/// `g_τ(s)`.
pub fn robust_value<F: SequenceObjective + ?Sized>(f: &F, s: &Sequence, model: RemovalModel, budget: &Budget) -> Result<f64> {
    Ok(worst_removal(f, s, model, budget)?.value)
}

/// All candidate sequences over `allowed` of length at most `k`, in
/// enumeration order.
fn candidates<F: SequenceObjective + ?Sized>(
    f: &F,
    k: usize,
    allowed: ElementSet,
    config: &OracleConfig,
) -> Result<Vec<Sequence>> {
    let classes: Vec<Vec<usize>> = if config.symmetry {
        f.interchangeable()
            .into_iter()
            .map(|c| c.into_iter().filter(|&e| allowed.contains(e)).collect::<Vec<_>>())
            .filter(|c| !c.is_empty())
            .collect()
    } else {
        allowed.iter().map(|e| vec![e]).collect()
    };
    let enumerator = SequenceEnumerator::new(classes, k.min(allowed.len()));
    let needed = enumerator.count_total();
    if needed > config.budget.sequences {
        return Err(Error::TooLarge {
            what: "optimal-sequence search (sequences)",
            needed,
            budget: config.budget.sequences,
        });
    }
    Ok(enumerator.collect())
}

/// First maximizer in enumeration order.
fn argmax(values: Vec<(usize, f64)>) -> Option<(usize, f64)> {
    values.into_par_iter().reduce_with(|a, b| {
        if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
            b
        } else {
            a
        }
    })
}

/// `S*(V', k, 0)`: the best sequence of length at most `k` over the elements
/// of `allowed`.
pub fn brute_opt_nonrobust<F: SequenceObjective + ?Sized>(
    f: &F,
    k: usize,
    allowed: ElementSet,
    config: &OracleConfig,
) -> Result<(Sequence, f64)> {
    check_allowed(f, allowed)?;
    let seqs = candidates(f, k, allowed, config)?;
    let values = seqs
        .par_iter()
        .enumerate()
        .map(|(i, s)| f.eval(s).map(|v| (i, v)))
        .collect::<Result<Vec<_>>>()?;
    let (i, v) = argmax(values).expect("the empty sequence is always a candidate");
    Ok((seqs[i].clone(), v))
}

/// `S*(V, k, τ)`: the sequence of length at most `k` with the largest robust
/// value under `model`.
pub fn brute_opt_robust<F: SequenceObjective + ?Sized>(
    f: &F,
    k: usize,
    model: RemovalModel,
    config: &OracleConfig,
) -> Result<(Sequence, f64)> {
    let all = f.ground_set().all();
    let seqs = candidates(f, k, all, config)?;
    if let Some(longest) = seqs.iter().max_by_key(|s| s.len()) {
        check_removal_budget(longest, model, &config.budget)?;
    }
    let values = seqs
        .par_iter()
        .enumerate()
        .map(|(i, s)| worst_removal_unchecked(f, s, model).map(|r| (i, r.value)))
        .collect::<Result<Vec<_>>>()?;
    let (i, v) = argmax(values).expect("the empty sequence is always a candidate");
    Ok((seqs[i].clone(), v))
}

fn check_allowed<F: SequenceObjective + ?Sized>(f: &F, allowed: ElementSet) -> Result<()> {
    if !allowed.is_subset(f.ground_set().all()) {
        return Err(Error::InvalidInput("allowed elements lie outside the ground set".into()));
    }
    Ok(())
}

/// For every removal set `V'` with `|V'| ≤ τ`, the optimum `h(S*(V \ V',
/// k - τ, 0))`. Under forward monotonicity each of these is an upper bound
/// on the robust optimum under arbitrary removal.
pub fn restricted_optima<F: SequenceObjective + ?Sized>(
    f: &F,
    k: usize,
    tau: usize,
    config: &OracleConfig,
) -> Result<Vec<(ElementSet, f64)>> {
    if tau > k {
        return Err(Error::InvalidInput(format!("tau = {tau} exceeds k = {k}")));
    }
    let all = f.ground_set().all();
    let ground = Sequence::from_vec_unchecked(all.iter().collect());
    let mut removals = Vec::new();
    for_each_removal(&ground, RemovalModel::arbitrary(tau), |set| {
        removals.push(set);
        Ok(())
    })?;
    let needed = removals.len() as u128;
    if needed > config.budget.subsets {
        return Err(Error::TooLarge {
            what: "restricted optima (removal sets)",
            needed,
            budget: config.budget.subsets,
        });
    }
    removals
        .into_iter()
        .map(|set| Ok((set, brute_opt_nonrobust(f, k - tau, all.difference(set), config)?.1)))
        .collect()
}
