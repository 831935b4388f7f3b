//! Exhaustive checks of monotonicity and diminishing-returns axioms, and the
//! tight approximate constants α, μ₁, μ₂, μ₃.
//!
//! Every check ranges over all sequences whose combined element set has at
//! most `max_len` elements. With `max_len = V` the scan covers all of
//! `H(V)` and the report is marked complete; exact assumptions are only ever
//! certified from a complete report.
//!
//! Ratio constants are the minimum of `lhs / rhs` over the constraint set,
//! clipped to 1. A pair only counts as a violation when `lhs < rhs - TOL`,
//! and pairs whose `rhs` is at most `TOL` are skipped, so a constant is
//! exactly 1 whenever the exact axiom holds within `TOL`.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::function::SequenceObjective;
use crate::sequence::{sequence_count, Sequence, SequenceIndex};

/// Absolute tolerance on every comparison.
pub const TOL: f64 = 1e-9;

/// Limits on exhaustive work.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Sequences a single enumeration may visit (oracles).
    pub sequences: u128,
    /// Removal candidates a single worst-case search may visit.
    pub subsets: u128,
    /// Sequence pairs a property scan may index (`N²` for `N` sequences).
    pub pairs: u128,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            sequences: 200_000,
            subsets: 100_000,
            pairs: 4_000_000,
        }
    }
}

/// The two sides of a binding or violated inequality.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub s1: Sequence,
    pub s2: Sequence,
    pub s3: Option<Sequence>,
    pub lhs: f64,
    pub rhs: f64,
}

impl Witness {
    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }
}

/// A measured constant in `[0, 1]` with the pair attaining it, if any pair
/// was a violation of the exact axiom.
#[derive(Clone, Debug, PartialEq)]
pub struct Constant {
    pub value: f64,
    pub witness: Option<Witness>,
}

impl Constant {
    pub fn is_exact(&self) -> bool {
        self.value == 1.0
    }

    /// The approximate axioms need a constant in `(0, 1]`.
    pub fn is_positive(&self) -> bool {
        self.value > 0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Assumption {
    /// Forward-monotone, backward-monotone, sequence-submodular.
    A1,
    /// Forward-monotone, backward-monotone, general-sequence-submodular.
    A2,
    /// Forward-monotone, backward-monotone, μ₁- and μ₂-approximate.
    A3,
    /// Forward-monotone, α-backward-monotone, μ₁- and μ₂-approximate.
    A4,
    /// Forward-monotone, α-backward-monotone, μ₁- and μ₃-approximate.
    A5,
    /// Forward-monotone, α-backward-monotone, μ₁-element-sequence-submodular.
    A6,
    /// Forward-monotone, backward-monotone, μ₁-element-sequence-submodular.
    A7,
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = *self as u8 + 1;
        write!(f, "A{n}")
    }
}

/// Constants and exact verdicts for one function.
#[derive(Clone, Debug, PartialEq)]
pub struct PropertyReport {
    pub max_len: usize,
    /// True when the scan covered every sequence of the ground set.
    pub complete: bool,
    pub forward_monotone: bool,
    pub forward_witness: Option<Witness>,
    /// `None` when forward monotonicity fails.
    pub alpha: Option<Constant>,
    pub mu1: Option<Constant>,
    pub mu2: Option<Constant>,
    pub mu3: Option<Constant>,
}

impl PropertyReport {
    fn exact(c: &Option<Constant>) -> bool {
        c.as_ref().is_some_and(Constant::is_exact)
    }

    fn value(c: &Option<Constant>) -> Option<f64> {
        c.as_ref().map(|c| c.value)
    }

    pub fn alpha_value(&self) -> Option<f64> {
        Self::value(&self.alpha)
    }

    pub fn mu1_value(&self) -> Option<f64> {
        Self::value(&self.mu1)
    }

    pub fn mu2_value(&self) -> Option<f64> {
        Self::value(&self.mu2)
    }

    pub fn mu3_value(&self) -> Option<f64> {
        Self::value(&self.mu3)
    }

    pub fn backward_monotone(&self) -> bool {
        Self::exact(&self.alpha)
    }

    pub fn element_sequence_submodular(&self) -> bool {
        Self::exact(&self.mu1)
    }

    pub fn sequence_submodular(&self) -> bool {
        Self::exact(&self.mu2)
    }

    pub fn general_sequence_submodular(&self) -> bool {
        Self::exact(&self.mu3)
    }

    /// Assumptions certified by this report. Exact backward monotonicity is
    /// only taken from a complete scan; the parametric assumptions hold with
    /// the measured constants whenever those are positive.
    pub fn assumptions(&self) -> Vec<Assumption> {
        let mut out = Vec::new();
        if !self.forward_monotone {
            return out;
        }
        let pos = |c: &Option<Constant>| c.as_ref().is_some_and(Constant::is_positive);
        let bwd = self.complete && self.backward_monotone();
        if bwd && self.sequence_submodular() {
            out.push(Assumption::A1);
        }
        if bwd && self.general_sequence_submodular() {
            out.push(Assumption::A2);
        }
        let alpha = pos(&self.alpha);
        let mu1 = pos(&self.mu1);
        if bwd && mu1 && pos(&self.mu2) {
            out.push(Assumption::A3);
        }
        if alpha && mu1 && pos(&self.mu2) {
            out.push(Assumption::A4);
        }
        if alpha && mu1 && pos(&self.mu3) {
            out.push(Assumption::A5);
        }
        if alpha && mu1 {
            out.push(Assumption::A6);
        }
        if bwd && mu1 {
            out.push(Assumption::A7);
        }
        out
    }

    pub fn holds(&self, a: Assumption) -> bool {
        self.assumptions().contains(&a)
    }
}

/// Sequences up to `max_len` with their values, indexed for lookups.
pub struct ValueTable {
    index: SequenceIndex,
    values: Vec<f64>,
}

impl ValueTable {
    pub fn new<F: SequenceObjective + ?Sized>(f: &F, max_len: usize, budget: &Budget) -> Result<Self> {
        let gs = f.ground_set();
        if max_len > gs.len() {
            return Err(Error::InvalidInput(format!(
                "max_len {max_len} exceeds ground set size {}",
                gs.len()
            )));
        }
        let n = sequence_count(gs.len(), max_len);
        let pairs = n.saturating_mul(n);
        if pairs > budget.pairs {
            return Err(Error::TooLarge {
                what: "property scan (sequence pairs)",
                needed: pairs,
                budget: budget.pairs,
            });
        }
        let index = SequenceIndex::new(gs, max_len)?;
        let values = index
            .sequences()
            .par_iter()
            .map(|s| f.eval(s))
            .collect::<Result<Vec<_>>>()?;
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < -TOL) {
            return Err(Error::InvalidInput(format!(
                "h({}) = {v} is not a nonnegative value",
                gs.format(index.get(i as u32))
            )));
        }
        Ok(ValueTable { index, values })
    }

    pub fn index(&self) -> &SequenceIndex {
        &self.index
    }

    pub fn value(&self, id: u32) -> f64 {
        self.values[id as usize]
    }

    fn seq(&self, id: u32) -> Sequence {
        self.index.get(id).clone()
    }
}

/// Candidate (ratio, enumeration key, witness ids) folded to the first
/// minimizer in enumeration order.
#[derive(Clone, Copy, Debug)]
struct Best {
    ratio: f64,
    key: (u32, u32, u32),
    lhs: f64,
    rhs: f64,
}

fn better(a: Option<Best>, b: Option<Best>) -> Option<Best> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => {
            if a.ratio < b.ratio || (a.ratio == b.ratio && a.key < b.key) {
                Some(a)
            } else {
                Some(b)
            }
        }
    }
}

fn check_marginal(lhs: f64, rhs: f64) -> Result<()> {
    if lhs < -TOL || rhs < -TOL {
        return Err(Error::NotApplicable(
            "negative appending marginal: the function is not forward-monotone".into(),
        ));
    }
    Ok(())
}

/// Considers one pair; only exact-axiom violations compete for the minimum.
fn candidate(lhs: f64, rhs: f64, key: (u32, u32, u32)) -> Option<Best> {
    if rhs > TOL && lhs < rhs - TOL {
        Some(Best {
            ratio: (lhs / rhs).max(0.0),
            key,
            lhs,
            rhs,
        })
    } else {
        None
    }
}

/// `h(S1 ⊕ S2) ≥ h(S1)` for all pairs. Because `S1 ⊕ S2` is exactly an
/// extension of `S1`, the scan walks every sequence and each of its
/// prefixes; the first violation in enumeration order is the witness.
pub fn check_forward_monotone_in(table: &ValueTable) -> (bool, Option<Witness>) {
    let idx = table.index();
    for (id, s) in idx.sequences().iter().enumerate() {
        let whole = table.value(id as u32);
        for (j, pid) in idx.prefixes(id as u32).into_iter().enumerate().take(s.len()) {
            let before = table.value(pid);
            if whole < before - TOL {
                let s1 = s.prefix(j);
                let s2 = Sequence::from_vec_unchecked(s.items()[j..].to_vec());
                return (
                    false,
                    Some(Witness {
                        s1,
                        s2,
                        s3: None,
                        lhs: whole,
                        rhs: before,
                    }),
                );
            }
        }
    }
    (true, None)
}

/// α: `min h(S1 ⊕ S2) / h(S2)` over all pairs, clipped to 1.
pub fn backward_constant_in(table: &ValueTable) -> Constant {
    let idx = table.index();
    let n = idx.len() as u32;
    let best = (0..n)
        .into_par_iter()
        .map(|s2| {
            let rhs = table.value(s2);
            let mut best = None;
            if rhs > TOL {
                for s1 in 0..n {
                    let c = idx.concat(s1, s2);
                    if c != SequenceIndex::NONE {
                        best = better(best, candidate(table.value(c), rhs, (s2, s1, 0)));
                    }
                }
            }
            best
        })
        .reduce(|| None, better);
    finish(table, best, |b| (b.key.1, b.key.0, None))
}

/// μ₁: `min h((v)|S1) / h((v)|S2)` over elements `v` and prefix pairs
/// `S1 ⪯ S2`.
pub fn mu1_constant_in(table: &ValueTable) -> Result<Constant> {
    let idx = table.index();
    let n = idx.len() as u32;
    let singles: Vec<u32> = (0..idx.len() as u32).filter(|&i| idx.get(i).len() == 1).collect();
    let best = (0..n)
        .into_par_iter()
        .map(|s2| {
            let mut best = None;
            let h2 = table.value(s2);
            let prefixes = idx.prefixes(s2);
            for &v in &singles {
                let c2 = idx.concat(s2, v);
                if c2 == SequenceIndex::NONE {
                    continue;
                }
                let rhs = table.value(c2) - h2;
                for &s1 in &prefixes {
                    let lhs = table.value(idx.concat(s1, v)) - table.value(s1);
                    check_marginal(lhs, rhs)?;
                    best = better(best, candidate(lhs, rhs, (s2, s1, v)));
                }
            }
            Ok(best)
        })
        .try_reduce(|| None, |a, b| Ok(better(a, b)))?;
    Ok(finish(table, best, |b| (b.key.1, b.key.0, Some(b.key.2))))
}

fn sequence_constant_in(table: &ValueTable, lower: impl Fn(u32) -> Vec<u32> + Sync) -> Result<Constant> {
    let idx = table.index();
    let n = idx.len() as u32;
    let best = (0..n)
        .into_par_iter()
        .map(|s2| {
            let mut best = None;
            let h2 = table.value(s2);
            let lowers = lower(s2);
            for s3 in 0..n {
                let c2 = idx.concat(s2, s3);
                if c2 == SequenceIndex::NONE {
                    continue;
                }
                let rhs = table.value(c2) - h2;
                for &s1 in &lowers {
                    let c1 = idx.concat(s1, s3);
                    let lhs = table.value(c1) - table.value(s1);
                    check_marginal(lhs, rhs)?;
                    best = better(best, candidate(lhs, rhs, (s2, s1, s3)));
                }
            }
            Ok(best)
        })
        .try_reduce(|| None, |a, b| Ok(better(a, b)))?;
    Ok(finish(table, best, |b| (b.key.1, b.key.0, Some(b.key.2))))
}

/// μ₂: `min h(S3|S1) / h(S3|S2)` over prefix pairs `S1 ⪯ S2` and every
/// `S3`, overlapping ones included.
pub fn mu2_constant_in(table: &ValueTable) -> Result<Constant> {
    sequence_constant_in(table, |s2| table.index().prefixes(s2))
}

/// μ₃: as μ₂ with `S1` ranging over all subsequences of `S2`.
pub fn mu3_constant_in(table: &ValueTable) -> Result<Constant> {
    sequence_constant_in(table, |s2| table.index().subsequences(s2))
}

fn finish(table: &ValueTable, best: Option<Best>, ids: impl Fn(&Best) -> (u32, u32, Option<u32>)) -> Constant {
    match best {
        None => Constant {
            value: 1.0,
            witness: None,
        },
        Some(b) => {
            let (s1, s2, s3) = ids(&b);
            Constant {
                value: b.ratio.min(1.0),
                witness: Some(Witness {
                    s1: table.seq(s1),
                    s2: table.seq(s2),
                    s3: s3.map(|i| table.seq(i)),
                    lhs: b.lhs,
                    rhs: b.rhs,
                }),
            }
        }
    }
}

/// Forward monotonicity over sequences of at most `max_len` elements.
pub fn check_forward_monotone<F: SequenceObjective + ?Sized>(
    f: &F,
    max_len: usize,
    budget: &Budget,
) -> Result<(bool, Option<Witness>)> {
    Ok(check_forward_monotone_in(&ValueTable::new(f, max_len, budget)?))
}

fn gated<F: SequenceObjective + ?Sized>(f: &F, max_len: usize, budget: &Budget) -> Result<ValueTable> {
    let table = ValueTable::new(f, max_len, budget)?;
    if !check_forward_monotone_in(&table).0 {
        return Err(Error::NotApplicable("the function is not forward-monotone".into()));
    }
    Ok(table)
}

pub fn backward_constant<F: SequenceObjective + ?Sized>(f: &F, max_len: usize, budget: &Budget) -> Result<Constant> {
    Ok(backward_constant_in(&gated(f, max_len, budget)?))
}

pub fn mu1_constant<F: SequenceObjective + ?Sized>(f: &F, max_len: usize, budget: &Budget) -> Result<Constant> {
    mu1_constant_in(&gated(f, max_len, budget)?)
}

pub fn mu2_constant<F: SequenceObjective + ?Sized>(f: &F, max_len: usize, budget: &Budget) -> Result<Constant> {
    mu2_constant_in(&gated(f, max_len, budget)?)
}

pub fn mu3_constant<F: SequenceObjective + ?Sized>(f: &F, max_len: usize, budget: &Budget) -> Result<Constant> {
    mu3_constant_in(&gated(f, max_len, budget)?)
}

/// Full report. Constants are left out when forward monotonicity fails.
pub fn assumption_report<F: SequenceObjective + ?Sized>(
    f: &F,
    max_len: usize,
    budget: &Budget,
) -> Result<PropertyReport> {
    let table = ValueTable::new(f, max_len, budget)?;
    let (forward_monotone, forward_witness) = check_forward_monotone_in(&table);
    let mut report = PropertyReport {
        max_len,
        complete: max_len == f.ground_set().len(),
        forward_monotone,
        forward_witness,
        alpha: None,
        mu1: None,
        mu2: None,
        mu3: None,
    };
    if forward_monotone {
        report.alpha = Some(backward_constant_in(&table));
        report.mu1 = Some(mu1_constant_in(&table)?);
        report.mu2 = Some(mu2_constant_in(&table)?);
        report.mu3 = Some(mu3_constant_in(&table)?);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;
    use crate::function::{make_ssg_adversarial, table3, SequenceFunction};
    use crate::sequence::{enumerate_sequences, GroundSet};

    fn budget() -> Budget {
        Budget::default()
    }

    #[test]
    fn table3_is_forward_monotone() {
        let (ok, w) = check_forward_monotone(&table3(), 3, &budget()).unwrap();
        assert!(ok);
        assert!(w.is_none());
    }

    #[test]
    fn forward_violation_witness() {
        let gs = GroundSet::numbered(2).unwrap();
        let mut table = HashMap::new();
        for s in enumerate_sequences(&gs, 2).unwrap() {
            table.insert(s, 1.0);
        }
        table.insert(Sequence::empty(), 0.0);
        table.insert(gs.sequence(&["v1", "v2"]).unwrap(), 0.5);
        let f = SequenceFunction::tabular(gs.clone(), 2, table).unwrap();
        let (ok, w) = check_forward_monotone(&f, 2, &budget()).unwrap();
        assert!(!ok);
        let w = w.unwrap();
        assert_eq!(w.s1, gs.sequence(&["v1"]).unwrap());
        assert_eq!(w.s2, gs.sequence(&["v2"]).unwrap());
        assert_eq!((w.lhs, w.rhs), (0.5, 1.0));
        assert!(matches!(mu1_constant(&f, 2, &budget()), Err(Error::NotApplicable(_))));
        let report = assumption_report(&f, 2, &budget()).unwrap();
        assert!(report.alpha.is_none());
        assert!(report.assumptions().is_empty());
    }

    #[test]
    fn table3_alpha_is_six_elevenths() {
        let f = table3();
        let alpha = backward_constant(&f, 3, &budget()).unwrap();
        assert!((alpha.value - 6.0 / 11.0).abs() < 1e-12);
        let w = alpha.witness.unwrap();
        assert_eq!(w.s1, f.seq(&["v2"]).unwrap());
        assert_eq!(w.s2, f.seq(&["v1", "v2", "v3"]).unwrap());
        assert_eq!((w.lhs, w.rhs), (1.2, 2.2));
    }

    #[test]
    fn table3_constants() {
        let f = table3();
        let r = assumption_report(&f, 3, &budget()).unwrap();
        assert!(r.complete);
        assert_eq!(r.mu1_value(), Some(1.0));
        assert!(r.element_sequence_submodular());
        assert!(!r.sequence_submodular());
        let mu2 = r.mu2.clone().unwrap();
        assert!(mu2.value <= 0.6 + 1e-12);
        assert!(r.mu3_value().unwrap() <= mu2.value);
        assert!(!r.holds(Assumption::A1));
        assert!(r.holds(Assumption::A4));
        assert!(r.holds(Assumption::A6));
    }

    #[test]
    fn constructed_mu1_violation() {
        // Appending v2 after (v1) is worth 1, after () only 0.7.
        let gs = GroundSet::numbered(2).unwrap();
        let mut table = HashMap::new();
        table.insert(gs.sequence(&["v1"]).unwrap(), 1.0);
        table.insert(gs.sequence(&["v2"]).unwrap(), 0.7);
        table.insert(gs.sequence(&["v1", "v2"]).unwrap(), 2.0);
        table.insert(gs.sequence(&["v2", "v1"]).unwrap(), 1.7);
        let f = SequenceFunction::tabular(gs.clone(), 2, table).unwrap();
        let mu1 = mu1_constant(&f, 2, &budget()).unwrap();
        assert!((mu1.value - 0.7).abs() < 1e-12);
        let w = mu1.witness.unwrap();
        assert_eq!(w.s1, Sequence::empty());
        assert_eq!(w.s2, gs.sequence(&["v1"]).unwrap());
        assert_eq!(w.s3, Some(gs.sequence(&["v2"]).unwrap()));
    }

    #[test]
    fn discounted_additive_is_sequence_submodular() {
        let gs = GroundSet::numbered(2).unwrap();
        let f = SequenceFunction::discounted_additive(gs, vec![1.0, 1.0], vec![1.0, 0.5]).unwrap();
        let r = assumption_report(&f, 2, &budget()).unwrap();
        assert!(r.forward_monotone);
        assert_eq!(r.mu1_value(), Some(1.0));
        assert_eq!(r.mu2_value(), Some(1.0));
        assert_eq!(r.mu3_value(), Some(1.0));
    }

    #[test]
    fn flat_discount_satisfies_assumption_two() {
        let gs = GroundSet::numbered(4).unwrap();
        let f = SequenceFunction::discounted_additive(gs, vec![0.5, 2.0, 1.0, 3.0], vec![1.0; 4]).unwrap();
        let r = assumption_report(&f, 4, &budget()).unwrap();
        assert!(r.holds(Assumption::A1));
        assert!(r.holds(Assumption::A2));
    }

    #[test]
    fn adversarial_alpha_is_one_half() {
        // Prepending v to (u1, u2, v) wipes out every u: 1 / 2.
        let f = make_ssg_adversarial(2, 0.01).unwrap();
        let r = assumption_report(&f, 5, &budget()).unwrap();
        let alpha = r.alpha.clone().unwrap();
        assert!((alpha.value - 0.5).abs() < 1e-12);
        let w = alpha.witness.unwrap();
        assert!((w.lhs - 1.0).abs() < 1e-12 && (w.rhs - 2.0).abs() < 1e-12);
        assert!(!r.holds(Assumption::A1));
        assert!(r.holds(Assumption::A5));
    }

    #[test]
    fn budget_is_enforced() {
        let f = make_ssg_adversarial(10, 1e-3).unwrap();
        assert!(matches!(
            assumption_report(&f, 4, &budget()),
            Err(Error::TooLarge { .. })
        ));
        let r = assumption_report(&f, 2, &budget()).unwrap();
        assert!(!r.complete);
        assert!(!r.assumptions().contains(&Assumption::A1));
    }
}
