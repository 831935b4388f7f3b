//! Greedy selection: the plain sequence greedy (SSG) and the two robust
//! variants for contiguous and arbitrary removal.
//!
//! Functions are taken to be normalized, `h(()) = 0`, so the empty sequence
//! is never evaluated. Ties go to the lowest element index and every run
//! appends exactly `k` elements, even when all scores are zero or negative.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::function::SequenceObjective;
use crate::sequence::{ElementSet, GroundSet, Sequence};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Ssg,
    RobustContiguous,
    RobustArbitrary,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Ssg, Algorithm::RobustContiguous, Algorithm::RobustArbitrary];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ssg => "ssg",
            Algorithm::RobustContiguous => "robust-contiguous",
            Algorithm::RobustArbitrary => "robust-arbitrary",
        }
    }

    /// Runs the algorithm. `tau` is ignored by SSG.
    pub fn run<F: SequenceObjective + ?Sized>(self, f: &F, k: usize, tau: usize) -> Result<GreedyTrace> {
        match self {
            Algorithm::Ssg => ssg(f, k),
            Algorithm::RobustContiguous => robust_greedy_contiguous(f, k, tau),
            Algorithm::RobustArbitrary => robust_greedy_arbitrary(f, k, tau),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ssg" => Ok(Algorithm::Ssg),
            "robust-contiguous" | "alg1" => Ok(Algorithm::RobustContiguous),
            "robust-arbitrary" | "alg2" => Ok(Algorithm::RobustArbitrary),
            _ => Err(Error::InvalidInput(format!(
                "unknown algorithm '{s}' (expected ssg, robust-contiguous or robust-arbitrary)"
            ))),
        }
    }
}

/// One greedy iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct GreedyStep {
    /// 1-based position in the output.
    pub index: usize,
    /// 1 or 2; SSG runs entirely in phase 1.
    pub phase: u8,
    /// Every candidate with its score, in element order.
    pub scores: Vec<(usize, f64)>,
    pub chosen: usize,
    /// Score of the chosen element.
    pub gain: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GreedyTrace {
    pub algorithm: Algorithm,
    pub chosen: Sequence,
    pub steps: Vec<GreedyStep>,
    /// Number of elements picked in phase 1 (`τ` for the robust variants,
    /// `k` for SSG).
    pub phase_boundary: usize,
}

impl GreedyTrace {
    pub fn step1(&self) -> Sequence {
        self.chosen.prefix(self.phase_boundary)
    }

    pub fn step2(&self) -> Sequence {
        Sequence::from_vec_unchecked(self.chosen.items()[self.phase_boundary..].to_vec())
    }

    /// CSV with one row per (step, candidate).
    pub fn to_csv(&self, gs: &GroundSet) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::InvalidInput(e.to_string());
        w.write_record(["step", "phase", "candidate", "score", "chosen"]).map_err(io)?;
        for step in &self.steps {
            for &(e, score) in &step.scores {
                w.write_record([
                    step.index.to_string(),
                    step.phase.to_string(),
                    gs.name(e).to_string(),
                    format!("{score:.6}"),
                    (e == step.chosen).to_string(),
                ])
                .map_err(io)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// First candidate with the strictly largest score.
fn argmax(scores: &[(usize, f64)]) -> (usize, f64) {
    let mut best = scores[0];
    for &(e, s) in &scores[1..] {
        if s > best.1 {
            best = (e, s);
        }
    }
    best
}

/// Greedily extends `base` by `steps` elements drawn from `allowed`, scoring
/// each by its marginal with respect to the growing sequence.
fn greedy_extend<F: SequenceObjective + ?Sized>(
    f: &F,
    mut base: Sequence,
    mut base_value: f64,
    mut allowed: ElementSet,
    steps: usize,
    phase: u8,
    trace: &mut Vec<GreedyStep>,
) -> Result<Sequence> {
    for _ in 0..steps {
        let candidates: Vec<usize> = allowed.iter().collect();
        let values = candidates
            .par_iter()
            .map(|&e| f.eval(&base.with(e)))
            .collect::<Result<Vec<_>>>()?;
        let scores: Vec<(usize, f64)> = candidates.iter().zip(&values).map(|(&e, &v)| (e, v - base_value)).collect();
        let (chosen, gain) = argmax(&scores);
        base_value += gain;
        base.push(chosen);
        allowed = allowed.difference(ElementSet::from_iter([chosen]));
        trace.push(GreedyStep {
            index: trace.len() + 1,
            phase,
            scores,
            chosen,
            gain,
        });
    }
    Ok(base)
}

fn check_k(gs: &GroundSet, k: usize) -> Result<()> {
    if k == 0 || k > gs.len() {
        return Err(Error::InvalidInput(format!("k = {k} must lie in 1..={}", gs.len())));
    }
    Ok(())
}

fn check_robust(gs: &GroundSet, k: usize, tau: usize) -> Result<()> {
    if k < 2 || k > gs.len() {
        return Err(Error::InvalidInput(format!("k = {k} must lie in 2..={}", gs.len())));
    }
    if tau == 0 || tau > k {
        return Err(Error::InvalidInput(format!("tau = {tau} must lie in 1..={k}")));
    }
    Ok(())
}

/// Sequence submodular greedy: `k` times append the element with the largest
/// marginal value.
pub fn ssg<F: SequenceObjective + ?Sized>(f: &F, k: usize) -> Result<GreedyTrace> {
    let gs = f.ground_set();
    check_k(gs, k)?;
    ssg_within(f, k, gs.all())
}

/// SSG restricted to the elements of `allowed`.
pub fn ssg_within<F: SequenceObjective + ?Sized>(f: &F, k: usize, allowed: ElementSet) -> Result<GreedyTrace> {
    if k > allowed.len() {
        return Err(Error::InvalidInput(format!(
            "k = {k} exceeds the {} allowed elements",
            allowed.len()
        )));
    }
    let mut steps = Vec::with_capacity(k);
    let chosen = greedy_extend(f, Sequence::empty(), 0.0, allowed, k, 1, &mut steps)?;
    Ok(GreedyTrace {
        algorithm: Algorithm::Ssg,
        chosen,
        steps,
        phase_boundary: k,
    })
}

/// Step 2 of both robust variants: a fresh greedy sequence over the
/// remaining elements that does not see `s1`.
fn step2<F: SequenceObjective + ?Sized>(
    f: &F,
    s1: Sequence,
    k: usize,
    steps: &mut Vec<GreedyStep>,
) -> Result<Sequence> {
    let tau = s1.len();
    let rest = f.ground_set().all().difference(s1.elements());
    let s2 = greedy_extend(f, Sequence::empty(), 0.0, rest, k - tau, 2, steps)?;
    Ok(s1.concat(&s2))
}

/// Robust greedy against removal of a contiguous block: greedy `S1` of
/// length `τ`, then greedy `S2` of length `k - τ` scored as if `S1` were
/// absent.
pub fn robust_greedy_contiguous<F: SequenceObjective + ?Sized>(f: &F, k: usize, tau: usize) -> Result<GreedyTrace> {
    let gs = f.ground_set();
    check_robust(gs, k, tau)?;
    let mut steps = Vec::with_capacity(k);
    let s1 = greedy_extend(f, Sequence::empty(), 0.0, gs.all(), tau, 1, &mut steps)?;
    let chosen = step2(f, s1, k, &mut steps)?;
    Ok(GreedyTrace {
        algorithm: Algorithm::RobustContiguous,
        chosen,
        steps,
        phase_boundary: tau,
    })
}

/// Robust greedy against arbitrary removal: `S1` holds the `τ` elements of
/// largest singleton value, in decreasing order; `S2` as in the contiguous
/// variant.
pub fn robust_greedy_arbitrary<F: SequenceObjective + ?Sized>(f: &F, k: usize, tau: usize) -> Result<GreedyTrace> {
    let gs = f.ground_set();
    check_robust(gs, k, tau)?;
    let singles = (0..gs.len())
        .into_par_iter()
        .map(|e| f.eval(&Sequence::from_vec_unchecked(vec![e])))
        .collect::<Result<Vec<_>>>()?;
    let mut steps = Vec::with_capacity(k);
    let mut s1 = Sequence::empty();
    for i in 0..tau {
        let scores: Vec<(usize, f64)> = (0..gs.len()).filter(|&e| !s1.contains(e)).map(|e| (e, singles[e])).collect();
        let (chosen, gain) = argmax(&scores);
        s1.push(chosen);
        steps.push(GreedyStep {
            index: i + 1,
            phase: 1,
            scores,
            chosen,
            gain,
        });
    }
    let chosen = step2(f, s1, k, &mut steps)?;
    Ok(GreedyTrace {
        algorithm: Algorithm::RobustArbitrary,
        chosen,
        steps,
        phase_boundary: tau,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::{make_ssg_adversarial, table3};

    #[test]
    fn ssg_on_table3() {
        let f = table3();
        let t = ssg(&f, 2).unwrap();
        assert_eq!(t.chosen, f.seq(&["v2", "v1"]).unwrap());
        assert_eq!(t.steps[0].scores, vec![(0, 0.2), (1, 1.2), (2, 1.0)]);
        assert_eq!(t.steps[1].scores, vec![(0, 0.0), (2, 0.0)]);
        assert_eq!(f.eval(&t.chosen).unwrap(), 1.2);
    }

    #[test]
    fn ssg_k1_picks_best_singleton() {
        let f = table3();
        assert_eq!(ssg(&f, 1).unwrap().chosen, f.seq(&["v2"]).unwrap());
    }

    #[test]
    fn ssg_on_adversarial() {
        let f = make_ssg_adversarial(10, 1e-3).unwrap();
        let t = ssg(&f, 10).unwrap();
        let expect: Vec<usize> = std::iter::once(0).chain(11..20).collect();
        assert_eq!(t.chosen.items(), &expect[..]);
        assert!((f.eval(&t.chosen).unwrap() - 1.009).abs() < 1e-12);
    }

    #[test]
    fn robust_variants_on_table3() {
        let f = table3();
        for alg in [Algorithm::RobustContiguous, Algorithm::RobustArbitrary] {
            let t = alg.run(&f, 2, 1).unwrap();
            assert_eq!(t.chosen, f.seq(&["v2", "v3"]).unwrap());
            assert_eq!(t.step1(), f.seq(&["v2"]).unwrap());
        }
        let t = robust_greedy_arbitrary(&f, 2, 2).unwrap();
        assert_eq!(t.chosen, f.seq(&["v2", "v3"]).unwrap());
        assert!(t.step2().is_empty());
    }

    #[test]
    fn contiguous_step2_ignores_s1() {
        let f = make_ssg_adversarial(10, 1e-3).unwrap();
        let t = robust_greedy_contiguous(&f, 10, 1).unwrap();
        let expect: Vec<usize> = (0..10).collect();
        assert_eq!(t.chosen.items(), &expect[..]);
        assert!(t.steps[1..].iter().all(|s| (s.gain - 0.1).abs() < 1e-12));
    }

    #[test]
    fn arbitrary_on_small_adversarial() {
        let f = make_ssg_adversarial(3, 0.01).unwrap();
        let t = robust_greedy_arbitrary(&f, 3, 1).unwrap();
        assert_eq!(t.chosen.items(), &[0, 1, 2]);
        assert!((f.eval(&t.chosen).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tau_equal_k_is_pure_step1() {
        let f = table3();
        let t = robust_greedy_contiguous(&f, 3, 3).unwrap();
        assert_eq!(t.chosen, ssg(&f, 3).unwrap().chosen);
        assert_eq!(t.phase_boundary, 3);
    }

    #[test]
    fn parameter_errors() {
        let f = table3();
        assert!(ssg(&f, 0).is_err());
        assert!(ssg(&f, 4).is_err());
        assert!(robust_greedy_contiguous(&f, 1, 1).is_err());
        assert!(robust_greedy_arbitrary(&f, 2, 0).is_err());
        assert!(robust_greedy_arbitrary(&f, 2, 3).is_err());
        assert!("alg3".parse::<Algorithm>().is_err());
    }

    #[test]
    fn trace_csv() {
        let f = table3();
        let csv = ssg(&f, 2).unwrap().to_csv(f.ground_set()).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "step,phase,candidate,score,chosen");
        assert_eq!(lines[2], "1,1,v2,1.200000,true");
        assert_eq!(lines.len(), 6);
    }
}
