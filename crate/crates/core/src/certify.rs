//! End-to-end certification: measure an instance's constants, run a greedy
//! algorithm, compute the exhaustive robust optimum, and check the ratio
//! against the strongest applicable bound. Also a seeded instance generator.
//!
//! The reference optimum `g_opt` is always the optimum under arbitrary
//! removal of at most `τ` elements, while `g_alg` is measured under the
//! removal mode of the row.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::algorithms::{ssg, Algorithm};
use crate::bounds::{
    concentration_bound, ratio_theorem1, ratio_theorem2, ratio_theorem3, ratio_theorem4, ratio_theorem5,
    ratio_theorem6, ssg_prefix_bound, Variant,
};
use crate::error::{Error, Result};
use crate::function::{SequenceFunction, SequenceObjective, Sensor};
use crate::oracles::{
    brute_opt_nonrobust, brute_opt_robust, restricted_optima, worst_removal, OracleConfig, RemovalMode, RemovalModel,
};
use crate::properties::{assumption_report, Assumption, Budget, PropertyReport, TOL};
use crate::sequence::{enumerate_sequences, GroundSet, Sequence};

/// Slack on every bound comparison.
pub const SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Theorem {
    T1,
    T2,
    T3,
    T4A,
    T4B,
    T5A,
    T5B,
    T6,
}

impl Theorem {
    pub const ALL: [Theorem; 8] = [
        Theorem::T1,
        Theorem::T2,
        Theorem::T3,
        Theorem::T4A,
        Theorem::T4B,
        Theorem::T5A,
        Theorem::T5B,
        Theorem::T6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Theorem::T1 => "T1",
            Theorem::T2 => "T2",
            Theorem::T3 => "T3",
            Theorem::T4A => "T4A",
            Theorem::T4B => "T4B",
            Theorem::T5A => "T5A",
            Theorem::T5B => "T5B",
            Theorem::T6 => "T6",
        }
    }

    /// Whether the bound presumes exact axioms.
    pub fn is_exact(self) -> bool {
        matches!(self, Theorem::T1 | Theorem::T2 | Theorem::T3)
    }

    /// The algorithm and removal mode the bound is about.
    pub fn setting(self) -> (Algorithm, RemovalMode) {
        match self {
            Theorem::T3 | Theorem::T6 => (Algorithm::RobustArbitrary, RemovalMode::Arbitrary),
            _ => (Algorithm::RobustContiguous, RemovalMode::Contiguous),
        }
    }

    pub fn assumption(self) -> Assumption {
        match self {
            Theorem::T1 | Theorem::T2 => Assumption::A1,
            Theorem::T3 => Assumption::A2,
            Theorem::T4A | Theorem::T5A => Assumption::A3,
            Theorem::T4B | Theorem::T5B => Assumption::A4,
            Theorem::T6 => Assumption::A5,
        }
    }

    /// The bound with the report's constants, or why it does not apply.
    pub fn bound(self, report: &PropertyReport, k: usize, tau: usize) -> std::result::Result<f64, String> {
        if !report.holds(self.assumption()) {
            return Err(format!("{} needs {}, which is not certified", self.name(), self.assumption()));
        }
        if matches!(self, Theorem::T1 | Theorem::T4A | Theorem::T4B) && tau != 1 {
            return Err(format!("{} only covers tau = 1", self.name()));
        }
        let alpha = report.alpha_value().unwrap_or(0.0);
        let mu1 = report.mu1_value().unwrap_or(0.0);
        let mu2 = report.mu2_value().unwrap_or(0.0);
        let mu3 = report.mu3_value().unwrap_or(0.0);
        let value = match self {
            Theorem::T1 => ratio_theorem1(k),
            Theorem::T2 => ratio_theorem2(k, tau),
            Theorem::T3 => ratio_theorem3(tau),
            Theorem::T4A => ratio_theorem4(k, mu1, mu2, alpha, Variant::A),
            Theorem::T4B => ratio_theorem4(k, mu1, mu2, alpha, Variant::B),
            Theorem::T5A => ratio_theorem5(k, tau, mu1, mu2, alpha, Variant::A),
            Theorem::T5B => ratio_theorem5(k, tau, mu1, mu2, alpha, Variant::B),
            Theorem::T6 => ratio_theorem6(tau, mu1, mu3, alpha),
        };
        value.map_err(|e| e.to_string())
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let up = s.to_ascii_uppercase();
        Theorem::ALL
            .into_iter()
            .find(|t| t.name() == up)
            .ok_or_else(|| Error::InvalidInput(format!("unknown theorem '{s}'")))
    }
}

/// Strongest applicable bound for an algorithm and removal mode.
pub fn select_theorem(
    report: &PropertyReport,
    algorithm: Algorithm,
    mode: RemovalMode,
    k: usize,
    tau: usize,
) -> std::result::Result<(Theorem, f64), String> {
    if !report.forward_monotone {
        return Err("not forward-monotone".into());
    }
    let candidates: &[Theorem] = match (algorithm, mode) {
        (Algorithm::RobustContiguous, RemovalMode::Contiguous) => {
            if report.holds(Assumption::A1) {
                &[Theorem::T1, Theorem::T2]
            } else {
                &[Theorem::T4A, Theorem::T4B, Theorem::T5A, Theorem::T5B]
            }
        }
        (Algorithm::RobustArbitrary, RemovalMode::Arbitrary) => {
            if report.holds(Assumption::A2) {
                &[Theorem::T3]
            } else {
                &[Theorem::T6]
            }
        }
        _ => return Err(format!("no bound covers {algorithm} under {mode} removal")),
    };
    let mut best: Option<(Theorem, f64)> = None;
    let mut reasons = Vec::new();
    for &t in candidates {
        match t.bound(report, k, tau) {
            Ok(b) if best.is_none_or(|(_, x)| b > x) => best = Some((t, b)),
            Ok(_) => {}
            Err(e) => reasons.push(e),
        }
    }
    best.ok_or_else(|| reasons.join("; "))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Pass,
    /// The robust optimum is zero.
    VacuousPass,
    Fail(String),
    Uncertifiable(String),
    Error(String),
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::VacuousPass => "vacuous-pass",
            Verdict::Fail(_) => "fail",
            Verdict::Uncertifiable(_) => "uncertifiable",
            Verdict::Error(_) => "error",
        }
    }

    pub fn reason(&self) -> Option<&str> {
        match self {
            Verdict::Fail(r) | Verdict::Uncertifiable(r) | Verdict::Error(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_failure(&self) -> bool {
        matches!(self, Verdict::Fail(_))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificationResult {
    pub instance_id: String,
    pub family: String,
    pub v: usize,
    pub k: usize,
    pub tau: usize,
    pub mode: RemovalMode,
    pub algorithm: Algorithm,
    pub report: Option<PropertyReport>,
    pub theorem: Option<Theorem>,
    pub bound: Option<f64>,
    pub output: Option<Sequence>,
    pub g_alg: Option<f64>,
    /// Optimum under arbitrary removal.
    pub g_opt: Option<f64>,
    /// Optimum under the row's removal mode.
    pub g_opt_mode: Option<f64>,
    /// `h(S*(V, k - τ, 0))`.
    pub restricted_opt: Option<f64>,
    pub verdict: Verdict,
}

impl CertificationResult {
    /// `g_alg / g_opt`, undefined when the optimum is zero.
    pub fn ratio(&self) -> Option<f64> {
        match (self.g_alg, self.g_opt) {
            (Some(a), Some(o)) if o > 0.0 => Some(a / o),
            _ => None,
        }
    }

    /// `g_alg - bound · g_opt`.
    pub fn margin(&self) -> Option<f64> {
        Some(self.g_alg? - self.bound? * self.g_opt?)
    }

    fn constant(&self, pick: fn(&PropertyReport) -> Option<f64>) -> Option<f64> {
        self.report.as_ref().and_then(pick)
    }
}

#[derive(Clone, Debug, Default)]
pub struct CertifyOptions {
    pub oracle: OracleConfig,
    /// Cite this bound instead of selecting one. A bound whose assumptions
    /// are not certified turns the row into a failure.
    pub force_theorem: Option<Theorem>,
}

/// Runs one certification. Errors from the oracles or the algorithm end up
/// in the verdict.
#[allow(clippy::too_many_arguments)]
pub fn certify_instance(
    id: &str,
    f: &SequenceFunction,
    report: &PropertyReport,
    k: usize,
    tau: usize,
    algorithm: Algorithm,
    mode: RemovalMode,
    options: &CertifyOptions,
) -> CertificationResult {
    let mut row = CertificationResult {
        instance_id: id.to_string(),
        family: f.kind().to_string(),
        v: f.ground_set().len(),
        k,
        tau,
        mode,
        algorithm,
        report: Some(report.clone()),
        theorem: None,
        bound: None,
        output: None,
        g_alg: None,
        g_opt: None,
        g_opt_mode: None,
        restricted_opt: None,
        verdict: Verdict::Pass,
    };
    if let Err(e) = measure(f, &mut row, &options.oracle) {
        row.verdict = Verdict::Error(e.to_string());
        return row;
    }
    let selected = match options.force_theorem {
        Some(t) => {
            if t.setting() != (algorithm, mode) {
                Err(format!("{t} does not cover {algorithm} under {mode} removal"))
            } else {
                match t.bound(report, k, tau) {
                    Ok(b) => Ok((t, b)),
                    Err(why) => {
                        row.theorem = Some(t);
                        row.verdict = Verdict::Fail(format!("unsound citation: {why}"));
                        return row;
                    }
                }
            }
        }
        None => select_theorem(report, algorithm, mode, k, tau),
    };
    let (theorem, bound) = match selected {
        Ok(x) => x,
        Err(why) => {
            row.verdict = Verdict::Uncertifiable(why);
            return row;
        }
    };
    row.theorem = Some(theorem);
    row.bound = Some(bound);
    let (g_alg, g_opt) = (row.g_alg.unwrap_or(0.0), row.g_opt.unwrap_or(0.0));
    let restricted = row.restricted_opt.unwrap_or(f64::INFINITY);
    row.verdict = if g_opt > restricted + SLACK {
        Verdict::Fail(format!("robust optimum {g_opt} exceeds the restricted optimum {restricted}"))
    } else if g_alg > row.g_opt_mode.unwrap_or(f64::INFINITY) + SLACK {
        Verdict::Fail(format!("algorithm value {g_alg} exceeds the exhaustive optimum"))
    } else if g_opt == 0.0 {
        Verdict::VacuousPass
    } else if g_alg >= bound * g_opt - SLACK {
        Verdict::Pass
    } else {
        Verdict::Fail(format!("ratio {:.6} below bound {bound:.6}", g_alg / g_opt))
    };
    row
}

fn measure(f: &SequenceFunction, row: &mut CertificationResult, config: &OracleConfig) -> Result<()> {
    let (k, tau) = (row.k, row.tau);
    let trace = row.algorithm.run(f, k, tau)?;
    let model = RemovalModel { tau, mode: row.mode };
    row.g_alg = Some(worst_removal(f, &trace.chosen, model, &config.budget)?.value);
    row.output = Some(trace.chosen);
    let arbitrary = RemovalModel::arbitrary(tau);
    let g_opt = brute_opt_robust(f, k, arbitrary, config)?.1;
    row.g_opt = Some(g_opt);
    row.g_opt_mode = Some(match row.mode {
        RemovalMode::Arbitrary => g_opt,
        RemovalMode::Contiguous => brute_opt_robust(f, k, model, config)?.1,
    });
    if tau <= k {
        row.restricted_opt = Some(brute_opt_nonrobust(f, k - tau, f.ground_set().all(), config)?.1);
    }
    Ok(())
}

/// Outcome of the greedy prefix, value-concentration and restricted-optimum
/// checks on one instance.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LemmaAudit {
    pub checks: usize,
    pub violations: Vec<String>,
    /// Proper SSG prefixes with the full output's value.
    pub flat_prefixes: usize,
}

impl LemmaAudit {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.violations.push(what());
        }
    }
}

/// Checks, for the SSG output `S` of length `k` and the optimum `OPT`:
/// `h(S^i) ≥ α(1 - e^{-μ₁ i/k})·OPT` for every prefix; the value-concentration
/// bound for every prefix with a positive share of `h(S)` (backward-monotone
/// instances only); optimality of `S` when a proper prefix already attains
/// `h(S)` (exact instances only); and `g_τ(S*(V,k,τ)) ≤ h(S*(V \ V', k-τ, 0))`
/// for every `|V'| ≤ τ`.
pub fn audit_lemmas(
    f: &SequenceFunction,
    report: &PropertyReport,
    k: usize,
    tau: usize,
    config: &OracleConfig,
) -> Result<LemmaAudit> {
    if !report.forward_monotone {
        return Err(Error::NotApplicable("the function is not forward-monotone".into()));
    }
    let (alpha, mu1) = match (report.alpha_value(), report.mu1_value()) {
        (Some(a), Some(m)) if a > 0.0 && m > 0.0 => (a, m),
        _ => return Err(Error::NotApplicable("alpha and mu1 must be positive".into())),
    };
    let mut audit = LemmaAudit::default();
    let opt = brute_opt_nonrobust(f, k, f.ground_set().all(), config)?.1;
    let out = ssg(f, k)?.chosen;
    let values = (0..=k).map(|i| f.eval(&out.prefix(i))).collect::<Result<Vec<_>>>()?;
    let h = values[k];
    for (i, &value) in values.iter().enumerate().skip(1) {
        let bound = ssg_prefix_bound(i, k, mu1, alpha)?;
        audit.check(value >= bound * opt - SLACK, || {
            format!("prefix {i}: h = {value} < {bound:.6} * {opt}")
        });
    }
    let backward = report.complete && report.backward_monotone();
    if backward && h > TOL {
        for kp in 1..=k {
            let c = (values[k - kp] / h).min(1.0);
            if c > 0.0 {
                let bound = concentration_bound(k, kp, c, mu1)?;
                audit.check(h >= bound * opt - SLACK, || {
                    format!("concentration k' = {kp}, c = {c:.6}: h = {h} < {bound:.6} * {opt}")
                });
            }
        }
    }
    if report.holds(Assumption::A1) {
        for (j, &v) in values.iter().enumerate().take(k) {
            if (v - h).abs() <= SLACK {
                audit.flat_prefixes += 1;
                audit.check((h - opt).abs() <= 1e-6, || {
                    format!("flat prefix of length {j} but h = {h} < optimum {opt}")
                });
            }
        }
    }
    let g_opt = brute_opt_robust(f, k, RemovalModel::arbitrary(tau), config)?.1;
    for (set, bound) in restricted_optima(f, k, tau, config)? {
        audit.check(g_opt <= bound + SLACK, || {
            format!(
                "removing {}: robust optimum {g_opt} > restricted optimum {bound}",
                f.ground_set().format_set(set)
            )
        });
    }
    Ok(audit)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    DiscountedAdditive,
    DetectionDecay,
    TabularRandom,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::DiscountedAdditive => "discounted_additive",
            Family::DetectionDecay => "detection_decay",
            Family::TabularRandom => "tabular_random",
        }
    }

    fn prefix(self) -> &'static str {
        match self {
            Family::DiscountedAdditive => "da",
            Family::DetectionDecay => "dd",
            Family::TabularRandom => "tr",
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "discounted_additive" => Ok(Family::DiscountedAdditive),
            "detection_decay" => Ok(Family::DetectionDecay),
            "tabular_random" => Ok(Family::TabularRandom),
            _ => Err(Error::InvalidInput(format!("unknown family '{s}'"))),
        }
    }
}

/// How discounted-additive instances are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Profile {
    /// Alternates equal weights with random nonincreasing discounts and
    /// random weights with a flat discount. Both are exactly backward
    /// monotone and sequence-submodular.
    Certified,
    /// Random weights and random nonincreasing discounts.
    General,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusSpec {
    pub family: Family,
    /// Number of draws; discarded draws leave gaps in the ids.
    pub count: usize,
    pub v_min: usize,
    pub v_max: usize,
    pub seed: u64,
    pub profile: Profile,
}

impl CorpusSpec {
    pub fn new(family: Family, count: usize, v_min: usize, v_max: usize, seed: u64) -> Self {
        CorpusSpec {
            family,
            count,
            v_min,
            v_max,
            seed,
            profile: Profile::Certified,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub id: String,
    pub function: SequenceFunction,
    pub report: PropertyReport,
}

#[derive(Clone, Debug, Default)]
pub struct Corpus {
    pub instances: Vec<Instance>,
    /// Draws dropped for failing forward monotonicity.
    pub discarded: usize,
}

fn draw(spec: &CorpusSpec, i: usize, rng: &mut ChaCha8Rng) -> Result<Option<SequenceFunction>> {
    let v = rng.gen_range(spec.v_min..=spec.v_max);
    let gs = GroundSet::numbered(v)?;
    let discounts = |rng: &mut ChaCha8Rng| {
        let mut d: Vec<f64> = (0..v).map(|_| rng.gen_range(0.1..=1.0)).collect();
        d.sort_by(|a, b| b.total_cmp(a));
        d
    };
    let f = match spec.family {
        Family::DiscountedAdditive => {
            let (w, d) = match spec.profile {
                Profile::Certified if i.is_multiple_of(2) => (vec![rng.gen_range(0.5..=2.0); v], discounts(rng)),
                Profile::Certified => {
                    let w = (0..v).map(|_| rng.gen_range(0.1..=2.0)).collect();
                    (w, vec![rng.gen_range(0.5..=1.0); v])
                }
                Profile::General => ((0..v).map(|_| rng.gen_range(0.1..=2.0)).collect(), discounts(rng)),
            };
            SequenceFunction::discounted_additive(gs, w, d)?
        }
        Family::DetectionDecay => {
            let n_cells = rng.gen_range(3..=6);
            let cells = (0..n_cells).map(|c| (format!("c{}", c + 1), rng.gen_range(0.5..=2.0))).collect();
            let sensors = (0..v)
                .map(|_| {
                    let mut cells: Vec<usize> = (0..n_cells).collect();
                    cells.shuffle(rng);
                    let mut covers = cells[..rng.gen_range(1..=n_cells)].to_vec();
                    covers.sort_unstable();
                    Sensor {
                        strength: rng.gen_range(0.3..=1.0),
                        lifetime: rng.gen_range(0.5..=4.0),
                        covers,
                    }
                })
                .collect();
            SequenceFunction::detection_decay(gs, cells, sensors)?
        }
        Family::TabularRandom => {
            let mut table = std::collections::HashMap::new();
            let mut ok = true;
            for s in enumerate_sequences(&gs, v)? {
                let value = if s.is_empty() {
                    0.0
                } else {
                    table[&s.prefix(s.len() - 1)] + rng.gen_range(-0.25..=1.0)
                };
                ok &= value >= 0.0;
                table.insert(s, value);
            }
            if !ok {
                return Ok(None);
            }
            SequenceFunction::tabular(gs, v, table)?
        }
    };
    Ok(Some(f))
}

/// Draws `spec.count` instances and measures each one exhaustively.
/// Instances that are not forward-monotone are dropped.
pub fn generate_corpus(spec: &CorpusSpec, budget: &Budget) -> Result<Corpus> {
    if spec.v_min == 0 || spec.v_min > spec.v_max {
        return Err(Error::InvalidParameter(format!(
            "ground-set size range {}..={} is empty",
            spec.v_min, spec.v_max
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut drawn = Vec::with_capacity(spec.count);
    for i in 0..spec.count {
        drawn.push((i, draw(spec, i, &mut rng)?));
    }
    let measured = drawn
        .into_par_iter()
        .map(|(i, f)| match f {
            None => Ok(None),
            Some(f) => {
                let report = assumption_report(&f, f.ground_set().len(), budget)?;
                Ok(report.forward_monotone.then(|| Instance {
                    id: format!("{}-{}-{i:03}", spec.family.prefix(), spec.seed),
                    function: f,
                    report,
                }))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let discarded = measured.iter().filter(|x| x.is_none()).count();
    Ok(Corpus {
        instances: measured.into_iter().flatten().collect(),
        discarded,
    })
}

/// Every `(k, τ)` with `k_min ≤ k ≤ k_max` and `1 ≤ τ < k`.
pub fn grid(k_min: usize, k_max: usize) -> Vec<(usize, usize)> {
    (k_min..=k_max).flat_map(|k| (1..k).map(move |tau| (k, tau))).collect()
}

/// Per-theorem ratio statistics over passing rows.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TheoremStats {
    pub rows: usize,
    pub min_ratio: f64,
    pub mean_ratio: f64,
    pub min_bound: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Summary {
    pub rows: usize,
    pub pass: usize,
    pub vacuous: usize,
    pub fail: usize,
    pub uncertifiable: usize,
    pub errors: usize,
    pub by_theorem: BTreeMap<Theorem, TheoremStats>,
}

impl Summary {
    pub fn from_rows(rows: &[CertificationResult]) -> Summary {
        let mut s = Summary {
            rows: rows.len(),
            ..Summary::default()
        };
        let mut ratios: BTreeMap<Theorem, Vec<(f64, f64)>> = BTreeMap::new();
        for r in rows {
            match r.verdict {
                Verdict::Pass => s.pass += 1,
                Verdict::VacuousPass => s.vacuous += 1,
                Verdict::Fail(_) => s.fail += 1,
                Verdict::Uncertifiable(_) => s.uncertifiable += 1,
                Verdict::Error(_) => s.errors += 1,
            }
            if let (Some(t), Some(ratio), Some(bound)) = (r.theorem, r.ratio(), r.bound) {
                ratios.entry(t).or_default().push((ratio, bound));
            }
        }
        for (t, v) in ratios {
            let n = v.len();
            s.by_theorem.insert(
                t,
                TheoremStats {
                    rows: n,
                    min_ratio: v.iter().map(|x| x.0).fold(f64::INFINITY, f64::min),
                    mean_ratio: v.iter().map(|x| x.0).sum::<f64>() / n as f64,
                    min_bound: v.iter().map(|x| x.1).fold(f64::INFINITY, f64::min),
                },
            );
        }
        s
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "rows {}: pass {}, vacuous {}, fail {}, uncertifiable {}, error {}",
            self.rows, self.pass, self.vacuous, self.fail, self.uncertifiable, self.errors
        )?;
        for (t, st) in &self.by_theorem {
            writeln!(
                f,
                "  {t}: {} rows, min ratio {:.6}, mean ratio {:.6}, min bound {:.6}",
                st.rows, st.min_ratio, st.mean_ratio, st.min_bound
            )?;
        }
        Ok(())
    }
}

/// Certifies every instance on every grid point with every
/// (algorithm, mode) pair. Grid points with `k > V` are skipped. Rows come
/// out ordered by instance, then grid point, then setting.
pub fn certify_corpus(
    corpus: &[Instance],
    grid: &[(usize, usize)],
    settings: &[(Algorithm, RemovalMode)],
    options: &CertifyOptions,
) -> (Vec<CertificationResult>, Summary) {
    let rows: Vec<CertificationResult> = corpus
        .par_iter()
        .flat_map_iter(|inst| {
            let v = inst.function.ground_set().len();
            grid.iter()
                .filter(move |&&(k, _)| k <= v)
                .flat_map(move |&(k, tau)| {
                    settings.iter().map(move |&(alg, mode)| {
                        certify_instance(&inst.id, &inst.function, &inst.report, k, tau, alg, mode, options)
                    })
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let summary = Summary::from_rows(&rows);
    (rows, summary)
}

fn num(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| format!("{v:.6}"))
}

pub const CSV_HEADER: [&str; 17] = [
    "instance_id",
    "family",
    "V",
    "k",
    "tau",
    "mode",
    "algorithm",
    "alpha",
    "mu1",
    "mu2",
    "mu3",
    "theorem",
    "bound",
    "g_alg",
    "g_opt",
    "ratio",
    "verdict",
];

pub fn results_to_csv(rows: &[CertificationResult]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::InvalidInput(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        let ratio = match (r.ratio(), r.g_opt) {
            (Some(x), _) => format!("{x:.6}"),
            (None, Some(_)) => "undefined".to_string(),
            (None, None) => "NA".to_string(),
        };
        w.write_record([
            r.instance_id.clone(),
            r.family.clone(),
            r.v.to_string(),
            r.k.to_string(),
            r.tau.to_string(),
            r.mode.to_string(),
            r.algorithm.to_string(),
            num(r.constant(PropertyReport::alpha_value)),
            num(r.constant(PropertyReport::mu1_value)),
            num(r.constant(PropertyReport::mu2_value)),
            num(r.constant(PropertyReport::mu3_value)),
            r.theorem.map_or_else(|| "NA".to_string(), |t| t.to_string()),
            num(r.bound),
            num(r.g_alg),
            num(r.g_opt),
            ratio,
            r.verdict.label().to_string(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::{make_ssg_adversarial, table3};

    fn report(f: &SequenceFunction) -> PropertyReport {
        assumption_report(f, f.ground_set().len(), &Budget::default()).unwrap()
    }

    fn run(f: &SequenceFunction, k: usize, tau: usize, alg: Algorithm, mode: RemovalMode) -> CertificationResult {
        let v = f.ground_set().len();
        let len = if v <= 5 { v } else { 4 };
        let report = assumption_report(f, len, &Budget::default()).unwrap();
        certify_instance("x", f, &report, k, tau, alg, mode, &CertifyOptions::default())
    }

    #[test]
    fn exact_instance_uses_theorem1() {
        let gs = GroundSet::numbered(5).unwrap();
        let f = SequenceFunction::discounted_additive(gs, vec![1.0; 5], vec![1.0, 0.9, 0.7, 0.4, 0.2]).unwrap();
        let r = run(&f, 4, 1, Algorithm::RobustContiguous, RemovalMode::Contiguous);
        assert_eq!(r.theorem, Some(Theorem::T1));
        assert!((r.bound.unwrap() - 0.3273).abs() < 1e-4);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn ssg_fails_on_adversarial() {
        let f = make_ssg_adversarial(3, 0.01).unwrap();
        let r = run(&f, 3, 1, Algorithm::Ssg, RemovalMode::Arbitrary);
        assert!((r.g_alg.unwrap() - 0.02).abs() < 1e-12);
        assert!((r.g_opt.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.ratio().unwrap() - 0.03).abs() < 1e-12);
        assert!(matches!(r.verdict, Verdict::Uncertifiable(_)));

        let r = run(&f, 3, 1, Algorithm::RobustArbitrary, RemovalMode::Arbitrary);
        assert_eq!(r.theorem, Some(Theorem::T6));
        assert!((r.ratio().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn forced_exact_citation_on_table3_fails() {
        let f = table3();
        let opts = CertifyOptions {
            force_theorem: Some(Theorem::T1),
            ..CertifyOptions::default()
        };
        let r = certify_instance("t3", &f, &report(&f), 2, 1, Algorithm::RobustContiguous, RemovalMode::Contiguous, &opts);
        assert!(r.verdict.is_failure());
        let r = run(&f, 2, 1, Algorithm::RobustContiguous, RemovalMode::Contiguous);
        assert_ne!(r.theorem, Some(Theorem::T1));
    }

    #[test]
    fn everything_removed_is_vacuous() {
        let gs = GroundSet::numbered(3).unwrap();
        let f = SequenceFunction::discounted_additive(gs, vec![1.0; 3], vec![1.0; 3]).unwrap();
        let r = run(&f, 2, 2, Algorithm::RobustArbitrary, RemovalMode::Arbitrary);
        assert_eq!(r.verdict, Verdict::VacuousPass);
        assert_eq!(r.ratio(), None);
    }

    #[test]
    fn corpus_is_reproducible() {
        let spec = CorpusSpec::new(Family::DiscountedAdditive, 6, 3, 4, 7);
        let a = generate_corpus(&spec, &Budget::default()).unwrap();
        let b = generate_corpus(&spec, &Budget::default()).unwrap();
        assert_eq!(a.instances.len(), 6);
        assert!(a.instances.iter().all(|i| i.report.holds(Assumption::A1) && i.report.holds(Assumption::A2)));
        let opts = CertifyOptions::default();
        let settings = [(Algorithm::RobustContiguous, RemovalMode::Contiguous)];
        let (ra, sa) = certify_corpus(&a.instances, &grid(2, 3), &settings, &opts);
        let (rb, _) = certify_corpus(&b.instances, &grid(2, 3), &settings, &opts);
        assert_eq!(results_to_csv(&ra).unwrap(), results_to_csv(&rb).unwrap());
        for r in &ra {
            if let Some(why) = r.verdict.reason() {
                panic!("{} k={} tau={}: {why}", r.instance_id, r.k, r.tau);
            }
        }
        assert_eq!(sa.fail, 0);
        assert_eq!(sa.rows, 18);
    }

    #[test]
    fn empty_corpus() {
        let (rows, s) = certify_corpus(&[], &grid(2, 4), &[(Algorithm::Ssg, RemovalMode::Arbitrary)], &CertifyOptions::default());
        assert!(rows.is_empty());
        assert_eq!(s.rows, 0);
    }

    #[test]
    fn theorem_names_parse() {
        for t in Theorem::ALL {
            assert_eq!(t.name().to_lowercase().parse::<Theorem>().unwrap(), t);
        }
    }

    #[test]
    fn csv_header() {
        let f = table3();
        let r = run(&f, 2, 1, Algorithm::RobustArbitrary, RemovalMode::Arbitrary);
        let csv = results_to_csv(&[r]).unwrap();
        assert!(csv.starts_with("instance_id,family,V,k,tau,mode,algorithm,alpha,mu1,mu2,mu3,theorem,bound,g_alg,g_opt,ratio,verdict\n"));
    }
}
