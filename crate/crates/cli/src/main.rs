use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use seqsub::algorithms::Algorithm;
use seqsub::bounds::{self, Breakdown, Table2, Variant};
use seqsub::certify::{
    self, certify_corpus, generate_corpus, CertifyOptions, CorpusSpec, Family, Instance, Profile, Theorem,
};
use seqsub::function::{builtin, load_instance, table3};
use seqsub::oracles::{worst_removal, OracleConfig, RemovalMode, RemovalModel};
use seqsub::properties::{assumption_report, mu1_constant, Budget, Constant, PropertyReport, Witness};
use seqsub::{Error, SequenceFunction, SequenceObjective};

mod report;

use report::{Format, Table};

#[derive(Parser)]
#[command(name = "seqsub", version, about = "Robust sequence-submodular maximization toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
struct Common {
    /// Write the main result to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Plain)]
    format: Format,

    /// Seed for generated corpora.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,

    /// Sequences an optimal-sequence search may enumerate.
    #[arg(long, global = true, default_value_t = 200_000, value_parser = clap::value_parser!(u64).range(1..))]
    budget_sequences: u64,

    /// Removal candidates a worst-case search may enumerate.
    #[arg(long, global = true, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    budget_subsets: u64,

    /// Sequence pairs a property scan may index.
    #[arg(long, global = true, default_value_t = 4_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    budget_pairs: u64,
}

impl Common {
    fn budget(&self) -> Budget {
        Budget {
            sequences: self.budget_sequences as u128,
            subsets: self.budget_subsets as u128,
            pairs: self.budget_pairs as u128,
        }
    }

    fn oracle(&self) -> OracleConfig {
        OracleConfig {
            budget: self.budget(),
            symmetry: true,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Measure monotonicity and submodularity constants.
    Check {
        /// Instance file or builtin:NAME.
        instance: String,
        /// Only scan sequences with at most this many elements.
        #[arg(long)]
        max_len: Option<usize>,
    },
    /// Run a greedy algorithm and attack its output.
    Run {
        instance: String,
        #[arg(long, value_enum)]
        alg: AlgArg,
        #[arg(short, long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        tau: usize,
        /// Removal mode; defaults to contiguous for robust-contiguous.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Certify bounds on a generated corpus or on given instances.
    Certify {
        /// Instance files or builtin URIs; a corpus is generated when empty.
        instances: Vec<String>,
        #[arg(long, value_enum, default_value_t = FamilyArg::DiscountedAdditive)]
        family: FamilyArg,
        #[arg(long, value_enum, default_value_t = ProfileArg::Certified)]
        profile: ProfileArg,
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long, default_value_t = 3)]
        v_min: usize,
        #[arg(long, default_value_t = 5)]
        v_max: usize,
        #[arg(long, default_value_t = 2)]
        k_min: usize,
        #[arg(long, default_value_t = 4)]
        k_max: usize,
        /// Algorithms to certify, each under its own removal mode.
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [AlgArg::RobustContiguous, AlgArg::RobustArbitrary])]
        alg: Vec<AlgArg>,
        /// Cite this bound instead of selecting one (t1, t2, ..., t6).
        #[arg(long)]
        force_theorem: Option<String>,
        /// Property scans cover at most this many elements.
        #[arg(long)]
        max_len: Option<usize>,
    },
    /// T2 ratios over the standard τ × k grid.
    Table2 {
        /// Compare against a CSV grid; mismatches beyond 0.0005 fail.
        #[arg(long)]
        compare: Option<PathBuf>,
    },
    /// Show on the built-in table that element-level diminishing returns do
    /// not imply sequence-level diminishing returns.
    Counterexample,
    /// Evaluate a closed-form ratio.
    Bounds {
        #[arg(value_enum)]
        which: BoundArg,
        #[arg(short, long)]
        k: Option<usize>,
        #[arg(long)]
        tau: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        mu1: f64,
        #[arg(long, default_value_t = 1.0)]
        mu2: f64,
        #[arg(long, default_value_t = 1.0)]
        mu3: f64,
        /// Prefix length for `prefix`.
        #[arg(long)]
        i: Option<usize>,
        /// k' for `concentration`.
        #[arg(long)]
        kprime: Option<usize>,
        /// Value share c for `concentration`.
        #[arg(long)]
        c: Option<f64>,
        /// Also print the formula's intermediate values.
        #[arg(long)]
        breakdown: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgArg {
    Ssg,
    RobustContiguous,
    RobustArbitrary,
}

impl AlgArg {
    fn algorithm(self) -> Algorithm {
        match self {
            AlgArg::Ssg => Algorithm::Ssg,
            AlgArg::RobustContiguous => Algorithm::RobustContiguous,
            AlgArg::RobustArbitrary => Algorithm::RobustArbitrary,
        }
    }

    fn default_mode(self) -> RemovalMode {
        match self {
            AlgArg::RobustContiguous => RemovalMode::Contiguous,
            _ => RemovalMode::Arbitrary,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Arbitrary,
    Contiguous,
}

impl From<ModeArg> for RemovalMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Arbitrary => RemovalMode::Arbitrary,
            ModeArg::Contiguous => RemovalMode::Contiguous,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    DiscountedAdditive,
    DetectionDecay,
    TabularRandom,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Certified,
    General,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundArg {
    T1,
    T2,
    T3,
    T4a,
    T4b,
    T5a,
    T5b,
    T6,
    Prefix,
    Concentration,
}

/// Exit status: success, a verification failure, or an operational error.
enum Failure {
    Verification(String),
    Operational(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Operational(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Operational(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check { ref instance, max_len } => cmd_check(&cli.common, instance, max_len),
        Command::Run {
            ref instance,
            alg,
            k,
            tau,
            mode,
        } => cmd_run(&cli.common, instance, alg, k, tau, mode.map(Into::into)),
        Command::Certify {
            ref instances,
            family,
            profile,
            count,
            v_min,
            v_max,
            k_min,
            k_max,
            ref alg,
            ref force_theorem,
            max_len,
        } => {
            let spec = CorpusSpec {
                family: match family {
                    FamilyArg::DiscountedAdditive => Family::DiscountedAdditive,
                    FamilyArg::DetectionDecay => Family::DetectionDecay,
                    FamilyArg::TabularRandom => Family::TabularRandom,
                },
                count,
                v_min,
                v_max,
                seed: cli.common.seed,
                profile: match profile {
                    ProfileArg::Certified => Profile::Certified,
                    ProfileArg::General => Profile::General,
                },
            };
            cmd_certify(&cli.common, instances, spec, (k_min, k_max), alg, force_theorem.as_deref(), max_len)
        }
        Command::Table2 { ref compare } => cmd_table2(&cli.common, compare.as_deref()),
        Command::Counterexample => cmd_counterexample(&cli.common),
        Command::Bounds {
            which,
            k,
            tau,
            alpha,
            mu1,
            mu2,
            mu3,
            i,
            kprime,
            c,
            breakdown,
        } => cmd_bounds(
            &cli.common,
            which,
            BoundParams {
                k,
                tau,
                alpha,
                mu1,
                mu2,
                mu3,
                i,
                kprime,
                c,
            },
            breakdown,
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Operational(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn emit(common: &Common, text: &str) -> CmdResult {
    match &common.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Operational(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(source: &str) -> Result<SequenceFunction, Failure> {
    if source.starts_with("builtin:") {
        return Ok(builtin(source)?);
    }
    let text = std::fs::read_to_string(source).map_err(|e| Failure::Operational(format!("{source}: {e}")))?;
    load_instance(&text).map_err(|e| Failure::Operational(format!("{source}: {e}")))
}

fn fmt6(x: f64) -> String {
    format!("{x:.6}")
}

fn fmt_witness(gs: &seqsub::GroundSet, w: &Witness) -> String {
    let mut s = format!("S1={} S2={}", gs.format(&w.s1), gs.format(&w.s2));
    if let Some(s3) = &w.s3 {
        let _ = write!(s, " S3={}", gs.format(s3));
    }
    let _ = write!(s, " ({} vs {})", fmt6(w.lhs), fmt6(w.rhs));
    s
}

fn report_table(f: &SequenceFunction, r: &PropertyReport) -> Table {
    let gs = f.ground_set();
    let mut t = Table::new(["property", "value", "exact", "witness"]);
    t.row([
        "forward_monotone".to_string(),
        r.forward_monotone.to_string(),
        r.forward_monotone.to_string(),
        r.forward_witness.as_ref().map(|w| fmt_witness(gs, w)).unwrap_or_default(),
    ]);
    let constants: [(&str, &Option<Constant>); 4] =
        [("alpha", &r.alpha), ("mu1", &r.mu1), ("mu2", &r.mu2), ("mu3", &r.mu3)];
    for (name, c) in constants {
        match c {
            Some(c) => t.row([
                name.to_string(),
                fmt6(c.value),
                c.is_exact().to_string(),
                c.witness.as_ref().map(|w| fmt_witness(gs, w)).unwrap_or_default(),
            ]),
            None => t.row([name.to_string(), "NA".into(), "NA".into(), String::new()]),
        }
    }
    let assumptions: Vec<String> = r.assumptions().iter().map(|a| a.to_string()).collect();
    t.row(["assumptions".into(), assumptions.join(" "), String::new(), String::new()]);
    t.row([
        "scan".into(),
        format!("max_len {}", r.max_len),
        r.complete.to_string(),
        String::new(),
    ]);
    t
}

fn classification(r: &PropertyReport) -> &'static str {
    if !r.forward_monotone {
        "NOT forward-monotone"
    } else if r.element_sequence_submodular() && !r.sequence_submodular() {
        "element-sequence-submodular but NOT sequence-submodular"
    } else if r.sequence_submodular() && r.general_sequence_submodular() {
        "sequence-submodular and general-sequence-submodular"
    } else if r.sequence_submodular() {
        "sequence-submodular but NOT general-sequence-submodular"
    } else {
        "NOT element-sequence-submodular"
    }
}

fn cmd_check(common: &Common, source: &str, max_len: Option<usize>) -> CmdResult {
    let f = load(source)?;
    let max_len = max_len.unwrap_or(f.ground_set().len());
    let r = assumption_report(&f, max_len, &common.budget())?;
    let mut text = report_table(&f, &r).render(common.format);
    if common.format == Format::Plain {
        let _ = writeln!(text, "finding: {}", classification(&r));
        if r.forward_monotone {
            let bwd = if r.backward_monotone() { "backward-monotone" } else { "NOT backward-monotone" };
            let _ = writeln!(text, "finding: {bwd}");
        }
    }
    emit(common, &text)
}

fn cmd_run(common: &Common, source: &str, alg: AlgArg, k: usize, tau: usize, mode: Option<RemovalMode>) -> CmdResult {
    let f = load(source)?;
    let gs = f.ground_set();
    let algorithm = alg.algorithm();
    let trace = algorithm.run(&f, k, tau)?;
    let mode = mode.unwrap_or(alg.default_mode());
    if common.format == Format::Csv {
        return emit(common, &trace.to_csv(gs)?);
    }
    let mut t = Table::new(["step", "phase", "candidate", "score", "chosen"]);
    for step in &trace.steps {
        for &(e, score) in &step.scores {
            t.row([
                step.index.to_string(),
                step.phase.to_string(),
                gs.name(e).to_string(),
                fmt6(score),
                (e == step.chosen).to_string(),
            ]);
        }
    }
    let mut text = String::new();
    let _ = writeln!(text, "algorithm: {algorithm}  k: {k}  tau: {tau}  mode: {mode}");
    text.push_str(&t.render(common.format));
    let _ = writeln!(text, "S = {}", gs.format(&trace.chosen));
    if trace.phase_boundary < trace.chosen.len() {
        let _ = writeln!(text, "S1 = {}  S2 = {}", gs.format(&trace.step1()), gs.format(&trace.step2()));
    }
    let _ = writeln!(text, "h(S) = {}", fmt6(f.eval(&trace.chosen)?));
    if tau > 0 {
        let r = worst_removal(&f, &trace.chosen, RemovalModel { tau, mode }, &common.budget())?;
        let _ = writeln!(text, "removed = {}", gs.format_set(r.removed));
        let _ = writeln!(text, "g_{tau}(S) = {}", fmt6(r.value));
    }
    emit(common, &text)
}

fn cmd_certify(
    common: &Common,
    sources: &[String],
    spec: CorpusSpec,
    (k_min, k_max): (usize, usize),
    algs: &[AlgArg],
    force: Option<&str>,
    max_len: Option<usize>,
) -> CmdResult {
    let start = Instant::now();
    let budget = common.budget();
    let instances: Vec<Instance> = if sources.is_empty() {
        let corpus = generate_corpus(&spec, &budget)?;
        eprintln!(
            "generated {} {} instances ({} discarded)",
            corpus.instances.len(),
            spec.family.name(),
            corpus.discarded
        );
        corpus.instances
    } else {
        sources
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let f = load(s)?;
                let len = max_len.unwrap_or(f.ground_set().len()).min(f.ground_set().len());
                let report = assumption_report(&f, len, &budget)?;
                let id = Path::new(s)
                    .file_stem()
                    .map(|x| x.to_string_lossy().into_owned())
                    .filter(|_| !s.starts_with("builtin:"))
                    .unwrap_or_else(|| format!("instance-{i}"));
                Ok(Instance {
                    id,
                    function: f,
                    report,
                })
            })
            .collect::<Result<_, Failure>>()?
    };
    let options = CertifyOptions {
        oracle: common.oracle(),
        force_theorem: force.map(str::parse::<Theorem>).transpose()?,
    };
    let settings: Vec<_> = algs.iter().map(|a| (a.algorithm(), a.default_mode())).collect();
    let (rows, summary) = certify_corpus(&instances, &certify::grid(k_min, k_max), &settings, &options);
    let text = match common.format {
        Format::Csv => certify::results_to_csv(&rows)?,
        f => {
            let mut t = Table::new(certify::CSV_HEADER);
            let csv = certify::results_to_csv(&rows)?;
            for line in csv.lines().skip(1) {
                t.row(line.split(',').map(str::to_string));
            }
            t.render(f)
        }
    };
    if common.out.is_some() {
        emit(common, &certify::results_to_csv(&rows)?)?;
    } else {
        emit(common, &text)?;
    }
    eprint!("{summary}");
    for r in &rows {
        if let Some(why) = r.verdict.reason() {
            eprintln!(
                "  {} {} k={} tau={} {}: {why}",
                r.instance_id,
                r.algorithm,
                r.k,
                r.tau,
                r.verdict.label()
            );
        }
    }
    eprintln!("elapsed {:.3}s", start.elapsed().as_secs_f64());
    if summary.fail > 0 {
        return Err(Failure::Verification(format!("{} failed rows", summary.fail)));
    }
    if summary.errors > 0 {
        return Err(Failure::Operational(format!("{} rows hit errors", summary.errors)));
    }
    Ok(())
}

fn cmd_table2(common: &Common, compare: Option<&Path>) -> CmdResult {
    let grid = bounds::table2_grid();
    let text = match common.format {
        Format::Csv | Format::Plain => grid.to_csv(),
        Format::Markdown => {
            let mut header = vec!["tau \\ k".to_string()];
            header.extend(grid.ks.iter().map(|k| k.to_string()));
            let mut t = Table::new(header);
            for (tau, row) in grid.taus.iter().zip(&grid.values) {
                t.row(std::iter::once(tau.to_string()).chain(row.iter().map(|v| format!("{v:.3}"))));
            }
            t.render(Format::Markdown)
        }
    };
    emit(common, &text)?;
    if let Some(path) = compare {
        let golden_text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Operational(format!("{}: {e}", path.display())))?;
        let golden = Table2::from_csv(&golden_text).map_err(|e| Failure::Operational(format!("{}: {e}", path.display())))?;
        let mismatches = grid.compare(&golden, 5e-4);
        if !mismatches.is_empty() {
            for m in &mismatches {
                eprintln!("mismatch tau={} k={}: expected {} got {:.3}", m.tau, m.k, m.expected, m.actual);
            }
            return Err(Failure::Verification(format!("{} mismatched cells", mismatches.len())));
        }
        eprintln!("all {} cells match", golden.taus.len() * golden.ks.len());
    }
    Ok(())
}

fn cmd_counterexample(common: &Common) -> CmdResult {
    let f = table3();
    let gs = f.ground_set();
    let mu1 = mu1_constant(&f, gs.len(), &common.budget())?;
    let s1 = seqsub::Sequence::empty();
    let s2 = f.seq(&["v1"])?;
    let s3 = f.seq(&["v2", "v3"])?;
    let lhs = f.marginal(&s1, &s3)?;
    let rhs = f.marginal(&s2, &s3)?;
    let mut text = String::new();
    let _ = writeln!(text, "instance: builtin:table3");
    let _ = writeln!(
        text,
        "mu1 = {} over all prefix pairs (element-sequence-submodular: {})",
        fmt6(mu1.value),
        mu1.is_exact()
    );
    let _ = writeln!(text, "S1 = {}  S2 = {}  S3 = {}", gs.format(&s1), gs.format(&s2), gs.format(&s3));
    let _ = writeln!(
        text,
        "h(S3 | S1) = {lhs} < h(S3 | S2) = {rhs}  (S1 is a prefix of S2)"
    );
    let violated = lhs < rhs - 1e-9;
    let _ = writeln!(
        text,
        "finding: element-sequence-submodularity does {}imply sequence-submodularity",
        if violated && mu1.is_exact() { "NOT " } else { "" }
    );
    emit(common, &text)?;
    let exact = (lhs - 1.2).abs() <= 1e-9 && (rhs - 2.0).abs() <= 1e-9;
    if mu1.is_exact() && violated && exact {
        Ok(())
    } else {
        Err(Failure::Verification("the counterexample did not reproduce".into()))
    }
}

struct BoundParams {
    k: Option<usize>,
    tau: Option<usize>,
    alpha: f64,
    mu1: f64,
    mu2: f64,
    mu3: f64,
    i: Option<usize>,
    kprime: Option<usize>,
    c: Option<f64>,
}

fn need<T>(x: Option<T>, flag: &str) -> Result<T, Failure> {
    x.ok_or_else(|| Failure::Operational(format!("this bound needs --{flag}")))
}

fn cmd_bounds(common: &Common, which: BoundArg, p: BoundParams, breakdown: bool) -> CmdResult {
    let plain = |value: f64| Breakdown { value, terms: vec![] };
    let b = match which {
        BoundArg::T1 => bounds::theorem1_breakdown(need(p.k, "k")?)?,
        BoundArg::T2 => bounds::theorem2_breakdown(need(p.k, "k")?, need(p.tau, "tau")?)?,
        BoundArg::T3 => plain(bounds::ratio_theorem3(need(p.tau, "tau")?)?),
        BoundArg::T4a => bounds::theorem4_breakdown(need(p.k, "k")?, p.mu1, p.mu2, p.alpha, Variant::A)?,
        BoundArg::T4b => bounds::theorem4_breakdown(p.k.unwrap_or(3), p.mu1, p.mu2, p.alpha, Variant::B)?,
        BoundArg::T5a => {
            bounds::theorem5_breakdown(need(p.k, "k")?, need(p.tau, "tau")?, p.mu1, p.mu2, p.alpha, Variant::A)?
        }
        BoundArg::T5b => {
            let tau = need(p.tau, "tau")?;
            bounds::theorem5_breakdown(p.k.unwrap_or(tau), tau, p.mu1, p.mu2, p.alpha, Variant::B)?
        }
        BoundArg::T6 => plain(bounds::ratio_theorem6(need(p.tau, "tau")?, p.mu1, p.mu3, p.alpha)?),
        BoundArg::Prefix => plain(bounds::ssg_prefix_bound(need(p.i, "i")?, need(p.k, "k")?, p.mu1, p.alpha)?),
        BoundArg::Concentration => plain(bounds::concentration_bound(
            need(p.k, "k")?,
            need(p.kprime, "kprime")?,
            need(p.c, "c")?,
            p.mu1,
        )?),
    };
    let mut text = format!("{}\n", fmt6(b.value));
    if breakdown {
        for (name, v) in &b.terms {
            let _ = writeln!(text, "{name} = {}", fmt6(*v));
        }
    }
    emit(common, &text)
}
