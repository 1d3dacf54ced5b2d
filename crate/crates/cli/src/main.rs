//! The `coarsen` command-line tool.
//!
//! Subcommands mirror the library's phases: `ground` and `wmc` exercise a
//! single theory document, `query` asks for probabilities, `check`
//! classifies the abstraction a mapping induces between two theories,
//! `weaken` translates evidence across a mapping, `derive` searches a
//! hypothesis space, and `selftest` runs randomized consistency checks.
//!
//! Exit codes: 0 when the requested property holds (or the command simply
//! succeeded), 1 when a check or search came back negative, 2 on errors —
//! unreadable documents, foreign atoms, zero-measure evidence, or a
//! verdict the enumeration cap prevented.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use coarsen::checker::{classify, AbstractionClass, Verdict};
use coarsen::derivation::{
    abstract_clause, search, search_all, DerivationOutcome, DerivedAbstraction, SEARCH_ORDER,
};
use coarsen::evidence::{concretize, is_definable, query_high_level, weaken, Evidence};
use coarsen::gen;
use coarsen::wmc::{conditional, probability, wmc, wmc_enumerate};
use coarsen::{Literal, WeightFn, DEFAULT_ENUMERATION_CAP};
use coarsen_cli::document::{parse_mapping, parse_space, parse_theory, TheoryDocument};
use coarsen_cli::phi::parse_phi;
use coarsen_cli::report::{class_key, render_machine, render_table, render_value, MachineReport};
use rand::Rng;

/// Environment variable consulted for the default enumeration cap.
const CAP_ENV: &str = "COARSEN_CAP";

#[derive(Parser)]
#[command(
    name = "coarsen",
    version,
    about = "Verify and derive abstractions of weighted first-order theories"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a theory document's grounded sentences, one per line.
    Ground {
        /// Theory document to ground.
        #[arg(long)]
        theory: PathBuf,
    },
    /// Weighted model count of a theory document.
    Wmc {
        /// Theory document to count.
        #[arg(long)]
        theory: PathBuf,
        /// Count only models satisfying this formula (infix syntax).
        #[arg(long)]
        phi: Option<String>,
        #[command(flatten)]
        mode: ModeArg,
    },
    /// Probability of a formula, optionally conditioned on evidence.
    Query {
        /// Theory document to query.
        #[arg(long)]
        theory: PathBuf,
        /// Query formula (infix syntax).
        #[arg(long)]
        phi: String,
        /// Evidence formula to condition on (infix syntax).
        #[arg(long)]
        evidence: Option<String>,
        #[command(flatten)]
        mode: ModeArg,
    },
    /// Classify the abstraction a mapping induces between two theories.
    ///
    /// Prints the full report, then gates the exit code: by default on
    /// soundness and completeness, with --weighted on their weighted
    /// counterparts, with --weak on weak exactness, and with --exact on
    /// weighted exactness.
    Check {
        /// Low-level theory document.
        #[arg(long)]
        low: PathBuf,
        /// High-level theory document.
        #[arg(long)]
        high: PathBuf,
        /// Refinement-mapping document.
        #[arg(long)]
        map: PathBuf,
        /// Gate on weighted soundness and weighted completeness.
        #[arg(long, conflicts_with_all = ["exact", "weak"])]
        weighted: bool,
        /// Gate on weighted exactness.
        #[arg(long, conflicts_with = "weak")]
        exact: bool,
        /// Gate on weak exactness.
        #[arg(long)]
        weak: bool,
        /// Report rendering.
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[command(flatten)]
        mode: ModeArg,
        #[command(flatten)]
        cap: CapArg,
    },
    /// Translate low-level evidence across a mapping.
    ///
    /// Prints the evidence, its high-level counterpart, the induced
    /// weakening, and whether the evidence is definable; with --phi, also
    /// answers the high-level query given the evidence.
    Weaken {
        /// Low-level theory document.
        #[arg(long)]
        low: PathBuf,
        /// High-level theory document.
        #[arg(long)]
        high: PathBuf,
        /// Refinement-mapping document.
        #[arg(long)]
        map: PathBuf,
        /// Low-level evidence literal (infix syntax).
        #[arg(long)]
        evidence: String,
        /// High-level query formula (infix syntax).
        #[arg(long)]
        phi: Option<String>,
        #[command(flatten)]
        mode: ModeArg,
    },
    /// Search a hypothesis space for an abstraction of a theory.
    Derive {
        /// Low-level theory document.
        #[arg(long)]
        low: PathBuf,
        /// Hypothesis-space document.
        #[arg(long)]
        space: PathBuf,
        /// List every certified candidate instead of the first.
        #[arg(long)]
        all: bool,
        #[command(flatten)]
        mode: ModeArg,
        #[command(flatten)]
        cap: CapArg,
    },
    /// Run randomized consistency checks of the library.
    Selftest {
        /// Seed for the random generator.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Cases per suite.
        #[arg(long, default_value_t = 60)]
        cases: u32,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Exact rational arithmetic.
    Rational,
    /// Floating-point arithmetic.
    Float,
}

#[derive(Args)]
struct ModeArg {
    /// Arithmetic mode.
    #[arg(long, value_enum, default_value_t = Mode::Rational)]
    mode: Mode,
}

#[derive(Args)]
struct CapArg {
    /// Enumeration cap: exhaustive checks are skipped beyond this many
    /// atoms (defaults to the COARSEN_CAP variable, then 24).
    #[arg(long)]
    cap: Option<u32>,
}

impl CapArg {
    fn resolve(&self) -> Result<u32> {
        if let Some(cap) = self.cap {
            return Ok(cap);
        }
        match std::env::var(CAP_ENV) {
            Ok(text) => text
                .parse()
                .with_context(|| format!("{CAP_ENV} must be a number, found `{text}`")),
            Err(std::env::VarError::NotPresent) => Ok(DEFAULT_ENUMERATION_CAP),
            Err(err) => Err(anyhow!(err)).context(CAP_ENV),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Human-readable table.
    Table,
    /// Machine-readable key/value document.
    Machine,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Ground { theory } => cmd_ground(&theory),
        Command::Wmc { theory, phi, mode } => cmd_wmc(&theory, phi.as_deref(), mode.mode),
        Command::Query { theory, phi, evidence, mode } => {
            cmd_query(&theory, &phi, evidence.as_deref(), mode.mode)
        }
        Command::Check { low, high, map, weighted, exact, weak, format, mode, cap } => {
            cmd_check(&low, &high, &map, weighted, exact, weak, format, mode.mode, &cap)
        }
        Command::Weaken { low, high, map, evidence, phi, mode } => {
            cmd_weaken(&low, &high, &map, &evidence, phi.as_deref(), mode.mode)
        }
        Command::Derive { low, space, all, mode, cap } => {
            cmd_derive(&low, &space, all, mode.mode, &cap)
        }
        Command::Selftest { seed, cases } => cmd_selftest(seed, cases),
    }
}

fn load_theory(path: &Path) -> Result<TheoryDocument> {
    let src = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    parse_theory(&src).with_context(|| path.display().to_string())
}

fn weights_for(doc: &TheoryDocument, mode: Mode) -> WeightFn {
    match mode {
        Mode::Rational => doc.weights.clone(),
        Mode::Float => doc.weights.to_float(),
    }
}

fn cmd_ground(theory: &Path) -> Result<u8> {
    let doc = load_theory(theory)?;
    for sentence in doc.theory.sentences() {
        println!("{sentence}");
    }
    Ok(0)
}

fn cmd_wmc(theory: &Path, phi: Option<&str>, mode: Mode) -> Result<u8> {
    let doc = load_theory(theory)?;
    let weights = weights_for(&doc, mode);
    let extra = phi
        .map(|text| parse_phi(text, doc.theory.vocab()))
        .transpose()
        .context("--phi")?;
    let value = wmc(&doc.theory, &weights, extra.as_ref())?;
    println!("wmc: {}", render_value(&value));
    Ok(0)
}

fn cmd_query(theory: &Path, phi: &str, evidence: Option<&str>, mode: Mode) -> Result<u8> {
    let doc = load_theory(theory)?;
    let weights = weights_for(&doc, mode);
    let phi = parse_phi(phi, doc.theory.vocab()).context("--phi")?;
    let answer = match evidence {
        Some(text) => {
            let e = parse_phi(text, doc.theory.vocab()).context("--evidence")?;
            conditional(&phi, &e, &doc.theory, &weights)?
        }
        None => probability(&phi, &doc.theory, &weights)?,
    };
    println!("probability: {}", render_value(answer.value()));
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_check(
    low: &Path,
    high: &Path,
    map: &Path,
    weighted: bool,
    exact: bool,
    weak: bool,
    format: Format,
    mode: Mode,
    cap: &CapArg,
) -> Result<u8> {
    let low_doc = load_theory(low)?;
    let high_doc = load_theory(high)?;
    let map_src = std::fs::read_to_string(map)
        .with_context(|| format!("reading {}", map.display()))?;
    let mapping = parse_mapping(&map_src, high_doc.theory.vocab(), low_doc.theory.vocab())
        .with_context(|| map.display().to_string())?;
    let wl = weights_for(&low_doc, mode);
    let wh = weights_for(&high_doc, mode);
    let cap = cap.resolve()?;

    let report = classify(&high_doc.theory, &wh, &low_doc.theory, &wl, &mapping, cap)?;
    match format {
        Format::Table => print!("{}", render_table(&report)),
        Format::Machine => print!("{}", render_machine(&MachineReport::from_report(&report))),
    }

    let gate: &[AbstractionClass] = if exact {
        &[AbstractionClass::WeightedExact]
    } else if weak {
        &[AbstractionClass::WeakExact]
    } else if weighted {
        &[AbstractionClass::WeightedSound, AbstractionClass::WeightedComplete]
    } else {
        &[AbstractionClass::Sound, AbstractionClass::Complete]
    };
    let mut any_fails = false;
    let mut any_skipped = false;
    for &class in gate {
        match report.verdict(class) {
            Verdict::Holds => {}
            Verdict::Fails(_) => any_fails = true,
            Verdict::Skipped(reason) => {
                any_skipped = true;
                eprintln!("cannot certify {class}: {reason}");
            }
        }
    }
    Ok(if any_fails {
        1
    } else if any_skipped {
        2
    } else {
        0
    })
}

fn cmd_weaken(
    low: &Path,
    high: &Path,
    map: &Path,
    evidence: &str,
    phi: Option<&str>,
    mode: Mode,
) -> Result<u8> {
    let low_doc = load_theory(low)?;
    let high_doc = load_theory(high)?;
    let map_src = std::fs::read_to_string(map)
        .with_context(|| format!("reading {}", map.display()))?;
    let mapping = parse_mapping(&map_src, high_doc.theory.vocab(), low_doc.theory.vocab())
        .with_context(|| map.display().to_string())?;

    let formula = parse_phi(evidence, low_doc.theory.vocab()).context("--evidence")?;
    let literal = formula
        .as_literal()
        .ok_or_else(|| anyhow!("--evidence must be a single literal, found `{formula}`"))?;
    let e = Evidence::new(literal, low_doc.theory.universe())?;

    let inverse = concretize(&mapping, &e)?;
    let weakening = weaken(&mapping, &e)?;
    let definable = is_definable(&mapping, &e)?;
    println!("evidence: {e}");
    println!("inverse: {inverse}");
    println!("weakening: {weakening}");
    println!("definable: {definable}");

    if let Some(text) = phi {
        let phi = parse_phi(text, high_doc.theory.vocab()).context("--phi")?;
        let wl = weights_for(&low_doc, mode);
        let wh = weights_for(&high_doc, mode);
        let (answer, query_mode) = query_high_level(
            &phi,
            &e,
            &high_doc.theory,
            &wh,
            &low_doc.theory,
            &wl,
            &mapping,
            None,
        )?;
        println!("mode: {query_mode}");
        println!("probability: {}", render_value(answer.value()));
    }
    Ok(0)
}

fn cmd_derive(low: &Path, space: &Path, all: bool, mode: Mode, cap: &CapArg) -> Result<u8> {
    let low_doc = load_theory(low)?;
    let wl = weights_for(&low_doc, mode);
    let space_src = std::fs::read_to_string(space)
        .with_context(|| format!("reading {}", space.display()))?;
    let space = parse_space(&space_src, low_doc.theory.vocab())
        .with_context(|| space.display().to_string())?;
    let cap = cap.resolve()?;

    if all {
        let (successes, tried) = search_all(&low_doc.theory, &wl, &space, cap)?;
        println!("outcome: {}", if successes.is_empty() { "failure" } else { "success" });
        println!("candidates-tried: {tried}");
        println!("search-order: {SEARCH_ORDER}");
        println!("successes: {}", successes.len());
        for (i, derived) in successes.iter().enumerate() {
            println!();
            println!("success {}:", i + 1);
            print_derived(derived, "  ");
        }
        return Ok(if successes.is_empty() { 1 } else { 0 });
    }

    let result = search(&low_doc.theory, &wl, &space, cap)?;
    println!("candidates-tried: {}", result.candidates_tried);
    println!("search-order: {}", result.search_order);
    match result.outcome {
        DerivationOutcome::Success(derived) => {
            println!("outcome: success");
            print_derived(&derived, "");
            Ok(0)
        }
        DerivationOutcome::Failure => {
            println!("outcome: failure");
            Ok(1)
        }
    }
}

/// Prints one derived abstraction: theory, mapping, weights, verdicts.
fn print_derived(derived: &DerivedAbstraction, indent: &str) {
    if derived.high.sentences().is_empty() {
        println!("{indent}high-theory: (empty)");
    } else {
        for sentence in derived.high.sentences() {
            println!("{indent}sentence: {sentence}");
        }
    }
    for atom in derived.mapping.high_universe().atoms() {
        let target = derived.mapping.target(atom).expect("every high-level atom is mapped");
        println!("{indent}map: {atom} -> {target}");
    }
    for atom in derived.mapping.high_universe().atoms() {
        let pos = Literal::pos(atom.clone());
        let neg = pos.complement();
        println!("{indent}weight: {pos} {}", render_value(&derived.weights.weight(&pos)));
        println!("{indent}weight: {neg} {}", render_value(&derived.weights.weight(&neg)));
    }
    let verdicts: Vec<String> = AbstractionClass::ALL
        .iter()
        .map(|&class| {
            let word = match derived.report.verdict(class) {
                Verdict::Holds => "holds",
                Verdict::Fails(_) => "fails",
                Verdict::Skipped(_) => "skipped",
            };
            format!("{}={}", class_key(class), word)
        })
        .collect();
    println!("{indent}report: {}", verdicts.join(" "));
}

/// Randomized consistency checks: the counting engine against the
/// enumeration oracle, the by-construction instance families against
/// their checkers, and clause abstraction against weighted exactness.
fn cmd_selftest(seed: u64, cases: u32) -> Result<u8> {
    use coarsen::checker::{check_complete, check_sound, check_weighted_exact};

    let mut rng = gen::seeded(seed);

    for case in 0..cases {
        let n = rng.gen_range(2..=8);
        let vocab = gen::prop_vocab("x", n);
        let theory = gen::random_satisfiable_theory(&mut rng, &vocab, n, 3);
        let weights = gen::random_positive_weights(&mut rng, theory.universe());
        let fast = wmc(&theory, &weights, None)?;
        let slow = wmc_enumerate(&theory, &weights, None)?;
        if fast != slow {
            eprintln!("selftest: counter disagrees with enumeration (case {case}, seed {seed})");
            return Ok(1);
        }
    }
    println!("ok: counter agrees with enumeration ({cases} cases)");

    for case in 0..cases {
        let instance = gen::sound_instance(&mut rng, 2, 5);
        let verdict = check_sound(&instance.high, &instance.low, &instance.mapping)?;
        if !verdict.holds() {
            eprintln!("selftest: sound-by-construction instance failed (case {case}, seed {seed})");
            return Ok(1);
        }
        let instance = gen::complete_instance(&mut rng, 2, 5);
        let verdict =
            check_complete(&instance.high, &instance.low, &instance.mapping, DEFAULT_ENUMERATION_CAP)?;
        if !verdict.holds() {
            eprintln!(
                "selftest: complete-by-construction instance failed (case {case}, seed {seed})"
            );
            return Ok(1);
        }
    }
    println!("ok: constructed instances verify ({cases} cases)");

    for case in 0..cases {
        let low_n = rng.gen_range(2..=6);
        let (low, wl, lambda) = gen::eligible_clause_instance(&mut rng, low_n);
        let (high, wh, mapping) = abstract_clause(&low, &wl, &lambda, "t")?;
        let verdict =
            check_weighted_exact(&high, &wh, &low, &wl, &mapping, DEFAULT_ENUMERATION_CAP)?;
        if !verdict.holds() {
            eprintln!("selftest: clause abstraction not weighted exact (case {case}, seed {seed})");
            return Ok(1);
        }
    }
    println!("ok: clause abstractions are weighted exact ({cases} cases)");

    println!("selftest: passed (seed {seed})");
    Ok(0)
}
