//! Command-line surface: load systems, abstract models, and graphs from
//! JSON files, compute diagrams, run structural tests, infer graphs, and
//! report second-law chains.
//!
//! Exit codes: 0 when the computation succeeds (and, for tests, the tested
//! property holds), 1 when a tested property fails, 2 on any error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use infodiag::algebra::AlgebraBackend;
use infodiag::graph::{candidate_smallest_graph, test_markov_chain, test_mrf_diagram};
use infodiag::prob::{shared_transition_chains, Functional, LogBase, ProbBackend};
use infodiag::{Backend, ConditionalPartition, Evaluator, Tolerance, VarSubset};

use infodiag_cli::input::{
    load, parse_blocks, parse_indices, GraphFile, ModelFile, SecondLawFile, SystemFile,
};
use infodiag_cli::report::{
    AtomRow, Cell, DiagramReport, Format, InferReport, SecondLawReport, StepRow, TestReport,
};
use infodiag_cli::CliError;

#[derive(Parser)]
#[command(name = "infodiag", version, about = "Generalized information diagrams \
for discrete probability systems and abstract algebraic models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Logarithm base for information quantities.
    #[arg(long, global = true, value_enum, default_value = "2")]
    base: BaseArg,
    /// Zero-test tolerance override (used as both the absolute and the
    /// relative threshold).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "table")]
    format: Format,
    /// Cross-check results against redundant characterizations.
    #[arg(long, global = true)]
    verify: bool,
    /// Number of worker threads for atom evaluation.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum BaseArg {
    #[value(name = "2")]
    Two,
    #[value(name = "e")]
    E,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FunctionalArg {
    Entropy,
    Kl,
    Ce,
    Abstract,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the full atom table of a diagram.
    Diagram {
        /// System file, or model file with `--functional abstract`.
        input: PathBuf,
        #[arg(long, value_enum, default_value = "entropy")]
        functional: FunctionalArg,
    },
    /// Test a structural property of a system's entropy diagram.
    Test {
        #[command(subcommand)]
        test: TestCommand,
    },
    /// Infer the candidate smallest graph from the pairwise atoms.
    InferGraph {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "entropy")]
        functional: FunctionalArg,
    },
    /// Build a pair of shared-transition chains and report the divergence
    /// and entropy series together with the collapsed atom table.
    SecondLaw { config: PathBuf },
}

#[derive(Subcommand)]
enum TestCommand {
    /// Conditional independence of two variable sets.
    Indep {
        system: PathBuf,
        /// First variable set, e.g. `1,2`.
        #[arg(long)]
        a: String,
        /// Second variable set.
        #[arg(long)]
        b: String,
        /// Conditioning set (may be empty).
        #[arg(long, default_value = "")]
        c: String,
    },
    /// Full conditional mutual independence of a partition.
    Fcmi {
        system: PathBuf,
        /// Conditioning set (may be empty).
        #[arg(long, default_value = "")]
        cond: String,
        /// Blocks separated by `;`, indices by `,`, e.g. `1,2;3`.
        #[arg(long)]
        blocks: String,
    },
    /// Markov random field property with respect to a graph file.
    Mrf {
        system: PathBuf,
        #[arg(long)]
        graph: PathBuf,
    },
    /// Markov chain property in the variable order.
    Chain { system: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    if let Some(tol) = cli.tol {
        if !(tol > 0.0) {
            return Err(CliError::Usage(format!("--tol must be positive, got {tol}")));
        }
    }
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure {jobs} jobs: {e}")))?;
    }
    let base = match cli.base {
        BaseArg::Two => LogBase::Two,
        BaseArg::E => LogBase::E,
    };

    match cli.command {
        Command::Diagram { input, functional } => {
            let out = match functional {
                FunctionalArg::Abstract => {
                    let ev = abstract_evaluator(&input, cli.verify)?;
                    abstract_diagram_report(&ev)?.render(cli.format)?
                }
                _ => {
                    let ev = prob_evaluator(&input, functional, base, cli.tol, cli.verify)?;
                    prob_diagram_report(&ev, functional, cli.base)?.render(cli.format)?
                }
            };
            print!("{out}");
            Ok(true)
        }
        Command::Test { test } => {
            let (report, holds) = run_test(test, base, cli.tol, cli.verify)?;
            print!("{}", report.render(cli.format)?);
            Ok(holds)
        }
        Command::InferGraph { input, functional } => {
            let inferred = match functional {
                FunctionalArg::Abstract => {
                    candidate_smallest_graph(&abstract_evaluator(&input, cli.verify)?)?
                }
                _ => candidate_smallest_graph(&prob_evaluator(
                    &input, functional, base, cli.tol, cli.verify,
                )?)?,
            };
            let report = InferReport {
                n: inferred.graph.num_vertices(),
                edges: inferred.graph.edges().iter().map(|&(a, b)| (a + 1, b + 1)).collect(),
                is_mrf: inferred.is_mrf,
                trivial_diagram: inferred.trivial_diagram,
                dot: inferred.graph.to_dot("inferred"),
            };
            print!("{}", report.render(cli.format)?);
            Ok(true)
        }
        Command::SecondLaw { config } => {
            let (report, holds) = run_second_law(&config, base, cli.tol, cli.verify)?;
            print!("{}", report.render(cli.format)?);
            Ok(holds)
        }
    }
}

fn prob_evaluator(
    path: &std::path::Path,
    functional: FunctionalArg,
    base: LogBase,
    tol: Option<f64>,
    verify: bool,
) -> Result<Evaluator<ProbBackend>, CliError> {
    let system = load::<SystemFile>(path)?.into_system()?;
    let functional = match functional {
        FunctionalArg::Entropy => Functional::Entropy,
        FunctionalArg::Kl => Functional::RelativeEntropy,
        FunctionalArg::Ce => Functional::CrossEntropy,
        FunctionalArg::Abstract => {
            return Err(CliError::Usage(
                "the abstract functional reads a model file, not a system file".into(),
            ))
        }
    };
    let mut backend = ProbBackend::new(Arc::new(system), functional, base)?;
    if let Some(t) = tol {
        backend = backend.with_tolerance(Tolerance { abs: t, rel: t });
    }
    Ok(Evaluator::new(backend).with_verification(verify))
}

fn abstract_evaluator(
    path: &std::path::Path,
    verify: bool,
) -> Result<Evaluator<AlgebraBackend>, CliError> {
    let backend = load::<ModelFile>(path)?.into_backend()?;
    Ok(Evaluator::new(backend).with_verification(verify))
}

fn functional_name(functional: FunctionalArg) -> &'static str {
    match functional {
        FunctionalArg::Entropy => "entropy",
        FunctionalArg::Kl => "kl",
        FunctionalArg::Ce => "ce",
        FunctionalArg::Abstract => "abstract",
    }
}

fn prob_diagram_report(
    ev: &Evaluator<ProbBackend>,
    functional: FunctionalArg,
    base: BaseArg,
) -> Result<DiagramReport, CliError> {
    let n = ev.num_vars();
    let diagram = ev.diagram()?;
    let mut rows = Vec::new();
    for (atom, &value) in diagram.entries() {
        rows.push(AtomRow {
            atom: atom.to_string(),
            vars: atom.set().iter().map(|i| i + 1).collect(),
            value: Cell::Real(value),
            zero: ev.is_zero(&value)?,
        });
    }
    let total = ev.backend().eval(VarSubset::empty(n), VarSubset::full(n))?;
    Ok(DiagramReport {
        functional: functional_name(functional).into(),
        base: if base == BaseArg::Two { "2".into() } else { "e".into() },
        rows,
        total: Cell::Real(total),
    })
}

fn abstract_diagram_report(ev: &Evaluator<AlgebraBackend>) -> Result<DiagramReport, CliError> {
    let n = ev.num_vars();
    let diagram = ev.diagram()?;
    let group = ev.backend().model().group().clone();
    let mut rows = Vec::new();
    for (atom, &value) in diagram.entries() {
        rows.push(AtomRow {
            atom: atom.to_string(),
            vars: atom.set().iter().map(|i| i + 1).collect(),
            value: Cell::Group(group.tuple(value)),
            zero: ev.is_zero(&value)?,
        });
    }
    let total = ev.backend().eval(VarSubset::empty(n), VarSubset::full(n))?;
    Ok(DiagramReport {
        functional: "abstract".into(),
        base: "-".into(),
        rows,
        total: Cell::Group(group.tuple(total)),
    })
}

fn run_test(
    test: TestCommand,
    base: LogBase,
    tol: Option<f64>,
    verify: bool,
) -> Result<(TestReport, bool), CliError> {
    let make = |path: &PathBuf| prob_evaluator(path, FunctionalArg::Entropy, base, tol, verify);
    match test {
        TestCommand::Indep { system, a, b, c } => {
            let ev = make(&system)?;
            let n = ev.num_vars();
            let (a, b, c) = (parse_indices(n, &a)?, parse_indices(n, &b)?, parse_indices(n, &c)?);
            let holds = ev.is_independent(a, b, c)?;
            Ok((
                TestReport {
                    test: format!("indep {a} vs {b} given {c}"),
                    holds,
                    violations: vec![],
                    violating_vars: vec![],
                },
                holds,
            ))
        }
        TestCommand::Fcmi { system, cond, blocks } => {
            let ev = make(&system)?;
            let n = ev.num_vars();
            let cond = parse_indices(n, &cond)?;
            let blocks = parse_blocks(n, &blocks)?;
            let partition = ConditionalPartition::new(cond, blocks)?;
            let outcome = ev.test_partition_independence(&partition)?;
            Ok((test_report("fcmi", outcome.holds, &outcome.violations), outcome.holds))
        }
        TestCommand::Mrf { system, graph } => {
            let ev = make(&system)?;
            let graph = load::<GraphFile>(&graph)?.into_graph()?;
            let outcome = test_mrf_diagram(&ev, &graph)?;
            Ok((test_report("mrf", outcome.holds, &outcome.violations), outcome.holds))
        }
        TestCommand::Chain { system } => {
            let ev = make(&system)?;
            let outcome = test_markov_chain(&ev)?;
            Ok((test_report("chain", outcome.holds, &outcome.violations), outcome.holds))
        }
    }
}

fn test_report(name: &str, holds: bool, violations: &[infodiag::Atom]) -> TestReport {
    TestReport {
        test: name.into(),
        holds,
        violations: violations.iter().map(|a| a.to_string()).collect(),
        violating_vars: violations
            .iter()
            .map(|a| a.set().iter().map(|i| i + 1).collect())
            .collect(),
    }
}

fn run_second_law(
    config: &std::path::Path,
    base: LogBase,
    tol: Option<f64>,
    verify: bool,
) -> Result<(SecondLawReport, bool), CliError> {
    let (p1, q1, transitions) = load::<SecondLawFile>(config)?.into_chain_parts()?;
    let system = Arc::new(shared_transition_chains(&p1, &q1, &transitions)?);
    let n = system.num_vars();
    let mut backend = ProbBackend::new(system.clone(), Functional::RelativeEntropy, base)?;
    if let Some(t) = tol {
        backend = backend.with_tolerance(Tolerance { abs: t, rel: t });
    }
    let ev = Evaluator::new(backend).with_verification(verify);

    let mut series = Vec::new();
    for i in 0..n {
        let target = VarSubset::singleton(n, i);
        series.push(StepRow {
            step: i + 1,
            divergence: ev.interaction(VarSubset::empty(n), &[target])?,
            entropy: system.entropy(VarSubset::empty(n), target, base),
        });
    }
    let divergence_non_increasing =
        series.windows(2).all(|w| w[1].divergence <= w[0].divergence + 1e-12);
    let entropy_non_decreasing = series.windows(2).all(|w| w[1].entropy >= w[0].entropy - 1e-12);

    let diagram = ev.diagram()?;
    let mut atoms = Vec::new();
    let mut collapsed = true;
    for (atom, &value) in diagram.entries() {
        let zero = ev.is_zero(&value)?;
        // The theorem: every atom not touching the first variable vanishes.
        if !atom.set().contains(0) && !zero {
            collapsed = false;
        }
        atoms.push(AtomRow {
            atom: atom.to_string(),
            vars: atom.set().iter().map(|i| i + 1).collect(),
            value: Cell::Real(value),
            zero,
        });
    }
    let holds = collapsed && divergence_non_increasing;
    Ok((
        SecondLawReport {
            series,
            divergence_non_increasing,
            entropy_non_decreasing,
            collapsed,
            atoms,
        },
        holds,
    ))
}
