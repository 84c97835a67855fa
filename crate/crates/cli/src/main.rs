use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use gcs_core::io::{self, PlotOptions, SolutionDocument};
use gcs_core::micp::Formulation;
use gcs_core::model::RecessionStatus;
use gcs_core::problems::generate::{self, CostNorm, GenConfig, SetShape};
use gcs_core::problems::{formulate, oracle_enumerate, ProblemSpec};
use gcs_core::solver::{solve_micp, solve_relaxation, BnbConfig, ConicStatus, SolveStatus};
use gcs_core::{GcsError, GcsGraph};

const EXIT_OPTIMAL: u8 = 0;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_LIMIT: u8 = 3;
const EXIT_INPUT: u8 = 4;
const EXIT_INTERNAL: u8 = 5;

#[derive(Parser)]
#[command(
    name = "gcs",
    version,
    about = "Solve optimization problems over graphs of convex sets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the mixed-integer program and write a solution document.
    Solve {
        problem: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
        /// Bound-trace CSV output.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Solution document output; stdout when absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Solve the root convex relaxation only.
    Relax {
        problem: PathBuf,
        #[arg(long, value_enum, default_value_t = FormulationArg::Tailored)]
        formulation: FormulationArg,
        #[arg(long)]
        strict_recession: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Enumerate every admissible subgraph (small instances only).
    Oracle {
        problem: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Draw a planar instance, optionally with a solution, as SVG.
    ExportPlot {
        problem: PathBuf,
        #[arg(long)]
        solution: Option<PathBuf>,
        /// Use the first two coordinates of higher-dimensional variables.
        #[arg(long)]
        project: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Tailored and McCormick formulations side by side, as CSV.
    Compare {
        problem: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Write a seeded random problem document.
    Generate {
        /// spp, tsp, mstp, msap, flp, bmp, helicopter, school_bus, camera,
        /// circle_cover or demo_spp.
        kind: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        vertices: usize,
        #[arg(long, value_enum, default_value_t = NormArg::L2)]
        norm: NormArg,
        #[arg(long, value_enum, default_value_t = ShapeArg::Mixed)]
        shape: ShapeArg,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SolveArgs {
    /// Wall-clock limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Relative optimality gap.
    #[arg(long, default_value_t = 1e-6)]
    gap: f64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, value_enum, default_value_t = FormulationArg::Tailored)]
    formulation: FormulationArg,
    /// Treat failed or inconclusive recession checks as input errors.
    #[arg(long)]
    strict_recession: bool,
}

impl SolveArgs {
    fn config(&self) -> anyhow::Result<BnbConfig> {
        let time_limit = match self.time_limit {
            Some(t) if !(t.is_finite() && t > 0.0) => {
                anyhow::bail!(Input(format!("invalid time limit {t}")))
            }
            Some(t) => Some(Duration::from_secs_f64(t)),
            None => None,
        };
        Ok(BnbConfig {
            relative_gap: self.gap,
            workers: self.workers,
            time_limit,
            ..BnbConfig::default()
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormulationArg {
    Tailored,
    Mccormick,
}

impl From<FormulationArg> for Formulation {
    fn from(f: FormulationArg) -> Self {
        match f {
            FormulationArg::Tailored => Formulation::Tailored,
            FormulationArg::Mccormick => Formulation::McCormick,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    L1,
    L2,
    Linf,
    Squared,
    Linear,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    Box,
    Ball,
    Mixed,
}

/// Errors that map to the input exit code.
#[derive(Debug)]
struct Input(String);

impl std::fmt::Display for Input {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Input {}

fn input_err(e: GcsError) -> anyhow::Error {
    match e {
        GcsError::Solver(_) => anyhow::Error::new(e),
        other => anyhow::Error::new(Input(other.to_string())),
    }
}

fn load(path: &Path) -> anyhow::Result<(GcsGraph, ProblemSpec)> {
    let text = fs::read_to_string(path).map_err(|e| Input(format!("{}: {e}", path.display())))?;
    io::parse_str(&text).map_err(|e| anyhow::Error::new(Input(format!("{}: {e}", path.display()))))
}

fn check_recession(graph: &GcsGraph, strict: bool) -> anyhow::Result<()> {
    for v in graph.vertex_ids() {
        let name = &graph.vertex(v).name;
        match graph.validate_recession(v, 1e-7).map_err(input_err)? {
            RecessionStatus::Satisfied => {}
            RecessionStatus::Violated if strict => {
                anyhow::bail!(Input(GcsError::RecessionViolated(name.clone()).to_string()))
            }
            RecessionStatus::Violated => {
                log::warn!("vertex `{name}` violates the recession condition")
            }
            RecessionStatus::Indeterminate(why) if strict => {
                anyhow::bail!(Input(
                    GcsError::RecessionIndeterminate(name.clone(), why).to_string()
                ))
            }
            RecessionStatus::Indeterminate(why) => {
                log::warn!("recession check for `{name}` inconclusive: {why}")
            }
        }
    }
    Ok(())
}

fn emit(out: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn exit_for(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::Optimal => EXIT_OPTIMAL,
        SolveStatus::Infeasible => EXIT_INFEASIBLE,
        SolveStatus::Limit => EXIT_LIMIT,
        SolveStatus::UnboundedRelaxation => EXIT_INPUT,
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Solve {
            problem,
            solve,
            trace,
            out,
        } => {
            let (graph, spec) = load(&problem)?;
            check_recession(&graph, solve.strict_recession)?;
            let program = formulate(&graph, &spec, solve.formulation.into()).map_err(input_err)?;
            let result = solve_micp(&graph, &program, &solve.config()?).map_err(input_err)?;
            if let Some(path) = &trace {
                let mut file = fs::File::create(path)
                    .with_context(|| format!("creating {}", path.display()))?;
                result.write_trace_csv(&mut file)?;
            }
            if let Some(d) = &result.diagnostic {
                eprintln!("{d}");
            }
            let doc = SolutionDocument::from_result(
                &graph,
                &result,
                trace.map(|p| p.display().to_string()),
            );
            emit(&out, &io::to_canonical_json(&doc)?)?;
            Ok(exit_for(result.status))
        }
        Command::Relax {
            problem,
            formulation,
            strict_recession,
            out,
        } => {
            let (graph, spec) = load(&problem)?;
            check_recession(&graph, strict_recession)?;
            let program = formulate(&graph, &spec, formulation.into()).map_err(input_err)?;
            let start = Instant::now();
            let sol = solve_relaxation(&program);
            let (status, code) = match sol.status {
                ConicStatus::Optimal => ("optimal", EXIT_OPTIMAL),
                ConicStatus::Infeasible => ("infeasible", EXIT_INFEASIBLE),
                ConicStatus::Unbounded => ("unbounded_relaxation", EXIT_INPUT),
                ConicStatus::Inaccurate => ("inaccurate", EXIT_INTERNAL),
            };
            let report = serde_json::json!({
                "status": status,
                "relaxation_value": sol.value.is_finite().then_some(sol.value),
                "elapsed_seconds": start.elapsed().as_secs_f64(),
            });
            emit(&out, &io::to_canonical_json(&report)?)?;
            Ok(code)
        }
        Command::Oracle {
            problem,
            workers,
            out,
        } => {
            let (graph, spec) = load(&problem)?;
            let start = Instant::now();
            let r = oracle_enumerate(&graph, &spec, workers).map_err(input_err)?;
            let subgraph = r.subgraph.as_ref().map(|s| {
                serde_json::json!({
                    "vertices": s.selected_vertices().map(|v| graph.vertex(v).name.clone()).collect::<Vec<_>>(),
                    "edges": s.selected_edges().map(|e| graph.edge_key(e)).collect::<Vec<_>>(),
                })
            });
            let report = serde_json::json!({
                "status": if r.subgraph.is_some() { "optimal" } else { "infeasible" },
                "value": r.value.is_finite().then_some(r.value),
                "candidates": r.candidates,
                "infeasible_candidates": r.infeasible,
                "subgraph": subgraph,
                "elapsed_seconds": start.elapsed().as_secs_f64(),
            });
            emit(&out, &io::to_canonical_json(&report)?)?;
            Ok(if r.subgraph.is_some() {
                EXIT_OPTIMAL
            } else {
                EXIT_INFEASIBLE
            })
        }
        Command::ExportPlot {
            problem,
            solution,
            project,
            out,
        } => {
            let (graph, _) = load(&problem)?;
            let sol = match &solution {
                Some(p) => {
                    let text = fs::read_to_string(p)
                        .map_err(|e| Input(format!("{}: {e}", p.display())))?;
                    Some(
                        SolutionDocument::read(&text)
                            .map_err(|e| Input(format!("{}: {e}", p.display())))?,
                    )
                }
                None => None,
            };
            let opts = PlotOptions {
                project,
                ..PlotOptions::default()
            };
            let svg = io::export_plot(&graph, sol.as_ref(), &opts).map_err(input_err)?;
            emit(&out, &svg)?;
            Ok(EXIT_OPTIMAL)
        }
        Command::Compare {
            problem,
            solve,
            out,
        } => {
            let (graph, spec) = load(&problem)?;
            check_recession(&graph, solve.strict_recession)?;
            let cfg = solve.config()?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "formulation",
                "relaxation_value",
                "micp_value",
                "wall_seconds",
            ])?;
            let mut code = EXIT_OPTIMAL;
            for (name, f) in [
                ("tailored", Formulation::Tailored),
                ("mccormick", Formulation::McCormick),
            ] {
                let start = Instant::now();
                let program = formulate(&graph, &spec, f).map_err(input_err)?;
                let r = solve_micp(&graph, &program, &cfg).map_err(input_err)?;
                code = code.max(exit_for(r.status));
                w.write_record([
                    name.to_string(),
                    r.relaxation_value.to_string(),
                    r.value.to_string(),
                    start.elapsed().as_secs_f64().to_string(),
                ])?;
            }
            emit(&out, &String::from_utf8(w.into_inner()?)?)?;
            Ok(code)
        }
        Command::Generate {
            kind,
            seed,
            vertices,
            norm,
            shape,
            out,
        } => {
            let cfg = GenConfig {
                seed,
                vertices,
                dim: 2,
                norm: match norm {
                    NormArg::L1 => CostNorm::L1,
                    NormArg::L2 => CostNorm::L2,
                    NormArg::Linf => CostNorm::Linf,
                    NormArg::Squared => CostNorm::Squared,
                    NormArg::Linear => CostNorm::Linear,
                },
                shape: match shape {
                    ShapeArg::Box => SetShape::Box,
                    ShapeArg::Ball => SetShape::Ball,
                    ShapeArg::Mixed => SetShape::Mixed,
                },
            };
            let inst = if kind == "demo_spp" {
                generate::demo_spp()
            } else {
                generate::by_name(&kind, &cfg).map_err(input_err)?
            };
            emit(&out, &io::canonical_problem(&inst.graph, &inst.spec)?)?;
            Ok(EXIT_OPTIMAL)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                EXIT_INPUT
            } else {
                EXIT_OPTIMAL
            });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Input>().is_some() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::from(EXIT_INTERNAL)
            }
        }
    }
}
