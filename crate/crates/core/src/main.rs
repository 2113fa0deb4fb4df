use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use ifc_mcp::json::pretty;
use ifc_mcp::knowledge::index_corpus;
use ifc_mcp::mcp::{parse_groups, serve_stdio, serve_tcp, Registry, Session};
use ifc_mcp::model::IfcModel;
use ifc_mcp::scene::get_ifc_scene_overview;
use ifc_mcp::snapshot::{render_elevation, render_plan, View, DEFAULT_CUT_HEIGHT};
use ifc_mcp::step::GuidGenerator;
use ifc_mcp::trace::{parse_trace, run_trace};

const CORPUS_ENV: &str = "IFC_MCP_CORPUS";

#[derive(Parser)]
#[command(name = "ifc-mcp", version, about = "MCP tool server and utilities for IFC building models")]
struct Cli {
    /// Seed for reproducible GUIDs and time stamps.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve MCP over stdio, or over local TCP with --tcp.
    Serve {
        #[arg(long)]
        model: Option<PathBuf>,
        /// Enabled tool groups: q(uery), c(reate), e(dit), k(nowledge), s(napshot).
        #[arg(long, default_value = "q,c,e,k,s")]
        groups: String,
        #[arg(long)]
        tcp: Option<u16>,
    },
    /// Write a fresh model with project, site, building and storey.
    New {
        file: PathBuf,
        #[arg(long, default_value = "My Project")]
        project: String,
    },
    /// Load a model and print its overview.
    Open { file: PathBuf },
    /// Load a model and write it back out.
    Save { input: PathBuf, output: PathBuf },
    /// Run a trace script and report each step.
    Replay {
        trace: PathBuf,
        /// Starting model; a fresh one when absent.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Where to save the resulting model.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a knowledge index from a directory of documents.
    Index {
        dir: PathBuf,
        /// Index file; defaults to DIR/.ifc-mcp-index
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render SVG views of a model.
    Snapshot {
        file: PathBuf,
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long)]
        storey: Option<String>,
        #[arg(long, default_value_t = DEFAULT_CUT_HEIGHT)]
        cut_height: f64,
        /// VIEW=PATH, e.g. south=south.svg
        #[arg(long)]
        elevation: Vec<String>,
    },
}

fn generator(seed: Option<u64>) -> GuidGenerator {
    seed.map_or_else(GuidGenerator::random, GuidGenerator::seeded)
}

fn load(path: &Path, seed: Option<u64>) -> Result<IfcModel> {
    let bytes = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    IfcModel::from_step(&bytes, generator(seed)).with_context(|| format!("cannot load {}", path.display()))
}

fn save(model: &mut IfcModel, path: &Path) -> Result<()> {
    let bytes = model.to_step()?;
    std::fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn session(model: Option<&Path>, seed: Option<u64>) -> Result<Session> {
    let model = match model {
        Some(p) => load(p, seed)?,
        None => IfcModel::with_generator("My Project", generator(seed)),
    };
    let mut s = Session::new(model);
    if let Some(corpus) = std::env::var_os(CORPUS_ENV) {
        s = s.with_corpus(corpus);
    }
    Ok(s)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let seed = cli.seed;
    match cli.command {
        Command::Serve { model, groups, tcp } => {
            let groups = parse_groups(&groups).map_err(anyhow::Error::msg)?;
            let registry = Arc::new(Registry::standard());
            match tcp {
                Some(port) => {
                    session(model.as_deref(), seed)?;
                    eprintln!("ifc-mcp listening on 127.0.0.1:{port}");
                    serve_tcp(registry, port, move || {
                        session(model.as_deref(), seed)
                            .map(|s| s.with_groups(groups.clone()))
                            .map_err(|e| std::io::Error::other(format!("{e:#}")))
                    })?;
                }
                None => {
                    let mut s = session(model.as_deref(), seed)?.with_groups(groups);
                    serve_stdio(&registry, &mut s)?;
                }
            }
        }
        Command::New { file, project } => {
            let mut m = IfcModel::with_generator(&project, generator(seed));
            save(&mut m, &file)?;
            println!("wrote {}", file.display());
        }
        Command::Open { file } => {
            let m = load(&file, seed)?;
            println!("{}", pretty(&get_ifc_scene_overview(&m)));
        }
        Command::Save { input, output } => {
            let mut m = load(&input, seed)?;
            save(&mut m, &output)?;
            println!("wrote {}", output.display());
        }
        Command::Replay { trace, model, out } => {
            let text = std::fs::read_to_string(&trace).with_context(|| format!("cannot read {}", trace.display()))?;
            let script = parse_trace(&text).with_context(|| format!("cannot parse {}", trace.display()))?;
            let registry = Registry::standard();
            let mut s = session(model.as_deref(), seed)?;
            let report = run_trace(&registry, &mut s, &script);
            for step in &report.steps {
                let status = if step.passed { "ok" } else { "FAILED" };
                match step.message.as_str() {
                    "" => println!("step {} {}: {status}", step.index, step.label),
                    m => println!("step {} {}: {status}: {m}", step.index, step.label),
                }
            }
            if let Some(p) = out {
                save(&mut s.model, &p)?;
            }
            if let Some(e) = report.error {
                eprintln!("{e}");
                return Ok(ExitCode::from(1));
            }
            println!("{}: {} steps passed", script.name, report.steps.len());
        }
        Command::Index { dir, out } => {
            let index = index_corpus(&dir)?;
            let out = out.unwrap_or_else(|| dir.join(".ifc-mcp-index"));
            index.save(&out)?;
            println!("indexed {} chunks into {}", index.len(), out.display());
        }
        Command::Snapshot {
            file,
            plan,
            storey,
            cut_height,
            elevation,
        } => {
            if plan.is_none() && elevation.is_empty() {
                bail!("nothing to render; pass --plan or --elevation");
            }
            let m = load(&file, seed)?;
            if let Some(p) = plan {
                write_text(&p, &render_plan(&m, storey.as_deref(), cut_height)?)?;
                println!("wrote {}", p.display());
            }
            for spec in elevation {
                let (view, path) = spec
                    .split_once('=')
                    .with_context(|| format!("--elevation expects VIEW=PATH, got {spec}"))?;
                let view: View = view.parse()?;
                write_text(Path::new(path), &render_elevation(&m, view)?)?;
                println!("wrote {path}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
