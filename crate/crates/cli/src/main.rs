//! `sslab`: command-line front end. Runs in process unless `--server` names a running service.

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;
use sslab_beliefs::PriorFile;
use sslab_client::Client;
use sslab_elimination::{Generator, Schedule};
use sslab_experiments::{default_out_dir, execute, write_report, GameRef, Op, PriorSpec, ReplicationReport, ReplicationSpec, SPEC_IDS};
use sslab_policy::SolveOptions;
use sslab_population::{McOptions, Method, SteadyOptions, SweepConfig};

#[derive(Parser)]
#[command(name = "sslab", version, about = "Learning in extensive-form games: elimination, policies, steady states")]
struct Cli {
    /// Send requests to a running service instead of computing locally.
    #[arg(long, global = true, value_name = "URL")]
    server: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a game file (or corpus name) against the schema and structural rules.
    Validate { game: String },
    /// Print the normal form.
    NormalForm {
        game: String,
        /// Include each role's partition of strategy profiles by observation.
        #[arg(long)]
        partitions: bool,
    },
    /// Merge two consecutive information sets of one role.
    Coalesce {
        game: String,
        /// 1-based role.
        #[arg(long)]
        role: usize,
        #[arg(long)]
        h1: String,
        #[arg(long)]
        h2: String,
        /// Write the coalesced game file here as well.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a valid elimination sequence and print its certified trace.
    Eliminate {
        game: String,
        #[arg(long, value_enum, default_value_t = Gen::Sw)]
        generator: Gen,
        /// JSON list of stages, each a list of per-role deletions; implies the custom generator.
        #[arg(long, value_name = "FILE")]
        stages: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        r_max: u32,
        /// Allow conjectures without full support.
        #[arg(long)]
        no_full_support: bool,
    },
    /// Solve one role's optimal learning policy.
    Policy {
        game: String,
        #[arg(long)]
        role: usize,
        #[command(flatten)]
        model: Model,
    },
    /// Steady state of the population at one (delta, gamma).
    Steady {
        game: String,
        #[command(flatten)]
        model: Model,
        /// Starting profile, one pure strategy per role, comma separated.
        #[arg(long, value_delimiter = ',')]
        init: Option<Vec<String>>,
        /// Simulate a finite population instead of iterating the exact map.
        #[arg(long)]
        mc: bool,
        #[arg(long, default_value_t = 100_000)]
        agents: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        starts: usize,
    },
    /// Steady states over a grid of patience levels.
    Sweep {
        game: String,
        /// Sweep configuration (JSON).
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
        #[arg(long, value_name = "FILE")]
        priors: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        init: Option<Vec<String>>,
    },
    /// Run a replication spec (built-in id or JSON file) and write its report.
    Replicate {
        spec: String,
        /// Defaults to $SSLAB_OUT_DIR, then ./sslab-out.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// The bundled games.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
    /// Serve the operations over HTTP.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
    },
}

#[derive(Subcommand)]
enum CorpusAction {
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum Gen {
    Sw,
    Bi,
}

#[derive(Args)]
struct Model {
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    gamma: f64,
    /// Priors as JSON: a prior spec, or a list of per-role prior files. Uniform when absent.
    #[arg(long, value_name = "FILE")]
    priors: Option<PathBuf>,
    /// Cap on tracked observation counts.
    #[arg(long)]
    cap: Option<u32>,
}

impl Model {
    fn solve(&self) -> SolveOptions {
        let mut s = SolveOptions::default();
        if let Some(c) = self.cap {
            s.cap = c;
        }
        s
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn priors(path: &Option<PathBuf>) -> Result<PriorSpec> {
    let Some(path) = path else { return Ok(PriorSpec::Uniform { weight: 1.0 }) };
    let v: Value = read_json(path)?;
    if v.is_array() {
        let roles: Vec<PriorFile> = serde_json::from_value(v).with_context(|| format!("parsing {}", path.display()))?;
        return Ok(PriorSpec::Explicit { roles });
    }
    serde_json::from_value(v).with_context(|| format!("parsing {}", path.display()))
}

/// Where requests go.
enum Backend {
    Local,
    Remote(Client),
}

impl Backend {
    fn run(&self, op: &Op) -> Result<Value> {
        Ok(match self {
            Backend::Local => execute(op)?,
            Backend::Remote(c) => c.execute(op)?,
        })
    }
}

fn print(v: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn game(name: &str) -> GameRef {
    GameRef::Named(name.to_string())
}

fn run(cli: Cli) -> Result<ExitCode> {
    let backend = match &cli.server {
        Some(url) => Backend::Remote(Client::new(url)?),
        None => Backend::Local,
    };
    match cli.command {
        Command::Validate { game: g } => {
            let v = backend.run(&Op::Validate { game: game(&g) })?;
            print(&v)?;
            return Ok(if v["valid"] == true { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
        Command::NormalForm { game: g, partitions } => print(&backend.run(&Op::NormalForm { game: game(&g), partitions })?)?,
        Command::Coalesce { game: g, role, h1, h2, out } => {
            let v = backend.run(&Op::Coalesce { game: game(&g), role, h1, h2 })?;
            if let Some(path) = out {
                std::fs::write(&path, serde_json::to_string_pretty(&v["game"])?).with_context(|| format!("writing {}", path.display()))?;
            }
            print(&v)?;
        }
        Command::Eliminate { game: g, generator, stages, r_max, no_full_support } => {
            let generator = match (stages, generator) {
                (Some(path), _) => Generator::Custom { stages: read_json(&path)? },
                (None, Gen::Sw) => Generator::Sw,
                (None, Gen::Bi) => Generator::Bi,
            };
            let schedule = Schedule { r_max, full_support: !no_full_support };
            print(&backend.run(&Op::Eliminate { game: game(&g), generator, schedule })?)?;
        }
        Command::Policy { game: g, role, model } => {
            let op = Op::Policy {
                game: game(&g),
                role,
                priors: priors(&model.priors)?,
                delta: model.delta,
                gamma: model.gamma,
                solve: model.solve(),
            };
            print(&backend.run(&op)?)?;
        }
        Command::Steady { game: g, model, init, mc, agents, seed, starts } => {
            let steady = SteadyOptions {
                method: if mc { Method::MonteCarlo } else { Method::Exact },
                starts,
                seed,
                mc: McOptions { agents, seed, ..McOptions::default() },
                ..SteadyOptions::default()
            };
            let op = Op::Steady {
                game: game(&g),
                priors: priors(&model.priors)?,
                init,
                delta: model.delta,
                gamma: model.gamma,
                solve: model.solve(),
                steady,
            };
            print(&backend.run(&op)?)?;
        }
        Command::Sweep { game: g, config, priors: p, init } => {
            let config: SweepConfig = read_json(&config)?;
            print(&backend.run(&Op::Sweep { game: game(&g), priors: priors(&p)?, init, config })?)?;
        }
        Command::Replicate { spec, out_dir } => {
            let op = if SPEC_IDS.contains(&spec.as_str()) {
                Op::Replicate { id: Some(spec), spec: None }
            } else if Path::new(&spec).exists() {
                Op::Replicate { id: None, spec: Some(Box::new(ReplicationSpec::load(&spec)?)) }
            } else {
                bail!("`{spec}` is neither a built-in spec ({}) nor a file", SPEC_IDS.join(", "));
            };
            let report: ReplicationReport = serde_json::from_value(backend.run(&op)?)?;
            let dir = out_dir.unwrap_or_else(default_out_dir);
            let written = write_report(&report, &dir)?;
            for c in &report.checks {
                println!("{} {} ({:.2} s)", if c.pass { "PASS" } else { "FAIL" }, c.name, c.seconds);
                for k in c.criteria.iter().filter(|k| !k.pass) {
                    println!("    {}: {}", k.label, k.detail);
                }
            }
            println!("{} {} in {:.2} s", if report.pass { "PASS" } else { "FAIL" }, report.id, report.seconds);
            for p in written {
                println!("wrote {}", p.display());
            }
            return Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
        Command::Corpus { action: CorpusAction::List } => {
            let v = match &backend {
                Backend::Local => backend.run(&Op::CorpusList)?,
                Backend::Remote(c) => c.corpus()?,
            };
            for e in v.as_array().into_iter().flatten() {
                let strategies: Vec<String> = e["strategies"].as_array().into_iter().flatten().map(|s| s.to_string()).collect();
                let ok = e["constraints"].as_array().is_none_or(|c| c.iter().all(|k| k["pass"] == true));
                println!(
                    "{:<12} players {}  infosets {:>2}  terminals {:>2}  strategies {:<10} constraints {}",
                    e["name"].as_str().unwrap_or("?"),
                    e["players"],
                    e["infosets"],
                    e["terminals"],
                    strategies.join("x"),
                    if ok { "ok" } else { "FAILED" }
                );
            }
        }
        Command::Serve { addr } => {
            if cli.server.is_some() {
                bail!("--server does not apply to serve");
            }
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(sslab_service::serve(addr, |a| println!("listening on http://{a}")))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    tracing_subscriber::fmt().with_env_filter(tracing_subscriber::EnvFilter::from_default_env()).with_writer(std::io::stderr).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
