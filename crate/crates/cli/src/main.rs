use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

mod group;
mod orbifold;
mod report;
mod verify;

use report::{canonical_json, digest, render_text, Outcome, RunReport};

#[derive(Parser)]
#[command(name = "orbires", version, about = "Resolution data and symplectic certificates for 4-orbifolds")]
struct Cli {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Print nothing; only the exit status is meaningful.
    #[arg(long, global = true)]
    quiet: bool,
    /// Seed for every random sampler.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for grid sampling (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Finite subgroups of U(2).
    #[command(subcommand)]
    Group(GroupCmd),
    /// Cyclic quotient singularities.
    #[command(subcommand)]
    Singularity(SingularityCmd),
    /// Whole orbifold specifications.
    #[command(subcommand)]
    Orbifold(OrbifoldCmd),
    /// Sampled symplectic certificates.
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "action", rename_all = "snake_case")]
enum GroupCmd {
    /// Element classes, stratum, Γ* and Γ'.
    Classify(GroupSource),
    /// Fundamental invariants of Γ* and the Molien series of the group.
    Invariants {
        #[command(flatten)]
        #[serde(flatten)]
        source: GroupSource,
        /// Last degree of the Molien prefix.
        #[arg(long, default_value_t = 12)]
        degree: usize,
    },
}

#[derive(Args, Serialize)]
#[group(required = true, multiple = false)]
pub struct GroupSource {
    /// klein_four, minus_identity, trivial, quaternion, or cyclic:M:Q,
    /// reflection_product:M:K, binary_dihedral:N, dihedral_reflections:N.
    #[arg(long)]
    builtin: Option<String>,
    /// Group JSON file.
    #[arg(long)]
    #[serde(skip)]
    file: Option<PathBuf>,
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "action", rename_all = "snake_case")]
enum SingularityCmd {
    /// Hirzebruch-Jung chain of C²/Z_m acting with weights (1, q).
    Resolve {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        q: u64,
    },
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Example {
    MappingTorus,
    Product,
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "action", rename_all = "snake_case")]
enum OrbifoldCmd {
    /// Δ, exceptional sets and Betti numbers of the resolution.
    Resolve(OrbifoldArgs),
}

#[derive(Args, Serialize)]
#[group(required = true, multiple = false)]
pub struct OrbifoldSource {
    /// Orbifold specification JSON file.
    #[arg(long)]
    #[serde(skip)]
    spec: Option<PathBuf>,
    #[arg(long, value_enum)]
    example: Option<Example>,
}

#[derive(Args, Serialize)]
pub struct OrbifoldArgs {
    #[command(flatten)]
    #[serde(flatten)]
    source: OrbifoldSource,
    /// Cone point orders on the first sphere of the product example.
    #[arg(long, value_delimiter = ',')]
    m: Vec<u32>,
    /// Cone point orders on the second sphere of the product example.
    #[arg(long, value_delimiter = ',')]
    m2: Vec<u32>,
    /// Use the symmetric square of the first sphere instead.
    #[arg(long)]
    symmetric: bool,
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "action", rename_all = "snake_case")]
enum VerifyCmd {
    /// Taming quotient of a local model on a sampled fiber tube.
    Tameness(verify::TamenessArgs),
    /// Glue a form vanishing near the origin to a positive one.
    Gluing {
        #[arg(long)]
        #[serde(skip)]
        problem: PathBuf,
        /// Samples per axis.
        #[arg(long, default_value_t = 15)]
        grid: usize,
    },
    /// Compare ω_a with the pushforward of the manifold model.
    Pushforward {
        #[arg(long, default_value_t = 2)]
        m: u32,
        #[arg(long, default_value_t = 0.1)]
        a: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Closedness, chart overlap and tameness of the blow-up model.
    Blowup {
        #[arg(long, default_value_t = 2)]
        m: u32,
        #[arg(long, default_value_t = 0.1)]
        lambda: f64,
        #[arg(long, default_value_t = 12)]
        grid: usize,
    },
}

/// Files read by a command, collected for the inputs digest.
#[derive(Default)]
pub struct Inputs {
    files: Vec<Value>,
}

impl Inputs {
    pub fn read(&mut self, path: &Path) -> anyhow::Result<String> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        self.files.push(json!({ "name": path.file_name().map(|n| n.to_string_lossy().into_owned()), "contents": text }));
        Ok(text)
    }

    pub fn read_json<T: serde::de::DeserializeOwned>(&mut self, path: &Path) -> anyhow::Result<T> {
        let text = self.read(path)?;
        serde_json::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))
    }
}

fn exit_code(e: &anyhow::Error) -> i32 {
    e.downcast_ref::<orbires::Error>().map_or(2, |e| e.exit_code())
}

fn echo(cli: &Cli) -> serde_json::Result<Value> {
    Ok(match &cli.command {
        Command::Group(cmd) => json!({ "group": serde_json::to_value(cmd)? }),
        Command::Singularity(cmd) => json!({ "singularity": serde_json::to_value(cmd)? }),
        Command::Orbifold(cmd) => json!({ "orbifold": serde_json::to_value(cmd)? }),
        Command::Verify(cmd) => json!({ "verify": serde_json::to_value(cmd)?, "seed": cli.seed }),
    })
}

fn dispatch(cli: &Cli, inputs: &mut Inputs) -> anyhow::Result<Outcome> {
    Ok(match &cli.command {
        Command::Group(GroupCmd::Classify(src)) => group::classify(&group::load(src, inputs)?)?,
        Command::Group(GroupCmd::Invariants { source, degree }) => group::invariants(&group::load(source, inputs)?, *degree)?,
        Command::Singularity(SingularityCmd::Resolve { m, q }) => orbifold::singularity(*m, *q)?,
        Command::Orbifold(OrbifoldCmd::Resolve(a)) => orbifold::resolve(a, inputs)?,
        Command::Verify(cmd) => match cmd {
            VerifyCmd::Tameness(a) => verify::tameness(a, inputs)?,
            VerifyCmd::Gluing { problem, grid } => verify::gluing(&inputs.read_json(problem)?, *grid)?,
            VerifyCmd::Pushforward { m, a, samples } => verify::pushforward(*m, *a, *samples, cli.seed)?,
            VerifyCmd::Blowup { m, lambda, grid } => verify::blowup(*m, *lambda, *grid, cli.seed)?,
        },
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command: Vec<String> = std::env::args().skip(1).collect();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let mut inputs = Inputs::default();
    let args = echo(&cli).unwrap_or(Value::Null);
    let (outcome, code) = match dispatch(&cli, &mut inputs) {
        Ok(outcome) => {
            let code = if outcome.checks.iter().all(|c| c.passed()) { 0 } else { 4 };
            (outcome, code)
        }
        Err(e) => {
            let code = exit_code(&e);
            if !cli.quiet && !cli.json {
                eprintln!("error: {e:#}");
            }
            let outcome = Outcome { payload: json!({ "error": format!("{e:#}") }), checks: Vec::new(), summary: Vec::new() };
            (outcome, code)
        }
    };
    let report = RunReport {
        command,
        inputs_digest: digest(&json!({ "args": args, "files": inputs.files })),
        payload: outcome.payload,
        checks: outcome.checks,
        exit_status: code,
    };
    if !cli.quiet {
        if cli.json {
            let value = serde_json::to_value(&report).unwrap_or(Value::Null);
            println!("{}", canonical_json(&value));
        } else if code == 0 || code == 4 {
            print!("{}", render_text(&report, &outcome.summary));
        }
    }
    ExitCode::from(code as u8)
}
