use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ddchaos_cli::scenarios::{find, registry, Overrides, Params, Scenario};
use ddchaos_cli::{custom, export, report};

#[derive(Parser)]
#[command(
    name = "ddchaos",
    version,
    about = "Run and inspect disjoint distributional chaos scenarios"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario and print its JSON report; exit 1 if a claim is not reproduced.
    Run {
        name: String,
        #[command(flatten)]
        params: ParamFlags,
        /// Also write <name>.json and <name>.csv into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List registered scenarios.
    List,
    /// Show what a scenario builds and its default parameters.
    Describe { name: String },
    /// Write a scenario's orbit-distance trace as CSV.
    Trace {
        name: String,
        #[command(flatten)]
        params: ParamFlags,
        #[arg(long)]
        out: PathBuf,
    },
    /// Density of a set given as JSON (an exact set or intervals with a horizon).
    Density {
        /// JSON text, or @path to read it from a file.
        #[arg(long)]
        set: String,
    },
    /// Classify a vector, or check the twelve conditions on points, for a family given as JSON.
    Classify {
        /// JSON text, or @path to read it from a file.
        #[arg(long)]
        scenario: String,
    },
}

#[derive(Args)]
struct ParamFlags {
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Comma-separated list.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON file with any of horizon, delta, sigma, eps, seed; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ParamFlags {
    fn resolve(self, s: &Scenario) -> Result<Params, String> {
        let file = match &self.config {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
                serde_json::from_str::<Overrides>(&text)
                    .map_err(|e| format!("{}: {e}", p.display()))?
            }
            None => Overrides::default(),
        };
        let flags = Overrides {
            horizon: self.horizon,
            delta: self.delta,
            sigma: self.sigma,
            eps: self.eps,
            seed: self.seed,
        };
        flags.over(file).apply((s.defaults)())
    }
}

/// Writes to stdout; a closed pipe (`ddchaos list | head`) is not an error.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn lookup(name: &str) -> Result<Scenario, ExitCode> {
    find(name).ok_or_else(|| usage(format!("unknown scenario `{name}`; see `ddchaos list`")))
}

fn json_arg(arg: &str) -> Result<String, ExitCode> {
    match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).map_err(|e| usage(format!("{path}: {e}"))),
        None => Ok(arg.to_string()),
    }
}

fn write_csv(s: &Scenario, p: &Params, path: &Path) -> Result<(), ExitCode> {
    let Some(trace) = s.trace else {
        return Err(usage(format!("scenario `{}` has no trace", s.name)));
    };
    let ex = trace(p).map_err(usage)?;
    let file = fs::File::create(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    export::write_trace(&ex, std::io::BufWriter::new(file)).map_err(usage)
}

fn run(name: &str, flags: ParamFlags, out: Option<PathBuf>) -> Result<ExitCode, ExitCode> {
    let s = lookup(name)?;
    let p = flags.resolve(&s).map_err(usage)?;
    let outcome = (s.run)(&p).map_err(usage)?;
    let text = report::render(&report::scenario_report(&s, &p, &outcome));
    emit(&text);
    if let Some(dir) = out {
        fs::create_dir_all(&dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
        fs::write(dir.join(format!("{name}.json")), &text)
            .map_err(|e| usage(format!("{}: {e}", dir.display())))?;
        if s.trace.is_some() {
            write_csv(&s, &p, &dir.join(format!("{name}.csv")))?;
        }
    }
    if outcome.all_match() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprint!(
            "claims not reproduced for `{name}`:\n{}",
            report::mismatch_diff(&outcome)
        );
        Ok(ExitCode::from(1))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Run { name, params, out } => run(&name, params, out),
        Cmd::List => {
            let all = registry();
            let w = all.iter().map(|s| s.name.len()).max().unwrap_or(0);
            emit(
                &all.iter()
                    .map(|s| format!("{:<w$}  {}\n", s.name, s.anchor))
                    .collect::<String>(),
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Describe { name } => lookup(&name).map(|s| {
            let v = serde_json::json!({
                "scenario": s.name,
                "anchor": s.anchor,
                "defaults": (s.defaults)(),
                "trace": s.trace.is_some(),
            });
            emit(&report::render(&report::normalize(v)));
            ExitCode::SUCCESS
        }),
        Cmd::Trace { name, params, out } => lookup(&name).and_then(|s| {
            let p = params.resolve(&s).map_err(usage)?;
            write_csv(&s, &p, &out).map(|_| ExitCode::SUCCESS)
        }),
        Cmd::Density { set } => json_arg(&set)
            .and_then(|t| custom::density(&t).map_err(usage))
            .map(|v| {
                emit(&report::render(&report::normalize(v)));
                ExitCode::SUCCESS
            }),
        Cmd::Classify { scenario } => json_arg(&scenario)
            .and_then(|t| custom::classify(&t).map_err(usage))
            .map(|v| {
                emit(&report::render(&report::normalize(v)));
                ExitCode::SUCCESS
            }),
    };
    res.unwrap_or_else(|code| code)
}
