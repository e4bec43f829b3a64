use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use critlab_cli::config::{parse_kv, COMMANDS};
use critlab_cli::{run, CliError, RunConfig};

/// Samplers and checks for two-dimensional critical models.
///
/// Every command prints a JSON report on stdout and exits 0 when all of its
/// checks pass, 1 when one fails and 2 on a usage error.
#[derive(Debug, Parser)]
#[command(name = "critlab", version, after_help = command_list())]
struct Args {
    /// perco, spin, fk, ust, onmodel, saw, loopsoup, cle, sle, cardy, gff or verify
    command: String,
    /// For `verify`: `all`, a criterion number or its key
    target: Option<String>,
    /// key=value file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra key=value parameter, repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    /// Output directory, or a file whose extension picks the format
    #[arg(long)]
    out: Option<String>,
    /// Comma-separated list of csv, json, svg, pgm
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    csv: Option<String>,
    #[arg(long)]
    json: Option<String>,
    #[arg(long)]
    svg: Option<String>,
    #[arg(long)]
    pgm: Option<String>,
    #[arg(long)]
    mesh: Option<String>,
    #[arg(long)]
    kappa: Option<String>,
    #[arg(long)]
    c: Option<String>,
    /// `printed` or `standard` central charge formula for `cle`
    #[arg(long = "c-formula")]
    formula: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    lattice: Option<String>,
    #[arg(long)]
    nmax: Option<String>,
    #[arg(long)]
    geometry: Option<String>,
    #[arg(long)]
    size: Option<String>,
    #[arg(long)]
    tmin: Option<String>,
    #[arg(long)]
    tmax: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    steps: Option<String>,
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    z: Option<String>,
    #[arg(long)]
    kmin: Option<String>,
    #[arg(long)]
    kmax: Option<String>,
}

fn command_list() -> String {
    let mut s = String::from("Commands:\n");
    for c in COMMANDS {
        s.push_str(&format!("  {:<9} {}\n", c.name, c.about));
    }
    s
}

impl Args {
    fn flags(&self) -> Result<BTreeMap<String, String>, CliError> {
        let named = [
            ("seed", &self.seed),
            ("samples", &self.samples),
            ("out", &self.out),
            ("format", &self.format),
            ("csv", &self.csv),
            ("json", &self.json),
            ("svg", &self.svg),
            ("pgm", &self.pgm),
            ("mesh", &self.mesh),
            ("kappa", &self.kappa),
            ("c", &self.c),
            ("formula", &self.formula),
            ("p", &self.p),
            ("q", &self.q),
            ("beta", &self.beta),
            ("theta", &self.theta),
            ("n", &self.n),
            ("lambda", &self.lambda),
            ("lattice", &self.lattice),
            ("nmax", &self.nmax),
            ("geometry", &self.geometry),
            ("size", &self.size),
            ("tmin", &self.tmin),
            ("tmax", &self.tmax),
            ("dt", &self.dt),
            ("steps", &self.steps),
            ("h", &self.h),
            ("z", &self.z),
            ("kmin", &self.kmin),
            ("kmax", &self.kmax),
        ];
        let mut map: BTreeMap<String, String> = named.iter().filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone()))).collect();
        for kv in &self.set {
            let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got {kv:?}")))?;
            if map.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(CliError::Usage(format!("{k} given twice")));
            }
        }
        if let Some(t) = &self.target {
            if self.command != "verify" {
                return Err(CliError::Usage(format!("unexpected argument {t:?}")));
            }
            map.insert("suite".into(), t.clone());
        }
        Ok(map)
    }
}

fn main_inner(args: &Args) -> Result<bool, CliError> {
    let file = match &args.config {
        Some(path) => parse_kv(&std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?)?,
        None => BTreeMap::new(),
    };
    let config = RunConfig::resolve(&args.command, &file, &args.flags()?)?;
    let report = run(&config)?;
    println!("{}", report.to_json());
    Ok(report.passed)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match main_inner(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("critlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
