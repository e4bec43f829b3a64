//! Run configuration: built from an optional `key = value` file and command
//! line flags (flags win), validated against the command's key set, and
//! echoed back in every report in a form that parses to the same config.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
    Pgm,
}

impl Format {
    pub const ALL: [Format; 4] = [Format::Csv, Format::Json, Format::Svg, Format::Pgm];

    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
            Format::Pgm => "pgm",
        }
    }
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Format::ALL
            .into_iter()
            .find(|f| f.extension() == s)
            .ok_or_else(|| CliError::Usage(format!("unknown format {s:?} (expected csv, json, svg or pgm)")))
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

/// Keys a command accepts, with defaults, and the artifacts it can write.
#[derive(Debug, Clone, Copy)]
pub struct CommandSpec {
    pub name: &'static str,
    pub params: &'static [(&'static str, &'static str)],
    /// Default sample count, or `None` when the command takes none.
    pub samples: Option<u64>,
    pub formats: &'static [Format],
    pub about: &'static str,
}

use Format::*;

pub const COMMANDS: &[CommandSpec] = &[
    CommandSpec {
        name: "perco",
        params: &[("geometry", "halfplane"), ("mesh", "0.0625"), ("n", "32"), ("p", "0.5")],
        samples: Some(10_000),
        formats: &[Csv, Json, Svg],
        about: "site percolation crossing on the triangular lattice (halfplane [0,1] -> [2,inf) or rhombus)",
    },
    CommandSpec {
        name: "spin",
        params: &[("n", "8"), ("q", "2"), ("beta", "critical")],
        samples: Some(2_000),
        formats: &[Csv, Json, Pgm],
        about: "Potts model on an n x n grid by Swendsen-Wang",
    },
    CommandSpec {
        name: "fk",
        params: &[("n", "3"), ("p", "0.5"), ("q", "2")],
        samples: Some(200),
        formats: &[Csv, Json, Svg],
        about: "random-cluster model on an n x n grid: exact coupling checks and samples",
    },
    CommandSpec {
        name: "ust",
        params: &[("n", "3")],
        samples: Some(20_000),
        formats: &[Csv, Json, Svg],
        about: "uniform spanning tree of the n x n grid by Wilson's algorithm",
    },
    CommandSpec {
        name: "onmodel",
        params: &[("n", "1"), ("theta", "critical"), ("size", "2")],
        samples: Some(100_000),
        formats: &[Csv, Json, Svg],
        about: "O(n) loop model on a size x size honeycomb patch (samples = sweeps)",
    },
    CommandSpec {
        name: "saw",
        params: &[("lattice", "hex"), ("nmax", "20")],
        samples: None,
        formats: &[Csv, Json],
        about: "exact self-avoiding walk and polygon counts",
    },
    CommandSpec {
        name: "loopsoup",
        params: &[("c", "1"), ("tmin", "0.001"), ("tmax", "1"), ("steps", "32")],
        samples: Some(50),
        formats: &[Csv, Json, Svg],
        about: "Brownian loop soup in the unit square",
    },
    CommandSpec {
        name: "cle",
        params: &[("kappa", "4"), ("c", "from-kappa"), ("formula", "printed"), ("tmin", "0.0002"), ("tmax", "1"), ("steps", "32"), ("h", "0.005")],
        samples: Some(1),
        formats: &[Csv, Json, Svg],
        about: "outer boundaries of loop-soup clusters in the unit square",
    },
    CommandSpec {
        name: "sle",
        params: &[("kappa", "6"), ("tmax", "1"), ("dt", "1e-4"), ("kmin", "2"), ("kmax", "7")],
        samples: None,
        formats: &[Csv, Json, Svg],
        about: "chordal SLE trace in the upper half-plane and its box-counting dimension",
    },
    CommandSpec {
        name: "cardy",
        params: &[("kappa", "6"), ("z", "0.5")],
        samples: None,
        formats: &[Csv, Json],
        about: "hitting function G(z, kappa)",
    },
    CommandSpec {
        name: "gff",
        params: &[("n", "16"), ("lambda", "0")],
        samples: Some(1),
        formats: &[Csv, Json, Svg, Pgm],
        about: "discrete Gaussian free field on an n x n interior; lambda > 0 also traces a level line",
    },
    CommandSpec {
        name: "verify",
        params: &[("suite", "all")],
        samples: None,
        formats: &[Json],
        about: "run acceptance criteria: all, a number 1-16 or a criterion key",
    },
];

pub fn command_spec(name: &str) -> Result<&'static CommandSpec, CliError> {
    COMMANDS.iter().find(|c| c.name == name).ok_or_else(|| {
        let names: Vec<&str> = COMMANDS.iter().map(|c| c.name).collect();
        CliError::Usage(format!("unknown command {name:?}; expected one of {}", names.join(", ")))
    })
}

/// A fully resolved run: every parameter of the command has a value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub samples: Option<u64>,
    /// Directory for artifacts without an explicit path.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub out: Option<PathBuf>,
    pub formats: Vec<Format>,
    /// Explicit artifact paths.
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub files: BTreeMap<Format, PathBuf>,
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", i + 1)));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(CliError::Usage(format!("config line {}: duplicate key {k:?}", i + 1)));
        }
    }
    Ok(out)
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| CliError::Usage(format!("{key}: cannot parse {v:?}")))
}

impl RunConfig {
    /// Merges file entries and flags (flags win) for `command`, fills in
    /// defaults and rejects keys the command does not know.
    pub fn resolve(command: &str, file: &BTreeMap<String, String>, flags: &BTreeMap<String, String>) -> Result<Self, CliError> {
        let spec = command_spec(command)?;
        if let Some(c) = file.get("command") {
            if c != command {
                return Err(CliError::Usage(format!("config file is for {c:?}, not {command:?}")));
            }
        }
        let mut merged = file.clone();
        merged.remove("command");
        merged.extend(flags.iter().map(|(k, v)| (k.clone(), v.clone())));

        let mut params: BTreeMap<String, String> = spec.params.iter().map(|&(k, v)| (k.to_string(), v.to_string())).collect();
        let mut cfg = RunConfig {
            command: command.to_string(),
            params: BTreeMap::new(),
            seed: DEFAULT_SEED,
            samples: spec.samples,
            out: None,
            formats: Vec::new(),
            files: BTreeMap::new(),
        };
        for (k, v) in merged {
            match k.as_str() {
                "seed" => cfg.seed = parse_num(&k, &v)?,
                "samples" => {
                    if spec.samples.is_none() {
                        return Err(CliError::Usage(format!("{command} takes no samples key")));
                    }
                    let n: u64 = parse_num(&k, &v)?;
                    if n == 0 {
                        return Err(CliError::Usage("samples must be positive".into()));
                    }
                    cfg.samples = Some(n);
                }
                "out" => {
                    let p = PathBuf::from(&v);
                    match path_format(&p) {
                        Some(f) => {
                            cfg.files.insert(f, p);
                        }
                        None => cfg.out = Some(p),
                    }
                }
                "format" => {
                    for f in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                        let f: Format = f.parse()?;
                        if !cfg.formats.contains(&f) {
                            cfg.formats.push(f);
                        }
                    }
                }
                "csv" | "json" | "svg" | "pgm" => {
                    cfg.files.insert(k.parse()?, PathBuf::from(&v));
                }
                _ => match params.get_mut(&k) {
                    Some(slot) => *slot = v,
                    None => {
                        let known: Vec<&str> = spec.params.iter().map(|p| p.0).collect();
                        return Err(CliError::Usage(format!("unknown key {k:?} for {command} (accepted: {})", known.join(", "))));
                    }
                },
            }
        }
        for &f in cfg.files.keys() {
            if !cfg.formats.contains(&f) {
                cfg.formats.push(f);
            }
        }
        cfg.formats.sort();
        for f in &cfg.formats {
            if !spec.formats.contains(f) {
                return Err(CliError::Usage(format!("{command} cannot write {f}")));
            }
            if !cfg.files.contains_key(f) && cfg.out.is_none() {
                return Err(CliError::Usage(format!("format {f} needs --out DIR or an explicit --{f} path")));
            }
        }
        cfg.params = params;
        Ok(cfg)
    }

    /// Where each requested format is written.
    pub fn artifact_paths(&self) -> BTreeMap<Format, PathBuf> {
        self.formats
            .iter()
            .filter_map(|&f| {
                let p = self.files.get(&f).cloned().or_else(|| self.out.as_ref().map(|d| d.join(format!("{}.{}", self.command, f))))?;
                Some((f, p))
            })
            .collect()
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    pub fn param(&self, key: &str) -> Result<&str, CliError> {
        self.params.get(key).map(String::as_str).ok_or_else(|| CliError::Usage(format!("missing key {key:?}")))
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        let v: f64 = parse_num(key, self.param(key)?)?;
        if !v.is_finite() {
            return Err(CliError::Usage(format!("{key} must be finite")));
        }
        Ok(v)
    }

    pub fn usize(&self, key: &str) -> Result<usize, CliError> {
        parse_num(key, self.param(key)?)
    }

    pub fn samples(&self) -> u64 {
        self.samples.unwrap_or(1)
    }

    /// The config as a `key = value` file that resolves back to `self`.
    pub fn to_kv(&self) -> String {
        let mut s = format!("command = {}\nseed = {}\n", self.command, self.seed);
        if let Some(n) = self.samples {
            s.push_str(&format!("samples = {n}\n"));
        }
        if let Some(o) = &self.out {
            s.push_str(&format!("out = {}\n", o.display()));
        }
        let plain: Vec<String> = self.formats.iter().filter(|f| !self.files.contains_key(f)).map(|f| f.to_string()).collect();
        if !plain.is_empty() {
            s.push_str(&format!("format = {}\n", plain.join(",")));
        }
        for (f, p) in &self.files {
            s.push_str(&format!("{f} = {}\n", p.display()));
        }
        for (k, v) in &self.params {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }

    /// One-line summary stamped into text artifacts.
    pub fn stamp(&self) -> String {
        let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let samples = self.samples.map(|n| format!(" samples={n}")).unwrap_or_default();
        format!("critlab {} seed={}{} {}", self.command, self.seed, samples, params.join(" "))
    }
}

fn path_format(p: &Path) -> Option<Format> {
    p.extension().and_then(|e| e.to_str()).and_then(|e| e.parse().ok())
}
