use std::collections::BTreeMap;
use std::fmt::Display;
use std::ops::RangeInclusive;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use sha2::{Digest, Sha256};

use pauli_capacity::concat::{CodeStack, DEFAULT_BUDGET};
use pauli_capacity::repetition::Orientation;
use pauli_capacity::threshold::{CodeClass, DEFAULT_FIVE_QUBIT_DEPTHS, DEFAULT_TARGET, DEFAULT_TOL};
use pauli_capacity::NoiseFamily;

use crate::CliError;

pub const DEFAULT_SEED: u64 = 20_080_611;
pub const DEFAULT_MC_SAMPLES: u64 = 20_000;

/// Options shared by every subcommand. Each may also be given as `key = value`
/// in a `--config` file; flags win on conflict.
#[derive(Debug, Clone, Default, Args)]
pub struct Opts {
    /// Noise family: depolarizing, independent-sym, independent-xz:<q_z>,
    /// two-pauli[:<ratio>], dominated[:<floor>], custom:<i>,<x>,<y>,<z>.
    #[arg(long, global = true)]
    pub family: Option<String>,
    /// Code stack shorthand, e.g. `rep5bit+rep2phasex4`, `5in51`, `five513x3`.
    #[arg(long, global = true)]
    pub stack: Option<String>,
    /// Stack file, one level per line.
    #[arg(long, global = true)]
    pub stack_file: Option<PathBuf>,
    /// Single repetition code `n,bit` or `n,phase`.
    #[arg(long, global = true)]
    pub rep: Option<String>,
    /// Inner bit-flip length of an n1-in-n2 code.
    #[arg(long, global = true)]
    pub n1: Option<usize>,
    /// Outer phase-flip length of an n1-in-n2 code.
    #[arg(long, global = true)]
    pub n2: Option<usize>,
    /// Comma-separated noise parameters.
    #[arg(long, global = true)]
    pub p: Option<String>,
    /// Monte Carlo samples per point; without it `entropy` is exact.
    #[arg(long, global = true)]
    pub samples: Option<u64>,
    /// Base seed for Monte Carlo sampling.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Absolute tolerance of exact threshold searches.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Step budget for exact enumeration.
    #[arg(long, global = true)]
    pub budget: Option<f64>,
    /// Print noise parameters as percentages.
    #[arg(long, global = true)]
    pub percent: bool,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// File of `key = value` lines using the long flag names.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write CSV here instead of stdout.
    #[arg(long, short = 'o', global = true)]
    pub output: Option<PathBuf>,
    /// Comma-separated grid (Monte Carlo thresholds, frontiers).
    #[arg(long, global = true)]
    pub grid: Option<String>,
    /// Entropy level defining the threshold.
    #[arg(long, global = true)]
    pub target: Option<f64>,
    /// exact or mc.
    #[arg(long, global = true)]
    pub method: Option<String>,
    /// Initial bracket `lo,hi` for exact thresholds.
    #[arg(long, global = true)]
    pub bracket: Option<String>,
    /// Scan the whole family interval for the crossing instead of searching
    /// outward from the hashing threshold.
    #[arg(long, global = true)]
    pub scan: bool,
    /// Smallest outer length in sweeps.
    #[arg(long, global = true)]
    pub n2_min: Option<usize>,
    /// Largest outer length in sweeps and tables.
    #[arg(long, global = true)]
    pub n2_max: Option<usize>,
    /// Frontier kind: independent or two-pauli.
    #[arg(long, global = true)]
    pub kind: Option<String>,
    /// Comma-separated code classes for independent frontiers.
    #[arg(long, global = true)]
    pub classes: Option<String>,
    /// Longest plain repetition code in frontier and bound searches.
    #[arg(long, global = true)]
    pub max_single: Option<usize>,
    /// Longest inner block of composite codes.
    #[arg(long, global = true)]
    pub max_inner: Option<usize>,
    /// Longest outer code of composite codes in frontier searches.
    #[arg(long, global = true)]
    pub max_outer: Option<usize>,
    /// Only report the full stack, not each prefix level.
    #[arg(long, global = true)]
    pub top_only: bool,
    /// Depths `lo..hi` of trailing [[5,1,3]] levels scanned for the lower rows
    /// of tables 5 and 7.
    #[arg(long, global = true)]
    pub five_levels: Option<String>,
}

const KEYS: &[&str] = &[
    "family", "stack", "stack-file", "rep", "n1", "n2", "p", "samples", "seed", "tol", "budget", "percent", "workers",
    "output", "grid", "target", "method", "bracket", "scan", "n2-min", "n2-max", "kind", "classes", "max-single",
    "max-inner", "max-outer", "top-only", "five-levels",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    Exact,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrontierKind {
    Independent,
    TwoPauli,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: String,
    pub family: NoiseFamily,
    pub family_given: bool,
    pub stack: Option<CodeStack>,
    pub n1: Option<usize>,
    pub p: Vec<f64>,
    pub samples: Option<u64>,
    pub seed: u64,
    pub tol: f64,
    pub budget: f64,
    pub percent: bool,
    pub workers: Option<usize>,
    pub output: Option<PathBuf>,
    pub grid: Vec<f64>,
    pub target: f64,
    pub method: MethodChoice,
    pub bracket: Option<(f64, f64)>,
    pub scan: bool,
    pub n2_min: usize,
    pub n2_max: usize,
    pub kind: FrontierKind,
    pub classes: Vec<CodeClass>,
    pub max_single: usize,
    pub max_inner: usize,
    pub max_outer: usize,
    pub top_only: bool,
    pub five_levels: RangeInclusive<usize>,
    /// `key=value` lines of the resolved settings, sorted by key.
    pub canonical: String,
}

impl RunConfig {
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn samples_or_default(&self) -> u64 {
        self.samples.unwrap_or(DEFAULT_MC_SAMPLES)
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    parse_config_text(&text)
}

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| config_err(format!("line {}: expected key = value", i + 1)))?;
        let key = k.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(config_err(format!("line {}: unknown key {key:?}", i + 1)));
        }
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(config_err(format!("line {}: duplicate key {key:?}", i + 1)));
        }
    }
    Ok(map)
}

struct Resolver {
    file: BTreeMap<String, String>,
    canonical: BTreeMap<&'static str, String>,
}

impl Resolver {
    /// Flag value if present, else the config file value.
    fn raw(&mut self, key: &'static str, flag: Option<String>) -> Option<String> {
        let v = flag.or_else(|| self.file.get(key).cloned());
        if let Some(v) = &v {
            self.canonical.insert(key, v.clone());
        }
        v
    }

    fn parse<T>(&mut self, key: &'static str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr + ToString,
        T::Err: Display,
    {
        match self.raw(key, flag.map(|f| f.to_string())) {
            None => Ok(None),
            Some(s) => s.trim().parse().map(Some).map_err(|e| config_err(format!("--{key} {s:?}: {e}"))),
        }
    }

    fn flag(&mut self, key: &'static str, flag: bool) -> Result<bool, CliError> {
        let v = if flag { Some(true) } else { self.parse::<bool>(key, None)? };
        let v = v.unwrap_or(false);
        self.canonical.insert(key, v.to_string());
        Ok(v)
    }
}

pub fn parse_list(key: &str, s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|e| config_err(format!("--{key}: {t:?}: {e}"))))
        .collect()
}

fn parse_range(s: &str) -> Result<RangeInclusive<usize>, CliError> {
    let bad = || config_err(format!("--five-levels {s:?}: expected lo..hi"));
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
    let hi: usize = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok(lo..=hi)
}

fn parse_rep(s: &str) -> Result<CodeStack, CliError> {
    let (n, o) = s.split_once(',').unwrap_or((s, "bit"));
    let n: usize = n.trim().parse().map_err(|_| config_err(format!("--rep {s:?}: bad length")))?;
    let o: Orientation = o.trim().parse()?;
    Ok(CodeStack::repetition(n, o)?)
}

impl RunConfig {
    pub fn resolve(command: &str, opts: Opts) -> Result<Self, CliError> {
        let file = match &opts.config {
            Some(path) => read_config_file(path)?,
            None => BTreeMap::new(),
        };
        let mut r = Resolver { file, canonical: BTreeMap::new() };

        let family_raw = r.raw("family", opts.family);
        let family_given = family_raw.is_some();
        let family: NoiseFamily = match &family_raw {
            Some(s) => s.parse()?,
            None => NoiseFamily::Depolarizing,
        };

        let stack_s = r.raw("stack", opts.stack);
        let stack_file = r.raw("stack-file", opts.stack_file.map(|p| p.display().to_string()));
        let rep = r.raw("rep", opts.rep);
        let n1 = r.parse("n1", opts.n1)?;
        let n2 = r.parse("n2", opts.n2)?;
        let sources = [stack_s.is_some(), stack_file.is_some(), rep.is_some(), n2.is_some()];
        if sources.iter().filter(|&&b| b).count() > 1 {
            return Err(config_err("give at most one of --stack, --stack-file, --rep, --n1/--n2"));
        }
        let stack = if let Some(s) = stack_s {
            Some(s.parse::<CodeStack>()?)
        } else if let Some(path) = stack_file {
            let text = fs::read_to_string(&path).map_err(|e| config_err(format!("cannot read {path}: {e}")))?;
            Some(CodeStack::parse_text(&text)?)
        } else if let Some(s) = rep {
            Some(parse_rep(&s)?)
        } else if let Some(n2) = n2 {
            let n1 = n1.ok_or_else(|| config_err("--n2 needs --n1"))?;
            Some(CodeStack::n1_in_n2(n1, n2)?)
        } else {
            None
        };

        let p = match r.raw("p", opts.p) {
            Some(s) => parse_list("p", &s)?,
            None => Vec::new(),
        };
        let samples = r.parse("samples", opts.samples)?;
        if let Some(s) = samples {
            if s < 100 {
                return Err(config_err(format!("--samples {s}: need at least 100")));
            }
        }
        let seed = r.parse("seed", opts.seed)?.unwrap_or(DEFAULT_SEED);
        r.canonical.insert("seed", seed.to_string());
        let tol = r.parse("tol", opts.tol)?.unwrap_or(DEFAULT_TOL);
        let budget = r.parse("budget", opts.budget)?.unwrap_or(DEFAULT_BUDGET);
        if !(tol > 0.0) || !(budget > 0.0) {
            return Err(config_err("--tol and --budget must be positive"));
        }
        let percent = r.flag("percent", opts.percent)?;
        let workers = r.parse("workers", opts.workers)?;
        if workers == Some(0) {
            return Err(config_err("--workers must be at least 1"));
        }
        // Neither the output location nor the worker count changes the results.
        let output = r.raw("output", opts.output.map(|p| p.display().to_string())).map(PathBuf::from);
        r.canonical.remove("output");
        r.canonical.remove("workers");
        let grid = match r.raw("grid", opts.grid) {
            Some(s) => parse_list("grid", &s)?,
            None => Vec::new(),
        };
        let target = r.parse("target", opts.target)?.unwrap_or(DEFAULT_TARGET);
        let method = match r.raw("method", opts.method).as_deref().map(str::to_ascii_lowercase).as_deref() {
            None | Some("exact") => MethodChoice::Exact,
            Some("mc" | "monte-carlo") => MethodChoice::Mc,
            Some(other) => return Err(config_err(format!("--method {other:?}: expected exact or mc"))),
        };
        let bracket = match r.raw("bracket", opts.bracket) {
            None => None,
            Some(s) => match parse_list("bracket", &s)?.as_slice() {
                &[lo, hi] if lo < hi => Some((lo, hi)),
                _ => return Err(config_err(format!("--bracket {s:?}: expected lo,hi with lo < hi"))),
            },
        };
        let scan = r.flag("scan", opts.scan)?;
        let n2_min = r.parse("n2-min", opts.n2_min)?.unwrap_or(1);
        let n2_max = r.parse("n2-max", opts.n2_max)?.unwrap_or(90);
        if n2_min == 0 || n2_min > n2_max {
            return Err(config_err(format!("bad n2 range {n2_min}..={n2_max}")));
        }
        let kind = match r.raw("kind", opts.kind).as_deref().map(str::to_ascii_lowercase).as_deref() {
            None | Some("independent") => FrontierKind::Independent,
            Some("two-pauli") => FrontierKind::TwoPauli,
            Some(other) => return Err(config_err(format!("--kind {other:?}: expected independent or two-pauli"))),
        };
        let classes = match r.raw("classes", opts.classes) {
            None => CodeClass::ALL.to_vec(),
            Some(s) => s.split(',').map(|c| c.parse::<CodeClass>()).collect::<Result<Vec<_>, _>>()?,
        };
        let max_single = r.parse("max-single", opts.max_single)?.unwrap_or(30);
        let max_inner = r.parse("max-inner", opts.max_inner)?.unwrap_or(8);
        let max_outer = r.parse("max-outer", opts.max_outer)?.unwrap_or(90);
        let top_only = r.flag("top-only", opts.top_only)?;
        let five_levels = match r.raw("five-levels", opts.five_levels) {
            None => DEFAULT_FIVE_QUBIT_DEPTHS,
            Some(s) => parse_range(&s)?,
        };

        let mut canonical = format!("command={command}\n");
        for (k, v) in &r.canonical {
            canonical += &format!("{k}={v}\n");
        }
        Ok(RunConfig {
            command: command.to_string(),
            family,
            family_given,
            stack,
            n1,
            p,
            samples,
            seed,
            tol,
            budget,
            percent,
            workers,
            output,
            grid,
            target,
            method,
            bracket,
            scan,
            n2_min,
            n2_max,
            kind,
            classes,
            max_single,
            max_inner,
            max_outer,
            top_only,
            five_levels,
            canonical,
        })
    }
}
