use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use clockforge::tuning::Strength;
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "clockforge",
    version,
    about = "Clock Hamiltonian spectra, gaps and scaling fits"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    /// JSON experiment file `{"command": ..., "parameters": {...}}`.
    /// Flags given on the command line win over file values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Spectrum,
    GapScan,
    Biased,
    Feynman,
    Kitaev,
    Adiabatic,
    Idling,
    Multicog,
    Tune,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analytic and numeric spectrum of one walk with endpoint loops.
    Spectrum(Params),
    /// Gap versus N for a walk family, with a power-law fit.
    GapScan(Params),
    /// Walk biased towards its right end.
    Biased(Params),
    /// Feynman clock dynamics and Cesàro-averaged success probability.
    Feynman(Params),
    /// Block decomposition and promise-gap checks for toy verifiers.
    Kitaev(Params),
    /// Three-section adiabatic schedule: gaps and integrated fidelity.
    Adiabatic(Params),
    /// Domain-wall clock with an idling chain.
    Idling(Params),
    /// Surfer and multi-cog qutrit clocks.
    Multicog(Params),
    /// Pulse clock with the excitation-number tuning term.
    Tune(Params),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// `2I + H^(1,1)`.
    Laplacian,
    /// `H^(0,0)`.
    Free,
    /// `H^(L,R)` from `--left` and `--right`.
    Loops,
    /// Biased walk with `--bias`.
    Biased,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Params {
    /// Size or sizes: `16`, `16,32,64`, `8..20` or `8..20:2` (inclusive).
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub left: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub right: Option<f64>,
    #[arg(long)]
    pub bias: Option<f64>,
    /// Extra qubits (idling) or cogs (multicog).
    #[arg(long)]
    pub c: Option<usize>,
    /// Data qubits of the toy verifier.
    #[arg(long)]
    pub d: Option<usize>,
    /// `cubic`, `threehalves` or `const:<x>`.
    #[arg(long)]
    pub v_rule: Option<String>,
    /// Ramp duration of the adiabatic schedule.
    #[arg(long)]
    pub t1: Option<f64>,
    /// Middle durations; a single value `c` expands to `c,2c,4c,8c`.
    #[arg(long)]
    pub t2_ladder: Option<String>,
    /// Root-finding tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    /// Identity steps appended to the circuit.
    #[arg(long)]
    pub pad: Option<usize>,
    /// Circuit JSON file.
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl Command {
    pub fn split(self) -> (CommandKind, Params) {
        match self {
            Command::Spectrum(p) => (CommandKind::Spectrum, p),
            Command::GapScan(p) => (CommandKind::GapScan, p),
            Command::Biased(p) => (CommandKind::Biased, p),
            Command::Feynman(p) => (CommandKind::Feynman, p),
            Command::Kitaev(p) => (CommandKind::Kitaev, p),
            Command::Adiabatic(p) => (CommandKind::Adiabatic, p),
            Command::Idling(p) => (CommandKind::Idling, p),
            Command::Multicog(p) => (CommandKind::Multicog, p),
            Command::Tune(p) => (CommandKind::Tune, p),
        }
    }
}

impl CommandKind {
    pub const ALL: [CommandKind; 9] = [
        CommandKind::Spectrum,
        CommandKind::GapScan,
        CommandKind::Biased,
        CommandKind::Feynman,
        CommandKind::Kitaev,
        CommandKind::Adiabatic,
        CommandKind::Idling,
        CommandKind::Multicog,
        CommandKind::Tune,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Spectrum => "spectrum",
            CommandKind::GapScan => "gap-scan",
            CommandKind::Biased => "biased",
            CommandKind::Feynman => "feynman",
            CommandKind::Kitaev => "kitaev",
            CommandKind::Adiabatic => "adiabatic",
            CommandKind::Idling => "idling",
            CommandKind::Multicog => "multicog",
            CommandKind::Tune => "tune",
        }
    }
}

pub fn command_from_name(name: &str) -> Result<CommandKind, CliError> {
    CommandKind::ALL
        .into_iter()
        .find(|k| k.name() == name)
        .ok_or_else(|| CliError::usage("command", format!("unknown command {name:?}")))
}

/// Reads a config file, returning its command (if any) and parameters.
pub fn read_config(path: &std::path::Path) -> Result<(Option<CommandKind>, Params), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage("--config", format!("{}: {e}", path.display())))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| CliError::usage("--config", e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| CliError::usage("--config", "top level must be an object"))?;
    let command = match obj.get("command") {
        Some(Value::String(s)) => Some(command_from_name(s)?),
        Some(_) => return Err(CliError::usage("--config", "\"command\" must be a string")),
        None => None,
    };
    let mut params = Params::default();
    if let Some(p) = obj.get("parameters") {
        let map = p
            .as_object()
            .ok_or_else(|| CliError::usage("--config", "\"parameters\" must be an object"))?;
        fill_from_map(&mut params, map)?;
    }
    for key in obj.keys() {
        if key != "command" && key != "parameters" {
            return Err(CliError::usage("--config", format!("unknown key {key:?}")));
        }
    }
    Ok((command, params))
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(items) => items
            .iter()
            .map(scalar)
            .collect::<Option<Vec<_>>>()
            .map(|v| v.join(",")),
        _ => None,
    }
}

fn fill_from_map(p: &mut Params, map: &Map<String, Value>) -> Result<(), CliError> {
    for (key, v) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        let s =
            scalar(v).ok_or_else(|| CliError::usage(&flag, "expected a number, string or list"))?;
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| CliError::usage(&flag, format!("{s:?} is not a number")))
        };
        let int = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| CliError::usage(&flag, format!("{s:?} is not a non-negative integer")))
        };
        match key.as_str() {
            "n" => p.n = Some(s),
            "left" => p.left = Some(num(&s)?),
            "right" => p.right = Some(num(&s)?),
            "bias" => p.bias = Some(num(&s)?),
            "c" => p.c = Some(int(&s)?),
            "d" => p.d = Some(int(&s)?),
            "v_rule" | "v-rule" => p.v_rule = Some(s),
            "t1" => p.t1 = Some(num(&s)?),
            "t2_ladder" | "t2-ladder" => p.t2_ladder = Some(s),
            "tol" => p.tol = Some(num(&s)?),
            "family" => {
                p.family = Some(Family::from_str(&s, true).map_err(|e| CliError::usage(&flag, e))?)
            }
            "pad" => p.pad = Some(int(&s)?),
            "circuit" => p.circuit = Some(PathBuf::from(s)),
            "out" => p.out = Some(PathBuf::from(s)),
            "format" => {
                p.format = Some(Format::from_str(&s, true).map_err(|e| CliError::usage(&flag, e))?)
            }
            _ => {
                return Err(CliError::usage(
                    "--config",
                    format!("unknown parameter {key:?}"),
                ))
            }
        }
    }
    Ok(())
}

impl Params {
    /// Fills every unset field from `defaults`.
    pub fn or(self, defaults: Params) -> Params {
        Params {
            n: self.n.or(defaults.n),
            left: self.left.or(defaults.left),
            right: self.right.or(defaults.right),
            bias: self.bias.or(defaults.bias),
            c: self.c.or(defaults.c),
            d: self.d.or(defaults.d),
            v_rule: self.v_rule.or(defaults.v_rule),
            t1: self.t1.or(defaults.t1),
            t2_ladder: self.t2_ladder.or(defaults.t2_ladder),
            tol: self.tol.or(defaults.tol),
            family: self.family.or(defaults.family),
            pad: self.pad.or(defaults.pad),
            circuit: self.circuit.or(defaults.circuit),
            out: self.out.or(defaults.out),
            format: self.format.or(defaults.format),
        }
    }

    pub fn sizes(&self) -> Result<Vec<usize>, CliError> {
        let raw = self
            .n
            .as_deref()
            .ok_or_else(|| CliError::usage("--n", "required"))?;
        parse_sizes(raw).map_err(|m| CliError::usage("--n", m))
    }

    pub fn single_size(&self) -> Result<usize, CliError> {
        match self.sizes()?.as_slice() {
            [n] => Ok(*n),
            _ => Err(CliError::usage(
                "--n",
                "expects a single size for this command",
            )),
        }
    }

    pub fn strength(&self) -> Result<Strength, CliError> {
        let raw = self.v_rule.as_deref().unwrap_or("cubic");
        match raw {
            "cubic" => Ok(Strength::Cubic),
            "threehalves" => Ok(Strength::ThreeHalves),
            s => match s.strip_prefix("const:").map(str::parse::<f64>) {
                Some(Ok(v)) if v > 0.0 && v.is_finite() => Ok(Strength::Fixed(v)),
                _ => Err(CliError::usage(
                    "--v-rule",
                    format!("{raw:?}; expected cubic, threehalves or const:<positive number>"),
                )),
            },
        }
    }

    pub fn ladder(&self) -> Result<Vec<f64>, CliError> {
        let raw = self.t2_ladder.as_deref().unwrap_or("25");
        let vals: Vec<f64> = raw
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| {
                CliError::usage("--t2-ladder", format!("{raw:?} is not a list of numbers"))
            })?;
        if vals.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(CliError::usage(
                "--t2-ladder",
                "durations must be finite and non-negative",
            ));
        }
        Ok(match vals.as_slice() {
            [c] => (0..4).map(|k| c * (1 << k) as f64).collect(),
            _ => vals,
        })
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(Format::Json)
    }
}

/// `16`, `16,32`, `8..20`, `8..20:2`, or any comma-joined mix.
pub fn parse_sizes(raw: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let bad = || format!("{part:?} is not a size, list or range");
        if let Some((a, rest)) = part.split_once("..") {
            let (b, step) = match rest.split_once(':') {
                Some((b, s)) => (b, s.parse::<usize>().map_err(|_| bad())?),
                None => (rest, 1),
            };
            let a: usize = a.parse().map_err(|_| bad())?;
            let b: usize = b.trim_start_matches('=').parse().map_err(|_| bad())?;
            if step == 0 || b < a {
                return Err(bad());
            }
            out.extend((a..=b).step_by(step));
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() {
        return Err("no sizes given".into());
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_lists() {
        assert_eq!(parse_sizes("16").unwrap(), [16]);
        assert_eq!(parse_sizes("64, 16,32").unwrap(), [16, 32, 64]);
        assert_eq!(parse_sizes("8..12").unwrap(), [8, 9, 10, 11, 12]);
        assert_eq!(parse_sizes("8..=20:4,3").unwrap(), [3, 8, 12, 16, 20]);
        assert!(parse_sizes("8..4").is_err());
        assert!(parse_sizes("x").is_err());
        assert!(parse_sizes("").is_err());
    }

    #[test]
    fn strength_rules() {
        let p = |s: &str| {
            Params {
                v_rule: Some(s.into()),
                ..Default::default()
            }
            .strength()
        };
        assert_eq!(p("cubic").unwrap(), Strength::Cubic);
        assert_eq!(p("const:0.5").unwrap(), Strength::Fixed(0.5));
        assert!(p("const:-1").is_err());
        assert!(p("quartic").is_err());
    }

    #[test]
    fn ladder_expands_single_value() {
        let p = Params {
            t2_ladder: Some("10".into()),
            ..Default::default()
        };
        assert_eq!(p.ladder().unwrap(), [10.0, 20.0, 40.0, 80.0]);
    }

    #[test]
    fn flags_override_config() {
        let flags = Params {
            n: Some("4".into()),
            ..Default::default()
        };
        let file = Params {
            n: Some("8".into()),
            c: Some(3),
            ..Default::default()
        };
        let merged = flags.or(file);
        assert_eq!((merged.n.as_deref(), merged.c), (Some("4"), Some(3)));
    }
}
