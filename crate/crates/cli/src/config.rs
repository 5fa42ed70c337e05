//! Flat `key = value` configuration shared by flags and config files.
//!
//! Grammar, one entry per line:
//!
//! ```text
//! line    := blank | comment | entry
//! comment := '#' anything
//! entry   := key '=' value
//! key     := [a-z][a-z0-9-]*
//! ```
//!
//! Surrounding whitespace is trimmed. Rationals are written `p/q`, integers or
//! finite decimals. A `command` key, if present, must name the subcommand
//! being run. Keys a subcommand does not list are rejected, as are repeated
//! keys. Flags given on the command line override the file.

use std::collections::BTreeMap;
use std::fmt;

use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Clone, Copy, Debug)]
pub enum Kind {
    Int { min: u64, max: u64 },
    Text,
}

#[derive(Clone, Copy, Debug)]
pub struct Key {
    pub name: &'static str,
    pub kind: Kind,
    pub default: Option<&'static str>,
    pub help: &'static str,
}

const fn int(name: &'static str, min: u64, max: u64, default: Option<&'static str>, help: &'static str) -> Key {
    Key { name, kind: Kind::Int { min, max }, default, help }
}

const fn text(name: &'static str, default: Option<&'static str>, help: &'static str) -> Key {
    Key { name, kind: Kind::Text, default, help }
}

/// Output locations; they never enter the config digest.
pub const OUTPUT_KEYS: [&str; 3] = ["out", "csv", "artifact"];

const OUT: Key = text("out", None, "write the JSON report here instead of stdout");
const CSV: Key = text("csv", None, "write the CSV artifact here");
const ARTIFACT: Key = text("artifact", None, "write the JSON artifact here");
const FAMILY: Key = text(
    "family",
    None,
    "@file.json (FiniteFamily or array of strings), full:<base>:<min>:<max>, or strings separated by ';'",
);
const BASE: Key = text("base", Some("[]"), "base for inline or array families");
const K: Key = int("k", 0, 8, None, "slalom width");
const HEIGHT: Key = int("height", 0, 16, None, "slalom height bound");
const IFS: Key = text("ifs", Some("1/10,0;1/10,1/2"), "similarity maps as ratio,offset;ratio,offset");
const SEED: Key = int("seed", 0, u64::MAX, Some("0"), "SplitMix64 seed");

#[derive(Debug)]
pub struct Command {
    pub name: &'static str,
    pub about: &'static str,
    pub keys: &'static [Key],
}

pub const COMMANDS: &[Command] = &[
    Command { name: "fat", about: "decide (k, height)-fatness of a finite family", keys: &[FAMILY, BASE, K, HEIGHT, OUT] },
    Command {
        name: "escape",
        about: "test whether a string escapes a slalom",
        keys: &[text("t", None, "digit string, e.g. [1,0,2]"), text("slalom", None, "slalom text form"), OUT],
    },
    Command {
        name: "antichain",
        about: "extract a pairwise incomparable (k-1)-fat subfamily",
        keys: &[FAMILY, BASE, K, HEIGHT, text("mode", Some("skip"), "skip | every"), OUT, CSV],
    },
    Command {
        name: "prune",
        about: "keep the members parallel to sigma and decide (k-1)-fatness",
        keys: &[FAMILY, BASE, K, HEIGHT, text("sigma", None, "digit string parallel to the base"), OUT, CSV],
    },
    Command {
        name: "build-cond",
        about: "build and validate a finite tree condition",
        keys: &[
            int("depth", 1, 14, None, "maximum string length"),
            int("kmax", 1, 10, Some("6"), "largest k in the length schedule"),
            OUT,
            ARTIFACT,
        ],
    },
    Command {
        name: "fuse",
        about: "run the fusion construction and replay it",
        keys: &[
            text("condition", None, "@condition.json; built from depth when absent"),
            int("depth", 1, 14, Some("8"), "depth of the built condition"),
            text("mode", Some("plain"), "plain | avoiding"),
            int("steps", 0, 100_000, Some("20"), "rounds after round 0"),
            text("opens", Some("whole;append:0"), "dense opens: whole | append:d,d,… ; separated"),
            int("bfs-cap", 1, 10_000_000, Some("100000"), "search cap for dense-open extensions"),
            OUT,
            ARTIFACT,
        ],
    },
    Command {
        name: "verify-cert",
        about: "extract (from a run) or read a level certificate and validate it",
        keys: &[
            text("run", None, "@run.json from fuse"),
            text("cert", None, "@certificate.json"),
            OUT,
            ARTIFACT,
        ],
    },
    Command {
        name: "dim",
        about: "similarity and box-counting dimension, and the N choice",
        keys: &[
            IFS,
            text("depths", Some("4..12"), "box-fit depth range a..b"),
            int("box-base", 2, 1000, None, "grid base for box counting"),
            text("upper", None, "explicit dimension bound for choose_N"),
            OUT,
            CSV,
        ],
    },
    Command {
        name: "cover",
        about: "depth-d interval cover of an IFS attractor",
        keys: &[IFS, int("depth", 0, 24, Some("4"), "cover depth"), int("cap", 1, 1 << 24, Some("1048576"), "interval cap"), OUT, CSV],
    },
    Command {
        name: "minkowski",
        about: "Minkowski sum or difference of two covers",
        keys: &[
            text("a", None, "@cover.csv or lo,hi;lo,hi (defaults to the IFS cover)"),
            text("b", None, "@cover.csv or lo,hi;lo,hi (defaults to the IFS cover)"),
            IFS,
            int("depth", 0, 24, Some("4"), "depth of the IFS cover"),
            text("op", Some("diff"), "sum | diff"),
            int("cap", 1, 1 << 24, Some("1048576"), "interval cap"),
            OUT,
            CSV,
        ],
    },
    Command {
        name: "fn-check",
        about: "decide whether a tuple is covered by one translate of K'",
        keys: &[IFS, text("xs", None, "tuple as x,x,…"), int("depth", 0, 24, Some("4"), "cover depth"), OUT],
    },
    Command {
        name: "scheme",
        about: "build and validate a Cantor scheme",
        keys: &[
            IFS,
            text("p", Some("0,1"), "perfect set P: @cover.csv or lo,hi;lo,hi"),
            int("n", 1, 16, Some("2"), "tuple size N"),
            int("depth", 0, 10, Some("4"), "number of levels"),
            int("budget", 0, 40, Some("12"), "cover depth budget per shrink"),
            int("tuple-cap", 1, 1 << 32, Some("1048576"), "maximum tuples per level"),
            OUT,
            ARTIFACT,
        ],
    },
    Command {
        name: "hits",
        about: "count scheme cells met by random translates of K'",
        keys: &[
            text("scheme", None, "@scheme.json; built from the scheme keys when absent"),
            IFS,
            text("p", Some("0,1"), "perfect set P"),
            int("n", 1, 16, Some("2"), "tuple size N"),
            int("depth", 0, 10, Some("4"), "number of levels"),
            int("budget", 0, 40, Some("12"), "cover depth budget per shrink"),
            text("r", None, "a single translate instead of random ones"),
            int("samples", 1, 1_000_000, Some("1000"), "random translates"),
            SEED,
            text("lo", Some("-1"), "lower end of the translate range"),
            text("hi", Some("1"), "upper end of the translate range"),
            int("check-depth", 0, 30, None, "K' cover depth (default: scheme depth)"),
            int("deepen", 0, 10, Some("3"), "extra depths tried on exceptions"),
            OUT,
            CSV,
        ],
    },
    Command {
        name: "sample",
        about: "greedy grid sample avoiding K - K",
        keys: &[
            IFS,
            int("m", 1, 100_000, Some("64"), "points wanted"),
            text("grid", Some("1/1000"), "grid step"),
            int("depth", 0, 20, Some("6"), "cover depth"),
            text("exclusion", None, "excluded set: @cover.csv or lo,hi;lo,hi"),
            OUT,
            CSV,
        ],
    },
    Command {
        name: "verify-sample",
        about: "check |K ∩ (X + t)| ≤ 1 for random t on a rebuilt sample",
        keys: &[
            IFS,
            int("m", 1, 100_000, Some("64"), "points wanted"),
            text("grid", Some("1/1000"), "grid step"),
            int("depth", 0, 20, Some("6"), "cover depth"),
            text("exclusion", None, "excluded set: @cover.csv or lo,hi;lo,hi"),
            int("trials", 1, 1_000_000, Some("1000"), "random translates"),
            SEED,
            text("lo", Some("-1"), "lower end of the translate range"),
            text("hi", Some("1"), "upper end of the translate range"),
            int("check-depth", 0, 20, None, "cover depth of the check (default: depth)"),
            OUT,
            CSV,
        ],
    },
    Command {
        name: "replay",
        about: "re-validate a stored fusion run",
        keys: &[text("run", None, "@run.json from fuse"), OUT],
    },
];

pub fn command(name: &str) -> Option<&'static Command> {
    COMMANDS.iter().find(|c| c.name == name)
}

/// Effective settings of one invocation: defaults, then file, then flags.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: &'static Command,
    values: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn new(
        command: &'static Command,
        file: Option<&str>,
        flags: BTreeMap<String, String>,
    ) -> Result<Self, CliError> {
        let mut values: BTreeMap<String, String> = command
            .keys
            .iter()
            .filter_map(|k| k.default.map(|d| (k.name.to_string(), d.to_string())))
            .collect();
        if let Some(text) = file {
            for (k, v) in parse_file(text)? {
                if k == "command" {
                    if v != command.name {
                        return Err(CliError::Usage(format!("config is for `{v}`, not `{}`", command.name)));
                    }
                    continue;
                }
                values.insert(k, v);
            }
        }
        values.extend(flags);
        let cfg = RunConfig { command, values };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), CliError> {
        for (k, v) in &self.values {
            let Some(key) = self.command.keys.iter().find(|x| x.name == k) else {
                return Err(CliError::Usage(format!("unknown key `{k}` for `{}`", self.command.name)));
            };
            if let Kind::Int { min, max } = key.kind {
                let n: u64 = v.parse().map_err(|_| CliError::Usage(format!("`{k}` must be an integer, got {v:?}")))?;
                if n < min || n > max {
                    return Err(CliError::Usage(format!("`{k}` = {n} is outside {min}..={max}")));
                }
            }
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str, CliError> {
        self.get(key).ok_or_else(|| CliError::Usage(format!("`{}` needs `{key}`", self.command.name)))
    }

    pub fn int(&self, key: &str) -> Result<usize, CliError> {
        Ok(self.require(key)?.parse::<u64>().expect("checked on load") as usize)
    }

    pub fn opt_int(&self, key: &str) -> Option<usize> {
        self.get(key).map(|v| v.parse::<u64>().expect("checked on load") as usize)
    }

    pub fn u64(&self, key: &str) -> Result<u64, CliError> {
        Ok(self.require(key)?.parse().expect("checked on load"))
    }

    /// Settings that determine the result, i.e. everything but output paths.
    pub fn effective(&self) -> BTreeMap<&str, &str> {
        self.values
            .iter()
            .filter(|(k, _)| !OUTPUT_KEYS.contains(&k.as_str()))
            .map(|(k, v)| (k.as_str(), v.as_str()))
            .collect()
    }

    /// SHA-256 of `command=<name>` followed by the effective `key=value`
    /// lines in key order, each newline-terminated.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("command={}\n", self.command.name).as_bytes());
        for (k, v) in self.effective() {
            h.update(format!("{k}={v}\n").as_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "command = {}", self.command.name)?;
        for (k, v) in &self.values {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

pub fn parse_file(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", n + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        let valid = k.starts_with(|c: char| c.is_ascii_lowercase())
            && k.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-');
        if !valid {
            return Err(CliError::Usage(format!("config line {}: bad key {k:?}", n + 1)));
        }
        if out.iter().any(|(x, _)| x == k) {
            return Err(CliError::Usage(format!("config line {}: `{k}` repeated", n + 1)));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn file_then_flags() {
        let fat = command("fat").unwrap();
        let cfg = RunConfig::new(fat, Some("# c\nk = 1\nheight=2\n"), flags(&[("k", "2")])).unwrap();
        assert_eq!(cfg.int("k").unwrap(), 2);
        assert_eq!(cfg.int("height").unwrap(), 2);
        assert_eq!(cfg.get("base"), Some("[]"));
    }

    #[test]
    fn rejects_bad_input() {
        let fat = command("fat").unwrap();
        assert!(RunConfig::new(fat, Some("depth = 3"), BTreeMap::new()).is_err());
        assert!(RunConfig::new(fat, Some("k = 1\nk = 2"), BTreeMap::new()).is_err());
        assert!(RunConfig::new(fat, Some("command = dim"), BTreeMap::new()).is_err());
        assert!(RunConfig::new(fat, None, flags(&[("k", "99")])).is_err());
        assert!(RunConfig::new(fat, None, flags(&[("k", "x")])).is_err());
        assert!(parse_file("no equals sign").is_err());
        assert!(parse_file("Bad = 1").is_err());
    }

    #[test]
    fn digest_ignores_outputs() {
        let dim = command("dim").unwrap();
        let a = RunConfig::new(dim, None, flags(&[("out", "a.json")])).unwrap();
        let b = RunConfig::new(dim, None, flags(&[("out", "b.json")])).unwrap();
        let c = RunConfig::new(dim, None, flags(&[("depths", "4..10")])).unwrap();
        assert_eq!(a.digest(), b.digest());
        assert_ne!(a.digest(), c.digest());
        assert_eq!(a.digest().len(), 64);
    }
}
