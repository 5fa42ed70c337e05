//! Text forms of the structured inputs: families, covers, opens, rationals.

use std::fs;
use std::path::{Path, PathBuf};

use fatcantor::fatness::FiniteFamily;
use fatcantor::poset::DenseOpenSpec;
use fatcantor::{DigitString, IntervalCover, Rational, Scalar, SimilarIfs};
use serde::de::DeserializeOwned;

use crate::CliError;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Reads `@path` arguments.
pub fn read_at(spec: &str) -> Result<Option<String>, CliError> {
    match spec.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).map(Some).map_err(|e| usage(format!("cannot read {path}: {e}"))),
        None => Ok(None),
    }
}

pub fn json_file<T: DeserializeOwned>(spec: &str) -> Result<T, CliError> {
    let text = read_at(spec)?.ok_or_else(|| usage(format!("expected @file, got {spec:?}")))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{spec}: {e}")))
}

pub fn digits(s: &str) -> Result<DigitString, CliError> {
    s.trim().parse().map_err(|e| usage(format!("bad digit string {s:?}: {e}")))
}

pub fn rational(key: &str, s: &str) -> Result<Rational, CliError> {
    Rational::parse_text(s).ok_or_else(|| usage(format!("`{key}`: bad number {s:?}")))
}

pub fn ifs(s: &str) -> Result<SimilarIfs, CliError> {
    s.parse().map_err(|e| usage(format!("bad IFS {s:?}: {e}")))
}

/// `@file.json` holding a family object or an array of strings,
/// `full:<base>:<min>:<max>`, or strings separated by `;`.
pub fn family(spec: &str, base: &str) -> Result<FiniteFamily, CliError> {
    let base = digits(base)?;
    let build = |b: DigitString, members: Vec<DigitString>| {
        FiniteFamily::new(b, members).map_err(|e| usage(format!("family: {e}")))
    };
    if let Some(text) = read_at(spec)? {
        let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| usage(format!("{spec}: {e}")))?;
        let (b, members) = match v {
            serde_json::Value::Object(mut o) => {
                let b = match o.remove("base") {
                    Some(b) => serde_json::from_value(b).map_err(|e| usage(format!("{spec}: base: {e}")))?,
                    None => base,
                };
                let m = o.remove("members").ok_or_else(|| usage(format!("{spec}: no `members`")))?;
                (b, serde_json::from_value(m).map_err(|e| usage(format!("{spec}: members: {e}")))?)
            }
            other => (base, serde_json::from_value(other).map_err(|e| usage(format!("{spec}: {e}")))?),
        };
        return build(b, members);
    }
    if let Some(rest) = spec.strip_prefix("full:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let [b, lo, hi] = parts[..] else {
            return Err(usage("full families are full:<base>:<min>:<max>"));
        };
        let len = |x: &str| x.trim().parse::<usize>().map_err(|_| usage(format!("bad length {x:?}")));
        let (b, lo, hi) = (digits(b)?, len(lo)?, len(hi)?);
        if hi > b.len() + 6 {
            return Err(usage("full families are limited to 6 columns above the base"));
        }
        return Ok(FiniteFamily::full(&b, lo, hi));
    }
    let members = spec.split(';').filter(|p| !p.trim().is_empty()).map(digits).collect::<Result<Vec<_>, _>>()?;
    build(base, members)
}

/// `@file.csv` (`lo,hi` rows) or inline `lo,hi;lo,hi`.
pub fn cover(spec: &str) -> Result<IntervalCover, CliError> {
    let text = match read_at(spec)? {
        Some(t) => t,
        None => spec.replace(';', "\n"),
    };
    IntervalCover::from_csv(&text).map_err(|e| usage(format!("cover {spec:?}: {e}")))
}

/// `whole`, `append:d,d,…`, separated by `;`.
pub fn opens(spec: &str) -> Result<Vec<DenseOpenSpec>, CliError> {
    let mut out = Vec::new();
    for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        if part == "whole" {
            out.push(DenseOpenSpec::whole_space());
        } else if let Some(ds) = part.strip_prefix("append:") {
            let ds = ds
                .split(',')
                .map(|d| d.trim().parse::<u8>().map_err(|_| usage(format!("bad digit in {part:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            out.push(DenseOpenSpec::append(ds));
        } else {
            return Err(usage(format!("unknown dense open {part:?}")));
        }
    }
    Ok(out)
}

/// Comma-separated rationals.
pub fn tuple(key: &str, spec: &str) -> Result<Vec<Rational>, CliError> {
    spec.split(',').map(|x| rational(key, x.trim())).collect()
}

/// `a..b`, inclusive.
pub fn range(key: &str, spec: &str) -> Result<std::ops::RangeInclusive<usize>, CliError> {
    let (a, b) = spec.split_once("..").ok_or_else(|| usage(format!("`{key}` must be a..b")))?;
    let n = |x: &str| x.trim().parse::<usize>().map_err(|_| usage(format!("`{key}`: bad bound {x:?}")));
    let (a, b) = (n(a)?, n(b)?);
    if a > b || b > 30 {
        return Err(usage(format!("`{key}` = {spec} must satisfy a ≤ b ≤ 30")));
    }
    Ok(a..=b)
}

/// Relative output paths land in `$FATCANTOR_OUT_DIR` when it is set.
pub fn out_path(p: &str) -> PathBuf {
    match std::env::var_os("FATCANTOR_OUT_DIR") {
        Some(dir) if Path::new(p).is_relative() => Path::new(&dir).join(p),
        _ => PathBuf::from(p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_forms() {
        assert_eq!(family("full:[]:2:2", "[]").unwrap().len(), 12);
        let f = family("[0,1];[1]", "[]").unwrap();
        assert_eq!(f.len(), 2);
        assert!(family("[0,1];[1]", "[0]").is_err());
        assert!(family("full:[]:1", "[]").is_err());
    }

    #[test]
    fn covers_opens_ranges() {
        assert_eq!(cover("0,1/10;1/2,3/5").unwrap().len(), 2);
        assert!(cover("1,0").is_err());
        assert_eq!(opens("whole; append:1,0").unwrap().len(), 2);
        assert!(opens("half").is_err());
        assert_eq!(range("d", "4..12").unwrap(), 4..=12);
        assert!(range("d", "5..2").is_err());
        assert_eq!(tuple("xs", "0, 1/2").unwrap().len(), 2);
    }
}
