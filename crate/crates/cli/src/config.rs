//! Argument validation and Hamiltonian sources.

use std::fs;
use std::path::PathBuf;

use hamsim_core::oracle::{from_entry_list, random_sparse, EntryList, SparseOracle};
use hamsim_core::parity::{build_parity_oracle, ParityInstance};
use hamsim_core::NumericsConfig;

use crate::CliError;

/// A generator given with `--gen`.
#[derive(Debug, Clone, PartialEq)]
pub enum GenSpec {
    Random {
        n: u32,
        d: usize,
        seed: u64,
        norm: Option<f64>,
    },
    Parity {
        bits: String,
    },
}

impl GenSpec {
    /// Parses `random:n=5,d=2,seed=1,norm=1.0` or `parity:bits=0110`.
    pub fn parse(spec: &str) -> Result<Self, CliError> {
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| CliError::usage(format!("generator `{spec}` needs a `kind:` prefix")))?;
        let mut fields = std::collections::BTreeMap::new();
        for pair in rest.split(',').filter(|p| !p.is_empty()) {
            let (key, value) = pair.split_once('=').ok_or_else(|| {
                CliError::usage(format!("generator field `{pair}` is not key=value"))
            })?;
            fields.insert(key.trim(), value.trim());
        }
        let take = |key: &str| fields.get(key).copied();
        let number = |key: &str, default: Option<&str>| -> Result<String, CliError> {
            take(key)
                .or(default)
                .map(str::to_owned)
                .ok_or_else(|| CliError::usage(format!("generator `{kind}` needs `{key}=`")))
        };
        let parse_num = |key: &str, text: String| {
            text.parse::<f64>()
                .map_err(|_| CliError::usage(format!("`{key}={text}` is not a number")))
        };
        let allowed: &[&str] = match kind {
            "random" => &["n", "d", "seed", "norm"],
            "parity" => &["bits"],
            _ => return Err(CliError::usage(format!("unknown generator `{kind}`"))),
        };
        if let Some(extra) = fields.keys().find(|k| !allowed.contains(k)) {
            return Err(CliError::usage(format!(
                "generator `{kind}` has no field `{extra}`"
            )));
        }
        match kind {
            "random" => {
                let int = |key: &str, default: Option<&str>| -> Result<u64, CliError> {
                    let text = number(key, default)?;
                    text.parse::<u64>()
                        .map_err(|_| CliError::usage(format!("`{key}={text}` is not an integer")))
                };
                let norm = match take("norm") {
                    Some(text) => {
                        let v = parse_num("norm", text.to_owned())?;
                        if !(v.is_finite() && v > 0.0) {
                            return Err(CliError::usage("norm must be positive"));
                        }
                        Some(v)
                    }
                    None => None,
                };
                Ok(GenSpec::Random {
                    n: int("n", None)? as u32,
                    d: int("d", None)? as usize,
                    seed: int("seed", Some("0"))?,
                    norm,
                })
            }
            _ => Ok(GenSpec::Parity {
                bits: number("bits", None)?,
            }),
        }
    }
}

/// Where the Hamiltonian comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    File(PathBuf),
    Gen(GenSpec),
}

impl Source {
    /// Exactly one of `--input` and `--gen`.
    pub fn from_args(input: Option<PathBuf>, gen: Option<String>) -> Result<Self, CliError> {
        match (input, gen) {
            (Some(path), None) => Ok(Source::File(path)),
            (None, Some(spec)) => Ok(Source::Gen(GenSpec::parse(&spec)?)),
            (Some(_), Some(_)) => Err(CliError::usage("give either --input or --gen, not both")),
            (None, None) => Err(CliError::usage(
                "a Hamiltonian is required: --input <path> or --gen <spec>",
            )),
        }
    }

    pub fn load(&self, cfg: &NumericsConfig) -> Result<SparseOracle, CliError> {
        match self {
            Source::File(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
                let (list, d) = EntryList::parse(&text).map_err(CliError::usage)?;
                from_entry_list(&list, d).map_err(CliError::usage)
            }
            Source::Gen(GenSpec::Random { n, d, seed, norm }) => {
                random_sparse(*n, *d, *seed, *norm, cfg).map_err(CliError::usage)
            }
            Source::Gen(GenSpec::Parity { bits }) => {
                let instance = ParityInstance::parse(bits).map_err(CliError::usage)?;
                Ok(build_parity_oracle(&instance).oracle)
            }
        }
    }
}

/// Output encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Validated settings shared by the experiment subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: &'static str,
    pub source: Option<Source>,
    pub t: f64,
    pub eps: f64,
    pub k: Option<u32>,
    pub r: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        check_eps(self.eps)?;
        check_time(self.t)?;
        if self.k == Some(0) {
            return Err(CliError::usage("--k must be at least 1"));
        }
        if self.r == Some(0) {
            return Err(CliError::usage("--r must be at least 1"));
        }
        Ok(())
    }
}

pub fn check_eps(eps: f64) -> Result<(), CliError> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(CliError::usage(format!(
            "--eps must lie in (0, 1], got {eps}"
        )))
    }
}

pub fn check_time(t: f64) -> Result<(), CliError> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(CliError::usage(format!(
            "--time must be non-negative, got {t}"
        )))
    }
}

/// Comma-separated list of integers, e.g. `1,2,3`.
pub fn parse_list<T: std::str::FromStr>(text: &str, flag: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(|item| {
            item.trim()
                .parse::<T>()
                .map_err(|_| CliError::usage(format!("{flag}: `{item}` is not an integer")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_specs() {
        assert_eq!(
            GenSpec::parse("random:n=5,d=2,seed=7,norm=1.5").unwrap(),
            GenSpec::Random {
                n: 5,
                d: 2,
                seed: 7,
                norm: Some(1.5)
            }
        );
        assert_eq!(
            GenSpec::parse("random:n=3,d=1").unwrap(),
            GenSpec::Random {
                n: 3,
                d: 1,
                seed: 0,
                norm: None
            }
        );
        assert_eq!(
            GenSpec::parse("parity:bits=0110").unwrap(),
            GenSpec::Parity {
                bits: "0110".into()
            }
        );
        for bad in [
            "random",
            "random:n=3",
            "walk:n=3",
            "random:n=3,d=x",
            "random:n=3,d=2,q=1",
            "random:n=3,d=1,norm=-1",
        ] {
            assert!(GenSpec::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn exactly_one_source() {
        assert!(Source::from_args(None, None).is_err());
        assert!(Source::from_args(Some("a".into()), Some("parity:bits=1".into())).is_err());
        assert!(Source::from_args(Some("a".into()), None).is_ok());
    }

    #[test]
    fn ranges() {
        assert!(check_eps(1.0).is_ok());
        assert!(check_eps(1.5).is_err());
        assert!(check_eps(0.0).is_err());
        assert!(check_time(0.0).is_ok());
        assert!(check_time(-1.0).is_err());
        assert_eq!(parse_list::<u32>("1, 2,3", "--k").unwrap(), vec![1, 2, 3]);
        assert!(parse_list::<u32>("1,a", "--k").is_err());
    }
}
