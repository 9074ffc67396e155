//! Family configuration files: a flat JSON or TOML table with a `family`
//! discriminator and the parameters that family uses.

use std::path::Path;

use kepler_geom::calabi_families::FamilyKind;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub family: String,
    pub n: Option<usize>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub a1: Option<f64>,
    pub a2: Option<f64>,
    pub c: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub lambda: Option<f64>,
    pub r: Option<f64>,
    /// Working interval of the moment variable for EINSTEIN and CSC.
    pub interval: Option<[f64; 2]>,
}

/// What a config describes, with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Family(FamilyKind),
    /// The Kepler metric on the n-conifold.
    Kepler {
        n: usize,
    },
    /// Ricci-flat radial profile on the cone.
    Conifold {
        n: usize,
        c: f64,
        c1: f64,
    },
    /// Ricci-flat radial profile on `Σw² = a`, parametrised by `|a|`.
    Deformed {
        n: usize,
        a: f64,
        c: f64,
    },
    Einstein {
        n: usize,
        lambda: f64,
        c1: f64,
        interval: (f64, f64),
    },
    Csc {
        n: usize,
        r: f64,
        c1: f64,
        c2: f64,
        interval: (f64, f64),
    },
}

const DEFAULT_INTERVAL: (f64, f64) = (0.2, 2.0);

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Usage(format!("invalid config: {}", msg.into()))
}

impl Config {
    pub fn from_path(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        let toml_ext = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
        if toml_ext {
            Self::from_toml(&text)
        } else {
            Self::from_json(&text)
        }
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| bad(e.to_string()))
    }

    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| bad(e.to_string()))
    }

    fn present(&self) -> Vec<&'static str> {
        let opt = [
            ("n", self.n.is_some()),
            ("a", self.a.is_some()),
            ("b", self.b.is_some()),
            ("a1", self.a1.is_some()),
            ("a2", self.a2.is_some()),
            ("c", self.c.is_some()),
            ("c1", self.c1.is_some()),
            ("c2", self.c2.is_some()),
            ("lambda", self.lambda.is_some()),
            ("r", self.r.is_some()),
            ("interval", self.interval.is_some()),
        ];
        opt.iter().filter(|(_, p)| *p).map(|(k, _)| *k).collect()
    }

    fn need<T: Copy>(&self, name: &str, v: Option<T>) -> CliResult<T> {
        v.ok_or_else(|| bad(format!("{} needs `{name}`", self.family)))
    }

    fn interval(&self) -> CliResult<(f64, f64)> {
        match self.interval {
            None => Ok(DEFAULT_INTERVAL),
            Some([lo, hi]) if lo < hi => Ok((lo, hi)),
            Some([lo, hi]) => Err(bad(format!("interval [{lo}, {hi}] is empty"))),
        }
    }

    pub fn target(&self) -> CliResult<Target> {
        let family = self.family.to_ascii_uppercase();
        let allowed: &[&str] = match family.as_str() {
            "UN_RF" | "QUOTIENT_ON" => &["n", "b"],
            "EH" => &["a", "b", "c1", "c2"],
            "RESOLVED3" => &["a"],
            "P1P1" | "O22" => &["a1", "a2"],
            "KEPLER_K3_LIFT" | "KRF_K3" => &[],
            "KEPLER" => &["n"],
            "CONIFOLD" => &["n", "c", "c1"],
            "DEFORMED" => &["n", "a", "c"],
            "EINSTEIN" => &["n", "lambda", "c1", "interval"],
            "CSC" => &["n", "r", "c1", "c2", "interval"],
            other => return Err(bad(format!("unknown family `{other}`"))),
        };
        if let Some(extra) = self.present().into_iter().find(|k| !allowed.contains(k)) {
            return Err(bad(format!("`{extra}` is not a parameter of {family}")));
        }
        let t = match family.as_str() {
            "UN_RF" => Target::Family(FamilyKind::UnRf { n: self.need("n", self.n)?, b: self.need("b", self.b)? }),
            "QUOTIENT_ON" => {
                Target::Family(FamilyKind::QuotientOn { n: self.need("n", self.n)?, b: self.need("b", self.b)? })
            }
            "EH" => {
                let a = self.need("a", self.a)?;
                let (c1, c2) = match (self.b, self.c1, self.c2) {
                    (Some(b), None, None) => (1.0, b * b),
                    (None, Some(c1), Some(c2)) => (c1, c2),
                    _ => return Err(bad("EH takes either `b` or both `c1` and `c2`")),
                };
                Target::Family(FamilyKind::Eh { a, c1, c2 })
            }
            "RESOLVED3" => Target::Family(FamilyKind::Resolved3 { a: self.need("a", self.a)? }),
            "P1P1" => Target::Family(FamilyKind::P1p1 { a1: self.need("a1", self.a1)?, a2: self.need("a2", self.a2)? }),
            "O22" => Target::Family(FamilyKind::O22 { a1: self.need("a1", self.a1)?, a2: self.need("a2", self.a2)? }),
            "KEPLER_K3_LIFT" => Target::Family(FamilyKind::KeplerK3Lift),
            "KRF_K3" => Target::Family(FamilyKind::KrfK3),
            "KEPLER" => Target::Kepler { n: self.need("n", self.n)? },
            "CONIFOLD" => {
                Target::Conifold { n: self.need("n", self.n)?, c: self.c.unwrap_or(1.0), c1: self.c1.unwrap_or(0.0) }
            }
            "DEFORMED" => {
                Target::Deformed { n: self.need("n", self.n)?, a: self.need("a", self.a)?, c: self.c.unwrap_or(1.0) }
            }
            "EINSTEIN" => Target::Einstein {
                n: self.need("n", self.n)?,
                lambda: self.need("lambda", self.lambda)?,
                c1: self.c1.unwrap_or(1.0),
                interval: self.interval()?,
            },
            _ => Target::Csc {
                n: self.need("n", self.n)?,
                r: self.need("r", self.r)?,
                c1: self.need("c1", self.c1)?,
                c2: self.need("c2", self.c2)?,
                interval: self.interval()?,
            },
        };
        Ok(t)
    }
}
