use std::path::Path;

use padic_tori::torus::{build_max_torus, Case, TorusDescriptor, TorusParams, DEFAULT_PRECISION};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Tower parameters, as written in a job file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TowerConfig {
    pub case: Case,
    pub p: u64,
    /// Residue field size; defaults to p.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,
    /// f in case A, e in case B.
    pub halfdeg: u32,
    /// v″(u); defaults to 1 in case A and 0 in case B.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_u: Option<u8>,
    #[serde(default)]
    pub lambda_psi: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twist: Option<u64>,
}

impl TowerConfig {
    pub fn params(&self) -> TorusParams {
        let v_u = self.v_u.unwrap_or(match self.case {
            Case::A => 1,
            Case::B => 0,
        });
        TorusParams {
            case: self.case,
            p: self.p,
            q: self.q.unwrap_or(self.p),
            halfdeg: self.halfdeg,
            v_u,
            lambda_psi: self.lambda_psi,
            twist: self.twist,
        }
    }
}

/// Which characters of S to report on.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacterRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conductors: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_conductor: Option<u32>,
    /// Case A: leading ϖ′-digits of b, each a residue of k′ in coordinates over F_p.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameters: Option<Vec<Vec<Vec<u64>>>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    /// Level N of the finite quotient T/T_N.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    /// Budget for the submodule enumeration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    pub budget: u64,
    #[serde(default = "default_digits")]
    pub required_digits: i64,
}

fn default_digits() -> i64 {
    10
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtensionKind {
    Unramified,
    Ramified,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionConfig {
    pub p: u64,
    pub kind: ExtensionKind,
    pub degree: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppendixConfig {
    pub f: Vec<u64>,
}

/// A job file. Every field but `schema_version` is optional; each subcommand states what it needs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tower: Option<TowerConfig>,
    /// One divisor set d̲ per subtorus; absent means every subset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divisors: Option<Vec<Vec<u64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub characters: Option<CharacterRequest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
    /// Top-of-tower precision in ϖ″ digits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
    /// Bounded witness search for admissible verdicts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub appendix_a: Option<AppendixConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extensions: Option<Vec<ExtensionConfig>>,
    /// Randomized torus-arithmetic cases run by `verify` when a seed is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub property_cases: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Include wall-clock timing (makes reports non-reproducible).
    #[serde(default)]
    pub report_timing: bool,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

impl Default for JobConfig {
    fn default() -> Self {
        JobConfig {
            schema_version: SCHEMA_VERSION,
            tower: None,
            divisors: None,
            characters: None,
            oracle: None,
            precision: None,
            search: None,
            appendix_a: None,
            extensions: None,
            property_cases: None,
            seed: None,
            report_timing: false,
        }
    }
}

impl JobConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        let cfg: JobConfig = serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::config(format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", cfg.schema_version)));
        }
        Ok(cfg)
    }

    pub fn precision(&self) -> u32 {
        self.precision.unwrap_or(DEFAULT_PRECISION)
    }

    /// Build and validate the torus before anything else runs.
    pub fn torus(&self) -> Result<TorusDescriptor, CliError> {
        let tower = self.tower.as_ref().ok_or_else(|| CliError::config("this subcommand needs a `tower`".into()))?;
        let t = build_max_torus(&tower.params(), self.precision()).map_err(CliError::config_from)?;
        if let Some(sets) = &self.divisors {
            for ds in sets {
                t.subtorus(ds).map_err(CliError::config_from)?;
            }
        }
        if let Some(ch) = &self.characters {
            if ch.conductors.is_some() && ch.max_conductor.is_some() {
                return Err(CliError::config("give either `conductors` or `max_conductor`, not both".into()));
            }
        }
        Ok(t)
    }

    /// Divisor sets to act on: the configured ones, or every subset of the divisors of 2f / 2e.
    pub fn divisor_sets(&self, t: &TorusDescriptor) -> Vec<Vec<u64>> {
        match &self.divisors {
            Some(v) => v.clone(),
            None => {
                let divs = padic_tori::cyclomod::divisors(t.gamma_order());
                (0u64..(1 << divs.len()))
                    .map(|mask| divs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &d)| d).collect())
                    .collect()
            }
        }
    }

    /// Requested conductors; `default_max` applies when nothing was requested.
    pub fn conductors(&self, default_max: u32) -> Vec<u32> {
        let ch = self.characters.clone().unwrap_or_default();
        match (ch.conductors, ch.max_conductor) {
            (Some(c), _) => c,
            (None, Some(m)) => (0..=m).collect(),
            (None, None) => (0..=default_max).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> JobConfig {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn tower_defaults() {
        let cfg = parse(r#"{"tower": {"case": "A", "p": 5, "halfdeg": 3}}"#);
        let p = cfg.tower.unwrap().params();
        assert_eq!((p.q, p.v_u, p.lambda_psi), (5, 1, 0));
        let cfg = parse(r#"{"tower": {"case": "B", "p": 3, "halfdeg": 2}}"#);
        assert_eq!(cfg.tower.unwrap().params().v_u, 0);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<JobConfig>(r#"{"tower": {"case": "A", "p": 5, "halfdeg": 3, "f": 1}}"#).is_err());
    }

    #[test]
    fn conductor_requests() {
        assert_eq!(JobConfig::default().conductors(2), vec![0, 1, 2]);
        let cfg = parse(r#"{"characters": {"max_conductor": 3}}"#);
        assert_eq!(cfg.conductors(9), vec![0, 1, 2, 3]);
        let cfg = parse(r#"{"characters": {"conductors": [4, 2]}}"#);
        assert_eq!(cfg.conductors(9), vec![4, 2]);
    }

    #[test]
    fn all_divisor_subsets_by_default() {
        let cfg = parse(r#"{"tower": {"case": "B", "p": 5, "halfdeg": 3}}"#);
        let t = cfg.torus().unwrap();
        assert_eq!(cfg.divisor_sets(&t).len(), 16);
    }
}
