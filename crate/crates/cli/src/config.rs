//! Run configuration: config files (TOML or JSON), command-line flags, and
//! the validated [`RunConfig`] they resolve to.
//!
//! A run manifest is itself a valid config file, so feeding `manifest.json`
//! back through `--config` reproduces the run.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use pst_localisation::analysis::{default_fit_range, Injection, SUPPORT_THRESHOLD};
use pst_localisation::disorder::{Workers, DEFAULT_REALIZATIONS, RNG_ALGORITHM};
use pst_localisation::dynamics::RelativeWindow;
use pst_localisation::{ChainSpec, CouplingLaw};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Couplings,
    Evolve,
    SteadyState,
    SupportFraction,
    FidelitySurface,
    EigenReport,
    DeltaFit,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Couplings => "couplings",
            Experiment::Evolve => "evolve",
            Experiment::SteadyState => "steady-state",
            Experiment::SupportFraction => "support-fraction",
            Experiment::FidelitySurface => "fidelity-surface",
            Experiment::EigenReport => "eigen-report",
            Experiment::DeltaFit => "delta-fit",
        }
    }

    fn uses_disorder(&self) -> bool {
        !matches!(self, Experiment::Couplings)
    }

    /// Sampling window when the config does not override it.
    pub fn default_window(&self) -> Option<RelativeWindow> {
        match self {
            Experiment::Couplings | Experiment::EigenReport => None,
            Experiment::Evolve => Some(RelativeWindow {
                start: 0.0,
                end: 2.0,
                n_samples: 201,
            }),
            Experiment::SteadyState | Experiment::SupportFraction | Experiment::DeltaFit => {
                Some(RelativeWindow::STEADY_STATE)
            }
            Experiment::FidelitySurface => Some(RelativeWindow::TRANSFER),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `end`, `centre` or an explicit 1-based site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InjectionSetting {
    End,
    Centre,
    Site(usize),
}

impl InjectionSetting {
    pub fn to_injection(self) -> Injection {
        match self {
            InjectionSetting::End => Injection::End,
            InjectionSetting::Centre => Injection::Centre,
            InjectionSetting::Site(s) => Injection::Site(s),
        }
    }
}

impl FromStr for InjectionSetting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "end" => Ok(InjectionSetting::End),
            "centre" | "center" => Ok(InjectionSetting::Centre),
            other => other
                .parse::<usize>()
                .map(InjectionSetting::Site)
                .map_err(|_| format!("expected `end`, `centre` or a site number, got `{other}`")),
        }
    }
}

impl fmt::Display for InjectionSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InjectionSetting::End => f.write_str("end"),
            InjectionSetting::Centre => f.write_str("centre"),
            InjectionSetting::Site(s) => write!(f, "{s}"),
        }
    }
}

impl Serialize for InjectionSetting {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            InjectionSetting::Site(s) => serializer.serialize_u64(*s as u64),
            other => serializer.serialize_str(&other.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for InjectionSetting {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Site(usize),
            Name(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Site(s) => Ok(InjectionSetting::Site(s)),
            Raw::Name(name) => name.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// A scalar or a list; manifests write scalars when there is one value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }

    pub fn from_vec(mut values: Vec<T>) -> Self {
        if values.len() == 1 {
            OneOrMany::One(values.remove(0))
        } else {
            OneOrMany::Many(values)
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    #[serde(rename = "N")]
    pub n: Option<OneOrMany<usize>>,
    #[serde(rename = "J_max")]
    pub j_max: Option<f64>,
    pub law: Option<CouplingLaw>,
}

/// Window overrides, in multiples of the mirroring time.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    #[serde(rename = "t_start_tM")]
    pub t_start: Option<f64>,
    #[serde(rename = "t_end_tM")]
    pub t_end: Option<f64>,
    pub n_samples: Option<usize>,
}

/// Everything a config file may contain. All keys optional here; required
/// values are enforced when resolving.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: Option<Experiment>,
    pub chain: Option<ChainSection>,
    #[serde(rename = "N")]
    pub n: Option<OneOrMany<usize>>,
    #[serde(rename = "J_max")]
    pub j_max: Option<f64>,
    #[serde(rename = "E")]
    pub strength: Option<OneOrMany<f64>>,
    #[serde(alias = "realizations")]
    pub n_realizations: Option<usize>,
    #[serde(alias = "seed")]
    pub master_seed: Option<u64>,
    pub rng_algorithm: Option<String>,
    pub code_version: Option<String>,
    pub injection: Option<InjectionSetting>,
    pub schedule: Option<ScheduleSection>,
    pub fit_range: Option<[usize; 2]>,
    pub threshold: Option<f64>,
    pub realization: Option<usize>,
    pub outputs: Option<Vec<String>>,
    pub out: Option<PathBuf>,
}

impl ConfigFile {
    /// Parses TOML, or JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let value: serde_json::Value = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| CliError::config("config", e.to_string()))?
        } else {
            let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
                CliError::config("config", e.message().to_string())
            })?;
            serde_json::to_value(table).map_err(|e| CliError::config("config", e.to_string()))?
        };
        serde_path_to_error::deserialize(value).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner().to_string();
            if inner.starts_with("unknown field") {
                CliError::config(field, "unknown key")
            } else {
                CliError::config(field, inner)
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Command-line overrides; every field wins over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub n: Option<Vec<usize>>,
    pub j_max: Option<f64>,
    pub law: Option<CouplingLaw>,
    pub strength: Option<Vec<f64>>,
    pub master_seed: Option<u64>,
    pub n_realizations: Option<usize>,
    pub realization: Option<usize>,
    pub injection: Option<InjectionSetting>,
    pub t_start: Option<f64>,
    pub t_end: Option<f64>,
    pub n_samples: Option<usize>,
    pub fit_range: Option<(usize, usize)>,
    pub threshold: Option<f64>,
    pub out: Option<PathBuf>,
}

/// A fully validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub n_values: Vec<usize>,
    pub j_max: f64,
    pub law: CouplingLaw,
    pub strengths: Vec<f64>,
    pub n_realizations: usize,
    pub master_seed: Option<u64>,
    pub injection: InjectionSetting,
    pub window: Option<RelativeWindow>,
    pub fit_range: Option<(usize, usize)>,
    pub threshold: f64,
    pub realization: usize,
    pub out: PathBuf,
    pub workers: Workers,
}

impl RunConfig {
    /// Seed, present for every experiment that samples disorder.
    pub fn seed(&self) -> u64 {
        self.master_seed.unwrap_or(0)
    }

    pub fn chain(&self, n: usize) -> ChainSpec {
        ChainSpec::new(n, self.j_max, self.law).expect("validated")
    }

    /// Fit range for chain length `n` and 1-based injection site.
    pub fn fit_range_for(&self, n: usize, site: usize) -> (usize, usize) {
        self.fit_range.unwrap_or_else(|| default_fit_range(n, site))
    }
}

/// Combine file values and flags into a [`RunConfig`], checking every field
/// before anything is computed.
pub fn resolve(
    experiment: Experiment,
    file: ConfigFile,
    flags: Overrides,
    workers: Workers,
) -> Result<RunConfig, CliError> {
    if let Some(file_experiment) = file.experiment {
        if file_experiment != experiment {
            return Err(CliError::config(
                "experiment",
                format!("config is for `{file_experiment}`, command is `{experiment}`"),
            ));
        }
    }
    if let Some(alg) = &file.rng_algorithm {
        if alg != RNG_ALGORITHM {
            return Err(CliError::config(
                "rng_algorithm",
                format!("unsupported generator `{alg}`"),
            ));
        }
    }

    let chain = file.chain.unwrap_or_default();
    if chain.n.is_some() && file.n.is_some() {
        return Err(CliError::config(
            "N",
            "given both at top level and in [chain]",
        ));
    }
    if chain.j_max.is_some() && file.j_max.is_some() {
        return Err(CliError::config(
            "J_max",
            "given both at top level and in [chain]",
        ));
    }

    let n_values = flags
        .n
        .or_else(|| chain.n.or(file.n).map(|v| v.to_vec()))
        .ok_or_else(|| CliError::config("N", "required"))?;
    if n_values.is_empty() {
        return Err(CliError::config("N", "needs at least one value"));
    }
    if let Some(&bad) = n_values.iter().find(|&&n| n < 2) {
        return Err(CliError::config(
            "N",
            format!("must be at least 2, got {bad}"),
        ));
    }

    let j_max = flags.j_max.or(chain.j_max).or(file.j_max).unwrap_or(1.0);
    if !(j_max.is_finite() && j_max > 0.0) {
        return Err(CliError::config(
            "J_max",
            format!("must be positive, got {j_max}"),
        ));
    }
    let law = flags.law.or(chain.law).unwrap_or(CouplingLaw::Pst);
    if law != CouplingLaw::Pst && experiment != Experiment::Couplings {
        return Err(CliError::config(
            "law",
            format!("`{experiment}` needs the pst coupling law"),
        ));
    }

    let strengths = match flags.strength.or_else(|| file.strength.map(|v| v.to_vec())) {
        Some(v) => v,
        None if experiment.uses_disorder() => return Err(CliError::config("E", "required")),
        None => vec![0.0],
    };
    if strengths.is_empty() {
        return Err(CliError::config("E", "needs at least one value"));
    }
    if let Some(&bad) = strengths.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
        return Err(CliError::config(
            "E",
            format!("must be non-negative, got {bad}"),
        ));
    }

    let n_realizations = flags
        .n_realizations
        .or(file.n_realizations)
        .unwrap_or(DEFAULT_REALIZATIONS);
    if n_realizations == 0 {
        return Err(CliError::config("n_realizations", "must be at least 1"));
    }

    let master_seed = flags.master_seed.or(file.master_seed);
    if master_seed.is_none() && experiment.uses_disorder() {
        return Err(CliError::config("master_seed", "required (pass --seed)"));
    }

    let realization = flags.realization.or(file.realization).unwrap_or(0);
    if realization >= n_realizations {
        return Err(CliError::config(
            "realization",
            format!("{realization} out of range for {n_realizations} realizations"),
        ));
    }

    let injection = flags
        .injection
        .or(file.injection)
        .unwrap_or(InjectionSetting::End);
    if let InjectionSetting::Site(site) = injection {
        if let Some(&n) = n_values.iter().find(|&&n| site == 0 || site > n) {
            return Err(CliError::config(
                "injection",
                format!("site {site} outside chain of {n} sites"),
            ));
        }
    }

    let schedule = file.schedule.unwrap_or_default();
    let window = match experiment.default_window() {
        Some(default) => {
            let start = flags.t_start.or(schedule.t_start).unwrap_or(default.start);
            let end = flags.t_end.or(schedule.t_end).unwrap_or(default.end);
            let n_samples = flags
                .n_samples
                .or(schedule.n_samples)
                .unwrap_or(default.n_samples);
            let window = RelativeWindow::new(start, end, n_samples)
                .map_err(|e| CliError::config("schedule", e.to_string()))?;
            if experiment == Experiment::FidelitySurface && n_samples < 2 {
                return Err(CliError::config("schedule.n_samples", "must be at least 2"));
            }
            Some(window)
        }
        None => {
            if flags.t_start.or(flags.t_end).is_some() || flags.n_samples.is_some() {
                return Err(CliError::config(
                    "schedule",
                    format!("`{experiment}` takes no time window"),
                ));
            }
            None
        }
    };

    let fit_range = flags.fit_range.or(file.fit_range.map(|[lo, hi]| (lo, hi)));
    if let Some((lo, hi)) = fit_range {
        if lo < 1 || hi <= lo {
            return Err(CliError::config(
                "fit_range",
                format!("need 1 <= lo < hi, got [{lo}, {hi}]"),
            ));
        }
    }

    let threshold = flags
        .threshold
        .or(file.threshold)
        .unwrap_or(SUPPORT_THRESHOLD);
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(CliError::config(
            "threshold",
            format!("must lie strictly between 0 and 1, got {threshold}"),
        ));
    }

    if experiment == Experiment::Evolve && (n_values.len() != 1 || strengths.len() != 1) {
        return Err(CliError::config(
            if n_values.len() != 1 { "N" } else { "E" },
            "evolve takes a single value",
        ));
    }

    let out = flags
        .out
        .or(file.out)
        .unwrap_or_else(|| PathBuf::from("results"));

    Ok(RunConfig {
        experiment,
        n_values,
        j_max,
        law,
        strengths,
        n_realizations,
        master_seed,
        injection,
        window,
        fit_range,
        threshold,
        realization,
        out,
        workers,
    })
}
