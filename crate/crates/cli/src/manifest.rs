//! Run manifests. A manifest is also a valid config file for the same
//! experiment.

use pst_localisation::disorder::RNG_ALGORITHM;
use pst_localisation::CouplingLaw;
use serde::Serialize;

use crate::config::{Experiment, InjectionSetting, OneOrMany, RunConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainRecord {
    #[serde(rename = "N")]
    pub n: OneOrMany<usize>,
    #[serde(rename = "J_max")]
    pub j_max: f64,
    pub law: CouplingLaw,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleRecord {
    #[serde(rename = "t_start_tM")]
    pub t_start: f64,
    #[serde(rename = "t_end_tM")]
    pub t_end: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub experiment: Experiment,
    pub chain: ChainRecord,
    #[serde(rename = "E", skip_serializing_if = "Option::is_none")]
    pub strength: Option<OneOrMany<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_realizations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rng_algorithm: Option<&'static str>,
    pub code_version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub injection: Option<InjectionSetting>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_range: Option<[usize; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub realization: Option<usize>,
    pub outputs: Vec<String>,
}

impl Manifest {
    /// Records the settings that influence `cfg.experiment`'s output.
    pub fn for_run(cfg: &RunConfig, outputs: Vec<String>) -> Self {
        let e = cfg.experiment;
        let disordered = e != Experiment::Couplings;
        let single_realization = matches!(
            e,
            Experiment::Evolve | Experiment::SteadyState | Experiment::EigenReport
        );
        Manifest {
            experiment: e,
            chain: ChainRecord {
                n: OneOrMany::from_vec(cfg.n_values.clone()),
                j_max: cfg.j_max,
                law: cfg.law,
            },
            strength: disordered.then(|| OneOrMany::from_vec(cfg.strengths.clone())),
            n_realizations: disordered.then_some(cfg.n_realizations),
            master_seed: cfg.master_seed,
            rng_algorithm: disordered.then_some(RNG_ALGORITHM),
            code_version: pst_localisation::CODE_VERSION,
            injection: matches!(
                e,
                Experiment::Evolve
                    | Experiment::SteadyState
                    | Experiment::SupportFraction
                    | Experiment::EigenReport
                    | Experiment::DeltaFit
            )
            .then_some(cfg.injection),
            schedule: cfg.window.map(|w| ScheduleRecord {
                t_start: w.start,
                t_end: w.end,
                n_samples: w.n_samples,
            }),
            fit_range: if e == Experiment::DeltaFit {
                cfg.fit_range.map(|(lo, hi)| [lo, hi])
            } else {
                None
            },
            threshold: (e == Experiment::SupportFraction).then_some(cfg.threshold),
            realization: single_realization.then_some(cfg.realization),
            outputs,
        }
    }

    pub fn to_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serialises");
        s.push('\n');
        s
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("manifest serialises")
    }
}
