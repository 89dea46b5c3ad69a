//! Localisation diagnostics: steady-state occupation, the critical power
//! law, the support fraction, eigenstate pinning and transfer fidelities.

use serde::{Deserialize, Serialize};

use crate::chain::{build_hamiltonian, ChainSpec};
use crate::disorder::{
    map_indexed, run_ensemble, sample_disorder, DisorderRealization, EnsembleSpec, Summary,
    VectorSummary, Workers,
};
use crate::dynamics::{
    mirroring_time, Propagator, RelativeWindow, Schedule, TransitionAmplitude, WindowMaximum,
};
use crate::eigen::{diagonalize, diagonalize_sites, EigenSystem};
use crate::error::{Error, Result};
use crate::state::StateVector;

/// `1/ζ(2) = 6/π²`, the critical prefactor of an end-injected profile.
pub const ALPHA_CRITICAL: f64 = 6.0 / (std::f64::consts::PI * std::f64::consts::PI);

/// Default probability mass for [`support_fraction`].
pub const SUPPORT_THRESHOLD: f64 = 0.95;

/// Where the excitation is placed at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Injection {
    End,
    Centre,
    Site(usize),
}

impl Injection {
    /// 1-based injection site on `chain`.
    pub fn site(&self, chain: &ChainSpec) -> Result<usize> {
        let n_sites = chain.n_sites();
        match *self {
            Injection::End => Ok(1),
            Injection::Centre => Ok(chain.centre_site()),
            Injection::Site(site) if site >= 1 && site <= n_sites => Ok(site),
            Injection::Site(site) => Err(Error::InvalidSite { site, n_sites }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    SingleRealization { index: usize },
    EnsembleMean { realizations: usize },
}

/// Time-averaged site occupation `p_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationProfile {
    pub probabilities: Vec<f64>,
    pub injection_site: usize,
    pub provenance: Provenance,
    pub time_window: Schedule,
}

impl OccupationProfile {
    pub fn new(
        probabilities: Vec<f64>,
        injection_site: usize,
        provenance: Provenance,
        time_window: Schedule,
    ) -> Result<Self> {
        let n_sites = probabilities.len();
        if injection_site == 0 || injection_site > n_sites {
            return Err(Error::InvalidSite {
                site: injection_site,
                n_sites,
            });
        }
        Ok(Self {
            probabilities,
            injection_site,
            provenance,
            time_window,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.probabilities.len()
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }
}

/// Steady-state occupation of an excitation injected on `injection_site`
/// (1-based), averaged over the steady-state schedule.
pub fn steady_state_from_eigen(
    eig: &EigenSystem,
    injection_site: usize,
    schedule: &Schedule,
) -> Result<Vec<f64>> {
    let state0 = StateVector::site(eig.n(), injection_site)?;
    Ok(Propagator::new(&state0, eig)?.mean_probabilities(schedule))
}

pub fn steady_state_profile(
    chain: &ChainSpec,
    disorder: &DisorderRealization,
    injection_site: usize,
) -> Result<OccupationProfile> {
    if injection_site == 0 || injection_site > chain.n_sites() {
        return Err(Error::InvalidSite {
            site: injection_site,
            n_sites: chain.n_sites(),
        });
    }
    let schedule = Schedule::steady_state(mirroring_time(chain)?);
    let eig = diagonalize(&build_hamiltonian(chain, Some(disorder))?)?;
    let probabilities = steady_state_from_eigen(&eig, injection_site, &schedule)?;
    OccupationProfile::new(
        probabilities,
        injection_site,
        Provenance::SingleRealization {
            index: disorder.index(),
        },
        schedule,
    )
}

/// Ensemble statistics of the steady-state profile for one injection site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleProfile {
    pub injection_site: usize,
    pub summary: VectorSummary,
    pub time_window: Schedule,
}

impl EnsembleProfile {
    pub fn mean_profile(&self) -> OccupationProfile {
        OccupationProfile {
            probabilities: self.summary.mean.clone(),
            injection_site: self.injection_site,
            provenance: Provenance::EnsembleMean {
                realizations: self.summary.count,
            },
            time_window: self.time_window,
        }
    }
}

/// Profiles indexed `[injection site][realization][site]`.
pub type PerRealizationProfiles = Vec<Vec<Vec<f64>>>;

/// Steady-state profiles for several injection sites, one diagonalisation
/// per realization. Per-realization profiles are returned alongside the
/// ensemble statistics.
pub fn steady_state_ensemble(
    spec: &EnsembleSpec,
    injection_sites: &[usize],
    window: &RelativeWindow,
    workers: Workers,
) -> Result<(Vec<EnsembleProfile>, PerRealizationProfiles)> {
    let schedule = window.to_schedule(mirroring_time(spec.chain())?);
    let runs = run_ensemble(spec, workers, |chain, disorder| {
        let eig = diagonalize(&build_hamiltonian(chain, Some(disorder))?)?;
        injection_sites
            .iter()
            .map(|&site| steady_state_from_eigen(&eig, site, &schedule))
            .collect::<Result<Vec<_>>>()
    })?;
    let profiles = injection_sites
        .iter()
        .enumerate()
        .map(|(k, &injection_site)| EnsembleProfile {
            injection_site,
            summary: runs.vector_summary(|r| r[k].as_slice()),
            time_window: schedule,
        })
        .collect();
    let mut per_site = vec![Vec::with_capacity(runs.len()); injection_sites.len()];
    for realization in runs.into_results() {
        for (k, profile) in realization.into_iter().enumerate() {
            per_site[k].push(profile);
        }
    }
    Ok((profiles, per_site))
}

/// Which side of the critical line to draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriticalShape {
    End,
    Centre,
}

/// Critical occupation profile separating localised from extended
/// behaviour. End: `α i^-2`. Centre: `(α/2) (|i - c| + 1)^-2` with `c` the
/// centre site, halved because probability spreads to both sides.
pub fn critical_line(n_sites: usize, shape: CriticalShape) -> Vec<f64> {
    match shape {
        CriticalShape::End => (1..=n_sites)
            .map(|i| ALPHA_CRITICAL / (i as f64).powi(2))
            .collect(),
        CriticalShape::Centre => {
            let centre = n_sites.div_ceil(2);
            (1..=n_sites)
                .map(|i| 0.5 * ALPHA_CRITICAL / ((i.abs_diff(centre) + 1) as f64).powi(2))
                .collect()
        }
    }
}

/// Power-law fit `p = α x^-(2+δ)`, `x = |i - injection| + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalisationVerdict {
    pub delta: f64,
    pub alpha: f64,
    pub fit_range: (usize, usize),
    pub localised: bool,
    pub rms_log_residual: f64,
    pub n_points: usize,
}

/// Default distance range for [`fit_delta`]: `[10, N/2]` for injection at
/// either end, `[10, N/4]` otherwise.
pub fn default_fit_range(n_sites: usize, injection_site: usize) -> (usize, usize) {
    if injection_site == 1 || injection_site == n_sites {
        (10, n_sites / 2)
    } else {
        (10, n_sites / 4)
    }
}

/// Least-squares fit of `ln p` against `ln x` over sites whose distance
/// coordinate `x` lies in `fit_range` (both sides of the injection site).
pub fn fit_delta(
    profile: &OccupationProfile,
    fit_range: (usize, usize),
) -> Result<LocalisationVerdict> {
    let (lo, hi) = fit_range;
    if lo < 1 || hi <= lo {
        return Err(Error::FitRange { lo, hi });
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (k, &p) in profile.probabilities.iter().enumerate() {
        let site = k + 1;
        let x = site.abs_diff(profile.injection_site) + 1;
        if x < lo || x > hi {
            continue;
        }
        if p.is_nan() || p <= 0.0 {
            return Err(Error::NonPositiveProbability { site, value: p });
        }
        xs.push((x as f64).ln());
        ys.push(p.ln());
    }
    let n_points = xs.len();
    let distinct = xs.iter().any(|&x| x != xs[0]);
    if n_points < 2 || !distinct {
        return Err(Error::FitRange { lo, hi });
    }
    let count = n_points as f64;
    let x_mean = xs.iter().sum::<f64>() / count;
    let y_mean = ys.iter().sum::<f64>() / count;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - x_mean) * (x - x_mean);
        sxy += (x - x_mean) * (y - y_mean);
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let delta = -slope - 2.0;
    Ok(LocalisationVerdict {
        delta,
        alpha: intercept.exp(),
        fit_range,
        localised: delta >= 0.0,
        rms_log_residual: (rss / count).sqrt(),
        n_points,
    })
}

/// Size of the smallest window around `injection_site` that holds at least
/// `threshold` of the probability, grown one site at a time towards the
/// larger neighbour (left on ties).
pub fn support_window(
    probabilities: &[f64],
    injection_site: usize,
    threshold: f64,
) -> Result<usize> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Threshold(threshold));
    }
    let n_sites = probabilities.len();
    if injection_site == 0 || injection_site > n_sites {
        return Err(Error::InvalidSite {
            site: injection_site,
            n_sites,
        });
    }
    let (mut lo, mut hi) = (injection_site - 1, injection_site - 1);
    let mut mass = probabilities[lo];
    while mass < threshold && hi - lo + 1 < n_sites {
        let left = (lo > 0).then(|| probabilities[lo - 1]);
        let right = (hi + 1 < n_sites).then(|| probabilities[hi + 1]);
        match (left, right) {
            (Some(l), Some(r)) if l >= r => {
                lo -= 1;
                mass += l;
            }
            (_, Some(r)) => {
                hi += 1;
                mass += r;
            }
            (Some(l), None) => {
                lo -= 1;
                mass += l;
            }
            (None, None) => break,
        }
    }
    Ok(hi - lo + 1)
}

/// Fraction `n/N` of the chain needed to hold `threshold` of the time- and
/// ensemble-averaged occupation.
pub fn support_fraction(
    spec: &EnsembleSpec,
    injection_site: usize,
    threshold: f64,
    workers: Workers,
) -> Result<f64> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Threshold(threshold));
    }
    let (profiles, _) = steady_state_ensemble(
        spec,
        &[injection_site],
        &RelativeWindow::STEADY_STATE,
        workers,
    )?;
    let n = support_window(&profiles[0].summary.mean, injection_site, threshold)?;
    Ok(n as f64 / spec.chain().n_sites() as f64)
}

/// `|<i|phi_m>|^2` for every site and mode.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenstateProfiles {
    n: usize,
    by_mode: Vec<f64>,
}

impl EigenstateProfiles {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry for 0-based `site` and `mode`.
    pub fn entry(&self, site: usize, mode: usize) -> f64 {
        self.by_mode[mode * self.n + site]
    }

    /// Occupation profile of one mode; sums to one.
    pub fn mode(&self, mode: usize) -> &[f64] {
        &self.by_mode[mode * self.n..(mode + 1) * self.n]
    }
}

pub fn eigenstate_profiles(eig: &EigenSystem) -> EigenstateProfiles {
    EigenstateProfiles {
        n: eig.n(),
        by_mode: eig.eigenvectors().flatten().map(|c| c * c).collect(),
    }
}

/// `max_m |<i|phi_m>|^2` for every site.
pub fn max_occupancy(eig: &EigenSystem) -> Vec<f64> {
    let mut out = vec![0.0f64; eig.n()];
    for v in eig.eigenvectors() {
        for (o, c) in out.iter_mut().zip(v) {
            *o = o.max(c * c);
        }
    }
    out
}

/// Ensemble mean of [`max_occupancy`], `ρ̄_i`.
pub fn rho_bar(spec: &EnsembleSpec, workers: Workers) -> Result<VectorSummary> {
    let runs = run_ensemble(spec, workers, |chain, disorder| {
        Ok(max_occupancy(&diagonalize(&build_hamiltonian(
            chain,
            Some(disorder),
        )?)?))
    })?;
    Ok(runs.summary())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeWeight {
    /// 0-based index into the ascending spectrum.
    pub mode_index: usize,
    pub weight: f64,
    pub energy: f64,
}

/// Decomposition of a site excitation over eigenmodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectedStateReport {
    pub injection_site: usize,
    /// Largest weights first.
    pub modes: Vec<ModeWeight>,
    /// `<H> = sum_m |a_m|^2 E_m` over all modes.
    pub energy_expectation: f64,
}

pub fn injected_state_report(
    eig: &EigenSystem,
    injection_site: usize,
    k: usize,
) -> Result<InjectedStateReport> {
    let n_sites = eig.n();
    if injection_site == 0 || injection_site > n_sites {
        return Err(Error::InvalidSite {
            site: injection_site,
            n_sites,
        });
    }
    let weights: Vec<f64> = eig
        .eigenvectors()
        .map(|v| v[injection_site - 1].powi(2))
        .collect();
    let energy_expectation = weights
        .iter()
        .zip(eig.eigenvalues())
        .map(|(w, e)| w * e)
        .sum();
    let mut order: Vec<usize> = (0..n_sites).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    let modes = order
        .into_iter()
        .take(k.clamp(1, n_sites))
        .map(|m| ModeWeight {
            mode_index: m,
            weight: weights[m],
            energy: eig.eigenvalues()[m],
        })
        .collect();
    Ok(InjectedStateReport {
        injection_site,
        modes,
        energy_expectation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    /// `E_{m+1} - E_m`, `N - 1` entries.
    pub gaps: Vec<f64>,
    /// `2 J_0` for PST chains.
    pub unperturbed_gap: Option<f64>,
    /// Modes carrying most of an injected excitation.
    pub flagged_modes: Vec<usize>,
}

impl SpectrumReport {
    pub fn mean_gap(&self) -> f64 {
        self.gaps.iter().sum::<f64>() / self.gaps.len() as f64
    }

    /// Standard deviation over mean of the gaps.
    pub fn gap_variation(&self) -> f64 {
        let mean = self.mean_gap();
        let var =
            self.gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / self.gaps.len() as f64;
        var.sqrt() / mean
    }
}

pub fn spectrum_report(
    eig: &EigenSystem,
    spec: &ChainSpec,
    injected: Option<&InjectedStateReport>,
) -> SpectrumReport {
    let eigenvalues = eig.eigenvalues().to_vec();
    let gaps = eigenvalues.windows(2).map(|w| w[1] - w[0]).collect();
    SpectrumReport {
        eigenvalues,
        gaps,
        unperturbed_gap: spec.j0().ok().map(|j0| 2.0 * j0),
        flagged_modes: injected
            .map(|r| r.modes.iter().map(|m| m.mode_index).collect())
            .unwrap_or_default(),
    }
}

/// Site 1 to site N transfer in one realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferSample {
    pub at_mirror_time: f64,
    pub window_max: WindowMaximum,
}

/// End-to-end fidelity at `t_M` and its maximum over `window` (by default
/// `[0, 4.5 t_M]`).
///
/// Only the end components of the eigenvectors are needed, so this uses the
/// partial eigensolve.
pub fn transfer_sample(
    chain: &ChainSpec,
    disorder: &DisorderRealization,
    window: &RelativeWindow,
) -> Result<TransferSample> {
    let n = chain.n_sites();
    let t_m = mirroring_time(chain)?;
    let h = build_hamiltonian(chain, Some(disorder))?;
    let amp = TransitionAmplitude::between_sites(&diagonalize_sites(&h, &[1, n])?, 0, 1);
    let at_mirror_time = amp.fidelity(t_m);
    let schedule = window.to_schedule(t_m);
    let mut window_max = amp.max_over(&schedule)?;
    if (schedule.t_start..=schedule.t_end).contains(&t_m) && at_mirror_time > window_max.fidelity {
        window_max = WindowMaximum {
            fidelity: at_mirror_time,
            time: t_m,
        };
    }
    Ok(TransferSample {
        at_mirror_time,
        window_max,
    })
}

/// One `(N, E)` cell of the fidelity surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityCell {
    pub n_sites: usize,
    pub strength: f64,
    pub mirror_time: f64,
    pub at_mirror_time: Summary,
    pub window_max: Summary,
    pub time_of_max: Summary,
    pub samples: Vec<TransferSample>,
}

/// Ensemble transfer fidelities over an `N x E` grid (row-major in `N`).
/// Every cell shares `n_realizations` and `master_seed`.
pub fn fidelity_surface(
    n_values: &[usize],
    strengths: &[f64],
    j_max: f64,
    n_realizations: usize,
    master_seed: u64,
    window: &RelativeWindow,
    workers: Workers,
) -> Result<Vec<FidelityCell>> {
    let mut specs = Vec::with_capacity(n_values.len() * strengths.len());
    for &n in n_values {
        for &e in strengths {
            let chain = ChainSpec::new(n, j_max, crate::chain::CouplingLaw::Pst)?;
            specs.push(EnsembleSpec::new(chain, e, n_realizations, master_seed)?);
        }
    }
    let total = specs.len() * n_realizations;
    let outcomes = map_indexed(total, workers, |flat| {
        let spec = &specs[flat / n_realizations];
        let disorder = sample_disorder(spec, flat % n_realizations)?;
        transfer_sample(spec.chain(), &disorder, window)
    })?;

    let mut cells = Vec::with_capacity(specs.len());
    let mut outcomes = outcomes.into_iter();
    for spec in &specs {
        let mut samples = Vec::with_capacity(n_realizations);
        for index in 0..n_realizations {
            match outcomes.next().expect("one outcome per realization") {
                Ok(s) => samples.push(s),
                Err(source) => {
                    return Err(Error::Realization {
                        index,
                        source: Box::new(source),
                    })
                }
            }
        }
        let pick =
            |f: fn(&TransferSample) -> f64| Summary::of(&samples.iter().map(f).collect::<Vec<_>>());
        cells.push(FidelityCell {
            n_sites: spec.chain().n_sites(),
            strength: spec.strength(),
            mirror_time: mirroring_time(spec.chain())?,
            at_mirror_time: pick(|s| s.at_mirror_time),
            window_max: pick(|s| s.window_max.fidelity),
            time_of_max: pick(|s| s.window_max.time),
            samples,
        });
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::DisorderRealization;
    use approx::assert_abs_diff_eq;

    fn synthetic(n: usize, alpha: f64, exponent: f64) -> OccupationProfile {
        let p = (1..=n)
            .map(|i| alpha * (i as f64).powf(-exponent))
            .collect();
        OccupationProfile::new(
            p,
            1,
            Provenance::EnsembleMean { realizations: 1 },
            Schedule::steady_state(1.0),
        )
        .unwrap()
    }

    #[test]
    fn critical_line_values() {
        let end = critical_line(100, CriticalShape::End);
        assert_abs_diff_eq!(end[0], 0.6079, epsilon = 5e-5);
        assert_abs_diff_eq!(end[1], 0.6079 / 4.0, epsilon = 2e-5);
        let centre = critical_line(100, CriticalShape::Centre);
        assert_abs_diff_eq!(centre[49], 0.3040, epsilon = 5e-5);
        assert_abs_diff_eq!(centre[48], centre[50], epsilon = 0.0);
    }

    #[test]
    fn exact_power_laws_recover_parameters() {
        let v = fit_delta(&synthetic(200, 0.6, 2.0), (1, 200)).unwrap();
        assert_abs_diff_eq!(v.delta, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(v.alpha, 0.6, epsilon = 1e-10);
        assert!(v.localised);
        let v = fit_delta(&synthetic(200, 0.3, 2.5), (10, 100)).unwrap();
        assert_abs_diff_eq!(v.delta, 0.5, epsilon = 1e-10);
        let v = fit_delta(&synthetic(200, 0.3, 1.5), (10, 100)).unwrap();
        assert!(!v.localised);
        assert_eq!(v.n_points, 91);
    }

    #[test]
    fn fit_rejects_empty_probabilities() {
        let mut prof = synthetic(50, 0.6, 2.0);
        prof.probabilities[19] = 0.0;
        assert_eq!(
            fit_delta(&prof, (10, 25)),
            Err(Error::NonPositiveProbability {
                site: 20,
                value: 0.0
            })
        );
        assert!(fit_delta(&prof, (5, 5)).is_err());
        assert!(fit_delta(&prof, (0, 5)).is_err());
    }

    #[test]
    fn centre_fit_uses_both_sides() {
        let n = 101;
        let centre = 51;
        let p = (1..=n)
            .map(|i| 0.3 * ((i as i64 - centre as i64).unsigned_abs() as f64 + 1.0).powf(-2.4))
            .collect();
        let prof = OccupationProfile::new(
            p,
            centre,
            Provenance::EnsembleMean { realizations: 1 },
            Schedule::steady_state(1.0),
        )
        .unwrap();
        let v = fit_delta(&prof, default_fit_range(n, centre)).unwrap();
        assert_abs_diff_eq!(v.delta, 0.4, epsilon = 1e-10);
        assert_eq!(v.fit_range, (10, 25));
        assert_eq!(v.n_points, 32);
    }

    #[test]
    fn support_window_examples() {
        let mut point = vec![0.0; 40];
        point[0] = 1.0;
        assert_eq!(support_window(&point, 1, 0.95).unwrap(), 1);
        let flat = vec![0.1; 10];
        assert_eq!(support_window(&flat, 1, 0.95).unwrap(), 10);
        assert_eq!(support_window(&flat, 5, 0.45).unwrap(), 5);
        assert!(support_window(&flat, 5, 1.0).is_err());
        assert!(support_window(&flat, 11, 0.5).is_err());
    }

    #[test]
    fn support_window_grows_towards_heavier_side() {
        let p = [0.05, 0.05, 0.1, 0.4, 0.3, 0.05, 0.05];
        // 0.4, then +0.3 from the right, then +0.1 from the left.
        assert_eq!(support_window(&p, 4, 0.75).unwrap(), 3);
        assert_eq!(support_window(&p, 4, 0.65).unwrap(), 2);
    }

    #[test]
    fn two_site_profiles_are_half() {
        let chain = ChainSpec::pst(2).unwrap();
        let eig = diagonalize(&build_hamiltonian(&chain, None).unwrap()).unwrap();
        let prof = eigenstate_profiles(&eig);
        for i in 0..2 {
            for m in 0..2 {
                assert_abs_diff_eq!(prof.entry(i, m), 0.5, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn clean_injection_has_zero_energy() {
        let chain = ChainSpec::pst(30).unwrap();
        let eig = diagonalize(&build_hamiltonian(&chain, None).unwrap()).unwrap();
        for site in [1, 7, 15, 30] {
            let r = injected_state_report(&eig, site, 3).unwrap();
            assert_abs_diff_eq!(r.energy_expectation, 0.0, epsilon = 1e-13);
            assert_eq!(r.modes.len(), 3);
            assert!(r.modes[0].weight >= r.modes[1].weight);
        }
        let all = injected_state_report(&eig, 4, 30).unwrap();
        let total: f64 = all.modes.iter().map(|m| m.weight).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        assert!(injected_state_report(&eig, 31, 3).is_err());
    }

    #[test]
    fn disordered_injection_energy_is_onsite_energy() {
        let chain = ChainSpec::pst(12).unwrap();
        let d = DisorderRealization::from_energies(
            (0..12).map(|i| 0.07 * i as f64).collect(),
            1.0,
            0,
            0,
        );
        let eig = diagonalize(&build_hamiltonian(&chain, Some(&d)).unwrap()).unwrap();
        let r = injected_state_report(&eig, 5, 2).unwrap();
        assert_abs_diff_eq!(r.energy_expectation, 0.28, epsilon = 1e-13);
    }

    #[test]
    fn spectrum_report_small_chains() {
        let chain = ChainSpec::pst(2).unwrap();
        let eig = diagonalize(&build_hamiltonian(&chain, None).unwrap()).unwrap();
        let r = spectrum_report(&eig, &chain, None);
        assert_eq!(r.gaps.len(), 1);
        assert_abs_diff_eq!(r.gaps[0], 2.0, epsilon = 1e-15);
        assert_eq!(r.unperturbed_gap, Some(2.0));

        let chain = ChainSpec::pst(100).unwrap();
        let eig = diagonalize(&build_hamiltonian(&chain, None).unwrap()).unwrap();
        let inj = injected_state_report(&eig, 1, 3).unwrap();
        let r = spectrum_report(&eig, &chain, Some(&inj));
        for g in &r.gaps {
            assert_abs_diff_eq!(*g, 0.04, epsilon = 1e-10);
        }
        assert_eq!(r.flagged_modes.len(), 3);
    }

    #[test]
    fn steady_state_rejects_bad_site() {
        let chain = ChainSpec::pst(10).unwrap();
        let d = DisorderRealization::clean(10);
        assert!(steady_state_profile(&chain, &d, 0).is_err());
        assert!(steady_state_profile(&chain, &d, 11).is_err());
    }

    #[test]
    fn injection_sites() {
        let chain = ChainSpec::pst(600).unwrap();
        assert_eq!(Injection::End.site(&chain).unwrap(), 1);
        assert_eq!(Injection::Centre.site(&chain).unwrap(), 300);
        assert_eq!(Injection::Site(17).site(&chain).unwrap(), 17);
        assert!(Injection::Site(601).site(&chain).is_err());
        assert_eq!(
            Injection::Centre.site(&ChainSpec::pst(7).unwrap()).unwrap(),
            4
        );
    }
}
