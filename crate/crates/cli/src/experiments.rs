//! One function per experiment; each returns the tables it produced.

use pst_localisation::analysis::{
    fidelity_surface, fit_delta, injected_state_report, max_occupancy, spectrum_report,
    steady_state_ensemble, support_window, OccupationProfile, Provenance, ALPHA_CRITICAL,
};
use pst_localisation::chain::{build_hamiltonian, couplings, mirror};
use pst_localisation::disorder::{run_ensemble, sample_disorder};
use pst_localisation::dynamics::{fidelity, mirroring_time, Propagator, RelativeWindow};
use pst_localisation::eigen::diagonalize;
use pst_localisation::{EnsembleSpec, Error, StateVector};

use crate::config::{Experiment, RunConfig};
use crate::error::CliError;
use crate::table::{col, ResultTable};

/// Top modes listed in the injected-state table.
const INJECTED_MODES: usize = 5;

/// Progress lines on standard error.
#[derive(Debug, Clone, Copy)]
pub struct Progress {
    pub quiet: bool,
}

impl Progress {
    fn note(&self, msg: std::fmt::Arguments<'_>) {
        if !self.quiet {
            eprintln!("pstloc: {msg}");
        }
    }
}

fn tag(n: usize, e: f64) -> String {
    format!("N{n}_E{e}")
}

fn ensemble(cfg: &RunConfig, n: usize, e: f64) -> Result<EnsembleSpec, CliError> {
    Ok(EnsembleSpec::new(
        cfg.chain(n),
        e,
        cfg.n_realizations,
        cfg.seed(),
    )?)
}

fn window(cfg: &RunConfig) -> RelativeWindow {
    cfg.window.expect("experiment has a time window")
}

fn injection_site(cfg: &RunConfig, n: usize) -> Result<usize, CliError> {
    Ok(cfg.injection.to_injection().site(&cfg.chain(n))?)
}

/// Critical profile around `site`: one-sided from an end, two-sided with
/// half the weight elsewhere.
fn critical_line_at(n: usize, site: usize) -> Vec<f64> {
    let at_end = site == 1 || site == n;
    (1..=n)
        .map(|i| {
            let x = (i.abs_diff(site) + 1) as f64;
            let alpha = if at_end {
                ALPHA_CRITICAL
            } else {
                0.5 * ALPHA_CRITICAL
            };
            alpha / (x * x)
        })
        .collect()
}

pub fn run(cfg: &RunConfig, progress: Progress) -> Result<Vec<ResultTable>, CliError> {
    match cfg.experiment {
        Experiment::Couplings => Ok(coupling_tables(cfg)),
        Experiment::Evolve => evolve(cfg),
        Experiment::SteadyState => steady_state(cfg, progress),
        Experiment::SupportFraction => support(cfg, progress),
        Experiment::FidelitySurface => surface(cfg, progress),
        Experiment::EigenReport => eigen_report(cfg, progress),
        Experiment::DeltaFit => delta_fit(cfg, progress),
    }
}

fn coupling_tables(cfg: &RunConfig) -> Vec<ResultTable> {
    cfg.n_values
        .iter()
        .map(|&n| {
            let mut t = ResultTable::new(
                format!("couplings_N{n}.csv"),
                format!(
                    "couplings N={n} law={}",
                    format!("{:?}", cfg.law).to_lowercase()
                ),
                vec![col("i", "bond (i, i+1)"), col("coupling", "J_max")],
            );
            for (k, j) in couplings(&cfg.chain(n)).into_iter().enumerate() {
                t.push(vec![(k + 1).into(), j.into()]);
            }
            t
        })
        .collect()
}

fn evolve(cfg: &RunConfig) -> Result<Vec<ResultTable>, CliError> {
    let (n, e) = (cfg.n_values[0], cfg.strengths[0]);
    let spec = ensemble(cfg, n, e)?;
    let chain = spec.chain();
    let t_m = mirroring_time(chain)?;
    let disorder = sample_disorder(&spec, cfg.realization)?;
    let eig = diagonalize(&build_hamiltonian(chain, Some(&disorder))?)?;
    let site = injection_site(cfg, n)?;
    let state0 = StateVector::site(n, site)?;
    let target = mirror(&state0);
    let propagator = Propagator::new(&state0, &eig)?;
    let schedule = window(cfg).to_schedule(t_m);

    let label = format!(
        "N={n} E={e} realization={} injection={site}",
        cfg.realization
    );
    let mut occupation = ResultTable::new(
        format!("evolve_{}.csv", tag(n, e)),
        format!("site occupation {label}"),
        vec![
            col("t", "hbar/J_max"),
            col("t_over_tM", "t_M"),
            col("site", "1"),
            col("probability", "1"),
        ],
    );
    let mut transfer = ResultTable::new(
        format!("evolve_fidelity_{}.csv", tag(n, e)),
        format!("fidelity with mirrored initial state {label}"),
        vec![
            col("t", "hbar/J_max"),
            col("t_over_tM", "t_M"),
            col("F_mirror", "1"),
        ],
    );
    for t in schedule.times() {
        let psi = propagator.state_at(t);
        for (k, p) in psi.probabilities().into_iter().enumerate() {
            occupation.push(vec![t.into(), (t / t_m).into(), (k + 1).into(), p.into()]);
        }
        transfer.push(vec![
            t.into(),
            (t / t_m).into(),
            fidelity(&psi, &target)?.into(),
        ]);
    }
    Ok(vec![occupation, transfer])
}

fn steady_state(cfg: &RunConfig, progress: Progress) -> Result<Vec<ResultTable>, CliError> {
    let mut tables = Vec::new();
    for &n in &cfg.n_values {
        for &e in &cfg.strengths {
            progress.note(format_args!("steady-state N={n} E={e}"));
            let spec = ensemble(cfg, n, e)?;
            let site = injection_site(cfg, n)?;
            let (profiles, per_site) =
                steady_state_ensemble(&spec, &[site], &window(cfg), cfg.workers)?;
            let summary = &profiles[0].summary;
            let single = &per_site[0][cfg.realization];
            let critical = critical_line_at(n, site);

            let mut mean = ResultTable::new(
                format!("steady_state_{}.csv", tag(n, e)),
                format!(
                    "ensemble-mean steady-state occupation N={n} E={e} injection={site} realizations={}",
                    summary.count
                ),
                vec![
                    col("site", "1"),
                    col("p_mean", "probability"),
                    col("p_stderr", "probability"),
                    col("critical_line", "probability"),
                ],
            );
            for i in 0..n {
                mean.push(vec![
                    (i + 1).into(),
                    summary.mean[i].into(),
                    summary.stderr[i].into(),
                    critical[i].into(),
                ]);
            }
            let mut one = ResultTable::new(
                format!("steady_state_single_{}.csv", tag(n, e)),
                format!(
                    "single-realization steady-state occupation N={n} E={e} injection={site} realization={}",
                    cfg.realization
                ),
                vec![
                    col("site", "1"),
                    col("p", "probability"),
                    col("critical_line", "probability"),
                ],
            );
            for i in 0..n {
                one.push(vec![(i + 1).into(), single[i].into(), critical[i].into()]);
            }
            tables.push(mean);
            tables.push(one);
        }
    }
    Ok(tables)
}

fn support(cfg: &RunConfig, progress: Progress) -> Result<Vec<ResultTable>, CliError> {
    let mut t = ResultTable::new(
        "support_fraction.csv",
        format!(
            "smallest window holding {} of the steady-state occupation",
            cfg.threshold
        ),
        vec![
            col("N", "sites"),
            col("E", "1"),
            col("injection_site", "1"),
            col("n", "sites"),
            col("n_over_N", "1"),
        ],
    );
    for &n in &cfg.n_values {
        for &e in &cfg.strengths {
            progress.note(format_args!("support-fraction N={n} E={e}"));
            let spec = ensemble(cfg, n, e)?;
            let site = injection_site(cfg, n)?;
            let (profiles, _) = steady_state_ensemble(&spec, &[site], &window(cfg), cfg.workers)?;
            let width = support_window(&profiles[0].summary.mean, site, cfg.threshold)?;
            t.push(vec![
                n.into(),
                e.into(),
                site.into(),
                width.into(),
                (width as f64 / n as f64).into(),
            ]);
        }
    }
    Ok(vec![t])
}

fn surface(cfg: &RunConfig, progress: Progress) -> Result<Vec<ResultTable>, CliError> {
    progress.note(format_args!(
        "fidelity-surface {} cells x {} realizations",
        cfg.n_values.len() * cfg.strengths.len(),
        cfg.n_realizations
    ));
    let cells = fidelity_surface(
        &cfg.n_values,
        &cfg.strengths,
        cfg.j_max,
        cfg.n_realizations,
        cfg.seed(),
        &window(cfg),
        cfg.workers,
    )?;
    let mut t = ResultTable::new(
        "fidelity_surface.csv",
        "end-to-end transfer fidelity at t_M and its maximum over the window",
        vec![
            col("N", "sites"),
            col("E", "1"),
            col("F_tM_mean", "1"),
            col("F_tM_stderr", "1"),
            col("F_max_mean", "1"),
            col("F_max_stderr", "1"),
            col("t_at_max_mean", "hbar/J_max"),
            col("t_at_max_mean_tM", "t_M"),
        ],
    );
    for c in cells {
        t.push(vec![
            c.n_sites.into(),
            c.strength.into(),
            c.at_mirror_time.mean.into(),
            c.at_mirror_time.stderr.into(),
            c.window_max.mean.into(),
            c.window_max.stderr.into(),
            c.time_of_max.mean.into(),
            (c.time_of_max.mean / c.mirror_time).into(),
        ]);
    }
    Ok(vec![t])
}

struct EigenRun {
    max_occupancy: Vec<f64>,
    detail: Option<(
        pst_localisation::analysis::SpectrumReport,
        pst_localisation::analysis::InjectedStateReport,
    )>,
}

fn eigen_report(cfg: &RunConfig, progress: Progress) -> Result<Vec<ResultTable>, CliError> {
    let mut tables = Vec::new();
    for &n in &cfg.n_values {
        for &e in &cfg.strengths {
            progress.note(format_args!("eigen-report N={n} E={e}"));
            let spec = ensemble(cfg, n, e)?;
            let site = injection_site(cfg, n)?;
            let runs = run_ensemble(&spec, cfg.workers, |chain, disorder| {
                let eig = diagonalize(&build_hamiltonian(chain, Some(disorder))?)?;
                let detail = if disorder.index() == cfg.realization {
                    let injected = injected_state_report(&eig, site, INJECTED_MODES)?;
                    Some((spectrum_report(&eig, chain, Some(&injected)), injected))
                } else {
                    None
                };
                Ok(EigenRun {
                    max_occupancy: max_occupancy(&eig),
                    detail,
                })
            })?;
            let rho = runs.vector_summary(|r| r.max_occupancy.as_slice());
            let (spectrum, injected) = runs.results()[cfg.realization]
                .detail
                .clone()
                .expect("chosen realization carries its spectrum");

            let mut rho_table = ResultTable::new(
                format!("eigen_rho_bar_{}.csv", tag(n, e)),
                format!(
                    "ensemble mean of the largest eigenstate occupation per site N={n} E={e} realizations={}",
                    rho.count
                ),
                vec![col("site", "1"), col("rho_bar", "1"), col("rho_bar_stderr", "1")],
            );
            for i in 0..n {
                rho_table.push(vec![
                    (i + 1).into(),
                    rho.mean[i].into(),
                    rho.stderr[i].into(),
                ]);
            }

            let mut spectrum_table = ResultTable::new(
                format!("eigen_spectrum_{}.csv", tag(n, e)),
                format!(
                    "ascending spectrum N={n} E={e} realization={} unperturbed_gap={}",
                    cfg.realization,
                    spectrum.unperturbed_gap.unwrap_or(f64::NAN)
                ),
                vec![
                    col("mode_index", "1 (ascending energy)"),
                    col("eigenvalue", "J_max"),
                    col("gap_to_next", "J_max"),
                ],
            );
            for (m, &energy) in spectrum.eigenvalues.iter().enumerate() {
                let gap = spectrum.gaps.get(m).copied().unwrap_or(f64::NAN);
                spectrum_table.push(vec![(m + 1).into(), energy.into(), gap.into()]);
            }

            let mut injected_table = ResultTable::new(
                format!("eigen_injected_{}.csv", tag(n, e)),
                format!(
                    "eigenmode weights of the injected state N={n} E={e} injection={site} realization={}",
                    cfg.realization
                ),
                vec![
                    col("rank", "1"),
                    col("mode_index", "1 (ascending energy)"),
                    col("weight", "1"),
                    col("eigenvalue", "J_max"),
                    col("H_expectation", "J_max"),
                ],
            );
            for (r, mode) in injected.modes.iter().enumerate() {
                injected_table.push(vec![
                    (r + 1).into(),
                    (mode.mode_index + 1).into(),
                    mode.weight.into(),
                    mode.energy.into(),
                    injected.energy_expectation.into(),
                ]);
            }
            tables.extend([rho_table, spectrum_table, injected_table]);
        }
    }
    Ok(tables)
}

fn delta_fit(cfg: &RunConfig, progress: Progress) -> Result<Vec<ResultTable>, CliError> {
    // Check every range up front so a bad one fails before any ensemble runs.
    for &n in &cfg.n_values {
        let (lo, hi) = cfg.fit_range_for(n, injection_site(cfg, n)?);
        if lo < 1 || hi <= lo || hi > n {
            return Err(CliError::config(
                "fit_range",
                format!("[{lo}, {hi}] is not a usable distance range for N={n}"),
            ));
        }
    }
    let mut t = ResultTable::new(
        "delta_fit.csv",
        "power-law fit p = alpha x^-(2+delta), x = |i - injection| + 1, to the ensemble-mean steady state",
        vec![
            col("N", "sites"),
            col("E", "1"),
            col("i_lo", "sites"),
            col("i_hi", "sites"),
            col("delta", "1"),
            col("alpha", "1"),
            col("rms_log_residual", "1"),
        ],
    );
    for &n in &cfg.n_values {
        for &e in &cfg.strengths {
            progress.note(format_args!("delta-fit N={n} E={e}"));
            let spec = ensemble(cfg, n, e)?;
            let site = injection_site(cfg, n)?;
            let range = cfg.fit_range_for(n, site);
            let (profiles, _) = steady_state_ensemble(&spec, &[site], &window(cfg), cfg.workers)?;
            let profile = OccupationProfile {
                probabilities: profiles[0].summary.mean.clone(),
                injection_site: site,
                provenance: Provenance::EnsembleMean {
                    realizations: profiles[0].summary.count,
                },
                time_window: profiles[0].time_window,
            };
            let verdict = fit_delta(&profile, range).map_err(|err| match err {
                Error::FitRange { lo, hi } => {
                    CliError::config("fit_range", format!("[{lo}, {hi}] leaves too few points"))
                }
                other => other.into(),
            })?;
            t.push(vec![
                n.into(),
                e.into(),
                range.0.into(),
                range.1.into(),
                verdict.delta.into(),
                verdict.alpha.into(),
                verdict.rms_log_residual.into(),
            ]);
        }
    }
    Ok(vec![t])
}
