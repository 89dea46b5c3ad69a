//! Randomised invariants of the chain model, eigensolver, evolution and
//! analysis routines.

use num_complex::Complex64;
use proptest::prelude::*;
use pst_localisation::analysis::{
    fit_delta, steady_state_profile, transfer_sample, OccupationProfile, Provenance,
};
use pst_localisation::chain::{build_hamiltonian, mirror, mirror_parity_split, pst_couplings};
use pst_localisation::disorder::sample_disorder;
use pst_localisation::dynamics::{
    evolve, mirror_fidelity_at, mirroring_time, RelativeWindow, Schedule,
};
use pst_localisation::eigen::{diagonalize, project, reconstruct};
use pst_localisation::{ChainSpec, EigenSystem, EnsembleSpec, Hamiltonian, StateVector};

fn disordered(n: usize, e: f64, seed: u64) -> (ChainSpec, Hamiltonian, EigenSystem) {
    let chain = ChainSpec::pst(n).unwrap();
    let spec = EnsembleSpec::new(chain, e, 1, seed).unwrap();
    let disorder = sample_disorder(&spec, 0).unwrap();
    let h = build_hamiltonian(&chain, Some(&disorder)).unwrap();
    let eig = diagonalize(&h).unwrap();
    (chain, h, eig)
}

fn random_state(raw: &[(f64, f64)]) -> StateVector {
    let s = StateVector::new(raw.iter().map(|&(re, im)| Complex64::new(re, im)).collect());
    if s.norm() < 1e-3 {
        let mut a = vec![Complex64::new(0.0, 0.0); raw.len()];
        a[0] = Complex64::new(1.0, 0.0);
        return StateVector::new(a);
    }
    s.normalized()
}

/// Tridiagonal product written out directly, independent of the library.
fn apply_dense(h: &Hamiltonian, x: &[Complex64]) -> Vec<Complex64> {
    let d = h.diagonal();
    let e = h.off_diagonal();
    (0..d.len())
        .map(|i| {
            let mut y = x[i] * d[i];
            if i > 0 {
                y += x[i - 1] * e[i - 1];
            }
            if i + 1 < d.len() {
                y += x[i + 1] * e[i];
            }
            y
        })
        .collect()
}

fn energy(h: &Hamiltonian, psi: &StateVector) -> f64 {
    let hx = apply_dense(h, psi.amplitudes());
    psi.amplitudes()
        .iter()
        .zip(&hx)
        .map(|(a, b)| (a.conj() * b).re)
        .sum()
}

fn chain_and_state() -> impl Strategy<Value = (usize, f64, u64, Vec<(f64, f64)>)> {
    (2usize..=80, 0.0f64..=1.0, any::<u64>()).prop_flat_map(|(n, e, seed)| {
        (
            Just(n),
            Just(e),
            Just(seed),
            prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n),
        )
    })
}

fn check_eigensystem(h: &Hamiltonian, eig: &EigenSystem) -> Result<(), TestCaseError> {
    let n = eig.n();
    let values = eig.eigenvalues();
    prop_assert!(values.windows(2).all(|w| w[0] <= w[1]));
    for m in 0..n {
        let v = eig.eigenvector(m);
        let x: Vec<Complex64> = v.iter().map(|&c| Complex64::new(c, 0.0)).collect();
        let hv = apply_dense(h, &x);
        let residual = hv
            .iter()
            .zip(v)
            .map(|(a, &b)| (a.re - values[m] * b).powi(2))
            .sum::<f64>()
            .sqrt();
        prop_assert!(
            residual <= 1e-10 * values[m].abs().max(1.0),
            "residual {residual} mode {m}"
        );
        for k in m..n {
            let dot: f64 = v.iter().zip(eig.eigenvector(k)).map(|(a, b)| a * b).sum();
            let expect = if k == m { 1.0 } else { 0.0 };
            prop_assert!((dot - expect).abs() <= 1e-10, "<{m}|{k}> = {dot}");
        }
    }
    let trace: f64 = h.diagonal().iter().sum();
    let sum: f64 = values.iter().sum();
    prop_assert!((trace - sum).abs() <= 1e-10 * n as f64);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eigensystem_is_orthonormal_with_small_residuals(
        n in 2usize..=300, e in 0.0f64..=1.0, seed in any::<u64>()
    ) {
        let (_, h, eig) = disordered(n, e, seed);
        check_eigensystem(&h, &eig)?;
    }

    #[test]
    fn evolution_is_unitary((n, e, seed, raw) in chain_and_state(), frac in 0.0f64..=10.0) {
        let (chain, _, eig) = disordered(n, e, seed);
        let t = frac * mirroring_time(&chain).unwrap();
        let psi = evolve(&random_state(&raw), &eig, t).unwrap();
        prop_assert!((psi.norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn energy_is_conserved((n, e, seed, raw) in chain_and_state(), frac in 0.0f64..=10.0) {
        let (chain, h, eig) = disordered(n, e, seed);
        let s = random_state(&raw);
        let t = frac * mirroring_time(&chain).unwrap();
        let before = energy(&h, &s);
        let after = energy(&h, &evolve(&s, &eig, t).unwrap());
        prop_assert!((before - after).abs() <= 1e-10 * h.norm_bound());
    }

    #[test]
    fn evolution_composes(
        (n, e, seed, raw) in chain_and_state(), a in 0.0f64..=5.0, b in 0.0f64..=5.0
    ) {
        let (chain, _, eig) = disordered(n, e, seed);
        let t_m = mirroring_time(&chain).unwrap();
        let s = random_state(&raw);
        let two_step = evolve(&evolve(&s, &eig, a * t_m).unwrap(), &eig, b * t_m).unwrap();
        let one_step = evolve(&s, &eig, (a + b) * t_m).unwrap();
        for (x, y) in two_step.amplitudes().iter().zip(one_step.amplitudes()) {
            prop_assert!((x - y).norm() <= 1e-11);
        }
    }

    #[test]
    fn parseval_and_completeness((n, e, seed, raw) in chain_and_state()) {
        let (_, _, eig) = disordered(n, e, seed);
        let s = random_state(&raw);
        let amps = project(&s, &eig).unwrap();
        let total: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        prop_assert!((total - s.norm_sqr()).abs() <= 1e-12);
        let back = reconstruct(&amps, &eig).unwrap();
        for (x, y) in back.amplitudes().iter().zip(s.amplitudes()) {
            prop_assert!((x - y).norm() <= 1e-10);
        }
    }

    #[test]
    fn clean_hamiltonian_commutes_with_mirror((n, _e, _seed, raw) in chain_and_state()) {
        let chain = ChainSpec::pst(n).unwrap();
        let h = build_hamiltonian(&chain, None).unwrap();
        let s = random_state(&raw);
        let hm = h.apply(&mirror(&s)).unwrap();
        let mh = mirror(&h.apply(&s).unwrap());
        for (x, y) in hm.amplitudes().iter().zip(mh.amplitudes()) {
            prop_assert!((x - y).norm() <= 1e-12);
        }
    }

    #[test]
    fn parity_split_is_orthogonal((_n, _e, _seed, raw) in chain_and_state()) {
        let s = random_state(&raw);
        let (even, odd) = mirror_parity_split(&s);
        prop_assert!(even.inner(&odd).unwrap().norm() <= 1e-14);
        // and the halves recombine
        let sqrt2 = std::f64::consts::SQRT_2;
        for ((a, b), c) in even.amplitudes().iter().zip(odd.amplitudes()).zip(s.amplitudes()) {
            prop_assert!(((a + b) / sqrt2 - c).norm() <= 1e-15);
        }
    }

    #[test]
    fn couplings_are_palindromic_and_peak_at_j_max(n in 2usize..=10_000, j_max in 0.01f64..100.0) {
        let spec = ChainSpec::new(n, j_max, pst_localisation::CouplingLaw::Pst).unwrap();
        let j = pst_couplings(&spec).unwrap();
        let reversed: Vec<f64> = j.iter().rev().copied().collect();
        prop_assert_eq!(&j, &reversed);
        let peak = j.iter().copied().fold(f64::MIN, f64::max);
        prop_assert!((peak - j_max).abs() <= 1e-14 * j_max);
    }

    #[test]
    fn fit_recovers_synthetic_exponents(
        delta in -1.0f64..=2.0, alpha in 0.01f64..10.0, n in 60usize..400, lo in 1usize..10
    ) {
        let hi = n / 2;
        let probabilities: Vec<f64> = (1..=n).map(|i| alpha * (i as f64).powf(-(2.0 + delta))).collect();
        let profile = OccupationProfile {
            probabilities,
            injection_site: 1,
            provenance: Provenance::SingleRealization { index: 0 },
            time_window: Schedule::new(0.0, 1.0, 2).unwrap(),
        };
        let verdict = fit_delta(&profile, (lo, hi)).unwrap();
        prop_assert!((verdict.delta - delta).abs() <= 1e-8, "{} vs {delta}", verdict.delta);
        prop_assert!((verdict.alpha - alpha).abs() <= 1e-8 * alpha);
        prop_assert_eq!(verdict.localised, delta >= 0.0);
    }

    #[test]
    fn steady_state_profiles_are_normalised(
        n in 2usize..=60, e in 0.0f64..=1.0, seed in any::<u64>(), site_frac in 0.0f64..1.0
    ) {
        let chain = ChainSpec::pst(n).unwrap();
        let spec = EnsembleSpec::new(chain, e, 1, seed).unwrap();
        let disorder = sample_disorder(&spec, 0).unwrap();
        let site = 1 + ((n as f64 * site_frac) as usize).min(n - 1);
        let profile = steady_state_profile(&chain, &disorder, site).unwrap();
        prop_assert!((profile.total() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn window_maximum_dominates_mirror_time_fidelity(
        n in 2usize..=60, e in 0.0f64..=1.0, seed in any::<u64>()
    ) {
        let chain = ChainSpec::pst(n).unwrap();
        let spec = EnsembleSpec::new(chain, e, 1, seed).unwrap();
        let disorder = sample_disorder(&spec, 0).unwrap();
        let sample = transfer_sample(&chain, &disorder, &RelativeWindow::TRANSFER).unwrap();
        prop_assert!(sample.window_max.fidelity >= sample.at_mirror_time);
        prop_assert!(sample.window_max.fidelity <= 1.0 + 1e-12);
    }

    #[test]
    fn clean_chains_mirror_random_states(n in 2usize..=100, raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 100)) {
        let chain = ChainSpec::pst(n).unwrap();
        let eig = diagonalize(&build_hamiltonian(&chain, None).unwrap()).unwrap();
        let s = random_state(&raw[..n]);
        let f = mirror_fidelity_at(&s, &eig, mirroring_time(&chain).unwrap()).unwrap();
        prop_assert!((f - 1.0).abs() <= 1e-9, "{f}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn large_disordered_eigensystems(n in 700usize..=1000, e in 0.0f64..=1.0, seed in any::<u64>()) {
        let (_, h, eig) = disordered(n, e, seed);
        check_eigensystem(&h, &eig)?;
    }
}

#[test]
fn eigensystem_at_one_thousand_sites() {
    let (_, h, eig) = disordered(1000, 1.0, 2024);
    check_eigensystem(&h, &eig).unwrap();
}
