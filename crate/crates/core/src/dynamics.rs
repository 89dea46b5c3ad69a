//! Time evolution of single-excitation states and transfer fidelities.
//!
//! Evolution always goes through the spectral decomposition, which is exact
//! for a time-independent Hamiltonian. [`evolve_stepped_oracle`] integrates
//! the Schrödinger equation directly and exists only to cross-check it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::{mirror, ChainSpec, Hamiltonian};
use crate::eigen::{project, EigenSystem, SiteComponents};
use crate::error::{Error, Result};
use crate::state::{check_len, StateVector};

/// Samples per mirroring time used when scanning for the maximum fidelity.
pub const SAMPLES_PER_MIRROR_TIME: usize = 2000;

/// Golden-section steps spent refining a window maximum.
pub const GOLDEN_STEPS: usize = 20;

/// Uniformly spaced sample times, both ends included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub t_start: f64,
    pub t_end: f64,
    pub n_samples: usize,
}

impl Schedule {
    pub fn new(t_start: f64, t_end: f64, n_samples: usize) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite()) {
            return Err(Error::Schedule("times must be finite".into()));
        }
        if t_end < t_start {
            return Err(Error::Schedule(format!(
                "t_end {t_end} before t_start {t_start}"
            )));
        }
        if n_samples == 0 {
            return Err(Error::Schedule("n_samples must be at least 1".into()));
        }
        Ok(Self {
            t_start,
            t_end,
            n_samples,
        })
    }

    /// 100 samples over `[5 t_M, 7 t_M]`, the steady-state protocol.
    pub fn steady_state(t_m: f64) -> Self {
        RelativeWindow::STEADY_STATE.to_schedule(t_m)
    }

    /// `[0, 4.5 t_M]` at [`SAMPLES_PER_MIRROR_TIME`] samples per `t_M`.
    pub fn transfer_window(t_m: f64) -> Self {
        RelativeWindow::TRANSFER.to_schedule(t_m)
    }

    pub fn spacing(&self) -> f64 {
        if self.n_samples < 2 {
            0.0
        } else {
            (self.t_end - self.t_start) / (self.n_samples - 1) as f64
        }
    }

    pub fn time(&self, j: usize) -> f64 {
        if self.n_samples < 2 {
            return self.t_start;
        }
        if j + 1 == self.n_samples {
            return self.t_end;
        }
        self.t_start + (self.t_end - self.t_start) * j as f64 / (self.n_samples - 1) as f64
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_samples).map(|j| self.time(j))
    }
}

/// A sampling window expressed in multiples of the mirroring time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeWindow {
    pub start: f64,
    pub end: f64,
    pub n_samples: usize,
}

impl RelativeWindow {
    /// `[5 t_M, 7 t_M]`, 100 samples.
    pub const STEADY_STATE: Self = Self {
        start: 5.0,
        end: 7.0,
        n_samples: 100,
    };

    /// `[0, 4.5 t_M]`, [`SAMPLES_PER_MIRROR_TIME`] samples per `t_M`.
    pub const TRANSFER: Self = Self {
        start: 0.0,
        end: 4.5,
        n_samples: 9 * SAMPLES_PER_MIRROR_TIME / 2,
    };

    pub fn new(start: f64, end: f64, n_samples: usize) -> Result<Self> {
        Schedule::new(start, end, n_samples)?;
        Ok(Self {
            start,
            end,
            n_samples,
        })
    }

    pub fn to_schedule(&self, t_m: f64) -> Schedule {
        Schedule {
            t_start: self.start * t_m,
            t_end: self.end * t_m,
            n_samples: self.n_samples,
        }
    }
}

/// Mirroring time `t_M = π / (2 J_0)` of a PST chain.
pub fn mirroring_time(spec: &ChainSpec) -> Result<f64> {
    Ok(std::f64::consts::PI / (2.0 * spec.j0()?))
}

/// Full revival period `t_S = 2 t_M`.
pub fn revival_period(spec: &ChainSpec) -> Result<f64> {
    Ok(2.0 * mirroring_time(spec)?)
}

/// A state expanded in an eigenbasis, ready to be evaluated at any time.
#[derive(Debug, Clone)]
pub struct Propagator<'a> {
    eig: &'a EigenSystem,
    coefficients: Vec<Complex64>,
}

impl<'a> Propagator<'a> {
    pub fn new(state0: &StateVector, eig: &'a EigenSystem) -> Result<Self> {
        Ok(Self {
            eig,
            coefficients: project(state0, eig)?,
        })
    }

    /// Propagator for a real initial state given as eigenbasis amplitudes.
    pub fn from_coefficients(coefficients: Vec<Complex64>, eig: &'a EigenSystem) -> Result<Self> {
        check_len(eig.n(), coefficients.len())?;
        Ok(Self { eig, coefficients })
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// Writes the amplitudes at time `t` into split real/imaginary buffers.
    fn amplitudes_into(&self, t: f64, re: &mut [f64], im: &mut [f64]) {
        re.fill(0.0);
        im.fill(0.0);
        for ((a, &energy), phi) in self
            .coefficients
            .iter()
            .zip(self.eig.eigenvalues())
            .zip(self.eig.eigenvectors())
        {
            if *a == Complex64::new(0.0, 0.0) {
                continue;
            }
            let coeff = a * Complex64::from_polar(1.0, -energy * t);
            for ((r, i), &p) in re.iter_mut().zip(im.iter_mut()).zip(phi) {
                *r += coeff.re * p;
                *i += coeff.im * p;
            }
        }
    }

    pub fn state_at(&self, t: f64) -> StateVector {
        let n = self.eig.n();
        let mut re = vec![0.0; n];
        let mut im = vec![0.0; n];
        self.amplitudes_into(t, &mut re, &mut im);
        StateVector::new(
            re.into_iter()
                .zip(im)
                .map(|(r, i)| Complex64::new(r, i))
                .collect(),
        )
    }

    /// Time average of `|c_i(t)|^2` over the schedule.
    pub fn mean_probabilities(&self, schedule: &Schedule) -> Vec<f64> {
        let n = self.eig.n();
        let mut re = vec![0.0; n];
        let mut im = vec![0.0; n];
        let mut acc = vec![0.0; n];
        for t in schedule.times() {
            self.amplitudes_into(t, &mut re, &mut im);
            for ((a, r), i) in acc.iter_mut().zip(&re).zip(&im) {
                *a += r * r + i * i;
            }
        }
        let scale = 1.0 / schedule.n_samples as f64;
        acc.iter_mut().for_each(|a| *a *= scale);
        acc
    }
}

/// `e^{-iHt} |state0>` through the eigendecomposition.
pub fn evolve(state0: &StateVector, eig: &EigenSystem, t: f64) -> Result<StateVector> {
    Ok(Propagator::new(state0, eig)?.state_at(t))
}

/// `|<target|psi>|^2`
pub fn fidelity(psi: &StateVector, target: &StateVector) -> Result<f64> {
    Ok(target.inner(psi)?.norm_sqr())
}

/// Fidelity of the evolved state against the mirror image of the initial one.
pub fn mirror_fidelity_at(state0: &StateVector, eig: &EigenSystem, t: f64) -> Result<f64> {
    fidelity(&evolve(state0, eig, t)?, &mirror(state0))
}

/// `<target| e^{-iHt} |initial>` as a sum over modes `sum_m w_m e^{-i E_m t}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionAmplitude {
    energies: Vec<f64>,
    weights: Vec<Complex64>,
}

/// Grid steps between exact phase evaluations in [`TransitionAmplitude::scan`].
const PHASE_RESYNC: usize = 64;

impl TransitionAmplitude {
    pub fn new(state0: &StateVector, target: &StateVector, eig: &EigenSystem) -> Result<Self> {
        let a = project(state0, eig)?;
        let b = project(target, eig)?;
        Ok(Self {
            energies: eig.eigenvalues().to_vec(),
            weights: a.iter().zip(&b).map(|(a, b)| b.conj() * a).collect(),
        })
    }

    /// Site-to-site amplitude from a partial eigensolve; `from` and `to`
    /// index the tracked sites of `components`.
    pub fn between_sites(components: &SiteComponents, from: usize, to: usize) -> Self {
        Self {
            energies: components.eigenvalues().to_vec(),
            weights: components
                .row(from)
                .iter()
                .zip(components.row(to))
                .map(|(a, b)| Complex64::new(a * b, 0.0))
                .collect(),
        }
    }

    pub fn amplitude(&self, t: f64) -> Complex64 {
        self.weights
            .iter()
            .zip(&self.energies)
            .map(|(w, &e)| w * Complex64::from_polar(1.0, -e * t))
            .sum()
    }

    pub fn fidelity(&self, t: f64) -> f64 {
        self.amplitude(t).norm_sqr()
    }

    /// Fidelity on every point of the schedule.
    ///
    /// Phases advance by a fixed per-step rotation and are recomputed exactly
    /// every few steps, which keeps the accumulated rounding near 1e-14.
    pub fn scan(&self, schedule: &Schedule) -> Vec<f64> {
        let dt = schedule.spacing();
        let steps: Vec<Complex64> = self
            .energies
            .iter()
            .map(|&e| Complex64::from_polar(1.0, -e * dt))
            .collect();
        let mut phased = vec![Complex64::new(0.0, 0.0); self.weights.len()];
        let mut out = Vec::with_capacity(schedule.n_samples);
        for j in 0..schedule.n_samples {
            if j % PHASE_RESYNC == 0 {
                let t = schedule.time(j);
                for ((p, w), &e) in phased.iter_mut().zip(&self.weights).zip(&self.energies) {
                    *p = w * Complex64::from_polar(1.0, -e * t);
                }
            }
            let amp: Complex64 = phased.iter().sum();
            out.push(amp.norm_sqr());
            for (p, s) in phased.iter_mut().zip(&steps) {
                *p *= s;
            }
        }
        out
    }

    /// Grid scan, parabolic interpolation on the best three samples, then
    /// golden-section refinement inside the bracketing grid cells.
    pub fn max_over(&self, window: &Schedule) -> Result<WindowMaximum> {
        if window.n_samples < 2 {
            return Err(Error::Schedule(
                "window maximisation needs at least 2 samples".into(),
            ));
        }
        let grid = self.scan(window);
        let mut k = 0;
        for (j, &f) in grid.iter().enumerate() {
            if f > grid[k] {
                k = j;
            }
        }
        let mut best = WindowMaximum {
            fidelity: self.fidelity(window.time(k)),
            time: window.time(k),
        };
        let consider = |t: f64, best: &mut WindowMaximum| {
            let f = self.fidelity(t);
            if f > best.fidelity {
                *best = WindowMaximum {
                    fidelity: f,
                    time: t,
                };
            }
        };

        let last = window.n_samples - 1;
        let lo = window.time(k.saturating_sub(1));
        let hi = window.time((k + 1).min(last));

        if k > 0 && k < last {
            let (f0, f1, f2) = (grid[k - 1], grid[k], grid[k + 1]);
            let curvature = f0 - 2.0 * f1 + f2;
            if curvature < 0.0 {
                let t = window.time(k) + 0.5 * window.spacing() * (f0 - f2) / curvature;
                if (lo..=hi).contains(&t) {
                    consider(t, &mut best);
                }
            }
        }

        let ratio = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (lo, hi);
        let mut x1 = b - ratio * (b - a);
        let mut x2 = a + ratio * (b - a);
        let mut f1 = self.fidelity(x1);
        let mut f2 = self.fidelity(x2);
        for _ in 0..GOLDEN_STEPS {
            if b - a <= f64::EPSILON * b.abs().max(1.0) {
                break;
            }
            if f1 >= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - ratio * (b - a);
                f1 = self.fidelity(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + ratio * (b - a);
                f2 = self.fidelity(x2);
            }
        }
        consider(x1, &mut best);
        consider(x2, &mut best);
        Ok(best)
    }
}

/// Largest fidelity found in a window and the time it occurs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowMaximum {
    pub fidelity: f64,
    pub time: f64,
}

pub fn max_fidelity_over_window(
    state0: &StateVector,
    target: &StateVector,
    eig: &EigenSystem,
    window: &Schedule,
) -> Result<WindowMaximum> {
    TransitionAmplitude::new(state0, target, eig)?.max_over(window)
}

/// Result of the stepped integrator: the renormalised final state and the
/// norm drift `|psi|^2 - 1` accumulated before renormalising.
#[derive(Debug, Clone, PartialEq)]
pub struct SteppedEvolution {
    pub state: StateVector,
    pub norm_drift: f64,
}

/// Classical fourth-order Runge-Kutta integration of `i dc/dt = H c` with a
/// fixed step, the last step shortened to land on `t`.
pub fn evolve_stepped_oracle(
    state0: &StateVector,
    h: &Hamiltonian,
    t: f64,
    dt: f64,
) -> Result<SteppedEvolution> {
    check_len(h.n_sites(), state0.len())?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Schedule(format!("step must be positive, got {dt}")));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Schedule(format!(
            "time must be non-negative, got {t}"
        )));
    }
    let n = h.n_sites();
    let zero = Complex64::new(0.0, 0.0);
    let minus_i = Complex64::new(0.0, -1.0);
    let mut c = state0.amplitudes().to_vec();
    let initial_norm = state0.norm_sqr();
    let (mut k1, mut k2, mut k3, mut k4) =
        (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    let mut tmp = vec![zero; n];

    let derivative = |input: &[Complex64], out: &mut [Complex64]| {
        h.apply_slice(input, out);
        out.iter_mut().for_each(|x| *x *= minus_i);
    };

    let full_steps = (t / dt).floor() as usize;
    let remainder = t - full_steps as f64 * dt;
    let mut step_sizes = std::iter::repeat_n(dt, full_steps).collect::<Vec<_>>();
    if remainder > 1e-12 * dt {
        step_sizes.push(remainder);
    }

    for h_step in step_sizes {
        derivative(&c, &mut k1);
        for i in 0..n {
            tmp[i] = c[i] + k1[i] * (0.5 * h_step);
        }
        derivative(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = c[i] + k2[i] * (0.5 * h_step);
        }
        derivative(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = c[i] + k3[i] * h_step;
        }
        derivative(&tmp, &mut k4);
        for i in 0..n {
            c[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h_step / 6.0);
        }
    }

    let state = StateVector::new(c);
    let norm_sqr = state.norm_sqr();
    let norm_drift = norm_sqr - initial_norm;
    let state = if norm_sqr > 0.0 {
        let scale = (initial_norm / norm_sqr).sqrt();
        StateVector::new(
            state
                .into_amplitudes()
                .into_iter()
                .map(|x| x * scale)
                .collect(),
        )
    } else {
        state
    };
    Ok(SteppedEvolution { state, norm_drift })
}
