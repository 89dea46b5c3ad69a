//! Chain specifications, coupling profiles and the single-excitation
//! Hamiltonian.
//!
//! Energies are in units of the maximum coupling `J_max` and times in
//! `ħ/J_max` (ħ = 1). Site numbers are 1-based at every public boundary.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::disorder::DisorderRealization;
use crate::error::{Error, Result};
use crate::state::{check_len, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingLaw {
    /// `J_{i,i+1} = J_0 sqrt(i (N - i))`, peak coupling equal to `J_max`.
    Pst,
    /// Every bond equal to `J_max`. Control profile without state transfer.
    Uniform,
}

/// Immutable description of a chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    n_sites: usize,
    j_max: f64,
    law: CouplingLaw,
}

impl ChainSpec {
    pub fn new(n_sites: usize, j_max: f64, law: CouplingLaw) -> Result<Self> {
        if n_sites < 2 {
            return Err(Error::TooFewSites(n_sites));
        }
        if !(j_max.is_finite() && j_max > 0.0) {
            return Err(Error::InvalidCoupling(j_max));
        }
        Ok(Self {
            n_sites,
            j_max,
            law,
        })
    }

    /// PST chain with `J_max = 1`.
    pub fn pst(n_sites: usize) -> Result<Self> {
        Self::new(n_sites, 1.0, CouplingLaw::Pst)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn j_max(&self) -> f64 {
        self.j_max
    }

    pub fn law(&self) -> CouplingLaw {
        self.law
    }

    /// Coupling scale `J_0` of the PST law.
    ///
    /// Even `N`: `2 J_max / N`. Odd `N`: `2 J_max / (N sqrt(1 - 1/N^2))`.
    /// Either way the middle bond carries exactly `J_max`.
    pub fn j0(&self) -> Result<f64> {
        if self.law != CouplingLaw::Pst {
            return Err(Error::RequiresPst);
        }
        let n = self.n_sites as f64;
        Ok(if self.n_sites.is_multiple_of(2) {
            2.0 * self.j_max / n
        } else {
            2.0 * self.j_max / (n * (1.0 - 1.0 / (n * n)).sqrt())
        })
    }

    /// Site of a centre injection: `N/2` for even chains, the middle site for
    /// odd ones.
    pub fn centre_site(&self) -> usize {
        self.n_sites.div_ceil(2)
    }
}

/// The `N - 1` nearest-neighbour couplings of a PST chain, bond `i` joining
/// sites `i` and `i + 1`.
pub fn pst_couplings(spec: &ChainSpec) -> Result<Vec<f64>> {
    let j0 = spec.j0()?;
    let n = spec.n_sites;
    // i (N - i) is an exact integer, so the profile is an exact palindrome.
    Ok((1..n).map(|i| j0 * ((i * (n - i)) as f64).sqrt()).collect())
}

/// Couplings for whichever law the spec names.
pub fn couplings(spec: &ChainSpec) -> Vec<f64> {
    match spec.law {
        CouplingLaw::Pst => pst_couplings(spec).expect("law checked"),
        CouplingLaw::Uniform => vec![spec.j_max; spec.n_sites - 1],
    }
}

/// Real symmetric tridiagonal matrix in the single-excitation site basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    diagonal: Vec<f64>,
    off_diagonal: Vec<f64>,
}

impl Hamiltonian {
    pub fn from_parts(diagonal: Vec<f64>, off_diagonal: Vec<f64>) -> Result<Self> {
        if diagonal.len() < 2 {
            return Err(Error::TooFewSites(diagonal.len()));
        }
        check_len(diagonal.len() - 1, off_diagonal.len())?;
        Ok(Self {
            diagonal,
            off_diagonal,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn off_diagonal(&self) -> &[f64] {
        &self.off_diagonal
    }

    /// `H c` for a complex amplitude slice.
    pub fn apply_slice(&self, input: &[Complex64], output: &mut [Complex64]) {
        let n = self.diagonal.len();
        debug_assert_eq!(input.len(), n);
        debug_assert_eq!(output.len(), n);
        for i in 0..n {
            let mut acc = input[i] * self.diagonal[i];
            if i > 0 {
                acc += input[i - 1] * self.off_diagonal[i - 1];
            }
            if i + 1 < n {
                acc += input[i + 1] * self.off_diagonal[i];
            }
            output[i] = acc;
        }
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        check_len(self.n_sites(), state.len())?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.n_sites()];
        self.apply_slice(state.amplitudes(), &mut out);
        Ok(StateVector::new(out))
    }

    /// `<psi|H|psi>`
    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        let h_psi = self.apply(state)?;
        Ok(state.inner(&h_psi)?.re)
    }

    /// Gershgorin bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        let n = self.n_sites();
        (0..n)
            .map(|i| {
                let left = if i > 0 {
                    self.off_diagonal[i - 1].abs()
                } else {
                    0.0
                };
                let right = if i + 1 < n {
                    self.off_diagonal[i].abs()
                } else {
                    0.0
                };
                self.diagonal[i].abs() + left + right
            })
            .fold(0.0, f64::max)
    }
}

/// Hamiltonian of `spec`, with on-site energies taken from `disorder` when
/// present and zero otherwise.
pub fn build_hamiltonian(
    spec: &ChainSpec,
    disorder: Option<&DisorderRealization>,
) -> Result<Hamiltonian> {
    let n = spec.n_sites();
    let diagonal = match disorder {
        Some(d) => {
            check_len(n, d.energies().len())?;
            d.energies().to_vec()
        }
        None => vec![0.0; n],
    };
    Hamiltonian::from_parts(diagonal, couplings(spec))
}

/// Site reversal `i -> N + 1 - i`.
pub fn mirror(state: &StateVector) -> StateVector {
    let mut amplitudes = state.amplitudes().to_vec();
    amplitudes.reverse();
    StateVector::new(amplitudes)
}

/// Even and odd parts `(s ± M s)/√2` of a state. Neither part is normalised;
/// `(even + odd)/√2` recovers `s`.
pub fn mirror_parity_split(state: &StateVector) -> (StateVector, StateVector) {
    let amps = state.amplitudes();
    let n = amps.len();
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let even = (0..n)
        .map(|i| (amps[i] + amps[n - 1 - i]) * scale)
        .collect();
    let odd = (0..n)
        .map(|i| (amps[i] - amps[n - 1 - i]) * scale)
        .collect();
    (StateVector::new(even), StateVector::new(odd))
}
