//! Single-excitation states in the site basis.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex amplitudes `c_i` over the chain sites, stored 0-based.
///
/// Sites are 1-based in every public constructor that takes a site number.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Excitation localised on `site` (1-based).
    pub fn site(n_sites: usize, site: usize) -> Result<Self> {
        if site == 0 || site > n_sites {
            return Err(Error::InvalidSite { site, n_sites });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n_sites];
        amplitudes[site - 1] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Returns a copy scaled to unit norm. A zero vector is returned unchanged.
    pub fn normalized(&self) -> Self {
        let norm = self.norm();
        if norm == 0.0 {
            return self.clone();
        }
        Self::new(self.amplitudes.iter().map(|c| c / norm).collect())
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        check_len(self.len(), other.len())?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Site occupation probabilities `|c_i|^2`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }
}

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::Dimension { expected, actual });
    }
    Ok(())
}
