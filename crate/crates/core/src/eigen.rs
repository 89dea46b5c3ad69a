//! Full eigendecomposition of real symmetric tridiagonal matrices.
//!
//! The solver is the implicit-shift QL iteration (Wilkinson-type shift) with
//! the plane rotations accumulated into the eigenvector basis, so
//! orthogonality of the eigenvectors is structural even for the tight
//! clusters that strong disorder produces.

use num_complex::Complex64;

use crate::chain::Hamiltonian;
use crate::error::{Error, Result};
use crate::state::{check_len, StateVector};

/// QL sweeps allowed per eigenvalue before giving up.
pub const MAX_SWEEPS: usize = 50;

/// Eigenvalues in ascending order together with orthonormal eigenvectors.
///
/// Eigenvector `m` is stored as one contiguous row: `eigenvector(m)[i]` is
/// `<i|phi_m>` for 0-based site `i`. Each eigenvector is signed so that its
/// largest-magnitude component is positive (first such site on ties).
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    eigenvalues: Vec<f64>,
    vectors: Vec<f64>,
}

impl EigenSystem {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Site-basis components of eigenvector `m` (0-based mode index).
    pub fn eigenvector(&self, m: usize) -> &[f64] {
        let n = self.n();
        &self.vectors[m * n..(m + 1) * n]
    }

    pub fn eigenvectors(&self) -> impl Iterator<Item = &[f64]> {
        self.vectors.chunks_exact(self.n())
    }

    /// `<site|phi_m>` with 0-based site and mode.
    pub fn component(&self, site: usize, m: usize) -> f64 {
        self.vectors[m * self.n() + site]
    }

    /// Components of every eigenvector on one (0-based) site.
    pub fn site_row(&self, site: usize) -> Vec<f64> {
        self.eigenvectors().map(|v| v[site]).collect()
    }
}

/// Eigenvalues plus the components of every eigenvector on a few chosen
/// sites. Costs `O(N^2)` instead of the `O(N^3)` of a full decomposition.
///
/// Eigenvector signs are not normalised here (that needs the full vector);
/// products of components of the same mode are sign-independent.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteComponents {
    eigenvalues: Vec<f64>,
    sites: Vec<usize>,
    rows: Vec<Vec<f64>>,
}

impl SiteComponents {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// 1-based sites that were tracked.
    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    /// `<site|phi_m>` for all modes `m`, for the `k`-th tracked site.
    pub fn row(&self, k: usize) -> &[f64] {
        &self.rows[k]
    }
}

/// Implicit QL on `(d, e)` where `e[i]` couples `i` and `i + 1` and
/// `e[n - 1] == 0`. Each plane rotation acting on modes `(i, i + 1)` is
/// reported to `rotate(i, s, c)`.
fn implicit_ql<F>(d: &mut [f64], e: &mut [f64], mut rotate: F) -> Result<()>
where
    F: FnMut(usize, f64, f64),
{
    let n = d.len();
    debug_assert_eq!(e.len(), n);
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::NoConvergence { index: l });
            }

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                rotate(i, s, c);
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn padded_off_diagonal(h: &Hamiltonian) -> Vec<f64> {
    let mut e = h.off_diagonal().to_vec();
    e.push(0.0);
    e
}

fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    order
}

/// Full eigendecomposition of `h`.
pub fn diagonalize(h: &Hamiltonian) -> Result<EigenSystem> {
    let n = h.n_sites();
    let mut d = h.diagonal().to_vec();
    let mut e = padded_off_diagonal(h);

    // Row m holds mode m; starts as the identity.
    let mut rows = vec![0.0; n * n];
    for i in 0..n {
        rows[i * n + i] = 1.0;
    }

    implicit_ql(&mut d, &mut e, |i, s, c| {
        let (head, tail) = rows.split_at_mut((i + 1) * n);
        let lower = &mut head[i * n..];
        let upper = &mut tail[..n];
        for (zi, zj) in lower.iter_mut().zip(upper.iter_mut()) {
            let f = *zj;
            *zj = s * *zi + c * f;
            *zi = c * *zi - s * f;
        }
    })?;

    let order = ascending_order(&d);
    let mut eigenvalues = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n * n);
    for &m in &order {
        eigenvalues.push(d[m]);
        let row = &rows[m * n..(m + 1) * n];
        let mut pivot = 0;
        for (k, v) in row.iter().enumerate() {
            if v.abs() > row[pivot].abs() {
                pivot = k;
            }
        }
        if row[pivot] < 0.0 {
            vectors.extend(row.iter().map(|v| -v));
        } else {
            vectors.extend_from_slice(row);
        }
    }
    Ok(EigenSystem {
        eigenvalues,
        vectors,
    })
}

/// Eigenvalues of `h` and the eigenvector components on the given 1-based
/// sites.
pub fn diagonalize_sites(h: &Hamiltonian, sites: &[usize]) -> Result<SiteComponents> {
    let n = h.n_sites();
    for &site in sites {
        if site == 0 || site > n {
            return Err(Error::InvalidSite { site, n_sites: n });
        }
    }
    let mut d = h.diagonal().to_vec();
    let mut e = padded_off_diagonal(h);

    // rows[k][m] = <site_k|mode m>; the identity restricted to those sites.
    let mut rows: Vec<Vec<f64>> = sites
        .iter()
        .map(|&site| {
            let mut row = vec![0.0; n];
            row[site - 1] = 1.0;
            row
        })
        .collect();

    implicit_ql(&mut d, &mut e, |i, s, c| {
        for row in rows.iter_mut() {
            let f = row[i + 1];
            row[i + 1] = s * row[i] + c * f;
            row[i] = c * row[i] - s * f;
        }
    })?;

    let order = ascending_order(&d);
    Ok(SiteComponents {
        eigenvalues: order.iter().map(|&m| d[m]).collect(),
        sites: sites.to_vec(),
        rows: rows
            .into_iter()
            .map(|row| order.iter().map(|&m| row[m]).collect())
            .collect(),
    })
}

/// Eigenbasis amplitudes `a_m = <phi_m|psi>`.
pub fn project(state: &StateVector, basis: &EigenSystem) -> Result<Vec<Complex64>> {
    check_len(basis.n(), state.len())?;
    let amps = state.amplitudes();
    Ok(basis
        .eigenvectors()
        .map(|v| v.iter().zip(amps).map(|(&phi, &c)| c * phi).sum())
        .collect())
}

/// Inverse of [`project`]: `sum_m a_m |phi_m>`.
pub fn reconstruct(amplitudes: &[Complex64], basis: &EigenSystem) -> Result<StateVector> {
    let n = basis.n();
    check_len(n, amplitudes.len())?;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (v, &a) in basis.eigenvectors().zip(amplitudes) {
        for (o, &phi) in out.iter_mut().zip(v) {
            *o += a * phi;
        }
    }
    Ok(StateVector::new(out))
}
