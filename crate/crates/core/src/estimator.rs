//! Variance-minimizing unbiased estimates of single entries.
//!
//! Each basis chain `P` gives an unbiased estimate `L_P(b) = sum_e c_{e,P} b_e`
//! of the log-entry. With uncorrelated log-noise of variance `sigma_e`, the
//! covariance of these estimates is the path kernel `Sigma = C^T S C`, and the
//! unbiased combination `X(alpha)` with the least variance is
//! `alpha = Sigma^-1 1 / (1^T Sigma^-1 1)`, with variance `alpha^T Sigma alpha`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask_graph::{CompletionGraph, Entry};
use crate::path_basis::{path_space_basis, PathBasis, PathChain};

/// Relative eigenvalue (or pivot) cutoff below which the kernel is treated as singular.
pub const SINGULAR_TOLERANCE: f64 = 1e-12;

/// Log-domain noise variances `sigma_e = Var(log eps_e)` of the observed entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NoiseSpec {
    /// One variance broadcast to every entry.
    Uniform(f64),
    /// Dense row-major per-entry variances; `None` where undefined.
    PerEntry {
        rows: usize,
        cols: usize,
        sigma: Vec<Option<f64>>,
    },
}

fn check_sigma(entry: Entry, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidSigma { entry, value })
    }
}

impl NoiseSpec {
    pub fn uniform(sigma: f64) -> Result<Self> {
        check_sigma((0, 0), sigma)?;
        Ok(NoiseSpec::Uniform(sigma))
    }

    pub fn per_entry(rows: usize, cols: usize, sigma: Vec<Option<f64>>) -> Result<Self> {
        if sigma.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "expected {} variances, got {}",
                rows * cols,
                sigma.len()
            )));
        }
        for (k, s) in sigma.iter().enumerate() {
            if let Some(&v) = s.as_ref() {
                check_sigma((k / cols, k % cols), v)?;
            }
        }
        Ok(NoiseSpec::PerEntry { rows, cols, sigma })
    }

    pub fn sigma(&self, entry: Entry) -> Result<f64> {
        match self {
            NoiseSpec::Uniform(s) => Ok(*s),
            NoiseSpec::PerEntry { rows, cols, sigma } => {
                let (i, j) = entry;
                if i >= *rows || j >= *cols {
                    return Err(Error::OutOfRange(i, j, *rows, *cols));
                }
                sigma[i * cols + j].ok_or(Error::MissingSigma(entry))
            }
        }
    }
}

/// Observed values of a partially known matrix, dense row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Observations {
    rows: usize,
    cols: usize,
    values: Vec<Option<f64>>,
}

impl Observations {
    pub fn new(rows: usize, cols: usize, values: Vec<Option<f64>>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "expected {} cells, got {}",
                rows * cols,
                values.len()
            )));
        }
        Ok(Observations { rows, cols, values })
    }

    /// Observations of `f(entry)` on every known entry of the graph.
    pub fn on_graph(graph: &CompletionGraph, mut f: impl FnMut(Entry) -> f64) -> Self {
        let (rows, cols) = (graph.rows(), graph.cols());
        let mut values = vec![None; rows * cols];
        for &(i, j) in graph.edges() {
            values[i * cols + j] = Some(f((i, j)));
        }
        Observations { rows, cols, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, (i, j): Entry) -> Option<f64> {
        if i < self.rows && j < self.cols {
            self.values[i * self.cols + j]
        } else {
            None
        }
    }

    /// `(log |B_e|, B_e < 0)`.
    pub fn log_abs(&self, entry: Entry) -> Result<(f64, bool)> {
        let v = self.get(entry).ok_or(Error::MissingObservation(entry))?;
        if !v.is_finite() {
            return Err(Error::NonFiniteObservation(entry));
        }
        if v == 0.0 {
            return Err(Error::ZeroObservation(entry));
        }
        Ok((v.abs().ln(), v < 0.0))
    }
}

/// The path-kernel Gram matrix of a basis.
#[derive(Debug, Clone)]
pub struct PathKernel {
    pub basis: PathBasis,
    pub matrix: DMatrix<f64>,
}

impl PathKernel {
    /// Smallest eigenvalue below [`SINGULAR_TOLERANCE`] times the largest.
    pub fn is_degenerate(&self) -> bool {
        if self.matrix.is_empty() {
            return true;
        }
        let eig = SymmetricEigen::new(self.matrix.clone());
        let max = eig.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
        let min = eig.eigenvalues.iter().fold(f64::INFINITY, |m, &l| m.min(l));
        max == 0.0 || min <= SINGULAR_TOLERANCE * max
    }
}

/// `Sigma = C^T S C`, entry `(P, Q) = sum_e c_{e,P} c_{e,Q} sigma_e`.
pub fn path_kernel(basis: PathBasis, noise: &NoiseSpec) -> Result<PathKernel> {
    let sigma: Vec<(Entry, f64)> = basis
        .support()
        .into_iter()
        .map(|e| noise.sigma(e).map(|s| (e, s)))
        .collect::<Result<_>>()?;
    for &(e, s) in &sigma {
        check_sigma(e, s)?;
    }
    let p = basis.len();
    // dense C is support x p; the support is sorted, so rows are found by bisection
    let mut sc = DMatrix::<f64>::zeros(sigma.len(), p);
    let mut c = DMatrix::<f64>::zeros(sigma.len(), p);
    for (col, chain) in basis.chains.iter().enumerate() {
        for &(e, coeff) in chain.terms() {
            let row = sigma
                .binary_search_by_key(&e, |&(x, _)| x)
                .expect("support covers every chain");
            c[(row, col)] = coeff as f64;
            sc[(row, col)] = coeff as f64 * sigma[row].1;
        }
    }
    let matrix = c.tr_mul(&sc);
    // round-off can break exact symmetry; mirror the upper triangle
    let matrix = DMatrix::from_fn(p, p, |a, b| {
        if a <= b {
            matrix[(a, b)]
        } else {
            matrix[(b, a)]
        }
    });
    Ok(PathKernel { basis, matrix })
}

/// Kernel, optimal weights and the variance they achieve for one target entry.
#[derive(Debug, Clone)]
pub struct KernelSystem {
    pub basis: PathBasis,
    pub sigma: DMatrix<f64>,
    pub alpha: DVector<f64>,
    pub variance: f64,
    /// The kernel was singular and the pseudo-inverse route was taken.
    pub degenerate: bool,
}

/// Minimizes `alpha^T Sigma alpha` subject to `1^T alpha = 1`.
///
/// A positive-definite kernel is solved by Cholesky. A singular one is split
/// by its eigendecomposition: if the ones vector has a component in the null
/// space, that component is a zero-variance estimator and is returned
/// (variance exactly 0); otherwise the Moore-Penrose solution is used.
pub fn optimal_alpha(kernel: PathKernel) -> Result<KernelSystem> {
    let PathKernel { basis, matrix } = kernel;
    let p = basis.len();
    if p == 0 {
        return Err(Error::NotReconstructible(basis.target));
    }
    let ones = DVector::from_element(p, 1.0);
    let scale = matrix
        .diagonal()
        .iter()
        .fold(0.0f64, |m, &d| m.max(d.abs()));

    if scale > 0.0 {
        if let Some(chol) = matrix.clone().cholesky() {
            let l = chol.l_dirty();
            let min_pivot = (0..p)
                .map(|k| l[(k, k)] * l[(k, k)])
                .fold(f64::INFINITY, f64::min);
            if min_pivot > SINGULAR_TOLERANCE * scale {
                let y = chol.solve(&ones);
                let alpha = &y / y.sum();
                let variance = alpha.dot(&(&matrix * &alpha)).max(0.0);
                return Ok(KernelSystem {
                    basis,
                    sigma: matrix,
                    alpha,
                    variance,
                    degenerate: false,
                });
            }
        }
    }

    let eig = SymmetricEigen::new(matrix.clone());
    let max = eig.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    let tol = SINGULAR_TOLERANCE * max;
    let mut null_part = DVector::zeros(p);
    let mut pinv_part = DVector::zeros(p);
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        let q = eig.eigenvectors.column(k);
        let w = q.dot(&ones);
        if max == 0.0 || lambda <= tol {
            null_part += q * w;
        } else {
            pinv_part += q * (w / lambda);
        }
    }
    let null_mass = null_part.sum();
    let (alpha, variance) = if null_mass > SINGULAR_TOLERANCE * p as f64 {
        (null_part / null_mass, 0.0)
    } else {
        let alpha = &pinv_part / pinv_part.sum();
        let v = alpha.dot(&(&matrix * &alpha)).max(0.0);
        (alpha, v)
    };
    Ok(KernelSystem {
        basis,
        sigma: matrix,
        alpha,
        variance,
        degenerate: true,
    })
}

/// Basis, kernel and optimal weights for `entry`.
///
/// Fails with [`Error::NotReconstructible`] when the entry is outside the
/// closure of the mask.
pub fn kernel_system(
    graph: &CompletionGraph,
    entry: Entry,
    noise: &NoiseSpec,
) -> Result<KernelSystem> {
    let basis = path_space_basis(graph, entry)?;
    optimal_alpha(path_kernel(basis, noise)?)
}

impl KernelSystem {
    pub fn target(&self) -> Entry {
        self.basis.target
    }

    /// The estimator as one weight per edge: `C alpha`.
    pub fn edge_weights(&self) -> Vec<(Entry, f64)> {
        let mut weights: Vec<(Entry, f64)> = Vec::new();
        for (chain, &a) in self.basis.chains.iter().zip(self.alpha.iter()) {
            for &(e, c) in chain.terms() {
                weights.push((e, a * c as f64));
            }
        }
        weights.sort_by_key(|&(e, _)| e);
        let mut merged: Vec<(Entry, f64)> = Vec::with_capacity(weights.len());
        for (e, w) in weights {
            match merged.last_mut() {
                Some((last, acc)) if *last == e => *acc += w,
                _ => merged.push((e, w)),
            }
        }
        merged
    }

    /// `b^T C alpha` with `b = log |B|`.
    pub fn log_magnitude(&self, obs: &Observations) -> Result<f64> {
        let mut total = 0.0;
        for (chain, &a) in self.basis.chains.iter().zip(self.alpha.iter()) {
            let mut lp = 0.0;
            for &(e, c) in chain.terms() {
                lp += c as f64 * obs.log_abs(e)?.0;
            }
            total += a * lp;
        }
        Ok(total)
    }

    /// Per-chain sign: parity of negative observations, counted with `|c_e|` multiplicity.
    fn chain_negative(chain: &PathChain, obs: &Observations) -> Result<bool> {
        let mut odd = false;
        for &(e, c) in chain.terms() {
            if obs.log_abs(e)?.1 && c % 2 != 0 {
                odd = !odd;
            }
        }
        Ok(odd)
    }

    /// Evaluates the estimator on observed data.
    pub fn estimate(&self, obs: &Observations) -> Result<EntryEstimate> {
        let log_abs = self.log_magnitude(obs)?;
        let signs: Vec<bool> = self
            .basis
            .chains
            .iter()
            .map(|c| Self::chain_negative(c, obs))
            .collect::<Result<_>>()?;
        // the lowest-variance single chain decides when chains disagree
        let best = (0..signs.len())
            .min_by(|&a, &b| self.sigma[(a, a)].total_cmp(&self.sigma[(b, b)]))
            .expect("non-empty basis");
        let negative = signs[best];
        let sign_conflict = signs.iter().any(|&s| s != negative);
        let magnitude = log_abs.exp();
        let value = if negative { -magnitude } else { magnitude };
        let mut est = EntryEstimate {
            entry: self.target(),
            reconstructible: true,
            value: Some(value),
            log_variance: self.variance,
            conf_low: None,
            conf_high: None,
            basis_size: self.basis.len(),
            degenerate: self.degenerate,
            sign_conflict,
        };
        if let Some((lo, hi)) = confidence_interval(&est) {
            est.conf_low = Some(lo);
            est.conf_high = Some(hi);
        }
        Ok(est)
    }
}

/// Reconstructed value, log-domain variance and multiplicative confidence interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryEstimate {
    pub entry: Entry,
    pub reconstructible: bool,
    pub value: Option<f64>,
    /// `+inf` when not reconstructible.
    pub log_variance: f64,
    pub conf_low: Option<f64>,
    pub conf_high: Option<f64>,
    pub basis_size: usize,
    pub degenerate: bool,
    pub sign_conflict: bool,
}

impl EntryEstimate {
    pub fn not_reconstructible(entry: Entry) -> Self {
        EntryEstimate {
            entry,
            reconstructible: false,
            value: None,
            log_variance: f64::INFINITY,
            conf_low: None,
            conf_high: None,
            basis_size: 0,
            degenerate: false,
            sign_conflict: false,
        }
    }
}

/// Variance-minimizing estimate of `entry`, known or unknown.
pub fn estimate_entry(
    graph: &CompletionGraph,
    obs: &Observations,
    entry: Entry,
    noise: &NoiseSpec,
) -> Result<EntryEstimate> {
    match kernel_system(graph, entry, noise) {
        Ok(system) => system.estimate(obs),
        Err(Error::NotReconstructible(e)) => Ok(EntryEstimate::not_reconstructible(e)),
        Err(e) => Err(e),
    }
}

/// Minimum variance of any unbiased estimate of `log |A_ij|`; needs no observations.
pub fn variance_bound(graph: &CompletionGraph, entry: Entry, noise: &NoiseSpec) -> Result<f64> {
    match kernel_system(graph, entry, noise) {
        Ok(system) => Ok(system.variance),
        Err(Error::NotReconstructible(_)) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// `|A| exp(-sqrt(v)) .. |A| exp(sqrt(v))` with the sign applied, ordered low to high.
///
/// `None` means the interval is unbounded.
pub fn confidence_interval(est: &EntryEstimate) -> Option<(f64, f64)> {
    let value = est.value?;
    if !est.log_variance.is_finite() {
        return None;
    }
    let spread = est.log_variance.sqrt();
    let (a, b) = (value * (-spread).exp(), value * spread.exp());
    Some(if a <= b { (a, b) } else { (b, a) })
}
