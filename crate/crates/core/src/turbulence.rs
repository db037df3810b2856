//! Random-channel ensembles and lower bounds from second moments.
//!
//! For a random Alice-to-Bob block `T`, the coherent-scenario rate satisfies
//!
//! ```text
//! E[L^M(eig(T^H T))] >= E[L^M(diag(T^H T))] >= L^M(diag(E[T^H T]))
//! ```
//!
//! by Schur-convexity and then convexity of `L^M`. Since the spectrum is
//! basis-independent, the last term may be taken in the eigenbasis of
//! `E[T^H T]`, which gives the largest bound of this form.
//!
//! The shipped ensembles are synthetic stand-ins; physical turbulence models
//! can be plugged in through [`ChannelSampler`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocation::{multi_mode_bound, BoundKind};
use crate::eigen::hermitian_eigen;
use crate::entropy::{BoundValue, PhotonBudget};
use crate::error::{domain, Error, Result};
use crate::haar::haar_unitary_with;
use crate::matrix::{ComplexMatrix, MatrixFile};
use crate::modes::{ModeSpectrum, CLAMP_TOL};
use crate::stats::{MonteCarloEstimate, RunningStats};

/// Clamping tolerance for spectra of estimated second-moment matrices.
pub const SECOND_MOMENT_TOL: f64 = 1e-8;
/// Slack allowed in the per-sample Schur comparison.
pub const SCHUR_SLACK: f64 = 1e-9;
const CHUNK: u64 = 1024;

/// Source of channel realizations `T_ab` (each `k x m`, a contraction).
///
/// Implementations must be deterministic in `index` so that estimates do not
/// depend on evaluation order.
pub trait ChannelSampler: Sync {
    /// Number of input modes `m`.
    fn modes(&self) -> usize;

    fn sample(&self, index: u64) -> Result<ComplexMatrix>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Conjugation {
    #[default]
    Haar,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum EnsembleKind {
    /// Top-left `k x m` block of an `n x n` Haar unitary.
    HaarSubblock { n: usize, m: usize, k: usize },
    /// `W diag(sqrt(eta)) V^H` with `eta_i = base_i + jitter (u_i - base_i)`,
    /// `u_i` uniform on `[0, 1)`, and `W`, `V` Haar (or identity).
    RandomizedSpectrum {
        base_etas: Vec<f64>,
        #[serde(default)]
        conjugation: Conjugation,
        #[serde(default)]
        jitter: f64,
    },
    /// The same `t_ab` every time.
    Deterministic { t_ab: ComplexMatrix },
}

/// JSON: `{"kind": "...", "params": {...}, "seed": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    #[serde(flatten)]
    pub kind: EnsembleKind,
    #[serde(default)]
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, seed: u64) -> Result<Self> {
        let spec = Self { kind, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            EnsembleKind::HaarSubblock { n, m, k } => {
                if *n == 0 || *m == 0 || *k == 0 || m > n || k > n {
                    return Err(Error::DimensionMismatch(format!(
                        "haar_subblock needs 1 <= m, k <= n, got n = {n}, m = {m}, k = {k}"
                    )));
                }
            }
            EnsembleKind::RandomizedSpectrum { base_etas, jitter, .. } => {
                ModeSpectrum::new(base_etas.clone())?;
                if !(0.0..=1.0).contains(jitter) {
                    return Err(domain(format!("jitter must lie in [0, 1], got {jitter}")));
                }
            }
            EnsembleKind::Deterministic { t_ab } => {
                let eig = hermitian_eigen(&t_ab.gram())?;
                if eig.values[0] > 1.0 + CLAMP_TOL {
                    return Err(domain(format!(
                        "t_ab is not a contraction: largest eigenvalue of t_ab^H t_ab is {}",
                        eig.values[0]
                    )));
                }
            }
        }
        Ok(())
    }

    fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

impl ChannelSampler for EnsembleSpec {
    fn modes(&self) -> usize {
        match &self.kind {
            EnsembleKind::HaarSubblock { m, .. } => *m,
            EnsembleKind::RandomizedSpectrum { base_etas, .. } => base_etas.len(),
            EnsembleKind::Deterministic { t_ab } => t_ab.cols(),
        }
    }

    fn sample(&self, index: u64) -> Result<ComplexMatrix> {
        match &self.kind {
            EnsembleKind::HaarSubblock { n, m, k } => {
                let u = haar_unitary_with(*n, &mut self.rng(index));
                u.block(0, 0, *k, *m)
            }
            EnsembleKind::RandomizedSpectrum { base_etas, conjugation, jitter } => {
                let mut rng = self.rng(index);
                let roots: Vec<f64> = base_etas
                    .iter()
                    .map(|&b| {
                        let u: f64 = rng.random();
                        (b + jitter * (u - b)).sqrt()
                    })
                    .collect();
                let d = ComplexMatrix::diag_real(&roots);
                match conjugation {
                    Conjugation::None => Ok(d),
                    Conjugation::Haar => {
                        let w = haar_unitary_with(roots.len(), &mut rng);
                        let v = haar_unitary_with(roots.len(), &mut rng);
                        (&w * &d).matmul(&v.adjoint())
                    }
                }
            }
            EnsembleKind::Deterministic { t_ab } => Ok(t_ab.clone()),
        }
    }
}

/// Realization `index` of the ensemble.
pub fn sample_channel(spec: &EnsembleSpec, index: u64) -> Result<ComplexMatrix> {
    spec.validate()?;
    spec.sample(index)
}

/// Transmissivities of one realization: eigenvalues of `T^H T`.
pub fn sample_spectrum(t_ab: &ComplexMatrix) -> Result<ModeSpectrum> {
    let eig = hermitian_eigen(&t_ab.gram())?;
    ModeSpectrum::from_eigenvalues(&eig.values, CLAMP_TOL)
}

/// Estimate of `E[T^H T]`.
#[derive(Debug, Clone)]
pub struct SecondMomentMatrix {
    pub matrix: ComplexMatrix,
    pub n_samples: u64,
    /// Largest per-entry standard error.
    pub standard_error: f64,
    /// Per-entry standard errors, row-major.
    pub entry_std_errors: Vec<f64>,
}

impl SecondMomentMatrix {
    /// Wrap a known second-moment matrix (no sampling error).
    pub fn exact(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare { rows: matrix.rows(), cols: matrix.cols() });
        }
        hermitian_eigen(&matrix)?;
        let n = matrix.rows() * matrix.cols();
        Ok(Self { matrix, n_samples: 0, standard_error: 0.0, entry_std_errors: vec![0.0; n] })
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(hermitian_eigen(&self.matrix)?.values)
    }
}

/// Entrywise Welford accumulator over Gram matrices.
struct MomentAccumulator {
    m: usize,
    re: Vec<RunningStats>,
    im: Vec<RunningStats>,
}

impl MomentAccumulator {
    fn new(m: usize) -> Self {
        Self { m, re: vec![RunningStats::new(); m * m], im: vec![RunningStats::new(); m * m] }
    }

    fn push(&mut self, gram: &ComplexMatrix) {
        for (k, z) in gram.as_slice().iter().enumerate() {
            self.re[k].push(z.re);
            self.im[k].push(z.im);
        }
    }

    fn finish(&self) -> SecondMomentMatrix {
        let m = self.m;
        let raw = ComplexMatrix::from_fn(m, m, |i, j| {
            num_complex::Complex64::new(self.re[i * m + j].mean(), self.im[i * m + j].mean())
        });
        let matrix = ComplexMatrix::from_fn(m, m, |i, j| (raw[(i, j)] + raw[(j, i)].conj()) * 0.5);
        let entry_std_errors: Vec<f64> = self
            .re
            .iter()
            .zip(&self.im)
            .map(|(r, i)| r.std_error().hypot(i.std_error()))
            .collect();
        SecondMomentMatrix {
            matrix,
            n_samples: self.re.first().map_or(0, RunningStats::count),
            standard_error: entry_std_errors.iter().copied().fold(0.0, f64::max),
            entry_std_errors,
        }
    }
}

/// Per-sample quantities, reduced in index order.
struct SampleOutcome {
    gram: ComplexMatrix,
    eigen_rate: f64,
    diagonal_rate: f64,
}

fn evaluate_sample<S: ChannelSampler + ?Sized>(
    sampler: &S,
    index: u64,
    nbar: Option<PhotonBudget>,
) -> Result<SampleOutcome> {
    let t = sampler.sample(index)?;
    if t.cols() != sampler.modes() {
        return Err(Error::DimensionMismatch(format!(
            "sample has {} columns, ensemble declares {} modes",
            t.cols(),
            sampler.modes()
        )));
    }
    let gram = t.gram();
    let (eigen_rate, diagonal_rate) = match nbar {
        None => (0.0, 0.0),
        Some(nbar) => {
            let eig = hermitian_eigen(&gram)?;
            let spectrum = ModeSpectrum::from_eigenvalues(&eig.values, CLAMP_TOL)?;
            let diag: Vec<f64> = gram.diagonal().iter().map(|z| z.re).collect();
            let diag = ModeSpectrum::from_eigenvalues(&diag, CLAMP_TOL)?;
            (
                multi_mode_bound(&spectrum, nbar, BoundKind::Lower)?.nats(),
                multi_mode_bound(&diag, nbar, BoundKind::Lower)?.nats(),
            )
        }
    };
    Ok(SampleOutcome { gram, eigen_rate, diagonal_rate })
}

/// Evaluate samples `0..n` in parallel chunks and feed them to `sink` in index order.
fn for_each_sample<S: ChannelSampler + ?Sized>(
    sampler: &S,
    n: u64,
    nbar: Option<PhotonBudget>,
    mut sink: impl FnMut(SampleOutcome),
) -> Result<()> {
    let mut start = 0;
    while start < n {
        let end = (start + CHUNK).min(n);
        let chunk: Vec<Result<SampleOutcome>> = (start..end)
            .into_par_iter()
            .map(|i| {
                evaluate_sample(sampler, i, nbar)
                    .map_err(|e| Error::Sample { index: i, source: Box::new(e) })
            })
            .collect();
        for outcome in chunk {
            sink(outcome?);
        }
        start = end;
    }
    Ok(())
}

/// Streaming estimate of `E[T^H T]` over `n_samples` realizations.
pub fn second_moment<S: ChannelSampler + ?Sized>(sampler: &S, n_samples: u64) -> Result<SecondMomentMatrix> {
    if n_samples < 2 {
        return Err(domain("second-moment estimation needs at least 2 samples"));
    }
    let mut acc = MomentAccumulator::new(sampler.modes());
    for_each_sample(sampler, n_samples, None, |s| acc.push(&s.gram))?;
    Ok(acc.finish())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    /// Diagonal entries of the second-moment matrix as given.
    Diagonal,
    /// Eigenvalues of the second-moment matrix (the tightest basis).
    #[default]
    Eigen,
}

/// `L^M(mu, nbar)` with `mu` read off the second-moment matrix in `basis`.
pub fn turbulence_lower_bound(mu: &SecondMomentMatrix, nbar: PhotonBudget, basis: Basis) -> Result<BoundValue> {
    let values = match basis {
        Basis::Diagonal => mu.diagonal(),
        Basis::Eigen => mu.eigenvalues()?,
    };
    let spectrum = ModeSpectrum::from_eigenvalues(&values, SECOND_MOMENT_TOL)?;
    multi_mode_bound(&spectrum, nbar, BoundKind::Lower)
}

/// Monte Carlo estimate of `E[L^M(H, nbar)]`, reallocating the budget per realization.
pub fn monte_carlo_lower<S: ChannelSampler + ?Sized>(
    sampler: &S,
    nbar: PhotonBudget,
    n_samples: u64,
) -> Result<MonteCarloEstimate> {
    if n_samples < 30 {
        return Err(domain(format!("Monte Carlo needs at least 30 samples, got {n_samples}")));
    }
    let mut stats = RunningStats::new();
    for_each_sample(sampler, n_samples, Some(nbar), |s| stats.push(s.eigen_rate))?;
    Ok(MonteCarloEstimate::from(&stats))
}

/// Everything on the lower-bound chain, computed from one set of samples.
#[derive(Debug, Clone, Serialize)]
pub struct TurbulenceReport {
    pub units: &'static str,
    pub nbar: f64,
    /// `E[L^M(eig(T^H T))]`.
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub confidence_95: (f64, f64),
    /// `E[L^M(diag(T^H T))]`.
    pub mean_diagonal: f64,
    pub std_error_diagonal: f64,
    /// `L^M` over the diagonal of the estimated `E[T^H T]`.
    pub bound_diagonal: f64,
    /// `L^M` over the eigenvalues of the estimated `E[T^H T]`.
    pub bound_eigen: f64,
    pub second_moment: MatrixFile,
    pub second_moment_std_error: f64,
    /// Samples where `L^M(eig) < L^M(diag) - 1e-9`.
    pub schur_violations: u64,
    /// `mean + 3 std_error >= bound_eigen >= bound_diagonal`.
    pub chain_holds: bool,
}

impl TurbulenceReport {
    pub fn estimate(&self) -> MonteCarloEstimate {
        MonteCarloEstimate {
            mean: self.mean,
            std_error: self.std_error,
            n_samples: self.n_samples,
            confidence_95: self.confidence_95,
        }
    }
}

pub fn analyze<S: ChannelSampler + ?Sized>(sampler: &S, nbar: PhotonBudget, n_samples: u64) -> Result<TurbulenceReport> {
    if n_samples < 30 {
        return Err(domain(format!("Monte Carlo needs at least 30 samples, got {n_samples}")));
    }
    let mut moments = MomentAccumulator::new(sampler.modes());
    let mut eigen = RunningStats::new();
    let mut diagonal = RunningStats::new();
    let mut schur_violations = 0;
    for_each_sample(sampler, n_samples, Some(nbar), |s| {
        moments.push(&s.gram);
        eigen.push(s.eigen_rate);
        diagonal.push(s.diagonal_rate);
        if s.eigen_rate < s.diagonal_rate - SCHUR_SLACK {
            schur_violations += 1;
        }
    })?;
    let mu = moments.finish();
    let bound_diagonal = turbulence_lower_bound(&mu, nbar, Basis::Diagonal)?.nats();
    let bound_eigen = turbulence_lower_bound(&mu, nbar, Basis::Eigen)?.nats();
    let est = MonteCarloEstimate::from(&eigen);
    Ok(TurbulenceReport {
        units: "nats",
        nbar: nbar.get(),
        mean: est.mean,
        std_error: est.std_error,
        n_samples: est.n_samples,
        confidence_95: est.confidence_95,
        mean_diagonal: diagonal.mean(),
        std_error_diagonal: diagonal.std_error(),
        bound_diagonal,
        bound_eigen,
        chain_holds: est.mean + 3.0 * est.std_error >= bound_eigen
            && bound_eigen >= bound_diagonal - SCHUR_SLACK,
        second_moment: mu.matrix.to_file(),
        second_moment_std_error: mu.standard_error,
        schur_violations,
    })
}

/// Whether `a` majorizes `b`: equal totals (to 1e-10) and every descending
/// prefix sum of `a` at least that of `b`.
pub fn majorizes(a: &[f64], b: &[f64]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "majorization needs equal lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    const TOL: f64 = 1e-10;
    let sorted = |v: &[f64]| {
        let mut v = v.to_vec();
        v.sort_by(|x, y| y.total_cmp(x));
        v
    };
    let (a, b) = (sorted(a), sorted(b));
    let (mut pa, mut pb) = (0.0, 0.0);
    for (x, y) in a.iter().zip(&b) {
        pa += x;
        pb += y;
        if pa < pb - TOL {
            return Ok(false);
        }
    }
    Ok((pa - pb).abs() <= TOL)
}
