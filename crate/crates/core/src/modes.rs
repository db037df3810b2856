//! Multi-mode channel structure: the unitary transition matrix, its block
//! partition, reduction to parallel single-mode channels, and the
//! moment-level bookkeeping of the degraded beam-splitter cascade.

use num_complex::Complex64;
use serde::Serialize;

use crate::eigen::hermitian_eigen;
use crate::entropy::Transmissivity;
use crate::error::{domain, Error, Result};
use crate::matrix::ComplexMatrix;

/// Default tolerance for `|t^H t - I|_F`.
pub const UNITARITY_TOL: f64 = 1e-10;
/// Tolerance for `|t_ab^H t_ab + t_ae^H t_ae - I|_F`.
pub const PARTITION_TOL: f64 = 1e-10;
/// Eigenvalues within this distance outside `[0, 1]` are clamped.
pub const CLAMP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitarityCheck {
    pub residual: f64,
    pub pass: bool,
}

/// `|t^H t - I|_F`, passing when it is at most `tol`.
pub fn validate_unitary(t: &ComplexMatrix, tol: f64) -> Result<UnitarityCheck> {
    if !t.is_square() {
        return Err(Error::NotSquare { rows: t.rows(), cols: t.cols() });
    }
    let residual = (&t.gram() - &ComplexMatrix::identity(t.rows())).frobenius_norm();
    Ok(UnitarityCheck { residual, pass: residual <= tol })
}

/// A `(k+l) x (k+l)` unitary mapping Alice's `m` modes plus `k+l-m` vacuum
/// modes onto Bob's `k` and Eve's `l` modes:
///
/// ```text
/// [ b ]   [ t_ab  t_vb ] [ a ]
/// [ e ] = [ t_ae  t_ve ] [ v ]
/// ```
#[derive(Debug, Clone)]
pub struct UnitaryTransition {
    t: ComplexMatrix,
    m: usize,
    k: usize,
    l: usize,
}

impl UnitaryTransition {
    pub fn new(t: ComplexMatrix, m: usize, k: usize, l: usize) -> Result<Self> {
        Self::with_tolerance(t, m, k, l, UNITARITY_TOL)
    }

    pub fn with_tolerance(t: ComplexMatrix, m: usize, k: usize, l: usize, tol: f64) -> Result<Self> {
        if m == 0 || k == 0 || l == 0 {
            return Err(Error::DimensionMismatch("m, k and l must be positive".into()));
        }
        if m > k + l {
            return Err(Error::DimensionMismatch(format!(
                "m = {m} input modes exceed k + l = {} output modes",
                k + l
            )));
        }
        if t.rows() != k + l || t.cols() != k + l {
            return Err(Error::DimensionMismatch(format!(
                "transition matrix is {}x{}, expected {n}x{n} for k = {k}, l = {l}",
                t.rows(),
                t.cols(),
                n = k + l
            )));
        }
        let check = validate_unitary(&t, tol)?;
        if !check.pass {
            return Err(Error::NotUnitary { residual: check.residual, tol });
        }
        Ok(Self { t, m, k, l })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.t
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.m, self.k, self.l)
    }

    /// Alice to Bob, `k x m`.
    pub fn t_ab(&self) -> ComplexMatrix {
        self.t.block(0, 0, self.k, self.m).expect("partition checked")
    }

    /// Vacuum to Bob, `k x (k+l-m)`; `None` when `m = k + l`.
    pub fn t_vb(&self) -> Option<ComplexMatrix> {
        let extra = self.k + self.l - self.m;
        (extra > 0).then(|| self.t.block(0, self.m, self.k, extra).expect("partition checked"))
    }

    /// Alice to Eve, `l x m`.
    pub fn t_ae(&self) -> ComplexMatrix {
        self.t.block(self.k, 0, self.l, self.m).expect("partition checked")
    }

    /// Vacuum to Eve, `l x (k+l-m)`; `None` when `m = k + l`.
    pub fn t_ve(&self) -> Option<ComplexMatrix> {
        let extra = self.k + self.l - self.m;
        (extra > 0).then(|| self.t.block(self.k, self.m, self.l, extra).expect("partition checked"))
    }
}

/// Transmissivities of the equivalent parallel single-mode channels, descending.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ModeSpectrum {
    etas: Vec<f64>,
}

impl ModeSpectrum {
    /// From user-supplied transmissivities; each must lie in `[0, 1]`.
    pub fn new(mut etas: Vec<f64>) -> Result<Self> {
        if etas.is_empty() {
            return Err(domain("spectrum needs at least one mode"));
        }
        for &eta in &etas {
            Transmissivity::new(eta)?;
        }
        etas.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { etas })
    }

    /// From computed eigenvalues, clamping values within `tol` of `[0, 1]`.
    pub fn from_eigenvalues(values: &[f64], tol: f64) -> Result<Self> {
        let etas = values
            .iter()
            .map(|&x| {
                if x.is_nan() || x < -tol || x > 1.0 + tol {
                    Err(Error::EigenvalueOutOfRange { value: x })
                } else {
                    Ok(x.clamp(0.0, 1.0))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(etas)
    }

    pub fn etas(&self) -> &[f64] {
        &self.etas
    }

    pub fn len(&self) -> usize {
        self.etas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.etas.is_empty()
    }

    /// Largest transmissivity.
    pub fn max(&self) -> f64 {
        self.etas[0]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Decomposition {
    pub spectrum: ModeSpectrum,
    /// `|t_ab^H t_ab + t_ae^H t_ae - I|_F`.
    pub partition_residual: f64,
}

/// Reduce a multi-mode channel to parallel single-mode channels with
/// transmissivities equal to the eigenvalues of `t_ab^H t_ab`.
pub fn mode_decompose(u: &UnitaryTransition) -> Result<Decomposition> {
    let bob = u.t_ab().gram();
    let eve = u.t_ae().gram();
    let m = bob.rows();
    let sum = ComplexMatrix::from_fn(m, m, |i, j| bob[(i, j)] + eve[(i, j)]);
    let partition_residual = (&sum - &ComplexMatrix::identity(m)).frobenius_norm();
    if partition_residual > PARTITION_TOL {
        return Err(Error::PartitionResidual { residual: partition_residual });
    }
    let eig = hermitian_eigen(&bob)?;
    Ok(Decomposition {
        spectrum: ModeSpectrum::from_eigenvalues(&eig.values, CLAMP_TOL)?,
        partition_residual,
    })
}

/// The 2x2 beam splitter `[[sqrt(eta), sqrt(1-eta)], [sqrt(1-eta), -sqrt(eta)]]`.
pub fn beam_splitter(eta: Transmissivity) -> ComplexMatrix {
    let (s, c) = (eta.get().sqrt(), (1.0 - eta.get()).sqrt());
    ComplexMatrix::from_real(2, 2, &[s, c, c, -s]).expect("2x2")
}

/// Transmissivity `(1 - eta) / eta` of the splitter that turns Bob's output
/// into a copy of Eve's.
pub fn degraded_splitter(eta: Transmissivity) -> Result<Transmissivity> {
    if !eta.is_positive_rate() {
        return Err(domain(format!(
            "the degraded cascade needs eta > 1/2, got {}",
            eta.get()
        )));
    }
    Transmissivity::new((1.0 - eta.get()) / eta.get())
}

/// Input to the cascade: a mean photon number, or a coherent state whose
/// mean photon number is `|alpha|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CascadeInput {
    Photons(f64),
    Coherent(Complex64),
}

/// First and second moments through the two-splitter cascade
/// `a -> (b, e)`, then `b -> (e', c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CascadeMoments {
    pub n_a: f64,
    pub n_b: f64,
    pub n_e: f64,
    pub n_c: f64,
    pub n_e_prime: f64,
    /// Mean fields, present for coherent-state input.
    pub mean_b: Option<Complex64>,
    pub mean_e: Option<Complex64>,
    pub mean_c: Option<Complex64>,
    pub mean_e_prime: Option<Complex64>,
}

pub fn cascade_moments(eta: Transmissivity, input: CascadeInput) -> Result<CascadeMoments> {
    let eta_prime = degraded_splitter(eta)?.get();
    let eta = eta.get();
    let (n_a, alpha) = match input {
        CascadeInput::Photons(n) => {
            if !n.is_finite() || n < 0.0 {
                return Err(domain(format!("mean photon number must be >= 0, got {n}")));
            }
            (n, None)
        }
        CascadeInput::Coherent(alpha) => {
            if !alpha.re.is_finite() || !alpha.im.is_finite() {
                return Err(domain("coherent amplitude must be finite"));
            }
            (alpha.norm_sqr(), Some(alpha))
        }
    };

    // Vacuum ancillas contribute nothing to the photon numbers. Forming the
    // split outputs by subtraction keeps conservation exact: n_a - n_b is
    // exact because n_b >= n_a / 2, and n_b - n_e = 2 n_b - n_a is exact
    // for the same reason.
    let n_b = eta * n_a;
    let n_e = n_a - n_b;
    let n_e_prime = n_e;
    let n_c = n_b - n_e_prime;

    let mean_b = alpha.map(|a| a * eta.sqrt());
    let mean_e = alpha.map(|a| a * (1.0 - eta).sqrt());
    let mean_e_prime = mean_b.map(|b| b * eta_prime.sqrt());
    let mean_c = mean_b.map(|b| b * (1.0 - eta_prime).sqrt());

    Ok(CascadeMoments {
        n_a,
        n_b,
        n_e,
        n_c,
        n_e_prime,
        mean_b,
        mean_e,
        mean_c,
        mean_e_prime,
    })
}
