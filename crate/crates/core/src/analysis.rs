//! Approximation-property diagnostics for transfer operators.
//!
//! For a nonsingular nonsymmetric A, the SVD A = U S V^T defines Q = V U^T,
//! and QA = sqrt(A^T A), AQ = sqrt(A A^T) are SPD surrogates in which
//! classical two-grid approximation properties can be measured. The
//! fractional approximation property FAP(beta, eta) of a transfer operator T
//! against an SPD matrix M asks how well range(T) captures vectors relative
//! to their M-smoothness; the weak and strong properties are FAP(1/2, 0) and
//! FAP(1, 1). Everything here is dense and meant for desk-scale studies.

use crate::error::{AmgError, Result};
use crate::linalg::{svd, sym_eig, DenseMatrix, LuFactors, SvdResult};
use crate::rng::Lcg64;
use crate::sparse::SparseMatrix;
use serde::{Deserialize, Serialize};

/// Hard cap on the dense analysis size.
pub const ANALYSIS_CAP: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// T = R^T analyzed against AQ (left singular vectors).
    Left,
    /// T = P analyzed against QA (right singular vectors).
    Right,
}

/// SPD surrogates of a nonsymmetric matrix.
#[derive(Debug, Clone)]
pub struct SpdSurrogate {
    pub qa: DenseMatrix,
    pub aq: DenseMatrix,
    pub svd: SvdResult,
}

/// Per-vector and worst-case approximation constants for one (beta, eta).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApproxPropertyResult {
    pub beta: f64,
    pub eta: f64,
    /// One constant per singular vector, in ascending singular-value order.
    pub per_vector_constants: Vec<f64>,
    pub k_max: f64,
    pub singular_values: Vec<f64>,
    pub side: Side,
}

/// Computes Q = V U^T and the symmetrized products QA = sqrt(A^T A) and
/// AQ = sqrt(A A^T). Fails when A is numerically singular.
pub fn build_spd_surrogate(a: &SparseMatrix) -> Result<SpdSurrogate> {
    let n = a.n_rows();
    if n != a.n_cols() {
        return Err(AmgError::DimensionMismatch {
            context: "surrogate requires a square matrix",
            expected: n,
            got: a.n_cols(),
        });
    }
    if n > ANALYSIS_CAP {
        return Err(AmgError::AnalysisTooLarge {
            n,
            cap: ANALYSIS_CAP,
        });
    }
    let ad = a.to_dense();
    let dec = svd(&ad)?;
    let ratio = dec.sigma_min() / dec.sigma_max();
    if !(ratio > 1e-12) {
        return Err(AmgError::NearSingular(ratio));
    }
    let q = dec.v.matmul(&dec.u.transpose());
    let qa = q.matmul(&ad).symmetrized();
    let aq = ad.matmul(&q).symmetrized();
    Ok(SpdSurrogate { qa, aq, svd: dec })
}

/// Eigendecomposition of an SPD matrix with cached fractional powers.
/// Eigenvalues are clipped from below at 1e-14 * lambda_max so that negative
/// round-off modes cannot poison negative powers.
pub struct SymPowers {
    eigvals: Vec<f64>,
    eigvecs: DenseMatrix,
    lambda_max: f64,
}

impl SymPowers {
    pub fn new(m: &DenseMatrix) -> Result<Self> {
        // The one-sided Jacobi SVD doubles as a symmetric eigensolver here
        // (signs recovered from u_j . v_j) and is much faster than two-sided
        // rotations at analysis sizes; these matrices are PSD by
        // construction so the sign recovery is unambiguous.
        let (eigvals, eigvecs) = if m.n_rows() > 128 {
            let dec = svd(m)?;
            let n = m.n_rows();
            let mut pairs: Vec<(f64, usize)> = (0..n)
                .map(|j| {
                    let u = dec.u.column(j);
                    let v = dec.v.column(j);
                    let s: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                    (dec.singular_values[j] * s.signum(), j)
                })
                .collect();
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let eigvals: Vec<f64> = pairs.iter().map(|&(l, _)| l).collect();
            let mut vecs = DenseMatrix::zeros(n, n);
            for (jj, &(_, j)) in pairs.iter().enumerate() {
                for i in 0..n {
                    vecs[(i, jj)] = dec.v[(i, j)];
                }
            }
            (eigvals, vecs)
        } else {
            sym_eig(m)?
        };
        let lambda_max = eigvals.iter().fold(0.0f64, |a, &b| a.max(b));
        Ok(SymPowers {
            eigvals,
            eigvecs,
            lambda_max,
        })
    }

    /// Spectral norm of the underlying matrix.
    pub fn norm(&self) -> f64 {
        self.lambda_max
    }

    /// M^p via the eigendecomposition.
    pub fn power(&self, p: f64) -> DenseMatrix {
        let n = self.eigvals.len();
        let floor = 1e-14 * self.lambda_max.max(f64::MIN_POSITIVE);
        let mut scaled = self.eigvecs.clone();
        for j in 0..n {
            let lam = self.eigvals[j].max(floor);
            let f = if p == 0.0 { 1.0 } else { lam.powf(p) };
            for i in 0..n {
                scaled[(i, j)] *= f;
            }
        }
        scaled.matmul(&self.eigvecs.transpose())
    }
}

/// The eta-orthogonal projector onto range(T):
/// Pi = T (T^T M^eta T)^{-1} T^T M^eta. Singular Gram blocks fall back to
/// the pseudoinverse.
fn projector(t: &DenseMatrix, m_eta: &DenseMatrix) -> DenseMatrix {
    let tt_me = t.transpose().matmul(m_eta);
    let gram = tt_me.matmul(t);
    let rhs = tt_me;
    let solved = match LuFactors::factor(&gram) {
        Ok(lu) => lu.solve(&rhs),
        Err(_) => {
            // Pseudoinverse column by column.
            let mut out = DenseMatrix::zeros(gram.n_rows(), rhs.n_cols());
            for j in 0..rhs.n_cols() {
                let col = rhs.column(j);
                let x = crate::linalg::min_norm_ls(&gram, &col);
                for i in 0..gram.n_rows() {
                    out[(i, j)] = x[i];
                }
            }
            out
        }
    };
    t.matmul(&solved)
}

fn weighted_norm_sq(m: &DenseMatrix, v: &[f64]) -> f64 {
    let mv = m.matvec(v);
    v.iter().zip(&mv).map(|(a, b)| a * b).sum()
}

/// Approximation constant of one vector:
/// K(v) = ||M||^(2 beta - eta) / ||v||^2_{M^(2 beta)} * ||(I - Pi) v||^2_{M^eta}.
pub fn fap_constant(
    t: &DenseMatrix,
    m: &DenseMatrix,
    beta: f64,
    eta: f64,
    v: &[f64],
) -> Result<f64> {
    let powers = SymPowers::new(m)?;
    let m_eta = powers.power(eta);
    let m_2beta = powers.power(2.0 * beta);
    let pi = projector(t, &m_eta);
    Ok(fap_constant_with(
        &pi,
        &m_eta,
        &m_2beta,
        powers.norm(),
        beta,
        eta,
        v,
    ))
}

#[allow(clippy::too_many_arguments)]
fn fap_constant_with(
    pi: &DenseMatrix,
    m_eta: &DenseMatrix,
    m_2beta: &DenseMatrix,
    m_norm: f64,
    beta: f64,
    eta: f64,
    v: &[f64],
) -> f64 {
    let piv = pi.matvec(v);
    let resid: Vec<f64> = v.iter().zip(&piv).map(|(a, b)| a - b).collect();
    let num = weighted_norm_sq(m_eta, &resid);
    let den = weighted_norm_sq(m_2beta, v);
    m_norm.powf(2.0 * beta - eta) * num / den
}

/// Worst-case constant over all vectors:
/// K_max = ||M||^(2 beta - eta) * || M^(eta/2) (I - Pi) M^(-beta) ||_2^2.
pub fn fap_kmax(t: &DenseMatrix, m: &DenseMatrix, beta: f64, eta: f64) -> Result<f64> {
    let powers = SymPowers::new(m)?;
    let pi = projector(t, &powers.power(eta));
    Ok(fap_kmax_with(&pi, &powers, beta, eta))
}

fn fap_kmax_with(pi: &DenseMatrix, powers: &SymPowers, beta: f64, eta: f64) -> f64 {
    let n = pi.n_rows();
    let mut i_minus_pi = pi.scaled(-1.0);
    for i in 0..n {
        i_minus_pi[(i, i)] += 1.0;
    }
    let inner = powers
        .power(eta / 2.0)
        .matmul(&i_minus_pi)
        .matmul(&powers.power(-beta));
    powers.norm().powf(2.0 * beta - eta) * spectral_norm(&inner).powi(2)
}

/// Largest singular value; exact SVD at small sizes, deterministic power
/// iteration on M^T M above.
fn spectral_norm(m: &DenseMatrix) -> f64 {
    if m.n_rows() <= 256 {
        return svd(m).expect("svd convergence").sigma_max();
    }
    let n = m.n_cols();
    let mt = m.transpose();
    let mut rng = Lcg64::new(0x5eed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.next_symmetric()).collect();
    let mut norm = 0.0f64;
    let mut prev = 0.0f64;
    for _ in 0..1000 {
        let w = mt.matvec(&m.matvec(&v));
        norm = crate::linalg::vec_norm(&w).sqrt();
        let wn = crate::linalg::vec_norm(&w);
        if wn == 0.0 {
            return 0.0;
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / wn;
        }
        if (norm - prev).abs() <= 1e-12 * norm.max(1e-300) {
            break;
        }
        prev = norm;
    }
    norm
}

/// Default (beta, eta) pairs: the weak and strong approximation properties.
pub const WAP_SAP_PAIRS: [(f64, f64); 2] = [(0.5, 0.0), (1.0, 1.0)];

/// Evaluates per-singular-vector constants and K_max for a restriction
/// operator: T = R^T against AQ, one result per (beta, eta) pair, with the
/// left singular vectors of A as the probe set (ascending singular values).
pub fn approximation_report(
    a: &SparseMatrix,
    restriction: &SparseMatrix,
    pairs: &[(f64, f64)],
) -> Result<Vec<ApproxPropertyResult>> {
    let surrogate = build_spd_surrogate(a)?;
    approximation_report_with(&surrogate, restriction, pairs)
}

/// Same as `approximation_report` but reuses a prebuilt surrogate, which is
/// the expensive part when comparing several operators on one matrix.
pub fn approximation_report_with(
    surrogate: &SpdSurrogate,
    restriction: &SparseMatrix,
    pairs: &[(f64, f64)],
) -> Result<Vec<ApproxPropertyResult>> {
    let t = restriction.transpose().to_dense();
    let powers = SymPowers::new(&surrogate.aq)?;
    let n = surrogate.aq.n_rows();
    let mut out = Vec::with_capacity(pairs.len());
    for &(beta, eta) in pairs {
        let m_eta = powers.power(eta);
        let m_2beta = powers.power(2.0 * beta);
        let pi = projector(&t, &m_eta);
        let mut per_vector = Vec::with_capacity(n);
        for j in 0..n {
            let u_j = surrogate.svd.u.column(j);
            per_vector.push(fap_constant_with(
                &pi,
                &m_eta,
                &m_2beta,
                powers.norm(),
                beta,
                eta,
                &u_j,
            ));
        }
        let k_max = fap_kmax_with(&pi, &powers, beta, eta);
        out.push(ApproxPropertyResult {
            beta,
            eta,
            per_vector_constants: per_vector,
            k_max,
            singular_values: surrogate.svd.singular_values.clone(),
            side: Side::Left,
        });
    }
    Ok(out)
}
