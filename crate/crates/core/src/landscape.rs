//! Green's function `G = H⁻¹`, the landscape function `u = G·1`, and the
//! eigenvector bound `|x_j| / max_k |x_k| ≤ λ u_j`.
//!
//! `G` is computed two ways: a direct LU inverse, and the Neumann series
//! `Σ_k (V⁻¹H₀)ᵏ V⁻¹` truncated at order `K` with a geometric tail bound.
//! Every term of the series is entrywise nonnegative, which is where the
//! positivity of `G` comes from.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{invert, operator_norm, symmetric_eigen, DenseMatrix, SymmetricEigen};
use crate::operator::{LatticeOperator, Regime};

/// Relative tolerance (against `‖G‖_max`) on negative Green's function entries.
pub const GREEN_POSITIVITY_TOLERANCE: f64 = 1e-12;

/// Absolute tolerance on landscape bound margins.
pub const BOUND_TOLERANCE: f64 = 1e-9;

/// Eigenvalues at or below this are treated as non-positive.
pub const SPECTRUM_FLOOR: f64 = 1e-12;

/// Residual tolerance for `G·H ≈ I` on direct inverses.
pub const DIRECT_RESIDUAL_TOLERANCE: f64 = 1e-8;

/// Whether solvers accept operators outside the dominance conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RegimePolicy {
    #[default]
    Enforce,
    AllowViolated,
}

impl RegimePolicy {
    fn admit(self, op: &LatticeOperator) -> Result<()> {
        if op.regime() == Regime::Violated && self == RegimePolicy::Enforce {
            return Err(Error::ConditionViolated {
                margin: op.condition().margin,
            });
        }
        Ok(())
    }
}

/// Tail bound for a Neumann series truncated at `truncation_order`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeumannCertificate {
    /// `‖H₀‖ · max_j v_j⁻¹`, with `‖H₀‖` computed from the spectrum.
    pub contraction_q: f64,
    /// `2Σaᵢ · max_j v_j⁻¹`; equals 1 on the soft boundary.
    pub analytic_q: f64,
    /// `max_j v_j⁻¹ = ‖V⁻¹‖`.
    pub inverse_potential_norm: f64,
    pub truncation_order: usize,
    /// `‖V⁻¹‖ · q^{K+1} / (1 − q)`.
    pub error_bound: f64,
}

impl NeumannCertificate {
    pub fn error_bound_at(&self, order: usize) -> f64 {
        tail_bound(self.inverse_potential_norm, self.contraction_q, order)
    }
}

fn tail_bound(inverse_norm: f64, q: f64, order: usize) -> f64 {
    let power = i32::try_from(order + 1).unwrap_or(i32::MAX);
    inverse_norm * q.powi(power) / (1.0 - q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GreenMethod {
    Direct,
    Series(NeumannCertificate),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreenFunction {
    pub g: DenseMatrix,
    pub method: GreenMethod,
    pub min_entry: f64,
}

impl GreenFunction {
    fn new(g: DenseMatrix, method: GreenMethod) -> Self {
        let min_entry = g.min_entry();
        GreenFunction {
            g,
            method,
            min_entry,
        }
    }

    /// `min G_ij ≥ −1e−12 · ‖G‖_max`.
    pub fn is_nonnegative(&self) -> bool {
        self.min_entry >= -GREEN_POSITIVITY_TOLERANCE * self.g.max_abs()
    }

    /// `‖G·H − I‖_max`.
    pub fn residual(&self, op: &LatticeOperator) -> Result<f64> {
        let n = op.size();
        Ok(self
            .g
            .matmul(op.h())?
            .sub(&DenseMatrix::identity(n))?
            .max_abs())
    }

    pub fn certificate(&self) -> Option<&NeumannCertificate> {
        match &self.method {
            GreenMethod::Series(cert) => Some(cert),
            GreenMethod::Direct => None,
        }
    }
}

/// `G = H⁻¹` by LU. Refuses violated operators unless the policy allows them.
pub fn green_direct(op: &LatticeOperator, policy: RegimePolicy) -> Result<GreenFunction> {
    policy.admit(op)?;
    let g = invert(op.h())?;
    Ok(GreenFunction::new(g, GreenMethod::Direct))
}

/// Incrementally summed Neumann series for `(V − H₀)⁻¹`.
#[derive(Debug, Clone)]
pub struct NeumannSeries {
    step: DenseMatrix,
    term: DenseMatrix,
    sum: DenseMatrix,
    order: usize,
    contraction_q: f64,
    analytic_q: f64,
    inverse_potential_norm: f64,
}

impl NeumannSeries {
    pub fn new(op: &LatticeOperator, policy: RegimePolicy) -> Result<Self> {
        policy.admit(op)?;
        let v = op.potential().values();
        let n = v.len();
        let inverse_potential_norm = v.iter().map(|x| x.recip()).fold(0.0, f64::max);

        let h0 = op.hopping_matrix();
        let contraction_q = operator_norm(&h0)? * inverse_potential_norm;
        if contraction_q >= 1.0 {
            return Err(Error::ContractionFailure { q: contraction_q });
        }
        let analytic_q = op.hopping().hop_sum() * inverse_potential_norm;

        let step = DenseMatrix::from_fn(n, n, |i, j| h0[(i, j)] / v[i]);
        let v_inv = DenseMatrix::from_diagonal(&v.iter().map(|x| x.recip()).collect::<Vec<_>>())?;
        Ok(NeumannSeries {
            step,
            term: v_inv.clone(),
            sum: v_inv,
            order: 0,
            contraction_q,
            analytic_q,
            inverse_potential_norm,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `Σ_{k=0}^{K} (V⁻¹H₀)ᵏ V⁻¹` for the current order `K`.
    pub fn partial_sum(&self) -> &DenseMatrix {
        &self.sum
    }

    /// Adds the next term. Terms are products of nonnegative matrices, so the
    /// partial sums never decrease entrywise.
    pub fn advance(&mut self) -> Result<()> {
        self.term = self.step.matmul(&self.term)?;
        self.sum = self.sum.add(&self.term)?;
        self.order += 1;
        Ok(())
    }

    pub fn advance_to(&mut self, order: usize) -> Result<()> {
        while self.order < order {
            self.advance()?;
        }
        Ok(())
    }

    pub fn certificate(&self) -> NeumannCertificate {
        NeumannCertificate {
            contraction_q: self.contraction_q,
            analytic_q: self.analytic_q,
            inverse_potential_norm: self.inverse_potential_norm,
            truncation_order: self.order,
            error_bound: tail_bound(self.inverse_potential_norm, self.contraction_q, self.order),
        }
    }

    pub fn green(&self) -> GreenFunction {
        GreenFunction::new(self.sum.clone(), GreenMethod::Series(self.certificate()))
    }
}

/// Neumann series for `G` truncated at `order`, with its tail certificate.
pub fn green_series(
    op: &LatticeOperator,
    order: usize,
    policy: RegimePolicy,
) -> Result<GreenFunction> {
    let mut series = NeumannSeries::new(op, policy)?;
    series.advance_to(order)?;
    Ok(series.green())
}

/// Multiple of `n·ε·‖G‖_max` allowed on top of the tail bound when comparing
/// a computed series against a computed direct inverse. The tail bound holds
/// in exact arithmetic; once it drops below rounding level only this floor
/// is observable.
pub const SERIES_ROUNDOFF_FACTOR: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesComparison {
    /// `‖series − direct‖_max`.
    pub deviation: f64,
    pub error_bound: f64,
    pub roundoff_allowance: f64,
    pub ok: bool,
}

impl SeriesComparison {
    pub fn slack(&self) -> f64 {
        self.error_bound - self.deviation
    }
}

/// Checks a truncated series against the direct inverse using its certificate.
pub fn compare_series(
    certificate: &NeumannCertificate,
    series: &DenseMatrix,
    direct: &DenseMatrix,
) -> Result<SeriesComparison> {
    let deviation = series.sub(direct)?.max_abs();
    let roundoff_allowance =
        SERIES_ROUNDOFF_FACTOR * direct.rows() as f64 * f64::EPSILON * direct.max_abs();
    Ok(SeriesComparison {
        deviation,
        error_bound: certificate.error_bound,
        roundoff_allowance,
        ok: deviation <= certificate.error_bound + roundoff_allowance,
    })
}

/// `u_j = Σ_k G_jk`.
pub fn landscape_function(green: &GreenFunction) -> Vec<f64> {
    green.g.row_sums()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeReport {
    pub u: Vec<f64>,
    pub eigenpairs: SymmetricEigen,
    /// Per eigenpair, `min_j (λ u_j − |x_j| / max_k |x_k|)`.
    pub margins: Vec<f64>,
    pub positivity_ok: bool,
    pub bound_ok: bool,
}

impl LandscapeReport {
    pub fn min_margin(&self) -> f64 {
        self.margins.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn min_landscape(&self) -> f64 {
        self.u.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenpairs.min_eigenvalue()
    }
}

/// Bound margin of a single eigenpair against the landscape `u`.
pub fn bound_margin(eigenvalue: f64, eigenvector: &[f64], u: &[f64]) -> f64 {
    let peak = eigenvector.iter().fold(0.0, |acc: f64, x| acc.max(x.abs()));
    eigenvector
        .iter()
        .zip(u)
        .map(|(x, uj)| eigenvalue * uj - x.abs() / peak)
        .fold(f64::INFINITY, f64::min)
}

/// Checks `|x_j| / max_k |x_k| ≤ λ u_j` for every eigenpair of `op`.
///
/// Under strict or soft-boundary regimes a non-positive eigenvalue is an
/// error. Under a violated regime outcomes are only recorded.
pub fn verify_landscape_bound(
    op: &LatticeOperator,
    u: &[f64],
    eig: &SymmetricEigen,
) -> Result<LandscapeReport> {
    let n = op.size();
    if u.len() != n || eig.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "operator of size {n}, landscape of length {}, {} eigenpairs",
            u.len(),
            eig.len()
        )));
    }
    let min_eigenvalue = eig.min_eigenvalue();
    if op.regime().is_guaranteed() && min_eigenvalue <= SPECTRUM_FLOOR {
        return Err(Error::NonPositiveSpectrum { min_eigenvalue });
    }

    let margins: Vec<f64> = (0..n)
        .map(|k| bound_margin(eig.eigenvalues[k], &eig.eigenvector(k), u))
        .collect();
    let positivity_ok = u.iter().all(|&x| x > 0.0);
    let bound_ok = margins.iter().all(|&m| m >= -BOUND_TOLERANCE);

    Ok(LandscapeReport {
        u: u.to_vec(),
        eigenpairs: eig.clone(),
        margins,
        positivity_ok,
        bound_ok,
    })
}

/// Direct Green's function plus the landscape report for one operator.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub green: GreenFunction,
    pub report: LandscapeReport,
}

impl Analysis {
    /// Every conclusion that the dominance conditions guarantee, as observed.
    pub fn all_checks_pass(&self) -> bool {
        self.green.is_nonnegative()
            && self.report.positivity_ok
            && self.report.bound_ok
            && self.report.min_eigenvalue() > 0.0
    }
}

/// Runs `green_direct → landscape_function → symmetric_eigen → verify_landscape_bound`.
pub fn analyze(op: &LatticeOperator, policy: RegimePolicy) -> Result<Analysis> {
    let green = green_direct(op, policy)?;
    let u = landscape_function(&green);
    let eig = symmetric_eigen(op.h())?;
    let report = verify_landscape_bound(op, &u, &eig)?;
    Ok(Analysis { green, report })
}
