//! Report types and their CSV/JSON encodings.
//!
//! CSV numbers use 17 significant digits in scientific notation, columns are
//! fixed, and every row ends in a newline.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::config::{Check, InstanceConfig, SolverSpec};
use crate::ensemble::EnsembleSummary;
use crate::landscape::{
    compare_series, green_direct, green_series, landscape_function, verify_landscape_bound,
    NeumannCertificate, RegimePolicy, SeriesComparison, BOUND_TOLERANCE,
    GREEN_POSITIVITY_TOLERANCE, SPECTRUM_FLOOR,
};
use crate::linalg::{operator_norm, spectral_norm, symmetric_eigen, DenseMatrix};
use crate::operator::{hopping_norm_bound, LatticeOperator, Regime};
use crate::structure::{
    block_permutation, build_offdiagonal, conjugate_by_permutation, nearest_neighbor_blocks,
    predicted_block_sizes, verify_strict_gap, ShiftMatrix,
};

pub const SITES_HEADER: [&str; 4] = ["j", "v_j", "u_j", "lambda_min_u_j"];

pub const INSTANCES_HEADER: [&str; 13] = [
    "index",
    "n",
    "regime",
    "margin",
    "min_green_entry",
    "min_landscape",
    "min_bound_margin",
    "min_eigenvalue",
    "series_slack",
    "positivity_ok",
    "bound_ok",
    "series_ok",
    "error",
];

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn fmt_opt_bool(x: Option<bool>) -> String {
    x.map(|b| b.to_string()).unwrap_or_default()
}

/// Norm quantities behind the norm estimates on `V⁻¹`, `H₀`, `R₁` and `L₁`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    /// `‖H₀‖` from the spectrum.
    pub hopping_norm: f64,
    /// `2Σaᵢ`.
    pub hopping_norm_bound: f64,
    /// `‖V⁻¹‖` from the spectrum.
    pub inverse_potential_norm: f64,
    /// `max_j v_j⁻¹`.
    pub max_inverse_potential: f64,
    /// `‖H₀‖ · max_j v_j⁻¹`.
    pub contraction_q: f64,
    pub right_shift_norm: Option<f64>,
    pub left_shift_norm: Option<f64>,
}

impl NormReport {
    pub fn compute(op: &LatticeOperator) -> crate::Result<Self> {
        let n = op.size();
        let v = op.potential().values();
        let hopping_norm = operator_norm(&op.hopping_matrix())?;
        let inv: Vec<f64> = v.iter().map(|x| x.recip()).collect();
        let inverse_potential_norm = operator_norm(&DenseMatrix::from_diagonal(&inv)?)?;
        let max_inverse_potential = inv.iter().copied().fold(0.0, f64::max);
        let (right_shift_norm, left_shift_norm) = if n >= 2 {
            (
                Some(spectral_norm(&ShiftMatrix::right(n, 1)?.realize())?),
                Some(spectral_norm(&ShiftMatrix::left(n, 1)?.realize())?),
            )
        } else {
            (None, None)
        };
        Ok(NormReport {
            hopping_norm,
            hopping_norm_bound: hopping_norm_bound(op.hopping()),
            inverse_potential_norm,
            max_inverse_potential,
            contraction_q: hopping_norm * max_inverse_potential,
            right_shift_norm,
            left_shift_norm,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub lattice_size: usize,
    pub regime: Regime,
    pub margin: f64,
    pub hop_sum: f64,
    pub potential: Vec<f64>,
    pub hopping: Vec<f64>,
    pub solver: SolverSpec,
    pub override_violated: bool,
    pub eigenvalues: Vec<f64>,
    pub u: Option<Vec<f64>>,
    pub bound_margins: Option<Vec<f64>>,
    pub min_green_entry: Option<f64>,
    pub green_max_abs: Option<f64>,
    pub certificate: Option<NeumannCertificate>,
    pub series_comparison: Option<SeriesComparison>,
    pub norms: Option<NormReport>,
    pub requested_checks: Vec<Check>,
    pub checks: BTreeMap<String, bool>,
    pub passed: bool,
    pub errors: Vec<String>,
}

impl SolveReport {
    /// Runs the requested solver and checks for one configuration.
    pub fn compute(config: &InstanceConfig, op: &LatticeOperator) -> SolveReport {
        let mut report = SolveReport {
            lattice_size: op.size(),
            regime: op.regime(),
            margin: op.condition().margin,
            hop_sum: op.hopping().hop_sum(),
            potential: op.potential().values().to_vec(),
            hopping: op.hopping().coefficients().to_vec(),
            solver: config.solver,
            override_violated: config.override_violated,
            eigenvalues: Vec::new(),
            u: None,
            bound_margins: None,
            min_green_entry: None,
            green_max_abs: None,
            certificate: None,
            series_comparison: None,
            norms: None,
            requested_checks: config.checks.clone(),
            checks: BTreeMap::new(),
            passed: false,
            errors: Vec::new(),
        };
        let policy = if config.override_violated {
            RegimePolicy::AllowViolated
        } else {
            RegimePolicy::Enforce
        };

        match NormReport::compute(op) {
            Ok(norms) => report.norms = Some(norms),
            Err(e) => report.errors.push(format!("norms: {e}")),
        }
        let eig = match symmetric_eigen(op.h()) {
            Ok(eig) => {
                report.eigenvalues = eig.eigenvalues.clone();
                Some(eig)
            }
            Err(e) => {
                report.errors.push(format!("eigen: {e}"));
                None
            }
        };

        let green = match config.solver {
            SolverSpec::Direct => green_direct(op, policy),
            SolverSpec::Series { order } => green_series(op, order, policy),
        };
        match green {
            Ok(green) => {
                report.min_green_entry = Some(green.min_entry);
                report.green_max_abs = Some(green.g.max_abs());
                report.certificate = green.certificate().copied();
                if let Some(cert) = green.certificate() {
                    match green_direct(op, policy)
                        .and_then(|direct| compare_series(cert, &green.g, &direct.g))
                    {
                        Ok(cmp) => report.series_comparison = Some(cmp),
                        Err(e) => report.errors.push(format!("series comparison: {e}")),
                    }
                }
                let u = landscape_function(&green);
                if let Some(eig) = &eig {
                    match verify_landscape_bound(op, &u, eig) {
                        Ok(r) => report.bound_margins = Some(r.margins),
                        Err(e) => report.errors.push(format!("landscape bound: {e}")),
                    }
                }
                report.u = Some(u);
            }
            Err(e) => report.errors.push(format!("green function: {e}")),
        }

        report.checks = report.recompute_checks();
        report.passed = report.checks.values().all(|&ok| ok);
        report
    }

    /// Evaluates the requested checks from the numbers stored in the report.
    pub fn recompute_checks(&self) -> BTreeMap<String, bool> {
        self.requested_checks
            .iter()
            .map(|&c| (c.name().to_string(), self.evaluate(c)))
            .collect()
    }

    fn evaluate(&self, check: Check) -> bool {
        match check {
            Check::Positivity => match (self.min_green_entry, self.green_max_abs, &self.u) {
                (Some(min), Some(max), Some(u)) => {
                    min >= -GREEN_POSITIVITY_TOLERANCE * max && u.iter().all(|&x| x > 0.0)
                }
                _ => false,
            },
            Check::Bound => self
                .bound_margins
                .as_ref()
                .is_some_and(|m| m.iter().all(|&x| x >= -BOUND_TOLERANCE)),
            Check::Spectrum => self
                .eigenvalues
                .first()
                .is_some_and(|&l| l > SPECTRUM_FLOOR),
            Check::NormLemmas => self.norms.as_ref().is_some_and(|norms| {
                let hop = if norms.hopping_norm_bound > 0.0 {
                    norms.hopping_norm < norms.hopping_norm_bound
                } else {
                    norms.hopping_norm == 0.0
                };
                let inv = (norms.inverse_potential_norm - norms.max_inverse_potential).abs()
                    <= 1e-12 * norms.max_inverse_potential;
                let shifts = [norms.right_shift_norm, norms.left_shift_norm]
                    .iter()
                    .flatten()
                    .all(|&s| s <= 1.0 + 1e-12);
                let contraction = !self.regime.is_guaranteed() || norms.contraction_q < 1.0;
                hop && inv && shifts && contraction
            }),
        }
    }

    pub fn write_sites_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(SITES_HEADER)?;
        let lambda_min = self.eigenvalues.first().copied();
        for (j, &v) in self.potential.iter().enumerate() {
            let u = self.u.as_ref().map(|u| u[j]);
            let scaled = u.zip(lambda_min).map(|(u, l)| l * u);
            w.write_record([(j + 1).to_string(), fmt_f64(v), fmt_opt(u), fmt_opt(scaled)])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn write_instances_csv<W: Write>(summary: &EnsembleSummary, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(INSTANCES_HEADER)?;
    for r in &summary.records {
        w.write_record([
            r.index.to_string(),
            r.n.to_string(),
            r.regime.map(|x| x.as_str().to_string()).unwrap_or_default(),
            fmt_opt(r.margin),
            fmt_opt(r.min_green_entry),
            fmt_opt(r.min_landscape),
            fmt_opt(r.min_bound_margin),
            fmt_opt(r.min_eigenvalue),
            fmt_opt(r.series_slack),
            r.positivity_ok.to_string(),
            r.bound_ok.to_string(),
            fmt_opt_bool(r.series_ok),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub n: usize,
    pub j: usize,
    /// 1-based ordering of the reordered basis.
    pub permutation: Vec<usize>,
    pub block_sizes: Vec<usize>,
    pub predicted_block_sizes: Vec<usize>,
    pub exact_block_structure: bool,
    pub norm_before: f64,
    pub norm_after: f64,
    pub block_norms: Vec<f64>,
    pub gap: Option<f64>,
    pub passed: bool,
    pub error: Option<String>,
}

impl StructureReport {
    pub fn compute(n: usize, j: usize) -> crate::Result<Self> {
        let a = build_offdiagonal(n, j)?;
        let decomposition = block_permutation(n, j)?;
        let conjugated = conjugate_by_permutation(&a, &decomposition.permutation)?;
        let predicted = predicted_block_sizes(n, j);
        let exact = conjugated == nearest_neighbor_blocks(&decomposition.block_sizes)
            && decomposition.block_sizes == predicted
            && decomposition.block_sizes.iter().sum::<usize>() == n;
        let norm_before = operator_norm(&a)?;
        let norm_after = operator_norm(&conjugated)?;
        let (gap, block_norms, error) = match verify_strict_gap(n, j) {
            Ok(g) => (Some(g.gap), g.block_norms, None),
            Err(e) => (None, Vec::new(), Some(e.to_string())),
        };
        let passed =
            exact && gap.is_some_and(|g| g > 0.0) && (norm_before - norm_after).abs() <= 1e-12;
        Ok(StructureReport {
            n,
            j,
            permutation: decomposition.permutation.one_based(),
            block_sizes: decomposition.block_sizes,
            predicted_block_sizes: predicted,
            exact_block_structure: exact,
            norm_before,
            norm_after,
            block_norms,
            gap,
            passed,
            error,
        })
    }
}
