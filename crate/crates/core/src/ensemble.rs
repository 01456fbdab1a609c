//! Reproducible random families of operators run through the full pipeline.
//!
//! Each instance draws from its own ChaCha stream keyed by `(seed, index)`,
//! so results do not depend on evaluation order or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landscape::{analyze, compare_series, NeumannSeries, RegimePolicy};
use crate::operator::{HoppingProfile, LatticeOperator, PotentialVector, Regime};

pub const DEFAULT_SERIES_ORDER: usize = 20;

fn default_series_order() -> usize {
    DEFAULT_SERIES_ORDER
}

fn default_amplitude() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HoppingLaw {
    /// Every `aᵢ ~ uniform[0, a_max]`.
    Dense { a_max: f64 },
    /// Each `aᵢ` kept with probability `keep_probability`, then uniform[0, a_max].
    Sparse { a_max: f64, keep_probability: f64 },
    /// `a₁ = amplitude`, the rest zero.
    NearestNeighbor {
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegimeTarget {
    /// `v_j = 2Σaᵢ + uniform[margin_low, margin_high]`.
    Strict { margin_low: f64, margin_high: f64 },
    /// `v_j = 2Σaᵢ` on every site, with some `aᵢ > 0`.
    SoftBoundary,
    /// `min_j v_j = 2Σaᵢ − deficit`.
    Violated { deficit: f64 },
}

impl RegimeTarget {
    fn policy(&self) -> RegimePolicy {
        match self {
            RegimeTarget::Violated { .. } => RegimePolicy::AllowViolated,
            _ => RegimePolicy::Enforce,
        }
    }

    /// Whether this target carries pass/fail semantics.
    pub fn is_guaranteed(&self) -> bool {
        !matches!(self, RegimeTarget::Violated { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub count: usize,
    /// Inclusive `[n_min, n_max]`.
    pub size_range: [usize; 2],
    pub hopping_law: HoppingLaw,
    pub regime_target: RegimeTarget,
    pub seed: u64,
    /// Truncation order for the Neumann series certificate check.
    #[serde(default = "default_series_order")]
    pub series_order: usize,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        let [n_min, n_max] = self.size_range;
        if self.count == 0 {
            return bad("count must be at least 1".into());
        }
        if n_min == 0 || n_max < n_min {
            return bad(format!(
                "size_range [{n_min}, {n_max}] needs 1 <= n_min <= n_max"
            ));
        }
        match self.hopping_law {
            HoppingLaw::Dense { a_max } => {
                if !(a_max.is_finite() && a_max > 0.0) {
                    return bad(format!("hopping_law.a_max = {a_max} must be positive"));
                }
            }
            HoppingLaw::Sparse {
                a_max,
                keep_probability,
            } => {
                if !(a_max.is_finite() && a_max > 0.0) {
                    return bad(format!("hopping_law.a_max = {a_max} must be positive"));
                }
                if !(0.0..=1.0).contains(&keep_probability) {
                    return bad(format!(
                        "hopping_law.keep_probability = {keep_probability} must lie in [0, 1]"
                    ));
                }
            }
            HoppingLaw::NearestNeighbor { amplitude } => {
                if !(amplitude.is_finite() && amplitude >= 0.0) {
                    return bad(format!(
                        "hopping_law.amplitude = {amplitude} must be nonnegative"
                    ));
                }
            }
        }
        match self.regime_target {
            RegimeTarget::Strict {
                margin_low,
                margin_high,
            } => {
                if !(margin_low > 0.0 && margin_high >= margin_low && margin_high.is_finite()) {
                    return bad(format!(
                        "strict margins [{margin_low}, {margin_high}] need 0 < low <= high"
                    ));
                }
            }
            RegimeTarget::SoftBoundary => {
                if n_min < 2 {
                    return bad("soft_boundary needs n_min >= 2 so some a_i > 0".into());
                }
                if let HoppingLaw::NearestNeighbor { amplitude } = self.hopping_law {
                    if amplitude <= 0.0 {
                        return bad(
                            "soft_boundary needs a positive nearest-neighbor amplitude".into()
                        );
                    }
                }
            }
            RegimeTarget::Violated { deficit } => {
                if !(deficit.is_finite() && deficit > 0.0) {
                    return bad(format!("violated deficit = {deficit} must be positive"));
                }
            }
        }
        Ok(())
    }

    fn rng(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }
}

/// Draws instance `index`; a pure function of `(spec, index)`.
pub fn generate_instance(
    spec: &EnsembleSpec,
    index: usize,
) -> Result<(PotentialVector, HoppingProfile)> {
    spec.validate()?;
    if index >= spec.count {
        return Err(Error::InvalidSpec(format!(
            "instance index {index} out of range for count {}",
            spec.count
        )));
    }
    let mut rng = spec.rng(index);
    let [n_min, n_max] = spec.size_range;
    let n = rng.gen_range(n_min..=n_max);

    let mut a: Vec<f64> = match spec.hopping_law {
        HoppingLaw::Dense { a_max } => (1..n).map(|_| rng.gen_range(0.0..=a_max)).collect(),
        HoppingLaw::Sparse {
            a_max,
            keep_probability,
        } => (1..n)
            .map(|_| {
                if rng.gen_bool(keep_probability) {
                    rng.gen_range(0.0..=a_max)
                } else {
                    0.0
                }
            })
            .collect(),
        HoppingLaw::NearestNeighbor { amplitude } => {
            let mut a = vec![0.0; n - 1];
            if let Some(first) = a.first_mut() {
                *first = amplitude;
            }
            a
        }
    };
    if matches!(spec.regime_target, RegimeTarget::SoftBoundary) && !a.iter().any(|&x| x > 0.0) {
        let a_max = match spec.hopping_law {
            HoppingLaw::Dense { a_max } | HoppingLaw::Sparse { a_max, .. } => a_max,
            HoppingLaw::NearestNeighbor { amplitude } => amplitude,
        };
        let slot = rng.gen_range(0..a.len());
        // (0, a_max]
        a[slot] = a_max * (1.0 - rng.gen::<f64>());
    }
    let hopping = HoppingProfile::new(n, a)?;
    let hop_sum = hopping.hop_sum();

    let v: Vec<f64> = match spec.regime_target {
        RegimeTarget::Strict {
            margin_low,
            margin_high,
        } => (0..n)
            .map(|_| hop_sum + rng.gen_range(margin_low..=margin_high))
            .collect(),
        RegimeTarget::SoftBoundary => vec![hop_sum; n],
        RegimeTarget::Violated { deficit } => {
            let floor = hop_sum - deficit;
            if floor <= 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "instance {index}: 2Σa − deficit = {floor} leaves no positive potential"
                )));
            }
            let mut v: Vec<f64> = (0..n)
                .map(|_| floor + rng.gen_range(0.0..=2.0 * deficit))
                .collect();
            let site = rng.gen_range(0..n);
            v[site] = floor;
            v
        }
    };
    Ok((PotentialVector::new(v)?, hopping))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub index: usize,
    pub n: usize,
    pub regime: Option<Regime>,
    pub margin: Option<f64>,
    pub min_green_entry: Option<f64>,
    pub green_max_abs: Option<f64>,
    pub min_landscape: Option<f64>,
    pub min_bound_margin: Option<f64>,
    pub min_eigenvalue: Option<f64>,
    /// `error_bound − ‖series − direct‖_max`.
    pub series_slack: Option<f64>,
    pub positivity_ok: bool,
    pub bound_ok: bool,
    pub series_ok: Option<bool>,
    pub error: Option<String>,
}

impl InstanceRecord {
    fn empty(index: usize, n: usize) -> Self {
        InstanceRecord {
            index,
            n,
            regime: None,
            margin: None,
            min_green_entry: None,
            green_max_abs: None,
            min_landscape: None,
            min_bound_margin: None,
            min_eigenvalue: None,
            series_slack: None,
            positivity_ok: false,
            bound_ok: false,
            series_ok: None,
            error: None,
        }
    }

    /// Reason this instance fails a guaranteed target, if any.
    fn failure(&self) -> Option<String> {
        if let Some(err) = &self.error {
            return Some(err.clone());
        }
        if !self.positivity_ok {
            return Some("positivity check failed".into());
        }
        if !self.bound_ok {
            return Some("landscape bound check failed".into());
        }
        if self.series_ok == Some(false) {
            return Some("series certificate exceeded".into());
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFailure {
    pub index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub spec: EnsembleSpec,
    pub records: Vec<InstanceRecord>,
    pub positivity_ok_count: usize,
    pub bound_ok_count: usize,
    pub failures: Vec<InstanceFailure>,
    /// `None` for violated targets, which carry no pass/fail semantics.
    pub passed: Option<bool>,
}

/// Generates and analyzes one instance. Errors land in the record.
pub fn run_instance(spec: &EnsembleSpec, index: usize) -> InstanceRecord {
    let mut rng = spec.rng(index);
    let [n_min, n_max] = spec.size_range;
    let n_hint = rng.gen_range(n_min..=n_max);
    let mut record = InstanceRecord::empty(index, n_hint);
    if let Err(err) = fill_record(spec, index, &mut record) {
        record.error = Some(err.to_string());
        record.positivity_ok = false;
        record.bound_ok = false;
    }
    record
}

fn fill_record(spec: &EnsembleSpec, index: usize, record: &mut InstanceRecord) -> Result<()> {
    let (potential, hopping) = generate_instance(spec, index)?;
    let op = LatticeOperator::assemble(potential, hopping)?;
    record.n = op.size();
    record.regime = Some(op.regime());
    record.margin = Some(op.condition().margin);

    let policy = spec.regime_target.policy();
    let analysis = analyze(&op, policy)?;
    record.min_green_entry = Some(analysis.green.min_entry);
    record.green_max_abs = Some(analysis.green.g.max_abs());
    record.min_landscape = Some(analysis.report.min_landscape());
    record.min_bound_margin = Some(analysis.report.min_margin());
    record.min_eigenvalue = Some(analysis.report.min_eigenvalue());
    record.positivity_ok = analysis.green.is_nonnegative()
        && analysis.report.positivity_ok
        && analysis.report.min_eigenvalue() > 0.0;
    record.bound_ok = analysis.report.bound_ok;

    if op.regime().is_guaranteed() {
        let mut series = NeumannSeries::new(&op, policy)?;
        series.advance_to(spec.series_order)?;
        let check = compare_series(
            &series.certificate(),
            series.partial_sum(),
            &analysis.green.g,
        )?;
        record.series_slack = Some(check.slack());
        record.series_ok = Some(check.ok);
    }
    Ok(())
}

/// Runs every instance (in parallel) and aggregates in index order.
pub fn run_ensemble(spec: &EnsembleSpec) -> Result<EnsembleSummary> {
    spec.validate()?;
    let records: Vec<InstanceRecord> = (0..spec.count)
        .into_par_iter()
        .map(|index| run_instance(spec, index))
        .collect();

    let guaranteed = spec.regime_target.is_guaranteed();
    let failures: Vec<InstanceFailure> = records
        .iter()
        .filter_map(|r| {
            let reason = if guaranteed {
                r.failure()
            } else {
                r.error.clone()
            };
            reason.map(|reason| InstanceFailure {
                index: r.index,
                reason,
            })
        })
        .collect();

    Ok(EnsembleSummary {
        spec: spec.clone(),
        positivity_ok_count: records.iter().filter(|r| r.positivity_ok).count(),
        bound_ok_count: records.iter().filter(|r| r.bound_ok).count(),
        passed: guaranteed.then_some(failures.is_empty()),
        failures,
        records,
    })
}
