//! Construction of `H = V - H₀` and classification of the potential against
//! the dominance conditions `v_j > 2Σaᵢ` (strict) and `v_j ≥ 2Σaᵢ` (soft).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Relative band (in units of `2Σaᵢ`) inside which a margin counts as zero.
pub const SOFT_BOUNDARY_TOLERANCE: f64 = 1e-12;

/// Nonnegative Toeplitz hopping amplitudes `a₁ … a_{n-1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HoppingProfile {
    lattice_size: usize,
    coefficients: Vec<f64>,
}

impl HoppingProfile {
    pub fn new(lattice_size: usize, coefficients: Vec<f64>) -> Result<Self> {
        if lattice_size == 0 {
            return Err(Error::InvalidHopping(
                "lattice size must be at least 1".into(),
            ));
        }
        if coefficients.len() != lattice_size - 1 {
            return Err(Error::InvalidHopping(format!(
                "lattice of size {lattice_size} needs {} coefficients, got {}",
                lattice_size - 1,
                coefficients.len()
            )));
        }
        for (i, &a) in coefficients.iter().enumerate() {
            if !a.is_finite() || a < 0.0 {
                return Err(Error::InvalidHopping(format!(
                    "a_{} = {a} must be finite and nonnegative",
                    i + 1
                )));
            }
        }
        Ok(HoppingProfile {
            lattice_size,
            coefficients,
        })
    }

    pub fn zero(lattice_size: usize) -> Result<Self> {
        HoppingProfile::new(lattice_size, vec![0.0; lattice_size.saturating_sub(1)])
    }

    /// `a₁ = amplitude`, all longer-range amplitudes zero.
    pub fn nearest_neighbor(lattice_size: usize, amplitude: f64) -> Result<Self> {
        let mut coefficients = vec![0.0; lattice_size.saturating_sub(1)];
        if let Some(first) = coefficients.first_mut() {
            *first = amplitude;
        }
        HoppingProfile::new(lattice_size, coefficients)
    }

    /// `aᵢ = ρⁱ` with `0 ≤ ρ < 1`.
    pub fn geometric(lattice_size: usize, rate: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::InvalidHopping(format!(
                "geometric decay rate must satisfy 0 <= rate < 1, got {rate}"
            )));
        }
        let coefficients = (1..lattice_size).map(|i| rate.powi(i as i32)).collect();
        HoppingProfile::new(lattice_size, coefficients)
    }

    pub fn lattice_size(&self) -> usize {
        self.lattice_size
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Amplitude at distance `d ≥ 1`.
    pub fn amplitude(&self, distance: usize) -> f64 {
        self.coefficients[distance - 1]
    }

    /// `2Σaᵢ`.
    pub fn hop_sum(&self) -> f64 {
        2.0 * self.coefficients.iter().sum::<f64>()
    }

    pub fn has_hopping(&self) -> bool {
        self.coefficients.iter().any(|&a| a > 0.0)
    }
}

/// Strictly positive on-site potential `v₁ … v_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialVector {
    values: Vec<f64>,
}

impl PotentialVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidPotential(
                "potential must be non-empty".into(),
            ));
        }
        for (j, &v) in values.iter().enumerate() {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidPotential(format!(
                    "v_{} = {v} must be finite and strictly positive",
                    j + 1
                )));
            }
        }
        Ok(PotentialVector { values })
    }

    pub fn constant(lattice_size: usize, value: f64) -> Result<Self> {
        PotentialVector::new(vec![value; lattice_size])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Strict,
    SoftBoundary,
    Violated,
}

impl Regime {
    /// Whether the positivity and landscape-bound conclusions are guaranteed.
    pub fn is_guaranteed(self) -> bool {
        !matches!(self, Regime::Violated)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Strict => "strict",
            Regime::SoftBoundary => "soft_boundary",
            Regime::Violated => "violated",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A regime together with its margin `min_j v_j − 2Σaᵢ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionRegime {
    pub regime: Regime,
    pub margin: f64,
}

pub fn classify_condition(
    potential: &PotentialVector,
    profile: &HoppingProfile,
) -> Result<ConditionRegime> {
    check_sizes(potential, profile)?;
    let hop_sum = profile.hop_sum();
    let margin = potential.min() - hop_sum;
    let regime = if hop_sum == 0.0 {
        // diagonal case: v_j > 0 is already enforced by PotentialVector
        Regime::Strict
    } else if margin.abs() <= SOFT_BOUNDARY_TOLERANCE * hop_sum {
        Regime::SoftBoundary
    } else if margin > 0.0 {
        Regime::Strict
    } else {
        Regime::Violated
    };
    Ok(ConditionRegime { regime, margin })
}

/// Symmetric Toeplitz `H₀` with zero diagonal and `a_{|i-j|}` off it.
pub fn build_hopping_matrix(profile: &HoppingProfile) -> DenseMatrix {
    let n = profile.lattice_size();
    DenseMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            profile.amplitude(i.abs_diff(j))
        }
    })
}

/// The bound `‖H₀‖ ≤ 2Σaᵢ`.
pub fn hopping_norm_bound(profile: &HoppingProfile) -> f64 {
    profile.hop_sum()
}

/// `min_i (|h_ii| − Σ_{j≠i} |h_ij|)`: positive for strictly diagonally
/// dominant matrices, zero for weakly dominant ones.
pub fn diagonal_dominance(h: &DenseMatrix) -> f64 {
    (0..h.rows())
        .map(|i| {
            let off: f64 = h
                .row(i)
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, x)| x.abs())
                .sum();
            h[(i, i)].abs() - off
        })
        .fold(f64::INFINITY, f64::min)
}

fn check_sizes(potential: &PotentialVector, profile: &HoppingProfile) -> Result<()> {
    if potential.len() != profile.lattice_size() {
        return Err(Error::DimensionMismatch(format!(
            "potential has {} sites, hopping profile describes {}",
            potential.len(),
            profile.lattice_size()
        )));
    }
    Ok(())
}

/// Assembled `H = V − H₀` with its inputs and condition.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeOperator {
    h: DenseMatrix,
    potential: PotentialVector,
    hopping: HoppingProfile,
    condition: ConditionRegime,
}

impl LatticeOperator {
    /// Violated potentials are accepted here; downstream solvers decide
    /// whether to refuse them.
    pub fn assemble(potential: PotentialVector, hopping: HoppingProfile) -> Result<Self> {
        let condition = classify_condition(&potential, &hopping)?;
        let v = potential.values();
        let n = v.len();
        let h = DenseMatrix::from_fn(n, n, |i, j| {
            if i == j {
                v[i]
            } else {
                -hopping.amplitude(i.abs_diff(j))
            }
        });
        Ok(LatticeOperator {
            h,
            potential,
            hopping,
            condition,
        })
    }

    pub fn h(&self) -> &DenseMatrix {
        &self.h
    }

    pub fn potential(&self) -> &PotentialVector {
        &self.potential
    }

    pub fn hopping(&self) -> &HoppingProfile {
        &self.hopping
    }

    pub fn condition(&self) -> ConditionRegime {
        self.condition
    }

    pub fn regime(&self) -> Regime {
        self.condition.regime
    }

    pub fn size(&self) -> usize {
        self.potential.len()
    }

    pub fn hopping_matrix(&self) -> DenseMatrix {
        build_hopping_matrix(&self.hopping)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{operator_norm, symmetric_eigen};
    use proptest::prelude::*;

    fn op(v: &[f64], a: &[f64]) -> LatticeOperator {
        LatticeOperator::assemble(
            PotentialVector::new(v.to_vec()).unwrap(),
            HoppingProfile::new(v.len(), a.to_vec()).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn profile_validation() {
        assert!(HoppingProfile::new(3, vec![1.0]).is_err());
        assert!(HoppingProfile::new(3, vec![1.0, -0.1]).is_err());
        assert!(HoppingProfile::new(2, vec![f64::NAN]).is_err());
        assert!(HoppingProfile::new(0, vec![]).is_err());
        assert!(HoppingProfile::new(1, vec![]).is_ok());
        assert!(HoppingProfile::geometric(4, 1.0).is_err());
        assert!(HoppingProfile::geometric(4, -0.5).is_err());
        assert_eq!(
            HoppingProfile::geometric(4, 0.5).unwrap().coefficients(),
            &[0.5, 0.25, 0.125]
        );
        assert_eq!(
            HoppingProfile::nearest_neighbor(4, 1.0)
                .unwrap()
                .coefficients(),
            &[1.0, 0.0, 0.0]
        );
    }

    #[test]
    fn potential_validation() {
        assert!(PotentialVector::new(vec![]).is_err());
        assert!(PotentialVector::new(vec![1.0, 0.0]).is_err());
        assert!(PotentialVector::new(vec![1.0, -2.0]).is_err());
        assert!(PotentialVector::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn hopping_matrix_single_site() {
        let h0 = build_hopping_matrix(&HoppingProfile::new(1, vec![]).unwrap());
        assert_eq!(h0.to_rows(), vec![vec![0.0]]);
    }

    #[test]
    fn hopping_matrix_nearest_neighbor() {
        let h0 = build_hopping_matrix(&HoppingProfile::new(3, vec![1.0, 0.0]).unwrap());
        assert_eq!(
            h0.to_rows(),
            vec![
                vec![0.0, 1.0, 0.0],
                vec![1.0, 0.0, 1.0],
                vec![0.0, 1.0, 0.0]
            ]
        );
    }

    #[test]
    fn hopping_matrix_long_range() {
        let h0 = build_hopping_matrix(&HoppingProfile::new(3, vec![2.0, 5.0]).unwrap());
        assert_eq!(
            h0.to_rows(),
            vec![
                vec![0.0, 2.0, 5.0],
                vec![2.0, 0.0, 2.0],
                vec![5.0, 2.0, 0.0]
            ]
        );
    }

    #[test]
    fn assemble_examples() {
        let strict = op(&[3.0, 3.0], &[1.0]);
        assert_eq!(strict.h().to_rows(), vec![vec![3.0, -1.0], vec![-1.0, 3.0]]);
        assert_eq!(
            strict.condition(),
            ConditionRegime {
                regime: Regime::Strict,
                margin: 1.0
            }
        );

        let soft = op(&[2.0, 2.0], &[1.0]);
        assert_eq!(soft.h().to_rows(), vec![vec![2.0, -1.0], vec![-1.0, 2.0]]);
        assert_eq!(soft.regime(), Regime::SoftBoundary);
        assert_eq!(soft.condition().margin, 0.0);

        let violated = op(&[1.0, 1.0], &[1.0]);
        assert_eq!(violated.regime(), Regime::Violated);
        assert_eq!(violated.condition().margin, -1.0);
    }

    #[test]
    fn assemble_rejects_size_mismatch() {
        let err = LatticeOperator::assemble(
            PotentialVector::new(vec![3.0; 3]).unwrap(),
            HoppingProfile::new(2, vec![1.0]).unwrap(),
        );
        assert!(matches!(err, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn classify_examples() {
        let c = |v: &[f64], a: &[f64]| {
            classify_condition(
                &PotentialVector::new(v.to_vec()).unwrap(),
                &HoppingProfile::new(v.len(), a.to_vec()).unwrap(),
            )
            .unwrap()
        };
        assert_eq!(
            c(&[4.0, 4.0], &[1.0]),
            ConditionRegime {
                regime: Regime::Strict,
                margin: 2.0
            }
        );
        assert_eq!(
            c(&[2.0, 2.0, 2.0], &[1.0, 0.0]),
            ConditionRegime {
                regime: Regime::SoftBoundary,
                margin: 0.0
            }
        );
        assert_eq!(
            c(&[5.0], &[]),
            ConditionRegime {
                regime: Regime::Strict,
                margin: 5.0
            }
        );
        // tiny positive margin inside the relative band is still the boundary
        assert_eq!(c(&[2.0 + 1e-15, 2.0], &[1.0]).regime, Regime::SoftBoundary);
        assert_eq!(c(&[2.0 + 1e-9, 2.0 + 1e-9], &[1.0]).regime, Regime::Strict);
        // zero hopping with any positive potential is the strict diagonal case
        assert_eq!(c(&[0.1, 0.2], &[0.0]).regime, Regime::Strict);
    }

    #[test]
    fn norm_bound_examples() {
        assert_eq!(
            hopping_norm_bound(&HoppingProfile::new(2, vec![1.0]).unwrap()),
            2.0
        );
        assert_eq!(hopping_norm_bound(&HoppingProfile::zero(4).unwrap()), 0.0);
        assert_eq!(
            hopping_norm_bound(&HoppingProfile::new(3, vec![0.5, 0.25]).unwrap()),
            1.5
        );
    }

    #[test]
    fn dominance_matches_regime() {
        assert_eq!(diagonal_dominance(op(&[3.0, 3.0], &[1.0]).h()), 2.0);
        // interior rows of the soft-boundary operator are exactly weakly dominant
        assert_eq!(
            diagonal_dominance(op(&[2.0, 2.0, 2.0], &[1.0, 0.0]).h()),
            0.0
        );
    }

    fn profile_strategy() -> impl Strategy<Value = HoppingProfile> {
        (1usize..=24).prop_flat_map(|n| {
            prop::collection::vec(prop_oneof![Just(0.0), 0.0..1.0f64], n - 1)
                .prop_map(move |a| HoppingProfile::new(n, a).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn hopping_norm_strictly_below_bound(profile in profile_strategy()) {
            let norm = operator_norm(&build_hopping_matrix(&profile)).unwrap();
            let bound = hopping_norm_bound(&profile);
            if profile.has_hopping() {
                prop_assert!(norm < bound, "norm {norm} bound {bound}");
            } else {
                prop_assert_eq!(norm, 0.0);
            }
        }

        #[test]
        fn assembled_operator_is_exactly_symmetric(
            profile in profile_strategy(),
            extra in 0.0..2.0f64,
        ) {
            let n = profile.lattice_size();
            let v = vec![profile.hop_sum() + extra + 0.1; n];
            let op = LatticeOperator::assemble(PotentialVector::new(v.clone()).unwrap(), profile).unwrap();
            prop_assert_eq!(op.h().max_asymmetry(), 0.0);
            prop_assert_eq!(op.h().diagonal(), v);
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        prop_assert_eq!(op.h()[(i, j)], -op.hopping().amplitude(i.abs_diff(j)));
                    }
                }
            }
        }

        #[test]
        fn strict_and_soft_regimes_have_positive_spectrum(
            profile in profile_strategy(),
            margin in prop_oneof![Just(0.0), 0.01..1.0f64],
        ) {
            let n = profile.lattice_size();
            let v = vec![profile.hop_sum() + margin; n];
            if v[0] <= 0.0 {
                return Ok(());
            }
            let op = LatticeOperator::assemble(PotentialVector::new(v).unwrap(), profile).unwrap();
            prop_assert!(op.regime().is_guaranteed());
            if op.regime() == Regime::Strict {
                prop_assert!(diagonal_dominance(op.h()) > 0.0);
            }
            let eig = symmetric_eigen(op.h()).unwrap();
            prop_assert!(eig.min_eigenvalue() > 0.0);
        }

        #[test]
        fn classification_is_permutation_invariant(
            v in prop::collection::vec(0.1..5.0f64, 2..12),
            a1 in 0.0..1.5f64,
            rot in 0usize..12,
        ) {
            let n = v.len();
            let profile = HoppingProfile::nearest_neighbor(n, a1).unwrap();
            let mut shuffled = v.clone();
            shuffled.rotate_left(rot % n);
            shuffled.reverse();
            let c1 = classify_condition(&PotentialVector::new(v).unwrap(), &profile).unwrap();
            let c2 = classify_condition(&PotentialVector::new(shuffled).unwrap(), &profile).unwrap();
            prop_assert_eq!(c1, c2);
        }
    }
}
