//! Off-diagonal matrices `A_j(n) = L_j + R_j` and their block structure.
//!
//! Reordering the standard basis into residue classes mod `j` turns `A_j(n)`
//! into a direct sum of nearest-neighbor blocks `A₁(kᵢ)`, whose spectra are
//! `2cos(mπ/(kᵢ+1))`. Hence `‖A_j(n)‖ < 2`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{operator_norm, DenseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftSide {
    Left,
    Right,
}

/// `R_k` (ones on the k-th superdiagonal) or `L_k` (k-th subdiagonal).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShiftMatrix {
    size: usize,
    offset: usize,
    side: ShiftSide,
}

impl ShiftMatrix {
    pub fn new(size: usize, offset: usize, side: ShiftSide) -> Result<Self> {
        if size == 0 || offset == 0 || offset >= size {
            return Err(Error::IndexOutOfRange(format!(
                "shift offset {offset} must lie in [1, {}]",
                size.saturating_sub(1)
            )));
        }
        Ok(ShiftMatrix { size, offset, side })
    }

    pub fn right(size: usize, offset: usize) -> Result<Self> {
        ShiftMatrix::new(size, offset, ShiftSide::Right)
    }

    pub fn left(size: usize, offset: usize) -> Result<Self> {
        ShiftMatrix::new(size, offset, ShiftSide::Left)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn side(&self) -> ShiftSide {
        self.side
    }

    pub fn realize(&self) -> DenseMatrix {
        let k = self.offset;
        DenseMatrix::from_fn(self.size, self.size, |i, j| {
            let hit = match self.side {
                ShiftSide::Right => j == i + k,
                ShiftSide::Left => i == j + k,
            };
            if hit {
                1.0
            } else {
                0.0
            }
        })
    }
}

fn check_offset(n: usize, j: usize) -> Result<()> {
    // n = 1, j = 1 is the trivial A₁(1) = (0)
    let ok = n >= 1 && j >= 1 && (j < n || (n == 1 && j == 1));
    if !ok {
        return Err(Error::IndexOutOfRange(format!(
            "offset j = {j} is invalid for n = {n}; need 1 <= j <= n-1"
        )));
    }
    Ok(())
}

/// `A_j(n)`: symmetric 0/1 matrix with ones exactly where `|row − col| = j`.
pub fn build_offdiagonal(n: usize, j: usize) -> Result<DenseMatrix> {
    check_offset(n, j)?;
    Ok(DenseMatrix::from_fn(n, n, |r, c| {
        if r.abs_diff(c) == j {
            1.0
        } else {
            0.0
        }
    }))
}

/// A bijection on `{0, …, n−1}`; entry `a` is the original index placed at
/// position `a`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        let n = indices.len();
        let mut seen = vec![false; n];
        for &i in &indices {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidPermutation(format!(
                    "{indices:?} is not a bijection on 0..{n}"
                )));
            }
        }
        Ok(Permutation(indices))
    }

    /// From 1-based labels such as `(1, 3, 5, 2, 4)`.
    pub fn from_one_based(labels: &[usize]) -> Result<Self> {
        let indices = labels
            .iter()
            .map(|&l| {
                l.checked_sub(1)
                    .ok_or_else(|| Error::InvalidPermutation("labels start at 1".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Permutation::new(indices)
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(a, &i)| a == i)
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Permutation::new(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockDecomposition {
    pub permutation: Permutation,
    pub block_sizes: Vec<usize>,
}

/// `kᵢ = ⌊(n − i)/j⌋ + 1` for `i = 1..=j`: the number of indices in `1..=n`
/// congruent to `i` mod `j`.
pub fn predicted_block_sizes(n: usize, j: usize) -> Vec<usize> {
    (1..=j.min(n)).map(|i| (n - i) / j + 1).collect()
}

/// Groups the basis as `[e₁, e_{1+j}, e_{1+2j}, …]`, then `[e₂, e_{2+j}, …]`,
/// up to `[e_j, e_{2j}, …]`. Under this ordering `A_j(n)` is block diagonal.
pub fn block_permutation(n: usize, j: usize) -> Result<BlockDecomposition> {
    check_offset(n, j)?;
    let mut order = Vec::with_capacity(n);
    let mut block_sizes = Vec::with_capacity(j);
    for start in 0..j.min(n) {
        let before = order.len();
        let mut idx = start;
        while idx < n {
            order.push(idx);
            idx += j;
        }
        block_sizes.push(order.len() - before);
    }
    debug_assert_eq!(block_sizes, predicted_block_sizes(n, j));
    Ok(BlockDecomposition {
        permutation: Permutation::new(order)?,
        block_sizes,
    })
}

/// `U m Uᵀ` for the permutation matrix `U` with rows `e_{perm[a]}ᵀ`, done by
/// index remapping so entries are copied exactly.
pub fn conjugate_by_permutation(m: &DenseMatrix, perm: &Permutation) -> Result<DenseMatrix> {
    if !m.is_square() || m.rows() != perm.len() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix with permutation of length {}",
            m.rows(),
            m.cols(),
            perm.len()
        )));
    }
    let p = perm.indices();
    Ok(DenseMatrix::from_fn(m.rows(), m.cols(), |a, b| {
        m[(p[a], p[b])]
    }))
}

/// Block-diagonal matrix `A₁(k₁) ⊕ … ⊕ A₁(k_j)`.
pub fn nearest_neighbor_blocks(block_sizes: &[usize]) -> DenseMatrix {
    let n: usize = block_sizes.iter().sum();
    let mut block_of = Vec::with_capacity(n);
    for (b, &k) in block_sizes.iter().enumerate() {
        block_of.extend(std::iter::repeat_n(b, k));
    }
    DenseMatrix::from_fn(n, n, |r, c| {
        if block_of[r] == block_of[c] && r.abs_diff(c) == 1 {
            1.0
        } else {
            0.0
        }
    })
}

/// `2cos(kπ/(n+1))` for `k = 1..=n`, ascending.
pub fn chebyshev_spectrum(n: usize) -> Vec<f64> {
    let denom = (n + 1) as f64;
    (1..=n)
        .rev()
        .map(|k| 2.0 * (k as f64 * PI / denom).cos())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrictGap {
    /// `2 − ‖A_j(n)‖`.
    pub gap: f64,
    pub norm: f64,
    /// `‖A₁(kᵢ)‖` for each block.
    pub block_norms: Vec<f64>,
}

/// Computes `2 − ‖A_j(n)‖` and checks that it is positive and that the norm
/// equals the largest block norm within `1e-10`.
pub fn verify_strict_gap(n: usize, j: usize) -> Result<StrictGap> {
    let a = build_offdiagonal(n, j)?;
    let norm = operator_norm(&a)?;
    let decomposition = block_permutation(n, j)?;
    let block_norms = decomposition
        .block_sizes
        .iter()
        .map(|&k| operator_norm(&build_offdiagonal(k, 1)?))
        .collect::<Result<Vec<_>>>()?;
    let block_max = block_norms.iter().copied().fold(0.0, f64::max);
    if (norm - block_max).abs() > 1e-10 {
        return Err(Error::StructureCheck(format!(
            "‖A_{j}({n})‖ = {norm} but the largest block norm is {block_max}"
        )));
    }
    let gap = 2.0 - norm;
    if gap <= 0.0 {
        return Err(Error::StructureCheck(format!(
            "‖A_{j}({n})‖ = {norm} is not below 2"
        )));
    }
    Ok(StrictGap {
        gap,
        norm,
        block_norms,
    })
}
