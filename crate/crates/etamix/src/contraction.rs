//! The Markov contraction lemma on signed vectors.
//!
//! For a column-stochastic matrix `A` (nonnegative, every column summing
//! to 1) and a balanced vector `u` (entries summing to 0):
//!
//! ```text
//! ||A u||_TV <= theta_A * ||u||_TV,
//! theta_A = (1/2) max_{y,y'} sum_x |A[x][y] - A[x][y']|
//! ```
//!
//! `theta_A` is the Doeblin contraction coefficient of `A`. Chained
//! applications contract by the product of the coefficients, which is the
//! engine behind the mixing bound certified in `mixing`.
//!
//! The process model stores kernels row-stochastically; the transpose
//! boundary between the two conventions lives here, in
//! [`ColumnStochasticMatrix::from_kernel`], and nowhere else.

use crate::error::{Error, Result};
use crate::model::TransitionKernel;
use crate::numeric::{half_l1, pairwise_sum};

/// Balance tolerance: the lemma is false for unbalanced vectors, so
/// exceeding this is a hard error, not a warning.
pub const BALANCE_TOL: f64 = 1e-12;

/// A real-valued vector over a finite symbol set. No intrinsic
/// invariants; balance is a checkable predicate, not a constructor
/// requirement.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedVector {
    values: Vec<f64>,
}

impl SignedVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
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

    pub fn sum(&self) -> f64 {
        pairwise_sum(&self.values)
    }

    /// Total variation norm: half the L1 norm.
    pub fn tv_norm(&self) -> f64 {
        half_l1(&self.values)
    }

    pub fn is_balanced(&self, tol: f64) -> bool {
        self.sum().abs() <= tol
    }
}

/// A square nonnegative matrix whose columns each sum to 1 within the
/// stochasticity tolerance; columns are renormalized at construction.
/// `entries[x][y]` is row `x`, column `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnStochasticMatrix {
    entries: Vec<Vec<f64>>,
}

impl ColumnStochasticMatrix {
    pub fn new(entries: Vec<Vec<f64>>) -> Result<Self> {
        let dim = entries.len();
        if entries.iter().any(|row| row.len() != dim) {
            return Err(Error::DimensionMismatch(
                "column-stochastic matrix must be square".into(),
            ));
        }
        for col in 0..dim {
            let mut sum = 0.0;
            for row in &entries {
                let v = row[col];
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "entry {v} in column {col} is negative or non-finite"
                    )));
                }
                sum += v;
            }
            if (sum - 1.0).abs() > crate::model::STOCHASTIC_TOL {
                return Err(Error::InvalidInput(format!(
                    "column {col} sums to {sum}, tolerance {:e}",
                    crate::model::STOCHASTIC_TOL
                )));
            }
        }
        let mut entries = entries;
        for col in 0..dim {
            let sum: f64 = entries.iter().map(|row| row[col]).sum();
            for row in &mut entries {
                row[col] /= sum;
            }
        }
        Ok(Self { entries })
    }

    /// Transpose a row-stochastic transition kernel:
    /// `A[next][current] = kernel(next | current)`.
    pub fn from_kernel(kernel: &TransitionKernel) -> Self {
        let dim = kernel.dim();
        let entries = (0..dim)
            .map(|x| (0..dim).map(|y| kernel.prob(y, x)).collect())
            .collect();
        // rows of a valid kernel are already normalized, so columns here
        // sum to 1 at machine precision; skip revalidation
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }
}

/// Doeblin contraction coefficient of a column-stochastic matrix:
/// half the maximal L1 distance between two columns.
pub fn theta_of_matrix(a: &ColumnStochasticMatrix) -> f64 {
    let dim = a.dim();
    let mut max = 0.0f64;
    for y in 0..dim {
        for y2 in y + 1..dim {
            let d: f64 = (0..dim)
                .map(|x| (a.entries[x][y] - a.entries[x][y2]).abs())
                .sum();
            max = max.max(0.5 * d);
        }
    }
    max
}

/// Matrix-vector product `A u`. Column-stochasticity preserves the entry
/// sum, so balanced vectors stay balanced (within rounding).
pub fn apply(a: &ColumnStochasticMatrix, u: &SignedVector) -> Result<SignedVector> {
    let dim = a.dim();
    if u.len() != dim {
        return Err(Error::DimensionMismatch(format!(
            "matrix dim {dim} vs vector dim {}",
            u.len()
        )));
    }
    let values = (0..dim)
        .map(|x| {
            u.values()
                .iter()
                .enumerate()
                .map(|(y, &uy)| a.entries[x][y] * uy)
                .sum()
        })
        .collect();
    Ok(SignedVector::new(values))
}

/// Result of folding a balanced vector through a chain of matrices, with
/// the TV norm recorded after every step.
#[derive(Debug, Clone)]
pub struct ChainApplication {
    pub result: SignedVector,
    /// `step_tv_norms[k]` is the TV norm after applying the k-th matrix.
    pub step_tv_norms: Vec<f64>,
}

/// Left-fold `matrices[last] * ... * matrices[0] * h`.
///
/// `h` must be balanced within [`BALANCE_TOL`]; the contraction guarantee
/// only holds for balanced vectors, so an unbalanced input is an error.
/// An empty chain returns `h` unchanged.
pub fn chain_apply(
    matrices: &[ColumnStochasticMatrix],
    h: &SignedVector,
) -> Result<ChainApplication> {
    let sum = h.sum();
    if sum.abs() > BALANCE_TOL {
        return Err(Error::UnbalancedInput {
            sum,
            tolerance: BALANCE_TOL,
        });
    }
    let mut current = h.clone();
    let mut step_tv_norms = Vec::with_capacity(matrices.len());
    for a in matrices {
        current = apply(a, &current)?;
        step_tv_norms.push(current.tv_norm());
    }
    Ok(ChainApplication {
        result: current,
        step_tv_norms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn csm(cols: &[&[f64]]) -> ColumnStochasticMatrix {
        // build from columns for readability
        let dim = cols.len();
        let entries = (0..dim)
            .map(|x| (0..dim).map(|y| cols[y][x]).collect())
            .collect();
        ColumnStochasticMatrix::new(entries).unwrap()
    }

    #[test]
    fn identical_columns_have_theta_zero() {
        let a = csm(&[&[0.3, 0.7], &[0.3, 0.7]]);
        assert_eq!(theta_of_matrix(&a), 0.0);
    }

    #[test]
    fn permutation_matrix_has_theta_one() {
        let a = csm(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(theta_of_matrix(&a), 1.0);
    }

    #[test]
    fn kernel_transpose_theta_matches_row_convention() {
        let kernel =
            TransitionKernel::new(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let a = ColumnStochasticMatrix::from_kernel(&kernel);
        // columns of A are the kernel's rows
        assert_eq!(a.entries()[0][0], 0.9);
        assert_eq!(a.entries()[1][0], 0.1);
        assert!((theta_of_matrix(&a) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn apply_annihilates_balanced_vectors_on_rank_one() {
        let a = csm(&[&[0.4, 0.6], &[0.4, 0.6]]);
        let u = SignedVector::new(vec![0.5, -0.5]);
        let out = apply(&a, &u).unwrap();
        for v in out.values() {
            assert!(v.abs() < 1e-15);
        }
    }

    #[test]
    fn apply_zero_is_zero() {
        let a = csm(&[&[0.9, 0.1], &[0.2, 0.8]]);
        let out = apply(&a, &SignedVector::new(vec![0.0, 0.0])).unwrap();
        assert_eq!(out.values(), &[0.0, 0.0]);
    }

    #[test]
    fn empty_chain_is_identity() {
        let h = SignedVector::new(vec![0.25, -0.25]);
        let out = chain_apply(&[], &h).unwrap();
        assert_eq!(out.result, h);
        assert!(out.step_tv_norms.is_empty());
    }

    #[test]
    fn unbalanced_input_is_rejected() {
        let a = csm(&[&[0.9, 0.1], &[0.2, 0.8]]);
        let h = SignedVector::new(vec![0.5, 0.0]);
        match chain_apply(&[a], &h) {
            Err(Error::UnbalancedInput { sum, .. }) => assert!((sum - 0.5).abs() < 1e-15),
            other => panic!("expected UnbalancedInput, got {other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a = csm(&[&[0.9, 0.1], &[0.2, 0.8]]);
        assert!(apply(&a, &SignedVector::new(vec![1.0, -0.5, -0.5])).is_err());
    }

    prop_compose! {
        fn arb_column(dim: usize)(raw in proptest::collection::vec(0.0f64..1.0, dim)) -> Vec<f64> {
            let sum: f64 = raw.iter().sum();
            if sum == 0.0 {
                let mut col = vec![0.0; dim];
                col[0] = 1.0;
                col
            } else {
                raw.iter().map(|v| v / sum).collect()
            }
        }
    }

    prop_compose! {
        fn arb_matrix(dim: usize)(cols in proptest::collection::vec(arb_column(dim), dim)) -> ColumnStochasticMatrix {
            let entries = (0..dim)
                .map(|x| (0..dim).map(|y| cols[y][x]).collect())
                .collect();
            ColumnStochasticMatrix::new(entries).unwrap()
        }
    }

    prop_compose! {
        fn arb_balanced(dim: usize)(raw in proptest::collection::vec(-1.0f64..1.0, dim)) -> SignedVector {
            let mean: f64 = raw.iter().sum::<f64>() / dim as f64;
            SignedVector::new(raw.iter().map(|v| v - mean).collect())
        }
    }

    proptest! {
        #[test]
        fn balance_is_preserved(a in arb_matrix(3), u in arb_balanced(3)) {
            let out = apply(&a, &u).unwrap();
            prop_assert!((out.sum() - u.sum()).abs() < 1e-12);
        }

        #[test]
        fn contraction_holds(a in arb_matrix(4), u in arb_balanced(4)) {
            let out = apply(&a, &u).unwrap();
            prop_assert!(out.tv_norm() <= theta_of_matrix(&a) * u.tv_norm() + 1e-12);
        }

        #[test]
        fn chains_contract_by_the_running_product(
            ms in proptest::collection::vec(arb_matrix(3), 4),
            h in arb_balanced(3),
        ) {
            let out = chain_apply(&ms, &h).unwrap();
            let mut budget = h.tv_norm();
            for (a, norm) in ms.iter().zip(&out.step_tv_norms) {
                budget *= theta_of_matrix(a);
                prop_assert!(*norm <= budget + 1e-12);
                // per-step norms can only shrink the remaining budget
                budget = budget.min(*norm);
            }
        }
    }
}
