//! Finite-state process specifications.
//!
//! A [`ProcessModel`] is a length-`n`, possibly time-inhomogeneous hidden
//! Markov model over finite hidden and observed alphabets:
//!
//! ```text
//! hidden chain:   X̄_1 ~ initial,   X̄_{k+1} | X̄_k ~ kernels[k]     (k = 1..n-1)
//! observations:   X_ℓ | X̄_ℓ ~ emissions[ℓ]                        (ℓ = 1..n)
//! ```
//!
//! A plain Markov chain is the special case of identity emissions; it is
//! stored expanded that way so no downstream code needs a special case.
//! Homogeneous models are likewise stored with the kernel repeated.
//!
//! Validation collects *all* invariant violations as data rather than
//! failing on the first one. Inputs that pass validation are renormalized
//! (each row divided by its own sum) so that downstream marginalizations
//! sum to 1 at machine precision instead of inheriting input rounding.

use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;
use std::fmt;

/// Absolute tolerance on row sums for stochasticity checks.
pub const STOCHASTIC_TOL: f64 = 1e-9;

/// An ordered set of distinct symbol labels.
///
/// The ordering is fixed at construction and defines the integer indexing
/// used by every table and matrix in the crate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::InvalidModel("alphabet is empty".into()));
        }
        for (i, a) in symbols.iter().enumerate() {
            for b in &symbols[i + 1..] {
                if a == b {
                    return Err(Error::InvalidModel(format!("duplicate symbol {a:?}")));
                }
            }
        }
        Ok(Self { symbols })
    }

    /// Alphabet `{"0", "1", ...}` of the given size.
    pub fn indexed(size: usize) -> Self {
        Self {
            symbols: (0..size).map(|i| i.to_string()).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn label(&self, index: usize) -> &str {
        &self.symbols[index]
    }

    pub fn labels(&self) -> &[String] {
        &self.symbols
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == label)
    }
}

/// A probability distribution over the symbols of an alphabet.
///
/// Constructed only through validation; weights are nonnegative and have
/// been renormalized to sum to 1 at machine precision.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    weights: Vec<f64>,
}

impl Distribution {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point_mass(index: usize, dim: usize) -> Self {
        let mut weights = vec![0.0; dim];
        weights[index] = 1.0;
        Self { weights }
    }

    pub fn uniform(dim: usize) -> Self {
        Self {
            weights: vec![1.0 / dim as f64; dim],
        }
    }

    fn check(weights: &[f64], dim: usize, component: &str, out: &mut Vec<Violation>) {
        if weights.len() != dim {
            out.push(Violation {
                component: component.to_string(),
                invariant: format!("length {} != alphabet size {}", weights.len(), dim),
                residual: None,
            });
            return;
        }
        for (i, &w) in weights.iter().enumerate() {
            if !(w >= 0.0) || !w.is_finite() {
                out.push(Violation {
                    component: format!("{component}[{i}]"),
                    invariant: format!("weight {w} is negative or non-finite"),
                    residual: Some(w),
                });
            }
        }
        let sum = pairwise_sum(weights);
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            out.push(Violation {
                component: component.to_string(),
                invariant: format!("row sum {sum}, tolerance {STOCHASTIC_TOL:e}"),
                residual: Some(sum - 1.0),
            });
        }
    }

    /// Divide by the (pairwise) sum; called only after validation passed.
    fn renormalized(weights: &[f64]) -> Self {
        let sum = pairwise_sum(weights);
        Self {
            weights: weights.iter().map(|w| w / sum).collect(),
        }
    }
}

/// Row-stochastic transition kernel over the hidden alphabet.
///
/// `rows[u]` is the distribution of the next state conditioned on current
/// state `u`. The column-stochastic transpose used by the contraction
/// machinery is produced in `contraction::ColumnStochasticMatrix`, nowhere
/// else.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionKernel {
    rows: Vec<Distribution>,
}

impl TransitionKernel {
    /// Validate and renormalize a square row-stochastic matrix.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.len();
        let mut violations = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            Distribution::check(row, dim, &format!("row[{r}]"), &mut violations);
        }
        if !violations.is_empty() {
            let report = ValidationReport { violations };
            return Err(Error::InvalidModel(report.to_string()));
        }
        Ok(Self {
            rows: rows.iter().map(|r| Distribution::renormalized(r)).collect(),
        })
    }

    pub fn rows(&self) -> &[Distribution] {
        &self.rows
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// P(next = v | current = u).
    pub fn prob(&self, u: usize, v: usize) -> f64 {
        self.rows[u].weights()[v]
    }
}

/// Per-hidden-symbol emission distributions over the observed alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionKernel {
    rows: Vec<Distribution>,
}

impl EmissionKernel {
    /// Validate and renormalize one emission row per hidden symbol, each a
    /// distribution over an observed alphabet of size `observed_dim`.
    pub fn new(rows: Vec<Vec<f64>>, observed_dim: usize) -> Result<Self> {
        let mut violations = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            Distribution::check(row, observed_dim, &format!("row[{r}]"), &mut violations);
        }
        if !violations.is_empty() {
            let report = ValidationReport { violations };
            return Err(Error::InvalidModel(report.to_string()));
        }
        Ok(Self {
            rows: rows.iter().map(|r| Distribution::renormalized(r)).collect(),
        })
    }

    pub fn rows(&self) -> &[Distribution] {
        &self.rows
    }

    /// q(x | hidden state u).
    pub fn prob(&self, u: usize, x: usize) -> f64 {
        self.rows[u].weights()[x]
    }

    /// Point-mass emissions mapping each hidden symbol to itself.
    pub fn identity(dim: usize) -> Self {
        Self {
            rows: (0..dim).map(|i| Distribution::point_mass(i, dim)).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, row)| {
            row.weights()
                .iter()
                .enumerate()
                .all(|(j, &w)| w == if i == j { 1.0 } else { 0.0 })
        })
    }
}

/// A single validation finding: which component, which invariant, and the
/// measured residual when one exists.
#[derive(Debug, Clone)]
pub struct Violation {
    pub component: String,
    pub invariant: String,
    pub residual: Option<f64>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.component, self.invariant)
    }
}

/// Outcome of validating a [`ModelSpec`]. Violations are data, not errors;
/// the list is deterministic and order-stable for a fixed spec.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            write!(f, "OK")
        } else {
            for (i, v) in self.violations.iter().enumerate() {
                if i > 0 {
                    writeln!(f)?;
                }
                write!(f, "{v}")?;
            }
            Ok(())
        }
    }
}

/// Unvalidated model description, as it arrives from a config file or a
/// test. `validate` reports every violation; `build` validates and then
/// constructs the renormalized [`ProcessModel`].
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub n: usize,
    pub hidden: Alphabet,
    pub observed: Alphabet,
    pub initial: Vec<f64>,
    pub kernels: Vec<Vec<Vec<f64>>>,
    pub emissions: Vec<Vec<Vec<f64>>>,
}

impl ModelSpec {
    pub fn validate(&self) -> ValidationReport {
        let mut out = Vec::new();
        let h = self.hidden.size();
        let s = self.observed.size();

        if self.n < 1 {
            out.push(Violation {
                component: "n".into(),
                invariant: "sequence length must be >= 1".into(),
                residual: None,
            });
            return ValidationReport { violations: out };
        }

        Distribution::check(&self.initial, h, "initial", &mut out);

        if self.kernels.len() != self.n - 1 {
            out.push(Violation {
                component: "kernels".into(),
                invariant: format!("kernels length {} != n-1 = {}", self.kernels.len(), self.n - 1),
                residual: None,
            });
        }
        for (k, kernel) in self.kernels.iter().enumerate() {
            if kernel.len() != h {
                out.push(Violation {
                    component: format!("kernels[{k}]"),
                    invariant: format!("{} rows, expected {}", kernel.len(), h),
                    residual: None,
                });
                continue;
            }
            for (r, row) in kernel.iter().enumerate() {
                Distribution::check(row, h, &format!("kernels[{k}].row[{r}]"), &mut out);
            }
        }

        if self.emissions.len() != self.n {
            out.push(Violation {
                component: "emissions".into(),
                invariant: format!("emissions length {} != n = {}", self.emissions.len(), self.n),
                residual: None,
            });
        }
        for (l, emission) in self.emissions.iter().enumerate() {
            if emission.len() != h {
                out.push(Violation {
                    component: format!("emissions[{l}]"),
                    invariant: format!("{} rows, expected {}", emission.len(), h),
                    residual: None,
                });
                continue;
            }
            for (r, row) in emission.iter().enumerate() {
                Distribution::check(row, s, &format!("emissions[{l}].row[{r}]"), &mut out);
            }
        }

        ValidationReport { violations: out }
    }

    /// Raw (pre-renormalization) sum of every distribution row, keyed by
    /// component path. Reports echo these so renormalization is auditable.
    pub fn row_sums(&self) -> Vec<(String, f64)> {
        let mut out = vec![("initial".to_string(), pairwise_sum(&self.initial))];
        for (k, kernel) in self.kernels.iter().enumerate() {
            for (r, row) in kernel.iter().enumerate() {
                out.push((format!("kernels[{k}].row[{r}]"), pairwise_sum(row)));
            }
        }
        for (l, emission) in self.emissions.iter().enumerate() {
            for (r, row) in emission.iter().enumerate() {
                out.push((format!("emissions[{l}].row[{r}]"), pairwise_sum(row)));
            }
        }
        out
    }

    pub fn build(self) -> Result<ProcessModel> {
        let report = self.validate();
        if !report.is_ok() {
            return Err(Error::InvalidModel(report.to_string()));
        }
        let initial = Distribution::renormalized(&self.initial);
        let kernels = self
            .kernels
            .iter()
            .map(|k| TransitionKernel {
                rows: k.iter().map(|r| Distribution::renormalized(r)).collect(),
            })
            .collect();
        let emissions = self
            .emissions
            .iter()
            .map(|e| EmissionKernel {
                rows: e.iter().map(|r| Distribution::renormalized(r)).collect(),
            })
            .collect();
        Ok(ProcessModel {
            n: self.n,
            hidden: self.hidden,
            observed: self.observed,
            initial,
            kernels,
            emissions,
        })
    }
}

/// A validated, renormalized, immutable hidden Markov model.
///
/// Positions are 1-based throughout the crate: `kernel(k)` governs the
/// step from position `k` to `k+1` (`1 <= k < n`) and `emission(l)`
/// emits at position `l` (`1 <= l <= n`).
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessModel {
    n: usize,
    hidden: Alphabet,
    observed: Alphabet,
    initial: Distribution,
    kernels: Vec<TransitionKernel>,
    emissions: Vec<EmissionKernel>,
}

impl ProcessModel {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hidden(&self) -> &Alphabet {
        &self.hidden
    }

    pub fn observed(&self) -> &Alphabet {
        &self.observed
    }

    pub fn initial(&self) -> &Distribution {
        &self.initial
    }

    /// Kernel for the step `k -> k+1`, 1-based.
    pub fn kernel(&self, k: usize) -> &TransitionKernel {
        &self.kernels[k - 1]
    }

    pub fn kernels(&self) -> &[TransitionKernel] {
        &self.kernels
    }

    /// Emission kernel at position `l`, 1-based.
    pub fn emission(&self, l: usize) -> &EmissionKernel {
        &self.emissions[l - 1]
    }

    pub fn emissions(&self) -> &[EmissionKernel] {
        &self.emissions
    }

    /// True when every transition kernel is bit-identical.
    pub fn is_homogeneous(&self) -> bool {
        self.kernels.windows(2).all(|w| w[0] == w[1])
    }

    /// True when every emission kernel is the identity on a shared alphabet.
    pub fn has_identity_emissions(&self) -> bool {
        self.hidden.size() == self.observed.size()
            && self.emissions.iter().all(EmissionKernel::is_identity)
    }

    /// Embed a Markov chain as an HMM: observed alphabet = hidden alphabet,
    /// every emission row a point mass on the matching symbol. The observed
    /// law of the result is exactly the chain's own law.
    pub fn markov_as_hmm(
        n: usize,
        alphabet: Alphabet,
        initial: Vec<f64>,
        kernels: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let dim = alphabet.size();
        let identity: Vec<Vec<f64>> = (0..dim)
            .map(|i| {
                let mut row = vec![0.0; dim];
                row[i] = 1.0;
                row
            })
            .collect();
        ModelSpec {
            n,
            hidden: alphabet.clone(),
            observed: alphabet,
            initial,
            kernels,
            emissions: vec![identity; n],
        }
        .build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state_chain_spec(n: usize) -> ModelSpec {
        ModelSpec {
            n,
            hidden: Alphabet::indexed(2),
            observed: Alphabet::indexed(2),
            initial: vec![0.5, 0.5],
            kernels: vec![vec![vec![0.9, 0.1], vec![0.2, 0.8]]; n - 1],
            emissions: vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]; n],
        }
    }

    #[test]
    fn valid_two_state_chain_passes() {
        assert!(two_state_chain_spec(3).validate().is_ok());
    }

    #[test]
    fn bad_row_sum_is_reported_with_residual() {
        let mut spec = two_state_chain_spec(3);
        spec.kernels[0][0] = vec![0.9, 0.08]; // sums to 0.98
        let report = spec.validate();
        assert_eq!(report.violations.len(), 1);
        let v = &report.violations[0];
        assert_eq!(v.component, "kernels[0].row[0]");
        assert!(v.invariant.contains("row sum 0.98"));
        assert!((v.residual.unwrap() + 0.02).abs() < 1e-12);
    }

    #[test]
    fn emissions_length_mismatch_is_reported() {
        let mut spec = two_state_chain_spec(3);
        spec.emissions.pop();
        let report = spec.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| v.component == "emissions" && v.invariant.contains("length")));
    }

    #[test]
    fn negative_weight_is_reported() {
        let mut spec = two_state_chain_spec(2);
        spec.initial = vec![1.2, -0.2];
        let report = spec.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| v.component == "initial[1]"));
    }

    #[test]
    fn validation_is_order_stable() {
        let mut spec = two_state_chain_spec(3);
        spec.kernels[0][0] = vec![0.9, 0.08];
        spec.emissions[2][1] = vec![0.3, 0.3];
        let a: Vec<String> = spec.validate().violations.iter().map(|v| v.to_string()).collect();
        let b: Vec<String> = spec.validate().violations.iter().map(|v| v.to_string()).collect();
        assert_eq!(a, b);
        // kernel violations come before emission violations
        assert!(a[0].starts_with("kernels"));
    }

    #[test]
    fn markov_as_hmm_has_identity_emissions() {
        let m = ProcessModel::markov_as_hmm(
            2,
            Alphabet::indexed(2),
            vec![0.5, 0.5],
            vec![vec![vec![0.9, 0.1], vec![0.2, 0.8]]],
        )
        .unwrap();
        assert!(m.has_identity_emissions());
        assert_eq!(m.observed(), m.hidden());
        for (i, row) in m.emission(1).rows().iter().enumerate() {
            for (j, &w) in row.weights().iter().enumerate() {
                assert_eq!(w, if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn markov_as_hmm_keeps_kernels_bit_identical() {
        let kernels = vec![vec![vec![0.9, 0.1], vec![0.2, 0.8]]; 3];
        let chain = ModelSpec {
            n: 4,
            hidden: Alphabet::indexed(2),
            observed: Alphabet::indexed(2),
            initial: vec![0.5, 0.5],
            kernels: kernels.clone(),
            emissions: vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]; 4],
        }
        .build()
        .unwrap();
        let hmm =
            ProcessModel::markov_as_hmm(4, Alphabet::indexed(2), vec![0.5, 0.5], kernels).unwrap();
        for k in 1..4 {
            for u in 0..2 {
                for v in 0..2 {
                    assert_eq!(chain.kernel(k).prob(u, v).to_bits(), hmm.kernel(k).prob(u, v).to_bits());
                }
            }
        }
    }

    #[test]
    fn renormalization_makes_rows_sum_to_one() {
        let mut spec = two_state_chain_spec(3);
        // within tolerance but not exact
        spec.initial = vec![0.5 + 4e-10, 0.5];
        let model = spec.build().unwrap();
        let sum: f64 = model.initial().weights().iter().sum();
        assert!((sum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn homogeneity_detection() {
        let m = two_state_chain_spec(4).build().unwrap();
        assert!(m.is_homogeneous());
    }

    #[test]
    fn duplicate_labels_rejected() {
        assert!(Alphabet::new(["a", "a"]).is_err());
    }
}
