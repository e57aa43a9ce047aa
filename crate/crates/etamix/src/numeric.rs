//! Small numeric helpers used by the marginalization code.

/// Pairwise (tree) summation.
///
/// Plain left-to-right accumulation on a table with 2^24 entries can lose
/// ~1e-10 of relative accuracy; pairwise summation keeps the rounding error
/// at O(log n) ulps, which the 1e-12 tolerances downstream rely on.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Pairwise summation of `f(i)` for `i` in `lo..hi` without materializing
/// the addends. `f` is invoked exactly once per index, in increasing order,
/// so accumulation stays deterministic.
pub fn pairwise_sum_by(lo: usize, hi: usize, f: &mut impl FnMut(usize) -> f64) -> f64 {
    const LEAF: usize = 32;
    if hi - lo <= LEAF {
        let mut acc = 0.0;
        for i in lo..hi {
            acc += f(i);
        }
        return acc;
    }
    let mid = lo + (hi - lo) / 2;
    pairwise_sum_by(lo, mid, f) + pairwise_sum_by(mid, hi, f)
}

/// Half the L1 norm of a signed vector, i.e. its total variation norm.
pub fn half_l1(values: &[f64]) -> f64 {
    0.5 * values.iter().map(|v| v.abs()).sum::<f64>()
}

/// Half the L1 distance between two equal-length slices.
///
/// Callers guarantee equal lengths; the public, length-checked entry point
/// is `inference::tv_distance`.
pub(crate) fn half_l1_diff(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}
