//! Shannon entropy helpers, in bits.

/// Entropy of a class distribution given as counts.
pub fn entropy(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Entropy of a two-class split with `pos` positives out of `total`.
pub fn binary_entropy(pos: usize, total: usize) -> f64 {
    entropy(&[pos, total - pos])
}

/// Number of classes actually present.
pub fn class_count(pos: usize, total: usize) -> usize {
    usize::from(pos > 0) + usize::from(pos < total)
}
