//! Agreement between a clustering and the ground truth.

use std::collections::HashMap;

use crate::error::{Error, Result};

fn check_lengths(a: &[usize], b: &[usize]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LabelLengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

fn choose2(k: usize) -> i128 {
    let k = k as i128;
    k * (k - 1) / 2
}

/// Hubert–Arabie adjusted Rand index from the contingency table.
///
/// Negative values are returned as they are. When both partitions are
/// trivial (all units in one cluster, or all singletons) the index is 1 if
/// they coincide.
pub fn ari(a: &[usize], b: &[usize]) -> Result<f64> {
    check_lengths(a, b)?;
    if a.len() < 2 {
        return Err(Error::InvalidParameter("ARI needs at least two units".into()));
    }
    let mut rows: HashMap<usize, usize> = HashMap::new();
    let mut cols: HashMap<usize, usize> = HashMap::new();
    let mut cells: HashMap<(usize, usize), usize> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
        *cells.entry((x, y)).or_default() += 1;
    }
    // Pair counts are exact integers; scaling numerator and denominator by
    // `2·C(n,2)` leaves a single rounding in the final division.
    let index: i128 = cells.values().map(|&c| choose2(c)).sum();
    let sum_rows: i128 = rows.values().map(|&c| choose2(c)).sum();
    let sum_cols: i128 = cols.values().map(|&c| choose2(c)).sum();
    let total = choose2(a.len());
    let numerator = 2 * total * index - 2 * sum_rows * sum_cols;
    let denominator = total * (sum_rows + sum_cols) - 2 * sum_rows * sum_cols;
    if denominator == 0 {
        return Ok(if 2 * index == sum_rows + sum_cols { 1.0 } else { 0.0 });
    }
    Ok(numerator as f64 / denominator as f64)
}

/// Average over ground-truth classes of the best Dice overlap
/// `2|G ∩ A| / (|G| + |A|)` with any predicted cluster.
pub fn sim(ground: &[usize], predicted: &[usize]) -> Result<f64> {
    check_lengths(ground, predicted)?;
    if ground.is_empty() {
        return Err(Error::InvalidParameter("SIM needs at least one unit".into()));
    }
    let mut g_sizes: HashMap<usize, usize> = HashMap::new();
    let mut a_sizes: HashMap<usize, usize> = HashMap::new();
    let mut cells: HashMap<(usize, usize), usize> = HashMap::new();
    for (&g, &a) in ground.iter().zip(predicted) {
        *g_sizes.entry(g).or_default() += 1;
        *a_sizes.entry(a).or_default() += 1;
        *cells.entry((g, a)).or_default() += 1;
    }
    let mut best: HashMap<usize, f64> = g_sizes.keys().map(|&g| (g, 0.0)).collect();
    for (&(g, a), &n) in &cells {
        let dice = 2.0 * n as f64 / (g_sizes[&g] + a_sizes[&a]) as f64;
        let entry = best.get_mut(&g).expect("every ground label was seeded");
        if dice > *entry {
            *entry = dice;
        }
    }
    // Sum in label order so the result does not depend on hash iteration order.
    let mut labels: Vec<usize> = best.keys().copied().collect();
    labels.sort_unstable();
    Ok(labels.iter().map(|g| best[g]).sum::<f64>() / labels.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Rand-style counts over all unordered pairs, adjusted with the
    /// pair-cell form of the expected index.
    fn ari_pairs(a: &[usize], b: &[usize]) -> f64 {
        let (mut n11, mut n10, mut n01, mut n00) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..a.len() {
            for j in i + 1..a.len() {
                match (a[i] == a[j], b[i] == b[j]) {
                    (true, true) => n11 += 1.0,
                    (true, false) => n10 += 1.0,
                    (false, true) => n01 += 1.0,
                    (false, false) => n00 += 1.0,
                }
            }
        }
        let total: f64 = n11 + n10 + n01 + n00;
        let expected = (n11 + n10) * (n11 + n01) / total;
        let max = 0.5 * ((n11 + n10) + (n11 + n01));
        if max == expected {
            return if n10 + n01 == 0.0 { 1.0 } else { 0.0 };
        }
        (n11 - expected) / (max - expected)
    }

    #[test]
    fn identical_partitions_score_one() {
        let a = [1, 1, 2, 2, 3, 3, 3];
        assert_eq!(ari(&a, &a).unwrap(), 1.0);
        assert_eq!(sim(&a, &a).unwrap(), 1.0);
        let renamed = [9, 9, 4, 4, 0, 0, 0];
        assert_eq!(ari(&a, &renamed).unwrap(), 1.0);
        assert_eq!(sim(&a, &renamed).unwrap(), 1.0);
    }

    #[test]
    fn crossed_partitions() {
        assert_eq!(ari(&[1, 1, 2, 2], &[1, 2, 1, 2]).unwrap(), -0.5);
        assert!((ari_pairs(&[1, 1, 2, 2], &[1, 2, 1, 2]) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn sim_worked_example() {
        let s = sim(&[1, 1, 2, 2], &[1, 1, 1, 2]).unwrap();
        assert!((s - 11.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn sim_is_not_symmetric() {
        let g = [1, 1, 2, 3];
        let a = [1, 1, 1, 1];
        assert_ne!(sim(&g, &a).unwrap(), sim(&a, &g).unwrap());
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(ari(&[1, 2], &[1]), Err(Error::LabelLengthMismatch { left: 2, right: 1 })));
        assert!(matches!(sim(&[1], &[1, 2]), Err(Error::LabelLengthMismatch { .. })));
    }

    fn labelling() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
        (2usize..=30).prop_flat_map(|n| {
            (prop::collection::vec(0usize..5, n), prop::collection::vec(0usize..5, n))
        })
    }

    proptest! {
        #[test]
        fn contingency_matches_pair_enumeration((a, b) in labelling()) {
            let fast = ari(&a, &b).unwrap();
            prop_assert!((fast - ari_pairs(&a, &b)).abs() < 1e-12);
            prop_assert!(fast <= 1.0 + 1e-12);
            prop_assert_eq!(fast, ari(&b, &a).unwrap());
        }

        #[test]
        fn relabelling_invariance((a, b) in labelling(), shift in 1usize..50) {
            let ra: Vec<usize> = a.iter().map(|x| (4 - x) * 7 + shift).collect();
            let rb: Vec<usize> = b.iter().map(|x| x * 3 + 2 * shift).collect();
            prop_assert!((ari(&a, &b).unwrap() - ari(&ra, &rb).unwrap()).abs() < 1e-12);
            prop_assert!((sim(&a, &b).unwrap() - sim(&ra, &rb).unwrap()).abs() < 1e-12);
            let s = sim(&a, &b).unwrap();
            prop_assert!((0.0..=1.0).contains(&s));
        }
    }
}
