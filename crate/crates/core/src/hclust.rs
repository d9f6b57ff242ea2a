//! Agglomerative clustering of initial clusters.
//!
//! Distances to a newly merged cluster are recomputed from its curves at every
//! step; no Lance–Williams update is used, so robust linkages see the merged
//! cluster's own central curves.

use rayon::prelude::*;

use crate::curves::CurveSet;
use crate::error::{Error, Result};
use crate::linkage::{between, ClusterTerms, LinkageKind};

/// One merge. Initial clusters carry ids `0..m`; the cluster created at step
/// `s` (0-based) gets id `m + s`.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeStep {
    pub step: usize,
    pub left: usize,
    pub right: usize,
    pub merged: usize,
    pub d2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergeHistory {
    pub initial: usize,
    pub steps: Vec<MergeStep>,
}

/// Flat labels `1..=p` for the initial clusters, numbered by first appearance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<usize>,
}

impl Partition {
    pub fn identity(m: usize) -> Self {
        Self {
            labels: (1..=m).collect(),
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_clusters(&self) -> usize {
        self.labels.iter().copied().max().unwrap_or(0)
    }

    /// Repeats each unit's label once per curve; `sizes[i]` is the number of
    /// curves in initial cluster `i`.
    pub fn expand(&self, sizes: &[usize]) -> Vec<usize> {
        self.labels
            .iter()
            .zip(sizes)
            .flat_map(|(&label, &n)| std::iter::repeat_n(label, n))
            .collect()
    }

    fn from_roots(roots: &[usize]) -> Self {
        let mut seen: Vec<usize> = Vec::new();
        let labels = roots
            .iter()
            .map(|r| match seen.iter().position(|s| s == r) {
                Some(k) => k + 1,
                None => {
                    seen.push(*r);
                    seen.len()
                }
            })
            .collect();
        Self { labels }
    }
}

struct Live {
    id: usize,
    set: CurveSet,
    terms: ClusterTerms,
}

/// Merges the closest pair of clusters until `p` remain (one if `p` is `None`).
///
/// Equal minimal distances go to the lexicographically first `(row, column)`
/// of the current cluster order; merged clusters are appended at the end.
pub fn agglomerate(
    initial: &[CurveSet],
    kind: LinkageKind,
    p: Option<usize>,
) -> Result<(MergeHistory, Partition)> {
    let m = initial.len();
    let target = p.unwrap_or(1);
    if m == 0 || target < 1 || target > m {
        return Err(Error::InvalidClusterCount {
            requested: target,
            available: m,
        });
    }
    if initial.iter().any(CurveSet::is_empty) {
        return Err(Error::EmptySet);
    }
    if initial.iter().any(|c| !c.same_grid(&initial[0])) {
        return Err(Error::GridMismatch);
    }
    let grid = initial[0].grid().clone();

    let mut live: Vec<Live> = initial
        .par_iter()
        .enumerate()
        .map(|(id, set)| {
            let terms = ClusterTerms::new(kind, &set.rows(), &grid)?;
            Ok(Live {
                id,
                set: set.clone(),
                terms,
            })
        })
        .collect::<Result<_>>()?;

    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    let values = pairs
        .par_iter()
        .map(|&(i, j)| pair_distance(kind, &live[i], &live[j], &grid))
        .collect::<Result<Vec<_>>>()?;
    let mut dist = vec![vec![0.0; m]; m];
    for (&(i, j), d) in pairs.iter().zip(values) {
        dist[i][j] = d;
        dist[j][i] = d;
    }

    let mut steps = Vec::with_capacity(m - target);
    while live.len() > target {
        let n = live.len();
        let (mut bi, mut bj, mut best) = (0, 1, f64::INFINITY);
        for i in 0..n {
            for j in i + 1..n {
                if dist[i][j] < best {
                    (bi, bj, best) = (i, j, dist[i][j]);
                }
            }
        }

        let right = live.remove(bj);
        let left = live.remove(bi);
        let merged_set = left.set.union(&right.set)?;
        let terms = ClusterTerms::new(kind, &merged_set.rows(), &grid)?;
        let merged = Live {
            id: m + steps.len(),
            set: merged_set,
            terms,
        };
        steps.push(MergeStep {
            step: steps.len(),
            left: left.id,
            right: right.id,
            merged: merged.id,
            d2: best,
        });

        dist.remove(bj);
        dist.remove(bi);
        for row in dist.iter_mut() {
            row.remove(bj);
            row.remove(bi);
        }
        let fresh = live
            .par_iter()
            .map(|other| pair_distance(kind, other, &merged, &grid))
            .collect::<Result<Vec<_>>>()?;
        for (row, &d) in dist.iter_mut().zip(&fresh) {
            row.push(d);
        }
        let mut last = fresh;
        last.push(0.0);
        dist.push(last);
        live.push(merged);
    }

    let history = MergeHistory { initial: m, steps };
    let partition = partition_after(&history, history.steps.len());
    Ok((history, partition))
}

fn pair_distance(kind: LinkageKind, a: &Live, b: &Live, grid: &crate::curves::Grid) -> Result<f64> {
    between(kind, &a.set.rows(), &a.terms, &b.set.rows(), &b.terms, grid)
}

/// Partition with `p` clusters read off a merge history.
pub fn cut_history(history: &MergeHistory, p: usize) -> Result<Partition> {
    let m = history.initial;
    let reachable = m - history.steps.len();
    if p < reachable.max(1) || p > m {
        return Err(Error::InvalidClusterCount {
            requested: p,
            available: m,
        });
    }
    Ok(partition_after(history, m - p))
}

fn partition_after(history: &MergeHistory, merges: usize) -> Partition {
    let m = history.initial;
    let mut parent: Vec<usize> = (0..m + merges).collect();
    for step in &history.steps[..merges] {
        parent[step.left] = step.merged;
        parent[step.right] = step.merged;
    }
    let roots: Vec<usize> = (0..m)
        .map(|mut x| {
            while parent[x] != x {
                x = parent[x];
            }
            x
        })
        .collect();
    Partition::from_roots(&roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::Grid;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn clusters(levels: &[f64], per: usize, t: usize) -> Vec<CurveSet> {
        let grid = Arc::new(Grid::uniform(0.0, 1.0, t).unwrap());
        levels
            .iter()
            .enumerate()
            .map(|(c, &level)| {
                let rows = (0..per)
                    .map(|i| {
                        grid.points()
                            .iter()
                            .map(|x| level + 0.1 * ((i + c) as f64 * 1.7 + 5.0 * x).sin())
                            .collect()
                    })
                    .collect();
                CurveSet::from_rows(grid.clone(), c * per, rows).unwrap()
            })
            .collect()
    }

    #[test]
    fn p_equal_to_m_is_identity() {
        let cs = clusters(&[0.0, 1.0, 2.0], 2, 5);
        let (h, part) = agglomerate(&cs, LinkageKind::WardClassic, Some(3)).unwrap();
        assert!(h.steps.is_empty());
        assert_eq!(part, Partition::identity(3));
    }

    #[test]
    fn full_run_merges_everything() {
        let cs = clusters(&[0.0, 1.0, 5.0], 2, 5);
        let (h, part) = agglomerate(&cs, LinkageKind::FunctionalWard, None).unwrap();
        assert_eq!(h.steps.len(), 2);
        assert_eq!(part.labels(), &[1, 1, 1]);
        assert_eq!((h.steps[0].left, h.steps[0].right, h.steps[0].merged), (0, 1, 3));
        assert_eq!((h.steps[1].left, h.steps[1].right, h.steps[1].merged), (2, 3, 4));
        assert!(h.steps.iter().all(|s| s.d2 >= 0.0 && s.d2.is_finite()));
    }

    #[test]
    fn ties_take_the_first_pair() {
        // Three identical singletons: every distance is zero.
        let grid = Arc::new(Grid::uniform(0.0, 1.0, 4).unwrap());
        let cs: Vec<CurveSet> = (0..3)
            .map(|i| CurveSet::from_rows(grid.clone(), i, vec![vec![1.0; 4]]).unwrap())
            .collect();
        let (h, _) = agglomerate(&cs, LinkageKind::WardClassic, None).unwrap();
        assert_eq!((h.steps[0].left, h.steps[0].right), (0, 1));
        assert_eq!((h.steps[1].left, h.steps[1].right), (2, 3));
    }

    #[test]
    fn recovers_separated_groups() {
        let cs = clusters(&[0.0, 0.05, 3.0, 3.05, 6.0, 6.1], 5, 20);
        for kind in [
            LinkageKind::WardClassic,
            LinkageKind::FunctionalWard,
            LinkageKind::Bd { tau: 0.5 },
            LinkageKind::Ms { tau: 0.5 },
        ] {
            let (_, part) = agglomerate(&cs, kind, Some(3)).unwrap();
            assert_eq!(part.labels(), &[1, 1, 2, 2, 3, 3], "{kind}");
        }
    }

    #[test]
    fn invalid_cluster_counts() {
        let cs = clusters(&[0.0, 1.0], 2, 5);
        assert!(agglomerate(&cs, LinkageKind::WardClassic, Some(0)).is_err());
        assert!(agglomerate(&cs, LinkageKind::WardClassic, Some(3)).is_err());
        assert!(agglomerate(&[], LinkageKind::WardClassic, None).is_err());
        let (h, _) = agglomerate(&cs, LinkageKind::WardClassic, None).unwrap();
        assert!(cut_history(&h, 0).is_err());
        assert!(cut_history(&h, 3).is_err());
        let (partial, _) = agglomerate(&clusters(&[0.0, 1.0, 2.0], 1, 4), LinkageKind::WardClassic, Some(2)).unwrap();
        assert!(cut_history(&partial, 1).is_err());
        assert!(cut_history(&partial, 2).is_ok());
    }

    #[test]
    fn cut_extremes() {
        let cs = clusters(&[0.0, 2.0, 4.0, 4.5], 3, 6);
        let (h, _) = agglomerate(&cs, LinkageKind::WardClassic, None).unwrap();
        assert_eq!(cut_history(&h, 4).unwrap(), Partition::identity(4));
        assert_eq!(cut_history(&h, 1).unwrap().labels(), &[1, 1, 1, 1]);
    }

    #[test]
    fn expand_repeats_labels() {
        let part = Partition::from_roots(&[7, 3, 7]);
        assert_eq!(part.labels(), &[1, 2, 1]);
        assert_eq!(part.expand(&[2, 1, 3]), vec![1, 1, 2, 1, 1, 1]);
        assert_eq!(part.num_clusters(), 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn cut_matches_early_stop(
            levels in prop::collection::vec(-5.0..5.0f64, 2..10),
            kind_ix in 0usize..4,
        ) {
            let kind = [
                LinkageKind::WardClassic,
                LinkageKind::FunctionalWard,
                LinkageKind::Ms { tau: 0.5 },
                LinkageKind::Bd { tau: 0.5 },
            ][kind_ix];
            let cs = clusters(&levels, 4, 8);
            let m = cs.len();
            let (full, root) = agglomerate(&cs, kind, None).unwrap();
            prop_assert_eq!(full.steps.len(), m - 1);
            prop_assert_eq!(root.num_clusters(), 1);
            let (again, _) = agglomerate(&cs, kind, None).unwrap();
            prop_assert_eq!(&again, &full);
            for p in 1..=m {
                let (h, part) = agglomerate(&cs, kind, Some(p)).unwrap();
                prop_assert_eq!(h.steps.len(), m - p);
                prop_assert_eq!(part.num_clusters(), p);
                prop_assert_eq!(cut_history(&full, p).unwrap(), part);
            }
        }
    }
}
