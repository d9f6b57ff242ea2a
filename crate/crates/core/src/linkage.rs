//! Inter-cluster squared distances.
//!
//! All four linkages share the shape `D²(a, b) = S(a ∪ b) - S(a) - S(b)` for a
//! per-cluster spread `S`:
//!
//! | kind             | `S(C)`                                  |
//! |------------------|-----------------------------------------|
//! | `WardClassic`    | sum of squared distances to the centroid |
//! | `FunctionalWard` | `|C| · W{B(C)}`                         |
//! | `Ms`             | `|C| · W{B(C*)}`, MS-plot central curves |
//! | `Bd`             | `|C| · W{B(C**)}`, MBD central curves   |
//!
//! The robust kinds fall back to `WardClassic` when a cluster is too small to
//! select central curves from: MS needs `|a ∪ b| > 12` and at least 12 curves
//! in each operand, BD needs at least 4 curves in each operand.
//!
//! Every value is computed so that `D²(a, b) == D²(b, a)` holds bit for bit.

use std::fmt;

use rayon::prelude::*;

use crate::curves::{rows_band_width, CurveSet, Grid};
use crate::depth::{self, BD_MIN_CURVES, MS_MIN_CURVES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkageKind {
    WardClassic,
    FunctionalWard,
    Ms { tau: f64 },
    Bd { tau: f64 },
}

impl LinkageKind {
    pub const DEFAULT_TAU: f64 = 0.5;

    pub fn ms(tau: f64) -> Result<Self> {
        depth::check_tau(tau)?;
        Ok(Self::Ms { tau })
    }

    pub fn bd(tau: f64) -> Result<Self> {
        depth::check_tau(tau)?;
        Ok(Self::Bd { tau })
    }

    /// Parses `ward`, `fward`, `ms` or `bd`; `tau` is only used by the robust kinds.
    pub fn from_name(name: &str, tau: f64) -> Result<Self> {
        match name {
            "ward" => Ok(Self::WardClassic),
            "fward" => Ok(Self::FunctionalWard),
            "ms" => Self::ms(tau),
            "bd" => Self::bd(tau),
            other => Err(Error::InvalidParameter(format!("unknown linkage {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::WardClassic => "ward",
            Self::FunctionalWard => "fward",
            Self::Ms { .. } => "ms",
            Self::Bd { .. } => "bd",
        }
    }

    pub fn tau(&self) -> Option<f64> {
        match *self {
            Self::Ms { tau } | Self::Bd { tau } => Some(tau),
            _ => None,
        }
    }

    pub fn distance(&self, a: &CurveSet, b: &CurveSet) -> Result<f64> {
        if !a.same_grid(b) {
            return Err(Error::GridMismatch);
        }
        if a.is_empty() || b.is_empty() {
            return Err(Error::EmptySet);
        }
        let grid = a.grid();
        let (ra, rb) = (a.rows(), b.rows());
        let ta = ClusterTerms::new(*self, &ra, grid)?;
        let tb = ClusterTerms::new(*self, &rb, grid)?;
        between(*self, &ra, &ta, &rb, &tb, grid)
    }
}

impl fmt::Display for LinkageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.tau() {
            Some(tau) => write!(f, "{}(tau={tau})", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

/// Conventional Ward's linkage: increase in the sum of squared errors, each
/// curve taken as the vector of its grid values.
pub fn ward_classic(a: &CurveSet, b: &CurveSet) -> Result<f64> {
    LinkageKind::WardClassic.distance(a, b)
}

/// Increase in size-weighted band width.
pub fn functional_ward(a: &CurveSet, b: &CurveSet) -> Result<f64> {
    LinkageKind::FunctionalWard.distance(a, b)
}

pub fn ms_linkage(a: &CurveSet, b: &CurveSet, tau: f64) -> Result<f64> {
    LinkageKind::ms(tau)?.distance(a, b)
}

pub fn bd_linkage(a: &CurveSet, b: &CurveSet, tau: f64) -> Result<f64> {
    LinkageKind::bd(tau)?.distance(a, b)
}

/// Per-cluster quantities reused across every pair the cluster takes part in.
#[derive(Debug, Clone)]
pub(crate) struct ClusterTerms {
    size: f64,
    centroid: Vec<f64>,
    /// `|C| · W{B(·)}` for the kind's curve selection, `None` when the
    /// cluster is too small to select from.
    spread: Option<f64>,
}

impl ClusterTerms {
    pub(crate) fn new(kind: LinkageKind, rows: &[&[f64]], grid: &Grid) -> Result<Self> {
        let size = rows.len() as f64;
        let centroid = column_sums(rows).into_iter().map(|s| s / size).collect();
        let spread = spread(kind, rows, grid)?;
        Ok(Self {
            size,
            centroid,
            spread,
        })
    }
}

fn spread(kind: LinkageKind, rows: &[&[f64]], grid: &Grid) -> Result<Option<f64>> {
    let n = rows.len();
    let selected = match kind {
        LinkageKind::WardClassic => return Ok(None),
        LinkageKind::FunctionalWard => return Ok(Some(n as f64 * rows_band_width(rows, grid))),
        LinkageKind::Ms { tau } if n >= MS_MIN_CURVES => depth::central_by_ms_rows(rows, grid, tau)?,
        LinkageKind::Bd { tau } if n >= BD_MIN_CURVES => depth::central_by_bd_rows(rows, grid, tau)?,
        _ => return Ok(None),
    };
    let central: Vec<&[f64]> = selected.iter().map(|&i| rows[i]).collect();
    Ok(Some(n as f64 * rows_band_width(&central, grid)))
}

fn column_sums(rows: &[&[f64]]) -> Vec<f64> {
    let mut sums = vec![0.0; rows[0].len()];
    for row in rows {
        for (s, v) in sums.iter_mut().zip(row.iter()) {
            *s += v;
        }
    }
    sums
}

/// `SSE(a ∪ b) - SSE(a) - SSE(b)` in its centroid form
/// `|a||b| / (|a| + |b|) · ‖ȳ_a - ȳ_b‖²`, which is exactly symmetric.
fn ward_between(ta: &ClusterTerms, tb: &ClusterTerms) -> f64 {
    let gap: f64 = ta
        .centroid
        .iter()
        .zip(&tb.centroid)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    ta.size * tb.size / (ta.size + tb.size) * gap
}

pub(crate) fn between(
    kind: LinkageKind,
    ra: &[&[f64]],
    ta: &ClusterTerms,
    rb: &[&[f64]],
    tb: &ClusterTerms,
    grid: &Grid,
) -> Result<f64> {
    let union_len = ra.len() + rb.len();
    let fallback = match kind {
        LinkageKind::WardClassic => true,
        LinkageKind::FunctionalWard => false,
        LinkageKind::Ms { .. } => union_len <= MS_MIN_CURVES || ta.spread.is_none() || tb.spread.is_none(),
        LinkageKind::Bd { .. } => ta.spread.is_none() || tb.spread.is_none(),
    };
    if fallback {
        return Ok(ward_between(ta, tb));
    }
    let union: Vec<&[f64]> = ra.iter().chain(rb).copied().collect();
    let union_spread = spread(kind, &union, grid)?.expect("union is at least as large as its parts");
    let (sa, sb) = (ta.spread.unwrap_or(0.0), tb.spread.unwrap_or(0.0));
    Ok(union_spread - (sa + sb))
}

/// Symmetric matrix of squared linkage distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    size: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_fn(size: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = vec![0.0; size * size];
        for i in 0..size {
            for j in i + 1..size {
                let d = f(i, j);
                values[i * size + j] = d;
                values[j * size + i] = d;
            }
        }
        Self { size, values }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.size..(i + 1) * self.size]
    }

    /// Matrix with rows and columns reordered so that new index `k` is old `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self::from_fn(order.len(), |i, j| self.get(order[i], order[j]))
    }
}

/// Pairwise linkage distances between `clusters`, evaluated in parallel.
pub fn distance_matrix(clusters: &[CurveSet], kind: LinkageKind) -> Result<DistanceMatrix> {
    let m = clusters.len();
    if m < 2 {
        return Err(Error::InvalidClusterCount {
            requested: 2,
            available: m,
        });
    }
    let grid = clusters[0].grid();
    if clusters.iter().any(|c| !c.same_grid(&clusters[0])) {
        return Err(Error::GridMismatch);
    }
    if clusters.iter().any(CurveSet::is_empty) {
        return Err(Error::EmptySet);
    }
    let rows: Vec<Vec<&[f64]>> = clusters.iter().map(CurveSet::rows).collect();
    let terms = rows
        .par_iter()
        .map(|r| ClusterTerms::new(kind, r, grid))
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    let dists = pairs
        .par_iter()
        .map(|&(i, j)| between(kind, &rows[i], &terms[i], &rows[j], &terms[j], grid))
        .collect::<Result<Vec<_>>>()?;
    let mut it = dists.into_iter();
    Ok(DistanceMatrix::from_fn(m, |_, _| it.next().expect("one value per pair")))
}
