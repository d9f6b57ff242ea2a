//! Sampled functional data: grids, curves, curve sets and bands.
//!
//! Every integral over the domain is a trapezoidal sum on the stored grid,
//! divided by the interval length `λ(I)`. The normalised weights are computed
//! once per grid and shared by all curves sampled on it.

use std::collections::HashSet;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Ordered sampling points on an interval of length `λ(I)`.
#[derive(Debug, Clone)]
pub struct Grid {
    points: Vec<f64>,
    interval_length: f64,
    /// Trapezoid weights divided by the interval length.
    weights: Vec<f64>,
}

impl Grid {
    pub fn new(points: Vec<f64>, interval_length: f64) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidGrid("non-finite grid point".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("points must be strictly increasing".into()));
        }
        if !(interval_length.is_finite() && interval_length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "interval length must be positive, got {interval_length}"
            )));
        }
        let weights = trapezoid_weights(&points)
            .into_iter()
            .map(|w| w / interval_length)
            .collect();
        Ok(Self {
            points,
            interval_length,
            weights,
        })
    }

    /// `len` equally spaced points covering `[start, end]`, with `λ(I) = end - start`.
    pub fn uniform(start: f64, end: f64, len: usize) -> Result<Self> {
        if len < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {len}")));
        }
        let step = (end - start) / (len - 1) as f64;
        let mut points: Vec<f64> = (0..len).map(|j| start + step * j as f64).collect();
        points[len - 1] = end;
        Self::new(points, end - start)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn interval_length(&self) -> f64 {
        self.interval_length
    }

    /// Quadrature weights `w_j` such that `Σ w_j f(t_j) ≈ (1/λ(I)) ∫ f dt`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `(1/λ(I)) ∫ f dt` for `f` sampled on this grid.
    pub fn mean_integral(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points && self.interval_length == other.interval_length
    }
}

fn trapezoid_weights(points: &[f64]) -> Vec<f64> {
    let n = points.len();
    let mut weights = vec![0.0; n];
    for j in 0..n - 1 {
        let half = 0.5 * (points[j + 1] - points[j]);
        weights[j] += half;
        weights[j + 1] += half;
    }
    weights
}

/// One functional observation sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    id: usize,
    values: Arc<[f64]>,
}

impl Curve {
    pub fn new(id: usize, values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { id });
        }
        Ok(Self {
            id,
            values: values.into(),
        })
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Curves sharing one grid. Ids are unique within a set.
#[derive(Debug, Clone)]
pub struct CurveSet {
    grid: Arc<Grid>,
    curves: Vec<Curve>,
}

impl CurveSet {
    pub fn new(grid: Arc<Grid>, curves: Vec<Curve>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(curves.len());
        for curve in &curves {
            if curve.values.len() != grid.len() {
                return Err(Error::LengthMismatch {
                    id: curve.id,
                    expected: grid.len(),
                    got: curve.values.len(),
                });
            }
            if !seen.insert(curve.id) {
                return Err(Error::DuplicateId(curve.id));
            }
        }
        Ok(Self { grid, curves })
    }

    /// Builds a set from raw value rows, assigning ids `first_id, first_id + 1, ...`.
    pub fn from_rows(grid: Arc<Grid>, first_id: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        let curves = rows
            .into_iter()
            .enumerate()
            .map(|(i, values)| Curve::new(first_id + i, values))
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, curves)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn curves(&self) -> &[Curve] {
        &self.curves
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn ids(&self) -> Vec<usize> {
        self.curves.iter().map(Curve::id).collect()
    }

    /// Borrowed value rows, one per curve, in set order.
    pub fn rows(&self) -> Vec<&[f64]> {
        self.curves.iter().map(Curve::values).collect()
    }

    pub fn same_grid(&self, other: &CurveSet) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    /// Curves of `self` followed by curves of `other`.
    pub fn union(&self, other: &CurveSet) -> Result<CurveSet> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        let mut curves = Vec::with_capacity(self.len() + other.len());
        curves.extend_from_slice(&self.curves);
        curves.extend_from_slice(&other.curves);
        CurveSet::new(self.grid.clone(), curves)
    }

    /// The curves at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> CurveSet {
        CurveSet {
            grid: self.grid.clone(),
            curves: indices.iter().map(|&i| self.curves[i].clone()).collect(),
        }
    }

    /// Restriction to the grid points in `[lo, hi]`, on a grid whose interval
    /// is the retained span.
    pub fn window(&self, lo: f64, hi: f64) -> Result<CurveSet> {
        let points = self.grid.points();
        let keep: Vec<usize> = (0..points.len()).filter(|&j| (lo..=hi).contains(&points[j])).collect();
        let (Some(&first), Some(&last)) = (keep.first(), keep.last()) else {
            return Err(Error::InvalidGrid(format!("no grid points in [{lo}, {hi}]")));
        };
        let grid = Arc::new(Grid::new(
            keep.iter().map(|&j| points[j]).collect(),
            points[last] - points[first],
        )?);
        let curves = self
            .curves
            .iter()
            .map(|c| Curve::new(c.id, c.values[first..=last].to_vec()))
            .collect::<Result<Vec<_>>>()?;
        CurveSet::new(grid, curves)
    }
}

/// Pointwise envelope of a set of curves.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

pub fn band(set: &CurveSet) -> Result<Band> {
    band_of_rows(&set.rows()).ok_or(Error::EmptySet)
}

pub(crate) fn band_of_rows(rows: &[&[f64]]) -> Option<Band> {
    let (first, rest) = rows.split_first()?;
    let mut lower = first.to_vec();
    let mut upper = first.to_vec();
    for row in rest {
        for (j, &v) in row.iter().enumerate() {
            if v < lower[j] {
                lower[j] = v;
            }
            if v > upper[j] {
                upper[j] = v;
            }
        }
    }
    Some(Band { lower, upper })
}

/// Average width `(1/λ(I)) ∫ (upper - lower) dt` of a band.
pub fn band_width(band: &Band, grid: &Grid) -> f64 {
    grid.weights()
        .iter()
        .zip(band.lower.iter().zip(&band.upper))
        .map(|(w, (lo, hi))| w * (hi - lo))
        .sum()
}

/// Width of the band spanned by `rows`, without materialising the band.
pub(crate) fn rows_band_width(rows: &[&[f64]], grid: &Grid) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    let weights = grid.weights();
    let mut width = 0.0;
    for j in 0..weights.len() {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for row in rows {
            let v = row[j];
            lo = lo.min(v);
            hi = hi.max(v);
        }
        width += weights[j] * (hi - lo);
    }
    width
}

/// Pointwise mean of the set. The returned curve carries id 0.
pub fn functional_mean(set: &CurveSet) -> Result<Curve> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    Curve::new(0, rows_mean(&set.rows()))
}

pub(crate) fn rows_mean(rows: &[&[f64]]) -> Vec<f64> {
    let mut mean = vec![0.0; rows[0].len()];
    for row in rows {
        for (m, v) in mean.iter_mut().zip(row.iter()) {
            *m += v;
        }
    }
    let n = rows.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    mean
}

/// Total within-cluster sum of squares `Σ_k Σ_i (1/λ(I)) ∫ (y_i - ȳ_k)² dt`.
pub fn within_cluster_ss(partition: &[CurveSet]) -> Result<f64> {
    let mut total = 0.0;
    for cluster in partition {
        if cluster.is_empty() {
            return Err(Error::EmptySet);
        }
        let rows = cluster.rows();
        let mean = rows_mean(&rows);
        let weights = cluster.grid().weights();
        for row in &rows {
            total += row
                .iter()
                .zip(&mean)
                .zip(weights)
                .map(|((y, m), w)| w * (y - m) * (y - m))
                .sum::<f64>();
        }
    }
    Ok(total)
}
