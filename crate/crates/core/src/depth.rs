//! Centre-outward ordering of curves.
//!
//! Two notions are provided, each feeding one robust linkage:
//!
//! - modified band depth with bands of two curves, used by the BD selector;
//! - directional outlyingness summarised as `(MO, VO)`, used by the MS
//!   selector through the spatial depth of the symmetrised MS-plot cloud.

use crate::curves::{CurveSet, Grid};
use crate::error::{Error, Result};

/// Smallest cluster on which the MS selector is attempted.
pub const MS_MIN_CURVES: usize = 12;
/// Smallest cluster on which the BD selector is attempted.
pub const BD_MIN_CURVES: usize = 4;
/// Consistency factor turning the MAD into a normal-scale estimate.
pub const MAD_SCALE: f64 = 1.4826;

/// One depth value per curve, aligned with the set order.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthVector {
    pub values: Vec<f64>,
}

/// Magnitude (`mo`, signed) and shape (`vo`, non-negative) outlyingness of a curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutlyingnessPoint {
    pub mo: f64,
    pub vo: f64,
}

/// Indices of the most central curves of a set, in increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralSelection {
    pub indices: Vec<usize>,
    pub tau: f64,
}

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidTau(tau))
    }
}

/// Modified band depth with `J = 2`.
///
/// A curve is contained by the band of a pair at grid point `t_j` when
/// `min(y_a, y_b) <= y_i <= max(y_a, y_b)`. Pairs that include the curve
/// itself always contain it.
pub fn mbd(set: &CurveSet) -> Result<DepthVector> {
    if set.len() < 2 {
        return Err(Error::TooFewCurves {
            needed: 2,
            got: set.len(),
        });
    }
    Ok(DepthVector {
        values: mbd_rows(&set.rows(), set.grid()),
    })
}

fn choose2(k: usize) -> f64 {
    (k * k.saturating_sub(1) / 2) as f64
}

/// Rank-based evaluation: at each grid point, the pairs of other curves that
/// miss `y_i` are exactly those lying strictly on one side of it.
pub(crate) fn mbd_rows(rows: &[&[f64]], grid: &Grid) -> Vec<f64> {
    let n = rows.len();
    let weights = grid.weights();
    let pairs_of_others = choose2(n - 1);
    let self_pairs = (n - 1) as f64;

    let mut acc = vec![0.0; n];
    let mut column = vec![0.0; n];
    for (j, &w) in weights.iter().enumerate() {
        for (c, row) in column.iter_mut().zip(rows) {
            *c = row[j];
        }
        column.sort_unstable_by(f64::total_cmp);
        for (i, row) in rows.iter().enumerate() {
            let v = row[j];
            let below = column.partition_point(|&x| x < v);
            let above = n - column.partition_point(|&x| x <= v);
            let contained = pairs_of_others - choose2(below) - choose2(above) + self_pairs;
            acc[i] += w * contained;
        }
    }

    let total_weight: f64 = weights.iter().sum();
    let norm = choose2(n) * total_weight;
    acc.into_iter().map(|a| a / norm).collect()
}

/// Median of a scratch buffer; the buffer is reordered.
pub(crate) fn median_in_place(buf: &mut [f64]) -> f64 {
    let n = buf.len();
    let mid = n / 2;
    let (left, &mut upper, _) = buf.select_nth_unstable_by(mid, f64::total_cmp);
    if n % 2 == 1 {
        upper
    } else {
        let lower = left.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

/// Per-curve, per-grid-point outlyingness `(y_i(t) - med(t)) / MAD(t)`.
///
/// Columns with zero MAD map to zero outlyingness for every curve.
pub fn directional_outlyingness(set: &CurveSet) -> Result<Vec<Vec<f64>>> {
    if set.len() < 2 {
        return Err(Error::TooFewCurves {
            needed: 2,
            got: set.len(),
        });
    }
    Ok(outlyingness_rows(&set.rows()))
}

pub(crate) fn outlyingness_rows(rows: &[&[f64]]) -> Vec<Vec<f64>> {
    let n = rows.len();
    let t = rows[0].len();
    let mut out = vec![vec![0.0; t]; n];
    let mut scratch = vec![0.0; n];
    for j in 0..t {
        for (s, row) in scratch.iter_mut().zip(rows) {
            *s = row[j];
        }
        let med = median_in_place(&mut scratch);
        for (s, row) in scratch.iter_mut().zip(rows) {
            *s = (row[j] - med).abs();
        }
        let mad = MAD_SCALE * median_in_place(&mut scratch);
        if mad > 0.0 {
            for (o, row) in out.iter_mut().zip(rows) {
                o[j] = (row[j] - med) / mad;
            }
        }
    }
    out
}

/// `MO_i = (1/λ) ∫ O_i dt` and `VO_i = (1/λ) ∫ (O_i - MO_i)² dt`.
pub fn mo_vo(set: &CurveSet) -> Result<Vec<OutlyingnessPoint>> {
    if set.len() < 2 {
        return Err(Error::TooFewCurves {
            needed: 2,
            got: set.len(),
        });
    }
    Ok(mo_vo_rows(&set.rows(), set.grid()))
}

pub(crate) fn mo_vo_rows(rows: &[&[f64]], grid: &Grid) -> Vec<OutlyingnessPoint> {
    outlyingness_rows(rows)
        .iter()
        .map(|o| {
            let mo = grid.mean_integral(o);
            let vo = grid
                .weights()
                .iter()
                .zip(o)
                .map(|(w, v)| w * (v - mo) * (v - mo))
                .sum::<f64>()
                .max(0.0);
            OutlyingnessPoint { mo, vo }
        })
        .collect()
}

/// Spatial depth `1 - |mean of unit vectors from the cloud to x|` of the first
/// `targets` points of `cloud`, each evaluated against the whole cloud.
///
/// The sums run over the cloud in sorted order, so the result does not depend
/// on how the curves were ordered.
pub(crate) fn spatial_depths(cloud: &[[f64; 2]], targets: usize) -> Vec<f64> {
    let total = cloud.len() as f64;
    let mut sorted = cloud.to_vec();
    sorted.sort_unstable_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    cloud[..targets]
        .iter()
        .map(|x| {
            let (mut sx, mut sy) = (0.0, 0.0);
            for y in &sorted {
                let dx = x[0] - y[0];
                let dy = x[1] - y[1];
                let r = dx.hypot(dy);
                if r > 0.0 {
                    sx += dx / r;
                    sy += dy / r;
                }
            }
            1.0 - (sx / total).hypot(sy / total)
        })
        .collect()
}

/// Number of curves a `tau` fraction of `n` rounds up to, at least one.
pub(crate) fn central_count(tau: f64, n: usize) -> usize {
    // Guard against products such as 0.3 * 10 = 3.0000000000000004.
    let k = (tau * n as f64 - 1e-9).ceil() as usize;
    k.clamp(1, n)
}

/// Most central curves according to the MS-plot.
///
/// Each coordinate of the symmetrised cloud `{(MO, VO)} ∪ {(MO, -VO)}` is
/// divided by its MAD (when positive) so that magnitude and shape
/// outlyingness contribute on comparable scales. The `⌈tau·n⌉` curves whose
/// `(MO, VO)` points have the highest spatial depth are kept; ties go to the
/// lower index.
pub fn central_by_ms(set: &CurveSet, tau: f64) -> Result<CentralSelection> {
    check_tau(tau)?;
    let indices = central_by_ms_rows(&set.rows(), set.grid(), tau)?;
    Ok(CentralSelection { indices, tau })
}

pub(crate) fn central_by_ms_rows(rows: &[&[f64]], grid: &Grid, tau: f64) -> Result<Vec<usize>> {
    let n = rows.len();
    if n < MS_MIN_CURVES {
        return Err(Error::TooFewCurves {
            needed: MS_MIN_CURVES,
            got: n,
        });
    }
    let points = mo_vo_rows(rows, grid);
    Ok(select_from_ms_cloud(&points, tau))
}

pub(crate) fn select_from_ms_cloud(points: &[OutlyingnessPoint], tau: f64) -> Vec<usize> {
    let n = points.len();
    let mut buf: Vec<f64> = points.iter().map(|p| p.mo).collect();
    let mo_med = median_in_place(&mut buf);
    buf.iter_mut()
        .zip(points)
        .for_each(|(b, p)| *b = (p.mo - mo_med).abs());
    let mo_scale = positive_or_one(MAD_SCALE * median_in_place(&mut buf));
    // The mirrored VO coordinate has median zero, so its MAD is the median of |VO|.
    buf.iter_mut().zip(points).for_each(|(b, p)| *b = p.vo);
    let vo_scale = positive_or_one(MAD_SCALE * median_in_place(&mut buf));

    let mut cloud = Vec::with_capacity(2 * n);
    cloud.extend(points.iter().map(|p| [p.mo / mo_scale, p.vo / vo_scale]));
    cloud.extend(points.iter().map(|p| [p.mo / mo_scale, -p.vo / vo_scale]));
    let depths = spatial_depths(&cloud, n);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| depths[b].total_cmp(&depths[a]).then(a.cmp(&b)));
    let mut chosen = order[..central_count(tau, n)].to_vec();
    chosen.sort_unstable();
    chosen
}

fn positive_or_one(scale: f64) -> f64 {
    if scale > 0.0 && scale.is_finite() {
        scale
    } else {
        1.0
    }
}

/// Linear-interpolation quantile between order statistics (sample position `(n-1)·tau`).
pub fn quantile(values: &[f64], tau: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let pos = (sorted.len() - 1) as f64 * tau;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi || sorted[lo] == sorted[hi] {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// Curves whose MBD reaches the `tau`-quantile of the set's MBD values.
pub fn central_by_bd(set: &CurveSet, tau: f64) -> Result<CentralSelection> {
    check_tau(tau)?;
    let indices = central_by_bd_rows(&set.rows(), set.grid(), tau)?;
    Ok(CentralSelection { indices, tau })
}

pub(crate) fn central_by_bd_rows(rows: &[&[f64]], grid: &Grid, tau: f64) -> Result<Vec<usize>> {
    let n = rows.len();
    if n < BD_MIN_CURVES {
        return Err(Error::TooFewCurves {
            needed: BD_MIN_CURVES,
            got: n,
        });
    }
    let depths = mbd_rows(rows, grid);
    let cutoff = quantile(&depths, tau);
    Ok((0..n).filter(|&i| depths[i] >= cutoff).collect())
}
