//! File formats. Floats are written with Rust's shortest round-trip
//! formatting, so everything written here re-reads bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, ensure, Context, Result};
use fwlink::{CurveSet, DistanceMatrix, Grid, MergeHistory};
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
struct GridFile {
    points: Vec<f64>,
    interval_length: f64,
}

pub fn write_grid(path: &Path, grid: &Grid) -> Result<()> {
    let file = GridFile {
        points: grid.points().to_vec(),
        interval_length: grid.interval_length(),
    };
    write_json(path, &file)
}

pub fn read_grid(path: &Path) -> Result<Grid> {
    let file: GridFile = read_json(path)?;
    Ok(Grid::new(file.points, file.interval_length)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))
}

fn parse<T: std::str::FromStr>(field: &str, path: &Path, line: usize) -> Result<T>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    field
        .trim()
        .parse()
        .with_context(|| format!("{}:{line}: bad value {field:?}", path.display()))
}

/// Curves with their initial-cluster assignment, as stored on disk.
#[derive(Debug, Clone)]
pub struct CurveTable {
    pub set: CurveSet,
    pub clusters: Vec<usize>,
}

impl CurveTable {
    /// Initial clusters in ascending id order, with their ids.
    pub fn initial_clusters(&self) -> (Vec<usize>, Vec<CurveSet>) {
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, &c) in self.clusters.iter().enumerate() {
            groups.entry(c).or_default().push(i);
        }
        let ids = groups.keys().copied().collect();
        let sets = groups.values().map(|idx| self.set.subset(idx)).collect();
        (ids, sets)
    }

    /// Every curve as its own initial cluster.
    pub fn singletons(&self) -> (Vec<usize>, Vec<CurveSet>) {
        let sets = (0..self.set.len()).map(|i| self.set.subset(&[i])).collect();
        (self.set.ids(), sets)
    }
}

/// `id,cluster,v1..vT`.
pub fn write_curves(path: &Path, set: &CurveSet, clusters: &[usize]) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec!["id".to_string(), "cluster".to_string()];
    header.extend((1..=set.grid().len()).map(|j| format!("v{j}")));
    w.write_record(&header)?;
    for (curve, cluster) in set.curves().iter().zip(clusters) {
        let mut record = vec![curve.id().to_string(), cluster.to_string()];
        record.extend(curve.values().iter().map(f64::to_string));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_curves(path: &Path, grid: Grid) -> Result<CurveTable> {
    let mut r = reader(path)?;
    let header = r.headers()?.clone();
    ensure!(
        header.get(0) == Some("id") && header.get(1) == Some("cluster"),
        "{}: header must start with id,cluster",
        path.display()
    );
    ensure!(
        header.len() == grid.len() + 2,
        "{}: {} value columns but the grid has {} points",
        path.display(),
        header.len() - 2,
        grid.len()
    );
    let mut curves = Vec::new();
    let mut clusters = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record?;
        let line = line + 2;
        let id: usize = parse(&record[0], path, line)?;
        clusters.push(parse(&record[1], path, line)?);
        let values = record
            .iter()
            .skip(2)
            .map(|v| parse(v, path, line))
            .collect::<Result<Vec<f64>>>()?;
        curves.push(fwlink::Curve::new(id, values)?);
    }
    let set = CurveSet::new(Arc::new(grid), curves)?;
    Ok(CurveTable { set, clusters })
}

/// Ground truth per curve: `id,cluster,label,contaminated`.
pub fn write_truth(path: &Path, ids: &[usize], clusters: &[usize], labels: &[usize], contaminated: &[bool]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["id", "cluster", "label", "contaminated"])?;
    for i in 0..ids.len() {
        w.write_record([
            ids[i].to_string(),
            clusters[i].to_string(),
            labels[i].to_string(),
            contaminated[i].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `(id, label)` pairs from any CSV with `id` and `label` columns.
pub fn read_labels(path: &Path) -> Result<Vec<(usize, usize)>> {
    let mut r = reader(path)?;
    let header = r.headers()?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("{}: missing column {name:?}", path.display()))
    };
    let (id_col, label_col) = (col("id")?, col("label")?);
    r.records()
        .enumerate()
        .map(|(line, record)| {
            let record = record?;
            Ok((parse(&record[id_col], path, line + 2)?, parse(&record[label_col], path, line + 2)?))
        })
        .collect()
}

pub fn write_labels(path: &Path, header: [&str; 2], rows: &[(usize, usize)]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(header)?;
    for (id, label) in rows {
        w.write_record([id.to_string(), label.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Pairs two label files by id; both must cover the same ids.
pub fn align(truth: &[(usize, usize)], pred: &[(usize, usize)]) -> Result<(Vec<usize>, Vec<usize>)> {
    let lookup: BTreeMap<usize, usize> = pred.iter().copied().collect();
    ensure!(lookup.len() == pred.len(), "duplicate ids in predicted labels");
    let truth_ids: BTreeMap<usize, usize> = truth.iter().copied().collect();
    ensure!(truth_ids.len() == truth.len(), "duplicate ids in ground truth");
    if truth.len() != pred.len() {
        bail!("ground truth has {} ids but predictions have {}", truth.len(), pred.len());
    }
    let mut g = Vec::with_capacity(truth.len());
    let mut a = Vec::with_capacity(truth.len());
    for (id, label) in truth {
        let Some(&p) = lookup.get(id) else {
            bail!("id {id} has no predicted label");
        };
        g.push(*label);
        a.push(p);
    }
    Ok((g, a))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MergeRecord {
    pub step: usize,
    pub left: usize,
    pub right: usize,
    pub new: usize,
    pub d2: f64,
}

/// Merge steps with cluster ids translated: initial clusters keep their file
/// ids and merged clusters are numbered after the largest of them.
pub fn merge_records(history: &MergeHistory, ids: &[usize]) -> Vec<MergeRecord> {
    let base = ids.iter().copied().max().map_or(0, |m| m + 1);
    let name = |k: usize| if k < ids.len() { ids[k] } else { base + k - ids.len() };
    history
        .steps
        .iter()
        .map(|s| MergeRecord {
            step: s.step + 1,
            left: name(s.left),
            right: name(s.right),
            new: name(s.merged),
            d2: s.d2,
        })
        .collect()
}

pub fn write_matrix(path: &Path, ids: &[usize], matrix: &DistanceMatrix) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec!["id".to_string()];
    header.extend(ids.iter().map(usize::to_string));
    w.write_record(&header)?;
    for (i, id) in ids.iter().enumerate() {
        let mut record = vec![id.to_string()];
        record.extend(matrix.row(i).iter().map(f64::to_string));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_scree(path: &Path, rows: &[(usize, f64)]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["clusters", "wss"])?;
    for (p, wss) in rows {
        w.write_record([p.to_string(), wss.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
