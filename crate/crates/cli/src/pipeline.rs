//! Simulate → cluster → score, the unit of work behind `reproduce`.

use std::fmt;
use std::str::FromStr;

use anyhow::{bail, Result};
use fwlink::linkage::distance_matrix;
use fwlink::metrics::{ari, sim};
use fwlink::simgen::{
    generate_eeg_clusters, generate_model, split_initial, Ar2Source, ArtifactKind, EegSettings, ExperimentConfig,
    OutlierModel, MIXTURE_WEIGHTS,
};
use fwlink::{agglomerate, CurveSet, DistanceMatrix, LinkageKind};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Model(OutlierModel),
    Eeg(ArtifactKind),
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::Model(OutlierModel::Magnitude),
        Experiment::Model(OutlierModel::Shape),
        Experiment::Model(OutlierModel::Covariance),
        Experiment::Eeg(ArtifactKind::EyeBlink),
        Experiment::Eeg(ArtifactKind::EyeMovement),
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Model(OutlierModel::Magnitude) => "exp1-model1",
            Self::Model(OutlierModel::Shape) => "exp1-model2",
            Self::Model(OutlierModel::Covariance) => "exp1-model3",
            Self::Eeg(ArtifactKind::EyeBlink) => "exp2-blink",
            Self::Eeg(ArtifactKind::EyeMovement) => "exp2-movement",
        }
    }

    /// Whether clustering runs on smoothed log-periodograms.
    pub fn is_spectral(&self) -> bool {
        !matches!(self, Self::Model(OutlierModel::Magnitude | OutlierModel::Shape))
    }

    /// Simulates one replicate and returns its clustering input.
    pub fn replicate(&self, cfg: &ExperimentConfig) -> Result<Replicate> {
        let (curves, initial, labels) = match *self {
            Self::Model(model) => {
                let sim = generate_model(model, cfg)?;
                let curves = if self.is_spectral() { sim.spectral()? } else { sim.curves.clone() };
                (curves, sim.initial, sim.labels)
            }
            Self::Eeg(kind) => {
                let settings = EegSettings::new(kind);
                let sim = generate_eeg_clusters(cfg, &settings, &Ar2Source::eeg_sources(), &MIXTURE_WEIGHTS)?;
                (sim.spectral()?, sim.initial, sim.labels)
            }
        };
        Ok(Replicate {
            clusters: split_initial(&curves, &initial, cfg.m),
            unit_labels: (0..cfg.m).map(|i| cfg.label_of_initial(i)).collect(),
            curve_labels: labels,
            initial,
            curves,
            p: cfg.p_true,
        })
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match Self::ALL.iter().find(|e| e.name() == s) {
            Some(e) => Ok(*e),
            None => bail!(
                "unknown experiment {s:?}; expected one of {}",
                Self::ALL.map(|e| e.name()).join(", ")
            ),
        }
    }
}

/// A clustering method as it appears in reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// A linkage applied to the initial clusters.
    Linkage(LinkageKind),
    /// Conventional Ward's clustering with every curve as its own initial
    /// cluster, the non-robust baseline of the reference tables.
    WardCurves,
}

impl Method {
    pub fn standard(tau: f64) -> [Method; 5] {
        [
            Method::Linkage(LinkageKind::Ms { tau }),
            Method::Linkage(LinkageKind::Bd { tau }),
            Method::Linkage(LinkageKind::WardClassic),
            Method::Linkage(LinkageKind::FunctionalWard),
            Method::WardCurves,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Linkage(kind) => kind.name(),
            Self::WardCurves => "ward-curves",
        }
    }
}

/// Clustering input of one simulated replicate.
#[derive(Debug, Clone)]
pub struct Replicate {
    pub curves: CurveSet,
    pub clusters: Vec<CurveSet>,
    /// True label of each initial cluster.
    pub unit_labels: Vec<usize>,
    /// True label of each curve, in `curves` order.
    pub curve_labels: Vec<usize>,
    /// Initial cluster of each curve.
    pub initial: Vec<usize>,
    pub p: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scores {
    pub ari: f64,
    pub sim: f64,
}

impl Replicate {
    /// Predicted label of each curve, in `curves` order.
    pub fn predict(&self, method: Method) -> Result<Vec<usize>> {
        match method {
            Method::Linkage(kind) => {
                let (_, partition) = agglomerate(&self.clusters, kind, Some(self.p))?;
                Ok(self.initial.iter().map(|&i| partition.labels()[i]).collect())
            }
            Method::WardCurves => {
                let singletons: Vec<CurveSet> = (0..self.curves.len()).map(|i| self.curves.subset(&[i])).collect();
                let (_, partition) = agglomerate(&singletons, LinkageKind::WardClassic, Some(self.p))?;
                Ok(partition.labels().to_vec())
            }
        }
    }

    pub fn score(&self, method: Method) -> Result<Scores> {
        let predicted = self.predict(method)?;
        Ok(Scores {
            ari: ari(&self.curve_labels, &predicted)?,
            sim: sim(&self.curve_labels, &predicted)?,
        })
    }

    pub fn distances(&self, kind: LinkageKind) -> Result<DistanceMatrix> {
        Ok(distance_matrix(&self.clusters, kind)?)
    }

    /// Mean within-true-block distance over mean between-block distance,
    /// off-diagonal entries only.
    pub fn block_contrast(&self, matrix: &DistanceMatrix, transform: impl Fn(f64) -> f64) -> f64 {
        let (mut within, mut nw, mut between, mut nb) = (0.0, 0usize, 0.0, 0usize);
        for i in 0..matrix.size() {
            for j in 0..matrix.size() {
                if i == j {
                    continue;
                }
                let d = transform(matrix.get(i, j));
                if self.unit_labels[i] == self.unit_labels[j] {
                    within += d;
                    nw += 1;
                } else {
                    between += d;
                    nb += 1;
                }
            }
        }
        (within / nw as f64) / (between / nb as f64)
    }
}

/// Mean scores of each method over replicates `seed..seed + reps`.
pub fn mean_scores(experiment: Experiment, c: f64, reps: usize, seed: u64, methods: &[Method]) -> Result<Vec<Scores>> {
    let per_rep = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let rep = experiment.replicate(&ExperimentConfig::with(c, seed + r))?;
            methods.iter().map(|&m| rep.score(m)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..methods.len())
        .map(|k| {
            let n = per_rep.len() as f64;
            Scores {
                ari: per_rep.iter().map(|s| s[k].ari).sum::<f64>() / n,
                sim: per_rep.iter().map(|s| s[k].sim).sum::<f64>() / n,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn experiment_names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        assert!("exp3".parse::<Experiment>().is_err());
    }

    #[test]
    fn clean_replicate_is_recovered() {
        let cfg = ExperimentConfig {
            m: 8,
            curves_per_cluster: 12,
            t_points: 40,
            ..ExperimentConfig::with(0.0, 2)
        };
        let rep = Experiment::Model(OutlierModel::Magnitude).replicate(&cfg).unwrap();
        for method in Method::standard(0.5) {
            let s = rep.score(method).unwrap();
            assert!(s.sim > 0.6, "{} {s:?}", method.name());
        }
        let s = rep.score(Method::Linkage(LinkageKind::WardClassic)).unwrap();
        assert_eq!(s.ari, 1.0);
    }
}
