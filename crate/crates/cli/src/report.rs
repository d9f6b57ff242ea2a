//! Number formatting and the `reproduce` report.

use std::fmt::Write as _;

use crate::pipeline::{Experiment, Method, Scores};
use fwlink::simgen::{ArtifactKind, OutlierModel};

/// Four significant digits, without exponent notation.
pub fn sig4(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (3 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn two_decimals(x: f64) -> String {
    format!("{x:.2}")
}

/// Reference means over 100 replicates for MS, BD and conventional Ward,
/// at contamination rates 0.1, 0.15 and 0.2.
#[derive(Debug, Clone, Copy)]
pub struct Reference {
    pub sim: [[f64; 3]; 3],
    pub ari: [[f64; 3]; 3],
}

pub const REFERENCE_RATES: [f64; 3] = [0.1, 0.15, 0.2];

pub fn reference(experiment: Experiment) -> Reference {
    match experiment {
        Experiment::Model(OutlierModel::Magnitude) => Reference {
            sim: [[0.95, 0.98, 0.70], [0.90, 0.97, 0.65], [0.82, 0.90, 0.62]],
            ari: [[0.89, 0.94, 0.43], [0.81, 0.93, 0.33], [0.67, 0.77, 0.26]],
        },
        Experiment::Model(OutlierModel::Shape) => Reference {
            sim: [[0.98, 0.98, 0.79], [0.97, 0.96, 0.69], [0.97, 0.90, 0.65]],
            ari: [[0.96, 0.96, 0.79], [0.94, 0.92, 0.40], [0.95, 0.77, 0.31]],
        },
        Experiment::Model(OutlierModel::Covariance) => Reference {
            sim: [[0.82, 0.86, 0.77], [0.81, 0.82, 0.72], [0.81, 0.78, 0.68]],
            ari: [[0.64, 0.70, 0.55], [0.64, 0.63, 0.45], [0.64, 0.58, 0.39]],
        },
        Experiment::Eeg(ArtifactKind::EyeBlink) => Reference {
            sim: [[0.92, 0.92, 0.91], [0.94, 0.85, 0.84], [0.90, 0.86, 0.81]],
            ari: [[0.88, 0.83, 0.82], [0.88, 0.71, 0.70], [0.81, 0.70, 0.63]],
        },
        Experiment::Eeg(ArtifactKind::EyeMovement) => Reference {
            sim: [[0.94, 0.92, 0.91], [0.94, 0.89, 0.85], [0.93, 0.87, 0.82]],
            ari: [[0.88, 0.84, 0.85], [0.87, 0.76, 0.71], [0.87, 0.73, 0.67]],
        },
    }
}

/// Mean scores of every method at one contamination rate.
#[derive(Debug, Clone)]
pub struct RateRow {
    pub c: f64,
    pub scores: Vec<Scores>,
}

#[derive(Debug, Clone)]
pub struct ReproduceReport {
    pub experiment: Experiment,
    pub reps: usize,
    pub seed: u64,
    pub tau: f64,
    pub methods: Vec<Method>,
    pub rows: Vec<RateRow>,
}

impl ReproduceReport {
    /// Markdown tables at two decimals plus the reference values.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {}", self.experiment);
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "Mean over {} replicates (seeds {}..={}), tau = {}, 20 initial clusters of 30 curves, p = 4.",
            self.reps,
            self.seed,
            self.seed + self.reps as u64 - 1,
            self.tau
        );
        if self.experiment.is_spectral() {
            let _ = writeln!(out, "Clustering input: bias-corrected smoothed log-periodograms.");
        }
        for (measure, pick) in [("SIM", (|s: &Scores| s.sim) as fn(&Scores) -> f64), ("ARI", |s: &Scores| s.ari)] {
            let _ = writeln!(out);
            let _ = writeln!(out, "## {measure}");
            let _ = writeln!(out);
            let names: Vec<&str> = self.methods.iter().map(Method::name).collect();
            let _ = writeln!(out, "| c | {} |", names.join(" | "));
            let _ = writeln!(out, "|---|{}", "---|".repeat(names.len()));
            for row in &self.rows {
                let cells: Vec<String> = row.scores.iter().map(|s| two_decimals(pick(s))).collect();
                let _ = writeln!(out, "| {} | {} |", row.c, cells.join(" | "));
            }
        }
        let reference = reference(self.experiment);
        let _ = writeln!(out);
        let _ = writeln!(out, "## Reference means (100 replicates)");
        let _ = writeln!(out);
        let _ = writeln!(out, "| measure | c | ms | bd | ward |");
        let _ = writeln!(out, "|---|---|---|---|---|");
        for (measure, table) in [("SIM", reference.sim), ("ARI", reference.ari)] {
            for (c, values) in REFERENCE_RATES.iter().zip(table) {
                let cells: Vec<String> = values.iter().map(|v| two_decimals(*v)).collect();
                let _ = writeln!(out, "| {measure} | {c} | {} |", cells.join(" | "));
            }
        }
        out
    }

    /// One line per rate and method at four significant digits.
    pub fn csv(&self) -> String {
        let mut out = String::from("experiment,c,method,ari,sim\n");
        for row in &self.rows {
            for (method, s) in self.methods.iter().zip(&row.scores) {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    self.experiment,
                    row.c,
                    method.name(),
                    sig4(s.ari),
                    sig4(s.sim)
                );
            }
        }
        out
    }
}
