//! Seeded simulation of the clustering experiments.
//!
//! Experiment 1 draws curves `y(t) = k + 2kt + e(t)` on `[0, 1]` for true
//! clusters `k = 1..=p`, contaminating each curve with probability `c`:
//!
//! - model 1 shifts the curve by `±8`;
//! - model 2 adds `±g(t)` with `g(t) = 30 t^1.5 (1 - t)`;
//! - model 3 swaps the noise for a rough process with covariance
//!   `8 exp(-|s - t|^0.2)`.
//!
//! Experiment 2 mixes five latent AR(2) sources into four spectrally distinct
//! clusters of EEG-like series and contaminates them with eye-blink or
//! eye-movement artifacts.
//!
//! Every curve or series draws from its own ChaCha stream selected by its
//! global index, so outputs are pure functions of `(config, seed)`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::curves::{Curve, CurveSet, Grid};
use crate::error::{Error, Result};
use crate::spectral::{check_stationary, spectral_curves, TimeSeries};

/// Layout shared by both experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Number of initial clusters.
    pub m: usize,
    pub curves_per_cluster: usize,
    pub p_true: usize,
    /// Per-curve contamination probability.
    pub c: f64,
    /// Grid size on `[0, 1]` (experiment 1 only).
    pub t_points: usize,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            m: 20,
            curves_per_cluster: 30,
            p_true: 4,
            c: 0.0,
            t_points: 200,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn with(c: f64, seed: u64) -> Self {
        Self {
            c,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.p_true == 0 || !self.m.is_multiple_of(self.p_true) {
            return Err(Error::InvalidParameter(format!(
                "{} initial clusters cannot be split evenly into {} true clusters",
                self.m, self.p_true
            )));
        }
        if self.curves_per_cluster == 0 {
            return Err(Error::InvalidParameter("curves_per_cluster must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.c) {
            return Err(Error::InvalidParameter(format!(
                "contamination rate must lie in [0, 1), got {}",
                self.c
            )));
        }
        if self.t_points < 2 {
            return Err(Error::InvalidParameter("t_points must be at least 2".into()));
        }
        Ok(())
    }

    pub fn total_units(&self) -> usize {
        self.m * self.curves_per_cluster
    }

    /// Initial cluster of the global unit `g`.
    pub fn initial_of(&self, g: usize) -> usize {
        g / self.curves_per_cluster
    }

    /// True cluster label (`1..=p_true`) of initial cluster `i`.
    pub fn label_of_initial(&self, i: usize) -> usize {
        i / (self.m / self.p_true) + 1
    }
}

fn unit_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutlierModel {
    Magnitude,
    Shape,
    Covariance,
}

impl OutlierModel {
    pub fn from_number(model: u8) -> Result<Self> {
        match model {
            1 => Ok(Self::Magnitude),
            2 => Ok(Self::Shape),
            3 => Ok(Self::Covariance),
            other => Err(Error::InvalidParameter(format!("unknown outlier model {other}"))),
        }
    }

    pub fn number(&self) -> u8 {
        match self {
            Self::Magnitude => 1,
            Self::Shape => 2,
            Self::Covariance => 3,
        }
    }
}

/// Shape contamination `g(t) = 30 t^1.5 (1 - t)`.
pub fn shape_bump(t: f64) -> f64 {
    30.0 * t.powf(1.5) * (1.0 - t)
}

pub fn exponential_cov(s: f64, t: f64) -> f64 {
    (-(s - t).abs()).exp()
}

pub fn rough_cov(s: f64, t: f64) -> f64 {
    8.0 * (-(s - t).abs().powf(0.2)).exp()
}

/// Zero-mean Gaussian process on a fixed grid, sampled through the symmetric
/// square root of its covariance matrix (negative eigenvalues clipped to 0).
#[derive(Debug, Clone)]
pub struct GaussianProcess {
    sqrt: DMatrix<f64>,
}

impl GaussianProcess {
    pub fn new(points: &[f64], cov: impl Fn(f64, f64) -> f64) -> Self {
        let n = points.len();
        let k = DMatrix::from_fn(n, n, |i, j| cov(points[i], points[j]));
        let eig = SymmetricEigen::new(k);
        let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
        let v = &eig.eigenvectors;
        let sqrt = v * DMatrix::from_diagonal(&roots) * v.transpose();
        Self { sqrt }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.sqrt.nrows();
        let z = DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
        (&self.sqrt * z).iter().copied().collect()
    }
}

/// Simulated curves with their initial-cluster membership and ground truth.
#[derive(Debug, Clone)]
pub struct SimulatedCurves {
    pub config: ExperimentConfig,
    pub curves: CurveSet,
    /// Initial cluster of each curve.
    pub initial: Vec<usize>,
    /// True cluster (`1..=p_true`) of each curve.
    pub labels: Vec<usize>,
    pub contaminated: Vec<bool>,
}

impl SimulatedCurves {
    /// One curve set per initial cluster, in initial-cluster order.
    pub fn initial_clusters(&self) -> Vec<CurveSet> {
        split_initial(&self.curves, &self.initial, self.config.m)
    }

    /// True label of each initial cluster.
    pub fn unit_labels(&self) -> Vec<usize> {
        (0..self.config.m).map(|i| self.config.label_of_initial(i)).collect()
    }

    /// Bias-corrected smoothed log-periodograms of every curve, treating the
    /// grid as a unit-length record sampled at `t_points - 1` Hz.
    pub fn spectral(&self) -> Result<CurveSet> {
        let rate = (self.config.t_points - 1) as f64;
        let series = self
            .curves
            .curves()
            .iter()
            .map(|c| TimeSeries::new(c.values().to_vec(), rate))
            .collect::<Result<Vec<_>>>()?;
        spectral_curves(&series, 0)
    }
}

/// Groups the curves of `set` by `initial[i]`, preserving order within groups.
pub fn split_initial(set: &CurveSet, initial: &[usize], m: usize) -> Vec<CurveSet> {
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (i, &c) in initial.iter().enumerate() {
        members[c].push(i);
    }
    members.iter().map(|idx| set.subset(idx)).collect()
}

pub fn generate_model(model: OutlierModel, cfg: &ExperimentConfig) -> Result<SimulatedCurves> {
    cfg.validate()?;
    let grid = Arc::new(Grid::uniform(0.0, 1.0, cfg.t_points)?);
    let base = GaussianProcess::new(grid.points(), exponential_cov);
    let rough = (model == OutlierModel::Covariance).then(|| GaussianProcess::new(grid.points(), rough_cov));

    let units: Vec<(Vec<f64>, bool)> = (0..cfg.total_units())
        .into_par_iter()
        .map(|g| {
            let mut rng = unit_rng(cfg.seed, g as u64);
            let k = cfg.label_of_initial(cfg.initial_of(g)) as f64;
            let contaminated = rng.random::<f64>() < cfg.c;
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let noise = match (&rough, contaminated) {
                (Some(gp), true) => gp.sample(&mut rng),
                _ => base.sample(&mut rng),
            };
            let values = grid
                .points()
                .iter()
                .zip(noise)
                .map(|(&t, e)| {
                    let mut y = k + 2.0 * k * t + e;
                    if contaminated {
                        match model {
                            OutlierModel::Magnitude => y += 8.0 * sign,
                            OutlierModel::Shape => y += sign * shape_bump(t),
                            OutlierModel::Covariance => {}
                        }
                    }
                    y
                })
                .collect();
            (values, contaminated)
        })
        .collect();

    let mut curves = Vec::with_capacity(units.len());
    let mut contaminated = Vec::with_capacity(units.len());
    for (g, (values, flag)) in units.into_iter().enumerate() {
        curves.push(Curve::new(g, values)?);
        contaminated.push(flag);
    }
    let n = cfg.total_units();
    Ok(SimulatedCurves {
        config: cfg.clone(),
        curves: CurveSet::new(grid, curves)?,
        initial: (0..n).map(|g| cfg.initial_of(g)).collect(),
        labels: (0..n).map(|g| cfg.label_of_initial(cfg.initial_of(g))).collect(),
        contaminated,
    })
}

/// AR(2) coefficients placing the spectral peak near `omega0` Hz:
/// `φ₁ = 2cos(2πω₀/F)/M`, `φ₂ = -1/M²`.
pub fn ar2_coeffs(omega0: f64, modulus: f64, sampling_rate: f64) -> Result<(f64, f64)> {
    if !(modulus > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "root modulus M must exceed 1 for causality, got {modulus}"
        )));
    }
    if !(0.0..sampling_rate / 2.0).contains(&omega0) {
        return Err(Error::InvalidParameter(format!(
            "peak frequency {omega0} outside [0, {})",
            sampling_rate / 2.0
        )));
    }
    let phi1 = 2.0 * (2.0 * std::f64::consts::PI * omega0 / sampling_rate).cos() / modulus;
    let phi2 = -1.0 / (modulus * modulus);
    Ok((phi1, phi2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EegBand {
    Delta,
    Theta,
    Alpha,
    Beta,
    Gamma,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ar2Source {
    pub phi1: f64,
    pub phi2: f64,
    pub sigma2: f64,
    pub band: EegBand,
}

impl Ar2Source {
    pub fn new(phi1: f64, phi2: f64, sigma2: f64, band: EegBand) -> Result<Self> {
        check_stationary(phi1, phi2)?;
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::InvalidParameter(format!("innovation variance must be positive, got {sigma2}")));
        }
        Ok(Self {
            phi1,
            phi2,
            sigma2,
            band,
        })
    }

    /// The five latent sources with the literal coefficient pairs of the
    /// EEG experiment and unit innovation variance.
    pub fn eeg_sources() -> [Ar2Source; 5] {
        use EegBand::*;
        let pairs = [
            (0.8, 0.1, Delta),
            (0.9, -0.9, Theta),
            (-0.1, -0.9, Alpha),
            (-0.9, -0.9, Beta),
            (-0.8, -0.1, Gamma),
        ];
        pairs.map(|(a, b, band)| Ar2Source::new(a, b, 1.0, band).expect("literal pairs are stationary"))
    }

    /// Log spectral density at `freqs` (Hz).
    pub fn log_sdf(&self, freqs: &[f64], sampling_rate: f64) -> Vec<f64> {
        crate::spectral::ar2_true_log_sdf(self.phi1, self.phi2, self.sigma2, freqs, sampling_rate)
            .expect("sources are validated on construction")
    }
}

/// Weights of the five sources in each of the four true clusters.
pub const MIXTURE_WEIGHTS: [[f64; 5]; 4] = [
    [0.8, 0.1, 0.0, 0.0, 0.0],
    [0.6, 0.0, 0.1, 0.0, 0.0],
    [0.4, 0.0, 0.0, 0.1, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.1],
];

const BURN_IN: usize = 500;

pub fn simulate_ar2(src: &Ar2Source, n_t: usize, sampling_rate: f64, seed: u64) -> Result<TimeSeries> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    simulate_ar2_with(src, n_t, sampling_rate, &mut rng)
}

fn simulate_ar2_with<R: Rng + ?Sized>(
    src: &Ar2Source,
    n_t: usize,
    sampling_rate: f64,
    rng: &mut R,
) -> Result<TimeSeries> {
    check_stationary(src.phi1, src.phi2)?;
    let sd = src.sigma2.sqrt();
    let (mut y1, mut y2) = (0.0, 0.0);
    let mut out = Vec::with_capacity(n_t);
    for step in 0..BURN_IN + n_t {
        let w: f64 = rng.sample(StandardNormal);
        let y = src.phi1 * y1 + src.phi2 * y2 + sd * w;
        y2 = y1;
        y1 = y;
        if step >= BURN_IN {
            out.push(y);
        }
    }
    TimeSeries::new(out, sampling_rate)
}

/// Log spectral density of the mixture `Σ_i w_i f̃_i` at `freqs`.
pub fn mixture_log_sdf(sources: &[Ar2Source], weights: &[f64], freqs: &[f64], sampling_rate: f64) -> Vec<f64> {
    let parts: Vec<Vec<f64>> = sources.iter().map(|s| s.log_sdf(freqs, sampling_rate)).collect();
    (0..freqs.len())
        .map(|j| {
            weights
                .iter()
                .zip(&parts)
                .filter(|(w, _)| **w > 0.0)
                .map(|(w, p)| w * p[j].exp())
                .sum::<f64>()
                .ln()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArtifactShape {
    /// Difference of two gamma densities (shape, scale in seconds), scaled to
    /// unit peak absolute value.
    EyeBlink {
        shape1: f64,
        scale1: f64,
        shape2: f64,
        scale2: f64,
    },
    /// Gaussian bump with standard deviation `width` seconds.
    EyeMovement { width: f64 },
}

impl ArtifactShape {
    pub fn default_blink() -> Self {
        Self::EyeBlink {
            shape1: 4.0,
            scale1: 0.015,
            shape2: 8.0,
            scale2: 0.02,
        }
    }

    pub fn default_movement() -> Self {
        Self::EyeMovement { width: 0.4 }
    }
}

/// An artifact added at `onset` seconds (the bump centre for eye movements).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArtifactSpec {
    pub shape: ArtifactShape,
    pub amplitude: f64,
    pub onset: f64,
}

fn gamma_pdf(x: f64, shape: f64, scale: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    ((shape - 1.0) * x.ln() - x / scale - ln_gamma(shape) - shape * scale.ln()).exp()
}

/// Unnormalised blink waveform at lag `tau` seconds after onset.
fn blink_raw(tau: f64, shape1: f64, scale1: f64, shape2: f64, scale2: f64) -> f64 {
    gamma_pdf(tau, shape1, scale1) - gamma_pdf(tau, shape2, scale2)
}

/// Peak absolute value of the blink waveform on a fine lag grid.
fn blink_peak(shape1: f64, scale1: f64, shape2: f64, scale2: f64) -> f64 {
    let horizon = 20.0 * (shape1 * scale1).max(shape2 * scale2);
    (1..=4000)
        .map(|i| blink_raw(horizon * i as f64 / 4000.0, shape1, scale1, shape2, scale2).abs())
        .fold(0.0, f64::max)
}

/// The artifact waveform sampled at the times of `x`.
pub fn artifact_waveform(len: usize, sampling_rate: f64, spec: &ArtifactSpec) -> Result<Vec<f64>> {
    let duration = len as f64 / sampling_rate;
    if !(0.0..duration).contains(&spec.onset) {
        return Err(Error::InvalidParameter(format!(
            "artifact onset {} s outside the series (0..{duration} s)",
            spec.onset
        )));
    }
    if !(spec.amplitude >= 0.0 && spec.amplitude.is_finite()) {
        return Err(Error::InvalidParameter(format!("artifact amplitude must be non-negative, got {}", spec.amplitude)));
    }
    let times = (0..len).map(|s| s as f64 / sampling_rate);
    let wave = match spec.shape {
        ArtifactShape::EyeBlink {
            shape1,
            scale1,
            shape2,
            scale2,
        } => {
            if [shape1, scale1, shape2, scale2].iter().any(|v| !(*v > 0.0)) {
                return Err(Error::InvalidParameter("gamma shapes and scales must be positive".into()));
            }
            let peak = blink_peak(shape1, scale1, shape2, scale2);
            times
                .map(|t| spec.amplitude * blink_raw(t - spec.onset, shape1, scale1, shape2, scale2) / peak)
                .collect()
        }
        ArtifactShape::EyeMovement { width } => {
            if !(width > 0.0) {
                return Err(Error::InvalidParameter("eye-movement width must be positive".into()));
            }
            times
                .map(|t| spec.amplitude * (-(t - spec.onset).powi(2) / (2.0 * width * width)).exp())
                .collect()
        }
    };
    Ok(wave)
}

pub fn apply_artifact(x: &TimeSeries, spec: &ArtifactSpec) -> Result<TimeSeries> {
    let wave = artifact_waveform(x.len(), x.sampling_rate(), spec)?;
    let values = x.values().iter().zip(wave).map(|(v, a)| v + a).collect();
    Ok(x.with_values(values))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArtifactKind {
    EyeBlink,
    EyeMovement,
}

/// Series length, sampling rate and artifact model of the EEG experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct EegSettings {
    pub n_t: usize,
    pub sampling_rate: f64,
    pub artifact: ArtifactKind,
    pub blink: ArtifactShape,
    pub movement: ArtifactShape,
    /// Artifact amplitude as a multiple of the clean series' standard deviation.
    pub blink_amplitude: f64,
    pub movement_amplitude: f64,
    /// Upper end (Hz) of the frequency window used as clustering input.
    pub max_frequency: f64,
}

impl EegSettings {
    pub fn new(artifact: ArtifactKind) -> Self {
        Self {
            n_t: 1000,
            sampling_rate: 1000.0,
            artifact,
            blink: ArtifactShape::default_blink(),
            movement: ArtifactShape::default_movement(),
            blink_amplitude: 6.0,
            movement_amplitude: 4.0,
            max_frequency: 50.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulatedSeries {
    pub config: ExperimentConfig,
    pub series: Vec<TimeSeries>,
    pub initial: Vec<usize>,
    pub labels: Vec<usize>,
    pub contaminated: Vec<bool>,
    pub max_frequency: f64,
}

impl SimulatedSeries {
    /// Smoothed log-periodogram curves up to `max_frequency`, the clustering
    /// input. Spans are selected on the full frequency range.
    pub fn spectral(&self) -> Result<CurveSet> {
        spectral_curves(&self.series, 0)?.window(0.0, self.max_frequency)
    }

    pub fn unit_labels(&self) -> Vec<usize> {
        (0..self.config.m).map(|i| self.config.label_of_initial(i)).collect()
    }
}

/// Streams per series: 0 drives contamination, `1 + i` drives source `i`.
const STREAMS_PER_SERIES: u64 = 8;

/// EEG-like series: cluster `k` is `Σ_i √w_{k,i} x_i` over independent source
/// realisations, so its spectral density is `Σ_i w_{k,i} f̃_i`.
pub fn generate_eeg_clusters(
    cfg: &ExperimentConfig,
    settings: &EegSettings,
    sources: &[Ar2Source; 5],
    weights: &[[f64; 5]],
) -> Result<SimulatedSeries> {
    cfg.validate()?;
    if weights.len() != cfg.p_true {
        return Err(Error::InvalidParameter(format!(
            "{} weight rows for {} true clusters",
            weights.len(),
            cfg.p_true
        )));
    }
    let (artifact_shape, amplitude_factor) = match settings.artifact {
        ArtifactKind::EyeBlink => (settings.blink, settings.blink_amplitude),
        ArtifactKind::EyeMovement => (settings.movement, settings.movement_amplitude),
    };

    let units = (0..cfg.total_units())
        .into_par_iter()
        .map(|g| {
            let label = cfg.label_of_initial(cfg.initial_of(g));
            let base_stream = g as u64 * STREAMS_PER_SERIES;
            let mut mix = vec![0.0; settings.n_t];
            for (i, (src, &w)) in sources.iter().zip(&weights[label - 1]).enumerate() {
                if w <= 0.0 {
                    continue;
                }
                let mut rng = unit_rng(cfg.seed, base_stream + 1 + i as u64);
                let x = simulate_ar2_with(src, settings.n_t, settings.sampling_rate, &mut rng)?;
                for (m, v) in mix.iter_mut().zip(x.values()) {
                    *m += w.sqrt() * v;
                }
            }
            let clean = TimeSeries::new(mix, settings.sampling_rate)?;

            let mut rng = unit_rng(cfg.seed, base_stream);
            let contaminated = rng.random::<f64>() < cfg.c;
            let onset = rng.random::<f64>() * clean.duration();
            if !contaminated {
                return Ok((clean, false));
            }
            let spec = ArtifactSpec {
                shape: artifact_shape,
                amplitude: amplitude_factor * clean.std_dev(),
                onset,
            };
            Ok((apply_artifact(&clean, &spec)?, true))
        })
        .collect::<Result<Vec<_>>>()?;

    let n = cfg.total_units();
    let (series, contaminated) = units.into_iter().unzip();
    Ok(SimulatedSeries {
        config: cfg.clone(),
        series,
        initial: (0..n).map(|g| cfg.initial_of(g)).collect(),
        labels: (0..n).map(|g| cfg.label_of_initial(cfg.initial_of(g))).collect(),
        contaminated,
        max_frequency: settings.max_frequency,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn small(c: f64, seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            m: 4,
            curves_per_cluster: 10,
            p_true: 4,
            c,
            t_points: 50,
            seed,
        }
    }

    #[test]
    fn config_validation() {
        assert!(ExperimentConfig::default().validate().is_ok());
        assert!(ExperimentConfig { m: 10, ..Default::default() }.validate().is_err());
        assert!(ExperimentConfig::with(1.0, 0).validate().is_err());
        assert!(ExperimentConfig::with(0.25, 0).validate().is_ok());
        assert!(OutlierModel::from_number(4).is_err());
    }

    #[test]
    fn layout_of_default_config() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.total_units(), 600);
        assert_eq!(cfg.initial_of(599), 19);
        assert_eq!((0..20).map(|i| cfg.label_of_initial(i)).collect::<Vec<_>>()[..6], [1, 1, 1, 1, 1, 2]);
    }

    #[test]
    fn clean_model_has_no_contamination() {
        let sim = generate_model(OutlierModel::Magnitude, &small(0.0, 3)).unwrap();
        assert!(sim.contaminated.iter().all(|c| !c));
        assert_eq!(sim.initial_clusters().len(), 4);
        assert_eq!(sim.unit_labels(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn generators_replay_exactly() {
        for model in [OutlierModel::Magnitude, OutlierModel::Shape, OutlierModel::Covariance] {
            let a = generate_model(model, &small(0.3, 11)).unwrap();
            let b = generate_model(model, &small(0.3, 11)).unwrap();
            assert_eq!(a.curves.rows(), b.curves.rows());
            assert_eq!(a.contaminated, b.contaminated);
            let c = generate_model(model, &small(0.3, 12)).unwrap();
            assert_ne!(a.curves.rows(), c.curves.rows());
        }
    }

    #[test]
    fn clean_mean_follows_trend() {
        let cfg = ExperimentConfig {
            m: 4,
            curves_per_cluster: 500,
            p_true: 4,
            c: 0.0,
            t_points: 60,
            seed: 5,
        };
        let sim = generate_model(OutlierModel::Magnitude, &cfg).unwrap();
        for (i, cluster) in sim.initial_clusters().iter().enumerate() {
            let k = (i + 1) as f64;
            let mean = crate::curves::functional_mean(cluster).unwrap();
            for (t, m) in cluster.grid().points().iter().zip(mean.values()) {
                assert!((m - (k + 2.0 * k * t)).abs() < 0.15, "k={k} t={t} mean={m}");
            }
        }
    }

    #[test]
    fn shape_bump_value() {
        assert!((shape_bump(0.6) - 12.0 * 0.216f64.sqrt()).abs() < 1e-12);
        assert!((shape_bump(0.6) - 5.577).abs() < 1e-3);
        assert_eq!(shape_bump(0.0), 0.0);
        assert_eq!(shape_bump(1.0), 0.0);
    }

    #[test]
    fn contaminants_carry_model_offsets() {
        let cfg = small(0.5, 21);
        let clean_gp = generate_model(OutlierModel::Magnitude, &ExperimentConfig { c: 0.0, ..cfg.clone() }).unwrap();
        let magnitude = generate_model(OutlierModel::Magnitude, &cfg).unwrap();
        let shape = generate_model(OutlierModel::Shape, &cfg).unwrap();
        let t = clean_gp.curves.grid().points();
        let mut seen = 0;
        for g in 0..cfg.total_units() {
            if !magnitude.contaminated[g] {
                continue;
            }
            seen += 1;
            // Same stream: contamination and noise draws coincide across models.
            let base = clean_gp.curves.curves()[g].values();
            let m = magnitude.curves.curves()[g].values();
            let s = shape.curves.curves()[g].values();
            let offset = m[0] - base[0];
            assert!((offset.abs() - 8.0).abs() < 1e-9);
            for j in 0..t.len() {
                assert!((m[j] - base[j] - offset).abs() < 1e-9);
                assert!(((s[j] - base[j]).abs() - shape_bump(t[j])).abs() < 1e-9);
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn gp_has_unit_marginal_variance_and_target_covariance() {
        let grid = Grid::uniform(0.0, 1.0, 11).unwrap();
        let gp = GaussianProcess::new(grid.points(), exponential_cov);
        let diag: Vec<f64> = (0..11).map(|i| gp.sqrt.row(i).iter().map(|v| v * v).sum()).collect();
        assert!(diag.iter().all(|d| (d - 1.0).abs() < 1e-9));

        let mut rng = unit_rng(99, 0);
        let reps = 2000;
        let (a, b) = (2, 4); // t = 0.2 and t = 0.4
        let samples: Vec<Vec<f64>> = (0..reps).map(|_| gp.sample(&mut rng)).collect();
        let mean = |j: usize| samples.iter().map(|s| s[j]).sum::<f64>() / reps as f64;
        let (ma, mb) = (mean(a), mean(b));
        let cov = samples.iter().map(|s| (s[a] - ma) * (s[b] - mb)).sum::<f64>() / (reps - 1) as f64;
        assert!((cov - (-0.2f64).exp()).abs() < 0.1, "cov = {cov}");
    }

    #[test]
    fn covariance_model_keeps_trend_but_inflates_variance() {
        let cfg = ExperimentConfig {
            m: 4,
            curves_per_cluster: 400,
            p_true: 4,
            c: 0.5,
            t_points: 40,
            seed: 8,
        };
        let sim = generate_model(OutlierModel::Covariance, &cfg).unwrap();
        let j = 20;
        let t = sim.curves.grid().points()[j];
        let resid = |flag: bool| -> Vec<f64> {
            (0..cfg.total_units())
                .filter(|&g| sim.contaminated[g] == flag)
                .map(|g| {
                    let k = sim.labels[g] as f64;
                    sim.curves.curves()[g].values()[j] - (k + 2.0 * k * t)
                })
                .collect()
        };
        for (flag, var_target) in [(false, 1.0), (true, 8.0)] {
            let r = resid(flag);
            let n = r.len() as f64;
            let mean = r.iter().sum::<f64>() / n;
            let var = r.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            assert!(mean.abs() < 4.0 * (var_target / n).sqrt(), "flag={flag} mean={mean}");
            assert!((var / var_target - 1.0).abs() < 0.2, "flag={flag} var={var}");
        }
    }

    #[test]
    fn contamination_rate_is_binomial() {
        let cfg = ExperimentConfig::with(0.2, 17);
        let sim = generate_model(OutlierModel::Shape, &cfg).unwrap();
        let n = sim.contaminated.len() as f64;
        let rate = sim.contaminated.iter().filter(|c| **c).count() as f64 / n;
        let se = (0.2 * 0.8 / n).sqrt();
        assert!((rate - 0.2).abs() < 3.0 * se, "rate = {rate}");
    }

    #[test]
    fn ar2_coefficient_formula() {
        let (a, b) = ar2_coeffs(0.0, 1.1, 1000.0).unwrap();
        assert!((a - 2.0 / 1.1).abs() < 1e-15 && (b + 1.0 / 1.21).abs() < 1e-15);
        let (a, b) = ar2_coeffs(100.0, 1.05, 1000.0).unwrap();
        assert!((a - 1.54098).abs() < 1e-5 && (b + 0.90703).abs() < 1e-5);
        let (a, _) = ar2_coeffs(250.0, 1.05, 1000.0).unwrap();
        assert!(a.abs() < 1e-15);
        assert!(ar2_coeffs(10.0, 1.0, 1000.0).is_err());
        assert!(ar2_coeffs(600.0, 1.1, 1000.0).is_err());
        let (a, b) = ar2_coeffs(40.0, 1.01, 1000.0).unwrap();
        assert!(check_stationary(a, b).is_ok());
    }

    #[test]
    fn ar2_white_noise_and_autocorrelation() {
        let white = Ar2Source::new(0.0, 0.0, 2.0, EegBand::Delta).unwrap();
        let x = simulate_ar2(&white, 5000, 1000.0, 1).unwrap();
        let var = x.std_dev().powi(2);
        assert!((var / 2.0 - 1.0).abs() < 0.1, "var = {var}");

        let src = Ar2Source::new(0.5, 0.3, 1.0, EegBand::Delta).unwrap();
        let y = simulate_ar2(&src, 5000, 1000.0, 2).unwrap();
        let v = y.values();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let c0: f64 = v.iter().map(|a| (a - mean).powi(2)).sum();
        let c1: f64 = v.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
        assert!((c1 / c0 - 0.5 / 0.7).abs() < 0.05, "rho1 = {}", c1 / c0);

        assert_eq!(simulate_ar2(&src, 100, 1.0, 3).unwrap(), simulate_ar2(&src, 100, 1.0, 3).unwrap());
        let bad = Ar2Source { phi1: 1.5, ..src };
        assert!(simulate_ar2(&bad, 100, 1.0, 3).is_err());
        assert!(Ar2Source::new(1.5, 0.0, 1.0, EegBand::Beta).is_err());
    }

    #[test]
    fn eeg_weights_match_mixture_definitions() {
        assert_eq!(MIXTURE_WEIGHTS[0], [0.8, 0.1, 0.0, 0.0, 0.0]);
        assert_eq!(MIXTURE_WEIGHTS[3], [0.2, 0.0, 0.0, 0.0, 0.1]);
        assert_eq!(Ar2Source::eeg_sources()[1].phi2, -0.9);
    }

    #[test]
    fn unused_sources_do_not_affect_output() {
        let cfg = small(0.0, 4);
        let settings = EegSettings {
            n_t: 128,
            ..EegSettings::new(ArtifactKind::EyeBlink)
        };
        let sources = Ar2Source::eeg_sources();
        let a = generate_eeg_clusters(&cfg, &settings, &sources, &MIXTURE_WEIGHTS).unwrap();
        let mut altered = sources;
        // Source 5 only feeds cluster 4.
        altered[4] = Ar2Source::new(0.3, 0.2, 5.0, EegBand::Gamma).unwrap();
        let b = generate_eeg_clusters(&cfg, &settings, &altered, &MIXTURE_WEIGHTS).unwrap();
        for g in 0..cfg.total_units() {
            if a.labels[g] != 4 {
                assert_eq!(a.series[g], b.series[g]);
            } else {
                assert_ne!(a.series[g], b.series[g]);
            }
        }
    }

    #[test]
    fn eeg_contamination_and_determinism() {
        let cfg = small(0.5, 9);
        let settings = EegSettings {
            n_t: 256,
            ..EegSettings::new(ArtifactKind::EyeMovement)
        };
        let sources = Ar2Source::eeg_sources();
        let a = generate_eeg_clusters(&cfg, &settings, &sources, &MIXTURE_WEIGHTS).unwrap();
        let b = generate_eeg_clusters(&cfg, &settings, &sources, &MIXTURE_WEIGHTS).unwrap();
        assert_eq!(a.series, b.series);
        assert!(a.contaminated.iter().any(|c| *c) && a.contaminated.iter().any(|c| !c));
        let clean = generate_eeg_clusters(&ExperimentConfig { c: 0.0, ..cfg.clone() }, &settings, &sources, &MIXTURE_WEIGHTS).unwrap();
        for g in 0..cfg.total_units() {
            assert_eq!(a.contaminated[g], a.series[g] != clean.series[g]);
        }
        let spectral = a.spectral().unwrap();
        assert_eq!(spectral.len(), cfg.total_units());
        assert!(*spectral.grid().points().last().unwrap() <= 50.0);
    }

    #[test]
    fn zero_amplitude_artifact_is_identity() {
        let x = TimeSeries::new((0..100).map(|t| (t as f64).sin()).collect(), 100.0).unwrap();
        for shape in [ArtifactShape::default_blink(), ArtifactShape::default_movement()] {
            let spec = ArtifactSpec { shape, amplitude: 0.0, onset: 0.3 };
            assert_eq!(apply_artifact(&x, &spec).unwrap(), x);
        }
    }

    #[test]
    fn movement_peaks_at_centre() {
        let x = TimeSeries::new(vec![0.0; 1000], 1000.0).unwrap();
        let spec = ArtifactSpec {
            shape: ArtifactShape::default_movement(),
            amplitude: 3.5,
            onset: 0.25,
        };
        let y = apply_artifact(&x, &spec).unwrap();
        let (argmax, max) = y.values().iter().enumerate().fold((0, f64::MIN), |a, (i, &v)| if v > a.1 { (i, v) } else { a });
        assert_eq!(argmax, 250);
        assert!((max - 3.5).abs() < 1e-12);
        assert_eq!(y.len(), 1000);
    }

    #[test]
    fn blink_is_biphasic_with_unit_peak() {
        let wave = artifact_waveform(
            2000,
            1000.0,
            &ArtifactSpec {
                shape: ArtifactShape::default_blink(),
                amplitude: 1.0,
                onset: 0.1,
            },
        )
        .unwrap();
        let signs: Vec<f64> = wave.iter().filter(|v| v.abs() > 1e-12).map(|v| v.signum()).collect();
        let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
        assert_eq!(changes, 1);
        assert_eq!(signs[0], 1.0);
        let peak = wave.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((peak - 1.0).abs() < 0.01, "peak = {peak}");
        assert!(wave[..100].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn artifact_outside_series_is_rejected() {
        let x = TimeSeries::new(vec![0.0; 100], 100.0).unwrap();
        for onset in [-0.1, 1.0, 5.0] {
            let spec = ArtifactSpec { shape: ArtifactShape::default_movement(), amplitude: 1.0, onset };
            assert!(apply_artifact(&x, &spec).is_err());
        }
    }

    #[test]
    fn gamma_pdf_integrates_to_one() {
        let h = 1e-4;
        let total: f64 = (1..20000).map(|i| gamma_pdf(i as f64 * h, 4.0, 0.015) * h).sum();
        assert!((total - 1.0).abs() < 1e-6);
        let mode = 3.0 * 0.015;
        assert!(gamma_pdf(mode, 4.0, 0.015) > gamma_pdf(mode * 1.1, 4.0, 0.015));
        let _ = PI;
    }
}
