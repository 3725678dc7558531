//! Per-turn 6G network state: slice-specific samplers, a bounded random walk
//! between turns, and the hard-state classifier used by robustness scoring.

use std::fmt;

use rand::Rng;
use rand_distr::{Beta, Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Standard normal 0.9 quantile.
pub const Z90: f64 = 1.281_551_565_544_600_4;

/// Latency above which a turn is hard (strict).
pub const HARD_LATENCY_MS: f64 = 40.0;
/// Packet loss at or above which a turn is hard.
pub const HARD_LOSS_PCT: f64 = 1.0;
/// Throughput below which a turn is hard (strict).
pub const HARD_THROUGHPUT_MBPS: f64 = 5.0;
/// Edge load above which a turn is hard (strict).
pub const HARD_EDGE_LOAD: f64 = 0.8;

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("{slice}: {reason}")]
    InconsistentTargets { slice: Slice, reason: String },
    #[error("{slice} {field}: sampled mean {sampled:.4} deviates {deviation:.2}% from target {target:.4} (tolerance {tolerance:.2}%)")]
    Verification {
        slice: Slice,
        field: &'static str,
        sampled: f64,
        target: f64,
        deviation: f64,
        tolerance: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Slice {
    #[serde(rename = "URLLC")]
    Urllc,
    #[serde(rename = "eMBB")]
    Embb,
    #[serde(rename = "mMTC")]
    Mmtc,
}

impl Slice {
    pub const ALL: [Slice; 3] = [Slice::Urllc, Slice::Embb, Slice::Mmtc];

    pub fn as_str(self) -> &'static str {
        match self {
            Slice::Urllc => "URLLC",
            Slice::Embb => "eMBB",
            Slice::Mmtc => "mMTC",
        }
    }

    pub fn parse(s: &str) -> Option<Slice> {
        Slice::ALL.into_iter().find(|slice| slice.as_str() == s)
    }

    fn index(self) -> usize {
        match self {
            Slice::Urllc => 0,
            Slice::Embb => 1,
            Slice::Mmtc => 2,
        }
    }
}

impl fmt::Display for Slice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Network vector attached to every dialogue turn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkState {
    pub slice: Slice,
    pub latency_ms: f64,
    pub jitter_ms: f64,
    pub loss_pct: f64,
    pub throughput_mbps: f64,
    pub edge_load: f64,
}

impl NetworkState {
    /// Range invariants: latency > 0, jitter/throughput >= 0, loss in [0,100],
    /// edge load in [0,1], everything finite.
    pub fn in_range(&self) -> bool {
        let finite = [
            self.latency_ms,
            self.jitter_ms,
            self.loss_pct,
            self.throughput_mbps,
            self.edge_load,
        ]
        .iter()
        .all(|v| v.is_finite());
        finite
            && self.latency_ms > 0.0
            && self.jitter_ms >= 0.0
            && (0.0..=100.0).contains(&self.loss_pct)
            && self.throughput_mbps >= 0.0
            && (0.0..=1.0).contains(&self.edge_load)
    }
}

/// A turn is hard when any degradation threshold is breached.
///
/// Latency, throughput and edge load use strict comparisons; loss is hard at
/// exactly 1%.
pub fn classify_hard(n: &NetworkState) -> bool {
    n.latency_ms > HARD_LATENCY_MS
        || n.loss_pct >= HARD_LOSS_PCT
        || n.throughput_mbps < HARD_THROUGHPUT_MBPS
        || n.edge_load > HARD_EDGE_LOAD
}

/// Published per-slice summary statistics used as fitting targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceTargets {
    pub latency_mean: f64,
    pub latency_median: f64,
    pub latency_p90: f64,
    pub jitter_mean: f64,
    pub loss_mean: f64,
    pub throughput_mean: f64,
    pub edge_load_mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTargets {
    #[serde(rename = "URLLC")]
    pub urllc: SliceTargets,
    #[serde(rename = "eMBB")]
    pub embb: SliceTargets,
    #[serde(rename = "mMTC")]
    pub mmtc: SliceTargets,
}

impl CalibrationTargets {
    pub fn get(&self, slice: Slice) -> &SliceTargets {
        match slice {
            Slice::Urllc => &self.urllc,
            Slice::Embb => &self.embb,
            Slice::Mmtc => &self.mmtc,
        }
    }

    pub fn get_mut(&mut self, slice: Slice) -> &mut SliceTargets {
        match slice {
            Slice::Urllc => &mut self.urllc,
            Slice::Embb => &mut self.embb,
            Slice::Mmtc => &mut self.mmtc,
        }
    }
}

impl Default for CalibrationTargets {
    fn default() -> Self {
        CalibrationTargets {
            urllc: SliceTargets {
                latency_mean: 7.23,
                latency_median: 7.00,
                latency_p90: 9.10,
                jitter_mean: 1.11,
                loss_mean: 0.059,
                throughput_mean: 95.2,
                edge_load_mean: 0.360,
            },
            embb: SliceTargets {
                latency_mean: 21.47,
                latency_median: 14.00,
                latency_p90: 25.00,
                jitter_mean: 4.72,
                loss_mean: 0.642,
                throughput_mean: 608.0,
                edge_load_mean: 0.517,
            },
            mmtc: SliceTargets {
                latency_mean: 72.98,
                latency_median: 50.00,
                latency_p90: 150.00,
                jitter_mean: 17.10,
                loss_mean: 2.387,
                throughput_mean: 2.3,
                edge_load_mean: 0.757,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    LogNormal { mu: f64, sigma: f64 },
    Exponential { mean: f64 },
    Beta { alpha: f64, beta: f64 },
}

/// One scalar field: a distribution family plus a clip range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldModel {
    #[serde(flatten)]
    pub family: Family,
    pub min: f64,
    pub max: f64,
}

impl FieldModel {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let raw = match self.family {
            Family::LogNormal { mu, sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                (mu + sigma * z).exp()
            }
            Family::Exponential { mean } => {
                if mean <= 0.0 {
                    // still consume a draw so streams stay aligned
                    let _: f64 = rng.random();
                    0.0
                } else {
                    Exp::new(1.0 / mean).expect("positive rate").sample(rng)
                }
            }
            Family::Beta { alpha, beta } => Beta::new(alpha, beta).expect("positive shape").sample(rng),
        };
        self.clip(raw)
    }

    fn clip(&self, x: f64) -> f64 {
        x.clamp(self.min, self.max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceModel {
    pub latency: FieldModel,
    pub jitter: FieldModel,
    pub loss: FieldModel,
    pub throughput: FieldModel,
    pub edge_load: FieldModel,
}

/// Fixed log-scale spread for jitter (only the mean is published).
pub const JITTER_SIGMA: f64 = 0.5;
/// Fixed log-scale spread for throughput.
pub const THROUGHPUT_SIGMA: f64 = 0.35;
/// Beta concentration (alpha + beta) for edge load.
pub const EDGE_CONCENTRATION: f64 = 10.0;

/// Fitted per-slice samplers plus the turn-to-turn evolution knobs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceCalibration {
    #[serde(rename = "URLLC")]
    pub urllc: SliceModel,
    #[serde(rename = "eMBB")]
    pub embb: SliceModel,
    #[serde(rename = "mMTC")]
    pub mmtc: SliceModel,
    pub switch_probability: f64,
    pub mixing_weight: f64,
}

impl Default for SliceCalibration {
    fn default() -> Self {
        SliceCalibration::fit(&CalibrationTargets::default()).expect("embedded targets are consistent")
    }
}

/// Analytic lognormal fit from median and P90: `mu = ln median`,
/// `sigma = (ln p90 - mu) / z90`.
pub fn lognormal_from_quantiles(median: f64, p90: f64) -> (f64, f64) {
    let mu = median.ln();
    let sigma = (p90.ln() - mu) / Z90;
    (mu, sigma)
}

fn lognormal_with_mean(mean: f64, sigma: f64) -> Family {
    Family::LogNormal {
        mu: mean.ln() - 0.5 * sigma * sigma,
        sigma,
    }
}

impl SliceCalibration {
    pub fn model(&self, slice: Slice) -> &SliceModel {
        match slice {
            Slice::Urllc => &self.urllc,
            Slice::Embb => &self.embb,
            Slice::Mmtc => &self.mmtc,
        }
    }

    /// Closed-form fit of every field; no sampling involved.
    pub fn fit(targets: &CalibrationTargets) -> Result<SliceCalibration, CalibrationError> {
        let fit_slice = |slice: Slice| -> Result<SliceModel, CalibrationError> {
            let t = targets.get(slice);
            let bad = |reason: &str| CalibrationError::InconsistentTargets {
                slice,
                reason: reason.to_string(),
            };
            let positive = [
                t.latency_mean,
                t.latency_median,
                t.latency_p90,
                t.jitter_mean,
                t.throughput_mean,
            ];
            if positive.iter().any(|v| !v.is_finite() || *v <= 0.0) {
                return Err(bad("latency, jitter and throughput targets must be positive"));
            }
            if t.latency_p90 < t.latency_median {
                return Err(bad("latency P90 is below the median"));
            }
            if !(0.0..=100.0).contains(&t.loss_mean) {
                return Err(bad("loss mean outside [0, 100]"));
            }
            if !(t.edge_load_mean > 0.0 && t.edge_load_mean < 1.0) {
                return Err(bad("edge load mean outside (0, 1)"));
            }
            let (mu, sigma) = lognormal_from_quantiles(t.latency_median, t.latency_p90);
            Ok(SliceModel {
                latency: FieldModel {
                    family: Family::LogNormal { mu, sigma },
                    min: 0.1,
                    max: 2000.0,
                },
                jitter: FieldModel {
                    family: lognormal_with_mean(t.jitter_mean, JITTER_SIGMA),
                    min: 0.0,
                    max: 1000.0,
                },
                loss: FieldModel {
                    family: Family::Exponential { mean: t.loss_mean },
                    min: 0.0,
                    max: 100.0,
                },
                throughput: FieldModel {
                    family: lognormal_with_mean(t.throughput_mean, THROUGHPUT_SIGMA),
                    min: 0.0,
                    max: 100_000.0,
                },
                edge_load: FieldModel {
                    family: Family::Beta {
                        alpha: t.edge_load_mean * EDGE_CONCENTRATION,
                        beta: (1.0 - t.edge_load_mean) * EDGE_CONCENTRATION,
                    },
                    min: 0.0,
                    max: 1.0,
                },
            })
        };
        Ok(SliceCalibration {
            urllc: fit_slice(Slice::Urllc)?,
            embb: fit_slice(Slice::Embb)?,
            mmtc: fit_slice(Slice::Mmtc)?,
            switch_probability: 0.05,
            mixing_weight: 0.5,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub samples: usize,
    pub seed: u64,
    /// Relative tolerance on the sampled latency mean.
    pub latency_mean_tolerance: f64,
    /// Relative tolerance on the jitter, loss, throughput and edge-load means.
    pub moment_tolerance: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            samples: 200_000,
            seed: 42,
            latency_mean_tolerance: 0.05,
            moment_tolerance: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldCheck {
    pub slice: Slice,
    pub field: String,
    pub target: f64,
    pub sampled: f64,
    pub relative_deviation: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub checks: Vec<FieldCheck>,
}

/// Monte-Carlo check of every fitted mean against its target.
pub fn verify(
    calib: &SliceCalibration,
    targets: &CalibrationTargets,
    opts: &VerifyOptions,
) -> Result<CalibrationReport, CalibrationError> {
    use rand::SeedableRng;
    let mut report = CalibrationReport::default();
    for slice in Slice::ALL {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(opts.seed ^ (slice.index() as u64 + 1));
        let mut sums = [0.0f64; 5];
        for _ in 0..opts.samples {
            let n = sample_network_state(slice, calib, &mut rng);
            sums[0] += n.latency_ms;
            sums[1] += n.jitter_ms;
            sums[2] += n.loss_pct;
            sums[3] += n.throughput_mbps;
            sums[4] += n.edge_load;
        }
        let t = targets.get(slice);
        let fields: [(&'static str, f64, f64); 5] = [
            ("latency_mean", t.latency_mean, opts.latency_mean_tolerance),
            ("jitter_mean", t.jitter_mean, opts.moment_tolerance),
            ("loss_mean", t.loss_mean, opts.moment_tolerance),
            ("throughput_mean", t.throughput_mean, opts.moment_tolerance),
            ("edge_load_mean", t.edge_load_mean, opts.moment_tolerance),
        ];
        for (i, (field, target, tolerance)) in fields.into_iter().enumerate() {
            let sampled = sums[i] / opts.samples.max(1) as f64;
            let deviation = if target == 0.0 {
                sampled.abs()
            } else {
                (sampled - target).abs() / target.abs()
            };
            report.checks.push(FieldCheck {
                slice,
                field: field.to_string(),
                target,
                sampled,
                relative_deviation: deviation,
            });
            if deviation > tolerance {
                return Err(CalibrationError::Verification {
                    slice,
                    field,
                    sampled,
                    target,
                    deviation: deviation * 100.0,
                    tolerance: tolerance * 100.0,
                });
            }
        }
    }
    Ok(report)
}

/// Fit from targets, then verify the sampled means.
pub fn calibrate(targets: &CalibrationTargets, opts: &VerifyOptions) -> Result<SliceCalibration, CalibrationError> {
    let calib = SliceCalibration::fit(targets)?;
    verify(&calib, targets, opts)?;
    Ok(calib)
}

/// Independent draw of every field for `slice`, in the fixed order latency,
/// jitter, loss, throughput, edge load.
pub fn sample_network_state<R: Rng + ?Sized>(slice: Slice, calib: &SliceCalibration, rng: &mut R) -> NetworkState {
    let m = calib.model(slice);
    NetworkState {
        slice,
        latency_ms: m.latency.sample(rng),
        jitter_ms: m.jitter.sample(rng),
        loss_pct: m.loss.sample(rng),
        throughput_mbps: m.throughput.sample(rng),
        edge_load: m.edge_load.sample(rng),
    }
}

/// One turn of the bounded random walk.
///
/// With probability `switch_probability` the slice changes to one of the other
/// two (uniformly) and a fresh state is drawn from it. Otherwise every scalar
/// moves toward a fresh sample of the same slice by `mixing_weight` and is
/// clipped to its range.
pub fn evolve_network<R: Rng + ?Sized>(prev: &NetworkState, calib: &SliceCalibration, rng: &mut R) -> NetworkState {
    let u: f64 = rng.random();
    if u < calib.switch_probability {
        let others: Vec<Slice> = Slice::ALL.into_iter().filter(|s| *s != prev.slice).collect();
        let next = others[rng.random_range(0..others.len())];
        return sample_network_state(next, calib, rng);
    }
    let fresh = sample_network_state(prev.slice, calib, rng);
    let w = calib.mixing_weight;
    let m = calib.model(prev.slice);
    let mix = |old: f64, new: f64, field: &FieldModel| field.clip((1.0 - w) * old + w * new);
    NetworkState {
        slice: prev.slice,
        latency_ms: mix(prev.latency_ms, fresh.latency_ms, &m.latency),
        jitter_ms: mix(prev.jitter_ms, fresh.jitter_ms, &m.jitter),
        loss_pct: mix(prev.loss_pct, fresh.loss_pct, &m.loss),
        throughput_mbps: mix(prev.throughput_mbps, fresh.throughput_mbps, &m.throughput),
        edge_load: mix(prev.edge_load, fresh.edge_load, &m.edge_load),
    }
}
