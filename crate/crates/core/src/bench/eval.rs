//! Parallel per-image evaluation and deterministic aggregation.
//!
//! A worker pool maps image pairs to metric records; aggregation then runs
//! single-threaded over stem-sorted results, so identical inputs and flags
//! produce bit-identical dataset scores at any worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DatasetManifest;
use crate::error::{Error, Result};
use crate::map::{load_map, load_mask, BinaryMask, SaliencyMap};
use crate::metrics::{MetricRecord, DEFAULT_BETA2};

#[derive(Debug, Clone, Copy)]
pub struct EvalOptions {
    pub beta2: f64,
    pub jobs: usize,
    /// Min-max normalize each prediction before resizing.
    pub normalize: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            beta2: DEFAULT_BETA2,
            jobs: std::thread::available_parallelism().map_or(1, |n| n.get()),
            normalize: false,
        }
    }
}

/// Dataset scores: arithmetic mean of the per-image scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetScores {
    pub images: usize,
    pub mae: f64,
    pub f_max: f64,
    pub f_adaptive: f64,
    pub s_measure: f64,
    pub e_max: f64,
    pub bce: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageResult {
    pub stem: String,
    pub record: MetricRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailedImage {
    pub stem: String,
    pub reason: String,
}

/// Per-threshold means across the dataset, curve-aligned by threshold index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanCurvePoint {
    pub threshold: u8,
    pub precision: f64,
    pub recall: f64,
    pub f_beta: f64,
    pub e_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOutcome {
    pub dataset: String,
    pub model: String,
    pub scores: DatasetScores,
    pub results: Vec<ImageResult>,
    pub failures: Vec<FailedImage>,
    pub mean_curve: Vec<MeanCurvePoint>,
}

impl EvalOutcome {
    pub fn has_failures(&self) -> bool {
        !self.failures.is_empty()
    }
}

fn run_pool<T, F>(
    jobs: usize,
    items: &[T],
    work: F,
) -> Vec<std::result::Result<MetricRecord, String>>
where
    T: Sync,
    F: Fn(&T) -> std::result::Result<MetricRecord, String> + Send + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("worker pool");
    pool.install(|| items.par_iter().map(work).collect())
}

fn aggregate(
    dataset: &str,
    model: &str,
    stems: Vec<String>,
    outputs: Vec<std::result::Result<MetricRecord, String>>,
) -> Result<EvalOutcome> {
    let mut results = Vec::new();
    let mut failures = Vec::new();
    for (stem, output) in stems.into_iter().zip(outputs) {
        match output {
            Ok(record) => results.push(ImageResult { stem, record }),
            Err(reason) => failures.push(FailedImage { stem, reason }),
        }
    }
    if results.is_empty() {
        return Err(Error::EmptyInput(format!(
            "no image evaluated successfully for {model} on {dataset}"
        )));
    }

    let n = results.len() as f64;
    let mut sums = [0.0f64; 6];
    let mut curve_sums = vec![[0.0f64; 4]; 256];
    for r in &results {
        sums[0] += r.record.mae;
        sums[1] += r.record.f_max;
        sums[2] += r.record.f_adaptive;
        sums[3] += r.record.s_measure;
        sums[4] += r.record.e_max;
        sums[5] += r.record.bce;
        for (acc, p) in curve_sums.iter_mut().zip(&r.record.curve) {
            acc[0] += p.precision;
            acc[1] += p.recall;
            acc[2] += p.f_beta;
            acc[3] += p.e_value;
        }
    }
    let mean_curve = curve_sums
        .iter()
        .enumerate()
        .map(|(theta, acc)| MeanCurvePoint {
            threshold: theta as u8,
            precision: acc[0] / n,
            recall: acc[1] / n,
            f_beta: acc[2] / n,
            e_value: acc[3] / n,
        })
        .collect();

    Ok(EvalOutcome {
        dataset: dataset.to_string(),
        model: model.to_string(),
        scores: DatasetScores {
            images: results.len(),
            mae: sums[0] / n,
            f_max: sums[1] / n,
            f_adaptive: sums[2] / n,
            s_measure: sums[3] / n,
            e_max: sums[4] / n,
            bce: sums[5] / n,
        },
        results,
        failures,
        mean_curve,
    })
}

/// Evaluates every pair of a manifest. Predictions are resized to ground
/// truth dimensions (never the other way around); unreadable or degenerate
/// pairs are recorded as failures and excluded from the means.
pub fn evaluate_manifest(manifest: &DatasetManifest, opts: &EvalOptions) -> Result<EvalOutcome> {
    let mut pairs = manifest.pairs.clone();
    pairs.sort_by(|a, b| a.stem.cmp(&b.stem));
    let stems: Vec<String> = pairs.iter().map(|p| p.stem.clone()).collect();

    let normalize = opts.normalize;
    let beta2 = opts.beta2;
    let outputs = run_pool(opts.jobs, &pairs, move |pair| {
        let pred = load_map(&pair.pred).map_err(|e| e.to_string())?;
        let gt = load_mask(&pair.gt).map_err(|e| e.to_string())?;
        let pred = if normalize { pred.normalize() } else { pred };
        let pred = if pred.same_dimensions_as(&gt) {
            pred
        } else {
            pred.resize_to(gt.width(), gt.height())
                .map_err(|e| e.to_string())?
        };
        MetricRecord::compute(&pred, &gt, beta2).map_err(|e| e.to_string())
    });
    aggregate(&manifest.name, &manifest.model, stems, outputs)
}

/// Evaluates already-loaded pairs; the in-memory twin of
/// [`evaluate_manifest`] with identical aggregation.
pub fn evaluate_loaded(
    dataset: &str,
    model: &str,
    items: &[(String, SaliencyMap, BinaryMask)],
    opts: &EvalOptions,
) -> Result<EvalOutcome> {
    let mut indices: Vec<usize> = (0..items.len()).collect();
    indices.sort_by(|&a, &b| items[a].0.cmp(&items[b].0));
    let sorted: Vec<&(String, SaliencyMap, BinaryMask)> =
        indices.iter().map(|&i| &items[i]).collect();
    let stems: Vec<String> = sorted.iter().map(|item| item.0.clone()).collect();

    let beta2 = opts.beta2;
    let normalize = opts.normalize;
    let outputs = run_pool(opts.jobs, &sorted, move |item| {
        let (_, sal, gt) = item;
        let mut sal = std::borrow::Cow::Borrowed(sal);
        if normalize {
            sal = std::borrow::Cow::Owned(sal.normalize());
        }
        if !sal.same_dimensions_as(gt) {
            sal = std::borrow::Cow::Owned(
                sal.resize_to(gt.width(), gt.height())
                    .map_err(|e| e.to_string())?,
            );
        }
        MetricRecord::compute(&sal, gt, beta2).map_err(|e| e.to_string())
    });
    aggregate(dataset, model, stems, outputs)
}

/// Per-image best/worst envelope over two candidate scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
    pub images: usize,
}

/// Aggregates the best and worst per-image choice between two runs:
/// `upper` is the mean of per-image maxima, `lower` of minima. Any
/// per-image gate between the two runs lands inside this envelope.
pub fn bound_analysis(per_image: &[(f64, f64)]) -> Result<Bounds> {
    if per_image.is_empty() {
        return Err(Error::EmptyInput("no per-image score pairs".into()));
    }
    let n = per_image.len() as f64;
    let mut lo = 0.0;
    let mut hi = 0.0;
    for (a, b) in per_image {
        lo += a.min(*b);
        hi += a.max(*b);
    }
    Ok(Bounds {
        lower: lo / n,
        upper: hi / n,
        images: per_image.len(),
    })
}
