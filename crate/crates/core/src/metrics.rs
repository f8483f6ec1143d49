//! Per-image-pair evaluation metrics: MAE, threshold curves with precision /
//! recall / F, structure measure, enhanced-alignment measure, and binary
//! cross-entropy as a map-comparison diagnostic.
//!
//! All functions are pure and operate on one (map, mask) pair at dimensions
//! that must already agree; the harness resizes predictions beforehand.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{scale_to_u8, BinaryMask, SaliencyMap};

/// Default F-measure weighting (beta squared).
pub const DEFAULT_BETA2: f64 = 0.3;

/// Balance between object-aware and region-aware structure terms.
pub const S_MEASURE_ALPHA: f64 = 0.5;

/// Clamp bound for probabilities inside the cross-entropy loss.
pub const BCE_EPS: f64 = 1e-7;

/// Guard for the enhanced-alignment denominator. Machine epsilon keeps a
/// perfect prediction at 1.0 to well below 1e-9.
const ALIGN_EPS: f64 = f64::EPSILON;

/// Pixel counts from comparing a binarized prediction against ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub true_pos: u64,
    pub false_pos: u64,
    pub false_neg: u64,
    pub true_neg: u64,
}

impl Confusion {
    pub fn total(&self) -> u64 {
        self.true_pos + self.false_pos + self.false_neg + self.true_neg
    }

    /// tp / (tp + fp), with 0 when the prediction is empty.
    pub fn precision(&self) -> f64 {
        let denom = self.true_pos + self.false_pos;
        if denom == 0 {
            0.0
        } else {
            self.true_pos as f64 / denom as f64
        }
    }

    /// tp / (tp + fn); only meaningful when the ground truth is non-empty.
    pub fn recall(&self) -> f64 {
        let denom = self.true_pos + self.false_neg;
        if denom == 0 {
            0.0
        } else {
            self.true_pos as f64 / denom as f64
        }
    }
}

/// One entry of the 256-threshold sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub threshold: u8,
    pub precision: f64,
    pub recall: f64,
    pub f_beta: f64,
    pub e_value: f64,
}

/// All per-image scores plus the full threshold curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub mae: f64,
    pub f_max: f64,
    pub f_adaptive: f64,
    pub s_measure: f64,
    pub e_max: f64,
    pub bce: f64,
    pub curve: Vec<CurvePoint>,
}

fn check_dims(sw: u32, sh: u32, gw: u32, gh: u32) -> Result<()> {
    if sw != gw || sh != gh {
        return Err(Error::DimensionMismatch {
            expected_width: gw,
            expected_height: gh,
            got_width: sw,
            got_height: sh,
        });
    }
    Ok(())
}

/// Mean absolute error between a real-valued map and a binary ground truth.
pub fn mae(sal: &SaliencyMap, gt: &BinaryMask) -> Result<f64> {
    check_dims(sal.width(), sal.height(), gt.width(), gt.height())?;
    let sum: f64 = sal
        .values()
        .iter()
        .zip(gt.bits())
        .map(|(v, g)| (v - f64::from(*g)).abs())
        .sum();
    Ok(sum / sal.pixel_count() as f64)
}

/// Mean absolute error between two real-valued maps (the fusion gate's
/// distance function).
pub fn mae_maps(a: &SaliencyMap, b: &SaliencyMap) -> Result<f64> {
    check_dims(a.width(), a.height(), b.width(), b.height())?;
    let sum: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .sum();
    Ok(sum / a.pixel_count() as f64)
}

/// Confusion counts of binarize(sal, theta) against the ground truth.
pub fn confusion_at(sal: &SaliencyMap, gt: &BinaryMask, theta: u8) -> Result<Confusion> {
    check_dims(sal.width(), sal.height(), gt.width(), gt.height())?;
    let mut c = Confusion {
        true_pos: 0,
        false_pos: 0,
        false_neg: 0,
        true_neg: 0,
    };
    for (v, g) in sal.values().iter().zip(gt.bits()) {
        let p = scale_to_u8(*v) >= theta;
        match (p, *g == 1) {
            (true, true) => c.true_pos += 1,
            (true, false) => c.false_pos += 1,
            (false, true) => c.false_neg += 1,
            (false, false) => c.true_neg += 1,
        }
    }
    Ok(c)
}

/// Weighted harmonic mean of precision and recall; 0 when the
/// denominator vanishes.
pub fn f_beta(precision: f64, recall: f64, beta2: f64) -> f64 {
    let denom = beta2 * precision + recall;
    if denom == 0.0 {
        0.0
    } else {
        (1.0 + beta2) * precision * recall / denom
    }
}

/// Threshold for the adaptive F-measure: twice the mean saliency, scaled
/// to 8 bits and clamped.
pub fn adaptive_threshold(sal: &SaliencyMap) -> u8 {
    (2.0 * sal.mean() * 255.0).round().clamp(0.0, 255.0) as u8
}

/// F-measure at the adaptive threshold.
pub fn f_adaptive(sal: &SaliencyMap, gt: &BinaryMask, beta2: f64) -> Result<f64> {
    check_dims(sal.width(), sal.height(), gt.width(), gt.height())?;
    if gt.foreground_count() == 0 {
        return Err(Error::EmptyGroundTruth);
    }
    let c = confusion_at(sal, gt, adaptive_threshold(sal))?;
    Ok(f_beta(c.precision(), c.recall(), beta2))
}

// -------------------------------------------------------------------------
// Threshold sweep
// -------------------------------------------------------------------------

/// Per-threshold confusion counts for the full 0..=255 sweep, built from
/// one histogram pass so the sweep itself is O(256).
struct ThresholdCounts {
    tp_at: [u64; 256],
    pred_pos_at: [u64; 256],
    total_fg: u64,
    total: u64,
}

impl ThresholdCounts {
    fn build(sal: &SaliencyMap, gt: &BinaryMask) -> Self {
        let mut hist_fg = [0u64; 256];
        let mut hist_bg = [0u64; 256];
        for (v, g) in sal.values().iter().zip(gt.bits()) {
            let s = scale_to_u8(*v) as usize;
            if *g == 1 {
                hist_fg[s] += 1;
            } else {
                hist_bg[s] += 1;
            }
        }
        Self::from_histograms(&hist_fg, &hist_bg)
    }

    fn from_histograms(hist_fg: &[u64; 256], hist_bg: &[u64; 256]) -> Self {
        let mut tp_at = [0u64; 256];
        let mut pred_pos_at = [0u64; 256];
        let mut tp = 0u64;
        let mut pp = 0u64;
        for s in (0..256).rev() {
            tp += hist_fg[s];
            pp += hist_fg[s] + hist_bg[s];
            tp_at[s] = tp;
            pred_pos_at[s] = pp;
        }
        ThresholdCounts {
            tp_at,
            pred_pos_at,
            total_fg: tp_at[0],
            total: pred_pos_at[0],
        }
    }

    fn confusion(&self, theta: u8) -> Confusion {
        let tp = self.tp_at[theta as usize];
        let pp = self.pred_pos_at[theta as usize];
        let fp = pp - tp;
        Confusion {
            true_pos: tp,
            false_pos: fp,
            false_neg: self.total_fg - tp,
            true_neg: (self.total - self.total_fg) - fp,
        }
    }
}

/// Enhanced-alignment score straight from confusion counts. For binary
/// inputs the alignment matrix takes one value per confusion cell, so the
/// image mean collapses to four weighted terms.
fn e_from_confusion(c: &Confusion) -> f64 {
    let n = c.total() as f64;
    let fg = (c.true_pos + c.false_neg) as f64;
    if fg == 0.0 {
        // All-background ground truth: score the prediction's emptiness.
        return c.true_neg as f64 / n;
    }
    if fg == n {
        return c.true_pos as f64 / n;
    }
    let mu_g = fg / n;
    let mu_s = (c.true_pos + c.false_pos) as f64 / n;
    let enhanced = |g: f64, s: f64| {
        let dg = g - mu_g;
        let ds = s - mu_s;
        let align = 2.0 * dg * ds / (dg * dg + ds * ds + ALIGN_EPS);
        0.25 * (1.0 + align) * (1.0 + align)
    };
    (c.true_pos as f64 * enhanced(1.0, 1.0)
        + c.false_pos as f64 * enhanced(0.0, 1.0)
        + c.false_neg as f64 * enhanced(1.0, 0.0)
        + c.true_neg as f64 * enhanced(0.0, 0.0))
        / n
}

/// Enhanced-alignment measure of a binary prediction against ground truth.
pub fn e_measure(binpred: &BinaryMask, gt: &BinaryMask) -> Result<f64> {
    check_dims(binpred.width(), binpred.height(), gt.width(), gt.height())?;
    let mut c = Confusion {
        true_pos: 0,
        false_pos: 0,
        false_neg: 0,
        true_neg: 0,
    };
    for (p, g) in binpred.bits().iter().zip(gt.bits()) {
        match (*p == 1, *g == 1) {
            (true, true) => c.true_pos += 1,
            (true, false) => c.false_pos += 1,
            (false, true) => c.false_neg += 1,
            (false, false) => c.true_neg += 1,
        }
    }
    Ok(e_from_confusion(&c))
}

fn curve_from_counts(counts: &ThresholdCounts, beta2: f64) -> Vec<CurvePoint> {
    (0..=255u8)
        .map(|theta| {
            let c = counts.confusion(theta);
            let precision = c.precision();
            let recall = c.recall();
            CurvePoint {
                threshold: theta,
                precision,
                recall,
                f_beta: f_beta(precision, recall, beta2),
                e_value: e_from_confusion(&c),
            }
        })
        .collect()
}

/// Full 256-point threshold sweep. Errors on an all-background ground
/// truth, where recall is undefined.
pub fn pr_curve(sal: &SaliencyMap, gt: &BinaryMask, beta2: f64) -> Result<Vec<CurvePoint>> {
    check_dims(sal.width(), sal.height(), gt.width(), gt.height())?;
    if gt.foreground_count() == 0 {
        return Err(Error::EmptyGroundTruth);
    }
    Ok(curve_from_counts(&ThresholdCounts::build(sal, gt), beta2))
}

/// The confusion counts behind the curve, one per threshold 0..=255,
/// from the same single histogram pass [`pr_curve`] uses.
pub fn threshold_confusions(sal: &SaliencyMap, gt: &BinaryMask) -> Result<Vec<Confusion>> {
    check_dims(sal.width(), sal.height(), gt.width(), gt.height())?;
    let counts = ThresholdCounts::build(sal, gt);
    Ok((0..=255u8).map(|theta| counts.confusion(theta)).collect())
}

/// Enhanced-alignment score at each of the 256 binarization thresholds.
/// Defined for degenerate ground truths as well.
pub fn e_curve(sal: &SaliencyMap, gt: &BinaryMask) -> Result<Vec<f64>> {
    check_dims(sal.width(), sal.height(), gt.width(), gt.height())?;
    let counts = ThresholdCounts::build(sal, gt);
    Ok((0..=255u8)
        .map(|theta| e_from_confusion(&counts.confusion(theta)))
        .collect())
}

/// Maximum enhanced-alignment score over the threshold sweep.
pub fn e_max(sal: &SaliencyMap, gt: &BinaryMask) -> Result<f64> {
    Ok(e_curve(sal, gt)?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max))
}

// -------------------------------------------------------------------------
// Structure measure
// -------------------------------------------------------------------------

fn mean_and_sample_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Dissimilarity-free region score 2m / (m^2 + 1 + 2s); near-constant
/// regions with mean 1 score ~1.
fn object_score(mean: f64, std: f64) -> f64 {
    2.0 * mean / (mean * mean + 1.0 + 2.0 * std + f64::EPSILON)
}

fn s_object(sal: &SaliencyMap, gt: &BinaryMask, fg_fraction: f64) -> f64 {
    let mut fg_vals = Vec::new();
    let mut bg_vals = Vec::new();
    for (v, g) in sal.values().iter().zip(gt.bits()) {
        if *g == 1 {
            fg_vals.push(*v);
        } else {
            bg_vals.push(1.0 - *v);
        }
    }
    let (fg_mean, fg_std) = mean_and_sample_std(&fg_vals);
    let (bg_mean, bg_std) = mean_and_sample_std(&bg_vals);
    fg_fraction * object_score(fg_mean, fg_std)
        + (1.0 - fg_fraction) * object_score(bg_mean, bg_std)
}

/// Structural-similarity term over one rectangular block: means, sample
/// variances, and covariance of map vs mask.
fn block_ssim(sal: &SaliencyMap, gt: &BinaryMask, x0: u32, x1: u32, y0: u32, y1: u32) -> f64 {
    let n = ((x1 - x0) as usize) * ((y1 - y0) as usize);
    let mut sum_x = 0.0;
    let mut sum_y = 0.0;
    for y in y0..y1 {
        for x in x0..x1 {
            sum_x += sal.get(x, y);
            sum_y += f64::from(gt.get(x, y));
        }
    }
    let mean_x = sum_x / n as f64;
    let mean_y = sum_y / n as f64;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    let mut cov = 0.0;
    if n > 1 {
        for y in y0..y1 {
            for x in x0..x1 {
                let dx = sal.get(x, y) - mean_x;
                let dy = f64::from(gt.get(x, y)) - mean_y;
                var_x += dx * dx;
                var_y += dy * dy;
                cov += dx * dy;
            }
        }
        let denom = (n - 1) as f64;
        var_x /= denom;
        var_y /= denom;
        cov /= denom;
    }
    let alpha = 4.0 * mean_x * mean_y * cov;
    let beta = (mean_x * mean_x + mean_y * mean_y) * (var_x + var_y);
    if alpha != 0.0 {
        // beta >= |alpha| whenever alpha != 0, so the division is safe and a
        // perfect match scores 1 without an epsilon pulling it below.
        alpha / beta
    } else if beta == 0.0 {
        1.0
    } else {
        0.0
    }
}

fn s_region(sal: &SaliencyMap, gt: &BinaryMask) -> f64 {
    let w = gt.width();
    let h = gt.height();
    let total_fg = gt.foreground_count() as f64;

    // Foreground centroid, rounded in 1-based coordinates so the left/top
    // blocks are never empty.
    let mut sum_x = 0.0;
    let mut sum_y = 0.0;
    for y in 0..h {
        for x in 0..w {
            if gt.get(x, y) == 1 {
                sum_x += f64::from(x + 1);
                sum_y += f64::from(y + 1);
            }
        }
    }
    let split_x = (sum_x / total_fg).round() as u32;
    let split_y = (sum_y / total_fg).round() as u32;

    let blocks = [
        (0, split_x, 0, split_y),
        (split_x, w, 0, split_y),
        (0, split_x, split_y, h),
        (split_x, w, split_y, h),
    ];
    let mut score = 0.0;
    for (x0, x1, y0, y1) in blocks {
        if x0 >= x1 || y0 >= y1 {
            continue;
        }
        let mut fg_in_block = 0u64;
        for y in y0..y1 {
            for x in x0..x1 {
                fg_in_block += u64::from(gt.get(x, y));
            }
        }
        if fg_in_block == 0 {
            continue;
        }
        let weight = fg_in_block as f64 / total_fg;
        score += weight * block_ssim(sal, gt, x0, x1, y0, y1);
    }
    score
}

/// Structure measure: equal blend of the object-aware and region-aware
/// structural similarity, clamped to [0,1]. Degenerate ground truths fall
/// back to scoring overall map darkness/brightness.
pub fn s_measure(sal: &SaliencyMap, gt: &BinaryMask) -> Result<f64> {
    check_dims(sal.width(), sal.height(), gt.width(), gt.height())?;
    let n = gt.pixel_count();
    let fg = gt.foreground_count();
    let score = if fg == 0 {
        1.0 - sal.mean()
    } else if fg == n {
        sal.mean()
    } else {
        let fg_fraction = fg as f64 / n as f64;
        S_MEASURE_ALPHA * s_object(sal, gt, fg_fraction)
            + (1.0 - S_MEASURE_ALPHA) * s_region(sal, gt)
    };
    Ok(score.clamp(0.0, 1.0))
}

// -------------------------------------------------------------------------
// Cross-entropy
// -------------------------------------------------------------------------

/// Binary cross-entropy between a real-valued map and a binary mask, with
/// probabilities clamped away from {0,1}.
pub fn bce(sal: &SaliencyMap, gt: &BinaryMask) -> Result<f64> {
    check_dims(sal.width(), sal.height(), gt.width(), gt.height())?;
    let sum: f64 = sal
        .values()
        .iter()
        .zip(gt.bits())
        .map(|(v, g)| {
            let s = v.clamp(BCE_EPS, 1.0 - BCE_EPS);
            if *g == 1 {
                -s.ln()
            } else {
                -(1.0 - s).ln()
            }
        })
        .sum();
    Ok(sum / sal.pixel_count() as f64)
}

impl MetricRecord {
    /// Evaluates all metrics for one prediction/ground-truth pair. The pair
    /// must share dimensions and the ground truth must contain at least one
    /// foreground pixel (otherwise recall, and with it the curve, is
    /// undefined and the pair is flagged via `EmptyGroundTruth`).
    pub fn compute(sal: &SaliencyMap, gt: &BinaryMask, beta2: f64) -> Result<MetricRecord> {
        check_dims(sal.width(), sal.height(), gt.width(), gt.height())?;
        if gt.foreground_count() == 0 {
            return Err(Error::EmptyGroundTruth);
        }
        let n = sal.pixel_count() as f64;

        let mut abs_sum = 0.0;
        let mut bce_sum = 0.0;
        let mut sal_sum = 0.0;
        let mut hist_fg = [0u64; 256];
        let mut hist_bg = [0u64; 256];
        for (v, g) in sal.values().iter().zip(gt.bits()) {
            let clamped = v.clamp(BCE_EPS, 1.0 - BCE_EPS);
            if *g == 1 {
                abs_sum += 1.0 - v;
                bce_sum -= clamped.ln();
                hist_fg[scale_to_u8(*v) as usize] += 1;
            } else {
                abs_sum += v;
                bce_sum -= (1.0 - clamped).ln();
                hist_bg[scale_to_u8(*v) as usize] += 1;
            }
            sal_sum += v;
        }

        let counts = ThresholdCounts::from_histograms(&hist_fg, &hist_bg);
        let curve = curve_from_counts(&counts, beta2);
        let f_max = curve
            .iter()
            .map(|p| p.f_beta)
            .fold(f64::NEG_INFINITY, f64::max);
        let e_max = curve
            .iter()
            .map(|p| p.e_value)
            .fold(f64::NEG_INFINITY, f64::max);

        let adaptive = (2.0 * (sal_sum / n) * 255.0).round().clamp(0.0, 255.0) as u8;
        let c = counts.confusion(adaptive);
        let f_adaptive = f_beta(c.precision(), c.recall(), beta2);

        Ok(MetricRecord {
            mae: abs_sum / n,
            f_max,
            f_adaptive,
            s_measure: s_measure(sal, gt)?,
            e_max,
            bce: bce_sum / n,
            curve,
        })
    }
}
