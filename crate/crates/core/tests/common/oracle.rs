//! Independent straight-line transcriptions of the metric formulas, kept
//! deliberately naive: explicit index loops, no shared helpers, nothing
//! reused from the library's computation paths. These are the reference
//! side of the dual-route checks.
#![allow(clippy::needless_range_loop)] // index loops are the point here

/// Brute-force confusion recount: re-binarize at the threshold and count
/// all four cells pixel by pixel.
pub fn naive_confusion(sal: &[f64], gt: &[u8], theta: u8) -> (u64, u64, u64, u64) {
    let mut tp = 0;
    let mut fp = 0;
    let mut fneg = 0;
    let mut tn = 0;
    for i in 0..sal.len() {
        let scaled = (sal[i] * 255.0).round() as u8;
        let predicted = scaled >= theta;
        if predicted && gt[i] == 1 {
            tp += 1;
        } else if predicted && gt[i] == 0 {
            fp += 1;
        } else if !predicted && gt[i] == 1 {
            fneg += 1;
        } else {
            tn += 1;
        }
    }
    (tp, fp, fneg, tn)
}

/// Elementwise transcription of the enhanced-alignment measure over the
/// full bias/alignment matrices.
pub fn e_measure_reference(pred: &[u8], gt: &[u8]) -> f64 {
    let n = gt.len() as f64;
    let mut fg = 0.0;
    for i in 0..gt.len() {
        fg += gt[i] as f64;
    }
    if fg == 0.0 {
        let mut sum = 0.0;
        for i in 0..pred.len() {
            sum += 1.0 - pred[i] as f64;
        }
        return sum / n;
    }
    if fg == n {
        let mut sum = 0.0;
        for i in 0..pred.len() {
            sum += pred[i] as f64;
        }
        return sum / n;
    }
    let mu_g = fg / n;
    let mut pred_sum = 0.0;
    for i in 0..pred.len() {
        pred_sum += pred[i] as f64;
    }
    let mu_s = pred_sum / n;

    let mut total = 0.0;
    for i in 0..gt.len() {
        let bias_g = gt[i] as f64 - mu_g;
        let bias_s = pred[i] as f64 - mu_s;
        let align =
            2.0 * bias_g * bias_s / (bias_g * bias_g + bias_s * bias_s + 2.220446049250313e-16);
        total += 0.25 * (1.0 + align) * (1.0 + align);
    }
    total / n
}

/// Straight-line transcription of the structure measure: object term from
/// foreground/background means and sample deviations, region term from a
/// four-block split at the rounded foreground centroid with
/// foreground-share weights and the classic ssim form per block.
pub fn s_measure_reference(sal: &[f64], gt: &[u8], w: usize, h: usize) -> f64 {
    let n = w * h;
    let mut fg = 0usize;
    for i in 0..n {
        fg += gt[i] as usize;
    }
    if fg == 0 {
        let mut sum = 0.0;
        for i in 0..n {
            sum += sal[i];
        }
        let s = 1.0 - sum / n as f64;
        return s.clamp(0.0, 1.0);
    }
    if fg == n {
        let mut sum = 0.0;
        for i in 0..n {
            sum += sal[i];
        }
        return (sum / n as f64).clamp(0.0, 1.0);
    }
    let mu = fg as f64 / n as f64;

    // ---- object term ----
    let mut fg_sum = 0.0;
    let mut bg_sum = 0.0;
    for i in 0..n {
        if gt[i] == 1 {
            fg_sum += sal[i];
        } else {
            bg_sum += 1.0 - sal[i];
        }
    }
    let bg = n - fg;
    let fg_mean = fg_sum / fg as f64;
    let bg_mean = bg_sum / bg as f64;
    let mut fg_dev = 0.0;
    let mut bg_dev = 0.0;
    for i in 0..n {
        if gt[i] == 1 {
            fg_dev += (sal[i] - fg_mean) * (sal[i] - fg_mean);
        } else {
            bg_dev += (1.0 - sal[i] - bg_mean) * (1.0 - sal[i] - bg_mean);
        }
    }
    let fg_std = if fg > 1 {
        (fg_dev / (fg as f64 - 1.0)).sqrt()
    } else {
        0.0
    };
    let bg_std = if bg > 1 {
        (bg_dev / (bg as f64 - 1.0)).sqrt()
    } else {
        0.0
    };
    let d_fg = 2.0 * fg_mean / (fg_mean * fg_mean + 1.0 + 2.0 * fg_std + 2.220446049250313e-16);
    let d_bg = 2.0 * bg_mean / (bg_mean * bg_mean + 1.0 + 2.0 * bg_std + 2.220446049250313e-16);
    let s_object = mu * d_fg + (1.0 - mu) * d_bg;

    // ---- region term ----
    let mut col_sum = 0.0;
    let mut row_sum = 0.0;
    for y in 0..h {
        for x in 0..w {
            if gt[y * w + x] == 1 {
                col_sum += (x + 1) as f64;
                row_sum += (y + 1) as f64;
            }
        }
    }
    let split_x = (col_sum / fg as f64).round() as usize;
    let split_y = (row_sum / fg as f64).round() as usize;

    let mut s_region = 0.0;
    let block_bounds = [
        (0, split_x, 0, split_y),
        (split_x, w, 0, split_y),
        (0, split_x, split_y, h),
        (split_x, w, split_y, h),
    ];
    for (x0, x1, y0, y1) in block_bounds {
        if x0 >= x1 || y0 >= y1 {
            continue;
        }
        let count = (x1 - x0) * (y1 - y0);
        let mut block_fg = 0usize;
        let mut sum_p = 0.0;
        let mut sum_g = 0.0;
        for y in y0..y1 {
            for x in x0..x1 {
                block_fg += gt[y * w + x] as usize;
                sum_p += sal[y * w + x];
                sum_g += gt[y * w + x] as f64;
            }
        }
        if block_fg == 0 {
            continue;
        }
        let mean_p = sum_p / count as f64;
        let mean_g = sum_g / count as f64;
        let mut var_p = 0.0;
        let mut var_g = 0.0;
        let mut cov = 0.0;
        if count > 1 {
            for y in y0..y1 {
                for x in x0..x1 {
                    let dp = sal[y * w + x] - mean_p;
                    let dg = gt[y * w + x] as f64 - mean_g;
                    var_p += dp * dp;
                    var_g += dg * dg;
                    cov += dp * dg;
                }
            }
            var_p /= count as f64 - 1.0;
            var_g /= count as f64 - 1.0;
            cov /= count as f64 - 1.0;
        }
        let numerator = 4.0 * mean_p * mean_g * cov;
        let denominator = (mean_p * mean_p + mean_g * mean_g) * (var_p + var_g);
        let ssim = if numerator != 0.0 {
            numerator / denominator
        } else if denominator == 0.0 {
            1.0
        } else {
            0.0
        };
        s_region += (block_fg as f64 / fg as f64) * ssim;
    }

    (0.5 * s_object + 0.5 * s_region).clamp(0.0, 1.0)
}
