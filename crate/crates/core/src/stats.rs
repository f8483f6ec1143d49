//! Ground-truth mask statistics: center bias (normalized centroid and
//! margin distances), object size, connected components, and the
//! distributions used to characterize a dataset.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::BinaryMask;

/// Per-mask statistics. Distances are normalized by the image half-diagonal
/// so the farthest possible pixel scores 1.0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskStats {
    /// Normalized distance from the foreground centroid to the image center.
    pub r_o: f64,
    /// Normalized distance of the farthest foreground pixel from the center.
    pub r_m: f64,
    /// Foreground fraction of the image.
    pub size: f64,
    /// Number of 8-connected foreground components.
    pub components: usize,
}

/// min/max/mean over one statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStat {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

/// Dataset-level aggregation of per-mask statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    /// Masks that contributed (non-empty foreground).
    pub images: usize,
    /// Masks excluded for having no foreground.
    pub empty_masks: usize,
    pub size: SummaryStat,
    pub r_o: SummaryStat,
    pub r_m: SummaryStat,
    pub components_mean: f64,
}

/// Computes center-bias and size statistics for one mask. The image center
/// for even dimensions sits between pixels at ((W-1)/2, (H-1)/2).
pub fn mask_stats(gt: &BinaryMask) -> Result<MaskStats> {
    let w = gt.width();
    let h = gt.height();
    let center_x = f64::from(w - 1) / 2.0;
    let center_y = f64::from(h - 1) / 2.0;
    let half_diag = (center_x * center_x + center_y * center_y).sqrt();

    let mut fg = 0u64;
    let mut sum_x = 0.0;
    let mut sum_y = 0.0;
    let mut max_dist = 0.0f64;
    for y in 0..h {
        for x in 0..w {
            if gt.get(x, y) == 1 {
                fg += 1;
                sum_x += f64::from(x);
                sum_y += f64::from(y);
                let dx = f64::from(x) - center_x;
                let dy = f64::from(y) - center_y;
                max_dist = max_dist.max((dx * dx + dy * dy).sqrt());
            }
        }
    }
    if fg == 0 {
        return Err(Error::EmptyMask);
    }
    let cx = sum_x / fg as f64;
    let cy = sum_y / fg as f64;
    let center_dist = ((cx - center_x).powi(2) + (cy - center_y).powi(2)).sqrt();
    let normalize = |d: f64| if half_diag == 0.0 { 0.0 } else { d / half_diag };

    Ok(MaskStats {
        r_o: normalize(center_dist),
        r_m: normalize(max_dist),
        size: fg as f64 / gt.pixel_count() as f64,
        components: component_count(gt),
    })
}

/// Number of 8-connected foreground components.
pub fn component_count(gt: &BinaryMask) -> usize {
    let w = gt.width() as i64;
    let h = gt.height() as i64;
    let idx = |x: i64, y: i64| (y * w + x) as usize;
    let mut visited = vec![false; gt.pixel_count()];
    let mut stack = Vec::new();
    let mut components = 0;
    for y in 0..h {
        for x in 0..w {
            if gt.bits()[idx(x, y)] == 0 || visited[idx(x, y)] {
                continue;
            }
            components += 1;
            visited[idx(x, y)] = true;
            stack.push((x, y));
            while let Some((px, py)) = stack.pop() {
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let (nx, ny) = (px + dx, py + dy);
                        if nx < 0 || ny < 0 || nx >= w || ny >= h {
                            continue;
                        }
                        let i = idx(nx, ny);
                        if gt.bits()[i] == 1 && !visited[i] {
                            visited[i] = true;
                            stack.push((nx, ny));
                        }
                    }
                }
            }
        }
    }
    components
}

/// Normalized histogram over [0,1]: probabilities sum to 1 and values at
/// exactly 1.0 land in the last bin.
pub fn distribution(values: &[f64], bins: usize) -> Result<Vec<f64>> {
    if bins == 0 {
        return Err(Error::EmptyInput("histogram needs at least one bin".into()));
    }
    if values.is_empty() {
        return Err(Error::EmptyInput("no values to bin".into()));
    }
    let mut counts = vec![0u64; bins];
    for (index, &v) in values.iter().enumerate() {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::ValueOutOfRange { index, value: v });
        }
        let bin = ((v * bins as f64) as usize).min(bins - 1);
        counts[bin] += 1;
    }
    let total = values.len() as f64;
    Ok(counts.into_iter().map(|c| c as f64 / total).collect())
}

/// min/max/mean of size, r_o, and r_m across a dataset. Empty masks are
/// counted but excluded from the statistics.
pub fn dataset_summary(masks: &[BinaryMask]) -> Result<DatasetSummary> {
    let mut stats = Vec::with_capacity(masks.len());
    let mut empty_masks = 0;
    for mask in masks {
        match mask_stats(mask) {
            Ok(s) => stats.push(s),
            Err(Error::EmptyMask) => empty_masks += 1,
            Err(e) => return Err(e),
        }
    }
    if stats.is_empty() {
        return Err(Error::EmptyInput("no mask with foreground pixels".into()));
    }
    let summarize = |extract: fn(&MaskStats) -> f64| -> SummaryStat {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut sum = 0.0;
        for s in &stats {
            let v = extract(s);
            min = min.min(v);
            max = max.max(v);
            sum += v;
        }
        SummaryStat {
            min,
            max,
            mean: sum / stats.len() as f64,
        }
    };
    Ok(DatasetSummary {
        images: stats.len(),
        empty_masks,
        size: summarize(|s| s.size),
        r_o: summarize(|s| s.r_o),
        r_m: summarize(|s| s.r_m),
        components_mean: stats.iter().map(|s| s.components as f64).sum::<f64>()
            / stats.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mask(w: u32, h: u32, bits: Vec<u8>) -> BinaryMask {
        BinaryMask::new(w, h, bits).unwrap()
    }

    /// Square blob with top-left corner at (x0, y0).
    fn blob(w: u32, h: u32, x0: u32, y0: u32, side: u32) -> BinaryMask {
        let mut bits = vec![0u8; (w * h) as usize];
        for y in y0..y0 + side {
            for x in x0..x0 + side {
                bits[(y * w + x) as usize] = 1;
            }
        }
        mask(w, h, bits)
    }

    #[test]
    fn centered_object_has_zero_center_distance() {
        // 5x5 with center pixel set: centroid == image center.
        let mut bits = vec![0u8; 25];
        bits[12] = 1;
        let s = mask_stats(&mask(5, 5, bits)).unwrap();
        assert_eq!(s.r_o, 0.0);
        assert_eq!(s.r_m, 0.0);
        assert_eq!(s.components, 1);
    }

    #[test]
    fn full_frame_object() {
        let s = mask_stats(&mask(4, 4, vec![1; 16])).unwrap();
        assert_eq!(s.size, 1.0);
        assert!((s.r_m - 1.0).abs() < 1e-12);
        assert_eq!(s.r_o, 0.0);
    }

    #[test]
    fn corner_pixel_geometry() {
        let mut bits = vec![0u8; 100];
        bits[0] = 1;
        let s = mask_stats(&mask(10, 10, bits)).unwrap();
        // centroid (0,0), center (4.5,4.5), half-diagonal 4.5*sqrt(2)
        assert!((s.r_o - 1.0).abs() < 1e-12);
        assert!((s.r_m - 1.0).abs() < 1e-12);
        assert!((s.size - 0.01).abs() < 1e-12);
    }

    #[test]
    fn empty_mask_is_flagged() {
        assert!(matches!(
            mask_stats(&mask(3, 3, vec![0; 9])),
            Err(Error::EmptyMask)
        ));
    }

    #[test]
    fn single_pixel_image_has_zero_distances() {
        // half-diagonal is 0 here; distances define to 0 rather than 0/0
        let s = mask_stats(&mask(1, 1, vec![1])).unwrap();
        assert_eq!((s.r_o, s.r_m, s.size), (0.0, 0.0, 1.0));
    }

    #[test]
    fn moving_blob_toward_center_decreases_r_o() {
        let far = mask_stats(&blob(16, 16, 0, 0, 4)).unwrap();
        let mid = mask_stats(&blob(16, 16, 3, 3, 4)).unwrap();
        let near = mask_stats(&blob(16, 16, 6, 6, 4)).unwrap();
        assert!(far.r_o > mid.r_o);
        assert!(mid.r_o > near.r_o);
    }

    #[test]
    fn component_counting() {
        // Two diagonal pixels are 8-connected; pixels two apart are not.
        assert_eq!(
            component_count(&mask(3, 3, vec![1, 0, 0, 0, 1, 0, 0, 0, 0])),
            1
        );
        assert_eq!(
            component_count(&mask(3, 3, vec![1, 0, 1, 0, 0, 0, 0, 0, 0])),
            2
        );
        assert_eq!(component_count(&mask(2, 2, vec![0, 0, 0, 0])), 0);
    }

    #[test]
    fn distribution_basics() {
        assert_eq!(distribution(&[0.4], 4).unwrap(), vec![0.0, 1.0, 0.0, 0.0]);
        assert_eq!(distribution(&[0.1, 0.9], 2).unwrap(), vec![0.5, 0.5]);
        // A value of exactly 1.0 lands in the last bin.
        assert_eq!(distribution(&[1.0], 3).unwrap(), vec![0.0, 0.0, 1.0]);
        assert!(distribution(&[], 3).is_err());
        assert!(distribution(&[0.5], 0).is_err());
    }

    #[test]
    fn distribution_of_uniform_samples_is_roughly_flat() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let values: Vec<f64> = (0..1000).map(|_| rng.gen_range(0.0..=1.0)).collect();
        let hist = distribution(&values, 10).unwrap();
        for p in hist {
            assert!((p - 0.1).abs() < 0.04, "bin probability {p}");
        }
    }

    #[test]
    fn summary_over_known_masks() {
        let quarter = blob(4, 4, 0, 0, 2); // size 0.25
        let s = dataset_summary(std::slice::from_ref(&quarter)).unwrap();
        assert_eq!(s.size.min, 0.25);
        assert_eq!(s.size.max, 0.25);
        assert_eq!(s.size.mean, 0.25);

        let masks = vec![blob(10, 10, 0, 0, 3), blob(10, 10, 0, 0, 1)]; // sizes 0.09, 0.01
        let s = dataset_summary(&masks).unwrap();
        assert!((s.size.mean - 0.05).abs() < 1e-12);
    }

    #[test]
    fn summary_skips_empty_masks() {
        let masks = vec![mask(2, 2, vec![0; 4]), blob(4, 4, 1, 1, 2)];
        let s = dataset_summary(&masks).unwrap();
        assert_eq!(s.images, 1);
        assert_eq!(s.empty_masks, 1);
        assert!(dataset_summary(&[mask(2, 2, vec![0; 4])]).is_err());
    }

    proptest! {
        #[test]
        fn stats_stay_in_range(bits in proptest::collection::vec(0u8..=1, 36)) {
            prop_assume!(bits.contains(&1));
            let s = mask_stats(&mask(6, 6, bits)).unwrap();
            prop_assert!((0.0..=1.0).contains(&s.r_o));
            prop_assert!((0.0..=1.0).contains(&s.r_m));
            prop_assert!(s.size > 0.0 && s.size <= 1.0);
            // The centroid is a convex combination of foreground pixels, so
            // its distance from the center never exceeds the farthest pixel's.
            prop_assert!(s.r_m >= s.r_o - 1e-12);
        }

        #[test]
        fn distribution_is_permutation_invariant(values in proptest::collection::vec(0.0f64..=1.0, 20)) {
            let mut reversed = values.clone();
            reversed.reverse();
            prop_assert_eq!(distribution(&values, 8).unwrap(), distribution(&reversed, 8).unwrap());
        }

        #[test]
        fn distribution_sums_to_one(values in proptest::collection::vec(0.0f64..=1.0, 50),
                                    bins in 1usize..20) {
            let hist = distribution(&values, bins).unwrap();
            let total: f64 = hist.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
        }
    }
}
