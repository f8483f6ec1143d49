//! Depth-aware fusion gate: picks the final prediction between the RGB-D
//! and RGB-only maps by how far the RGB-D map sits from the depth-only map,
//! plus a depth-histogram quality diagnostic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{scale_to_u8, SaliencyMap};
use crate::metrics::mae_maps;

/// Gate threshold that worked best in practice.
pub const DEFAULT_GATE_THRESHOLD: f64 = 0.15;

/// Default smoothing window for depth histograms.
pub const DEFAULT_SMOOTH_WINDOW: usize = 9;

/// Default peak-prominence floor, as a fraction of total pixel mass.
pub const DEFAULT_PROMINENCE_FLOOR: f64 = 0.02;

/// Outcome of the gate: was the depth-informed prediction kept?
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gate {
    KeptDepth,
    DiscardedDepth,
}

impl Gate {
    pub fn as_str(&self) -> &'static str {
        match self {
            Gate::KeptDepth => "kept-depth",
            Gate::DiscardedDepth => "discarded-depth",
        }
    }
}

/// Full gate decision for one image triple. `output` is bitwise one of the
/// two candidates, never a blend.
#[derive(Debug, Clone)]
pub struct FusionDecision {
    pub gate: Gate,
    pub distance: f64,
    pub threshold: f64,
    pub output: SaliencyMap,
}

/// Selects the final prediction: keep the RGB-D map when its mean absolute
/// distance to the depth-only map is at most `t` (ties keep depth), else
/// fall back to the RGB-only map.
pub fn select(
    s_rgb: &SaliencyMap,
    s_rgbd: &SaliencyMap,
    s_depth: &SaliencyMap,
    t: f64,
) -> Result<FusionDecision> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::ThresholdOutOfRange(t));
    }
    if !s_rgb.same_dimensions(s_rgbd) {
        return Err(Error::DimensionMismatch {
            expected_width: s_rgbd.width(),
            expected_height: s_rgbd.height(),
            got_width: s_rgb.width(),
            got_height: s_rgb.height(),
        });
    }
    let distance = mae_maps(s_rgbd, s_depth)?;
    let (gate, output) = if distance <= t {
        (Gate::KeptDepth, s_rgbd.clone())
    } else {
        (Gate::DiscardedDepth, s_rgb.clone())
    };
    Ok(FusionDecision {
        gate,
        distance,
        threshold: t,
        output,
    })
}

/// A retained histogram peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Bin index of the (plateau-collapsed) local maximum.
    pub bin: usize,
    /// Topographic prominence of the smoothed curve scaled by the smoothing
    /// window, so it reads in pixel-mass units comparable to the floor.
    pub prominence: f64,
    /// Raw histogram mass of the peak's basin.
    pub mass: u64,
}

/// 256-bin histogram of a depth map with a smoothed curve and its
/// prominent peaks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DepthHistogram {
    pub bins: Vec<u64>,
    pub smoothed: Vec<f64>,
    pub peaks: Vec<Peak>,
}

/// Coarse depth-quality diagnostic. Never gates the pipeline; the shipped
/// gate is [`select`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DepthQuality {
    LikelyHigh,
    LikelyLow,
}

/// Histogram of round(v*255) with a centered moving-average smoothing and
/// peak extraction at the default prominence floor.
pub fn depth_histogram(depth: &SaliencyMap, smooth_window: usize) -> Result<DepthHistogram> {
    depth_histogram_with(depth, smooth_window, DEFAULT_PROMINENCE_FLOOR)
}

/// As [`depth_histogram`] with an explicit prominence floor (fraction of
/// total pixel mass).
pub fn depth_histogram_with(
    depth: &SaliencyMap,
    smooth_window: usize,
    prominence_floor: f64,
) -> Result<DepthHistogram> {
    if smooth_window == 0 || smooth_window.is_multiple_of(2) {
        return Err(Error::BadSmoothWindow(smooth_window));
    }
    let mut bins = vec![0u64; 256];
    for v in depth.values() {
        bins[scale_to_u8(*v) as usize] += 1;
    }
    let smoothed = smooth(&bins, smooth_window);
    let total = depth.pixel_count() as f64;
    let peaks = find_peaks(&bins, &smoothed, smooth_window, prominence_floor * total);
    Ok(DepthHistogram {
        bins,
        smoothed,
        peaks,
    })
}

/// Moving average that scatters each bin's mass over its window with the
/// destinations clamped into range, so edge mass piles up at bins 0/255
/// and the total is preserved exactly.
fn smooth(bins: &[u64], window: usize) -> Vec<f64> {
    let half = (window / 2) as isize;
    let share = 1.0 / window as f64;
    let mut out = vec![0.0; bins.len()];
    let last = bins.len() as isize - 1;
    for (i, &count) in bins.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let mass = count as f64 * share;
        for k in -half..=half {
            let j = (i as isize + k).clamp(0, last) as usize;
            out[j] += mass;
        }
    }
    out
}

/// Plateau-collapsed local maxima whose topographic prominence, scaled by
/// the smoothing window so it reads in pixel-mass units, reaches `floor`.
/// Each peak carries the raw mass of its basin (split at the lowest
/// smoothed point between neighbours).
fn find_peaks(bins: &[u64], smoothed: &[f64], window: usize, floor: f64) -> Vec<Peak> {
    let n = smoothed.len();
    let mut candidates = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && smoothed[j + 1] == smoothed[i] {
            j += 1;
        }
        let left_lower = i == 0 || smoothed[i - 1] < smoothed[i];
        let right_lower = j + 1 == n || smoothed[j + 1] < smoothed[i];
        if left_lower && right_lower && smoothed[i] > 0.0 {
            candidates.push((i + j) / 2);
        }
        i = j + 1;
    }

    // Key-saddle prominence; a side that ends at the histogram border
    // without samples does not constrain the base.
    let prominence = |p: usize| -> f64 {
        let h = smoothed[p];
        let mut left_base = f64::NEG_INFINITY;
        for k in (0..p).rev() {
            if smoothed[k] > h {
                break;
            }
            left_base = if left_base.is_finite() {
                left_base.min(smoothed[k])
            } else {
                smoothed[k]
            };
        }
        let mut right_base = f64::NEG_INFINITY;
        for &v in &smoothed[p + 1..] {
            if v > h {
                break;
            }
            right_base = if right_base.is_finite() {
                right_base.min(v)
            } else {
                v
            };
        }
        let base = left_base.max(right_base);
        if base.is_finite() {
            (h - base) * window as f64
        } else {
            h * window as f64
        }
    };

    let retained: Vec<(usize, f64)> = candidates
        .into_iter()
        .map(|p| (p, prominence(p)))
        .filter(|(_, prom)| *prom >= floor)
        .collect();

    // Basin boundaries: lowest smoothed point between adjacent peaks.
    let mut boundaries = vec![0usize];
    for pair in retained.windows(2) {
        let (a, b) = (pair[0].0, pair[1].0);
        let split = (a..=b)
            .min_by(|&x, &y| smoothed[x].partial_cmp(&smoothed[y]).unwrap())
            .unwrap();
        boundaries.push(split);
    }
    boundaries.push(bins.len());

    retained
        .into_iter()
        .enumerate()
        .map(|(k, (bin, prominence))| Peak {
            bin,
            prominence,
            mass: bins[boundaries[k]..boundaries[k + 1]].iter().sum(),
        })
        .collect()
}

/// Likely-high iff at least two peaks each hold >= 10% of total mass and
/// the extreme qualifying peaks sit >= 32 bins apart.
pub fn depth_quality_label(h: &DepthHistogram) -> DepthQuality {
    let total: u64 = h.bins.iter().sum();
    let qualifying: Vec<&Peak> = h
        .peaks
        .iter()
        .filter(|p| p.mass as f64 >= 0.10 * total as f64)
        .collect();
    if qualifying.len() < 2 {
        return DepthQuality::LikelyLow;
    }
    let min_bin = qualifying.iter().map(|p| p.bin).min().unwrap();
    let max_bin = qualifying.iter().map(|p| p.bin).max().unwrap();
    if max_bin - min_bin >= 32 {
        DepthQuality::LikelyHigh
    } else {
        DepthQuality::LikelyLow
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn constant(v: f64) -> SaliencyMap {
        SaliencyMap::constant(4, 4, v).unwrap()
    }

    #[test]
    fn zero_distance_keeps_depth() {
        let rgb = constant(0.2);
        let rgbd = constant(0.6);
        let depth = constant(0.6);
        let d = select(&rgb, &rgbd, &depth, 0.15).unwrap();
        assert_eq!(d.gate, Gate::KeptDepth);
        assert_eq!(d.distance, 0.0);
        assert_eq!(d.output, rgbd);
    }

    #[test]
    fn far_maps_fall_back_to_rgb() {
        let rgb = constant(0.3);
        let rgbd = constant(0.9);
        let depth = constant(0.6);
        // distance 0.3 > 0.15
        let d = select(&rgb, &rgbd, &depth, 0.15).unwrap();
        assert_eq!(d.gate, Gate::DiscardedDepth);
        assert_eq!(d.output, rgb);
    }

    #[test]
    fn tie_at_threshold_keeps_depth() {
        // Single-pixel maps make the distance bit-exact.
        let rgb = SaliencyMap::constant(1, 1, 0.4).unwrap();
        let rgbd = SaliencyMap::constant(1, 1, 0.15).unwrap();
        let depth = SaliencyMap::constant(1, 1, 0.0).unwrap();
        let d = select(&rgb, &rgbd, &depth, 0.15).unwrap();
        assert_eq!(d.distance, 0.15);
        assert_eq!(d.gate, Gate::KeptDepth);
    }

    #[test]
    fn zero_threshold_needs_exact_agreement() {
        let rgb = constant(0.2);
        let rgbd = constant(0.6);
        assert_eq!(
            select(&rgb, &rgbd, &rgbd.clone(), 0.0).unwrap().gate,
            Gate::KeptDepth
        );
        let nearly = SaliencyMap::constant(4, 4, 0.6 + 1e-9).unwrap();
        assert_eq!(
            select(&rgb, &rgbd, &nearly, 0.0).unwrap().gate,
            Gate::DiscardedDepth
        );
    }

    #[test]
    fn rejects_out_of_range_threshold() {
        let m = constant(0.5);
        assert!(select(&m, &m, &m, 1.5).is_err());
        assert!(select(&m, &m, &m, -0.1).is_err());
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let m = constant(0.5);
        let other = SaliencyMap::constant(2, 2, 0.5).unwrap();
        assert!(select(&other, &m, &m, 0.15).is_err());
        assert!(select(&m, &m, &other, 0.15).is_err());
    }

    #[test]
    fn histogram_of_constant_map_has_one_peak() {
        let m = constant(0.5);
        let h = depth_histogram(&m, 9).unwrap();
        assert_eq!(h.bins.iter().sum::<u64>(), 16);
        assert_eq!(h.peaks.len(), 1);
        assert_eq!(depth_quality_label(&h), DepthQuality::LikelyLow);
    }

    #[test]
    fn bimodal_map_is_likely_high() {
        let mut values = vec![0.2; 32];
        values.extend(vec![0.8; 32]);
        let m = SaliencyMap::new(8, 8, values).unwrap();
        for window in [1usize, 9, 31] {
            let h = depth_histogram(&m, window).unwrap();
            assert_eq!(h.peaks.len(), 2, "window {window}");
            assert_eq!(depth_quality_label(&h), DepthQuality::LikelyHigh);
        }
    }

    #[test]
    fn smoothing_preserves_mass() {
        let mut values: Vec<f64> = Vec::new();
        for i in 0..256 {
            values.push(i as f64 / 255.0);
        }
        let m = SaliencyMap::new(16, 16, values).unwrap();
        let h = depth_histogram(&m, 9).unwrap();
        let total: f64 = h.smoothed.iter().sum();
        assert!((total - 256.0).abs() / 256.0 < 1e-6);
    }

    #[test]
    fn edge_bin_mass_stays_in_range() {
        let m = SaliencyMap::constant(4, 4, 0.0).unwrap();
        let h = depth_histogram(&m, 9).unwrap();
        let total: f64 = h.smoothed.iter().sum();
        assert!((total - 16.0).abs() < 1e-9);
        assert_eq!(h.peaks.len(), 1);
        assert_eq!(h.peaks[0].bin, 0);
    }

    #[test]
    fn uniform_random_depth_is_likely_low() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let values: Vec<f64> = (0..128 * 128).map(|_| rng.gen_range(0.0..=1.0)).collect();
        let m = SaliencyMap::new(128, 128, values).unwrap();
        let h = depth_histogram(&m, 9).unwrap();
        assert_eq!(depth_quality_label(&h), DepthQuality::LikelyLow);
    }

    #[test]
    fn rejects_even_window() {
        let m = constant(0.5);
        assert!(depth_histogram(&m, 0).is_err());
        assert!(depth_histogram(&m, 4).is_err());
    }

    proptest! {
        #[test]
        fn gate_with_t_one_always_keeps_depth(
            a in proptest::collection::vec(0.0f64..=1.0, 9),
            b in proptest::collection::vec(0.0f64..=1.0, 9),
            c in proptest::collection::vec(0.0f64..=1.0, 9)) {
            let rgb = SaliencyMap::new(3, 3, a).unwrap();
            let rgbd = SaliencyMap::new(3, 3, b).unwrap();
            let depth = SaliencyMap::new(3, 3, c).unwrap();
            let d = select(&rgb, &rgbd, &depth, 1.0).unwrap();
            prop_assert_eq!(d.gate, Gate::KeptDepth);
        }

        #[test]
        fn gate_is_monotone_in_t(
            b in proptest::collection::vec(0.0f64..=1.0, 9),
            c in proptest::collection::vec(0.0f64..=1.0, 9),
            t1 in 0.0f64..=1.0, t2 in 0.0f64..=1.0) {
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let rgb = SaliencyMap::constant(3, 3, 0.5).unwrap();
            let rgbd = SaliencyMap::new(3, 3, b).unwrap();
            let depth = SaliencyMap::new(3, 3, c).unwrap();
            let low = select(&rgb, &rgbd, &depth, lo).unwrap();
            let high = select(&rgb, &rgbd, &depth, hi).unwrap();
            if low.gate == Gate::KeptDepth {
                prop_assert_eq!(high.gate, Gate::KeptDepth);
            }
        }

        #[test]
        fn gate_invariant_under_joint_permutation(
            a in proptest::collection::vec(0.0f64..=1.0, 8),
            b in proptest::collection::vec(0.0f64..=1.0, 8),
            c in proptest::collection::vec(0.0f64..=1.0, 8),
            seed in 0u64..1000) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut order: Vec<usize> = (0..8).collect();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            order.shuffle(&mut rng);
            let perm = |v: &[f64]| -> Vec<f64> { order.iter().map(|&i| v[i]).collect() };

            let base = select(
                &SaliencyMap::new(4, 2, a.clone()).unwrap(),
                &SaliencyMap::new(4, 2, b.clone()).unwrap(),
                &SaliencyMap::new(4, 2, c.clone()).unwrap(),
                0.15,
            ).unwrap();
            let permuted = select(
                &SaliencyMap::new(4, 2, perm(&a)).unwrap(),
                &SaliencyMap::new(4, 2, perm(&b)).unwrap(),
                &SaliencyMap::new(4, 2, perm(&c)).unwrap(),
                0.15,
            ).unwrap();
            prop_assert_eq!(base.gate, permuted.gate);
            prop_assert!((base.distance - permuted.distance).abs() < 1e-12);
            let expected: Vec<f64> = perm(base.output.values());
            prop_assert_eq!(permuted.output.values(), expected.as_slice());
        }
    }
}
