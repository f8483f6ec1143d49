//! Shared fixtures for the integration and acceptance suites.
#![allow(dead_code)] // not every test binary uses every helper

pub mod oracle;

use rand::Rng;
use sodbench_core::map::{BinaryMask, SaliencyMap};

pub fn random_map<R: Rng>(rng: &mut R, w: u32, h: u32) -> SaliencyMap {
    let values = (0..w as usize * h as usize)
        .map(|_| rng.gen_range(0.0..=1.0))
        .collect();
    SaliencyMap::new(w, h, values).unwrap()
}

/// Bernoulli mask forced to contain at least one foreground and one
/// background pixel.
pub fn random_mixed_mask<R: Rng>(rng: &mut R, w: u32, h: u32, p: f64) -> BinaryMask {
    let n = w as usize * h as usize;
    assert!(n >= 2);
    let mut bits: Vec<u8> = (0..n).map(|_| u8::from(rng.gen_bool(p))).collect();
    bits[0] = 1;
    bits[n - 1] = 0;
    BinaryMask::new(w, h, bits).unwrap()
}
