//! Saliency maps and binary masks: PNG decoding, normalization, resizing,
//! and binarization. Everything downstream consumes these two types.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use crate::error::{Error, Result};

/// Real-valued grayscale map with every pixel in [0,1], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap {
    width: u32,
    height: u32,
    values: Vec<f64>,
}

/// {0,1} mask, row-major. Ground truths and binarized predictions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    bits: Vec<u8>,
}

impl SaliencyMap {
    /// Builds a map from row-major values, validating the [0,1] range and
    /// the length/dimension invariants.
    pub fn new(width: u32, height: u32, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension { width, height });
        }
        let expected = width as usize * height as usize;
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                len: values.len(),
                width,
                height,
            });
        }
        for (index, &value) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::ValueOutOfRange { index, value });
            }
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    /// Constant-valued map.
    pub fn constant(width: u32, height: u32, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width as usize * height as usize])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.values[y as usize * self.width as usize + x as usize]
    }

    pub fn same_dimensions(&self, other: &SaliencyMap) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn same_dimensions_as(&self, mask: &BinaryMask) -> bool {
        self.width == mask.width && self.height == mask.height
    }

    /// Mean pixel value.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Affinely rescales values so min maps to 0 and max to 1.
    /// A constant map collapses to all zeros.
    pub fn normalize(&self) -> SaliencyMap {
        let min = self.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = self
            .values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let values = if max > min {
            let span = max - min;
            self.values.iter().map(|v| (v - min) / span).collect()
        } else {
            vec![0.0; self.values.len()]
        };
        SaliencyMap {
            width: self.width,
            height: self.height,
            values,
        }
    }

    /// Bilinear resize with pixel-center alignment. Resizing to the current
    /// size returns a bitwise-identical copy; outputs stay inside [0,1]
    /// because every sample is a convex combination of inputs.
    pub fn resize_to(&self, width: u32, height: u32) -> Result<SaliencyMap> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension { width, height });
        }
        if width == self.width && height == self.height {
            return Ok(self.clone());
        }
        let src_w = self.width as usize;
        let src_h = self.height as usize;
        let scale_x = self.width as f64 / width as f64;
        let scale_y = self.height as f64 / height as f64;
        let mut values = Vec::with_capacity(width as usize * height as usize);
        for dy in 0..height {
            let sy = ((dy as f64 + 0.5) * scale_y - 0.5).max(0.0);
            let y0 = (sy.floor() as usize).min(src_h - 1);
            let y1 = (y0 + 1).min(src_h - 1);
            let fy = sy - y0 as f64;
            for dx in 0..width {
                let sx = ((dx as f64 + 0.5) * scale_x - 0.5).max(0.0);
                let x0 = (sx.floor() as usize).min(src_w - 1);
                let x1 = (x0 + 1).min(src_w - 1);
                let fx = sx - x0 as f64;
                let top =
                    self.values[y0 * src_w + x0] * (1.0 - fx) + self.values[y0 * src_w + x1] * fx;
                let bottom =
                    self.values[y1 * src_w + x0] * (1.0 - fx) + self.values[y1 * src_w + x1] * fx;
                values.push(top * (1.0 - fy) + bottom * fy);
            }
        }
        SaliencyMap::new(width, height, values)
    }

    /// Thresholds at an 8-bit level: bit = 1 iff round(v*255) >= theta.
    /// Theta 0 therefore yields the all-1 mask.
    pub fn binarize(&self, theta: u8) -> BinaryMask {
        let bits = self
            .values
            .iter()
            .map(|v| u8::from(scale_to_u8(*v) >= theta))
            .collect();
        BinaryMask {
            width: self.width,
            height: self.height,
            bits,
        }
    }

    /// View of a mask as a 0.0/1.0 saliency map.
    pub fn from_mask(mask: &BinaryMask) -> SaliencyMap {
        SaliencyMap {
            width: mask.width,
            height: mask.height,
            values: mask.bits.iter().map(|&b| f64::from(b)).collect(),
        }
    }
}

impl BinaryMask {
    pub fn new(width: u32, height: u32, bits: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension { width, height });
        }
        let expected = width as usize * height as usize;
        if bits.len() != expected {
            return Err(Error::LengthMismatch {
                len: bits.len(),
                width,
                height,
            });
        }
        if let Some(index) = bits.iter().position(|b| *b > 1) {
            return Err(Error::ValueOutOfRange {
                index,
                value: f64::from(bits[index]),
            });
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    pub fn foreground_count(&self) -> usize {
        self.bits.iter().filter(|b| **b == 1).count()
    }

    pub fn same_dimensions(&self, other: &BinaryMask) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Flips every bit.
    pub fn complement(&self) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|b| 1 - b).collect(),
        }
    }
}

/// Round-half-up scaling of a [0,1] value to the 8-bit range.
pub fn scale_to_u8(value: f64) -> u8 {
    (value * 255.0).round() as u8
}

/// Decodes a PNG into a saliency map. 8-bit pixels map to p/255, 16-bit to
/// p/65535; RGB collapses through BT.601 luma (0.299 R + 0.587 G + 0.114 B)
/// before scaling. Alpha channels are ignored.
pub fn load_map(path: &Path) -> Result<SaliencyMap> {
    let gray = decode_png_gray(path)?;
    SaliencyMap::new(gray.width, gray.height, gray.values)
}

/// Decodes a PNG into a binary mask: pixel >= half scale becomes 1.
/// Ground truths are nominally 0/255; the midpoint rule tolerates
/// anti-aliased edges.
pub fn load_mask(path: &Path) -> Result<BinaryMask> {
    let gray = decode_png_gray(path)?;
    let bits = gray.values.iter().map(|v| u8::from(*v >= 0.5)).collect();
    BinaryMask::new(gray.width, gray.height, bits)
}

/// Writes an 8-bit grayscale PNG with round-half-up scaling, so that
/// loading it back reproduces every 8-bit pixel exactly.
pub fn save_map(path: &Path, map: &SaliencyMap) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), map.width, map.height);
    encoder.set_color(png::ColorType::Grayscale);
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder.write_header().map_err(|e| Error::PngEncode {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let data: Vec<u8> = map.values.iter().map(|v| scale_to_u8(*v)).collect();
    writer
        .write_image_data(&data)
        .map_err(|e| Error::PngEncode {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
    writer.finish().map_err(|e| Error::PngEncode {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

struct GrayImage {
    width: u32,
    height: u32,
    values: Vec<f64>,
}

const LUMA_R: f64 = 0.299;
const LUMA_G: f64 = 0.587;
const LUMA_B: f64 = 0.114;

fn decode_png_gray(path: &Path) -> Result<GrayImage> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut decoder = png::Decoder::new(file);
    // Depalettize and expand sub-byte depths to 8 bits; 16-bit stays 16-bit.
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(|e| Error::PngDecode {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let mut buf = vec![0u8; reader.output_buffer_size()];
    let info = reader.next_frame(&mut buf).map_err(|e| Error::PngDecode {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    if info.width == 0 || info.height == 0 {
        return Err(Error::ZeroDimension {
            width: info.width,
            height: info.height,
        });
    }
    let pixels = info.width as usize * info.height as usize;
    let data = &buf[..info.buffer_size()];

    let channels = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::GrayscaleAlpha => 2,
        png::ColorType::Rgb => 3,
        png::ColorType::Rgba => 4,
        other => {
            return Err(Error::UnsupportedPng {
                path: path.to_path_buf(),
                reason: format!("color type {other:?} after expansion"),
            })
        }
    };

    let values = match info.bit_depth {
        png::BitDepth::Eight => {
            let mut values = Vec::with_capacity(pixels);
            for px in data.chunks_exact(channels) {
                let v = match channels {
                    1 | 2 => f64::from(px[0]),
                    _ => {
                        LUMA_R * f64::from(px[0])
                            + LUMA_G * f64::from(px[1])
                            + LUMA_B * f64::from(px[2])
                    }
                };
                values.push(v / 255.0);
            }
            values
        }
        png::BitDepth::Sixteen => {
            let mut values = Vec::with_capacity(pixels);
            for px in data.chunks_exact(channels * 2) {
                let sample = |i: usize| f64::from(u16::from_be_bytes([px[2 * i], px[2 * i + 1]]));
                let v = match channels {
                    1 | 2 => sample(0),
                    _ => LUMA_R * sample(0) + LUMA_G * sample(1) + LUMA_B * sample(2),
                };
                values.push(v / 65535.0);
            }
            values
        }
        depth => {
            return Err(Error::UnsupportedPng {
                path: path.to_path_buf(),
                reason: format!("bit depth {depth:?} after expansion"),
            })
        }
    };

    Ok(GrayImage {
        width: info.width,
        height: info.height,
        values,
    })
}
