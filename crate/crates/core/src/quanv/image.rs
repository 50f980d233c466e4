use std::f64::consts::FRAC_PI_2;
use std::io::Read;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::rng_for;

/// Images as rotation angles, layout `[batch][channel][row][col]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageBatch {
    batch: usize,
    channels: usize,
    height: usize,
    width: usize,
    pixels: Vec<f64>,
}

impl ImageBatch {
    /// Checks the shape and that every pixel lies in `[-π/2, π/2]`.
    pub fn new(batch: usize, channels: usize, height: usize, width: usize, pixels: Vec<f64>) -> Result<Self> {
        if batch == 0 || channels == 0 || height == 0 || width == 0 {
            return Err(Error::Contract("image batch dimensions must be positive".into()));
        }
        if pixels.len() != batch * channels * height * width {
            return Err(Error::Dimension {
                expected: batch * channels * height * width,
                found: pixels.len(),
            });
        }
        if let Some(p) = pixels.iter().find(|p| !(p.abs() <= FRAC_PI_2)) {
            return Err(Error::Domain(format!("pixel {p} outside [-pi/2, pi/2]")));
        }
        Ok(ImageBatch {
            batch,
            channels,
            height,
            width,
            pixels,
        })
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn at(&self, b: usize, c: usize, y: usize, x: usize) -> f64 {
        self.pixels[((b * self.channels + c) * self.height + y) * self.width + x]
    }

    fn image_len(&self) -> usize {
        self.channels * self.height * self.width
    }

    /// The images at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let n = self.image_len();
        let mut pixels = Vec::with_capacity(indices.len() * n);
        for &i in indices {
            if i >= self.batch {
                return Err(Error::Contract(format!("image {i} out of range for batch of {}", self.batch)));
            }
            pixels.extend_from_slice(&self.pixels[i * n..(i + 1) * n]);
        }
        Self::new(indices.len(), self.channels, self.height, self.width, pixels)
    }
}

/// Sliding-window patches, layout `[batch][channel][out_row][out_col][k*k]`
/// with the window flattened row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Patches {
    pub batch: usize,
    pub channels: usize,
    pub out_height: usize,
    pub out_width: usize,
    pub kernel: usize,
    pub data: Vec<f64>,
}

impl Patches {
    pub fn patch(&self, b: usize, c: usize, y: usize, x: usize) -> &[f64] {
        let kk = self.kernel * self.kernel;
        let start = (((b * self.channels + c) * self.out_height + y) * self.out_width + x) * kk;
        &self.data[start..start + kk]
    }
}

/// Output size of a valid-padding window sweep.
pub fn output_extent(size: usize, kernel: usize, stride: usize) -> Result<usize> {
    if kernel == 0 || stride == 0 {
        return Err(Error::Config("kernel and stride must be positive".into()));
    }
    if kernel > size {
        return Err(Error::Contract(format!("kernel {kernel} larger than image side {size}")));
    }
    Ok((size - kernel) / stride + 1)
}

/// Valid-padding patch extraction.
pub fn extract_patches(imgs: &ImageBatch, kernel: usize, stride: usize) -> Result<Patches> {
    let oh = output_extent(imgs.height, kernel, stride)?;
    let ow = output_extent(imgs.width, kernel, stride)?;
    let mut data = Vec::with_capacity(imgs.batch * imgs.channels * oh * ow * kernel * kernel);
    for b in 0..imgs.batch {
        for c in 0..imgs.channels {
            for y in 0..oh {
                for x in 0..ow {
                    for ky in 0..kernel {
                        for kx in 0..kernel {
                            data.push(imgs.at(b, c, y * stride + ky, x * stride + kx));
                        }
                    }
                }
            }
        }
    }
    Ok(Patches {
        batch: imgs.batch,
        channels: imgs.channels,
        out_height: oh,
        out_width: ow,
        kernel,
        data,
    })
}

/// Images with integer class labels `0..n_classes`.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledImages {
    pub images: ImageBatch,
    pub labels: Vec<usize>,
    pub n_classes: usize,
}

impl LabeledImages {
    pub fn new(images: ImageBatch, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != images.batch() {
            return Err(Error::Dimension {
                expected: images.batch(),
                found: labels.len(),
            });
        }
        let n_classes = labels.iter().max().map_or(0, |m| m + 1);
        if n_classes < 2 {
            return Err(Error::Config("a classification dataset needs at least two classes".into()));
        }
        Ok(LabeledImages {
            images,
            labels,
            n_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Synthetic two-class set: class 0 has a bright top half, class 1 a bright
/// bottom half. Background pixels sit at angle 0, bright ones at 1.2, both
/// with Gaussian noise of std `noise`, clipped to the valid range. Classes
/// alternate so any prefix is balanced.
pub fn synthetic_bright_halves(
    n_per_class: usize,
    channels: usize,
    height: usize,
    width: usize,
    noise: f64,
    seed: u64,
) -> Result<LabeledImages> {
    const BRIGHT: f64 = 1.2;
    if height < 2 || n_per_class == 0 {
        return Err(Error::Config("synthetic set needs height >= 2 and at least one image per class".into()));
    }
    let normal = Normal::new(0.0, noise).map_err(|e| Error::Config(format!("noise: {e}")))?;
    let mut rng = rng_for(seed, "synthetic-images");
    let mut pixels = Vec::with_capacity(2 * n_per_class * channels * height * width);
    let mut labels = Vec::with_capacity(2 * n_per_class);
    for i in 0..2 * n_per_class {
        let label = i % 2;
        for _ in 0..channels {
            for y in 0..height {
                let top = y < height / 2;
                let base = if top == (label == 0) { BRIGHT } else { 0.0 };
                for _ in 0..width {
                    let v: f64 = base + normal.sample(&mut rng);
                    pixels.push(v.clamp(-FRAC_PI_2, FRAC_PI_2));
                }
            }
        }
        labels.push(label);
    }
    LabeledImages::new(ImageBatch::new(2 * n_per_class, channels, height, width, pixels)?, labels)
}

/// Layout of an image CSV: one row per image, the label first, then the
/// pixels flattened as `[channel][row][col]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvImageFormat {
    pub height: usize,
    pub width: usize,
    /// Channels stored per row.
    #[serde(default = "one")]
    pub channels: usize,
    /// Stored channels are tiled to this many channels.
    #[serde(default)]
    pub repeat_to: Option<usize>,
    /// Raw pixel range mapped linearly onto `[-π/2, π/2]`.
    #[serde(default = "unit_range")]
    pub pixel_range: [f64; 2],
    #[serde(default)]
    pub has_header: bool,
}

fn one() -> usize {
    1
}

fn unit_range() -> [f64; 2] {
    [0.0, 1.0]
}

/// Reads labeled images from CSV, scaling raw values into rotation angles.
/// Values outside `pixel_range` are rejected.
pub fn read_csv_images<R: Read>(reader: R, format: &CsvImageFormat) -> Result<LabeledImages> {
    let [lo, hi] = format.pixel_range;
    if !(hi > lo) {
        return Err(Error::Config("pixel_range must be increasing".into()));
    }
    let stored = format.channels;
    let channels = format.repeat_to.unwrap_or(stored);
    if stored == 0 || channels % stored != 0 {
        return Err(Error::Config(format!("cannot tile {stored} channels to {channels}")));
    }
    let plane = format.height * format.width;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(format.has_header)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut pixels = Vec::new();
    let mut labels = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() != 1 + stored * plane {
            return Err(Error::Config(format!(
                "row {line}: expected {} fields, found {}",
                1 + stored * plane,
                record.len()
            )));
        }
        let label: usize = record[0]
            .parse()
            .map_err(|_| Error::Config(format!("row {line}: bad label `{}`", &record[0])))?;
        let mut raw = Vec::with_capacity(stored * plane);
        for field in record.iter().skip(1) {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::Config(format!("row {line}: bad pixel `{field}`")))?;
            if !(lo..=hi).contains(&v) {
                return Err(Error::Domain(format!("row {line}: pixel {v} outside [{lo}, {hi}]")));
            }
            raw.push(((v - lo) / (hi - lo) * 2.0 - 1.0) * FRAC_PI_2);
        }
        for c in 0..channels {
            let s = c % stored;
            pixels.extend_from_slice(&raw[s * plane..(s + 1) * plane]);
        }
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(Error::Config("image CSV has no rows".into()));
    }
    LabeledImages::new(
        ImageBatch::new(labels.len(), channels, format.height, format.width, pixels)?,
        labels,
    )
}
