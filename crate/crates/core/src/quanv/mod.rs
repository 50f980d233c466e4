//! Quanvolution: a quantum circuit slid over image patches like a
//! convolution filter, plus a small classifier for demonstrations.

mod demo;
mod image;
mod layer;

pub use demo::{
    run_quanv_demo, softmax_cross_entropy, train_quanv_demo, DatasetSource, LinearHead, QuanvClassifier,
    QuanvDemoConfig, QuanvReport,
};
pub use image::{
    extract_patches, output_extent, read_csv_images, synthetic_bright_halves, CsvImageFormat, ImageBatch,
    LabeledImages, Patches,
};
pub use layer::{quanv_forward, FeatureMaps, QuanvShape, QuanvSpec};
