//! Audio ingestion and the MFCC + delta + acceleration front-end.

mod audio;
mod matrix;
mod mfcc;

pub use audio::{load_wav, write_wav, AudioSignal};
pub use matrix::{read_feature_file, write_feature_file, FeatureMatrix, FEATURE_MAGIC};
pub use mfcc::{
    compute_features, deltas, frame_count, magnitude_spectra, MelFilterbank, MfccConfig,
};
