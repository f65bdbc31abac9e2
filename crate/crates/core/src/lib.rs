//! Deterministic head-to-scene blending.
//!
//! Given an animated portrait whose head already matches a target frame's
//! pose, and face-parsing label maps for both, `headblend` produces:
//!
//! * the mask algebra of the blend — head masks, the target's inpainting band,
//!   the dilated head union and the animated side's band ([`preprocess`]);
//! * a gray animated head and the target background with the union cut out;
//! * per-region correspondence between the two frames. Pixels are only
//!   compared inside the same semantic region (face, eyes, nose, lips, teeth,
//!   hair, inpainting band), so memory scales with `Σ N_A·N_T` rather than
//!   `(wh)²` ([`correspondence`]);
//! * head-color and inpainting references by softmax-weighted color
//!   averaging, plus cycle-consistency losses for checking the correspondence;
//! * a classical compositor that recolors the gray head with the reference
//!   chroma, fills the band and feathers everything into the background
//!   ([`compositor`]).
//!
//! ```
//! use headblend::{pipeline, synth, BlenderConfig};
//!
//! let a = synth::portrait(64, 1)?;
//! let t = synth::portrait(64, 2)?;
//! let inputs = pipeline::PairInputs {
//!     animated: a.image,
//!     animated_labels: a.labels,
//!     target: t.image,
//!     target_labels: t.labels,
//! };
//! let out = pipeline::swap(&inputs, &pipeline::FeatureSource::Pyramid, &BlenderConfig::default())?;
//! assert_eq!(out.blended.dims(), (64, 64));
//! # Ok::<(), headblend::Error>(())
//! ```

pub mod bench;
pub mod cli;
pub mod compositor;
pub mod config;
pub mod correspondence;
pub mod error;
pub mod features;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod preprocess;
pub mod synth;
pub mod types;

pub use error::{Error, Result};
pub use features::{CentralizedFeatures, FeatureMap};
pub use types::{
    BinaryMask, BlenderConfig, FallbackPolicy, GrayImage, LabelMap, ReferenceImage, Region,
    RegionIndex, RgbImage,
};
