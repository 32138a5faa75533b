//! Local-feature detection and matching toolkit.
//!
//! The pipeline mirrors the classic oriented-FAST / steered-BRIEF design:
//! skin segmentation in YCbCr chroma space, FAST-9 corner detection with
//! non-maximum suppression, Harris-response ranking, intensity-centroid
//! orientation, 256-bit binary descriptors (optionally steered by keypoint
//! orientation), brute-force Hamming matching with cross-check, and a
//! rotation-based evaluation harness that scores match accuracy against a
//! known ground-truth transform.
//!
//! Everything is deterministic: the descriptor sampling pattern comes from a
//! seeded ChaCha8 stream, matching tie-breaks are fixed, and image transforms
//! are exact pixel permutations, so identical inputs always produce identical
//! outputs.

pub mod descriptor;
pub mod detect;
pub mod draw;
pub mod error;
pub mod evaluation;
pub mod formats;
pub mod image;
pub mod matcher;
pub mod pnm;
pub mod synth;
pub mod transform;

pub use descriptor::{
    extract_descriptor, extract_descriptors, generate_pattern, hamming_distance, steer_pattern,
    BinaryDescriptor, SamplingPattern, DESCRIPTOR_BITS, DESCRIPTOR_BYTES,
};
pub use detect::{
    compute_orientation, detect_fast, fast_candidates, fast_score, fast_segment_test,
    harris_response, orient_keypoints, select_top_n, DetectorConfig, Keypoint,
};
pub use draw::{draw_matches, DrawConfig};
pub use error::{Error, Result};
pub use evaluation::{
    accuracy_score, ground_truth_correct, repeatability, run_experiment, AccuracyScore, EvalReport,
    ExperimentInput, ExperimentSpec, StageRun, Timings,
};
pub use image::{
    apply_mask, box_blur, rgb_to_gray, rgb_to_ycbcr, skin_mask, GrayImage, RgbImage, SkinMask,
    SkinThresholds,
};
pub use matcher::{
    filter_matches, knn_match, match_brute_force, sort_matches, Match, MatchFilterConfig,
    MatchFilterMode,
};
pub use transform::{transform_point, Rotation, Transform2D};
