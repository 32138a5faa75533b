//! Ground-truth correspondence under a known transform, accuracy scoring,
//! repeatability, timing, and the end-to-end experiment runner.
//!
//! Two correctness notions are reported side by side: the filter-based count
//! (matches surviving the distance filter) and geometric correctness
//! (reprojection within ε of the known transform). Both are computed against
//! the same unfiltered match total so the percentages are comparable.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::descriptor::{extract_descriptors, generate_pattern};
use crate::detect::{detect_fast, orient_keypoints, select_top_n, DetectorConfig, Keypoint};
use crate::error::{Error, Result};
use crate::image::{apply_mask, rgb_to_gray, skin_mask, GrayImage, RgbImage, SkinThresholds};
use crate::matcher::{filter_matches, knn_match, match_brute_force, sort_matches, Match, MatchFilterConfig, MatchFilterMode};
use crate::transform::{transform_point, Transform2D};

/// Percentage with a degenerate-denominator flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyScore {
    pub pct: f64,
    /// True when there were no matches to score; `pct` is 0 by convention.
    pub no_matches: bool,
}

/// `100 × n_correct / n_total`. A zero total yields 0 with the no-matches
/// flag; `n_correct > n_total` is a caller bug and errors.
pub fn accuracy_score(n_correct: usize, n_total: usize) -> Result<AccuracyScore> {
    if n_correct > n_total {
        return Err(Error::CountExceedsTotal {
            correct: n_correct,
            total: n_total,
        });
    }
    if n_total == 0 {
        return Ok(AccuracyScore {
            pct: 0.0,
            no_matches: true,
        });
    }
    Ok(AccuracyScore {
        pct: 100.0 * n_correct as f64 / n_total as f64,
        no_matches: false,
    })
}

/// True iff the transformed query keypoint lands within `eps` (Euclidean) of
/// the matched train keypoint.
pub fn ground_truth_correct(
    m: &Match,
    kps1: &[Keypoint],
    kps2: &[Keypoint],
    t: &Transform2D,
    src_dims: (u32, u32),
    eps: f64,
) -> bool {
    let q = &kps1[m.query_idx];
    let r = &kps2[m.train_idx];
    let (tx, ty) = transform_point(t, (q.x, q.y), src_dims);
    let (dx, dy) = (tx - r.x, ty - r.y);
    (dx * dx + dy * dy).sqrt() <= eps
}

/// Fraction of keypoints from the first view that reappear within `eps` at
/// their transformed location in the second view. The numerator additionally
/// requires the transformed point to stay at least `margin` pixels inside the
/// destination bounds (a keypoint in the border band cannot be redetected);
/// the denominator counts keypoints mapping anywhere inside bounds.
pub fn repeatability(
    kps1: &[Keypoint],
    kps2: &[Keypoint],
    t: &Transform2D,
    src_dims: (u32, u32),
    dst_dims: (u32, u32),
    margin: u32,
    eps: f64,
) -> AccuracyScore {
    let (dw, dh) = (dst_dims.0 as f64, dst_dims.1 as f64);
    let m = margin as f64;
    let mut in_bounds = 0usize;
    let mut repeated = 0usize;
    for k in kps1 {
        let (tx, ty) = transform_point(t, (k.x, k.y), src_dims);
        if !(0.0..dw).contains(&tx) || !(0.0..dh).contains(&ty) {
            continue;
        }
        in_bounds += 1;
        let interior =
            tx >= m && ty >= m && tx < dw - m && ty < dh - m;
        if !interior {
            continue;
        }
        let found = kps2.iter().any(|k2| {
            let (dx, dy) = (tx - k2.x, ty - k2.y);
            (dx * dx + dy * dy).sqrt() <= eps
        });
        if found {
            repeated += 1;
        }
    }
    if in_bounds == 0 {
        return AccuracyScore {
            pct: 0.0,
            no_matches: true,
        };
    }
    AccuracyScore {
        pct: 100.0 * repeated as f64 / in_bounds as f64,
        no_matches: false,
    }
}

/// Image pair for an experiment: either one image plus a transform that
/// synthesizes the second view, or an explicit pair with an optional known
/// ground-truth transform.
#[derive(Debug, Clone)]
pub enum ExperimentInput {
    SingleWithTransform {
        image: RgbImage,
        transform: Transform2D,
    },
    Pair {
        image1: RgbImage,
        image2: RgbImage,
        ground_truth: Option<Transform2D>,
    },
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub input: ExperimentInput,
    /// When set, both images are skin-segmented (non-skin filled black)
    /// before detection.
    pub segmentation: Option<SkinThresholds>,
    pub detector: DetectorConfig,
    pub steered: bool,
    pub cross_check: bool,
    pub filter: MatchFilterConfig,
    /// Reprojection tolerance in pixels; must be positive.
    pub eps: f64,
    /// Descriptor pattern seed.
    pub seed: u64,
    /// Descriptor pre-smoothing radius.
    pub blur_radius: u32,
}

impl ExperimentSpec {
    pub fn with_input(input: ExperimentInput) -> Self {
        Self {
            input,
            segmentation: None,
            detector: DetectorConfig::default(),
            steered: true,
            cross_check: true,
            filter: MatchFilterConfig::default(),
            eps: 2.0,
            seed: 42,
            blur_radius: 2,
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.eps.is_finite() || self.eps <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "reprojection tolerance must be positive, got {}",
                self.eps
            )));
        }
        self.detector.validate()?;
        self.filter.validate()
    }
}

/// Stage durations for one pipeline run, in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageRun {
    pub detect_ms: f64,
    pub describe_ms: f64,
    pub match_ms: f64,
}

/// Best-of-N stage timings plus the whole-call wall time; `runs` logs every
/// individual measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub detect_ms: f64,
    pub describe_ms: f64,
    pub match_ms: f64,
    pub total_ms: f64,
    pub runs: Vec<StageRun>,
}

/// One evaluation row: keypoint counts, match counts, the filter-based
/// accuracy, geometric precision, repeatability, and stage timings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_keypoints_1: usize,
    pub n_keypoints_2: usize,
    pub n_total_matches: usize,
    pub n_filter_correct: usize,
    pub n_geometric_correct: usize,
    pub accuracy_pct: f64,
    pub precision_pct: f64,
    pub repeatability_pct: f64,
    pub no_matches: bool,
    /// False when the pair has no known transform; the geometric columns are
    /// zeroed in that case.
    pub ground_truth_known: bool,
    pub steered: bool,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timings: Option<Timings>,
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

fn ms_since(start: Instant) -> f64 {
    round6(start.elapsed().as_secs_f64() * 1e3)
}

/// Number of measured pipeline repetitions; the reported stage timings are
/// the per-stage minima.
const TIMING_RUNS: usize = 3;

struct PipelineOutput {
    kps1: Vec<Keypoint>,
    kps2: Vec<Keypoint>,
    matches: Vec<Match>,
    knn: Option<Vec<Vec<Match>>>,
    run: StageRun,
}

fn run_pipeline(spec: &ExperimentSpec, gray1: &GrayImage, gray2: &GrayImage) -> Result<PipelineOutput> {
    let cfg = &spec.detector;

    let t0 = Instant::now();
    let detect_one = |img: &GrayImage| -> Result<Vec<Keypoint>> {
        let raw = detect_fast(img, cfg)?;
        let ranked = select_top_n(&raw, img, cfg.max_keypoints, cfg.harris_k);
        orient_keypoints(img, ranked, cfg.patch_radius)
    };
    let kps1 = detect_one(gray1)?;
    let kps2 = detect_one(gray2)?;
    let detect_ms = ms_since(t0);

    let t1 = Instant::now();
    let pattern = generate_pattern(spec.seed, cfg.patch_radius, crate::descriptor::DESCRIPTOR_BITS)?;
    let desc1 = extract_descriptors(gray1, &kps1, &pattern, spec.steered, spec.blur_radius)?;
    let desc2 = extract_descriptors(gray2, &kps2, &pattern, spec.steered, spec.blur_radius)?;
    let describe_ms = ms_since(t1);

    let t2 = Instant::now();
    let matches = sort_matches(match_brute_force(&desc1, &desc2, spec.cross_check));
    // blank frames (no matches) must still produce a report, so the knn pass
    // only runs when the ratio filter has something to score
    let knn = match spec.filter.mode {
        MatchFilterMode::LoweRatio if !matches.is_empty() => {
            Some(knn_match(&desc1, &desc2, 2)?)
        }
        _ => None,
    };
    let match_ms = ms_since(t2);

    Ok(PipelineOutput {
        kps1,
        kps2,
        matches,
        knn,
        run: StageRun {
            detect_ms,
            describe_ms,
            match_ms,
        },
    })
}

/// Execute the full pipeline — optional segmentation, detection, orientation,
/// description, matching, sorting, filtering, scoring — and populate an
/// [`EvalReport`]. The pipeline is run [`TIMING_RUNS`] times (outputs are
/// deterministic and identical); reported stage timings are per-stage minima
/// and every run is logged in `timings.runs`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<EvalReport> {
    spec.validate()?;
    let wall_start = Instant::now();

    let (rgb1, rgb2, gt) = match &spec.input {
        ExperimentInput::SingleWithTransform { image, transform } => {
            let image2 = transform.apply_rgb(image)?;
            (image.clone(), image2, Some(*transform))
        }
        ExperimentInput::Pair {
            image1,
            image2,
            ground_truth,
        } => (image1.clone(), image2.clone(), *ground_truth),
    };

    let segment = |img: &RgbImage| -> Result<RgbImage> {
        match &spec.segmentation {
            Some(th) => apply_mask(img, &skin_mask(img, th), [0, 0, 0]),
            None => Ok(img.clone()),
        }
    };
    let gray1 = rgb_to_gray(&segment(&rgb1)?);
    let gray2 = rgb_to_gray(&segment(&rgb2)?);

    let mut runs = Vec::with_capacity(TIMING_RUNS);
    let mut output = None;
    for _ in 0..TIMING_RUNS {
        let out = run_pipeline(spec, &gray1, &gray2)?;
        runs.push(out.run);
        output = Some(out);
    }
    let output = output.expect("TIMING_RUNS >= 1");

    let min_stage = |f: fn(&StageRun) -> f64| {
        runs.iter().map(f).fold(f64::INFINITY, f64::min)
    };
    let timings = Timings {
        detect_ms: min_stage(|r| r.detect_ms),
        describe_ms: min_stage(|r| r.describe_ms),
        match_ms: min_stage(|r| r.match_ms),
        total_ms: ms_since(wall_start),
        runs,
    };

    let kept = filter_matches(&output.matches, &spec.filter, output.knn.as_deref())?;
    let n_total = output.matches.len();
    let accuracy = accuracy_score(kept.len(), n_total)?;

    let src_dims = gray1.dimensions();
    let dst_dims = gray2.dimensions();
    let (n_geometric, precision, repeat) = match &gt {
        Some(t) => {
            let n_geo = output
                .matches
                .iter()
                .filter(|m| ground_truth_correct(m, &output.kps1, &output.kps2, t, src_dims, spec.eps))
                .count();
            let precision = accuracy_score(n_geo, n_total)?;
            let repeat = repeatability(
                &output.kps1,
                &output.kps2,
                t,
                src_dims,
                dst_dims,
                spec.detector.patch_radius,
                spec.eps,
            );
            (n_geo, precision.pct, repeat.pct)
        }
        None => (0, 0.0, 0.0),
    };

    Ok(EvalReport {
        n_keypoints_1: output.kps1.len(),
        n_keypoints_2: output.kps2.len(),
        n_total_matches: n_total,
        n_filter_correct: kept.len(),
        n_geometric_correct: n_geometric,
        accuracy_pct: round6(accuracy.pct),
        precision_pct: round6(precision),
        repeatability_pct: round6(repeat),
        no_matches: accuracy.no_matches,
        ground_truth_known: gt.is_some(),
        steered: spec.steered,
        seed: spec.seed,
        timings: Some(timings),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::textured_gray;

    fn kp(x: f64, y: f64) -> Keypoint {
        Keypoint { x, y, response: 0.0, angle: 0.0 }
    }

    #[test]
    fn accuracy_score_table_rows() {
        // one-decimal reporting of the reference rows
        let round1 = |v: f64| (v * 10.0).round() / 10.0;
        assert_eq!(round1(accuracy_score(98, 109).unwrap().pct), 89.9);
        assert_eq!(accuracy_score(277, 277).unwrap().pct, 100.0);
        assert_eq!(accuracy_score(433, 433).unwrap().pct, 100.0);
    }

    #[test]
    fn accuracy_score_degenerate_and_invalid() {
        let zero = accuracy_score(0, 0).unwrap();
        assert_eq!(zero.pct, 0.0);
        assert!(zero.no_matches);
        assert!(matches!(
            accuracy_score(5, 3),
            Err(Error::CountExceedsTotal { .. })
        ));
    }

    #[test]
    fn ground_truth_correct_examples() {
        let kps1 = vec![kp(10.0, 20.0)];
        // identity: the same point matches itself at any positive eps
        let m = Match { query_idx: 0, train_idx: 0, distance_bits: 0 };
        assert!(ground_truth_correct(
            &m, &kps1, &kps1, &Transform2D::Identity, (100, 50), 0.1
        ));
        // Rot90Cw on a 100x50 image maps (10, 20) to (29, 10)
        let kps2 = vec![kp(29.0, 10.0)];
        assert!(ground_truth_correct(
            &m, &kps1, &kps2, &Transform2D::Rot90Cw, (100, 50), 0.5
        ));
        let off = vec![kp(29.0, 14.0)];
        assert!(!ground_truth_correct(
            &m, &kps1, &off, &Transform2D::Rot90Cw, (100, 50), 0.5
        ));
    }

    #[test]
    fn ground_truth_matches_independent_distance_computation() {
        // recompute with direct formulas on a synthetic set
        let kps1: Vec<Keypoint> = (0..20).map(|i| kp(5.0 + i as f64, 11.0)).collect();
        let kps2: Vec<Keypoint> = kps1
            .iter()
            .map(|k| kp(40.0 - 1.0 - k.y, k.x)) // Rot90Cw with H = 40
            .collect();
        for (i, _) in kps1.iter().enumerate() {
            let m = Match { query_idx: i, train_idx: i, distance_bits: 0 };
            assert!(ground_truth_correct(
                &m, &kps1, &kps2, &Transform2D::Rot90Cw, (60, 40), 1e-9
            ));
        }
    }

    #[test]
    fn repeatability_examples() {
        // spacing 3 px keeps neighbors outside the eps = 1 ball
        let kps1: Vec<Keypoint> = (0..10).map(|i| kp(20.0 + 3.0 * i as f64, 30.0)).collect();
        // exact transforms of kps1 -> 100%
        let t = Transform2D::Rot90Cw;
        let dims = (64, 64);
        let kps2: Vec<Keypoint> = kps1
            .iter()
            .map(|k| {
                let (x, y) = transform_point(&t, (k.x, k.y), dims);
                kp(x, y)
            })
            .collect();
        let r = repeatability(&kps1, &kps2, &t, dims, dims, 5, 1.0);
        assert_eq!(r.pct, 100.0);
        assert!(!r.no_matches);

        // empty second set -> 0%
        let r = repeatability(&kps1, &[], &t, dims, dims, 5, 1.0);
        assert_eq!(r.pct, 0.0);

        // exactly half within eps (verified by construction): shift odd ones away
        let kps2_half: Vec<Keypoint> = kps2
            .iter()
            .enumerate()
            .map(|(i, k)| if i % 2 == 0 { *k } else { kp(k.x + 10.0, k.y) })
            .collect();
        let r = repeatability(&kps1, &kps2_half, &t, dims, dims, 5, 1.0);
        assert_eq!(r.pct, 50.0);

        // empty first set -> flagged
        let r = repeatability(&[], &kps2, &t, dims, dims, 5, 1.0);
        assert!(r.no_matches);
    }

    fn textured_spec(steered: bool, transform: Transform2D) -> ExperimentSpec {
        let gray = textured_gray(160, 160, 42);
        let image = RgbImage::from_gray(&gray);
        ExperimentSpec {
            steered,
            ..ExperimentSpec::with_input(ExperimentInput::SingleWithTransform { image, transform })
        }
    }

    #[test]
    fn identity_experiment_is_perfect() {
        let report = run_experiment(&textured_spec(true, Transform2D::Identity)).unwrap();
        assert!(report.n_keypoints_1 > 0);
        assert_eq!(report.n_keypoints_1, report.n_keypoints_2);
        assert_eq!(report.accuracy_pct, 100.0);
        assert_eq!(report.precision_pct, 100.0);
        assert_eq!(report.repeatability_pct, 100.0);
        assert!(!report.no_matches);
        assert!(report.ground_truth_known);
        let t = report.timings.as_ref().unwrap();
        assert_eq!(t.runs.len(), 3);
        assert!(t.detect_ms >= 0.0 && t.describe_ms >= 0.0 && t.match_ms >= 0.0);
        assert!(t.detect_ms + t.describe_ms + t.match_ms <= t.total_ms);
    }

    #[test]
    fn rotation_experiment_prefers_steering() {
        let steered = run_experiment(&textured_spec(true, Transform2D::Rot90Cw)).unwrap();
        let unsteered = run_experiment(&textured_spec(false, Transform2D::Rot90Cw)).unwrap();
        assert!(steered.n_total_matches > 20);
        assert!(
            steered.precision_pct >= 95.0,
            "steered precision {}",
            steered.precision_pct
        );
        assert!(
            steered.precision_pct > unsteered.precision_pct,
            "steered {} vs unsteered {}",
            steered.precision_pct,
            unsteered.precision_pct
        );
    }

    #[test]
    fn blank_images_flag_no_matches() {
        let image = RgbImage::from_fn(64, 64, |_, _| [90, 90, 90]).unwrap();
        let spec = ExperimentSpec::with_input(ExperimentInput::SingleWithTransform {
            image,
            transform: Transform2D::Identity,
        });
        let report = run_experiment(&spec).unwrap();
        assert_eq!(report.n_keypoints_1, 0);
        assert_eq!(report.n_total_matches, 0);
        assert!(report.no_matches);
        assert_eq!(report.accuracy_pct, 0.0);

        // the ratio filter must not turn a blank frame into an error
        let ratio_spec = ExperimentSpec {
            filter: crate::matcher::MatchFilterConfig {
                mode: MatchFilterMode::LoweRatio,
                threshold: 0.7,
            },
            ..spec
        };
        assert!(run_experiment(&ratio_spec).unwrap().no_matches);
    }

    #[test]
    fn pair_without_ground_truth_zeroes_geometric_columns() {
        let g1 = textured_gray(96, 96, 1);
        let g2 = textured_gray(96, 96, 2);
        let spec = ExperimentSpec::with_input(ExperimentInput::Pair {
            image1: RgbImage::from_gray(&g1),
            image2: RgbImage::from_gray(&g2),
            ground_truth: None,
        });
        let report = run_experiment(&spec).unwrap();
        assert!(!report.ground_truth_known);
        assert_eq!(report.n_geometric_correct, 0);
        assert_eq!(report.precision_pct, 0.0);
        assert_eq!(report.repeatability_pct, 0.0);
    }

    #[test]
    fn experiment_validates_config() {
        let mut spec = textured_spec(true, Transform2D::Identity);
        spec.eps = 0.0;
        assert!(run_experiment(&spec).is_err());
    }

    #[test]
    fn metrics_invariant_under_keypoint_relabeling() {
        // permuting keypoint lists (with match indices remapped) leaves the
        // percentages unchanged
        let kps1: Vec<Keypoint> = (0..8).map(|i| kp(10.0 + i as f64, 20.0)).collect();
        let t = Transform2D::Identity;
        let dims = (64, 64);
        let matches: Vec<Match> = (0..8)
            .map(|i| Match { query_idx: i, train_idx: i, distance_bits: 0 })
            .collect();
        let count = |m: &[Match], k1: &[Keypoint], k2: &[Keypoint]| {
            m.iter()
                .filter(|mm| ground_truth_correct(mm, k1, k2, &t, dims, 0.5))
                .count()
        };
        let base = count(&matches, &kps1, &kps1);

        let perm: Vec<usize> = vec![3, 1, 4, 0, 6, 2, 7, 5];
        let kps2_perm: Vec<Keypoint> = perm.iter().map(|&i| kps1[i]).collect();
        let matches_perm: Vec<Match> = matches
            .iter()
            .map(|m| Match {
                query_idx: m.query_idx,
                train_idx: perm.iter().position(|&p| p == m.train_idx).unwrap(),
                distance_bits: m.distance_bits,
            })
            .collect();
        assert_eq!(count(&matches_perm, &kps1, &kps2_perm), base);
    }
}
