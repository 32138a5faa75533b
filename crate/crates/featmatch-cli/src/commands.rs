use std::fs;
use std::path::Path;

use anyhow::Context;
use serde_json::json;

use featmatch_core::{
    apply_mask, detect_fast, draw_matches, extract_descriptors, filter_matches, formats,
    generate_pattern, knn_match, match_brute_force, orient_keypoints, pnm, run_experiment,
    select_top_n, skin_mask, sort_matches, DrawConfig, EvalReport, ExperimentInput,
    ExperimentSpec, Keypoint, MatchFilterMode, RgbImage, Rotation, Transform2D,
};

use crate::{
    DetectArgs, DirectionOpt, EvaluateArgs, MatchArgs, RotateArgs, SegmentArgs, TransformOpt,
};

fn read_image(path: &Path) -> anyhow::Result<pnm::PnmImage> {
    pnm::read_pnm(path).with_context(|| format!("reading {}", path.display()))
}

fn write_text(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn segment(args: SegmentArgs) -> anyhow::Result<()> {
    let thresholds = args.thresholds.to_thresholds()?;
    let rgb = read_image(&args.input)?.to_rgb();
    let mask = skin_mask(&rgb, &thresholds);
    if let Some(path) = &args.mask {
        pnm::write_mask_pgm(path, &mask).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.foreground {
        let fg = apply_mask(&rgb, &mask, args.fill)?;
        pnm::write_ppm(path, &fg).with_context(|| format!("writing {}", path.display()))?;
    }
    let pct = 100.0 * mask.foreground_fraction();
    if args.json {
        println!(
            "{}",
            json!({
                "command": "segment",
                "input": args.input.display().to_string(),
                "skin_pct": (pct * 1e6).round() / 1e6,
                "skin_pixels": mask.count_true(),
            })
        );
    } else {
        println!("skin pixels: {pct:.2}%");
    }
    Ok(())
}

struct DetectedImage {
    rgb: RgbImage,
    keypoints: Vec<Keypoint>,
    descriptors: Vec<featmatch_core::BinaryDescriptor>,
}

fn detect_and_describe(
    image: &pnm::PnmImage,
    detector: &crate::DetectorOpts,
    descriptor: &crate::DescriptorOpts,
    seed: u64,
) -> anyhow::Result<DetectedImage> {
    let cfg = detector.to_config();
    let gray = image.to_gray();
    let raw = detect_fast(&gray, &cfg)?;
    let ranked = select_top_n(&raw, &gray, cfg.max_keypoints, cfg.harris_k);
    let keypoints = orient_keypoints(&gray, ranked, cfg.patch_radius)?;
    let pattern = generate_pattern(seed, cfg.patch_radius, featmatch_core::DESCRIPTOR_BITS)?;
    let descriptors = extract_descriptors(
        &gray,
        &keypoints,
        &pattern,
        descriptor.steered,
        descriptor.blur_radius,
    )?;
    Ok(DetectedImage {
        rgb: image.to_rgb(),
        keypoints,
        descriptors,
    })
}

pub fn detect(args: DetectArgs) -> anyhow::Result<()> {
    let seed = args.descriptor.resolve_seed()?;
    let image = read_image(&args.input)?;
    let detected = detect_and_describe(&image, &args.detector, &args.descriptor, seed)?;

    if let Some(path) = &args.keypoints_json {
        write_text(path, &formats::keypoints_to_json(&detected.keypoints))?;
    }
    if let Some(path) = &args.keypoints_csv {
        write_text(path, &formats::keypoints_to_csv(&detected.keypoints))?;
    }
    if let Some(path) = &args.descriptors {
        write_text(path, &formats::descriptors_to_string(seed, &detected.descriptors))?;
    }
    if args.json {
        println!(
            "{}",
            json!({
                "command": "detect",
                "input": args.input.display().to_string(),
                "keypoints": detected.keypoints.len(),
                "seed": seed,
                "steered": args.descriptor.steered,
            })
        );
    } else {
        println!("keypoints: {}", detected.keypoints.len());
    }
    Ok(())
}

pub fn match_images(args: MatchArgs) -> anyhow::Result<()> {
    let seed = args.descriptor.resolve_seed()?;
    let img1 = read_image(&args.image1)?;
    let img2 = read_image(&args.image2)?;
    let d1 = detect_and_describe(&img1, &args.detector, &args.descriptor, seed)?;
    let d2 = detect_and_describe(&img2, &args.detector, &args.descriptor, seed)?;

    let matches = sort_matches(match_brute_force(&d1.descriptors, &d2.descriptors, args.cross_check));
    let filter = args.filter.to_config();
    let knn = match filter.mode {
        MatchFilterMode::LoweRatio if !matches.is_empty() => {
            Some(knn_match(&d1.descriptors, &d2.descriptors, 2)?)
        }
        _ => None,
    };
    let kept = filter_matches(&matches, &filter, knn.as_deref())?;

    if let Some(path) = &args.matches_out {
        write_text(path, &formats::matches_to_csv(&kept))?;
    }
    if let Some(path) = &args.viz_out {
        let cfg = DrawConfig {
            top_k: args.draw_top,
            line_thickness: args.line_thickness,
            marker_radius: args.marker_radius,
        };
        let canvas = draw_matches(&d1.rgb, &d1.keypoints, &d2.rgb, &d2.keypoints, &kept, &cfg)?;
        pnm::write_ppm(path, &canvas).with_context(|| format!("writing {}", path.display()))?;
    }
    if args.json {
        println!(
            "{}",
            json!({
                "command": "match",
                "keypoints1": d1.keypoints.len(),
                "keypoints2": d2.keypoints.len(),
                "total_matches": matches.len(),
                "kept_matches": kept.len(),
                "cross_check": args.cross_check,
                "seed": seed,
            })
        );
    } else {
        println!("total matches: {}", matches.len());
        println!("kept matches: {}", kept.len());
    }
    Ok(())
}

fn experiment_input(args: &EvaluateArgs) -> anyhow::Result<ExperimentInput> {
    let image1 = read_image(&args.input)?.to_rgb();
    match (args.transform, &args.second_image) {
        (TransformOpt::SecondImage, Some(path)) => Ok(ExperimentInput::Pair {
            image1,
            image2: read_image(path)?.to_rgb(),
            ground_truth: None,
        }),
        (TransformOpt::SecondImage, None) => {
            anyhow::bail!("--transform second-image requires --second-image <PATH>")
        }
        (_, Some(_)) => {
            anyhow::bail!("--second-image conflicts with a synthetic --transform; use --transform second-image")
        }
        (t, None) => {
            let transform = match t {
                TransformOpt::Identity => Transform2D::Identity,
                TransformOpt::Rot90cw => Transform2D::Rot90Cw,
                TransformOpt::Rot90ccw => Transform2D::Rot90Ccw,
                TransformOpt::Rot180 => Transform2D::Rot180,
                TransformOpt::SecondImage => unreachable!(),
            };
            Ok(ExperimentInput::SingleWithTransform {
                image: image1,
                transform,
            })
        }
    }
}

pub fn evaluate(args: EvaluateArgs) -> anyhow::Result<()> {
    let seed = args.descriptor.resolve_seed()?;
    let input = experiment_input(&args)?;
    let base_spec = ExperimentSpec {
        segmentation: if args.segment {
            Some(args.thresholds.to_thresholds()?)
        } else {
            None
        },
        detector: args.detector.to_config(),
        steered: args.descriptor.steered,
        cross_check: args.cross_check,
        filter: args.filter.to_config(),
        eps: args.eps,
        seed,
        blur_radius: args.descriptor.blur_radius,
        ..ExperimentSpec::with_input(input)
    };

    let mut rows: Vec<(String, EvalReport)> = Vec::new();
    if args.both_modes {
        for steered in [true, false] {
            let spec = ExperimentSpec {
                steered,
                ..base_spec.clone()
            };
            let label = if steered { "steered" } else { "unsteered" };
            rows.push((label.to_string(), run_experiment(&spec)?));
        }
    } else {
        let label = if base_spec.steered { "steered" } else { "unsteered" };
        rows.push((label.to_string(), run_experiment(&base_spec)?));
    }

    // timings vary run to run; strip them unless explicitly requested so that
    // identical invocations write byte-identical reports
    if !args.timings {
        for (_, r) in &mut rows {
            r.timings = None;
        }
    }

    if let Some(path) = &args.report_out {
        let contents = if rows.len() == 1 {
            formats::report_to_json(&rows[0].1)
        } else {
            let mut s = serde_json::to_string_pretty(
                &rows.iter().map(|(_, r)| r).collect::<Vec<_>>(),
            )
            .expect("reports serialize");
            s.push('\n');
            s
        };
        write_text(path, &contents)?;
    }

    if args.json {
        let objects: Vec<serde_json::Value> = rows
            .iter()
            .map(|(label, r)| {
                let mut v = serde_json::to_value(r).expect("report serializes");
                v["label"] = json!(label);
                v
            })
            .collect();
        let summary = if objects.len() == 1 {
            objects.into_iter().next().unwrap()
        } else {
            serde_json::Value::Array(objects)
        };
        println!("{summary}");
    } else {
        let table_rows: Vec<(&str, &EvalReport)> =
            rows.iter().map(|(l, r)| (l.as_str(), r)).collect();
        print!("{}", formats::report_table(&table_rows));
    }
    Ok(())
}

pub fn rotate(args: RotateArgs) -> anyhow::Result<()> {
    let image = read_image(&args.input)?;
    let rotated = match (&image, args.direction) {
        (pnm::PnmImage::Gray(g), DirectionOpt::Cw) => {
            pnm::PnmImage::Gray(featmatch_core::transform::rotate90_gray(g, Rotation::Cw))
        }
        (pnm::PnmImage::Gray(g), DirectionOpt::Ccw) => {
            pnm::PnmImage::Gray(featmatch_core::transform::rotate90_gray(g, Rotation::Ccw))
        }
        (pnm::PnmImage::Gray(g), DirectionOpt::Half) => {
            pnm::PnmImage::Gray(featmatch_core::transform::rotate180_gray(g))
        }
        (pnm::PnmImage::Rgb(c), DirectionOpt::Cw) => {
            pnm::PnmImage::Rgb(featmatch_core::transform::rotate90_rgb(c, Rotation::Cw))
        }
        (pnm::PnmImage::Rgb(c), DirectionOpt::Ccw) => {
            pnm::PnmImage::Rgb(featmatch_core::transform::rotate90_rgb(c, Rotation::Ccw))
        }
        (pnm::PnmImage::Rgb(c), DirectionOpt::Half) => {
            pnm::PnmImage::Rgb(featmatch_core::transform::rotate180_rgb(c))
        }
    };
    match &rotated {
        pnm::PnmImage::Gray(g) => pnm::write_pgm(&args.output, g),
        pnm::PnmImage::Rgb(c) => pnm::write_ppm(&args.output, c),
    }
    .with_context(|| format!("writing {}", args.output.display()))?;
    let (w, h) = rotated.dimensions();
    if args.json {
        println!(
            "{}",
            json!({
                "command": "rotate",
                "output": args.output.display().to_string(),
                "width": w,
                "height": h,
            })
        );
    } else {
        println!("wrote {}x{} image to {}", w, h, args.output.display());
    }
    Ok(())
}
