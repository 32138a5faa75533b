//! Text serialization formats.
//!
//! Every writer emits one canonical byte layout (fixed field order, 6-decimal
//! floats, `\n` line endings) so identical data always serializes to
//! identical bytes and write → parse → write round-trips exactly.
//!
//! - keypoints: JSON array of `{x, y, response, angle}` or CSV with header
//!   `x,y,response,angle`
//! - descriptors: header `FEATDESC v1 bits=256 seed=<seed>`, then one
//!   descriptor per line as 64 lowercase hex digits
//! - matches: CSV with header `query_idx,train_idx,distance_bits,distance_norm`
//! - reports: pretty-printed JSON, and an aligned text table

use crate::descriptor::{BinaryDescriptor, DESCRIPTOR_BITS, DESCRIPTOR_BYTES};
use crate::detect::Keypoint;
use crate::error::{Error, Result};
use crate::evaluation::EvalReport;
use crate::matcher::Match;

const KEYPOINT_CSV_HEADER: &str = "x,y,response,angle";
const MATCH_CSV_HEADER: &str = "query_idx,train_idx,distance_bits,distance_norm";

pub fn keypoints_to_json(kps: &[Keypoint]) -> String {
    let mut out = String::from("[");
    for (i, kp) in kps.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format!(
            "\n  {{\"x\": {:.6}, \"y\": {:.6}, \"response\": {:.6}, \"angle\": {:.6}}}",
            kp.x, kp.y, kp.response, kp.angle
        ));
    }
    if kps.is_empty() {
        out.push_str("]\n");
    } else {
        out.push_str("\n]\n");
    }
    out
}

pub fn keypoints_from_json(s: &str) -> Result<Vec<Keypoint>> {
    serde_json::from_str(s).map_err(|e| Error::Parse(format!("keypoint JSON: {e}")))
}

pub fn keypoints_to_csv(kps: &[Keypoint]) -> String {
    let mut out = String::from(KEYPOINT_CSV_HEADER);
    out.push('\n');
    for kp in kps {
        out.push_str(&format!(
            "{:.6},{:.6},{:.6},{:.6}\n",
            kp.x, kp.y, kp.response, kp.angle
        ));
    }
    out
}

fn parse_f64(field: &str, what: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("{what}: {e} in {field:?}")))
}

pub fn keypoints_from_csv(s: &str) -> Result<Vec<Keypoint>> {
    let mut lines = s.lines();
    match lines.next() {
        Some(h) if h.trim() == KEYPOINT_CSV_HEADER => {}
        other => {
            return Err(Error::Parse(format!(
                "keypoint CSV must start with {KEYPOINT_CSV_HEADER:?}, got {other:?}"
            )))
        }
    }
    let mut kps = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Parse(format!(
                "keypoint CSV rows need 4 fields, got {}: {line:?}",
                fields.len()
            )));
        }
        kps.push(Keypoint {
            x: parse_f64(fields[0], "keypoint x")?,
            y: parse_f64(fields[1], "keypoint y")?,
            response: parse_f64(fields[2], "keypoint response")?,
            angle: parse_f64(fields[3], "keypoint angle")?,
        });
    }
    Ok(kps)
}

pub fn descriptors_to_string(seed: u64, descriptors: &[BinaryDescriptor]) -> String {
    let mut out = format!("FEATDESC v1 bits={DESCRIPTOR_BITS} seed={seed}\n");
    for d in descriptors {
        for b in d.as_bytes() {
            out.push_str(&format!("{b:02x}"));
        }
        out.push('\n');
    }
    out
}

pub fn descriptors_from_str(s: &str) -> Result<(u64, Vec<BinaryDescriptor>)> {
    let mut lines = s.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty descriptor file".into()))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "FEATDESC" || parts[1] != "v1" {
        return Err(Error::Parse(format!("bad descriptor header: {header:?}")));
    }
    let bits: usize = parts[2]
        .strip_prefix("bits=")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Parse(format!("bad bits field in {header:?}")))?;
    if bits != DESCRIPTOR_BITS {
        return Err(Error::Parse(format!(
            "unsupported descriptor length {bits}, expected {DESCRIPTOR_BITS}"
        )));
    }
    let seed: u64 = parts[3]
        .strip_prefix("seed=")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Parse(format!("bad seed field in {header:?}")))?;

    let mut descriptors = Vec::new();
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.len() != DESCRIPTOR_BYTES * 2 {
            return Err(Error::Parse(format!(
                "descriptor rows need {} hex digits, got {}",
                DESCRIPTOR_BYTES * 2,
                line.len()
            )));
        }
        let mut bytes = [0u8; DESCRIPTOR_BYTES];
        for (i, byte) in bytes.iter_mut().enumerate() {
            *byte = u8::from_str_radix(&line[i * 2..i * 2 + 2], 16)
                .map_err(|e| Error::Parse(format!("bad hex in descriptor row: {e}")))?;
        }
        descriptors.push(BinaryDescriptor::from_bytes(bytes));
    }
    Ok((seed, descriptors))
}

pub fn matches_to_csv(matches: &[Match]) -> String {
    let mut out = String::from(MATCH_CSV_HEADER);
    out.push('\n');
    for m in matches {
        out.push_str(&format!(
            "{},{},{},{:.6}\n",
            m.query_idx,
            m.train_idx,
            m.distance_bits,
            m.distance_norm()
        ));
    }
    out
}

pub fn matches_from_csv(s: &str) -> Result<Vec<Match>> {
    let mut lines = s.lines();
    match lines.next() {
        Some(h) if h.trim() == MATCH_CSV_HEADER => {}
        other => {
            return Err(Error::Parse(format!(
                "match CSV must start with {MATCH_CSV_HEADER:?}, got {other:?}"
            )))
        }
    }
    let mut matches = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Parse(format!(
                "match CSV rows need 4 fields, got {}: {line:?}",
                fields.len()
            )));
        }
        let parse_usize = |f: &str, what: &str| -> Result<usize> {
            f.trim()
                .parse()
                .map_err(|e| Error::Parse(format!("{what}: {e} in {f:?}")))
        };
        matches.push(Match {
            query_idx: parse_usize(fields[0], "query_idx")?,
            train_idx: parse_usize(fields[1], "train_idx")?,
            distance_bits: parse_usize(fields[2], "distance_bits")? as u32,
        });
    }
    Ok(matches)
}

pub fn report_to_json(report: &EvalReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn report_from_json(s: &str) -> Result<EvalReport> {
    serde_json::from_str(s).map_err(|e| Error::Parse(format!("report JSON: {e}")))
}

/// Aligned text table, one row per labeled report. Columns mirror the
/// keypoint/match/accuracy layout with geometric precision and repeatability
/// appended; percentages print at one decimal.
pub fn report_table(rows: &[(&str, &EvalReport)]) -> String {
    let headers = [
        "Descriptor",
        "KP1",
        "KP2",
        "Correct",
        "Total",
        "Accuracy%",
        "Precision%",
        "Repeat%",
    ];
    let mut cells: Vec<Vec<String>> = vec![headers.iter().map(|s| s.to_string()).collect()];
    for (label, r) in rows {
        cells.push(vec![
            label.to_string(),
            r.n_keypoints_1.to_string(),
            r.n_keypoints_2.to_string(),
            r.n_filter_correct.to_string(),
            r.n_total_matches.to_string(),
            format!("{:.1}", r.accuracy_pct),
            if r.ground_truth_known {
                format!("{:.1}", r.precision_pct)
            } else {
                "n/a".to_string()
            },
            if r.ground_truth_known {
                format!("{:.1}", r.repeatability_pct)
            } else {
                "n/a".to_string()
            },
        ]);
    }
    let widths: Vec<usize> = (0..headers.len())
        .map(|c| cells.iter().map(|row| row[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &cells {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:<w$}"))
            .collect();
        out.push_str(line.join(" | ").trim_end());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::{StageRun, Timings};
    use proptest::prelude::*;

    fn sample_keypoints() -> Vec<Keypoint> {
        vec![
            Keypoint { x: 12.0, y: 7.0, response: 254.0, angle: 0.0 },
            Keypoint { x: 31.5, y: 44.25, response: 1234.5, angle: 2.456789 },
        ]
    }

    #[test]
    fn keypoint_json_round_trip() {
        let kps = sample_keypoints();
        let json = keypoints_to_json(&kps);
        let parsed = keypoints_from_json(&json).unwrap();
        assert_eq!(parsed, kps);
        assert_eq!(keypoints_to_json(&parsed), json);
        // empty list still parses
        assert_eq!(keypoints_from_json(&keypoints_to_json(&[])).unwrap(), vec![]);
    }

    #[test]
    fn keypoint_csv_round_trip() {
        let kps = sample_keypoints();
        let csv = keypoints_to_csv(&kps);
        assert!(csv.starts_with("x,y,response,angle\n"));
        let parsed = keypoints_from_csv(&csv).unwrap();
        assert_eq!(parsed, kps);
        assert_eq!(keypoints_to_csv(&parsed), csv);
        assert!(keypoints_from_csv("nope\n1,2,3,4\n").is_err());
        assert!(keypoints_from_csv("x,y,response,angle\n1,2,3\n").is_err());
    }

    #[test]
    fn descriptor_file_round_trip() {
        let descriptors: Vec<BinaryDescriptor> = (0..5u8)
            .map(|i| BinaryDescriptor::from_bytes([i.wrapping_mul(37); 32]))
            .collect();
        let text = descriptors_to_string(42, &descriptors);
        assert!(text.starts_with("FEATDESC v1 bits=256 seed=42\n"));
        let (seed, parsed) = descriptors_from_str(&text).unwrap();
        assert_eq!(seed, 42);
        assert_eq!(parsed, descriptors);
        assert_eq!(descriptors_to_string(seed, &parsed), text);

        assert!(descriptors_from_str("FEATDESC v2 bits=256 seed=1\n").is_err());
        assert!(descriptors_from_str("FEATDESC v1 bits=128 seed=1\n").is_err());
        assert!(descriptors_from_str("FEATDESC v1 bits=256 seed=1\nzz\n").is_err());
    }

    #[test]
    fn match_csv_round_trip() {
        let matches = vec![
            Match { query_idx: 0, train_idx: 3, distance_bits: 0 },
            Match { query_idx: 1, train_idx: 2, distance_bits: 179 },
            Match { query_idx: 5, train_idx: 5, distance_bits: 256 },
        ];
        let csv = matches_to_csv(&matches);
        assert!(csv.starts_with("query_idx,train_idx,distance_bits,distance_norm\n"));
        assert!(csv.contains("1,2,179,0.699219"));
        let parsed = matches_from_csv(&csv).unwrap();
        assert_eq!(parsed, matches);
        assert_eq!(matches_to_csv(&parsed), csv);
    }

    fn sample_report() -> EvalReport {
        EvalReport {
            n_keypoints_1: 433,
            n_keypoints_2: 433,
            n_total_matches: 433,
            n_filter_correct: 433,
            n_geometric_correct: 430,
            accuracy_pct: 100.0,
            precision_pct: 99.307159,
            repeatability_pct: 98.5,
            no_matches: false,
            ground_truth_known: true,
            steered: true,
            seed: 42,
            timings: Some(Timings {
                detect_ms: 12.25,
                describe_ms: 8.5,
                match_ms: 3.125,
                total_ms: 80.0,
                runs: vec![StageRun { detect_ms: 12.25, describe_ms: 8.5, match_ms: 3.125 }],
            }),
        }
    }

    #[test]
    fn report_json_round_trip() {
        let report = sample_report();
        let json = report_to_json(&report);
        let parsed = report_from_json(&json).unwrap();
        assert_eq!(parsed, report);
        assert_eq!(report_to_json(&parsed), json);

        // timings are optional in the serialized form
        let mut bare = report;
        bare.timings = None;
        let json = report_to_json(&bare);
        assert!(!json.contains("timings"));
        assert_eq!(report_from_json(&json).unwrap(), bare);
    }

    #[test]
    fn table_layout_matches_reference_columns() {
        let report = sample_report();
        let table = report_table(&[("steered", &report)]);
        let mut lines = table.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("Descriptor"));
        for col in ["KP1", "KP2", "Correct", "Total", "Accuracy%", "Precision%", "Repeat%"] {
            assert!(header.contains(col), "missing column {col}");
        }
        let row = lines.next().unwrap();
        assert!(row.starts_with("steered"));
        assert!(row.contains("433"));
        assert!(row.contains("100.0"));
        assert!(row.contains("99.3"));
    }

    proptest! {
        #[test]
        fn keypoint_csv_round_trips_6_decimal_values(
            xs in proptest::collection::vec((0u32..10000, 0u32..10000, 0u32..1000000, 0u32..6283185), 0..20)
        ) {
            // values quantized to 6 decimals survive the round trip exactly
            let kps: Vec<Keypoint> = xs
                .iter()
                .map(|&(a, b, c, d)| Keypoint {
                    x: a as f64 / 100.0,
                    y: b as f64 / 100.0,
                    response: c as f64 / 1000.0,
                    angle: d as f64 / 1e6,
                })
                .collect();
            let csv = keypoints_to_csv(&kps);
            let parsed = keypoints_from_csv(&csv).unwrap();
            prop_assert_eq!(keypoints_to_csv(&parsed), csv);
        }
    }
}
