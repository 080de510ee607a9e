//! Path traces as JSON documents and SVG frame sequences.

use std::fmt::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{OracleAnswer, OracleOutcome, PathTrace, PathVerdict};

/// Half-width of the square viewport drawn in SVG frames.
pub const VIEWPORT: f64 = 4.0;
const PIXELS: f64 = 480.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceDocument {
    pub omega: Vec<String>,
    pub targets: Vec<Complex64>,
    pub epsilon: f64,
    pub outcome: OracleOutcome,
    pub paths: Vec<PathTrace>,
}

pub fn trace_document(answer: &OracleAnswer, targets: &[Complex64], epsilon: f64) -> TraceDocument {
    TraceDocument {
        omega: answer.omega.iter().map(|w| w.to_string()).collect(),
        targets: targets.to_vec(),
        epsilon,
        outcome: answer.outcome.clone(),
        paths: answer.traces.clone(),
    }
}

fn to_px(z: Complex64) -> (f64, f64) {
    let scale = PIXELS / (2.0 * VIEWPORT);
    ((z.re + VIEWPORT) * scale, (VIEWPORT - z.im) * scale)
}

fn inside(z: Complex64) -> bool {
    z.re.abs() <= VIEWPORT && z.im.abs() <= VIEWPORT
}

/// Point where the segment from `a` (inside) towards `b` leaves the viewport.
fn exit_point(a: Complex64, b: Complex64) -> Complex64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if inside(a + (b - a) * mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    a + (b - a) * lo
}

fn frame(doc: &TraceDocument, upto: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{PIXELS}" height="{PIXELS}" viewBox="0 0 {PIXELS} {PIXELS}">"#
    );
    let _ = writeln!(out, r#"<rect width="{PIXELS}" height="{PIXELS}" fill="white" stroke="black"/>"#);
    let r = doc.epsilon * PIXELS / (2.0 * VIEWPORT);
    for (i, g) in doc.targets.iter().enumerate() {
        let (x, y) = to_px(*g);
        let _ = writeln!(
            out,
            r#"<circle class="target" data-index="{i}" cx="{x:.2}" cy="{y:.2}" r="{:.2}" fill="none" stroke="red"/>"#,
            r.max(2.0)
        );
    }
    for path in &doc.paths {
        let n = path.samples.len().min(upto + 1);
        let mut pts: Vec<(f64, f64)> = Vec::new();
        let mut exited = None;
        for k in 0..n {
            let z = path.samples[k].s;
            if inside(z) {
                pts.push(to_px(z));
            } else {
                if k > 0 && inside(path.samples[k - 1].s) {
                    exited = Some(exit_point(path.samples[k - 1].s, z));
                }
                break;
            }
        }
        if !pts.is_empty() {
            let list: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                out,
                r#"<polyline class="path" data-index="{}" points="{}" fill="none" stroke="blue"/>"#,
                path.index,
                list.join(" ")
            );
        }
        let diverged = matches!(path.verdict, PathVerdict::Diverged);
        if let Some(z) = exited.filter(|_| diverged || n == path.samples.len()) {
            let (x, y) = to_px(z);
            let _ = writeln!(
                out,
                r#"<rect class="diverged" data-index="{}" x="{:.2}" y="{:.2}" width="6" height="6" fill="black"/>"#,
                path.index,
                x - 3.0,
                y - 3.0
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// One SVG per oracle step, named `frame_0000.svg` onwards, plus an
/// `index.json` listing the frames.
pub fn svg_frames(doc: &TraceDocument) -> Vec<(String, String)> {
    let last = doc.paths.iter().map(|p| p.samples.len()).max().unwrap_or(1).saturating_sub(1);
    let mut files: Vec<(String, String)> = (0..=last).map(|k| (format!("frame_{k:04}.svg"), frame(doc, k))).collect();
    let names: Vec<&str> = files.iter().map(|(n, _)| n.as_str()).collect();
    let index = serde_json::json!({ "frames": names, "omega": doc.omega, "outcome": doc.outcome });
    let index = serde_json::to_string_pretty(&index).unwrap_or_default();
    files.push(("index.json".to_string(), index));
    files
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::TraceSample;
    use crate::Rational;

    fn doc() -> TraceDocument {
        let sample = |log_t: f64, re: f64| TraceSample { log_t, s: Complex64::new(re, 0.0), derivative: 0.0 };
        TraceDocument {
            omega: vec![Rational::new(1, 2).to_string(), "0".into()],
            targets: vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
            epsilon: 0.05,
            outcome: OracleOutcome::Counts { beta: vec![1, 0], beta_inf: 1, other: 0, vertex: true },
            paths: vec![
                PathTrace {
                    index: 0,
                    samples: vec![sample(0.0, 0.5), sample(0.1, 0.9)],
                    verdict: PathVerdict::ToTarget { index: 0 },
                },
                PathTrace {
                    index: 1,
                    samples: vec![sample(0.0, 2.0), sample(0.1, 10.0), sample(0.2, 1e7)],
                    verdict: PathVerdict::Diverged,
                },
            ],
        }
    }

    #[test]
    fn frames_and_index() {
        let files = svg_frames(&doc());
        assert_eq!(files.len(), 4);
        assert_eq!(files[0].0, "frame_0000.svg");
        assert_eq!(files[3].0, "index.json");
        assert!(files[2].1.contains(r#"class="diverged""#));
        assert!(!files[0].1.contains(r#"class="diverged""#));
        assert_eq!(files[0].1.matches(r#"class="target""#).count(), 2);
    }

    #[test]
    fn document_round_trip() {
        let d = doc();
        let text = serde_json::to_string(&d).unwrap();
        assert!(text.contains(r#""tag":"counts""#) && text.contains(r#""betaInf":1"#));
        assert_eq!(serde_json::from_str::<TraceDocument>(&text).unwrap(), d);
    }
}
