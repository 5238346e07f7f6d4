//! Tracked extremity points to bounding-box ratio trends.
//!
//! Per frame, the tight box around the five tracked points (hands, feet,
//! head) gives a height/width ratio. Ratios are quantized into eleven groups
//! and consecutive groups become INCREASE / DECREASE / NO_CHANGE. The size of
//! a change is discarded.
//!
//! Two input layouts are supported:
//! * point tracks, `label,frame,x1,y1,...,x5,y5` per line;
//! * ratio lists, `label,r1 r2 ... rT` per line.

use crate::error::{Error, Result};
use crate::pipelines::{trend_sequence, trends};
use crate::scalar::Real;
use crate::sequence::{ClassLabel, ObservationSequence};

pub const GROUP_COUNT: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointFrame<T> {
    pub points: [(T, T); 5],
}

/// `(max_y - min_y) / (max_x - min_x)` of the box around all five points.
pub fn bounding_box_ratio<T: Real>(frame: &PointFrame<T>) -> Result<T> {
    let (mut x_lo, mut x_hi) = (T::infinity(), T::neg_infinity());
    let (mut y_lo, mut y_hi) = (T::infinity(), T::neg_infinity());
    for &(x, y) in &frame.points {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    let (width, height) = (x_hi - x_lo, y_hi - y_lo);
    if !(width > T::zero() && height > T::zero()) {
        return Err(Error::DegenerateBox {
            width: width.as_f64(),
            height: height.as_f64(),
        });
    }
    Ok(height / width)
}

/// Group 1 is `ratio < 0.1`, group `k` in 2..=10 is `[0.1(k-1), 0.1k)`,
/// group 11 is `ratio ≥ 1.0`. Products within rounding noise of a decade
/// edge count as sitting on it, so `0.3` lands in group 4.
pub fn ratio_group<T: Real>(ratio: T) -> usize {
    let mut x = ratio * T::lit(10.0);
    let nearest = x.round();
    if (x - nearest).abs() <= T::epsilon().sqrt() * nearest.abs().max(T::one()) {
        x = nearest;
    }
    let floor = x.floor().to_f64().unwrap_or(0.0).max(0.0);
    (floor as usize + 1).min(GROUP_COUNT)
}

/// `len - 1` trend symbols between the groups of consecutive ratios.
pub fn ratio_trend_sequence<T: Real>(ratios: &[T]) -> Result<ObservationSequence> {
    if ratios.len() < 2 {
        return Err(Error::TooFewFrames {
            frames: ratios.len(),
        });
    }
    let groups: Vec<usize> = ratios.iter().map(|&r| ratio_group(r)).collect();
    trend_sequence(&trends(&groups))
}

/// One tracked activity.
#[derive(Debug, Clone, PartialEq)]
pub struct Activity<T> {
    pub label: ClassLabel,
    pub ratios: Vec<T>,
}

fn parse_field<T: Real>(field: &str, what: &str, lineno: usize) -> Result<T> {
    field
        .trim()
        .parse::<f64>()
        .map(T::lit)
        .map_err(|_| Error::Parse {
            context: format!("line {lineno}"),
            message: format!("{what} {field:?} is not a number"),
        })
}

/// Parses a ratio CSV: one activity per line.
pub fn parse_ratio_csv<T: Real>(text: &str) -> Result<Vec<Activity<T>>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (label, body) = line.split_once(',').ok_or_else(|| Error::Parse {
            context: format!("line {lineno}"),
            message: "expected `label,r1 r2 ... rT`".into(),
        })?;
        let label = ClassLabel::new(label.trim()).map_err(|e| Error::Parse {
            context: format!("line {lineno}"),
            message: e.to_string(),
        })?;
        let ratios = body
            .split_whitespace()
            .map(|tok| {
                let r: T = parse_field(tok, "ratio", lineno)?;
                if r > T::zero() {
                    Ok(r)
                } else {
                    Err(Error::Parse {
                        context: format!("line {lineno}"),
                        message: format!("ratio {tok} must be positive"),
                    })
                }
            })
            .collect::<Result<Vec<T>>>()?;
        out.push(Activity { label, ratios });
    }
    Ok(out)
}

/// Parses a point-track CSV into per-activity ratios. Consecutive lines with
/// the same label and increasing frame numbers form one activity; a label
/// change or a frame number that does not increase starts the next one. A
/// header line beginning with `label` is skipped.
pub fn parse_track_csv<T: Real>(text: &str) -> Result<Vec<Activity<T>>> {
    let mut out: Vec<Activity<T>> = Vec::new();
    let mut last_frame: Option<(ClassLabel, i64)> = None;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() || (idx == 0 && line.starts_with("label")) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 12 {
            return Err(Error::Parse {
                context: format!("line {lineno}"),
                message: format!(
                    "expected 12 fields (label,frame,x1,y1,...,x5,y5), found {}",
                    fields.len()
                ),
            });
        }
        let label = ClassLabel::new(fields[0].trim()).map_err(|e| Error::Parse {
            context: format!("line {lineno}"),
            message: e.to_string(),
        })?;
        let frame: i64 = fields[1].trim().parse().map_err(|_| Error::Parse {
            context: format!("line {lineno}"),
            message: format!("frame {:?} is not an integer", fields[1]),
        })?;
        let mut points = [(T::zero(), T::zero()); 5];
        for (p, slot) in points.iter_mut().enumerate() {
            *slot = (
                parse_field(fields[2 + 2 * p], "coordinate", lineno)?,
                parse_field(fields[3 + 2 * p], "coordinate", lineno)?,
            );
        }
        let ratio = bounding_box_ratio(&PointFrame { points }).map_err(|e| Error::At {
            context: format!("line {lineno} ({label}, frame {frame})"),
            source: Box::new(e),
        })?;
        let continues = matches!(&last_frame, Some((l, f)) if *l == label && frame > *f);
        if continues {
            out.last_mut().expect("activity open").ratios.push(ratio);
        } else {
            out.push(Activity {
                label: label.clone(),
                ratios: vec![ratio],
            });
        }
        last_frame = Some((label, frame));
    }
    Ok(out)
}
