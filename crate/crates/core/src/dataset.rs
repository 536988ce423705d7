//! Benchmark annotation formats and annotation-level transforms.
//!
//! Supported ground-truth layouts, one instance per line:
//!
//! * MSRA-TD500: `index difficulty x y w h angle`, whitespace separated, with
//!   `(x, y)` the top-left of the unrotated rectangle and `angle` in radians
//!   about its center. `difficulty = 1` marks an unreadable instance.
//! * ICDAR2015: `x1,y1,x2,y2,x3,y3,x4,y4,transcription`, UTF-8 with an
//!   optional byte-order mark. The quadrilateral is fitted with its
//!   minimum-area rotated rectangle.
//! * ICDAR2013: `left, top, right, bottom, "transcription"`.
//!
//! In every format a transcription of `###` marks the instance unreadable.
//!
//! Detections use a plain `cx cy w h theta score` line format.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, parse_err, Error, Result};
use crate::geometry::{Point, RotatedBox};
use crate::matching::Detection;

/// Transcription used by the ICDAR benchmarks for illegible text.
pub const UNREADABLE_MARK: &str = "###";

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthInstance {
    pub bbox: RotatedBox,
    pub readable: bool,
    pub transcription: Option<String>,
}

impl GroundTruthInstance {
    pub fn new(bbox: RotatedBox) -> Self {
        Self {
            bbox,
            readable: true,
            transcription: None,
        }
    }

    fn with_transcription(bbox: RotatedBox, text: Option<String>) -> Self {
        let readable = text.as_deref() != Some(UNREADABLE_MARK);
        Self {
            bbox,
            readable,
            transcription: text,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GtFormat {
    Msra,
    Icdar13,
    Icdar15,
}

impl FromStr for GtFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "msra" | "msra-td500" => Ok(GtFormat::Msra),
            "icdar13" | "icdar2013" => Ok(GtFormat::Icdar13),
            "icdar15" | "icdar2015" => Ok(GtFormat::Icdar15),
            _ => Err(invalid(format!("unknown annotation format '{s}'"))),
        }
    }
}

pub fn parse_gt(format: GtFormat, contents: &str) -> Result<Vec<GroundTruthInstance>> {
    match format {
        GtFormat::Msra => parse_msra(contents),
        GtFormat::Icdar13 => parse_icdar13(contents),
        GtFormat::Icdar15 => parse_icdar15(contents),
    }
}

pub fn serialize_gt(format: GtFormat, gts: &[GroundTruthInstance]) -> String {
    match format {
        GtFormat::Msra => serialize_msra(gts),
        GtFormat::Icdar13 => serialize_icdar13(gts),
        GtFormat::Icdar15 => serialize_icdar15(gts),
    }
}

/// Non-blank lines with their 1-based line numbers.
fn lines(contents: &str) -> impl Iterator<Item = (usize, &str)> {
    contents
        .strip_prefix('\u{feff}')
        .unwrap_or(contents)
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn number(line: usize, field: &str, what: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| parse_err(line, format!("{what}: expected a number, got '{}'", field.trim())))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("{what}: value must be finite")));
    }
    Ok(v)
}

fn boxed<T>(line: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse { .. } => e,
        other => parse_err(line, other.to_string()),
    })
}

pub fn parse_msra(contents: &str) -> Result<Vec<GroundTruthInstance>> {
    lines(contents)
        .map(|(n, l)| {
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 7 {
                return Err(parse_err(n, format!("expected 7 fields, got {}", f.len())));
            }
            let difficulty = f[1]
                .parse::<u8>()
                .map_err(|_| parse_err(n, format!("difficulty must be 0 or 1, got '{}'", f[1])))?;
            let x = number(n, f[2], "x")?;
            let y = number(n, f[3], "y")?;
            let w = number(n, f[4], "w")?;
            let h = number(n, f[5], "h")?;
            let angle = number(n, f[6], "angle")?;
            let bbox = boxed(n, RotatedBox::new(x + w / 2.0, y + h / 2.0, h, w, angle))?;
            Ok(GroundTruthInstance {
                bbox,
                readable: difficulty == 0,
                transcription: None,
            })
        })
        .collect()
}

pub fn serialize_msra(gts: &[GroundTruthInstance]) -> String {
    let mut out = String::new();
    for (i, g) in gts.iter().enumerate() {
        let b = &g.bbox;
        let _ = writeln!(
            out,
            "{} {} {} {} {} {} {}",
            i,
            u8::from(!g.readable),
            b.x() - b.w() / 2.0,
            b.y() - b.h() / 2.0,
            b.w(),
            b.h(),
            b.theta()
        );
    }
    out
}

pub fn parse_icdar15(contents: &str) -> Result<Vec<GroundTruthInstance>> {
    lines(contents)
        .map(|(n, l)| {
            let f: Vec<&str> = l.splitn(9, ',').collect();
            if f.len() < 8 {
                return Err(parse_err(n, format!("expected 8 coordinates, got {}", f.len())));
            }
            let mut quad = [Point::default(); 4];
            for (k, p) in quad.iter_mut().enumerate() {
                p.x = number(n, f[2 * k], &format!("x{}", k + 1))?;
                p.y = number(n, f[2 * k + 1], &format!("y{}", k + 1))?;
            }
            let bbox = boxed(n, quad_to_rotated_rect(&quad))?;
            let text = f.get(8).map(|t| t.to_string()).filter(|t| !t.is_empty());
            Ok(GroundTruthInstance::with_transcription(bbox, text))
        })
        .collect()
}

pub fn serialize_icdar15(gts: &[GroundTruthInstance]) -> String {
    let mut out = String::new();
    for g in gts {
        for p in g.bbox.vertices() {
            let _ = write!(out, "{},{},", p.x, p.y);
        }
        let _ = writeln!(out, "{}", transcription_or_default(g));
    }
    out
}

fn transcription_or_default(g: &GroundTruthInstance) -> &str {
    match (&g.transcription, g.readable) {
        (Some(t), _) => t,
        (None, true) => "",
        (None, false) => UNREADABLE_MARK,
    }
}

pub fn parse_icdar13(contents: &str) -> Result<Vec<GroundTruthInstance>> {
    lines(contents)
        .map(|(n, l)| {
            let f: Vec<&str> = if l.contains(',') {
                l.splitn(5, ',').collect()
            } else {
                l.splitn(5, char::is_whitespace).collect()
            };
            if f.len() < 4 {
                return Err(parse_err(n, format!("expected left, top, right, bottom, got '{l}'")));
            }
            let left = number(n, f[0], "left")?;
            let top = number(n, f[1], "top")?;
            let right = number(n, f[2], "right")?;
            let bottom = number(n, f[3], "bottom")?;
            if right <= left || bottom <= top {
                return Err(parse_err(
                    n,
                    format!("empty rectangle ({left}, {top}, {right}, {bottom})"),
                ));
            }
            let bbox = boxed(n, RotatedBox::from_xywh(left, top, right - left, bottom - top))?;
            let text = f.get(4).map(|t| {
                let t = t.trim();
                t.strip_prefix('"')
                    .and_then(|s| s.strip_suffix('"'))
                    .unwrap_or(t)
                    .to_string()
            })
            .filter(|t| !t.is_empty());
            Ok(GroundTruthInstance::with_transcription(bbox, text))
        })
        .collect()
}

/// Writes each instance's axis-aligned extent; rotated boxes are replaced by
/// their enclosing horizontal rectangle.
pub fn serialize_icdar13(gts: &[GroundTruthInstance]) -> String {
    let mut out = String::new();
    for g in gts {
        let (l, t, r, b) = extent(&g.bbox);
        let _ = writeln!(out, "{}, {}, {}, {}, \"{}\"", l, t, r, b, transcription_or_default(g));
    }
    out
}

/// `(left, top, right, bottom)` of the box's corners.
fn extent(b: &RotatedBox) -> (f64, f64, f64, f64) {
    b.vertices().iter().fold(
        (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        |(l, t, r, bt), p| (l.min(p.x), t.min(p.y), r.max(p.x), bt.max(p.y)),
    )
}

/// Reads the `cx cy w h theta score` detection format.
pub fn parse_detections(contents: &str) -> Result<Vec<Detection>> {
    lines(contents)
        .map(|(n, l)| {
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 6 {
                return Err(parse_err(n, format!("expected 6 fields, got {}", f.len())));
            }
            let names = ["cx", "cy", "w", "h", "theta", "score"];
            let mut v = [0.0; 6];
            for (k, slot) in v.iter_mut().enumerate() {
                *slot = number(n, f[k], names[k])?;
            }
            let bbox = boxed(n, RotatedBox::new(v[0], v[1], v[3], v[2], v[4]))?;
            boxed(n, Detection::new(bbox, v[5]))
        })
        .collect()
}

/// Writes detections with six decimals per field, one per line.
pub fn write_detections(dets: &[Detection]) -> String {
    let mut out = String::new();
    for d in dets {
        let b = &d.bbox;
        let _ = writeln!(
            out,
            "{:.6} {:.6} {:.6} {:.6} {:.6} {:.6}",
            b.x(),
            b.y(),
            b.w(),
            b.h(),
            b.theta(),
            d.score
        );
    }
    out
}

fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: Point, a: Point, b: Point| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    let mut hull: Vec<Point> = Vec::with_capacity(pts.len() * 2);
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Minimum-area rotated rectangle enclosing a quadrilateral, found by trying
/// every convex-hull edge as a rectangle side. Among equal-area candidates
/// the one with orientation closest to zero wins, so squares come out
/// unrotated.
pub fn quad_to_rotated_rect(quad: &[Point; 4]) -> Result<RotatedBox> {
    if quad.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
        return Err(invalid("quadrilateral coordinates must be finite"));
    }
    let hull = convex_hull(quad);
    let scale = quad
        .iter()
        .flat_map(|p| [p.x.abs(), p.y.abs()])
        .fold(1.0f64, f64::max);
    let hull_area = crate::geometry::polygon_area(&crate::geometry::Polygon::new(hull.clone()));
    if hull.len() < 3 || hull_area <= 1e-12 * scale * scale {
        return Err(Error::Degenerate(format!(
            "quadrilateral {quad:?} is collinear or has repeated points"
        )));
    }

    let mut best: Option<(f64, RotatedBox)> = None;
    for i in 0..hull.len() {
        let a = hull[i];
        let b = hull[(i + 1) % hull.len()];
        let len = a.distance(b);
        if len == 0.0 {
            continue;
        }
        let (ux, uy) = ((b.x - a.x) / len, (b.y - a.y) / len);
        let (mut u0, mut u1, mut v0, mut v1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in &hull {
            let u = p.x * ux + p.y * uy;
            let v = -p.x * uy + p.y * ux;
            u0 = u0.min(u);
            u1 = u1.max(u);
            v0 = v0.min(v);
            v1 = v1.max(v);
        }
        let (du, dv) = (u1 - u0, v1 - v0);
        if du <= 0.0 || dv <= 0.0 {
            continue;
        }
        let area = du * dv;
        let (um, vm) = ((u0 + u1) / 2.0, (v0 + v1) / 2.0);
        let cx = um * ux - vm * uy;
        let cy = um * uy + vm * ux;
        // Long side direction (ux, uy) corresponds to theta = atan2(-uy, ux).
        let cand = RotatedBox::new(cx, cy, dv, du, (-uy).atan2(ux))?;
        let better = match &best {
            None => true,
            Some((ba, bb)) => {
                let tol = 1e-9 * ba.max(area);
                area < ba - tol || (area <= ba + tol && cand.theta().abs() < bb.theta().abs())
            }
        };
        if better {
            best = Some((area, cand));
        }
    }
    best.map(|(_, b)| b)
        .ok_or_else(|| Error::Degenerate(format!("no enclosing rectangle for {quad:?}")))
}

/// Grows (or with `factor < 1`, shrinks) width and height about the center,
/// keeping the orientation.
pub fn enlarge_context(b: &RotatedBox, factor: f64) -> Result<RotatedBox> {
    b.scaled(factor)
}

/// Randomly drops `floor(remove_proportion * n_unreadable)` unreadable
/// instances. The draw depends only on `seed` and the input order; readable
/// instances are always kept and relative order is preserved.
pub fn filter_unreadable(
    gts: &[GroundTruthInstance],
    remove_proportion: f64,
    seed: u64,
) -> Result<Vec<GroundTruthInstance>> {
    if !(0.0..=1.0).contains(&remove_proportion) {
        return Err(invalid(format!(
            "remove proportion must lie in [0, 1], got {remove_proportion}"
        )));
    }
    let unreadable: Vec<usize> = (0..gts.len()).filter(|&i| !gts[i].readable).collect();
    // The epsilon keeps products like 0.29 * 100 from flooring to 28.
    let n_remove = ((remove_proportion * unreadable.len() as f64 + 1e-9).floor() as usize).min(unreadable.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut drop = vec![false; gts.len()];
    for k in rand::seq::index::sample(&mut rng, unreadable.len(), n_remove) {
        drop[unreadable[k]] = true;
    }
    Ok(gts
        .iter()
        .zip(drop)
        .filter(|(_, d)| !d)
        .map(|(g, _)| g.clone())
        .collect())
}

/// Axis-aligned rectangle enclosing the box.
pub fn to_horizontal(b: &RotatedBox) -> RotatedBox {
    let (l, t, r, bt) = extent(b);
    // Width and height are positive for any valid box.
    RotatedBox::from_xywh(l, t, r - l, bt - t).expect("extent of a valid box is non-empty")
}
