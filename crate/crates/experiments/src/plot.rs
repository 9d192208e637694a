//! Standalone SVG 1.1 figures, one file per figure, written by hand.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use polya_core::analytic::AnalyticCurve;
use polya_core::stats::{equal_width_edges, histogram};

use crate::error::{ExperimentError, Result};
use crate::harness::{seat_edges, ReplicateRecord, SHARE_BINS};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const CURVE_POINTS: usize = 201;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlotKind {
    /// Histogram of party-1 seat counts.
    Seats,
    /// Histogram of party-1 popular-vote share.
    PopularVote,
    /// Histogram of party-1 share in the first district.
    DistrictShare,
    /// Scatter of north against south party-1 share.
    NorthSouth,
    /// Scatter of seat share against popular share, optionally with a curve.
    SeatsVotes { overlay: Option<AnalyticCurve> },
}

impl PlotKind {
    pub const NAMES: [&'static str; 5] = ["seats", "popular_vote", "district_share", "north_south", "seats_votes"];

    pub fn name(&self) -> &'static str {
        match self {
            PlotKind::Seats => "seats",
            PlotKind::PopularVote => "popular_vote",
            PlotKind::DistrictShare => "district_share",
            PlotKind::NorthSouth => "north_south",
            PlotKind::SeatsVotes { .. } => "seats_votes",
        }
    }

    pub fn file_name(&self) -> String {
        format!("{}.svg", self.name())
    }
}

impl FromStr for PlotKind {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "seats" => PlotKind::Seats,
            "popular_vote" => PlotKind::PopularVote,
            "district_share" => PlotKind::DistrictShare,
            "north_south" => PlotKind::NorthSouth,
            "seats_votes" => PlotKind::SeatsVotes { overlay: None },
            _ => return Err(ExperimentError::UnknownPlotKind(s.to_string())),
        })
    }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

struct Svg {
    body: String,
}

impl Svg {
    fn new(title: &str, xlabel: &str, ylabel: &str, frame: &Frame) -> Self {
        let mut body = String::new();
        let _ = writeln!(
            body,
            r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">
<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>
<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>
<text x="{}" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>
<text x="16" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            WIDTH / 2.0,
            escape(title),
            (LEFT + WIDTH - RIGHT) / 2.0,
            HEIGHT - 16.0,
            escape(xlabel),
            (TOP + HEIGHT - BOTTOM) / 2.0,
            (TOP + HEIGHT - BOTTOM) / 2.0,
            escape(ylabel),
        );
        let (x0, x1, y0, y1) = (frame.px(frame.x.0), frame.px(frame.x.1), frame.py(frame.y.0), frame.py(frame.y.1));
        let _ = writeln!(
            body,
            r#"<g class="axes" stroke="black" stroke-width="1" fill="none"><line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}"/><line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}"/></g>"#
        );
        body.push_str(r#"<g class="ticks" font-family="sans-serif" font-size="11">"#);
        for i in 0..=5 {
            let t = i as f64 / 5.0;
            let xv = frame.x.0 + t * (frame.x.1 - frame.x.0);
            let yv = frame.y.0 + t * (frame.y.1 - frame.y.0);
            let (px, py) = (frame.px(xv), frame.py(yv));
            let _ = write!(
                body,
                r#"<line x1="{px:.2}" y1="{y0:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                y0 + 5.0,
                y0 + 18.0,
                tick_label(xv)
            );
            let _ = write!(
                body,
                r#"<line x1="{:.2}" y1="{py:.2}" x2="{x0:.2}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                x0 - 5.0,
                x0 - 8.0,
                py + 4.0,
                tick_label(yv)
            );
        }
        body.push_str("</g>\n");
        Svg { body }
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

/// Histogram figure; bars are `<rect class="bar">`.
pub fn histogram_svg(title: &str, xlabel: &str, values: &[f64], edges: &[f64]) -> Result<String> {
    let counts = histogram(values, edges)?;
    let peak = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let frame = Frame {
        x: (edges[0], edges[edges.len() - 1]),
        y: (0.0, peak * 1.05),
    };
    let mut svg = Svg::new(title, xlabel, "count", &frame);
    svg.body.push_str(r##"<g fill="#4a78b0" stroke="white" stroke-width="0.5">"##);
    for (i, &c) in counts.iter().enumerate() {
        let (x0, x1) = (frame.px(edges[i]), frame.px(edges[i + 1]));
        let (y0, y1) = (frame.py(0.0), frame.py(c as f64));
        let _ = write!(
            svg.body,
            r#"<rect class="bar" x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}"/>"#,
            x1 - x0,
            y0 - y1
        );
    }
    svg.body.push_str("</g>\n");
    Ok(svg.finish())
}

/// Scatter figure on the unit square; points are `<circle class="point">`,
/// the optional overlay is a `<polyline class="curve">`.
pub fn scatter_svg(title: &str, xlabel: &str, ylabel: &str, points: &[(f64, f64)], overlay: Option<&AnalyticCurve>) -> String {
    let frame = Frame {
        x: (0.0, 1.0),
        y: (0.0, 1.0),
    };
    let mut svg = Svg::new(title, xlabel, ylabel, &frame);
    svg.body.push_str(r##"<g fill="#4a78b0" fill-opacity="0.5">"##);
    for &(x, y) in points {
        let _ = write!(svg.body, r#"<circle class="point" cx="{:.2}" cy="{:.2}" r="2"/>"#, frame.px(x), frame.py(y));
    }
    svg.body.push_str("</g>\n");
    if let Some(curve) = overlay {
        let coords: Vec<String> = curve
            .grid(CURVE_POINTS)
            .into_iter()
            .map(|(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
            .collect();
        let _ = writeln!(
            svg.body,
            r##"<polyline class="curve" fill="none" stroke="#c0392b" stroke-width="2" points="{}"/>"##,
            coords.join(" ")
        );
    }
    svg.finish()
}

/// Renders one figure of `records`.
pub fn render(records: &[ReplicateRecord], kind: PlotKind) -> Result<String> {
    let first = records.first().ok_or(ExperimentError::EmptyDataset)?;
    let n = first.num_districts();
    let shares = |f: fn(&ReplicateRecord) -> f64| records.iter().map(f).collect::<Vec<_>>();
    Ok(match kind {
        PlotKind::Seats => histogram_svg(
            "Seats won by party 1",
            "seats",
            &shares(|r| r.seats[0] as f64),
            &seat_edges(n),
        )?,
        PlotKind::PopularVote => histogram_svg(
            "Popular vote of party 1",
            "popular vote share",
            &shares(|r| r.popular_shares[0]),
            &equal_width_edges(0.0, 1.0, SHARE_BINS),
        )?,
        PlotKind::DistrictShare => histogram_svg(
            "Party 1 share in district 1",
            "vote share",
            &shares(|r| r.district1_share),
            &equal_width_edges(0.0, 1.0, SHARE_BINS),
        )?,
        PlotKind::NorthSouth => scatter_svg(
            "North vs south share of party 1",
            "north share",
            "south share",
            &records.iter().map(|r| (r.north_share, r.south_share)).collect::<Vec<_>>(),
            None,
        ),
        PlotKind::SeatsVotes { overlay } => {
            if let Some(curve) = &overlay {
                curve.validate()?;
            }
            scatter_svg(
                "Seat share vs popular vote, party 1",
                "popular vote share",
                "seat share",
                &records
                    .iter()
                    .map(|r| (r.popular_shares[0], r.seats[0] as f64 / n as f64))
                    .collect::<Vec<_>>(),
                overlay.as_ref(),
            )
        }
    })
}

/// Writes one figure into `dir` and returns its path. Nothing is written
/// when `records` is empty.
pub fn emit_plot(records: &[ReplicateRecord], kind: PlotKind, dir: &Path) -> Result<PathBuf> {
    let svg = render(records, kind)?;
    fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;
    let path = dir.join(kind.file_name());
    fs::write(&path, svg).map_err(|e| ExperimentError::io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: u64, p: f64, seats: u64) -> ReplicateRecord {
        ReplicateRecord {
            replicate_id: id,
            seed: id,
            popular_shares: vec![p, 1.0 - p],
            seats: vec![seats, 10 - seats],
            district1_share: p,
            north_share: p,
            south_share: 1.0 - p,
            district_shares: vec![],
        }
    }

    #[test]
    fn parses_kinds() {
        for name in PlotKind::NAMES {
            assert_eq!(name.parse::<PlotKind>().unwrap().name(), name);
        }
        assert!(matches!("pie".parse::<PlotKind>(), Err(ExperimentError::UnknownPlotKind(_))));
    }

    #[test]
    fn histogram_has_one_bar_per_bin() {
        let svg = histogram_svg("t", "x", &[0.1, 0.2, 0.9], &equal_width_edges(0.0, 1.0, 20)).unwrap();
        assert_eq!(svg.matches(r#"class="bar""#).count(), 20);
        assert!(svg.starts_with("<?xml"));
        assert!(svg.contains(r#"version="1.1""#));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn scatter_with_overlay() {
        let records: Vec<_> = (0..7).map(|i| record(i, 0.1 * i as f64, i)).collect();
        let svg = render(&records, PlotKind::SeatsVotes { overlay: Some(AnalyticCurve::CubeCurve { k: 3.0 }) }).unwrap();
        assert_eq!(svg.matches(r#"class="point""#).count(), 7);
        assert_eq!(svg.matches(r#"class="curve""#).count(), 1);
        let bad = render(&records, PlotKind::SeatsVotes { overlay: Some(AnalyticCurve::CubeCurve { k: -1.0 }) });
        assert!(matches!(bad, Err(ExperimentError::Analytic(_))));
    }

    #[test]
    fn empty_dataset_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let err = emit_plot(&[], PlotKind::Seats, dir.path()).unwrap_err();
        assert!(matches!(err, ExperimentError::EmptyDataset));
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn seat_histogram_bins_are_integer_centred() {
        let records: Vec<_> = (0..4).map(|i| record(i, 0.5, 5)).collect();
        let svg = render(&records, PlotKind::Seats).unwrap();
        assert_eq!(svg.matches(r#"class="bar""#).count(), 11);
        assert!(svg.contains(">count</text>"));
    }
}
