//! Line and word segmentation.
//!
//! Three independent line segmenters feed the hypothesis tree: horizontal
//! projection profiling, a Hough transform over near-horizontal baselines,
//! and interval clustering of connected-component extents. Each has a known
//! failure mode (projection merges crowded lines, the interval method
//! splits off detached zone modifiers), which is exactly why all three run.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::features::FeatureSequence;
use crate::image::BinaryImage;
use crate::syndata::Box2;

/// Which segmentation routine produced a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BranchId {
    Projection,
    Hough,
    IntervalTree,
}

impl BranchId {
    pub const ALL: [BranchId; 3] = [BranchId::Projection, BranchId::Hough, BranchId::IntervalTree];

    pub fn name(self) -> &'static str {
        match self {
            BranchId::Projection => "projection",
            BranchId::Hough => "hough",
            BranchId::IntervalTree => "interval_tree",
        }
    }

    pub fn from_name(s: &str) -> Option<BranchId> {
        match s {
            "projection" => Some(BranchId::Projection),
            "hough" => Some(BranchId::Hough),
            "interval_tree" => Some(BranchId::IntervalTree),
            _ => None,
        }
    }
}

/// One detected line: an inclusive row band. Bands from a single routine
/// are sorted by `y0` and never overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LineSegment {
    pub y0: usize,
    pub y1: usize,
    pub source: BranchId,
}

impl LineSegment {
    pub fn height(&self) -> usize {
        self.y1 - self.y0 + 1
    }
}

/// One detected word: an inclusive column band inside a line band, with
/// the page crop restricted to (columns x line band).
#[derive(Debug, Clone)]
pub struct WordSegment {
    pub line_index: usize,
    pub x0: usize,
    pub x1: usize,
    pub y0: usize,
    pub y1: usize,
    pub crop: BinaryImage,
}

impl WordSegment {
    pub fn bbox(&self) -> Box2 {
        Box2 { x0: self.x0, y0: self.y0, x1: self.x1, y1: self.y1 }
    }
}

/// Group row indices into lines: rows with projection > `min_ink` are text,
/// and text runs separated by fewer than `min_gap` background rows fuse.
pub fn segment_lines_projection(
    page: &BinaryImage,
    min_gap: usize,
    min_ink: usize,
) -> Result<Vec<LineSegment>> {
    if min_gap < 1 {
        return Err(Error::param("segmentation.min_gap", "must be >= 1"));
    }
    let proj = crate::image::horizontal_projection(page);
    let bands = group_runs(proj.iter().map(|&v| v > min_ink), min_gap);
    Ok(bands
        .into_iter()
        .map(|(y0, y1)| LineSegment { y0, y1, source: BranchId::Projection })
        .collect())
}

/// Maximal index runs of `true` values, fusing runs separated by fewer
/// than `min_gap` falses. Returns inclusive (first, last) index pairs.
fn group_runs(flags: impl Iterator<Item = bool>, min_gap: usize) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for (i, on) in flags.enumerate() {
        if !on {
            continue;
        }
        match out.last_mut() {
            Some((_, last)) if i - *last <= min_gap => *last = i,
            _ => out.push((i, i)),
        }
    }
    out
}

/// Baseline detection via a (rho, theta) Hough accumulator restricted to
/// near-horizontal angles. Accepted baselines become bands of height
/// `avg_line_height`, truncated against each other so they never overlap.
///
/// `peak_ratio` rejects accumulator peaks weaker than that fraction of the
/// strongest peak; it keeps salt noise from spawning baselines.
pub fn segment_lines_hough(
    page: &BinaryImage,
    avg_line_height: usize,
    theta_tolerance_deg: f64,
    accumulator_bins: usize,
    peak_ratio: f64,
) -> Result<Vec<LineSegment>> {
    if avg_line_height < 1 {
        return Err(Error::param("segmentation.avg_line_height", "must be >= 1"));
    }
    if !(0.0..90.0).contains(&theta_tolerance_deg) {
        return Err(Error::param("segmentation.theta_tolerance", "must be in [0, 90)"));
    }
    if accumulator_bins < 1 {
        return Err(Error::param("segmentation.accumulator_bins", "must be >= 1"));
    }
    if !(0.0..=1.0).contains(&peak_ratio) {
        return Err(Error::param("segmentation.peak_ratio", "must be in [0, 1]"));
    }
    let (w, h) = (page.width(), page.height());
    if page.ink_count() == 0 {
        return Ok(Vec::new());
    }

    // rho = x cos(theta) + y sin(theta); near theta = 90 deg, rho tracks y.
    // Offset keeps indices nonnegative for theta past 90 deg.
    let offset = w as i64;
    let rho_size = 2 * w + h + 1;
    let thetas: Vec<f64> = if accumulator_bins == 1 {
        vec![90.0]
    } else {
        (0..accumulator_bins)
            .map(|b| {
                90.0 - theta_tolerance_deg
                    + 2.0 * theta_tolerance_deg * b as f64 / (accumulator_bins - 1) as f64
            })
            .collect()
    };
    let trig: Vec<(f64, f64)> = thetas
        .iter()
        .map(|t| {
            let r = t * PI / 180.0;
            (r.cos(), r.sin())
        })
        .collect();
    let mut acc = vec![vec![0u32; rho_size]; trig.len()];
    for y in 0..h {
        let row = page.row(y);
        for x in 0..w {
            if row[x] == 0 {
                continue;
            }
            for (b, &(c, s)) in trig.iter().enumerate() {
                let rho = (x as f64 * c + y as f64 * s).round() as i64 + offset;
                if (0..rho_size as i64).contains(&rho) {
                    acc[b][rho as usize] += 1;
                }
            }
        }
    }
    let score: Vec<u32> = (0..rho_size)
        .map(|r| acc.iter().map(|a| a[r]).max().unwrap_or(0))
        .collect();

    let strongest = *score.iter().max().unwrap();
    let threshold = ((peak_ratio * strongest as f64).ceil() as u32).max(1);
    let radius = (avg_line_height / 2).max(1);
    let mut candidates: Vec<usize> = (0..rho_size).filter(|&r| score[r] >= threshold).collect();
    candidates.sort_by(|&a, &b| score[b].cmp(&score[a]).then(a.cmp(&b)));
    let mut peaks: Vec<usize> = Vec::new();
    for r in candidates {
        if peaks.iter().all(|&p| r.abs_diff(p) > radius) {
            peaks.push(r);
        }
    }

    // A raw peak on a flat profile can sit anywhere in the ink band; the
    // vote-weighted centroid of its suppression window centers the baseline.
    // Two peaks of one band can both survive suppression when they straddle
    // its edges, but their centroids then collapse inward, so the same
    // suppression window applied to the centroids (strongest peak first)
    // leaves one baseline per band.
    let mut baselines: Vec<i64> = Vec::new();
    for &p in &peaks {
        let lo = p.saturating_sub(radius);
        let hi = (p + radius).min(rho_size - 1);
        let mut num = 0.0;
        let mut den = 0.0;
        for r in lo..=hi {
            num += score[r] as f64 * r as f64;
            den += score[r] as f64;
        }
        let centroid = (num / den).round() as i64 - offset;
        if baselines.iter().all(|&b| centroid.abs_diff(b) > radius as u64) {
            baselines.push(centroid);
        }
    }
    baselines.sort_unstable();

    let half = (avg_line_height / 2) as i64;
    let mut bands: Vec<(i64, i64)> = baselines
        .iter()
        .map(|&b| (b - half, b - half + avg_line_height as i64 - 1))
        .collect();
    for i in 1..bands.len() {
        if bands[i - 1].1 >= bands[i].0 {
            let mid = (baselines[i - 1] + baselines[i]) / 2;
            bands[i - 1].1 = mid;
            bands[i].0 = mid + 1;
        }
    }
    Ok(bands
        .into_iter()
        .filter_map(|(y0, y1)| {
            let y0 = y0.max(0) as usize;
            let y1 = y1.min(h as i64 - 1);
            if y1 < y0 as i64 {
                None
            } else {
                Some(LineSegment { y0, y1: y1 as usize, source: BranchId::Hough })
            }
        })
        .collect())
}

/// Cluster connected components into lines by transitive overlap of their
/// vertical extents; each line band is the union extent of one cluster.
///
/// Detached zone modifiers have extents disjoint from their middle band, so
/// they surface as separate lines: the routine's documented failure mode.
/// Components smaller than `min_component_pixels` are ignored (noise).
pub fn segment_lines_interval_tree(
    page: &BinaryImage,
    min_component_pixels: usize,
) -> Result<Vec<LineSegment>> {
    let comps = crate::image::connected_components(page);
    let mut extents: Vec<(usize, usize)> = comps
        .iter()
        .filter(|c| c.pixel_count >= min_component_pixels)
        .map(|c| (c.y0, c.y1))
        .collect();
    extents.sort_unstable();
    let mut lines: Vec<LineSegment> = Vec::new();
    for (y0, y1) in extents {
        match lines.last_mut() {
            Some(last) if y0 <= last.y1 => last.y1 = last.y1.max(y1),
            _ => lines.push(LineSegment { y0, y1, source: BranchId::IntervalTree }),
        }
    }
    Ok(lines)
}

/// Split a line band into words: columns whose in-band ink count exceeds
/// `min_ink` are text columns, and text runs separated by fewer than
/// `gap_threshold` background columns fuse into one word.
pub fn segment_words(
    page: &BinaryImage,
    line_index: usize,
    line: &LineSegment,
    gap_threshold: usize,
    min_ink: usize,
) -> Result<Vec<WordSegment>> {
    if gap_threshold < 1 {
        return Err(Error::param("segmentation.gap_threshold", "must be >= 1"));
    }
    if line.y1 < line.y0 || line.y1 >= page.height() {
        return Err(Error::LineOutOfBounds { y0: line.y0, y1: line.y1, height: page.height() });
    }
    let col_ink: Vec<usize> = (0..page.width())
        .map(|x| (line.y0..=line.y1).filter(|&y| page.get(x, y) == 1).count())
        .collect();
    let runs = group_runs(col_ink.iter().map(|&v| v > min_ink), gap_threshold);
    Ok(runs
        .into_iter()
        .map(|(x0, x1)| {
            let crop = page.crop(x0, line.y0, x1, line.y1);
            WordSegment { line_index, x0, x1, y0: line.y0, y1: line.y1, crop }
        })
        .collect())
}

/// Bounding box of ink pixels having at least two inked 8-neighbors.
/// Isolated specks and lone pixel pairs carry no support, so salt noise
/// does not stretch the box; glyph strokes always do.
fn supported_ink_bounds(img: &BinaryImage) -> Option<(usize, usize, usize, usize)> {
    let (w, h) = (img.width(), img.height());
    let mut b: Option<(usize, usize, usize, usize)> = None;
    for y in 0..h {
        for x in 0..w {
            if img.get(x, y) == 0 {
                continue;
            }
            let mut support = 0;
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if (0..w as i64).contains(&nx)
                        && (0..h as i64).contains(&ny)
                        && img.get(nx as usize, ny as usize) == 1
                    {
                        support += 1;
                    }
                }
            }
            if support >= 2 {
                b = Some(match b {
                    None => (x, y, x, y),
                    Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
                });
            }
        }
    }
    b
}

/// Tighten a word crop to its ink bounding box and rescale it to
/// `target_height` by nearest neighbor, width scaled proportionally
/// (minimum 1). Returns one frame per column with values in {0, 1}.
///
/// The box is taken over supported ink (see [`supported_ink_bounds`]) so
/// stray noise pixels cannot dilute the glyphs' scale; pixel values inside
/// the box pass through raw. A crop with no supported ink falls back to
/// the plain ink bounding box.
pub fn normalize_segment(word: &WordSegment, target_height: usize) -> Result<FeatureSequence> {
    if target_height < 1 {
        return Err(Error::param("segmentation.target_height", "must be >= 1"));
    }
    let (ix0, iy0, ix1, iy1) = supported_ink_bounds(&word.crop)
        .or_else(|| word.crop.ink_bounds())
        .ok_or(Error::EmptyCrop)?;
    let tight = word.crop.crop(ix0, iy0, ix1, iy1);
    let (sw, sh) = (tight.width(), tight.height());
    let tw = ((sw as f64 * target_height as f64 / sh as f64).round() as usize).max(1);
    let frames: Vec<Vec<f64>> = (0..tw)
        .map(|c| {
            let sx = c * sw / tw;
            (0..target_height)
                .map(|r| {
                    let sy = r * sh / target_height;
                    tight.get(sx, sy) as f64
                })
                .collect()
        })
        .collect();
    FeatureSequence::new(frames)
}

/// Debug dump: one structured text line per segment.
pub fn dump_segments(lines: &[LineSegment], words: &[WordSegment]) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    for (i, l) in lines.iter().enumerate() {
        writeln!(out, "line {} {} rows {} {}", l.source.name(), i, l.y0, l.y1).unwrap();
    }
    for w in words {
        writeln!(out, "word line {} cols {} {} rows {} {}", w.line_index, w.x0, w.x1, w.y0, w.y1)
            .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syndata::{self, make_default_glyphset, PageSpec};

    fn page_with_rows(w: usize, h: usize, rows: &[usize]) -> BinaryImage {
        let mut img = BinaryImage::blank(w, h).unwrap();
        for &y in rows {
            for x in 0..w {
                img.set(x, y, 1);
            }
        }
        img
    }

    fn assert_sorted_disjoint(lines: &[LineSegment]) {
        for pair in lines.windows(2) {
            assert!(pair[0].y1 < pair[1].y0, "bands overlap or unsorted: {pair:?}");
        }
    }

    fn render(
        lines: Vec<Vec<Vec<u32>>>,
        crowding: f64,
        noise: f64,
    ) -> (BinaryImage, syndata::GroundTruth) {
        let gs = make_default_glyphset(1);
        let spec = PageSpec {
            lines,
            interline_gap: 10,
            interword_gap: 10,
            modifier_crowding: crowding,
            noise_density: noise,
            rng_seed: 5,
        };
        syndata::render_page(&spec, &gs).unwrap()
    }

    #[test]
    fn projection_finds_two_separated_bands() {
        let page = page_with_rows(20, 30, &[0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 20, 21, 22, 23, 24, 25, 26, 27, 28, 29]);
        let lines = segment_lines_projection(&page, 5, 0).unwrap();
        assert_eq!(lines.len(), 2);
        assert_eq!((lines[0].y0, lines[0].y1), (0, 9));
        assert_eq!((lines[1].y0, lines[1].y1), (20, 29));
        assert!(lines.iter().all(|l| l.source == BranchId::Projection));
    }

    #[test]
    fn projection_on_empty_page_is_empty() {
        let page = BinaryImage::blank(10, 10).unwrap();
        assert!(segment_lines_projection(&page, 3, 0).unwrap().is_empty());
    }

    #[test]
    fn projection_bridges_short_gaps() {
        let page = page_with_rows(20, 20, &[2, 3, 6, 7]);
        let lines = segment_lines_projection(&page, 4, 0).unwrap();
        assert_eq!(lines.len(), 1);
        assert_eq!((lines[0].y0, lines[0].y1), (2, 7));
    }

    #[test]
    fn projection_merges_crowded_lines() {
        let lines = vec![vec![vec![0, 14, 1, 14]], vec![vec![2, 12, 3, 12]]];
        let (clean, gt) = render(lines.clone(), 0.0, 0.0);
        let (crowded, _) = render(lines, 1.0, 0.0);
        assert_eq!(segment_lines_projection(&clean, 8, 0).unwrap().len(), gt.lines.len());
        let merged = segment_lines_projection(&crowded, 8, 0).unwrap();
        assert!(merged.len() < gt.lines.len(), "expected a merge failure, got {merged:?}");
    }

    #[test]
    fn hough_band_centers_on_a_single_row() {
        let page = page_with_rows(40, 20, &[10]);
        let lines = segment_lines_hough(&page, 8, 2.0, 5, 0.25).unwrap();
        assert_eq!(lines.len(), 1);
        assert_eq!((lines[0].y0, lines[0].y1), (6, 13));
        assert_eq!(lines[0].source, BranchId::Hough);
    }

    #[test]
    fn hough_on_empty_page_is_empty() {
        let page = BinaryImage::blank(30, 30).unwrap();
        assert!(segment_lines_hough(&page, 8, 2.0, 5, 0.25).unwrap().is_empty());
    }

    #[test]
    fn hough_recovers_clean_lines_with_good_overlap() {
        // Lines dense enough that middle-band rows dominate the accumulator.
        let words = |a: u32, b: u32| {
            vec![vec![a, 12, b, a, 15], vec![b, a, 13, b], vec![a, b, 14, a]]
        };
        let (page, gt) = render(vec![words(0, 1), words(2, 3), words(4, 5)], 0.0, 0.0);
        let avg = (gt.lines.iter().map(|l| l.bbox.height()).sum::<usize>() as f64
            / gt.lines.len() as f64)
            .round() as usize;
        let lines = segment_lines_hough(&page, avg, 2.0, 5, 0.3).unwrap();
        assert_eq!(lines.len(), gt.lines.len());
        assert_sorted_disjoint(&lines);
        for (seg, gt_line) in lines.iter().zip(&gt.lines) {
            let inter = (seg.y1.min(gt_line.bbox.y1) + 1).saturating_sub(seg.y0.max(gt_line.bbox.y0));
            let union = seg.y1.max(gt_line.bbox.y1) + 1 - seg.y0.min(gt_line.bbox.y0);
            let iou = inter as f64 / union as f64;
            assert!(iou >= 0.7, "band {seg:?} vs {:?}: IoU {iou:.3}", gt_line.bbox);
        }
    }

    #[test]
    fn interval_tree_separates_disjoint_extents() {
        let mut page = BinaryImage::blank(10, 20).unwrap();
        for y in 0..=5 {
            page.set(1, y, 1);
            page.set(2, y, 1);
        }
        for y in 10..=15 {
            page.set(5, y, 1);
            page.set(6, y, 1);
        }
        let lines = segment_lines_interval_tree(&page, 1).unwrap();
        assert_eq!(lines.len(), 2);
        assert_eq!((lines[0].y0, lines[0].y1), (0, 5));
        assert_eq!((lines[1].y0, lines[1].y1), (10, 15));
        assert_eq!(lines[0].source, BranchId::IntervalTree);
    }

    #[test]
    fn interval_tree_fuses_overlapping_extents() {
        let mut page = BinaryImage::blank(10, 20).unwrap();
        for y in 0..=5 {
            page.set(1, y, 1);
            page.set(2, y, 1);
        }
        for y in 4..=9 {
            page.set(7, y, 1);
            page.set(8, y, 1);
        }
        let lines = segment_lines_interval_tree(&page, 1).unwrap();
        assert_eq!(lines.len(), 1);
        assert_eq!((lines[0].y0, lines[0].y1), (0, 9));
    }

    #[test]
    fn interval_tree_splits_detached_modifiers() {
        let lines = vec![vec![vec![0, 12, 1, 14]], vec![vec![2, 13, 3, 15]]];
        let (page, gt) = render(lines, 0.6, 0.0);
        let found = segment_lines_interval_tree(&page, 1).unwrap();
        assert!(
            found.len() > gt.lines.len(),
            "modifiers should split off: {} vs gt {}",
            found.len(),
            gt.lines.len()
        );
        assert_sorted_disjoint(&found);
    }

    #[test]
    fn word_split_follows_gap_threshold() {
        let mut page = BinaryImage::blank(40, 8).unwrap();
        for x in 0..10 {
            for y in 0..8 {
                page.set(x, y, 1);
            }
        }
        for x in 22..32 {
            for y in 0..8 {
                page.set(x, y, 1);
            }
        }
        let line = LineSegment { y0: 0, y1: 7, source: BranchId::Projection };
        let words = segment_words(&page, 0, &line, 8, 0).unwrap();
        assert_eq!(words.len(), 2);
        assert_eq!((words[0].x0, words[0].x1), (0, 9));
        assert_eq!((words[1].x0, words[1].x1), (22, 31));
        let merged = segment_words(&page, 0, &line, 20, 0).unwrap();
        assert_eq!(merged.len(), 1);
        assert_eq!((merged[0].x0, merged[0].x1), (0, 31));
        assert!(merged[0].crop.ink_count() > 0);
    }

    #[test]
    fn word_segment_rejects_out_of_bounds_line() {
        let page = BinaryImage::blank(10, 10).unwrap();
        let line = LineSegment { y0: 5, y1: 12, source: BranchId::Projection };
        assert!(matches!(
            segment_words(&page, 0, &line, 3, 0),
            Err(Error::LineOutOfBounds { .. })
        ));
    }

    #[test]
    fn clean_page_words_match_ground_truth_boxes() {
        let words = |a: u32, b: u32, c: u32| vec![vec![a, 12, b], vec![c, 15], vec![b, c, a, 13]];
        let (page, gt) = render(vec![words(0, 1, 2), words(3, 4, 5)], 0.0, 0.0);
        let lines = segment_lines_projection(&page, 8, 0).unwrap();
        assert_eq!(lines.len(), gt.lines.len());
        for (li, (seg, gt_line)) in lines.iter().zip(&gt.lines).enumerate() {
            assert_eq!((seg.y0, seg.y1), (gt_line.bbox.y0, gt_line.bbox.y1));
            let words = segment_words(&page, li, seg, 5, 0).unwrap();
            assert_eq!(words.len(), gt_line.words.len());
            for (w, gw) in words.iter().zip(&gt_line.words) {
                assert_eq!(w.bbox(), gw.bbox, "word box mismatch on line {li}");
            }
        }
    }

    #[test]
    fn normalize_identity_when_already_target_height() {
        // Ring of ink: every border pixel has two inked neighbors, so the
        // supported bounds cover the full crop; the lone center pixel
        // passes through raw.
        let mut page = BinaryImage::blank(7, 5).unwrap();
        for x in 0..7 {
            page.set(x, 0, 1);
            page.set(x, 4, 1);
        }
        for y in 0..5 {
            page.set(0, y, 1);
            page.set(6, y, 1);
        }
        page.set(3, 2, 1);
        let line = LineSegment { y0: 0, y1: 4, source: BranchId::Projection };
        let word = &segment_words(&page, 0, &line, 3, 0).unwrap()[0];
        let feats = normalize_segment(word, 5).unwrap();
        assert_eq!(feats.len(), 7);
        assert_eq!(feats.dim(), 5);
        for (x, frame) in feats.frames().iter().enumerate() {
            let expect: Vec<f64> = (0..5).map(|y| page.get(x, y) as f64).collect();
            assert_eq!(frame, &expect);
        }
    }

    #[test]
    fn normalize_halves_a_double_height_all_ink_crop() {
        let th = 6;
        let mut page = BinaryImage::blank(4, 2 * th).unwrap();
        for x in 0..4 {
            for y in 0..2 * th {
                page.set(x, y, 1);
            }
        }
        let line = LineSegment { y0: 0, y1: 2 * th - 1, source: BranchId::Projection };
        let word = &segment_words(&page, 0, &line, 3, 0).unwrap()[0];
        let feats = normalize_segment(word, th).unwrap();
        assert_eq!(feats.len(), 2);
        assert!(feats.frames().iter().all(|f| f.iter().all(|&v| v == 1.0)));
    }

    #[test]
    fn normalize_matches_hand_computed_nearest_neighbor() {
        // 3-wide, 6-tall crop scaled to height 3: rows map 0->0, 1->2, 2->4
        // and width rounds to 2 with columns 0->0, 1->1. Ink forms two
        // short strokes so every bounds-defining pixel has two inked
        // neighbors and the supported bounds stay the full crop.
        let mut page = BinaryImage::blank(3, 6).unwrap();
        let ink = [(0, 0), (0, 1), (1, 1), (2, 1), (1, 2), (2, 4), (1, 5), (2, 5)];
        for (x, y) in ink {
            page.set(x, y, 1);
        }
        let line = LineSegment { y0: 0, y1: 5, source: BranchId::Projection };
        let word = &segment_words(&page, 0, &line, 3, 0).unwrap()[0];
        let feats = normalize_segment(word, 3).unwrap();
        assert_eq!(feats.len(), 2);
        // column 0 samples source column 0 at rows {0, 2, 4}
        assert_eq!(feats.frames()[0], vec![1.0, 0.0, 0.0]);
        // column 1 samples source column 1 at rows {0, 2, 4}
        assert_eq!(feats.frames()[1], vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn all_routines_yield_sorted_disjoint_bands_on_degraded_pages() {
        for seed in 0..4u64 {
            let gs = make_default_glyphset(1);
            let spec = PageSpec {
                lines: vec![
                    vec![vec![0, 14, 1], vec![2, 12]],
                    vec![vec![3, 13, 4], vec![5, 15]],
                    vec![vec![6, 7, 12]],
                ],
                interline_gap: 10,
                interword_gap: 10,
                modifier_crowding: 0.7,
                noise_density: 0.02,
                rng_seed: seed,
            };
            let (page, _) = syndata::render_page(&spec, &gs).unwrap();
            assert_sorted_disjoint(&segment_lines_projection(&page, 8, 20).unwrap());
            assert_sorted_disjoint(&segment_lines_hough(&page, 30, 2.0, 5, 0.25).unwrap());
            assert_sorted_disjoint(&segment_lines_interval_tree(&page, 4).unwrap());
        }
    }

    #[test]
    fn dump_lists_every_segment() {
        let page = page_with_rows(20, 10, &[2, 3, 4]);
        let lines = segment_lines_projection(&page, 3, 0).unwrap();
        let words = segment_words(&page, 0, &lines[0], 4, 0).unwrap();
        let dump = dump_segments(&lines, &words);
        assert_eq!(dump.lines().count(), lines.len() + words.len());
        assert!(dump.contains("projection"));
    }
}
