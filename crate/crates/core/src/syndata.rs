//! Synthetic binarized pages with exact ground truth.
//!
//! Pages are composed from an abstract glyph alphabet: middle-zone glyphs
//! sit on the baseline band, upper/lower-zone modifiers render above/below
//! the middle glyph they follow in the label sequence. A crowding knob
//! pushes zone modifiers toward the neighboring line until the interline
//! gap closes, and salt noise flips background pixels to ink. Both controls
//! reproduce the degradations that break real line segmenters.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::index::sample as index_sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::BinaryImage;

/// Vertical zone a glyph renders in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Zone {
    Middle,
    Upper,
    Lower,
}

/// One glyph bitmap with its zone.
#[derive(Debug, Clone)]
pub struct Glyph {
    pub zone: Zone,
    pub bitmap: BinaryImage,
}

/// The rendering alphabet: glyph labels are indices into `glyphs`.
#[derive(Debug, Clone)]
pub struct GlyphSet {
    glyphs: Vec<Glyph>,
}

/// A word as a label sequence. Zone modifiers follow the middle-zone glyph
/// they attach to.
pub type Word = Vec<u32>;

/// Full description of one page to render.
#[derive(Debug, Clone)]
pub struct PageSpec {
    pub lines: Vec<Vec<Word>>,
    pub interline_gap: usize,
    pub interword_gap: usize,
    /// 0.0 = modifiers stay with their line, 1.0 = they reach past the
    /// midpoint of the interline gap.
    pub modifier_crowding: f64,
    /// Fraction of background pixels flipped to ink.
    pub noise_density: f64,
    pub rng_seed: u64,
}

pub use crate::image::Box2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GtWord {
    pub bbox: Box2,
    pub labels: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GtLine {
    pub bbox: Box2,
    pub words: Vec<GtWord>,
}

/// Exact per-line, per-word geometry and labels of a rendered page.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    pub page_width: usize,
    pub page_height: usize,
    pub lines: Vec<GtLine>,
}

// Fixed glyph geometry. Middle glyphs anchor a 16-row band; 6x6 modifiers
// sit flush against it, their innermost row sharing a row with the band, so
// at rest every glyph of a line belongs to one connected vertical extent.
// Crowding pushes modifiers outward, opening a gap between zone and band.
pub const MIDDLE_W: usize = 12;
pub const MIDDLE_H: usize = 16;
pub const MOD_W: usize = 6;
pub const MOD_H: usize = 6;
/// Rows a resting modifier extends beyond the middle band (one row overlaps).
const ZONE_EXTENT: usize = MOD_H - 1;
/// Total height of one line cell (upper zone + middle band + lower zone).
pub const LINE_CELL_H: usize = 2 * ZONE_EXTENT + MIDDLE_H;
const GLYPH_SPACING: usize = 2;
const MARGIN: usize = 8;

impl GlyphSet {
    pub fn new(glyphs: Vec<Glyph>) -> Result<Self> {
        let middles = glyphs.iter().filter(|g| g.zone == Zone::Middle).count();
        if middles < 2 {
            return Err(Error::param("glyphset", "need at least 2 middle-zone glyphs"));
        }
        if glyphs.iter().any(|g| g.bitmap.ink_count() == 0) {
            return Err(Error::param("glyphset", "empty glyph bitmap"));
        }
        Ok(GlyphSet { glyphs })
    }

    pub fn len(&self) -> usize {
        self.glyphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.glyphs.is_empty()
    }

    pub fn get(&self, label: u32) -> Result<&Glyph> {
        self.glyphs.get(label as usize).ok_or(Error::UnknownLabel(label))
    }

    pub fn zone(&self, label: u32) -> Result<Zone> {
        Ok(self.get(label)?.zone)
    }

    pub fn labels_in_zone(&self, zone: Zone) -> Vec<u32> {
        (0..self.glyphs.len() as u32)
            .filter(|&l| self.glyphs[l as usize].zone == zone)
            .collect()
    }
}

/// Deterministic default alphabet: 12 middle glyphs (12x16), 2 upper and
/// 2 lower modifiers (6x6). Every pair of same-sized bitmaps is at least
/// 10 pixels apart in Hamming distance, every row and column of every
/// bitmap carries ink.
pub fn make_default_glyphset(rng_seed: u64) -> GlyphSet {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut glyphs = Vec::with_capacity(16);
    let mut middles: Vec<BinaryImage> = Vec::new();
    while middles.len() < 12 {
        let cand = random_bitmap(&mut rng, MIDDLE_W, MIDDLE_H, 0.45, 3, 2);
        if middles.iter().all(|m| hamming(m, &cand) >= 10) {
            middles.push(cand);
        }
    }
    let mut mods: Vec<BinaryImage> = Vec::new();
    while mods.len() < 4 {
        let cand = random_bitmap(&mut rng, MOD_W, MOD_H, 0.5, 2, 2);
        if mods.iter().all(|m| hamming(m, &cand) >= 10) {
            mods.push(cand);
        }
    }
    for bitmap in middles {
        glyphs.push(Glyph { zone: Zone::Middle, bitmap });
    }
    let mut mods = mods.into_iter();
    for _ in 0..2 {
        glyphs.push(Glyph { zone: Zone::Upper, bitmap: mods.next().unwrap() });
    }
    for _ in 0..2 {
        glyphs.push(Glyph { zone: Zone::Lower, bitmap: mods.next().unwrap() });
    }
    GlyphSet::new(glyphs).expect("default glyphset is well-formed")
}

/// Random w x h bitmap where every column has at least `min_col` ink pixels
/// and every row at least `min_row`.
fn random_bitmap(
    rng: &mut ChaCha8Rng,
    w: usize,
    h: usize,
    density: f64,
    min_col: usize,
    min_row: usize,
) -> BinaryImage {
    let mut img = BinaryImage::blank(w, h).unwrap();
    for y in 0..h {
        for x in 0..w {
            if rng.gen::<f64>() < density {
                img.set(x, y, 1);
            }
        }
    }
    for x in 0..w {
        let mut have: usize = (0..h).map(|y| img.get(x, y) as usize).sum();
        while have < min_col {
            let y = rng.gen_range(0..h);
            if img.get(x, y) == 0 {
                img.set(x, y, 1);
                have += 1;
            }
        }
    }
    for y in 0..h {
        let mut have: usize = (0..w).map(|x| img.get(x, y) as usize).sum();
        while have < min_row {
            let x = rng.gen_range(0..w);
            if img.get(x, y) == 0 {
                img.set(x, y, 1);
                have += 1;
            }
        }
    }
    img
}

pub fn hamming(a: &BinaryImage, b: &BinaryImage) -> usize {
    assert_eq!((a.width(), a.height()), (b.width(), b.height()));
    a.data().iter().zip(b.data()).filter(|(x, y)| x != y).count()
}

/// How far zone modifiers are pushed toward the neighboring line.
pub fn crowding_shift(crowding: f64, interline_gap: usize) -> usize {
    (crowding * (interline_gap as f64 / 2.0 + 1.0)).round() as usize
}

struct GlyphPlacement {
    label: u32,
    x: usize,
    y: usize,
}

/// Render a page and its exact ground truth.
///
/// Deterministic for a fixed `rng_seed`. Fails on labels missing from the
/// glyph set, on zone modifiers with no preceding middle glyph, and when
/// the computed canvas cannot hold a shifted modifier.
pub fn render_page(spec: &PageSpec, glyphs: &GlyphSet) -> Result<(BinaryImage, GroundTruth)> {
    if !(0.0..=1.0).contains(&spec.modifier_crowding) {
        return Err(Error::param("page.modifier_crowding", "must be in [0, 1]"));
    }
    if !(0.0..=1.0).contains(&spec.noise_density) {
        return Err(Error::param("page.noise_density", "must be in [0, 1]"));
    }
    let shift = crowding_shift(spec.modifier_crowding, spec.interline_gap);
    let margin_y = MARGIN + shift;

    // Plan all glyph placements line by line, word by word.
    let mut placements: Vec<GlyphPlacement> = Vec::new();
    let mut gt_lines: Vec<GtLine> = Vec::new();
    let mut max_right = 0usize;
    for (li, line) in spec.lines.iter().enumerate() {
        let cell_top = margin_y + li * (LINE_CELL_H + spec.interline_gap);
        let middle_top = cell_top + ZONE_EXTENT;
        let mut x = MARGIN;
        let mut gt_words: Vec<GtWord> = Vec::new();
        for word in line {
            let start_x = x;
            let mut word_box: Option<Box2> = None;
            let mut base_x: Option<usize> = None;
            for &label in word {
                let glyph = glyphs.get(label)?;
                let bbox = match glyph.zone {
                    Zone::Middle => {
                        if base_x.is_some() {
                            x += GLYPH_SPACING;
                        }
                        let gx = x;
                        base_x = Some(gx);
                        x += MIDDLE_W;
                        placements.push(GlyphPlacement { label, x: gx, y: middle_top });
                        Box2 {
                            x0: gx,
                            y0: middle_top,
                            x1: gx + MIDDLE_W - 1,
                            y1: middle_top + MIDDLE_H - 1,
                        }
                    }
                    Zone::Upper | Zone::Lower => {
                        let Some(bx) = base_x else {
                            return Err(Error::param(
                                "page.lines",
                                format!("word starts with zone modifier label {label}"),
                            ));
                        };
                        let mx = bx + (MIDDLE_W - MOD_W) / 2;
                        // At rest the modifier's innermost row lands on the
                        // band's edge row; each unit of shift opens one gap
                        // row between them.
                        let my = if glyph.zone == Zone::Upper {
                            let bottom = middle_top - shift;
                            bottom + 1 - MOD_H
                        } else {
                            middle_top + MIDDLE_H - 1 + shift
                        };
                        placements.push(GlyphPlacement { label, x: mx, y: my });
                        Box2 { x0: mx, y0: my, x1: mx + MOD_W - 1, y1: my + MOD_H - 1 }
                    }
                };
                word_box = Some(match word_box {
                    None => bbox,
                    Some(b) => b.union(&bbox),
                });
            }
            let bbox = word_box.ok_or_else(|| Error::param("page.lines", "empty word"))?;
            debug_assert_eq!(bbox.x0, start_x);
            gt_words.push(GtWord { bbox, labels: word.clone() });
            x += spec.interword_gap;
        }
        if gt_words.is_empty() {
            return Err(Error::param("page.lines", format!("line {li} has no words")));
        }
        max_right = max_right.max(x - spec.interword_gap);
        let line_box = gt_words[1..]
            .iter()
            .fold(gt_words[0].bbox, |acc, w| acc.union(&w.bbox));
        // Word boxes share the line's row band: word segmenters crop full
        // line-band slices, and the recognizer re-tightens to ink bounds.
        for w in &mut gt_words {
            w.bbox.y0 = line_box.y0;
            w.bbox.y1 = line_box.y1;
        }
        gt_lines.push(GtLine { bbox: line_box, words: gt_words });
    }
    if gt_lines.is_empty() {
        return Err(Error::param("page.lines", "page has no lines"));
    }

    let n_lines = spec.lines.len();
    let width = max_right + MARGIN;
    let height = 2 * margin_y + n_lines * LINE_CELL_H + (n_lines - 1) * spec.interline_gap;
    let mut page = BinaryImage::blank(width, height)?;

    for p in &placements {
        let bitmap = &glyphs.get(p.label)?.bitmap;
        if p.x + bitmap.width() > width || p.y + bitmap.height() > height {
            return Err(Error::PageOverflow {
                x: p.x as i64,
                y: p.y as i64,
                width,
                height,
            });
        }
        for gy in 0..bitmap.height() {
            for gx in 0..bitmap.width() {
                if bitmap.get(gx, gy) == 1 {
                    page.set(p.x + gx, p.y + gy, 1);
                }
            }
        }
    }

    if spec.noise_density > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
        let bg: Vec<usize> = (0..width * height)
            .filter(|&i| page.data()[i] == 0)
            .collect();
        let flips = (spec.noise_density * bg.len() as f64).round() as usize;
        for idx in index_sample(&mut rng, bg.len(), flips.min(bg.len())) {
            let i = bg[idx];
            page.set(i % width, i / width, 1);
        }
    }

    let gt = GroundTruth {
        page_width: width,
        page_height: height,
        lines: gt_lines,
    };
    Ok((page, gt))
}

impl GroundTruth {
    /// Labels of every word in reading order, word boundaries kept.
    pub fn word_label_seqs(&self) -> Vec<&[u32]> {
        self.lines
            .iter()
            .flat_map(|l| l.words.iter().map(|w| w.labels.as_slice()))
            .collect()
    }

    pub fn total_words(&self) -> usize {
        self.lines.iter().map(|l| l.words.len()).sum()
    }

    pub fn total_labels(&self) -> usize {
        self.lines
            .iter()
            .flat_map(|l| &l.words)
            .map(|w| w.labels.len())
            .sum()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "veritext-gt v1").unwrap();
        writeln!(out, "page {} {}", self.page_width, self.page_height).unwrap();
        for (li, line) in self.lines.iter().enumerate() {
            let b = line.bbox;
            writeln!(out, "line {} {} {} {} {}", li, b.x0, b.y0, b.x1, b.y1).unwrap();
        }
        for (li, line) in self.lines.iter().enumerate() {
            for (wi, word) in line.words.iter().enumerate() {
                let b = word.bbox;
                write!(out, "word {} {} {} {} {} {}", li, wi, b.x0, b.y0, b.x1, b.y1).unwrap();
                for l in &word.labels {
                    write!(out, " {l}").unwrap();
                }
                writeln!(out).unwrap();
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::GroundTruthFormat(msg);
        let mut it = text.lines();
        match it.next() {
            Some("veritext-gt v1") => {}
            other => return Err(bad(format!("bad header {other:?}"))),
        }
        let mut page_width = 0;
        let mut page_height = 0;
        let mut lines: Vec<GtLine> = Vec::new();
        for raw in it {
            let raw = raw.trim();
            if raw.is_empty() {
                continue;
            }
            let mut tok = raw.split_whitespace();
            match tok.next() {
                Some("page") => {
                    page_width = parse_num(tok.next(), "page width")?;
                    page_height = parse_num(tok.next(), "page height")?;
                }
                Some("line") => {
                    let li: usize = parse_num(tok.next(), "line index")?;
                    if li != lines.len() {
                        return Err(bad(format!("line records out of order at {li}")));
                    }
                    let bbox = parse_box(&mut tok)?;
                    lines.push(GtLine { bbox, words: Vec::new() });
                }
                Some("word") => {
                    let li: usize = parse_num(tok.next(), "word line index")?;
                    let wi: usize = parse_num(tok.next(), "word index")?;
                    let bbox = parse_box(&mut tok)?;
                    let labels: Vec<u32> = tok
                        .map(|t| t.parse::<u32>().map_err(|_| bad(format!("bad label {t:?}"))))
                        .collect::<Result<_>>()?;
                    if labels.is_empty() {
                        return Err(bad(format!("word {li}/{wi} has no labels")));
                    }
                    let line = lines
                        .get_mut(li)
                        .ok_or_else(|| bad(format!("word references missing line {li}")))?;
                    if wi != line.words.len() {
                        return Err(bad(format!("word records out of order at {li}/{wi}")));
                    }
                    line.words.push(GtWord { bbox, labels });
                }
                Some(other) => return Err(bad(format!("unknown record {other:?}"))),
                None => {}
            }
        }
        if lines.iter().any(|l| l.words.is_empty()) {
            return Err(bad("line without word records".into()));
        }
        Ok(GroundTruth { page_width, page_height, lines })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

fn parse_num(tok: Option<&str>, what: &str) -> Result<usize> {
    tok.and_then(|t| t.parse::<usize>().ok())
        .ok_or_else(|| Error::GroundTruthFormat(format!("bad {what}")))
}

fn parse_box<'a>(tok: &mut impl Iterator<Item = &'a str>) -> Result<Box2> {
    let x0 = parse_num(tok.next(), "box x0")?;
    let y0 = parse_num(tok.next(), "box y0")?;
    let x1 = parse_num(tok.next(), "box x1")?;
    let y1 = parse_num(tok.next(), "box y1")?;
    if x1 < x0 || y1 < y0 {
        return Err(Error::GroundTruthFormat("inverted box".into()));
    }
    Ok(Box2 { x0, y0, x1, y1 })
}

// ---------------------------------------------------------------------------
// Random vocabulary / page sampling used by dataset synthesis
// ---------------------------------------------------------------------------

/// Sample a closed vocabulary of distinct words. Each word has
/// `len_range` middle glyphs; each middle glyph carries an upper or lower
/// modifier with probability `p_modifier`.
pub fn sample_vocabulary(
    rng: &mut ChaCha8Rng,
    glyphs: &GlyphSet,
    n_words: usize,
    len_range: (usize, usize),
    p_modifier: f64,
) -> Vec<Word> {
    let middles = glyphs.labels_in_zone(Zone::Middle);
    let uppers = glyphs.labels_in_zone(Zone::Upper);
    let lowers = glyphs.labels_in_zone(Zone::Lower);
    let mut vocab: Vec<Word> = Vec::with_capacity(n_words);
    while vocab.len() < n_words {
        let len = rng.gen_range(len_range.0..=len_range.1);
        let mut word: Word = Vec::new();
        for _ in 0..len {
            word.push(middles[rng.gen_range(0..middles.len())]);
            if rng.gen::<f64>() < p_modifier {
                let pool = if rng.gen::<bool>() && !uppers.is_empty() {
                    &uppers
                } else if !lowers.is_empty() {
                    &lowers
                } else {
                    &uppers
                };
                if !pool.is_empty() {
                    word.push(pool[rng.gen_range(0..pool.len())]);
                }
            }
        }
        if !vocab.contains(&word) {
            vocab.push(word);
        }
    }
    vocab
}

/// Draw page line/word structure from a vocabulary.
pub fn sample_page_lines(
    rng: &mut ChaCha8Rng,
    vocab: &[Word],
    lines_range: (usize, usize),
    words_per_line_range: (usize, usize),
) -> Vec<Vec<Word>> {
    let n_lines = rng.gen_range(lines_range.0..=lines_range.1);
    (0..n_lines)
        .map(|_| {
            let n_words = rng.gen_range(words_per_line_range.0..=words_per_line_range.1);
            (0..n_words)
                .map(|_| vocab[rng.gen_range(0..vocab.len())].clone())
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::horizontal_projection;

    fn spec(lines: Vec<Vec<Word>>, crowding: f64, noise: f64) -> PageSpec {
        PageSpec {
            lines,
            interline_gap: 10,
            interword_gap: 10,
            modifier_crowding: crowding,
            noise_density: noise,
            rng_seed: 7,
        }
    }

    /// Count maximal nonzero bands of a projection profile.
    fn band_count(profile: &[usize]) -> usize {
        band_count_bridged(profile, 1)
    }

    /// Count nonzero bands, merging bands separated by fewer than
    /// `min_gap` zero rows (what a projection line segmenter does).
    fn band_count_bridged(profile: &[usize], min_gap: usize) -> usize {
        let mut bands = 0;
        let mut zero_run = usize::MAX;
        for &v in profile {
            if v > 0 {
                if zero_run >= min_gap {
                    bands += 1;
                }
                zero_run = 0;
            } else {
                zero_run = zero_run.saturating_add(1);
            }
        }
        bands
    }

    #[test]
    fn default_glyphset_is_deterministic() {
        let a = make_default_glyphset(0);
        let b = make_default_glyphset(0);
        assert_eq!(a.len(), b.len());
        for l in 0..a.len() as u32 {
            assert_eq!(a.get(l).unwrap().bitmap, b.get(l).unwrap().bitmap);
            assert_eq!(a.get(l).unwrap().zone, b.get(l).unwrap().zone);
        }
    }

    #[test]
    fn default_glyphset_zone_counts_and_distances() {
        for seed in [0u64, 1, 42, 9000] {
            let gs = make_default_glyphset(seed);
            assert!(gs.labels_in_zone(Zone::Middle).len() >= 12);
            assert!(gs.labels_in_zone(Zone::Upper).len() >= 2);
            assert!(gs.labels_in_zone(Zone::Lower).len() >= 2);
            let all: Vec<_> = (0..gs.len() as u32).map(|l| gs.get(l).unwrap()).collect();
            for i in 0..all.len() {
                for j in i + 1..all.len() {
                    let (a, b) = (&all[i].bitmap, &all[j].bitmap);
                    if (a.width(), a.height()) == (b.width(), b.height()) {
                        assert!(hamming(a, b) >= 10, "glyphs {i},{j} too close (seed {seed})");
                    }
                }
            }
        }
    }

    #[test]
    fn one_line_one_word_is_one_band() {
        let gs = make_default_glyphset(1);
        let (page, gt) = render_page(&spec(vec![vec![vec![0, 1]]], 0.0, 0.0), &gs).unwrap();
        assert_eq!(band_count(&horizontal_projection(&page)), 1);
        assert_eq!(gt.lines.len(), 1);
        assert_eq!(gt.lines[0].words.len(), 1);
    }

    #[test]
    fn two_lines_leave_a_wide_zero_band() {
        let gs = make_default_glyphset(1);
        let lines = vec![vec![vec![0, 1]], vec![vec![2, 3]]];
        let (page, _) = render_page(&spec(lines, 0.0, 0.0), &gs).unwrap();
        let proj = horizontal_projection(&page);
        assert_eq!(band_count(&proj), 2);
        let longest_zero_run = proj
            .split(|&v| v > 0)
            .map(|run| run.len())
            .max()
            .unwrap_or(0);
        assert!(longest_zero_run >= 10, "zero run {longest_zero_run}");
    }

    #[test]
    fn full_crowding_merges_the_projection_bands() {
        let gs = make_default_glyphset(1);
        // lower modifier (label 14) on line 1, upper modifier (label 12) on line 2
        let lines = vec![vec![vec![0, 14, 1, 14]], vec![vec![2, 12, 3, 12]]];
        let clean = render_page(&spec(lines.clone(), 0.0, 0.0), &gs).unwrap().0;
        let crowded = render_page(&spec(lines, 1.0, 0.0), &gs).unwrap().0;
        // A line segmenter bridges gaps shorter than its minimum; the zone
        // gap row (plus crowding travel) must stay below it while the true
        // interline gap stays above it on the clean page only.
        assert_eq!(band_count_bridged(&horizontal_projection(&clean), 8), 2);
        assert_eq!(band_count_bridged(&horizontal_projection(&crowded), 8), 1);
    }

    #[test]
    fn rendering_is_deterministic() {
        let gs = make_default_glyphset(3);
        let s = spec(vec![vec![vec![0, 12], vec![5]], vec![vec![7, 15, 2]]], 0.4, 0.05);
        let (p1, g1) = render_page(&s, &gs).unwrap();
        let (p2, g2) = render_page(&s, &gs).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(g1, g2);
    }

    #[test]
    fn noise_flips_expected_fraction() {
        let gs = make_default_glyphset(3);
        let s0 = spec(vec![vec![vec![0, 1, 2]]], 0.0, 0.0);
        let mut s1 = s0.clone();
        s1.noise_density = 0.03;
        let clean = render_page(&s0, &gs).unwrap().0;
        let noisy = render_page(&s1, &gs).unwrap().0;
        let bg = clean.width() * clean.height() - clean.ink_count();
        let flipped = noisy.ink_count() - clean.ink_count();
        assert_eq!(flipped, (0.03 * bg as f64).round() as usize);
    }

    #[test]
    fn unknown_label_and_leading_modifier_fail() {
        let gs = make_default_glyphset(0);
        assert!(matches!(
            render_page(&spec(vec![vec![vec![99]]], 0.0, 0.0), &gs),
            Err(Error::UnknownLabel(99))
        ));
        let err = render_page(&spec(vec![vec![vec![12, 0]]], 0.0, 0.0), &gs).unwrap_err();
        assert!(err.to_string().contains("zone modifier"));
    }

    #[test]
    fn ground_truth_nests_and_survives_round_trip() {
        let gs = make_default_glyphset(5);
        let s = spec(vec![vec![vec![0, 12, 1], vec![4, 15]], vec![vec![9, 3]]], 0.3, 0.01);
        let (_, gt) = render_page(&s, &gs).unwrap();
        for line in &gt.lines {
            for word in &line.words {
                assert_eq!(line.bbox.union(&word.bbox), line.bbox, "word box escapes line box");
            }
            assert!(line.bbox.x1 < gt.page_width && line.bbox.y1 < gt.page_height);
        }
        let parsed = GroundTruth::from_text(&gt.to_text()).unwrap();
        assert_eq!(parsed, gt);
    }

    #[test]
    fn ground_truth_parser_rejects_garbage() {
        assert!(GroundTruth::from_text("nope").is_err());
        let text = "veritext-gt v1\npage 10 10\nline 0 0 0 5 5\nword 0 0 0 0 5 5\n";
        // word with no labels
        assert!(GroundTruth::from_text(text).is_err());
    }

    #[test]
    fn vocabulary_is_distinct_and_well_formed() {
        let gs = make_default_glyphset(2);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let vocab = sample_vocabulary(&mut rng, &gs, 30, (2, 4), 0.4);
        assert_eq!(vocab.len(), 30);
        for (i, w) in vocab.iter().enumerate() {
            assert!(gs.zone(w[0]).unwrap() == Zone::Middle);
            for (j, other) in vocab.iter().enumerate() {
                assert!(i == j || w != other);
            }
        }
    }
}
