//! Multi-hypothesis page recognition.
//!
//! Each segmentation routine yields one branch: its lines, words, decoded
//! label sequences, and n-gram scores. Words are then aligned across
//! branches by box overlap into per-word groups, and a best-first pass
//! picks the highest-scoring candidate per group. A branch that merged
//! two words (or split one in half) still competes: merged words attach
//! to both groups with their labels split at the anchor boundary, split
//! words merge into one slot.

use std::collections::BinaryHeap;

use crate::ctc;
use crate::error::{Error, Result};
use crate::image::{BinaryImage, Box2};
use crate::langmodel::{NGramModel, WordScore};
use crate::network::DeepBlstm;
use crate::segment::{
    normalize_segment, segment_lines_hough, segment_lines_interval_tree,
    segment_lines_projection, segment_words, BranchId, LineSegment,
};

/// One recognized word inside a branch.
#[derive(Debug, Clone, PartialEq)]
pub struct RecognizedWord {
    pub bbox: Box2,
    pub labels: Vec<u32>,
    pub score: WordScore,
}

/// The full output of one segmentation routine over a page: lines top to
/// bottom, words left to right. A word that failed recognition stays as
/// an empty-label slot so the page never aborts.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisBranch {
    pub source: BranchId,
    pub lines: Vec<Vec<RecognizedWord>>,
}

impl HypothesisBranch {
    pub fn word_count(&self) -> usize {
        self.lines.iter().map(|l| l.len()).sum()
    }
}

/// One aligned word position: the spine word's box plus, per input
/// branch, the candidate that overlaps it (if any).
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentGroup {
    /// Index of the spine line this group sits on.
    pub line_index: usize,
    pub anchor: Box2,
    /// Parallel to the branch list passed to [`align_words`].
    pub slots: Vec<Option<Candidate>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub branch: BranchId,
    pub bbox: Box2,
    pub labels: Vec<u32>,
}

/// Final per-word pick.
#[derive(Debug, Clone, PartialEq)]
pub struct ChosenWord {
    pub labels: Vec<u32>,
    pub branch: BranchId,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PageTranscript {
    pub lines: Vec<Vec<ChosenWord>>,
    pub page_score: f64,
}

/// Everything the recognition pipeline needs beyond the trained
/// artifacts. Defaults suit the synthetic page geometry.
#[derive(Debug, Clone)]
pub struct RecognizeConfig {
    /// Background rows needed to split projection lines.
    pub proj_min_gap: usize,
    /// Row ink count that must be exceeded to call a row inked.
    pub proj_min_ink: usize,
    pub avg_line_height: usize,
    pub hough_theta_tolerance: f64,
    pub hough_bins: usize,
    pub hough_peak_ratio: f64,
    pub it_min_component_pixels: usize,
    /// Background columns needed to split words within a line.
    pub word_gap_threshold: usize,
    /// Column ink count that must be exceeded to call a column inked.
    pub word_min_ink: usize,
    /// Feature frame height; must equal the network's input size.
    pub target_height: usize,
    /// Mismatch penalty for word scoring.
    pub lambda: f64,
    /// Minimum box IoU for a word to join a group.
    pub overlap_threshold: f64,
    /// Alignment search reach around the running cursor, in words.
    pub window: usize,
    pub branch_priority: [BranchId; 3],
}

impl Default for RecognizeConfig {
    fn default() -> Self {
        RecognizeConfig {
            proj_min_gap: 8,
            proj_min_ink: 2,
            avg_line_height: 26,
            hough_theta_tolerance: 2.0,
            hough_bins: 5,
            hough_peak_ratio: 0.3,
            it_min_component_pixels: 4,
            word_gap_threshold: 5,
            word_min_ink: 0,
            target_height: 16,
            lambda: 1.0,
            overlap_threshold: 0.3,
            window: 1,
            branch_priority: BranchId::ALL,
        }
    }
}

impl RecognizeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.proj_min_gap < 1 {
            return Err(Error::param("recognize.proj_min_gap", "must be >= 1"));
        }
        if self.avg_line_height < 1 {
            return Err(Error::param("recognize.avg_line_height", "must be >= 1"));
        }
        if !(0.0..90.0).contains(&self.hough_theta_tolerance) {
            return Err(Error::param("recognize.hough_theta_tolerance", "must be in [0, 90)"));
        }
        if self.hough_bins < 1 {
            return Err(Error::param("recognize.hough_bins", "must be >= 1"));
        }
        if !(self.hough_peak_ratio > 0.0 && self.hough_peak_ratio <= 1.0) {
            return Err(Error::param("recognize.hough_peak_ratio", "must be in (0, 1]"));
        }
        if self.word_gap_threshold < 1 {
            return Err(Error::param("recognize.word_gap_threshold", "must be >= 1"));
        }
        if self.target_height < 1 {
            return Err(Error::param("recognize.target_height", "must be >= 1"));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::param("recognize.lambda", "must be finite and >= 0"));
        }
        if !(self.overlap_threshold > 0.0 && self.overlap_threshold <= 1.0) {
            return Err(Error::param("recognize.overlap_threshold", "must be in (0, 1]"));
        }
        if self.window < 1 {
            return Err(Error::param("recognize.window", "must be >= 1"));
        }
        let mut seen = [false; 3];
        for b in self.branch_priority {
            seen[b as usize] = true;
        }
        if seen != [true; 3] {
            return Err(Error::param(
                "recognize.branch_priority",
                "must list each branch exactly once",
            ));
        }
        Ok(())
    }
}

fn segment_lines_for(
    page: &BinaryImage,
    source: BranchId,
    cfg: &RecognizeConfig,
) -> Result<Vec<LineSegment>> {
    match source {
        BranchId::Projection => {
            segment_lines_projection(page, cfg.proj_min_gap, cfg.proj_min_ink)
        }
        BranchId::Hough => segment_lines_hough(
            page,
            cfg.avg_line_height,
            cfg.hough_theta_tolerance,
            cfg.hough_bins,
            cfg.hough_peak_ratio,
        ),
        BranchId::IntervalTree => {
            segment_lines_interval_tree(page, cfg.it_min_component_pixels)
        }
    }
}

/// Run one routine end to end: segment, recognize, score. Word-level
/// failures become empty-label words.
pub fn build_branch(
    page: &BinaryImage,
    source: BranchId,
    net: &DeepBlstm,
    lm: &NGramModel,
    cfg: &RecognizeConfig,
) -> Result<HypothesisBranch> {
    let lines = segment_lines_for(page, source, cfg)?;
    let mut out = Vec::with_capacity(lines.len());
    for (li, line) in lines.iter().enumerate() {
        let words = segment_words(page, li, line, cfg.word_gap_threshold, cfg.word_min_ink)?;
        let mut rec = Vec::with_capacity(words.len());
        for word in &words {
            let bbox = word.bbox();
            let recognized = normalize_segment(word, cfg.target_height)
                .and_then(|feats| net.forward(&feats))
                .map(|(lattice, _)| {
                    let labels = ctc::best_path_decode(&lattice);
                    let score = lm.word_score(&labels, cfg.lambda);
                    RecognizedWord { bbox, labels, score }
                });
            rec.push(recognized.unwrap_or(RecognizedWord {
                bbox,
                labels: Vec::new(),
                score: WordScore::zero(),
            }));
        }
        out.push(rec);
    }
    Ok(HypothesisBranch { source, lines: out })
}

/// All three routines in fixed order: projection, Hough, interval tree.
pub fn build_branches(
    page: &BinaryImage,
    net: &DeepBlstm,
    lm: &NGramModel,
    cfg: &RecognizeConfig,
) -> Result<Vec<HypothesisBranch>> {
    BranchId::ALL
        .iter()
        .map(|&source| build_branch(page, source, net, lm, cfg))
        .collect()
}

/// A branch word flattened into page reading order. Line membership is
/// implicit: candidates are gated by box overlap, so cross-line words
/// never pair up.
struct FlatWord {
    bbox: Box2,
    labels: Vec<u32>,
}

fn flatten_branch(branch: &HypothesisBranch) -> Vec<FlatWord> {
    let mut out = Vec::with_capacity(branch.word_count());
    for line in &branch.lines {
        for w in line {
            out.push(FlatWord { bbox: w.bbox, labels: w.labels.clone() });
        }
    }
    out
}

/// Split a word's labels across the groups it attached to, cutting at
/// each pair of anchors' boundary column in proportion to box width.
fn split_labels(word: &FlatWord, anchors: &[Box2]) -> Vec<Vec<u32>> {
    let l = word.labels.len();
    let width = word.bbox.width() as f64;
    let mut cuts = Vec::with_capacity(anchors.len() + 1);
    cuts.push(0usize);
    for pair in anchors.windows(2) {
        let boundary = (pair[0].x1 as f64 + pair[1].x0 as f64) / 2.0;
        let frac = ((boundary - word.bbox.x0 as f64) / width).clamp(0.0, 1.0);
        let cut = (frac * l as f64).round() as usize;
        cuts.push(cut.max(*cuts.last().unwrap()).min(l));
    }
    cuts.push(l);
    cuts.windows(2).map(|c| word.labels[c[0]..c[1]].to_vec()).collect()
}

/// Align every branch's words against the spine (the branch with the
/// most words). Each spine word anchors one group; other branches
/// contribute their best-overlapping word near the running cursor.
/// A branch word overlapping several anchors joins each of their groups
/// with its labels split at the boundary; several branch words covering
/// one anchor merge into a single slot.
pub fn align_words(
    branches: &[HypothesisBranch],
    overlap_threshold: f64,
    window: usize,
) -> Result<Vec<AlignmentGroup>> {
    if !(overlap_threshold > 0.0 && overlap_threshold <= 1.0) {
        return Err(Error::param("recognize.overlap_threshold", "must be in (0, 1]"));
    }
    if window < 1 {
        return Err(Error::param("recognize.window", "must be >= 1"));
    }
    if branches.iter().all(|b| b.word_count() == 0) {
        return Err(Error::EmptyInput("alignment branches"));
    }
    let spine_idx = (0..branches.len())
        .max_by_key(|&i| branches[i].word_count())
        .unwrap();

    let mut groups: Vec<AlignmentGroup> = Vec::new();
    for (li, line) in branches[spine_idx].lines.iter().enumerate() {
        for w in line {
            let mut slots = vec![None; branches.len()];
            slots[spine_idx] = Some(Candidate {
                branch: branches[spine_idx].source,
                bbox: w.bbox,
                labels: w.labels.clone(),
            });
            groups.push(AlignmentGroup { line_index: li, anchor: w.bbox, slots });
        }
    }

    for (bi, branch) in branches.iter().enumerate() {
        if bi == spine_idx {
            continue;
        }
        let words = flatten_branch(branch);
        if words.is_empty() {
            continue;
        }
        // attachments[j] = groups word j joined, in order.
        let mut attachments: Vec<Vec<usize>> = vec![Vec::new(); words.len()];
        let mut cursor = 0usize;
        for gi in 0..groups.len() {
            let anchor = groups[gi].anchor;
            let lo = cursor.saturating_sub(window);
            let hi = (cursor + window).min(words.len() - 1);
            if lo > hi {
                continue;
            }
            let iou = |j: usize| words[j].bbox.iou(&anchor);
            let mut best: Option<usize> = None;
            for j in lo..=hi {
                if iou(j) >= overlap_threshold
                    && best.map_or(true, |b| iou(j) > iou(b))
                {
                    best = Some(j);
                }
            }
            let Some(seed) = best else { continue };
            // Pull in unattached neighbors that also sit on this anchor
            // (the spine split what this branch kept whole is the other
            // case; here this branch split what the spine kept whole).
            let mut first = seed;
            while first > lo && attachments[first - 1].is_empty() {
                let j = first - 1;
                let better_here = gi == 0 || iou(j) > words[j].bbox.iou(&groups[gi - 1].anchor);
                if iou(j) >= overlap_threshold && better_here {
                    first = j;
                } else {
                    break;
                }
            }
            let mut last = seed;
            while last < hi && attachments[last + 1].is_empty() {
                let j = last + 1;
                let better_here = gi + 1 == groups.len()
                    || iou(j) > words[j].bbox.iou(&groups[gi + 1].anchor);
                if iou(j) >= overlap_threshold && better_here {
                    last = j;
                } else {
                    break;
                }
            }
            for j in first..=last {
                attachments[j].push(gi);
            }
            cursor = last + 1;
        }

        // Resolve attachments into slots: multi-attached words are split
        // across their groups, runs of words in one group concatenate.
        let mut parts: Vec<Vec<(usize, Vec<u32>)>> = Vec::with_capacity(words.len());
        for (j, gis) in attachments.iter().enumerate() {
            if gis.is_empty() {
                parts.push(Vec::new());
                continue;
            }
            let anchors: Vec<Box2> = gis.iter().map(|&g| groups[g].anchor).collect();
            let pieces = split_labels(&words[j], &anchors);
            parts.push(gis.iter().cloned().zip(pieces).collect());
        }
        for gi in 0..groups.len() {
            let mut labels: Vec<u32> = Vec::new();
            let mut bbox: Option<Box2> = None;
            for (j, part) in parts.iter().enumerate() {
                for (g, piece) in part {
                    if *g == gi {
                        labels.extend_from_slice(piece);
                        let b = words[j].bbox;
                        bbox = Some(bbox.map_or(b, |acc| acc.union(&b)));
                    }
                }
            }
            if let Some(bbox) = bbox {
                groups[gi].slots[bi] = Some(Candidate { branch: branch.source, bbox, labels });
            }
        }
    }
    Ok(groups)
}

/// Queue entry ordering: higher score first, then lower group index for
/// determinism.
#[derive(PartialEq)]
struct QueueKey {
    score: f64,
    index: usize,
}

impl Eq for QueueKey {}

impl Ord for QueueKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.score
            .total_cmp(&other.score)
            .then(other.index.cmp(&self.index))
    }
}

impl PartialOrd for QueueKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Pick one candidate per group: process groups best-score-first off a
/// priority queue, and within a group take the candidate with maximal
/// word score. Ties prefer a nonempty decode, then the configured branch
/// priority. The transcript keeps spine reading order regardless of
/// visit order; its page score sums the winners.
pub fn best_first_select(
    groups: &[AlignmentGroup],
    lm: &NGramModel,
    lambda: f64,
    branch_priority: &[BranchId; 3],
) -> PageTranscript {
    let rank = |b: BranchId| {
        branch_priority.iter().position(|&p| p == b).unwrap_or(branch_priority.len())
    };
    let mut scored: Vec<Vec<(f64, &Candidate)>> = groups
        .iter()
        .map(|g| {
            g.slots
                .iter()
                .flatten()
                .map(|c| (lm.word_score(&c.labels, lambda).score, c))
                .collect()
        })
        .collect();
    for cands in &mut scored {
        // Winner sort: score desc, nonempty before empty, priority asc.
        cands.sort_by(|a, b| {
            b.0.total_cmp(&a.0)
                .then_with(|| a.1.labels.is_empty().cmp(&b.1.labels.is_empty()))
                .then_with(|| rank(a.1.branch).cmp(&rank(b.1.branch)))
        });
    }

    let mut heap: BinaryHeap<QueueKey> = (0..groups.len())
        .map(|i| QueueKey {
            score: scored[i].first().map_or(0.0, |c| c.0),
            index: i,
        })
        .collect();

    let mut winners: Vec<Option<ChosenWord>> = vec![None; groups.len()];
    let mut page_score = 0.0;
    while let Some(QueueKey { index, .. }) = heap.pop() {
        let chosen = match scored[index].first() {
            Some(&(score, cand)) => ChosenWord {
                labels: cand.labels.clone(),
                branch: cand.branch,
                score,
            },
            None => ChosenWord { labels: Vec::new(), branch: branch_priority[0], score: 0.0 },
        };
        page_score += chosen.score;
        winners[index] = Some(chosen);
    }

    let mut lines: Vec<Vec<ChosenWord>> = Vec::new();
    let mut current_line: Option<usize> = None;
    for (g, w) in groups.iter().zip(winners) {
        if current_line != Some(g.line_index) {
            lines.push(Vec::new());
            current_line = Some(g.line_index);
        }
        lines.last_mut().unwrap().push(w.unwrap());
    }
    PageTranscript { lines, page_score }
}

/// A single branch taken verbatim, bypassing alignment.
pub fn branch_to_transcript(branch: &HypothesisBranch) -> PageTranscript {
    let mut page_score = 0.0;
    let lines = branch
        .lines
        .iter()
        .map(|line| {
            line.iter()
                .map(|w| {
                    page_score += w.score.score;
                    ChosenWord {
                        labels: w.labels.clone(),
                        branch: branch.source,
                        score: w.score.score,
                    }
                })
                .collect()
        })
        .collect();
    PageTranscript { lines, page_score }
}

fn check_artifacts(net: &DeepBlstm, lm: &NGramModel, cfg: &RecognizeConfig) -> Result<()> {
    cfg.validate()?;
    if net.input_size() != cfg.target_height {
        return Err(Error::param(
            "recognize.target_height",
            format!("network expects {}-pixel frames", net.input_size()),
        ));
    }
    if lm.alphabet() != net.labels() {
        return Err(Error::param(
            "recognize.alphabet",
            format!(
                "language model covers {} labels but the network emits {}",
                lm.alphabet(),
                net.labels()
            ),
        ));
    }
    Ok(())
}

/// The full fused pipeline for one page.
pub fn recognize_page(
    page: &BinaryImage,
    net: &DeepBlstm,
    lm: &NGramModel,
    cfg: &RecognizeConfig,
) -> Result<PageTranscript> {
    check_artifacts(net, lm, cfg)?;
    let branches = build_branches(page, net, lm, cfg)?;
    if branches.iter().all(|b| b.word_count() == 0) {
        return Ok(PageTranscript::default());
    }
    let groups = align_words(&branches, cfg.overlap_threshold, cfg.window)?;
    Ok(best_first_select(&groups, lm, cfg.lambda, &cfg.branch_priority))
}

/// One routine end to end, skipping fusion entirely.
pub fn recognize_page_single(
    page: &BinaryImage,
    source: BranchId,
    net: &DeepBlstm,
    lm: &NGramModel,
    cfg: &RecognizeConfig,
) -> Result<PageTranscript> {
    check_artifacts(net, lm, cfg)?;
    let branch = build_branch(page, source, net, lm, cfg)?;
    Ok(branch_to_transcript(&branch))
}

/// Label-to-codepoint rendering table for transcript text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    chars: Vec<char>,
}

/// Codepoints assigned to labels 0.. when no custom charset is given.
pub const DEFAULT_CHARSET: &str =
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";

impl LabelMap {
    pub fn new(charset: &str) -> Result<LabelMap> {
        let chars: Vec<char> = charset.chars().collect();
        if chars.is_empty() {
            return Err(Error::param("alphabet.charset", "must be nonempty"));
        }
        if chars.iter().any(|c| c.is_whitespace()) {
            return Err(Error::param("alphabet.charset", "whitespace separates words"));
        }
        let mut sorted = chars.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != chars.len() {
            return Err(Error::param("alphabet.charset", "duplicate codepoint"));
        }
        Ok(LabelMap { chars })
    }

    /// The first `alphabet` codepoints of [`DEFAULT_CHARSET`].
    pub fn default_for(alphabet: usize) -> Result<LabelMap> {
        let chars: Vec<char> = DEFAULT_CHARSET.chars().take(alphabet).collect();
        if chars.len() < alphabet {
            return Err(Error::param(
                "alphabet.charset",
                format!("default charset covers only {} labels", DEFAULT_CHARSET.chars().count()),
            ));
        }
        LabelMap::new(&chars.into_iter().collect::<String>())
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn render_word(&self, labels: &[u32]) -> Result<String> {
        labels
            .iter()
            .map(|&l| {
                self.chars
                    .get(l as usize)
                    .copied()
                    .ok_or(Error::LabelOutOfRange { label: l, classes: self.chars.len() })
            })
            .collect()
    }

    pub fn parse_word(&self, word: &str) -> Result<Vec<u32>> {
        word.chars()
            .map(|c| {
                self.chars
                    .iter()
                    .position(|&k| k == c)
                    .map(|p| p as u32)
                    .ok_or_else(||

                        Error::GroundTruthFormat(format!("codepoint {c:?} not in the alphabet")))
            })
            .collect()
    }
}

impl PageTranscript {
    /// Nonempty words per line, flattened page-wide in reading order.
    pub fn word_label_seqs(&self) -> Vec<Vec<u32>> {
        self.lines
            .iter()
            .flat_map(|l| l.iter().filter(|w| !w.labels.is_empty()).map(|w| w.labels.clone()))
            .collect()
    }

    /// Render as text: one line per detected line, words space-separated.
    /// Empty words vanish; lines left empty vanish with them.
    pub fn to_text(&self, map: &LabelMap) -> Result<String> {
        let mut out = String::new();
        for line in &self.lines {
            let words: Vec<String> = line
                .iter()
                .filter(|w| !w.labels.is_empty())
                .map(|w| map.render_word(&w.labels))
                .collect::<Result<_>>()?;
            if !words.is_empty() {
                out.push_str(&words.join(" "));
                out.push('\n');
            }
        }
        Ok(out)
    }

    /// Structured sidecar: per rendered word, its line/word index, the
    /// winning branch, and the score. Indices match [`Self::to_text`].
    pub fn sidecar(&self) -> String {
        let mut out = String::new();
        out.push_str("veritext-transcript v1\n");
        out.push_str(&format!("page_score {}\n", self.page_score));
        let mut li = 0usize;
        for line in &self.lines {
            let kept: Vec<&ChosenWord> = line.iter().filter(|w| !w.labels.is_empty()).collect();
            if kept.is_empty() {
                continue;
            }
            for (wi, w) in kept.iter().enumerate() {
                let labels: Vec<String> = w.labels.iter().map(|l| l.to_string()).collect();
                out.push_str(&format!(
                    "word {li} {wi} {} {} {}\n",
                    w.branch.name(),
                    w.score,
                    labels.join(" ")
                ));
            }
            li += 1;
        }
        out
    }

    /// Parse rendered text back into a transcript. Branch tags and
    /// scores are not recoverable from the text form and default to
    /// projection / zero.
    pub fn from_text(text: &str, map: &LabelMap) -> Result<PageTranscript> {
        let mut lines = Vec::new();
        for line in text.lines() {
            if line.trim().is_empty() {
                continue;
            }
            let words = line
                .split_whitespace()
                .map(|w| {
                    Ok(ChosenWord {
                        labels: map.parse_word(w)?,
                        branch: BranchId::Projection,
                        score: 0.0,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            lines.push(words);
        }
        Ok(PageTranscript { lines, page_score: 0.0 })
    }
}
