//! Command-line driver: synth, train, build-lm, recognize, evaluate.
//!
//! Each command is a plain function over a [`PipelineConfig`] so the whole
//! pipeline is scriptable from tests; the clap layer only resolves flags
//! (which override config values) and prints summaries. All randomness is
//! seeded, so rerunning a command with the same config reproduces its
//! output byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{PipelineConfig, RecognizeSection};
use crate::error::{Error, Result};
use crate::hypothesis::{recognize_page, recognize_page_single, LabelMap, PageTranscript};
use crate::image::{load_image, sauvola_binarize, save_pbm, BinaryImage, LoadedImage};
use crate::langmodel::{build_ngrams, NGramModel};
use crate::metrics::{evaluate, EvalReport};
use crate::network::{init_network, load_model, save_model, train, EpochStats, Sample};
use crate::segment::{normalize_segment, BranchId, WordSegment};
use crate::syndata::{
    make_default_glyphset, render_page, sample_page_lines, sample_vocabulary, GroundTruth,
    PageSpec, Word,
};

/// File name of the dataset index inside a dataset directory.
pub const MANIFEST_NAME: &str = "manifest.txt";

// ---------------------------------------------------------------------------
// Dataset manifest
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }

    fn from_name(s: &str) -> Option<Split> {
        match s {
            "train" => Some(Split::Train),
            "test" => Some(Split::Test),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageEntry {
    pub index: usize,
    pub split: Split,
    pub image: String,
    pub gt: String,
    pub words: usize,
}

/// Index of a synthesized dataset: alphabet, rendering charset, and one
/// entry per page. Pages belong to exactly one split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub seed: u64,
    pub alphabet: usize,
    pub charset: String,
    pub pages: Vec<PageEntry>,
}

impl Manifest {
    pub fn pages_in(&self, split: Split) -> impl Iterator<Item = &PageEntry> {
        self.pages.iter().filter(move |p| p.split == split)
    }

    pub fn words_in(&self, split: Split) -> usize {
        self.pages_in(split).map(|p| p.words).sum()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("veritext-manifest v1\n");
        writeln!(out, "seed {}", self.seed).unwrap();
        writeln!(out, "alphabet {}", self.alphabet).unwrap();
        writeln!(out, "charset {}", self.charset).unwrap();
        for split in [Split::Train, Split::Test] {
            writeln!(
                out,
                "split {} pages {} words {}",
                split.name(),
                self.pages_in(split).count(),
                self.words_in(split)
            )
            .unwrap();
        }
        for p in &self.pages {
            writeln!(out, "page {} {} {} {} {}", p.index, p.split.name(), p.image, p.gt, p.words)
                .unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Manifest> {
        let bad = |msg: String| Error::Config(format!("manifest: {msg}"));
        let mut it = text.lines();
        match it.next() {
            Some("veritext-manifest v1") => {}
            other => return Err(bad(format!("bad header {other:?}"))),
        }
        let mut seed = 0u64;
        let mut alphabet = 0usize;
        let mut charset = String::new();
        let mut declared: Vec<(Split, usize, usize)> = Vec::new();
        let mut pages: Vec<PageEntry> = Vec::new();
        for raw in it {
            let raw = raw.trim();
            if raw.is_empty() {
                continue;
            }
            let mut tok = raw.split_whitespace();
            match tok.next() {
                Some("seed") => {
                    seed = tok
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| bad("bad seed".into()))?;
                }
                Some("alphabet") => {
                    alphabet = tok
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| bad("bad alphabet".into()))?;
                }
                Some("charset") => {
                    charset = tok.next().ok_or_else(|| bad("bad charset".into()))?.to_string();
                }
                Some("split") => {
                    let name = tok.next().unwrap_or("");
                    let split = Split::from_name(name)
                        .ok_or_else(|| bad(format!("unknown split {name:?}")))?;
                    if tok.next() != Some("pages") {
                        return Err(bad("malformed split record".into()));
                    }
                    let p: usize = tok
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| bad("bad split page count".into()))?;
                    if tok.next() != Some("words") {
                        return Err(bad("malformed split record".into()));
                    }
                    let w: usize = tok
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| bad("bad split word count".into()))?;
                    declared.push((split, p, w));
                }
                Some("page") => {
                    let index: usize = tok
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| bad("bad page index".into()))?;
                    if index != pages.len() {
                        return Err(bad(format!("page records out of order at {index}")));
                    }
                    let split = tok
                        .next()
                        .and_then(Split::from_name)
                        .ok_or_else(|| bad(format!("bad split on page {index}")))?;
                    let image =
                        tok.next().ok_or_else(|| bad("missing image file".into()))?.to_string();
                    let gt = tok.next().ok_or_else(|| bad("missing gt file".into()))?.to_string();
                    let words: usize = tok
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| bad("bad word count".into()))?;
                    pages.push(PageEntry { index, split, image, gt, words });
                }
                Some(other) => return Err(bad(format!("unknown record {other:?}"))),
                None => {}
            }
        }
        if alphabet == 0 || charset.is_empty() {
            return Err(bad("missing alphabet or charset".into()));
        }
        let man = Manifest { seed, alphabet, charset, pages };
        for (split, p, w) in declared {
            if man.pages_in(split).count() != p || man.words_in(split) != w {
                return Err(bad(format!("{} summary does not match page records", split.name())));
            }
        }
        Ok(man)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Manifest> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SynthSummary {
    pub manifest: PathBuf,
    pub train_pages: usize,
    pub test_pages: usize,
    pub train_words: usize,
    pub test_words: usize,
}

/// Render a dataset: PBM pages, ground-truth files, and a manifest that
/// splits pages between train and test. Word counts are exact; the last
/// page of each split is truncated to land on the configured target.
pub fn cmd_synth(cfg: &PipelineConfig, out: &Path) -> Result<SynthSummary> {
    cfg.validate()?;
    let s = &cfg.synth;
    let glyphs = make_default_glyphset(s.glyph_seed);
    let alphabet = glyphs.len();
    let map = cfg.label_map(alphabet)?;
    let charset = map.render_word(&(0..alphabet as u32).collect::<Vec<_>>())?;

    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let vocab = sample_vocabulary(
        &mut rng,
        &glyphs,
        s.vocab_size,
        (s.word_len[0], s.word_len[1]),
        s.p_modifier,
    );

    let mut pages: Vec<PageEntry> = Vec::new();
    let mut index = 0usize;
    for (split, target) in [(Split::Train, s.train_words), (Split::Test, s.test_words)] {
        let mut remaining = target;
        while remaining > 0 {
            let sampled = sample_page_lines(
                &mut rng,
                &vocab,
                (s.lines_per_page[0], s.lines_per_page[1]),
                (s.words_per_line[0], s.words_per_line[1]),
            );
            let mut lines: Vec<Vec<Word>> = Vec::new();
            let mut count = 0usize;
            for line in sampled {
                if remaining == 0 {
                    break;
                }
                let take = line.len().min(remaining);
                remaining -= take;
                count += take;
                lines.push(line[..take].to_vec());
            }
            let spec = PageSpec {
                lines,
                interline_gap: s.interline_gap,
                interword_gap: s.interword_gap,
                modifier_crowding: rng.gen_range(s.crowding[0]..=s.crowding[1]),
                noise_density: s.noise,
                rng_seed: rng.gen(),
            };
            let (img, gt) = render_page(&spec, &glyphs)?;
            debug_assert_eq!(gt.total_words(), count);
            let image = format!("page_{index:05}.pbm");
            let gt_name = format!("page_{index:05}.gt");
            save_pbm(&img, out.join(&image))?;
            gt.save(out.join(&gt_name))?;
            pages.push(PageEntry { index, split, image, gt: gt_name, words: count });
            index += 1;
        }
    }

    let man = Manifest { seed: s.seed, alphabet, charset, pages };
    let manifest = out.join(MANIFEST_NAME);
    man.save(&manifest)?;
    Ok(SynthSummary {
        manifest,
        train_pages: man.pages_in(Split::Train).count(),
        test_pages: man.pages_in(Split::Test).count(),
        train_words: man.words_in(Split::Train),
        test_words: man.words_in(Split::Test),
    })
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: PathBuf,
    pub log: PathBuf,
    pub stats: Vec<EpochStats>,
    pub train_samples: usize,
    pub val_samples: usize,
}

fn load_page(path: &Path, rec: &RecognizeSection) -> Result<BinaryImage> {
    match load_image(path)? {
        LoadedImage::Binary(b) => Ok(b),
        LoadedImage::Gray(g) => sauvola_binarize(&g, rec.sauvola_window, rec.sauvola_k),
    }
}

/// Ground-truth word crops of the training split, in reading order.
fn gt_word_samples(cfg: &PipelineConfig, data: &Path, man: &Manifest) -> Result<Vec<Sample>> {
    let mut samples: Vec<Sample> = Vec::new();
    for entry in man.pages_in(Split::Train) {
        let img = load_page(&data.join(&entry.image), &cfg.recognize)?;
        let gt = GroundTruth::load(data.join(&entry.gt))?;
        for (li, line) in gt.lines.iter().enumerate() {
            for word in &line.words {
                let b = word.bbox;
                if b.x1 >= img.width() || b.y1 >= img.height() {
                    return Err(Error::GroundTruthFormat(format!(
                        "word box exceeds page in {}",
                        entry.gt
                    )));
                }
                let seg = WordSegment {
                    line_index: li,
                    x0: b.x0,
                    x1: b.x1,
                    y0: b.y0,
                    y1: b.y1,
                    crop: img.crop(b.x0, b.y0, b.x1, b.y1),
                };
                let feats = normalize_segment(&seg, cfg.recognize.target_height)?;
                samples.push((feats, word.labels.clone()));
            }
        }
    }
    Ok(samples)
}

/// Deterministic validation carve-out: every n/n_val-th sample in reading
/// order, so held-out words spread across all training pages.
fn split_validation(samples: Vec<Sample>, val_fraction: f64) -> Result<(Vec<Sample>, Vec<Sample>)> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::Config("dataset yields fewer than 2 word samples".into()));
    }
    let n_val = ((n as f64 * val_fraction).round() as usize).clamp(1, n - 1);
    let mut train_set = Vec::with_capacity(n - n_val);
    let mut val_set = Vec::with_capacity(n_val);
    for (i, sample) in samples.into_iter().enumerate() {
        if (i + 1) * n_val / n > i * n_val / n {
            val_set.push(sample);
        } else {
            train_set.push(sample);
        }
    }
    Ok((train_set, val_set))
}

fn write_train_log(
    path: &Path,
    train_n: usize,
    val_n: usize,
    stats: &[EpochStats],
) -> Result<()> {
    let mut out = String::from("veritext-train-log v1\n");
    writeln!(out, "samples train {train_n} val {val_n}").unwrap();
    for s in stats {
        writeln!(
            out,
            "epoch {} train {:.9} val {:.9} best {:.9}",
            s.epoch, s.train_loss, s.val_loss, s.best_val
        )
        .unwrap();
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Train on ground-truth word crops (perfect segments) and keep the
/// best-validation parameters. Writes the model and a per-epoch log.
pub fn cmd_train(
    cfg: &PipelineConfig,
    data: &Path,
    model_out: &Path,
    log_out: Option<&Path>,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let man = Manifest::load(data.join(MANIFEST_NAME))?;
    let samples = gt_word_samples(cfg, data, &man)?;
    let (train_set, val_set) = split_validation(samples, cfg.train.val_fraction)?;

    let tcfg = cfg.train.to_train_config();
    let net = init_network(cfg.recognize.target_height, &cfg.network.hidden, man.alphabet, &tcfg)?;
    let (best, stats) = train(&net, &train_set, &val_set, &tcfg)?;

    save_model(&best, model_out)?;
    let log = match log_out {
        Some(p) => p.to_path_buf(),
        None => model_out.with_extension("log"),
    };
    write_train_log(&log, train_set.len(), val_set.len(), &stats)?;
    Ok(TrainOutcome {
        model: model_out.to_path_buf(),
        log,
        stats,
        train_samples: train_set.len(),
        val_samples: val_set.len(),
    })
}

// ---------------------------------------------------------------------------
// build-lm
// ---------------------------------------------------------------------------

/// Build the n-gram model from the training transcripts only (the label
/// sequences the training pages were rendered from) and save it.
pub fn cmd_build_lm(data: &Path, out: &Path) -> Result<NGramModel> {
    let man = Manifest::load(data.join(MANIFEST_NAME))?;
    let mut corpus: Vec<Vec<u32>> = Vec::new();
    for entry in man.pages_in(Split::Train) {
        let gt = GroundTruth::load(data.join(&entry.gt))?;
        corpus.extend(gt.word_label_seqs().into_iter().map(|w| w.to_vec()));
    }
    let lm = build_ngrams(&corpus, man.alphabet)?;
    lm.save(out)?;
    Ok(lm)
}

// ---------------------------------------------------------------------------
// recognize
// ---------------------------------------------------------------------------

/// Which pipeline a recognize run uses: the full fused hypothesis tree or
/// one segmentation routine end to end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FusionMode {
    Fused,
    Single(BranchId),
}

/// Transcribe pages to `<stem>.txt` (rendered text) plus `<stem>.tsc`
/// (structured sidecar) in `out`. Pages are independent, so they are
/// processed in parallel; outputs depend only on each page's input.
pub fn cmd_recognize(
    cfg: &PipelineConfig,
    model_path: &Path,
    lm_path: &Path,
    pages: &[PathBuf],
    mode: FusionMode,
    out: &Path,
    map: Option<&LabelMap>,
) -> Result<Vec<PathBuf>> {
    if pages.is_empty() {
        return Err(Error::EmptyInput("page list"));
    }
    let net = load_model(model_path)?;
    let lm = NGramModel::load(lm_path)?;
    let rcfg = cfg.recognize.to_recognize_config()?;
    let owned;
    let map = match map {
        Some(m) => m,
        None => {
            owned = cfg.label_map(net.labels())?;
            &owned
        }
    };
    if map.len() != net.labels() {
        return Err(Error::param(
            "charset",
            format!("has {} symbols but the network emits {}", map.len(), net.labels()),
        ));
    }
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;

    pages
        .par_iter()
        .map(|page_path| {
            let img = load_page(page_path, &cfg.recognize)?;
            let transcript = match mode {
                FusionMode::Fused => recognize_page(&img, &net, &lm, &rcfg)?,
                FusionMode::Single(branch) => {
                    recognize_page_single(&img, branch, &net, &lm, &rcfg)?
                }
            };
            let stem = page_path
                .file_stem()
                .and_then(|s| s.to_str())
                .ok_or_else(|| Error::Config(format!("unusable page path {page_path:?}")))?;
            let txt = out.join(format!("{stem}.txt"));
            fs::write(&txt, transcript.to_text(map)?).map_err(|e| Error::io(&txt, e))?;
            let tsc = out.join(format!("{stem}.tsc"));
            fs::write(&tsc, transcript.sidecar()).map_err(|e| Error::io(&tsc, e))?;
            Ok(txt)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

/// Pair every `<stem>.txt` transcript with `<stem>.gt` ground truth and
/// score them. The structured report is written to `report_out` (default
/// `eval.report` beside the transcripts); the caller prints the table.
pub fn cmd_evaluate(
    transcripts: &Path,
    truths: &Path,
    report_out: Option<&Path>,
    map: &LabelMap,
) -> Result<(EvalReport, PathBuf)> {
    let mut stems: Vec<String> = Vec::new();
    let entries = fs::read_dir(transcripts).map_err(|e| Error::io(transcripts, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(transcripts, e))?;
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) == Some("txt") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                stems.push(stem.to_string());
            }
        }
    }
    stems.sort();
    if stems.is_empty() {
        return Err(Error::EmptyInput("transcript directory"));
    }

    let mut ts: Vec<PageTranscript> = Vec::with_capacity(stems.len());
    let mut gts: Vec<GroundTruth> = Vec::with_capacity(stems.len());
    for stem in &stems {
        let tpath = transcripts.join(format!("{stem}.txt"));
        let text = fs::read_to_string(&tpath).map_err(|e| Error::io(&tpath, e))?;
        ts.push(PageTranscript::from_text(&text, map)?);
        let gpath = truths.join(format!("{stem}.gt"));
        if !gpath.exists() {
            return Err(Error::EvalMismatch(format!("no ground truth for page {stem:?}")));
        }
        gts.push(GroundTruth::load(&gpath)?);
    }
    let report = evaluate(&ts, &gts)?;
    let out = match report_out {
        Some(p) => p.to_path_buf(),
        None => transcripts.join("eval.report"),
    };
    fs::write(&out, report.structured()).map_err(|e| Error::io(&out, e))?;
    Ok((report, out))
}

// ---------------------------------------------------------------------------
// Argument parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Parser)]
#[command(
    name = "veritext",
    version,
    about = "Hypothesize-and-verify page text recognition"
)]
struct Cli {
    /// Pipeline configuration file (TOML); built-in defaults when absent.
    #[arg(long, value_name = "FILE", global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Render a synthetic dataset: pages, ground truth, manifest.
    Synth(SynthArgs),
    /// Train the recognition network on ground-truth word crops.
    Train(TrainArgs),
    /// Build the character n-gram model from the training transcripts.
    BuildLm(BuildLmArgs),
    /// Transcribe pages with a trained model and n-gram verifier.
    Recognize(RecognizeArgs),
    /// Score transcripts against ground truth.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Output dataset directory.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Override synth.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override synth.train_words.
    #[arg(long)]
    train_words: Option<usize>,
    /// Override synth.test_words.
    #[arg(long)]
    test_words: Option<usize>,
    /// Override synth.vocab_size.
    #[arg(long)]
    vocab_size: Option<usize>,
    /// Override the lower end of synth.crowding.
    #[arg(long)]
    crowding_min: Option<f64>,
    /// Override the upper end of synth.crowding.
    #[arg(long)]
    crowding_max: Option<f64>,
    /// Override synth.noise.
    #[arg(long)]
    noise: Option<f64>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Dataset directory produced by synth.
    #[arg(long, value_name = "DIR")]
    data: PathBuf,
    /// Where to write the trained model.
    #[arg(long, value_name = "FILE")]
    model_out: PathBuf,
    /// Where to write the epoch log (default: model path with .log).
    #[arg(long, value_name = "FILE")]
    log: Option<PathBuf>,
    /// Override train.learning_rate.
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Override train.max_epochs.
    #[arg(long)]
    max_epochs: Option<usize>,
    /// Override train.patience.
    #[arg(long)]
    patience: Option<usize>,
    /// Override train.seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct BuildLmArgs {
    /// Dataset directory produced by synth.
    #[arg(long, value_name = "DIR")]
    data: PathBuf,
    /// Where to write the n-gram model.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BranchArg {
    Projection,
    Hough,
    #[value(name = "interval_tree", alias = "interval-tree")]
    IntervalTree,
    Fused,
}

impl BranchArg {
    fn mode(self) -> FusionMode {
        match self {
            BranchArg::Projection => FusionMode::Single(BranchId::Projection),
            BranchArg::Hough => FusionMode::Single(BranchId::Hough),
            BranchArg::IntervalTree => FusionMode::Single(BranchId::IntervalTree),
            BranchArg::Fused => FusionMode::Fused,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SplitArg {
    Train,
    Test,
}

#[derive(Debug, Args)]
struct RecognizeArgs {
    /// Trained model file.
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    /// N-gram model file.
    #[arg(long, value_name = "FILE")]
    lm: PathBuf,
    /// Output directory for transcripts.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Pipeline selection: one routine or the fused hypothesis tree.
    #[arg(long, value_enum, default_value = "fused")]
    branch: BranchArg,
    /// Recognize a dataset split instead of explicit page files.
    #[arg(long, value_name = "DIR", conflicts_with = "pages")]
    data: Option<PathBuf>,
    /// Which split of --data to recognize.
    #[arg(long, value_enum, default_value = "test", requires = "data")]
    split: SplitArg,
    /// Override recognize.lambda.
    #[arg(long)]
    lambda: Option<f64>,
    /// Page image files (PBM/PGM).
    #[arg(value_name = "PAGE")]
    pages: Vec<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Directory of .txt transcripts.
    #[arg(long, value_name = "DIR")]
    transcripts: PathBuf,
    /// Directory of .gt ground-truth files (a dataset directory works).
    #[arg(long, value_name = "DIR")]
    truths: PathBuf,
    /// Where to write the structured report (default: eval.report beside
    /// the transcripts).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

fn apply_synth_overrides(mut cfg: PipelineConfig, a: &SynthArgs) -> PipelineConfig {
    if let Some(v) = a.seed {
        cfg.synth.seed = v;
    }
    if let Some(v) = a.train_words {
        cfg.synth.train_words = v;
    }
    if let Some(v) = a.test_words {
        cfg.synth.test_words = v;
    }
    if let Some(v) = a.vocab_size {
        cfg.synth.vocab_size = v;
    }
    if let Some(v) = a.crowding_min {
        cfg.synth.crowding[0] = v;
    }
    if let Some(v) = a.crowding_max {
        cfg.synth.crowding[1] = v;
    }
    if let Some(v) = a.noise {
        cfg.synth.noise = v;
    }
    cfg
}

fn apply_train_overrides(mut cfg: PipelineConfig, a: &TrainArgs) -> PipelineConfig {
    if let Some(v) = a.learning_rate {
        cfg.train.learning_rate = v;
    }
    if let Some(v) = a.max_epochs {
        cfg.train.max_epochs = v;
    }
    if let Some(v) = a.patience {
        cfg.train.patience = v;
    }
    if let Some(v) = a.seed {
        cfg.train.seed = v;
    }
    cfg
}

/// The label map used to parse transcript text during evaluation: the
/// dataset manifest's charset when the truth directory has one, the
/// configured charset otherwise, and the full default table as a last
/// resort (a superset parses any text rendered from a prefix).
fn evaluate_map(cfg: &PipelineConfig, truths: &Path) -> Result<LabelMap> {
    let manifest = truths.join(MANIFEST_NAME);
    if manifest.exists() {
        return LabelMap::new(&Manifest::load(&manifest)?.charset);
    }
    match &cfg.charset {
        Some(cs) => LabelMap::new(cs),
        None => LabelMap::new(crate::hypothesis::DEFAULT_CHARSET),
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    match cli.cmd {
        Cmd::Synth(a) => {
            let cfg = apply_synth_overrides(cfg, &a);
            let s = cmd_synth(&cfg, &a.out)?;
            println!(
                "wrote {} train pages ({} words) and {} test pages ({} words); manifest at {}",
                s.train_pages,
                s.train_words,
                s.test_pages,
                s.test_words,
                s.manifest.display()
            );
        }
        Cmd::Train(a) => {
            let cfg = apply_train_overrides(cfg, &a);
            let t = cmd_train(&cfg, &a.data, &a.model_out, a.log.as_deref())?;
            let best = t.stats.last().map(|s| s.best_val).unwrap_or(f64::NAN);
            println!(
                "trained {} epochs on {} word crops ({} held out); best validation loss {:.6}",
                t.stats.len(),
                t.train_samples,
                t.val_samples,
                best
            );
            println!("model at {}, epoch log at {}", t.model.display(), t.log.display());
        }
        Cmd::BuildLm(a) => {
            let lm = cmd_build_lm(&a.data, &a.out)?;
            println!(
                "built n-gram model over {} labels: {} trigrams, {} 4-grams; saved to {}",
                lm.alphabet(),
                lm.trigram_count(),
                lm.fourgram_count(),
                a.out.display()
            );
        }
        Cmd::Recognize(a) => {
            let mut cfg = cfg;
            if let Some(v) = a.lambda {
                cfg.recognize.lambda = v;
            }
            let (pages, map) = match &a.data {
                Some(data) => {
                    let man = Manifest::load(data.join(MANIFEST_NAME))?;
                    let split = match a.split {
                        SplitArg::Train => Split::Train,
                        SplitArg::Test => Split::Test,
                    };
                    let pages: Vec<PathBuf> =
                        man.pages_in(split).map(|e| data.join(&e.image)).collect();
                    (pages, Some(LabelMap::new(&man.charset)?))
                }
                None => (a.pages.clone(), None),
            };
            let written =
                cmd_recognize(&cfg, &a.model, &a.lm, &pages, a.branch.mode(), &a.out, map.as_ref())?;
            println!("transcribed {} pages into {}", written.len(), a.out.display());
        }
        Cmd::Evaluate(a) => {
            let map = evaluate_map(&cfg, &a.truths)?;
            let (report, out) = cmd_evaluate(&a.transcripts, &a.truths, a.out.as_deref(), &map)?;
            print!("{}", report.text_table());
            println!("report written to {}", out.display());
        }
    }
    Ok(())
}

/// Entry point behind `fn main`; returns the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // --help and --version land here as non-error exits.
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::TrainConfig;
    use tempfile::tempdir;

    fn tiny_cfg() -> PipelineConfig {
        let mut cfg = PipelineConfig::default();
        cfg.synth.train_words = 30;
        cfg.synth.test_words = 8;
        cfg.synth.vocab_size = 10;
        cfg.synth.word_len = [2, 3];
        cfg.synth.lines_per_page = [2, 3];
        cfg.synth.words_per_line = [2, 4];
        cfg.network.hidden = vec![4];
        cfg.train.max_epochs = 2;
        cfg.train.val_fraction = 0.2;
        cfg
    }

    /// Sorted (name, bytes) pairs of every file directly inside `dir`.
    fn dir_snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
            .unwrap()
            .map(|e| {
                let p = e.unwrap().path();
                (p.file_name().unwrap().to_str().unwrap().to_string(), fs::read(&p).unwrap())
            })
            .collect();
        files.sort();
        files
    }

    #[test]
    fn synth_is_deterministic_with_exact_counts_and_disjoint_splits() {
        let cfg = tiny_cfg();
        let (d1, d2) = (tempdir().unwrap(), tempdir().unwrap());
        let s1 = cmd_synth(&cfg, d1.path()).unwrap();
        let s2 = cmd_synth(&cfg, d2.path()).unwrap();
        assert_eq!(dir_snapshot(d1.path()), dir_snapshot(d2.path()));
        assert_eq!(s1.train_words, cfg.synth.train_words);
        assert_eq!(s1.test_words, cfg.synth.test_words);
        assert_eq!(s1.train_pages, s2.train_pages);

        let man = Manifest::load(d1.path().join(MANIFEST_NAME)).unwrap();
        assert_eq!(man.alphabet, 16);
        assert_eq!(man.words_in(Split::Train), cfg.synth.train_words);
        assert_eq!(man.words_in(Split::Test), cfg.synth.test_words);
        // Every page belongs to exactly one split, and the gt word count
        // matches the manifest entry.
        for p in &man.pages {
            let gt = GroundTruth::load(d1.path().join(&p.gt)).unwrap();
            assert_eq!(gt.total_words(), p.words);
        }
        let train: Vec<&str> =
            man.pages_in(Split::Train).map(|p| p.image.as_str()).collect();
        let test: Vec<&str> = man.pages_in(Split::Test).map(|p| p.image.as_str()).collect();
        assert!(train.iter().all(|i| !test.contains(i)));
        assert_eq!(train.len() + test.len(), man.pages.len());

        // A different seed actually changes the data.
        let mut other = cfg.clone();
        other.synth.seed = 1;
        let d3 = tempdir().unwrap();
        cmd_synth(&other, d3.path()).unwrap();
        assert_ne!(dir_snapshot(d1.path()), dir_snapshot(d3.path()));
    }

    #[test]
    fn manifest_text_round_trips() {
        let cfg = tiny_cfg();
        let dir = tempdir().unwrap();
        cmd_synth(&cfg, dir.path()).unwrap();
        let man = Manifest::load(dir.path().join(MANIFEST_NAME)).unwrap();
        assert_eq!(Manifest::from_text(&man.to_text()).unwrap(), man);

        let err = Manifest::from_text("veritext-manifest v1\nalphabet 4\n").unwrap_err();
        assert!(err.to_string().contains("charset"), "got {err}");
        let err = Manifest::from_text("nope\n").unwrap_err();
        assert!(err.to_string().contains("header"), "got {err}");
    }

    #[test]
    fn train_writes_model_and_monotone_log_deterministically() {
        let cfg = tiny_cfg();
        let data = tempdir().unwrap();
        cmd_synth(&cfg, data.path()).unwrap();
        let out = tempdir().unwrap();

        let m1 = out.path().join("a.vxm");
        let t1 = cmd_train(&cfg, data.path(), &m1, None).unwrap();
        assert_eq!(t1.log, out.path().join("a.log"));
        assert!(t1.train_samples > 0 && t1.val_samples > 0);
        assert_eq!(t1.train_samples + t1.val_samples, cfg.synth.train_words);
        assert!(!t1.stats.is_empty());
        for pair in t1.stats.windows(2) {
            assert!(pair[1].best_val <= pair[0].best_val);
        }
        let log_text = fs::read_to_string(&t1.log).unwrap();
        assert!(log_text.starts_with("veritext-train-log v1\n"));
        assert_eq!(log_text.lines().count(), 2 + t1.stats.len());

        // Loadable model with the configured architecture.
        let net = load_model(&m1).unwrap();
        assert_eq!(net.input_size(), cfg.recognize.target_height);
        assert_eq!(net.hidden_sizes(), cfg.network.hidden);
        assert_eq!(net.labels(), 16);

        // Bit-identical rerun.
        let m2 = out.path().join("b.vxm");
        cmd_train(&cfg, data.path(), &m2, None).unwrap();
        assert_eq!(fs::read(&m1).unwrap(), fs::read(&m2).unwrap());
        assert_eq!(
            fs::read_to_string(out.path().join("a.log")).unwrap(),
            fs::read_to_string(out.path().join("b.log")).unwrap()
        );
    }

    #[test]
    fn build_lm_covers_every_training_word() {
        let cfg = tiny_cfg();
        let data = tempdir().unwrap();
        cmd_synth(&cfg, data.path()).unwrap();
        let lm_path = data.path().join("lm.vxl");
        let lm = cmd_build_lm(data.path(), &lm_path).unwrap();

        let reloaded = NGramModel::load(&lm_path).unwrap();
        assert_eq!(reloaded.alphabet(), lm.alphabet());
        assert_eq!(reloaded.trigram_count(), lm.trigram_count());
        assert_eq!(reloaded.fourgram_count(), lm.fourgram_count());

        let man = Manifest::load(data.path().join(MANIFEST_NAME)).unwrap();
        for entry in man.pages_in(Split::Train) {
            let gt = GroundTruth::load(data.path().join(&entry.gt)).unwrap();
            for w in gt.word_label_seqs() {
                assert_eq!(lm.word_score(w, 1.0).invalid_count, 0);
            }
        }

        // A dataset with no training pages has no transcripts to build from.
        let empty = tempdir().unwrap();
        let man = Manifest {
            seed: 0,
            alphabet: 4,
            charset: "abcd".into(),
            pages: vec![],
        };
        man.save(empty.path().join(MANIFEST_NAME)).unwrap();
        let err = cmd_build_lm(empty.path(), &empty.path().join("lm")).unwrap_err();
        assert!(matches!(err, Error::EmptyInput(_)), "got {err}");
    }

    #[test]
    fn recognize_single_branch_matches_library_and_blank_page_is_empty() {
        let cfg = tiny_cfg();
        let data = tempdir().unwrap();
        cmd_synth(&cfg, data.path()).unwrap();
        let man = Manifest::load(data.path().join(MANIFEST_NAME)).unwrap();

        // An untrained network suffices: the contract under test is file
        // plumbing equals library call, not transcription quality.
        let tcfg = TrainConfig { rng_seed: 3, ..TrainConfig::default() };
        let net =
            init_network(cfg.recognize.target_height, &cfg.network.hidden, man.alphabet, &tcfg)
                .unwrap();
        let model_path = data.path().join("model.vxm");
        save_model(&net, &model_path).unwrap();
        let lm_path = data.path().join("lm.vxl");
        let lm = cmd_build_lm(data.path(), &lm_path).unwrap();

        let page = man.pages_in(Split::Test).next().unwrap();
        let page_path = data.path().join(&page.image);
        let out = tempdir().unwrap();
        let written = cmd_recognize(
            &cfg,
            &model_path,
            &lm_path,
            &[page_path.clone()],
            FusionMode::Single(BranchId::Projection),
            out.path(),
            None,
        )
        .unwrap();
        assert_eq!(written.len(), 1);

        let img = load_page(&page_path, &cfg.recognize).unwrap();
        let rcfg = cfg.recognize.to_recognize_config().unwrap();
        let expect =
            recognize_page_single(&img, BranchId::Projection, &net, &lm, &rcfg).unwrap();
        let map = cfg.label_map(man.alphabet).unwrap();
        assert_eq!(fs::read_to_string(&written[0]).unwrap(), expect.to_text(&map).unwrap());
        let stem = page_path.file_stem().unwrap().to_str().unwrap();
        let sidecar = fs::read_to_string(out.path().join(format!("{stem}.tsc"))).unwrap();
        assert_eq!(sidecar, expect.sidecar());

        // Fused mode writes the same file set.
        let fused_out = tempdir().unwrap();
        let written = cmd_recognize(
            &cfg,
            &model_path,
            &lm_path,
            &[page_path],
            FusionMode::Fused,
            fused_out.path(),
            None,
        )
        .unwrap();
        assert_eq!(written.len(), 1);

        // A blank page yields an empty transcript file.
        let blank_path = data.path().join("blank.pbm");
        save_pbm(&BinaryImage::blank(120, 60).unwrap(), &blank_path).unwrap();
        let blank_out = tempdir().unwrap();
        let written = cmd_recognize(
            &cfg,
            &model_path,
            &lm_path,
            &[blank_path],
            FusionMode::Fused,
            blank_out.path(),
            None,
        )
        .unwrap();
        assert_eq!(fs::read_to_string(&written[0]).unwrap(), "");
    }

    #[test]
    fn evaluate_scores_ground_truth_texts_at_zero_and_rejects_missing_pages() {
        let cfg = tiny_cfg();
        let data = tempdir().unwrap();
        cmd_synth(&cfg, data.path()).unwrap();
        let man = Manifest::load(data.path().join(MANIFEST_NAME)).unwrap();
        let map = LabelMap::new(&man.charset).unwrap();

        // Perfect transcripts, rendered straight from ground truth.
        let tdir = tempdir().unwrap();
        for entry in man.pages_in(Split::Test) {
            let gt = GroundTruth::load(data.path().join(&entry.gt)).unwrap();
            let mut text = String::new();
            for line in &gt.lines {
                let words: Vec<String> = line
                    .words
                    .iter()
                    .map(|w| map.render_word(&w.labels).unwrap())
                    .collect();
                writeln!(text, "{}", words.join(" ")).unwrap();
            }
            let stem = entry.image.trim_end_matches(".pbm");
            fs::write(tdir.path().join(format!("{stem}.txt")), text).unwrap();
        }
        let (report, out) = cmd_evaluate(tdir.path(), data.path(), None, &map).unwrap();
        assert_eq!(report.label_edits, 0);
        assert_eq!(report.word_edits, 0);
        assert_eq!(report.ref_words, cfg.synth.test_words);
        let structured = fs::read_to_string(&out).unwrap();
        assert!(structured.starts_with("veritext-eval v1"));

        // A transcript without ground truth is a page-count mismatch.
        fs::write(tdir.path().join("stray.txt"), "ab\n").unwrap();
        let err = cmd_evaluate(tdir.path(), data.path(), None, &map).unwrap_err();
        assert!(err.to_string().contains("stray"), "got {err}");
    }

    #[test]
    fn flags_override_config_values() {
        let cli = Cli::try_parse_from([
            "veritext",
            "synth",
            "--out",
            "x",
            "--train-words",
            "12",
            "--noise",
            "0.01",
            "--crowding-min",
            "0.5",
            "--crowding-max",
            "0.9",
        ])
        .unwrap();
        let Cmd::Synth(a) = cli.cmd else { panic!("wrong subcommand") };
        let cfg = apply_synth_overrides(PipelineConfig::default(), &a);
        assert_eq!(cfg.synth.train_words, 12);
        assert_eq!(cfg.synth.noise, 0.01);
        assert_eq!(cfg.synth.crowding, [0.5, 0.9]);
        assert_eq!(cfg.synth.test_words, 500);

        let cli = Cli::try_parse_from([
            "veritext",
            "train",
            "--data",
            "d",
            "--model-out",
            "m",
            "--learning-rate",
            "0.05",
            "--max-epochs",
            "7",
        ])
        .unwrap();
        let Cmd::Train(a) = cli.cmd else { panic!("wrong subcommand") };
        let cfg = apply_train_overrides(PipelineConfig::default(), &a);
        assert_eq!(cfg.train.learning_rate, 0.05);
        assert_eq!(cfg.train.max_epochs, 7);
        assert_eq!(cfg.train.momentum, 0.9);

        let cli = Cli::try_parse_from([
            "veritext",
            "recognize",
            "--model",
            "m",
            "--lm",
            "l",
            "--out",
            "o",
            "--branch",
            "interval_tree",
            "p.pbm",
        ])
        .unwrap();
        let Cmd::Recognize(a) = cli.cmd else { panic!("wrong subcommand") };
        assert_eq!(a.branch, BranchArg::IntervalTree);
        assert_eq!(a.branch.mode(), FusionMode::Single(BranchId::IntervalTree));
        assert_eq!(a.pages, vec![PathBuf::from("p.pbm")]);

        // --data and positional pages are mutually exclusive.
        assert!(Cli::try_parse_from([
            "veritext",
            "recognize",
            "--model",
            "m",
            "--lm",
            "l",
            "--out",
            "o",
            "--data",
            "d",
            "p.pbm",
        ])
        .is_err());
    }
}
