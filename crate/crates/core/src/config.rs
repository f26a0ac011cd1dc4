//! One structured configuration file for the whole pipeline.
//!
//! Twenty-plus tunables feed the five commands, so they live in a single
//! TOML document instead of per-command flag soup; command-line flags
//! override individual values. Unknown keys are rejected so typos surface
//! immediately, and every range violation is reported with the offending
//! field's name before any work starts.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::hypothesis::{LabelMap, RecognizeConfig};
use crate::network::TrainConfig;
use crate::segment::BranchId;

/// Every tunable of the synth/train/build-lm/recognize/evaluate pipeline.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Codepoints for labels 0..alphabet in transcript text. Must match the
    /// glyph alphabet size exactly; defaults to a prefix of [a-zA-Z0-9].
    pub charset: Option<String>,
    pub synth: SynthSection,
    pub network: NetworkSection,
    pub train: TrainSection,
    pub recognize: RecognizeSection,
}

/// Dataset synthesis parameters. Word counts are exact: the last page of
/// each split is truncated to land on the target.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub train_words: usize,
    pub test_words: usize,
    /// Closed vocabulary size shared by both splits.
    pub vocab_size: usize,
    /// Middle-zone glyphs per word, inclusive range.
    pub word_len: [usize; 2],
    /// Probability that a middle glyph carries an upper/lower modifier.
    pub p_modifier: f64,
    pub lines_per_page: [usize; 2],
    pub words_per_line: [usize; 2],
    pub interline_gap: usize,
    pub interword_gap: usize,
    /// Modifier crowding range sampled per page; 0 keeps modifiers inside
    /// their own line, 1 pushes them past the interline midpoint.
    pub crowding: [f64; 2],
    /// Fraction of background pixels flipped to ink.
    pub noise: f64,
    /// Seed for the glyph shapes themselves.
    pub glyph_seed: u64,
    /// Seed for vocabulary and page sampling.
    pub seed: u64,
}

impl Default for SynthSection {
    fn default() -> Self {
        SynthSection {
            train_words: 2000,
            test_words: 500,
            vocab_size: 120,
            word_len: [2, 5],
            p_modifier: 0.35,
            lines_per_page: [4, 8],
            words_per_line: [3, 7],
            interline_gap: 10,
            interword_gap: 10,
            crowding: [0.0, 0.0],
            noise: 0.0,
            glyph_seed: 0,
            seed: 0,
        }
    }
}

/// Network architecture. The input size is tied to
/// `recognize.target_height` and the class count to the glyph alphabet,
/// so only the hidden stack is free.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSection {
    pub hidden: Vec<usize>,
}

impl Default for NetworkSection {
    fn default() -> Self {
        NetworkSection { hidden: vec![16, 16, 16] }
    }
}

/// Optimizer and schedule; mirrors [`TrainConfig`] plus the validation
/// split carved from the training words.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub learning_rate: f64,
    pub momentum: f64,
    pub init_range: f64,
    pub bias_input: f64,
    pub bias_forget: f64,
    pub bias_output: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    /// Fraction of word samples held out for early stopping.
    pub val_fraction: f64,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainSection {
            learning_rate: t.learning_rate,
            momentum: t.momentum,
            init_range: t.init_range,
            bias_input: t.bias_input,
            bias_forget: t.bias_forget,
            bias_output: t.bias_output,
            max_epochs: t.max_epochs,
            patience: t.patience,
            seed: t.rng_seed,
            val_fraction: 0.1,
        }
    }
}

impl TrainSection {
    pub fn to_train_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            momentum: self.momentum,
            init_range: self.init_range,
            bias_input: self.bias_input,
            bias_forget: self.bias_forget,
            bias_output: self.bias_output,
            max_epochs: self.max_epochs,
            patience: self.patience,
            rng_seed: self.seed,
        }
    }
}

/// Segmentation, scoring, and fusion parameters; mirrors
/// [`RecognizeConfig`] plus binarization settings for grayscale input.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecognizeSection {
    pub proj_min_gap: usize,
    pub proj_min_ink: usize,
    pub avg_line_height: usize,
    pub hough_theta_tolerance: f64,
    pub hough_bins: usize,
    pub hough_peak_ratio: f64,
    pub it_min_component_pixels: usize,
    pub word_gap_threshold: usize,
    pub word_min_ink: usize,
    pub target_height: usize,
    pub lambda: f64,
    pub overlap_threshold: f64,
    pub window: usize,
    /// Tie-break order between branches; must list each of
    /// projection, hough, interval_tree exactly once.
    pub branch_priority: Vec<String>,
    /// Sauvola window for grayscale pages (PBM input skips binarization).
    pub sauvola_window: usize,
    pub sauvola_k: f64,
}

impl Default for RecognizeSection {
    fn default() -> Self {
        let r = RecognizeConfig::default();
        RecognizeSection {
            proj_min_gap: r.proj_min_gap,
            proj_min_ink: r.proj_min_ink,
            avg_line_height: r.avg_line_height,
            hough_theta_tolerance: r.hough_theta_tolerance,
            hough_bins: r.hough_bins,
            hough_peak_ratio: r.hough_peak_ratio,
            it_min_component_pixels: r.it_min_component_pixels,
            word_gap_threshold: r.word_gap_threshold,
            word_min_ink: r.word_min_ink,
            target_height: r.target_height,
            lambda: r.lambda,
            overlap_threshold: r.overlap_threshold,
            window: r.window,
            branch_priority: r.branch_priority.iter().map(|b| b.name().to_string()).collect(),
            sauvola_window: 31,
            sauvola_k: 0.2,
        }
    }
}

impl RecognizeSection {
    pub fn to_recognize_config(&self) -> Result<RecognizeConfig> {
        if self.branch_priority.len() != 3 {
            return Err(Error::param(
                "recognize.branch_priority",
                "must list each branch exactly once",
            ));
        }
        let mut priority = [BranchId::Projection; 3];
        for (slot, name) in priority.iter_mut().zip(&self.branch_priority) {
            *slot = BranchId::from_name(name).ok_or_else(|| {
                Error::param(
                    "recognize.branch_priority",
                    format!("unknown branch {name:?} (projection, hough, interval_tree)"),
                )
            })?;
        }
        let cfg = RecognizeConfig {
            proj_min_gap: self.proj_min_gap,
            proj_min_ink: self.proj_min_ink,
            avg_line_height: self.avg_line_height,
            hough_theta_tolerance: self.hough_theta_tolerance,
            hough_bins: self.hough_bins,
            hough_peak_ratio: self.hough_peak_ratio,
            it_min_component_pixels: self.it_min_component_pixels,
            word_gap_threshold: self.word_gap_threshold,
            word_min_ink: self.word_min_ink,
            target_height: self.target_height,
            lambda: self.lambda,
            overlap_threshold: self.overlap_threshold,
            window: self.window,
            branch_priority: priority,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<PipelineConfig> {
        let cfg: PipelineConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<PipelineConfig> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Reject any value that violates a downstream module precondition,
    /// naming the offending field.
    pub fn validate(&self) -> Result<()> {
        let s = &self.synth;
        if s.train_words < 1 {
            return Err(Error::param("synth.train_words", "must be >= 1"));
        }
        if s.test_words < 1 {
            return Err(Error::param("synth.test_words", "must be >= 1"));
        }
        if s.vocab_size < 2 {
            return Err(Error::param("synth.vocab_size", "must be >= 2"));
        }
        if s.word_len[0] < 1 || s.word_len[0] > s.word_len[1] {
            return Err(Error::param("synth.word_len", "must be a nonempty 1-based range"));
        }
        if !(0.0..=1.0).contains(&s.p_modifier) {
            return Err(Error::param("synth.p_modifier", "must be in [0, 1]"));
        }
        if s.lines_per_page[0] < 1 || s.lines_per_page[0] > s.lines_per_page[1] {
            return Err(Error::param("synth.lines_per_page", "must be a nonempty 1-based range"));
        }
        if s.words_per_line[0] < 1 || s.words_per_line[0] > s.words_per_line[1] {
            return Err(Error::param("synth.words_per_line", "must be a nonempty 1-based range"));
        }
        if s.interline_gap < 1 {
            return Err(Error::param("synth.interline_gap", "must be >= 1"));
        }
        if s.interword_gap < 1 {
            return Err(Error::param("synth.interword_gap", "must be >= 1"));
        }
        if !(0.0..=1.0).contains(&s.crowding[0])
            || !(0.0..=1.0).contains(&s.crowding[1])
            || s.crowding[0] > s.crowding[1]
        {
            return Err(Error::param("synth.crowding", "must be a nonempty range within [0, 1]"));
        }
        if !(0.0..1.0).contains(&s.noise) {
            return Err(Error::param("synth.noise", "must be in [0, 1)"));
        }

        if self.network.hidden.is_empty() || self.network.hidden.contains(&0) {
            return Err(Error::param("network.hidden", "need nonzero layer sizes"));
        }

        let t = &self.train;
        t.to_train_config().validate()?;
        if !(t.val_fraction > 0.0 && t.val_fraction < 1.0) {
            return Err(Error::param("train.val_fraction", "must be in (0, 1)"));
        }

        let r = &self.recognize;
        r.to_recognize_config()?;
        if r.sauvola_window < 3 || r.sauvola_window % 2 == 0 {
            return Err(Error::param("recognize.sauvola_window", "must be odd and >= 3"));
        }
        if !(r.sauvola_k > 0.0 && r.sauvola_k.is_finite()) {
            return Err(Error::param("recognize.sauvola_k", "must be finite and > 0"));
        }

        if let Some(cs) = &self.charset {
            LabelMap::new(cs)?;
        }
        Ok(())
    }

    /// The label rendering table for an `alphabet`-label glyph set: the
    /// configured charset when present (its length must match), the
    /// default prefix otherwise.
    pub fn label_map(&self, alphabet: usize) -> Result<LabelMap> {
        match &self.charset {
            Some(cs) => {
                let map = LabelMap::new(cs)?;
                if map.len() != alphabet {
                    return Err(Error::param(
                        "charset",
                        format!("has {} symbols but the alphabet has {alphabet}", map.len()),
                    ));
                }
                Ok(map)
            }
            None => LabelMap::default_for(alphabet),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_match_module_defaults() {
        let cfg = PipelineConfig::default();
        cfg.validate().unwrap();
        let r = cfg.recognize.to_recognize_config().unwrap();
        assert_eq!(r.target_height, RecognizeConfig::default().target_height);
        assert_eq!(r.branch_priority, BranchId::ALL);
        let t = cfg.train.to_train_config();
        assert_eq!(t.learning_rate, TrainConfig::default().learning_rate);
        assert_eq!(cfg.synth.train_words, 2000);
        assert_eq!(cfg.synth.test_words, 500);
        assert_eq!(cfg.network.hidden, vec![16, 16, 16]);
    }

    #[test]
    fn toml_round_trip_overrides_sections() {
        let cfg = PipelineConfig::from_toml(
            r#"
            charset = "abcd"

            [synth]
            train_words = 40
            test_words = 10
            vocab_size = 6

            [network]
            hidden = [4, 4]

            [train]
            learning_rate = 0.01
            max_epochs = 3

            [recognize]
            lambda = 2.5
            branch_priority = ["hough", "projection", "interval_tree"]
            "#,
        )
        .unwrap();
        assert_eq!(cfg.charset.as_deref(), Some("abcd"));
        assert_eq!(cfg.synth.train_words, 40);
        assert_eq!(cfg.synth.test_words, 10);
        assert_eq!(cfg.network.hidden, vec![4, 4]);
        assert_eq!(cfg.train.learning_rate, 0.01);
        assert_eq!(cfg.train.max_epochs, 3);
        assert_eq!(cfg.recognize.lambda, 2.5);
        assert_eq!(
            cfg.recognize.to_recognize_config().unwrap().branch_priority,
            [BranchId::Hough, BranchId::Projection, BranchId::IntervalTree]
        );
        // Untouched keys keep their defaults.
        assert_eq!(cfg.synth.vocab_size, 6);
        assert_eq!(cfg.recognize.overlap_threshold, 0.3);
    }

    #[test]
    fn violations_name_the_offending_field() {
        let cases = [
            ("[train]\nmomentum = 1.5", "train.momentum"),
            ("[train]\nval_fraction = 1.0", "train.val_fraction"),
            ("[synth]\nnoise = 1.0", "synth.noise"),
            ("[synth]\nword_len = [3, 2]", "synth.word_len"),
            ("[synth]\ncrowding = [0.8, 0.2]", "synth.crowding"),
            ("[network]\nhidden = []", "network.hidden"),
            ("[recognize]\nlambda = -1.0", "recognize.lambda"),
            ("[recognize]\nsauvola_window = 4", "recognize.sauvola_window"),
            (
                "[recognize]\nbranch_priority = [\"projection\", \"projection\", \"hough\"]",
                "recognize.branch_priority",
            ),
        ];
        for (text, field) in cases {
            let err = PipelineConfig::from_toml(text).unwrap_err().to_string();
            assert!(err.contains(field), "{text:?} should name {field}, got {err}");
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = PipelineConfig::from_toml("[synth]\ntrain_wordz = 5").unwrap_err().to_string();
        assert!(err.contains("train_wordz"), "got {err}");
        let err = PipelineConfig::from_toml("chraset = \"ab\"").unwrap_err().to_string();
        assert!(err.contains("chraset"), "got {err}");
    }

    #[test]
    fn label_map_requires_matching_charset_length() {
        let mut cfg = PipelineConfig::default();
        assert_eq!(cfg.label_map(16).unwrap().len(), 16);
        cfg.charset = Some("abcd".into());
        assert_eq!(cfg.label_map(4).unwrap().len(), 4);
        let err = cfg.label_map(16).unwrap_err().to_string();
        assert!(err.contains("charset"), "got {err}");
    }
}
