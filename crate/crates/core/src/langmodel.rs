//! Character n-gram language model.
//!
//! Validity is binary set membership over the trigrams and 4-grams seen
//! in the training transcripts; a word's score slides both window sizes
//! across it, rewarding valid windows and penalizing invalid ones. There
//! are no counts, probabilities, or smoothing.

use std::collections::BTreeSet;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// The two window sizes the model stores.
pub const N_VALUES: [usize; 2] = [3, 4];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramModel {
    alphabet: usize,
    trigrams: BTreeSet<Vec<u32>>,
    fourgrams: BTreeSet<Vec<u32>>,
}

/// Per-word validity tally. `score = valid_count - lambda * invalid_count`
/// for the lambda passed to [`NGramModel::word_score`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WordScore {
    pub score: f64,
    pub valid_count: usize,
    pub invalid_count: usize,
}

impl WordScore {
    pub fn zero() -> WordScore {
        WordScore { score: 0.0, valid_count: 0, invalid_count: 0 }
    }
}

/// Collect every contiguous length-3 and length-4 substring of every
/// corpus word. Words shorter than a window size contribute nothing at
/// that size.
pub fn build_ngrams(corpus: &[Vec<u32>], alphabet: usize) -> Result<NGramModel> {
    if corpus.is_empty() {
        return Err(Error::EmptyInput("n-gram corpus"));
    }
    if alphabet < 1 {
        return Err(Error::param("langmodel.alphabet", "must be >= 1"));
    }
    let mut model = NGramModel {
        alphabet,
        trigrams: BTreeSet::new(),
        fourgrams: BTreeSet::new(),
    };
    for word in corpus {
        if let Some(&bad) = word.iter().find(|&&l| l as usize >= alphabet) {
            return Err(Error::LabelOutOfRange { label: bad, classes: alphabet });
        }
        for gram in word.windows(3) {
            model.trigrams.insert(gram.to_vec());
        }
        for gram in word.windows(4) {
            model.fourgrams.insert(gram.to_vec());
        }
    }
    Ok(model)
}

impl NGramModel {
    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn trigram_count(&self) -> usize {
        self.trigrams.len()
    }

    pub fn fourgram_count(&self) -> usize {
        self.fourgrams.len()
    }

    /// Set membership for a window of a stored size.
    pub fn is_valid(&self, gram: &[u32]) -> Result<bool> {
        match gram.len() {
            3 => Ok(self.trigrams.contains(gram)),
            4 => Ok(self.fourgrams.contains(gram)),
            _ => Err(Error::param("langmodel.gram", "length must be 3 or 4")),
        }
    }

    /// Slide both window sizes across the word; each valid window adds 1,
    /// each invalid window subtracts `lambda`. Words shorter than the
    /// smallest window carry no evidence and score zero.
    pub fn word_score(&self, word: &[u32], lambda: f64) -> WordScore {
        let mut valid = 0usize;
        let mut invalid = 0usize;
        for &n in &N_VALUES {
            if word.len() < n {
                continue;
            }
            for gram in word.windows(n) {
                let set = if n == 3 { &self.trigrams } else { &self.fourgrams };
                if set.contains(gram) {
                    valid += 1;
                } else {
                    invalid += 1;
                }
            }
        }
        WordScore {
            score: valid as f64 - lambda * invalid as f64,
            valid_count: valid,
            invalid_count: invalid,
        }
    }

    /// Text file: a version line, the alphabet size, then one gram per
    /// line as space-separated label integers prefixed by the window
    /// size, trigrams before 4-grams, each block lexicographically
    /// sorted.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::new();
        writeln!(buf, "veritext-lm v1").unwrap();
        writeln!(buf, "alphabet {}", self.alphabet).unwrap();
        for set in [&self.trigrams, &self.fourgrams] {
            for gram in set {
                let labels: Vec<String> = gram.iter().map(|l| l.to_string()).collect();
                writeln!(buf, "{} {}", gram.len(), labels.join(" ")).unwrap();
            }
        }
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<NGramModel> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let bad = |msg: String| Error::LmFormat(msg);
        let mut lines = text.lines();
        if lines.next() != Some("veritext-lm v1") {
            return Err(bad("bad magic line".into()));
        }
        let alphabet = lines
            .next()
            .and_then(|l| l.strip_prefix("alphabet "))
            .and_then(|v| v.parse::<usize>().ok())
            .ok_or_else(|| bad("missing alphabet line".into()))?;
        if alphabet < 1 {
            return Err(bad("alphabet must be >= 1".into()));
        }
        let mut model = NGramModel {
            alphabet,
            trigrams: BTreeSet::new(),
            fourgrams: BTreeSet::new(),
        };
        for (idx, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut tok = line.split_whitespace();
            let n: usize = tok
                .next()
                .unwrap()
                .parse()
                .map_err(|_| bad(format!("line {}: bad window size", idx + 3)))?;
            if !N_VALUES.contains(&n) {
                return Err(bad(format!("line {}: window size {n} not stored", idx + 3)));
            }
            let labels: Vec<u32> = tok
                .map(|t| {
                    t.parse::<u32>()
                        .map_err(|_| bad(format!("line {}: bad label", idx + 3)))
                })
                .collect::<Result<_>>()?;
            if labels.len() != n {
                return Err(bad(format!("line {}: expected {n} labels", idx + 3)));
            }
            if let Some(&l) = labels.iter().find(|&&l| l as usize >= alphabet) {
                return Err(bad(format!("line {}: label {l} outside alphabet", idx + 3)));
            }
            let set = if n == 3 { &mut model.trigrams } else { &mut model.fourgrams };
            set.insert(labels);
        }
        Ok(model)
    }
}
