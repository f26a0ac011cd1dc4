//! Data carriers between segmentation, the recognizer, and CTC.

use crate::error::{Error, Result};

/// A T-frame sequence of equal-length real-valued feature vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence {
    frames: Vec<Vec<f64>>,
}

impl FeatureSequence {
    pub fn new(frames: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = frames.first() else {
            return Err(Error::EmptyInput("feature sequence"));
        };
        let dim = first.len();
        for f in &frames {
            if f.len() != dim {
                return Err(Error::FrameLengthMismatch { got: f.len(), expected: dim });
            }
            if f.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteInput);
            }
        }
        if dim == 0 {
            return Err(Error::EmptyInput("feature frame"));
        }
        Ok(FeatureSequence { frames })
    }

    /// Frame count T.
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Per-frame vector length.
    pub fn dim(&self) -> usize {
        self.frames[0].len()
    }

    pub fn frames(&self) -> &[Vec<f64>] {
        &self.frames
    }
}

/// Per-frame class probabilities: T rows of K+1 entries, each row a
/// distribution (entries in (0,1), summing to 1 within 1e-9). The last
/// index is the blank class.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputLattice {
    rows: Vec<Vec<f64>>,
}

impl OutputLattice {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::EmptyInput("output lattice"));
        };
        let classes = first.len();
        if classes < 2 {
            return Err(Error::param("lattice", "needs at least one label class plus blank"));
        }
        for row in &rows {
            if row.len() != classes {
                return Err(Error::FrameLengthMismatch { got: row.len(), expected: classes });
            }
            let sum: f64 = row.iter().sum();
            if !sum.is_finite() || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::param("lattice", format!("row sums to {sum}, not 1")));
            }
            if row.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
                return Err(Error::param("lattice", "entries must lie strictly in (0, 1)"));
            }
        }
        Ok(OutputLattice { rows })
    }

    /// Frame count T.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Class count including blank (K+1).
    pub fn classes(&self) -> usize {
        self.rows[0].len()
    }

    /// Index of the blank class (the last one).
    pub fn blank(&self) -> usize {
        self.classes() - 1
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}
