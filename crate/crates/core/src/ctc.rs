//! Connectionist Temporal Classification.
//!
//! Loss and gradient run the forward-backward algorithm over the
//! blank-augmented label sequence in log space; decoding is greedy
//! best-path with the collapse rule (drop adjacent duplicates, then
//! blanks). The blank class is the lattice's last index.

use crate::error::{Error, Result};
use crate::features::OutputLattice;

/// Loss in nats and the gradient w.r.t. the pre-softmax logits (T rows of
/// K+1 entries). Each gradient row sums to zero: pushing every logit of a
/// frame equally leaves the softmax unchanged.
#[derive(Debug, Clone)]
pub struct CtcResult {
    pub loss: f64,
    pub grad: Vec<Vec<f64>>,
}

fn log_sum_exp(vals: impl IntoIterator<Item = f64>) -> f64 {
    let vals: Vec<f64> = vals.into_iter().collect();
    let m = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + vals.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Frames an alignment needs: one per label plus one separating blank per
/// adjacent repeat.
fn min_frames(labels: &[u32]) -> usize {
    labels.len() + labels.windows(2).filter(|w| w[0] == w[1]).count()
}

/// −ln P(labels | lattice) and its gradient via blank-augmented
/// forward-backward. Too-short lattices are a typed error: training data
/// generation guarantees feasibility, so hitting one indicates a bug.
pub fn ctc_loss(lattice: &OutputLattice, labels: &[u32]) -> Result<CtcResult> {
    if labels.is_empty() {
        return Err(Error::EmptyInput("label sequence"));
    }
    let t_len = lattice.len();
    let classes = lattice.classes();
    let blank = lattice.blank() as u32;
    if let Some(&bad) = labels.iter().find(|&&l| l >= blank) {
        return Err(Error::LabelOutOfRange { label: bad, classes });
    }
    let need = min_frames(labels);
    if t_len < need {
        return Err(Error::InfeasibleAlignment {
            labels: labels.len(),
            min_frames: need,
            frames: t_len,
        });
    }

    // Augmented sequence l': blank, l1, blank, l2, ..., blank.
    let s_len = 2 * labels.len() + 1;
    let aug = |s: usize| -> u32 {
        if s % 2 == 1 {
            labels[s / 2]
        } else {
            blank
        }
    };
    let ln_y: Vec<Vec<f64>> = lattice
        .rows()
        .iter()
        .map(|row| row.iter().map(|&p| p.ln()).collect())
        .collect();
    // A skip s-2 -> s is legal when it does not jump over a required blank:
    // target must be a label different from the one two slots back.
    let can_skip = |s: usize| s >= 2 && s % 2 == 1 && aug(s) != aug(s - 2);

    let neg = f64::NEG_INFINITY;
    let mut alpha = vec![vec![neg; s_len]; t_len];
    alpha[0][0] = ln_y[0][aug(0) as usize];
    if s_len > 1 {
        alpha[0][1] = ln_y[0][aug(1) as usize];
    }
    for t in 1..t_len {
        for s in 0..s_len {
            let mut terms = vec![alpha[t - 1][s]];
            if s >= 1 {
                terms.push(alpha[t - 1][s - 1]);
            }
            if can_skip(s) {
                terms.push(alpha[t - 1][s - 2]);
            }
            let inc = log_sum_exp(terms);
            if inc != neg {
                alpha[t][s] = inc + ln_y[t][aug(s) as usize];
            }
        }
    }
    let ln_p = log_sum_exp([alpha[t_len - 1][s_len - 1], alpha[t_len - 1][s_len.saturating_sub(2)]]);
    if ln_p == neg {
        // Unreachable once feasibility holds and lattice entries are
        // strictly positive; kept as a guard against NaN propagation.
        return Err(Error::InfeasibleAlignment {
            labels: labels.len(),
            min_frames: need,
            frames: t_len,
        });
    }

    let mut beta = vec![vec![neg; s_len]; t_len];
    beta[t_len - 1][s_len - 1] = ln_y[t_len - 1][aug(s_len - 1) as usize];
    if s_len > 1 {
        beta[t_len - 1][s_len - 2] = ln_y[t_len - 1][aug(s_len - 2) as usize];
    }
    for t in (0..t_len - 1).rev() {
        for s in 0..s_len {
            let mut terms = vec![beta[t + 1][s]];
            if s + 1 < s_len {
                terms.push(beta[t + 1][s + 1]);
            }
            if s + 2 < s_len && can_skip(s + 2) {
                terms.push(beta[t + 1][s + 2]);
            }
            let inc = log_sum_exp(terms);
            if inc != neg {
                beta[t][s] = inc + ln_y[t][aug(s) as usize];
            }
        }
    }

    // alpha and beta both include the frame-t emission; subtract one copy.
    let mut grad = vec![vec![0.0; classes]; t_len];
    for t in 0..t_len {
        let mut per_class = vec![neg; classes];
        for s in 0..s_len {
            let g = alpha[t][s] + beta[t][s] - ln_y[t][aug(s) as usize];
            let k = aug(s) as usize;
            per_class[k] = log_sum_exp([per_class[k], g]);
        }
        for k in 0..classes {
            let posterior = if per_class[k] == neg {
                0.0
            } else {
                (per_class[k] - ln_p).exp()
            };
            grad[t][k] = lattice.rows()[t][k] - posterior;
        }
    }

    Ok(CtcResult { loss: -ln_p, grad })
}

/// Greedy decode: per-frame argmax (ties to the lowest class index), drop
/// adjacent duplicates, drop blanks.
pub fn best_path_decode(lattice: &OutputLattice) -> Vec<u32> {
    let blank = lattice.blank() as u32;
    let mut out = Vec::new();
    let mut prev = u32::MAX;
    for row in lattice.rows() {
        let mut arg = 0u32;
        let mut best = row[0];
        for (k, &p) in row.iter().enumerate().skip(1) {
            if p > best {
                best = p;
                arg = k as u32;
            }
        }
        if arg != prev && arg != blank {
            out.push(arg);
        }
        prev = arg;
    }
    out
}

/// Levenshtein distance with unit costs.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, av) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, bv) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(av != bv);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}
