//! Model file format.
//!
//! A short text header (architecture) followed by the raw parameter block:
//!
//! ```text
//! veritext-model v1
//! input <D>
//! classes <K+1>
//! hidden <H1> <H2> ...
//! ff <F1> ...
//! params <count>
//! <count little-endian f64 values>
//! ```
//!
//! The parameter block uses the canonical order documented on
//! [`DeepBlstm::flatten`], making save/load bit-exact.

use std::io::Write as _;
use std::path::Path;

use super::DeepBlstm;
use crate::error::{Error, Result};

pub fn save_model(net: &DeepBlstm, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let flat = net.flatten();
    let mut buf = Vec::with_capacity(128 + 8 * flat.len());
    writeln!(buf, "veritext-model v1").unwrap();
    writeln!(buf, "input {}", net.input_size()).unwrap();
    writeln!(buf, "classes {}", net.classes()).unwrap();
    let hidden: Vec<String> = net.hidden_sizes().iter().map(|h| h.to_string()).collect();
    writeln!(buf, "hidden {}", hidden.join(" ")).unwrap();
    let ff: Vec<String> = net.ff.iter().map(|f| f.w.rows.to_string()).collect();
    writeln!(buf, "ff {}", ff.join(" ")).unwrap();
    writeln!(buf, "params {}", flat.len()).unwrap();
    for v in &flat {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<DeepBlstm> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let bad = |msg: &str| Error::ModelFormat(msg.to_string());

    let mut lines: Vec<&str> = Vec::with_capacity(6);
    let mut pos = 0usize;
    while lines.len() < 6 {
        let start = pos;
        while pos < bytes.len() && bytes[pos] != b'\n' {
            pos += 1;
        }
        if pos == bytes.len() {
            return Err(bad("truncated header"));
        }
        let line = std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("non-UTF-8 header"))?;
        lines.push(line);
        pos += 1;
    }

    if lines[0] != "veritext-model v1" {
        return Err(bad("bad magic line"));
    }
    let field = |line: &str, key: &str| -> Result<Vec<usize>> {
        let mut tok = line.split_whitespace();
        if tok.next() != Some(key) {
            return Err(Error::ModelFormat(format!("expected `{key}` line")));
        }
        tok.map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::ModelFormat(format!("bad number in `{key}` line")))
        })
        .collect()
    };
    let input = field(lines[1], "input")?;
    let classes = field(lines[2], "classes")?;
    let hidden = field(lines[3], "hidden")?;
    let ff = field(lines[4], "ff")?;
    let params = field(lines[5], "params")?;
    let (&[input], &[classes], &[count]) = (&input[..], &classes[..], &params[..]) else {
        return Err(bad("malformed scalar header field"));
    };
    if input < 1 || classes < 2 || hidden.is_empty() || hidden.contains(&0) {
        return Err(bad("degenerate architecture"));
    }

    let mut net = DeepBlstm::zeros(input, &hidden, classes - 1);
    let expect_ff: Vec<usize> = net.ff.iter().map(|f| f.w.rows).collect();
    if ff != expect_ff {
        return Err(bad("feedforward widths do not match the architecture"));
    }
    if count != net.count_weights() {
        return Err(bad("parameter count does not match the architecture"));
    }
    let body = &bytes[pos..];
    if body.len() != 8 * count {
        return Err(bad("parameter block length mismatch"));
    }
    let flat: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if flat.iter().any(|v| !v.is_finite()) {
        return Err(bad("non-finite parameter"));
    }
    net.set_from_flat(&flat)?;
    Ok(net)
}
