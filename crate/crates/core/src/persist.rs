//! Plain-text weight files.
//!
//! ```text
//! threshold-rl-weights 1
//! layers 2 3 1
//! thresholds 0 0.5 0.5
//! thresholds 1 0.5 0.5 0.5
//! thresholds 2 0.5
//! weights 1 <rows x cols values, row-major>
//! bias 1 <one value per node>
//! weights 2 ...
//! bias 2 ...
//! ```
//!
//! Layer indices name the postsynaptic layer. Values use Rust's shortest
//! round-trip float formatting, so a save/load cycle is bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::network::{Matrix, Network};

pub const FORMAT_ID: &str = "threshold-rl-weights";
pub const FORMAT_VERSION: u32 = 1;

fn push_values(out: &mut String, values: &[f64]) {
    for v in values {
        write!(out, " {v:?}").unwrap();
    }
    out.push('\n');
}

pub fn weights_to_string(net: &Network) -> String {
    let mut out = format!("{FORMAT_ID} {FORMAT_VERSION}\nlayers");
    for n in net.layer_sizes() {
        write!(out, " {n}").unwrap();
    }
    out.push('\n');
    for (l, th) in net.thresholds().iter().enumerate() {
        write!(out, "thresholds {l}").unwrap();
        push_values(&mut out, th);
    }
    for (l, (w, b)) in net.weights().iter().zip(net.biases()).enumerate() {
        write!(out, "weights {}", l + 1).unwrap();
        push_values(&mut out, w.as_slice());
        write!(out, "bias {}", l + 1).unwrap();
        push_values(&mut out, b);
    }
    out
}

pub fn save_weights(net: &Network, destination: impl AsRef<Path>) -> Result<()> {
    fs::write(destination, weights_to_string(net))?;
    Ok(())
}

pub fn load_weights(source: impl AsRef<Path>) -> Result<Network> {
    weights_from_str(&fs::read_to_string(source)?)
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate().peekable(),
            last: 0,
        }
    }

    /// Next non-blank, non-comment line as (line number, tokens).
    fn next_record(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            return Some((i + 1, line.split_whitespace().collect()));
        }
        None
    }

    fn expect(&mut self, keyword: &str) -> Result<(usize, Vec<&'a str>)> {
        match self.next_record() {
            Some((line, tokens)) if tokens[0] == keyword => Ok((line, tokens)),
            Some((line, tokens)) => Err(Error::WeightFile {
                line,
                message: format!("expected `{keyword}`, found `{}`", tokens[0]),
            }),
            None => Err(Error::WeightFile {
                line: self.last + 1,
                message: format!("unexpected end of file, expected `{keyword}`"),
            }),
        }
    }
}

fn parse_index(line: usize, tokens: &[&str], expected: usize) -> Result<()> {
    let found = tokens.get(1).ok_or_else(|| Error::WeightFile {
        line,
        message: format!("`{}` is missing its layer index", tokens[0]),
    })?;
    match found.parse::<usize>() {
        Ok(i) if i == expected => Ok(()),
        _ => Err(Error::WeightFile {
            line,
            message: format!("expected `{} {expected}`, found `{} {found}`", tokens[0], tokens[0]),
        }),
    }
}

fn parse_values(line: usize, tokens: &[&str], what: &str, expected: usize) -> Result<Vec<f64>> {
    let values = tokens[2..]
        .iter()
        .map(|t| {
            t.parse::<f64>().map_err(|_| Error::WeightFile {
                line,
                message: format!("{what}: `{t}` is not a number"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if values.len() != expected {
        return Err(Error::WeightFile {
            line,
            message: format!("{what}: expected {expected} values, found {}", values.len()),
        });
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::WeightFile {
            line,
            message: format!("{what}: non-finite value {v}"),
        });
    }
    Ok(values)
}

pub fn weights_from_str(text: &str) -> Result<Network> {
    let mut lines = Lines::new(text);
    let (line, header) = lines.next_record().ok_or(Error::WeightFile {
        line: 1,
        message: "empty weight file".into(),
    })?;
    if header.first() != Some(&FORMAT_ID) {
        return Err(Error::WeightFile {
            line,
            message: format!("not a {FORMAT_ID} document"),
        });
    }
    match header.get(1).and_then(|v| v.parse::<u32>().ok()) {
        Some(FORMAT_VERSION) => {}
        Some(v) => {
            return Err(Error::WeightFile {
                line,
                message: format!("unsupported version {v}, expected {FORMAT_VERSION}"),
            })
        }
        None => {
            return Err(Error::WeightFile {
                line,
                message: "missing format version".into(),
            })
        }
    }

    let (line, tokens) = lines.expect("layers")?;
    let sizes = tokens[1..]
        .iter()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::WeightFile {
            line,
            message: "layer sizes must be non-negative integers".into(),
        })?;
    if sizes.len() < 2 || sizes.contains(&0) {
        return Err(Error::WeightFile {
            line,
            message: format!("invalid layer sizes {sizes:?}"),
        });
    }

    let mut thresholds = Vec::with_capacity(sizes.len());
    for (l, &n) in sizes.iter().enumerate() {
        let (line, tokens) = lines.expect("thresholds")?;
        parse_index(line, &tokens, l)?;
        thresholds.push(parse_values(line, &tokens, &format!("thresholds of layer {l}"), n)?);
    }

    let mut weights = Vec::with_capacity(sizes.len() - 1);
    let mut biases = Vec::with_capacity(sizes.len() - 1);
    for l in 1..sizes.len() {
        let (fan_in, fan_out) = (sizes[l - 1], sizes[l]);
        let (line, tokens) = lines.expect("weights")?;
        parse_index(line, &tokens, l)?;
        let data = parse_values(line, &tokens, &format!("weights into layer {l}"), fan_in * fan_out)?;
        weights.push(Matrix::from_vec(fan_out, fan_in, data)?);
        let (line, tokens) = lines.expect("bias")?;
        parse_index(line, &tokens, l)?;
        biases.push(parse_values(line, &tokens, &format!("bias of layer {l}"), fan_out)?);
    }
    if let Some((line, tokens)) = lines.next_record() {
        return Err(Error::WeightFile {
            line,
            message: format!("unexpected trailing record `{}`", tokens[0]),
        });
    }
    Network::from_parts(sizes, weights, biases, Some(thresholds))
}
