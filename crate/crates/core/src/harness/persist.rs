//! Plain-text model files.
//!
//! ```text
//! STDPNET v1
//! dims 784 32 16 1
//! signs 1 1 -1 -1 1 ...
//! signs 2 ...
//! signs 3 1
//! weights 0
//! <one line per row, space separated>
//! weights 1
//! ...
//! ```
//!
//! Floats are written in Rust's shortest round-trip form, so loading
//! reproduces every weight bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;

use crate::associativity::AssociativityMap;
use crate::error::{io_err, Error, Result};
use crate::network::Network;
use crate::rule::Sign;

pub const MODEL_HEADER: &str = "STDPNET v1";

pub fn write_model(net: &Network, assoc: &AssociativityMap) -> Result<String> {
    if !assoc.widths().eq(net.layer_dims()[1..].iter().copied()) {
        return Err(Error::Shape(
            "associativity map does not match network".into(),
        ));
    }
    let mut out = String::new();
    let join = |it: &mut dyn Iterator<Item = String>| it.collect::<Vec<_>>().join(" ");
    writeln!(out, "{MODEL_HEADER}").unwrap();
    writeln!(
        out,
        "dims {}",
        join(&mut net.layer_dims().iter().map(|d| d.to_string()))
    )
    .unwrap();
    for (k, signs) in assoc.layers().iter().enumerate() {
        writeln!(
            out,
            "signs {} {}",
            k + 1,
            join(&mut signs.iter().map(|s| s.as_i32().to_string()))
        )
        .unwrap();
    }
    for (l, w) in net.weights().iter().enumerate() {
        writeln!(out, "weights {l}").unwrap();
        for row in w.rows() {
            writeln!(out, "{}", join(&mut row.iter().map(|v| format!("{v:?}")))).unwrap();
        }
    }
    Ok(out)
}

pub fn save_model(net: &Network, assoc: &AssociativityMap, path: &Path) -> Result<()> {
    std::fs::write(path, write_model(net, assoc)?).map_err(io_err(path))
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        self.inner.next().map(|(i, l)| (i + 1, l.trim()))
    }

    fn peek_keyword(&mut self) -> Option<&'a str> {
        self.inner
            .peek()
            .map(|(_, l)| l.split_whitespace().next().unwrap_or(""))
    }
}

fn bad(line: usize, reason: impl Into<String>) -> Error {
    Error::ModelFormat {
        line,
        reason: reason.into(),
    }
}

fn keyword_line<'a>(lines: &mut Lines<'a>, keyword: &str) -> Result<(usize, Vec<&'a str>)> {
    let (n, line) = lines
        .next()
        .ok_or_else(|| bad(0, format!("unexpected end of file, expected {keyword:?}")))?;
    let mut parts = line.split_whitespace();
    if parts.next() != Some(keyword) {
        return Err(bad(n, format!("expected {keyword:?} line")));
    }
    Ok((n, parts.collect()))
}

fn parse_num<T: std::str::FromStr>(n: usize, tok: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| bad(n, format!("cannot parse {tok:?}")))
}

pub fn read_model(text: &str) -> Result<(Network, AssociativityMap)> {
    let mut lines = Lines {
        inner: text.lines().enumerate().peekable(),
    };
    match lines.next() {
        Some((_, MODEL_HEADER)) => {}
        Some((_, other)) => return Err(Error::ModelVersion(other.to_string())),
        None => return Err(Error::ModelVersion(String::new())),
    }

    let (n, toks) = keyword_line(&mut lines, "dims")?;
    let dims: Vec<usize> = toks
        .iter()
        .map(|t| parse_num(n, t))
        .collect::<Result<_>>()?;
    if dims.len() < 2 || dims.contains(&0) {
        return Err(bad(n, format!("invalid dims {dims:?}")));
    }

    let mut signs = Vec::with_capacity(dims.len() - 1);
    for (k, &width) in dims.iter().enumerate().skip(1) {
        let (n, toks) = keyword_line(&mut lines, "signs")?;
        let (layer, rest) = toks
            .split_first()
            .ok_or_else(|| bad(n, "missing layer index"))?;
        if parse_num::<usize>(n, layer)? != k {
            return Err(bad(n, format!("expected signs for layer {k}")));
        }
        if rest.len() != width {
            return Err(Error::Shape(format!(
                "line {n}: layer {k} has {width} neurons but {} signs",
                rest.len()
            )));
        }
        let layer_signs = rest
            .iter()
            .map(|t| {
                parse_num::<i32>(n, t).and_then(|v| {
                    Sign::from_i32(v).ok_or_else(|| bad(n, format!("bad sign {t:?}")))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        signs.push(layer_signs);
    }

    let mut weights = Vec::with_capacity(dims.len() - 1);
    for (l, pair) in dims.windows(2).enumerate() {
        let (n, toks) = keyword_line(&mut lines, "weights")?;
        if toks != [l.to_string().as_str()] {
            return Err(bad(n, format!("expected weights for layer {l}")));
        }
        let (n_in, n_out) = (pair[0], pair[1]);
        let mut values = Vec::with_capacity(n_in * n_out);
        let mut rows = 0;
        while !matches!(lines.peek_keyword(), None | Some("weights")) {
            let (n, line) = lines.next().unwrap();
            let before = values.len();
            for tok in line.split_whitespace() {
                values.push(parse_num::<f64>(n, tok)?);
            }
            if values.len() - before != n_in {
                return Err(Error::Shape(format!(
                    "line {n}: weights[{l}] row has {} values, expected {n_in}",
                    values.len() - before
                )));
            }
            rows += 1;
        }
        if rows != n_out {
            return Err(Error::Shape(format!(
                "weights[{l}] has {rows} rows but dims say {n_out}"
            )));
        }
        weights.push(Array2::from_shape_vec((n_out, n_in), values).expect("shape checked"));
    }
    if let Some((n, _)) = lines.next() {
        return Err(bad(n, "trailing content"));
    }
    Ok((
        Network::from_weights(weights)?,
        AssociativityMap::from_signs(signs)?,
    ))
}

pub fn load_model(path: &Path) -> Result<(Network, AssociativityMap)> {
    read_model(&std::fs::read_to_string(path).map_err(io_err(path))?)
}
