//! Text format for lattice windows.
//!
//! ```text
//! # comment
//! dims 2
//! extents 4 3
//! origin 0 0          (optional, defaults to zeros)
//! mode toroidal       (optional, defaults to open)
//! rle 0*5 1*2 0*5     (may span several lines; row-major, last axis fastest)
//! ```

use std::fmt::Write as _;

use super::{Boundary, SubsetWindow};
use crate::error::{Error, Result};

pub fn parse(text: &str) -> Result<SubsetWindow> {
    let mut dims: Option<usize> = None;
    let mut extents: Option<Vec<usize>> = None;
    let mut origin: Option<Vec<i64>> = None;
    let mut boundary = Boundary::Open;
    let mut mask: Vec<bool> = Vec::new();
    let mut seen_rle = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse(format!("line {}: {msg}", lineno + 1));
        let mut words = line.split_whitespace();
        let key = words.next().unwrap();
        let rest: Vec<&str> = words.collect();
        match key {
            "dims" => {
                let [d] = rest.as_slice() else {
                    return Err(err("`dims` takes one value".into()));
                };
                dims = Some(d.parse().map_err(|_| err(format!("bad dimension `{d}`")))?);
            }
            "extents" => {
                extents = Some(
                    rest.iter()
                        .map(|t| t.parse().map_err(|_| err(format!("bad extent `{t}`"))))
                        .collect::<Result<_>>()?,
                );
            }
            "origin" => {
                origin = Some(
                    rest.iter()
                        .map(|t| t.parse().map_err(|_| err(format!("bad origin coordinate `{t}`"))))
                        .collect::<Result<_>>()?,
                );
            }
            "mode" => {
                boundary = match rest.as_slice() {
                    ["open"] => Boundary::Open,
                    ["toroidal"] => Boundary::Toroidal,
                    _ => return Err(err("mode is `open` or `toroidal`".into())),
                };
            }
            "rle" => {
                seen_rle = true;
                for token in rest {
                    let (bit, count) = token.split_once('*').unwrap_or((token, "1"));
                    let bit = match bit {
                        "0" => false,
                        "1" => true,
                        _ => return Err(err(format!("bad run `{token}`"))),
                    };
                    let count: usize = count.parse().map_err(|_| err(format!("bad run length in `{token}`")))?;
                    mask.extend(std::iter::repeat_n(bit, count));
                }
            }
            other => return Err(err(format!("unknown key `{other}`"))),
        }
    }
    let extents = extents.ok_or_else(|| Error::Parse("missing `extents`".into()))?;
    let d = dims.unwrap_or(extents.len());
    if extents.len() != d {
        return Err(Error::Parse(format!("{} extents for dimension {d}", extents.len())));
    }
    let origin = origin.unwrap_or_else(|| vec![0; d]);
    if origin.len() != d {
        return Err(Error::Parse(format!("{} origin coordinates for dimension {d}", origin.len())));
    }
    if !seen_rle {
        return Err(Error::Parse("missing `rle` mask".into()));
    }
    SubsetWindow::lattice_box(&origin, &extents, mask)?.with_boundary(boundary)
}

pub fn read(path: &std::path::Path) -> Result<SubsetWindow> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse(&text)
}

/// Serializes a lattice window; runs are wrapped at 16 per line.
pub fn render(w: &SubsetWindow) -> Result<String> {
    let (origin, extents) = w
        .lattice_frame()
        .ok_or_else(|| Error::Unsupported("only lattice box windows have a text form".into()))?;
    let join = |v: &[String]| v.join(" ");
    let mut out = String::new();
    writeln!(out, "dims {}", extents.len()).unwrap();
    writeln!(out, "extents {}", join(&extents.iter().map(|e| e.to_string()).collect::<Vec<_>>())).unwrap();
    writeln!(out, "origin {}", join(&origin.iter().map(|e| e.to_string()).collect::<Vec<_>>())).unwrap();
    if w.boundary() == Boundary::Toroidal {
        writeln!(out, "mode toroidal").unwrap();
    }
    let mut runs: Vec<String> = Vec::new();
    let mask = w.mask();
    let mut start = 0;
    while start < mask.len() {
        let bit = mask[start];
        let len = mask[start..].iter().take_while(|&&b| b == bit).count();
        runs.push(format!("{}*{len}", bit as u8));
        start += len;
    }
    for chunk in runs.chunks(16) {
        writeln!(out, "rle {}", chunk.join(" ")).unwrap();
    }
    Ok(out)
}
