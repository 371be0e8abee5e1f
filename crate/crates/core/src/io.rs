//! Fiducial text files and input digests.
//!
//! Format: `#` lines carry `key: value` metadata, the first other line is the
//! dimension, then one `re im` pair per line.

use std::fs;
use std::path::Path;

use num_complex::Complex64 as C64;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::CVec;
use crate::sic::{Centring, Fiducial};

/// Inputs within this distance of unit norm are kept bit for bit.
const UNIT_NORM_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct FiducialFile {
    pub fiducial: Fiducial,
    pub metadata: Vec<(String, String)>,
}

impl FiducialFile {
    pub fn new(fiducial: Fiducial) -> Self {
        let metadata =
            if fiducial.label.is_empty() { Vec::new() } else { vec![("label".into(), fiducial.label.clone())] };
        Self { fiducial, metadata }
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<String>) -> Self {
        self.metadata.retain(|(k, _)| k != key);
        self.metadata.push((key.into(), value.into()));
        self
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_float(tok: &str, line: usize) -> Result<f64> {
    let x: f64 = tok.parse().map_err(|_| parse_err(line, format!("not a number: {tok:?}")))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(parse_err(line, format!("non-finite value {tok:?}")))
    }
}

pub fn parse_fiducial(text: &str) -> Result<FiducialFile> {
    let mut metadata = Vec::new();
    let mut dim: Option<usize> = None;
    let mut comps: Vec<C64> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let s = raw.trim();
        if s.is_empty() {
            continue;
        }
        if let Some(rest) = s.strip_prefix('#') {
            if let Some((key, value)) = rest.split_once(':') {
                metadata.push((key.trim().to_string(), value.trim().to_string()));
            }
            continue;
        }
        let toks: Vec<&str> = s.split_whitespace().collect();
        match dim {
            None => {
                if toks.len() != 1 {
                    return Err(parse_err(line, "expected the dimension"));
                }
                let d: usize = toks[0].parse().map_err(|_| parse_err(line, format!("bad dimension {:?}", toks[0])))?;
                if d < 2 {
                    return Err(parse_err(line, format!("dimension {d} < 2")));
                }
                dim = Some(d);
            }
            Some(d) => {
                if toks.len() != 2 {
                    return Err(parse_err(line, "expected `re im`"));
                }
                if comps.len() == d {
                    return Err(parse_err(line, format!("more than {d} components")));
                }
                comps.push(C64::new(parse_float(toks[0], line)?, parse_float(toks[1], line)?));
            }
        }
    }
    let d = dim.ok_or_else(|| parse_err(0, "missing dimension line"))?;
    if comps.len() != d {
        return Err(parse_err(0, format!("{} components for dimension {d}", comps.len())));
    }
    let v = CVec::from_vec(comps);
    let label = metadata.iter().find(|(k, _)| k == "label").map(|(_, v)| v.clone()).unwrap_or_default();
    let fiducial = if (v.norm() - 1.0).abs() <= UNIT_NORM_TOL {
        Fiducial { dim: d, components: v, label, centring: Centring::Unknown }
    } else {
        Fiducial::new(v, label)?
    };
    Ok(FiducialFile { fiducial, metadata })
}

/// `{:.16e}` keeps 17 significant digits, enough to round-trip any f64.
pub fn format_fiducial(file: &FiducialFile) -> String {
    let mut out = String::new();
    for (k, v) in &file.metadata {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    out.push_str(&format!("{}\n", file.fiducial.dim));
    for z in file.fiducial.components.iter() {
        out.push_str(&format!("{:.16e} {:.16e}\n", z.re, z.im));
    }
    out
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), msg: e.to_string() }
}

/// Parsed file plus the SHA-256 of its bytes.
pub fn read_fiducial(path: &Path) -> Result<(FiducialFile, String)> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| parse_err(0, "file is not UTF-8"))?;
    Ok((parse_fiducial(&text)?, sha256_hex(&bytes)))
}

pub fn write_fiducial(path: &Path, file: &FiducialFile) -> Result<()> {
    fs::write(path, format_fiducial(file)).map_err(|e| io_err(path, e))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
