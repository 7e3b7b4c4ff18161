//! On-disk formats.
//!
//! Text files hold one sequence per line with values separated by single
//! spaces. Feature and codebook files are a small little-endian binary
//! container: 4 magic bytes, a version byte, `u32` rows, `u32` dims, then
//! `rows * dims` `f32` values in row-major order.

use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::quantize::{Codebook, FeatureMatrix};
use crate::units::UnitId;

pub const FEATURE_MAGIC: [u8; 4] = *b"UFLT";
pub const CODEBOOK_MAGIC: [u8; 4] = *b"UFCB";
pub const FORMAT_VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 1 + 4 + 4;

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// so a failed write never leaves a partial file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn parse_lines<T, F>(text: &str, mut parse: F) -> Result<Vec<Vec<T>>>
where
    F: FnMut(&str) -> Result<T>,
{
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            line.split_ascii_whitespace()
                .map(&mut parse)
                .collect::<Result<Vec<T>>>()
                .map_err(|e| e.at_line(i + 1))
        })
        .collect()
}

pub fn parse_unit_lines(text: &str) -> Result<Vec<Vec<UnitId>>> {
    parse_lines(text, |tok| {
        tok.parse::<UnitId>()
            .map_err(|_| Error::Parse(format!("'{tok}' is not a unit id")))
    })
}

/// Real-valued durations (predictions).
pub fn parse_real_duration_lines(text: &str) -> Result<Vec<Vec<f64>>> {
    parse_lines(text, |tok| {
        tok.parse::<f64>()
            .map_err(|_| Error::Parse(format!("'{tok}' is not a number")))
    })
}

/// Integer durations (realized frame counts).
pub fn parse_int_duration_lines(text: &str) -> Result<Vec<Vec<usize>>> {
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            let signed = line
                .split_ascii_whitespace()
                .map(|tok| {
                    tok.parse::<i64>()
                        .map_err(|_| Error::Parse(format!("'{tok}' is not an integer duration")))
                })
                .collect::<Result<Vec<i64>>>();
            signed
                .and_then(|d| crate::units::to_unsigned_durations(&d))
                .map_err(|e| e.at_line(i + 1))
        })
        .collect()
}

/// One non-negative integer per line.
pub fn parse_lengths(text: &str) -> Result<Vec<usize>> {
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            let tok = line.trim();
            tok.parse::<usize>()
                .map_err(|_| Error::Parse(format!("'{tok}' is not a length")).at_line(i + 1))
        })
        .collect()
}

/// Space-separated values, one line per sequence, each line newline-terminated.
pub fn format_lines<T: Display>(lines: &[Vec<T>]) -> String {
    let mut out = String::new();
    for line in lines {
        let mut first = true;
        for v in line {
            if !first {
                out.push(' ');
            }
            first = false;
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

pub fn format_lengths(lengths: &[usize]) -> String {
    lengths.iter().map(|l| format!("{l}\n")).collect()
}

fn read_text(path: &Path) -> Result<String> {
    Ok(fs::read_to_string(path)?)
}

pub fn read_unit_file(path: &Path) -> Result<Vec<Vec<UnitId>>> {
    parse_unit_lines(&read_text(path)?)
}

pub fn read_real_duration_file(path: &Path) -> Result<Vec<Vec<f64>>> {
    parse_real_duration_lines(&read_text(path)?)
}

pub fn read_int_duration_file(path: &Path) -> Result<Vec<Vec<usize>>> {
    parse_int_duration_lines(&read_text(path)?)
}

pub fn read_lengths_file(path: &Path) -> Result<Vec<usize>> {
    parse_lengths(&read_text(path)?)
}

pub fn write_lines<T: Display>(path: &Path, lines: &[Vec<T>]) -> Result<()> {
    write_atomic(path, format_lines(lines).as_bytes())
}

fn encode_matrix(magic: [u8; 4], m: &FeatureMatrix) -> Result<Vec<u8>> {
    let rows = u32::try_from(m.rows()).map_err(|_| Error::Format("too many rows".into()))?;
    let dims = u32::try_from(m.dims()).map_err(|_| Error::Format("too many dims".into()))?;
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * m.data().len());
    out.extend_from_slice(&magic);
    out.push(FORMAT_VERSION);
    out.extend_from_slice(&rows.to_le_bytes());
    out.extend_from_slice(&dims.to_le_bytes());
    for &v in m.data() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    Ok(out)
}

fn decode_matrix(magic: [u8; 4], bytes: &[u8]) -> Result<FeatureMatrix> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "file is {} bytes, shorter than the header",
            bytes.len()
        )));
    }
    if bytes[..4] != magic {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&bytes[..4]),
            String::from_utf8_lossy(&magic)
        )));
    }
    if bytes[4] != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported version {}", bytes[4])));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes")) as usize;
    let (rows, dims) = (word(5), word(9));
    let expected = rows
        .checked_mul(dims)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::Format("header sizes overflow".into()))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != expected {
        return Err(Error::Format(format!(
            "{rows}x{dims} matrix needs {expected} payload bytes, found {}",
            payload.len()
        )));
    }
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
        .collect();
    FeatureMatrix::new(rows, dims, data)
}

pub fn encode_features(m: &FeatureMatrix) -> Result<Vec<u8>> {
    encode_matrix(FEATURE_MAGIC, m)
}

pub fn decode_features(bytes: &[u8]) -> Result<FeatureMatrix> {
    decode_matrix(FEATURE_MAGIC, bytes)
}

pub fn encode_codebook(cb: &Codebook) -> Result<Vec<u8>> {
    encode_matrix(CODEBOOK_MAGIC, cb.centroids())
}

pub fn decode_codebook(bytes: &[u8]) -> Result<Codebook> {
    Codebook::new(decode_matrix(CODEBOOK_MAGIC, bytes)?)
}

pub fn read_features(path: &Path) -> Result<FeatureMatrix> {
    decode_features(&fs::read(path)?)
}

pub fn write_features(path: &Path, m: &FeatureMatrix) -> Result<()> {
    write_atomic(path, &encode_features(m)?)
}

pub fn read_codebook(path: &Path) -> Result<Codebook> {
    decode_codebook(&fs::read(path)?)
}

pub fn write_codebook(path: &Path, cb: &Codebook) -> Result<()> {
    write_atomic(path, &encode_codebook(cb)?)
}
