//! File formats.
//!
//! Frame stack (`.gmf`): the magic bytes `GMF1`, then little-endian `u32`
//! version, `u32` pixel count P, `u32` frame count R, then `R·P`
//! little-endian `f32` intensities, frame-major. A UTF-8 JSON sidecar with
//! the same stem (`stack.gmf` → `stack.json`) holds the pixel angles, the
//! generating metadata and the resolved run configuration.
//!
//! Curves are CSV with the header `theta2,value,stderr` (the `stderr`
//! column is optional). Numbers are written in shortest round-trip form.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{FrameStack, StackMeta};
use crate::model::CorrelationCurve;

pub const GMF_MAGIC: &[u8; 4] = b"GMF1";
pub const GMF_VERSION: u32 = 1;
const GMF_HEADER_LEN: usize = 16;

/// Sidecar path of a frame-stack file.
pub fn stack_sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Sidecar path of a curve or report file (`g4.csv` → `g4.csv.json`).
pub fn output_sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

/// Raw frame-stack body as stored on disk.
pub fn encode_gmf(stack: &FrameStack<f64>) -> Vec<u8> {
    let mut out = Vec::with_capacity(GMF_HEADER_LEN + 4 * stack.intensities().len());
    out.extend_from_slice(GMF_MAGIC);
    out.extend_from_slice(&GMF_VERSION.to_le_bytes());
    out.extend_from_slice(&(stack.pixels() as u32).to_le_bytes());
    out.extend_from_slice(&(stack.frames() as u32).to_le_bytes());
    for &v in stack.intensities() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

/// Parses a `.gmf` body into `(pixels, frames, intensities)`.
pub fn decode_gmf(bytes: &[u8]) -> Result<(usize, usize, Vec<f64>)> {
    if bytes.len() < GMF_HEADER_LEN || &bytes[..4] != GMF_MAGIC {
        return Err(Error::Format("not a GMF1 frame stack".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4-byte slice"));
    let version = word(4);
    if version != GMF_VERSION {
        return Err(Error::Format(format!("unsupported GMF version {version}")));
    }
    let (pixels, frames) = (word(8) as usize, word(12) as usize);
    let expected = pixels
        .checked_mul(frames)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::Format("frame stack dimensions overflow".into()))?;
    let body = &bytes[GMF_HEADER_LEN..];
    if body.len() != expected {
        return Err(Error::Format(format!(
            "expected {expected} bytes of intensities for {frames}×{pixels}, found {}",
            body.len()
        )));
    }
    let values = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4-byte chunk")) as f64)
        .collect();
    Ok((pixels, frames, values))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StackSidecar {
    pub pixel_angles: Vec<f64>,
    pub meta: Option<StackMeta<f64>>,
    pub config: serde_json::Value,
}

/// Writes `path` and its sidecar.
pub fn write_stack<C: Serialize>(path: &Path, stack: &FrameStack<f64>, config: &C) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    f.write_all(&encode_gmf(stack))?;
    f.flush()?;
    let sidecar = StackSidecar {
        pixel_angles: stack.pixel_angles().to_vec(),
        meta: stack.meta,
        config: serde_json::to_value(config)?,
    };
    write_json(&stack_sidecar_path(path), &sidecar)
}

/// Reads a stack and its sidecar. Intensities come back as the stored
/// `f32` values widened to `f64`.
pub fn read_stack(path: &Path) -> Result<(FrameStack<f64>, StackSidecar)> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    let (pixels, frames, values) = decode_gmf(&bytes)?;
    let sidecar: StackSidecar = read_json(&stack_sidecar_path(path))?;
    if sidecar.pixel_angles.len() != pixels {
        return Err(Error::Format(format!(
            "sidecar lists {} pixel angles for a {pixels}-pixel stack",
            sidecar.pixel_angles.len()
        )));
    }
    let mut stack = FrameStack::new(sidecar.pixel_angles.clone(), frames, values)
        .map_err(|e| Error::Format(e.to_string()))?;
    stack.meta = sidecar.meta;
    Ok((stack, sidecar))
}

pub fn write_json<V: Serialize>(path: &Path, value: &V) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

pub fn read_json<V: for<'de> Deserialize<'de>>(path: &Path) -> Result<V> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

/// Serializes a curve as CSV text.
pub fn curve_to_csv(curve: &CorrelationCurve<f64>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    match curve.stderr() {
        Some(se) => {
            w.write_record(["theta2", "value", "stderr"])?;
            for ((t, v), s) in curve.theta2().iter().zip(curve.values()).zip(se) {
                w.write_record([t.to_string(), v.to_string(), s.to_string()])?;
            }
        }
        None => {
            w.write_record(["theta2", "value"])?;
            for (t, v) in curve.theta2().iter().zip(curve.values()) {
                w.write_record([t.to_string(), v.to_string()])?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn write_curve(path: &Path, curve: &CorrelationCurve<f64>) -> Result<()> {
    std::fs::write(path, curve_to_csv(curve)?)?;
    Ok(())
}

/// Parses CSV text written by [`curve_to_csv`] (or by hand, same schema).
pub fn curve_from_csv<R: Read>(reader: R) -> Result<CorrelationCurve<f64>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    let has_stderr = match header.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["theta2", "value"] => false,
        ["theta2", "value", "stderr"] => true,
        other => return Err(Error::Format(format!("unexpected curve header {other:?}"))),
    };
    let (mut theta2, mut values, mut stderr) = (Vec::new(), Vec::new(), Vec::new());
    for (line, record) in r.records().enumerate() {
        let record = record?;
        let field = |i: usize| -> Result<f64> {
            let raw = record.get(i).ok_or_else(|| Error::Format(format!("row {} is short", line + 1)))?;
            raw.parse::<f64>().map_err(|_| Error::Format(format!("row {}: cannot parse {raw:?}", line + 1)))
        };
        theta2.push(field(0)?);
        values.push(field(1)?);
        if has_stderr {
            stderr.push(field(2)?);
        }
    }
    CorrelationCurve::new(theta2, values, has_stderr.then_some(stderr)).map_err(|e| Error::Format(e.to_string()))
}

pub fn read_curve(path: &Path) -> Result<CorrelationCurve<f64>> {
    curve_from_csv(BufReader::new(File::open(path)?))
}
