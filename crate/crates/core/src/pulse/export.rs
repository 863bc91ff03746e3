// SPDX-License-Identifier: Apache-2.0
//! QSEQ binary and per-port CSV serialization of channel lists.

use super::{ChannelList, SequenceMatrix, CHANNELS};
use crate::error::{Error, Result};
use std::fs;
use std::path::{Path, PathBuf};

pub const MAGIC: &[u8; 4] = b"QSEQ";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 14;

/// Port names in file order: CH1, CH1M1, CH1M2, ..., CH4M2.
pub fn port_names() -> Vec<String> {
    (1..=CHANNELS)
        .flat_map(|c| [format!("CH{c}"), format!("CH{c}M1"), format!("CH{c}M2")])
        .collect()
}

fn header(steps: usize, points: usize) -> Result<Vec<u8>> {
    let s = u32::try_from(steps).map_err(|_| Error::Format("too many steps".into()))?;
    let p = u32::try_from(points).map_err(|_| Error::Format("too many points".into()))?;
    let mut out = Vec::with_capacity(HEADER_LEN);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&s.to_le_bytes());
    out.extend_from_slice(&p.to_le_bytes());
    Ok(out)
}

fn parse_header(bytes: &[u8]) -> Result<(usize, usize)> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(Error::Format("missing QSEQ header".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported QSEQ version {version}")));
    }
    let steps = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
    let points = u32::from_le_bytes(bytes[10..14].try_into().unwrap()) as usize;
    Ok((steps, points))
}

fn push_samples(out: &mut Vec<u8>, m: &SequenceMatrix) {
    for v in m.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

fn read_samples(bytes: &[u8]) -> Vec<f32> {
    bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect()
}

/// A single matrix: header followed by its row-major samples.
pub fn encode_matrix(m: &SequenceMatrix) -> Result<Vec<u8>> {
    let mut out = header(m.steps(), m.points())?;
    push_samples(&mut out, m);
    Ok(out)
}

pub fn decode_matrix(bytes: &[u8]) -> Result<SequenceMatrix> {
    let (steps, points) = parse_header(bytes)?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 4 * steps * points {
        return Err(Error::Format(format!(
            "expected {} payload bytes, got {}",
            4 * steps * points,
            body.len()
        )));
    }
    SequenceMatrix::from_rows(steps, points, read_samples(body))
        .map_err(|e| Error::Format(e.to_string()))
}

pub fn encode(cl: &ChannelList) -> Result<Vec<u8>> {
    let mut out = header(cl.steps(), cl.points())?;
    out.reserve(12 * 4 * cl.steps() * cl.points());
    for m in cl.ports() {
        push_samples(&mut out, m);
    }
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<ChannelList> {
    let (steps, points) = parse_header(bytes)?;
    let n = steps * points;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 12 * 4 * n {
        return Err(Error::Format(format!(
            "expected {} payload bytes, got {}",
            12 * 4 * n,
            body.len()
        )));
    }
    let ports = body
        .chunks_exact(4 * n)
        .map(|c| SequenceMatrix::from_rows(steps, points, read_samples(c)))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::Format(e.to_string()))?;
    ChannelList::from_ports(ports)
}

pub fn write_qseq(cl: &ChannelList, path: &Path) -> Result<()> {
    fs::write(path, encode(cl)?)?;
    Ok(())
}

pub fn read_qseq(path: &Path) -> Result<ChannelList> {
    decode(&fs::read(path)?)
}

fn csv_path(dir: &Path, stem: &str, port: &str) -> PathBuf {
    dir.join(format!("{stem}_{port}.csv"))
}

fn matrix_csv(m: &SequenceMatrix) -> String {
    let mut s = String::new();
    for k in 0..m.steps() {
        let row: Vec<String> = m.row(k).iter().map(|v| v.to_string()).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// Writes one `<stem>_<port>.csv` per port into `dir`; rows are steps.
pub fn write_csv(cl: &ChannelList, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (m, name) in cl.ports().zip(port_names()) {
        let path = csv_path(dir, stem, &name);
        fs::write(&path, matrix_csv(m))?;
        written.push(path);
    }
    Ok(written)
}

pub fn read_csv(dir: &Path, stem: &str) -> Result<ChannelList> {
    let ports = port_names()
        .iter()
        .map(|name| {
            let text = fs::read_to_string(csv_path(dir, stem, name))?;
            let rows: Vec<Vec<f32>> = text
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(|l| {
                    l.split(',')
                        .map(|v| {
                            v.trim()
                                .parse::<f32>()
                                .map_err(|e| Error::Format(format!("{name}: {e}")))
                        })
                        .collect()
                })
                .collect::<Result<_>>()?;
            let points = rows.first().map_or(0, Vec::len);
            if rows.iter().any(|r| r.len() != points) {
                return Err(Error::Format(format!("{name}: ragged rows")));
            }
            SequenceMatrix::from_rows(rows.len(), points, rows.concat())
                .map_err(|e| Error::Format(e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    ChannelList::from_ports(ports)
}
