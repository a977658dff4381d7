//! Binary PBM (P4) occupancy plus a JSON sidecar for spacing and origin.
//!
//! Row 0 of the bitmap is the top row of the window (largest second
//! coordinate). A set bit marks an occupied cell.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{GridDomain, DIM};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainMeta {
    pub n: usize,
    pub h: f64,
    pub origin: [f64; 2],
}

/// `shape.pbm` -> `shape.json`.
pub fn sidecar_path(pbm: &Path) -> PathBuf {
    pbm.with_extension("json")
}

pub fn save_domain(d: &GridDomain, path: &Path) -> Result<()> {
    fs::write(path, encode_pbm(d))?;
    let meta = DomainMeta {
        n: DIM,
        h: d.h(),
        origin: d.origin(),
    };
    fs::write(sidecar_path(path), serde_json::to_vec_pretty(&meta)?)?;
    Ok(())
}

/// Loads a bitmap and its sidecar. A bitmap whose border rows or columns are
/// occupied is padded with one empty cell on every side.
pub fn load_domain(path: &Path) -> Result<GridDomain> {
    let bytes = fs::read(path)?;
    let meta: DomainMeta = serde_json::from_slice(&fs::read(sidecar_path(path))?)?;
    if meta.n != DIM {
        return Err(Error::InvalidDomain(format!(
            "sidecar dimension {} is not supported",
            meta.n
        )));
    }
    let (nx, ny, cells) = decode_pbm(&bytes)?;
    match GridDomain::new(nx, ny, meta.h, meta.origin, cells.clone()) {
        Err(Error::InvalidDomain(msg)) if msg.contains("border") => {
            let (px, py) = (nx + 2, ny + 2);
            let mut padded = vec![false; px * py];
            for j in 0..ny {
                padded[(j + 1) * px + 1..(j + 1) * px + 1 + nx]
                    .copy_from_slice(&cells[j * nx..(j + 1) * nx]);
            }
            let origin = [meta.origin[0] - meta.h, meta.origin[1] - meta.h];
            GridDomain::new(px, py, meta.h, origin, padded)
        }
        other => other,
    }
}

pub(crate) fn encode_pbm(d: &GridDomain) -> Vec<u8> {
    let (nx, ny) = (d.nx(), d.ny());
    let mut out = format!("P4\n{nx} {ny}\n").into_bytes();
    let stride = nx.div_ceil(8);
    for row in 0..ny {
        let j = ny - 1 - row;
        let mut bytes = vec![0u8; stride];
        for i in 0..nx {
            if d.is_occupied(i, j) {
                bytes[i / 8] |= 0x80 >> (i % 8);
            }
        }
        out.extend_from_slice(&bytes);
    }
    out
}

pub(crate) fn decode_pbm(bytes: &[u8]) -> Result<(usize, usize, Vec<bool>)> {
    let mut pos = 0;
    let mut token = || -> Result<String> {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&c| c != b'\n') {
                        pos += 1;
                    }
                }
                Some(c) if c.is_ascii_whitespace() => pos += 1,
                Some(_) => break,
                None => return Err(Error::Bitmap("truncated header".into())),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|c| !c.is_ascii_whitespace()) {
            pos += 1;
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    if token()? != "P4" {
        return Err(Error::Bitmap("expected a binary PBM (P4)".into()));
    }
    let parse = |s: String| {
        s.parse::<usize>()
            .map_err(|_| Error::Bitmap(format!("bad dimension `{s}`")))
    };
    let nx = parse(token()?)?;
    let ny = parse(token()?)?;
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let stride = nx.div_ceil(8);
    let data = bytes
        .get(pos..pos + stride * ny)
        .ok_or_else(|| Error::Bitmap("raster shorter than header says".into()))?;
    let mut cells = vec![false; nx * ny];
    for row in 0..ny {
        let j = ny - 1 - row;
        for i in 0..nx {
            cells[j * nx + i] = data[row * stride + i / 8] & (0x80 >> (i % 8)) != 0;
        }
    }
    Ok((nx, ny, cells))
}
