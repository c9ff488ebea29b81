//! Binary PGM (P5, maxval 255) rasters with a JSON georeference sidecar.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GeoReference, ImageTensor, LandscapeClass, ProbabilityRaster, RasterError, Result};
use crate::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub bbox: [f64; 4],
    pub width: usize,
    pub height: usize,
    pub class_name: String,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RasterError + '_ {
    move |source| RasterError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Parses a P5 PGM; returns (width, height, bytes).
pub fn read_pgm(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let mut pos = 0;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        // skip whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while !matches!(bytes.get(pos), None | Some(b'\n') | Some(b'\r')) {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(RasterError::Pgm("truncated header".into())),
            }
        }
        let start = pos;
        while matches!(bytes.get(pos), Some(b) if !b.is_ascii_whitespace() && *b != b'#') {
            pos += 1;
        }
        fields.push(&bytes[start..pos]);
    }
    if fields[0] != b"P5" {
        return Err(RasterError::Pgm(format!(
            "magic {:?}, expected P5",
            String::from_utf8_lossy(fields[0])
        )));
    }
    let num = |f: &[u8], what: &str| -> Result<usize> {
        std::str::from_utf8(f)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| RasterError::Pgm(format!("bad {what} {:?}", String::from_utf8_lossy(f))))
    };
    let width = num(fields[1], "width")?;
    let height = num(fields[2], "height")?;
    let maxval = num(fields[3], "maxval")?;
    if maxval != 255 {
        return Err(RasterError::Pgm(format!("maxval {maxval}, expected 255")));
    }
    if width == 0 || height == 0 {
        return Err(RasterError::Pgm(format!("{width}x{height} image")));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(RasterError::Pgm("missing header terminator".into())),
    }
    let data = &bytes[pos..];
    if data.len() != width * height {
        return Err(RasterError::Pgm(format!(
            "{} data bytes for {width}x{height}",
            data.len()
        )));
    }
    Ok((width, height, data.to_vec()))
}

pub fn write_pgm(width: usize, height: usize, data: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(data);
    out
}

pub fn read_sidecar(path: &Path) -> Result<Sidecar> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| RasterError::Sidecar {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Loads a raster; probability = byte / 255.
pub fn load_raster<T: Real>(
    raster_path: &Path,
    sidecar_path: &Path,
) -> Result<ProbabilityRaster<T>> {
    let bytes = fs::read(raster_path).map_err(io_err(raster_path))?;
    let (width, height, data) = read_pgm(&bytes)?;
    let meta = read_sidecar(sidecar_path)?;
    let sidecar_err = |message: String| RasterError::Sidecar {
        path: sidecar_path.display().to_string(),
        message,
    };
    if (meta.width, meta.height) != (width, height) {
        return Err(sidecar_err(format!(
            "sidecar says {}x{} but {} is {width}x{height}",
            meta.width,
            meta.height,
            raster_path.display()
        )));
    }
    let class: LandscapeClass = meta.class_name.parse()?;
    let georef =
        GeoReference::new(meta.bbox, width, height).map_err(|e| sidecar_err(e.to_string()))?;
    let scale = T::lit(255.0);
    let values = data.iter().map(|b| T::lit(f64::from(*b)) / scale).collect();
    let grid = ImageTensor::new(width, height, 1, values)?;
    Ok(ProbabilityRaster::from_parts_unchecked(grid, georef, class))
}

/// Writes the PGM and its sidecar; byte = round(p · 255).
pub fn save_raster<T: Real>(
    raster: &ProbabilityRaster<T>,
    raster_path: &Path,
    sidecar_path: &Path,
) -> Result<()> {
    let data: Vec<u8> = raster
        .values()
        .iter()
        .map(|p| (p.as_f64() * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect();
    fs::write(
        raster_path,
        write_pgm(raster.width(), raster.height(), &data),
    )
    .map_err(io_err(raster_path))?;
    let g = raster.georef();
    let meta = Sidecar {
        bbox: g.bbox(),
        width: g.width,
        height: g.height,
        class_name: raster.class().name().to_string(),
    };
    let mut text = serde_json::to_string_pretty(&meta).expect("sidecar serializes");
    text.push('\n');
    fs::write(sidecar_path, text).map_err(io_err(sidecar_path))
}
