//! Matrix <-> 24-bit image encodings and binary PPM I/O.
//!
//! Codes pack channels as `R * 65536 + G * 256 + B`.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const MAX_CODE: u32 = (1 << 24) - 1;

/// Rendering of unknown cells in exported images.
pub const UNKNOWN_RGB: [u8; 3] = [255, 0, 255];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Technique {
    /// Full 24-bit affine code table; identical codes to `Dynamic`.
    StaticDict,
    /// Consecutive codes for the distinct values present in the input only.
    MinimalDict,
    /// 8-bit gray level replicated over the three channels.
    Gray256,
    /// Bijective affine map onto the 24-bit code range.
    #[default]
    Dynamic,
}

impl Technique {
    pub fn as_str(self) -> &'static str {
        match self {
            Technique::StaticDict => "static_dict",
            Technique::MinimalDict => "minimal_dict",
            Technique::Gray256 => "gray256",
            Technique::Dynamic => "dynamic",
        }
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Technique {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "static_dict" | "static" => Ok(Technique::StaticDict),
            "minimal_dict" | "minimal" => Ok(Technique::MinimalDict),
            "gray256" | "gray" => Ok(Technique::Gray256),
            "dynamic" => Ok(Technique::Dynamic),
            other => Err(format!("unknown encoding '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncodingSpec {
    pub technique: Technique,
    pub value_lo: f64,
    pub value_hi: f64,
}

impl EncodingSpec {
    pub fn unit(technique: Technique) -> Self {
        EncodingSpec {
            technique,
            value_lo: 0.0,
            value_hi: 1.0,
        }
    }

    fn fraction(&self, v: f64) -> f64 {
        (v - self.value_lo) / (self.value_hi - self.value_lo)
    }

    fn at_fraction(&self, t: f64) -> f64 {
        self.value_lo + t * (self.value_hi - self.value_lo)
    }
}

#[inline]
pub fn channels(code: u32) -> [u8; 3] {
    [(code >> 16) as u8, (code >> 8) as u8, code as u8]
}

#[inline]
pub fn pack(rgb: [u8; 3]) -> u32 {
    (rgb[0] as u32) << 16 | (rgb[1] as u32) << 8 | rgb[2] as u32
}

/// Grid of 24-bit codes with a known/unknown mask (`true` = known).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageGrid {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u32>,
    pub mask: Vec<bool>,
}

impl ImageGrid {
    pub fn rgb(&self, row: usize, col: usize) -> [u8; 3] {
        channels(self.pixels[row * self.width + col])
    }
}

/// An encoded image plus the codebook needed to decode it. The codebook is
/// empty except for [`Technique::MinimalDict`].
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedImage {
    pub grid: ImageGrid,
    pub spec: EncodingSpec,
    pub codebook: Vec<f64>,
}

/// Encode a square row-major matrix of side `side`. Unknown cells get code 0.
pub fn encode(values: &[f64], mask: &[bool], side: usize, spec: EncodingSpec) -> Result<EncodedImage> {
    assert_eq!(values.len(), side * side);
    assert_eq!(mask.len(), values.len());
    crate::series::check_bounds(spec.value_lo, spec.value_hi)?;
    for (v, _) in values.iter().zip(mask).filter(|(_, k)| **k) {
        if !(v.is_finite() && *v >= spec.value_lo && *v <= spec.value_hi) {
            return Err(Error::OutOfRange {
                what: "encoded value",
                value: *v,
                lo: spec.value_lo,
                hi: spec.value_hi,
            });
        }
    }

    let mut codebook = Vec::new();
    if spec.technique == Technique::MinimalDict {
        codebook = values
            .iter()
            .zip(mask)
            .filter(|(_, k)| **k)
            .map(|(v, _)| *v)
            .collect();
        codebook.sort_by(f64::total_cmp);
        codebook.dedup();
        if codebook.len() > MAX_CODE as usize + 1 {
            return Err(Error::OutOfRange {
                what: "minimal dictionary size",
                value: codebook.len() as f64,
                lo: 0.0,
                hi: MAX_CODE as f64 + 1.0,
            });
        }
    }

    let pixels = values
        .iter()
        .zip(mask)
        .map(|(&v, &known)| {
            if !known {
                return 0;
            }
            match spec.technique {
                Technique::Dynamic | Technique::StaticDict => {
                    (spec.fraction(v) * MAX_CODE as f64).round() as u32
                }
                Technique::Gray256 => {
                    let g = (spec.fraction(v) * 255.0).round() as u8;
                    pack([g, g, g])
                }
                Technique::MinimalDict => {
                    codebook.binary_search_by(|c| c.total_cmp(&v)).unwrap_or(0) as u32
                }
            }
        })
        .collect();

    Ok(EncodedImage {
        grid: ImageGrid {
            width: side,
            height: side,
            pixels,
            mask: mask.to_vec(),
        },
        spec,
        codebook,
    })
}

/// Decode every cell back to a real value.
pub fn decode(img: &EncodedImage) -> Vec<f64> {
    let spec = img.spec;
    img.grid
        .pixels
        .iter()
        .map(|&code| match spec.technique {
            Technique::Dynamic | Technique::StaticDict => {
                spec.at_fraction(code as f64 / MAX_CODE as f64)
            }
            Technique::Gray256 => spec.at_fraction(channels(code)[0] as f64 / 255.0),
            Technique::MinimalDict => img
                .codebook
                .get(code as usize)
                .or(img.codebook.last())
                .copied()
                .unwrap_or(spec.value_lo),
        })
        .collect()
}

/// Write a binary P6 PPM; unknown cells are rendered magenta.
pub fn export_ppm(img: &ImageGrid, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    write!(w, "P6\n{} {}\n255\n", img.width, img.height)?;
    let mut buf = Vec::with_capacity(img.pixels.len() * 3);
    for (&code, &known) in img.pixels.iter().zip(&img.mask) {
        buf.extend_from_slice(&if known { channels(code) } else { UNKNOWN_RGB });
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

/// Read a binary P6 PPM with maxval 255. Every cell is marked known.
pub fn import_ppm(path: &Path) -> Result<ImageGrid> {
    let bytes = fs::read(path)?;
    let mut pos = 0;
    let mut header = Vec::with_capacity(4);
    while header.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Ppm("truncated header".into()));
        }
        header.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    if header[0] != "P6" {
        return Err(Error::Ppm(format!("unsupported magic '{}'", header[0])));
    }
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::Ppm(format!("bad header field '{s}'")))
    };
    let (width, height, maxval) = (parse(&header[1])?, parse(&header[2])?, parse(&header[3])?);
    if maxval != 255 {
        return Err(Error::Ppm(format!("unsupported maxval {maxval}")));
    }
    let raster = bytes.get(pos..).unwrap_or_default();
    if raster.len() != width * height * 3 {
        return Err(Error::Ppm(format!(
            "expected {} raster bytes, found {}",
            width * height * 3,
            raster.len()
        )));
    }
    Ok(ImageGrid {
        width,
        height,
        pixels: raster.chunks(3).map(|c| pack([c[0], c[1], c[2]])).collect(),
        mask: vec![true; width * height],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn enc(v: f64, technique: Technique) -> u32 {
        encode(&[v], &[true], 1, EncodingSpec::unit(technique))
            .unwrap()
            .grid
            .pixels[0]
    }

    #[test]
    fn dynamic_codes() {
        assert_eq!(enc(0.0, Technique::Dynamic), 0);
        assert_eq!(enc(1.0, Technique::Dynamic), 16_777_215);
        assert_eq!(channels(enc(1.0, Technique::Dynamic)), [255, 255, 255]);
        assert_eq!(enc(0.5, Technique::Dynamic), 8_388_608);
        assert_eq!(channels(8_388_608), [128, 0, 0]);
        assert_eq!(enc(0.5, Technique::StaticDict), 8_388_608);
    }

    #[test]
    fn gray_replicates_channels() {
        let c = enc(0.5, Technique::Gray256);
        assert_eq!(channels(c), [128, 128, 128]);
    }

    #[test]
    fn rejects_out_of_range_known_values() {
        let r = encode(&[0.5, 0.2, 1.5, 0.1], &[true, true, true, true], 2, EncodingSpec::unit(Technique::Dynamic));
        assert!(matches!(r, Err(Error::OutOfRange { .. })));
        // unknown cells are not range-checked
        let r = encode(&[0.5, 0.2, 9.0, 0.1], &[true, true, false, true], 2, EncodingSpec::unit(Technique::Dynamic));
        assert_eq!(r.unwrap().grid.pixels[2], 0);
    }

    #[test]
    fn zero_image_decodes_to_lo() {
        let spec = EncodingSpec {
            technique: Technique::Dynamic,
            value_lo: -2.0,
            value_hi: 3.0,
        };
        let img = EncodedImage {
            grid: ImageGrid {
                width: 2,
                height: 2,
                pixels: vec![0; 4],
                mask: vec![true; 4],
            },
            spec,
            codebook: vec![],
        };
        assert_eq!(decode(&img), vec![-2.0; 4]);
    }

    #[test]
    fn minimal_dict_restricts_to_seen_values() {
        let vals = [0.1, 0.7, 0.7, 0.3];
        let img = encode(&vals, &[true; 4], 2, EncodingSpec::unit(Technique::MinimalDict)).unwrap();
        assert_eq!(img.codebook, vec![0.1, 0.3, 0.7]);
        assert_eq!(img.grid.pixels, vec![0, 2, 2, 1]);
        assert_eq!(decode(&img), vals.to_vec());
    }

    #[test]
    fn ppm_white_pixel_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.ppm");
        let img = ImageGrid {
            width: 1,
            height: 1,
            pixels: vec![MAX_CODE],
            mask: vec![true],
        };
        export_ppm(&img, &path).unwrap();
        let mut want = b"P6\n1 1\n255\n".to_vec();
        want.extend([255, 255, 255]);
        assert_eq!(fs::read(&path).unwrap(), want);
    }

    #[test]
    fn ppm_marks_unknown_magenta_and_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ppm");
        let img = ImageGrid {
            width: 2,
            height: 2,
            pixels: vec![0x123456, 0, 0xABCDEF, 7],
            mask: vec![true, false, true, false],
        };
        export_ppm(&img, &path).unwrap();
        let back = import_ppm(&path).unwrap();
        assert_eq!(back.rgb(0, 1), UNKNOWN_RGB);
        assert_eq!(back.rgb(1, 1), UNKNOWN_RGB);
        assert_eq!(back.pixels[0], 0x123456);
        assert_eq!(back.pixels[2], 0xABCDEF);

        let full = ImageGrid {
            mask: vec![true; 4],
            ..img
        };
        export_ppm(&full, &path).unwrap();
        assert_eq!(import_ppm(&path).unwrap(), full);
    }

    #[test]
    fn ppm_rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ppm");
        fs::write(&path, b"P3\n1 1\n255\n0 0 0\n").unwrap();
        assert!(matches!(import_ppm(&path), Err(Error::Ppm(_))));
        fs::write(&path, b"P6\n2 2\n255\n\x00\x00").unwrap();
        assert!(matches!(import_ppm(&path), Err(Error::Ppm(_))));
    }
}
