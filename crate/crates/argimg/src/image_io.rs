//! 8-bit grayscale image files: binary/ASCII PGM and PNG.

use std::fs;
use std::path::Path;

use argimg_core::imagegen::luma;
use argimg_core::vision::GrayImage;

use crate::error::{Error, Result};

fn image_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Image {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Parses a P5 (binary) or P2 (ASCII) PGM. Values are rescaled to 0..=255
/// when `maxval` differs.
pub fn decode_pgm(bytes: &[u8]) -> std::result::Result<GrayImage, String> {
    let mut pos = 0;
    let mut header = Vec::with_capacity(4);
    while header.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("truncated header".into());
        }
        header.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| "bad header")?.to_string());
    }
    let magic = header[0].as_str();
    if magic != "P5" && magic != "P2" {
        return Err(format!("unsupported magic {magic:?}"));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| format!("bad header field {s:?}"));
    let (w, h, maxval) = (num(&header[1])?, num(&header[2])?, num(&header[3])?);
    if w == 0 || h == 0 || maxval == 0 || maxval > 255 {
        return Err(format!("unsupported dimensions or maxval {w}x{h}/{maxval}"));
    }
    let raw: Vec<usize> = if magic == "P5" {
        // exactly one whitespace byte separates the header from the raster
        let data = bytes.get(pos + 1..).ok_or("missing raster")?;
        if data.len() < w * h {
            return Err(format!("raster has {} bytes, expected {}", data.len(), w * h));
        }
        data[..w * h].iter().map(|&b| b as usize).collect()
    } else {
        let text = std::str::from_utf8(&bytes[pos..]).map_err(|_| "bad ASCII raster")?;
        let vals: std::result::Result<Vec<usize>, _> = text.split_ascii_whitespace().take(w * h).map(str::parse).collect();
        let vals = vals.map_err(|_| "bad ASCII raster value")?;
        if vals.len() < w * h {
            return Err("truncated ASCII raster".into());
        }
        vals
    };
    if raw.iter().any(|&v| v > maxval) {
        return Err("sample exceeds maxval".into());
    }
    let pixels: Vec<u8> = raw.iter().map(|&v| ((v * 255 + maxval / 2) / maxval) as u8).collect();
    GrayImage::from_u8(w, h, &pixels).map_err(|e| e.to_string())
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.to_u8());
    out
}

/// Decodes any 8/16-bit PNG to gray, applying the luma rule to colour.
/// Alpha is ignored.
pub fn decode_png(bytes: &[u8]) -> std::result::Result<GrayImage, String> {
    let mut decoder = png::Decoder::new(bytes);
    decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let mut reader = decoder.read_info().map_err(|e| e.to_string())?;
    let mut buf = vec![0; reader.output_buffer_size()];
    let info = reader.next_frame(&mut buf).map_err(|e| e.to_string())?;
    let data = &buf[..info.buffer_size()];
    let (w, h) = (info.width as usize, info.height as usize);
    let gray: Vec<u8> = match info.color_type {
        png::ColorType::Grayscale => data.to_vec(),
        png::ColorType::GrayscaleAlpha => data.chunks_exact(2).map(|p| p[0]).collect(),
        png::ColorType::Rgb => data.chunks_exact(3).map(|p| luma(p[0], p[1], p[2])).collect(),
        png::ColorType::Rgba => data.chunks_exact(4).map(|p| luma(p[0], p[1], p[2])).collect(),
        png::ColorType::Indexed => return Err("palette not expanded".into()),
    };
    GrayImage::from_u8(w, h, &gray).map_err(|e| e.to_string())
}

pub fn encode_png(img: &GrayImage) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, img.width() as u32, img.height() as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().expect("in-memory PNG header");
        writer.write_image_data(&img.to_u8()).expect("in-memory PNG data");
    }
    out
}

/// Loads a `.png` or `.pgm` file, chosen by extension.
pub fn load_image(path: &Path) -> Result<GrayImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let is_pgm = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    let decoded = if is_pgm { decode_pgm(&bytes) } else { decode_png(&bytes) };
    decoded.map_err(|m| image_err(path, m))
}

/// Writes PNG or PGM by extension (PNG otherwise).
pub fn save_image(img: &GrayImage, path: &Path) -> Result<()> {
    let is_pgm = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    let bytes = if is_pgm { encode_pgm(img) } else { encode_png(img) };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
