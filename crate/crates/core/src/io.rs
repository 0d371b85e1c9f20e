//! Image file I/O: Netpbm (PGM P2/P5, PPM P3/P6) and 8/16-bit PNG.
//!
//! Decoded samples are mapped to `f64` in `[0, 255]`; samples with a larger
//! maxval (e.g. 16-bit) are rescaled by `255 / maxval`. Encoding clamps to
//! `[0, 255]` and rounds half away from zero to 8 bits.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{ImageGrid, RgbImage};

/// Colour layout requested from or found in a file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorKind {
    Gray,
    Rgb,
}

impl ColorKind {
    fn name(self) -> &'static str {
        match self {
            ColorKind::Gray => "gray",
            ColorKind::Rgb => "rgb",
        }
    }
}

/// A decoded image of either colour layout.
#[derive(Debug, Clone, PartialEq)]
pub enum Image {
    Gray(ImageGrid),
    Rgb(RgbImage),
}

impl Image {
    pub fn kind(&self) -> ColorKind {
        match self {
            Image::Gray(_) => ColorKind::Gray,
            Image::Rgb(_) => ColorKind::Rgb,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        match self {
            Image::Gray(g) => g.dims(),
            Image::Rgb(c) => c.dims(),
        }
    }
}

impl From<ImageGrid> for Image {
    fn from(g: ImageGrid) -> Self {
        Image::Gray(g)
    }
}

impl From<RgbImage> for Image {
    fn from(c: RgbImage) -> Self {
        Image::Rgb(c)
    }
}

/// On-disk encodings supported by [`save_image`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Pgm,
    Ppm,
    Png,
}

impl ImageFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "pgm" => Some(ImageFormat::Pgm),
            "ppm" | "pnm" => Some(ImageFormat::Ppm),
            "png" => Some(ImageFormat::Png),
            _ => None,
        }
    }
}

/// Loads an image of any supported kind.
pub fn load_any(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

/// Loads an image and checks it has the `expect`ed colour layout.
pub fn load_image(path: impl AsRef<Path>, expect: ColorKind) -> Result<Image> {
    let img = load_any(path)?;
    if img.kind() != expect {
        return Err(Error::ColorMismatch {
            expected: expect.name(),
            found: img.kind().name(),
        });
    }
    Ok(img)
}

pub fn load_gray(path: impl AsRef<Path>) -> Result<ImageGrid> {
    match load_image(path, ColorKind::Gray)? {
        Image::Gray(g) => Ok(g),
        Image::Rgb(_) => unreachable!(),
    }
}

pub fn load_rgb(path: impl AsRef<Path>) -> Result<RgbImage> {
    match load_image(path, ColorKind::Rgb)? {
        Image::Rgb(c) => Ok(c),
        Image::Gray(_) => unreachable!(),
    }
}

/// Decodes an in-memory PNM or PNG file.
pub fn decode(bytes: &[u8]) -> Result<Image> {
    if bytes.starts_with(b"\x89PNG") {
        decode_png(bytes)
    } else if bytes.len() >= 2 && bytes[0] == b'P' {
        decode_pnm(bytes)
    } else {
        Err(Error::Unsupported("unrecognised file signature".into()))
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let c = self.bytes[self.pos];
            if c == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn next_uint(&mut self, what: &str) -> Result<u32> {
        self.skip_ws_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(if self.pos >= self.bytes.len() {
                Error::CorruptPayload(format!("file ends before {what}"))
            } else {
                Error::CorruptPayload(format!("expected a number for {what}"))
            });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| Error::CorruptPayload(format!("{what} out of range")))
    }
}

fn decode_pnm(bytes: &[u8]) -> Result<Image> {
    let (channels, ascii) = match &bytes[..2] {
        b"P2" => (1, true),
        b"P5" => (1, false),
        b"P3" => (3, true),
        b"P6" => (3, false),
        other => {
            return Err(Error::Unsupported(format!(
                "netpbm variant {}",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let mut cur = Cursor { bytes, pos: 2 };
    let width = cur.next_uint("width")? as usize;
    let height = cur.next_uint("height")? as usize;
    let maxval = cur.next_uint("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::CorruptPayload(format!(
            "zero image dimension {width}x{height}"
        )));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Unsupported(format!(
            "bit depth with maxval {maxval}"
        )));
    }
    let count = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| Error::CorruptPayload("image dimensions overflow".into()))?;

    let mut samples = Vec::with_capacity(count);
    if ascii {
        for _ in 0..count {
            let v = cur.next_uint("sample").map_err(|e| match e {
                Error::CorruptPayload(m) if m.starts_with("file ends") => Error::CorruptPayload(
                    format!("expected {count} samples, found {}", samples.len()),
                ),
                other => other,
            })?;
            if v > maxval {
                return Err(Error::CorruptPayload(format!(
                    "sample {v} exceeds maxval {maxval}"
                )));
            }
            samples.push(v);
        }
    } else {
        // exactly one whitespace byte separates the header from the raster
        let start = cur.pos + 1;
        let bytes_per = if maxval > 255 { 2 } else { 1 };
        let need = count * bytes_per;
        let raster = bytes.get(start..).unwrap_or(&[]);
        if raster.len() < need {
            return Err(Error::CorruptPayload(format!(
                "expected {need} raster bytes, found {}",
                raster.len()
            )));
        }
        if bytes_per == 1 {
            samples.extend(raster[..need].iter().map(|&b| b as u32));
        } else {
            samples.extend(
                raster[..need]
                    .chunks_exact(2)
                    .map(|c| u16::from_be_bytes([c[0], c[1]]) as u32),
            );
        }
        if samples.iter().any(|&v| v > maxval) {
            return Err(Error::CorruptPayload(format!(
                "raster sample exceeds maxval {maxval}"
            )));
        }
    }

    let scale = 255.0 / maxval as f64;
    let to_real = |v: u32| {
        if maxval == 255 {
            v as f64
        } else {
            v as f64 * scale
        }
    };
    build_image(width, height, channels, samples.into_iter().map(to_real))
}

fn build_image(
    width: usize,
    height: usize,
    channels: usize,
    values: impl Iterator<Item = f64>,
) -> Result<Image> {
    if channels == 1 {
        let data: Vec<f64> = values.collect();
        return Ok(Image::Gray(ImageGrid::from_vec(width, height, data)?));
    }
    let n = width * height;
    let (mut r, mut g, mut b) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for (i, v) in values.enumerate() {
        match i % 3 {
            0 => r.push(v),
            1 => g.push(v),
            _ => b.push(v),
        }
    }
    Ok(Image::Rgb(RgbImage::new(
        ImageGrid::from_vec(width, height, r)?,
        ImageGrid::from_vec(width, height, g)?,
        ImageGrid::from_vec(width, height, b)?,
    )?))
}

fn decode_png(bytes: &[u8]) -> Result<Image> {
    let png_err = |e: png::DecodingError| Error::CorruptPayload(format!("png: {e}"));
    let mut decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    // expand palettes and sub-byte gray; keep 16-bit samples as is
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(png_err)?;
    let mut buf = vec![
        0;
        reader
            .output_buffer_size()
            .ok_or_else(|| Error::Unsupported("png too large".into()))?
    ];
    let info = reader.next_frame(&mut buf).map_err(png_err)?;
    let (width, height) = (info.width as usize, info.height as usize);
    let (src_channels, keep) = match info.color_type {
        png::ColorType::Grayscale => (1, 1),
        png::ColorType::GrayscaleAlpha => (2, 1),
        png::ColorType::Rgb => (3, 3),
        png::ColorType::Rgba => (4, 3),
        png::ColorType::Indexed => return Err(Error::Unsupported("unexpanded indexed png".into())),
    };
    let raw = &buf[..info.buffer_size()];
    let samples: Vec<f64> = match info.bit_depth {
        png::BitDepth::Eight => raw.iter().map(|&b| b as f64).collect(),
        png::BitDepth::Sixteen => raw
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 * (255.0 / 65535.0))
            .collect(),
        other => return Err(Error::Unsupported(format!("png bit depth {other:?}"))),
    };
    let values = samples
        .chunks_exact(src_channels)
        .flat_map(|px| px[..keep].to_vec());
    build_image(width, height, keep, values)
}

/// Quantizes a real intensity to a byte: clamp to `[0, 255]`, round half away
/// from zero.
#[inline]
pub fn quantize(v: f64) -> u8 {
    if v.is_nan() {
        return 0;
    }
    v.clamp(0.0, 255.0).round() as u8
}

/// Encodes `img` in `format` and writes it to `path`.
pub fn save_image(img: &Image, path: impl AsRef<Path>, format: ImageFormat) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode(img, format)?;
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&bytes).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Saves using the format implied by the path extension.
pub fn save_auto(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let format = ImageFormat::from_path(path).ok_or_else(|| {
        Error::Unsupported(format!("cannot infer image format of {}", path.display()))
    })?;
    save_image(img, path, format)
}

fn interleave(img: &Image) -> (usize, usize, usize, Vec<u8>) {
    match img {
        Image::Gray(g) => (
            g.width(),
            g.height(),
            1,
            g.data().iter().map(|&v| quantize(v)).collect(),
        ),
        Image::Rgb(c) => {
            let mut out = Vec::with_capacity(c.r.len() * 3);
            for i in 0..c.r.len() {
                out.push(quantize(c.r.data()[i]));
                out.push(quantize(c.g.data()[i]));
                out.push(quantize(c.b.data()[i]));
            }
            (c.width(), c.height(), 3, out)
        }
    }
}

/// Encodes to an in-memory file.
pub fn encode(img: &Image, format: ImageFormat) -> Result<Vec<u8>> {
    let img = match (img, format) {
        (Image::Rgb(_), ImageFormat::Pgm) => {
            return Err(Error::ColorMismatch {
                expected: "gray",
                found: "rgb",
            })
        }
        (Image::Gray(g), ImageFormat::Ppm) => &Image::Rgb(RgbImage::from_gray(g)),
        _ => img,
    };
    let (width, height, channels, pixels) = interleave(img);
    match format {
        ImageFormat::Pgm | ImageFormat::Ppm => {
            let magic = if channels == 1 { "P5" } else { "P6" };
            let mut out = format!("{magic}\n{width} {height}\n255\n").into_bytes();
            out.extend_from_slice(&pixels);
            Ok(out)
        }
        ImageFormat::Png => {
            let mut out = Vec::new();
            {
                let mut enc = png::Encoder::new(&mut out, width as u32, height as u32);
                enc.set_color(if channels == 1 {
                    png::ColorType::Grayscale
                } else {
                    png::ColorType::Rgb
                });
                enc.set_depth(png::BitDepth::Eight);
                let enc_err = |e: png::EncodingError| Error::Unsupported(format!("png: {e}"));
                let mut writer = enc.write_header().map_err(enc_err)?;
                writer.write_image_data(&pixels).map_err(enc_err)?;
            }
            Ok(out)
        }
    }
}
