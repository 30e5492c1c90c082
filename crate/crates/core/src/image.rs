//! Bilevel images and the PBM (P1 plain / P4 raw) container.

use std::fmt;

use crate::error::{Error, Result};

/// Largest accepted width or height.
pub const MAX_DIMENSION: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Color {
    White,
    Black,
}

impl Color {
    pub fn bit(self) -> u8 {
        match self {
            Color::White => 0,
            Color::Black => 1,
        }
    }

    pub fn from_bit(bit: u8) -> Self {
        if bit & 1 == 1 {
            Color::Black
        } else {
            Color::White
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Color::White => "white",
            Color::Black => "black",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PbmVariant {
    /// ASCII `P1`.
    Plain,
    /// Packed binary `P4`.
    Raw,
}

/// Row-major grid of pixel bits, 1 = black.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::Size(format!("image dimensions {width}x{height} must be positive")));
    }
    if width > MAX_DIMENSION || height > MAX_DIMENSION {
        return Err(Error::Size(format!(
            "image dimensions {width}x{height} exceed {MAX_DIMENSION}x{MAX_DIMENSION}"
        )));
    }
    Ok(())
}

impl BinaryImage {
    /// Builds an image from row-major bits (0 or 1).
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        check_dims(width, height)?;
        if pixels.len() != width * height {
            return Err(Error::Argument(format!(
                "{} pixels given for a {width}x{height} image",
                pixels.len()
            )));
        }
        if let Some(i) = pixels.iter().position(|&p| p > 1) {
            return Err(Error::format(
                format!("pixel {}", i + 1),
                format!("value {} is not bilevel", pixels[i]),
            ));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Image of the given size filled with `color`.
    pub fn filled(width: usize, height: usize, color: Color) -> Result<Self> {
        check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            pixels: vec![color.bit(); width * height],
        })
    }

    /// Builds an image from colors listed in pixel order `l = 1..=s`.
    pub fn from_pixel_list(width: usize, height: usize, colors: &[Color]) -> Result<Self> {
        Self::new(width, height, colors.iter().map(|c| c.bit()).collect())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.pixels.len()
    }

    /// Row-major pixel bits.
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> Color {
        Color::from_bit(self.pixels[row * self.width + col])
    }

    pub fn set(&mut self, row: usize, col: usize, color: Color) {
        self.pixels[row * self.width + col] = color.bit();
    }

    /// Pixel `l` (one-based) in the scheme's pixel order.
    pub fn pixel(&self, l: usize) -> Color {
        Color::from_bit(self.pixels[l - 1])
    }

    /// `(row, col)` of pixel `l`.
    pub fn position(&self, l: usize) -> (usize, usize) {
        ((l - 1) / self.width, (l - 1) % self.width)
    }
}

/// Serializes an image. P1 rows are space-separated digits, wrapped so that
/// no line exceeds 70 characters.
pub fn write_pbm(image: &BinaryImage, variant: PbmVariant) -> Vec<u8> {
    let mut out = Vec::new();
    match variant {
        PbmVariant::Plain => {
            out.extend_from_slice(format!("P1\n{} {}\n", image.width, image.height).as_bytes());
            for row in image.pixels.chunks(image.width) {
                for line in row.chunks(35) {
                    let text: Vec<&str> =
                        line.iter().map(|&p| if p == 1 { "1" } else { "0" }).collect();
                    out.extend_from_slice(text.join(" ").as_bytes());
                    out.push(b'\n');
                }
            }
        }
        PbmVariant::Raw => {
            out.extend_from_slice(format!("P4\n{} {}\n", image.width, image.height).as_bytes());
            for row in image.pixels.chunks(image.width) {
                for byte_bits in row.chunks(8) {
                    let byte = byte_bits
                        .iter()
                        .enumerate()
                        .fold(0u8, |acc, (k, &p)| acc | (p << (7 - k)));
                    out.push(byte);
                }
            }
        }
    }
    out
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn err(&self, reason: impl Into<String>) -> Error {
        Error::format(format!("byte {}", self.pos), reason)
    }

    /// Skips whitespace and `#` comments.
    fn skip_space(&mut self) {
        while let Some(&c) = self.data.get(self.pos) {
            if c.is_ascii_whitespace() {
                self.pos += 1;
            } else if c == b'#' {
                while let Some(&c) = self.data.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn header_int(&mut self, what: &str) -> Result<usize> {
        self.skip_space();
        let start = self.pos;
        while self.data.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err(format!("expected {what}")));
        }
        let digits = std::str::from_utf8(&self.data[start..self.pos]).expect("ascii digits");
        match digits.parse::<usize>() {
            Ok(v) if v <= MAX_DIMENSION => Ok(v),
            _ => Err(Error::format(
                format!("byte {start}"),
                format!("{what} {digits} exceeds {MAX_DIMENSION}"),
            )),
        }
    }
}

/// Parses a P1 or P4 bitmap.
pub fn read_pbm(bytes: &[u8]) -> Result<BinaryImage> {
    let mut cur = Cursor { data: bytes, pos: 0 };
    let variant = match bytes.get(..2) {
        Some(b"P1") => PbmVariant::Plain,
        Some(b"P4") => PbmVariant::Raw,
        Some(other) => {
            return Err(cur.err(format!(
                "magic {:?} is not a bilevel PBM (P1/P4)",
                String::from_utf8_lossy(other)
            )))
        }
        None => return Err(cur.err("truncated before magic number")),
    };
    cur.pos = 2;
    let width = cur.header_int("width")?;
    let height = cur.header_int("height")?;
    if width == 0 || height == 0 {
        return Err(cur.err(format!("zero dimension {width}x{height}")));
    }

    let mut pixels = Vec::with_capacity(width * height);
    match variant {
        PbmVariant::Plain => {
            while pixels.len() < width * height {
                cur.skip_space();
                match bytes.get(cur.pos) {
                    Some(b'0') => pixels.push(0),
                    Some(b'1') => pixels.push(1),
                    Some(&c) => {
                        return Err(cur.err(format!("unexpected byte {:?} in pixel data", c as char)))
                    }
                    None => {
                        return Err(cur.err(format!(
                            "truncated pixel data: {} of {} pixels",
                            pixels.len(),
                            width * height
                        )))
                    }
                }
                cur.pos += 1;
            }
        }
        PbmVariant::Raw => {
            // exactly one whitespace byte separates the header from the raster
            match bytes.get(cur.pos) {
                Some(c) if c.is_ascii_whitespace() => cur.pos += 1,
                _ => return Err(cur.err("expected single whitespace before raster")),
            }
            let stride = width.div_ceil(8);
            let needed = stride * height;
            let raster = bytes
                .get(cur.pos..cur.pos + needed)
                .ok_or_else(|| cur.err(format!(
                    "truncated raster: {} of {needed} bytes",
                    bytes.len() - cur.pos
                )))?;
            for row in raster.chunks(stride) {
                pixels.extend((0..width).map(|x| (row[x / 8] >> (7 - x % 8)) & 1));
            }
        }
    }
    BinaryImage::new(width, height, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Color::{Black, White};

    #[test]
    fn plain_parse() {
        let img = read_pbm(b"P1 2 2 0 1 1 0").unwrap();
        assert_eq!((img.width(), img.height()), (2, 2));
        assert_eq!(img.pixels(), &[0, 1, 1, 0]);
        let commented = read_pbm(b"P1\n# secret\n2 2\n01\n10\n").unwrap();
        assert_eq!(commented, img);
    }

    #[test]
    fn raw_parse_matches_plain() {
        let raw = read_pbm(&[b"P4\n2 2\n".as_slice(), &[0b0100_0000, 0b1000_0000]].concat()).unwrap();
        assert_eq!(raw, read_pbm(b"P1 2 2 0 1 1 0").unwrap());
    }

    #[test]
    fn rejects_grayscale() {
        let err = read_pbm(b"P5 2 2 255 ....").unwrap_err();
        assert!(matches!(err, Error::Format { ref at, .. } if at == "byte 0"), "{err}");
    }

    #[test]
    fn truncated_inputs_name_offsets() {
        let err = read_pbm(b"P1 2 2 0 1 1").unwrap_err();
        assert!(matches!(err, Error::Format { ref at, .. } if at == "byte 12"), "{err}");
        assert!(read_pbm(b"P4\n9 1\n\xff").is_err());
        assert!(read_pbm(b"P1 2").is_err());
        assert!(read_pbm(b"P").is_err());
        assert!(read_pbm(b"P1 5000 1 0").is_err());
        assert!(read_pbm(b"P1 0 1").is_err());
        assert!(read_pbm(b"P1 1 1 2").is_err());
    }

    #[test]
    fn golden_bytes() {
        let black = BinaryImage::from_pixel_list(1, 1, &[Black]).unwrap();
        assert_eq!(write_pbm(&black, PbmVariant::Plain), b"P1\n1 1\n1\n");
        let table1 = BinaryImage::from_pixel_list(4, 1, &[White, Black, Black, White]).unwrap();
        assert_eq!(write_pbm(&table1, PbmVariant::Plain), b"P1\n4 1\n0 1 1 0\n");
        assert_eq!(write_pbm(&table1, PbmVariant::Raw), b"P4\n4 1\n\x60");
    }

    #[test]
    fn long_plain_rows_wrap() {
        let img = BinaryImage::filled(100, 1, Black).unwrap();
        let text = write_pbm(&img, PbmVariant::Plain);
        assert!(text.split(|&c| c == b'\n').all(|l| l.len() <= 70));
        assert_eq!(read_pbm(&text).unwrap(), img);
    }

    #[test]
    fn pixel_list_construction() {
        let img = BinaryImage::from_pixel_list(4, 1, &[White, Black, Black, White]).unwrap();
        assert_eq!(img.pixel(2), Black);
        assert_eq!(img.pixel(4), White);
        assert!(BinaryImage::from_pixel_list(2, 2, &[White; 3]).is_err());
        let one = BinaryImage::from_pixel_list(1, 1, &[Black]).unwrap();
        assert_eq!(one.get(0, 0), Black);
    }

    proptest! {
        #[test]
        fn round_trip(w in 1usize..=256, h in 1usize..=256, seed in any::<u64>()) {
            let pixels: Vec<u8> = (0..w * h)
                .map(|i| (crate::seed::mix64(seed ^ i as u64) & 1) as u8)
                .collect();
            let img = BinaryImage::new(w, h, pixels).unwrap();
            for variant in [PbmVariant::Plain, PbmVariant::Raw] {
                prop_assert_eq!(&read_pbm(&write_pbm(&img, variant)).unwrap(), &img);
            }
        }

        #[test]
        fn index_mapping(w in 1usize..=40, h in 1usize..=40, seed in any::<u64>()) {
            let colors: Vec<Color> = (0..w * h)
                .map(|i| Color::from_bit((crate::seed::mix64(seed ^ i as u64) & 1) as u8))
                .collect();
            let img = BinaryImage::from_pixel_list(w, h, &colors).unwrap();
            for l in 1..=w * h {
                let (r, c) = img.position(l);
                prop_assert_eq!((r, c), ((l - 1) / w, (l - 1) % w));
                prop_assert_eq!(img.get(r, c), colors[l - 1]);
            }
        }
    }
}
