//! Minimal RGB raster with PPM output and PNG encoding for model transport.

use std::io::{self, Write};
use std::path::Path;

/// 8-bit RGB raster, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub width: u32,
    pub height: u32,
    data: Vec<u8>,
}

impl Image {
    /// Fully initialized raster filled with one color.
    pub fn filled(width: u32, height: u32, color: [u8; 3]) -> Self {
        let mut data = Vec::with_capacity(width as usize * height as usize * 3);
        for _ in 0..(width as usize * height as usize) {
            data.extend_from_slice(&color);
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set(&mut self, x: i32, y: i32, color: [u8; 3]) {
        if x < 0 || y < 0 || x >= self.width as i32 || y >= self.height as i32 {
            return;
        }
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.data[i..i + 3].copy_from_slice(&color);
    }

    /// Fill a vertical span of one column, clamped to the raster.
    pub fn fill_column(&mut self, x: u32, y0: i32, y1: i32, color: [u8; 3]) {
        let lo = y0.max(0);
        let hi = y1.min(self.height as i32);
        for y in lo..hi {
            self.set(x as i32, y, color);
        }
    }

    pub fn fill_rect(&mut self, x: i32, y: i32, w: i32, h: i32, color: [u8; 3]) {
        for yy in y.max(0)..(y + h).min(self.height as i32) {
            for xx in x.max(0)..(x + w).min(self.width as i32) {
                self.set(xx, yy, color);
            }
        }
    }

    pub fn fill_disc(&mut self, cx: f64, cy: f64, r: f64, color: [u8; 3]) {
        let x0 = (cx - r).floor() as i32;
        let x1 = (cx + r).ceil() as i32;
        let y0 = (cy - r).floor() as i32;
        let y1 = (cy + r).ceil() as i32;
        for y in y0..=y1 {
            for x in x0..=x1 {
                let dx = x as f64 + 0.5 - cx;
                let dy = y as f64 + 0.5 - cy;
                if dx * dx + dy * dy <= r * r {
                    self.set(x, y, color);
                }
            }
        }
    }

    /// Fill a triangle by half-plane tests over its bounding box.
    pub fn fill_triangle(&mut self, v: [(f64, f64); 3], color: [u8; 3]) {
        let min_x = v.iter().map(|p| p.0).fold(f64::INFINITY, f64::min).floor() as i32;
        let max_x = v.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max).ceil() as i32;
        let min_y = v.iter().map(|p| p.1).fold(f64::INFINITY, f64::min).floor() as i32;
        let max_y = v.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max).ceil() as i32;
        let edge = |a: (f64, f64), b: (f64, f64), p: (f64, f64)| {
            (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0)
        };
        for y in min_y..=max_y {
            for x in min_x..=max_x {
                let p = (x as f64 + 0.5, y as f64 + 0.5);
                let d0 = edge(v[0], v[1], p);
                let d1 = edge(v[1], v[2], p);
                let d2 = edge(v[2], v[0], p);
                let all_neg = d0 <= 0.0 && d1 <= 0.0 && d2 <= 0.0;
                let all_pos = d0 >= 0.0 && d1 >= 0.0 && d2 >= 0.0;
                if all_neg || all_pos {
                    self.set(x, y, color);
                }
            }
        }
    }

    /// Binary PPM (P6), 8-bit RGB.
    pub fn write_ppm(&self, mut w: impl Write) -> io::Result<()> {
        write!(w, "P6\n{} {}\n255\n", self.width, self.height)?;
        w.write_all(&self.data)
    }

    pub fn save_ppm(&self, path: &Path) -> io::Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_ppm(io::BufWriter::new(file))
    }

    /// PNG bytes (used to embed images in model requests).
    pub fn to_png_bytes(&self) -> Vec<u8> {
        let img = image::RgbImage::from_raw(self.width, self.height, self.data.clone())
            .expect("raster dimensions match buffer");
        let mut buf = std::io::Cursor::new(Vec::new());
        img.write_to(&mut buf, image::ImageFormat::Png)
            .expect("in-memory png encode cannot fail");
        buf.into_inner()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ppm_header_and_size() {
        let img = Image::filled(4, 2, [1, 2, 3]);
        let mut buf = Vec::new();
        img.write_ppm(&mut buf).unwrap();
        assert!(buf.starts_with(b"P6\n4 2\n255\n"));
        assert_eq!(buf.len(), 11 + 4 * 2 * 3);
    }

    #[test]
    fn disc_fill_is_bounded() {
        let mut img = Image::filled(20, 20, [0, 0, 0]);
        img.fill_disc(10.0, 10.0, 4.0, [255, 0, 0]);
        assert_eq!(img.get(10, 10), [255, 0, 0]);
        assert_eq!(img.get(10, 2), [0, 0, 0]);
    }
}
