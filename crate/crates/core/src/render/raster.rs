use std::io::Cursor;
use std::path::Path;

use image::{ImageFormat, RgbImage};

use super::RenderError;
use crate::geometry::{bounding_box, Point2, Shape};

/// 8-bit RGB image, row-major, row 0 at the top.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
}

impl RasterImage {
    pub fn white(width: u32, height: u32) -> RasterImage {
        RasterImage {
            width,
            height,
            pixels: vec![255; width as usize * height as usize * 3],
        }
    }

    fn index(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * 3
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let i = self.index(x, y);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn set(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = self.index(x, y);
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }

    /// Inclusive pixel box `(x0, y0, x1, y1)` of all non-white pixels.
    pub fn ink_bbox(&self) -> Option<(u32, u32, u32, u32)> {
        let mut b: Option<(u32, u32, u32, u32)> = None;
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) != [255, 255, 255] {
                    b = Some(match b {
                        None => (x, y, x, y),
                        Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
                    });
                }
            }
        }
        b
    }

    fn to_rgb_image(&self) -> RgbImage {
        RgbImage::from_raw(self.width, self.height, self.pixels.clone()).expect("buffer length matches dimensions")
    }

    pub fn to_png_bytes(&self) -> Result<Vec<u8>, RenderError> {
        let mut out = Cursor::new(Vec::new());
        self.to_rgb_image().write_to(&mut out, ImageFormat::Png)?;
        Ok(out.into_inner())
    }

    pub fn write_png(&self, path: &Path) -> Result<(), RenderError> {
        std::fs::write(path, self.to_png_bytes()?)?;
        Ok(())
    }

    pub fn read_png(path: &Path) -> Result<RasterImage, RenderError> {
        let img = image::open(path)?.to_rgb8();
        Ok(RasterImage {
            width: img.width(),
            height: img.height(),
            pixels: img.into_raw(),
        })
    }

    /// Bilinear resample to `size`×`size`; returns a copy when already that size.
    pub fn resized(&self, size: u32) -> RasterImage {
        if self.width == size && self.height == size {
            return self.clone();
        }
        let out = image::imageops::resize(&self.to_rgb_image(), size, size, image::imageops::FilterType::Triangle);
        RasterImage {
            width: size,
            height: size,
            pixels: out.into_raw(),
        }
    }
}

/// Per-pixel stroke coverage in [0, 1] on a square canvas.
#[derive(Debug, Clone)]
pub(crate) struct Coverage {
    pub size: u32,
    pub values: Vec<f32>,
}

impl Coverage {
    pub fn new(size: u32) -> Coverage {
        Coverage {
            size,
            values: vec![0.0; size as usize * size as usize],
        }
    }

    pub fn at(&self, x: u32, y: u32) -> f32 {
        self.values[y as usize * self.size as usize + x as usize]
    }

    /// Continuous pixel coordinates of a canvas point; pixel centers sit at +0.5.
    pub fn to_pixel(&self, p: Point2) -> Point2 {
        let s = self.size as f64;
        Point2::new(p.x * s, s - p.y * s)
    }

    /// Stamps a capsule of half-width `hw` pixels around segment `a`–`b`
    /// (canvas coordinates), keeping the maximum coverage per pixel.
    pub fn stamp_segment(&mut self, a: Point2, b: Point2, hw: f64) {
        let (pa, pb) = (self.to_pixel(a), self.to_pixel(b));
        let reach = hw + 0.5;
        let max = self.size as f64 - 1.0;
        let x0 = (pa.x.min(pb.x) - reach).floor().clamp(0.0, max) as u32;
        let x1 = (pa.x.max(pb.x) + reach).ceil().clamp(0.0, max) as u32;
        let y0 = (pa.y.min(pb.y) - reach).floor().clamp(0.0, max) as u32;
        let y1 = (pa.y.max(pb.y) + reach).ceil().clamp(0.0, max) as u32;
        for y in y0..=y1 {
            for x in x0..=x1 {
                let c = Point2::new(x as f64 + 0.5, y as f64 + 0.5);
                let cov = (reach - c.distance_to_segment(pa, pb)).clamp(0.0, 1.0) as f32;
                let slot = &mut self.values[y as usize * self.size as usize + x as usize];
                if cov > *slot {
                    *slot = cov;
                }
            }
        }
    }

    pub fn stamp_polyline(&mut self, points: &[Point2], closed: bool, hw: f64) {
        for w in points.windows(2) {
            self.stamp_segment(w[0], w[1], hw);
        }
        if closed && points.len() > 2 {
            self.stamp_segment(points[points.len() - 1], points[0], hw);
        }
    }
}

/// Canvas position of pixel `(x, y)`'s center.
pub(crate) fn pixel_center(size: u32, x: u32, y: u32) -> Point2 {
    let s = size as f64;
    Point2::new((x as f64 + 0.5) / s, (s - y as f64 - 0.5) / s)
}

/// Pixels whose centers lie inside a closed shape.
pub(crate) fn interior_pixels(shape: &Shape, size: u32) -> Vec<(u32, u32)> {
    if !shape.kind.is_closed() {
        return Vec::new();
    }
    let b = bounding_box(shape);
    let s = size as f64;
    let max = size as f64 - 1.0;
    let x0 = (b.x_min * s).floor().clamp(0.0, max) as u32;
    let x1 = (b.x_max * s).ceil().clamp(0.0, max) as u32;
    let y0 = ((1.0 - b.y_max) * s).floor().clamp(0.0, max) as u32;
    let y1 = ((1.0 - b.y_min) * s).ceil().clamp(0.0, max) as u32;
    let mut out = Vec::new();
    for y in y0..=y1 {
        for x in x0..=x1 {
            if shape.contains_point(pixel_center(size, x, y)) {
                out.push((x, y));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pixel_mapping_matches_floor_rule() {
        let size = 640;
        for (x, y) in [(0.1, 0.2), (0.5, 0.5), (0.999, 0.001), (0.0, 0.0)] {
            let p = Point2::new(x, y);
            let px = (x * size as f64).floor() as u32;
            let py = size - 1 - (y * size as f64).floor() as u32;
            let c = pixel_center(size, px, py);
            assert!((c.x - p.x).abs() <= 0.5 / size as f64 + 1e-12);
            assert!((c.y - p.y).abs() <= 0.5 / size as f64 + 1e-12);
        }
    }

    #[test]
    fn png_round_trip() {
        let mut img = RasterImage::white(70, 64);
        img.set(3, 5, [10, 20, 30]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.png");
        img.write_png(&path).unwrap();
        assert_eq!(RasterImage::read_png(&path).unwrap(), img);
    }

    #[test]
    fn resize_to_square() {
        let img = RasterImage::white(100, 100);
        let r = img.resized(640);
        assert_eq!((r.width, r.height, r.pixels.len()), (640, 640, 640 * 640 * 3));
        assert!(r.pixels.iter().all(|&v| v == 255));
    }
}
