//! Vector and raster rendering of scene descriptions, plus noise injection.

mod noise;
mod raster;
mod svg;

use serde::{Deserialize, Serialize};

pub use noise::{apply_noise, NoiseConfig, PerlinConfig};
pub use raster::RasterImage;
pub use svg::render_svg;

use crate::geometry::OVERLAP_STROKE_WIDTH;
use crate::scene::SceneDescription;
use raster::{interior_pixels, Coverage};

/// Default raster edge length in pixels.
pub const DEFAULT_SIZE: u32 = 640;
/// Smallest accepted raster edge length.
pub const MIN_SIZE: u32 = 64;
/// Stroke width in canvas units.
pub const STROKE_WIDTH: f64 = OVERLAP_STROKE_WIDTH;

const FILL_PALETTE: [[u8; 3]; 6] = [
    [198, 219, 239],
    [253, 208, 162],
    [199, 233, 192],
    [218, 218, 235],
    [252, 187, 161],
    [255, 237, 160],
];

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error("raster size {0} is below the minimum of {MIN_SIZE}")]
    SizeTooSmall(u32),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("image: {0}")]
    Image(#[from] image::ImageError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenderOptions {
    pub size: u32,
    pub fill_closed: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            size: DEFAULT_SIZE,
            fill_closed: false,
        }
    }
}

/// Fill color for closed shapes when `fill_closed` is set.
pub fn fill_color(shape_id: u32) -> [u8; 3] {
    FILL_PALETTE[shape_id as usize % FILL_PALETTE.len()]
}

/// Stroke half-width in pixels at the given raster size.
pub(crate) fn stroke_half_width(size: u32) -> f64 {
    STROKE_WIDTH / 2.0 * size as f64
}

pub(crate) fn stroke_coverage(desc: &SceneDescription, size: u32) -> Coverage {
    let hw = stroke_half_width(size);
    let mut cov = Coverage::new(size);
    for shape in &desc.shapes {
        let outline = shape.outline();
        cov.stamp_polyline(&outline.points, outline.closed, hw);
    }
    cov
}

/// Anti-aliased rasterization with default options at `size`.
pub fn rasterize(desc: &SceneDescription, size: u32) -> Result<RasterImage, RenderError> {
    rasterize_with(
        desc,
        &RenderOptions {
            size,
            ..RenderOptions::default()
        },
    )
}

pub fn rasterize_with(desc: &SceneDescription, opts: &RenderOptions) -> Result<RasterImage, RenderError> {
    let size = opts.size;
    if size < MIN_SIZE {
        return Err(RenderError::SizeTooSmall(size));
    }
    let mut img = RasterImage::white(size, size);
    if opts.fill_closed {
        for shape in &desc.shapes {
            let color = fill_color(shape.id);
            for (x, y) in interior_pixels(shape, size) {
                img.set(x, y, color);
            }
        }
    }
    composite_strokes(&mut img, &stroke_coverage(desc, size));
    Ok(img)
}

/// Darkens each pixel toward black by its stroke coverage.
pub(crate) fn composite_strokes(img: &mut RasterImage, cov: &Coverage) {
    for y in 0..img.height {
        for x in 0..img.width {
            let c = cov.at(x, y);
            if c > 0.0 {
                let keep = 1.0 - c;
                let p = img.get(x, y);
                img.set(x, y, p.map(|v| (v as f32 * keep).round() as u8));
            }
        }
    }
}
