use noise::{Fbm, MultiFractal, NoiseFn, Perlin};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::raster::{interior_pixels, Coverage, RasterImage};
use super::{composite_strokes, stroke_coverage, stroke_half_width};
use crate::geometry::{Outline, Point2};
use crate::scene::SceneDescription;
use crate::seed::{derive, rng_from};

const STREAM_GAUSSIAN: u64 = 1;
const STREAM_JITTER: u64 = 2;
const STREAM_SALT_PEPPER: u64 = 3;
const STREAM_PERLIN: u64 = 4;

/// Control-point spacing for outline jitter, in canvas units.
const JITTER_SPACING: f64 = 0.02;
/// Maximum spacing of the dense points a jittered outline is drawn through.
const JITTER_DENSITY: f64 = 0.004;
/// Extra reach, in pixels beyond the stroke edge, counted as outline.
const OUTLINE_BAND_PX: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerlinConfig {
    pub cell_scale: f64,
    pub octaves: usize,
    pub blend_alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub gaussian_sigma: f64,
    pub jitter_amplitude: f64,
    pub sp_density: f64,
    pub perlin: PerlinConfig,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            gaussian_sigma: 12.0,
            jitter_amplitude: 0.003,
            sp_density: 0.02,
            perlin: PerlinConfig {
                cell_scale: 64.0,
                octaves: 3,
                blend_alpha: 0.25,
            },
            seed: 0,
        }
    }
}

impl NoiseConfig {
    /// All magnitudes zero; `apply_noise` is then the identity.
    pub fn none() -> NoiseConfig {
        NoiseConfig {
            gaussian_sigma: 0.0,
            jitter_amplitude: 0.0,
            sp_density: 0.0,
            perlin: PerlinConfig {
                blend_alpha: 0.0,
                ..NoiseConfig::default().perlin
            },
            seed: 0,
        }
    }

    pub fn with_seed(self, seed: u64) -> NoiseConfig {
        NoiseConfig { seed, ..self }
    }

    pub fn validate(&self) -> Result<(), String> {
        let ok = self.gaussian_sigma >= 0.0
            && self.gaussian_sigma <= 255.0
            && self.jitter_amplitude >= 0.0
            && (0.0..=1.0).contains(&self.sp_density)
            && (0.0..=1.0).contains(&self.perlin.blend_alpha)
            && self.perlin.octaves >= 1
            && self.perlin.cell_scale > 0.0;
        if ok {
            Ok(())
        } else {
            Err("noise magnitudes out of range".into())
        }
    }
}

/// Dense outline displaced by a piecewise-linear field interpolated between
/// control points spaced at most `JITTER_SPACING` apart.
fn jitter_outline<R: Rng + ?Sized>(outline: &Outline, amplitude: f64, rng: &mut R) -> Outline {
    let mut pts = outline.points.clone();
    if outline.closed {
        pts.push(pts[0]);
    }
    let mut dense = vec![pts[0]];
    let mut arc = vec![0.0];
    for w in pts.windows(2) {
        let len = w[0].distance(w[1]);
        let pieces = (len / JITTER_DENSITY).ceil().max(1.0) as usize;
        for k in 1..=pieces {
            dense.push(w[0].lerp(w[1], k as f64 / pieces as f64));
            arc.push(arc.last().unwrap() + len / pieces as f64);
        }
    }
    let total = *arc.last().unwrap();
    let intervals = (total / JITTER_SPACING)
        .ceil()
        .max(if outline.closed { 4.0 } else { 1.0 }) as usize;
    let mut control: Vec<Point2> = (0..=intervals)
        .map(|_| {
            Point2::new(
                rng.random_range(-amplitude..=amplitude),
                rng.random_range(-amplitude..=amplitude),
            )
        })
        .collect();
    if outline.closed {
        control[intervals] = control[0];
    }
    let step = total / intervals as f64;
    let mut points: Vec<Point2> = dense
        .iter()
        .zip(&arc)
        .map(|(p, s)| {
            let u = if step > 0.0 { s / step } else { 0.0 };
            let i = (u.floor() as usize).min(intervals - 1);
            *p + control[i].lerp(control[i + 1], u - i as f64)
        })
        .collect();
    if outline.closed {
        points.pop();
    }
    Outline {
        points,
        closed: outline.closed,
    }
}

fn median(values: &mut [u8]) -> u8 {
    values.sort_unstable();
    values[values.len() / 2]
}

/// Applies, in order: background Gaussian noise, outline jitter,
/// salt-and-pepper on outline pixels, and Perlin texture inside closed shapes.
/// Each stage draws from its own stream derived from `cfg.seed`; a stage
/// whose magnitude is zero leaves the image untouched.
pub fn apply_noise(desc: &SceneDescription, img: &RasterImage, cfg: &NoiseConfig) -> RasterImage {
    let size = img.width;
    let n = size as usize * size as usize;
    let hw = stroke_half_width(size);
    let mut out = img.clone();

    // topmost closed shape covering each pixel
    let mut owner: Vec<Option<usize>> = vec![None; n];
    for (i, shape) in desc.shapes.iter().enumerate() {
        for (x, y) in interior_pixels(shape, size) {
            owner[y as usize * size as usize + x as usize] = Some(i);
        }
    }
    let clean = stroke_coverage(desc, size);

    let jitter = cfg.jitter_amplitude > 0.0;
    let outlines: Vec<Outline> = if jitter {
        let mut rng = rng_from(derive(cfg.seed, STREAM_JITTER, 0));
        desc.shapes
            .iter()
            .map(|s| jitter_outline(&s.outline(), cfg.jitter_amplitude, &mut rng))
            .collect()
    } else {
        desc.shapes.iter().map(|s| s.outline()).collect()
    };

    let mut redraw = None;
    if jitter {
        // erase the clean strokes down to whatever lies beneath them
        let mut under: Vec<[u8; 3]> = vec![[255, 255, 255]; desc.shapes.len()];
        for (i, slot) in under.iter_mut().enumerate() {
            let mut channels: [Vec<u8>; 3] = Default::default();
            for (x, y) in interior_pixels(&desc.shapes[i], size) {
                if clean.at(x, y) == 0.0 && owner[y as usize * size as usize + x as usize] == Some(i) {
                    let p = img.get(x, y);
                    for c in 0..3 {
                        channels[c].push(p[c]);
                    }
                }
            }
            if !channels[0].is_empty() {
                *slot = [
                    median(&mut channels[0]),
                    median(&mut channels[1]),
                    median(&mut channels[2]),
                ];
            }
        }
        for y in 0..size {
            for x in 0..size {
                if clean.at(x, y) > 0.0 {
                    let fill = owner[y as usize * size as usize + x as usize].map_or([255, 255, 255], |i| under[i]);
                    out.set(x, y, fill);
                }
            }
        }
        let mut cov = Coverage::new(size);
        for o in &outlines {
            cov.stamp_polyline(&o.points, o.closed, hw);
        }
        redraw = Some(cov);
    }

    if cfg.gaussian_sigma > 0.0 {
        let mut rng = rng_from(derive(cfg.seed, STREAM_GAUSSIAN, 0));
        let sigma = cfg.gaussian_sigma;
        for y in 0..size {
            for x in 0..size {
                let z: f64 = StandardNormal.sample(&mut rng);
                let background = owner[y as usize * size as usize + x as usize].is_none();
                if background && (jitter || clean.at(x, y) == 0.0) {
                    let p = out.get(x, y);
                    out.set(
                        x,
                        y,
                        p.map(|v| (v as f64 - 2.0 * sigma + sigma * z).round().clamp(0.0, 255.0) as u8),
                    );
                }
            }
        }
    }

    if let Some(cov) = &redraw {
        composite_strokes(&mut out, cov);
    }

    let mut band = Coverage::new(size);
    for o in &outlines {
        band.stamp_polyline(&o.points, o.closed, hw + OUTLINE_BAND_PX - 0.5);
    }

    if cfg.sp_density > 0.0 {
        let mut rng = rng_from(derive(cfg.seed, STREAM_SALT_PEPPER, 0));
        for y in 0..size {
            for x in 0..size {
                if band.at(x, y) > 0.0 && rng.random_bool(cfg.sp_density) {
                    let v = if rng.random_bool(0.5) { 0 } else { 255 };
                    out.set(x, y, [v; 3]);
                }
            }
        }
    }

    let alpha = cfg.perlin.blend_alpha;
    if alpha > 0.0 {
        let seed = derive(cfg.seed, STREAM_PERLIN, 0) as u32;
        let fbm = Fbm::<Perlin>::new(seed)
            .set_octaves(cfg.perlin.octaves)
            .set_frequency(1.0 / cfg.perlin.cell_scale);
        for y in 0..size {
            for x in 0..size {
                if owner[y as usize * size as usize + x as usize].is_some() && band.at(x, y) == 0.0 {
                    let t = (fbm.get([x as f64 + 0.5, y as f64 + 0.5]).clamp(-1.0, 1.0) + 1.0) * 127.5;
                    let p = out.get(x, y);
                    out.set(x, y, p.map(|v| ((1.0 - alpha) * v as f64 + alpha * t).round() as u8));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Shape;
    use crate::render::rasterize;
    use crate::render::tests::scene_of;

    fn sample_scene() -> SceneDescription {
        scene_of(vec![
            Shape::circle(0, Point2::new(0.3, 0.3), 0.15),
            Shape::line(1, Point2::new(0.6, 0.2), Point2::new(0.9, 0.8)),
            Shape::square(2, Point2::new(0.7, 0.75), 0.2, 0.4),
        ])
    }

    #[test]
    fn zero_magnitudes_are_identity() {
        let d = sample_scene();
        let img = rasterize(&d, 128).unwrap();
        assert_eq!(apply_noise(&d, &img, &NoiseConfig::none().with_seed(5)), img);
    }

    #[test]
    fn background_sigma_twenty() {
        let d = scene_of(vec![]);
        let img = rasterize(&d, 200).unwrap();
        let cfg = NoiseConfig {
            gaussian_sigma: 20.0,
            ..NoiseConfig::none()
        };
        let out = apply_noise(&d, &img, &cfg);
        let vals: Vec<f64> = out.pixels.chunks(3).map(|p| p[0] as f64).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (vals.len() - 1) as f64).sqrt();
        assert!((17.0..=23.0).contains(&sd), "{sd}");
    }

    #[test]
    fn full_density_forces_black_or_white_outline() {
        let d = sample_scene();
        let size = 160;
        let img = rasterize(&d, size).unwrap();
        let cfg = NoiseConfig {
            sp_density: 1.0,
            jitter_amplitude: 0.0,
            ..NoiseConfig::default().with_seed(3)
        };
        let out = apply_noise(&d, &img, &cfg);
        let mut band = Coverage::new(size);
        for s in &d.shapes {
            let o = s.outline();
            band.stamp_polyline(&o.points, o.closed, stroke_half_width(size) + OUTLINE_BAND_PX - 0.5);
        }
        let mut checked = 0;
        for y in 0..size {
            for x in 0..size {
                if band.at(x, y) > 0.0 {
                    let p = out.get(x, y);
                    assert!(p == [0, 0, 0] || p == [255, 255, 255]);
                    checked += 1;
                }
            }
        }
        assert!(checked > 500);
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let d = sample_scene();
        let img = rasterize(&d, 128).unwrap();
        let cfg = NoiseConfig::default().with_seed(9);
        assert_eq!(apply_noise(&d, &img, &cfg), apply_noise(&d, &img, &cfg));
        assert_ne!(apply_noise(&d, &img, &cfg), apply_noise(&d, &img, &cfg.with_seed(10)));
    }

    #[test]
    fn jitter_keeps_outline_close() {
        let o = Shape::circle(0, Point2::new(0.5, 0.5), 0.2).outline();
        let mut rng = rng_from(1);
        let j = jitter_outline(&o, 0.003, &mut rng);
        for p in &j.points {
            assert!((p.distance(Point2::new(0.5, 0.5)) - 0.2).abs() <= 0.003 * 2f64.sqrt() + 1e-9);
        }
    }
}
