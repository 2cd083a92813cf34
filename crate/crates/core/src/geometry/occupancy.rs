use super::{bounding_box, Point2, Shape};

/// Cells per canvas side of the overlap grid.
pub const GRID_RESOLUTION: usize = 512;

/// Stroke width (canvas units) giving open curves an occupied area.
pub const OVERLAP_STROKE_WIDTH: f64 = 0.004;

/// Occupied cells of one shape, stored over the shape's cell bounding box.
/// Cell `(i, j)` covers `[i/N, (i+1)/N] × [j/N, (j+1)/N]` and is occupied
/// when its center is.
#[derive(Clone, Debug)]
pub struct Occupancy {
    i0: usize,
    j0: usize,
    cols: usize,
    rows: usize,
    cells: Vec<bool>,
    count: usize,
}

fn cell_range(lo: f64, hi: f64) -> (usize, usize) {
    let n = GRID_RESOLUTION as f64;
    let a = ((lo * n - 0.5).floor().max(0.0)) as usize;
    let b = ((hi * n - 0.5).ceil().max(0.0) as usize).min(GRID_RESOLUTION - 1);
    (a, b.max(a))
}

fn cell_center(i: usize, j: usize) -> Point2 {
    let n = GRID_RESOLUTION as f64;
    Point2::new((i as f64 + 0.5) / n, (j as f64 + 0.5) / n)
}

impl Occupancy {
    pub fn of(shape: &Shape) -> Occupancy {
        let half = OVERLAP_STROKE_WIDTH / 2.0;
        let b = bounding_box(shape).expanded(if shape.kind.is_closed() { 0.0 } else { half });
        let (i0, i1) = cell_range(b.x_min, b.x_max);
        let (j0, j1) = cell_range(b.y_min, b.y_max);
        let (cols, rows) = (i1 - i0 + 1, j1 - j0 + 1);
        let mut occ = Occupancy {
            i0,
            j0,
            cols,
            rows,
            cells: vec![false; cols * rows],
            count: 0,
        };
        if shape.kind.is_closed() {
            for r in 0..rows {
                for c in 0..cols {
                    if shape.contains_point(cell_center(i0 + c, j0 + r)) {
                        occ.cells[r * cols + c] = true;
                    }
                }
            }
        } else {
            // stamp each stroke segment into the cells it can reach
            let outline = shape.outline();
            for (a, p) in outline.segments() {
                let (ci0, ci1) = cell_range(a.x.min(p.x) - half, a.x.max(p.x) + half);
                let (cj0, cj1) = cell_range(a.y.min(p.y) - half, a.y.max(p.y) + half);
                for j in cj0.max(j0)..=cj1.min(j0 + rows - 1) {
                    for i in ci0.max(i0)..=ci1.min(i0 + cols - 1) {
                        let idx = (j - j0) * cols + (i - i0);
                        if !occ.cells[idx] && cell_center(i, j).distance_to_segment(a, p) <= half {
                            occ.cells[idx] = true;
                        }
                    }
                }
            }
        }
        occ.count = occ.cells.iter().filter(|&&c| c).count();
        occ
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Occupied area as a canvas fraction.
    pub fn area(&self) -> f64 {
        self.count as f64 / (GRID_RESOLUTION * GRID_RESOLUTION) as f64
    }

    fn get(&self, i: usize, j: usize) -> bool {
        i >= self.i0
            && j >= self.j0
            && i < self.i0 + self.cols
            && j < self.j0 + self.rows
            && self.cells[(j - self.j0) * self.cols + (i - self.i0)]
    }

    pub fn intersection_count(&self, other: &Occupancy) -> usize {
        let i_lo = self.i0.max(other.i0);
        let i_hi = (self.i0 + self.cols).min(other.i0 + other.cols);
        let j_lo = self.j0.max(other.j0);
        let j_hi = (self.j0 + self.rows).min(other.j0 + other.rows);
        let mut n = 0;
        for j in j_lo..j_hi {
            for i in i_lo..i_hi {
                if self.get(i, j) && other.get(i, j) {
                    n += 1;
                }
            }
        }
        n
    }

    /// Shared cells relative to the smaller occupied area.
    pub fn overlap_ratio(&self, other: &Occupancy) -> f64 {
        let smaller = self.count.min(other.count);
        if smaller == 0 {
            return 0.0;
        }
        self.intersection_count(other) as f64 / smaller as f64
    }
}

/// Largest overlap ratio between `candidate` and any shape of the scene,
/// measured on the occupancy grid. Zero for an empty scene.
pub fn overlap_area(candidate: &Shape, scene_shapes: &[Shape]) -> f64 {
    if scene_shapes.is_empty() {
        return 0.0;
    }
    let cand = Occupancy::of(candidate);
    let cand_box = bounding_box(candidate).expanded(OVERLAP_STROKE_WIDTH);
    scene_shapes
        .iter()
        .filter(|s| bounding_box(s).expanded(OVERLAP_STROKE_WIDTH).intersects(&cand_box))
        .map(|s| cand.overlap_ratio(&Occupancy::of(s)))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_scene_has_no_overlap() {
        let c = Shape::circle(0, Point2::new(0.5, 0.5), 0.1);
        assert_eq!(overlap_area(&c, &[]), 0.0);
    }

    #[test]
    fn disjoint_shapes_do_not_overlap() {
        let a = Shape::circle(0, Point2::new(0.25, 0.25), 0.1);
        let b = Shape::square(1, Point2::new(0.7, 0.7), 0.2, 0.3);
        assert_eq!(overlap_area(&a, &[b]), 0.0);
    }

    #[test]
    fn identical_shape_overlaps_fully() {
        let a = Shape::ellipse(0, Point2::new(0.5, 0.4), 0.2, 0.1, 0.4);
        let r = overlap_area(&a, &[a.clone().with_id(1)]);
        assert!((r - 1.0).abs() <= 0.01);
    }

    #[test]
    fn offset_squares_match_analytic_intersection() {
        let a = Shape::square(0, Point2::new(0.4, 0.4), 0.2, 0.0);
        let b = Shape::square(1, Point2::new(0.5, 0.5), 0.2, 0.0);
        // intersection 0.1 x 0.1 = 0.01 over min area 0.04
        let r = overlap_area(&a, &[b]);
        assert!((r - 0.25).abs() <= 0.02, "{r}");
    }

    #[test]
    fn line_stroke_has_area() {
        let l = Shape::line(0, Point2::new(0.2, 0.5), Point2::new(0.8, 0.5));
        let occ = Occupancy::of(&l);
        let expect = 0.6 * OVERLAP_STROKE_WIDTH;
        assert!((occ.area() - expect).abs() < expect * 0.3, "{} vs {expect}", occ.area());
    }
}
