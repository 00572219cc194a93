//! Escape-time rasters of the parameter plane and of dynamical planes, and
//! polyline overlays of traced rays.

use alloc::vec::Vec;

use crate::dynamics::{escape_orbit, EscapeParams, Verdict};
use crate::error::{Error, Result};
use crate::param::ParamRayTrace;
use crate::point::ComplexPoint;
use crate::rays::RayTrace;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub center: ComplexPoint,
    pub width: f64,
    pub height: f64,
    pub px_w: usize,
    pub px_h: usize,
    pub budget: usize,
    pub r_esc: f64,
}

impl GridSpec {
    pub fn new(center: ComplexPoint, width: f64, height: f64, px_w: usize, px_h: usize) -> Result<Self> {
        let g = GridSpec {
            center,
            width,
            height,
            px_w,
            px_h,
            budget: EscapeParams::default().budget,
            r_esc: EscapeParams::default().r_esc,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.px_w == 0 || self.px_h == 0 {
            return Err(Error::InvalidInput("grid needs at least one pixel in each direction"));
        }
        if !(self.width > 0.0 && self.height > 0.0 && self.width.is_finite() && self.height.is_finite()) {
            return Err(Error::InvalidInput("grid extent must be positive and finite"));
        }
        if self.budget == 0 {
            return Err(Error::InvalidInput("iteration budget must be positive"));
        }
        Ok(())
    }

    /// Center of pixel `(i, j)`; column `i` runs left to right, row `j` top
    /// to bottom. Centers are placed symmetrically about the grid center.
    pub fn pixel_center(&self, i: usize, j: usize) -> ComplexPoint {
        let fw = self.px_w as f64;
        let fh = self.px_h as f64;
        let x = self.center.re() + ((2 * i + 1) as f64 - fw) / (2.0 * fw) * self.width;
        let y = self.center.im() + ((fh - 1.0) - (2 * j) as f64) / (2.0 * fh) * self.height;
        ComplexPoint::new(x, y).expect("finite grid")
    }

    /// Continuous pixel coordinates of a plane point (may lie outside).
    pub fn to_pixel(&self, z: ComplexPoint) -> (f64, f64) {
        let left = self.center.re() - 0.5 * self.width;
        let top = self.center.im() + 0.5 * self.height;
        (
            (z.re() - left) / self.width * self.px_w as f64,
            (top - z.im()) / self.height * self.px_h as f64,
        )
    }

    fn escape_params(&self) -> EscapeParams {
        EscapeParams {
            budget: self.budget,
            r_esc: self.r_esc,
            ..EscapeParams::default()
        }
    }
}

/// Which plane a grid lives in.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Plane {
    /// Pixel is `kappa`, orbit starts at `kappa`.
    Parameter,
    /// Pixel is `z_0` for the fixed parameter.
    Dynamic(ComplexPoint),
}

/// Escape index of one pixel, `None` if not escaping.
pub fn pixel_escape(grid: &GridSpec, plane: Plane, i: usize, j: usize) -> Option<u32> {
    let p = grid.pixel_center(i, j);
    let (kappa, z0) = match plane {
        Plane::Parameter => (p, p),
        Plane::Dynamic(k) => (k, p),
    };
    match escape_orbit(kappa, z0, &grid.escape_params()).verdict {
        Verdict::Escaping { detected_at } => Some(detected_at.min(u32::MAX as usize) as u32),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EscapeImage {
    pub grid: GridSpec,
    /// Row-major, `px_w * px_h` entries.
    pub counts: Vec<Option<u32>>,
}

impl EscapeImage {
    pub fn from_rows(grid: GridSpec, counts: Vec<Option<u32>>) -> Result<Self> {
        if counts.len() != grid.px_w * grid.px_h {
            return Err(Error::InvalidInput("counts do not match grid dimensions"));
        }
        Ok(EscapeImage { grid, counts })
    }

    pub fn get(&self, i: usize, j: usize) -> Option<u32> {
        self.counts[j * self.grid.px_w + i]
    }
}

pub fn render_row(grid: &GridSpec, plane: Plane, j: usize) -> Vec<Option<u32>> {
    (0..grid.px_w).map(|i| pixel_escape(grid, plane, i, j)).collect()
}

pub fn render_plane(grid: &GridSpec, plane: Plane) -> Result<EscapeImage> {
    grid.validate()?;
    let counts = (0..grid.px_h).flat_map(|j| render_row(grid, plane, j)).collect();
    EscapeImage::from_rows(*grid, counts)
}

pub fn render_parameter_plane(grid: &GridSpec) -> Result<EscapeImage> {
    render_plane(grid, Plane::Parameter)
}

pub fn render_dynamic_plane(kappa: ComplexPoint, grid: &GridSpec) -> Result<EscapeImage> {
    render_plane(grid, Plane::Dynamic(kappa))
}

pub type Rgb = [u8; 3];

pub const NOT_ESCAPED: Rgb = [0, 0, 0];

/// Escape index `n` is drawn in `PALETTE[n % 16]`.
pub const PALETTE: [Rgb; 16] = [
    [66, 30, 15],
    [25, 7, 26],
    [9, 1, 47],
    [4, 4, 73],
    [0, 7, 100],
    [12, 44, 138],
    [24, 82, 177],
    [57, 125, 209],
    [134, 181, 229],
    [211, 236, 248],
    [241, 233, 191],
    [248, 201, 95],
    [255, 170, 0],
    [204, 128, 0],
    [153, 87, 0],
    [106, 52, 3],
];

/// Overlay polylines cycle through these colours.
pub const OVERLAY_COLORS: [Rgb; 4] = [[255, 255, 255], [255, 40, 40], [40, 255, 120], [255, 230, 0]];

pub fn color_of(count: Option<u32>) -> Rgb {
    match count {
        None => NOT_ESCAPED,
        Some(n) => PALETTE[n as usize % PALETTE.len()],
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    /// Row-major RGB triples.
    pub data: Vec<u8>,
}

impl RgbImage {
    pub fn pixel(&self, i: usize, j: usize) -> Rgb {
        let o = 3 * (j * self.width + i);
        [self.data[o], self.data[o + 1], self.data[o + 2]]
    }

    fn put(&mut self, i: usize, j: usize, c: Rgb) {
        let o = 3 * (j * self.width + i);
        self.data[o..o + 3].copy_from_slice(&c);
    }
}

pub fn colorize(image: &EscapeImage) -> RgbImage {
    let mut data = Vec::with_capacity(3 * image.counts.len());
    for &c in &image.counts {
        data.extend_from_slice(&color_of(c));
    }
    RgbImage {
        width: image.grid.px_w,
        height: image.grid.px_h,
        data,
    }
}

/// A curve in the plane of an image.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Polyline {
    pub points: Vec<ComplexPoint>,
}

impl From<&RayTrace> for Polyline {
    fn from(tr: &RayTrace) -> Self {
        Polyline {
            points: tr.samples.iter().map(|s| s.value).collect(),
        }
    }
}

impl From<&ParamRayTrace> for Polyline {
    fn from(tr: &ParamRayTrace) -> Self {
        Polyline {
            points: tr.samples.iter().map(|s| s.kappa).collect(),
        }
    }
}

/// Colour the escape image and draw each polyline on top, clipped to the
/// grid. Polyline `k` uses `OVERLAY_COLORS[k % 4]`.
pub fn overlay_rays(image: &EscapeImage, traces: &[Polyline]) -> RgbImage {
    let mut out = colorize(image);
    let grid = &image.grid;
    for (k, line) in traces.iter().enumerate() {
        let color = OVERLAY_COLORS[k % OVERLAY_COLORS.len()];
        if line.points.len() == 1 {
            let (x, y) = grid.to_pixel(line.points[0]);
            if let Some((i, j)) = pixel_index(&out, x, y) {
                out.put(i, j, color);
            }
        }
        for w in line.points.windows(2) {
            let a = grid.to_pixel(w[0]);
            let b = grid.to_pixel(w[1]);
            if let Some((a, b)) = clip(a, b, out.width as f64, out.height as f64) {
                draw_segment(&mut out, a, b, color);
            }
        }
    }
    out
}

fn pixel_index(img: &RgbImage, x: f64, y: f64) -> Option<(usize, usize)> {
    if x >= 0.0 && y >= 0.0 && x < img.width as f64 && y < img.height as f64 {
        Some((x as usize, y as usize))
    } else {
        None
    }
}

/// Liang-Barsky clipping to `[0, w] x [0, h]`.
fn clip(a: (f64, f64), b: (f64, f64), w: f64, h: f64) -> Option<((f64, f64), (f64, f64))> {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for (p, q) in [(-dx, a.0), (dx, w - a.0), (-dy, a.1), (dy, h - a.1)] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    if t0 > t1 {
        return None;
    }
    Some(((a.0 + t0 * dx, a.1 + t0 * dy), (a.0 + t1 * dx, a.1 + t1 * dy)))
}

fn draw_segment(img: &mut RgbImage, a: (f64, f64), b: (f64, f64), color: Rgb) {
    let cell = |v: f64, n: usize| (v.max(0.0) as i64).min(n as i64 - 1);
    let (mut x0, mut y0) = (cell(a.0, img.width), cell(a.1, img.height));
    let (x1, y1) = (cell(b.0, img.width), cell(b.1, img.height));
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    loop {
        img.put(x0 as usize, y0 as usize, color);
        if x0 == x1 && y0 == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x0 += sx;
        }
        if e2 <= dx {
            err += dx;
            y0 += sy;
        }
    }
}
