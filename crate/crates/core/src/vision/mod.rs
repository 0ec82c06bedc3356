//! Per-frame drone detection: HSV red mask, DBSCAN, largest-cluster
//! selection and ellipse fit, plus the zoom policy.
//!
//! Frames are stored bottom-up: row 0 is the lowest image row, so the row
//! index grows in the same direction as tilt.

mod dbscan;
mod ellipse;
mod mask;
mod zoom;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{normalized_offset, FrameGeometry, NormalizedOffset, PixelPoint};

pub use dbscan::{cluster_pixels, select_drone_cluster, Clustering, DbscanParams};
pub use ellipse::{fit_ellipse, Conic, EllipseFit};
pub use mask::{red_mask, rgb_to_hsv, HsvThresholds, HueWindow};
pub use zoom::{fov_for_zoom, zoom_step, ZoomCommand, ZoomPolicy, ZoomState, MAX_ZOOM, MIN_ZOOM};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VisionError {
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
}

/// 8-bit RGB image, row-major starting at the bottom row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<[u8; 3]>,
}

impl Frame {
    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        Self {
            width,
            height,
            pixels: vec![rgb; width as usize * height as usize],
        }
    }

    fn index(&self, x: u32, y: u32) -> usize {
        assert!(x < self.width && y < self.height, "pixel ({x}, {y}) outside {}x{}", self.width, self.height);
        y as usize * self.width as usize + x as usize
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        self.pixels[self.index(x, y)]
    }

    pub fn set(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = self.index(x, y);
        self.pixels[i] = rgb;
    }
}

impl Default for Frame {
    fn default() -> Self {
        Self::filled(640, 480, [0, 0, 0])
    }
}

/// Integer pixel coordinate: column `x`, row `y`. Orders row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pixel {
    pub x: u32,
    pub y: u32,
}

impl Ord for Pixel {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for Pixel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Duplicate-free pixel list kept in row-major order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PixelSet(Vec<Pixel>);

impl PixelSet {
    pub fn new(mut pixels: Vec<Pixel>) -> Self {
        pixels.sort_unstable();
        pixels.dedup();
        Self(pixels)
    }

    pub(crate) fn from_sorted_unique(pixels: Vec<Pixel>) -> Self {
        debug_assert!(pixels.windows(2).all(|w| w[0] < w[1]));
        Self(pixels)
    }

    pub fn pixels(&self) -> &[Pixel] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn centroid(&self) -> PixelPoint {
        let n = self.0.len().max(1) as f64;
        let (sx, sy) = self
            .0
            .iter()
            .fold((0.0, 0.0), |(sx, sy), p| (sx + f64::from(p.x), sy + f64::from(p.y)));
        PixelPoint::new(sx / n, sy / n)
    }

    /// Inclusive `(min_x, min_y, max_x, max_y)`; `None` when empty.
    pub fn bounding_box(&self) -> Option<(u32, u32, u32, u32)> {
        let first = self.0.first()?;
        let last = self.0.last()?;
        let (min_x, max_x) = self
            .0
            .iter()
            .fold((u32::MAX, 0), |(lo, hi), p| (lo.min(p.x), hi.max(p.x)));
        Some((min_x, first.y, max_x, last.y))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VisionConfig {
    pub thresholds: HsvThresholds,
    pub dbscan: DbscanParams,
    pub res_x1: u32,
    pub res_x2: u32,
    /// Overrides the geometric frame center when set.
    pub center: Option<PixelPoint>,
}

impl Default for VisionConfig {
    fn default() -> Self {
        Self {
            thresholds: HsvThresholds::default(),
            dbscan: DbscanParams::default(),
            res_x1: 640,
            res_x2: 480,
            center: None,
        }
    }
}

impl VisionConfig {
    pub fn frame_geometry(&self) -> FrameGeometry {
        let mut fg = FrameGeometry::new(self.res_x1, self.res_x2);
        if let Some(c) = self.center {
            fg.center = c;
        }
        fg
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.res_x1 == 0 || self.res_x2 == 0 {
            return Err("frame resolution must be positive".into());
        }
        self.thresholds.validate()?;
        self.dbscan.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub ellipse: EllipseFit,
    pub pixel_count: usize,
    pub w: NormalizedOffset,
}

/// Centroid with semi-axes taken from the bounding box.
fn centroid_estimate(cluster: &PixelSet) -> EllipseFit {
    let (x0, y0, x1, y1) = cluster.bounding_box().unwrap_or_default();
    let half_w = 0.5 * f64::from(x1 - x0 + 1);
    let half_h = 0.5 * f64::from(y1 - y0 + 1);
    EllipseFit {
        center: cluster.centroid(),
        semi_major: half_w.max(half_h),
        semi_minor: half_w.min(half_h),
        orientation: if half_h > half_w { std::f64::consts::FRAC_PI_2 } else { 0.0 },
    }
}

/// A fit is kept only if its center lies in the cluster's bounding box and
/// its axes are no longer than the box diagonal.
fn plausible(e: &EllipseFit, cluster: &PixelSet) -> bool {
    let Some((x0, y0, x1, y1)) = cluster.bounding_box() else {
        return false;
    };
    let (x0, y0, x1, y1) = (f64::from(x0), f64::from(y0), f64::from(x1), f64::from(y1));
    let diag = (x1 - x0 + 1.0).hypot(y1 - y0 + 1.0);
    e.center.x1 >= x0 - 0.5
        && e.center.x1 <= x1 + 0.5
        && e.center.x2 >= y0 - 0.5
        && e.center.x2 <= y1 + 0.5
        && e.semi_minor > 0.0
        && e.semi_major <= diag
}

pub fn detect(f: &Frame, cfg: &VisionConfig) -> Option<Detection> {
    let mask = red_mask(f, &cfg.thresholds);
    let clustering = cluster_pixels(&mask, &cfg.dbscan);
    let cluster = select_drone_cluster(&clustering.clusters)?;
    let points: Vec<PixelPoint> = cluster
        .pixels()
        .iter()
        .map(|p| PixelPoint::new(f64::from(p.x), f64::from(p.y)))
        .collect();
    let ellipse = match fit_ellipse(&points) {
        Ok(e) if plausible(&e, cluster) => e,
        _ => centroid_estimate(cluster),
    };
    Some(Detection {
        ellipse,
        pixel_count: cluster.len(),
        w: normalized_offset(ellipse.center, &cfg.frame_geometry()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(f: &mut Frame, cx: f64, cy: f64, r_out: f64, thickness: f64) {
        for y in 0..f.height {
            for x in 0..f.width {
                let d = (f64::from(x) - cx).hypot(f64::from(y) - cy);
                if d <= r_out && d >= r_out - thickness {
                    f.set(x, y, [255, 0, 0]);
                }
            }
        }
    }

    #[test]
    fn pixel_order_is_row_major() {
        let mut v = vec![Pixel { x: 5, y: 1 }, Pixel { x: 9, y: 0 }, Pixel { x: 1, y: 1 }, Pixel { x: 9, y: 0 }];
        let s = PixelSet::new(std::mem::take(&mut v));
        assert_eq!(s.pixels(), &[Pixel { x: 9, y: 0 }, Pixel { x: 1, y: 1 }, Pixel { x: 5, y: 1 }]);
        assert_eq!(s.bounding_box(), Some((1, 0, 9, 1)));
    }

    #[test]
    fn black_frame_has_no_detection() {
        assert!(detect(&Frame::default(), &VisionConfig::default()).is_none());
    }

    #[test]
    fn ring_with_distractor() {
        let mut f = Frame::filled(640, 480, [60, 70, 60]);
        ring(&mut f, 200.3, 150.7, 30.0, 2.0);
        for (x, y) in [(500, 400), (501, 400), (500, 401), (501, 401), (502, 400), (502, 401), (500, 402), (501, 402)] {
            f.set(x, y, [250, 10, 10]);
        }
        let d = detect(&f, &VisionConfig::default()).unwrap();
        assert!((d.ellipse.center.x1 - 200.3).abs() < 0.5);
        assert!((d.ellipse.center.x2 - 150.7).abs() < 0.5);
        assert!((d.ellipse.major_diameter() - 58.0).abs() < 3.0);
    }

    #[test]
    fn tiny_cluster_uses_centroid() {
        let mut f = Frame::filled(64, 48, [0, 0, 0]);
        for (x, y) in [(10, 10), (11, 10), (10, 11), (11, 11)] {
            f.set(x, y, [255, 0, 0]);
        }
        let d = detect(&f, &VisionConfig { res_x1: 64, res_x2: 48, ..Default::default() }).unwrap();
        assert_eq!(d.pixel_count, 4);
        assert_eq!(d.ellipse.center, PixelPoint::new(10.5, 10.5));
        assert_eq!(d.ellipse.semi_major, 1.0);
        assert_eq!(d.w.w1, (10.5 - 31.5) / 64.0);
    }
}
