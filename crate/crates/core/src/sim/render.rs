use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::geo::{
    in_front, misalignment_from_positions, offset_from_misalignment, CameraIntrinsics, FrameGeometry, PixelPoint,
    Position3, PtuPose,
};
use crate::vision::Frame;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Distractors {
    pub count: u32,
    /// Side of each square blob, pixels.
    pub size_px: u32,
    pub color: [u8; 3],
}

impl Default for Distractors {
    fn default() -> Self {
        Self {
            count: 0,
            size_px: 3,
            color: [230, 30, 20],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RenderConfig {
    /// Outer radius of the LED ring, meters.
    pub led_ring_radius: f64,
    pub ring_thickness_px: f64,
    /// Rings are never drawn smaller than this outer radius, pixels.
    pub min_ring_radius_px: f64,
    /// Red channel of the ring is drawn uniformly from this range per frame.
    pub ring_brightness: [u8; 2],
    pub background: [u8; 3],
    pub distractors: Distractors,
    /// Per-pixel probability of a stray red pixel.
    pub noise_probability: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            led_ring_radius: 0.3,
            ring_thickness_px: 2.0,
            min_ring_radius_px: 1.5,
            ring_brightness: [140, 255],
            background: [88, 112, 96],
            distractors: Distractors::default(),
            noise_probability: 2e-5,
        }
    }
}

impl RenderConfig {
    pub fn noiseless() -> Self {
        Self {
            ring_brightness: [255, 255],
            noise_probability: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.led_ring_radius > 0.0) {
            return Err("led_ring_radius must be > 0".into());
        }
        if !(self.ring_thickness_px > 0.0 && self.min_ring_radius_px > 0.0) {
            return Err("ring_thickness_px and min_ring_radius_px must be > 0".into());
        }
        if self.ring_brightness[0] > self.ring_brightness[1] {
            return Err("ring_brightness must be [low, high]".into());
        }
        if !(0.0..=1.0).contains(&self.noise_probability) {
            return Err("noise_probability must lie in [0, 1]".into());
        }
        Ok(())
    }
}

/// Where the ring lands in the image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingProjection {
    pub center: PixelPoint,
    pub radius_px: f64,
}

/// Pinhole projection of the LED ring; `None` when it is behind the camera.
pub fn project_ring(
    drone: Position3,
    station: Position3,
    mount_heading: f64,
    pose: PtuPose,
    intrinsics: &CameraIntrinsics,
    fg: &FrameGeometry,
    ring_radius: f64,
) -> Option<RingProjection> {
    let angles = misalignment_from_positions(station, mount_heading, pose, drone).ok()?;
    if !in_front(&angles) {
        return None;
    }
    let center = offset_from_misalignment(angles, intrinsics).to_pixel(fg);
    let d = (drone - station).norm();
    let radius_px = ring_radius / (2.0 * d * (0.5 * intrinsics.hfov).tan()) * f64::from(fg.res_x1);
    Some(RingProjection { center, radius_px })
}

fn fill_disc_band(f: &mut Frame, center: PixelPoint, r_in: f64, r_out: f64, rgb: [u8; 3]) {
    let (w, h) = (f64::from(f.width), f64::from(f.height));
    let x0 = (center.x1 - r_out).ceil().max(0.0);
    let x1 = (center.x1 + r_out).floor().min(w - 1.0);
    let y0 = (center.x2 - r_out).ceil().max(0.0);
    let y1 = (center.x2 + r_out).floor().min(h - 1.0);
    if x0 > x1 || y0 > y1 {
        return;
    }
    for y in y0 as u32..=y1 as u32 {
        for x in x0 as u32..=x1 as u32 {
            let r = (f64::from(x) - center.x1).hypot(f64::from(y) - center.x2);
            if r <= r_out && r >= r_in {
                f.set(x, y, rgb);
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub fn render_frame<R: Rng + ?Sized>(
    true_drone: Position3,
    station: Position3,
    mount_heading: f64,
    pose: PtuPose,
    intrinsics: &CameraIntrinsics,
    fg: &FrameGeometry,
    rc: &RenderConfig,
    rng: &mut R,
) -> Frame {
    let mut f = Frame::filled(fg.res_x1, fg.res_x2, rc.background);
    // draws are made even when the ring is off-frame so the stream stays aligned
    let brightness = rng.random_range(rc.ring_brightness[0]..=rc.ring_brightness[1]);
    let dim = (f64::from(brightness) * 0.08).round() as u8;
    if let Some(ring) = project_ring(true_drone, station, mount_heading, pose, intrinsics, fg, rc.led_ring_radius) {
        let r_out = ring.radius_px.max(rc.min_ring_radius_px);
        let r_in = (r_out - rc.ring_thickness_px).max(0.0);
        fill_disc_band(&mut f, ring.center, r_in, r_out, [brightness, dim, dim]);
    }
    let side = rc.distractors.size_px;
    for _ in 0..rc.distractors.count {
        let x0 = rng.random_range(0..fg.res_x1.saturating_sub(side).max(1));
        let y0 = rng.random_range(0..fg.res_x2.saturating_sub(side).max(1));
        for y in y0..(y0 + side).min(fg.res_x2) {
            for x in x0..(x0 + side).min(fg.res_x1) {
                f.set(x, y, rc.distractors.color);
            }
        }
    }
    if rc.noise_probability > 0.0 {
        let n = u64::from(fg.res_x1) * u64::from(fg.res_x2);
        let k = Binomial::new(n, rc.noise_probability).expect("validated probability").sample(rng);
        for _ in 0..k {
            let x = rng.random_range(0..fg.res_x1);
            let y = rng.random_range(0..fg.res_x2);
            f.set(x, y, [255, 0, 0]);
        }
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::wrap_angle;
    use crate::vision::{detect, VisionConfig};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (CameraIntrinsics, FrameGeometry) {
        (CameraIntrinsics::default(), FrameGeometry::default())
    }

    #[test]
    fn on_boresight_is_centered() {
        let (c, fg) = setup();
        let drone = Position3::new(0.0, 20.0, 0.0);
        let ring = project_ring(drone, Position3::ORIGIN, 0.0, PtuPose::default(), &c, &fg, 0.3).unwrap();
        assert_abs_diff_eq!(ring.center.x1, fg.center.x1, epsilon = 1e-9);
        assert_abs_diff_eq!(ring.center.x2, fg.center.x2, epsilon = 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = render_frame(drone, Position3::ORIGIN, 0.0, PtuPose::default(), &c, &fg, &RenderConfig::noiseless(), &mut rng);
        let d = detect(&f, &VisionConfig::default()).unwrap();
        assert!((d.ellipse.center.x1 - fg.center.x1).abs() <= 0.5);
        assert!((d.ellipse.center.x2 - fg.center.x2).abs() <= 0.5);
    }

    #[test]
    fn half_fov_lands_on_the_edge() {
        let (c, fg) = setup();
        let pose = PtuPose::new(-c.hfov / 2.0, 0.0);
        let ring = project_ring(Position3::new(0.0, 20.0, 0.0), Position3::ORIGIN, 0.0, pose, &c, &fg, 0.3).unwrap();
        assert_abs_diff_eq!(ring.center.x1, fg.center.x1 + 0.5 * f64::from(fg.res_x1), epsilon = 1e-9);
    }

    #[test]
    fn radius_halves_with_double_distance() {
        let (c, fg) = setup();
        let near = project_ring(Position3::new(0.0, 10.0, 0.0), Position3::ORIGIN, 0.0, PtuPose::default(), &c, &fg, 0.3).unwrap();
        let far = project_ring(Position3::new(0.0, 20.0, 0.0), Position3::ORIGIN, 0.0, PtuPose::default(), &c, &fg, 0.3).unwrap();
        assert_abs_diff_eq!(near.radius_px, 2.0 * far.radius_px, epsilon = 1e-9);
        // measured diameters from noiseless frames agree within a pixel
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rc = RenderConfig::noiseless();
        let size = |d: f64, rng: &mut ChaCha8Rng| {
            let f = render_frame(Position3::new(0.0, d, 0.0), Position3::ORIGIN, 0.0, PtuPose::default(), &c, &fg, &rc, rng);
            detect(&f, &VisionConfig::default()).unwrap().ellipse.semi_major
        };
        let (a, b) = (size(10.0, &mut rng), size(20.0, &mut rng));
        assert!((a - near.radius_px).abs() <= 1.0, "{a} vs {}", near.radius_px);
        assert!((b - far.radius_px).abs() <= 1.0, "{b} vs {}", far.radius_px);
    }

    #[test]
    fn behind_camera_renders_background_only() {
        let (c, fg) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = render_frame(Position3::new(0.0, -20.0, 0.0), Position3::ORIGIN, 0.0, PtuPose::default(), &c, &fg, &RenderConfig::noiseless(), &mut rng);
        assert!(f.pixels.iter().all(|&p| p == RenderConfig::noiseless().background));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn detect_inverts_render(
            w1 in -0.35..0.35f64, w2 in -0.3..0.3f64, d in 8.0..50.0f64,
            heading in -3.0..3.0f64, pan in -3.0..3.0f64, tilt in -0.3..0.6f64,
        ) {
            let (c, fg) = setup();
            let pose = PtuPose::new(pan, tilt);
            // place the drone at the requested angular offset from the boresight
            let a = crate::geo::misalignment_from_offset(crate::geo::NormalizedOffset::new(w1, w2), &c);
            let dir = Position3::from_azimuth_elevation(wrap_angle(heading + pan + a.d_phi), tilt + a.d_theta);
            let station = Position3::new(3.0, -4.0, 1.0);
            let drone = station + dir * d;
            let ring = project_ring(drone, station, heading, pose, &c, &fg, 0.3).unwrap();
            prop_assume!(ring.radius_px * 2.0 >= 20.0 && ring.radius_px * 2.0 <= 120.0);
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            let f = render_frame(drone, station, heading, pose, &c, &fg, &RenderConfig::noiseless(), &mut rng);
            let det = detect(&f, &VisionConfig::default()).unwrap();
            prop_assert!((det.ellipse.center.x1 - ring.center.x1).hypot(det.ellipse.center.x2 - ring.center.x2) <= 1.0);
        }
    }
}
