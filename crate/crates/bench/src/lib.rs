//! Fixtures shared by the benchmarks.

use optrack_core::geo::{CameraIntrinsics, Position3, PtuPose};
use optrack_core::sim::{render_frame, RenderConfig};
use optrack_core::vision::{Frame, Pixel, PixelSet, VisionConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A noisy frame with the drone `distance` meters straight ahead.
pub fn drone_frame(distance: f64, seed: u64) -> Frame {
    let fg = VisionConfig::default().frame_geometry();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let drone = Position3::new(0.4, distance, 0.2);
    render_frame(drone, Position3::ORIGIN, 0.0, PtuPose::default(), &CameraIntrinsics::default(), &fg, &RenderConfig::default(), &mut rng)
}

/// `n` pixels: a few dense blobs over sparse clutter.
pub fn pixel_cloud(n: usize, seed: u64) -> PixelSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blobs: Vec<(f64, f64)> = (0..4).map(|_| (rng.random_range(40.0..600.0), rng.random_range(40.0..440.0))).collect();
    let pixels = (0..n)
        .map(|k| {
            if k % 5 == 0 {
                Pixel { x: rng.random_range(0..640), y: rng.random_range(0..480) }
            } else {
                let (cx, cy) = blobs[k % blobs.len()];
                let (r, a) = (rng.random_range(0.0..12.0f64), rng.random_range(0.0..std::f64::consts::TAU));
                Pixel { x: (cx + r * a.cos()) as u32, y: (cy + r * a.sin()) as u32 }
            }
        })
        .collect();
    PixelSet::new(pixels)
}
