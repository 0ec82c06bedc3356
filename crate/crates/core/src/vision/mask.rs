use serde::{Deserialize, Serialize};

use super::{Frame, Pixel, PixelSet};

/// Closed hue interval in degrees. `lo > hi` wraps through 360°.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HueWindow {
    pub lo: f64,
    pub hi: f64,
}

impl HueWindow {
    pub fn contains(&self, hue: f64) -> bool {
        if self.lo <= self.hi {
            hue >= self.lo && hue <= self.hi
        } else {
            hue >= self.lo || hue <= self.hi
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HsvThresholds {
    pub hue_windows: Vec<HueWindow>,
    pub saturation_min: f64,
    pub value_min: f64,
}

impl Default for HsvThresholds {
    fn default() -> Self {
        Self {
            hue_windows: vec![HueWindow { lo: 0.0, hi: 10.0 }, HueWindow { lo: 350.0, hi: 360.0 }],
            saturation_min: 0.6,
            value_min: 0.3,
        }
    }
}

impl HsvThresholds {
    pub fn validate(&self) -> Result<(), String> {
        if self.hue_windows.is_empty() {
            return Err("hue_windows must not be empty".into());
        }
        for w in &self.hue_windows {
            if !(0.0..=360.0).contains(&w.lo) || !(0.0..=360.0).contains(&w.hi) {
                return Err(format!("hue window [{}, {}] outside [0, 360]", w.lo, w.hi));
            }
        }
        if !(0.0..=1.0).contains(&self.saturation_min) || !(0.0..=1.0).contains(&self.value_min) {
            return Err("saturation_min and value_min must lie in [0, 1]".into());
        }
        Ok(())
    }

    pub fn accepts(&self, rgb: [u8; 3]) -> bool {
        let max = rgb[0].max(rgb[1]).max(rgb[2]);
        if f64::from(max) / 255.0 < self.value_min {
            return false;
        }
        let (h, s, _) = rgb_to_hsv(rgb);
        s >= self.saturation_min && self.hue_windows.iter().any(|w| w.contains(h))
    }
}

/// Hue in degrees `[0, 360)`, saturation and value in `[0, 1]`.
pub fn rgb_to_hsv(rgb: [u8; 3]) -> (f64, f64, f64) {
    let [r, g, b] = rgb.map(|c| f64::from(c) / 255.0);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let v = max;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    if delta == 0.0 {
        return (0.0, s, v);
    }
    let h = if max == r {
        60.0 * ((g - b) / delta)
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    (if h < 0.0 { h + 360.0 } else { h }, s, v)
}

pub fn red_mask(f: &Frame, t: &HsvThresholds) -> PixelSet {
    let mut pixels = Vec::new();
    // frames are mostly flat background, so remember the last verdict
    let mut last: Option<([u8; 3], bool)> = None;
    for (idx, &rgb) in f.pixels.iter().enumerate() {
        let hit = match last {
            Some((c, v)) if c == rgb => v,
            _ => {
                let v = t.accepts(rgb);
                last = Some((rgb, v));
                v
            }
        };
        if hit {
            let idx = idx as u32;
            pixels.push(Pixel {
                x: idx % f.width,
                y: idx / f.width,
            });
        }
    }
    PixelSet::from_sorted_unique(pixels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn black_frame_is_empty() {
        let f = Frame::filled(64, 48, [0, 0, 0]);
        assert!(red_mask(&f, &HsvThresholds::default()).is_empty());
    }

    #[test]
    fn single_red_pixel_among_gray() {
        let mut f = Frame::filled(64, 48, [128, 128, 128]);
        f.set(10, 20, [255, 0, 0]);
        let m = red_mask(&f, &HsvThresholds::default());
        assert_eq!(m.pixels(), &[Pixel { x: 10, y: 20 }]);
    }

    #[test]
    fn shadowed_red_still_masked() {
        // HSV of both triples: hue 0°, saturation 0.9, value 1.0 vs 0.47
        let bright = [255, 25, 25];
        let shadow = [120, 12, 12];
        let (hb, sb, vb) = rgb_to_hsv(bright);
        let (hs, ss, vs) = rgb_to_hsv(shadow);
        assert_eq!(hb, 0.0);
        assert_eq!(hs, 0.0);
        assert!((sb - 0.9019).abs() < 1e-3 && (ss - 0.9).abs() < 1e-12);
        assert!(vb == 1.0 && (vs - 120.0 / 255.0).abs() < 1e-12);

        let mut f = Frame::filled(8, 8, [90, 110, 140]);
        f.set(1, 1, bright);
        f.set(5, 6, shadow);
        let m = red_mask(&f, &HsvThresholds::default());
        assert_eq!(m.pixels(), &[Pixel { x: 1, y: 1 }, Pixel { x: 5, y: 6 }]);
    }

    #[test]
    fn wrapping_window() {
        let w = HueWindow { lo: 350.0, hi: 10.0 };
        assert!(w.contains(355.0) && w.contains(5.0) && !w.contains(180.0));
    }

    #[test]
    fn hsv_reference_values() {
        assert_eq!(rgb_to_hsv([0, 255, 0]), (120.0, 1.0, 1.0));
        assert_eq!(rgb_to_hsv([0, 0, 255]), (240.0, 1.0, 1.0));
        let (h, s, v) = rgb_to_hsv([255, 0, 128]);
        assert!((h - 329.882).abs() < 1e-3 && s == 1.0 && v == 1.0);
    }

    #[test]
    fn value_scaling_keeps_membership() {
        // scaling all channels keeps hue and saturation, so membership only
        // changes at the value floor
        let t = HsvThresholds::default();
        for base in [[250u8, 20, 10], [240, 30, 60], [200, 100, 100], [40, 200, 40]] {
            let reference = t.accepts(base);
            for k in [1.0, 0.8, 0.6, 0.4] {
                let scaled = base.map(|c| (f64::from(c) * k).round() as u8);
                if f64::from(*scaled.iter().max().unwrap()) / 255.0 >= t.value_min + 0.02 {
                    let (h0, s0, _) = rgb_to_hsv(base);
                    let (h1, s1, _) = rgb_to_hsv(scaled);
                    if (h0 - h1).abs() < 0.5 && (s0 - s1).abs() < 0.01 {
                        assert_eq!(t.accepts(scaled), reference, "{base:?} * {k}");
                    }
                }
            }
        }
    }
}
