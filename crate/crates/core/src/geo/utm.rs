//! WGS-84 Universal Transverse Mercator via the 6th-order Krüger series
//! (Karney's coefficients in the third flattening `n`).

use super::{GeoError, GeodeticPosition, Hemisphere, UtmPosition};

const WGS84_A: f64 = 6_378_137.0;
const WGS84_F: f64 = 1.0 / 298.257_223_563;
const K0: f64 = 0.9996;
const FALSE_EASTING: f64 = 500_000.0;
const FALSE_NORTHING_SOUTH: f64 = 10_000_000.0;
const MAX_LATITUDE: f64 = 84.0;

struct Series {
    /// `k0 * A`, the scaled rectifying radius.
    k0_a: f64,
    e: f64,
    alpha: [f64; 6],
    beta: [f64; 6],
}

fn series() -> &'static Series {
    static SERIES: std::sync::OnceLock<Series> = std::sync::OnceLock::new();
    SERIES.get_or_init(|| {
        let n = WGS84_F / (2.0 - WGS84_F);
        let (n2, n3, n4, n5, n6) = (n * n, n.powi(3), n.powi(4), n.powi(5), n.powi(6));
        let a = WGS84_A / (1.0 + n) * (1.0 + n2 / 4.0 + n4 / 64.0 + n6 / 256.0);
        let alpha = [
            n / 2.0 - 2.0 * n2 / 3.0 + 5.0 * n3 / 16.0 + 41.0 * n4 / 180.0 - 127.0 * n5 / 288.0
                + 7891.0 * n6 / 37800.0,
            13.0 * n2 / 48.0 - 3.0 * n3 / 5.0 + 557.0 * n4 / 1440.0 + 281.0 * n5 / 630.0
                - 1_983_433.0 * n6 / 1_935_360.0,
            61.0 * n3 / 240.0 - 103.0 * n4 / 140.0 + 15061.0 * n5 / 26880.0
                + 167_603.0 * n6 / 181_440.0,
            49561.0 * n4 / 161_280.0 - 179.0 * n5 / 168.0 + 6_601_661.0 * n6 / 7_257_600.0,
            34729.0 * n5 / 80640.0 - 3_418_889.0 * n6 / 1_995_840.0,
            212_378_941.0 * n6 / 319_334_400.0,
        ];
        let beta = [
            n / 2.0 - 2.0 * n2 / 3.0 + 37.0 * n3 / 96.0 - n4 / 360.0 - 81.0 * n5 / 512.0
                + 96199.0 * n6 / 604_800.0,
            n2 / 48.0 + n3 / 15.0 - 437.0 * n4 / 1440.0 + 46.0 * n5 / 105.0
                - 1_118_711.0 * n6 / 3_870_720.0,
            17.0 * n3 / 480.0 - 37.0 * n4 / 840.0 - 209.0 * n5 / 4480.0 + 5569.0 * n6 / 90720.0,
            4397.0 * n4 / 161_280.0 - 11.0 * n5 / 504.0 - 830_251.0 * n6 / 7_257_600.0,
            4583.0 * n5 / 161_280.0 - 108_847.0 * n6 / 3_991_680.0,
            20_648_693.0 * n6 / 638_668_800.0,
        ];
        Series {
            k0_a: K0 * a,
            e: (WGS84_F * (2.0 - WGS84_F)).sqrt(),
            alpha,
            beta,
        }
    })
}

/// Standard zone number for a position, including the Norway and Svalbard
/// exceptions.
pub fn utm_zone_for(latitude: f64, longitude: f64) -> u8 {
    if (56.0..64.0).contains(&latitude) && (3.0..12.0).contains(&longitude) {
        return 32;
    }
    if latitude >= 72.0 {
        match longitude {
            l if (0.0..9.0).contains(&l) => return 31,
            l if (9.0..21.0).contains(&l) => return 33,
            l if (21.0..33.0).contains(&l) => return 35,
            l if (33.0..42.0).contains(&l) => return 37,
            _ => {}
        }
    }
    // floor((lon + 180) / 6) + 1, clamped for lon just below 180
    (((longitude + 180.0) / 6.0).floor() as i64 + 1).clamp(1, 60) as u8
}

fn central_meridian(zone: u8) -> f64 {
    (f64::from(zone) * 6.0 - 183.0).to_radians()
}

pub fn geodetic_to_utm(g: GeodeticPosition) -> Result<UtmPosition, GeoError> {
    g.validate()?;
    let hemisphere = if g.latitude < 0.0 {
        Hemisphere::South
    } else {
        Hemisphere::North
    };
    geodetic_to_utm_in_zone(g, utm_zone_for(g.latitude, g.longitude), hemisphere)
}

/// Projects into a fixed zone and hemisphere. Easting/northing may leave
/// the nominal zone ranges when the position lies outside the zone.
pub fn geodetic_to_utm_in_zone(
    g: GeodeticPosition,
    zone: u8,
    hemisphere: Hemisphere,
) -> Result<UtmPosition, GeoError> {
    g.validate()?;
    if g.latitude.abs() > MAX_LATITUDE {
        return Err(GeoError::OutOfUtmBand {
            latitude: g.latitude,
        });
    }
    if !(1..=60).contains(&zone) {
        return Err(GeoError::InvalidZone(zone));
    }
    let s = series();
    let phi = g.latitude.to_radians();
    let lambda = super::wrap_angle(g.longitude.to_radians() - central_meridian(zone));

    let sin_phi = phi.sin();
    let t = (sin_phi.atanh() - s.e * (s.e * sin_phi).atanh()).sinh();
    let xi_p = t.atan2(lambda.cos());
    let eta_p = (lambda.sin() / (1.0 + t * t).sqrt()).atanh();

    let mut xi = xi_p;
    let mut eta = eta_p;
    for (j, a) in s.alpha.iter().enumerate() {
        let k = 2.0 * (j + 1) as f64;
        xi += a * (k * xi_p).sin() * (k * eta_p).cosh();
        eta += a * (k * xi_p).cos() * (k * eta_p).sinh();
    }

    let false_northing = match hemisphere {
        Hemisphere::North => 0.0,
        Hemisphere::South => FALSE_NORTHING_SOUTH,
    };
    Ok(UtmPosition {
        zone,
        hemisphere,
        easting: FALSE_EASTING + s.k0_a * eta,
        northing: false_northing + s.k0_a * xi,
        altitude: g.altitude,
    })
}

pub fn utm_to_geodetic(u: &UtmPosition) -> Result<GeodeticPosition, GeoError> {
    if !(1..=60).contains(&u.zone) {
        return Err(GeoError::InvalidZone(u.zone));
    }
    let s = series();
    let false_northing = match u.hemisphere {
        Hemisphere::North => 0.0,
        Hemisphere::South => FALSE_NORTHING_SOUTH,
    };
    let xi = (u.northing - false_northing) / s.k0_a;
    let eta = (u.easting - FALSE_EASTING) / s.k0_a;

    let mut xi_p = xi;
    let mut eta_p = eta;
    for (j, b) in s.beta.iter().enumerate() {
        let k = 2.0 * (j + 1) as f64;
        xi_p -= b * (k * xi).sin() * (k * eta).cosh();
        eta_p -= b * (k * xi).cos() * (k * eta).sinh();
    }

    let tau_p = xi_p.sin() / (eta_p.sinh().powi(2) + xi_p.cos().powi(2)).sqrt();
    let lambda = eta_p.sinh().atan2(xi_p.cos());

    // Newton iteration for tan(phi) from the conformal tan(phi').
    let e = s.e;
    let e2m = 1.0 - e * e;
    let mut tau = tau_p;
    for _ in 0..8 {
        let sigma = (e * (e * tau / (1.0 + tau * tau).sqrt()).atanh()).sinh();
        let tau_i = tau * (1.0 + sigma * sigma).sqrt() - sigma * (1.0 + tau * tau).sqrt();
        let d_tau = (tau_p - tau_i) / (1.0 + tau_i * tau_i).sqrt()
            * (1.0 + e2m * tau * tau)
            / (e2m * (1.0 + tau * tau).sqrt());
        tau += d_tau;
        if d_tau.abs() < 1e-15 * tau.abs().max(1.0) {
            break;
        }
    }

    let latitude = tau.atan().to_degrees();
    let mut longitude = (central_meridian(u.zone) + lambda).to_degrees();
    if longitude >= 180.0 {
        longitude -= 360.0;
    } else if longitude < -180.0 {
        longitude += 360.0;
    }
    Ok(GeodeticPosition {
        latitude,
        longitude,
        altitude: u.altitude,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn g(lat: f64, lon: f64) -> GeodeticPosition {
        GeodeticPosition::new(lat, lon, 0.0).unwrap()
    }

    #[test]
    fn equator_on_central_meridian() {
        let u = geodetic_to_utm(g(0.0, 3.0)).unwrap();
        assert_eq!(u.zone, 31);
        assert_eq!(u.hemisphere, Hemisphere::North);
        assert_abs_diff_eq!(u.easting, 500_000.0, epsilon = 1e-9);
        assert_abs_diff_eq!(u.northing, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn just_south_of_equator() {
        let u = geodetic_to_utm(g(-0.0001, 3.0)).unwrap();
        assert_eq!(u.hemisphere, Hemisphere::South);
        assert!(u.northing < 10_000_000.0 && u.northing > 9_999_980.0);
        // PROJ 9 (EPSG:32731): 9999988.946995
        assert_abs_diff_eq!(u.northing, 9_999_988.946_995, epsilon = 1e-3);
    }

    #[test]
    fn reference_conversions() {
        // Frozen from PROJ 9 (pyproj 3.7.1), EPSG:4326 -> EPSG:326xx/327xx.
        let cases = [
            (48.1375, 11.5755, 32, 691_602.659_687, 5_334_791.144_536),
            (40.7484, -73.9857, 18, 585_628.409_088, 4_511_322.447_496),
            (-33.8688, 151.2093, 56, 334_368.633_648, 6_250_948.345_385),
            (83.9, 17.9, 33, 534_390.831_270, 9_317_795.753_332),
            (-80.0, 0.1, 31, 443_803.943_150, 1_117_013.303_815),
        ];
        for (lat, lon, zone, e, n) in cases {
            let u = geodetic_to_utm(g(lat, lon)).unwrap();
            assert_eq!(u.zone, zone, "zone for {lat},{lon}");
            assert_abs_diff_eq!(u.easting, e, epsilon = 1e-3);
            assert_abs_diff_eq!(u.northing, n, epsilon = 1e-3);
        }
    }

    #[test]
    fn outside_band_rejected() {
        assert!(matches!(
            geodetic_to_utm(g(84.5, 10.0)),
            Err(GeoError::OutOfUtmBand { .. })
        ));
        assert!(matches!(
            geodetic_to_utm(g(-85.0, 10.0)),
            Err(GeoError::OutOfUtmBand { .. })
        ));
    }

    #[test]
    fn zone_exceptions() {
        assert_eq!(utm_zone_for(60.0, 5.0), 32);
        assert_eq!(utm_zone_for(78.0, 15.0), 33);
        assert_eq!(utm_zone_for(0.0, -180.0), 1);
        assert_eq!(utm_zone_for(0.0, 179.999), 60);
    }

    #[test]
    fn altitude_passes_through() {
        let u = geodetic_to_utm(GeodeticPosition::new(48.0, 11.0, 523.25).unwrap()).unwrap();
        assert_eq!(u.altitude, 523.25);
    }

    proptest! {
        #[test]
        fn forward_inverse_round_trip(lat in -84.0..84.0f64, lon in -180.0..180.0f64) {
            prop_assume!(lon < 180.0);
            let p = g(lat, lon);
            let u = geodetic_to_utm(p).unwrap();
            prop_assert!(u.easting > 0.0 && u.easting < 1e6);
            prop_assert!(u.northing >= 0.0 && u.northing <= 1e7);
            let back = utm_to_geodetic(&u).unwrap();
            let again = geodetic_to_utm_in_zone(back, u.zone, u.hemisphere).unwrap();
            prop_assert!((again.easting - u.easting).abs() < 1e-6);
            prop_assert!((again.northing - u.northing).abs() < 1e-6);
            // 1e-6 m is ~1e-11 degrees
            prop_assert!((back.latitude - lat).abs() < 1e-10);
        }
    }
}
