//! Great-circle distances.

pub const EARTH_RADIUS_METERS: f64 = 6_371_000.0;

/// Haversine distance in meters between two (latitude, longitude) points in degrees.
pub fn haversine_distance(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let phi1 = lat1.to_radians();
    let phi2 = lat2.to_radians();
    let dphi = (lat2 - lat1).to_radians();
    let dlambda = (lon2 - lon1).to_radians();
    let a = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_METERS * a.sqrt().min(1.0).asin()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_point_is_zero() {
        assert_eq!(haversine_distance(32.88, -117.23, 32.88, -117.23), 0.0);
    }

    #[test]
    fn thousandth_degree_latitude_at_equator() {
        // arc length of 0.001 degrees on the reference sphere
        let expected = EARTH_RADIUS_METERS * 0.001f64.to_radians();
        let d = haversine_distance(0.0, 0.0, 0.001, 0.0);
        assert!((d - expected).abs() < 1e-6);
        assert!((d - 111.0).abs() < 2.0);
    }

    #[test]
    fn symmetric() {
        let a = haversine_distance(10.0, 20.0, -5.0, 33.0);
        let b = haversine_distance(-5.0, 33.0, 10.0, 20.0);
        assert!((a - b).abs() < 1e-6);
    }
}
