//! Angle helpers.

use core::f64::consts::{PI, TAU};

/// Wraps an angle into `(-pi, pi]`.
///
/// Values already inside the interval are returned unchanged (bit for bit).
pub fn wrap(angle: f64) -> f64 {
    if angle > -PI && angle <= PI {
        return angle;
    }
    let mut a = angle % TAU;
    if a <= -PI {
        a += TAU;
    } else if a > PI {
        a -= TAU;
    }
    a
}

/// Interpolates from `a` toward `b` along the shorter arc, result wrapped.
pub fn lerp(a: f64, b: f64, frac: f64) -> f64 {
    wrap(a + frac * wrap(b - a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_keeps_interval() {
        assert_eq!(wrap(PI), PI);
        assert_eq!(wrap(-PI), PI);
        assert_eq!(wrap(0.3), 0.3);
        assert!((wrap(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap(-PI - 0.05 + TAU) - (PI - 0.05)).abs() < 1e-12);
        assert!((wrap(7.0) - (7.0 - TAU)).abs() < 1e-12);
    }

    #[test]
    fn lerp_takes_short_way_around() {
        let (a, b) = (3.0_f64, -3.0_f64);
        let mid = lerp(a, b, 0.5);
        // unwrap b by trying every multiple of 2pi and keeping the nearest copy
        let near_b = (-2..=2)
            .map(|k| b + k as f64 * TAU)
            .min_by(|p, q| (p - a).abs().total_cmp(&(q - a).abs()))
            .unwrap();
        let expected = a + (near_b - a) / 2.0;
        assert!((mid - expected).abs() < 1e-12);
        assert!((mid - PI).abs() < 1e-12);
        assert!(mid.abs() > 3.0);
    }

    proptest::proptest! {
        #[test]
        fn wrap_lands_in_interval(a in -1e4f64..1e4) {
            let w = wrap(a);
            proptest::prop_assert!(w > -PI && w <= PI);
            let k = ((a - w) / TAU).round();
            proptest::prop_assert!((a - w - k * TAU).abs() < 1e-9);
        }
    }
}
