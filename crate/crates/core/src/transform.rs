//! Front-fixing change of variables `y = x / s(t)`.
//!
//! Under this map `u(t, x) = w(t, y)` and the moving interval `[0, s(t)]`
//! becomes `[0, 1]`, at the price of a time-dependent diffusion scale
//! `f = s^-2` and an advection coefficient `g = y s' / s`.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("coordinate {value} outside [0, {upper}]")]
    OutOfDomain { value: f64, upper: f64 },
    #[error("boundary stencil needs at least 2 intervals (got {0})")]
    GridTooCoarse(usize),
}

pub fn to_fixed(x: f64, s: f64) -> Result<f64, TransformError> {
    if !(0.0..=s).contains(&x) {
        return Err(TransformError::OutOfDomain { value: x, upper: s });
    }
    Ok(x / s)
}

pub fn from_fixed(y: f64, s: f64) -> Result<f64, TransformError> {
    if !(0.0..=1.0).contains(&y) {
        return Err(TransformError::OutOfDomain { value: y, upper: 1.0 });
    }
    Ok(y * s)
}

/// Diffusion scale `f = 1/s^2` and advection coefficient `g = y s'/s`.
#[inline]
pub fn coefficients(s: f64, s_prime: f64, y: f64) -> (f64, f64) {
    (1.0 / (s * s), y * s_prime / s)
}

#[inline]
pub fn physical_gradient(w_y: f64, s: f64) -> f64 {
    w_y / s
}

/// Second-order one-sided slope at `y = 1`; exact for quadratics.
pub fn boundary_slope(profile: &[f64], dy: f64) -> Result<f64, TransformError> {
    let n = profile.len().saturating_sub(1);
    if n < 2 {
        return Err(TransformError::GridTooCoarse(n));
    }
    Ok((3.0 * profile[n] - 4.0 * profile[n - 1] + profile[n - 2]) / (2.0 * dy))
}

/// First-order one-sided slope at `y = 1`.
///
/// Only used to degrade the scheme on purpose (fault-injection runs of the
/// verification suite).
pub fn boundary_slope_first_order(profile: &[f64], dy: f64) -> Result<f64, TransformError> {
    let n = profile.len().saturating_sub(1);
    if n < 2 {
        return Err(TransformError::GridTooCoarse(n));
    }
    Ok((profile[n] - profile[n - 1]) / dy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(n: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..=n).map(|i| f(i as f64 / n as f64)).collect()
    }

    #[test]
    fn to_fixed_examples() {
        assert_eq!(to_fixed(0.0, 3.0), Ok(0.0));
        assert_eq!(to_fixed(2.5, 2.5), Ok(1.0));
        assert_eq!(to_fixed(1.5, 2.0), Ok(0.75));
        assert!(to_fixed(-0.1, 2.0).is_err());
        assert!(to_fixed(2.1, 2.0).is_err());
    }

    #[test]
    fn from_fixed_examples() {
        assert_eq!(from_fixed(1.0, 4.2), Ok(4.2));
        assert_eq!(from_fixed(0.75, 2.0), Ok(1.5));
        let y = to_fixed(0.3, 1.7).unwrap();
        let x = from_fixed(y, 1.7).unwrap();
        assert!((x - 0.3).abs() <= f64::EPSILON * 0.3);
        assert!(from_fixed(1.0 + 1e-12, 1.0).is_err());
    }

    #[test]
    fn coefficient_examples() {
        assert_eq!(coefficients(2.0, 0.0, 0.9), (0.25, 0.0));
        assert_eq!(coefficients(1.0, 1.0, 1.0), (1.0, 1.0));
        assert_eq!(coefficients(2.0, 0.5, 0.5), (0.25, 0.125));
    }

    #[test]
    fn gradient_examples() {
        assert_eq!(physical_gradient(-2.0, 2.0), -1.0);
        assert_eq!(physical_gradient(0.0, 17.0), 0.0);
        // w = 1 - y^2 on s = 2 is u = 1 - (x/2)^2, u_x(2) = -1
        let w = sample(4, |y| 1.0 - y * y);
        let w_y = boundary_slope(&w, 0.25).unwrap();
        assert_eq!(physical_gradient(w_y, 2.0), -1.0);
    }

    #[test]
    fn boundary_slope_examples() {
        let quad = sample(4, |y| 1.0 - y * y);
        assert_eq!(boundary_slope(&quad, 0.25), Ok(-2.0));
        let lin = sample(4, |y| 1.0 - y);
        assert_eq!(boundary_slope(&lin, 0.25), Ok(-1.0));
        assert_eq!(boundary_slope(&[0.0; 5], 0.25), Ok(0.0));
        assert_eq!(boundary_slope(&[1.0, 0.0], 1.0), Err(TransformError::GridTooCoarse(1)));
    }

    #[test]
    fn boundary_slope_is_second_order() {
        // cos(pi y / 2) has slope -pi/2 at y = 1
        let exact = -std::f64::consts::FRAC_PI_2;
        let errs: Vec<f64> = [32usize, 64, 128, 256]
            .iter()
            .map(|&n| {
                let w = sample(n, |y| (std::f64::consts::FRAC_PI_2 * y).cos());
                (boundary_slope(&w, 1.0 / n as f64).unwrap() - exact).abs()
            })
            .collect();
        for pair in errs.windows(2) {
            let order = (pair[0] / pair[1]).log2();
            assert!(order >= 1.9, "observed order {order}");
        }
    }

    proptest! {
        #[test]
        fn round_trip_through_fixed_domain(y in 0.0f64..=1.0, s in 1e-3f64..1e3) {
            let x = from_fixed(y, s).unwrap();
            let back = to_fixed(x.min(s), s).unwrap();
            prop_assert!((back - y).abs() <= f64::EPSILON);
        }

        #[test]
        fn advection_vanishes_at_origin(s in 1e-3f64..1e3, sp in -1e3f64..1e3) {
            prop_assert_eq!(coefficients(s, sp, 0.0).1, 0.0);
        }
    }
}
