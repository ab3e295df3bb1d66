//! Thin wrappers over `libm` so the numerical code reads like ordinary float code
//! without `std`.

use crate::Complex;

pub const TWO_PI: f64 = core::f64::consts::TAU;

/// Speed of light used to derive the wavelength, m/s.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn log10(x: f64) -> f64 {
    libm::log10(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn sin_cos(x: f64) -> (f64, f64) {
    libm::sincos(x)
}

/// `exp(j·theta)`.
#[inline]
pub fn cis(theta: f64) -> Complex {
    let (s, c) = libm::sincos(theta);
    Complex::new(c, s)
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    powf(10.0, dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * log10(mw)
}

/// Linear power ratio to decibels.
pub fn to_db(ratio: f64) -> f64 {
    10.0 * log10(ratio)
}
