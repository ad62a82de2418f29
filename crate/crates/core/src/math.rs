//! Elementary function shim: `std` intrinsics when available, `libm` otherwise.

#![allow(dead_code)]

macro_rules! shim {
    ($($name:ident),* $(,)?) => {
        $(
            #[cfg(feature = "std")]
            #[inline(always)]
            pub fn $name(x: f64) -> f64 { f64::$name(x) }
            #[cfg(not(feature = "std"))]
            #[inline(always)]
            pub fn $name(x: f64) -> f64 { libm::$name(x) }
        )*
    };
}

shim!(sin, cos, tan, exp, sqrt, floor, round, cbrt, acos);

#[cfg(feature = "std")]
#[inline(always)]
pub fn abs(x: f64) -> f64 {
    x.abs()
}
#[cfg(not(feature = "std"))]
#[inline(always)]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[cfg(feature = "std")]
#[inline(always)]
pub fn ln(x: f64) -> f64 {
    x.ln()
}
#[cfg(not(feature = "std"))]
#[inline(always)]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[cfg(feature = "std")]
#[inline(always)]
pub fn powf(x: f64, y: f64) -> f64 {
    x.powf(y)
}
#[cfg(not(feature = "std"))]
#[inline(always)]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// Integer power by repeated squaring; exact for small exponents.
#[inline]
pub fn powi(x: f64, mut k: i32) -> f64 {
    let mut base = if k < 0 { 1.0 / x } else { x };
    if k < 0 {
        k = -k;
    }
    let mut acc = 1.0;
    while k > 0 {
        if k & 1 == 1 {
            acc *= base;
        }
        base *= base;
        k >>= 1;
    }
    acc
}
