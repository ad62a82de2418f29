//! Shared fixtures for unit tests.

use alloc::boxed::Box;

use crate::geometry::{AstigmatismClosures, AstigmatismFn};

/// The C⁴ test surface `s = sin⁵θ (1 + 0.3 cosθ)` used across the crate.
pub(crate) fn test_astigmatism() -> Box<dyn AstigmatismFn> {
    sinpow_astigmatism(5.0, 1.0, 0.3)
}

/// Closed-form `s = amp·sin^mθ (1 + tilt·cosθ)` with derivatives.
pub(crate) fn sinpow_astigmatism(m: f64, amp: f64, tilt: f64) -> Box<dyn AstigmatismFn> {
    Box::new(AstigmatismClosures {
        s: Box::new(move |t: f64| amp * t.sin().powf(m) * (1.0 + tilt * t.cos())),
        ds: Box::new(move |t: f64| {
            let (sn, cs) = (t.sin(), t.cos());
            amp * (m * sn.powf(m - 1.0) * cs * (1.0 + tilt * cs) - tilt * sn.powf(m + 1.0))
        }),
        d2s: Box::new(move |t: f64| {
            let (sn, cs) = (t.sin(), t.cos());
            amp * (m * (m - 1.0) * sn.powf(m - 2.0) * cs * cs * (1.0 + tilt * cs)
                - m * sn.powf(m) * (1.0 + tilt * cs)
                - tilt * (2.0 * m + 1.0) * sn.powf(m) * cs)
        }),
    })
}
