//! Special functions: reciprocal Gamma, the Gauss hypergeometric function
//! ₂F₁ on `[0, 1)`, and Ferrers (associated Legendre) functions
//! `P^μ_ν(cosθ)` of real order and degree.
//!
//! The Legendre evaluation is anchored in the hypergeometric representation
//!
//! ```text
//! P^μ_ν(cosθ) = cot^μ(θ/2) / Γ(1−μ) · ₂F₁(ν+1, −ν; 1−μ; sin²(θ/2)),
//! ```
//!
//! with a connection formula in `1 − z = cos²(θ/2)` once the argument passes
//! 1/2, so both poles are approached through well-conditioned series. Whole
//! ladders `P^μ_{ν₀+j}` (fixed order, degree stepping by one) are produced by
//! the three-term degree recurrence, which is self-starting at `ν₀ = −μ`
//! thanks to the closed form `P^{−q}_q(cosθ) = sin^qθ / (2^q Γ(q+1))`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

const PI: f64 = core::f64::consts::PI;

/// Order/degree pair `(μ, ν)` of a Legendre function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendreIndex {
    /// Order μ. Positive integers are outside the supported envelope.
    pub mu: f64,
    /// Degree ν.
    pub nu: f64,
}

impl LegendreIndex {
    pub fn new(mu: f64, nu: f64) -> Self {
        Self { mu, nu }
    }
}

/// Angle θ strictly inside `(0, π)`. Endpoint behaviour is reached only
/// through [`legendre_pole_asymptote`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalPoint {
    theta: f64,
}

impl EvalPoint {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0 && theta < PI) {
            return Err(Error::PoleNode { theta });
        }
        Ok(Self { theta })
    }

    #[inline]
    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// Either end of the parameter interval `(0, π)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pole {
    /// θ → 0.
    North,
    /// θ → π.
    South,
}

/// Largest |order| accepted by the Legendre evaluators.
pub const MAX_ABS_ORDER: f64 = 13.0;
/// Largest |degree| accepted by the Legendre evaluators. Relative accuracy of
/// 1e-10 is guaranteed for |μ|, |ν| ≤ 10; larger degrees (needed by deep
/// spectral truncations) should go through [`legendre_family`].
pub const MAX_ABS_DEGREE: f64 = 70.0;

#[inline]
fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == math::floor(x)
}

/// Round to the nearest integer when within accumulated-rounding distance of
/// one; index arithmetic like `(q + m) − q` should land on integers exactly.
#[inline]
fn snap_near_integer(x: f64) -> f64 {
    let r = math::round(x);
    if math::abs(x - r) <= 1e-12 * math::abs(x).max(1.0) {
        r
    } else {
        x
    }
}

/// sin(πx) with exact zeros at integer x and full accuracy for large |x|.
fn sin_pi(x: f64) -> f64 {
    let m = math::round(x);
    let r = x - m;
    let s = math::sin(PI * r);
    if (m as i64) & 1 == 0 {
        s
    } else {
        -s
    }
}

// Lanczos approximation, g = 607/128, 15 terms (Godfrey's coefficients).
const LANCZOS_G: f64 = 4.7421875;
const LANCZOS_COEF: [f64; 15] = [
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    3.3994649984811888699e-5,
    4.6523628927048575665e-5,
    -9.8374475304879564677e-5,
    1.5808870322491248884e-4,
    -2.1026444172410488319e-4,
    2.1743961811521264320e-4,
    -1.6431810653676389022e-4,
    8.4418223983852743293e-5,
    -2.6190838401581408670e-5,
    3.6899182659531622704e-6,
];

fn lanczos_sum(x: f64) -> f64 {
    let mut acc = LANCZOS_COEF[0];
    for (k, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x - 1.0 + k as f64);
    }
    acc
}

/// Γ(x) for real x; returns ±∞ at the poles (non-positive integers).
pub fn gamma(x: f64) -> f64 {
    if x >= 0.5 {
        let t = x + LANCZOS_G - 0.5;
        let sum = lanczos_sum(x);
        math::sqrt(2.0 * PI) * math::powf(t, x - 0.5) * math::exp(-t) * sum
    } else {
        if is_nonpositive_integer(x) {
            return f64::INFINITY;
        }
        // reflection: Γ(x) Γ(1−x) = π / sin(πx)
        PI / (sin_pi(x) * gamma(1.0 - x))
    }
}

/// 1/Γ(x). Exactly zero when `x` is a non-positive integer (the pole case is
/// matched structurally, not by thresholding); relative error ≤ 1e−13 for
/// |x| ≤ 30 away from the poles.
pub fn gamma_recip(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return 0.0;
    }
    if x >= 0.5 {
        1.0 / gamma(x)
    } else {
        // 1/Γ(x) = sin(πx) Γ(1−x) / π, a product form that stays accurate
        // near the poles
        sin_pi(x) * gamma(1.0 - x) / PI
    }
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x >= 0.5 {
        let t = x + LANCZOS_G - 0.5;
        0.5 * math::ln(2.0 * PI) + (x - 0.5) * math::ln(t) - t + math::ln(lanczos_sum(x))
    } else {
        math::ln(PI / sin_pi(x)) - ln_gamma(1.0 - x)
    }
}

const HYP_MAX_TERMS: usize = 2000;
const HYP_EPS: f64 = 1e-17;

/// Direct power series Σ (a)_k (b)_k / ((c)_k k!) z^k.
fn hyp2f1_series(a: f64, b: f64, c: f64, z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..HYP_MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        let prev = sum;
        sum += term;
        if math::abs(term) <= HYP_EPS * math::abs(sum) && math::abs(sum - prev) <= HYP_EPS * math::abs(sum) {
            break;
        }
    }
    sum
}

/// Terminating series when `a` or `b` is a non-positive integer.
fn hyp2f1_terminating(a: f64, b: f64, c: f64, z: f64) -> f64 {
    let (p, q) = if is_nonpositive_integer(a) && is_nonpositive_integer(b) {
        if -a <= -b {
            (a, b)
        } else {
            (b, a)
        }
    } else if is_nonpositive_integer(a) {
        (a, b)
    } else {
        (b, a)
    };
    let terms = (-p) as usize;
    let mut term = 1.0;
    let mut sum = crate::numerics::NeumaierSum::new();
    sum.add(1.0);
    for k in 0..terms {
        let kf = k as f64;
        term *= (p + kf) * (q + kf) / ((c + kf) * (kf + 1.0)) * z;
        sum.add(term);
    }
    sum.value()
}

/// Connection formula pivoting the expansion to `w = 1 − z`; requires
/// `c − a − b` non-integer.
fn hyp2f1_connection(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let s = c - a - b;
    if s == math::floor(s) {
        return Err(Error::InvalidArgument(
            "hyp2f1: c-a-b integral, connection formula degenerate",
        ));
    }
    let w = 1.0 - z;
    let t1 = gamma(c) * gamma(s) * gamma_recip(c - a) * gamma_recip(c - b)
        * hyp2f1_series(a, b, 1.0 - s, w);
    let t2 = gamma(c) * gamma(-s) * gamma_recip(a) * gamma_recip(b)
        * math::powf(w, s)
        * hyp2f1_series(c - a, c - b, 1.0 + s, w);
    Ok(t1 + t2)
}

/// Gauss hypergeometric function ₂F₁(a, b; c; z) for `0 ≤ z < 1`.
///
/// Terminating parameter cases are summed exactly; otherwise the direct
/// series is used for `z ≤ 1/2` and the `1−z` connection formula beyond.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && c.is_finite() && z.is_finite()) {
        return Err(Error::InvalidArgument("hyp2f1: non-finite argument"));
    }
    if is_nonpositive_integer(c) {
        return Err(Error::InvalidArgument("hyp2f1: c is a non-positive integer"));
    }
    if !(0.0..1.0).contains(&z) {
        return Err(Error::InvalidArgument("hyp2f1: z outside [0, 1)"));
    }
    if is_nonpositive_integer(a) || is_nonpositive_integer(b) {
        return Ok(hyp2f1_terminating(a, b, c, z));
    }
    if z <= 0.5 {
        Ok(hyp2f1_series(a, b, c, z))
    } else {
        hyp2f1_connection(a, b, c, z)
    }
}

fn check_envelope(idx: LegendreIndex) -> Result<()> {
    if !(idx.mu.is_finite() && idx.nu.is_finite()) {
        return Err(Error::InvalidArgument("legendre: non-finite index"));
    }
    if idx.mu >= 1.0 && idx.mu == math::floor(idx.mu) {
        return Err(Error::InvalidArgument("legendre: positive integer order"));
    }
    if math::abs(idx.mu) > MAX_ABS_ORDER || math::abs(idx.nu) > MAX_ABS_DEGREE {
        return Err(Error::OutsideEnvelope { mu: idx.mu, nu: idx.nu });
    }
    Ok(())
}

/// Ferrers function `P^μ_ν(cosθ)` for real μ (not a positive integer) and ν.
pub fn legendre_p(idx: LegendreIndex, pt: EvalPoint) -> Result<f64> {
    check_envelope(idx)?;
    let half = 0.5 * pt.theta();
    let sh = math::sin(half);
    let ch = math::cos(half);
    let z = sh * sh;
    let pre = math::powf(ch / sh, idx.mu) * gamma_recip(1.0 - idx.mu);
    let f = hyp2f1(idx.nu + 1.0, -idx.nu, 1.0 - idx.mu, z)?;
    Ok(pre * f)
}

/// dP^μ_ν(cosθ)/dθ through the degree-raising derivative formula
/// `sinθ · dP^μ_ν/dθ = (1−μ+ν) P^μ_{ν+1} − (ν+1) cosθ P^μ_ν`.
pub fn legendre_p_dtheta(idx: LegendreIndex, pt: EvalPoint) -> Result<f64> {
    let p_up = legendre_p(LegendreIndex::new(idx.mu, idx.nu + 1.0), pt)?;
    let p = legendre_p(idx, pt)?;
    let th = pt.theta();
    Ok(((1.0 - idx.mu + idx.nu) * p_up - (idx.nu + 1.0) * math::cos(th) * p) / math::sin(th))
}

/// d²P^μ_ν(cosθ)/dθ², assembled by applying the derivative formula twice.
pub fn legendre_p_d2theta(idx: LegendreIndex, pt: EvalPoint) -> Result<f64> {
    let th = pt.theta();
    let (sn, cs) = (math::sin(th), math::cos(th));
    let up = LegendreIndex::new(idx.mu, idx.nu + 1.0);
    let p = legendre_p(idx, pt)?;
    let p_up = legendre_p(up, pt)?;
    let dp = ((1.0 - idx.mu + idx.nu) * p_up - (idx.nu + 1.0) * cs * p) / sn;
    let dp_up = legendre_p_dtheta(up, pt)?;
    // numerator N = (1−μ+ν) P^μ_{ν+1} − (ν+1) cosθ P^μ_ν, so that
    // P' = N / sinθ and P'' = N'/sinθ − cotθ · P'.
    let ndot = (1.0 - idx.mu + idx.nu) * dp_up + (idx.nu + 1.0) * (sn * p - cs * dp);
    Ok(ndot / sn - cs / sn * dp)
}

/// Coefficients `(coef_neg, coef_pos)` of `sin^{−|μ|}θ` and `sin^{|μ|}θ` in
/// the two-term pole expansion of `P^μ_ν(cosθ)`.
///
/// At the north pole the expansion has the single term
/// `2^μ/Γ(1−μ) · sin^{−μ}θ`; at the south pole, writing `μ = −q`,
///
/// ```text
/// P^{−q}_ν ~ 2^q Γ(q)/(Γ(q−ν)Γ(1+q+ν)) · sin^{−q}θ
///          + Γ(−q)/(2^q Γ(1+ν)Γ(−ν))   · sin^{q}θ.
/// ```
pub fn legendre_pole_asymptote(idx: LegendreIndex, pole: Pole) -> Result<(f64, f64)> {
    check_envelope(idx)?;
    let (mu, nu) = (idx.mu, idx.nu);
    match pole {
        Pole::North => {
            let coef = math::powf(2.0, mu) * gamma_recip(1.0 - mu);
            if mu > 0.0 {
                Ok((coef, 0.0))
            } else {
                Ok((0.0, coef))
            }
        }
        Pole::South => {
            let q = -mu;
            if q == math::floor(q) {
                // logarithmic endpoint behaviour unless the degree is a
                // non-negative integer (then P_ν is a polynomial)
                if q == 0.0 && nu >= 0.0 && nu == math::floor(nu) {
                    let sign = if (nu as i64) & 1 == 0 { 1.0 } else { -1.0 };
                    return Ok((0.0, sign));
                }
                return Err(Error::InvalidArgument(
                    "legendre_pole_asymptote: integer order has logarithmic behaviour at the south pole",
                ));
            }
            // Gamma arguments are differences of the indices; snap to the
            // nearest integer when within rounding distance so that ladder
            // degrees ν = q + m hit the Γ poles structurally even when q
            // itself is not binary-representable.
            let coef_neg = math::powf(2.0, q)
                * gamma(q)
                * gamma_recip(snap_near_integer(q - nu))
                * gamma_recip(snap_near_integer(1.0 + q + nu));
            let coef_pos = gamma(-q)
                * math::powf(2.0, -q)
                * gamma_recip(snap_near_integer(1.0 + nu))
                * gamma_recip(snap_near_integer(-nu));
            Ok((coef_neg, coef_pos))
        }
    }
}

/// Values of the degree ladder `P^μ_{ν₀+j}(cosθ)`, `j = 0..count`, at fixed
/// order `μ = −q` with `ν₀ = q`, by the self-starting three-term recurrence.
///
/// Valid for `q > −1`; this is the workhorse for deep eigenbasis
/// truncations, where the hypergeometric route would lose digits to
/// cancellation at large degree.
pub fn legendre_family(mu: f64, count: usize, theta: f64) -> Result<Vec<f64>> {
    let q = -mu;
    if !(q.is_finite() && q > -1.0) {
        return Err(Error::InvalidArgument("legendre_family: requires -mu > -1"));
    }
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::PoleNode { theta });
    }
    let x = math::cos(theta);
    let sn = math::sin(theta);
    let mut out = Vec::with_capacity(count);
    // P^{−q}_q = sin^q θ / (2^q Γ(q+1))
    let p0 = math::powf(sn, q) * math::powf(2.0, -q) * gamma_recip(q + 1.0);
    out.push(p0);
    if count == 1 {
        return Ok(out);
    }
    out.push(x * p0);
    for j in 1..(count - 1) {
        let jf = j as f64;
        // (ν−μ+1) P_{j+1} = (2ν+1) x P_j − (ν+μ) P_{j−1} with ν = q + j
        let next = ((2.0 * q + 2.0 * jf + 1.0) * x * out[j] - jf * out[j - 1])
            / (2.0 * q + jf + 1.0);
        out.push(next);
    }
    Ok(out)
}
