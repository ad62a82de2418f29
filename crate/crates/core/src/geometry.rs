//! Rotationally symmetric convex spheres through their support function.
//!
//! A surface in the class is determined by `r(θ)` on `(0, π)`; the two radii
//! of curvature follow from
//!
//! ```text
//! r₁ = (cos²θ/sinθ) d/dθ (r/cosθ),     r₂ = r'' + r,
//! ```
//!
//! and the astigmatism is `s = r₂ − r₁`. The `r₁` formula is evaluated
//! through its algebraic expansion `r₁ = r + r′·cotθ`, which is regular at
//! θ = π/2 (the only singularities left are the poles, excluded from every
//! grid); the expansion is validated against the quadrature inverse by the
//! reconstruction round-trip tests. Conversely, `r` is recovered from `s` by
//!
//! ```text
//! r = C₂cosθ + C₁ + ∫₀^θ (s(ψ)/sinψ)(cosψ − cosθ) dψ,
//! ```
//!
//! the Fubini form of the double quadrature, anchored so that C₁ = r₁(0)
//! and C₂ = r(0) − r₁(0).

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{cumulative_from_zero, integral_sin_pow, ThetaGrid};
use crate::math;
use crate::numerics::{fornberg_weights, neville_to_zero};
pub use crate::specfun::Pole;

const PI: f64 = core::f64::consts::PI;

/// Flow parameters `(a, b, c)` with the slope identity `−a/b = 2n+3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfParams {
    /// Coefficient of the meridian radius in the normal speed.
    pub a: f64,
    /// Coefficient of the profile radius; `b > 0` (parabolicity).
    pub b: f64,
    /// Constant speed offset.
    pub c: f64,
    /// Slope exponent, `n = (−a/b − 3)/2`.
    pub n: f64,
}

impl HopfParams {
    /// Construct from the raw speed coefficients.
    pub fn from_speed(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(b > 0.0) {
            return Err(Error::InvalidArgument("HopfParams: b must be positive"));
        }
        let n = (-a / b - 3.0) / 2.0;
        Ok(Self { a, b, c, n })
    }

    /// Construct from the exponent `n`, deriving `a = −(2n+3)·b`.
    pub fn from_exponent(n: f64, b: f64, c: f64) -> Result<Self> {
        if !(b > 0.0) {
            return Err(Error::InvalidArgument("HopfParams: b must be positive"));
        }
        Ok(Self { a: -(2.0 * n + 3.0) * b, b, c, n })
    }

    /// Whether the spectral solver applies (`n ∈ (−1, 1)`).
    pub fn in_spectral_window(&self) -> bool {
        self.n > -1.0 && self.n < 1.0
    }

    /// Radius of the stationary round sphere, `−c/(a+b) = c/(2(n+1)b)`.
    pub fn stationary_radius(&self) -> f64 {
        self.c / (2.0 * (self.n + 1.0) * self.b)
    }
}

/// Signed axial positions of the focal points at the two poles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocalData {
    /// `f₀ = r(0) − r₁(0)`.
    pub f0: f64,
    /// `f_π = −r(π) + r₁(π)`.
    pub fpi: f64,
}

impl FocalData {
    /// Signed focal distance `f₀ − f_π`, the conserved quantity of the flow.
    pub fn separation(&self) -> f64 {
        self.f0 - self.fpi
    }
}

/// Support function with two derivatives, supplied in closed form.
pub trait SupportFn {
    fn r(&self, theta: f64) -> f64;
    fn dr(&self, theta: f64) -> f64;
    fn d2r(&self, theta: f64) -> f64;
}

/// Astigmatism with two derivatives, supplied in closed form.
pub trait AstigmatismFn {
    fn s(&self, theta: f64) -> f64;
    fn ds(&self, theta: f64) -> f64;
    fn d2s(&self, theta: f64) -> f64;
}

/// Closure-backed [`SupportFn`].
pub struct SupportClosures {
    pub r: Box<dyn Fn(f64) -> f64>,
    pub dr: Box<dyn Fn(f64) -> f64>,
    pub d2r: Box<dyn Fn(f64) -> f64>,
}

impl SupportFn for SupportClosures {
    fn r(&self, theta: f64) -> f64 {
        (self.r)(theta)
    }
    fn dr(&self, theta: f64) -> f64 {
        (self.dr)(theta)
    }
    fn d2r(&self, theta: f64) -> f64 {
        (self.d2r)(theta)
    }
}

/// Closure-backed [`AstigmatismFn`].
pub struct AstigmatismClosures {
    pub s: Box<dyn Fn(f64) -> f64>,
    pub ds: Box<dyn Fn(f64) -> f64>,
    pub d2s: Box<dyn Fn(f64) -> f64>,
}

impl AstigmatismFn for AstigmatismClosures {
    fn s(&self, theta: f64) -> f64 {
        (self.s)(theta)
    }
    fn ds(&self, theta: f64) -> f64 {
        (self.ds)(theta)
    }
    fn d2s(&self, theta: f64) -> f64 {
        (self.d2s)(theta)
    }
}

/// Sampled profile of a rotationally symmetric convex sphere.
///
/// Carries the support function and derived fields on a [`ThetaGrid`], the
/// pole constants `C₁ = r₁(0)` and `C₂ = r(0) − r₁(0)`, and (when the
/// construction had them) closed-form callbacks that derivative-hungry
/// operations prefer over finite differences.
pub struct SurfaceProfile {
    grid: ThetaGrid,
    r: Vec<f64>,
    r1: Vec<f64>,
    r2: Vec<f64>,
    s: Vec<f64>,
    c1: f64,
    c2: f64,
    support: Option<Box<dyn SupportFn>>,
    astig: Option<Box<dyn AstigmatismFn>>,
}

impl core::fmt::Debug for SurfaceProfile {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SurfaceProfile")
            .field("nodes", &self.grid.len())
            .field("c1", &self.c1)
            .field("c2", &self.c2)
            .field("closed_form_support", &self.support.is_some())
            .field("closed_form_astigmatism", &self.astig.is_some())
            .finish()
    }
}

impl SurfaceProfile {
    /// Sample a closed-form support function; radii via `r₁ = r + r′cotθ`,
    /// `r₂ = r″ + r`.
    pub fn from_support(f: Box<dyn SupportFn>, grid: ThetaGrid) -> Result<Self> {
        grid.check_interior()?;
        let nodes = grid.nodes().to_vec();
        let mut r = Vec::with_capacity(nodes.len());
        let mut r1 = Vec::with_capacity(nodes.len());
        let mut r2 = Vec::with_capacity(nodes.len());
        let mut s = Vec::with_capacity(nodes.len());
        for &t in &nodes {
            let rv = f.r(t);
            let dv = f.dr(t);
            let d2v = f.d2r(t);
            let m1 = rv + dv * math::cos(t) / math::sin(t);
            let m2 = d2v + rv;
            r.push(rv);
            r1.push(m1);
            r2.push(m2);
            s.push(m2 - m1);
        }
        let (c1, _) = extrapolate_to_pole(&|t| f.r(t) + f.dr(t) * math::cos(t) / math::sin(t), Pole::North, 0.2)?;
        let (r0, _) = extrapolate_to_pole(&|t| f.r(t), Pole::North, 0.2)?;
        let mut profile = Self {
            grid,
            r,
            r1,
            r2,
            s,
            c1,
            c2: r0 - c1,
            support: Some(f),
            astig: None,
        };
        profile.check_convexity()?;
        Ok(profile)
    }

    /// Build from support-function samples on the grid; derivatives by
    /// five-point finite differences on the (possibly non-uniform) nodes.
    pub fn from_support_samples(r: Vec<f64>, grid: ThetaGrid) -> Result<Self> {
        grid.check_interior()?;
        if r.len() != grid.len() {
            return Err(Error::InvalidArgument("sample count does not match grid"));
        }
        if r.len() < 8 {
            return Err(Error::InvalidArgument("need at least 8 samples"));
        }
        let nodes = grid.nodes();
        let n = r.len();
        let mut r1 = Vec::with_capacity(n);
        let mut r2 = Vec::with_capacity(n);
        let mut s = Vec::with_capacity(n);
        for i in 0..n {
            let (dv, d2v) = sampled_derivs(nodes, &r, i);
            let t = nodes[i];
            let m1 = r[i] + dv * math::cos(t) / math::sin(t);
            let m2 = d2v + r[i];
            r1.push(m1);
            r2.push(m2);
            s.push(m2 - m1);
        }
        let c1 = extrapolate_samples_to_pole(nodes, &r1, Pole::North)?;
        let r0 = extrapolate_samples_to_pole(nodes, &r, Pole::North)?;
        let mut profile = Self {
            grid,
            r,
            r1,
            r2,
            s,
            c1,
            c2: r0 - c1,
            support: None,
            astig: None,
        };
        profile.check_convexity()?;
        Ok(profile)
    }

    /// Reconstruct the support function from a closed-form astigmatism by
    /// quadrature, anchored so that `C₁ = r₁(0)` and `C₂ = r(0) − r₁(0)`.
    ///
    /// `pole_order` is the vanishing order of `s` at the poles (must be ≥ 1
    /// for the inner integral to exist; the reconstruction rejects slower
    /// fall-off).
    pub fn from_astigmatism(
        f: Box<dyn AstigmatismFn>,
        pole_order: f64,
        c1: f64,
        c2: f64,
        grid: ThetaGrid,
    ) -> Result<Self> {
        grid.check_interior()?;
        if !(pole_order >= 1.0) {
            return Err(Error::NonIntegrablePole);
        }
        // probe the claimed fall-off: s/sin^{order} must stay bounded
        let scale = {
            let mut m = 0.0f64;
            for &t in grid.nodes() {
                m = m.max(math::abs(f.s(t)));
            }
            m.max(1e-300)
        };
        for k in 2..=6 {
            let t = 10f64.powi(-k);
            for &probe in &[t, PI - t] {
                let ratio = math::abs(f.s(probe)) / math::powf(math::sin(probe), 1.0);
                if !ratio.is_finite() || ratio > 1e3 * scale {
                    return Err(Error::NonIntegrablePole);
                }
            }
        }
        let nodes = grid.nodes().to_vec();
        let sigma = pole_order - 1.0;
        let j0 = cumulative_from_zero(&|t| f.s(t) / math::sin(t), sigma, &nodes);
        let j1 = cumulative_from_zero(
            &|t| f.s(t) * math::cos(t) / math::sin(t),
            sigma,
            &nodes,
        );
        let n = nodes.len();
        let mut r = Vec::with_capacity(n);
        let mut r1 = Vec::with_capacity(n);
        let mut r2 = Vec::with_capacity(n);
        let mut s = Vec::with_capacity(n);
        for i in 0..n {
            let t = nodes[i];
            let sv = f.s(t);
            // r = C₁ + C₂cosθ + J₁(θ) − cosθ·J₀(θ)
            let rv = c1 + c2 * math::cos(t) + j1[i] - math::cos(t) * j0[i];
            let m1 = c1 + j1[i];
            r.push(rv);
            r1.push(m1);
            r2.push(m1 + sv);
            s.push(sv);
        }
        let mut profile = Self {
            grid,
            r,
            r1,
            r2,
            s,
            c1,
            c2,
            support: None,
            astig: Some(f),
        };
        profile.check_convexity()?;
        Ok(profile)
    }

    fn check_convexity(&mut self) -> Result<()> {
        for i in 0..self.r1.len() {
            if !(self.r1[i] > 0.0 && self.r2[i] > 0.0) {
                return Err(Error::ConvexityViolation {
                    index: i,
                    theta: self.grid.nodes()[i],
                    r1: self.r1[i],
                    r2: self.r2[i],
                });
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> &ThetaGrid {
        &self.grid
    }
    pub fn r(&self) -> &[f64] {
        &self.r
    }
    pub fn r1(&self) -> &[f64] {
        &self.r1
    }
    pub fn r2(&self) -> &[f64] {
        &self.r2
    }
    pub fn s(&self) -> &[f64] {
        &self.s
    }
    /// `C₁ = r₁(0)`.
    pub fn c1(&self) -> f64 {
        self.c1
    }
    /// `C₂ = r(0) − r₁(0)`.
    pub fn c2(&self) -> f64 {
        self.c2
    }
    pub fn support_form(&self) -> Option<&dyn SupportFn> {
        self.support.as_deref()
    }
    pub fn astigmatism_form(&self) -> Option<&dyn AstigmatismFn> {
        self.astig.as_deref()
    }

    /// Evaluate `r` off-grid: closed form when available, otherwise local
    /// polynomial interpolation through the six nearest nodes.
    pub fn eval_r(&self, theta: f64) -> f64 {
        if let Some(f) = &self.support {
            return f.r(theta);
        }
        interp_local(self.grid.nodes(), &self.r, theta)
    }

    /// Evaluate `r₁` off-grid (same strategy as [`Self::eval_r`]).
    pub fn eval_r1(&self, theta: f64) -> f64 {
        if let Some(f) = &self.support {
            return f.r(theta) + f.dr(theta) * math::cos(theta) / math::sin(theta);
        }
        interp_local(self.grid.nodes(), &self.r1, theta)
    }

    /// Evaluate `r₂` off-grid.
    pub fn eval_r2(&self, theta: f64) -> f64 {
        if let Some(f) = &self.support {
            return f.d2r(theta) + f.r(theta);
        }
        interp_local(self.grid.nodes(), &self.r2, theta)
    }

    /// Evaluate `s = r₂ − r₁` off-grid.
    pub fn eval_s(&self, theta: f64) -> f64 {
        if let Some(f) = &self.astig {
            return f.s(theta);
        }
        self.eval_r2(theta) - self.eval_r1(theta)
    }

    /// Evaluate `r′` off-grid.
    pub fn eval_dr(&self, theta: f64) -> f64 {
        if let Some(f) = &self.support {
            return f.dr(theta);
        }
        // recover r' from the r samples: r' = (r₁ − r)·tanθ is singular at
        // π/2, so differentiate the interpolant instead
        let nodes = self.grid.nodes();
        let n = nodes.len();
        let i = nearest_index(nodes, theta);
        let lo = i.saturating_sub(3).min(n - 7);
        let w = fornberg_weights(&nodes[lo..lo + 7], theta, 1);
        (0..7).map(|k| w[k] * self.r[lo + k]).sum()
    }

    /// Max Codazzi residual `|dr₁/dθ − s·cotθ|` over the nodes with a full
    /// centred differentiation window (stacked one-sided stencils at the
    /// outermost nodes measure the stencil, not the surface), scaled by
    /// `max|r₁|`.
    pub fn codazzi_residual(&self) -> f64 {
        let nodes = self.grid.nodes();
        let n = nodes.len();
        let scale = self.r1.iter().fold(0.0f64, |m, &v| m.max(math::abs(v))).max(1e-300);
        let mut worst = 0.0f64;
        for i in 3..(n - 3) {
            let (dr1, _) = sampled_derivs(nodes, &self.r1, i);
            let t = nodes[i];
            let resid = math::abs(dr1 - self.s[i] * math::cos(t) / math::sin(t));
            worst = worst.max(resid);
        }
        worst / scale
    }
}

/// First and second derivative of sampled data at node `i`, from a
/// seven-node window (at least fourth-order on the panel grids in use).
pub(crate) fn sampled_derivs(nodes: &[f64], values: &[f64], i: usize) -> (f64, f64) {
    let n = nodes.len();
    debug_assert!(n >= 7);
    let lo = i.saturating_sub(3).min(n - 7);
    let window = &nodes[lo..lo + 7];
    let w1 = fornberg_weights(window, nodes[i], 1);
    let w2 = fornberg_weights(window, nodes[i], 2);
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    for k in 0..7 {
        d1 += w1[k] * values[lo + k];
        d2 += w2[k] * values[lo + k];
    }
    (d1, d2)
}

fn nearest_index(nodes: &[f64], theta: f64) -> usize {
    match nodes.binary_search_by(|x| x.total_cmp(&theta)) {
        Ok(i) => i,
        Err(i) => i.min(nodes.len() - 1),
    }
}

/// Local polynomial interpolation through the six nodes nearest `theta`.
fn interp_local(nodes: &[f64], values: &[f64], theta: f64) -> f64 {
    let n = nodes.len();
    debug_assert!(n >= 6);
    let i = nearest_index(nodes, theta);
    let lo = i.saturating_sub(3).min(n - 6);
    let xs = &nodes[lo..lo + 6];
    let ys = &values[lo..lo + 6];
    // Lagrange evaluation
    let mut acc = 0.0;
    for j in 0..6 {
        let mut term = ys[j];
        for k in 0..6 {
            if k != j {
                term *= (theta - xs[k]) / (xs[j] - xs[k]);
            }
        }
        acc += term;
    }
    acc
}

/// Limit of `f(θ)` as θ approaches the pole, by Neville extrapolation over
/// the geometric node sequence `θ_k = θ₀·2^{−k}`, k = 0..6. Support data and
/// curvature radii are even across the poles, so the extrapolation variable
/// is θ². Returns the limit and an uncertainty estimate; errors out when
/// successive estimates fail to settle below `1e−7` relative to the value
/// scale.
pub fn extrapolate_to_pole(
    f: &dyn Fn(f64) -> f64,
    pole: Pole,
    theta0: f64,
) -> Result<(f64, f64)> {
    let mut xs = Vec::with_capacity(7);
    let mut fs = Vec::with_capacity(7);
    for k in 0..7 {
        let t = theta0 / 2f64.powi(k);
        let th = match pole {
            Pole::North => t,
            Pole::South => PI - t,
        };
        let v = f(th);
        if !v.is_finite() {
            return Err(Error::ExtrapolationFailed("non-finite sample near pole"));
        }
        xs.push(t * t);
        fs.push(v);
    }
    let (val, unc) = neville_to_zero(&xs, &fs);
    let scale = fs.iter().fold(0.0f64, |m, &v| m.max(math::abs(v))).max(1.0);
    if unc > 1e-7 * scale {
        return Err(Error::ExtrapolationFailed("estimates did not converge"));
    }
    Ok((val, unc))
}

/// Pole limit of sampled data: Neville (in θ²) through the nodes nearest
/// the pole.
fn extrapolate_samples_to_pole(nodes: &[f64], values: &[f64], pole: Pole) -> Result<f64> {
    let n = nodes.len();
    let take = 7.min(n);
    let (mut xs, mut fs) = (Vec::with_capacity(take), Vec::with_capacity(take));
    match pole {
        Pole::North => {
            for i in 0..take {
                xs.push(nodes[i] * nodes[i]);
                fs.push(values[i]);
            }
        }
        Pole::South => {
            for i in 0..take {
                let d = PI - nodes[n - 1 - i];
                xs.push(d * d);
                fs.push(values[n - 1 - i]);
            }
        }
    }
    let (val, unc) = neville_to_zero(&xs, &fs);
    let scale = fs.iter().fold(0.0f64, |m, &v| m.max(math::abs(v))).max(1.0);
    if unc > 1e-5 * scale {
        return Err(Error::ExtrapolationFailed("sampled pole limit did not converge"));
    }
    Ok(val)
}

/// Focal points of a profile: `f₀ = r(0) − r₁(0)`, `f_π = −r(π) + r₁(π)`,
/// obtained by pole extrapolation.
pub fn focal_points(p: &SurfaceProfile) -> Result<FocalData> {
    let theta0 = 0.15;
    let (r_n, _) = extrapolate_to_pole(&|t| p.eval_r(t), Pole::North, theta0)?;
    let (r1_n, _) = extrapolate_to_pole(&|t| p.eval_r1(t), Pole::North, theta0)?;
    let (r_s, _) = extrapolate_to_pole(&|t| p.eval_r(t), Pole::South, theta0)?;
    let (r1_s, _) = extrapolate_to_pole(&|t| p.eval_r1(t), Pole::South, theta0)?;
    Ok(FocalData { f0: r_n - r1_n, fpi: -r_s + r1_s })
}

/// Finite or infinite umbilic slope limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SlopeLimit {
    Finite { value: f64, uncertainty: f64 },
    Infinite { sign: f64 },
}

/// Umbilic slope `lim (r₂(θ)−r₂(pole))/(r₁(θ)−r₁(pole))` at an isolated
/// pole umbilic, by extrapolation over a geometric node sequence.
pub fn umbilic_slope(p: &SurfaceProfile, pole: Pole) -> Result<SlopeLimit> {
    let theta0 = 0.2;
    // isolated umbilic: s must be nonzero on a deleted neighbourhood
    let s_scale = p.s().iter().fold(0.0f64, |m, &v| m.max(math::abs(v)));
    let mut nonzero = true;
    for k in 0..6 {
        let t = theta0 / 2f64.powi(k);
        let th = match pole {
            Pole::North => t,
            Pole::South => PI - t,
        };
        if math::abs(p.eval_s(th)) <= 1e-12 * s_scale.max(1e-300) {
            nonzero = false;
        }
    }
    if s_scale == 0.0 || !nonzero {
        return Err(Error::NonIsolatedUmbilic);
    }
    // C₁ = r₁(0) by the profile contract; the south value comes from the
    // sampled nodes nearest the pole, where r₁ has already flattened
    let r1_pole: f64 = match pole {
        Pole::North => p.c1(),
        Pole::South => extrapolate_samples_to_pole(p.grid().nodes(), p.r1(), Pole::South)?,
    };
    // at the pole s = 0, so r₂(pole) = r₁(pole)
    let r2_pole = r1_pole;
    let r1_scale = p.r1().iter().fold(0.0f64, |m, &v| m.max(math::abs(v))).max(1e-300);
    // The ratio degenerates to 0/0 at the pole; keep only sequence points
    // where the denominator stands well clear of the data noise, which is
    // set by how the profile was built (closed form, quadrature samples, or
    // finite differences of raw samples).
    let noise = r1_scale
        * if p.support_form().is_some() {
            1e-14
        } else if p.astigmatism_form().is_some() {
            1e-12
        } else {
            1e-10
        };
    let mut xs = Vec::new();
    let mut fs = Vec::new();
    for k in 0..20 {
        let t = theta0 * math::powf(0.7, k as f64);
        let th = match pole {
            Pole::North => t,
            Pole::South => PI - t,
        };
        let denom = p.eval_r1(th) - r1_pole;
        if math::abs(denom) <= 3e4 * noise {
            break;
        }
        let v = (p.eval_r2(th) - r2_pole) / denom;
        if !v.is_finite() {
            return Err(Error::ExtrapolationFailed("slope ratio not finite"));
        }
        // the ratio is even in the pole distance: extrapolate in θ²
        xs.push(t * t);
        fs.push(v);
    }
    if xs.len() < 3 {
        return Err(Error::ExtrapolationFailed("slope ratio sequence too short"));
    }
    // divergence: magnitudes growing without bound along the sequence
    if xs.len() >= 7 {
        let grow01 = math::abs(fs[xs.len() - 1]) / math::abs(fs[xs.len() - 4]).max(1e-300);
        let grow02 = math::abs(fs[xs.len() - 4]) / math::abs(fs[xs.len() - 7]).max(1e-300);
        if grow01 > 1.8 && grow02 > 1.8 {
            return Ok(SlopeLimit::Infinite { sign: fs[xs.len() - 1].signum() });
        }
    }
    let (val, unc) = neville_to_zero(&xs, &fs);
    let scale = math::abs(val).max(1.0);
    if unc > 1e-4 * scale {
        return Err(Error::ExtrapolationFailed("slope estimates did not converge"));
    }
    Ok(SlopeLimit::Finite { value: val, uncertainty: unc })
}

/// Classification of `lim s/sin^αθ` at a pole.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderClass {
    Zero,
    Infinite,
    FiniteNonzero,
    Inconclusive,
}

/// Classify the pole limit of `s/sin^αθ` by sampled geometric extrapolation.
pub fn slope_order_test(s: &dyn Fn(f64) -> f64, alpha: f64, pole: Pole) -> OrderClass {
    let theta0 = 0.3;
    let count = 46;
    let mut vals = Vec::with_capacity(count);
    for k in 0..count {
        let t = theta0 / 2f64.powi(k as i32);
        let th = match pole {
            Pole::North => t,
            Pole::South => PI - t,
        };
        let v = s(th) / math::powf(math::sin(th), alpha);
        if !v.is_finite() {
            return OrderClass::Inconclusive;
        }
        vals.push(v);
    }
    let last = math::abs(vals[count - 1]);
    let mid = math::abs(vals[count - 11]);
    let early = math::abs(vals[count - 21]);
    if last <= 1e-280 {
        return OrderClass::Zero;
    }
    let g1 = last / mid.max(1e-300);
    let g2 = mid / early.max(1e-300);
    // settled ratio → finite nonzero limit
    if math::abs(g1 - 1.0) < 1e-4 && math::abs(g2 - 1.0) < 1e-3 {
        return OrderClass::FiniteNonzero;
    }
    if g1 > 1.05 && g2 > 1.05 {
        return OrderClass::Infinite;
    }
    if g1 < 0.95 && g2 < 0.95 {
        return OrderClass::Zero;
    }
    OrderClass::Inconclusive
}

struct HopfSupport {
    n: f64,
    c0: f64,
    c1: f64,
    c2: f64,
}

impl HopfSupport {
    fn partial(&self, theta: f64) -> f64 {
        integral_sin_pow(2.0 * self.n + 1.0, theta)
    }
}

impl SupportFn for HopfSupport {
    fn r(&self, theta: f64) -> f64 {
        let sn = math::sin(theta);
        self.c2 * math::cos(theta)
            + self.c1
            + self.c0
                * (math::powf(sn, 2.0 * self.n + 2.0) / (2.0 * self.n + 2.0)
                    - math::cos(theta) * self.partial(theta))
    }
    fn dr(&self, theta: f64) -> f64 {
        // r' = sinθ·(C₀·I(θ) − C₂) with I the partial sin-power integral
        math::sin(theta) * (self.c0 * self.partial(theta) - self.c2)
    }
    fn d2r(&self, theta: f64) -> f64 {
        let sn = math::sin(theta);
        math::cos(theta) * (self.c0 * self.partial(theta) - self.c2)
            + self.c0 * math::powf(sn, 2.0 * self.n + 2.0)
    }
}

struct HopfAstigmatism {
    n: f64,
    c0: f64,
}

impl AstigmatismFn for HopfAstigmatism {
    fn s(&self, theta: f64) -> f64 {
        self.c0 * math::powf(math::sin(theta), 2.0 * self.n + 2.0)
    }
    fn ds(&self, theta: f64) -> f64 {
        let p = 2.0 * self.n + 2.0;
        self.c0 * p * math::powf(math::sin(theta), p - 1.0) * math::cos(theta)
    }
    fn d2s(&self, theta: f64) -> f64 {
        let p = 2.0 * self.n + 2.0;
        let sn = math::sin(theta);
        let cs = math::cos(theta);
        self.c0 * p * math::powf(sn, p - 2.0) * ((p - 1.0) * cs * cs - sn * sn)
    }
}

/// Hopf sphere with astigmatism `C₀ sin^{2n+2}θ` and support function
///
/// ```text
/// r = C₂cosθ + C₁ + C₀[ sin^{2n+2}θ/(2n+2) − cosθ ∫₀^θ sin^{2n+1}t dt ].
/// ```
pub struct HopfSphere;

impl HopfSphere {
    /// Build the profile; convexity failures name the offending node.
    pub fn profile(n: f64, c0: f64, c1: f64, c2: f64, grid: ThetaGrid) -> Result<SurfaceProfile> {
        if !(n > -1.0) {
            return Err(Error::InvalidArgument("hopf sphere requires n > -1"));
        }
        grid.check_interior()?;
        let support = HopfSupport { n, c0, c1, c2 };
        let nodes = grid.nodes().to_vec();
        let m = nodes.len();
        let mut r = Vec::with_capacity(m);
        let mut r1 = Vec::with_capacity(m);
        let mut r2 = Vec::with_capacity(m);
        let mut s = Vec::with_capacity(m);
        for &t in &nodes {
            let sn = math::sin(t);
            let sv = c0 * math::powf(sn, 2.0 * n + 2.0);
            let m1 = c1 + sv / (2.0 * n + 2.0);
            r.push(support.r(t));
            r1.push(m1);
            r2.push(m1 + sv);
            s.push(sv);
        }
        let mut profile = SurfaceProfile {
            grid,
            r,
            r1,
            r2,
            s,
            c1,
            c2,
            support: Some(Box::new(support)),
            astig: Some(Box::new(HopfAstigmatism { n, c0 })),
        };
        profile.check_convexity()?;
        Ok(profile)
    }
}

/// Triangle mesh of the embedded surface of revolution.
#[derive(Debug, Clone)]
pub struct Mesh {
    /// Vertices; the two pole vertices come last.
    pub vertices: Vec<[f64; 3]>,
    /// 0-based triangle indices.
    pub triangles: Vec<[u32; 3]>,
}

/// Embed the profile in 3-space:
/// `x¹+ix² = (sinφ + i cosφ)(r sinθ + r′cosθ)`, `x³ = r cosθ − r′ sinθ`,
/// poles added as single vertices with fans, quads in between split into
/// triangles.
pub fn embed(p: &SurfaceProfile, phi_count: usize) -> Result<Mesh> {
    if phi_count < 3 {
        return Err(Error::InvalidArgument("embed: phi_count must be at least 3"));
    }
    let nodes = p.grid().nodes();
    let tc = nodes.len();
    let mut vertices = Vec::with_capacity(tc * phi_count + 2);
    for (i, &t) in nodes.iter().enumerate() {
        let rv = p.r()[i];
        let dv = p.eval_dr(t);
        let rho = rv * math::sin(t) + dv * math::cos(t);
        let z = rv * math::cos(t) - dv * math::sin(t);
        for j in 0..phi_count {
            let phi = 2.0 * PI * j as f64 / phi_count as f64;
            vertices.push([rho * math::sin(phi), rho * math::cos(phi), z]);
        }
    }
    let (r_n, _) = extrapolate_to_pole(&|t| p.eval_r(t), Pole::North, 0.15)?;
    let (r_s, _) = extrapolate_to_pole(&|t| p.eval_r(t), Pole::South, 0.15)?;
    let north = vertices.len() as u32;
    vertices.push([0.0, 0.0, r_n]);
    let south = vertices.len() as u32;
    vertices.push([0.0, 0.0, -r_s]);
    let mut triangles = Vec::new();
    let pc = phi_count as u32;
    for j in 0..pc {
        let jn = (j + 1) % pc;
        triangles.push([north, j, jn]);
    }
    for i in 0..(tc as u32 - 1) {
        for j in 0..pc {
            let jn = (j + 1) % pc;
            let a = i * pc + j;
            let b = i * pc + jn;
            let c = (i + 1) * pc + j;
            let d = (i + 1) * pc + jn;
            triangles.push([a, b, c]);
            triangles.push([b, d, c]);
        }
    }
    let base = (tc as u32 - 1) * pc;
    for j in 0..pc {
        let jn = (j + 1) % pc;
        triangles.push([south, base + jn, base + j]);
    }
    Ok(Mesh { vertices, triangles })
}
