//! Smooth spectral filter, functional calculus and the Duhamel constant.
//!
//! `F` rises from 0 at `λ/2` to 1 at `λ` along a rescaled `exp(−1/t)`
//! smoothstep, stays 1 up to `1`, and falls back to 0 at `2`.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use rustfft::num_complex::Complex as FftComplex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{cr, CMat, CVec, Real};

/// Value and first three derivatives of a function at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<T: Real> {
    pub v: T,
    pub d1: T,
    pub d2: T,
    pub d3: T,
}

impl<T: Real> Jet<T> {
    pub fn constant(v: T) -> Self {
        Self { v, d1: T::zero(), d2: T::zero(), d3: T::zero() }
    }

    pub fn variable(x: T) -> Self {
        Self { v: x, d1: T::one(), d2: T::zero(), d3: T::zero() }
    }

    /// `φ ∘ self` given `φ, φ', φ'', φ'''` at `self.v` (Faà di Bruno).
    fn compose(self, p: [T; 4]) -> Self {
        let three = T::lit(3.0);
        Self {
            v: p[0],
            d1: p[1] * self.d1,
            d2: p[2] * self.d1 * self.d1 + p[1] * self.d2,
            d3: p[3] * self.d1 * self.d1 * self.d1 + three * p[2] * self.d1 * self.d2 + p[1] * self.d3,
        }
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.compose([e; 4])
    }

    pub fn recip(self) -> Self {
        let u = self.v;
        let (u2, u3) = (u * u, u * u * u);
        self.compose([T::one() / u, -T::one() / u2, T::lit(2.0) / u3, -T::lit(6.0) / (u3 * u)])
    }
}

impl<T: Real> Add for Jet<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { v: self.v + o.v, d1: self.d1 + o.d1, d2: self.d2 + o.d2, d3: self.d3 + o.d3 }
    }
}

impl<T: Real> Sub for Jet<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<T: Real> Neg for Jet<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { v: -self.v, d1: -self.d1, d2: -self.d2, d3: -self.d3 }
    }
}

impl<T: Real> Mul for Jet<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (two, three) = (T::lit(2.0), T::lit(3.0));
        Self {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + two * self.d1 * o.d1 + self.v * o.d2,
            d3: self.d3 * o.v + three * self.d2 * o.d1 + three * self.d1 * o.d2 + self.v * o.d3,
        }
    }
}

/// `e^{−1/t}` for `t > 0`, zero otherwise.
fn bump<T: Real>(t: Jet<T>) -> Jet<T> {
    if t.v <= T::zero() {
        return Jet::constant(T::zero());
    }
    (-t.recip()).exp()
}

/// Smoothstep `f(t) / (f(t) + f(1−t))` with its derivatives.
pub fn smoothstep<T: Real>(t: Jet<T>) -> Jet<T> {
    if t.v <= T::zero() {
        return Jet::constant(T::zero());
    }
    if t.v >= T::one() {
        return Jet::constant(T::one());
    }
    let a = bump(t);
    let b = bump(Jet::constant(T::one()) - t);
    a * (a + b).recip()
}

/// Grid size used to bound `|s'''|`.
const DERIVATIVE_GRID: usize = 10_000;

/// `max |s'''|` on `[0, 1]` from a dense grid.
pub fn smoothstep_third_derivative_max() -> f64 {
    (0..=DERIVATIVE_GRID)
        .map(|i| smoothstep(Jet::variable(i as f64 / DERIVATIVE_GRID as f64)).d3.abs())
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug)]
pub struct FilterFunction<T: Real> {
    lambda: T,
    third_derivative_bound: T,
}

/// Constructor constant `K` with `max |F'''| ≤ K / λ³`.
pub fn filter_constant() -> f64 {
    8.0 * smoothstep_third_derivative_max()
}

pub fn build_filter<T: Real>(lambda: T) -> Result<FilterFunction<T>> {
    if !(lambda > T::zero() && lambda <= T::one()) {
        return Err(Error::InvalidArgument(format!("filter needs 0 < λ ≤ 1, got {lambda}")));
    }
    let s3 = T::lit(smoothstep_third_derivative_max());
    let ramp = T::lit(2.0) / lambda;
    Ok(FilterFunction { lambda, third_derivative_bound: s3 * (ramp * ramp * ramp).max(T::one()) })
}

impl<T: Real> FilterFunction<T> {
    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn third_derivative_bound(&self) -> T {
        self.third_derivative_bound
    }

    pub fn jet(&self, x: T) -> Jet<T> {
        let half = self.lambda / T::lit(2.0);
        if x < self.lambda {
            // t = (x − λ/2) / (λ/2)
            let scale = T::one() / half;
            let t = Jet { v: (x - half) * scale, d1: scale, d2: T::zero(), d3: T::zero() };
            smoothstep(t)
        } else if x <= T::one() {
            Jet::constant(T::one())
        } else {
            let t = Jet { v: T::lit(2.0) - x, d1: -T::one(), d2: T::zero(), d3: T::zero() };
            smoothstep(t)
        }
    }

    pub fn eval(&self, x: T) -> T {
        self.jet(x).v
    }
}

/// `F(σ)` by applying `F` to the eigenvalues of the Hermitian part of `σ`.
pub fn apply_filter<T: Real>(filter: &FilterFunction<T>, sigma: &CMat<T>) -> CMat<T> {
    linalg::hermitian_function(&linalg::hermitian_part(sigma), |x| filter.eval(x))
}

/// Spectral projector of `σ` onto eigenvalues in `[λ/2, 1]`.
pub fn spectral_projector<T: Real>(sigma: &CMat<T>, lambda: T) -> (CMat<T>, usize) {
    let (vals, vecs) = linalg::eigh(&linalg::hermitian_part(sigma));
    let lo = lambda / T::lit(2.0);
    let idx: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] >= lo && vals[i] <= T::one()).collect();
    let d = sigma.nrows();
    let mut p = CMat::zeros(d, d);
    for &i in &idx {
        let v = vecs.column(i);
        p += v * v.adjoint();
    }
    (p, idx.len())
}

/// Samples per unit length on the first quadrature pass.
const BASE_DENSITY: f64 = 256.0;
/// Zero-padded transform length, in units of the sampled window.
const BASE_PADDING: usize = 16;
const MAX_REFINEMENTS: usize = 8;

/// `(1/2π) ∫ |t| |F̂(t)| dt` on one grid: samples of `F` on `[0, 4]` with
/// spacing `h`, zero-padded by `padding`, trapezoid rule in `t`.
fn duhamel_integral(filter: &FilterFunction<f64>, h: f64, padding: usize) -> f64 {
    let window = 4.0;
    let m = (window / h).round() as usize;
    let len = m * padding;
    let mut buf: Vec<FftComplex<f64>> = (0..len)
        .map(|j| if j < m { FftComplex::new(filter.eval(j as f64 * h), 0.0) } else { FftComplex::new(0.0, 0.0) })
        .collect();
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let dt = 2.0 * PI / (len as f64 * h);
    // F is real, so |F̂(−t)| = |F̂(t)|; integrate over t ≥ 0 and double.
    let half = len / 2;
    let mut sum = 0.0;
    for (k, z) in buf.iter().enumerate().take(half + 1) {
        let t = k as f64 * dt;
        let w = if k == 0 || k == half { 0.5 } else { 1.0 };
        sum += w * t * h * z.norm();
    }
    2.0 * sum * dt / (2.0 * PI)
}

/// Lipschitz constant `L(λ)` with `‖F(σ) − F(ω)‖₁ ≤ L(λ) ‖σ − ω‖₁`.
///
/// Refines the sampling grid until two successive values agree to 1%.
pub fn duhamel_constant<T: Real>(filter: &FilterFunction<T>) -> Result<f64> {
    let f64_filter = build_filter(filter.lambda().as_f64())?;
    let lambda = filter.lambda().as_f64();
    // the ramp has width λ/2; keep at least a few dozen samples on it
    let mut h = (1.0 / BASE_DENSITY).min(lambda / 64.0);
    let mut padding = BASE_PADDING;
    let mut prev = duhamel_integral(&f64_filter, h, padding);
    let mut change = f64::INFINITY;
    for _ in 0..MAX_REFINEMENTS {
        h /= 2.0;
        padding *= 2;
        let next = duhamel_integral(&f64_filter, h, padding);
        change = ((next - prev) / next).abs();
        if change < 0.01 {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Quadrature(change))
}

/// Frozen ratio `max ‖Pη − η‖ / (δ/λ⁴)` over the seed-0 calibration sweep
/// ([`calibration_sweep`]), rounded up.
pub const C_REPORT: f64 = 0.05;

#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub lambda: f64,
    pub delta: f64,
    pub duhamel: f64,
    /// `‖Pη − η‖`.
    pub projection_defect: f64,
    /// `L(λ) δ / λ`.
    pub route_bound: f64,
    pub rank: usize,
    pub rank_bound: usize,
    /// `‖λη − F(σ)η‖`.
    pub reading_scaled: f64,
    /// `‖η − F(σ)η‖`.
    pub reading_unscaled: f64,
    pub reading_scaled_holds: bool,
    pub reading_unscaled_holds: bool,
    pub route_pass: bool,
    pub form_pass: bool,
    pub rank_pass: bool,
}

/// Stability of an eigenvector `η` of `ω` (eigenvalue `λ`) under `ω → σ`.
pub fn eigenvector_stability_check<T: Real>(
    sigma: &CMat<T>,
    omega: &CMat<T>,
    eta: &CVec<T>,
    lambda: T,
) -> Result<StabilityReport> {
    let filter = build_filter(lambda)?;
    let eig_residual = (omega * eta - eta * cr(lambda)).norm();
    if eig_residual > T::lit(1e-9) {
        return Err(Error::InvalidArgument(format!(
            "η is not an eigenvector of ω with eigenvalue λ (residual {})",
            eig_residual.as_f64()
        )));
    }
    let delta = linalg::trace_norm(&(sigma - omega)).as_f64();
    let duhamel = duhamel_constant(&filter)?;
    let (p, rank) = spectral_projector(sigma, lambda);
    let projection_defect = (&p * eta - eta).norm().as_f64();
    let f_eta = apply_filter(&filter, sigma) * eta;
    let reading_scaled = (eta * cr(lambda) - &f_eta).norm().as_f64();
    let reading_unscaled = (eta - &f_eta).norm().as_f64();
    let l = lambda.as_f64();
    let route_bound = duhamel * delta / l;
    let rank_bound = (2.0 / l).floor() as usize;
    let slack = 1e-12;
    Ok(StabilityReport {
        lambda: l,
        delta,
        duhamel,
        projection_defect,
        route_bound,
        rank,
        rank_bound,
        reading_scaled,
        reading_unscaled,
        reading_scaled_holds: reading_scaled <= duhamel * delta + slack,
        reading_unscaled_holds: reading_unscaled <= duhamel * delta + slack,
        route_pass: projection_defect <= route_bound + slack,
        form_pass: projection_defect <= C_REPORT * delta / l.powi(4) + slack,
        rank_pass: rank <= rank_bound,
    })
}

/// Density matrix `ω` on `d` dimensions having `η = e₀` as an eigenvector
/// with eigenvalue `λ`, the remaining weight spread randomly.
pub fn random_instance<R: rand::Rng>(d: usize, lambda: f64, rng: &mut R) -> (CMat<f64>, CVec<f64>) {
    let rest = crate::random::density_matrix::<f64, _>(d - 1, rng) * cr(1.0 - lambda);
    let mut omega = CMat::zeros(d, d);
    omega[(0, 0)] = cr(lambda);
    omega.view_mut((1, 1), (d - 1, d - 1)).copy_from(&rest);
    let u = crate::random::unitary::<f64, _>(d, rng);
    let omega = &u * omega * u.adjoint();
    let eta = u.column(0).into_owned();
    (omega, eta)
}

/// Ratios `‖Pη − η‖ / (δ/λ⁴)` over the calibration sweep: `d = 8`,
/// `λ ∈ {0.1, 0.25, 0.5}`, mixing weights `t ∈ {1e−3, 1e−2, 1e−1}`, ten
/// draws each, `σ = (1 − t) ω + t τ` for random `τ`.
pub fn calibration_sweep(seed: u64) -> Vec<f64> {
    let mut rng = crate::random::rng(seed);
    let mut out = Vec::new();
    for lambda in [0.1, 0.25, 0.5] {
        for t in [1e-3, 1e-2, 1e-1] {
            for _ in 0..10 {
                let (omega, eta) = random_instance(8, lambda, &mut rng);
                let tau = crate::random::density_matrix::<f64, _>(8, &mut rng);
                let sigma = &omega * cr(1.0 - t) + tau * cr(t);
                let delta = linalg::trace_norm(&(&sigma - &omega));
                let (p, _) = spectral_projector(&sigma, lambda);
                let defect = (&p * &eta - &eta).norm();
                out.push(defect / (delta / lambda.powi(4)));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jet_matches_closed_form() {
        // x³ e^x at x = 0.7
        let x = Jet::variable(0.7f64);
        let j = x * x * x * x.exp();
        let e = 0.7f64.exp();
        let p = |a: f64, b: f64, c: f64, d: f64| e * (a * 0.343 + b * 0.49 + c * 0.7 + d);
        assert!((j.v - p(1.0, 0.0, 0.0, 0.0)).abs() < 1e-14);
        assert!((j.d1 - p(1.0, 3.0, 0.0, 0.0)).abs() < 1e-13);
        assert!((j.d2 - p(1.0, 6.0, 6.0, 0.0)).abs() < 1e-13);
        assert!((j.d3 - p(1.0, 9.0, 18.0, 6.0)).abs() < 1e-12);
    }

    #[test]
    fn jet_derivatives_match_finite_differences() {
        let f = |x: f64| smoothstep(Jet::variable(x));
        let h = 1e-4;
        for &x in &[0.2, 0.5, 0.8] {
            let fd3 = (f(x + 2.0 * h).v - 2.0 * f(x + h).v + 2.0 * f(x - h).v - f(x - 2.0 * h).v) / (2.0 * h * h * h);
            assert!((f(x).d3 - fd3).abs() < 1e-4 * (1.0 + fd3.abs()), "x={x}: {} vs {fd3}", f(x).d3);
        }
    }

    #[test]
    fn filter_shape() {
        let f = build_filter(0.4f64).unwrap();
        assert_eq!(f.eval(0.4), 1.0);
        assert_eq!(f.eval(0.2), 0.0);
        let mid = f.eval(0.3);
        assert!(mid > 0.0 && mid < 1.0);
        assert_eq!(f.eval(0.7), 1.0);
        assert_eq!(f.eval(2.0), 0.0);
        assert_eq!(f.eval(2.5), 0.0);
        assert!(f.eval(1.5) > 0.0 && f.eval(1.5) < 1.0);
        let one = build_filter(1.0f64).unwrap();
        assert_eq!(one.eval(1.0), 1.0);
        assert_eq!(one.eval(0.5), 0.0);
    }

    #[test]
    fn filter_rejects_bad_lambda() {
        assert!(build_filter(0.0f64).is_err());
        assert!(build_filter(1.5f64).is_err());
    }

    #[test]
    fn diagonal_filter_example() {
        let f = build_filter(0.5f64).unwrap();
        let sigma = CMat::from_diagonal(&CVec::from_vec(vec![cr(0.6), cr(0.4)]));
        let out = apply_filter(&f, &sigma);
        assert!((out[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!((out[(1, 1)].re - f.eval(0.4)).abs() < 1e-14);
    }

    #[test]
    fn calibration_is_frozen() {
        let worst = calibration_sweep(0).into_iter().fold(0.0, f64::max);
        assert!(worst <= C_REPORT, "calibration ratio {worst} exceeds the frozen constant");
    }
}
