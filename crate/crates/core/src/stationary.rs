//! Conormal defining functions, lifted discs, and the two faces of
//! stationarity: a holomorphic lift into the conormal bundle, or a real
//! multiplier `c` making `zeta c(zeta) d rho(f(zeta))` extend holomorphically.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Div, Mul, Neg, Sub};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::discs::{boundary_residual, AnalyticDisc};
use crate::domain::{rho_gradient, CotangentPoint, DomainParams};
use crate::error::{Error, Result};
use crate::fourier::{coefficient, horner, roots_of_unity};
use crate::linalg::lstsq;

/// Smallest admissible modulus of the chart denominators.
pub const DENOMINATOR_MIN: f64 = 1e-6;
/// Attachment required before searching for a multiplier.
pub const ATTACHMENT_TOL: f64 = 1e-10;
/// Negative Fourier modes below this count as vanishing.
pub const STATIONARITY_TOL: f64 = 1e-8;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// A holomorphic map `(f1, f2, ft1, ft2)` into the cotangent bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedDisc {
    coeffs: Vec<[Complex64; 4]>,
}

impl LiftedDisc {
    pub fn from_coeffs(coeffs: Vec<[Complex64; 4]>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("coeffs", "a lifted disc needs at least one coefficient"));
        }
        if coeffs.iter().flatten().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::invalid("coeffs", "coefficients must be finite"));
        }
        Ok(LiftedDisc { coeffs })
    }

    /// Combines a disc with the Taylor coefficients of its cotangent part.
    pub fn from_parts(disc: &AnalyticDisc, lift: &[[Complex64; 2]]) -> Result<Self> {
        let n = disc.degree().max(lift.len().saturating_sub(1));
        let base = disc.padded(n);
        let coeffs = (0..=n)
            .map(|k| {
                let b = base.coeffs()[k];
                let t = lift.get(k).copied().unwrap_or([ZERO; 2]);
                [b[0], b[1], t[0], t[1]]
            })
            .collect();
        Self::from_coeffs(coeffs)
    }

    /// The lift `(zeta, 0, 1, 0)` of the disc `(zeta, 0)`.
    pub fn axis() -> Self {
        LiftedDisc {
            coeffs: vec![[ZERO, ZERO, ONE, ZERO], [ONE, ZERO, ZERO, ZERO]],
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[[Complex64; 4]] {
        &self.coeffs
    }

    pub fn padded(&self, degree: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        if coeffs.len() < degree + 1 {
            coeffs.resize(degree + 1, [ZERO; 4]);
        }
        LiftedDisc { coeffs }
    }

    pub fn projection(&self) -> AnalyticDisc {
        AnalyticDisc::from_coeffs(self.coeffs.iter().map(|c| [c[0], c[1]]).collect())
            .expect("finite coefficients")
    }

    /// Multiplies the cotangent part by `s`.
    pub fn scale_cotangent(&self, s: f64) -> Self {
        LiftedDisc {
            coeffs: self.coeffs.iter().map(|c| [c[0], c[1], c[2] * s, c[3] * s]).collect(),
        }
    }

    pub fn eval(&self, zeta: Complex64) -> CotangentPoint {
        let comp = |i: usize| horner(self.coeffs.iter().map(move |c| c[i]), zeta);
        CotangentPoint {
            z: comp(0),
            w: comp(1),
            zt: comp(2),
            wt: comp(3),
        }
    }

    /// Max distance between coefficient vectors (shorter one zero-padded).
    pub fn coeff_distance(&self, other: &LiftedDisc) -> f64 {
        let n = self.degree().max(other.degree());
        let (a, b) = (self.padded(n), other.padded(n));
        a.coeffs
            .iter()
            .zip(&b.coeffs)
            .flat_map(|(x, y)| (0..4).map(move |i| (x[i] - y[i]).norm()))
            .fold(0.0, f64::max)
    }
}

/// Arithmetic shared by plain complex numbers and first-order duals, so
/// the defining functions are written once and differentiated exactly.
pub(crate) trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn constant(c: Complex64) -> Self;
    fn conj(self) -> Self;
}

impl Scalar for Complex64 {
    fn constant(c: Complex64) -> Self {
        c
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
}

/// `v + t d` for a real infinitesimal `t`, so conjugation acts on both parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dual {
    pub v: Complex64,
    pub d: Complex64,
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual { v: self.v + o.v, d: self.d + o.d }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual { v: self.v - o.v, d: self.d - o.d }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual { v: self.v * o.v, d: self.v * o.d + self.d * o.v }
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        Dual {
            v: self.v / o.v,
            d: (self.d * o.v - self.v * o.d) / (o.v * o.v),
        }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual { v: -self.v, d: -self.d }
    }
}

impl Scalar for Dual {
    fn constant(c: Complex64) -> Self {
        Dual { v: c, d: ZERO }
    }
    fn conj(self) -> Self {
        Dual { v: self.v.conj(), d: self.d.conj() }
    }
}

/// Chart denominator `conj(z) - 2 lambda z^3 conj(w)^2`.
fn chart_denominator<S: Scalar>(lambda: f64, z: S, w: S) -> S {
    let wb = w.conj();
    z.conj() - S::constant(Complex64::new(2.0 * lambda, 0.0)) * z * z * z * wb * wb
}

/// `rho_1 .. rho_4` at `zeta` as complex numbers whose real parts are the
/// defining functions (imaginary parts vanish up to rounding on the circle).
pub(crate) fn conormal_terms<S: Scalar>(lambda: f64, zeta: Complex64, p: [S; 4]) -> [S; 4] {
    let [z, w, zt, wt] = p;
    let c = |x: Complex64| S::constant(x);
    let lam = c(Complex64::new(lambda, 0.0));
    let (zb, wb) = (z.conj(), w.conj());
    let zb4 = zb * zb * zb * zb;
    let z4 = z * z * z * z;
    let d = chart_denominator(lambda, z, w);
    let n = wb - lam * zb4 * w;

    let rho1 = (z * zb - c(ONE)) + (w * wb - c(Complex64::new(0.5 * lambda, 0.0)) * (zb4 * w * w + z4 * wb * wb));
    let rho2 = c(I) * zt / (c(zeta) * d) - c(I * zeta) * zt.conj() / d.conj();
    let q = wt - zt * n / d;
    let rho3 = q + q.conj();
    let rho4 = c(I) * q - c(I) * q.conj();
    [rho1, rho2, rho3, rho4]
}

/// `(rho_1, .., rho_4)(zeta)` at a cotangent point, checking the chart.
pub fn conormal_defining(params: &DomainParams, zeta: Complex64, p: &CotangentPoint) -> Result<[f64; 4]> {
    let d = chart_denominator(params.lambda(), p.z, p.w);
    if d.norm() < DENOMINATOR_MIN {
        return Err(Error::SmallDenominator { index: 0, modulus: d.norm() });
    }
    Ok(conormal_terms(params.lambda(), zeta, [p.z, p.w, p.zt, p.wt]).map(|t| t.re))
}

/// Values of the defining functions at the `m`-th roots of unity, point-major.
pub(crate) fn conormal_samples(params: &DomainParams, lift: &LiftedDisc, m: usize) -> Result<Vec<[f64; 4]>> {
    roots_of_unity(m)
        .into_iter()
        .enumerate()
        .map(|(j, zeta)| {
            conormal_defining(params, zeta, &lift.eval(zeta)).map_err(|e| match e {
                Error::SmallDenominator { modulus, .. } => Error::SmallDenominator { index: j, modulus },
                other => other,
            })
        })
        .collect()
}

/// `max_j |rho_k(omega_j)(L(omega_j))|` for `k = 1..4` over the `m`-th roots of unity.
pub fn conormal_residuals(params: &DomainParams, lift: &LiftedDisc, m: usize) -> Result<[f64; 4]> {
    if m == 0 {
        return Err(Error::invalid("m", "need at least one sample"));
    }
    let mut out = [0.0f64; 4];
    for vals in conormal_samples(params, lift, m)? {
        for k in 0..4 {
            out[k] = out[k].max(vals[k].abs());
        }
    }
    Ok(out)
}

/// A real trigonometric polynomial `c = sum_{|k|<=K} c_k zeta^k` stored as
/// `c_0, .., c_K` with `c_{-k} = conj(c_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Multiplier {
    coeffs: Vec<Complex64>,
}

impl Multiplier {
    pub fn from_coeffs(mut coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("coeffs", "a multiplier needs c_0"));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::invalid("coeffs", "coefficients must be finite"));
        }
        coeffs[0].im = 0.0;
        Ok(Multiplier { coeffs })
    }

    pub fn one() -> Self {
        Multiplier { coeffs: vec![ONE] }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Value at a point of the unit circle.
    pub fn eval(&self, zeta: Complex64) -> f64 {
        let tail = horner(self.coeffs.iter().skip(1).copied(), zeta) * zeta;
        self.coeffs[0].re + 2.0 * tail.re
    }
}

/// Outcome of [`stationarity_test_fourier`].
#[derive(Debug, Clone, PartialEq)]
pub struct StationarityOutcome {
    pub is_stationary: bool,
    /// The least-squares multiplier (normalized by `c(1) = 1`).
    pub multiplier: Multiplier,
    /// Largest negative Fourier mode left by the multiplier.
    pub residual: f64,
}

pub fn default_multiplier_degree(disc_degree: usize) -> usize {
    2 * disc_degree + 2
}

pub fn min_samples(disc_degree: usize, multiplier_degree: usize) -> usize {
    8 * (disc_degree + multiplier_degree)
}

/// Samples of `d rho(f(omega_j))` at the `m`-th roots of unity.
fn gradient_samples(params: &DomainParams, disc: &AnalyticDisc, m: usize) -> [Vec<Complex64>; 2] {
    let mut gz = Vec::with_capacity(m);
    let mut gw = Vec::with_capacity(m);
    for zeta in roots_of_unity(m) {
        let (dz, dw) = rho_gradient(params, &disc.eval_unchecked(zeta));
        gz.push(dz);
        gw.push(dw);
    }
    [gz, gw]
}

/// Number of negative modes of `zeta c d rho(f)` that can be nonzero.
fn negative_band(n: usize, k: usize) -> usize {
    4 * n + k + 2
}

fn solve_multiplier(params: &DomainParams, disc: &AnalyticDisc, m: usize, k: usize) -> (Multiplier, f64) {
    let n = disc.degree();
    let m = m.max(7 * n + 2 * k + 8);
    let band = negative_band(n, k) as i64;
    let ki = k as i64;
    let grads = gradient_samples(params, disc, m);
    // g_hat[j][f - lo] for f in lo..=hi
    let lo = -band - 1 - ki;
    let hi = ki - 2;
    let hat: Vec<Vec<Complex64>> = grads
        .iter()
        .map(|g| (lo..=hi.max(lo)).map(|f| coefficient(g, f)).collect())
        .collect();
    let at = |j: usize, f: i64| -> Complex64 {
        if f < lo || f > hi {
            ZERO
        } else {
            hat[j][(f - lo) as usize]
        }
    };

    // c = 1 + sum_k alpha_k (zeta^k + zeta^-k - 2) + beta_k i (zeta^k - zeta^-k)
    let rows = 2 * 2 * band as usize;
    let mut a = DMatrix::<f64>::zeros(rows, 2 * k);
    let mut b = DVector::<f64>::zeros(rows);
    let mut r = 0;
    for j in 0..2 {
        for mode in -band..0 {
            let base = at(j, mode - 1);
            b[r] = -base.re;
            b[r + 1] = -base.im;
            for s in 1..=ki {
                let (minus, plus) = (at(j, mode - 1 - s), at(j, mode - 1 + s));
                let ca = minus + plus - base * 2.0;
                let cb = I * (minus - plus);
                let col = 2 * (s as usize - 1);
                a[(r, col)] = ca.re;
                a[(r + 1, col)] = ca.im;
                a[(r, col + 1)] = cb.re;
                a[(r + 1, col + 1)] = cb.im;
            }
            r += 2;
        }
    }
    let x = if k > 0 { lstsq(&a, &b, 1e-13) } else { DVector::zeros(0) };
    let fit = &a * &x - &b;
    let residual = (0..rows / 2)
        .map(|i| fit[2 * i].hypot(fit[2 * i + 1]))
        .fold(0.0, f64::max);
    let mut coeffs = vec![ONE];
    for s in 0..k {
        let (alpha, beta) = (x[2 * s], x[2 * s + 1]);
        coeffs[0].re -= 2.0 * alpha;
        coeffs.push(Complex64::new(alpha, beta));
    }
    (Multiplier { coeffs }, residual)
}

/// Searches a real multiplier of degree at most `k` with `c(1) = 1` making
/// `zeta c(zeta) d rho(f(zeta))` free of negative Fourier modes.
///
/// A failure that disappears at degree `2k + 2` is reported as
/// [`Error::MultiplierDegreeTooSmall`] rather than as non-stationarity.
pub fn stationarity_test_fourier(
    params: &DomainParams,
    disc: &AnalyticDisc,
    m: usize,
    k: usize,
) -> Result<StationarityOutcome> {
    let n = disc.degree();
    if m < min_samples(n, k) || m < 4 * n + 1 {
        return Err(Error::invalid("m", "need at least 8(N+K) samples"));
    }
    let attached = boundary_residual(params, disc, m)?;
    if !(attached < ATTACHMENT_TOL) {
        return Err(Error::NotAttached { residual: attached });
    }
    let (multiplier, residual) = solve_multiplier(params, disc, m, k);
    if residual < STATIONARITY_TOL {
        return Ok(StationarityOutcome { is_stationary: true, multiplier, residual });
    }
    let k2 = 2 * k + 2;
    let (_, refined) = solve_multiplier(params, disc, m.max(min_samples(n, k2)), k2);
    if refined < STATIONARITY_TOL {
        return Err(Error::MultiplierDegreeTooSmall { degree: k, residual, refined });
    }
    Ok(StationarityOutcome { is_stationary: false, multiplier, residual })
}

/// [`stationarity_test_fourier`] with `K = 2N + 2` and `M = 8(N + K)`.
pub fn stationarity_test(params: &DomainParams, disc: &AnalyticDisc) -> Result<StationarityOutcome> {
    let k = default_multiplier_degree(disc.degree());
    stationarity_test_fourier(params, disc, min_samples(disc.degree(), k), k)
}

/// The holomorphic extension of `zeta c(zeta) d rho(f(zeta))`, read off
/// from its nonnegative Fourier modes, paired with the disc.
pub fn lift_from_multiplier(params: &DomainParams, disc: &AnalyticDisc, c: &Multiplier) -> Result<LiftedDisc> {
    let n = disc.degree();
    let k = c.degree();
    let top = 3 * n + k + 1;
    let band = negative_band(n, k);
    let m = (min_samples(n, k) + 16).max(2 * (top + band) + 8);
    let roots = roots_of_unity(m);
    let grads = gradient_samples(params, disc, m);
    let mut lift = vec![[ZERO; 2]; top + 1];
    let mut leftover = 0.0f64;
    for (j, g) in grads.iter().enumerate() {
        let h: Vec<Complex64> = g
            .iter()
            .zip(&roots)
            .map(|(gv, &zeta)| zeta * c.eval(zeta) * gv)
            .collect();
        for (deg, slot) in lift.iter_mut().enumerate() {
            slot[j] = coefficient(&h, deg as i64);
        }
        for mode in 1..=band as i64 {
            leftover = leftover.max(coefficient(&h, -mode).norm());
        }
    }
    if !(leftover < STATIONARITY_TOL) {
        return Err(Error::NotStationary { residual: leftover });
    }
    LiftedDisc::from_parts(disc, &lift)
}
