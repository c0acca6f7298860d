//! Analytic discs `Delta -> C^2` stored as Taylor coefficients, the closed
//! form geodesic families through the origin, and the parameter recovery
//! map that inverts the geodesic chart.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;
use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::domain::{self, w_radius, DomainParams, Point2};
use crate::error::{Error, Result};
use crate::fourier::{horner, roots_of_unity};
use crate::linalg;

const UNIT_DISC_SLACK: f64 = 1e-12;
const REALITY_TOL: f64 = 1e-12;
const ROTATION_TOL: f64 = 1e-12;
const CHART_RANK_TOL: f64 = 1e-8;

/// Tolerance on `max |rho(f(zeta))|` for a disc to count as attached.
pub const ATTACHED_TOL: f64 = 1e-12;

/// A holomorphic map `(f1, f2)` given by its Taylor coefficients at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticDisc {
    coeffs: Vec<[Complex64; 2]>,
}

impl AnalyticDisc {
    pub fn from_coeffs(coeffs: Vec<[Complex64; 2]>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("coeffs", "a disc needs at least one coefficient"));
        }
        if coeffs.iter().flatten().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::invalid("coeffs", "coefficients must be finite"));
        }
        Ok(AnalyticDisc { coeffs })
    }

    pub fn zero(degree: usize) -> Self {
        AnalyticDisc {
            coeffs: vec![[Complex64::new(0.0, 0.0); 2]; degree + 1],
        }
    }

    /// The disc `zeta -> (zeta, 0)`.
    pub fn axis() -> Self {
        let zero = Complex64::new(0.0, 0.0);
        AnalyticDisc {
            coeffs: vec![[zero, zero], [Complex64::new(1.0, 0.0), zero]],
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[[Complex64; 2]] {
        &self.coeffs
    }

    /// Coefficients of one coordinate (`0` for `f1`, `1` for `f2`).
    pub fn component(&self, which: usize) -> impl DoubleEndedIterator<Item = Complex64> + '_ {
        self.coeffs.iter().map(move |c| c[which])
    }

    /// Copy padded with zero coefficients up to `degree`.
    pub fn padded(&self, degree: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        if coeffs.len() < degree + 1 {
            coeffs.resize(degree + 1, [Complex64::new(0.0, 0.0); 2]);
        }
        AnalyticDisc { coeffs }
    }

    pub fn eval(&self, zeta: Complex64) -> Result<Point2> {
        let r = zeta.norm();
        if !(r <= 1.0 + UNIT_DISC_SLACK) {
            return Err(Error::OutsideUnitDisc { modulus: r });
        }
        Ok(self.eval_unchecked(zeta))
    }

    pub(crate) fn eval_unchecked(&self, zeta: Complex64) -> Point2 {
        Point2::new(
            horner(self.component(0), zeta),
            horner(self.component(1), zeta),
        )
    }

    /// `f'(0)`.
    pub fn derivative_at_origin(&self) -> (Complex64, Complex64) {
        match self.coeffs.get(1) {
            Some(c) => (c[0], c[1]),
            None => (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
        }
    }

    /// Values at the `m`-th roots of unity, in index order.
    pub fn boundary_samples(&self, m: usize) -> Result<Vec<Point2>> {
        if m < 2 * self.degree() + 1 {
            return Err(Error::invalid("m", "need at least 2N+1 boundary samples"));
        }
        Ok(roots_of_unity(m)
            .into_iter()
            .map(|z| self.eval_unchecked(z))
            .collect())
    }

    /// Max distance between coefficient vectors (shorter one zero-padded).
    pub fn coeff_distance(&self, other: &AnalyticDisc) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        let a = self.padded(n - 1);
        let b = other.padded(n - 1);
        a.coeffs
            .iter()
            .zip(&b.coeffs)
            .flat_map(|(x, y)| [(x[0] - y[0]).norm(), (x[1] - y[1]).norm()])
            .fold(0.0, f64::max)
    }
}

/// Parameters `(theta, a1, a2)` of the discs
/// `(e^{i theta} zeta, e^{2 i theta} zeta (a1 + a2 zeta + conj(a1) zeta^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeminsideParams {
    pub theta: f64,
    pub a1: Complex64,
    pub a2: f64,
}

impl LeminsideParams {
    pub fn new(theta: f64, a1: Complex64, a2: f64) -> Self {
        LeminsideParams { theta, a1, a2 }
    }

    /// `2 |a1| + |a2|`; the disc lies in the domain when this is below
    /// `1 / (4 (1 + eps)^3)`.
    pub fn size(&self) -> f64 {
        2.0 * self.a1.norm() + self.a2.abs()
    }

    pub fn validate(&self, eps: f64) -> Result<()> {
        if !(self.theta.is_finite() && (0.0..TAU).contains(&self.theta)) {
            return Err(Error::invalid("theta", "must lie in [0, 2 pi)"));
        }
        if !(self.a1.re.is_finite() && self.a1.im.is_finite() && self.a2.is_finite()) {
            return Err(Error::invalid("a1/a2", "must be finite"));
        }
        if !(self.size() < w_radius(eps)) {
            return Err(Error::invalid("a1/a2", "need 2|a1| + |a2| < 1/(4(1+eps)^3)"));
        }
        Ok(())
    }
}

/// Parameters `(theta0, x0, z1, b)` of the geodesics through `(0, 0)` and
/// `(z0, z1)`, `z0 = e^{i theta0} x0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicParams {
    pub theta0: f64,
    pub x0: f64,
    pub z1: Complex64,
    pub b: Complex64,
}

impl GeodesicParams {
    pub fn new(theta0: f64, x0: f64, z1: Complex64, b: Complex64) -> Self {
        GeodesicParams { theta0, x0, z1, b }
    }

    /// Parameters on the real slice: picks `z1` so that
    /// `(1 - x0^4) b + z1 / z0^2 = s`.
    pub fn on_slice(theta0: f64, x0: f64, b: Complex64, s: f64) -> Self {
        let z0 = Complex64::from_polar(x0, theta0);
        let z1 = z0 * z0 * (Complex64::new(s, 0.0) - b * (1.0 - x0.powi(4)));
        GeodesicParams { theta0, x0, z1, b }
    }

    pub fn z0(&self) -> Complex64 {
        Complex64::from_polar(self.x0, self.theta0)
    }

    /// `(1/5) (1/(4(1+eps)^3) - |z1 / z0^2|)`.
    pub fn epsilon1(&self, eps: f64) -> f64 {
        (w_radius(eps) - (self.z1 / (self.z0() * self.z0())).norm()) / 5.0
    }

    /// `x0 (-b + conj(b) x0^2)`.
    pub fn a1(&self) -> Complex64 {
        let x2 = self.x0 * self.x0;
        (-self.b + self.b.conj() * x2) * self.x0
    }

    /// `(1 - x0^4) b + z1 / z0^2`, real on the admissible slice.
    pub fn a2_complex(&self) -> Complex64 {
        let z0 = self.z0();
        self.b * (1.0 - self.x0.powi(4)) + self.z1 / (z0 * z0)
    }

    pub fn validate(&self, eps: f64) -> Result<()> {
        if !(self.theta0.is_finite() && (0.0..TAU).contains(&self.theta0)) {
            return Err(Error::invalid("theta0", "must lie in [0, 2 pi)"));
        }
        if !(self.x0 > 0.0 && self.x0 < 1.0) {
            return Err(Error::invalid("x0", "must lie in (0, 1)"));
        }
        if !(self.z1.norm() < self.x0 * self.x0 * w_radius(eps)) {
            return Err(Error::invalid("z1", "need |z1| < |z0|^2 / (4(1+eps)^3)"));
        }
        if !(self.b.norm() < self.epsilon1(eps)) {
            return Err(Error::invalid("b", "need |b| < eps1"));
        }
        if !(self.a2_complex().im.abs() <= REALITY_TOL) {
            return Err(Error::invalid("b", "(1 - x0^4) b + z1 / z0^2 must be real"));
        }
        Ok(())
    }

    /// The equivalent parameters of the `leminside` family.
    pub fn to_leminside(&self) -> LeminsideParams {
        LeminsideParams::new(self.theta0, self.a1(), self.a2_complex().re)
    }
}

fn check_epsilon(eps: f64) -> Result<()> {
    DomainParams::new(eps, 1.0).map(|_| ())
}

/// Degree three disc `(e^{i theta} zeta, e^{2 i theta} zeta (a1 + a2 zeta + conj(a1) zeta^2))`.
pub fn disc_leminside(eps: f64, params: &LeminsideParams) -> Result<AnalyticDisc> {
    check_epsilon(eps)?;
    params.validate(eps)?;
    Ok(leminside_unchecked(params))
}

pub(crate) fn leminside_unchecked(params: &LeminsideParams) -> AnalyticDisc {
    let rot = Complex64::from_polar(1.0, params.theta);
    let rot2 = rot * rot;
    let zero = Complex64::new(0.0, 0.0);
    AnalyticDisc {
        coeffs: vec![
            [zero, zero],
            [rot, rot2 * params.a1],
            [zero, rot2 * params.a2],
            [zero, rot2 * params.a1.conj()],
        ],
    }
}

/// Geodesic through `(0, 0)` and `(z0, z1)` with free parameter `b`.
pub fn disc_geodesic(eps: f64, params: &GeodesicParams) -> Result<AnalyticDisc> {
    check_epsilon(eps)?;
    params.validate(eps)?;
    Ok(leminside_unchecked(&params.to_leminside()))
}

/// The disc `(zeta, c zeta (z0 - (1 + |z0|^2) zeta + conj(z0) zeta^2))`, with
/// `g(0) = 0` and `g'(0) = (1, c z0)`.
pub fn disc_cubic_extremal(eps: f64, c: f64, z0: Complex64) -> Result<AnalyticDisc> {
    check_epsilon(eps)?;
    let bound = 1.0 / (16.0 * (1.0 + eps).powi(3));
    if !(c >= 0.0 && c < bound) {
        return Err(Error::invalid("c", "need 0 <= c < 1/(16(1+eps)^3)"));
    }
    let r = z0.norm();
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::invalid("z0", "need 0 < |z0| < 1"));
    }
    let params = LeminsideParams::new(0.0, z0 * c, -c * (1.0 + r * r));
    Ok(leminside_unchecked(&params))
}

/// `max_j |rho(f(omega_j))|` over the `m`-th roots of unity.
pub fn boundary_residual(params: &DomainParams, disc: &AnalyticDisc, m: usize) -> Result<f64> {
    if m < 4 * disc.degree() + 1 {
        return Err(Error::invalid("m", "need at least 4N+1 boundary samples"));
    }
    Ok(roots_of_unity(m)
        .into_iter()
        .map(|z| domain::rho(params, &disc.eval_unchecked(z)).abs())
        .fold(0.0, f64::max))
}

/// Inverse of the geodesic chart: returns `(z1, b)` with `z1 = f2(x0)` and
/// `b = -(f2'(0) e^{-i theta0} / z0 + conj(f2'(0)) e^{i theta0} z0) / (1 - x0^4)`.
pub fn recover_params(disc: &AnalyticDisc, z0: Complex64) -> Result<(Complex64, Complex64)> {
    let x0 = z0.norm();
    if !(x0 > 0.0 && x0 < 1.0) {
        return Err(Error::invalid("z0", "need 0 < |z0| < 1"));
    }
    let c = disc.coeffs();
    let f1_is_rotation = c.len() >= 2
        && (c[1][0].norm() - 1.0).abs() <= ROTATION_TOL
        && c.iter()
            .enumerate()
            .all(|(k, v)| k == 1 || v[0].norm() <= ROTATION_TOL);
    if !f1_is_rotation {
        return Err(Error::NotARotation);
    }
    if c.iter().skip(4).any(|v| v[1].norm() > ROTATION_TOL) {
        return Err(Error::invalid("disc", "second coordinate has degree above 3"));
    }
    let rot = z0 / x0;
    if (c[1][0] - rot).norm() > 1e-10 {
        return Err(Error::invalid("z0", "direction differs from the rotation of the disc"));
    }
    let z1 = horner(disc.component(1), Complex64::new(x0, 0.0));
    let d = c[1][1];
    let b = -(d * rot.conj() / z0 + d.conj() * rot * z0) / (1.0 - x0.powi(4));
    Ok((z1, b))
}

/// One point of the three-parameter geodesic chart.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartSample {
    pub z1: Complex64,
    pub b: Complex64,
    pub disc: AnalyticDisc,
}

/// Chart coordinates `(s, Re b, Im b)` with `s = (1 - x0^4) b + z1 / z0^2`.
fn chart_params(theta0: f64, x0: f64, coords: [f64; 3]) -> GeodesicParams {
    GeodesicParams::on_slice(theta0, x0, Complex64::new(coords[1], coords[2]), coords[0])
}

/// Geodesics through `(0,0)` and `(z0, z1)` sampled along the three real
/// directions `s`, `Re b`, `Im b` of the chart; the chart center comes first.
pub fn family_chart(eps: f64, theta0: f64, x0: f64, n_samples: usize) -> Result<Vec<ChartSample>> {
    check_epsilon(eps)?;
    GeodesicParams::new(theta0, x0, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
        .validate(eps)?;
    // 5|b| + |z1/z0^2| <= 7r < w_radius for |s|, |b| <= r
    let r = w_radius(eps) / 8.0;
    let mut out = Vec::with_capacity(1 + 3 * n_samples);
    let mut push = |coords: [f64; 3]| -> Result<()> {
        let p = chart_params(theta0, x0, coords);
        out.push(ChartSample {
            z1: p.z1,
            b: p.b,
            disc: disc_geodesic(eps, &p)?,
        });
        Ok(())
    };
    push([0.0; 3])?;
    for dir in 0..3 {
        for k in 0..n_samples {
            let t = if n_samples == 1 {
                r
            } else {
                r * (2.0 * k as f64 / (n_samples - 1) as f64 - 1.0)
            };
            let mut coords = [0.0; 3];
            coords[dir] = t;
            push(coords)?;
        }
    }
    Ok(out)
}

fn real_coeff_vector(disc: &AnalyticDisc) -> Vec<f64> {
    disc.coeffs()
        .iter()
        .flat_map(|c| [c[0].re, c[0].im, c[1].re, c[1].im])
        .collect()
}

/// Central-difference differential of the chart `(s, Re b, Im b) -> coefficients`
/// at the chart center, and its numerical rank.
pub fn chart_differential_rank(eps: f64, theta0: f64, x0: f64, h: f64) -> Result<(DMatrix<f64>, usize)> {
    check_epsilon(eps)?;
    let mut columns = Vec::new();
    for dir in 0..3 {
        let mut plus = [0.0; 3];
        let mut minus = [0.0; 3];
        plus[dir] = h;
        minus[dir] = -h;
        let fp = real_coeff_vector(&disc_geodesic(eps, &chart_params(theta0, x0, plus))?);
        let fm = real_coeff_vector(&disc_geodesic(eps, &chart_params(theta0, x0, minus))?);
        columns.extend(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)));
    }
    let rows = columns.len() / 3;
    let jac = DMatrix::from_column_slice(rows, 3, &columns);
    let rank = linalg::numerical_rank(&jac, CHART_RANK_TOL);
    Ok((jac, rank))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::in_domain;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const EPS: f64 = 0.01;

    #[test]
    fn eval_examples() {
        assert_eq!(AnalyticDisc::zero(3).eval(c(0.2, 0.5)).unwrap(), Point2::default());
        assert_eq!(AnalyticDisc::axis().eval(c(0.3, 0.0)).unwrap(), Point2::real(0.3, 0.0));
        let d = disc_leminside(EPS, &LeminsideParams::new(0.0, c(0.01, 0.0), 0.02)).unwrap();
        let p = d.eval(c(1.0, 0.0)).unwrap();
        assert!(p.dist(&Point2::real(1.0, 0.04)) < 1e-16);
        assert!(matches!(
            d.eval(c(1.0 + 1e-9, 0.0)),
            Err(Error::OutsideUnitDisc { .. })
        ));
    }

    #[test]
    fn boundary_samples_examples() {
        let s = AnalyticDisc::axis().boundary_samples(4).unwrap();
        let expect = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        for (p, e) in s.iter().zip(expect) {
            assert!((p.z - e).norm() < 1e-15 && p.w == c(0.0, 0.0));
        }
        assert!(AnalyticDisc::zero(2).boundary_samples(9).unwrap().iter().all(|p| *p == Point2::default()));
        let d = disc_leminside(EPS, &LeminsideParams::new(1.0, c(0.01, 0.02), -0.03)).unwrap();
        for (j, p) in d.boundary_samples(13).unwrap().iter().enumerate() {
            let z = Complex64::from_polar(1.0, TAU * j as f64 / 13.0);
            assert!(p.dist(&d.eval(z).unwrap()) < 1e-15);
        }
        assert!(d.boundary_samples(6).is_err());
    }

    #[test]
    fn leminside_examples() {
        let d = disc_leminside(EPS, &LeminsideParams::new(0.0, c(0.0, 0.0), 0.0)).unwrap();
        assert!(d.coeff_distance(&AnalyticDisc::axis()) == 0.0);

        let d = disc_leminside(EPS, &LeminsideParams::new(0.0, c(0.0, 0.0), 0.2)).unwrap();
        assert_eq!(d.coeffs()[2][1], c(0.2, 0.0));
        let lam1 = DomainParams::with_lambda(1.0).unwrap();
        assert!(boundary_residual(&lam1, &d, 64).unwrap() < 1e-15);

        let d = disc_leminside(
            EPS,
            &LeminsideParams::new(core::f64::consts::FRAC_PI_2, c(0.0, 0.01), 0.03),
        )
        .unwrap();
        // -zeta (0.01 i + 0.03 zeta - 0.01 i zeta^2)
        let expect = [c(0.0, -0.01), c(-0.03, 0.0), c(0.0, 0.01)];
        for (k, e) in expect.iter().enumerate() {
            assert!((d.coeffs()[k + 1][1] - e).norm() < 1e-17);
        }
        assert!(disc_leminside(EPS, &LeminsideParams::new(0.0, c(0.1, 0.0), 0.1)).is_err());
        assert!(disc_leminside(EPS, &LeminsideParams::new(7.0, c(0.0, 0.0), 0.0)).is_err());
    }

    #[test]
    fn geodesic_examples() {
        let g = disc_geodesic(EPS, &GeodesicParams::new(0.0, 0.5, c(0.05, 0.0), c(0.0, 0.0))).unwrap();
        assert!((g.coeffs()[2][1] - c(0.2, 0.0)).norm() < 1e-16);
        assert!(g.coeffs()[1][1].norm() == 0.0 && g.coeffs()[3][1].norm() == 0.0);
        assert!(g.eval(c(0.5, 0.0)).unwrap().dist(&Point2::real(0.5, 0.05)) < 1e-16);

        let g = disc_geodesic(EPS, &GeodesicParams::new(0.0, 0.5, c(0.0, 0.0), c(0.0, 0.0))).unwrap();
        assert_eq!(g.coeff_distance(&AnalyticDisc::axis()), 0.0);

        // off-slice b and out-of-range x0 are rejected
        assert!(disc_geodesic(EPS, &GeodesicParams::new(0.0, 0.5, c(0.0, 0.0), c(0.0, 0.001))).is_err());
        assert!(disc_geodesic(EPS, &GeodesicParams::new(0.0, 1.0, c(0.0, 0.0), c(0.0, 0.0))).is_err());
        assert!(disc_geodesic(EPS, &GeodesicParams::new(0.0, 0.5, c(0.1, 0.0), c(0.0, 0.0))).is_err());
    }

    #[test]
    fn cubic_extremal_examples() {
        let z0 = c(0.5, 0.0);
        let g = disc_cubic_extremal(EPS, 0.0, z0).unwrap();
        assert_eq!(g.coeff_distance(&AnalyticDisc::axis()), 0.0);

        let g = disc_cubic_extremal(EPS, 0.01, z0).unwrap();
        let expect = [c(0.005, 0.0), c(-0.0125, 0.0), c(0.005, 0.0)];
        for (k, e) in expect.iter().enumerate() {
            assert!((g.coeffs()[k + 1][1] - e).norm() < 1e-17);
        }
        assert_eq!(g.derivative_at_origin(), (c(1.0, 0.0), c(0.005, 0.0)));
        assert!(disc_cubic_extremal(EPS, 0.2, z0).is_err());
        assert!(disc_cubic_extremal(EPS, 0.01, c(0.0, 0.0)).is_err());
    }

    #[test]
    fn cubic_extremal_stays_in_leminside_range() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let bound = 1.0 / (16.0 * (1.0 + EPS).powi(3));
        for _ in 0..1000 {
            let cc = bound * rng.random::<f64>() * 0.999;
            let z0 = Complex64::from_polar(0.001 + 0.998 * rng.random::<f64>(), rng.random::<f64>() * TAU);
            let size = cc * (1.0 + z0.norm()).powi(2);
            assert!(size < 4.0 * cc && 4.0 * cc < w_radius(EPS));
            let lp = LeminsideParams::new(0.0, z0 * cc, -cc * (1.0 + z0.norm_sqr()));
            assert!((lp.size() - size).abs() < 1e-15);
            assert!(disc_cubic_extremal(EPS, cc, z0).is_ok());
        }
    }

    #[test]
    fn residual_examples() {
        let d1 = DomainParams::with_lambda(1.0).unwrap();
        let half = DomainParams::with_lambda(0.5).unwrap();
        assert!(boundary_residual(&d1, &AnalyticDisc::axis(), 16).unwrap() < 1e-15);
        let d = disc_leminside(EPS, &LeminsideParams::new(0.0, c(0.01, 0.0), 0.02)).unwrap();
        assert!(boundary_residual(&d1, &d, 64).unwrap() < 1e-14);
        let r = boundary_residual(&half, &d, 64).unwrap();
        assert!(r > 1e-4 && r < 1e-3, "residual {r}");
        assert!(boundary_residual(&d1, &d, 12).is_err());
    }

    #[test]
    fn recover_examples() {
        let (z1, b) = recover_params(&AnalyticDisc::axis(), c(0.5, 0.0)).unwrap();
        assert_eq!((z1, b), (c(0.0, 0.0), c(0.0, 0.0)));
        let g = disc_geodesic(EPS, &GeodesicParams::new(0.0, 0.5, c(0.05, 0.0), c(0.0, 0.0))).unwrap();
        let (z1, b) = recover_params(&g, c(0.5, 0.0)).unwrap();
        assert!((z1 - c(0.05, 0.0)).norm() < 1e-16 && b.norm() < 1e-17);

        let mut bad = AnalyticDisc::axis().coeffs().to_vec();
        bad[1][0] = c(0.9, 0.0);
        let bad = AnalyticDisc::from_coeffs(bad).unwrap();
        assert_eq!(recover_params(&bad, c(0.5, 0.0)), Err(Error::NotARotation));
    }

    #[test]
    fn chart_examples() {
        let samples = family_chart(EPS, 0.4, 0.6, 5).unwrap();
        assert_eq!(samples.len(), 16);
        let center = &samples[0];
        let expect = disc_geodesic(EPS, &GeodesicParams::new(0.4, 0.6, c(0.0, 0.0), c(0.0, 0.0))).unwrap();
        assert_eq!(center.disc, expect);
        let z0 = Complex64::from_polar(0.6, 0.4);
        let lam1 = DomainParams::with_lambda(1.0).unwrap();
        for s in &samples {
            let (z1, b) = recover_params(&s.disc, z0).unwrap();
            assert!((z1 - s.z1).norm() < 1e-12 && (b - s.b).norm() < 1e-12);
            assert!(boundary_residual(&lam1, &s.disc, 64).unwrap() < 1e-12);
        }
        let (_, rank) = chart_differential_rank(EPS, 0.4, 0.6, 1e-4).unwrap();
        assert_eq!(rank, 3);
    }

    #[test]
    fn leminside_disc_is_inside_on_interior_grid() {
        let lam1 = DomainParams::with_lambda(1.0).unwrap();
        let d = disc_leminside(EPS, &LeminsideParams::new(2.0, c(0.05, -0.03), 0.1)).unwrap();
        for i in 1..40 {
            for j in 0..25 {
                let z = Complex64::from_polar(i as f64 / 40.0, TAU * j as f64 / 25.0);
                assert!(in_domain(&lam1, &d.eval(z).unwrap()));
            }
        }
    }
}
