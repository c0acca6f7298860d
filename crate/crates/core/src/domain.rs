//! The defining function
//!
//! ```text
//! rho(z, w) = |z|^2 + |w|^2 - lambda Re(conj(z)^4 w^2) - 1
//! ```
//!
//! of the domains `Omega_lambda = {rho < 0}` cut by the polydisc
//! `|z| < 1 + eps`, `|w| < 1 / (4 (1 + eps)^3)`, together with its complex
//! gradient, Levi form and a few geometric predicates.

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

pub const DEFAULT_EPSILON: f64 = 0.01;
const MAX_EPSILON: f64 = 0.01;

/// Roundoff slack used when a sign condition holds with equality on a
/// boundary stratum (for instance `|z| = 1`).
const SIGN_SLACK: f64 = 1e-14;

/// The pair `(eps, lambda)` fixing `Omega_lambda` and its bounding polydisc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainParams {
    epsilon: f64,
    lambda: f64,
}

impl DomainParams {
    pub fn new(epsilon: f64, lambda: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0 && epsilon <= MAX_EPSILON) {
            return Err(Error::invalid("epsilon", "must lie in (0, 1/100]"));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::invalid("lambda", "must be a nonnegative real"));
        }
        Ok(DomainParams { epsilon, lambda })
    }

    /// `eps = 0.01` and the given `lambda`.
    pub fn with_lambda(lambda: f64) -> Result<Self> {
        Self::new(DEFAULT_EPSILON, lambda)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Radius `1 + eps` of the first factor of the polydisc.
    pub fn z_radius(&self) -> f64 {
        1.0 + self.epsilon
    }

    /// Radius `1 / (4 (1 + eps)^3)` of the second factor of the polydisc.
    pub fn w_radius(&self) -> f64 {
        w_radius(self.epsilon)
    }
}

impl Default for DomainParams {
    fn default() -> Self {
        DomainParams {
            epsilon: DEFAULT_EPSILON,
            lambda: 1.0,
        }
    }
}

/// `1 / (4 (1 + eps)^3)`.
pub fn w_radius(epsilon: f64) -> f64 {
    0.25 / (1.0 + epsilon).powi(3)
}

/// A point `(z, w)` of `C^2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub z: Complex64,
    pub w: Complex64,
}

impl Point2 {
    pub fn new(z: Complex64, w: Complex64) -> Self {
        Point2 { z, w }
    }

    pub fn real(z: f64, w: f64) -> Self {
        Point2::new(Complex64::new(z, 0.0), Complex64::new(w, 0.0))
    }

    pub fn dist(&self, other: &Point2) -> f64 {
        ((self.z - other.z).norm_sqr() + (self.w - other.w).norm_sqr()).sqrt()
    }
}

/// A point `(z, w, zt, wt)` of the cotangent bundle `T* C^2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CotangentPoint {
    pub z: Complex64,
    pub w: Complex64,
    pub zt: Complex64,
    pub wt: Complex64,
}

impl CotangentPoint {
    pub fn base(&self) -> Point2 {
        Point2::new(self.z, self.w)
    }
}

/// `Re(u)` computed as `(u + conj(u)) / 2`.
#[inline]
pub(crate) fn re_part(u: Complex64) -> f64 {
    ((u + u.conj()) * 0.5).re
}

pub fn rho(params: &DomainParams, p: &Point2) -> f64 {
    let mixed = p.z.conj().powu(4) * p.w * p.w;
    (p.z.norm_sqr() - 1.0) + (p.w.norm_sqr() - params.lambda * re_part(mixed))
}

/// `(d rho / dz, d rho / dw) = (conj(z) - 2 lambda z^3 conj(w)^2, conj(w) - lambda conj(z)^4 w)`.
pub fn rho_gradient(params: &DomainParams, p: &Point2) -> (Complex64, Complex64) {
    let lam = params.lambda;
    let (z, w) = (p.z, p.w);
    let dz = z.conj() - z.powu(3) * w.conj() * w.conj() * (2.0 * lam);
    let dw = w.conj() - z.conj().powu(4) * w * lam;
    (dz, dw)
}

/// Levi form `|Z|^2 + |W|^2 - 8 lambda Re(conj(z)^3 w conj(Z) W)`.
pub fn levi_form(params: &DomainParams, p: &Point2, v: (Complex64, Complex64)) -> f64 {
    let (zz, ww) = v;
    let cross = p.z.conj().powu(3) * p.w * zz.conj() * ww;
    zz.norm_sqr() + ww.norm_sqr() - 8.0 * params.lambda * re_part(cross)
}

/// The same Levi form written as a sum of squares,
/// `|Z - 4 lambda conj(z)^3 w W|^2 + (1 - 16 lambda^2 |z|^6 |w|^2) |W|^2`.
pub fn levi_form_sum_of_squares(
    params: &DomainParams,
    p: &Point2,
    v: (Complex64, Complex64),
) -> f64 {
    let lam = params.lambda;
    let (zz, ww) = v;
    let shifted = zz - p.z.conj().powu(3) * p.w * ww * (4.0 * lam);
    let weight = 1.0 - 16.0 * lam * lam * p.z.norm_sqr().powi(3) * p.w.norm_sqr();
    shifted.norm_sqr() + weight * ww.norm_sqr()
}

pub fn in_box(params: &DomainParams, p: &Point2) -> bool {
    p.z.norm() < params.z_radius() && p.w.norm() < params.w_radius()
}

pub fn in_domain(params: &DomainParams, p: &Point2) -> bool {
    rho(params, p) < 0.0 && in_box(params, p)
}

/// Infimum over the closed polydisc of `1 - 16 lambda^2 |z|^6 |w|^2`, the
/// weight of `|W|^2` in the sum-of-squares Levi form.
///
/// The expression is monotone in `|z|` and `|w|`, so the infimum sits at the
/// outer corner. At `lambda = 1` it is `0`, which is only approached on the
/// open polydisc.
pub fn psh_margin(params: &DomainParams) -> f64 {
    let corner = [
        (0.0, 0.0),
        (params.z_radius(), 0.0),
        (0.0, params.w_radius()),
        (params.z_radius(), params.w_radius()),
    ];
    let lam = params.lambda;
    corner
        .iter()
        .map(|&(rz, rw): &(f64, f64)| 1.0 - 16.0 * lam * lam * rz.powi(6) * rw * rw)
        .fold(f64::INFINITY, f64::min)
}

/// Witness for the inclusion `Omega in Delta x C`: returns `false` only if `p`
/// lies in the polydisc with `|z| >= 1` and still has `rho(p) < 0`.
pub fn cylinder_inclusion_witness(params: &DomainParams, p: &Point2) -> bool {
    let boxed = p.z.norm() <= params.z_radius() && p.w.norm() <= params.w_radius();
    if !boxed || p.z.norm() < 1.0 {
        return true;
    }
    rho(params, p) >= -SIGN_SLACK
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn lam(l: f64) -> DomainParams {
        DomainParams::with_lambda(l).unwrap()
    }

    #[test]
    fn rho_examples() {
        let p = lam(1.0);
        assert_eq!(rho(&p, &Point2::real(0.0, 0.0)), -1.0);
        assert_eq!(rho(&p, &Point2::real(1.0, 0.0)), 0.0);
        assert!((rho(&p, &Point2::real(0.0, 0.1)) + 0.99).abs() < 1e-15);
    }

    #[test]
    fn params_validation() {
        assert!(DomainParams::new(0.0, 1.0).is_err());
        assert!(DomainParams::new(0.02, 1.0).is_err());
        assert!(DomainParams::new(0.01, -0.1).is_err());
        assert!(DomainParams::new(0.005, 1.7).is_ok());
    }

    #[test]
    fn gradient_examples() {
        let p = lam(0.7);
        let zeta = Complex64::from_polar(1.0, 0.3);
        let (dz, dw) = rho_gradient(&p, &Point2::new(zeta, c(0.0, 0.0)));
        assert!((dz - zeta.conj()).norm() < 1e-15);
        assert_eq!(dw, c(0.0, 0.0));

        let (dz, dw) = rho_gradient(&lam(1.0), &Point2::real(0.0, 0.0));
        assert_eq!((dz, dw), (c(0.0, 0.0), c(0.0, 0.0)));

        // z = 0.5, w = 0.1: dz = 0.5 - 2 * 0.125 * 0.01, dw = 0.1 - 0.0625 * 0.1
        let (dz, dw) = rho_gradient(&lam(1.0), &Point2::real(0.5, 0.1));
        assert!((dz - c(0.4975, 0.0)).norm() < 1e-15);
        assert!((dw - c(0.09375, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn levi_examples() {
        let p = lam(1.0);
        let v = (c(0.3, -0.4), c(1.2, 0.5));
        let expect = v.0.norm_sqr() + v.1.norm_sqr();
        assert!((levi_form(&p, &Point2::real(0.0, 0.0), v) - expect).abs() < 1e-15);
        let on_axis = Point2::new(c(0.6, 0.7), c(0.0, 0.0));
        assert!((levi_form(&p, &on_axis, v) - expect).abs() < 1e-15);
        let val = levi_form(&p, &Point2::real(0.9, 0.2), (c(1.0, 0.0), c(1.0, 0.0)));
        assert!((val - 0.8336).abs() < 1e-14);
    }

    #[test]
    fn levi_matches_second_differences() {
        // d^2/ds dsbar of rho(p + s v) at s = 0 equals the Levi form; with
        // s = x + iy this is (rho_xx + rho_yy) / 4.
        let params = lam(1.0);
        let p = Point2::real(0.9, 0.2);
        let v = (c(1.0, 0.0), c(1.0, 0.0));
        let h = 1e-4;
        let at = |s: Complex64| rho(&params, &Point2::new(p.z + s * v.0, p.w + s * v.1));
        let f0 = at(c(0.0, 0.0));
        let lap = (at(c(h, 0.0)) + at(c(-h, 0.0)) + at(c(0.0, h)) + at(c(0.0, -h)) - 4.0 * f0)
            / (h * h);
        assert!((lap / 4.0 - 0.8336).abs() < 1e-6);
    }

    #[test]
    fn psh_margin_examples() {
        assert!(psh_margin(&lam(1.0)).abs() < 1e-14);
        assert_eq!(psh_margin(&lam(0.0)), 1.0);
        assert!((psh_margin(&lam(0.5)) - 0.75).abs() < 1e-14);
        assert!(psh_margin(&lam(1.5)) < 0.0);
    }

    #[test]
    fn in_domain_examples() {
        let p = lam(1.0);
        assert!(in_domain(&p, &Point2::real(0.0, 0.0)));
        assert!(!in_domain(&p, &Point2::real(1.0, 0.0)));
        assert!(in_domain(&p, &Point2::real(0.99, 0.0)));
        assert!(!in_domain(&p, &Point2::real(0.0, 0.3)));
    }

    #[test]
    fn inclusion_witness_examples() {
        let p = lam(1.0);
        assert!(cylinder_inclusion_witness(&p, &Point2::real(1.0, 0.05)));
        assert!(rho(&p, &Point2::real(1.0, 0.05)) >= 0.0);
        assert!(cylinder_inclusion_witness(&p, &Point2::real(0.5, 0.0)));
    }

    fn random_box_point(rng: &mut ChaCha8Rng, p: &DomainParams) -> Point2 {
        let rz = p.z_radius() * rng.random::<f64>().sqrt();
        let rw = p.w_radius() * rng.random::<f64>().sqrt();
        let tz = rng.random::<f64>() * core::f64::consts::TAU;
        let tw = rng.random::<f64>() * core::f64::consts::TAU;
        Point2::new(Complex64::from_polar(rz, tz), Complex64::from_polar(rw, tw))
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = 1e-5;
        for l in [0.0, 0.5, 1.0, 1.3] {
            let params = lam(l);
            for _ in 0..2500 {
                let p = random_box_point(&mut rng, &params);
                let f = |dz: Complex64, dw: Complex64| {
                    rho(&params, &Point2::new(p.z + dz, p.w + dw))
                };
                let zero = c(0.0, 0.0);
                // Wirtinger: d/dz = (d/dx - i d/dy) / 2
                let dzx = (f(c(h, 0.0), zero) - f(c(-h, 0.0), zero)) / (2.0 * h);
                let dzy = (f(c(0.0, h), zero) - f(c(0.0, -h), zero)) / (2.0 * h);
                let dwx = (f(zero, c(h, 0.0)) - f(zero, c(-h, 0.0))) / (2.0 * h);
                let dwy = (f(zero, c(0.0, h)) - f(zero, c(0.0, -h))) / (2.0 * h);
                let fd = (c(dzx, -dzy) * 0.5, c(dwx, -dwy) * 0.5);
                let (gz, gw) = rho_gradient(&params, &p);
                let err = ((fd.0 - gz).norm_sqr() + (fd.1 - gw).norm_sqr()).sqrt();
                let scale = (gz.norm_sqr() + gw.norm_sqr()).sqrt();
                assert!(err / scale < 1e-6, "relative error {} at {:?}", err / scale, p);
            }
        }
    }

    #[test]
    fn levi_forms_agree_and_are_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for l in [0.0, 0.4, 1.0] {
            let params = lam(l);
            for _ in 0..2000 {
                let p = random_box_point(&mut rng, &params);
                let v = (
                    Complex64::from_polar(rng.random::<f64>(), rng.random::<f64>() * 6.3),
                    Complex64::from_polar(rng.random::<f64>(), rng.random::<f64>() * 6.3),
                );
                let n = (v.0.norm_sqr() + v.1.norm_sqr()).sqrt();
                let v = (v.0 / n, v.1 / n);
                let a = levi_form(&params, &p, v);
                let b = levi_form_sum_of_squares(&params, &p, v);
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
                assert!(a > 0.0);
            }
        }
    }

    #[test]
    fn no_box_point_outside_unit_cylinder_is_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let params = lam(1.0);
        let mut hits = 0;
        for _ in 0..200_000 {
            let rz = 1.0 + params.epsilon() * rng.random::<f64>();
            let p = Point2::new(
                Complex64::from_polar(rz, rng.random::<f64>() * core::f64::consts::TAU),
                Complex64::from_polar(
                    params.w_radius() * rng.random::<f64>(),
                    rng.random::<f64>() * core::f64::consts::TAU,
                ),
            );
            assert!(cylinder_inclusion_witness(&params, &p));
            assert!(!in_domain(&params, &p));
            hits += 1;
        }
        assert_eq!(hits, 200_000);
    }
}
