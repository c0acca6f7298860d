//! Poincaré metric and distance on the unit disc, the two-sided bounds that
//! pin down Kobayashi distances from the origin in `Omega`, and a search
//! for infinitesimal extremal discs.

use alloc::vec::Vec;
use core::f64::consts::TAU;
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::discs::{boundary_residual, AnalyticDisc, ATTACHED_TOL};
use crate::domain::{self, in_domain, DomainParams, Point2};
use crate::error::{Error, Result};
use crate::fourier::roots_of_unity;

/// Feasibility margin: accepted discs satisfy `rho(f(omega_j)) <= -DELTA_MARGIN`.
pub const DELTA_MARGIN: f64 = 1e-6;

const MIN_REPORTED_MU: f64 = 0.9;
const BISECTION_STEPS: usize = 48;
const MU_CEILING: f64 = 2.0;

fn check_in_unit_disc(zeta: Complex64) -> Result<()> {
    let r = zeta.norm();
    if r < 1.0 {
        Ok(())
    } else {
        Err(Error::OutsideUnitDisc { modulus: r })
    }
}

/// `artanh |(zeta - zeta2) / (1 - conj(zeta2) zeta)|`.
pub fn poincare_distance(zeta: Complex64, zeta2: Complex64) -> Result<f64> {
    check_in_unit_disc(zeta)?;
    check_in_unit_disc(zeta2)?;
    let ratio = ((zeta - zeta2) / (Complex64::new(1.0, 0.0) - zeta2.conj() * zeta)).norm();
    Ok(ratio.min(1.0).atanh())
}

/// `|v| / (1 - |zeta|^2)`.
pub fn poincare_metric(zeta: Complex64, v: Complex64) -> Result<f64> {
    check_in_unit_disc(zeta)?;
    Ok(v.norm() / (1.0 - zeta.norm_sqr()))
}

/// Kobayashi distance in `Omega = Omega_1` from `(0, 0)` to `(z0, z1)` when
/// `|z1| < |z0|^2 / (4 (1 + eps)^3)`: a geodesic through both points exists
/// and projects to a rotation, so the distance is `artanh |z0|`.
pub fn distance_from_origin(params: &DomainParams, z0: Complex64, z1: Complex64) -> Result<f64> {
    if params.lambda() != 1.0 {
        return Err(Error::invalid("lambda", "closed form only holds for lambda = 1"));
    }
    let x0 = z0.norm();
    if !(x0 > 0.0 && x0 < 1.0) {
        return Err(Error::invalid("z0", "need 0 < |z0| < 1"));
    }
    if !(z1.norm() < x0 * x0 * params.w_radius()) {
        return Err(Error::invalid("z1", "need |z1| < |z0|^2 / (4(1+eps)^3)"));
    }
    Ok(x0.atanh())
}

/// Lower bound `d_Omega(p, q) >= d_Delta(z_p, z_q)` from the retraction onto
/// the first coordinate.
pub fn bound_via_projection(params: &DomainParams, p: &Point2, q: &Point2) -> Result<f64> {
    if !in_domain(params, p) || !in_domain(params, q) {
        return Err(Error::OutsideDomain);
    }
    poincare_distance(p.z, q.z)
}

const GRID_RADII: usize = 16;
const GRID_ANGLES: usize = 64;

/// Checks that `disc` maps the closed disc into the closure of the domain:
/// interior grid points land in the domain, boundary samples have
/// `rho <= ATTACHED_TOL` and stay in the closed polydisc.
pub fn disc_stays_in_domain(params: &DomainParams, disc: &AnalyticDisc) -> Result<()> {
    let mut index = 0;
    for i in 1..GRID_RADII {
        let r = i as f64 / GRID_RADII as f64;
        for j in 0..GRID_ANGLES {
            let zeta = Complex64::from_polar(r, TAU * j as f64 / GRID_ANGLES as f64);
            if !in_domain(params, &disc.eval_unchecked(zeta)) {
                return Err(Error::DiscExitsDomain { index });
            }
            index += 1;
        }
    }
    let m = GRID_ANGLES.max(4 * disc.degree() + 1);
    for zeta in roots_of_unity(m) {
        let p = disc.eval_unchecked(zeta);
        let boxed = p.z.norm() <= params.z_radius() && p.w.norm() <= params.w_radius();
        if !boxed || domain::rho(params, &p) > ATTACHED_TOL {
            return Err(Error::DiscExitsDomain { index });
        }
        index += 1;
    }
    Ok(())
}

/// Upper bound `d_Omega(f(zeta), f(zeta2)) <= d_Delta(zeta, zeta2)` for a disc
/// `f` with values in the domain.
pub fn bound_via_disc(
    params: &DomainParams,
    disc: &AnalyticDisc,
    zeta: Complex64,
    zeta2: Complex64,
) -> Result<f64> {
    check_in_unit_disc(zeta)?;
    check_in_unit_disc(zeta2)?;
    disc_stays_in_domain(params, disc)?;
    poincare_distance(zeta, zeta2)
}

/// Outcome of [`extremal_search`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalReport {
    pub mu_best: f64,
    pub disc: AnalyticDisc,
    /// `-max_j rho(f(omega_j))` for the returned disc.
    pub feasibility_margin: f64,
    pub evaluations: usize,
}

struct Feasibility<'a> {
    params: &'a DomainParams,
    roots: Vec<Complex64>,
    evaluations: usize,
}

impl Feasibility<'_> {
    /// Largest value of `rho` over the samples, `+inf` if a sample leaves the polydisc.
    fn worst(&mut self, disc: &AnalyticDisc) -> f64 {
        self.evaluations += 1;
        let z_lim = self.params.z_radius();
        let w_lim = self.params.w_radius();
        let mut worst = f64::NEG_INFINITY;
        for &zeta in &self.roots {
            let p = disc.eval_unchecked(zeta);
            if !(p.z.norm() < z_lim && p.w.norm() < w_lim) {
                return f64::INFINITY;
            }
            worst = worst.max(domain::rho(self.params, &p));
        }
        worst
    }

    fn feasible(&mut self, disc: &AnalyticDisc) -> bool {
        self.worst(disc) <= -DELTA_MARGIN
    }
}

/// Disc `mu * shape` where `shape = (zeta + sum p_k zeta^k, c z0 zeta + sum q_k zeta^k)`,
/// so `f(0) = 0` and `f'(0) = mu (1, c z0)`.
fn scaled_disc(direction: Complex64, shape: &[f64], mu: f64) -> AnalyticDisc {
    let zero = Complex64::new(0.0, 0.0);
    let higher = shape.len() / 4;
    let mut coeffs = Vec::with_capacity(higher + 2);
    coeffs.push([zero, zero]);
    coeffs.push([Complex64::new(mu, 0.0), direction * mu]);
    for k in 0..higher {
        let s = &shape[4 * k..4 * k + 4];
        coeffs.push([Complex64::new(s[0], s[1]) * mu, Complex64::new(s[2], s[3]) * mu]);
    }
    AnalyticDisc::from_coeffs(coeffs).expect("finite coefficients")
}

/// Maximizes `mu` over degree-`degree` discs with `f(0) = 0`,
/// `f'(0) = mu (1, c z0)` and `rho(f) <= -DELTA_MARGIN` on `8 * degree`
/// boundary samples (together with the polydisc bounds there).
///
/// For a fixed shape the largest feasible scale is found by bisection; the
/// shape is improved by a seeded (1+1) evolution strategy with a one-fifth
/// step-size rule. The budget counts feasibility evaluations.
pub fn extremal_search(
    params: &DomainParams,
    c: f64,
    z0: Complex64,
    degree: usize,
    budget: usize,
    seed: u64,
) -> Result<ExtremalReport> {
    let c_max = 1.0 / (16.0 * (1.0 + params.epsilon()).powi(3));
    if !(c >= 0.0 && c < c_max) {
        return Err(Error::invalid("c", "need 0 <= c < 1/(16(1+eps)^3)"));
    }
    let r0 = z0.norm();
    if !(r0 > 0.0 && r0 < 1.0) {
        return Err(Error::invalid("z0", "need 0 < |z0| < 1"));
    }
    if degree == 0 {
        return Err(Error::invalid("degree", "must be at least 1"));
    }
    let direction = z0 * c;
    let mut feas = Feasibility {
        params,
        roots: roots_of_unity(8 * degree),
        evaluations: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // largest feasible scale in [lo, MU_CEILING] for a shape feasible at lo
    let bisect = |feas: &mut Feasibility, shape: &[f64], lo: f64| -> f64 {
        let mut lo = lo;
        let mut hi = MU_CEILING;
        if feas.feasible(&scaled_disc(direction, shape, hi)) {
            return hi;
        }
        for _ in 0..BISECTION_STEPS {
            if feas.evaluations >= budget {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if feas.feasible(&scaled_disc(direction, shape, mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };

    let dim = 4 * (degree - 1);
    let mut shape = alloc::vec![0.0; dim];
    let mut mu_best = bisect(&mut feas, &shape, 0.0);
    let mut step = 0.05;
    while feas.evaluations < budget && dim > 0 && step > 1e-12 {
        let candidate: Vec<f64> = shape
            .iter()
            .map(|&s| s + step * gaussian(&mut rng))
            .collect();
        // a shape infeasible at the incumbent scale cannot improve on it
        let improved = if feas.feasible(&scaled_disc(direction, &candidate, mu_best)) {
            let mu = bisect(&mut feas, &candidate, mu_best);
            if mu > mu_best {
                mu_best = mu;
                shape = candidate;
                true
            } else {
                false
            }
        } else {
            false
        };
        step *= if improved { 1.5 } else { 0.9 };
    }

    if mu_best < MIN_REPORTED_MU {
        return Err(Error::BudgetExhausted {
            evaluations: feas.evaluations,
            best_mu: mu_best,
        });
    }
    let disc = scaled_disc(direction, &shape, mu_best);
    let margin = -feas.worst(&disc);
    Ok(ExtremalReport {
        mu_best,
        disc,
        feasibility_margin: margin,
        evaluations: feas.evaluations,
    })
}

/// Standard normal deviate by Box-Muller.
fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

/// `max_j |rho(f(omega_j))|`, re-exported for reports.
pub fn attachment_residual(params: &DomainParams, disc: &AnalyticDisc) -> Result<f64> {
    boundary_residual(params, disc, (4 * disc.degree() + 1).max(64))
}
