//! Collocation Gauss-Newton solver for stationary lifts near the axis lift,
//! tangent-space dimension of the solution set, and lambda sweeps.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::discs::{boundary_residual, disc_leminside, leminside_unchecked, LeminsideParams};
use crate::domain::DomainParams;
use crate::error::{Error, Result};
use crate::fourier::roots_of_unity;
use crate::linalg::{numerical_rank, padded_spectrum, trailing_right_singular_vectors};
use crate::rhfactor::{build_symbol_a, partial_indices, Side, DEFAULT_RANK_TOL, DEFAULT_TRUNCATION};
use crate::stationary::{conormal_samples, conormal_terms, stationarity_test, Dual, LiftedDisc, DENOMINATOR_MIN};

pub const DEFAULT_DEGREE: usize = 12;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 50;
pub const DEFAULT_GAP_TOL: f64 = 1e3;
/// Number of pinning functionals, the expected manifold dimension.
pub const PIN_COUNT: usize = 8;

const KERNEL_TOL: f64 = 1e-8;
const RANK_DEFICIENT_TOL: f64 = 1e-10;
const MAX_HALVINGS: usize = 30;
const INITIAL_RADIUS: f64 = 0.1;
const TAIL_LEN: usize = 12;

/// Default collocation count `4(N+1) + 16`.
pub fn default_collocation(degree: usize) -> usize {
    4 * (degree + 1) + 16
}

/// Unknown vector: real and imaginary parts of the Taylor coefficients,
/// ordered by component, then degree.
pub fn lift_to_vector(lift: &LiftedDisc, degree: usize) -> DVector<f64> {
    let padded = lift.padded(degree);
    let mut x = DVector::zeros(8 * (degree + 1));
    for comp in 0..4 {
        for (deg, c) in padded.coeffs().iter().enumerate().take(degree + 1) {
            let at = 2 * (comp * (degree + 1) + deg);
            x[at] = c[comp].re;
            x[at + 1] = c[comp].im;
        }
    }
    x
}

pub fn vector_to_lift(x: &DVector<f64>, degree: usize) -> Result<LiftedDisc> {
    if x.len() != 8 * (degree + 1) {
        return Err(Error::invalid("x", "length must be 8(N+1)"));
    }
    let coeffs = (0..=degree)
        .map(|deg| {
            core::array::from_fn(|comp| {
                let at = 2 * (comp * (degree + 1) + deg);
                Complex64::new(x[at], x[at + 1])
            })
        })
        .collect();
    LiftedDisc::from_coeffs(coeffs)
}

/// `rho_1 .. rho_4` at the `m` collocation roots of unity, point-major.
pub fn residual_system(params: &DomainParams, lift: &LiftedDisc, m: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::invalid("m", "need at least one collocation point"));
    }
    Ok(conormal_samples(params, lift, m)?.into_iter().flatten().collect())
}

/// Jacobian of [`residual_system`] with respect to [`lift_to_vector`] of
/// the lift padded to `degree`, by forward-mode differentiation.
pub fn residual_jacobian(params: &DomainParams, lift: &LiftedDisc, degree: usize, m: usize) -> Result<DMatrix<f64>> {
    let n1 = degree + 1;
    let lift = lift.padded(degree);
    let mut jac = DMatrix::zeros(4 * m, 8 * n1);
    let zero = Complex64::new(0.0, 0.0);
    for (j, zeta) in roots_of_unity(m).into_iter().enumerate() {
        let p = lift.eval(zeta);
        let base = [p.z, p.w, p.zt, p.wt];
        let denom = p.z.conj() - p.z.powu(3) * p.w.conj().powu(2) * (2.0 * params.lambda());
        if denom.norm() < DENOMINATOR_MIN {
            return Err(Error::SmallDenominator { index: j, modulus: denom.norm() });
        }
        let powers: Vec<Complex64> = (0..n1).map(|d| zeta.powu(d as u32)).collect();
        for comp in 0..4 {
            // derivatives along a unit real and a unit imaginary change of the value
            let along = |dir: Complex64| -> [f64; 4] {
                let duals: [Dual; 4] = core::array::from_fn(|i| Dual {
                    v: base[i],
                    d: if i == comp { dir } else { zero },
                });
                conormal_terms(params.lambda(), zeta, duals).map(|t| t.d.re)
            };
            let alpha = along(Complex64::new(1.0, 0.0));
            let beta = along(Complex64::new(0.0, 1.0));
            for (deg, pw) in powers.iter().enumerate() {
                let col = 2 * (comp * n1 + deg);
                for k in 0..4 {
                    jac[(4 * j + k, col)] = alpha[k] * pw.re + beta[k] * pw.im;
                    jac[(4 * j + k, col + 1)] = -alpha[k] * pw.im + beta[k] * pw.re;
                }
            }
        }
    }
    Ok(jac)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, &b| a.max(b.abs()))
}

/// Numerical kernel of a Jacobian.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentReport {
    pub dimension: usize,
    /// Smallest kept singular value over the largest discarded one.
    pub gap: f64,
    /// The smallest singular values, ascending.
    pub tail: Vec<f64>,
}

fn kernel_report(jac: &DMatrix<f64>) -> TangentReport {
    let s = padded_spectrum(jac);
    let top = s.first().copied().unwrap_or(0.0);
    let dimension = s.iter().filter(|&&x| x <= KERNEL_TOL * top).count();
    let kept = s.len() - dimension;
    let gap = if dimension == 0 {
        f64::INFINITY
    } else if kept == 0 {
        0.0
    } else if s[kept] == 0.0 {
        f64::INFINITY
    } else {
        s[kept - 1] / s[kept]
    };
    let tail = s.iter().rev().take(TAIL_LEN).copied().collect();
    TangentReport { dimension, gap, tail }
}

/// Kernel dimension of the unpinned Jacobian at a solution, requiring a
/// spectral gap of at least `gap_tol` around the cut.
pub fn tangent_dimension(
    params: &DomainParams,
    lift: &LiftedDisc,
    degree: usize,
    m: usize,
    gap_tol: f64,
) -> Result<TangentReport> {
    if lift.degree() > degree {
        return Err(Error::invalid("degree", "lift has higher degree than the truncation"));
    }
    if m < 2 * (degree + 1) {
        return Err(Error::invalid("m", "need 4M >= 8(N+1) equations"));
    }
    let residual = max_abs(&residual_system(params, lift, m)?);
    if !(residual < 1e-10) {
        return Err(Error::NotAttached { residual });
    }
    let report = kernel_report(&residual_jacobian(params, lift, degree, m)?);
    if report.gap < gap_tol {
        return Err(Error::NoSpectralGap { ratio: report.gap, tail: report.tail });
    }
    Ok(report)
}

/// Outcome of [`solve_near`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solution: LiftedDisc,
    /// `max_j max_k |rho_k(omega_j)|` over the collocation points.
    pub residual: f64,
    pub iterations: usize,
    pub tangent_dim: usize,
    pub jacobian_gap: f64,
    pub pinned: [f64; PIN_COUNT],
}

/// Orthonormal basis of the numerical kernel of the Jacobian at the axis lift.
pub fn pin_basis(params: &DomainParams, degree: usize, m: usize) -> Result<DMatrix<f64>> {
    let jac = residual_jacobian(params, &LiftedDisc::axis(), degree, m)?;
    Ok(trailing_right_singular_vectors(&jac, PIN_COUNT))
}

/// Gauss-Newton with step halving on the collocation system together with
/// the eight affine pins `<x - x0, e_j> = pins_j`, where `x0` is the axis
/// lift and `e_j` span the kernel of its Jacobian.
pub fn solve_near(
    params: &DomainParams,
    initial: &LiftedDisc,
    pins: &[f64; PIN_COUNT],
    degree: usize,
    m: usize,
    tol: f64,
) -> Result<SolveReport> {
    if m < 4 * (degree + 1) + 8 {
        return Err(Error::invalid("m", "need M >= 4(N+1) + 8"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be positive"));
    }
    if pins.iter().any(|p| !p.is_finite()) {
        return Err(Error::invalid("pins", "must be finite"));
    }
    if initial.degree() > degree {
        return Err(Error::invalid("initial", "degree exceeds N"));
    }
    let axis = LiftedDisc::axis();
    if initial.coeff_distance(&axis) > INITIAL_RADIUS {
        return Err(Error::invalid("initial", "must lie within 0.1 of the axis lift"));
    }
    let x0 = lift_to_vector(&axis, degree);
    let basis = pin_basis(params, degree, m)?;
    let basis_t = basis.transpose();
    let pin_target = DVector::from_row_slice(pins);

    // stacked residual, or None outside the chart
    let eval = |x: &DVector<f64>| -> Option<(DVector<f64>, f64)> {
        let lift = vector_to_lift(x, degree).ok()?;
        let r = residual_system(params, &lift, m).ok()?;
        let p = &basis_t * (x - &x0) - &pin_target;
        let worst = max_abs(&r).max(max_abs(p.as_slice()));
        let mut f = DVector::zeros(r.len() + PIN_COUNT);
        f.rows_mut(0, r.len()).copy_from_slice(&r);
        f.rows_mut(r.len(), PIN_COUNT).copy_from(&p);
        Some((f, worst))
    };

    let mut x = lift_to_vector(initial, degree);
    let (mut f, mut worst) = eval(&x).ok_or(Error::SmallDenominator { index: 0, modulus: 0.0 })?;
    let mut iterations = 0;
    while worst >= tol {
        if iterations == MAX_ITERATIONS {
            return Err(Error::Diverged { iterations, residual: worst });
        }
        iterations += 1;
        let lift = vector_to_lift(&x, degree)?;
        let jac = residual_jacobian(params, &lift, degree, m)?;
        let mut stacked = DMatrix::zeros(jac.nrows() + PIN_COUNT, jac.ncols());
        stacked.rows_mut(0, jac.nrows()).copy_from(&jac);
        stacked.rows_mut(jac.nrows(), PIN_COUNT).copy_from(&basis_t);
        let svd = stacked.svd(true, true);
        let top = svd.singular_values.max();
        let bottom = svd.singular_values.min();
        if bottom <= RANK_DEFICIENT_TOL * top {
            return Err(Error::RankDeficient { sigma_min: bottom / top });
        }
        let step = svd.solve(&(-&f), 0.0).expect("U and V^T were computed");
        let norm = f.norm();
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial = &x + &step * alpha;
            if let Some((ft, wt)) = eval(&trial) {
                if ft.norm() < norm {
                    accepted = Some((trial, ft, wt));
                    break;
                }
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((xn, fnew, wnew)) => {
                x = xn;
                f = fnew;
                worst = wnew;
            }
            None => return Err(Error::Diverged { iterations, residual: worst }),
        }
    }

    let solution = vector_to_lift(&x, degree)?;
    let residual = max_abs(&residual_system(params, &solution, m)?);
    let kernel = kernel_report(&residual_jacobian(params, &solution, degree, m)?);
    let pinned_vec = &basis_t * (&x - &x0);
    let mut pinned = [0.0; PIN_COUNT];
    pinned.copy_from_slice(pinned_vec.as_slice());
    Ok(SolveReport {
        solution,
        residual,
        iterations,
        tangent_dim: kernel.dimension,
        jacobian_gap: kernel.gap,
        pinned,
    })
}

/// One row of [`lambda_sweep`]; failures are kept inline.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub tangent_dim: Option<usize>,
    pub jacobian_gap: Option<f64>,
    pub min_partial_index: Option<i64>,
    /// Collocation residual of the axis lift.
    pub residual: Option<f64>,
    pub errors: Vec<String>,
}

/// Diagnostics at one `lambda`: tangent dimension at the axis lift and the
/// smallest partial index of the linearized problem.
pub fn sweep_point(epsilon: f64, lambda: f64, degree: usize, m: usize) -> SweepRow {
    let mut row = SweepRow {
        lambda,
        tangent_dim: None,
        jacobian_gap: None,
        min_partial_index: None,
        residual: None,
        errors: Vec::new(),
    };
    let params = match DomainParams::new(epsilon, lambda) {
        Ok(p) => p,
        Err(e) => {
            row.errors.push(format!("{e}"));
            return row;
        }
    };
    let axis = LiftedDisc::axis();
    match residual_system(&params, &axis, m) {
        Ok(r) => row.residual = Some(max_abs(&r)),
        Err(e) => row.errors.push(format!("{e}")),
    }
    match tangent_dimension(&params, &axis, degree, m, DEFAULT_GAP_TOL) {
        Ok(t) => {
            row.tangent_dim = Some(t.dimension);
            row.jacobian_gap = Some(t.gap);
        }
        Err(e) => row.errors.push(format!("tangent dimension: {e}")),
    }
    match partial_indices(&build_symbol_a(lambda), DEFAULT_TRUNCATION, DEFAULT_RANK_TOL, Side::Left) {
        Ok(r) => row.min_partial_index = Some(r.min_index()),
        Err(e) => row.errors.push(format!("partial indices: {e}")),
    }
    row
}

/// [`sweep_point`] for each `lambda`, in input order.
pub fn lambda_sweep(params: &DomainParams, lambdas: &[f64], degree: usize, m: usize) -> Vec<SweepRow> {
    lambdas
        .iter()
        .map(|&l| sweep_point(params.epsilon(), l, degree, m))
        .collect()
}

/// Result of [`geodesic_family_is_stationary`].
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyReport {
    pub samples: usize,
    pub all_stationary: bool,
    /// Rank of the coefficient Jacobian along the four parameter directions.
    pub rank: usize,
    pub max_attachment_residual: f64,
    pub max_multiplier_residual: f64,
    /// Parameters whose disc failed the test, with the reason.
    pub failures: Vec<(LeminsideParams, String)>,
}

impl FamilyReport {
    pub fn passed(&self) -> bool {
        self.all_stationary && self.rank == 4 && self.failures.is_empty()
    }
}

const FAMILY_STEP: [f64; 4] = [0.5, 0.004, 0.004, 0.008];
const FAMILY_FD_STEP: f64 = 1e-6;
const FAMILY_ATTACHED_TOL: f64 = 1e-12;

fn family_params(direction: usize, t: f64) -> LeminsideParams {
    let mut v = [0.0; 4];
    v[direction] = t * FAMILY_STEP[direction];
    LeminsideParams::new(v[0], Complex64::new(v[1], v[2]), v[3])
}

fn coefficient_vector(p: &LeminsideParams) -> DVector<f64> {
    let disc = leminside_unchecked(p);
    DVector::from_iterator(
        4 * disc.coeffs().len(),
        disc.coeffs().iter().flat_map(|c| [c[0].re, c[0].im, c[1].re, c[1].im]),
    )
}

/// Runs the Fourier stationarity test on the axis disc and on
/// `n_samples` discs along each of the directions `theta`, `Re a1`,
/// `Im a1`, `a2`, and measures the rank of the family at the axis.
pub fn geodesic_family_is_stationary(params: &DomainParams, n_samples: usize) -> Result<FamilyReport> {
    if params.lambda() != 1.0 {
        return Err(Error::invalid("lambda", "the leminside family is stationary only for lambda = 1"));
    }
    let mut samples = vec![LeminsideParams::new(0.0, Complex64::new(0.0, 0.0), 0.0)];
    for dir in 0..4 {
        for i in 1..=n_samples {
            samples.push(family_params(dir, i as f64 / n_samples as f64));
        }
    }
    let mut report = FamilyReport {
        samples: samples.len(),
        all_stationary: true,
        rank: 0,
        max_attachment_residual: 0.0,
        max_multiplier_residual: 0.0,
        failures: Vec::new(),
    };
    for p in &samples {
        let disc = disc_leminside(params.epsilon(), p)?;
        let attached = boundary_residual(params, &disc, 64)?;
        report.max_attachment_residual = report.max_attachment_residual.max(attached);
        if !(attached < FAMILY_ATTACHED_TOL) {
            report.all_stationary = false;
            report.failures.push((*p, format!("boundary residual {attached:e}")));
            continue;
        }
        match stationarity_test(params, &disc) {
            Ok(out) => {
                report.max_multiplier_residual = report.max_multiplier_residual.max(out.residual);
                if !out.is_stationary {
                    report.all_stationary = false;
                    report.failures.push((*p, format!("multiplier residual {:e}", out.residual)));
                }
            }
            Err(e) => {
                report.all_stationary = false;
                report.failures.push((*p, format!("{e}")));
            }
        }
    }
    let h = FAMILY_FD_STEP;
    let mut jac = DMatrix::zeros(coefficient_vector(&samples[0]).len(), 4);
    for (dir, &step) in FAMILY_STEP.iter().enumerate() {
        let plus = coefficient_vector(&family_params(dir, h / step));
        let minus = coefficient_vector(&family_params(dir, -h / step));
        jac.set_column(dir, &((plus - minus) / (2.0 * h)));
    }
    report.rank = numerical_rank(&jac, 1e-6);
    Ok(report)
}
