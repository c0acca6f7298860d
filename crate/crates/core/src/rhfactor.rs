//! Matrix symbols of the linearized Riemann-Hilbert problem along the axis
//! lift, Maslov index, partial indices from block-Toeplitz kernel
//! dimensions, and the dimension of the linear solution space.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;
use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fourier::roots_of_unity;
use crate::linalg::singular_values;

/// Largest admissible exponent magnitude of a symbol.
pub const MAX_EXPONENT: i64 = 8;
pub const DEFAULT_TRUNCATION: usize = 128;
pub const DEFAULT_RANK_TOL: f64 = 1e-8;
/// Shifts `k` at which Toeplitz kernel dimensions are sampled.
pub const SHIFT_RANGE: i64 = 6;
pub const WINDING_GRID: usize = 1 << 10;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// An `n x n` Laurent polynomial `sum_{e=lo}^{hi} A_e zeta^e` on the unit circle.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSymbol {
    n: usize,
    lo: i64,
    coeffs: Vec<DMatrix<Complex64>>,
}

impl MatrixSymbol {
    /// Symbol from its coefficient matrices `A_lo, .., A_hi`.
    pub fn new(lo: i64, coeffs: Vec<DMatrix<Complex64>>) -> Result<Self> {
        let n = match coeffs.first() {
            Some(m) if m.is_square() && m.nrows() > 0 => m.nrows(),
            _ => return Err(Error::invalid("coeffs", "need nonempty square coefficient matrices")),
        };
        if coeffs.iter().any(|m| m.nrows() != n || m.ncols() != n) {
            return Err(Error::invalid("coeffs", "coefficient matrices differ in size"));
        }
        if coeffs.iter().flat_map(|m| m.iter()).any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            return Err(Error::invalid("coeffs", "coefficients must be finite"));
        }
        let hi = lo + coeffs.len() as i64 - 1;
        if lo < -MAX_EXPONENT || hi > MAX_EXPONENT {
            return Err(Error::invalid("coeffs", "exponents must lie in [-8, 8]"));
        }
        Ok(MatrixSymbol { n, lo, coeffs }.trimmed())
    }

    /// Symbol from `(row, col, exponent, coefficient)` terms.
    pub fn from_terms(n: usize, terms: &[(usize, usize, i64, Complex64)]) -> Result<Self> {
        if n == 0 || terms.iter().any(|t| t.0 >= n || t.1 >= n) {
            return Err(Error::invalid("terms", "entry index out of range"));
        }
        let lo = terms.iter().map(|t| t.2).min().unwrap_or(0).min(0);
        let hi = terms.iter().map(|t| t.2).max().unwrap_or(0).max(0);
        if lo < -MAX_EXPONENT || hi > MAX_EXPONENT {
            return Err(Error::invalid("terms", "exponents must lie in [-8, 8]"));
        }
        let mut coeffs = vec![DMatrix::zeros(n, n); (hi - lo + 1) as usize];
        for &(i, j, e, v) in terms {
            coeffs[(e - lo) as usize][(i, j)] += v;
        }
        Self::new(lo, coeffs)
    }

    /// The constant symbol `m`.
    pub fn constant(m: DMatrix<Complex64>) -> Result<Self> {
        Self::new(0, vec![m])
    }

    fn trimmed(mut self) -> Self {
        let zero = |m: &DMatrix<Complex64>| m.iter().all(|x| *x == ZERO);
        while self.coeffs.len() > 1 && zero(self.coeffs.last().unwrap()) {
            self.coeffs.pop();
        }
        while self.coeffs.len() > 1 && zero(&self.coeffs[0]) {
            self.coeffs.remove(0);
            self.lo += 1;
        }
        self
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// `(lo, hi)`, the smallest and largest exponents carried.
    pub fn exponent_range(&self) -> (i64, i64) {
        (self.lo, self.lo + self.coeffs.len() as i64 - 1)
    }

    /// Coefficient matrix of `zeta^e` (zero outside the range).
    pub fn coefficient(&self, e: i64) -> DMatrix<Complex64> {
        let (lo, hi) = self.exponent_range();
        if e < lo || e > hi {
            DMatrix::zeros(self.n, self.n)
        } else {
            self.coeffs[(e - lo) as usize].clone()
        }
    }

    /// Coefficient of `zeta^e` in entry `(i, j)`.
    pub fn entry_coefficient(&self, i: usize, j: usize, e: i64) -> Complex64 {
        let (lo, hi) = self.exponent_range();
        if e < lo || e > hi {
            ZERO
        } else {
            self.coeffs[(e - lo) as usize][(i, j)]
        }
    }

    pub fn eval(&self, zeta: Complex64) -> DMatrix<Complex64> {
        let mut acc = DMatrix::zeros(self.n, self.n);
        let mut power = zeta.powi(self.lo as i32);
        for m in &self.coeffs {
            acc += m * power;
            power *= zeta;
        }
        acc
    }

    pub fn determinant(&self, zeta: Complex64) -> Complex64 {
        self.eval(zeta).determinant()
    }

    pub fn transpose(&self) -> Self {
        MatrixSymbol {
            n: self.n,
            lo: self.lo,
            coeffs: self.coeffs.iter().map(|m| m.transpose()).collect(),
        }
    }

    /// `zeta -> conj(A(zeta))` on the circle, where `conj(zeta) = 1/zeta`.
    pub fn conj_on_circle(&self) -> Self {
        let (_, hi) = self.exponent_range();
        MatrixSymbol {
            n: self.n,
            lo: -hi,
            coeffs: self.coeffs.iter().rev().map(|m| m.map(|x| x.conj())).collect(),
        }
    }

    /// Pointwise product `self * other`.
    pub fn mul(&self, other: &MatrixSymbol) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::invalid("other", "symbol sizes differ"));
        }
        let len = self.coeffs.len() + other.coeffs.len() - 1;
        let mut coeffs = vec![DMatrix::zeros(self.n, self.n); len];
        for (a, ma) in self.coeffs.iter().enumerate() {
            for (b, mb) in other.coeffs.iter().enumerate() {
                coeffs[a + b] += ma * mb;
            }
        }
        Self::new(self.lo + other.lo, coeffs)
    }

    /// `s * A`.
    pub fn scale(&self, s: Complex64) -> Self {
        MatrixSymbol {
            n: self.n,
            lo: self.lo,
            coeffs: self.coeffs.iter().map(|m| m * s).collect(),
        }
    }

    /// `P A Q` for constant matrices.
    pub fn conjugated(&self, p: &DMatrix<Complex64>, q: &DMatrix<Complex64>) -> Result<Self> {
        if p.shape() != (self.n, self.n) || q.shape() != (self.n, self.n) {
            return Err(Error::invalid("p", "constant factors must match the symbol size"));
        }
        Self::new(self.lo, self.coeffs.iter().map(|m| p * m * q).collect())
    }

    /// Rows reordered by `rows` (new row `i` is old row `rows[i]`), columns likewise.
    pub fn permuted(&self, rows: &[usize], cols: &[usize]) -> Result<Self> {
        let is_perm = |p: &[usize]| {
            let mut seen = vec![false; self.n];
            p.len() == self.n && p.iter().all(|&i| i < self.n && !core::mem::replace(&mut seen[i], true))
        };
        if !is_perm(rows) || !is_perm(cols) {
            return Err(Error::invalid("rows", "not a permutation"));
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|m| DMatrix::from_fn(self.n, self.n, |i, j| m[(rows[i], cols[j])]))
            .collect();
        Ok(MatrixSymbol { n: self.n, lo: self.lo, coeffs })
    }

    fn is_real(&self) -> bool {
        self.coeffs.iter().flat_map(|m| m.iter()).all(|x| x.im == 0.0)
    }

    fn nonzero(&self, i: usize, j: usize) -> bool {
        self.coeffs.iter().any(|m| m[(i, j)] != ZERO)
    }
}

/// The matrix of `d/d(conj)` derivatives of the conormal defining functions
/// along the axis lift, columns ordered `(z, w, zt, wt)`.
pub fn build_g(lambda: f64) -> MatrixSymbol {
    MatrixSymbol::from_terms(
        4,
        &[
            (0, 0, 1, ONE),
            (1, 0, 1, -I),
            (1, 2, 0, -I),
            (2, 1, 1, c(-1.0, 0.0)),
            (2, 1, 3, c(lambda, 0.0)),
            (2, 3, 0, ONE),
            (3, 1, 1, -I),
            (3, 1, 3, c(0.0, -lambda)),
            (3, 3, 0, -I),
        ],
    )
    .expect("static symbol")
}

/// `build_g` with the first two rows swapped and columns reordered to
/// `(zt, z, w, wt)`.
pub fn build_g1(lambda: f64) -> MatrixSymbol {
    MatrixSymbol::from_terms(
        4,
        &[
            (0, 0, 0, -I),
            (0, 1, 1, -I),
            (1, 1, 1, ONE),
            (2, 2, 1, c(-1.0, 0.0)),
            (2, 2, 3, c(lambda, 0.0)),
            (2, 3, 0, ONE),
            (3, 2, 1, -I),
            (3, 2, 3, c(0.0, -lambda)),
            (3, 3, 0, -I),
        ],
    )
    .expect("static symbol")
}

/// Closed form of `G1(zeta)^-1` on the circle.
pub fn build_g1_inverse(lambda: f64) -> MatrixSymbol {
    MatrixSymbol::from_terms(
        4,
        &[
            (0, 0, 0, I),
            (0, 1, 0, c(-1.0, 0.0)),
            (1, 1, -1, ONE),
            (2, 2, -1, c(-0.5, 0.0)),
            (2, 3, -1, c(0.0, 0.5)),
            (3, 2, 0, c(0.5, 0.0)),
            (3, 2, 2, c(0.5 * lambda, 0.0)),
            (3, 3, 0, c(0.0, 0.5)),
            (3, 3, 2, c(0.0, -0.5 * lambda)),
        ],
    )
    .expect("static symbol")
}

/// Closed form of `A = -conj(G1^-1) G1`:
/// rows `(1, 2z, 0, 0)`, `(0, -z^2, 0, 0)`, `(0, 0, l z^4, z)`, `(0, 0, z (1 - l^2), -l conj(z)^2)`.
pub fn build_symbol_a(lambda: f64) -> MatrixSymbol {
    MatrixSymbol::from_terms(
        4,
        &[
            (0, 0, 0, ONE),
            (0, 1, 1, c(2.0, 0.0)),
            (1, 1, 2, c(-1.0, 0.0)),
            (2, 2, 4, c(lambda, 0.0)),
            (2, 3, 1, ONE),
            (3, 2, 1, c(1.0 - lambda * lambda, 0.0)),
            (3, 3, -2, c(-lambda, 0.0)),
        ],
    )
    .expect("static symbol")
}

/// Largest entrywise gap over `points` roots of unity between the closed
/// form of `A` and `-conj(G1^-1(zeta)) G1(zeta)`, together with the largest
/// deviation of `G1^-1 G1` from the identity.
pub fn symbol_a_discrepancy(lambda: f64, points: usize) -> (f64, f64) {
    let (g1, inv, a) = (build_g1(lambda), build_g1_inverse(lambda), build_symbol_a(lambda));
    let mut product_gap = 0.0f64;
    let mut inverse_gap = 0.0f64;
    for zeta in roots_of_unity(points) {
        let g = g1.eval(zeta);
        let gi = inv.eval(zeta);
        let prod = -gi.map(|x| x.conj()) * &g;
        product_gap = product_gap.max((prod - a.eval(zeta)).iter().map(|x| x.norm()).fold(0.0, f64::max));
        let id = gi * g - DMatrix::<Complex64>::identity(4, 4);
        inverse_gap = inverse_gap.max(id.iter().map(|x| x.norm()).fold(0.0, f64::max));
    }
    (product_gap, inverse_gap)
}

/// Winding number of `det A` along the circle from argument increments on
/// a `2^10`-point grid.
pub fn maslov_index(symbol: &MatrixSymbol) -> Result<i64> {
    let dets: Vec<Complex64> = roots_of_unity(WINDING_GRID)
        .into_iter()
        .map(|z| symbol.determinant(z))
        .collect();
    let scale = dets.iter().map(|d| d.norm()).fold(0.0, f64::max);
    for (index, d) in dets.iter().enumerate() {
        if !(d.norm() > 1e-12 * scale) {
            return Err(Error::VanishingDeterminant { index, modulus: d.norm() });
        }
    }
    let total: f64 = (0..WINDING_GRID)
        .map(|j| (dets[(j + 1) % WINDING_GRID] / dets[j]).arg())
        .sum();
    let value = total / TAU;
    let rounded = Float::round(value);
    if (value - rounded).abs() >= 0.01 {
        return Err(Error::NonIntegerWinding { value });
    }
    Ok(rounded as i64)
}

/// Which factorization the partial indices refer to.
///
/// `Left`: `Theta A = Lambda conj(Theta)` with `Theta` holomorphic in the
/// disc, i.e. `A = A_+ Lambda A_-`. This is the form attached to the
/// problem `f = A conj(f)`. `Right`: `A = A_- Lambda A_+`, read off from
/// Toeplitz operators of `zeta^k A` itself; the two agree on `A^T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Side {
    #[default]
    Left,
    Right,
}

/// Partial indices together with the data they were derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexReport {
    /// `kappa_1 >= .. >= kappa_n`.
    pub partial_indices: Vec<i64>,
    pub maslov: i64,
    pub truncation: usize,
    pub rank_tolerance: f64,
    pub stable: bool,
    pub side: Side,
    /// `(k, dim ker T(zeta^k A))` for `k` in `[-6, 6]`.
    pub profile: Vec<(i64, usize)>,
}

impl IndexReport {
    pub fn min_index(&self) -> i64 {
        *self.partial_indices.last().expect("nonempty")
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
    fn groups(&mut self, n: usize) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        let mut root_of = vec![usize::MAX; self.0.len()];
        for i in 0..n {
            let r = self.find(i);
            if root_of[r] == usize::MAX {
                root_of[r] = out.len();
                out.push(Vec::new());
            }
            out[root_of[r]].push(i);
        }
        out
    }
}

/// Splits the symbol into independent blocks `(rows, cols)`: after
/// permuting rows and columns it is block diagonal with these blocks, so
/// its Toeplitz operators are direct sums.
fn toeplitz_blocks(symbol: &MatrixSymbol) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    let n = symbol.n;
    let mut uf = UnionFind::new(2 * n);
    for i in 0..n {
        for j in 0..n {
            if symbol.nonzero(i, j) {
                uf.union(i, n + j);
            }
        }
    }
    let mut blocks = Vec::new();
    for group in uf.groups(2 * n) {
        let rows: Vec<usize> = group.iter().copied().filter(|&v| v < n).collect();
        let cols: Vec<usize> = group.iter().copied().filter(|&v| v >= n).map(|v| v - n).collect();
        if rows.len() != cols.len() {
            return Err(Error::VanishingDeterminant { index: 0, modulus: 0.0 });
        }
        if !rows.is_empty() {
            blocks.push((rows, cols));
        }
    }
    Ok(blocks)
}

fn kernel_dimension_of<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, rel_tol: f64) -> usize {
    let s = singular_values(m);
    let top = s.first().copied().unwrap_or(0.0);
    let rank = s.iter().filter(|&&x| x > rel_tol * top).count();
    m.ncols() - rank
}

/// `dim ker` of the finite section of `T(zeta^k B)` on one block: inputs are
/// polynomials of degree `< t`, outputs keep every nonnegative degree.
fn block_kernel_dimension(
    symbol: &MatrixSymbol,
    rows: &[usize],
    cols: &[usize],
    t: usize,
    k: i64,
    rel_tol: f64,
) -> usize {
    let (lo, hi) = symbol.exponent_range();
    let top = t as i64 - 1 + hi + k;
    let ncols = cols.len() * t;
    if top < 0 {
        return ncols;
    }
    let nrows = rows.len() * (top + 1) as usize;
    let entry = |r: usize, col: usize| -> Complex64 {
        let (d, i) = ((r / rows.len()) as i64, rows[r % rows.len()]);
        let (j, jc) = ((col / cols.len()) as i64, cols[col % cols.len()]);
        let e = d - j - k;
        if e < lo || e > hi {
            ZERO
        } else {
            symbol.entry_coefficient(i, jc, e)
        }
    };
    if symbol.is_real() {
        let m = DMatrix::<f64>::from_fn(nrows, ncols, |r, col| entry(r, col).re);
        kernel_dimension_of(&m, rel_tol)
    } else {
        let m = DMatrix::<Complex64>::from_fn(nrows, ncols, entry);
        kernel_dimension_of(&m, rel_tol)
    }
}

/// `dim ker T(zeta^k B)` at truncation `t`, summed over independent blocks.
pub fn toeplitz_kernel_dimension(symbol: &MatrixSymbol, t: usize, k: i64, rel_tol: f64) -> Result<usize> {
    Ok(toeplitz_blocks(symbol)?
        .iter()
        .map(|(r, c)| block_kernel_dimension(symbol, r, c, t, k, rel_tol))
        .sum())
}

/// Kernel dimensions of the sections of `T(zeta^k B)` on one block for every
/// `k` in the shift window. In the output degree `d - k` each section keeps
/// the rows `d - k >= -k` of a single matrix, so all kernels sit inside the
/// kernel of the rows shared by every shift; one SVD of those rows plus a
/// small projected problem per shift gives the whole profile.
fn nested_profile<T: ComplexField<RealField = f64>>(
    symbol: &MatrixSymbol,
    rows: &[usize],
    cols: &[usize],
    t: usize,
    rel_tol: f64,
    convert: impl Fn(Complex64) -> T,
) -> Vec<usize> {
    let (lo, hi) = symbol.exponent_range();
    let s = SHIFT_RANGE;
    let ncols = cols.len() * t;
    let fill = |from: i64, to: i64| -> DMatrix<T> {
        let nrows = if to >= from { rows.len() * (to - from + 1) as usize } else { 0 };
        DMatrix::from_fn(nrows, ncols, |row, col| {
            let d = from + (row / rows.len()) as i64;
            let e = d - (col / cols.len()) as i64;
            if e < lo || e > hi {
                T::zero()
            } else {
                convert(symbol.entry_coefficient(rows[row % rows.len()], cols[col % cols.len()], e))
            }
        })
    };
    let common = fill(s, t as i64 - 1 + hi);
    let square = if common.nrows() < ncols {
        let mut p = DMatrix::zeros(ncols, ncols);
        p.rows_mut(0, common.nrows()).copy_from(&common);
        p
    } else {
        common
    };
    let svd = square.svd(false, true);
    let cut = rel_tol * svd.singular_values.max();
    let v_t = svd.v_t.expect("requested V^T");
    let null: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= cut)
        .collect();
    let basis = DMatrix::from_fn(ncols, null.len(), |a, b| v_t[(null[b], a)].clone().conjugate());
    (-s..=s)
        .map(|k| {
            let extra = fill(-k, s - 1);
            if basis.ncols() == 0 || extra.nrows() == 0 {
                return basis.ncols();
            }
            let rank = singular_values(&(extra * &basis)).iter().filter(|&&x| x > cut).count();
            basis.ncols() - rank
        })
        .collect()
}

fn profile(symbol: &MatrixSymbol, t: usize, rel_tol: f64) -> Result<Vec<(i64, usize)>> {
    let mut total = vec![0usize; (2 * SHIFT_RANGE + 1) as usize];
    for (r, c) in toeplitz_blocks(symbol)? {
        let block = if symbol.is_real() {
            nested_profile(symbol, &r, &c, t, rel_tol, |z| z.re)
        } else {
            nested_profile(symbol, &r, &c, t, rel_tol, |z| z)
        };
        for (acc, d) in total.iter_mut().zip(block) {
            *acc += d;
        }
    }
    Ok((-SHIFT_RANGE..=SHIFT_RANGE).zip(total).collect())
}

/// `sum_i max(-kappa_i - k, 0)`.
pub fn kernel_profile_of(indices: &[i64], k: i64) -> usize {
    indices.iter().map(|&x| (-x - k).max(0) as usize).sum()
}

/// Recovers the index multiset from `dim ker T(zeta^k A)` on `k in [-6, 6]`.
/// Indices above the window are pinned down by the Maslov sum when there
/// is at most one of them.
pub fn indices_from_profile(n: usize, profile: &[(i64, usize)], maslov: i64) -> Result<Vec<i64>> {
    let d: Vec<i64> = profile.iter().map(|&(_, v)| v as i64).collect();
    let ks: Vec<i64> = profile.iter().map(|&(k, _)| k).collect();
    if d.len() < 2 || ks.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(Error::InconsistentProfile);
    }
    if *d.last().unwrap() != 0 {
        // some index lies below the window
        return Err(Error::InconsistentProfile);
    }
    // c[k] = d(k-1) - d(k) = #{kappa <= -k}, nonincreasing in k
    let counts: Vec<i64> = d.windows(2).map(|w| w[0] - w[1]).collect();
    if counts.iter().any(|&x| x < 0 || x > n as i64) || counts.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InconsistentProfile);
    }
    let mut indices = Vec::with_capacity(n);
    for (pos, &cnt) in counts.iter().enumerate() {
        let k = ks[pos + 1];
        let next = counts.get(pos + 1).copied().unwrap_or(0);
        for _ in 0..(cnt - next) {
            indices.push(-k);
        }
    }
    let lumped = n - indices.len();
    let known: i64 = indices.iter().sum();
    match lumped {
        0 => {}
        1 => {
            let top = maslov - known;
            let floor = -ks[1] + 1;
            if top < floor {
                return Err(Error::InconsistentProfile);
            }
            indices.push(top);
        }
        _ => return Err(Error::InconsistentProfile),
    }
    indices.sort_unstable_by(|a, b| b.cmp(a));
    if indices.iter().sum::<i64>() != maslov
        || profile.iter().any(|&(k, v)| kernel_profile_of(&indices, k) != v)
    {
        return Err(Error::InconsistentProfile);
    }
    Ok(indices)
}

/// Partial indices of an invertible symbol via shifted block-Toeplitz
/// kernel dimensions, checked against one doubling of the truncation.
pub fn partial_indices(symbol: &MatrixSymbol, truncation: usize, rank_tolerance: f64, side: Side) -> Result<IndexReport> {
    let (lo, hi) = symbol.exponent_range();
    if truncation < 16 * (1 + (hi - lo) as usize) {
        return Err(Error::invalid("truncation", "need T >= 16 (1 + exponent range)"));
    }
    if !(rank_tolerance > 0.0 && rank_tolerance < 1.0) {
        return Err(Error::invalid("rank_tolerance", "must lie in (0, 1)"));
    }
    let maslov = maslov_index(symbol)?;
    let working = match side {
        Side::Left => symbol.transpose(),
        Side::Right => symbol.clone(),
    };
    let coarse = profile(&working, truncation, rank_tolerance)?;
    let fine = profile(&working, 2 * truncation, rank_tolerance)?;
    if coarse != fine {
        return Err(Error::Unstable { what: "kernel-dimension profile" });
    }
    let partial_indices = indices_from_profile(symbol.n, &coarse, maslov)?;
    Ok(IndexReport {
        partial_indices,
        maslov,
        truncation,
        rank_tolerance,
        stable: true,
        side,
        profile: coarse,
    })
}

/// All partial indices at least `-1` (and the report stable).
pub fn globevnik_criterion(report: &IndexReport) -> bool {
    report.stable && report.partial_indices.iter().all(|&k| k >= -1)
}

/// `sum_{kappa >= 0} (kappa + 1)`, the real dimension of the solutions of
/// `f = A conj(f)` when every index is at least `-1`.
pub fn expected_solution_dimension(indices: &[i64]) -> usize {
    indices.iter().filter(|&&k| k >= 0).map(|&k| (k + 1) as usize).sum()
}

/// Independent blocks of `f = A conj(f)`: index sets closed under `A_ij != 0`.
fn conjugation_blocks(symbol: &MatrixSymbol) -> Vec<Vec<usize>> {
    let n = symbol.n;
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in 0..n {
            if symbol.nonzero(i, j) {
                uf.union(i, j);
            }
        }
    }
    uf.groups(n)
}

fn block_solution_dimension(symbol: &MatrixSymbol, idx: &[usize], t: usize, rel_tol: f64) -> usize {
    let (lo, hi) = symbol.exponent_range();
    let b = idx.len();
    let t_i = t as i64;
    let f_lo = lo - (t_i - 1);
    let f_hi = hi.max(t_i - 1);
    let nfreq = (f_hi - f_lo + 1) as usize;
    let mut m = DMatrix::<f64>::zeros(2 * b * nfreq, 2 * b * t);
    let col = |j: usize, comp: usize| 2 * (j * b + comp);
    for fi in 0..nfreq {
        let freq = f_lo + fi as i64;
        for (ri, &row) in idx.iter().enumerate() {
            let r = 2 * (fi * b + ri);
            // f_freq
            if freq >= 0 && freq < t_i {
                let cc = col(freq as usize, ri);
                m[(r, cc)] += 1.0;
                m[(r + 1, cc + 1)] += 1.0;
            }
            // - sum_e A_e[row, c] conj(f_{e - freq})
            for e in lo..=hi {
                let j = e - freq;
                if j < 0 || j >= t_i {
                    continue;
                }
                for (ci, &cidx) in idx.iter().enumerate() {
                    let a = symbol.entry_coefficient(row, cidx, e);
                    if a == ZERO {
                        continue;
                    }
                    let cc = col(j as usize, ci);
                    // a * (x - i y) = (a.re x + a.im y) + i (a.im x - a.re y)
                    m[(r, cc)] -= a.re;
                    m[(r, cc + 1)] -= a.im;
                    m[(r + 1, cc)] -= a.im;
                    m[(r + 1, cc + 1)] += a.re;
                }
            }
        }
    }
    kernel_dimension_of(&m, rel_tol)
}

/// Real dimension of the polynomial solutions of degree `< truncation` of
/// `f = A conj(f)` on the circle, which for `A = -conj(G1^-1) G1` is the
/// condition `Re(conj(G1) f) = 0`. Checked against one doubling.
pub fn linear_solution_dimension(symbol: &MatrixSymbol, truncation: usize) -> Result<usize> {
    let (lo, hi) = symbol.exponent_range();
    if truncation < 16 * (1 + (hi - lo) as usize) {
        return Err(Error::invalid("truncation", "need T >= 16 (1 + exponent range)"));
    }
    let blocks = conjugation_blocks(symbol);
    let dim = |t: usize| -> usize {
        blocks
            .iter()
            .map(|b| block_solution_dimension(symbol, b, t, DEFAULT_RANK_TOL))
            .sum()
    };
    let coarse = dim(truncation);
    if dim(2 * truncation) != coarse {
        return Err(Error::Unstable { what: "linear solution dimension" });
    }
    Ok(coarse)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scalar(e: i64) -> MatrixSymbol {
        MatrixSymbol::from_terms(1, &[(0, 0, e, ONE)]).unwrap()
    }

    fn diag(exps: &[i64]) -> MatrixSymbol {
        let terms: Vec<_> = exps.iter().enumerate().map(|(i, &e)| (i, i, e, ONE)).collect();
        MatrixSymbol::from_terms(exps.len(), &terms).unwrap()
    }

    #[test]
    fn g_entries() {
        let g = build_g(0.3);
        assert_eq!(g.entry_coefficient(0, 0, 1), ONE);
        assert_eq!(g.entry_coefficient(2, 1, 1), c(-1.0, 0.0));
        assert_eq!(g.entry_coefficient(2, 1, 3), c(0.3, 0.0));
        let det = build_g(0.0).determinant(ONE);
        // rows (1,0,0,0), (-i,0,-i,0), (0,-1,0,1), (0,-i,0,-i)
        let m = DMatrix::from_row_slice(
            4,
            4,
            &[ONE, ZERO, ZERO, ZERO, -I, ZERO, -I, ZERO, ZERO, -ONE, ZERO, ONE, ZERO, -I, ZERO, -I],
        );
        assert!((det - m.determinant()).norm() < 1e-15);
        assert!(det.norm() > 0.5);
    }

    #[test]
    fn g_is_invertible_on_circle() {
        for l in [0.0, 0.5, 1.0, 1.2] {
            let g = build_g(l);
            for z in roots_of_unity(64) {
                assert!(g.determinant(z).norm() > 1.0);
            }
        }
    }

    #[test]
    fn closed_form_of_a_matches_product() {
        for l in [0.0, 0.25, 0.5, 1.0, 1.25] {
            let (gap, inv) = symbol_a_discrepancy(l, 64);
            assert!(gap < 1e-13 && inv < 1e-13, "{l}: {gap} {inv}");
        }
    }

    #[test]
    fn symbol_product_agrees_exactly() {
        let l = 0.7;
        let prod = build_g1_inverse(l).conj_on_circle().mul(&build_g1(l)).unwrap().scale(-ONE);
        let a = build_symbol_a(l);
        let (lo, hi) = prod.exponent_range();
        for e in lo.min(-2)..=hi.max(4) {
            assert!((prod.coefficient(e) - a.coefficient(e)).norm() < 1e-15);
        }
    }

    #[test]
    fn a_examples() {
        let a0 = build_symbol_a(0.0);
        assert_eq!(a0.entry_coefficient(2, 2, 4), ZERO);
        assert_eq!(a0.entry_coefficient(3, 2, 1), ONE);
        assert_eq!(a0.entry_coefficient(3, 3, -2), ZERO);
        let a1 = build_symbol_a(1.0);
        assert_eq!(a1.entry_coefficient(2, 2, 4), ONE);
        assert_eq!(a1.entry_coefficient(3, 2, 1), ZERO);
        assert_eq!(a1.entry_coefficient(3, 3, -2), -ONE);
        for l in [0.0, 0.5, 1.0, 1.7] {
            for z in roots_of_unity(16) {
                assert!((build_symbol_a(l).determinant(z) - z.powi(4)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn maslov_examples() {
        for l in [0.0, 0.25, 0.5, 0.75, 1.0, 1.25] {
            assert_eq!(maslov_index(&build_symbol_a(l)).unwrap(), 4);
        }
        assert_eq!(maslov_index(&scalar(3)).unwrap(), 3);
        assert_eq!(maslov_index(&scalar(-2)).unwrap(), -2);
        let singular = MatrixSymbol::from_terms(2, &[(0, 0, 0, ONE)]).unwrap();
        assert!(matches!(maslov_index(&singular), Err(Error::VanishingDeterminant { .. })));
    }

    #[test]
    fn diagonal_symbols_have_their_exponents_as_indices() {
        for side in [Side::Left, Side::Right] {
            let r = partial_indices(&diag(&[3, -1, 0]), 128, 1e-8, side).unwrap();
            assert_eq!(r.partial_indices, vec![3, 0, -1]);
            assert_eq!(r.maslov, 2);
            let r = partial_indices(&scalar(7), 128, 1e-8, side).unwrap();
            assert_eq!(r.partial_indices, vec![7]);
        }
    }

    #[test]
    fn explicit_factorizations() {
        // [[1, 2z], [0, -z^2]] = diag(1, -1) diag(1, z^2) [[1, 2z], [0, 1]]: right indices (2, 0)
        let upper = MatrixSymbol::from_terms(2, &[(0, 0, 0, ONE), (0, 1, 1, c(2.0, 0.0)), (1, 1, 2, -ONE)]).unwrap();
        assert_eq!(partial_indices(&upper, 128, 1e-8, Side::Right).unwrap().partial_indices, vec![2, 0]);
        // its transpose mixes the columns: left indices (1, 1)
        assert_eq!(partial_indices(&upper, 128, 1e-8, Side::Left).unwrap().partial_indices, vec![1, 1]);
        let swap = MatrixSymbol::from_terms(2, &[(0, 1, 1, ONE), (1, 0, 1, ONE)]).unwrap();
        for side in [Side::Left, Side::Right] {
            assert_eq!(partial_indices(&swap, 128, 1e-8, side).unwrap().partial_indices, vec![1, 1]);
        }
    }

    #[test]
    fn indices_of_a() {
        let right: Vec<Vec<i64>> = [0.0, 0.5, 1.0]
            .iter()
            .map(|&l| partial_indices(&build_symbol_a(l), 128, 1e-8, Side::Right).unwrap().partial_indices)
            .collect();
        assert_eq!(right, vec![vec![2, 1, 1, 0]; 3]);
        let left: Vec<Vec<i64>> = [0.0, 0.5, 1.0]
            .iter()
            .map(|&l| partial_indices(&build_symbol_a(l), 128, 1e-8, Side::Left).unwrap().partial_indices)
            .collect();
        assert_eq!(left, vec![vec![1, 1, 1, 1], vec![1, 1, 1, 1], vec![4, 1, 1, -2]]);
    }

    #[test]
    fn profile_is_convex_and_nonincreasing() {
        for l in [0.0, 0.5, 1.0] {
            let r = partial_indices(&build_symbol_a(l), 128, 1e-8, Side::Left).unwrap();
            let d: Vec<i64> = r.profile.iter().map(|&(_, v)| v as i64).collect();
            assert!(d.windows(2).all(|w| w[1] <= w[0]));
            assert!(d.windows(3).all(|w| w[0] - 2 * w[1] + w[2] >= 0));
        }
    }

    #[test]
    fn permutations_preserve_indices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        {
            let a = build_symbol_a(1.0);
            let reference = partial_indices(&a, 128, 1e-8, Side::Left).unwrap();
            for _ in 0..5 {
                let mut rows: Vec<usize> = (0..4).collect();
                let mut cols: Vec<usize> = (0..4).collect();
                rows.shuffle(&mut rng);
                cols.shuffle(&mut rng);
                let p = a.permuted(&rows, &cols).unwrap();
                // an odd permutation flips the sign of det but not its winding
                assert_eq!(maslov_index(&p).unwrap(), reference.maslov);
                let r = partial_indices(&p, 128, 1e-8, Side::Left).unwrap();
                assert_eq!(r.partial_indices, reference.partial_indices);
            }
        }
    }

    #[test]
    fn constant_conjugation_preserves_indices() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = build_symbol_a(1.0);
        let reference = partial_indices(&a, 128, 1e-8, Side::Left).unwrap().partial_indices;
        let mut draw = || DMatrix::from_fn(4, 4, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let (p, q) = (draw(), draw());
        assert!(p.determinant().norm() > 1e-2 && q.determinant().norm() > 1e-2);
        let conj = a.conjugated(&p, &q).unwrap();
        assert_eq!(partial_indices(&conj, 128, 1e-8, Side::Left).unwrap().partial_indices, reference);
    }

    #[test]
    fn nested_profile_matches_direct_sections() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = DMatrix::from_fn(4, 4, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        for sym in [build_symbol_a(1.0).transpose(), build_symbol_a(0.3), build_symbol_a(1.0).conjugated(&p, &p.transpose()).unwrap()] {
            let fast = profile(&sym, 64, 1e-8).unwrap();
            for (k, d) in fast {
                assert_eq!(toeplitz_kernel_dimension(&sym, 64, k, 1e-8).unwrap(), d, "k = {k}");
            }
        }
    }

    #[test]
    fn globevnik_examples() {
        let report = |v: Vec<i64>| IndexReport {
            maslov: v.iter().sum(),
            partial_indices: v,
            truncation: 128,
            rank_tolerance: 1e-8,
            stable: true,
            side: Side::Left,
            profile: Vec::new(),
        };
        assert!(globevnik_criterion(&report(vec![2, 1, 1, 0])));
        assert!(!globevnik_criterion(&report(vec![4, 2, 0, -2])));
        assert!(globevnik_criterion(&report(vec![0, 0, 0, 0])));
        assert!(globevnik_criterion(&report(vec![1, 1, 1, -1])));
    }

    #[test]
    fn truncation_is_validated() {
        assert!(matches!(
            partial_indices(&build_symbol_a(0.0), 32, 1e-8, Side::Left),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn solution_dimensions() {
        assert_eq!(linear_solution_dimension(&build_symbol_a(0.0), 112).unwrap(), 8);
        assert_eq!(linear_solution_dimension(&build_symbol_a(0.5), 112).unwrap(), 8);
        assert_eq!(linear_solution_dimension(&build_symbol_a(1.0), 112).unwrap(), 9);
        // f = zeta^k conj(f): polynomials of degree <= k with palindromic coefficients
        for k in 0..4 {
            assert_eq!(linear_solution_dimension(&scalar(k), 112).unwrap(), (k + 1) as usize);
        }
    }

    #[test]
    fn profile_inference_rejects_garbage() {
        let ks: Vec<i64> = (-6..=6).collect();
        let bad: Vec<(i64, usize)> = ks.iter().map(|&k| (k, if k == 0 { 3 } else { 0 })).collect();
        assert_eq!(indices_from_profile(2, &bad, 0), Err(Error::InconsistentProfile));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn profile_roundtrip(mut kappa in proptest::collection::vec(-6i64..=5, 1..5), extra in 6i64..9) {
            // at most one index above the window
            kappa.push(extra);
            let maslov: i64 = kappa.iter().sum();
            let prof: Vec<(i64, usize)> = (-6..=6).map(|k| (k, kernel_profile_of(&kappa, k))).collect();
            let mut expected = kappa.clone();
            expected.sort_unstable_by(|a, b| b.cmp(a));
            prop_assert_eq!(indices_from_profile(kappa.len(), &prof, maslov).unwrap(), expected);
        }
    }
}
