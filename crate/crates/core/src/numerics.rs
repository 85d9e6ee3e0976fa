//! Dense complex linear algebra shared by every other module.
//!
//! Operators, unitaries and states are all carried as [`ComplexMatrix`]
//! (states as `dim x 1` columns). The single inner product on operator spaces
//! is the Hilbert-Schmidt product `Tr(A^dagger B)`, and all rank decisions go
//! through a [`Tolerance`].

use std::ops::Range;

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type ComplexMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Relative Hermiticity defect accepted by [`hermitian_eig`].
pub const HERMITIAN_REL: f64 = 1e-12;

/// Largest singular value below which [`polar_isometry`] treats its input as zero.
pub const POLAR_FLOOR: f64 = 1e-14;

/// Tolerance policy for rank, residual and eigenvalue-clustering decisions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Relative singular-value cutoff.
    pub rank_rel: f64,
    /// Absolute residual bound.
    pub resid_abs: f64,
    /// Eigenvalue clustering gap, relative to the spectral scale.
    pub degeneracy_gap: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rank_rel: 1e-10,
            resid_abs: 1e-8,
            degeneracy_gap: 1e-7,
        }
    }
}

impl Tolerance {
    pub fn new(rank_rel: f64, resid_abs: f64, degeneracy_gap: f64) -> Result<Self> {
        let tol = Self {
            rank_rel,
            resid_abs,
            degeneracy_gap,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !(ok(self.rank_rel) && ok(self.resid_abs) && ok(self.degeneracy_gap)) {
            return Err(Error::InvalidTolerance(format!(
                "all tolerances must be strictly positive, got {self:?}"
            )));
        }
        if self.rank_rel >= 1.0 {
            return Err(Error::InvalidTolerance(format!(
                "rank_rel must be < 1, got {}",
                self.rank_rel
            )));
        }
        Ok(())
    }
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Kronecker product of a sequence, first element in the most significant slot.
pub fn kron_all<'a>(ops: impl IntoIterator<Item = &'a ComplexMatrix>) -> ComplexMatrix {
    ops.into_iter()
        .fold(identity(1), |acc, op| acc.kronecker(op))
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    a.dotc(b)
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermitian_defect(m: &ComplexMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn is_hermitian(m: &ComplexMatrix) -> bool {
    m.is_square() && hermitian_defect(m) <= HERMITIAN_REL * max_abs(m).max(f64::MIN_POSITIVE)
}

/// Max-entry deviation of `U^dagger U` from the identity.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(u.adjoint() * u - identity(u.nrows())))
}

pub fn check_square(m: &ComplexMatrix) -> Result<usize> {
    if m.is_square() {
        Ok(m.nrows())
    } else {
        Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        })
    }
}

pub fn check_unitary(u: &ComplexMatrix, tol: &Tolerance) -> Result<()> {
    check_square(u)?;
    let defect = unitarity_defect(u);
    if defect > tol.resid_abs {
        return Err(Error::NotUnitary { defect });
    }
    Ok(())
}

pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Splits `m` into Hermitian `h1, h2` with `m = h1 + i h2`.
pub fn hermitian_parts(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let adj = m.adjoint();
    let re = (m + &adj).scale(0.5);
    let im = (m - &adj) * C64::new(0.0, -0.5);
    (re, im)
}

/// Hilbert-Schmidt orthonormal Hermitian basis of `M_n`: diagonal units
/// followed by symmetric and antisymmetric off-diagonal pairs.
pub fn hermitian_matrix_basis(n: usize) -> Vec<ComplexMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for k in 0..n {
        let mut e = ComplexMatrix::zeros(n, n);
        e[(k, k)] = ONE;
        out.push(e);
    }
    for k in 0..n {
        for l in k + 1..n {
            let mut sym = ComplexMatrix::zeros(n, n);
            sym[(k, l)] = C64::new(s, 0.0);
            sym[(l, k)] = C64::new(s, 0.0);
            out.push(sym);
            let mut asym = ComplexMatrix::zeros(n, n);
            asym[(k, l)] = C64::new(0.0, -s);
            asym[(l, k)] = C64::new(0.0, s);
            out.push(asym);
        }
    }
    out
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// Columns of `vectors` spanning the eigenvalues in `range`.
    pub fn subspace(&self, range: Range<usize>) -> ComplexMatrix {
        self.vectors.columns(range.start, range.len()).into_owned()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut scaled = self.vectors.clone();
        for (j, w) in self.values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*w);
        }
        scaled * self.vectors.adjoint()
    }
}

pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEigen> {
    check_square(m)?;
    if !is_hermitian(m) {
        return Err(Error::NotHermitian {
            defect: hermitian_defect(m),
        });
    }
    Ok(hermitian_eig_unchecked(&hermitian_part(m)))
}

fn hermitian_eig_unchecked(m: &ComplexMatrix) -> HermitianEigen {
    let n = m.nrows();
    if n == 0 {
        return HermitianEigen {
            values: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0),
        };
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    HermitianEigen { values, vectors }
}

/// Gap-based single-linkage clustering of ascending eigenvalues.
///
/// Consecutive eigenvalues split into separate clusters when their gap exceeds
/// `degeneracy_gap` times the spectral scale (the larger of the spectral range
/// and the largest eigenvalue magnitude).
pub fn cluster_eigenvalues(values: &[f64], tol: &Tolerance) -> Vec<Range<usize>> {
    if values.is_empty() {
        return Vec::new();
    }
    let range = values[values.len() - 1] - values[0];
    let scale = values
        .iter()
        .fold(range, |acc, v| acc.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let gap = tol.degeneracy_gap * scale;
    let mut clusters = Vec::new();
    let mut start = 0;
    for j in 1..values.len() {
        if values[j] - values[j - 1] > gap {
            clusters.push(start..j);
            start = j;
        }
    }
    clusters.push(start..values.len());
    clusters
}

/// Full singular value decomposition `m = U diag(s) V^dagger` with `s`
/// descending and `U`, `V` square.
pub fn svd(m: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<f64>, ComplexMatrix)> {
    let (r, c) = m.shape();
    let f = faer::Mat::<C64>::from_fn(r, c, |i, j| m[(i, j)]);
    let dec = f
        .svd()
        .map_err(|_| Error::ToleranceCheck("singular value decomposition did not converge".into()))?;
    let u = ComplexMatrix::from_fn(r, r, |i, j| dec.U()[(i, j)]);
    let v = ComplexMatrix::from_fn(c, c, |i, j| dec.V()[(i, j)]);
    let s = dec.S().column_vector().iter().map(|z| z.re).collect();
    Ok((u, s, v))
}

/// Thin left singular vectors and singular values of a real matrix, `s`
/// descending.
pub(crate) fn real_thin_svd(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let (r, c) = m.shape();
    let f = faer::Mat::<f64>::from_fn(r, c, |i, j| m[(i, j)]);
    let dec = f
        .thin_svd()
        .map_err(|_| Error::ToleranceCheck("singular value decomposition did not converge".into()))?;
    let k = r.min(c);
    let u = DMatrix::from_fn(r, k, |i, j| dec.U()[(i, j)]);
    let s = dec.S().column_vector().iter().copied().collect();
    Ok((u, s))
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    faer::Mat::<C64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
        .singular_values()
        .expect("singular values converge")
}

pub fn numerical_rank(m: &ComplexMatrix, tol: &Tolerance) -> usize {
    let sv = singular_values(m);
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol.rank_rel * smax).count()
}

/// Orthonormal basis (as columns) of the right nullspace of `m`.
///
/// A direction is null when its singular value is at most `rank_rel` times
/// the largest singular value.
pub fn nullspace(m: &ComplexMatrix, tol: &Tolerance) -> ComplexMatrix {
    nullspace_scaled(m, 0.0, tol)
}

/// [`nullspace`] with the cutoff taken relative to the larger of the top
/// singular value and `scale`, so a matrix that is rounding noise next to
/// `scale` counts as zero.
pub fn nullspace_scaled(m: &ComplexMatrix, scale: f64, tol: &Tolerance) -> ComplexMatrix {
    let c = m.ncols();
    if c == 0 {
        return ComplexMatrix::zeros(0, 0);
    }
    if m.nrows() == 0 || max_abs(m) == 0.0 {
        return identity(c);
    }
    let (_, values, v) = svd(m).expect("singular value decomposition converges");
    let smax = values.first().copied().unwrap_or(0.0).max(scale);
    let null: Vec<usize> = (0..c)
        .filter(|&j| values.get(j).copied().unwrap_or(0.0) <= tol.rank_rel * smax)
        .collect();
    let mut out = ComplexMatrix::zeros(c, null.len());
    for (dst, &j) in null.iter().enumerate() {
        out.set_column(dst, &v.column(j));
    }
    out
}

/// Nullspace of a tall stack of row blocks, compressing through QR so the
/// working matrix never grows beyond twice the column count. The cutoff is as
/// in [`nullspace_scaled`].
pub fn stacked_nullspace(
    blocks: impl IntoIterator<Item = ComplexMatrix>,
    cols: usize,
    scale: f64,
    tol: &Tolerance,
) -> ComplexMatrix {
    let mut acc = ComplexMatrix::zeros(0, cols);
    for block in blocks {
        debug_assert_eq!(block.ncols(), cols);
        let rows = acc.nrows() + block.nrows();
        let mut stacked = ComplexMatrix::zeros(rows, cols);
        stacked.rows_mut(0, acc.nrows()).copy_from(&acc);
        stacked.rows_mut(acc.nrows(), block.nrows()).copy_from(&block);
        acc = if rows > 2 * cols {
            let r = stacked.qr().r();
            r.rows(0, cols.min(r.nrows())).into_owned()
        } else {
            stacked
        };
    }
    nullspace_scaled(&acc, scale, tol)
}

/// Partial isometry from the singular decomposition of `m` with every
/// nonzero singular value replaced by one.
pub fn polar_isometry(m: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    if m.is_empty() {
        return Err(Error::DegenerateInput("empty matrix"));
    }
    let (u, values, v) = svd(m)?;
    let smax = values.first().copied().unwrap_or(0.0);
    if !(smax > POLAR_FLOOR) {
        return Err(Error::DegenerateInput("matrix is numerically zero"));
    }
    let mut out = ComplexMatrix::zeros(m.nrows(), m.ncols());
    for (j, s) in values.iter().enumerate() {
        if *s > tol.rank_rel * smax {
            out += u.column(j) * v.column(j).adjoint();
        }
    }
    Ok(out)
}

/// Orthonormalizes operators under the Hilbert-Schmidt product.
///
/// Modified Gram-Schmidt with one reorthogonalization pass; a candidate is
/// dropped when its residual is at most `rank_rel` times its own norm.
pub fn hs_orthonormalize(ops: &[ComplexMatrix], tol: &Tolerance) -> Vec<ComplexMatrix> {
    let mut basis: Vec<ComplexMatrix> = Vec::new();
    for op in ops {
        if let Some(q) = orthogonal_residual(&basis, op, tol) {
            basis.push(q);
        }
    }
    basis
}

/// Normalized component of `op` orthogonal to the orthonormal `basis`, if it
/// survives the rank policy.
pub(crate) fn orthogonal_residual(
    basis: &[ComplexMatrix],
    op: &ComplexMatrix,
    tol: &Tolerance,
) -> Option<ComplexMatrix> {
    orthogonal_residual_scaled(basis, op, op.norm(), tol)
}

/// As [`orthogonal_residual`], with the rank cutoff taken relative to `norm`.
pub(crate) fn orthogonal_residual_scaled(
    basis: &[ComplexMatrix],
    op: &ComplexMatrix,
    norm: f64,
    tol: &Tolerance,
) -> Option<ComplexMatrix> {
    if norm == 0.0 || op.norm() == 0.0 {
        return None;
    }
    let mut r = op.clone();
    for _ in 0..2 {
        for b in basis {
            let c = hs_inner(b, &r);
            r -= b * c;
        }
    }
    let rn = r.norm();
    if rn <= tol.rank_rel * norm {
        return None;
    }
    Some(r.unscale(rn))
}

/// Hilbert-Schmidt norm of the component of `op` outside the span of the
/// orthonormal `basis`.
pub fn projection_residual(basis: &[ComplexMatrix], op: &ComplexMatrix) -> f64 {
    let mut r = op.clone();
    for b in basis {
        let c = hs_inner(b, &r);
        r -= b * c;
    }
    r.norm()
}

/// `exp(A)` for anti-Hermitian `A`. Only the anti-Hermitian part of the input
/// is used, so the result is unitary to working precision.
pub fn matrix_exp_skewhermitian(a: &ComplexMatrix) -> ComplexMatrix {
    // A = -iH with H = iA Hermitian
    let h = hermitian_part(&(a * I));
    exp_minus_i(&hermitian_eig_unchecked(&h), 1.0)
}

/// `exp(-i t H)` from a precomputed eigendecomposition of `H`.
pub fn exp_minus_i(eig: &HermitianEigen, t: f64) -> ComplexMatrix {
    let mut scaled = eig.vectors.clone();
    for (j, w) in eig.values.iter().enumerate() {
        let phase = C64::from_polar(1.0, -t * w);
        scaled.column_mut(j).scale_mut_complex(phase);
    }
    scaled * eig.vectors.adjoint()
}

trait ScaleComplex {
    fn scale_mut_complex(&mut self, z: C64);
}

impl<S> ScaleComplex for nalgebra::Matrix<C64, nalgebra::Dyn, nalgebra::U1, S>
where
    S: nalgebra::StorageMut<C64, nalgebra::Dyn, nalgebra::U1>,
{
    fn scale_mut_complex(&mut self, z: C64) {
        for x in self.iter_mut() {
            *x *= z;
        }
    }
}

/// Rotates each column so that its largest-magnitude entry (first one on
/// ties) is positive real.
pub fn fix_column_phases(m: &mut ComplexMatrix) {
    for mut col in m.column_iter_mut() {
        let phase = leading_phase(col.iter().copied());
        for x in col.iter_mut() {
            *x *= phase.conj();
        }
    }
}

/// Unit phase of the largest-magnitude entry, first one on ties.
pub fn leading_phase(entries: impl Iterator<Item = C64>) -> C64 {
    let entries: Vec<C64> = entries.collect();
    let max = entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return ONE;
    }
    let lead = entries
        .iter()
        .find(|z| z.norm() >= max * (1.0 - 1e-12))
        .copied()
        .unwrap_or(ONE);
    lead / lead.norm()
}

/// Partial trace of a bipartite operator on `C^a (x) C^b`; `keep` is 0 for the
/// first factor, 1 for the second.
pub fn partial_trace(m: &ComplexMatrix, keep: usize, dims: (usize, usize)) -> Result<ComplexMatrix> {
    let (a, b) = dims;
    let n = check_square(m)?;
    if n != a * b {
        return Err(Error::DimensionMismatch {
            expected: a * b,
            found: n,
        });
    }
    match keep {
        0 => Ok(ComplexMatrix::from_fn(a, a, |i, j| {
            (0..b).map(|k| m[(i * b + k, j * b + k)]).sum()
        })),
        1 => Ok(ComplexMatrix::from_fn(b, b, |k, l| {
            (0..a).map(|i| m[(i * b + k, i * b + l)]).sum()
        })),
        _ => Err(Error::IndexOutOfRange { index: keep, len: 2 }),
    }
}

/// Regroups a state vector on `(x)_i C^{dims[i]}` into a matrix whose rows run
/// over the factors in `keep` and columns over the rest, both in ascending
/// factor order.
pub fn state_matrix(state: &[C64], dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if state.len() != total {
        return Err(Error::DimensionMismatch {
            expected: total,
            found: state.len(),
        });
    }
    for &k in keep {
        if k >= dims.len() {
            return Err(Error::IndexOutOfRange {
                index: k,
                len: dims.len(),
            });
        }
    }
    let in_keep: Vec<bool> = (0..dims.len()).map(|i| keep.contains(&i)).collect();
    let rows: usize = (0..dims.len()).filter(|&i| in_keep[i]).map(|i| dims[i]).product();
    let cols = total / rows;
    let mut out = ComplexMatrix::zeros(rows, cols);
    let mut digits = vec![0usize; dims.len()];
    for amp in state {
        let (mut r, mut c) = (0, 0);
        for (i, &d) in digits.iter().enumerate() {
            if in_keep[i] {
                r = r * dims[i] + d;
            } else {
                c = c * dims[i] + d;
            }
        }
        out[(r, c)] = *amp;
        for i in (0..dims.len()).rev() {
            digits[i] += 1;
            if digits[i] < dims[i] {
                break;
            }
            digits[i] = 0;
        }
    }
    Ok(out)
}

/// Reduced density matrix of a pure state on the factors in `keep`.
pub fn reduced_density(state: &[C64], dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let psi = state_matrix(state, dims, keep)?;
    Ok(&psi * psi.adjoint())
}
