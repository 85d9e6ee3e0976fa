//! Finite-dimensional `*`-algebras of operators on `C^dim`.
//!
//! An [`OperatorAlgebra`] is stored as a Hilbert-Schmidt orthonormal basis of
//! Hermitian matrices; every `*`-closed subspace admits one, and random real
//! combinations of such a basis are Hermitian elements of the algebra.
//!
//! [`structure_decompose`] finds the block form
//! `A = (+)_J 1_{n_J} (x) M_{d_J}` together with a unitary basis change that
//! exhibits it, and [`check_bipartition`] decides whether two commuting
//! algebras define a bipartite system.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{
    check_square, cluster_eigenvalues, commutator, hermitian_eig, hermitian_part, hermitian_parts,
    identity, kron, leading_phase, orthogonal_residual_scaled, partial_trace, polar_isometry,
    projection_residual, real_thin_svd, stacked_nullspace, unitarity_defect, ComplexMatrix, Tolerance, C64,
};

/// Sampling attempts before spectral clustering gives up.
pub const MAX_ATTEMPTS: usize = 16;

/// Seed used by [`check_bipartition`] for its structure verification.
pub const CERTIFICATE_SEED: u64 = 0x5eed;

#[derive(Debug, Clone)]
pub struct OperatorAlgebra {
    dim: usize,
    basis: Vec<ComplexMatrix>,
    unital: bool,
}

/// Real coordinates of a Hermitian matrix in an HS-orthonormal frame: the
/// diagonal, then `sqrt 2 (Re h_ij, Im h_ij)` for `i < j`.
fn real_coordinates(h: &ComplexMatrix) -> Vec<f64> {
    let n = h.nrows();
    let mut out = Vec::with_capacity(n * n);
    out.extend((0..n).map(|i| h[(i, i)].re));
    for i in 0..n {
        for j in i + 1..n {
            out.push(std::f64::consts::SQRT_2 * h[(i, j)].re);
            out.push(std::f64::consts::SQRT_2 * h[(i, j)].im);
        }
    }
    out
}

fn from_real_coordinates(v: &[f64], n: usize) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = C64::new(v[i], 0.0);
    }
    let mut k = n;
    for i in 0..n {
        for j in i + 1..n {
            let z = C64::new(v[k], v[k + 1]) * std::f64::consts::FRAC_1_SQRT_2;
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            k += 2;
        }
    }
    h
}

/// Hermitian orthonormal basis of the complex span of `ops` from one SVD of
/// the real coordinates of their Hermitian parts. Directions with singular
/// value at most `rank_rel` times the larger of the top singular value and
/// `scale` are dropped.
fn span_basis(dim: usize, ops: &[ComplexMatrix], scale: f64, tol: &Tolerance) -> Vec<ComplexMatrix> {
    if ops.is_empty() || dim == 0 {
        return Vec::new();
    }
    let cols: Vec<Vec<f64>> = ops
        .iter()
        .flat_map(|op| {
            let (re, im) = hermitian_parts(op);
            [real_coordinates(&re), real_coordinates(&im)]
        })
        .collect();
    let m = DMatrix::from_fn(dim * dim, cols.len(), |r, c| cols[c][r]);
    let (u, values) = real_thin_svd(&m).expect("singular value decomposition converges");
    let smax = values.first().copied().unwrap_or(0.0).max(scale);
    if smax == 0.0 {
        return Vec::new();
    }
    (0..values.len())
        .filter(|&j| values[j] > tol.rank_rel * smax)
        .map(|j| from_real_coordinates(u.column(j).as_slice(), dim))
        .collect()
}

/// Incrementally built Hermitian orthonormal basis.
struct HermitianSpan {
    tol: Tolerance,
    basis: Vec<ComplexMatrix>,
}

impl HermitianSpan {
    fn new(tol: &Tolerance) -> Self {
        Self {
            tol: *tol,
            basis: Vec::new(),
        }
    }

    fn len(&self) -> usize {
        self.basis.len()
    }

    fn push_hermitian(&mut self, h: &ComplexMatrix) {
        self.push_scaled(h, h.norm());
    }

    fn push_scaled(&mut self, h: &ComplexMatrix, norm: f64) {
        if let Some(r) = orthogonal_residual_scaled(&self.basis, h, norm, &self.tol) {
            let r = hermitian_part(&r);
            let n = r.norm();
            self.basis.push(r.unscale(n));
        }
    }

    /// Adds both Hermitian parts, so the complex span of `op` is covered.
    fn push(&mut self, op: &ComplexMatrix) {
        self.push_relative(op, op.norm());
    }

    /// As [`Self::push`], with the rank cutoff taken relative to `scale`.
    fn push_relative(&mut self, op: &ComplexMatrix, scale: f64) {
        let (re, im) = hermitian_parts(op);
        self.push_scaled(&re, scale);
        self.push_scaled(&im, scale);
    }
}

impl OperatorAlgebra {
    /// Span of `ops` as a Hermitian orthonormal basis. The span is not closed;
    /// use [`close_algebra`] for the generated algebra.
    pub fn from_spanning(dim: usize, ops: &[ComplexMatrix], tol: &Tolerance) -> Result<Self> {
        for op in ops {
            check_dim(op, dim)?;
        }
        Ok(Self::from_basis(dim, span_basis(dim, ops, 0.0, tol)))
    }

    fn from_basis(dim: usize, basis: Vec<ComplexMatrix>) -> Self {
        let mut alg = Self {
            dim,
            basis,
            unital: false,
        };
        let id = identity(dim).unscale((dim as f64).sqrt());
        alg.unital = alg.residual(&id) <= 1e-8;
        alg
    }

    pub fn scalars(dim: usize) -> Self {
        Self::from_basis(dim, vec![identity(dim).unscale((dim as f64).sqrt())])
    }

    pub fn full(dim: usize) -> Self {
        Self::from_basis(dim, crate::numerics::hermitian_matrix_basis(dim))
    }

    /// State-space dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dimension of the algebra as a vector space.
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    pub fn is_unital(&self) -> bool {
        self.unital
    }

    pub fn is_full(&self) -> bool {
        self.basis.len() == self.dim * self.dim
    }

    /// Norm of the component of `op` outside the algebra.
    pub fn residual(&self, op: &ComplexMatrix) -> f64 {
        projection_residual(&self.basis, op)
    }

    pub fn contains(&self, op: &ComplexMatrix, tol: &Tolerance) -> bool {
        self.residual(op) <= tol.resid_abs * op.norm().max(1.0)
    }

    /// Largest projection residual of either basis onto the other span.
    pub fn span_residual(&self, other: &OperatorAlgebra) -> f64 {
        let a = self.basis.iter().map(|b| other.residual(b));
        let b = other.basis.iter().map(|b| self.residual(b));
        a.chain(b).fold(0.0, f64::max)
    }

    pub fn same_span(&self, other: &OperatorAlgebra, tol: &Tolerance) -> bool {
        self.dim == other.dim
            && self.dimension() == other.dimension()
            && self.span_residual(other) < tol.resid_abs
    }

    /// Conjugation `u A u^dagger`.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Self {
        let basis = self
            .basis
            .iter()
            .map(|b| hermitian_part(&(u * b * u.adjoint())))
            .collect();
        Self::from_basis(self.dim, basis)
    }

    /// Defects of the algebra invariants: distance of the normalized identity
    /// from the span, worst adjoint residual, worst product residual.
    pub fn closure_defects(&self) -> (f64, f64, f64) {
        let id = identity(self.dim).unscale((self.dim as f64).sqrt());
        let unit = self.residual(&id);
        let adjoint = self
            .basis
            .iter()
            .map(|b| self.residual(&b.adjoint()))
            .fold(0.0, f64::max);
        let mut product: f64 = 0.0;
        for a in &self.basis {
            for b in &self.basis {
                product = product.max(self.residual(&(a * b)));
            }
        }
        (unit, adjoint, product)
    }
}

fn check_dim(op: &ComplexMatrix, dim: usize) -> Result<()> {
    let n = check_square(op)?;
    if n != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: n,
        });
    }
    Ok(())
}

/// Smallest unital `*`-algebra containing `generators`.
///
/// Seeds the span with the identity, the generators and their adjoints, then
/// repeatedly adds all pairwise products until a full pass adds nothing.
pub fn close_algebra(
    dim: usize,
    generators: &[ComplexMatrix],
    tol: &Tolerance,
) -> Result<OperatorAlgebra> {
    let mut span = HermitianSpan::new(tol);
    span.push_hermitian(&identity(dim));
    for g in generators {
        check_dim(g, dim)?;
        span.push(g);
    }
    let cap = dim * dim;
    // products among basis[..done] are already in the span
    let mut done = 0;
    'closure: loop {
        let before = span.len();
        for j in done..before {
            for i in 0..=j {
                if span.len() >= cap {
                    break 'closure;
                }
                let p = &span.basis[i] * &span.basis[j];
                span.push_relative(&p, 1.0);
            }
        }
        done = before;
        if span.len() == before {
            break;
        }
    }
    Ok(OperatorAlgebra::from_basis(dim, span_basis(dim, &span.basis, 1.0, tol)))
}

/// All operators commuting with every element of `alg`, from the joint
/// nullspace of the maps `X -> X b - b X`.
pub fn commutant(alg: &OperatorAlgebra, tol: &Tolerance) -> OperatorAlgebra {
    let n = alg.dim;
    let id = identity(n);
    // column-major vec: vec(X b - b X) = (b^T (x) 1 - 1 (x) b) vec(X)
    let blocks = alg
        .basis
        .iter()
        .map(|b| kron(&b.transpose(), &id) - kron(&id, b));
    let null = stacked_nullspace(blocks, n * n, 1.0, tol);
    let ops: Vec<ComplexMatrix> = null
        .column_iter()
        .map(|v| ComplexMatrix::from_column_slice(n, n, v.as_slice()))
        .collect();
    OperatorAlgebra::from_basis(n, span_basis(n, &ops, 1.0, tol))
}

/// Intersection of two operator spans by the principal-angle method: the
/// singular values of `Q1^dagger Q2` equal to one mark shared directions.
pub fn intersect(a: &OperatorAlgebra, b: &OperatorAlgebra, tol: &Tolerance) -> OperatorAlgebra {
    let n = a.dim;
    if a.basis.is_empty() || b.basis.is_empty() {
        return OperatorAlgebra::from_basis(n, Vec::new());
    }
    let coords = |alg: &OperatorAlgebra| {
        let cols: Vec<Vec<f64>> = alg.basis.iter().map(real_coordinates).collect();
        DMatrix::from_fn(n * n, cols.len(), |r, c| cols[c][r])
    };
    let q1 = coords(a);
    let q2 = coords(b);
    let (u, values) = real_thin_svd(&(q1.transpose() * &q2)).expect("singular value decomposition converges");
    let shared: Vec<ComplexMatrix> = values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s >= 1.0 - tol.resid_abs)
        .map(|(j, _)| from_real_coordinates((&q1 * u.column(j)).as_slice(), n))
        .collect();
    OperatorAlgebra::from_basis(n, span_basis(n, &shared, 1.0, tol))
}

pub fn center(alg: &OperatorAlgebra, tol: &Tolerance) -> OperatorAlgebra {
    intersect(alg, &commutant(alg, tol), tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorTest {
    pub is_factor: bool,
    pub center_dimension: usize,
}

pub fn is_factor(alg: &OperatorAlgebra, tol: &Tolerance) -> FactorTest {
    let c = center(alg, tol).dimension();
    FactorTest {
        is_factor: c == 1,
        center_dimension: c,
    }
}

pub fn join(a1: &OperatorAlgebra, a2: &OperatorAlgebra, tol: &Tolerance) -> Result<OperatorAlgebra> {
    if a1.dim != a2.dim {
        return Err(Error::DimensionMismatch {
            expected: a1.dim,
            found: a2.dim,
        });
    }
    let gens: Vec<ComplexMatrix> = a1.basis.iter().chain(a2.basis.iter()).cloned().collect();
    close_algebra(a1.dim, &gens, tol)
}

/// One summand `1_{n_J} (x) M_{d_J}` of a structure decomposition.
#[derive(Debug, Clone)]
pub struct Block {
    pub label: usize,
    /// Multiplicity `n_J`.
    pub multiplicity: usize,
    /// Irreducible dimension `d_J`.
    pub irrep_dim: usize,
    pub central_projector: ComplexMatrix,
}

impl Block {
    pub fn size(&self) -> usize {
        self.multiplicity * self.irrep_dim
    }
}

#[derive(Debug, Clone)]
pub struct StructureDecomposition {
    pub blocks: Vec<Block>,
    /// Unitary whose columns are `|J; k, i>` ordered block by block, and
    /// within a block by multiplicity index `k` then irreducible index `i`.
    pub basis_change: ComplexMatrix,
    pub residual: f64,
}

impl StructureDecomposition {
    /// `(n_J, d_J)` for every block in order.
    pub fn shape(&self) -> Vec<(usize, usize)> {
        self.blocks
            .iter()
            .map(|b| (b.multiplicity, b.irrep_dim))
            .collect()
    }

    /// `T^dagger op T`.
    pub fn to_block_basis(&self, op: &ComplexMatrix) -> ComplexMatrix {
        self.basis_change.adjoint() * op * &self.basis_change
    }

    /// Worst deviation of algebra elements from block-diagonal
    /// `1_{n_J} (x) m_J` form.
    pub fn algebra_residual(&self, ops: &[ComplexMatrix]) -> f64 {
        self.form_residual(ops, SlotForm::Irrep)
    }

    /// Worst deviation of commutant elements from block-diagonal
    /// `m'_J (x) 1_{d_J}` form.
    pub fn commutant_residual(&self, ops: &[ComplexMatrix]) -> f64 {
        self.form_residual(ops, SlotForm::Multiplicity)
    }

    fn form_residual(&self, ops: &[ComplexMatrix], form: SlotForm) -> f64 {
        ops.iter()
            .map(|op| {
                let mut b = self.to_block_basis(op);
                let mut dev = 0.0;
                let mut offset = 0;
                for blk in &self.blocks {
                    let (n, d) = (blk.multiplicity, blk.irrep_dim);
                    let sub = b.view((offset, offset), (n * d, n * d)).into_owned();
                    b.view_mut((offset, offset), (n * d, n * d)).fill(C64::new(0.0, 0.0));
                    let fit = match form {
                        SlotForm::Irrep => {
                            let m = partial_trace(&sub, 1, (n, d)).expect("block dims").unscale(n as f64);
                            kron(&identity(n), &m)
                        }
                        SlotForm::Multiplicity => {
                            let m = partial_trace(&sub, 0, (n, d)).expect("block dims").unscale(d as f64);
                            kron(&m, &identity(d))
                        }
                    };
                    dev += (sub - fit).norm_squared();
                    offset += n * d;
                }
                // b now holds only the off-block entries
                (dev + b.norm_squared()).sqrt()
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy)]
enum SlotForm {
    Irrep,
    Multiplicity,
}

fn gaussian_combination(ops: &[ComplexMatrix], rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let (r, c) = ops[0].shape();
    let mut acc = ComplexMatrix::zeros(r, c);
    for op in ops {
        let w: f64 = StandardNormal.sample(rng);
        acc += op.scale(w);
    }
    hermitian_part(&acc)
}

fn block_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn fingerprint(projector: &ComplexMatrix) -> Vec<f64> {
    (0..projector.nrows())
        .map(|i| (projector[(i, i)].re * 1e9).round() / 1e9)
        .collect()
}

fn descending_lex(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match y.total_cmp(x) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Minimal central projectors from the clustered spectrum of a random
/// Hermitian central element, as orthonormal range bases.
fn central_ranges(
    alg: &OperatorAlgebra,
    tol: &Tolerance,
    seed: u64,
) -> Result<Vec<ComplexMatrix>> {
    let z = center(alg, tol);
    let c = z.dimension();
    if c <= 1 {
        return Ok(vec![identity(alg.dim)]);
    }
    let mut rng = block_rng(seed, 0);
    for _ in 0..MAX_ATTEMPTS {
        let h = gaussian_combination(z.basis(), &mut rng);
        let eig = hermitian_eig(&h)?;
        let clusters = cluster_eigenvalues(&eig.values, tol);
        match clusters.len().cmp(&c) {
            Ordering::Less => continue,
            Ordering::Greater => {
                return Err(Error::ToleranceCheck(format!(
                    "central element has {} eigenvalue clusters, center dimension is {c}",
                    clusters.len()
                )))
            }
            Ordering::Equal => {
                return Ok(clusters.into_iter().map(|r| eig.subspace(r)).collect());
            }
        }
    }
    Err(Error::Degeneracy {
        block: 0,
        attempts: MAX_ATTEMPTS,
    })
}

struct BlockSolution {
    multiplicity: usize,
    irrep_dim: usize,
    /// `dim x (n d)` columns `|k, i>` at local index `k d + i`.
    columns: ComplexMatrix,
}

fn decompose_block(
    alg: &OperatorAlgebra,
    range: &ComplexMatrix,
    label: usize,
    tol: &Tolerance,
    seed: u64,
) -> Result<BlockSolution> {
    let r = range.ncols();
    let compressed: Vec<ComplexMatrix> = alg
        .basis
        .iter()
        .map(|a| hermitian_part(&(range.adjoint() * a * range)))
        .collect();
    // basis elements have unit norm; rank is judged against that
    let compressed_dim = span_basis(r, &compressed, 1.0, tol).len();
    let mut rng = block_rng(seed, label as u64 + 1);
    let mut mismatch = None;
    for _ in 0..MAX_ATTEMPTS {
        let h = gaussian_combination(&compressed, &mut rng);
        let eig = hermitian_eig(&h)?;
        let clusters = cluster_eigenvalues(&eig.values, tol);
        let n = clusters[0].len();
        if clusters.iter().any(|c| c.len() != n) {
            continue;
        }
        let d = clusters.len();
        if n * d != r || compressed_dim != d * d {
            mismatch = Some(format!(
                "block {label}: {d} clusters of multiplicity {n}, rank {r}, compressed dimension {compressed_dim}"
            ));
            continue;
        }
        let spaces: Vec<ComplexMatrix> = clusters.into_iter().map(|c| eig.subspace(c)).collect();
        let mut local = ComplexMatrix::zeros(r, r);
        for k in 0..n {
            local.set_column(k * d, &spaces[0].column(k));
        }
        for (i, w_i) in spaces.iter().enumerate().skip(1) {
            let rep = compressed
                .iter()
                .map(|c| w_i.adjoint() * c * &spaces[0])
                .max_by(|a, b| a.norm().total_cmp(&b.norm()))
                .expect("nonempty algebra");
            let phase = leading_phase(rep.iter().copied());
            let u = polar_isometry(&(rep * phase.conj()), tol)?;
            if unitarity_defect(&u) > tol.resid_abs {
                return Err(Error::ToleranceCheck(format!(
                    "block {label}: intertwiner {i} is not unitary"
                )));
            }
            let frame = w_i * u;
            for k in 0..n {
                local.set_column(k * d + i, &frame.column(k));
            }
        }
        return Ok(BlockSolution {
            multiplicity: n,
            irrep_dim: d,
            columns: range * local,
        });
    }
    match mismatch {
        Some(msg) => Err(Error::ToleranceCheck(msg)),
        None => Err(Error::Degeneracy {
            block: label,
            attempts: MAX_ATTEMPTS,
        }),
    }
}

/// Block decomposition `(+)_J 1_{n_J} (x) M_{d_J}` of a `*`-algebra.
///
/// Randomness is drawn from streams of a ChaCha generator seeded with `seed`:
/// stream 0 for the central element, stream `label + 1` for each block, so
/// the result does not depend on scheduling.
pub fn structure_decompose(
    alg: &OperatorAlgebra,
    tol: &Tolerance,
    seed: u64,
) -> Result<StructureDecomposition> {
    let mut ranges: Vec<(Vec<f64>, ComplexMatrix)> = central_ranges(alg, tol, seed)?
        .into_iter()
        .map(|v| (fingerprint(&(&v * v.adjoint())), v))
        .collect();
    ranges.sort_by(|a, b| b.1.ncols().cmp(&a.1.ncols()).then_with(|| descending_lex(&a.0, &b.0)));

    let solved: Vec<BlockSolution> = ranges
        .par_iter()
        .enumerate()
        .map(|(label, (_, v))| decompose_block(alg, v, label, tol, seed))
        .collect::<Result<_>>()?;

    let mut order: Vec<usize> = (0..solved.len()).collect();
    order.sort_by(|&a, &b| {
        let (sa, sb) = (&solved[a], &solved[b]);
        (sb.multiplicity * sb.irrep_dim)
            .cmp(&(sa.multiplicity * sa.irrep_dim))
            .then(sb.irrep_dim.cmp(&sa.irrep_dim))
            .then_with(|| descending_lex(&ranges[a].0, &ranges[b].0))
    });

    let dim = alg.dim;
    let mut basis_change = ComplexMatrix::zeros(dim, dim);
    let mut blocks = Vec::with_capacity(order.len());
    let mut offset = 0;
    for (label, &j) in order.iter().enumerate() {
        let s = &solved[j];
        let size = s.columns.ncols();
        basis_change.columns_mut(offset, size).copy_from(&s.columns);
        offset += size;
        let v = &ranges[j].1;
        blocks.push(Block {
            label,
            multiplicity: s.multiplicity,
            irrep_dim: s.irrep_dim,
            central_projector: v * v.adjoint(),
        });
    }
    if offset != dim {
        return Err(Error::ToleranceCheck(format!(
            "blocks cover {offset} of {dim} dimensions"
        )));
    }
    let mut dec = StructureDecomposition {
        blocks,
        basis_change,
        residual: 0.0,
    };
    dec.residual = dec.algebra_residual(&alg.basis);
    if dec.residual > tol.resid_abs {
        return Err(Error::ToleranceCheck(format!(
            "block-form residual {:e} exceeds {:e}",
            dec.residual, tol.resid_abs
        )));
    }
    Ok(dec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    /// A non-vanishing commutator `[a, b]` with `a` in A_1 and `b` in A_2.
    Commutator,
    /// A non-scalar element of the center of A_1.
    Central,
    /// A non-scalar operator commuting with the whole join.
    JoinCommutant,
}

#[derive(Debug, Clone)]
pub struct Witness {
    pub kind: WitnessKind,
    pub matrix: ComplexMatrix,
}

#[derive(Debug, Clone)]
pub struct BipartitionCertificate {
    pub commuting: bool,
    pub join_is_full: bool,
    pub a1_is_factor: bool,
    pub verdict: bool,
    pub witness: Option<Witness>,
    /// Largest commutator norm over basis pairs.
    pub commutator_norm: f64,
    pub join_dimension: usize,
    pub center_dimension: usize,
    /// On a positive verdict: `(n, d)` of A_1's single block and the worst
    /// residual of A_1 from `1_n (x) M_d` and of A_2 from `M_n (x) 1_d` form.
    pub structure: Option<((usize, usize), f64)>,
}

/// Tests whether commuting `a1`, `a2` generate the full operator algebra as
/// `A_1 (x) A_2`: commutation, full join and factoriality of `a1`.
pub fn check_bipartition(
    a1: &OperatorAlgebra,
    a2: &OperatorAlgebra,
    tol: &Tolerance,
) -> Result<BipartitionCertificate> {
    check_bipartition_seeded(a1, a2, tol, CERTIFICATE_SEED)
}

/// [`check_bipartition`] with the seed of the confirming structure
/// decomposition given explicitly.
pub fn check_bipartition_seeded(
    a1: &OperatorAlgebra,
    a2: &OperatorAlgebra,
    tol: &Tolerance,
    seed: u64,
) -> Result<BipartitionCertificate> {
    let dim = a1.dim;
    let mut worst = (0.0, None);
    for a in &a1.basis {
        for b in &a2.basis {
            let c = commutator(a, b);
            let n = c.norm();
            if n > worst.0 {
                worst = (n, Some(c));
            }
        }
    }
    let commuting = worst.0 <= tol.resid_abs;
    let joined = join(a1, a2, tol)?;
    let join_is_full = joined.is_full();
    let z = center(a1, tol);
    let a1_is_factor = z.dimension() == 1;
    let verdict = commuting && join_is_full && a1_is_factor;

    let non_scalar = |alg: &OperatorAlgebra| {
        alg.basis
            .iter()
            .map(|b| {
                let t = b.trace() / C64::new(dim as f64, 0.0);
                b - identity(dim) * t
            })
            .max_by(|x, y| x.norm().total_cmp(&y.norm()))
            .filter(|m| m.norm() > tol.resid_abs)
    };
    let witness = if !commuting {
        worst.1.map(|matrix| Witness {
            kind: WitnessKind::Commutator,
            matrix,
        })
    } else if !a1_is_factor {
        non_scalar(&z).map(|matrix| Witness {
            kind: WitnessKind::Central,
            matrix,
        })
    } else if !join_is_full {
        non_scalar(&commutant(&joined, tol)).map(|matrix| Witness {
            kind: WitnessKind::JoinCommutant,
            matrix,
        })
    } else {
        None
    };

    let structure = if verdict {
        let dec = structure_decompose(a1, tol, seed)?;
        if dec.blocks.len() != 1 {
            return Err(Error::ToleranceCheck(format!(
                "factor decomposed into {} blocks",
                dec.blocks.len()
            )));
        }
        let res = dec.residual.max(dec.commutant_residual(&a2.basis));
        Some((dec.shape()[0], res))
    } else {
        None
    };

    Ok(BipartitionCertificate {
        commuting,
        join_is_full,
        a1_is_factor,
        verdict,
        witness,
        commutator_norm: worst.0,
        join_dimension: joined.dimension(),
        center_dimension: z.dimension(),
        structure,
    })
}

/// Two random generators per block of an algebra with prescribed block shape
/// `(n_J, d_J)`, rotated by `basis` (a unitary on `sum n_J d_J` dimensions).
pub fn block_algebra_generators<R: rand::Rng + ?Sized>(
    shape: &[(usize, usize)],
    basis: &ComplexMatrix,
    rng: &mut R,
) -> Vec<ComplexMatrix> {
    let dim: usize = shape.iter().map(|(n, d)| n * d).sum();
    (0..2)
        .map(|_| {
            let mut m = ComplexMatrix::zeros(dim, dim);
            let mut offset = 0;
            for &(n, d) in shape {
                let x = crate::random::random_hermitian(d, rng);
                m.view_mut((offset, offset), (n * d, n * d))
                    .copy_from(&kron(&identity(n), &x));
                offset += n * d;
            }
            basis * m * basis.adjoint()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{collective_spin, embed, pauli};
    use crate::random::random_unitary;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn diag(values: &[f64]) -> ComplexMatrix {
        let n = values.len();
        ComplexMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(values[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    fn slot_algebra(dims: &[usize], slot: usize) -> OperatorAlgebra {
        let total: usize = dims.iter().product();
        let gens: Vec<_> = crate::numerics::hermitian_matrix_basis(dims[slot])
            .iter()
            .map(|h| embed(h, dims, slot).unwrap())
            .collect();
        close_algebra(total, &gens, &tol()).unwrap()
    }

    #[test]
    fn closure_examples() {
        let a = close_algebra(3, &[], &tol()).unwrap();
        assert_eq!(a.dimension(), 1);
        assert!(a.is_unital());

        let a = close_algebra(2, &[pauli('X').unwrap(), pauli('Z').unwrap()], &tol()).unwrap();
        assert_eq!(a.dimension(), 4);

        // powers 1, D, D^2 of a nondegenerate diagonal span all diagonals
        let a = close_algebra(3, &[diag(&[1.0, 2.0, 3.0])], &tol()).unwrap();
        assert_eq!(a.dimension(), 3);
        assert!(a.contains(&diag(&[0.0, 1.0, 0.0]), &tol()));
        let (unit, adj, prod) = a.closure_defects();
        assert!(unit < 1e-12 && adj < 1e-12 && prod < 1e-12);
    }

    #[test]
    fn closure_rejects_mismatched_generators() {
        assert!(matches!(
            close_algebra(3, &[identity(2)], &tol()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn commutant_examples() {
        assert_eq!(commutant(&OperatorAlgebra::full(3), &tol()).dimension(), 1);
        assert_eq!(commutant(&OperatorAlgebra::scalars(3), &tol()).dimension(), 9);
        let a = slot_algebra(&[2, 2], 0);
        let c = commutant(&a, &tol());
        assert!(c.same_span(&slot_algebra(&[2, 2], 1), &tol()));
    }

    #[test]
    fn center_examples() {
        assert_eq!(center(&OperatorAlgebra::full(4), &tol()).dimension(), 1);
        let d = close_algebra(3, &[diag(&[1.0, 2.0, 3.0])], &tol()).unwrap();
        assert!(center(&d, &tol()).same_span(&d, &tol()));
    }

    #[test]
    fn factor_examples() {
        let slot = slot_algebra(&[2, 2], 0);
        assert!(is_factor(&slot, &tol()).is_factor);
        let d = close_algebra(4, &[diag(&[1.0, -2.0, 3.0, 0.5])], &tol()).unwrap();
        assert_eq!(is_factor(&d, &tol()), FactorTest { is_factor: false, center_dimension: 4 });
    }

    #[test]
    fn join_examples() {
        let a = slot_algebra(&[2, 2], 0);
        let b = slot_algebra(&[2, 2], 1);
        assert!(join(&a, &b, &tol()).unwrap().is_full());
        assert!(join(&a, &a, &tol()).unwrap().same_span(&a, &tol()));
        assert!(join(&OperatorAlgebra::scalars(4), &a, &tol()).unwrap().same_span(&a, &tol()));
    }

    #[test]
    fn decompose_full_and_diagonal() {
        let dec = structure_decompose(&OperatorAlgebra::full(4), &tol(), 1).unwrap();
        assert_eq!(dec.shape(), vec![(1, 4)]);
        let d = close_algebra(4, &[diag(&[1.0, -2.0, 3.0, 0.5])], &tol()).unwrap();
        let dec = structure_decompose(&d, &tol(), 1).unwrap();
        assert_eq!(dec.shape(), vec![(1, 1); 4]);
        assert!(dec.residual < 1e-8);
        // canonical order: the block touching the first basis vector comes first
        assert!((dec.blocks[0].central_projector[(0, 0)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn decompose_collective_spin() {
        let a = close_algebra(8, &collective_spin(3), &tol()).unwrap();
        assert_eq!(a.dimension(), 20);
        let dec = structure_decompose(&a, &tol(), 42).unwrap();
        assert_eq!(dec.shape(), vec![(1, 4), (2, 2)]);
        assert!(dec.residual < 1e-8);
        let c = commutant(&a, &tol());
        assert_eq!(c.dimension(), 5);
        assert!(dec.commutant_residual(c.basis()) < 1e-8);
        assert!(unitarity_defect(&dec.basis_change) < 1e-10);
        for b in &dec.blocks {
            let p = &b.central_projector;
            assert!((p * p - p).norm() < 1e-10);
            assert!((p.trace().re - b.size() as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn join_with_commutant_keeps_blocks() {
        // dimension sum_J (n_J d_J)^2 = 16 + 16
        let a = close_algebra(8, &collective_spin(3), &tol()).unwrap();
        let c = commutant(&a, &tol());
        assert_eq!(join(&a, &c, &tol()).unwrap().dimension(), 32);
        let d = close_algebra(8, &[diag(&[1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 3.0, 4.0])], &tol()).unwrap();
        assert_eq!(join(&d, &commutant(&d, &tol()), &tol()).unwrap().dimension(), 4 + 4 + 9 + 1);
    }

    #[test]
    fn commutant_of_rotated_full_algebra_is_scalars_and_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 2..=4 {
            let u = random_unitary(n, &mut rng);
            let a = OperatorAlgebra::full(n).conjugate(&u);
            let c = commutant(&a, &tol());
            assert_eq!(c.dimension(), 1);
            assert_eq!(commutant(&c, &tol()).dimension(), n * n);
        }
    }

    #[test]
    fn decomposition_is_deterministic_given_seed() {
        let a = close_algebra(8, &collective_spin(3), &tol()).unwrap();
        let d1 = structure_decompose(&a, &tol(), 9).unwrap();
        let d2 = structure_decompose(&a, &tol(), 9).unwrap();
        assert_eq!(d1.basis_change, d2.basis_change);
    }

    #[test]
    fn decomposition_of_random_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for shape in [vec![(2, 2), (1, 3)], vec![(3, 1), (1, 1), (2, 2)], vec![(1, 2), (1, 2), (2, 1)]] {
            let dim: usize = shape.iter().map(|(n, d)| n * d).sum();
            let u = random_unitary(dim, &mut rng);
            let gens = block_algebra_generators(&shape, &u, &mut rng);
            let a = close_algebra(dim, &gens, &tol()).unwrap();
            let dec = structure_decompose(&a, &tol(), 3).unwrap();
            let mut got = dec.shape();
            let mut want = shape.clone();
            got.sort();
            want.sort();
            assert_eq!(got, want);
            assert!(dec.residual < 1e-8);
        }
    }

    #[test]
    fn bipartition_examples() {
        let a1 = slot_algebra(&[2, 3], 0);
        let a2 = slot_algebra(&[2, 3], 1);
        let cert = check_bipartition(&a1, &a2, &tol()).unwrap();
        assert!(cert.verdict);
        assert!(cert.witness.is_none());
        let ((n, d), res) = cert.structure.unwrap();
        assert_eq!((n, d), (3, 2));
        assert!(res < 1e-8);

        let d = close_algebra(4, &[diag(&[1.0, -2.0, 3.0, 0.5])], &tol()).unwrap();
        let cert = check_bipartition(&d, &d, &tol()).unwrap();
        assert!(cert.commuting && !cert.a1_is_factor && !cert.join_is_full && !cert.verdict);
        assert_eq!(cert.witness.unwrap().kind, WitnessKind::Central);

        let f = OperatorAlgebra::full(4);
        let cert = check_bipartition(&f, &f, &tol()).unwrap();
        assert!(!cert.commuting && !cert.verdict);
        assert_eq!(cert.witness.unwrap().kind, WitnessKind::Commutator);
    }
}
