//! Connections and loop holonomies of iso-degenerate operator families.
//!
//! A family `X(lambda) = U_lambda X U_lambda^dagger` keeps the spectrum of a
//! fixed operator `X = 1_n (x) diag(x_1..x_d)` while rotating its eigenspaces.
//! Parallel transport of the `n`-dimensional eigenspace `C_i` around a loop
//! in parameter space yields a unitary on `C^n`; holonomies of enough loops
//! generate all of `U(n)`.
//!
//! Holonomies are discrete Wilson loops: frames `F(lambda) = U_lambda E_i`
//! over a subdivided path are chained through the unitary parts of their
//! overlaps. Every step is exactly unitary, so no step-size control is
//! needed.

use nalgebra::Schur;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{
    check_unitary, cluster_eigenvalues, exp_minus_i, hermitian_eig, identity, kron, max_abs,
    polar_isometry, singular_values, unitarity_defect, ComplexMatrix, HermitianEigen, Tolerance,
    C64, I, ONE,
};

/// Frame overlaps with a singular value below this count as rank loss.
pub const OVERLAP_FLOOR: f64 = 1e-6;

/// Holonomy eigenvalues closer than this to `-1` are rejected by the
/// logarithm.
pub const BRANCH_MARGIN: f64 = 1e-3;

/// Subdivision depth for holonomies too close to the branch cut.
pub const MAX_SPLIT_DEPTH: usize = 8;

/// Parameter-dependent unitaries. Implementations must be stateless so that
/// path points can be evaluated concurrently.
pub trait UnitaryFamily: Sync {
    fn parameter_count(&self) -> usize;
    fn dim(&self) -> usize;
    fn evaluate(&self, lambda: &[f64]) -> Result<ComplexMatrix>;
}

fn check_point(fam: &dyn UnitaryFamily, lambda: &[f64]) -> Result<()> {
    if lambda.len() != fam.parameter_count() {
        return Err(Error::DimensionMismatch {
            expected: fam.parameter_count(),
            found: lambda.len(),
        });
    }
    Ok(())
}

/// `U(lambda) = exp(-i lambda_1 G_1) exp(-i lambda_2 G_2) ...`.
#[derive(Debug, Clone)]
pub struct ExponentialFamily {
    dim: usize,
    generators: Vec<HermitianEigen>,
}

impl ExponentialFamily {
    pub fn new(generators: &[ComplexMatrix]) -> Result<Self> {
        let first = generators
            .first()
            .ok_or(Error::DegenerateInput("no generators"))?;
        let dim = first.nrows();
        let generators = generators
            .iter()
            .map(|g| {
                if g.nrows() != dim || g.ncols() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: g.nrows(),
                    });
                }
                hermitian_eig(g)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dim, generators })
    }
}

impl UnitaryFamily for ExponentialFamily {
    fn parameter_count(&self) -> usize {
        self.generators.len()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, lambda: &[f64]) -> Result<ComplexMatrix> {
        check_point(self, lambda)?;
        Ok(self
            .generators
            .iter()
            .zip(lambda)
            .fold(identity(self.dim), |acc, (g, &t)| acc * exp_minus_i(g, t)))
    }
}

/// Unitaries tabulated on a rectangular grid, multilinearly interpolated and
/// projected back onto the unitary group.
#[derive(Debug, Clone)]
pub struct TabulatedFamily {
    dim: usize,
    axes: Vec<Vec<f64>>,
    /// Row-major over the axes, last axis fastest.
    values: Vec<ComplexMatrix>,
    tol: Tolerance,
}

impl TabulatedFamily {
    pub fn new(axes: Vec<Vec<f64>>, values: Vec<ComplexMatrix>, tol: &Tolerance) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::DegenerateInput("no grid axes"));
        }
        for axis in &axes {
            if axis.len() < 2 || axis.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::InvalidArgument(
                    "grid axes need at least two strictly increasing points".into(),
                ));
            }
        }
        let expected: usize = axes.iter().map(Vec::len).product();
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: values.len(),
            });
        }
        let dim = values[0].nrows();
        for v in &values {
            if v.nrows() != dim || v.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.nrows(),
                });
            }
            check_unitary(v, tol)?;
        }
        Ok(Self {
            dim,
            axes,
            values,
            tol: *tol,
        })
    }
}

impl UnitaryFamily for TabulatedFamily {
    fn parameter_count(&self) -> usize {
        self.axes.len()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, lambda: &[f64]) -> Result<ComplexMatrix> {
        check_point(self, lambda)?;
        let mut cells = Vec::with_capacity(self.axes.len());
        for (axis, &t) in self.axes.iter().zip(lambda) {
            let (lo, hi) = (axis[0], axis[axis.len() - 1]);
            if !(lo..=hi).contains(&t) {
                return Err(Error::InvalidArgument(format!(
                    "parameter {t} outside grid [{lo}, {hi}]"
                )));
            }
            let k = axis.partition_point(|&a| a <= t).clamp(1, axis.len() - 1) - 1;
            let w = (t - axis[k]) / (axis[k + 1] - axis[k]);
            cells.push((k, w));
        }
        let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
        for corner in 0..1usize << cells.len() {
            let mut weight = 1.0;
            let mut flat = 0;
            for (a, &(k, w)) in cells.iter().enumerate() {
                let up = corner >> (cells.len() - 1 - a) & 1 == 1;
                weight *= if up { w } else { 1.0 - w };
                flat = flat * self.axes[a].len() + k + usize::from(up);
            }
            if weight != 0.0 {
                acc += self.values[flat].scale(weight);
            }
        }
        polar_isometry(&acc, &self.tol)
    }
}

/// `X = 1_n (x) diag(x)` with `d` distinct eigenvalues, each of
/// multiplicity `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsoDegenerateOperator {
    n: usize,
    eigenvalues: Vec<f64>,
}

impl IsoDegenerateOperator {
    pub fn new(n: usize, eigenvalues: Vec<f64>) -> Result<Self> {
        if n == 0 || eigenvalues.is_empty() {
            return Err(Error::DegenerateInput("empty iso-degenerate spectrum"));
        }
        for (a, x) in eigenvalues.iter().enumerate() {
            if !x.is_finite() || eigenvalues[..a].contains(x) {
                return Err(Error::InvalidArgument(format!(
                    "eigenvalues must be finite and distinct, got {eigenvalues:?}"
                )));
            }
        }
        Ok(Self { n, eigenvalues })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.n * self.d()
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let diag = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.d(),
            self.eigenvalues.iter().map(|&x| C64::new(x, 0.0)),
        ));
        kron(&identity(self.n), &diag)
    }

    /// `X(lambda) = U X U^dagger`.
    pub fn transported(&self, u: &ComplexMatrix) -> ComplexMatrix {
        u * self.matrix() * u.adjoint()
    }
}

/// Reference basis of the eigenspace `C_i` of `1_n (x) diag(x)`: columns
/// `k d + i` for `k < n`.
pub fn eigenspace_basis(dim: usize, n: usize, i: usize) -> Result<ComplexMatrix> {
    if n == 0 || dim % n != 0 {
        return Err(Error::InvalidArgument(format!(
            "degeneracy {n} does not divide dimension {dim}"
        )));
    }
    let d = dim / n;
    if i >= d {
        return Err(Error::IndexOutOfRange { index: i, len: d });
    }
    let mut e = ComplexMatrix::zeros(dim, n);
    for k in 0..n {
        e[(k * d + i, k)] = ONE;
    }
    Ok(e)
}

/// Connection components on `C_i`, anti-Hermitian.
#[derive(Debug, Clone)]
pub struct Connection {
    pub components: Vec<ComplexMatrix>,
    /// Largest Hermitian part removed from a finite-difference component.
    pub defect: f64,
}

fn evaluate_unitary(fam: &dyn UnitaryFamily, lambda: &[f64], tol: &Tolerance) -> Result<ComplexMatrix> {
    let u = fam.evaluate(lambda)?;
    check_unitary(&u, tol)?;
    Ok(u)
}

/// `A_mu = E_i^dagger U^dagger dU/dlambda_mu E_i` by central differences.
pub fn connection_at(
    fam: &dyn UnitaryFamily,
    lambda: &[f64],
    i: usize,
    n: usize,
    step: f64,
    tol: &Tolerance,
) -> Result<Connection> {
    check_point(fam, lambda)?;
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    let e = eigenspace_basis(fam.dim(), n, i)?;
    let u = evaluate_unitary(fam, lambda, tol)?;
    let left = e.adjoint() * u.adjoint();
    let mut components = Vec::with_capacity(lambda.len());
    let mut defect: f64 = 0.0;
    for mu in 0..lambda.len() {
        let mut plus = lambda.to_vec();
        let mut minus = lambda.to_vec();
        plus[mu] += step;
        minus[mu] -= step;
        let du = (evaluate_unitary(fam, &plus, tol)? - evaluate_unitary(fam, &minus, tol)?)
            .unscale(2.0 * step);
        let a = &left * du * &e;
        let anti = (&a - a.adjoint()).unscale(2.0);
        defect = defect.max(max_abs(&(&a - &anti)));
        components.push(anti);
    }
    Ok(Connection { components, defect })
}

/// Closed polygonal path in parameter space; each segment is subdivided into
/// `refinement` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopPath {
    waypoints: Vec<Vec<f64>>,
    refinement: usize,
}

impl LoopPath {
    pub fn new(waypoints: Vec<Vec<f64>>, refinement: usize) -> Result<Self> {
        if waypoints.len() < 3 {
            return Err(Error::InvalidArgument(format!(
                "a loop needs at least 3 waypoints, got {}",
                waypoints.len()
            )));
        }
        if waypoints.first() != waypoints.last() {
            return Err(Error::InvalidArgument("loop is not closed".into()));
        }
        let d = waypoints[0].len();
        if waypoints.iter().any(|w| w.len() != d) {
            return Err(Error::InvalidArgument("waypoints differ in dimension".into()));
        }
        if refinement == 0 {
            return Err(Error::InvalidArgument("refinement must be at least 1".into()));
        }
        Ok(Self {
            waypoints,
            refinement,
        })
    }

    /// The constant loop at `point`.
    pub fn degenerate(point: Vec<f64>, refinement: usize) -> Result<Self> {
        Self::new(vec![point; 3], refinement)
    }

    /// Rectangle from `base` along axis `mu` by `width`, then along `nu` by
    /// `height`, and back.
    pub fn rectangle(
        base: &[f64],
        (mu, width): (usize, f64),
        (nu, height): (usize, f64),
        refinement: usize,
    ) -> Result<Self> {
        if mu >= base.len() || nu >= base.len() {
            return Err(Error::IndexOutOfRange {
                index: mu.max(nu),
                len: base.len(),
            });
        }
        let mut corners = vec![base.to_vec(); 5];
        corners[1][mu] += width;
        corners[2][mu] += width;
        corners[2][nu] += height;
        corners[3][nu] += height;
        Self::new(corners, refinement)
    }

    pub fn waypoints(&self) -> &[Vec<f64>] {
        &self.waypoints
    }

    pub fn refinement(&self) -> usize {
        self.refinement
    }

    pub fn base(&self) -> &[f64] {
        &self.waypoints[0]
    }

    pub fn with_refinement(&self, refinement: usize) -> Result<Self> {
        Self::new(self.waypoints.clone(), refinement)
    }

    pub fn reversed(&self) -> Self {
        let mut waypoints = self.waypoints.clone();
        waypoints.reverse();
        Self {
            waypoints,
            refinement: self.refinement,
        }
    }

    /// Traverses `self`, then `next`. Both loops must share the base point;
    /// the finer refinement is kept.
    pub fn then(&self, next: &LoopPath) -> Result<Self> {
        if self.base() != next.base() {
            return Err(Error::InvalidArgument("loops do not share a base point".into()));
        }
        let mut waypoints = self.waypoints.clone();
        waypoints.extend(next.waypoints[1..].iter().cloned());
        Self::new(waypoints, self.refinement.max(next.refinement))
    }

    /// Subdivided path, first point repeated at the end.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity((self.waypoints.len() - 1) * self.refinement + 1);
        for w in self.waypoints.windows(2) {
            for s in 0..self.refinement {
                let t = s as f64 / self.refinement as f64;
                out.push(w[0].iter().zip(&w[1]).map(|(a, b)| a + t * (b - a)).collect());
            }
        }
        out.push(self.waypoints[0].clone());
        out
    }
}

fn frames(
    fam: &dyn UnitaryFamily,
    points: &[Vec<f64>],
    e: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<Vec<ComplexMatrix>> {
    points
        .par_iter()
        .map(|p| {
            check_point(fam, p)?;
            Ok(evaluate_unitary(fam, p, tol)? * e)
        })
        .collect()
}

fn wilson_loop(frames: &[ComplexMatrix], tol: &Tolerance) -> Result<ComplexMatrix> {
    let n = frames[0].ncols();
    let mut h = identity(n);
    for (step, w) in frames.windows(2).enumerate() {
        let overlap = w[1].adjoint() * &w[0];
        let sigma = singular_values(&overlap).last().copied().unwrap_or(0.0);
        if sigma < OVERLAP_FLOOR {
            return Err(Error::PathSingularity { step, sigma });
        }
        h = polar_isometry(&overlap, tol)? * h;
    }
    check_unitary(&h, tol)?;
    Ok(h)
}

fn holonomy_along(
    fam: &dyn UnitaryFamily,
    points: &[Vec<f64>],
    i: usize,
    n: usize,
    tol: &Tolerance,
) -> Result<ComplexMatrix> {
    let e = eigenspace_basis(fam.dim(), n, i)?;
    wilson_loop(&frames(fam, points, &e, tol)?, tol)
}

/// Holonomy of `C_i` around the loop, in the reference basis of `C_i`.
pub fn loop_holonomy(
    fam: &dyn UnitaryFamily,
    lp: &LoopPath,
    i: usize,
    n: usize,
    tol: &Tolerance,
) -> Result<ComplexMatrix> {
    holonomy_along(fam, &lp.points(), i, n, tol)
}

/// [`loop_holonomy`] computed from eigenvectors of `X(lambda)` found by the
/// eigensolver instead of from `U_lambda E_i`, then expressed in the
/// reference basis at the base point. Only the eigenspace split of `x`
/// enters, not the eigenvalues themselves.
pub fn loop_holonomy_spectral(
    fam: &dyn UnitaryFamily,
    x: &IsoDegenerateOperator,
    lp: &LoopPath,
    i: usize,
    tol: &Tolerance,
) -> Result<ComplexMatrix> {
    if x.dim() != fam.dim() {
        return Err(Error::DimensionMismatch {
            expected: fam.dim(),
            found: x.dim(),
        });
    }
    if i >= x.d() {
        return Err(Error::IndexOutOfRange { index: i, len: x.d() });
    }
    // rank of x_i among the sorted eigenvalues picks the cluster
    let rank = x.eigenvalues().iter().filter(|&&v| v < x.eigenvalues()[i]).count();
    let points = lp.points();
    let spectral: Vec<ComplexMatrix> = points
        .par_iter()
        .map(|p| {
            let u = evaluate_unitary(fam, p, tol)?;
            let eig = hermitian_eig(&crate::numerics::hermitian_part(&x.transported(&u)))?;
            let clusters = cluster_eigenvalues(&eig.values, tol);
            if clusters.len() != x.d() || clusters.iter().any(|c| c.len() != x.n()) {
                return Err(Error::ToleranceCheck(format!(
                    "spectrum of X(lambda) does not split into {} clusters of size {}",
                    x.d(),
                    x.n()
                )));
            }
            Ok(eig.subspace(clusters[rank].clone()))
        })
        .collect::<Result<_>>()?;
    let h = wilson_loop(&spectral, tol)?;
    let reference = evaluate_unitary(fam, lp.base(), tol)? * eigenspace_basis(fam.dim(), x.n(), i)?;
    let change = reference.adjoint() * &spectral[0];
    Ok(&change * h * change.adjoint())
}

/// One rung of a refinement ladder.
#[derive(Debug, Clone)]
pub struct RefinementStep {
    pub refinement: usize,
    pub holonomy: ComplexMatrix,
    pub unitarity_defect: f64,
    /// Frobenius distance to the next rung's holonomy.
    pub defect_to_next: Option<f64>,
}

/// Holonomies of the same loop at each refinement in `levels`.
pub fn refinement_ladder(
    fam: &dyn UnitaryFamily,
    lp: &LoopPath,
    i: usize,
    n: usize,
    levels: &[usize],
    tol: &Tolerance,
) -> Result<Vec<RefinementStep>> {
    let holonomies = levels
        .par_iter()
        .map(|&r| loop_holonomy(fam, &lp.with_refinement(r)?, i, n, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(levels
        .iter()
        .enumerate()
        .map(|(k, &refinement)| RefinementStep {
            refinement,
            unitarity_defect: unitarity_defect(&holonomies[k]),
            defect_to_next: holonomies.get(k + 1).map(|next| (next - &holonomies[k]).norm()),
            holonomy: holonomies[k].clone(),
        })
        .collect())
}

/// `||H_1 H_2 - H_2 H_1||` for two loops with a common base point.
pub fn holonomy_nonabelian_witness(
    fam: &dyn UnitaryFamily,
    loop1: &LoopPath,
    loop2: &LoopPath,
    i: usize,
    n: usize,
    tol: &Tolerance,
) -> Result<f64> {
    if loop1.base() != loop2.base() {
        return Err(Error::InvalidArgument("loops do not share a base point".into()));
    }
    let (h1, h2) = rayon::join(
        || loop_holonomy(fam, loop1, i, n, tol),
        || loop_holonomy(fam, loop2, i, n, tol),
    );
    let (h1, h2) = (h1?, h2?);
    Ok((&h1 * &h2 - &h2 * &h1).norm())
}

/// Principal logarithm of a unitary as an anti-Hermitian matrix, with
/// eigenphases in `(-pi, pi]`. Also returns the distance of the nearest
/// eigenvalue to `-1`.
pub fn unitary_log(u: &ComplexMatrix, tol: &Tolerance) -> Result<(ComplexMatrix, f64)> {
    check_unitary(u, tol)?;
    let (q, t) = Schur::new(u.clone()).unpack();
    let n = u.nrows();
    let mut phases = ComplexMatrix::zeros(n, n);
    let mut margin = f64::INFINITY;
    for k in 0..n {
        let z = t[(k, k)];
        margin = margin.min((z + ONE).norm());
        phases[(k, k)] = I * z.arg();
    }
    let log = &q * phases * q.adjoint();
    Ok(((&log - log.adjoint()).unscale(2.0), margin))
}

/// Outcome of [`holonomy_algebra_span`].
#[derive(Debug, Clone)]
pub struct LieSpan {
    /// Dimension of the real Lie algebra generated by the logarithms.
    pub dimension: usize,
    /// Independent logarithms before commutator closure.
    pub log_rank: usize,
    /// Orthonormal anti-Hermitian basis of the span.
    pub basis: Vec<ComplexMatrix>,
    /// Loop subdivisions needed to stay off the branch cut.
    pub splits: usize,
}

impl LieSpan {
    pub fn is_universal(&self, n: usize) -> bool {
        self.dimension == n * n
    }
}

// sub-loops sharing base point whose holonomies multiply back to the
// original, joined along the straight chord to the midpoint
fn split_points(points: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mid = points.len() / 2;
    let base = &points[0];
    let apex = &points[mid];
    let spacing = points
        .windows(2)
        .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let length = base.iter().zip(apex).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let steps = ((length / spacing).ceil() as usize).max(1);
    let chord = |from: &[f64], to: &[f64]| -> Vec<Vec<f64>> {
        (1..steps)
            .map(|s| {
                let t = s as f64 / steps as f64;
                from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
            })
            .collect()
    };
    let mut first = points[..=mid].to_vec();
    first.extend(chord(apex, base));
    first.push(base.clone());
    let mut second = vec![base.clone()];
    second.extend(chord(base, apex));
    second.extend(points[mid..].iter().cloned());
    (first, second)
}

fn densify(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * points.len());
    for w in points.windows(2) {
        out.push(w[0].clone());
        out.push(w[0].iter().zip(&w[1]).map(|(a, b)| 0.5 * (a + b)).collect());
    }
    out.push(points[points.len() - 1].clone());
    out
}

fn loop_logs(
    fam: &dyn UnitaryFamily,
    points: &[Vec<f64>],
    i: usize,
    n: usize,
    depth: usize,
    tol: &Tolerance,
) -> Result<(Vec<ComplexMatrix>, usize)> {
    let h = holonomy_along(fam, points, i, n, tol)?;
    let (log, margin) = unitary_log(&h, tol)?;
    if margin >= BRANCH_MARGIN {
        return Ok((vec![log], 0));
    }
    if depth == MAX_SPLIT_DEPTH {
        return Err(Error::BranchCut { attempts: depth });
    }
    let points = if points.len() < 5 {
        densify(points)
    } else {
        points.to_vec()
    };
    let (first, second) = split_points(&points);
    let (a, b) = rayon::join(
        || loop_logs(fam, &first, i, n, depth + 1, tol),
        || loop_logs(fam, &second, i, n, depth + 1, tol),
    );
    let (mut a, sa) = a?;
    let (b, sb) = b?;
    a.extend(b);
    Ok((a, sa + sb + 1))
}

// real Gram-Schmidt on anti-Hermitian matrices; the candidate survives when
// its residual exceeds resid_abs times `scale`
fn push_real(basis: &mut Vec<ComplexMatrix>, op: &ComplexMatrix, scale: f64, tol: &Tolerance) -> bool {
    if scale <= tol.resid_abs {
        return false;
    }
    let mut r = op.clone();
    for _ in 0..2 {
        for b in basis.iter() {
            let c = crate::numerics::hs_inner(b, &r).re;
            r -= b.scale(c);
        }
    }
    let rn = r.norm();
    if rn <= tol.resid_abs * scale {
        return false;
    }
    basis.push(r.unscale(rn));
    true
}

/// Dimension of the Lie algebra generated by the principal logarithms of the
/// loop holonomies. Loops whose holonomy has an eigenvalue within
/// [`BRANCH_MARGIN`] of `-1` are split into two sub-loops along a chord, up
/// to [`MAX_SPLIT_DEPTH`] times.
pub fn holonomy_algebra_span(
    fam: &dyn UnitaryFamily,
    loops: &[LoopPath],
    i: usize,
    n: usize,
    tol: &Tolerance,
) -> Result<LieSpan> {
    if loops.is_empty() {
        return Err(Error::DegenerateInput("no loops"));
    }
    let per_loop = loops
        .par_iter()
        .map(|lp| loop_logs(fam, &lp.points(), i, n, 0, tol))
        .collect::<Result<Vec<_>>>()?;
    let mut basis: Vec<ComplexMatrix> = Vec::new();
    let mut splits = 0;
    for (logs, s) in per_loop {
        splits += s;
        for log in logs {
            let norm = log.norm();
            push_real(&mut basis, &log, norm, tol);
        }
    }
    let log_rank = basis.len();
    let mut done = 0;
    while done < basis.len() && basis.len() < n * n {
        let current = basis.len();
        for a in 0..current {
            for b in done.max(a + 1)..current {
                let c = &basis[a] * &basis[b] - &basis[b] * &basis[a];
                let c = (&c - c.adjoint()).unscale(2.0);
                push_real(&mut basis, &c, 1.0, tol);
            }
        }
        done = current;
    }
    Ok(LieSpan {
        dimension: basis.len(),
        log_rank,
        basis,
        splits,
    })
}
