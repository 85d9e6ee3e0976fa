//! Truncated Fock spaces of `N` bosonic modes and rotated mode families.
//!
//! The space keeps every occupation tuple with total excitation at most `M`.
//! Basis order is graded: by total excitation first, then descending
//! lexicographic within a grade, so two modes at `M = 1` give
//! `|00>, |10>, |01>`.
//!
//! Lowering operators are exact everywhere. Raising operators lose the
//! component leaving the space, so the commutation relations
//! `[a_i, a_j^dagger] = delta_ij` only hold on tuples with total at most
//! `M - 1`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::numerics::{check_unitary, max_abs, ComplexMatrix, Tolerance, C64, ONE, ZERO};
use crate::tps::{check_normalized, product_basis_entanglement, EntanglementMeasure};

pub const DEFAULT_DIMENSION_CAP: usize = 4096;

/// Largest commutation-relation residual accepted by [`transform_modes`].
pub const CCR_LIMIT: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct FockSpace {
    modes: usize,
    cutoff: usize,
    basis: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
    lowering: Vec<ComplexMatrix>,
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    let k = k.min(n - k);
    (0..k).try_fold(1usize, |acc, i| acc.checked_mul(n - i).map(|v| v / (i + 1)))
}

// all tuples of length `modes` summing to `total`, first entry descending
fn compositions(modes: usize, total: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if modes == 1 {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=total).rev() {
        prefix.push(first);
        compositions(modes - 1, total - first, prefix, out);
        prefix.pop();
    }
}

/// [`build_fock_capped`] with [`DEFAULT_DIMENSION_CAP`].
pub fn build_fock(modes: usize, cutoff: usize) -> Result<FockSpace> {
    build_fock_capped(modes, cutoff, DEFAULT_DIMENSION_CAP)
}

pub fn build_fock_capped(modes: usize, cutoff: usize, cap: usize) -> Result<FockSpace> {
    if modes == 0 || cutoff == 0 {
        return Err(Error::InvalidArgument(format!(
            "need at least one mode and cutoff >= 1, got N={modes}, M={cutoff}"
        )));
    }
    let dim = modes
        .checked_add(cutoff)
        .and_then(|n| binomial(n, modes))
        .unwrap_or(usize::MAX);
    if dim > cap {
        return Err(Error::SizeCap { dim, cap });
    }
    let mut basis = Vec::with_capacity(dim);
    for total in 0..=cutoff {
        compositions(modes, total, &mut Vec::with_capacity(modes), &mut basis);
    }
    debug_assert_eq!(basis.len(), dim);
    let index: HashMap<Vec<usize>, usize> =
        basis.iter().enumerate().map(|(k, m)| (m.clone(), k)).collect();
    let lowering = (0..modes)
        .map(|i| {
            let mut a = ComplexMatrix::zeros(dim, dim);
            for (col, m) in basis.iter().enumerate() {
                if m[i] > 0 {
                    let mut lower = m.clone();
                    lower[i] -= 1;
                    a[(index[&lower], col)] = C64::new((m[i] as f64).sqrt(), 0.0);
                }
            }
            a
        })
        .collect();
    Ok(FockSpace {
        modes,
        cutoff,
        basis,
        index,
        lowering,
    })
}

impl FockSpace {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<usize>] {
        &self.basis
    }

    pub fn index_of(&self, occupation: &[usize]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    pub fn annihilation(&self, i: usize) -> &ComplexMatrix {
        &self.lowering[i]
    }

    pub fn annihilators(&self) -> &[ComplexMatrix] {
        &self.lowering
    }

    pub fn number(&self, i: usize) -> ComplexMatrix {
        let a = &self.lowering[i];
        a.adjoint() * a
    }

    pub fn vacuum(&self) -> ComplexMatrix {
        self.basis_state(0)
    }

    pub fn basis_state(&self, k: usize) -> ComplexMatrix {
        let mut v = ComplexMatrix::zeros(self.dim(), 1);
        v[k] = ONE;
        v
    }

    /// Basis positions with total excitation at most `M - 1`.
    pub fn safe_indices(&self) -> Vec<usize> {
        (0..self.dim())
            .filter(|&k| self.basis[k].iter().sum::<usize>() < self.cutoff)
            .collect()
    }
}

/// Annihilators of the rotated modes `a_i^U = sum_j U_ji a_j`.
#[derive(Debug, Clone)]
pub struct ModeSet {
    fock: FockSpace,
    u: ComplexMatrix,
    transformed: Vec<ComplexMatrix>,
    ccr_residual: f64,
}

fn rotate(ops: &[ComplexMatrix], u: &ComplexMatrix) -> Vec<ComplexMatrix> {
    (0..u.ncols())
        .map(|i| {
            ops.iter()
                .enumerate()
                .fold(ComplexMatrix::zeros(ops[0].nrows(), ops[0].ncols()), |acc, (j, a)| {
                    acc + a * u[(j, i)]
                })
        })
        .collect()
}

fn check_mode_unitary(fock: &FockSpace, u: &ComplexMatrix, tol: &Tolerance) -> Result<()> {
    if u.nrows() != fock.modes || u.ncols() != fock.modes {
        return Err(Error::DimensionMismatch {
            expected: fock.modes,
            found: u.nrows().max(u.ncols()),
        });
    }
    check_unitary(u, tol)
}

/// Largest violation of `[a_i, a_j] = 0` on the whole space and of
/// `[a_i, a_j^dagger] = delta_ij` on the columns of total excitation below the
/// cutoff.
pub fn ccr_residual(fock: &FockSpace, ops: &[ComplexMatrix]) -> f64 {
    let safe = fock.safe_indices();
    let mut worst: f64 = 0.0;
    for (i, a) in ops.iter().enumerate() {
        for (j, b) in ops.iter().enumerate() {
            worst = worst.max(max_abs(&(a * b - b * a)));
            let bd = b.adjoint();
            let c = a * &bd - &bd * a;
            for &col in &safe {
                for row in 0..fock.dim() {
                    let target = if i == j && row == col { ONE } else { ZERO };
                    worst = worst.max((c[(row, col)] - target).norm());
                }
            }
        }
    }
    worst
}

pub fn transform_modes(fock: &FockSpace, u: &ComplexMatrix, tol: &Tolerance) -> Result<ModeSet> {
    check_mode_unitary(fock, u, tol)?;
    let transformed = rotate(&fock.lowering, u);
    ModeSet::checked(fock.clone(), u.clone(), transformed)
}

impl ModeSet {
    fn checked(fock: FockSpace, u: ComplexMatrix, transformed: Vec<ComplexMatrix>) -> Result<Self> {
        let ccr_residual = ccr_residual(&fock, &transformed);
        if ccr_residual >= CCR_LIMIT {
            return Err(Error::ToleranceCheck(format!(
                "rotated modes violate the commutation relations by {ccr_residual:e}"
            )));
        }
        Ok(Self {
            fock,
            u,
            transformed,
            ccr_residual,
        })
    }

    pub fn fock(&self) -> &FockSpace {
        &self.fock
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.u
    }

    pub fn transformed(&self) -> &[ComplexMatrix] {
        &self.transformed
    }

    pub fn ccr_residual(&self) -> f64 {
        self.ccr_residual
    }

    /// Rotates the already rotated modes by `v`; the result is the mode set
    /// of `U V`.
    pub fn compose(&self, v: &ComplexMatrix, tol: &Tolerance) -> Result<ModeSet> {
        check_mode_unitary(&self.fock, v, tol)?;
        let transformed = rotate(&self.transformed, v);
        ModeSet::checked(self.fock.clone(), &self.u * v, transformed)
    }

    /// `prod_j (a_j^U dagger)^{m_j} / sqrt(m_j!) |0>` for each basis tuple
    /// `m`, as the columns of a unitary. Exact on the truncated space since
    /// no product ever raises past the cutoff.
    pub fn occupation_frame(&self) -> ComplexMatrix {
        let dim = self.fock.dim();
        let raising: Vec<ComplexMatrix> = self.transformed.iter().map(|a| a.adjoint()).collect();
        let mut frame = ComplexMatrix::zeros(dim, dim);
        for (col, m) in self.fock.basis.iter().enumerate() {
            let mut v = self.fock.vacuum();
            for (j, &mj) in m.iter().enumerate() {
                for k in 1..=mj {
                    v = (&raising[j] * v).unscale((k as f64).sqrt());
                }
            }
            frame.set_column(col, &v.column(0));
        }
        frame
    }
}

/// `a_i^U dagger |0>`, normalized. Mode indices are 0-based.
pub fn single_excitation_state(ms: &ModeSet, i: usize) -> Result<ComplexMatrix> {
    if i >= ms.fock.modes {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: ms.fock.modes,
        });
    }
    let v = ms.transformed[i].adjoint() * ms.fock.vacuum();
    let norm = v.norm();
    Ok(v.unscale(norm))
}

/// Entanglement across a cut of the rotated modes, with the state read in
/// per-mode occupation coordinates `(C^{M+1})^{(x) N}`. The identity rotation
/// gives the reference modes.
///
/// Fails with [`Error::TruncationBoundary`] when the state carries more than
/// `resid_abs` weight on total excitation `M`, where the truncated ladder no
/// longer matches the untruncated one.
pub fn mode_entanglement(
    state: &ComplexMatrix,
    ms: &ModeSet,
    measure: &EntanglementMeasure,
    tol: &Tolerance,
) -> Result<f64> {
    let fock = &ms.fock;
    check_normalized(state, fock.dim())?;
    let weight: f64 = fock
        .basis
        .iter()
        .zip(state.iter())
        .filter(|(m, _)| m.iter().sum::<usize>() == fock.cutoff)
        .map(|(_, c)| c.norm_sqr())
        .sum();
    if weight > tol.resid_abs {
        return Err(Error::TruncationBoundary {
            weight,
            cutoff: fock.cutoff,
        });
    }
    let coords = ms.occupation_frame().adjoint() * state;
    let local = fock.cutoff + 1;
    let dims = vec![local; fock.modes];
    let mut product = vec![ZERO; local.pow(fock.modes as u32)];
    for (m, c) in fock.basis.iter().zip(coords.iter()) {
        let k = m.iter().fold(0, |acc, &mj| acc * local + mj);
        product[k] = *c;
    }
    product_basis_entanglement(&product, &dims, measure)
}
