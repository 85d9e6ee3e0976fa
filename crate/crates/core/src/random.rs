//! Seeded random ensembles: complex Gaussian vectors, GUE-style Hermitian
//! matrices and Haar unitaries.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::numerics::{ComplexMatrix, C64};

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-distributed unit vector on `C^dim`, as a column.
pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let v = random_matrix(dim, 1, rng);
    let n = v.norm();
    v.unscale(n)
}

pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = random_matrix(dim, dim, rng);
    (&g + g.adjoint()).scale(0.5)
}

/// Haar unitary: QR of a Ginibre matrix with the phases of `R`'s diagonal
/// absorbed into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let qr = random_matrix(dim, dim, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}
