//! Tensor product structures over `C^n` and entanglement relative to them.
//!
//! A [`Tps`] pairs a factor-dimension list with a unitary `iso` sending
//! product-basis coordinates on `(x)_i C^{n_i}` to the state space. A state is
//! entangled or not only relative to such a choice; the same vector can be a
//! product in one structure and maximally entangled in another.

use itertools::Itertools;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::OperatorAlgebra;
use crate::error::{Error, Result};
use crate::numerics::{
    check_square, check_unitary, hermitian_eig, hermitian_matrix_basis, identity, kron_all,
    state_matrix, ComplexMatrix, Tolerance,
};
use crate::ops::embed;
use crate::random::random_state;

/// Reduced-density eigenvalues at or below this weight are treated as zero.
pub const SCHMIDT_FLOOR: f64 = 1e-14;

/// Product-state samples drawn per RNG stream in [`entangling_power`].
pub const SAMPLES_PER_STREAM: usize = 256;

/// Every multiplicative partition of `n` into factors `>= 2`.
///
/// Each partition is ascending; the list is ordered by factor count, then
/// lexicographically. The singleton `[n]` is always first.
pub fn multiplicative_partitions(n: u64) -> Result<Vec<Vec<u64>>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "multiplicative partitions need n >= 2, got {n}"
        )));
    }
    fn descend(rest: u64, min: u64, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        let mut f = min;
        while f * f <= rest {
            if rest % f == 0 {
                prefix.push(f);
                descend(rest / f, f, prefix, out);
                prefix.pop();
            }
            f += 1;
        }
        let mut done = prefix.clone();
        done.push(rest);
        out.push(done);
    }
    let mut out = Vec::new();
    descend(n, 2, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(out)
}

/// A tensor product structure: `iso` maps `(x)_i C^{dims[i]}` onto the state
/// space, first factor in the most significant slot.
#[derive(Debug, Clone)]
pub struct Tps {
    dims: Vec<usize>,
    iso: ComplexMatrix,
}

impl Tps {
    pub fn new(dims: Vec<usize>, iso: ComplexMatrix, tol: &Tolerance) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d < 2) {
            return Err(Error::InvalidArgument(format!(
                "factor dimensions must all be >= 2, got {dims:?}"
            )));
        }
        let total: usize = dims.iter().product();
        let n = check_square(&iso)?;
        if n != total {
            return Err(Error::DimensionMismatch {
                expected: total,
                found: n,
            });
        }
        check_unitary(&iso, tol)?;
        Ok(Self { dims, iso })
    }

    /// The structure in which the computational basis is the product basis.
    pub fn natural(dims: Vec<usize>) -> Result<Self> {
        let total = dims.iter().product();
        Self::new(dims, identity(total), &Tolerance::default())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn iso(&self) -> &ComplexMatrix {
        &self.iso
    }

    pub fn dim(&self) -> usize {
        self.iso.nrows()
    }

    pub fn factor_count(&self) -> usize {
        self.dims.len()
    }

    /// The structure transported by `u`: `iso -> u iso`.
    pub fn transported(&self, u: &ComplexMatrix, tol: &Tolerance) -> Result<Self> {
        Self::new(self.dims.clone(), u * &self.iso, tol)
    }

    /// Coordinates of `state` in the product basis.
    pub fn pull_back(&self, state: &ComplexMatrix) -> ComplexMatrix {
        self.iso.adjoint() * state
    }
}

/// The algebra of operators acting on factor `i` alone, `iso (1 (x) M_{n_i} (x) 1) iso^dagger`.
pub fn local_algebra(tps: &Tps, i: usize, tol: &Tolerance) -> Result<OperatorAlgebra> {
    if i >= tps.dims.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: tps.dims.len(),
        });
    }
    let ops = hermitian_matrix_basis(tps.dims[i])
        .iter()
        .map(|h| embed(h, &tps.dims, i).map(|e| &tps.iso * e * tps.iso.adjoint()))
        .collect::<Result<Vec<_>>>()?;
    OperatorAlgebra::from_spanning(tps.dim(), &ops, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureKind {
    /// Von Neumann entropy of the reduced state, in bits.
    VonNeumann,
    /// `1 - Tr(rho_A^2)`.
    Linear,
}

/// An entropy of the reduced state on the factors listed in `cut`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntanglementMeasure {
    pub kind: MeasureKind,
    pub cut: Vec<usize>,
}

impl EntanglementMeasure {
    pub fn new(kind: MeasureKind, cut: Vec<usize>) -> Self {
        Self { kind, cut }
    }

    pub fn von_neumann(cut: Vec<usize>) -> Self {
        Self::new(MeasureKind::VonNeumann, cut)
    }

    fn validate(&self, factors: usize) -> Result<()> {
        let unique = self.cut.iter().unique().count() == self.cut.len();
        if self.cut.is_empty() || self.cut.len() >= factors || !unique {
            return Err(Error::InvalidArgument(format!(
                "cut {:?} is not a nonempty proper subset of {factors} factors",
                self.cut
            )));
        }
        if let Some(&i) = self.cut.iter().find(|&&i| i >= factors) {
            return Err(Error::IndexOutOfRange { index: i, len: factors });
        }
        Ok(())
    }
}

/// Entropy of the spectrum of a density matrix, with weights at or below
/// [`SCHMIDT_FLOOR`] discarded and the rest renormalized.
pub fn spectrum_entropy(rho: &ComplexMatrix, kind: MeasureKind) -> Result<f64> {
    let eig = hermitian_eig(rho)?;
    let kept: Vec<f64> = eig.values.into_iter().filter(|&p| p > SCHMIDT_FLOOR).collect();
    if kept.len() <= 1 {
        return Ok(0.0);
    }
    let total: f64 = kept.iter().sum();
    let value = match kind {
        MeasureKind::VonNeumann => kept
            .iter()
            .map(|p| {
                let p = p / total;
                -p * p.log2()
            })
            .sum::<f64>(),
        MeasureKind::Linear => 1.0 - kept.iter().map(|p| (p / total).powi(2)).sum::<f64>(),
    };
    Ok(value.max(0.0))
}

/// Entanglement across a cut of factors of a state given in product-basis
/// coordinates.
pub fn product_basis_entanglement(
    coords: &[crate::C64],
    dims: &[usize],
    measure: &EntanglementMeasure,
) -> Result<f64> {
    measure.validate(dims.len())?;
    let psi = state_matrix(coords, dims, &measure.cut)?;
    let rho = if psi.nrows() <= psi.ncols() {
        &psi * psi.adjoint()
    } else {
        psi.adjoint() * &psi
    };
    spectrum_entropy(&rho, measure.kind)
}

pub(crate) fn check_normalized(state: &ComplexMatrix, dim: usize) -> Result<()> {
    if state.ncols() != 1 || state.nrows() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: state.nrows(),
        });
    }
    let norm = state.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm });
    }
    Ok(())
}

/// Entanglement of a unit state relative to `tps`.
pub fn entanglement(state: &ComplexMatrix, tps: &Tps, measure: &EntanglementMeasure) -> Result<f64> {
    check_normalized(state, tps.dim())?;
    let coords = tps.pull_back(state);
    product_basis_entanglement(coords.as_slice(), &tps.dims, measure)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntanglingPowerEstimate {
    pub mean: f64,
    /// Sample standard deviation over the square root of the sample count.
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Monte Carlo average of `E(U psi)` over Haar-random product states `psi` of
/// `tps`.
///
/// Samples are drawn in chunks of [`SAMPLES_PER_STREAM`], chunk `w` from
/// ChaCha stream `w` of `seed`, and reduced in chunk order, so the estimate is
/// reproducible bit for bit regardless of thread count.
pub fn entangling_power(
    u: &ComplexMatrix,
    tps: &Tps,
    measure: &EntanglementMeasure,
    samples: usize,
    seed: u64,
    tol: &Tolerance,
) -> Result<EntanglingPowerEstimate> {
    if samples == 0 {
        return Err(Error::ZeroSamples);
    }
    let n = check_square(u)?;
    if n != tps.dim() {
        return Err(Error::DimensionMismatch {
            expected: tps.dim(),
            found: n,
        });
    }
    check_unitary(u, tol)?;
    measure.validate(tps.factor_count())?;
    // U acts in the state space; work directly in product coordinates
    let pulled = tps.iso.adjoint() * u * &tps.iso;
    let chunks = samples.div_ceil(SAMPLES_PER_STREAM);
    let values: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|w| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(w as u64);
            let count = SAMPLES_PER_STREAM.min(samples - w * SAMPLES_PER_STREAM);
            (0..count)
                .map(|_| {
                    let factors: Vec<ComplexMatrix> =
                        tps.dims.iter().map(|&d| random_state(d, &mut rng)).collect();
                    let out = &pulled * kron_all(&factors);
                    product_basis_entanglement(out.as_slice(), &tps.dims, measure)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = values.into_iter().flatten().collect();
    let count = values.len() as f64;
    let mean = values.iter().sum::<f64>() / count;
    let stderr = if values.len() > 1 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0);
        (var / count).sqrt()
    } else {
        0.0
    };
    Ok(EntanglingPowerEstimate {
        mean,
        stderr,
        samples,
        seed,
    })
}

/// Distance of the structure transported by `u_lambda` from `tps`: the square
/// root of the entangling power.
pub fn tps_distance(
    u_lambda: &ComplexMatrix,
    tps: &Tps,
    measure: &EntanglementMeasure,
    samples: usize,
    seed: u64,
    tol: &Tolerance,
) -> Result<f64> {
    entangling_power(u_lambda, tps, measure, samples, seed, tol).map(|e| e.mean.sqrt())
}

/// Finds a permutation `pi` of equal-dimension factors such that factor `i`
/// of `t1` and factor `pi[i]` of `t2` induce the same local algebra.
///
/// Returns `None` when the dimension multisets differ or no permutation
/// matches.
pub fn tps_equivalent(t1: &Tps, t2: &Tps, tol: &Tolerance) -> Result<Option<Vec<usize>>> {
    if t1.dim() != t2.dim() {
        return Err(Error::DimensionMismatch {
            expected: t1.dim(),
            found: t2.dim(),
        });
    }
    let sorted = |t: &Tps| t.dims.iter().copied().sorted().collect::<Vec<_>>();
    if sorted(t1) != sorted(t2) {
        return Ok(None);
    }
    let m = t1.factor_count();
    let l1 = (0..m).map(|i| local_algebra(t1, i, tol)).collect::<Result<Vec<_>>>()?;
    let l2 = (0..m).map(|i| local_algebra(t2, i, tol)).collect::<Result<Vec<_>>>()?;
    let matches: Vec<Vec<bool>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| t1.dims[i] == t2.dims[j] && l1[i].same_span(&l2[j], tol))
                .collect()
        })
        .collect();
    Ok((0..m)
        .permutations(m)
        .find(|perm| perm.iter().enumerate().all(|(i, &j)| matches[i][j])))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductTest {
    /// One flag per single-factor-versus-rest cut.
    pub per_cut: Vec<bool>,
    pub overall: bool,
}

/// Product test across every single-factor cut, by von Neumann entropy below
/// `resid_abs`.
pub fn is_product(state: &ComplexMatrix, tps: &Tps, tol: &Tolerance) -> Result<ProductTest> {
    check_normalized(state, tps.dim())?;
    if tps.factor_count() == 1 {
        return Ok(ProductTest {
            per_cut: vec![true],
            overall: true,
        });
    }
    let per_cut = (0..tps.factor_count())
        .map(|i| {
            entanglement(state, tps, &EntanglementMeasure::von_neumann(vec![i]))
                .map(|e| e < tol.resid_abs)
        })
        .collect::<Result<Vec<_>>>()?;
    let overall = per_cut.iter().all(|&b| b);
    Ok(ProductTest { per_cut, overall })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{kron, C64, ONE, ZERO};
    use crate::ops::{cnot, swap};
    use crate::random::random_unitary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bell(sign: f64) -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::from_column_slice(4, 1, &[C64::new(s, 0.0), ZERO, ZERO, C64::new(sign * s, 0.0)])
    }

    #[test]
    fn partitions_examples() {
        assert_eq!(multiplicative_partitions(8).unwrap(), vec![vec![8], vec![2, 4], vec![2, 2, 2]]);
        assert_eq!(
            multiplicative_partitions(12).unwrap(),
            vec![vec![12], vec![2, 6], vec![3, 4], vec![2, 2, 3]]
        );
        for p in [2, 3, 5, 7, 11, 13, 97] {
            assert_eq!(multiplicative_partitions(p).unwrap(), vec![vec![p]]);
        }
        assert!(multiplicative_partitions(1).is_err());
    }

    #[test]
    fn local_algebra_examples() {
        let tol = Tolerance::default();
        let nat = Tps::natural(vec![2, 2]).unwrap();
        let a = local_algebra(&nat, 0, &tol).unwrap();
        assert_eq!(a.dimension(), 4);
        assert!(a.contains(&kron(&crate::ops::pauli('X').unwrap(), &identity(2)), &tol));
        let swapped = Tps::new(vec![2, 2], swap(), &tol).unwrap();
        let b = local_algebra(&swapped, 0, &tol).unwrap();
        assert!(b.same_span(&local_algebra(&nat, 1, &tol).unwrap(), &tol));
        assert!(matches!(local_algebra(&nat, 2, &tol), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn entanglement_examples() {
        let nat = Tps::natural(vec![2, 2]).unwrap();
        let m = EntanglementMeasure::von_neumann(vec![0]);
        let mut zero = ComplexMatrix::zeros(4, 1);
        zero[0] = ONE;
        assert_eq!(entanglement(&zero, &nat, &m).unwrap(), 0.0);
        assert!((entanglement(&bell(1.0), &nat, &m).unwrap() - 1.0).abs() < 1e-12);
        let lin = EntanglementMeasure::new(MeasureKind::Linear, vec![1]);
        assert!((entanglement(&bell(-1.0), &nat, &lin).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(
            entanglement(&bell(1.0).scale(2.0), &nat, &m),
            Err(Error::NotNormalized { .. })
        ));
        assert!(entanglement(&bell(1.0), &nat, &EntanglementMeasure::von_neumann(vec![0, 1])).is_err());
    }

    #[test]
    fn entangling_power_of_product_preserving_gates() {
        let tol = Tolerance::default();
        let nat = Tps::natural(vec![2, 2]).unwrap();
        let m = EntanglementMeasure::von_neumann(vec![0]);
        for u in [identity(4), swap()] {
            let e = entangling_power(&u, &nat, &m, 500, 3, &tol).unwrap();
            assert_eq!((e.mean, e.stderr), (0.0, 0.0));
        }
        assert!(matches!(entangling_power(&cnot(), &nat, &m, 0, 3, &tol), Err(Error::ZeroSamples)));
        let e1 = entangling_power(&cnot(), &nat, &m, 1000, 5, &tol).unwrap();
        let e2 = entangling_power(&cnot(), &nat, &m, 1000, 5, &tol).unwrap();
        assert_eq!(e1, e2);
        assert!(e1.mean > 0.0);
    }

    #[test]
    fn distance_of_local_unitary_is_zero() {
        let tol = Tolerance::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let nat = Tps::natural(vec![2, 3]).unwrap();
        let u = kron(&random_unitary(2, &mut rng), &random_unitary(3, &mut rng));
        let d = tps_distance(&u, &nat, &EntanglementMeasure::von_neumann(vec![0]), 300, 1, &tol).unwrap();
        assert!(d < 1e-6);
    }

    #[test]
    fn equivalence_examples() {
        let tol = Tolerance::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t1 = Tps::new(vec![2, 2], random_unitary(4, &mut rng), &tol).unwrap();
        assert_eq!(tps_equivalent(&t1, &t1, &tol).unwrap(), Some(vec![0, 1]));
        let local = kron(&random_unitary(2, &mut rng), &random_unitary(2, &mut rng));
        let t2 = Tps::new(vec![2, 2], t1.iso() * local, &tol).unwrap();
        assert_eq!(tps_equivalent(&t1, &t2, &tol).unwrap(), Some(vec![0, 1]));
        let t3 = Tps::new(vec![2, 2], t1.iso() * swap(), &tol).unwrap();
        assert_eq!(tps_equivalent(&t1, &t3, &tol).unwrap(), Some(vec![1, 0]));
        let t4 = Tps::new(vec![2, 2], t1.iso() * cnot(), &tol).unwrap();
        assert_eq!(tps_equivalent(&t1, &t4, &tol).unwrap(), None);
        let single = Tps::natural(vec![4]).unwrap();
        assert_eq!(tps_equivalent(&single, &single, &tol).unwrap(), Some(vec![0]));
    }

    #[test]
    fn product_test_examples() {
        let tol = Tolerance::default();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let t = Tps::natural(vec![2, 3, 2]).unwrap();
        let psi = kron_all(&[random_state(2, &mut rng), random_state(3, &mut rng), random_state(2, &mut rng)]);
        assert!(is_product(&psi, &t, &tol).unwrap().overall);
        assert!(!is_product(&bell(1.0), &Tps::natural(vec![2, 2]).unwrap(), &tol).unwrap().overall);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut ghz = ComplexMatrix::zeros(8, 1);
        ghz[0] = C64::new(s, 0.0);
        ghz[7] = C64::new(s, 0.0);
        let g = Tps::natural(vec![2, 2, 2]).unwrap();
        let r = is_product(&ghz, &g, &tol).unwrap();
        assert_eq!(r.per_cut, vec![false, false, false]);
        for i in 0..3 {
            let e = entanglement(&ghz, &g, &EntanglementMeasure::von_neumann(vec![i])).unwrap();
            assert!((e - 1.0).abs() < 1e-12);
        }
    }
}
