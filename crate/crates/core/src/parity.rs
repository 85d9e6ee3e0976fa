//! Syndrome sectors of commuting parity operators.
//!
//! `k` independent commuting Hermitian involutions on `n` qubits split
//! `C^{2^n}` into `2^k` joint eigenspaces of dimension `2^{n-k}`. Identifying
//! the sectors with each other gives a structure `C^{2^{n-k}} (x) C^{2^k}`:
//! a code factor controlled by operators of well-defined parity and a
//! syndrome factor labelled by the joint eigenvalues.
//!
//! The identification across sectors is a choice. By default each sector
//! keeps the basis the eigensolver returns (with phases fixed); supplying flip
//! operators aligns the sectors with code-space images instead.

use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::{
    check_square, check_unitary, commutator, fix_column_phases, hermitian_defect, hermitian_eig,
    hermitian_part, identity, kron, max_abs, partial_trace, polar_isometry, ComplexMatrix, Tolerance,
};
use crate::tps::Tps;

#[derive(Debug, Clone, PartialEq)]
pub enum ParityViolation {
    WrongDimension { index: usize, dim: usize },
    NotHermitian { index: usize, defect: f64 },
    NotTraceless { index: usize, trace: f64 },
    NotInvolution { index: usize, defect: f64 },
    NotCommuting { first: usize, second: usize, norm: f64 },
    /// The product over `subset` is proportional to the identity.
    Dependent { subset: Vec<usize> },
    TooMany { k: usize, n: usize },
}

impl fmt::Display for ParityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::WrongDimension { index, dim } => {
                write!(f, "operator {index} has dimension {dim}, not a power of two")
            }
            Self::NotHermitian { index, defect } => {
                write!(f, "operator {index} is not Hermitian (defect {defect:e})")
            }
            Self::NotTraceless { index, trace } => {
                write!(f, "operator {index} has trace {trace:e}")
            }
            Self::NotInvolution { index, defect } => {
                write!(f, "operator {index} does not square to one (defect {defect:e})")
            }
            Self::NotCommuting { first, second, norm } => {
                write!(f, "operators {first} and {second} do not commute (norm {norm:e})")
            }
            Self::Dependent { subset } => {
                write!(f, "product of operators {subset:?} is a multiple of the identity")
            }
            Self::TooMany { k, n } => write!(f, "{k} parity operators on {n} qubits"),
        }
    }
}

/// A validated set of commuting independent parity operators.
#[derive(Debug, Clone)]
pub struct ParitySet {
    qubits: usize,
    ops: Vec<ComplexMatrix>,
}

impl ParitySet {
    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn k(&self) -> usize {
        self.ops.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }
}

/// Checks every parity-set invariant and reports all violations together.
pub fn validate_parity_set(ops: &[ComplexMatrix], tol: &Tolerance) -> Result<ParitySet> {
    if ops.is_empty() {
        return Err(Error::InvalidArgument("empty parity set".into()));
    }
    let dim = check_square(&ops[0])?;
    if !dim.is_power_of_two() {
        return Err(Error::InvalidParitySet(vec![ParityViolation::WrongDimension {
            index: 0,
            dim,
        }]));
    }
    let qubits = dim.trailing_zeros() as usize;
    let mut violations = Vec::new();
    for (index, x) in ops.iter().enumerate() {
        if check_square(x)? != dim {
            violations.push(ParityViolation::WrongDimension {
                index,
                dim: x.nrows(),
            });
        }
    }
    if !violations.is_empty() {
        return Err(Error::InvalidParitySet(violations));
    }
    if ops.len() > qubits {
        violations.push(ParityViolation::TooMany {
            k: ops.len(),
            n: qubits,
        });
    }
    let id = identity(dim);
    for (index, x) in ops.iter().enumerate() {
        let defect = hermitian_defect(x);
        if defect > tol.resid_abs {
            violations.push(ParityViolation::NotHermitian { index, defect });
        }
        let trace = x.trace().norm();
        if trace > tol.resid_abs * dim as f64 {
            violations.push(ParityViolation::NotTraceless { index, trace });
        }
        let defect = max_abs(&(x * x - &id));
        if defect > tol.resid_abs {
            violations.push(ParityViolation::NotInvolution { index, defect });
        }
    }
    for i in 0..ops.len() {
        for j in i + 1..ops.len() {
            let norm = max_abs(&commutator(&ops[i], &ops[j]));
            if norm > tol.resid_abs {
                violations.push(ParityViolation::NotCommuting {
                    first: i,
                    second: j,
                    norm,
                });
            }
        }
    }
    // a nonempty subset whose product is a scalar collapses two patterns
    if violations.is_empty() && ops.len() <= qubits {
        for mask in 1usize..(1 << ops.len()) {
            let subset: Vec<usize> = (0..ops.len()).filter(|i| mask >> i & 1 == 1).collect();
            let product = subset.iter().fold(id.clone(), |acc, &i| acc * &ops[i]);
            let scalar = product.trace() / crate::C64::new(dim as f64, 0.0);
            if max_abs(&(&product - &id * scalar)) <= tol.resid_abs {
                violations.push(ParityViolation::Dependent { subset });
            }
        }
    }
    if !violations.is_empty() {
        return Err(Error::InvalidParitySet(violations));
    }
    Ok(ParitySet {
        qubits,
        ops: ops.to_vec(),
    })
}

/// One joint eigenspace, labelled by the eigenvalue `+1` or `-1` of each
/// parity operator.
#[derive(Debug, Clone)]
pub struct Sector {
    pub syndrome: Vec<i8>,
    /// Orthonormal columns spanning the sector.
    pub basis: ComplexMatrix,
}

impl Sector {
    /// Position of this sector in the syndrome factor: operator 0 is the most
    /// significant bit, `-1` maps to bit one.
    pub fn index(&self) -> usize {
        self.syndrome
            .iter()
            .fold(0, |acc, &s| (acc << 1) | usize::from(s < 0))
    }
}

#[derive(Debug, Clone)]
pub struct SyndromeDecomposition {
    /// Sectors ordered by [`Sector::index`].
    pub sectors: Vec<Sector>,
    /// Structure with dims `(2^{n-k}, 2^k)`, code factor first.
    pub tps: Tps,
}

impl SyndromeDecomposition {
    pub fn sector(&self, syndrome: &[i8]) -> Option<&Sector> {
        self.sectors.iter().find(|s| s.syndrome == syndrome)
    }
}

fn split_sectors(ps: &ParitySet) -> Result<Vec<Sector>> {
    let mut sectors = vec![Sector {
        syndrome: Vec::new(),
        basis: identity(ps.dim()),
    }];
    for x in &ps.ops {
        let mut next = Vec::with_capacity(2 * sectors.len());
        for s in sectors {
            let compressed = hermitian_part(&(s.basis.adjoint() * x * &s.basis));
            let eig = hermitian_eig(&compressed)?;
            if let Some(w) = eig.values.iter().find(|w| (w.abs() - 1.0).abs() > 1e-6) {
                return Err(Error::ToleranceCheck(format!(
                    "parity eigenvalue {w} is not +-1"
                )));
            }
            let split = eig.values.iter().take_while(|&&w| w < 0.0).count();
            let minus = &s.basis * eig.subspace(0..split);
            let plus = &s.basis * eig.subspace(split..eig.values.len());
            let with = |sign: i8, basis| {
                let mut syndrome = s.syndrome.clone();
                syndrome.push(sign);
                Sector { syndrome, basis }
            };
            next.push(with(1, plus));
            next.push(with(-1, minus));
        }
        sectors = next;
    }
    let expected = 1 << (ps.qubits - ps.k());
    let dims: Vec<usize> = sectors.iter().map(|s| s.basis.ncols()).collect();
    if dims.iter().any(|&d| d != expected) {
        return Err(Error::UnequalSectors { dims, expected });
    }
    sectors.sort_by_key(Sector::index);
    Ok(sectors)
}

fn assemble(ps: &ParitySet, sectors: Vec<Sector>, tol: &Tolerance) -> Result<SyndromeDecomposition> {
    let code = 1 << (ps.qubits - ps.k());
    let syn = 1 << ps.k();
    let mut iso = ComplexMatrix::zeros(ps.dim(), ps.dim());
    for s in &sectors {
        let j = s.index();
        for l in 0..code {
            iso.set_column(l * syn + j, &s.basis.column(l));
        }
    }
    let tps = Tps::new(vec![code, syn], iso, tol)?;
    Ok(SyndromeDecomposition { sectors, tps })
}

/// Joint eigenspaces of the parity set by successive splitting, with the
/// eigensolver's sector bases (column phases fixed).
pub fn syndrome_decompose(ps: &ParitySet, tol: &Tolerance) -> Result<SyndromeDecomposition> {
    let mut sectors = split_sectors(ps)?;
    for s in &mut sectors {
        fix_column_phases(&mut s.basis);
    }
    assemble(ps, sectors, tol)
}

/// Variant of [`syndrome_decompose`] that aligns sectors through flip
/// operators: `flips[i]` should anticommute with parity `i` and commute with
/// the others. The sector with syndrome bits `b` gets the basis
/// `prod_{b_i = 1} flips[i]` applied to the all-`+1` sector, orthonormalized.
pub fn syndrome_decompose_aligned(
    ps: &ParitySet,
    flips: &[ComplexMatrix],
    tol: &Tolerance,
) -> Result<SyndromeDecomposition> {
    if flips.len() != ps.k() {
        return Err(Error::InvalidArgument(format!(
            "expected {} flip operators, got {}",
            ps.k(),
            flips.len()
        )));
    }
    let mut sectors = split_sectors(ps)?;
    fix_column_phases(&mut sectors[0].basis);
    let code_basis = sectors[0].basis.clone();
    for s in sectors.iter_mut().skip(1) {
        let j = s.index();
        let mut image = code_basis.clone();
        for (i, f) in flips.iter().enumerate() {
            if j >> (ps.k() - 1 - i) & 1 == 1 {
                image = f * image;
            }
        }
        let projected = s.basis.adjoint() * &image;
        if crate::numerics::numerical_rank(&projected, tol) < projected.ncols() {
            return Err(Error::ToleranceCheck(format!(
                "flip operators do not map the code sector onto sector {j}"
            )));
        }
        s.basis = &s.basis * polar_isometry(&projected, tol)?;
    }
    assemble(ps, sectors, tol)
}

/// `X_i -> U X_i U^dagger`.
pub fn conjugate_parity_set(ps: &ParitySet, u: &ComplexMatrix, tol: &Tolerance) -> Result<ParitySet> {
    check_unitary(u, tol)?;
    if u.nrows() != ps.dim() {
        return Err(Error::DimensionMismatch {
            expected: ps.dim(),
            found: u.nrows(),
        });
    }
    let ops: Vec<ComplexMatrix> = ps.ops.iter().map(|x| u * x * u.adjoint()).collect();
    validate_parity_set(&ops, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorClass {
    /// Acts as `m (x) 1` on code (x) syndrome; scalars land here.
    CodeLocal,
    /// Acts as `1 (x) m`.
    SyndromeLocal,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub class: OperatorClass,
    pub code_residual: f64,
    pub syndrome_residual: f64,
}

/// Classifies `op` by its form in the code (x) syndrome structure. Residuals
/// are Frobenius norms relative to `||op||`.
pub fn classify_operator(
    op: &ComplexMatrix,
    sd: &SyndromeDecomposition,
    tol: &Tolerance,
) -> Result<Classification> {
    let dim = sd.tps.dim();
    if check_square(op)? != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: op.nrows(),
        });
    }
    let (a, b) = (sd.tps.dims()[0], sd.tps.dims()[1]);
    let pulled = sd.tps.iso().adjoint() * op * sd.tps.iso();
    let norm = pulled.norm().max(f64::MIN_POSITIVE);
    let code = partial_trace(&pulled, 0, (a, b))?.unscale(b as f64);
    let code_residual = (&pulled - kron(&code, &identity(b))).norm() / norm;
    let syn = partial_trace(&pulled, 1, (a, b))?.unscale(a as f64);
    let syndrome_residual = (&pulled - kron(&identity(a), &syn)).norm() / norm;
    let class = if code_residual <= tol.resid_abs {
        OperatorClass::CodeLocal
    } else if syndrome_residual <= tol.resid_abs {
        OperatorClass::SyndromeLocal
    } else {
        OperatorClass::Mixed
    };
    Ok(Classification {
        class,
        code_residual,
        syndrome_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{hadamard, pauli_string};
    use crate::random::{random_hermitian, random_unitary};
    use crate::tps::{entanglement, EntanglementMeasure};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn set(strings: &[&str]) -> Result<ParitySet> {
        let ops: Vec<_> = strings.iter().map(|s| pauli_string(s).unwrap()).collect();
        validate_parity_set(&ops, &Tolerance::default())
    }

    #[test]
    fn validation_examples() {
        assert_eq!(set(&["XI"]).unwrap().k(), 1);
        assert_eq!(set(&["XX", "ZZ"]).unwrap().k(), 2);
        match set(&["XI", "ZI"]) {
            Err(Error::InvalidParitySet(v)) => {
                assert!(matches!(v[0], ParityViolation::NotCommuting { first: 0, second: 1, .. }))
            }
            other => panic!("expected rejection, got {other:?}"),
        }
        // II squares to one and commutes, so tracelessness is the only failure
        match set(&["II", "XX"]) {
            Err(Error::InvalidParitySet(v)) => {
                assert_eq!(v.len(), 1);
                assert!(matches!(v[0], ParityViolation::NotTraceless { index: 0, .. }));
            }
            other => panic!("expected rejection, got {other:?}"),
        }
        assert!(matches!(
            set(&["XX", "YY", "ZZ"]),
            Err(Error::InvalidParitySet(_))
        ));
        match set(&["ZZI", "IZZ", "ZIZ"]) {
            Err(Error::InvalidParitySet(v)) => {
                assert!(v.contains(&ParityViolation::Dependent { subset: vec![0, 1, 2] }))
            }
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn natural_parity_structure() {
        let tol = Tolerance::default();
        let sd = syndrome_decompose(&set(&["XI"]).unwrap(), &tol).unwrap();
        assert_eq!(sd.tps.dims(), &[2, 2]);
        // + sector is |+> (x) C^2
        let plus = pauli_string("XI").unwrap();
        let b = &sd.sector(&[1]).unwrap().basis;
        assert!((&plus * b - b).norm() < 1e-12);
    }

    #[test]
    fn bell_states_are_sector_products() {
        let tol = Tolerance::default();
        let sd = syndrome_decompose(&set(&["XX"]).unwrap(), &tol).unwrap();
        assert_eq!(sd.tps.dims(), &[2, 2]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let m = EntanglementMeasure::von_neumann(vec![0]);
        for sign in [1.0, -1.0] {
            let mut psi = ComplexMatrix::zeros(4, 1);
            psi[0] = crate::C64::new(s, 0.0);
            psi[3] = crate::C64::new(sign * s, 0.0);
            assert!(entanglement(&psi, &sd.tps, &m).unwrap() < 1e-8);
        }
    }

    #[test]
    fn repetition_code_sectors() {
        let tol = Tolerance::default();
        let sd = syndrome_decompose(&set(&["ZZI", "IZZ"]).unwrap(), &tol).unwrap();
        assert_eq!(sd.sectors.len(), 4);
        assert!(sd.sectors.iter().all(|s| s.basis.ncols() == 2));
        assert_eq!(sd.tps.dims(), &[2, 4]);
        let all: Vec<usize> = sd.sectors.iter().map(Sector::index).collect();
        assert_eq!(all, vec![0, 1, 2, 3]);
    }

    #[test]
    fn conjugation_examples() {
        let tol = Tolerance::default();
        let ps = set(&["XI"]).unwrap();
        let same = conjugate_parity_set(&ps, &identity(4), &tol).unwrap();
        assert_eq!(same.ops()[0], ps.ops()[0]);
        let h = kron(&hadamard(), &identity(2));
        let z = conjugate_parity_set(&ps, &h, &tol).unwrap();
        assert!((&z.ops()[0] - pauli_string("ZI").unwrap()).norm() < 1e-14);
        assert!(matches!(
            conjugate_parity_set(&ps, &identity(4).scale(2.0), &tol),
            Err(Error::NotUnitary { .. })
        ));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rep = set(&["ZZI", "IZZ"]).unwrap();
        let u = random_unitary(8, &mut rng);
        let conj = conjugate_parity_set(&rep, &u, &tol).unwrap();
        let sd = syndrome_decompose(&conj, &tol).unwrap();
        assert!(sd.sectors.iter().all(|s| s.basis.ncols() == 2));
    }

    #[test]
    fn classification_examples() {
        let tol = Tolerance::default();
        let ps = set(&["ZZI", "IZZ"]).unwrap();
        let sd = syndrome_decompose(&ps, &tol).unwrap();
        for x in ps.ops() {
            assert_eq!(classify_operator(x, &sd, &tol).unwrap().class, OperatorClass::SyndromeLocal);
        }
        let code_op = sd.tps.iso() * kron(&crate::ops::pauli('Y').unwrap(), &identity(4)) * sd.tps.iso().adjoint();
        let c = classify_operator(&code_op, &sd, &tol).unwrap();
        assert_eq!(c.class, OperatorClass::CodeLocal);
        for x in ps.ops() {
            assert!(commutator(&code_op, x).norm() < 1e-12);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = random_hermitian(8, &mut rng);
        assert_eq!(classify_operator(&r, &sd, &tol).unwrap().class, OperatorClass::Mixed);
    }

    #[test]
    fn aligned_sectors_follow_flips() {
        let tol = Tolerance::default();
        let ps = set(&["ZZI", "IZZ"]).unwrap();
        // X on qubit 0 flips only ZZI; X on qubit 2 flips only IZZ
        let flips = vec![pauli_string("XII").unwrap(), pauli_string("IIX").unwrap()];
        let sd = syndrome_decompose_aligned(&ps, &flips, &tol).unwrap();
        // logical X = XXX is code-local in the aligned identification
        let xxx = pauli_string("XXX").unwrap();
        assert_eq!(classify_operator(&xxx, &sd, &tol).unwrap().class, OperatorClass::CodeLocal);
        let bad = vec![pauli_string("ZII").unwrap(), pauli_string("IIX").unwrap()];
        assert!(syndrome_decompose_aligned(&ps, &bad, &tol).is_err());
    }
}
