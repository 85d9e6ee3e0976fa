//! Standard operators: Pauli matrices and strings, common two-qubit gates,
//! slot embeddings and collective spin generators.

use crate::error::{Error, Result};
use crate::numerics::{identity, kron_all, ComplexMatrix, C64, I, ONE, ZERO};

pub fn pauli(symbol: char) -> Option<ComplexMatrix> {
    let m = match symbol {
        'I' => identity(2),
        'X' => ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        'Y' => ComplexMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        'Z' => ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        _ => return None,
    };
    Some(m)
}

/// Expands a Pauli string such as `"ZZI"`. The leftmost symbol is qubit 0,
/// the most significant tensor slot.
pub fn pauli_string(s: &str) -> Result<ComplexMatrix> {
    if s.is_empty() {
        return Err(Error::InvalidArgument("empty Pauli string".into()));
    }
    let factors = s
        .chars()
        .map(|c| {
            pauli(c).ok_or_else(|| {
                Error::InvalidArgument(format!("invalid Pauli symbol {c:?} in {s:?}"))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(kron_all(&factors))
}

pub fn hadamard() -> ComplexMatrix {
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    ComplexMatrix::from_row_slice(2, 2, &[s, s, s, -s])
}

pub fn cnot() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(4, 4);
    for (r, c) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        m[(r, c)] = ONE;
    }
    m
}

pub fn swap() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(4, 4);
    for (r, c) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        m[(r, c)] = ONE;
    }
    m
}

/// Permutation matrix sending tensor slot `i` of `(x)_i C^{dims[i]}` to slot
/// `perm[i]` of the permuted product.
pub fn factor_permutation(dims: &[usize], perm: &[usize]) -> Result<ComplexMatrix> {
    let m = dims.len();
    let mut seen = vec![false; m];
    if perm.len() != m || perm.iter().any(|&p| p >= m || std::mem::replace(&mut seen[p], true)) {
        return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation of 0..{m}")));
    }
    let mut new_dims = vec![0; m];
    for i in 0..m {
        new_dims[perm[i]] = dims[i];
    }
    let total: usize = dims.iter().product();
    let mut out = ComplexMatrix::zeros(total, total);
    let mut digits = vec![0usize; m];
    for src in 0..total {
        let mut rem = src;
        for i in (0..m).rev() {
            digits[i] = rem % dims[i];
            rem /= dims[i];
        }
        let mut dst = 0;
        let mut new_digits = vec![0; m];
        for i in 0..m {
            new_digits[perm[i]] = digits[i];
        }
        for i in 0..m {
            dst = dst * new_dims[i] + new_digits[i];
        }
        out[(dst, src)] = ONE;
    }
    Ok(out)
}

/// `1 (x) ... (x) op (x) ... (x) 1` with `op` in tensor slot `slot`.
pub fn embed(op: &ComplexMatrix, dims: &[usize], slot: usize) -> Result<ComplexMatrix> {
    if slot >= dims.len() {
        return Err(Error::IndexOutOfRange {
            index: slot,
            len: dims.len(),
        });
    }
    if op.nrows() != dims[slot] || op.ncols() != dims[slot] {
        return Err(Error::DimensionMismatch {
            expected: dims[slot],
            found: op.nrows(),
        });
    }
    let factors: Vec<ComplexMatrix> = dims
        .iter()
        .enumerate()
        .map(|(i, &d)| if i == slot { op.clone() } else { identity(d) })
        .collect();
    Ok(kron_all(&factors))
}

/// Collective spin operators `sum_i sigma_alpha^(i)` for alpha = x, y, z.
pub fn collective_spin(qubits: usize) -> Vec<ComplexMatrix> {
    let dims = vec![2; qubits];
    ['X', 'Y', 'Z']
        .iter()
        .map(|&a| {
            let p = pauli(a).expect("valid symbol");
            (0..qubits)
                .map(|q| embed(&p, &dims, q).expect("slot in range"))
                .fold(ComplexMatrix::zeros(1 << qubits, 1 << qubits), |acc, x| acc + x)
        })
        .collect()
}

/// Heisenberg exchange couplings `sigma^(i) . sigma^(j)` over all qubit pairs.
pub fn exchange_operators(qubits: usize) -> Vec<ComplexMatrix> {
    let dims = vec![2; qubits];
    let mut out = Vec::new();
    for i in 0..qubits {
        for j in i + 1..qubits {
            let dot = ['X', 'Y', 'Z']
                .iter()
                .map(|&a| {
                    let p = pauli(a).expect("valid symbol");
                    embed(&p, &dims, i).expect("slot") * embed(&p, &dims, j).expect("slot")
                })
                .fold(ComplexMatrix::zeros(1 << qubits, 1 << qubits), |acc, x| acc + x);
            out.push(dot);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_string_order() {
        // leftmost symbol is the most significant slot
        let zi = pauli_string("ZI").unwrap();
        assert_eq!(zi[(2, 2)], -ONE);
        assert_eq!(zi[(1, 1)], ONE);
        assert!(pauli_string("XQ").is_err());
        assert!(pauli_string("").is_err());
    }

    #[test]
    fn swap_is_factor_permutation() {
        assert_eq!(factor_permutation(&[2, 2], &[1, 0]).unwrap(), swap());
        let a = pauli('X').unwrap();
        let b = pauli('Y').unwrap();
        let p = factor_permutation(&[2, 2], &[1, 0]).unwrap();
        let lhs = &p * kron_all([&a, &b]) * p.adjoint();
        assert_eq!(lhs, kron_all([&b, &a]));
    }

    #[test]
    fn uneven_permutation_moves_slots() {
        let a = ComplexMatrix::from_fn(2, 2, |i, j| C64::new((i + 2 * j) as f64, 1.0));
        let b = ComplexMatrix::from_fn(3, 3, |i, j| C64::new(i as f64, j as f64));
        let p = factor_permutation(&[2, 3], &[1, 0]).unwrap();
        let lhs = &p * kron_all([&a, &b]) * p.adjoint();
        assert!((lhs - kron_all([&b, &a])).norm() < 1e-14);
    }
}
