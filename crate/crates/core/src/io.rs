//! JSON input formats.
//!
//! Complex numbers are `[re, im]` pairs. Matrices are either nested rows or a
//! flat row-major list of entries (square, side inferred). Operators may be
//! given as a dense matrix, a Pauli string, or a named gate.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::holonomy::{ExponentialFamily, IsoDegenerateOperator, LoopPath, TabulatedFamily, UnitaryFamily};
use crate::numerics::{ComplexMatrix, Tolerance, C64};
use crate::ops;

/// Parses JSON, reporting the failing field path and line/column.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value: T = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        Error::Parse(format!("at `{path}`: {}", e.into_inner()))
    })?;
    de.end().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(value)
}

pub fn read_json<T: DeserializeOwned>(path: &std::path::Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_json(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JsonMatrix {
    Nested(Vec<Vec<[f64; 2]>>),
    Flat(Vec<[f64; 2]>),
}

fn c(z: [f64; 2]) -> C64 {
    C64::new(z[0], z[1])
}

impl JsonMatrix {
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        match self {
            Self::Nested(rows) => {
                let r = rows.len();
                let cols = rows.first().map_or(0, Vec::len);
                if r == 0 || cols == 0 {
                    return Err(Error::Parse("empty matrix".into()));
                }
                if let Some(k) = rows.iter().position(|row| row.len() != cols) {
                    return Err(Error::Parse(format!(
                        "row {k} has {} entries, expected {cols}",
                        rows[k].len()
                    )));
                }
                Ok(ComplexMatrix::from_row_iterator(
                    r,
                    cols,
                    rows.iter().flatten().map(|&z| c(z)),
                ))
            }
            Self::Flat(entries) => {
                let n = (entries.len() as f64).sqrt().round() as usize;
                if n == 0 || n * n != entries.len() {
                    return Err(Error::Parse(format!(
                        "flat matrix with {} entries is not square",
                        entries.len()
                    )));
                }
                Ok(ComplexMatrix::from_row_iterator(n, n, entries.iter().map(|&z| c(z))))
            }
        }
    }
}

impl From<&ComplexMatrix> for JsonMatrix {
    fn from(m: &ComplexMatrix) -> Self {
        Self::Nested(
            m.row_iter()
                .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        )
    }
}

pub fn state_from_json(amplitudes: &[[f64; 2]]) -> ComplexMatrix {
    ComplexMatrix::from_iterator(amplitudes.len(), 1, amplitudes.iter().map(|&z| c(z)))
}

pub fn state_to_json(state: &ComplexMatrix) -> Vec<[f64; 2]> {
    state.iter().map(|z| [z.re, z.im]).collect()
}

/// Exactly one of `matrix`, `pauli`, `gate`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorBody {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pauli: Option<String>,
    /// One of `identity-<n>`, `cnot`, `swap`, `hadamard`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate: Option<String>,
}

fn gate(name: &str) -> Result<ComplexMatrix> {
    match name {
        "cnot" => Ok(ops::cnot()),
        "swap" => Ok(ops::swap()),
        "hadamard" => Ok(ops::hadamard()),
        _ => name
            .strip_prefix("identity-")
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|&n| n > 0)
            .map(crate::numerics::identity)
            .ok_or_else(|| Error::Parse(format!("unknown gate `{name}`"))),
    }
}

impl OperatorBody {
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        match (&self.matrix, &self.pauli, &self.gate) {
            (Some(m), None, None) => m.to_matrix(),
            (None, Some(p), None) => ops::pauli_string(p),
            (None, None, Some(g)) => gate(g),
            _ => Err(Error::Parse(
                "operator needs exactly one of `matrix`, `pauli`, `gate`".into(),
            )),
        }
    }

    /// Matrix checked to be `dim x dim`.
    pub fn to_matrix_of_dim(&self, dim: usize) -> Result<ComplexMatrix> {
        let m = self.to_matrix()?;
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: m.nrows().max(m.ncols()),
            });
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedOperator {
    pub name: String,
    #[serde(flatten)]
    pub body: OperatorBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedState {
    pub name: String,
    pub amplitudes: Vec<[f64; 2]>,
}

/// Operator names forming the two algebras of a bipartition test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Groups {
    pub a1: Vec<String>,
    pub a2: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpecFile {
    pub dim: usize,
    pub operators: Vec<NamedOperator>,
    #[serde(default)]
    pub states: Vec<NamedState>,
    #[serde(default)]
    pub groups: Option<Groups>,
    #[serde(default)]
    pub metadata: serde_json::Value,
}

impl OperatorSpecFile {
    pub fn matrices(&self) -> Result<Vec<ComplexMatrix>> {
        self.operators
            .iter()
            .map(|op| {
                op.body
                    .to_matrix_of_dim(self.dim)
                    .map_err(|e| Error::Parse(format!("operator `{}`: {e}", op.name)))
            })
            .collect()
    }

    pub fn named(&self, names: &[String]) -> Result<Vec<ComplexMatrix>> {
        names
            .iter()
            .map(|name| {
                let op = self
                    .operators
                    .iter()
                    .find(|op| &op.name == name)
                    .ok_or_else(|| Error::Parse(format!("no operator named `{name}`")))?;
                op.body.to_matrix_of_dim(self.dim)
            })
            .collect()
    }

    pub fn state(&self, name: &str) -> Result<ComplexMatrix> {
        let s = self
            .states
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::Parse(format!("no state named `{name}`")))?;
        if s.amplitudes.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: s.amplitudes.len(),
            });
        }
        Ok(state_from_json(&s.amplitudes))
    }
}

/// A tensor product structure: factor dimensions plus an optional unitary
/// identification (natural one when absent).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TpsSpec {
    pub dims: Vec<usize>,
    #[serde(default)]
    pub iso: Option<JsonMatrix>,
}

impl TpsSpec {
    pub fn build(&self, tol: &Tolerance) -> Result<crate::tps::Tps> {
        match &self.iso {
            None => crate::tps::Tps::natural(self.dims.clone()),
            Some(m) => crate::tps::Tps::new(self.dims.clone(), m.to_matrix()?, tol),
        }
    }
}

/// Input of the entangling-power estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceSpec {
    pub tps: TpsSpec,
    pub unitary: OperatorBody,
    /// Factors on one side of the cut; factor 0 when absent.
    #[serde(default)]
    pub cut: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivalenceSpec {
    pub first: TpsSpec,
    pub second: TpsSpec,
}

/// A state measured in one structure: explicit, or built from parity
/// operators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntangleSpec {
    #[serde(default)]
    pub tps: Option<TpsSpec>,
    #[serde(default)]
    pub parity: Option<Vec<OperatorBody>>,
    pub state: Vec<[f64; 2]>,
    #[serde(default)]
    pub cut: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParitySpec {
    pub parities: Vec<OperatorBody>,
    /// Flip operators aligning the sectors; eigensolver bases when absent.
    #[serde(default)]
    pub flips: Option<Vec<OperatorBody>>,
    #[serde(default)]
    pub classify: Vec<NamedOperator>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BosonicSpec {
    pub modes: usize,
    pub cutoff: usize,
    pub unitary: JsonMatrix,
    /// Rotated mode excited from the vacuum.
    #[serde(default)]
    pub excite: usize,
    pub cut: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilySpec {
    /// `prod_mu exp(-i lambda_mu G_mu)`.
    Exponential { generators: Vec<OperatorBody> },
    Tabulated {
        axes: Vec<Vec<f64>>,
        values: Vec<JsonMatrix>,
    },
}

impl FamilySpec {
    pub fn build(&self, tol: &Tolerance) -> Result<Box<dyn UnitaryFamily>> {
        match self {
            Self::Exponential { generators } => {
                let gens = generators
                    .iter()
                    .map(OperatorBody::to_matrix)
                    .collect::<Result<Vec<_>>>()?;
                Ok(Box::new(ExponentialFamily::new(&gens)?))
            }
            Self::Tabulated { axes, values } => {
                let values = values
                    .iter()
                    .map(JsonMatrix::to_matrix)
                    .collect::<Result<Vec<_>>>()?;
                Ok(Box::new(TabulatedFamily::new(axes.clone(), values, tol)?))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopSpec {
    pub waypoints: Vec<Vec<f64>>,
    pub refinement: usize,
}

impl LoopSpec {
    pub fn build(&self) -> Result<LoopPath> {
        LoopPath::new(self.waypoints.clone(), self.refinement)
    }
}

fn default_ladder() -> Vec<usize> {
    vec![4, 8, 16, 32, 64]
}

/// An iso-degenerate family with loops around a common base point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolonomySpec {
    pub n: usize,
    pub eigenvalues: Vec<f64>,
    /// Eigenspace index `i`, 0-based.
    #[serde(default)]
    pub eigenspace: usize,
    pub family: FamilySpec,
    pub loops: Vec<LoopSpec>,
    #[serde(default = "default_ladder")]
    pub refinements: Vec<usize>,
    #[serde(default)]
    pub metadata: serde_json::Value,
}

impl HolonomySpec {
    pub fn operator(&self) -> Result<IsoDegenerateOperator> {
        IsoDegenerateOperator::new(self.n, self.eigenvalues.clone())
    }

    pub fn loops(&self) -> Result<Vec<LoopPath>> {
        self.loops.iter().map(LoopSpec::build).collect()
    }
}
