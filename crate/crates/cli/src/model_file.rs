//! On-disk model description.
//!
//! ```json
//! {
//!   "dim": 2,
//!   "jumps": [[[[0, 0], [1, 0]], [[0, 0], [0, 0]]]],
//!   "hamiltonian": { "type": "constant", "matrix": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]] }
//! }
//! ```
//!
//! Matrices are row-major lists of rows, each entry a `[re, im]` pair.

use lindblad_core::linalg::{CMat, C64};
use lindblad_core::operators::{HamiltonianSchedule, JumpSet, LindbladModel, PhiDrive};
use lindblad_core::scenarios;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::json;

pub type MatrixData = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub dim: usize,
    #[serde(default)]
    pub jumps: Vec<MatrixData>,
    #[serde(default)]
    pub hamiltonian: HamiltonianData,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum HamiltonianData {
    #[default]
    Zero,
    Constant {
        matrix: MatrixData,
    },
    Piecewise {
        breakpoints: Vec<f64>,
        segments: Vec<MatrixData>,
    },
    PhiDrive {
        c: f64,
        r: f64,
        /// Defaults to `(σy ⊗ I, σx ⊗ I, σy ⊗ I)` on two qubits.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        terms: Option<DriveTerms>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveTerms {
    pub base: MatrixData,
    pub cos: MatrixData,
    pub sin: MatrixData,
}

pub fn matrix_from_data(data: &MatrixData, dim: usize, path: &str) -> Result<CMat, CliError> {
    if data.len() != dim || data.iter().any(|row| row.len() != dim) {
        return Err(CliError::input(path, format!("expected a {dim}x{dim} matrix")));
    }
    for (i, row) in data.iter().enumerate() {
        for (j, z) in row.iter().enumerate() {
            if !(z[0].is_finite() && z[1].is_finite()) {
                return Err(CliError::input(format!("{path}[{i}][{j}]"), "entry must be finite"));
            }
        }
    }
    Ok(CMat::from_fn(dim, dim, |i, j| C64::new(data[i][j][0], data[i][j][1])))
}

pub fn matrix_to_data(m: &CMat) -> MatrixData {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

impl ModelFile {
    pub fn parse(text: &str, source: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::input(format!("{source}: {path}"), e.into_inner().to_string())
        })
    }

    pub fn to_model(&self) -> Result<LindbladModel, CliError> {
        let d = self.dim;
        if d == 0 {
            return Err(CliError::input("dim", "must be at least 1"));
        }
        let jumps = self
            .jumps
            .iter()
            .enumerate()
            .map(|(k, m)| matrix_from_data(m, d, &format!("jumps[{k}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let jumps = JumpSet::new(d, jumps).map_err(|e| CliError::input("jumps", e.to_string()))?;
        let schedule = match &self.hamiltonian {
            HamiltonianData::Zero => HamiltonianSchedule::Zero,
            HamiltonianData::Constant { matrix } => {
                HamiltonianSchedule::Constant(matrix_from_data(matrix, d, "hamiltonian.matrix")?)
            }
            HamiltonianData::Piecewise { breakpoints, segments } => HamiltonianSchedule::PiecewiseConstant {
                breakpoints: breakpoints.clone(),
                segments: segments
                    .iter()
                    .enumerate()
                    .map(|(k, m)| matrix_from_data(m, d, &format!("hamiltonian.segments[{k}]")))
                    .collect::<Result<Vec<_>, _>>()?,
            },
            HamiltonianData::PhiDrive { c, r, terms } => {
                let drive = match terms {
                    Some(t) => PhiDrive {
                        c: *c,
                        r: *r,
                        base: matrix_from_data(&t.base, d, "hamiltonian.terms.base")?,
                        cos_term: matrix_from_data(&t.cos, d, "hamiltonian.terms.cos")?,
                        sin_term: matrix_from_data(&t.sin, d, "hamiltonian.terms.sin")?,
                    },
                    None if d == 4 => scenarios::ce2_drive(*r, *c),
                    None => {
                        return Err(CliError::input(
                            "hamiltonian.terms",
                            "required unless dim is 4 (default two-qubit drive)",
                        ))
                    }
                };
                HamiltonianSchedule::PhiDrive(drive)
            }
        };
        LindbladModel::new(jumps, schedule).map_err(|e| CliError::input("hamiltonian", e.to_string()))
    }

    pub fn from_model(model: &LindbladModel) -> Self {
        let hamiltonian = match model.hamiltonian() {
            HamiltonianSchedule::Zero => HamiltonianData::Zero,
            HamiltonianSchedule::Constant(h) => HamiltonianData::Constant { matrix: matrix_to_data(h) },
            HamiltonianSchedule::PiecewiseConstant { breakpoints, segments } => HamiltonianData::Piecewise {
                breakpoints: breakpoints.clone(),
                segments: segments.iter().map(matrix_to_data).collect(),
            },
            HamiltonianSchedule::PhiDrive(p) => HamiltonianData::PhiDrive {
                c: p.c,
                r: p.r,
                terms: Some(DriveTerms {
                    base: matrix_to_data(&p.base),
                    cos: matrix_to_data(&p.cos_term),
                    sin: matrix_to_data(&p.sin_term),
                }),
            },
        };
        Self {
            dim: model.dim(),
            jumps: model.jumps().jumps().iter().map(matrix_to_data).collect(),
            hamiltonian,
        }
    }

    /// Canonical text: pretty JSON with every float at 17 significant digits.
    pub fn to_canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("model file serializes");
        json::to_pretty(&value)
    }
}
