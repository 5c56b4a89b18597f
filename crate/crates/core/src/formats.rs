//! JSON file schemas.
//!
//! Complex numbers are `[re, im]` pairs. Matrices are arrays of rows. Floats
//! are written in shortest round-trip form, so a value survives
//! save/load unchanged.
//!
//! ```json
//! {"dims": [2, 2], "amplitudes": [[0.7071067811865476, 0.0], [0.0, 0.0], [0.0, 0.0], [0.7071067811865476, 0.0]]}
//! {"pairs": [{"a": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]], "b": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]}]}
//! {"outcomes": [{"p": 0.5, "state": {...}}], "pruned_mass": 0.0}
//! ```

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;
use crate::sepops::{Ensemble, KrausPair, ProductKrausSet};
use crate::states::PureState;
use crate::C64;

pub type ComplexJson = [f64; 2];
pub type MatrixJson = Vec<Vec<ComplexJson>>;

fn to_json(z: C64) -> ComplexJson {
    [z.re, z.im]
}

fn from_json(z: &ComplexJson) -> C64 {
    C64::new(z[0], z[1])
}

pub fn matrix_to_json(m: &ComplexMatrix) -> MatrixJson {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| to_json(m.get(i, j))).collect()).collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<ComplexMatrix> {
    let r = rows.len();
    let c = rows.first().map(Vec::len).unwrap_or(0);
    if r == 0 || c == 0 {
        return Err(Error::invalid("matrix must have at least one row and column"));
    }
    if rows.iter().any(|row| row.len() != c) {
        return Err(Error::invalid("matrix rows have different lengths"));
    }
    let entries: Vec<C64> = rows.iter().flatten().map(from_json).collect();
    ComplexMatrix::from_row_major(r, c, &entries)
}

/// `{"dims": [D_A, D_B], "amplitudes": [[re, im], ...]}`, index `i * D_B + j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dims: [usize; 2],
    pub amplitudes: Vec<ComplexJson>,
}

impl StateFile {
    pub fn from_state(s: &PureState) -> Self {
        StateFile { dims: [s.dim_a(), s.dim_b()], amplitudes: s.amplitudes().iter().copied().map(to_json).collect() }
    }

    /// Validates the norm within the load tolerance.
    pub fn to_state(&self) -> Result<PureState> {
        PureState::new(self.dims[0], self.dims[1], self.amplitudes.iter().map(from_json).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairFile {
    pub a: MatrixJson,
    pub b: MatrixJson,
}

/// `{"pairs": [{"a": matrix, "b": matrix}, ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperationFile {
    pub pairs: Vec<PairFile>,
}

impl OperationFile {
    pub fn from_pairs(pairs: &[KrausPair]) -> Self {
        OperationFile {
            pairs: pairs.iter().map(|p| PairFile { a: matrix_to_json(&p.a), b: matrix_to_json(&p.b) }).collect(),
        }
    }

    pub fn to_pairs(&self) -> Result<Vec<KrausPair>> {
        self.pairs
            .iter()
            .map(|p| Ok(KrausPair::new(matrix_from_json(&p.a)?, matrix_from_json(&p.b)?)))
            .collect()
    }

    /// Shape-checked set with its closure residual.
    pub fn to_set(&self) -> Result<ProductKrausSet> {
        ProductKrausSet::new(self.to_pairs()?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeFile {
    pub p: f64,
    pub state: StateFile,
}

/// `{"outcomes": [{"p": ..., "state": StateFile}], "pruned_mass": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleFile {
    pub outcomes: Vec<OutcomeFile>,
    #[serde(default)]
    pub pruned_mass: f64,
}

impl EnsembleFile {
    pub fn from_ensemble(e: &Ensemble) -> Self {
        EnsembleFile {
            outcomes: e
                .outcomes()
                .iter()
                .map(|(p, s)| OutcomeFile { p: *p, state: StateFile::from_state(s) })
                .collect(),
            pruned_mass: e.pruned_mass(),
        }
    }

    pub fn to_ensemble(&self) -> Result<Ensemble> {
        let outcomes = self
            .outcomes
            .iter()
            .map(|o| Ok((o.p, o.state.to_state()?)))
            .collect::<Result<Vec<_>>>()?;
        Ensemble::new(outcomes, self.pruned_mass)
    }
}

/// Either a single target state or an ensemble, told apart by their keys.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetFile {
    State(StateFile),
    Ensemble(EnsembleFile),
}

impl TargetFile {
    pub fn parse(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::invalid(format!("malformed JSON: {e}")))?;
        if value.get("outcomes").is_some() {
            serde_json::from_value(value)
                .map(TargetFile::Ensemble)
                .map_err(|e| Error::invalid(format!("malformed ensemble file: {e}")))
        } else {
            serde_json::from_value(value)
                .map(TargetFile::State)
                .map_err(|e| Error::invalid(format!("malformed state file: {e}")))
        }
    }
}

pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::invalid(format!("malformed JSON: {e}")))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
    parse_json(&text)
}
