//! JSON encodings of scalars, matrices and states.
//!
//! A complex number is `[re, im]`. A matrix is
//! `{"rows": R, "cols": C, "data": [[[re, im], ...], ...]}`, row-major. A
//! state is written as an `N x 1` matrix; on input a bare list of complex
//! numbers is accepted as well.

use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bipartite::GammaArray;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::states::{Observable, StateVector};

/// Tolerance of the Hermiticity and normalization checks on load.
pub const LOAD_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<[f64; 2]>>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: (0..m.rows())
                .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        if self.data.len() != self.rows {
            return Err(Error::Parse(format!(
                "field `data`: {} rows present, `rows` says {}",
                self.data.len(),
                self.rows
            )));
        }
        let mut flat = Vec::with_capacity(self.rows * self.cols);
        for (i, row) in self.data.iter().enumerate() {
            if row.len() != self.cols {
                return Err(Error::Parse(format!(
                    "field `data[{i}]`: {} entries present, `cols` says {}",
                    row.len(),
                    self.cols
                )));
            }
            for (j, &[re, im]) in row.iter().enumerate() {
                if !(re.is_finite() && im.is_finite()) {
                    return Err(Error::Parse(format!("field `data[{i}][{j}]`: non-finite entry")));
                }
                flat.push(C64::new(re, im));
            }
        }
        ComplexMatrix::from_vec(self.rows, self.cols, flat)
    }
}

/// Compact JSON text with keys in the order `rows, cols, data`.
pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    serde_json::to_string(&MatrixJson::from(m)).expect("plain data serializes")
}

pub fn state_to_json(psi: &StateVector) -> String {
    let column = ComplexMatrix::from_vec(psi.dim(), 1, psi.amplitudes().to_vec()).expect("column shape");
    matrix_to_json(&column)
}

pub fn gamma_to_json(gamma: &GammaArray) -> String {
    matrix_to_json(&gamma.entries())
}

fn parse_error(context: &str, e: serde_json::Error) -> Error {
    Error::Parse(format!("{context}: line {}, column {}: {e}", e.line(), e.column()))
}

pub fn parse_matrix(text: &str, context: &str) -> Result<ComplexMatrix> {
    let m: MatrixJson = serde_json::from_str(text).map_err(|e| parse_error(context, e))?;
    m.to_matrix().map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{context}: {msg}")),
        other => other,
    })
}

/// Parses a state vector without checking its norm.
pub fn parse_vector(text: &str, context: &str) -> Result<Vec<C64>> {
    let value: Value = serde_json::from_str(text).map_err(|e| parse_error(context, e))?;
    if value.is_array() {
        let entries: Vec<[f64; 2]> = serde_json::from_value(value).map_err(|e| parse_error(context, e))?;
        return Ok(entries.into_iter().map(|[re, im]| C64::new(re, im)).collect());
    }
    let m = parse_matrix(text, context)?;
    if m.cols() != 1 && m.rows() != 1 {
        return Err(Error::Parse(format!(
            "{context}: a state must be a single row or column, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(m.into_vec())
}

pub fn parse_observable(text: &str, context: &str) -> Result<Observable> {
    let m = parse_matrix(text, context)?;
    if !m.is_square() {
        return Err(Error::NotSquare(m.rows(), m.cols()));
    }
    let defect = m.hermiticity_defect();
    if defect > LOAD_TOL {
        return Err(Error::Validation {
            invariant: "hermiticity",
            detail: format!("{context}: max |A - A^†| = {defect:e}"),
        });
    }
    Observable::with_tolerance(m, LOAD_TOL)
}

pub fn parse_state(text: &str, context: &str) -> Result<StateVector> {
    let v = parse_vector(text, context)?;
    let psi = StateVector::new(v)?;
    let defect = (psi.norm_sqr() - 1.0).abs();
    if defect > LOAD_TOL {
        return Err(Error::Validation {
            invariant: "normalization",
            detail: format!("{context}: |ψ|² - 1 = {defect:e}"),
        });
    }
    Ok(psi)
}

/// Parses `Γ` (not divided by `√N`) and checks `Tr(ΓΓ^†)/N = 1`.
pub fn parse_gamma(text: &str, context: &str) -> Result<GammaArray> {
    let g = GammaArray::new(parse_matrix(text, context)?)?;
    let defect = (g.norm_sqr() - 1.0).abs();
    if defect > LOAD_TOL {
        return Err(Error::Validation {
            invariant: "normalization",
            detail: format!("{context}: Tr(ΓΓ^†)/N - 1 = {defect:e}"),
        });
    }
    Ok(g)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputKind {
    Observable,
    State,
    Gamma,
}

#[derive(Clone, Debug)]
pub enum LoadedInput {
    Observable(Observable),
    State(StateVector),
    Gamma(GammaArray),
}

pub fn load_input(path: &Path, kind: InputKind) -> Result<LoadedInput> {
    let text = std::fs::read_to_string(path)?;
    let context = path.display().to_string();
    Ok(match kind {
        InputKind::Observable => LoadedInput::Observable(parse_observable(&text, &context)?),
        InputKind::State => LoadedInput::State(parse_state(&text, &context)?),
        InputKind::Gamma => LoadedInput::Gamma(parse_gamma(&text, &context)?),
    })
}

pub fn load_inputs(paths: &[(&Path, InputKind)]) -> Result<Vec<LoadedInput>> {
    paths.iter().map(|&(p, k)| load_input(p, k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::pauli_y;

    #[test]
    fn matrix_round_trip() {
        let m = pauli_y().matrix().clone();
        let text = matrix_to_json(&m);
        assert!(text.starts_with(r#"{"rows":2,"cols":2,"data":[[[0.0,0.0],"#), "{text}");
        assert_eq!(parse_matrix(&text, "t").unwrap(), m);
        assert!(parse_observable(&text, "t").is_ok());
    }

    #[test]
    fn non_hermitian_names_the_invariant() {
        let text = r#"{"rows":2,"cols":2,"data":[[[0,0],[1,0]],[[0,0],[0,0]]]}"#;
        match parse_observable(text, "t") {
            Err(Error::Validation { invariant, .. }) => assert_eq!(invariant, "hermiticity"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn truncated_input_reports_position() {
        let err = parse_matrix(r#"{"rows":2,"cols":2,"data":[[[0,0],"#, "h.json").unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Parse(_)));
        assert!(msg.contains("h.json") && msg.contains("line 1"), "{msg}");
    }

    #[test]
    fn shape_errors_name_the_field() {
        let msg = parse_matrix(r#"{"rows":2,"cols":2,"data":[[[0,0],[1,0]],[[0,0]]]}"#, "t")
            .unwrap_err()
            .to_string();
        assert!(msg.contains("data[1]"), "{msg}");
    }

    #[test]
    fn states_in_both_layouts() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bare = format!("[[{s},0],[0,{s}]]");
        let psi = parse_state(&bare, "t").unwrap();
        let column = state_to_json(&psi);
        assert_eq!(parse_state(&column, "t").unwrap(), psi);
        match parse_state("[[1,0],[1,0]]", "t") {
            Err(Error::Validation { invariant, .. }) => assert_eq!(invariant, "normalization"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gamma_round_trip() {
        let g = GammaArray::new(ComplexMatrix::identity(3)).unwrap();
        let back = parse_gamma(&gamma_to_json(&g), "t").unwrap();
        assert!(back.entries().max_abs_diff(&g.entries()) < 1e-15);
    }
}
