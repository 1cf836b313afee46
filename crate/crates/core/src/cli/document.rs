use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::flowstruct::realify;
use crate::matrix::{CMatrix, GeneratorMatrix, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Field::Real => "real",
            Field::Complex => "complex",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

/// One matrix per JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDocument {
    pub field: Field,
    pub entries: Vec<Vec<Entry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

/// A parsed input: the real generator used by the deciders, plus the complex
/// matrix when the file was complex.
#[derive(Debug, Clone)]
pub struct LoadedMatrix {
    pub name: String,
    pub field: Field,
    pub generator: GeneratorMatrix,
    pub complex: Option<CMatrix>,
}

impl LoadedMatrix {
    /// Dimension over the input's own field.
    pub fn dim(&self) -> usize {
        match &self.complex {
            Some(m) => m.nrows(),
            None => self.generator.dim(),
        }
    }
}

impl MatrixDocument {
    pub fn real(rows: &[&[f64]]) -> Self {
        MatrixDocument {
            field: Field::Real,
            entries: rows
                .iter()
                .map(|r| r.iter().map(|v| Entry::Real(*v)).collect())
                .collect(),
            name: None,
        }
    }

    pub fn complex(rows: &[&[Complex64]]) -> Self {
        MatrixDocument {
            field: Field::Complex,
            entries: rows
                .iter()
                .map(|r| r.iter().map(|z| Entry::Complex([z.re, z.im])).collect())
                .collect(),
            name: None,
        }
    }

    /// Validate and convert; `label` names the input in diagnostics.
    pub fn load(&self, label: &str) -> Result<LoadedMatrix, CliError> {
        let n = self.entries.len();
        let parse = |msg: String| CliError::parse(format!("{label}: {msg}"));
        if n == 0 {
            return Err(parse("matrix is empty".into()));
        }
        if let Some((i, row)) = self.entries.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(parse(format!(
                "row {i} has {} entries, expected {n} (matrix must be square)",
                row.len()
            )));
        }
        let name = self.name.clone().unwrap_or_else(|| label.to_string());
        match self.field {
            Field::Real => {
                let mut m = Matrix::zeros(n, n);
                for (i, row) in self.entries.iter().enumerate() {
                    for (j, e) in row.iter().enumerate() {
                        match e {
                            Entry::Real(v) if v.is_finite() => m[(i, j)] = *v,
                            Entry::Real(_) => return Err(parse(format!("entry ({i}, {j}) is not finite"))),
                            Entry::Complex(_) => {
                                return Err(parse(format!("entry ({i}, {j}) is complex but field is \"real\"")))
                            }
                        }
                    }
                }
                let generator = GeneratorMatrix::new(m).map_err(|e| parse(e.to_string()))?;
                Ok(LoadedMatrix {
                    name,
                    field: Field::Real,
                    generator,
                    complex: None,
                })
            }
            Field::Complex => {
                let mut m = CMatrix::zeros(n, n);
                for (i, row) in self.entries.iter().enumerate() {
                    for (j, e) in row.iter().enumerate() {
                        let z = match e {
                            Entry::Real(v) => Complex64::new(*v, 0.0),
                            Entry::Complex([re, im]) => Complex64::new(*re, *im),
                        };
                        if !(z.re.is_finite() && z.im.is_finite()) {
                            return Err(parse(format!("entry ({i}, {j}) is not finite")));
                        }
                        m[(i, j)] = z;
                    }
                }
                let generator = realify(&m).map_err(|e| parse(e.to_string()))?;
                Ok(LoadedMatrix {
                    name,
                    field: Field::Complex,
                    generator,
                    complex: Some(m),
                })
            }
        }
    }
}

pub fn read_matrix(path: &Path) -> Result<LoadedMatrix, CliError> {
    let label = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::parse(format!("{label}: {e}")))?;
    let doc: MatrixDocument = serde_json::from_str(&text).map_err(|e| CliError::parse(format!("{label}: {e}")))?;
    doc.load(&label)
}
