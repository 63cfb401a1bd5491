//! JSON file formats.
//!
//! Elements are written as a bare integer over prime fields and as a
//! coefficient list (constant term first) otherwise.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::field::{Elem, Field, FieldDescriptor, FieldError};
use crate::linalg::{Point, SquareMatrix};
use crate::pointset::{PointSet, PointSetError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    PointSet(#[from] PointSetError),
    #[error("point {index}: {msg}")]
    BadPoint { index: usize, msg: String },
}

pub fn elem_to_json(f: &Field, x: Elem) -> Value {
    if f.n() == 1 {
        Value::from(x.0)
    } else {
        Value::from(f.coeffs(x))
    }
}

pub fn elem_from_json(f: &Field, v: &Value) -> Result<Elem, String> {
    match v {
        Value::Number(n) if f.n() == 1 => {
            let i = n
                .as_u64()
                .ok_or_else(|| format!("{n} is not a nonnegative integer"))?;
            f.elem(i).map_err(|e| e.to_string())
        }
        Value::Array(items) if f.n() > 1 => {
            let coeffs = items
                .iter()
                .map(|c| {
                    c.as_u64()
                        .filter(|&c| c < f.p() as u64)
                        .map(|c| c as u32)
                        .ok_or_else(|| format!("coefficient {c} not in [0, {})", f.p()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if coeffs.len() != f.n() as usize {
                return Err(format!(
                    "expected {} coefficients, got {}",
                    f.n(),
                    coeffs.len()
                ));
            }
            f.from_coeffs(&coeffs).map_err(|e| e.to_string())
        }
        other => Err(format!("{other} is not an element of {}", f.descriptor())),
    }
}

pub fn point_to_json(f: &Field, p: &[Elem]) -> Value {
    Value::Array(p.iter().map(|&x| elem_to_json(f, x)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSetJson {
    pub field: FieldDescriptor,
    pub dim: usize,
    pub points: Vec<Vec<Value>>,
}

impl PointSetJson {
    pub fn from_set(e: &PointSet) -> PointSetJson {
        let f = e.field();
        PointSetJson {
            field: f.descriptor(),
            dim: e.dim(),
            points: e
                .points()
                .iter()
                .map(|p| p.iter().map(|&x| elem_to_json(f, x)).collect())
                .collect(),
        }
    }

    pub fn to_set(&self) -> Result<PointSet, IoError> {
        let f = Field::from_descriptor(&self.field)?;
        let mut points: Vec<Point> = Vec::with_capacity(self.points.len());
        for (index, raw) in self.points.iter().enumerate() {
            if raw.len() != self.dim {
                return Err(IoError::BadPoint {
                    index,
                    msg: format!("{} coordinates, expected {}", raw.len(), self.dim),
                });
            }
            let p = raw
                .iter()
                .map(|c| elem_from_json(&f, c))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|msg| IoError::BadPoint {
                    index,
                    msg: format!("{}: {msg}", Value::Array(raw.clone())),
                })?;
            points.push(p);
        }
        Ok(PointSet::new(&f, self.dim, points)?)
    }
}

pub fn pointset_from_str(s: &str) -> Result<PointSet, IoError> {
    serde_json::from_str::<PointSetJson>(s)?.to_set()
}

pub fn pointset_to_string(e: &PointSet) -> String {
    serde_json::to_string_pretty(&PointSetJson::from_set(e)).expect("point sets serialize")
}

pub fn load_pointset(path: &Path) -> Result<PointSet, IoError> {
    let s = fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    pointset_from_str(&s)
}

/// `{"field": ..., "d": 2, "entries": [[..], [..]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub field: FieldDescriptor,
    pub d: usize,
    pub entries: Vec<Vec<Value>>,
}

impl MatrixJson {
    pub fn from_matrix(f: &Field, m: &SquareMatrix) -> MatrixJson {
        MatrixJson {
            field: f.descriptor(),
            d: m.dim(),
            entries: m
                .rows()
                .into_iter()
                .map(|row| row.into_iter().map(|x| elem_to_json(f, x)).collect())
                .collect(),
        }
    }
}

/// `[{"r_or_t": key, "count": n}, ...]` rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    pub r_or_t: Value,
    pub count: u64,
}

pub fn count_rows<I: IntoIterator<Item = (Elem, u64)>>(f: &Field, rows: I) -> Vec<CountRow> {
    rows.into_iter()
        .map(|(k, count)| CountRow {
            r_or_t: elem_to_json(f, k),
            count,
        })
        .collect()
}
