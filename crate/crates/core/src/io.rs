//! Problem files.
//!
//! ```json
//! {"n": 2, "d": 4, "f": "5*x1 + 6*x2 + x1^3 - x2^2",
//!  "g": ["8 - x1*x2 - x1^4 - x2^4"], "A": [[1,0],[0,1]], "path": "auto",
//!  "box": [2, 2]}
//! ```
//!
//! Polynomials are strings or `{"n": …, "terms": [{"alpha": […], "c": …}]}`.
//! `d`, `g`, `A`, `path` and `box` are optional.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{BoundError, PathChoice, SemialgebraicProblem, TransformMatrix};
use crate::poly::{parse_polynomial, PolyError, SparsePolynomial};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("problem file is empty")]
    Empty,
    #[error("malformed problem file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{field}: {source}")]
    Poly {
        field: String,
        #[source]
        source: PolyError,
    },
    #[error("{field}: polynomial has {found} variables, n = {expected}")]
    Arity {
        field: String,
        expected: usize,
        found: usize,
    },
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error("{0}")]
    Path(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolySpec {
    Text(String),
    Terms(SparsePolynomial),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
    pub f: PolySpec,
    #[serde(default)]
    pub g: Vec<PolySpec>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    pub sample_box: Option<Vec<f64>>,
}

/// A parsed problem together with the path it asks for.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub problem: SemialgebraicProblem,
    pub path: Option<PathChoice>,
}

fn to_poly(spec: &PolySpec, n: usize, field: String) -> Result<SparsePolynomial, IoError> {
    let p = match spec {
        PolySpec::Text(s) => parse_polynomial(s, Some(n)).map_err(|source| IoError::Poly {
            field: field.clone(),
            source,
        })?,
        PolySpec::Terms(p) => p.clone(),
    };
    if p.n() != n {
        return Err(IoError::Arity {
            field,
            expected: n,
            found: p.n(),
        });
    }
    Ok(p)
}

impl ProblemFile {
    pub fn into_spec(self) -> Result<ProblemSpec, IoError> {
        let f = to_poly(&self.f, self.n, "f".into())?;
        let g = self
            .g
            .iter()
            .enumerate()
            .map(|(j, s)| to_poly(s, self.n, format!("g[{}]", j + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        let mut problem = SemialgebraicProblem::new(f, g, self.d)?;
        if let Some(rows) = self.a {
            let a = TransformMatrix::new(rows)?;
            problem = problem.with_matrix(a)?;
        }
        if let Some(b) = self.sample_box {
            if b.len() != self.n {
                return Err(IoError::Arity {
                    field: "box".into(),
                    expected: self.n,
                    found: b.len(),
                });
            }
            problem.sample_box = Some(b);
        }
        let path = self
            .path
            .as_deref()
            .map(str::parse::<PathChoice>)
            .transpose()
            .map_err(IoError::Path)?;
        Ok(ProblemSpec { problem, path })
    }

    /// The file form of `problem`, polynomials written as strings.
    pub fn from_problem(problem: &SemialgebraicProblem, path: Option<PathChoice>) -> Self {
        ProblemFile {
            n: problem.n(),
            d: Some(problem.d),
            f: PolySpec::Text(problem.f.to_string()),
            g: problem
                .g
                .iter()
                .map(|g| PolySpec::Text(g.to_string()))
                .collect(),
            a: problem.a.as_ref().map(|a| a.rows().to_vec()),
            path: path.map(|p| {
                serde_json::to_value(p)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_owned))
                    .unwrap_or_default()
            }),
            sample_box: problem.sample_box.clone(),
        }
    }
}

pub fn parse_problem(text: &str) -> Result<ProblemSpec, IoError> {
    if text.trim().is_empty() {
        return Err(IoError::Empty);
    }
    serde_json::from_str::<ProblemFile>(text)?.into_spec()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn string_and_object_polynomials() {
        let text = r#"{"n":2,"f":"5*x1 + 6*x2 + x1^3 - x2^2",
            "g":[{"n":2,"terms":[{"alpha":[0,0],"c":8},{"alpha":[4,0],"c":-1},{"alpha":[0,4],"c":-1},{"alpha":[1,1],"c":-1}]}]}"#;
        let spec = parse_problem(text).unwrap();
        assert_eq!(spec.problem.d, 4);
        assert_eq!(spec.problem.m(), 1);
        assert_eq!(spec.problem.g[0].constant_term(), 8.0);
        assert_eq!(spec.path, None);
    }

    #[test]
    fn matrix_path_and_box() {
        let text =
            r#"{"n":1,"d":2,"f":"x1","g":["1 - x1^2"],"A":[[1,0],[-1,1]],"path":"m1","box":[1.5]}"#;
        let spec = parse_problem(text).unwrap();
        assert_eq!(spec.path, Some(PathChoice::M1));
        assert_eq!(spec.problem.a.as_ref().unwrap().get(1, 0), -1.0);
        assert_eq!(spec.problem.sample_box, Some(vec![1.5]));
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_problem("  "), Err(IoError::Empty)));
        assert!(matches!(parse_problem("{"), Err(IoError::Json(_))));
        assert!(matches!(
            parse_problem(r#"{"n":1,"f":"x1 +"}"#),
            Err(IoError::Poly { .. })
        ));
        assert!(matches!(
            parse_problem(r#"{"n":1,"f":"x2"}"#),
            Err(IoError::Poly { .. })
        ));
        assert!(matches!(
            parse_problem(r#"{"n":1,"f":"x1","path":"x"}"#),
            Err(IoError::Path(_))
        ));
        assert!(matches!(
            parse_problem(r#"{"n":1,"f":"x1","extra":1}"#),
            Err(IoError::Json(_))
        ));
        assert!(matches!(
            parse_problem(r#"{"n":1,"f":"x1","g":["1"],"A":[[1]]}"#),
            Err(IoError::Bound(_))
        ));
    }

    #[test]
    fn round_trip() {
        let text = r#"{"n":2,"d":4,"f":"x1 - x2^3","g":["1 - x1^4","1 - x2^4"],"box":[1,1]}"#;
        let spec = parse_problem(text).unwrap();
        let file = ProblemFile::from_problem(&spec.problem, Some(PathChoice::Canonical));
        let again = serde_json::to_string(&file).unwrap();
        let back = parse_problem(&again).unwrap();
        assert_eq!(back.problem, spec.problem);
        assert_eq!(back.path, Some(PathChoice::Canonical));
    }
}
