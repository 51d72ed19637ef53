use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dbm::{Constraint, Dbm};
use crate::error::{Error, Result};
use crate::maxplus::{MaxPlusMatrix, MpScalar};
use crate::num::Num;

/// On-disk layout: `null` stands for ε.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    matrix: Vec<Vec<Option<Num>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    spec: Option<String>,
}

/// A validated system: regular matrix, optional initial set, optional spec.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub matrix: MaxPlusMatrix,
    /// `None` means all of `R^n`.
    pub initial: Option<Dbm>,
    pub spec: Option<String>,
}

impl Model {
    pub fn new(matrix: MaxPlusMatrix) -> Self {
        Model { matrix, initial: None, spec: None }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        let rows = file.matrix.into_iter().map(|r| r.into_iter().map(MpScalar::from).collect()).collect();
        let matrix =
            MaxPlusMatrix::from_rows(rows).map_err(|e| Error::Model { field: "matrix".into(), msg: e.to_string() })?;
        matrix.check_regular()?;
        let n = matrix.n();
        let initial = match file.initial {
            None => None,
            Some(lines) => {
                let mut cs = Vec::new();
                for (i, line) in lines.iter().enumerate() {
                    let parsed = Constraint::parse(line, n)
                        .map_err(|e| Error::Model { field: format!("initial[{i}]"), msg: e.to_string() })?;
                    cs.extend(parsed);
                }
                let d = Dbm::from_constraints(n, &cs).ok_or_else(|| Error::Model {
                    field: "initial".into(),
                    msg: "constraints are unsatisfiable".into(),
                })?;
                Some(d)
            }
        };
        Ok(Model { matrix, initial, spec: file.spec })
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            matrix: self.matrix.rows().map(|r| r.iter().map(|v| v.finite()).collect()).collect(),
            initial: self.initial.as_ref().map(|d| d.constraints().map(|c| c.to_string()).collect()),
            spec: self.spec.clone(),
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }
}

pub fn load_model(path: &Path) -> Result<Model> {
    let text = std::fs::read_to_string(path)?;
    Model::from_json(&text)
}

pub fn save_model(path: &Path, model: &Model) -> Result<()> {
    std::fs::write(path, model.to_json() + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn railway_file() {
        let m = Model::from_json(r#"{"matrix":[[2,5],[3,3]],"spec":"F G (t1 <= 5)"}"#).unwrap();
        assert_eq!(m.matrix, MaxPlusMatrix::from_ints(&[[Some(2), Some(5)], [Some(3), Some(3)]]).unwrap());
        assert_eq!(m.spec.as_deref(), Some("F G (t1 <= 5)"));
        assert!(m.initial.is_none());
    }

    #[test]
    fn reducible_loads() {
        let m = Model::from_json(r#"{"matrix":[[1,null],[null,1]]}"#).unwrap();
        assert!(!m.matrix.is_irreducible());
    }

    #[test]
    fn errors() {
        let e = Model::from_json(r#"{"matrix":[[null,null],[1,2]]}"#).unwrap_err();
        assert!(matches!(e, Error::NotRegular { row: 1 }), "{e}");
        assert!(matches!(Model::from_json(r#"{"matrix":[[1,2]]}"#), Err(Error::Model { .. })));
        assert!(matches!(
            Model::from_json(r#"{"matrix":[[1,2],[3,4]],"initial":["x1 - x3 <= 0"]}"#),
            Err(Error::Model { .. })
        ));
        assert!(matches!(
            Model::from_json(r#"{"matrix":[[1,2],[3,4]],"initial":["x1 - x2 < 0","x1 - x2 > 1"]}"#),
            Err(Error::Model { .. })
        ));
        assert!(matches!(Model::from_json(r#"{"matrix":[[1,2],[3,4]],"extra":1}"#), Err(Error::Json(_))));
        assert!(matches!(Model::from_json("{"), Err(Error::Json(_))));
    }

    #[test]
    fn fractional_entries_are_exact() {
        let m = Model::from_json(r#"{"matrix":[[0.1,2.5],[3,1e-6]]}"#).unwrap();
        assert_eq!(m.matrix.get(0, 0), MpScalar::Finite(Num::from_ticks(100_000)));
        assert_eq!(m.matrix.get(1, 1), MpScalar::Finite(Num::from_ticks(1)));
        assert_eq!(Model::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn round_trip_with_initial_set() {
        let m = Model::from_json(r#"{"matrix":[[2,5],[3,null]],"initial":["x1 - x2 >= 3"],"spec":"t1 <= 2"}"#).unwrap();
        assert_eq!(Model::from_json(&m.to_json()).unwrap(), m);
    }
}
