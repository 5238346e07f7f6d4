//! JSON model files.
//!
//! ```json
//! {"variant": "eff", "n_states": 2, "n_symbols": 2,
//!  "pi": [..N], "a": [[..N]; N], "b": [[..M]; N], "c": [[[..M]; M]; N]}
//! ```
//!
//! Numbers are written with the shortest representation that parses back to
//! the same value, so a save/load cycle is exact.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EffHmmModel, Variant};
use crate::scalar::Real;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile<T> {
    variant: Variant,
    n_states: usize,
    n_symbols: usize,
    pi: Vec<T>,
    a: Vec<Vec<T>>,
    b: Vec<Vec<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c: Option<Vec<Vec<Vec<T>>>>,
}

impl<T: Real> From<&EffHmmModel<T>> for ModelFile<T> {
    fn from(m: &EffHmmModel<T>) -> Self {
        let rows = |x: &ndarray::Array2<T>| x.rows().into_iter().map(|r| r.to_vec()).collect();
        let c = m
            .evidence()
            .outer_iter()
            .map(|block| rows(&block.to_owned()))
            .collect();
        ModelFile {
            variant: m.variant(),
            n_states: m.n_states(),
            n_symbols: m.n_symbols(),
            pi: m.initial().to_vec(),
            a: rows(m.transition()),
            b: rows(m.emission()),
            c: Some(c),
        }
    }
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        context: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    }
}

fn into_model<T: Real>(file: ModelFile<T>) -> Result<EffHmmModel<T>> {
    if file.variant == Variant::EvidenceFeedForward && file.c.is_none() {
        return Err(Error::Parse {
            context: "field \"c\"".into(),
            message: "missing field `c` (required for variant \"eff\")".into(),
        });
    }
    if file.pi.len() != file.n_states {
        return Err(Error::Parse {
            context: "field \"pi\"".into(),
            message: format!("{} entries but n_states = {}", file.pi.len(), file.n_states),
        });
    }
    if let Some(row) = file.b.iter().find(|r| r.len() != file.n_symbols) {
        return Err(Error::Parse {
            context: "field \"b\"".into(),
            message: format!(
                "row of {} entries but n_symbols = {}",
                row.len(),
                file.n_symbols
            ),
        });
    }
    let model = EffHmmModel::from_rows(file.variant, file.pi, file.a, file.b, file.c)?;
    model.ensure_valid()
}

pub fn model_to_json<T: Real>(model: &EffHmmModel<T>) -> String {
    serde_json::to_string_pretty(&ModelFile::from(model)).expect("model serializes") + "\n"
}

/// Parses and validates a model.
pub fn model_from_json<T: Real>(text: &str) -> Result<EffHmmModel<T>> {
    into_model(serde_json::from_str(text).map_err(parse_error)?)
}

pub fn save_model<T: Real, W: Write>(model: &EffHmmModel<T>, mut out: W) -> Result<()> {
    out.write_all(model_to_json(model).as_bytes())?;
    Ok(())
}

pub fn load_model<T: Real, R: Read>(mut source: R) -> Result<EffHmmModel<T>> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    model_from_json(&text)
}
