//! JSON model files.
//!
//! Schema: `{"layer_sizes": [..], "activations": [..], "weights": [[[..]]], "biases": [[..]]}`
//! with one activation, weight matrix (rows = outputs) and bias vector per layer.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neural::{Activation, Layer, MlpParams};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    layer_sizes: Vec<usize>,
    activations: Vec<Activation>,
    weights: Vec<Vec<Vec<f64>>>,
    biases: Vec<Vec<f64>>,
}

fn schema(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema {
        field: field.into(),
        message: message.into(),
    }
}

impl From<&MlpParams> for ModelFile {
    fn from(net: &MlpParams) -> Self {
        ModelFile {
            layer_sizes: net.layer_sizes(),
            activations: net.layers().iter().map(|l| l.activation).collect(),
            weights: net
                .layers()
                .iter()
                .map(|l| l.weights.chunks_exact(l.inputs).map(<[f64]>::to_vec).collect())
                .collect(),
            biases: net.layers().iter().map(|l| l.biases.clone()).collect(),
        }
    }
}

impl TryFrom<ModelFile> for MlpParams {
    type Error = Error;

    fn try_from(m: ModelFile) -> Result<Self> {
        if m.layer_sizes.len() < 2 {
            return Err(schema("layer_sizes", "needs at least an input and an output size"));
        }
        if let Some(i) = m.layer_sizes.iter().position(|&s| s == 0) {
            return Err(schema(format!("layer_sizes[{i}]"), "must be positive"));
        }
        let n_layers = m.layer_sizes.len() - 1;
        for (field, len) in [
            ("activations", m.activations.len()),
            ("weights", m.weights.len()),
            ("biases", m.biases.len()),
        ] {
            if len != n_layers {
                return Err(schema(field, format!("expected {n_layers} entries, found {len}")));
            }
        }
        let mut layers = Vec::with_capacity(n_layers);
        for (l, ((w, b), act)) in m.weights.into_iter().zip(m.biases).zip(m.activations).enumerate() {
            let (inputs, outputs) = (m.layer_sizes[l], m.layer_sizes[l + 1]);
            if w.len() != outputs {
                return Err(schema(format!("weights[{l}]"), format!("expected {outputs} rows, found {}", w.len())));
            }
            if let Some((r, row)) = w.iter().enumerate().find(|(_, row)| row.len() != inputs) {
                return Err(schema(
                    format!("weights[{l}][{r}]"),
                    format!("expected {inputs} columns, found {}", row.len()),
                ));
            }
            if b.len() != outputs {
                return Err(schema(format!("biases[{l}]"), format!("expected {outputs} entries, found {}", b.len())));
            }
            layers.push(Layer {
                inputs,
                outputs,
                weights: w.concat(),
                biases: b,
                activation: act,
            });
        }
        MlpParams::from_layers(layers).map_err(|e| schema("weights", e.to_string()))
    }
}

impl Serialize for MlpParams {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ModelFile::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for MlpParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = ModelFile::deserialize(d)?;
        MlpParams::try_from(file).map_err(serde::de::Error::custom)
    }
}

pub fn model_to_json(net: &MlpParams) -> String {
    serde_json::to_string_pretty(&ModelFile::from(net)).expect("model serializes")
}

pub fn model_from_json(text: &str) -> Result<MlpParams> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| {
        // serde reports missing/unknown fields by name in its message
        schema(field_hint(&e.to_string()), e.to_string())
    })?;
    MlpParams::try_from(file)
}

fn field_hint(message: &str) -> String {
    message
        .split('`')
        .nth(1)
        .map(str::to_string)
        .unwrap_or_else(|| "<document>".to_string())
}

/// Write via a temporary sibling file and rename, so readers never see a partial model.
pub fn save_model(net: &MlpParams, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, model_to_json(net)).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<MlpParams> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    model_from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net() -> MlpParams {
        MlpParams::init_uniform(&[3, 4, 2], Activation::Tanh, Activation::Sigmoid, 0.5, 8).unwrap()
    }

    #[test]
    fn json_has_expected_keys() {
        let v: serde_json::Value = serde_json::from_str(&model_to_json(&net())).unwrap();
        assert_eq!(v["layer_sizes"], serde_json::json!([3, 4, 2]));
        assert_eq!(v["activations"], serde_json::json!(["tanh", "sigmoid"]));
        assert_eq!(v["weights"][0].as_array().unwrap().len(), 4);
        assert_eq!(v["weights"][0][0].as_array().unwrap().len(), 3);
    }

    #[test]
    fn truncated_file_is_a_schema_error() {
        let text = model_to_json(&net());
        let cut = &text[..text.len() / 2];
        assert!(matches!(model_from_json(cut), Err(Error::Schema { .. })));
    }

    #[test]
    fn schema_errors_name_the_field() {
        let mut v: serde_json::Value = serde_json::from_str(&model_to_json(&net())).unwrap();
        v["biases"][1] = serde_json::json!([0.0]);
        match model_from_json(&v.to_string()) {
            Err(Error::Schema { field, .. }) => assert_eq!(field, "biases[1]"),
            other => panic!("unexpected {other:?}"),
        }
        v.as_object_mut().unwrap().remove("weights");
        match model_from_json(&v.to_string()) {
            Err(Error::Schema { field, .. }) => assert_eq!(field, "weights"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn save_load_fixed_point() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        save_model(&net(), &p).unwrap();
        let once = load_model(&p).unwrap();
        save_model(&once, &p).unwrap();
        let twice = load_model(&p).unwrap();
        assert_eq!(once, twice);
        assert_eq!(once, net());
    }
}
