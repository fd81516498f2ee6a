//! Model file format: JSON with a root id, the uniform depth, and a node
//! map. Leaves carry an empty `children` list.
//!
//! ```json
//! {"root":"w0","depth":3,"nodes":{"w0":{"atoms":["q"],"children":["u","w1"]}}}
//! ```
//!
//! Loading always validates; an invalid file is rejected with the full
//! violation list.

use super::{ModelError, RawModel, TreeModel};

pub fn model_from_json(text: &str) -> Result<TreeModel, ModelError> {
    let raw: RawModel =
        serde_json::from_str(text).map_err(|e| ModelError::Malformed(e.to_string()))?;
    TreeModel::from_raw(&raw)
}

/// Deterministic: node keys are emitted in sorted order.
pub fn model_to_json(model: &TreeModel) -> String {
    serde_json::to_string(&model.to_raw()).expect("model serialization cannot fail")
}
