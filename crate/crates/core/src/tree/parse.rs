//! JSON model dump reader and writer.
//!
//! ```json
//! {"n_features": 4, "aggregation": "sum",
//!  "trees": [{"nodes": [{"id": 0, "feature": 1, "threshold": 0.3, "left": 1, "right": 2,
//!                        "value": null, "count": 10}, ...]}]}
//! ```
//!
//! The root of each tree is the node with id 0.

use std::collections::HashMap;
use std::path::Path;

use serde_json::{json, Map, Value};

use super::{Aggregation, NodeKind, Tree, TreeEnsemble, TreeNode};
use crate::error::{Error, Result};

fn perr(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.into(),
        message: message.into(),
    }
}

fn get_int(obj: &Map<String, Value>, key: &str, path: &str) -> Result<Option<i64>> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_i64()
            .map(Some)
            .ok_or_else(|| perr(format!("{path}.{key}"), "expected an integer or null")),
    }
}

fn get_num(obj: &Map<String, Value>, key: &str, path: &str) -> Result<Option<f64>> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_f64()
            .map(Some)
            .ok_or_else(|| perr(format!("{path}.{key}"), "expected a number or null")),
    }
}

pub fn parse_model(document: &str) -> Result<TreeEnsemble> {
    let root: Value = serde_json::from_str(document).map_err(|e| perr("$", e.to_string()))?;
    let obj = root.as_object().ok_or_else(|| perr("$", "expected an object"))?;

    let n_features = obj
        .get("n_features")
        .and_then(Value::as_u64)
        .ok_or_else(|| perr("$.n_features", "expected a non-negative integer"))? as usize;

    let aggregation = match obj.get("aggregation") {
        None | Some(Value::Null) => Aggregation::Sum,
        Some(Value::String(s)) if s == "sum" => Aggregation::Sum,
        Some(Value::String(s)) if s == "average" => Aggregation::Average,
        Some(_) => return Err(perr("$.aggregation", "expected \"sum\" or \"average\"")),
    };

    let feature_names = match obj.get("feature_names") {
        None | Some(Value::Null) => None,
        Some(Value::Array(a)) => Some(
            a.iter()
                .enumerate()
                .map(|(i, v)| {
                    v.as_str()
                        .map(str::to_owned)
                        .ok_or_else(|| perr(format!("$.feature_names[{i}]"), "expected a string"))
                })
                .collect::<Result<Vec<_>>>()?,
        ),
        Some(_) => return Err(perr("$.feature_names", "expected an array of strings")),
    };

    let trees_v = obj
        .get("trees")
        .and_then(Value::as_array)
        .ok_or_else(|| perr("$.trees", "expected an array"))?;

    let mut trees = Vec::with_capacity(trees_v.len());
    for (t, tv) in trees_v.iter().enumerate() {
        trees.push(parse_tree(tv, t, n_features)?);
    }
    let ensemble = TreeEnsemble::new(trees, n_features, aggregation)?;
    match feature_names {
        Some(names) => ensemble.with_feature_names(names),
        None => Ok(ensemble),
    }
}

fn parse_tree(tv: &Value, t: usize, n_features: usize) -> Result<Tree> {
    let tpath = format!("$.trees[{t}]");
    let nodes_v = tv
        .get("nodes")
        .and_then(Value::as_array)
        .ok_or_else(|| perr(format!("{tpath}.nodes"), "expected an array"))?;
    if nodes_v.is_empty() {
        return Err(perr(format!("{tpath}.nodes"), "tree has no nodes"));
    }

    struct Raw {
        id: i64,
        feature: Option<i64>,
        threshold: Option<f64>,
        left: Option<i64>,
        right: Option<i64>,
        value: Option<f64>,
        count: u64,
    }

    let mut raws = Vec::with_capacity(nodes_v.len());
    let mut index_of: HashMap<i64, usize> = HashMap::new();
    for (k, nv) in nodes_v.iter().enumerate() {
        let path = format!("{tpath}.nodes[{k}]");
        let o = nv.as_object().ok_or_else(|| perr(&path, "expected an object"))?;
        let id = get_int(o, "id", &path)?.ok_or_else(|| perr(format!("{path}.id"), "missing"))?;
        let count = match o.get("count") {
            Some(v) => v
                .as_u64()
                .ok_or_else(|| perr(format!("{path}.count"), "expected a non-negative integer"))?,
            None => return Err(perr(format!("{path}.count"), "missing")),
        };
        if index_of.insert(id, k).is_some() {
            return Err(perr(format!("{path}.id"), format!("duplicate node id {id}")));
        }
        raws.push(Raw {
            id,
            feature: get_int(o, "feature", &path)?,
            threshold: get_num(o, "threshold", &path)?,
            left: get_int(o, "left", &path)?,
            right: get_int(o, "right", &path)?,
            value: get_num(o, "value", &path)?,
            count,
        });
    }

    let root_pos = *index_of
        .get(&0)
        .ok_or_else(|| perr(format!("{tpath}.nodes"), "no node with id 0 (root)"))?;

    // Table order: root first, then the remaining nodes in document order.
    let mut order: Vec<usize> = Vec::with_capacity(raws.len());
    order.push(root_pos);
    order.extend((0..raws.len()).filter(|&k| k != root_pos));
    let mut table_index = vec![0usize; raws.len()];
    for (new, &old) in order.iter().enumerate() {
        table_index[old] = new;
    }

    let mut nodes = Vec::with_capacity(raws.len());
    for &k in &order {
        let r = &raws[k];
        let path = format!("{tpath}.nodes[{k}]");
        let kind = match (r.feature, r.left, r.right) {
            (Some(f), Some(l), Some(rt)) => {
                if f < 0 {
                    return Err(perr(format!("{path}.feature"), "negative feature index"));
                }
                let threshold = r
                    .threshold
                    .ok_or_else(|| perr(format!("{path}.threshold"), "internal node needs a threshold"))?;
                let resolve = |id: i64, key: &str| {
                    index_of
                        .get(&id)
                        .map(|&pos| table_index[pos])
                        .ok_or_else(|| perr(format!("{path}.{key}"), format!("unknown node id {id}")))
                };
                NodeKind::Internal {
                    feature: f as usize,
                    threshold,
                    left: resolve(l, "left")?,
                    right: resolve(rt, "right")?,
                }
            }
            (None, None, None) => NodeKind::Leaf {
                value: r
                    .value
                    .ok_or_else(|| perr(format!("{path}.value"), "leaf node needs a value"))?,
            },
            _ => {
                return Err(perr(
                    &path,
                    "feature, left and right must be all set (internal) or all null (leaf)",
                ))
            }
        };
        nodes.push(TreeNode {
            id: r.id,
            kind,
            count: r.count,
        });
    }
    Tree::new(nodes, n_features, t)
}

pub fn read_model(path: impl AsRef<Path>) -> Result<TreeEnsemble> {
    let text = std::fs::read_to_string(path)?;
    parse_model(&text)
}

impl TreeEnsemble {
    /// Serializes to the model dump schema accepted by [`parse_model`].
    pub fn to_json(&self) -> Value {
        let trees: Vec<Value> = self
            .trees()
            .iter()
            .map(|t| {
                let nodes: Vec<Value> = t
                    .nodes()
                    .iter()
                    .map(|n| match n.kind {
                        NodeKind::Internal {
                            feature,
                            threshold,
                            left,
                            right,
                        } => json!({
                            "id": n.id, "feature": feature, "threshold": threshold,
                            "left": t.node(left).id, "right": t.node(right).id,
                            "value": null, "count": n.count,
                        }),
                        NodeKind::Leaf { value } => json!({
                            "id": n.id, "feature": null, "threshold": null,
                            "left": null, "right": null, "value": value, "count": n.count,
                        }),
                    })
                    .collect();
                json!({ "nodes": nodes })
            })
            .collect();
        let mut doc = json!({
            "n_features": self.n_features(),
            "aggregation": self.aggregation(),
            "trees": trees,
        });
        if let Some(names) = self.feature_names() {
            doc["feature_names"] = json!(names);
        }
        doc
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_json())?;
        std::fs::write(path, text)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_leaf_document() {
        let doc = r#"{"n_features": 2, "aggregation": "sum", "trees": [{"nodes": [
            {"id": 0, "feature": null, "threshold": null, "left": null, "right": null, "value": 3.0, "count": 10}]}]}"#;
        let e = parse_model(doc).unwrap();
        assert_eq!(e.predict(&[1.0, -4.0]).unwrap(), 3.0);
    }

    #[test]
    fn count_violation_is_validation_error() {
        let doc = r#"{"n_features": 1, "trees": [{"nodes": [
            {"id": 0, "feature": 0, "threshold": 0.5, "left": 1, "right": 2, "count": 10},
            {"id": 1, "value": 1.0, "count": 4},
            {"id": 2, "value": 2.0, "count": 7}]}]}"#;
        assert!(matches!(parse_model(doc), Err(Error::CountMismatch { .. })));
    }

    #[test]
    fn schema_violation_names_the_path() {
        let doc = r#"{"n_features": 1, "trees": [{"nodes": [
            {"id": 0, "feature": 0, "threshold": "x", "left": 1, "right": 2, "count": 2},
            {"id": 1, "value": 1.0, "count": 1},
            {"id": 2, "value": 2.0, "count": 1}]}]}"#;
        match parse_model(doc) {
            Err(Error::Parse { path, .. }) => assert_eq!(path, "$.trees[0].nodes[0].threshold"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_root_and_unknown_child() {
        let doc = r#"{"n_features": 1, "trees": [{"nodes": [{"id": 5, "value": 1.0, "count": 1}]}]}"#;
        assert!(matches!(parse_model(doc), Err(Error::Parse { .. })));
        let doc = r#"{"n_features": 1, "trees": [{"nodes": [
            {"id": 0, "feature": 0, "threshold": 0.5, "left": 1, "right": 9, "count": 2},
            {"id": 1, "value": 1.0, "count": 1}]}]}"#;
        match parse_model(doc) {
            Err(Error::Parse { path, .. }) => assert!(path.ends_with(".right")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ids_need_not_be_dense_or_ordered() {
        let doc = r#"{"n_features": 1, "trees": [{"nodes": [
            {"id": 40, "value": 2.0, "count": 1},
            {"id": 0, "feature": 0, "threshold": 0.5, "left": 7, "right": 40, "count": 2},
            {"id": 7, "value": 1.0, "count": 1}]}]}"#;
        let e = parse_model(doc).unwrap();
        assert_eq!(e.predict(&[0.0]).unwrap(), 1.0);
        assert_eq!(e.predict(&[1.0]).unwrap(), 2.0);
        let again = parse_model(&e.to_json().to_string()).unwrap();
        assert_eq!(again.predict(&[1.0]).unwrap(), 2.0);
        let ids: Vec<i64> = again.trees()[0].leaf_regions().iter().map(|r| r.leaf_id).collect();
        assert_eq!(ids, vec![7, 40]);
    }
}
