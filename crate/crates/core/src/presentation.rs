//! Presentation files: a measured relation with named generators, as JSON.
//!
//! ```json
//! {"weights": ["1/2", "1/2"], "classes": [[0, 1]], "generators": {"s": {"1": 0}}}
//! ```
//!
//! Generator keys are point indices written as strings, values are target
//! points. Generator order is the order of the file.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::pperm::PartialBijection;
use crate::rational::{format_rational, parse_rational};
use crate::relation::{FinRelation, GeneratorSet};

#[derive(Clone, Debug)]
pub struct Presentation {
    pub relation: FinRelation,
    pub generators: GeneratorSet,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}

fn point(value: &Value, what: &str) -> Result<usize> {
    value
        .as_u64()
        .map(|p| p as usize)
        .ok_or_else(|| invalid(format!("{what}: expected a point index, got {value}")))
}

impl Presentation {
    pub fn parse(text: &str) -> Result<Self> {
        let root: Value = serde_json::from_str(text)
            .map_err(|e| invalid(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        let root = root
            .as_object()
            .ok_or_else(|| invalid("top level must be an object"))?;
        for key in root.keys() {
            if !["weights", "classes", "generators"].contains(&key.as_str()) {
                return Err(invalid(format!("unknown field {key:?}")));
            }
        }
        let weights = root
            .get("weights")
            .and_then(Value::as_array)
            .ok_or_else(|| invalid("missing array \"weights\""))?
            .iter()
            .map(|w| match w {
                Value::String(s) => parse_rational(s),
                Value::Number(n) => parse_rational(&n.to_string()),
                other => Err(invalid(format!("weight {other} is not a rational string"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let classes = root
            .get("classes")
            .and_then(Value::as_array)
            .ok_or_else(|| invalid("missing array \"classes\""))?
            .iter()
            .map(|class| {
                class
                    .as_array()
                    .ok_or_else(|| invalid("each class must be an array of points"))?
                    .iter()
                    .map(|p| point(p, "class member"))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let relation = crate::relation::build_relation(weights, classes)?;
        let empty = Map::new();
        let gens = match root.get("generators") {
            None => &empty,
            Some(v) => v
                .as_object()
                .ok_or_else(|| invalid("\"generators\" must be an object"))?,
        };
        let mut generators = Vec::with_capacity(gens.len());
        for (name, graph) in gens {
            let graph = graph
                .as_object()
                .ok_or_else(|| invalid(format!("generator {name:?} must map points to points")))?;
            let mut pairs = Vec::with_capacity(graph.len());
            for (from, to) in graph {
                let x: usize = from.parse().map_err(|_| {
                    invalid(format!(
                        "generator {name:?}: key {from:?} is not a point index"
                    ))
                })?;
                pairs.push((x, point(to, &format!("generator {name:?}"))?));
            }
            let s = PartialBijection::from_pairs(relation.carrier(), &pairs)
                .map_err(|e| invalid(format!("generator {name:?}: {e}")))?;
            generators.push((name.clone(), s));
        }
        let generators = GeneratorSet::new(&relation, generators)?;
        Ok(Presentation {
            relation,
            generators,
        })
    }

    pub fn to_value(&self) -> Value {
        let weights: Vec<String> = self
            .relation
            .carrier()
            .weights()
            .iter()
            .map(format_rational)
            .collect();
        let mut gens = Map::new();
        for (name, s) in self
            .generators
            .names()
            .iter()
            .zip(self.generators.elements())
        {
            let graph: Map<String, Value> =
                s.pairs().map(|(x, y)| (x.to_string(), json!(y))).collect();
            gens.insert(name.clone(), Value::Object(graph));
        }
        json!({
            "weights": weights,
            "classes": self.relation.classes(),
            "generators": gens,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("JSON values always serialize")
    }

    /// The named generators, in the order given.
    pub fn select(&self, names: &[String]) -> Result<GeneratorSet> {
        let picked = names
            .iter()
            .map(|n| {
                self.generators
                    .get(n)
                    .cloned()
                    .map(|s| (n.clone(), s))
                    .ok_or_else(|| invalid(format!("no generator named {n:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        GeneratorSet::new(&self.relation, picked)
    }
}
