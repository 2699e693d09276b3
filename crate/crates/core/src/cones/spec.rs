//! JSON descriptions of sets: `{"name": ..., "params": {...}, "ops": [...]}`.
//!
//! `params.dim` is always the real ambient dimension. Operations apply left to right;
//! `intersect` and `union` combine the running set with the listed sets.

use serde::{Deserialize, Serialize};

use super::ConeSet;
use crate::config::{from_json_str, from_value};
use crate::error::{Error, Result};
use crate::symmat::{Field, Mat, SymMatrix};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetSpec {
    pub name: String,
    #[serde(default = "empty_object")]
    pub params: serde_json::Value,
    #[serde(default)]
    pub ops: Vec<SetOp>,
}

fn empty_object() -> serde_json::Value {
    serde_json::Value::Object(Default::default())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetOp {
    Dual,
    Translate(SymMatrix),
    Conjugate(Vec<Vec<f64>>),
    Intersect(Vec<SetSpec>),
    Union(Vec<SetSpec>),
    ProductExtend { n: usize, coords: Vec<usize> },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DimOnly {
    dim: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HalfspaceParams {
    a0: SymMatrix,
    #[serde(default)]
    c: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldIndex {
    #[serde(alias = "p")]
    q: usize,
    #[serde(default)]
    field: Field,
    dim: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PQ {
    p: usize,
    q: usize,
    dim: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PDim {
    p: usize,
    dim: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KDim {
    k: usize,
    dim: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Phase {
    c: f64,
    dim: usize,
}

/// Names accepted in `"name"`.
pub const SET_NAMES: &[&str] = &[
    "P", "Ptilde", "harm", "halfspace", "branch", "PG", "PqG", "LAG", "ISO", "SL", "det", "sigma_k",
];

impl SetSpec {
    pub fn from_json(src: &str) -> Result<SetSpec> {
        from_json_str(src)
    }

    pub fn build(&self) -> Result<ConeSet> {
        self.build_at("")
    }

    fn build_at(&self, at: &str) -> Result<ConeSet> {
        let p = format!("{at}/params");
        let params = self.params.clone();
        let located = |e: Error| match e {
            Error::InvalidParameter(message) => Error::Config {
                pointer: p.clone(),
                message,
            },
            other => other,
        };
        let mut set = match self.name.as_str() {
            "P" => ConeSet::psd(from_value::<DimOnly>(params, &p)?.dim),
            "Ptilde" => ConeSet::ptilde(from_value::<DimOnly>(params, &p)?.dim),
            "harm" => ConeSet::harm(from_value::<DimOnly>(params, &p)?.dim),
            "halfspace" => {
                let h: HalfspaceParams = from_value(params, &p)?;
                ConeSet::halfspace(&h.a0, h.c).map_err(located)?
            }
            "branch" => {
                let b: FieldIndex = from_value(params, &p)?;
                ConeSet::branch(b.q, b.field, b.dim).map_err(located)?
            }
            "PG" => {
                let b: FieldIndex = from_value(params, &p)?;
                ConeSet::geometric(b.q, b.field, b.dim).map_err(located)?
            }
            "PqG" => {
                let b: PQ = from_value(params, &p)?;
                ConeSet::next_tier(b.p, b.q, b.dim).map_err(located)?
            }
            "LAG" => ConeSet::lag(from_value::<DimOnly>(params, &p)?.dim).map_err(located)?,
            "ISO" => {
                let b: PDim = from_value(params, &p)?;
                ConeSet::iso(b.p, b.dim).map_err(located)?
            }
            "SL" => {
                let b: Phase = from_value(params, &p)?;
                ConeSet::special_lagrangian(b.c, b.dim).map_err(located)?
            }
            "det" => ConeSet::garding_det(from_value::<DimOnly>(params, &p)?.dim).map_err(located)?,
            "sigma_k" => {
                let b: KDim = from_value(params, &p)?;
                ConeSet::sigma_k(b.k, b.dim).map_err(located)?
            }
            other => {
                return Err(Error::Config {
                    pointer: format!("{at}/name"),
                    message: format!("unknown set '{other}', expected one of {SET_NAMES:?}"),
                })
            }
        };
        if matches!(self.name.as_str(), "P" | "Ptilde" | "harm") {
            super::check_dim(set.dim()).map_err(located)?;
        }
        for (i, op) in self.ops.iter().enumerate() {
            let here = format!("{at}/ops/{i}");
            let located = |e: Error| match e {
                Error::InvalidParameter(message) | Error::Precondition(message) => Error::Config {
                    pointer: here.clone(),
                    message,
                },
                Error::DimensionMismatch { expected, found } => Error::Config {
                    pointer: here.clone(),
                    message: format!("dimension mismatch: expected {expected}, found {found}"),
                },
                Error::SingularMatrix => Error::Config {
                    pointer: here.clone(),
                    message: "conjugating matrix is singular".into(),
                },
                other => other,
            };
            set = match op {
                SetOp::Dual => set.dual(),
                SetOp::Translate(a0) => set.translate(a0).map_err(located)?,
                SetOp::Conjugate(rows) => {
                    let g = Mat::from_rows(rows).map_err(located)?;
                    set.conjugate(&g).map_err(located)?
                }
                SetOp::Intersect(others) | SetOp::Union(others) => {
                    let mut all = vec![set];
                    let key = if matches!(op, SetOp::Intersect(_)) {
                        "intersect"
                    } else {
                        "union"
                    };
                    for (j, s) in others.iter().enumerate() {
                        all.push(s.build_at(&format!("{here}/{key}/{j}"))?);
                    }
                    if matches!(op, SetOp::Intersect(_)) {
                        ConeSet::intersect(&all).map_err(located)?
                    } else {
                        ConeSet::union(&all).map_err(located)?
                    }
                }
                SetOp::ProductExtend { n, coords } => set.product_extend(*n, coords).map_err(located)?,
            };
        }
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(s: &str) -> Result<ConeSet> {
        SetSpec::from_json(s)?.build()
    }

    #[test]
    fn simple_names() {
        let f = build(r#"{"name": "SL", "params": {"c": 0.6, "dim": 2}}"#).unwrap();
        assert_eq!(f.dim(), 2);
        let g = build(r#"{"name": "branch", "params": {"q": 0, "field": "complex", "dim": 4}}"#).unwrap();
        assert_eq!(g.dim(), 4);
    }

    #[test]
    fn ops_chain() {
        let f = build(
            r#"{"name": "P", "params": {"dim": 1},
                "ops": [{"product_extend": {"n": 2, "coords": [0]}}, "dual",
                        {"intersect": [{"name": "harm", "params": {"dim": 2}}]}]}"#,
        )
        .unwrap();
        let a = SymMatrix::diag(&[3.0, -1.0]);
        // dual of {a11 >= 0} is itself; harm gives tr/2 = 1
        assert_eq!(f.defect(&a).unwrap(), 1.0);
    }

    #[test]
    fn errors_carry_pointers() {
        let cases = [
            (r#"{"name": "SL", "params": {"c": "x", "dim": 2}}"#, "/params/c"),
            (r#"{"name": "SL", "params": {"c": 9.0, "dim": 2}}"#, "/params"),
            (r#"{"name": "nope"}"#, "/name"),
            (
                r#"{"name": "P", "params": {"dim": 2}, "ops": [{"intersect": [{"name": "harm", "params": {"dim": "two"}}]}]}"#,
                "/ops/0/intersect/0/params/dim",
            ),
            (
                r#"{"name": "P", "params": {"dim": 2}, "ops": [{"translate": [[1.0]]}]}"#,
                "/ops/0",
            ),
        ];
        for (src, want) in cases {
            match build(src) {
                Err(Error::Config { pointer, .. }) => assert_eq!(pointer, want, "{src}"),
                other => panic!("{src}: {other:?}"),
            }
        }
    }
}
