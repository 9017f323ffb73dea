//! Integral chain complexes `C_top -> ... -> C_0` with labelled cells.

use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::torsion::{format_matrix, parse_blocks, IntMatrix};
use crate::{Error, Int, Result};

/// `labels[k]` names the cells of degree `k`; `boundaries[k]` is
/// `d_{k+1}: C_{k+1} -> C_k`, a `|S_k| x |S_{k+1}|` matrix whose columns are
/// the images of the `(k+1)`-cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainComplexZ {
    labels: Vec<Vec<String>>,
    boundaries: Vec<IntMatrix>,
}

impl ChainComplexZ {
    pub fn new(labels: Vec<Vec<String>>, boundaries: Vec<IntMatrix>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::OutOfRange("complex needs at least degree 0".into()));
        }
        if boundaries.len() + 1 != labels.len() {
            return Err(Error::DimensionMismatch { expected: labels.len() - 1, got: boundaries.len() });
        }
        for (k, d) in boundaries.iter().enumerate() {
            if d.rows() != labels[k].len() {
                return Err(Error::DimensionMismatch { expected: labels[k].len(), got: d.rows() });
            }
            if d.cols() != labels[k + 1].len() {
                return Err(Error::DimensionMismatch { expected: labels[k + 1].len(), got: d.cols() });
            }
        }
        Ok(Self { labels, boundaries })
    }

    /// Complex with generic labels `e{k}_{i}` from boundary matrices.
    pub fn from_boundaries(sizes: Vec<usize>, boundaries: Vec<IntMatrix>) -> Result<Self> {
        let labels = sizes.iter().enumerate().map(|(k, &n)| (0..n).map(|i| format!("e{k}_{i}")).collect()).collect();
        Self::new(labels, boundaries)
    }

    pub fn top_degree(&self) -> usize {
        self.labels.len() - 1
    }

    pub fn size(&self, k: usize) -> usize {
        self.labels.get(k).map_or(0, Vec::len)
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.labels.iter().map(Vec::len).collect()
    }

    pub fn labels(&self, k: usize) -> &[String] {
        &self.labels[k]
    }

    /// `d_k: C_k -> C_{k-1}` for `1 <= k <= top`.
    pub fn boundary(&self, k: usize) -> Option<&IntMatrix> {
        k.checked_sub(1).and_then(|i| self.boundaries.get(i))
    }

    /// Verifies `d_k d_{k+1} = 0` in every degree.
    pub fn check(&self) -> Result<()> {
        for k in 1..self.boundaries.len() {
            let prod = self.boundaries[k - 1].mul(&self.boundaries[k])?;
            if !prod.is_zero() {
                return Err(Error::NotAComplex(k));
            }
        }
        Ok(())
    }

    /// Same complex with cells renumbered: `perms[k][i]` is the new index of
    /// cell `i` in degree `k`.
    pub fn permuted(&self, perms: &[Vec<usize>]) -> Self {
        let labels = self
            .labels
            .iter()
            .zip(perms)
            .map(|(ls, p)| {
                let mut out = vec![String::new(); ls.len()];
                for (i, l) in ls.iter().enumerate() {
                    out[p[i]] = l.clone();
                }
                out
            })
            .collect();
        let boundaries = self.boundaries.iter().enumerate().map(|(k, d)| d.permute(&perms[k], &perms[k + 1])).collect();
        Self { labels, boundaries }
    }

    pub fn to_json(&self) -> Value {
        let boundaries: Vec<Value> = self
            .boundaries
            .iter()
            .enumerate()
            .map(|(k, d)| {
                let mut entries = Vec::new();
                for i in 0..d.rows() {
                    for j in 0..d.cols() {
                        let v = d.get(i, j);
                        if !v.is_zero() {
                            entries.push(json!([i, j, int_to_json(v)]));
                        }
                    }
                }
                json!({"degree": k + 1, "rows": d.rows(), "cols": d.cols(), "entries": entries})
            })
            .collect();
        json!({"sizes": self.sizes(), "labels": self.labels, "boundaries": boundaries})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |what: &str| Error::Parse(format!("complex JSON: {what}"));
        let labels: Vec<Vec<String>> = match v.get("labels") {
            Some(l) => serde_json::from_value(l.clone()).map_err(|e| bad(&e.to_string()))?,
            None => {
                let sizes: Vec<usize> = serde_json::from_value(v.get("sizes").ok_or_else(|| bad("no sizes"))?.clone())
                    .map_err(|e| bad(&e.to_string()))?;
                sizes.iter().enumerate().map(|(k, &n)| (0..n).map(|i| format!("e{k}_{i}")).collect()).collect()
            }
        };
        let mut boundaries = Vec::new();
        for b in v.get("boundaries").and_then(Value::as_array).ok_or_else(|| bad("no boundaries"))? {
            let rows = b.get("rows").and_then(Value::as_u64).ok_or_else(|| bad("rows"))? as usize;
            let cols = b.get("cols").and_then(Value::as_u64).ok_or_else(|| bad("cols"))? as usize;
            let mut m = IntMatrix::zeros(rows, cols);
            for e in b.get("entries").and_then(Value::as_array).ok_or_else(|| bad("entries"))? {
                let t = e.as_array().filter(|t| t.len() == 3).ok_or_else(|| bad("entry"))?;
                let i = t[0].as_u64().ok_or_else(|| bad("entry row"))? as usize;
                let j = t[1].as_u64().ok_or_else(|| bad("entry col"))? as usize;
                if i >= rows || j >= cols {
                    return Err(bad("entry out of range"));
                }
                m.set(i, j, int_from_json(&t[2]).ok_or_else(|| bad("entry value"))?);
            }
            boundaries.push(m);
        }
        Self::new(labels, boundaries)
    }

    /// Sparse text form: `% sizes ...`, then one `k rows cols nnz` block per
    /// boundary map `d_k` with 1-based `i j value` triples.
    pub fn to_text(&self) -> String {
        let sizes: Vec<String> = self.sizes().iter().map(ToString::to_string).collect();
        let mut s = format!("% sizes {}\n", sizes.join(" "));
        for (k, d) in self.boundaries.iter().enumerate() {
            s.push_str(&format_matrix(k + 1, d));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let (sizes, blocks) = parse_blocks(text)?;
        let mut blocks = blocks;
        blocks.sort_by_key(|(k, _)| *k);
        for (idx, (k, _)) in blocks.iter().enumerate() {
            if *k != idx + 1 {
                return Err(Error::Parse(format!("boundary degrees must be 1..=top, found {k}")));
            }
        }
        let sizes = match sizes {
            Some(s) => s,
            None if blocks.is_empty() => return Err(Error::Parse("empty complex without sizes".into())),
            None => {
                let mut s: Vec<usize> = blocks.iter().map(|(_, m)| m.rows()).collect();
                s.push(blocks.last().unwrap().1.cols());
                s
            }
        };
        Self::from_boundaries(sizes, blocks.into_iter().map(|(_, m)| m).collect())
    }
}

fn int_to_json(v: &Int) -> Value {
    match v.to_i64() {
        Some(x) => json!(x),
        None => json!(v.to_string()),
    }
}

fn int_from_json(v: &Value) -> Option<Int> {
    match v {
        Value::Number(n) => n.as_i64().map(Int::from),
        Value::String(s) => s.parse().ok(),
        _ => None,
    }
}
