//! Backtracking searches for unimodular maps: isometries between positive
//! definite forms, and maps between spanning configurations of `+-` vectors.

use std::collections::HashSet;

use num_traits::{One, Signed, ToPrimitive};

use crate::exact_forms::{IntMat, LatticeVector, SymForm};
use crate::linalg::{inverse, rat, EchelonBasis};
use crate::minima::{lll_reduce, short_vectors};
use crate::{Int, Rat};

/// Which determinants are allowed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetFilter {
    Any,
    Positive,
}

impl DetFilter {
    fn admits(self, d: &Int) -> bool {
        match self {
            DetFilter::Any => d.abs().is_one(),
            DetFilter::Positive => d.is_one(),
        }
    }
}

/// `g` with `g^t A g = B`; all of them when `all` is set, else at most one.
pub fn form_isometries(a: &SymForm, b: &SymForm, filter: DetFilter, all: bool) -> Vec<IntMat> {
    let n = a.dim();
    if b.dim() != n || a.determinant() != b.determinant() {
        return Vec::new();
    }
    let (br, u) = lll_reduce(b);
    let u_inv = u.inverse().expect("LLL transform is unimodular");
    let mut candidates: Vec<Vec<Vec<i64>>> = Vec::with_capacity(n);
    for j in 0..n {
        let target = br.get(j, j);
        let Ok(vs) = short_vectors(a, target) else { return Vec::new() };
        let mut c = Vec::new();
        for (v, val) in vs {
            if &val == target {
                c.push(v.neg().0);
                c.push(v.0);
            }
        }
        if c.is_empty() {
            return Vec::new();
        }
        candidates.push(c);
    }
    let mut out = Vec::new();
    let mut chosen: Vec<Vec<i64>> = Vec::with_capacity(n);
    search_forms(a, &br, &candidates, &u_inv, filter, all, &mut chosen, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn search_forms(
    a: &SymForm,
    br: &SymForm,
    candidates: &[Vec<Vec<i64>>],
    u_inv: &IntMat,
    filter: DetFilter,
    all: bool,
    chosen: &mut Vec<Vec<i64>>,
    out: &mut Vec<IntMat>,
) -> bool {
    let j = chosen.len();
    if j == candidates.len() {
        let g = IntMat::from_columns(chosen).mul(u_inv);
        if filter.admits(&g.det()) {
            out.push(g);
            return !all;
        }
        return false;
    }
    for x in &candidates[j] {
        if (0..j).all(|i| &a.bilinear(&chosen[i], x) == br.get(i, j)) {
            chosen.push(x.clone());
            let done = search_forms(a, br, candidates, u_inv, filter, all, chosen, out);
            chosen.pop();
            if done {
                return true;
            }
        }
    }
    false
}

pub fn automorphisms(a: &SymForm, filter: DetFilter) -> Vec<IntMat> {
    form_isometries(a, a, filter, true)
}

/// Precomputed data for a configuration of `+-` vectors spanning `Q^N`:
/// `P = (sum v v^t)^{-1}` is preserved by every map between configurations.
#[derive(Clone, Debug)]
pub struct Config {
    pub n: usize,
    pub vectors: Vec<LatticeVector>,
    index: HashSet<LatticeVector>,
    p: Vec<Vec<Rat>>,
    basis: Vec<usize>,
    pub det_q: Rat,
    pub norms: Vec<Rat>,
}

impl Config {
    /// `None` unless the vectors span `Q^N`.
    pub fn new(vectors: Vec<LatticeVector>) -> Option<Self> {
        let n = vectors.first()?.dim();
        let mut e = EchelonBasis::new(n);
        let basis: Vec<usize> = (0..vectors.len()).filter(|&i| e.insert(vectors[i].to_rat())).collect();
        if basis.len() < n {
            return None;
        }
        let mut q = vec![vec![Rat::from_integer(Int::from(0)); n]; n];
        for v in &vectors {
            for i in 0..n {
                for j in 0..n {
                    q[i][j] += rat(v.0[i] * v.0[j]);
                }
            }
        }
        let det_q = crate::linalg::det_rat(&q);
        let p = inverse(&q)?;
        let index = vectors.iter().map(LatticeVector::canonical_sign).collect();
        let mut cfg = Self { n, vectors, index, p, basis, det_q, norms: Vec::new() };
        let mut norms: Vec<Rat> = cfg.vectors.iter().map(|v| cfg.pform(&v.0, &v.0)).collect();
        norms.sort();
        cfg.norms = norms;
        Some(cfg)
    }

    fn pform(&self, x: &[i64], y: &[i64]) -> Rat {
        let mut acc = Rat::from_integer(Int::from(0));
        for i in 0..self.n {
            if x[i] == 0 {
                continue;
            }
            for j in 0..self.n {
                if y[j] != 0 {
                    acc += &self.p[i][j] * Int::from(x[i] * y[j]);
                }
            }
        }
        acc
    }

    pub fn contains(&self, v: &LatticeVector) -> bool {
        self.index.contains(&v.canonical_sign())
    }

    /// Cheap invariants that any map must preserve.
    pub fn fingerprint(&self) -> (usize, Rat, Vec<Rat>) {
        (self.vectors.len(), self.det_q.clone(), self.norms.clone())
    }
}

/// Unimodular `h` with `h(+-V) = +-W` (vectors act by `v -> h v`).
pub fn config_maps(v: &Config, w: &Config, filter: DetFilter, all: bool) -> Vec<IntMat> {
    if v.n != w.n || v.fingerprint() != w.fingerprint() {
        return Vec::new();
    }
    let n = v.n;
    let targets: Vec<Vec<i64>> = w.vectors.iter().flat_map(|x| [x.0.clone(), x.neg().0]).collect();
    let basis: Vec<&[i64]> = v.basis.iter().map(|&i| v.vectors[i].0.as_slice()).collect();
    let gram: Vec<Vec<Rat>> = basis.iter().map(|x| basis.iter().map(|y| v.pform(x, y)).collect()).collect();
    let bmat: Vec<Vec<Rat>> = (0..n).map(|i| basis.iter().map(|b| rat(b[i])).collect()).collect();
    let b_inv = inverse(&bmat).expect("basis is independent");
    let mut out = Vec::new();
    let mut chosen: Vec<&[i64]> = Vec::with_capacity(n);
    search_configs(v, w, &targets, &gram, &b_inv, filter, all, &mut chosen, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn search_configs<'t>(
    v: &Config,
    w: &Config,
    targets: &'t [Vec<i64>],
    gram: &[Vec<Rat>],
    b_inv: &[Vec<Rat>],
    filter: DetFilter,
    all: bool,
    chosen: &mut Vec<&'t [i64]>,
    out: &mut Vec<IntMat>,
) -> bool {
    let n = v.n;
    let j = chosen.len();
    if j == n {
        // h = [w_1 .. w_n] [b_1 .. b_n]^{-1}
        let mut rows = vec![vec![0i64; n]; n];
        for (r, row) in rows.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                let mut acc = Rat::from_integer(Int::from(0));
                for k in 0..n {
                    acc += &b_inv[k][c] * Int::from(chosen[k][r]);
                }
                if !acc.is_integer() {
                    return false;
                }
                let Some(x) = acc.to_integer().to_i64() else { return false };
                *entry = x;
            }
        }
        let h = IntMat::from_rows(&rows);
        if !filter.admits(&h.det()) {
            return false;
        }
        if v.vectors.iter().all(|x| w.contains(&h.apply(x))) {
            out.push(h);
            return !all;
        }
        return false;
    }
    for t in targets {
        if w.pform(t, t) != gram[j][j] {
            continue;
        }
        if (0..j).all(|i| w.pform(chosen[i], t) == gram[i][j]) {
            chosen.push(t);
            let done = search_configs(v, w, targets, gram, b_inv, filter, all, chosen, out);
            chosen.pop();
            if done {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minima::a_n_form;

    fn lv(xs: &[i64]) -> LatticeVector {
        LatticeVector(xs.to_vec())
    }

    #[test]
    fn a2_automorphisms() {
        let a2 = a_n_form(2);
        assert_eq!(automorphisms(&a2, DetFilter::Any).len(), 12);
        assert_eq!(automorphisms(&a2, DetFilter::Positive).len(), 6);
        assert_eq!(automorphisms(&SymForm::identity(3), DetFilter::Any).len(), 48);
    }

    #[test]
    fn isometry_maps_forms() {
        let a = a_n_form(3);
        let g = IntMat::from_rows(&[vec![1, 2, 0], vec![0, 1, 0], vec![1, 1, 1]]);
        let b = a.act(&g).unwrap();
        let found = form_isometries(&a, &b, DetFilter::Any, false);
        assert_eq!(found.len(), 1);
        assert_eq!(a.act(&found[0]).unwrap(), b);
        assert!(form_isometries(&SymForm::identity(2), &a_n_form(2), DetFilter::Any, false).is_empty());
    }

    #[test]
    fn configuration_maps() {
        let v = Config::new(vec![lv(&[1, 0]), lv(&[0, 1]), lv(&[1, 1])]).unwrap();
        let all = config_maps(&v, &v, DetFilter::Any, true);
        assert_eq!(all.len(), 12);
        let w = Config::new(vec![lv(&[1, 0]), lv(&[1, 1]), lv(&[2, 1])]).unwrap();
        let h = &config_maps(&v, &w, DetFilter::Any, false)[0];
        for x in &v.vectors {
            assert!(w.contains(&h.apply(x)));
        }
        let edge = Config::new(vec![lv(&[1, 0]), lv(&[0, 1])]).unwrap();
        assert_eq!(config_maps(&edge, &edge, DetFilter::Any, true).len(), 8);
        assert!(Config::new(vec![lv(&[1, 0]), lv(&[2, 0])]).is_none());
    }
}
