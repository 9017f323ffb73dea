//! Minimum, minimal vectors and perfection of positive definite forms, plus
//! the bounded-basis reduction behind the coordinate bound `|x_i| <= A(N)`.

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::exact_forms::{rat_from_json, sym_dim, IntMat, LatticeVector, SymForm};
use crate::linalg::{hnf_upper_basis, inverse, rank_rat, rat, round_rat};
use crate::{Error, Int, Rat, Result};

/// `mu(A)` and the minimal vectors of `A`, one per `+-` pair, sorted
/// lexicographically; each stored vector has positive first nonzero entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinVecSet {
    pub mu: Rat,
    pub vectors: Vec<LatticeVector>,
}

impl MinVecSet {
    pub fn pair_count(&self) -> usize {
        self.vectors.len()
    }
}

#[derive(Serialize, Deserialize)]
struct MinVecSetJson {
    mu: serde_json::Value,
    pairs: Vec<Vec<i64>>,
}

impl Serialize for MinVecSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MinVecSetJson {
            mu: serde_json::Value::String(self.mu.to_string()),
            pairs: self.vectors.iter().map(|v| v.0.clone()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MinVecSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MinVecSetJson::deserialize(d)?;
        Ok(MinVecSet {
            mu: rat_from_json(&raw.mu).map_err(de::Error::custom)?,
            vectors: raw.pairs.into_iter().map(LatticeVector).collect(),
        })
    }
}

/// Gram-Schmidt data of a Gram matrix: `mu[i][j]` for `j < i` and squared
/// lengths `b[i]`.
fn gram_schmidt(g: &SymForm) -> (Vec<Vec<Rat>>, Vec<Rat>) {
    let n = g.dim();
    let mut mu = vec![vec![Rat::zero(); n]; n];
    let mut b = vec![Rat::zero(); n];
    for i in 0..n {
        for j in 0..i {
            let mut s = g.get(i, j).clone();
            for k in 0..j {
                s -= &mu[j][k] * &mu[i][k] * &b[k];
            }
            mu[i][j] = s / &b[j];
        }
        let mut s = g.get(i, i).clone();
        for k in 0..i {
            s -= &mu[i][k] * &mu[i][k] * &b[k];
        }
        b[i] = s;
    }
    (mu, b)
}

/// LLL reduction (delta = 99/100) of a positive definite Gram matrix.
/// Returns `(A', u)` with `A' = u^t A u`.
pub fn lll_reduce(a: &SymForm) -> (SymForm, IntMat) {
    let n = a.dim();
    let delta = Rat::new(99.into(), 100.into());
    let mut cols: Vec<Vec<i64>> = (0..n).map(|j| LatticeVector::unit(n, j).0).collect();
    let mut k = 1;
    let gram = |cols: &Vec<Vec<i64>>| a.act_unchecked(&IntMat::from_columns(cols));
    while k < n {
        for j in (0..k).rev() {
            let (mu, _) = gram_schmidt(&gram(&cols));
            let r = round_rat(&mu[k][j]);
            if !r.is_zero() {
                let r = r.to_i64().expect("LLL coefficient overflow");
                let cj = cols[j].clone();
                for (x, y) in cols[k].iter_mut().zip(&cj) {
                    *x -= r * y;
                }
            }
        }
        let (mu, b) = gram_schmidt(&gram(&cols));
        let lhs = &b[k];
        let rhs = (&delta - &mu[k][k - 1] * &mu[k][k - 1]) * &b[k - 1];
        if *lhs < rhs {
            cols.swap(k, k - 1);
            k = k.saturating_sub(1).max(1);
        } else {
            k += 1;
        }
    }
    let u = IntMat::from_columns(&cols);
    (a.act_unchecked(&u), u)
}

/// Completed-squares data for exact Fincke-Pohst enumeration:
/// `A[x] = sum_i q_ii (x_i + sum_{j>i} q_ij x_j)^2`.
struct Ldl {
    n: usize,
    q: Vec<Vec<Rat>>,
}

impl Ldl {
    fn new(a: &SymForm) -> Result<Self> {
        let n = a.dim();
        let mut q = vec![vec![Rat::zero(); n]; n];
        for i in 0..n {
            let mut d = a.get(i, i).clone();
            for k in 0..i {
                d -= &q[k][k] * &q[k][i] * &q[k][i];
            }
            if !d.is_positive() {
                return Err(Error::NotPositiveDefinite);
            }
            q[i][i] = d;
            for j in i + 1..n {
                let mut s = a.get(i, j).clone();
                for k in 0..i {
                    s -= &q[k][k] * &q[k][i] * &q[k][j];
                }
                q[i][j] = s / &q[i][i];
            }
        }
        Ok(Self { n, q })
    }

    fn enumerate(&self, bound: &Rat, out: &mut Vec<(Vec<i64>, Rat)>) {
        let mut x = vec![0i64; self.n];
        self.level(self.n - 1, &mut x, &Rat::zero(), bound, out);
    }

    fn level(&self, i: usize, x: &mut [i64], partial: &Rat, bound: &Rat, out: &mut Vec<(Vec<i64>, Rat)>) {
        let remaining = bound - partial;
        if remaining.is_negative() {
            return;
        }
        let mut center = Rat::zero();
        for j in i + 1..self.n {
            if x[j] != 0 {
                center -= &self.q[i][j] * Int::from(x[j]);
            }
        }
        let qii = &self.q[i][i];
        let c = center.to_f64().unwrap_or(0.0);
        let r = (remaining.to_f64().unwrap_or(f64::MAX) / qii.to_f64().unwrap_or(1.0)).sqrt();
        let lo = (c - r).floor() as i64 - 1;
        let hi = (c + r).ceil() as i64 + 1;
        for xi in lo..=hi {
            let diff = rat(xi) - &center;
            let term = qii * &diff * &diff;
            if term > remaining {
                continue;
            }
            x[i] = xi;
            let total = partial + &term;
            if i == 0 {
                if x.iter().any(|&v| v != 0) {
                    out.push((x.to_vec(), total));
                }
            } else {
                self.level(i - 1, x, &total, bound, out);
            }
        }
        x[i] = 0;
    }
}

/// All nonzero `x` (one per `+-` pair) with `A[x] <= bound`, with their
/// values, in the original coordinates. Enumeration runs on an LLL-reduced
/// copy of `A`.
pub fn short_vectors(a: &SymForm, bound: &Rat) -> Result<Vec<(LatticeVector, Rat)>> {
    let (reduced, u) = lll_reduce(a);
    let ldl = Ldl::new(&reduced)?;
    let mut raw = Vec::new();
    ldl.enumerate(bound, &mut raw);
    let mut out: Vec<(LatticeVector, Rat)> = raw
        .into_iter()
        .map(|(x, val)| (u.apply(&LatticeVector(x)), val))
        .filter(|(v, _)| v.canonical_sign() == *v)
        .collect();
    out.sort();
    Ok(out)
}

pub fn shortest_vectors(a: &SymForm) -> Result<MinVecSet> {
    if !a.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    let (reduced, _) = lll_reduce(a);
    let bound = (0..a.dim()).map(|i| reduced.get(i, i).clone()).min().unwrap();
    let all = short_vectors(a, &bound)?;
    let mu = all.iter().map(|(_, v)| v.clone()).min().ok_or_else(|| Error::Internal("no short vectors".into()))?;
    let vectors = all.into_iter().filter(|(_, v)| *v == mu).map(|(x, _)| x).collect();
    Ok(MinVecSet { mu, vectors })
}

/// Whether the rank-one forms `v v^t`, `v` minimal, span all symmetric
/// matrices.
pub fn is_perfect(a: &SymForm) -> Result<bool> {
    let m = shortest_vectors(a)?;
    Ok(is_perfect_set(a.dim(), &m.vectors))
}

pub(crate) fn is_perfect_set(n: usize, vectors: &[LatticeVector]) -> bool {
    let rows: Vec<Vec<Rat>> = vectors.iter().map(|v| v.sym_coords_rat()).collect();
    vectors.len() >= sym_dim(n) && rank_rat(&rows) == sym_dim(n)
}

fn lin_independent_subset(vectors: &[LatticeVector], n: usize) -> Option<Vec<LatticeVector>> {
    let mut e = crate::linalg::EchelonBasis::new(n);
    let mut out = Vec::new();
    for v in vectors {
        if e.insert(v.to_rat()) {
            out.push(v.clone());
        }
    }
    (out.len() == n).then_some(out)
}

/// A basis `(b_i)` of `Z^N` (columns of the returned matrix, determinant
/// +1) with `A[b_i] <= N^2 mu(A)`.
///
/// `N` independent minimal vectors `v_1..v_N` are completed to a basis of
/// `Z^N` that is upper triangular in the `v`-coordinates (Hermite normal
/// form), then size-reduced so that `b_i = sum_{j<i} c_j v_j + c_i v_i` with
/// `|c_j| <= 1/2` and `0 < c_i <= 1`, which gives
/// `A[b_i] <= ((i + 1) / 2)^2 mu`.
pub fn bounded_basis(a: &SymForm) -> Result<IntMat> {
    let n = a.dim();
    let m = shortest_vectors(a)?;
    let vs = lin_independent_subset(&m.vectors, n).ok_or(Error::MinimaNotSpanning(n))?;
    let bound = &m.mu * Int::from((n * n) as u64);

    let g = match triangular_basis(&vs) {
        Some(g) if basis_within(a, &g, &bound) => g,
        _ if n <= 4 => exhaustive_basis(a, &bound)?,
        Some(g) => {
            let worst = (0..n).map(|i| a.bilinear(&g.column(i), &g.column(i))).max().unwrap();
            return Err(Error::BoundViolation(format!("h(b_i) = {worst} > N^2 mu = {bound}")));
        }
        None => return Err(Error::Internal("basis completion failed".into())),
    };
    Ok(g)
}

fn basis_within(a: &SymForm, g: &IntMat, bound: &Rat) -> bool {
    (0..g.dim()).all(|i| {
        let c = g.column(i);
        a.bilinear(&c, &c) <= *bound
    })
}

fn triangular_basis(vs: &[LatticeVector]) -> Option<IntMat> {
    let n = vs.len();
    // V has the chosen minimal vectors as columns; the lattice Z^N in
    // V-coordinates is generated by the columns of V^{-1}.
    let v_rows: Vec<Vec<Rat>> = (0..n).map(|i| (0..n).map(|j| rat(vs[j].0[i])).collect()).collect();
    let v_inv = inverse(&v_rows)?;
    let d = crate::linalg::lcm_denominators(v_inv.iter().flatten());
    let cols: Vec<Vec<Int>> = (0..n).map(|j| (0..n).map(|i| (&v_inv[i][j] * &d).to_integer()).collect()).collect();
    let h = hnf_upper_basis(&cols, n)?;
    // coefficients t[j][i]: column i of T = H / d
    let mut t: Vec<Vec<Rat>> = (0..n).map(|i| (0..n).map(|j| Rat::new(h[i][j].clone(), d.clone())).collect()).collect();
    for i in 0..n {
        for j in (0..i).rev() {
            let r = round_rat(&(&t[i][j] / &t[j][j]));
            if !r.is_zero() {
                let tj = t[j].clone();
                for (x, y) in t[i].iter_mut().zip(&tj) {
                    *x -= y * &r;
                }
            }
        }
    }
    let mut cols_out = Vec::with_capacity(n);
    for ti in &t {
        let mut b = vec![Rat::zero(); n];
        for (j, c) in ti.iter().enumerate() {
            for (k, bk) in b.iter_mut().enumerate() {
                *bk += c * Int::from(vs[j].0[k]);
            }
        }
        let mut col = Vec::with_capacity(n);
        for x in b {
            if !x.is_integer() {
                return None;
            }
            col.push(x.to_integer().to_i64()?);
        }
        cols_out.push(col);
    }
    let mut g = IntMat::from_columns(&cols_out);
    let det = g.det();
    if det.abs() != Int::one() {
        return None;
    }
    if det.is_negative() {
        g.negate_column(0);
    }
    Some(g)
}

fn exhaustive_basis(a: &SymForm, bound: &Rat) -> Result<IntMat> {
    let n = a.dim();
    let cands: Vec<LatticeVector> = short_vectors(a, bound)?.into_iter().map(|(v, _)| v).collect();
    fn pick(n: usize, cands: &[LatticeVector], start: usize, chosen: &mut Vec<Vec<i64>>) -> Option<IntMat> {
        if chosen.len() == n {
            let g = IntMat::from_columns(chosen);
            return (g.det().abs() == Int::one()).then_some(g);
        }
        for i in start..cands.len() {
            chosen.push(cands[i].0.clone());
            if let Some(g) = pick(n, cands, i + 1, chosen) {
                return Some(g);
            }
            chosen.pop();
        }
        None
    }
    let mut g = pick(n, &cands, 0, &mut Vec::new())
        .ok_or_else(|| Error::BoundViolation(format!("no basis with h(b_i) <= {bound}")))?;
    if g.det().is_negative() {
        g.negate_column(0);
    }
    Ok(g)
}

#[derive(Clone, Debug, Serialize)]
pub struct Prop1Report {
    pub basis: IntMat,
    /// `A[b_i] / mu(A)` for each returned basis vector.
    pub basis_norms: Vec<String>,
    pub basis_bound: u64,
    /// Largest `|x_i|` over minimal vectors of `A . g`, per coordinate.
    pub coordinate_max: Vec<i64>,
    pub max_coordinate: i64,
    /// Integer ceiling of `A(N)`.
    pub bound: Int,
    pub ok: bool,
}

/// Reduces `A` by [`bounded_basis`] and checks the coordinate bound on the
/// minimal vectors of the reduced form.
pub fn prop1_check(a: &SymForm) -> Result<Prop1Report> {
    let n = a.dim();
    let g = bounded_basis(a)?;
    let mu = shortest_vectors(a)?.mu;
    let reduced = a.act(&g)?;
    let m = shortest_vectors(&reduced)?;
    let mut coordinate_max = vec![0i64; n];
    for v in &m.vectors {
        for (c, x) in coordinate_max.iter_mut().zip(&v.0) {
            *c = (*c).max(x.abs());
        }
    }
    let max_coordinate = coordinate_max.iter().copied().max().unwrap_or(0);
    let bound = crate::constants::a_const(n as u32);
    let basis_norms: Vec<Rat> = (0..n).map(|i| a.bilinear(&g.column(i), &g.column(i)) / &mu).collect();
    let basis_bound = (n * n) as u64;
    let ok = Int::from(max_coordinate) <= bound && basis_norms.iter().all(|x| *x <= rat(basis_bound as i64));
    Ok(Prop1Report {
        basis: g,
        basis_norms: basis_norms.iter().map(|x| x.to_string()).collect(),
        basis_bound,
        coordinate_max,
        max_coordinate,
        bound,
        ok,
    })
}

/// The form with 2 on the diagonal and 1 elsewhere (the root lattice `A_N`).
pub fn a_n_form(n: usize) -> SymForm {
    let mut f = SymForm::zero(n);
    for i in 0..n {
        for j in i..n {
            f.set(i, j, if i == j { rat(2) } else { Rat::one() });
        }
    }
    f
}
