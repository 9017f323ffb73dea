//! Symmetric forms with exact rational entries, integer lattice vectors and
//! the right action `A . g = g^t A g` of `GL_N(Z)`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::linalg::{det_bareiss, det_rat, int_to_rat, lcm_denominators, rat};
use crate::{Error, Int, Rat, Result};

/// Index of `(i, j)` with `i <= j` in the packed upper triangle of an `n x n`
/// symmetric matrix, row by row.
pub fn sym_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

pub fn sym_dim(n: usize) -> usize {
    n * (n + 1) / 2
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymForm {
    n: usize,
    upper: Vec<Rat>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Definiteness {
    PositiveDefinite,
    PositiveSemidefinite,
    Indefinite,
}

impl SymForm {
    pub fn new(rows: Vec<Vec<Rat>>) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::OutOfRange(format!("form dimension {n} < 2")));
        }
        for row in &rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
        }
        let mut upper = Vec::with_capacity(sym_dim(n));
        for i in 0..n {
            for j in i..n {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::Parse(format!("matrix not symmetric at ({i},{j})")));
                }
                upper.push(rows[i][j].clone());
            }
        }
        Ok(Self { n, upper })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Result<Self> {
        Self::new(rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect())
    }

    /// Builds a form from its packed upper triangle.
    pub fn from_upper(n: usize, upper: Vec<Rat>) -> Self {
        assert!(n >= 2 && upper.len() == sym_dim(n));
        Self { n, upper }
    }

    pub fn identity(n: usize) -> Self {
        let mut f = Self::zero(n);
        for i in 0..n {
            f.set(i, i, Rat::one());
        }
        f
    }

    pub fn zero(n: usize) -> Self {
        Self::from_upper(n, vec![Rat::zero(); sym_dim(n)])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.upper[sym_index(self.n, i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        let k = sym_index(self.n, i, j);
        self.upper[k] = v;
    }

    /// Packed upper triangle, `(0,0), (0,1), .., (1,1), ..`.
    pub fn upper(&self) -> &[Rat] {
        &self.upper
    }

    pub fn rows(&self) -> Vec<Vec<Rat>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j).clone()).collect()).collect()
    }

    /// `v^t A w` without dimension checks.
    pub fn bilinear(&self, v: &[i64], w: &[i64]) -> Rat {
        let mut acc = Rat::zero();
        for i in 0..self.n {
            if v[i] == 0 {
                continue;
            }
            let mut row = Rat::zero();
            for j in 0..self.n {
                if w[j] != 0 {
                    row += self.get(i, j) * Int::from(w[j]);
                }
            }
            acc += row * Int::from(v[i]);
        }
        acc
    }

    /// `v^t A v`.
    pub fn evaluate(&self, v: &LatticeVector) -> Result<Rat> {
        self.check_dim(v.dim())?;
        Ok(self.bilinear(&v.0, &v.0))
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got });
        }
        Ok(())
    }

    pub fn determinant(&self) -> Rat {
        det_rat(&self.rows())
    }

    pub fn definiteness(&self) -> Definiteness {
        let rows = self.rows();
        let minor = |idx: &[usize]| -> Rat {
            let m: Vec<Vec<Rat>> = idx.iter().map(|&i| idx.iter().map(|&j| rows[i][j].clone()).collect()).collect();
            det_rat(&m)
        };
        let leading_positive = (1..=self.n).all(|k| {
            let idx: Vec<usize> = (0..k).collect();
            minor(&idx).is_positive()
        });
        if leading_positive {
            return Definiteness::PositiveDefinite;
        }
        // PSD iff every principal minor is nonnegative
        let all_nonneg = (1u32..(1u32 << self.n)).all(|mask| {
            let idx: Vec<usize> = (0..self.n).filter(|i| mask & (1 << i) != 0).collect();
            !minor(&idx).is_negative()
        });
        if all_nonneg {
            Definiteness::PositiveSemidefinite
        } else {
            Definiteness::Indefinite
        }
    }

    pub fn is_positive_definite(&self) -> bool {
        self.definiteness() == Definiteness::PositiveDefinite
    }

    /// Membership in the cone of nonzero positive semidefinite forms with
    /// rational kernel. Over rational entries the kernel is always defined
    /// over Q, so this is semidefiniteness of a nonzero form.
    pub fn in_closed_cone(&self) -> bool {
        !self.upper.iter().all(Zero::is_zero) && self.definiteness() != Definiteness::Indefinite
    }

    /// The rank-one form `v v^t`.
    pub fn rank_one(v: &LatticeVector) -> Result<Self> {
        if v.is_zero() {
            return Err(Error::ZeroVector);
        }
        if v.dim() < 2 {
            return Err(Error::OutOfRange("vector dimension < 2".into()));
        }
        let n = v.dim();
        let mut upper = Vec::with_capacity(sym_dim(n));
        for i in 0..n {
            for j in i..n {
                upper.push(rat(v.0[i] * v.0[j]));
            }
        }
        Ok(Self { n, upper })
    }

    /// `g^t A g` for unimodular `g`.
    pub fn act(&self, g: &IntMat) -> Result<Self> {
        self.check_dim(g.dim())?;
        let d = g.det();
        if d.abs() != Int::one() {
            return Err(Error::NotUnimodular(d.to_string()));
        }
        Ok(self.act_unchecked(g))
    }

    pub(crate) fn act_unchecked(&self, g: &IntMat) -> Self {
        let n = self.n;
        let cols: Vec<Vec<i64>> = (0..n).map(|j| g.column(j)).collect();
        let mut upper = Vec::with_capacity(sym_dim(n));
        for i in 0..n {
            for j in i..n {
                upper.push(self.bilinear(&cols[i], &cols[j]));
            }
        }
        Self { n, upper }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        Self { n: self.n, upper: self.upper.iter().map(|x| x * c).collect() }
    }

    pub fn add_scaled(&self, other: &SymForm, c: &Rat) -> Self {
        assert_eq!(self.n, other.n);
        Self { n: self.n, upper: self.upper.iter().zip(&other.upper).map(|(a, b)| a + b * c).collect() }
    }

    pub fn is_integral(&self) -> bool {
        self.upper.iter().all(|x| x.is_integer())
    }

    /// Positive multiple of `self` with coprime integer entries, together with
    /// the scale factor used.
    pub fn primitive_integral(&self) -> (SymForm, Rat) {
        let d = lcm_denominators(&self.upper);
        let ints: Vec<Int> = self.upper.iter().map(|x| (x * &d).to_integer()).collect();
        let g = crate::linalg::gcd_vec(&ints);
        if g.is_zero() {
            return (self.clone(), Rat::one());
        }
        let scale = Rat::new(d, g);
        (self.scale(&scale), scale)
    }

    /// Gram entries as integers; panics if not integral.
    pub fn to_int_rows(&self) -> Vec<Vec<Int>> {
        self.rows()
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|x| {
                        assert!(x.is_integer(), "form is not integral");
                        x.to_integer()
                    })
                    .collect()
            })
            .collect()
    }

    /// Pairing `<R, v v^t> = v^t R v` against a packed rank-one coordinate
    /// vector (as produced by [`LatticeVector::sym_coords`]).
    pub fn pair_coords(&self, coords: &[Int]) -> Rat {
        let mut acc = Rat::zero();
        for i in 0..self.n {
            for j in i..self.n {
                let k = sym_index(self.n, i, j);
                if coords[k].is_zero() {
                    continue;
                }
                let w = if i == j { int_to_rat(&coords[k]) } else { int_to_rat(&coords[k]) * Int::from(2) };
                acc += &self.upper[k] * w;
            }
        }
        acc
    }

    /// Lexicographic key over the packed triangle, used for canonical choices.
    pub fn lex_key(&self) -> Vec<Rat> {
        let mut key = Vec::with_capacity(self.upper.len());
        for i in 0..self.n {
            key.push(self.get(i, i).clone());
        }
        for i in 0..self.n {
            for j in i + 1..self.n {
                key.push(self.get(i, j).clone());
            }
        }
        key
    }
}

impl fmt::Display for SymForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows()
            .iter()
            .map(|r| format!("[{}]", r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")))
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

// JSON: {"n": N, "rows": [[...], ...]}, integers as numbers when they fit,
// otherwise strings "p/q".

pub(crate) fn rat_to_json(x: &Rat) -> serde_json::Value {
    if x.is_integer() {
        if let Some(i) = x.to_integer().to_i64() {
            return serde_json::Value::from(i);
        }
    }
    serde_json::Value::String(x.to_string())
}

pub(crate) fn rat_from_json(v: &serde_json::Value) -> std::result::Result<Rat, String> {
    match v {
        serde_json::Value::Number(n) => {
            n.as_i64().map(rat).ok_or_else(|| format!("non-integer JSON number {n}; use a \"p/q\" string"))
        }
        serde_json::Value::String(s) => parse_rat(s),
        other => Err(format!("expected number or string, got {other}")),
    }
}

pub fn parse_rat(s: &str) -> std::result::Result<Rat, String> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|e| format!("{s}: {e}"))?;
            let q: BigInt = q.trim().parse().map_err(|e| format!("{s}: {e}"))?;
            if q.is_zero() {
                return Err(format!("{s}: zero denominator"));
            }
            Ok(Rat::new(p, q))
        }
        None => Ok(Rat::from_integer(s.parse().map_err(|e| format!("{s}: {e}"))?)),
    }
}

#[derive(Serialize, Deserialize)]
struct SymFormJson {
    n: usize,
    rows: Vec<Vec<serde_json::Value>>,
}

impl Serialize for SymForm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SymFormJson { n: self.n, rows: self.rows().iter().map(|r| r.iter().map(rat_to_json).collect()).collect() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymForm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = SymFormJson::deserialize(d)?;
        if raw.rows.len() != raw.n {
            return Err(de::Error::custom(format!("n = {} but {} rows", raw.n, raw.rows.len())));
        }
        let rows = raw
            .rows
            .iter()
            .map(|r| r.iter().map(rat_from_json).collect::<std::result::Result<Vec<_>, _>>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(de::Error::custom)?;
        SymForm::new(rows).map_err(de::Error::custom)
    }
}

/// Integer vector in `Z^N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticeVector(pub Vec<i64>);

impl LatticeVector {
    pub fn new(coords: Vec<i64>) -> Self {
        Self(coords)
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|x| -x).collect())
    }

    /// Representative of `{v, -v}` whose first nonzero coordinate is positive.
    pub fn canonical_sign(&self) -> Self {
        match self.0.iter().find(|&&x| x != 0) {
            Some(&x) if x < 0 => self.neg(),
            _ => self.clone(),
        }
    }

    /// Packed upper-triangle coordinates of `v v^t`.
    pub fn sym_coords(&self) -> Vec<Int> {
        let n = self.dim();
        let mut out = Vec::with_capacity(sym_dim(n));
        for i in 0..n {
            for j in i..n {
                out.push(Int::from(self.0[i]) * Int::from(self.0[j]));
            }
        }
        out
    }

    pub fn sym_coords_rat(&self) -> Vec<Rat> {
        self.sym_coords().iter().map(int_to_rat).collect()
    }

    pub fn to_rat(&self) -> Vec<Rat> {
        self.0.iter().map(|&x| rat(x)).collect()
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
    }
}

/// Square integer matrix, row-major. Used for elements of `GL_N(Z)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntMat {
    n: usize,
    data: Vec<i64>,
}

impl IntMat {
    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "IntMat must be square");
        Self { n, data: rows.concat() }
    }

    pub fn from_columns(cols: &[Vec<i64>]) -> Self {
        let n = cols.len();
        let mut data = vec![0; n * n];
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), n);
            for i in 0..n {
                data[i * n + j] = c[i];
            }
        }
        Self { n, data }
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = 1;
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.n + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = self.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                t.set(i, j, self.get(j, i));
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMat) -> IntMat {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = vec![0i64; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * other.get(k, j);
                }
            }
        }
        IntMat { n, data: out }
    }

    pub fn mul_vec(&self, v: &[i64]) -> Vec<i64> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum()).collect()
    }

    pub fn apply(&self, v: &LatticeVector) -> LatticeVector {
        LatticeVector(self.mul_vec(&v.0))
    }

    pub fn det(&self) -> Int {
        det_bareiss(self.rows().iter().map(|r| r.iter().map(|&x| Int::from(x)).collect()).collect())
    }

    /// Exact inverse; `None` unless the matrix is unimodular.
    pub fn inverse(&self) -> Option<IntMat> {
        let rows: Vec<Vec<Rat>> = self.rows().iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect();
        let inv = crate::linalg::inverse(&rows)?;
        let mut out = Vec::with_capacity(self.n);
        for r in inv {
            let mut row = Vec::with_capacity(self.n);
            for x in r {
                if !x.is_integer() {
                    return None;
                }
                row.push(x.to_integer().to_i64()?);
            }
            out.push(row);
        }
        Some(IntMat::from_rows(&out))
    }

    pub fn negate_column(&mut self, j: usize) {
        for i in 0..self.n {
            let v = self.get(i, j);
            self.set(i, j, -v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a2() -> SymForm {
        SymForm::from_i64(&[&[2, 1], &[1, 2]]).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(a2().evaluate(&LatticeVector::new(vec![1, 0])).unwrap(), rat(2));
        assert_eq!(a2().evaluate(&LatticeVector::new(vec![1, -1])).unwrap(), rat(2));
        assert_eq!(SymForm::identity(3).evaluate(&LatticeVector::new(vec![1, 1, 1])).unwrap(), rat(3));
        assert!(matches!(
            a2().evaluate(&LatticeVector::new(vec![1, 0, 0])),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn determinant_examples() {
        assert_eq!(a2().determinant(), rat(3));
        assert_eq!(SymForm::identity(4).determinant(), rat(1));
        assert_eq!(SymForm::from_i64(&[&[1, 1], &[1, 1]]).unwrap().determinant(), rat(0));
    }

    #[test]
    fn definiteness_examples() {
        assert_eq!(a2().definiteness(), Definiteness::PositiveDefinite);
        assert_eq!(SymForm::from_i64(&[&[1, 0], &[0, 0]]).unwrap().definiteness(), Definiteness::PositiveSemidefinite);
        assert_eq!(SymForm::from_i64(&[&[1, 0], &[0, -1]]).unwrap().definiteness(), Definiteness::Indefinite);
        // semidefinite with a zero leading minor
        assert_eq!(SymForm::from_i64(&[&[0, 0], &[0, 3]]).unwrap().definiteness(), Definiteness::PositiveSemidefinite);
        assert!(!SymForm::zero(2).in_closed_cone());
        assert!(SymForm::from_i64(&[&[1, 0], &[0, 0]]).unwrap().in_closed_cone());
    }

    #[test]
    fn rank_one_examples() {
        let f = |v: Vec<i64>| SymForm::rank_one(&LatticeVector::new(v)).unwrap();
        assert_eq!(f(vec![1, 2]), SymForm::from_i64(&[&[1, 2], &[2, 4]]).unwrap());
        assert_eq!(f(vec![1, 0]), SymForm::from_i64(&[&[1, 0], &[0, 0]]).unwrap());
        assert_eq!(f(vec![1, -1]), SymForm::from_i64(&[&[1, -1], &[-1, 1]]).unwrap());
        assert!(matches!(SymForm::rank_one(&LatticeVector::new(vec![0, 0])), Err(Error::ZeroVector)));
        assert_eq!(f(vec![1, 2]).definiteness(), Definiteness::PositiveSemidefinite);
    }

    #[test]
    fn act_examples() {
        let i2 = SymForm::identity(2);
        assert_eq!(i2.act(&IntMat::identity(2)).unwrap(), i2);
        let swap = IntMat::from_rows(&[vec![0, 1], vec![1, 0]]);
        assert_eq!(a2().act(&swap).unwrap(), a2());
        let shear = IntMat::from_rows(&[vec![1, 1], vec![0, 1]]);
        assert_eq!(i2.act(&shear).unwrap(), SymForm::from_i64(&[&[1, 1], &[1, 2]]).unwrap());
        let bad = IntMat::from_rows(&[vec![2, 0], vec![0, 1]]);
        assert!(matches!(i2.act(&bad), Err(Error::NotUnimodular(_))));
    }

    #[test]
    fn json_round_trip_with_rationals() {
        let f = SymForm::new(vec![vec![Rat::new(1.into(), 2.into()), rat(1)], vec![rat(1), rat(3)]]).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"n":2,"rows":[["1/2",1],[1,3]]}"#);
        let back: SymForm = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<SymForm>(r#"{"n":2,"rows":[[1,2],[3,4]]}"#).is_err());
    }

    #[test]
    fn sym_index_packs_rows() {
        let n = 3;
        let order: Vec<usize> = (0..n).flat_map(|i| (i..n).map(move |j| sym_index(n, i, j))).collect();
        assert_eq!(order, (0..6).collect::<Vec<_>>());
        assert_eq!(sym_index(3, 2, 0), sym_index(3, 0, 2));
    }

    #[test]
    fn pairing_matches_evaluation() {
        let f = SymForm::from_i64(&[&[3, -1, 2], &[-1, 5, 0], &[2, 0, 7]]).unwrap();
        let v = LatticeVector::new(vec![2, -1, 3]);
        assert_eq!(f.pair_coords(&v.sym_coords()), f.evaluate(&v).unwrap());
    }
}
