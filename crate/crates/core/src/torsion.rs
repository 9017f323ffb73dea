//! Smith normal form, torsion bounds for integral maps and chain complexes,
//! integral homology, and the `card_n` filter.

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::complex::ChainComplexZ;
use crate::linalg::{int_to_rat, isqrt_ceil, isqrt_floor, EchelonBasis};
use crate::{Error, Int, Result};

/// Dense integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Int>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Int::zero(); rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<Int>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::DimensionMismatch { expected: c, got: bad.len() });
        }
        Ok(Self { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| Int::from(x)).collect()).collect()).expect("ragged rows")
    }

    pub fn diag(entries: &[i64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in entries.iter().enumerate() {
            m.set(i, i, Int::from(d));
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Int {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Int) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Int] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Int> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Int>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().filter(|x| !x.is_zero()).count()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, got: other.rows });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let v = out.get(i, j) + a * b;
                        out.set(i, j, v);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Reorders rows and columns: entry `(i, j)` moves to `(row_perm[i], col_perm[j])`.
    pub fn permute(&self, row_perm: &[usize], col_perm: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(row_perm[i], col_perm[j], self.get(i, j).clone());
            }
        }
        out
    }

    pub fn column_norm_sq(&self, j: usize) -> Int {
        (0..self.rows).map(|i| self.get(i, j) * self.get(i, j)).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SnfResult {
    /// Nonzero invariant factors `d_1 | d_2 | ...`, all positive.
    #[serde(serialize_with = "ser_ints")]
    pub invariant_factors: Vec<Int>,
    pub rank: usize,
}

fn ser_ints<S: serde::Serializer>(xs: &[Int], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(|x| x.to_string()))
}

impl SnfResult {
    /// Invariant factors greater than one.
    pub fn torsion(&self) -> Vec<Int> {
        self.invariant_factors.iter().filter(|d| !d.is_one()).cloned().collect()
    }

    pub fn torsion_card(&self) -> Int {
        self.invariant_factors.iter().product()
    }
}

/// Invariant factors by elimination with least-magnitude pivots, then a
/// gcd/lcm pass to enforce the divisibility chain.
pub fn smith_normal_form(m: &IntMatrix) -> SnfResult {
    let mut a = m.to_rows();
    let (rows, cols) = (m.rows(), m.cols());
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // least nonzero entry in the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !a[i][j].is_zero() && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let p = a[t][t].clone();
            let mut changed = false;
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&p);
                let (head, tail) = a.split_at_mut(i);
                for (x, y) in tail[0][t..].iter_mut().zip(&head[t][t..]) {
                    *x -= &q * y;
                }
                if !a[i][t].is_zero() {
                    changed = true;
                }
            }
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&p);
                for row in a[t..].iter_mut() {
                    let y = row[t].clone();
                    row[j] -= &q * y;
                }
                if !a[t][j].is_zero() {
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            // move the smallest remaining entry of row/column t onto the pivot
            let mut best = (t, t);
            for i in t + 1..rows {
                if !a[i][t].is_zero() && a[i][t].abs() < a[best.0][best.1].abs() {
                    best = (i, t);
                }
            }
            for j in t + 1..cols {
                if !a[t][j].is_zero() && a[t][j].abs() < a[best.0][best.1].abs() {
                    best = (t, j);
                }
            }
            if best.0 != t {
                a.swap(t, best.0);
            } else if best.1 != t {
                for row in a.iter_mut() {
                    row.swap(t, best.1);
                }
            }
        }
        diag.push(a[t][t].abs());
        t += 1;
    }
    // enforce d_i | d_{i+1}
    for i in 0..diag.len() {
        for j in i + 1..diag.len() {
            let g = diag[i].gcd(&diag[j]);
            let l = diag[i].lcm(&diag[j]);
            diag[i] = g;
            diag[j] = l;
        }
    }
    SnfResult { rank: diag.len(), invariant_factors: diag }
}

/// `floor(prod_{i in I} |column_i|)`, an upper bound for the torsion of the
/// cokernel. Without `subset`, columns are picked greedily by ascending norm
/// until they span the image.
pub fn lemma1_bound(m: &IntMatrix, subset: Option<&[usize]>) -> Result<Int> {
    let full_rank = smith_normal_form(m).rank;
    let columns: Vec<usize> = match subset {
        Some(s) => {
            let mut e = EchelonBasis::new(m.rows());
            for &j in s {
                if j >= m.cols() {
                    return Err(Error::OutOfRange(format!("column {j} of {}", m.cols())));
                }
                if !e.insert(m.column(j).iter().map(int_to_rat).collect()) {
                    return Err(Error::RankDeficient);
                }
            }
            if e.rank() != full_rank {
                return Err(Error::RankDeficient);
            }
            s.to_vec()
        }
        None => {
            let mut order: Vec<usize> = (0..m.cols()).collect();
            order.sort_by_key(|&j| (m.column_norm_sq(j), j));
            let mut e = EchelonBasis::new(m.rows());
            let mut chosen = Vec::new();
            for j in order {
                if e.rank() == full_rank {
                    break;
                }
                if e.insert(m.column(j).iter().map(int_to_rat).collect()) {
                    chosen.push(j);
                }
            }
            chosen
        }
    };
    let product: Int = columns.iter().map(|&j| m.column_norm_sq(j)).product();
    Ok(isqrt_floor(&product))
}

#[derive(Clone, Debug, Serialize)]
pub struct Prop3Report {
    pub k: usize,
    pub a: usize,
    /// Largest squared length of an image `d(e_sigma)`, floored at 1.
    pub b_squared: String,
    pub b_ceil: String,
    pub bound: String,
    #[serde(skip)]
    pub bound_int: Int,
}

/// `ceil(b(k))^a(k)`, where `a(k) = min(|S_{k+1}|, |S_k|)` and `b(k)` is the
/// largest length of the image of a `(k+1)`-cell (at least 1).
pub fn prop3_bound(c: &ChainComplexZ, k: usize) -> Result<Prop3Report> {
    let top = c.top_degree();
    if k > top {
        return Err(Error::DegreeOutOfRange(k));
    }
    let nk = c.size(k);
    let nk1 = if k < top { c.size(k + 1) } else { 0 };
    let a = nk.min(nk1);
    let b_sq = if k < top {
        let d = c.boundary(k + 1).expect("degree checked");
        (0..d.cols()).map(|j| d.column_norm_sq(j)).max().unwrap_or_else(Int::zero)
    } else {
        Int::zero()
    };
    let b_sq = b_sq.max(Int::one());
    let b_ceil = isqrt_ceil(&b_sq);
    let bound = num_traits::pow(b_ceil.clone(), a);
    Ok(Prop3Report {
        k,
        a,
        b_squared: b_sq.to_string(),
        b_ceil: b_ceil.to_string(),
        bound: bound.to_string(),
        bound_int: bound,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Homology {
    pub k: usize,
    pub betti: usize,
    #[serde(serialize_with = "ser_ints")]
    pub torsion: Vec<Int>,
}

impl Homology {
    pub fn torsion_card(&self) -> Int {
        self.torsion.iter().product()
    }

    /// Primes dividing the torsion.
    pub fn torsion_primes(&self) -> Vec<u64> {
        let mut ps: Vec<u64> = self.torsion.iter().flat_map(prime_factors).map(|(p, _)| p).collect();
        ps.sort_unstable();
        ps.dedup();
        ps
    }
}

/// `H_k = ker d_k / im d_{k+1}`: free rank and torsion invariant factors.
pub fn homology(c: &ChainComplexZ, k: usize) -> Result<Homology> {
    let top = c.top_degree();
    if k > top {
        return Err(Error::DegreeOutOfRange(k));
    }
    c.check()?;
    let rank_out = if k > 0 { smith_normal_form(c.boundary(k).unwrap()).rank } else { 0 };
    let (rank_in, torsion) = if k < top {
        let s = smith_normal_form(c.boundary(k + 1).unwrap());
        (s.rank, s.torsion())
    } else {
        (0, Vec::new())
    };
    Ok(Homology { k, betti: c.size(k) - rank_out - rank_in, torsion })
}

/// Trial-division factorization of a torsion factor; factors must fit in
/// `u64` (Voronoi torsion factors are tiny).
fn prime_factors(n: &Int) -> Vec<(u64, u32)> {
    let mut n = n.abs().to_u64().expect("factor too large to factor by trial division");
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Product of the prime-power parts at primes `> n` of all factors.
pub fn card_filtered(factors: &[Int], n: u64) -> Int {
    let mut out = Int::one();
    for f in factors {
        let mut rest = f.abs();
        // strip every prime <= n
        for p in 2..=n {
            let pi = Int::from(p);
            while !rest.is_zero() && (&rest % &pi).is_zero() {
                rest /= &pi;
            }
        }
        out *= rest;
    }
    out
}

/// Parses the sparse text format: optional `% sizes n0 n1 ...` line, then
/// blocks headed `k rows cols nnz` followed by 1-based `i j value` triples.
/// Lines starting with `%` or `#` are otherwise ignored. A bare matrix (one
/// block, with or without the leading `k`) is also accepted by
/// [`parse_matrix`].
pub fn parse_blocks(text: &str) -> Result<(Option<Vec<usize>>, Vec<(usize, IntMatrix)>)> {
    let mut sizes = None;
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty()).peekable();
    let mut blocks = Vec::new();
    while let Some(line) = lines.next() {
        if let Some(rest) = line.strip_prefix('%') {
            let rest = rest.trim();
            if let Some(s) = rest.strip_prefix("sizes") {
                sizes = Some(
                    s.split_whitespace()
                        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad size `{t}`"))))
                        .collect::<Result<Vec<usize>>>()?,
                );
            }
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let head: Vec<usize> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad header `{line}`"))))
            .collect::<Result<_>>()?;
        let (k, rows, cols, nnz) = match head[..] {
            [k, r, c, z] => (k, r, c, z),
            [r, c, z] => (0, r, c, z),
            _ => return Err(Error::Parse(format!("bad header `{line}`"))),
        };
        let mut m = IntMatrix::zeros(rows, cols);
        for _ in 0..nnz {
            let l = lines.next().ok_or_else(|| Error::Parse("truncated entries".into()))?;
            let t: Vec<&str> = l.split_whitespace().collect();
            if t.len() != 3 {
                return Err(Error::Parse(format!("bad entry `{l}`")));
            }
            let i: usize = t[0].parse().map_err(|_| Error::Parse(format!("bad row `{l}`")))?;
            let j: usize = t[1].parse().map_err(|_| Error::Parse(format!("bad col `{l}`")))?;
            let v: Int = t[2].parse().map_err(|_| Error::Parse(format!("bad value `{l}`")))?;
            if i == 0 || j == 0 || i > rows || j > cols {
                return Err(Error::Parse(format!("entry out of range `{l}`")));
            }
            m.set(i - 1, j - 1, v);
        }
        blocks.push((k, m));
    }
    Ok((sizes, blocks))
}

/// A single matrix in the sparse text format.
pub fn parse_matrix(text: &str) -> Result<IntMatrix> {
    let (_, mut blocks) = parse_blocks(text)?;
    match blocks.len() {
        1 => Ok(blocks.pop().unwrap().1),
        n => Err(Error::Parse(format!("expected one matrix block, found {n}"))),
    }
}

pub fn format_matrix(k: usize, m: &IntMatrix) -> String {
    let mut s = format!("{k} {} {} {}\n", m.rows(), m.cols(), m.nnz());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let v = m.get(i, j);
            if !v.is_zero() {
                s.push_str(&format!("{} {} {}\n", i + 1, j + 1, v));
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(xs: &[i64]) -> Vec<Int> {
        xs.iter().map(|&x| Int::from(x)).collect()
    }

    #[test]
    fn snf_examples() {
        let s = smith_normal_form(&IntMatrix::from_i64(&[&[2, 4], &[6, 8]]));
        assert_eq!(s.invariant_factors, ints(&[2, 4]));
        let s = smith_normal_form(&IntMatrix::diag(&[1, 3]));
        assert_eq!(s.invariant_factors, ints(&[1, 3]));
        let s = smith_normal_form(&IntMatrix::zeros(3, 2));
        assert_eq!(s.rank, 0);
        assert!(s.invariant_factors.is_empty());
        let s = smith_normal_form(&IntMatrix::diag(&[6, 4]));
        assert_eq!(s.invariant_factors, ints(&[2, 12]));
        let s = smith_normal_form(&IntMatrix::from_i64(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]]));
        assert_eq!(s.invariant_factors, ints(&[1, 3]));
    }

    #[test]
    fn lemma1_examples() {
        assert_eq!(lemma1_bound(&IntMatrix::from_i64(&[&[2]]), None).unwrap(), Int::from(2));
        assert_eq!(lemma1_bound(&IntMatrix::diag(&[2, 3]), None).unwrap(), Int::from(6));
        assert_eq!(lemma1_bound(&IntMatrix::from_i64(&[&[1], &[1]]), None).unwrap(), Int::one());
        assert_eq!(lemma1_bound(&IntMatrix::zeros(2, 2), None).unwrap(), Int::one());
        let m = IntMatrix::from_i64(&[&[1, 2], &[1, 2]]);
        assert!(matches!(lemma1_bound(&m, Some(&[0, 1])), Err(Error::RankDeficient)));
        assert_eq!(lemma1_bound(&m, Some(&[1])).unwrap(), Int::from(2));
    }

    #[test]
    fn card_filtered_examples() {
        assert_eq!(card_filtered(&ints(&[12]), 3), Int::one());
        assert_eq!(card_filtered(&ints(&[10]), 3), Int::from(5));
        assert_eq!(card_filtered(&ints(&[35]), 4), Int::from(35));
        assert_eq!(card_filtered(&ints(&[2, 6, 25]), 2), Int::from(75));
    }

    #[test]
    fn text_roundtrip() {
        let m = IntMatrix::from_i64(&[&[0, -3], &[5, 0], &[1, 1]]);
        let text = format_matrix(2, &m);
        assert_eq!(parse_matrix(&text).unwrap(), m);
        let bare = "% comment\n2 2 2\n1 1 2\n2 2 3\n";
        assert_eq!(parse_matrix(bare).unwrap(), IntMatrix::diag(&[2, 3]));
        assert!(parse_matrix("1 1 1\n2 1 5\n").is_err());
    }

    #[test]
    fn factorization() {
        assert_eq!(prime_factors(&Int::from(360)), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(prime_factors(&Int::from(691)), vec![(691, 1)]);
    }
}
