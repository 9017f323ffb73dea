//! Small exact linear-algebra kernels over `Int` and `Rat`.
//!
//! Matrices here are tiny (at most a few dozen rows), so everything is dense
//! `Vec<Vec<_>>` and favours clarity over asymptotics.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::{Int, Rat};

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(Int::from(n))
}

pub fn int_to_rat(n: &Int) -> Rat {
    Rat::from_integer(n.clone())
}

/// Nearest integer, ties rounded towards +infinity.
pub fn round_rat(x: &Rat) -> Int {
    (x + Rat::new(Int::one(), Int::from(2))).floor().to_integer()
}

/// Least `t >= 0` with `t * t >= n`.
pub fn isqrt_ceil(n: &Int) -> Int {
    assert!(!n.is_negative(), "isqrt of a negative number");
    let r = n.sqrt();
    if &(&r * &r) == n {
        r
    } else {
        r + 1
    }
}

/// Greatest `t >= 0` with `t * t <= n`.
pub fn isqrt_floor(n: &Int) -> Int {
    assert!(!n.is_negative(), "isqrt of a negative number");
    n.sqrt()
}

pub fn lcm_denominators<'a, I: IntoIterator<Item = &'a Rat>>(xs: I) -> Int {
    xs.into_iter().fold(Int::one(), |acc, x| acc.lcm(x.denom()))
}

/// Fraction-free (Bareiss) determinant of a square integer matrix.
pub fn det_bareiss(mut m: Vec<Vec<Int>>) -> Int {
    let n = m.len();
    if n == 0 {
        return Int::one();
    }
    let mut sign = Int::one();
    let mut prev = Int::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return Int::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * m[n - 1][n - 1].clone()
}

/// Exact determinant of a rational matrix, computed by clearing denominators
/// and running Bareiss.
pub fn det_rat(m: &[Vec<Rat>]) -> Rat {
    let n = m.len();
    let d = lcm_denominators(m.iter().flatten());
    let scaled: Vec<Vec<Int>> = m.iter().map(|row| row.iter().map(|x| (x * &d).to_integer()).collect()).collect();
    Rat::new(det_bareiss(scaled), num_traits::pow(d, n))
}

/// Incrementally maintained row-echelon basis over Q, used for rank tests.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    dim: usize,
    rows: Vec<(usize, Vec<Rat>)>,
}

impl EchelonBasis {
    pub fn new(dim: usize) -> Self {
        Self { dim, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, mut v: Vec<Rat>) -> Vec<Rat> {
        for (pivot, row) in &self.rows {
            if !v[*pivot].is_zero() {
                let f = v[*pivot].clone();
                for (x, r) in v.iter_mut().zip(row) {
                    if !r.is_zero() {
                        *x -= &f * r;
                    }
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[Rat]) -> bool {
        self.reduce(v.to_vec()).iter().all(Zero::is_zero)
    }

    /// Adds `v`; returns whether it was independent of the current rows.
    pub fn insert(&mut self, v: Vec<Rat>) -> bool {
        assert_eq!(v.len(), self.dim);
        let mut v = self.reduce(v);
        let Some(pivot) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = v[pivot].recip();
        for x in v.iter_mut() {
            *x *= &inv;
        }
        for (_, row) in self.rows.iter_mut() {
            if !row[pivot].is_zero() {
                let f = row[pivot].clone();
                for (x, y) in row.iter_mut().zip(&v) {
                    *x -= &f * y;
                }
            }
        }
        self.rows.push((pivot, v));
        true
    }
}

pub fn rank_rat(rows: &[Vec<Rat>]) -> usize {
    let Some(first) = rows.first() else { return 0 };
    let mut e = EchelonBasis::new(first.len());
    for r in rows {
        e.insert(r.clone());
    }
    e.rank()
}

pub fn rank_int(rows: &[Vec<Int>]) -> usize {
    let rows: Vec<Vec<Rat>> = rows.iter().map(|r| r.iter().map(int_to_rat).collect()).collect();
    rank_rat(&rows)
}

/// Inverse of a square rational matrix by Gauss-Jordan, `None` if singular.
pub fn inverse(m: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rat>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !a[r][c].is_zero())?;
        a.swap(c, p);
        let inv = a[c][c].recip();
        for x in a[c].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = a[c].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != c && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn mat_vec(m: &[Vec<Rat>], v: &[Rat]) -> Vec<Rat> {
    m.iter().map(|row| row.iter().zip(v).fold(Rat::zero(), |acc, (a, b)| acc + a * b)).collect()
}

/// Square basis of the lattice spanned by the columns of `cols` (each of
/// length `n`, full rank `n`), returned as columns of an upper-triangular
/// matrix with positive diagonal. Column `r` of the result only involves the
/// coordinates `0..=r`.
pub fn hnf_upper_basis(cols: &[Vec<Int>], n: usize) -> Option<Vec<Vec<Int>>> {
    let mut remaining: Vec<Vec<Int>> = cols.iter().filter(|c| c.iter().any(|x| !x.is_zero())).cloned().collect();
    let mut basis: Vec<Option<Vec<Int>>> = vec![None; n];
    for r in (0..n).rev() {
        // gcd-reduce all remaining columns in row r down to a single pivot column
        loop {
            let nonzero: Vec<usize> = (0..remaining.len()).filter(|&i| !remaining[i][r].is_zero()).collect();
            if nonzero.len() <= 1 {
                break;
            }
            let p = *nonzero.iter().min_by_key(|&&i| remaining[i][r].abs()).unwrap();
            let pivot = remaining[p].clone();
            for &i in &nonzero {
                if i == p {
                    continue;
                }
                let q = remaining[i][r].div_floor(&pivot[r]);
                for (x, y) in remaining[i].iter_mut().zip(&pivot) {
                    *x -= &q * y;
                }
            }
        }
        let p = (0..remaining.len()).find(|&i| !remaining[i][r].is_zero())?;
        let mut col = remaining.swap_remove(p);
        if col[r].is_negative() {
            for x in col.iter_mut() {
                *x = -x.clone();
            }
        }
        basis[r] = Some(col);
    }
    basis.into_iter().collect()
}

pub fn gcd_vec(v: &[Int]) -> Int {
    v.iter().fold(Int::zero(), |g, x| g.gcd(x))
}

/// Divides out the content of an integer vector; zero vectors are untouched.
pub fn primitive(v: &mut [Int]) {
    let g = gcd_vec(v);
    if !g.is_zero() && !g.is_one() {
        for x in v.iter_mut() {
            *x = &*x / &g;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn im(rows: &[&[i64]]) -> Vec<Vec<Int>> {
        rows.iter().map(|r| r.iter().map(|&x| Int::from(x)).collect()).collect()
    }

    #[test]
    fn bareiss_matches_cofactor_expansion() {
        let m = im(&[&[2, -1, 0], &[-1, 2, -1], &[0, -1, 2]]);
        assert_eq!(det_bareiss(m), Int::from(4));
        let m = im(&[&[0, 1], &[1, 0]]);
        assert_eq!(det_bareiss(m), Int::from(-1));
        let m = im(&[&[1, 2], &[2, 4]]);
        assert_eq!(det_bareiss(m), Int::zero());
    }

    #[test]
    fn rational_det_and_inverse() {
        let m = vec![vec![Rat::new(1.into(), 2.into()), rat(1)], vec![rat(3), rat(4)]];
        assert_eq!(det_rat(&m), rat(-1));
        let inv = inverse(&m).unwrap();
        assert_eq!(mat_vec(&inv, &mat_vec(&m, &[rat(5), rat(7)])), vec![rat(5), rat(7)]);
    }

    #[test]
    fn hnf_basis_is_upper_triangular_and_spans() {
        let cols = im(&[&[2, 0], &[0, 3], &[1, 1]]);
        let b = hnf_upper_basis(&cols, 2).unwrap();
        assert!(b[0][1].is_zero());
        let det = det_bareiss(vec![vec![b[0][0].clone(), b[1][0].clone()], vec![b[0][1].clone(), b[1][1].clone()]]);
        assert_eq!(det.abs(), Int::one());
    }

    #[test]
    fn integer_square_roots() {
        assert_eq!(isqrt_ceil(&Int::from(17)), Int::from(5));
        assert_eq!(isqrt_ceil(&Int::from(16)), Int::from(4));
        assert_eq!(isqrt_floor(&Int::from(17)), Int::from(4));
        assert_eq!(round_rat(&Rat::new(5.into(), 2.into())), Int::from(3));
        assert_eq!(round_rat(&Rat::new((-5).into(), 2.into())), Int::from(-2));
    }
}
