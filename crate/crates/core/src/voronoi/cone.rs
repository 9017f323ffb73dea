//! Facets of a full-dimensional polyhedral cone given by integer rays, by the
//! double-description method with combinatorial adjacency.

use num_traits::{Signed, Zero};

use crate::linalg::{int_to_rat, inverse, lcm_denominators, primitive, EchelonBasis};
use crate::{Error, Int, Result};

/// Rays are indexed by bit position; cones here have at most 128 rays.
pub type RaySet = u128;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    /// Primitive integer inner normal: `<normal, r> >= 0` on every ray.
    pub normal: Vec<Int>,
    /// Rays on the facet.
    pub rays: RaySet,
}

fn dot(a: &[Int], b: &[Int]) -> Int {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn bits(set: RaySet) -> impl Iterator<Item = usize> {
    (0..128).filter(move |&i| set >> i & 1 == 1)
}

/// All facets of the cone spanned by `rays`, which must span the ambient space.
pub fn cone_facets(rays: &[Vec<Int>]) -> Result<Vec<Facet>> {
    let Some(first) = rays.first() else { return Err(Error::RankDeficient) };
    let d = first.len();
    if rays.len() > 128 {
        return Err(Error::OutOfRange(format!("{} rays exceed the 128-ray limit", rays.len())));
    }
    let mut basis = EchelonBasis::new(d);
    let mut simplex = Vec::new();
    for (i, r) in rays.iter().enumerate() {
        if basis.insert(r.iter().map(int_to_rat).collect()) {
            simplex.push(i);
        }
    }
    if simplex.len() < d {
        return Err(Error::RankDeficient);
    }

    // dual of the starting simplex: columns of the inverse ray matrix
    let m: Vec<Vec<_>> = simplex.iter().map(|&i| rays[i].iter().map(int_to_rat).collect()).collect();
    let inv = inverse(&m).ok_or(Error::RankDeficient)?;
    let mut processed: RaySet = simplex.iter().fold(0, |s, &i| s | 1 << i);
    let mut current: Vec<Facet> = (0..d)
        .map(|j| {
            let col: Vec<_> = inv.iter().map(|row| row[j].clone()).collect();
            let den = lcm_denominators(&col);
            let mut normal: Vec<Int> = col.iter().map(|x| (x * &den).to_integer()).collect();
            primitive(&mut normal);
            let zeros = simplex.iter().enumerate().filter(|&(k, _)| k != j).fold(0, |s, (_, &i)| s | 1 << i);
            Facet { normal, rays: zeros }
        })
        .collect();

    for (t, r) in rays.iter().enumerate() {
        if processed >> t & 1 == 1 {
            continue;
        }
        let vals: Vec<Int> = current.iter().map(|f| dot(&f.normal, r)).collect();
        let pos: Vec<usize> = (0..current.len()).filter(|&i| vals[i].is_positive()).collect();
        let neg: Vec<usize> = (0..current.len()).filter(|&i| vals[i].is_negative()).collect();
        let mut next: Vec<Facet> = Vec::new();
        for (i, f) in current.iter().enumerate() {
            if vals[i].is_positive() {
                next.push(f.clone());
            } else if vals[i].is_zero() {
                next.push(Facet { normal: f.normal.clone(), rays: f.rays | 1 << t });
            }
        }
        for &p in &pos {
            for &n in &neg {
                let common = current[p].rays & current[n].rays;
                if (common.count_ones() as usize) + 2 < d {
                    continue;
                }
                let adjacent = current.iter().enumerate().all(|(q, f)| q == p || q == n || f.rays & common != common);
                if !adjacent {
                    continue;
                }
                let (vp, vn) = (&vals[p], &vals[n]);
                let mut normal: Vec<Int> =
                    current[n].normal.iter().zip(&current[p].normal).map(|(a, b)| vp * a - vn * b).collect();
                primitive(&mut normal);
                next.push(Facet { normal, rays: common | 1 << t });
            }
        }
        processed |= 1 << t;
        current = next;
    }
    current.sort_by(|a, b| a.rays.cmp(&b.rays).then_with(|| a.normal.cmp(&b.normal)));
    Ok(current)
}

/// All nonempty faces other than the cone itself, as ray sets: the closure
/// of the facet sets under intersection.
pub fn proper_faces(facets: &[Facet]) -> Vec<RaySet> {
    let mut seen: std::collections::BTreeSet<RaySet> = facets.iter().map(|f| f.rays).collect();
    let mut frontier: Vec<RaySet> = seen.iter().copied().collect();
    while let Some(face) = frontier.pop() {
        for f in facets {
            let g = face & f.rays;
            if g != 0 && seen.insert(g) {
                frontier.push(g);
            }
        }
    }
    seen.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(xs: &[i64]) -> Vec<Int> {
        xs.iter().map(|&x| Int::from(x)).collect()
    }

    #[test]
    fn simplicial_cone() {
        let rays = vec![iv(&[1, 0, 0]), iv(&[0, 1, 0]), iv(&[1, 1, 1])];
        let f = cone_facets(&rays).unwrap();
        assert_eq!(f.len(), 3);
        for facet in &f {
            assert_eq!(facet.rays.count_ones(), 2);
        }
    }

    #[test]
    fn square_pyramid() {
        // cone over a square: 4 rays in R^3, 4 facets
        let rays = vec![iv(&[1, 0, 1]), iv(&[0, 1, 1]), iv(&[-1, 0, 1]), iv(&[0, -1, 1])];
        let f = cone_facets(&rays).unwrap();
        assert_eq!(f.len(), 4);
        for facet in &f {
            assert_eq!(facet.rays.count_ones(), 2);
            for (i, r) in rays.iter().enumerate() {
                let v = dot(&facet.normal, r);
                assert_eq!(v.is_zero(), facet.rays >> i & 1 == 1);
                assert!(!v.is_negative());
            }
        }
        // 4 edges + 4 facets
        assert_eq!(proper_faces(&f).len(), 8);
    }

    #[test]
    fn cube_cone() {
        // cone over a cube: 8 rays in R^4, 6 facets, 26 proper faces
        let mut rays = Vec::new();
        for s in 0..8 {
            rays.push(iv(&[
                if s & 1 == 0 { 1 } else { -1 },
                if s & 2 == 0 { 1 } else { -1 },
                if s & 4 == 0 { 1 } else { -1 },
                1,
            ]));
        }
        let f = cone_facets(&rays).unwrap();
        assert_eq!(f.len(), 6);
        assert_eq!(proper_faces(&f).len(), 8 + 12 + 6);
    }

    #[test]
    fn rejects_flat_cone() {
        let rays = vec![iv(&[1, 0, 0]), iv(&[0, 1, 0])];
        assert!(matches!(cone_facets(&rays), Err(Error::RankDeficient)));
    }
}
