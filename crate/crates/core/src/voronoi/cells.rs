//! Cells of the Voronoi decomposition modulo `GL_N(Z)` or `SL_N(Z)`, their
//! stabilizers and orientations, and the resulting integral chain complex.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::cone::{bits, cone_facets, proper_faces, RaySet};
use super::isometry::{config_maps, Config, DetFilter};
use super::{enumerate_perfect, PerfectFormRecord};
use crate::complex::ChainComplexZ;
use crate::exact_forms::{IntMat, LatticeVector};
use crate::linalg::{det_rat, rank_rat, EchelonBasis};
use crate::torsion::IntMatrix;
use crate::{Error, Int, Rat, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    #[default]
    SL,
    GL,
}

impl Group {
    fn filter(self) -> DetFilter {
        match self {
            Group::SL => DetFilter::Positive,
            Group::GL => DetFilter::Any,
        }
    }
}

impl FromStr for Group {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sl" => Ok(Group::SL),
            "gl" => Ok(Group::GL),
            _ => Err(Error::Parse(format!("unknown group `{s}` (expected sl or gl)"))),
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Group::SL => "sl",
            Group::GL => "gl",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cell {
    pub generators: Vec<LatticeVector>,
    /// Projective dimension: rank of `{v v^t}` minus one.
    pub dim: usize,
    pub in_boundary: bool,
    pub stabilizer_order: usize,
    pub orientation_faithful: bool,
}

impl Cell {
    pub fn label(&self) -> String {
        let vs: Vec<String> = self.generators.iter().map(ToString::to_string).collect();
        vs.concat()
    }
}

fn sym_rank(vectors: &[LatticeVector]) -> usize {
    let rows: Vec<Vec<Rat>> = vectors.iter().map(LatticeVector::sym_coords_rat).collect();
    rank_rat(&rows)
}

fn vector_rank(vectors: &[LatticeVector]) -> usize {
    let rows: Vec<Vec<Rat>> = vectors.iter().map(LatticeVector::to_rat).collect();
    rank_rat(&rows)
}

/// Rank-one forms of the first generators (in the given order) that are
/// independent; their order fixes the cell orientation.
fn orientation_basis(generators: &[LatticeVector]) -> Vec<Vec<Rat>> {
    let Some(first) = generators.first() else { return Vec::new() };
    let mut e = EchelonBasis::new(first.sym_coords().len());
    generators.iter().map(LatticeVector::sym_coords_rat).filter(|c| e.insert(c.clone())).collect()
}

/// Coordinates of `y` in `basis`, assuming `y` lies in its span.
fn coords_in(basis: &[Vec<Rat>], y: &[Rat]) -> Result<Vec<Rat>> {
    let d = basis.len();
    let dim = y.len();
    // rows of [basis^t | y]
    let mut m: Vec<Vec<Rat>> = (0..dim)
        .map(|i| {
            let mut row: Vec<Rat> = basis.iter().map(|b| b[i].clone()).collect();
            row.push(y[i].clone());
            row
        })
        .collect();
    let mut pivot_row = 0;
    for c in 0..d {
        let p = (pivot_row..dim)
            .find(|&r| !m[r][c].is_zero())
            .ok_or_else(|| Error::Internal("orientation basis is dependent".into()))?;
        m.swap(pivot_row, p);
        let inv = m[pivot_row][c].recip();
        for x in m[pivot_row].iter_mut() {
            *x *= &inv;
        }
        let prow = m[pivot_row].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != pivot_row && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, z) in row.iter_mut().zip(&prow) {
                    *x -= &f * z;
                }
            }
        }
        pivot_row += 1;
    }
    if m[d..].iter().any(|row| !row[d].is_zero()) {
        return Err(Error::Internal("vector outside the cell span".into()));
    }
    Ok(m[..d].iter().map(|row| row[d].clone()).collect())
}

/// Sign of the determinant of `vectors` written in `basis` coordinates.
fn orientation_sign(basis: &[Vec<Rat>], vectors: &[Vec<Rat>]) -> Result<i64> {
    let cols: Vec<Vec<Rat>> = vectors.iter().map(|v| coords_in(basis, v)).collect::<Result<_>>()?;
    let d = det_rat(&cols);
    if d.is_zero() {
        return Err(Error::Internal("degenerate orientation".into()));
    }
    Ok(if d.is_positive() { 1 } else { -1 })
}

fn transported(h: &IntMat, basis_vectors: &[LatticeVector]) -> Vec<Vec<Rat>> {
    basis_vectors.iter().map(|v| h.apply(v).sym_coords_rat()).collect()
}

/// Generators whose rank-one forms make up [`orientation_basis`].
fn basis_generators(generators: &[LatticeVector]) -> Vec<LatticeVector> {
    let Some(first) = generators.first() else { return Vec::new() };
    let mut e = EchelonBasis::new(first.sym_coords().len());
    generators.iter().filter(|v| e.insert(v.sym_coords_rat())).cloned().collect()
}

/// Order of the stabilizer of a spanning cell and whether every element
/// preserves its orientation.
pub fn stabilizer(generators: &[LatticeVector], group: Group) -> Result<(usize, bool)> {
    let cfg = Config::new(generators.iter().map(LatticeVector::canonical_sign).collect())
        .ok_or_else(|| Error::OutOfRange("stabilizers are computed for cells off the boundary".into()))?;
    let maps = config_maps(&cfg, &cfg, group.filter(), true);
    let bgens = basis_generators(&cfg.vectors);
    let basis = orientation_basis(&cfg.vectors);
    let mut faithful = true;
    for h in &maps {
        if orientation_sign(&basis, &transported(h, &bgens))? < 0 {
            faithful = false;
            break;
        }
    }
    Ok((maps.len(), faithful))
}

struct Face {
    class: usize,
    set: RaySet,
    dim: usize,
    /// Orbit and a map from the orbit representative onto this face.
    orbit: Option<(usize, IntMat)>,
}

struct Orbit {
    face: usize,
    config: Config,
    cell: Cell,
}

/// The quotient complex together with the cell data behind it.
#[derive(Clone, Debug, Serialize)]
pub struct VoronoiComplex {
    pub n: usize,
    pub group: Group,
    pub classes: usize,
    /// Orbits of cells off the boundary, orientable or not, by dimension.
    pub orbit_counts: Vec<usize>,
    /// Most codimension-one faces of a single cell in each dimension.
    pub max_face_counts: Vec<usize>,
    /// Cells kept in the complex, by degree.
    pub cells: Vec<Vec<Cell>>,
    #[serde(skip)]
    pub complex: ChainComplexZ,
}

/// Orbits of faces of all perfect cones, boundary cells and cells with an
/// orientation-reversing stabilizer removed, with signed incidence numbers.
pub fn build_complex(n: usize, group: Group) -> Result<VoronoiComplex> {
    if !(2..=4).contains(&n) {
        return Err(Error::OutOfRange(format!("complex supported for 2 <= N <= 4, got {n}")));
    }
    let classes = enumerate_perfect(n)?;
    build_complex_from(&classes, group)
}

pub fn build_complex_from(classes: &[PerfectFormRecord], group: Group) -> Result<VoronoiComplex> {
    let n = classes.first().ok_or(Error::RankDeficient)?.dim();
    let mut faces: Vec<Face> = Vec::new();
    let mut class_faces: Vec<Vec<usize>> = Vec::new();
    for (c, p) in classes.iter().enumerate() {
        let rays: Vec<Vec<Int>> = p.minvecs.vectors.iter().map(LatticeVector::sym_coords).collect();
        let mut sets = proper_faces(&cone_facets(&rays)?);
        sets.push(if rays.len() == 128 { RaySet::MAX } else { (1 << rays.len()) - 1 });
        let mut ids = Vec::new();
        for set in sets {
            let vs = vectors_of(p, set);
            ids.push(faces.len());
            faces.push(Face { class: c, set, dim: sym_rank(&vs) - 1, orbit: None });
        }
        class_faces.push(ids);
    }

    let mut orbits: Vec<Orbit> = Vec::new();
    let mut lookup: HashMap<(usize, usize, Rat, Vec<Rat>), Vec<usize>> = HashMap::new();
    for fi in 0..faces.len() {
        let vs = vectors_of(&classes[faces[fi].class], faces[fi].set);
        if vector_rank(&vs) < n {
            continue;
        }
        let cfg = Config::new(vs.clone()).expect("spanning");
        let (count, det, norms) = cfg.fingerprint();
        let key = (faces[fi].dim, count, det, norms);
        let mut found = None;
        for &o in lookup.get(&key).map(Vec::as_slice).unwrap_or(&[]) {
            if let Some(h) = config_maps(&orbits[o].config, &cfg, group.filter(), false).pop() {
                found = Some((o, h));
                break;
            }
        }
        let (o, h) = match found {
            Some(x) => x,
            None => {
                let (order, faithful) = stabilizer(&vs, group)?;
                let cell = Cell {
                    generators: vs,
                    dim: faces[fi].dim,
                    in_boundary: false,
                    stabilizer_order: order,
                    orientation_faithful: faithful,
                };
                orbits.push(Orbit { face: fi, config: cfg, cell });
                lookup.entry(key).or_default().push(orbits.len() - 1);
                (orbits.len() - 1, IntMat::identity(n))
            }
        };
        faces[fi].orbit = Some((o, h));
    }

    let top = orbits.iter().map(|o| o.cell.dim).max().unwrap_or(0);
    let mut orbit_counts = vec![0; top + 1];
    for o in &orbits {
        orbit_counts[o.cell.dim] += 1;
    }
    let mut max_face_counts = vec![0; top + 1];
    for ids in &class_faces {
        for &fi in ids {
            let d = faces[fi].dim;
            let sub = ids.iter().filter(|&&g| faces[g].dim + 1 == d && faces[g].set & !faces[fi].set == 0).count();
            max_face_counts[d] = max_face_counts[d].max(sub);
        }
    }

    // degree index of each kept orbit
    let mut sigma: Vec<Vec<usize>> = vec![Vec::new(); top + 1];
    let mut position: HashMap<usize, usize> = HashMap::new();
    for (i, o) in orbits.iter().enumerate() {
        if o.cell.orientation_faithful {
            position.insert(i, sigma[o.cell.dim].len());
            sigma[o.cell.dim].push(i);
        }
    }

    let mut boundaries = Vec::with_capacity(top);
    for k in 0..top {
        let mut d = IntMatrix::zeros(sigma[k].len(), sigma[k + 1].len());
        for (col, &oi) in sigma[k + 1].iter().enumerate() {
            let face = &faces[orbits[oi].face];
            let class = face.class;
            let gens = vectors_of(&classes[class], face.set);
            let basis = orientation_basis(&gens);
            for &gi in &class_faces[class] {
                let g = &faces[gi];
                if g.dim + 1 != face.dim || g.set & !face.set != 0 {
                    continue;
                }
                let Some((target, h)) = &g.orbit else { continue };
                let Some(&row) = position.get(target) else { continue };
                let g_basis = orientation_basis(&vectors_of(&classes[class], g.set));
                let eps = incidence_sign(&classes[class], &basis, face.set, &g_basis, g.set)?;
                let rep_gens = basis_generators(&orbits[*target].cell.generators);
                let o = orientation_sign(&g_basis, &transported(h, &rep_gens))?;
                let v = d.get(row, col) + Int::from(eps * o);
                d.set(row, col, v);
            }
        }
        boundaries.push(d);
    }

    let labels: Vec<Vec<String>> = sigma.iter().map(|s| s.iter().map(|&o| orbits[o].cell.label()).collect()).collect();
    let complex = ChainComplexZ::new(labels, boundaries)?;
    complex.check()?;
    let cells = sigma.iter().map(|s| s.iter().map(|&o| orbits[o].cell.clone()).collect()).collect();
    Ok(VoronoiComplex { n, group, classes: classes.len(), orbit_counts, max_face_counts, cells, complex })
}

/// Sign comparing the orientation of a face `g` induced from `face` with
/// its own: an inward generator followed by the basis of `g`.
fn incidence_sign(
    p: &PerfectFormRecord,
    basis: &[Vec<Rat>],
    face: RaySet,
    g_basis: &[Vec<Rat>],
    g: RaySet,
) -> Result<i64> {
    let x = bits(face & !g).next().expect("proper face");
    let mut frame = vec![p.minvecs.vectors[x].sym_coords_rat()];
    frame.extend(g_basis.iter().cloned());
    orientation_sign(basis, &frame)
}

/// Oriented face complex of a single perfect cone, all faces kept and no
/// group action; it is a cone over a ball, hence acyclic.
pub fn cone_face_complex(p: &PerfectFormRecord) -> Result<ChainComplexZ> {
    let rays: Vec<Vec<Int>> = p.minvecs.vectors.iter().map(LatticeVector::sym_coords).collect();
    let mut sets = proper_faces(&cone_facets(&rays)?);
    sets.push(if rays.len() == 128 { RaySet::MAX } else { (1 << rays.len()) - 1 });
    let dims: Vec<usize> = sets.iter().map(|&s| sym_rank(&vectors_of(p, s)) - 1).collect();
    let top = dims.iter().copied().max().unwrap_or(0);
    let mut by_dim: Vec<Vec<usize>> = vec![Vec::new(); top + 1];
    for (i, &d) in dims.iter().enumerate() {
        by_dim[d].push(i);
    }
    let bases: Vec<Vec<Vec<Rat>>> = sets.iter().map(|&s| orientation_basis(&vectors_of(p, s))).collect();
    let mut boundaries = Vec::new();
    for k in 0..top {
        let mut d = IntMatrix::zeros(by_dim[k].len(), by_dim[k + 1].len());
        for (col, &fi) in by_dim[k + 1].iter().enumerate() {
            for (row, &gi) in by_dim[k].iter().enumerate() {
                if sets[gi] & !sets[fi] == 0 {
                    let eps = incidence_sign(p, &bases[fi], sets[fi], &bases[gi], sets[gi])?;
                    d.set(row, col, Int::from(eps));
                }
            }
        }
        boundaries.push(d);
    }
    let labels = by_dim.iter().map(|ids| ids.iter().map(|&i| format!("{:x}", sets[i])).collect()).collect();
    let c = ChainComplexZ::new(labels, boundaries)?;
    c.check()?;
    Ok(c)
}

fn vectors_of(p: &PerfectFormRecord, set: RaySet) -> Vec<LatticeVector> {
    bits(set).map(|i| p.minvecs.vectors[i].clone()).collect()
}

/// A cell from arbitrary generators, with boundary status and, off the
/// boundary, its stabilizer.
pub fn make_cell(generators: Vec<LatticeVector>, group: Group) -> Result<Cell> {
    if generators.is_empty() {
        return Err(Error::ZeroVector);
    }
    let n = generators[0].dim();
    let mut gens: Vec<LatticeVector> = generators.iter().map(LatticeVector::canonical_sign).collect();
    gens.sort();
    gens.dedup();
    let dim = sym_rank(&gens) - 1;
    let in_boundary = vector_rank(&gens) < n;
    let (stabilizer_order, orientation_faithful) = if in_boundary { (0, false) } else { stabilizer(&gens, group)? };
    Ok(Cell { generators: gens, dim, in_boundary, stabilizer_order, orientation_faithful })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torsion::homology;

    fn lv(xs: &[i64]) -> LatticeVector {
        LatticeVector(xs.to_vec())
    }

    #[test]
    fn a2_top_cell() {
        let gens = vec![lv(&[1, 0]), lv(&[0, 1]), lv(&[1, 1])];
        // reflections swap two rays and fix the third
        assert_eq!(stabilizer(&gens, Group::GL).unwrap(), (12, false));
        assert_eq!(stabilizer(&gens, Group::SL).unwrap(), (6, true));
        let edge = make_cell(vec![lv(&[1, 0]), lv(&[0, 1])], Group::SL).unwrap();
        assert_eq!(edge.dim, 1);
        assert!(!edge.orientation_faithful);
        let vertex = make_cell(vec![lv(&[1, 0])], Group::SL).unwrap();
        assert!(vertex.in_boundary);
        assert_eq!(vertex.dim, 0);
    }

    #[test]
    fn conjugate_cells_have_equal_stabilizers() {
        let gens = vec![lv(&[1, 0, 0]), lv(&[0, 1, 0]), lv(&[0, 0, 1]), lv(&[1, 1, 0])];
        let g = IntMat::from_rows(&[vec![1, 1, 0], vec![0, 1, 2], vec![0, 0, 1]]);
        let image: Vec<LatticeVector> = gens.iter().map(|v| g.apply(v)).collect();
        assert_eq!(stabilizer(&gens, Group::SL).unwrap(), stabilizer(&image, Group::SL).unwrap());
    }

    #[test]
    fn complex_n2() {
        for group in [Group::SL, Group::GL] {
            let vc = build_complex(2, group).unwrap();
            vc.complex.check().unwrap();
            assert_eq!(vc.complex.top_degree(), 2);
            assert_eq!(vc.orbit_counts, vec![0, 1, 1]);
            for k in 0..=2 {
                let h = homology(&vc.complex, k).unwrap();
                assert!(h.torsion_primes().iter().all(|&p| p <= 3));
            }
        }
    }

    #[test]
    fn single_cone_face_complexes_are_acyclic() {
        for n in 2..=3 {
            for p in enumerate_perfect(n).unwrap() {
                let c = cone_face_complex(&p).unwrap();
                for k in 0..=c.top_degree() {
                    let h = homology(&c, k).unwrap();
                    assert_eq!(h.betti, usize::from(k == 0), "N={n} k={k}");
                    assert!(h.torsion.is_empty());
                }
            }
        }
    }

    #[test]
    fn complex_n3() {
        let vc = build_complex(3, Group::SL).unwrap();
        vc.complex.check().unwrap();
        assert!(vc.complex.top_degree() <= 5);
    }
}
