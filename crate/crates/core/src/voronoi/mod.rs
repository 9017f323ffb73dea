//! Voronoi's algorithm: perfect forms up to equivalence, their cones, and
//! the cell complex of the quotient of the well-rounded retract.

pub mod cells;
pub mod cone;
pub mod isometry;

use std::collections::HashSet;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::exact_forms::{sym_dim, sym_index, IntMat, LatticeVector, SymForm};
use crate::minima::{lll_reduce, shortest_vectors, MinVecSet};
use crate::{Error, Int, Rat, Result};

pub use cells::{build_complex, stabilizer, Cell, Group, VoronoiComplex};
pub use cone::{Facet, RaySet};
use isometry::{automorphisms, form_isometries, DetFilter};

/// One equivalence class of perfect forms.
#[derive(Clone, Debug, Serialize)]
pub struct PerfectFormRecord {
    pub index: usize,
    pub form: SymForm,
    pub minvecs: MinVecSet,
    #[serde(serialize_with = "ser_display")]
    pub det: Rat,
    /// Order of the automorphism group in `GL_N(Z)`.
    pub aut_order: usize,
}

fn ser_display<S: serde::Serializer, T: std::fmt::Display>(x: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

impl PerfectFormRecord {
    pub fn new(index: usize, form: SymForm) -> Result<Self> {
        let minvecs = shortest_vectors(&form)?;
        if !crate::minima::is_perfect_set(form.dim(), &minvecs.vectors) {
            return Err(Error::Internal(format!("form is not perfect: {form}")));
        }
        let aut_order = automorphisms(&form, DetFilter::Any).len();
        Ok(Self { index, det: form.determinant(), form, minvecs, aut_order })
    }

    pub fn dim(&self) -> usize {
        self.form.dim()
    }

    pub fn pair_count(&self) -> usize {
        self.minvecs.pair_count()
    }
}

/// A facet of a perfect cone: the functional `R` with `v^t R v >= 0` on all
/// minimal vectors, zero exactly on `vectors`.
#[derive(Clone, Debug, Serialize)]
pub struct FacetInfo {
    pub functional: SymForm,
    pub vectors: Vec<LatticeVector>,
    #[serde(skip)]
    pub rays: RaySet,
}

/// `A_N`-type seed: 2 on the diagonal, 1 off it.
pub fn initial_form(n: usize) -> Result<SymForm> {
    if n < 2 {
        return Err(Error::OutOfRange(format!("N = {n} < 2")));
    }
    Ok(crate::minima::a_n_form(n))
}

/// Symmetric matrix paired with packed rank-one coordinates by the dot
/// product: off-diagonal entries are halved.
fn functional_from_normal(n: usize, y: &[Int]) -> SymForm {
    let mut upper = vec![Rat::zero(); sym_dim(n)];
    for i in 0..n {
        for j in i..n {
            let k = sym_index(n, i, j);
            upper[k] = if i == j { Rat::from_integer(y[k].clone()) } else { Rat::new(y[k].clone(), Int::from(2)) };
        }
    }
    SymForm::from_upper(n, upper)
}

pub fn facets(p: &PerfectFormRecord) -> Result<Vec<FacetInfo>> {
    let n = p.dim();
    let rays: Vec<Vec<Int>> = p.minvecs.vectors.iter().map(LatticeVector::sym_coords).collect();
    let fs = cone::cone_facets(&rays)?;
    Ok(fs
        .into_iter()
        .map(|f| FacetInfo {
            functional: functional_from_normal(n, &f.normal),
            vectors: cone::bits(f.rays).map(|i| p.minvecs.vectors[i].clone()).collect(),
            rays: f.rays,
        })
        .collect())
}

/// The perfect form across `facet`: `A + rho R` for the least `rho > 0` at
/// which new vectors reach the minimum, scaled to a primitive integral form
/// and LLL-reduced.
pub fn neighbor(p: &PerfectFormRecord, facet: &FacetInfo) -> Result<SymForm> {
    let a = &p.form;
    let r = &facet.functional;
    let mu = &p.minvecs.mu;
    let at = |u: &Rat| a.add_scaled(r, u);

    // bracket: a positive definite A + uR whose minimum dropped below mu
    let (mut lo, mut hi) = (Rat::zero(), Rat::one());
    let mut steps = 0;
    loop {
        steps += 1;
        if steps > 400 {
            return Err(Error::Internal("neighbor: unbounded direction".into()));
        }
        let b = at(&hi);
        if !b.is_positive_definite() {
            hi = (&lo + &hi) / Int::from(2);
            continue;
        }
        if &shortest_vectors(&b)?.mu < mu {
            break;
        }
        lo = hi.clone();
        hi *= Int::from(2);
    }

    // shrink to the first vector that comes down to mu
    let mut u = hi;
    loop {
        let b = at(&u);
        let m = shortest_vectors(&b)?;
        if &m.mu == mu {
            break;
        }
        if &m.mu > mu {
            return Err(Error::Internal("neighbor: minimum overshoot".into()));
        }
        let mut next: Option<Rat> = None;
        for w in &m.vectors {
            let aw = a.evaluate(w)?;
            let rw = r.evaluate(w)?;
            if !rw.is_negative() {
                return Err(Error::Internal("neighbor: short vector with R[w] >= 0".into()));
            }
            let rho = (aw - mu) / (-rw);
            if next.as_ref().is_none_or(|x| &rho < x) {
                next = Some(rho);
            }
        }
        let next = next.ok_or_else(|| Error::Internal("neighbor: no minimal vectors".into()))?;
        if next < lo || next >= u {
            return Err(Error::Internal("neighbor: rho iteration did not contract".into()));
        }
        u = next;
    }
    let b = at(&u);
    if !crate::minima::is_perfect(&b)? {
        return Err(Error::Internal("neighbor is not perfect".into()));
    }
    Ok(canonical_form(&b))
}

/// Primitive integral multiple, LLL-reduced, then the lexicographically least
/// image under coordinate permutations and sign changes.
pub fn canonical_form(a: &SymForm) -> SymForm {
    let (prim, _) = a.primitive_integral();
    let (red, _) = lll_reduce(&prim);
    let n = red.dim();
    if n > 6 {
        return red;
    }
    let mut best = red.clone();
    let mut best_key = best.lex_key();
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        for signs in 0u32..(1 << (n - 1)) {
            let mut g = IntMat::identity(n);
            for (c, &pc) in perm.iter().enumerate() {
                for r in 0..n {
                    g.set(r, c, if r == pc { 1 } else { 0 });
                }
            }
            for c in 1..n {
                if signs >> (c - 1) & 1 == 1 {
                    g.negate_column(c);
                }
            }
            let f = red.act_unchecked(&g);
            let key = f.lex_key();
            if key < best_key {
                best_key = key;
                best = f;
            }
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else { return false };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Invariants compared before any isometry search.
fn invariants(a: &SymForm) -> Result<(Rat, Rat, usize, Vec<Rat>)> {
    let m = shortest_vectors(a)?;
    // multiset of |A(v, w)| over pairs of minimal vectors
    let mut prods: Vec<Rat> = Vec::new();
    for (i, v) in m.vectors.iter().enumerate() {
        for w in &m.vectors[i + 1..] {
            prods.push(a.bilinear(&v.0, &w.0).abs());
        }
    }
    prods.sort();
    Ok((a.determinant(), m.mu, m.vectors.len(), prods))
}

/// Some `g` in `GL_N(Z)` with `g^t A g = B`.
pub fn is_equivalent(a: &SymForm, b: &SymForm) -> Result<Option<IntMat>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    if !a.is_positive_definite() || !b.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    if invariants(a)? != invariants(b)? {
        return Ok(None);
    }
    Ok(form_isometries(a, b, DetFilter::Any, false).into_iter().next())
}

#[derive(Clone, Copy, Debug, Default)]
pub struct EnumerateOptions {
    /// Permit `N = 6`, which is slow.
    pub allow_six: bool,
}

/// All perfect forms of dimension `n` up to `GL_N(Z)` equivalence, by the
/// neighbour walk from [`initial_form`].
pub fn enumerate_perfect(n: usize) -> Result<Vec<PerfectFormRecord>> {
    enumerate_perfect_with(n, EnumerateOptions::default())
}

pub fn enumerate_perfect_with(n: usize, opts: EnumerateOptions) -> Result<Vec<PerfectFormRecord>> {
    let max = if opts.allow_six { 6 } else { 5 };
    if !(2..=max).contains(&n) {
        return Err(Error::OutOfRange(format!("N = {n} outside 2..={max}")));
    }
    let mut classes = vec![PerfectFormRecord::new(0, canonical_form(&initial_form(n)?))?];
    let mut keys = vec![invariants(&classes[0].form)?];
    let mut next = 0;
    while next < classes.len() {
        let current = classes[next].clone();
        next += 1;
        for facet in facet_orbit_reps(&current)? {
            let b = neighbor(&current, &facet)?;
            let key = invariants(&b)?;
            let known = classes
                .iter()
                .zip(&keys)
                .any(|(c, k)| *k == key && !form_isometries(&c.form, &b, DetFilter::Any, false).is_empty());
            if !known {
                classes.push(PerfectFormRecord::new(classes.len(), b)?);
                keys.push(key);
            }
        }
    }
    Ok(classes)
}

/// One facet from each orbit under the automorphism group of the form.
pub fn facet_orbit_reps(p: &PerfectFormRecord) -> Result<Vec<FacetInfo>> {
    let all = facets(p)?;
    let auts = automorphisms(&p.form, DetFilter::Any);
    let position = |v: &LatticeVector| p.minvecs.vectors.iter().position(|w| *w == v.canonical_sign());
    // permutation of minimal vectors induced by each automorphism (v -> g v)
    let perms: Vec<Vec<usize>> = auts
        .iter()
        .map(|g| {
            p.minvecs.vectors.iter().map(|v| position(&g.apply(v)).expect("automorphism permutes minima")).collect()
        })
        .collect();
    let mut seen: HashSet<RaySet> = HashSet::new();
    let mut reps = Vec::new();
    for f in all {
        if seen.contains(&f.rays) {
            continue;
        }
        for perm in &perms {
            let image = cone::bits(f.rays).fold(0 as RaySet, |s, i| s | 1 << perm[i]);
            seen.insert(image);
        }
        reps.push(f);
    }
    Ok(reps)
}
