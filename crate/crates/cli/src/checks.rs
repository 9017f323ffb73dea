//! Invariant suites behind `--check`. Each returns
//! `{"passed", "cases", "failures"}`; randomized ones also echo the seed.

use anyhow::Result;
use perfect_core::constants::BigBound;
use perfect_core::cyclotomic::{
    bernoulli_exact_mod_p, bernoulli_mod_p, heuristic_sum, irregular_pairs, irregular_pairs_exact, is_prime,
    kurihara_component, residue_scan, Component, HeuristicReport, IrregularPair,
};
use perfect_core::minima::{is_perfect, prop1_check};
use perfect_core::torsion::{homology, lemma1_bound, prop3_bound, smith_normal_form, IntMatrix};
use perfect_core::voronoi::{enumerate_perfect_with, facet_orbit_reps, is_equivalent, neighbor, EnumerateOptions};
use perfect_core::{ChainComplexZ, Int, IntMat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

#[derive(Default)]
struct Tally {
    cases: usize,
    failures: Vec<String>,
}

impl Tally {
    fn expect(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn finish(self, seed: Option<u64>) -> Value {
        let mut v = json!({ "passed": self.failures.is_empty(), "cases": self.cases, "failures": self.failures });
        if let Some(s) = seed {
            v["seed"] = json!(s);
        }
        v
    }
}

fn random_unimodular(n: usize, rng: &mut ChaCha8Rng) -> IntMat {
    let mut rows = IntMat::identity(n).rows();
    for _ in 0..2 * n {
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if i == j {
            continue;
        }
        let c = rng.gen_range(-2i64..=2);
        for col in 0..n {
            rows[i][col] += c * rows[j][col];
        }
        if rng.gen_bool(0.3) {
            rows.swap(i, j);
        }
    }
    IntMat::from_rows(&rows)
}

fn to_int_matrix(g: &IntMat) -> IntMatrix {
    IntMatrix::from_rows(g.rows().into_iter().map(|r| r.into_iter().map(Int::from).collect()).collect())
        .expect("rectangular")
}

pub fn voronoi_enumerate(n: usize, seed: u64) -> Result<Value> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::default();
    let classes = enumerate_perfect_with(n, EnumerateOptions { allow_six: n == 6 })?;
    for c in &classes {
        t.expect(is_perfect(&c.form)?, || format!("class {} is not perfect", c.index));
        if n <= 4 {
            let r = prop1_check(&c.form)?;
            t.expect(r.ok, || {
                format!("class {}: coordinate bound fails ({} > {})", c.index, r.max_coordinate, r.bound)
            });
        }
        let g = random_unimodular(n, &mut rng);
        let moved = c.form.act(&g)?;
        t.expect(is_equivalent(&c.form, &moved)?.is_some(), || format!("class {}: A[g] not recognized", c.index));
        if n <= 4 {
            for f in facet_orbit_reps(c)? {
                let b = neighbor(c, &f)?;
                let mut found = false;
                for d in &classes {
                    if is_equivalent(&d.form, &b)?.is_some() {
                        found = true;
                        break;
                    }
                }
                t.expect(found, || format!("class {}: neighbour outside the classification", c.index));
            }
        }
    }
    Ok(t.finish(Some(seed)))
}

/// `d d = 0`, the column-product bound on every boundary, the exponent bound
/// on every homology group, and torsion primes at most `max_prime`.
pub fn complex(c: &ChainComplexZ, max_prime: u64) -> Result<Value> {
    let mut t = Tally::default();
    let closed = c.check();
    t.expect(closed.is_ok(), || format!("{}", closed.as_ref().unwrap_err()));
    if closed.is_err() {
        return Ok(t.finish(None));
    }
    for k in 0..=c.top_degree() {
        let h = homology(c, k)?;
        let p = prop3_bound(c, k)?;
        t.expect(p.bound_int >= h.torsion_card(), || {
            format!("H_{k}: bound {} below torsion {}", p.bound, h.torsion_card())
        });
        for q in h.torsion_primes() {
            t.expect(q <= max_prime, || format!("H_{k}: torsion prime {q} exceeds {max_prime}"));
        }
        if let Some(d) = c.boundary(k + 1) {
            if smith_normal_form(d).rank > 0 {
                let tors = smith_normal_form(d).torsion_card();
                t.expect(lemma1_bound(d, None)? >= tors, || format!("d_{}: column bound below torsion", k + 1));
            }
        }
    }
    Ok(t.finish(None))
}

pub fn snf(m: &IntMatrix, seed: u64) -> Value {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::default();
    let s = smith_normal_form(m);
    for w in s.invariant_factors.windows(2) {
        t.expect((&w[1] % &w[0]) == Int::from(0), || format!("{} does not divide {}", w[0], w[1]));
    }
    for _ in 0..8 {
        let u = to_int_matrix(&random_unimodular(m.rows(), &mut rng));
        let v = to_int_matrix(&random_unimodular(m.cols(), &mut rng));
        let moved = u.mul(m).and_then(|x| x.mul(&v)).expect("conformable");
        t.expect(smith_normal_form(&moved) == s, || "SNF changed under a unimodular change of basis".into());
    }
    for i in 0..100 {
        let (r, c) = (rng.gen_range(1..=12), rng.gen_range(1..=12));
        let rows = (0..r).map(|_| (0..c).map(|_| Int::from(rng.gen_range(-50i64..=50))).collect()).collect();
        let x = IntMatrix::from_rows(rows).expect("rectangular");
        if smith_normal_form(&x).rank == 0 {
            continue;
        }
        let ok = lemma1_bound(&x, None).map(|b| b >= smith_normal_form(&x).torsion_card()).unwrap_or(false);
        t.expect(ok, || format!("random matrix {i}: column bound below torsion"));
    }
    t.finish(Some(seed))
}

/// The enclosure of `ln` at double precision lies inside the one at the
/// requested precision.
pub fn bound_refines(b: &BigBound, digits: usize) -> Result<Value> {
    let mut t = Tally::default();
    if !b.is_zero() {
        let bits = (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 32;
        let (coarse, fine) = (b.ln_interval(bits)?, b.ln_interval(2 * bits)?);
        t.expect(coarse.lo_rat() <= fine.lo_rat() && fine.hi_rat() <= coarse.hi_rat(), || {
            "ln enclosure does not shrink with precision".into()
        });
        let (d1, d2) = (coarse.to_decimal(digits), fine.to_decimal(digits));
        t.expect(d1.is_none() || d1 == d2, || format!("digits changed: {d1:?} vs {d2:?}"));
    }
    Ok(t.finish(None))
}

pub fn bernoulli() -> Value {
    let mut t = Tally::default();
    for p in (5..200u64).filter(|&p| is_prime(p)) {
        for k in (2..=p - 3).step_by(2) {
            let fast = bernoulli_mod_p(k, p).ok();
            t.expect(fast == bernoulli_exact_mod_p(k as usize, p), || format!("B_{k} mod {p}"));
        }
    }
    t.finish(None)
}

pub fn irregular(max_p: u64) -> Result<Value> {
    let mut t = Tally::default();
    for p in (3..=max_p.min(300)).filter(|&p| is_prime(p)) {
        let (a, b) = (irregular_pairs(p)?, irregular_pairs_exact(p)?);
        t.expect(a == b, || format!("p = {p}: scan {a:?} vs exact {b:?}"));
    }
    Ok(t.finish(None))
}

/// Every prime in the budget is tried; the convention guard must never fire.
pub fn vandiver(targets: &[(u64, u64)], q_budget: usize) -> Result<Value> {
    let mut t = Tally::default();
    let mut misses = 0;
    for &(p, k) in targets {
        match residue_scan(p, k, q_budget) {
            Ok(attempts) => {
                misses += attempts.iter().filter(|a| a.residue == 1).count();
                t.expect(true, String::new);
            }
            Err(e) => t.expect(false, || format!("({p}, {k}): {e}")),
        }
    }
    let mut v = t.finish(None);
    v["per_q_misses"] = json!(misses);
    Ok(v)
}

pub fn kurihara(p: u64) -> Result<Value> {
    let mut t = Tally::default();
    let pairs = irregular_pairs(p)?;
    for n in (3..=p.saturating_sub(2)).step_by(2) {
        let irregular = pairs.contains(&IrregularPair { p, k: p - n });
        let zero = kurihara_component(p, n)? == Component::Zero;
        t.expect(zero != irregular, || format!("n = {n}: component {zero} but irregular {irregular}"));
    }
    Ok(t.finish(None))
}

/// Sieve against trial division on a prefix, and against the Mertens
/// asymptotic at `x`.
pub fn heuristic(x: u64, r: &HeuristicReport) -> Result<Value> {
    let mut t = Tally::default();
    let y = x.min(100_000);
    let naive: f64 = (37..=y).filter(|&p| is_prime(p)).map(|p| 1.0 / p as f64).sum();
    let sieved = heuristic_sum(y)?.prime_sum;
    t.expect((naive - sieved).abs() < 1e-9, || format!("sieve {sieved} vs trial division {naive}"));
    if x >= 1_000_000 {
        t.expect((r.prime_sum - r.mertens_estimate).abs() < 1e-3, || {
            format!("prime sum {} far from Mertens {}", r.prime_sum, r.mertens_estimate)
        });
    }
    t.expect(r.prime_sum.is_finite() && r.prime_sum > 0.0, || "non-finite sum".into());
    Ok(t.finish(None))
}
