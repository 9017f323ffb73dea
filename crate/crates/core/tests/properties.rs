use std::sync::OnceLock;

use num_traits::{One, Signed, Zero};
use perfect_core::certified::{ln_int, ln_rat};
use perfect_core::constants::{a_const, c_const, f_const, h_from_ell, BigBound};
use perfect_core::minima::{a_n_form, shortest_vectors};
use perfect_core::torsion::{homology, lemma1_bound, prop3_bound, smith_normal_form, IntMatrix};
use perfect_core::voronoi::{build_complex, Group, VoronoiComplex};
use perfect_core::{Int, IntMat, Rat, SymForm};
use proptest::prelude::*;

/// Unimodular matrix from a list of elementary operations.
fn unimodular(n: usize, ops: &[(usize, usize, i64, bool)]) -> IntMat {
    let mut rows: Vec<Vec<i64>> = IntMat::identity(n).rows();
    for &(i, j, c, swap) in ops {
        let (i, j) = (i % n, j % n);
        if swap {
            rows.swap(i, j);
        } else if i != j {
            for col in 0..n {
                rows[i][col] += c * rows[j][col];
            }
        }
    }
    IntMat::from_rows(&rows)
}

fn ops() -> impl Strategy<Value = Vec<(usize, usize, i64, bool)>> {
    prop::collection::vec((0usize..6, 0usize..6, -2i64..=2, any::<bool>()), 0..8)
}

fn int_matrix(max_dim: usize, max_entry: i64) -> impl Strategy<Value = IntMatrix> {
    (1..=max_dim, 1..=max_dim).prop_flat_map(move |(r, c)| {
        prop::collection::vec(prop::collection::vec(-max_entry..=max_entry, c), r).prop_map(|rows| {
            IntMatrix::from_rows(rows.into_iter().map(|r| r.into_iter().map(Int::from).collect()).collect()).unwrap()
        })
    })
}

fn int_unimodular(n: usize, ops: &[(usize, usize, i64, bool)]) -> IntMatrix {
    let u = unimodular(n, ops);
    IntMatrix::from_rows(u.rows().into_iter().map(|r| r.into_iter().map(Int::from).collect()).collect()).unwrap()
}

fn complex(n: usize) -> &'static VoronoiComplex {
    static C2: OnceLock<VoronoiComplex> = OnceLock::new();
    static C3: OnceLock<VoronoiComplex> = OnceLock::new();
    let cell = if n == 2 { &C2 } else { &C3 };
    cell.get_or_init(|| build_complex(n, Group::SL).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn action_preserves_invariants(n in 2usize..=4, g_ops in ops(), h_ops in ops()) {
        let a = a_n_form(n);
        let g = unimodular(n, &g_ops);
        let h = unimodular(n, &h_ops);
        let b = a.act(&g).unwrap();
        prop_assert_eq!(b.determinant(), a.determinant());
        let (ma, mb) = (shortest_vectors(&a).unwrap(), shortest_vectors(&b).unwrap());
        prop_assert_eq!(&ma.mu, &mb.mu);
        prop_assert_eq!(ma.pair_count(), mb.pair_count());
        prop_assert_eq!(b.act(&h).unwrap(), a.act(&g.mul(&h)).unwrap());
    }

    #[test]
    fn snf_is_unimodular_invariant(m in int_matrix(6, 9), l in ops(), r in ops()) {
        let u = int_unimodular(m.rows(), &l);
        let v = int_unimodular(m.cols(), &r);
        let moved = u.mul(&m).unwrap().mul(&v).unwrap();
        prop_assert_eq!(smith_normal_form(&moved), smith_normal_form(&m));
    }

    #[test]
    fn snf_factors_divide(m in int_matrix(8, 20)) {
        let s = smith_normal_form(&m);
        prop_assert_eq!(s.invariant_factors.len(), s.rank);
        for w in s.invariant_factors.windows(2) {
            prop_assert!((&w[1] % &w[0]).is_zero());
        }
        prop_assert!(s.invariant_factors.iter().all(|d| d.is_positive()));
    }

    #[test]
    fn lemma1_bounds_torsion(m in int_matrix(12, 50)) {
        let t = smith_normal_form(&m).torsion_card();
        prop_assert!(lemma1_bound(&m, None).unwrap() >= t);
    }

    #[test]
    fn homology_ignores_cell_order(seed in any::<u64>(), n in 2usize..=3) {
        let c = &complex(n).complex;
        let perms: Vec<Vec<usize>> = (0..=c.top_degree())
            .map(|k| {
                let mut p: Vec<usize> = (0..c.size(k)).collect();
                let len = p.len();
                for i in (1..len).rev() {
                    let j = (seed.rotate_left(i as u32) as usize ^ k) % (i + 1);
                    p.swap(i, j);
                }
                p
            })
            .collect();
        let d = c.permuted(&perms);
        for k in 0..=c.top_degree() {
            prop_assert_eq!(homology(&d, k).unwrap(), homology(c, k).unwrap());
            let (p, q) = (prop3_bound(&d, k).unwrap(), prop3_bound(c, k).unwrap());
            prop_assert_eq!(p.bound_int, q.bound_int);
        }
    }

    #[test]
    fn certified_digits_survive_more_precision(num in 1i64..10_000, den in 1i64..10_000) {
        let r = Rat::new(Int::from(num), Int::from(den));
        prop_assume!(r != Rat::one());
        let coarse = ln_rat(&r, 128).unwrap();
        let fine = ln_rat(&r, 256).unwrap();
        prop_assert!(fine.lo_rat() >= coarse.lo_rat() && fine.hi_rat() <= coarse.hi_rat() || coarse.to_decimal(20).is_none());
        if let Some(s) = coarse.to_decimal(20) {
            prop_assert_eq!(Some(s), fine.to_decimal(20));
        }
    }

    #[test]
    fn ln_of_product_is_sum(a in 2u64..1 << 40, b in 2u64..1 << 40) {
        let bits = 160;
        let ab = ln_int(&(Int::from(a) * Int::from(b)), bits).unwrap();
        let sum = ln_int(&Int::from(a), bits).unwrap().add(&ln_int(&Int::from(b), bits).unwrap());
        prop_assert!(ab.lo_rat() <= sum.hi_rat() && sum.lo_rat() <= ab.hi_rat());
    }

    #[test]
    fn constants_are_monotone(k in 0u64..6, n in 2u32..6) {
        prop_assert!(a_const(n) <= a_const(n + 1));
        prop_assert!(c_const(k, n) <= c_const(k, n + 1));
        prop_assert!(f_const(k, n) <= f_const(k, n + 1));
        let (lo, hi) = (h_from_ell(k, n), h_from_ell(k, n + 1));
        // f(k, N) = 0 once k exceeds s(N), and then h is the degenerate 0
        prop_assume!(!lo.is_zero());
        let bits = 96;
        prop_assert!(lo.ln_interval(bits).unwrap().lo_rat() <= hi.ln_interval(bits).unwrap().hi_rat());
    }
}

#[test]
fn cell_counts_within_bounds() {
    for n in 2..=4usize {
        let vc = build_complex(n, Group::SL).unwrap();
        for (k, &count) in vc.orbit_counts.iter().enumerate() {
            assert!(Int::from(count) <= c_const(k as u64, n as u32), "N={n} k={k}: {count} orbits");
        }
        for (k, &faces) in vc.max_face_counts.iter().enumerate() {
            assert!(Int::from(faces) <= f_const(k as u64, n as u32), "N={n} k={k}: {faces} faces");
        }
    }
}

#[test]
fn exact_bounds_stay_exact() {
    assert!(matches!(h_from_ell(0, 2), BigBound::ExactInteger(_)));
    let f = SymForm::identity(3);
    assert_eq!(f.determinant(), Rat::one());
}
