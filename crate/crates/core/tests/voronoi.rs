use perfect_core::torsion::homology;
use perfect_core::voronoi::cells::cone_face_complex;
use perfect_core::voronoi::{build_complex, enumerate_perfect, facet_orbit_reps, is_equivalent, neighbor, Group};

#[test]
fn cone_face_complexes_are_acyclic_in_dimension_four() {
    for p in enumerate_perfect(4).unwrap() {
        let c = cone_face_complex(&p).unwrap();
        for k in 0..=c.top_degree() {
            let h = homology(&c, k).unwrap();
            assert_eq!(h.betti, usize::from(k == 0), "class {} H_{k}", p.index);
            assert!(h.torsion.is_empty());
        }
    }
}

#[test]
fn neighbours_of_d4_and_a4_reach_each_other() {
    let classes = enumerate_perfect(4).unwrap();
    for c in &classes {
        let mut reached = vec![false; classes.len()];
        for f in facet_orbit_reps(c).unwrap() {
            let b = neighbor(c, &f).unwrap();
            let i = classes.iter().position(|d| is_equivalent(&d.form, &b).unwrap().is_some()).unwrap();
            reached[i] = true;
        }
        // A4 touches D4, and D4 touches A4 (and itself)
        let other = classes.iter().position(|d| d.index != c.index).unwrap();
        assert!(reached[other], "class {} never reaches class {other}", c.index);
    }
}

#[test]
fn dimension_four_complex_regression() {
    let vc = build_complex(4, Group::SL).unwrap();
    vc.complex.check().unwrap();
    assert_eq!(vc.orbit_counts, vec![0, 0, 0, 1, 3, 4, 4, 2, 2, 2]);
    let betti: Vec<usize> = (0..=vc.complex.top_degree()).map(|k| homology(&vc.complex, k).unwrap().betti).collect();
    assert_eq!(betti, vec![0, 0, 0, 0, 0, 0, 1, 0, 0, 1]);
    let mut torsion = Vec::new();
    for k in 0..=vc.complex.top_degree() {
        let h = homology(&vc.complex, k).unwrap();
        for p in h.torsion_primes() {
            assert!(p <= 5, "torsion prime {p} in H_{k}");
        }
        torsion.push(h.torsion);
    }
    assert_eq!(torsion[8], vec![perfect_core::Int::from(2)]);
    let gl = build_complex(4, Group::GL).unwrap();
    gl.complex.check().unwrap();
}
