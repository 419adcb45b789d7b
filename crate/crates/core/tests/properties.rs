//! Property tests: linear algebra against exhaustive enumeration, and
//! structural invariants of modules, closed forms and the text format.

use std::collections::HashSet;

use krcore::a1mod::{std_a1, std_lambda0, std_pn, std_trivial, A1Module, Margolis};
use krcore::closedform::hp_dim;
use krcore::format::{parse, print_a1, print_e, ModuleFile};
use krcore::gflin::{BitVec, F2Matrix};
use krcore::grmod::{bd, DimTable, Window};
use krcore::rfun::apply_r;
use proptest::prelude::*;

fn matrix() -> impl Strategy<Value = F2Matrix> {
    (0usize..8, 0usize..9).prop_flat_map(|(r, c)| {
        proptest::collection::vec(any::<bool>(), r * c)
            .prop_map(move |bits| F2Matrix::from_fn(r, c, |i, j| bits[i * c + j]))
    })
}

/// All vectors `A x`, by enumerating every `x`.
fn image_set(a: &F2Matrix) -> HashSet<Vec<bool>> {
    let n = a.ncols();
    (0u32..1 << n)
        .map(|bits| {
            let x = BitVec::from_indices(n, (0..n).filter(|i| bits >> i & 1 == 1));
            let y = a.apply(&x);
            (0..y.len()).map(|i| y.get(i)).collect()
        })
        .collect()
}

/// A small module: one of a few standard modules, shifted.
fn small_module() -> impl Strategy<Value = A1Module> {
    (0usize..6, -4i32..=4).prop_map(|(which, s)| {
        let m = match which {
            0 => std_a1(),
            1 => std_trivial(),
            2 => std_lambda0(),
            3 => std_pn(1, 9),
            4 => std_pn(2, 10),
            _ => std_pn(0, 8),
        };
        m.shift(s)
    })
}

fn margolis_total(m: &A1Module) -> (DimTable, DimTable) {
    (m.margolis(Margolis::Q0), m.margolis(Margolis::Q1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_matches_image_size(a in matrix()) {
        let r = a.rank();
        prop_assert_eq!(image_set(&a).len(), 1usize << r);
        prop_assert_eq!(a.transpose().rank(), r);
        let k = a.kernel_basis();
        prop_assert_eq!(k.nrows() + r, a.ncols());
        prop_assert_eq!(k.rank(), k.nrows());
        for v in k.rows() {
            prop_assert!(a.apply(v).is_zero());
        }
    }

    #[test]
    fn solve_finds_preimages(a in matrix(), seed in any::<u64>()) {
        let n = a.ncols();
        let x = BitVec::from_indices(n, (0..n).filter(|i| seed >> i & 1 == 1));
        let b = a.apply(&x);
        let y = a.solve(&b).expect("b is in the image");
        prop_assert_eq!(a.apply(&y), b);
    }

    #[test]
    fn margolis_homology_is_additive(m in small_module(), n in small_module()) {
        let sum = A1Module::direct_sum("S", &[("a", &m), ("b", &n)]).unwrap();
        let (s0, s1) = margolis_total(&sum);
        let (m0, m1) = margolis_total(&m);
        let (n0, n1) = margolis_total(&n);
        let w = s0.region.intersect(&m0.region).intersect(&n0.region);
        prop_assert!(s0.restrict(w).mismatches(&m0.plus(&n0).restrict(w)).is_empty());
        let w = s1.region.intersect(&m1.region).intersect(&n1.region);
        prop_assert!(s1.restrict(w).mismatches(&m1.plus(&n1).restrict(w)).is_empty());
    }

    #[test]
    fn double_dual_and_shift_preserve_dimensions(m in small_module(), s in -5i32..=5) {
        let dd = m.dual().dual();
        prop_assert!(dd.validate().is_ok());
        prop_assert_eq!(dd.dims().dims, m.dims().dims);
        prop_assert_eq!(m.shift(s).shift(-s).dims().dims, m.dims().dims);
        for d in -12..=12 {
            prop_assert_eq!(m.dual().dim(-d), m.dim(d));
        }
    }

    #[test]
    fn a1_files_round_trip(m in small_module(), n in small_module()) {
        let sum = A1Module::direct_sum("S", &[("a", &m), ("b", &n)]).unwrap();
        let text = print_a1(&sum);
        let back = match parse(&text).unwrap() {
            ModuleFile::A1(b) => b,
            other => panic!("kind {}", other.kind()),
        };
        prop_assert_eq!(print_a1(&back), text);
        prop_assert_eq!(back, sum);
    }

    #[test]
    fn h01_is_additive_and_e_files_round_trip(m in small_module(), n in small_module()) {
        let w = Window::new(-6, 6, -3, 3);
        let sum = A1Module::direct_sum("S", &[("a", &m), ("b", &n)]).unwrap();
        let (rs, rm, rn) = (apply_r(&sum, w).unwrap().total, apply_r(&m, w).unwrap().total, apply_r(&n, w).unwrap().total);
        let (hs, hm, hn) = (rs.h01(), rm.h01(), rn.h01());
        let region = hs.region.intersect(&hm.region).intersect(&hn.region);
        prop_assert!(hs.dims().restrict(region).mismatches(&hm.dims().plus(&hn.dims()).restrict(region)).is_empty());
        let text = print_e(&rm);
        let back = match parse(&text).unwrap() {
            ModuleFile::E(b) => b,
            other => panic!("kind {}", other.kind()),
        };
        prop_assert_eq!(print_e(&back), text);
        prop_assert_eq!(back, rm);
    }

    #[test]
    fn hp_is_periodic(m in -30i32..30, k in -30i32..30) {
        prop_assert_eq!(hp_dim(bd(m, k)), hp_dim(bd(m - 4, k + 4)));
    }
}

#[test]
fn hp_twist_zero_slice() {
    // 1, x⁴, and v^{4j}σ^{4j}, x⁴v^{4j}σ^{4j}: one class in each degree 4j ≥ 0
    for m in -40..=40 {
        assert_eq!(hp_dim(bd(m, 0)), usize::from(m >= 0 && m % 4 == 0), "{m}");
    }
}
