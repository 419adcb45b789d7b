//! Tower framework against a brute-force torsion oracle on random `F[x]`-modules.

use krcore::gflin::F2Matrix;
use krcore::towers::XModule;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const LO: i32 = -3;
const HI: i32 = 3;
const J: (i32, i32) = (-5, 5);

/// Multiplication by `x^h` from degree `e` as a matrix, built from the module description.
fn x_power(m: &XModule, e: i32, h: u32) -> F2Matrix {
    let src = m.basis(e);
    let tgt = m.basis(e + h as i32 * m.d);
    let mut out = F2Matrix::zeros(tgt.len(), src.len());
    for (j, b) in src.iter().enumerate() {
        let mut cur = Some(b.clone());
        for _ in 0..h {
            cur = cur.and_then(|c| m.times_x(&c));
        }
        if let Some(c) = cur {
            out.set(tgt.iter().position(|t| *t == c).expect("basis"), j, true);
        }
    }
    out
}

/// Detection of height `h` at level `n`: `x^h` kills the `x`-torsion of `M` in
/// every source degree `j - (n+h)d`.
fn oracle(m: &XModule, h: u32, n: i32) -> bool {
    let big = m.torsion_height() + 1;
    (J.0..=J.1).all(|j| {
        let src = j - (n + h as i32) * m.d;
        let gamma = x_power(m, src, big).kernel_basis();
        let xh = x_power(m, src, h);
        gamma.rows().iter().all(|v| xh.apply(v).is_zero())
    })
}

fn instances(seed: u64, count: usize) -> Vec<XModule> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count).map(|_| XModule::random(&mut rng)).collect()
}

#[test]
fn detection_matches_torsion_oracle() {
    for m in instances(7, 120) {
        let t = m.tower(LO, HI, J.0, J.1).unwrap();
        assert!(t.validate().is_ok(), "{m:?}");
        for h in 1..=2u32 {
            for n in LO..=HI - h as i32 {
                let d = t.detect(h, n).unwrap();
                assert_eq!(d.holds, oracle(&m, h, n), "{m:?} h={h} n={n}");
                assert!(d.consistent(), "{m:?} h={h} n={n}: {d:?}");
            }
        }
    }
}

#[test]
fn chain_complex_computes_image_quotients() {
    for m in instances(11, 60) {
        let t = m.tower(LO, HI, J.0, J.1).unwrap();
        for n in LO + 1..=HI - 2 {
            let cc = t.chain_complex_at(n).unwrap();
            assert!(cc.certified(), "{m:?} level {n}: {cc:?}");
            assert_eq!(
                cc.c_bar_injective,
                t.detect(2, n - 1).unwrap().holds,
                "{m:?} level {n}"
            );
            if t.detect(2, n).unwrap().holds {
                assert!(cc.right_via_iota.is_some());
            }
        }
    }
}

#[test]
fn three_towers_add_heights() {
    // B = ⊕ F[x]/x² ⊕ F[x], A = x·B, C = B/A: A and C detect at height 1, B at 2.
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..30 {
        let d = rng.gen_range(1..=2);
        let count = rng.gen_range(1..=3);
        let gens: Vec<(i32, bool)> = (0..count)
            .map(|_| (rng.gen_range(-2..=2), rng.gen_bool(0.6)))
            .collect();
        let b = XModule {
            d,
            torsion: gens.iter().filter(|g| g.1).map(|g| (g.0, 2)).collect(),
            free: gens.iter().filter(|g| !g.1).map(|g| g.0).collect(),
        };
        let a = XModule {
            d,
            torsion: gens.iter().filter(|g| g.1).map(|g| (g.0 + d, 1)).collect(),
            free: gens.iter().filter(|g| !g.1).map(|g| g.0 + d).collect(),
        };
        let c = XModule {
            d,
            torsion: gens.iter().map(|g| (g.0, 1)).collect(),
            free: vec![],
        };
        let detects = |m: &XModule, h: u32| {
            let t = m.tower(LO, HI, J.0, J.1).unwrap();
            (LO..=HI - h as i32).all(|n| t.detect(h, n).unwrap().holds)
        };
        assert!(detects(&a, 1) && detects(&c, 1));
        assert!(detects(&b, 2), "{b:?}");
    }
}

#[test]
fn mixed_heights_example() {
    let m = XModule {
        d: 1,
        torsion: vec![(0, 2), (0, 1)],
        free: vec![],
    };
    let t = m.tower(LO, HI, J.0, J.1).unwrap();
    assert!(!t.detect(1, 0).unwrap().holds);
    assert!(t.detect(2, 0).unwrap().holds);
    let cc = t.chain_complex_at(0).unwrap();
    assert!(cc.certified());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn height_one_implies_height_two(seed in any::<u64>()) {
        let m = instances(seed, 1).pop().unwrap();
        let t = m.tower(LO, HI, J.0, J.1).unwrap();
        for n in LO..=HI - 2 {
            if t.detect(1, n).unwrap().holds {
                prop_assert!(t.detect(2, n).unwrap().holds);
            }
        }
    }

    #[test]
    fn iota_injective_and_f1_is_image_of_theta(seed in any::<u64>()) {
        let m = instances(seed, 1).pop().unwrap();
        let t = m.tower(LO, HI, J.0, J.1).unwrap();
        for n in LO + 1..=HI - 1 {
            prop_assert!(t.iota(n).unwrap().injective);
            prop_assert!(t.f1_matches_theta(n).unwrap());
        }
    }
}
