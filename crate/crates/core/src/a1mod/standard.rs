//! The standard modules: A(1) itself, the trivial module, projective-space
//! cohomology and its stunted relatives, and elementary abelian 2-groups.

use super::{full_line, interval, A1Module};
use crate::gflin::BitVec;
use crate::grmod::UNBOUNDED;

/// Basis of A(1) as words in Sq1, Sq2 with their degrees; each word is the
/// sequence of operations applied to the unit, first entry first.
pub const A1_WORDS: [(&str, &[u8], i32); 8] = [
    ("1", &[], 0),
    ("Sq1", &[1], 1),
    ("Sq2", &[2], 2),
    ("Sq1Sq2", &[2, 1], 3),
    ("Sq2Sq1", &[1, 2], 3),
    ("Sq2Sq2", &[2, 2], 4),
    ("Sq2Sq1Sq2", &[2, 1, 2], 5),
    ("Sq2Sq2Sq2", &[2, 2, 2], 6),
];

/// Left multiplication by Sq1 and Sq2 on the word basis (`None` = 0).
pub const A1_BASIS: [(Option<usize>, Option<usize>); 8] = [
    (Some(1), Some(2)),
    (None, Some(4)),
    (Some(3), Some(5)),
    (None, Some(6)),
    (Some(5), None),
    (None, Some(7)),
    (Some(7), None),
    (None, None),
];

/// `C(n, k) mod 2` for `k ∈ {1, 2}` and any integer `n`.
pub fn binomial_mod2(n: i64, k: u32) -> bool {
    match k {
        0 => true,
        1 => n.rem_euclid(2) == 1,
        2 => (n * (n - 1) / 2).rem_euclid(2) == 1,
        _ => panic!("only k ≤ 2 is needed"),
    }
}

/// Free modules `⊕ Σ^{g} A(1)` on labelled generators; names are `word.label`.
pub fn free_a1(name: &str, gens: &[(String, i32)]) -> A1Module {
    let mut names = Vec::new();
    for (label, g) in gens {
        for (w, _, d) in A1_WORDS {
            names.push((g + d, format!("{w}.{label}")));
        }
    }
    let act = |which: u8, id: usize| -> Vec<usize> {
        let (gen, w) = (id / 8, id % 8);
        let t = if which == 1 {
            A1_BASIS[w].0
        } else {
            A1_BASIS[w].1
        };
        t.map(|t| gen * 8 + t).into_iter().collect()
    };
    A1Module::from_ids(name, full_line(), names, &|i| act(1, i), &|i| act(2, i))
        .expect("free module is valid")
}

/// A(1) acting on itself, basis named by words.
pub fn std_a1() -> A1Module {
    let names = A1_WORDS
        .iter()
        .map(|(w, _, d)| (*d, w.to_string()))
        .collect();
    let act = |which: u8, w: usize| -> Vec<usize> {
        let t = if which == 1 {
            A1_BASIS[w].0
        } else {
            A1_BASIS[w].1
        };
        t.into_iter().collect()
    };
    A1Module::from_ids("A1", full_line(), names, &|i| act(1, i), &|i| act(2, i))
        .expect("A(1) is valid")
}

/// The trivial module in degree 0.
pub fn std_trivial() -> A1Module {
    A1Module::from_tables("F", full_line(), &[("1", 0)], &[], &[]).expect("valid")
}

/// `Λ(Sq1)`: classes in degrees 0 and 1 joined by Sq1, Sq2 acting trivially.
pub fn std_lambda0() -> A1Module {
    A1Module::from_tables(
        "Lambda0",
        full_line(),
        &[("1", 0), ("Sq1", 1)],
        &[("1", &["Sq1"])],
        &[],
    )
    .expect("valid")
}

/// Monomials `x^n`, `lo ≤ n ≤ top`, with the projective-space action
/// `Sq1 x^n = n x^{n+1}`, `Sq2 x^n = C(n,2) x^{n+2}`.
fn power_series(name: &str, lo: i32, top: i32) -> A1Module {
    let names: Vec<(i32, String)> = (lo..=top).map(|n| (n, format!("x^{n}"))).collect();
    let act = |k: u32, id: usize| -> Vec<usize> {
        let n = lo + id as i32;
        let t = n + k as i32;
        if t <= top && binomial_mod2(n as i64, k) {
            vec![id + k as usize]
        } else {
            vec![]
        }
    };
    A1Module::from_ids(
        name,
        interval(-UNBOUNDED, top),
        names,
        &|i| act(1, i),
        &|i| act(2, i),
    )
    .expect("projective-space action is valid")
}

/// Cohomology of infinite real projective space, truncated above `top`.
pub fn std_p(top: i32) -> A1Module {
    power_series("P", 1, top)
}

/// The stunted modules `P_n` truncated above `top`, with `P_{n+4} = Σ^8 P_n`.
pub fn std_pn(n: i32, top: i32) -> A1Module {
    let q = n.div_euclid(4);
    let r = n.rem_euclid(4);
    let t = top - 8 * q;
    let base = match r {
        0 => power_series("P0", -1, t),
        1 => power_series("P1", 1, t),
        2 => p2(t),
        _ => p3(t),
    };
    if q == 0 {
        base.with_name(format!("P{n}"))
    } else {
        base.shift(8 * q).with_name(format!("P{n}"))
    }
}

/// Builds a module from a low-degree table followed by `x^n` for `n ≥ tail`
/// with the projective-space action.
fn with_tail(
    name: &str,
    top: i32,
    low: &[(&str, i32)],
    sq1: &[(&str, &str)],
    sq2: &[(&str, &str)],
    tail: i32,
) -> A1Module {
    let mut gens: Vec<(String, i32)> = low
        .iter()
        .filter(|(_, d)| *d <= top)
        .map(|(n, d)| (n.to_string(), *d))
        .collect();
    for n in tail..=top {
        gens.push((format!("x^{n}"), n));
    }
    let mut s1: Vec<(String, Vec<String>)> = Vec::new();
    let mut s2: Vec<(String, Vec<String>)> = Vec::new();
    let present = |nm: &str| gens.iter().any(|(g, _)| g == nm);
    for (a, b) in sq1 {
        if present(a) && present(b) {
            s1.push((a.to_string(), vec![b.to_string()]));
        }
    }
    for (a, b) in sq2 {
        if present(a) && present(b) {
            s2.push((a.to_string(), vec![b.to_string()]));
        }
    }
    for n in tail..=top {
        if n < top && binomial_mod2(n as i64, 1) {
            s1.push((format!("x^{n}"), vec![format!("x^{}", n + 1)]));
        }
        if n + 2 <= top && binomial_mod2(n as i64, 2) {
            s2.push((format!("x^{n}"), vec![format!("x^{}", n + 2)]));
        }
    }
    let g: Vec<(&str, i32)> = gens.iter().map(|(n, d)| (n.as_str(), *d)).collect();
    let t1: Vec<(&str, Vec<&str>)> = s1
        .iter()
        .map(|(a, b)| (a.as_str(), b.iter().map(|s| s.as_str()).collect()))
        .collect();
    let t2: Vec<(&str, Vec<&str>)> = s2
        .iter()
        .map(|(a, b)| (a.as_str(), b.iter().map(|s| s.as_str()).collect()))
        .collect();
    let t1r: Vec<(&str, &[&str])> = t1.iter().map(|(a, b)| (*a, b.as_slice())).collect();
    let t2r: Vec<(&str, &[&str])> = t2.iter().map(|(a, b)| (*a, b.as_slice())).collect();
    A1Module::from_tables(name, interval(-UNBOUNDED, top), &g, &t1r, &t2r)
        .expect("table is a valid module")
}

fn p2(top: i32) -> A1Module {
    with_tail(
        "P2",
        top,
        &[
            ("y2", 2),
            ("y3", 3),
            ("x^3", 3),
            ("x^4", 4),
            ("y5", 5),
            ("y6", 6),
        ],
        &[("y2", "y3"), ("x^3", "x^4"), ("y5", "y6")],
        &[("y2", "x^4"), ("y3", "y5"), ("x^4", "y6"), ("x^3", "x^5")],
        5,
    )
}

fn p3(top: i32) -> A1Module {
    with_tail(
        "P3",
        top,
        &[("y3", 3), ("y4", 4), ("x^5", 5), ("y6", 6), ("y7", 7)],
        &[("y3", "y4"), ("x^5", "x^6"), ("y6", "y7")],
        &[("y3", "x^5"), ("y4", "y6"), ("x^5", "y7")],
        6,
    )
}

/// Reduced cohomology of an elementary abelian 2-group of rank `n`,
/// `⊕_{∅≠S⊆{1..n}} P^{⊗S}`, truncated above `top`.
pub fn std_bv(n: u32, top: i32) -> A1Module {
    assert!((1..=6).contains(&n), "rank must be between 1 and 6");
    let p = std_p(top);
    let mut parts: Vec<(String, A1Module)> = Vec::new();
    for mask in 1u32..(1 << n) {
        let mut m: Option<A1Module> = None;
        for _ in 0..mask.count_ones() {
            m = Some(match m {
                None => p.clone(),
                Some(acc) => {
                    A1Module::tensor_upto(&acc, &p, Some(top)).expect("tensor of valid modules")
                }
            });
        }
        let label: String = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| char::from(b'1' + i as u8))
            .collect();
        parts.push((format!("b{label}"), m.expect("nonempty subset")));
    }
    let refs: Vec<(&str, &A1Module)> = parts.iter().map(|(l, m)| (l.as_str(), m)).collect();
    A1Module::direct_sum(&format!("BV{n}"), &refs).expect("direct sum of valid modules")
}

/// Coordinates of a named element, for tests and examples.
pub fn element(m: &A1Module, name: &str) -> Option<(i32, BitVec)> {
    let (d, i) = *m.space().lookup().get(name)?;
    Some((d.m, BitVec::unit(m.dim(d.m), i)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::a1mod::Margolis;

    #[test]
    fn a1_words_match_actions() {
        let a = std_a1();
        for (w, ops, d) in A1_WORDS {
            let (e, v) = a.apply_ops(ops, 0, &BitVec::unit(1, 0));
            assert_eq!(e, d);
            let (_, expect) = element(&a, w).unwrap();
            assert_eq!(v, expect, "word {w}");
        }
    }

    #[test]
    fn binomials() {
        assert!(binomial_mod2(-1, 2));
        assert!(binomial_mod2(-1, 1));
        assert!(!binomial_mod2(0, 2));
        assert!(binomial_mod2(3, 2));
        assert!(!binomial_mod2(4, 2));
        assert!(binomial_mod2(6, 2));
    }

    #[test]
    fn stunted_dimensions() {
        let p2 = std_pn(2, 12);
        let d: Vec<usize> = (2..=8).map(|m| p2.dim(m)).collect();
        assert_eq!(d, vec![1, 2, 1, 2, 2, 1, 1]);
        let p3 = std_pn(3, 12);
        let d: Vec<usize> = (3..=8).map(|m| p3.dim(m)).collect();
        assert_eq!(d, vec![1, 1, 1, 2, 2, 1]);
        let p0 = std_pn(0, 6);
        assert_eq!(p0.bottom(), Some(-1));
        let p5 = std_pn(5, 20);
        assert_eq!(p5.bottom(), Some(9));
    }

    #[test]
    fn stunted_modules_are_reduced_and_q0_acyclic() {
        for n in 0..4 {
            let m = std_pn(n, 30);
            assert!(m.is_reduced(), "P{n}");
            assert_eq!(m.margolis(Margolis::Q0).total(), 0, "P{n}");
        }
    }

    #[test]
    fn bv_dimensions() {
        // (1 + t/(1-t))^2 - 1 = 2t/(1-t) + t^2/(1-t)^2
        let bv = std_bv(2, 10);
        for m in 1..=10 {
            assert_eq!(bv.dim(m), 2 + (m as usize - 1), "degree {m}");
        }
    }
}
