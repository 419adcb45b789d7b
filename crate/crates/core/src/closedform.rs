//! Closed-form bigraded modules: `HP = {1, x⁴} ⊗ F[a, v, σ^{±4}]/(a³, av)`
//! and the formulas built from it for `H01(R P_n)`, the non-free part of
//! the cohomology of elementary abelian 2-groups, and the Borel variant.
//!
//! Degrees: `|x⁴| = (4,0)`, `|a| = (0,1)`, `|v| = (1,1)`, `|σ^{-4}| = (-4,4)`.
//! `σ^{-4}` is invertible, so `HP` is periodic under `(-4,4)`.

use std::fmt;

use crate::gflin::F2Matrix;
use crate::grmod::{bd, BiDegree, DimTable, GradedMap, GradedSpace, Window};

/// The monomial `x^{4ε} a^i v^l σ^{-4j}` with `i·l = 0`, `i ≤ 2`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HpMono {
    pub eps: u8,
    pub i: u8,
    pub l: u32,
    pub j: i32,
}

impl HpMono {
    pub fn degree(self) -> BiDegree {
        let (e, i, l) = (self.eps as i32, self.i as i32, self.l as i32);
        bd(4 * e + l - 4 * self.j, i + l + 4 * self.j)
    }

    /// Multiplication by `a`: zero on `v`-divisible monomials and on `a²`.
    pub fn times_a(self) -> Option<HpMono> {
        (self.l == 0 && self.i < 2).then(|| HpMono {
            i: self.i + 1,
            ..self
        })
    }

    pub fn times_sigma4(self) -> HpMono {
        HpMono {
            j: self.j + 1,
            ..self
        }
    }
}

impl fmt::Display for HpMono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        if self.eps == 1 {
            s.push_str("x^4");
        }
        match self.i {
            0 => {}
            1 => s.push('a'),
            i => s.push_str(&format!("a^{i}")),
        }
        match self.l {
            0 => {}
            1 => s.push('v'),
            l => s.push_str(&format!("v^{l}")),
        }
        if self.j != 0 {
            s.push_str(&format!("s^{}", -4 * self.j));
        }
        if s.is_empty() {
            s.push('1');
        }
        write!(f, "{s}")
    }
}

/// Monomials of `HP` in degree `d`, from `4ε + 2l + i = m + k`.
pub fn hp_monomials(d: BiDegree) -> Vec<HpMono> {
    let total = d.m + d.k;
    let mut out = Vec::new();
    for eps in 0..=1u8 {
        let s = total - 4 * eps as i32;
        if s < 0 {
            continue;
        }
        let mut shapes: Vec<(u8, u32)> = Vec::new();
        if s % 2 == 0 {
            shapes.push((0, (s / 2) as u32));
        }
        if s == 1 || s == 2 {
            shapes.push((s as u8, 0));
        }
        for (i, l) in shapes {
            let r = d.k - i as i32 - l as i32;
            if r.rem_euclid(4) == 0 {
                out.push(HpMono {
                    eps,
                    i,
                    l,
                    j: r / 4,
                });
            }
        }
    }
    out.sort();
    out
}

pub fn hp_dim(d: BiDegree) -> usize {
    hp_monomials(d).len()
}

/// `HP` materialised on a window, names from the monomials.
pub fn hp_space(w: Window) -> GradedSpace {
    let gens = w
        .degrees()
        .into_iter()
        .flat_map(|d| hp_monomials(d).into_iter().map(move |x| (d, x.to_string())));
    GradedSpace::new(w, gens).expect("monomial names are distinct")
}

/// The action of `a` on `HP` restricted to `w`.
pub fn hp_a_action(w: Window) -> GradedMap {
    let sp = hp_space(w);
    let mut blocks = std::collections::BTreeMap::new();
    for d in sp.degrees() {
        let t = d + bd(0, 1);
        if !w.contains(t) {
            continue;
        }
        let mut b = F2Matrix::zeros(sp.dim(t), sp.dim(d));
        for (j, x) in hp_monomials(d).into_iter().enumerate() {
            if let Some(y) = x.times_a() {
                let i = sp
                    .index_of(t, &y.to_string())
                    .expect("target monomial present");
                b.set(i, j, true);
            }
        }
        blocks.insert(d, b);
    }
    GradedMap::from_blocks(bd(0, 1), blocks)
}

/// `C(n, k)`.
pub fn binomial(n: u32, k: u32) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) as usize / (i + 1) as usize)
}

/// `H01(R P_n)`: `(Σ^{-n(1,1)} HP)` in twists `≥ 0` plus
/// `(Σ^{-n(1,1)-(1,0)} HP)` in twists `≤ -2`.
pub fn h01_pn_dim(n: i32, d: BiDegree) -> usize {
    match d.k {
        k if k >= 0 => hp_dim(d + bd(n, n)),
        -1 => 0,
        _ => hp_dim(d + bd(n + 1, n)),
    }
}

/// Monomials of `HP` representing `H01(R P_n)` at `d`.
pub fn h01_pn_monomials(n: i32, d: BiDegree) -> Vec<HpMono> {
    match d.k {
        k if k >= 0 => hp_monomials(d + bd(n, n)),
        -1 => Vec::new(),
        _ => hp_monomials(d + bd(n + 1, n)),
    }
}

pub fn h01_pn_closed(n: i32, w: Window) -> GradedSpace {
    let gens = w.degrees().into_iter().flat_map(|d| {
        h01_pn_monomials(n, d)
            .into_iter()
            .map(move |x| (d, format!("P{n}:{x}")))
    });
    GradedSpace::new(w, gens).expect("distinct names")
}

/// `H01` of the Borel theory of a rank-`n` group: `⊕_i C(n,i) Σ^{-i(1,1)} HP`.
pub fn borel_hv_dim(n: u32, d: BiDegree) -> usize {
    (1..=n)
        .map(|i| binomial(n, i) * hp_dim(d + bd(i as i32, i as i32)))
        .sum()
}

pub fn borel_hv_closed(n: u32, w: Window) -> GradedSpace {
    let mut gens = Vec::new();
    for d in w.degrees() {
        for i in 1..=n {
            for c in 0..binomial(n, i) {
                for x in hp_monomials(d + bd(i as i32, i as i32)) {
                    gens.push((d, format!("i{i}c{c}:{x}")));
                }
            }
        }
    }
    GradedSpace::new(w, gens).expect("distinct names")
}

/// The action of `a` on the Borel closed form, summand by summand.
pub fn borel_hv_a_action(n: u32, w: Window) -> GradedMap {
    let sp = borel_hv_closed(n, w);
    let mut blocks = std::collections::BTreeMap::new();
    for d in sp.degrees() {
        let t = d + bd(0, 1);
        if !w.contains(t) {
            continue;
        }
        let mut b = F2Matrix::zeros(sp.dim(t), sp.dim(d));
        for (j, name) in sp.names(d).iter().enumerate() {
            let (tag, mono) = name.split_once(':').expect("tagged");
            let i: i32 = tag[1..tag.find('c').expect("tag")].parse().expect("tag");
            let x = hp_monomials(d + bd(i, i))
                .into_iter()
                .find(|x| x.to_string() == mono)
                .expect("monomial");
            if let Some(y) = x.times_a() {
                let r = sp
                    .index_of(t, &format!("{tag}:{y}"))
                    .expect("target present");
                b.set(r, j, true);
            }
        }
        blocks.insert(d, b);
    }
    GradedMap::from_blocks(bd(0, 1), blocks)
}

/// Non-free part of `H01(R BV_n)`: `⊕_i C(n,i) H01(R P_i)`.
pub fn hv_dim(n: u32, d: BiDegree) -> usize {
    (1..=n)
        .map(|i| binomial(n, i) * h01_pn_dim(i as i32, d))
        .sum()
}

pub fn hv_closed(n: u32, w: Window) -> GradedSpace {
    let mut gens = Vec::new();
    for d in w.degrees() {
        for i in 1..=n {
            for c in 0..binomial(n, i) {
                for x in h01_pn_monomials(i as i32, d) {
                    gens.push((d, format!("i{i}c{c}:{x}")));
                }
            }
        }
    }
    GradedSpace::new(w, gens).expect("distinct names")
}

/// Dimension table of a closed-form function on `w`.
pub fn dim_table(w: Window, f: impl Fn(BiDegree) -> usize) -> DimTable {
    DimTable::new(
        w,
        w.degrees()
            .into_iter()
            .map(|d| (d, f(d)))
            .collect::<Vec<_>>(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::a1mod::{std_pn, Margolis};

    /// Brute-force enumeration over a box of exponents.
    fn oracle_dim(d: BiDegree) -> usize {
        let mut n = 0;
        for eps in 0..=1 {
            for i in 0..=2 {
                for l in 0..=60 {
                    if i * l != 0 {
                        continue;
                    }
                    for j in -30..=30 {
                        if bd(4 * eps + l - 4 * j, i + l + 4 * j) == d {
                            n += 1;
                        }
                    }
                }
            }
        }
        n
    }

    #[test]
    fn hp_dims_match_enumeration() {
        for d in Window::new(-20, 20, -10, 10).degrees() {
            assert_eq!(hp_dim(d), oracle_dim(d), "{d}");
        }
        assert_eq!(hp_dim(bd(0, 0)), 1);
        assert_eq!(hp_dim(bd(4, 1)), 1);
        assert_eq!(hp_dim(bd(8, 0)), 1);
        assert_eq!(hp_monomials(bd(8, 0))[0].to_string(), "v^4s^4");
        assert_eq!(hp_monomials(bd(4, 1))[0].to_string(), "x^4a");
    }

    #[test]
    fn hp_is_sigma4_periodic() {
        for d in Window::new(-12, 12, -6, 6).degrees() {
            let shifted: Vec<HpMono> = hp_monomials(d)
                .into_iter()
                .map(HpMono::times_sigma4)
                .collect();
            assert_eq!(shifted, hp_monomials(d + bd(-4, 4)));
        }
    }

    #[test]
    fn truncations_do_not_overlap() {
        for d in Window::new(-12, 12, -6, 6).degrees() {
            if d.k == -1 {
                assert_eq!(h01_pn_dim(0, d), 0);
            }
        }
    }

    #[test]
    fn twist_zero_slice_of_p0_is_the_socle() {
        let p0 = std_pn(0, 40);
        let (soc, region) = p0.socle();
        for m in -1..=30 {
            if region.contains(bd(m, 0)) {
                assert_eq!(h01_pn_dim(0, bd(m, 0)), soc.dim(bd(m, 0)), "degree {m}");
            }
        }
        assert_eq!(p0.margolis(Margolis::Q0).total(), 0);
    }

    #[test]
    fn a_action_model() {
        let w = Window::new(-8, 8, -4, 4);
        let a = hp_a_action(w);
        let sp = hp_space(w);
        let d = bd(0, 0);
        assert_eq!(a.block_or_zero(d, &sp, &sp).rank(), 1);
        // a^2 is killed by a
        let d2 = bd(0, 2);
        assert_eq!(a.block_or_zero(d2, &sp, &sp).rank(), 0);
    }

    #[test]
    fn hv_sums() {
        let w = Window::new(-6, 6, -3, 3);
        for d in w.degrees() {
            assert_eq!(hv_dim(1, d), h01_pn_dim(1, d));
            assert_eq!(hv_dim(2, d), 2 * h01_pn_dim(1, d) + h01_pn_dim(2, d));
            assert_eq!(hv_closed(2, w).dim(d), hv_dim(2, d));
            assert_eq!(borel_hv_closed(2, w).dim(d), borel_hv_dim(2, d));
        }
        assert_eq!(borel_hv_dim(1, bd(-1, -1)), 1);
    }
}
