//! The functor `R` from A(1)-modules to E-modules over the coefficient ring:
//! `R(M) = H ⊗ M` with
//! `q0(h⊗x) = Q0h⊗x + h⊗Sq1x` and
//! `q1(h⊗x) = Q1h⊗x + aQ0h⊗Sq1x + ah⊗Sq2x + σ⁻¹h⊗Q1x`.

use std::collections::{BTreeMap, HashMap};

use crate::a1mod::{z, A1Module};
use crate::coeff::{monomials_in, Coeff, SIGMA2};
use crate::emod::{
    check_ses, is_lambda0_split, les_h01, EModule, Homology, LesReport, A_SHIFT, Q0, S_SHIFT,
};
use crate::error::{Error, Result};
use crate::gflin::{BitVec, F2Matrix};
use crate::grmod::{bd, dual_name, BiDegree, DimTable, GradedMap, Window, UNBOUNDED};

/// Which cone of the coefficient ring a basis element lies over.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Cone {
    Plus,
    Minus,
}

/// Name of the basis element `h ⊗ x`.
pub fn r_name(h: Coeff, x: &str) -> String {
    format!("{h}@{x}")
}

/// Splits `h@x` into its coefficient and element name.
pub fn split_r_name(n: &str) -> Option<(Coeff, &str)> {
    let (h, x) = n.split_once('@')?;
    Some((Coeff::parse(h)?, x))
}

pub fn cone_of(name: &str) -> Option<Cone> {
    split_r_name(name).map(|(h, _)| {
        if h.is_positive() {
            Cone::Plus
        } else {
            Cone::Minus
        }
    })
}

/// `R(M)` on a window, remembering the A(1)-module it came from.
#[derive(Clone, Debug)]
pub struct RModule {
    pub base: A1Module,
    pub total: EModule,
}

impl RModule {
    /// The summand over one cone.
    pub fn cone_part(&self, which: Cone) -> EModule {
        let tag = if which == Cone::Plus { "+" } else { "-" };
        self.total
            .on_basis_subset(
                &format!("R{tag}({})", self.base.name()),
                &|n| cone_of(n) == Some(which),
                false,
            )
            .expect("each cone spans a submodule")
    }

    /// Checks that no operation crosses between the cones.
    pub fn check_cones(&self) -> Result<()> {
        let t = &self.total;
        let mut maps = vec![t.q0(), t.q1()];
        maps.extend(t.a_action());
        maps.extend(t.s_action());
        for map in maps {
            for (d, b) in map.blocks() {
                let src = t.space().names(d);
                let tgt = t.space().names(d + map.shift);
                for (i, t_name) in tgt.iter().enumerate() {
                    for (j, s_name) in src.iter().enumerate() {
                        if b.get(i, j) && cone_of(s_name) != cone_of(t_name) {
                            return Err(Error::Relation(format!(
                                "{s_name} -> {t_name} crosses cones"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Region where `R(M)` on `w` agrees with the untruncated module.
pub fn r_exact(m: &A1Module, w: Window) -> Window {
    let e = m.exact();
    let hi = if e.m_hi >= UNBOUNDED {
        w.m_hi
    } else {
        w.m_hi.min(e.m_hi - 3 - w.k_hi.max(0))
    };
    let lo = if e.m_lo <= -UNBOUNDED {
        w.m_lo
    } else {
        w.m_lo.max(e.m_lo + 3 - w.k_lo.min(0))
    };
    Window::new(lo, hi, w.k_lo, w.k_hi)
}

/// `R(M)` restricted to the window `w`, with the actions of `a` and `σ^{-1}`.
pub fn apply_r(m: &A1Module, w: Window) -> Result<RModule> {
    let space = m.space();
    let basis: Vec<(i32, usize)> = space
        .degrees()
        .flat_map(|d| (0..space.dim(d)).map(move |j| (d.m, j)))
        .collect();
    let gidx: HashMap<(i32, usize), usize> =
        basis.iter().enumerate().map(|(i, x)| (*x, i)).collect();
    let img = |map: &GradedMap, (deg, j): (i32, usize)| -> Vec<usize> {
        let t = deg + map.shift.m;
        map.apply(z(deg), &BitVec::unit(m.dim(deg), j), m.dim(t))
            .ones()
            .map(|r| gidx[&(t, r)])
            .collect()
    };
    let q1m = m.q1();
    let acts: Vec<[Vec<usize>; 3]> = basis
        .iter()
        .map(|&x| [img(m.sq1(), x), img(m.sq2(), x), img(&q1m, x)])
        .collect();
    let mut gens = Vec::new();
    let mut pairs = Vec::new();
    let mut id_of: HashMap<(Coeff, usize), usize> = HashMap::new();
    for (xi, &(deg, j)) in basis.iter().enumerate() {
        let xname = &space.names(z(deg))[j];
        for h in monomials_in(w.shift(bd(-deg, 0))) {
            id_of.insert((h, xi), gens.len());
            pairs.push((h, xi));
            gens.push((h.degree() + z(deg), r_name(h, xname)));
        }
    }
    let find = |h: Option<Coeff>, xs: &[usize]| -> Vec<usize> {
        h.map_or_else(Vec::new, |h| {
            xs.iter()
                .filter_map(|&x| id_of.get(&(h, x)).copied())
                .collect()
        })
    };
    let q0 = |id: usize| -> Vec<usize> {
        let (h, xi) = pairs[id];
        let mut out = find(h.q0(), &[xi]);
        out.extend(find(Some(h), &acts[xi][0]));
        out
    };
    let q1 = |id: usize| -> Vec<usize> {
        let (h, xi) = pairs[id];
        let mut out = find(h.q1(), &[xi]);
        out.extend(find(h.q0().and_then(Coeff::times_a), &acts[xi][0]));
        out.extend(find(h.times_a(), &acts[xi][1]));
        out.extend(find(h.times_sigma_inv(), &acts[xi][2]));
        out
    };
    let a = |id: usize| -> Vec<usize> {
        let (h, xi) = pairs[id];
        find(h.times_a(), &[xi])
    };
    let s = |id: usize| -> Vec<usize> {
        let (h, xi) = pairs[id];
        find(h.times_sigma_inv(), &[xi])
    };
    let total = EModule::from_ids(
        &format!("R({})", m.name()),
        w,
        r_exact(m, w),
        gens,
        &q0,
        &q1,
        Some(&a),
        Some(&s),
    )?;
    debug_assert_eq!(total.a_action().map(|x| x.shift), Some(A_SHIFT));
    debug_assert_eq!(total.s_action().map(|x| x.shift), Some(S_SHIFT));
    let r = RModule {
        base: m.clone(),
        total,
    };
    r.check_cones()?;
    Ok(r)
}

/// `R(f)` for an A(1)-linear map `f: M → N`, as `h@x ↦ Σ h@y`.
pub fn apply_r_map(f: &GradedMap, src: &RModule, tgt: &RModule) -> Result<GradedMap> {
    let (ms, mt) = (&src.base, &tgt.base);
    let shift = f.shift;
    let ts = tgt.total.space();
    let mut blocks: BTreeMap<BiDegree, F2Matrix> = BTreeMap::new();
    for (d, name) in src.total.space().iter() {
        let (h, x) = split_r_name(name)
            .ok_or_else(|| Error::Invalid(format!("not an R-basis name: {name}")))?;
        let (xd, xj) = *ms
            .space()
            .lookup()
            .get(x)
            .ok_or_else(|| Error::Invalid(format!("unknown element {x}")))?;
        let e = d + shift;
        let img = f.apply(
            xd,
            &BitVec::unit(ms.space().dim(xd), xj),
            mt.space().dim(xd + shift),
        );
        let j = src.total.space().index_of(d, name).expect("present");
        for r in img.ones() {
            let yname = &mt.space().names(xd + shift)[r];
            if let Some(i) = ts.index_of(e, &r_name(h, yname)) {
                blocks
                    .entry(d)
                    .or_insert_with(|| F2Matrix::zeros(ts.dim(e), src.total.dim(d)))
                    .flip(i, j);
            }
        }
    }
    Ok(GradedMap::from_blocks(shift, blocks))
}

/// `R⁺M / aR⁺M`: drops the basis lines divisible by `a`.
pub fn mod_a(plus: &EModule) -> Result<EModule> {
    let keep = |n: &str| matches!(split_r_name(n), Some((Coeff::Pos { j: 0, .. }, _)));
    let q = plus
        .on_basis_subset(&format!("{}/a", plus.name()), &keep, true)?
        .without_a();
    let mut exact = q.exact();
    exact.k_lo = crate::grmod::shift_end(exact.k_lo, 1);
    Ok(q.with_exact(exact))
}

/// Result of comparing `R(M^∨)` with `Σ^{(2,-2)}(R M)^∨` through the
/// basis bijection `h@~x ↔ ~(w(h)@x)`.
#[derive(Clone, Debug)]
pub struct PsiReport {
    pub region: Window,
    pub degrees_checked: usize,
    pub failures: Vec<String>,
}

impl PsiReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty() && self.degrees_checked > 0
    }
}

pub fn psi_duality(m: &A1Module, w: Window) -> Result<PsiReport> {
    let lhs = apply_r(&m.dual(), w)?.total;
    let wr = w.negate().shift(SIGMA2);
    let rhs = apply_r(m, wr)?.total.dual().shift(SIGMA2);
    let region = lhs.exact().intersect(&rhs.exact());
    let psi = |n: &str| -> Option<String> {
        let (h, y) = split_r_name(n)?;
        Some(dual_name(&r_name(h.dual(), &dual_name(y))))
    };
    let mut failures = Vec::new();
    let mut checked = 0;
    let mut degs: Vec<BiDegree> = lhs
        .space()
        .degrees()
        .chain(rhs.space().degrees())
        .filter(|d| region.contains(*d))
        .collect();
    degs.sort();
    degs.dedup();
    let mut perms: BTreeMap<BiDegree, Vec<usize>> = BTreeMap::new();
    for &d in &degs {
        checked += 1;
        let (ln, rn) = (lhs.space().names(d), rhs.space().names(d));
        if ln.len() != rn.len() {
            failures.push(format!(
                "dimensions differ at {d}: {} vs {}",
                ln.len(),
                rn.len()
            ));
            continue;
        }
        let p: Option<Vec<usize>> = ln
            .iter()
            .map(|n| psi(n).and_then(|t| rhs.space().index_of(d, &t)))
            .collect();
        match p {
            Some(p) => {
                perms.insert(d, p);
            }
            None => failures.push(format!("basis names do not correspond at {d}")),
        }
    }
    for (&d, p) in &perms {
        for (ql, qr, tag) in [(lhs.q0(), rhs.q0(), "q0"), (lhs.q1(), rhs.q1(), "q1")] {
            let t = d + ql.shift;
            let Some(pt) = perms.get(&t) else {
                if region.contains(t) && (lhs.dim(t) > 0 || rhs.dim(t) > 0) {
                    failures.push(format!("{tag} target {t} unmatched"));
                }
                continue;
            };
            let bl = lhs.block(ql, d);
            let br = rhs.block(qr, d);
            let conj = F2Matrix::from_fn(bl.nrows(), bl.ncols(), |i, j| br.get(pt[i], p[j]));
            if conj != bl {
                failures.push(format!("{tag} does not commute with the bijection at {d}"));
            }
        }
    }
    Ok(PsiReport {
        region,
        degrees_checked: checked,
        failures,
    })
}

/// The first Bockstein differential for multiplication by `a`, acting on
/// `H01(R⁺M / a)` with degree `(2,0)`.
#[derive(Clone, Debug)]
pub struct BocksteinD1 {
    pub quotient: EModule,
    pub homology: Homology,
    pub d1: GradedMap,
    /// Where both source and target of `d1` are known.
    pub region: Window,
}

pub const D1_SHIFT: BiDegree = bd(2, 0);

impl BocksteinD1 {
    /// Dimensions of `Ker d1` on the region.
    pub fn kernel_dims(&self) -> DimTable {
        let h = &self.homology;
        let dims = h
            .space
            .degrees()
            .filter(|d| self.region.contains(*d))
            .map(|d| {
                let b = self.d1.block_or_zero(d, &h.space, &h.space);
                (d, h.dim(d) - b.rank())
            });
        DimTable::new(self.region, dims.collect::<Vec<_>>())
    }

    /// `d1 ∘ d1 = 0` wherever both steps are known.
    pub fn squares_to_zero(&self) -> bool {
        let h = &self.homology;
        let sq = self.d1.then(&self.d1, &h.space);
        let ok = sq
            .blocks()
            .all(|(d, b)| !self.region.contains(d + D1_SHIFT) || b.is_zero());
        ok
    }
}

pub fn bockstein_d1(m: &A1Module, w: Window) -> Result<BocksteinD1> {
    if m.margolis(crate::a1mod::Margolis::Q0).total() != 0 {
        return Err(Error::Invalid(format!("{} is not Q0-acyclic", m.name())));
    }
    let rp = apply_r(m, w)?.cone_part(Cone::Plus);
    let quotient = mod_a(&rp)?;
    let h = quotient.h01();
    let a = rp.a_action().expect("R carries the a action").clone();
    let region = h.region.intersect(&h.region.shift(-D1_SHIFT));
    let lift = |d: BiDegree, v: &BitVec| -> BitVec {
        let mut out = BitVec::zeros(rp.dim(d));
        for i in v.ones() {
            let n = &quotient.space().names(d)[i];
            out.set(
                rp.space()
                    .index_of(d, n)
                    .expect("quotient names live in R+"),
                true,
            );
        }
        out
    };
    let project = |d: BiDegree, v: &BitVec| -> BitVec {
        let names = quotient.space().names(d);
        let mut out = BitVec::zeros(names.len());
        for (i, n) in names.iter().enumerate() {
            if v.get(rp.space().index_of(d, n).expect("present")) {
                out.set(i, true);
            }
        }
        out
    };
    let mut blocks = BTreeMap::new();
    for d in h.space.degrees().filter(|d| region.contains(*d)) {
        let t = d + D1_SHIFT;
        let below = d - A_SHIFT;
        let a_below = rp.block(&a, below);
        let a_q0 = rp.block(&a, below + Q0).mul(&rp.block(rp.q0(), below));
        let mut cols = Vec::new();
        for u in h.representatives(d) {
            let mut ut = lift(d, &u);
            let q0u = rp.block(rp.q0(), d).apply(&ut);
            let wv = a_q0
                .solve(&q0u)
                .ok_or_else(|| Error::Invalid(format!("no q0-closed lift at {d}")))?;
            ut.add_assign(&a_below.apply(&wv));
            let q1u = rp.block(rp.q1(), d).apply(&ut);
            let v = rp.block(&a, t).solve(&q1u).ok_or_else(|| {
                Error::Invalid(format!("q1 of a lift at {d} is not divisible by a"))
            })?;
            let c = h
                .class_of(t, &project(t, &v))
                .ok_or_else(|| Error::Invalid(format!("Bockstein image at {t} is not a cycle")))?;
            cols.push(c);
        }
        blocks.insert(d, F2Matrix::from_cols(h.dim(t), &cols));
    }
    Ok(BocksteinD1 {
        quotient,
        homology: h,
        d1: GradedMap::from_blocks(D1_SHIFT, blocks),
        region,
    })
}

/// Checks a short exact sequence of A(1)-modules that splits over `Λ(Sq1)`.
pub fn check_a1_ses(
    a: &A1Module,
    b: &A1Module,
    c: &A1Module,
    f: &GradedMap,
    g: &GradedMap,
) -> Result<()> {
    if f.shift != BiDegree::ZERO || g.shift != BiDegree::ZERO {
        return Err(Error::Invalid(
            "maps in a short exact sequence must have degree zero".into(),
        ));
    }
    let region = a.exact().intersect(&b.exact()).intersect(&c.exact());
    let mut degs: Vec<BiDegree> = a
        .space()
        .degrees()
        .chain(b.space().degrees())
        .chain(c.space().degrees())
        .collect();
    degs.sort();
    degs.dedup();
    degs.retain(|d| region.contains(*d));
    for &d in &degs {
        for (op, i) in [(1u8, 1), (2u8, 2)] {
            let e = d + z(i);
            if !region.contains(e) {
                continue;
            }
            for (map, s, t) in [(f, a, b), (g, b, c)] {
                let lhs = t
                    .sq(op)
                    .block_or_zero(d, t.space(), t.space())
                    .mul(&map.block_or_zero(d, s.space(), t.space()));
                let rhs = map
                    .block_or_zero(e, s.space(), t.space())
                    .mul(&s.sq(op).block_or_zero(d, s.space(), s.space()));
                if lhs != rhs {
                    return Err(Error::Relation(format!(
                        "map is not A(1)-linear at degree {}",
                        d.m
                    )));
                }
            }
        }
        let fd = f.block_or_zero(d, a.space(), b.space());
        let gd = g.block_or_zero(d, b.space(), c.space());
        let (da, db, dc) = (a.space().dim(d), b.space().dim(d), c.space().dim(d));
        if fd.rank() != da || gd.rank() != dc || !gd.mul(&fd).is_zero() || da + dc != db {
            return Err(Error::NotExact(format!("at degree {}", d.m)));
        }
        if region.contains(d + z(1)) {
            let r = |m: &A1Module| m.sq1().block_or_zero(d, m.space(), m.space()).rank();
            if r(b) != r(a) + r(c) {
                return Err(Error::NotSplit(format!(
                    "ranks of Sq1 do not add up at degree {}",
                    d.m
                )));
            }
        }
    }
    Ok(())
}

/// `R` applied to a `Λ(Sq1)`-split short exact sequence, certified as an
/// `(E, Λ0)`-exact sequence, with its long exact sequence in `H01`.
#[derive(Clone, Debug)]
pub struct SecR {
    pub ra: RModule,
    pub rb: RModule,
    pub rc: RModule,
    pub les: LesReport,
}

pub fn check_sec_r(
    a: &A1Module,
    b: &A1Module,
    c: &A1Module,
    f: &GradedMap,
    g: &GradedMap,
    w: Window,
) -> Result<SecR> {
    check_a1_ses(a, b, c, f, g)?;
    let (ra, rb, rc) = (apply_r(a, w)?, apply_r(b, w)?, apply_r(c, w)?);
    let rf = apply_r_map(f, &ra, &rb)?;
    let rg = apply_r_map(g, &rb, &rc)?;
    let region = ra
        .total
        .exact()
        .intersect(&rb.total.exact())
        .intersect(&rc.total.exact());
    check_ses(&ra.total, &rb.total, &rc.total, &rf, &rg, region)?;
    if !is_lambda0_split(&ra.total, &rb.total, &rc.total, region) {
        return Err(Error::NotSplit(
            "image sequence is not split over Λ(Q0)".into(),
        ));
    }
    let les = les_h01(&ra.total, &rb.total, &rc.total, &rf, &rg)?;
    Ok(SecR { ra, rb, rc, les })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::a1mod::{std_a1, std_p, std_trivial};
    use crate::coeff::monomials_of_twist;
    use crate::emod::Q1;

    fn w(m: i32, k: i32) -> Window {
        Window::new(-m, m, -k, k)
    }

    fn classes(h: &Homology) -> Vec<(BiDegree, usize)> {
        h.dims().dims.into_iter().collect()
    }

    #[test]
    fn r_of_trivial_is_the_coefficient_ring() {
        let r = apply_r(&std_trivial(), w(6, 4)).unwrap();
        for k in -4..=4 {
            let n: usize = (-6..=6).map(|m| r.total.dim(bd(m, k))).sum();
            assert_eq!(n, monomials_of_twist(k).len(), "twist {k}");
        }
    }

    #[test]
    fn q1_on_the_generator_of_p() {
        let r = apply_r(&std_p(12), w(8, 4)).unwrap().total;
        let d = bd(1, 0);
        let i = r.space().index_of(d, "1@x^1").unwrap();
        let v = r.block(r.q1(), d).apply(&BitVec::unit(r.dim(d), i));
        let names: Vec<&String> = v.ones().map(|j| &r.space().names(d + Q1)[j]).collect();
        assert_eq!(names, vec!["s^-1@x^4"]);
    }

    #[test]
    fn h01_of_r_a1_has_two_classes() {
        let r = apply_r(&std_a1(), w(12, 6)).unwrap();
        let h = r.total.h01();
        assert_eq!(classes(&h), vec![(bd(3, -2), 1), (bd(6, 0), 1)]);
        assert_eq!(classes(&r.cone_part(Cone::Plus).h01()), vec![(bd(6, 0), 1)]);
        assert_eq!(
            classes(&r.cone_part(Cone::Minus).h01()),
            vec![(bd(3, -2), 1)]
        );
    }

    #[test]
    fn mod_a_of_r_plus_a1() {
        let rp = apply_r(&std_a1(), w(12, 6)).unwrap().cone_part(Cone::Plus);
        let h = mod_a(&rp).unwrap().h01();
        let names: Vec<&String> = h.space.iter().map(|(_, n)| n).collect();
        assert_eq!(names, vec!["1@Sq2Sq2", "1@Sq2Sq2Sq2"]);
    }

    #[test]
    fn psi_for_small_modules() {
        for m in [std_trivial(), std_a1()] {
            let r = psi_duality(&m, w(8, 5)).unwrap();
            assert!(r.ok(), "{}: {:?}", m.name(), r.failures);
        }
    }

    #[test]
    fn bockstein_on_a1_keeps_the_top_class() {
        let b = bockstein_d1(&std_a1(), w(12, 6)).unwrap();
        let k = b.kernel_dims();
        assert_eq!(k.dims.into_iter().collect::<Vec<_>>(), vec![(bd(6, 0), 1)]);
        assert!(b.squares_to_zero());
    }
}
