//! Finite models of graded modules over the subalgebra A(1) of the mod 2
//! Steenrod algebra, generated by Sq1 and Sq2.
//!
//! Infinite modules are truncated; a module records the interval of degrees
//! (`exact`) on which its spaces and the actions between them agree with the
//! untruncated module. Outside the stored degrees the module is zero.

mod stable;
mod standard;

pub use stable::{
    find_isomorphism, isomorphic_up_to_shift, loop_power, proj_cover_and_loop, reduce,
    stable_evidence, CoverAndLoop, Reduction, StableEvidence,
};
pub use standard::{
    binomial_mod2, element, free_a1, std_a1, std_bv, std_lambda0, std_p, std_pn, std_trivial,
    A1_BASIS, A1_WORDS,
};

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::gflin::{BitVec, F2Matrix};
use crate::grmod::{
    assemble, bd, shift_end, BiDegree, DimTable, GradedMap, GradedSpace, Window, UNBOUNDED,
};

/// Singly graded degree as a bidegree of twist zero.
pub const fn z(m: i32) -> BiDegree {
    bd(m, 0)
}

/// A finite A(1)-module. Degrees are stored as bidegrees of twist zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct A1Module {
    name: String,
    space: GradedSpace,
    sq1: GradedMap,
    sq2: GradedMap,
    exact: Window,
}

/// Which Margolis operation to take homology with.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Margolis {
    Q0,
    Q1,
}

/// Window of twist zero with possibly unbounded ends.
pub fn interval(lo: i32, hi: i32) -> Window {
    Window::line(lo, hi)
}

pub fn full_line() -> Window {
    Window::line(-UNBOUNDED, UNBOUNDED)
}

impl A1Module {
    /// Builds and validates a module; `exact` is clipped to twist zero.
    pub fn new(
        name: impl Into<String>,
        space: GradedSpace,
        sq1: GradedMap,
        sq2: GradedMap,
        exact: Window,
    ) -> Result<Self> {
        let m = A1Module {
            name: name.into(),
            space,
            sq1,
            sq2,
            exact: Window::line(exact.m_lo, exact.m_hi),
        };
        m.validate()?;
        Ok(m)
    }

    /// Builds a module from generator names and degrees and lists of action
    /// targets (summed). Missing entries act by zero.
    pub fn from_tables(
        name: &str,
        exact: Window,
        gens: &[(&str, i32)],
        sq1: &[(&str, &[&str])],
        sq2: &[(&str, &[&str])],
    ) -> Result<Self> {
        let space = GradedSpace::new(
            full_line(),
            gens.iter().map(|(n, m)| (z(*m), n.to_string())),
        )?;
        let s1 = GradedMap::from_images(
            &space,
            &space,
            z(1),
            sq1.iter().map(|(s, t)| (*s, t.to_vec())),
        )?;
        let s2 = GradedMap::from_images(
            &space,
            &space,
            z(2),
            sq2.iter().map(|(s, t)| (*s, t.to_vec())),
        )?;
        A1Module::new(name, space, s1, s2, exact)
    }

    /// Builds a module from generator ids and id-level action functions.
    pub fn from_ids(
        name: &str,
        exact: Window,
        gens: Vec<(i32, String)>,
        sq1: &dyn Fn(usize) -> Vec<usize>,
        sq2: &dyn Fn(usize) -> Vec<usize>,
    ) -> Result<Self> {
        let gens = gens.into_iter().map(|(m, n)| (z(m), n)).collect();
        let a = assemble(full_line(), gens, &[(z(1), sq1), (z(2), sq2)])?;
        let mut maps = a.maps.into_iter();
        let s1 = maps.next().expect("two maps");
        let s2 = maps.next().expect("two maps");
        A1Module::new(name, a.space, s1, s2, exact)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn space(&self) -> &GradedSpace {
        &self.space
    }

    pub fn sq1(&self) -> &GradedMap {
        &self.sq1
    }

    pub fn sq2(&self) -> &GradedMap {
        &self.sq2
    }

    /// Degrees on which the module agrees with its untruncated counterpart.
    pub fn exact(&self) -> Window {
        self.exact
    }

    pub fn with_exact(mut self, exact: Window) -> Self {
        self.exact = Window::line(exact.m_lo, exact.m_hi);
        self
    }

    /// Degrees where an invariant reaching `down` below and `up` above is reliable.
    pub fn safe(&self, down: i32, up: i32) -> Window {
        Window::line(
            shift_end(self.exact.m_lo, down),
            shift_end(self.exact.m_hi, -up),
        )
    }

    pub fn dim(&self, m: i32) -> usize {
        self.space.dim(z(m))
    }

    pub fn total_dim(&self) -> usize {
        self.space.total_dim()
    }

    pub fn bottom(&self) -> Option<i32> {
        self.space.degrees().next().map(|d| d.m)
    }

    pub fn top(&self) -> Option<i32> {
        self.space.degrees().last().map(|d| d.m)
    }

    pub fn dims(&self) -> DimTable {
        DimTable::of_space(&self.space, self.exact)
    }

    /// The operation `Sq^i` for `i ∈ {1, 2}`.
    pub fn sq(&self, i: u8) -> &GradedMap {
        match i {
            1 => &self.sq1,
            2 => &self.sq2,
            _ => panic!("A(1) is generated by Sq1 and Sq2"),
        }
    }

    pub fn q0(&self) -> GradedMap {
        self.sq1.clone()
    }

    /// `Q1 = Sq1 Sq2 + Sq2 Sq1`.
    pub fn q1(&self) -> GradedMap {
        self.sq2
            .then(&self.sq1, &self.space)
            .add(&self.sq1.then(&self.sq2, &self.space))
    }

    /// `Sq2 Sq2 Sq2`, the top class of A(1) acting.
    pub fn theta(&self) -> GradedMap {
        self.sq2
            .then(&self.sq2, &self.space)
            .then(&self.sq2, &self.space)
    }

    /// Applies a word in Sq1/Sq2, given as a sequence applied left to right
    /// (the first entry acts first), to `v` in degree `m`.
    pub fn apply_ops(&self, ops: &[u8], m: i32, v: &BitVec) -> (i32, BitVec) {
        let mut d = m;
        let mut v = v.clone();
        for &i in ops {
            let t = d + i as i32;
            v = self.sq(i).apply(z(d), &v, self.dim(t));
            d = t;
        }
        (d, v)
    }

    /// Checks block shapes and the relations `Sq1 Sq1 = 0`, `Sq2 Sq2 = Sq1 Sq2 Sq1`.
    pub fn validate(&self) -> Result<()> {
        for d in self.space.degrees() {
            if d.k != 0 {
                return Err(Error::Invalid(format!(
                    "{}: degree {d} has nonzero twist",
                    self.name
                )));
            }
        }
        self.sq1.validate(&self.space, &self.space)?;
        self.sq2.validate(&self.space, &self.space)?;
        if self.sq1.shift != z(1) || self.sq2.shift != z(2) {
            return Err(Error::Invalid(format!(
                "{}: operations have wrong degrees",
                self.name
            )));
        }
        for d in self.space.degrees() {
            let n = self.space.dim(d);
            for j in 0..n {
                let e = BitVec::unit(n, j);
                let (_, a) = self.apply_ops(&[1, 1], d.m, &e);
                if !a.is_zero() {
                    return Err(Error::Relation(format!(
                        "{}: Sq1Sq1 {} ≠ 0",
                        self.name,
                        self.space.names(d)[j]
                    )));
                }
                let (_, b) = self.apply_ops(&[2, 2], d.m, &e);
                let (_, c) = self.apply_ops(&[1, 2, 1], d.m, &e);
                if b != c {
                    return Err(Error::Relation(format!(
                        "{}: Sq2Sq2 ≠ Sq1Sq2Sq1 on {}",
                        self.name,
                        self.space.names(d)[j]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Whether `Sq2 Sq2 Sq2` vanishes identically (no free summands).
    pub fn is_reduced(&self) -> bool {
        self.theta().is_zero()
    }

    /// Margolis homology dimensions, reported on the safe region.
    pub fn margolis(&self, which: Margolis) -> DimTable {
        let (q, r) = match which {
            Margolis::Q0 => (self.q0(), 1),
            Margolis::Q1 => (self.q1(), 3),
        };
        let region = self.safe(r, r);
        let mut dims = BTreeMap::new();
        for d in self.space.degrees() {
            let out = q.block_or_zero(d, &self.space, &self.space);
            let inc = q.block_or_zero(d - q.shift, &self.space, &self.space);
            let h = self.space.dim(d) - out.rank() - inc.rank();
            dims.insert(d, h);
        }
        DimTable::new(region, dims)
    }

    /// `Ker Sq1 ∩ Ker Sq2` with each basis vector named after a coordinate
    /// it alone occupies; the second value is the safe region.
    pub fn socle(&self) -> (GradedSpace, Window) {
        let mut gens = Vec::new();
        for d in self.space.degrees() {
            let k = self
                .sq1
                .block_or_zero(d, &self.space, &self.space)
                .vstack(&self.sq2.block_or_zero(d, &self.space, &self.space));
            for (v, name) in named_rows(&k.kernel_basis(), self.space.names(d)) {
                let _ = v;
                gens.push((d, name));
            }
        }
        let s = GradedSpace::new(full_line(), gens).expect("names unique");
        (s, self.safe(0, 2))
    }

    /// Basis vectors of the socle as coordinate vectors, per degree.
    pub fn socle_vectors(&self, m: i32) -> F2Matrix {
        let d = z(m);
        self.sq1
            .block_or_zero(d, &self.space, &self.space)
            .vstack(&self.sq2.block_or_zero(d, &self.space, &self.space))
            .kernel_basis()
    }

    /// `Σ^k M`.
    pub fn shift(&self, k: i32) -> A1Module {
        A1Module {
            name: format!("Σ^{k}{}", self.name),
            space: self.space.shift(z(k)),
            sq1: self.sq1.shift_degrees(z(k)),
            sq2: self.sq2.shift_degrees(z(k)),
            exact: self.exact.shift(z(k)),
        }
    }

    /// Linear dual with the transposed action; names toggle a `~` marker.
    pub fn dual(&self) -> A1Module {
        let name = match self.name.strip_prefix("dual ") {
            Some(n) => n.to_string(),
            None => format!("dual {}", self.name),
        };
        let space = self.space.dual();
        // the dual space sorts toggled names; rebuild blocks by name
        let sq1 = crate::grmod::dualize_map(&self.space, &space, &self.sq1);
        let sq2 = crate::grmod::dualize_map(&self.space, &space, &self.sq2);
        A1Module {
            name,
            space,
            sq1,
            sq2,
            exact: self.exact.negate(),
        }
    }

    /// Direct sum with labelled summands.
    pub fn direct_sum(name: &str, parts: &[(&str, &A1Module)]) -> Result<A1Module> {
        let mut gens = Vec::new();
        let mut offsets = Vec::new();
        for (label, p) in parts {
            offsets.push(gens.len());
            for (d, n) in p.space.iter() {
                gens.push((d.m, format!("{label}:{n}")));
            }
        }
        let images = |which: u8, id: usize| -> Vec<usize> {
            let part = offsets.iter().rposition(|&o| o <= id).expect("nonempty");
            let (_, p) = parts[part];
            let local = id - offsets[part];
            let (d, j) = nth_basis(&p.space, local);
            let img = p.sq(which).apply(
                d,
                &BitVec::unit(p.space.dim(d), j),
                p.dim(d.m + which as i32),
            );
            let base = offsets[part] + first_index_of_degree(&p.space, d + z(which as i32));
            img.ones().map(|i| base + i).collect()
        };
        let exact = parts
            .iter()
            .fold(full_line(), |w, (_, p)| w.intersect(&p.exact));
        A1Module::from_ids(name, exact, gens, &|id| images(1, id), &|id| images(2, id))
    }

    /// Tensor product with the diagonal (Cartan) action.
    pub fn tensor(a: &A1Module, b: &A1Module) -> Result<A1Module> {
        A1Module::tensor_upto(a, b, None)
    }

    /// Tensor product, optionally truncated above `top` (a quotient module).
    pub fn tensor_upto(a: &A1Module, b: &A1Module, top: Option<i32>) -> Result<A1Module> {
        let keep = |m: i32| top.is_none_or(|t| m <= t);
        let mut gens = Vec::new();
        let mut id_of: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let abasis: Vec<(BiDegree, usize)> = a
            .space
            .degrees()
            .flat_map(|d| (0..a.space.dim(d)).map(move |j| (d, j)))
            .collect();
        let bbasis: Vec<(BiDegree, usize)> = b
            .space
            .degrees()
            .flat_map(|d| (0..b.space.dim(d)).map(move |j| (d, j)))
            .collect();
        let aidx: BTreeMap<(BiDegree, usize), usize> =
            abasis.iter().enumerate().map(|(i, x)| (*x, i)).collect();
        let bidx: BTreeMap<(BiDegree, usize), usize> =
            bbasis.iter().enumerate().map(|(i, x)| (*x, i)).collect();
        let mut pairs = Vec::new();
        for (ia, &(da, ja)) in abasis.iter().enumerate() {
            for (ib, &(db, jb)) in bbasis.iter().enumerate() {
                if !keep((da + db).m) {
                    continue;
                }
                id_of.insert((ia, ib), gens.len());
                pairs.push((ia, ib));
                gens.push((
                    (da + db).m,
                    format!("{}*{}", a.space.names(da)[ja], b.space.names(db)[jb]),
                ));
            }
        }
        let act = |m: &A1Module,
                   idx: &BTreeMap<(BiDegree, usize), usize>,
                   basis: &[(BiDegree, usize)],
                   i: usize,
                   op: u8| {
            let (d, j) = basis[i];
            if op == 0 {
                return vec![i];
            }
            let t = d + z(op as i32);
            m.sq(op)
                .apply(d, &BitVec::unit(m.space.dim(d), j), m.space.dim(t))
                .ones()
                .map(|r| idx[&(t, r)])
                .collect::<Vec<_>>()
        };
        let cartan = |id: usize, split: &[(u8, u8)]| -> Vec<usize> {
            let (ia, ib) = pairs[id];
            let mut out = Vec::new();
            for &(oa, ob) in split {
                for x in act(a, &aidx, &abasis, ia, oa) {
                    for y in act(b, &bidx, &bbasis, ib, ob) {
                        if let Some(&t) = id_of.get(&(x, y)) {
                            out.push(t);
                        }
                    }
                }
            }
            out
        };
        let mut exact = tensor_exact(a, b);
        if let Some(t) = top {
            exact.m_hi = exact.m_hi.min(t);
        }
        A1Module::from_ids(
            &format!("{}⊗{}", a.name, b.name),
            exact,
            gens,
            &|id| cartan(id, &[(1, 0), (0, 1)]),
            &|id| cartan(id, &[(2, 0), (1, 1), (0, 2)]),
        )
    }

    /// The submodule or quotient given by keeping whole degrees in `w`; valid
    /// only when no action crosses between kept and dropped degrees in the
    /// wrong direction (callers use it for truncation from above).
    pub fn truncate_above(&self, top: i32) -> A1Module {
        let w = Window::line(-UNBOUNDED, top);
        A1Module {
            name: self.name.clone(),
            space: self.space.restrict(w),
            sq1: self.sq1.restrict(w),
            sq2: self.sq2.restrict(w),
            exact: Window::line(self.exact.m_lo, self.exact.m_hi.min(top)),
        }
    }
}

/// Names the rows of a kernel basis in reduced form by the coordinate each
/// row alone has set (the first such coordinate).
pub fn named_rows<'a>(rows: &'a F2Matrix, names: &'a [String]) -> Vec<(&'a BitVec, String)> {
    let n = rows.nrows();
    let mut out = Vec::new();
    for (i, r) in rows.rows().iter().enumerate() {
        let own = r
            .ones()
            .find(|&c| (0..n).all(|j| j == i || !rows.row(j).get(c)));
        let c = own.or_else(|| r.first_one()).expect("nonzero row");
        out.push((r, names[c].clone()));
    }
    out
}

fn nth_basis(space: &GradedSpace, mut n: usize) -> (BiDegree, usize) {
    for d in space.degrees() {
        let k = space.dim(d);
        if n < k {
            return (d, n);
        }
        n -= k;
    }
    panic!("basis index out of range")
}

fn first_index_of_degree(space: &GradedSpace, d: BiDegree) -> usize {
    space
        .degrees()
        .take_while(|e| *e < d)
        .map(|e| space.dim(e))
        .sum()
}

/// Transposes an operator onto the dual space, matching basis elements by name.
/// Exactness interval of a tensor product from those of the factors.
fn tensor_exact(a: &A1Module, b: &A1Module) -> Window {
    let support = |m: &A1Module| {
        let lo = if m.exact.m_lo <= -UNBOUNDED {
            m.bottom().unwrap_or(0)
        } else {
            -UNBOUNDED
        };
        let hi = if m.exact.m_hi >= UNBOUNDED {
            m.top().unwrap_or(0)
        } else {
            UNBOUNDED
        };
        (lo, hi)
    };
    if a.total_dim() == 0 || b.total_dim() == 0 {
        return full_line();
    }
    let (ib1, it1) = support(a);
    let (ib2, it2) = support(b);
    let (l1, h1, l2, h2) = (a.exact.m_lo, a.exact.m_hi, b.exact.m_lo, b.exact.m_hi);
    let add = |x: i32, y: i32| -> i32 {
        if x.abs() >= UNBOUNDED {
            x
        } else if y.abs() >= UNBOUNDED {
            y
        } else {
            x + y
        }
    };
    let mut lo = -UNBOUNDED;
    let mut hi = UNBOUNDED;
    if ib1 < l1 {
        lo = lo.max(add(l1, it2));
    }
    if ib2 < l2 {
        lo = lo.max(add(l2, it1));
    }
    if it1 > h1 {
        hi = hi.min(add(h1, ib2));
    }
    if it2 > h2 {
        hi = hi.min(add(h2, ib1));
    }
    Window::line(lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a1_dims_and_relations() {
        let a = std_a1();
        let dims: Vec<usize> = (0..=6).map(|m| a.dim(m)).collect();
        assert_eq!(dims, vec![1, 1, 1, 2, 1, 1, 1]);
        a.validate().unwrap();
        assert!(!a.is_reduced());
    }

    #[test]
    fn bad_relation_rejected() {
        // Sq1 Sq1 x = z is not allowed
        let r = A1Module::from_tables(
            "bad",
            full_line(),
            &[("x", 0), ("y", 1), ("w", 2)],
            &[("x", &["y"]), ("y", &["w"])],
            &[],
        );
        assert!(matches!(r, Err(Error::Relation(_))));
    }

    #[test]
    fn dual_of_dual() {
        let p = std_p(12);
        let dd = p.dual().dual();
        assert_eq!(dd.space(), p.space());
        assert_eq!(dd.sq1(), p.sq1());
        assert_eq!(dd.sq2(), p.sq2());
    }

    #[test]
    fn tensor_exactness_of_truncated_p() {
        let p = std_p(20);
        let t = A1Module::tensor(&p, &p).unwrap();
        // P_{≤20} ⊗ P_{≤20} agrees with P⊗P up to degree 21
        assert_eq!(t.exact().m_hi, 21);
    }

    #[test]
    fn margolis_of_p() {
        let p = std_p(30);
        let h1 = p.margolis(Margolis::Q1);
        assert_eq!(h1.dims, BTreeMap::from([(z(2), 1)]));
        assert_eq!(p.margolis(Margolis::Q0).total(), 0);
    }
}
