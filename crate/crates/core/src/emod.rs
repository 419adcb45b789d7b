//! Bigraded modules over the exterior algebra `E = Λ(Q0, Q1)` with `Q0` in
//! degree `(1,0)` and `Q1` in degree `(2,1)`, and their homology invariants.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::gflin::{BitVec, F2Matrix, Subquotient};
use crate::grmod::{
    assemble, bd, dualize_map, BiDegree, DimTable, GradedMap, GradedSpace, ImageFn, Window,
};

pub const Q0: BiDegree = bd(1, 0);
pub const Q1: BiDegree = bd(2, 1);
/// Degree of multiplication by `a`.
pub const A_SHIFT: BiDegree = bd(0, 1);
/// Degree of multiplication by `σ^{-1}`.
pub const S_SHIFT: BiDegree = bd(-1, 1);

/// A bigraded E-module on a window of degrees, optionally with actions of `a`
/// and `σ^{-1}`. `exact` is the region where the stored data agree with the
/// module being modelled.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EModule {
    name: String,
    space: GradedSpace,
    q0: GradedMap,
    q1: GradedMap,
    a: Option<GradedMap>,
    s: Option<GradedMap>,
    exact: Window,
}

impl EModule {
    pub fn new(
        name: impl Into<String>,
        space: GradedSpace,
        q0: GradedMap,
        q1: GradedMap,
        exact: Window,
    ) -> Result<Self> {
        let exact = exact.intersect(&space.window());
        let m = EModule {
            name: name.into(),
            space,
            q0,
            q1,
            a: None,
            s: None,
            exact,
        };
        m.validate()?;
        Ok(m)
    }

    /// Builds a module from basis element ids and image lists.
    #[allow(clippy::too_many_arguments)]
    pub fn from_ids(
        name: &str,
        window: Window,
        exact: Window,
        gens: Vec<(BiDegree, String)>,
        q0: ImageFn<'_>,
        q1: ImageFn<'_>,
        a: Option<ImageFn<'_>>,
        s: Option<ImageFn<'_>>,
    ) -> Result<Self> {
        let mut ops: Vec<(BiDegree, ImageFn<'_>)> = vec![(Q0, q0), (Q1, q1)];
        if let Some(f) = a {
            ops.push((A_SHIFT, f));
        }
        if let Some(f) = s {
            ops.push((S_SHIFT, f));
        }
        let asm = assemble(window, gens, &ops)?;
        let mut maps = asm.maps.into_iter();
        let q0 = maps.next().expect("q0");
        let q1 = maps.next().expect("q1");
        let a = a.map(|_| maps.next().expect("a"));
        let s = s.map(|_| maps.next().expect("s"));
        let m = EModule {
            name: name.to_string(),
            space: asm.space,
            q0,
            q1,
            a,
            s,
            exact: exact.intersect(&window),
        };
        m.validate()?;
        Ok(m)
    }

    /// Builds a module from named generators and image tables.
    pub fn from_tables(
        name: &str,
        window: Window,
        gens: &[(&str, BiDegree)],
        q0: &[(&str, &[&str])],
        q1: &[(&str, &[&str])],
    ) -> Result<Self> {
        let space = GradedSpace::new(window, gens.iter().map(|(n, d)| (*d, n.to_string())))?;
        let q0 =
            GradedMap::from_images(&space, &space, Q0, q0.iter().map(|(s, t)| (*s, t.to_vec())))?;
        let q1 =
            GradedMap::from_images(&space, &space, Q1, q1.iter().map(|(s, t)| (*s, t.to_vec())))?;
        EModule::new(name, space, q0, q1, window)
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

    pub fn q0(&self) -> &GradedMap {
        &self.q0
    }

    pub fn q1(&self) -> &GradedMap {
        &self.q1
    }

    pub fn a_action(&self) -> Option<&GradedMap> {
        self.a.as_ref()
    }

    pub fn s_action(&self) -> Option<&GradedMap> {
        self.s.as_ref()
    }

    pub fn with_actions(mut self, a: Option<GradedMap>, s: Option<GradedMap>) -> Result<Self> {
        self.a = a;
        self.s = s;
        self.validate()?;
        Ok(self)
    }

    pub fn exact(&self) -> Window {
        self.exact
    }

    pub fn with_exact(mut self, exact: Window) -> Self {
        self.exact = exact.intersect(&self.space.window());
        self
    }

    /// `exact` shrunk by `(dm, dk)` on every side.
    pub fn safe(&self, dm: i32, dk: i32) -> Window {
        self.exact.shrink(dm, dk)
    }

    pub fn window(&self) -> Window {
        self.space.window()
    }

    pub fn dim(&self, d: BiDegree) -> usize {
        self.space.dim(d)
    }

    pub fn total_dim(&self) -> usize {
        self.space.total_dim()
    }

    pub fn dims(&self) -> DimTable {
        DimTable::of_space(&self.space, self.exact)
    }

    pub fn block(&self, map: &GradedMap, d: BiDegree) -> F2Matrix {
        map.block_or_zero(d, &self.space, &self.space)
    }

    /// Checks block shapes and the relations `q0² = q1² = 0`, `q0q1 = q1q0`,
    /// `a` commuting with `q0`, `q1` and `σ^{-1}`, wherever every degree of
    /// the relation is stored.
    pub fn validate(&self) -> Result<()> {
        let mut maps: Vec<(&str, &GradedMap, BiDegree)> =
            vec![("q0", &self.q0, Q0), ("q1", &self.q1, Q1)];
        if let Some(a) = &self.a {
            maps.push(("a", a, A_SHIFT));
        }
        if let Some(s) = &self.s {
            maps.push(("s", s, S_SHIFT));
        }
        for (n, m, sh) in &maps {
            if m.shift != *sh {
                return Err(Error::Invalid(format!(
                    "{n} has degree {}, expected {sh}",
                    m.shift
                )));
            }
            m.validate(&self.space, &self.space)
                .map_err(|e| Error::Invalid(format!("{n} in {}: {e}", self.name)))?;
        }
        let w = self.space.window();
        let rels: Vec<(&str, &GradedMap, &GradedMap)> =
            vec![("q0q0", &self.q0, &self.q0), ("q1q1", &self.q1, &self.q1)];
        let mut comms: Vec<(&str, &GradedMap, &GradedMap)> = vec![("q0q1", &self.q0, &self.q1)];
        if let Some(a) = &self.a {
            comms.push(("a q0", a, &self.q0));
            comms.push(("a q1", a, &self.q1));
            if let Some(s) = &self.s {
                comms.push(("a s", a, s));
            }
        }
        for d in self.space.degrees() {
            for (n, x, y) in &rels {
                let e = d + x.shift;
                if w.contains(e)
                    && w.contains(e + y.shift)
                    && !self.block(y, e).mul(&self.block(x, d)).is_zero()
                {
                    return Err(Error::Relation(format!("{n} ≠ 0 at {d} in {}", self.name)));
                }
            }
            for (n, x, y) in &comms {
                let (ex, ey) = (d + x.shift, d + y.shift);
                let t = ex + y.shift;
                if !(w.contains(ex) && w.contains(ey) && w.contains(t)) {
                    continue;
                }
                let xy = self.block(y, ex).mul(&self.block(x, d));
                let yx = self.block(x, ey).mul(&self.block(y, d));
                if xy != yx {
                    return Err(Error::Relation(format!(
                        "{n} do not commute at {d} in {}",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// `Σ^s M`.
    pub fn shift(&self, s: BiDegree) -> EModule {
        EModule {
            name: format!("Σ^{s}{}", self.name),
            space: self.space.shift(s),
            q0: self.q0.shift_degrees(s),
            q1: self.q1.shift_degrees(s),
            a: self.a.as_ref().map(|m| m.shift_degrees(s)),
            s: self.s.as_ref().map(|m| m.shift_degrees(s)),
            exact: self.exact.shift(s),
        }
    }

    /// Linear dual with transposed operations.
    pub fn dual(&self) -> EModule {
        let name = match self.name.strip_prefix("dual ") {
            Some(n) => n.to_string(),
            None => format!("dual {}", self.name),
        };
        let space = self.space.dual();
        EModule {
            name,
            q0: dualize_map(&self.space, &space, &self.q0),
            q1: dualize_map(&self.space, &space, &self.q1),
            a: self.a.as_ref().map(|m| dualize_map(&self.space, &space, m)),
            s: self.s.as_ref().map(|m| dualize_map(&self.space, &space, m)),
            space,
            exact: self.exact.negate(),
        }
    }

    /// Keeps degrees in `w`; the result is a model of the same module on `exact ∩ w`.
    pub fn restrict(&self, w: Window) -> EModule {
        let space = self.space.restrict(w);
        let w = space.window();
        EModule {
            name: self.name.clone(),
            q0: self.q0.restrict(w),
            q1: self.q1.restrict(w),
            a: self.a.as_ref().map(|m| m.restrict(w)),
            s: self.s.as_ref().map(|m| m.restrict(w)),
            space,
            exact: self.exact.intersect(&w),
        }
    }

    /// Direct sum; names get `label:` prefixes. Extra actions are kept only
    /// when every summand has them.
    pub fn direct_sum(name: &str, parts: &[(&str, &EModule)]) -> Result<EModule> {
        let window = match parts.split_first() {
            Some(((_, p), rest)) => rest
                .iter()
                .fold(p.window(), |w, (_, q)| hull(&w, &q.window())),
            None => Window::everything(),
        };
        let space = GradedSpace::direct_sum(
            &parts
                .iter()
                .map(|(l, p)| (*l, &p.space))
                .collect::<Vec<_>>(),
            window,
        )?;
        let lookup = space.lookup();
        let sum_map = |get: &dyn Fn(&EModule) -> Option<&GradedMap>,
                       shift: BiDegree|
         -> Option<GradedMap> {
            let mut blocks: BTreeMap<BiDegree, F2Matrix> = BTreeMap::new();
            for (label, p) in parts {
                let m = get(p)?;
                for (d, b) in m.blocks() {
                    let e = d + shift;
                    let blk = blocks
                        .entry(d)
                        .or_insert_with(|| F2Matrix::zeros(space.dim(e), space.dim(d)));
                    for j in 0..b.ncols() {
                        let (_, jj) = lookup[&format!("{label}:{}", p.space.names(d)[j])];
                        for i in 0..b.nrows() {
                            if b.get(i, j) {
                                let (_, ii) = lookup[&format!("{label}:{}", p.space.names(e)[i])];
                                blk.set(ii, jj, true);
                            }
                        }
                    }
                }
            }
            Some(GradedMap::from_blocks(shift, blocks))
        };
        let q0 = sum_map(&|p| Some(&p.q0), Q0).expect("always present");
        let q1 = sum_map(&|p| Some(&p.q1), Q1).expect("always present");
        let a = sum_map(&|p| p.a.as_ref(), A_SHIFT);
        let s = sum_map(&|p| p.s.as_ref(), S_SHIFT);
        let exact = parts.iter().fold(window, |w, (_, p)| w.intersect(&p.exact));
        let m = EModule {
            name: name.to_string(),
            space,
            q0,
            q1,
            a,
            s,
            exact,
        };
        m.validate()?;
        Ok(m)
    }

    /// Tensor product with the diagonal action, restricted to `window`;
    /// the left factor must be finite. Names are `x*y`.
    pub fn tensor_finite(a: &EModule, b: &EModule, window: Window) -> Result<EModule> {
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
        let mut gens = Vec::new();
        let mut id_of: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut pairs = Vec::new();
        for (ia, &(da, ja)) in abasis.iter().enumerate() {
            for (ib, &(db, jb)) in bbasis.iter().enumerate() {
                let d = da + db;
                if window.contains(d) {
                    id_of.insert((ia, ib), gens.len());
                    pairs.push((ia, ib));
                    gens.push((
                        d,
                        format!("{}*{}", a.space.names(da)[ja], b.space.names(db)[jb]),
                    ));
                }
            }
        }
        let aidx: BTreeMap<(BiDegree, usize), usize> =
            abasis.iter().enumerate().map(|(i, x)| (*x, i)).collect();
        let bidx: BTreeMap<(BiDegree, usize), usize> =
            bbasis.iter().enumerate().map(|(i, x)| (*x, i)).collect();
        let act = |m: &EModule,
                   idx: &BTreeMap<(BiDegree, usize), usize>,
                   (d, j): (BiDegree, usize),
                   op: &GradedMap| {
            let t = d + op.shift;
            op.apply(d, &BitVec::unit(m.space.dim(d), j), m.space.dim(t))
                .ones()
                .map(|r| idx[&(t, r)])
                .collect::<Vec<_>>()
        };
        let diag = |id: usize, which: u8| -> Vec<usize> {
            let (ia, ib) = pairs[id];
            let (oa, ob) = if which == 0 {
                (&a.q0, &b.q0)
            } else {
                (&a.q1, &b.q1)
            };
            let mut out = Vec::new();
            for x in act(a, &aidx, abasis[ia], oa) {
                if let Some(&t) = id_of.get(&(x, ib)) {
                    out.push(t);
                }
            }
            for y in act(b, &bidx, bbasis[ib], ob) {
                if let Some(&t) = id_of.get(&(ia, y)) {
                    out.push(t);
                }
            }
            out
        };
        let exact = a
            .space
            .degrees()
            .fold(window, |w, d| w.intersect(&b.exact.shift(d)));
        EModule::from_ids(
            &format!("{}⊗{}", a.name, b.name),
            window,
            exact,
            gens,
            &|id| diag(id, 0),
            &|id| diag(id, 1),
            None,
            None,
        )
    }

    /// The submodule (`quotient = false`) spanned by the basis elements whose
    /// names satisfy `keep`, or the quotient (`quotient = true`) by the span of
    /// the others. Fails when that span is not closed under the operations.
    pub fn on_basis_subset(
        &self,
        name: &str,
        keep: &dyn Fn(&str) -> bool,
        quotient: bool,
    ) -> Result<EModule> {
        let kept: Vec<(BiDegree, String)> = self
            .space
            .iter()
            .filter(|(_, n)| keep(n))
            .map(|(d, n)| (d, n.clone()))
            .collect();
        let space = GradedSpace::new(self.space.window(), kept)?;
        let idx = |d: BiDegree| -> (Vec<usize>, Vec<usize>) {
            let names = self.space.names(d);
            (0..names.len()).partition(|&i| keep(&names[i]))
        };
        let restrict = |map: &GradedMap| -> Result<GradedMap> {
            let mut blocks = BTreeMap::new();
            for (d, b) in map.blocks() {
                let (src_keep, src_drop) = idx(d);
                let (tgt_keep, tgt_drop) = idx(d + map.shift);
                // closure: the dropped span must be invariant
                let leak = if quotient {
                    b.select(&tgt_keep, &src_drop)
                } else {
                    b.select(&tgt_drop, &src_keep)
                };
                if !leak.is_zero() {
                    return Err(Error::Invalid(format!(
                        "basis subset of {} is not closed at {d}",
                        self.name
                    )));
                }
                blocks.insert(d, b.select(&tgt_keep, &src_keep));
            }
            Ok(GradedMap::from_blocks(map.shift, blocks))
        };
        let m = EModule {
            name: name.to_string(),
            q0: restrict(&self.q0)?,
            q1: restrict(&self.q1)?,
            a: self.a.as_ref().map(&restrict).transpose()?,
            s: self.s.as_ref().map(&restrict).transpose()?,
            space,
            exact: self.exact,
        };
        m.validate()?;
        Ok(m)
    }

    /// Drops the action of `a`.
    pub fn without_a(mut self) -> EModule {
        self.a = None;
        self
    }

    /// Basis of `Ker q0 ∩ Ker q1` at `d`, as rows.
    pub fn cycles(&self, d: BiDegree) -> F2Matrix {
        self.block(&self.q0, d)
            .vstack(&self.block(&self.q1, d))
            .kernel_basis()
    }

    /// Margolis homology for `q0` (`which = 0`) or `q1`, on the safe region.
    pub fn margolis(&self, which: u8) -> DimTable {
        let q = if which == 0 { &self.q0 } else { &self.q1 };
        let region = self.safe(q.shift.m, q.shift.k);
        let dims = self
            .space
            .degrees()
            .filter(|d| region.contains(*d))
            .map(|d| {
                let h =
                    self.space.dim(d) - self.block(q, d).rank() - self.block(q, d - q.shift).rank();
                (d, h)
            });
        DimTable::new(region, dims.collect::<Vec<_>>())
    }

    /// `H01 = (Ker q0 ∩ Ker q1) / q1(Ker q0)`.
    pub fn h01(&self) -> Homology {
        let region = self.safe(2, 1);
        Homology::build(
            &format!("H01({})", self.name),
            &self.space,
            region,
            BiDegree::ZERO,
            |d| {
                let z = self.cycles(d);
                let e = d - Q1;
                let k = self.block(&self.q0, e).kernel_basis();
                let b = image_rows(&self.block(&self.q1, e), &k);
                (z, b)
            },
        )
    }

    /// Relative projectivity (freeness over `Λ(Q1)`), tested on the safe region.
    pub fn is_rel_projective(&self) -> bool {
        self.margolis(1).total() == 0
    }

    /// `Ker q0 ∩ Ker q1`, the degree-zero relative Ext.
    pub fn kernel_both(&self) -> Homology {
        let region = self.safe(2, 1);
        Homology::build(
            &format!("relExt0({})", self.name),
            &self.space,
            region,
            BiDegree::ZERO,
            |d| {
                let z = self.cycles(d);
                let b = F2Matrix::zeros(0, z.ncols());
                (z, b)
            },
        )
    }

    /// The complex `Λ1 ⊗ M` used for the Tate resolution, with its
    /// differential `1⊗x ↦ Q1⊗x` of degree `(2,1)`.
    pub fn tate_term(&self) -> Result<(EModule, GradedMap)> {
        let l1 = e_lambda1();
        let w = self.window();
        let window = Window::new(
            w.m_lo,
            crate::grmod::shift_end(w.m_hi, 2),
            w.k_lo,
            crate::grmod::shift_end(w.k_hi, 1),
        );
        let t = EModule::tensor_finite(&l1, self, window)?;
        let images = self.space.iter().filter_map(|(d, n)| {
            let src = format!("1*{n}");
            let tgt = format!("Q1*{n}");
            (window.contains(d) && window.contains(d + Q1)).then_some((src, vec![tgt]))
        });
        let images: Vec<(String, Vec<String>)> = images.collect();
        let dmap = GradedMap::from_images(
            &t.space,
            &t.space,
            Q1,
            images
                .iter()
                .map(|(s, ts)| (s.as_str(), ts.iter().map(|x| x.as_str()).collect())),
        )?;
        Ok((t, dmap))
    }

    /// Relative Ext: `n = 0` is `Ker q0 ∩ Ker q1`; for `n ≥ 1` the homology of
    /// `Hom_E(F, T_•)` at slot `n - 1` of the Tate complex
    /// `T_i = Σ^{i(2,1)}(Λ1 ⊗ M)`.
    pub fn rel_ext(&self, n: u32) -> Result<Homology> {
        if n == 0 {
            return Ok(self.kernel_both());
        }
        let (t, dmap) = self.tate_term()?;
        let region = t.safe(2, 1);
        let rep_shift = Q1.scale(n as i32 - 1);
        Ok(Homology::build(
            &format!("relExt{n}({})", self.name),
            &t.space,
            region,
            rep_shift,
            |e| {
                let z = t.cycles(e);
                let dz = image_rows(&t.block(&dmap, e), &z);
                let ker = dz.transpose().kernel_basis();
                let zk = combine_rows(&ker, &z);
                let prev = e - Q1;
                let zp = t.cycles(prev);
                let b = image_rows(&t.block(&dmap, prev), &zp);
                (zk, b)
            },
        ))
    }

    /// `H^{01}`: the homology of `q1` acting on `Coker q0`, computed directly.
    pub fn h01_dual(&self) -> Homology {
        let region = self.safe(3, 1);
        let coker = |d: BiDegree| -> (F2Matrix, Subquotient) {
            let n = self.dim(d);
            let im = image_rows(
                &self.block(&self.q0, d - Q0),
                &F2Matrix::identity(self.dim(d - Q0)),
            );
            let sq = Subquotient::canonical(&F2Matrix::identity(n), &im);
            (im, sq)
        };
        Homology::build(
            &format!("H^01({})", self.name),
            &self.space,
            region,
            BiDegree::ZERO,
            |d| {
                let (im_here, c_here) = coker(d);
                let (_, c_up) = coker(d + Q1);
                let reps = c_here.representatives().clone();
                let qbar = {
                    let q = self.block(&self.q1, d);
                    let cols: Vec<BitVec> = reps
                        .rows()
                        .iter()
                        .map(|r| c_up.class_of(&q.apply(r)).expect("total"))
                        .collect();
                    F2Matrix::from_cols(c_up.dim(), &cols)
                };
                let ker = qbar.kernel_basis();
                let mut z = combine_rows(&ker, &reps);
                for r in im_here.rows() {
                    z.push_row(r.clone());
                }
                let prev = d - Q1;
                let (_, c_prev) = coker(prev);
                let mut b = image_rows(&self.block(&self.q1, prev), c_prev.representatives());
                for r in im_here.rows() {
                    b.push_row(r.clone());
                }
                (z, b)
            },
        )
    }

    /// `H^{01}` obtained from `H01` of the dual module.
    pub fn h01_dual_via_duality(&self) -> DimTable {
        self.dual().h01().dims().dual()
    }
}

/// Smallest window containing both.
fn hull(a: &Window, b: &Window) -> Window {
    Window::new(
        a.m_lo.min(b.m_lo),
        a.m_hi.max(b.m_hi),
        a.k_lo.min(b.k_lo),
        a.k_hi.max(b.k_hi),
    )
}

/// Rows `map · r` for each row `r` of `rows`.
pub fn image_rows(map: &F2Matrix, rows: &F2Matrix) -> F2Matrix {
    F2Matrix::from_rows(
        map.nrows(),
        rows.rows().iter().map(|r| map.apply(r)).collect(),
    )
}

/// Rows `Σ_j c_ij r_j` for each row `c_i` of `coeffs`.
pub fn combine_rows(coeffs: &F2Matrix, rows: &F2Matrix) -> F2Matrix {
    let out = coeffs
        .rows()
        .iter()
        .map(|c| {
            let mut v = BitVec::zeros(rows.ncols());
            for j in c.ones() {
                v.add_assign(rows.row(j));
            }
            v
        })
        .collect();
    F2Matrix::from_rows(rows.ncols(), out)
}

/// A subquotient of a graded space, degree by degree, with named classes.
/// A class in degree `d` is represented by a vector in degree `d - rep_shift`
/// of the ambient space. Class coordinates follow the order of `space.names(d)`.
#[derive(Clone, Debug)]
pub struct Homology {
    pub name: String,
    pub space: GradedSpace,
    pub region: Window,
    pub rep_shift: BiDegree,
    quots: BTreeMap<BiDegree, Subquotient>,
}

impl Homology {
    /// `at(d)` returns row bases of cycles and boundaries at ambient degree `d`.
    pub fn build(
        name: &str,
        ambient: &GradedSpace,
        region: Window,
        rep_shift: BiDegree,
        at: impl Fn(BiDegree) -> (F2Matrix, F2Matrix),
    ) -> Homology {
        let class_region = region.shift(rep_shift);
        let mut gens = Vec::new();
        let mut quots = BTreeMap::new();
        for d in ambient.degrees().filter(|d| region.contains(*d)) {
            let (z, b) = at(d);
            let sq = Subquotient::canonical(&z, &b);
            if sq.dim() == 0 {
                continue;
            }
            let names = ambient.names(d);
            let lead = sq.leading();
            // leading coordinates are increasing and names are sorted, so
            // echelon order is already name order
            debug_assert!(lead.windows(2).all(|w| w[0] < w[1]));
            for &c in &lead {
                gens.push((d + rep_shift, names[c].clone()));
            }
            quots.insert(d + rep_shift, sq);
        }
        let space = GradedSpace::new(class_region, gens).expect("leading names are distinct");
        Homology {
            name: name.to_string(),
            space,
            region: class_region,
            rep_shift,
            quots,
        }
    }

    pub fn dims(&self) -> DimTable {
        DimTable::of_space(&self.space, self.region)
    }

    pub fn dim(&self, d: BiDegree) -> usize {
        self.space.dim(d)
    }

    pub fn total(&self) -> usize {
        self.space.total_dim()
    }

    /// Coordinates of the class of an ambient vector lying over class degree
    /// `d`; `None` when `v` is not a cycle or `d` is outside the region.
    pub fn class_of(&self, d: BiDegree, v: &BitVec) -> Option<BitVec> {
        if !self.region.contains(d) {
            return None;
        }
        match self.quots.get(&d) {
            Some(q) => q.class_of(v),
            None => Some(BitVec::zeros(0)),
        }
    }

    /// Representatives of the classes at `d`, in name order.
    pub fn representatives(&self, d: BiDegree) -> Vec<BitVec> {
        self.quots
            .get(&d)
            .map_or_else(Vec::new, |q| q.representatives().rows().to_vec())
    }

    /// Regrades by `s`.
    pub fn shift(&self, s: BiDegree) -> Homology {
        Homology {
            name: self.name.clone(),
            space: self.space.shift(s),
            region: self.region.shift(s),
            rep_shift: self.rep_shift + s,
            quots: self
                .quots
                .iter()
                .map(|(d, q)| (*d + s, q.clone()))
                .collect(),
        }
    }
}

/// The map induced on homology by `f: M → N`.
pub fn induced_map(f: &GradedMap, n: &EModule, hm: &Homology, hn: &Homology) -> Result<GradedMap> {
    let shift = f.shift + hn.rep_shift - hm.rep_shift;
    let mut blocks = BTreeMap::new();
    for d in hm.space.degrees() {
        let t = d + shift;
        if !hn.region.contains(t) {
            continue;
        }
        let e = d - hm.rep_shift;
        let tdim = n.dim(e + f.shift);
        let cols: Vec<BitVec> = hm
            .representatives(d)
            .iter()
            .map(|r| {
                hn.class_of(t, &f.apply(e, r, tdim)).ok_or_else(|| {
                    Error::Invalid(format!("image of a class at {d} is not a cycle"))
                })
            })
            .collect::<Result<_>>()?;
        blocks.insert(d, F2Matrix::from_cols(hn.dim(t), &cols));
    }
    Ok(GradedMap::from_blocks(shift, blocks))
}

/// Checks that `f` commutes with `q0` and `q1` wherever all degrees involved lie in `region`.
pub fn check_e_linear(f: &GradedMap, m: &EModule, n: &EModule, region: Window) -> Result<()> {
    for d in m.space.degrees().filter(|d| region.contains(*d)) {
        for (qm, qn) in [(&m.q0, &n.q0), (&m.q1, &n.q1)] {
            let (e, t) = (d + qm.shift, d + f.shift);
            if !(region.contains(e) && region.contains(t) && region.contains(t + qm.shift)) {
                continue;
            }
            let lhs = n.block(qn, t).mul(&f.block_or_zero(d, &m.space, &n.space));
            let rhs = f.block_or_zero(e, &m.space, &n.space).mul(&m.block(qm, d));
            if lhs != rhs {
                return Err(Error::Relation(format!(
                    "map does not commute with the operations at {d}"
                )));
            }
        }
    }
    Ok(())
}

fn ses_degrees(a: &EModule, b: &EModule, c: &EModule, region: Window) -> Vec<BiDegree> {
    let mut v: Vec<BiDegree> = a
        .space
        .degrees()
        .chain(b.space.degrees())
        .chain(c.space.degrees())
        .collect();
    v.sort();
    v.dedup();
    v.retain(|d| region.contains(*d));
    v
}

/// Checks `0 → A → B → C → 0` is a short exact sequence of E-modules on `region`.
pub fn check_ses(
    a: &EModule,
    b: &EModule,
    c: &EModule,
    f: &GradedMap,
    g: &GradedMap,
    region: Window,
) -> Result<()> {
    if f.shift != BiDegree::ZERO || g.shift != BiDegree::ZERO {
        return Err(Error::Invalid(
            "maps in a short exact sequence must have degree zero".into(),
        ));
    }
    check_e_linear(f, a, b, region)?;
    check_e_linear(g, b, c, region)?;
    for d in ses_degrees(a, b, c, region) {
        let fd = f.block_or_zero(d, &a.space, &b.space);
        let gd = g.block_or_zero(d, &b.space, &c.space);
        let (da, db, dc) = (a.dim(d), b.dim(d), c.dim(d));
        if fd.rank() != da {
            return Err(Error::NotExact(format!(
                "first map is not injective at {d}"
            )));
        }
        if gd.rank() != dc {
            return Err(Error::NotExact(format!(
                "second map is not surjective at {d}"
            )));
        }
        if !gd.mul(&fd).is_zero() || da + dc != db {
            return Err(Error::NotExact(format!("not exact in the middle at {d}")));
        }
    }
    Ok(())
}

/// Whether an exact sequence splits over `Λ(Q0)` on `region`. A sequence of
/// finite modules splits exactly when the middle term is isomorphic to the sum
/// of the ends, which over `Λ(Q0)` means the ranks of `q0` add up degreewise.
pub fn is_lambda0_split(a: &EModule, b: &EModule, c: &EModule, region: Window) -> bool {
    ses_degrees(a, b, c, region)
        .into_iter()
        .filter(|d| region.contains(*d + Q0))
        .all(|d| b.block(&b.q0, d).rank() == a.block(&a.q0, d).rank() + c.block(&c.q0, d).rank())
}

/// The long exact sequence in `H01` of a `Λ(Q0)`-split short exact sequence,
/// with its connecting map of degree `(2,1)`.
#[derive(Clone, Debug)]
pub struct LesReport {
    pub region: Window,
    pub ha: Homology,
    pub hb: Homology,
    pub hc: Homology,
    pub f_star: GradedMap,
    pub g_star: GradedMap,
    pub delta: GradedMap,
    /// Degrees and slots where exactness fails.
    pub failures: Vec<String>,
}

impl LesReport {
    pub fn is_exact(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Computes the long exact sequence and certifies exactness by rank counts.
pub fn les_h01(
    a: &EModule,
    b: &EModule,
    c: &EModule,
    f: &GradedMap,
    g: &GradedMap,
) -> Result<LesReport> {
    let region = a.exact().intersect(&b.exact()).intersect(&c.exact());
    check_ses(a, b, c, f, g, region)?;
    if !is_lambda0_split(a, b, c, region) {
        return Err(Error::NotSplit("ranks of q0 do not add up".into()));
    }
    let (ha, hb, hc) = (a.h01(), b.h01(), c.h01());
    let f_star = induced_map(f, b, &ha, &hb)?;
    let g_star = induced_map(g, c, &hb, &hc)?;
    let mut blocks = BTreeMap::new();
    for d in hc.space.degrees() {
        let t = d + Q1;
        if !ha.region.contains(t) {
            continue;
        }
        let lift_sys = g
            .block_or_zero(d, &b.space, &c.space)
            .vstack(&b.block(&b.q0, d));
        let mut cols = Vec::new();
        for x in hc.representatives(d) {
            let rhs = x.concat(&BitVec::zeros(b.dim(d + Q0)));
            let y = lift_sys
                .solve(&rhs)
                .ok_or_else(|| Error::NotSplit(format!("class at {d} has no lift killed by q0")))?;
            let u = b.block(&b.q1, d).apply(&y);
            let z = f
                .block_or_zero(t, &a.space, &b.space)
                .solve(&u)
                .ok_or_else(|| {
                    Error::NotExact(format!("q1 of a lift at {d} is not in the image of A"))
                })?;
            cols.push(ha.class_of(t, &z).ok_or_else(|| {
                Error::Invalid(format!("connecting image at {t} is not a cycle"))
            })?);
        }
        blocks.insert(d, F2Matrix::from_cols(ha.dim(t), &cols));
    }
    let delta = GradedMap::from_blocks(Q1, blocks);
    let les_region = ha
        .region
        .intersect(&hb.region)
        .intersect(&hc.region)
        .intersect(&ha.region.shift(-Q1));
    let mut degs: Vec<BiDegree> = hb
        .space
        .degrees()
        .chain(hc.space.degrees())
        .chain(ha.space.degrees().map(|d| d - Q1))
        .collect();
    degs.extend(ha.space.degrees());
    degs.sort();
    degs.dedup();
    let mut failures = Vec::new();
    for d in degs.into_iter().filter(|d| les_region.contains(*d)) {
        let t = d + Q1;
        let fs = f_star.block_or_zero(d, &ha.space, &hb.space);
        let gs = g_star.block_or_zero(d, &hb.space, &hc.space);
        let dl = delta.block_or_zero(d, &hc.space, &ha.space);
        let fs_up = f_star.block_or_zero(t, &ha.space, &hb.space);
        if !gs.mul(&fs).is_zero() || gs.rank() + fs.rank() != hb.dim(d) {
            failures.push(format!("H01(B) at {d}"));
        }
        if !dl.mul(&gs).is_zero() || gs.rank() + dl.rank() != hc.dim(d) {
            failures.push(format!("H01(C) at {d}"));
        }
        if !fs_up.mul(&dl).is_zero() || dl.rank() + fs_up.rank() != ha.dim(t) {
            failures.push(format!("H01(A) at {t}"));
        }
    }
    Ok(LesReport {
        region: les_region,
        ha,
        hb,
        hc,
        f_star,
        g_star,
        delta,
        failures,
    })
}

/// `E` itself.
pub fn e_free() -> EModule {
    EModule::from_tables(
        "E",
        Window::everything(),
        &[("1", bd(0, 0)), ("Q0", Q0), ("Q1", Q1), ("Q0Q1", Q0 + Q1)],
        &[("1", &["Q0"]), ("Q1", &["Q0Q1"])],
        &[("1", &["Q1"]), ("Q0", &["Q0Q1"])],
    )
    .expect("E is valid")
}

/// The trivial module `F` in degree zero.
pub fn e_trivial() -> EModule {
    EModule::from_tables("F", Window::everything(), &[("1", bd(0, 0))], &[], &[]).expect("valid")
}

/// `Λ0 = Λ(Q0)`.
pub fn e_lambda0() -> EModule {
    EModule::from_tables(
        "Lambda0",
        Window::everything(),
        &[("1", bd(0, 0)), ("Q0", Q0)],
        &[("1", &["Q0"])],
        &[],
    )
    .expect("valid")
}

/// `Λ1 = Λ(Q1)`.
pub fn e_lambda1() -> EModule {
    EModule::from_tables(
        "Lambda1",
        Window::everything(),
        &[("1", bd(0, 0)), ("Q1", Q1)],
        &[],
        &[("1", &["Q1"])],
    )
    .expect("valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims(h: &Homology) -> Vec<(BiDegree, usize)> {
        h.dims().dims.into_iter().collect()
    }

    #[test]
    fn h01_of_basic_modules() {
        assert!(e_free().h01().space.is_zero());
        assert!(e_lambda1().h01().space.is_zero());
        assert_eq!(dims(&e_trivial().h01()), vec![(bd(0, 0), 1)]);
        assert_eq!(dims(&e_lambda0().h01()), vec![(Q0, 1)]);
        assert_eq!(e_lambda0().h01().space.names(Q0), &["Q0".to_string()]);
    }

    #[test]
    fn relative_projectives() {
        assert!(e_free().is_rel_projective());
        assert!(e_lambda1().is_rel_projective());
        assert!(!e_trivial().is_rel_projective());
        assert!(!e_lambda0().is_rel_projective());
    }

    #[test]
    fn tate_homology_is_shifted_h01() {
        for m in [e_trivial(), e_lambda0(), e_free(), e_lambda1()] {
            let h = m.h01().dims();
            for n in 1..4 {
                let r = m.rel_ext(n).unwrap().dims();
                assert!(
                    r.mismatches(&h.shift(Q1.scale(n as i32))).is_empty(),
                    "{} n={n}",
                    m.name()
                );
            }
        }
        assert_eq!(e_trivial().rel_ext(0).unwrap().total(), 1);
        assert_eq!(
            e_free().rel_ext(0).unwrap().space.names(Q0 + Q1),
            &["Q0Q1".to_string()]
        );
    }

    #[test]
    fn h01_dual_direct_matches_duality() {
        let l = EModule::direct_sum(
            "X",
            &[
                ("a", &e_lambda0()),
                ("b", &e_trivial().shift(bd(3, 2))),
                ("c", &e_free()),
            ],
        )
        .unwrap();
        for m in [e_trivial(), e_lambda0(), e_lambda1(), e_free(), l] {
            let direct = m.h01_dual().dims();
            assert!(
                direct.mismatches(&m.h01_dual_via_duality()).is_empty(),
                "{}",
                m.name()
            );
        }
        // Λ0 has H^01 in degree 0, H01 in degree (1,0)
        assert_eq!(dims(&e_lambda0().h01_dual()), vec![(bd(0, 0), 1)]);
    }

    #[test]
    fn dual_round_trip() {
        let m = e_free();
        assert_eq!(m.dual().dual(), m);
        assert_eq!(m.dual().space().names(bd(-3, -1)), &["~Q0Q1".to_string()]);
    }

    fn lambda1_sequence() -> (EModule, EModule, EModule, GradedMap, GradedMap) {
        let a = e_trivial().shift(Q1);
        let b = e_lambda1();
        let c = e_trivial();
        let f = GradedMap::from_images(a.space(), b.space(), BiDegree::ZERO, [("1", vec!["Q1"])])
            .unwrap();
        let g = GradedMap::from_images(b.space(), c.space(), BiDegree::ZERO, [("1", vec!["1"])])
            .unwrap();
        (a, b, c, f, g)
    }

    #[test]
    fn les_of_split_sequence_is_exact_with_nonzero_connecting_map() {
        let (a, b, c, f, g) = lambda1_sequence();
        let r = les_h01(&a, &b, &c, &f, &g).unwrap();
        assert!(r.is_exact(), "{:?}", r.failures);
        assert_eq!(r.delta.block(bd(0, 0)).map(|m| m.rank()), Some(1));
    }

    #[test]
    fn non_split_sequence_is_rejected() {
        let a = e_trivial().shift(Q0);
        let b = e_lambda0();
        let c = e_trivial();
        let f = GradedMap::from_images(a.space(), b.space(), BiDegree::ZERO, [("1", vec!["Q0"])])
            .unwrap();
        let g = GradedMap::from_images(b.space(), c.space(), BiDegree::ZERO, [("1", vec!["1"])])
            .unwrap();
        assert!(matches!(
            les_h01(&a, &b, &c, &f, &g),
            Err(Error::NotSplit(_))
        ));
    }

    #[test]
    fn non_exact_sequence_is_rejected() {
        let (a, b, c, f, _) = lambda1_sequence();
        let g = GradedMap::zero(BiDegree::ZERO);
        assert!(matches!(
            les_h01(&a, &b, &c, &f, &g),
            Err(Error::NotExact(_))
        ));
    }

    #[test]
    fn relation_failures_are_reported() {
        let r = EModule::from_tables(
            "bad",
            Window::everything(),
            &[("x", bd(0, 0)), ("y", Q0), ("z", Q1)],
            &[],
            &[("x", &["z"]), ("y", &[])],
        );
        assert!(r.is_ok());
        let r = EModule::from_tables(
            "bad",
            Window::everything(),
            &[("x", bd(0, 0)), ("y", Q0), ("z", Q1), ("w", Q0 + Q1)],
            &[("x", &["y"])],
            &[("x", &["z"]), ("z", &[]), ("y", &[])],
        );
        assert!(r.is_ok());
        let r = EModule::from_tables(
            "bad",
            Window::everything(),
            &[("x", bd(0, 0)), ("y", Q0), ("z", Q1), ("w", Q0 + Q1)],
            &[("x", &["y"])],
            &[("x", &["z"]), ("y", &["w"])],
        );
        assert!(matches!(r, Err(Error::Relation(_))));
    }
}
