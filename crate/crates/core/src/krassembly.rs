//! Assembly of `kR` of an elementary abelian 2-group from its pieces:
//! the `v₁`-torsion parts `F¹ = Im q1` and `F² = Sq²Sq²Sq² F` (with its
//! `Λ(v₁)` companion), and the associated graded of the `v₁`-filtration of
//! the cotorsion part, built from the closed form. Also the checks feeding
//! it: detection of height 1 on the Borel form, the map `t` on the free
//! part, and the comparison of brute-force `H01(R BV)` with the closed form.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::a1mod::{free_a1, reduce, std_bv, A1Module};
use crate::closedform::{borel_hv_a_action, borel_hv_closed, h01_pn_monomials, hv_closed, hv_dim};
use crate::emod::{EModule, Q1};
use crate::error::{Error, Result};
use crate::gflin::{BitVec, F2Matrix};
use crate::grmod::{
    bd, hom_space, unconstrained_hom_dim, BiDegree, DimTable, GradedMap, GradedSpace, OpSpace,
    Window,
};
use crate::rfun::apply_r;

/// Degree of the map `t` between the two `H01` terms.
pub const T_SHIFT: BiDegree = bd(3, 2);
/// Degree of `v₁`.
pub const V1: BiDegree = bd(1, 1);
/// Offset of `[Sq²Sq²Sq²x]` from a free generator `x`.
pub const FREE_TOP: BiDegree = bd(6, 0);
/// Offset of `[σ²Sq¹x]` from a free generator `x`.
pub const FREE_LOW: BiDegree = bd(3, -2);

fn check_rank(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::Invalid("rank must be at least 1".into()));
    }
    Ok(())
}

/// Truncation degree of `BV_n` large enough for `R(BV_n)` and its free part on `w`.
pub fn bv_top(w: Window) -> i32 {
    (w.m_hi + w.k_hi.max(0) + 4).max(w.m_hi + 8).max(8)
}

pub fn bv_module(n: u32, w: Window) -> A1Module {
    std_bv(n, bv_top(w))
}

/// The image of `q1` in an E-module, degree by degree, on its safe region.
#[derive(Clone, Debug)]
pub struct ImageQ1 {
    pub space: GradedSpace,
    pub region: Window,
    /// Row basis (in reduced echelon form) of the image at each degree.
    pub rows: BTreeMap<BiDegree, F2Matrix>,
    pub ambient: GradedSpace,
}

impl ImageQ1 {
    pub fn dims(&self) -> DimTable {
        DimTable::of_space(&self.space, self.region)
    }

    /// Whether the ambient vector `v` at `d` lies in the image.
    pub fn contains(&self, d: BiDegree, v: &BitVec) -> bool {
        match self.rows.get(&d) {
            Some(r) => {
                r.rank()
                    == r.vstack(&F2Matrix::from_rows(v.len(), vec![v.clone()]))
                        .rank()
            }
            None => v.is_zero(),
        }
    }
}

pub fn image_of_q1(e: &EModule) -> ImageQ1 {
    let region = e.safe(2, 1);
    let mut gens = Vec::new();
    let mut rows = BTreeMap::new();
    for d in region.degrees() {
        let img = e.block(e.q1(), d - Q1).image_basis();
        if img.nrows() == 0 {
            continue;
        }
        let names = e.space().names(d);
        for r in img.rows() {
            let lead = r.first_one().expect("nonzero echelon row");
            gens.push((d, format!("q1:{}", names[lead])));
        }
        rows.insert(d, img);
    }
    let space = GradedSpace::new(region, gens).expect("leading names are distinct");
    ImageQ1 {
        space,
        region,
        rows,
        ambient: e.space().clone(),
    }
}

/// `F¹(V) = Im q1` on `R(BV_n)`.
pub fn compute_f1(n: u32, w: Window) -> Result<ImageQ1> {
    check_rank(n)?;
    let r = apply_r(&bv_module(n, w), w)?;
    Ok(image_of_q1(&r.total))
}

/// Degrees of the generators of the free summands of `m`, sorted. Fails
/// when the reduction of `m` is not exact far enough up to place the free
/// classes of `H01` on `w`.
pub fn free_generators(m: &A1Module, w: Window) -> Result<Vec<i32>> {
    let red = reduce(m)?;
    let need = w.m_hi - FREE_LOW.m;
    if red.reduced.exact().m_hi < need {
        return Err(Error::Window(format!(
            "free summands of {} are only determined up to degree {}, need {need}",
            m.name(),
            red.reduced.exact().m_hi
        )));
    }
    let mut g = red.free_generators;
    g.sort_unstable();
    Ok(g)
}

fn f2_name(i: usize) -> String {
    format!("F2:Sq2Sq2Sq2.f{i}")
}

fn f2_companion_name(i: usize) -> String {
    format!("F2v:Sq2Sq2Sq2.f{i}")
}

fn low_name(i: usize) -> String {
    format!("s2Sq1.f{i}")
}

fn top_name(i: usize) -> String {
    format!("Sq2Sq2Sq2.f{i}")
}

/// `F²(V)`: one class at `g + (6,0)` per free generator `g`.
pub fn compute_f2(n: u32, w: Window) -> Result<GradedSpace> {
    check_rank(n)?;
    let gens = free_generators(&bv_module(n, w), w)?;
    Ok(f2_space(&gens, w, false))
}

fn f2_space(gens: &[i32], w: Window, doubled: bool) -> GradedSpace {
    let mut out = Vec::new();
    for (i, &g) in gens.iter().enumerate() {
        let d = FREE_TOP + bd(g, 0);
        out.push((d, f2_name(i)));
        if doubled {
            out.push((d - V1, f2_companion_name(i)));
        }
    }
    GradedSpace::new(w, out.into_iter().filter(|(d, _)| w.contains(*d))).expect("distinct names")
}

/// Outcome of the search for `F[a]`-linear self-maps of degree `(3,2)` of
/// the Borel closed form.
#[derive(Clone, Debug)]
pub struct BorelCertificate {
    pub n: u32,
    pub window: Window,
    /// Dimension of the `F[a]`-linear maps, restricted to the window.
    pub linear_dim: usize,
    /// Dimension of all graded maps of that degree on the window.
    pub unconstrained_dim: usize,
    /// A nonzero entry of some linear map: source degree, source and target class.
    pub witness: Option<(BiDegree, String, String)>,
}

impl BorelCertificate {
    pub fn certified(&self) -> bool {
        self.linear_dim == 0 && self.unconstrained_dim > 0
    }
}

/// Computes the `F[a]`-linear maps of degree `(3,2)` of the Borel closed
/// form to itself. Maps are solved on the window enlarged by 4 in the twist
/// and then restricted, so maps that exist only because the `a`-action
/// leaves the window are not counted.
pub fn detection_h1_borel(n: u32, w: Window) -> Result<BorelCertificate> {
    check_rank(n)?;
    let pad = w.grow(0, 4);
    let sp = borel_hv_closed(n, pad);
    let a = borel_hv_a_action(n, pad);
    let ops = [&a];
    let o = OpSpace {
        space: &sp,
        ops: &ops,
    };
    let homs = hom_space(o, o, T_SHIFT, None);
    let inside: Vec<BiDegree> = w
        .degrees()
        .into_iter()
        .filter(|d| w.contains(*d + T_SHIFT))
        .collect();
    let len: usize = inside
        .iter()
        .map(|d| sp.dim(*d) * sp.dim(*d + T_SHIFT))
        .sum();
    let mut restricted = Vec::new();
    let mut witness = None;
    for h in &homs {
        let mut v = BitVec::zeros(len);
        let mut off = 0;
        for &d in &inside {
            let b = h.block_or_zero(d, &sp, &sp);
            for i in 0..b.nrows() {
                for j in 0..b.ncols() {
                    if b.get(i, j) {
                        v.set(off + i * b.ncols() + j, true);
                        if witness.is_none() {
                            witness =
                                Some((d, sp.names(d)[j].clone(), sp.names(d + T_SHIFT)[i].clone()));
                        }
                    }
                }
            }
            off += b.nrows() * b.ncols();
        }
        restricted.push(v);
    }
    let linear_dim = F2Matrix::from_rows(len, restricted).rank();
    let spw = borel_hv_closed(n, w);
    let unconstrained_dim = unconstrained_hom_dim(&spw, &spw, T_SHIFT, None);
    Ok(BorelCertificate {
        n,
        window: w,
        linear_dim,
        unconstrained_dim,
        witness: witness.filter(|_| linear_dim > 0),
    })
}

/// The map `t` on the closed form of the non-free part plus the two
/// classes `[σ²Sq¹x]`, `[Sq²Sq²Sq²x]` of each free generator `x`.
#[derive(Clone, Debug)]
pub struct TMap {
    pub window: Window,
    pub space: GradedSpace,
    pub map: GradedMap,
    pub free_generators: Vec<i32>,
}

impl TMap {
    pub fn squares_to_zero(&self) -> bool {
        self.map.then(&self.map, &self.space).is_zero()
    }

    /// Whether `t` vanishes on every class of the non-free part.
    pub fn zero_off_free_part(&self) -> bool {
        self.map.blocks().all(|(d, b)| {
            let names = self.space.names(d);
            (0..b.ncols())
                .all(|j| names[j].starts_with(&"s2Sq1.".to_string()) || b.col(j).is_zero())
        })
    }

    /// Degrees where `Ker t / Im t` on the free-part classes is nonzero,
    /// among degrees `d` with `d ± (3,2)` in the window.
    pub fn free_part_defects(&self) -> Vec<BiDegree> {
        let w = self.window;
        let free = |d: BiDegree| -> Vec<usize> {
            let names = self.space.names(d);
            (0..names.len())
                .filter(|&j| names[j].contains(".f"))
                .collect()
        };
        let mut out = Vec::new();
        for d in w.degrees() {
            if !(w.contains(d + T_SHIFT) && w.contains(d - T_SHIFT)) {
                continue;
            }
            let here = free(d);
            if here.is_empty() {
                continue;
            }
            let out_block = self.map.block_or_zero(d, &self.space, &self.space);
            let up = free(d + T_SHIFT);
            let rank_out = out_block.select(&up, &here).rank();
            let e = d - T_SHIFT;
            let in_block = self.map.block_or_zero(e, &self.space, &self.space);
            let rank_in = in_block.select(&here, &free(e)).rank();
            if here.len() != rank_out + rank_in {
                out.push(d);
            }
        }
        out
    }
}

pub fn t_map(n: u32, w: Window) -> Result<TMap> {
    check_rank(n)?;
    let free_generators = free_generators(&bv_module(n, w), w)?;
    let hv = hv_closed(n, w);
    let mut gens: Vec<(BiDegree, String)> = hv.iter().map(|(d, s)| (d, s.clone())).collect();
    for (i, &g) in free_generators.iter().enumerate() {
        gens.push((bd(g, 0) + FREE_LOW, low_name(i)));
        gens.push((bd(g, 0) + FREE_TOP, top_name(i)));
    }
    let space = GradedSpace::new(w, gens.into_iter().filter(|(d, _)| w.contains(*d)))?;
    let names: Vec<(String, String)> = (0..free_generators.len())
        .map(|i| (low_name(i), top_name(i)))
        .collect();
    let lookup = space.lookup();
    let images = names
        .iter()
        .filter(|(s, t)| lookup.contains_key(s) && lookup.contains_key(t))
        .map(|(s, t)| (s.as_str(), vec![t.as_str()]));
    let map = GradedMap::from_images(&space, &space, T_SHIFT, images)?;
    Ok(TMap {
        window: w,
        space,
        map,
        free_generators,
    })
}

/// Brute-force `H01(R BV_n)` against the closed form of its non-free part
/// plus two classes per free generator.
#[derive(Clone, Debug)]
pub struct HvCrossCheck {
    pub n: u32,
    pub region: Window,
    pub brute: DimTable,
    pub closed: DimTable,
    pub free_generators: Vec<i32>,
    /// Brute-force `H01(R F)` of the free part alone.
    pub free_brute: DimTable,
    pub free_closed: DimTable,
    pub mismatches: Vec<(BiDegree, usize, usize)>,
    pub free_mismatches: Vec<(BiDegree, usize, usize)>,
}

impl HvCrossCheck {
    pub fn agrees(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn free_part_matches(&self) -> bool {
        self.free_mismatches.is_empty()
    }

    /// Twists carrying free-part classes.
    pub fn free_twists(&self) -> Vec<i32> {
        let mut t: Vec<i32> = self.free_brute.dims.keys().map(|d| d.k).collect();
        t.sort_unstable();
        t.dedup();
        t
    }
}

/// Number of free-part classes of `H01` at `d`.
pub fn free_class_count(gens: &[i32], d: BiDegree) -> usize {
    gens.iter()
        .filter(|&&g| bd(g, 0) + FREE_TOP == d || bd(g, 0) + FREE_LOW == d)
        .count()
}

pub fn cross_check_hv(n: u32, w: Window) -> Result<HvCrossCheck> {
    check_rank(n)?;
    if n > 2 {
        return Err(Error::Invalid(format!(
            "rank {n} is too expensive; at most 2"
        )));
    }
    if w.is_empty() {
        let empty = DimTable::new(w, Vec::new());
        return Ok(HvCrossCheck {
            n,
            region: w,
            brute: empty.clone(),
            closed: empty.clone(),
            free_generators: Vec::new(),
            free_brute: empty.clone(),
            free_closed: empty,
            mismatches: Vec::new(),
            free_mismatches: Vec::new(),
        });
    }
    let m = bv_module(n, w);
    let h = apply_r(&m, w)?.total.h01();
    let free_generators = free_generators(&m, w)?;
    let labelled: Vec<(String, i32)> = free_generators
        .iter()
        .enumerate()
        .map(|(i, g)| (format!("f{i}"), *g))
        .collect();
    let hf = apply_r(&free_a1("F", &labelled), w)?.total.h01();
    let region = h.region.intersect(&hf.region);
    let brute = h.dims().restrict(region);
    let closed = DimTable::new(
        region,
        region
            .degrees()
            .into_iter()
            .map(|d| (d, hv_dim(n, d) + free_class_count(&free_generators, d)))
            .collect::<Vec<_>>(),
    );
    let free_brute = hf.dims().restrict(region);
    let free_closed = DimTable::new(
        region,
        region
            .degrees()
            .into_iter()
            .map(|d| (d, free_class_count(&free_generators, d)))
            .collect::<Vec<_>>(),
    );
    let mismatches = brute.mismatches(&closed);
    let free_mismatches = free_brute.mismatches(&free_closed);
    Ok(HvCrossCheck {
        n,
        region,
        brute,
        closed,
        free_generators,
        free_brute,
        free_closed,
        mismatches,
        free_mismatches,
    })
}

/// Which summand of the splitting a class belongs to.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Part {
    F1,
    F2,
    /// Layer `j` of the associated graded of the cotorsion part.
    Layer(usize),
}

impl Part {
    pub fn tag(self) -> String {
        match self {
            Part::F1 => "F1".into(),
            Part::F2 => "F2".into(),
            Part::Layer(j) => format!("L{j}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Annotation {
    pub degree: BiDegree,
    pub class: String,
    pub note: String,
}

/// The assembled description of `kR` of `BV_n` on a window, as the
/// associated graded of the `v₁`-filtration (extensions are not determined).
#[derive(Clone, Debug)]
pub struct KrReport {
    pub n: u32,
    pub window: Window,
    /// Region where the brute-force `F¹` is exact.
    pub region: Window,
    pub f1: GradedSpace,
    /// `F²` together with its `Λ(v₁)` companions.
    pub f2: GradedSpace,
    pub free_generators: Vec<i32>,
    pub cotorsion_layers: Vec<GradedSpace>,
    pub annotations: Vec<Annotation>,
}

/// Layer `j`: the closed form of the non-free part moved up by `j·(1,1)`.
pub fn cotorsion_layer(n: u32, j: usize, w: Window) -> GradedSpace {
    let s = V1.scale(j as i32);
    let base = hv_closed(n, w.shift(-s));
    GradedSpace::new(
        w,
        base.iter().map(|(d, name)| (d + s, format!("L{j}:{name}"))),
    )
    .expect("distinct names")
}

/// `a` on a class `i{i}c{c}:{monomial}` of the closed form at `d`, as the
/// name of the image class (without layer prefix), or `None` for zero.
fn closed_a_image(d: BiDegree, name: &str) -> Option<String> {
    let (tag, mono) = name.split_once(':')?;
    let i: i32 = tag.get(1..tag.find('c')?)?.parse().ok()?;
    let x = h01_pn_monomials(i, d)
        .into_iter()
        .find(|x| x.to_string() == mono)?;
    let y = x.times_a()?;
    let up = d + bd(0, 1);
    h01_pn_monomials(i, up)
        .into_iter()
        .any(|z| z == y)
        .then(|| format!("{tag}:{y}"))
}

pub fn assemble_kr(n: u32, w: Window, max_layer: usize) -> Result<KrReport> {
    check_rank(n)?;
    let m = bv_module(n, w);
    let f1q = image_of_q1(&apply_r(&m, w)?.total);
    let free_generators = free_generators(&m, w)?;
    let f2 = f2_space(&free_generators, w, true);
    let cotorsion_layers: Vec<GradedSpace> =
        (0..=max_layer).map(|j| cotorsion_layer(n, j, w)).collect();
    let mut annotations = Vec::new();
    let mut note = |degree: BiDegree, class: &str, text: String| {
        annotations.push(Annotation {
            degree,
            class: class.to_string(),
            note: text,
        })
    };
    for (d, c) in f1q.space.iter() {
        note(d, c, "v1-torsion order 1".into());
    }
    for (i, &g) in free_generators.iter().enumerate() {
        let d = bd(g, 0) + FREE_TOP;
        if w.contains(d) {
            note(
                d,
                &f2_name(i),
                format!(
                    "v1-torsion order 2; Lambda(v1) companion {}",
                    f2_companion_name(i)
                ),
            );
        }
        if w.contains(d - V1) {
            note(
                d - V1,
                &f2_companion_name(i),
                format!("v1-torsion order 1; Lambda(v1) companion of {}", f2_name(i)),
            );
        }
    }
    for (j, layer) in cotorsion_layers.iter().enumerate() {
        let s = V1.scale(j as i32);
        let prefix = format!("L{j}:");
        for (d, c) in layer.iter() {
            let base = c.strip_prefix(&prefix).expect("layer prefix");
            let a = match closed_a_image(d - s, base) {
                Some(y) if w.contains(d + bd(0, 1)) => format!("a -> {prefix}{y}"),
                Some(_) => "a -> outside window".to_string(),
                None => "a -> 0".to_string(),
            };
            note(
                d,
                c,
                format!("{a}; v1 maps onto the layer {} pattern", j + 1),
            );
        }
    }
    Ok(KrReport {
        n,
        window: w,
        region: f1q.region.intersect(&w),
        f1: f1q.space,
        f2,
        free_generators,
        cotorsion_layers,
        annotations,
    })
}

impl KrReport {
    pub fn parts(&self) -> Vec<(Part, &GradedSpace)> {
        let mut out = vec![(Part::F1, &self.f1), (Part::F2, &self.f2)];
        out.extend(
            self.cotorsion_layers
                .iter()
                .enumerate()
                .map(|(j, l)| (Part::Layer(j), l)),
        );
        out
    }

    /// Total dimension at each degree of the region, summed over the parts.
    pub fn total_dims(&self) -> DimTable {
        let dims = self
            .region
            .degrees()
            .into_iter()
            .map(|d| (d, self.parts().iter().map(|(_, s)| s.dim(d)).sum()));
        DimTable::new(self.region, dims.collect::<Vec<_>>())
    }

    /// Whether layer `j+1` is layer `j` moved by `(1,1)`, class by class.
    pub fn layers_periodic(&self) -> bool {
        let w = self.window;
        self.cotorsion_layers
            .windows(2)
            .enumerate()
            .all(|(j, pair)| {
                let (lo, hi) = (&pair[0], &pair[1]);
                w.degrees()
                    .into_iter()
                    .filter(|d| w.contains(*d + V1))
                    .all(|d| {
                        let a: Vec<&str> = lo
                            .names(d)
                            .iter()
                            .map(|s| s.split_once(':').expect("prefix").1)
                            .collect();
                        let b: Vec<&str> = hi
                            .names(d + V1)
                            .iter()
                            .map(|s| s.split_once(':').expect("prefix").1)
                            .collect();
                        debug_assert!(lo.names(d).iter().all(|s| s.starts_with(&format!("L{j}:"))));
                        a == b
                    })
            })
    }

    /// Whether each `F²` class and its companion at `-(1,1)` come in pairs
    /// wherever both degrees lie in the window.
    pub fn f2_doubled(&self) -> bool {
        let w = self.window;
        let lookup = self.f2.lookup();
        (0..self.free_generators.len()).all(|i| {
            let top = lookup.get(&f2_name(i)).map(|x| x.0);
            let low = lookup.get(&f2_companion_name(i)).map(|x| x.0);
            match (top, low) {
                (Some(t), Some(l)) => l == t - V1,
                (Some(t), None) => !w.contains(t - V1),
                (None, Some(l)) => !w.contains(l + V1),
                (None, None) => true,
            }
        })
    }

    /// Whether class names are distinct across all parts.
    pub fn parts_disjoint(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.parts()
            .iter()
            .all(|(_, s)| s.iter().all(|(_, n)| seen.insert(n.clone())))
    }

    /// Whether every `v₁`-torsion annotation has order 1 or 2.
    pub fn torsion_orders_ok(&self) -> bool {
        self.annotations
            .iter()
            .filter_map(|a| a.note.split("v1-torsion order ").nth(1))
            .all(|rest| matches!(rest.chars().next(), Some('1') | Some('2')))
    }

    /// Compares, at each degree of `check.region ∩ region`, the layer-0 part
    /// plus the free-part classes with a dimension table of `H01(R BV_n)`.
    pub fn column_mismatches(
        &self,
        table: &DimTable,
        region: Window,
    ) -> Vec<(BiDegree, usize, usize)> {
        let r = region.intersect(&self.window);
        let layer0 = &self.cotorsion_layers[0];
        r.degrees()
            .into_iter()
            .filter_map(|d| {
                let ours = layer0.dim(d) + free_class_count(&self.free_generators, d);
                let theirs = table.get(d);
                (ours != theirs).then_some((d, theirs, ours))
            })
            .collect()
    }

    pub fn annotations_at(&self, d: BiDegree, class: &str) -> Vec<&str> {
        self.annotations
            .iter()
            .filter(|a| a.degree == d && a.class == class)
            .map(|a| a.note.as_str())
            .collect()
    }

    /// One row per degree and part: `m, k, dim, part, annotations`.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("m\tk\tdim\tpart\tannotations\n");
        let mut notes: BTreeMap<(BiDegree, &str), Vec<&str>> = BTreeMap::new();
        for a in &self.annotations {
            notes
                .entry((a.degree, a.class.as_str()))
                .or_default()
                .push(&a.note);
        }
        for d in self.window.degrees() {
            for (part, sp) in self.parts() {
                if part == Part::F1 && !self.region.contains(d) {
                    continue;
                }
                let names = sp.names(d);
                if names.is_empty() {
                    continue;
                }
                let ann: Vec<String> = names
                    .iter()
                    .map(|c| {
                        let ns = notes
                            .get(&(d, c.as_str()))
                            .map(|v| v.join(", "))
                            .unwrap_or_default();
                        format!("{c} [{ns}]")
                    })
                    .collect();
                writeln!(
                    s,
                    "{}\t{}\t{}\t{}\t{}",
                    d.m,
                    d.k,
                    names.len(),
                    part.tag(),
                    ann.join("; ")
                )
                .expect("string write");
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closedform::h01_pn_dim;
    use crate::coeff::SIGMA_INV;
    use crate::rfun::r_name;

    const W: Window = Window::new(-10, 10, -5, 5);

    #[test]
    fn f1_contains_q1_of_generator() {
        let f1 = compute_f1(1, W).unwrap();
        let d = bd(3, 1);
        let v = BitVec::unit(
            f1.ambient.dim(d),
            f1.ambient
                .index_of(d, &r_name(SIGMA_INV, "b1:x^4"))
                .unwrap(),
        );
        assert!(f1.contains(d, &v));
        assert!(f1.dims().get(d) >= 1);
    }

    #[test]
    fn f2_of_rank_one_is_zero() {
        assert!(compute_f2(1, W).unwrap().is_zero());
        let t = t_map(1, W).unwrap();
        assert!(t.map.is_zero());
    }

    #[test]
    fn f2_of_rank_two_counts_free_generators() {
        let w = Window::new(-12, 16, -4, 4);
        let f2 = compute_f2(2, w).unwrap();
        let gens = free_generators(&bv_module(2, w), w).unwrap();
        assert!(!gens.is_empty());
        for d in w.degrees() {
            let want = gens.iter().filter(|&&g| bd(g, 0) + FREE_TOP == d).count();
            assert_eq!(f2.dim(d), want, "{d}");
        }
    }

    #[test]
    fn t_map_squares_to_zero_and_pairs_free_classes() {
        let w = Window::new(-12, 16, -6, 6);
        let t = t_map(2, w).unwrap();
        assert!(t.squares_to_zero());
        assert!(t.zero_off_free_part());
        assert!(t.free_part_defects().is_empty());
    }

    #[test]
    fn borel_rank_one_certifies() {
        let c = detection_h1_borel(1, W).unwrap();
        assert!(c.certified(), "{c:?}");
    }

    #[test]
    fn report_invariants_rank_one() {
        let r = assemble_kr(1, W, 2).unwrap();
        assert!(r.layers_periodic());
        assert!(r.f2_doubled());
        assert!(r.parts_disjoint());
        assert!(r.torsion_orders_ok());
        for m in W.m_lo..=W.m_hi {
            let d = bd(m, 0);
            assert_eq!(r.cotorsion_layers[0].dim(d), h01_pn_dim(1, d));
        }
        let tot = r.total_dims();
        for d in r.region.degrees() {
            let sum: usize = r.parts().iter().map(|(_, s)| s.dim(d)).sum();
            assert_eq!(tot.get(d), sum);
        }
        assert!(r.to_tsv().lines().count() > 1);
    }

    #[test]
    fn empty_window_cross_check_is_vacuous() {
        let c = cross_check_hv(1, Window::new(1, 0, 1, 0)).unwrap();
        assert!(c.agrees());
    }
}
