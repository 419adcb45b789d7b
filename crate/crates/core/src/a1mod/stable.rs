//! Stable-category operations: splitting off free summands, minimal free
//! covers and loop modules, and evidence for stable equivalence.

use std::collections::{BTreeMap, HashMap};

use super::{free_a1, full_line, named_rows, z, A1Module, Margolis};
use crate::error::{Error, Result};
use crate::gflin::{Basis, BitVec, F2Matrix, Subquotient};
use crate::grmod::{
    hom_space, shift_end, solve_hom_with_values, DimTable, GradedMap, OpSpace, Window,
};

/// A module with free summands removed, and the degrees of their generators.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub reduced: A1Module,
    pub free_generators: Vec<i32>,
}

/// Replaces the listed degrees of `m` by subspaces (row bases in old
/// coordinates). The subspaces must form a submodule.
/// Also returns the inclusion into `m`.
fn submodule(
    m: &A1Module,
    name: &str,
    subspaces: &BTreeMap<i32, F2Matrix>,
    exact: Window,
) -> Result<(A1Module, GradedMap)> {
    let mut gens = Vec::new();
    let mut ids: BTreeMap<(i32, usize), usize> = BTreeMap::new();
    // per degree: basis used for coordinates, as a list of old-coordinate vectors
    let mut bases: BTreeMap<i32, Basis> = BTreeMap::new();
    for d in m.space().degrees() {
        let names = m.space().names(d);
        match subspaces.get(&d.m) {
            Some(rows) => {
                for (j, (_, n)) in named_rows(rows, names).into_iter().enumerate() {
                    ids.insert((d.m, j), gens.len());
                    gens.push((d.m, n));
                }
                bases.insert(d.m, Basis::new(rows.clone()));
            }
            None => {
                for (j, n) in names.iter().enumerate() {
                    ids.insert((d.m, j), gens.len());
                    gens.push((d.m, n.clone()));
                }
            }
        }
    }
    let by_id: Vec<(i32, usize)> = {
        let mut v = vec![(0, 0); gens.len()];
        for (k, id) in &ids {
            v[*id] = *k;
        }
        v
    };
    let vector_of = |d: i32, j: usize| -> BitVec {
        match bases.get(&d) {
            Some(b) => b.vectors().row(j).clone(),
            None => BitVec::unit(m.dim(d), j),
        }
    };
    let act = |op: u8, id: usize| -> Result<Vec<usize>> {
        let (d, j) = by_id[id];
        let t = d + op as i32;
        let img = m.sq(op).apply(z(d), &vector_of(d, j), m.dim(t));
        let coords = match bases.get(&t) {
            Some(b) => b
                .coords(&img)
                .ok_or_else(|| Error::Invalid("subspaces do not form a submodule".into()))?,
            None => img,
        };
        Ok(coords.ones().map(|i| ids[&(t, i)]).collect())
    };
    // evaluate eagerly so failures surface as errors
    let mut s1 = Vec::with_capacity(gens.len());
    let mut s2 = Vec::with_capacity(gens.len());
    for id in 0..gens.len() {
        s1.push(act(1, id)?);
        s2.push(act(2, id)?);
    }
    let id_of_name: HashMap<String, usize> = gens
        .iter()
        .enumerate()
        .map(|(i, (_, n))| (n.clone(), i))
        .collect();
    let sub = A1Module::from_ids(name, exact, gens, &|i| s1[i].clone(), &|i| s2[i].clone())?;
    let mut inc = BTreeMap::new();
    for d in sub.space().degrees() {
        let cols: Vec<BitVec> = sub
            .space()
            .names(d)
            .iter()
            .map(|n| {
                let (dd, j) = by_id[id_of_name[n]];
                vector_of(dd, j)
            })
            .collect();
        inc.insert(d, F2Matrix::from_cols(m.dim(d.m), &cols));
    }
    Ok((sub, GradedMap::from_blocks(z(0), inc)))
}

fn free_ops(m: &A1Module) -> [&GradedMap; 2] {
    [m.sq1(), m.sq2()]
}

/// Splits off every free summand. Truncated free summands near an end of
/// the exact range cannot be detected, so the exact range shrinks by 6 at
/// each finite end.
pub fn reduce(m: &A1Module) -> Result<Reduction> {
    let mut cur = m.clone();
    let mut free_generators = Vec::new();
    let a1 = free_a1("A1", &[("g".to_string(), 0)]);
    loop {
        let theta = cur.theta();
        let found = theta.blocks().find_map(|(d, b)| {
            (0..b.ncols())
                .find(|&j| !b.col(j).is_zero())
                .map(|j| (d.m, j))
        });
        let Some((g, j)) = found else { break };
        let free = a1.shift(g);
        let (ops_a, ops_f) = (free_ops(&cur), free_ops(&free));
        let pin = BitVec::unit(1, 0);
        let retraction = solve_hom_with_values(
            OpSpace {
                space: cur.space(),
                ops: &ops_a,
            },
            OpSpace {
                space: free.space(),
                ops: &ops_f,
            },
            z(0),
            Window::line(g, g + 6),
            &[(z(g), j, pin)],
        )
        .ok_or_else(|| {
            Error::Invalid(format!(
                "{}: no retraction onto free summand at {g}",
                cur.name()
            ))
        })?;
        let mut subspaces = BTreeMap::new();
        for d in g..=g + 6 {
            if cur.dim(d) == 0 {
                continue;
            }
            let block = retraction.block_or_zero(z(d), cur.space(), free.space());
            subspaces.insert(d, block.kernel_basis());
        }
        let name = cur.name().to_string();
        let exact = cur.exact();
        cur = submodule(&cur, &name, &subspaces, exact)?.0;
        free_generators.push(g);
    }
    let e = m.exact();
    let exact = Window::line(shift_end(e.m_lo, 6), shift_end(e.m_hi, -6));
    Ok(Reduction {
        reduced: cur.with_exact(exact).with_name(format!("red {}", m.name())),
        free_generators,
    })
}

/// A minimal free cover `F → M` and its kernel `ΩM`.
#[derive(Clone, Debug)]
pub struct CoverAndLoop {
    pub cover: A1Module,
    pub generators: Vec<(String, i32)>,
    /// The cover map as a graded map `F → M`.
    pub epi: GradedMap,
    pub loop_module: A1Module,
    /// Inclusion `ΩM → F`.
    pub inclusion: GradedMap,
}

/// Minimal free cover and loop module of a reduced module.
pub fn proj_cover_and_loop(m: &A1Module) -> Result<CoverAndLoop> {
    if !m.is_reduced() {
        return Err(Error::NotReduced(format!("{} has Sq2Sq2Sq2 ≠ 0", m.name())));
    }
    // generators: a complement of Sq1 M + Sq2 M in each degree, chosen among basis vectors
    let mut generators = Vec::new();
    let mut gen_vectors = Vec::new();
    for d in m.space().degrees() {
        let n = m.space().dim(d);
        let im1 = m.sq1().block_or_zero(d - z(1), m.space(), m.space());
        let im2 = m.sq2().block_or_zero(d - z(2), m.space(), m.space());
        let decomposables = im1.hstack(&im2).image_basis();
        let sq = Subquotient::new(&F2Matrix::identity(n), &decomposables);
        for r in sq.representatives().rows() {
            let j = r.first_one().expect("unit vector");
            generators.push((m.space().names(d)[j].clone(), d.m));
            gen_vectors.push((d.m, r.clone()));
        }
    }
    let cover = free_a1(&format!("F({})", m.name()), &generators);
    // epi: word.gen ↦ word applied to the generator
    let mut blocks: BTreeMap<i32, F2Matrix> = BTreeMap::new();
    for d in cover.space().degrees() {
        blocks.insert(d.m, F2Matrix::zeros(m.dim(d.m), cover.dim(d.m)));
    }
    for ((label, _), (g, v)) in generators.iter().zip(&gen_vectors) {
        for (w, ops, dw) in super::A1_WORDS {
            let (t, img) = m.apply_ops(ops, *g, v);
            debug_assert_eq!(t, g + dw);
            let col = cover
                .space()
                .index_of(z(t), &format!("{w}.{label}"))
                .expect("cover basis");
            let b = blocks.get_mut(&t).expect("degree present");
            for i in img.ones() {
                b.set(i, col, true);
            }
        }
    }
    let epi = GradedMap::from_blocks(
        z(0),
        blocks.iter().map(|(d, b)| (z(*d), b.clone())).collect(),
    );
    let mut subspaces = BTreeMap::new();
    for (d, b) in &blocks {
        subspaces.insert(*d, b.kernel_basis());
    }
    let e = m.exact();
    let exact = Window::line(shift_end(e.m_lo, 8), e.m_hi);
    let (loop_module, inclusion) = submodule(&cover, &format!("Ω{}", m.name()), &subspaces, exact)?;
    Ok(CoverAndLoop {
        cover,
        generators,
        epi,
        loop_module,
        inclusion,
    })
}

/// `Ω^n M` in the stable category, reduced; negative `n` dualizes, loops, dualizes.
pub fn loop_power(m: &A1Module, n: i32) -> Result<A1Module> {
    if n < 0 {
        return Ok(loop_power(&m.dual(), -n)?
            .dual()
            .with_name(format!("Ω^{n}{}", m.name())));
    }
    let mut cur = reduce(m)?.reduced;
    for _ in 0..n {
        cur = proj_cover_and_loop(&cur)?.loop_module;
        if !cur.is_reduced() {
            cur = reduce(&cur)?.reduced;
        }
    }
    Ok(cur.with_name(format!("Ω^{n}{}", m.name())))
}

/// Comparison of two modules' stable invariants on their common safe region.
#[derive(Clone, Debug)]
pub struct StableEvidence {
    pub region: Window,
    pub reduced_dims_match: bool,
    pub q0_match: bool,
    pub q1_match: bool,
    /// Outcome of an exhaustive isomorphism search between the reduced parts,
    /// when both are genuinely finite and small enough.
    pub isomorphic: Option<bool>,
    pub detail: Vec<String>,
}

impl StableEvidence {
    pub fn consistent(&self) -> bool {
        self.reduced_dims_match && self.q0_match && self.q1_match && self.isomorphic != Some(false)
    }
}

/// Compares reduced dimensions and Margolis homologies of `m` and `n`.
/// Exhaustive isomorphism search runs when the hom space has at most
/// `iso_bound` basis maps.
pub fn stable_evidence(m: &A1Module, n: &A1Module, iso_bound: usize) -> Result<StableEvidence> {
    let rm = reduce(m)?.reduced;
    let rn = reduce(n)?.reduced;
    let region = rm.exact().intersect(&rn.exact());
    let mut detail = Vec::new();
    let mut cmp = |label: &str, a: DimTable, b: DimTable| -> bool {
        let mism = a.mismatches(&b);
        for (d, x, y) in mism.iter().take(5) {
            detail.push(format!("{label} differs at {}: {x} vs {y}", d.m));
        }
        mism.is_empty()
    };
    let reduced_dims_match = cmp(
        "reduced dimension",
        rm.dims().restrict(region),
        rn.dims().restrict(region),
    );
    let q0_match = cmp(
        "Q0 homology",
        rm.margolis(Margolis::Q0),
        rn.margolis(Margolis::Q0),
    );
    let q1_match = cmp(
        "Q1 homology",
        rm.margolis(Margolis::Q1),
        rn.margolis(Margolis::Q1),
    );
    let finite = rm.exact() == full_line() && rn.exact() == full_line();
    let isomorphic = if finite && reduced_dims_match {
        find_isomorphism(&rm, &rn, iso_bound)
    } else {
        None
    };
    Ok(StableEvidence {
        region,
        reduced_dims_match,
        q0_match,
        q1_match,
        isomorphic,
        detail,
    })
}

/// Searches the degree-0 hom space for a bijective module map. `None` when
/// the hom space is larger than `bound`.
pub fn find_isomorphism(a: &A1Module, b: &A1Module, bound: usize) -> Option<bool> {
    if a.dims().dims != b.dims().dims {
        return Some(false);
    }
    let (oa, ob) = (free_ops(a), free_ops(b));
    let homs = hom_space(
        OpSpace {
            space: a.space(),
            ops: &oa,
        },
        OpSpace {
            space: b.space(),
            ops: &ob,
        },
        z(0),
        None,
    );
    if homs.len() > bound {
        return None;
    }
    let count = 1u64 << homs.len();
    for mask in 1..count {
        let mut f = GradedMap::zero(z(0));
        for (i, h) in homs.iter().enumerate() {
            if mask & (1 << i) != 0 {
                f = f.add(h);
            }
        }
        let bijective = a.space().degrees().all(|d| {
            let blk = f.block_or_zero(d, a.space(), b.space());
            blk.nrows() == blk.ncols() && blk.rank() == blk.ncols()
        });
        if bijective {
            return Some(true);
        }
    }
    Some(a.total_dim() == 0)
}

/// Whether `a` is isomorphic to `Σ^shift b` by some map found by search.
pub fn isomorphic_up_to_shift(
    a: &A1Module,
    b: &A1Module,
    shift: i32,
    bound: usize,
) -> Option<bool> {
    find_isomorphism(a, &b.shift(shift), bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::a1mod::{std_a1, std_p, std_pn, std_trivial};

    #[test]
    fn reduce_free_module_to_zero() {
        let r = reduce(&std_a1()).unwrap();
        assert_eq!(r.reduced.total_dim(), 0);
        assert_eq!(r.free_generators, vec![0]);
    }

    #[test]
    fn reduce_keeps_reduced_module() {
        let p = std_p(20);
        let r = reduce(&p).unwrap();
        assert!(r.free_generators.is_empty());
        assert_eq!(r.reduced.total_dim(), p.total_dim());
    }

    #[test]
    fn loop_of_trivial_module() {
        // ΩF is the augmentation ideal of A(1): dimension 7
        let c = proj_cover_and_loop(&std_trivial()).unwrap();
        assert_eq!(c.loop_module.total_dim(), 7);
        assert_eq!(c.generators, vec![("1".to_string(), 0)]);
    }

    #[test]
    fn non_reduced_input_rejected() {
        assert!(matches!(
            proj_cover_and_loop(&std_a1()),
            Err(Error::NotReduced(_))
        ));
    }

    #[test]
    fn loop_of_pn_is_shifted_next() {
        // ΩP_n ≃ ΣP_{n+1}
        for n in 0..4 {
            let l = loop_power(&std_pn(n, 40), 1).unwrap();
            let target = std_pn(n + 1, 41).shift(1);
            let ev = stable_evidence(&l, &target, 0).unwrap();
            assert!(ev.consistent(), "n = {n}: {:?}", ev.detail);
        }
    }

    #[test]
    fn dual_of_a1_is_shifted_a1() {
        let a = std_a1();
        assert_eq!(find_isomorphism(&a.dual(), &a.shift(-6), 16), Some(true));
        assert_eq!(find_isomorphism(&a.dual(), &a.shift(-5), 16), Some(false));
    }

    #[test]
    fn inverse_loop_of_p0_is_desuspended_p3() {
        let l = loop_power(&std_pn(0, 40), -1).unwrap();
        let at = |s: i32| {
            stable_evidence(&l, &std_pn(3, 60).shift(s), 0)
                .unwrap()
                .consistent()
        };
        assert!(at(-9));
        assert!(!at(-8));
        assert!(!at(-10));
    }

    #[test]
    fn cover_sequence_composes_to_zero() {
        let p = std_pn(1, 24);
        let c = proj_cover_and_loop(&p).unwrap();
        let comp = c.inclusion.then(&c.epi, c.cover.space());
        assert!(comp.is_zero());
        for d in c.cover.space().degrees().filter(|d| d.m <= 24) {
            let e = c.epi.block_or_zero(d, c.cover.space(), p.space());
            assert_eq!(e.rank(), p.dim(d.m), "epi onto at {d}");
            let i = c
                .inclusion
                .block_or_zero(d, c.loop_module.space(), c.cover.space());
            assert_eq!(i.rank() + e.rank(), c.cover.dim(d.m));
        }
    }
}
