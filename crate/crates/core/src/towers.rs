//! Towers `… → k_{n+1} → k_n → … → K` after applying an exact functor:
//! the kernels `T_n`, the filtration `F0 ⊆ F1 ⊆ F2` of `T_n`, the maps
//! `ι`, detection of height `h`, and the chain complex computing
//! `Im f_n / Im f_{n+1}`.
//!
//! Every map is a [`GradedMap`] with its own shift, so the suspension in
//! `δ_n : C_n → Σ k_{n+1}` is carried by the shift of `δ_n`.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::gflin::{intersect_row_spaces, BitVec, F2Matrix, Subquotient};
use crate::grmod::{bd, BiDegree, GradedMap, GradedSpace, Window};

/// The cofiber data at level `n`: `k_{n+1} → k_n → C_n → Σ k_{n+1}`.
#[derive(Clone, Debug)]
pub struct Cofiber {
    pub space: GradedSpace,
    /// `c_n : k_n → C_n`.
    pub c: GradedMap,
    /// `δ_n : C_n → k_{n+1}`, shift includes the suspension.
    pub delta: GradedMap,
}

#[derive(Clone, Debug)]
pub struct Level {
    pub k: GradedSpace,
    /// `f_n : k_n → K`.
    pub f: GradedMap,
    /// `e_n : k_n → k_{n-1}`; absent at the bottom level.
    pub e: Option<GradedMap>,
    /// Absent at the top level.
    pub cofiber: Option<Cofiber>,
}

#[derive(Clone, Debug)]
pub struct TowerData {
    lo: i32,
    region: Window,
    big_k: GradedSpace,
    levels: Vec<Level>,
}

/// A failed tower identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerFailure {
    pub level: i32,
    pub degree: BiDegree,
    pub what: String,
}

impl fmt::Display for TowerFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "level {} degree {}: {}",
            self.level, self.degree, self.what
        )
    }
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub checks: usize,
    /// Levels where only part of the identities could be checked.
    pub boundary_levels: Vec<i32>,
    pub failures: Vec<TowerFailure>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// The filtration of `T_n` at one level, with the subspaces kept per degree.
#[derive(Clone, Debug)]
pub struct Filtration {
    pub level: i32,
    pub t: GradedSpace,
    pub f0: GradedSpace,
    pub f1: GradedSpace,
    pub f2: GradedSpace,
    t_rows: BTreeMap<BiDegree, F2Matrix>,
    ker_e: BTreeMap<BiDegree, F2Matrix>,
    f0_rows: BTreeMap<BiDegree, F2Matrix>,
}

impl Filtration {
    pub fn t_vectors(&self, d: BiDegree) -> Option<&F2Matrix> {
        self.t_rows.get(&d)
    }

    pub fn ker_e_vectors(&self, d: BiDegree) -> Option<&F2Matrix> {
        self.ker_e.get(&d)
    }

    pub fn f0_vectors(&self, d: BiDegree) -> Option<&F2Matrix> {
        self.f0_rows.get(&d)
    }
}

/// Outcome of a detection check.
#[derive(Clone, Debug)]
pub struct Detection {
    pub height: u32,
    pub level: i32,
    /// From the definition: `T_n ∩ Im(e_{n+1} ⋯ e_{n+h}) = 0`.
    pub holds: bool,
    /// A degree and a nonzero element of `T_n ∩ Im(…)` when it fails.
    pub witness: Option<(BiDegree, Vec<String>)>,
    /// The filtration criterion: `F2_{n+1} = 0` for `h = 1`, `ι_{n+2}` bijective for `h = 2`.
    pub criterion: bool,
    /// `F0_n = 0` (necessary for `h = 1`); `None` when level `n` has no `e_n`.
    pub f0_vanishes: Option<bool>,
}

impl Detection {
    /// The definition and the filtration criterion agree.
    pub fn consistent(&self) -> bool {
        self.holds == self.criterion
            && (self.height != 1 || !self.holds || self.f0_vanishes != Some(false))
    }
}

/// `ι_{n+1} : F0_n → F2_{n+1}`, `e_{n+1} x ↦ [x]`, per degree of `F0_n`.
#[derive(Clone, Debug)]
pub struct Iota {
    pub level: i32,
    pub blocks: BTreeMap<BiDegree, F2Matrix>,
    pub injective: bool,
    pub surjective: bool,
}

/// The complex `F2_n → Ker θ_n / Im θ_{n-1} → Σ F0_{n+1}` and its comparison
/// with `φ_n / φ_{n+1}` where `φ_n = Im f_n`.
#[derive(Clone, Debug)]
pub struct ChainComplexReport {
    pub level: i32,
    pub left: GradedSpace,
    pub middle: GradedSpace,
    pub right: GradedSpace,
    /// `F2_n → middle`, keyed by the degree of `F2_n`.
    pub c_bar: GradedMap,
    /// `middle → Σ F0_{n+1}`.
    pub delta_bar: GradedMap,
    pub composite_zero: bool,
    /// Holds exactly when the tower detects at height 2 at level `n - 1`.
    pub c_bar_injective: bool,
    pub delta_bar_surjective: bool,
    /// Homology dimensions keyed by the degree of the middle term.
    pub homology: BTreeMap<BiDegree, usize>,
    /// `dim φ_n / φ_{n+1}` at the matching degree of `K`.
    pub phi_quotient: BTreeMap<BiDegree, usize>,
    /// The map `ψ : φ_n/φ_{n+1} → homology` is bijective in every degree.
    pub psi_iso: bool,
    /// When `ι_{n+2}` is bijective: `dim F2_{n+2}` at the degrees of the right term.
    pub right_via_iota: Option<BTreeMap<BiDegree, usize>>,
}

impl ChainComplexReport {
    pub fn homology_matches(&self) -> bool {
        self.homology
            .values()
            .copied()
            .eq(self.phi_quotient.values().copied())
    }

    pub fn certified(&self) -> bool {
        self.composite_zero && self.delta_bar_surjective && self.psi_iso && self.homology_matches()
    }
}

fn rows_of_image(m: &F2Matrix) -> F2Matrix {
    m.image_basis()
}

fn span(a: &F2Matrix, b: &F2Matrix) -> F2Matrix {
    a.vstack(b).row_space_basis()
}

fn same_span(a: &F2Matrix, b: &F2Matrix) -> bool {
    let ra = a.rank();
    ra == b.rank() && span(a, b).nrows() == ra
}

fn names_of(v: &BitVec, names: &[String]) -> Vec<String> {
    v.ones().map(|i| names[i].clone()).collect()
}

/// A graded space with one generator per row, named by the row's leading coordinate.
fn space_from_rows(
    region: Window,
    rows: &BTreeMap<BiDegree, F2Matrix>,
    ambient: &GradedSpace,
    prefix: &str,
) -> GradedSpace {
    let mut gens = Vec::new();
    for (d, m) in rows {
        let names = ambient.names(*d);
        for r in m.rows() {
            let lead = r.first_one().expect("nonzero row");
            gens.push((*d, format!("{prefix}{}", names[lead])));
        }
    }
    GradedSpace::new(region, gens).expect("leading coordinates are distinct")
}

impl TowerData {
    /// Levels `lo, lo+1, …`; `levels[0].e` and the last level's cofiber must be absent.
    pub fn new(
        lo: i32,
        region: Window,
        big_k: GradedSpace,
        levels: Vec<Level>,
    ) -> Result<TowerData> {
        if levels.is_empty() {
            return Err(Error::Invalid("a tower needs at least one level".into()));
        }
        if levels[0].e.is_some() {
            return Err(Error::Invalid("the bottom level has no e map".into()));
        }
        if levels.last().expect("nonempty").cofiber.is_some() {
            return Err(Error::Invalid("the top level has no cofiber".into()));
        }
        for (i, l) in levels.iter().enumerate() {
            let n = lo + i as i32;
            let ctx = |e: Error| Error::Invalid(format!("level {n}: {e}"));
            l.f.validate(&l.k, &big_k).map_err(ctx)?;
            if i > 0 {
                let e =
                    l.e.as_ref()
                        .ok_or_else(|| Error::Invalid(format!("level {n}: missing e")))?;
                e.validate(&l.k, &levels[i - 1].k).map_err(ctx)?;
            }
            if i + 1 < levels.len() {
                let c = l
                    .cofiber
                    .as_ref()
                    .ok_or_else(|| Error::Invalid(format!("level {n}: missing cofiber")))?;
                c.c.validate(&l.k, &c.space).map_err(ctx)?;
                c.delta.validate(&c.space, &levels[i + 1].k).map_err(ctx)?;
            }
        }
        Ok(TowerData {
            lo,
            region,
            big_k,
            levels,
        })
    }

    /// Builds the cofibers from the maps alone: `C_n = Coker e_{n+1} ⊕ Σ Ker e_{n+1}`,
    /// with `c_n` the projection and `δ_n` the inclusion shifted by `-sigma`.
    /// `ks[i]` is level `lo + i`; `es[i]` is `e` at level `lo + i + 1`.
    pub fn from_maps(
        lo: i32,
        region: Window,
        sigma: BiDegree,
        big_k: GradedSpace,
        ks: Vec<GradedSpace>,
        es: Vec<GradedMap>,
        fs: Vec<GradedMap>,
    ) -> Result<TowerData> {
        if es.len() + 1 != ks.len() || fs.len() != ks.len() {
            return Err(Error::Invalid(
                "need one e per adjacent pair and one f per level".into(),
            ));
        }
        let mut levels = Vec::with_capacity(ks.len());
        for i in 0..ks.len() {
            let cofiber = (i + 1 < ks.len())
                .then(|| split_cofiber(region, sigma, &ks[i + 1], &ks[i], &es[i]));
            levels.push(Level {
                k: ks[i].clone(),
                f: fs[i].clone(),
                e: (i > 0).then(|| es[i - 1].clone()),
                cofiber,
            });
        }
        TowerData::new(lo, region, big_k, levels)
    }

    pub fn lo(&self) -> i32 {
        self.lo
    }

    pub fn hi(&self) -> i32 {
        self.lo + self.levels.len() as i32 - 1
    }

    pub fn region(&self) -> Window {
        self.region
    }

    pub fn big_k(&self) -> &GradedSpace {
        &self.big_k
    }

    pub fn level(&self, n: i32) -> Result<&Level> {
        if n < self.lo || n > self.hi() {
            return Err(Error::Invalid(format!(
                "level {n} outside {}..={}",
                self.lo,
                self.hi()
            )));
        }
        Ok(&self.levels[(n - self.lo) as usize])
    }

    fn k(&self, n: i32) -> &GradedSpace {
        &self.levels[(n - self.lo) as usize].k
    }

    fn e(&self, n: i32) -> Result<&GradedMap> {
        self.level(n)?
            .e
            .as_ref()
            .ok_or_else(|| Error::Invalid(format!("level {n} has no e map")))
    }

    fn cof(&self, n: i32) -> Result<&Cofiber> {
        self.level(n)?
            .cofiber
            .as_ref()
            .ok_or_else(|| Error::Invalid(format!("level {n} has no cofiber")))
    }

    /// `θ_n = Σc_{n+1} ∘ δ_n : C_n → Σ C_{n+1}`.
    pub fn theta(&self, n: i32) -> Result<GradedMap> {
        let here = self.cof(n)?;
        let next = self.cof(n + 1)?;
        Ok(here.delta.then(&next.c, self.k(n + 1)))
    }

    /// Degrees of the region where level `n` is inspected.
    fn degrees(&self) -> Vec<BiDegree> {
        self.region.degrees()
    }

    /// `e_{n+1} ∘ ⋯ ∘ e_{n+h}` as a block landing in `k_n` at `d`, with its source degree.
    fn composite_into(&self, n: i32, h: u32, d: BiDegree) -> Result<(BiDegree, F2Matrix)> {
        let mut shift = BiDegree::ZERO;
        for j in 1..=h as i32 {
            shift = shift + self.e(n + j)?.shift;
        }
        let src = d - shift;
        let mut deg = src;
        let mut acc = F2Matrix::identity(self.k(n + h as i32).dim(src));
        for j in (1..=h as i32).rev() {
            let e = self.e(n + j)?;
            let b = e.block_or_zero(deg, self.k(n + j), self.k(n + j - 1));
            acc = b.mul(&acc);
            deg = deg + e.shift;
        }
        Ok((src, acc))
    }

    fn t_rows(&self, n: i32, d: BiDegree) -> F2Matrix {
        let l = &self.levels[(n - self.lo) as usize];
        l.f.block_or_zero(d, &l.k, &self.big_k).kernel_basis()
    }

    fn ker_e_rows(&self, n: i32, d: BiDegree) -> Result<F2Matrix> {
        let e = self.e(n)?;
        Ok(e.block_or_zero(d, self.k(n), self.k(n - 1)).kernel_basis())
    }

    fn im_e_rows(&self, n: i32, d: BiDegree) -> Result<F2Matrix> {
        let (_, b) = self.composite_into(n, 1, d)?;
        Ok(rows_of_image(&b))
    }

    /// Checks `f_{n-1} e_n = f_n` and exactness of every cofiber sequence on the region.
    pub fn validate(&self) -> ValidationReport {
        let mut failures = Vec::new();
        let mut checks = 0;
        let mut boundary_levels = Vec::new();
        let hi = self.hi();
        for n in self.lo..=hi {
            if n == self.lo || n == hi {
                boundary_levels.push(n);
            }
            let l = &self.levels[(n - self.lo) as usize];
            for d in self.degrees() {
                let mut fail = |what: String| {
                    failures.push(TowerFailure {
                        level: n,
                        degree: d,
                        what,
                    })
                };
                if let Some(e) = &l.e {
                    checks += 1;
                    let lower = &self.levels[(n - 1 - self.lo) as usize];
                    if e.shift + lower.f.shift != l.f.shift {
                        fail(format!(
                            "shift of f_{} e_{n} differs from shift of f_{n}",
                            n - 1
                        ));
                    } else {
                        let lhs = lower
                            .f
                            .block_or_zero(d + e.shift, &lower.k, &self.big_k)
                            .mul(&e.block_or_zero(d, &l.k, &lower.k));
                        if lhs != l.f.block_or_zero(d, &l.k, &self.big_k) {
                            fail(format!("f_{} e_{n} != f_{n}", n - 1));
                        }
                    }
                }
                let Some(cof) = &l.cofiber else { continue };
                let up = &self.levels[(n + 1 - self.lo) as usize];
                let e_up = up.e.as_ref().expect("validated shape");
                checks += 3;
                // Im e_{n+1} = Ker c_n in k_n(d)
                let im_e = rows_of_image(&e_up.block_or_zero(d - e_up.shift, &up.k, &l.k));
                let ker_c = cof.c.block_or_zero(d, &l.k, &cof.space).kernel_basis();
                if !same_span(&im_e, &ker_c) {
                    fail(format!("Im e_{} != Ker c_{n}", n + 1));
                }
                // Im c_n = Ker δ_n in C_n(d)
                let im_c = rows_of_image(&cof.c.block_or_zero(d - cof.c.shift, &l.k, &cof.space));
                let ker_delta = cof.delta.block_or_zero(d, &cof.space, &up.k).kernel_basis();
                if !same_span(&im_c, &ker_delta) {
                    fail(format!("Im c_{n} != Ker delta_{n}"));
                }
                // Im δ_n = Ker e_{n+1} in k_{n+1}(d)
                let im_delta = rows_of_image(&cof.delta.block_or_zero(
                    d - cof.delta.shift,
                    &cof.space,
                    &up.k,
                ));
                let ker_e = e_up.block_or_zero(d, &up.k, &l.k).kernel_basis();
                if !same_span(&im_delta, &ker_e) {
                    fail(format!("Im delta_{n} != Ker e_{}", n + 1));
                }
            }
        }
        ValidationReport {
            checks,
            boundary_levels,
            failures,
        }
    }

    /// `T_n = Ker f_n`, `F0 = Ker e_n ∩ Im e_{n+1}`, `F1 = Ker e_n / F0`, `F2 = T_n / Ker e_n`.
    pub fn filtration(&self, n: i32) -> Result<Filtration> {
        if n <= self.lo || n >= self.hi() {
            return Err(Error::Invalid(format!(
                "filtration at level {n} needs levels {}..={}, tower has {}..={}",
                n - 1,
                n + 1,
                self.lo,
                self.hi()
            )));
        }
        let kn = self.k(n);
        let mut t_rows = BTreeMap::new();
        let mut ker_e = BTreeMap::new();
        let mut f0_rows = BTreeMap::new();
        let mut f1_rows = BTreeMap::new();
        let mut f2_rows = BTreeMap::new();
        for d in self.degrees() {
            if kn.dim(d) == 0 {
                continue;
            }
            let t = self.t_rows(n, d).row_space_basis();
            let ke = self.ker_e_rows(n, d)?.row_space_basis();
            let f0 = intersect_row_spaces(&ke, &self.im_e_rows(n, d)?).row_space_basis();
            let f1 = Subquotient::canonical(&ke, &f0);
            let f2 = Subquotient::canonical(&t, &ke);
            for (map, m) in [
                (&mut t_rows, t),
                (&mut ker_e, ke),
                (&mut f0_rows, f0),
                (&mut f1_rows, f1.representatives().clone()),
                (&mut f2_rows, f2.representatives().clone()),
            ] {
                if m.nrows() > 0 {
                    map.insert(d, m);
                }
            }
        }
        Ok(Filtration {
            level: n,
            t: space_from_rows(self.region, &t_rows, kn, "T:"),
            f0: space_from_rows(self.region, &f0_rows, kn, "F0:"),
            f1: space_from_rows(self.region, &f1_rows, kn, "F1:"),
            f2: space_from_rows(self.region, &f2_rows, kn, "F2:"),
            t_rows,
            ker_e,
            f0_rows,
        })
    }

    /// `dim F2_n` per degree; needs only `e_n`.
    pub fn f2_dims(&self, n: i32) -> Result<BTreeMap<BiDegree, usize>> {
        let mut out = BTreeMap::new();
        for d in self.degrees() {
            let t = self.t_rows(n, d).rank();
            let ke = self.ker_e_rows(n, d)?.rank();
            if t > ke {
                out.insert(d, t - ke);
            }
        }
        Ok(out)
    }

    /// `ι_{n+1} : F0_n → F2_{n+1}`.
    pub fn iota(&self, n: i32) -> Result<Iota> {
        let e = self.e(n + 1)?.clone();
        self.e(n)?;
        let up = self.k(n + 1);
        let mut blocks = BTreeMap::new();
        let mut injective = true;
        let mut surjective = true;
        for d in self.degrees() {
            let ke = self.ker_e_rows(n, d)?;
            let f0 = intersect_row_spaces(&ke, &self.im_e_rows(n, d)?).row_space_basis();
            let src = d - e.shift;
            let t = self.t_rows(n + 1, src);
            let ke_up = self.ker_e_rows(n + 1, src)?;
            let f2 = Subquotient::canonical(&t, &ke_up);
            let eb = e.block_or_zero(src, up, self.k(n));
            let mut m = F2Matrix::zeros(f2.dim(), f0.nrows());
            for (j, y) in f0.rows().iter().enumerate() {
                let x = eb.solve(y).expect("F0 lies in the image of e");
                let cls = f2.class_of(&x).expect("preimages of F0 lie in T");
                for i in cls.ones() {
                    m.set(i, j, true);
                }
            }
            let r = m.rank();
            injective &= r == f0.nrows();
            surjective &= r == f2.dim();
            if f0.nrows() > 0 || f2.dim() > 0 {
                blocks.insert(d, m);
            }
        }
        Ok(Iota {
            level: n + 1,
            blocks,
            injective,
            surjective,
        })
    }

    /// Detection of height `h` at level `n`: `T_n → Coker(e_{n+1} ⋯ e_{n+h})` is injective.
    pub fn detect(&self, h: u32, n: i32) -> Result<Detection> {
        if h == 0 || h > 2 {
            return Err(Error::Invalid(format!(
                "detection height {h} is not 1 or 2"
            )));
        }
        let mut holds = true;
        let mut witness = None;
        for d in self.degrees() {
            let t = self.t_rows(n, d);
            let (_, comp) = self.composite_into(n, h, d)?;
            let meet = intersect_row_spaces(&t, &rows_of_image(&comp));
            if meet.nrows() > 0 {
                holds = false;
                if witness.is_none() {
                    witness = Some((d, names_of(meet.row(0), self.k(n).names(d))));
                }
            }
        }
        let criterion = match h {
            1 => self.f2_dims(n + 1)?.is_empty(),
            _ => {
                let i = self.iota(n + 1)?;
                i.injective && i.surjective
            }
        };
        let f0_vanishes = if n > self.lo && self.level(n)?.e.is_some() {
            let mut zero = true;
            for d in self.degrees() {
                let ke = self.ker_e_rows(n, d)?;
                zero &= intersect_row_spaces(&ke, &self.im_e_rows(n, d)?).nrows() == 0;
            }
            Some(zero)
        } else {
            None
        };
        Ok(Detection {
            height: h,
            level: n,
            holds,
            witness,
            criterion,
            f0_vanishes,
        })
    }

    /// `dim F1_n` against `dim Im θ_{n-1}` per degree of `k_n`.
    pub fn f1_matches_theta(&self, n: i32) -> Result<bool> {
        let fil = self.filtration(n)?;
        let theta = self.theta(n - 1)?;
        let cof = self.cof(n)?;
        let prev = self.cof(n - 1)?;
        for d in self.degrees() {
            let dc = d + cof.c.shift;
            let im = theta
                .block_or_zero(dc - theta.shift, &prev.space, &cof.space)
                .rank();
            if fil.f1.dim(d) != im {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The chain complex of level `n`, certified against `φ_n / φ_{n+1}`.
    pub fn chain_complex_at(&self, n: i32) -> Result<ChainComplexReport> {
        if n <= self.lo || n + 2 > self.hi() {
            return Err(Error::Invalid(format!(
                "chain complex at level {n} needs levels {}..={}, tower has {}..={}",
                n - 1,
                n + 2,
                self.lo,
                self.hi()
            )));
        }
        let kn = self.k(n);
        let up = self.k(n + 1);
        let cof = self.cof(n)?;
        let prev = self.cof(n - 1)?;
        let theta_prev = self.theta(n - 1)?;
        let theta = self.theta(n)?;
        let fn_map = &self.levels[(n - self.lo) as usize].f;
        let (sc, sdelta) = (cof.c.shift, cof.delta.shift);

        let mut left_rows = BTreeMap::new();
        let mut mid_rows = BTreeMap::new();
        let mut right_rows = BTreeMap::new();
        let mut c_blocks = BTreeMap::new();
        let mut d_blocks = BTreeMap::new();
        let mut homology = BTreeMap::new();
        let mut phi_quotient = BTreeMap::new();
        let (mut composite_zero, mut c_inj, mut d_surj, mut psi_iso) = (true, true, true, true);

        for d in self.degrees() {
            // middle term at degree d of C_n
            let dk = d - sc;
            let ker_theta = theta
                .block_or_zero(d, &cof.space, &self.cof(n + 1)?.space)
                .kernel_basis();
            let im_theta_prev = rows_of_image(&theta_prev.block_or_zero(
                d - theta_prev.shift,
                &prev.space,
                &cof.space,
            ));
            let mid = Subquotient::canonical(&ker_theta, &im_theta_prev);
            // left term F2_n at degree dk of k_n
            let t = self.t_rows(n, dk);
            let ke = self.ker_e_rows(n, dk)?;
            let f2 = Subquotient::canonical(&t, &ke);
            // right term F0_{n+1} at degree d + sdelta of k_{n+1}
            let dr = d + sdelta;
            let ke_up = self.ker_e_rows(n + 1, dr)?;
            let f0_up = intersect_row_spaces(&ke_up, &self.im_e_rows(n + 1, dr)?).row_space_basis();
            let f0_basis = crate::gflin::Basis::new(f0_up.clone());

            let cb = cof.c.block_or_zero(dk, kn, &cof.space);
            let mut cbar = F2Matrix::zeros(mid.dim(), f2.dim());
            for (j, x) in f2.representatives().rows().iter().enumerate() {
                let cls = mid
                    .class_of(&cb.apply(x))
                    .expect("c_n(T_n) lies in Ker θ_n");
                for i in cls.ones() {
                    cbar.set(i, j, true);
                }
            }
            let db = cof.delta.block_or_zero(d, &cof.space, up);
            let mut dbar = F2Matrix::zeros(f0_up.nrows(), mid.dim());
            for (j, y) in mid.representatives().rows().iter().enumerate() {
                let z = db.apply(y);
                let coords = f0_basis.coords(&z).expect("δ_n(Ker θ_n) lies in F0_{n+1}");
                for i in coords.ones() {
                    dbar.set(i, j, true);
                }
            }
            composite_zero &= dbar.mul(&cbar).is_zero();
            let rc = cbar.rank();
            let rd = dbar.rank();
            c_inj &= rc == f2.dim();
            d_surj &= rd == f0_up.nrows();
            let hdim = mid.dim() - rd - rc;

            // φ_n / φ_{n+1} at the K-degree of f_n(k_n(dk))
            let d_big = dk + fn_map.shift;
            let fb = fn_map.block_or_zero(dk, kn, &self.big_k);
            let phi_n = rows_of_image(&fb);
            let f_up = &self.levels[(n + 1 - self.lo) as usize].f;
            let phi_up = rows_of_image(&f_up.block_or_zero(d_big - f_up.shift, up, &self.big_k));
            let phi = Subquotient::canonical(&phi_n, &phi_up);

            // ψ : [f_n x] ↦ [c_n x] in Ker δ_n / c_n(T_n)
            let ker_delta = db.kernel_basis();
            let ct = rows_of_image(&cb.mul(&t.transpose()));
            let hom = Subquotient::canonical(&ker_delta, &span(&ct, &im_theta_prev));
            let mut psi = F2Matrix::zeros(hom.dim(), phi.dim());
            for (j, z) in phi.representatives().rows().iter().enumerate() {
                let x = fb.solve(z).expect("φ_n is the image of f_n");
                let cls = hom.class_of(&cb.apply(&x)).expect("c_n x lies in Ker δ_n");
                for i in cls.ones() {
                    psi.set(i, j, true);
                }
            }
            psi_iso &= psi.rank() == phi.dim() && phi.dim() == hom.dim() && hom.dim() == hdim;

            if mid.dim() > 0 {
                mid_rows.insert(d, mid.representatives().clone());
            }
            if f2.dim() > 0 {
                left_rows.insert(dk, f2.representatives().clone());
            }
            if f0_up.nrows() > 0 {
                right_rows.insert(dr, f0_up);
            }
            if !cbar.is_zero() {
                c_blocks.insert(dk, cbar);
            }
            if !dbar.is_zero() {
                d_blocks.insert(d, dbar);
            }
            homology.insert(d, hdim);
            phi_quotient.insert(d_big, phi.dim());
        }
        let iota = self.iota(n + 1)?;
        let right_via_iota = (iota.injective && iota.surjective).then(|| {
            let f2 = self.f2_dims(n + 2).unwrap_or_default();
            self.degrees()
                .into_iter()
                .map(|d| {
                    let dr = d + sdelta;
                    let src = dr - self.e(n + 2).map(|e| e.shift).unwrap_or(BiDegree::ZERO);
                    (dr, f2.get(&src).copied().unwrap_or(0))
                })
                .collect()
        });
        Ok(ChainComplexReport {
            level: n,
            left: space_from_rows(self.region.shift(-sc), &left_rows, kn, "F2:"),
            middle: space_from_rows(self.region, &mid_rows, &cof.space, "H:"),
            right: space_from_rows(self.region.shift(sdelta), &right_rows, up, "F0:"),
            c_bar: GradedMap::from_blocks(sc, c_blocks),
            delta_bar: GradedMap::from_blocks(sdelta, d_blocks),
            composite_zero,
            c_bar_injective: c_inj,
            delta_bar_surjective: d_surj,
            homology,
            phi_quotient,
            psi_iso,
            right_via_iota,
        })
    }
}

/// `C = Coker(e: up → here) ⊕ Σ Ker e`, with `c` the projection and `δ` the inclusion.
fn split_cofiber(
    region: Window,
    sigma: BiDegree,
    up: &GradedSpace,
    here: &GradedSpace,
    e: &GradedMap,
) -> Cofiber {
    let mut gens = Vec::new();
    let mut coker: BTreeMap<BiDegree, Subquotient> = BTreeMap::new();
    let mut kers: BTreeMap<BiDegree, F2Matrix> = BTreeMap::new();
    for d in region.degrees() {
        let im = rows_of_image(&e.block_or_zero(d - e.shift, up, here));
        let sq = Subquotient::canonical(&F2Matrix::identity(here.dim(d)), &im);
        for i in sq.leading() {
            gens.push((d, format!("q:{}", here.names(d)[i])));
        }
        coker.insert(d, sq);
    }
    for u in region.degrees() {
        let k = e
            .block_or_zero(u, up, here)
            .kernel_basis()
            .row_space_basis();
        for r in k.rows() {
            gens.push((
                u + sigma,
                format!("s:{}", up.names(u)[r.first_one().expect("nonzero")]),
            ));
        }
        if k.nrows() > 0 {
            kers.insert(u + sigma, k);
        }
    }
    let space =
        GradedSpace::new(region.grow(sigma.m.abs(), sigma.k.abs()), gens).expect("distinct names");
    let mut c_blocks = BTreeMap::new();
    let mut d_blocks = BTreeMap::new();
    for d in space.degrees().collect::<Vec<_>>() {
        let nq = coker.get(&d).map_or(0, |s| s.dim());
        if let Some(sq) = coker.get(&d) {
            let mut c = F2Matrix::zeros(space.dim(d), here.dim(d));
            for j in 0..here.dim(d) {
                let cls = sq.class_of(&BitVec::unit(here.dim(d), j)).expect("ambient");
                for i in cls.ones() {
                    c.set(i, j, true);
                }
            }
            c_blocks.insert(d, c);
        }
        if let Some(k) = kers.get(&d) {
            let u = d - sigma;
            let mut m = F2Matrix::zeros(up.dim(u), space.dim(d));
            for (r, v) in k.rows().iter().enumerate() {
                for i in v.ones() {
                    m.set(i, nq + r, true);
                }
            }
            d_blocks.insert(d, m);
        }
    }
    Cofiber {
        space,
        c: GradedMap::from_blocks(BiDegree::ZERO, c_blocks),
        delta: GradedMap::from_blocks(-sigma, d_blocks),
    }
}

/// A graded `F[x]`-module `⊕ Σ^{g} F[x]/x^a ⊕ ⊕ Σ^{g} F[x]`, `|x| = d > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XModule {
    pub d: i32,
    /// `(generator degree, height)`.
    pub torsion: Vec<(i32, u32)>,
    pub free: Vec<i32>,
}

impl XModule {
    /// Basis names in degree `e`.
    pub fn basis(&self, e: i32) -> Vec<String> {
        let mut out = Vec::new();
        for (i, &(g, a)) in self.torsion.iter().enumerate() {
            if e >= g && (e - g) % self.d == 0 && ((e - g) / self.d) < a as i32 {
                out.push(format!("t{i}x{}", (e - g) / self.d));
            }
        }
        for (i, &g) in self.free.iter().enumerate() {
            if e >= g && (e - g) % self.d == 0 {
                out.push(format!("f{i}x{}", (e - g) / self.d));
            }
        }
        out
    }

    /// `x · (name)`, if nonzero.
    pub fn times_x(&self, name: &str) -> Option<String> {
        let (head, p) = name.split_once('x').expect("basis name");
        let p: i32 = p.parse().expect("basis name");
        let i: usize = head[1..].parse().expect("basis name");
        if head.starts_with('t') && p + 1 >= self.torsion[i].1 as i32 {
            return None;
        }
        Some(format!("{head}x{}", p + 1))
    }

    /// The largest torsion height (0 if torsion free).
    pub fn torsion_height(&self) -> u32 {
        self.torsion.iter().map(|t| t.1).max().unwrap_or(0)
    }

    /// A small random module: up to three torsion summands of height ≤ 3, up to two free.
    pub fn random(rng: &mut impl Rng) -> XModule {
        let d = rng.gen_range(1..=2);
        let nt = rng.gen_range(0..=3);
        let nf = rng.gen_range(0..=2);
        XModule {
            d,
            torsion: (0..nt)
                .map(|_| (rng.gen_range(-3..=3), rng.gen_range(1..=3)))
                .collect(),
            free: (0..nf).map(|_| rng.gen_range(-3..=3)).collect(),
        }
    }

    /// The multiplication tower `k_n = Σ^{nd}M`, `e = x`, over `K = M[x^{-1}]`,
    /// on levels `lo..=hi` and functor degrees `j_lo..=j_hi` (twist 0).
    /// At functor degree `j`, level `n` sees `M` in degree `j - n d`.
    pub fn tower(&self, lo: i32, hi: i32, j_lo: i32, j_hi: i32) -> Result<TowerData> {
        let region = Window::line(j_lo, j_hi);
        let mut ks = Vec::new();
        for n in lo..=hi {
            let gens = (j_lo..=j_hi).flat_map(|j| {
                self.basis(j - n * self.d)
                    .into_iter()
                    .map(move |b| (bd(j, 0), b))
            });
            ks.push(GradedSpace::new(region, gens)?);
        }
        // K in degree j: f_i x^t with g_i + t d = j
        let mut kgens = Vec::new();
        for j in j_lo..=j_hi {
            for (i, &g) in self.free.iter().enumerate() {
                if (j - g).rem_euclid(self.d) == 0 {
                    kgens.push((bd(j, 0), format!("f{i}x{}", (j - g).div_euclid(self.d))));
                }
            }
        }
        let big_k = GradedSpace::new(region, kgens)?;
        let mut es = Vec::new();
        for n in lo + 1..=hi {
            let (src, tgt) = (&ks[(n - lo) as usize], &ks[(n - 1 - lo) as usize]);
            let imgs: Vec<(String, Vec<String>)> = src
                .iter()
                .map(|(_, b)| (b.clone(), self.times_x(b).into_iter().collect()))
                .collect();
            es.push(GradedMap::from_images(
                src,
                tgt,
                BiDegree::ZERO,
                imgs.iter()
                    .map(|(s, t)| (s.as_str(), t.iter().map(String::as_str).collect())),
            )?);
        }
        let mut fs = Vec::new();
        for n in lo..=hi {
            let src = &ks[(n - lo) as usize];
            let imgs: Vec<(String, Vec<String>)> = src
                .iter()
                .map(|(_, b)| {
                    let (head, p) = b.split_once('x').expect("basis name");
                    let t = if head.starts_with('f') {
                        vec![format!("{head}x{}", p.parse::<i32>().expect("power") + n)]
                    } else {
                        vec![]
                    };
                    (b.clone(), t)
                })
                .collect();
            fs.push(GradedMap::from_images(
                src,
                &big_k,
                BiDegree::ZERO,
                imgs.iter()
                    .map(|(s, t)| (s.as_str(), t.iter().map(String::as_str).collect())),
            )?);
        }
        TowerData::from_maps(lo, region, bd(1, 0), big_k, ks, es, fs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyclic(a: u32) -> XModule {
        XModule {
            d: 1,
            torsion: vec![(0, a)],
            free: vec![],
        }
    }

    #[test]
    fn constant_tower_is_trivial() {
        let region = Window::line(-3, 3);
        let sp = GradedSpace::new(region, (-3..=3).map(|j| (bd(j, 0), format!("g{j}")))).unwrap();
        let id = GradedMap::from_images(
            &sp,
            &sp,
            BiDegree::ZERO,
            sp.iter().map(|(_, n)| (n.as_str(), vec![n.as_str()])),
        )
        .unwrap();
        let t = TowerData::from_maps(
            0,
            region,
            bd(1, 0),
            sp.clone(),
            vec![sp.clone(); 5],
            vec![id.clone(); 4],
            vec![id; 5],
        )
        .unwrap();
        assert!(t.validate().is_ok());
        let f = t.filtration(2).unwrap();
        assert!(f.t.is_zero() && f.f0.is_zero() && f.f1.is_zero() && f.f2.is_zero());
        assert!(t.detect(1, 1).unwrap().holds);
        let cc = t.chain_complex_at(1).unwrap();
        assert!(cc.certified());
        assert!(cc.homology.values().all(|&h| h == 0));
    }

    #[test]
    fn truncated_polynomial_filtration() {
        let t = cyclic(3).tower(-4, 4, -6, 6).unwrap();
        assert!(t.validate().is_ok());
        let f = t.filtration(0).unwrap();
        // Ker x on F[x]/x³ is one class per level, visible in degree 2 of level 0
        assert_eq!(f.t.total_dim(), 3);
        assert_eq!(f.f0.total_dim() + f.f1.total_dim(), 1);
        assert_eq!(f.f2.total_dim(), 2);
        assert_eq!(f.f0.total_dim(), 1);
    }

    #[test]
    fn torsion_free_tower_has_no_kernel() {
        let m = XModule {
            d: 1,
            torsion: vec![],
            free: vec![0],
        };
        let t = m.tower(-3, 3, -5, 5).unwrap();
        assert!(t.validate().is_ok());
        assert!(t.filtration(0).unwrap().t.is_zero());
        for n in -3..=1 {
            assert!(t.detect(1, n).unwrap().holds);
        }
    }

    #[test]
    fn height_one_fails_height_two_holds_on_mixed_heights() {
        let m = XModule {
            d: 1,
            torsion: vec![(0, 2), (1, 1)],
            free: vec![],
        };
        let t = m.tower(-3, 3, -4, 6).unwrap();
        let d1 = t.detect(1, 0).unwrap();
        let d2 = t.detect(2, 0).unwrap();
        assert!(!d1.holds && d1.witness.is_some());
        assert!(d2.holds);
        assert!(d1.consistent() && d2.consistent());
    }

    #[test]
    fn broken_delta_is_reported() {
        let t = cyclic(2).tower(-2, 2, -3, 3).unwrap();
        let mut levels = t.levels.clone();
        let cof = levels[1].cofiber.as_mut().unwrap();
        cof.delta = GradedMap::zero(cof.delta.shift);
        let broken = TowerData::new(t.lo, t.region, t.big_k.clone(), levels).unwrap();
        let rep = broken.validate();
        assert!(!rep.is_ok());
        assert!(rep
            .failures
            .iter()
            .any(|f| f.level == -1 && f.what.contains("delta")));
    }

    #[test]
    fn vanishing_structure_maps_detect_at_height_one() {
        let region = Window::line(-2, 2);
        let sp = GradedSpace::new(region, (-2..=2).map(|j| (bd(j, 0), format!("g{j}")))).unwrap();
        let empty = GradedSpace::empty(region);
        let t = TowerData::from_maps(
            0,
            region,
            bd(1, 0),
            empty,
            vec![sp.clone(); 4],
            vec![GradedMap::zero(BiDegree::ZERO); 3],
            vec![GradedMap::zero(BiDegree::ZERO); 4],
        )
        .unwrap();
        assert!(t.validate().is_ok());
        for n in 0..=2 {
            assert!(t.detect(1, n).unwrap().holds);
        }
    }

    #[test]
    fn theta_matches_f1_and_iota_injective() {
        let m = XModule {
            d: 1,
            torsion: vec![(0, 3), (2, 1)],
            free: vec![1],
        };
        let t = m.tower(-4, 4, -6, 6).unwrap();
        for n in -3..=3 {
            assert!(t.f1_matches_theta(n).unwrap(), "level {n}");
            assert!(t.iota(n).unwrap().injective);
        }
    }
}
