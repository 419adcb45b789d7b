//! Bigraded vector spaces with named bases, graded linear maps, and
//! linear solving for operator-commuting maps.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::error::{Error, Result};
use crate::gflin::{BitVec, F2Matrix};

/// A bidegree `m + k·α`; `k` is the twist.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BiDegree {
    pub m: i32,
    pub k: i32,
}

impl BiDegree {
    pub const ZERO: BiDegree = BiDegree { m: 0, k: 0 };

    pub const fn new(m: i32, k: i32) -> Self {
        BiDegree { m, k }
    }

    pub fn scale(self, n: i32) -> Self {
        BiDegree::new(self.m * n, self.k * n)
    }
}

pub const fn bd(m: i32, k: i32) -> BiDegree {
    BiDegree::new(m, k)
}

impl Add for BiDegree {
    type Output = BiDegree;
    fn add(self, o: BiDegree) -> BiDegree {
        BiDegree::new(self.m + o.m, self.k + o.k)
    }
}

impl Sub for BiDegree {
    type Output = BiDegree;
    fn sub(self, o: BiDegree) -> BiDegree {
        BiDegree::new(self.m - o.m, self.k - o.k)
    }
}

impl Neg for BiDegree {
    type Output = BiDegree;
    fn neg(self) -> BiDegree {
        BiDegree::new(-self.m, -self.k)
    }
}

impl fmt::Debug for BiDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.m, self.k)
    }
}

impl fmt::Display for BiDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.m, self.k)
    }
}

/// Stand-in for an unbounded end of an interval or window.
pub const UNBOUNDED: i32 = 1 << 24;

fn sat(x: i64) -> i32 {
    x.clamp(-(UNBOUNDED as i64), UNBOUNDED as i64) as i32
}

/// Adds `d` to an end point, leaving unbounded ends unbounded.
pub fn shift_end(x: i32, d: i32) -> i32 {
    if x.abs() >= UNBOUNDED {
        x
    } else {
        sat(x as i64 + d as i64)
    }
}

/// A closed rectangle of bidegrees. Empty when `lo > hi` in either direction.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub struct Window {
    pub m_lo: i32,
    pub m_hi: i32,
    pub k_lo: i32,
    pub k_hi: i32,
}

impl Window {
    pub const fn new(m_lo: i32, m_hi: i32, k_lo: i32, k_hi: i32) -> Self {
        Window {
            m_lo,
            m_hi,
            k_lo,
            k_hi,
        }
    }

    /// The twist-zero window used for singly graded modules.
    pub const fn line(m_lo: i32, m_hi: i32) -> Self {
        Window::new(m_lo, m_hi, 0, 0)
    }

    pub const fn everything() -> Self {
        Window::new(-UNBOUNDED, UNBOUNDED, -UNBOUNDED, UNBOUNDED)
    }

    pub fn is_empty(&self) -> bool {
        self.m_lo > self.m_hi || self.k_lo > self.k_hi
    }

    pub fn contains(&self, d: BiDegree) -> bool {
        d.m >= self.m_lo && d.m <= self.m_hi && d.k >= self.k_lo && d.k <= self.k_hi
    }

    pub fn intersect(&self, o: &Window) -> Window {
        Window::new(
            self.m_lo.max(o.m_lo),
            self.m_hi.min(o.m_hi),
            self.k_lo.max(o.k_lo),
            self.k_hi.min(o.k_hi),
        )
    }

    /// Shrinks by `dm` in `m` and `dk` in `k` on both sides.
    pub fn shrink(&self, dm: i32, dk: i32) -> Window {
        Window::new(
            shift_end(self.m_lo, dm),
            shift_end(self.m_hi, -dm),
            shift_end(self.k_lo, dk),
            shift_end(self.k_hi, -dk),
        )
    }

    pub fn grow(&self, dm: i32, dk: i32) -> Window {
        self.shrink(-dm, -dk)
    }

    pub fn shift(&self, s: BiDegree) -> Window {
        Window::new(
            shift_end(self.m_lo, s.m),
            shift_end(self.m_hi, s.m),
            shift_end(self.k_lo, s.k),
            shift_end(self.k_hi, s.k),
        )
    }

    /// The window `{-d : d ∈ self}`.
    pub fn negate(&self) -> Window {
        Window::new(-self.m_hi, -self.m_lo, -self.k_hi, -self.k_lo)
    }

    /// All bidegrees, ordered by twist then `m`. Panics on unbounded windows.
    pub fn degrees(&self) -> Vec<BiDegree> {
        if self.is_empty() {
            return Vec::new();
        }
        assert!(
            self.m_lo.abs() < UNBOUNDED
                && self.m_hi.abs() < UNBOUNDED
                && self.k_lo.abs() < UNBOUNDED
                && self.k_hi.abs() < UNBOUNDED,
            "cannot enumerate an unbounded window"
        );
        let mut v = Vec::new();
        for k in self.k_lo..=self.k_hi {
            for m in self.m_lo..=self.m_hi {
                v.push(bd(m, k));
            }
        }
        v
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "m∈[{},{}] k∈[{},{}]",
            self.m_lo, self.m_hi, self.k_lo, self.k_hi
        )
    }
}

/// A bigraded vector space restricted to a window, with a named basis per degree.
/// Names are unique across the whole space and sorted within each degree.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GradedSpace {
    window: Window,
    basis: BTreeMap<BiDegree, Vec<String>>,
}

impl GradedSpace {
    pub fn empty(window: Window) -> Self {
        GradedSpace {
            window,
            basis: BTreeMap::new(),
        }
    }

    /// Builds a space; names are sorted within each degree.
    pub fn new(window: Window, gens: impl IntoIterator<Item = (BiDegree, String)>) -> Result<Self> {
        let mut basis: BTreeMap<BiDegree, Vec<String>> = BTreeMap::new();
        let mut seen = BTreeSet::new();
        for (d, name) in gens {
            if !window.contains(d) {
                return Err(Error::Invalid(format!(
                    "generator {name} at {d} outside window {window}"
                )));
            }
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err(Error::Invalid(format!("bad basis name {name:?}")));
            }
            if !seen.insert(name.clone()) {
                return Err(Error::Invalid(format!("duplicate basis name {name}")));
            }
            basis.entry(d).or_default().push(name);
        }
        for v in basis.values_mut() {
            v.sort();
        }
        Ok(GradedSpace { window, basis })
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn dim(&self, d: BiDegree) -> usize {
        self.basis.get(&d).map_or(0, |v| v.len())
    }

    pub fn names(&self, d: BiDegree) -> &[String] {
        self.basis.get(&d).map_or(&[], |v| v.as_slice())
    }

    /// Nonempty degrees in increasing order.
    pub fn degrees(&self) -> impl Iterator<Item = BiDegree> + '_ {
        self.basis.keys().copied()
    }

    pub fn total_dim(&self) -> usize {
        self.basis.values().map(|v| v.len()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (BiDegree, &String)> + '_ {
        self.basis
            .iter()
            .flat_map(|(d, v)| v.iter().map(move |n| (*d, n)))
    }

    pub fn index_of(&self, d: BiDegree, name: &str) -> Option<usize> {
        self.basis
            .get(&d)?
            .binary_search_by(|n| n.as_str().cmp(name))
            .ok()
    }

    /// Map from name to its degree and index.
    pub fn lookup(&self) -> HashMap<String, (BiDegree, usize)> {
        let mut h = HashMap::new();
        for (d, v) in &self.basis {
            for (i, n) in v.iter().enumerate() {
                h.insert(n.clone(), (*d, i));
            }
        }
        h
    }

    /// Graded dimensions of the nonempty degrees.
    pub fn dims(&self) -> BTreeMap<BiDegree, usize> {
        self.basis.iter().map(|(d, v)| (*d, v.len())).collect()
    }

    /// `Σ^s`: every degree moves by `+s`.
    pub fn shift(&self, s: BiDegree) -> GradedSpace {
        GradedSpace {
            window: self.window.shift(s),
            basis: self
                .basis
                .iter()
                .map(|(d, v)| (*d + s, v.clone()))
                .collect(),
        }
    }

    /// Linear dual: degrees negate and each name toggles a leading `~`.
    pub fn dual(&self) -> GradedSpace {
        let basis = self
            .basis
            .iter()
            .map(|(d, v)| {
                let mut names: Vec<String> = v.iter().map(|n| dual_name(n)).collect();
                names.sort();
                (-*d, names)
            })
            .collect();
        GradedSpace {
            window: self.window.negate(),
            basis,
        }
    }

    /// Restriction to the intersection with `w`.
    pub fn restrict(&self, w: Window) -> GradedSpace {
        let window = self.window.intersect(&w);
        GradedSpace {
            window,
            basis: self
                .basis
                .iter()
                .filter(|(d, _)| window.contains(**d))
                .map(|(d, v)| (*d, v.clone()))
                .collect(),
        }
    }

    /// Keeps twists in `[lo, hi]`.
    pub fn truncate_twist(&self, lo: i32, hi: i32) -> GradedSpace {
        let w = Window::new(-UNBOUNDED, UNBOUNDED, lo, hi);
        self.restrict(w)
    }

    /// Direct sum; names get `label:` prefixes.
    pub fn direct_sum(parts: &[(&str, &GradedSpace)], window: Window) -> Result<GradedSpace> {
        let mut gens = Vec::new();
        for (label, s) in parts {
            for (d, n) in s.iter() {
                if window.contains(d) {
                    gens.push((d, format!("{label}:{n}")));
                }
            }
        }
        GradedSpace::new(window, gens)
    }

    /// Tensor product with names `a*b`, restricted to `window`.
    pub fn tensor(a: &GradedSpace, b: &GradedSpace, window: Window) -> Result<GradedSpace> {
        let mut gens = Vec::new();
        for (da, na) in a.iter() {
            for (db, nb) in b.iter() {
                let d = da + db;
                if window.contains(d) {
                    gens.push((d, format!("{na}*{nb}")));
                }
            }
        }
        GradedSpace::new(window, gens)
    }
}

/// Toggles the dual marker on a basis name.
pub fn dual_name(n: &str) -> String {
    match n.strip_prefix('~') {
        Some(rest) => rest.to_string(),
        None => format!("~{n}"),
    }
}

/// A graded linear map of fixed bidegree `shift`, stored as blocks keyed by
/// source degree. A missing block is the zero map.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GradedMap {
    pub shift: BiDegree,
    blocks: BTreeMap<BiDegree, F2Matrix>,
}

impl GradedMap {
    pub fn zero(shift: BiDegree) -> Self {
        GradedMap {
            shift,
            blocks: BTreeMap::new(),
        }
    }

    pub fn from_blocks(shift: BiDegree, blocks: BTreeMap<BiDegree, F2Matrix>) -> Self {
        let blocks = blocks.into_iter().filter(|(_, m)| !m.is_zero()).collect();
        GradedMap { shift, blocks }
    }

    /// Builds a map from images of named basis elements.
    pub fn from_images<'a>(
        source: &GradedSpace,
        target: &GradedSpace,
        shift: BiDegree,
        images: impl IntoIterator<Item = (&'a str, Vec<&'a str>)>,
    ) -> Result<GradedMap> {
        let src = source.lookup();
        let tgt = target.lookup();
        let mut blocks: BTreeMap<BiDegree, F2Matrix> = BTreeMap::new();
        for (s, ts) in images {
            let &(d, j) = src
                .get(s)
                .ok_or_else(|| Error::Invalid(format!("unknown source element {s}")))?;
            let e = d + shift;
            for t in ts {
                let &(dt, i) = tgt
                    .get(t)
                    .ok_or_else(|| Error::Invalid(format!("unknown target element {t}")))?;
                if dt != e {
                    return Err(Error::Invalid(format!(
                        "{s} -> {t}: degree {d} -> {dt} is not a shift by {shift}"
                    )));
                }
                blocks
                    .entry(d)
                    .or_insert_with(|| F2Matrix::zeros(target.dim(e), source.dim(d)))
                    .flip(i, j);
            }
        }
        Ok(GradedMap::from_blocks(shift, blocks))
    }

    pub fn block(&self, d: BiDegree) -> Option<&F2Matrix> {
        self.blocks.get(&d)
    }

    /// The block at `d`, materialising zero blocks with the right shape.
    pub fn block_or_zero(
        &self,
        d: BiDegree,
        source: &GradedSpace,
        target: &GradedSpace,
    ) -> F2Matrix {
        match self.blocks.get(&d) {
            Some(m) => m.clone(),
            None => F2Matrix::zeros(target.dim(d + self.shift), source.dim(d)),
        }
    }

    pub fn blocks(&self) -> impl Iterator<Item = (BiDegree, &F2Matrix)> + '_ {
        self.blocks.iter().map(|(d, m)| (*d, m))
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Applies the map to a vector at source degree `d`; `tdim` is the target dimension.
    pub fn apply(&self, d: BiDegree, v: &BitVec, tdim: usize) -> BitVec {
        match self.blocks.get(&d) {
            Some(m) => m.apply(v),
            None => BitVec::zeros(tdim),
        }
    }

    /// Checks every block has the shape dictated by the spaces.
    pub fn validate(&self, source: &GradedSpace, target: &GradedSpace) -> Result<()> {
        for (d, m) in &self.blocks {
            let e = *d + self.shift;
            if m.ncols() != source.dim(*d) || m.nrows() != target.dim(e) {
                return Err(Error::Invalid(format!(
                    "block at {d} has shape {}x{}, expected {}x{}",
                    m.nrows(),
                    m.ncols(),
                    target.dim(e),
                    source.dim(*d)
                )));
            }
        }
        Ok(())
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &GradedMap, mid: &GradedSpace) -> GradedMap {
        let mut blocks = BTreeMap::new();
        for (d, m) in &self.blocks {
            if let Some(n) = other.blocks.get(&(*d + self.shift)) {
                debug_assert_eq!(n.ncols(), mid.dim(*d + self.shift));
                blocks.insert(*d, n.mul(m));
            }
        }
        GradedMap::from_blocks(self.shift + other.shift, blocks)
    }

    pub fn add(&self, other: &GradedMap) -> GradedMap {
        assert_eq!(self.shift, other.shift);
        let mut blocks = self.blocks.clone();
        for (d, m) in &other.blocks {
            match blocks.get_mut(d) {
                Some(b) => *b = b.add(m),
                None => {
                    blocks.insert(*d, m.clone());
                }
            }
        }
        GradedMap::from_blocks(self.shift, blocks)
    }

    /// The map between shifted spaces `Σ^s A → Σ^s B`.
    pub fn shift_degrees(&self, s: BiDegree) -> GradedMap {
        GradedMap {
            shift: self.shift,
            blocks: self
                .blocks
                .iter()
                .map(|(d, m)| (*d + s, m.clone()))
                .collect(),
        }
    }

    /// Keeps blocks whose source and target degrees both lie in `w`.
    pub fn restrict(&self, w: Window) -> GradedMap {
        GradedMap {
            shift: self.shift,
            blocks: self
                .blocks
                .iter()
                .filter(|(d, _)| w.contains(**d) && w.contains(**d + self.shift))
                .map(|(d, m)| (*d, m.clone()))
                .collect(),
        }
    }

    /// The dual map `B^∨ → A^∨`, which has the same shift.
    pub fn dual(&self) -> GradedMap {
        GradedMap {
            shift: self.shift,
            blocks: self
                .blocks
                .iter()
                .map(|(d, m)| (-(*d + self.shift), m.transpose()))
                .collect(),
        }
    }
}

/// The dual of `op` between the dual spaces, matching basis elements by name.
pub fn dualize_map(src: &GradedSpace, dual: &GradedSpace, op: &GradedMap) -> GradedMap {
    let mut blocks = BTreeMap::new();
    for (d, m) in op.blocks() {
        // op: src(d) -> src(d+s); dual op: dual(-(d+s)) -> dual(-d)
        let e = d + op.shift;
        let (dsrc, dtgt) = (-e, -d);
        let mut b = F2Matrix::zeros(dual.dim(dtgt), dual.dim(dsrc));
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m.get(i, j) {
                    // (op^∨ f_i)(x_j) = f_i(op x_j)
                    let row = dual
                        .index_of(dtgt, &dual_name(&src.names(d)[j]))
                        .expect("dual name");
                    let col = dual
                        .index_of(dsrc, &dual_name(&src.names(e)[i]))
                        .expect("dual name");
                    b.set(row, col, true);
                }
            }
        }
        blocks.insert(dsrc, b);
    }
    GradedMap::from_blocks(op.shift, blocks)
}

/// Graded dimensions known to be correct on `region`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DimTable {
    pub region: Window,
    pub dims: BTreeMap<BiDegree, usize>,
}

impl DimTable {
    pub fn new(region: Window, dims: impl IntoIterator<Item = (BiDegree, usize)>) -> Self {
        let dims = dims
            .into_iter()
            .filter(|(d, n)| *n > 0 && region.contains(*d))
            .collect();
        DimTable { region, dims }
    }

    pub fn of_space(space: &GradedSpace, region: Window) -> Self {
        DimTable::new(region, space.dims())
    }

    pub fn get(&self, d: BiDegree) -> usize {
        self.dims.get(&d).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.dims.values().sum()
    }

    pub fn restrict(&self, w: Window) -> DimTable {
        DimTable::new(self.region.intersect(&w), self.dims.clone())
    }

    /// `Σ^s`.
    pub fn shift(&self, s: BiDegree) -> DimTable {
        DimTable::new(
            self.region.shift(s),
            self.dims.iter().map(|(d, n)| (*d + s, *n)),
        )
    }

    /// Degrees in the common region where the two tables disagree, with both values.
    pub fn mismatches(&self, other: &DimTable) -> Vec<(BiDegree, usize, usize)> {
        let common = self.region.intersect(&other.region);
        let keys: BTreeSet<BiDegree> = self
            .dims
            .keys()
            .chain(other.dims.keys())
            .copied()
            .filter(|d| common.contains(*d))
            .collect();
        keys.into_iter()
            .filter_map(|d| {
                let (a, b) = (self.get(d), other.get(d));
                (a != b).then_some((d, a, b))
            })
            .collect()
    }

    /// Pointwise sum; the region is the intersection.
    /// Dimensions of the dual: degrees and region negate.
    pub fn dual(&self) -> DimTable {
        DimTable::new(
            self.region.negate(),
            self.dims.iter().map(|(d, n)| (-*d, *n)),
        )
    }

    pub fn plus(&self, other: &DimTable) -> DimTable {
        let region = self.region.intersect(&other.region);
        let mut dims = self.dims.clone();
        for (d, n) in &other.dims {
            *dims.entry(*d).or_default() += n;
        }
        DimTable::new(region, dims)
    }
}

/// Result of [`assemble`]: a space, maps on it, and where each generator id landed.
pub struct Assembled {
    pub space: GradedSpace,
    pub maps: Vec<GradedMap>,
    pub pos: Vec<(BiDegree, usize)>,
}

/// Images of generator ids under one operator of the given shift; repeated
/// targets cancel in pairs.
pub type ImageFn<'a> = &'a dyn Fn(usize) -> Vec<usize>;

/// Builds a space from `(degree, name)` generators (ids are list positions)
/// and operators described by id-level image functions.
pub fn assemble(
    window: Window,
    gens: Vec<(BiDegree, String)>,
    ops: &[(BiDegree, ImageFn<'_>)],
) -> Result<Assembled> {
    let degs: Vec<BiDegree> = gens.iter().map(|g| g.0).collect();
    let names: Vec<String> = gens.iter().map(|g| g.1.clone()).collect();
    let space = GradedSpace::new(window, gens)?;
    let pos: Vec<(BiDegree, usize)> = degs
        .iter()
        .zip(&names)
        .map(|(d, n)| (*d, space.index_of(*d, n).expect("just inserted")))
        .collect();
    let mut maps = Vec::new();
    for (shift, f) in ops {
        let mut blocks: BTreeMap<BiDegree, F2Matrix> = BTreeMap::new();
        for (id, &(d, j)) in pos.iter().enumerate() {
            let e = d + *shift;
            for t in f(id) {
                let (dt, i) = pos[t];
                if dt != e {
                    return Err(Error::Invalid(format!(
                        "image {} of {} has degree {dt}, expected {e}",
                        names[t], names[id]
                    )));
                }
                blocks
                    .entry(d)
                    .or_insert_with(|| F2Matrix::zeros(space.dim(e), space.dim(d)))
                    .flip(i, j);
            }
        }
        maps.push(GradedMap::from_blocks(*shift, blocks));
    }
    Ok(Assembled { space, maps, pos })
}

/// A graded space together with an ordered list of operators on it.
#[derive(Clone, Copy)]
pub struct OpSpace<'a> {
    pub space: &'a GradedSpace,
    pub ops: &'a [&'a GradedMap],
}

/// Linear system for graded maps `A → B` of a given shift commuting with the
/// paired operators, with unknown blocks at the listed source degrees.
struct HomSystem {
    offsets: BTreeMap<BiDegree, usize>,
    unknowns: usize,
    equations: Vec<BitVec>,
}

impl HomSystem {
    fn new(a: OpSpace<'_>, b: OpSpace<'_>, shift: BiDegree, degrees: &[BiDegree]) -> HomSystem {
        let mut offsets = BTreeMap::new();
        let mut n = 0;
        for &d in degrees {
            offsets.insert(d, n);
            n += a.space.dim(d) * b.space.dim(d + shift);
        }
        let mut equations = Vec::new();
        let wa = a.space.window();
        let wb = b.space.window();
        for (oa, ob) in a.ops.iter().zip(b.ops.iter()) {
            assert_eq!(
                oa.shift, ob.shift,
                "paired operators must have equal shifts"
            );
            let t = oa.shift;
            // constraints X_{d+t} oA(d) = oB(d+s) X_d for source degrees d touching an unknown block
            let mut sources: BTreeSet<BiDegree> = BTreeSet::new();
            for &d in degrees {
                sources.insert(d);
                sources.insert(d - t);
            }
            for d in sources {
                if !(wa.contains(d)
                    && wa.contains(d + t)
                    && wb.contains(d + shift)
                    && wb.contains(d + shift + t))
                {
                    continue;
                }
                let (da, dat) = (a.space.dim(d), a.space.dim(d + t));
                let (dbs, dbst) = (b.space.dim(d + shift), b.space.dim(d + shift + t));
                if da == 0 || dbst == 0 {
                    continue;
                }
                let x_hi = offsets.get(&(d + t)).copied();
                let x_lo = offsets.get(&d).copied();
                if x_hi.is_none() && x_lo.is_none() {
                    continue;
                }
                let ma = oa.block_or_zero(d, a.space, a.space);
                let mb = ob.block_or_zero(d + shift, b.space, b.space);
                for i in 0..dbst {
                    for j in 0..da {
                        let mut eq = BitVec::zeros(n);
                        if let Some(off) = x_hi {
                            // (X_{d+t} oA)[i,j] = sum_l X_{d+t}[i,l] oA[l,j]
                            for l in 0..dat {
                                if ma.get(l, j) {
                                    eq.flip(off + i * dat + l);
                                }
                            }
                        }
                        if let Some(off) = x_lo {
                            for l in 0..dbs {
                                if mb.get(i, l) {
                                    eq.flip(off + l * da + j);
                                }
                            }
                        }
                        if !eq.is_zero() {
                            equations.push(eq);
                        }
                    }
                }
            }
        }
        HomSystem {
            offsets,
            unknowns: n,
            equations,
        }
    }

    fn matrix(&self) -> F2Matrix {
        F2Matrix::from_rows(self.unknowns, self.equations.clone())
    }

    fn to_map(&self, a: &GradedSpace, b: &GradedSpace, shift: BiDegree, x: &BitVec) -> GradedMap {
        let mut blocks = BTreeMap::new();
        for (&d, &off) in &self.offsets {
            let (r, c) = (b.dim(d + shift), a.dim(d));
            let mut m = F2Matrix::zeros(r, c);
            for i in 0..r {
                for j in 0..c {
                    if x.get(off + i * c + j) {
                        m.set(i, j, true);
                    }
                }
            }
            blocks.insert(d, m);
        }
        GradedMap::from_blocks(shift, blocks)
    }

    fn index(&self, d: BiDegree, i: usize, j: usize, a: &GradedSpace) -> usize {
        self.offsets[&d] + i * a.dim(d) + j
    }
}

fn unknown_degrees(
    a: &GradedSpace,
    b: &GradedSpace,
    shift: BiDegree,
    region: Option<Window>,
) -> Vec<BiDegree> {
    a.degrees()
        .filter(|d| b.dim(*d + shift) > 0 && b.window().contains(*d + shift))
        .filter(|d| region.is_none_or(|w| w.contains(*d)))
        .collect()
}

/// Basis of the graded maps `A → B` of bidegree `shift` commuting with the
/// paired operators. Unknown blocks live at source degrees in `region`
/// (all degrees when `None`); constraints are imposed wherever all four
/// degrees involved lie in the windows of the spaces.
pub fn hom_space(
    a: OpSpace<'_>,
    b: OpSpace<'_>,
    shift: BiDegree,
    region: Option<Window>,
) -> Vec<GradedMap> {
    let degrees = unknown_degrees(a.space, b.space, shift, region);
    // the system splits along chains of degrees linked by operator shifts
    let mut parent: HashMap<BiDegree, BiDegree> = degrees.iter().map(|d| (*d, *d)).collect();
    fn find(p: &mut HashMap<BiDegree, BiDegree>, x: BiDegree) -> BiDegree {
        let mut r = x;
        while p[&r] != r {
            r = p[&r];
        }
        let mut y = x;
        while p[&y] != r {
            let nx = p[&y];
            p.insert(y, r);
            y = nx;
        }
        r
    }
    for op in a.ops {
        for &d in &degrees {
            let e = d + op.shift;
            if parent.contains_key(&e) {
                let (ra, rb) = (find(&mut parent, d), find(&mut parent, e));
                if ra != rb {
                    parent.insert(ra, rb);
                }
            }
        }
    }
    let mut comps: BTreeMap<BiDegree, Vec<BiDegree>> = BTreeMap::new();
    for &d in &degrees {
        let r = find(&mut parent, d);
        comps.entry(r).or_default().push(d);
    }
    let mut out = Vec::new();
    for comp in comps.values() {
        let sys = HomSystem::new(a, b, shift, comp);
        let ker = sys.matrix().kernel_basis();
        for v in ker.rows() {
            out.push(sys.to_map(a.space, b.space, shift, v));
        }
    }
    out
}

/// Total number of unknown entries of an unconstrained graded map.
pub fn unconstrained_hom_dim(
    a: &GradedSpace,
    b: &GradedSpace,
    shift: BiDegree,
    region: Option<Window>,
) -> usize {
    unknown_degrees(a, b, shift, region)
        .iter()
        .map(|d| a.dim(*d) * b.dim(*d + shift))
        .sum()
}

/// One operator-commuting map `A → B` with prescribed images of some basis
/// vectors (`(degree, index, image)`), if such a map exists. Unknown blocks
/// live at source degrees in `region`.
/// Index of the unknown entry `(i, j)` of the block at source degree `d`.
pub struct HomIndex<'a> {
    sys: &'a HomSystem,
    source: &'a GradedSpace,
}

impl HomIndex<'_> {
    pub fn unknowns(&self) -> usize {
        self.sys.unknowns
    }

    pub fn index(&self, d: BiDegree, i: usize, j: usize) -> Option<usize> {
        self.sys
            .offsets
            .contains_key(&d)
            .then(|| self.sys.index(d, i, j, self.source))
    }
}

/// Solves for a map commuting with the paired operators and satisfying
/// extra affine equations `row · x = rhs` built from the unknown indexing.
pub fn solve_hom_affine(
    a: OpSpace<'_>,
    b: OpSpace<'_>,
    shift: BiDegree,
    region: Window,
    extra: &dyn Fn(&HomIndex<'_>) -> Vec<(BitVec, bool)>,
) -> Option<GradedMap> {
    let degrees = unknown_degrees(a.space, b.space, shift, Some(region));
    let sys = HomSystem::new(a, b, shift, &degrees);
    let mut rows = sys.equations.clone();
    let mut rhs = vec![false; rows.len()];
    for (r, v) in extra(&HomIndex {
        sys: &sys,
        source: a.space,
    }) {
        rows.push(r);
        rhs.push(v);
    }
    let m = F2Matrix::from_rows(sys.unknowns, rows);
    let x = m.solve(&BitVec::from_bools(&rhs))?;
    Some(sys.to_map(a.space, b.space, shift, &x))
}

pub fn solve_hom_with_values(
    a: OpSpace<'_>,
    b: OpSpace<'_>,
    shift: BiDegree,
    region: Window,
    values: &[(BiDegree, usize, BitVec)],
) -> Option<GradedMap> {
    let degrees = unknown_degrees(a.space, b.space, shift, Some(region));
    let sys = HomSystem::new(a, b, shift, &degrees);
    let mut rows = sys.equations.clone();
    let mut rhs = vec![false; rows.len()];
    for (d, j, img) in values {
        if !sys.offsets.contains_key(d) {
            if img.is_zero() {
                continue;
            }
            return None;
        }
        for i in 0..b.space.dim(*d + shift) {
            let mut eq = BitVec::zeros(sys.unknowns);
            eq.set(sys.index(*d, i, *j, a.space), true);
            rows.push(eq);
            rhs.push(img.get(i));
        }
    }
    let m = F2Matrix::from_rows(sys.unknowns, rows);
    let x = m.solve(&BitVec::from_bools(&rhs))?;
    Some(sys.to_map(a.space, b.space, shift, &x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_space(gens: &[(i32, &str)]) -> GradedSpace {
        GradedSpace::new(
            Window::line(-10, 10),
            gens.iter().map(|(m, n)| (bd(*m, 0), n.to_string())),
        )
        .unwrap()
    }

    #[test]
    fn names_sorted_within_degree() {
        let s = line_space(&[(0, "b"), (0, "a"), (1, "c")]);
        assert_eq!(s.names(bd(0, 0)), &["a".to_string(), "b".to_string()]);
        assert_eq!(s.index_of(bd(0, 0), "b"), Some(1));
    }

    #[test]
    fn duplicate_names_rejected() {
        let r = GradedSpace::new(
            Window::line(0, 3),
            vec![(bd(0, 0), "x".into()), (bd(1, 0), "x".into())],
        );
        assert!(r.is_err());
    }

    #[test]
    fn dual_round_trip() {
        let s = line_space(&[(0, "a"), (2, "b"), (2, "c")]);
        assert_eq!(s.dual().dual(), s);
        assert_eq!(s.dual().dim(bd(-2, 0)), 2);
    }

    #[test]
    fn hom_space_of_chain() {
        // a -> b under an operator of degree 1; maps to itself commuting with it
        let s = line_space(&[(0, "a"), (1, "b")]);
        let op = GradedMap::from_images(&s, &s, bd(1, 0), vec![("a", vec!["b"])]).unwrap();
        let ops = [&op];
        let o = OpSpace {
            space: &s,
            ops: &ops,
        };
        let homs = hom_space(o, o, BiDegree::ZERO, None);
        // scalar multiples of the identity only
        assert_eq!(homs.len(), 1);
        let zero_shift_one = hom_space(o, o, bd(1, 0), None);
        // a -> b is allowed, b -> nothing
        assert_eq!(zero_shift_one.len(), 1);
    }
}
