//! Line-based text format for A(1)-modules, E-modules and towers.
//!
//! ```text
//! kind a1|e|tower
//! name <name>
//! window <m_lo> <m_hi> <k_lo> <k_hi>
//! exact <m_lo> <m_hi> <k_lo> <k_hi>
//! gen <name> <m> [<k>]
//! sq1 <name> = <name> + <name> ...
//! ```
//! Bounds may be `inf` or `-inf`. Action lines use `sq1`, `sq2` (a1) or
//! `q0`, `q1`, `a`, `s` (e); `= 0` is accepted. E-modules list their
//! operators in an `ops` line. Towers use `levels <lo> <hi>`, `space K`,
//! `space k <n>`, `space C <n>` blocks for their spaces,
//! `shift <f|e|c|delta> <n> <m> <k>` for map degrees and
//! `<f|e|c|delta> <n> <name> = ...` for images. `#` starts a comment.
//! Printing is canonical, so printing a parsed file gives the same bytes.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::a1mod::{z, A1Module};
use crate::emod::{EModule, A_SHIFT, Q0, Q1, S_SHIFT};
use crate::error::{Error, Result};
use crate::gflin::F2Matrix;
use crate::grmod::{bd, BiDegree, GradedMap, GradedSpace, Window, UNBOUNDED};
use crate::towers::{Cofiber, Level, TowerData};

/// A parsed module file.
#[derive(Clone, Debug)]
pub enum ModuleFile {
    A1(A1Module),
    E(EModule),
    Tower(Box<TowerData>),
}

impl ModuleFile {
    pub fn kind(&self) -> &'static str {
        match self {
            ModuleFile::A1(_) => "a1",
            ModuleFile::E(_) => "e",
            ModuleFile::Tower(_) => "tower",
        }
    }
}

fn bound(x: i32) -> String {
    if x >= UNBOUNDED {
        "inf".into()
    } else if x <= -UNBOUNDED {
        "-inf".into()
    } else {
        x.to_string()
    }
}

fn window_line(key: &str, w: Window) -> String {
    format!(
        "{key} {} {} {} {}\n",
        bound(w.m_lo),
        bound(w.m_hi),
        bound(w.k_lo),
        bound(w.k_hi)
    )
}

fn gen_lines(out: &mut String, sp: &GradedSpace, twisted: bool) {
    for (d, n) in sp.iter() {
        if twisted {
            writeln!(out, "gen {n} {} {}", d.m, d.k).expect("string write");
        } else {
            writeln!(out, "gen {n} {}", d.m).expect("string write");
        }
    }
}

/// One line per source element with a nonzero image, prefixed by `key`.
fn map_lines(out: &mut String, key: &str, map: &GradedMap, src: &GradedSpace, tgt: &GradedSpace) {
    for (d, b) in map.blocks() {
        let sn = src.names(d);
        let tn = tgt.names(d + map.shift);
        for (j, s) in sn.iter().enumerate() {
            let img: Vec<&str> = (0..b.nrows())
                .filter(|&i| b.get(i, j))
                .map(|i| tn[i].as_str())
                .collect();
            if !img.is_empty() {
                writeln!(out, "{key} {s} = {}", img.join(" + ")).expect("string write");
            }
        }
    }
}

pub fn print_a1(m: &A1Module) -> String {
    let mut s = String::from("kind a1\n");
    writeln!(s, "name {}", m.name()).expect("string write");
    s.push_str(&window_line("window", m.space().window()));
    s.push_str(&window_line("exact", m.exact()));
    gen_lines(&mut s, m.space(), false);
    map_lines(&mut s, "sq1", m.sq1(), m.space(), m.space());
    map_lines(&mut s, "sq2", m.sq2(), m.space(), m.space());
    s
}

pub fn print_e(m: &EModule) -> String {
    let mut s = String::from("kind e\n");
    writeln!(s, "name {}", m.name()).expect("string write");
    s.push_str(&window_line("window", m.space().window()));
    s.push_str(&window_line("exact", m.exact()));
    let mut ops = vec!["q0", "q1"];
    if m.a_action().is_some() {
        ops.push("a");
    }
    if m.s_action().is_some() {
        ops.push("s");
    }
    writeln!(s, "ops {}", ops.join(" ")).expect("string write");
    gen_lines(&mut s, m.space(), true);
    let sp = m.space();
    map_lines(&mut s, "q0", m.q0(), sp, sp);
    map_lines(&mut s, "q1", m.q1(), sp, sp);
    if let Some(a) = m.a_action() {
        map_lines(&mut s, "a", a, sp, sp);
    }
    if let Some(x) = m.s_action() {
        map_lines(&mut s, "s", x, sp, sp);
    }
    s
}

pub fn print_tower(t: &TowerData) -> String {
    let mut s = String::from("kind tower\n");
    s.push_str(&window_line("window", t.region()));
    writeln!(s, "levels {} {}", t.lo(), t.hi()).expect("string write");
    s.push_str("space K\n");
    gen_lines(&mut s, t.big_k(), true);
    for n in t.lo()..=t.hi() {
        let l = t.level(n).expect("level in range");
        writeln!(s, "space k {n}").expect("string write");
        gen_lines(&mut s, &l.k, true);
        if let Some(c) = &l.cofiber {
            writeln!(s, "space C {n}").expect("string write");
            gen_lines(&mut s, &c.space, true);
        }
    }
    for n in t.lo()..=t.hi() {
        let l = t.level(n).expect("level in range");
        let shift = |s: &mut String, key: &str, m: &GradedMap| {
            writeln!(s, "shift {key} {n} {} {}", m.shift.m, m.shift.k).expect("string write");
        };
        shift(&mut s, "f", &l.f);
        map_lines(&mut s, &format!("f {n}"), &l.f, &l.k, t.big_k());
        if let Some(e) = &l.e {
            shift(&mut s, "e", e);
            map_lines(
                &mut s,
                &format!("e {n}"),
                e,
                &l.k,
                &t.level(n - 1).expect("level below").k,
            );
        }
        if let Some(c) = &l.cofiber {
            shift(&mut s, "c", &c.c);
            map_lines(&mut s, &format!("c {n}"), &c.c, &l.k, &c.space);
            shift(&mut s, "delta", &c.delta);
            map_lines(
                &mut s,
                &format!("delta {n}"),
                &c.delta,
                &c.space,
                &t.level(n + 1).expect("level above").k,
            );
        }
    }
    s
}

pub fn print(f: &ModuleFile) -> String {
    match f {
        ModuleFile::A1(m) => print_a1(m),
        ModuleFile::E(m) => print_e(m),
        ModuleFile::Tower(t) => print_tower(t),
    }
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_bound(line: usize, s: &str) -> Result<i32> {
    match s {
        "inf" => Ok(UNBOUNDED),
        "-inf" => Ok(-UNBOUNDED),
        _ => s
            .parse()
            .map_err(|_| perr(line, format!("expected an integer or inf, got {s:?}"))),
    }
}

fn parse_int(line: usize, s: &str) -> Result<i32> {
    s.parse()
        .map_err(|_| perr(line, format!("expected an integer, got {s:?}")))
}

fn parse_window(line: usize, toks: &[&str]) -> Result<Window> {
    if toks.len() != 4 {
        return Err(perr(line, "a window needs four bounds"));
    }
    let v: Vec<i32> = toks
        .iter()
        .map(|t| parse_bound(line, t))
        .collect::<Result<_>>()?;
    Ok(Window::new(v[0], v[1], v[2], v[3]))
}

/// Right-hand side `a + b + ...` or `0`.
fn parse_rhs(line: usize, toks: &[&str]) -> Result<Vec<String>> {
    if toks == ["0"] {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for (i, t) in toks.iter().enumerate() {
        if i % 2 == 1 {
            if *t != "+" {
                return Err(perr(line, format!("expected '+', got {t:?}")));
            }
        } else {
            out.push(t.to_string());
        }
    }
    if out.is_empty() || toks.len().is_multiple_of(2) {
        return Err(perr(line, "malformed right-hand side"));
    }
    Ok(out)
}

/// A named space under construction: generators with their source lines.
#[derive(Default)]
struct SpaceDraft {
    gens: Vec<(BiDegree, String, usize)>,
}

impl SpaceDraft {
    fn build(&self, w: Window) -> Result<GradedSpace> {
        for (d, n, line) in &self.gens {
            if !w.contains(*d) {
                return Err(perr(
                    *line,
                    format!("generator {n} at {d} lies outside the window {w}"),
                ));
            }
        }
        GradedSpace::new(w, self.gens.iter().map(|(d, n, _)| (*d, n.clone()))).map_err(|e| {
            let line = self.gens.first().map_or(0, |g| g.2);
            perr(line, e.to_string())
        })
    }
}

/// Action lines for one map: source, targets and line number.
type Images = Vec<(String, Vec<String>, usize)>;

fn build_map(
    images: &Images,
    shift: BiDegree,
    src: &GradedSpace,
    tgt: &GradedSpace,
) -> Result<GradedMap> {
    let sl = src.lookup();
    let tl = tgt.lookup();
    let mut blocks: BTreeMap<BiDegree, F2Matrix> = BTreeMap::new();
    for (s, ts, line) in images {
        let &(d, j) = sl
            .get(s)
            .ok_or_else(|| perr(*line, format!("undeclared element {s}")))?;
        let e = d + shift;
        for t in ts {
            let &(dt, i) = tl
                .get(t)
                .ok_or_else(|| perr(*line, format!("undeclared element {t}")))?;
            if dt != e {
                return Err(perr(
                    *line,
                    format!("{s} -> {t}: target degree {dt}, expected {d} + {shift} = {e}"),
                ));
            }
            blocks
                .entry(d)
                .or_insert_with(|| F2Matrix::zeros(tgt.dim(e), src.dim(d)))
                .flip(i, j);
        }
    }
    Ok(GradedMap::from_blocks(shift, blocks))
}

/// Tokenised nonempty lines with 1-based line numbers, comments removed.
fn lines(text: &str) -> Vec<(usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .filter_map(|(i, l)| {
            let l = l.split('#').next().unwrap_or("");
            let toks: Vec<&str> = l.split_whitespace().collect();
            (!toks.is_empty()).then_some((i + 1, toks))
        })
        .collect()
}

pub fn parse(text: &str) -> Result<ModuleFile> {
    let ls = lines(text);
    let Some((first, head)) = ls.first() else {
        return Err(perr(0, "empty file"));
    };
    if head.len() != 2 || head[0] != "kind" {
        return Err(perr(*first, "the first line must be 'kind a1|e|tower'"));
    }
    let rest = &ls[1..];
    match head[1] {
        "a1" => parse_a1(rest).map(ModuleFile::A1),
        "e" => parse_e(rest).map(ModuleFile::E),
        "tower" => parse_tower(rest).map(|t| ModuleFile::Tower(Box::new(t))),
        k => Err(perr(*first, format!("unknown kind {k:?}"))),
    }
}

/// Parses a gen line; `twisted` decides whether the twist is required.
fn parse_gen(line: usize, toks: &[&str], twisted: bool) -> Result<(BiDegree, String)> {
    match (toks.len(), twisted) {
        (3, false) => Ok((z(parse_int(line, toks[2])?), toks[1].to_string())),
        (3, true) => Ok((bd(parse_int(line, toks[2])?, 0), toks[1].to_string())),
        (4, _) => {
            let k = parse_int(line, toks[3])?;
            if !twisted && k != 0 {
                return Err(perr(line, "A(1)-module generators have twist 0"));
            }
            Ok((bd(parse_int(line, toks[2])?, k), toks[1].to_string()))
        }
        _ => Err(perr(line, "expected 'gen <name> <m> [<k>]'")),
    }
}

fn parse_action(line: usize, toks: &[&str]) -> Result<(String, Vec<String>)> {
    if toks.len() < 4 || toks[2] != "=" {
        return Err(perr(
            line,
            format!("expected '{} <name> = <name> [+ <name>]... | 0'", toks[0]),
        ));
    }
    Ok((toks[1].to_string(), parse_rhs(line, &toks[3..])?))
}

struct Header {
    name: Option<String>,
    window: Option<Window>,
    exact: Option<Window>,
}

/// Handles `name`, `window` and `exact` lines; returns false for other keys.
fn header_line(h: &mut Header, line: usize, toks: &[&str]) -> Result<bool> {
    match toks[0] {
        "name" if toks.len() >= 2 => h.name = Some(toks[1..].join(" ")),
        "name" => return Err(perr(line, "expected 'name <name>'")),
        "window" => h.window = Some(parse_window(line, &toks[1..])?),
        "exact" => h.exact = Some(parse_window(line, &toks[1..])?),
        _ => return Ok(false),
    }
    Ok(true)
}

fn parse_a1(ls: &[(usize, Vec<&str>)]) -> Result<A1Module> {
    let mut h = Header {
        name: None,
        window: None,
        exact: None,
    };
    let mut gens = SpaceDraft::default();
    let mut acts: HashMap<&str, Images> = HashMap::new();
    for (line, toks) in ls {
        let line = *line;
        if header_line(&mut h, line, toks)? {
            continue;
        }
        match toks[0] {
            "gen" => {
                let (d, n) = parse_gen(line, toks, false)?;
                gens.gens.push((d, n, line));
            }
            "sq1" | "sq2" => {
                let (s, t) = parse_action(line, toks)?;
                acts.entry(toks[0]).or_default().push((s, t, line));
            }
            k => return Err(perr(line, format!("unexpected key {k:?} in an a1 file"))),
        }
    }
    let w = h.window.unwrap_or(Window::line(-UNBOUNDED, UNBOUNDED));
    let sp = gens.build(w)?;
    let s1 = build_map(acts.get("sq1").unwrap_or(&Vec::new()), z(1), &sp, &sp)?;
    let s2 = build_map(acts.get("sq2").unwrap_or(&Vec::new()), z(2), &sp, &sp)?;
    let exact = h.exact.unwrap_or(w);
    A1Module::new(h.name.unwrap_or_else(|| "M".into()), sp, s1, s2, exact)
        .map_err(|e| perr(0, e.to_string()))
}

fn parse_e(ls: &[(usize, Vec<&str>)]) -> Result<EModule> {
    let mut h = Header {
        name: None,
        window: None,
        exact: None,
    };
    let mut gens = SpaceDraft::default();
    let mut acts: HashMap<&str, Images> = HashMap::new();
    let mut ops: Option<Vec<String>> = None;
    for (line, toks) in ls {
        let line = *line;
        if header_line(&mut h, line, toks)? {
            continue;
        }
        match toks[0] {
            "ops" => ops = Some(toks[1..].iter().map(|s| s.to_string()).collect()),
            "gen" => {
                let (d, n) = parse_gen(line, toks, true)?;
                gens.gens.push((d, n, line));
            }
            "q0" | "q1" | "a" | "s" => {
                let (s, t) = parse_action(line, toks)?;
                acts.entry(toks[0]).or_default().push((s, t, line));
            }
            k => return Err(perr(line, format!("unexpected key {k:?} in an e file"))),
        }
    }
    let w = h
        .window
        .ok_or_else(|| perr(0, "an e file needs a window line"))?;
    let sp = gens.build(w)?;
    let empty = Vec::new();
    let map = |k: &str, s: BiDegree| build_map(acts.get(k).unwrap_or(&empty), s, &sp, &sp);
    let q0 = map("q0", Q0)?;
    let q1 = map("q1", Q1)?;
    let has = |k: &str| {
        ops.as_ref()
            .map_or(acts.contains_key(k), |o| o.iter().any(|x| x == k))
    };
    let a = if has("a") {
        Some(map("a", A_SHIFT)?)
    } else {
        None
    };
    let s = if has("s") {
        Some(map("s", S_SHIFT)?)
    } else {
        None
    };
    let exact = h.exact.unwrap_or(w);
    let m = EModule::new(h.name.unwrap_or_else(|| "M".into()), sp, q0, q1, exact)
        .map_err(|e| perr(0, e.to_string()))?;
    m.with_actions(a, s).map_err(|e| perr(0, e.to_string()))
}

fn parse_tower(ls: &[(usize, Vec<&str>)]) -> Result<TowerData> {
    let mut h = Header {
        name: None,
        window: None,
        exact: None,
    };
    let mut levels: Option<(i32, i32)> = None;
    // space key: ("K", 0), ("k", n), ("C", n)
    let mut spaces: BTreeMap<(String, i32), SpaceDraft> = BTreeMap::new();
    let mut current: Option<(String, i32)> = None;
    let mut shifts: HashMap<(String, i32), BiDegree> = HashMap::new();
    let mut acts: HashMap<(String, i32), Images> = HashMap::new();
    for (line, toks) in ls {
        let line = *line;
        if header_line(&mut h, line, toks)? {
            continue;
        }
        match toks[0] {
            "levels" if toks.len() == 3 => {
                levels = Some((parse_int(line, toks[1])?, parse_int(line, toks[2])?))
            }
            "space" => {
                let key = match toks.get(1..) {
                    Some(["K"]) => ("K".to_string(), 0),
                    Some([s @ ("k" | "C"), n]) => (s.to_string(), parse_int(line, n)?),
                    _ => {
                        return Err(perr(
                            line,
                            "expected 'space K', 'space k <n>' or 'space C <n>'",
                        ))
                    }
                };
                spaces.entry(key.clone()).or_default();
                current = Some(key);
            }
            "gen" => {
                let key = current
                    .clone()
                    .ok_or_else(|| perr(line, "gen line outside a space block"))?;
                let (d, n) = parse_gen(line, toks, true)?;
                spaces
                    .get_mut(&key)
                    .expect("opened")
                    .gens
                    .push((d, n, line));
            }
            "shift" if toks.len() == 5 => {
                let key = (toks[1].to_string(), parse_int(line, toks[2])?);
                shifts.insert(
                    key,
                    bd(parse_int(line, toks[3])?, parse_int(line, toks[4])?),
                );
            }
            "f" | "e" | "c" | "delta" if toks.len() >= 2 => {
                let n = parse_int(line, toks[1])?;
                let (s, t) = parse_action(line, &toks[1..])
                    .map_err(|_| perr(line, format!("expected '{} <n> <name> = ...'", toks[0])))?;
                acts.entry((toks[0].to_string(), n))
                    .or_default()
                    .push((s, t, line));
            }
            k => return Err(perr(line, format!("unexpected line {k:?} in a tower file"))),
        }
    }
    let region = h
        .window
        .ok_or_else(|| perr(0, "a tower file needs a window line"))?;
    let (lo, hi) = levels.ok_or_else(|| perr(0, "a tower file needs a levels line"))?;
    if hi < lo {
        return Err(perr(0, "levels must satisfy lo <= hi"));
    }
    let build = |key: (&str, i32)| -> Result<GradedSpace> {
        spaces
            .get(&(key.0.to_string(), key.1))
            .ok_or_else(|| perr(0, format!("missing space {} {}", key.0, key.1)))?
            .build(region)
    };
    let big_k = build(("K", 0))?;
    let ks: Vec<GradedSpace> = (lo..=hi).map(|n| build(("k", n))).collect::<Result<_>>()?;
    let empty = Vec::new();
    let map = |key: &str, n: i32, src: &GradedSpace, tgt: &GradedSpace| -> Result<GradedMap> {
        let k = (key.to_string(), n);
        let shift = *shifts
            .get(&k)
            .ok_or_else(|| perr(0, format!("missing 'shift {key} {n}'")))?;
        build_map(acts.get(&k).unwrap_or(&empty), shift, src, tgt)
    };
    let mut out = Vec::new();
    for n in lo..=hi {
        let i = (n - lo) as usize;
        let k = &ks[i];
        let f = map("f", n, k, &big_k)?;
        let e = if n > lo {
            Some(map("e", n, k, &ks[i - 1])?)
        } else {
            None
        };
        let cofiber = if n < hi {
            let space = build(("C", n))?;
            let c = map("c", n, k, &space)?;
            let delta = map("delta", n, &space, &ks[i + 1])?;
            Some(Cofiber { space, c, delta })
        } else {
            None
        };
        out.push(Level {
            k: k.clone(),
            f,
            e,
            cofiber,
        });
    }
    TowerData::new(lo, region, big_k, out).map_err(|e| perr(0, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::a1mod::{std_a1, std_pn};
    use crate::grmod::Window;
    use crate::rfun::apply_r;
    use crate::towers::XModule;

    #[test]
    fn a1_round_trip() {
        for m in [std_a1(), std_pn(1, 20), std_pn(2, 20)] {
            let text = print_a1(&m);
            let ModuleFile::A1(back) = parse(&text).unwrap() else {
                panic!()
            };
            assert_eq!(back, m);
            assert_eq!(print_a1(&back), text);
        }
    }

    #[test]
    fn e_round_trip() {
        let r = apply_r(&std_a1(), Window::new(-4, 4, -2, 2)).unwrap().total;
        let text = print_e(&r);
        let ModuleFile::E(back) = parse(&text).unwrap() else {
            panic!()
        };
        assert_eq!(back, r);
        assert_eq!(print_e(&back), text);
    }

    #[test]
    fn tower_round_trip() {
        let m = XModule {
            d: 1,
            torsion: vec![(0, 2)],
            free: vec![1],
        };
        let t = m.tower(-1, 1, -3, 3).unwrap();
        let text = print_tower(&t);
        let ModuleFile::Tower(back) = parse(&text).unwrap() else {
            panic!()
        };
        assert_eq!(print_tower(&back), text);
        assert!(back.validate().is_ok());
    }

    #[test]
    fn hand_written_file() {
        let text =
            "# the module F[Sq1]/...\nkind a1\ngen x 0\ngen y 1  # top\nsq1 x = y\nsq2 y = 0\n";
        let ModuleFile::A1(m) = parse(text).unwrap() else {
            panic!()
        };
        assert_eq!(m.total_dim(), 2);
        assert_eq!(m.sq1().block(z(0)).unwrap().rank(), 1);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad_degree = "kind a1\ngen x 0\ngen y 2\nsq1 x = y\n";
        match parse(bad_degree) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        let undeclared = "kind a1\ngen x 0\nsq1 x = w\n";
        assert!(matches!(
            parse(undeclared),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse("kind b\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse("kind a1\ngen x zero\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
