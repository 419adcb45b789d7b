//! The verification suites: one per acceptance criterion, each with exact
//! thresholds and a runtime limit. Used by the acceptance test target and
//! by `krtool verify`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::SeedableRng;

use crate::a1mod::{
    loop_power, proj_cover_and_loop, stable_evidence, std_a1, std_p, std_pn, std_trivial, A1Module,
    Margolis,
};
use crate::closedform::{dim_table, h01_pn_dim};
use crate::emod::Q1;
use crate::error::{Error, Result};
use crate::gflin::F2Matrix;
use crate::grmod::{bd, BiDegree, DimTable, Window};
use crate::krassembly::{assemble_kr, cross_check_hv, detection_h1_borel};
use crate::rfun::{apply_r, check_sec_r, psi_duality};
use crate::towers::XModule;

/// Name, key and runtime limit of each suite, in criterion order.
pub const SUITES: [(u8, &str, &str, u64); 12] = [
    (1, "a1", "A(1) structure", 1),
    (2, "h01-a1", "H01 of R(A(1)): two classes", 5),
    (3, "h01-pn", "H01(R P_n) against the closed form", 60),
    (4, "socles", "socles of P_0..P_3", 10),
    (
        5,
        "stable",
        "stable equivalences P⊗P ≃ P_2 and Ω⁴P ≃ Σ¹²P",
        30,
    ),
    (6, "duality", "duality bijection ψ", 10),
    (7, "relext", "relative Ext as shifted H01", 20),
    (
        8,
        "les",
        "long exact sequence of the cover sequence of P_1",
        20,
    ),
    (9, "towers", "tower detection on random x-towers", 30),
    (10, "borel", "detection of height 1 on the Borel form", 10),
    (
        11,
        "hv",
        "brute-force H01(R BV_n) against the closed form",
        120,
    ),
    (12, "kr", "assembled report for BV_1, BV_2", 30),
];

#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: u8,
    pub key: &'static str,
    pub title: &'static str,
    /// The checks themselves passed.
    pub checks_pass: bool,
    pub elapsed: Duration,
    pub limit: Duration,
    pub details: Vec<String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks_pass && self.elapsed < self.limit
    }

    /// `PASS 3 h01-pn [12.30 s < 60 s] title`.
    pub fn line(&self) -> String {
        format!(
            "{} {:>2} {:<8} [{:.2} s < {} s] {}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.id,
            self.key,
            self.elapsed.as_secs_f64(),
            self.limit.as_secs(),
            self.title
        )
    }
}

/// Keys of all suites.
pub fn suite_keys() -> Vec<&'static str> {
    SUITES.iter().map(|s| s.1).collect()
}

/// Runs one suite by key or number.
pub fn run(which: &str) -> Result<Outcome> {
    let &(id, key, title, limit) = SUITES
        .iter()
        .find(|s| s.1 == which || s.0.to_string() == which)
        .ok_or_else(|| Error::Unknown {
            what: "suite",
            name: which.to_string(),
        })?;
    let start = Instant::now();
    let mut details = Vec::new();
    let res = match id {
        1 => a1_structure(&mut details),
        2 => h01_a1(&mut details),
        3 => h01_pn(&mut details),
        4 => socles(&mut details),
        5 => stable(&mut details),
        6 => duality(&mut details),
        7 => relext(&mut details),
        8 => les(&mut details),
        9 => towers(&mut details),
        10 => borel(&mut details),
        11 => hv(&mut details),
        _ => kr(&mut details),
    };
    let checks_pass = match res {
        Ok(b) => b,
        Err(e) => {
            details.push(format!("error: {e}"));
            false
        }
    };
    Ok(Outcome {
        id,
        key,
        title,
        checks_pass,
        elapsed: start.elapsed(),
        limit: Duration::from_secs(limit),
        details,
    })
}

pub fn run_all() -> Vec<Outcome> {
    SUITES
        .iter()
        .map(|s| run(s.1).expect("known suite"))
        .collect()
}

/// `id, key, result, seconds, limit, title` per suite.
pub fn summary_tsv(outcomes: &[Outcome]) -> String {
    let mut s = String::from("id\tkey\tresult\tseconds\tlimit\ttitle\n");
    for o in outcomes {
        let r = if o.passed() { "PASS" } else { "FAIL" };
        writeln!(
            s,
            "{}\t{}\t{r}\t{:.3}\t{}\t{}",
            o.id,
            o.key,
            o.elapsed.as_secs_f64(),
            o.limit.as_secs(),
            o.title
        )
        .expect("string write");
    }
    s
}

fn check(details: &mut Vec<String>, ok: bool, what: impl Into<String>) -> bool {
    details.push(format!(
        "{} {}",
        if ok { "ok  " } else { "FAIL" },
        what.into()
    ));
    ok
}

fn first_mismatches(m: &[(BiDegree, usize, usize)], n: usize) -> String {
    let v: Vec<String> = m
        .iter()
        .take(n)
        .map(|(d, a, b)| format!("{d}: {a} vs {b}"))
        .collect();
    v.join(", ")
}

fn per_twist(m: &[(BiDegree, usize, usize)]) -> String {
    let mut by: BTreeMap<i32, usize> = BTreeMap::new();
    for (d, _, _) in m {
        *by.entry(d.k).or_default() += 1;
    }
    let v: Vec<String> = by.iter().map(|(k, n)| format!("{k}:{n}")).collect();
    v.join(" ")
}

fn a1_structure(out: &mut Vec<String>) -> Result<bool> {
    let a = std_a1();
    let dims: Vec<usize> = (0..=6).map(|m| a.dim(m)).collect();
    let mut ok = check(
        out,
        a.total_dim() == 8,
        format!("total dimension {} = 8", a.total_dim()),
    );
    ok &= check(
        out,
        dims == [1, 1, 1, 2, 1, 1, 1],
        format!("graded dimensions {dims:?}"),
    );
    ok &= check(out, a.validate().is_ok(), "relations hold");
    let (q0, q1) = (
        a.margolis(Margolis::Q0).total(),
        a.margolis(Margolis::Q1).total(),
    );
    ok &= check(
        out,
        q0 == 0 && q1 == 0,
        format!("Margolis homologies {q0}, {q1} vanish"),
    );
    Ok(ok)
}

fn h01_a1(out: &mut Vec<String>) -> Result<bool> {
    let h = apply_r(&std_a1(), Window::new(-12, 12, -6, 6))?.total.h01();
    let classes: Vec<(BiDegree, usize)> = h.dims().dims.into_iter().collect();
    let want = vec![(bd(3, -2), 1), (bd(6, 0), 1)];
    Ok(check(
        out,
        classes == want,
        format!("classes {classes:?} on region {}", h.region),
    ))
}

/// Dimension of `M / (Sq¹M + Sq²M)` in degree `m`.
pub fn cosocle_dim(p: &A1Module, m: i32) -> usize {
    let sp = p.space();
    let a = p.sq1().block_or_zero(bd(m - 1, 0), sp, sp);
    let b = p.sq2().block_or_zero(bd(m - 2, 0), sp, sp);
    p.dim(m) - a.hstack(&b).rank()
}

fn h01_pn(out: &mut Vec<String>) -> Result<bool> {
    let w = Window::new(-16, 16, -8, 8);
    let mut ok = true;
    for n in 0..=4 {
        let h = apply_r(&std_pn(n, 40), w)?.total.h01();
        let brute = h.dims();
        let closed = dim_table(h.region, |d| h01_pn_dim(n, d));
        let m = brute.mismatches(&closed);
        ok &= check(
            out,
            m.is_empty(),
            format!(
                "n={n}: {} mismatching degrees on {} (per twist {}) e.g. {}",
                m.len(),
                h.region,
                per_twist(&m),
                first_mismatches(&m, 4)
            ),
        );
        // independent description of the brute-force side
        let oracle = dim_table(h.region, |d| match d.k {
            t if t >= 0 => std_pn(n - t, 90).socle().0.dim(bd(d.m - t, 0)),
            -1 => 0,
            t => cosocle_dim(&std_pn(n - 2 - t, 90), d.m - (5 + t)),
        });
        let om = brute.mismatches(&oracle);
        out.push(format!(
            "info n={n}: brute force vs socle/cosocle description: {} mismatches",
            om.len()
        ));
    }
    // closed-form twist slices against socles: twist +t of the n = 0 form is Σ^t Soc(P_{-t})
    for t in 0..=3 {
        let bad: Vec<i32> = (-8..=24)
            .filter(|&m| h01_pn_dim(0, bd(m + t, t)) != std_pn(-t, 60).socle().0.dim(bd(m, 0)))
            .collect();
        out.push(format!(
            "info closed-form twist {t} slice vs Σ^{t} Soc(P_{}): mismatching m {bad:?}",
            -t
        ));
    }
    Ok(ok)
}

fn socle_degrees(p: &A1Module, lo: i32, hi: i32) -> Vec<(i32, usize)> {
    let (s, region) = p.socle();
    (lo..=hi)
        .filter(|m| region.contains(bd(*m, 0)))
        .map(|m| (m, s.dim(bd(m, 0))))
        .filter(|x| x.1 > 0)
        .collect()
}

fn socles(out: &mut Vec<String>) -> Result<bool> {
    let (lo, hi) = (-8, 32);
    let mut ok = true;
    for (n, first) in [(0, 0), (1, 4)] {
        let got = socle_degrees(&std_pn(n, 40), lo, hi);
        let want: Vec<(i32, usize)> = (first..=hi)
            .step_by(4)
            .filter(|m| std_pn(n, 40).socle().1.contains(bd(*m, 0)))
            .map(|m| (m, 1))
            .collect();
        ok &= check(out, got == want, format!("socle of P_{n}: {got:?}"));
    }
    for n in 2..=3 {
        let small = socle_degrees(&std_pn(n, 40), lo, hi);
        let big = socle_degrees(&std_pn(n, 60), lo, hi);
        let region_hi = std_pn(n, 40).socle().1.m_hi.min(hi);
        let big_clipped: Vec<(i32, usize)> = big.into_iter().filter(|x| x.0 <= region_hi).collect();
        ok &= check(
            out,
            small == big_clipped,
            format!("socle of P_{n} (stable under enlargement): {small:?}"),
        );
    }
    out.push("info the label of the lowest socle class (degree 6 of P_2, degree 7 of P_3) is not asserted".into());
    Ok(ok)
}

fn stable(out: &mut Vec<String>) -> Result<bool> {
    let p = std_p(32);
    let pp = A1Module::tensor_upto(&p, &p, Some(32))?;
    let e1 = stable_evidence(&pp, &std_pn(2, 40), 0)?;
    let mut ok = check(
        out,
        e1.consistent() && e1.region.m_hi >= 24,
        format!("P⊗P vs P_2 on {}: {:?}", e1.region, e1.detail),
    );
    let l = loop_power(&std_p(40), 4)?;
    let e2 = stable_evidence(&l, &std_p(40).shift(12), 0)?;
    ok &= check(
        out,
        e2.consistent() && e2.region.m_hi >= 24,
        format!("Ω⁴P vs Σ¹²P on {}: {:?}", e2.region, e2.detail),
    );
    Ok(ok)
}

fn duality(out: &mut Vec<String>) -> Result<bool> {
    let w = Window::new(-8, 8, -5, 5);
    let mut ok = true;
    for m in [std_trivial(), std_a1(), std_pn(1, 12)] {
        let r = psi_duality(&m, w)?;
        ok &= check(
            out,
            r.ok() && r.degrees_checked > 0,
            format!(
                "{}: {} degrees on {}, failures {:?}",
                m.name(),
                r.degrees_checked,
                r.region,
                r.failures.iter().take(3).collect::<Vec<_>>()
            ),
        );
    }
    Ok(ok)
}

fn relext(out: &mut Vec<String>) -> Result<bool> {
    let w = Window::new(-12, 12, -6, 6);
    let mut ok = true;
    for m in [std_pn(0, 30), std_a1()] {
        let r = apply_r(&m, w)?.total;
        let h = r.h01().dims();
        let ext: Vec<DimTable> = (1..=3)
            .map(|n| r.rel_ext(n).map(|x| x.dims()))
            .collect::<Result<_>>()?;
        let mm = ext[0].mismatches(&h.shift(Q1));
        ok &= check(
            out,
            mm.is_empty() && ext[0].total() > 0,
            format!(
                "{}: relExt¹ = Σ^(2,1) H01 ({} classes)",
                m.name(),
                ext[0].total()
            ),
        );
        for n in 1..=2 {
            let mm = ext[n].mismatches(&ext[n - 1].shift(Q1));
            ok &= check(
                out,
                mm.is_empty(),
                format!("{}: relExt^{} = Σ^(2,1) relExt^{n}", m.name(), n + 1),
            );
            let literal = ext[n - 1].mismatches(&ext[n].shift(Q1));
            out.push(format!(
                "info {}: reading relExt^{n} = Σ^(2,1) relExt^{} instead gives {} mismatches",
                m.name(),
                n + 1,
                literal.len()
            ));
        }
    }
    Ok(ok)
}

fn les(out: &mut Vec<String>) -> Result<bool> {
    let p = std_pn(1, 24);
    let c = proj_cover_and_loop(&p)?;
    let s = check_sec_r(
        &c.loop_module,
        &c.cover,
        &p,
        &c.inclusion,
        &c.epi,
        Window::new(-10, 10, -5, 5),
    )?;
    let l = &s.les;
    let ok = check(
        out,
        l.failures.is_empty(),
        format!(
            "cover sequence of P_1 on {}: H01 totals {}, {}, {}; failures {:?}",
            l.region,
            l.ha.total(),
            l.hb.total(),
            l.hc.total(),
            l.failures.iter().take(3).collect::<Vec<_>>()
        ),
    );
    Ok(ok)
}

/// Multiplication by `x^h` from degree `e`, built from the module description.
fn x_power(m: &XModule, e: i32, h: u32) -> F2Matrix {
    let src = m.basis(e);
    let tgt = m.basis(e + h as i32 * m.d);
    let mut out = F2Matrix::zeros(tgt.len(), src.len());
    for (j, b) in src.iter().enumerate() {
        let mut cur = Some(b.clone());
        for _ in 0..h {
            cur = cur.and_then(|c| m.times_x(&c));
        }
        if let Some(c) = cur {
            out.set(
                tgt.iter().position(|t| *t == c).expect("basis element"),
                j,
                true,
            );
        }
    }
    out
}

/// `x^h` kills the `x`-torsion of `M` in every source degree feeding level `n`.
pub fn torsion_oracle(m: &XModule, h: u32, n: i32, j: (i32, i32)) -> bool {
    let big = m.torsion_height() + 1;
    (j.0..=j.1).all(|t| {
        let src = t - (n + h as i32) * m.d;
        let gamma = x_power(m, src, big).kernel_basis();
        let xh = x_power(m, src, h);
        gamma.rows().iter().all(|v| xh.apply(v).is_zero())
    })
}

fn towers(out: &mut Vec<String>) -> Result<bool> {
    const INSTANCES: usize = 120;
    let (lo, hi, j) = (-3, 3, (-5, 5));
    let mut rng = StdRng::seed_from_u64(2024);
    let (mut agree, mut total, mut cc_ok, mut cc_total) = (0, 0, 0, 0);
    let mut bad = Vec::new();
    for _ in 0..INSTANCES {
        let m = XModule::random(&mut rng);
        let t = m.tower(lo, hi, j.0, j.1)?;
        for h in 1..=2u32 {
            for n in lo..=hi - h as i32 {
                total += 1;
                let d = t.detect(h, n)?;
                if d.holds == torsion_oracle(&m, h, n, j) && d.consistent() {
                    agree += 1;
                } else if bad.len() < 3 {
                    bad.push(format!("{m:?} h={h} n={n}"));
                }
            }
        }
        for n in lo + 1..=hi - 2 {
            cc_total += 1;
            let cc = t.chain_complex_at(n)?;
            if cc.certified() && cc.homology_matches() {
                cc_ok += 1;
            }
        }
    }
    let mut ok = check(out, agree == total, format!("{INSTANCES} seeded instances: detection agrees with the torsion oracle {agree}/{total} {bad:?}"));
    ok &= check(
        out,
        cc_ok == cc_total,
        format!("chain complex homology = Im f_n / Im f_(n+1): {cc_ok}/{cc_total}"),
    );
    Ok(ok)
}

fn borel(out: &mut Vec<String>) -> Result<bool> {
    let w = Window::new(-16, 16, -8, 8);
    let mut ok = true;
    for n in 1..=3 {
        let c = detection_h1_borel(n, w)?;
        ok &= check(
            out,
            c.certified(),
            format!(
                "n={n}: F[a]-linear maps {} (unconstrained {}), witness {:?}",
                c.linear_dim, c.unconstrained_dim, c.witness
            ),
        );
    }
    Ok(ok)
}

fn hv(out: &mut Vec<String>) -> Result<bool> {
    let w = Window::new(-14, 14, -7, 7);
    let mut ok = true;
    for n in 1..=2 {
        let c = cross_check_hv(n, w)?;
        ok &= check(
            out,
            c.agrees(),
            format!(
                "n={n}: {} mismatching degrees on {} (per twist {}) e.g. {}",
                c.mismatches.len(),
                c.region,
                per_twist(&c.mismatches),
                first_mismatches(&c.mismatches, 4)
            ),
        );
        let twists = c.free_twists();
        ok &= check(
            out,
            c.free_part_matches() && twists.iter().all(|k| *k == 0 || *k == -2),
            format!(
                "n={n}: free part, {} generators, classes in twists {twists:?}",
                c.free_generators.len()
            ),
        );
    }
    Ok(ok)
}

fn kr(out: &mut Vec<String>) -> Result<bool> {
    let w = Window::new(-14, 14, -7, 7);
    let mut ok = true;
    for n in 1..=2 {
        let r = assemble_kr(n, w, 3)?;
        let c = cross_check_hv(n, w)?;
        ok &= check(
            out,
            r.layers_periodic(),
            format!("n={n}: layer j+1 = layer j moved by (1,1)"),
        );
        ok &= check(
            out,
            r.f2_doubled() && r.parts_disjoint(),
            format!("n={n}: F² paired with its Λ(v₁) companion, parts disjoint"),
        );
        ok &= check(
            out,
            r.torsion_orders_ok(),
            format!("n={n}: v₁-torsion orders 1 or 2"),
        );
        let total = r.total_dims();
        let additive = r
            .region
            .degrees()
            .into_iter()
            .all(|d| total.get(d) == r.parts().iter().map(|(_, s)| s.dim(d)).sum::<usize>());
        ok &= check(
            out,
            additive,
            format!("n={n}: totals are the sum of the parts"),
        );
        let vs_closed = r.column_mismatches(&c.closed, c.region);
        ok &= check(
            out,
            vs_closed.is_empty(),
            format!(
                "n={n}: column sums vs the closed torsion part: {} mismatches",
                vs_closed.len()
            ),
        );
        let vs_brute = r.column_mismatches(&c.brute, c.region);
        ok &= check(
            out,
            vs_brute.is_empty(),
            format!(
                "n={n}: column sums vs brute-force H01: {} mismatches e.g. {}",
                vs_brute.len(),
                first_mismatches(&vs_brute, 4)
            ),
        );
    }
    Ok(ok)
}
