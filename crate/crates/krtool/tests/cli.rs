use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::{Command, Output};

use krcore::a1mod::std_pn;
use krcore::grmod::{bd, BiDegree, Window};
use krcore::krassembly::assemble_kr;
use krcore::verify::cosocle_dim;

fn krtool(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_krtool"))
        .args(args)
        .output()
        .expect("run krtool")
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "krtool failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("krtool-test-{}-{name}", std::process::id()))
}

/// `(m, k) -> dim` summed over tags, from `m k dim tag` rows.
fn tsv_dims(text: &str) -> BTreeMap<BiDegree, usize> {
    let mut out = BTreeMap::new();
    for line in text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("m\t"))
    {
        let f: Vec<&str> = line.split('\t').collect();
        let d = bd(f[0].parse().unwrap(), f[1].parse().unwrap());
        *out.entry(d).or_default() += f[2].parse::<usize>().unwrap();
    }
    out
}

/// Monomials `x^{4e} a^i v^l σ^{-4j}` with `i l = 0`, `i ≤ 2`, enumerated directly.
fn hp_count(d: BiDegree) -> usize {
    let mut n = 0;
    for e in 0..=1 {
        for i in 0..=2 {
            for l in 0..=60 {
                if i * l != 0 {
                    continue;
                }
                for j in -30..=30 {
                    if (4 * e + l - 4 * j, i + l + 4 * j) == (d.m, d.k) {
                        n += 1;
                    }
                }
            }
        }
    }
    n
}

#[test]
fn hp_chart_grid_matches_enumeration() {
    let text = stdout(&krtool(&[
        "compute",
        "chart",
        "--builtin",
        "HP",
        "--window",
        "-12",
        "12",
        "-8",
        "8",
        "--format",
        "txt",
    ]));
    let mut grid = BTreeMap::new();
    for line in text.lines().skip(1).filter(|l| !l.starts_with(" k/m")) {
        let (k, cells) = line.split_once('|').unwrap();
        let k: i32 = k.trim().parse().unwrap();
        for (c, m) in cells.split_whitespace().zip(-12..=12) {
            grid.insert(bd(m, k), if c == "." { 0 } else { c.parse().unwrap() });
        }
    }
    assert_eq!(grid.len(), 25 * 17);
    for d in [bd(0, 0), bd(4, 1), bd(1, 1), bd(8, 0)] {
        assert_eq!(grid[&d], 1, "{d}");
    }
    for (d, n) in &grid {
        assert_eq!(*n, hp_count(*d), "{d}");
    }
}

#[test]
fn h01_of_rp1_matches_socle_description() {
    let text = stdout(&krtool(&[
        "compute",
        "h01",
        "--builtin",
        "RP1",
        "--window",
        "-12",
        "12",
        "-6",
        "6",
    ]));
    assert!(
        text.starts_with("# H01(R(RP1)) on m∈[-10,10] k∈[-5,5]\nm\tk\tdim\ttag\n"),
        "{text}"
    );
    let got = tsv_dims(&text);
    // twist t ≥ 0: Σ^t Soc(P_{1-t}); twist -1: nothing; twist t ≤ -2: Σ^{5+t} Cosoc(P_{-1-t})
    let region = Window::new(-10, 10, -5, 5);
    for d in region.degrees() {
        let want = match d.k {
            t if t >= 0 => std_pn(1 - t, 60).socle().0.dim(bd(d.m - t, 0)),
            -1 => 0,
            t => cosocle_dim(&std_pn(-1 - t, 60), d.m - (5 + t)),
        };
        assert_eq!(got.get(&d).copied().unwrap_or(0), want, "{d}");
    }
    assert!(got.keys().all(|d| region.contains(*d)));
}

#[test]
fn kr_table_for_rank_two() {
    let text = stdout(&krtool(&[
        "compute", "kr-table", "--bv", "2", "--window", "-16", "16", "-8", "8",
    ]));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m\tk\tdim\tpart\tannotations"));
    for l in lines {
        let f: Vec<&str> = l.split('\t').collect();
        assert_eq!(f.len(), 5, "{l}");
        assert!(matches!(f[3], "F1" | "F2" | "L0" | "L1" | "L2"), "{l}");
        // one annotation per class
        assert_eq!(
            f[4].matches(" [").count(),
            f[2].parse::<usize>().unwrap(),
            "{l}"
        );
    }
    let report = assemble_kr(2, Window::new(-16, 16, -8, 8), 2).unwrap();
    let inside: BTreeMap<BiDegree, usize> = tsv_dims(&text)
        .into_iter()
        .filter(|(d, _)| report.region.contains(*d))
        .collect();
    assert_eq!(inside, report.total_dims().dims);
    assert!(text.lines().any(|l| l.split('\t').nth(3) == Some("F2")));
}

#[test]
fn verify_single_suite_and_summary() {
    let text = stdout(&krtool(&["verify", "a1"]));
    assert!(text.starts_with("PASS  1 a1"), "{text}");
    assert!(
        text.contains("id\tkey\tresult\tseconds\tlimit\ttitle\n1\ta1\tPASS\t"),
        "{text}"
    );
}

#[test]
fn verify_unknown_suite_is_a_usage_error() {
    let o = krtool(&["verify", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("unknown suite 'bogus'") && err.contains("Usage:"),
        "{err}"
    );
}

#[test]
fn parse_errors_report_line_numbers() {
    let p = temp_path("bad.a1");
    std::fs::write(&p, "kind a1\nwindow 0 3 0 0\ngen x 0\ngen y 2\nsq1 x = y\n").unwrap();
    let o = krtool(&["compute", "margolis", p.to_str().unwrap()]);
    std::fs::remove_file(&p).unwrap();
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("parse error at line 5"), "{err}");
}

#[test]
fn module_files_round_trip_through_the_cli() {
    let p = temp_path("a1.mod");
    let ps = p.to_str().unwrap();
    let o = krtool(&[
        "compute",
        "chart",
        "--builtin",
        "A1",
        "--format",
        "module",
        "--out",
        ps,
    ]);
    assert!(o.status.success() && o.stdout.is_empty());
    let printed = std::fs::read_to_string(&p).unwrap();
    assert!(printed.starts_with("kind a1\n"));
    assert_eq!(
        stdout(&krtool(&["compute", "chart", ps, "--format", "module"])),
        printed
    );
    // A(1) is free: no Margolis homology
    let m = stdout(&krtool(&["compute", "margolis", ps]));
    std::fs::remove_file(&p).unwrap();
    assert!(tsv_dims(&m).is_empty(), "{m}");
}

#[test]
fn seeded_tower_detection_is_consistent() {
    let text = stdout(&krtool(&["compute", "tower-detect", "--seed", "7"]));
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split('\t').collect())
        .collect();
    assert!(rows.iter().any(|r| r[0] == "detect") && rows.iter().any(|r| r[0] == "chain"));
    assert!(rows.iter().all(|r| r[5] == "true"), "{text}");
}

#[test]
fn empty_window_is_rejected() {
    let o = krtool(&[
        "compute",
        "chart",
        "--builtin",
        "HP",
        "--window",
        "5",
        "1",
        "0",
        "0",
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("window 5 1 0 0 is empty"));
}

#[test]
fn svg_chart_is_well_formed() {
    let text = stdout(&krtool(&[
        "compute",
        "chart",
        "--builtin",
        "HP",
        "--window",
        "-4",
        "4",
        "-2",
        "2",
        "--format",
        "svg",
    ]));
    assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>"));
    assert_eq!(
        text.matches("fill=\"#cfe3ff\"").count(),
        (-4..=4)
            .flat_map(|m| (-2..=2).map(move |k| bd(m, k)))
            .filter(|d| hp_count(*d) > 0)
            .count()
    );
}
