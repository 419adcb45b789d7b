//! `krtool`: runs the verification suites and computes module invariants,
//! H01 tables, tower detection reports and assembled kR tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::SeedableRng;
use rayon::prelude::*;

use krcore::a1mod::{reduce, std_a1, std_p, std_pn, std_trivial, A1Module, Margolis};
use krcore::chart::Chart;
use krcore::closedform::{dim_table, hp_dim};
use krcore::emod::{EModule, Homology};
use krcore::format::{parse, print_a1, print_e, ModuleFile};
use krcore::grmod::{bd, BiDegree, DimTable, Window};
use krcore::krassembly::{assemble_kr, bv_module, bv_top, KrReport};
use krcore::rfun::apply_r;
use krcore::towers::{TowerData, XModule};
use krcore::verify;

#[derive(Parser)]
#[command(
    name = "krtool",
    version,
    about = "Verification and computation for kR of elementary abelian 2-groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites (`all`, a suite key, or a suite number).
    Verify {
        #[arg(default_value = "all")]
        suite: String,
        /// Also write the TSV summary to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute a table, chart or module.
    Compute(ComputeArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Task {
    Margolis,
    Socle,
    Reduce,
    H01,
    Relext,
    TowerDetect,
    KrTable,
    Chart,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Tsv,
    Txt,
    Svg,
    /// The module file format (modules only).
    Module,
}

#[derive(clap::Args)]
struct ComputeArgs {
    task: Task,
    /// Module file (`kind a1`, `kind e` or `kind tower`).
    input: Option<PathBuf>,
    #[arg(long, num_args = 4, value_names = ["M_LO", "M_HI", "K_LO", "K_HI"], allow_negative_numbers = true, default_values_t = [-12, 12, -6, 6])]
    window: Vec<i32>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    format: Format,
    /// A1, F, P, P0..P3, BV<n>, RP<n> or HP.
    #[arg(long)]
    builtin: Option<String>,
    /// Rank of the elementary abelian group for `kr-table` and `chart`.
    #[arg(long)]
    bv: Option<u32>,
    /// Highest cotorsion layer index in `kr-table` and `chart --bv`.
    #[arg(long, default_value_t = 2)]
    layers: usize,
    /// Seed of the synthetic x-tower for `tower-detect`.
    #[arg(long)]
    seed: Option<u64>,
    /// Degree of relative Ext for `relext`.
    #[arg(long, default_value_t = 1)]
    ext: u32,
}

/// What a compute task runs on.
enum Source {
    A1(A1Module),
    E(EModule),
    Tower(Box<TowerData>),
    Hp,
    Bv(u32),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("krtool: {e:#}");
        return ExitCode::FAILURE;
    }
    let res = match cli.command {
        Command::Verify { suite, out } => cmd_verify(&suite, out.as_deref()),
        Command::Compute(args) => cmd_compute(&args).map(|_| true),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("krtool: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Caps the worker pool at `KRTOOL_THREADS` when set.
fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("KRTOOL_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| anyhow!("KRTOOL_THREADS must be a positive integer, got {v:?}"))?;
        if n == 0 {
            bail!("KRTOOL_THREADS must be a positive integer, got 0");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("starting worker threads")?;
    }
    Ok(())
}

fn cmd_verify(suite: &str, out: Option<&Path>) -> Result<bool> {
    let keys: Vec<&str> = if suite == "all" {
        verify::suite_keys()
    } else {
        let known = verify::SUITES
            .iter()
            .any(|s| s.1 == suite || s.0.to_string() == suite);
        if !known {
            let names = verify::suite_keys().join(", ");
            Cli::command()
                .error(
                    clap::error::ErrorKind::InvalidValue,
                    format!("unknown suite '{suite}' (expected all, {names} or 1..12)"),
                )
                .exit();
        }
        vec![suite]
    };
    let outcomes: Vec<verify::Outcome> = keys
        .par_iter()
        .map(|k| verify::run(k))
        .collect::<krcore::Result<_>>()?;
    for o in &outcomes {
        println!("{}", o.line());
        for d in &o.details {
            println!("        {d}");
        }
    }
    let tsv = verify::summary_tsv(&outcomes);
    println!();
    print!("{tsv}");
    if let Some(p) = out {
        std::fs::write(p, &tsv).with_context(|| format!("writing {}", p.display()))?;
    }
    let failed: Vec<&str> = outcomes
        .iter()
        .filter(|o| !o.passed())
        .map(|o| o.key)
        .collect();
    if !failed.is_empty() {
        println!("failing: {}", failed.join(", "));
    }
    Ok(failed.is_empty())
}

fn window_of(v: &[i32]) -> Result<Window> {
    let w = Window::new(v[0], v[1], v[2], v[3]);
    if w.is_empty() {
        bail!("window {} {} {} {} is empty", v[0], v[1], v[2], v[3]);
    }
    Ok(w)
}

/// Truncation degree for infinite builtins, enough for `R` on `w`.
fn top_for(w: Window) -> i32 {
    bv_top(w) + 12
}

fn builtin(name: &str, w: Window) -> Result<Source> {
    let top = top_for(w);
    let m = match name {
        "A1" => std_a1(),
        "F" => std_trivial(),
        "P" => std_p(top),
        "HP" => return Ok(Source::Hp),
        "P0" | "P1" | "P2" | "P3" => std_pn(name[1..].parse()?, top),
        _ => {
            if let Some(n) = name.strip_prefix("BV") {
                let n: u32 = n
                    .parse()
                    .map_err(|_| anyhow!("bad rank in builtin {name}"))?;
                if !(1..=6).contains(&n) {
                    bail!("builtin {name}: rank must be between 1 and 6");
                }
                return Ok(Source::A1(bv_module(n, w)));
            }
            if let Some(n) = name.strip_prefix("RP") {
                let n: i32 = n
                    .parse()
                    .map_err(|_| anyhow!("bad index in builtin {name}"))?;
                return Ok(Source::A1(std_pn(n, top).with_name(name)));
            }
            bail!("unknown builtin {name} (expected A1, F, P, P0..P3, BV<n>, RP<n> or HP)");
        }
    };
    Ok(Source::A1(m))
}

fn source(args: &ComputeArgs, w: Window) -> Result<Source> {
    match (&args.input, &args.builtin, args.bv, args.seed) {
        (Some(p), None, None, None) => {
            let text =
                std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let f = parse(&text).with_context(|| format!("in {}", p.display()))?;
            Ok(match f {
                ModuleFile::A1(m) => Source::A1(m),
                ModuleFile::E(e) => Source::E(e),
                ModuleFile::Tower(t) => Source::Tower(t),
            })
        }
        (None, Some(b), None, None) => builtin(b, w),
        (None, None, Some(n), None) => {
            if !(1..=6).contains(&n) {
                bail!("--bv must be between 1 and 6");
            }
            Ok(Source::Bv(n))
        }
        (None, None, None, Some(seed)) => {
            let m = XModule::random(&mut StdRng::seed_from_u64(seed));
            Ok(Source::Tower(Box::new(m.tower(-3, 3, -5, 5)?)))
        }
        (None, None, None, None) => {
            bail!("no input: give a module file, --builtin, --bv or --seed")
        }
        _ => bail!("give only one of a module file, --builtin, --bv and --seed"),
    }
}

fn a1_of(s: Source, w: Window, task: &str) -> Result<A1Module> {
    match s {
        Source::A1(m) => Ok(m),
        Source::Bv(n) => Ok(bv_module(n, w)),
        _ => bail!("{task} needs an A(1)-module"),
    }
}

fn cmd_compute(args: &ComputeArgs) -> Result<()> {
    let w = window_of(&args.window)?;
    let src = source(args, w)?;
    let text = match args.task {
        Task::Margolis => {
            let mut c = match src {
                Source::E(e) => {
                    let mut c = Chart::new(&format!("Margolis homology of {}", e.name()), w);
                    c.add("Q0", &e.margolis(0)).add("Q1", &e.margolis(1));
                    c
                }
                s => {
                    let m = a1_of(s, w, "margolis")?;
                    let mut c = Chart::new(&format!("Margolis homology of {}", m.name()), w);
                    c.add("Q0", &m.margolis(Margolis::Q0))
                        .add("Q1", &m.margolis(Margolis::Q1));
                    c
                }
            };
            c.title.push_str(" (safe region only)");
            render(&c, args.format)?
        }
        Task::Socle => {
            let m = a1_of(src, w, "socle")?;
            let (s, region) = m.socle();
            let mut c = Chart::new(
                &format!("socle of {} on {}", m.name(), region.intersect(&w)),
                w,
            );
            c.add("socle", &DimTable::of_space(&s, region));
            render(&c, args.format)?
        }
        Task::Reduce => {
            let m = a1_of(src, w, "reduce")?;
            let r = reduce(&m)?;
            if args.format == Format::Module {
                let gens: Vec<String> = r.free_generators.iter().map(i32::to_string).collect();
                format!(
                    "# free summands split off in degrees: {}\n{}",
                    gens.join(" "),
                    print_a1(&r.reduced)
                )
            } else {
                let mut c = Chart::new(&format!("reduction of {}", m.name()), w);
                c.add("reduced", &r.reduced.dims().restrict(r.reduced.exact()));
                c.add("free", &DimTable::new(w, counts(&r.free_generators)));
                render(&c, args.format)?
            }
        }
        Task::H01 => {
            let h = match src {
                Source::E(e) => e.h01(),
                s => apply_r(&a1_of(s, w, "h01")?, w)?.total.h01(),
            };
            render(&homology_chart(&h, w), args.format)?
        }
        Task::Relext => {
            let h = match src {
                Source::E(e) => e.rel_ext(args.ext)?,
                s => apply_r(&a1_of(s, w, "relext")?, w)?
                    .total
                    .rel_ext(args.ext)?,
            };
            render(&homology_chart(&h, w), args.format)?
        }
        Task::TowerDetect => {
            let t = match src {
                Source::Tower(t) => *t,
                _ => bail!("tower-detect needs a tower file or --seed"),
            };
            tower_report(&t)?
        }
        Task::KrTable => {
            let n = match src {
                Source::Bv(n) => n,
                _ => bail!("kr-table needs --bv N"),
            };
            let r = assemble_kr(n, w, args.layers)?;
            check_report(&r)?;
            match args.format {
                Format::Tsv => r.to_tsv(),
                f => render(&kr_chart(&r), f)?,
            }
        }
        Task::Chart => match src {
            Source::Hp => {
                let mut c = Chart::new("HP", w);
                c.add("HP", &dim_table(w, hp_dim));
                render(&c, args.format)?
            }
            Source::Bv(n) => {
                let r = assemble_kr(n, w, args.layers)?;
                check_report(&r)?;
                render(&kr_chart(&r), args.format)?
            }
            Source::A1(m) if args.format == Format::Module => print_a1(&m),
            Source::E(e) if args.format == Format::Module => print_e(&e),
            Source::A1(m) => {
                let mut c = Chart::new(m.name(), w);
                c.add(m.name(), &m.dims());
                render(&c, args.format)?
            }
            Source::E(e) => {
                let mut c = Chart::new(e.name(), w);
                c.add(e.name(), &e.dims());
                render(&c, args.format)?
            }
            Source::Tower(_) => bail!("chart does not apply to towers; use tower-detect"),
        },
    };
    emit(&text, args.out.as_deref())
}

fn counts(degrees: &[i32]) -> BTreeMap<BiDegree, usize> {
    let mut out = BTreeMap::new();
    for &g in degrees {
        *out.entry(bd(g, 0)).or_default() += 1;
    }
    out
}

fn homology_chart(h: &Homology, w: Window) -> Chart {
    let mut c = Chart::new(&format!("{} on {}", h.name, h.region.intersect(&w)), w);
    c.add(&h.name, &h.dims());
    c
}

fn kr_chart(r: &KrReport) -> Chart {
    let mut c = Chart::new(&format!("kR of BV{} on {}", r.n, r.region), r.region);
    for (p, s) in r.parts() {
        c.add_space(&p.tag(), s);
    }
    c
}

/// Fails with a witness line when an invariant of the report is violated.
fn check_report(r: &KrReport) -> Result<()> {
    let checks = [
        (r.layers_periodic(), "cotorsion layers are not v1-periodic"),
        (r.f2_doubled(), "F2 is not doubled by its companion"),
        (r.parts_disjoint(), "parts overlap"),
        (
            r.torsion_orders_ok(),
            "torsion order annotations are inconsistent",
        ),
    ];
    for (ok, msg) in checks {
        if !ok {
            bail!("invariant violated for BV{} on {}: {msg}", r.n, r.region);
        }
    }
    Ok(())
}

fn tower_report(t: &TowerData) -> Result<String> {
    let report = t.validate();
    if !report.is_ok() {
        bail!("tower data is not valid: {:?}", report);
    }
    let mut s = String::from("kind\tlevel\theight\tresult\tcriterion\tconsistent\tdetail\n");
    let mut ok = true;
    for n in t.lo()..=t.hi() {
        for h in 1..=2 {
            let Ok(d) = t.detect(h, n) else { continue };
            ok &= d.consistent();
            let witness = d.witness.as_ref().map_or(String::new(), |(deg, v)| {
                format!("{deg}: {}", v.join(" + "))
            });
            writeln!(
                s,
                "detect\t{n}\t{h}\t{}\t{}\t{}\t{witness}",
                d.holds,
                d.criterion,
                d.consistent()
            )?;
        }
        let Ok(c) = t.chain_complex_at(n) else {
            continue;
        };
        ok &= c.certified();
        let hom: usize = c.homology.values().sum();
        let phi: usize = c.phi_quotient.values().sum();
        writeln!(
            s,
            "chain\t{n}\t\t{}\t{}\t{}\thomology {hom}, phi quotient {phi}",
            c.certified(),
            c.homology_matches(),
            c.certified()
        )?;
    }
    if !ok {
        eprint!("{s}");
        bail!("tower checks failed (rows above with consistent = false)");
    }
    Ok(s)
}

fn render(c: &Chart, f: Format) -> Result<String> {
    Ok(match f {
        Format::Tsv => format!("# {}\n{}", c.title, c.to_tsv()),
        Format::Txt => c.to_txt(),
        Format::Svg => c.to_svg(),
        Format::Module => bail!("--format module applies to reduce and to chart of a module"),
    })
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                Err(e).context("writing to stdout")
            }
            _ => Ok(()),
        },
    }
}
