//! Command-line front end.
//!
//! Exit codes: 0 ok, 1 a check failed, 2 parse or usage error, 3 class
//! undetermined or not certified, 4 cap guard, 5 invalid action.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::baer::{baer_invariant, detect_class_traced, verify_class_bound, Settings};
use crate::filtered::monomial_budget;
use crate::intlinalg::AbelianInvariants;
use crate::lyndon::{bracket_string, lyndon_words, witt_dimension, word_string};
use crate::presentation::{parse_input_file, ActionSpec, InputFile, Presentation};
use crate::selftest::{self, SUITE};
use crate::semidirect::{
    build_semidirect, class_or, validate_action, verify_decomposition, DecompositionReport,
};
use crate::{Error, Result};

pub const CAP_GUARD_ENV: &str = "BAERKIT_CAP_GUARD";

#[derive(Parser, Debug)]
#[command(
    name = "baerkit",
    version,
    about = "Baer-invariants of finitely presented nilpotent groups"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,

    /// Monomial budget per ambient; overrides BAERKIT_CAP_GUARD.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub cap_guard: Option<u64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Machine,
}

#[derive(Args, Debug, Clone)]
pub struct JobArgs {
    /// Input file.
    #[arg(long)]
    pub file: PathBuf,

    /// Variety parameter c (class of the variety N_c).
    #[arg(long = "class-c", default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub c: u32,

    /// Nilpotency class bound k; certified before use.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub class_bound: Option<u32>,

    /// Largest class tried by detection.
    #[arg(long = "kmax", default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..))]
    pub k_max: u32,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Baer-invariant of the group in the input file.
    Multiplier(JobArgs),
    /// Presentation of a semidirect product, optionally with its decomposition checks.
    Semidirect {
        #[command(flatten)]
        job: JobArgs,
        #[arg(long)]
        verify: bool,
    },
    /// Decomposition checks for one file, or for the built-in suite at c = 1, 2.
    Verify {
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long = "class-c", value_parser = clap::value_parser!(u32).range(1..))]
        c: Option<u32>,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        class_bound: Option<u32>,
        #[arg(long = "kmax", default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..))]
        k_max: u32,
    },
    /// Lyndon words of one weight with their standard bracketings.
    Lyndon {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=26))]
        letters: u32,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        weight: u32,
    },
    /// Example suite and randomized property checks.
    Selftest {
        /// Randomized cases per property suite.
        #[arg(long, default_value_t = 200)]
        cases: usize,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
    },
}

/// Line sink that knows the output format.
struct Report<'a> {
    out: &'a mut dyn Write,
    format: Format,
}

impl Report<'_> {
    fn line(&mut self, s: impl AsRef<str>) {
        let _ = writeln!(self.out, "{}", s.as_ref());
    }

    /// `text` in text mode, `machine` in machine mode.
    fn either(&mut self, text: impl AsRef<str>, machine: impl AsRef<str>) {
        match self.format {
            Format::Text => self.line(text),
            Format::Machine => self.line(machine),
        }
    }

    fn invariants(&mut self, label: &str, inv: &AbelianInvariants) {
        match self.format {
            Format::Text => self.line(format!("{label}: {inv}")),
            Format::Machine => {
                let torsion: Vec<String> = inv.torsion.iter().map(|t| t.to_string()).collect();
                self.line(format!("{label}.free_rank={}", inv.free_rank));
                self.line(format!("{label}.torsion={}", torsion.join(",")));
            }
        }
    }

    fn check(&mut self, name: &str, pass: bool) {
        self.either(
            format!("{} {name}", if pass { "PASS" } else { "FAIL" }),
            format!("check={name} status={}", if pass { "pass" } else { "fail" }),
        );
    }
}

fn settings(flag: Option<u64>) -> Result<Settings> {
    let cap_guard = match flag {
        Some(v) => v as u128,
        None => match std::env::var(CAP_GUARD_ENV) {
            Ok(v) => match v.trim().parse::<u128>() {
                Ok(n) if n >= 1 => n,
                _ => {
                    return Err(Error::Syntax(format!(
                        "{CAP_GUARD_ENV} must be a positive integer"
                    )))
                }
            },
            Err(_) => Settings::default().cap_guard,
        },
    };
    Ok(Settings { cap_guard })
}

fn read_input(path: &PathBuf) -> Result<InputFile> {
    let text = std::fs::read_to_string(path)?;
    parse_input_file(&text)
}

fn single_group(input: InputFile) -> Result<Presentation> {
    let mut groups = input.groups;
    if groups.len() != 1 || input.action.is_some() {
        return Err(Error::Syntax(format!(
            "expected exactly one group block, found {}",
            groups.len()
        )));
    }
    Ok(groups.remove(0))
}

fn cmd_multiplier(args: &JobArgs, s: &Settings, r: &mut Report) -> Result<i32> {
    let p = single_group(read_input(&args.file)?)?;
    r.either(format!("group: {}", p.name), format!("group={}", p.name));
    let k = match args.class_bound {
        Some(k) => {
            let k = k as usize;
            verify_class_bound(&p, k, s)?;
            r.either(
                format!("class: k={k} (given, certified)"),
                format!("class_bound={k}\nclass_source=given"),
            );
            k
        }
        None => {
            let (k, probes) = detect_class_traced(&p, args.k_max as usize, s)?;
            for probe in &probes {
                let order = probe
                    .order
                    .as_ref()
                    .map_or("infinite".to_string(), |o| o.to_string());
                r.either(
                    format!(
                        "  probe k={} certified={} order={order}",
                        probe.k, probe.certified
                    ),
                    format!(
                        "probe={} certified={} order={order}",
                        probe.k, probe.certified
                    ),
                );
            }
            let k = k.ok_or(Error::ClassUndetermined {
                k_max: args.k_max as usize,
            })?;
            r.either(
                format!("class: k={k} (detected)"),
                format!("class_bound={k}\nclass_source=detected"),
            );
            k
        }
    };
    let inv = baer_invariant(&p, args.c as usize, k, s)?;
    r.either(format!("c: {}", args.c), format!("c={}", args.c));
    match r.format {
        Format::Text => r.line(format!("invariants: {inv}")),
        Format::Machine => r.invariants("invariants", &inv),
    }
    Ok(0)
}

fn action_of(input: InputFile) -> Result<ActionSpec> {
    if input.groups.len() != 2 {
        return Err(Error::Syntax(format!(
            "expected two group blocks, found {}",
            input.groups.len()
        )));
    }
    input
        .action
        .ok_or_else(|| Error::Syntax("missing action block".into()))
}

fn class_of(p: &Presentation, bound: Option<u32>, k_max: u32, s: &Settings) -> Result<usize> {
    class_or(p, bound.map(|k| k as usize), k_max as usize, s)
}

fn print_report(report: &DecompositionReport, r: &mut Report) {
    r.either(
        format!(
            "decomposition c={} k={} k_B={}",
            report.c, report.k, report.k_b
        ),
        format!(
            "c={}\nclass_bound={}\nclass_bound_b={}",
            report.c, report.k, report.k_b
        ),
    );
    for check in &report.checks {
        r.check(check.name, check.pass);
    }
    r.invariants("G", &report.invariants_g);
    r.invariants("B", &report.invariants_b);
    r.invariants("complement", &report.invariants_complement);
}

fn run_semidirect(
    spec: &ActionSpec,
    c: usize,
    bound: Option<u32>,
    k_max: u32,
    verify: bool,
    s: &Settings,
    r: &mut Report,
) -> Result<bool> {
    let k_a = class_of(&spec.acted, bound, k_max, s)?;
    let cert = validate_action(spec, k_a, s)?;
    let sp = build_semidirect(spec, &cert)?;
    match r.format {
        Format::Text => r.line(sp.to_string()),
        Format::Machine => {
            let a = &sp.product.alphabet;
            let join = |ws: &[crate::Word]| {
                ws.iter()
                    .map(|w| w.display(a).to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            };
            r.line(format!("group={}", sp.combined.name));
            r.line(format!("rel_a={}", join(&sp.rel_a)));
            r.line(format!("rel_b={}", join(&sp.rel_b)));
            r.line(format!("rel_s={}", join(&sp.rel_s)));
        }
    }
    if !verify {
        return Ok(true);
    }
    let k = match bound {
        Some(k) => k as usize,
        None => class_of(&sp.combined, None, k_max, s)?,
    };
    let k_b = class_of(&spec.acting, Some(k as u32), k_max, s)?;
    let report = verify_decomposition(&sp, c, k, k_b, s)?;
    print_report(&report, r);
    Ok(report.all_pass())
}

fn cmd_verify(
    file: Option<&PathBuf>,
    c: Option<u32>,
    bound: Option<u32>,
    k_max: u32,
    s: &Settings,
    r: &mut Report,
) -> Result<i32> {
    let cs: Vec<usize> = match c {
        Some(c) => vec![c as usize],
        None => vec![1, 2],
    };
    let mut all = true;
    match file {
        Some(path) => {
            let spec = action_of(read_input(path)?)?;
            for &c in &cs {
                all &= run_semidirect(&spec, c, bound, k_max, true, s, r)?;
            }
        }
        None => {
            for entry in SUITE {
                let spec = entry.action()?;
                r.either(
                    format!("== {}", entry.name),
                    format!("example={}", entry.name),
                );
                for &c in &cs {
                    let b = bound.or(Some(entry.class_bound as u32));
                    all &= run_semidirect(&spec, c, b, k_max, true, s, r)?;
                }
            }
        }
    }
    r.either(
        format!("verdict: {}", if all { "PASS" } else { "FAIL" }),
        format!("verdict={}", if all { "pass" } else { "fail" }),
    );
    Ok(if all { 0 } else { 1 })
}

fn cmd_lyndon(n: usize, m: usize, s: &Settings, r: &mut Report) -> Result<i32> {
    let needed = monomial_budget(n, m);
    if needed > s.cap_guard {
        return Err(Error::CapGuard {
            needed,
            budget: s.cap_guard,
        });
    }
    let words = lyndon_words(n, m);
    for w in &words {
        r.either(
            format!("{}  {}", word_string(w), bracket_string(w)),
            format!("word={} bracket={}", word_string(w), bracket_string(w)),
        );
    }
    let witt = witt_dimension(n, m);
    r.either(
        format!("count: {} (witt: {witt})", words.len()),
        format!("count={}\nwitt={witt}", words.len()),
    );
    Ok(if witt == words.len() { 0 } else { 1 })
}

fn cmd_selftest(cases: usize, seed: u64, s: &Settings, r: &mut Report) -> Result<i32> {
    let opts = selftest::Options {
        settings: *s,
        cases,
        seed,
    };
    let outcomes = selftest::run(&opts)?;
    let mut all = true;
    for o in &outcomes {
        all &= o.pass;
        match r.format {
            Format::Text if !o.pass => r.line(format!("FAIL {} ({})", o.name, o.detail)),
            _ => r.check(&o.name, o.pass),
        }
    }
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    r.either(
        format!("{} checks, {failed} failed", outcomes.len()),
        format!("checks={}\nfailed={failed}", outcomes.len()),
    );
    Ok(if all { 0 } else { 1 })
}

fn dispatch(cli: &Cli, r: &mut Report) -> Result<i32> {
    let s = settings(cli.cap_guard)?;
    match &cli.command {
        Command::Multiplier(args) => cmd_multiplier(args, &s, r),
        Command::Semidirect { job, verify } => {
            let spec = action_of(read_input(&job.file)?)?;
            let pass = run_semidirect(
                &spec,
                job.c as usize,
                job.class_bound,
                job.k_max,
                *verify,
                &s,
                r,
            )?;
            Ok(if pass { 0 } else { 1 })
        }
        Command::Verify {
            file,
            c,
            class_bound,
            k_max,
        } => cmd_verify(file.as_ref(), *c, *class_bound, *k_max, &s, r),
        Command::Lyndon { letters, weight } => {
            cmd_lyndon(*letters as usize, *weight as usize, &s, r)
        }
        Command::Selftest { cases, seed } => cmd_selftest(*cases, *seed, &s, r),
    }
}

/// Parses `args` and runs the command, writing the report to `out` and
/// diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    let mut report = Report {
        out,
        format: cli.format,
    };
    match dispatch(&cli, &mut report) {
        Ok(code) => code,
        Err(e) => {
            match &e {
                Error::ActionInvalid(items) => {
                    let _ = writeln!(err, "error: action invalid");
                    for item in items {
                        let _ = writeln!(err, "  - {item}");
                    }
                }
                _ => {
                    let _ = writeln!(err, "error: {e}");
                }
            }
            e.exit_code()
        }
    }
}
