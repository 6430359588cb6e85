//! Built-in example suite and randomized property checks behind the
//! `selftest` command.

use std::thread;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::baer::{
    baer_invariant, check_presentation_independence, detect_class, BaerJob, Independence, Settings,
};
use crate::filtered::{Ambient, Closure, FilteredSubgroup, Sieve};
use crate::intlinalg::{hnf, lattice_membership, snf, AbelianInvariants, IntMatrix, Membership};
use crate::lyndon::{is_lyndon, lyndon_words, witt_dimension, LyndonBasis};
use crate::magnus::{decode_monomial, monomial_count, GroupElement, Homogeneous};
use crate::presentation::{parse_input_file, ActionSpec, Presentation, Word};
use crate::semidirect::{build_semidirect, validate_action, verify_decomposition};
use crate::{Error, Result};

/// One semidirect product of the example suite.
#[derive(Clone, Copy, Debug)]
pub struct SuiteEntry {
    pub name: &'static str,
    pub text: &'static str,
    /// Class bound used when detection cannot decide (infinite groups).
    pub class_bound: usize,
}

pub const SUITE: &[SuiteEntry] = &[
    SuiteEntry {
        name: "d8",
        text: include_str!("../data/d8.txt"),
        class_bound: 2,
    },
    SuiteEntry {
        name: "z2_on_z2xz2_trivial",
        text: include_str!("../data/z2_on_z2xz2_trivial.txt"),
        class_bound: 1,
    },
    SuiteEntry {
        name: "z2xz2_trivial",
        text: include_str!("../data/z2xz2_trivial.txt"),
        class_bound: 1,
    },
    SuiteEntry {
        name: "z4_on_z4_inversion",
        text: include_str!("../data/z4_on_z4_inversion.txt"),
        class_bound: 2,
    },
    SuiteEntry {
        name: "z_on_z_trivial",
        text: include_str!("../data/z_on_z_trivial.txt"),
        class_bound: 1,
    },
];

impl SuiteEntry {
    pub fn action(&self) -> Result<ActionSpec> {
        parse_input_file(self.text)?
            .action
            .ok_or_else(|| Error::Syntax(format!("{}: no action block", self.name)))
    }
}

/// One entry of the multiplier table.
#[derive(Clone, Debug)]
pub struct TableEntry {
    pub name: String,
    pub presentation: Presentation,
    pub c: usize,
    pub k: usize,
    pub expected: AbelianInvariants,
}

fn free_abelian(n: usize) -> Presentation {
    let gens: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let mut rels = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            rels.push(format!("[x{i},x{j}]"));
        }
    }
    let gens: Vec<&str> = gens.iter().map(String::as_str).collect();
    let rels: Vec<&str> = rels.iter().map(String::as_str).collect();
    Presentation::parse(&format!("Z^{n}"), &gens, &rels).expect("well-formed")
}

fn elementary_two(n: usize) -> Presentation {
    let base = free_abelian(n);
    let mut relators: Vec<Word> = (0..n).map(|i| Word::generator(i).pow(2)).collect();
    relators.extend(base.relators);
    Presentation::new(&format!("Z2^{n}"), base.alphabet, relators).expect("well-formed")
}

fn cyclic(m: u32) -> Presentation {
    Presentation::new(
        &format!("Z{m}"),
        crate::presentation::Alphabet::new(&["x"]).expect("one letter"),
        vec![Word::generator(0).pow(m as i64)],
    )
    .expect("well-formed")
}

/// Cyclic groups, elementary abelian 2-groups and free abelian groups with
/// their known invariants.
pub fn multiplier_table() -> Vec<TableEntry> {
    let mut t = Vec::new();
    for m in 2..=5 {
        for c in 1..=3 {
            t.push(TableEntry {
                name: format!("Z{m}.c{c}"),
                presentation: cyclic(m),
                c,
                k: 1,
                expected: AbelianInvariants::trivial(),
            });
        }
    }
    t.push(TableEntry {
        name: "Z2^2.c1".into(),
        presentation: elementary_two(2),
        c: 1,
        k: 1,
        expected: AbelianInvariants::new(0, &[2]),
    });
    t.push(TableEntry {
        name: "Z2^2.c2".into(),
        presentation: elementary_two(2),
        c: 2,
        k: 1,
        expected: AbelianInvariants::new(0, &[2, 2]),
    });
    t.push(TableEntry {
        name: "Z2^3.c1".into(),
        presentation: elementary_two(3),
        c: 1,
        k: 1,
        expected: AbelianInvariants::new(0, &[2, 2, 2]),
    });
    for n in 1..=3 {
        for c in 1..=3 {
            t.push(TableEntry {
                name: format!("Z^{n}.c{c}"),
                presentation: free_abelian(n),
                c,
                k: 1,
                expected: AbelianInvariants::free(witt_dimension(n, c + 1)),
            });
        }
    }
    t
}

/// Result of one named check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

/// Options for a selftest run.
#[derive(Clone, Copy, Debug)]
pub struct Options {
    pub settings: Settings,
    /// Randomized cases per property suite.
    pub cases: usize,
    pub seed: u64,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            settings: Settings::default(),
            cases: 200,
            seed: 0x5eed,
        }
    }
}

pub fn check_multiplier_table(settings: &Settings) -> Result<Vec<Outcome>> {
    let mut out = Vec::new();
    for e in multiplier_table() {
        let got = baer_invariant(&e.presentation, e.c, e.k, settings)?;
        out.push(Outcome::new(
            format!("multiplier.{}", e.name),
            got == e.expected,
            format!("got {got}, expected {}", e.expected),
        ));
    }
    Ok(out)
}

/// Class bound of one factor: detected when possible, else `fallback`.
fn factor_class(p: &Presentation, fallback: usize, settings: &Settings) -> Result<usize> {
    Ok(detect_class(p, 6, settings)?.unwrap_or(fallback))
}

pub fn check_semidirect_suite(settings: &Settings) -> Result<Vec<Outcome>> {
    let mut out = Vec::new();
    for entry in SUITE {
        let spec = entry.action()?;
        let k_a = factor_class(&spec.acted, entry.class_bound, settings)?;
        let cert = validate_action(&spec, k_a, settings)?;
        let sp = build_semidirect(&spec, &cert)?;
        let k = factor_class(&sp.combined, entry.class_bound, settings)?;
        let k_b = factor_class(&spec.acting, k, settings)?;
        for c in 1..=2 {
            let report = verify_decomposition(&sp, c, k, k_b, settings)?;
            for check in &report.checks {
                out.push(Outcome::new(
                    format!("semidirect.{}.c{c}.{}", entry.name, check.name),
                    check.pass,
                    format!(
                        "G:{} B:{} complement:{}",
                        report.invariants_g, report.invariants_b, report.invariants_complement
                    ),
                ));
            }
            let expected = match (entry.name, c) {
                ("d8", 1) => Some([
                    AbelianInvariants::new(0, &[2]),
                    AbelianInvariants::trivial(),
                    AbelianInvariants::new(0, &[2]),
                ]),
                ("z2xz2_trivial", 2) => Some([
                    AbelianInvariants::new(0, &[2, 2]),
                    AbelianInvariants::trivial(),
                    AbelianInvariants::new(0, &[2, 2]),
                ]),
                _ => None,
            };
            if let Some([g, b, comp]) = expected {
                let got = [
                    report.invariants_g.clone(),
                    report.invariants_b.clone(),
                    report.invariants_complement.clone(),
                ];
                out.push(Outcome::new(
                    format!("semidirect.{}.c{c}.values", entry.name),
                    got == [g, b, comp],
                    format!("G:{} B:{} complement:{}", got[0], got[1], got[2]),
                ));
            }
        }
    }
    Ok(out)
}

pub fn check_independence(settings: &Settings) -> Result<Vec<Outcome>> {
    let plain = parse_input_file(include_str!("../data/z2xz2.txt"))?
        .groups
        .remove(0);
    let redundant = parse_input_file(include_str!("../data/z2xz2_redundant.txt"))?
        .groups
        .remove(0);
    let mut out = Vec::new();
    for c in 1..=2 {
        let verdict = check_presentation_independence(&plain, &redundant, c, 1, settings)?;
        out.push(Outcome::new(
            format!("independence.z2xz2.c{c}"),
            matches!(verdict, Independence::Agree(_)),
            format!("{verdict:?}"),
        ));
    }
    Ok(out)
}

fn random_word(rng: &mut StdRng, n: usize, max_len: usize) -> Word {
    let len = rng.gen_range(0..=max_len);
    let signed: Vec<i32> = (0..len)
        .map(|_| {
            let g = rng.gen_range(1..=n as i32);
            if rng.gen_bool(0.5) {
                g
            } else {
                -g
            }
        })
        .collect();
    Word::from_signed(&signed)
}

fn random_matrix(rng: &mut StdRng) -> IntMatrix {
    let r = rng.gen_range(1..=4);
    let c = rng.gen_range(1..=4);
    let rows = (0..r)
        .map(|_| {
            (0..c)
                .map(|_| BigInt::from(rng.gen_range(-6..=6)))
                .collect()
        })
        .collect();
    IntMatrix::from_rows(c, rows)
}

fn is_unimodular(u: &IntMatrix) -> bool {
    u.determinant().abs().is_one()
}

pub fn check_magnus(opts: &Options) -> Result<Outcome> {
    let mut rng = StdRng::seed_from_u64(opts.seed ^ 1);
    for i in 0..opts.cases {
        let n = rng.gen_range(1..=3);
        let cap = rng.gen_range(1..=4);
        let u = random_word(&mut rng, n, 8);
        let v = random_word(&mut rng, n, 8);
        let gu = GroupElement::from_word(&u, n, cap)?;
        let gv = GroupElement::from_word(&v, n, cap)?;
        let guv = GroupElement::from_word(&(&u * &v), n, cap)?;
        let gui = GroupElement::from_word(&u.inverse(), n, cap)?;
        let ok = gu.try_mul(&gv)? == guv
            && gu.inverse() == gui
            && gu.try_mul(&gui)?.is_identity()
            && gui.try_mul(&gu)?.is_identity();
        if !ok {
            return Ok(Outcome::new(
                "property.magnus",
                false,
                format!("case {i}: {u:?} {v:?}"),
            ));
        }
    }
    Ok(Outcome::new(
        "property.magnus",
        true,
        format!("{} cases", opts.cases),
    ))
}

pub fn check_lyndon(opts: &Options) -> Result<Outcome> {
    for n in 1..=4 {
        for m in 1..=5 {
            let brute = (0..monomial_count(n, m))
                .filter(|&code| is_lyndon(&decode_monomial(n, m, code)))
                .count();
            if brute != witt_dimension(n, m) || lyndon_words(n, m).len() != brute {
                return Ok(Outcome::new(
                    "property.lyndon",
                    false,
                    format!("witt disagreement at n={n} m={m}"),
                ));
            }
        }
    }
    let mut rng = StdRng::seed_from_u64(opts.seed ^ 2);
    for i in 0..opts.cases {
        let n = rng.gen_range(1..=4);
        let m = rng.gen_range(1..=5);
        let basis = LyndonBasis::new(n, m);
        let coeffs: Vec<BigInt> = (0..basis.len())
            .map(|_| BigInt::from(rng.gen_range(-5..=5)))
            .collect();
        let mut t = Homogeneous::zero(n, m);
        for (j, c) in coeffs.iter().enumerate() {
            for (x, e) in t.coeffs.iter_mut().zip(basis.expansion(j).coeffs) {
                *x += c * e;
            }
        }
        let triangular = basis.words().iter().enumerate().all(|(j, w)| {
            let e = basis.expansion(j);
            let code = crate::magnus::encode_monomial(n, w);
            e.coeffs[code].is_one() && e.coeffs[..code].iter().all(Zero::is_zero)
        });
        if !triangular || basis.lie_coordinates(&t)? != Some(coeffs) {
            return Ok(Outcome::new(
                "property.lyndon",
                false,
                format!("case {i}: n={n} m={m}"),
            ));
        }
    }
    Ok(Outcome::new(
        "property.lyndon",
        true,
        format!("{} cases", opts.cases),
    ))
}

fn hnf_ok(m: &IntMatrix) -> Result<bool> {
    let (h, u) = hnf(m);
    if u.mul(m) != h || !is_unimodular(&u) {
        return Ok(false);
    }
    let mut last = None;
    let mut seen_zero = false;
    for i in 0..h.rows() {
        let row = h.row(i);
        match crate::intlinalg::leading_index(row) {
            None => seen_zero = true,
            Some(p) => {
                if seen_zero || last.is_some_and(|l| p <= l) || !row[p].is_positive() {
                    return Ok(false);
                }
                for k in 0..i {
                    let a = &h.row(k)[p];
                    if a.is_negative() || a >= &row[p] {
                        return Ok(false);
                    }
                }
                last = Some(p);
            }
        }
    }
    for i in 0..m.rows() {
        if !matches!(lattice_membership(m.row(i), &h)?, Membership::Member(_)) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn snf_ok(m: &IntMatrix) -> bool {
    let (d, u, v) = snf(m);
    if u.mul(m).mul(&v) != d || !is_unimodular(&u) || !is_unimodular(&v) {
        return false;
    }
    let mut diag = Vec::new();
    for i in 0..d.rows() {
        for j in 0..d.cols() {
            if i == j {
                diag.push(d[(i, j)].clone());
            } else if !d[(i, j)].is_zero() {
                return false;
            }
        }
    }
    diag.iter().all(|x| !x.is_negative())
        && diag.windows(2).all(|w| {
            if w[0].is_zero() {
                w[1].is_zero()
            } else {
                w[1].is_multiple_of(&w[0])
            }
        })
}

pub fn check_hnf_snf(opts: &Options) -> Result<Outcome> {
    let mut rng = StdRng::seed_from_u64(opts.seed ^ 3);
    for i in 0..opts.cases {
        let m = random_matrix(&mut rng);
        if !hnf_ok(&m)? || !snf_ok(&m) {
            return Ok(Outcome::new(
                "property.hnf_snf",
                false,
                format!("case {i}:\n{m}"),
            ));
        }
    }
    Ok(Outcome::new(
        "property.hnf_snf",
        true,
        format!("{} cases", opts.cases),
    ))
}

pub fn check_sieve(opts: &Options) -> Result<Outcome> {
    let mut rng = StdRng::seed_from_u64(opts.seed ^ 4);
    let ambient = Ambient::new(2, 3, opts.settings.cap_guard)?;
    for i in 0..opts.cases {
        let count = rng.gen_range(1..=2);
        let gens: Vec<Word> = (0..count).map(|_| random_word(&mut rng, 2, 6)).collect();
        let elems = gens
            .iter()
            .map(|w| ambient.element(w))
            .collect::<Result<Vec<_>>>()?;
        let s = FilteredSubgroup::closure(&ambient, elems.clone(), Closure::Normal)?;
        let again = FilteredSubgroup::closure(&ambient, s.elements(), Closure::Normal)?;
        let mut ok = s.same_subgroup(&again)?;
        // a random product of conjugates of the generators is a member and
        // its recipe rebuilds it
        let mut g = GroupElement::identity(2, 3);
        for _ in 0..3 {
            let e = &elems[rng.gen_range(0..elems.len())];
            let h = ambient.element(&random_word(&mut rng, 2, 4))?;
            let e = if rng.gen_bool(0.5) {
                e.inverse()
            } else {
                e.clone()
            };
            g = g.try_mul(&e.conjugate_by(&h))?;
        }
        match s.sieve(&g)? {
            Sieve::Member(recipe) => ok &= s.evaluate(&recipe) == g,
            Sieve::Residue(_) => ok = false,
        }
        if !ok {
            return Ok(Outcome::new(
                "property.sieve",
                false,
                format!("case {i}: {gens:?}"),
            ));
        }
    }
    Ok(Outcome::new(
        "property.sieve",
        true,
        format!("{} cases", opts.cases),
    ))
}

/// Runs table entries at caps `W` and `W + 1`, each time with one extra
/// random conjugate of a relator so that the presentation varies.
pub fn check_truncation(opts: &Options) -> Result<Outcome> {
    let table = multiplier_table();
    let mut rng = StdRng::seed_from_u64(opts.seed ^ 5);
    for i in 0..opts.cases {
        let e = &table[i % table.len()];
        let mut p = e.presentation.clone();
        if !p.relators.is_empty() {
            let r = p.relators[rng.gen_range(0..p.relators.len())].clone();
            let h = random_word(&mut rng, p.generator_count(), 3);
            p.relators.push(&(&h.inverse() * &r) * &h);
        }
        let job = BaerJob::new(p, e.c, e.k)?;
        let at_w = job.run_at_cap(job.cap(), &opts.settings)?;
        let at_w1 = job.run_at_cap(job.cap() + 1, &opts.settings)?;
        if at_w != at_w1 || at_w != e.expected {
            return Ok(Outcome::new(
                "property.truncation",
                false,
                format!("case {i} ({}): W gives {at_w}, W+1 gives {at_w1}", e.name),
            ));
        }
    }
    Ok(Outcome::new(
        "property.truncation",
        true,
        format!("{} cases", opts.cases),
    ))
}

/// Runs every check. Independent groups run on separate threads; results
/// come back in a fixed order. The first error (for instance a cap-guard
/// refusal) aborts the run.
pub fn run(opts: &Options) -> Result<Vec<Outcome>> {
    let settings = opts.settings;
    type Job<'a> = Box<dyn FnOnce() -> Result<Vec<Outcome>> + Send + 'a>;
    let jobs: Vec<Job> = vec![
        Box::new(move || check_multiplier_table(&settings)),
        Box::new(move || check_semidirect_suite(&settings)),
        Box::new(move || check_independence(&settings)),
        Box::new(move || Ok(vec![check_magnus(opts)?])),
        Box::new(move || Ok(vec![check_lyndon(opts)?])),
        Box::new(move || Ok(vec![check_hnf_snf(opts)?])),
        Box::new(move || Ok(vec![check_sieve(opts)?])),
        Box::new(move || Ok(vec![check_truncation(opts)?])),
    ];
    let results: Vec<Result<Vec<Outcome>>> = thread::scope(|scope| {
        let handles: Vec<_> = jobs.into_iter().map(|j| scope.spawn(j)).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("selftest worker panicked"))
            .collect()
    });
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}
