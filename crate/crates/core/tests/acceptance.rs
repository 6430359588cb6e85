//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use baerkit::baer::{baer_invariant, BaerJob, Settings};
use baerkit::filtered::{Ambient, Closure, FilteredSubgroup, Sieve};
use baerkit::intlinalg::{hnf, snf, AbelianInvariants, IntMatrix};
use baerkit::lyndon::{lyndon_words, witt_dimension, LyndonBasis};
use baerkit::magnus::{decode_monomial, monomial_count, GroupElement};
use baerkit::presentation::{parse_input_file, Presentation, Word};
use baerkit::semidirect::{
    build_semidirect, validate_action, verify_decomposition, DecompositionReport,
};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

const CASES: u32 = 200;

fn settings() -> Settings {
    Settings::default()
}

// ---------------------------------------------------------------- oracles

fn mobius(mut n: usize) -> i64 {
    let mut result = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

fn witt_oracle(n: usize, m: usize) -> usize {
    let mut sum: i64 = 0;
    for d in 1..=m {
        if m.is_multiple_of(d) {
            sum += mobius(d) * (n as i64).pow((m / d) as u32);
        }
    }
    (sum / m as i64) as usize
}

/// Lyndon iff strictly smaller than every nontrivial rotation.
fn is_lyndon_by_rotation(w: &[usize]) -> bool {
    let n = w.len();
    (1..n).all(|r| {
        let rot: Vec<usize> = w[r..].iter().chain(&w[..r]).copied().collect();
        w < &rot[..]
    })
}

type Poly = BTreeMap<Vec<usize>, i64>;

fn poly_mul(a: &Poly, b: &Poly, cap: usize) -> Poly {
    let mut out = Poly::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            if ma.len() + mb.len() > cap {
                continue;
            }
            let mut m = ma.clone();
            m.extend(mb);
            *out.entry(m).or_insert(0) += ca * cb;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

/// Image of a signed letter: `1 + X` or `1 - X + X² - …`.
fn letter_poly(g: usize, inverse: bool, cap: usize) -> Poly {
    let mut p = Poly::new();
    p.insert(vec![], 1);
    for k in 1..=cap {
        let c = if inverse && k % 2 == 1 { -1 } else { 1 };
        if !inverse && k > 1 {
            break;
        }
        p.insert(vec![g; k], c);
    }
    p
}

fn word_poly(signed: &[i32], cap: usize) -> Poly {
    let mut acc = Poly::new();
    acc.insert(vec![], 1);
    for &s in signed {
        let g = (s.unsigned_abs() - 1) as usize;
        acc = poly_mul(&acc, &letter_poly(g, s < 0, cap), cap);
    }
    acc
}

fn element_poly(g: &GroupElement) -> Poly {
    g.series()
        .terms()
        .into_iter()
        .map(|(m, c)| (m, c.to_i64().expect("small coefficient")))
        .collect()
}

fn with_constant(mut p: Poly) -> Poly {
    p.entry(vec![]).or_insert(1);
    p
}

fn det_oracle(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<i128>> = m[1..]
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|(k, _)| *k != j)
                        .map(|(_, v)| *v)
                        .collect()
                })
                .collect();
            let sign = if j % 2 == 0 { 1 } else { -1 };
            sign * m[0][j] * det_oracle(&minor)
        })
        .sum()
}

fn to_i128(m: &IntMatrix) -> Vec<Vec<i128>> {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|v| v.to_i128().unwrap()).collect())
        .collect()
}

fn mul_oracle(a: &[Vec<i128>], b: &[Vec<i128>]) -> Vec<Vec<i128>> {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|r| {
            (0..cols)
                .map(|j| r.iter().zip(b).map(|(x, br)| x * br[j]).sum())
                .collect()
        })
        .collect()
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// Determinantal divisors `gcd` of all `k × k` minors, `k = 1..`.
fn determinantal_divisors(m: &[Vec<i128>], cols: usize) -> Vec<i128> {
    let rows = m.len();
    (1..=rows.min(cols))
        .map(|k| {
            let mut g = 0;
            for rs in subsets(rows, k) {
                for cs in subsets(cols, k) {
                    let minor: Vec<Vec<i128>> = rs
                        .iter()
                        .map(|&i| cs.iter().map(|&j| m[i][j]).collect())
                        .collect();
                    g = gcd(g, det_oracle(&minor));
                }
            }
            g
        })
        .collect()
}

/// Multiset of prime-power cyclic factors, plus the free rank.
fn primary_parts(inv: &AbelianInvariants) -> (usize, Vec<u64>) {
    let mut parts = Vec::new();
    for t in &inv.torsion {
        let mut t = t.to_u64().unwrap();
        let mut p = 2;
        while t > 1 {
            let mut q = 1;
            while t % p == 0 {
                t /= p;
                q *= p;
            }
            if q > 1 {
                parts.push(q);
            }
            p += 1;
        }
    }
    parts.sort();
    (inv.free_rank, parts)
}

fn direct_sum_oracle(g: &AbelianInvariants, b: &AbelianInvariants, c: &AbelianInvariants) -> bool {
    let (rg, pg) = primary_parts(g);
    let (rb, mut pb) = primary_parts(b);
    let (rc, pc) = primary_parts(c);
    pb.extend(pc);
    pb.sort();
    rg == rb + rc && pg == pb
}

// ------------------------------------------------------------- fixtures

fn inv(rank: usize, torsion: &[u64]) -> AbelianInvariants {
    AbelianInvariants::new(rank, torsion)
}

fn group(name: &str, gens: &[&str], rels: &[&str]) -> Presentation {
    Presentation::parse(name, gens, rels).unwrap()
}

fn free_abelian(n: usize) -> Presentation {
    let gens = ["x", "y", "z"];
    let mut rels = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            rels.push(format!("[{},{}]", gens[i], gens[j]));
        }
    }
    let rels: Vec<&str> = rels.iter().map(String::as_str).collect();
    group("Zn", &gens[..n], &rels)
}

struct TableRow {
    label: String,
    p: Presentation,
    c: usize,
    expected: AbelianInvariants,
}

fn table() -> Vec<TableRow> {
    let mut t = Vec::new();
    for m in 2..=5 {
        t.push(TableRow {
            label: format!("M(Z{m})"),
            p: group("Zm", &["x"], &[&format!("x^{m}")]),
            c: 1,
            expected: inv(0, &[]),
        });
    }
    t.push(TableRow {
        label: "M(Z^2)".into(),
        p: free_abelian(2),
        c: 1,
        expected: inv(1, &[]),
    });
    let v4 = group("V4", &["x", "y"], &["x^2", "y^2", "[x,y]"]);
    t.push(TableRow {
        label: "M(Z2xZ2)".into(),
        p: v4.clone(),
        c: 1,
        expected: inv(0, &[2]),
    });
    t.push(TableRow {
        label: "M(Z2^3)".into(),
        p: group(
            "E8",
            &["x", "y", "z"],
            &["x^2", "y^2", "z^2", "[x,y]", "[x,z]", "[y,z]"],
        ),
        c: 1,
        expected: inv(0, &[2, 2, 2]),
    });
    t.push(TableRow {
        label: "N2M(Z2xZ2)".into(),
        p: v4,
        c: 2,
        expected: inv(0, &[2, 2]),
    });
    for n in 1..=3 {
        for c in 1..=3 {
            t.push(TableRow {
                label: format!("N{c}M(Z^{n})"),
                p: free_abelian(n),
                c,
                expected: inv(witt_oracle(n, c + 1), &[]),
            });
        }
    }
    t
}

struct Example {
    name: &'static str,
    text: &'static str,
    k: usize,
    k_b: usize,
    k_a: usize,
}

const SUITE: &[Example] = &[
    Example {
        name: "D8",
        text: include_str!("../data/d8.txt"),
        k: 2,
        k_b: 1,
        k_a: 1,
    },
    Example {
        name: "Z2 on Z2xZ2 trivial",
        text: include_str!("../data/z2_on_z2xz2_trivial.txt"),
        k: 1,
        k_b: 1,
        k_a: 1,
    },
    Example {
        name: "Z2xZ2 trivial",
        text: include_str!("../data/z2xz2_trivial.txt"),
        k: 1,
        k_b: 1,
        k_a: 1,
    },
    Example {
        name: "Z4 on Z4 inversion",
        text: include_str!("../data/z4_on_z4_inversion.txt"),
        k: 2,
        k_b: 1,
        k_a: 1,
    },
    Example {
        name: "Z on Z trivial",
        text: include_str!("../data/z_on_z_trivial.txt"),
        k: 1,
        k_b: 1,
        k_a: 1,
    },
];

fn suite_reports() -> Result<Vec<(&'static str, DecompositionReport)>, String> {
    let mut out = Vec::new();
    for e in SUITE {
        let spec = parse_input_file(e.text)
            .map_err(|x| x.to_string())?
            .action
            .ok_or("no action")?;
        let cert = validate_action(&spec, e.k_a, &settings()).map_err(|x| x.to_string())?;
        let sp = build_semidirect(&spec, &cert).map_err(|x| x.to_string())?;
        for c in 1..=2 {
            let r =
                verify_decomposition(&sp, c, e.k, e.k_b, &settings()).map_err(|x| x.to_string())?;
            out.push((e.name, r));
        }
    }
    Ok(out)
}

// ------------------------------------------------------------ criteria

type Verdict = Result<String, String>;

fn criterion_1() -> Verdict {
    let mut slowest = Duration::ZERO;
    for row in table() {
        let t = Instant::now();
        let got = baer_invariant(&row.p, row.c, 1, &settings())
            .map_err(|e| format!("{}: {e}", row.label))?;
        let dt = t.elapsed();
        slowest = slowest.max(dt);
        if got != row.expected {
            return Err(format!(
                "{}: got {got}, expected {}",
                row.label, row.expected
            ));
        }
        if dt > Duration::from_secs(10) {
            return Err(format!("{} took {dt:?}", row.label));
        }
    }
    Ok(format!("{} entries, slowest {slowest:.2?}", table().len()))
}

/// Criteria 2, 3 and 4 share one batch of reports.
fn criteria_2_to_4() -> [Verdict; 3] {
    let t = Instant::now();
    let reports = match suite_reports() {
        Ok(r) => r,
        Err(e) => return [Err(e.clone()), Err(e.clone()), Err(e)],
    };
    let dt = t.elapsed();

    const IDENTITIES: [&str; 5] = [
        "r1_in_s",
        "r2_f1_commutator_in_s",
        "r_equals_r2_s",
        "gamma_intersection_splits",
        "iterated_commutator_splits",
    ];
    let mut c2 = Ok(format!("{} reports in {dt:.2?}", reports.len()));
    for (name, r) in &reports {
        for id in IDENTITIES {
            if r.check(id) != Some(true) {
                c2 = Err(format!("{name} c={}: {id} failed", r.c));
            }
        }
    }
    if dt > Duration::from_secs(300) {
        c2 = Err(format!("suite took {dt:?}"));
    }

    let mut c3 = Ok(format!("{} direct sums", reports.len()));
    for (name, r) in &reports {
        let oracle = direct_sum_oracle(&r.invariants_g, &r.invariants_b, &r.invariants_complement);
        if r.check("direct_sum") != Some(true) || !oracle {
            c3 = Err(format!(
                "{name} c={}: G {} B {} complement {}",
                r.c, r.invariants_g, r.invariants_b, r.invariants_complement
            ));
        }
        let want = match (*name, r.c) {
            ("D8", 1) => Some((inv(0, &[2]), inv(0, &[]), inv(0, &[2]))),
            ("Z2xZ2 trivial", 2) => Some((inv(0, &[2, 2]), inv(0, &[]), inv(0, &[2, 2]))),
            _ => None,
        };
        if let Some((g, b, comp)) = want {
            if r.invariants_g != g || r.invariants_b != b || r.invariants_complement != comp {
                c3 = Err(format!("{name} c={}: unexpected values", r.c));
            }
        }
    }

    let mut c4 = Ok("c=1 denominators agree".to_string());
    for (name, r) in reports.iter().filter(|(_, r)| r.c == 1) {
        if r.check("c1_denominator_agrees") != Some(true) {
            c4 = Err(format!("{name}: denominators differ"));
        }
    }
    [c2, c3, c4]
}

fn criterion_5() -> Verdict {
    let plain = group("V4", &["x", "y"], &["x^2", "y^2", "[x,y]"]);
    let redundant = group(
        "V4r",
        &["x", "y", "z"],
        &["x^2", "y^2", "[x,y]", "z^-1 x y"],
    );
    for (c, expected) in [(1, inv(0, &[2])), (2, inv(0, &[2, 2]))] {
        let a = baer_invariant(&plain, c, 1, &settings()).map_err(|e| e.to_string())?;
        let b = baer_invariant(&redundant, c, 1, &settings()).map_err(|e| e.to_string())?;
        if a != b || a != expected {
            return Err(format!("c={c}: {a} vs {b}"));
        }
    }
    Ok("c=1,2 agree".into())
}

fn signed_word(n: usize, max_len: usize) -> impl Strategy<Value = Vec<i32>> {
    prop::collection::vec((1..=n as i32, any::<bool>()), 0..=max_len).prop_map(|v| {
        v.into_iter()
            .map(|(g, neg)| if neg { -g } else { g })
            .collect()
    })
}

fn run_property<S: Strategy>(
    name: &str,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&strategy, test)
        .map_err(|e| format!("{name}: {e}"))
}

fn criterion_6() -> Verdict {
    // Magnus homomorphism and inverse exactness
    run_property(
        "magnus",
        (1usize..=3, 1usize..=4)
            .prop_flat_map(|(n, cap)| (Just(n), Just(cap), signed_word(n, 8), signed_word(n, 8))),
        |(n, cap, u, v)| {
            let wu = Word::from_signed(&u);
            let wv = Word::from_signed(&v);
            let gu = GroupElement::from_word(&wu, n, cap).unwrap();
            let gv = GroupElement::from_word(&wv, n, cap).unwrap();
            let mut uv = u.clone();
            uv.extend(&v);
            prop_assert_eq!(
                with_constant(element_poly(&(&gu * &gv))),
                word_poly(&uv, cap)
            );
            prop_assert_eq!(with_constant(element_poly(&gu)), word_poly(&u, cap));
            prop_assert!((&gu * &gu.inverse()).is_identity());
            prop_assert_eq!(
                gu.inverse(),
                GroupElement::from_word(&wu.inverse(), n, cap).unwrap()
            );
            Ok(())
        },
    )?;

    // Lyndon enumeration, Witt agreement and triangularity
    for n in 1..=4 {
        for m in 1..=5 {
            let brute = (0..monomial_count(n, m))
                .map(|code| decode_monomial(n, m, code))
                .filter(|w| is_lyndon_by_rotation(w))
                .count();
            if brute != witt_oracle(n, m)
                || lyndon_words(n, m).len() != brute
                || witt_dimension(n, m) != brute
            {
                return Err(format!("witt disagreement n={n} m={m}"));
            }
        }
    }
    run_property(
        "lyndon",
        (1usize..=4, 1usize..=5).prop_flat_map(|(n, m)| {
            let len = witt_oracle(n, m);
            (Just(n), Just(m), prop::collection::vec(-5i64..=5, len))
        }),
        |(n, m, coeffs)| {
            let basis = LyndonBasis::new(n, m);
            let mut t = baerkit::magnus::Homogeneous::zero(n, m);
            for (j, w) in basis.words().iter().enumerate() {
                let e = basis.expansion(j);
                for code in 0..monomial_count(n, m) {
                    let mono = decode_monomial(n, m, code);
                    if &mono == w {
                        prop_assert_eq!(e.coeffs[code].clone(), BigInt::from(1));
                    } else if &mono < w {
                        prop_assert_eq!(e.coeffs[code].clone(), BigInt::from(0));
                    }
                    t.coeffs[code] += &e.coeffs[code] * coeffs[j];
                }
            }
            let want: Vec<BigInt> = coeffs.iter().map(|&c| BigInt::from(c)).collect();
            prop_assert_eq!(basis.lie_coordinates(&t).unwrap(), Some(want));
            Ok(())
        },
    )?;

    // HNF / SNF
    run_property(
        "hnf_snf",
        (1usize..=4, 1usize..=4).prop_flat_map(|(r, c)| {
            (
                Just(c),
                prop::collection::vec(prop::collection::vec(-6i64..=6, c), r),
            )
        }),
        |(cols, rows)| {
            let m = IntMatrix::from_rows(
                cols,
                rows.iter()
                    .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
                    .collect(),
            );
            let mi = to_i128(&m);
            let (h, u) = hnf(&m);
            prop_assert_eq!(mul_oracle(&to_i128(&u), &mi), to_i128(&h));
            prop_assert_eq!(det_oracle(&to_i128(&u)).abs(), 1);
            let (d, su, sv) = snf(&m);
            prop_assert_eq!(
                mul_oracle(&mul_oracle(&to_i128(&su), &mi), &to_i128(&sv)),
                to_i128(&d)
            );
            prop_assert_eq!(det_oracle(&to_i128(&su)).abs(), 1);
            prop_assert_eq!(det_oracle(&to_i128(&sv)).abs(), 1);
            let di = to_i128(&d);
            let diag: Vec<i128> = (0..di.len().min(cols)).map(|i| di[i][i]).collect();
            for (i, row) in di.iter().enumerate() {
                for (j, x) in row.iter().enumerate() {
                    if i != j {
                        prop_assert_eq!(*x, 0);
                    }
                }
            }
            for w in diag.windows(2) {
                prop_assert!(w[0] >= 0 && (w[1] == 0 || (w[0] != 0 && w[1] % w[0] == 0)));
            }
            // d_1 ⋯ d_k equals the k-th determinantal divisor
            let dd = determinantal_divisors(&mi, cols);
            let mut prod = 1;
            for (k, x) in dd.iter().enumerate() {
                prod *= diag[k];
                prop_assert_eq!(prod.abs(), *x);
            }
            Ok(())
        },
    )?;

    // sieve saturation stability
    let ambient = Ambient::new(2, 3, settings().cap_guard).unwrap();
    run_property(
        "sieve",
        (
            prop::collection::vec(signed_word(2, 6), 1..=2),
            prop::collection::vec((0usize..2, signed_word(2, 4), any::<bool>()), 1..=3),
        ),
        |(gens, picks)| {
            let elems: Vec<GroupElement> = gens
                .iter()
                .map(|w| ambient.element(&Word::from_signed(w)).unwrap())
                .collect();
            let s = FilteredSubgroup::closure(&ambient, elems.clone(), Closure::Normal).unwrap();
            let again = FilteredSubgroup::closure(&ambient, s.elements(), Closure::Normal).unwrap();
            prop_assert!(s.same_subgroup(&again).unwrap());
            let mut g = GroupElement::identity(2, 3);
            for (i, h, neg) in picks {
                let e = &elems[i % elems.len()];
                let e = if neg { e.inverse() } else { e.clone() };
                let h = ambient.element(&Word::from_signed(&h)).unwrap();
                g = &g * &(&(&h.inverse() * &e) * &h);
            }
            match s.sieve(&g).unwrap() {
                Sieve::Member(recipe) => prop_assert_eq!(s.evaluate(&recipe), g),
                Sieve::Residue(_) => prop_assert!(false, "conjugate product not a member"),
            }
            Ok(())
        },
    )?;

    // truncation exactness on the table, with a random redundant relator
    let rows = table();
    let count = rows.len();
    run_property(
        "truncation",
        (0..count, any::<prop::sample::Index>(), signed_word(3, 3)),
        |(i, pick, conj)| {
            let row = &rows[i];
            let mut p = row.p.clone();
            let n = p.generator_count() as i32;
            if !p.relators.is_empty() {
                let r = p.relators[pick.index(p.relators.len())].clone();
                let h: Vec<i32> = conj.into_iter().filter(|g| g.abs() <= n).collect();
                let h = Word::from_signed(&h);
                p.relators.push(&(&h.inverse() * &r) * &h);
            }
            let job = BaerJob::new(p, row.c, 1).unwrap();
            let at_w = job.run_at_cap(job.cap(), &settings()).unwrap();
            let at_w1 = job.run_at_cap(job.cap() + 1, &settings()).unwrap();
            prop_assert_eq!(&at_w, &at_w1);
            prop_assert_eq!(&at_w, &row.expected);
            Ok(())
        },
    )?;
    Ok(format!("5 suites x {CASES} cases"))
}

fn criterion_7() -> Verdict {
    let t = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_baerkit"))
        .args(["--format", "machine", "selftest"])
        .output()
        .map_err(|e| e.to_string())?;
    let dt = t.elapsed();
    let stdout = String::from_utf8_lossy(&out.stdout);
    let lines = stdout.lines().filter(|l| l.starts_with("check=")).count();
    if !out.status.success() {
        let failed: Vec<&str> = stdout
            .lines()
            .filter(|l| l.ends_with("status=fail"))
            .collect();
        return Err(format!("exit {:?}, failing: {failed:?}", out.status.code()));
    }
    if dt > Duration::from_secs(600) {
        return Err(format!("took {dt:?}"));
    }
    let groups = [
        "check=multiplier.",
        "check=semidirect.",
        "check=independence.",
        "check=property.",
    ];
    if !groups.iter().all(|g| stdout.contains(g)) {
        return Err("selftest is missing a criterion group".into());
    }
    Ok(format!("{lines} checks in {dt:.2?}"))
}

fn main() {
    let mut verdicts: Vec<(usize, Verdict, Duration)> = Vec::new();
    let mut timed = |n: usize, f: &dyn Fn() -> Verdict| {
        let t = Instant::now();
        let v = f();
        verdicts.push((n, v, t.elapsed()));
    };
    timed(1, &criterion_1);
    let t = Instant::now();
    let [c2, c3, c4] = criteria_2_to_4();
    let shared = t.elapsed();
    for (n, v) in [(2, c2), (3, c3), (4, c4)] {
        verdicts.push((n, v, shared));
    }
    let mut timed = |n: usize, f: &dyn Fn() -> Verdict| {
        let t = Instant::now();
        let v = f();
        verdicts.push((n, v, t.elapsed()));
    };
    timed(5, &criterion_5);
    timed(6, &criterion_6);
    timed(7, &criterion_7);

    let mut failed = 0;
    for (n, v, dt) in &verdicts {
        match v {
            Ok(msg) => println!("criterion {n}: PASS ({msg}; {dt:.2?})"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n}: FAIL ({msg}; {dt:.2?})");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
