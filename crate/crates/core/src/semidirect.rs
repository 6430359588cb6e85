//! Presentations of semidirect products `G = B ⋉ A` and the decomposition
//! `𝒩_cM(G) ≅ 𝒩_cM(B) ⊕ (S ∩ γ_{c+1}(F)) / (∏[R₂,F₁,F₂]_c [S, _cF])`.
//!
//! With `F₁`, `F₂` free on the generators of `A` and `B` and `F = F₁ * F₂`,
//! the relators of `G` are those of `A`, those of `B`, and one relator
//! `a⁻¹·θ(b)(a)·[b,a]` per pair of generators, which says `a^b = θ(b)(a)`.
//! `S` is the normal closure of the first and third families.
//!
//! Every subgroup equality used on the way to the decomposition is checked
//! here as a pair of containments between independently built subgroups of
//! `F/γ_{k+c+1}(F)`.

use std::fmt;
use std::sync::Arc;

use crate::baer::{baer_invariant, detect_class, relator_closure, verify_class_bound, Settings};
use crate::filtered::{Ambient, Closure, FilteredSubgroup};
use crate::intlinalg::AbelianInvariants;
use crate::magnus::GroupElement;
use crate::presentation::{ActionSpec, FreeProduct, Presentation, Slot, Word};
use crate::{Error, Result};

/// Presentation of `B ⋉ A` over the disjoint union of the two alphabets,
/// with its relators kept in their three families.
#[derive(Clone, Debug)]
pub struct SemidirectPresentation {
    pub combined: Presentation,
    pub product: FreeProduct,
    /// Relators of `A`; normal generators of `R₁^F`.
    pub rel_a: Vec<Word>,
    /// Relators of `B`; generate `R₂` inside `F₂`.
    pub rel_b: Vec<Word>,
    /// `a⁻¹·w_{a,b}·[b,a]` for each pair of generators.
    pub rel_s: Vec<Word>,
    pub action: ActionSpec,
}

impl SemidirectPresentation {
    fn a_map(&self) -> Vec<usize> {
        self.product.slot_map(Slot::APart).expect("A slot")
    }

    fn b_map(&self) -> Vec<usize> {
        self.product.slot_map(Slot::BPart).expect("B slot")
    }
}

impl fmt::Display for SemidirectPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let alpha = &self.product.alphabet;
        let show = |ws: &[Word]| -> String {
            ws.iter()
                .map(|w| w.display(alpha).to_string())
                .collect::<Vec<_>>()
                .join(", ")
        };
        writeln!(f, "{}", self.combined)?;
        writeln!(f, "  rel_A: {}", show(&self.rel_a))?;
        writeln!(f, "  rel_B: {}", show(&self.rel_b))?;
        write!(f, "  rel_S: {}", show(&self.rel_s))
    }
}

/// Proof that the action table defines automorphisms of `A` compatible with
/// the relators of `B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ActionCertificate {
    pub k_a: usize,
}

/// Applies the action of one letter of `B` to a word over `A`.
fn act(spec: &ActionSpec, w: &Word, b: usize, inverse: bool) -> Option<Word> {
    if inverse {
        spec.inverse_images.as_ref().map(|t| w.substitute(&t[b]))
    } else {
        Some(w.substitute(&spec.images[b]))
    }
}

/// Checks, inside the class-`k_a` quotient of `A`, that each generator of
/// `B` acts by an automorphism and that the relators of `B` act trivially.
pub fn validate_action(
    spec: &ActionSpec,
    k_a: usize,
    settings: &Settings,
) -> Result<ActionCertificate> {
    let a = &spec.acted;
    let b = &spec.acting;
    verify_class_bound(a, k_a, settings)?;
    let (ambient, ra) = relator_closure(a, k_a, settings)?;
    let in_ra = |w: &Word| -> Result<bool> { ra.contains_element(&ambient.element(w)?) };
    let a_gens: Vec<Word> = (0..a.generator_count()).map(Word::generator).collect();
    let mut failures = Vec::new();
    let finite = ra.quotient_order().is_some();

    for bi in 0..b.generator_count() {
        let bname = b.alphabet.name(bi);
        for r in &a.relators {
            if !in_ra(&r.substitute(&spec.images[bi]))? {
                failures.push(format!(
                    "relator `{}` not preserved by `{bname}`",
                    r.display(&a.alphabet)
                ));
            }
        }
        match &spec.inverse_images {
            Some(inv) => {
                for (ai, g) in a_gens.iter().enumerate() {
                    let there = inv[bi][ai].substitute(&spec.images[bi]);
                    let back = spec.images[bi][ai].substitute(&inv[bi]);
                    if !in_ra(&(&there * &g.inverse()))? || !in_ra(&(&back * &g.inverse()))? {
                        failures.push(format!(
                            "inverse images for `{bname}` do not invert the action on `{}`",
                            a.alphabet.name(ai)
                        ));
                    }
                }
                for r in &a.relators {
                    if !in_ra(&r.substitute(&inv[bi]))? {
                        failures.push(format!(
                            "relator `{}` not preserved by `{bname}^-1`",
                            r.display(&a.alphabet)
                        ));
                    }
                }
            }
            None if finite => {
                let mut gens = ra.elements();
                for w in &spec.images[bi] {
                    gens.push(ambient.element(w)?);
                }
                let image = FilteredSubgroup::closure(&ambient, gens, Closure::Plain)?;
                if !image.is_full() {
                    failures.push(format!("surjectivity fails for `{bname}`"));
                }
            }
            None => failures.push(format!(
                "inverse images for `{bname}` are required when {} is infinite",
                a.name
            )),
        }
    }

    for r in &b.relators {
        for (ai, g) in a_gens.iter().enumerate() {
            let mut w = Some(g.clone());
            for l in r.letters() {
                w = w.and_then(|w| act(spec, &w, l.gen, l.inverse));
            }
            match w {
                Some(w) if in_ra(&(&w * &g.inverse()))? => {}
                Some(_) => failures.push(format!(
                    "relator `{}` of {} does not act trivially on `{}`",
                    r.display(&b.alphabet),
                    b.name,
                    a.alphabet.name(ai)
                )),
                None => failures.push(format!(
                    "relator `{}` of {} uses inverse letters but no inverse images were given",
                    r.display(&b.alphabet),
                    b.name
                )),
            }
        }
    }

    if failures.is_empty() {
        Ok(ActionCertificate { k_a })
    } else {
        Err(Error::ActionInvalid(failures))
    }
}

/// Assembles the presentation of `B ⋉ A`. The action must already be
/// validated.
pub fn build_semidirect(
    spec: &ActionSpec,
    _cert: &ActionCertificate,
) -> Result<SemidirectPresentation> {
    let a = &spec.acted;
    let b = &spec.acting;
    let product = FreeProduct::new(&a.alphabet, &b.alphabet)?;
    let rel_a = a
        .relators
        .iter()
        .map(|r| product.embed(r, Slot::APart))
        .collect::<Result<Vec<_>>>()?;
    let rel_b = b
        .relators
        .iter()
        .map(|r| product.embed(r, Slot::BPart))
        .collect::<Result<Vec<_>>>()?;
    let a_map = product.slot_map(Slot::APart)?;
    let b_map = product.slot_map(Slot::BPart)?;
    let mut rel_s = Vec::new();
    for (ai, &ag) in a_map.iter().enumerate() {
        for (bi, &bg) in b_map.iter().enumerate() {
            let aw = Word::generator(ag);
            let bw = Word::generator(bg);
            let image = product.embed(&spec.images[bi][ai], Slot::APart)?;
            let rel = &(&aw.inverse() * &image) * &Word::commutator(&bw, &aw);
            rel_s.push(rel);
        }
    }
    let relators: Vec<Word> = rel_a.iter().chain(&rel_b).chain(&rel_s).cloned().collect();
    let combined = Presentation::new(
        &format!("{}_x_{}", b.name, a.name),
        product.alphabet.clone(),
        relators,
    )?;
    Ok(SemidirectPresentation {
        combined,
        product,
        rel_a,
        rel_b,
        rel_s,
        action: spec.clone(),
    })
}

/// Subgroups of `F/γ_{W+1}(F)`, `W = k + c`, that enter the decomposition.
#[derive(Clone, Debug)]
pub struct Materialized {
    pub c: usize,
    pub k: usize,
    pub ambient: Arc<Ambient>,
    pub a_ambient: Arc<Ambient>,
    pub b_ambient: Arc<Ambient>,
    /// `R`, normal closure of all relators.
    pub r: FilteredSubgroup,
    /// `R₁^F`.
    pub r1: FilteredSubgroup,
    /// `R₂` as a normal subgroup of `F₂`.
    pub r2_in_b: FilteredSubgroup,
    /// `R₂` carried into `F` (not normal there).
    pub r2: FilteredSubgroup,
    pub s: FilteredSubgroup,
    /// `[R₂, F₁]^F`, built from generator-level commutators.
    pub r2_f1: FilteredSubgroup,
    /// `[R, _cF]`.
    pub r_c: FilteredSubgroup,
    /// `[R₂, _cF₂]` built in `F₂` and carried into `F`.
    pub r2_c: FilteredSubgroup,
    /// `∏[R₂,F₁,F₂]_c`.
    pub mixed: FilteredSubgroup,
    /// `[S, _cF]`.
    pub s_c: FilteredSubgroup,
}

/// Left-normed commutators `[r, g₁, …, g_c]` with at least one `gᵢ` from `A`.
fn mixed_commutators(
    ambient: &Arc<Ambient>,
    roots: &[(usize, GroupElement)],
    a_gens: &[usize],
    c: usize,
) -> Vec<GroupElement> {
    let n = ambient.letters();
    let cap = ambient.cap();
    let gens = ambient.generators();
    let mut out = Vec::new();
    let total = n.pow(c as u32);
    for (deg, r) in roots {
        if deg + c > cap {
            continue;
        }
        for code in 0..total {
            let tuple = crate::magnus::decode_monomial(n, c, code);
            if !tuple.iter().any(|g| a_gens.contains(g)) {
                continue;
            }
            let e = tuple.iter().fold(r.clone(), |acc, &g| acc.comm(&gens[g]));
            if !e.is_identity() {
                out.push(e);
            }
        }
    }
    out
}

/// Builds every subgroup of the decomposition at cap `k + c`. Fails unless
/// the relator closure certifies class at most `k`.
pub fn materialize_subgroups(
    sp: &SemidirectPresentation,
    c: usize,
    k: usize,
    settings: &Settings,
) -> Result<Materialized> {
    if c == 0 || k == 0 {
        return Err(Error::Syntax("c and k must both be at least 1".into()));
    }
    let cap = k + c;
    let (ambient, r) = relator_closure(&sp.combined, cap, settings)?;
    for m in k + 1..=cap {
        if r.index_at(m).is_none_or(|i| i != 1.into()) {
            return Err(Error::ClassBoundFailed { k, degree: m });
        }
    }
    let a_map = sp.a_map();
    let b_map = sp.b_map();
    let a_ambient = Ambient::new(a_map.len(), cap, settings.cap_guard)?;
    let b_ambient = Ambient::new(b_map.len(), cap, settings.cap_guard)?;

    let r1 = FilteredSubgroup::normal_closure_of_words(&ambient, &sp.rel_a)?;
    let s_words: Vec<Word> = sp.rel_a.iter().chain(&sp.rel_s).cloned().collect();
    let s = FilteredSubgroup::normal_closure_of_words(&ambient, &s_words)?;

    let r2_in_b =
        FilteredSubgroup::normal_closure_of_words(&b_ambient, &sp.action.acting.relators)?;
    let r2 = FilteredSubgroup::closure(
        &ambient,
        r2_in_b.embed_elements(&ambient, &b_map)?,
        Closure::Plain,
    )?;
    let roots: Vec<(usize, GroupElement)> = r2
        .stored()
        .into_iter()
        .map(|(d, e)| (d, e.clone()))
        .collect();

    let r2_f1 = FilteredSubgroup::closure(
        &ambient,
        mixed_commutators(&ambient, &roots, &a_map, 1),
        Closure::Normal,
    )?;
    let mixed = FilteredSubgroup::closure(
        &ambient,
        mixed_commutators(&ambient, &roots, &a_map, c),
        Closure::Normal,
    )?;
    let r_c = r.iterated_commutator(c)?;
    let s_c = s.iterated_commutator(c)?;
    let r2_c = FilteredSubgroup::closure(
        &ambient,
        r2_in_b
            .iterated_commutator(c)?
            .embed_elements(&ambient, &b_map)?,
        Closure::Plain,
    )?;
    Ok(Materialized {
        c,
        k,
        ambient,
        a_ambient,
        b_ambient,
        r,
        r1,
        r2_in_b,
        r2,
        s,
        r2_f1,
        r_c,
        r2_c,
        mixed,
        s_c,
    })
}

/// Outcome of one subgroup check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
}

/// Checks every subgroup identity behind the decomposition:
///
/// - `R₁ ⊆ S` and `[R₂, F₁] ⊆ S`;
/// - `R = R₂ S`;
/// - `R ∩ γ_{c+1}(F) = (R₂ ∩ γ_{c+1}(F₂)) (S ∩ γ_{c+1}(F))`;
/// - `[R, _cF] = [R₂, _cF₂] ∏[R₂,F₁,F₂]_c [S, _cF]`;
/// - `γ_{c+1}(F) = γ_{c+1}(F₁) γ_{c+1}(F₂) ∏[F₁,F₂]_{c+1}`;
/// - `F₂ ∩ F₁[F₁,F₂] = 1` and `F = F₂ · F₁[F₁,F₂]`.
pub fn verify_subgroup_identities(
    sp: &SemidirectPresentation,
    m: &Materialized,
) -> Result<Vec<Check>> {
    let c = m.c;
    let f = &m.ambient;
    let a_map = sp.a_map();
    let b_map = sp.b_map();
    let mut checks = Vec::new();

    checks.push(Check {
        name: "r1_in_s",
        pass: m.s.contains(&m.r1)?,
    });
    checks.push(Check {
        name: "r2_f1_commutator_in_s",
        pass: m.s.contains(&m.r2_f1)?,
    });

    let r2s = m.r2.product(&m.s)?;
    checks.push(Check {
        name: "r_equals_r2_s",
        pass: m.r.same_subgroup(&r2s)?,
    });

    let lhs = m.r.intersect_with_gamma(c + 1)?;
    let r2_gamma = FilteredSubgroup::closure(
        f,
        m.r2_in_b
            .intersect_with_gamma(c + 1)?
            .embed_elements(f, &b_map)?,
        Closure::Plain,
    )?;
    let rhs = r2_gamma.product(&m.s.intersect_with_gamma(c + 1)?)?;
    checks.push(Check {
        name: "gamma_intersection_splits",
        pass: lhs.same_subgroup(&rhs)?,
    });

    let rhs = m.r2_c.product(&m.mixed.join(&m.s_c)?)?;
    checks.push(Check {
        name: "iterated_commutator_splits",
        pass: m.r_c.same_subgroup(&rhs)?,
    });

    // free product facts
    let full = FilteredSubgroup::full(f);
    let gamma = full.intersect_with_gamma(c + 1)?;
    let embed_gamma = |amb: &Arc<Ambient>, map: &[usize]| -> Result<FilteredSubgroup> {
        let g = FilteredSubgroup::full(amb).intersect_with_gamma(c + 1)?;
        FilteredSubgroup::closure(f, g.embed_elements(f, map)?, Closure::Plain)
    };
    let g1 = embed_gamma(&m.a_ambient, &a_map)?;
    let g2 = embed_gamma(&m.b_ambient, &b_map)?;
    let gens = f.generators();
    let ab: Vec<GroupElement> = a_map
        .iter()
        .flat_map(|&a| b_map.iter().map(move |&b| gens[a].comm(&gens[b])))
        .collect();
    let cross = FilteredSubgroup::closure(f, ab, Closure::Normal)?.iterated_commutator(c - 1)?;
    let rhs = g1.product(&g2)?.product(&cross)?;
    checks.push(Check {
        name: "gamma_of_free_product",
        pass: gamma.same_subgroup(&rhs)?,
    });

    let f2 = FilteredSubgroup::closure(f, b_map.iter().map(|&b| gens[b].clone()), Closure::Plain)?;
    let kernel =
        FilteredSubgroup::closure(f, a_map.iter().map(|&a| gens[a].clone()), Closure::Normal)?;
    checks.push(Check {
        name: "free_factor_complement",
        pass: f2.meets_trivially(&kernel)? && f2.product(&kernel)?.is_full(),
    });
    Ok(checks)
}

/// `(S ∩ γ_{c+1}(F)) / (∏[R₂,F₁,F₂]_c [S, _cF])`.
pub fn complement_factor(m: &Materialized) -> Result<AbelianInvariants> {
    let numerator = m.s.intersect_with_gamma(m.c + 1)?;
    let denominator = m.mixed.join(&m.s_c)?;
    FilteredSubgroup::quotient_invariants(&numerator, &denominator)
}

/// Direct sum in canonical form: ranks add, torsion is re-normalized to a
/// divisor chain.
pub fn merge_invariants(x: &AbelianInvariants, y: &AbelianInvariants) -> AbelianInvariants {
    let torsion: Vec<_> = x.torsion.iter().chain(&y.torsion).cloned().collect();
    let mut merged = AbelianInvariants::from_cyclic_orders(&torsion);
    merged.free_rank += x.free_rank + y.free_rank;
    merged
}

/// Invariants and checks for one semidirect product and one `c`.
#[derive(Clone, Debug)]
pub struct DecompositionReport {
    pub c: usize,
    pub k: usize,
    pub k_b: usize,
    pub invariants_g: AbelianInvariants,
    pub invariants_b: AbelianInvariants,
    pub invariants_complement: AbelianInvariants,
    pub checks: Vec<Check>,
}

impl DecompositionReport {
    pub fn direct_sum_holds(&self) -> bool {
        self.invariants_g == merge_invariants(&self.invariants_b, &self.invariants_complement)
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<bool> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.pass)
    }
}

/// Computes `𝒩_cM(G)`, `𝒩_cM(B)` and the complement factor, checks that the
/// first is the direct sum of the other two, and runs the subgroup checks.
/// At `c = 1` it also checks that `[R₂,F₁][S,F]` equals the general
/// denominator as a subgroup.
pub fn verify_decomposition(
    sp: &SemidirectPresentation,
    c: usize,
    k: usize,
    k_b: usize,
    settings: &Settings,
) -> Result<DecompositionReport> {
    let m = materialize_subgroups(sp, c, k, settings)?;
    let mut checks = verify_subgroup_identities(sp, &m)?;
    let invariants_g = baer_invariant(&sp.combined, c, k, settings)?;
    let invariants_b = baer_invariant(&sp.action.acting, c, k_b, settings)?;
    let invariants_complement = complement_factor(&m)?;
    if c == 1 {
        let classical = m
            .r2_f1
            .join(&m.s.commutator_with(&FilteredSubgroup::full(&m.ambient))?)?;
        let general = m.mixed.join(&m.s_c)?;
        checks.push(Check {
            name: "c1_denominator_agrees",
            pass: classical.same_subgroup(&general)?,
        });
    }
    let mut report = DecompositionReport {
        c,
        k,
        k_b,
        invariants_g,
        invariants_b,
        invariants_complement,
        checks,
    };
    let direct = report.direct_sum_holds();
    report.checks.push(Check {
        name: "direct_sum",
        pass: direct,
    });
    Ok(report)
}

/// Class bound of `p`: detected up to `k_max` when possible, else `bound`.
pub fn class_or(
    p: &Presentation,
    bound: Option<usize>,
    k_max: usize,
    settings: &Settings,
) -> Result<usize> {
    match detect_class(p, k_max, settings)? {
        Some(k) => Ok(k),
        None => bound.ok_or(Error::ClassUndetermined { k_max }),
    }
}

/// Validates the action, builds `B ⋉ A` and verifies its decomposition.
/// A given `class_bound` is used for `G` as is (and certified); otherwise
/// the class of `G` is detected. Factors use detection with `class_bound`
/// (or `G`'s class) as fallback.
pub fn decompose(
    spec: &ActionSpec,
    c: usize,
    class_bound: Option<usize>,
    k_max: usize,
    settings: &Settings,
) -> Result<(SemidirectPresentation, DecompositionReport)> {
    let k_a = class_or(&spec.acted, class_bound, k_max, settings)?;
    let cert = validate_action(spec, k_a, settings)?;
    let sp = build_semidirect(spec, &cert)?;
    let k = match class_bound {
        Some(k) => k,
        None => class_or(&sp.combined, None, k_max, settings)?,
    };
    let k_b = class_or(&spec.acting, Some(k), k_max, settings)?;
    let report = verify_decomposition(&sp, c, k, k_b, settings)?;
    Ok((sp, report))
}
