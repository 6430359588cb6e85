//! Baer-invariants `𝒩_cM(G) = (R ∩ γ_{c+1}(F)) / [R, _cF]` from a finite
//! presentation of a nilpotent group.
//!
//! If `G` has class at most `k` then `γ_{k+1}(F) ⊆ R`, hence
//! `γ_{k+c+1}(F) ⊆ [R, _cF]`, and both subgroups can be computed exactly in
//! `F/γ_{k+c+1}(F)`.

use std::sync::Arc;

use num_bigint::BigInt;

use crate::filtered::{Ambient, FilteredSubgroup};
use crate::intlinalg::AbelianInvariants;
use crate::presentation::Presentation;
use crate::{Error, Result};

/// Engine-wide limits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Settings {
    /// Largest allowed number of monomials of degree `1..=W` in one ambient.
    pub cap_guard: u128,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { cap_guard: 50_000 }
    }
}

/// Witness that `γ_{k+1}(F) ⊆ R·γ_{k+2}(F)` for the given presentation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClassCertificate {
    pub k: usize,
}

/// Normal closure of the relators in `F/γ_{cap+1}(F)`.
pub fn relator_closure(
    p: &Presentation,
    cap: usize,
    settings: &Settings,
) -> Result<(Arc<Ambient>, FilteredSubgroup)> {
    let ambient = Ambient::new(p.generator_count(), cap, settings.cap_guard)?;
    let r = FilteredSubgroup::normal_closure_of_words(&ambient, &p.relators)?;
    Ok((ambient, r))
}

/// First degree in `from..=cap` where the relator closure misses part of
/// `γ_m/γ_{m+1}`.
fn first_deficient(r: &FilteredSubgroup, from: usize) -> Option<usize> {
    let cap = r.ambient().cap();
    (from..=cap).find(|&m| r.index_at(m).is_none_or(|i| i != BigInt::from(1)))
}

/// Checks `γ_{k+1}(F) ⊆ R·γ_{k+2}(F)` at cap `k+1`.
pub fn verify_class_bound(
    p: &Presentation,
    k: usize,
    settings: &Settings,
) -> Result<ClassCertificate> {
    if k == 0 {
        return Err(Error::Syntax("class bound must be at least 1".into()));
    }
    let (_, r) = relator_closure(p, k + 1, settings)?;
    match first_deficient(&r, k + 1) {
        None => Ok(ClassCertificate { k }),
        Some(degree) => Err(Error::ClassBoundFailed { k, degree }),
    }
}

/// One probed class bound, for reporting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassProbe {
    pub k: usize,
    pub certified: bool,
    /// `|F / R γ_{k+1}|`, `None` when infinite.
    pub order: Option<BigInt>,
}

/// Smallest `k ≤ k_max` whose bound is certified and for which the nilpotent
/// quotients of class `k` and `k+1` have the same finite order. Returns the
/// probes made along the way.
pub fn detect_class_traced(
    p: &Presentation,
    k_max: usize,
    settings: &Settings,
) -> Result<(Option<usize>, Vec<ClassProbe>)> {
    let mut probes = Vec::new();
    let (_, r1) = relator_closure(p, 1, settings)?;
    let mut prev_order = r1.quotient_order();
    for k in 1..=k_max {
        let (_, r) = relator_closure(p, k + 1, settings)?;
        let certified = first_deficient(&r, k + 1).is_none();
        let order = r.quotient_order();
        probes.push(ClassProbe {
            k,
            certified,
            order: prev_order.clone(),
        });
        if certified && prev_order.is_some() && order == prev_order {
            return Ok((Some(k), probes));
        }
        prev_order = order;
    }
    Ok((None, probes))
}

pub fn detect_class(p: &Presentation, k_max: usize, settings: &Settings) -> Result<Option<usize>> {
    Ok(detect_class_traced(p, k_max, settings)?.0)
}

/// A Baer-invariant computation: presentation, variety parameter `c` and a
/// class bound `k` that is re-certified on every run.
#[derive(Clone, Debug)]
pub struct BaerJob {
    pub presentation: Presentation,
    pub c: usize,
    pub k: usize,
}

/// The two subgroups whose quotient is the Baer-invariant.
#[derive(Clone, Debug)]
pub struct HopfQuotient {
    pub relators: FilteredSubgroup,
    pub numerator: FilteredSubgroup,
    pub denominator: FilteredSubgroup,
}

impl BaerJob {
    pub fn new(presentation: Presentation, c: usize, k: usize) -> Result<Self> {
        if c == 0 || k == 0 {
            return Err(Error::Syntax("c and k must both be at least 1".into()));
        }
        Ok(BaerJob { presentation, c, k })
    }

    pub fn cap(&self) -> usize {
        self.k + self.c
    }

    /// Builds `R`, `R ∩ γ_{c+1}` and `[R, _cF]` at the given cap, which must
    /// be at least `k + c`.
    pub fn materialize(&self, cap: usize, settings: &Settings) -> Result<HopfQuotient> {
        if cap < self.cap() {
            return Err(Error::Syntax(format!(
                "cap {cap} is below k + c = {}",
                self.cap()
            )));
        }
        let (_, r) = relator_closure(&self.presentation, cap, settings)?;
        if let Some(degree) = first_deficient(&r, self.k + 1) {
            return Err(Error::ClassBoundFailed { k: self.k, degree });
        }
        let numerator = r.intersect_with_gamma(self.c + 1)?;
        let denominator = r.iterated_commutator(self.c)?;
        Ok(HopfQuotient {
            relators: r,
            numerator,
            denominator,
        })
    }

    pub fn run_at_cap(&self, cap: usize, settings: &Settings) -> Result<AbelianInvariants> {
        let q = self.materialize(cap, settings)?;
        FilteredSubgroup::quotient_invariants(&q.numerator, &q.denominator)
    }

    pub fn run(&self, settings: &Settings) -> Result<AbelianInvariants> {
        self.run_at_cap(self.cap(), settings)
    }
}

/// `𝒩_cM(G)` for a group of class at most `k`.
pub fn baer_invariant(
    p: &Presentation,
    c: usize,
    k: usize,
    settings: &Settings,
) -> Result<AbelianInvariants> {
    BaerJob::new(p.clone(), c, k)?.run(settings)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Independence {
    Agree(AbelianInvariants),
    Disagree {
        first: AbelianInvariants,
        second: AbelianInvariants,
    },
}

/// Compares the invariants computed from two presentations of the same
/// group. Agreement of different groups is possible and says nothing.
pub fn check_presentation_independence(
    p1: &Presentation,
    p2: &Presentation,
    c: usize,
    k: usize,
    settings: &Settings,
) -> Result<Independence> {
    let first = baer_invariant(p1, c, k, settings)?;
    let second = baer_invariant(p2, c, k, settings)?;
    Ok(if first == second {
        Independence::Agree(first)
    } else {
        Independence::Disagree { first, second }
    })
}
