//! Words, presentations and the input file format.
//!
//! Commutators follow `[x,y] = x⁻¹y⁻¹xy` everywhere in the crate; longer
//! brackets are left-normed, `[x,y,z] = [[x,y],z]`.

use std::collections::HashMap;
use std::fmt;

use crate::{Error, Result};

mod parse;

pub use parse::{parse_input_file, parse_word};

/// Which factor of a free product a generator came from.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Slot {
    Plain,
    APart,
    BPart,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Generator {
    pub name: String,
    pub slot: Slot,
}

/// Ordered list of named generators. Names are unique and case-sensitive.
#[derive(Clone, Debug, Default)]
pub struct Alphabet {
    gens: Vec<Generator>,
    index: HashMap<String, usize>,
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.gens == other.gens
    }
}

impl Eq for Alphabet {}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Alphabet {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let mut a = Alphabet::default();
        for n in names {
            a.push(n.as_ref(), Slot::Plain)?;
        }
        Ok(a)
    }

    pub fn push(&mut self, name: &str, slot: Slot) -> Result<usize> {
        if !is_identifier(name) {
            return Err(Error::Syntax(format!("invalid generator name `{name}`")));
        }
        if self.index.contains_key(name) {
            return Err(Error::DuplicateGenerator(name.to_string()));
        }
        let i = self.gens.len();
        self.gens.push(Generator {
            name: name.to_string(),
            slot,
        });
        self.index.insert(name.to_string(), i);
        Ok(i)
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn generator(&self, i: usize) -> &Generator {
        &self.gens[i]
    }

    pub fn generators(&self) -> &[Generator] {
        &self.gens
    }

    pub fn name(&self, i: usize) -> &str {
        &self.gens[i].name
    }
}

/// One generator or its inverse.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Letter {
    pub gen: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn inv(self) -> Letter {
        Letter {
            gen: self.gen,
            inverse: !self.inverse,
        }
    }
}

/// Freely reduced word over generator indices. The empty word is the identity.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity() -> Self {
        Word::default()
    }

    pub fn generator(gen: usize) -> Self {
        Word {
            letters: vec![Letter {
                gen,
                inverse: false,
            }],
        }
    }

    /// Reduces an arbitrary letter sequence.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            match out.last() {
                Some(&last) if last == l.inv() => {
                    out.pop();
                }
                _ => out.push(l),
            }
        }
        Word { letters: out }
    }

    /// Word from signed generator numbers: `+i` is generator `i-1`, `-i` its
    /// inverse.
    pub fn from_signed(seq: &[i32]) -> Self {
        Word::from_letters(seq.iter().map(|&s| {
            assert!(s != 0, "zero is not a letter");
            Letter {
                gen: s.unsigned_abs() as usize - 1,
                inverse: s < 0,
            }
        }))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| l.inv()).collect(),
        }
    }

    pub fn pow(&self, e: i64) -> Word {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..e.unsigned_abs() {
            out = &out * &base;
        }
        out
    }

    /// `[u,v] = u⁻¹v⁻¹uv`.
    pub fn commutator(u: &Word, v: &Word) -> Word {
        Word::from_letters(
            u.inverse()
                .letters
                .into_iter()
                .chain(v.inverse().letters)
                .chain(u.letters.iter().copied())
                .chain(v.letters.iter().copied()),
        )
    }

    /// Left-normed `[w, g1, g2, ...]`.
    pub fn left_normed(first: &Word, rest: &[Word]) -> Word {
        rest.iter()
            .fold(first.clone(), |acc, g| Word::commutator(&acc, g))
    }

    /// Largest generator index used, if any.
    pub fn max_generator(&self) -> Option<usize> {
        self.letters.iter().map(|l| l.gen).max()
    }

    /// Replaces generator `i` by `images[i]` (a homomorphism of free groups).
    pub fn substitute(&self, images: &[Word]) -> Word {
        let mut parts = Vec::new();
        for l in &self.letters {
            let img = &images[l.gen];
            if l.inverse {
                parts.extend(img.inverse().letters);
            } else {
                parts.extend(img.letters.iter().copied());
            }
        }
        Word::from_letters(parts)
    }

    /// Renumbers generators through `map`.
    pub fn relabel(&self, map: &[usize]) -> Word {
        Word {
            letters: self
                .letters
                .iter()
                .map(|l| Letter {
                    gen: map[l.gen],
                    inverse: l.inverse,
                })
                .collect(),
        }
    }

    /// Fails unless every letter lies in an alphabet of `size` generators.
    pub fn check_alphabet(&self, size: usize) -> Result<()> {
        match self.max_generator() {
            Some(g) if g >= size => Err(Error::AlphabetMismatch { index: g, size }),
            _ => Ok(()),
        }
    }

    /// Renders with generator names, grouping runs into powers.
    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> WordDisplay<'a> {
        WordDisplay {
            word: self,
            alphabet,
        }
    }
}

impl std::ops::Mul for &Word {
    type Output = Word;
    fn mul(self, rhs: &Word) -> Word {
        Word::from_letters(self.letters.iter().chain(&rhs.letters).copied())
    }
}

pub struct WordDisplay<'a> {
    word: &'a Word,
    alphabet: &'a Alphabet,
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letters = self.word.letters();
        if letters.is_empty() {
            return write!(f, "1");
        }
        let mut i = 0;
        let mut first = true;
        while i < letters.len() {
            let mut j = i;
            while j < letters.len() && letters[j] == letters[i] {
                j += 1;
            }
            let run = (j - i) as i64;
            let e = if letters[i].inverse { -run } else { run };
            if !first {
                write!(f, " ")?;
            }
            first = false;
            let name = self.alphabet.name(letters[i].gen);
            if e == 1 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{name}^{e}")?;
            }
            i = j;
        }
        Ok(())
    }
}

/// Finite presentation `⟨generators | relators⟩`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Presentation {
    pub name: String,
    pub alphabet: Alphabet,
    pub relators: Vec<Word>,
}

impl Presentation {
    pub fn new(name: &str, alphabet: Alphabet, relators: Vec<Word>) -> Result<Self> {
        for r in &relators {
            r.check_alphabet(alphabet.len())?;
        }
        Ok(Presentation {
            name: name.to_string(),
            alphabet,
            relators,
        })
    }

    /// Builds a presentation from generator names and relator strings in the
    /// word grammar.
    pub fn parse(name: &str, gens: &[&str], relators: &[&str]) -> Result<Self> {
        let alphabet = Alphabet::new(gens)?;
        let rels = relators
            .iter()
            .map(|r| parse_word(r, &alphabet))
            .collect::<Result<Vec<_>>>()?;
        Presentation::new(name, alphabet, rels)
    }

    pub fn generator_count(&self) -> usize {
        self.alphabet.len()
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<&str> = self
            .alphabet
            .generators()
            .iter()
            .map(|g| g.name.as_str())
            .collect();
        let rels: Vec<String> = self
            .relators
            .iter()
            .map(|r| r.display(&self.alphabet).to_string())
            .collect();
        write!(
            f,
            "{} = < {} | {} >",
            self.name,
            gens.join(", "),
            rels.join(", ")
        )
    }
}

/// Disjoint union of two alphabets, A's generators first. Tags each
/// generator with the factor it came from.
#[derive(Clone, Debug)]
pub struct FreeProduct {
    pub alphabet: Alphabet,
    pub a_len: usize,
    pub b_len: usize,
}

impl FreeProduct {
    pub fn new(a: &Alphabet, b: &Alphabet) -> Result<Self> {
        let mut alphabet = Alphabet::default();
        for g in a.generators() {
            alphabet.push(&g.name, Slot::APart)?;
        }
        for g in b.generators() {
            alphabet.push(&g.name, Slot::BPart)?;
        }
        Ok(FreeProduct {
            alphabet,
            a_len: a.len(),
            b_len: b.len(),
        })
    }

    /// Index map from the factor alphabet into the combined one.
    pub fn slot_map(&self, slot: Slot) -> Result<Vec<usize>> {
        match slot {
            Slot::APart => Ok((0..self.a_len).collect()),
            Slot::BPart => Ok((self.a_len..self.a_len + self.b_len).collect()),
            Slot::Plain => Err(Error::Syntax(
                "free product embedding needs slot A-part or B-part".into(),
            )),
        }
    }

    /// Embeds a word over one factor into the combined alphabet.
    pub fn embed(&self, w: &Word, slot: Slot) -> Result<Word> {
        let map = self.slot_map(slot)?;
        w.check_alphabet(map.len())?;
        Ok(w.relabel(&map))
    }
}

/// Action of B on A by automorphisms, given on generators: `images[b][a]` is
/// the word over A that `a` is sent to by `b`.
#[derive(Clone, Debug)]
pub struct ActionSpec {
    pub acting: Presentation,
    pub acted: Presentation,
    pub images: Vec<Vec<Word>>,
    pub inverse_images: Option<Vec<Vec<Word>>>,
}

impl ActionSpec {
    pub fn new(
        acting: Presentation,
        acted: Presentation,
        images: Vec<Vec<Word>>,
        inverse_images: Option<Vec<Vec<Word>>>,
    ) -> Result<Self> {
        let check = |table: &Vec<Vec<Word>>| -> Result<()> {
            if table.len() != acting.generator_count()
                || table.iter().any(|row| row.len() != acted.generator_count())
            {
                return Err(Error::Syntax("action table incomplete".into()));
            }
            for w in table.iter().flatten() {
                w.check_alphabet(acted.generator_count())?;
            }
            Ok(())
        };
        check(&images)?;
        if let Some(inv) = &inverse_images {
            check(inv)?;
        }
        Ok(ActionSpec {
            acting,
            acted,
            images,
            inverse_images,
        })
    }

    /// The trivial action.
    pub fn trivial(acting: Presentation, acted: Presentation) -> Self {
        let ids: Vec<Word> = (0..acted.generator_count()).map(Word::generator).collect();
        let images = vec![ids; acting.generator_count()];
        ActionSpec {
            inverse_images: Some(images.clone()),
            acting,
            acted,
            images,
        }
    }
}

/// Parsed contents of an input file.
#[derive(Clone, Debug)]
pub struct InputFile {
    pub groups: Vec<Presentation>,
    pub action: Option<ActionSpec>,
}
