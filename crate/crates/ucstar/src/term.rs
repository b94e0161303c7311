//! The free *-algebra over a generator set.
//!
//! A `Term` is a finite linear combination of words over generators and their
//! formal adjoints, with exact [`Coefficient`] scalars. Terms are immutable
//! values; all operations are pure. Words are ordered by (length, letter
//! sequence) so term storage and serialization are deterministic.

use crate::coeff::Coefficient;
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

/// What kind of operator a generator stands for. The kind determines which
/// built-in relations a presentation materializes for it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GeneratorKind {
    Projection,
    PartialIsometry,
    Isometry,
    Unit,
}

impl GeneratorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            GeneratorKind::Projection => "projection",
            GeneratorKind::PartialIsometry => "partial-isometry",
            GeneratorKind::Isometry => "isometry",
            GeneratorKind::Unit => "unit",
        }
    }

    pub fn parse(s: &str) -> Option<GeneratorKind> {
        match s {
            "projection" => Some(GeneratorKind::Projection),
            "partial-isometry" | "partial_isometry" => Some(GeneratorKind::PartialIsometry),
            "isometry" => Some(GeneratorKind::Isometry),
            "unit" => Some(GeneratorKind::Unit),
            _ => None,
        }
    }
}

/// A named generator. Names are unique within a presentation, so generator
/// identity (equality, ordering, hashing) is the name alone; the kind is an
/// attribute that selects the materialized relations and the degree count.
#[derive(Debug, Clone)]
pub struct Generator {
    pub name: String,
    pub kind: GeneratorKind,
}

impl PartialEq for Generator {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

impl Eq for Generator {}

impl PartialOrd for Generator {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Generator {
    fn cmp(&self, other: &Self) -> Ordering {
        self.name.cmp(&other.name)
    }
}

impl std::hash::Hash for Generator {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.name.hash(state);
    }
}

/// The reserved name of the distinguished unit generator.
pub const UNIT_NAME: &str = "1";

impl Generator {
    pub fn new(name: impl Into<String>, kind: GeneratorKind) -> Self {
        Generator { name: name.into(), kind }
    }

    pub fn projection(name: impl Into<String>) -> Self {
        Generator::new(name, GeneratorKind::Projection)
    }

    pub fn partial_isometry(name: impl Into<String>) -> Self {
        Generator::new(name, GeneratorKind::PartialIsometry)
    }

    pub fn isometry(name: impl Into<String>) -> Self {
        Generator::new(name, GeneratorKind::Isometry)
    }

    /// The distinguished unit generator, named `1`.
    pub fn unit() -> Self {
        Generator::new(UNIT_NAME, GeneratorKind::Unit)
    }

    pub fn is_unit(&self) -> bool {
        self.kind == GeneratorKind::Unit
    }
}

/// One letter of a word: a generator or its star.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub gen: Generator,
    pub starred: bool,
}

impl Letter {
    pub fn plain(gen: Generator) -> Self {
        Letter { gen, starred: false }
    }

    pub fn starred(gen: Generator) -> Self {
        Letter { gen, starred: true }
    }

    pub fn adjoint(&self) -> Self {
        Letter { gen: self.gen.clone(), starred: !self.starred }
    }
}

/// A finite product of letters. The empty word denotes the unit and may only
/// appear in presentations that declare a unit generator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn single(letter: Letter) -> Self {
        Word(vec![letter])
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.0.clone();
        letters.extend(other.0.iter().cloned());
        Word(letters)
    }

    /// Reverse the word and toggle every star flag.
    pub fn adjoint(&self) -> Word {
        Word(self.0.iter().rev().map(Letter::adjoint).collect())
    }

    /// Number of starred letters.
    pub fn star_count(&self) -> usize {
        self.0.iter().filter(|l| l.starred).count()
    }
}

// Words are compared by length first, then letter by letter.
impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        for l in &self.0 {
            if !first {
                write!(f, ".")?;
            }
            first = false;
            write!(f, "{}", l.gen.name)?;
            if l.starred {
                write!(f, "'")?;
            }
        }
        Ok(())
    }
}

/// An element of the free *-algebra: a map from words to nonzero coefficients.
///
/// The map never stores a zero coefficient; the zero term has empty support.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Term {
    words: BTreeMap<Word, Coefficient>,
}

impl Term {
    pub fn zero() -> Self {
        Term { words: BTreeMap::new() }
    }

    /// The term `1·w`.
    pub fn from_word(w: Word) -> Self {
        Term::monomial(Coefficient::one(), w)
    }

    /// A single generator as a term.
    pub fn from_generator(g: Generator) -> Self {
        Term::from_word(Word::single(Letter::plain(g)))
    }

    /// The unit generator as a term.
    pub fn one() -> Self {
        Term::from_generator(Generator::unit())
    }

    pub fn monomial(c: Coefficient, w: Word) -> Self {
        let mut words = BTreeMap::new();
        if !c.is_zero() {
            words.insert(w, c);
        }
        Term { words }
    }

    pub fn is_zero(&self) -> bool {
        self.words.is_empty()
    }

    pub fn support_len(&self) -> usize {
        self.words.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, &Coefficient)> {
        self.words.iter()
    }

    pub fn coefficient(&self, w: &Word) -> Coefficient {
        self.words.get(w).cloned().unwrap_or_else(Coefficient::zero)
    }

    /// Add `c·w` in place, dropping the entry if it cancels.
    pub fn accumulate(&mut self, w: Word, c: &Coefficient) {
        if c.is_zero() {
            return;
        }
        match self.words.entry(w) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = &*e.get() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Term) -> Term {
        let mut out = self.clone();
        for (w, c) in other.iter() {
            out.accumulate(w.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &Term) -> Term {
        self.add(&other.scale(&Coefficient::from_integer(-1)))
    }

    pub fn scale(&self, c: &Coefficient) -> Term {
        if c.is_zero() {
            return Term::zero();
        }
        let mut out = Term::zero();
        for (w, k) in self.iter() {
            out.accumulate(w.clone(), &(k * c));
        }
        out
    }

    /// Bilinear extension of word concatenation.
    pub fn mul(&self, other: &Term) -> Term {
        let mut out = Term::zero();
        for (wa, ca) in self.iter() {
            for (wb, cb) in other.iter() {
                out.accumulate(wa.concat(wb), &(ca * cb));
            }
        }
        out
    }

    /// The standard involution: reverse words, toggle stars, conjugate scalars.
    pub fn adjoint(&self) -> Term {
        let mut out = Term::zero();
        for (w, c) in self.iter() {
            out.accumulate(w.adjoint(), &c.conj());
        }
        out
    }

    /// All generators appearing in the support.
    pub fn generators(&self) -> Vec<Generator> {
        let mut set = std::collections::BTreeSet::new();
        for (w, _) in self.iter() {
            for l in w.letters() {
                set.insert(l.gen.clone());
            }
        }
        set.into_iter().collect()
    }

    /// True if any word is empty or uses a unit-kind letter.
    pub fn uses_unit(&self) -> bool {
        self.iter().any(|(w, _)| {
            w.is_empty() || w.letters().iter().any(|l| l.gen.is_unit())
        })
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (w, c) in self.iter() {
            let (neg, mag) = if c.is_negative() {
                (true, -c)
            } else {
                (false, c.clone())
            };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            if w.is_empty() {
                // bare scalar: the empty word prints as the unit symbol
                if mag.is_one() {
                    write!(f, "1")?;
                } else {
                    write!(f, "{}*1", mag)?;
                }
            } else if mag.is_one() {
                write!(f, "{}", w)?;
            } else {
                write!(f, "{}*{}", mag, w)?;
            }
        }
        Ok(())
    }
}
