//! Generating triples: generators together with norm relations and
//! strong-operator-topology relations.
//!
//! A norm relation `(x, eta)` asserts `||rho(x)|| <= eta` in every
//! representation; equality relations are stored with bound 0. A SOT relation
//! is a net of terms required to converge to zero strongly. Only the two
//! directed index schemes that actually occur are supported: the naturals,
//! and finite subsets of a countable label set ordered by inclusion. Infinite
//! generator families are materialized as a declared prefix; reports must
//! state the truncation.
//!
//! Certificates attached to nets are uniform norm bounds. They are always
//! re-verified numerically by the check engine, never trusted.

use crate::error::PresentationError;
use crate::models::ZeroOneMatrix;
use crate::term::{Generator, GeneratorKind, Letter, Term, Word};
use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

/// A pair (term, bound) meaning `||rho(term)|| <= bound`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormRelation {
    pub id: String,
    pub term: Term,
    pub bound: BigRational,
}

impl NormRelation {
    pub fn new(id: impl Into<String>, term: Term, bound: BigRational) -> Result<Self, PresentationError> {
        let id = id.into();
        if bound.is_negative() {
            return Err(PresentationError::NegativeBound(id));
        }
        Ok(NormRelation { id, term, bound })
    }

    /// An equality relation `term = 0`.
    pub fn equality(id: impl Into<String>, term: Term) -> Self {
        NormRelation { id: id.into(), term, bound: BigRational::from_integer(0.into()) }
    }
}

/// The two directed index schemes used by the built-in nets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndexScheme {
    Naturals,
    /// Finite subsets of a countable label set, ordered by inclusion. Only a
    /// finite prefix of the labels is materialized.
    FiniteSubsets { labels: Vec<String> },
}

/// A point of an index scheme. Subset members are 1-based label positions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NetIndex {
    Nat(u64),
    Subset(BTreeSet<usize>),
}

impl NetIndex {
    /// Strict ascent in the scheme order (< on naturals, proper inclusion on
    /// subsets).
    fn strictly_below(&self, other: &NetIndex) -> Option<bool> {
        match (self, other) {
            (NetIndex::Nat(a), NetIndex::Nat(b)) => Some(a < b),
            (NetIndex::Subset(a), NetIndex::Subset(b)) => {
                Some(a.is_subset(b) && a != b)
            }
            _ => None,
        }
    }
}

impl fmt::Display for NetIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetIndex::Nat(r) => write!(f, "{r}"),
            NetIndex::Subset(s) => {
                write!(f, "{{")?;
                for (k, i) in s.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{i}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

/// Why a certificate bound holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Justification {
    /// The net element is `1 - (sum of orthogonal range projections)`, itself
    /// a projection.
    ProjectionDefect,
    /// The net element is a difference of two projections.
    ProjectionDifference,
    User,
}

impl Justification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Justification::ProjectionDefect => "projection-defect",
            Justification::ProjectionDifference => "projection-difference",
            Justification::User => "user",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "projection-defect" => Some(Justification::ProjectionDefect),
            "projection-difference" => Some(Justification::ProjectionDifference),
            "user" => Some(Justification::User),
            _ => None,
        }
    }
}

/// A uniform norm bound claimed for every element of a net.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundCertificate {
    pub bound: BigRational,
    pub justification: Justification,
}

/// A net of terms indexed by one of the supported schemes. Every built-in net
/// has the shape `base - partial sums of a summand family`, which covers all
/// the infinite-sum relations we materialize.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SotNet {
    pub id: String,
    pub scheme: IndexScheme,
    pub base: Term,
    pub summands: Vec<Term>,
    pub certificate: Option<BoundCertificate>,
}

impl SotNet {
    /// The net element at `idx`: base minus the selected partial sum.
    pub fn element(&self, idx: &NetIndex) -> Result<Term, PresentationError> {
        match (&self.scheme, idx) {
            (IndexScheme::Naturals, NetIndex::Nat(r)) => {
                let r = *r as usize;
                if r > self.summands.len() {
                    return Err(PresentationError::IndexOutsideScheme {
                        index: idx.to_string(),
                        size: self.summands.len(),
                    });
                }
                let mut acc = self.base.clone();
                for s in &self.summands[..r] {
                    acc = acc.sub(s);
                }
                Ok(acc)
            }
            (IndexScheme::FiniteSubsets { labels }, NetIndex::Subset(set)) => {
                let mut acc = self.base.clone();
                for &i in set {
                    if i == 0 || i > labels.len() {
                        return Err(PresentationError::IndexOutsideScheme {
                            index: idx.to_string(),
                            size: labels.len(),
                        });
                    }
                    acc = acc.sub(&self.summands[i - 1]);
                }
                Ok(acc)
            }
            _ => Err(PresentationError::SchemeMismatch),
        }
    }

    /// The largest materialized index.
    pub fn full_index(&self) -> NetIndex {
        match &self.scheme {
            IndexScheme::Naturals => NetIndex::Nat(self.summands.len() as u64),
            IndexScheme::FiniteSubsets { labels } => {
                NetIndex::Subset((1..=labels.len()).collect())
            }
        }
    }
}

/// Evaluate a net along a finite ascending schedule of indices.
pub fn sample_net(net: &SotNet, schedule: &[NetIndex]) -> Result<Vec<Term>, PresentationError> {
    for (k, win) in schedule.windows(2).enumerate() {
        match win[0].strictly_below(&win[1]) {
            Some(true) => {}
            Some(false) => return Err(PresentationError::ScheduleNotAscending(k + 1)),
            None => return Err(PresentationError::SchemeMismatch),
        }
    }
    schedule.iter().map(|idx| net.element(idx)).collect()
}

/// Generators plus norm and SOT relations. Kind-implied relations are
/// materialized at construction: projections are self-adjoint idempotents,
/// partial isometries satisfy `ss*s = s`, isometries satisfy `s*s = 1`, and
/// the unit absorbs every generator on both sides.
#[derive(Debug, Clone)]
pub struct GeneratingTriple {
    generators: Vec<Generator>,
    norm_relations: Vec<NormRelation>,
    sot_nets: Vec<SotNet>,
    /// Set when the generator family is a materialized prefix of a declared
    /// countable family; the value is the truncation level.
    truncation: Option<usize>,
}

impl GeneratingTriple {
    pub fn new(
        generators: Vec<Generator>,
        extra_relations: Vec<NormRelation>,
        sot_nets: Vec<SotNet>,
    ) -> Result<Self, PresentationError> {
        Self::build(generators, extra_relations, sot_nets, None)
    }

    fn build(
        generators: Vec<Generator>,
        extra_relations: Vec<NormRelation>,
        sot_nets: Vec<SotNet>,
        truncation: Option<usize>,
    ) -> Result<Self, PresentationError> {
        let mut names = BTreeSet::new();
        for g in &generators {
            if !names.insert(g.name.clone()) {
                return Err(PresentationError::UndeclaredGenerator {
                    relation: "generator list".into(),
                    name: format!("duplicate `{}`", g.name),
                });
            }
        }
        let unit = generators.iter().find(|g| g.is_unit()).cloned();

        let mut norm_relations = Vec::new();
        let one = |g: &Generator| Term::from_word(Word::single(Letter::plain(g.clone())));
        let star = |g: &Generator| Term::from_word(Word::single(Letter::starred(g.clone())));
        for g in &generators {
            match g.kind {
                GeneratorKind::Projection => {
                    norm_relations.push(NormRelation::equality(
                        format!("proj:selfadjoint:{}", g.name),
                        star(g).sub(&one(g)),
                    ));
                    norm_relations.push(NormRelation::equality(
                        format!("proj:idempotent:{}", g.name),
                        one(g).mul(&one(g)).sub(&one(g)),
                    ));
                }
                GeneratorKind::PartialIsometry => {
                    norm_relations.push(NormRelation::equality(
                        format!("pi:{}", g.name),
                        one(g).mul(&star(g)).mul(&one(g)).sub(&one(g)),
                    ));
                }
                GeneratorKind::Isometry => {
                    let u = unit.as_ref().ok_or(PresentationError::NoUnit)?;
                    norm_relations.push(NormRelation::equality(
                        format!("isometry:{}", g.name),
                        star(g).mul(&one(g)).sub(&one(u)),
                    ));
                }
                GeneratorKind::Unit => {}
            }
        }
        if let Some(u) = &unit {
            norm_relations.push(NormRelation::equality("unit:selfadjoint", star(u).sub(&one(u))));
            for g in &generators {
                norm_relations.push(NormRelation::equality(
                    format!("unit:absorb-left:{}", g.name),
                    one(u).mul(&one(g)).sub(&one(g)),
                ));
                if !g.is_unit() {
                    norm_relations.push(NormRelation::equality(
                        format!("unit:absorb-right:{}", g.name),
                        one(g).mul(&one(u)).sub(&one(g)),
                    ));
                }
            }
        }
        norm_relations.extend(extra_relations);

        let triple = GeneratingTriple { generators, norm_relations, sot_nets, truncation };
        triple.validate_declared()?;
        Ok(triple)
    }

    fn validate_declared(&self) -> Result<(), PresentationError> {
        let names: BTreeSet<&str> =
            self.generators.iter().map(|g| g.name.as_str()).collect();
        let unital = self.generators.iter().any(|g| g.is_unit());
        let check_term = |id: &str, t: &Term| -> Result<(), PresentationError> {
            if t.uses_unit() && !unital {
                return Err(PresentationError::NoUnit);
            }
            for g in t.generators() {
                if !names.contains(g.name.as_str()) {
                    return Err(PresentationError::UndeclaredGenerator {
                        relation: id.to_string(),
                        name: g.name,
                    });
                }
            }
            Ok(())
        };
        for r in &self.norm_relations {
            check_term(&r.id, &r.term)?;
        }
        for net in &self.sot_nets {
            check_term(&net.id, &net.base)?;
            for s in &net.summands {
                check_term(&net.id, s)?;
            }
        }
        Ok(())
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn norm_relations(&self) -> &[NormRelation] {
        &self.norm_relations
    }

    pub fn sot_nets(&self) -> &[SotNet] {
        &self.sot_nets
    }

    pub fn is_unital(&self) -> bool {
        self.generators.iter().any(|g| g.is_unit())
    }

    /// Truncation level when this is a materialized prefix of a countable
    /// family.
    pub fn truncation(&self) -> Option<usize> {
        self.truncation
    }

    pub fn find_generator(&self, name: &str) -> Option<&Generator> {
        self.generators.iter().find(|g| g.name == name)
    }
}

fn range_projection(g: &Generator) -> Term {
    Term::from_word(Word::from_letters(vec![
        Letter::plain(g.clone()),
        Letter::starred(g.clone()),
    ]))
}

/// The Cuntz presentation on `n` isometries: `S_i*S_i = 1` and
/// `S_1S_1* + ... + S_nS_n* = 1`, with a distinguished unit.
pub fn cuntz_triple(n: usize) -> Result<GeneratingTriple, PresentationError> {
    if n < 2 {
        return Err(PresentationError::CuntzArity(n));
    }
    let mut generators: Vec<Generator> =
        (1..=n).map(|i| Generator::isometry(format!("S{i}"))).collect();
    generators.push(Generator::unit());
    let mut sum = Term::zero();
    for g in &generators[..n] {
        sum = sum.add(&range_projection(g));
    }
    let relation = NormRelation::equality("cuntz:sum", sum.sub(&Term::one()));
    GeneratingTriple::new(generators, vec![relation], vec![])
}

pub const DEFAULT_INFINITY_LETTERS: usize = 8;

/// The Cuntz presentation on countably many isometries. The infinite sum
/// `sum_i T_iT_i* = 1` becomes the net `(1 - sum_{i<=r} T_iT_i*)_r` over the
/// naturals, bounded by 1 since each element is a projection. The countable
/// family is materialized up to [`DEFAULT_INFINITY_LETTERS`].
pub fn cuntz_infinity_triple() -> GeneratingTriple {
    cuntz_infinity_triple_with_letters(DEFAULT_INFINITY_LETTERS)
        .expect("default truncation is valid")
}

/// Same presentation with an explicit materialization level.
pub fn cuntz_infinity_triple_with_letters(
    letters: usize,
) -> Result<GeneratingTriple, PresentationError> {
    if letters < 1 {
        return Err(PresentationError::CuntzArity(letters));
    }
    let mut generators: Vec<Generator> =
        (1..=letters).map(|i| Generator::isometry(format!("T{i}"))).collect();
    generators.push(Generator::unit());
    let summands: Vec<Term> = generators[..letters].iter().map(range_projection).collect();
    let net = SotNet {
        id: "ck1".into(),
        scheme: IndexScheme::Naturals,
        base: Term::one(),
        summands,
        certificate: Some(BoundCertificate {
            bound: BigRational::from_integer(1.into()),
            justification: Justification::ProjectionDefect,
        }),
    };
    GeneratingTriple::build(generators, vec![], vec![net], Some(letters))
}

/// The Exel-Laca presentation of a 0-1 matrix with no identically zero rows.
///
/// Unital: partial isometries plus a unit, CK1 `sum_i T_iT_i* = 1` as a net
/// over finite subsets (bounded by 1), and one CK2 net per row
/// `T_i*T_i = sum_j A_ij T_jT_j*` (bounded by 2). Non-unital: CK1 is replaced
/// by the norm relations `T_i*T_j = 0` for i != j.
pub fn exel_laca_triple(
    a: &ZeroOneMatrix,
    unital: bool,
) -> Result<GeneratingTriple, PresentationError> {
    let k = a.size();
    for i in 1..=k {
        if !a.is_truncated() && (1..=k).all(|j| a.entry(i, j) == 0) {
            return Err(PresentationError::ZeroRow { row: i });
        }
    }
    let mut generators: Vec<Generator> = (1..=k).map(|i| a.generator(i)).collect();
    if unital {
        generators.push(Generator::unit());
    }
    let labels: Vec<String> = (1..=k).map(|i| i.to_string()).collect();
    let range_projs: Vec<Term> = (0..k).map(|i| range_projection(&generators[i])).collect();

    let mut relations = Vec::new();
    let mut nets = Vec::new();
    if unital {
        nets.push(SotNet {
            id: "ck1".into(),
            scheme: IndexScheme::FiniteSubsets { labels: labels.clone() },
            base: Term::one(),
            summands: range_projs.clone(),
            certificate: Some(BoundCertificate {
                bound: BigRational::from_integer(1.into()),
                justification: Justification::ProjectionDefect,
            }),
        });
    } else {
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    let t = Term::from_word(Word::from_letters(vec![
                        Letter::starred(generators[i].clone()),
                        Letter::plain(generators[j].clone()),
                    ]));
                    relations.push(NormRelation::equality(
                        format!("el:orth:{}:{}", generators[i].name, generators[j].name),
                        t,
                    ));
                }
            }
        }
    }
    for i in 0..k {
        let base = Term::from_word(Word::from_letters(vec![
            Letter::starred(generators[i].clone()),
            Letter::plain(generators[i].clone()),
        ]));
        let summands: Vec<Term> = (0..k)
            .map(|j| {
                if a.entry(i + 1, j + 1) == 1 {
                    range_projs[j].clone()
                } else {
                    Term::zero()
                }
            })
            .collect();
        nets.push(SotNet {
            id: format!("ck2:{}", generators[i].name),
            scheme: IndexScheme::FiniteSubsets { labels: labels.clone() },
            base,
            summands,
            certificate: Some(BoundCertificate {
                bound: BigRational::from_integer(2.into()),
                justification: Justification::ProjectionDifference,
            }),
        });
    }
    let truncation = a.is_truncated().then_some(k);
    GeneratingTriple::build(generators, relations, nets, truncation)
}
