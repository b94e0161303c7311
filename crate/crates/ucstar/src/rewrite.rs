//! Relation-driven normalization of terms.
//!
//! Relations are oriented into rewrite rules on contiguous subwords. The
//! orientation must strictly decrease the termination measure
//! (star count, star-before-nonstar inversions, length, lexicographic rank),
//! which is validated when a rule set is built; a step budget is kept as a
//! safety net. Normalization is leftmost with the rule list as priority
//! order, so identical inputs always give identical outputs.
//!
//! A `false` answer from [`check_identity`] means "not derivable by these
//! rules under this orientation", never "not equal in the algebra".

use crate::coeff::Coefficient;
use crate::error::RewriteError;
use crate::models::ZeroOneMatrix;
use crate::term::{Generator, GeneratorKind, Letter, Term, Word};
use std::collections::BTreeMap;
use std::fmt;

/// Default step budget for a single normalization.
pub const NORMALIZE_BUDGET: usize = 1_000_000;

/// A single oriented rule: a contiguous subword pattern and its replacement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub pattern: Word,
    pub replacement: Term,
}

impl Rule {
    pub fn new(pattern: Word, replacement: Term) -> Self {
        Rule { pattern, replacement }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.pattern, self.replacement)
    }
}

/// An ordered list of rules. `degree_homogeneous` is computed at construction:
/// every rule preserves the gauge degree of the words it rewrites.
#[derive(Debug, Clone)]
pub struct RuleSet {
    rules: Vec<Rule>,
    degree_homogeneous: bool,
}

impl RuleSet {
    pub fn new(rules: Vec<Rule>) -> Result<Self, RewriteError> {
        for rule in &rules {
            if rule.pattern.is_empty() {
                return Err(RewriteError::EmptyPattern);
            }
            for (w, _) in rule.replacement.iter() {
                if !measure_decreases(&rule.pattern, w) {
                    return Err(RewriteError::NonTerminating {
                        pattern: rule.pattern.to_string(),
                        replacement: w.to_string(),
                    });
                }
            }
        }
        let degree_homogeneous = rules.iter().all(|r| {
            let d = degree(&r.pattern);
            r.replacement.iter().all(|(w, _)| degree(w) == d)
        });
        Ok(RuleSet { rules, degree_homogeneous })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn is_degree_homogeneous(&self) -> bool {
        self.degree_homogeneous
    }

    /// Concatenation, keeping `self`'s rules at higher priority.
    pub fn chain(mut self, other: RuleSet) -> Self {
        self.rules.extend(other.rules);
        self.degree_homogeneous = self.degree_homogeneous && other.degree_homogeneous;
        self
    }
}

fn star_counts(w: &Word) -> (usize, usize) {
    let stars = w.letters().iter().filter(|l| l.starred).count();
    (stars, w.len() - stars)
}

/// Pairs (k, l) with k < l, position k starred and position l unstarred.
fn inversions(w: &Word) -> usize {
    let mut stars_seen = 0usize;
    let mut inv = 0usize;
    for l in w.letters() {
        if l.starred {
            stars_seen += 1;
        } else {
            inv += stars_seen;
        }
    }
    inv
}

/// Sufficient condition for the global measure to decrease when `pattern` is
/// replaced by `repl` inside any context.
fn measure_decreases(pattern: &Word, repl: &Word) -> bool {
    let (sp, up) = star_counts(pattern);
    let (sr, ur) = star_counts(repl);
    if sr < sp {
        return true;
    }
    if sr > sp || ur > up {
        return false;
    }
    let (ip, ir) = (inversions(pattern), inversions(repl));
    if ir < ip {
        return true;
    }
    if ir > ip {
        return false;
    }
    if repl.len() < pattern.len() {
        return true;
    }
    repl.len() == pattern.len() && repl.letters() < pattern.letters()
}

/// Gauge degree of a word: unstarred (partial-)isometry letters minus starred
/// ones; projection and unit letters count 0.
pub fn degree(w: &Word) -> i64 {
    w.letters()
        .iter()
        .map(|l| match l.gen.kind {
            GeneratorKind::PartialIsometry | GeneratorKind::Isometry => {
                if l.starred {
                    -1
                } else {
                    1
                }
            }
            GeneratorKind::Projection | GeneratorKind::Unit => 0,
        })
        .sum()
}

/// True iff every word in the support has degree 0.
pub fn is_fixed(t: &Term) -> bool {
    t.iter().all(|(w, _)| degree(w) == 0)
}

/// The degree-0 part of a term: the symbolic conditional expectation onto the
/// gauge-fixed subalgebra, extended linearly.
pub fn expectation(t: &Term) -> Term {
    let mut out = Term::zero();
    for (w, c) in t.iter() {
        if degree(w) == 0 {
            out.accumulate(w.clone(), c);
        }
    }
    out
}

/// Normalize a term to the fixed point of leftmost rule application, rules
/// tried in list order at each position.
pub fn normalize(t: &Term, rs: &RuleSet) -> Result<Term, RewriteError> {
    normalize_budgeted(t, rs, NORMALIZE_BUDGET)
}

pub fn normalize_budgeted(t: &Term, rs: &RuleSet, budget: usize) -> Result<Term, RewriteError> {
    let mut remaining = budget;
    let mut memo: BTreeMap<Word, Term> = BTreeMap::new();
    let mut out = Term::zero();
    for (w, c) in t.iter() {
        let nf = normalize_word(w, rs, &mut memo, &mut remaining, budget)?;
        out = out.add(&nf.scale(c));
    }
    Ok(out)
}

fn normalize_word(
    w: &Word,
    rs: &RuleSet,
    memo: &mut BTreeMap<Word, Term>,
    remaining: &mut usize,
    budget: usize,
) -> Result<Term, RewriteError> {
    if let Some(nf) = memo.get(w) {
        return Ok(nf.clone());
    }
    let letters = w.letters();
    for pos in 0..letters.len() {
        for rule in rs.rules() {
            let plen = rule.pattern.len();
            if pos + plen > letters.len() {
                continue;
            }
            if &letters[pos..pos + plen] != rule.pattern.letters() {
                continue;
            }
            if *remaining == 0 {
                return Err(RewriteError::BudgetExceeded {
                    budget,
                    term: w.to_string(),
                });
            }
            *remaining -= 1;
            let mut result = Term::zero();
            for (rw, rc) in rule.replacement.iter() {
                let mut spliced = letters[..pos].to_vec();
                spliced.extend(rw.letters().iter().cloned());
                spliced.extend(letters[pos + plen..].iter().cloned());
                let nf = normalize_word(&Word::from_letters(spliced), rs, memo, remaining, budget)?;
                result = result.add(&nf.scale(rc));
            }
            memo.insert(w.clone(), result.clone());
            return Ok(result);
        }
    }
    let nf = Term::from_word(w.clone());
    memo.insert(w.clone(), nf.clone());
    Ok(nf)
}

/// True iff `lhs - rhs` rewrites to 0 under the given rules.
pub fn check_identity(lhs: &Term, rhs: &Term, rs: &RuleSet) -> Result<bool, RewriteError> {
    Ok(normalize(&lhs.sub(rhs), rs)?.is_zero())
}

fn plain(g: &Generator) -> Letter {
    Letter::plain(g.clone())
}

fn star(g: &Generator) -> Letter {
    Letter::starred(g.clone())
}

/// `ss*s -> s` and `s*ss* -> s*` for every (partial) isometry in the list.
pub fn partial_isometry_rules(gens: &[Generator]) -> Result<RuleSet, RewriteError> {
    let mut rules = Vec::new();
    for g in gens {
        if matches!(g.kind, GeneratorKind::PartialIsometry | GeneratorKind::Isometry) {
            rules.push(Rule::new(
                Word::from_letters(vec![plain(g), star(g), plain(g)]),
                Term::from_word(Word::single(plain(g))),
            ));
            rules.push(Rule::new(
                Word::from_letters(vec![star(g), plain(g), star(g)]),
                Term::from_word(Word::single(star(g))),
            ));
        }
    }
    RuleSet::new(rules)
}

/// `q* -> q` and `qq -> q` for every projection in the list.
pub fn projection_rules(gens: &[Generator]) -> Result<RuleSet, RewriteError> {
    let mut rules = Vec::new();
    for g in gens {
        if g.kind == GeneratorKind::Projection {
            rules.push(Rule::new(
                Word::single(star(g)),
                Term::from_word(Word::single(plain(g))),
            ));
            rules.push(Rule::new(
                Word::from_letters(vec![plain(g), plain(g)]),
                Term::from_word(Word::single(plain(g))),
            ));
        }
    }
    RuleSet::new(rules)
}

/// Projection rules plus sorting rules `q_j q_i -> q_i q_j` for j after i in
/// the declared order, for a mutually commuting family.
pub fn commuting_projection_rules(gens: &[Generator]) -> Result<RuleSet, RewriteError> {
    let mut rs = projection_rules(gens)?;
    let projections: Vec<&Generator> =
        gens.iter().filter(|g| g.kind == GeneratorKind::Projection).collect();
    let mut rules = Vec::new();
    for (i, gi) in projections.iter().enumerate() {
        for gj in projections.iter().skip(i + 1) {
            rules.push(Rule::new(
                Word::from_letters(vec![plain(gj), plain(gi)]),
                Term::from_word(Word::from_letters(vec![plain(gi), plain(gj)])),
            ));
        }
    }
    rs = rs.chain(RuleSet::new(rules)?);
    Ok(rs)
}

/// Erase unit letters: `1 -> (empty)` and `1* -> (empty)`.
pub fn unit_rules() -> Result<RuleSet, RewriteError> {
    let u = Generator::unit();
    RuleSet::new(vec![
        Rule::new(Word::single(star(&u)), Term::from_word(Word::empty())),
        Rule::new(Word::single(plain(&u)), Term::from_word(Word::empty())),
    ])
}

/// Rewrite rules for a row-finite Exel-Laca matrix:
/// partial-isometry rules, unit erasure, the orthogonality of final
/// projections `T_iT_i*T_jT_j* -> 0` for i != j, and the Cuntz-Krieger rows
/// `T_i*T_i -> sum over j with A_ij = 1 of T_jT_j*`.
pub fn el_rules_rowfinite(a: &ZeroOneMatrix) -> Result<RuleSet, RewriteError> {
    if a.is_truncated() {
        return Err(RewriteError::TruncatedMatrix);
    }
    let k = a.size();
    let gens: Vec<Generator> = (1..=k).map(|i| a.generator(i)).collect();
    let mut rs = partial_isometry_rules(&gens)?.chain(unit_rules()?);
    let mut rules = Vec::new();
    for (i, gi) in gens.iter().enumerate() {
        for (j, gj) in gens.iter().enumerate() {
            if i != j {
                rules.push(Rule::new(
                    Word::from_letters(vec![plain(gi), star(gi), plain(gj), star(gj)]),
                    Term::zero(),
                ));
            }
        }
    }
    for (i, gi) in gens.iter().enumerate() {
        let mut sum = Term::zero();
        for (j, gj) in gens.iter().enumerate() {
            if a.entry(i + 1, j + 1) == 1 {
                sum.accumulate(
                    Word::from_letters(vec![plain(gj), star(gj)]),
                    &Coefficient::one(),
                );
            }
        }
        rules.push(Rule::new(
            Word::from_letters(vec![star(gi), plain(gi)]),
            sum,
        ));
    }
    rs = rs.chain(RuleSet::new(rules)?);
    Ok(rs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term_default;

    fn pi_rules_for(names: &[&str]) -> RuleSet {
        let gens: Vec<Generator> =
            names.iter().map(|n| Generator::partial_isometry(*n)).collect();
        partial_isometry_rules(&gens).unwrap()
    }

    #[test]
    fn partial_isometry_collapses() {
        let rs = pi_rules_for(&["s"]);
        let t = parse_term_default("s.s'.s").unwrap();
        let nf = normalize(&t, &rs).unwrap();
        assert_eq!(nf, parse_term_default("s").unwrap());
    }

    #[test]
    fn projection_idempotent() {
        let q = Generator::projection("p");
        let rs = projection_rules(&[q.clone()]).unwrap();
        let p = Term::from_generator(q);
        let nf = normalize(&p.mul(&p), &rs).unwrap();
        assert_eq!(nf, p);
    }

    #[test]
    fn el_orthogonality_collapses_to_zero() {
        let a = ZeroOneMatrix::new(vec![vec![1, 1], vec![1, 0]]).unwrap();
        let rs = el_rules_rowfinite(&a).unwrap();
        let t = parse_term_default("T1.T1'.T2.T2'").unwrap();
        assert!(normalize(&t, &rs).unwrap().is_zero());
    }

    #[test]
    fn ck2_rule_reads_matrix_rows() {
        let a = ZeroOneMatrix::new(vec![vec![1, 1], vec![1, 0]]).unwrap();
        let rs = el_rules_rowfinite(&a).unwrap();
        let lhs = parse_term_default("T1'.T1").unwrap();
        let expect = parse_term_default("T1.T1' + T2.T2'").unwrap();
        assert_eq!(normalize(&lhs, &rs).unwrap(), expect);
        let lhs2 = parse_term_default("T2'.T2").unwrap();
        assert_eq!(normalize(&lhs2, &rs).unwrap(), parse_term_default("T1.T1'").unwrap());
    }

    #[test]
    fn el1_identity_derivable() {
        let a = ZeroOneMatrix::new(vec![vec![1, 1], vec![1, 0]]).unwrap();
        let rs = el_rules_rowfinite(&a).unwrap();
        let lhs = parse_term_default("T1'.T1.T2'.T2").unwrap();
        let rhs = parse_term_default("T2'.T2.T1'.T1").unwrap();
        assert!(check_identity(&lhs, &rhs, &rs).unwrap());
    }

    #[test]
    fn el3_identity_derivable() {
        let a = ZeroOneMatrix::new(vec![vec![1, 1], vec![1, 0]]).unwrap();
        let rs = el_rules_rowfinite(&a).unwrap();
        // A_12 = 1
        let lhs = parse_term_default("T1'.T1.T2.T2'").unwrap();
        let rhs = parse_term_default("T2.T2'").unwrap();
        assert!(check_identity(&lhs, &rhs, &rs).unwrap());
        // A_22 = 0
        let lhs = parse_term_default("T2'.T2.T2.T2'").unwrap();
        assert!(check_identity(&lhs, &Term::zero(), &rs).unwrap());
    }

    #[test]
    fn distinct_normal_forms_not_identified() {
        let rs = pi_rules_for(&["s"]);
        let s = parse_term_default("s").unwrap();
        let sstar = parse_term_default("s'").unwrap();
        assert!(!check_identity(&s, &sstar, &rs).unwrap());
    }

    #[test]
    fn degree_counts_isometry_letters_only() {
        let t = TermParserFixture::parse("s.s.p.t'");
        let (w, _) = t.iter().next().unwrap();
        assert_eq!(degree(w), 1);
        let single = parse_term_default("s").unwrap();
        assert_eq!(degree(single.iter().next().unwrap().0), 1);
        let balanced = parse_term_default("s.t'").unwrap();
        assert_eq!(degree(balanced.iter().next().unwrap().0), 0);
    }

    #[test]
    fn expectation_filters_degree_zero() {
        let t = parse_term_default("2*s + 3*s.s'").unwrap();
        let e = expectation(&t);
        assert_eq!(e, parse_term_default("3*s.s'").unwrap());
        assert!(is_fixed(&parse_term_default("s.s'").unwrap()));
        assert!(!is_fixed(&parse_term_default("s").unwrap()));
        assert!(is_fixed(&Term::zero()));
    }

    #[test]
    fn builtin_rulesets_are_degree_homogeneous() {
        let a = ZeroOneMatrix::new(vec![vec![0, 1], vec![1, 1]]).unwrap();
        assert!(el_rules_rowfinite(&a).unwrap().is_degree_homogeneous());
        assert!(pi_rules_for(&["s", "t"]).is_degree_homogeneous());
        let q = [Generator::projection("q1"), Generator::projection("q2")];
        assert!(commuting_projection_rules(&q).unwrap().is_degree_homogeneous());
        assert!(unit_rules().unwrap().is_degree_homogeneous());
    }

    #[test]
    fn normalization_is_deterministic() {
        let a = ZeroOneMatrix::new(vec![vec![1, 1], vec![1, 1]]).unwrap();
        let rs = el_rules_rowfinite(&a).unwrap();
        let t = parse_term_default("T1'.T1.T2'.T2.T1'.T1").unwrap();
        let n1 = normalize(&t, &rs).unwrap();
        let n2 = normalize(&t, &rs).unwrap();
        assert_eq!(n1, n2);
    }

    #[test]
    fn budget_exceeded_reports_term() {
        let rs = pi_rules_for(&["s"]);
        let t = parse_term_default("s.s'.s").unwrap();
        let err = normalize_budgeted(&t, &rs, 0).unwrap_err();
        assert!(matches!(err, RewriteError::BudgetExceeded { .. }));
    }

    // mixed-kind parsing helper: p is a projection, rest partial isometries
    struct TermParserFixture;
    impl TermParserFixture {
        fn parse(src: &str) -> Term {
            let mut p = crate::syntax::TermParser::with_default(GeneratorKind::PartialIsometry);
            p.declare(Generator::projection("p"));
            p.parse(src).unwrap()
        }
    }
}
