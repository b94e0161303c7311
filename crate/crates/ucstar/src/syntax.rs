//! Text syntax for terms.
//!
//! ```text
//! term     := summand (('+' | '-') summand)*
//! summand  := coeff '*' monomial | monomial | '0'
//! monomial := factor ('.' factor)*
//! factor   := (ident | '1') "'"*          -- `'` is the star
//! coeff    := rational ['i'] | '(' complex ')'
//! rational := digits ['/' digits]
//! ident    := [a-zA-Z][a-zA-Z0-9_]*
//! ```
//!
//! Examples: `s.s'.s`, `(2+3i)*s.t'.p`, `S1.S1' + S2.S2' - 1`. The literal
//! `1` denotes the distinguished unit generator. Generator kinds are not part
//! of the syntax; the parser resolves them from declared generators, with an
//! optional default for undeclared names.

use crate::coeff::Coefficient;
use crate::error::ParseError;
use crate::term::{Generator, GeneratorKind, Letter, Term, Word};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use std::collections::BTreeMap;

/// Resolves generator names to kinds while parsing.
#[derive(Debug, Clone, Default)]
pub struct TermParser {
    kinds: BTreeMap<String, GeneratorKind>,
    default_kind: Option<GeneratorKind>,
}

impl TermParser {
    /// Parser that rejects any name not declared.
    pub fn new(declared: impl IntoIterator<Item = Generator>) -> Self {
        let mut kinds = BTreeMap::new();
        for g in declared {
            kinds.insert(g.name, g.kind);
        }
        TermParser { kinds, default_kind: None }
    }

    /// Parser that assigns `kind` to every undeclared name.
    pub fn with_default(kind: GeneratorKind) -> Self {
        TermParser { kinds: BTreeMap::new(), default_kind: Some(kind) }
    }

    pub fn declare(&mut self, g: Generator) {
        self.kinds.insert(g.name, g.kind);
    }

    pub fn parse(&self, input: &str) -> Result<Term, ParseError> {
        let mut cur = Cursor { input: input.as_bytes(), pos: 0 };
        let term = self.parse_term(&mut cur)?;
        cur.skip_ws();
        if !cur.at_end() {
            return Err(cur.err("trailing input"));
        }
        Ok(term)
    }

    fn parse_term(&self, cur: &mut Cursor) -> Result<Term, ParseError> {
        cur.skip_ws();
        let mut negate = false;
        if cur.eat(b'-') {
            negate = true;
        } else {
            cur.eat(b'+');
        }
        let mut acc = self.parse_summand(cur, negate)?;
        loop {
            cur.skip_ws();
            let neg = if cur.eat(b'+') {
                false
            } else if cur.eat(b'-') {
                true
            } else {
                break;
            };
            let s = self.parse_summand(cur, neg)?;
            acc = acc.add(&s);
        }
        Ok(acc)
    }

    fn parse_summand(&self, cur: &mut Cursor, negate: bool) -> Result<Term, ParseError> {
        cur.skip_ws();
        let start = cur.pos;
        let (coeff, word) = match cur.peek() {
            Some(b'(') => {
                let c = self.parse_paren_coeff(cur)?;
                cur.skip_ws();
                if !cur.eat(b'*') {
                    return Err(cur.err("expected `*` after coefficient"));
                }
                (c, self.parse_monomial(cur)?)
            }
            Some(c) if c.is_ascii_digit() => {
                let num = cur.take_while(|b| b.is_ascii_digit());
                let mut rational_tail = false;
                let mut den = String::new();
                if cur.peek() == Some(b'/') {
                    cur.advance();
                    den = cur.take_while(|b| b.is_ascii_digit());
                    if den.is_empty() {
                        return Err(cur.err("expected denominator digits"));
                    }
                    rational_tail = true;
                }
                let imag = cur.eat(b'i');
                cur.skip_ws();
                if cur.eat(b'*') {
                    // coefficient position
                    let r = make_rational(&num, if rational_tail { &den } else { "1" });
                    let c = if imag {
                        Coefficient::new(BigRational::zero(), r)
                    } else {
                        Coefficient::new(r, BigRational::zero())
                    };
                    (c, self.parse_monomial(cur)?)
                } else if !rational_tail && !imag && num == "1" {
                    // the unit literal as the first factor of a word
                    let stars = cur.count_quotes();
                    let first = unit_letter(stars);
                    let word = self.parse_monomial_rest(cur, first)?;
                    (Coefficient::one(), word)
                } else if !rational_tail && !imag && num == "0" {
                    return Ok(Term::zero());
                } else {
                    return Err(ParseError::Syntax {
                        position: start,
                        message: "bare scalar; write `c*1` in a unital presentation".into(),
                    });
                }
            }
            Some(c) if c.is_ascii_alphabetic() => (Coefficient::one(), self.parse_monomial(cur)?),
            _ => return Err(cur.err("expected a summand")),
        };
        let coeff = if negate { -&coeff } else { coeff };
        Ok(Term::monomial(coeff, word))
    }

    fn parse_monomial(&self, cur: &mut Cursor) -> Result<Word, ParseError> {
        cur.skip_ws();
        let first = self.parse_factor(cur)?;
        self.parse_monomial_rest(cur, first)
    }

    fn parse_monomial_rest(&self, cur: &mut Cursor, first: Letter) -> Result<Word, ParseError> {
        let mut letters = vec![first];
        loop {
            cur.skip_ws();
            if !cur.eat(b'.') {
                break;
            }
            cur.skip_ws();
            letters.push(self.parse_factor(cur)?);
        }
        Ok(Word::from_letters(letters))
    }

    fn parse_factor(&self, cur: &mut Cursor) -> Result<Letter, ParseError> {
        cur.skip_ws();
        let start = cur.pos;
        match cur.peek() {
            Some(b'1') => {
                cur.advance();
                Ok(unit_letter(cur.count_quotes()))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let name =
                    cur.take_while(|b| b.is_ascii_alphanumeric() || b == b'_');
                let kind = match self.kinds.get(&name) {
                    Some(k) => *k,
                    None => self.default_kind.ok_or(ParseError::UnknownGenerator {
                        position: start,
                        name: name.clone(),
                    })?,
                };
                let stars = cur.count_quotes();
                Ok(Letter {
                    gen: Generator::new(name, kind),
                    starred: stars % 2 == 1,
                })
            }
            _ => Err(cur.err("expected a generator name")),
        }
    }

    fn parse_paren_coeff(&self, cur: &mut Cursor) -> Result<Coefficient, ParseError> {
        cur.expect(b'(')?;
        cur.skip_ws();
        let mut re = BigRational::zero();
        let mut im = BigRational::zero();
        loop {
            cur.skip_ws();
            let sign = if cur.eat(b'-') {
                -1i64
            } else {
                cur.eat(b'+');
                1
            };
            cur.skip_ws();
            let (mag, imaginary) = if cur.peek() == Some(b'i') {
                cur.advance();
                (BigRational::from_integer(BigInt::from(1)), true)
            } else if cur.peek().map_or(false, |c| c.is_ascii_digit()) {
                let num = cur.take_while(|b| b.is_ascii_digit());
                let den = if cur.eat(b'/') {
                    let d = cur.take_while(|b| b.is_ascii_digit());
                    if d.is_empty() {
                        return Err(cur.err("expected denominator digits"));
                    }
                    d
                } else {
                    "1".into()
                };
                let imag = cur.eat(b'i');
                (make_rational(&num, &den), imag)
            } else {
                return Err(cur.err("expected a rational or `i`"));
            };
            let signed = if sign < 0 { -mag } else { mag };
            if imaginary {
                im = &im + &signed;
            } else {
                re = &re + &signed;
            }
            cur.skip_ws();
            match cur.peek() {
                Some(b')') => {
                    cur.advance();
                    break;
                }
                Some(b'+') | Some(b'-') => continue,
                _ => return Err(cur.err("expected `)`, `+` or `-` in coefficient")),
            }
        }
        Ok(Coefficient::new(re, im))
    }
}

fn unit_letter(stars: usize) -> Letter {
    Letter { gen: Generator::unit(), starred: stars % 2 == 1 }
}

fn make_rational(num: &str, den: &str) -> BigRational {
    BigRational::new(
        num.parse::<BigInt>().expect("digits"),
        den.parse::<BigInt>().expect("digits"),
    )
}

struct Cursor<'a> {
    input: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<u8> {
        self.input.get(self.pos).copied()
    }

    fn at_end(&self) -> bool {
        self.pos >= self.input.len()
    }

    fn advance(&mut self) {
        self.pos += 1;
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, b: u8) -> Result<(), ParseError> {
        if self.eat(b) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", b as char)))
        }
    }

    fn skip_ws(&mut self) {
        while self.peek().map_or(false, |c| c == b' ' || c == b'\t') {
            self.advance();
        }
    }

    fn take_while(&mut self, pred: impl Fn(u8) -> bool) -> String {
        let start = self.pos;
        while self.peek().map_or(false, &pred) {
            self.advance();
        }
        String::from_utf8_lossy(&self.input[start..self.pos]).into_owned()
    }

    fn count_quotes(&mut self) -> usize {
        let mut n = 0;
        while self.eat(b'\'') {
            n += 1;
        }
        n
    }

    fn err(&self, message: &str) -> ParseError {
        ParseError::Syntax { position: self.pos, message: message.into() }
    }
}

/// Parse with every undeclared name treated as a partial isometry. Convenient
/// for tests and one-off term manipulation.
pub fn parse_term_default(input: &str) -> Result<Term, ParseError> {
    TermParser::with_default(GeneratorKind::PartialIsometry).parse(input)
}

/// Canonical text form of a term (inverse of parsing up to kind resolution).
pub fn print_term(t: &Term) -> String {
    t.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_star_and_product() {
        let t = parse_term_default("s.s'.s").unwrap();
        assert_eq!(print_term(&t), "s.s'.s");
    }

    #[test]
    fn parses_complex_coefficient() {
        let t = parse_term_default("(2+3i)*s.t'.p").unwrap();
        assert_eq!(print_term(&t), "(2+3i)*s.t'.p");
    }

    #[test]
    fn parses_unit_and_sums() {
        // canonical order is by (length, letters), so the unit word leads
        let t = parse_term_default("S1.S1' + S2.S2' - 1").unwrap();
        assert_eq!(print_term(&t), "-1 + S1.S1' + S2.S2'");
    }

    #[test]
    fn zero_parses_and_prints() {
        let t = parse_term_default("0").unwrap();
        assert!(t.is_zero());
        assert_eq!(print_term(&t), "0");
    }

    #[test]
    fn rejects_bare_scalar() {
        assert!(parse_term_default("2").is_err());
        assert!(parse_term_default("2 + s").is_err());
    }

    #[test]
    fn rejects_unknown_generator_without_default() {
        let p = TermParser::new([Generator::partial_isometry("s")]);
        assert!(p.parse("s.t").is_err());
        assert!(p.parse("s.s'").is_ok());
    }

    #[test]
    fn unit_literal_is_the_unit_generator() {
        let t = parse_term_default("1.s").unwrap();
        let gens = t.generators();
        assert!(gens.iter().any(|g| g.is_unit()));
    }

    #[test]
    fn double_star_folds() {
        let a = parse_term_default("s''").unwrap();
        let b = parse_term_default("s").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn parse_print_parse_is_parse() {
        for src in [
            "s.s'.s",
            "(2+3i)*s.t'.p",
            "S1.S1' + S2.S2' - 1",
            "1/2*q1 - 3i*q2.q1",
            "(1/2-3/4i)*a.b'.c",
            "0",
            "-s + t",
        ] {
            let once = parse_term_default(src).unwrap();
            let twice = parse_term_default(&print_term(&once)).unwrap();
            assert_eq!(once, twice, "round trip failed for {src}");
        }
    }
}
