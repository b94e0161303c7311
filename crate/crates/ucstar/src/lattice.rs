//! Inclusion-exclusion combinatorics of commuting projections.
//!
//! Given commuting projections q_1..q_n, the 2^n - 1 products
//! `prod_{j in X} q_j prod_{k notin X} (1 - q_k)` over nonempty X are
//! mutually orthogonal and span the algebra the q_i generate. Atoms are
//! stored expanded and unit-free (the complement factors are multiplied out),
//! so the same terms serve non-unital presentations.
//!
//! The same module hosts the A(X,Y,j) product of the Exel-Laca relation EL4
//! and the explicit unit `U` built from a finite Y with finite
//! A(empty,Y,.) support.

use crate::coeff::Coefficient;
use crate::error::LatticeError;
use crate::models::ZeroOneMatrix;
use crate::sparse::SparseOperator;
use crate::term::{Generator, Letter, Term, Word};
use rayon::prelude::*;
use std::collections::BTreeSet;

/// Cap on the projection count: the construction is exponential by nature.
pub const MAX_PROJECTIONS: usize = 20;

/// Entrywise tolerance for float projection/commutation validation.
pub const COMMUTATION_TOL: f64 = 1e-12;

/// A nonempty subset X of {1..n} naming one atom.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct AtomIndex {
    pub members: BTreeSet<usize>,
    pub n: usize,
}

impl AtomIndex {
    pub fn new(members: impl IntoIterator<Item = usize>, n: usize) -> Result<Self, LatticeError> {
        if n > MAX_PROJECTIONS {
            return Err(LatticeError::TooManyProjections(n, MAX_PROJECTIONS));
        }
        let members: BTreeSet<usize> = members.into_iter().collect();
        if members.is_empty() {
            return Err(LatticeError::EmptyAtomIndex);
        }
        for &i in &members {
            if i == 0 || i > n {
                return Err(LatticeError::IndexOutOfRange(i, n));
            }
        }
        Ok(AtomIndex { members, n })
    }
}

/// Default projection generators q1..qn.
pub fn default_projections(n: usize) -> Vec<Generator> {
    (1..=n).map(|i| Generator::projection(format!("q{i}"))).collect()
}

/// The expanded atom polynomial for X over the given projection family:
/// the product over X times the inclusion-exclusion expansion of the
/// complement factors, with exact +-1 coefficients.
pub fn atom_term_over(idx: &AtomIndex, gens: &[Generator]) -> Result<Term, LatticeError> {
    if gens.len() != idx.n {
        return Err(LatticeError::IndexOutOfRange(gens.len(), idx.n));
    }
    let complement: Vec<usize> =
        (1..=idx.n).filter(|i| !idx.members.contains(i)).collect();
    let prefix: Vec<Letter> = idx
        .members
        .iter()
        .map(|&i| Letter::plain(gens[i - 1].clone()))
        .collect();
    let mut term = Term::zero();
    for mask in 0u32..(1u32 << complement.len()) {
        let mut letters = prefix.clone();
        let mut sign = 1i64;
        for (bit, &z) in complement.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                letters.push(Letter::plain(gens[z - 1].clone()));
                sign = -sign;
            }
        }
        term.accumulate(Word::from_letters(letters), &Coefficient::from_integer(sign));
    }
    Ok(term)
}

/// Atom polynomial over the default family q1..qn.
pub fn atom_term(idx: &AtomIndex) -> Result<Term, LatticeError> {
    atom_term_over(idx, &default_projections(idx.n))
}

/// All atom indices for n projections, ordered by subset rank (the bitmask
/// with bit i-1 for q_i, ascending).
pub fn atom_indices(n: usize) -> Result<Vec<AtomIndex>, LatticeError> {
    if n == 0 || n > MAX_PROJECTIONS {
        return Err(LatticeError::TooManyProjections(n, MAX_PROJECTIONS));
    }
    (1u32..(1u32 << n))
        .map(|mask| {
            AtomIndex::new(
                (1..=n).filter(|i| mask & (1 << (i - 1)) != 0),
                n,
            )
        })
        .collect()
}

/// `q_i` reconstructed as the sum of all atoms whose index contains i.
pub fn reconstruct(i: usize, n: usize) -> Result<Term, LatticeError> {
    if i == 0 || i > n {
        return Err(LatticeError::IndexOutOfRange(i, n));
    }
    let mut sum = Term::zero();
    for idx in atom_indices(n)? {
        if idx.members.contains(&i) {
            sum = sum.add(&atom_term(&idx)?);
        }
    }
    Ok(sum)
}

fn validate_projection(q: &SparseOperator, index: usize) -> Result<(), LatticeError> {
    let not_proj = |reason: String| LatticeError::NotAProjection { index, reason };
    let sq = q.matmul(q).expect("same dim");
    let idem = sq.sub(q).expect("same dim").max_abs();
    if idem > COMMUTATION_TOL {
        return Err(not_proj(format!("M^2 - M has entry residual {idem:.3e}")));
    }
    let selfadj = q.adjoint().sub(q).expect("same dim").max_abs();
    if selfadj > COMMUTATION_TOL {
        return Err(not_proj(format!("M* - M has entry residual {selfadj:.3e}")));
    }
    Ok(())
}

/// Numeric atoms of a commuting projection family. Output is ordered by
/// subset rank and has length 2^n - 1; all pairwise products vanish. Exact
/// for 0/1 diagonal inputs.
pub fn atoms_numeric(q: &[SparseOperator]) -> Result<Vec<SparseOperator>, LatticeError> {
    let n = q.len();
    if n == 0 || n > MAX_PROJECTIONS {
        return Err(LatticeError::TooManyProjections(n, MAX_PROJECTIONS));
    }
    let dim = q[0].dim();
    for (k, m) in q.iter().enumerate() {
        if m.dim() != dim {
            return Err(LatticeError::DimensionMismatch {
                index: k + 1,
                got: m.dim(),
                expected: dim,
            });
        }
        validate_projection(m, k + 1)?;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let ij = q[i].matmul(&q[j]).expect("same dim");
            let ji = q[j].matmul(&q[i]).expect("same dim");
            let residual = ij.sub(&ji).expect("same dim").max_abs();
            if residual > COMMUTATION_TOL {
                return Err(LatticeError::NonCommuting(i + 1, j + 1, residual));
            }
        }
    }
    let identity = SparseOperator::identity(dim);
    let complements: Vec<SparseOperator> =
        q.iter().map(|m| identity.sub(m).expect("same dim")).collect();
    let atoms: Vec<SparseOperator> = (1u32..(1u32 << n))
        .into_par_iter()
        .map(|mask| {
            let mut acc = identity.clone();
            for i in 0..n {
                let factor = if mask & (1 << i) != 0 { &q[i] } else { &complements[i] };
                acc = acc.matmul(factor).expect("same dim");
            }
            acc
        })
        .collect();
    Ok(atoms)
}

/// The EL4 product `A(X,Y,j) = prod_{x in X} A_xj prod_{y in Y} (1 - A_yj)`.
pub fn a_value(
    a: &ZeroOneMatrix,
    xs: &BTreeSet<usize>,
    ys: &BTreeSet<usize>,
    j: usize,
) -> Result<u8, LatticeError> {
    let k = a.size();
    let check = |i: usize| -> Result<(), LatticeError> {
        if i == 0 || i > k {
            Err(LatticeError::MatrixIndexOutOfRange(i, k))
        } else {
            Ok(())
        }
    };
    check(j)?;
    for &x in xs {
        check(x)?;
        if a.entry(x, j) == 0 {
            return Ok(0);
        }
    }
    for &y in ys {
        check(y)?;
        if a.entry(y, j) == 1 {
            return Ok(0);
        }
    }
    Ok(1)
}

/// Whether `{ j : A(X,Y,j) != 0 }` is known to be finite, and if so which set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SupportVerdict {
    Finite(BTreeSet<usize>),
    /// The matrix is a truncated view of a declared infinite matrix and no
    /// column-support bound is available; the support cannot be decided.
    Unknown,
}

/// Support of `A(X,Y,.)`. For a finite matrix the answer is always finite;
/// for a truncated view it is explicitly unknown, never guessed.
pub fn a_support(
    a: &ZeroOneMatrix,
    xs: &BTreeSet<usize>,
    ys: &BTreeSet<usize>,
) -> Result<SupportVerdict, LatticeError> {
    if a.is_truncated() {
        return Ok(SupportVerdict::Unknown);
    }
    let mut support = BTreeSet::new();
    for j in 1..=a.size() {
        if a_value(a, xs, ys, j)? != 0 {
            support.insert(j);
        }
    }
    Ok(SupportVerdict::Finite(support))
}

/// The explicit unit
/// `U = sum_{nonempty Z subset Y} (-1)^{|Z|+1} prod_{z in Z} T_z*T_z
///    + sum_{j in J2} T_jT_j*`
/// where `J2 = { j : A(empty,Y,j) != 0 }` must be finite.
pub fn unit_term(a: &ZeroOneMatrix, ys: &BTreeSet<usize>) -> Result<Term, LatticeError> {
    let j2 = match a_support(a, &BTreeSet::new(), ys)? {
        SupportVerdict::Finite(s) => s,
        SupportVerdict::Unknown => return Err(LatticeError::SupportUnknown),
    };
    let y_list: Vec<usize> = ys.iter().copied().collect();
    let mut u = Term::zero();
    for mask in 1u32..(1u32 << y_list.len()) {
        let mut letters = Vec::new();
        let mut size = 0u32;
        for (bit, &z) in y_list.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                let g = a.generator(z);
                letters.push(Letter::starred(g.clone()));
                letters.push(Letter::plain(g));
                size += 1;
            }
        }
        let sign = if size % 2 == 1 { 1 } else { -1 };
        u.accumulate(Word::from_letters(letters), &Coefficient::from_integer(sign));
    }
    for &j in &j2 {
        let g = a.generator(j);
        u.accumulate(
            Word::from_letters(vec![Letter::plain(g.clone()), Letter::starred(g)]),
            &Coefficient::one(),
        );
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::{commuting_projection_rules, normalize};
    use crate::syntax::parse_term_default;
    use crate::term::GeneratorKind;

    fn set(items: &[usize]) -> BTreeSet<usize> {
        items.iter().copied().collect()
    }

    fn parse_q(src: &str) -> Term {
        crate::syntax::TermParser::with_default(GeneratorKind::Projection)
            .parse(src)
            .unwrap()
    }

    #[test]
    fn atom_terms_match_hand_expansion() {
        let x1 = AtomIndex::new([1], 1).unwrap();
        assert_eq!(atom_term(&x1).unwrap(), parse_q("q1"));

        let x = AtomIndex::new([1], 2).unwrap();
        assert_eq!(atom_term(&x).unwrap(), parse_q("q1 - q1.q2"));

        let full = AtomIndex::new([1, 2], 2).unwrap();
        assert_eq!(atom_term(&full).unwrap(), parse_q("q1.q2"));
    }

    #[test]
    fn empty_atom_index_is_rejected() {
        assert!(matches!(AtomIndex::new([], 3), Err(LatticeError::EmptyAtomIndex)));
        assert!(AtomIndex::new([4], 3).is_err());
        assert!(AtomIndex::new([1], 21).is_err());
    }

    #[test]
    fn atoms_are_symbolically_orthogonal_projections() {
        let n = 3;
        let gens = default_projections(n);
        let rules = commuting_projection_rules(&gens).unwrap();
        let indices = atom_indices(n).unwrap();
        for (i, xi) in indices.iter().enumerate() {
            let a = atom_term(xi).unwrap();
            // projection: a^2 = a and a* = a (up to commutation sorting)
            let sq = normalize(&a.mul(&a).sub(&a), &rules).unwrap();
            assert!(sq.is_zero(), "atom {:?} not idempotent", xi.members);
            let sa = normalize(&a.adjoint().sub(&a), &rules).unwrap();
            assert!(sa.is_zero(), "atom {:?} not self-adjoint", xi.members);
            for xj in indices.iter().skip(i + 1) {
                let b = atom_term(xj).unwrap();
                let prod = normalize(&a.mul(&b), &rules).unwrap();
                assert!(prod.is_zero(), "atoms {:?} {:?} overlap", xi.members, xj.members);
            }
        }
    }

    #[test]
    fn reconstruction_normalizes_to_the_generator() {
        let gens = default_projections(3);
        let rules = commuting_projection_rules(&gens).unwrap();
        for i in 1..=3 {
            let sum = reconstruct(i, 3).unwrap();
            let diff = sum.sub(&Term::from_generator(gens[i - 1].clone()));
            assert!(normalize(&diff, &rules).unwrap().is_zero());
        }
        // n=2 hand check: (q1 - q1q2) + q1q2 = q1
        assert_eq!(reconstruct(1, 2).unwrap(), parse_q("q1"));
        assert_eq!(reconstruct(1, 1).unwrap(), parse_q("q1"));
        // n=3, i=2: four atoms
        let atoms_with_2: Vec<_> = atom_indices(3)
            .unwrap()
            .into_iter()
            .filter(|x| x.members.contains(&2))
            .collect();
        assert_eq!(atoms_with_2.len(), 4);
    }

    #[test]
    fn numeric_atoms_on_diagonal_projections() {
        let q1 = SparseOperator::diagonal(&[1.0, 1.0, 0.0]);
        let q2 = SparseOperator::diagonal(&[0.0, 1.0, 1.0]);
        let atoms = atoms_numeric(&[q1.clone(), q2]).unwrap();
        assert_eq!(atoms.len(), 3);
        assert_eq!(atoms[0], SparseOperator::diagonal(&[1.0, 0.0, 0.0])); // X={1}
        assert_eq!(atoms[1], SparseOperator::diagonal(&[0.0, 0.0, 1.0])); // X={2}
        assert_eq!(atoms[2], SparseOperator::diagonal(&[0.0, 1.0, 0.0])); // X={1,2}
        // single projection
        let single = atoms_numeric(&[q1.clone()]).unwrap();
        assert_eq!(single, vec![q1]);
    }

    #[test]
    fn non_projection_input_is_rejected() {
        let bad = SparseOperator::diagonal(&[1.0, 0.5]);
        assert!(matches!(
            atoms_numeric(&[bad]),
            Err(LatticeError::NotAProjection { index: 1, .. })
        ));
    }

    #[test]
    fn non_commuting_inputs_name_the_pair() {
        use num_complex::Complex64;
        let p = SparseOperator::diagonal(&[1.0, 0.0]);
        // projection onto span{(1,1)/sqrt 2}
        let h = SparseOperator::new(
            2,
            vec![
                (0, 0, Complex64::new(0.5, 0.0)),
                (0, 1, Complex64::new(0.5, 0.0)),
                (1, 0, Complex64::new(0.5, 0.0)),
                (1, 1, Complex64::new(0.5, 0.0)),
            ],
        )
        .unwrap();
        assert!(matches!(
            atoms_numeric(&[p, h]),
            Err(LatticeError::NonCommuting(1, 2, _))
        ));
    }

    #[test]
    fn a_value_follows_the_product_formula() {
        let a = ZeroOneMatrix::new(vec![vec![1, 1], vec![1, 0]]).unwrap();
        assert_eq!(a_value(&a, &set(&[1]), &set(&[2]), 1).unwrap(), 0);
        assert_eq!(a_value(&a, &set(&[1]), &set(&[2]), 2).unwrap(), 1);
        assert_eq!(a_value(&a, &set(&[]), &set(&[]), 1).unwrap(), 1);
        assert!(a_value(&a, &set(&[3]), &set(&[]), 1).is_err());
    }

    #[test]
    fn a_support_finite_and_unknown() {
        let a = ZeroOneMatrix::new(vec![vec![1, 1], vec![1, 0]]).unwrap();
        assert_eq!(
            a_support(&a, &set(&[1]), &set(&[2])).unwrap(),
            SupportVerdict::Finite(set(&[2]))
        );
        let t = ZeroOneMatrix::truncated_view(vec![vec![1, 1], vec![1, 0]]).unwrap();
        assert_eq!(a_support(&t, &set(&[1]), &set(&[])).unwrap(), SupportVerdict::Unknown);
    }

    #[test]
    fn unit_term_examples() {
        // row 1 all ones on a 2x2 matrix: J2 empty, U = T1*T1
        let a = ZeroOneMatrix::new(vec![vec![1, 1], vec![1, 0]]).unwrap();
        let u = unit_term(&a, &set(&[1])).unwrap();
        assert_eq!(u, parse_term_default("T1'.T1").unwrap());

        // Y empty with finite index set: U = sum of range projections
        let u0 = unit_term(&a, &set(&[])).unwrap();
        assert_eq!(u0, parse_term_default("T1.T1' + T2.T2'").unwrap());

        // |Y| = 2: three inclusion-exclusion summands plus the J2 part
        let u2 = unit_term(&a, &set(&[1, 2])).unwrap();
        assert_eq!(u2.support_len(), 3 + a_support_len(&a));
        // truncated views refuse
        let t = ZeroOneMatrix::truncated_view(vec![vec![1, 1], vec![1, 0]]).unwrap();
        assert!(matches!(unit_term(&t, &set(&[])), Err(LatticeError::SupportUnknown)));
    }

    fn a_support_len(a: &ZeroOneMatrix) -> usize {
        match a_support(a, &set(&[]), &set(&[1, 2])).unwrap() {
            SupportVerdict::Finite(s) => s.len(),
            SupportVerdict::Unknown => unreachable!(),
        }
    }
}
