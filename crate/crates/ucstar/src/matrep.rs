//! Finite-dimensional representations and the relation check engine.
//!
//! A representation assigns a sparse operator to every generator over a
//! labeled basis and extends to terms as a *-homomorphism. Truncated models
//! cannot satisfy all relations globally, so each carries an "interior"
//! predicate on basis vectors; a norm check restricted to the interior
//! subspace reports `interior-pass` instead of `pass`, and reports always
//! carry the interior fraction so the two are never confused.
//!
//! SOT checks follow the basis-vector criterion: verify the certificate bound
//! on every sampled net element, then find for each interior basis vector the
//! least schedule index after which the element norms stay below eps. Nets
//! without a certificate are refused, since an unbounded net supports no
//! conclusion about strong convergence on the whole space.

use crate::error::MatrepError;
use crate::presentation::{sample_net, NetIndex, NormRelation, SotNet};
use crate::sparse::SparseOperator;
use crate::term::{Generator, Term};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

/// Relative tolerance for operator norm computation.
pub const NORM_REL_TOL: f64 = 1e-10;
/// Iteration cap for the power method.
pub const NORM_MAX_ITER: usize = 10_000;
/// Tolerance used when re-verifying net certificates.
pub const CERTIFICATE_TOL: f64 = 1e-10;

/// Generator operators over a labeled basis, with an interior predicate.
#[derive(Debug, Clone)]
pub struct Representation {
    basis_labels: Vec<String>,
    assign: BTreeMap<String, SparseOperator>,
    interior: Vec<bool>,
    model_tag: String,
}

impl Representation {
    pub fn new(
        basis_labels: Vec<String>,
        assign: BTreeMap<String, SparseOperator>,
        interior: Vec<bool>,
        model_tag: impl Into<String>,
    ) -> Result<Self, MatrepError> {
        let dim = basis_labels.len();
        for op in assign.values() {
            if op.dim() != dim {
                return Err(MatrepError::DimMismatch(op.dim(), dim));
            }
        }
        assert_eq!(interior.len(), dim);
        Ok(Representation { basis_labels, assign, interior, model_tag: model_tag.into() })
    }

    pub fn dim(&self) -> usize {
        self.basis_labels.len()
    }

    pub fn basis_labels(&self) -> &[String] {
        &self.basis_labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.basis_labels[i]
    }

    pub fn interior_mask(&self) -> &[bool] {
        &self.interior
    }

    pub fn interior_fraction(&self) -> f64 {
        if self.interior.is_empty() {
            return 1.0;
        }
        self.interior.iter().filter(|&&b| b).count() as f64 / self.interior.len() as f64
    }

    pub fn model_tag(&self) -> &str {
        &self.model_tag
    }

    pub fn operator(&self, name: &str) -> Option<&SparseOperator> {
        self.assign.get(name)
    }

    pub fn generator_names(&self) -> Vec<&str> {
        self.assign.keys().map(|s| s.as_str()).collect()
    }

    /// Replace one generator's operator (negative controls in tests and the
    /// CLI's corruption switch).
    pub fn with_operator(mut self, name: &str, op: SparseOperator) -> Result<Self, MatrepError> {
        if op.dim() != self.dim() {
            return Err(MatrepError::DimMismatch(op.dim(), self.dim()));
        }
        self.assign.insert(name.to_string(), op);
        Ok(self)
    }

    /// *-homomorphic image of a term: words become operator products, stars
    /// become conjugate transposes, the extension is linear. The empty word
    /// maps to the identity.
    pub fn evaluate(&self, t: &Term) -> Result<SparseOperator, MatrepError> {
        let dim = self.dim();
        let mut acc = SparseOperator::zero(dim);
        for (w, c) in t.iter() {
            let mut op = SparseOperator::identity(dim);
            for letter in w.letters() {
                let assigned = self
                    .assign
                    .get(&letter.gen.name)
                    .ok_or_else(|| MatrepError::UnassignedGenerator(letter.gen.name.clone()))?;
                let factor = if letter.starred { assigned.adjoint() } else { assigned.clone() };
                op = op.matmul(&factor)?;
            }
            let (re, im) = c.to_f64_pair();
            acc = acc.add(&op.scale(Complex64::new(re, im)))?;
        }
        Ok(acc)
    }
}

/// Block-diagonal sum of two representations over the same generator set.
/// Basis labels are tagged `a:`/`b:`; the interior is the union of interiors.
pub fn direct_sum(a: &Representation, b: &Representation) -> Result<Representation, MatrepError> {
    let names_a: std::collections::BTreeSet<_> = a.assign.keys().collect();
    let names_b: std::collections::BTreeSet<_> = b.assign.keys().collect();
    if names_a != names_b {
        return Err(MatrepError::GeneratorSetMismatch);
    }
    let dim = a.dim() + b.dim();
    let mut labels = Vec::with_capacity(dim);
    labels.extend(a.basis_labels.iter().map(|l| format!("a:{l}")));
    labels.extend(b.basis_labels.iter().map(|l| format!("b:{l}")));
    let mut interior = a.interior.clone();
    interior.extend(b.interior.iter().copied());
    let mut assign = BTreeMap::new();
    for (name, op_a) in &a.assign {
        let op_b = &b.assign[name];
        let mut triplets: Vec<(usize, usize, Complex64)> = op_a.entries().to_vec();
        triplets.extend(
            op_b.entries()
                .iter()
                .map(|&(r, c, v)| (r + a.dim(), c + a.dim(), v)),
        );
        assign.insert(name.clone(), SparseOperator::new(dim, triplets)?);
    }
    let tag = format!("direct-sum({},{})", a.model_tag, b.model_tag);
    Representation::new(labels, assign, interior, tag)
}

/// Operator norm (largest singular value) by power iteration on `A*A` with a
/// fixed seed; exact for diagonal operators.
pub fn operator_norm(op: &SparseOperator, tol: f64) -> Result<f64, MatrepError> {
    assert!(tol > 0.0, "tolerance must be positive");
    if op.is_zero() {
        return Ok(0.0);
    }
    if op.is_diagonal() {
        return Ok(op.max_abs());
    }
    let dim = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_cafe);
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    normalize_vec(&mut v);
    let mut sigma_sq_prev = 0.0f64;
    for iter in 0..NORM_MAX_ITER {
        let av = op.apply(&v);
        let mut bv = op.apply_adjoint(&av);
        // Rayleigh quotient of A*A at v
        let sigma_sq: f64 = bv.iter().zip(&v).map(|(x, y)| (x * y.conj()).re).sum();
        let bnorm = normalize_vec(&mut bv);
        if bnorm == 0.0 {
            // v landed in the kernel of A*A; restart from fresh noise
            v = (0..dim)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            normalize_vec(&mut v);
            if sigma_sq <= tol * tol {
                return Ok(0.0);
            }
            continue;
        }
        v = bv;
        if iter > 0 && (sigma_sq - sigma_sq_prev).abs() <= tol * sigma_sq.max(1.0) {
            return Ok(sigma_sq.max(0.0).sqrt());
        }
        sigma_sq_prev = sigma_sq;
    }
    Err(MatrepError::NormNonConvergence(NORM_MAX_ITER))
}

fn normalize_vec(v: &mut [Complex64]) -> f64 {
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

/// Whether a norm check runs on the whole space or restricted to the
/// interior subspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    Global,
    Interior,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "pass")]
    Pass,
    #[serde(rename = "interior-pass")]
    InteriorPass,
    #[serde(rename = "fail")]
    Fail,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        !matches!(self, Verdict::Fail)
    }
}

/// Convergence record for one basis vector of an SOT check.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceEntry {
    pub label: String,
    /// The least schedule index from which all residuals stay below eps.
    pub index: Option<NetIndex>,
}

/// Structured verdict for a single relation check. The first six fields form
/// the stable machine-readable schema.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub id: String,
    pub kind: String,
    pub verdict: Verdict,
    pub residual: f64,
    pub schedule: Vec<String>,
    pub interior_fraction: f64,
    pub tolerance: f64,
    pub model: String,
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub convergence: Vec<ConvergenceEntry>,
}

impl CheckReport {
    /// One-relation-per-line text form.
    pub fn to_text(&self) -> String {
        let verdict = match self.verdict {
            Verdict::Pass => "pass",
            Verdict::InteriorPass => "interior-pass",
            Verdict::Fail => "fail",
        };
        let mut line = format!(
            "relation={} kind={} verdict={} residual={:.3e} tol={:.1e} interior={:.4} model={}",
            self.id, self.kind, verdict, self.residual, self.tolerance,
            self.interior_fraction, self.model
        );
        if !self.schedule.is_empty() {
            line.push_str(&format!(" schedule={}", self.schedule.join(";")));
        }
        if let Some(w) = &self.witness {
            line.push_str(&format!(" witness={w}"));
        }
        line
    }
}

/// Serialize reports as one JSON object per relation.
pub fn reports_to_json(reports: &[CheckReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize")
}

fn witness_label(rep: &Representation, op: &SparseOperator) -> Option<String> {
    let norms = op.column_norms();
    norms
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .filter(|(_, &n)| n > 0.0)
        .map(|(i, _)| rep.label(i).to_string())
}

/// Check a norm relation: `||rho(term)|| <= bound + tol`, on the whole space
/// or with the operator compressed to the interior subspace first.
pub fn check_norm(
    rep: &Representation,
    rel: &NormRelation,
    tol: f64,
    mode: CheckMode,
) -> Result<CheckReport, MatrepError> {
    let mut op = rep.evaluate(&rel.term)?;
    if mode == CheckMode::Interior {
        op = op.restrict(rep.interior_mask());
    }
    let norm = operator_norm(&op, NORM_REL_TOL)?;
    let bound = rel.bound.to_f64().unwrap_or(f64::INFINITY);
    let residual = (norm - bound).max(0.0);
    let ok = norm <= bound + tol;
    let verdict = match (ok, mode) {
        (true, CheckMode::Global) => Verdict::Pass,
        (true, CheckMode::Interior) => Verdict::InteriorPass,
        (false, _) => Verdict::Fail,
    };
    Ok(CheckReport {
        id: rel.id.clone(),
        kind: "norm".into(),
        verdict,
        residual,
        schedule: Vec::new(),
        interior_fraction: rep.interior_fraction(),
        tolerance: tol,
        model: rep.model_tag().to_string(),
        witness: if ok { None } else { witness_label(rep, &op) },
        convergence: Vec::new(),
    })
}

/// Check an SOT net along a schedule.
///
/// The certificate bound is verified on every sampled element. Then each
/// interior basis vector gets the least schedule index after which
/// `||rho(x_i) e|| <= eps` holds for the rest of the schedule; the check
/// passes when every interior vector converges within the schedule.
pub fn check_sot(
    rep: &Representation,
    net: &SotNet,
    schedule: &[NetIndex],
    eps: f64,
) -> Result<CheckReport, MatrepError> {
    assert!(eps > 0.0, "eps must be positive");
    let cert = net
        .certificate
        .as_ref()
        .ok_or_else(|| MatrepError::MissingCertificate(net.id.clone()))?;
    let bound = cert.bound.to_f64().unwrap_or(f64::INFINITY);
    let terms = sample_net(net, schedule)?;
    let schedule_text: Vec<String> = schedule.iter().map(|i| i.to_string()).collect();

    let mut ops = Vec::with_capacity(terms.len());
    for t in &terms {
        ops.push(rep.evaluate(t)?);
    }

    // certificate re-verification
    let mut max_excess = 0.0f64;
    let mut cert_witness = None;
    for (k, op) in ops.iter().enumerate() {
        let n = operator_norm(op, NORM_REL_TOL)?;
        if n > bound + CERTIFICATE_TOL && n - bound > max_excess {
            max_excess = n - bound;
            cert_witness = Some(format!(
                "element {} has norm {:.6} > certificate bound {}",
                schedule_text[k], n, bound
            ));
        }
    }

    let per_op_column_norms: Vec<Vec<f64>> = ops.iter().map(|op| op.column_norms()).collect();
    let interior_indices: Vec<usize> = rep
        .interior_mask()
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| b.then_some(i))
        .collect();

    let convergence: Vec<ConvergenceEntry> = interior_indices
        .par_iter()
        .map(|&i| {
            let residuals: Vec<f64> =
                per_op_column_norms.iter().map(|norms| norms[i]).collect();
            // least k such that every residual from k on is <= eps
            let mut idx = None;
            for k in (0..residuals.len()).rev() {
                if residuals[k] <= eps {
                    idx = Some(k);
                } else {
                    break;
                }
            }
            ConvergenceEntry {
                label: rep.label(i).to_string(),
                index: idx.map(|k| schedule[k].clone()),
            }
        })
        .collect();

    let diverging: Vec<&ConvergenceEntry> =
        convergence.iter().filter(|e| e.index.is_none()).collect();
    let max_final_residual = per_op_column_norms
        .last()
        .map(|norms| {
            interior_indices
                .iter()
                .map(|&i| norms[i])
                .fold(0.0f64, f64::max)
        })
        .unwrap_or(0.0);

    let (verdict, witness) = if cert_witness.is_some() {
        (Verdict::Fail, cert_witness)
    } else if let Some(e) = diverging.first() {
        (
            Verdict::Fail,
            Some(format!("basis vector {} does not converge within the schedule", e.label)),
        )
    } else if rep.interior_fraction() < 1.0 {
        (Verdict::InteriorPass, None)
    } else {
        (Verdict::Pass, None)
    };

    Ok(CheckReport {
        id: net.id.clone(),
        kind: "sot".into(),
        verdict,
        residual: if cert_witness_excess(&max_excess) { max_excess } else { max_final_residual },
        schedule: schedule_text,
        interior_fraction: rep.interior_fraction(),
        tolerance: eps,
        model: rep.model_tag().to_string(),
        witness,
        convergence,
    })
}

fn cert_witness_excess(excess: &f64) -> bool {
    *excess > 0.0
}

/// Given generators whose range projections partition the identity, check
/// that the ranges are mutually orthogonal: the largest
/// `||rho(s_i s_i* s_j s_j*)||` over i != j must be at most `tol`.
pub fn check_orthogonal_ranges(
    rep: &Representation,
    gens: &[Generator],
    tol: f64,
) -> Result<CheckReport, MatrepError> {
    let mut range_projections = Vec::with_capacity(gens.len());
    for g in gens {
        let s = rep
            .operator(&g.name)
            .ok_or_else(|| MatrepError::UnassignedGenerator(g.name.clone()))?;
        let p = s.matmul(&s.adjoint())?;
        let idem = operator_norm(&p.matmul(&p)?.sub(&p)?, NORM_REL_TOL)?;
        let selfadj = operator_norm(&p.adjoint().sub(&p)?, NORM_REL_TOL)?;
        let residual = idem.max(selfadj);
        if residual > tol {
            return Err(MatrepError::NotARangeProjection { gen: g.name.clone(), tol, residual });
        }
        range_projections.push(p);
    }
    let mut max_overlap = 0.0f64;
    let mut witness = None;
    for i in 0..range_projections.len() {
        for j in 0..range_projections.len() {
            if i == j {
                continue;
            }
            let prod = range_projections[i].matmul(&range_projections[j])?;
            let n = operator_norm(&prod, NORM_REL_TOL)?;
            if n > max_overlap {
                max_overlap = n;
                witness = Some(format!("ranges of {} and {} overlap", gens[i].name, gens[j].name));
            }
        }
    }
    let ok = max_overlap <= tol;
    Ok(CheckReport {
        id: "orthogonal-ranges".into(),
        kind: "orthogonal-ranges".into(),
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        residual: max_overlap,
        schedule: Vec::new(),
        interior_fraction: rep.interior_fraction(),
        tolerance: tol,
        model: rep.model_tag().to_string(),
        witness: if ok { None } else { witness },
        convergence: Vec::new(),
    })
}

/// Numeric rank of the span of a family of operators, viewed as vectors.
/// Entries are reduced by Gaussian elimination with a pivot threshold.
pub fn operator_span_rank(ops: &[SparseOperator], tol: f64) -> usize {
    let mut pivots: Vec<((usize, usize), BTreeMap<(usize, usize), Complex64>)> = Vec::new();
    for op in ops {
        let mut row: BTreeMap<(usize, usize), Complex64> =
            op.entries().iter().map(|&(r, c, v)| ((r, c), v)).collect();
        for (coord, pivot_row) in &pivots {
            if let Some(&factor) = row.get(coord) {
                for (k, v) in pivot_row {
                    let entry = row.entry(*k).or_insert(Complex64::new(0.0, 0.0));
                    *entry -= factor * v;
                    if entry.norm() <= tol {
                        row.remove(k);
                    }
                }
            }
        }
        let best = row
            .iter()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .map(|(k, v)| (*k, *v));
        if let Some((coord, val)) = best {
            if val.norm() > tol {
                let normalized: BTreeMap<(usize, usize), Complex64> =
                    row.iter().map(|(k, v)| (*k, v / val)).collect();
                pivots.push((coord, normalized));
            }
        }
    }
    pivots.len()
}
