//! Desk-scale builders for the concrete representations: truncated Fock
//! models for the Cuntz presentations, truncated path-space models for
//! Exel-Laca matrices, and ultragraph models with the finite-dimensional
//! span witness.
//!
//! Truncation boundary policy: shortening operators (stars) annihilate
//! minimal-length basis paths, lengthening operators annihilate maximal-length
//! ones, and each model's interior window is chosen so that every relation it
//! is meant to verify holds exactly there. Reports carry the truncation
//! parameters through the model tag.

use crate::error::ModelError;
use crate::matrep::Representation;
use crate::sparse::SparseOperator;
use crate::term::{Generator, Letter, Term, Word};
use num_complex::Complex64;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn ident_name_ok(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => chars.all(|c| c.is_ascii_alphanumeric()),
        _ => false,
    }
}

/// A 0-1 matrix with no identically zero rows, or a finitely truncated view
/// of a declared infinite matrix (for which the zero-row and support
/// conditions cannot be decided and are not claimed).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroOneMatrix {
    rows: Vec<Vec<u8>>,
    truncated: bool,
}

impl ZeroOneMatrix {
    pub fn new(rows: Vec<Vec<u8>>) -> Result<Self, ModelError> {
        let m = Self::validated(rows, false)?;
        for (i, row) in m.rows.iter().enumerate() {
            if row.iter().all(|&e| e == 0) {
                return Err(ModelError::ZeroRow { row: i + 1 });
            }
        }
        Ok(m)
    }

    /// A truncated window of a declared infinite matrix. Zero rows are not
    /// rejected here: a row may have support beyond the window.
    pub fn truncated_view(rows: Vec<Vec<u8>>) -> Result<Self, ModelError> {
        Self::validated(rows, true)
    }

    fn validated(rows: Vec<Vec<u8>>, truncated: bool) -> Result<Self, ModelError> {
        let k = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(ModelError::NotSquare { rows: k, row: i + 1, cols: row.len() });
            }
            for (j, &e) in row.iter().enumerate() {
                if e > 1 {
                    return Err(ModelError::NotZeroOne { row: i + 1, col: j + 1 });
                }
            }
        }
        Ok(ZeroOneMatrix { rows, truncated })
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    /// Entry A_ij with 1-based indices.
    pub fn entry(&self, i: usize, j: usize) -> u8 {
        self.rows[i - 1][j - 1]
    }

    /// The partial-isometry generator named after row/column i.
    pub fn generator(&self, i: usize) -> Generator {
        Generator::partial_isometry(format!("T{i}"))
    }

    /// File format: first line `el-matrix k`, then k rows of 0/1 digits.
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let bad = |detail: &str| ModelError::BadFile {
            what: "el-matrix".into(),
            detail: detail.into(),
        };
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| bad("empty file"))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 2 || parts[0] != "el-matrix" {
            return Err(bad("expected header `el-matrix k`"));
        }
        let k: usize = parts[1].parse().map_err(|_| bad("bad size"))?;
        let mut rows = Vec::with_capacity(k);
        for _ in 0..k {
            let line = lines.next().ok_or_else(|| bad("missing row"))?;
            let row: Vec<u8> = line
                .trim()
                .chars()
                .map(|c| match c {
                    '0' => Ok(0u8),
                    '1' => Ok(1u8),
                    _ => Err(bad("rows must be 0/1 digits")),
                })
                .collect::<Result<_, _>>()?;
            rows.push(row);
        }
        if lines.next().is_some() {
            return Err(bad("trailing lines"));
        }
        ZeroOneMatrix::new(rows)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("el-matrix {}\n", self.size());
        for row in &self.rows {
            for &e in row {
                out.push(if e == 1 { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    /// All A-compatible index sequences of length n, 1-based, lexicographic.
    fn paths(&self, n: usize) -> Vec<Vec<usize>> {
        let k = self.size();
        let mut out = Vec::new();
        let mut stack: Vec<Vec<usize>> = (1..=k).rev().map(|i| vec![i]).collect();
        while let Some(p) = stack.pop() {
            if p.len() == n {
                out.push(p);
                continue;
            }
            let last = *p.last().expect("nonempty");
            for next in (1..=k).rev() {
                if self.entry(last, next) == 1 {
                    let mut q = p.clone();
                    q.push(next);
                    stack.push(q);
                }
            }
        }
        out.sort();
        out
    }
}

/// An edge of an ultragraph: a source vertex and a nonempty set of range
/// vertices (indices into the vertex list).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UltraEdge {
    pub name: String,
    pub source: usize,
    pub range: BTreeSet<usize>,
}

/// A quadruple (vertices, edges, source map, range map) where ranges are
/// nonempty vertex sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ultragraph {
    vertices: Vec<String>,
    edges: Vec<UltraEdge>,
}

impl Ultragraph {
    pub fn new(
        vertices: Vec<String>,
        edges: Vec<(String, String, Vec<String>)>,
    ) -> Result<Self, ModelError> {
        let mut seen = BTreeSet::new();
        for v in &vertices {
            if !ident_name_ok(v) {
                return Err(ModelError::BadName(v.clone()));
            }
            if !seen.insert(v.clone()) {
                return Err(ModelError::BadName(format!("duplicate vertex {v}")));
            }
        }
        let index: BTreeMap<&str, usize> =
            vertices.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let mut built = Vec::new();
        let mut edge_names = BTreeSet::new();
        for (name, source, range) in edges {
            if !ident_name_ok(&name) {
                return Err(ModelError::BadName(name));
            }
            if !edge_names.insert(name.clone()) {
                return Err(ModelError::BadName(format!("duplicate edge {name}")));
            }
            let src = *index
                .get(source.as_str())
                .ok_or_else(|| ModelError::UnknownVertex(source.clone()))?;
            let mut rset = BTreeSet::new();
            for v in range {
                rset.insert(
                    *index.get(v.as_str()).ok_or_else(|| ModelError::UnknownVertex(v.clone()))?,
                );
            }
            if rset.is_empty() {
                return Err(ModelError::EmptyRange { edge: name });
            }
            built.push(UltraEdge { name, source: src, range: rset });
        }
        Ok(Ultragraph { vertices, edges: built })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_name(&self, v: usize) -> &str {
        &self.vertices[v]
    }

    pub fn edge(&self, e: usize) -> &UltraEdge {
        &self.edges[e]
    }

    pub fn source(&self, e: usize) -> usize {
        self.edges[e].source
    }

    pub fn range(&self, e: usize) -> &BTreeSet<usize> {
        &self.edges[e].range
    }

    pub fn edge_generator(&self, e: usize) -> Generator {
        Generator::partial_isometry(format!("s_{}", self.edges[e].name))
    }

    /// Name of the projection for a vertex set: `p_` plus the sorted vertex
    /// names joined by underscores (`p_` alone for the empty set).
    pub fn set_projection_name(&self, set: &BTreeSet<usize>) -> String {
        let mut name = String::from("p_");
        for (k, &v) in set.iter().enumerate() {
            if k > 0 {
                name.push('_');
            }
            name.push_str(&self.vertices[v]);
        }
        name
    }

    pub fn set_projection_generator(&self, set: &BTreeSet<usize>) -> Generator {
        Generator::projection(self.set_projection_name(set))
    }

    /// The smallest family of vertex sets containing the empty set, all
    /// ranges and all singletons, closed under finite intersections and
    /// unions. Computed by fixed-point iteration, returned deduplicated and
    /// sorted by (size, members).
    pub fn g0_closure(&self) -> Vec<BTreeSet<usize>> {
        let mut family: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
        family.insert(BTreeSet::new());
        for v in 0..self.vertices.len() {
            family.insert([v].into_iter().collect());
        }
        for e in &self.edges {
            family.insert(e.range.clone());
        }
        loop {
            let snapshot: Vec<BTreeSet<usize>> = family.iter().cloned().collect();
            let before = family.len();
            for a in &snapshot {
                for b in &snapshot {
                    family.insert(a.intersection(b).copied().collect());
                    family.insert(a.union(b).copied().collect());
                }
            }
            if family.len() == before {
                break;
            }
        }
        let mut out: Vec<BTreeSet<usize>> = family.into_iter().collect();
        out.sort_by_key(|s| (s.len(), s.iter().copied().collect::<Vec<_>>()));
        out
    }

    /// Edge paths of length n (0-based edge indices), lexicographic in the
    /// edge order. Consecutive edges must satisfy s(e_{i+1}) in r(e_i).
    fn paths(&self, n: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut stack: Vec<Vec<usize>> = (0..self.edges.len()).rev().map(|e| vec![e]).collect();
        while let Some(p) = stack.pop() {
            if p.len() == n {
                out.push(p);
                continue;
            }
            let last = *p.last().expect("nonempty");
            for next in (0..self.edges.len()).rev() {
                if self.edges[last].range.contains(&self.edges[next].source) {
                    let mut q = p.clone();
                    q.push(next);
                    stack.push(q);
                }
            }
        }
        out.sort();
        out
    }

    fn is_path(&self, p: &[usize]) -> bool {
        p.iter().all(|&e| e < self.edges.len())
            && p.windows(2)
                .all(|w| self.edges[w[0]].range.contains(&self.edges[w[1]].source))
    }

    /// File format: a `vertices ...` line, then `edge <name> <source> -> {v1,v2}`.
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let bad = |detail: String| ModelError::BadFile { what: "ultragraph".into(), detail };
        let mut vertices = None;
        let mut edges = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("vertices") {
                vertices = Some(rest.split_whitespace().map(String::from).collect::<Vec<_>>());
            } else if let Some(rest) = line.strip_prefix("edge") {
                let (head, range) = rest
                    .split_once("->")
                    .ok_or_else(|| bad(format!("edge line without `->`: {line}")))?;
                let head: Vec<&str> = head.split_whitespace().collect();
                if head.len() != 2 {
                    return Err(bad(format!("expected `edge <name> <source> -> ...`: {line}")));
                }
                let range = range.trim();
                let range = range
                    .strip_prefix('{')
                    .and_then(|r| r.strip_suffix('}'))
                    .ok_or_else(|| bad(format!("range must be {{v1,v2,...}}: {line}")))?;
                let targets: Vec<String> = range
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect();
                edges.push((head[0].to_string(), head[1].to_string(), targets));
            } else {
                return Err(bad(format!("unrecognized line: {line}")));
            }
        }
        let vertices = vertices.ok_or_else(|| bad("missing `vertices` line".into()))?;
        Ultragraph::new(vertices, edges)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("vertices");
        for v in &self.vertices {
            out.push(' ');
            out.push_str(v);
        }
        out.push('\n');
        for e in &self.edges {
            let range: Vec<&str> = e.range.iter().map(|&v| self.vertices[v].as_str()).collect();
            out.push_str(&format!(
                "edge {} {} -> {{{}}}\n",
                e.name,
                self.vertices[e.source],
                range.join(",")
            ));
        }
        out
    }
}

/// Path enumeration source: a 0-1 matrix or an ultragraph.
pub enum PathSource<'a> {
    Matrix(&'a ZeroOneMatrix),
    Graph(&'a Ultragraph),
}

/// All compatible length-n sequences (1-based indices / edge positions),
/// lexicographic.
pub fn enumerate_paths(source: PathSource<'_>, n: usize) -> Result<Vec<Vec<usize>>, ModelError> {
    if n == 0 {
        return Err(ModelError::ZeroLengthPaths);
    }
    Ok(match source {
        PathSource::Matrix(a) => a.paths(n),
        PathSource::Graph(g) => g
            .paths(n)
            .into_iter()
            .map(|p| p.into_iter().map(|e| e + 1).collect())
            .collect(),
    })
}

/// Generator arity for the truncated Fock model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FockArity {
    Finite(usize),
    /// The countable family, materialized with this many letters.
    Infinite { letters: usize },
}

/// Truncated Fock representation on the word basis: words of length <= depth
/// over the letter alphabet, with S_i e_w = e_{iw} while the result fits and
/// 0 at the depth boundary. Interior: nonempty words of length < depth, where
/// both the isometry relations and the range-sum relation hold exactly.
pub fn fock_rep(arity: FockArity, depth: usize) -> Result<Representation, ModelError> {
    if depth < 2 {
        return Err(ModelError::DepthTooSmall { got: depth, need: 2 });
    }
    let (letters, prefix, tag) = match arity {
        FockArity::Finite(n) => {
            if n < 2 {
                return Err(ModelError::ArityTooSmall { got: n, need: 2 });
            }
            (n, "S", format!("fock:n={n},L={depth}"))
        }
        FockArity::Infinite { letters } => {
            if letters < 1 {
                return Err(ModelError::ArityTooSmall { got: letters, need: 1 });
            }
            (letters, "T", format!("fock:inf,m={letters},L={depth}"))
        }
    };

    // words of length 0..=depth, ordered by (length, lex)
    let mut words: Vec<Vec<usize>> = vec![Vec::new()];
    let mut current: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 1..=depth {
        let mut next = Vec::with_capacity(current.len() * letters);
        for w in &current {
            for i in 1..=letters {
                let mut v = Vec::with_capacity(w.len() + 1);
                v.push(i);
                v.extend(w.iter().copied());
                next.push(v);
            }
        }
        next.sort();
        words.extend(next.iter().cloned());
        current = next;
    }
    let index: BTreeMap<&[usize], usize> =
        words.iter().enumerate().map(|(k, w)| (w.as_slice(), k)).collect();
    let labels: Vec<String> = words.iter().map(|w| word_label(w)).collect();
    let interior: Vec<bool> = words.iter().map(|w| !w.is_empty() && w.len() < depth).collect();

    let dim = words.len();
    let mut assign = BTreeMap::new();
    for i in 1..=letters {
        let mut triplets = Vec::new();
        for (col, w) in words.iter().enumerate() {
            if w.len() < depth {
                let mut iw = Vec::with_capacity(w.len() + 1);
                iw.push(i);
                iw.extend(w.iter().copied());
                triplets.push((index[iw.as_slice()], col, one()));
            }
        }
        assign.insert(format!("{prefix}{i}"), SparseOperator::new(dim, triplets).expect("valid"));
    }
    assign.insert("1".to_string(), SparseOperator::identity(dim));
    Ok(Representation::new(labels, assign, interior, tag).expect("consistent dims"))
}

fn word_label(w: &[usize]) -> String {
    if w.is_empty() {
        return "()".to_string();
    }
    w.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(".")
}

/// Truncated path-space representation of an Exel-Laca matrix: basis paths of
/// length 1..=depth, L_i e_mu = e_{i mu} when A_{i mu_0} = 1 and the result
/// fits. Interior: lengths 2..=depth-1, where CK1 and all CK2 rows hold
/// exactly. The free-group tensor factor of the faithful representation is
/// omitted; it changes no relation residual.
pub fn pathspace_rep(a: &ZeroOneMatrix, depth: usize) -> Result<Representation, ModelError> {
    if depth < 3 {
        return Err(ModelError::DepthTooSmall { got: depth, need: 3 });
    }
    let k = a.size();
    let mut paths: Vec<Vec<usize>> = Vec::new();
    for n in 1..=depth {
        paths.extend(a.paths(n));
    }
    assert!(!paths.is_empty(), "no zero rows implies a nonempty path space");
    let index: BTreeMap<&[usize], usize> =
        paths.iter().enumerate().map(|(p, w)| (w.as_slice(), p)).collect();
    let labels: Vec<String> = paths.iter().map(|p| word_label(p)).collect();
    let interior: Vec<bool> =
        paths.iter().map(|p| p.len() >= 2 && p.len() + 1 <= depth).collect();

    let dim = paths.len();
    let mut assign = BTreeMap::new();
    for i in 1..=k {
        let mut triplets = Vec::new();
        for (col, mu) in paths.iter().enumerate() {
            if mu.len() < depth && a.entry(i, mu[0]) == 1 {
                let mut imu = Vec::with_capacity(mu.len() + 1);
                imu.push(i);
                imu.extend(mu.iter().copied());
                triplets.push((index[imu.as_slice()], col, one()));
            }
        }
        assign.insert(
            a.generator(i).name,
            SparseOperator::new(dim, triplets).expect("valid"),
        );
    }
    assign.insert("1".to_string(), SparseOperator::identity(dim));
    let tag = format!("pathspace:k={k},L={depth}");
    Ok(Representation::new(labels, assign, interior, tag).expect("consistent dims"))
}

/// Truncated path representation of an ultragraph: basis edge-paths of length
/// 1..=depth, s_e eps_alpha = eps_{e alpha} when s(alpha_1) in r(e) and the
/// result fits; p_A acts diagonally by whether s(alpha_1) in A. Interior:
/// lengths 2..=depth-1.
pub fn ultragraph_rep(g: &Ultragraph, depth: usize) -> Result<Representation, ModelError> {
    if depth < 3 {
        return Err(ModelError::DepthTooSmall { got: depth, need: 3 });
    }
    if g.edge_count() == 0 {
        return Err(ModelError::NoEdges);
    }
    for v in 0..g.vertex_count() {
        let emits = (0..g.edge_count()).any(|e| g.source(e) == v);
        let in_range = (0..g.edge_count()).any(|e| g.range(e).contains(&v));
        if !emits && !in_range {
            return Err(ModelError::IsolatedVertex { vertex: g.vertex_name(v).to_string() });
        }
    }
    let mut paths: Vec<Vec<usize>> = Vec::new();
    for n in 1..=depth {
        paths.extend(g.paths(n));
    }
    let index: BTreeMap<&[usize], usize> =
        paths.iter().enumerate().map(|(p, w)| (w.as_slice(), p)).collect();
    let labels: Vec<String> = paths
        .iter()
        .map(|p| {
            p.iter().map(|&e| g.edge(e).name.clone()).collect::<Vec<_>>().join(".")
        })
        .collect();
    let interior: Vec<bool> =
        paths.iter().map(|p| p.len() >= 2 && p.len() + 1 <= depth).collect();

    let dim = paths.len();
    let mut assign = BTreeMap::new();
    for e in 0..g.edge_count() {
        let mut triplets = Vec::new();
        for (col, alpha) in paths.iter().enumerate() {
            if alpha.len() < depth && g.range(e).contains(&g.source(alpha[0])) {
                let mut ea = Vec::with_capacity(alpha.len() + 1);
                ea.push(e);
                ea.extend(alpha.iter().copied());
                triplets.push((index[ea.as_slice()], col, one()));
            }
        }
        assign.insert(
            g.edge_generator(e).name,
            SparseOperator::new(dim, triplets).expect("valid"),
        );
    }
    for set in g.g0_closure() {
        let mut triplets = Vec::new();
        for (col, alpha) in paths.iter().enumerate() {
            if set.contains(&g.source(alpha[0])) {
                triplets.push((col, col, one()));
            }
        }
        assign.insert(
            g.set_projection_name(&set),
            SparseOperator::new(dim, triplets).expect("valid"),
        );
    }
    let tag = format!("ultragraph:v={},e={},L={}", g.vertex_count(), g.edge_count(), depth);
    Ok(Representation::new(labels, assign, interior, tag).expect("consistent dims"))
}

/// A normal-form monomial `s_alpha p_A s_beta*` over an ultragraph: two edge
/// paths (possibly empty) and a vertex set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct UltraMonomial {
    pub left: Vec<usize>,
    pub set: BTreeSet<usize>,
    pub right: Vec<usize>,
}

impl UltraMonomial {
    pub fn new(
        g: &Ultragraph,
        left: Vec<usize>,
        set: BTreeSet<usize>,
        right: Vec<usize>,
    ) -> Result<Self, ModelError> {
        for (step, p) in [&left, &right].into_iter().enumerate() {
            if !g.is_path(p) {
                return Err(ModelError::IncompatiblePath { step });
            }
        }
        Ok(UltraMonomial { left, set, right })
    }

    /// Canonical form: intersect the middle set with the ranges of the final
    /// edges of both paths. Returns None when the monomial is zero.
    pub fn normalized(&self, g: &Ultragraph) -> Option<UltraMonomial> {
        let mut set = self.set.clone();
        if let Some(&e) = self.left.last() {
            set = set.intersection(g.range(e)).copied().collect();
        }
        if let Some(&e) = self.right.last() {
            set = set.intersection(g.range(e)).copied().collect();
        }
        if set.is_empty() {
            return None;
        }
        Some(UltraMonomial { left: self.left.clone(), set, right: self.right.clone() })
    }

    pub fn adjoint(&self) -> UltraMonomial {
        UltraMonomial { left: self.right.clone(), set: self.set.clone(), right: self.left.clone() }
    }

    /// Gauge-balanced monomials have equal path lengths.
    pub fn is_balanced(&self) -> bool {
        self.left.len() == self.right.len()
    }

    /// Product of two normalized monomials: either zero or a single
    /// normalized monomial with coefficient one.
    pub fn mul(&self, other: &UltraMonomial, g: &Ultragraph) -> Option<UltraMonomial> {
        let beta = &self.right;
        let gamma = &other.left;
        if beta == gamma {
            let set: BTreeSet<usize> = self.set.intersection(&other.set).copied().collect();
            let m = UltraMonomial { left: self.left.clone(), set, right: other.right.clone() };
            return if m.set.is_empty() { None } else { m.normalized(g) };
        }
        if gamma.len() > beta.len() && gamma[..beta.len()] == beta[..] {
            // s_beta* s_gamma collapses to the tail of gamma
            let tail = &gamma[beta.len()..];
            if !self.set.contains(&g.source(tail[0])) {
                return None;
            }
            let mut left = self.left.clone();
            left.extend(tail.iter().copied());
            let m = UltraMonomial { left, set: other.set.clone(), right: other.right.clone() };
            return m.normalized(g);
        }
        if beta.len() > gamma.len() && beta[..gamma.len()] == gamma[..] {
            let tail = &beta[gamma.len()..];
            if !other.set.contains(&g.source(tail[0])) {
                return None;
            }
            let mut right = other.right.clone();
            right.extend(tail.iter().copied());
            let m = UltraMonomial { left: self.left.clone(), set: self.set.clone(), right };
            return m.normalized(g);
        }
        None
    }

    /// The monomial as a free-algebra term.
    pub fn to_term(&self, g: &Ultragraph) -> Term {
        let mut letters = Vec::new();
        for &e in &self.left {
            letters.push(Letter::plain(g.edge_generator(e)));
        }
        letters.push(Letter::plain(g.set_projection_generator(&self.set)));
        for &e in self.right.iter().rev() {
            letters.push(Letter::starred(g.edge_generator(e)));
        }
        Term::from_word(Word::from_letters(letters))
    }

    pub fn display(&self, g: &Ultragraph) -> String {
        let mut parts = Vec::new();
        for &e in &self.left {
            parts.push(format!("s_{}", g.edge(e).name));
        }
        parts.push(g.set_projection_name(&self.set));
        for &e in self.right.iter().rev() {
            parts.push(format!("s_{}'", g.edge(e).name));
        }
        parts.join(".")
    }
}

impl fmt::Display for UltraMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?},{:?},{:?})", self.left, self.set, self.right)
    }
}

/// Caps for the witness closure computation.
pub const WITNESS_PRODUCT_BUDGET: usize = 500_000;
pub const WITNESS_SPAN_BUDGET: usize = 200_000;

/// Outcome of the span-witness verification.
#[derive(Debug, Clone)]
pub struct WitnessReport {
    pub pass: bool,
    pub products_checked: usize,
    pub y_size: usize,
    pub failures: Vec<String>,
}

/// Finite-dimensional span witness for C*(X).
///
/// From the edges F and maximal path length N appearing in X, and the base
/// projections Q (the sets of X plus the ranges of F), build the atoms P of Q
/// and the candidate spanning set Y = { s_alpha p s_beta* } over paths of
/// length at most N in F and atoms p. The verdict closes the products of
/// X and X* reachable from X's atom decomposition and checks that every
/// product stays inside span Y.
pub fn witness_span(
    g: &Ultragraph,
    x: &[UltraMonomial],
) -> Result<(Vec<UltraMonomial>, WitnessReport), ModelError> {
    let normalized: Vec<UltraMonomial> =
        x.iter().filter_map(|m| m.normalized(g)).collect();
    if normalized.is_empty() {
        return Ok((
            Vec::new(),
            WitnessReport { pass: true, products_checked: 0, y_size: 0, failures: Vec::new() },
        ));
    }

    let mut f_edges: BTreeSet<usize> = BTreeSet::new();
    let mut max_len = 0usize;
    for m in &normalized {
        f_edges.extend(m.left.iter().copied());
        f_edges.extend(m.right.iter().copied());
        max_len = max_len.max(m.left.len()).max(m.right.len());
    }

    let mut base_sets: BTreeSet<BTreeSet<usize>> =
        normalized.iter().map(|m| m.set.clone()).collect();
    for &e in &f_edges {
        base_sets.insert(g.range(e).clone());
    }
    let q: Vec<BTreeSet<usize>> = base_sets.into_iter().collect();
    if q.len() > 20 {
        return Err(ModelError::TooManyWitnessProjections(q.len()));
    }

    // atoms of the commuting family {p_A : A in Q}
    let mut atoms: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
    for mask in 1u32..(1u32 << q.len()) {
        let mut atom: Option<BTreeSet<usize>> = None;
        for (bit, set) in q.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                atom = Some(match atom {
                    None => set.clone(),
                    Some(a) => a.intersection(set).copied().collect(),
                });
            }
        }
        let mut atom = atom.expect("nonempty mask");
        for (bit, set) in q.iter().enumerate() {
            if mask & (1 << bit) == 0 {
                atom = atom.difference(set).copied().collect();
            }
        }
        if !atom.is_empty() {
            atoms.insert(atom);
        }
    }
    let atoms: Vec<BTreeSet<usize>> = atoms.into_iter().collect();

    // paths over F of length 0..=N
    let mut w_paths: Vec<Vec<usize>> = vec![Vec::new()];
    let f_vec: Vec<usize> = f_edges.iter().copied().collect();
    let mut current: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 1..=max_len {
        let mut next = Vec::new();
        for p in &current {
            for &e in &f_vec {
                match p.last() {
                    None => next.push(vec![e]),
                    Some(&last) if g.range(last).contains(&g.source(e)) => {
                        let mut q2 = p.clone();
                        q2.push(e);
                        next.push(q2);
                    }
                    _ => {}
                }
            }
        }
        w_paths.extend(next.iter().cloned());
        current = next;
    }

    let candidates = w_paths
        .len()
        .saturating_mul(w_paths.len())
        .saturating_mul(atoms.len().max(1));
    if candidates > WITNESS_SPAN_BUDGET {
        return Err(ModelError::WitnessBudget {
            budget: WITNESS_SPAN_BUDGET,
            generated: candidates,
            f: f_edges.len(),
            n: max_len,
            p: atoms.len(),
        });
    }

    let mut y: BTreeSet<UltraMonomial> = BTreeSet::new();
    for alpha in &w_paths {
        for beta in &w_paths {
            for p in &atoms {
                let m = UltraMonomial {
                    left: alpha.clone(),
                    set: p.clone(),
                    right: beta.clone(),
                };
                if let Some(nm) = m.normalized(g) {
                    y.insert(nm);
                }
            }
        }
    }

    let mut failures: Vec<String> = Vec::new();

    // split a monomial along the atoms of Q; its set must be a union of atoms
    let decompose = |m: &UltraMonomial, failures: &mut Vec<String>| -> Vec<UltraMonomial> {
        let mut covered: BTreeSet<usize> = BTreeSet::new();
        let mut parts = Vec::new();
        for p in &atoms {
            if p.is_subset(&m.set) {
                covered.extend(p.iter().copied());
                let comp =
                    UltraMonomial { left: m.left.clone(), set: p.clone(), right: m.right.clone() };
                if let Some(nc) = comp.normalized(g) {
                    parts.push(nc);
                }
            }
        }
        if covered != m.set {
            failures.push(format!("atoms do not decompose the set of {}", m.display(g)));
        }
        parts
    };

    // atom decomposition of X and X*, the seed of the closure
    let mut multipliers: Vec<UltraMonomial> = Vec::new();
    for m in &normalized {
        multipliers.push(m.clone());
        multipliers.push(m.adjoint());
    }
    multipliers.sort();
    multipliers.dedup();
    let mut closure: BTreeSet<UltraMonomial> = BTreeSet::new();
    let mut queue: VecDeque<UltraMonomial> = VecDeque::new();
    for m in &multipliers {
        for comp in decompose(m, &mut failures) {
            if !y.contains(&comp) {
                failures.push(format!("component {} of X lies outside span Y", comp.display(g)));
            } else if closure.insert(comp.clone()) {
                queue.push_back(comp);
            }
        }
    }

    // close under left and right products with X and X*, re-splitting each
    // product along the atoms before the span membership test
    let mut products = 0usize;
    while let Some(s) = queue.pop_front() {
        for m in &multipliers {
            for prod in [m.mul(&s, g), s.mul(m, g)] {
                products += 1;
                if products > WITNESS_PRODUCT_BUDGET {
                    return Err(ModelError::WitnessBudget {
                        budget: WITNESS_PRODUCT_BUDGET,
                        generated: closure.len(),
                        f: f_edges.len(),
                        n: max_len,
                        p: atoms.len(),
                    });
                }
                let Some(prod) = prod else { continue };
                for comp in decompose(&prod, &mut failures) {
                    if !y.contains(&comp) {
                        failures.push(format!("product {} escapes span Y", comp.display(g)));
                    } else if closure.insert(comp.clone()) {
                        queue.push_back(comp);
                    }
                }
            }
        }
    }

    failures.sort();
    failures.dedup();
    let report = WitnessReport {
        pass: failures.is_empty(),
        products_checked: products,
        y_size: y.len(),
        failures,
    };
    Ok((y.into_iter().collect(), report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrep::{operator_norm, CheckMode};
    use crate::presentation::{cuntz_triple, exel_laca_triple};
    use crate::syntax::parse_term_default;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn example_matrix() -> ZeroOneMatrix {
        ZeroOneMatrix::new(vec![vec![1, 1], vec![1, 0]]).unwrap()
    }

    fn example_graph() -> Ultragraph {
        Ultragraph::new(
            vec!["v".into(), "w".into(), "u".into()],
            vec![
                ("e".into(), "v".into(), vec!["w".into(), "u".into()]),
                ("f".into(), "w".into(), vec!["v".into()]),
                ("g".into(), "u".into(), vec!["w".into()]),
                ("h".into(), "v".into(), vec!["u".into()]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn matrix_rejects_zero_row_naming_it() {
        let err = ZeroOneMatrix::new(vec![vec![1, 0], vec![0, 0]]).unwrap_err();
        assert_eq!(err, ModelError::ZeroRow { row: 2 });
        assert!(ZeroOneMatrix::new(vec![vec![2]]).is_err());
        assert!(ZeroOneMatrix::new(vec![vec![1, 1]]).is_err()); // not square
        // truncated views may have zero rows inside the window
        assert!(ZeroOneMatrix::truncated_view(vec![vec![1, 0], vec![0, 0]]).is_ok());
    }

    #[test]
    fn matrix_text_round_trip() {
        let a = example_matrix();
        let text = a.to_text();
        assert_eq!(text, "el-matrix 2\n11\n10\n");
        assert_eq!(ZeroOneMatrix::parse(&text).unwrap(), a);
        assert!(ZeroOneMatrix::parse("el-matrix 1\n2\n").is_err());
    }

    #[test]
    fn matrix_path_enumeration() {
        let a = example_matrix();
        let p2 = enumerate_paths(PathSource::Matrix(&a), 2).unwrap();
        assert_eq!(p2, vec![vec![1, 1], vec![1, 2], vec![2, 1]]);
        let p1 = enumerate_paths(PathSource::Matrix(&a), 1).unwrap();
        assert_eq!(p1, vec![vec![1], vec![2]]);
        let b = ZeroOneMatrix::new(vec![vec![0, 1], vec![1, 0]]).unwrap();
        let p3 = enumerate_paths(PathSource::Matrix(&b), 3).unwrap();
        assert_eq!(p3, vec![vec![1, 2, 1], vec![2, 1, 2]]);
        assert!(enumerate_paths(PathSource::Matrix(&a), 0).is_err());
    }

    #[test]
    fn path_bases_match_the_defining_constraint() {
        let a = example_matrix();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for len in 1..=4usize {
            let paths: std::collections::BTreeSet<Vec<usize>> =
                a.paths(len).into_iter().collect();
            for _ in 0..1000 {
                let candidate: Vec<usize> =
                    (0..len).map(|_| rng.gen_range(1..=2)).collect();
                let compatible = candidate
                    .windows(2)
                    .all(|w| a.entry(w[0], w[1]) == 1);
                assert_eq!(paths.contains(&candidate), compatible, "{candidate:?}");
            }
        }
    }

    #[test]
    fn fock_dimensions_and_defect() {
        let rep = fock_rep(FockArity::Finite(2), 3).unwrap();
        assert_eq!(rep.dim(), 1 + 2 + 4 + 8);
        // defect 1 - sum S_iS_i* is the rank one projection onto the empty word
        let defect = rep
            .evaluate(&parse_term_default("1 - S1.S1' - S2.S2'").unwrap())
            .unwrap();
        assert_eq!(defect.nnz(), 1);
        assert_eq!(rep.label(0), "()");
        // S_i*S_i projects onto words of length < 3: rank 7
        let sts = rep.evaluate(&parse_term_default("S1'.S1").unwrap()).unwrap();
        assert!(sts.is_diagonal());
        assert_eq!(sts.nnz(), 7);
        assert!(fock_rep(FockArity::Finite(1), 3).is_err());
        assert!(fock_rep(FockArity::Finite(2), 1).is_err());
    }

    #[test]
    fn fock_partial_isometry_holds_globally() {
        let rep = fock_rep(FockArity::Finite(2), 3).unwrap();
        for name in ["S1", "S2"] {
            let t = parse_term_default(&format!("{name}.{name}'.{name} - {name}")).unwrap();
            let op = rep.evaluate(&t).unwrap();
            assert!(op.is_zero(), "{name} not a global partial isometry");
        }
    }

    #[test]
    fn fock_interior_relations_are_exact() {
        let triple = cuntz_triple(2).unwrap();
        let rep = fock_rep(FockArity::Finite(2), 4).unwrap();
        for rel in triple.norm_relations() {
            let report =
                crate::matrep::check_norm(&rep, rel, 1e-12, CheckMode::Interior).unwrap();
            assert!(report.verdict.passed(), "{} failed: {}", rel.id, report.to_text());
            assert_eq!(report.residual, 0.0, "{}", rel.id);
        }
    }

    #[test]
    fn infinite_fock_net_converges_at_first_letter() {
        let rep = fock_rep(FockArity::Infinite { letters: 4 }, 3).unwrap();
        // (1 - sum_{i<=r} T_iT_i*) e_w vanishes exactly when r reaches the
        // first letter of w
        for r in 1..=4usize {
            let mut term = parse_term_default("1").unwrap();
            for i in 1..=r {
                term = term.sub(&parse_term_default(&format!("T{i}.T{i}'")).unwrap());
            }
            let op = rep.evaluate(&term).unwrap();
            let norms = op.column_norms();
            for (idx, label) in rep.basis_labels().iter().enumerate() {
                if !rep.interior_mask()[idx] {
                    continue;
                }
                let first: usize = label.split('.').next().unwrap().parse().unwrap();
                let expect = if first <= r { 0.0 } else { 1.0 };
                assert_eq!(norms[idx], expect, "r={r} label={label}");
            }
        }
    }

    #[test]
    fn pathspace_shift_action_follows_the_matrix() {
        let a = example_matrix();
        let rep = pathspace_rep(&a, 4).unwrap();
        let l1 = rep.operator("T1").unwrap();
        let idx = |label: &str| {
            rep.basis_labels().iter().position(|l| l == label).unwrap()
        };
        // L_1 eps_(2,1) = eps_(1,2,1), allowed since A_12 = 1
        let col = idx("2.1");
        let row = idx("1.2.1");
        assert!(l1.entries().iter().any(|&(r, c, _)| r == row && c == col));
        // L_2 eps_(2,1) = 0 since A_22 = 0
        let l2 = rep.operator("T2").unwrap();
        assert!(l2.entries().iter().all(|&(_, c, _)| c != col));
    }

    #[test]
    fn pathspace_ck_relations_exact_on_interior() {
        let a = example_matrix();
        let rep = pathspace_rep(&a, 5).unwrap();
        let mask = rep.interior_mask();
        // CK2 row 1: T1*T1 - T1T1* - T2T2*
        let ck2 = rep
            .evaluate(&parse_term_default("T1'.T1 - T1.T1' - T2.T2'").unwrap())
            .unwrap()
            .restrict(mask);
        assert!(ck2.is_zero());
        // CK1: 1 - sum T_iT_i* annihilates every path of length >= 2
        let ck1 = rep
            .evaluate(&parse_term_default("1 - T1.T1' - T2.T2'").unwrap())
            .unwrap();
        let norms = ck1.column_norms();
        for (idx, label) in rep.basis_labels().iter().enumerate() {
            let len = label.split('.').count();
            if len >= 2 {
                assert_eq!(norms[idx], 0.0, "{label}");
            }
        }
        assert!(pathspace_rep(&a, 2).is_err());
    }

    #[test]
    fn pathspace_serves_the_exel_laca_triple() {
        let a = example_matrix();
        let triple = exel_laca_triple(&a, true).unwrap();
        let rep = pathspace_rep(&a, 5).unwrap();
        for rel in triple.norm_relations() {
            let report =
                crate::matrep::check_norm(&rep, rel, 1e-12, CheckMode::Interior).unwrap();
            assert!(report.verdict.passed(), "{}", rel.id);
        }
    }

    #[test]
    fn ultragraph_construction_validations() {
        assert!(Ultragraph::new(
            vec!["v".into()],
            vec![("e".into(), "v".into(), vec![])],
        )
        .is_err());
        assert!(Ultragraph::new(
            vec!["v".into(), "v".into()],
            vec![],
        )
        .is_err());
        assert!(Ultragraph::new(
            vec!["v_1".into()],
            vec![],
        )
        .is_err()); // underscore would break projection name mangling
        let g = example_graph();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 4);
    }

    #[test]
    fn ultragraph_text_round_trip() {
        let g = example_graph();
        let text = g.to_text();
        let parsed = Ultragraph::parse(&text).unwrap();
        assert_eq!(parsed, g);
        assert!(Ultragraph::parse("edge e v -> {w}\n").is_err());
    }

    #[test]
    fn g0_closure_is_the_power_set_for_finite_vertices() {
        let single = Ultragraph::new(vec!["v".into()], vec![]).unwrap();
        let family = single.g0_closure();
        assert_eq!(family.len(), 2);
        assert!(family.contains(&BTreeSet::new()));

        let g = example_graph();
        let family = g.g0_closure();
        assert_eq!(family.len(), 8); // all subsets of three vertices
        let range_e: BTreeSet<usize> = [1usize, 2].into_iter().collect();
        assert!(family.contains(&range_e));
    }

    #[test]
    fn ultragraph_relations_hold_on_interior() {
        let g = example_graph();
        let rep = ultragraph_rep(&g, 4).unwrap();
        let mask = rep.interior_mask();

        // (1) p_empty = 0 and p_{A cap B} = p_A p_B exactly
        let p_empty = rep.operator("p_").unwrap();
        assert!(p_empty.is_zero());
        let p_vw = rep.operator("p_v_w").unwrap();
        let p_wu = rep.operator("p_w_u").unwrap();
        let p_w = rep.operator("p_w").unwrap();
        assert_eq!(&p_vw.matmul(p_wu).unwrap(), p_w);
        // p_{A cup B} = p_A + p_B - p_{A cap B}
        let p_vwu = rep.operator("p_v_w_u").unwrap();
        let union = p_vw.add(p_wu).unwrap().sub(p_w).unwrap();
        assert_eq!(&union, p_vwu);

        // (2) s_e* s_e = p_{r(e)} on the interior
        for e in 0..g.edge_count() {
            let s = rep.operator(&g.edge_generator(e).name).unwrap();
            let p_range = rep.operator(&g.set_projection_name(g.range(e))).unwrap();
            let diff = s.adjoint().matmul(s).unwrap().sub(p_range).unwrap().restrict(mask);
            assert!(diff.is_zero(), "edge {}", g.edge(e).name);
        }

        // (3) p_v = sum over s^{-1}(v) of s_e s_e* on the interior
        for v in 0..g.vertex_count() {
            let emitting: Vec<usize> =
                (0..g.edge_count()).filter(|&e| g.source(e) == v).collect();
            if emitting.is_empty() {
                continue;
            }
            let mut sum = SparseOperator::zero(rep.dim());
            for e in emitting {
                let s = rep.operator(&g.edge_generator(e).name).unwrap();
                sum = sum.add(&s.matmul(&s.adjoint()).unwrap()).unwrap();
            }
            let singleton: BTreeSet<usize> = [v].into_iter().collect();
            let p_v = rep.operator(&g.set_projection_name(&singleton)).unwrap();
            let diff = p_v.sub(&sum).unwrap().restrict(mask);
            assert!(diff.is_zero(), "vertex {}", g.vertex_name(v));
        }
        assert_eq!(
            operator_norm(&rep.operator("p_v_w_u").unwrap().clone(), 1e-10).unwrap(),
            1.0
        );
    }

    #[test]
    fn ultragraph_isolated_vertex_is_rejected() {
        let g = Ultragraph::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![("e".into(), "a".into(), vec!["b".into()])],
        )
        .unwrap();
        assert!(matches!(
            ultragraph_rep(&g, 3),
            Err(ModelError::IsolatedVertex { .. })
        ));
    }

    #[test]
    fn ultragraph_path_enumeration() {
        let g = example_graph();
        let p1 = enumerate_paths(PathSource::Graph(&g), 1).unwrap();
        assert_eq!(p1.len(), 4);
        let p2 = enumerate_paths(PathSource::Graph(&g), 2).unwrap();
        // e:{w,u} -> f,g ; f:{v} -> e,h ; g:{w} -> f ; h:{u} -> g
        assert_eq!(p2.len(), 6);
        for p in &p2 {
            let e0 = p[0] - 1;
            let e1 = p[1] - 1;
            assert!(g.range(e0).contains(&g.source(e1)));
        }
    }

    #[test]
    fn witness_for_single_projection() {
        let g = example_graph();
        let set: BTreeSet<usize> = [0usize, 1].into_iter().collect();
        let x = UltraMonomial::new(&g, vec![], set.clone(), vec![]).unwrap();
        let (y, report) = witness_span(&g, &[x]).unwrap();
        assert!(report.pass, "{:?}", report.failures);
        // Y consists of the atoms of {p_{v,w}}
        assert_eq!(y.len(), 1);
        assert_eq!(y[0].set, set);
    }

    #[test]
    fn witness_for_range_projection_monomial() {
        let g = example_graph();
        // s_e p_{r(e)} s_e*
        let x = UltraMonomial::new(&g, vec![0], g.range(0).clone(), vec![0]).unwrap();
        let (y, report) = witness_span(&g, &[x]).unwrap();
        assert!(report.pass, "{:?}", report.failures);
        assert!(!y.is_empty());
    }

    #[test]
    fn witness_closure_for_balanced_monomials() {
        let g = example_graph();
        let singleton_w: BTreeSet<usize> = [1usize].into_iter().collect();
        let xs = vec![
            // s_e p_w s_e*
            UltraMonomial::new(&g, vec![0], singleton_w.clone(), vec![0]).unwrap(),
            // s_e s_f p s_g* s_e* style: alpha = e.f, beta = e.g? f from w, g from u
            UltraMonomial::new(&g, vec![0, 1], g.range(1).clone(), vec![0, 2]).unwrap(),
            // a vertex projection
            UltraMonomial::new(&g, vec![], [0usize, 2].into_iter().collect(), vec![]).unwrap(),
        ];
        let (_, report) = witness_span(&g, &xs).unwrap();
        assert!(report.pass, "{:?}", report.failures);
        assert!(report.products_checked > 0);
    }

    #[test]
    fn witness_budget_is_enforced() {
        // four loops on one vertex: paths over F of length 5 explode
        let g = Ultragraph::new(
            vec!["v".into()],
            vec![
                ("a".into(), "v".into(), vec!["v".into()]),
                ("b".into(), "v".into(), vec!["v".into()]),
                ("c".into(), "v".into(), vec!["v".into()]),
                ("d".into(), "v".into(), vec!["v".into()]),
            ],
        )
        .unwrap();
        let v: BTreeSet<usize> = [0usize].into_iter().collect();
        let long = vec![0usize, 1, 2, 3, 0];
        let x = UltraMonomial::new(&g, long.clone(), v, long).unwrap();
        assert!(matches!(
            witness_span(&g, &[x]),
            Err(ModelError::WitnessBudget { .. })
        ));
    }

    #[test]
    fn monomial_products_match_model_evaluation() {
        let g = example_graph();
        let rep = ultragraph_rep(&g, 4).unwrap();
        let mask = rep.interior_mask();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let family = g.g0_closure();
        let mut tested = 0;
        while tested < 40 {
            let al = rng.gen_range(0..=2usize);
            let bl = rng.gen_range(0..=2usize);
            let pick_path = |rng: &mut ChaCha8Rng, l: usize| -> Option<Vec<usize>> {
                if l == 0 {
                    return Some(vec![]);
                }
                let all = g.paths(l);
                if all.is_empty() {
                    None
                } else {
                    Some(all[rng.gen_range(0..all.len())].clone())
                }
            };
            let (Some(a), Some(b), Some(c2), Some(d)) = (
                pick_path(&mut rng, al),
                pick_path(&mut rng, al),
                pick_path(&mut rng, bl),
                pick_path(&mut rng, bl),
            ) else {
                continue;
            };
            let s1 = family[rng.gen_range(0..family.len())].clone();
            let s2 = family[rng.gen_range(0..family.len())].clone();
            let m1 = UltraMonomial::new(&g, a, s1, b).unwrap();
            let m2 = UltraMonomial::new(&g, c2, s2, d).unwrap();
            let (Some(n1), Some(n2)) = (m1.normalized(&g), m2.normalized(&g)) else {
                continue;
            };
            tested += 1;
            let symbolic = n1.mul(&n2, &g);
            let numeric = rep
                .evaluate(&n1.to_term(&g))
                .unwrap()
                .matmul(&rep.evaluate(&n2.to_term(&g)).unwrap())
                .unwrap();
            let expected = match symbolic {
                Some(m) => rep.evaluate(&m.to_term(&g)).unwrap(),
                None => SparseOperator::zero(rep.dim()),
            };
            // products agree on the interior window
            let diff = numeric.sub(&expected).unwrap().restrict(mask);
            assert!(
                diff.max_abs() < 1e-12,
                "monomial product mismatch: {} * {}",
                n1.display(&g),
                n2.display(&g)
            );
        }
    }
}
