//! Presentation file format.
//!
//! Line oriented; `#` starts a comment; terms are double-quoted. A file names
//! either a built-in triple or declares its own generators/relations/nets,
//! and then picks a model:
//!
//! ```text
//! triple cuntz 2
//! triple cuntz-infinity letters=8
//! triple exel-laca <matrix-file> unital|nonunital
//!
//! generator <name> <kind>        # projection | partial-isometry | isometry | unit
//! relation <id> <bound> "<term>"
//! net <id> naturals|subsets certificate (<bound> <tag> | none)
//!     base "<term>" summands "<t1>" "<t2>" ...
//!
//! model fock L=4
//! model pathspace L=5
//! model ultragraph <graph-file> L=4
//! model files dim=<n> interior=<lo>-<hi> <gen>=<coo-file> ...
//! ```
//!
//! Every SOT net carries a certificate or says `certificate none`, in which
//! case the SOT check refuses and the relation is reported as failed.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use ucstar::matrep::Representation;
use ucstar::models::{
    fock_rep, pathspace_rep, ultragraph_rep, FockArity, Ultragraph, ZeroOneMatrix,
};
use ucstar::presentation::{
    cuntz_infinity_triple_with_letters, cuntz_triple, exel_laca_triple, BoundCertificate,
    GeneratingTriple, IndexScheme, Justification, NetIndex, NormRelation, SotNet,
};
use ucstar::sparse::SparseOperator;
use ucstar::syntax::TermParser;
use ucstar::term::{Generator, GeneratorKind};

#[derive(Debug)]
pub struct FileError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for FileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

fn err(line: usize, message: impl Into<String>) -> FileError {
    FileError { line, message: message.into() }
}

#[derive(Debug, Clone)]
enum TripleSpec {
    Cuntz(usize),
    CuntzInfinity { letters: usize },
    ExelLaca { matrix: PathBuf, unital: bool },
}

#[derive(Debug, Clone)]
enum ModelSpec {
    Fock { depth: usize },
    Pathspace { depth: usize },
    UltragraphModel { graph: PathBuf, depth: usize },
    Files { dim: usize, interior: (usize, usize), ops: Vec<(String, PathBuf)> },
}

struct RawNet {
    id: String,
    subsets: bool,
    certificate: Option<(String, Justification)>,
    base: String,
    summands: Vec<String>,
    line: usize,
}

/// A parsed presentation file, before model construction.
pub struct PresentationFile {
    base_dir: PathBuf,
    triple_spec: Option<TripleSpec>,
    generators: Vec<Generator>,
    relations: Vec<(String, String, String, usize)>,
    nets: Vec<RawNet>,
    model: Option<ModelSpec>,
}

/// Overrides from the command line: truncation depth and letter count.
#[derive(Debug, Default, Clone, Copy)]
pub struct Overrides {
    pub depth: Option<usize>,
    pub letters: Option<usize>,
}

/// Split a line into tokens, honoring double quotes.
fn tokenize(line: &str) -> Result<Vec<String>, String> {
    let mut tokens = Vec::new();
    let mut chars = line.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '#' {
            break;
        } else if c == '"' {
            chars.next();
            let mut tok = String::new();
            loop {
                match chars.next() {
                    Some('"') => break,
                    Some(ch) => tok.push(ch),
                    None => return Err("unterminated quote".into()),
                }
            }
            tokens.push(tok);
        } else {
            let mut tok = String::new();
            while let Some(&ch) = chars.peek() {
                if ch.is_whitespace() || ch == '"' || ch == '#' {
                    break;
                }
                tok.push(ch);
                chars.next();
            }
            tokens.push(tok);
        }
    }
    Ok(tokens)
}

fn parse_key_usize(tok: &str, key: &str) -> Option<usize> {
    tok.strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .and_then(|v| v.parse().ok())
}

fn parse_bound(text: &str) -> Option<num_rational::BigRational> {
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n, d),
        None => (text, "1"),
    };
    let n: num_bigint::BigInt = num.parse().ok()?;
    let d: num_bigint::BigInt = den.parse().ok()?;
    if d == 0.into() {
        return None;
    }
    Some(num_rational::BigRational::new(n, d))
}

impl PresentationFile {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, FileError> {
        let mut file = PresentationFile {
            base_dir: base_dir.to_path_buf(),
            triple_spec: None,
            generators: Vec::new(),
            relations: Vec::new(),
            nets: Vec::new(),
            model: None,
        };
        for (lineno, raw) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let tokens = tokenize(raw).map_err(|m| err(lineno, m))?;
            if tokens.is_empty() {
                continue;
            }
            match tokens[0].as_str() {
                "triple" => file.parse_triple(&tokens, lineno)?,
                "generator" => {
                    if tokens.len() != 3 {
                        return Err(err(lineno, "expected `generator <name> <kind>`"));
                    }
                    let kind = GeneratorKind::parse(&tokens[2])
                        .ok_or_else(|| err(lineno, format!("unknown kind `{}`", tokens[2])))?;
                    file.generators.push(Generator::new(tokens[1].clone(), kind));
                }
                "relation" => {
                    if tokens.len() != 4 {
                        return Err(err(lineno, "expected `relation <id> <bound> \"<term>\"`"));
                    }
                    file.relations.push((
                        tokens[1].clone(),
                        tokens[2].clone(),
                        tokens[3].clone(),
                        lineno,
                    ));
                }
                "net" => file.parse_net(&tokens, lineno)?,
                "model" => file.parse_model(&tokens, lineno)?,
                other => return Err(err(lineno, format!("unrecognized directive `{other}`"))),
            }
        }
        if file.triple_spec.is_some() && !file.generators.is_empty() {
            return Err(err(0, "a built-in triple cannot be mixed with manual generators"));
        }
        Ok(file)
    }

    fn parse_triple(&mut self, tokens: &[String], lineno: usize) -> Result<(), FileError> {
        if self.triple_spec.is_some() {
            return Err(err(lineno, "duplicate `triple` directive"));
        }
        let spec = match tokens.get(1).map(String::as_str) {
            Some("cuntz") => {
                let n: usize = tokens
                    .get(2)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err(lineno, "expected `triple cuntz <n>`"))?;
                TripleSpec::Cuntz(n)
            }
            Some("cuntz-infinity") => {
                let letters = tokens
                    .get(2)
                    .map(|t| {
                        parse_key_usize(t, "letters")
                            .ok_or_else(|| err(lineno, "expected `letters=<m>`"))
                    })
                    .transpose()?
                    .unwrap_or(ucstar::presentation::DEFAULT_INFINITY_LETTERS);
                TripleSpec::CuntzInfinity { letters }
            }
            Some("exel-laca") => {
                let matrix = tokens
                    .get(2)
                    .ok_or_else(|| err(lineno, "expected a matrix file"))?;
                let unital = match tokens.get(3).map(String::as_str) {
                    Some("unital") => true,
                    Some("nonunital") => false,
                    _ => return Err(err(lineno, "expected `unital` or `nonunital`")),
                };
                TripleSpec::ExelLaca { matrix: PathBuf::from(matrix), unital }
            }
            _ => return Err(err(lineno, "unknown triple; use cuntz, cuntz-infinity or exel-laca")),
        };
        self.triple_spec = Some(spec);
        Ok(())
    }

    fn parse_net(&mut self, tokens: &[String], lineno: usize) -> Result<(), FileError> {
        // net <id> naturals|subsets certificate (<bound> <tag> | none)
        //     base "<term>" summands "<t>"...
        let id = tokens.get(1).ok_or_else(|| err(lineno, "missing net id"))?.clone();
        let subsets = match tokens.get(2).map(String::as_str) {
            Some("naturals") => false,
            Some("subsets") => true,
            _ => return Err(err(lineno, "expected `naturals` or `subsets`")),
        };
        if tokens.get(3).map(String::as_str) != Some("certificate") {
            return Err(err(lineno, "expected `certificate`"));
        }
        let (certificate, mut pos) = match tokens.get(4).map(String::as_str) {
            Some("none") => (None, 5),
            Some(bound) => {
                let tag = tokens
                    .get(5)
                    .and_then(|t| Justification::parse(t))
                    .ok_or_else(|| err(lineno, "expected a justification tag"))?;
                (Some((bound.to_string(), tag)), 6)
            }
            None => return Err(err(lineno, "expected a certificate bound or `none`")),
        };
        if tokens.get(pos).map(String::as_str) != Some("base") {
            return Err(err(lineno, "expected `base \"<term>\"`"));
        }
        let base = tokens
            .get(pos + 1)
            .ok_or_else(|| err(lineno, "missing base term"))?
            .clone();
        pos += 2;
        if tokens.get(pos).map(String::as_str) != Some("summands") {
            return Err(err(lineno, "expected `summands \"<term>\"...`"));
        }
        let summands: Vec<String> = tokens[pos + 1..].to_vec();
        if summands.is_empty() {
            return Err(err(lineno, "a net needs at least one summand"));
        }
        self.nets.push(RawNet { id, subsets, certificate, base, summands, line: lineno });
        Ok(())
    }

    fn parse_model(&mut self, tokens: &[String], lineno: usize) -> Result<(), FileError> {
        if self.model.is_some() {
            return Err(err(lineno, "duplicate `model` directive"));
        }
        let depth_of = |tok: Option<&String>| -> Result<usize, FileError> {
            tok.and_then(|t| parse_key_usize(t, "L"))
                .ok_or_else(|| err(lineno, "expected `L=<depth>`"))
        };
        let spec = match tokens.get(1).map(String::as_str) {
            Some("fock") => ModelSpec::Fock { depth: depth_of(tokens.get(2))? },
            Some("pathspace") => ModelSpec::Pathspace { depth: depth_of(tokens.get(2))? },
            Some("ultragraph") => {
                let graph = tokens
                    .get(2)
                    .ok_or_else(|| err(lineno, "expected a graph file"))?;
                ModelSpec::UltragraphModel {
                    graph: PathBuf::from(graph),
                    depth: depth_of(tokens.get(3))?,
                }
            }
            Some("files") => {
                let dim = tokens
                    .get(2)
                    .and_then(|t| parse_key_usize(t, "dim"))
                    .ok_or_else(|| err(lineno, "expected `dim=<n>`"))?;
                let interior_tok = tokens
                    .get(3)
                    .and_then(|t| t.strip_prefix("interior="))
                    .ok_or_else(|| err(lineno, "expected `interior=<lo>-<hi>`"))?;
                let (lo, hi) = interior_tok
                    .split_once('-')
                    .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
                    .ok_or_else(|| err(lineno, "expected `interior=<lo>-<hi>`"))?;
                let mut ops = Vec::new();
                for tok in &tokens[4..] {
                    let (name, path) = tok
                        .split_once('=')
                        .ok_or_else(|| err(lineno, "expected `<gen>=<file>`"))?;
                    ops.push((name.to_string(), PathBuf::from(path)));
                }
                if ops.is_empty() {
                    return Err(err(lineno, "a files model needs operator assignments"));
                }
                ModelSpec::Files { dim, interior: (lo, hi), ops }
            }
            _ => {
                return Err(err(
                    lineno,
                    "unknown model; use fock, pathspace, ultragraph or files",
                ))
            }
        };
        self.model = Some(spec);
        Ok(())
    }

    fn load_matrix(&self, path: &Path) -> Result<ZeroOneMatrix, FileError> {
        let full = self.base_dir.join(path);
        let text = std::fs::read_to_string(&full)
            .map_err(|e| err(0, format!("cannot read {}: {e}", full.display())))?;
        ZeroOneMatrix::parse(&text).map_err(|e| err(0, e.to_string()))
    }

    /// Materialize the triple and the model, applying overrides.
    pub fn build(
        &self,
        overrides: Overrides,
    ) -> Result<(GeneratingTriple, Representation), FileError> {
        let triple = match &self.triple_spec {
            Some(TripleSpec::Cuntz(n)) => {
                cuntz_triple(*n).map_err(|e| err(0, e.to_string()))?
            }
            Some(TripleSpec::CuntzInfinity { letters }) => {
                let m = overrides.letters.unwrap_or(*letters);
                cuntz_infinity_triple_with_letters(m).map_err(|e| err(0, e.to_string()))?
            }
            Some(TripleSpec::ExelLaca { matrix, unital }) => {
                let a = self.load_matrix(matrix)?;
                exel_laca_triple(&a, *unital).map_err(|e| err(0, e.to_string()))?
            }
            None => self.manual_triple()?,
        };

        let model = self.model.as_ref().ok_or_else(|| err(0, "missing `model` directive"))?;
        let rep = match model {
            ModelSpec::Fock { depth } => {
                let depth = overrides.depth.unwrap_or(*depth);
                let arity = match &self.triple_spec {
                    Some(TripleSpec::Cuntz(n)) => FockArity::Finite(*n),
                    Some(TripleSpec::CuntzInfinity { letters }) => FockArity::Infinite {
                        letters: overrides.letters.unwrap_or(*letters),
                    },
                    _ => return Err(err(0, "a fock model needs a cuntz triple")),
                };
                fock_rep(arity, depth).map_err(|e| err(0, e.to_string()))?
            }
            ModelSpec::Pathspace { depth } => {
                let depth = overrides.depth.unwrap_or(*depth);
                let Some(TripleSpec::ExelLaca { matrix, .. }) = &self.triple_spec else {
                    return Err(err(0, "a pathspace model needs an exel-laca triple"));
                };
                let a = self.load_matrix(matrix)?;
                pathspace_rep(&a, depth).map_err(|e| err(0, e.to_string()))?
            }
            ModelSpec::UltragraphModel { graph, depth } => {
                let depth = overrides.depth.unwrap_or(*depth);
                let full = self.base_dir.join(graph);
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| err(0, format!("cannot read {}: {e}", full.display())))?;
                let g = Ultragraph::parse(&text).map_err(|e| err(0, e.to_string()))?;
                ultragraph_rep(&g, depth).map_err(|e| err(0, e.to_string()))?
            }
            ModelSpec::Files { dim, interior, ops } => {
                let mut assign = BTreeMap::new();
                for (name, path) in ops {
                    let full = self.base_dir.join(path);
                    let text = std::fs::read_to_string(&full)
                        .map_err(|e| err(0, format!("cannot read {}: {e}", full.display())))?;
                    let op = SparseOperator::from_coo_text(&text)
                        .map_err(|e| err(0, e.to_string()))?;
                    if op.dim() != *dim {
                        return Err(err(0, format!("operator {name} has dim {}", op.dim())));
                    }
                    assign.insert(name.clone(), op);
                }
                let (lo, hi) = *interior;
                let mask: Vec<bool> = (0..*dim).map(|i| i >= lo && i <= hi).collect();
                Representation::new(
                    (0..*dim).map(|i| i.to_string()).collect(),
                    assign,
                    mask,
                    "files",
                )
                .map_err(|e| err(0, e.to_string()))?
            }
        };
        Ok((triple, rep))
    }

    fn manual_triple(&self) -> Result<GeneratingTriple, FileError> {
        if self.generators.is_empty() {
            return Err(err(0, "no triple and no generators declared"));
        }
        let parser = TermParser::new(self.generators.iter().cloned());
        let mut relations = Vec::new();
        for (id, bound, term, line) in &self.relations {
            let term = parser
                .parse(term)
                .map_err(|e| err(*line, e.to_string()))?;
            let bound = parse_bound(bound)
                .ok_or_else(|| err(*line, format!("bad bound `{bound}`")))?;
            relations.push(
                NormRelation::new(id.clone(), term, bound)
                    .map_err(|e| err(*line, e.to_string()))?,
            );
        }
        let mut nets = Vec::new();
        for raw in &self.nets {
            let base = parser
                .parse(&raw.base)
                .map_err(|e| err(raw.line, e.to_string()))?;
            let summands: Vec<_> = raw
                .summands
                .iter()
                .map(|s| parser.parse(s).map_err(|e| err(raw.line, e.to_string())))
                .collect::<Result<_, _>>()?;
            let scheme = if raw.subsets {
                IndexScheme::FiniteSubsets {
                    labels: (1..=summands.len()).map(|i| i.to_string()).collect(),
                }
            } else {
                IndexScheme::Naturals
            };
            let certificate = raw
                .certificate
                .as_ref()
                .map(|(bound, tag)| {
                    Ok::<_, FileError>(BoundCertificate {
                        bound: parse_bound(bound)
                            .ok_or_else(|| err(raw.line, format!("bad bound `{bound}`")))?,
                        justification: *tag,
                    })
                })
                .transpose()?;
            nets.push(SotNet { id: raw.id.clone(), scheme, base, summands, certificate });
        }
        GeneratingTriple::new(self.generators.clone(), relations, nets)
            .map_err(|e| err(0, e.to_string()))
    }
}

/// Interpret a comma-separated ascending list of positive integers as a
/// schedule for the given net: values for naturals schemes, prefix sizes for
/// subset schemes.
pub fn schedule_for(net: &SotNet, spec: &str) -> Result<Vec<NetIndex>, String> {
    let mut values = Vec::new();
    for part in spec.split(',') {
        let v: usize = part
            .trim()
            .parse()
            .map_err(|_| format!("bad schedule entry `{part}`"))?;
        if v == 0 {
            return Err("schedule entries must be positive".into());
        }
        values.push(v);
    }
    Ok(match net.scheme {
        IndexScheme::Naturals => values.into_iter().map(|v| NetIndex::Nat(v as u64)).collect(),
        IndexScheme::FiniteSubsets { .. } => values
            .into_iter()
            .map(|v| NetIndex::Subset((1..=v).collect()))
            .collect(),
    })
}
