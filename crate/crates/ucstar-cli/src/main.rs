//! `ucstar` — check C*-algebra presentations against finite-dimensional
//! models, print projection atoms, and normalize terms.
//!
//! Term syntax: generator names are `[a-zA-Z][a-zA-Z0-9_]*`, `'` is the star,
//! `.` the product, `+`/`-` form sums, and coefficients are exact Gaussian
//! rationals (`2`, `1/2`, `3i`, `(2+3i)`) followed by `*`. The literal `1`
//! denotes the unit generator. Examples: `s.s'.s`, `(2+3i)*s.t'.p`,
//! `S1.S1' + S2.S2' - 1`.
//!
//! Exit codes for `check`: 0 when every relation passes (globally or on the
//! model's interior), 1 when any check fails, 2 on parse or configuration
//! errors.

mod pres_file;

use clap::{Parser, Subcommand, ValueEnum};
use pres_file::{schedule_for, Overrides, PresentationFile};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use ucstar::lattice::{atom_indices, atom_term_over, atoms_numeric, MAX_PROJECTIONS};
use ucstar::matrep::{
    check_norm, check_sot, reports_to_json, CheckMode, CheckReport, Verdict,
};
use ucstar::models::ZeroOneMatrix;
use ucstar::rewrite::{
    commuting_projection_rules, el_rules_rowfinite, normalize, partial_isometry_rules,
    projection_rules, unit_rules, RuleSet,
};
use ucstar::sparse::SparseOperator;
use ucstar::syntax::TermParser;
use ucstar::term::{Generator, GeneratorKind};
use ucstar::MatrepError;

#[derive(Parser)]
#[command(name = "ucstar", version, about = "C*-presentation workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Subcommand)]
enum Command {
    /// Check every relation of a presentation file against its model
    Check {
        file: PathBuf,
        /// Acceptance slack for norm relations
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Per-vector convergence threshold for SOT checks
        #[arg(long, default_value_t = 1e-10)]
        eps: f64,
        /// Ascending schedule, e.g. `1,2,4,8` (values on naturals, prefix
        /// sizes on subset schemes); required when the presentation has nets
        #[arg(long)]
        schedule: Option<String>,
        /// Override the model truncation depth L
        #[arg(long)]
        depth: Option<usize>,
        /// Override the materialized letter count of an infinite family
        #[arg(long)]
        letters: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Corrupt the named generator's operator (negative control)
        #[arg(long)]
        corrupt: Option<String>,
    },
    /// Print the 2^n - 1 atoms and reconstruction identities of a commuting
    /// projection family: `atoms 3` or `atoms q1,q2,q3`, or numeric atoms
    /// from operator files with `--numeric f1.coo,f2.coo --out-dir atoms/`
    Atoms {
        spec: String,
        #[arg(long)]
        numeric: Option<String>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Normalize a term under a named rule set: pi, proj, proj-comm or
    /// el:<matrix-file>
    Normalize {
        term: String,
        #[arg(long)]
        rules: String,
    },
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("UCSTAR_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    match cli.command {
        Command::Check { file, tol, eps, schedule, depth, letters, format, corrupt } => {
            cmd_check(&file, tol, eps, schedule.as_deref(), depth, letters, format, corrupt)
        }
        Command::Atoms { spec, numeric, out_dir } => cmd_atoms(&spec, numeric, out_dir),
        Command::Normalize { term, rules } => cmd_normalize(&term, &rules),
    }
}

fn config_error(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(2)
}

#[allow(clippy::too_many_arguments)]
fn cmd_check(
    file: &Path,
    tol: f64,
    eps: f64,
    schedule: Option<&str>,
    depth: Option<usize>,
    letters: Option<usize>,
    format: Format,
    corrupt: Option<String>,
) -> ExitCode {
    let text = match std::fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => return config_error(format!("cannot read {}: {e}", file.display())),
    };
    let base_dir = file.parent().unwrap_or(Path::new("."));
    let parsed = match PresentationFile::parse(&text, base_dir) {
        Ok(p) => p,
        Err(e) => return config_error(e),
    };
    let (triple, mut rep) = match parsed.build(Overrides { depth, letters }) {
        Ok(pair) => pair,
        Err(e) => return config_error(e),
    };
    if let Some(name) = corrupt {
        let Some(op) = rep.operator(&name) else {
            return config_error(format!("cannot corrupt unknown generator `{name}`"));
        };
        let mut entries = op.entries().to_vec();
        entries.push((0, 0, num_complex::Complex64::new(1e-3, 0.0)));
        let corrupted = match SparseOperator::from_accumulated(op.dim(), entries) {
            Ok(op) => op,
            Err(e) => return config_error(e),
        };
        rep = match rep.with_operator(&name, corrupted) {
            Ok(r) => r,
            Err(e) => return config_error(e),
        };
    }

    if !triple.sot_nets().is_empty() && schedule.is_none() {
        return config_error("the presentation has SOT nets; supply --schedule explicitly");
    }

    let mode = if rep.interior_fraction() < 1.0 { CheckMode::Interior } else { CheckMode::Global };
    let mut reports: Vec<CheckReport> = Vec::new();
    for rel in triple.norm_relations() {
        match check_norm(&rep, rel, tol, mode) {
            Ok(r) => reports.push(r),
            Err(e) => return config_error(format!("{}: {e}", rel.id)),
        }
    }
    for net in triple.sot_nets() {
        let spec = schedule.expect("checked above");
        let sched = match schedule_for(net, spec) {
            Ok(s) => s,
            Err(e) => return config_error(e),
        };
        match check_sot(&rep, net, &sched, eps) {
            Ok(r) => reports.push(r),
            Err(MatrepError::MissingCertificate(id)) => {
                // refusal: reported as a failed check, not a config error
                reports.push(CheckReport {
                    id,
                    kind: "sot".into(),
                    verdict: Verdict::Fail,
                    residual: f64::INFINITY,
                    schedule: Vec::new(),
                    interior_fraction: rep.interior_fraction(),
                    tolerance: eps,
                    model: rep.model_tag().to_string(),
                    witness: Some("net has no boundedness certificate; refused".into()),
                    convergence: Vec::new(),
                });
            }
            Err(e) => return config_error(format!("{}: {e}", net.id)),
        }
    }

    match format {
        Format::Text => {
            for r in &reports {
                println!("{}", r.to_text());
            }
        }
        Format::Machine => println!("{}", reports_to_json(&reports)),
    }
    if reports.iter().all(|r| r.verdict.passed()) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn cmd_atoms(spec: &str, numeric: Option<String>, out_dir: Option<PathBuf>) -> ExitCode {
    if let Some(files) = numeric {
        return cmd_atoms_numeric(&files, out_dir);
    }
    let gens: Vec<Generator> = if let Ok(n) = spec.parse::<usize>() {
        (1..=n).map(|i| Generator::projection(format!("q{i}"))).collect()
    } else {
        spec.split(',')
            .map(|name| Generator::projection(name.trim().to_string()))
            .collect()
    };
    let n = gens.len();
    if n == 0 || n > MAX_PROJECTIONS {
        return config_error(format!("need between 1 and {MAX_PROJECTIONS} projections, got {n}"));
    }
    let indices = match atom_indices(n) {
        Ok(ix) => ix,
        Err(e) => return config_error(e),
    };
    let rules = match commuting_projection_rules(&gens) {
        Ok(r) => r,
        Err(e) => return config_error(e),
    };
    let mut atoms = Vec::with_capacity(indices.len());
    for idx in &indices {
        let term = match atom_term_over(idx, &gens) {
            Ok(t) => t,
            Err(e) => return config_error(e),
        };
        let members: Vec<String> = idx.members.iter().map(|i| i.to_string()).collect();
        println!("atom{{{}}} = {}", members.join(","), term);
        atoms.push(term);
    }
    for (i, g) in gens.iter().enumerate() {
        let mut sum = ucstar::term::Term::zero();
        let mut names = Vec::new();
        for (idx, atom) in indices.iter().zip(&atoms) {
            if idx.members.contains(&(i + 1)) {
                sum = sum.add(atom);
                let members: Vec<String> = idx.members.iter().map(|i| i.to_string()).collect();
                names.push(format!("atom{{{}}}", members.join(",")));
            }
        }
        let diff = sum.sub(&ucstar::term::Term::from_generator(g.clone()));
        let verified = match normalize(&diff, &rules) {
            Ok(nf) => nf.is_zero(),
            Err(e) => return config_error(e),
        };
        println!(
            "{} = {}   [{}]",
            g.name,
            names.join(" + "),
            if verified { "verified" } else { "NOT VERIFIED" }
        );
        if !verified {
            return ExitCode::from(1);
        }
    }
    ExitCode::SUCCESS
}

fn cmd_atoms_numeric(files: &str, out_dir: Option<PathBuf>) -> ExitCode {
    let mut ops = Vec::new();
    for path in files.split(',') {
        let text = match std::fs::read_to_string(path.trim()) {
            Ok(t) => t,
            Err(e) => return config_error(format!("cannot read {path}: {e}")),
        };
        match SparseOperator::from_coo_text(&text) {
            Ok(op) => ops.push(op),
            Err(e) => return config_error(format!("{path}: {e}")),
        }
    }
    let atoms = match atoms_numeric(&ops) {
        Ok(a) => a,
        Err(e) => return config_error(e),
    };
    let n = ops.len();
    let dir = out_dir.unwrap_or_else(|| PathBuf::from("."));
    if let Err(e) = std::fs::create_dir_all(&dir) {
        return config_error(format!("cannot create {}: {e}", dir.display()));
    }
    for (k, atom) in atoms.iter().enumerate() {
        let mask = k + 1;
        let members: Vec<String> = (1..=n)
            .filter(|i| mask & (1 << (i - 1)) != 0)
            .map(|i| i.to_string())
            .collect();
        let name = format!("atom_{}.coo", members.join("_"));
        let path = dir.join(&name);
        if let Err(e) = std::fs::write(&path, atom.to_coo_text()) {
            return config_error(format!("cannot write {}: {e}", path.display()));
        }
        println!("atom{{{}}} -> {} (nnz {})", members.join(","), path.display(), atom.nnz());
    }
    ExitCode::SUCCESS
}

fn ruleset_by_name(name: &str) -> Result<(RuleSet, TermParser), String> {
    let err = |e: ucstar::RewriteError| e.to_string();
    match name {
        "pi" => {
            // rules are instantiated per generator, so give the parser a pool
            // wide enough for ad hoc terms
            let gens: Vec<Generator> = common_names()
                .into_iter()
                .map(Generator::partial_isometry)
                .collect();
            let rs = partial_isometry_rules(&gens)
                .map_err(err)?
                .chain(unit_rules().map_err(err)?);
            Ok((rs, TermParser::with_default(GeneratorKind::PartialIsometry)))
        }
        "proj" => {
            let gens: Vec<Generator> =
                common_names().into_iter().map(Generator::projection).collect();
            let rs = projection_rules(&gens).map_err(err)?.chain(unit_rules().map_err(err)?);
            Ok((rs, TermParser::with_default(GeneratorKind::Projection)))
        }
        "proj-comm" => {
            let gens: Vec<Generator> =
                common_names().into_iter().map(Generator::projection).collect();
            let rs =
                commuting_projection_rules(&gens).map_err(err)?.chain(unit_rules().map_err(err)?);
            Ok((rs, TermParser::with_default(GeneratorKind::Projection)))
        }
        other => {
            let path = other
                .strip_prefix("el:")
                .ok_or_else(|| format!("unknown rule set `{other}`"))?;
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {path}: {e}"))?;
            let a = ZeroOneMatrix::parse(&text).map_err(|e| e.to_string())?;
            let rs = el_rules_rowfinite(&a).map_err(|e| e.to_string())?;
            let mut parser = TermParser::with_default(GeneratorKind::PartialIsometry);
            for i in 1..=a.size() {
                parser.declare(a.generator(i));
            }
            Ok((rs, parser))
        }
    }
}

/// Names the ad hoc rule sets instantiate rules for: single letters plus a
/// small indexed family.
fn common_names() -> Vec<String> {
    let mut names: Vec<String> = ('a'..='z').map(|c| c.to_string()).collect();
    for base in ["S", "T", "q", "p"] {
        for i in 1..=9 {
            names.push(format!("{base}{i}"));
        }
    }
    names
}

fn cmd_normalize(term: &str, rules: &str) -> ExitCode {
    let (rs, parser) = match ruleset_by_name(rules) {
        Ok(pair) => pair,
        Err(e) => return config_error(e),
    };
    let parsed = match parser.parse(term) {
        Ok(t) => t,
        Err(e) => return config_error(e),
    };
    match normalize(&parsed, &rs) {
        Ok(nf) => {
            println!("{nf}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
