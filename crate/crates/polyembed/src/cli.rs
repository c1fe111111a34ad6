//! Problem files and the command-line driver.
//!
//! A problem file is a line-oriented script: it declares field towers,
//! polynomial rings, generator lists, and derivations, then states exactly
//! one task. The driver parses the file, hands the task to the library,
//! re-verifies the result, and emits either a JSON report with stable key
//! order or a human-readable narrative.
//!
//! # Grammar
//!
//! Each declaration is complete on a single line; `#` starts a comment that
//! runs to the end of the line. Blank lines are ignored.
//!
//! ```text
//! field k = Q
//! extend K = k adjoin a minpoly a^2 - 2
//! extend L = K adjoin u
//! ring B = K[s]
//! ring P = k[x, y]
//! gens R in B = { a*s^2, a*s^3 }
//! derivation D on P = { x -> 0, y -> x }
//! derivation E on R adjoin x = { a*s^2 -> 0, a*s^3 -> 0, x -> 1 }
//! task embed R bound=10 seed=1 retries=8
//! ```
//!
//! `field` introduces the rationals under a chosen name. `extend` adjoins
//! one generator to an existing tower: with a `minpoly` clause the
//! extension is algebraic, without one it is transcendental (at most one
//! transcendental generator is supported). `ring` declares a polynomial
//! ring over a tower; `gens` declares a named subalgebra by a list of
//! generators inside a univariate ring. `derivation … on <ring>` maps every
//! ring variable; `derivation … on <gens> [adjoin x, …]` maps every
//! declared generator and every adjoined variable, where each left-hand
//! side is either an adjoined variable or an expression equal to one of the
//! generators.
//!
//! All right-hand sides share one arithmetic sub-grammar: `+`, `-`
//! (binary and unary), `*`, `^` with a nonnegative integer literal
//! exponent, parentheses, rational literals such as `3/2` (written without
//! spaces around the slash), and declared names. There is no general
//! division operator and no implicit multiplication. Inside an expression a
//! name resolves to a ring variable first and otherwise to a tower
//! generator.
//!
//! # Tasks
//!
//! ```text
//! task embed R [bound=N] [seed=S] [retries=R]
//! task sagbi R [bound=N]
//! task normalize R [over k] [bound=N]
//! task conductor R [over k] [bound=N]
//! task lnd D [bound=N]
//! task cancel E [bound=N]
//! task verify R cert="cert.json" [bound=N] [seed=S] [retries=R]
//! ```
//!
//! `over` names a declared tower to use as the coefficient field (it must
//! be a prefix of the ring's tower). `verify` replays the embedding task
//! for `R` deterministically, compares the replayed certificate with the
//! JSON stored in the `cert` file (either a bare certificate object or a
//! full report, whose `payload` is then used; the path is resolved
//! relative to the problem file), and re-runs every certificate check.
//!
//! Numeric options may also be given as command-line flags, which override
//! the values in the file. Defaults: `bound` for the embedding task comes
//! from the presentation (twice the maximum generator degree plus the
//! conductor exponent of the degree semigroup) and is `12` for all other
//! tasks; `seed=0`; `retries` uses the embedding engine's default cap. The
//! effective values are echoed in the report.
//!
//! # Reports and exit codes
//!
//! JSON reports have stable key order and contain no timing data, so a
//! rerun with the same input and seed is byte-identical. Wall-clock time is
//! printed to stderr. The process exit code classifies the outcome:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | the task ran and its result passed verification |
//! | 1 | the result failed verification or the derivation broke down |
//! | 2 | the problem file (or an input file) could not be read or parsed |
//! | 3 | the input lies outside the supported class |

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use num::{BigInt, BigRational, ToPrimitive, Zero};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::embed::{
    construct_embedding, verify_certificate, EmbedError, EmbeddingProblem,
};
use crate::fields::{FieldError, FieldTower};
use crate::graded::{GradedError, SubalgebraPresentation};
use crate::lnd::{
    cancellation_trace, default_nilpotency_bound, is_locally_nilpotent, LndError,
    NilpotencyVerdict, PolyDerivation,
};
use crate::mpoly::{MPoly, MPolyRing};
use crate::normalize::{conductor, normalize_curve, ConductorResult, NormalizeError};
use crate::unipoly::UniPoly;

/// Default filtration / iteration bound for every task except `embed`,
/// which derives its own default from the presentation.
pub const DEFAULT_BOUND: usize = 12;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Driver-level error, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// The input text violates the grammar.
    #[error("line {line}, column {column}: expected {expected}, found {found}")]
    Parse { line: usize, column: usize, expected: String, found: String },
    /// A referenced name was never declared.
    #[error("line {line}: unknown name {name:?}")]
    UndefinedName { line: usize, name: String },
    /// A second task was declared.
    #[error("line {line}: a task is already declared on line {first}")]
    DuplicateTask { line: usize, first: usize },
    /// A structurally complete declaration is inconsistent.
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    /// The file ended without declaring a task.
    #[error("the problem file declares no task")]
    MissingTask,
    /// A file could not be read.
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    /// The input is well-formed but outside the supported class.
    #[error("unsupported input: {0}")]
    Unsupported(String),
    /// The computation or its verification failed.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// Process exit code for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse { .. }
            | CliError::UndefinedName { .. }
            | CliError::DuplicateTask { .. }
            | CliError::Invalid { .. }
            | CliError::MissingTask
            | CliError::Io { .. } => 2,
            CliError::Unsupported(_) => 3,
            CliError::Failed(_) => 1,
        }
    }

    /// Short machine-readable class name for JSON error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse { .. }
            | CliError::UndefinedName { .. }
            | CliError::DuplicateTask { .. }
            | CliError::Invalid { .. }
            | CliError::MissingTask => "parse",
            CliError::Io { .. } => "io",
            CliError::Unsupported(_) => "unsupported",
            CliError::Failed(_) => "verification",
        }
    }
}

fn field_err(e: FieldError) -> CliError {
    match e {
        FieldError::TranscendentalAlreadyPresent
        | FieldError::UnsupportedTowerShape(_)
        | FieldError::DuplicateGeneratorName(_)
        | FieldError::InvalidMinimalPolynomial(_)
        | FieldError::ReducibleMinimalPolynomial
        | FieldError::InconclusiveIrreducibility => CliError::Unsupported(e.to_string()),
        other => CliError::Failed(other.to_string()),
    }
}

fn graded_err(e: GradedError) -> CliError {
    match e {
        GradedError::Field(f) => field_err(f),
        GradedError::CoefficientFieldNotPrefix
        | GradedError::VariableMismatch { .. }
        | GradedError::ZeroGenerator
        | GradedError::NoPositiveDegree
        | GradedError::MultiplierNotAlgebraic => CliError::Unsupported(e.to_string()),
        other => CliError::Failed(other.to_string()),
    }
}

fn embed_err(e: EmbedError) -> CliError {
    match e {
        EmbedError::UnsupportedTowerShape(_) => CliError::Unsupported(e.to_string()),
        EmbedError::Graded(g) => graded_err(g),
        EmbedError::Field(f) => field_err(f),
        other => CliError::Failed(other.to_string()),
    }
}

fn normalize_err(e: NormalizeError) -> CliError {
    match e {
        NormalizeError::UnsupportedTower(_)
        | NormalizeError::GeneratorsOutsideCoefficientField(_)
        | NormalizeError::AllConstant => CliError::Unsupported(e.to_string()),
        NormalizeError::Graded(g) => graded_err(g),
        NormalizeError::Field(f) => field_err(f),
        other => CliError::Failed(other.to_string()),
    }
}

fn lnd_err(e: LndError) -> CliError {
    match e {
        LndError::ConductorInexact | LndError::RingMismatch(_) => {
            CliError::Unsupported(e.to_string())
        }
        LndError::NotClosed(_) | LndError::NotRestricting(_) => {
            CliError::Unsupported(e.to_string())
        }
        LndError::Normalize(n) => normalize_err(n),
        LndError::Graded(g) => graded_err(g),
        LndError::Field(f) => field_err(f),
        other => CliError::Failed(other.to_string()),
    }
}

// ---------------------------------------------------------------------------
// Tokens
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum TokKind {
    Ident(String),
    Num(BigRational),
    Quoted(String),
    Sym(char),
    Arrow,
}

#[derive(Debug, Clone)]
struct Tok {
    kind: TokKind,
    /// 1-based column of the token's first character.
    col: usize,
}

impl TokKind {
    fn describe(&self) -> String {
        match self {
            TokKind::Ident(s) => format!("{s:?}"),
            TokKind::Num(r) => format!("the number {r}"),
            TokKind::Quoted(s) => format!("the string {s:?}"),
            TokKind::Sym(c) => format!("'{c}'"),
            TokKind::Arrow => "'->'".to_string(),
        }
    }
}

fn tokenize(line_no: usize, line: &str) -> Result<Vec<Tok>, CliError> {
    let chars: Vec<char> = line.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c == '#' {
            break;
        } else if c == '"' {
            let mut j = i + 1;
            let mut s = String::new();
            while j < chars.len() && chars[j] != '"' {
                s.push(chars[j]);
                j += 1;
            }
            if j >= chars.len() {
                return Err(CliError::Parse {
                    line: line_no,
                    column: col,
                    expected: "a closing '\"'".into(),
                    found: "end of line".into(),
                });
            }
            toks.push(Tok { kind: TokKind::Quoted(s), col });
            i = j + 1;
        } else if c == '-' && i + 1 < chars.len() && chars[i + 1] == '>' {
            toks.push(Tok { kind: TokKind::Arrow, col });
            i += 2;
        } else if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let numer: String = chars[i..j].iter().collect();
            let mut denom = String::new();
            // A slash immediately followed by digits continues the same
            // rational literal; anything else ends the number.
            if j + 1 < chars.len() && chars[j] == '/' && chars[j + 1].is_ascii_digit() {
                let mut k = j + 1;
                while k < chars.len() && chars[k].is_ascii_digit() {
                    k += 1;
                }
                denom = chars[j + 1..k].iter().collect();
                j = k;
            }
            let n: BigInt = numer.parse().expect("digit run parses");
            let d: BigInt = if denom.is_empty() {
                BigInt::from(1)
            } else {
                denom.parse().expect("digit run parses")
            };
            if d.is_zero() {
                return Err(CliError::Parse {
                    line: line_no,
                    column: col,
                    expected: "a nonzero denominator".into(),
                    found: format!("the literal {numer}/{denom}"),
                });
            }
            toks.push(Tok { kind: TokKind::Num(BigRational::new(n, d)), col });
            i = j;
        } else if c.is_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len()
                && (chars[j].is_alphanumeric() || chars[j] == '_' || chars[j] == '\'')
            {
                j += 1;
            }
            let name: String = chars[i..j].iter().collect();
            toks.push(Tok { kind: TokKind::Ident(name), col });
            i = j;
        } else if "=[]{}(),+-*^".contains(c) {
            toks.push(Tok { kind: TokKind::Sym(c), col });
            i += 1;
        } else {
            return Err(CliError::Parse {
                line: line_no,
                column: col,
                expected: "a token".into(),
                found: format!("the character {c:?}"),
            });
        }
    }
    Ok(toks)
}

// ---------------------------------------------------------------------------
// Line cursor
// ---------------------------------------------------------------------------

struct Cursor {
    line: usize,
    toks: Vec<Tok>,
    pos: usize,
    /// Column just past the last character, for end-of-line diagnostics.
    end_col: usize,
}

impl Cursor {
    fn new(line: usize, text: &str) -> Result<Cursor, CliError> {
        let toks = tokenize(line, text)?;
        let end_col = text.chars().count() + 1;
        Ok(Cursor { line, toks, pos: 0, end_col })
    }

    fn peek(&self) -> Option<&TokKind> {
        self.toks.get(self.pos).map(|t| &t.kind)
    }

    fn peek2(&self) -> Option<&TokKind> {
        self.toks.get(self.pos + 1).map(|t| &t.kind)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, expected: &str) -> CliError {
        let (column, found) = match self.toks.get(self.pos) {
            Some(t) => (t.col, t.kind.describe()),
            None => (self.end_col, "end of line".to_string()),
        };
        CliError::Parse { line: self.line, column, expected: expected.into(), found }
    }

    fn expect_ident(&mut self, what: &str) -> Result<String, CliError> {
        match self.peek() {
            Some(TokKind::Ident(_)) => {
                let Some(Tok { kind: TokKind::Ident(s), .. }) = self.bump() else {
                    unreachable!()
                };
                Ok(s)
            }
            _ => Err(self.err(what)),
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), CliError> {
        match self.peek() {
            Some(TokKind::Ident(s)) if s == kw => {
                self.bump();
                Ok(())
            }
            _ => Err(self.err(&format!("the keyword '{kw}'"))),
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<(), CliError> {
        match self.peek() {
            Some(TokKind::Sym(s)) if *s == c => {
                self.bump();
                Ok(())
            }
            _ => Err(self.err(&format!("'{c}'"))),
        }
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if matches!(self.peek(), Some(TokKind::Sym(s)) if *s == c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(TokKind::Ident(s)) if s == kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn finish(&self) -> Result<(), CliError> {
        if self.pos == self.toks.len() {
            Ok(())
        } else {
            Err(self.err("end of line"))
        }
    }

    fn expect_nat(&mut self, what: &str) -> Result<usize, CliError> {
        match self.peek() {
            Some(TokKind::Num(r)) if r.is_integer() => {
                let n = r.to_integer().to_usize();
                match n {
                    Some(n) => {
                        self.bump();
                        Ok(n)
                    }
                    None => Err(self.err(what)),
                }
            }
            _ => Err(self.err(what)),
        }
    }
}

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum Expr {
    Num(BigRational),
    Name(String, usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

fn parse_expr(cur: &mut Cursor) -> Result<Expr, CliError> {
    let mut acc = parse_term(cur)?;
    loop {
        if cur.eat_sym('+') {
            let rhs = parse_term(cur)?;
            acc = Expr::Add(Box::new(acc), Box::new(rhs));
        } else if cur.eat_sym('-') {
            let rhs = parse_term(cur)?;
            acc = Expr::Sub(Box::new(acc), Box::new(rhs));
        } else {
            return Ok(acc);
        }
    }
}

fn parse_term(cur: &mut Cursor) -> Result<Expr, CliError> {
    let mut acc = parse_factor(cur)?;
    while cur.eat_sym('*') {
        let rhs = parse_factor(cur)?;
        acc = Expr::Mul(Box::new(acc), Box::new(rhs));
    }
    Ok(acc)
}

fn parse_factor(cur: &mut Cursor) -> Result<Expr, CliError> {
    if cur.eat_sym('-') {
        let inner = parse_factor(cur)?;
        return Ok(Expr::Neg(Box::new(inner)));
    }
    let atom = parse_atom(cur)?;
    if cur.eat_sym('^') {
        let exp = match cur.peek() {
            Some(TokKind::Num(r)) if r.is_integer() => match r.to_integer().to_u32() {
                Some(n) => {
                    cur.bump();
                    n
                }
                None => return Err(cur.err("an exponent that fits in 32 bits")),
            },
            _ => return Err(cur.err("a nonnegative integer exponent")),
        };
        return Ok(Expr::Pow(Box::new(atom), exp));
    }
    Ok(atom)
}

fn parse_atom(cur: &mut Cursor) -> Result<Expr, CliError> {
    match cur.peek() {
        Some(TokKind::Num(_)) => {
            let Some(Tok { kind: TokKind::Num(r), .. }) = cur.bump() else { unreachable!() };
            Ok(Expr::Num(r))
        }
        Some(TokKind::Ident(_)) => {
            let line = cur.line;
            let Some(Tok { kind: TokKind::Ident(s), .. }) = cur.bump() else { unreachable!() };
            Ok(Expr::Name(s, line))
        }
        Some(TokKind::Sym('(')) => {
            cur.bump();
            let inner = parse_expr(cur)?;
            cur.expect_sym(')')?;
            Ok(inner)
        }
        _ => Err(cur.err("an expression")),
    }
}

/// Evaluate an expression in a polynomial ring. Names resolve to ring
/// variables first, then to generators of the ring's coefficient tower.
fn eval_expr(expr: &Expr, ring: &MPolyRing) -> Result<MPoly, CliError> {
    match expr {
        Expr::Num(r) => Ok(ring.constant(ring.tower().from_rational(r.clone()))),
        Expr::Name(name, line) => {
            if ring.var_index(name).is_some() {
                Ok(ring.var(name))
            } else if let Ok(c) = ring.tower().generator_named(name) {
                Ok(ring.constant(c))
            } else {
                Err(CliError::UndefinedName { line: *line, name: name.clone() })
            }
        }
        Expr::Neg(e) => Ok(eval_expr(e, ring)?.neg()),
        Expr::Add(a, b) => Ok(eval_expr(a, ring)?.add(&eval_expr(b, ring)?)),
        Expr::Sub(a, b) => Ok(eval_expr(a, ring)?.sub(&eval_expr(b, ring)?)),
        Expr::Mul(a, b) => Ok(eval_expr(a, ring)?.mul(&eval_expr(b, ring)?)),
        Expr::Pow(a, n) => Ok(eval_expr(a, ring)?.powu(*n)),
    }
}

// ---------------------------------------------------------------------------
// Problem files
// ---------------------------------------------------------------------------

/// A declared generator list: a named subalgebra of a univariate ring.
#[derive(Debug, Clone)]
pub struct GensDecl {
    /// Name of the ambient ring declaration.
    pub ring: String,
    /// The declared generators, in order.
    pub generators: Vec<UniPoly>,
}

/// A declared derivation.
#[derive(Debug, Clone)]
pub enum DerivationDecl {
    /// A derivation of a declared polynomial ring, one image per variable.
    OnRing {
        /// Name of the ring declaration.
        ring: String,
        /// Images of the ring variables, in declaration order.
        images: Vec<MPoly>,
    },
    /// A derivation of `R[x_1, …]` for a declared generator list `R`,
    /// given by images of the generators and of the adjoined variables.
    OnAlgebra {
        /// Name of the generator-list declaration.
        gens: String,
        /// Adjoined variable names (possibly empty).
        adjoined: Vec<String>,
        /// The ambient ring `k[s, x_1, …]` the images live in.
        ambient: MPolyRing,
        /// Images of the generators, in declaration order.
        gen_images: Vec<MPoly>,
        /// Images of the adjoined variables, in order.
        var_images: Vec<MPoly>,
    },
}

/// The kind of task a problem file requests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    /// Construct and verify an embedding certificate.
    Embed,
    /// Complete the generator list under leading forms.
    Sagbi,
    /// Compute the normalization of the generated curve algebra.
    Normalize,
    /// Compute the conductor of the curve algebra in its normalization.
    Conductor,
    /// Decide local nilpotency of a ring derivation.
    Lnd,
    /// Run the cancellation argument for a derivation on `R[x…]`.
    Cancel,
    /// Replay an embedding task and compare with a stored certificate.
    Verify,
}

impl TaskKind {
    fn name(self) -> &'static str {
        match self {
            TaskKind::Embed => "embed",
            TaskKind::Sagbi => "sagbi",
            TaskKind::Normalize => "normalize",
            TaskKind::Conductor => "conductor",
            TaskKind::Lnd => "lnd",
            TaskKind::Cancel => "cancel",
            TaskKind::Verify => "verify",
        }
    }
}

/// The single task of a problem file.
#[derive(Debug, Clone)]
pub struct Task {
    /// What to run.
    pub kind: TaskKind,
    /// The declaration the task operates on.
    pub target: String,
    /// Optional coefficient-field override (`over k`).
    pub over: Option<String>,
    /// Optional bound from the file.
    pub bound: Option<usize>,
    /// Optional seed from the file.
    pub seed: Option<u64>,
    /// Optional retry cap from the file.
    pub retries: Option<usize>,
    /// Certificate path for `verify`.
    pub cert: Option<String>,
    /// Line the task was declared on.
    pub line: usize,
}

/// A fully parsed and name-resolved problem file.
#[derive(Debug, Clone)]
pub struct ProblemFile {
    /// Declared field towers by name.
    pub towers: BTreeMap<String, FieldTower>,
    /// Declared polynomial rings by name.
    pub rings: BTreeMap<String, MPolyRing>,
    /// Declared generator lists by name.
    pub gens: BTreeMap<String, GensDecl>,
    /// Declared derivations by name.
    pub derivations: BTreeMap<String, DerivationDecl>,
    /// The unique task.
    pub task: Task,
}

/// Parse a complete problem file.
pub fn parse_problem(text: &str) -> Result<ProblemFile, CliError> {
    let mut towers: BTreeMap<String, FieldTower> = BTreeMap::new();
    let mut rings: BTreeMap<String, MPolyRing> = BTreeMap::new();
    let mut gens: BTreeMap<String, GensDecl> = BTreeMap::new();
    let mut derivations: BTreeMap<String, DerivationDecl> = BTreeMap::new();
    let mut declared: BTreeSet<String> = BTreeSet::new();
    let mut task: Option<Task> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let mut cur = Cursor::new(line_no, raw)?;
        let Some(TokKind::Ident(head)) = cur.peek().cloned() else {
            if cur.peek().is_none() {
                continue; // blank or comment-only line
            }
            return Err(cur.err("a declaration keyword"));
        };
        match head.as_str() {
            "field" => {
                cur.bump();
                let name = cur.expect_ident("a tower name")?;
                cur.expect_sym('=')?;
                cur.expect_keyword("Q")?;
                cur.finish()?;
                declare(&mut declared, &name, line_no)?;
                towers.insert(name, FieldTower::rationals());
            }
            "extend" => {
                cur.bump();
                let name = cur.expect_ident("a tower name")?;
                cur.expect_sym('=')?;
                let base_name = cur.expect_ident("a declared tower")?;
                let base = towers.get(&base_name).ok_or(CliError::UndefinedName {
                    line: line_no,
                    name: base_name.clone(),
                })?;
                cur.expect_keyword("adjoin")?;
                let gen_name = cur.expect_ident("a generator name")?;
                let tower = if cur.eat_keyword("minpoly") {
                    let expr = parse_expr(&mut cur)?;
                    cur.finish()?;
                    let ring = MPolyRing::new(base, &[gen_name.as_str()]);
                    let poly = eval_expr(&expr, &ring)?
                        .to_unipoly(0)
                        .expect("a univariate ring only produces univariate elements");
                    base.extend_algebraic(&gen_name, poly).map_err(field_err)?
                } else {
                    cur.finish()?;
                    base.extend_transcendental(&gen_name).map_err(field_err)?
                };
                declare(&mut declared, &name, line_no)?;
                towers.insert(name, tower);
            }
            "ring" => {
                cur.bump();
                let name = cur.expect_ident("a ring name")?;
                cur.expect_sym('=')?;
                let tower_name = cur.expect_ident("a declared tower")?;
                let tower = towers.get(&tower_name).ok_or(CliError::UndefinedName {
                    line: line_no,
                    name: tower_name.clone(),
                })?;
                cur.expect_sym('[')?;
                let mut vars = vec![cur.expect_ident("a variable name")?];
                while cur.eat_sym(',') {
                    vars.push(cur.expect_ident("a variable name")?);
                }
                cur.expect_sym(']')?;
                cur.finish()?;
                let mut seen = BTreeSet::new();
                for v in &vars {
                    if !seen.insert(v.clone()) {
                        return Err(CliError::Invalid {
                            line: line_no,
                            message: format!("variable {v:?} is declared twice"),
                        });
                    }
                }
                let refs: Vec<&str> = vars.iter().map(|v| v.as_str()).collect();
                declare(&mut declared, &name, line_no)?;
                rings.insert(name, MPolyRing::new(tower, &refs));
            }
            "gens" => {
                cur.bump();
                let name = cur.expect_ident("a generator-list name")?;
                cur.expect_keyword("in")?;
                let ring_name = cur.expect_ident("a declared ring")?;
                let ring = rings.get(&ring_name).ok_or(CliError::UndefinedName {
                    line: line_no,
                    name: ring_name.clone(),
                })?;
                if ring.num_vars() != 1 {
                    return Err(CliError::Unsupported(format!(
                        "line {line_no}: generator lists need a univariate ring, \
                         but {ring_name:?} has {} variables",
                        ring.num_vars()
                    )));
                }
                cur.expect_sym('=')?;
                cur.expect_sym('{')?;
                let mut generators = Vec::new();
                loop {
                    let expr = parse_expr(&mut cur)?;
                    let poly = eval_expr(&expr, ring)?
                        .to_unipoly(0)
                        .expect("a univariate ring only produces univariate elements");
                    generators.push(poly);
                    if !cur.eat_sym(',') {
                        break;
                    }
                }
                cur.expect_sym('}')?;
                cur.finish()?;
                declare(&mut declared, &name, line_no)?;
                gens.insert(name, GensDecl { ring: ring_name, generators });
            }
            "derivation" => {
                cur.bump();
                let name = cur.expect_ident("a derivation name")?;
                cur.expect_keyword("on")?;
                let target = cur.expect_ident("a declared ring or generator list")?;
                let decl = if let Some(ring) = rings.get(&target) {
                    parse_ring_derivation(&mut cur, line_no, &target, ring)?
                } else if let Some(g) = gens.get(&target) {
                    let base_ring = &rings[&g.ring];
                    parse_algebra_derivation(&mut cur, line_no, &target, g, base_ring)?
                } else {
                    return Err(CliError::UndefinedName { line: line_no, name: target });
                };
                declare(&mut declared, &name, line_no)?;
                derivations.insert(name, decl);
            }
            "task" => {
                cur.bump();
                if let Some(prev) = &task {
                    return Err(CliError::DuplicateTask { line: line_no, first: prev.line });
                }
                task = Some(parse_task(
                    &mut cur,
                    line_no,
                    &towers,
                    &gens,
                    &derivations,
                )?);
            }
            _ => {
                return Err(cur.err(
                    "a declaration keyword (field, extend, ring, gens, derivation, task)",
                ))
            }
        }
    }

    let task = task.ok_or(CliError::MissingTask)?;
    Ok(ProblemFile { towers, rings, gens, derivations, task })
}

fn declare(declared: &mut BTreeSet<String>, name: &str, line: usize) -> Result<(), CliError> {
    if !declared.insert(name.to_string()) {
        return Err(CliError::Invalid {
            line,
            message: format!("the name {name:?} is already declared"),
        });
    }
    Ok(())
}

fn parse_ring_derivation(
    cur: &mut Cursor,
    line: usize,
    ring_name: &str,
    ring: &MPolyRing,
) -> Result<DerivationDecl, CliError> {
    cur.expect_sym('=')?;
    cur.expect_sym('{')?;
    let mut images: Vec<Option<MPoly>> = vec![None; ring.num_vars()];
    loop {
        let var = cur.expect_ident("a ring variable")?;
        let Some(idx) = ring.var_index(&var) else {
            return Err(CliError::Invalid {
                line,
                message: format!("{var:?} is not a variable of {ring_name:?}"),
            });
        };
        match cur.peek() {
            Some(TokKind::Arrow) => {
                cur.bump();
            }
            _ => return Err(cur.err("'->'")),
        }
        let expr = parse_expr(cur)?;
        let img = eval_expr(&expr, ring)?;
        if images[idx].is_some() {
            return Err(CliError::Invalid {
                line,
                message: format!("variable {var:?} is mapped twice"),
            });
        }
        images[idx] = Some(img);
        if !cur.eat_sym(',') {
            break;
        }
    }
    cur.expect_sym('}')?;
    cur.finish()?;
    let mut out = Vec::with_capacity(ring.num_vars());
    for (i, img) in images.into_iter().enumerate() {
        match img {
            Some(p) => out.push(p),
            None => {
                return Err(CliError::Invalid {
                    line,
                    message: format!(
                        "variable {:?} has no image; a derivation must map every variable",
                        ring.vars()[i]
                    ),
                })
            }
        }
    }
    Ok(DerivationDecl::OnRing { ring: ring_name.to_string(), images: out })
}

fn parse_algebra_derivation(
    cur: &mut Cursor,
    line: usize,
    gens_name: &str,
    g: &GensDecl,
    base_ring: &MPolyRing,
) -> Result<DerivationDecl, CliError> {
    let mut adjoined = Vec::new();
    if cur.eat_keyword("adjoin") {
        adjoined.push(cur.expect_ident("a variable name")?);
        while cur.eat_sym(',') {
            adjoined.push(cur.expect_ident("a variable name")?);
        }
    }
    let base_var = base_ring.vars()[0].clone();
    let mut names = vec![base_var.clone()];
    names.extend(adjoined.iter().cloned());
    let mut seen = BTreeSet::new();
    for n in &names {
        if !seen.insert(n.clone()) {
            return Err(CliError::Invalid {
                line,
                message: format!("adjoined variable {n:?} collides with another variable"),
            });
        }
    }
    let refs: Vec<&str> = names.iter().map(|n| n.as_str()).collect();
    let ambient = MPolyRing::new(base_ring.tower(), &refs);

    cur.expect_sym('=')?;
    cur.expect_sym('{')?;
    let mut gen_images: Vec<Option<MPoly>> = vec![None; g.generators.len()];
    let mut var_images: Vec<Option<MPoly>> = vec![None; adjoined.len()];
    loop {
        // An adjoined variable name directly followed by an arrow is a
        // variable entry; any other left-hand side is a generator
        // expression evaluated in the base ring.
        let var_entry = match (cur.peek(), cur.peek2()) {
            (Some(TokKind::Ident(n)), Some(TokKind::Arrow)) => {
                adjoined.iter().position(|a| a == n)
            }
            _ => None,
        };
        let slot = if let Some(vidx) = var_entry {
            cur.bump();
            Slot::Var(vidx)
        } else {
            let expr = parse_expr(cur)?;
            let lhs = eval_expr(&expr, base_ring)?
                .to_unipoly(0)
                .expect("a univariate ring only produces univariate elements");
            let Some(gidx) = g.generators.iter().position(|p| *p == lhs) else {
                return Err(CliError::Invalid {
                    line,
                    message: format!(
                        "the left-hand side {lhs} is not a declared generator of {gens_name:?}"
                    ),
                });
            };
            Slot::Gen(gidx)
        };
        match cur.peek() {
            Some(TokKind::Arrow) => {
                cur.bump();
            }
            _ => return Err(cur.err("'->'")),
        }
        let expr = parse_expr(cur)?;
        let img = eval_expr(&expr, &ambient)?;
        match slot {
            Slot::Var(i) => {
                if var_images[i].is_some() {
                    return Err(CliError::Invalid {
                        line,
                        message: format!("variable {:?} is mapped twice", adjoined[i]),
                    });
                }
                var_images[i] = Some(img);
            }
            Slot::Gen(i) => {
                if gen_images[i].is_some() {
                    return Err(CliError::Invalid {
                        line,
                        message: "a generator is mapped twice".to_string(),
                    });
                }
                gen_images[i] = Some(img);
            }
        }
        if !cur.eat_sym(',') {
            break;
        }
    }
    cur.expect_sym('}')?;
    cur.finish()?;
    let gen_images: Vec<MPoly> = collect_images(gen_images, line, "generator")?;
    let var_images: Vec<MPoly> = collect_images(var_images, line, "adjoined variable")?;
    Ok(DerivationDecl::OnAlgebra {
        gens: gens_name.to_string(),
        adjoined,
        ambient,
        gen_images,
        var_images,
    })
}

enum Slot {
    Gen(usize),
    Var(usize),
}

fn collect_images(
    images: Vec<Option<MPoly>>,
    line: usize,
    what: &str,
) -> Result<Vec<MPoly>, CliError> {
    let mut out = Vec::with_capacity(images.len());
    for img in images {
        match img {
            Some(p) => out.push(p),
            None => {
                return Err(CliError::Invalid {
                    line,
                    message: format!("every {what} needs exactly one image"),
                })
            }
        }
    }
    Ok(out)
}

fn parse_task(
    cur: &mut Cursor,
    line: usize,
    towers: &BTreeMap<String, FieldTower>,
    gens: &BTreeMap<String, GensDecl>,
    derivations: &BTreeMap<String, DerivationDecl>,
) -> Result<Task, CliError> {
    let kind_name = cur.expect_ident(
        "a task kind (embed, sagbi, normalize, conductor, lnd, cancel, verify)",
    )?;
    let kind = match kind_name.as_str() {
        "embed" => TaskKind::Embed,
        "sagbi" => TaskKind::Sagbi,
        "normalize" => TaskKind::Normalize,
        "conductor" => TaskKind::Conductor,
        "lnd" => TaskKind::Lnd,
        "cancel" => TaskKind::Cancel,
        "verify" => TaskKind::Verify,
        _ => {
            cur.pos -= 1;
            return Err(cur.err(
                "a task kind (embed, sagbi, normalize, conductor, lnd, cancel, verify)",
            ));
        }
    };
    let target = cur.expect_ident("a declaration name")?;
    let mut task = Task {
        kind,
        target,
        over: None,
        bound: None,
        seed: None,
        retries: None,
        cert: None,
        line,
    };
    while let Some(TokKind::Ident(opt)) = cur.peek().cloned() {
        match opt.as_str() {
            "over" => {
                cur.bump();
                let name = cur.expect_ident("a declared tower")?;
                if !towers.contains_key(&name) {
                    return Err(CliError::UndefinedName { line, name });
                }
                if task.over.replace(name).is_some() {
                    return Err(CliError::Invalid {
                        line,
                        message: "the 'over' clause is given twice".into(),
                    });
                }
            }
            "bound" | "seed" | "retries" => {
                cur.bump();
                cur.expect_sym('=')?;
                let n = cur.expect_nat("a nonnegative integer")?;
                let prev = match opt.as_str() {
                    "bound" => task.bound.replace(n).map(|_| ()),
                    "seed" => task.seed.replace(n as u64).map(|_| ()),
                    _ => task.retries.replace(n).map(|_| ()),
                };
                if prev.is_some() {
                    return Err(CliError::Invalid {
                        line,
                        message: format!("the option {opt:?} is given twice"),
                    });
                }
            }
            "cert" => {
                cur.bump();
                cur.expect_sym('=')?;
                let path = match cur.peek() {
                    Some(TokKind::Quoted(_)) => {
                        let Some(Tok { kind: TokKind::Quoted(s), .. }) = cur.bump() else {
                            unreachable!()
                        };
                        s
                    }
                    _ => return Err(cur.err("a quoted file path")),
                };
                if task.cert.replace(path).is_some() {
                    return Err(CliError::Invalid {
                        line,
                        message: "the option \"cert\" is given twice".into(),
                    });
                }
            }
            _ => {
                return Err(cur.err(
                    "a task option (over, bound=, seed=, retries=, cert=)",
                ))
            }
        }
    }
    cur.finish()?;

    if task.over.is_some()
        && !matches!(task.kind, TaskKind::Normalize | TaskKind::Conductor)
    {
        return Err(CliError::Invalid {
            line,
            message: format!("task {:?} does not take an 'over' clause", kind_name),
        });
    }
    match task.kind {
        TaskKind::Verify => {
            if task.cert.is_none() {
                return Err(CliError::Invalid {
                    line,
                    message: "task verify needs cert=\"file\"".into(),
                });
            }
        }
        _ => {
            if task.cert.is_some() {
                return Err(CliError::Invalid {
                    line,
                    message: format!("task {kind_name:?} does not take a certificate"),
                });
            }
        }
    }
    let target_known = match task.kind {
        TaskKind::Embed
        | TaskKind::Sagbi
        | TaskKind::Normalize
        | TaskKind::Conductor
        | TaskKind::Verify => gens.contains_key(&task.target),
        TaskKind::Lnd | TaskKind::Cancel => derivations.contains_key(&task.target),
    };
    if !target_known {
        return Err(CliError::UndefinedName { line, name: task.target });
    }
    Ok(task)
}

// ---------------------------------------------------------------------------
// Running tasks
// ---------------------------------------------------------------------------

/// Command-line overrides for the numeric task options.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    /// Overrides the task's bound.
    pub bound: Option<usize>,
    /// Overrides the task's seed.
    pub seed: Option<u64>,
    /// Overrides the task's retry cap.
    pub retries: Option<usize>,
}

/// The outcome of one task run.
#[derive(Debug, Clone)]
pub struct RunReport {
    /// Task label, e.g. `"embed R"`.
    pub task: String,
    /// Effective numeric options.
    pub options: Value,
    /// Task-specific result payload.
    pub payload: Value,
    /// Whether the matching verifier accepted the result.
    pub verified: bool,
    /// Wall-clock time of the run. Excluded from the JSON report so that
    /// reruns are byte-identical; shown on stderr instead.
    pub timing_ms: u128,
    /// Version of the tool that produced the report.
    pub tool_version: &'static str,
    /// Hash of the problem-file text, as `sha256:<hex>`.
    pub input_hash: String,
}

impl RunReport {
    /// Encode the report with stable key order. Timing is deliberately
    /// left out: two runs of the same input and seed are byte-identical.
    pub fn to_json(&self) -> Value {
        json!({
            "schema": 1,
            "task": self.task,
            "options": self.options,
            "payload": self.payload,
            "verified": self.verified,
            "tool_version": self.tool_version,
            "input_hash": self.input_hash,
        })
    }
}

fn input_hash(text: &str) -> String {
    let mut h = Sha256::new();
    h.update(text.as_bytes());
    format!("sha256:{:x}", h.finalize())
}

/// Parse and run a problem file. `base_dir` anchors relative certificate
/// paths.
pub fn execute(text: &str, base_dir: &Path, ov: &Overrides) -> Result<RunReport, CliError> {
    let file = parse_problem(text)?;
    let task = file.task.clone();
    let bound = ov.bound.or(task.bound);
    let seed = ov.seed.or(task.seed);
    let retries = ov.retries.or(task.retries);
    let (options, payload, verified) = match task.kind {
        TaskKind::Embed => run_embed(&file, &task.target, bound, seed, retries)?,
        TaskKind::Sagbi => run_sagbi(&file, &task.target, bound)?,
        TaskKind::Normalize => {
            run_normalize(&file, &task.target, task.over.as_deref(), bound)?
        }
        TaskKind::Conductor => {
            run_conductor(&file, &task.target, task.over.as_deref(), bound)?
        }
        TaskKind::Lnd => run_lnd(&file, &task.target, bound)?,
        TaskKind::Cancel => run_cancel(&file, &task.target, bound)?,
        TaskKind::Verify => run_verify(&file, &task, base_dir, bound, seed, retries)?,
    };
    Ok(RunReport {
        task: format!("{} {}", task.kind.name(), task.target),
        options,
        payload,
        verified,
        timing_ms: 0,
        tool_version: env!("CARGO_PKG_VERSION"),
        input_hash: input_hash(text),
    })
}

fn presentation_for(
    file: &ProblemFile,
    gens_name: &str,
    over: Option<&str>,
) -> Result<SubalgebraPresentation, CliError> {
    let g = &file.gens[gens_name];
    let ring = &file.rings[&g.ring];
    let var = ring.vars()[0].clone();
    match over {
        None => SubalgebraPresentation::new(ring.tower(), &var, g.generators.clone())
            .map_err(graded_err),
        Some(k) => SubalgebraPresentation::over_coefficient_field(
            ring.tower(),
            &var,
            g.generators.clone(),
            &file.towers[k],
        )
        .map_err(graded_err),
    }
}

fn build_embed_problem(
    file: &ProblemFile,
    gens_name: &str,
    bound: Option<usize>,
    seed: Option<u64>,
    retries: Option<usize>,
) -> Result<EmbeddingProblem, CliError> {
    // The embedding task poses the generator list over the rationals and
    // lets the engine discover which tower generators must persist.
    let g = &file.gens[gens_name];
    let ring = &file.rings[&g.ring];
    let var = ring.vars()[0].clone();
    let pres = SubalgebraPresentation::over_coefficient_field(
        ring.tower(),
        &var,
        g.generators.clone(),
        &FieldTower::rationals(),
    )
    .map_err(graded_err)?;
    let mut prob = EmbeddingProblem::new(pres).map_err(embed_err)?;
    if let Some(b) = bound {
        prob = prob.with_bound(b);
    }
    if let Some(s) = seed {
        prob = prob.with_seed(s);
    }
    if let Some(r) = retries {
        prob = prob.with_retries(r);
    }
    Ok(prob)
}

fn run_embed(
    file: &ProblemFile,
    gens_name: &str,
    bound: Option<usize>,
    seed: Option<u64>,
    retries: Option<usize>,
) -> Result<(Value, Value, bool), CliError> {
    let prob = build_embed_problem(file, gens_name, bound, seed, retries)?;
    let cert = construct_embedding(&prob).map_err(embed_err)?;
    verify_certificate(&prob, &cert).map_err(embed_err)?;
    let options = json!({
        "bound": prob.bound(),
        "seed": prob.seed(),
        "retries": prob.retries(),
    });
    Ok((options, cert.to_json(), true))
}

fn run_sagbi(
    file: &ProblemFile,
    gens_name: &str,
    bound: Option<usize>,
) -> Result<(Value, Value, bool), CliError> {
    let pres = presentation_for(file, gens_name, None)?;
    let bound = bound.unwrap_or(DEFAULT_BOUND);
    let outcome = pres.sagbi_complete(bound).map_err(graded_err)?;
    let payload = json!({
        "added": outcome.added.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        "bounded": outcome.bounded,
        "generators": outcome
            .presentation
            .generators()
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>(),
        "iterations": outcome.iterations,
        "stable": outcome.stable,
        "tail_active": outcome.tail_active,
    });
    let verified = outcome.stable;
    Ok((json!({ "bound": bound }), payload, verified))
}

fn run_normalize(
    file: &ProblemFile,
    gens_name: &str,
    over: Option<&str>,
    bound: Option<usize>,
) -> Result<(Value, Value, bool), CliError> {
    let pres = presentation_for(file, gens_name, over)?;
    let bound = bound.unwrap_or(DEFAULT_BOUND);
    let norm = normalize_curve(&pres, bound).map_err(normalize_err)?;
    for (expr, gen) in norm.expressions.iter().zip(pres.generators()) {
        if expr.compose(&norm.theta) != *gen {
            return Err(CliError::Failed(format!(
                "re-verification failed: the expression {expr} does not recover the \
                 generator {gen}"
            )));
        }
    }
    Ok((json!({ "bound": bound }), norm.to_json(), true))
}

fn run_conductor(
    file: &ProblemFile,
    gens_name: &str,
    over: Option<&str>,
    bound: Option<usize>,
) -> Result<(Value, Value, bool), CliError> {
    let pres = presentation_for(file, gens_name, over)?;
    let bound = bound.unwrap_or(DEFAULT_BOUND);
    let norm = normalize_curve(&pres, bound).map_err(normalize_err)?;
    let cond = conductor(&pres, &norm, bound).map_err(normalize_err)?;

    // Independent membership re-checks through subduction against the
    // original presentation.
    let member = |p: &UniPoly| -> Result<bool, CliError> {
        let deg = p.degree().unwrap_or(0);
        let out = pres.subduct(p, bound.max(deg)).map_err(graded_err)?;
        Ok(out.is_member())
    };
    match &cond {
        ConductorResult::Principal { exponent } => {
            let c = *exponent;
            for j in 0..4usize {
                let p = norm.theta.pow(c + j);
                if !member(&p)? {
                    return Err(CliError::Failed(format!(
                        "re-verification failed: theta^{} is not in the subalgebra",
                        c + j
                    )));
                }
            }
            if c >= 2 {
                let p = norm.theta.pow(c - 1);
                if member(&p)? {
                    return Err(CliError::Failed(format!(
                        "re-verification failed: theta^{} already lies in the subalgebra",
                        c - 1
                    )));
                }
            }
        }
        ConductorResult::Bounded { basis, bound: cb } => {
            // Each row a must keep a·theta^j inside the subalgebra for
            // every testable j ≥ 1; re-check the first testable power.
            for a in basis {
                let p = a.mul(&norm.theta);
                let deg = p.degree().unwrap_or(0);
                if deg > *cb {
                    continue;
                }
                if !member(&p)? {
                    return Err(CliError::Failed(format!(
                        "re-verification failed: the conductor element {a} does not \
                         absorb theta"
                    )));
                }
            }
        }
    }
    let payload = json!({
        "conductor": cond.to_json(),
        "exact": cond.is_exact(),
        "normalization": norm.to_json(),
    });
    Ok((json!({ "bound": bound }), payload, true))
}

fn verdict_json(v: &NilpotencyVerdict) -> Value {
    match v {
        NilpotencyVerdict::ProvenNilpotent { indices } => json!({
            "kind": "ProvenNilpotent",
            "indices": indices
                .iter()
                .map(|(n, i)| json!([n, i]))
                .collect::<Vec<_>>(),
        }),
        NilpotencyVerdict::ProvenNot { witness } => {
            json!({ "kind": "ProvenNot", "witness": witness })
        }
        NilpotencyVerdict::UnknownAtBound { bound } => {
            json!({ "kind": "UnknownAtBound", "bound": bound })
        }
    }
}

fn run_lnd(
    file: &ProblemFile,
    der_name: &str,
    bound: Option<usize>,
) -> Result<(Value, Value, bool), CliError> {
    let DerivationDecl::OnRing { ring, images } = &file.derivations[der_name] else {
        return Err(CliError::Unsupported(
            "task lnd needs a derivation declared on a polynomial ring".into(),
        ));
    };
    let ring = &file.rings[ring];
    let d = PolyDerivation::new(ring, images.clone()).map_err(lnd_err)?;
    let nb = bound.unwrap_or_else(|| default_nilpotency_bound(&d)).max(1);
    let verdict = is_locally_nilpotent(&d, nb);
    let determined = !matches!(verdict, NilpotencyVerdict::UnknownAtBound { .. });
    let payload = json!({
        "derivation": {
            "images": d.images().iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "variables": ring.vars(),
        },
        "description": verdict.to_string(),
        "verdict": verdict_json(&verdict),
    });
    Ok((json!({ "bound": nb }), payload, determined))
}

fn run_cancel(
    file: &ProblemFile,
    der_name: &str,
    bound: Option<usize>,
) -> Result<(Value, Value, bool), CliError> {
    let DerivationDecl::OnAlgebra { gens, ambient, gen_images, var_images, .. } =
        &file.derivations[der_name]
    else {
        return Err(CliError::Unsupported(
            "task cancel needs a derivation declared on a generator list".into(),
        ));
    };
    let pres = presentation_for(file, gens, None)?;
    let bound = bound.unwrap_or(DEFAULT_BOUND);
    let trace =
        cancellation_trace(&pres, ambient, gen_images, var_images, bound).map_err(lnd_err)?;
    let verified = trace.steps.iter().all(|s| s.verified);
    Ok((json!({ "bound": bound }), trace.to_json(), verified))
}

fn run_verify(
    file: &ProblemFile,
    task: &Task,
    base_dir: &Path,
    bound: Option<usize>,
    seed: Option<u64>,
    retries: Option<usize>,
) -> Result<(Value, Value, bool), CliError> {
    let cert_path = task.cert.as_deref().expect("verify tasks carry a certificate path");
    let path = if Path::new(cert_path).is_absolute() {
        PathBuf::from(cert_path)
    } else {
        base_dir.join(cert_path)
    };
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let loaded: Value = serde_json::from_str(&text).map_err(|e| {
        CliError::Failed(format!("the certificate file is not valid JSON: {e}"))
    })?;
    let candidate = loaded.get("payload").cloned().unwrap_or(loaded);

    let prob = build_embed_problem(file, &task.target, bound, seed, retries)?;
    let cert = construct_embedding(&prob).map_err(embed_err)?;
    verify_certificate(&prob, &cert).map_err(embed_err)?;
    let fresh = cert.to_json();
    let matches = fresh == candidate;
    let options = json!({
        "bound": prob.bound(),
        "seed": prob.seed(),
        "retries": prob.retries(),
    });
    let payload = json!({ "certificate": fresh, "match": matches });
    Ok((options, payload, matches))
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

/// Render a report as pretty-printed JSON with stable key order.
pub fn emit_json(report: &RunReport) -> String {
    let mut s = serde_json::to_string_pretty(&report.to_json())
        .expect("report serialization cannot fail");
    s.push('\n');
    s
}

fn push_options(out: &mut String, options: &Value) {
    if let Value::Object(map) = options {
        let parts: Vec<String> =
            map.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(out, "options: {}", parts.join(" "));
    }
}

fn str_of(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Render a report as a human-readable narrative. Deterministic: contains
/// no timing data.
pub fn emit_trace(report: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "task: {}", report.task);
    let _ = writeln!(out, "input: {}", report.input_hash);
    push_options(&mut out, &report.options);
    let kind = report.task.split(' ').next().unwrap_or("");
    match kind {
        "embed" | "verify" => trace_embed(&mut out, report, kind == "verify"),
        "sagbi" => trace_sagbi(&mut out, &report.payload),
        "normalize" => trace_normalize(&mut out, &report.payload),
        "conductor" => trace_conductor(&mut out, &report.payload),
        "lnd" => trace_lnd(&mut out, &report.payload),
        "cancel" => trace_cancel(&mut out, &report.payload),
        _ => {}
    }
    let _ = writeln!(
        out,
        "result: {}",
        if report.verified { "verified" } else { "NOT verified" }
    );
    out
}

fn trace_embed(out: &mut String, report: &RunReport, is_verify: bool) {
    let payload = if is_verify {
        let _ = writeln!(
            out,
            "certificate match: {}",
            if report.payload["match"].as_bool() == Some(true) { "yes" } else { "no" }
        );
        &report.payload["certificate"]
    } else {
        &report.payload
    };
    let _ = writeln!(out, "case: {}", str_of(&payload["case"]));
    if let Some(u0) = payload.get("u0") {
        let _ = writeln!(out, "specialized at u0 = {}", str_of(u0));
    }
    if let Some(Value::Array(steps)) = payload.get("field_tower") {
        let parts: Vec<String> = steps.iter().map(str_of).collect();
        let _ = writeln!(out, "field tower: {}", parts.join(" -> "));
    }
    let _ = writeln!(out, "t = {}", str_of(&payload["t"]));
    let _ = writeln!(out, "d = {}", str_of(&payload["d"]));
    if let Some(Value::Array(adj)) = payload.get("adjunctions") {
        for a in adj {
            let _ = writeln!(out, "adjoin {}", str_of(a));
        }
    }
    if let Some(Value::Array(imgs)) = payload.get("images") {
        for (i, img) in imgs.iter().enumerate() {
            let _ = writeln!(out, "image {}: {}", i + 1, str_of(img));
        }
    }
    if let Some(Value::Array(m)) = payload.get("multiplier_images") {
        for (i, img) in m.iter().enumerate() {
            let _ = writeln!(out, "multiplier image {}: {}", i + 1, str_of(img));
        }
    }
    if let Some(Value::Array(rej)) = payload.get("rejected_points") {
        for r in rej {
            if let Value::Array(pair) = r {
                if pair.len() == 2 {
                    let _ = writeln!(
                        out,
                        "rejected specialization u0 = {}: rank drop at degree {}",
                        str_of(&pair[0]),
                        str_of(&pair[1])
                    );
                }
            }
        }
    }
    let v = &payload["verification"];
    if v.is_object() {
        let _ = writeln!(
            out,
            "verification: bound {}; transcendence degree source = {}, image = {}; \
             relations checked: {}",
            str_of(&v["bound"]),
            str_of(&v["trdeg_source"]),
            str_of(&v["trdeg_image"]),
            str_of(&v["relations_checked"])
        );
        if let Some(Value::Array(ranks)) = v.get("ranks") {
            for row in ranks {
                if let Value::Array(t) = row {
                    if t.len() == 3 {
                        let _ = writeln!(
                            out,
                            "  degree {}: source rank {}, image rank {}",
                            str_of(&t[0]),
                            str_of(&t[1]),
                            str_of(&t[2])
                        );
                    }
                }
            }
        }
    }
}

fn trace_sagbi(out: &mut String, payload: &Value) {
    match payload.get("added") {
        Some(Value::Array(added)) if !added.is_empty() => {
            let _ = writeln!(out, "added generators:");
            for a in added {
                let _ = writeln!(out, "  {}", str_of(a));
            }
        }
        _ => {
            let _ = writeln!(out, "added generators: none");
        }
    }
    let _ = writeln!(out, "iterations: {}", str_of(&payload["iterations"]));
    let _ = writeln!(
        out,
        "stable: {}",
        if payload["stable"].as_bool() == Some(true) { "yes" } else { "no" }
    );
}

fn trace_normalize(out: &mut String, payload: &Value) {
    let _ = writeln!(out, "theta = {}", str_of(&payload["theta"]));
    let _ = writeln!(out, "index = {}", str_of(&payload["index"]));
    if let Some(Value::Array(exprs)) = payload.get("expressions") {
        for (i, e) in exprs.iter().enumerate() {
            let _ = writeln!(out, "generator {}: {}", i + 1, str_of(e));
        }
    }
}

fn trace_conductor(out: &mut String, payload: &Value) {
    trace_normalize(out, &payload["normalization"]);
    let c = &payload["conductor"];
    if let Some(e) = c.get("exponent") {
        let _ = writeln!(out, "conductor exponent: {}", str_of(e));
    } else if let Some(Value::Array(basis)) = c.get("basis") {
        let _ = writeln!(out, "conductor basis (bounded):");
        for b in basis {
            let _ = writeln!(out, "  {}", str_of(b));
        }
    }
}

fn trace_lnd(out: &mut String, payload: &Value) {
    if let (Some(Value::Array(vars)), Some(Value::Array(imgs))) = (
        payload["derivation"].get("variables"),
        payload["derivation"].get("images"),
    ) {
        for (v, img) in vars.iter().zip(imgs) {
            let _ = writeln!(out, "D({}) = {}", str_of(v), str_of(img));
        }
    }
    let _ = writeln!(out, "verdict: {}", str_of(&payload["description"]));
}

fn trace_cancel(out: &mut String, payload: &Value) {
    if let Some(Value::Array(steps)) = payload.get("steps") {
        for s in steps {
            let mark = if s["verified"].as_bool() == Some(true) { "ok" } else { "??" };
            let _ = writeln!(
                out,
                "[{mark}] {}: {}",
                str_of(&s["label"]),
                str_of(&s["statement"])
            );
        }
    }
    let _ = writeln!(
        out,
        "conductor exponent: {}",
        str_of(&payload["conductor_exponent"])
    );
    let _ = writeln!(out, "verdict: {}", str_of(&payload["verdict"]));
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

/// Command-line arguments.
#[derive(Debug, Parser)]
#[command(
    name = "polyembed",
    version,
    about = "Exact rewriting of curve-valued polynomial data: embeddings, \
             normalization, conductors, and locally nilpotent derivations."
)]
struct Args {
    /// Problem file to execute.
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Emit the run report as JSON on stdout.
    #[arg(long, conflicts_with = "trace")]
    json: bool,
    /// Emit a human-readable narrative on stdout (the default).
    #[arg(long)]
    trace: bool,
    /// Override the task's filtration / iteration bound.
    #[arg(long, value_name = "N")]
    bound: Option<usize>,
    /// Override the task's specialization seed.
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    /// Override the task's specialization retry cap.
    #[arg(long, value_name = "R")]
    retries: Option<usize>,
}

fn finish_err(err: &CliError, json_mode: bool) -> ExitCode {
    let code = err.exit_code();
    if json_mode {
        let doc = json!({
            "schema": 1,
            "error": {
                "exit_code": code,
                "kind": err.kind(),
                "message": err.to_string(),
            },
        });
        println!(
            "{}",
            serde_json::to_string_pretty(&doc).expect("error serialization cannot fail")
        );
    } else {
        eprintln!("error: {err}");
    }
    ExitCode::from(code)
}

/// Run the command-line driver.
pub fn main() -> ExitCode {
    let args = Args::parse();
    let text = match std::fs::read_to_string(&args.input) {
        Ok(t) => t,
        Err(e) => {
            let err = CliError::Io {
                path: args.input.display().to_string(),
                message: e.to_string(),
            };
            return finish_err(&err, args.json);
        }
    };
    let base_dir = args.input.parent().map(Path::to_path_buf).unwrap_or_default();
    let ov = Overrides { bound: args.bound, seed: args.seed, retries: args.retries };
    let started = std::time::Instant::now();
    match execute(&text, &base_dir, &ov) {
        Ok(mut report) => {
            report.timing_ms = started.elapsed().as_millis();
            let rendered =
                if args.json { emit_json(&report) } else { emit_trace(&report) };
            print!("{rendered}");
            eprintln!("elapsed: {} ms", report.timing_ms);
            ExitCode::from(if report.verified { 0 } else { 1 })
        }
        Err(e) => finish_err(&e, args.json),
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
