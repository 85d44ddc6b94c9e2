//! Algebra expressions: syntax, reference semantics and compilation.

use std::collections::BTreeSet;
use std::path::Path;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use super::{join_eva, project_eva, union_eva_deterministic, union_eva_linear};
use crate::automata::{
    brute_enumerate_eva, brute_enumerate_va, classify, determinize_eva, eliminate_epsilon,
    functional_va_to_det_seva, va_to_eva, AnyAutomaton, Eva, Va,
};
use crate::error::{Error, Result};
use crate::model::{
    mapping_set_join, mapping_set_project, Alphabet, Document, MappingSet, Variable,
};
use crate::regex::{parse_rgx, rgx_eval_reference, rgx_to_va, RegexAst};

/// A leaf of an algebra expression.
#[derive(Clone, Debug)]
pub enum Atom {
    Va(Va),
    Eva(Eva),
    Regex { ast: RegexAst, alphabet: Alphabet },
}

impl Atom {
    pub fn variables(&self) -> BTreeSet<Variable> {
        match self {
            Atom::Va(a) => a.variables().clone(),
            Atom::Eva(a) => a.variables().clone(),
            Atom::Regex { ast, .. } => ast.variables(),
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        match self {
            Atom::Va(a) => a.alphabet().clone(),
            Atom::Eva(a) => a.alphabet().clone(),
            Atom::Regex { ast, alphabet } => {
                let mut s = alphabet.clone();
                s.extend(ast.symbols());
                s
            }
        }
    }

    /// States of the atom's automaton (after compiling a regex).
    pub fn num_states(&self) -> usize {
        match self {
            Atom::Va(a) => a.num_states(),
            Atom::Eva(a) => a.num_states(),
            Atom::Regex { ast, alphabet } => rgx_to_va(ast, alphabet).num_states(),
        }
    }

    fn semantics(&self, d: &Document) -> MappingSet {
        match self {
            Atom::Va(a) => brute_enumerate_va(a, d),
            Atom::Eva(a) => brute_enumerate_eva(a, d),
            Atom::Regex { ast, .. } => rgx_eval_reference(ast, d),
        }
    }

    /// Functional, ε-free eVA for the atom, not necessarily deterministic.
    fn to_functional_eva(&self) -> Result<Eva> {
        match self {
            Atom::Va(a) => {
                check_functional(&classify(a)?)?;
                Ok(va_to_eva(&a.trim()))
            }
            Atom::Regex { ast, alphabet } => Atom::Va(rgx_to_va(ast, alphabet)).to_functional_eva(),
            Atom::Eva(a) => {
                let a = eliminate_epsilon(a);
                check_functional(&classify(&a)?)?;
                Ok(a)
            }
        }
    }

    /// Deterministic functional eVA for the atom.
    fn to_det_eva(&self) -> Result<Eva> {
        match self {
            Atom::Va(a) => functional_va_to_det_seva(a),
            Atom::Regex { ast, alphabet } => functional_va_to_det_seva(&rgx_to_va(ast, alphabet)),
            Atom::Eva(_) => {
                let det = determinize_eva(&self.to_functional_eva()?)?;
                Ok(det)
            }
        }
    }
}

fn check_functional(r: &crate::automata::ClassificationReport) -> Result<()> {
    if r.functional {
        Ok(())
    } else {
        Err(Error::NotFunctional(
            r.functional_witness.clone().unwrap_or_default(),
        ))
    }
}

/// `e := atom | π_Y(e) | e ∪ e | e ⋈ e`.
#[derive(Clone, Debug)]
pub enum AlgebraExpr {
    Atom(Atom),
    Project(BTreeSet<Variable>, Box<AlgebraExpr>),
    Union(Box<AlgebraExpr>, Box<AlgebraExpr>),
    Join(Box<AlgebraExpr>, Box<AlgebraExpr>),
}

impl AlgebraExpr {
    pub fn atom(a: Atom) -> Self {
        AlgebraExpr::Atom(a)
    }

    pub fn project(vars: BTreeSet<Variable>, e: AlgebraExpr) -> Self {
        AlgebraExpr::Project(vars, Box::new(e))
    }

    pub fn union(l: AlgebraExpr, r: AlgebraExpr) -> Self {
        AlgebraExpr::Union(Box::new(l), Box::new(r))
    }

    pub fn join(l: AlgebraExpr, r: AlgebraExpr) -> Self {
        AlgebraExpr::Join(Box::new(l), Box::new(r))
    }

    /// Output variables of the expression.
    pub fn variables(&self) -> BTreeSet<Variable> {
        match self {
            AlgebraExpr::Atom(a) => a.variables(),
            AlgebraExpr::Project(y, e) => e.variables().intersection(y).cloned().collect(),
            AlgebraExpr::Union(l, _) => l.variables(),
            AlgebraExpr::Join(l, r) => l.variables().union(&r.variables()).cloned().collect(),
        }
    }

    pub fn has_project(&self) -> bool {
        match self {
            AlgebraExpr::Atom(_) => false,
            AlgebraExpr::Project(..) => true,
            AlgebraExpr::Union(l, r) | AlgebraExpr::Join(l, r) => {
                l.has_project() || r.has_project()
            }
        }
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        match self {
            AlgebraExpr::Atom(a) => vec![a],
            AlgebraExpr::Project(_, e) => e.atoms(),
            AlgebraExpr::Union(l, r) | AlgebraExpr::Join(l, r) => {
                let mut v = l.atoms();
                v.extend(r.atoms());
                v
            }
        }
    }

    /// Union of the atoms' alphabets.
    pub fn alphabet(&self) -> Alphabet {
        self.atoms().iter().flat_map(|a| a.alphabet()).collect()
    }

    /// Checks that both sides of every union have the same variables.
    pub fn validate(&self) -> Result<()> {
        match self {
            AlgebraExpr::Atom(_) => Ok(()),
            AlgebraExpr::Project(_, e) => e.validate(),
            AlgebraExpr::Union(l, r) => {
                l.validate()?;
                r.validate()?;
                let (lv, rv) = (l.variables(), r.variables());
                if lv != rv {
                    return Err(Error::VariableMismatch(format!(
                        "union of {lv:?} and {rv:?}"
                    )));
                }
                Ok(())
            }
            AlgebraExpr::Join(l, r) => {
                l.validate()?;
                r.validate()
            }
        }
    }
}

/// Set-level semantics: atoms by exhaustive search, operators on mapping
/// sets.
pub fn evaluate_reference(e: &AlgebraExpr, d: &Document) -> MappingSet {
    match e {
        AlgebraExpr::Atom(a) => a.semantics(d),
        AlgebraExpr::Project(y, e) => mapping_set_project(&evaluate_reference(e, d), y),
        AlgebraExpr::Union(l, r) => {
            let mut out = evaluate_reference(l, d);
            out.extend(evaluate_reference(r, d));
            out
        }
        AlgebraExpr::Join(l, r) => {
            mapping_set_join(&evaluate_reference(l, d), &evaluate_reference(r, d))
        }
    }
}

/// How [`compile_expr`] combines sub-automata.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Determinize atoms, then combine with determinism-preserving
    /// constructions when the expression has no projection; otherwise
    /// combine nondeterministically and determinize once.
    #[default]
    Auto,
    /// Combine nondeterministically, determinize at the end.
    DeterminizeLast,
    /// Determinize atoms first. Not available with projections.
    DeterminizeFirst,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Strategy::Auto),
            "prop7" | "last" => Ok(Strategy::DeterminizeLast),
            "prop8" | "first" => Ok(Strategy::DeterminizeFirst),
            _ => Err(Error::Precondition(format!("unknown strategy {s:?}"))),
        }
    }
}

/// Size of one intermediate automaton.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StageReport {
    pub stage: String,
    pub states: usize,
    pub transitions: usize,
}

/// Sizes observed while compiling an expression.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompileReport {
    pub strategy: String,
    pub stages: Vec<StageReport>,
    pub states: usize,
    pub transitions: usize,
    /// State bound of the strategy, in terms of the atoms' state counts.
    pub state_bound: String,
    pub within_bound: bool,
}

fn pow2(e: usize) -> Option<u128> {
    u32::try_from(e).ok().and_then(|e| 2u128.checked_pow(e))
}

fn record(stages: &mut Vec<StageReport>, stage: &str, a: &Eva) {
    debug!(
        "{stage}: {} states, {} transitions",
        a.num_states(),
        a.num_transitions()
    );
    stages.push(StageReport {
        stage: stage.to_string(),
        states: a.num_states(),
        transitions: a.num_transitions(),
    });
}

fn compile_first(e: &AlgebraExpr, stages: &mut Vec<StageReport>) -> Result<Eva> {
    let out = match e {
        AlgebraExpr::Atom(a) => {
            let det = a.to_det_eva()?;
            let bound = pow2(a.num_states());
            assert!(
                bound.is_none_or(|b| (det.num_states() as u128) < b),
                "atom determinization exceeds 2^n - 1 states"
            );
            record(stages, "atom", &det);
            det
        }
        AlgebraExpr::Join(l, r) => {
            let (l, r) = (compile_first(l, stages)?, compile_first(r, stages)?);
            let j = join_eva(&l, &r)?;
            record(stages, "join", &j);
            j
        }
        AlgebraExpr::Union(l, r) => {
            let (l, r) = (compile_first(l, stages)?, compile_first(r, stages)?);
            let u = union_eva_deterministic(&l, &r)?;
            record(stages, "union", &u);
            u
        }
        AlgebraExpr::Project(..) => {
            return Err(Error::Precondition(
                "determinize-first compilation does not support projection".into(),
            ))
        }
    };
    Ok(out)
}

fn compile_last(e: &AlgebraExpr, stages: &mut Vec<StageReport>) -> Result<Eva> {
    let out = match e {
        AlgebraExpr::Atom(a) => {
            let f = a.to_functional_eva()?;
            record(stages, "atom", &f);
            f
        }
        AlgebraExpr::Join(l, r) => {
            let (l, r) = (compile_last(l, stages)?, compile_last(r, stages)?);
            let j = join_eva(&l, &r)?;
            record(stages, "join", &j);
            j
        }
        AlgebraExpr::Union(l, r) => {
            let (l, r) = (compile_last(l, stages)?, compile_last(r, stages)?);
            let u = union_eva_linear(&l, &r)?;
            record(stages, "union", &u);
            u
        }
        AlgebraExpr::Project(y, e) => {
            let inner = compile_last(e, stages)?;
            let p = project_eva(&inner, y)?;
            record(stages, "project", &p);
            p
        }
    };
    Ok(out)
}

/// Compiles an expression to a deterministic sequential eVA.
pub fn compile_expr(e: &AlgebraExpr, strategy: Strategy) -> Result<(Eva, CompileReport)> {
    e.validate()?;
    let first = match strategy {
        Strategy::Auto => !e.has_project(),
        Strategy::DeterminizeFirst => true,
        Strategy::DeterminizeLast => false,
    };
    let atoms = e.atoms();
    let sizes: Vec<usize> = atoms.iter().map(|a| a.num_states()).collect();
    let mut stages = Vec::new();
    let (mut out, state_bound, within) = if first {
        let out = compile_first(e, &mut stages)?;
        let total: usize = sizes.iter().sum();
        let within = pow2(total).is_none_or(|b| (out.num_states() as u128) <= b);
        assert!(
            within,
            "determinize-first result exceeds 2^(n1+...+nk) states"
        );
        (out, format!("2^{total}"), within)
    } else {
        let nondet = compile_last(e, &mut stages)?;
        let det = determinize_eva(&nondet)?;
        record(&mut stages, "determinize", &det);
        assert!(
            pow2(nondet.num_states()).is_none_or(|b| (det.num_states() as u128) < b),
            "determinization exceeds 2^n - 1 states"
        );
        let n = sizes.iter().copied().max().unwrap_or(0);
        let k = atoms.len();
        let exponent = u32::try_from(k).ok().and_then(|k| n.checked_pow(k));
        let within = exponent
            .and_then(pow2)
            .is_none_or(|b| (det.num_states() as u128) <= b);
        if !within {
            warn!(
                "determinized result has {} states, above 2^(n^k) with n={n}, k={k}",
                det.num_states()
            );
        }
        (det, format!("2^({n}^{k})"), within)
    };
    out.extend_alphabet(&e.alphabet());
    let report = CompileReport {
        strategy: if first {
            "determinize-first"
        } else {
            "determinize-last"
        }
        .to_string(),
        states: out.num_states(),
        transitions: out.num_transitions(),
        stages,
        state_bound,
        within_bound: within,
    };
    Ok((out, report))
}

/// Unresolved expression syntax, as written in text or JSON.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum ExprSyntax {
    Atom {
        file: String,
    },
    Rgx {
        pattern: String,
    },
    Project {
        vars: Vec<String>,
        child: Box<ExprSyntax>,
    },
    Union {
        left: Box<ExprSyntax>,
        right: Box<ExprSyntax>,
    },
    Join {
        left: Box<ExprSyntax>,
        right: Box<ExprSyntax>,
    },
}

impl ExprSyntax {
    /// Regex patterns of all `rgx(...)` leaves.
    pub fn patterns(&self) -> Vec<&str> {
        match self {
            ExprSyntax::Atom { .. } => vec![],
            ExprSyntax::Rgx { pattern } => vec![pattern.as_str()],
            ExprSyntax::Project { child, .. } => child.patterns(),
            ExprSyntax::Union { left, right } | ExprSyntax::Join { left, right } => {
                let mut v = left.patterns();
                v.extend(right.patterns());
                v
            }
        }
    }

    /// Loads automaton files relative to `base` and parses regexes over
    /// `alphabet`.
    pub fn resolve(&self, base: &Path, alphabet: &Alphabet) -> Result<AlgebraExpr> {
        Ok(match self {
            ExprSyntax::Atom { file } => match AnyAutomaton::load(&base.join(file))? {
                AnyAutomaton::Va(a) => AlgebraExpr::Atom(Atom::Va(a)),
                AnyAutomaton::Eva(a) => AlgebraExpr::Atom(Atom::Eva(a)),
            },
            ExprSyntax::Rgx { pattern } => AlgebraExpr::Atom(Atom::Regex {
                ast: parse_rgx(pattern, alphabet)?,
                alphabet: alphabet.clone(),
            }),
            ExprSyntax::Project { vars, child } => AlgebraExpr::project(
                vars.iter().map(|v| Variable::new(v)).collect(),
                child.resolve(base, alphabet)?,
            ),
            ExprSyntax::Union { left, right } => AlgebraExpr::union(
                left.resolve(base, alphabet)?,
                right.resolve(base, alphabet)?,
            ),
            ExprSyntax::Join { left, right } => AlgebraExpr::join(
                left.resolve(base, alphabet)?,
                right.resolve(base, alphabet)?,
            ),
        })
    }
}

struct ExprParser {
    chars: Vec<char>,
    pos: usize,
}

impl ExprParser {
    fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> Result<()> {
        self.skip_ws();
        if self.chars.get(self.pos) == Some(&c) {
            self.pos += 1;
            Ok(())
        } else {
            self.error(format!("expected {c:?}"))
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self
            .chars
            .get(self.pos)
            .is_some_and(|c| c.is_alphanumeric() || *c == '_')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return self.error("expected an identifier");
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn string(&mut self) -> Result<String> {
        self.eat('"')?;
        let mut out = String::new();
        loop {
            match self.chars.get(self.pos) {
                None => return self.error("unterminated string"),
                Some('"') => {
                    self.pos += 1;
                    return Ok(out);
                }
                // Only `\"` is unescaped; other backslash pairs reach the
                // regex parser unchanged.
                Some('\\') if self.chars.get(self.pos + 1) == Some(&'"') => {
                    out.push('"');
                    self.pos += 2;
                }
                Some('\\') if self.chars.get(self.pos + 1) == Some(&'\\') => {
                    out.push_str("\\\\");
                    self.pos += 2;
                }
                Some(&c) => {
                    out.push(c);
                    self.pos += 1;
                }
            }
        }
    }

    fn path(&mut self) -> Result<String> {
        self.skip_ws();
        if self.chars.get(self.pos) == Some(&'"') {
            return self.string();
        }
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| *c != ')') {
            self.pos += 1;
        }
        let path: String = self.chars[start..self.pos].iter().collect();
        let path = path.trim().to_string();
        if path.is_empty() {
            return self.error("expected a file path");
        }
        Ok(path)
    }

    fn expr(&mut self) -> Result<ExprSyntax> {
        let op = self.ident()?;
        self.eat('(')?;
        let node = match op.as_str() {
            "atom" => ExprSyntax::Atom { file: self.path()? },
            "rgx" => ExprSyntax::Rgx {
                pattern: self.string()?,
            },
            "project" => {
                self.eat('[')?;
                let mut vars = Vec::new();
                self.skip_ws();
                if self.chars.get(self.pos) != Some(&']') {
                    vars.push(self.ident()?);
                    loop {
                        self.skip_ws();
                        if self.chars.get(self.pos) == Some(&',') {
                            self.pos += 1;
                            vars.push(self.ident()?);
                        } else {
                            break;
                        }
                    }
                }
                self.eat(']')?;
                self.eat(',')?;
                ExprSyntax::Project {
                    vars,
                    child: Box::new(self.expr()?),
                }
            }
            "union" | "join" => {
                let left = Box::new(self.expr()?);
                self.eat(',')?;
                let right = Box::new(self.expr()?);
                if op == "union" {
                    ExprSyntax::Union { left, right }
                } else {
                    ExprSyntax::Join { left, right }
                }
            }
            other => return self.error(format!("unknown operator {other:?}")),
        };
        self.eat(')')?;
        Ok(node)
    }
}

/// Parses the text form (`join(e1,e2)`, `union(e1,e2)`, `project([x,y],e)`,
/// `atom(file.json)`, `rgx("...")`) or the JSON tree form.
pub fn parse_expr(text: &str) -> Result<ExprSyntax> {
    if text.trim_start().starts_with('{') {
        return Ok(serde_json::from_str(text)?);
    }
    let mut p = ExprParser {
        chars: text.chars().collect(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.chars.len() {
        return p.error("trailing input");
    }
    Ok(e)
}
