//! Regex formulas: parsing, reference semantics and compilation to VA.
//!
//! Concrete syntax: juxtaposition concatenates, `|` is disjunction, `*` is
//! postfix star, `x{...}` captures into variable `x`, `(...)` groups, `.`
//! stands for any symbol of the declared alphabet and `\` escapes a
//! metacharacter. An empty branch or `()` denotes the empty word.
//!
//! A variable name is the longest run of identifier characters (letters,
//! digits, `_`) directly before `{`; write `a(x{...})` to capture after a
//! literal letter.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::automata::{StateId, Va, VaLabel};
use crate::error::{Error, Result};
use crate::model::{Alphabet, Document, Mapping, MappingSet, Marker, Span, Variable};

/// Abstract syntax of a regex formula.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegexAst {
    Epsilon,
    Symbol {
        symbol: char,
    },
    Capture {
        var: Variable,
        child: Box<RegexAst>,
    },
    Concat {
        left: Box<RegexAst>,
        right: Box<RegexAst>,
    },
    Alt {
        left: Box<RegexAst>,
        right: Box<RegexAst>,
    },
    Star {
        child: Box<RegexAst>,
    },
}

impl RegexAst {
    pub fn symbol(c: char) -> Self {
        RegexAst::Symbol { symbol: c }
    }

    pub fn capture(x: &str, child: RegexAst) -> Self {
        RegexAst::Capture {
            var: Variable::new(x),
            child: Box::new(child),
        }
    }

    pub fn concat(left: RegexAst, right: RegexAst) -> Self {
        RegexAst::Concat {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn alt(left: RegexAst, right: RegexAst) -> Self {
        RegexAst::Alt {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn star(child: RegexAst) -> Self {
        RegexAst::Star {
            child: Box::new(child),
        }
    }

    /// `var(γ)`: every variable occurring in the formula.
    pub fn variables(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        self.visit(&mut |node| {
            if let RegexAst::Capture { var, .. } = node {
                out.insert(var.clone());
            }
        });
        out
    }

    /// Every symbol occurring in the formula.
    pub fn symbols(&self) -> Alphabet {
        let mut out = Alphabet::new();
        self.visit(&mut |node| {
            if let RegexAst::Symbol { symbol } = node {
                out.insert(*symbol);
            }
        });
        out
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    fn visit<F: FnMut(&RegexAst)>(&self, f: &mut F) {
        f(self);
        match self {
            RegexAst::Epsilon | RegexAst::Symbol { .. } => {}
            RegexAst::Capture { child, .. } | RegexAst::Star { child } => child.visit(f),
            RegexAst::Concat { left, right } | RegexAst::Alt { left, right } => {
                left.visit(f);
                right.visit(f);
            }
        }
    }
}

const META: &[char] = &['(', ')', '|', '*', '{', '}', '.', '\\'];

fn is_ident(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    alphabet: &'a Alphabet,
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn alt(&mut self) -> Result<RegexAst> {
        let mut left = self.concat()?;
        while self.peek() == Some('|') {
            self.pos += 1;
            let right = self.concat()?;
            left = RegexAst::alt(left, right);
        }
        Ok(left)
    }

    fn concat(&mut self) -> Result<RegexAst> {
        let mut items = Vec::new();
        while let Some(c) = self.peek() {
            if matches!(c, '|' | ')' | '}') {
                break;
            }
            items.push(self.repeat()?);
        }
        Ok(items
            .into_iter()
            .reduce(RegexAst::concat)
            .unwrap_or(RegexAst::Epsilon))
    }

    fn repeat(&mut self) -> Result<RegexAst> {
        let mut node = self.atom()?;
        while self.peek() == Some('*') {
            self.pos += 1;
            node = RegexAst::star(node);
        }
        Ok(node)
    }

    fn expect(&mut self, c: char) -> Result<()> {
        match self.peek() {
            Some(d) if d == c => {
                self.pos += 1;
                Ok(())
            }
            Some(d) => self.error(format!("expected {c:?}, found {d:?}")),
            None => self.error(format!("expected {c:?}, found end of input")),
        }
    }

    fn literal(&mut self, c: char) -> Result<RegexAst> {
        if !self.alphabet.contains(&c) {
            return Err(Error::UndeclaredSymbol(c));
        }
        self.pos += 1;
        Ok(RegexAst::symbol(c))
    }

    fn atom(&mut self) -> Result<RegexAst> {
        let Some(c) = self.peek() else {
            return self.error("unexpected end of input");
        };
        match c {
            '(' => {
                self.pos += 1;
                let inner = self.alt()?;
                self.expect(')')?;
                Ok(inner)
            }
            '.' => {
                if self.alphabet.is_empty() {
                    return self.error("'.' needs a nonempty alphabet");
                }
                self.pos += 1;
                Ok(self
                    .alphabet
                    .iter()
                    .map(|&a| RegexAst::symbol(a))
                    .reduce(RegexAst::alt)
                    .expect("nonempty alphabet"))
            }
            '\\' => {
                self.pos += 1;
                match self.peek() {
                    Some(e) => self.literal(e),
                    None => self.error("dangling escape"),
                }
            }
            '*' | '{' | '}' | '|' | ')' => self.error(format!("unexpected {c:?}")),
            _ => {
                if is_ident(c) {
                    let mut end = self.pos;
                    while end < self.chars.len() && is_ident(self.chars[end]) {
                        end += 1;
                    }
                    if self.chars.get(end) == Some(&'{') {
                        let name: String = self.chars[self.pos..end].iter().collect();
                        self.pos = end + 1;
                        let inner = self.alt()?;
                        self.expect('}')?;
                        return Ok(RegexAst::capture(&name, inner));
                    }
                }
                self.literal(c)
            }
        }
    }
}

/// Parses a regex formula over `alphabet`.
pub fn parse_rgx(text: &str, alphabet: &Alphabet) -> Result<RegexAst> {
    let mut p = Parser {
        chars: text.chars().collect(),
        pos: 0,
        alphabet,
    };
    let ast = p.alt()?;
    if p.pos != p.chars.len() {
        return p.error(format!("unexpected {:?}", p.chars[p.pos]));
    }
    Ok(ast)
}

/// Literal symbols written in a regex text (escapes resolved, `.` ignored).
/// Useful to derive a default alphabet.
pub fn literal_symbols(text: &str) -> Alphabet {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Alphabet::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '\\' {
            if let Some(&e) = chars.get(i + 1) {
                out.insert(e);
            }
            i += 2;
            continue;
        }
        if is_ident(c) {
            let mut end = i;
            while end < chars.len() && is_ident(chars[end]) {
                end += 1;
            }
            if chars.get(end) == Some(&'{') {
                i = end + 1;
                continue;
            }
        }
        if !META.contains(&c) {
            out.insert(c);
        }
        i += 1;
    }
    out
}

type Pairs = BTreeSet<(Span, Mapping)>;

fn concat_pairs(left: &Pairs, right: &Pairs) -> Pairs {
    let mut by_start: BTreeMap<usize, Vec<&(Span, Mapping)>> = BTreeMap::new();
    for pair in right {
        by_start.entry(pair.0.start).or_default().push(pair);
    }
    let mut out = Pairs::new();
    for (s1, m1) in left {
        for (s2, m2) in by_start.get(&s1.end).map(Vec::as_slice).unwrap_or(&[]) {
            if m1.iter().all(|(x, _)| !m2.contains(x)) {
                let m = m1.union(m2).expect("disjoint domains");
                out.insert((Span::new(s1.start, s2.end), m));
            }
        }
    }
    out
}

fn eval_pairs(g: &RegexAst, d: &Document) -> Pairs {
    let n = d.len();
    match g {
        RegexAst::Epsilon => (1..=n + 1)
            .map(|i| (Span::new(i, i), Mapping::new()))
            .collect(),
        RegexAst::Symbol { symbol } => (1..=n)
            .filter(|&i| d.at(i) == *symbol)
            .map(|i| (Span::new(i, i + 1), Mapping::new()))
            .collect(),
        RegexAst::Capture { var, child } => eval_pairs(child, d)
            .into_iter()
            .filter(|(_, m)| !m.contains(var))
            .map(|(s, mut m)| {
                m.insert(var.clone(), s);
                (s, m)
            })
            .collect(),
        RegexAst::Concat { left, right } => {
            concat_pairs(&eval_pairs(left, d), &eval_pairs(right, d))
        }
        RegexAst::Alt { left, right } => {
            let mut out = eval_pairs(left, d);
            out.extend(eval_pairs(right, d));
            out
        }
        RegexAst::Star { child } => {
            let body = eval_pairs(child, d);
            let mut all = eval_pairs(&RegexAst::Epsilon, d);
            all.extend(body.iter().cloned());
            let mut delta = all.clone();
            while !delta.is_empty() {
                let fresh: Pairs = concat_pairs(&delta, &body)
                    .into_iter()
                    .filter(|p| !all.contains(p))
                    .collect();
                all.extend(fresh.iter().cloned());
                delta = fresh;
            }
            all
        }
    }
}

/// `⟦γ⟧_d` computed directly from the inductive definition over
/// (span, mapping) pairs.
pub fn rgx_eval_reference(g: &RegexAst, d: &Document) -> MappingSet {
    let whole = Span::new(1, d.len() + 1);
    eval_pairs(g, d)
        .into_iter()
        .filter(|(s, _)| *s == whole)
        .map(|(_, m)| m)
        .collect()
}

/// Thompson-style ε-NFA under construction.
struct Thompson {
    labels: Vec<Vec<(Option<VaLabel>, usize)>>,
}

impl Thompson {
    fn state(&mut self) -> usize {
        self.labels.push(Vec::new());
        self.labels.len() - 1
    }

    fn edge(&mut self, p: usize, l: Option<VaLabel>, q: usize) {
        self.labels[p].push((l, q));
    }

    fn build(&mut self, g: &RegexAst) -> (usize, usize) {
        match g {
            RegexAst::Epsilon => {
                let (s, e) = (self.state(), self.state());
                self.edge(s, None, e);
                (s, e)
            }
            RegexAst::Symbol { symbol } => {
                let (s, e) = (self.state(), self.state());
                self.edge(s, Some(VaLabel::Symbol(*symbol)), e);
                (s, e)
            }
            RegexAst::Capture { var, child } => {
                let s = self.state();
                let (cs, ce) = self.build(child);
                let e = self.state();
                self.edge(s, Some(VaLabel::Marker(Marker::open(var.clone()))), cs);
                self.edge(ce, Some(VaLabel::Marker(Marker::close(var.clone()))), e);
                (s, e)
            }
            RegexAst::Concat { left, right } => {
                let (ls, le) = self.build(left);
                let (rs, re) = self.build(right);
                self.edge(le, None, rs);
                (ls, re)
            }
            RegexAst::Alt { left, right } => {
                let s = self.state();
                let (ls, le) = self.build(left);
                let (rs, re) = self.build(right);
                let e = self.state();
                self.edge(s, None, ls);
                self.edge(s, None, rs);
                self.edge(le, None, e);
                self.edge(re, None, e);
                (s, e)
            }
            RegexAst::Star { child } => {
                let s = self.state();
                let (cs, ce) = self.build(child);
                let e = self.state();
                self.edge(s, None, cs);
                self.edge(s, None, e);
                self.edge(ce, None, cs);
                self.edge(ce, None, e);
                (s, e)
            }
        }
    }

    fn closure(&self, q: usize) -> Vec<usize> {
        let mut out = vec![q];
        let mut seen = HashSet::from([q]);
        let mut k = 0;
        while k < out.len() {
            for (l, r) in &self.labels[out[k]] {
                if l.is_none() && seen.insert(*r) {
                    out.push(*r);
                }
            }
            k += 1;
        }
        out
    }
}

/// Compiles a regex formula to an equivalent VA with `O(|γ|)` states.
///
/// The ε-NFA produced by the Thompson construction has its ε transitions
/// removed by closure; states are then numbered in breadth-first order from
/// the initial state, dropping unreachable ones.
pub fn rgx_to_va(g: &RegexAst, alphabet: &Alphabet) -> Va {
    let mut sigma = alphabet.clone();
    sigma.extend(g.symbols());
    let mut t = Thompson { labels: Vec::new() };
    let (start, end) = t.build(g);

    let mut index: BTreeMap<usize, StateId> = BTreeMap::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::from([start]);
    index.insert(start, 0);
    let mut moves: Vec<Vec<(VaLabel, usize)>> = Vec::new();
    let mut finals = Vec::new();
    while let Some(q) = queue.pop_front() {
        order.push(q);
        let mut own = Vec::new();
        let mut is_final = false;
        for p in t.closure(q) {
            is_final |= p == end;
            for (l, r) in &t.labels[p] {
                if let Some(l) = l {
                    own.push((l.clone(), *r));
                    if !index.contains_key(r) {
                        index.insert(*r, index.len());
                        queue.push_back(*r);
                    }
                }
            }
        }
        moves.push(own);
        finals.push(is_final);
    }

    let mut va = Va::empty(sigma, g.variables());
    for (k, &is_final) in finals.iter().enumerate() {
        va.add_state(format!("q{k}"));
        va.set_final(k, is_final);
    }
    for (k, own) in moves.into_iter().enumerate() {
        for (l, r) in own {
            va.add_transition(k, l, index[&r]);
        }
    }
    va
}
