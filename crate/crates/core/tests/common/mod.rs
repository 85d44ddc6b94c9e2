//! Independent reference semantics used by the integration suites.
//!
//! Nothing here calls into the library's own evaluation code: the oracles
//! only read automata and formulas through their public structure.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use spanner_core::algebra::{AlgebraExpr, Atom};
use spanner_core::prelude::*;

/// Per-variable progress of a ref-word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Unseen,
    Open(usize),
    Closed(usize, usize),
}

fn open_bit(v: usize) -> u64 {
    1 << (2 * v)
}

fn close_bit(v: usize) -> u64 {
    1 << (2 * v + 1)
}

fn marker_bit(vars: &[Variable], m: &Marker) -> u64 {
    let v = vars
        .iter()
        .position(|x| *x == m.var)
        .expect("declared variable");
    if m.is_open() {
        open_bit(v)
    } else {
        close_bit(v)
    }
}

/// Marker subsets that may be placed at the current position.
fn choices(status: &[Status]) -> Vec<u64> {
    let mut avail = 0u64;
    for (v, s) in status.iter().enumerate() {
        match s {
            Status::Unseen => avail |= open_bit(v) | close_bit(v),
            Status::Open(_) => avail |= close_bit(v),
            Status::Closed(..) => {}
        }
    }
    let mut out = Vec::new();
    let mut sub = avail;
    loop {
        let ok = status.iter().enumerate().all(|(v, s)| {
            *s != Status::Unseen || sub & close_bit(v) == 0 || sub & open_bit(v) != 0
        });
        if ok {
            out.push(sub);
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & avail;
    }
    out
}

fn apply(status: &[Status], set: u64, i: usize) -> Vec<Status> {
    status
        .iter()
        .enumerate()
        .map(|(v, &s)| {
            let s = if set & open_bit(v) != 0 {
                Status::Open(i)
            } else {
                s
            };
            match s {
                Status::Open(o) if set & close_bit(v) != 0 => Status::Closed(o, i),
                s => s,
            }
        })
        .collect()
}

fn to_mapping(vars: &[Variable], status: &[Status]) -> Option<Mapping> {
    let mut m = Mapping::new();
    for (x, s) in vars.iter().zip(status) {
        match s {
            Status::Unseen => {}
            Status::Open(_) => return None,
            Status::Closed(i, j) => {
                m.insert(x.clone(), Span::new(*i, *j));
            }
        }
    }
    Some(m)
}

/// How an automaton moves through one variable slot.
trait Stepper {
    fn vars(&self) -> &[Variable];
    fn start(&self) -> BTreeSet<usize>;
    fn markers(&self, from: &BTreeSet<usize>, set: u64) -> BTreeSet<usize>;
    fn letter(&self, from: &BTreeSet<usize>, c: char) -> BTreeSet<usize>;
    fn accepting(&self, at: &BTreeSet<usize>) -> bool;
}

/// Depth-first search over ref-words: at each position choose a valid
/// marker subset, simulate the automaton's state set, prune when it dies.
fn ref_word_search<S: Stepper>(a: &S, d: &Document) -> MappingSet {
    fn go<S: Stepper>(
        a: &S,
        d: &Document,
        i: usize,
        states: &BTreeSet<usize>,
        status: &[Status],
        out: &mut MappingSet,
    ) {
        for set in choices(status) {
            let after = a.markers(states, set);
            if after.is_empty() {
                continue;
            }
            let next_status = apply(status, set, i);
            if i == d.len() + 1 {
                if a.accepting(&after) {
                    if let Some(m) = to_mapping(a.vars(), &next_status) {
                        out.insert(m);
                    }
                }
                continue;
            }
            let moved = a.letter(&after, d.at(i));
            if !moved.is_empty() {
                go(a, d, i + 1, &moved, &next_status, out);
            }
        }
    }
    let mut out = MappingSet::new();
    let status = vec![Status::Unseen; a.vars().len()];
    go(a, d, 1, &a.start(), &status, &mut out);
    out
}

struct VaStepper<'a> {
    a: &'a Va,
    vars: Vec<Variable>,
    marker_edges: Vec<Vec<(u64, usize)>>,
}

impl Stepper for VaStepper<'_> {
    fn vars(&self) -> &[Variable] {
        &self.vars
    }

    fn start(&self) -> BTreeSet<usize> {
        [self.a.initial()].into()
    }

    /// States reachable by a path of marker transitions that uses every
    /// marker of `set` exactly once. Order within a position is free:
    /// validity only compares positions.
    fn markers(&self, from: &BTreeSet<usize>, set: u64) -> BTreeSet<usize> {
        if set == 0 {
            return from.clone();
        }
        let mut seen: BTreeSet<(usize, u64)> = from.iter().map(|&q| (q, 0)).collect();
        let mut stack: Vec<(usize, u64)> = seen.iter().copied().collect();
        let mut out = BTreeSet::new();
        while let Some((q, used)) = stack.pop() {
            if used == set {
                out.insert(q);
                continue;
            }
            for &(bit, r) in &self.marker_edges[q] {
                if set & bit == 0 || used & bit != 0 {
                    continue;
                }
                if seen.insert((r, used | bit)) {
                    stack.push((r, used | bit));
                }
            }
        }
        out
    }

    fn letter(&self, from: &BTreeSet<usize>, c: char) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for &q in from {
            for (l, r) in self.a.out(q) {
                if *l == VaLabel::Symbol(c) {
                    out.insert(*r);
                }
            }
        }
        out
    }

    fn accepting(&self, at: &BTreeSet<usize>) -> bool {
        at.iter().any(|&q| self.a.is_final(q))
    }
}

/// Reference semantics of a VA: the mappings of its valid accepting runs.
pub fn va_semantics(a: &Va, d: &Document) -> MappingSet {
    let vars: Vec<Variable> = a.variables().iter().cloned().collect();
    assert!(vars.len() <= 31);
    let marker_edges = a
        .states()
        .map(|q| {
            a.out(q)
                .iter()
                .filter_map(|(l, r)| match l {
                    VaLabel::Marker(m) => Some((marker_bit(&vars, m), *r)),
                    VaLabel::Symbol(_) => None,
                })
                .collect()
        })
        .collect();
    ref_word_search(
        &VaStepper {
            a,
            vars,
            marker_edges,
        },
        d,
    )
}

struct EvaStepper<'a> {
    a: &'a Eva,
    vars: Vec<Variable>,
}

impl EvaStepper<'_> {
    fn closure(&self, mut set: BTreeSet<usize>) -> BTreeSet<usize> {
        let mut stack: Vec<usize> = set.iter().copied().collect();
        while let Some(q) = stack.pop() {
            for (l, r) in self.a.out(q) {
                if *l == EvaLabel::Epsilon && set.insert(*r) {
                    stack.push(*r);
                }
            }
        }
        set
    }
}

impl Stepper for EvaStepper<'_> {
    fn vars(&self) -> &[Variable] {
        &self.vars
    }

    fn start(&self) -> BTreeSet<usize> {
        self.closure([self.a.initial()].into())
    }

    /// An empty slot keeps the state; otherwise exactly one transition whose
    /// label is `set`.
    fn markers(&self, from: &BTreeSet<usize>, set: u64) -> BTreeSet<usize> {
        if set == 0 {
            return from.clone();
        }
        let mut out = BTreeSet::new();
        for &q in from {
            for (l, r) in self.a.out(q) {
                if let EvaLabel::Markers(s) = l {
                    let bits = s.iter().fold(0, |acc, m| acc | marker_bit(&self.vars, m));
                    if bits == set {
                        out.insert(*r);
                    }
                }
            }
        }
        self.closure(out)
    }

    fn letter(&self, from: &BTreeSet<usize>, c: char) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for &q in from {
            for (l, r) in self.a.out(q) {
                if *l == EvaLabel::Symbol(c) {
                    out.insert(*r);
                }
            }
        }
        self.closure(out)
    }

    fn accepting(&self, at: &BTreeSet<usize>) -> bool {
        at.iter().any(|&q| self.a.is_final(q))
    }
}

/// Reference semantics of an eVA, ε transitions read as aliases.
pub fn eva_semantics(a: &Eva, d: &Document) -> MappingSet {
    let vars: Vec<Variable> = a.variables().iter().cloned().collect();
    assert!(vars.len() <= 31);
    ref_word_search(&EvaStepper { a, vars }, d)
}

pub fn any_semantics(a: &AnyAutomaton, d: &Document) -> MappingSet {
    match a {
        AnyAutomaton::Va(a) => va_semantics(a, d),
        AnyAutomaton::Eva(a) => eva_semantics(a, d),
    }
}

/// Flattened formula for memoized evaluation.
enum Node {
    Epsilon,
    Symbol(char),
    Capture(Variable, usize),
    Concat(usize, usize),
    Alt(usize, usize),
    Star(usize),
}

fn flatten(g: &RegexAst, nodes: &mut Vec<Node>) -> usize {
    let node = match g {
        RegexAst::Epsilon => Node::Epsilon,
        RegexAst::Symbol { symbol } => Node::Symbol(*symbol),
        RegexAst::Capture { var, child } => Node::Capture(var.clone(), flatten(child, nodes)),
        RegexAst::Concat { left, right } => {
            Node::Concat(flatten(left, nodes), flatten(right, nodes))
        }
        RegexAst::Alt { left, right } => Node::Alt(flatten(left, nodes), flatten(right, nodes)),
        RegexAst::Star { child } => Node::Star(flatten(child, nodes)),
    };
    nodes.push(node);
    nodes.len() - 1
}

fn disjoint_union(m1: &Mapping, m2: &Mapping) -> Option<Mapping> {
    if m1.iter().any(|(x, _)| m2.contains(x)) {
        return None;
    }
    let mut out = m1.clone();
    for (x, s) in m2.iter() {
        out.insert(x.clone(), *s);
    }
    Some(out)
}

struct RegexOracle<'d> {
    nodes: Vec<Node>,
    doc: &'d Document,
    memo: HashMap<(usize, usize, usize), MappingSet>,
}

impl RegexOracle<'_> {
    /// Mappings produced by node `g` matching exactly the span `[i,j>`.
    fn sem(&mut self, g: usize, i: usize, j: usize) -> MappingSet {
        if let Some(m) = self.memo.get(&(g, i, j)) {
            return m.clone();
        }
        let out = match self.nodes[g] {
            Node::Epsilon => unit_if(i == j),
            Node::Symbol(c) => unit_if(j == i + 1 && self.doc.at(i) == c),
            Node::Capture(ref x, child) => {
                let x = x.clone();
                self.sem(child, i, j)
                    .into_iter()
                    .filter(|m| !m.contains(&x))
                    .map(|mut m| {
                        m.insert(x.clone(), Span::new(i, j));
                        m
                    })
                    .collect()
            }
            Node::Concat(l, r) => {
                let mut out = MappingSet::new();
                for k in i..=j {
                    let left = self.sem(l, i, k);
                    if left.is_empty() {
                        continue;
                    }
                    let right = self.sem(r, k, j);
                    for m1 in &left {
                        out.extend(right.iter().filter_map(|m2| disjoint_union(m1, m2)));
                    }
                }
                out
            }
            Node::Alt(l, r) => {
                let mut out = self.sem(l, i, j);
                out.extend(self.sem(r, i, j));
                out
            }
            Node::Star(child) => {
                // Least fixpoint of S = {∅ | i = j} ∪ child·S; the split
                // point k = i refers back to S itself.
                let mut cur = unit_if(i == j);
                let tails: Vec<(MappingSet, MappingSet)> = (i + 1..=j)
                    .map(|k| (self.sem(child, i, k), self.sem(g, k, j)))
                    .collect();
                for (head, tail) in &tails {
                    for m1 in head {
                        cur.extend(tail.iter().filter_map(|m2| disjoint_union(m1, m2)));
                    }
                }
                let empty_iter = self.sem(child, i, i);
                loop {
                    let mut next = cur.clone();
                    for m1 in &empty_iter {
                        next.extend(cur.iter().filter_map(|m2| disjoint_union(m1, m2)));
                    }
                    if next.len() == cur.len() {
                        break;
                    }
                    cur = next;
                }
                cur
            }
        };
        self.memo.insert((g, i, j), out.clone());
        out
    }
}

fn unit_if(b: bool) -> MappingSet {
    if b {
        [Mapping::new()].into()
    } else {
        MappingSet::new()
    }
}

/// Reference semantics of a regex formula over the whole document.
pub fn rgx_semantics(g: &RegexAst, d: &Document) -> MappingSet {
    let mut nodes = Vec::new();
    let root = flatten(g, &mut nodes);
    let mut o = RegexOracle {
        nodes,
        doc: d,
        memo: HashMap::new(),
    };
    o.sem(root, 1, d.len() + 1)
}

/// Natural join of mapping sets, written out independently.
pub fn join_sets(a: &MappingSet, b: &MappingSet) -> MappingSet {
    let mut out = MappingSet::new();
    for m1 in a {
        'inner: for m2 in b {
            let mut m = m1.clone();
            for (x, s) in m2.iter() {
                match m1.get(x) {
                    Some(t) if t != *s => continue 'inner,
                    _ => {
                        m.insert(x.clone(), *s);
                    }
                }
            }
            out.insert(m);
        }
    }
    out
}

pub fn project_set(a: &MappingSet, keep: &BTreeSet<Variable>) -> MappingSet {
    a.iter()
        .map(|m| {
            let mut out = Mapping::new();
            for (x, s) in m.iter().filter(|(x, _)| keep.contains(*x)) {
                out.insert(x.clone(), *s);
            }
            out
        })
        .collect()
}

/// Semantics of an algebra expression from the oracles of its atoms.
pub fn expr_semantics(e: &AlgebraExpr, d: &Document) -> MappingSet {
    match e {
        AlgebraExpr::Atom(Atom::Va(a)) => va_semantics(a, d),
        AlgebraExpr::Atom(Atom::Eva(a)) => eva_semantics(a, d),
        AlgebraExpr::Atom(Atom::Regex { ast, .. }) => rgx_semantics(ast, d),
        AlgebraExpr::Project(y, e) => project_set(&expr_semantics(e, d), y),
        AlgebraExpr::Union(l, r) => {
            let mut out = expr_semantics(l, d);
            out.extend(expr_semantics(r, d));
            out
        }
        AlgebraExpr::Join(l, r) => join_sets(&expr_semantics(l, d), &expr_semantics(r, d)),
    }
}

/// Every document over `sigma` of length at most `max_len`.
pub fn docs_up_to(sigma: &[char], max_len: usize) -> Vec<Document> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|w: &Vec<char>| {
                sigma.iter().map(move |&c| {
                    let mut w = w.clone();
                    w.push(c);
                    w
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out.into_iter().map(Document::from_symbols).collect()
}

/// All runs of an ε-free eVA over a prefix, as their `(S, i)` outputs,
/// grouped by the state they end in. `phase` is the number of slots and
/// letters consumed: slot `i` is phase `2i - 1`, letter `i` is phase `2i`.
pub fn runs_by_state(
    a: &Eva,
    d: &Document,
    phase: usize,
) -> BTreeMap<usize, Vec<Vec<(MarkerSet, usize)>>> {
    let mut frontier: Vec<(usize, Vec<(MarkerSet, usize)>)> = vec![(a.initial(), Vec::new())];
    for step in 1..=phase {
        let i = step.div_ceil(2);
        let mut next = Vec::new();
        for (q, out) in frontier {
            if step % 2 == 1 {
                next.push((q, out.clone()));
                for (l, r) in a.out(q) {
                    if let EvaLabel::Markers(s) = l {
                        let mut o = out.clone();
                        o.push((s.clone(), i));
                        next.push((*r, o));
                    }
                }
            } else {
                for (l, r) in a.out(q) {
                    if *l == EvaLabel::Symbol(d.at(i)) {
                        next.push((*r, out.clone()));
                    }
                }
            }
        }
        frontier = next;
    }
    let mut by_state: BTreeMap<usize, Vec<Vec<(MarkerSet, usize)>>> = BTreeMap::new();
    for (q, out) in frontier {
        by_state.entry(q).or_default().push(out);
    }
    for v in by_state.values_mut() {
        v.sort();
    }
    by_state
}

/// Binomial coefficient in exact arithmetic.
pub fn binomial(n: u64, k: u64) -> num_bigint::BigUint {
    let mut acc = num_bigint::BigUint::from(1u32);
    for t in 0..k {
        acc *= n - t;
        acc /= t + 1;
    }
    acc
}
