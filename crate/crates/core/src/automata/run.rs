//! Exhaustive run search: the reference semantics of VA and eVA.
//!
//! Runs are explored position by position over deduplicated configurations.
//! Any prefix that reuses a marker, or closes a variable at a position
//! strictly before opening it, is pruned; such prefixes can never extend to a
//! valid run.

use std::collections::HashSet;

use super::{AnyAutomaton, Eva, EvaLabel, StateId, Va, VaLabel};
use crate::model::{Document, Mapping, MappingSet, Span, Variable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Status {
    Unseen,
    Open(usize),
    Closed(usize, usize),
    /// Closed at the given position before being opened; only an open at the
    /// same position can still make the run valid.
    Pending(usize),
}

fn to_mapping(vars: &[Variable], st: &[Status]) -> Mapping {
    vars.iter()
        .zip(st)
        .filter_map(|(x, s)| match s {
            Status::Closed(i, j) => Some((x.clone(), Span::new(*i, *j))),
            _ => None,
        })
        .collect()
}

fn settled(st: &[Status]) -> bool {
    st.iter()
        .all(|s| matches!(s, Status::Unseen | Status::Closed(..)))
}

/// Applies one VA marker at position `i`; `None` if the run becomes invalid.
fn apply_marker(st: &[Status], var: usize, open: bool, i: usize) -> Option<Vec<Status>> {
    let next = match (st[var], open) {
        (Status::Unseen, true) => Status::Open(i),
        (Status::Pending(j), true) if j == i => Status::Closed(i, j),
        (Status::Unseen, false) => Status::Pending(i),
        (Status::Open(s), false) => Status::Closed(s, i),
        _ => return None,
    };
    let mut out = st.to_vec();
    out[var] = next;
    Some(out)
}

/// `⟦A⟧_d` for a VA, by exhaustive search over runs.
pub fn brute_enumerate_va(a: &Va, d: &Document) -> MappingSet {
    let vars: Vec<Variable> = a.variables().iter().cloned().collect();
    let index = |x: &Variable| vars.binary_search(x).expect("declared variable");
    let n = d.len();
    let mut frontier: HashSet<(StateId, Vec<Status>)> =
        HashSet::from([(a.initial(), vec![Status::Unseen; vars.len()])]);
    let mut result = MappingSet::new();
    for i in 1..=n + 1 {
        // Close the frontier under variable transitions at position i.
        let mut stack: Vec<(StateId, Vec<Status>)> = frontier.iter().cloned().collect();
        while let Some((p, st)) = stack.pop() {
            for (label, q) in a.out(p) {
                if let VaLabel::Marker(m) = label {
                    if let Some(next) = apply_marker(&st, index(&m.var), m.is_open(), i) {
                        let cfg = (*q, next);
                        if !frontier.contains(&cfg) {
                            frontier.insert(cfg.clone());
                            stack.push(cfg);
                        }
                    }
                }
            }
        }
        if i == n + 1 {
            for (p, st) in &frontier {
                if a.is_final(*p) && settled(st) {
                    result.insert(to_mapping(&vars, st));
                }
            }
            break;
        }
        let c = d.at(i);
        let mut next = HashSet::new();
        for (p, st) in &frontier {
            if st.iter().any(|s| matches!(s, Status::Pending(_))) {
                continue;
            }
            for (label, q) in a.out(*p) {
                if *label == VaLabel::Symbol(c) {
                    next.insert((*q, st.clone()));
                }
            }
        }
        frontier = next;
    }
    result
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Phase {
    BeforeVariable,
    BeforeLetter,
}

/// `⟦A⟧_d` for an eVA, by exhaustive search over runs.
///
/// Runs alternate between a variable slot (one marker-set transition, or
/// staying put) and a letter. ε transitions move between states without
/// changing the phase.
pub fn brute_enumerate_eva(a: &Eva, d: &Document) -> MappingSet {
    let vars: Vec<Variable> = a.variables().iter().cloned().collect();
    let index = |x: &Variable| vars.binary_search(x).expect("declared variable");
    let n = d.len();
    type Cfg = (StateId, Phase, Vec<Status>);
    let mut frontier: HashSet<Cfg> = HashSet::from([(
        a.initial(),
        Phase::BeforeVariable,
        vec![Status::Unseen; vars.len()],
    )]);
    let mut result = MappingSet::new();
    for i in 1..=n + 1 {
        let mut stack: Vec<Cfg> = frontier.iter().cloned().collect();
        let push = |cfg: Cfg, frontier: &mut HashSet<Cfg>, stack: &mut Vec<Cfg>| {
            if frontier.insert(cfg.clone()) {
                stack.push(cfg);
            }
        };
        while let Some((p, phase, st)) = stack.pop() {
            if phase == Phase::BeforeVariable {
                push(
                    (p, Phase::BeforeLetter, st.clone()),
                    &mut frontier,
                    &mut stack,
                );
            }
            for (label, q) in a.out(p) {
                match label {
                    EvaLabel::Epsilon => {
                        push((*q, phase, st.clone()), &mut frontier, &mut stack);
                    }
                    EvaLabel::Markers(set) if phase == Phase::BeforeVariable => {
                        let mut next = st.clone();
                        let mut ok = true;
                        for m in set.iter().filter(|m| m.is_open()) {
                            let v = index(&m.var);
                            ok &= next[v] == Status::Unseen;
                            next[v] = Status::Open(i);
                        }
                        for m in set.iter().filter(|m| !m.is_open()) {
                            let v = index(&m.var);
                            match next[v] {
                                Status::Open(s) => next[v] = Status::Closed(s, i),
                                _ => ok = false,
                            }
                        }
                        if ok {
                            push((*q, Phase::BeforeLetter, next), &mut frontier, &mut stack);
                        }
                    }
                    _ => {}
                }
            }
        }
        if i == n + 1 {
            for (p, phase, st) in &frontier {
                if *phase == Phase::BeforeLetter && a.is_final(*p) && settled(st) {
                    result.insert(to_mapping(&vars, st));
                }
            }
            break;
        }
        let c = d.at(i);
        let mut next = HashSet::new();
        for (p, phase, st) in &frontier {
            if *phase != Phase::BeforeLetter {
                continue;
            }
            for (label, q) in a.out(*p) {
                if *label == EvaLabel::Symbol(c) {
                    next.insert((*q, Phase::BeforeVariable, st.clone()));
                }
            }
        }
        frontier = next;
    }
    result
}

/// `⟦A⟧_d` for either kind of automaton.
pub fn brute_enumerate(a: &AnyAutomaton, d: &Document) -> MappingSet {
    match a {
        AnyAutomaton::Va(a) => brute_enumerate_va(a, d),
        AnyAutomaton::Eva(a) => brute_enumerate_eva(a, d),
    }
}
