//! Translations between VA and eVA, and ε-elimination.

use std::collections::BTreeMap;

use rustc_hash::FxHashSet;

use super::{Eva, EvaLabel, StateId, Va, VaLabel};
use crate::error::{Error, Result};
use crate::model::{Marker, MarkerSet};

/// Every variable-path leaving `p`: paths of variable transitions with
/// pairwise-distinct markers. Returns, for each reachable `(q, markers)`,
/// one witness path. Paths of length zero are not included.
pub(crate) fn variable_paths(a: &Va, p: StateId) -> BTreeMap<(StateId, MarkerSet), Vec<Marker>> {
    let mut found: BTreeMap<(StateId, MarkerSet), Vec<Marker>> = BTreeMap::new();
    if !a
        .out(p)
        .iter()
        .any(|(l, _)| matches!(l, VaLabel::Marker(_)))
    {
        return found;
    }
    let mut seen: FxHashSet<(StateId, MarkerSet)> = FxHashSet::default();
    seen.insert((p, MarkerSet::new()));
    let mut stack = vec![(p, MarkerSet::new(), Vec::new())];
    while let Some((q, set, path)) = stack.pop() {
        for (label, r) in a.out(q) {
            let VaLabel::Marker(m) = label else { continue };
            if set.contains(m) {
                continue;
            }
            let mut next = set.clone();
            next.insert(m.clone());
            if seen.insert((*r, next.clone())) {
                let mut next_path = path.clone();
                next_path.push(m.clone());
                found.insert((*r, next.clone()), next_path.clone());
                stack.push((*r, next, next_path));
            }
        }
    }
    found
}

/// Equivalent eVA with the same states: letter transitions are copied and
/// every variable-path `p ~> q` becomes one extended transition labelled by
/// its marker set.
pub fn va_to_eva(a: &Va) -> Eva {
    let paths: Vec<_> = a.states().map(|p| variable_paths(a, p)).collect();
    va_to_eva_with_paths(a, paths)
}

/// [`va_to_eva`] with the variable-paths of every state precomputed.
pub(crate) fn va_to_eva_with_paths(
    a: &Va,
    paths: Vec<BTreeMap<(StateId, MarkerSet), Vec<Marker>>>,
) -> Eva {
    let mut out = Eva::empty(a.alphabet().clone(), a.variables().clone());
    for q in a.states() {
        out.add_state(a.state_name(q));
        out.set_final(q, a.is_final(q));
    }
    out.set_initial(a.initial());
    for (p, from_p) in a.states().zip(paths) {
        for (label, q) in a.out(p) {
            if let VaLabel::Symbol(c) = label {
                out.add_transition(p, EvaLabel::Symbol(*c), *q);
            }
        }
        for (q, set) in from_p.into_keys() {
            out.add_transition(p, EvaLabel::Markers(set), q);
        }
    }
    out
}

/// Equivalent VA: each extended transition `(p, S, q)` becomes a chain of
/// single-marker transitions through `|S| - 1` fresh states, following the
/// marker order (opens before closes, then by variable). When `q` also has
/// outgoing marker-set transitions, the chain ends in a copy of `q` that
/// keeps only its letter transitions, so two marker sets are never read in
/// a row.
pub fn eva_to_va(a: &Eva) -> Result<Va> {
    let mut out = Va::empty(a.alphabet().clone(), a.variables().clone());
    for q in a.states() {
        out.add_state(a.state_name(q));
        out.set_final(q, a.is_final(q));
    }
    out.set_initial(a.initial());
    let mut entered = vec![false; a.num_states()];
    for (_, l, q) in a.transitions() {
        if matches!(l, EvaLabel::Markers(_)) {
            entered[q] = true;
        }
    }
    let mut landing: Vec<StateId> = a.states().collect();
    for q in a.states() {
        if entered[q] && a.marker_sets(q).next().is_some() {
            let copy = out.add_state(format!("{}^", a.state_name(q)));
            out.set_final(copy, a.is_final(q));
            landing[q] = copy;
        }
    }
    for (p, label, q) in a.transitions() {
        match label {
            EvaLabel::Symbol(c) => {
                out.add_transition(p, VaLabel::Symbol(*c), q);
                if landing[p] != p {
                    out.add_transition(landing[p], VaLabel::Symbol(*c), q);
                }
            }
            EvaLabel::Markers(set) => {
                let markers = set.as_slice();
                let mut from = p;
                for (k, m) in markers.iter().enumerate() {
                    let to = if k + 1 == markers.len() {
                        landing[q]
                    } else {
                        out.add_state(format!("{}~{}~{}", a.state_name(p), set, k + 1))
                    };
                    out.add_transition(from, VaLabel::Marker(m.clone()), to);
                    from = to;
                }
            }
            EvaLabel::Epsilon => {
                return Err(Error::Precondition(
                    "eva_to_va needs an ε-free automaton".into(),
                ))
            }
        }
    }
    Ok(out)
}

/// Removes ε transitions. A state reaching `p` through ε transitions gains
/// all of `p`'s letter and marker-set transitions, and becomes final if `p`
/// is. Cycles of ε transitions are handled by the closure.
pub fn eliminate_epsilon(a: &Eva) -> Eva {
    let mut out = Eva::empty(a.alphabet().clone(), a.variables().clone());
    for q in a.states() {
        out.add_state(a.state_name(q));
    }
    out.set_initial(a.initial());
    for q in a.states() {
        let mut closure = vec![q];
        let mut seen = FxHashSet::default();
        seen.insert(q);
        let mut k = 0;
        while k < closure.len() {
            let p = closure[k];
            k += 1;
            for (label, r) in a.out(p) {
                if *label == EvaLabel::Epsilon && seen.insert(*r) {
                    closure.push(*r);
                }
            }
        }
        for p in closure {
            if a.is_final(p) {
                out.set_final(q, true);
            }
            for (label, r) in a.out(p) {
                if *label != EvaLabel::Epsilon {
                    out.add_transition(q, label.clone(), *r);
                }
            }
        }
    }
    out
}
