//! Subset constructions producing deterministic sequential eVA.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rustc_hash::FxHashMap;

use log::debug;

use super::classify::classify;
use super::convert::{va_to_eva_with_paths, variable_paths};
use super::{Eva, EvaLabel, StateId, Va, VaLabel};
use crate::error::{Error, Result};
use crate::model::{Marker, MarkerSet};

/// Upper bounds on the size of a constructed automaton. Values saturate at
/// `u128::MAX`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SizeBound {
    pub states: u128,
    pub transitions: u128,
}

fn pow(base: u128, exp: usize) -> u128 {
    u32::try_from(exp)
        .ok()
        .and_then(|e| base.checked_pow(e))
        .unwrap_or(u128::MAX)
}

/// Bounds for the general construction: `2^n·3^ℓ` states and
/// `2^n·(5^ℓ + 3^ℓ·|Σ|)` transitions.
pub fn prop3_bounds(n: usize, vars: usize, sigma: usize) -> SizeBound {
    let two_n = pow(2, n);
    SizeBound {
        states: two_n.saturating_mul(pow(3, vars)),
        transitions: two_n.saturating_mul(
            pow(5, vars).saturating_add(pow(3, vars).saturating_mul(sigma as u128)),
        ),
    }
}

/// Bounds for the functional construction: `2^n` states and
/// `2^n·(n² + |Σ|)` transitions.
pub fn prop5_bounds(n: usize, sigma: usize) -> SizeBound {
    let two_n = pow(2, n);
    SizeBound {
        states: two_n,
        transitions: two_n.saturating_mul((n as u128 * n as u128).saturating_add(sigma as u128)),
    }
}

fn subset_name<'a, F: Fn(StateId) -> &'a str>(set: &BTreeSet<StateId>, name: F) -> String {
    let mut out = String::from("{");
    for (i, &q) in set.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(name(q));
    }
    out.push('}');
    out
}

/// Lazy subset construction over states reachable from `{q0}`.
///
/// Only nonempty subsets are materialized, so the result has no dead sink.
pub fn determinize_eva(a: &Eva) -> Result<Eva> {
    if a.has_epsilon() {
        return Err(Error::Precondition(
            "determinization needs an ε-free automaton".into(),
        ));
    }
    let mut out = Eva::empty(a.alphabet().clone(), a.variables().clone());
    let mut index: FxHashMap<Vec<StateId>, StateId> = FxHashMap::default();
    let mut queue = VecDeque::new();
    let name = |set: &[StateId]| {
        let mut s = String::from("{");
        for (i, &q) in set.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(a.state_name(q));
        }
        s.push('}');
        s
    };
    let start = vec![a.initial()];
    let s0 = out.add_state(name(&start));
    index.insert(start.clone(), s0);
    queue.push_back(start);
    let mut moves: Vec<(&EvaLabel, StateId)> = Vec::new();
    while let Some(set) = queue.pop_front() {
        let id = index[&set];
        out.set_final(id, set.iter().any(|&q| a.is_final(q)));
        moves.clear();
        for &p in &set {
            moves.extend(a.out(p).iter().map(|(l, q)| (l, *q)));
        }
        moves.sort_unstable();
        moves.dedup();
        let mut i = 0;
        while i < moves.len() {
            let label = moves[i].0;
            let mut j = i;
            while j < moves.len() && moves[j].0 == label {
                j += 1;
            }
            let target: Vec<StateId> = moves[i..j].iter().map(|(_, q)| *q).collect();
            let tid = match index.get(&target) {
                Some(&t) => t,
                None => {
                    let t = out.add_state(name(&target));
                    index.insert(target.clone(), t);
                    queue.push_back(target);
                    t
                }
            };
            out.add_transition(id, label.clone(), tid);
            i = j;
        }
    }
    Ok(out)
}

/// True if every close in `seen ∪ next` has its open there, and the two sets
/// share no marker.
fn compatible_step(seen: &MarkerSet, next: &MarkerSet) -> bool {
    if !seen.is_disjoint(next) {
        return false;
    }
    next.iter().filter(|m| !m.is_open()).all(|m| {
        let open = Marker::open(m.var.clone());
        seen.contains(&open) || next.contains(&open)
    })
}

/// Deterministic sequential eVA equivalent to an arbitrary VA.
///
/// States are pairs `(P, S)`: the set of VA states reachable with the marker
/// history `S`. Only valid marker histories are extended, so invalid runs of
/// a non-sequential input are dropped.
///
/// Panics if the result exceeds `2^n·3^ℓ` states or
/// `2^n·(5^ℓ + 3^ℓ·|Σ|)` transitions.
pub fn va_to_det_seva_general(a: &Va) -> Eva {
    let paths: Vec<BTreeMap<MarkerSet, BTreeSet<StateId>>> = a
        .states()
        .map(|p| {
            let mut by_set: BTreeMap<MarkerSet, BTreeSet<StateId>> = BTreeMap::new();
            for (q, set) in variable_paths(a, p).into_keys() {
                by_set.entry(set).or_default().insert(q);
            }
            by_set
        })
        .collect();

    let mut out = Eva::empty(a.alphabet().clone(), a.variables().clone());
    type Key = (BTreeSet<StateId>, MarkerSet);
    let mut index: FxHashMap<Key, StateId> = FxHashMap::default();
    let mut queue: VecDeque<Key> = VecDeque::new();
    let name = |(set, seen): &Key| format!("({},{})", subset_name(set, |q| a.state_name(q)), seen);
    let start: Key = (BTreeSet::from([a.initial()]), MarkerSet::new());
    index.insert(start.clone(), out.add_state(name(&start)));
    queue.push_back(start);

    while let Some(key) = queue.pop_front() {
        let id = index[&key];
        let (set, seen) = &key;
        let balanced = seen
            .iter()
            .filter(|m| m.is_open())
            .all(|m| seen.contains(&Marker::close(m.var.clone())));
        out.set_final(id, balanced && set.iter().any(|&q| a.is_final(q)));

        let mut moves: BTreeMap<EvaLabel, Key> = BTreeMap::new();
        for &p in set {
            for (label, q) in a.out(p) {
                if let VaLabel::Symbol(c) = label {
                    moves
                        .entry(EvaLabel::Symbol(*c))
                        .or_insert_with(|| (BTreeSet::new(), seen.clone()))
                        .0
                        .insert(*q);
                }
            }
            for (next, targets) in &paths[p] {
                if compatible_step(seen, next) {
                    moves
                        .entry(EvaLabel::Markers(next.clone()))
                        .or_insert_with(|| (BTreeSet::new(), seen.union(next)))
                        .0
                        .extend(targets);
                }
            }
        }
        for (label, target) in moves {
            let tid = match index.get(&target) {
                Some(&t) => t,
                None => {
                    let t = out.add_state(name(&target));
                    index.insert(target.clone(), t);
                    queue.push_back(target);
                    t
                }
            };
            out.add_transition(id, label, tid);
        }
    }

    let bound = prop3_bounds(a.num_states(), a.variables().len(), a.alphabet().len());
    assert!(
        out.num_states() as u128 <= bound.states,
        "state bound violated: {} > {}",
        out.num_states(),
        bound.states
    );
    assert!(
        out.num_transitions() as u128 <= bound.transitions,
        "transition bound violated: {} > {}",
        out.num_transitions(),
        bound.transitions
    );
    out
}

type PathMap = BTreeMap<(StateId, MarkerSet), Vec<Marker>>;

/// Checks that, between any two useful states, all variable-paths carry the
/// same marker set. Returns two witness paths otherwise.
fn check_marker_uniqueness(a: &Va, paths: &[PathMap]) -> Result<()> {
    for (p, from_p) in a.states().zip(paths) {
        let mut by_target: BTreeMap<StateId, (&MarkerSet, &Vec<Marker>)> = BTreeMap::new();
        for ((q, set), path) in from_p {
            match by_target.get(q) {
                Some((other, other_path)) if *other != set => {
                    let show = |ms: &[Marker]| {
                        ms.iter()
                            .map(|m| m.to_string())
                            .collect::<Vec<_>>()
                            .join(" ")
                    };
                    return Err(Error::NotFunctional(format!(
                        "variable-paths from {} to {} carry different markers: [{}] and [{}]",
                        a.state_name(p),
                        a.state_name(*q),
                        show(other_path),
                        show(path)
                    )));
                }
                Some(_) => {}
                None => {
                    by_target.insert(*q, (set, path));
                }
            }
        }
    }
    Ok(())
}

/// Deterministic sequential eVA equivalent to a functional VA, via
/// [`va_to_eva`](super::va_to_eva) and [`determinize_eva`].
///
/// Fails with [`Error::NotFunctional`] if the input is not functional.
/// Panics if the result exceeds `2^n` states or `2^n·(n² + |Σ|)` transitions,
/// where `n` counts the useful states of the input.
pub fn functional_va_to_det_seva(a: &Va) -> Result<Eva> {
    let trimmed = a.trim();
    let paths: Vec<PathMap> = trimmed
        .states()
        .map(|p| variable_paths(&trimmed, p))
        .collect();
    check_marker_uniqueness(&trimmed, &paths)?;
    let report = classify(&trimmed)?;
    if !report.functional {
        return Err(Error::NotFunctional(
            report.functional_witness.unwrap_or_default(),
        ));
    }
    let eva = va_to_eva_with_paths(&trimmed, paths);
    let det = determinize_eva(&eva)?;
    let n = trimmed.num_states();
    let bound = prop5_bounds(n, a.alphabet().len());
    debug!(
        "functional determinization: {} useful states -> {} states, {} transitions",
        n,
        det.num_states(),
        det.num_transitions()
    );
    assert!(
        det.num_states() as u128 <= bound.states,
        "state bound violated: {} > {}",
        det.num_states(),
        bound.states
    );
    assert!(
        det.num_transitions() as u128 <= bound.transitions,
        "transition bound violated: {} > {}",
        det.num_transitions(),
        bound.transitions
    );
    Ok(det)
}
