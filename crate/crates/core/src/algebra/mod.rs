//! Spanner algebra over functional eVA: join, union and projection, and
//! compilation of algebra expressions to deterministic sequential eVA.

mod expr;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::automata::{classify, eliminate_epsilon, Eva, EvaLabel, StateId};
use crate::error::{Error, Result};
use crate::model::{MarkerSet, Variable};

pub use expr::{
    compile_expr, evaluate_reference, parse_expr, AlgebraExpr, Atom, CompileReport, ExprSyntax,
    StageReport, Strategy,
};

fn require_functional(a: &Eva, what: &str) -> Result<()> {
    if a.has_epsilon() {
        return Err(Error::Precondition(format!(
            "{what}: input has ε transitions"
        )));
    }
    let r = classify(a)?;
    if !r.functional {
        return Err(Error::NotFunctional(format!(
            "{what}: {}",
            r.functional_witness.unwrap_or_default()
        )));
    }
    Ok(())
}

fn same_variables(a1: &Eva, a2: &Eva) -> Result<()> {
    if a1.variables() != a2.variables() {
        return Err(Error::VariableMismatch(format!(
            "{:?} vs {:?}",
            a1.variables(),
            a2.variables()
        )));
    }
    Ok(())
}

/// Builds a product-like automaton by exploring reachable keys from `start`.
fn explore<K, N, F>(
    alphabet: crate::model::Alphabet,
    vars: BTreeSet<Variable>,
    start: K,
    name: N,
    mut step: F,
) -> Eva
where
    K: Clone + Eq + std::hash::Hash,
    N: Fn(&K) -> String,
    F: FnMut(&K) -> (bool, Vec<(EvaLabel, K)>),
{
    let mut out = Eva::empty(alphabet, vars);
    let mut index: HashMap<K, StateId> = HashMap::new();
    let mut queue = VecDeque::new();
    index.insert(start.clone(), out.add_state(name(&start)));
    queue.push_back(start);
    while let Some(key) = queue.pop_front() {
        let id = index[&key];
        let (is_final, moves) = step(&key);
        out.set_final(id, is_final);
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
    out
}

/// Automaton for `⟦A1⟧ ⋈ ⟦A2⟧`.
///
/// From a pair `(p1, p2)`: letters move both components; a marker set of one
/// side that mentions no shared variable moves that side alone; two marker
/// sets agreeing on the shared markers move both, labelled by their union.
/// Only reachable pairs are built.
pub fn join_eva(a1: &Eva, a2: &Eva) -> Result<Eva> {
    require_functional(a1, "join")?;
    require_functional(a2, "join")?;
    let shared: BTreeSet<Variable> = a1
        .variables()
        .intersection(a2.variables())
        .cloned()
        .collect();
    let mut alphabet = a1.alphabet().clone();
    alphabet.extend(a2.alphabet().iter().copied());
    let vars: BTreeSet<Variable> = a1.variables().union(a2.variables()).cloned().collect();
    let name =
        |&(p1, p2): &(StateId, StateId)| format!("({},{})", a1.state_name(p1), a2.state_name(p2));
    let out = explore(
        alphabet,
        vars,
        (a1.initial(), a2.initial()),
        name,
        |&(p1, p2)| {
            let is_final = a1.is_final(p1) && a2.is_final(p2);
            let mut moves = Vec::new();
            for (l1, q1) in a1.out(p1) {
                match l1 {
                    EvaLabel::Symbol(c) => {
                        for (l2, q2) in a2.out(p2) {
                            if l2 == l1 {
                                moves.push((EvaLabel::Symbol(*c), (*q1, *q2)));
                            }
                        }
                    }
                    EvaLabel::Markers(s1) => {
                        if s1.restrict(&shared).is_empty() {
                            moves.push((l1.clone(), (*q1, p2)));
                        }
                        for (s2, q2) in a2.marker_sets(p2) {
                            if s1.restrict(&shared) == s2.restrict(&shared) {
                                moves.push((EvaLabel::Markers(s1.union(s2)), (*q1, q2)));
                            }
                        }
                    }
                    EvaLabel::Epsilon => unreachable!("checked ε-free"),
                }
            }
            for (s2, q2) in a2.marker_sets(p2) {
                if s2.restrict(&shared).is_empty() {
                    moves.push((EvaLabel::Markers(s2.clone()), (p1, q2)));
                }
            }
            (is_final, moves)
        },
    );
    assert!(
        out.num_states() <= a1.num_states() * a2.num_states(),
        "join state bound violated"
    );
    Ok(out)
}

/// Automaton for `⟦A1⟧ ∪ ⟦A2⟧` of linear size: a fresh initial state with ε
/// edges to both initial states, followed by ε-elimination. The result is
/// usually not deterministic.
pub fn union_eva_linear(a1: &Eva, a2: &Eva) -> Result<Eva> {
    same_variables(a1, a2)?;
    require_functional(a1, "union")?;
    require_functional(a2, "union")?;
    let mut alphabet = a1.alphabet().clone();
    alphabet.extend(a2.alphabet().iter().copied());
    let mut u = Eva::empty(alphabet, a1.variables().clone());
    let init = u.add_state("init");
    for (tag, a) in [("1", a1), ("2", a2)] {
        let base = u.num_states();
        for q in a.states() {
            u.add_state(format!("{tag}.{}", a.state_name(q)));
            u.set_final(base + q, a.is_final(q));
        }
        for (p, l, q) in a.transitions() {
            u.add_transition(base + p, l.clone(), base + q);
        }
        u.add_transition(init, EvaLabel::Epsilon, base + a.initial());
    }
    Ok(eliminate_epsilon(&u).trim_unreachable())
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum UnionState {
    Both(StateId, StateId),
    Left(StateId),
    Right(StateId),
}

/// Automaton for `⟦A1⟧ ∪ ⟦A2⟧` preserving determinism.
///
/// Both automata run in lockstep while both can follow the input; when only
/// one of them has a transition for the next label, the run continues in
/// that automaton alone.
pub fn union_eva_deterministic(a1: &Eva, a2: &Eva) -> Result<Eva> {
    same_variables(a1, a2)?;
    require_functional(a1, "union")?;
    require_functional(a2, "union")?;
    for a in [a1, a2] {
        if !classify(a)?.deterministic {
            return Err(Error::Precondition(
                "deterministic union needs deterministic inputs".into(),
            ));
        }
    }
    let mut alphabet = a1.alphabet().clone();
    alphabet.extend(a2.alphabet().iter().copied());
    let labels = |a: &Eva, p: StateId| -> BTreeMap<EvaLabel, StateId> {
        a.out(p).iter().map(|(l, q)| (l.clone(), *q)).collect()
    };
    let start = UnionState::Both(a1.initial(), a2.initial());
    let name = |key: &UnionState| match *key {
        UnionState::Both(p1, p2) => format!("({},{})", a1.state_name(p1), a2.state_name(p2)),
        UnionState::Left(p) => format!("1.{}", a1.state_name(p)),
        UnionState::Right(p) => format!("2.{}", a2.state_name(p)),
    };
    let out = explore(
        alphabet,
        a1.variables().clone(),
        start,
        name,
        |key| match *key {
            UnionState::Both(p1, p2) => {
                let (m1, m2) = (labels(a1, p1), labels(a2, p2));
                let mut moves = Vec::new();
                for (l, q1) in &m1 {
                    match m2.get(l) {
                        Some(q2) => moves.push((l.clone(), UnionState::Both(*q1, *q2))),
                        None => moves.push((l.clone(), UnionState::Left(*q1))),
                    }
                }
                for (l, q2) in &m2 {
                    if !m1.contains_key(l) {
                        moves.push((l.clone(), UnionState::Right(*q2)));
                    }
                }
                (a1.is_final(p1) || a2.is_final(p2), moves)
            }
            UnionState::Left(p) => (
                a1.is_final(p),
                a1.out(p)
                    .iter()
                    .map(|(l, q)| (l.clone(), UnionState::Left(*q)))
                    .collect(),
            ),
            UnionState::Right(p) => (
                a2.is_final(p),
                a2.out(p)
                    .iter()
                    .map(|(l, q)| (l.clone(), UnionState::Right(*q)))
                    .collect(),
            ),
        },
    );
    let bound = (a1.num_states() + 1) * (a2.num_states() + 1) - 1;
    assert!(out.num_states() <= bound, "union state bound violated");
    Ok(out)
}

/// Equivalent eVA in which no state is both entered and left by marker-set
/// transitions. A state with both gets a copy that takes over the incoming
/// marker-set transitions and keeps only the letter transitions and the
/// finality, since a run that has just used its variable step must read a
/// letter or stop.
fn split_variable_steps(a: &Eva) -> Eva {
    let mut entered = vec![false; a.num_states()];
    for (_, label, q) in a.transitions() {
        if matches!(label, EvaLabel::Markers(_)) {
            entered[q] = true;
        }
    }
    let mut out = a.clone();
    let mut copy = vec![None; a.num_states()];
    for q in a.states() {
        if entered[q] && a.marker_sets(q).next().is_some() {
            let c = out.add_state(format!("{}'", a.state_name(q)));
            out.set_final(c, a.is_final(q));
            for (l, r) in a.out(q) {
                if let EvaLabel::Symbol(_) = l {
                    out.add_transition(c, l.clone(), *r);
                }
            }
            copy[q] = Some(c);
        }
    }
    let mut rebuilt = Eva::empty(a.alphabet().clone(), a.variables().clone());
    for q in out.states() {
        rebuilt.add_state(out.state_name(q));
        rebuilt.set_final(q, out.is_final(q));
    }
    rebuilt.set_initial(out.initial());
    for (p, label, q) in out.transitions() {
        let q = match (label, copy.get(q).copied().flatten()) {
            (EvaLabel::Markers(_), Some(c)) => c,
            _ => q,
        };
        rebuilt.add_transition(p, label.clone(), q);
    }
    rebuilt
}

/// Automaton for `{ μ|_Y : μ ∈ ⟦A⟧ }`.
///
/// Markers of variables outside `Y` are removed from every marker set. A
/// transition whose set becomes empty amounts to skipping the variable step:
/// its source takes over the letter transitions and the finality of its
/// target. States are first split so that this source was never itself
/// entered by a variable step. The result is ε-free.
pub fn project_eva(a: &Eva, y: &BTreeSet<Variable>) -> Result<Eva> {
    require_functional(a, "projection")?;
    let a = &split_variable_steps(a);
    let vars: BTreeSet<Variable> = a.variables().intersection(y).cloned().collect();
    let mut out = Eva::empty(a.alphabet().clone(), vars.clone());
    for q in a.states() {
        out.add_state(a.state_name(q));
        out.set_final(q, a.is_final(q));
    }
    out.set_initial(a.initial());
    for (p, label, q) in a.transitions() {
        match label {
            EvaLabel::Markers(s) => {
                let kept: MarkerSet = s.restrict(&vars);
                if kept.is_empty() {
                    if a.is_final(q) {
                        out.set_final(p, true);
                    }
                    for (l, r) in a.out(q) {
                        if let EvaLabel::Symbol(_) = l {
                            out.add_transition(p, l.clone(), *r);
                        }
                    }
                } else {
                    out.add_transition(p, EvaLabel::Markers(kept), q);
                }
            }
            other => {
                out.add_transition(p, other.clone(), q);
            }
        }
    }
    Ok(out)
}
