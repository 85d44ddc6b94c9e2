//! Variable-set automata (VA) and extended variable-set automata (eVA).
//!
//! Both are instances of [`Automaton`], parameterised by the transition label.
//! A VA carries single markers on its variable transitions; an eVA carries
//! nonempty marker sets, and may temporarily carry ε labels while it is being
//! built by union.

mod classify;
mod convert;
mod determinize;
mod io;
mod run;

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::hash::Hash;

use crate::model::{Alphabet, Marker, MarkerSet, Variable};

pub use classify::{
    classify, classify_with_cap, ClassificationReport, Classify, DEFAULT_CLASSIFY_CAP,
};
pub use convert::{eliminate_epsilon, eva_to_va, va_to_eva};
pub use determinize::{
    determinize_eva, functional_va_to_det_seva, prop3_bounds, prop5_bounds, va_to_det_seva_general,
    SizeBound,
};
pub use io::{AnyAutomaton, AutomatonFile, TransitionRecord};
pub use run::{brute_enumerate, brute_enumerate_eva, brute_enumerate_va};

pub type StateId = usize;

/// Transition label of a VA.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VaLabel {
    Symbol(char),
    Marker(Marker),
}

/// Transition label of an eVA.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EvaLabel {
    Symbol(char),
    Markers(MarkerSet),
    Epsilon,
}

impl fmt::Debug for VaLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VaLabel::Symbol(c) => write!(f, "{c:?}"),
            VaLabel::Marker(m) => write!(f, "{m}"),
        }
    }
}

impl fmt::Debug for EvaLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvaLabel::Symbol(c) => write!(f, "{c:?}"),
            EvaLabel::Markers(s) => write!(f, "{s}"),
            EvaLabel::Epsilon => f.write_str("ε"),
        }
    }
}

/// Common interface of transition labels.
pub trait Label: Clone + Eq + Hash + Ord + fmt::Debug {
    /// The letter, for letter transitions.
    fn symbol(&self) -> Option<char>;

    /// Markers carried by the label (empty for letters and ε).
    fn marker_list(&self) -> &[Marker];
}

impl Label for VaLabel {
    fn symbol(&self) -> Option<char> {
        match self {
            VaLabel::Symbol(c) => Some(*c),
            VaLabel::Marker(_) => None,
        }
    }

    fn marker_list(&self) -> &[Marker] {
        match self {
            VaLabel::Symbol(_) => &[],
            VaLabel::Marker(m) => std::slice::from_ref(m),
        }
    }
}

impl Label for EvaLabel {
    fn symbol(&self) -> Option<char> {
        match self {
            EvaLabel::Symbol(c) => Some(*c),
            _ => None,
        }
    }

    fn marker_list(&self) -> &[Marker] {
        match self {
            EvaLabel::Markers(s) => s.as_slice(),
            _ => &[],
        }
    }
}

/// An automaton over a finite alphabet with declared capture variables.
///
/// States are dense indices with a display name each. The transition
/// relation is a set: adding an existing transition is a no-op.
#[derive(Clone, PartialEq, Eq)]
pub struct Automaton<L> {
    alphabet: Alphabet,
    variables: BTreeSet<Variable>,
    names: Vec<String>,
    initial: StateId,
    finals: Vec<bool>,
    out: Vec<Vec<(L, StateId)>>,
    num_transitions: usize,
}

pub type Va = Automaton<VaLabel>;
pub type Eva = Automaton<EvaLabel>;

impl<L: Label> Automaton<L> {
    /// An automaton with a single (initial, non-final) state `q0`.
    pub fn new(alphabet: Alphabet, variables: BTreeSet<Variable>) -> Self {
        let mut a = Self::empty(alphabet, variables);
        a.add_state("q0");
        a
    }

    /// An automaton with no states yet; the first added state is initial.
    pub fn empty(alphabet: Alphabet, variables: BTreeSet<Variable>) -> Self {
        Automaton {
            alphabet,
            variables,
            names: Vec::new(),
            initial: 0,
            finals: Vec::new(),
            out: Vec::new(),
            num_transitions: 0,
        }
    }

    pub fn add_state(&mut self, name: impl Into<String>) -> StateId {
        self.names.push(name.into());
        self.finals.push(false);
        self.out.push(Vec::new());
        self.names.len() - 1
    }

    pub fn set_initial(&mut self, q: StateId) {
        assert!(q < self.num_states());
        self.initial = q;
    }

    pub fn set_final(&mut self, q: StateId, is_final: bool) {
        self.finals[q] = is_final;
    }

    /// Adds `(p, label, q)`; returns false if it was already present.
    ///
    /// Panics if a letter or marker is not declared.
    pub fn add_transition(&mut self, p: StateId, label: L, q: StateId) -> bool {
        assert!(
            p < self.num_states() && q < self.num_states(),
            "unknown state"
        );
        if let Some(c) = label.symbol() {
            assert!(self.alphabet.contains(&c), "undeclared symbol {c:?}");
        }
        for m in label.marker_list() {
            assert!(
                self.variables.contains(&m.var),
                "undeclared variable {}",
                m.var
            );
        }
        if self.out[p].iter().any(|(l, t)| *t == q && *l == label) {
            return false;
        }
        self.out[p].push((label, q));
        self.num_transitions += 1;
        true
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn variables(&self) -> &BTreeSet<Variable> {
        &self.variables
    }

    /// Extends the alphabet (used when combining automata).
    pub fn extend_alphabet(&mut self, extra: &Alphabet) {
        self.alphabet.extend(extra.iter().copied());
    }

    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.num_transitions
    }

    /// `|A|` = number of states plus number of transitions.
    pub fn size(&self) -> usize {
        self.num_states() + self.num_transitions
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn is_final(&self, q: StateId) -> bool {
        self.finals[q]
    }

    pub fn finals(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.num_states()).filter(|&q| self.finals[q])
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.names[q]
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn states(&self) -> std::ops::Range<StateId> {
        0..self.num_states()
    }

    /// Outgoing transitions of `p` as `(label, target)` pairs.
    pub fn out(&self, p: StateId) -> &[(L, StateId)] {
        &self.out[p]
    }

    pub fn transitions(&self) -> impl Iterator<Item = (StateId, &L, StateId)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(p, ts)| ts.iter().map(move |(l, q)| (p, l, *q)))
    }

    /// Number of transitions carrying at least one marker.
    pub fn num_variable_transitions(&self) -> usize {
        self.transitions()
            .filter(|(_, l, _)| !l.marker_list().is_empty())
            .count()
    }

    /// States reachable from the initial state.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        if self.num_states() == 0 {
            return seen;
        }
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        while let Some(p) = queue.pop_front() {
            for (_, q) in &self.out[p] {
                if !seen[*q] {
                    seen[*q] = true;
                    queue.push_back(*q);
                }
            }
        }
        seen
    }

    /// States from which some final state is reachable.
    pub fn coreachable(&self) -> Vec<bool> {
        let mut rev: Vec<(StateId, StateId)> = self.transitions().map(|(p, _, q)| (q, p)).collect();
        rev.sort_unstable();
        let mut seen = self.finals.clone();
        let mut queue: Vec<StateId> = self.finals().collect();
        while let Some(q) = queue.pop() {
            let lo = rev.partition_point(|(t, _)| *t < q);
            let hi = rev.partition_point(|(t, _)| *t <= q);
            for &(_, p) in &rev[lo..hi] {
                if !seen[p] {
                    seen[p] = true;
                    queue.push(p);
                }
            }
        }
        seen
    }

    /// Restriction to the states marked `keep`; the initial state is always
    /// kept. State order and names are preserved.
    pub fn restrict(&self, keep: &[bool]) -> Self {
        let mut out = Self::empty(self.alphabet.clone(), self.variables.clone());
        let mut index = vec![None; self.num_states()];
        for q in self.states() {
            if keep[q] || q == self.initial {
                index[q] = Some(out.add_state(self.names[q].clone()));
            }
        }
        out.initial = index[self.initial].expect("initial kept");
        for q in self.states() {
            if let Some(nq) = index[q] {
                out.finals[nq] = self.finals[q];
                for (l, t) in &self.out[q] {
                    if let Some(nt) = index[*t] {
                        out.out[nq].push((l.clone(), nt));
                        out.num_transitions += 1;
                    }
                }
            }
        }
        out
    }

    /// Removes unreachable states.
    pub fn trim_unreachable(&self) -> Self {
        self.restrict(&self.reachable())
    }

    /// Removes states that are unreachable or cannot reach a final state.
    pub fn trim(&self) -> Self {
        let r = self.reachable();
        let c = self.coreachable();
        let keep: Vec<bool> = r.iter().zip(&c).map(|(a, b)| *a && *b).collect();
        self.restrict(&keep)
    }

    /// Renames every state by prefixing `prefix`.
    pub fn with_prefix(&self, prefix: &str) -> Self {
        let mut a = self.clone();
        for n in &mut a.names {
            *n = format!("{prefix}{n}");
        }
        a
    }

    /// Renames states to `q0, q1, ...` in index order.
    pub fn with_plain_names(&self) -> Self {
        let mut a = self.clone();
        for (i, n) in a.names.iter_mut().enumerate() {
            *n = format!("q{i}");
        }
        a
    }
}

impl Eva {
    /// Marker sets labelling transitions out of `p`.
    pub fn marker_sets(&self, p: StateId) -> impl Iterator<Item = (&MarkerSet, StateId)> {
        self.out[p].iter().filter_map(|(l, q)| match l {
            EvaLabel::Markers(s) => Some((s, *q)),
            _ => None,
        })
    }

    /// Target of the letter transition `(p, c, _)`, assuming determinism.
    pub fn letter_target(&self, p: StateId, c: char) -> Option<StateId> {
        self.out[p].iter().find_map(|(l, q)| match l {
            EvaLabel::Symbol(d) if *d == c => Some(*q),
            _ => None,
        })
    }

    pub fn has_epsilon(&self) -> bool {
        self.transitions().any(|(_, l, _)| *l == EvaLabel::Epsilon)
    }
}

impl<L: Label> fmt::Debug for Automaton<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "automaton: {} states, {} transitions, initial {}",
            self.num_states(),
            self.num_transitions,
            self.names[self.initial]
        )?;
        for (p, l, q) in self.transitions() {
            writeln!(f, "  {} -{:?}-> {}", self.names[p], l, self.names[q])?;
        }
        let finals: Vec<&str> = self.finals().map(|q| self.names[q].as_str()).collect();
        write!(f, "  finals: {finals:?}")
    }
}
