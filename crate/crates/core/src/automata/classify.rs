//! Deciding sequentiality, functionality and determinism.
//!
//! Sequentiality and functionality are decided by exploring the reachable
//! pairs of automaton state and abstract variable status. A step that would
//! make a run invalid is a refutation of sequentiality as soon as the run can
//! still be completed to an accepting one.

use std::collections::HashSet;

use rustc_hash::FxHashMap;

use super::{Eva, EvaLabel, Label, StateId, Va, VaLabel};
use crate::error::{Error, Result};
use crate::model::Variable;

/// Variable count above which classification is refused.
pub const DEFAULT_CLASSIFY_CAP: usize = 16;

/// Outcome of [`classify`]. Each witness is present iff its flag is false.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassificationReport {
    pub sequential: bool,
    pub functional: bool,
    pub deterministic: bool,
    pub sequential_witness: Option<String>,
    pub functional_witness: Option<String>,
    pub deterministic_witness: Option<String>,
}

const UNSEEN: u64 = 0;
const OPEN: u64 = 1;
const CLOSED: u64 = 2;
/// Closed before opened at the current position (VA only).
const PENDING: u64 = 3;

/// Largest variable count the packed status encoding supports.
const MAX_PACKED_VARS: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Phase {
    /// VA runs have no phase.
    Free,
    BeforeVariable,
    BeforeLetter,
}

/// Configuration: state, phase and two status bits per variable.
type Node = (StateId, Phase, u64);

fn status(st: u64, v: usize) -> u64 {
    st >> (2 * v) & 3
}

fn set_status(st: u64, v: usize, s: u64) -> u64 {
    st & !(3 << (2 * v)) | s << (2 * v)
}

fn has_pending(st: u64, nvars: usize) -> bool {
    (0..nvars).any(|v| status(st, v) == PENDING)
}

enum MoveKind {
    Letter,
    Epsilon,
    Marker(usize, bool),
    Set(Vec<(usize, bool)>),
}

struct Move {
    kind: MoveKind,
    target: StateId,
    /// Index into the source state's transition list.
    label: usize,
}

/// Transition table with variables resolved to indices.
struct Compiled {
    eva: bool,
    initial: StateId,
    finals: Vec<bool>,
    nvars: usize,
    moves: Vec<Vec<Move>>,
}

/// Label index used for the "stay" step of eVA runs.
const STAY: usize = usize::MAX;

impl Compiled {
    fn new<L: Label>(
        a: &super::Automaton<L>,
        eva: bool,
        kind: impl Fn(&L, &dyn Fn(&Variable) -> usize) -> MoveKind,
    ) -> Self {
        let vars: Vec<Variable> = a.variables().iter().cloned().collect();
        let index = |x: &Variable| vars.binary_search(x).expect("declared variable");
        Compiled {
            eva,
            initial: a.initial(),
            finals: a.states().map(|q| a.is_final(q)).collect(),
            nvars: vars.len(),
            moves: a
                .states()
                .map(|p| {
                    a.out(p)
                        .iter()
                        .enumerate()
                        .map(|(i, (l, q))| Move {
                            kind: kind(l, &index),
                            target: *q,
                            label: i,
                        })
                        .collect()
                })
                .collect(),
        }
    }

    fn start(&self) -> Node {
        let phase = if self.eva {
            Phase::BeforeVariable
        } else {
            Phase::Free
        };
        (self.initial, phase, 0)
    }

    fn accepting(&self, q: StateId, phase: Phase) -> bool {
        self.finals[q] && phase != Phase::BeforeVariable
    }

    /// Calls `f(label, next, target, target phase)` for every step out of
    /// `node`; `next` is `None` when the step invalidates the run. With
    /// `ignore_status`, all steps are valid.
    fn successors(
        &self,
        node: Node,
        ignore_status: bool,
        mut f: impl FnMut(usize, Option<Node>, StateId, Phase),
    ) {
        let (p, phase, st) = node;
        if phase == Phase::BeforeVariable {
            f(
                STAY,
                Some((p, Phase::BeforeLetter, st)),
                p,
                Phase::BeforeLetter,
            );
        }
        for m in &self.moves[p] {
            let q = m.target;
            match &m.kind {
                MoveKind::Epsilon => f(m.label, Some((q, phase, st)), q, phase),
                MoveKind::Letter => match phase {
                    Phase::Free => {
                        let ok = ignore_status || !has_pending(st, self.nvars);
                        f(m.label, ok.then_some((q, phase, st)), q, phase)
                    }
                    Phase::BeforeLetter => f(
                        m.label,
                        Some((q, Phase::BeforeVariable, st)),
                        q,
                        Phase::BeforeVariable,
                    ),
                    Phase::BeforeVariable => {}
                },
                MoveKind::Marker(v, open) => {
                    let s = match (status(st, *v), open) {
                        _ if ignore_status => Some(UNSEEN),
                        (UNSEEN, true) => Some(OPEN),
                        (PENDING, true) => Some(CLOSED),
                        (UNSEEN, false) => Some(PENDING),
                        (OPEN, false) => Some(CLOSED),
                        _ => None,
                    };
                    f(
                        m.label,
                        s.map(|s| (q, phase, set_status(st, *v, s))),
                        q,
                        phase,
                    )
                }
                MoveKind::Set(markers) if phase == Phase::BeforeVariable => {
                    let mut n = st;
                    let mut ok = true;
                    if !ignore_status {
                        for &(v, open) in markers {
                            let (need, to) = if open { (UNSEEN, OPEN) } else { (OPEN, CLOSED) };
                            ok &= status(n, v) == need;
                            n = set_status(n, v, to);
                        }
                    }
                    f(
                        m.label,
                        ok.then_some((q, Phase::BeforeLetter, n)),
                        q,
                        Phase::BeforeLetter,
                    )
                }
                MoveKind::Set(_) => {}
            }
        }
    }
}

fn phase_index(ph: Phase) -> usize {
    match ph {
        Phase::Free | Phase::BeforeVariable => 0,
        Phase::BeforeLetter => 1,
    }
}

/// Pairs (state, phase) from which an accepting configuration can be
/// reached, ignoring variable status; indexed by `2 * state + phase`.
fn completable(c: &Compiled) -> Vec<bool> {
    let phases: &[Phase] = if c.eva {
        &[Phase::BeforeVariable, Phase::BeforeLetter]
    } else {
        &[Phase::Free]
    };
    let n = c.finals.len();
    // Reverse edges in compressed form: `edges[start[t]..start[t + 1]]`.
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut seen = vec![false; 2 * n];
    let mut queue = Vec::new();
    for q in 0..n {
        for &ph in phases {
            let from = 2 * q + phase_index(ph);
            c.successors((q, ph, 0), true, |_, _, t, tph| {
                pairs.push((2 * t + phase_index(tph), from));
            });
            if c.accepting(q, ph) {
                seen[from] = true;
                queue.push(from);
            }
        }
    }
    pairs.sort_unstable();
    let mut start = vec![0; 2 * n + 1];
    for &(t, _) in &pairs {
        start[t + 1] += 1;
    }
    for i in 0..2 * n {
        start[i + 1] += start[i];
    }
    while let Some(i) = queue.pop() {
        for &(_, m) in &pairs[start[i]..start[i + 1]] {
            if !seen[m] {
                seen[m] = true;
                queue.push(m);
            }
        }
    }
    seen
}

fn explore<L: Label + std::fmt::Debug>(
    a: &super::Automaton<L>,
    c: &Compiled,
) -> (Option<String>, Option<String>) {
    let vars: Vec<&Variable> = a.variables().iter().collect();
    let done = completable(c);
    let start = c.start();
    let mut nodes = vec![start];
    let mut parent: Vec<Option<(usize, usize)>> = vec![None];
    let mut index: FxHashMap<Node, usize> = FxHashMap::default();
    index.insert(start, 0);
    let text = |n: &Node, label: usize| {
        if label == STAY {
            "stay".to_string()
        } else {
            format!("{:?}", a.out(n.0)[label].0)
        }
    };
    let trace = |nodes: &[Node], parent: &[Option<(usize, usize)>], mut i: usize| {
        let mut steps = Vec::new();
        while let Some((prev, label)) = parent[i] {
            steps.push(text(&nodes[prev], label));
            i = prev;
        }
        steps.reverse();
        steps.join(" ")
    };
    let mut non_functional = None;
    let mut head = 0;
    while head < nodes.len() {
        let i = head;
        head += 1;
        let node = nodes[i];
        let (q, phase, st) = node;
        if c.accepting(q, phase) {
            let open = (0..c.nvars).find(|&v| matches!(status(st, v), OPEN | PENDING));
            if let Some(v) = open {
                let msg = format!(
                    "accepting run leaves {} unbalanced: {}",
                    vars[v],
                    trace(&nodes, &parent, i)
                );
                return (Some(msg), None);
            }
            if non_functional.is_none() {
                if let Some(v) = (0..c.nvars).find(|&v| status(st, v) == UNSEEN) {
                    non_functional = Some(format!(
                        "accepting run never assigns {}: {}",
                        vars[v],
                        trace(&nodes, &parent, i)
                    ));
                }
            }
        }
        let mut refuted = None;
        c.successors(node, false, |label, next, t, tph| {
            if refuted.is_some() {
                return;
            }
            match next {
                None => {
                    if done[2 * t + phase_index(tph)] {
                        refuted = Some(label);
                    }
                }
                Some(n) => {
                    if let std::collections::hash_map::Entry::Vacant(e) = index.entry(n) {
                        e.insert(nodes.len());
                        nodes.push(n);
                        parent.push(Some((i, label)));
                    }
                }
            }
        });
        if let Some(label) = refuted {
            let msg = format!(
                "invalid step {} after: {}",
                text(&node, label),
                trace(&nodes, &parent, i)
            );
            return (Some(msg), None);
        }
    }
    (None, non_functional)
}

fn determinism_witness<L: Label>(a: &super::Automaton<L>, epsilon: Option<&L>) -> Option<String> {
    for p in a.states() {
        let mut seen = HashSet::new();
        for (l, _) in a.out(p) {
            if Some(l) == epsilon {
                return Some(format!("ε transition from {}", a.state_name(p)));
            }
            if !seen.insert(l) {
                return Some(format!("two {l:?} transitions from {}", a.state_name(p)));
            }
        }
    }
    None
}

fn report(seq: Option<String>, fun: Option<String>, det: Option<String>) -> ClassificationReport {
    let fun = match (&seq, fun) {
        (Some(w), _) => Some(format!("not sequential ({w})")),
        (None, f) => f,
    };
    ClassificationReport {
        sequential: seq.is_none(),
        functional: fun.is_none(),
        deterministic: det.is_none(),
        sequential_witness: seq,
        functional_witness: fun,
        deterministic_witness: det,
    }
}

/// Automata accepted by [`classify`].
pub trait Classify {
    fn classify_with_cap(&self, cap: usize) -> Result<ClassificationReport>;
}

impl Classify for Va {
    fn classify_with_cap(&self, cap: usize) -> Result<ClassificationReport> {
        check_cap(self.variables().len(), cap)?;
        let c = Compiled::new(self, false, |l, index| match l {
            VaLabel::Symbol(_) => MoveKind::Letter,
            VaLabel::Marker(m) => MoveKind::Marker(index(&m.var), m.is_open()),
        });
        let (seq, fun) = explore(self, &c);
        Ok(report(seq, fun, determinism_witness(self, None)))
    }
}

impl Classify for Eva {
    fn classify_with_cap(&self, cap: usize) -> Result<ClassificationReport> {
        check_cap(self.variables().len(), cap)?;
        let c = Compiled::new(self, true, |l, index| match l {
            EvaLabel::Symbol(_) => MoveKind::Letter,
            EvaLabel::Epsilon => MoveKind::Epsilon,
            EvaLabel::Markers(set) => {
                MoveKind::Set(set.iter().map(|m| (index(&m.var), m.is_open())).collect())
            }
        });
        let (seq, fun) = explore(self, &c);
        Ok(report(
            seq,
            fun,
            determinism_witness(self, Some(&EvaLabel::Epsilon)),
        ))
    }
}

fn check_cap(vars: usize, cap: usize) -> Result<()> {
    let cap = cap.min(MAX_PACKED_VARS);
    if vars > cap {
        return Err(Error::ClassificationTooLarge { vars, cap });
    }
    Ok(())
}

/// Classifies a VA or eVA with the default variable cap.
pub fn classify<A: Classify>(a: &A) -> Result<ClassificationReport> {
    a.classify_with_cap(DEFAULT_CLASSIFY_CAP)
}

pub fn classify_with_cap<A: Classify>(a: &A, cap: usize) -> Result<ClassificationReport> {
    a.classify_with_cap(cap)
}
