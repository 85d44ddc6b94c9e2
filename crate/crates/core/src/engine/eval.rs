//! Preprocessing: the Capturing/Reading sweep that builds the DAG of marker
//! events.

use std::collections::HashMap;

use super::list::{ListArena, NodeId, NodeList, Payload};
use crate::automata::{classify, Eva, EvaLabel, StateId};
use crate::error::{Error, Result};
use crate::model::{Document, MarkerSet};

/// A DAG node: the marker set `S` applied at position `i`, and the list of
/// nodes (or `⊥`) that precede it.
#[derive(Clone, Copy, Debug)]
pub struct DagNode {
    /// Index into the marker-set table of the evaluation.
    pub label: u32,
    pub position: usize,
    pub list: NodeList,
}

/// Next stage expected by an [`Evaluator`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Capturing(usize),
    Reading(usize),
    Done,
}

/// Step-by-step evaluation of a deterministic sequential eVA over a
/// document. [`evaluate_preprocess`] drives it to completion.
pub struct Evaluator<'a> {
    automaton: &'a Eva,
    doc: Vec<u32>,
    letter: Vec<Vec<Option<StateId>>>,
    markers: Vec<Vec<(u32, StateId)>>,
    table: Vec<MarkerSet>,
    arena: ListArena,
    nodes: Vec<DagNode>,
    lists: Vec<NodeList>,
    old: Vec<NodeList>,
    live: Vec<StateId>,
    mark: Vec<u64>,
    epoch: u64,
    ops: u64,
    stage: Stage,
}

impl<'a> Evaluator<'a> {
    /// Prepares the evaluation without checking that `a` is deterministic
    /// and sequential.
    pub fn new(a: &'a Eva, d: &Document) -> Result<Self> {
        if a.has_epsilon() {
            return Err(Error::Precondition("automaton has ε transitions".into()));
        }
        let sigma: Vec<char> = a.alphabet().iter().copied().collect();
        let doc = d
            .symbols()
            .iter()
            .map(|c| {
                sigma
                    .binary_search(c)
                    .map(|k| k as u32)
                    .map_err(|_| Error::UndeclaredSymbol(*c))
            })
            .collect::<Result<Vec<u32>>>()?;
        let mut table: Vec<MarkerSet> = Vec::new();
        let mut table_index: HashMap<MarkerSet, u32> = HashMap::new();
        let mut letter = vec![vec![None; sigma.len()]; a.num_states()];
        let mut markers = vec![Vec::new(); a.num_states()];
        for (p, label, q) in a.transitions() {
            match label {
                EvaLabel::Symbol(c) => {
                    let k = sigma.binary_search(c).expect("declared symbol");
                    letter[p][k] = Some(q);
                }
                EvaLabel::Markers(set) => {
                    let id = *table_index.entry(set.clone()).or_insert_with(|| {
                        table.push(set.clone());
                        (table.len() - 1) as u32
                    });
                    markers[p].push((id, q));
                }
                EvaLabel::Epsilon => unreachable!("checked above"),
            }
        }
        let n = a.num_states();
        let mut arena = ListArena::new();
        let mut lists = vec![NodeList::EMPTY; n];
        arena.add(&mut lists[a.initial()], Payload::Bottom);
        Ok(Evaluator {
            automaton: a,
            doc,
            letter,
            markers,
            table,
            arena,
            nodes: Vec::new(),
            lists,
            old: vec![NodeList::EMPTY; n],
            live: vec![a.initial()],
            mark: vec![0; n],
            epoch: 0,
            ops: 1,
            stage: Stage::Capturing(1),
        })
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    /// Abstract operation count so far: list method calls, node creations
    /// and transition lookups.
    pub fn ops(&self) -> u64 {
        self.ops
    }

    /// States with a nonempty list, ascending.
    pub fn live_states(&self) -> &[StateId] {
        &self.live
    }

    pub fn list(&self, q: StateId) -> NodeList {
        self.lists[q]
    }

    /// Payloads of `list_q` in list order.
    pub fn list_payloads(&self, q: StateId) -> Vec<Payload> {
        self.arena.iter(self.lists[q]).collect()
    }

    pub fn node(&self, id: NodeId) -> &DagNode {
        &self.nodes[id as usize]
    }

    pub fn marker_set(&self, label: u32) -> &MarkerSet {
        &self.table[label as usize]
    }

    pub fn arena(&self) -> &ListArena {
        &self.arena
    }

    fn next_epoch(&mut self) -> u64 {
        self.epoch += 1;
        self.epoch
    }

    /// Variable step at position `i`: every live state may apply one of its
    /// marker sets, creating a node that remembers the state's list before
    /// this stage.
    pub fn capturing(&mut self, i: usize) {
        assert_eq!(self.stage, Stage::Capturing(i), "stages out of order");
        let epoch = self.next_epoch();
        for &q in &self.live {
            self.old[q] = self.lists[q].lazycopy();
            self.mark[q] = epoch;
            self.ops += 1;
        }
        let mut next_live = self.live.clone();
        for &q in &self.live {
            for &(label, p) in &self.markers[q] {
                let id = self.nodes.len() as NodeId;
                // Checking the whole list would make debug builds quadratic;
                // its first element is the most recent one.
                debug_assert!(self.old[q].bounds().is_none_or(|(first, _)| {
                    match self.arena.payload(first) {
                        Payload::Bottom => true,
                        Payload::Node(m) => self.nodes[m as usize].position < i,
                    }
                }));
                self.nodes.push(DagNode {
                    label,
                    position: i,
                    list: self.old[q],
                });
                self.arena.add(&mut self.lists[p], Payload::Node(id));
                self.ops += 2;
                if self.mark[p] != epoch {
                    self.mark[p] = epoch;
                    next_live.push(p);
                }
            }
        }
        next_live.sort_unstable();
        self.live = next_live;
        self.stage = if i > self.doc.len() {
            Stage::Done
        } else {
            Stage::Reading(i)
        };
    }

    /// Letter step at position `i`: lists move along the letter transitions
    /// of `a_i`; lists arriving at the same state are concatenated.
    pub fn reading(&mut self, i: usize) {
        assert_eq!(self.stage, Stage::Reading(i), "stages out of order");
        let symbol = self.doc[i - 1] as usize;
        for &q in &self.live {
            self.old[q] = self.lists[q].lazycopy();
            self.lists[q] = NodeList::EMPTY;
            self.ops += 2;
        }
        let epoch = self.next_epoch();
        let mut next_live = Vec::new();
        for &q in &self.live {
            self.ops += 1;
            if let Some(p) = self.letter[q][symbol] {
                self.arena.append(&mut self.lists[p], self.old[q]);
                self.ops += 1;
                if self.mark[p] != epoch {
                    self.mark[p] = epoch;
                    next_live.push(p);
                }
            }
        }
        next_live.sort_unstable();
        self.live = next_live;
        self.stage = Stage::Capturing(i + 1);
    }

    /// Runs all remaining stages.
    pub fn run_to_end(&mut self) {
        loop {
            match self.stage {
                Stage::Capturing(i) => self.capturing(i),
                Stage::Reading(i) => self.reading(i),
                Stage::Done => break,
            }
        }
    }

    /// Freezes a completed evaluation.
    pub fn finish(mut self) -> EvaluationState {
        self.run_to_end();
        let finals = self
            .automaton
            .finals()
            .filter(|&q| !self.lists[q].is_empty())
            .map(|q| self.lists[q])
            .collect();
        EvaluationState {
            arena: self.arena,
            nodes: self.nodes,
            table: self.table,
            finals,
            ops: self.ops,
            doc_len: self.doc.len(),
        }
    }
}

/// Result of preprocessing: the DAG and the lists of the final states.
/// Immutable; any number of streams may traverse it.
#[derive(Debug)]
pub struct EvaluationState {
    pub(crate) arena: ListArena,
    pub(crate) nodes: Vec<DagNode>,
    pub(crate) table: Vec<MarkerSet>,
    pub(crate) finals: Vec<NodeList>,
    ops: u64,
    doc_len: usize,
}

impl EvaluationState {
    /// Operation count of the preprocessing sweep.
    pub fn preprocessing_ops(&self) -> u64 {
        self.ops
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn document_len(&self) -> usize {
        self.doc_len
    }

    /// True if no final state is live: the result is empty.
    pub fn is_empty(&self) -> bool {
        self.finals.is_empty()
    }
}

/// Runs the preprocessing phase after checking that `a` is deterministic and
/// sequential.
pub fn evaluate_preprocess(a: &Eva, d: &Document) -> Result<EvaluationState> {
    evaluate_preprocess_with(a, d, true)
}

/// Runs the preprocessing phase; with `validate == false` the
/// deterministic/sequential check is skipped and the output on other
/// automata is unspecified.
pub fn evaluate_preprocess_with(a: &Eva, d: &Document, validate: bool) -> Result<EvaluationState> {
    if validate {
        let r = classify(a)?;
        if !r.deterministic {
            return Err(Error::Precondition(format!(
                "automaton is not deterministic: {}",
                r.deterministic_witness.unwrap_or_default()
            )));
        }
        if !r.sequential {
            return Err(Error::Precondition(format!(
                "automaton is not sequential: {}",
                r.sequential_witness.unwrap_or_default()
            )));
        }
    }
    Ok(Evaluator::new(a, d)?.finish())
}
