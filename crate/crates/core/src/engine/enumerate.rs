//! Enumeration: depth-first traversal of the DAG from the final lists down
//! to `⊥`, with an explicit stack.

use serde::Serialize;

use super::eval::EvaluationState;
use super::list::{ElemId, ListArena, NodeList, Payload};
use crate::model::{Mapping, MarkerSet};

#[derive(Clone, Copy, Debug)]
struct Frame {
    cursor: Option<ElemId>,
    end: ElemId,
    /// Whether entering this frame pushed an event on the path.
    event: bool,
}

/// Streams the mappings of a completed evaluation, each exactly once.
///
/// Order: final states ascending, then list order within each list.
pub struct MappingStream<'s> {
    st: &'s EvaluationState,
    next_final: usize,
    stack: Vec<Frame>,
    /// Events from the latest (top of the DAG) to the earliest.
    path: Vec<(u32, usize)>,
    work: u64,
}

impl<'s> MappingStream<'s> {
    pub fn new(st: &'s EvaluationState) -> Self {
        MappingStream {
            st,
            next_final: 0,
            stack: Vec::new(),
            path: Vec::new(),
            work: 0,
        }
    }

    /// Elementary steps (element visits and frame pops) since the last call.
    pub fn take_work(&mut self) -> u64 {
        std::mem::take(&mut self.work)
    }

    fn push_list(&mut self, list: NodeList, event: bool) {
        let (start, end) = list.bounds().expect("DAG lists are nonempty");
        self.stack.push(Frame {
            cursor: Some(start),
            end,
            event,
        });
    }

    /// Advances to the next output; on success the current path holds its
    /// events.
    fn advance(&mut self) -> bool {
        let st: &'s EvaluationState = self.st;
        let arena: &ListArena = &st.arena;
        loop {
            let Some(top) = self.stack.last_mut() else {
                match st.finals.get(self.next_final) {
                    Some(&list) => {
                        self.next_final += 1;
                        self.push_list(list, false);
                        continue;
                    }
                    None => return false,
                }
            };
            let Some(e) = top.cursor else {
                let frame = self.stack.pop().expect("nonempty stack");
                if frame.event {
                    self.path.pop();
                }
                self.work += 1;
                continue;
            };
            self.work += 1;
            top.cursor = if e == top.end { None } else { arena.next(e) };
            match arena.payload(e) {
                Payload::Bottom => return true,
                Payload::Node(n) => {
                    let node = st.nodes[n as usize];
                    self.path.push((node.label, node.position));
                    self.push_list(node.list, true);
                }
            }
        }
    }

    /// Next output as its chronological sequence of `(S, i)` events.
    pub fn next_events(&mut self) -> Option<Vec<(MarkerSet, usize)>> {
        self.advance().then(|| {
            self.path
                .iter()
                .rev()
                .map(|&(label, i)| (self.st.table[label as usize].clone(), i))
                .collect()
        })
    }
}

impl Iterator for MappingStream<'_> {
    type Item = Mapping;

    fn next(&mut self) -> Option<Mapping> {
        if !self.advance() {
            return None;
        }
        let table = &self.st.table;
        Some(Mapping::from_events(
            self.path
                .iter()
                .map(|&(label, i)| (&table[label as usize], i)),
        ))
    }
}

/// Stream over the mappings of `st`.
pub fn enumerate_stream(st: &EvaluationState) -> MappingStream<'_> {
    MappingStream::new(st)
}

/// Work profile of a full enumeration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DelayReport {
    /// Largest number of elementary steps between two consecutive outputs,
    /// before the first, or after the last.
    pub max_inter_output_work: u64,
    pub work_before_first: u64,
    pub work_after_last: u64,
    pub total_enumeration_work: u64,
    pub preprocessing_ops: u64,
    pub outputs: u64,
}

/// Enumerates everything while recording the work between outputs.
pub fn measure_delay(st: &EvaluationState) -> DelayReport {
    let mut stream = MappingStream::new(st);
    let mut report = DelayReport {
        preprocessing_ops: st.preprocessing_ops(),
        ..DelayReport::default()
    };
    while stream.advance() {
        let w = stream.take_work();
        if report.outputs == 0 {
            report.work_before_first = w;
        }
        report.max_inter_output_work = report.max_inter_output_work.max(w);
        report.total_enumeration_work += w;
        report.outputs += 1;
    }
    let w = stream.take_work();
    report.work_after_last = w;
    report.max_inter_output_work = report.max_inter_output_work.max(w);
    report.total_enumeration_work += w;
    report
}

/// All `(S, i)` sequences encoded by `list`, by plain recursion. Used to
/// inspect intermediate lists.
pub fn partial_outputs(
    arena: &ListArena,
    node: impl Fn(u32) -> (MarkerSet, usize, NodeList),
    list: NodeList,
) -> Vec<Vec<(MarkerSet, usize)>> {
    fn go(
        arena: &ListArena,
        node: &dyn Fn(u32) -> (MarkerSet, usize, NodeList),
        list: NodeList,
        suffix: &mut Vec<(MarkerSet, usize)>,
        out: &mut Vec<Vec<(MarkerSet, usize)>>,
    ) {
        for payload in arena.iter(list) {
            match payload {
                Payload::Bottom => out.push(suffix.iter().rev().cloned().collect()),
                Payload::Node(n) => {
                    let (set, i, l) = node(n);
                    suffix.push((set, i));
                    go(arena, node, l, suffix, out);
                    suffix.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    go(arena, &node, list, &mut Vec::new(), &mut out);
    out
}
