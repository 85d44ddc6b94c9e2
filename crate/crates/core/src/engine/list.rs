//! Linked lists with constant-time prepend, lazy copy and append.
//!
//! Elements live in an arena and are never freed individually. A list is a
//! pair of handles `(start, end)`; iteration stops at `end` rather than at an
//! unset `next`, so a copy keeps its range even after the original gains
//! elements at either side.

/// Index of an element in the arena.
pub type ElemId = u32;
/// Index of a DAG node.
pub type NodeId = u32;

const UNSET: ElemId = ElemId::MAX;

/// What a list element points to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Payload {
    /// The sink `⊥`.
    Bottom,
    Node(NodeId),
}

#[derive(Clone, Copy, Debug)]
struct Element {
    payload: Payload,
    next: ElemId,
}

/// Handle pair describing a list. `Copy`: copying the handles is the lazy
/// copy operation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct NodeList {
    range: Option<(ElemId, ElemId)>,
}

impl NodeList {
    pub const EMPTY: NodeList = NodeList { range: None };

    pub fn is_empty(&self) -> bool {
        self.range.is_none()
    }

    /// Start and end elements of a nonempty list.
    pub fn bounds(&self) -> Option<(ElemId, ElemId)> {
        self.range
    }

    /// Constant-time snapshot of the list.
    pub fn lazycopy(&self) -> NodeList {
        *self
    }
}

/// Arena holding list elements.
#[derive(Clone, Debug, Default)]
pub struct ListArena {
    elems: Vec<Element>,
}

impl ListArena {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    /// Inserts `payload` at the beginning of `list`.
    pub fn add(&mut self, list: &mut NodeList, payload: Payload) {
        let id = self.elems.len() as ElemId;
        match list.range {
            None => {
                self.elems.push(Element {
                    payload,
                    next: UNSET,
                });
                list.range = Some((id, id));
            }
            Some((start, end)) => {
                self.elems.push(Element {
                    payload,
                    next: start,
                });
                list.range = Some((id, end));
            }
        }
    }

    /// Appends `other` at the end of `list`.
    ///
    /// Panics if `other` is empty or if the end element of `list` already
    /// has a successor: each element's `next` is written at most once.
    /// The end element of `list` must not be reachable from `other`, or the
    /// successor links become cyclic.
    pub fn append(&mut self, list: &mut NodeList, other: NodeList) {
        let (ostart, oend) = other.range.expect("append of an empty list");
        match list.range {
            None => list.range = Some((ostart, oend)),
            Some((start, end)) => {
                let e = &mut self.elems[end as usize];
                assert_eq!(e.next, UNSET, "list element appended to twice");
                e.next = ostart;
                list.range = Some((start, oend));
            }
        }
    }

    pub fn payload(&self, e: ElemId) -> Payload {
        self.elems[e as usize].payload
    }

    /// Successor of `e`, if set.
    pub fn next(&self, e: ElemId) -> Option<ElemId> {
        let n = self.elems[e as usize].next;
        (n != UNSET).then_some(n)
    }

    /// Iterates the payloads of `list` from start to end.
    pub fn iter(&self, list: NodeList) -> ListIter<'_> {
        ListIter {
            arena: self,
            cursor: list.range,
        }
    }
}

pub struct ListIter<'a> {
    arena: &'a ListArena,
    cursor: Option<(ElemId, ElemId)>,
}

impl Iterator for ListIter<'_> {
    type Item = Payload;

    fn next(&mut self) -> Option<Payload> {
        let (cur, end) = self.cursor?;
        self.cursor = if cur == end {
            None
        } else {
            let next = self.arena.next(cur).expect("list range broken");
            Some((next, end))
        };
        Some(self.arena.payload(cur))
    }
}
