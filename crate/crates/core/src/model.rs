//! Documents, spans, variables, markers and mappings.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A finite set of single-character symbols.
pub type Alphabet = BTreeSet<char>;

/// A document over a declared alphabet.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Document {
    symbols: Vec<char>,
}

impl Document {
    /// Builds a document, rejecting symbols outside `alphabet`.
    pub fn new(text: &str, alphabet: &Alphabet) -> Result<Self> {
        let symbols: Vec<char> = text.chars().collect();
        if let Some(&c) = symbols.iter().find(|c| !alphabet.contains(c)) {
            return Err(Error::UndeclaredSymbol(c));
        }
        Ok(Document { symbols })
    }

    /// Builds a document without alphabet validation.
    pub fn from_text(text: &str) -> Self {
        Document {
            symbols: text.chars().collect(),
        }
    }

    pub fn from_symbols(symbols: Vec<char>) -> Self {
        Document { symbols }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    /// Symbol at 1-based position `i`.
    pub fn at(&self, i: usize) -> char {
        self.symbols[i - 1]
    }

    /// The set of symbols occurring in the document.
    pub fn alphabet(&self) -> Alphabet {
        self.symbols.iter().copied().collect()
    }

    /// Checks every symbol against `alphabet`.
    pub fn validate(&self, alphabet: &Alphabet) -> Result<()> {
        match self.symbols.iter().find(|c| !alphabet.contains(c)) {
            Some(&c) => Err(Error::UndeclaredSymbol(c)),
            None => Ok(()),
        }
    }

    /// Content of `span`; panics if the span does not belong to this document.
    pub fn content(&self, span: Span) -> String {
        assert!(span.end <= self.len() + 1, "span {span} outside document");
        self.symbols[span.start - 1..span.end - 1].iter().collect()
    }

    /// Every span of the document, ordered by start then end.
    pub fn spans(&self) -> Vec<Span> {
        all_spans(self.len())
    }
}

impl fmt::Display for Document {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.symbols.iter().try_for_each(|c| write!(f, "{c}"))
    }
}

/// Half-open interval `[start, end>` with 1-based positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    /// Panics unless `1 <= start <= end`.
    pub fn new(start: usize, end: usize) -> Self {
        Self::try_new(start, end).unwrap_or_else(|| panic!("invalid span [{start},{end}>"))
    }

    pub fn try_new(start: usize, end: usize) -> Option<Self> {
        (1 <= start && start <= end).then_some(Span { start, end })
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}>", self.start, self.end)
    }
}

/// Concatenation of adjacent spans.
pub fn span_concat(s1: Span, s2: Span) -> Result<Span> {
    if s1.end != s2.start {
        return Err(Error::NonAdjacentSpans(s1.to_string(), s2.to_string()));
    }
    Ok(Span::new(s1.start, s2.end))
}

/// All `(n+1)(n+2)/2` spans of a document of length `n`.
pub fn all_spans(n: usize) -> Vec<Span> {
    (1..=n + 1)
        .flat_map(|i| (i..=n + 1).map(move |j| Span::new(i, j)))
        .collect()
}

/// A capture variable, ordered by name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variable(Arc<str>);

impl Variable {
    pub fn new(name: &str) -> Self {
        Variable(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Variable {
    fn from(name: &str) -> Self {
        Variable::new(name)
    }
}

impl fmt::Debug for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Variable {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Variable {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(Variable::new(&s))
    }
}

/// Opening or closing marker. Opens sort before closes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MarkerKind {
    Open,
    Close,
}

/// A variable marker `⊢x` or `⊣x`.
///
/// The derived order (kind first, then variable) is the order used when an
/// extended transition is expanded into a chain of single-marker transitions.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Marker {
    pub kind: MarkerKind,
    pub var: Variable,
}

impl Marker {
    pub fn open(var: impl Into<Variable>) -> Self {
        Marker {
            kind: MarkerKind::Open,
            var: var.into(),
        }
    }

    pub fn close(var: impl Into<Variable>) -> Self {
        Marker {
            kind: MarkerKind::Close,
            var: var.into(),
        }
    }

    pub fn is_open(&self) -> bool {
        self.kind == MarkerKind::Open
    }
}

impl fmt::Display for Marker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            MarkerKind::Open => write!(f, "open:{}", self.var),
            MarkerKind::Close => write!(f, "close:{}", self.var),
        }
    }
}

impl fmt::Debug for Marker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Marker {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidAutomaton(format!("malformed marker {s:?}"));
        let (kind, var) = s.split_once(':').ok_or_else(bad)?;
        if var.is_empty() {
            return Err(bad());
        }
        match kind {
            "open" => Ok(Marker::open(var)),
            "close" => Ok(Marker::close(var)),
            _ => Err(bad()),
        }
    }
}

impl Serialize for Marker {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Marker {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A set of markers kept sorted in marker order.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "Vec<Marker>", into = "Vec<Marker>")]
pub struct MarkerSet(Vec<Marker>);

impl MarkerSet {
    pub fn new() -> Self {
        MarkerSet(Vec::new())
    }

    pub fn singleton(m: Marker) -> Self {
        MarkerSet(vec![m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, m: &Marker) -> bool {
        self.0.binary_search(m).is_ok()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Marker> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[Marker] {
        &self.0
    }

    /// Inserts `m`; returns false if it was already present.
    pub fn insert(&mut self, m: Marker) -> bool {
        match self.0.binary_search(&m) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, m);
                true
            }
        }
    }

    pub fn union(&self, other: &MarkerSet) -> MarkerSet {
        self.0.iter().chain(other.0.iter()).cloned().collect()
    }

    pub fn is_disjoint(&self, other: &MarkerSet) -> bool {
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        while let (Some(x), Some(y)) = (a.peek(), b.peek()) {
            match x.cmp(y) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    /// Markers whose variable belongs to `vars`.
    pub fn restrict(&self, vars: &BTreeSet<Variable>) -> MarkerSet {
        MarkerSet(
            self.0
                .iter()
                .filter(|m| vars.contains(&m.var))
                .cloned()
                .collect(),
        )
    }

    /// Markers whose variable does not belong to `vars`.
    pub fn without(&self, vars: &BTreeSet<Variable>) -> MarkerSet {
        MarkerSet(
            self.0
                .iter()
                .filter(|m| !vars.contains(&m.var))
                .cloned()
                .collect(),
        )
    }

    pub fn variables(&self) -> BTreeSet<Variable> {
        self.0.iter().map(|m| m.var.clone()).collect()
    }
}

impl FromIterator<Marker> for MarkerSet {
    fn from_iter<I: IntoIterator<Item = Marker>>(iter: I) -> Self {
        let mut v: Vec<Marker> = iter.into_iter().collect();
        v.sort();
        v.dedup();
        MarkerSet(v)
    }
}

impl From<Vec<Marker>> for MarkerSet {
    fn from(v: Vec<Marker>) -> Self {
        v.into_iter().collect()
    }
}

impl From<MarkerSet> for Vec<Marker> {
    fn from(s: MarkerSet) -> Self {
        s.0
    }
}

impl<'a> IntoIterator for &'a MarkerSet {
    type Item = &'a Marker;
    type IntoIter = std::slice::Iter<'a, Marker>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for MarkerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, m) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{m}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for MarkerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A partial function from variables to spans.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mapping(BTreeMap<Variable, Span>);

impl Mapping {
    pub fn new() -> Self {
        Mapping(BTreeMap::new())
    }

    pub fn get(&self, x: &Variable) -> Option<Span> {
        self.0.get(x).copied()
    }

    pub fn insert(&mut self, x: Variable, s: Span) -> Option<Span> {
        self.0.insert(x, s)
    }

    /// Builder-style insert.
    pub fn with(mut self, x: &str, start: usize, end: usize) -> Self {
        self.0.insert(Variable::new(x), Span::new(start, end));
        self
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn domain(&self) -> BTreeSet<Variable> {
        self.0.keys().cloned().collect()
    }

    pub fn contains(&self, x: &Variable) -> bool {
        self.0.contains_key(x)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Variable, &Span)> {
        self.0.iter()
    }

    /// True iff the two mappings agree on every shared variable.
    pub fn compatible(&self, other: &Mapping) -> bool {
        self.0
            .iter()
            .all(|(x, s)| other.0.get(x).is_none_or(|t| s == t))
    }

    /// Union of two compatible mappings.
    pub fn union(&self, other: &Mapping) -> Result<Mapping> {
        let mut out = self.clone();
        for (x, s) in &other.0 {
            match out.0.get(x) {
                Some(t) if t != s => return Err(Error::IncompatibleMappings(x.to_string())),
                _ => {
                    out.0.insert(x.clone(), *s);
                }
            }
        }
        Ok(out)
    }

    /// Restriction to the variables in `vars`.
    pub fn project(&self, vars: &BTreeSet<Variable>) -> Mapping {
        Mapping(
            self.0
                .iter()
                .filter(|(x, _)| vars.contains(*x))
                .map(|(x, s)| (x.clone(), *s))
                .collect(),
        )
    }

    /// Builds the mapping described by a sequence of marker events
    /// `(S, i)`: `⊢x` at `i` and `⊣x` at `j` give `x -> [i,j>`.
    ///
    /// Panics if a variable is closed without being opened.
    pub fn from_events<'a, I>(events: I) -> Mapping
    where
        I: IntoIterator<Item = (&'a MarkerSet, usize)>,
    {
        let mut opens: BTreeMap<Variable, usize> = BTreeMap::new();
        let mut closes: BTreeMap<Variable, usize> = BTreeMap::new();
        for (set, i) in events {
            for m in set {
                let slot = if m.is_open() { &mut opens } else { &mut closes };
                slot.insert(m.var.clone(), i);
            }
        }
        let mut out = Mapping::new();
        for (x, j) in closes {
            let i = *opens
                .get(&x)
                .unwrap_or_else(|| panic!("variable {x} closed but never opened"));
            out.insert(x, Span::new(i, j));
        }
        out
    }

    /// Canonical text form: `x=[1,3>,y=[2,3>`.
    pub fn canonical(&self) -> String {
        self.to_string()
    }

    /// JSON object form: `{"x":[1,3],"y":[2,3]}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Object(
            self.0
                .iter()
                .map(|(x, s)| (x.to_string(), serde_json::json!([s.start, s.end])))
                .collect(),
        )
    }
}

impl fmt::Display for Mapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (x, s)) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}={s}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Mapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

impl FromIterator<(Variable, Span)> for Mapping {
    fn from_iter<I: IntoIterator<Item = (Variable, Span)>>(iter: I) -> Self {
        Mapping(iter.into_iter().collect())
    }
}

/// A duplicate-free set of mappings.
pub type MappingSet = BTreeSet<Mapping>;

/// `M1 ⋈ M2`: unions of all compatible pairs.
pub fn mapping_set_join(m1: &MappingSet, m2: &MappingSet) -> MappingSet {
    let mut out = MappingSet::new();
    for a in m1 {
        for b in m2 {
            if a.compatible(b) {
                out.insert(a.union(b).expect("compatible mappings"));
            }
        }
    }
    out
}

/// `{ μ|_Y : μ ∈ M }`.
pub fn mapping_set_project(m: &MappingSet, vars: &BTreeSet<Variable>) -> MappingSet {
    m.iter().map(|mu| mu.project(vars)).collect()
}

/// Canonical serialization of a mapping set: one mapping per line, lines sorted.
pub fn canonical_lines(m: &MappingSet) -> Vec<String> {
    let mut lines: Vec<String> = m.iter().map(Mapping::canonical).collect();
    lines.sort();
    lines
}

/// Convenience for building variable sets in tests and fixtures.
pub fn vars<'a>(names: impl IntoIterator<Item = &'a str>) -> BTreeSet<Variable> {
    names.into_iter().map(Variable::new).collect()
}
