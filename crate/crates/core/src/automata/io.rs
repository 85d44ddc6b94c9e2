//! JSON exchange format for automata.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Automaton, Eva, EvaLabel, Label, StateId, Va, VaLabel};
use crate::error::{Error, Result};
use crate::model::{Marker, MarkerSet, Variable};

/// Serialized automaton.
///
/// `kind` is optional on input: without it, a file whose variable
/// transitions all carry a single marker and which has no ε transitions is
/// read as a VA, anything else as an eVA.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AutomatonFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub alphabet: Vec<String>,
    #[serde(default)]
    pub variables: Vec<String>,
    pub states: Vec<String>,
    pub initial: String,
    #[serde(default)]
    pub finals: Vec<String>,
    #[serde(default)]
    pub transitions: Vec<TransitionRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub from: String,
    pub to: String,
    pub label: LabelRecord,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelRecord {
    Symbol { symbol: String },
    Markers { markers: Vec<String> },
    Epsilon { epsilon: bool },
}

/// Either kind of automaton, as read from a file.
#[derive(Clone, Debug)]
pub enum AnyAutomaton {
    Va(Va),
    Eva(Eva),
}

impl AnyAutomaton {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: AutomatonFile = serde_json::from_str(text)?;
        file.into_automaton()
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        match self {
            AnyAutomaton::Va(a) => a.to_json(),
            AnyAutomaton::Eva(a) => a.to_json(),
        }
    }

    pub fn variables(&self) -> &BTreeSet<Variable> {
        match self {
            AnyAutomaton::Va(a) => a.variables(),
            AnyAutomaton::Eva(a) => a.variables(),
        }
    }

    pub fn alphabet(&self) -> &crate::model::Alphabet {
        match self {
            AnyAutomaton::Va(a) => a.alphabet(),
            AnyAutomaton::Eva(a) => a.alphabet(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            AnyAutomaton::Va(a) => a.size(),
            AnyAutomaton::Eva(a) => a.size(),
        }
    }
}

fn single_char(s: &str, what: &str) -> Result<char> {
    let mut it = s.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(Error::InvalidAutomaton(format!(
            "{what} {s:?} is not a single symbol"
        ))),
    }
}

impl AutomatonFile {
    pub fn into_automaton(self) -> Result<AnyAutomaton> {
        let as_va = match self.kind.as_deref() {
            Some("va") => true,
            Some("eva") => false,
            Some(other) => return Err(Error::InvalidAutomaton(format!("unknown kind {other:?}"))),
            None => self.transitions.iter().all(|t| match &t.label {
                LabelRecord::Markers { markers } => markers.len() == 1,
                LabelRecord::Epsilon { .. } => false,
                LabelRecord::Symbol { .. } => true,
            }),
        };
        if as_va {
            self.build(|label| match label {
                LabelRecord::Symbol { symbol } => {
                    Ok(VaLabel::Symbol(single_char(symbol, "symbol")?))
                }
                LabelRecord::Markers { markers } if markers.len() == 1 => {
                    Ok(VaLabel::Marker(markers[0].parse()?))
                }
                LabelRecord::Markers { .. } => Err(Error::InvalidAutomaton(
                    "VA transitions carry exactly one marker".into(),
                )),
                LabelRecord::Epsilon { .. } => {
                    Err(Error::InvalidAutomaton("VA transitions cannot be ε".into()))
                }
            })
            .map(AnyAutomaton::Va)
        } else {
            self.build(|label| match label {
                LabelRecord::Symbol { symbol } => {
                    Ok(EvaLabel::Symbol(single_char(symbol, "symbol")?))
                }
                LabelRecord::Markers { markers } => {
                    let set: MarkerSet = markers
                        .iter()
                        .map(|m| m.parse::<Marker>())
                        .collect::<Result<Vec<_>>>()?
                        .into();
                    if set.len() != markers.len() {
                        return Err(Error::InvalidAutomaton("duplicate marker in set".into()));
                    }
                    if set.is_empty() {
                        return Err(Error::InvalidAutomaton("empty marker set".into()));
                    }
                    Ok(EvaLabel::Markers(set))
                }
                LabelRecord::Epsilon { epsilon: true } => Ok(EvaLabel::Epsilon),
                LabelRecord::Epsilon { epsilon: false } => {
                    Err(Error::InvalidAutomaton("epsilon label must be true".into()))
                }
            })
            .map(AnyAutomaton::Eva)
        }
    }

    fn build<L: Label>(&self, convert: impl Fn(&LabelRecord) -> Result<L>) -> Result<Automaton<L>> {
        let alphabet = self
            .alphabet
            .iter()
            .map(|s| single_char(s, "alphabet entry"))
            .collect::<Result<_>>()?;
        let variables: BTreeSet<Variable> =
            self.variables.iter().map(|v| Variable::new(v)).collect();
        let mut a = Automaton::empty(alphabet, variables);
        let mut index: HashMap<&str, StateId> = HashMap::new();
        for name in &self.states {
            if index.insert(name, a.add_state(name.clone())).is_some() {
                return Err(Error::InvalidAutomaton(format!("duplicate state {name:?}")));
            }
        }
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::InvalidAutomaton(format!("unknown state {name:?}")))
        };
        if self.states.is_empty() {
            return Err(Error::InvalidAutomaton("no states".into()));
        }
        a.set_initial(lookup(&self.initial)?);
        for f in &self.finals {
            a.set_final(lookup(f)?, true);
        }
        for t in &self.transitions {
            let label = convert(&t.label)?;
            if let Some(c) = label.symbol() {
                if !a.alphabet().contains(&c) {
                    return Err(Error::InvalidAutomaton(format!(
                        "symbol {c:?} not in alphabet"
                    )));
                }
            }
            for m in label.marker_list() {
                if !a.variables().contains(&m.var) {
                    return Err(Error::InvalidAutomaton(format!(
                        "marker {m} uses an undeclared variable"
                    )));
                }
            }
            a.add_transition(lookup(&t.from)?, label, lookup(&t.to)?);
        }
        Ok(a)
    }
}

fn label_record_va(l: &VaLabel) -> LabelRecord {
    match l {
        VaLabel::Symbol(c) => LabelRecord::Symbol {
            symbol: c.to_string(),
        },
        VaLabel::Marker(m) => LabelRecord::Markers {
            markers: vec![m.to_string()],
        },
    }
}

fn label_record_eva(l: &EvaLabel) -> LabelRecord {
    match l {
        EvaLabel::Symbol(c) => LabelRecord::Symbol {
            symbol: c.to_string(),
        },
        EvaLabel::Markers(s) => LabelRecord::Markers {
            markers: s.iter().map(|m| m.to_string()).collect(),
        },
        EvaLabel::Epsilon => LabelRecord::Epsilon { epsilon: true },
    }
}

impl<L: Label> Automaton<L> {
    fn to_file_with(&self, kind: &str, record: impl Fn(&L) -> LabelRecord) -> AutomatonFile {
        AutomatonFile {
            kind: Some(kind.to_string()),
            alphabet: self.alphabet().iter().map(|c| c.to_string()).collect(),
            variables: self.variables().iter().map(|v| v.to_string()).collect(),
            states: self
                .states()
                .map(|q| self.state_name(q).to_string())
                .collect(),
            initial: self.state_name(self.initial()).to_string(),
            finals: self
                .finals()
                .map(|q| self.state_name(q).to_string())
                .collect(),
            transitions: self
                .transitions()
                .map(|(p, l, q)| TransitionRecord {
                    from: self.state_name(p).to_string(),
                    to: self.state_name(q).to_string(),
                    label: record(l),
                })
                .collect(),
        }
    }
}

impl Va {
    pub fn to_file(&self) -> AutomatonFile {
        Automaton::to_file_with(self, "va", label_record_va)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("serializable")
    }
}

impl Eva {
    pub fn to_file(&self) -> AutomatonFile {
        Automaton::to_file_with(self, "eva", label_record_eva)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("serializable")
    }
}
