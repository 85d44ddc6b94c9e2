//! Counting outputs without enumerating them.

use log::info;
use num_bigint::BigUint;
use num_traits::Zero;

use crate::automata::{
    brute_enumerate, classify, functional_va_to_det_seva, AnyAutomaton, Eva, EvaLabel, Va,
};
use crate::error::{Error, Result};
use crate::model::Document;

/// Output count together with the number of counter updates performed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountReport {
    pub count: BigUint,
    pub ops: u64,
}

/// `|⟦A⟧_d|` for a deterministic sequential eVA, in time `O(|A|·|d|)`.
pub fn count_det_seva(a: &Eva, d: &Document) -> Result<BigUint> {
    count_det_seva_report(a, d).map(|r| r.count)
}

/// Like [`count_det_seva`], also reporting the operation count.
pub fn count_det_seva_report(a: &Eva, d: &Document) -> Result<CountReport> {
    let r = classify(a)?;
    if !(r.deterministic && r.sequential) {
        return Err(Error::Precondition(
            "counting needs a deterministic sequential eVA".into(),
        ));
    }
    d.validate(a.alphabet())?;
    Ok(count_unchecked(a, d))
}

fn count_unchecked(a: &Eva, d: &Document) -> CountReport {
    let n = a.num_states();
    let mut counts = vec![BigUint::zero(); n];
    counts[a.initial()] = BigUint::from(1u32);
    let mut ops = 1u64;
    let capturing = |counts: &mut Vec<BigUint>, ops: &mut u64| {
        let old = counts.clone();
        for (q, c) in old.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (label, p) in a.out(q) {
                if let EvaLabel::Markers(_) = label {
                    counts[*p] += c;
                    *ops += 1;
                }
            }
        }
    };
    for &symbol in d.symbols() {
        capturing(&mut counts, &mut ops);
        let old = std::mem::replace(&mut counts, vec![BigUint::zero(); n]);
        for (q, c) in old.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if let Some(p) = a.letter_target(q, symbol) {
                counts[p] += c;
                ops += 1;
            }
        }
    }
    capturing(&mut counts, &mut ops);
    let count = a.finals().map(|q| &counts[q]).sum();
    CountReport { count, ops }
}

/// `|⟦A⟧_d|` by exhaustive run search.
pub fn count_oracle(a: &AnyAutomaton, d: &Document) -> BigUint {
    BigUint::from(brute_enumerate(a, d).len())
}

/// `|⟦A⟧_d|` for a functional VA. The automaton is first determinized, which
/// may take exponential time in its number of states.
pub fn count_functional_va(a: &Va, d: &Document) -> Result<BigUint> {
    let det = functional_va_to_det_seva(a)?;
    info!(
        "determinized functional VA for counting: {} states -> {} states, {} transitions",
        a.num_states(),
        det.num_states(),
        det.num_transitions()
    );
    count_det_seva(&det, d)
}
